//! Synthetic application-mix profiles.
//!
//! Two line-based files describe a mix. The application library lists each
//! core's class and its inclusive execution-time and resource ranges:
//!
//! ```text
//! # name     class  tex      clbs        brams   dsps
//! fft        3      20..40   1100..1600  20..50  40..100
//! ```
//!
//! The mix file has one `[S1]`-style section per mix with a `fractions`
//! line (per-class share of total workload) and `name count` lines.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    balance_workload, check_target, draw_arrivals, draw_deadlines, family_rng, finish, mean_work, Draft,
    GeneratorParams,
};
use crate::error::{Error, Result};
use crate::model::{FpgaConfig, Resources, Task, Time};
use crate::queues::select_queue;
use crate::taskset::{Family, SyntheticMix, TaskSet};

const BUNDLED_APPS: &str = include_str!("../../data/apps.profile");
const BUNDLED_MIXES: &str = include_str!("../../data/mixes.profile");

/// Instances per mix.
pub const SYNTHETIC_TASKS: usize = 52;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppProfile {
    pub name: String,
    pub count: usize,
    pub class: usize,
    pub tex: RangeInclusive<Time>,
    pub clbs: RangeInclusive<u32>,
    pub brams: RangeInclusive<u32>,
    pub dsps: RangeInclusive<u32>,
}

impl AppProfile {
    fn min_demand(&self) -> Resources {
        Resources::new(*self.clbs.start(), *self.brams.start(), *self.dsps.start())
    }

    fn max_demand(&self) -> Resources {
        Resources::new(*self.clbs.end(), *self.brams.end(), *self.dsps.end())
    }

    pub fn mean_tex(&self) -> f64 {
        (*self.tex.start() + *self.tex.end()) as f64 / 2.0
    }

    pub fn mean_clbs(&self) -> f64 {
        f64::from(*self.clbs.start() + *self.clbs.end()) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProfile {
    pub mix: SyntheticMix,
    /// Applications with a nonzero instance count, in file order.
    pub apps: Vec<AppProfile>,
    /// Normalised per-class workload shares.
    pub fractions: Vec<f64>,
}

impl SyntheticProfile {
    /// One of the mixes shipped with the crate.
    pub fn bundled(mix: SyntheticMix) -> SyntheticProfile {
        SyntheticProfile::parse(BUNDLED_APPS, BUNDLED_MIXES, mix).expect("bundled profiles are consistent")
    }

    /// Application library of the bundled mixes.
    pub fn bundled_library() -> Vec<AppProfile> {
        parse_apps(BUNDLED_APPS).expect("bundled application library parses")
    }

    pub fn parse(apps_text: &str, mixes_text: &str, mix: SyntheticMix) -> Result<SyntheticProfile> {
        let library = parse_apps(apps_text)?;
        let wanted = Family::Synthetic(mix).as_str();
        let mut in_section = false;
        let mut found = false;
        let mut fractions = None;
        let mut apps = Vec::new();
        for (idx, raw) in mixes_text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                in_section = name.trim().eq_ignore_ascii_case(wanted);
                found |= in_section;
                continue;
            }
            if !in_section {
                continue;
            }
            let lineno = idx + 1;
            if let Some(rest) = line.strip_prefix("fractions") {
                let rest = rest
                    .trim_start()
                    .strip_prefix('=')
                    .ok_or_else(|| Error::parse("mixes", lineno, "expected `fractions = ...`"))?;
                let values = rest
                    .split_whitespace()
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| Error::parse("mixes", lineno, format!("bad fraction `{v}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                fractions = Some(values);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [name, count] = fields[..] else {
                return Err(Error::parse("mixes", lineno, "expected `name count`"));
            };
            let count: usize = count
                .parse()
                .map_err(|_| Error::parse("mixes", lineno, format!("bad count `{count}`")))?;
            let app = library
                .iter()
                .find(|a| a.name == name)
                .ok_or_else(|| Error::Profile(format!("mix {wanted} uses unknown application `{name}`")))?;
            if count > 0 {
                apps.push(AppProfile { count, ..app.clone() });
            }
        }
        if !found {
            return Err(Error::Profile(format!("no [{wanted}] section")));
        }
        let fractions = fractions.ok_or_else(|| Error::Profile(format!("mix {wanted} has no fractions line")))?;
        let profile = SyntheticProfile {
            mix,
            apps,
            fractions: normalise(fractions, wanted)?,
        };
        Ok(profile)
    }

    pub fn n_tasks(&self) -> usize {
        self.apps.iter().map(|a| a.count).sum()
    }

    /// Checks counts, fractions and that every range box lies in its class.
    pub fn check(&self, cfg: &FpgaConfig) -> Result<()> {
        let name = Family::Synthetic(self.mix).as_str();
        if self.n_tasks() != SYNTHETIC_TASKS {
            return Err(Error::Profile(format!(
                "mix {name} has {} instances, expected {SYNTHETIC_TASKS}",
                self.n_tasks()
            )));
        }
        if self.fractions.len() != cfg.n_classes() {
            return Err(Error::Profile(format!(
                "mix {name} gives {} fractions for {} classes",
                self.fractions.len(),
                cfg.n_classes()
            )));
        }
        for app in &self.apps {
            check_app(app, cfg)?;
        }
        for (class, &f) in self.fractions.iter().enumerate() {
            let populated = self.apps.iter().any(|a| a.class == class);
            if populated != (f > 0.0) {
                return Err(Error::Profile(format!(
                    "mix {name}: class {class} has share {f} but {} instances",
                    if populated { "some" } else { "no" }
                )));
            }
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn normalise(fractions: Vec<f64>, mix: &str) -> Result<Vec<f64>> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) || (sum - 1.0).abs() > 0.05 {
        return Err(Error::Profile(format!(
            "mix {mix}: fractions {fractions:?} do not add up to 1"
        )));
    }
    Ok(fractions.into_iter().map(|f| f / sum).collect())
}

fn parse_range<T: std::str::FromStr + PartialOrd + Copy>(s: &str, lineno: usize) -> Result<RangeInclusive<T>> {
    let bad = || Error::parse("apps", lineno, format!("bad range `{s}`"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: T = lo.parse().map_err(|_| bad())?;
    let hi: T = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_apps(text: &str) -> Result<Vec<AppProfile>> {
    let mut apps: Vec<AppProfile> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, class, tex, clbs, brams, dsps] = fields[..] else {
            return Err(Error::parse(
                "apps",
                lineno,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        };
        if apps.iter().any(|a| a.name == name) {
            return Err(Error::parse(
                "apps",
                lineno,
                format!("application `{name}` listed twice"),
            ));
        }
        let tex = parse_range::<Time>(tex, lineno)?;
        if *tex.start() == 0 {
            return Err(Error::parse("apps", lineno, "execution time must be at least 1"));
        }
        apps.push(AppProfile {
            name: name.to_string(),
            count: 0,
            class: class
                .parse()
                .map_err(|_| Error::parse("apps", lineno, format!("bad class `{class}`")))?,
            tex,
            clbs: parse_range(clbs, lineno)?,
            brams: parse_range(brams, lineno)?,
            dsps: parse_range(dsps, lineno)?,
        });
    }
    Ok(apps)
}

fn classify(demand: Resources, cfg: &FpgaConfig) -> Option<usize> {
    select_queue(&Task::new(0, 0, 1, 1, demand), cfg)
}

fn check_app(app: &AppProfile, cfg: &FpgaConfig) -> Result<()> {
    if app.class >= cfg.n_classes() {
        return Err(Error::Profile(format!("{}: no class {}", app.name, app.class)));
    }
    for corner in [app.min_demand(), app.max_demand()] {
        let got = classify(corner, cfg);
        if got != Some(app.class) {
            return Err(Error::Profile(format!(
                "{}: demand {corner} classifies as {got:?}, declared class {}",
                app.name, app.class
            )));
        }
    }
    Ok(())
}

/// One task per application instance, arrivals in seeded random order, with
/// class workloads rescaled to the profile's shares.
pub fn gen_synthetic(profile: &SyntheticProfile, seed: u64, target_arr: f64, cfg: &FpgaConfig) -> Result<TaskSet> {
    check_target(target_arr)?;
    profile.check(cfg)?;
    let family = Family::Synthetic(profile.mix);
    let params = GeneratorParams::default();
    let mut rng = family_rng(seed, family);

    let mut instances: Vec<&AppProfile> = profile
        .apps
        .iter()
        .flat_map(|a| std::iter::repeat_n(a, a.count))
        .collect();
    instances.shuffle(&mut rng);

    let mut drafts = Vec::with_capacity(instances.len());
    for app in &instances {
        let tex = rng.gen_range(app.tex.clone());
        let mut demand = None;
        for _ in 0..256 {
            let d = Resources::new(
                rng.gen_range(app.clbs.clone()),
                rng.gen_range(app.brams.clone()),
                rng.gen_range(app.dsps.clone()),
            );
            if classify(d, cfg) == Some(app.class) {
                demand = Some(d);
                break;
            }
        }
        let demand = demand
            .ok_or_else(|| Error::Profile(format!("{}: cannot draw a demand in class {}", app.name, app.class)))?;
        drafts.push(Draft {
            class: app.class,
            tex,
            demand,
            deadline_milli: 0,
            horizon_milli: 0,
        });
    }

    let total: u64 = drafts.iter().map(|d| cfg.class(d.class).trec + d.tex).sum();
    let mut targets: Vec<u64> = profile
        .fractions
        .iter()
        .map(|f| (f * total as f64).round() as u64)
        .collect();
    // Every populated class needs at least trec + 1 per instance.
    for (class, t) in targets.iter_mut().enumerate() {
        let n = drafts.iter().filter(|d| d.class == class).count() as u64;
        *t = (*t).max(n * (cfg.class(class).trec + 1));
    }
    balance_workload(&mut drafts, cfg, &targets)?;

    let gap = params.mean_gap(target_arr, mean_work(&drafts, cfg));
    let arrivals = draw_arrivals(&mut rng, drafts.len(), gap);
    draw_deadlines(&mut rng, &mut drafts, &arrivals, target_arr, &params, cfg);
    finish(family, seed, target_arr, &drafts, &arrivals, cfg)
}
