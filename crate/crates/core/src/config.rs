//! Device configuration files.
//!
//! `key = value` lines set device-wide values; each `[class]` block adds one
//! task class, smallest first. `trec` inside a block overrides the derived
//! reconfiguration time. Omitted `slots_per_class` means one slot per class.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{trec_of_class, FpgaConfig, PairWeights, Resources, Time, TrecRule};

/// The bundled XC5VSX50T configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../data/xc5vsx50t.cfg");

#[derive(Default)]
struct ClassBlock {
    capacity: Option<Resources>,
    trec: Option<Time>,
    line: usize,
}

pub fn parse_config(text: &str, source: &str) -> Result<FpgaConfig> {
    let mut total = None;
    let mut slots = None;
    let mut weights = PairWeights::default();
    let mut rule = TrecRule::default();
    let mut slack = None;
    let mut blocks: Vec<ClassBlock> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[class]" {
            blocks.push(ClassBlock {
                line: lineno,
                ..Default::default()
            });
            continue;
        }
        let err = |msg: String| Error::parse(source, lineno, msg);
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let ints = || -> Result<Vec<u64>> {
            value
                .split_whitespace()
                .map(|v| v.parse::<u64>().map_err(|_| err(format!("`{key}`: bad integer `{v}`"))))
                .collect()
        };
        let triple = || -> Result<Resources> {
            let v = ints()?;
            let narrow = |x: u64| u32::try_from(x).map_err(|_| err(format!("`{key}`: {x} is too large")));
            match v[..] {
                [a, b, c] => Ok(Resources::new(narrow(a)?, narrow(b)?, narrow(c)?)),
                _ => Err(err(format!("`{key}` needs three integers"))),
            }
        };
        match (blocks.last_mut(), key) {
            (Some(block), "capacity") => block.capacity = Some(triple()?),
            (Some(block), "trec") => match ints()?[..] {
                [t] => block.trec = Some(t),
                _ => return Err(err("`trec` needs one integer".into())),
            },
            (None, "total") => total = Some(triple()?),
            (None, "slots_per_class") => slots = Some(ints()?.into_iter().map(|n| n as usize).collect::<Vec<_>>()),
            (None, "pair_weights") => {
                let r = triple()?;
                weights = PairWeights::new(r.clbs, r.brams, r.dsps);
            }
            (None, "trec_rule") => {
                rule = match value {
                    "clbs" => TrecRule::Clbs,
                    "pairs" => TrecRule::Pairs,
                    _ => return Err(err(format!("trec_rule must be `clbs` or `pairs`, found `{value}`"))),
                }
            }
            (None, "overcommit_slack") => {
                let s: f64 = value.parse().map_err(|_| err(format!("bad slack `{value}`")))?;
                if !(0.0..1.0).contains(&s) {
                    return Err(err(format!("overcommit_slack {s} outside [0, 1)")));
                }
                slack = Some(s);
            }
            (Some(_), k) => return Err(err(format!("unknown class key `{k}`"))),
            (None, k) => return Err(err(format!("unknown key `{k}`"))),
        }
    }

    let total = total.ok_or_else(|| Error::parse(source, 1, "missing `total`"))?;
    let mut capacities = Vec::with_capacity(blocks.len());
    for b in &blocks {
        capacities.push(
            b.capacity
                .ok_or_else(|| Error::parse(source, b.line, "class block without `capacity`"))?,
        );
    }
    let overrides: Vec<Option<Time>> = blocks.iter().map(|b| b.trec).collect();
    let slots = slots.unwrap_or_else(|| vec![1; capacities.len()]);
    let mut cfg = FpgaConfig::new(total, &capacities, slots, weights, rule, &overrides)?;
    if let Some(s) = slack {
        cfg.overcommit_slack = s;
    }
    Ok(cfg)
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn config_to_text(cfg: &FpgaConfig) -> String {
    let join = |v: &[String]| v.join(" ");
    let mut out = String::new();
    let t = cfg.total;
    let w = cfg.pair_weights;
    let _ = writeln!(out, "total = {} {} {}", t.clbs, t.brams, t.dsps);
    let slots: Vec<String> = cfg.slots_per_class.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "slots_per_class = {}", join(&slots));
    let _ = writeln!(out, "pair_weights = {} {} {}", w.per_clb, w.per_bram, w.per_dsp);
    let rule = match cfg.trec_rule {
        TrecRule::Clbs => "clbs",
        TrecRule::Pairs => "pairs",
    };
    let _ = writeln!(out, "trec_rule = {rule}");
    let _ = writeln!(out, "overcommit_slack = {}", cfg.overcommit_slack);
    for class in &cfg.classes {
        let c = class.capacity;
        let _ = write!(out, "\n[class]\ncapacity = {} {} {}\n", c.clbs, c.brams, c.dsps);
        if trec_of_class(class, cfg).ok() != Some(class.trec) {
            let _ = writeln!(out, "trec = {}", class.trec);
        }
    }
    out
}

/// Reads a configuration file, or the bundled default when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<FpgaConfig> {
    match path {
        None => parse_config(DEFAULT_CONFIG, "default config"),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config(&text, &p.display().to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_the_default_device() {
        let cfg = load_config(None).unwrap();
        assert_eq!(cfg, FpgaConfig::default());
        let trecs: Vec<Time> = cfg.classes.iter().map(|c| c.trec).collect();
        assert_eq!(trecs, [1, 3, 5, 12]);
    }

    #[test]
    fn round_trip_with_overrides() {
        let text = "total = 100 10 10\nslots_per_class = 2 1\ntrec_rule = pairs\novercommit_slack = 0.05\n\
                    [class]\ncapacity = 10 1 1\n[class]\ncapacity = 30 2 2\ntrec = 7\n";
        let cfg = parse_config(text, "t").unwrap();
        assert_eq!(cfg.slots_per_class, [2, 1]);
        assert_eq!(cfg.class(1).trec, 7);
        assert_eq!(cfg.trec_rule, TrecRule::Pairs);
        let again = parse_config(&config_to_text(&cfg), "t2").unwrap();
        assert_eq!(again, cfg);
        assert!(config_to_text(&cfg).contains("trec = 7"));
        assert_eq!(
            parse_config(&config_to_text(&FpgaConfig::default()), "d").unwrap(),
            FpgaConfig::default()
        );
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("total = 1 2\n[class]\ncapacity = 1 1 1\n", 1),
            ("total = 1 2 3\n[class]\nsize = 1\n", 3),
            ("total = 1 2 3\nfoo = 1\n", 2),
            ("total = 1 2 3\n[class]\ncapacity = 1 1 1\n[class]\n", 4),
            ("total = 1 2 3\ntrec_rule = luts\n", 2),
        ];
        for (text, line) in cases {
            match parse_config(text, "c") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_config("total = 1 2 3\nslots_per_class = 0\n[class]\ncapacity = 1 1 1\n", "c"),
            Err(Error::Config(_))
        ));
    }
}
