//! Benchmark task-set generation.
//!
//! Every family is built the same way: pick a class sequence and draw each
//! task's demand and execution time, lay out arrivals, then tune a single
//! global scale on the relative deadlines by bisection until the set's
//! average rejection ratio (ARR) hits the target.

mod profile;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use profile::{gen_synthetic, AppProfile, SyntheticProfile};

use crate::error::{Error, Result};
use crate::model::{FpgaConfig, Resources, Task, Time};
use crate::queues::select_queue;
use crate::scalar::{round_to, Scalar};
use crate::taskset::{Family, TaskSet, TaskSetMeta};

/// Largest allowed gap between achieved and target ARR.
pub const ARR_TOLERANCE: f64 = 0.01;

/// Tuning stops once this close to the target, so a two-decimal target is
/// also the achieved ARR rounded to two decimals.
const ARR_SETTLE: f64 = 0.004;

/// Mean over tasks of `(tarr + trec + tex) / tmax`, `trec` being the task's
/// class reconfiguration time.
pub fn compute_arr<S: Scalar>(tasks: &[Task], cfg: &FpgaConfig) -> Result<S> {
    if tasks.is_empty() {
        return Ok(S::zero());
    }
    let mut sum = S::zero();
    for t in tasks {
        let class = select_queue(t, cfg).ok_or(Error::Unclassifiable(t.id))?;
        sum = sum + S::from_ratio(t.tarr + cfg.class(class).trec + t.tex, t.tmax);
    }
    Ok(sum / S::from_count(tasks.len() as u64))
}

/// Knobs of the balanced families. The defaults are the bundled benchmark
/// definition; changing them changes every generated byte.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_tasks: usize,
    /// Inclusive execution-time range per class before balancing.
    pub tex_ranges: Vec<(Time, Time)>,
    /// Mean inter-arrival gap, as a fraction of the mean task work
    /// `trec + tex`, at ascending ARR knots; piecewise linear in between and
    /// flat outside.
    pub gap_at: Vec<(f64, f64)>,
    /// Same as `gap_at` for global-balance sets, which arrive denser at
    /// moderate ARR than the round-robin families.
    pub random_order_gap_at: Vec<(f64, f64)>,
    /// Relative deadline is `s * u * (trec + tex) + h * tarr`, with `s` the tuned
    /// global scale and `u` log-uniform between the value of these ARR knots
    /// and `deadline_high`.
    pub deadline_low_at: Vec<(f64, f64)>,
    pub deadline_high: f64,
    /// `h` at ascending ARR knots, interpolated like `gap_at`.
    pub horizon_at: Vec<(f64, f64)>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_tasks: 52,
            tex_ranges: vec![(2, 6), (4, 12), (8, 20), (16, 40)],
            gap_at: vec![(0.94, 0.8), (1.06, 0.12)],
            random_order_gap_at: vec![(0.85, 0.45), (1.06, 0.12)],
            deadline_low_at: vec![(0.94, 1.5), (1.06, 0.01)],
            deadline_high: 3.0,
            horizon_at: vec![(0.94, 0.03), (1.06, 0.3)],
        }
    }
}

impl GeneratorParams {
    pub(crate) fn mean_gap(&self, target_arr: f64, mean_work: f64) -> f64 {
        gap_from(&self.gap_at, target_arr, mean_work)
    }

    pub(crate) fn random_order_gap(&self, target_arr: f64, mean_work: f64) -> f64 {
        gap_from(&self.random_order_gap_at, target_arr, mean_work)
    }

    pub(crate) fn horizon(&self, target_arr: f64) -> f64 {
        interpolate(&self.horizon_at, target_arr).max(0.0)
    }

    fn tex_range(&self, class: usize) -> Result<(Time, Time)> {
        self.tex_ranges
            .get(class)
            .copied()
            .ok_or_else(|| Error::Config(format!("no execution-time range for class {class}")))
    }
}

fn gap_from(knots: &[(f64, f64)], target_arr: f64, mean_work: f64) -> f64 {
    (interpolate(knots, target_arr) * mean_work).max(0.5)
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    match knots.iter().position(|&(kx, _)| kx > x) {
        None => knots.last().map_or(0.0, |k| k.1),
        Some(0) => knots[0].1,
        Some(i) => {
            let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
            y0 + (x - x0) / (x1 - x0) * (y1 - y0)
        }
    }
}

/// A task before arrival layout and deadline tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Draft {
    pub class: usize,
    pub tex: Time,
    pub demand: Resources,
    /// Scaled part of the relative deadline, in thousandths of a unit.
    pub deadline_milli: u64,
    /// Unscaled part of the relative deadline, in thousandths of a unit.
    pub horizon_milli: u64,
}

pub(crate) fn family_rng(seed: u64, family: Family) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match family {
        Family::PerfectBalance => 1,
        Family::GlobalBalance => 2,
        Family::SemiPerfectBalance => 3,
        Family::Synthetic(m) => 10 + m as u64,
    });
    rng
}

/// Uniform demand that classifies exactly into `class`.
pub(crate) fn draw_demand(rng: &mut ChaCha8Rng, cfg: &FpgaConfig, class: usize) -> Result<Resources> {
    let cap = cfg.class(class).capacity;
    let floor = cfg.classes[..class].iter().map(|c| c.capacity.clbs).max();
    let clbs_lo = floor.map_or(1, |f| f + 1).min(cap.clbs);
    for _ in 0..256 {
        let d = Resources::new(
            rng.gen_range(clbs_lo..=cap.clbs),
            rng.gen_range(0..=cap.brams),
            rng.gen_range(0..=cap.dsps),
        );
        if select_queue(&Task::new(0, 0, 1, 1, d), cfg) == Some(class) {
            return Ok(d);
        }
    }
    Err(Error::Config(format!(
        "cannot draw a demand that classifies into class {class}"
    )))
}

/// Rescales execution times so each class's `sum(trec + tex)` equals
/// `targets[class]` exactly.
pub(crate) fn balance_workload(drafts: &mut [Draft], cfg: &FpgaConfig, targets: &[u64]) -> Result<()> {
    for (class, &target) in targets.iter().enumerate() {
        let idx: Vec<usize> = (0..drafts.len()).filter(|&i| drafts[i].class == class).collect();
        if idx.is_empty() {
            continue;
        }
        let trec_sum = cfg.class(class).trec * idx.len() as u64;
        let want = target
            .checked_sub(trec_sum)
            .filter(|&w| w >= idx.len() as u64)
            .ok_or_else(|| {
                Error::Config(format!(
                    "class {class} workload {target} is below its reconfiguration time"
                ))
            })?;
        let have: u64 = idx.iter().map(|&i| drafts[i].tex).sum();
        let scale = want as f64 / have as f64;
        for &i in &idx {
            drafts[i].tex = ((drafts[i].tex as f64 * scale).round() as Time).max(1);
        }
        let mut have: u64 = idx.iter().map(|&i| drafts[i].tex).sum();
        // Spread the rounding residue one unit at a time, longest tasks first.
        let mut order = idx.clone();
        order.sort_by_key(|&i| (std::cmp::Reverse(drafts[i].tex), i));
        let mut k = 0;
        while have != want {
            let i = order[k % order.len()];
            if have < want {
                drafts[i].tex += 1;
                have += 1;
            } else if drafts[i].tex > 1 {
                drafts[i].tex -= 1;
                have -= 1;
            }
            k += 1;
        }
    }
    Ok(())
}

/// Sum of `trec + tex` per class.
pub fn class_workloads(tasks: &[Task], cfg: &FpgaConfig) -> Result<Vec<u64>> {
    let mut w = vec![0; cfg.n_classes()];
    for t in tasks {
        let c = select_queue(t, cfg).ok_or(Error::Unclassifiable(t.id))?;
        w[c] += cfg.class(c).trec + t.tex;
    }
    Ok(w)
}

/// Relative spread `(max - min) / max` of the nonzero class workloads.
pub fn workload_spread(tasks: &[Task], cfg: &FpgaConfig) -> Result<f64> {
    let w: Vec<u64> = class_workloads(tasks, cfg)?.into_iter().filter(|&x| x > 0).collect();
    let (Some(&lo), Some(&hi)) = (w.iter().min(), w.iter().max()) else {
        return Ok(0.0);
    };
    Ok((hi - lo) as f64 / hi as f64)
}

pub(crate) fn mean_work(drafts: &[Draft], cfg: &FpgaConfig) -> f64 {
    let total: u64 = drafts.iter().map(|d| cfg.class(d.class).trec + d.tex).sum();
    total as f64 / drafts.len().max(1) as f64
}

/// Arrival times: first at 0, then gaps uniform in `[g/2, 3g/2]`.
pub(crate) fn draw_arrivals(rng: &mut ChaCha8Rng, n: usize, mean_gap: f64) -> Vec<Time> {
    let lo = (mean_gap * 0.5).floor() as Time;
    let hi = ((mean_gap * 1.5).ceil() as Time).max(lo);
    let mut t = 0;
    (0..n)
        .map(|i| {
            if i > 0 {
                t += rng.gen_range(lo..=hi);
            }
            t
        })
        .collect()
}

/// Draws every draft's untuned relative deadline.
pub(crate) fn draw_deadlines(
    rng: &mut ChaCha8Rng,
    drafts: &mut [Draft],
    arrivals: &[Time],
    target_arr: f64,
    params: &GeneratorParams,
    cfg: &FpgaConfig,
) {
    let (lo, hi) = (interpolate(&params.deadline_low_at, target_arr), params.deadline_high);
    let h = params.horizon(target_arr);
    for (d, &tarr) in drafts.iter_mut().zip(arrivals) {
        let u = rng.gen_range(lo.ln()..=hi.ln()).exp();
        d.deadline_milli = (u * (cfg.class(d.class).trec + d.tex) as f64 * 1000.0).round() as u64;
        d.horizon_milli = (h * tarr as f64 * 1000.0).round() as u64;
    }
}

fn assemble(drafts: &[Draft], arrivals: &[Time], scale: f64) -> Vec<Task> {
    drafts
        .iter()
        .zip(arrivals)
        .enumerate()
        .map(|(id, (d, &tarr))| {
            let rel = ((d.deadline_milli as f64 * scale + d.horizon_milli as f64) / 1000.0).round() as Time;
            Task::new(id, tarr, d.tex, tarr + rel.max(1), d.demand)
        })
        .collect()
}

/// Bisection on the global deadline scale. ARR is nonincreasing in the scale.
pub(crate) fn tune_deadlines(
    drafts: &[Draft],
    arrivals: &[Time],
    target: f64,
    cfg: &FpgaConfig,
) -> Result<(Vec<Task>, f64)> {
    let arr_at = |s: f64| -> Result<f64> { compute_arr::<f64>(&assemble(drafts, arrivals, s), cfg) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while arr_at(hi)? > target && hi < 1e6 {
        hi *= 2.0;
    }
    let mut best = (f64::INFINITY, hi);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let arr = arr_at(mid)?;
        if (arr - target).abs() < best.0 {
            best = ((arr - target).abs(), mid);
        }
        if (arr - target).abs() < ARR_SETTLE {
            break;
        }
        if arr > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut tasks = assemble(drafts, arrivals, best.1);
    refine(&mut tasks, target, cfg)?;
    let achieved = compute_arr::<f64>(&tasks, cfg)?;
    if (achieved - target).abs() > ARR_TOLERANCE {
        return Err(Error::Tuning { target, best: achieved });
    }
    Ok((tasks, achieved))
}

/// Moves single deadlines by one unit until ARR settles near the target.
/// Bisection alone can stall when one early task's ratio jumps by more than
/// the tolerance between neighbouring integer deadlines.
fn refine(tasks: &mut [Task], target: f64, cfg: &FpgaConfig) -> Result<()> {
    let n = tasks.len() as f64;
    let mut works = Vec::with_capacity(tasks.len());
    for t in tasks.iter() {
        let class = select_queue(t, cfg).ok_or(Error::Unclassifiable(t.id))?;
        works.push((t.tarr + cfg.class(class).trec + t.tex) as f64);
    }
    let mut arr: f64 = works
        .iter()
        .zip(tasks.iter())
        .map(|(w, t)| w / t.tmax as f64)
        .sum::<f64>()
        / n;
    for _ in 0..10 * tasks.len() {
        let diff = arr - target;
        if diff.abs() < ARR_SETTLE {
            break;
        }
        // Lowering ARR means a later deadline, raising it an earlier one.
        let step: i64 = if diff > 0.0 { 1 } else { -1 };
        let mut pick: Option<(f64, usize)> = None;
        for (i, t) in tasks.iter().enumerate() {
            let tmax = t.tmax as i64 + step;
            if tmax <= t.tarr as i64 {
                continue;
            }
            let next = arr + (works[i] / tmax as f64 - works[i] / t.tmax as f64) / n;
            let err = (next - target).abs();
            if err < diff.abs() && pick.is_none_or(|(e, _)| err < e) {
                pick = Some((err, i));
            }
        }
        let Some((_, i)) = pick else { break };
        let old = tasks[i].tmax as f64;
        tasks[i].tmax = (tasks[i].tmax as i64 + step) as Time;
        arr += (works[i] / tasks[i].tmax as f64 - works[i] / old) / n;
    }
    Ok(())
}

pub(crate) fn check_target(target: f64) -> Result<()> {
    if !(0.5..=1.5).contains(&target) {
        return Err(Error::Usage(format!("target ARR {target} outside [0.5, 1.5]")));
    }
    Ok(())
}

/// Draws one task per entry of `classes` and balances class workloads to their mean.
fn balanced_drafts(
    rng: &mut ChaCha8Rng,
    classes: &[usize],
    params: &GeneratorParams,
    cfg: &FpgaConfig,
) -> Result<Vec<Draft>> {
    let mut drafts = classes
        .iter()
        .map(|&class| {
            let (lo, hi) = params.tex_range(class)?;
            Ok(Draft {
                class,
                tex: rng.gen_range(lo..=hi),
                demand: draw_demand(rng, cfg, class)?,
                deadline_milli: 0,
                horizon_milli: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums = vec![0u64; cfg.n_classes()];
    for d in &drafts {
        sums[d.class] += cfg.class(d.class).trec + d.tex;
    }
    let used: Vec<u64> = sums.iter().copied().filter(|&s| s > 0).collect();
    let mean = (used.iter().sum::<u64>() as f64 / used.len() as f64).round() as u64;
    let targets: Vec<u64> = sums.iter().map(|&s| if s > 0 { mean } else { 0 }).collect();
    balance_workload(&mut drafts, cfg, &targets)?;
    Ok(drafts)
}

pub(crate) fn finish(
    family: Family,
    seed: u64,
    target: f64,
    drafts: &[Draft],
    arrivals: &[Time],
    cfg: &FpgaConfig,
) -> Result<TaskSet> {
    let (tasks, achieved) = tune_deadlines(drafts, arrivals, target, cfg)?;
    let meta = TaskSetMeta {
        name: default_set_name(family, target, seed),
        family,
        target_arr: target,
        achieved_arr: round_to(achieved, 2),
        seed,
        n_tasks: tasks.len(),
        last_arrival: tasks.last().map_or(0, |t| t.tarr),
    };
    Ok(TaskSet {
        meta: Some(meta),
        tasks,
    })
}

pub fn default_set_name(family: Family, target: f64, seed: u64) -> String {
    format!("{}-{:.2}-s{}", family.as_str().to_ascii_lowercase(), target, seed)
}

/// Classes arrive strictly round-robin; class workloads are equal.
pub fn gen_perfect_balance(seed: u64, target_arr: f64, cfg: &FpgaConfig) -> Result<TaskSet> {
    gen_perfect_balance_with(seed, target_arr, cfg, &GeneratorParams::default())
}

pub fn gen_perfect_balance_with(
    seed: u64,
    target_arr: f64,
    cfg: &FpgaConfig,
    params: &GeneratorParams,
) -> Result<TaskSet> {
    check_target(target_arr)?;
    let mut rng = family_rng(seed, Family::PerfectBalance);
    let classes: Vec<usize> = (0..params.n_tasks).map(|i| i % cfg.n_classes()).collect();
    let mut drafts = balanced_drafts(&mut rng, &classes, params, cfg)?;
    let arrivals = draw_arrivals(
        &mut rng,
        params.n_tasks,
        params.mean_gap(target_arr, mean_work(&drafts, cfg)),
    );
    draw_deadlines(&mut rng, &mut drafts, &arrivals, target_arr, params, cfg);
    finish(Family::PerfectBalance, seed, target_arr, &drafts, &arrivals, cfg)
}

/// Number of positions whose task changes when a set is semi-shuffled.
pub fn semi_perfect_moves(n_tasks: usize) -> usize {
    n_tasks / 4
}

/// Permutes a quarter of the arrival order of a perfect-balance set.
///
/// Tasks move between arrival slots; arrival times stay where they were.
/// Every moved position receives a task of a different class, and relative
/// deadlines travel with their task before the set is re-tuned to the
/// parent's target ARR.
pub fn gen_semi_perfect(pb: &TaskSet, seed: u64, cfg: &FpgaConfig) -> Result<TaskSet> {
    let meta = pb
        .meta
        .as_ref()
        .filter(|m| m.family == Family::PerfectBalance)
        .ok_or_else(|| Error::Usage("semi-perfect sets derive from a perfect-balance set".into()))?;
    let n = pb.tasks.len();
    let moves = semi_perfect_moves(n);
    let classes: Vec<usize> = pb
        .tasks
        .iter()
        .map(|t| select_queue(t, cfg).ok_or(Error::Unclassifiable(t.id)))
        .collect::<Result<_>>()?;

    let mut rng = family_rng(seed, Family::SemiPerfectBalance);
    let perm = derangement_by_class(&mut rng, &classes, moves)
        .ok_or_else(|| Error::Config("cannot permute the arrival order with distinct classes".into()))?;

    let arrivals: Vec<Time> = pb.tasks.iter().map(|t| t.tarr).collect();
    let drafts: Vec<Draft> = perm
        .iter()
        .map(|&src| {
            let t = &pb.tasks[src];
            Draft {
                class: classes[src],
                tex: t.tex,
                demand: t.demand,
                deadline_milli: (t.tmax - t.tarr) * 1000,
                horizon_milli: 0,
            }
        })
        .collect();
    let mut set = finish(
        Family::SemiPerfectBalance,
        seed,
        meta.target_arr,
        &drafts,
        &arrivals,
        cfg,
    )?;
    if let Some(m) = &mut set.meta {
        m.seed = seed;
    }
    Ok(set)
}

/// A permutation moving exactly `moves` positions, each to a task of a
/// different class.
fn derangement_by_class(rng: &mut ChaCha8Rng, classes: &[usize], moves: usize) -> Option<Vec<usize>> {
    let n = classes.len();
    let mut perm: Vec<usize> = (0..n).collect();
    if moves == 0 {
        return Some(perm);
    }
    if moves == 1 || moves > n {
        return None;
    }
    let positions: Vec<usize> = (0..n).collect();
    for _ in 0..10_000 {
        let mut chosen: Vec<usize> = positions.choose_multiple(rng, moves).copied().collect();
        chosen.sort_unstable();
        let mut sources = chosen.clone();
        sources.shuffle(rng);
        if chosen
            .iter()
            .zip(&sources)
            .all(|(&dst, &src)| classes[dst] != classes[src])
        {
            for (&dst, &src) in chosen.iter().zip(&sources) {
                perm[dst] = src;
            }
            return Some(perm);
        }
    }
    None
}

/// Longest run of equal consecutive values.
pub fn longest_run(classes: &[usize]) -> usize {
    classes.chunk_by(|a, b| a == b).map(<[usize]>::len).max().unwrap_or(0)
}

/// Random class order with equal class counts and no run longer than three.
pub fn gen_global_balance(seed: u64, target_arr: f64, cfg: &FpgaConfig) -> Result<TaskSet> {
    gen_global_balance_with(seed, target_arr, cfg, &GeneratorParams::default())
}

pub fn gen_global_balance_with(
    seed: u64,
    target_arr: f64,
    cfg: &FpgaConfig,
    params: &GeneratorParams,
) -> Result<TaskSet> {
    check_target(target_arr)?;
    let mut rng = family_rng(seed, Family::GlobalBalance);
    let mut classes: Vec<usize> = (0..params.n_tasks).map(|i| i % cfg.n_classes()).collect();
    let mut tries = 0;
    loop {
        classes.shuffle(&mut rng);
        if longest_run(&classes) <= 3 {
            break;
        }
        tries += 1;
        if tries > 100_000 {
            return Err(Error::Config("no class order without a run of four".into()));
        }
    }
    let mut drafts = balanced_drafts(&mut rng, &classes, params, cfg)?;
    let gap = params.random_order_gap(target_arr, mean_work(&drafts, cfg));
    let arrivals = draw_arrivals(&mut rng, params.n_tasks, gap);
    draw_deadlines(&mut rng, &mut drafts, &arrivals, target_arr, params, cfg);
    finish(Family::GlobalBalance, seed, target_arr, &drafts, &arrivals, cfg)
}

/// Generates any family. Semi-perfect sets derive from the perfect-balance
/// set with the same seed and target.
pub fn generate(family: Family, seed: u64, target_arr: f64, cfg: &FpgaConfig) -> Result<TaskSet> {
    match family {
        Family::PerfectBalance => gen_perfect_balance(seed, target_arr, cfg),
        Family::SemiPerfectBalance => gen_semi_perfect(&gen_perfect_balance(seed, target_arr, cfg)?, seed, cfg),
        Family::GlobalBalance => gen_global_balance(seed, target_arr, cfg),
        Family::Synthetic(mix) => gen_synthetic(&SyntheticProfile::bundled(mix), seed, target_arr, cfg),
    }
}
