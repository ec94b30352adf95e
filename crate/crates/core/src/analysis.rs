//! Closed-form ratio curves, the Yao lower bound, Greedy/PEDF profile
//! accounting, measured competitive ratios, alpha sweeps and an exhaustive
//! worst-case search over tiny instances.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{self, Instance, Job, Schedule, Slot};
use crate::offline::{self, OfflineError};
use crate::rng::SplitMix64;
use crate::scheduling::{self, Policy, SchedulingError, ALPHA_STAR};

/// Relative tolerance for closed-form identities.
pub const IDENTITY_RTOL: f64 = 1e-12;
/// Absolute tolerance for float comparisons across modules.
pub const CROSS_ATOL: f64 = 1e-9;

/// Guards of [`exhaustive_worst_case`].
pub const EXHAUSTIVE_MAX_HORIZON: Slot = 4;
pub const EXHAUSTIVE_MAX_JOBS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("alpha must be a finite number greater than 1, got {0}")]
    InvalidAlpha(f64),
    #[error("instance is not two-valued")]
    NotTwoValued,
    #[error("invalid sweep range: alpha_min={min}, alpha_max={max}, step={step}")]
    InvalidRange { min: f64, max: f64, step: f64 },
    #[error("exhaustive search guard exceeded: horizon {horizon} (max {EXHAUSTIVE_MAX_HORIZON}), jobs {jobs} (max {EXHAUSTIVE_MAX_JOBS})")]
    GuardExceeded { horizon: Slot, jobs: usize },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Scheduling(#[from] SchedulingError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
}

fn alpha_arg(alpha: f64) -> Result<f64, AnalysisError> {
    model::check_alpha(alpha).map_err(|_| AnalysisError::InvalidAlpha(alpha))
}

/// Optimal randomized ratio `(a^2 + 2a - 1) / (a^2 + a)`.
pub fn ratio_r(alpha: f64) -> Result<f64, AnalysisError> {
    alpha_arg(alpha).map(r_formula)
}

/// Probability that Barely-Random runs Greedy, `(a^2 - 1) / (a^2 + 2a - 1)`.
pub fn mix_p(alpha: f64) -> Result<f64, AnalysisError> {
    alpha_arg(alpha).map(p_formula)
}

/// Deterministic ratio `min{(1 + a) / a, 2a / (1 + a)}`.
pub fn det_ratio_bound(alpha: f64) -> Result<f64, AnalysisError> {
    alpha_arg(alpha).map(|a| greedy_curve(a).min(pedf_curve(a)))
}

fn r_formula(a: f64) -> f64 {
    (a * a + 2.0 * a - 1.0) / (a * a + a)
}

fn p_formula(a: f64) -> f64 {
    (a * a - 1.0) / (a * a + 2.0 * a - 1.0)
}

/// Greedy's ratio on the lower-bound family, `(1 + a) / a`.
pub fn greedy_curve(alpha: f64) -> f64 {
    (1.0 + alpha) / alpha
}

/// PEDF's ratio on the lower-bound family, `2a / (1 + a)`.
pub fn pedf_curve(alpha: f64) -> f64 {
    2.0 * alpha / (1.0 + alpha)
}

/// Relative closeness, `|a - b| <= rtol * max(|a|, |b|)`.
pub fn close_rel(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Yao-principle lower bound for the distribution `((a-1)/a, 1/a)` over
/// `(σ1, σ2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YaoBound {
    pub ratio: f64,
    pub e_opt: f64,
    /// Best expected profit of a deterministic algorithm that runs the
    /// urgent light job at slot 0.
    pub payoff_urgent: f64,
    /// Same for an algorithm that runs the heavy job at slot 0.
    pub payoff_heavy: f64,
}

pub fn yao_bound(alpha: f64) -> Result<YaoBound, AnalysisError> {
    let a = alpha_arg(alpha)?;
    let y1 = (a - 1.0) / a;
    let y2 = 1.0 / a;
    // OPT(σ1) = 1 + a, OPT(σ2) = 2a
    let e_opt = y1 * (1.0 + a) + y2 * 2.0 * a;
    // urgent first: 1 + a on either instance; heavy first: a on σ1, 2a on σ2
    let payoff_urgent = y1 * (1.0 + a) + y2 * (1.0 + a);
    let payoff_heavy = y1 * a + y2 * 2.0 * a;
    Ok(YaoBound {
        ratio: e_opt / payoff_urgent.max(payoff_heavy),
        e_opt,
        payoff_urgent,
        payoff_heavy,
    })
}

/// Counts behind the Greedy/PEDF accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProfileCounts {
    /// Slots where Greedy idles while PEDF runs a job.
    pub d: u64,
    /// Heavy jobs run by Greedy only.
    pub h_star: u64,
    /// Heavy jobs run by both.
    pub h: u64,
    /// Light jobs run by Greedy.
    pub l: u64,
    /// Light jobs run by PEDF.
    pub l_prime: u64,
}

impl ProfileCounts {
    /// Busy-slot balance `d + h* + h + l == h + l'`.
    pub fn slot_balance_holds(&self) -> bool {
        self.d + self.h_star + self.h + self.l == self.h + self.l_prime
    }

    /// `d + h* <= h`.
    pub fn claim_holds(&self) -> bool {
        self.d + self.h_star <= self.h
    }

    pub fn greedy_profit(&self, alpha: f64) -> f64 {
        (self.h_star + self.h) as f64 * alpha + self.l as f64
    }

    /// PEDF profit written with the slot balance substituted for `l'`.
    pub fn pedf_profit(&self, alpha: f64) -> f64 {
        self.h as f64 * alpha + (self.l + self.h_star + self.d) as f64
    }

    /// Upper bound `h* a + h a + l + d` on the optimum.
    pub fn opt_upper_bound(&self, alpha: f64) -> f64 {
        (self.h_star + self.h) as f64 * alpha + (self.l + self.d) as f64
    }
}

/// Greedy and PEDF schedules of one instance with their accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub counts: ProfileCounts,
    pub greedy: Schedule,
    pub pedf: Schedule,
    /// Heavy jobs run by PEDF but not by Greedy; the set accounting assumes
    /// there are none.
    pub pedf_only_heavy: u64,
}

fn two_valued_alpha(inst: &Instance) -> Result<f64, AnalysisError> {
    match inst.alpha {
        Some(a) if inst.is_two_valued() => Ok(a),
        Some(a) if !(a.is_finite() && a > 1.0) => Err(AnalysisError::InvalidAlpha(a)),
        _ => Err(AnalysisError::NotTwoValued),
    }
}

/// Runs Greedy and PEDF on a two-valued instance and classifies their jobs.
pub fn profile(inst: &Instance) -> Result<Profile, AnalysisError> {
    let alpha = two_valued_alpha(inst)?;
    let greedy = scheduling::run_policy(inst, &Policy::Greedy)?;
    let pedf = scheduling::run_policy(inst, &Policy::Pedf)?;
    let weight = |id| inst.job(id).map(|j: &Job| j.weight).unwrap_or(0.0);
    let heavy = |id| weight(id) == alpha;

    let mut counts = ProfileCounts::default();
    for id in greedy.job_ids() {
        match (heavy(id), pedf.contains(id)) {
            (true, true) => counts.h += 1,
            (true, false) => counts.h_star += 1,
            (false, _) => counts.l += 1,
        }
    }
    let mut pedf_only_heavy = 0;
    for id in pedf.job_ids() {
        if !heavy(id) {
            counts.l_prime += 1;
        } else if !greedy.contains(id) {
            pedf_only_heavy += 1;
        }
    }
    counts.d = pedf
        .assignment()
        .keys()
        .filter(|&&t| greedy.job_at(t).is_none())
        .count() as u64;
    Ok(Profile {
        counts,
        greedy,
        pedf,
        pedf_only_heavy,
    })
}

pub fn profile_counts(inst: &Instance) -> Result<ProfileCounts, AnalysisError> {
    profile(inst).map(|p| p.counts)
}

/// OPT divided by an algorithm's (expected) profit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Positive optimum against zero algorithm profit.
    Infinite,
}

impl Ratio {
    pub fn of(opt: f64, profit: f64) -> Ratio {
        if profit > 0.0 {
            Ratio::Finite(opt / profit)
        } else if opt > 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(1.0)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(v) => v,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// Sample mean and standard error of a per-trial quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

#[derive(Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn finish(self) -> Estimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            std_error,
            trials: self.n,
        }
    }
}

/// Runs `policy` `trials` times; trial `i` uses the `i`-th output of a
/// SplitMix64 stream seeded with `seed` as its policy seed.
pub fn monte_carlo_profit(
    inst: &Instance,
    policy: &Policy,
    trials: u64,
    seed: u64,
) -> Result<Estimate, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let mut seeds = SplitMix64::new(seed);
    let mut acc = Welford::default();
    for _ in 0..trials {
        let run = scheduling::run_policy(inst, &policy.with_seed(seeds.next_u64()))?;
        acc.push(run.profit());
    }
    Ok(acc.finish())
}

/// Frequency with which Rmix runs the heavy job at slot 0 of `σ1`, over
/// `trials` seeds drawn as in [`monte_carlo_profit`].
pub fn rmix_heavy_first_frequency(
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate, AnalysisError> {
    let alpha = alpha_arg(alpha)?;
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let (sigma1, _) = model::sigma_instances(alpha).expect("alpha checked");
    let heavy = sigma1.jobs[1].id;
    let mut seeds = SplitMix64::new(seed);
    let mut acc = Welford::default();
    for _ in 0..trials {
        let run = scheduling::run_policy(&sigma1, &Policy::Rmix { seed: seeds.next_u64() })?;
        acc.push(if run.job_at(0) == Some(heavy) { 1.0 } else { 0.0 });
    }
    Ok(acc.finish())
}

/// Profit used for ratio measurement: a single run for deterministic
/// policies, the exact mixture for Barely-Random, and a `trials`-run mean
/// (seeded by the policy seed) for Rmix.
pub fn policy_profit(inst: &Instance, policy: &Policy, trials: u64) -> Result<f64, AnalysisError> {
    Ok(match *policy {
        Policy::BarelyRandom { alpha, .. } => {
            scheduling::barely_random_expected_profit(inst, alpha)?
        }
        Policy::Rmix { seed } => monte_carlo_profit(inst, policy, trials, seed)?.mean,
        _ => scheduling::run_policy(inst, policy)?.profit(),
    })
}

/// OPT over the policy's profit as defined by [`policy_profit`].
pub fn competitive_ratio(
    inst: &Instance,
    policy: &Policy,
    trials: u64,
) -> Result<Ratio, AnalysisError> {
    let opt = offline::optimal_schedule(inst)?.value;
    Ok(Ratio::of(opt, policy_profit(inst, policy, trials)?))
}

/// Worst ratio over `σ1` and `σ2` for the deterministic policies and the
/// exact Barely-Random mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredRatios {
    pub greedy: f64,
    pub pedf: f64,
    pub detswitch: f64,
    pub barely: f64,
}

pub fn measure_sigma_ratios(alpha: f64) -> Result<MeasuredRatios, AnalysisError> {
    let alpha = alpha_arg(alpha)?;
    let (s1, s2) = model::sigma_instances(alpha).expect("alpha checked");
    let worst = |policy: Policy| -> Result<f64, AnalysisError> {
        let a = competitive_ratio(&s1, &policy, 1)?.value();
        let b = competitive_ratio(&s2, &policy, 1)?.value();
        Ok(a.max(b))
    };
    Ok(MeasuredRatios {
        greedy: worst(Policy::Greedy)?,
        pedf: worst(Policy::Pedf)?,
        detswitch: worst(Policy::DetSwitch { alpha })?,
        barely: worst(Policy::BarelyRandom { alpha, seed: 0 })?,
    })
}

/// One grid point of the ratio curves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub alpha: f64,
    pub r_bound: f64,
    pub p_mix: f64,
    pub greedy_curve: f64,
    pub pedf_curve: f64,
    pub measured: Option<MeasuredRatios>,
}

fn curve_row(alpha: f64) -> CurveRow {
    CurveRow {
        alpha,
        r_bound: r_formula(alpha),
        p_mix: p_formula(alpha),
        greedy_curve: greedy_curve(alpha),
        pedf_curve: pedf_curve(alpha),
        measured: None,
    }
}

/// Grid `alpha_min + i * step` up to `alpha_max`, plus the crossover
/// `1 + sqrt(2)` whenever it lies in range and is not already a grid point.
///
/// `alpha_min = 1` is accepted: the closed forms extend continuously to it.
pub fn sweep_curves(alpha_min: f64, alpha_max: f64, step: f64) -> Result<Vec<CurveRow>, AnalysisError> {
    let bad = AnalysisError::InvalidRange {
        min: alpha_min,
        max: alpha_max,
        step,
    };
    if !(alpha_min.is_finite() && alpha_max.is_finite() && step.is_finite()) {
        return Err(bad);
    }
    if alpha_min < 1.0 || alpha_max < alpha_min || step <= 0.0 {
        return Err(bad);
    }
    let n = ((alpha_max - alpha_min) / step + 1e-9).floor() as u64;
    let mut alphas: Vec<f64> = (0..=n).map(|i| alpha_min + i as f64 * step).collect();
    if (alpha_min..=alpha_max).contains(&ALPHA_STAR)
        && !alphas.iter().any(|&a| (a - ALPHA_STAR).abs() <= 1e-12)
    {
        let at = alphas.partition_point(|&a| a < ALPHA_STAR);
        alphas.insert(at, ALPHA_STAR);
    }
    Ok(alphas.into_iter().map(curve_row).collect())
}

/// [`sweep_curves`] with the measured `σ1`/`σ2` ratios attached; requires
/// `alpha_min > 1`.
pub fn sweep_curves_measured(
    alpha_min: f64,
    alpha_max: f64,
    step: f64,
) -> Result<Vec<CurveRow>, AnalysisError> {
    if alpha_min.is_nan() || alpha_min <= 1.0 {
        return Err(AnalysisError::InvalidRange {
            min: alpha_min,
            max: alpha_max,
            step,
        });
    }
    sweep_curves(alpha_min, alpha_max, step)?
        .into_iter()
        .map(|mut row| {
            row.measured = Some(measure_sigma_ratios(row.alpha)?);
            Ok(row)
        })
        .collect()
}

/// CSV rendering: `alpha,r_bound,p_mix,greedy_curve,pedf_curve`, followed by
/// `measured_*` columns when every row carries measurements.
pub fn curves_to_csv(rows: &[CurveRow]) -> String {
    let measured = !rows.is_empty() && rows.iter().all(|r| r.measured.is_some());
    let mut out = String::from("alpha,r_bound,p_mix,greedy_curve,pedf_curve");
    if measured {
        out.push_str(",measured_greedy,measured_pedf,measured_detswitch,measured_barely");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.alpha, r.r_bound, r.p_mix, r.greedy_curve, r.pedf_curve
        );
        if let (true, Some(m)) = (measured, r.measured) {
            let _ = write!(out, ",{},{},{},{}", m.greedy, m.pedf, m.detswitch, m.barely);
        }
        out.push('\n');
    }
    out
}

/// Largest OPT / E[Barely-Random] found by [`exhaustive_worst_case`].
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    pub instance: Instance,
    pub ratio: Ratio,
    pub examined: u64,
}

/// Enumerates every two-valued instance whose jobs are drawn (with
/// repetition) from the windows `0 <= r < d <= horizon_max`, with at most
/// `jobs_max` jobs, and returns the one maximizing OPT / E[Barely-Random].
///
/// Instances are canonical multisets (nondecreasing job-type index), and the
/// first maximizer in that order wins ties.
pub fn exhaustive_worst_case(
    alpha: f64,
    horizon_max: Slot,
    jobs_max: usize,
) -> Result<WorstCase, AnalysisError> {
    let alpha = alpha_arg(alpha)?;
    if horizon_max > EXHAUSTIVE_MAX_HORIZON || jobs_max > EXHAUSTIVE_MAX_JOBS {
        return Err(AnalysisError::GuardExceeded {
            horizon: horizon_max,
            jobs: jobs_max,
        });
    }
    let mut types = Vec::new();
    for r in 0..horizon_max {
        for d in r + 1..=horizon_max {
            for w in [1.0, alpha] {
                types.push((r, d, w));
            }
        }
    }

    let mut best = WorstCase {
        instance: Instance::two_valued(alpha, vec![]),
        ratio: Ratio::Finite(1.0),
        examined: 0,
    };
    let mut picks: Vec<usize> = Vec::with_capacity(jobs_max);
    let mut examined = 0u64;
    enumerate_multisets(types.len(), jobs_max, &mut picks, &mut |picks| {
        examined += 1;
        let jobs = picks
            .iter()
            .enumerate()
            .map(|(id, &k)| {
                let (r, d, w) = types[k];
                Job::new(id as u32, r, d, w)
            })
            .collect();
        let inst = Instance::two_valued(alpha, jobs);
        let ratio = competitive_ratio(&inst, &Policy::BarelyRandom { alpha, seed: 0 }, 1)?;
        if ratio.value() > best.ratio.value() {
            best.instance = inst;
            best.ratio = ratio;
        }
        Ok(())
    })?;
    best.examined = examined;
    Ok(best)
}

fn enumerate_multisets(
    kinds: usize,
    max_len: usize,
    picks: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<(), AnalysisError>,
) -> Result<(), AnalysisError> {
    visit(picks)?;
    if picks.len() == max_len {
        return Ok(());
    }
    let start = picks.last().copied().unwrap_or(0);
    for k in start..kinds {
        picks.push(k);
        enumerate_multisets(kinds, max_len, picks, visit)?;
        picks.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sigma_instances;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn ratio_values() {
        assert!((ratio_r(1.0 + SQRT2).unwrap() - (4.0 - 2.0 * SQRT2)).abs() < 1e-12);
        assert!((ratio_r(2.0).unwrap() - 7.0 / 6.0).abs() < 1e-15);
        assert!((ratio_r(1.0 + 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(ratio_r(1.0), Err(AnalysisError::InvalidAlpha(1.0)));
        assert!(ratio_r(f64::INFINITY).is_err());
    }

    #[test]
    fn ratio_forms_agree() {
        for i in 1..=500 {
            let a = 1.0 + i as f64 * 0.037;
            let other = 1.0 + (a - 1.0) / (a * a + a);
            assert!(close_rel(ratio_r(a).unwrap(), other, IDENTITY_RTOL));
        }
    }

    #[test]
    fn mix_probability() {
        assert!((mix_p(2.0).unwrap() - 3.0 / 7.0).abs() < 1e-15);
        assert!((mix_p(1.0 + SQRT2).unwrap() - 0.5).abs() < 1e-12);
        assert!(mix_p(1.0 + 1e-9).unwrap() < 1e-8);
        for a in [1.1, 2.0, 3.3, 50.0] {
            let p = mix_p(a).unwrap();
            assert!(p > 0.0 && p < 1.0);
            let rp = ratio_r(a).unwrap() * p;
            assert!(close_rel(rp, (a * a - 1.0) / (a * a + a), IDENTITY_RTOL));
        }
        assert!(mix_p(0.9).is_err());
    }

    #[test]
    fn deterministic_bound() {
        assert!((det_ratio_bound(1.0 + SQRT2).unwrap() - SQRT2).abs() < 1e-12);
        assert!((det_ratio_bound(2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((det_ratio_bound(1e9).unwrap() - 1.0).abs() < 1e-8);
        assert!(det_ratio_bound(-3.0).is_err());
    }

    #[test]
    fn yao_values() {
        let y = yao_bound(2.0).unwrap();
        assert!((y.e_opt - 3.5).abs() < 1e-15);
        assert!((y.payoff_urgent - 3.0).abs() < 1e-15);
        assert!((y.payoff_heavy - 3.0).abs() < 1e-15);
        assert!((y.ratio - 7.0 / 6.0).abs() < 1e-15);
        let peak = yao_bound(1.0 + SQRT2).unwrap();
        assert!((peak.ratio - (4.0 - 2.0 * SQRT2)).abs() < 1e-12);
        assert!(yao_bound(1.0).is_err());
    }

    #[test]
    fn profile_of_sigma_instances() {
        let (s1, s2) = sigma_instances(2.0).unwrap();
        let c1 = profile_counts(&s1).unwrap();
        assert_eq!(
            c1,
            ProfileCounts {
                d: 1,
                h_star: 0,
                h: 1,
                l: 0,
                l_prime: 1
            }
        );
        assert!(c1.claim_holds() && c1.slot_balance_holds());
        let c2 = profile_counts(&s2).unwrap();
        assert_eq!(
            c2,
            ProfileCounts {
                d: 0,
                h_star: 1,
                h: 1,
                l: 0,
                l_prime: 1
            }
        );
        assert_eq!(c2.greedy_profit(2.0), 4.0);
        assert_eq!(c2.pedf_profit(2.0), 3.0);
        let empty = Instance::two_valued(2.0, vec![]);
        assert_eq!(profile_counts(&empty).unwrap(), ProfileCounts::default());
    }

    #[test]
    fn profile_requires_two_valued() {
        let general = Instance::new(None, vec![Job::new(0, 0, 1, 1.0)]);
        assert_eq!(profile_counts(&general), Err(AnalysisError::NotTwoValued));
        let off = Instance::two_valued(2.0, vec![Job::new(0, 0, 1, 1.5)]);
        assert_eq!(profile_counts(&off), Err(AnalysisError::NotTwoValued));
    }

    #[test]
    fn ratios_on_sigma() {
        let (s1, s2) = sigma_instances(2.0).unwrap();
        let barely = Policy::BarelyRandom { alpha: 2.0, seed: 0 };
        for s in [&s1, &s2] {
            let r = competitive_ratio(s, &barely, 1).unwrap().value();
            assert!((r - 7.0 / 6.0).abs() < 1e-12);
        }
        let pedf = competitive_ratio(&s2, &Policy::Pedf, 1).unwrap().value();
        assert!((pedf - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_sentinels() {
        assert_eq!(Ratio::of(0.0, 0.0), Ratio::Finite(1.0));
        assert_eq!(Ratio::of(3.0, 0.0), Ratio::Infinite);
        assert_eq!(Ratio::Infinite.to_string(), "inf");
        assert_eq!(Ratio::Infinite.value(), f64::INFINITY);
    }

    #[test]
    fn monte_carlo_deterministic_policy() {
        let (_, s2) = sigma_instances(2.0).unwrap();
        let est = monte_carlo_profit(&s2, &Policy::Greedy, 25, 1).unwrap();
        assert_eq!(est.mean, 4.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(monte_carlo_profit(&s2, &Policy::Greedy, 0, 1), Err(AnalysisError::NoTrials));
    }

    #[test]
    fn sweep_shape() {
        let rows = sweep_curves(2.0, 2.0, 0.5).unwrap();
        assert_eq!(rows.len(), 1);
        let rows = sweep_curves(2.0, 3.0, 0.25).unwrap();
        let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
        assert_eq!(alphas, vec![2.0, 2.25, ALPHA_STAR, 2.5, 2.75, 3.0]);
        let star = rows[2];
        assert!((star.greedy_curve - SQRT2).abs() < 1e-12);
        assert!((star.pedf_curve - SQRT2).abs() < 1e-12);
        assert!((star.r_bound - (4.0 - 2.0 * SQRT2)).abs() < 1e-12);
        assert!(sweep_curves(3.0, 2.0, 0.1).is_err());
        assert!(sweep_curves(0.5, 2.0, 0.1).is_err());
        assert!(sweep_curves(1.5, 2.0, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = sweep_curves(2.0, 2.0, 1.0).unwrap();
        let csv = curves_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("alpha,r_bound,p_mix,greedy_curve,pedf_curve"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], "2");
        assert_eq!(fields[3], "1.5");

        let measured = sweep_curves_measured(2.0, 2.0, 1.0).unwrap();
        let csv = curves_to_csv(&measured);
        assert!(csv.starts_with(
            "alpha,r_bound,p_mix,greedy_curve,pedf_curve,measured_greedy,measured_pedf,measured_detswitch,measured_barely\n"
        ));
        let m = measured[0].measured.unwrap();
        assert!((m.barely - 7.0 / 6.0).abs() < 1e-12);
        assert!((m.greedy - 1.5).abs() < 1e-15);
        assert!((m.pedf - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_small() {
        let single = exhaustive_worst_case(2.0, 2, 1).unwrap();
        assert_eq!(single.ratio, Ratio::Finite(1.0));
        let none = exhaustive_worst_case(2.0, 3, 0).unwrap();
        assert_eq!(none.ratio, Ratio::Finite(1.0));
        assert!(none.instance.is_empty());
        assert_eq!(none.examined, 1);
        assert!(matches!(
            exhaustive_worst_case(2.0, 5, 2),
            Err(AnalysisError::GuardExceeded { .. })
        ));
        assert!(exhaustive_worst_case(2.0, 2, 6).is_err());
    }

    #[test]
    fn multiset_enumeration_count() {
        // multisets of size <= 2 over 3 kinds: 1 + 3 + 6
        let mut n = 0;
        enumerate_multisets(3, 2, &mut Vec::new(), &mut |_| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
    }
}
