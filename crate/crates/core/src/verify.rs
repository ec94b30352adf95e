//! Property suite run by `twoval verify`: every structural and numerical
//! claim about Greedy, PEDF, Barely-Random and the optimum, checked over a
//! seeded random corpus.

use std::fmt;

use crate::analysis::{self, Profile, CROSS_ATOL, IDENTITY_RTOL};
use crate::model::{self, Instance, Job, Slot};
use crate::offline;
use crate::rng::SplitMix64;
use crate::scheduling::{self, Policy, PolicyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    ScheduleFeasibility,
    Claim,
    SlotBalance,
    HeavyContainment,
    ProfitReconstruction,
    OptUpperBound,
    RatioBound,
    OptDominance,
    PedfCardinality,
    GreedyHeavyCount,
    IdleDomination,
    CrossExecution,
    GreedyCurve,
    PedfCurve,
    OracleEquivalence,
    ClosedForms,
    BarelySampling,
    Exhaustive,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::ScheduleFeasibility => "schedule feasibility (all policies)",
            Property::Claim => "d + h* <= h",
            Property::SlotBalance => "d + h* + h + l == h + l'",
            Property::HeavyContainment => "PEDF heavy jobs are run by Greedy",
            Property::ProfitReconstruction => "profits rebuilt from counts",
            Property::OptUpperBound => "OPT <= h* a + h a + l + d",
            Property::RatioBound => "R * E[Barely-Random] >= OPT",
            Property::OptDominance => "OPT count <= PEDF count, OPT heavy <= Greedy heavy",
            Property::PedfCardinality => "PEDF runs a maximum number of jobs",
            Property::GreedyHeavyCount => "Greedy runs a maximum number of heavy jobs",
            Property::IdleDomination => "PEDF idle implies Greedy idle",
            Property::CrossExecution => "Greedy heavy vs PEDF light: PEDF runs it later",
            Property::GreedyCurve => "OPT / Greedy <= (1 + a) / a",
            Property::PedfCurve => "OPT / PEDF <= 2a / (1 + a)",
            Property::OracleEquivalence => "matching optimum == brute force",
            Property::ClosedForms => "closed-form identities",
            Property::BarelySampling => "Barely-Random sample mean vs exact expectation",
            Property::Exhaustive => "exhaustive worst case == R(a)",
        }
    }
}

/// Outcome of one property.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub checked: u64,
    pub violations: u64,
    /// First counterexample or measurement, when there is one to show.
    pub detail: Option<String>,
}

impl PropertyReport {
    fn new(property: Property) -> Self {
        Self {
            property,
            checked: 0,
            violations: 0,
            detail: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.detail.is_none() {
                self.detail = Some(detail());
            }
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} ({} checked, {} violations)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.property.name(),
            self.checked,
            self.violations
        )?;
        if let Some(d) = &self.detail {
            write!(f, ": {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub alphas: Vec<f64>,
    /// Random corpus size per alpha.
    pub instances: usize,
    /// Small instances (<= 8 jobs, horizon <= 8) for the brute-force oracle.
    pub oracle_instances: usize,
    pub barely_trials: u64,
    pub seed: u64,
    pub exhaustive: Option<(Slot, usize)>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1.2, 2.0, scheduling::ALPHA_STAR, 4.0],
            instances: 10_000,
            oracle_instances: 2_000,
            barely_trials: 20_000,
            seed: 0xD1CE,
            exhaustive: None,
        }
    }
}

/// Random small instance for the brute-force oracle: horizon in `1..=8`,
/// job count in `0..=8`, spans up to the horizon.
pub fn oracle_instance(alpha: f64, rng: &mut SplitMix64) -> Instance {
    let horizon = rng.range_inclusive(1, 8) as Slot;
    let params = model::GenParams {
        horizon,
        job_count: rng.range_inclusive(0, 8) as u32,
        heavy_probability: 0.5,
        max_span: rng.range_inclusive(1, u64::from(horizon)) as Slot,
        seed: rng.next_u64(),
        alpha,
    };
    model::random_instance(&params).expect("valid oracle parameters")
}

fn heavy_jobs(inst: &Instance, alpha: f64) -> Vec<Job> {
    inst.jobs.iter().filter(|j| j.weight == alpha).copied().collect()
}

/// Corpus checks that need only one instance.
struct Checker {
    reports: Vec<PropertyReport>,
}

impl Checker {
    fn get(&mut self, p: Property) -> &mut PropertyReport {
        if let Some(i) = self.reports.iter().position(|r| r.property == p) {
            &mut self.reports[i]
        } else {
            self.reports.push(PropertyReport::new(p));
            self.reports.last_mut().unwrap()
        }
    }

    fn instance(&mut self, inst: &Instance, alpha: f64) {
        let show = || format!("alpha={alpha} instance={}", describe_jobs(inst));

        let feasible = PolicyKind::ALL.into_iter().all(|kind| {
            scheduling::run_policy(inst, &kind.with(alpha, 7))
                .map(|s| model::profit_of(inst, &s).is_ok())
                .unwrap_or(false)
        });
        self.get(Property::ScheduleFeasibility).record(feasible, show);

        let Profile {
            counts,
            greedy,
            pedf,
            pedf_only_heavy,
        } = analysis::profile(inst).expect("corpus instances are two-valued");
        let opt = offline::optimal_schedule(inst).expect("valid instance");
        let r = analysis::ratio_r(alpha).expect("alpha > 1");
        let expected = scheduling::barely_random_expected_profit(inst, alpha).expect("two-valued");

        self.get(Property::Claim).record(counts.claim_holds(), || format!("{counts:?} {}", show()));
        self.get(Property::SlotBalance)
            .record(counts.slot_balance_holds(), || format!("{counts:?} {}", show()));
        self.get(Property::HeavyContainment)
            .record(pedf_only_heavy == 0, show);
        self.get(Property::ProfitReconstruction).record(
            (counts.greedy_profit(alpha) - greedy.profit()).abs() <= CROSS_ATOL
                && (counts.pedf_profit(alpha) - pedf.profit()).abs() <= CROSS_ATOL,
            show,
        );
        self.get(Property::OptUpperBound)
            .record(opt.value <= counts.opt_upper_bound(alpha) + CROSS_ATOL, show);
        self.get(Property::RatioBound)
            .record(r * expected >= opt.value - CROSS_ATOL, show);

        let heavy_in = |s: &model::Schedule| {
            s.job_ids()
                .filter(|&id| inst.job(id).is_some_and(|j| j.weight == alpha))
                .count()
        };
        let opt_heavy = heavy_in(&opt.schedule);
        let greedy_heavy = heavy_in(&greedy);
        self.get(Property::OptDominance).record(
            opt.schedule.len() <= pedf.len() && opt_heavy <= greedy_heavy,
            show,
        );
        self.get(Property::PedfCardinality)
            .record(pedf.len() == offline::max_schedulable(&inst.jobs), show);
        self.get(Property::GreedyHeavyCount)
            .record(greedy_heavy == offline::max_schedulable(&heavy_jobs(inst, alpha)), show);

        let idle_ok = (0..inst.horizon())
            .all(|t| pedf.job_at(t).is_some() || greedy.job_at(t).is_none());
        self.get(Property::IdleDomination).record(idle_ok, show);

        let cross_ok = greedy.assignment().iter().all(|(&t, &g)| {
            let g_heavy = inst.job(g).is_some_and(|j| j.weight == alpha);
            let p_light = pedf
                .job_at(t)
                .and_then(|p| inst.job(p))
                .is_some_and(|j| j.weight != alpha);
            !(g_heavy && p_light) || pedf.contains(g)
        });
        self.get(Property::CrossExecution).record(cross_ok, show);

        let opt_over = |profit: f64| analysis::Ratio::of(opt.value, profit).value();
        self.get(Property::GreedyCurve).record(
            opt_over(greedy.profit()) <= analysis::greedy_curve(alpha) + CROSS_ATOL,
            show,
        );
        self.get(Property::PedfCurve).record(
            opt_over(pedf.profit()) <= analysis::pedf_curve(alpha) + CROSS_ATOL,
            show,
        );
    }
}

fn describe_jobs(inst: &Instance) -> String {
    inst.jobs
        .iter()
        .map(|j| format!("({},{},{},{})", j.id, j.release, j.deadline, j.weight))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs the whole suite; reports come back in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<PropertyReport> {
    let mut checker = Checker {
        reports: Vec::new(),
    };
    let mut seeds = SplitMix64::new(cfg.seed);

    for &alpha in &cfg.alphas {
        for inst in model::random_corpus(alpha, cfg.instances, seeds.next_u64()) {
            checker.instance(&inst, alpha);
        }
    }

    for &alpha in &cfg.alphas {
        let mut rng = SplitMix64::new(seeds.next_u64());
        for _ in 0..cfg.oracle_instances {
            let inst = oracle_instance(alpha, &mut rng);
            let fast = offline::optimal_schedule(&inst).map(|o| o.value);
            let slow = offline::brute_force_optimal(&inst).map(|o| o.value);
            checker
                .get(Property::OracleEquivalence)
                .record(fast.is_ok() && fast == slow, || {
                    format!("{fast:?} vs {slow:?} on {}", describe_jobs(&inst))
                });
        }
    }

    for i in 0..=1000 {
        let a = 1.0 + 1e-3 + i as f64 * 0.009;
        let r = analysis::ratio_r(a).unwrap();
        let y = analysis::yao_bound(a).unwrap();
        let p = analysis::mix_p(a).unwrap();
        let ok = analysis::close_rel(r, 1.0 + (a - 1.0) / (a * a + a), IDENTITY_RTOL)
            && analysis::close_rel(y.ratio, r, IDENTITY_RTOL)
            && analysis::close_rel(y.e_opt, 2.0 + a - 1.0 / a, IDENTITY_RTOL)
            && analysis::close_rel(y.payoff_urgent, 1.0 + a, IDENTITY_RTOL)
            && analysis::close_rel(y.payoff_heavy, 1.0 + a, IDENTITY_RTOL)
            && analysis::close_rel(r * p, (a * a - 1.0) / (a * a + a), IDENTITY_RTOL)
            && r <= analysis::det_ratio_bound(a).unwrap();
        checker
            .get(Property::ClosedForms)
            .record(ok, || format!("alpha={a}"));
    }

    if cfg.barely_trials > 0 {
        for &alpha in &cfg.alphas {
            let (s1, s2) = model::sigma_instances(alpha).expect("alpha > 1");
            for inst in [s1, s2] {
                let exact = scheduling::barely_random_expected_profit(&inst, alpha).unwrap();
                let est = analysis::monte_carlo_profit(
                    &inst,
                    &Policy::BarelyRandom { alpha, seed: 0 },
                    cfg.barely_trials,
                    seeds.next_u64(),
                )
                .unwrap();
                let ok = (est.mean - exact).abs() <= 4.0 * est.std_error;
                checker.get(Property::BarelySampling).record(ok, || {
                    format!("alpha={alpha}: mean {} vs exact {exact} (se {})", est.mean, est.std_error)
                });
            }
        }
    }

    if let Some((horizon, jobs)) = cfg.exhaustive {
        for &alpha in &cfg.alphas {
            let r = analysis::ratio_r(alpha).unwrap();
            let outcome = analysis::exhaustive_worst_case(alpha, horizon, jobs);
            let report = checker.get(Property::Exhaustive);
            match outcome {
                Ok(w) => {
                    let ok = (w.ratio.value() - r).abs() <= CROSS_ATOL;
                    report.record(ok, || {
                        format!(
                            "alpha={alpha}: worst {} vs R {r} on {}",
                            w.ratio,
                            describe_jobs(&w.instance)
                        )
                    });
                    if report.detail.is_none() {
                        report.detail = Some(format!(
                            "alpha={alpha}: worst {} over {} instances",
                            w.ratio, w.examined
                        ));
                    }
                }
                Err(e) => report.record(false, || e.to_string()),
            }
        }
    }

    checker.reports.sort_by_key(|r| r.property);
    checker.reports
}
