//! Jobs, instances and schedules for unit-length bounded-delay scheduling,
//! plus the instance generators used by experiments and property tests.
//!
//! Deadlines are exclusive throughout the crate: a job with release `r` and
//! deadline `d` may run in any slot `t` with `r <= t < d`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

/// Index of a unit time slot.
pub type Slot = u32;

/// Job identifier, unique within an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A unit-length packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub id: JobId,
    #[serde(rename = "r")]
    pub release: Slot,
    #[serde(rename = "d")]
    pub deadline: Slot,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl Job {
    pub fn new(id: u32, release: Slot, deadline: Slot, weight: f64) -> Self {
        Self {
            id: JobId(id),
            release,
            deadline,
            weight,
        }
    }

    /// Whether the job may run in slot `t`.
    #[inline]
    pub fn runnable_at(&self, t: Slot) -> bool {
        self.release <= t && t < self.deadline
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("alpha must be a finite number greater than 1, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("malformed instance file: {0}")]
    Decode(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A violated instance invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyWindow { id: JobId, release: Slot, deadline: Slot },
    NonPositiveWeight { id: JobId, weight: f64 },
    NotTwoValued { id: JobId, weight: f64, alpha: f64 },
    DuplicateId { id: JobId },
    InvalidAlpha { alpha: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyWindow { id, release, deadline } => {
                write!(f, "job {id}: deadline {deadline} <= release {release}")
            }
            Violation::NonPositiveWeight { id, weight } => {
                write!(f, "job {id}: weight {weight} is not a positive number")
            }
            Violation::NotTwoValued { id, weight, alpha } => {
                write!(f, "job {id}: weight {weight} is neither 1 nor alpha={alpha}")
            }
            Violation::DuplicateId { id } => write!(f, "job {id}: duplicate id"),
            Violation::InvalidAlpha { alpha } => write!(f, "alpha {alpha} is not > 1"),
        }
    }
}

/// Checks that `alpha` is usable as the heavy weight.
pub fn check_alpha(alpha: f64) -> Result<f64, ModelError> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(alpha)
    } else {
        Err(ModelError::InvalidAlpha(alpha))
    }
}

/// A finite job multiset, optionally tagged with the heavy weight.
///
/// When `alpha` is present the instance is two-valued: every weight is
/// exactly 1 or exactly `alpha`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub alpha: Option<f64>,
    pub jobs: Vec<Job>,
}

impl Instance {
    pub fn new(alpha: Option<f64>, jobs: Vec<Job>) -> Self {
        Self { alpha, jobs }
    }

    pub fn two_valued(alpha: f64, jobs: Vec<Job>) -> Self {
        Self {
            alpha: Some(alpha),
            jobs,
        }
    }

    /// Largest deadline, 0 for the empty instance.
    pub fn horizon(&self) -> Slot {
        self.jobs.iter().map(|j| j.deadline).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// True when every weight is exactly 1 or exactly `alpha`.
    pub fn weights_within(&self, alpha: f64) -> bool {
        self.jobs.iter().all(|j| j.weight == 1.0 || j.weight == alpha)
    }

    /// True when the instance is tagged two-valued and the tag is honored.
    pub fn is_two_valued(&self) -> bool {
        matches!(self.alpha, Some(a) if a > 1.0 && self.weights_within(a))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let violations = validate_instance(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidInstance(violations))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Returns every violated job/instance invariant; an empty list means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let alpha = match inst.alpha {
        Some(a) if !(a.is_finite() && a > 1.0) => {
            out.push(Violation::InvalidAlpha { alpha: a });
            None
        }
        other => other,
    };
    let mut seen = HashSet::with_capacity(inst.jobs.len());
    for job in &inst.jobs {
        if !seen.insert(job.id) {
            out.push(Violation::DuplicateId { id: job.id });
        }
        if job.deadline <= job.release {
            out.push(Violation::EmptyWindow {
                id: job.id,
                release: job.release,
                deadline: job.deadline,
            });
        }
        if !(job.weight.is_finite() && job.weight > 0.0) {
            out.push(Violation::NonPositiveWeight {
                id: job.id,
                weight: job.weight,
            });
        } else if let Some(a) = alpha {
            if job.weight != 1.0 && job.weight != a {
                out.push(Violation::NotTwoValued {
                    id: job.id,
                    weight: job.weight,
                    alpha: a,
                });
            }
        }
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("slot {slot}: unknown job id {id}")]
    UnknownJob { slot: Slot, id: JobId },
    #[error("slot {slot}: job {id} runs outside its window [{release}, {deadline})")]
    OutsideWindow {
        slot: Slot,
        id: JobId,
        release: Slot,
        deadline: Slot,
    },
    #[error("job {id} is scheduled more than once")]
    DuplicateJob { id: JobId },
    #[error("stored profit {stored} differs from recomputed profit {recomputed}")]
    ProfitMismatch { stored: f64, recomputed: f64 },
}

/// Sums weights in ascending order so that equal multisets give equal sums.
pub(crate) fn canonical_sum(weights: impl IntoIterator<Item = f64>) -> f64 {
    let mut w: Vec<f64> = weights.into_iter().collect();
    w.sort_by(f64::total_cmp);
    w.into_iter().sum()
}

/// Slot-to-job assignment together with its total weight.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Schedule {
    assignment: BTreeMap<Slot, JobId>,
    profit: f64,
}

impl Schedule {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates `assignment` against `inst` and computes its profit.
    pub fn from_assignment(
        inst: &Instance,
        assignment: BTreeMap<Slot, JobId>,
    ) -> Result<Self, ScheduleError> {
        let profit = assignment_profit(inst, &assignment)?;
        Ok(Self { assignment, profit })
    }

    pub fn assignment(&self) -> &BTreeMap<Slot, JobId> {
        &self.assignment
    }

    pub fn profit(&self) -> f64 {
        self.profit
    }

    /// Number of scheduled jobs.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn job_at(&self, slot: Slot) -> Option<JobId> {
        self.assignment.get(&slot).copied()
    }

    pub fn contains(&self, id: JobId) -> bool {
        self.assignment.values().any(|&j| j == id)
    }

    pub fn job_ids(&self) -> impl Iterator<Item = JobId> + '_ {
        self.assignment.values().copied()
    }
}

fn assignment_profit(
    inst: &Instance,
    assignment: &BTreeMap<Slot, JobId>,
) -> Result<f64, ScheduleError> {
    let by_id: HashMap<JobId, &Job> = inst.jobs.iter().map(|j| (j.id, j)).collect();
    let mut used = HashSet::with_capacity(assignment.len());
    let mut weights = Vec::with_capacity(assignment.len());
    for (&slot, &id) in assignment {
        let job = by_id
            .get(&id)
            .ok_or(ScheduleError::UnknownJob { slot, id })?;
        if !job.runnable_at(slot) {
            return Err(ScheduleError::OutsideWindow {
                slot,
                id,
                release: job.release,
                deadline: job.deadline,
            });
        }
        if !used.insert(id) {
            return Err(ScheduleError::DuplicateJob { id });
        }
        weights.push(job.weight);
    }
    Ok(canonical_sum(weights))
}

/// Recomputes the profit of `sched` on `inst`, checking every schedule
/// invariant including agreement with the stored profit.
pub fn profit_of(inst: &Instance, sched: &Schedule) -> Result<f64, ScheduleError> {
    let recomputed = assignment_profit(inst, &sched.assignment)?;
    if recomputed != sched.profit {
        return Err(ScheduleError::ProfitMismatch {
            stored: sched.profit,
            recomputed,
        });
    }
    Ok(recomputed)
}

/// The two adversarial instances of the deterministic lower bound.
///
/// `σ1` releases an urgent light job and a heavy job with deadline 2 at slot 0;
/// `σ2` additionally releases a second heavy job at slot 1. The first two jobs
/// are identical in both, so no online algorithm can tell them apart at slot 0.
pub fn sigma_instances(alpha: f64) -> Result<(Instance, Instance), ModelError> {
    let alpha = check_alpha(alpha)?;
    let base = vec![Job::new(0, 0, 1, 1.0), Job::new(1, 0, 2, alpha)];
    let mut extended = base.clone();
    extended.push(Job::new(2, 1, 2, alpha));
    Ok((
        Instance::two_valued(alpha, base),
        Instance::two_valued(alpha, extended),
    ))
}

/// Parameters of the seeded random two-valued instance generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub horizon: Slot,
    pub job_count: u32,
    pub heavy_probability: f64,
    /// Upper bound on `deadline - release`.
    pub max_span: Slot,
    pub seed: u64,
    pub alpha: f64,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_alpha(self.alpha)?;
        if self.horizon == 0 {
            return Err(ModelError::InvalidParams("horizon must be positive".into()));
        }
        if self.max_span == 0 {
            return Err(ModelError::InvalidParams("max_span must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.heavy_probability) {
            return Err(ModelError::InvalidParams(format!(
                "heavy_probability {} is outside [0, 1]",
                self.heavy_probability
            )));
        }
        Ok(())
    }
}

/// Draws a two-valued instance. Per job, in id order: release uniform in
/// `[0, horizon)`, span uniform in `[1, min(max_span, horizon - release)]`,
/// then a unit real deciding heavy (`u < heavy_probability`) or light.
pub fn random_instance(params: &GenParams) -> Result<Instance, ModelError> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);
    let jobs = (0..params.job_count)
        .map(|id| {
            let release = rng.below(u64::from(params.horizon)) as Slot;
            let widest = params.max_span.min(params.horizon - release);
            let span = rng.range_inclusive(1, u64::from(widest)) as Slot;
            let weight = if rng.next_f64() < params.heavy_probability {
                params.alpha
            } else {
                1.0
            };
            Job::new(id, release, release + span, weight)
        })
        .collect();
    Ok(Instance::two_valued(params.alpha, jobs))
}

/// Generator parameters for instance `i` of a seeded corpus.
///
/// Draws horizon in `1..=10`, job count in `0..=12`, heavy probability from
/// {0.25, 0.5, 0.75} and max span in `1..=horizon`, then a fresh seed.
pub fn corpus_params(alpha: f64, rng: &mut SplitMix64) -> GenParams {
    const HEAVY: [f64; 3] = [0.25, 0.5, 0.75];
    let horizon = rng.range_inclusive(1, 10) as Slot;
    let job_count = rng.range_inclusive(0, 12) as u32;
    let heavy_probability = HEAVY[rng.below(3) as usize];
    let max_span = rng.range_inclusive(1, u64::from(horizon)) as Slot;
    GenParams {
        horizon,
        job_count,
        heavy_probability,
        max_span,
        seed: rng.next_u64(),
        alpha,
    }
}

/// A deterministic stream of `count` random two-valued instances.
pub fn random_corpus(alpha: f64, count: usize, seed: u64) -> impl Iterator<Item = Instance> {
    let mut rng = SplitMix64::new(seed);
    (0..count).map(move |_| {
        let params = corpus_params(alpha, &mut rng);
        random_instance(&params).expect("corpus parameters are valid")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_instance_is_valid() {
        let inst = Instance::two_valued(2.0, vec![]);
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 0);
    }

    #[test]
    fn empty_window_is_reported() {
        let inst = Instance::two_valued(2.0, vec![Job::new(0, 1, 1, 1.0)]);
        assert_eq!(
            validate_instance(&inst),
            vec![Violation::EmptyWindow {
                id: JobId(0),
                release: 1,
                deadline: 1
            }]
        );
    }

    #[test]
    fn off_grid_weight_is_reported() {
        let inst = Instance::two_valued(2.0, vec![Job::new(0, 0, 2, 1.5)]);
        assert_eq!(
            validate_instance(&inst),
            vec![Violation::NotTwoValued {
                id: JobId(0),
                weight: 1.5,
                alpha: 2.0
            }]
        );
    }

    #[test]
    fn general_weights_allowed_without_alpha() {
        let inst = Instance::new(None, vec![Job::new(0, 0, 2, 1.5), Job::new(1, 0, 1, 0.3)]);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn duplicate_ids_and_bad_weights() {
        let inst = Instance::new(
            None,
            vec![Job::new(3, 0, 2, 1.0), Job::new(3, 0, 2, -1.0)],
        );
        let v = validate_instance(&inst);
        assert!(v.contains(&Violation::DuplicateId { id: JobId(3) }));
        assert!(v.contains(&Violation::NonPositiveWeight {
            id: JobId(3),
            weight: -1.0
        }));
        let bad_alpha = Instance::two_valued(1.0, vec![]);
        assert_eq!(
            validate_instance(&bad_alpha),
            vec![Violation::InvalidAlpha { alpha: 1.0 }]
        );
    }

    #[test]
    fn profit_of_figure_one_schedules() {
        let (s1, s2) = sigma_instances(2.0).unwrap();
        assert_eq!(profit_of(&s1, &Schedule::empty()), Ok(0.0));

        let greedy = Schedule::from_assignment(&s1, BTreeMap::from([(0, JobId(1))])).unwrap();
        assert_eq!(profit_of(&s1, &greedy), Ok(2.0));

        let opt2 =
            Schedule::from_assignment(&s2, BTreeMap::from([(0, JobId(1)), (1, JobId(2))]))
                .unwrap();
        assert_eq!(profit_of(&s2, &opt2), Ok(4.0));
    }

    #[test]
    fn profit_of_rejects_each_error_kind() {
        let (s1, _) = sigma_instances(2.0).unwrap();
        assert_eq!(
            Schedule::from_assignment(&s1, BTreeMap::from([(0, JobId(9))])),
            Err(ScheduleError::UnknownJob {
                slot: 0,
                id: JobId(9)
            })
        );
        assert_eq!(
            Schedule::from_assignment(&s1, BTreeMap::from([(1, JobId(0))])),
            Err(ScheduleError::OutsideWindow {
                slot: 1,
                id: JobId(0),
                release: 0,
                deadline: 1
            })
        );
        assert_eq!(
            Schedule::from_assignment(&s1, BTreeMap::from([(0, JobId(1)), (1, JobId(1))])),
            Err(ScheduleError::DuplicateJob { id: JobId(1) })
        );
        let mut tampered = Schedule::from_assignment(&s1, BTreeMap::from([(0, JobId(1))])).unwrap();
        tampered.profit = 5.0;
        assert!(matches!(
            profit_of(&s1, &tampered),
            Err(ScheduleError::ProfitMismatch { .. })
        ));
    }

    #[test]
    fn sigma_prefix_and_horizon() {
        for alpha in [1.0001, 1.5, 2.0, 1.0 + 2f64.sqrt(), 17.0] {
            let (s1, s2) = sigma_instances(alpha).unwrap();
            assert_eq!(&s2.jobs[..2], &s1.jobs[..]);
            assert_eq!(s2.jobs[2], Job::new(2, 1, 2, alpha));
            assert_eq!(s1.horizon(), 2);
            assert_eq!(s2.horizon(), 2);
            assert!(validate_instance(&s2).is_empty());
        }
        assert!(matches!(sigma_instances(1.0), Err(ModelError::InvalidAlpha(_))));
        assert!(sigma_instances(f64::NAN).is_err());
    }

    #[test]
    fn generator_is_seeded_and_valid() {
        let params = GenParams {
            horizon: 7,
            job_count: 20,
            heavy_probability: 0.4,
            max_span: 3,
            seed: 99,
            alpha: 2.5,
        };
        let a = random_instance(&params).unwrap();
        let b = random_instance(&params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(validate_instance(&a).is_empty());
        for job in &a.jobs {
            assert!(job.deadline <= 7);
            assert!(job.deadline - job.release <= 3);
        }
        let empty = random_instance(&GenParams {
            job_count: 0,
            ..params.clone()
        })
        .unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn generator_draw_order_is_pinned() {
        // release, span, weight per job, straight off the SplitMix64 stream
        let params = GenParams {
            horizon: 5,
            job_count: 3,
            heavy_probability: 0.5,
            max_span: 2,
            seed: 0,
            alpha: 3.0,
        };
        let mut rng = SplitMix64::new(0);
        let mut expected = Vec::new();
        for id in 0..3 {
            let r = ((u128::from(rng.next_u64()) * 5) >> 64) as u32;
            let widest = 2.min(5 - r);
            let span = 1 + ((u128::from(rng.next_u64()) * u128::from(widest)) >> 64) as u32;
            let u = rng.next_u64() as f64 / 2f64.powi(64);
            let w = if u < 0.5 { 3.0 } else { 1.0 };
            expected.push(Job::new(id, r, r + span, w));
        }
        assert_eq!(random_instance(&params).unwrap().jobs, expected);
    }

    #[test]
    fn generator_rejects_bad_params() {
        let ok = GenParams {
            horizon: 3,
            job_count: 1,
            heavy_probability: 0.5,
            max_span: 1,
            seed: 1,
            alpha: 2.0,
        };
        assert!(random_instance(&GenParams { max_span: 0, ..ok.clone() }).is_err());
        assert!(random_instance(&GenParams { horizon: 0, ..ok.clone() }).is_err());
        assert!(random_instance(&GenParams { heavy_probability: 1.5, ..ok.clone() }).is_err());
        assert!(random_instance(&GenParams { alpha: 0.5, ..ok }).is_err());
    }

    #[test]
    fn json_field_names() {
        let (s1, _) = sigma_instances(2.0).unwrap();
        let text = serde_json::to_string(&s1).unwrap();
        assert_eq!(
            text,
            r#"{"alpha":2.0,"jobs":[{"id":0,"r":0,"d":1,"w":1.0},{"id":1,"r":0,"d":2,"w":2.0}]}"#
        );
        let general: Instance =
            Instance::from_json(r#"{"alpha": null, "jobs": [{"id": 4, "r": 2, "d": 5, "w": 0.75}]}"#)
                .unwrap();
        assert_eq!(general.alpha, None);
        assert_eq!(general.jobs, vec![Job::new(4, 2, 5, 0.75)]);
        assert!(Instance::from_json(r#"{"alpha": 2, "jobs": [{"id": 0, "r": 0, "d": 1}]}"#).is_err());
    }
}
