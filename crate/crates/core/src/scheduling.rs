//! Provisional schedules and the online policies, driven by a slot-by-slot
//! simulation engine.
//!
//! At every slot the engine drops expired jobs, adds newly released ones and
//! asks the policy for at most one pending job. Deterministic policies
//! (Greedy, PEDF, EDF and the alpha switch) are pure functions of the
//! instance; the randomized ones draw from a seeded [`SplitMix64`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis;
use crate::model::{self, Instance, Job, JobId, Schedule, Slot, Violation};
use crate::rng::SplitMix64;

/// Crossover of the two deterministic ratio curves, `1 + sqrt(2)`.
pub const ALPHA_STAR: f64 = 1.0 + std::f64::consts::SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum SchedulingError {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("instance is not two-valued for alpha={alpha}: job {id} has weight {weight}")]
    NotTwoValued { alpha: f64, id: JobId, weight: f64 },
    #[error("alpha must be a finite number greater than 1, got {0}")]
    InvalidAlpha(f64),
    #[error("job {id} is not pending at slot {slot}")]
    NotPending { id: JobId, slot: Slot },
}

/// Jobs that are released, unexpired and unscheduled at `slot`.
#[derive(Clone, Debug, PartialEq)]
pub struct PendingSet {
    slot: Slot,
    jobs: Vec<Job>,
}

impl PendingSet {
    pub fn new(slot: Slot, jobs: Vec<Job>) -> Result<Self, SchedulingError> {
        if let Some(j) = jobs.iter().find(|j| !j.runnable_at(slot)) {
            return Err(SchedulingError::NotPending { id: j.id, slot });
        }
        Ok(Self { slot, jobs })
    }

    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }
}

/// A maximum-weight subset of the pending jobs that can all still be run
/// from the current slot on, with an EDF slot assignment as certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ProvisionalSchedule {
    slot: Slot,
    /// Sorted by (deadline, id); member `i` runs at `slot + i` in the certificate.
    members: Vec<Job>,
}

impl ProvisionalSchedule {
    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn members(&self) -> &[Job] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weight(&self) -> f64 {
        model::canonical_sum(self.members.iter().map(|j| j.weight))
    }

    pub fn contains(&self, id: JobId) -> bool {
        self.members.iter().any(|j| j.id == id)
    }

    /// Feasible slot assignment of the members, starting at the current slot.
    pub fn certificate(&self) -> Vec<(Slot, JobId)> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, j)| (self.slot + i as Slot, j.id))
            .collect()
    }

    /// Checks that for every member `j`, `|{i : d_i <= d_j}| <= d_j - t`.
    pub fn is_feasible(&self) -> bool {
        self.members.iter().all(|j| {
            let earlier = self.members.iter().filter(|i| i.deadline <= j.deadline).count();
            j.deadline > self.slot && earlier as u64 <= u64::from(j.deadline - self.slot)
        })
    }
}

fn edf_key(a: &Job, b: &Job) -> Ordering {
    a.deadline.cmp(&b.deadline).then(a.id.cmp(&b.id))
}

/// Builds the provisional schedule of `pending`.
///
/// Jobs are considered by descending weight, then ascending deadline, then
/// ascending id, and admitted iff the members plus the candidate can still
/// be run in EDF order from the current slot without missing a deadline.
pub fn build_provisional(pending: &PendingSet) -> ProvisionalSchedule {
    let t = pending.slot;
    let mut order: Vec<&Job> = pending.jobs.iter().collect();
    order.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.deadline.cmp(&b.deadline))
            .then(a.id.cmp(&b.id))
    });

    let mut members: Vec<Job> = Vec::with_capacity(order.len());
    for job in order {
        let pos = members.partition_point(|m| edf_key(m, job) == Ordering::Less);
        // Members before `pos` keep their slots; the candidate and everything
        // after it shift by one and must still meet their deadlines.
        let fits = t + (pos as Slot) < job.deadline
            && members[pos..]
                .iter()
                .enumerate()
                .all(|(k, m)| t + ((pos + k + 1) as Slot) < m.deadline);
        if fits {
            members.insert(pos, *job);
        }
    }
    ProvisionalSchedule { slot: t, members }
}

/// Heaviest provisional job, ties to the earliest deadline, then lowest id.
pub fn pick_greedy(prov: &ProvisionalSchedule) -> Option<Job> {
    prov.members.iter().copied().min_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.deadline.cmp(&b.deadline))
            .then(a.id.cmp(&b.id))
    })
}

fn earliest_deadline(jobs: &[Job]) -> Option<Job> {
    jobs.iter().copied().min_by(|a, b| {
        a.deadline
            .cmp(&b.deadline)
            .then(b.weight.total_cmp(&a.weight))
            .then(a.id.cmp(&b.id))
    })
}

/// Earliest-deadline provisional job, ties to the heavier, then lowest id.
pub fn pick_pedf(prov: &ProvisionalSchedule) -> Option<Job> {
    earliest_deadline(&prov.members)
}

/// Plain EDF over the whole pending set, same tie-breaks as PEDF.
pub fn pick_edf(pending: &PendingSet) -> Option<Job> {
    earliest_deadline(&pending.jobs)
}

/// Rmix choice for a given `x` in `[-1, 0]`: among pending jobs with weight
/// at least `e^x` times the heaviest pending weight, the earliest deadline
/// (ties to the lowest id).
pub fn pick_rmix(pending: &PendingSet, x: f64) -> Option<Job> {
    let heaviest = pending.jobs.iter().map(|j| j.weight).max_by(f64::total_cmp)?;
    let threshold = x.exp() * heaviest;
    pending
        .jobs
        .iter()
        .filter(|j| j.weight >= threshold)
        .copied()
        .min_by(edf_key)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Greedy,
    Pedf,
    Edf,
    DetSwitch,
    BarelyRandom,
    Rmix,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Greedy,
        PolicyKind::Pedf,
        PolicyKind::Edf,
        PolicyKind::DetSwitch,
        PolicyKind::BarelyRandom,
        PolicyKind::Rmix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Pedf => "pedf",
            PolicyKind::Edf => "edf",
            PolicyKind::DetSwitch => "detswitch",
            PolicyKind::BarelyRandom => "barely",
            PolicyKind::Rmix => "rmix",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, PolicyKind::BarelyRandom | PolicyKind::Rmix)
    }

    /// Instantiates the policy; `alpha` and `seed` are ignored by kinds that
    /// do not use them.
    pub fn with(self, alpha: f64, seed: u64) -> Policy {
        match self {
            PolicyKind::Greedy => Policy::Greedy,
            PolicyKind::Pedf => Policy::Pedf,
            PolicyKind::Edf => Policy::Edf,
            PolicyKind::DetSwitch => Policy::DetSwitch { alpha },
            PolicyKind::BarelyRandom => Policy::BarelyRandom { alpha, seed },
            PolicyKind::Rmix => Policy::Rmix { seed },
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown policy '{0}' (expected greedy | pedf | edf | detswitch | barely | rmix)")]
pub struct UnknownPolicy(pub String);

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownPolicy(s.to_owned()))
    }
}

/// An online policy together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Policy {
    Greedy,
    Pedf,
    Edf,
    /// PEDF when `alpha <= 1 + sqrt(2)`, Greedy otherwise.
    DetSwitch { alpha: f64 },
    /// One coin at slot 0: Greedy with probability `p(alpha)`, else PEDF.
    BarelyRandom { alpha: f64, seed: u64 },
    /// Fresh `x` uniform in `[-1, 0]` at every slot with pending jobs.
    Rmix { seed: u64 },
}

impl Policy {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Greedy => PolicyKind::Greedy,
            Policy::Pedf => PolicyKind::Pedf,
            Policy::Edf => PolicyKind::Edf,
            Policy::DetSwitch { .. } => PolicyKind::DetSwitch,
            Policy::BarelyRandom { .. } => PolicyKind::BarelyRandom,
            Policy::Rmix { .. } => PolicyKind::Rmix,
        }
    }

    /// Same policy with its seed replaced; deterministic policies are unchanged.
    pub fn with_seed(self, seed: u64) -> Policy {
        match self {
            Policy::BarelyRandom { alpha, .. } => Policy::BarelyRandom { alpha, seed },
            Policy::Rmix { .. } => Policy::Rmix { seed },
            other => other,
        }
    }
}

/// Deterministic policy selected by the alpha switch.
pub fn det_switch_choice(alpha: f64) -> PolicyKind {
    if alpha <= ALPHA_STAR {
        PolicyKind::Pedf
    } else {
        PolicyKind::Greedy
    }
}

/// Branch taken by Barely-Random for `seed`: the first unit real of the
/// stream is compared against `p(alpha)`.
pub fn barely_random_branch(alpha: f64, seed: u64) -> Result<PolicyKind, SchedulingError> {
    let p = analysis::mix_p(alpha).map_err(|_| SchedulingError::InvalidAlpha(alpha))?;
    let mut rng = SplitMix64::new(seed);
    Ok(if rng.next_f64() < p {
        PolicyKind::Greedy
    } else {
        PolicyKind::Pedf
    })
}

fn require_two_valued(inst: &Instance, alpha: f64) -> Result<(), SchedulingError> {
    model::check_alpha(alpha).map_err(|_| SchedulingError::InvalidAlpha(alpha))?;
    match inst.jobs.iter().find(|j| j.weight != 1.0 && j.weight != alpha) {
        Some(j) => Err(SchedulingError::NotTwoValued {
            alpha,
            id: j.id,
            weight: j.weight,
        }),
        None => Ok(()),
    }
}

/// Runs slots `0..T` and lets `pick` choose among the pending jobs.
/// `pick` is only called on nonempty pending sets.
fn simulate(inst: &Instance, mut pick: impl FnMut(&PendingSet) -> Option<Job>) -> Schedule {
    let mut arrivals: Vec<Job> = inst.jobs.clone();
    arrivals.sort_by_key(|j| j.release);
    let mut next = 0;
    let mut pending = PendingSet {
        slot: 0,
        jobs: Vec::new(),
    };
    let mut assignment = BTreeMap::new();
    for t in 0..inst.horizon() {
        pending.slot = t;
        pending.jobs.retain(|j| j.deadline > t);
        while next < arrivals.len() && arrivals[next].release <= t {
            pending.jobs.push(arrivals[next]);
            next += 1;
        }
        if pending.jobs.is_empty() {
            continue;
        }
        if let Some(job) = pick(&pending) {
            assignment.insert(t, job.id);
            pending.jobs.retain(|j| j.id != job.id);
        }
    }
    Schedule::from_assignment(inst, assignment).expect("engine only runs pending jobs")
}

fn run_kind(inst: &Instance, kind: PolicyKind) -> Schedule {
    match kind {
        PolicyKind::Greedy => simulate(inst, |p| pick_greedy(&build_provisional(p))),
        PolicyKind::Pedf => simulate(inst, |p| pick_pedf(&build_provisional(p))),
        PolicyKind::Edf => simulate(inst, pick_edf),
        _ => unreachable!("only deterministic base policies"),
    }
}

/// Simulates `policy` on `inst` and returns the resulting schedule.
pub fn run_policy(inst: &Instance, policy: &Policy) -> Result<Schedule, SchedulingError> {
    let violations = model::validate_instance(inst);
    if !violations.is_empty() {
        return Err(SchedulingError::InvalidInstance(violations));
    }
    Ok(match *policy {
        Policy::Greedy => run_kind(inst, PolicyKind::Greedy),
        Policy::Pedf => run_kind(inst, PolicyKind::Pedf),
        Policy::Edf => run_kind(inst, PolicyKind::Edf),
        Policy::DetSwitch { alpha } => {
            model::check_alpha(alpha).map_err(|_| SchedulingError::InvalidAlpha(alpha))?;
            run_kind(inst, det_switch_choice(alpha))
        }
        Policy::BarelyRandom { alpha, seed } => {
            require_two_valued(inst, alpha)?;
            run_kind(inst, barely_random_branch(alpha, seed)?)
        }
        Policy::Rmix { seed } => {
            let mut rng = SplitMix64::new(seed);
            simulate(inst, |p| pick_rmix(p, rng.next_f64() - 1.0))
        }
    })
}

/// Exact expected profit of Barely-Random: `p * Greedy + (1 - p) * PEDF`.
pub fn barely_random_expected_profit(inst: &Instance, alpha: f64) -> Result<f64, SchedulingError> {
    require_two_valued(inst, alpha)?;
    let p = analysis::mix_p(alpha).map_err(|_| SchedulingError::InvalidAlpha(alpha))?;
    let greedy = run_policy(inst, &Policy::Greedy)?.profit();
    let pedf = run_policy(inst, &Policy::Pedf)?.profit();
    Ok(p * greedy + (1.0 - p) * pedf)
}
