//! Exact offline optimum.
//!
//! Jobs are matched to slots; the sets of jobs that admit such a matching
//! form a transversal matroid, so scanning jobs by descending weight and
//! keeping each one for which an augmenting path exists yields a
//! maximum-weight schedule. A brute-force enumerator serves as the oracle
//! for small instances.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{self, Instance, Job, JobId, Schedule, Slot, Violation};

/// Largest instance (jobs and horizon) accepted by [`brute_force_optimal`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum OfflineError {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("instance too large for brute force: {jobs} jobs, horizon {horizon} (limit {BRUTE_FORCE_LIMIT} each)")]
    TooLarge { jobs: usize, horizon: Slot },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptMethod {
    MatroidGreedy,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub schedule: Schedule,
    pub value: f64,
    pub method: OptMethod,
}

fn check(inst: &Instance) -> Result<(), OfflineError> {
    let violations = model::validate_instance(inst);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(OfflineError::InvalidInstance(violations))
    }
}

/// Kuhn-style matcher of jobs to slots.
struct SlotMatcher<'a> {
    jobs: &'a [Job],
    owner: Vec<Option<usize>>,
    visited: Vec<bool>,
}

impl<'a> SlotMatcher<'a> {
    fn new(jobs: &'a [Job], horizon: Slot) -> Self {
        Self {
            jobs,
            owner: vec![None; horizon as usize],
            visited: vec![false; horizon as usize],
        }
    }

    /// Tries to add job `idx` to the matching, reassigning earlier jobs
    /// along an augmenting path if needed.
    fn insert(&mut self, idx: usize) -> bool {
        self.visited.iter_mut().for_each(|v| *v = false);
        self.augment(idx)
    }

    fn augment(&mut self, idx: usize) -> bool {
        let job = self.jobs[idx];
        for slot in job.release as usize..job.deadline as usize {
            if self.visited[slot] {
                continue;
            }
            self.visited[slot] = true;
            let free = match self.owner[slot] {
                None => true,
                Some(other) => self.augment(other),
            };
            if free {
                self.owner[slot] = Some(idx);
                return true;
            }
        }
        false
    }

    fn assignment(&self) -> BTreeMap<Slot, JobId> {
        self.owner
            .iter()
            .enumerate()
            .filter_map(|(slot, o)| o.map(|i| (slot as Slot, self.jobs[i].id)))
            .collect()
    }
}

fn greedy_matching(jobs: &[Job], horizon: Slot) -> BTreeMap<Slot, JobId> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (&jobs[a], &jobs[b]);
        b.weight
            .total_cmp(&a.weight)
            .then(a.deadline.cmp(&b.deadline))
            .then(a.id.cmp(&b.id))
    });
    let mut matcher = SlotMatcher::new(jobs, horizon);
    for idx in order {
        matcher.insert(idx);
    }
    matcher.assignment()
}

/// Maximum-weight feasible schedule of `inst`.
pub fn optimal_schedule(inst: &Instance) -> Result<OptResult, OfflineError> {
    check(inst)?;
    let assignment = greedy_matching(&inst.jobs, inst.horizon());
    let schedule = Schedule::from_assignment(inst, assignment).expect("matching respects windows");
    Ok(OptResult {
        value: schedule.profit(),
        schedule,
        method: OptMethod::MatroidGreedy,
    })
}

/// Largest number of jobs of `jobs` that can be run, regardless of weight.
pub fn max_schedulable(jobs: &[Job]) -> usize {
    let horizon = jobs.iter().map(|j| j.deadline).max().unwrap_or(0);
    let mut matcher = SlotMatcher::new(jobs, horizon);
    (0..jobs.len()).filter(|&i| matcher.insert(i)).count()
}

/// Hall's condition for interval windows: every slot range `[a, b)` must
/// hold at most `b - a` jobs whose whole window lies inside it.
fn hall_feasible(jobs: &[&Job], horizon: Slot) -> bool {
    (0..horizon).all(|a| {
        (a + 1..=horizon).all(|b| {
            let inside = jobs
                .iter()
                .filter(|j| j.release >= a && j.deadline <= b)
                .count();
            inside as u64 <= u64::from(b - a)
        })
    })
}

/// Runs a feasible job set by release-aware EDF.
fn edf_assignment(jobs: &[&Job], horizon: Slot) -> BTreeMap<Slot, JobId> {
    let mut left: Vec<&Job> = jobs.to_vec();
    let mut out = BTreeMap::new();
    for t in 0..horizon {
        let next = left
            .iter()
            .enumerate()
            .filter(|(_, j)| j.runnable_at(t))
            .min_by_key(|(_, j)| (j.deadline, j.id))
            .map(|(i, _)| i);
        if let Some(i) = next {
            out.insert(t, left.swap_remove(i).id);
        }
    }
    out
}

/// Exhaustive optimum over all job subsets; limited to
/// [`BRUTE_FORCE_LIMIT`] jobs and horizon.
pub fn brute_force_optimal(inst: &Instance) -> Result<OptResult, OfflineError> {
    check(inst)?;
    let horizon = inst.horizon();
    if inst.len() > BRUTE_FORCE_LIMIT || horizon as usize > BRUTE_FORCE_LIMIT {
        return Err(OfflineError::TooLarge {
            jobs: inst.len(),
            horizon,
        });
    }
    let n = inst.len();
    let mut best: (f64, Vec<&Job>) = (0.0, Vec::new());
    for mask in 1u32..(1 << n) {
        let subset: Vec<&Job> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &inst.jobs[i])
            .collect();
        let value = model::canonical_sum(subset.iter().map(|j| j.weight));
        if value > best.0 && hall_feasible(&subset, horizon) {
            best = (value, subset);
        }
    }
    let schedule = Schedule::from_assignment(inst, edf_assignment(&best.1, horizon))
        .expect("EDF runs a Hall-feasible set inside windows");
    assert_eq!(
        schedule.len(),
        best.1.len(),
        "EDF must run every job of a feasible set"
    );
    Ok(OptResult {
        value: best.0,
        schedule,
        method: OptMethod::BruteForce,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sigma_instances;
    use crate::rng::SplitMix64;

    #[test]
    fn figure_one_optima() {
        let (s1, s2) = sigma_instances(2.0).unwrap();
        for f in [optimal_schedule, brute_force_optimal] {
            assert_eq!(f(&s1).unwrap().value, 3.0);
            assert_eq!(f(&s2).unwrap().value, 4.0);
        }
        let opt1 = optimal_schedule(&s1).unwrap();
        assert_eq!(opt1.schedule.job_at(0), Some(JobId(0)));
        assert_eq!(opt1.schedule.job_at(1), Some(JobId(1)));
        assert_eq!(opt1.method, OptMethod::MatroidGreedy);
    }

    #[test]
    fn small_cases() {
        let empty = Instance::two_valued(2.0, vec![]);
        assert_eq!(optimal_schedule(&empty).unwrap().value, 0.0);
        assert_eq!(brute_force_optimal(&empty).unwrap().value, 0.0);

        let single = Instance::two_valued(2.0, vec![Job::new(0, 0, 1, 1.0)]);
        assert_eq!(brute_force_optimal(&single).unwrap().value, 1.0);

        let clash = Instance::two_valued(
            2.0,
            vec![Job::new(0, 0, 1, 1.0), Job::new(1, 0, 1, 2.0)],
        );
        let opt = brute_force_optimal(&clash).unwrap();
        assert_eq!(opt.value, 2.0);
        assert_eq!(opt.schedule.job_at(0), Some(JobId(1)));
        assert_eq!(optimal_schedule(&clash).unwrap().value, 2.0);
    }

    #[test]
    fn augmenting_path_moves_earlier_choice() {
        // Heavy job a (window [0,2)) first grabs slot 0; heavy b (window
        // [0,1)) needs slot 0, so a must move to slot 1.
        let inst = Instance::two_valued(
            3.0,
            vec![Job::new(0, 0, 2, 3.0), Job::new(1, 0, 1, 3.0), Job::new(2, 1, 2, 1.0)],
        );
        let opt = optimal_schedule(&inst).unwrap();
        assert_eq!(opt.value, 6.0);
        assert_eq!(opt.schedule.job_at(0), Some(JobId(1)));
        assert_eq!(opt.schedule.job_at(1), Some(JobId(0)));
    }

    #[test]
    fn guard_and_invalid_input() {
        let big = Instance::new(None, (0..13).map(|i| Job::new(i, 0, 13, 1.0)).collect());
        assert_eq!(
            brute_force_optimal(&big),
            Err(OfflineError::TooLarge {
                jobs: 13,
                horizon: 13
            })
        );
        assert_eq!(optimal_schedule(&big).unwrap().value, 13.0);
        let bad = Instance::new(None, vec![Job::new(0, 3, 3, 1.0)]);
        assert!(matches!(
            optimal_schedule(&bad),
            Err(OfflineError::InvalidInstance(_))
        ));
    }

    #[test]
    fn matches_brute_force_on_general_weights() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..2000 {
            let horizon = 1 + rng.below(6) as Slot;
            let n = rng.below(8) as u32;
            let jobs = (0..n)
                .map(|id| {
                    let r = rng.below(u64::from(horizon)) as Slot;
                    let d = r + 1 + rng.below(u64::from(horizon - r)) as Slot;
                    Job::new(id, r, d, [0.5, 1.0, 1.75, 3.0][rng.below(4) as usize])
                })
                .collect();
            let inst = Instance::new(None, jobs);
            assert_eq!(
                optimal_schedule(&inst).unwrap().value,
                brute_force_optimal(&inst).unwrap().value,
                "{inst:?}"
            );
        }
    }

    #[test]
    fn max_schedulable_counts_jobs() {
        let (s1, s2) = sigma_instances(5.0).unwrap();
        assert_eq!(max_schedulable(&s1.jobs), 2);
        assert_eq!(max_schedulable(&s2.jobs), 2);
        assert_eq!(max_schedulable(&[]), 0);
    }
}
