//! Fixed workloads shared by the benchmarks.

use twoval_core::model::{self, GenParams, Instance};

/// `count` random instances with `jobs` jobs each over a horizon of `horizon` slots.
pub fn workload(alpha: f64, count: u64, horizon: u32, jobs: u32) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            model::random_instance(&GenParams {
                horizon,
                job_count: jobs,
                heavy_probability: 0.5,
                max_span: (horizon / 4).max(1),
                seed,
                alpha,
            })
            .expect("valid workload parameters")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_deterministic() {
        let a = workload(2.0, 3, 40, 60);
        assert_eq!(a, workload(2.0, 3, 40, 60));
        assert!(a.iter().all(|i| i.len() == 60 && i.horizon() <= 40));
    }
}
