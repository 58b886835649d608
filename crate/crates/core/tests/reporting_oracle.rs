mod common;

use common::brute_force_box;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use qzo_core::harness::{Fingerprints, IsingTask, RunConfig, RunRecord, RunStatus, TaskConfig};
use qzo_core::optimizers::{Algorithm, HyperParams};
use qzo_core::reporting::{box_stats, convergence_from_traces, read_records, write_records};
use qzo_core::rng::MasterKey;

#[test]
fn box_stats_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let normal = Normal::new(0.0, 1.0).unwrap();
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let mut v: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        for x in v.iter_mut() {
            if rng.random_bool(0.05) {
                *x *= 20.0;
            }
        }
        assert_eq!(box_stats(&v).unwrap(), brute_force_box(&v));
    }
}

#[test]
fn convergence_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let traces: Vec<Vec<f64>> = (0..17)
        .map(|_| (0..40).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let refs: Vec<&[f64]> = traces.iter().map(Vec::as_slice).collect();
    let stats = convergence_from_traces(&refs).unwrap();
    for (s, st) in stats.steps.iter().enumerate() {
        let col: Vec<f64> = traces.iter().map(|t| t[s]).collect();
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let ss: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum();
        let half = 1.96 * (ss / (n - 1.0)).sqrt() / n.sqrt();
        assert!((st.mean - mean).abs() < 1e-12);
        assert!((st.ci_half - half).abs() < 1e-12);
    }
}

#[test]
fn confidence_band_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mu = 3.0;
    let normal = Normal::new(mu, 1.0).unwrap();
    let reps = 1000;
    let covered = (0..reps)
        .filter(|_| {
            let finals: Vec<f64> = (0..100).map(|_| normal.sample(&mut rng)).collect();
            let traces: Vec<&[f64]> = finals.iter().map(std::slice::from_ref).collect();
            let s = convergence_from_traces(&traces).unwrap().steps[0];
            (s.mean - mu).abs() <= s.ci_half
        })
        .count();
    let rate = covered as f64 / reps as f64;
    assert!((0.93..=0.97).contains(&rate), "coverage {rate}");
}

fn record(trace: Vec<f64>, key: u64) -> RunRecord {
    RunRecord {
        config: RunConfig {
            task: TaskConfig::Ising1d(IsingTask::default()),
            optimizer: HyperParams::defaults(Algorithm::AdamSpsa),
            master_key: MasterKey(key),
            n_steps: trace.len().saturating_sub(1),
        },
        status: RunStatus::Ok,
        final_loss: trace.last().copied(),
        trace,
        init_loss_queries: 0,
        loss_queries: vec![2; 3],
        fidelity_queries: vec![0; 3],
        blocked_steps: vec![2],
        fingerprints: Fingerprints::default(),
        wall_time_secs: 0.0,
    }
}

proptest! {
    #[test]
    fn jsonl_round_trip_is_bitwise(
        traces in prop::collection::vec(
            prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20),
            1..5,
        ),
        key in any::<u64>(),
    ) {
        let records: Vec<RunRecord> = traces.into_iter().map(|t| record(t, key)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&records, &path).unwrap();
        let back = read_records(&path).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            let bits = |r: &RunRecord| r.trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(a), bits(b));
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn box_invariants(values in prop::collection::vec(-1e6..1e6f64, 1..80)) {
        let b = box_stats(&values).unwrap();
        prop_assert!(b.q1 <= b.median && b.median <= b.q3);
        let iqr = b.q3 - b.q1;
        prop_assert!(b.whisker_low >= b.q1 - 1.5 * iqr && b.whisker_high <= b.q3 + 1.5 * iqr);
        prop_assert!(values.contains(&b.whisker_low) && values.contains(&b.whisker_high));
        for v in &values {
            let outside = *v < b.whisker_low || *v > b.whisker_high;
            prop_assert_eq!(outside, b.outliers.contains(v));
        }
    }
}
