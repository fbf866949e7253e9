use qrdm_core::dm::{dm_select, lemma1_certificate};
use qrdm_core::matrix::column_norms;
use qrdm_core::oracle::jacobi_svd;
use qrdm_core::rrqr::{factorize, Algorithm, StopCriterion};
use qrdm_core::{DenseMatrix, DmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn scaled_gaussian(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let scales: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    DenseMatrix::from_fn(m, n, |_, j| scales[j] * rng.sample::<f64, _>(StandardNormal))
}

#[test]
fn delta_max_blocks_satisfy_certified_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut blocks = 0;
    for _ in 0..50 {
        let (m, n) = (rng.random_range(20..80), rng.random_range(2..30));
        let a = scaled_gaussian(m, n, &mut rng);
        let tau = rng.random_range(0.2..1.0);
        let params = DmParams::with_delta_max(tau, 64).unwrap();
        let sel = dm_select(a.view(), &column_norms(a.view()), &params, 0.0).unwrap();
        let c = a.select_columns(&sel.indices);
        let cert = lemma1_certificate(c.view(), tau).unwrap();
        assert!(cert.holds, "hypotheses fail: gamma {} tau {tau}", cert.gamma);
        assert!((cert.gamma - sel.gamma).abs() <= 1e-14);
        let smin = jacobi_svd(&c).unwrap().sigma_min();
        assert!(smin >= cert.bound * (1.0 - 1e-12), "{smin} < {}", cert.bound);
        blocks += usize::from(sel.indices.len() > 1);
    }
    assert!(blocks > 10, "only {blocks} multi-column blocks");
}

#[test]
fn drivers_agree_on_well_separated_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let left = scaled_gaussian(90, 25, &mut rng);
    let right = scaled_gaussian(25, 70, &mut rng);
    let a = left.matmul(&right);
    for algo in [Algorithm::Qrp, Algorithm::Qrdm, Algorithm::Qrdm2] {
        let res = factorize(a.clone(), algo, &DmParams::default(), StopCriterion::EpsTimesN).unwrap();
        assert_eq!(res.rank, 25, "{algo:?}");
        assert!(res.stopped);
        assert!(res.perm.is_valid());
    }
}

#[test]
fn blocked_drivers_take_fewer_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let a = scaled_gaussian(200, 150, &mut rng);
    let steps = |algo| {
        factorize(a.clone(), algo, &DmParams::default(), StopCriterion::EpsTimesN)
            .unwrap()
            .step_log
            .len()
    };
    let qrdm2 = steps(Algorithm::Qrdm2);
    assert!(qrdm2 * 4 < steps(Algorithm::Qrp), "qrdm2 took {qrdm2} steps");
}
