use qrdm_harness::mm::read_matrix_market;
use qrdm_harness::suite::{fixture_dir, suite};

#[test]
fn committed_fixtures_regenerate_from_seeds() {
    let dir = fixture_dir();
    for f in suite() {
        let on_disk = read_matrix_market(dir.join(f.file_name())).unwrap();
        let fresh = f.generate().unwrap();
        assert_eq!(on_disk.shape(), fresh.shape(), "{}", f.id);
        let same = on_disk.data().iter().zip(fresh.data()).all(|(x, y)| x.to_bits() == y.to_bits());
        assert!(same, "{} differs from its generator", f.id);
    }
}

#[test]
fn fixture_spectra_match_the_design() {
    use qrdm_core::oracle::jacobi_svd;
    use qrdm_harness::config::GenSpec;
    use qrdm_harness::gen::gapped_spectrum;

    // the smaller members keep this quick; the rest share the generator
    for f in suite().iter().filter(|f| matches!(f.gen, GenSpec::Random { n, .. } if n <= 64)) {
        let GenSpec::Random { m, n, r, gap } = f.gen else { unreachable!() };
        let cond = (2.0 / (f64::EPSILON * gap)).clamp(1.0, 1e8);
        let want = gapped_spectrum(m.min(n), r, cond, gap);
        let got = jacobi_svd(&f.generate().unwrap()).unwrap();
        assert_eq!(got.numerical_rank, r, "{}", f.id);
        for (g, w) in got.sigmas.iter().zip(&want).take(r) {
            assert!((g - w).abs() <= 1e-12 * w.max(1e-4), "{}: {g} vs {w}", f.id);
        }
    }
}
