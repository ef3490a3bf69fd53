use proptest::prelude::*;
use setyoung::paths::{holder_seminorm, sample_fbm, time_augmented, uniform_grid, FbmGenerator};
use setyoung::SampledPath;

/// Brute-force O(m²) seminorm over all node pairs.
fn brute_seminorm(p: &SampledPath, alpha: f64) -> f64 {
    let g = p.grid();
    let mut best: f64 = 0.0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let d: f64 = p.value(j).iter().zip(p.value(i)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            best = best.max(d / (g[j] - g[i]).powf(alpha));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seminorm_matches_brute_force(vals in prop::collection::vec(-1.0..1.0f64, 2..80), alpha in 0.05..1.0f64) {
        let m = vals.len() - 1;
        let p = SampledPath::new(uniform_grid(1.0, m), vals.iter().map(|v| vec![*v]).collect()).unwrap();
        let got = holder_seminorm(&p, alpha).unwrap().seminorm;
        prop_assert!((got - brute_seminorm(&p, alpha)).abs() <= 1e-12 * got.max(1.0));
    }

    #[test]
    fn seminorm_is_homogeneous(vals in prop::collection::vec(-1.0..1.0f64, 2..40), c in -5.0..5.0f64) {
        let m = vals.len() - 1;
        let p = SampledPath::new(uniform_grid(1.0, m), vals.iter().map(|v| vec![*v]).collect()).unwrap();
        let q = p.map(|_, x| vec![c * x[0]]).unwrap();
        let a = holder_seminorm(&p, 0.5).unwrap().seminorm;
        let b = holder_seminorm(&q, 0.5).unwrap().seminorm;
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn fbm_is_reproducible(seed in any::<u64>(), h in 0.55..0.95f64) {
        let a = sample_fbm(h, 1.0, 64, 2, seed).unwrap();
        let b = sample_fbm(h, 1.0, 64, 2, seed).unwrap();
        prop_assert_eq!(a.flat_values(), b.flat_values());
        prop_assert_eq!(a.value(0), &[0.0, 0.0][..]);
    }
}

#[test]
fn fbm_methods_agree_in_law_on_variance() {
    // Cholesky below the threshold, circulant embedding above it.
    for steps in [256, 2048] {
        let gen = FbmGenerator::new(0.7, 1.0, steps).unwrap();
        let n = 4000;
        let var = (0..n)
            .map(|s| gen.sample_coordinate(s, 0)[steps].powi(2))
            .sum::<f64>()
            / n as f64;
        // Var B(1) = 1; the estimator's relative standard error is √(2/n)
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "steps {steps}: {var}");
    }
}

#[test]
fn time_augmentation_prepends_the_clock() {
    let b = sample_fbm(0.8, 2.0, 16, 1, 3).unwrap();
    let w = time_augmented(&b);
    assert_eq!(w.dim(), 2);
    for i in 0..w.len() {
        assert_eq!(w.value(i)[0], b.grid()[i]);
        assert_eq!(w.value(i)[1], b.value(i)[0]);
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let p = sample_fbm(0.75, 1.0, 32, 2, 11).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let q = SampledPath::read_csv(buf.as_slice()).unwrap();
    assert_eq!(p, q);
}
