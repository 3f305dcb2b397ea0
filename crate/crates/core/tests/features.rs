use kneeae_core::features::{delta, stats_of, DELTA_SPAN, STATS_PER_VECTOR};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ordinary least-squares slope of `y` against `0..y.len()`, via centred
/// normal equations.
fn ls_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xbar;
        sxy += dx * (v - ybar);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[test]
fn delta_equals_nine_point_least_squares_slope() {
    assert_eq!(DELTA_SPAN, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let len = rng.random_range(9..200);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let d = delta(&x, DELTA_SPAN);
        for t in DELTA_SPAN..len - DELTA_SPAN {
            let want = ls_slope(&x[t - DELTA_SPAN..=t + DELTA_SPAN]);
            assert!((d[t] - want).abs() <= 1e-12, "t={t}: {} vs {want}", d[t]);
        }
    }
}

#[test]
fn delta_of_constant_is_exactly_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let c = rng.random_range(-1e3..1e3);
        let x = vec![c; rng.random_range(1..60)];
        assert!(delta(&x, DELTA_SPAN).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn stats_of_known_sequence() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let s = stats_of(&x, &mut Vec::new());
    assert_eq!(s.len(), STATS_PER_VECTOR);
    assert_eq!(s[0], 3.0);
    assert_eq!(s[2], 2.0);
    assert_eq!(s[3], 0.0);
    assert!((s[1] - 1.7).abs() < 1e-12);
    assert_eq!((s[4], s[5]), (5.0, 1.0));
    assert_eq!(&s[6..], &[1.4, 2.0, 3.0, 4.0, 4.6]);
}

proptest! {
    #[test]
    fn delta_of_a_line_is_its_slope(a in -10.0f64..10.0, b in -10.0f64..10.0, len in 9usize..80) {
        let x: Vec<f64> = (0..len).map(|t| a + b * t as f64).collect();
        let d = delta(&x, DELTA_SPAN);
        for v in &d[DELTA_SPAN..len - DELTA_SPAN] {
            prop_assert!((v - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn stats_are_order_free(mut x in prop::collection::vec(-100.0f64..100.0, 2..50), seed in any::<u64>()) {
        let before = stats_of(&x, &mut Vec::new());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..x.len()).rev() {
            x.swap(i, rng.random_range(0..=i));
        }
        let after = stats_of(&x, &mut Vec::new());
        for (p, q) in before.iter().zip(&after) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()));
        }
        prop_assert!(before[5] <= before[6] && before[6] <= before[8] && before[8] <= before[10] && before[10] <= before[4]);
    }
}
