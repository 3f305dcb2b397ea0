use kneeae_core::classify::{cart_grow, cart_train, lda_train, svm_train, svm_train_detailed, Kernel, SvmParams};
use kneeae_core::{Label, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(rng: &mut ChaCha8Rng, rows: usize, dim: usize, shift: f64) -> (Matrix, Vec<Label>) {
    let mut y: Vec<Label> = (0..rows).map(|_| if rng.random_bool(0.5) { Label::Abnormal } else { Label::Normal }).collect();
    y[0] = Label::Normal;
    y[1] = Label::Abnormal;
    let data = y
        .iter()
        .flat_map(|l| {
            let c = if l.is_positive() { shift } else { -shift };
            (0..dim).map(|_| c + rng.random_range(-1.0..1.0)).collect::<Vec<_>>()
        })
        .collect();
    (Matrix::from_vec(rows, dim, data).unwrap(), y)
}

fn q_matrix(x: &Matrix, y: &[Label], kernel: Kernel) -> Vec<Vec<f64>> {
    let n = x.rows();
    (0..n)
        .map(|i| (0..n).map(|j| y[i].sign() * y[j].sign() * kernel.eval(x.row(i), x.row(j))).collect())
        .collect()
}

fn dual_objective(q: &[Vec<f64>], a: &[f64]) -> f64 {
    let quad: f64 = q.iter().zip(a).map(|(row, ai)| ai * row.iter().zip(a).map(|(qij, aj)| qij * aj).sum::<f64>()).sum();
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect() };
    let resid = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // y'a(lam) is non-increasing in lam
        if resid(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient on the dual.
fn qp_oracle(q: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let n = q.len();
    let lip: f64 = q.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-12);
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..n).map(|i| q[i].iter().zip(&z).map(|(qij, zj)| qij * zj).sum::<f64>() - 1.0).collect();
        let step: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - gi / lip).collect();
        let next = project(&step, y, c);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next.iter().zip(&a).map(|(n, o)| n + (t - 1.0) / t_next * (n - o)).collect();
        a = next;
        t = t_next;
    }
    a
}

#[test]
fn smo_matches_qp_oracle_and_satisfies_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..50 {
        let rows = rng.random_range(4..=30);
        let dim = rng.random_range(1..=4);
        let shift = rng.random_range(0.0..1.5);
        let (x, y) = problem(&mut rng, rows, dim, shift);
        let kernel = if trial % 2 == 0 { Kernel::Linear } else { Kernel::Gaussian { gamma: 1.0 } };
        let c = [0.1, 1.0, 10.0][trial % 3];
        let params = SvmParams { kernel, c, ..SvmParams::default() };
        let fit = svm_train_detailed(&x, &y, &params).unwrap();
        assert!(fit.converged, "trial {trial}");

        let q = q_matrix(&x, &y, kernel);
        let ys: Vec<f64> = y.iter().map(|l| l.sign()).collect();
        let oracle = qp_oracle(&q, &ys, c);
        let want = dual_objective(&q, &oracle);
        let got = dual_objective(&q, &fit.alpha);
        assert!((got - fit.objective).abs() <= 1e-9 * (1.0 + got.abs()), "trial {trial}: reported objective");
        assert!(got >= want - 1e-6 && (got - want).abs() <= 1e-6, "trial {trial}: smo {got} oracle {want}");

        let eq: f64 = fit.alpha.iter().zip(&ys).map(|(a, y)| a * y).sum();
        assert!(eq.abs() <= 1e-9, "trial {trial}: y'a = {eq}");
        for (t, (&a, &yt)) in fit.alpha.iter().zip(&ys).enumerate() {
            assert!((0.0..=c).contains(&a));
            let margin = yt * fit.model.decision(x.row(t)).unwrap();
            let violation = if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            assert!(violation <= 1e-3, "trial {trial} row {t}: KKT violation {violation}");
        }
    }
}

#[test]
fn linear_svm_separates_separable_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x, y) = problem(&mut rng, 40, 3, 3.0);
    let m = svm_train(&x, &y, &SvmParams::linear()).unwrap();
    for (row, l) in x.iter_rows().zip(&y) {
        assert_eq!(m.predict(row).unwrap(), *l);
    }
}

#[test]
fn cart_fits_an_axis_aligned_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let y: Vec<Label> = rows.iter().map(|r| if r[1] > 0.2 { Label::Abnormal } else { Label::Normal }).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let m = cart_train(&x, &y, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let correct = x.iter_rows().zip(&y).filter(|(r, l)| m.predict(r).unwrap() == **l).count();
    assert!(correct >= 57, "{correct}/60");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lda_score_is_affine(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem(&mut rng, 25, dim, 0.5);
        let m = lda_train(&x, &y).unwrap();
        let (a, b) = (x.row(0), x.row(1));
        let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
        let (sa, sb, sm) = (m.score(a).unwrap(), m.score(b).unwrap(), m.score(&mid).unwrap());
        prop_assert!((sm - 0.5 * (sa + sb)).abs() <= 1e-9 * (1.0 + sa.abs() + sb.abs()));
    }

    #[test]
    fn grown_tree_fits_distinct_rows(seed in any::<u64>(), rows in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem(&mut rng, rows, 3, 0.2);
        let m = cart_grow(&x, &y).unwrap();
        for (row, l) in x.iter_rows().zip(&y) {
            prop_assert_eq!(m.predict(row).unwrap(), *l);
        }
    }

    #[test]
    fn cart_is_deterministic_given_a_seed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem(&mut rng, 40, 2, 0.3);
        let a = cart_train(&x, &y, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = cart_train(&x, &y, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn svm_ignores_row_order(seed in any::<u64>(), rows in 6usize..30, gaussian in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem(&mut rng, rows, 2, 0.5);
        let params = if gaussian { SvmParams::gaussian(1.0) } else { SvmParams::linear() };
        let mut perm: Vec<usize> = (0..rows).collect();
        for i in (1..rows).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let xp = x.select_rows(&perm);
        let yp: Vec<Label> = perm.iter().map(|&i| y[i]).collect();
        let a = svm_train(&x, &y, &params).unwrap();
        let b = svm_train(&xp, &yp, &params).unwrap();
        for row in x.iter_rows() {
            prop_assert_eq!(a.decision(row).unwrap(), b.decision(row).unwrap());
        }
    }

    #[test]
    fn lda_is_invariant_to_shift_and_uniform_scale(seed in any::<u64>(), s in 0.1f64..10.0, b in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem(&mut rng, 30, 3, 0.7);
        let moved = Matrix::from_vec(30, 3, x.as_slice().iter().map(|v| s * v + b).collect()).unwrap();
        let m1 = lda_train(&x, &y).unwrap();
        let m2 = lda_train(&moved, &y).unwrap();
        for (r1, r2) in x.iter_rows().zip(moved.iter_rows()) {
            let (p, q) = (m1.score(r1).unwrap(), m2.score(r2).unwrap());
            prop_assert!((p - q).abs() <= 1e-8 * (1.0 + p.abs()), "{} vs {}", p, q);
        }
    }
}
