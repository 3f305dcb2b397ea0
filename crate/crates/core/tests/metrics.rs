use kneeae_core::metrics::{f05, majority_error_rate, mcc, roc_auc, s_score, ConfusionMatrix};
use kneeae_core::Label;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pairwise Mann-Whitney statistic with ties counted as one half.
fn mann_whitney(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (sp, lp) in scores.iter().zip(labels) {
        if !lp.is_positive() {
            continue;
        }
        for (sn, ln) in scores.iter().zip(labels) {
            if ln.is_positive() {
                continue;
            }
            pairs += 1.0;
            if sp > sn {
                wins += 1.0;
            } else if sp == sn {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

#[test]
fn auc_equals_mann_whitney_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..500 {
        let n = rng.random_range(2..120);
        let mut labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.5) { Label::Abnormal } else { Label::Normal }).collect();
        labels[0] = Label::Normal;
        labels[1] = Label::Abnormal;
        // coarse grid so ties are common
        let levels = rng.random_range(2..30);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
        let got = roc_auc(&scores, &labels).unwrap().auc;
        let want = mann_whitney(&scores, &labels);
        assert!((got - want).abs() <= 1e-12, "trial {trial}: {got} vs {want}");
    }
}

#[test]
fn majority_predictor_on_the_clinical_split() {
    let labels: Vec<Label> = std::iter::repeat_n(Label::Normal, 249).chain(std::iter::repeat_n(Label::Abnormal, 297)).collect();
    let er = majority_error_rate(&labels).unwrap();
    assert!((er - 0.456).abs() <= 5e-4, "{er}");
}

#[test]
fn s_score_reproduces_reported_rows() {
    assert!((s_score(0.705, 0.147, 0.853) - 0.804).abs() <= 1e-3);
    assert!((s_score(0.501, 0.249, 0.723) - 0.658).abs() <= 1e-3);
}

proptest! {
    #[test]
    fn auc_flips_under_negation(scores in prop::collection::vec(-5.0f64..5.0, 4..60), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<Label> = scores.iter().map(|_| if rng.random_bool(0.5) { Label::Abnormal } else { Label::Normal }).collect();
        labels[0] = Label::Normal;
        labels[1] = Label::Abnormal;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_auc(&scores, &labels).unwrap().auc;
        let b = roc_auc(&neg, &labels).unwrap().auc;
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn auc_ignores_increasing_transforms(scores in prop::collection::vec(-3.0f64..3.0, 4..60), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<Label> = scores.iter().map(|_| if rng.random_bool(0.5) { Label::Abnormal } else { Label::Normal }).collect();
        labels[0] = Label::Normal;
        labels[1] = Label::Abnormal;
        let warped: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + s.powi(3)).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap().auc, roc_auc(&warped, &labels).unwrap().auc);
    }

    #[test]
    fn confusion_metrics_stay_in_range(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
        prop_assume!(tp + fp + tn + fn_ > 0);
        let cm = ConfusionMatrix { tp, fp, tn, fn_ };
        let m = mcc(&cm).unwrap();
        let f = f05(&cm).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m));
        prop_assert!((0.0..=1.0).contains(&f));
    }
}
