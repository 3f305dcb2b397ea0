use std::collections::{BTreeMap, BTreeSet};

use kneeae_core::classify::{self, ClassifierKind};
use kneeae_core::experiment::cv::{group_sizes, repetition_scores, CvPlan, CvProtocol, Standardizer, GROUP_COUNT, RATIO_TEMPLATE};
use kneeae_core::features::RowKey;
use kneeae_core::rng::{derive_seed, stream};
use kneeae_core::{Label, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rows(normal: usize, abnormal: usize, rng: &mut ChaCha8Rng) -> Vec<RowKey> {
    let mut out = Vec::new();
    for (prefix, label, count) in [("N", Label::Normal, normal), ("A", Label::Abnormal, abnormal)] {
        for k in 0..count {
            for index in 0..rng.random_range(8..18) {
                out.push(RowKey { knee_id: format!("{prefix}{k:03}"), index, label });
            }
        }
    }
    out
}

fn features(rows: &[RowKey], rng: &mut ChaCha8Rng) -> Matrix {
    let data = rows
        .iter()
        .flat_map(|r| {
            let shift = if r.label.is_positive() { 0.8 } else { 0.0 };
            [shift + rng.random_range(-1.0..1.0), 10.0 + 3.0 * rng.random_range(-1.0..1.0)]
        })
        .collect();
    Matrix::from_vec(rows.len(), 2, data).unwrap()
}

#[test]
fn folds_respect_knees_and_template() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows = rows(19, 21, &mut rng);
    let plan = CvPlan::new(&rows, CvProtocol { repetitions: 100, seed: 42 }).unwrap();
    let mut distinct = BTreeSet::new();
    for rep in 0..100 {
        let mut fold_of_knee: BTreeMap<&str, u8> = BTreeMap::new();
        for (r, row) in rows.iter().enumerate() {
            let f = plan.fold_of_row[rep][r];
            assert_eq!(*fold_of_knee.entry(&row.knee_id).or_insert(f), f, "knee {} straddles folds", row.knee_id);
        }
        let mut counts = [(0usize, 0usize); GROUP_COUNT];
        for (knee, &f) in &fold_of_knee {
            if knee.starts_with('N') {
                counts[f as usize].0 += 1;
            } else {
                counts[f as usize].1 += 1;
            }
        }
        assert_eq!(counts, RATIO_TEMPLATE);
        distinct.insert(plan.fold_of_row[rep].clone());
        for fold in 0..GROUP_COUNT {
            let (train, test) = plan.split(rep, fold);
            let train_knees: BTreeSet<&str> = train.iter().map(|&r| rows[r].knee_id.as_str()).collect();
            assert!(test.iter().all(|&r| !train_knees.contains(rows[r].knee_id.as_str())));
            assert_eq!(train.len() + test.len(), rows.len());
        }
    }
    assert!(distinct.len() > 90, "repetitions should regroup knees");
}

#[test]
fn test_rows_are_scaled_with_training_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rows = rows(19, 21, &mut rng);
    let x = features(&rows, &mut rng);
    let plan = CvPlan::new(&rows, CvProtocol { repetitions: 3, seed: 1 }).unwrap();
    let labels: Vec<Label> = rows.iter().map(|r| r.label).collect();
    for kind in [ClassifierKind::SvmLinear, ClassifierKind::Lda] {
        for rep in 0..3 {
            let (scores, _) = repetition_scores(&x, &[0, 1], &plan, rep, kind).unwrap();
            let mut leaky_differs = false;
            for fold in 0..GROUP_COUNT {
                let (train, test) = plan.split(rep, fold);
                let ytr: Vec<Label> = train.iter().map(|&r| labels[r]).collect();
                let seed = derive_seed(1, &[stream::CLASSIFIER, rep as u64, fold as u64]);
                let score_with = |scaler: &Standardizer| -> Vec<f64> {
                    let mut xtr = x.select_rows(&train);
                    scaler.apply(&mut xtr);
                    let model = classify::train(kind, &xtr, &ytr, seed).unwrap();
                    let mut xte = x.select_rows(&test);
                    scaler.apply(&mut xte);
                    xte.iter_rows().map(|r| model.score(r).unwrap()).collect()
                };
                let honest = score_with(&Standardizer::fit(&x.select_rows(&train)));
                for (&r, s) in test.iter().zip(&honest) {
                    assert_eq!(scores[r], *s, "{kind} rep {rep} fold {fold}");
                }
                let leaky = score_with(&Standardizer::fit(&x));
                leaky_differs |= leaky.iter().zip(&honest).any(|(a, b)| (a - b).abs() > 1e-9);
            }
            assert!(leaky_differs, "probe cannot tell train-only from all-row scaling");
        }
    }
}

proptest! {
    #[test]
    fn scaled_template_keeps_every_knee(normal in 5usize..80, abnormal in 5usize..80) {
        let g = group_sizes(normal, abnormal).unwrap();
        prop_assert_eq!(g.iter().map(|p| p.0).sum::<usize>(), normal);
        prop_assert_eq!(g.iter().map(|p| p.1).sum::<usize>(), abnormal);
        prop_assert!(g.iter().all(|p| p.0 > 0 && p.1 > 0));
    }
}
