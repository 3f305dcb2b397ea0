use kneeae_core::cepstral::{cepstra, dct_matrix, Flavor};
use kneeae_core::features::{Extractor, FeatureConfig, SetTag, STATS_PER_VECTOR};
use kneeae_core::{Label, Matrix, Segment};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dct_is_orthonormal() {
    let d = dct_matrix(13);
    let p = d.matmul(&d.transpose()).unwrap();
    for i in 0..13 {
        for j in 0..13 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((p.get(i, j) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn gain_moves_only_c0_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let samples: Vec<f64> = (0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect();
    let seg = Segment { samples: samples.clone(), sample_rate: 16_000, knee_id: "N001".into(), label: Label::Normal, index: 0 };
    let loud = Segment { samples: samples.iter().map(|v| 7.0 * v).collect(), ..seg.clone() };
    let cfg = FeatureConfig::new(25.0, 20);
    let ex = Extractor::new(cfg).unwrap();
    let tags = [SetTag::L, SetTag::M];
    let a = ex.segment_rows(&seg, &tags).unwrap();
    let b = ex.segment_rows(&loud, &tags).unwrap();
    for (t, tag) in tags.iter().enumerate() {
        let ids = cfg.vector_ids(*tag);
        let mut c0_static_moved = false;
        for (v, id) in ids.iter().enumerate() {
            let cols = v * STATS_PER_VECTOR..(v + 1) * STATS_PER_VECTOR;
            let diff = a[t][cols.clone()].iter().zip(&b[t][cols]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            if id.coeff == 0 {
                c0_static_moved |= id.order == 0 && diff > 1.0;
            } else {
                assert!(diff <= 1e-6, "{tag:?} {id}: {diff}");
            }
        }
        assert!(c0_static_moved);
    }
}

proptest! {
    #[test]
    fn scaling_shifts_c0_by_log_gain(gain in 0.01f64..100.0, seed in any::<u64>(), bands in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..5 * bands).map(|_| rng.random_range(0.01..10.0)).collect();
        let s = Matrix::from_vec(5, bands, data.clone()).unwrap();
        let g = Matrix::from_vec(5, bands, data.iter().map(|v| v * gain).collect()).unwrap();
        let (cs, cg) = (cepstra(&s, Flavor::Mel).values, cepstra(&g, Flavor::Mel).values);
        for t in 0..5 {
            let shift = (bands as f64).sqrt() * gain.ln();
            prop_assert!((cg.get(t, 0) - cs.get(t, 0) - shift).abs() <= 1e-9);
            for k in 1..bands {
                prop_assert!((cg.get(t, k) - cs.get(t, k)).abs() <= 1e-9);
            }
        }
    }
}
