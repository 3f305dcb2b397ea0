use kneeae_core::classify::ClassifierKind;
use kneeae_core::experiment::{evaluate_set, CvPlan, CvProtocol, PipelineConfig};
use kneeae_core::features::{extract, FeatureConfig, FeatureSet, SetTag};
use kneeae_core::metrics::s_score;
use kneeae_core::signal::{prepare_segments, ANALYSIS_RATE, SEGMENT_SECONDS};
use kneeae_core::synthgen::{generate, generate_one, SynthSpec};
use kneeae_core::{Label, Sequential};

fn small_set(seed: u64) -> FeatureSet {
    let spec = SynthSpec { normal_knees: 5, abnormal_knees: 5, duration_s: 60.0, seed, ..SynthSpec::default() };
    let segs = prepare_segments(&generate(&spec).unwrap(), ANALYSIS_RATE, SEGMENT_SECONDS).unwrap();
    extract(&segs, &FeatureConfig::new(49.0, 12), &[SetTag::M], &Sequential).unwrap().remove(0)
}

#[test]
fn reports_are_consistent_and_reproducible() {
    let set = small_set(1);
    let cfg = PipelineConfig {
        protocol: CvProtocol { repetitions: 4, seed: 9 },
        classifiers: vec![ClassifierKind::SvmLinear, ClassifierKind::Lda],
        ..PipelineConfig::default()
    };
    let plan = CvPlan::new(&set.rows, cfg.protocol).unwrap();
    let a = evaluate_set(&set, &plan, &cfg, &Sequential).unwrap();
    let b = evaluate_set(&set, &plan, &cfg, &Sequential).unwrap();
    assert_eq!(a, b);
    assert!(a.subsets_considered >= 1 && a.subsets_considered <= 441);
    assert_eq!(a.error_threshold, 0.5);
    for o in &a.outcomes {
        let aucs = o.report.aucs();
        assert_eq!(aucs.len(), 4);
        let (lo, hi) = aucs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let m = o.report.mean;
        assert!(lo <= m.auc && m.auc <= hi);
        assert_eq!(m.s, s_score(m.mcc, m.error_rate, m.f05));
        assert_eq!(o.selection.mean_auc, Some(m.auc));
    }
}

#[test]
fn plan_must_match_the_feature_rows() {
    let set = small_set(2);
    let mut rows = set.rows.clone();
    rows.pop();
    let plan = CvPlan::new(&rows, CvProtocol { repetitions: 1, seed: 0 }).unwrap();
    assert!(evaluate_set(&set, &plan, &PipelineConfig::default(), &Sequential).is_err());
}

/// Autocorrelation of a 100 Hz amplitude envelope.
fn dominant_period(x: &[f64], fs: f64) -> f64 {
    let hop = (fs / 100.0) as usize;
    let env: Vec<f64> = x.chunks(hop).map(|c| c.iter().map(|v| v.abs()).sum::<f64>() / c.len() as f64).collect();
    let mean = env.iter().sum::<f64>() / env.len() as f64;
    let e: Vec<f64> = env.iter().map(|v| v - mean).collect();
    let (lo, hi) = (50, 200);
    let best = (lo..hi)
        .max_by(|&a, &b| {
            let ra: f64 = e.iter().zip(&e[a..]).map(|(p, q)| p * q).sum();
            let rb: f64 = e.iter().zip(&e[b..]).map(|(p, q)| p * q).sum();
            ra.total_cmp(&rb)
        })
        .unwrap();
    best as f64 / 100.0
}

#[test]
fn synthetic_gait_repeats_at_the_stride_period() {
    let spec = SynthSpec { normal_knees: 2, abnormal_knees: 2, duration_s: 30.0, ..SynthSpec::default() };
    for i in 0..4 {
        let rec = generate_one(&spec, i).unwrap();
        assert!(rec.samples.iter().all(|v| v.is_finite() && v.abs() <= 1.0));
        let p = dominant_period(&rec.samples, rec.sample_rate as f64);
        assert!((p - spec.stride_period_s).abs() <= 0.05 * spec.stride_period_s, "knee {i}: period {p}");
        let want = if i < 2 { Label::Normal } else { Label::Abnormal };
        assert_eq!(rec.label, want);
    }
}
