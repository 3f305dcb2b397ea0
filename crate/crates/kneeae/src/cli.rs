//! `kneeae` command line front end.
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kneeae_core::classify::ClassifierKind;
use kneeae_core::experiment::cv::repetition_scores;
use kneeae_core::experiment::{
    evaluate_set, run_cv, run_point, CvPlan, CvProtocol, ErrorThreshold, FeatureSource, PipelineConfig, SweepConfig,
    SweepKind, DEFAULT_BANDS, MONTE_CARLO_DRAWS, REFERENCE_FRAME_MS,
};
use kneeae_core::features::{FeatureConfig, FeatureId, FeatureSet, SetTag};
use kneeae_core::metrics::roc_auc;
use kneeae_core::selection::{score_features, THRESHOLD_STEP};
use kneeae_core::spectral::{make_filterbank, Spacing};
use kneeae_core::synthgen::{generate_one, SynthSpec};
use kneeae_core::Runner;

use crate::cache::CorpusSource;
use crate::config::ExperimentConfig;
use crate::error::{io_err, Error, Result};
use crate::formats::{read_json, write_feature_set, write_filterbank, write_json, write_roc, write_rows};
use crate::manifest::{Manifest, ManifestEntry};
use crate::reports::{EvaluationReport, RunInfo, ScoreReport, SelectionReport, SweepPointReport};
use crate::runner::Threads;
use crate::wav::write_wav;

#[derive(Debug, Parser)]
#[command(name = "kneeae", version, about = "Knee acoustic-emission feature extraction, selection and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration (a synth spec for `synth`, an experiment config otherwise)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Ignore and do not write the feature cache
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Args)]
pub struct Pipeline {
    /// Corpus manifest CSV (path,knee_id,subject_id,label)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Frame length in milliseconds
    #[arg(long)]
    pub frame_ms: Option<f64>,
    /// Number of filterbank bands
    #[arg(long)]
    pub nbands: Option<usize>,
    /// Feature sets to use (D, E, F, L, M); repeat or comma-separate
    #[arg(long, value_delimiter = ',', value_parser = parse_tag)]
    pub feature_set: Vec<SetTag>,
    /// Cross-validation repetitions
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus (WAV files and manifest)
    Synth,
    /// Extract feature sets to CSV
    Extract {
        #[command(flatten)]
        pipeline: Pipeline,
    },
    /// Score every feature vector of one set with a linear SVM
    Score {
        #[command(flatten)]
        pipeline: Pipeline,
    },
    /// Build threshold subsets and select the best one
    Select {
        #[command(flatten)]
        pipeline: Pipeline,
        #[arg(long, value_parser = parse_classifier)]
        classifier: Option<ClassifierKind>,
    },
    /// Cross-validate a classifier on chosen feature vectors
    Evaluate {
        /// Corpus manifest CSV
        #[arg(long, required = true)]
        corpus: PathBuf,
        #[arg(long)]
        frame_ms: Option<f64>,
        #[arg(long)]
        nbands: Option<usize>,
        #[arg(long, value_parser = parse_tag)]
        feature_set: Option<SetTag>,
        /// Feature vectors, e.g. `F30d0,F31d1` (default: the whole set)
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        #[arg(long, value_parser = parse_classifier)]
        classifier: Option<ClassifierKind>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Run a parameter sweep
    Sweep {
        #[command(flatten)]
        pipeline: Pipeline,
        /// framelen, local_search, monte_carlo or nbands
        #[arg(long, value_parser = parse_kind)]
        kind: Option<SweepKind>,
        /// Classifiers to compare; repeat or comma-separate
        #[arg(long, value_delimiter = ',', value_parser = parse_classifier)]
        classifier: Vec<ClassifierKind>,
    },
}

fn parse_tag(s: &str) -> std::result::Result<SetTag, String> {
    SetTag::parse(s).ok_or_else(|| format!("unknown feature set `{s}` (expected D, E, F, L or M)"))
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    ClassifierKind::parse(s).ok_or_else(|| format!("unknown classifier `{s}` (expected svm-linear, svm-gaussian, lda or cart)"))
}

fn parse_kind(s: &str) -> std::result::Result<SweepKind, String> {
    SweepKind::parse(s).ok_or_else(|| format!("unknown sweep kind `{s}` (expected framelen, local_search, monte_carlo or nbands)"))
}

/// Parses `argv` and runs the command. Returns the process exit status:
/// 0 on success, 2 on usage errors, 1 on pipeline errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Failure {
    Usage(String),
    Pipeline(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e)
    }
}

impl From<kneeae_core::Error> for Failure {
    fn from(e: kneeae_core::Error) -> Self {
        Failure::Pipeline(e.into())
    }
}

/// Everything a pipeline command needs, after merging flags over the config
/// file over defaults.
struct Settings {
    out: PathBuf,
    corpus: PathBuf,
    seed: u64,
    repetitions: usize,
    runner: Threads,
    cache_dir: Option<PathBuf>,
    config: ExperimentConfig,
}

impl Settings {
    fn new(common: &Common, corpus: Option<&PathBuf>, reps: Option<usize>) -> std::result::Result<Self, Failure> {
        let config = match &common.config {
            Some(p) => ExperimentConfig::read(p)?,
            None => ExperimentConfig::default(),
        };
        let corpus = corpus
            .cloned()
            .or_else(|| config.corpus.clone())
            .ok_or_else(|| Failure::Usage("a corpus manifest is required (--corpus or \"corpus\" in --config)".into()))?;
        let out = common.out.clone().ok_or_else(|| Failure::Usage("--out is required".into()))?;
        fs::create_dir_all(&out).map_err(io_err(&out))?;
        let cache_dir = if common.no_cache {
            None
        } else {
            Some(config.cache_dir.clone().unwrap_or_else(|| {
                corpus.parent().unwrap_or(Path::new(".")).join(".feature-cache")
            }))
        };
        let runner = common.jobs.map(Threads::new).unwrap_or_else(Threads::available);
        Ok(Self {
            out,
            corpus,
            seed: common.seed.or(config.seed).unwrap_or(0),
            repetitions: reps.or(config.repetitions).unwrap_or(kneeae_core::experiment::cv::DEFAULT_REPETITIONS),
            runner,
            cache_dir,
            config,
        })
    }

    fn feature_config(&self, frame_ms: Option<f64>, bands: Option<usize>, default_ms: f64) -> FeatureConfig {
        let mut c = FeatureConfig::new(
            frame_ms.or(self.config.frame_ms).unwrap_or(default_ms),
            bands.or(self.config.bands).unwrap_or(DEFAULT_BANDS),
        );
        c.stft_deltas = self.config.stft_deltas.unwrap_or(false);
        c
    }

    fn tags(&self, flags: &[SetTag], default: &[SetTag]) -> Vec<SetTag> {
        let mut t = if !flags.is_empty() {
            flags.to_vec()
        } else {
            self.config.feature_sets.clone().unwrap_or_else(|| default.to_vec())
        };
        t.sort();
        t.dedup();
        t
    }

    fn pipeline(&self, classifiers: Vec<ClassifierKind>) -> PipelineConfig {
        PipelineConfig {
            protocol: CvProtocol { repetitions: self.repetitions, seed: self.seed },
            classifiers,
            error_threshold: self.config.error_threshold.unwrap_or(ErrorThreshold::MajorityBaseline),
            step: self.config.step.unwrap_or(THRESHOLD_STEP),
            stft_deltas: self.config.stft_deltas.unwrap_or(false),
        }
    }
}

fn single_tag(tags: &[SetTag]) -> std::result::Result<SetTag, Failure> {
    match tags {
        [t] => Ok(*t),
        _ => Err(Failure::Usage("exactly one --feature-set is required".into())),
    }
}

fn default_frame(tag: SetTag) -> f64 {
    REFERENCE_FRAME_MS.iter().find(|r| r.0 == tag).map(|r| r.1).unwrap_or(49.0)
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Synth => synth(&cli.common),
        Command::Extract { pipeline } => extract_cmd(&cli.common, pipeline),
        Command::Score { pipeline } => score_cmd(&cli.common, pipeline),
        Command::Select { pipeline, classifier } => select_cmd(&cli.common, pipeline, *classifier),
        Command::Evaluate { corpus, frame_ms, nbands, feature_set, features, classifier, reps } => {
            let s = Settings::new(&cli.common, Some(corpus), *reps)?;
            evaluate_cmd(&s, *frame_ms, *nbands, *feature_set, features, *classifier)
        }
        Command::Sweep { pipeline, kind, classifier } => sweep_cmd(&cli.common, pipeline, *kind, classifier),
    }
}

fn synth(common: &Common) -> std::result::Result<(), Failure> {
    let mut spec: SynthSpec = match &common.config {
        Some(p) => read_json(p)?,
        None => SynthSpec::default(),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let out = common.out.clone().ok_or_else(|| Failure::Usage("--out is required".into()))?;
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let runner = common.jobs.map(Threads::new).unwrap_or_else(Threads::available);
    let ids = spec.knee_ids();
    let written = runner.map(ids.len(), |i| -> Result<ManifestEntry> {
        let rec = generate_one(&spec, i)?;
        let name = format!("{}.wav", rec.knee_id);
        write_wav(&out.join(&name), &rec.samples, rec.sample_rate)?;
        Ok(ManifestEntry { path: name, knee_id: rec.knee_id, subject_id: rec.subject_id, label: rec.label })
    });
    let entries = written.into_iter().collect::<Result<Vec<_>>>()?;
    Manifest::write(&out.join("manifest.csv"), &entries)?;
    write_json(&out.join("synth_spec.json"), &spec)?;
    Ok(())
}

fn open_source<'a>(s: &'a Settings, manifest: &'a Manifest) -> Result<CorpusSource<'a, Threads>> {
    CorpusSource::new(manifest, s.cache_dir.as_deref(), &s.runner)
}

fn run_info(s: &Settings, manifest: &Manifest, segments: usize) -> Result<RunInfo> {
    Ok(RunInfo::new(s.seed, s.repetitions, manifest.content_hash()?, segments))
}

fn extract_cmd(common: &Common, p: &Pipeline) -> std::result::Result<(), Failure> {
    let s = Settings::new(common, p.corpus.as_ref(), p.reps)?;
    let manifest = Manifest::read(&s.corpus)?;
    let source = open_source(&s, &manifest)?;
    let tags = s.tags(&p.feature_set, &SetTag::ALL);
    let config = s.feature_config(p.frame_ms, p.nbands, 49.0);
    let hash = manifest.content_hash()?;
    for set in source.sets(&config, &tags)? {
        write_feature_set(&s.out.join(format!("features_{}.csv", set.tag)), &set, Some(hash.clone()))?;
    }
    if tags.iter().any(|&t| t != SetTag::F) {
        for (spacing, name) in [(Spacing::Linear, "linear"), (Spacing::Mel, "mel")] {
            let fb = make_filterbank(config.bins(), config.frame_len(), config.sample_rate, config.bands, spacing)?;
            write_filterbank(&s.out.join(format!("filterbank_{name}.csv")), &fb, config.bin_hz())?;
        }
    }
    Ok(())
}

fn one_set(s: &Settings, source: &CorpusSource<'_, Threads>, p: &Pipeline) -> std::result::Result<FeatureSet, Failure> {
    let tag = single_tag(&s.tags(&p.feature_set, &[]))?;
    let config = s.feature_config(p.frame_ms, p.nbands, default_frame(tag));
    Ok(source.sets(&config, &[tag])?.remove(0))
}

fn score_cmd(common: &Common, p: &Pipeline) -> std::result::Result<(), Failure> {
    let s = Settings::new(common, p.corpus.as_ref(), p.reps)?;
    let manifest = Manifest::read(&s.corpus)?;
    let source = open_source(&s, &manifest)?;
    let set = one_set(&s, &source, p)?;
    let plan = CvPlan::new(&set.rows, s.pipeline(vec![]).protocol)?;
    let scores = score_features(&set, &plan, &s.runner)?;
    let report = ScoreReport {
        kind: "score".into(),
        run: run_info(&s, &manifest, set.rows.len())?,
        feature_set: set.tag,
        config: set.config,
        scores,
    };
    write_json(&s.out.join(format!("scores_{}.json", set.tag)), &report)?;
    let rows = report.scores.iter().map(|sc| {
        vec![sc.id.to_string(), sc.error_rate.to_string(), sc.f05.to_string(), sc.mcc.to_string()]
    });
    write_rows(&s.out.join(format!("scores_{}.csv", set.tag)), &["feature", "error_rate", "f05", "mcc"], rows)?;
    Ok(())
}

fn select_cmd(common: &Common, p: &Pipeline, classifier: Option<ClassifierKind>) -> std::result::Result<(), Failure> {
    let s = Settings::new(common, p.corpus.as_ref(), p.reps)?;
    let classifier = classifier
        .or_else(|| s.config.classifiers.as_ref().and_then(|c| c.first().copied()))
        .unwrap_or(ClassifierKind::SvmLinear);
    let manifest = Manifest::read(&s.corpus)?;
    let source = open_source(&s, &manifest)?;
    let set = one_set(&s, &source, p)?;
    let cfg = s.pipeline(vec![classifier]);
    let plan = CvPlan::new(&set.rows, cfg.protocol)?;
    let mut result = evaluate_set(&set, &plan, &cfg, &s.runner)?;
    let outcome = result.outcomes.remove(0);
    let report = SelectionReport {
        kind: "selection".into(),
        run: run_info(&s, &manifest, set.rows.len())?,
        feature_set: set.tag,
        config: set.config,
        classifier,
        error_threshold: result.error_threshold,
        step: cfg.step,
        scores: result.scores,
        subsets_considered: result.subsets_considered,
        per_repetition_auc: outcome.report.aucs(),
        selection: outcome.selection,
        report: outcome.report,
    };
    write_json(&s.out.join(format!("selection_{}_{}.json", set.tag, classifier)), &report)?;
    Ok(())
}

fn parse_feature_ids(names: &[String], set: &FeatureSet) -> std::result::Result<Vec<usize>, Failure> {
    if names.is_empty() {
        return Ok((0..set.vector_count()).collect());
    }
    names
        .iter()
        .map(|n| {
            set.vectors
                .iter()
                .position(|id| id.to_string() == n.trim())
                .ok_or_else(|| Failure::Usage(format!("feature `{n}` is not in set {} at this configuration", set.tag)))
        })
        .collect()
}

fn evaluate_cmd(
    s: &Settings,
    frame_ms: Option<f64>,
    nbands: Option<usize>,
    tag: Option<SetTag>,
    features: &[String],
    classifier: Option<ClassifierKind>,
) -> std::result::Result<(), Failure> {
    let tag = tag
        .or_else(|| s.config.feature_sets.as_ref().and_then(|t| t.first().copied()))
        .ok_or_else(|| Failure::Usage("--feature-set is required".into()))?;
    let classifier = classifier
        .or_else(|| s.config.classifiers.as_ref().and_then(|c| c.first().copied()))
        .unwrap_or(ClassifierKind::SvmLinear);
    let manifest = Manifest::read(&s.corpus)?;
    let source = open_source(s, &manifest)?;
    let config = s.feature_config(frame_ms, nbands, default_frame(tag));
    let set = source.sets(&config, &[tag])?.remove(0);
    let vectors = parse_feature_ids(features, &set)?;
    let members: Vec<FeatureId> = vectors.iter().map(|&v| set.vectors[v]).collect();
    let columns = set.columns_of(&vectors);
    let plan = CvPlan::new(&set.rows, s.pipeline(vec![]).protocol)?;
    let report = run_cv(&set.data, &columns, &plan, classifier)?;
    let (scores, _) = repetition_scores(&set.data, &columns, &plan, 0, classifier)?;
    let roc = roc_auc(&scores, &plan.labels)?;
    let stem = format!("{}_{}", set.tag, classifier);
    write_roc(&s.out.join(format!("roc_{stem}.csv")), &roc)?;
    let file = EvaluationReport {
        kind: "evaluation".into(),
        run: run_info(s, &manifest, set.rows.len())?,
        feature_set: set.tag,
        config: set.config,
        members,
        report,
    };
    write_json(&s.out.join(format!("evaluation_{stem}.json")), &file)?;
    Ok(())
}

fn sweep_cmd(
    common: &Common,
    p: &Pipeline,
    kind: Option<SweepKind>,
    classifiers: &[ClassifierKind],
) -> std::result::Result<(), Failure> {
    let s = Settings::new(common, p.corpus.as_ref(), p.reps)?;
    let kind = kind
        .or(s.config.kind)
        .ok_or_else(|| Failure::Usage("--kind is required (framelen, local_search, monte_carlo or nbands)".into()))?;
    let classifiers = if !classifiers.is_empty() {
        classifiers.to_vec()
    } else if let Some(c) = &s.config.classifiers {
        c.clone()
    } else if kind == SweepKind::LocalSearch {
        ClassifierKind::ALL.to_vec()
    } else {
        vec![ClassifierKind::SvmLinear]
    };
    let bands = p.nbands.or(s.config.bands).unwrap_or(DEFAULT_BANDS);
    let centres: Vec<(SetTag, f64)> = {
        let tags = s.tags(&p.feature_set, &SetTag::ALL);
        tags.iter()
            .map(|&t| {
                let l = s.config.centres_ms.as_ref().and_then(|m| m.get(&t).copied()).unwrap_or(default_frame(t));
                (t, l)
            })
            .collect()
    };
    let mut sweep = match kind {
        SweepKind::Framelen => SweepConfig::framelen(&s.tags(&p.feature_set, &SetTag::ALL), bands),
        SweepKind::LocalSearch => SweepConfig::local_search(&centres, bands),
        SweepKind::MonteCarlo => SweepConfig::monte_carlo(
            &s.tags(&p.feature_set, &SetTag::ALL),
            bands,
            s.config.monte_carlo_draws.unwrap_or(MONTE_CARLO_DRAWS),
            s.seed,
        )?,
        SweepKind::Nbands => SweepConfig::nbands(&centres),
    };
    if kind == SweepKind::Framelen {
        if let Some(grid) = &s.config.frame_grid_ms {
            let tags = sweep.points.first().map(|p| p.tags.clone()).unwrap_or_default();
            sweep.points = grid
                .iter()
                .map(|&l| kneeae_core::experiment::GridPoint { frame_ms: l, bands, tags: tags.clone(), offset_ms: None })
                .collect();
        }
    }
    if sweep.points.is_empty() {
        return Err(Failure::Usage("the sweep has no grid points for the chosen feature sets".into()));
    }
    if let (SweepKind::Nbands, Some(l)) = (kind, p.frame_ms) {
        sweep.points.iter_mut().for_each(|pt| pt.frame_ms = l);
    }

    let manifest = Manifest::read(&s.corpus)?;
    let source = open_source(&s, &manifest)?;
    let cfg = s.pipeline(classifiers.clone());
    let rows = source.rows()?;
    let plan = CvPlan::new(&rows, cfg.protocol)?;
    let info = run_info(&s, &manifest, rows.len())?;
    let mut curve: Vec<Vec<String>> = Vec::new();
    for (i, point) in sweep.points.iter().enumerate() {
        let report = run_point(&source, &plan, kind, i, point, &cfg, &s.runner)?;
        for e in &report.sets {
            match &e.result {
                Some(r) => {
                    for o in &r.outcomes {
                        let m = &o.report.mean;
                        curve.push(vec![
                            i.to_string(),
                            point.frame_ms.to_string(),
                            point.bands.to_string(),
                            point.offset_ms.map(|v| v.to_string()).unwrap_or_default(),
                            e.tag.to_string(),
                            o.report.classifier.to_string(),
                            m.auc.to_string(),
                            m.error_rate.to_string(),
                            m.f05.to_string(),
                            m.mcc.to_string(),
                            m.s.to_string(),
                            o.selection.vectors.len().to_string(),
                            String::new(),
                        ]);
                    }
                }
                None => curve.push(vec![
                    i.to_string(),
                    point.frame_ms.to_string(),
                    point.bands.to_string(),
                    point.offset_ms.map(|v| v.to_string()).unwrap_or_default(),
                    e.tag.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.skipped.clone().unwrap_or_default(),
                ]),
            }
        }
        let file = SweepPointReport {
            kind: "sweep_point".into(),
            run: info.clone(),
            sweep: kind,
            classifiers: classifiers.clone(),
            point: report,
        };
        write_json(&s.out.join(format!("{}_{:03}.json", kind.name(), i)), &file)?;
    }
    write_rows(
        &s.out.join(format!("{}_curve.csv", kind.name())),
        &[
            "point", "frame_ms", "bands", "offset_ms", "feature_set", "classifier", "auc", "error_rate", "f05", "mcc",
            "s", "vectors", "skipped",
        ],
        curve,
    )?;
    Ok(())
}
