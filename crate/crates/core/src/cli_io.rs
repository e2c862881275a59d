//! File formats, model serialization, configuration, and the training
//! orchestration stitching the modules into the two-layer pipeline.
//!
//! Features are CSV (one row per frame, D numeric columns, no header);
//! annotations, parses, models, configs, and generator specs are JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::context_features::build_context_cache;
use crate::core_types::{FrameSequence, LabelSpace, Parse, ParserConfig, Segment};
use crate::datagen::{CouplingRule, GenSpec};
use crate::linear_model::{
    encode_segment, score_all_classes, train_multiclass_svm, LinearModel, TrainConfig,
};
use crate::{Error, Real, Result};

// ---------------------------------------------------------------------------
// Training corpus and pipeline
// ---------------------------------------------------------------------------

/// Sequences with ground-truth parses sharing one label space.
#[derive(Debug, Clone)]
pub struct TrainingCorpus<F> {
    pub items: Vec<(FrameSequence<F>, Parse<F>)>,
    pub label_space: LabelSpace,
}

/// Output of [`train_pipeline`]: both layers plus notes about ground-truth
/// segments that had to be clipped or skipped.
#[derive(Debug, Clone)]
pub struct TrainedPipeline<F> {
    pub first_layer: LinearModel<F>,
    pub second_layer: LinearModel<F>,
    pub scales: Vec<usize>,
    pub skipped: Vec<String>,
}

/// Splits a ground-truth segment into training segments honoring the
/// parser's length bounds: segments longer than l_max become l_max-sized
/// chunks (a short final remainder is merged into the previous chunk);
/// segments shorter than l_min are reported and skipped.
fn clip_segment(
    seg: Segment,
    l_min: usize,
    l_max: usize,
    skipped: &mut Vec<String>,
) -> Vec<Segment> {
    let len = seg.len();
    if len < l_min {
        skipped.push(format!(
            "segment [{}, {}) of length {len} below l_min {l_min}, skipped",
            seg.start, seg.end
        ));
        return Vec::new();
    }
    if len <= l_max {
        return vec![seg];
    }
    let mut chunks = Vec::new();
    let mut at = seg.start;
    while at + l_max <= seg.end {
        chunks.push(Segment::new(at, at + l_max).unwrap());
        at += l_max;
    }
    let rest = seg.end - at;
    if rest >= l_min {
        chunks.push(Segment::new(at, seg.end).unwrap());
    } else if rest > 0 {
        let last = chunks.pop().unwrap();
        chunks.push(Segment::new(last.start, seg.end).unwrap());
    }
    chunks
}

/// Trains the two-layer pipeline. The first layer learns from the local
/// encodings of all ground-truth segments. Second-layer context features
/// are built cross-fitted: the corpus is split into `config.folds` folds
/// of sequences, and each fold's features come from a first layer trained
/// only on the other folds, so the second layer never sees optimistically
/// overfit context scores. The returned first layer is the all-data model.
pub fn train_pipeline<F: Real>(
    corpus: &TrainingCorpus<F>,
    config: &ParserConfig<F>,
    train_config: &TrainConfig<F>,
) -> Result<TrainedPipeline<F>> {
    config.validate()?;
    train_config.validate()?;
    if corpus.items.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let m = corpus.label_space.num_classes();
    let dim = corpus.items[0].0.dim();
    for (seq, _) in &corpus.items {
        if seq.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: seq.dim(),
            });
        }
    }

    let mut skipped = Vec::new();

    // φ examples over all sequences, remembering which sequence each
    // clipped segment came from for fold assignment
    let mut features: Vec<Vec<F>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut origin: Vec<usize> = Vec::new();
    let mut per_seq_segments: Vec<Vec<(Segment, usize)>> = Vec::new();
    for (si, (seq, truth)) in corpus.items.iter().enumerate() {
        let mut kept = Vec::new();
        for (seg, label) in truth.segments() {
            if label >= m {
                return Err(Error::LabelOutOfRange { label, classes: m });
            }
            for chunk in clip_segment(seg, config.l_min, config.l_max, &mut skipped) {
                features.push(encode_segment(seq, chunk)?);
                labels.push(label);
                origin.push(si);
                kept.push((chunk, label));
            }
        }
        per_seq_segments.push(kept);
    }

    let mut counts = vec![0usize; m];
    for &y in &labels {
        counts[y] += 1;
    }
    for (class, &count) in counts.iter().enumerate() {
        if count < config.folds {
            return Err(Error::TooFewExamples {
                class,
                count,
                folds: config.folds,
            });
        }
    }

    let svm_config = TrainConfig {
        lambda: train_config.lambda,
        epochs: train_config.epochs,
        seed: train_config.seed,
    };
    let first_layer = train_multiclass_svm(&features, &labels, &corpus.label_space, &svm_config)?;

    // cross-fitted ψ features: fold f's context scores come from a first
    // layer trained on all other folds
    let folds = config.folds.min(corpus.items.len());
    let mut psi_features: Vec<Vec<F>> = Vec::new();
    let mut psi_labels: Vec<usize> = Vec::new();
    for fold in 0..folds {
        let train_mask: Vec<bool> = origin.iter().map(|&si| si % folds != fold).collect();
        let fold_features: Vec<Vec<F>> = features
            .iter()
            .zip(&train_mask)
            .filter(|(_, &keep)| keep)
            .map(|(f, _)| f.clone())
            .collect();
        let fold_labels: Vec<usize> = labels
            .iter()
            .zip(&train_mask)
            .filter(|(_, &keep)| keep)
            .map(|(&l, _)| l)
            .collect();
        let fold_model = train_multiclass_svm(
            &fold_features,
            &fold_labels,
            &corpus.label_space,
            &svm_config,
        )?;
        for (si, (seq, _)) in corpus.items.iter().enumerate() {
            if si % folds != fold {
                continue;
            }
            let cache = build_context_cache(seq, &fold_model, &config.scales)?;
            for &(seg, label) in &per_seq_segments[si] {
                let phi = encode_segment(seq, seg)?;
                let v_center = score_all_classes(&fold_model, &phi)?;
                let psi =
                    crate::context_features::assemble_context_feature(&cache, seg, &v_center)?;
                psi_features.push(psi);
                psi_labels.push(label);
            }
        }
    }

    let second_layer =
        train_multiclass_svm(&psi_features, &psi_labels, &corpus.label_space, &svm_config)?;

    Ok(TrainedPipeline {
        first_layer,
        second_layer,
        scales: config.scales.clone(),
        skipped,
    })
}

// ---------------------------------------------------------------------------
// Feature CSV
// ---------------------------------------------------------------------------

pub fn load_features(path: &Path) -> Result<FrameSequence<f64>> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::MalformedLine {
                path: name.clone(),
                line: lineno + 1,
                message: format!("non-numeric cell '{}' in column {}", cell.trim(), col + 1),
            })?;
            row.push(value);
        }
        if let Some(d) = dim {
            if row.len() != d {
                return Err(Error::MalformedLine {
                    path: name.clone(),
                    line: lineno + 1,
                    message: format!("row has {} columns, expected {d}", row.len()),
                });
            }
        } else {
            dim = Some(row.len());
        }
        frames.push(row);
    }
    FrameSequence::new(frames).map_err(|e| Error::MalformedFile {
        path: name,
        message: e.to_string(),
    })
}

pub fn save_features(path: &Path, seq: &FrameSequence<f64>) -> Result<()> {
    let mut out = String::new();
    for f in 0..seq.len() {
        let row: Vec<String> = seq.frame(f).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Segmentation JSON (annotations and parse output share one schema)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SegmentEntry {
    start: usize,
    end: usize,
    label: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SegmentationFile {
    labels: Vec<String>,
    background: String,
    segments: Vec<SegmentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_score: Option<f64>,
}

pub fn load_annotations(path: &Path) -> Result<(Parse<f64>, LabelSpace)> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let file: SegmentationFile = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: name.clone(),
        message: e.to_string(),
    })?;
    let background = file
        .labels
        .iter()
        .position(|l| l == &file.background)
        .ok_or_else(|| Error::MalformedFile {
            path: name.clone(),
            message: format!("background '{}' not in labels", file.background),
        })?;
    let label_space =
        LabelSpace::new(file.labels.clone(), background).map_err(|e| Error::MalformedFile {
            path: name.clone(),
            message: e.to_string(),
        })?;
    if file.segments.is_empty() {
        return Err(Error::MalformedFile {
            path: name,
            message: "no segments".into(),
        });
    }
    let mut breakpoints = vec![file.segments[0].start];
    let mut labels = Vec::new();
    for (i, seg) in file.segments.iter().enumerate() {
        if seg.start != *breakpoints.last().unwrap() {
            return Err(Error::MalformedFile {
                path: name.clone(),
                message: format!(
                    "segment {i} starts at {} but previous ended at {}",
                    seg.start,
                    breakpoints.last().unwrap()
                ),
            });
        }
        if seg.end <= seg.start {
            return Err(Error::MalformedFile {
                path: name.clone(),
                message: format!("non-monotone breakpoints at segment {i}"),
            });
        }
        labels.push(
            label_space
                .index_of(&seg.label)
                .map_err(|e| Error::MalformedFile {
                    path: name.clone(),
                    message: e.to_string(),
                })?,
        );
        breakpoints.push(seg.end);
    }
    let total = file.total_score.unwrap_or(0.0);
    Ok((Parse::new(breakpoints, labels, total), label_space))
}

pub fn save_parse(path: &Path, parse: &Parse<f64>, label_space: &LabelSpace) -> Result<()> {
    let file = SegmentationFile {
        labels: label_space.names().to_vec(),
        background: label_space.name(label_space.background_index()).to_string(),
        segments: parse
            .segments()
            .map(|(seg, label)| SegmentEntry {
                start: seg.start,
                end: seg.end,
                label: label_space.name(label).to_string(),
            })
            .collect(),
        total_score: Some(parse.total_score),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ModelLayerFile {
    weights: Vec<Vec<f64>>,
    labels: Vec<String>,
    background: String,
    input_dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    first_layer: ModelLayerFile,
    second_layer: ModelLayerFile,
    scales: Vec<usize>,
    config: ConfigFile,
}

fn layer_to_file(model: &LinearModel<f64>) -> ModelLayerFile {
    let ls = model.label_space();
    ModelLayerFile {
        weights: model.weights().to_vec(),
        labels: ls.names().to_vec(),
        background: ls.name(ls.background_index()).to_string(),
        input_dim: model.input_dim(),
    }
}

fn layer_from_file(layer: ModelLayerFile, path: &str) -> Result<LinearModel<f64>> {
    let background = layer
        .labels
        .iter()
        .position(|l| l == &layer.background)
        .ok_or_else(|| Error::MalformedFile {
            path: path.to_string(),
            message: format!("background '{}' not in labels", layer.background),
        })?;
    let ls = LabelSpace::new(layer.labels, background)?;
    let model = LinearModel::new(layer.weights, ls)?;
    if model.input_dim() != layer.input_dim {
        return Err(Error::MalformedFile {
            path: path.to_string(),
            message: format!(
                "declared input_dim {} does not match weights ({})",
                layer.input_dim,
                model.input_dim()
            ),
        });
    }
    Ok(model)
}

pub fn save_model(path: &Path, pipeline: &TrainedPipeline<f64>, config: &ConfigFile) -> Result<()> {
    let file = ModelFile {
        first_layer: layer_to_file(&pipeline.first_layer),
        second_layer: layer_to_file(&pipeline.second_layer),
        scales: pipeline.scales.clone(),
        config: config.clone(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(TrainedPipeline<f64>, ConfigFile)> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: name.clone(),
        message: e.to_string(),
    })?;
    let pipeline = TrainedPipeline {
        first_layer: layer_from_file(file.first_layer, &name)?,
        second_layer: layer_from_file(file.second_layer, &name)?,
        scales: file.scales,
        skipped: Vec::new(),
    };
    Ok((pipeline, file.config))
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

fn default_l_min() -> usize {
    40
}
fn default_l_max() -> usize {
    400
}
fn default_scales() -> Vec<usize> {
    vec![75, 150, 225, 300]
}
fn default_lambda() -> f64 {
    0.01
}
fn default_folds() -> usize {
    5
}
fn default_epochs() -> usize {
    30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(default = "default_l_min")]
    pub l_min: usize,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_scales")]
    pub scales: Vec<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub penalty: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            l_min: default_l_min(),
            l_max: default_l_max(),
            scales: default_scales(),
            lambda: default_lambda(),
            folds: default_folds(),
            penalty: 0.0,
            seed: 0,
            epochs: default_epochs(),
        }
    }
}

impl ConfigFile {
    pub fn parser_config(&self) -> ParserConfig<f64> {
        ParserConfig {
            l_min: self.l_min,
            l_max: self.l_max,
            scales: self.scales.clone(),
            segment_penalty: self.penalty,
            lambda: self.lambda,
            folds: self.folds,
        }
    }

    pub fn train_config(&self) -> TrainConfig<f64> {
        TrainConfig {
            lambda: self.lambda,
            epochs: self.epochs,
            seed: self.seed,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let config: ConfigFile = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: name,
        message: e.to_string(),
    })?;
    config.parser_config().validate()?;
    Ok(config)
}

// ---------------------------------------------------------------------------
// Generator spec JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpecFile {
    pub num_classes: usize,
    pub dim: usize,
    pub prototypes: Vec<Vec<f64>>,
    pub noise_sigma: f64,
    pub length_range: (usize, usize),
    pub segments_per_sequence: (usize, usize),
    pub num_sequences: usize,
    #[serde(default)]
    pub coupling: Vec<CouplingRuleFile>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub class_names: Option<Vec<String>>,
    #[serde(default)]
    pub background: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingRuleFile {
    pub pair: (usize, usize),
    pub neighbors: ((usize, usize), (usize, usize)),
}

impl GenSpecFile {
    pub fn gen_spec(&self) -> GenSpec<f64> {
        GenSpec {
            num_classes: self.num_classes,
            dim: self.dim,
            prototypes: self.prototypes.clone(),
            noise_sigma: self.noise_sigma,
            length_range: self.length_range,
            segments_per_sequence: self.segments_per_sequence,
            num_sequences: self.num_sequences,
            coupling: self
                .coupling
                .iter()
                .map(|r| CouplingRule {
                    pair: r.pair,
                    neighbors: r.neighbors,
                })
                .collect(),
            seed: self.seed,
        }
    }

    pub fn label_space(&self) -> Result<LabelSpace> {
        let names = match &self.class_names {
            Some(names) => names.clone(),
            None => (0..self.num_classes)
                .map(|c| format!("class_{c}"))
                .collect(),
        };
        LabelSpace::new(names, self.background)
    }
}

pub fn load_gen_spec(path: &Path) -> Result<GenSpecFile> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let spec: GenSpecFile = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: name,
        message: e.to_string(),
    })?;
    spec.gen_spec().validate()?;
    spec.label_space()?;
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Dataset directories
// ---------------------------------------------------------------------------

/// Writes a generated dataset: `seq_###.csv` features next to
/// `seq_###.json` annotations.
pub fn write_dataset(
    dir: &Path,
    data: &[(FrameSequence<f64>, Parse<f64>)],
    label_space: &LabelSpace,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, (seq, truth)) in data.iter().enumerate() {
        save_features(&dir.join(format!("seq_{i:03}.csv")), seq)?;
        save_parse(&dir.join(format!("seq_{i:03}.json")), truth, label_space)?;
    }
    Ok(())
}

/// Loads every `*.csv` + `*.json` pair in a dataset directory, sorted by
/// file name. All annotations must agree on the label space.
pub fn load_dataset(dir: &Path) -> Result<TrainingCorpus<f64>> {
    let mut stems: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            if p.extension().is_some_and(|x| x == "csv") {
                p.file_stem().map(|s| s.to_string_lossy().into_owned())
            } else {
                None
            }
        })
        .collect();
    stems.sort();
    if stems.is_empty() {
        return Err(Error::MalformedFile {
            path: dir.display().to_string(),
            message: "no feature CSV files found".into(),
        });
    }
    let mut items = Vec::new();
    let mut label_space: Option<LabelSpace> = None;
    for stem in &stems {
        let seq = load_features(&dir.join(format!("{stem}.csv")))?;
        let (truth, ls) = load_annotations(&dir.join(format!("{stem}.json")))?;
        match &label_space {
            None => label_space = Some(ls),
            Some(existing) => {
                if existing != &ls {
                    return Err(Error::MalformedFile {
                        path: dir.join(format!("{stem}.json")).display().to_string(),
                        message: "label space differs from other annotations".into(),
                    });
                }
            }
        }
        items.push((seq, truth));
    }
    Ok(TrainingCorpus {
        items,
        label_space: label_space.unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;
    use crate::linear_model::predict_with_margin;
    use tempfile::tempdir;

    fn labels3() -> LabelSpace {
        LabelSpace::new(vec!["bg".into(), "a".into(), "b".into()], 0).unwrap()
    }

    pub(super) fn small_corpus(num_sequences: usize, seed: u64) -> TrainingCorpus<f64> {
        let spec = GenSpec {
            num_classes: 3,
            dim: 3,
            prototypes: vec![
                vec![6.0, 0.0, 0.0],
                vec![0.0, 6.0, 0.0],
                vec![0.0, 0.0, 6.0],
            ],
            noise_sigma: 0.5,
            length_range: (4, 8),
            segments_per_sequence: (4, 7),
            num_sequences,
            coupling: vec![],
            seed,
        };
        TrainingCorpus {
            items: generate(&spec).unwrap(),
            label_space: labels3(),
        }
    }

    pub(super) fn small_config() -> ParserConfig<f64> {
        ParserConfig {
            l_min: 4,
            l_max: 8,
            scales: vec![5],
            segment_penalty: 0.0,
            lambda: 0.01,
            folds: 2,
        }
    }

    #[test]
    fn features_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let seq = FrameSequence::new(vec![
            vec![1.0, -0.25, 3.5e-7],
            vec![0.1234567890123, 2.0, -9.0],
        ])
        .unwrap();
        save_features(&path, &seq).unwrap();
        let loaded = load_features(&path).unwrap();
        for f in 0..seq.len() {
            for d in 0..seq.dim() {
                assert!((seq.frame(f)[d] - loaded.frame(f)[d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn malformed_csv_names_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1.0,2.0\n1.0,oops\n").unwrap();
        match load_features(&path) {
            Err(Error::MalformedLine { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("oops"));
            }
            other => panic!("expected malformed line, got {other:?}"),
        }
        fs::write(&path, "1.0,2.0\n1.0\n").unwrap();
        assert!(matches!(
            load_features(&path),
            Err(Error::MalformedLine { line: 2, .. })
        ));
    }

    #[test]
    fn annotations_round_trip_and_reject_gaps() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ann.json");
        let parse = Parse::new(vec![0, 5, 12], vec![1, 2], 3.5);
        save_parse(&path, &parse, &labels3()).unwrap();
        let (loaded, ls) = load_annotations(&path).unwrap();
        assert_eq!(loaded.breakpoints, parse.breakpoints);
        assert_eq!(loaded.labels, parse.labels);
        assert_eq!(ls, labels3());

        fs::write(
            &path,
            r#"{"labels":["bg","a"],"background":"bg",
               "segments":[{"start":0,"end":5,"label":"a"},{"start":3,"end":8,"label":"bg"}]}"#,
        )
        .unwrap();
        assert!(load_annotations(&path).is_err());

        fs::write(
            &path,
            r#"{"labels":["bg","a"],"background":"bg",
               "segments":[{"start":0,"end":0,"label":"a"}]}"#,
        )
        .unwrap();
        match load_annotations(&path) {
            Err(Error::MalformedFile { message, .. }) => {
                assert!(message.contains("non-monotone"), "{message}");
            }
            other => panic!("expected malformed file, got {other:?}"),
        }
    }

    #[test]
    fn model_round_trip_preserves_scores() {
        let corpus = small_corpus(6, 3);
        let config = small_config();
        let pipeline = train_pipeline(&corpus, &config, &TrainConfig::default()).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &pipeline, &ConfigFile::default()).unwrap();
        let (loaded, _) = load_model(&path).unwrap();
        let probe = vec![0.3, -1.2, 0.8];
        assert_eq!(
            predict_with_margin(&pipeline.first_layer, &probe).unwrap(),
            predict_with_margin(&loaded.first_layer, &probe).unwrap()
        );
        assert_eq!(
            pipeline.second_layer.weights(),
            loaded.second_layer.weights()
        );
    }

    #[test]
    fn train_pipeline_produces_consistent_dims() {
        let corpus = small_corpus(6, 5);
        let config = small_config();
        let pipeline = train_pipeline(&corpus, &config, &TrainConfig::default()).unwrap();
        assert_eq!(pipeline.first_layer.input_dim(), 3);
        // (2w + 1) * m with w = 1 scale, m = 3
        assert_eq!(pipeline.second_layer.input_dim(), 9);
        assert!(pipeline
            .second_layer
            .weights()
            .iter()
            .flatten()
            .all(|w| w.is_finite()));
    }

    #[test]
    fn leave_one_sequence_out_folds_run() {
        let corpus = small_corpus(4, 9);
        let config = ParserConfig {
            folds: 4,
            ..small_config()
        };
        let pipeline = train_pipeline(&corpus, &config, &TrainConfig::default()).unwrap();
        assert!(pipeline
            .first_layer
            .weights()
            .iter()
            .flatten()
            .all(|w| w.is_finite()));
    }

    #[test]
    fn clipping_rules() {
        let mut skipped = Vec::new();
        // too short: skipped and reported
        assert!(clip_segment(Segment::new(0, 3).unwrap(), 4, 8, &mut skipped).is_empty());
        assert_eq!(skipped.len(), 1);
        // in range: unchanged
        assert_eq!(
            clip_segment(Segment::new(0, 8).unwrap(), 4, 8, &mut skipped),
            vec![Segment::new(0, 8).unwrap()]
        );
        // long: l_max chunks, short remainder merged into the last chunk
        assert_eq!(
            clip_segment(Segment::new(0, 18).unwrap(), 4, 8, &mut skipped),
            vec![Segment::new(0, 8).unwrap(), Segment::new(8, 18).unwrap()]
        );
        // long with remainder >= l_min: own chunk
        assert_eq!(
            clip_segment(Segment::new(0, 20).unwrap(), 4, 8, &mut skipped),
            vec![
                Segment::new(0, 8).unwrap(),
                Segment::new(8, 16).unwrap(),
                Segment::new(16, 20).unwrap()
            ]
        );
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempdir().unwrap();
        let corpus = small_corpus(3, 7);
        write_dataset(dir.path(), &corpus.items, &corpus.label_space).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.items.len(), 3);
        assert_eq!(loaded.label_space, corpus.label_space);
        for ((a, pa), (b, pb)) in corpus.items.iter().zip(&loaded.items) {
            assert_eq!(a.len(), b.len());
            assert_eq!(pa.breakpoints, pb.breakpoints);
            assert_eq!(pa.labels, pb.labels);
        }
    }

    #[test]
    fn config_defaults() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, "{}").unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(config.l_min, 40);
        assert_eq!(config.l_max, 400);
        assert_eq!(config.scales, vec![75, 150, 225, 300]);
        assert_eq!(config.folds, 5);
        assert_eq!(config.penalty, 0.0);

        fs::write(&path, r#"{"l_min": 10, "l_max": 15}"#).unwrap();
        assert!(matches!(load_config(&path), Err(Error::InvalidConfig(_))));
    }
}
