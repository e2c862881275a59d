//! Multi-class linear max-margin classifiers in the Crammer–Singer
//! formulation, trained by stochastic subgradient descent, plus the
//! segment feature encoding they consume.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core_types::{FrameSequence, LabelSpace, Segment};
use crate::{Error, Real, Result};

/// Weights of a multi-class linear classifier, one row per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<F> {
    weights: Vec<Vec<F>>,
    label_space: LabelSpace,
    input_dim: usize,
}

impl<F: Real> LinearModel<F> {
    pub fn new(weights: Vec<Vec<F>>, label_space: LabelSpace) -> Result<Self> {
        if weights.len() != label_space.num_classes() {
            return Err(Error::DimensionMismatch {
                expected: label_space.num_classes(),
                got: weights.len(),
            });
        }
        let input_dim = weights.first().map_or(0, |row| row.len());
        for row in &weights {
            if row.len() != input_dim {
                return Err(Error::DimensionMismatch {
                    expected: input_dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidConfig("non-finite weight".into()));
            }
        }
        Ok(Self {
            weights,
            label_space,
            input_dim,
        })
    }

    pub fn weights(&self) -> &[Vec<F>] {
        &self.weights
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn num_classes(&self) -> usize {
        self.label_space.num_classes()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
}

/// Training hyperparameters for the subgradient solver.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<F> {
    pub lambda: F,
    pub epochs: usize,
    pub seed: u64,
}

impl<F: Real> TrainConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= F::zero() {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

impl<F: Real> Default for TrainConfig<F> {
    fn default() -> Self {
        Self {
            lambda: F::of_f64(0.01),
            epochs: 20,
            seed: 0,
        }
    }
}

/// Encodes a segment as the mean of its frame vectors, L2-normalized.
/// A zero mean is returned unnormalized.
pub fn encode_segment<F: Real>(seq: &FrameSequence<F>, segment: Segment) -> Result<Vec<F>> {
    if segment.end > seq.len() {
        return Err(Error::SegmentOutOfBounds {
            start: segment.start,
            end: segment.end,
            frames: seq.len(),
        });
    }
    let dim = seq.dim();
    let mut mean = vec![F::zero(); dim];
    for f in segment.start..segment.end {
        for (m, v) in mean.iter_mut().zip(seq.frame(f)) {
            *m += *v;
        }
    }
    let inv_len = F::one() / F::of_usize(segment.len());
    for m in mean.iter_mut() {
        *m *= inv_len;
    }
    normalize(&mut mean);
    Ok(mean)
}

fn normalize<F: Real>(v: &mut [F]) {
    let norm_sq: F = v.iter().map(|x| *x * *x).sum();
    if norm_sq > F::zero() {
        let inv = F::one() / norm_sq.sqrt();
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
}

/// Per-frame prefix sums, so a segment mean costs O(D) instead of O(len * D).
/// Yields the same encoding as [`encode_segment`] up to summation order.
#[derive(Debug, Clone)]
pub struct FramePrefixSums<F> {
    sums: Vec<Vec<F>>, // sums[i] = sum of frames [0, i)
    dim: usize,
}

impl<F: Real> FramePrefixSums<F> {
    pub fn new(seq: &FrameSequence<F>) -> Self {
        let dim = seq.dim();
        let mut sums = Vec::with_capacity(seq.len() + 1);
        sums.push(vec![F::zero(); dim]);
        for f in 0..seq.len() {
            let prev = sums.last().unwrap();
            let mut next = prev.clone();
            for (n, v) in next.iter_mut().zip(seq.frame(f)) {
                *n += *v;
            }
            sums.push(next);
        }
        Self { sums, dim }
    }

    pub fn frame_count(&self) -> usize {
        self.sums.len() - 1
    }

    /// Mean of frames [start, end), L2-normalized (zero mean unnormalized).
    pub fn encode(&self, segment: Segment) -> Result<Vec<F>> {
        if segment.end > self.frame_count() {
            return Err(Error::SegmentOutOfBounds {
                start: segment.start,
                end: segment.end,
                frames: self.frame_count(),
            });
        }
        let inv_len = F::one() / F::of_usize(segment.len());
        let lo = &self.sums[segment.start];
        let hi = &self.sums[segment.end];
        let mut mean: Vec<F> = (0..self.dim).map(|d| (hi[d] - lo[d]) * inv_len).collect();
        normalize(&mut mean);
        Ok(mean)
    }
}

/// Trains a Crammer–Singer multi-class SVM by stochastic subgradient
/// descent on the hinge form of the objective, Pegasos-style step size
/// 1/(lambda * t). Deterministic under the given seed.
pub fn train_multiclass_svm<F: Real>(
    features: &[Vec<F>],
    labels: &[usize],
    label_space: &LabelSpace,
    config: &TrainConfig<F>,
) -> Result<LinearModel<F>> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let m = label_space.num_classes();
    let dim = features[0].len();
    for f in features {
        if f.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
    }
    let mut counts = vec![0usize; m];
    for &y in labels {
        if y >= m {
            return Err(Error::LabelOutOfRange {
                label: y,
                classes: m,
            });
        }
        counts[y] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::ClassWithoutExamples { class });
    }

    let mut weights = vec![vec![F::zero(); dim]; m];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let lambda = config.lambda;
    let mut t = 0usize;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = F::one() / (lambda * F::of_usize(t));
            let x = &features[i];
            let y = labels[i];

            // most violating competitor: argmax over classes != y
            let mut best_other = usize::MAX;
            let mut best_score = F::neg_infinity();
            let mut true_score = F::zero();
            for (c, row) in weights.iter().enumerate() {
                let s = dot(row, x);
                if c == y {
                    true_score = s;
                } else if s > best_score {
                    best_score = s;
                    best_other = c;
                }
            }
            let violated = F::one() + best_score - true_score > F::zero();

            let shrink = F::one() - eta * lambda;
            for row in weights.iter_mut() {
                for w in row.iter_mut() {
                    *w *= shrink;
                }
            }
            if violated {
                for (w, v) in weights[y].iter_mut().zip(x) {
                    *w += eta * *v;
                }
                for (w, v) in weights[best_other].iter_mut().zip(x) {
                    *w -= eta * *v;
                }
            }
        }
    }

    LinearModel::new(weights, label_space.clone())
}

/// Value of the regularized Crammer–Singer hinge objective on a dataset.
pub fn hinge_objective<F: Real>(
    model: &LinearModel<F>,
    features: &[Vec<F>],
    labels: &[usize],
    lambda: F,
) -> F {
    let reg: F = model
        .weights()
        .iter()
        .flat_map(|row| row.iter())
        .map(|w| *w * *w)
        .sum();
    let mut loss = F::zero();
    for (x, &y) in features.iter().zip(labels) {
        let scores = score_all_classes(model, x).unwrap();
        let true_score = scores[y];
        let best_other = scores
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != y)
            .map(|(_, &s)| s)
            .fold(F::neg_infinity(), F::max);
        loss += (F::one() + best_other - true_score).max(F::zero());
    }
    lambda / F::of_f64(2.0) * reg + loss / F::of_usize(features.len())
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// One score per class: the dot product of each weight row with the feature.
pub fn score_all_classes<F: Real>(model: &LinearModel<F>, feature: &[F]) -> Result<Vec<F>> {
    if feature.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: feature.len(),
        });
    }
    Ok(model
        .weights()
        .iter()
        .map(|row| dot(row, feature))
        .collect())
}

/// Argmax label (ties broken by lowest class index) and the margin between
/// the winner and the runner-up, which is always >= 0.
pub fn predict_with_margin<F: Real>(model: &LinearModel<F>, feature: &[F]) -> Result<(usize, F)> {
    let scores = score_all_classes(model, feature)?;
    margin_of_scores(&scores)
}

/// Margin rule applied to a raw score vector.
pub fn margin_of_scores<F: Real>(scores: &[F]) -> Result<(usize, F)> {
    if scores.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "margin needs at least 2 classes, got {}",
            scores.len()
        )));
    }
    let mut best = 0usize;
    for (c, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = c;
        }
    }
    let runner_up = scores
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != best)
        .map(|(_, &s)| s)
        .fold(F::neg_infinity(), F::max);
    Ok((best, scores[best] - runner_up))
}
