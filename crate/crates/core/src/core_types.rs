//! Domain types shared by all modules: frame sequences, segments, label
//! spaces, parses, and the validity checks the parsing constraints impose.

use crate::{Error, Real, Result};

/// An ordered sequence of fixed-dimension per-frame feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<F> {
    frames: Vec<Vec<F>>,
    dim: usize,
}

impl<F: Real> FrameSequence<F> {
    pub fn new(frames: Vec<Vec<F>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidSequence("no frames".into()));
        }
        let dim = frames[0].len();
        if dim == 0 {
            return Err(Error::InvalidSequence("zero-dimensional frames".into()));
        }
        for (i, f) in frames.iter().enumerate() {
            if f.len() != dim {
                return Err(Error::InvalidSequence(format!(
                    "frame {i} has dimension {}, expected {dim}",
                    f.len()
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSequence(format!(
                    "frame {i} contains a non-finite value"
                )));
            }
        }
        Ok(Self { frames, dim })
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one frame
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self, i: usize) -> &[F] {
        &self.frames[i]
    }

    pub fn frames(&self) -> &[Vec<F>] {
        &self.frames
    }
}

/// Half-open frame interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidParse(format!(
                "segment start {start} not before end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &Segment) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// The set of action classes, including the designated background class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpace {
    class_names: Vec<String>,
    background_index: usize,
}

impl LabelSpace {
    pub fn new(class_names: Vec<String>, background_index: usize) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "label space needs at least 2 classes, got {}",
                class_names.len()
            )));
        }
        for (i, a) in class_names.iter().enumerate() {
            if class_names[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("duplicate class name '{a}'")));
            }
        }
        if background_index >= class_names.len() {
            return Err(Error::InvalidConfig(format!(
                "background index {background_index} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            class_names,
            background_index,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.class_names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.class_names[index]
    }

    pub fn background_index(&self) -> usize {
        self.background_index
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.class_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }
}

/// A complete segmentation: breakpoints B_0 < ... < B_K with one class
/// label per segment [B_i, B_{i+1}) and the total confidence score.
#[derive(Debug, Clone, PartialEq)]
pub struct Parse<F> {
    pub breakpoints: Vec<usize>,
    pub labels: Vec<usize>,
    pub total_score: F,
}

impl<F: Real> Parse<F> {
    pub fn new(breakpoints: Vec<usize>, labels: Vec<usize>, total_score: F) -> Self {
        Self {
            breakpoints,
            labels,
            total_score,
        }
    }

    pub fn num_segments(&self) -> usize {
        self.labels.len()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Segment, usize)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.labels.iter())
            .map(|(w, &label)| {
                (
                    Segment {
                        start: w[0],
                        end: w[1],
                    },
                    label,
                )
            })
    }
}

/// Parser hyperparameters: segment length bounds, context tile scales,
/// per-segment penalty, regularization trade-off, and fold count for
/// cross-fitted second-layer training.
#[derive(Debug, Clone, PartialEq)]
pub struct ParserConfig<F> {
    pub l_min: usize,
    pub l_max: usize,
    pub scales: Vec<usize>,
    pub segment_penalty: F,
    pub lambda: F,
    pub folds: usize,
}

impl<F: Real> ParserConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.l_min < 1 {
            return Err(Error::InvalidConfig("l_min must be at least 1".into()));
        }
        if self.l_max < self.l_min {
            return Err(Error::InvalidConfig(format!(
                "l_max ({}) below l_min ({})",
                self.l_max, self.l_min
            )));
        }
        // l_max >= 2*l_min makes the reachable segment-length sums
        // contiguous, so any total length >= l_min is parseable.
        if self.l_max < 2 * self.l_min {
            return Err(Error::InvalidConfig(format!(
                "l_max ({}) must be at least 2 * l_min ({})",
                self.l_max, self.l_min
            )));
        }
        if self.scales.contains(&0) {
            return Err(Error::InvalidConfig("scales must be at least 1".into()));
        }
        if self.segment_penalty < F::zero() {
            return Err(Error::InvalidConfig("segment_penalty must be >= 0".into()));
        }
        if self.lambda <= F::zero() {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        Ok(())
    }
}

impl<F: Real> Default for ParserConfig<F> {
    fn default() -> Self {
        Self {
            l_min: 40,
            l_max: 400,
            scales: vec![75, 150, 225, 300],
            segment_penalty: F::zero(),
            lambda: F::of_f64(1.0),
            folds: 5,
        }
    }
}

/// Per-constraint outcome of checking a parse against the segmentation
/// constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub endpoints_pinned: bool,
    pub strictly_monotone: bool,
    pub lengths_in_bounds: bool,
    pub label_count_consistent: bool,
    pub violations: Vec<String>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.endpoints_pinned
            && self.strictly_monotone
            && self.lengths_in_bounds
            && self.label_count_consistent
    }
}

/// Checks a parse against the constraints: endpoints pinned to 0 and
/// `frame_count`, strictly increasing breakpoints, per-segment lengths in
/// `[l_min, l_max]`, and one label per segment. Always returns a report.
pub fn validate_parse<F: Real>(
    parse: &Parse<F>,
    frame_count: usize,
    config: &ParserConfig<F>,
) -> ValidityReport {
    let mut violations = Vec::new();
    let bp = &parse.breakpoints;

    let endpoints_pinned = bp.first() == Some(&0) && bp.last() == Some(&frame_count);
    if !endpoints_pinned {
        violations.push(format!(
            "breakpoints must start at 0 and end at {frame_count}, got {:?}..{:?}",
            bp.first(),
            bp.last()
        ));
    }

    let strictly_monotone = bp.windows(2).all(|w| w[0] < w[1]);
    if !strictly_monotone {
        violations.push("breakpoints not strictly increasing".into());
    }

    let mut lengths_in_bounds = true;
    if strictly_monotone {
        for w in bp.windows(2) {
            let len = w[1] - w[0];
            if len < config.l_min || len > config.l_max {
                lengths_in_bounds = false;
                violations.push(format!(
                    "segment [{}, {}) has length {len} outside [{}, {}]",
                    w[0], w[1], config.l_min, config.l_max
                ));
            }
        }
    } else {
        lengths_in_bounds = false;
    }

    let label_count_consistent = !bp.is_empty() && parse.labels.len() == bp.len() - 1;
    if !label_count_consistent {
        violations.push(format!(
            "{} labels for {} breakpoints",
            parse.labels.len(),
            bp.len()
        ));
    }

    ValidityReport {
        endpoints_pinned,
        strictly_monotone,
        lengths_in_bounds,
        label_count_consistent,
        violations,
    }
}
