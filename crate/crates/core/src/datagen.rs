//! Deterministic synthetic sequence generator with ground-truth parses.
//!
//! Supports a context-coupled regime: a pair of classes shares one
//! prototype (locally indistinguishable) but each member is always
//! surrounded by its own distinct neighbor classes, so only temporal
//! context separates them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core_types::{FrameSequence, Parse};
use crate::{Error, Real, Result};

/// A coupled class pair plus the neighbor classes that disambiguate its
/// members: every generated segment of `pair.0` is preceded by
/// `neighbors.0 .0` and followed by `neighbors.0 .1`; same for `pair.1`
/// with `neighbors.1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingRule {
    pub pair: (usize, usize),
    pub neighbors: ((usize, usize), (usize, usize)),
}

/// Generation parameters. With a fixed seed the output is bit-identical
/// across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec<F> {
    pub num_classes: usize,
    pub dim: usize,
    pub prototypes: Vec<Vec<F>>,
    pub noise_sigma: F,
    /// inclusive segment length range
    pub length_range: (usize, usize),
    /// inclusive range of generation draws per sequence (a coupled draw
    /// expands to three segments)
    pub segments_per_sequence: (usize, usize),
    pub num_sequences: usize,
    pub coupling: Vec<CouplingRule>,
    pub seed: u64,
}

impl<F: Real> GenSpec<F> {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("need at least 2 classes".into()));
        }
        if self.prototypes.len() != self.num_classes {
            return Err(Error::InvalidConfig(format!(
                "{} prototypes for {} classes",
                self.prototypes.len(),
                self.num_classes
            )));
        }
        for p in &self.prototypes {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: p.len(),
                });
            }
        }
        if self.length_range.0 == 0 || self.length_range.0 > self.length_range.1 {
            return Err(Error::InvalidConfig("bad segment length range".into()));
        }
        if self.segments_per_sequence.0 == 0
            || self.segments_per_sequence.0 > self.segments_per_sequence.1
        {
            return Err(Error::InvalidConfig(
                "bad segments-per-sequence range".into(),
            ));
        }
        if self.noise_sigma < F::zero() {
            return Err(Error::InvalidConfig("noise sigma must be >= 0".into()));
        }
        let mut coupled = Vec::new();
        for rule in &self.coupling {
            let (a, b) = rule.pair;
            let classes = [
                a,
                b,
                rule.neighbors.0 .0,
                rule.neighbors.0 .1,
                rule.neighbors.1 .0,
                rule.neighbors.1 .1,
            ];
            if let Some(&c) = classes.iter().find(|&&c| c >= self.num_classes) {
                return Err(Error::InfeasibleRule(format!(
                    "class {c} undefined (only {} classes)",
                    self.num_classes
                )));
            }
            if a == b {
                return Err(Error::InfeasibleRule(format!(
                    "coupled pair ({a}, {b}) must be distinct"
                )));
            }
            if rule.neighbors.0 == rule.neighbors.1 {
                return Err(Error::InfeasibleRule(format!(
                    "pair ({a}, {b}) has identical neighbor classes, nothing disambiguates"
                )));
            }
            if coupled.contains(&a) || coupled.contains(&b) {
                return Err(Error::InfeasibleRule(format!(
                    "class in pair ({a}, {b}) appears in more than one rule"
                )));
            }
            coupled.push(a);
            coupled.push(b);
        }
        Ok(())
    }
}

/// Standard normal variate via Box-Muller.
pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generates sequences with ground-truth parses. Coupled pair members
/// share the prototype of the pair's first class; within one sequence only
/// one member of each pair occurs, always wrapped by its rule's neighbors.
pub fn generate<F: Real>(spec: &GenSpec<F>) -> Result<Vec<(FrameSequence<F>, Parse<F>)>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut prototypes = spec.prototypes.clone();
    for rule in &spec.coupling {
        prototypes[rule.pair.1] = prototypes[rule.pair.0].clone();
    }
    // classes drawable as independent filler segments: neither coupled
    // nor reserved as a disambiguating neighbor
    let reserved: Vec<usize> = spec
        .coupling
        .iter()
        .flat_map(|r| {
            [
                r.pair.0,
                r.pair.1,
                r.neighbors.0 .0,
                r.neighbors.0 .1,
                r.neighbors.1 .0,
                r.neighbors.1 .1,
            ]
        })
        .collect();
    let fillers: Vec<usize> = (0..spec.num_classes)
        .filter(|c| !reserved.contains(c))
        .collect();
    if fillers.is_empty() {
        return Err(Error::InfeasibleRule("every class is coupled".into()));
    }

    let mut out = Vec::with_capacity(spec.num_sequences);
    for _ in 0..spec.num_sequences {
        // per-sequence coin flip: which member of each pair may occur
        let active: Vec<(usize, (usize, usize))> = spec
            .coupling
            .iter()
            .map(|r| {
                if rng.gen_bool(0.5) {
                    (r.pair.0, r.neighbors.0)
                } else {
                    (r.pair.1, r.neighbors.1)
                }
            })
            .collect();

        let draws = rng.gen_range(spec.segments_per_sequence.0..=spec.segments_per_sequence.1);
        let mut labels = Vec::new();
        for _ in 0..draws {
            // coupled draws get double weight so their context motif is
            // well represented
            let pick = rng.gen_range(0..fillers.len() + 2 * active.len());
            if pick < fillers.len() {
                labels.push(fillers[pick]);
            } else {
                let (class, (before, after)) = active[(pick - fillers.len()) / 2];
                labels.push(before);
                labels.push(class);
                labels.push(after);
            }
        }

        let mut breakpoints = vec![0usize];
        let mut frames: Vec<Vec<F>> = Vec::new();
        for &label in &labels {
            let len = rng.gen_range(spec.length_range.0..=spec.length_range.1);
            breakpoints.push(breakpoints.last().unwrap() + len);
            for _ in 0..len {
                let frame: Vec<F> = prototypes[label]
                    .iter()
                    .map(|p| *p + spec.noise_sigma * F::of_f64(standard_normal(&mut rng)))
                    .collect();
                frames.push(frame);
            }
        }
        let seq = FrameSequence::new(frames)?;
        let truth = Parse::new(breakpoints, labels, F::zero());
        out.push((seq, truth));
    }
    Ok(out)
}
