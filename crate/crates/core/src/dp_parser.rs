//! Dynamic-programming parser: the candidate scoring function, the forward
//! pass filling the gamma/beta/rho tables, the backward pass reconstructing
//! the optimal parse, and a brute-force reference parser used as an oracle.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use crate::context_features::{
    assemble_context_feature, build_context_cache_with_prefix, ContextCache,
};
use crate::core_types::{FrameSequence, Parse, ParserConfig, Segment};
use crate::linear_model::{predict_with_margin, score_all_classes, FramePrefixSums, LinearModel};
use crate::{Error, Real, Result};

/// Scoring contract of the DP: maps a candidate segment ending at `u`
/// with length `l` to a nonnegative confidence and a class label. Must be
/// pure and deterministic.
pub trait SegmentScorer<F> {
    fn score(&self, u: usize, l: usize) -> Result<(F, usize)>;
}

impl<F, G> SegmentScorer<F> for G
where
    G: Fn(usize, usize) -> Result<(F, usize)>,
{
    fn score(&self, u: usize, l: usize) -> Result<(F, usize)> {
        self(u, l)
    }
}

/// Forward-pass tables: gamma[u] is the optimal score of the prefix of u
/// frames (neg-infinity when no valid segmentation exists), beta[u] the
/// label and rho[u] the length of the last segment of that optimum.
#[derive(Debug, Clone)]
pub struct DpTables<F> {
    pub gamma: Vec<F>,
    pub beta: Vec<usize>,
    pub rho: Vec<usize>,
}

impl<F: Real> DpTables<F> {
    pub fn frame_count(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Scores one candidate segment through the full two-layer pipeline:
/// first-layer class scores of the segment, context feature assembly,
/// second-layer margin, then penalty subtraction clamped at zero.
pub fn score_candidate<F: Real>(
    seq: &FrameSequence<F>,
    u: usize,
    l: usize,
    first_layer: &LinearModel<F>,
    second_layer: &LinearModel<F>,
    cache: &ContextCache<F>,
    penalty: F,
) -> Result<(F, usize)> {
    if l == 0 || l > u || u > seq.len() {
        return Err(Error::InvalidCandidate { u, l });
    }
    let segment = Segment::new(u - l, u)?;
    let phi = crate::linear_model::encode_segment(seq, segment)?;
    let v_center = score_all_classes(first_layer, &phi)?;
    let psi = assemble_context_feature(cache, segment, &v_center)?;
    let (label, margin) = predict_with_margin(second_layer, &psi)?;
    Ok(((margin - penalty).max(F::zero()), label))
}

/// Forward pass: gamma[0] = 0, and for each prefix length u the best
/// candidate last segment of length l in [l_min, min(l_max, u)] with a
/// reachable remainder. Ties keep the smallest l.
pub fn parse_forward<F: Real>(
    scorer: &dyn SegmentScorer<F>,
    frame_count: usize,
    l_min: usize,
    l_max: usize,
) -> Result<DpTables<F>> {
    if l_min < 1 || l_max < l_min {
        return Err(Error::InvalidConfig(format!(
            "bad length bounds [{l_min}, {l_max}]"
        )));
    }
    let mut gamma = vec![F::neg_infinity(); frame_count + 1];
    let mut beta = vec![0usize; frame_count + 1];
    let mut rho = vec![0usize; frame_count + 1];
    gamma[0] = F::zero();

    for u in 1..=frame_count {
        for l in l_min..=l_max.min(u) {
            if gamma[u - l] == F::neg_infinity() {
                continue;
            }
            let (xi, label) = scorer.score(u, l)?;
            let candidate = xi + gamma[u - l];
            if candidate > gamma[u] {
                gamma[u] = candidate;
                beta[u] = label;
                rho[u] = l;
            }
        }
    }

    Ok(DpTables { gamma, beta, rho })
}

/// Backward pass: walks the rho chain from the sequence end back to 0,
/// collecting labels and breakpoints, then reverses both.
pub fn parse_backward<F: Real>(
    tables: &DpTables<F>,
    l_min: usize,
    l_max: usize,
) -> Result<Parse<F>> {
    let frame_count = tables.frame_count();
    if tables.gamma[frame_count] == F::neg_infinity() {
        return Err(Error::NoValidParse {
            frames: frame_count,
            l_min,
            l_max,
        });
    }
    let mut labels = Vec::new();
    let mut breakpoints = vec![frame_count];
    let mut i = frame_count;
    while i > 0 {
        labels.push(tables.beta[i]);
        i -= tables.rho[i];
        breakpoints.push(i);
    }
    labels.reverse();
    breakpoints.reverse();
    Ok(Parse::new(breakpoints, labels, tables.gamma[frame_count]))
}

/// Pipeline scorer with per-candidate memoization and a call counter.
/// Each (u, l) is computed at most once; repeat queries hit the memo.
pub struct MemoScorer<'a, F> {
    inner: Box<dyn SegmentScorer<F> + 'a>,
    memo: RefCell<HashMap<(usize, usize), (F, usize)>>,
    calls: Cell<usize>,
}

impl<'a, F: Real> MemoScorer<'a, F> {
    pub fn new(inner: Box<dyn SegmentScorer<F> + 'a>) -> Self {
        Self {
            inner,
            memo: RefCell::new(HashMap::new()),
            calls: Cell::new(0),
        }
    }

    /// Number of scorings that actually reached the wrapped scorer.
    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

impl<F: Real> SegmentScorer<F> for MemoScorer<'_, F> {
    fn score(&self, u: usize, l: usize) -> Result<(F, usize)> {
        if let Some(&hit) = self.memo.borrow().get(&(u, l)) {
            return Ok(hit);
        }
        self.calls.set(self.calls.get() + 1);
        let value = self.inner.score(u, l)?;
        self.memo.borrow_mut().insert((u, l), value);
        Ok(value)
    }
}

/// Full two-layer parse of a sequence: builds the context cache once,
/// runs the forward pass with a memoized pipeline scorer, then the
/// backward pass.
pub fn parse<F: Real>(
    seq: &FrameSequence<F>,
    first_layer: &LinearModel<F>,
    second_layer: &LinearModel<F>,
    config: &ParserConfig<F>,
) -> Result<Parse<F>> {
    let (parse, _) = parse_counted(seq, first_layer, second_layer, config)?;
    Ok(parse)
}

/// As [`parse`], also reporting how many candidates were scored.
pub fn parse_counted<F: Real>(
    seq: &FrameSequence<F>,
    first_layer: &LinearModel<F>,
    second_layer: &LinearModel<F>,
    config: &ParserConfig<F>,
) -> Result<(Parse<F>, usize)> {
    config.validate()?;
    if seq.len() < config.l_min {
        return Err(Error::SequenceTooShort {
            frames: seq.len(),
            l_min: config.l_min,
        });
    }
    if first_layer.input_dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: first_layer.input_dim(),
            got: seq.dim(),
        });
    }
    let prefix = FramePrefixSums::new(seq);
    let cache = build_context_cache_with_prefix(&prefix, first_layer, &config.scales, seq.len())?;
    if second_layer.input_dim() != cache.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: cache.feature_dim(),
            got: second_layer.input_dim(),
        });
    }
    let penalty = config.segment_penalty;
    let pipeline = move |u: usize, l: usize| -> Result<(F, usize)> {
        let segment = Segment::new(u - l, u)?;
        let phi = prefix.encode(segment)?;
        let v_center = score_all_classes(first_layer, &phi)?;
        let psi = assemble_context_feature(&cache, segment, &v_center)?;
        let (label, margin) = predict_with_margin(second_layer, &psi)?;
        Ok(((margin - penalty).max(F::zero()), label))
    };
    let scorer = MemoScorer::new(Box::new(pipeline));
    let tables = parse_forward(&scorer, seq.len(), config.l_min, config.l_max)?;
    let parse = parse_backward(&tables, config.l_min, config.l_max)?;
    Ok((parse, scorer.calls()))
}

/// Largest instance the brute-force enumerator accepts.
pub const BRUTE_FORCE_LIMIT: usize = 40;

/// Enumerates every breakpoint list tiling `frame_count` frames with
/// segment lengths in [l_min, l_max], in lexicographic order.
pub fn enumerate_segmentations(
    frame_count: usize,
    l_min: usize,
    l_max: usize,
) -> Result<Vec<Vec<usize>>> {
    if frame_count > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceGuard {
            frames: frame_count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut out = Vec::new();
    let mut stack = vec![0usize];
    fn recurse(
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        frame_count: usize,
        l_min: usize,
        l_max: usize,
    ) {
        let at = *stack.last().unwrap();
        if at == frame_count {
            out.push(stack.clone());
            return;
        }
        for l in l_min..=l_max.min(frame_count - at) {
            stack.push(at + l);
            recurse(stack, out, frame_count, l_min, l_max);
            stack.pop();
        }
    }
    recurse(&mut stack, &mut out, frame_count, l_min, l_max);
    Ok(out)
}

/// Exhaustive reference parser: scores every valid segmentation and
/// returns the best, ties resolved to the lexicographically smallest
/// breakpoint list.
pub fn brute_force_parse<F: Real>(
    scorer: &dyn SegmentScorer<F>,
    frame_count: usize,
    l_min: usize,
    l_max: usize,
) -> Result<Parse<F>> {
    let segmentations = enumerate_segmentations(frame_count, l_min, l_max)?;
    let mut best: Option<Parse<F>> = None;
    for breakpoints in segmentations {
        let mut total = F::zero();
        let mut labels = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let (xi, label) = scorer.score(w[1], w[1] - w[0])?;
            total += xi;
            labels.push(label);
        }
        // lex order of enumeration + strict comparison keeps the
        // lexicographically smallest optimum
        if best.as_ref().is_none_or(|b| total > b.total_score) {
            best = Some(Parse::new(breakpoints, labels, total));
        }
    }
    best.ok_or(Error::NoValidParse {
        frames: frame_count,
        l_min,
        l_max,
    })
}

/// Lookup-table scorer for tests and the verification suite.
#[derive(Debug, Clone)]
pub struct TableScorer<F> {
    table: HashMap<(usize, usize), (F, usize)>,
}

impl<F: Real> TableScorer<F> {
    pub fn new(table: HashMap<(usize, usize), (F, usize)>) -> Self {
        Self { table }
    }

    /// Deterministic pseudo-random table over all candidates of an
    /// instance, scores in [0, 1), labels in [0, m).
    pub fn random(frame_count: usize, l_min: usize, l_max: usize, m: usize, seed: u64) -> Self {
        let mut state = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            state.wrapping_mul(0x2545F4914F6CDD1D)
        };
        let mut table = HashMap::new();
        for u in 1..=frame_count {
            for l in l_min..=l_max.min(u) {
                let score = F::of_f64((next() >> 11) as f64 / (1u64 << 53) as f64);
                let label = (next() % m as u64) as usize;
                table.insert((u, l), (score, label));
            }
        }
        Self { table }
    }
}

impl<F: Real> SegmentScorer<F> for TableScorer<F> {
    fn score(&self, u: usize, l: usize) -> Result<(F, usize)> {
        self.table
            .get(&(u, l))
            .copied()
            .ok_or(Error::InvalidCandidate { u, l })
    }
}
