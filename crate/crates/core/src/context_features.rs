//! Multi-scale tile score cache and the temporal context feature psi:
//! per-class max-pooled first-layer scores of all fixed-size tiles before
//! and after a candidate segment, concatenated with the candidate's own
//! class scores.

use crate::core_types::{FrameSequence, Segment};
use crate::linear_model::{score_all_classes, FramePrefixSums, LinearModel};
use crate::{Error, Real, Result};

/// Per-scale tile scores plus prefix/suffix per-class maxima for O(1)
/// pooling queries. Immutable once built.
#[derive(Debug, Clone)]
pub struct ContextCache<F> {
    scales: Vec<usize>,
    num_classes: usize,
    frame_count: usize,
    // per scale: tile j covers [(j)·l, (j+1)·l), 0-based
    tile_scores: Vec<Vec<Vec<F>>>,
    prefix_max: Vec<Vec<Vec<F>>>, // prefix_max[s][j] = per-class max over tiles 0..=j
    suffix_max: Vec<Vec<Vec<F>>>, // suffix_max[s][j] = per-class max over tiles j..
}

impl<F: Real> ContextCache<F> {
    /// Builds a cache directly from precomputed tile score vectors
    /// (one m-vector per tile per scale).
    pub fn from_tile_scores(
        scales: Vec<usize>,
        num_classes: usize,
        frame_count: usize,
        tile_scores: Vec<Vec<Vec<F>>>,
    ) -> Result<Self> {
        if tile_scores.len() != scales.len() {
            return Err(Error::DimensionMismatch {
                expected: scales.len(),
                got: tile_scores.len(),
            });
        }
        for (scale, tiles) in scales.iter().zip(&tile_scores) {
            let expected = frame_count / scale;
            if tiles.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    got: tiles.len(),
                });
            }
            for t in tiles {
                if t.len() != num_classes {
                    return Err(Error::DimensionMismatch {
                        expected: num_classes,
                        got: t.len(),
                    });
                }
            }
        }

        let mut prefix_max = Vec::with_capacity(scales.len());
        let mut suffix_max = Vec::with_capacity(scales.len());
        for tiles in &tile_scores {
            let n = tiles.len();
            let mut pre: Vec<Vec<F>> = Vec::with_capacity(n);
            for (j, t) in tiles.iter().enumerate() {
                let mut row = t.clone();
                if j > 0 {
                    for (r, p) in row.iter_mut().zip(&pre[j - 1]) {
                        *r = r.max(*p);
                    }
                }
                pre.push(row);
            }
            let mut suf: Vec<Vec<F>> = vec![Vec::new(); n];
            for j in (0..n).rev() {
                let mut row = tiles[j].clone();
                if j + 1 < n {
                    for (r, s) in row.iter_mut().zip(&suf[j + 1]) {
                        *r = r.max(*s);
                    }
                }
                suf[j] = row;
            }
            prefix_max.push(pre);
            suffix_max.push(suf);
        }

        Ok(Self {
            scales,
            num_classes,
            frame_count,
            tile_scores,
            prefix_max,
            suffix_max,
        })
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn num_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn tile_scores(&self) -> &[Vec<Vec<F>>] {
        &self.tile_scores
    }

    /// Dimension of the assembled context feature: (2w + 1) * m.
    pub fn feature_dim(&self) -> usize {
        (2 * self.scales.len() + 1) * self.num_classes
    }
}

/// Scores every full tile at every scale with the first-layer model.
/// Tail frames shorter than a tile are not tiled at that scale.
pub fn build_context_cache<F: Real>(
    seq: &FrameSequence<F>,
    first_layer: &LinearModel<F>,
    scales: &[usize],
) -> Result<ContextCache<F>> {
    if first_layer.input_dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: first_layer.input_dim(),
            got: seq.dim(),
        });
    }
    let prefix = FramePrefixSums::new(seq);
    build_context_cache_with_prefix(&prefix, first_layer, scales, seq.len())
}

/// Variant reusing already-computed frame prefix sums.
pub fn build_context_cache_with_prefix<F: Real>(
    prefix: &FramePrefixSums<F>,
    first_layer: &LinearModel<F>,
    scales: &[usize],
    frame_count: usize,
) -> Result<ContextCache<F>> {
    let mut tile_scores = Vec::with_capacity(scales.len());
    for &scale in scales {
        let tiles = frame_count / scale;
        let mut scores = Vec::with_capacity(tiles);
        for j in 0..tiles {
            let seg = Segment::new(j * scale, (j + 1) * scale)?;
            let phi = prefix.encode(seg)?;
            scores.push(score_all_classes(first_layer, &phi)?);
        }
        tile_scores.push(scores);
    }
    ContextCache::from_tile_scores(
        scales.to_vec(),
        first_layer.num_classes(),
        frame_count,
        tile_scores,
    )
}

/// Per-class max over tiles lying entirely at or before `boundary`,
/// one m-block per scale. Scales with no qualifying tile contribute a
/// zero block.
pub fn pool_before<F: Real>(cache: &ContextCache<F>, boundary: usize) -> Vec<F> {
    let m = cache.num_classes;
    let mut out = Vec::with_capacity(cache.scales.len() * m);
    for (s, &scale) in cache.scales.iter().enumerate() {
        let qualifying = (boundary / scale).min(cache.prefix_max[s].len());
        if qualifying == 0 {
            out.extend(std::iter::repeat_n(F::zero(), m));
        } else {
            out.extend_from_slice(&cache.prefix_max[s][qualifying - 1]);
        }
    }
    out
}

/// Per-class max over tiles starting at or after `boundary`, one m-block
/// per scale; zero block when no tile qualifies.
pub fn pool_after<F: Real>(cache: &ContextCache<F>, boundary: usize) -> Vec<F> {
    let m = cache.num_classes;
    let mut out = Vec::with_capacity(cache.scales.len() * m);
    for (s, &scale) in cache.scales.iter().enumerate() {
        // first tile index j with j*scale >= boundary
        let first = boundary.div_ceil(scale);
        if first < cache.suffix_max[s].len() {
            out.extend_from_slice(&cache.suffix_max[s][first]);
        } else {
            out.extend(std::iter::repeat_n(F::zero(), m));
        }
    }
    out
}

/// Concatenates [pool_before(start), v_center, pool_after(end)].
pub fn assemble_context_feature<F: Real>(
    cache: &ContextCache<F>,
    segment: Segment,
    v_center: &[F],
) -> Result<Vec<F>> {
    if segment.end > cache.frame_count {
        return Err(Error::SegmentOutOfBounds {
            start: segment.start,
            end: segment.end,
            frames: cache.frame_count,
        });
    }
    if v_center.len() != cache.num_classes {
        return Err(Error::DimensionMismatch {
            expected: cache.num_classes,
            got: v_center.len(),
        });
    }
    let mut psi = pool_before(cache, segment.start);
    psi.extend_from_slice(v_center);
    psi.extend(pool_after(cache, segment.end));
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_types::LabelSpace;
    use proptest::prelude::*;

    fn cache_one_scale(
        scale: usize,
        frame_count: usize,
        tiles: Vec<Vec<f64>>,
    ) -> ContextCache<f64> {
        let m = tiles.first().map_or(2, |t| t.len());
        ContextCache::from_tile_scores(vec![scale], m, frame_count, vec![tiles]).unwrap()
    }

    /// Naive pooling by rescanning all tiles; the oracle the fast path
    /// must match bit for bit.
    fn naive_pool_before(cache: &ContextCache<f64>, boundary: usize) -> Vec<f64> {
        let m = cache.num_classes();
        let mut out = Vec::new();
        for (s, &scale) in cache.scales().iter().enumerate() {
            let mut block = vec![0.0; m];
            let mut any = false;
            for (j, t) in cache.tile_scores()[s].iter().enumerate() {
                if (j + 1) * scale <= boundary {
                    if !any {
                        block = t.clone();
                        any = true;
                    } else {
                        for (b, v) in block.iter_mut().zip(t) {
                            *b = b.max(*v);
                        }
                    }
                }
            }
            out.extend(block);
        }
        out
    }

    fn naive_pool_after(cache: &ContextCache<f64>, boundary: usize) -> Vec<f64> {
        let m = cache.num_classes();
        let mut out = Vec::new();
        for (s, &scale) in cache.scales().iter().enumerate() {
            let mut block = vec![0.0; m];
            let mut any = false;
            for (j, t) in cache.tile_scores()[s].iter().enumerate() {
                if j * scale >= boundary {
                    if !any {
                        block = t.clone();
                        any = true;
                    } else {
                        for (b, v) in block.iter_mut().zip(t) {
                            *b = b.max(*v);
                        }
                    }
                }
            }
            out.extend(block);
        }
        out
    }

    #[test]
    fn tile_layout_ten_frames_scale_three() {
        let ls = LabelSpace::new(vec!["a".into(), "b".into()], 0).unwrap();
        let model = LinearModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ls).unwrap();
        let frames: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 1.0]).collect();
        let seq = FrameSequence::new(frames).unwrap();
        let cache = build_context_cache(&seq, &model, &[3]).unwrap();
        assert_eq!(cache.tile_scores()[0].len(), 3); // frame 9 untiled
    }

    #[test]
    fn short_sequence_has_zero_tiles() {
        let ls = LabelSpace::new(vec!["a".into(), "b".into()], 0).unwrap();
        let model = LinearModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ls).unwrap();
        let seq = FrameSequence::new(vec![vec![1.0, 0.0]; 4]).unwrap();
        let cache = build_context_cache(&seq, &model, &[75, 150, 225, 300]).unwrap();
        for tiles in cache.tile_scores() {
            assert!(tiles.is_empty());
        }
        // pooling anywhere yields all zeros
        assert_eq!(pool_before(&cache, 4), vec![0.0; 8]);
        assert_eq!(pool_after(&cache, 0), vec![0.0; 8]);
    }

    #[test]
    fn pool_before_examples() {
        let cache = cache_one_scale(2, 4, vec![vec![1.0, 5.0], vec![3.0, 2.0]]);
        assert_eq!(pool_before(&cache, 0), vec![0.0, 0.0]);
        assert_eq!(pool_before(&cache, 4), vec![3.0, 5.0]);
        assert_eq!(pool_before(&cache, 2), vec![1.0, 5.0]);
    }

    #[test]
    fn pool_after_examples() {
        let cache = cache_one_scale(2, 4, vec![vec![1.0, 5.0], vec![3.0, 2.0]]);
        assert_eq!(pool_after(&cache, 4), vec![0.0, 0.0]);
        assert_eq!(pool_after(&cache, 0), vec![3.0, 5.0]);
        assert_eq!(pool_after(&cache, 1), vec![3.0, 2.0]);
    }

    #[test]
    fn assemble_concatenation_order() {
        let cache = cache_one_scale(10, 8, vec![]); // no tiles: zero context
        let psi =
            assemble_context_feature(&cache, Segment::new(0, 8).unwrap(), &[7.0, 1.0]).unwrap();
        assert_eq!(psi, vec![0.0, 0.0, 7.0, 1.0, 0.0, 0.0]);
        assert_eq!(psi.len(), cache.feature_dim());
    }

    #[test]
    fn whole_sequence_segment_has_empty_context() {
        let cache = cache_one_scale(2, 6, vec![vec![1.0, 2.0]; 3]);
        let psi =
            assemble_context_feature(&cache, Segment::new(0, 6).unwrap(), &[4.0, 5.0]).unwrap();
        assert_eq!(psi, vec![0.0, 0.0, 4.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn prefix_max_matches_rescan() {
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((rng_state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let tiles: Vec<Vec<f64>> = (0..9).map(|_| (0..3).map(|_| next()).collect()).collect();
        let cache = ContextCache::from_tile_scores(vec![4], 3, 37, vec![tiles.clone()]).unwrap();
        for j in 0..tiles.len() {
            for c in 0..3 {
                let naive = tiles[..=j]
                    .iter()
                    .map(|t| t[c])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(cache.prefix_max[0][j][c], naive);
            }
        }
    }

    proptest! {
        #[test]
        fn pooling_matches_naive(
            scales in proptest::collection::vec(1usize..8, 1..4),
            m in 2usize..6,
            frame_count in 1usize..60,
            seed in 0u64..1000,
        ) {
            let mut state = seed.wrapping_add(1);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
            };
            let tile_scores: Vec<Vec<Vec<f64>>> = scales
                .iter()
                .map(|&s| (0..frame_count / s).map(|_| (0..m).map(|_| next()).collect()).collect())
                .collect();
            let cache =
                ContextCache::from_tile_scores(scales.clone(), m, frame_count, tile_scores).unwrap();
            for boundary in 0..=frame_count {
                prop_assert_eq!(pool_before(&cache, boundary), naive_pool_before(&cache, boundary));
                prop_assert_eq!(pool_after(&cache, boundary), naive_pool_after(&cache, boundary));
            }
        }

        #[test]
        fn pooling_is_monotone_in_boundary(
            frame_count in 4usize..40,
            seed in 0u64..1000,
        ) {
            let mut state = seed.wrapping_add(99);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
            };
            let tiles: Vec<Vec<f64>> =
                (0..frame_count / 2).map(|_| vec![next(), next()]).collect();
            let cache = ContextCache::from_tile_scores(vec![2], 2, frame_count, vec![tiles]).unwrap();
            for b in 0..frame_count {
                let lo = pool_before(&cache, b);
                let hi = pool_before(&cache, b + 1);
                // zero sentinel blocks may exceed negative tile maxima, so
                // monotonicity is asserted only between non-empty regions
                if b / 2 >= 1 {
                    for (l, h) in lo.iter().zip(&hi) {
                        prop_assert!(h >= l);
                    }
                }
                let alo = pool_after(&cache, b + 1);
                let ahi = pool_after(&cache, b);
                if (b + 1).div_ceil(2) < cache.tile_scores()[0].len() {
                    for (l, h) in alo.iter().zip(&ahi) {
                        prop_assert!(h >= l);
                    }
                }
            }
        }
    }
}
