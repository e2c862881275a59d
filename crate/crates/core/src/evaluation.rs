//! Per-frame accuracy and confusion diagnostics for comparing parsers.

use crate::core_types::Parse;
use crate::{Error, Real, Result};

/// Expands a parse to one label per frame; output length equals the last
/// breakpoint.
pub fn parse_to_frame_labels<F: Real>(parse: &Parse<F>) -> Result<Vec<usize>> {
    if parse.breakpoints.len() < 2
        || parse.labels.len() != parse.breakpoints.len() - 1
        || parse.breakpoints.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidParse(
            "parse_to_frame_labels requires a structurally valid parse".into(),
        ));
    }
    let frames = *parse.breakpoints.last().unwrap() - parse.breakpoints[0];
    let mut out = Vec::with_capacity(frames);
    for (seg, label) in parse.segments() {
        out.extend(std::iter::repeat_n(label, seg.len()));
    }
    Ok(out)
}

/// Fraction of frames with matching labels.
pub fn per_frame_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// As [`per_frame_accuracy`] but skipping frames whose ground truth is the
/// background class. Errors when no foreground frame exists.
pub fn per_frame_accuracy_excluding_background(
    predicted: &[usize],
    truth: &[usize],
    background: usize,
) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut hits = 0usize;
    let mut total = 0usize;
    for (p, t) in predicted.iter().zip(truth) {
        if *t != background {
            total += 1;
            if p == t {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyLabels);
    }
    Ok(hits as f64 / total as f64)
}

/// m-by-m count matrix: entry (t, p) counts frames with truth t predicted p.
pub fn confusion_matrix(predicted: &[usize], truth: &[usize], m: usize) -> Result<Vec<Vec<usize>>> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut matrix = vec![vec![0usize; m]; m];
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= m {
            return Err(Error::LabelOutOfRange {
                label: p,
                classes: m,
            });
        }
        if t >= m {
            return Err(Error::LabelOutOfRange {
                label: t,
                classes: m,
            });
        }
        matrix[t][p] += 1;
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frame_labels_from_breakpoints() {
        let parse = Parse::new(vec![0, 2, 5], vec![0, 1], 0.0);
        assert_eq!(parse_to_frame_labels(&parse).unwrap(), vec![0, 0, 1, 1, 1]);
    }

    #[test]
    fn single_segment_constant_labels() {
        let parse = Parse::new(vec![0, 4], vec![2], 0.0);
        assert_eq!(parse_to_frame_labels(&parse).unwrap(), vec![2; 4]);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(per_frame_accuracy(&[0, 1, 0], &[0, 1, 0]).unwrap(), 1.0);
        assert_eq!(
            per_frame_accuracy(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(),
            0.75
        );
        assert!(per_frame_accuracy(&[0], &[0, 1]).is_err());
        assert!(per_frame_accuracy(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_excluding_background() {
        // background = 0; only foreground frames counted
        let acc = per_frame_accuracy_excluding_background(&[0, 1, 2, 1], &[0, 1, 1, 1], 0).unwrap();
        assert_eq!(acc, 2.0 / 3.0);
        assert!(per_frame_accuracy_excluding_background(&[0, 0], &[0, 0], 0).is_err());
    }

    #[test]
    fn confusion_identities() {
        let pred = [0, 0, 1, 2, 2, 1];
        let truth = [0, 1, 1, 2, 2, 2];
        let m = 3;
        let cm = confusion_matrix(&pred, &truth, m).unwrap();
        let total: usize = cm.iter().flatten().sum();
        assert_eq!(total, pred.len());
        let trace: usize = (0..m).map(|i| cm[i][i]).sum();
        let acc = per_frame_accuracy(&pred, &truth).unwrap();
        assert_eq!(trace as f64 / total as f64, acc);
        for (t, row) in cm.iter().enumerate() {
            let row: usize = row.iter().sum();
            assert_eq!(row, truth.iter().filter(|&&x| x == t).count());
        }
    }

    #[test]
    fn identical_arrays_are_diagonal() {
        let x = [0, 1, 2, 1, 0];
        let cm = confusion_matrix(&x, &x, 3).unwrap();
        for (t, row) in cm.iter().enumerate() {
            for (p, &cell) in row.iter().enumerate() {
                if t != p {
                    assert_eq!(cell, 0);
                }
            }
        }
    }

    #[test]
    fn out_of_range_label_rejected() {
        assert!(confusion_matrix(&[3], &[0], 3).is_err());
    }

    proptest! {
        #[test]
        fn accuracy_is_symmetric(
            pair in proptest::collection::vec((0usize..4, 0usize..4), 1..50)
        ) {
            let (p, t): (Vec<_>, Vec<_>) = pair.into_iter().unzip();
            prop_assert_eq!(
                per_frame_accuracy(&p, &t).unwrap(),
                per_frame_accuracy(&t, &p).unwrap()
            );
            prop_assert_eq!(per_frame_accuracy(&p, &p).unwrap(), 1.0);
        }

        #[test]
        fn round_trip_recovers_breakpoints(
            lengths in proptest::collection::vec(1usize..6, 1..8),
            seed in 0u64..100,
        ) {
            // adjacent-distinct labels so label changes mark breakpoints
            let mut labels = Vec::new();
            let mut state = seed;
            for i in 0..lengths.len() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let mut l = (state >> 33) as usize % 4;
                if i > 0 && l == labels[i - 1] {
                    l = (l + 1) % 4;
                }
                labels.push(l);
            }
            let mut breakpoints = vec![0usize];
            for &len in &lengths {
                breakpoints.push(breakpoints.last().unwrap() + len);
            }
            let parse = Parse::new(breakpoints.clone(), labels, 0.0);
            let frames = parse_to_frame_labels(&parse).unwrap();
            let mut recovered = vec![0usize];
            for f in 1..frames.len() {
                if frames[f] != frames[f - 1] {
                    recovered.push(f);
                }
            }
            recovered.push(frames.len());
            prop_assert_eq!(recovered, breakpoints);
        }
    }
}
