//! The reduced softmax unit: a comparator tree that returns the index of the
//! largest logit.
//!
//! Softmax divides every `e^(x_i)` by the same positive sum and `exp` is
//! strictly increasing, so the largest logit is always the most probable
//! class. An inference-only output stage can therefore drop the exponentials,
//! the adder tree and the dividers and keep only `k - 1` comparators.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fixed::{Fixed, QFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TieBreak {
    /// On equal inputs the comparator forwards its left (lower-index) operand.
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparatorTreeConfig {
    k: usize,
    word_format: QFormat,
    tie_break: TieBreak,
}

impl ComparatorTreeConfig {
    pub fn new(k: usize, word_format: QFormat) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(ComparatorTreeConfig { k, word_format, tie_break: TieBreak::LowestIndex })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn word_format(&self) -> QFormat {
        self.word_format
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn comparators(&self) -> usize {
        self.k - 1
    }

    /// `ceil(log2 k)` comparator levels.
    pub fn depth(&self) -> u32 {
        usize::BITS - (self.k - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub class_index: usize,
    pub winner_value: Fixed,
}

/// Outcome of a tree evaluation, with structural counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeOutcome {
    pub winner: usize,
    pub comparisons: usize,
    pub levels: u32,
}

/// Evaluates a left-balanced binary comparator tree over `values` in index
/// order. Each comparator forwards the right operand only when it is strictly
/// greater; an unpaired last element is promoted to the next level unchanged.
pub fn comparator_tree<T: PartialOrd>(values: &[T]) -> Option<TreeOutcome> {
    if values.is_empty() {
        return None;
    }
    let mut level: Vec<usize> = (0..values.len()).collect();
    let mut comparisons = 0;
    let mut levels = 0;
    while level.len() > 1 {
        let mut next = 0;
        for slot in 0..level.len().div_ceil(2) {
            let left = level[2 * slot];
            level[next] = match level.get(2 * slot + 1) {
                Some(&right) => {
                    comparisons += 1;
                    if values[right] > values[left] {
                        right
                    } else {
                        left
                    }
                }
                None => left,
            };
            next += 1;
        }
        level.truncate(next);
        levels += 1;
    }
    Some(TreeOutcome { winner: level[0], comparisons, levels })
}

/// Lowest index of the maximum, by a single left-to-right scan.
pub fn argmax_by_scan<T: PartialOrd>(values: &[T]) -> Option<usize> {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    (!values.is_empty()).then_some(best)
}

/// The reduced unit: class prediction through the comparator tree.
pub fn argmax_comparator(x: &[Fixed], cfg: &ComparatorTreeConfig) -> Result<Prediction> {
    if x.len() != cfg.k {
        return Err(Error::LengthMismatch { expected: cfg.k, found: x.len() });
    }
    if let Some(v) = x.iter().find(|v| v.format() != cfg.word_format) {
        return Err(Error::FormatMismatch { left: cfg.word_format, right: v.format() });
    }
    let outcome = comparator_tree(x).ok_or(Error::EmptyInput)?;
    Ok(Prediction { class_index: outcome.winner, winner_value: x[outcome.winner] })
}

/// Linear-scan oracle for [`argmax_comparator`].
pub fn argmax_linear(x: &[Fixed]) -> Result<Prediction> {
    let first = x.first().ok_or(Error::EmptyInput)?;
    if let Some(v) = x.iter().find(|v| v.format() != first.format()) {
        return Err(Error::FormatMismatch { left: first.format(), right: v.format() });
    }
    let class_index = argmax_by_scan(x).ok_or(Error::EmptyInput)?;
    Ok(Prediction { class_index, winner_value: x[class_index] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table1::{NEGATIVE, POSITIVE, RANDOM};
    use proptest::prelude::*;
    use std::vec;

    const WORD: QFormat = QFormat::sq(7, 8);

    fn q(v: &[f64]) -> Vec<Fixed> {
        v.iter().map(|&x| Fixed::from_real(x, WORD).unwrap()).collect()
    }

    fn predict(v: &[f64]) -> usize {
        let cfg = ComparatorTreeConfig::new(v.len(), WORD).unwrap();
        argmax_comparator(&q(v), &cfg).unwrap().class_index
    }

    #[test]
    fn table_columns_pick_bold_rows() {
        assert_eq!(predict(&NEGATIVE.inputs), 5);
        assert_eq!(predict(&POSITIVE.inputs), 9);
        assert_eq!(predict(&RANDOM.inputs), 7);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(predict(&[3.0, 3.0]), 0);
        assert_eq!(argmax_linear(&q(&[1.0, 2.0, 2.0])).unwrap().class_index, 1);
        assert_eq!(predict(&[1.0, 2.0, 2.0]), 1);
        assert_eq!(predict(&[0.0, 5.0, 1.0, 5.0, 5.0]), 1);
    }

    #[test]
    fn single_class() {
        assert_eq!(predict(&[5.0]), 0);
        assert_eq!(argmax_linear(&q(&[5.0])).unwrap().class_index, 0);
        let cfg = ComparatorTreeConfig::new(1, WORD).unwrap();
        assert_eq!(cfg.comparators(), 0);
        assert_eq!(cfg.depth(), 0);
    }

    #[test]
    fn errors() {
        let cfg = ComparatorTreeConfig::new(3, WORD).unwrap();
        assert_eq!(
            argmax_comparator(&q(&[1.0, 2.0]), &cfg),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        );
        let other = vec![Fixed::zero(QFormat::sq(3, 4)); 3];
        assert!(matches!(argmax_comparator(&other, &cfg), Err(Error::FormatMismatch { .. })));
        assert_eq!(argmax_linear(&[]), Err(Error::EmptyInput));
        assert_eq!(ComparatorTreeConfig::new(0, WORD), Err(Error::EmptyInput));
    }

    #[test]
    fn structure_counts() {
        for k in 1..=1100 {
            let cfg = ComparatorTreeConfig::new(k, WORD).unwrap();
            let v: Vec<u32> = (0..k as u32).collect();
            let out = comparator_tree(&v).unwrap();
            assert_eq!(out.comparisons, k - 1);
            assert_eq!(out.comparisons, cfg.comparators());
            assert_eq!(out.levels, cfg.depth());
            assert_eq!(cfg.depth(), (k as f64).log2().ceil() as u32);
        }
    }

    proptest! {
        #[test]
        fn tree_matches_scan(v in proptest::collection::vec(-8i128..8, 1..300)) {
            let x: Vec<Fixed> = v.iter().map(|&r| Fixed::from_raw(r, WORD).unwrap()).collect();
            let cfg = ComparatorTreeConfig::new(x.len(), WORD).unwrap();
            let tree = argmax_comparator(&x, &cfg).unwrap();
            prop_assert_eq!(tree, argmax_linear(&x).unwrap());
            prop_assert!(x.iter().all(|v| *v <= tree.winner_value));
        }

        #[test]
        fn permutation_moves_the_winner(
            v in proptest::collection::hash_set(-30000i128..30000, 1..64),
            seed in any::<u64>(),
        ) {
            let x: Vec<Fixed> = v.into_iter().map(|r| Fixed::from_raw(r, WORD).unwrap()).collect();
            let mut perm: Vec<usize> = (0..x.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let permuted: Vec<Fixed> = perm.iter().map(|&p| x[p]).collect();
            let cfg = ComparatorTreeConfig::new(x.len(), WORD).unwrap();
            let before = argmax_comparator(&x, &cfg).unwrap().class_index;
            let after = argmax_comparator(&permuted, &cfg).unwrap().class_index;
            prop_assert_eq!(perm[after], before);
        }
    }
}
