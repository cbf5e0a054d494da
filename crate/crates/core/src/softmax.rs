//! Softmax-stage variants and the cross-entropy reference metric.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exp::{exp_base2, exp_reference, ExpLut};
use crate::fixed::{fx_add, fx_div, fx_sub, Fixed, QFormat};
use crate::reduced::argmax_by_scan;

/// The `k >= 1` finite logits entering the output stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LogitVector(Vec<f64>);

impl LogitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLogit { index });
        }
        Ok(LogitVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quantizes every logit into the datapath word.
    pub fn quantize(&self, format: QFormat) -> Vec<Fixed> {
        self.0
            .iter()
            .map(|&v| Fixed::from_real(v, format).expect("logits are finite"))
            .collect()
    }

    /// Distance between the largest and second-largest logit (`inf` for k = 1).
    pub fn top_two_gap(&self) -> f64 {
        let mut first = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &v in &self.0 {
            if v > first {
                second = first;
                first = v;
            } else if v > second {
                second = v;
            }
        }
        first - second
    }

    /// True when the maximum is attained at exactly one index.
    pub fn is_tie_free(&self) -> bool {
        let m = self.max();
        self.0.iter().filter(|&&v| v == m).count() == 1
    }

    /// Lowest index of the maximum logit.
    pub fn argmax(&self) -> usize {
        argmax_by_scan(&self.0).expect("non-empty")
    }
}

impl TryFrom<Vec<f64>> for LogitVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        LogitVector::new(values)
    }
}

/// Softmax activations `s(x_j)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Predicted class: lowest index of the largest probability.
    pub fn argmax(&self) -> usize {
        argmax_by_scan(&self.0).expect("non-empty")
    }
}

/// Reciprocal-softmax scores `s'(x_j) = 1 + Σ_{i≠j} e^(x_i - x_j)`, each `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseScores(Vec<f64>);

impl InverseScores {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `1 / s'`, which equals the softmax activations.
    pub fn reciprocals(&self) -> ProbVector {
        ProbVector(self.0.iter().map(|s| 1.0 / s).collect())
    }
}

/// Direct form `e^(x_j) / Σ e^(x_i)` without max subtraction.
///
/// Fails with [`Error::Overflow`] when an exponential or the sum leaves the
/// f64 range, and with [`Error::Underflow`] when every exponential is zero.
pub fn softmax_exact(x: &LogitVector) -> Result<ProbVector> {
    let exps: Vec<f64> = x.as_slice().iter().map(|&v| exp_reference(v)).collect();
    let sum: f64 = exps.iter().sum();
    if !sum.is_finite() {
        return Err(Error::Overflow);
    }
    if sum == 0.0 {
        return Err(Error::Underflow);
    }
    Ok(ProbVector(exps.into_iter().map(|e| e / sum).collect()))
}

/// Max-subtracted form: every exponential is evaluated at `x_j - max <= 0`
/// and is therefore bounded by one.
pub fn softmax_stable(x: &LogitVector) -> ProbVector {
    let m = x.max();
    let exps: Vec<f64> = x.as_slice().iter().map(|&v| exp_reference(v - m)).collect();
    // the maximum contributes exactly 1, so the sum is at least 1
    let sum: f64 = exps.iter().sum();
    ProbVector(exps.into_iter().map(|e| e / sum).collect())
}

/// Accumulator wide enough to sum `k` values of `format` without overflow,
/// capped at 64 bits.
fn accumulator_format(format: QFormat, k: usize) -> QFormat {
    let growth = usize::BITS - (k.max(1) - 1).leading_zeros();
    let int_bits = (format.int_bits() + growth)
        .min(QFormat::MAX_WIDTH - format.frac_bits() - format.is_signed() as u32);
    QFormat::new(int_bits, format.frac_bits(), format.is_signed()).expect("bounded width")
}

/// Fixed-point pseudo-softmax over a base-2 exponential.
///
/// Numerators are `exp_base2(x_j - m)` in the LUT value format, where `m` is
/// the fixed-point maximum; the denominator is a saturating sum in a widened
/// accumulator; each quotient is rounded into `out_format`.
pub fn pseudo_softmax_base2(x: &[Fixed], lut: &ExpLut, out_format: QFormat) -> Result<Vec<Fixed>> {
    let first = *x.first().ok_or(Error::EmptyInput)?;
    let mut m = first;
    for &v in &x[1..] {
        if v.format() != first.format() {
            return Err(Error::FormatMismatch { left: first.format(), right: v.format() });
        }
        if v > m {
            m = v;
        }
    }
    let acc_format = accumulator_format(lut.value_format(), x.len());
    let numerators = x
        .iter()
        .map(|&v| {
            let d = fx_sub(v, m)?;
            Ok(exp_base2(d, lut, lut.value_format()).rescale(acc_format))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut den = Fixed::zero(acc_format);
    for &n in &numerators {
        den = fx_add(den, n)?;
    }
    numerators.into_iter().map(|n| fx_div(n, den, out_format)).collect()
}

/// Division-free reciprocal scores. Overflowing terms saturate to `+inf`,
/// which leaves the argmin intact.
pub fn inverse_softmax(x: &LogitVector) -> InverseScores {
    let v = x.as_slice();
    let scores = v
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            1.0 + v
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &xi)| exp_reference(xi - xj))
                .sum::<f64>()
        })
        .collect();
    InverseScores(scores)
}

/// Class with the smallest reciprocal score; ties go to the lowest index.
pub fn predict_inverse(scores: &InverseScores) -> usize {
    let mut best = 0;
    for (i, &s) in scores.0.iter().enumerate().skip(1) {
        if s < scores.0[best] {
            best = i;
        }
    }
    best
}

/// One-hot cross-entropy `-ln p_target`. A zero probability gives `+inf`.
pub fn cross_entropy(p: &ProbVector, target: usize) -> Result<f64> {
    let pt = *p
        .0
        .get(target)
        .ok_or(Error::TargetOutOfRange { target, classes: p.len() })?;
    Ok(-libm::log(pt))
}
