//! Structural hardware-cost proxies for each output-stage variant.
//!
//! Counts are in units (comparators, adders, ...), not gate equivalents.
//! Subtractors are counted as adders.

use crate::exp::hyperbolic_schedule;
use crate::fixed::QFormat;
use crate::reduced::ComparatorTreeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CostRecord {
    pub comparators: u64,
    pub lut_bits: u64,
    pub adders: u64,
    pub multipliers: u64,
    pub dividers: u64,
    pub exp_evaluations: u64,
}

/// Output-stage variants with the parameters that affect their cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitVariant {
    Exact,
    Stable,
    Base2 { addr_bits: u32, value_format: QFormat },
    Inverse,
    /// A single CORDIC exponential evaluator (not a full softmax stage).
    CordicExp { iterations: u32, word_format: QFormat },
    Reduced,
}

/// Cost of a `k`-class instance of `variant`.
pub fn cost_of_unit(variant: UnitVariant, k: usize) -> CostRecord {
    let k = k.max(1) as u64;
    match variant {
        // final pick over the k probabilities
        UnitVariant::Exact => CostRecord {
            comparators: k - 1,
            adders: k - 1,
            dividers: k,
            exp_evaluations: k,
            ..CostRecord::default()
        },
        // max search up front; k subtractions x_j - max plus the k - 1 sum
        UnitVariant::Stable => CostRecord {
            comparators: k - 1,
            adders: 2 * k - 1,
            dividers: k,
            exp_evaluations: k,
            ..CostRecord::default()
        },
        // max search, k subtractions, k multiplies by log2 e, LUT + shift per
        // exponential, k - 1 accumulations, k divisions
        UnitVariant::Base2 { addr_bits, value_format } => CostRecord {
            comparators: k - 1,
            lut_bits: (1u64 << addr_bits) * u64::from(value_format.width()),
            adders: 2 * k - 1,
            multipliers: k,
            dividers: k,
            exp_evaluations: k,
        },
        // every ordered pair (i, j), i != j: one subtraction, one exponential,
        // one accumulation; argmin over the k scores
        UnitVariant::Inverse => CostRecord {
            comparators: k - 1,
            adders: 2 * k * (k - 1),
            exp_evaluations: k * (k - 1),
            ..CostRecord::default()
        },
        // range reduction (one multiply, one subtract), three adders per
        // micro-rotation, the final cosh + sinh, and an angle ROM
        UnitVariant::CordicExp { iterations, word_format } => {
            let iterations = hyperbolic_schedule(iterations).len() as u64;
            CostRecord {
                comparators: 0,
                lut_bits: iterations * u64::from(word_format.width()),
                adders: 3 * iterations + 2,
                multipliers: 1,
                dividers: 0,
                exp_evaluations: 1,
            }
        }
        UnitVariant::Reduced => CostRecord { comparators: k - 1, ..CostRecord::default() },
    }
}

/// Cost of a reduced unit built from `cfg`.
pub fn cost_summary(cfg: &ComparatorTreeConfig) -> CostRecord {
    cost_of_unit(UnitVariant::Reduced, cfg.k())
}
