use core::fmt;

use crate::fixed::QFormat;

/// Errors raised by the datapath models.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A Q-format whose total width exceeds 64 bits or has no bits at all.
    InvalidFormat { int_bits: u32, frac_bits: u32, signed: bool },
    /// A Q-format string that does not parse as `sQ<int>.<frac>` / `uQ<int>.<frac>`.
    FormatSyntax,
    /// Two operands that must share a word format do not.
    FormatMismatch { left: QFormat, right: QFormat },
    /// NaN offered to a quantizer.
    NotANumber,
    DivisionByZero,
    /// LUT address width outside the supported range.
    LutAddressBits(u32),
    /// LUT value format cannot hold `2 - ulp`.
    LutFormatTooNarrow(QFormat),
    /// A loaded LUT violates the table invariants.
    InvalidLut(&'static str),
    /// CORDIC needs at least four micro-rotations.
    TooFewIterations(u32),
    /// Decomposition exponent does not fit a 64-bit shift count.
    ExponentOutOfRange,
    EmptyInput,
    NonFiniteLogit { index: usize },
    /// Direct-form softmax overflowed; use the max-subtracted variant.
    Overflow,
    /// Every direct-form exponential underflowed to zero.
    Underflow,
    LengthMismatch { expected: usize, found: usize },
    TargetOutOfRange { target: usize, classes: usize },
    /// An experiment specification that violates its preconditions.
    InvalidSpec(&'static str),
    /// The variant cannot be used for the requested operation.
    UnsupportedVariant(&'static str),
    UnknownVariant,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidFormat { int_bits, frac_bits, signed } => write!(
                f,
                "invalid Q-format: {int_bits} integer + {frac_bits} fractional bits (signed: {signed}) must total 1..=64"
            ),
            Error::FormatSyntax => f.write_str("Q-format must look like sQ7.8 or uQ1.15"),
            Error::FormatMismatch { left, right } => {
                write!(f, "operand formats differ: {left} vs {right}")
            }
            Error::NotANumber => f.write_str("cannot quantize NaN"),
            Error::DivisionByZero => f.write_str("division by zero"),
            Error::LutAddressBits(bits) => write!(f, "LUT address width {bits} outside 1..=24"),
            Error::LutFormatTooNarrow(q) => write!(f, "LUT value format {q} cannot represent 2 - ulp"),
            Error::InvalidLut(why) => write!(f, "invalid LUT: {why}"),
            Error::TooFewIterations(n) => write!(f, "CORDIC needs at least 4 iterations, got {n}"),
            Error::ExponentOutOfRange => f.write_str("base-2 exponent does not fit in 64 bits"),
            Error::EmptyInput => f.write_str("empty logit vector"),
            Error::NonFiniteLogit { index } => write!(f, "logit {index} is not finite"),
            Error::Overflow => f.write_str("exponential overflow; use the stable variant"),
            Error::Underflow => f.write_str("all exponentials underflowed; use the stable variant"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::TargetOutOfRange { target, classes } => {
                write!(f, "target class {target} out of range for {classes} classes")
            }
            Error::InvalidSpec(why) => write!(f, "invalid input spec: {why}"),
            Error::UnsupportedVariant(why) => write!(f, "unsupported variant: {why}"),
            Error::UnknownVariant => f.write_str(
                "unknown variant (expected exact, stable, base2, inverse, cordic-exp or reduced)",
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
