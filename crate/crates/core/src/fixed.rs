//! Parameterized fixed-point words.
//!
//! A [`QFormat`] describes the datapath word (`sQi.f` or `uQi.f`), a [`Fixed`]
//! is a raw integer tagged with its format. Every operation saturates at the
//! format bounds and rounds to nearest, ties to even. Raw values are held in an
//! `i128` so that products of two 64-bit words can be formed before rescaling.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    int_bits: u8,
    frac_bits: u8,
    signed: bool,
}

impl QFormat {
    pub const MAX_WIDTH: u32 = 64;

    pub const fn new(int_bits: u32, frac_bits: u32, signed: bool) -> Result<Self> {
        let width = int_bits as u64 + frac_bits as u64 + signed as u64;
        if width == 0 || width > Self::MAX_WIDTH as u64 {
            return Err(Error::InvalidFormat { int_bits, frac_bits, signed });
        }
        Ok(QFormat { int_bits: int_bits as u8, frac_bits: frac_bits as u8, signed })
    }

    /// Signed format, panicking on an invalid width. For constants.
    pub const fn sq(int_bits: u32, frac_bits: u32) -> Self {
        match Self::new(int_bits, frac_bits, true) {
            Ok(q) => q,
            Err(_) => panic!("invalid signed Q-format"),
        }
    }

    /// Unsigned format, panicking on an invalid width. For constants.
    pub const fn uq(int_bits: u32, frac_bits: u32) -> Self {
        match Self::new(int_bits, frac_bits, false) {
            Ok(q) => q,
            Err(_) => panic!("invalid unsigned Q-format"),
        }
    }

    pub const fn int_bits(&self) -> u32 {
        self.int_bits as u32
    }

    pub const fn frac_bits(&self) -> u32 {
        self.frac_bits as u32
    }

    pub const fn is_signed(&self) -> bool {
        self.signed
    }

    /// Total word width including the sign bit.
    pub const fn width(&self) -> u32 {
        self.int_bits as u32 + self.frac_bits as u32 + self.signed as u32
    }

    pub const fn max_raw(&self) -> i128 {
        (1i128 << (self.int_bits as u32 + self.frac_bits as u32)) - 1
    }

    pub const fn min_raw(&self) -> i128 {
        if self.signed {
            -(1i128 << (self.int_bits as u32 + self.frac_bits as u32))
        } else {
            0
        }
    }

    /// One unit in the last place, `2^-frac_bits`.
    pub fn resolution(&self) -> f64 {
        libm::scalbn(1.0, -(self.frac_bits as i32))
    }

    pub fn max_real(&self) -> f64 {
        Fixed::max(*self).to_real()
    }

    pub fn min_real(&self) -> f64 {
        Fixed::min(*self).to_real()
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.signed { 's' } else { 'u' };
        write!(f, "{s}Q{}.{}", self.int_bits, self.frac_bits)
    }
}

impl FromStr for QFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (signed, rest) = if let Some(rest) = s.strip_prefix("sQ") {
            (true, rest)
        } else if let Some(rest) = s.strip_prefix("uQ") {
            (false, rest)
        } else {
            return Err(Error::FormatSyntax);
        };
        let (int, frac) = rest.split_once('.').ok_or(Error::FormatSyntax)?;
        let int: u32 = int.parse().map_err(|_| Error::FormatSyntax)?;
        let frac: u32 = frac.parse().map_err(|_| Error::FormatSyntax)?;
        QFormat::new(int, frac, signed)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for QFormat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for QFormat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fixed-point value. `raw` always lies within the bounds of `format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fixed {
    raw: i128,
    format: QFormat,
}

impl Fixed {
    pub const fn zero(format: QFormat) -> Self {
        Fixed { raw: 0, format }
    }

    pub const fn max(format: QFormat) -> Self {
        Fixed { raw: format.max_raw(), format }
    }

    pub const fn min(format: QFormat) -> Self {
        Fixed { raw: format.min_raw(), format }
    }

    /// Builds a value from a raw word, clamping it into range.
    pub fn from_raw_saturating(raw: i128, format: QFormat) -> Self {
        Fixed { raw: raw.clamp(format.min_raw(), format.max_raw()), format }
    }

    /// Builds a value from a raw word, or `None` if it is out of range.
    pub fn from_raw(raw: i128, format: QFormat) -> Option<Self> {
        (format.min_raw()..=format.max_raw())
            .contains(&raw)
            .then_some(Fixed { raw, format })
    }

    /// Quantizes a real, rounding to nearest-even and saturating out-of-range
    /// values (including infinities). NaN is rejected.
    pub fn from_real(v: f64, format: QFormat) -> Result<Self> {
        if v.is_nan() {
            return Err(Error::NotANumber);
        }
        // power-of-two scaling is exact unless it overflows, which saturates below
        let scaled = libm::rint(libm::scalbn(v, format.frac_bits() as i32));
        let max = format.max_raw();
        let min = format.min_raw();
        let raw = if scaled >= max as f64 {
            max
        } else if scaled <= min as f64 {
            min
        } else {
            scaled as i128
        };
        Ok(Fixed { raw, format })
    }

    pub fn to_real(&self) -> f64 {
        libm::scalbn(self.raw as f64, -(self.format.frac_bits() as i32))
    }

    pub const fn raw(&self) -> i128 {
        self.raw
    }

    pub const fn format(&self) -> QFormat {
        self.format
    }

    /// Re-expresses the value in another format (rounding, saturating).
    pub fn rescale(&self, target: QFormat) -> Fixed {
        let shift = target.frac_bits() as i64 - self.format.frac_bits() as i64;
        scale_raw(self.raw, shift, target)
    }
}

impl PartialOrd for Fixed {
    /// Ordered only within one format; mixed formats are unordered.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.format == other.format).then(|| self.raw.cmp(&other.raw))
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_real())
    }
}

fn same_format(a: &Fixed, b: &Fixed) -> Result<QFormat> {
    if a.format == b.format {
        Ok(a.format)
    } else {
        Err(Error::FormatMismatch { left: a.format, right: b.format })
    }
}

/// Shifts a magnitude right by `n` bits, rounding to nearest, ties to even.
pub(crate) fn round_shr(mag: u128, n: u32) -> u128 {
    if n == 0 {
        return mag;
    }
    if n > 128 {
        return 0;
    }
    if n == 128 {
        // only values strictly above one half round up to one
        return u128::from(mag > 1u128 << 127);
    }
    let q = mag >> n;
    let rem = mag & ((1u128 << n) - 1);
    let half = 1u128 << (n - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Packs a sign and magnitude into `format`, saturating.
fn from_sign_mag(negative: bool, mag: u128, format: QFormat) -> Fixed {
    let raw = if negative {
        let limit = format.min_raw().unsigned_abs();
        if mag >= limit {
            format.min_raw()
        } else {
            -(mag as i128)
        }
    } else {
        let limit = format.max_raw() as u128;
        if mag >= limit {
            format.max_raw()
        } else {
            mag as i128
        }
    };
    Fixed { raw, format }
}

/// Computes `raw * 2^shift` into `format` with one rounding and saturation.
pub(crate) fn scale_raw(raw: i128, shift: i64, format: QFormat) -> Fixed {
    scale_mag(raw < 0, raw.unsigned_abs(), shift, format)
}

fn scale_mag(negative: bool, mag: u128, shift: i64, format: QFormat) -> Fixed {
    if mag == 0 {
        return Fixed::zero(format);
    }
    let mag = if shift >= 0 {
        if shift >= 128 || mag.leading_zeros() < shift as u32 {
            u128::MAX
        } else {
            mag << shift
        }
    } else {
        round_shr(mag, shift.unsigned_abs().min(129) as u32)
    };
    from_sign_mag(negative, mag, format)
}

/// Saturating addition of two words in one format.
pub fn fx_add(a: Fixed, b: Fixed) -> Result<Fixed> {
    let format = same_format(&a, &b)?;
    Ok(Fixed::from_raw_saturating(a.raw + b.raw, format))
}

/// Saturating subtraction of two words in one format.
pub fn fx_sub(a: Fixed, b: Fixed) -> Result<Fixed> {
    let format = same_format(&a, &b)?;
    Ok(Fixed::from_raw_saturating(a.raw - b.raw, format))
}

/// Product rounded into the format of `a`. Operands may differ in format.
pub fn fx_mul(a: Fixed, b: Fixed) -> Fixed {
    let negative = (a.raw < 0) != (b.raw < 0);
    // each magnitude is below 2^64, so the product fits
    let mag = a.raw.unsigned_abs() * b.raw.unsigned_abs();
    scale_mag(negative, mag, -(b.format.frac_bits() as i64), a.format)
}

/// Multiplication by `2^n`, saturating for positive `n`, rounding for negative.
pub fn fx_shift(a: Fixed, n: i32) -> Fixed {
    scale_raw(a.raw, n as i64, a.format)
}

pub fn fx_cmp(a: Fixed, b: Fixed) -> Result<Ordering> {
    same_format(&a, &b)?;
    Ok(a.raw.cmp(&b.raw))
}

/// Quotient of two same-format words, rounded into `out`.
pub fn fx_div(a: Fixed, b: Fixed, out: QFormat) -> Result<Fixed> {
    same_format(&a, &b)?;
    if b.raw == 0 {
        return Err(Error::DivisionByZero);
    }
    let negative = (a.raw < 0) != (b.raw < 0);
    // |a| < 2^64 and frac_bits <= 64, so the widened numerator fits
    let num = a.raw.unsigned_abs() << out.frac_bits();
    let den = b.raw.unsigned_abs();
    let q = num / den;
    let r = num % den;
    let q = match (2 * r).cmp(&den) {
        Ordering::Greater => q + 1,
        Ordering::Equal if q & 1 == 1 => q + 1,
        _ => q,
    };
    Ok(from_sign_mag(negative, q, out))
}
