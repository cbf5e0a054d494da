//! Exponential evaluators: the f64 reference, the base-2 shift-and-lookup unit
//! and a hyperbolic CORDIC unit.
//!
//! Both hardware-style units start from `e^y = 2^(y·log2 e)`. The product is
//! formed exactly in integer arithmetic against a 62-fractional-bit constant,
//! so the integer/fraction split is reproducible bit for bit.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fixed::{fx_add, fx_shift, round_shr, scale_raw, Fixed, QFormat};

/// `log2(e)` rounded to 62 fractional bits.
pub const LOG2_E_Q62: i128 = 6_653_256_548_922_161_246;
/// `ln(2)` rounded to 62 fractional bits.
pub const LN_2_Q62: i128 = 3_196_577_161_300_663_915;
const CONST_FRAC_BITS: u32 = 62;

/// Largest supported LUT address width.
pub const MAX_LUT_ADDR_BITS: u32 = 24;

/// `e^x` in f64. Overflow yields `+inf`, deep underflow `0`.
pub fn exp_reference(x: f64) -> f64 {
    libm::exp(x)
}

/// `y·log2 e` split as `shift + frac` with `frac` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Base2Decomposition {
    pub shift: i64,
    pub frac: f64,
}

impl Base2Decomposition {
    /// `2^shift · 2^frac`.
    pub fn recompose(&self) -> f64 {
        let shift = self.shift.clamp(-2200, 2200) as i32;
        libm::scalbn(libm::exp2(self.frac), shift)
    }
}

pub fn exp_base2_decompose(y: f64) -> Result<Base2Decomposition> {
    if !y.is_finite() {
        return Err(Error::NotANumber);
    }
    let t = y * core::f64::consts::LOG2_E;
    let floor = libm::floor(t);
    if !(-9.2e18..9.2e18).contains(&floor) {
        return Err(Error::ExponentOutOfRange);
    }
    let mut shift = floor as i64;
    let mut frac = t - floor;
    // t just below an integer can round the difference up to exactly 1
    if frac >= 1.0 {
        shift += 1;
        frac = 0.0;
    }
    Ok(Base2Decomposition { shift, frac })
}

/// Table of `2^(a / 2^addr_bits)` for every address `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpLut {
    addr_bits: u32,
    value_format: QFormat,
    entries: Vec<Fixed>,
}

/// Builds the fractional-power LUT. Entries that would round up to 2.0 are
/// held at `2 - ulp` so every entry stays in `[1, 2)`.
pub fn build_lut(addr_bits: u32, value_format: QFormat) -> Result<ExpLut> {
    if !(1..=MAX_LUT_ADDR_BITS).contains(&addr_bits) {
        return Err(Error::LutAddressBits(addr_bits));
    }
    if value_format.int_bits() < 1 {
        return Err(Error::LutFormatTooNarrow(value_format));
    }
    let size = 1usize << addr_bits;
    let top = lut_ceiling(value_format);
    let entries = (0..size)
        .map(|a| {
            let v = libm::exp2(libm::scalbn(a as f64, -(addr_bits as i32)));
            let q = Fixed::from_real(v, value_format).expect("finite");
            if q.raw() > top {
                Fixed::from_raw_saturating(top, value_format)
            } else {
                q
            }
        })
        .collect();
    Ok(ExpLut { addr_bits, value_format, entries })
}

/// Raw word of `2 - ulp`.
fn lut_ceiling(value_format: QFormat) -> i128 {
    (2i128 << value_format.frac_bits()) - 1
}

impl ExpLut {
    /// Wraps externally supplied entries, checking the table invariants.
    pub fn from_entries(addr_bits: u32, value_format: QFormat, entries: Vec<Fixed>) -> Result<Self> {
        if !(1..=MAX_LUT_ADDR_BITS).contains(&addr_bits) {
            return Err(Error::LutAddressBits(addr_bits));
        }
        if entries.len() != 1usize << addr_bits {
            return Err(Error::InvalidLut("entry count is not 2^addr_bits"));
        }
        if value_format.int_bits() < 1 {
            return Err(Error::LutFormatTooNarrow(value_format));
        }
        let one = 1i128 << value_format.frac_bits();
        let top = lut_ceiling(value_format);
        if entries.iter().any(|e| e.format() != value_format) {
            return Err(Error::InvalidLut("entry format differs from value format"));
        }
        if entries.iter().any(|e| e.raw() < one || e.raw() > top) {
            return Err(Error::InvalidLut("entry outside [1, 2)"));
        }
        if entries.windows(2).any(|w| w[1].raw() < w[0].raw()) {
            return Err(Error::InvalidLut("entries decrease"));
        }
        Ok(ExpLut { addr_bits, value_format, entries })
    }

    pub fn addr_bits(&self) -> u32 {
        self.addr_bits
    }

    pub fn value_format(&self) -> QFormat {
        self.value_format
    }

    pub fn entries(&self) -> &[Fixed] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Storage in bits: entries × word width.
    pub fn storage_bits(&self) -> u64 {
        self.entries.len() as u64 * u64::from(self.value_format.width())
    }
}

/// Exact `raw · log2 e` at `frac_bits + 62` fractional bits.
fn scaled_by_log2e(x: Fixed) -> (i128, u32) {
    (x.raw() * LOG2_E_Q62, x.format().frac_bits() + CONST_FRAC_BITS)
}

/// Base-2 exponential: the integer part of `y·log2 e` becomes a shift, the
/// fraction (truncated to the LUT address width) selects a table entry.
pub fn exp_base2(y: Fixed, lut: &ExpLut, out: QFormat) -> Fixed {
    let (t, frac_bits) = scaled_by_log2e(y);
    let shift = (t >> frac_bits) as i64;
    let frac = t & ((1i128 << frac_bits) - 1);
    let addr = (frac >> (frac_bits - lut.addr_bits)) as usize;
    let entry = lut.entries[addr];
    let rescale = shift + out.frac_bits() as i64 - lut.value_format.frac_bits() as i64;
    scale_raw(entry.raw(), rescale, out)
}

/// Default guard bits below the word LSB in the CORDIC rotation registers.
/// With four guard bits and at least 20 iterations the sQ7.16 unit is monotone
/// over its whole input domain.
pub const CORDIC_GUARD_BITS: u32 = 4;

/// Hyperbolic CORDIC parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CordicConfig {
    iterations: u32,
    word_format: QFormat,
    datapath: QFormat,
    schedule: Vec<u32>,
    gain_inverse: f64,
    angles: Vec<Fixed>,
}

/// Shift index sequence `1, 2, 3, 4, 4, 5, …, 13, 13, …`; indices
/// `4, 13, 40, …` (`k -> 3k + 1`) are executed twice so the rotations converge.
pub fn hyperbolic_schedule(iterations: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(iterations as usize);
    let mut repeat = 4;
    let mut i = 1;
    while out.len() < iterations as usize {
        out.push(i);
        if i == repeat && out.len() < iterations as usize {
            out.push(i);
            repeat = 3 * repeat + 1;
        }
        i += 1;
    }
    out
}

impl CordicConfig {
    /// `iterations` micro-rotations with the result delivered in `word_format`
    /// and [`CORDIC_GUARD_BITS`] extra fractional bits in the rotation registers.
    pub fn new(iterations: u32, word_format: QFormat) -> Result<Self> {
        Self::with_guard_bits(iterations, word_format, CORDIC_GUARD_BITS)
    }

    /// As [`CordicConfig::new`], with `guard_bits` extra fractional bits in the
    /// rotation datapath (which also carries two integer bits and a sign).
    pub fn with_guard_bits(iterations: u32, word_format: QFormat, guard_bits: u32) -> Result<Self> {
        if iterations < 4 {
            return Err(Error::TooFewIterations(iterations));
        }
        let frac = (word_format.frac_bits() + guard_bits).min(QFormat::MAX_WIDTH - 3);
        let datapath = QFormat::new(2, frac, true)?;
        let schedule = hyperbolic_schedule(iterations);
        let gain: f64 = schedule
            .iter()
            .map(|&i| libm::sqrt(1.0 - libm::scalbn(1.0, -2 * i as i32)))
            .product();
        let angles = schedule
            .iter()
            .map(|&i| Fixed::from_real(libm::atanh(libm::scalbn(1.0, -(i as i32))), datapath))
            .collect::<Result<Vec<_>>>()?;
        Ok(CordicConfig { iterations, word_format, datapath, schedule, gain_inverse: 1.0 / gain, angles })
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn word_format(&self) -> QFormat {
        self.word_format
    }

    pub fn datapath_format(&self) -> QFormat {
        self.datapath
    }

    pub fn schedule(&self) -> &[u32] {
        &self.schedule
    }

    /// `1 / Π sqrt(1 - 2^(-2i))` over the schedule; the initial x register.
    pub fn gain_inverse(&self) -> f64 {
        self.gain_inverse
    }

    /// Sum of the rotation angles: the largest |z| the rotations can absorb.
    pub fn convergence_limit(&self) -> f64 {
        self.schedule.iter().map(|&i| libm::atanh(libm::scalbn(1.0, -(i as i32)))).sum()
    }
}

fn wide_format() -> QFormat {
    QFormat::sq(63, 0)
}

/// `e^x` via base-2 range reduction (`x = u·ln 2 + r`, `|r| <= ln2 / 2`)
/// followed by hyperbolic CORDIC rotation for `cosh r + sinh r`. The result is
/// in `cfg.word_format()`, saturating on overflow.
pub fn exp_cordic(x: Fixed, cfg: &CordicConfig) -> Fixed {
    let out = cfg.word_format;
    let dp = cfg.datapath;
    let (t, frac_bits) = scaled_by_log2e(x);
    let u = ((t + (1i128 << (frac_bits - 1))) >> frac_bits) as i64;
    // e^r lies in [0.70, 1.42]; beyond these bounds the word saturates or rounds to 0
    if u > out.int_bits() as i64 + 1 {
        return Fixed::max(out);
    }
    if u < -(out.frac_bits() as i64 + 2) {
        return Fixed::zero(out);
    }
    // r = x - u·ln2 at (xf + 62) fractional bits; xf <= 56 keeps |u·ln2| in i128
    let xf = x.format().frac_bits().min(56);
    let x_raw = scale_raw(x.raw(), xf as i64 - x.format().frac_bits() as i64, wide_format()).raw();
    let r_wide = (x_raw << CONST_FRAC_BITS) - ((i128::from(u) * LN_2_Q62) << xf);
    let r_frac = xf + CONST_FRAC_BITS;
    let r = {
        let mag = round_shr(r_wide.unsigned_abs(), r_frac - dp.frac_bits());
        let raw = if r_wide < 0 { -(mag as i128) } else { mag as i128 };
        Fixed::from_raw_saturating(raw, dp)
    };

    let mut cx = Fixed::from_real(cfg.gain_inverse, dp).expect("finite");
    let mut cy = Fixed::zero(dp);
    let mut z = r;
    for (&i, &angle) in cfg.schedule.iter().zip(&cfg.angles) {
        let dx = fx_shift(cy, -(i as i32));
        let dy = fx_shift(cx, -(i as i32));
        if z.raw() >= 0 {
            cx = fx_add(cx, dx).expect("datapath");
            cy = fx_add(cy, dy).expect("datapath");
            z = Fixed::from_raw_saturating(z.raw() - angle.raw(), dp);
        } else {
            cx = Fixed::from_raw_saturating(cx.raw() - dx.raw(), dp);
            cy = Fixed::from_raw_saturating(cy.raw() - dy.raw(), dp);
            z = Fixed::from_raw_saturating(z.raw() + angle.raw(), dp);
        }
    }
    let sum = cx.raw() + cy.raw();
    scale_raw(sum, u + out.frac_bits() as i64 - dp.frac_bits() as i64, out)
}
