//! Bit-accurate software models of the softmax output stage of a DNN
//! inference accelerator.
//!
//! The crate models several ways of producing a class prediction from the
//! final logits:
//!
//! * [`softmax::softmax_exact`] and [`softmax::softmax_stable`], the real-valued
//!   references;
//! * [`softmax::pseudo_softmax_base2`], a fixed-point unit built on a
//!   shift-plus-LUT base-2 exponential;
//! * [`softmax::inverse_softmax`], the division-free reciprocal form predicted
//!   by argmin;
//! * [`reduced::argmax_comparator`], the reduced unit: a comparator tree over
//!   the logits that never evaluates an exponential.
//!
//! Because `exp` is strictly increasing and the softmax denominator is a
//! shared positive factor, the class picked by the comparator tree is always
//! the class picked by softmax. [`harness`] checks that claim empirically and
//! [`cost`] counts the hardware each unit needs.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod error;
pub mod exp;
pub mod fixed;
pub mod harness;
pub mod reduced;
pub mod rng;
pub mod softmax;
pub mod table1;

pub use error::{Error, Result};
pub use fixed::{Fixed, QFormat};
