//! Golden "softmax output samples" table: three printed columns of ten
//! logits with their printed `e^x` and `s(x)`, and a reproduction of each row.

use alloc::vec::Vec;

use crate::exp::exp_reference;
use crate::fixed::QFormat;
use crate::reduced::{argmax_comparator, ComparatorTreeConfig};
use crate::softmax::{softmax_stable, LogitVector};

/// Relative tolerance for comparison with the printed three-digit values.
pub const TABLE1_REL_TOL: f64 = 5e-3;

/// Word format used when the reduced unit classifies the printed columns.
pub const TABLE1_WORD: QFormat = QFormat::sq(7, 8);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenColumn {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub inputs: [f64; 10],
    pub printed_exp: [f64; 10],
    pub printed_softmax: [f64; 10],
    /// Row printed in bold: the predicted class.
    pub bold_row: usize,
}

pub const NEGATIVE: GoldenColumn = GoldenColumn {
    name: "all-negative",
    lo: -100.0,
    hi: 0.0,
    inputs: [-67.98, -33.07, -76.26, -92.96, -90.64, -10.83, -16.15, -89.70, -36.38, -60.84],
    printed_exp: [
        2.98e-30, 4.33e-15, 7.54e-34, 4.22e-41, 4.30e-40, 1.96e-05, 9.67e-08, 1.09e-39, 1.57e-16,
        3.75e-27,
    ],
    printed_softmax: [
        1.51e-25, 2.19e-10, 3.81e-29, 2.13e-36, 2.17e-35, 9.95e-01, 4.89e-03, 5.55e-35, 7.97e-12,
        1.89e-22,
    ],
    bold_row: 5,
};

pub const POSITIVE: GoldenColumn = GoldenColumn {
    name: "all-positive",
    lo: 0.0,
    hi: 100.0,
    inputs: [62.31, 87.20, 10.66, 83.53, 45.06, 73.87, 49.77, 66.38, 23.36, 95.52],
    printed_exp: [
        1.16e27, 7.44e37, 4.27e04, 1.90e36, 3.74e19, 1.20e32, 4.14e21, 6.89e28, 1.40e10, 3.05e41,
    ],
    printed_softmax: [
        3.80e-15, 2.44e-04, 1.41e-37, 6.24e-06, 1.22e-22, 3.95e-10, 1.35e-20, 2.22e-13, 4.61e-32,
        9.97e-01,
    ],
    bold_row: 9,
};

pub const RANDOM: GoldenColumn = GoldenColumn {
    name: "random",
    lo: -1.0,
    hi: 1.0,
    inputs: [-0.95, -0.83, -0.69, 0.58, -0.55, 0.16, 0.23, 0.91, 0.07, 0.18],
    printed_exp: [0.38, 0.43, 0.49, 1.79, 0.57, 1.18, 1.26, 2.49, 1.07, 1.20],
    printed_softmax: [0.03, 0.03, 0.04, 0.16, 0.05, 0.10, 0.11, 0.22, 0.09, 0.11],
    bold_row: 7,
};

pub const COLUMNS: [GoldenColumn; 3] = [NEGATIVE, POSITIVE, RANDOM];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Table1Row {
    pub input: f64,
    pub exp: f64,
    pub softmax: f64,
    pub printed_exp: f64,
    pub printed_softmax: f64,
}

impl Table1Row {
    pub fn exp_rel_error(&self) -> f64 {
        (self.exp - self.printed_exp).abs() / self.printed_exp.abs()
    }

    pub fn softmax_rel_error(&self) -> f64 {
        (self.softmax - self.printed_softmax).abs() / self.printed_softmax.abs()
    }

    pub fn within(&self, rel_tol: f64) -> bool {
        self.exp_rel_error() <= rel_tol && self.softmax_rel_error() <= rel_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Table1Column {
    pub name: &'static str,
    pub rows: Vec<Table1Row>,
    pub bold_row: usize,
    /// Class chosen by the reduced unit on the column quantized to [`TABLE1_WORD`].
    pub reduced_class: usize,
    /// Class with the largest recomputed `s(x)`.
    pub softmax_class: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Table1 {
    pub columns: Vec<Table1Column>,
}

impl Table1 {
    pub fn rows(&self) -> impl Iterator<Item = &Table1Row> {
        self.columns.iter().flat_map(|c| c.rows.iter())
    }

    pub fn mismatches(&self, rel_tol: f64) -> usize {
        self.rows().filter(|r| !r.within(rel_tol)).count()
    }

    pub fn classes_match(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.reduced_class == c.bold_row && c.softmax_class == c.bold_row)
    }
}

/// Recomputes every printed row from the printed inputs.
pub fn reproduce_column(col: &GoldenColumn) -> Table1Column {
    let x = LogitVector::new(col.inputs.to_vec()).expect("finite fixture");
    let p = softmax_stable(&x);
    let rows = col
        .inputs
        .iter()
        .zip(p.as_slice())
        .enumerate()
        .map(|(i, (&input, &softmax))| Table1Row {
            input,
            exp: exp_reference(input),
            softmax,
            printed_exp: col.printed_exp[i],
            printed_softmax: col.printed_softmax[i],
        })
        .collect();
    let cfg = ComparatorTreeConfig::new(x.len(), TABLE1_WORD).expect("k = 10");
    let reduced_class = argmax_comparator(&x.quantize(TABLE1_WORD), &cfg)
        .expect("matching config")
        .class_index;
    Table1Column { name: col.name, rows, bold_row: col.bold_row, reduced_class, softmax_class: p.argmax() }
}

pub fn reproduce_table1() -> Table1 {
    Table1 { columns: COLUMNS.iter().map(reproduce_column).collect() }
}
