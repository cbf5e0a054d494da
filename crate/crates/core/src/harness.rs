//! Experiment engine: uniform logit generation, cross-variant agreement and
//! probability-error measurement, and monotonicity data for plotting.
//!
//! Every trial draws from its own [`CounterRng`] substream keyed by
//! `(seed, range_index << 32 | trial)`, so reports are a pure function of the
//! configuration and seed regardless of evaluation order.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cost::{cost_of_unit, CostRecord, UnitVariant};
use crate::error::{Error, Result};
use crate::exp::{build_lut, exp_reference, CordicConfig, ExpLut};
use crate::fixed::{Fixed, QFormat};
use crate::reduced::{argmax_comparator, argmax_by_scan, ComparatorTreeConfig};
use crate::rng::CounterRng;
use crate::softmax::{
    inverse_softmax, predict_inverse, pseudo_softmax_base2, softmax_exact, softmax_stable,
    LogitVector,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Variant {
    Exact,
    Stable,
    Base2,
    Inverse,
    CordicExp,
    Reduced,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Exact,
        Variant::Stable,
        Variant::Base2,
        Variant::Inverse,
        Variant::CordicExp,
        Variant::Reduced,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::Stable => "stable",
            Variant::Base2 => "base2",
            Variant::Inverse => "inverse",
            Variant::CordicExp => "cordic-exp",
            Variant::Reduced => "reduced",
        }
    }

    /// Variants that consume the quantized datapath word rather than reals.
    pub const fn is_quantized(self) -> bool {
        matches!(self, Variant::Base2 | Variant::Reduced)
    }

    pub fn unit(self, params: &UnitParams) -> UnitVariant {
        match self {
            Variant::Exact => UnitVariant::Exact,
            Variant::Stable => UnitVariant::Stable,
            Variant::Base2 => UnitVariant::Base2 {
                addr_bits: params.lut_addr_bits,
                value_format: params.lut_format,
            },
            Variant::Inverse => UnitVariant::Inverse,
            Variant::CordicExp => UnitVariant::CordicExp {
                iterations: params.cordic_iterations,
                word_format: params.cordic_format,
            },
            Variant::Reduced => UnitVariant::Reduced,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or(Error::UnknownVariant)
    }
}

/// Datapath parameters shared by the fixed-point variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UnitParams {
    /// Logit word for the quantized variants.
    pub word_format: QFormat,
    pub lut_addr_bits: u32,
    pub lut_format: QFormat,
    /// Output word of the pseudo-softmax probabilities.
    pub prob_format: QFormat,
    pub cordic_iterations: u32,
    pub cordic_format: QFormat,
}

impl Default for UnitParams {
    fn default() -> Self {
        UnitParams {
            word_format: QFormat::sq(7, 8),
            lut_addr_bits: 8,
            lut_format: QFormat::uq(1, 15),
            prob_format: QFormat::sq(1, 30),
            cordic_iterations: 16,
            cordic_format: QFormat::sq(7, 16),
        }
    }
}

/// Prebuilt tables for a parameter set.
#[derive(Debug, Clone)]
pub struct Units {
    params: UnitParams,
    lut: ExpLut,
    cordic: CordicConfig,
}

impl Units {
    pub fn new(params: UnitParams) -> Result<Self> {
        Ok(Units {
            lut: build_lut(params.lut_addr_bits, params.lut_format)?,
            cordic: CordicConfig::new(params.cordic_iterations, params.cordic_format)?,
            params,
        })
    }

    pub fn with_lut(params: UnitParams, lut: ExpLut) -> Result<Self> {
        let params = UnitParams {
            lut_addr_bits: lut.addr_bits(),
            lut_format: lut.value_format(),
            ..params
        };
        Ok(Units { cordic: CordicConfig::new(params.cordic_iterations, params.cordic_format)?, lut, params })
    }

    pub fn params(&self) -> &UnitParams {
        &self.params
    }

    pub fn lut(&self) -> &ExpLut {
        &self.lut
    }

    pub fn cordic(&self) -> &CordicConfig {
        &self.cordic
    }
}

/// A variant's output for one logit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub class: usize,
    /// Probabilities, when the variant produces them.
    pub probs: Option<Vec<f64>>,
}

/// Runs one output-stage variant on `x`.
pub fn evaluate(variant: Variant, x: &LogitVector, units: &Units) -> Result<Evaluation> {
    let params = &units.params;
    match variant {
        Variant::Exact => {
            let p = softmax_exact(x)?;
            Ok(Evaluation { class: p.argmax(), probs: Some(p.into_inner()) })
        }
        Variant::Stable => {
            let p = softmax_stable(x);
            Ok(Evaluation { class: p.argmax(), probs: Some(p.into_inner()) })
        }
        Variant::Base2 => {
            let p = pseudo_softmax_base2(&x.quantize(params.word_format), &units.lut, params.prob_format)?;
            let class = argmax_by_scan(&p).ok_or(Error::EmptyInput)?;
            Ok(Evaluation { class, probs: Some(p.iter().map(Fixed::to_real).collect()) })
        }
        Variant::Inverse => {
            let s = inverse_softmax(x);
            Ok(Evaluation { class: predict_inverse(&s), probs: Some(s.reciprocals().into_inner()) })
        }
        Variant::Reduced => {
            let cfg = ComparatorTreeConfig::new(x.len(), params.word_format)?;
            let pred = argmax_comparator(&x.quantize(params.word_format), &cfg)?;
            Ok(Evaluation { class: pred.class_index, probs: None })
        }
        Variant::CordicExp => Err(Error::UnsupportedVariant(
            "cordic-exp is an exponential evaluator, not an output stage",
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InputSpec {
    pub lo: f64,
    pub hi: f64,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

impl InputSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::InvalidSpec("bounds must be finite"));
        }
        if self.lo >= self.hi {
            return Err(Error::InvalidSpec("lo must be below hi"));
        }
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1"));
        }
        Ok(())
    }
}

/// The `stream`-th logit vector of `spec`: `k` i.i.d. uniform draws on `[lo, hi)`.
pub fn gen_trial(spec: &InputSpec, stream: u64) -> LogitVector {
    let mut rng = CounterRng::substream(spec.seed, stream);
    let values = (0..spec.k).map(|_| rng.uniform(spec.lo, spec.hi)).collect();
    LogitVector::new(values).expect("uniform draws are finite")
}

pub fn gen_uniform(spec: &InputSpec) -> Result<Vec<LogitVector>> {
    spec.validate()?;
    Ok((0..spec.trials as u64).map(|t| gen_trial(spec, t)).collect())
}

/// Per-variant agreement and error statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VariantStats {
    pub variant: Variant,
    /// Trials on which the prediction was compared with the oracle.
    pub scored_trials: u64,
    /// Trials skipped because the top-two gap was within one input ulp.
    pub gap_filtered: u64,
    /// Trials on which the variant itself overflowed or underflowed.
    pub failed_trials: u64,
    pub agreements: u64,
    pub agreement_rate: Option<f64>,
    pub max_abs_prob_error: Option<f64>,
    pub mean_abs_prob_error: Option<f64>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    scored: u64,
    filtered: u64,
    failed: u64,
    agree: u64,
    err_max: f64,
    err_sum: f64,
    err_count: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.scored += other.scored;
        self.filtered += other.filtered;
        self.failed += other.failed;
        self.agree += other.agree;
        self.err_max = self.err_max.max(other.err_max);
        self.err_sum += other.err_sum;
        self.err_count += other.err_count;
    }

    fn stats(&self, variant: Variant) -> VariantStats {
        let has_err = self.err_count > 0;
        VariantStats {
            variant,
            scored_trials: self.scored,
            gap_filtered: self.filtered,
            failed_trials: self.failed,
            agreements: self.agree,
            agreement_rate: (self.scored > 0).then(|| self.agree as f64 / self.scored as f64),
            max_abs_prob_error: has_err.then_some(self.err_max),
            mean_abs_prob_error: has_err.then(|| self.err_sum / self.err_count as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RangeReport {
    pub lo: f64,
    pub hi: f64,
    /// Trials dropped because the oracle itself failed.
    pub oracle_failures: u64,
    pub variants: Vec<VariantStats>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VariantCost {
    pub variant: Variant,
    pub cost: CostRecord,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentConfig {
    pub ranges: Vec<(f64, f64)>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub variants: Vec<Variant>,
    pub oracle: Variant,
    pub params: UnitParams,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub overall: Vec<VariantStats>,
    pub per_range: Vec<RangeReport>,
    pub costs: Vec<VariantCost>,
}

impl ExperimentReport {
    pub fn overall_for(&self, variant: Variant) -> Option<&VariantStats> {
        self.overall.iter().find(|s| s.variant == variant)
    }
}

/// The three input ranges of the golden table.
pub const TABLE1_RANGES: [(f64, f64); 3] = [(-100.0, 0.0), (0.0, 100.0), (-1.0, 1.0)];

/// Runs every variant against the oracle over every range.
pub fn run_experiment(config: &ExperimentConfig, units: &Units) -> Result<ExperimentReport> {
    if config.ranges.is_empty() {
        return Err(Error::InvalidSpec("at least one range is required"));
    }
    if config.oracle == Variant::CordicExp {
        return Err(Error::UnsupportedVariant("cordic-exp cannot serve as the oracle"));
    }
    let mut variants = config.variants.clone();
    if !variants.contains(&config.oracle) {
        variants.push(config.oracle);
    }
    if variants.contains(&Variant::CordicExp) {
        return Err(Error::UnsupportedVariant("cordic-exp is exp-only; compare output stages"));
    }
    let ulp = units.params.word_format.resolution();

    let mut overall = alloc::vec![Tally::default(); variants.len()];
    let mut per_range = Vec::with_capacity(config.ranges.len());
    for (r, &(lo, hi)) in config.ranges.iter().enumerate() {
        let spec = InputSpec { lo, hi, k: config.k, trials: config.trials, seed: config.seed };
        spec.validate()?;
        let mut tallies = alloc::vec![Tally::default(); variants.len()];
        let mut oracle_failures = 0;
        for trial in 0..config.trials as u64 {
            let x = gen_trial(&spec, ((r as u64) << 32) | trial);
            let oracle = match evaluate(config.oracle, &x, units) {
                Ok(e) => e,
                Err(Error::Overflow | Error::Underflow) => {
                    oracle_failures += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let decidable = x.top_two_gap() > ulp;
            for (tally, &variant) in tallies.iter_mut().zip(&variants) {
                if variant.is_quantized() && !decidable {
                    tally.filtered += 1;
                    continue;
                }
                let eval = match evaluate(variant, &x, units) {
                    Ok(e) => e,
                    Err(Error::Overflow | Error::Underflow) => {
                        tally.failed += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                tally.scored += 1;
                tally.agree += u64::from(eval.class == oracle.class);
                if let (Some(p), Some(q)) = (&eval.probs, &oracle.probs) {
                    for (a, b) in p.iter().zip(q) {
                        let d = (a - b).abs();
                        tally.err_max = tally.err_max.max(d);
                        tally.err_sum += d;
                        tally.err_count += 1;
                    }
                }
            }
        }
        for (o, t) in overall.iter_mut().zip(&tallies) {
            o.merge(t);
        }
        per_range.push(RangeReport {
            lo,
            hi,
            oracle_failures,
            variants: tallies.iter().zip(&variants).map(|(t, &v)| t.stats(v)).collect(),
        });
    }

    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        config: ExperimentConfig { variants: variants.clone(), ..config.clone() },
        overall: overall.iter().zip(&variants).map(|(t, &v)| t.stats(v)).collect(),
        per_range,
        costs: variants
            .iter()
            .map(|&v| VariantCost { variant: v, cost: cost_of_unit(v.unit(&units.params), config.k) })
            .collect(),
    })
}

/// Single-range agreement run.
pub fn run_agreement(
    spec: &InputSpec,
    variants: &[Variant],
    oracle: Variant,
    units: &Units,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let config = ExperimentConfig {
        ranges: alloc::vec![(spec.lo, spec.hi)],
        k: spec.k,
        trials: spec.trials,
        seed: spec.seed,
        variants: variants.to_vec(),
        oracle,
        params: units.params,
    };
    run_experiment(&config, units)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CurveRow {
    pub x: f64,
    pub exp_x: f64,
    pub softmax_x: f64,
}

/// `(x, e^x, s(x))` for the first vector of `spec`, sorted by `x`.
pub fn emit_monotonicity_data(spec: &InputSpec) -> Result<Vec<CurveRow>> {
    spec.validate()?;
    let x = gen_trial(spec, 0);
    let p = softmax_stable(&x);
    let mut rows: Vec<CurveRow> = x
        .as_slice()
        .iter()
        .zip(p.as_slice())
        .map(|(&x, &s)| CurveRow { x, exp_x: exp_reference(x), softmax_x: s })
        .collect();
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn spec(lo: f64, hi: f64, k: usize, trials: usize) -> InputSpec {
        InputSpec { lo, hi, k, trials, seed: 0xDEC0DE }
    }

    #[test]
    fn generation_bounds_and_determinism() {
        let a = gen_uniform(&spec(-1.0, 1.0, 10, 1)).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].len(), 10);
        assert!(a[0].as_slice().iter().all(|v| (-1.0..1.0).contains(v)));
        assert_eq!(a, gen_uniform(&spec(-1.0, 1.0, 10, 1)).unwrap());
        let neg = gen_uniform(&spec(-100.0, 0.0, 50, 20)).unwrap();
        assert!(neg.iter().flat_map(|v| v.as_slice()).all(|&v| v < 0.0));
        let other = gen_uniform(&InputSpec { seed: 1, ..spec(-1.0, 1.0, 10, 1) }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn spec_validation() {
        assert!(gen_uniform(&spec(1.0, 1.0, 10, 1)).is_err());
        assert!(gen_uniform(&spec(-1.0, 1.0, 0, 1)).is_err());
        assert!(gen_uniform(&spec(-1.0, 1.0, 1, 0)).is_err());
        assert!(gen_uniform(&spec(f64::NEG_INFINITY, 1.0, 1, 1)).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("softmax".parse::<Variant>(), Err(Error::UnknownVariant));
    }

    #[test]
    fn reduced_and_exact_agree_with_stable() {
        let units = Units::new(UnitParams::default()).unwrap();
        let r = run_agreement(
            &spec(-1.0, 1.0, 10, 500),
            &[Variant::Reduced, Variant::Exact, Variant::Inverse, Variant::Base2],
            Variant::Stable,
            &units,
        )
        .unwrap();
        for v in [Variant::Reduced, Variant::Exact, Variant::Inverse, Variant::Base2] {
            assert_eq!(r.overall_for(v).unwrap().agreement_rate, Some(1.0), "{v}");
        }
        let exact = r.overall_for(Variant::Exact).unwrap();
        assert!(exact.max_abs_prob_error.unwrap() <= 1e-12);
        assert_eq!(r.overall_for(Variant::Reduced).unwrap().max_abs_prob_error, None);
        assert_eq!(r.overall_for(Variant::Stable).unwrap().max_abs_prob_error, Some(0.0));
        assert_eq!(r.costs.len(), 5);
    }

    #[test]
    fn exact_oracle_failures_are_counted() {
        let units = Units::new(UnitParams::default()).unwrap();
        let config = ExperimentConfig {
            ranges: vec![(700.0, 800.0)],
            k: 4,
            trials: 10,
            seed: 3,
            variants: vec![Variant::Stable],
            oracle: Variant::Exact,
            params: *units.params(),
        };
        let r = run_experiment(&config, &units).unwrap();
        assert_eq!(r.per_range[0].oracle_failures, 10);
        assert_eq!(r.overall_for(Variant::Stable).unwrap().agreement_rate, None);
    }

    #[test]
    fn cordic_is_rejected_as_output_stage() {
        let units = Units::new(UnitParams::default()).unwrap();
        let x = LogitVector::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(evaluate(Variant::CordicExp, &x, &units), Err(Error::UnsupportedVariant(_))));
        assert!(run_agreement(&spec(-1.0, 1.0, 2, 1), &[Variant::CordicExp], Variant::Stable, &units).is_err());
    }

    #[test]
    fn monotone_emission() {
        for (lo, hi, k) in [(-1.0, 1.0, 10), (-10.0, 10.0, 200), (-5.0, 5.0, 200)] {
            let rows = emit_monotonicity_data(&spec(lo, hi, k, 1)).unwrap();
            assert_eq!(rows.len(), k);
            for w in rows.windows(2) {
                assert!(w[0].x < w[1].x);
                assert!(w[0].exp_x < w[1].exp_x);
                assert!(w[0].softmax_x < w[1].softmax_x);
            }
        }
    }
}
