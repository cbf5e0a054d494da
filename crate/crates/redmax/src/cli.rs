//! Command-line front end.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use redmax_core::cost::{cost_of_unit, CostRecord};
use redmax_core::harness::{
    emit_monotonicity_data, evaluate, gen_uniform, run_experiment, ExperimentConfig, InputSpec,
    UnitParams, Units, Variant, TABLE1_RANGES,
};
use redmax_core::table1::{reproduce_table1, Table1, TABLE1_REL_TOL};
use redmax_core::{Error as CoreError, QFormat};
use serde::Serialize;

use crate::formats::{self, FormatError};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const SEED_ENV: &str = "REDMAX_SEED";

#[derive(Debug, Parser)]
#[command(name = "redmax", version, about = "Softmax output-stage units and the comparator-only reduced unit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify each logit vector of a CSV file; prints one class index per line.
    Predict {
        /// Logits CSV, `-` for stdin.
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value = "reduced")]
        variant: Variant,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
        #[command(flatten)]
        datapath: DatapathArgs,
    },
    /// Agreement of each variant with an oracle over random logits; writes a JSON report.
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "reduced,stable,exact,inverse,base2")]
        variants: Vec<Variant>,
        #[arg(long, default_value = "stable")]
        oracle: Variant,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
        #[command(flatten)]
        datapath: DatapathArgs,
    },
    /// Recompute the golden output-sample table and check it.
    Table1 {
        /// Print the reproduction as JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// `x,exp_x,softmax_x` rows for one random logit vector, sorted by x.
    EmitCurves {
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 1000)]
        k: usize,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
    },
    /// Structural cost record of one unit.
    Cost {
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        datapath: DatapathArgs,
    },
    /// Write random logit vectors as CSV.
    Gen {
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
    },
    /// Dump the exponential LUT as CSV.
    Lut {
        #[command(flatten)]
        datapath: DatapathArgs,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DatapathArgs {
    /// Logit word of the quantized variants.
    #[arg(long, default_value = "sQ7.8")]
    pub format: QFormat,
    #[arg(long, default_value_t = 8)]
    pub addr_bits: u32,
    #[arg(long, default_value = "uQ1.15")]
    pub lut_format: QFormat,
    /// Load LUT entries from a CSV dump instead of building them.
    #[arg(long)]
    pub lut: Option<PathBuf>,
    #[arg(long, default_value = "sQ1.30")]
    pub prob_format: QFormat,
    #[arg(long, default_value_t = 16)]
    pub iterations: u32,
    #[arg(long, default_value = "sQ7.16")]
    pub cordic_format: QFormat,
}

impl DatapathArgs {
    fn params(&self) -> UnitParams {
        UnitParams {
            word_format: self.format,
            lut_addr_bits: self.addr_bits,
            lut_format: self.lut_format,
            prob_format: self.prob_format,
            cordic_iterations: self.iterations,
            cordic_format: self.cordic_format,
        }
    }

    fn units(&self) -> Result<Units, CliError> {
        let params = self.params();
        match &self.lut {
            None => Ok(Units::new(params)?),
            Some(path) => {
                let lut = formats::read_lut_csv(open_input(path)?, self.lut_format)
                    .map_err(|e| CliError::input(path, e))?;
                if lut.addr_bits() != self.addr_bits {
                    return Err(CliError::Usage(format!(
                        "{} holds a {}-bit LUT but --addr-bits is {}",
                        path.display(),
                        lut.addr_bits(),
                        self.addr_bits
                    )));
                }
                Ok(Units::with_lut(params, lut)?)
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Lower bound of the logit range; without --lo/--hi the three golden ranges are run.
    #[arg(long, allow_hyphen_values = true, requires = "hi")]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input { path: String, source: FormatError },
    #[error("{0}")]
    Overflow(String),
    #[error("golden table mismatch: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    pub const EXIT_GENERIC: i32 = 1;
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_INPUT: i32 = 3;
    pub const EXIT_OVERFLOW: i32 = 4;
    pub const EXIT_MISMATCH: i32 = 5;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Input { .. } => Self::EXIT_INPUT,
            CliError::Overflow(_) => Self::EXIT_OVERFLOW,
            CliError::Mismatch(_) => Self::EXIT_MISMATCH,
            CliError::Io(_) | CliError::Core(_) => Self::EXIT_GENERIC,
        }
    }

    fn input(path: &Path, source: FormatError) -> Self {
        CliError::Input { path: display_path(path), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Overflow | CoreError::Underflow | CoreError::ExponentOutOfRange => {
                CliError::Overflow(e.to_string())
            }
            CoreError::InvalidFormat { .. }
            | CoreError::FormatSyntax
            | CoreError::LutAddressBits(_)
            | CoreError::LutFormatTooNarrow(_)
            | CoreError::TooFewIterations(_)
            | CoreError::InvalidSpec(_)
            | CoreError::UnsupportedVariant(_)
            | CoreError::UnknownVariant => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

fn display_path(path: &Path) -> String {
    if path == Path::new("-") {
        "<stdin>".to_owned()
    } else {
        path.display().to_string()
    }
}

fn open_input(path: &Path) -> Result<Box<dyn Read>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdin().lock()))
    } else {
        let file = File::open(path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn open_output(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdout().lock()))
    } else {
        let file = File::create(path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn format_error(path: &Path, e: FormatError) -> CliError {
    match e {
        FormatError::Io(io) => CliError::Io(io),
        e => CliError::input(path, e),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Predict { input, variant, output, datapath } => predict(&input, variant, &output, &datapath),
        Command::Compare { variants, oracle, spec, output, datapath } => {
            let ranges = match (spec.lo, spec.hi) {
                (Some(lo), Some(hi)) => vec![(lo, hi)],
                (None, None) => TABLE1_RANGES.to_vec(),
                _ => return Err(CliError::Usage("--lo and --hi must be given together".into())),
            };
            let units = datapath.units()?;
            let config = ExperimentConfig {
                ranges,
                k: spec.k,
                trials: spec.trials,
                seed: spec.seed,
                variants,
                oracle,
                params: *units.params(),
            };
            let report = run_experiment(&config, &units)?;
            write_json(&output, &report)
        }
        Command::Table1 { json } => table1(json),
        Command::EmitCurves { lo, hi, k, seed, output } => {
            let rows = emit_monotonicity_data(&InputSpec { lo, hi, k, trials: 1, seed })?;
            formats::write_curves_csv(open_output(&output)?, &rows).map_err(|e| format_error(&output, e))
        }
        Command::Cost { variant, k, datapath } => {
            if k == 0 {
                return Err(CliError::Usage("k must be at least 1".into()));
            }
            #[derive(Serialize)]
            struct CostReport {
                variant: Variant,
                k: usize,
                cost: CostRecord,
            }
            let cost = cost_of_unit(variant.unit(&datapath.params()), k);
            write_json(Path::new("-"), &CostReport { variant, k, cost })
        }
        Command::Gen { lo, hi, k, trials, seed, output } => {
            let vectors = gen_uniform(&InputSpec { lo, hi, k, trials, seed })?;
            formats::write_logits_csv(open_output(&output)?, &vectors).map_err(|e| format_error(&output, e))
        }
        Command::Lut { datapath, output } => {
            let units = datapath.units()?;
            formats::write_lut_csv(open_output(&output)?, units.lut()).map_err(|e| format_error(&output, e))
        }
    }
}

fn predict(input: &Path, variant: Variant, output: &Path, datapath: &DatapathArgs) -> Result<(), CliError> {
    if variant == Variant::CordicExp {
        return Err(CliError::Usage("cordic-exp computes e^x only and cannot classify".into()));
    }
    let units = datapath.units()?;
    let vectors = formats::read_logits_csv(open_input(input)?).map_err(|e| format_error(input, e))?;
    let mut out = open_output(output)?;
    for (i, x) in vectors.iter().enumerate() {
        let eval = evaluate(variant, x, &units).map_err(|e| match CliError::from(e) {
            CliError::Overflow(msg) => CliError::Overflow(format!("line {}: {msg}", i + 1)),
            other => other,
        })?;
        writeln!(out, "{}", eval.class)?;
    }
    out.flush()?;
    Ok(())
}

fn table1(json: bool) -> Result<(), CliError> {
    let table = reproduce_table1();
    let mut out = io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut out, &table).map_err(io::Error::from)?;
        writeln!(out)?;
    } else {
        write_table1_text(&mut out, &table)?;
    }
    out.flush()?;
    let mismatches = table.mismatches(TABLE1_REL_TOL);
    let rows = table.rows().count();
    if mismatches > 0 || !table.classes_match() {
        return Err(CliError::Mismatch(format!(
            "{mismatches}/{rows} rows outside {TABLE1_REL_TOL:e} relative; classes {}",
            if table.classes_match() { "match" } else { "differ" }
        )));
    }
    Ok(())
}

fn write_table1_text(out: &mut impl Write, table: &Table1) -> io::Result<()> {
    for col in &table.columns {
        writeln!(out, "{}", col.name)?;
        writeln!(
            out,
            "{:>4} {:>9} {:>12} {:>12} {:>9} {:>12} {:>12} {:>9}  ok",
            "row", "x", "e^x", "printed", "rel", "s(x)", "printed", "rel"
        )?;
        for (i, r) in col.rows.iter().enumerate() {
            writeln!(
                out,
                "{:>4} {:>9.2} {:>12.4e} {:>12.3e} {:>9.2e} {:>12.4e} {:>12.3e} {:>9.2e}  {}{}",
                i,
                r.input,
                r.exp,
                r.printed_exp,
                r.exp_rel_error(),
                r.softmax,
                r.printed_softmax,
                r.softmax_rel_error(),
                if r.within(TABLE1_REL_TOL) { "yes" } else { "no" },
                if i == col.bold_row { "  *" } else { "" },
            )?;
        }
        writeln!(
            out,
            "predicted: reduced {} softmax {} printed {}\n",
            col.reduced_class, col.softmax_class, col.bold_row
        )?;
    }
    let rows = table.rows().count();
    let mismatches = table.mismatches(TABLE1_REL_TOL);
    writeln!(
        out,
        "rows within {TABLE1_REL_TOL:e}: {}/{rows} {}",
        rows - mismatches,
        if mismatches == 0 { "PASS" } else { "FAIL" }
    )?;
    writeln!(out, "predicted classes: {}", if table.classes_match() { "PASS" } else { "FAIL" })
}
