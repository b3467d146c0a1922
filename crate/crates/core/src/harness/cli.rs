//! `qgrad` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{fixed_hessian_bound_binary, quadratic_bound};
use crate::error::{Error, Result};
use crate::harness::cv::{compare_methods, compare_methods_per_fold, kfold_split, DEFAULT_SEED};
use crate::harness::data::{load_csv, load_libsvm, normalize, LabelColumn, RawTable};
use crate::harness::synthetic::separable_with_noise;
use crate::optimizers::{train, LrSchedule, Method, TrainConfig};
use crate::packedsim::{build_context, train_packed, Evaluator, FIDELITY_SLOTS};
use crate::polyapprox::{fit_least_squares, reference_poly};

#[derive(Debug, Parser)]
#[command(
    name = "qgrad",
    version,
    about = "Quadratic-gradient logistic regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one method on the whole dataset and write its trace.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Step-size schedule of baseline NAG.
        #[arg(long, value_enum, default_value_t = NagRate::Harmonic)]
        nag_rate: NagRate,
        /// Trace CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate several methods and write a report.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated method names.
        #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "nag,nag+")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Step-size schedule of baseline NAG.
        #[arg(long, value_enum, default_value_t = NagRate::Harmonic)]
        nag_rate: NagRate,
        /// Report CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-iteration training log-likelihoods here.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Fit min-max scaling on each training split instead of the full table.
        #[arg(long)]
        per_fold_normalization: bool,
    },
    /// Least-squares polynomial fit of the sigmoid, printed as CSV.
    FitPoly {
        #[arg(long, default_value_t = 5)]
        degree: usize,
        #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = crate::polyapprox::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Enhanced NAG on packed slot vectors with the degree-5 sigmoid polynomial.
    SimulatePacked {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 3)]
        iterations: usize,
        /// Slot count; defaults to the smallest power of two that fits.
        #[arg(long)]
        slots: Option<usize>,
        /// Use the 32768-slot layout of the reference parameters.
        #[arg(long, conflicts_with = "slots")]
        fidelity: bool,
        /// Fail unless packed data was only decoded for logging.
        #[arg(long)]
        audit_primitives: bool,
        /// Trace CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic binary dataset as CSV (label column `y` first).
    Synth {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Baseline NAG step size at iteration index `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NagRate {
    /// `10 / (t + 1)` on the summed gradient.
    Harmonic,
    /// `10 / ((t + 1) n)`, i.e. the same rate on the mean gradient.
    PerSample,
}

impl NagRate {
    fn config(self) -> TrainConfig {
        let schedule = match self {
            NagRate::Harmonic => LrSchedule::Harmonic(10.0),
            NagRate::PerSample => LrSchedule::HarmonicPerSample(10.0),
        };
        TrainConfig {
            schedule,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Libsvm,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Label column name or zero-based index (CSV only).
    #[arg(long, default_value = "0", value_parser = parse_label)]
    pub label_col: LabelColumn,
}

impl InputArgs {
    fn load(&self) -> Result<RawTable> {
        match self.format {
            Format::Csv => load_csv(&self.data, &self.label_col),
            Format::Libsvm => load_libsvm(&self.data),
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_label(s: &str) -> Result<LabelColumn, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Runs a parsed command, writing primary output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train {
            input,
            method,
            iterations,
            nag_rate,
            out,
        } => {
            let prepared = normalize(&input.load()?)?;
            let trace = train(
                method,
                &prepared.data,
                &prepared.labels,
                iterations,
                &nag_rate.config(),
            )?;
            with_output(out.as_deref(), stdout, |w| trace.write_csv(w))
        }
        Command::Compare {
            input,
            methods,
            iterations,
            folds,
            seed,
            nag_rate,
            out,
            traces,
            per_fold_normalization,
        } => {
            let table = input.load()?;
            let cv = kfold_split(table.rows(), folds, seed)?;
            let cfg = nag_rate.config();
            let report = if per_fold_normalization {
                compare_methods_per_fold(&table, &methods, iterations, &cv, &cfg)?
            } else {
                let p = normalize(&table)?;
                compare_methods(&p.data, &p.labels, &methods, iterations, &cv, &cfg)?
            };
            if let Some(t) = traces {
                let mut w = BufWriter::new(File::create(t)?);
                report.write_traces_csv(&mut w)?;
                w.flush()?;
            }
            with_output(out.as_deref(), stdout, |w| report.write_csv(w))
        }
        Command::FitPoly {
            degree,
            lo,
            hi,
            samples,
        } => {
            let poly = fit_least_squares(degree, lo, hi, samples)?;
            let header: Vec<String> = std::iter::once(0)
                .chain((1..=degree).step_by(2))
                .map(|p| format!("c{p}"))
                .collect();
            let values: Vec<String> = poly.coefficients().iter().map(f64::to_string).collect();
            writeln!(stdout, "{}", header.join(","))?;
            writeln!(stdout, "{}", values.join(","))?;
            Ok(())
        }
        Command::SimulatePacked {
            input,
            iterations,
            slots,
            fidelity,
            audit_primitives,
            out,
        } => {
            let prepared = normalize(&input.load()?)?;
            let y = prepared.labels.binary()?;
            let bound = quadratic_bound(
                &fixed_hessian_bound_binary(prepared.data.x())?,
                crate::bounds::DEFAULT_EPSILON,
            )?;
            let slots = if fidelity {
                Some(FIDELITY_SLOTS)
            } else {
                slots
            };
            let ctx = build_context(&prepared.data, &y, &bound, slots)?;
            let ev = Evaluator::new();
            let run = train_packed(&ev, &ctx, &reference_poly(), iterations)?;
            with_output(out.as_deref(), stdout, |w| run.trace.write_csv(w))?;
            writeln!(stdout, "{}", run.counts)?;
            if audit_primitives {
                if !run.counts.audit_passed() {
                    return Err(Error::Numerical(format!(
                        "primitive audit failed: {} decodes outside logging",
                        run.counts.unlogged_decodes
                    )));
                }
                writeln!(
                    stdout,
                    "audit=pass,logged_decodes={}",
                    run.counts.logged_decodes
                )?;
            }
            Ok(())
        }
        Command::Synth {
            n,
            d,
            noise,
            seed,
            out,
        } => {
            let t = separable_with_noise(n, d, noise, seed)?;
            with_output(out.as_deref(), stdout, |w| {
                write!(w, "{}", t.label_name)?;
                for c in &t.columns {
                    write!(w, ",{c}")?;
                }
                writeln!(w)?;
                for (row, y) in t.features.rows().into_iter().zip(&t.labels) {
                    write!(w, "{y}")?;
                    for v in row {
                        write!(w, ",{v}")?;
                    }
                    writeln!(w)?;
                }
                Ok(())
            })
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 for bad input or flags, 2 for numerical failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if shown {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let _ = write!(stderr, "{}", e.render());
            return 1;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
