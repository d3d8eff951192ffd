//! Command-line front end.
//!
//! Machine-readable output goes to the writer passed to [`execute`] (stdout or
//! `--out`); progress and warnings go to the log writer (stderr).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{
    self, default_xi, ExperimentConfig, ExperimentResult, NoiseModel, RamseyProtocol,
    DEFAULT_BATCHES,
};
use crate::parallel::Execution;
use crate::pauli::{Letter, PauliOperator};
use crate::simulator::{logical_action_oracle, SignalHamiltonian};
use crate::stabilizer::{self, LogicalAxis, StabilizerCode, BUILTIN_CODES};

#[derive(Debug, Parser)]
#[command(name = "qecmetro", version, about = "Stabilizer codes as metrological probes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generators, logicals, distance and logical coset sizes.
    CodeInfo(CodeArgs),
    /// Classify a Pauli operator against a code.
    Classify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(allow_hyphen_values = true)]
        pauli: String,
    },
    /// List every physical implementation of a logical operator.
    Coset {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value = "z")]
        axis: AxisArg,
    },
    /// Classify every cyclic shift of a Pauli operator.
    Orbit {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(allow_hyphen_values = true)]
        pauli: String,
    },
    /// Brute-force code distance.
    Distance(CodeArgs),
    /// Run a phase-estimation experiment or a parameter scan.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    /// Built-in code name.
    #[arg(long, conflicts_with = "file")]
    pub builtin: Option<String>,
    /// Code definition file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    X,
    Z,
}

impl From<AxisArg> for LogicalAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => LogicalAxis::X,
            AxisArg::Z => LogicalAxis::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    #[value(name = "M")]
    M,
    #[value(name = "p")]
    P,
    #[value(name = "N")]
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Signal preset: logicalZ-all or logicalX-all.
    #[arg(long, default_value = "logicalZ-all", conflicts_with = "signal_terms")]
    pub signal: String,
    /// File of `<coefficient> <pauli>` lines.
    #[arg(long)]
    pub signal_terms: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Signal strength; defaults to the point where 2|M|xi*tau = pi/2.
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BATCHES)]
    pub batches: usize,
    /// Noise operators: comma-separated Pauli words, or X-all / Y-all / Z-all
    /// for every single-qubit operator of that letter.
    #[arg(long)]
    pub noise: Option<String>,
    /// Per-cycle probability of each noise operator.
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
    /// Correction cycles.
    #[arg(long, default_value_t = 10)]
    pub cycles: usize,
    /// Apply noise without syndrome correction.
    #[arg(long)]
    pub no_correction: bool,
    #[arg(long, value_enum)]
    pub scan: Option<ScanKind>,
    /// Largest term count in an M scan.
    #[arg(long, default_value_t = 5)]
    pub max_m: usize,
    /// Probabilities for a p scan.
    #[arg(long, value_delimiter = ',', default_value = "0.002,0.005,0.01,0.02")]
    pub p_values: Vec<f64>,
    /// Shot counts for an N scan.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub shot_counts: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to JSON for single runs and CSV for scans.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Run shots on one thread.
    #[arg(long)]
    pub sequential: bool,
}

/// Closed-form implementation count `n(n-1)/2 + 1`, shown beside the enumerated coset size.
pub fn quoted_implementation_count(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2 + 1
}

pub fn load_code(args: &CodeArgs) -> Result<StabilizerCode> {
    match (&args.builtin, &args.file) {
        (Some(name), None) => stabilizer::builtin(name),
        (None, Some(path)) => stabilizer::load_code_file(path),
        (None, None) => Err(Error::Config(format!(
            "select a code with --builtin ({}) or --file",
            BUILTIN_CODES.join(", ")
        ))),
        (Some(_), Some(_)) => Err(Error::Config("--builtin and --file are exclusive".into())),
    }
}

fn has_code(args: &CodeArgs) -> bool {
    args.builtin.is_some() || args.file.is_some()
}

/// Runs a parsed command. Results go to `out` (or `--out`), diagnostics to `log`.
pub fn execute(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::CodeInfo(args) => code_info(&load_code(args)?, out),
        Command::Classify { code, pauli } => classify(&load_code(code)?, pauli, out),
        Command::Coset { code, axis } => coset(&load_code(code)?, (*axis).into(), out),
        Command::Orbit { code, pauli } => orbit(&load_code(code)?, pauli, out),
        Command::Distance(args) => {
            let report = load_code(args)?.distance()?;
            writeln!(out, "distance: {}", report.distance)?;
            writeln!(out, "witness: {}", report.witness)?;
            Ok(())
        }
        Command::Experiment(args) => experiment(args, out, log),
    }
}

fn code_info(code: &StabilizerCode, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "code: {}", code.name())?;
    writeln!(out, "n: {}", code.n())?;
    writeln!(out, "generators:")?;
    for g in code.generators() {
        writeln!(out, "  {g}")?;
    }
    writeln!(out, "logical_x: {}", code.logical_x())?;
    writeln!(out, "logical_z: {}", code.logical_z())?;
    let d = code.distance()?;
    writeln!(out, "distance: {} (witness {})", d.distance, d.witness)?;
    writeln!(out, "stabilizer group size: {}", code.enumerate_group()?.len())?;
    let quoted = quoted_implementation_count(code.n());
    for (label, axis) in [("X", LogicalAxis::X), ("Z", LogicalAxis::Z)] {
        let size = code.logical_coset(axis)?.len();
        let flag = if size == quoted { "agrees" } else { "DISCREPANCY" };
        writeln!(
            out,
            "logical {label} coset size: {size} (n(n-1)/2+1 formula: {quoted}, {flag})"
        )?;
    }
    Ok(())
}

fn parse_for(code: &StabilizerCode, text: &str) -> Result<PauliOperator> {
    let p = PauliOperator::parse(text)?;
    if p.n() != code.n() {
        return Err(Error::Dimension {
            expected: code.n(),
            found: p.n(),
        });
    }
    Ok(p)
}

fn classify(code: &StabilizerCode, text: &str, out: &mut dyn Write) -> Result<()> {
    let p = parse_for(code, text)?;
    let symplectic = code.classify(&p)?;
    writeln!(out, "operator: {p}")?;
    writeln!(out, "kind: {symplectic}")?;
    writeln!(out, "syndrome: {:0width$b}", code.syndrome(&p), width = code.generators().len().max(1))?;
    match logical_action_oracle(code, &p) {
        Ok(oracle) => {
            let verdict = if oracle == symplectic { "agree" } else { "DISAGREE" };
            writeln!(out, "symplectic: {symplectic}")?;
            writeln!(out, "statevector: {oracle} ({verdict})")?;
        }
        Err(Error::Capacity { limit, .. }) => {
            writeln!(out, "statevector: skipped (n > {limit})")?;
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn coset(code: &StabilizerCode, axis: LogicalAxis, out: &mut dyn Write) -> Result<()> {
    let mut elements = code.logical_coset(axis)?;
    elements.sort_by_key(|e| (e.operator.weight(), e.operator.lex_index()));
    let label = match axis {
        LogicalAxis::X => Letter::X,
        LogicalAxis::Z => Letter::Z,
    };
    for e in &elements {
        let sign = if e.action_sign > 0 { '+' } else { '-' };
        writeln!(out, "{}  weight {}  acts as {sign}{label}", e.operator, e.operator.weight())?;
    }
    let quoted = quoted_implementation_count(code.n());
    let flag = if elements.len() == quoted { "agrees" } else { "DISCREPANCY" };
    writeln!(
        out,
        "coset size: {} (n(n-1)/2+1 formula: {quoted}, {flag})",
        elements.len()
    )?;
    Ok(())
}

fn orbit(code: &StabilizerCode, text: &str, out: &mut dyn Write) -> Result<()> {
    let p = parse_for(code, text)?;
    for entry in code.cyclic_orbit_report(&p)? {
        writeln!(out, "{}  {}  {}", entry.shift, entry.operator, entry.classification)?;
    }
    Ok(())
}

/// Every single-qubit operator of one letter.
fn single_qubit_ops(n: usize, letter: Letter) -> Vec<PauliOperator> {
    (0..n)
        .map(|q| {
            let mut letters = vec![Letter::I; n];
            letters[q] = letter;
            PauliOperator::from_letters(&letters, crate::pauli::Phase::ONE)
        })
        .collect()
}

pub fn parse_noise_ops(code: &StabilizerCode, text: &str) -> Result<Vec<PauliOperator>> {
    match text {
        "X-all" => Ok(single_qubit_ops(code.n(), Letter::X)),
        "Y-all" => Ok(single_qubit_ops(code.n(), Letter::Y)),
        "Z-all" => Ok(single_qubit_ops(code.n(), Letter::Z)),
        list => list
            .split(',')
            .map(|w| parse_for(code, w.trim()))
            .collect(),
    }
}

fn signal_for(code: &StabilizerCode, args: &ExperimentArgs) -> Result<SignalHamiltonian> {
    match &args.signal_terms {
        Some(path) => metrology::parse_signal_terms(&fs::read_to_string(path)?),
        None => metrology::signal_preset(code, &args.signal),
    }
}

fn build_config(
    code: StabilizerCode,
    hamiltonian: SignalHamiltonian,
    args: &ExperimentArgs,
) -> Result<ExperimentConfig> {
    let xi = match args.xi {
        Some(xi) => xi,
        None => {
            let m = RamseyProtocol::new(code.clone(), hamiltonian.clone())?
                .model()
                .effective_m;
            if m == 0.0 {
                return Err(Error::Uninformative(
                    "logical signal terms cancel (effective M = 0)".into(),
                ));
            }
            default_xi(m, args.tau)
        }
    };
    let mut config = ExperimentConfig::new(code, hamiltonian, args.tau, xi, args.shots, args.seed);
    config.batches = args.batches;
    config.execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    if let Some(text) = &args.noise {
        let ops = parse_noise_ops(&config.code, text)?;
        let noise = NoiseModel {
            error_ops: ops,
            probability: args.p,
        };
        config = if args.no_correction {
            ExperimentConfig {
                noise: Some(noise),
                ..config
            }
        } else {
            config.with_noise(noise, args.cycles)
        };
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct SummaryRow {
    code: String,
    n: usize,
    effective_m: f64,
    tau: f64,
    xi_true: f64,
    shots: usize,
    xi_hat: f64,
    bias: f64,
    empirical_std: f64,
    cr_bound: Option<f64>,
    cr_bound_total: Option<f64>,
    sql_baseline: f64,
}

impl From<&ExperimentResult> for SummaryRow {
    fn from(r: &ExperimentResult) -> Self {
        SummaryRow {
            code: r.code.clone(),
            n: r.n,
            effective_m: r.signal.effective_m,
            tau: r.tau,
            xi_true: r.xi_true,
            shots: r.shots,
            xi_hat: r.xi_hat,
            bias: r.bias,
            empirical_std: r.empirical_std,
            cr_bound: r.cr_bound,
            cr_bound_total: r.cr_bound_total,
            sql_baseline: r.sql_baseline,
        }
    }
}

fn emit_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => metrology::write_csv(rows, out),
        Format::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn m_scan_configs(args: &ExperimentArgs) -> Result<Vec<(String, ExperimentConfig)>> {
    let mut configs = Vec::new();
    if has_code(&args.code) {
        let code = load_code(&args.code)?;
        let full = signal_for(&code, args)?;
        for m in 1..=full.terms().len().min(args.max_m) {
            let h = SignalHamiltonian::new(full.terms()[..m].to_vec())?;
            configs.push((format!("{}:{m}", code.name()), build_config(code.clone(), h, args)?));
        }
    } else {
        for name in BUILTIN_CODES {
            let code = stabilizer::builtin(name)?;
            let h = metrology::signal_preset(&code, &args.signal)?;
            if h.terms().len() <= args.max_m {
                configs.push((name.to_string(), build_config(code, h, args)?));
            }
        }
    }
    if configs.is_empty() {
        return Err(Error::Config(format!("no configuration has M <= {}", args.max_m)));
    }
    Ok(configs)
}

fn experiment(args: &ExperimentArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<()> {
    let mut buffer = Vec::new();
    match args.scan {
        None => {
            let code = load_code(&args.code)?;
            let h = signal_for(&code, args)?;
            let config = build_config(code, h, args)?;
            writeln!(
                log,
                "running {} shots on {} (xi = {}, tau = {})",
                config.shots,
                config.code.name(),
                config.xi,
                config.tau
            )?;
            let result = metrology::run_experiment(&config)?;
            for w in &result.warnings {
                writeln!(log, "warning: {w}")?;
            }
            match args.format.unwrap_or(Format::Json) {
                Format::Json => writeln!(buffer, "{}", result.to_json())?,
                Format::Csv => metrology::write_csv(&[SummaryRow::from(&result)], &mut buffer)?,
            }
        }
        Some(ScanKind::M) => {
            let configs = m_scan_configs(args)?;
            writeln!(log, "M scan over {} configuration(s)", configs.len())?;
            let rows = metrology::scan_m(&configs)?;
            emit_rows(&rows, args.format.unwrap_or(Format::Csv), &mut buffer)?;
        }
        Some(ScanKind::P) => {
            if args.noise.is_none() {
                return Err(Error::Config("--scan p needs --noise".into()));
            }
            let code = load_code(&args.code)?;
            let h = signal_for(&code, args)?;
            let config = build_config(code, h, args)?;
            writeln!(log, "p scan over {:?}", args.p_values)?;
            let rows = metrology::scan_p(&config, &args.p_values)?;
            emit_rows(&rows, args.format.unwrap_or(Format::Csv), &mut buffer)?;
        }
        Some(ScanKind::N) => {
            let code = load_code(&args.code)?;
            let h = signal_for(&code, args)?;
            let config = build_config(code, h, args)?;
            writeln!(log, "N scan over {:?}", args.shot_counts)?;
            let rows = metrology::scan_n(&config, &args.shot_counts)?;
            emit_rows(&rows, args.format.unwrap_or(Format::Csv), &mut buffer)?;
        }
    }
    match &args.out {
        Some(path) => {
            fs::write(path, &buffer)?;
            writeln!(log, "wrote {}", path.display())?;
        }
        None => out.write_all(&buffer)?,
    }
    Ok(())
}
