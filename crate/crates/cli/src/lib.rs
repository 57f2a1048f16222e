//! Command-line experiments over the `typsub` library.
//!
//! Every subcommand renders its whole result in memory before anything is
//! written, so a failing run never leaves a partial output file behind.

mod format;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use typsub::basis_search::find_target_basis;
use typsub::classical_types::{
    entropy_typical_cardinality, log2_cardinality_bound, set_probability, type_class_count, Distribution,
    TypicalSetSpec,
};
use typsub::quantum_state::{spectral_decomposition, DensityMatrix};
use typsub::schumacher_channel::{build_channel, channel_fidelity, compression_rate};
use typsub::typical_projector::{estimate_upsilon_dimension, preserved_weight};

pub use format::{format_number, Cell, Table};

/// Errors surfaced by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Core(#[from] typsub::Error),
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for resource or convergence failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 1,
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "typsub", version, about = "Entropy-typical subspace experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for randomized estimates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    /// Local dimension.
    #[arg(long)]
    pub d: usize,
    /// Comma-separated block lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Target entropy in bits.
    #[arg(long, allow_negative_numbers = true)]
    pub h: f64,
    /// Typicality width in bits.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cardinality, bound and source mass of the entropy-typical set.
    TypicalStats {
        #[command(flatten)]
        block: BlockArgs,
        /// Source state; its spectrum is the symbol distribution.
        #[arg(long, default_value = "maximally-mixed")]
        rho: String,
        #[command(flatten)]
        common: Common,
    },
    /// Basis whose measurement entropy equals the target.
    FindBasis {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        rho: String,
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Weight of the block state kept by the rotated typical projector.
    OverlapCurve {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fidelity of the projective compression channel.
    FidelityCurve {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Compression rate against its asymptotic limit.
    RateTable {
        #[command(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of the universal subspace dimension.
    UpsilonDim {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Cli {
    fn common(&self) -> &Common {
        match &self.command {
            Command::TypicalStats { common, .. }
            | Command::FindBasis { common, .. }
            | Command::OverlapCurve { common, .. }
            | Command::FidelityCurve { common, .. }
            | Command::RateTable { common, .. }
            | Command::UpsilonDim { common, .. } => common,
        }
    }

    pub fn output(&self) -> Option<&Path> {
        self.common().output.as_deref()
    }

    pub fn format(&self) -> OutputFormat {
        self.common().format
    }
}

/// Parses a preset name (`pure`, `maximally-mixed`, `diag:p1,p2,...`) or
/// reads a JSON density matrix `{"d", "re", "im"}` from a file path.
pub fn load_density_matrix(source: &str, d: usize) -> CliResult<DensityMatrix> {
    let rho = match source {
        "pure" => DensityMatrix::pure(d, 0)?,
        "maximally-mixed" => DensityMatrix::maximally_mixed(d)?,
        _ => match source.strip_prefix("diag:") {
            Some(list) => {
                let probs = list
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Invalid(format!("diag preset entries must be numbers: {e}")))?;
                DensityMatrix::from_diagonal(&probs)?
            }
            None => {
                let text = std::fs::read_to_string(source)
                    .map_err(|e| CliError::Invalid(format!("cannot read density matrix file {source}: {e}")))?;
                DensityMatrix::from_json_str(&text)?
            }
        },
    };
    if rho.d() != d {
        return Err(CliError::Invalid(format!("density matrix has dimension {} but --d is {d}", rho.d())));
    }
    Ok(rho)
}

fn check_tol(tol: f64) -> CliResult<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("--tol must be positive and finite, got {tol}")))
    }
}

impl BlockArgs {
    fn specs(&self) -> CliResult<Vec<TypicalSetSpec>> {
        if self.n.is_empty() {
            return Err(CliError::Invalid("--n must list at least one block length".into()));
        }
        Ok(self
            .n
            .iter()
            .map(|&n| TypicalSetSpec::new(n, self.d, self.h, self.eps))
            .collect::<typsub::Result<Vec<_>>>()?)
    }
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// Runs the selected experiment and renders it in the requested format.
pub fn run(cli: &Cli) -> CliResult<String> {
    let format = cli.format();
    let (name, table, document) = match &cli.command {
        Command::TypicalStats { block, rho, .. } => ("typical-stats", typical_stats(block, rho)?, None),
        Command::FindBasis { d, rho, h, tol, .. } => {
            let (table, doc) = find_basis(*d, rho, *h, *tol)?;
            ("find-basis", table, Some(doc))
        }
        Command::OverlapCurve { block, rho, tol, .. } => ("overlap-curve", overlap_curve(block, rho, *tol)?, None),
        Command::FidelityCurve { block, rho, tol, .. } => ("fidelity-curve", fidelity_curve(block, rho, *tol)?, None),
        Command::RateTable { block, .. } => ("rate-table", rate_table(block)?, None),
        Command::UpsilonDim { block, samples, common } => {
            ("upsilon-dim", upsilon_dim(block, *samples, common.seed)?, None)
        }
    };
    Ok(match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => {
            let doc = document.unwrap_or_else(|| table.to_json(name));
            let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
            text.push('\n');
            text
        }
    })
}

fn typical_stats(block: &BlockArgs, rho: &str) -> CliResult<Table> {
    let specs = block.specs()?;
    let rho = load_density_matrix(rho, block.d)?;
    let p = Distribution::new(spectral_decomposition(&rho)?.eigenvalues)?;
    let mut table = Table::new(&["n", "type_classes", "cardinality", "log2_cardinality", "log2_bound", "probability"]);
    for spec in &specs {
        let count = entropy_typical_cardinality(spec)?;
        table.push(vec![
            Cell::Int(spec.n() as u64),
            Cell::Big(type_class_count(spec.n(), spec.d()).to_string()),
            Cell::Big(count.to_string()),
            Cell::Num(log2_big(&count)),
            Cell::Num(log2_cardinality_bound(spec)),
            Cell::Num(set_probability(&p, spec)?),
        ]);
    }
    Ok(table)
}

fn find_basis(d: usize, rho: &str, h: f64, tol: f64) -> CliResult<(Table, Value)> {
    check_tol(tol)?;
    let rho = load_density_matrix(rho, d)?;
    let result = find_target_basis(&rho, h, tol)?;
    let mut table = Table::new(&["t", "achieved_entropy", "target_entropy", "iterations", "row", "col", "re", "im"]);
    let m = result.basis.matrix();
    for r in 0..d {
        for c in 0..d {
            table.push(vec![
                Cell::Num(result.parameter),
                Cell::Num(result.achieved_entropy),
                Cell::Num(h),
                Cell::Int(result.iterations as u64),
                Cell::Int(r as u64),
                Cell::Int(c as u64),
                Cell::Num(m[(r, c)].re),
                Cell::Num(m[(r, c)].im),
            ]);
        }
    }
    let rows = |part: fn(f64, f64) -> f64| -> Vec<Vec<Value>> {
        (0..d).map(|r| (0..d).map(|c| format::json_number(part(m[(r, c)].re, m[(r, c)].im))).collect()).collect()
    };
    let doc = json!({
        "command": "find-basis",
        "t": format::json_number(result.parameter),
        "achieved_entropy": format::json_number(result.achieved_entropy),
        "target_entropy": format::json_number(h),
        "iterations": result.iterations,
        "basis": { "d": d, "re": rows(|re, _| re), "im": rows(|_, im| im) },
    });
    Ok((table, doc))
}

fn overlap_curve(block: &BlockArgs, rho: &str, tol: f64) -> CliResult<Table> {
    check_tol(tol)?;
    let specs = block.specs()?;
    let rho = load_density_matrix(rho, block.d)?;
    let mut table = Table::new(&["n", "overlap", "delta", "fidelity_lower_bound"]);
    for spec in &specs {
        let report = preserved_weight(&rho, block.h, block.eps, spec.n(), tol)?;
        table.push(vec![
            Cell::Int(spec.n() as u64),
            Cell::Num(report.overlap),
            Cell::Num(report.delta),
            Cell::Num(report.fidelity_lower_bound),
        ]);
    }
    Ok(table)
}

fn fidelity_curve(block: &BlockArgs, rho: &str, tol: f64) -> CliResult<Table> {
    check_tol(tol)?;
    let specs = block.specs()?;
    let rho = load_density_matrix(rho, block.d)?;
    let basis = find_target_basis(&rho, block.h, tol)?.basis;
    let mut table = Table::new(&["n", "fidelity", "projected_term", "residual_term", "lower_bound", "overlap"]);
    for spec in &specs {
        let channel = build_channel(&basis, spec)?;
        let f = channel_fidelity(&channel, &rho, spec.n())?;
        table.push(vec![
            Cell::Int(spec.n() as u64),
            Cell::Num(f.fidelity),
            Cell::Num(f.projected_term),
            Cell::Num(f.residual_term),
            Cell::Num(f.lower_bound),
            Cell::Num(f.overlap),
        ]);
    }
    Ok(table)
}

fn rate_table(block: &BlockArgs) -> CliResult<Table> {
    let specs = block.specs()?;
    let mut table = Table::new(&["n", "rate", "limit", "gap"]);
    for spec in &specs {
        let r = compression_rate(spec.n(), spec.d(), spec.h(), spec.epsilon())?;
        table.push(vec![
            Cell::Int(spec.n() as u64),
            Cell::Num(r.rate),
            Cell::Num(r.limit),
            Cell::Num(r.rate - r.limit),
        ]);
    }
    Ok(table)
}

fn upsilon_dim(block: &BlockArgs, samples: usize, seed: u64) -> CliResult<Table> {
    let specs = block.specs()?;
    let mut table = Table::new(&["n", "samples", "seed", "estimated_dimension", "xi_dimension", "bound"]);
    for spec in &specs {
        let est = estimate_upsilon_dimension(spec, samples, seed)?;
        table.push(vec![
            Cell::Int(spec.n() as u64),
            Cell::Int(est.samples_used as u64),
            Cell::Int(seed),
            Cell::Int(est.estimated_dimension as u64),
            Cell::Int(est.xi_dimension as u64),
            Cell::Num(est.bound),
        ]);
    }
    Ok(table)
}
