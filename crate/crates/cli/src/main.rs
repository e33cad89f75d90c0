use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gls_tail::bounds::{verify_domination, BoundReport};
use gls_tail::gls::gls_norm;
use gls_tail::io::{format_number, read_psi, read_spec, read_tail, write_csv, Cell};
use gls_tail::model::{eval_tail, tail_of, GeneratingFunction, Support, TailFunction};
use gls_tail::moments::{natural_psi, NaturalSource, NATURAL_GRID_CAP};
use gls_tail::numerics::{geometric_grid, Extended};
use gls_tail::orlicz::condition_check;
use gls_tail::{Error, Result};

#[derive(Parser)]
#[command(name = "gls-tail", version, about = "Tails, GLS norms, Young-Fenchel tail bounds and Orlicz checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tail function T(t) on a log-spaced grid, as CSV.
    Tail(TailArgs),
    /// Tail upper bound against the exact tail, as CSV or JSON.
    Bound(BoundArgs),
    /// Natural generating function p -> ||f||_p on a geometric grid, as CSV.
    Psi(PsiArgs),
    /// Classify the integrability condition of a tail, as JSON.
    OrliczCheck(OrliczArgs),
    /// GLS norm of a function for a generating function, as JSON.
    GlsNorm(GlsArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Function spec (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Tail function (JSON, or a two-column t,T CSV).
    #[arg(long)]
    tail: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<NaturalSource> {
        match (&self.spec, &self.tail) {
            (Some(path), _) => Ok(NaturalSource::Spec(read_spec(path)?)),
            (None, Some(path)) => Ok(NaturalSource::Tail(read_tail(path)?)),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Args)]
struct TailArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Generating function (JSON, or a two-column p,psi CSV). Defaults to the
    /// natural function of the spec.
    #[arg(long)]
    psi: Option<PathBuf>,
    /// GLS norm of the function. Defaults to 1 for the natural function and to
    /// the computed norm otherwise.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Support of the natural function.
    #[arg(long, default_value_t = 0.5)]
    psi_a: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    psi_b: f64,
    #[arg(long, default_value_t = 64)]
    grid_size: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct PsiArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    a: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    b: f64,
    #[arg(long, default_value_t = 32)]
    grid_size: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OrliczArgs {
    /// Tail function (JSON, or a two-column t,T CSV).
    #[arg(long)]
    tail: PathBuf,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct GlsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tail(args) => cmd_tail(&args),
        Command::Bound(args) => cmd_bound(&args),
        Command::Psi(args) => cmd_psi(&args),
        Command::OrliczCheck(args) => cmd_orlicz_check(&args),
        Command::GlsNorm(args) => cmd_gls_norm(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gls-tail: {e}");
            match e {
                Error::Parse(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn log_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min.is_finite()) {
        return Err(Error::Domain(format!("t-min must be finite and > 0, got {t_min}")));
    }
    if !(t_max > t_min && t_max.is_finite()) {
        return Err(Error::Domain(format!("t-max must be finite and exceed t-min, got {t_max}")));
    }
    if points < 2 {
        return Err(Error::Domain(format!("need at least 2 points, got {points}")));
    }
    Ok(geometric_grid(t_min, t_max, points))
}

fn cmd_tail(args: &TailArgs) -> Result<()> {
    let tail = match args.source.load()? {
        NaturalSource::Spec(spec) => tail_of(&spec)?,
        NaturalSource::Tail(tail) => tail,
    };
    let grid = log_grid(args.t_min, args.t_max, args.points)?;
    let rows = grid
        .iter()
        .map(|&t| Ok(vec![Cell::Number(t), Cell::Number(eval_tail(&tail, t)?.value)]))
        .collect::<Result<Vec<_>>>()?;
    write_csv(sink(args.output.as_deref())?, &["t", "T"], &rows)
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum GammaSource {
    Given,
    NaturalDefault,
    GlsNorm,
}

#[derive(Serialize)]
struct BoundSummary {
    dominated: bool,
    ratio_range: Option<(f64, f64)>,
    excluded: usize,
    validity_region_start: f64,
    gamma: f64,
    gamma_source: GammaSource,
    natural_psi: bool,
}

#[derive(Serialize)]
struct BoundRow {
    t: f64,
    bound: f64,
    actual: f64,
    in_region: bool,
}

#[derive(Serialize)]
struct BoundOutput {
    summary: BoundSummary,
    rows: Vec<BoundRow>,
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let grid = log_grid(args.t_min, args.t_max, args.points)?;
    let (psi, natural) = match &args.psi {
        Some(path) => (read_psi(path)?, false),
        None => {
            let support = Support::new(args.psi_a, args.psi_b)?;
            (natural_psi(&NaturalSource::Spec(spec.clone()), support, args.grid_size, args.tol)?, true)
        }
    };
    let (gamma, gamma_source) = match args.gamma {
        Some(g) => (g, GammaSource::Given),
        None if natural => (1.0, GammaSource::NaturalDefault),
        None => match gls_norm(&spec, &psi, args.tol)?.value {
            Extended::Finite(g) => (g, GammaSource::GlsNorm),
            Extended::PosInfinity => {
                return Err(Error::Domain("the function is not in the GLS of this psi (norm is +inf)".into()))
            }
        },
    };
    let report: BoundReport = verify_domination(&spec, &psi, gamma, &grid)?;
    let summary = BoundSummary {
        dominated: report.dominated,
        ratio_range: report.ratio_range,
        excluded: report.excluded,
        validity_region_start: report.validity_region_start,
        gamma,
        gamma_source,
        natural_psi: natural,
    };
    if let Some(path) = &args.summary {
        write_json(&mut *sink(Some(path))?, &summary)?;
    }
    let mut out = sink(None)?;
    match args.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = (0..report.t_grid.len())
                .map(|i| {
                    vec![
                        Cell::Number(report.t_grid[i]),
                        Cell::Number(report.bound[i]),
                        Cell::Number(report.actual[i]),
                        Cell::Flag(report.in_region[i]),
                    ]
                })
                .collect();
            write_csv(out, &["t", "bound", "actual", "in_region"], &rows)?;
            if args.summary.is_none() {
                eprintln!("{}", serde_json::to_string(&summary)?);
            }
            Ok(())
        }
        Format::Json => {
            let rows = (0..report.t_grid.len())
                .map(|i| BoundRow {
                    t: report.t_grid[i],
                    bound: report.bound[i],
                    actual: report.actual[i],
                    in_region: report.in_region[i],
                })
                .collect();
            write_json(&mut *out, &BoundOutput { summary, rows })
        }
    }
}

fn cmd_psi(args: &PsiArgs) -> Result<()> {
    let source = args.source.load()?;
    let support = Support::new(args.a, args.b)?;
    if args.grid_size < 2 {
        return Err(Error::Domain(format!("grid size must be at least 2, got {}", args.grid_size)));
    }
    if args.a >= args.b.min(NATURAL_GRID_CAP) {
        return Err(Error::Domain(format!("a = {} must lie below min(b, {NATURAL_GRID_CAP})", args.a)));
    }
    let psi = natural_psi(&source, support, args.grid_size, args.tol)?;
    let rows: Vec<(f64, f64)> = match psi.table() {
        Some(table) => table.points().collect(),
        None => {
            // closed form: evaluate on the same grid a tabulated function would use
            let open: GeneratingFunction = psi.with_support(Support::positive_half_line());
            geometric_grid(args.a, args.b.min(NATURAL_GRID_CAP), args.grid_size)
                .into_iter()
                .map(|p| Ok((p, open.eval(p)?.to_f64())))
                .collect::<Result<_>>()?
        }
    };
    let cells: Vec<Vec<Cell>> = rows.iter().map(|&(p, v)| vec![Cell::Number(p), Cell::Number(v)]).collect();
    write_csv(sink(args.output.as_deref())?, &["p", "psi"], &cells)
}

fn cmd_orlicz_check(args: &OrliczArgs) -> Result<()> {
    let tail: TailFunction = read_tail(&args.tail)?;
    let verdict = condition_check(&tail, args.k, args.tol)?;
    write_json(&mut *sink(None)?, &verdict)
}

#[derive(Serialize)]
struct NormOutput {
    norm: Extended,
    argmax_p: Option<f64>,
    attained_interior: bool,
    /// `norm` with 17 significant digits.
    norm_text: String,
}

fn cmd_gls_norm(args: &GlsArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let psi = read_psi(&args.psi)?;
    let n = gls_norm(&spec, &psi, args.tol)?;
    let out = NormOutput {
        norm: n.value,
        argmax_p: n.argmax_p,
        attained_interior: n.attained_interior,
        norm_text: format_number(n.value.to_f64()),
    };
    write_json(&mut *sink(None)?, &out)
}
