//! Batch front-end: experiment subcommands over the laboratory, with
//! deterministic CSV/JSON emission.
//!
//! Every command writes one flat table. Re-running a command with a
//! different `--workers` value produces byte-identical output; wall-clock
//! timings are only recorded under `--timings` (which breaks that
//! guarantee by design).

mod table;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use table::{Cell, Format, Table};
use wglab::archimedean::{self, main_term_with};
use wglab::arith;
use wglab::count::{self, CountMode, GrowthSeries};
use wglab::expsum::{self, ArcConfig, ArcTag, FTables, ProblemInstance};
use wglab::local::{self, LocalTables};
use wglab::Error as LabError;

#[derive(Parser)]
#[command(name = "wglab", version, about = "Circle-method numerical laboratory", max_term_width = 100)]
struct Cli {
    /// Worker threads (0 = one per logical CPU); does not affect output
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Restricted,
    Unrestricted,
}

impl From<Mode> for CountMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Restricted => CountMode::Restricted,
            Mode::Unrestricted => CountMode::Unrestricted,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts, main-term predictions, and ratios over a range of n
    VerifyRange(VerifyRangeArgs),
    /// Exact representation count for a single n
    Count(CountArgs),
    /// Singular-series factors prime by prime
    Local(LocalArgs),
    /// Singular integral by independent routes
    SingularIntegral(SingularIntegralArgs),
    /// Arc classification histogram over random sample points
    Arcs(ArcsArgs),
    /// Mean-value equation counts over a series of scales, with slopes
    Meanvalues(MeanvaluesArgs),
    /// DFT orthogonality evaluation of the count against the exact count
    DftCheck(DftCheckArgs),
}

#[derive(Args)]
struct VerifyRangeArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n_lo: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n_hi: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    #[arg(long, value_enum, default_value_t = Mode::Unrestricted)]
    mode: Mode,
    /// Singular-series truncation
    #[arg(long, default_value_t = 10_000)]
    cutoff: u64,
    /// Record wall-clock times (breaks byte-reproducibility)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    #[arg(long, value_enum, default_value_t = Mode::Unrestricted)]
    mode: Mode,
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    #[arg(long, default_value_t = 10_000)]
    cutoff: u64,
}

#[derive(Args)]
struct SingularIntegralArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Also run the grid quadrature of the defining integral
    #[arg(long)]
    quadrature: bool,
    /// Grid points per unit of n for the quadrature
    #[arg(long, default_value_t = 16)]
    grid_mult: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Conv,
    Both,
}

#[derive(Args)]
struct ArcsArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    /// Major-arc exponent B >= 1
    #[arg(long, alias = "B", default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct MeanvaluesArgs {
    #[arg(long, value_enum)]
    kind: MeanKind,
    /// Comma-separated scale parameters (P_c for t*/n*, P_2 for j3, n for j2)
    #[arg(long, value_delimiter = ',', required = true)]
    scales: Vec<f64>,
    /// Override the truncation exponent theta for t*/n*
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanKind {
    T6,
    T7,
    N6,
    N7,
    J2,
    J3,
}

#[derive(Args)]
struct DftCheckArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=7))]
    c: u32,
    /// DFT grid size (default 8n)
    #[arg(long)]
    grid: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
        {
            eprintln!("error: failed to configure {} workers: {e}", cli.workers);
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::VerifyRange(args) => cmd_verify_range(args),
        Command::Count(args) => cmd_count(args),
        Command::Local(args) => cmd_local(args),
        Command::SingularIntegral(args) => cmd_singular_integral(args),
        Command::Arcs(args) => cmd_arcs(args),
        Command::Meanvalues(args) => cmd_meanvalues(args),
        Command::DftCheck(args) => cmd_dft_check(args),
    };
    let (table, code) = match result {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let io_result = match &cli.out {
        Some(path) => File::create(path)
            .map_err(anyhow::Error::from)
            .and_then(|mut f| table.write(&mut f, format).map_err(Into::into)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table
                .write(&mut lock, format)
                .map_err(anyhow::Error::from)
                .and_then(|()| lock.flush().map_err(Into::into))
        }
    };
    if let Err(e) = io_result {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<LabError>() {
        Some(LabError::Budget(_)) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn fmt_witness(w: &[u64; 7]) -> String {
    w.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn opt_float(v: Option<f64>) -> Cell {
    v.map(Cell::Float).unwrap_or(Cell::Empty)
}

fn cmd_verify_range(args: &VerifyRangeArgs) -> anyhow::Result<(Table, u8)> {
    if args.n_lo > args.n_hi {
        anyhow::bail!(LabError::Config(format!(
            "empty range: n_lo={} > n_hi={}",
            args.n_lo, args.n_hi
        )));
    }
    let tables = LocalTables::build(args.c, args.cutoff)?;
    let mut t = Table::new(vec![
        "n",
        "c",
        "predicted",
        "singular_series",
        "singular_integral",
        "nu_weighted",
        "nu_unweighted",
        "ratio",
        "witness",
        "status",
        "note",
        "wall_ms",
    ]);
    let mut zero_ns: Vec<u64> = Vec::new();
    let mut code = 0u8;
    for n in args.n_lo..=args.n_hi {
        if n % 2 == 0 {
            t.push(vec![
                Cell::UInt(n),
                Cell::UInt(args.c as u64),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Str("skipped".into()),
                Cell::Str("theorem concerns odd n".into()),
                Cell::UInt(0),
            ]);
            continue;
        }
        let start = Instant::now();
        let outcome = count::nu_exact(n, args.c, args.mode.into())
            .and_then(|nu| main_term_with(&tables, n).map(|mt| (nu, mt)));
        match outcome {
            Ok((nu, mt)) => {
                let mt = mt.with_observed(nu.weighted);
                let status = if nu.unweighted == 0 { "zero_count" } else { "ok" };
                if nu.unweighted == 0 {
                    zero_ns.push(n);
                }
                let note = if nu.empty_slots.is_empty() {
                    Cell::Empty
                } else {
                    Cell::Str(format!("empty ranges: {}", nu.empty_slots.join(" ")))
                };
                let wall = if args.timings {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                t.push(vec![
                    Cell::UInt(n),
                    Cell::UInt(args.c as u64),
                    Cell::Float(mt.predicted),
                    Cell::Float(mt.singular_series.value),
                    Cell::Float(mt.singular_integral),
                    Cell::Float(nu.weighted),
                    Cell::UInt(nu.unweighted),
                    opt_float(mt.ratio),
                    nu.witness
                        .map(|w| Cell::Str(fmt_witness(&w)))
                        .unwrap_or(Cell::Empty),
                    Cell::Str(status.into()),
                    note,
                    Cell::UInt(wall),
                ]);
            }
            Err(e @ LabError::Budget(_)) => {
                t.push(vec![
                    Cell::UInt(n),
                    Cell::UInt(args.c as u64),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Str("budget".into()),
                    Cell::Str(format!("truncated: {e}")),
                    Cell::UInt(0),
                ]);
                code = 3;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    eprintln!(
        "verify-range [{}, {}] c={}: {} zero-count odd n{}",
        args.n_lo,
        args.n_hi,
        args.c,
        zero_ns.len(),
        if zero_ns.is_empty() {
            String::new()
        } else {
            format!(
                ": {}",
                zero_ns
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        }
    );
    Ok((t, code))
}

fn cmd_count(args: &CountArgs) -> anyhow::Result<(Table, u8)> {
    let mut t = Table::new(vec![
        "n",
        "c",
        "mode",
        "nu_weighted",
        "nu_unweighted",
        "witness",
        "status",
        "note",
    ]);
    let mode_str = match args.mode {
        Mode::Restricted => "restricted",
        Mode::Unrestricted => "unrestricted",
    };
    let nu = count::nu_exact(args.n, args.c, args.mode.into())?;
    let status = if nu.unweighted == 0 { "zero_count" } else { "ok" };
    let note = if nu.empty_slots.is_empty() {
        Cell::Empty
    } else {
        Cell::Str(format!("empty ranges: {}", nu.empty_slots.join(" ")))
    };
    t.push(vec![
        Cell::UInt(args.n),
        Cell::UInt(args.c as u64),
        Cell::Str(mode_str.into()),
        Cell::Float(nu.weighted),
        Cell::UInt(nu.unweighted),
        nu.witness
            .map(|w| Cell::Str(fmt_witness(&w)))
            .unwrap_or(Cell::Empty),
        Cell::Str(status.into()),
        note,
    ]);
    Ok((t, 0))
}

fn cmd_local(args: &LocalArgs) -> anyhow::Result<(Table, u8)> {
    let tables = LocalTables::build(args.c, args.cutoff)?;
    let mut t = Table::new(vec![
        "row",
        "n",
        "c",
        "p",
        "m_count",
        "a_value",
        "factor",
        "cumulative",
        "tail_bound",
    ]);
    let mut cumulative = 1.0f64;
    for &p in tables.primes() {
        let factor = tables.factor(p, args.n).expect("tabulated prime");
        cumulative *= factor;
        let (m_cell, a_cell) = if p <= local::EXACT_CONV_MAX_P {
            let lf = local::local_factor(p, args.n, args.c)?;
            (Cell::UInt(lf.m_count as u64), Cell::Float(lf.a_value))
        } else {
            (Cell::Empty, Cell::Float((factor - 1.0) * (p as f64 - 1.0).powi(7)))
        };
        t.push(vec![
            Cell::Str("factor".into()),
            Cell::UInt(args.n),
            Cell::UInt(args.c as u64),
            Cell::UInt(p),
            m_cell,
            a_cell,
            Cell::Float(factor),
            Cell::Float(cumulative),
            Cell::Empty,
        ]);
    }
    let series = tables.series_for(args.n);
    t.push(vec![
        Cell::Str("summary".into()),
        Cell::UInt(args.n),
        Cell::UInt(args.c as u64),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Float(series.value),
        Cell::Float(series.tail_bound),
    ]);
    Ok((t, 0))
}

fn cmd_singular_integral(args: &SingularIntegralArgs) -> anyhow::Result<(Table, u8)> {
    let mut t = Table::new(vec![
        "n", "c", "direct", "conv", "quadrature", "rel_gap", "status", "note",
    ]);
    let want_direct = matches!(args.method, Method::Direct | Method::Both);
    let want_conv = matches!(args.method, Method::Conv | Method::Both);
    let direct = if want_direct {
        Some(archimedean::singular_integral_direct(args.n, args.c)?)
    } else {
        None
    };
    let conv = if want_conv {
        Some(archimedean::singular_integral_conv(args.n, args.c)?)
    } else {
        None
    };
    let quad = if args.quadrature {
        let inst = ProblemInstance::new(args.n, args.c)?;
        Some(archimedean::wc_quadrature(&inst, args.grid_mult)?)
    } else {
        None
    };
    let rel_gap = match (direct, conv) {
        (Some(d), Some(v)) => Some((d - v).abs() / d.abs().max(1e-300)),
        _ => None,
    };
    t.push(vec![
        Cell::UInt(args.n),
        Cell::UInt(args.c as u64),
        opt_float(direct),
        opt_float(conv),
        opt_float(quad),
        opt_float(rel_gap),
        Cell::Str("ok".into()),
        Cell::Empty,
    ]);
    Ok((t, 0))
}

fn cmd_arcs(args: &ArcsArgs) -> anyhow::Result<(Table, u8)> {
    let inst = ProblemInstance::new(args.n, args.c)?;
    let cfg = ArcConfig::new(&inst, args.b)?;
    let primes = arith::sieve_primes(inst.p_k(2).ceil() as u64 + 1);
    let ftables = FTables::build(&inst, &primes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    struct ClassStats {
        count: u64,
        ups_min: f64,
        ups_max: f64,
        ups_sum: f64,
    }
    let mut stats: Vec<ClassStats> = (0..3)
        .map(|_| ClassStats {
            count: 0,
            ups_min: f64::INFINITY,
            ups_max: 0.0,
            ups_sum: 0.0,
        })
        .collect();
    let mut exceptional = 0u64;
    for _ in 0..args.samples {
        let alpha: f64 = rng.gen();
        let cls = expsum::classify_arc(alpha, &inst, &cfg)?;
        let idx = match cls.tag {
            ArcTag::Major => 0,
            ArcTag::Kumchev => 1,
            ArcTag::Minor => 2,
        };
        stats[idx].count += 1;
        if let Some(u) = cls.upsilon {
            stats[idx].ups_min = stats[idx].ups_min.min(u);
            stats[idx].ups_max = stats[idx].ups_max.max(u);
            stats[idx].ups_sum += u;
        }
        if expsum::in_exceptional_set(alpha, &inst, &ftables, &cfg) {
            exceptional += 1;
        }
    }

    // analytic estimate of the total narrow-arc measure, ignoring overlap:
    // sum over q <= L^B of phi(q) arcs of length 2 L^B / n
    let lb = inst.log_n().powf(args.b);
    let mut measure = 0.0;
    for q in 1..=(lb.floor() as u64) {
        measure += arith::phi(q) as f64 * 2.0 * lb / args.n as f64;
    }

    let mut t = Table::new(vec![
        "n",
        "c",
        "b",
        "samples",
        "seed",
        "class",
        "count",
        "fraction",
        "upsilon_min",
        "upsilon_mean",
        "upsilon_max",
        "major_measure_analytic",
    ]);
    let names = ["major", "kumchev", "minor"];
    for (i, s) in stats.iter().enumerate() {
        let has_ups = s.count > 0 && i != 2;
        t.push(vec![
            Cell::UInt(args.n),
            Cell::UInt(args.c as u64),
            Cell::Float(args.b),
            Cell::UInt(args.samples),
            Cell::UInt(args.seed),
            Cell::Str(names[i].into()),
            Cell::UInt(s.count),
            Cell::Float(s.count as f64 / args.samples as f64),
            if has_ups { Cell::Float(s.ups_min) } else { Cell::Empty },
            if has_ups {
                Cell::Float(s.ups_sum / s.count as f64)
            } else {
                Cell::Empty
            },
            if has_ups { Cell::Float(s.ups_max) } else { Cell::Empty },
            Cell::Float(measure),
        ]);
    }
    t.push(vec![
        Cell::UInt(args.n),
        Cell::UInt(args.c as u64),
        Cell::Float(args.b),
        Cell::UInt(args.samples),
        Cell::UInt(args.seed),
        Cell::Str("exceptional_small_top_factor".into()),
        Cell::UInt(exceptional),
        Cell::Float(exceptional as f64 / args.samples as f64),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Float(measure),
    ]);
    Ok((t, 0))
}

fn cmd_meanvalues(args: &MeanvaluesArgs) -> anyhow::Result<(Table, u8)> {
    let mut t = Table::new(vec!["kind", "row", "scale", "count", "slope", "residual"]);
    let kind_name = match args.kind {
        MeanKind::T6 => "t6",
        MeanKind::T7 => "t7",
        MeanKind::N6 => "n6",
        MeanKind::N7 => "n7",
        MeanKind::J2 => "j2",
        MeanKind::J3 => "j3",
    };
    let theta_for = |c: u32| -> f64 {
        args.theta
            .unwrap_or(if c == 6 { 5.0 / 6.0 } else { 87.0 / 98.0 })
    };
    let mut series = GrowthSeries::default();
    for &scale in &args.scales {
        let (fit_scale, n_count) = match args.kind {
            MeanKind::T6 | MeanKind::T7 => {
                let c = if matches!(args.kind, MeanKind::T6) { 6 } else { 7 };
                (scale, count::count_tc(scale, theta_for(c), c)?)
            }
            MeanKind::N6 | MeanKind::N7 => {
                let c = if matches!(args.kind, MeanKind::N6) { 6 } else { 7 };
                let p2 = scale.powf(c as f64 / 2.0);
                (scale, count::count_nc(p2, scale, theta_for(c), c)?)
            }
            MeanKind::J2 => (scale, count::count_j2eq(scale as u64)?),
            MeanKind::J3 => {
                let n = scale * scale;
                (n, count::count_j3eq(scale, n.powf(1.0 / 3.0))?)
            }
        };
        series.push(fit_scale, n_count);
        t.push(vec![
            Cell::Str(kind_name.into()),
            Cell::Str("count".into()),
            Cell::Float(fit_scale),
            Cell::UInt(n_count),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    match count::fit_slope(&series) {
        Ok(fit) => t.push(vec![
            Cell::Str(kind_name.into()),
            Cell::Str("slope".into()),
            Cell::Empty,
            Cell::Empty,
            Cell::Float(fit.slope),
            Cell::Float(fit.residual),
        ]),
        Err(e) => t.push(vec![
            Cell::Str(kind_name.into()),
            Cell::Str(format!("slope_undefined: {e}")),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]),
    }
    Ok((t, 0))
}

fn cmd_dft_check(args: &DftCheckArgs) -> anyhow::Result<(Table, u8)> {
    let inst = ProblemInstance::new(args.n, args.c)?;
    let grid = args.grid.unwrap_or(8 * args.n);
    let primes = arith::sieve_primes(inst.p_k(2).ceil() as u64 + 1);
    let ftables = FTables::build(&inst, &primes)?;
    let dft_w = expsum::dft_nu(&inst, &ftables, grid)?;
    let dft_unit = expsum::dft_nu(&inst, &ftables.with_unit_weights(), grid)?;
    let exact = count::nu_exact(args.n, args.c, CountMode::Restricted)?;
    let rel_gap = (dft_w - exact.weighted).abs() / exact.weighted.abs().max(1.0);
    let mut t = Table::new(vec![
        "n",
        "c",
        "grid",
        "dft_weighted",
        "exact_weighted",
        "rel_gap",
        "dft_unit_weights",
        "exact_unweighted",
        "status",
    ]);
    t.push(vec![
        Cell::UInt(args.n),
        Cell::UInt(args.c as u64),
        Cell::UInt(grid),
        Cell::Float(dft_w),
        Cell::Float(exact.weighted),
        Cell::Float(rel_gap),
        Cell::Float(dft_unit),
        Cell::UInt(exact.unweighted),
        Cell::Str(if rel_gap < 1e-6 { "ok" } else { "mismatch" }.into()),
    ]);
    Ok((t, 0))
}
