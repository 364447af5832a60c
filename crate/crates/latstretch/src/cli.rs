//! Argument parsing and command execution.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use latstretch_core::asymptotics::{self, CountTarget, ErrorRow, BALANCED_TOL};
use latstretch_core::counting::{self, LatticeSubset};
use latstretch_core::fourier::{self, Mollifier, SpectralBody};
use latstretch_core::optimizer::{self, Objective, OptimizationResult, SweepMode};
use latstretch_core::{ConvexBody, DiagonalStretch};
use rayon::prelude::*;
use serde_json::Value;

use crate::body::BodySource;
use crate::config::{parse_list, Command, Format, Grid, ModeArg, ObjectiveArg, RunConfig, TargetArg, DEFAULT_BUDGET};
use crate::error::CliError;
use crate::output::{json_float, Cell, Document, Record};

#[derive(Debug, Parser)]
#[command(name = "latstretch", version, about = "Lattice points in stretched convex bodies")]
struct Cli {
    /// Run a saved configuration (JSON, or TOML by extension) instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the normalized configuration and exit without running it.
    #[arg(long, global = true)]
    emit_config: bool,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Count lattice points of r A^{-1} Omega by subset.
    Count {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        radius: RadiusArg,
        #[command(flatten)]
        stretch: StretchArg,
        #[command(flatten)]
        check: CheckArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Balancing map B and cross sections of the balanced body.
    Balance {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Two-term prediction against the exact count.
    Predict {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        radius: RadiusArg,
        #[command(flatten)]
        stretch: StretchArg,
        #[arg(long, value_enum, default_value = "positive")]
        target: TargetArg,
        #[command(flatten)]
        check: CheckArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Optimal unimodular stretch at each radius.
    Optimize {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        radius: RadiusArg,
        #[command(flatten)]
        search: SearchArgs,
        /// Planar search interval `a_lo,a_hi` for exact mode.
        #[arg(long, value_name = "LO,HI")]
        interval: Option<String>,
        #[command(flatten)]
        check: CheckArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Deviation of the optimal stretch from the identity over a radius grid.
    Sweep {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        radius: RadiusArg,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        check: CheckArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Box eigenvalue counts against the two-term Weyl law.
    Weyl {
        /// Side lengths of the box.
        #[arg(long, value_name = "S1,...,SD")]
        sides: String,
        #[arg(long, value_name = "L|START:STOP:STEP")]
        lambda: String,
        /// Neumann instead of Dirichlet conditions.
        #[arg(long)]
        neumann: bool,
        #[command(flatten)]
        check: CheckArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Bracket the exact count between mollified spectral sums.
    FourierCheck {
        #[command(flatten)]
        body: BodyArg,
        #[command(flatten)]
        radius: RadiusArg,
        #[command(flatten)]
        stretch: StretchArg,
        /// Mollifier width; default a^{2d/(d+1)} r^{-(d-1)/(d+1)}.
        #[arg(long)]
        delta: Option<f64>,
        /// Spectral truncation radius; chosen automatically when absent.
        #[arg(long = "K")]
        truncation: Option<f64>,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Debug, Args)]
struct BodyArg {
    /// Body file (JSON or .toml) or inline JSON.
    #[arg(long, value_name = "FILE|JSON")]
    body: String,
}

#[derive(Debug, Args)]
struct RadiusArg {
    #[arg(long = "r", value_name = "R|START:STOP:STEP")]
    r: String,
}

#[derive(Debug, Args)]
struct StretchArg {
    /// Diagonal of A, comma separated; the product must be 1.
    #[arg(long = "A", value_name = "A1,...,AD")]
    stretch: Option<String>,
}

#[derive(Debug, Args)]
struct CheckArg {
    /// Recount by brute force; a mismatch sets exit status 1.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "max-positive")]
    objective: ObjectiveArg,
    /// Exact planar breakpoint search or pattern search; default exact for d = 2.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Count evaluations allowed per heuristic search.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args)]
struct IoArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads; falls back to LATSTRETCH_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config cannot be combined with a subcommand".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::parse(&text, path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")))?
        }
        (None, Some(sub)) => config_from(sub)?,
        (None, None) => return Err(CliError::Usage("a subcommand or --config is required (see --help)".into())),
    };
    if cli.emit_config {
        let mut text = config.to_json();
        text.push('\n');
        return write_output(&config, &text);
    }
    execute(&config)
}

fn parse_stretch(arg: &StretchArg) -> Result<Option<Vec<f64>>, CliError> {
    arg.stretch.as_deref().map(parse_list).transpose()
}

fn parse_interval(text: &str) -> Result<(f64, f64), CliError> {
    match parse_list(text)?.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::Usage(format!("--interval takes two numbers `lo,hi`, got `{text}`"))),
    }
}

fn with_io(mut cfg: RunConfig, io: IoArgs, check: bool) -> RunConfig {
    if let Some(f) = io.format {
        cfg.format = f;
    }
    cfg.out = io.out;
    cfg.threads = io.threads;
    cfg.check = check;
    cfg
}

fn config_from(sub: Sub) -> Result<RunConfig, CliError> {
    let cfg = match sub {
        Sub::Count { body, radius, stretch, check, io } => {
            let mut cfg = RunConfig::new(Command::Count);
            cfg.body = Some(BodySource::from_arg(&body.body)?);
            cfg.r = Some(Grid::parse(&radius.r)?);
            cfg.stretch = parse_stretch(&stretch)?;
            with_io(cfg, io, check.check)
        }
        Sub::Balance { body, io } => {
            let mut cfg = RunConfig::new(Command::Balance);
            cfg.body = Some(BodySource::from_arg(&body.body)?);
            with_io(cfg, io, false)
        }
        Sub::Predict { body, radius, stretch, target, check, io } => {
            let mut cfg = RunConfig::new(Command::Predict);
            cfg.body = Some(BodySource::from_arg(&body.body)?);
            cfg.r = Some(Grid::parse(&radius.r)?);
            cfg.stretch = parse_stretch(&stretch)?;
            cfg.target = target;
            with_io(cfg, io, check.check)
        }
        Sub::Optimize { body, radius, search, interval, check, io } => {
            let mut cfg = search_config(Command::Optimize, &body, &radius, search)?;
            cfg.interval = interval.as_deref().map(parse_interval).transpose()?;
            with_io(cfg, io, check.check)
        }
        Sub::Sweep { body, radius, search, check, io } => {
            let cfg = search_config(Command::Sweep, &body, &radius, search)?;
            with_io(cfg, io, check.check)
        }
        Sub::Weyl { sides, lambda, neumann, check, io } => {
            let mut cfg = RunConfig::new(Command::Weyl);
            cfg.sides = Some(parse_list(&sides)?);
            cfg.lambda = Some(Grid::parse(&lambda)?);
            cfg.neumann = neumann;
            with_io(cfg, io, check.check)
        }
        Sub::FourierCheck { body, radius, stretch, delta, truncation, io } => {
            let mut cfg = RunConfig::new(Command::FourierCheck);
            cfg.body = Some(BodySource::from_arg(&body.body)?);
            cfg.r = Some(Grid::parse(&radius.r)?);
            cfg.stretch = parse_stretch(&stretch)?;
            cfg.delta = delta;
            cfg.truncation = truncation;
            with_io(cfg, io, false)
        }
    };
    Ok(cfg)
}

fn search_config(command: Command, body: &BodyArg, radius: &RadiusArg, search: SearchArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    cfg.body = Some(BodySource::from_arg(&body.body)?);
    cfg.r = Some(Grid::parse(&radius.r)?);
    cfg.objective = search.objective;
    cfg.mode = search.mode;
    cfg.seed = search.seed;
    cfg.budget = search.budget;
    Ok(cfg)
}

/// Output of a command plus failures that only affect the exit status.
struct Outcome {
    doc: Document,
    checks: Vec<Check>,
    failures: Vec<String>,
}

/// A count to be recomputed by brute force after the output is written.
struct Check {
    body: ConvexBody,
    stretch: DiagonalStretch,
    r: f64,
    subset: LatticeSubset,
    expected: u64,
}

impl Outcome {
    fn new(doc: Document) -> Self {
        Outcome { doc, checks: Vec::new(), failures: Vec::new() }
    }
}

fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let pool = match cfg.resolved_threads()? {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| {
        let outcome = match cfg.command {
            Command::Count => count(cfg),
            Command::Balance => balance(cfg),
            Command::Predict => predict(cfg),
            Command::Optimize => optimize(cfg),
            Command::Sweep => sweep(cfg),
            Command::Weyl => weyl(cfg),
            Command::FourierCheck => fourier_check(cfg),
        }?;
        write_output(cfg, &outcome.doc.render(cfg.format))?;
        let mut failures = outcome.failures;
        if cfg.check {
            failures.extend(run_checks(&outcome.checks)?);
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::CheckFailed(failures.join("; ")))
        }
    })
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn run_checks(checks: &[Check]) -> Result<Vec<String>, CliError> {
    let results: Vec<_> = checks
        .par_iter()
        .map(|c| counting::brute_force_count(&c.body, &c.stretch, c.r, c.subset).map(|n| (c, n)))
        .collect::<Result<_, _>>()?;
    Ok(results
        .into_iter()
        .filter(|(c, n)| *n != c.expected)
        .map(|(c, n)| format!("{:?} count at r = {} is {} but brute force gives {n}", c.subset, c.r, c.expected))
        .collect())
}

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("{flag} is required for this command")))
}

fn load_body(cfg: &RunConfig) -> Result<ConvexBody, CliError> {
    require(&cfg.body, "--body")?.build()
}

/// The body itself when balanced, else its balanced representative with a
/// note on stderr.
fn balanced_body(cfg: &RunConfig) -> Result<ConvexBody, CliError> {
    let body = load_body(cfg)?;
    if body.is_balanced(BALANCED_TOL) {
        return Ok(body);
    }
    let (b, balanced) = body.balanced_representative()?;
    eprintln!("note: body is not balanced; using B Omega with B = diag{:?}", b.entries());
    Ok(balanced)
}

fn radii(cfg: &RunConfig) -> Result<(Vec<f64>, bool), CliError> {
    let grid = require(&cfg.r, "--r")?;
    Ok((grid.values(), grid.is_single()))
}

fn stretch_for(cfg: &RunConfig, d: usize) -> Result<DiagonalStretch, CliError> {
    match &cfg.stretch {
        None => Ok(DiagonalStretch::identity(d)),
        Some(entries) => {
            if entries.len() != d {
                return Err(CliError::Usage(format!("--A has {} entries but the body has dimension {d}", entries.len())));
            }
            DiagonalStretch::unimodular(entries.clone()).map_err(|e| CliError::Usage(format!("--A: {e}")))
        }
    }
}

/// Rows in grid order, computed in parallel.
fn per_radius<T: Send>(
    rs: &[f64],
    f: impl Fn(f64) -> latstretch_core::Result<T> + Sync,
) -> Result<Vec<T>, CliError> {
    Ok(rs.par_iter().map(|&r| f(r)).collect::<latstretch_core::Result<Vec<_>>>()?)
}

fn count(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let body = load_body(cfg)?;
    let stretch = stretch_for(cfg, body.dimension())?;
    let (rs, single) = radii(cfg)?;
    let reports = per_radius(&rs, |r| counting::lattice_counts(&body, &stretch, r))?;
    let rows = rs
        .iter()
        .zip(&reports)
        .map(|(&r, c)| {
            vec![
                ("r", Cell::Float(r)),
                ("positive", Cell::Int(c.positive)),
                ("nonnegative", Cell::Int(c.nonnegative)),
                ("all", Cell::Int(c.all)),
                ("nonzero", Cell::Int(c.nonzero)),
                ("hyperplane_union", Cell::Int(c.hyperplane_union)),
                ("per_hyperplane", Cell::Ints(c.per_hyperplane.clone())),
            ]
        })
        .collect();
    let mut outcome = Outcome::new(Document::new(rows, single));
    for (&r, c) in rs.iter().zip(&reports) {
        for (subset, expected) in [
            (LatticeSubset::Positive, c.positive),
            (LatticeSubset::Nonnegative, c.nonnegative),
            (LatticeSubset::All, c.all),
            (LatticeSubset::Nonzero, c.nonzero),
            (LatticeSubset::Hyperplane, c.hyperplane_union),
        ] {
            outcome.checks.push(Check { body: body.clone(), stretch: stretch.clone(), r, subset, expected });
        }
    }
    Ok(outcome)
}

fn balance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let body = load_body(cfg)?;
    let (b, balanced) = body.balanced_representative()?;
    let mut row: Record = vec![
        ("b", Cell::Floats(b.entries().to_vec())),
        ("det_b", Cell::Float(b.det())),
        ("cross_sections", Cell::Floats(body.cross_section_measures().to_vec())),
        ("balanced_cross_sections", Cell::Floats(balanced.cross_section_measures().to_vec())),
    ];
    if let Some((p, axes)) = balanced.p_ellipsoid_params() {
        row.push(("balanced_p", Cell::Float(p)));
        row.push(("balanced_semi_axes", Cell::Floats(axes.to_vec())));
    }
    Ok(Outcome::new(Document::new(vec![row], true)))
}

fn predict(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let target = CountTarget::from(cfg.target);
    let body = if target == CountTarget::All { load_body(cfg)? } else { balanced_body(cfg)? };
    let stretch = stretch_for(cfg, body.dimension())?;
    let (rs, single) = radii(cfg)?;
    let results = per_radius(&rs, |r| {
        let prediction = asymptotics::predict(&body, &stretch, r, target)?;
        let exact = counting::count(&body, &stretch, r, target.subset())?;
        Ok((prediction, ErrorRow::from_prediction(&prediction, exact)))
    })?;
    let rows: Vec<Record> = results
        .iter()
        .map(|(p, e)| {
            vec![
                ("r", Cell::Float(e.r)),
                ("exact", Cell::Int(e.exact)),
                ("leading", Cell::Float(p.leading)),
                ("second", Cell::Float(p.second)),
                ("predicted", Cell::Float(e.predicted)),
                ("error", Cell::Float(e.error)),
                ("error_shape", Cell::Float(p.error_shape)),
                ("normalized_error", Cell::Float(e.normalized_error)),
            ]
        })
        .collect();
    let mut doc = Document::new(rows, single);
    if !single {
        let errors: Vec<ErrorRow> = results.iter().map(|(_, e)| *e).collect();
        let exponent = asymptotics::fit_error_exponent(&errors).ok();
        doc = doc.with_summary("error_exponent", exponent.map_or(Cell::Null, Cell::Float));
    }
    let mut outcome = Outcome::new(doc);
    for (_, e) in &results {
        outcome.checks.push(Check {
            body: body.clone(),
            stretch: stretch.clone(),
            r: e.r,
            subset: target.subset(),
            expected: e.exact,
        });
    }
    Ok(outcome)
}

fn search_mode(cfg: &RunConfig, d: usize) -> ModeArg {
    cfg.mode.unwrap_or(if d == 2 { ModeArg::Exact } else { ModeArg::Heuristic })
}

fn objective_subset(objective: Objective) -> LatticeSubset {
    match objective {
        Objective::MaximizePositive => LatticeSubset::Positive,
        Objective::MinimizeNonnegative => LatticeSubset::Nonnegative,
    }
}

fn plateaus_json(plateaus: &[optimizer::Plateau]) -> Value {
    Value::Array(
        plateaus
            .iter()
            .map(|p| {
                serde_json::json!({
                    "t_start": json_float(p.t_start),
                    "t_end": json_float(p.t_end),
                    "count": p.count,
                })
            })
            .collect(),
    )
}

fn optimize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let body = balanced_body(cfg)?;
    let d = body.dimension();
    let objective = Objective::from(cfg.objective);
    let mode = search_mode(cfg, d);
    if cfg.interval.is_some() && mode != ModeArg::Exact {
        return Err(CliError::Usage("--interval applies to exact mode only".into()));
    }
    if mode == ModeArg::Exact && d != 2 {
        return Err(CliError::Usage(format!("exact mode needs d = 2, got d = {d}; use --mode heuristic")));
    }
    let (rs, single) = radii(cfg)?;
    let results = per_radius(&rs, |r| -> latstretch_core::Result<(OptimizationResult, Option<Value>)> {
        Ok(match mode {
            ModeArg::Exact => {
                let result = optimizer::optimize_d2_exact(&body, r, objective, cfg.interval)?;
                let plateaus = optimizer::plateau_profile(&body, r, objective, cfg.interval)?;
                (result, Some(plateaus_json(&plateaus)))
            }
            ModeArg::Heuristic => (optimizer::optimize_general(&body, r, objective, cfg.seed, cfg.budget)?, None),
        })
    })?;
    let rows = rs
        .iter()
        .zip(&results)
        .map(|(&r, (res, plateaus))| {
            let mut row: Record = vec![
                ("r", Cell::Float(r)),
                ("stretch", Cell::Floats(res.stretch.entries().to_vec())),
                ("a_opt", Cell::Float(res.a_opt())),
                ("deviation", Cell::Float(res.deviation)),
                ("bound", Cell::Float(optimizer::deviation_bound(d, r))),
                ("count", Cell::Int(res.count)),
                ("heuristic", Cell::Bool(res.heuristic)),
                ("budget_exhausted", Cell::Bool(res.budget_exhausted)),
                ("non_unimodal", Cell::Bool(res.non_unimodal)),
                ("evaluations", Cell::Int(res.evaluations as u64)),
                ("tie_set_size", res.tie_set_size.map_or(Cell::Null, |n| Cell::Int(n as u64))),
                ("plateau", res.plateau.map_or(Cell::Null, |(s, e)| Cell::Floats(vec![s, e]))),
            ];
            if let Some(p) = plateaus {
                row.push(("plateaus", Cell::Json(p.clone())));
            }
            row
        })
        .collect();
    let mut outcome = Outcome::new(Document::new(rows, single));
    for (&r, (res, _)) in rs.iter().zip(&results) {
        outcome.checks.push(Check {
            body: body.clone(),
            stretch: res.stretch.clone(),
            r,
            subset: objective_subset(objective),
            expected: res.count,
        });
    }
    Ok(outcome)
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let body = balanced_body(cfg)?;
    let d = body.dimension();
    let objective = Objective::from(cfg.objective);
    let mode = match search_mode(cfg, d) {
        ModeArg::Exact => SweepMode::ExactD2,
        ModeArg::Heuristic => SweepMode::Heuristic { seed: cfg.seed, budget: cfg.budget },
    };
    let (rs, _) = radii(cfg)?;
    optimizer::check_sweep(&body, &rs, mode).map_err(|e| CliError::Usage(e.to_string()))?;
    let results = per_radius(&rs, |r| match mode {
        SweepMode::ExactD2 => optimizer::optimize_d2_exact(&body, r, objective, None),
        SweepMode::Heuristic { seed, budget } => optimizer::optimize_general(&body, r, objective, seed, budget),
    })?;
    let rows: Vec<_> = rs
        .iter()
        .zip(&results)
        .map(|(&r, res)| optimizer::SweepRow {
            r,
            a_opt: res.a_opt(),
            deviation: res.deviation,
            bound: optimizer::deviation_bound(d, r),
            count: res.count,
        })
        .collect();
    let sweep = optimizer::finish_sweep(rows);
    let records = sweep
        .rows
        .iter()
        .map(|row| {
            vec![
                ("r", Cell::Float(row.r)),
                ("a_opt", Cell::Float(row.a_opt)),
                ("deviation", Cell::Float(row.deviation)),
                ("bound", Cell::Float(row.bound)),
                ("count", Cell::Int(row.count)),
            ]
        })
        .collect();
    let doc = Document::new(records, false).with_summary("exponent", sweep.exponent.map_or(Cell::Null, Cell::Float));
    let mut outcome = Outcome::new(doc);
    for (&r, res) in rs.iter().zip(&results) {
        outcome.checks.push(Check {
            body: body.clone(),
            stretch: res.stretch.clone(),
            r,
            subset: objective_subset(objective),
            expected: res.count,
        });
    }
    Ok(outcome)
}

fn weyl(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sides = require(&cfg.sides, "--sides")?;
    let grid = require(&cfg.lambda, "--lambda")?;
    let lambdas = grid.values();
    let counts = per_radius(&lambdas, |lambda| {
        if cfg.neumann {
            asymptotics::weyl_cuboid_count_neumann(sides, lambda)
        } else {
            asymptotics::weyl_cuboid_count(sides, lambda)
        }
    })?;
    let rows = lambdas
        .iter()
        .zip(&counts)
        .map(|(&lambda, w)| {
            vec![
                ("lambda", Cell::Float(lambda)),
                ("exact", Cell::Int(w.exact)),
                ("two_term", Cell::Float(w.two_term)),
                ("relative_error", Cell::Float(w.relative_error())),
            ]
        })
        .collect();
    let mut outcome = Outcome::new(Document::new(rows, grid.is_single()));
    let body = ConvexBody::p_ellipsoid(2.0, sides.clone())?;
    let subset = if cfg.neumann { LatticeSubset::Nonnegative } else { LatticeSubset::Positive };
    for (&lambda, w) in lambdas.iter().zip(&counts) {
        outcome.checks.push(Check {
            body: body.clone(),
            stretch: DiagonalStretch::identity(sides.len()),
            r: lambda.sqrt() / std::f64::consts::PI,
            subset,
            expected: w.exact,
        });
    }
    Ok(outcome)
}

/// `a^{2d/(d+1)} r^{-(d-1)/(d+1)}` with `a = ||A^{-1}||_inf`.
pub fn default_delta(stretch: &DiagonalStretch, r: f64) -> f64 {
    let d = stretch.dimension() as f64;
    stretch.sup_inverse().powf(2.0 * d / (d + 1.0)) * r.powf(-(d - 1.0) / (d + 1.0))
}

fn fourier_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let body = load_body(cfg)?;
    let d = body.dimension();
    let stretch = stretch_for(cfg, d)?;
    let sb = SpectralBody::new(body)?;
    let (rs, single) = radii(cfg)?;
    let first_delta = cfg.delta.unwrap_or_else(|| default_delta(&stretch, rs[0]));
    let base = Mollifier::bump(d, first_delta)?;
    let reports = per_radius(&rs, |r| {
        let m = base.with_delta(cfg.delta.unwrap_or_else(|| default_delta(&stretch, r)))?;
        fourier::sandwich_check(&sb, &stretch, r, &m, cfg.truncation)
    })?;
    let rows = reports
        .iter()
        .map(|s| {
            vec![
                ("r", Cell::Float(s.r)),
                ("delta", Cell::Float(s.delta)),
                ("lower", Cell::Float(s.lower)),
                ("exact", Cell::Int(s.exact)),
                ("upper", Cell::Float(s.upper)),
                ("pass", Cell::Bool(s.pass)),
                ("truncation_bound", Cell::Float(s.truncation_bound)),
            ]
        })
        .collect();
    let mut outcome = Outcome::new(Document::new(rows, single));
    outcome.failures = reports
        .iter()
        .filter(|s| !s.pass)
        .map(|s| format!("sandwich fails at r = {}: {} not in [{}, {}]", s.r, s.exact, s.lower, s.upper))
        .collect();
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn default_delta_matches_formula() {
        let id = DiagonalStretch::identity(2);
        assert!((default_delta(&id, 8.0) - 0.5).abs() < 1e-15);
        let a = DiagonalStretch::unimodular(vec![0.5, 2.0]).unwrap();
        assert!((default_delta(&a, 1.0) - 2f64.powf(4.0 / 3.0)).abs() < 1e-12);
    }
}
