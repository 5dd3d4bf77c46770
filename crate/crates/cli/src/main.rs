//! Batch front end for condition checks, local-mass analysis and the solver.
//!
//! Exit codes: 0 success, 1 condition false, 2 input error, 3 analysis
//! incomplete, 4 solver failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use toda_forge_core::cartan::{build_cartan, inverse_closed_form, verify_inverse, InverseReport};
use toda_forge_core::conditions::{
    check_a2_classical_condition, check_assumption_d, check_existence_condition, check_lt_condition,
    check_troyanov, summarize, AssumptionDConsequences, AssumptionDReport, ExistenceReport, LtReport,
    TroyanovReport,
};
use toda_forge_core::pohozaev::{build_pohozaev_form, solve_masses, MassConstraints, MassRoots, RootSetKind};
use toda_forge_core::problem::ProblemFile;
use toda_forge_core::rational::{format_pq, parse_rational, to_f64};
use toda_forge_core::solver::{
    fit_radial_benchmark, iterate, mesh_for, verify_solution, ContractReport, ContractTolerances, FixedPointMap,
    RadialFit, SolveStatus, SolverConfig, SolverProblem,
};
use toda_forge_core::{LieAlgebraType, TodaError};

const EXIT_OK: u8 = 0;
const EXIT_CONDITION_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "toda-forge", version, about = "Singular Toda systems: conditions, local masses and solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Stopping tolerance on the sup-norm step
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Damping of the fixed-point iteration
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Background mesh spacing
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Truncation radius
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Directory for output files
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the exponent conditions of a problem file
    Check { path: PathBuf },
    /// Roots of the local-mass identity and their dichotomy witnesses
    Pohozaev {
        algebra: String,
        /// Weights mu_i, comma separated (rationals or decimals)
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<String>,
        /// Upper bound of the search box, one value or one per component
        #[arg(long = "box", value_delimiter = ',', default_value = "3")]
        upper: Vec<f64>,
        /// Hold a component fixed, `k=value` with 1-based k
        #[arg(long)]
        pin: Vec<String>,
        /// Subdivision step along the solved coordinate
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// Sample points per axis when the root set is a curve
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the fixed-point solver on a problem file
    Solve { path: PathBuf },
    /// Print a Cartan matrix, its inverse and the verification
    Cartan { algebra: String },
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<TodaError> for Failure {
    fn from(e: TodaError) -> Self {
        let code = match e {
            TodaError::Numerical(_) => EXIT_SOLVER,
            TodaError::AssumptionViolated(_) => EXIT_CONDITION_FALSE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: format!("{e:#}"),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(threads) = std::env::var("TODA_FORGE_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: TODA_FORGE_THREADS must be a positive integer, got `{threads}`");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }
    let result = match &cli.command {
        Command::Check { path } => cmd_check(&cli, path),
        Command::Pohozaev {
            algebra,
            mu,
            upper,
            pin,
            step,
            samples,
        } => cmd_pohozaev(&cli, algebra, mu, upper, pin, *step, *samples),
        Command::Solve { path } => cmd_solve(&cli, path),
        Command::Cartan { algebra } => cmd_cartan(&cli, algebra),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ProblemFile::from_json(&text)?)
}

fn parse_algebra(token: &str) -> Result<LieAlgebraType, Failure> {
    Ok(token.parse::<LieAlgebraType>()?)
}

fn write_output(cli: &Cli, name: &str, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = &cli.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct AssumptionDBundle {
    n: usize,
    epsilon: Option<String>,
    b: Vec<String>,
    checks: AssumptionDReport,
    consequences: AssumptionDConsequences,
}

#[derive(Serialize)]
struct CheckBundle {
    algebra: LieAlgebraType,
    beta_total: Vec<String>,
    beta_bar: Vec<String>,
    existence: ExistenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    troyanov: Option<TroyanovReport>,
    lt_condition: LtReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    a2_classical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assumption_d: Option<AssumptionDBundle>,
}

fn cmd_check(cli: &Cli, path: &Path) -> CmdResult {
    let problem = read_problem(path)?.validate()?;
    let (algebra, data) = (problem.algebra, &problem.data);
    let summary = summarize(data, algebra)?;
    let existence = check_existence_condition(data, algebra)?;
    let troyanov = if algebra.rank() == 1 && data.num_points() > 0 {
        check_troyanov(&data.beta()[0]).ok()
    } else {
        None
    };
    let a2_classical = if algebra.rank() == 2 && algebra.family() == toda_forge_core::Family::A {
        Some(check_a2_classical_condition(data)?)
    } else {
        None
    };
    let assumption_d = match &problem.assumption_d {
        Some(params) => Some(AssumptionDBundle {
            n: params.n(),
            epsilon: params.epsilon().map(format_pq),
            b: params.b().iter().map(format_pq).collect(),
            checks: check_assumption_d(params.n(), params.b())?,
            consequences: params.consequences(),
        }),
        None => None,
    };
    let bundle = CheckBundle {
        algebra,
        beta_total: summary.beta_total.iter().map(format_pq).collect(),
        beta_bar: summary.beta_bar.iter().map(format_pq).collect(),
        troyanov,
        lt_condition: check_lt_condition(data),
        a2_classical,
        assumption_d,
        existence,
    };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&bundle),
        Format::Csv => {
            let mut s = String::from("i,l,lhs,rhs,holds,upper_bound_holds\n");
            for c in &bundle.existence.cells {
                let _ = writeln!(s, "{},{},{},{},{},{}", c.i, c.l, c.lhs, c.rhs, c.holds, c.upper_bound_holds);
            }
            s
        }
    };
    print!("{text}");
    let name = if cli.format == Some(Format::Csv) { "check.csv" } else { "check.json" };
    write_output(cli, name, &text)?;
    Ok(if bundle.existence.verdict { EXIT_OK } else { EXIT_CONDITION_FALSE })
}

fn parse_weight(s: &str) -> Result<f64, Failure> {
    Ok(to_f64(&parse_rational(s.trim())?))
}

#[derive(Serialize)]
struct PohozaevBundle<'a> {
    algebra: LieAlgebraType,
    identity: String,
    mu: &'a [f64],
    #[serde(flatten)]
    roots: &'a MassRoots,
    missing_witness: usize,
}

fn cmd_pohozaev(
    cli: &Cli,
    algebra: &str,
    mu: &[String],
    upper: &[f64],
    pins: &[String],
    step: f64,
    samples: Option<usize>,
) -> CmdResult {
    let algebra = parse_algebra(algebra)?;
    let n = algebra.rank();
    let mu = mu.iter().map(|s| parse_weight(s)).collect::<Result<Vec<_>, _>>()?;
    let upper = match upper.len() {
        1 => vec![upper[0]; n],
        k if k == n => upper.to_vec(),
        k => {
            return Err(Failure {
                code: EXIT_INPUT,
                message: format!("--box needs 1 or {n} values, got {k}"),
            })
        }
    };
    let mut constraints = MassConstraints::cube(n, 0.0);
    constraints.upper = upper;
    constraints.step = step;
    let widest = constraints.upper.iter().copied().fold(0.0, f64::max);
    constraints.samples_per_axis = samples.unwrap_or(((widest / step).round() as usize + 1).min(301));
    for p in pins {
        let (k, v) = p.split_once('=').ok_or_else(|| Failure {
            code: EXIT_INPUT,
            message: format!("--pin expects k=value, got `{p}`"),
        })?;
        let k: usize = k.trim().parse().map_err(|_| Failure {
            code: EXIT_INPUT,
            message: format!("bad component index in `{p}`"),
        })?;
        if k == 0 || k > n {
            return Err(Failure {
                code: EXIT_INPUT,
                message: format!("component {k} is outside 1..={n}"),
            });
        }
        constraints.pinned[k - 1] = Some(parse_weight(v)?);
    }
    let form = build_pohozaev_form(algebra);
    let roots = solve_masses(&form, &mu, &constraints)?;
    eprintln!("{}", form.describe());
    if let RootSetKind::SampledCurve {
        samples_per_axis,
        base_points,
    } = roots.kind
    {
        eprintln!("root set sampled along {base_points} lines ({samples_per_axis} per axis)");
    }
    let missing_witness = roots
        .roots
        .iter()
        .filter(|r| r.sigma.iter().any(|s| *s != 0.0) && r.witness.is_none())
        .count();
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => roots_csv(n, &roots),
        Format::Json => to_json(&PohozaevBundle {
            algebra,
            identity: form.describe(),
            mu: &mu,
            roots: &roots,
            missing_witness,
        }),
    };
    print!("{text}");
    let name = if cli.format == Some(Format::Json) { "roots.json" } else { "roots.csv" };
    write_output(cli, name, &text)?;
    write_output(cli, "identity.txt", &format!("{}\n", form.describe()))?;
    if !roots.unresolved.is_empty() {
        let mut s = String::new();
        for c in &roots.unresolved {
            let _ = writeln!(
                s,
                "unresolved cell: component {} on [{}, {}] at {:?}, best residual {:e}",
                c.solved_coordinate + 1,
                c.interval.0,
                c.interval.1,
                c.base,
                c.best_residual
            );
        }
        eprint!("{s}");
        return Ok(EXIT_INCOMPLETE);
    }
    Ok(if missing_witness == 0 { EXIT_OK } else { EXIT_CONDITION_FALSE })
}

fn roots_csv(n: usize, roots: &MassRoots) -> String {
    let mut s = String::new();
    for i in 1..=n {
        let _ = write!(s, "sigma_{i},");
    }
    s.push_str("residual,witness_index\n");
    for r in &roots.roots {
        for v in &r.sigma {
            let _ = write!(s, "{v},");
        }
        let w = r.witness.map(|w| (w + 1).to_string()).unwrap_or_default();
        let _ = writeln!(s, "{:e},{w}", r.residual);
    }
    s
}

#[derive(Serialize)]
struct MeshSummary {
    nodes: usize,
    background_nodes: usize,
    radius: f64,
    resolution: f64,
    patches: Vec<PatchSummary>,
}

#[derive(Serialize)]
struct PatchSummary {
    center: [f64; 2],
    radius: f64,
    inner_radius: f64,
    shrunk: bool,
    core_fraction: f64,
}

#[derive(Serialize)]
struct SolveReport {
    algebra: LieAlgebraType,
    existence_condition: bool,
    config: SolverConfig,
    status: SolveStatus,
    iterations: usize,
    final_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gauge_force: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<String>,
    c: Vec<f64>,
    mesh: MeshSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    contracts: Option<ContractReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radial_fit: Option<RadialFit>,
}

fn cmd_solve(cli: &Cli, path: &Path) -> CmdResult {
    let problem = read_problem(path)?.validate()?;
    let block = problem.solver.clone().ok_or_else(|| Failure {
        code: EXIT_INPUT,
        message: "problem file has no `solver` block".into(),
    })?;
    let mut config = block.apply(SolverConfig::default());
    if let Some(t) = cli.tol {
        config.tol = t;
    }
    if let Some(m) = cli.max_iters {
        config.max_iters = m;
    }
    if let Some(t) = cli.theta {
        config.theta = t;
    }
    if let Some(h) = cli.resolution {
        config.mesh.resolution = h;
    }
    if let Some(r) = cli.radius {
        config.mesh.radius = r;
    }
    let sp = SolverProblem::new(&problem.data, problem.algebra)?;
    let mesh = mesh_for(&sp, &config.mesh)?;
    let map = FixedPointMap::new(&mesh, &sp)?;
    let solution = iterate(&map, &config)?;
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("toda-forge-out"));
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut history = String::from("iteration,step");
    for i in 1..=sp.rank() {
        let _ = write!(history, ",c_{i}");
    }
    history.push('\n');
    for rec in &solution.history {
        let _ = write!(history, "{},{:e}", rec.iteration, rec.step);
        for c in &rec.c {
            let _ = write!(history, ",{c}");
        }
        history.push('\n');
    }
    fs::write(out_dir.join("history.csv"), history).context("writing history.csv")?;

    let finite = solution.u.iter().flatten().all(|v| v.is_finite());
    let contracts = (solution.status == SolveStatus::Converged && finite)
        .then(|| verify_solution(&map, &solution, &ContractTolerances::default()));
    let radial_fit = (sp.points.is_empty() && sp.rank() == 1 && sp.algebra.family() == toda_forge_core::Family::A)
        .then(|| fit_radial_benchmark(&mesh, &solution.u[0], 4.0));
    if finite {
        let mut fields = String::from("x,y");
        for i in 1..=sp.rank() {
            let _ = write!(fields, ",u_{i}");
        }
        fields.push('\n');
        for (k, x) in mesh.nodes.iter().enumerate() {
            let _ = write!(fields, "{},{}", x[0], x[1]);
            for u in &solution.u {
                let _ = write!(fields, ",{}", u[k]);
            }
            fields.push('\n');
        }
        fs::write(out_dir.join("fields.csv"), fields).context("writing fields.csv")?;
    }
    let report = SolveReport {
        algebra: sp.algebra,
        existence_condition: sp.existence,
        config,
        status: solution.status,
        iterations: solution.iterations,
        final_step: solution.history.last().map(|r| r.step),
        gauge_force: solution.gauge_force,
        diagnostic: solution.diagnostic.clone(),
        c: solution.c.clone(),
        mesh: MeshSummary {
            nodes: mesh.len(),
            background_nodes: mesh.background_count,
            radius: mesh.radius,
            resolution: mesh.resolution,
            patches: mesh
                .patches
                .iter()
                .map(|p| PatchSummary {
                    center: p.center,
                    radius: p.radius,
                    inner_radius: p.inner_radius,
                    shrunk: p.shrunk,
                    core_fraction: p.core_fraction,
                })
                .collect(),
        },
        contracts,
        radial_fit,
    };
    let text = to_json(&report);
    fs::write(out_dir.join("report.json"), &text).context("writing report.json")?;
    print!("{text}");
    Ok(match (&report.status, &report.contracts) {
        (SolveStatus::Converged, Some(c)) if c.all_pass => EXIT_OK,
        (SolveStatus::Converged, Some(_)) => EXIT_CONDITION_FALSE,
        _ => EXIT_SOLVER,
    })
}

#[derive(Serialize)]
struct CartanBundle {
    algebra: LieAlgebraType,
    cartan: Vec<Vec<i64>>,
    inverse: Vec<Vec<String>>,
    entry_bound: String,
    verification: InverseReport,
}

fn cmd_cartan(cli: &Cli, algebra: &str) -> CmdResult {
    let algebra = parse_algebra(algebra)?;
    let cartan = build_cartan(algebra);
    let inverse = inverse_closed_form(algebra);
    let verification = verify_inverse(&cartan, &inverse)?;
    let ok = verification.identity_holds && verification.bound_holds;
    let bundle = CartanBundle {
        algebra,
        cartan: cartan.entries().to_vec(),
        inverse: inverse.to_pq_strings(),
        entry_bound: format!("0 < c_ij < {}", 4 * algebra.rank()),
        verification,
    };
    let text = to_json(&bundle);
    print!("{text}");
    write_output(cli, "cartan.json", &text)?;
    Ok(if ok { EXIT_OK } else { EXIT_CONDITION_FALSE })
}
