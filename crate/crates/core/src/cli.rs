//! Command-line front end. `run` parses argv, executes one command and returns
//! the exit code with the text destined for stdout and stderr.
//!
//! Exit codes: 0 when every asserted property holds, 1 when a verdict fails,
//! 2 on usage or input errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::cnd::{
    build_concavity_witness, separable_concavity_check, tensor_cnd_sample_check, CndCertificate,
    ConcavityPattern, SampleVerdict,
};
use crate::error::{Error, Result};
use crate::gw::{
    check_bilinear_tightness, check_qp_lp_stationarity, solve_gw_exact_concave,
    solve_gw_multistart, solve_gw_permutation, FwOptions, GwSolution,
};
use crate::io::{
    format_matrix_csv, load_matrix, load_rows, matrix_json, num, pairwise_sqdist, vector_json,
    PointCloud, Report,
};
use crate::linear_ot::{check_cyclical_monotonicity, solve_linear_ot};
use crate::loss::SeparableLoss;
use crate::polytope::{as_permutation, enumerate_vertices, extreme_decomposition, is_extreme};
use crate::tensor::SeparableCost;
use crate::types::{CostMatrix, Coupling, Histogram, DEFAULT_SUPPORT_TOL};

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "gwot",
    version,
    about = "Exact linear OT, Gromov-Wasserstein solvers and transportation polytope checks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    group: Group,
}

#[derive(Args, Debug)]
struct Common {
    /// Tolerance for the command's verdict
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized steps
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Separable loss preset
    #[arg(long, global = true, value_enum, default_value_t = LossArg::Square)]
    loss: LossArg,
    /// Largest accepted n*m
    #[arg(long, global = true)]
    max_size: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Point cloud CSV, one point per row; give once or twice
    #[arg(long, global = true)]
    points: Vec<PathBuf>,
    /// Cost matrix CSV (first space for GW commands)
    #[arg(long, global = true)]
    cost: Option<PathBuf>,
    /// Second intra-space cost CSV for GW commands
    #[arg(long, global = true)]
    cost2: Option<PathBuf>,
    /// Coupling CSV
    #[arg(long, global = true)]
    plan: Option<PathBuf>,
    /// "uniform" or a CSV with one row (both sides) or two rows (a, then b)
    #[arg(long, global = true)]
    weights: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LossArg {
    Square,
    Kl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Exact,
    Permutation,
    FrankWolfe,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Linear optimal transport
    Lot {
        #[command(subcommand)]
        cmd: LotCmd,
    },
    /// Gromov-Wasserstein
    Gw {
        #[command(subcommand)]
        cmd: GwCmd,
    },
    /// Transportation polytope
    Polytope {
        #[command(subcommand)]
        cmd: PolytopeCmd,
    },
}

#[derive(Subcommand, Debug)]
enum LotCmd {
    /// Solve min <C, P> over couplings
    Solve,
    /// Check cyclical monotonicity of a plan (the LP optimum if --plan is absent)
    Monotonicity {
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Frank-Wolfe starts
    #[arg(long, default_value_t = 20)]
    starts: usize,
    /// Frank-Wolfe iterations per start
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

#[derive(Subcommand, Debug)]
enum GwCmd {
    /// Minimize the GW objective
    Solve(SolveArgs),
    /// Certify concavity of the GW objective
    CheckCnd {
        /// Random coupling pairs used to try refuting the certificate
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Compare GW with its bilinear relaxation
    Tightness,
    /// Check that a plan solves its own frozen linear problem
    Stationarity(SolveArgs),
}

#[derive(Subcommand, Debug)]
enum PolytopeCmd {
    /// Write a coupling as a convex combination of vertices
    Decompose,
    /// List every vertex of the polytope
    Vertices {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
    },
}

struct Done {
    report: Report,
    csv: Option<String>,
    passed: bool,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let start = Instant::now();
    let done = match execute(&cli) {
        Ok(d) => d,
        Err(e) => return input_error(&e.to_string()),
    };
    let mut report = done.report;
    report
        .timings_ms
        .insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    let stdout = match cli.common.format {
        Format::Json => match report.to_json() {
            Ok(s) => s + "\n",
            Err(e) => return input_error(&e.to_string()),
        },
        Format::Csv => match done.csv {
            Some(s) => s,
            None => {
                return input_error(&format!(
                    "--format csv is not available for '{}'",
                    report.command
                ))
            }
        },
    };
    Outcome {
        code: if done.passed { 0 } else { 1 },
        stdout,
        stderr: String::new(),
    }
}

fn input_error(msg: &str) -> Outcome {
    Outcome {
        code: 2,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    }
}

fn execute(cli: &Cli) -> Result<Done> {
    let c = &cli.common;
    match &cli.group {
        Group::Lot { cmd } => match cmd {
            LotCmd::Solve => lot_solve(c),
            LotCmd::Monotonicity { max_n } => lot_monotonicity(c, *max_n),
        },
        Group::Gw { cmd } => match cmd {
            GwCmd::Solve(args) => gw_solve(c, *args),
            GwCmd::CheckCnd { samples } => gw_check_cnd(c, *samples),
            GwCmd::Tightness => gw_tightness(c),
            GwCmd::Stationarity(args) => gw_stationarity(c, *args),
        },
        Group::Polytope { cmd } => match cmd {
            PolytopeCmd::Decompose => polytope_decompose(c),
            PolytopeCmd::Vertices { rows, cols } => polytope_vertices(c, *rows, *cols),
        },
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("{flag} is required")))
}

fn check_size(c: &Common, n: usize, m: usize) -> Result<()> {
    match c.max_size {
        Some(cap) if n * m > cap => Err(Error::TooLarge {
            what: "n*m",
            size: n * m,
            cap,
        }),
        _ => Ok(()),
    }
}

/// Marginals of an `n x m` instance from `--weights`.
fn weights(c: &Common, n: usize, m: usize) -> Result<(Histogram, Histogram)> {
    let (a, b) = match c.weights.as_deref() {
        None | Some("uniform") => (Histogram::uniform(n)?, Histogram::uniform(m)?),
        Some(path) => {
            let rows = load_rows(Path::new(path))?;
            match rows.as_slice() {
                [w] => (Histogram::new(w)?, Histogram::new(w)?),
                [wa, wb] => (Histogram::new(wa)?, Histogram::new(wb)?),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "weights file must have one or two rows, found {}",
                        rows.len()
                    )))
                }
            }
        }
    };
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("weights of lengths {n} and {m}"),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    Ok((a, b))
}

fn weights_label(c: &Common) -> String {
    c.weights.clone().unwrap_or_else(|| "uniform".into())
}

fn loss(c: &Common) -> SeparableLoss {
    match c.loss {
        LossArg::Square => SeparableLoss::square(),
        LossArg::Kl => SeparableLoss::kl(),
    }
}

fn base_instance(c: &Common, n: usize, m: usize) -> Map<String, Value> {
    let mut inst = Map::new();
    inst.insert("n".into(), json!(n));
    inst.insert("m".into(), json!(m));
    inst.insert("seed".into(), json!(c.seed));
    inst.insert("weights".into(), json!(weights_label(c)));
    inst
}

struct GwInstance {
    cost: SeparableCost,
    a: Histogram,
    b: Histogram,
    instance: Map<String, Value>,
}

/// Intra-space costs from `--points` (squared distances) or `--cost`/`--cost2`.
fn gw_instance(c: &Common) -> Result<GwInstance> {
    let (c1, c2, source) = if !c.points.is_empty() {
        if c.cost.is_some() || c.cost2.is_some() {
            return Err(Error::InvalidArgument(
                "give either --points or --cost/--cost2, not both".into(),
            ));
        }
        let clouds = c
            .points
            .iter()
            .map(|p| PointCloud::load(p))
            .collect::<Result<Vec<_>>>()?;
        match clouds.as_slice() {
            [x] => (pairwise_sqdist(x), pairwise_sqdist(x), "points"),
            [x, y] => (pairwise_sqdist(x), pairwise_sqdist(y), "points"),
            _ => {
                return Err(Error::InvalidArgument(
                    "--points may be given at most twice".into(),
                ))
            }
        }
    } else {
        let c1 = CostMatrix::symmetric(load_matrix(required(&c.cost, "--cost")?)?)?;
        let c2 = match &c.cost2 {
            Some(p) => CostMatrix::symmetric(load_matrix(p)?)?,
            None => c1.clone(),
        };
        (c1, c2, "cost")
    };
    let (n, m) = (c1.nrows(), c2.nrows());
    check_size(c, n, m)?;
    let (a, b) = weights(c, n, m)?;
    let l = loss(c);
    let mut instance = base_instance(c, n, m);
    instance.insert("loss".into(), json!(l.preset().name()));
    instance.insert("source".into(), json!(source));
    let cost = SeparableCost::new(l, c1, c2)?;
    Ok(GwInstance {
        cost,
        a,
        b,
        instance,
    })
}

fn plan_json(p: &Coupling) -> Result<Value> {
    matrix_json(p.matrix())
}

fn certificate_json(cert: &CndCertificate) -> Result<Value> {
    Ok(json!({
        "verdict": cert.verdict.name(),
        "tol": num(cert.tol)?,
        "min_eigenvalue": num(cert.min_eigenvalue)?,
        "max_eigenvalue": num(cert.max_eigenvalue)?,
        "spectrum": vector_json(&cert.spectrum)?,
    }))
}

fn lot_cost(c: &Common) -> Result<(DMatrix<f64>, Histogram, Histogram)> {
    let cost = load_matrix(required(&c.cost, "--cost")?)?;
    let (n, m) = cost.shape();
    check_size(c, n, m)?;
    let (a, b) = weights(c, n, m)?;
    Ok((cost, a, b))
}

fn lot_solve(c: &Common) -> Result<Done> {
    let (cost, a, b) = lot_cost(c)?;
    let (n, m) = cost.shape();
    let sol = solve_linear_ot(&cost, &a, &b)?;
    let support = sol.plan.support(DEFAULT_SUPPORT_TOL).len();
    let extreme = is_extreme(&sol.plan);
    let passed = extreme && support < n + m;
    let mut report = Report::new("lot solve");
    report.instance = base_instance(c, n, m);
    report.results.insert("value".into(), num(sol.value)?);
    report.results.insert("plan".into(), plan_json(&sol.plan)?);
    report
        .results
        .insert("iterations".into(), json!(sol.iterations));
    report.results.insert("support_size".into(), json!(support));
    report.results.insert("extreme".into(), json!(extreme));
    report.results.insert("passed".into(), json!(passed));
    Ok(Done {
        csv: Some(format_matrix_csv(sol.plan.matrix())),
        report,
        passed,
    })
}

fn lot_monotonicity(c: &Common, max_n: usize) -> Result<Done> {
    let (cost, a, b) = lot_cost(c)?;
    let (n, m) = cost.shape();
    let tol = c.tol.unwrap_or(1e-9);
    let (plan, source) = match &c.plan {
        Some(path) => {
            let raw = load_matrix(path)?;
            let plan = if c.weights.is_some() {
                Coupling::new(raw, &a, &b)?
            } else {
                Coupling::from_matrix(raw)?
            };
            (plan, "file")
        }
        None => (solve_linear_ot(&cost, &a, &b)?.plan, "lp_optimum"),
    };
    let rep = check_cyclical_monotonicity(&cost, &plan, max_n, tol)?;
    let mut report = Report::new("lot monotonicity");
    report.instance = base_instance(c, n, m);
    report.instance.insert("plan".into(), json!(source));
    report.results.insert("passed".into(), json!(rep.passed));
    report
        .results
        .insert("max_n_checked".into(), json!(rep.max_n_checked));
    report
        .results
        .insert("support_size".into(), json!(rep.support_size));
    report.results.insert("tol".into(), num(tol)?);
    if let Some(v) = &rep.violation {
        report.results.insert(
            "violation".into(),
            json!({
                "pairs": v.pairs,
                "permutation": v.permutation,
                "deficit": num(v.deficit)?,
            }),
        );
    }
    Ok(Done {
        report,
        csv: None,
        passed: rep.passed,
    })
}

/// Solves GW with the requested method. Returns the solution and whether it
/// is a certified global minimum.
fn solve_gw(inst: &GwInstance, c: &Common, args: SolveArgs) -> Result<(GwSolution, bool)> {
    let concave =
        separable_concavity_check(inst.cost.loss(), inst.cost.c(), inst.cost.cb())?.concave;
    let fw = || {
        let opts = FwOptions {
            max_iter: args.max_iter,
            tol: c.tol.unwrap_or(1e-9),
        };
        solve_gw_multistart(&inst.cost, &inst.a, &inst.b, args.starts, c.seed, opts)
    };
    match args.method {
        Method::Exact => Ok((solve_gw_exact_concave(&inst.cost, &inst.a, &inst.b)?, true)),
        Method::Permutation => {
            if !(inst.a.is_uniform() && inst.b.is_uniform()) {
                return Err(Error::InvalidArgument(
                    "permutation search needs uniform weights".into(),
                ));
            }
            Ok((solve_gw_permutation(&inst.cost)?, concave))
        }
        Method::FrankWolfe => Ok((fw()?, false)),
        Method::Auto if concave => {
            Ok((solve_gw_exact_concave(&inst.cost, &inst.a, &inst.b)?, true))
        }
        Method::Auto => Ok((fw()?, false)),
    }
}

fn gw_solve(c: &Common, args: SolveArgs) -> Result<Done> {
    let inst = gw_instance(c)?;
    let (sol, global) = solve_gw(&inst, c, args)?;
    let mut report = Report::new("gw solve");
    report.instance = inst.instance.clone();
    let r = &mut report.results;
    r.insert("method".into(), json!(sol.method.name()));
    r.insert("value".into(), num(sol.value)?);
    r.insert("plan".into(), plan_json(&sol.plan)?);
    r.insert("global".into(), json!(global));
    let mut passed = true;
    if let Some((h1, h2)) = &sol.certificates {
        r.insert("h1_certificate".into(), certificate_json(h1)?);
        r.insert("h2_certificate".into(), certificate_json(h2)?);
    }
    if let Some(t) = &sol.fw {
        passed = t.converged;
        r.insert(
            "frank_wolfe".into(),
            json!({
                "gap": num(t.gap)?,
                "iterations": t.iterations,
                "converged": t.converged,
                "objective_trace": vector_json(&t.values)?,
            }),
        );
    }
    r.insert("passed".into(), json!(passed));
    Ok(Done {
        csv: Some(format_matrix_csv(sol.plan.matrix())),
        report,
        passed,
    })
}

fn gw_check_cnd(c: &Common, samples: usize) -> Result<Done> {
    let inst = gw_instance(c)?;
    let concavity = separable_concavity_check(inst.cost.loss(), inst.cost.c(), inst.cost.cb())?;
    let mut report = Report::new("gw check-cnd");
    report.instance = inst.instance.clone();
    let pattern = match concavity.pattern {
        ConcavityPattern::BothCnd => "both_cnd",
        ConcavityPattern::BothCpd => "both_cpd",
        ConcavityPattern::Mixed => "mixed",
    };
    let r = &mut report.results;
    r.insert(
        "verdict".into(),
        json!(if concavity.concave {
            "concave"
        } else {
            "not_concave"
        }),
    );
    r.insert("concave".into(), json!(concavity.concave));
    r.insert("pattern".into(), json!(pattern));
    r.insert("h1_certificate".into(), certificate_json(&concavity.h1)?);
    r.insert("h2_certificate".into(), certificate_json(&concavity.h2)?);
    if !concavity.concave {
        let w = build_concavity_witness(
            inst.cost.loss(),
            inst.cost.c(),
            inst.cost.cb(),
            &inst.a,
            &inst.b,
        )?;
        r.insert(
            "witness".into(),
            json!({
                "p1": plan_json(&w.p1)?,
                "p2": plan_json(&w.p2)?,
                "midpoint_gap": num(w.midpoint_gap)?,
                "epsilon": num(w.epsilon)?,
                "mu": num(w.mu)?,
                "lambda": num(w.lambda)?,
            }),
        );
    }
    let mut passed = concavity.concave;
    if samples > 0 {
        let verdict = tensor_cnd_sample_check(&inst.cost, &inst.a, &inst.b, samples, c.seed)?;
        let v = match &verdict {
            SampleVerdict::Refuted { trial, q, value } => json!({
                "refuted": true,
                "trial": trial,
                "value": num(*value)?,
                "difference_plan": matrix_json(q.matrix())?,
            }),
            SampleVerdict::NotRefuted { trials } => json!({"refuted": false, "trials": trials}),
        };
        passed &= !verdict.is_refuted();
        r.insert("sampling".into(), v);
    }
    Ok(Done {
        report,
        csv: None,
        passed,
    })
}

fn gw_tightness(c: &Common) -> Result<Done> {
    let inst = gw_instance(c)?;
    let t = check_bilinear_tightness(&inst.cost, &inst.a, &inst.b)?;
    let mut report = Report::new("gw tightness");
    report.instance = inst.instance.clone();
    let r = &mut report.results;
    r.insert("concave".into(), json!(t.concave));
    r.insert("bilinear_value".into(), num(t.bilinear.value)?);
    r.insert("bilinear_plan1".into(), plan_json(&t.bilinear.plan1)?);
    r.insert("bilinear_plan2".into(), plan_json(&t.bilinear.plan2)?);
    r.insert("gw_value".into(), num(t.gw_value)?);
    r.insert("gw_is_upper_bound".into(), json!(!t.concave));
    r.insert("gw_plan".into(), plan_json(&t.gw_plan)?);
    if let Some(tight) = t.tight {
        r.insert("tight".into(), json!(tight));
    }
    if let Some(d) = t.diagonal_attains {
        r.insert("diagonal_attains".into(), json!(d));
    }
    r.insert("relaxation_holds".into(), json!(t.relaxation_holds));
    r.insert("passed".into(), json!(t.holds));
    Ok(Done {
        report,
        csv: None,
        passed: t.holds,
    })
}

fn gw_stationarity(c: &Common, args: SolveArgs) -> Result<Done> {
    let inst = gw_instance(c)?;
    let tol = c.tol.unwrap_or(1e-7);
    let (plan, source) = match &c.plan {
        Some(path) => (
            Coupling::new(load_matrix(path)?, &inst.a, &inst.b)?,
            "file".to_string(),
        ),
        None => {
            let (sol, _) = solve_gw(&inst, c, args)?;
            (sol.plan, sol.method.name().to_string())
        }
    };
    let rep = check_qp_lp_stationarity(&inst.cost, &plan, tol)?;
    let mut report = Report::new("gw stationarity");
    report.instance = inst.instance.clone();
    report.instance.insert("plan".into(), json!(source));
    let r = &mut report.results;
    r.insert("passed".into(), json!(rep.passed));
    r.insert("plan_value".into(), num(rep.plan_value)?);
    r.insert("lp_value".into(), num(rep.lp_value)?);
    r.insert("lp_plan".into(), plan_json(&rep.lp_plan)?);
    r.insert("plan".into(), plan_json(&plan)?);
    r.insert("tol".into(), num(tol)?);
    Ok(Done {
        report,
        csv: None,
        passed: rep.passed,
    })
}

/// One CSV row per plan: optional leading weight, then row-major entries.
fn plans_csv<'a>(plans: impl Iterator<Item = (Option<f64>, &'a Coupling)>) -> String {
    let rows: Vec<Vec<f64>> = plans
        .map(|(w, p)| {
            let m = p.matrix();
            let mut row: Vec<f64> = w.into_iter().collect();
            row.extend((0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])));
            row
        })
        .collect();
    if rows.is_empty() {
        return String::new();
    }
    format_matrix_csv(&DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
        rows[i][j]
    }))
}

fn polytope_decompose(c: &Common) -> Result<Done> {
    let raw = load_matrix(required(&c.plan, "--plan")?)?;
    let (n, m) = raw.shape();
    check_size(c, n, m)?;
    let plan = if c.weights.is_some() {
        let (a, b) = weights(c, n, m)?;
        Coupling::new(raw, &a, &b)?
    } else {
        Coupling::from_matrix(raw)?
    };
    let dec = extreme_decomposition(&plan);
    let weight_sum = dec.weight_sum();
    let error = (dec.reconstruct() - plan.matrix()).amax();
    let birkhoff = n == m && plan.row_marginal().is_uniform() && plan.col_marginal().is_uniform();
    let mut all_extreme = true;
    let mut all_permutations = true;
    let mut components = Vec::with_capacity(dec.components.len());
    for (w, p) in &dec.components {
        let extreme = is_extreme(p);
        let perm = as_permutation(p);
        all_extreme &= extreme;
        all_permutations &= perm.is_some();
        let mut entry = json!({
            "weight": num(*w)?,
            "plan": plan_json(p)?,
            "extreme": extreme,
        });
        if let Some(s) = perm {
            entry["permutation"] = json!(s.as_slice());
        }
        components.push(entry);
    }
    let passed = (weight_sum - 1.0).abs() <= 1e-10
        && error <= 1e-9
        && all_extreme
        && (!birkhoff || all_permutations);
    let mut report = Report::new("polytope decompose");
    report.instance = base_instance(c, n, m);
    let r = &mut report.results;
    r.insert("count".into(), json!(components.len()));
    r.insert("components".into(), Value::Array(components));
    r.insert("weight_sum".into(), num(weight_sum)?);
    r.insert("reconstruction_error".into(), num(error)?);
    r.insert("all_extreme".into(), json!(all_extreme));
    r.insert("birkhoff".into(), json!(birkhoff));
    r.insert("all_permutations".into(), json!(all_permutations));
    r.insert("passed".into(), json!(passed));
    Ok(Done {
        csv: Some(plans_csv(dec.components.iter().map(|(w, p)| (Some(*w), p)))),
        report,
        passed,
    })
}

fn polytope_vertices(c: &Common, rows: Option<usize>, cols: Option<usize>) -> Result<Done> {
    let (n, m) = match (rows, cols, c.weights.as_deref(), &c.cost) {
        (Some(n), cols, _, _) => (n, cols.unwrap_or(n)),
        (None, Some(_), _, _) => {
            return Err(Error::InvalidArgument("--cols needs --rows".into()));
        }
        (None, None, Some(w), _) if w != "uniform" => {
            let rows = load_rows(Path::new(w))?;
            match rows.as_slice() {
                [x] => (x.len(), x.len()),
                [x, y] => (x.len(), y.len()),
                _ => {
                    return Err(Error::InvalidArgument(
                        "weights file must have one or two rows".into(),
                    ))
                }
            }
        }
        (None, None, _, Some(path)) => load_matrix(path)?.shape(),
        _ => {
            return Err(Error::InvalidArgument(
                "give --rows/--cols, a weights file or --cost to fix the shape".into(),
            ))
        }
    };
    check_size(c, n, m)?;
    let (a, b) = weights(c, n, m)?;
    let vertices = enumerate_vertices(&a, &b)?;
    let mut report = Report::new("polytope vertices");
    report.instance = base_instance(c, n, m);
    let all_extreme = vertices.iter().all(is_extreme);
    let r = &mut report.results;
    r.insert("count".into(), json!(vertices.len()));
    r.insert(
        "vertices".into(),
        Value::Array(vertices.iter().map(plan_json).collect::<Result<_>>()?),
    );
    r.insert("all_extreme".into(), json!(all_extreme));
    r.insert("passed".into(), json!(all_extreme));
    Ok(Done {
        csv: Some(plans_csv(vertices.iter().map(|p| (None, p)))),
        report,
        passed: all_extreme,
    })
}
