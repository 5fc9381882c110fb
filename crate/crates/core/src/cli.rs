//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{check_rate_bounds, RateReport};
use crate::example::{c_upper, WorstCaseCertificate, DEFAULT_C_FRACTION, DEFAULT_DELTA, DEFAULT_W0};
use crate::linalg::{Matrix, Vector};
use crate::operators::{Operator, ViProblem};
use crate::pep::{assemble, solve_pep, PepError};
use crate::rppa::{self, probe_points};
use crate::sdp::{SdpConfig, SdpError};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Rows with `N` up to this value enter the gap footer.
pub const FOOTER_MAX_N: usize = 25;
/// Tolerance for the `bound_optimal ≤ eps ≤ bound_classic` check.
pub const SANDWICH_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "ppa-rate", version, about = "Ergodic convergence rate of the relaxed proximal point algorithm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the performance-estimation SDP for a range of N and compare with the analytic bounds.
    Pep(PepArgs),
    /// Run the relaxed proximal point method on one operator and check both rate bounds.
    Run(RunArgs),
    /// Build the worst-case instance and scan its performance ratio.
    Example(ExampleArgs),
    /// Run the full self-check suite.
    Verify(VerifyArgs),
    /// Write the performance-estimation SDP in sparse triplet form.
    ExportSdp(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Stopping tolerance on the scaled residuals.
    #[arg(long, value_parser = parse_positive)]
    pub tol: Option<f64>,
    #[arg(long, value_parser = parse_iter_cap)]
    pub max_iter: Option<usize>,
    /// Initial ADMM penalty.
    #[arg(long, value_parser = parse_positive)]
    pub rho: Option<f64>,
}

impl SolverArgs {
    pub fn config(&self) -> SdpConfig {
        let mut cfg = SdpConfig::default();
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(r) = self.rho {
            cfg.rho = r;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct PepArgs {
    /// Single N or inclusive range `a..b`.
    #[arg(long, default_value = "1..25", value_parser = parse_range)]
    pub n: NRange,
    #[arg(long, default_value_t = 1.5, value_parser = parse_lambda)]
    pub lambda: f64,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    Piecewise,
    Affine,
    Zero,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "piecewise")]
    pub operator: OperatorKind,
    #[arg(long, default_value = "10", value_parser = parse_range)]
    pub n: NRange,
    #[arg(long, default_value_t = 1.5, value_parser = parse_lambda)]
    pub lambda: f64,
    /// Start point, comma separated.
    #[arg(long, value_parser = parse_vector)]
    pub w0: Option<Vector>,
    /// Piecewise operator: plateau value (default: the worst-case choice).
    #[arg(long)]
    pub c: Option<f64>,
    /// Piecewise operator: ramp half-width.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Affine operator matrix, rows separated by `;`, entries by `,`.
    #[arg(long, value_parser = parse_matrix)]
    pub matrix: Option<Matrix>,
    /// Affine operator offset, comma separated.
    #[arg(long, value_parser = parse_vector)]
    pub offset: Option<Vector>,
    /// Zero operator dimension (defaults to the start point's).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Seed for random probe points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value = "10", value_parser = parse_range)]
    pub n: NRange,
    #[arg(long, default_value_t = 1.5, value_parser = parse_lambda)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_W0)]
    pub w0: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Plateau value (default: 0.9 of its admissible limit).
    #[arg(long)]
    pub c: Option<f64>,
    /// Grid spacing for the ratio scan (default: 1e-4 w0).
    #[arg(long, value_parser = parse_positive)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_parser = parse_range)]
    pub n: NRange,
    #[arg(long, default_value_t = 1.5, value_parser = parse_lambda)]
    pub lambda: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inclusive range of iteration counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }

    pub fn single(&self) -> Option<usize> {
        (self.start == self.end).then_some(self.start)
    }
}

/// Accepts `7`, `1..10` and `1..=10`; both ends inclusive, `N ≥ 1`.
pub fn parse_range(s: &str) -> Result<NRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid iteration count {t:?}"))
    };
    let (start, end) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if start < 1 {
        return Err("N must be at least 1".into());
    }
    if end < start {
        return Err(format!("empty range {start}..{end}"));
    }
    Ok(NRange { start, end })
}

pub fn parse_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if v > 0.0 && v < 2.0 {
        Ok(v)
    } else {
        Err(format!("λ = {v} must lie in (0, 2)"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_iter_cap(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("iteration cap {s:?} must be a positive integer")),
    }
}

pub fn parse_vector(s: &str) -> Result<Vector, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid number {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.iter().all(|x| x.is_finite()) {
        Ok(Vector::from_vec(v))
    } else {
        Err("entries must be finite".into())
    }
}

pub fn parse_matrix(s: &str) -> Result<Matrix, String> {
    let rows = s
        .split(';')
        .map(|r| parse_vector(r).map(Vector::into_inner))
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

/// `%.{digits}g`-style formatting.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn fmt12(x: f64) -> String {
    fmt_sig(x, 12)
}

/// Outcome of a command: exit code plus diagnostics for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }

    fn io(e: io::Error) -> Self {
        Self::usage(format!("output error: {e}"))
    }
}

fn pep_failure(n: usize, e: PepError) -> Failure {
    match e {
        PepError::Solver(SdpError::SolverFailed { .. }) => Failure::solver(format!("N = {n}: {e}")),
        PepError::Params(_) => Failure::usage(format!("N = {n}: {e}")),
        other => Failure::solver(format!("N = {n}: {other}")),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Debug, Serialize)]
pub struct PepTable {
    pub lambda: f64,
    pub rows: Vec<RateReport>,
    /// Largest `|eps_pep - bound_optimal|` over rows with `N ≤ 25`.
    pub max_abs_gap_small_n: Option<f64>,
    pub all_sandwiched: bool,
}

/// Solves every `N` of the range (in parallel) and tabulates against the bounds.
pub fn pep_table(range: NRange, lambda: f64, cfg: &SdpConfig) -> Result<PepTable, Failure> {
    let ns: Vec<usize> = range.iter().collect();
    let rows = ns
        .par_iter()
        .map(|&n| {
            let inst = assemble(n, lambda).map_err(|e| pep_failure(n, e))?;
            let sol = solve_pep(&inst, cfg).map_err(|e| pep_failure(n, e))?;
            let lower = WorstCaseCertificate::default_for(n, lambda)
                .map_err(|e| Failure::usage(e.to_string()))?
                .achieved_ratio;
            RateReport::new(n, lambda, sol.eps, lower).map_err(|e| Failure::usage(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_abs_gap_small_n = rows
        .iter()
        .filter(|r| r.iterations <= FOOTER_MAX_N)
        .map(|r| r.abs_gap)
        .reduce(f64::max);
    let all_sandwiched = rows.iter().all(|r| r.sandwich_holds(SANDWICH_TOL));
    Ok(PepTable {
        lambda,
        rows,
        max_abs_gap_small_n,
        all_sandwiched,
    })
}

pub const PEP_COLUMNS: [&str; 8] = [
    "N",
    "lambda",
    "eps_pep",
    "bound_classic",
    "bound_optimal",
    "lower_example",
    "abs_gap",
    "rel_gap",
];

pub fn write_pep_csv<W: Write>(table: &PepTable, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PEP_COLUMNS)?;
    for r in &table.rows {
        w.write_record([
            r.iterations.to_string(),
            fmt12(r.lambda),
            fmt12(r.eps_pep),
            fmt12(r.bound_classic),
            fmt12(r.bound_optimal),
            fmt12(r.lower_example),
            fmt12(r.abs_gap),
            fmt12(r.rel_gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_pep(args: &PepArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let table = pep_table(args.n, args.lambda, &args.solver.config())?;
    let mut out = open_output(&args.output.out)?;
    match args.output.format {
        Format::Csv => write_pep_csv(&table, &mut out).map_err(|e| Failure::usage(e.to_string()))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &table).map_err(|e| Failure::usage(e.to_string()))?;
            writeln!(out).map_err(Failure::io)?;
        }
    }
    out.flush().map_err(Failure::io)?;
    if let Some(gap) = table.max_abs_gap_small_n {
        let _ = writeln!(err, "# max |eps_pep - bound_optimal| over N <= {FOOTER_MAX_N}: {}", fmt12(gap));
    }
    if table.all_sandwiched {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "# sandwich bound_optimal <= eps_pep <= bound_classic violated (tol {SANDWICH_TOL:e})");
        Ok(EXIT_VERIFY)
    }
}

#[derive(Debug, Serialize)]
struct RunSummary {
    operator: String,
    iterations: usize,
    lambda: f64,
    w: Vec<Vec<f64>>,
    w_tilde: Vec<Vec<f64>>,
    average: Vec<f64>,
    probes: usize,
    max_excess_classic: f64,
    max_excess_optimal: f64,
    classic_holds: bool,
    optimal_holds: bool,
    /// Deviation from the closed-form worst-case run, when applicable.
    closed_form_deviation: Option<f64>,
}

fn build_run_problem(args: &RunArgs, n: usize) -> Result<(ViProblem, Option<WorstCaseCertificate>), Failure> {
    let bad = |e: &dyn std::fmt::Display| Failure::usage(e.to_string());
    match args.operator {
        OperatorKind::Piecewise => {
            let w0 = match &args.w0 {
                Some(v) if v.len() == 1 => v[0],
                Some(v) => return Err(Failure::usage(format!("piecewise operator is 1-D, got w0 of length {}", v.len()))),
                None => DEFAULT_W0,
            };
            let c = args
                .c
                .unwrap_or(DEFAULT_C_FRACTION * c_upper(n, args.lambda, w0, args.delta));
            let op = Operator::piecewise(c, args.delta).map_err(|e| bad(&e))?;
            let p = ViProblem::unconstrained(op, args.lambda, Vector::from_vec(vec![w0])).map_err(|e| bad(&e))?;
            let cert = WorstCaseCertificate::build(n, args.lambda, w0, args.delta, c).ok();
            Ok((p, cert))
        }
        OperatorKind::Affine => {
            let m = args
                .matrix
                .clone()
                .ok_or_else(|| Failure::usage("affine operator needs --matrix"))?;
            let q = args.offset.clone().unwrap_or_else(|| Vector::zeros(m.rows()));
            let w0 = args.w0.clone().unwrap_or_else(|| Vector::filled(m.rows(), 1.0));
            let op = Operator::affine(m, q).map_err(|e| bad(&e))?;
            Ok((ViProblem::unconstrained(op, args.lambda, w0).map_err(|e| bad(&e))?, None))
        }
        OperatorKind::Zero => {
            let dim = args.dim.or(args.w0.as_ref().map(|v| v.len())).unwrap_or(1);
            let w0 = args.w0.clone().unwrap_or_else(|| Vector::filled(dim, 1.0));
            let p = ViProblem::unconstrained(Operator::zero(dim), args.lambda, w0).map_err(|e| bad(&e))?;
            Ok((p, None))
        }
    }
}

fn cmd_run(args: &RunArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let n = args
        .n
        .single()
        .ok_or_else(|| Failure::usage("run takes a single N"))?;
    let (p, cert) = build_run_problem(args, n)?;
    let t = rppa::run(&p, n).map_err(|e| Failure::usage(e.to_string()))?;
    let probes = probe_points(&t, p.set(), args.seed);
    let check = check_rate_bounds(&t, &p, &probes).map_err(|e| Failure::usage(e.to_string()))?;
    let closed_form_deviation = cert.map(|c| {
        t.w_tilde
            .iter()
            .zip(&c.trajectory)
            .map(|(x, &y)| (x[0] - y).abs())
            .fold(0.0, f64::max)
    });
    let summary = RunSummary {
        operator: p.operator().to_string(),
        iterations: n,
        lambda: args.lambda,
        w: t.w.iter().map(|v| v.to_vec()).collect(),
        w_tilde: t.w_tilde.iter().map(|v| v.to_vec()).collect(),
        average: t.average.to_vec(),
        probes: check.probes,
        max_excess_classic: check.max_excess_classic,
        max_excess_optimal: check.max_excess_optimal,
        classic_holds: check.classic_holds(),
        optimal_holds: check.optimal_holds(),
        closed_form_deviation,
    };
    let mut out = open_output(&args.output.out)?;
    match args.output.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| Failure::usage(e.to_string()))?;
            writeln!(out).map_err(Failure::io)?;
        }
        Format::Csv => {
            let d = p.dim();
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["k".to_string()];
            header.extend((0..d).map(|i| format!("w{i}")));
            header.extend((0..d).map(|i| format!("w_tilde{i}")));
            w.write_record(&header).map_err(|e| Failure::usage(e.to_string()))?;
            for k in 0..=n + 1 {
                let mut row = vec![k.to_string()];
                row.extend(t.w[k].iter().map(|&x| fmt12(x)));
                match t.w_tilde.get(k) {
                    Some(v) => row.extend(v.iter().map(|&x| fmt12(x))),
                    None => row.extend((0..d).map(|_| String::new())),
                }
                w.write_record(&row).map_err(|e| Failure::usage(e.to_string()))?;
            }
            w.flush().map_err(Failure::io)?;
        }
    }
    out.flush().map_err(Failure::io)?;
    let _ = writeln!(
        err,
        "# operator {}; average {:?}; classic bound {} (max excess {}); optimal bound {} (max excess {}); {} probes",
        summary.operator,
        summary.average,
        if summary.classic_holds { "holds" } else { "FAILS" },
        fmt12(summary.max_excess_classic),
        if summary.optimal_holds { "holds" } else { "FAILS" },
        fmt12(summary.max_excess_optimal),
        summary.probes,
    );
    if let Some(dev) = closed_form_deviation {
        let _ = writeln!(err, "# deviation from the closed-form worst-case run: {}", fmt12(dev));
    }
    Ok(if summary.classic_holds && summary.optimal_holds {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

#[derive(Debug, Serialize)]
struct ExampleReport {
    certificate: WorstCaseCertificate,
    bound_optimal: f64,
    simulated_deviation: f64,
    scan: crate::example::CaseScan,
    consistent: bool,
}

fn cmd_example(args: &ExampleArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let n = args
        .n
        .single()
        .ok_or_else(|| Failure::usage("example takes a single N"))?;
    let c = args
        .c
        .unwrap_or(DEFAULT_C_FRACTION * c_upper(n, args.lambda, args.w0, args.delta));
    let cert = WorstCaseCertificate::build(n, args.lambda, args.w0, args.delta, c)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let step = args.step.unwrap_or(cert.default_step());
    let scan = cert.case_scan(step).map_err(|e| Failure::usage(e.to_string()))?;
    let simulated_deviation = cert.trajectory_deviation().map_err(|e| Failure::usage(e.to_string()))?;
    let consistent = scan.consistent(SANDWICH_TOL) && simulated_deviation <= 1e-12;
    let report = ExampleReport {
        bound_optimal: scan.bound,
        certificate: cert,
        simulated_deviation,
        scan,
        consistent,
    };
    let mut out = open_output(&args.output.out)?;
    match args.output.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::usage(e.to_string()))?;
            writeln!(out).map_err(Failure::io)?;
        }
        Format::Csv => {
            let c = &report.certificate;
            let mut w = csv::Writer::from_writer(&mut out);
            let mut rows: Vec<(String, String)> = vec![
                ("N".into(), c.iterations.to_string()),
                ("lambda".into(), fmt12(c.relaxation)),
                ("w0".into(), fmt12(c.w0)),
                ("delta".into(), fmt12(c.delta)),
                ("c".into(), fmt12(c.c)),
                ("w_bar".into(), fmt12(c.w_bar)),
                ("w_star".into(), fmt12(c.w_star)),
                ("achieved_ratio".into(), fmt12(c.achieved_ratio)),
                ("bound_optimal".into(), fmt12(report.bound_optimal)),
                ("simulated_deviation".into(), fmt12(report.simulated_deviation)),
                ("above_max_ratio".into(), fmt12(report.scan.above.max_ratio)),
                ("above_argmax".into(), fmt12(report.scan.above.argmax)),
                ("middle_max_ratio".into(), fmt12(report.scan.middle.max_ratio)),
                ("below_max_ratio".into(), fmt12(report.scan.below.max_ratio)),
                ("middle_chain_min_slack".into(), fmt12(report.scan.middle_chain_min_slack)),
            ];
            rows.extend(
                c.trajectory
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| (format!("w_tilde{k}"), fmt12(x))),
            );
            w.write_record(["field", "value"]).map_err(|e| Failure::usage(e.to_string()))?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| Failure::usage(e.to_string()))?;
            }
            w.flush().map_err(Failure::io)?;
        }
    }
    out.flush().map_err(Failure::io)?;
    if report.consistent {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "# case analysis inconsistent with the optimal bound");
        Ok(EXIT_VERIFY)
    }
}

fn cmd_verify(args: &VerifyArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let report = run_suite(args.seed, &args.solver.config());
    let mut out = open_output(&args.output.out)?;
    match args.output.format {
        Format::Json => {
            let failures: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
            let doc = serde_json::json!({
                "passed": report.passed(),
                "failures": failures,
                "report": report,
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::usage(e.to_string()))?;
            writeln!(out).map_err(Failure::io)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["check", "status", "cases", "worst", "detail"])
                .map_err(|e| Failure::usage(e.to_string()))?;
            for c in &report.checks {
                w.write_record([
                    c.name.to_string(),
                    if c.passed { "pass" } else { "fail" }.to_string(),
                    c.cases.to_string(),
                    fmt12(c.worst),
                    c.detail.clone(),
                ])
                .map_err(|e| Failure::usage(e.to_string()))?;
            }
            w.flush().map_err(Failure::io)?;
        }
    }
    out.flush().map_err(Failure::io)?;
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        for c in report.failures() {
            let _ = writeln!(err, "FAILED {}: {}", c.name, c.detail);
        }
        Ok(EXIT_VERIFY)
    }
}

fn cmd_export(args: &ExportArgs) -> Result<i32, Failure> {
    let n = args
        .n
        .single()
        .ok_or_else(|| Failure::usage("export-sdp takes a single N"))?;
    let inst = assemble(n, args.lambda).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = open_output(&args.out)?;
    inst.export(&mut out).map_err(|e| Failure::usage(e.to_string()))?;
    out.flush().map_err(Failure::io)?;
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn execute(cli: &Cli, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Pep(a) => cmd_pep(a, err),
        Command::Run(a) => cmd_run(a, err),
        Command::Example(a) => cmd_example(a, err),
        Command::Verify(a) => cmd_verify(a, err),
        Command::ExportSdp(a) => cmd_export(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("5").unwrap(), NRange { start: 5, end: 5 });
        assert_eq!(parse_range("1..10").unwrap(), NRange { start: 1, end: 10 });
        assert_eq!(parse_range("2..=4").unwrap(), NRange { start: 2, end: 4 });
        assert!(parse_range("0").is_err());
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn lambda_domain() {
        assert!(parse_lambda("2.0").is_err());
        assert!(parse_lambda("0").is_err());
        assert!(parse_lambda("nan").is_err());
        assert_eq!(parse_lambda("1.5").unwrap(), 1.5);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.0 / 33.0, 12), "0.030303030303");
        assert_eq!(fmt_sig(1.0 / 7.0, 12), "0.142857142857");
        assert_eq!(fmt_sig(10.0, 12), "10");
        assert_eq!(fmt_sig(1.5, 12), "1.5");
        assert_eq!(fmt_sig(4.62e-8, 12), "4.62e-8");
        assert_eq!(fmt_sig(-2.5, 12), "-2.5");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }

    #[test]
    fn matrices_and_vectors() {
        let m = parse_matrix("1,2;3,4").unwrap();
        assert_eq!(m[(1, 0)], 3.0);
        assert!(parse_matrix("1,2;3").is_err());
        assert_eq!(parse_vector("1, -2.5").unwrap().as_slice(), &[1.0, -2.5]);
    }
}
