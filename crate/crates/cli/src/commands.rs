use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use otsm::experiment::{export_results, run_grid, ExperimentGrid, InitKind};
use otsm::{
    certify, objective, oscillation_demo, solve, stationarity, Alpha, CertifyOptions, Config,
    InitStrategy, StopReason, Verdict,
};

use crate::error::{CliError, CliResult};
use crate::files::{
    write_json, CertificateFile, CertifyFile, ProblemFile, ReportFile, SolutionFile,
    StationarityFile,
};

#[derive(Debug, Parser)]
#[command(name = "otsm", version, about = "Orthogonal trace-sum maximization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the proximal block relaxation solver on a problem file.
    Solve(SolveArgs),
    /// Check a candidate solution for global optimality.
    Certify(CertifyArgs),
    /// Replay the classical block ascent 4-cycle on the hard example.
    DemoOscillation,
    /// Run the synthetic Procrustes benchmark grid and write a CSV table.
    Bench(BenchArgs),
}

/// `--alpha` value: a positive number or `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaArg(pub Alpha<f64>);

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(AlphaArg(Alpha::Infinite)),
            other => {
                let a: f64 = other
                    .parse()
                    .map_err(|_| format!("expected a positive number or inf, got {s:?}"))?;
                if a.is_finite() && a > 0.0 {
                    Ok(AlphaArg(Alpha::Finite(a)))
                } else if a == f64::INFINITY {
                    Ok(AlphaArg(Alpha::Infinite))
                } else {
                    Err(format!("alpha must be positive, got {s}"))
                }
            }
        }
    }
}

/// `--init` value.
#[derive(Debug, Clone, PartialEq)]
pub enum InitArg {
    Identity,
    Spectral,
    File(PathBuf),
}

impl FromStr for InitArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(InitArg::Identity),
            "spectral" => Ok(InitArg::Spectral),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(InitArg::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected identity, spectral or file:PATH, got {s:?}"
                )),
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Proximity constant; `inf` runs classical block ascent.
    #[arg(long, default_value = "1000")]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// identity, spectral or file:PATH
    #[arg(long, default_value = "spectral")]
    pub init: InitArg,
    #[arg(long)]
    pub certify: bool,
    /// Report file.
    #[arg(long)]
    pub out: PathBuf,
    /// Solution file; defaults to `<out stem>.solution.json` next to the report.
    #[arg(long)]
    pub solution_out: Option<PathBuf>,
    /// Include the per-cycle objective trace in the report.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 20])]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1f64, 10.0])]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Certify(a) => cmd_certify(&a, out),
        Command::DemoOscillation => cmd_demo_oscillation(out),
        Command::Bench(a) => cmd_bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Internal(format!("writing to stdout: {e}"))
}

/// `report.json` → `report.solution.json`.
pub fn default_solution_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.solution.json"))
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let problem = ProblemFile::load(&args.input)?;
    let init = match &args.init {
        InitArg::Identity => InitStrategy::Identity,
        InitArg::Spectral => InitStrategy::Spectral,
        InitArg::File(p) => {
            let (point, warnings) = SolutionFile::load(p, problem.dims())?;
            for w in warnings {
                writeln!(err, "warning: {}: {w}", p.display()).map_err(io)?;
            }
            InitStrategy::Custom(point)
        }
    };
    let config = Config {
        alpha: args.alpha.0,
        tol: args.tol,
        max_iter: args.max_iter,
        init,
        ..Config::default()
    };
    config.validate()?;
    let solution_path = args
        .solution_out
        .clone()
        .unwrap_or_else(|| default_solution_path(&args.out));
    if solution_path == args.out {
        return Err(CliError::input("--solution-out: must differ from --out"));
    }
    if !args.alpha.0.is_finite() {
        writeln!(
            err,
            "warning: alpha = inf runs classical block ascent, which can oscillate and is not guaranteed to converge"
        )
        .map_err(io)?;
    }

    let report = solve(&problem, &config)?;
    let certificate = if args.certify {
        Some(certify(
            &problem,
            &report.solution,
            &CertifyOptions::default(),
        )?)
    } else {
        None
    };
    let file = ReportFile::new(&report, certificate.as_ref(), args.trace);
    write_json(&solution_path, &SolutionFile::from_point(&report.solution))?;
    write_json(&args.out, &file)?;

    writeln!(
        out,
        "{} after {} cycles, objective {}",
        report.stop_reason.as_str(),
        report.iterations,
        report.final_objective()
    )
    .map_err(io)?;
    writeln!(
        out,
        "stationarity: gradient residual {:.3e}, asymmetry {:.3e}",
        report.stationarity.max_gradient_residual, report.stationarity.max_asymmetry
    )
    .map_err(io)?;
    if let Some(c) = &certificate {
        write_certificate_summary(out, &CertificateFile::from(c))?;
    }
    writeln!(out, "report: {}", args.out.display()).map_err(io)?;
    writeln!(out, "solution: {}", solution_path.display()).map_err(io)?;
    Ok(match report.stop_reason {
        StopReason::Converged => 0,
        StopReason::MaxIter | StopReason::Stagnated => 2,
    })
}

fn write_certificate_summary(out: &mut dyn Write, c: &CertificateFile) -> CliResult<()> {
    let taus: Vec<String> = c.taus.iter().map(|t| format!("{t:.6}")).collect();
    writeln!(out, "certificate: {}", c.verdict).map_err(io)?;
    writeln!(out, "  taus: {}", taus.join(" ")).map_err(io)?;
    writeln!(
        out,
        "  lmin(L*) = {:.4e} (reduced {:.4e}), tol_psd {:.1e}",
        c.lmin_full, c.lmin_reduced, c.tol_psd
    )
    .map_err(io)?;
    writeln!(
        out,
        "  dual bound {}, optimality gap at most {:.3e}",
        c.dual_bound, c.gap_bound
    )
    .map_err(io)?;
    Ok(())
}

pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let problem = ProblemFile::load(&args.input)?;
    let (point, warnings) = SolutionFile::load(&args.solution, problem.dims())?;
    for w in warnings {
        writeln!(out, "warning: {}: {w}", args.solution.display()).map_err(io)?;
    }
    let cert = certify(&problem, &point, &CertifyOptions::default())?;
    let st = stationarity(&problem, &point)?;
    let file = CertifyFile {
        objective: objective(&problem, &point)?,
        stationarity: StationarityFile {
            max_gradient_residual: st.max_gradient_residual,
            max_asymmetry: st.max_asymmetry,
        },
        certificate: CertificateFile::from(&cert),
    };
    write_json(&args.out, &file)?;
    writeln!(out, "objective {}", file.objective).map_err(io)?;
    write_certificate_summary(out, &file.certificate)?;
    Ok(match cert.verdict {
        Verdict::CertifiedGlobal => 0,
        Verdict::Inconclusive => 3,
        Verdict::CertifiedNotGlobal => 4,
    })
}

/// Decimal rendering with `−0` and sub-`1e-12` noise printed as `0`.
fn num(v: f64) -> String {
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn matrix_line(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| {
            let v: Vec<String> = r.iter().map(|&x| num(x)).collect();
            format!("[{}]", v.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn cmd_demo_oscillation(out: &mut dyn Write) -> CliResult<i32> {
    let trace = match oscillation_demo() {
        Ok(t) => t,
        Err(e) => {
            writeln!(out, "validation failed: {e}").map_err(io)?;
            return Ok(5);
        }
    };
    let names = ["(I, J, I)", "(-J, I, -J)", "(-I, -J, -I)", "(J, -I, J)"];
    writeln!(
        out,
        "classical block ascent (alpha = inf) on the hard example, d = 3, r = 2"
    )
    .map_err(io)?;
    for (k, (x, name)) in trace.iterates.iter().zip(names).enumerate() {
        writeln!(out, "iterate {k}: {name}").map_err(io)?;
        for (b, blk) in x.blocks().iter().enumerate() {
            writeln!(out, "  O_{} = {}", b + 1, matrix_line(blk)).map_err(io)?;
        }
    }
    let objs: Vec<String> = trace.objectives.iter().map(|&f| num(f)).collect();
    writeln!(out, "objective: {}", objs.join(" ")).map_err(io)?;
    writeln!(out, "global optimum: {}", num(trace.global_optimum)).map_err(io)?;
    writeln!(
        out,
        "argmax checks ({} steps, tolerance {:.0e}):",
        trace.checks.len(),
        otsm::oscillation::ARGMAX_TOL
    )
    .map_err(io)?;
    for c in &trace.checks {
        writeln!(
            out,
            "  cycle {} block {}: tr(O^T B) = {}, nuclear norm = {}  ok",
            c.cycle,
            c.block,
            num(c.attained),
            num(c.nuclear_norm)
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "finite alpha = {} from (I, J, I): converged after {} cycle(s), mean change {}",
        trace.fixed_point_alpha,
        trace.fixed_point_iterations,
        num(trace.fixed_point_mean_change)
    )
    .map_err(io)?;
    writeln!(out, "all validations passed").map_err(io)?;
    Ok(0)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<i32> {
    let grid = ExperimentGrid {
        m: args.m,
        n: args.n,
        r: args.r,
        d_values: args.d.clone(),
        sigma_values: args.sigma.clone(),
        reps: args.reps,
        base_seed: args.seed,
        inits: vec![InitKind::Identity, InitKind::Spectral],
        ..ExperimentGrid::default()
    };
    grid.validate()?;
    let results = run_grid(&grid)?;
    export_results(&results, &args.out)?;
    writeln!(
        out,
        "{:>4} {:>8} {:>9} {:>9} {:>12} {:>10} {:>9}",
        "d", "sigma", "init", "certified", "inconclusive", "not_global", "mean_iter"
    )
    .map_err(io)?;
    for c in &results {
        writeln!(
            out,
            "{:>4} {:>8} {:>9} {:>9} {:>12} {:>10} {:>9.1}",
            c.d, c.sigma, c.init, c.certified, c.inconclusive, c.not_global, c.mean_iterations
        )
        .map_err(io)?;
    }
    writeln!(out, "wrote {}", args.out.display()).map_err(io)?;
    Ok(0)
}
