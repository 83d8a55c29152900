//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use otsm::experiment::{results_to_csv, run_grid, ExperimentGrid};
use otsm::linalg::singular_values;
use otsm::oscillation::ARGMAX_TOL;
use otsm::{
    certify, dual_upper_bound, hard_example, oscillation_demo, solve, Alpha, BlockDims,
    CertifyOptions, Config, InitStrategy, Problem, Report, StopReason, Verdict,
};
use otsm_cli::files::ProblemFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20_240_601;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

/// Every solve of criteria 1–5 with its problem, for criteria 6 and 7.
type Solved = Vec<(String, Problem, Report)>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn criterion_1(solved: &mut Solved) -> Outcome {
    let start = Instant::now();
    let p = hard_example::<f64>(3, 2).unwrap();
    let rep = solve(&p, &Config::default()).unwrap();
    let c = certify(&p, &rep.solution, &CertifyOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let f = rep.final_objective();
    let obj_ok = (f - 3.0).abs() <= 1e-4;
    let verdict_ok = c.verdict == Verdict::CertifiedGlobal;
    let time_ok = secs < 5.0;
    let detail = format!(
        "hard example, spectral start: objective {f:.10} after {} cycles ({}); verdict {} with lmin(L*) = {:.4e} vs -tol_psd = {:.1e} ({}); {secs:.3} s ({})",
        rep.iterations,
        mark(obj_ok),
        c.verdict.as_str(),
        c.lmin_full,
        -c.tol_psd,
        mark(verdict_ok),
        mark(time_ok)
    );
    solved.push(("hard example, spectral".into(), p, rep));
    check(obj_ok && verdict_ok && time_ok, detail)
}

fn criterion_2(solved: &mut Solved) -> Outcome {
    let start = Instant::now();
    let p = hard_example::<f64>(3, 2).unwrap();
    let rep = solve(&p, &Config::default().with_init(InitStrategy::Identity)).unwrap();
    let c = certify(&p, &rep.solution, &CertifyOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let f = rep.final_objective();
    let ok = rep.stop_reason == StopReason::Converged
        && rep.iterations == 1
        && (f - 2.0).abs() <= 1e-10
        && c.verdict == Verdict::Inconclusive
        && secs < 1.0;
    let detail = format!(
        "identity start: {} after {} cycle, objective {f}, verdict {}, {secs:.3} s",
        rep.stop_reason.as_str(),
        rep.iterations,
        c.verdict.as_str()
    );
    solved.push(("hard example, identity".into(), p, rep));
    check(ok, detail)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let t = match oscillation_demo() {
        Ok(t) => t,
        Err(e) => return Outcome::Fail(format!("demo validation failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let worst = t
        .checks
        .iter()
        .map(|c| (c.attained - c.nuclear_norm).abs())
        .fold(0.0, f64::max);
    let constant = t.objectives.iter().all(|f| (f - 2.0).abs() <= 1e-10);
    let ok = t.checks.len() == 12
        && worst <= 1e-10
        && constant
        && t.fixed_point_mean_change <= ARGMAX_TOL
        && secs < 1.0;
    check(
        ok,
        format!(
            "4-cycle: 12 argmax steps, worst |tr(OᵀB) - ‖B‖_*| = {worst:.1e}, objectives {:?}; alpha = {} fixed point mean change {:.1e} (roundoff, tolerance {ARGMAX_TOL:.0e}); {secs:.3} s",
            t.objectives, t.fixed_point_alpha, t.fixed_point_mean_change
        ),
    )
}

fn criterion_4(solved: &mut Solved) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut certified, mut inconclusive, mut not_global) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let d1 = rng.random_range(1..=12);
        let d2 = rng.random_range(1..=12);
        let r = rng.random_range(1..=4usize.min(d1).min(d2));
        let s = gaussian(&mut rng, d1, d2);
        let dims = BlockDims::new(vec![d1, d2], r).unwrap();
        let p = Problem::from_couplings(dims, [((0, 1), s.clone())]).unwrap();
        let rep = solve(&p, &Config::default()).unwrap();
        let oracle: f64 = singular_values(&s).unwrap()[..r].iter().sum();
        worst = worst.max((rep.final_objective() - oracle).abs());
        match certify(&p, &rep.solution, &CertifyOptions::default())
            .unwrap()
            .verdict
        {
            Verdict::CertifiedGlobal => certified += 1,
            Verdict::Inconclusive => inconclusive += 1,
            Verdict::CertifiedNotGlobal => not_global += 1,
        }
        solved.push((format!("two-block instance {k}"), p, rep));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-6 && certified >= 95 && not_global == 0 && secs < 30.0;
    check(
        ok,
        format!(
            "100 two-block instances: max |f - Σσ_l| = {worst:.2e}; certified {certified}, inconclusive {inconclusive}, not global {not_global}; {secs:.2} s"
        ),
    )
}

fn criterion_5(solved: &mut Solved) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut global, mut not_global, mut inconclusive, mut wrong) = (0, 0, 0, 0);
    for k in 0..200 {
        let m = 3 + k % 3;
        let mut s = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                s.push((i, j, rng.sample::<f64, _>(StandardNormal)));
            }
        }
        let dims = BlockDims::uniform(m, 1, 1).unwrap();
        let mut p = Problem::new(dims);
        for &(i, j, v) in &s {
            p.set_coupling(i, j, DMatrix::from_element(1, 1, v))
                .unwrap();
        }
        let best = (0..1u32 << m)
            .map(|mask| {
                let x = |t: usize| if mask >> t & 1 == 1 { -1.0 } else { 1.0 };
                s.iter().map(|&(i, j, v)| v * x(i) * x(j)).sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let rep = solve(&p, &Config::default()).unwrap();
        let f = rep.final_objective();
        match certify(&p, &rep.solution, &CertifyOptions::default())
            .unwrap()
            .verdict
        {
            Verdict::CertifiedGlobal => {
                global += 1;
                if f < best - 1e-9 {
                    wrong += 1;
                }
            }
            Verdict::CertifiedNotGlobal => {
                not_global += 1;
                if best <= f {
                    wrong += 1;
                }
            }
            Verdict::Inconclusive => inconclusive += 1,
        }
        solved.push((format!("sign problem {k}"), p, rep));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        wrong == 0 && secs < 10.0,
        format!(
            "200 sign problems: certified global {global}, certified not global {not_global}, inconclusive {inconclusive}; contradicted by enumeration {wrong}; {secs:.2} s"
        ),
    )
}

fn criterion_6(solved: &Solved) -> Outcome {
    let (mut solves, mut cycles, mut bad) = (0, 0, Vec::new());
    for (name, _, rep) in solved {
        let Alpha::Finite(alpha) = rep.alpha else {
            continue;
        };
        solves += 1;
        for k in 1..rep.objective_trace.len() {
            cycles += 1;
            let (prev, cur) = (rep.objective_trace[k - 1], rep.objective_trace[k]);
            let monotone = cur >= prev - 1e-12 * prev.abs().max(1.0);
            let descent = rep.step_sq_trace[k - 1] / (2.0 * alpha) <= cur - prev + 1e-10;
            if !(monotone && descent) {
                bad.push(format!("{name} cycle {k}"));
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{solves} finite-alpha solves, {cycles} cycles audited, violations {}",
            if bad.is_empty() {
                "none".to_string()
            } else {
                bad.join(", ")
            }
        ),
    )
}

fn criterion_7(solved: &Solved) -> Outcome {
    let mut bad = Vec::new();
    for (name, p, rep) in solved {
        let bound = dual_upper_bound(p).unwrap();
        if bound < rep.final_objective() - 1e-8 {
            bad.push(name.clone());
        }
    }
    let hard = dual_upper_bound(&hard_example::<f64>(3, 2).unwrap()).unwrap();
    let ok = bad.is_empty() && (hard - 3.0).abs() <= 1e-10;
    check(
        ok,
        format!(
            "dual bound >= objective on {} instances (violations: {}); hard example bound {hard}",
            solved.len(),
            bad.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let grid = ExperimentGrid::default();
    let results = run_grid(&grid).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs < 300.0;
    let mut cells = Vec::new();
    for c in &results {
        let frac = c.certified_fraction();
        let cell_ok = if c.sigma == 0.1 {
            frac == 1.0
        } else {
            frac <= 0.6
        } && c.not_global_converged == 0;
        ok &= cell_ok;
        cells.push(format!(
            "d={} σ={} {}: {:.2}{}",
            c.d,
            c.sigma,
            c.init,
            frac,
            if cell_ok { "" } else { " (out of band)" }
        ));
    }
    let ng: usize = results.iter().map(|c| c.not_global_converged).sum();
    check(
        ok,
        format!(
            "certified fractions [{}]; not-global at converged points {ng}; {secs:.1} s",
            cells.join("; ")
        ),
    )
}

fn criterion_9() -> Outcome {
    Outcome::Skip(
        "Port Wine regression: the data table is not available in the source text, so it cannot be transcribed".into(),
    )
}

fn run_cli(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_otsm"))
        .args(args)
        .output()
        .expect("otsm binary runs");
    (o.status.code(), o.stdout)
}

fn criterion_10(dir: &Path) -> Outcome {
    let input = dir.join("hard.json");
    let doc = ProblemFile::from_problem(&hard_example(3, 2).unwrap());
    std::fs::write(&input, serde_json::to_vec(&doc).unwrap()).unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("report{k}.json"));
        let sol = dir.join(format!("solution{k}.json"));
        run_cli(&[
            "solve",
            "--input",
            input.to_str().unwrap(),
            "--certify",
            "--trace",
            "--out",
            out.to_str().unwrap(),
            "--solution-out",
            sol.to_str().unwrap(),
        ]);
        reports.push((std::fs::read(&out).unwrap(), std::fs::read(&sol).unwrap()));
    }
    let solve_same = reports[0] == reports[1];
    let demo_a = run_cli(&["demo-oscillation"]);
    let demo_b = run_cli(&["demo-oscillation"]);
    let demo_same = demo_a == demo_b && demo_a.0 == Some(0);
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("bench{k}.csv"));
        let (code, _) = run_cli(&["bench", "--seed", "1", "--out", out.to_str().unwrap()]);
        csvs.push((code, std::fs::read(&out).unwrap_or_default()));
    }
    let library_csv = results_to_csv(&run_grid(&ExperimentGrid::default()).unwrap()).unwrap();
    let csv_same = csvs[0] == csvs[1] && csvs[0].0 == Some(0) && csvs[0].1 == library_csv;
    check(
        solve_same && demo_same && csv_same,
        format!(
            "solve report and solution bytes identical: {solve_same}; demo output identical: {demo_same}; bench CSV identical across runs and to the library grid: {csv_same}"
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut solved = Solved::new();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1", criterion_1(&mut solved)),
        ("2", criterion_2(&mut solved)),
        ("3", criterion_3()),
        ("4", criterion_4(&mut solved)),
        ("5", criterion_5(&mut solved)),
        ("6", criterion_6(&solved)),
        ("7", criterion_7(&solved)),
        ("8", criterion_8()),
        ("9", criterion_9()),
        ("10", criterion_10(dir.path())),
    ];
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    println!("acceptance criteria");
    for (id, outcome) in &criteria {
        match outcome {
            Outcome::Pass(d) => {
                pass += 1;
                println!("PASS {id:>2}  {d}");
            }
            Outcome::Fail(d) => {
                fail += 1;
                println!("FAIL {id:>2}  {d}");
            }
            Outcome::Skip(d) => {
                skip += 1;
                println!("SKIP {id:>2}  {d}");
            }
        }
    }
    println!("{pass} passed, {fail} failed, {skip} skipped");
    if fail > 0 {
        std::process::exit(1);
    }
}
