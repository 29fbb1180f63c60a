//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use medcal::bk::{edge_ratios, m2, BkSolver, DigitalBounds, EntropyProblem};
use medcal::langevin::{
    inv_bergstrom, inv_exact, langevin, langevin_prime, ExactInverse, InverseMethod,
};
use medcal::med::{build_density, build_density_with_digitals, PiecewiseExpDensity};
use medcal::partition::StrikeGrid;
use medcal_testkit::{diff, maxent, optimize};
use rand::Rng;

const EXACT: ExactInverse = ExactInverse {
    tol: 1e-15,
    max_iter: 100,
};

/// Gap tolerance used for the fixed-point and oracle criteria.
const TIGHT_TOL: f64 = 1e-16;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("bergstrom-error-bound", bergstrom_error_bound),
        ("langevin-inequality", langevin_inequality),
        ("sharpened-constant", sharpened_constant),
        ("inner-round-trip", inner_round_trip),
        ("entropy-vs-quadrature", entropy_vs_quadrature),
        ("gradient-check", gradient_check),
        ("tridiagonality", tridiagonality),
        ("bk-fixed-point", bk_fixed_point),
        ("one-strike-oracle", one_strike_oracle),
        ("certificate-soundness", certificate_soundness),
        ("maxent-oracle", maxent_oracle),
        ("cli-determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "[{}] {:02} {name}: {} ({:.2}s)",
            if result.pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn bergstrom_error_bound() -> Outcome {
    let n = 100_000;
    let (mut worst, mut at) = (0.0f64, 0.0);
    for k in 0..n {
        let y = -0.999 + 1.998 * k as f64 / (n - 1) as f64;
        let exact = inv_exact(y, 1e-15, 100).unwrap();
        let err = ((inv_bergstrom(y).unwrap() - exact) / exact).abs();
        if err > worst {
            worst = err;
            at = y;
        }
    }
    outcome(
        worst <= 6.4e-4,
        format!("max relative error {worst:.4e} at y = {at:.5} (bound 6.4e-4)"),
    )
}

fn langevin_inequality() -> Outcome {
    let gap = |x: f64| {
        let l = langevin(x).unwrap();
        (1.0 + l) * (1.0 + l) - langevin_prime(x).unwrap()
    };
    let wide = (0..100_000).map(|k| -50.0 + 100.0 * k as f64 / 99_999.0);
    let near = (0..1000).map(|k| -1e-3 + 2e-3 * k as f64 / 999.0);
    let (mut worst, mut at) = (f64::INFINITY, 0.0);
    for x in wide.chain(near) {
        let g = gap(x);
        if g < worst {
            worst = g;
            at = x;
        }
    }
    outcome(
        worst >= -1e-14,
        format!("min of (1+L)^2 - L' = {worst:.3e} at x = {at:.3} over 101000 points"),
    )
}

fn random_interior(
    rng: &mut rand_chacha::ChaCha8Rng,
    b: &DigitalBounds,
    lo: f64,
    hi: f64,
) -> Vec<f64> {
    (0..b.n())
        .map(|j| b.lower()[j] + rng.gen_range(lo..hi) * b.width(j))
        .collect()
}

fn sharpened_constant() -> Outcome {
    let mut r = rng(3);
    let inv = InverseMethod::default();
    let (mut evaluated, mut min_m2, mut min_ratio, mut tail_dev) =
        (0, f64::INFINITY, f64::INFINITY, 0.0f64);
    for _ in 0..1200 {
        let n = r.gen_range(1..=20);
        let q = calls_only(&random_density(&mut r, n));
        let b = DigitalBounds::from_quotes(&q).unwrap();
        let d = random_interior(&mut r, &b, 0.01, 0.99);
        let Ok(density) = build_density_with_digitals(&q, &d, &inv) else {
            continue;
        };
        evaluated += 1;
        min_m2 = min_m2.min(m2(&density));
        let (below, above) = edge_ratios(&density);
        min_ratio = below.iter().chain(&above).fold(min_ratio, |m, &x| m.min(x));
        tail_dev = tail_dev.max((below[n - 1] - 1.0).abs());
    }
    outcome(
        evaluated >= 1000 && min_m2 >= 0.5 - 1e-12 && min_ratio >= 1.0 - 1e-12 && tail_dev <= 1e-12,
        format!(
            "{evaluated} iterates: min m2 = {min_m2:.6}, min edge ratio = {min_ratio:.6}, last-bucket ratio deviation {tail_dev:.1e}"
        ),
    )
}

fn inner_round_trip() -> Outcome {
    let mut r = rng(4);
    let inv = InverseMethod::default();
    let (mut worst, mut worst_mass) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = r.gen_range(1..=50);
        let q = random_density(&mut r, n).implied_quotes();
        assert!(q.validate().is_ok());
        let d = build_density(&q, &inv).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        worst = worst.max(rel(d.forward(), q.forward()));
        for (a, b) in d.calls().iter().zip(q.calls()) {
            worst = worst.max(rel(*a, *b));
        }
        for (a, b) in d.digitals().iter().zip(q.digitals().unwrap()) {
            worst = worst.max(rel(*a, *b));
        }
        worst_mass = worst_mass.max((d.total_mass() - 1.0).abs());
    }
    outcome(
        worst <= 1e-8 && worst_mass <= 1e-10,
        format!("100 quote sets: max relative repricing error {worst:.2e}, max |mass - 1| {worst_mass:.2e}"),
    )
}

fn entropy_vs_quadrature() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = r.gen_range(1..=12);
        let d = random_density(&mut r, n);
        worst = worst.max((d.entropy() - quadrature_entropy(&d)).abs());
    }
    outcome(
        worst <= 1e-7,
        format!("20 densities: max |closed form - quadrature| {worst:.2e}"),
    )
}

fn gradient_check() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = r.gen_range(1..=10);
        let q = calls_only(&random_density(&mut r, n));
        let problem = EntropyProblem::new(&q, &EXACT).unwrap();
        let d = random_interior(&mut r, problem.bounds(), 0.2, 0.8);
        let g = problem.gradient(&d).unwrap();
        let fd = diff::gradient(|x| problem.entropy(x).unwrap(), &d, 1e-6);
        let scale = max_abs(&g).max(1e-12);
        for (a, b) in g.iter().zip(&fd) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    outcome(
        worst <= 1e-5,
        format!("20 points: max scaled deviation {worst:.2e}"),
    )
}

fn tridiagonality() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for n in 2..=6 {
        let q = calls_only(&random_density(&mut r, n));
        let problem = EntropyProblem::new(&q, &EXACT).unwrap();
        let d = random_interior(&mut r, problem.bounds(), 0.2, 0.8);
        let dense = diff::jacobian(|x| problem.gradient(x).unwrap(), &d, 1e-7);
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 {
                    worst = worst.max(dense[i][j].abs());
                }
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("n = 2..6: max off-tridiagonal entry {worst:.2e}"),
    )
}

fn fixed_point_instances() -> Vec<PiecewiseExpDensity> {
    let mut r = rng(8);
    [1, 2, 5, 10, 20, 30]
        .iter()
        .map(|&n| market_like_density(&mut r, n, 0.3))
        .collect()
}

fn bk_fixed_point() -> Outcome {
    let (mut d_err, mut jump, mut iters) = (0.0f64, 0.0f64, 0);
    for truth in fixed_point_instances() {
        let sol = BkSolver::new()
            .tol(TIGHT_TOL)
            .solve(&calls_only(&truth))
            .unwrap();
        for (a, b) in sol.digitals.iter().zip(truth.digitals()) {
            d_err = d_err.max((a - b).abs());
        }
        jump = jump.max(max_abs(&sol.density.log_jumps()));
        iters = iters.max(sol.trace.steps());
    }
    outcome(
        d_err <= 1e-7 && jump <= 1e-6 && iters <= 50,
        format!("n up to 30: max digital error {d_err:.2e}, max log-jump {jump:.2e}, max {iters} iterations"),
    )
}

fn one_strike_oracle() -> Outcome {
    // Unit strike: digitals and curvature are scale-free, while rounding in
    // H grows with |H| = |H_unit + ln(scale)|, which limits golden section.
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p0 = r.gen_range(0.1..0.9);
        let truth = PiecewiseExpDensity::from_tilts(
            StrikeGrid::new(vec![1.0]).unwrap(),
            vec![p0, 1.0 - p0],
            vec![r.gen_range(-6.0..6.0), -1.0 / r.gen_range(0.1..1.0)],
        )
        .unwrap();
        let q = calls_only(&truth);
        let sol = BkSolver::new().tol(TIGHT_TOL).solve(&q).unwrap();
        let problem = EntropyProblem::new(&q, &EXACT).unwrap();
        let b = problem.bounds();
        let eps = 1e-9 * b.width(0);
        let best = optimize::golden_section_max(
            |x| problem.entropy(&[x]).unwrap(),
            b.lower()[0] + eps,
            b.upper()[0] - eps,
            1e-12,
        );
        worst = worst.max((sol.digitals[0] - best).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("5 unit-strike sets: max |solver - golden section| {worst:.2e}"),
    )
}

fn certificate_soundness() -> Outcome {
    let (mut checked, mut violations) = (0, Vec::new());
    let (mut gap_ratio, mut dist_ratio, mut l1_ratio) = (0.0f64, 0.0f64, 0.0f64);
    let mut r = rng(10);
    let inv = InverseMethod::default();
    for truth in fixed_point_instances().into_iter().take(4) {
        let q = calls_only(&truth);
        let h_star = truth.entropy();
        let d_star = truth.digitals();
        let bounds = DigitalBounds::from_quotes(&q).unwrap();
        let solver = BkSolver::new().tol(TIGHT_TOL);
        let mut traces = vec![solver.solve(&q).unwrap().trace];
        for _ in 0..3 {
            let start = random_interior(&mut r, &bounds, 0.05, 0.95);
            traces.push(solver.solve_from(&q, start).unwrap().trace);
        }
        for (k, rec) in traces.iter().flat_map(|t| t.records.iter()).enumerate() {
            let c = &rec.certificate;
            let here = build_density_with_digitals(&q, &rec.digitals, &inv).unwrap();
            let gap = h_star - rec.entropy;
            let dist = norm(
                &rec.digitals
                    .iter()
                    .zip(&d_star)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            let l1 = l1_distance(&truth, &here);
            // rounding allowances on the true quantities
            let ok = gap <= c.entropy_gap_bound + 1e-13
                && dist <= c.digital_dist_bound + 1e-12
                && l1 <= c.l1_bound + 1e-9;
            if !ok {
                violations.push(format!("n={} iterate {k}", truth.n()));
            }
            if c.grad_norm > 1e-6 {
                gap_ratio = gap_ratio.max(gap / c.entropy_gap_bound);
                dist_ratio = dist_ratio.max(dist / c.digital_dist_bound);
                l1_ratio = l1_ratio.max(l1 / c.l1_bound);
            }
            checked += 1;
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} iterates, {} violations{}; worst true/bound ratios: gap {gap_ratio:.3}, distance {dist_ratio:.3}, L1 {l1_ratio:.3}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

fn maxent_oracle() -> Outcome {
    let cases = [(0.6, 0.8, -2.0), (0.3, -1.5, -1.5), (0.75, 2.5, -3.0)];
    let (mut worst_h, mut worst_f) = (0.0f64, 0.0f64);
    let strike = 2.0;
    for (p0, z, tail_beta) in cases {
        let grid = StrikeGrid::new(vec![strike]).unwrap();
        let truth = PiecewiseExpDensity::from_tilts(
            grid,
            vec![p0, 1.0 - p0],
            vec![z / (0.5 * strike), tail_beta],
        )
        .unwrap();
        let q = truth.implied_quotes();
        let d = build_density(&q, &EXACT).unwrap();

        let m = 2000;
        let h = 10.0 / m as f64;
        let nodes: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * h).collect();
        let weights = vec![h; m];
        let f1 = |x: f64| x;
        let f2 = move |x: f64| (x - strike).max(0.0);
        let f3 = move |x: f64| if x > strike { 1.0 } else { 0.0 };
        let features: [&dyn Fn(f64) -> f64; 3] = [&f1, &f2, &f3];
        let targets = [q.forward(), q.calls()[0], q.digitals().unwrap()[0]];
        let sol = maxent::solve(&nodes, &weights, &features, &targets, 1e-13);
        worst_h = worst_h.max((sol.entropy - d.entropy()).abs());
        for (x, f) in nodes.iter().zip(&sol.density) {
            if (x - strike).abs() > 0.05 && *x < 8.0 {
                let exact = d.pdf(*x);
                worst_f = worst_f.max(((f - exact) / exact).abs());
            }
        }
    }
    outcome(
        worst_h <= 1e-3 && worst_f <= 1e-2,
        format!("3 one-strike sets on 2000 nodes: max entropy difference {worst_h:.2e}, max pointwise relative difference {worst_f:.2e}"),
    )
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_medcal"))
        .args(args)
        .env_remove("MEDCAL_OUT_DIR")
        .output()
        .expect("medcal binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn quote_json(d: &PiecewiseExpDensity, with_digitals: bool) -> String {
    let q = d.implied_quotes();
    let mut v = serde_json::json!({
        "forward": q.forward(),
        "strikes": q.grid().strikes(),
        "calls": q.calls(),
    });
    if with_digitals {
        v["digitals"] = serde_json::json!(q.digitals().unwrap());
    }
    v.to_string()
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut r = rng(12);
    let med_input = root.join("med.json");
    std::fs::write(&med_input, quote_json(&random_density(&mut r, 6), true)).unwrap();
    let bk_input = root.join("bk.json");
    std::fs::write(
        &bk_input,
        quote_json(&market_like_density(&mut r, 8, 0.2), false),
    )
    .unwrap();

    let mut problems = Vec::new();
    for (cmd, input) in [("med", &med_input), ("bk", &bk_input)] {
        let mut runs = Vec::new();
        for k in 0..2 {
            let out = root.join(format!("{cmd}-{k}"));
            let o = run_cli(&[cmd, input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            if !o.status.success() {
                problems.push(format!("{cmd} exited with {:?}", o.status.code()));
            }
            runs.push(read_dir_sorted(&out));
        }
        if runs[0] != runs[1] || runs[0].is_empty() {
            problems.push(format!("{cmd} exports differ between runs"));
        }
    }

    let table = run_cli(&["langevin", "--from", "-8", "--to", "8", "--points", "161"]);
    let text = String::from_utf8(table.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let bounded = values.iter().all(|v| v.abs() < 1.0);
    if values.len() != 161 || !monotone || !bounded {
        problems.push(format!(
            "langevin table: {} rows, monotone {monotone}, bounded {bounded}",
            values.len()
        ));
    }
    let origin = run_cli(&["langevin", "--from", "0", "--to", "0", "--points", "1"]);
    let origin = String::from_utf8(origin.stdout).unwrap();
    let row: Vec<f64> = origin
        .lines()
        .nth(1)
        .unwrap_or("")
        .split(',')
        .filter_map(|c| c.parse().ok())
        .collect();
    if row.len() != 3 || row[0] != 0.0 || row[1] != 0.0 || (row[2] - 1.0 / 3.0).abs() > 1e-8 {
        problems.push(format!("origin row {row:?}"));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "med and bk exports byte-identical across runs; 161-row table monotone in (-1, 1); origin row (0, 0, 1/3)".to_string()
        } else {
            problems.join("; ")
        },
    )
}
