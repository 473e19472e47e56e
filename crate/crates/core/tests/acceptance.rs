//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! when any criterion fails. Runs as a plain binary (`harness = false`).

use std::time::{Duration, Instant};

use anisolab::assembly::{assemble_system, mass_matrix};
use anisolab::coefficients::CoefficientBlocks;
use anisolab::grid::{Interval, TensorGrid};
use anisolab::nonlinear_ops::{
    operator_constants, sample_commutation, sample_growth, sample_lipschitz, Kernel, Nonlinearity, OperatorSpec,
};
use anisolab::solver::{picard_full, picard_limit, SolverConfig};
use anisolab::studies::sweep::BOUND_SLACK;
use anisolab::studies::{
    epsilon_sweep, interior_scan, rate_fit, resolvent, resolvent_study, truncation, truncation_study, Problem,
    ResolventSource,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

// ---------------------------------------------------------------------------
// 1. independent element integration

/// Gauss-Legendre rule with `n` points on (-1, 1), by Newton on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = -(std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Dense `s∫A_ε∇φ_a·∇φ_b + β∫φ_aφ_b` over interior nodes, element by element.
fn dense_oracle(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    eps: f64,
    (s_factor, beta): (f64, f64),
    rule: &[(f64, f64)],
) -> Vec<Vec<f64>> {
    let n = grid.len();
    let mut a = vec![vec![0.0; n]; n];
    let (h1, h2) = (grid.h1(), grid.h2());
    // local node (a, b) ∈ {0,1}²: basis ((1−a) + (2a−1)s)((1−b) + (2b−1)t)
    let corners = [(0usize, 0usize), (1, 0), (0, 1), (1, 1)];
    for je in 0..=grid.n2() {
        for ie in 0..=grid.n1() {
            let idx: Vec<Option<usize>> = corners
                .iter()
                .map(|&(di, dj)| grid.interior_index(ie + di, je + dj))
                .collect();
            for &(gs, ws) in rule {
                for &(gt, wt) in rule {
                    let (s, t) = (0.5 * (gs + 1.0), 0.5 * (gt + 1.0));
                    let w = 0.25 * ws * wt * h1 * h2;
                    let x1 = grid.x1(ie) + s * h1;
                    let x2 = grid.x2(je) + t * h2;
                    let (xh1, xh2) = grid.normalized(x1, x2);
                    let m = blocks.matrix_at(xh1, xh2);
                    let am = [[eps * eps * m[0][0], eps * m[0][1]], [eps * m[1][0], m[1][1]]];
                    let basis = |&(ca, cb): &(usize, usize)| {
                        let fs = if ca == 1 { s } else { 1.0 - s };
                        let ft = if cb == 1 { t } else { 1.0 - t };
                        let ds = if ca == 1 { 1.0 } else { -1.0 } / h1;
                        let dt = if cb == 1 { 1.0 } else { -1.0 } / h2;
                        (fs * ft, [ds * ft, fs * dt])
                    };
                    for (p, cp) in corners.iter().enumerate() {
                        let Some(r) = idx[p] else { continue };
                        let (vp, gp) = basis(cp);
                        for (q, cq) in corners.iter().enumerate() {
                            let Some(c) = idx[q] else { continue };
                            let (vq, gq) = basis(cq);
                            let stiff = (am[0][0] * gq[0] + am[0][1] * gq[1]) * gp[0]
                                + (am[1][0] * gq[0] + am[1][1] * gq[1]) * gp[1];
                            a[r][c] += w * (s_factor * stiff + beta * vp * vq);
                        }
                    }
                }
            }
        }
    }
    a
}

/// Largest `|a − b|` relative to `max(|b_ij|, max|b|)` over all entries.
fn worst_relative(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs() / y.abs().max(scale));
        }
    }
    worst
}

fn criterion_1() -> Verdict {
    let rule = gauss_legendre(16);
    let domains = [
        (Interval::unit(), Interval::unit()),
        (Interval::new(-0.5, 1.5), Interval::new(0.0, 0.75)),
    ];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for key in ["identity", "spd", "variable"] {
        let blocks = CoefficientBlocks::catalog(key).unwrap();
        for &(o1, o2) in &domains {
            for n1 in 1..=16 {
                for n2 in 1..=16 / n1 {
                    let grid = TensorGrid::new(o1, o2, n1, n2).unwrap();
                    for (eps, beta) in [(1.0, 2.0), (0.3, 0.0), (1.0 / 64.0, 5.0)] {
                        let sys = assemble_system(&grid, &blocks, eps, beta).unwrap();
                        let oracle = dense_oracle(&grid, &blocks, eps, (1.0, beta), &rule);
                        worst = worst.max(worst_relative(&sys.matrix.to_dense(), &oracle));
                        cases += 1;
                    }
                    let mass = mass_matrix(&grid);
                    let m = dense_oracle(&grid, &blocks, 1.0, (0.0, 1.0), &rule);
                    worst = worst.max(worst_relative(&mass.matrix.to_dense(), &m));
                    cases += 1;
                }
            }
        }
    }
    verdict(
        worst <= 1e-12,
        format!("{cases} matrices against 16-point Gauss-Legendre element integration, worst relative deviation {worst:.2e} (limit 1e-12)"),
    )
}

// ---------------------------------------------------------------------------
// 2-4. default sweep

fn sweep_criteria() -> [Verdict; 3] {
    let problem = Problem::default_sweep();
    let start = Instant::now();
    let report = epsilon_sweep(&problem, 1).expect("limit problem solves");
    let elapsed = start.elapsed();
    let slack = 1.0 + BOUND_SLACK;
    let all_ok = report.all_ok();

    let lr_worst = report.rows.iter().map(|r| r.lr_ratio).fold(0.0, f64::max);
    let c2 = verdict(
        all_ok && report.rows.iter().all(|r| r.lr_ratio <= slack),
        format!(
            "{} rows, max ‖u_ε‖_L4 / bound = {lr_worst:.4} (bound M/(β−β_min) = {:.4})",
            report.rows.len(),
            report.bounds.lr
        ),
    );

    let violations = report
        .rows
        .iter()
        .filter(|r| !(r.eps_gradx1_ratio <= slack && r.gradx2_ratio <= slack && r.l2_ratio <= slack))
        .count();
    let c3 = verdict(
        all_ok && violations == 0,
        format!(
            "{violations} violations; worst ratios ε·GradX1 {:.4}, GradX2 {:.4}, L2 {:.4} (C/√λ = {:.4})",
            report.rows.iter().map(|r| r.eps_gradx1_ratio).fold(0.0, f64::max),
            report.rows.iter().map(|r| r.gradx2_ratio).fold(0.0, f64::max),
            report.rows.iter().map(|r| r.l2_ratio).fold(0.0, f64::max),
            report.bounds.grad
        ),
    );

    let checks = report.checks();
    let get = |name: &str| checks.iter().find(|c| c.name == name).expect("named check");
    let names = ["l2_error_monotone", "gradx2_error_monotone", "l2_error_reduction", "gradx2_error_reduction"];
    let fast = elapsed < Duration::from_secs(300);
    let c4 = verdict(
        all_ok && names.iter().all(|n| get(n).pass) && fast,
        format!(
            "{}x{} grid; worst step ratio L2 {:.3}, GradX2 {:.3} (≤ 1.05); ε=1/64 vs ε=1: L2 {:.2e}, GradX2 {:.2e} (≤ 0.02); {:.1} s single-threaded",
            problem.grid.n1(),
            problem.grid.n2(),
            get(names[0]).measured,
            get(names[1]).measured,
            get(names[2]).measured,
            get(names[3]).measured,
            elapsed.as_secs_f64()
        ),
    );
    [c2, c3, c4]
}

// ---------------------------------------------------------------------------
// 5-6. boundary-layer problem

fn layer_criteria() -> [Verdict; 2] {
    let problem = Problem::rate_regime();
    let c = problem.constants().unwrap();
    let regime = problem.blocks == CoefficientBlocks::identity() && problem.solver.beta > c.k.max(c.beta_min);
    let report = epsilon_sweep(&problem, threads()).expect("limit problem solves");
    let fit = rate_fit(&report, 2);
    let c5 = match &fit {
        Ok(f) => verdict(
            regime && report.all_ok() && f.slope_l2 >= 0.9,
            format!(
                "A = I, β = {} > max(K, β₀) = {}; band L2 slope {:.3} over ε = 1/4..1/64 (≥ 0.9); GradX2 {:.3}, GradX1 {:.3}, global L2 {:.3}",
                problem.solver.beta,
                c.k.max(c.beta_min),
                f.slope_l2,
                f.slope_gradx2,
                f.slope_gradx1,
                f.global_slope_l2
            ),
        ),
        Err(e) => verdict(false, format!("rate fit failed: {e}")),
    };
    let scan = interior_scan(&report);
    let c6 = verdict(
        report.all_ok() && scan.pass && scan.global_nonuniform,
        format!(
            "interior H1 spread {:.3} (≤ 5); global GradX1 spread {:.3} (> 5)",
            scan.interior_ratio, scan.global_ratio
        ),
    );
    [c5, c6]
}

// ---------------------------------------------------------------------------
// 7. truncation

fn criterion_7() -> Verdict {
    let eps = truncation::default_epsilons();
    let ns = truncation::default_ns();
    let study = match truncation_study(&Problem::default_sweep(), &eps, &ns, threads()) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("default truncation study failed: {e}")),
    };
    let layered = truncation_study(&Problem::rate_regime(), &eps, &ns, threads())
        .map(|s| format!("{:.2}", s.variation))
        .unwrap_or_else(|e| format!("error ({e})"));
    let sups: Vec<String> = study.sup_ratio.iter().map(|v| format!("{v:.2e}")).collect();
    verdict(
        study.pass(),
        format!(
            "default problem: sup_ε R_n = [{}], spread {:.2} (≤ 10), numerators decrease: {}; boundary-layer problem spread {layered} (info)",
            sups.join(", "),
            study.variation,
            study.numerators_decrease
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. resolvent

fn criterion_8() -> Verdict {
    let grid = TensorGrid::unit_square(128).unwrap();
    let ns = resolvent::default_ns();
    let mut pass = true;
    let mut parts = Vec::new();
    for source in [ResolventSource::Eigen, ResolventSource::Pyramid] {
        match resolvent_study(&grid, source, &ns) {
            Ok(s) => {
                pass &= s.envelope_ok;
                if source == ResolventSource::Eigen {
                    pass &= s.decay_exponent >= resolvent::EIGEN_DECAY;
                }
                parts.push(format!(
                    "{}: max Q/Q4 {:.4}, decay {:.3}",
                    source.name(),
                    s.q_max / s.q_first,
                    s.decay_exponent
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", source.name()));
            }
        }
    }
    verdict(pass, format!("{} (envelope ≤ 1.05, eigen decay ≥ 0.95)", parts.join("; ")))
}

// ---------------------------------------------------------------------------
// 9. Picard

fn criterion_9() -> Verdict {
    let p = Problem {
        grid: TensorGrid::unit_square(64).unwrap(),
        ..Problem::default_sweep()
    };
    let k = p.constants().unwrap().k;
    let cfg = SolverConfig::default().with_beta(2.0 * k);
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut runs = Vec::new();
    for eps in [1.0, 1.0 / 8.0, 1.0 / 64.0] {
        runs.push(picard_full(&p.grid, &p.blocks, &p.spec, &cfg.with_epsilon(eps)));
    }
    runs.push(picard_limit(&p.grid, &p.blocks, &p.spec, &cfg));
    for r in &runs {
        match r {
            Ok((_, h)) => worst = h.change_ratios().iter().skip(1).fold(worst, |m, &v| m.max(v)),
            Err(_) => pass = false,
        }
    }
    pass &= worst <= 0.55;

    let constant = OperatorSpec::constant(1.0);
    let iterations = picard_full(&p.grid, &p.blocks, &constant, &cfg.with_epsilon(0.25))
        .map(|(_, h)| h.iterations())
        .unwrap_or(0);
    pass &= iterations == 2;
    verdict(
        pass,
        format!("β = 2K = {}: worst change ratio after iteration 1 is {worst:.4} (≤ 0.55); Constant source: {iterations} iterations (= 2)", 2.0 * k),
    )
}

// ---------------------------------------------------------------------------
// 10. operator properties

fn criterion_10() -> Verdict {
    let grid = TensorGrid::unit_square(32).unwrap();
    let a = Nonlinearity::Tanh {
        scale: 1.0,
        shift: 1.0,
    };
    let p = Nonlinearity::Power {
        scale: 1.0,
        q: 0.5,
        shift: 0.5,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    let mut seed = 0u64;
    let mut rng = || {
        seed += 1;
        ChaCha8Rng::seed_from_u64(seed)
    };
    for (name, spec) in [
        ("inner", OperatorSpec::kernel_inner(Kernel::Separable, a)),
        ("outer", OperatorSpec::kernel_outer(Kernel::Separable, p)),
        ("projector", OperatorSpec::projector(a)),
    ] {
        let lip = sample_lipschitz(&spec, &grid, 200, &mut rng()).unwrap();
        let gro = sample_growth(&spec, &grid, 200, &mut rng()).unwrap();
        pass &= lip.pass() && gro.pass();
        parts.push(format!(
            "{name}: Lipschitz {}/200 violations, growth {}/200",
            lip.violations, gro.violations
        ));
    }
    for (name, spec) in [
        ("inner h=1", OperatorSpec::kernel_inner(Kernel::One, a)),
        ("outer h=cos", OperatorSpec::kernel_outer(Kernel::Cosine, p)),
    ] {
        operator_constants(&spec, &grid).unwrap();
        let c = sample_commutation(&spec, &grid, 200, &mut rng()).unwrap();
        pass &= c.pass();
        parts.push(format!(
            "commutation {name}: {}/200 violations, worst lhs/rhs {:.3}",
            c.violations, c.worst_ratio
        ));
    }
    verdict(pass, parts.join("; "))
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict, f64)> = Vec::new();
    let timed = |f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        (v, t.elapsed().as_secs_f64())
    };

    let (v, s) = timed(&|| {
        let t = Instant::now();
        let mut v = criterion_1();
        if t.elapsed() >= Duration::from_secs(10) {
            v.pass = false;
            v.detail.push_str("; exceeded 10 s");
        }
        v
    });
    results.push((1, "assembly oracle", v, s));

    let t = Instant::now();
    let [c2, c3, c4] = sweep_criteria();
    let s = t.elapsed().as_secs_f64();
    results.push((2, "L^r bound", c2, s));
    results.push((3, "a-priori bounds", c3, s));
    results.push((4, "convergence to the limit", c4, s));

    let t = Instant::now();
    let [c5, c6] = layer_criteria();
    let s = t.elapsed().as_secs_f64();
    results.push((5, "convergence rate", c5, s));
    results.push((6, "interior estimates", c6, s));

    let (v, s) = timed(&criterion_7);
    results.push((7, "truncation uniformity", v, s));
    let (v, s) = timed(&criterion_8);
    results.push((8, "resolvent envelope", v, s));
    let (v, s) = timed(&criterion_9);
    results.push((9, "Picard contraction", v, s));
    let (v, s) = timed(&criterion_10);
    results.push((10, "operator properties", v, s));

    let mut failed = 0;
    for (k, name, v, secs) in &results {
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {k} ({name}): {} [{secs:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
