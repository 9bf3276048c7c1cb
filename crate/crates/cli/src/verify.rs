use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use saddlescape::dynamics::{
    ahisd_step, estimate_rate, hisd_step, initial_frame, resolve_zeta, run, select_parameters, step, theta_bound,
    SolverState,
};
use saddlescape::eigen::{
    dimer_hv, eigensol_dense, eigensol_lobpcg, eigensol_sirqit, gram_schmidt, power_norm_estimate,
    symmetric_eigenvalues, HvOperator, LobpcgOptions, SirqitOptions,
};
use saddlescape::landscapes::{
    convex2, linear_net_loss, mb_potential, modified_mb, quadratic_landscape, rosenbrock_mod,
    sphere_point, Convex2Params, LinearNetSpec, RosenbrockModParams,
};
use saddlescape::stability::{check_linear_stability, ContinuousParams, SteadyState, DEFAULT_TOL_MARGIN};
use saddlescape::{
    finite_diff_gradient, reflect, DMatrix, DVector, EigSolverKind, EnergyLandscape, FrameInit, SolverParams,
    SpectralFrame, StepKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Gradients,
    Eigensolvers,
    Dimer,
    Stability,
    Rates,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}\t{}\t{}\t{}", self.suite, self.name, self.detail)
    }
}

fn check(suite: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        suite,
        name: name.into(),
        passed,
        detail,
    }
}

fn failed(suite: &'static str, name: impl Into<String>, err: impl fmt::Display) -> Check {
    check(suite, name, false, format!("error: {err}"))
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Gradients => gradients(),
        Suite::Eigensolvers => eigensolvers(),
        Suite::Dimer => dimer(),
        Suite::Stability => stability(),
        Suite::Rates => rates(),
        Suite::All => [gradients(), eigensolvers(), dimer(), stability(), rates()].concat(),
    }
}

const FD_H: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;
const POINTS: u64 = 20;

/// Benchmark landscapes at verification size, each with a sampler of test
/// points around its reference saddle.
fn sample_landscapes() -> Vec<(&'static str, Box<dyn EnergyLandscape>, f64)> {
    vec![
        ("mb", Box::new(mb_potential()), 0.3),
        ("mmb", Box::new(modified_mb()), 0.3),
        ("rosenbrock_i", Box::new(rosenbrock_mod(RosenbrockModParams::case_i(100)).expect("rosenbrock")), 0.5),
        ("rosenbrock_ii", Box::new(rosenbrock_mod(RosenbrockModParams::case_ii(100)).expect("rosenbrock")), 0.5),
        ("convex2", Box::new(convex2(Convex2Params::default()).expect("convex2")), 1.0),
        ("linear_nn", Box::new(linear_net_loss(LinearNetSpec::benchmark(0)).expect("linear net")), 1.0),
        ("quadratic", Box::new(quadratic_landscape(vec![-2.0, -0.5, 1.0, 3.0]).expect("quadratic")), 1.0),
    ]
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn gradients() -> Vec<Check> {
    let mut out = Vec::new();
    for (label, land, rho) in sample_landscapes() {
        let center = land.known_saddle().expect("benchmark saddle").x_star.clone();
        let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
        for seed in 0..POINTS {
            let x = sphere_point(&center, rho, seed);
            let g = land.gradient(&x);
            match finite_diff_gradient(land.as_ref(), &x, FD_H) {
                Ok(fd) => worst_g = worst_g.max(rel((&g - fd).norm(), g.norm())),
                Err(e) => {
                    out.push(failed("gradients", format!("{label}/gradient"), e));
                    continue;
                }
            }
            let v = sphere_point(&DVector::zeros(land.dim()), 1.0, 1000 + seed);
            if let Some(hv) = land.hessian_vec(&x, &v) {
                let fd = dimer_hv(land.as_ref(), &x, &v, FD_H).expect("unit direction");
                worst_h = worst_h.max(rel((&hv - fd).norm(), hv.norm()));
            }
        }
        out.push(check(
            "gradients",
            format!("{label}/gradient_vs_fd"),
            worst_g <= FD_TOL,
            format!("max_rel_err={worst_g:.3e} tol={FD_TOL:e} points={POINTS}"),
        ));
        if land.has_hessian_vec() {
            out.push(check(
                "gradients",
                format!("{label}/hessian_vec_vs_fd"),
                worst_h <= FD_TOL,
                format!("max_rel_err={worst_h:.3e} tol={FD_TOL:e} points={POINTS}"),
            ));
        }
    }
    out
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, rng);
    (&g + g.transpose()) * 0.5
}

/// Spectral norm of `U U^T - V V^T`, the sine of the largest principal angle.
pub fn subspace_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let diff = u * u.transpose() - v * v.transpose();
    symmetric_eigenvalues(&diff)
        .map(|vals| vals.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .unwrap_or(f64::INFINITY)
}

fn eigensolvers() -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let (mut inv, mut iso) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let d = rng.random_range(2..40);
        let k = rng.random_range(0..=d.min(6));
        let v = if k == 0 {
            DMatrix::zeros(d, 0)
        } else {
            gram_schmidt(&gaussian_matrix(d, k, &mut rng)).expect("full rank")
        };
        let g = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let r = reflect(&g, &v).expect("shapes");
        let rr = reflect(&r, &v).expect("shapes");
        inv = inv.max((&rr - &g).norm() / g.norm());
        iso = iso.max((r.norm() - g.norm()).abs() / g.norm());
    }
    out.push(check(
        "eigensolvers",
        "reflect/involution",
        inv <= 1e-14,
        format!("max_rel_err={inv:.3e} tol=1e-14"),
    ));
    out.push(check(
        "eigensolvers",
        "reflect/isometry",
        iso <= 1e-14,
        format!("max_rel_err={iso:.3e} tol=1e-14"),
    ));

    let (mut worst_lob, mut worst_sir) = (0.0f64, 0.0f64);
    for case in 0..10 {
        let n = 30 + 3 * case;
        let k = 1 + case % 4;
        let a = random_symmetric(n, &mut rng);
        let exact = match eigensol_dense(&a, k) {
            Ok(r) => r,
            Err(e) => {
                out.push(failed("eigensolvers", "dense", e));
                return out;
            }
        };
        let start = gram_schmidt(&gaussian_matrix(n, k, &mut rng)).expect("full rank");
        let op = HvOperator::from_matrix(&a);
        let lob = eigensol_lobpcg(&op, &start, LobpcgOptions { inner_iters: 2000, tol: 1e-14 });
        let zeta = 0.5 / power_norm_estimate(&op, 50);
        let sir = eigensol_sirqit(&op, &start, SirqitOptions { inner_iters: 100_000, zeta, tol: 1e-12 });
        match (lob, sir) {
            (Ok(l), Ok(s)) => {
                worst_lob = worst_lob.max(subspace_distance(&l.vectors, &exact.vectors));
                worst_sir = worst_sir.max(subspace_distance(&s.vectors, &exact.vectors));
            }
            (Err(e), _) | (_, Err(e)) => out.push(failed("eigensolvers", format!("case{case}"), e)),
        }
    }
    out.push(check(
        "eigensolvers",
        "lobpcg_vs_dense/subspace",
        worst_lob <= 1e-6,
        format!("max_distance={worst_lob:.3e} tol=1e-6 cases=10"),
    ));
    out.push(check(
        "eigensolvers",
        "sirqit_vs_dense/subspace",
        worst_sir <= 1e-6,
        format!("max_distance={worst_sir:.3e} tol=1e-6 cases=10"),
    ));
    out
}

/// `E(x) = 1/2 x^T A x` for a dense symmetric `A`.
struct DenseQuadratic {
    a: DMatrix<f64>,
}

impl EnergyLandscape for DenseQuadratic {
    fn name(&self) -> &str {
        "dense_quadratic"
    }
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn energy(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x
    }
}

fn dimer() -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(2..30);
        let land = DenseQuadratic {
            a: random_symmetric(n, &mut rng) * 10.0,
        };
        let x = DVector::from_fn(n, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            3.0 * z
        });
        let v = sphere_point(&DVector::zeros(n), 1.0, rng.random());
        let exact = &land.a * &v;
        for l in [1e-1, 1e-3] {
            let hv = dimer_hv(&land, &x, &v, l).expect("valid dimer");
            worst = worst.max((&hv - &exact).norm() / exact.norm());
        }
    }
    out.push(check(
        "dimer",
        "quadratic_exactness",
        worst <= 1e-9,
        format!("max_rel_err={worst:.3e} tol=1e-9 l=[1e-1,1e-3]"),
    ));

    let lands: Vec<(&str, Box<dyn EnergyLandscape>)> = vec![
        ("mb", Box::new(mb_potential())),
        ("mmb", Box::new(modified_mb())),
        ("rosenbrock_i", Box::new(rosenbrock_mod(RosenbrockModParams::case_i(20)).expect("rosenbrock"))),
    ];
    for (label, land) in lands {
        let center = land.known_saddle().expect("saddle").x_star.clone();
        let x = sphere_point(&center, 0.1, 3);
        let v = sphere_point(&DVector::zeros(land.dim()), 1.0, 4);
        let exact = land.hessian_vec(&x, &v).expect("analytic Hv");
        let err = |l: f64| (dimer_hv(land.as_ref(), &x, &v, l).expect("valid dimer") - &exact).norm();
        let ratio = err(2e-2) / err(1e-2);
        out.push(check(
            "dimer",
            format!("{label}/second_order"),
            (3.0..=5.0).contains(&ratio),
            format!("err(2l)/err(l)={ratio:.4} l=1e-2 band=[3,5]"),
        ));
    }
    out
}

/// Diagonal quadratic with distinct eigenvalues of random sign.
fn battery_quadratic(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(2..=6);
    let mut mags: Vec<f64> = Vec::with_capacity(d);
    while mags.len() < d {
        let m: f64 = rng.random_range(0.2..5.0);
        if mags.iter().all(|o| (o - m).abs() > 0.1) {
            mags.push(m);
        }
    }
    mags.into_iter()
        .map(|m| if rng.random_bool(0.5) { -m } else { m })
        .collect()
}

/// Steady state of a diagonal quadratic whose frame holds the `k` smallest
/// eigenvectors.
fn diagonal_steady_state(vals: &[f64], k: usize) -> SteadyState {
    let d = vals.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut v = DMatrix::zeros(d, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        v[(idx, col)] = 1.0;
    }
    SteadyState::new(DVector::zeros(d), v)
}

fn hypothesis_params(vals: &[f64], k: usize) -> ContinuousParams {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mu = sorted[..k].iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let alpha2 = 1.0;
    let alpha1 = if mu.is_finite() { 0.9 * 2.0 * (alpha2 * mu).sqrt() } else { 1.0 };
    ContinuousParams {
        alpha1,
        alpha2,
        zeta: 1.0,
    }
}

fn stability() -> Vec<Check> {
    let mut out = Vec::new();
    let (mut correct_ok, mut wrong_ok, mut exceptions) = (0, 0, Vec::new());
    const CASES: u64 = 50;
    for seed in 0..CASES {
        let vals = battery_quadratic(seed);
        let d = vals.len();
        let land = quadratic_landscape(vals.clone()).expect("nonzero eigenvalues");
        let k = land.known_saddle().expect("origin").index_k;
        let wrong = (k + 1 + seed as usize % d) % (d + 1);
        let cp = hypothesis_params(&vals, k);
        let good = check_linear_stability(&land, &diagonal_steady_state(&vals, k), &cp, DEFAULT_TOL_MARGIN);
        let bad = check_linear_stability(&land, &diagonal_steady_state(&vals, wrong), &cp, DEFAULT_TOL_MARGIN);
        match good {
            Ok(r) if r.stable && r.hypothesis_holds => correct_ok += 1,
            Ok(r) => exceptions.push(format!("seed {seed}: k={k} max_real={:.3e}", r.max_real)),
            Err(e) => exceptions.push(format!("seed {seed}: {e}")),
        }
        match bad {
            Ok(r) if !r.stable => wrong_ok += 1,
            Ok(r) => exceptions.push(format!("seed {seed}: wrong k={wrong} max_real={:.3e}", r.max_real)),
            Err(e) => exceptions.push(format!("seed {seed}: {e}")),
        }
    }
    out.push(check(
        "stability",
        "battery/correct_index_stable",
        correct_ok == CASES,
        format!("{correct_ok}/{CASES}"),
    ));
    out.push(check(
        "stability",
        "battery/wrong_index_unstable",
        wrong_ok == CASES,
        format!("{wrong_ok}/{CASES}{}", if exceptions.is_empty() { String::new() } else { format!(" [{}]", exceptions.join("; ")) }),
    ));

    let land = quadratic_landscape(vec![-1.0, 2.0]).expect("quadratic");
    let cp = ContinuousParams {
        alpha1: 1.0,
        alpha2: 1.0,
        zeta: 1.0,
    };
    match check_linear_stability(&land, &diagonal_steady_state(&[-1.0, 2.0], 1), &cp, DEFAULT_TOL_MARGIN) {
        Ok(r) => out.push(check(
            "stability",
            "closed_form_max_real",
            (r.max_real + 0.5).abs() <= 1e-8,
            format!("max_real={:.12} expected=-0.5", r.max_real),
        )),
        Err(e) => out.push(failed("stability", "closed_form_max_real", e)),
    }

    match rosenbrock_mod(RosenbrockModParams::case_i(50)) {
        Ok(land) => {
            let t = land.known_saddle().expect("saddle");
            let h = land.hessian(&t.x_star).expect("dense Hessian");
            let res = eigensol_dense(&h, t.index_k).and_then(|e| {
                let mu = e.values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                let cp = ContinuousParams {
                    alpha1: 2.0 * mu.sqrt(),
                    alpha2: 1.0,
                    zeta: 1.0 / h.amax(),
                };
                check_linear_stability(&land, &SteadyState::new(t.x_star.clone(), e.vectors), &cp, DEFAULT_TOL_MARGIN)
            });
            match res {
                Ok(r) => out.push(check(
                    "stability",
                    "rosenbrock_i_d50/stable",
                    r.stable,
                    format!("max_real={:.3e}", r.max_real),
                )),
                Err(e) => out.push(failed("stability", "rosenbrock_i_d50/stable", e)),
            }
        }
        Err(e) => out.push(failed("stability", "rosenbrock_i_d50/stable", e)),
    }
    out
}

/// Separable quadratic with `|lambda|` spanning `[1, kappa]` and two
/// negative directions.
fn rate_quadratic(kappa: f64) -> Vec<f64> {
    vec![-kappa, -1.0, 1.0, kappa.sqrt(), kappa]
}

/// Fitted rate of A-HiSD on [`rate_quadratic`] with the exact frame, over
/// the trailing 200 records of at most 1000 iterations. Runs stop at
/// `1e-140` so that `||x||^2` stays clear of underflow.
pub fn quadratic_rate(kappa: f64, beta: f64, gamma: f64) -> saddlescape::Result<f64> {
    let land = quadratic_landscape(rate_quadratic(kappa))?;
    let params = SolverParams {
        beta,
        gamma,
        k: 2,
        eig_solver: EigSolverKind::Dense,
        init_frame: FrameInit::Dense,
        max_iter: 1000,
        stop_tol: 1e-140,
        ..SolverParams::default()
    };
    let x0 = sphere_point(&DVector::zeros(5), 1.0, 5);
    let res = run(&land, &params, &x0, StepKind::Ahisd)?;
    let n = res.trace.len();
    let window = if n > 400 { 200 } else { n / 2 };
    Ok(estimate_rate(&res.trace, window)?.theta_hat)
}

fn rates() -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let lands: Vec<Box<dyn EnergyLandscape>> = vec![
        Box::new(mb_potential()),
        Box::new(quadratic_landscape(vec![-3.0, 0.5, 2.0]).expect("quadratic")),
        Box::new(convex2(Convex2Params { d: 10, k: 2 }).expect("convex2")),
    ];
    for land in &lands {
        let t = land.known_saddle().expect("saddle");
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let x = sphere_point(&t.x_star, 0.2, rng.random());
            let xp = sphere_point(&x, 0.05, rng.random());
            let v = gram_schmidt(&gaussian_matrix(land.dim(), t.index_k, &mut rng)).expect("full rank");
            let frame = SpectralFrame {
                rayleigh: vec![0.0; t.index_k],
                vectors: v,
            };
            let mut state = SolverState::new(land.as_ref(), x, frame, 1e-3).expect("state");
            state.x_prev = xp;
            let params = SolverParams {
                beta: 1e-3,
                gamma: 0.0,
                k: t.index_k,
                eig_solver: EigSolverKind::Dense,
                ..SolverParams::default()
            };
            let a = ahisd_step(land.as_ref(), &state, &params).expect("step");
            let h = hisd_step(land.as_ref(), &state, &params).expect("step");
            worst = worst.max((&a.x - &h.x).norm() / h.x.norm().max(1.0));
        }
    }
    out.push(check(
        "rates",
        "gamma0_reduction",
        worst <= 1e-14,
        format!("max_rel_diff={worst:.3e} tol=1e-14"),
    ));

    for (label, land, solver, beta) in stationarity_cases() {
        let name = format!("{label}/stationarity");
        match stationarity_drift(land.as_ref(), solver, beta) {
            Ok((drift, tol)) => out.push(check(
                "rates",
                name,
                drift <= tol,
                format!("max_drift={drift:.3e} tol={tol:.1e} iters={STATIONARY_STEPS}"),
            )),
            Err(e) => out.push(failed("rates", name, e)),
        }
    }

    for kappa in [4.0f64, 100.0, 496.0] {
        let eps = 0.5 / (kappa.sqrt() + 1.0);
        let name = format!("rate_bound/kappa{kappa}");
        let res = select_parameters(1.0, kappa, eps).and_then(|p| {
            let fast = quadratic_rate(kappa, p.beta, p.gamma)?;
            let slow = quadratic_rate(kappa, 2.0 / (1.0 + kappa), 0.0)?;
            Ok((fast, slow))
        });
        match res {
            Ok((fast, slow)) => {
                let bound = theta_bound(kappa, eps) + 0.02;
                out.push(check(
                    "rates",
                    name,
                    fast <= bound,
                    format!("theta_hat={fast:.6} bound={bound:.6}"),
                ));
                if kappa >= 100.0 {
                    out.push(check(
                        "rates",
                        format!("acceleration/kappa{kappa}"),
                        fast < slow,
                        format!("theta_hat={fast:.6} theta_hat_gamma0={slow:.6}"),
                    ));
                }
            }
            Err(e) => out.push(failed("rates", name, e)),
        }
    }
    out
}

const STATIONARY_STEPS: usize = 100;

/// Largest distance from `x*` over 100 A-HiSD steps started at `x*` with the
/// exact frame, and the allowed drift `1e-9 (1 + ||x*||)`.
fn stationarity_drift(land: &dyn EnergyLandscape, solver: EigSolverKind, beta: f64) -> saddlescape::Result<(f64, f64)> {
    let t = land.known_saddle().expect("saddle");
    let params = SolverParams {
        beta,
        gamma: 0.5,
        k: t.index_k,
        eig_solver: solver,
        init_frame: FrameInit::Dense,
        ..SolverParams::default()
    };
    let params = SolverParams {
        zeta: Some(resolve_zeta(land, &t.x_star, &params)?),
        ..params
    };
    let frame = initial_frame(land, &t.x_star, &params)?;
    let mut state = SolverState::new(land, t.x_star.clone(), frame, beta)?;
    let mut drift = 0.0f64;
    for _ in 0..STATIONARY_STEPS {
        state = step(StepKind::Ahisd, land, &state, &params)?;
        drift = drift.max((&state.x - &t.x_star).norm());
    }
    Ok((drift, 1e-9 * (1.0 + t.x_star.norm())))
}

fn stationarity_cases() -> Vec<(&'static str, Box<dyn EnergyLandscape>, EigSolverKind, f64)> {
    vec![
        ("mb", Box::new(mb_potential()), EigSolverKind::Sirqit, 2e-4),
        ("mmb", Box::new(modified_mb()), EigSolverKind::Sirqit, 1e-4),
        (
            "rosenbrock_i",
            Box::new(rosenbrock_mod(RosenbrockModParams::case_i(100)).expect("rosenbrock")),
            EigSolverKind::Lobpcg,
            2e-4,
        ),
        (
            "rosenbrock_ii",
            Box::new(rosenbrock_mod(RosenbrockModParams::case_ii(100)).expect("rosenbrock")),
            EigSolverKind::Lobpcg,
            1e-5,
        ),
        ("convex2", Box::new(convex2(Convex2Params::default()).expect("convex2")), EigSolverKind::Sirqit, 1e-2),
        (
            "linear_nn",
            Box::new(linear_net_loss(LinearNetSpec::benchmark(0)).expect("linear net")),
            EigSolverKind::Lobpcg,
            1e-4,
        ),
    ]
}
