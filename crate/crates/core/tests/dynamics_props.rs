use proptest::prelude::*;
use saddlescape::dynamics::*;
use saddlescape::eigen::gram_schmidt;
use saddlescape::landscapes::*;
use saddlescape::*;

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-4.0f64..-0.2, 0.2f64..4.0], 2..7)
}

fn random_frame(d: usize, k: usize, seed: u64) -> SpectralFrame {
    let v = if k == 0 {
        DMatrix::zeros(d, 0)
    } else {
        let cols: Vec<DVector<f64>> = (0..k)
            .map(|j| sphere_point(&DVector::zeros(d), 1.0, seed.wrapping_add(j as u64)))
            .collect();
        gram_schmidt(&DMatrix::from_columns(&cols)).unwrap()
    };
    SpectralFrame {
        vectors: v,
        rayleigh: vec![0.0; k],
    }
}

fn params(beta: f64, gamma: f64, k: usize) -> SolverParams {
    SolverParams {
        beta,
        gamma,
        k,
        eig_solver: EigSolverKind::Dense,
        init_frame: FrameInit::Dense,
        ..SolverParams::default()
    }
}

/// Separable quadratic with `|lambda|` in `[1, kappa]` and two negative
/// directions.
fn rate_quadratic(kappa: f64) -> QuadraticLandscape {
    quadratic_landscape(vec![-kappa, -1.0, 1.0, kappa.sqrt(), kappa]).unwrap()
}

fn fitted_rate(kappa: f64, beta: f64, gamma: f64) -> f64 {
    let land = rate_quadratic(kappa);
    let p = SolverParams {
        max_iter: 1000,
        stop_tol: 1e-140,
        ..params(beta, gamma, 2)
    };
    let r = run(&land, &p, &sphere_point(&DVector::zeros(5), 1.0, 3), StepKind::Ahisd).unwrap();
    let n = r.trace.len();
    estimate_rate(&r.trace, if n > 400 { 200 } else { n / 2 }).unwrap().theta_hat
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn zero_momentum_is_hisd(vals in spectrum(), seed in any::<u64>(), beta in 1e-3f64..0.3) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let d = vals.len();
        let k = seed as usize % (d + 1);
        let x = sphere_point(&DVector::zeros(d), 1.0, seed);
        let mut s = SolverState::new(&land, x, random_frame(d, k, seed ^ 5), beta).unwrap();
        s.x_prev = sphere_point(&s.x, 0.3, seed ^ 6);
        let p = params(beta, 0.0, k);
        let a = ahisd_step(&land, &s, &p).unwrap();
        let h = hisd_step(&land, &s, &p).unwrap();
        prop_assert!((&a.x - &h.x).norm() <= 1e-14 * h.x.norm().max(1.0));
    }

    #[test]
    fn momentum_step_formula(vals in spectrum(), seed in any::<u64>(), beta in 1e-3f64..0.3, gamma in 0.0f64..0.99) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let d = vals.len();
        let k = seed as usize % (d + 1);
        let x = sphere_point(&DVector::zeros(d), 1.0, seed);
        let mut s = SolverState::new(&land, x, random_frame(d, k, seed ^ 5), beta).unwrap();
        s.x_prev = sphere_point(&s.x, 0.3, seed ^ 6);
        let next = ahisd_step(&land, &s, &params(beta, gamma, k)).unwrap();
        let v = &s.frame.vectors;
        let g = DVector::from_fn(d, |i, _| vals[i] * s.x[i]);
        let reflected = &g - v * (v.transpose() * &g) * 2.0;
        let want = &s.x - reflected * beta + (&s.x - &s.x_prev) * gamma;
        prop_assert!((&next.x - &want).norm() <= 1e-13 * want.norm().max(1.0));
    }

    #[test]
    fn first_momentum_step_equals_hisd(vals in spectrum(), seed in any::<u64>(), gamma in 0.0f64..0.99) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let k = land.known_saddle().unwrap().index_k;
        let x0 = sphere_point(&DVector::zeros(vals.len()), 1.0, seed);
        let one = |kind, g| {
            let p = SolverParams { max_iter: 1, stop_tol: 1e-300, ..params(0.05, g, k) };
            run(&land, &p, &x0, kind).unwrap().state.x
        };
        let a = one(StepKind::Ahisd, gamma);
        let h = one(StepKind::Hisd, 0.0);
        prop_assert!((&a - &h).norm() <= 1e-15 * h.norm().max(1.0));
    }

    #[test]
    fn bb_step_passes_quotient_through(seed in any::<u64>(), tau in 0.01f64..2.0) {
        let n = 6;
        let g1 = sphere_point(&DVector::zeros(n), 2.0, seed);
        let g0 = sphere_point(&DVector::zeros(n), 2.0, seed ^ 1);
        let x1 = sphere_point(&DVector::zeros(n), 1.0, seed ^ 2);
        let x0 = sphere_point(&DVector::zeros(n), 1.0, seed ^ 3);
        let (dx, dg) = (&x1 - &x0, &g1 - &g0);
        let want = (tau / g1.norm()).min(dx.dot(&dg) / dg.norm_squared());
        let got = bb_step_size(&g1, &g0, &x1, &x0, tau).unwrap();
        prop_assert!((got - want).abs() <= 1e-15 * want.abs().max(1.0));
    }

    #[test]
    fn exact_frame_keeps_saddle_fixed(vals in spectrum(), gamma in 0.0f64..0.95) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let t = land.known_saddle().unwrap();
        let p = params(0.1, gamma, t.index_k);
        let mut s = SolverState::new(&land, t.x_star.clone(), initial_frame(&land, &t.x_star, &p).unwrap(), 0.1).unwrap();
        for _ in 0..100 {
            s = step(StepKind::Ahisd, &land, &s, &p).unwrap();
            prop_assert_eq!(s.x.norm(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fitted_rate_within_bound(kappa in 2.0f64..600.0) {
        let eps = 0.5 / (kappa.sqrt() + 1.0);
        let p = select_parameters(1.0, kappa, eps).unwrap();
        let theta = fitted_rate(kappa, p.beta, p.gamma);
        prop_assert!(theta <= theta_bound(kappa, eps) + 0.02, "kappa {} theta {}", kappa, theta);
    }

    #[test]
    fn momentum_beats_plain_rate(kappa in 100.0f64..600.0) {
        let eps = 0.5 / (kappa.sqrt() + 1.0);
        let p = select_parameters(1.0, kappa, eps).unwrap();
        let fast = fitted_rate(kappa, p.beta, p.gamma);
        let slow = fitted_rate(kappa, 2.0 / (1.0 + kappa), 0.0);
        prop_assert!(fast < slow, "{} vs {}", fast, slow);
    }

    #[test]
    fn schedule_matches_closed_form(mu in 0.01f64..5.0, ratio in 1.0f64..1e4, frac in 0.01f64..0.99) {
        let l = mu * ratio;
        let kappa = l / mu;
        let eps = frac / (kappa.sqrt() + 1.0);
        let p = select_parameters(mu, l, eps).unwrap();
        let beta = 4.0 / (l.sqrt() + mu.sqrt()).powi(2);
        let gamma = (1.0 - 2.0 / (kappa.sqrt() + 1.0) + eps).powi(2);
        prop_assert!((p.beta - beta).abs() <= 1e-14 * beta);
        prop_assert!((p.gamma - gamma).abs() <= 1e-14);
        prop_assert!(p.theta() < 1.0 + 1e-15);
    }
}

#[test]
fn runs_are_deterministic() {
    let land = mb_potential();
    let p = SolverParams {
        beta: 2e-4,
        gamma: 0.6,
        k: 1,
        stop_tol: 1e-11,
        ..SolverParams::default()
    };
    let x0 = DVector::from_vec(vec![0.15, 1.5]);
    let strip = |r: RunResult| {
        r.trace
            .records()
            .iter()
            .map(|t| (t.iter, t.err.map(f64::to_bits), t.grad_norm.to_bits(), t.energy.to_bits()))
            .collect::<Vec<_>>()
    };
    let a = strip(run(&land, &p, &x0, StepKind::Ahisd).unwrap());
    let b = strip(run(&land, &p, &x0, StepKind::Ahisd).unwrap());
    assert_eq!(a, b);
}

#[test]
fn heavy_ball_scalar_recurrence() {
    // x'' recurrence on E = x^2/2 with k = 0: x_{n+1} = (1 + gamma - beta) x_n - gamma x_{n-1}.
    let land = quadratic_landscape(vec![1.0]).unwrap();
    let (beta, gamma) = (0.3, 0.5);
    let p = SolverParams {
        max_iter: 25,
        stop_tol: 1e-300,
        k: 0,
        ..params(beta, gamma, 0)
    };
    let r = run(&land, &p, &DVector::from_element(1, 1.0), StepKind::Ahisd).unwrap();
    let (mut prev, mut cur) = (1.0f64, 1.0f64);
    for rec in r.trace.records().iter().skip(1) {
        let next = (1.0 + gamma - beta) * cur - gamma * prev;
        (prev, cur) = (cur, next);
        assert!((rec.err.unwrap() - cur.abs()).abs() <= 1e-15, "iter {}", rec.iter);
    }
}
