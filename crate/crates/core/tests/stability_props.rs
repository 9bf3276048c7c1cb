use nalgebra::Complex;
use proptest::prelude::*;
use saddlescape::landscapes::quadratic_landscape;
use saddlescape::stability::*;
use saddlescape::{DMatrix, DVector, EnergyLandscape};

/// Distinct magnitudes in `[0.2, 5)`, at least `0.1` apart, random signs.
fn separated_spectrum() -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.2f64..5.0, 2..6), any::<u64>()).prop_filter_map("separated", |(mut mags, signs)| {
        mags.sort_by(|a, b| a.total_cmp(b));
        if mags.windows(2).any(|w| w[1] - w[0] <= 0.1) {
            return None;
        }
        Some(
            mags.iter()
                .enumerate()
                .map(|(i, m)| if signs >> i & 1 == 1 { -m } else { *m })
                .collect(),
        )
    })
}

fn steady(vals: &[f64], k: usize) -> SteadyState {
    let d = vals.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut v = DMatrix::zeros(d, k);
    for (c, &i) in order.iter().take(k).enumerate() {
        v[(i, c)] = 1.0;
    }
    SteadyState::new(DVector::zeros(d), v)
}

fn quad_roots(b: f64, c: f64) -> [Complex<f64>; 2] {
    // z^2 + b z + c = 0
    let disc = Complex::new(b * b - 4.0 * c, 0.0).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

/// Closed-form Jacobian spectrum for a diagonal quadratic with the `k`
/// smallest eigenvectors as frame.
fn closed_form(vals: &[f64], k: usize, cp: &ContinuousParams) -> Vec<Complex<f64>> {
    let mut lam = vals.to_vec();
    lam.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::new();
    for (j, &l) in lam.iter().enumerate() {
        let p = if j < k { -l } else { l };
        out.extend(quad_roots(cp.alpha1, cp.alpha2 * p));
    }
    for i in 0..k {
        for (j, &lj) in lam.iter().enumerate() {
            let z = if j <= i { cp.zeta * (lj + lam[i]) } else { cp.zeta * (lam[i] - lj) };
            out.push(Complex::new(z, 0.0));
        }
    }
    out.push(Complex::new(-1.0, 0.0));
    out
}

fn multiset_close(a: &[Complex<f64>], b: &[Complex<f64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(j) if (b[j] - x).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

fn hypothesis_params(vals: &[f64], k: usize, zeta: f64) -> ContinuousParams {
    let mut lam = vals.to_vec();
    lam.sort_by(|a, b| a.total_cmp(b));
    let mu = lam[..k].iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    ContinuousParams {
        alpha1: if mu.is_finite() { 1.8 * mu.sqrt() } else { 1.0 },
        alpha2: 1.0,
        zeta,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn jacobian_spectrum_matches_closed_form(
        vals in separated_spectrum(),
        a1 in 0.2f64..3.0,
        a2 in 0.2f64..3.0,
        zeta in 0.1f64..2.0,
        pick in any::<usize>(),
    ) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let k = pick % (vals.len() + 1);
        let cp = ContinuousParams { alpha1: a1, alpha2: a2, zeta };
        let report = check_linear_stability(&land, &steady(&vals, k), &cp, DEFAULT_TOL_MARGIN).unwrap();
        prop_assert_eq!(report.eigvals.len(), vals.len() * (k + 2) + 1);
        let want = closed_form(&vals, k, &cp);
        prop_assert!(multiset_close(&report.eigvals, &want, 1e-8), "{:?}\nvs\n{:?}", report.eigvals, want);
    }

    #[test]
    fn correct_index_is_stable(vals in separated_spectrum(), zeta in 0.1f64..2.0) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let k = land.known_saddle().unwrap().index_k;
        let cp = hypothesis_params(&vals, k, zeta);
        let r = check_linear_stability(&land, &steady(&vals, k), &cp, DEFAULT_TOL_MARGIN).unwrap();
        prop_assert!(r.hypothesis_holds);
        prop_assert!(r.stable, "max_real {}", r.max_real);
    }

    #[test]
    fn wrong_index_is_unstable(vals in separated_spectrum(), zeta in 0.1f64..2.0, pick in any::<usize>()) {
        let land = quadratic_landscape(vals.clone()).unwrap();
        let k = land.known_saddle().unwrap().index_k;
        let d = vals.len();
        let wrong = (k + 1 + pick % d) % (d + 1);
        prop_assume!(wrong != k);
        let cp = hypothesis_params(&vals, k, zeta);
        let r = check_linear_stability(&land, &steady(&vals, wrong), &cp, DEFAULT_TOL_MARGIN).unwrap();
        prop_assert!(!r.stable, "k={} wrong={} max_real {}", k, wrong, r.max_real);
    }
}
