use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::eigen::symmetric_eigenvalues;
use crate::landscape::{EnergyLandscape, SaddleTarget, ZERO_EIGENVALUE_REL_TOL};

/// Coefficients of `sum_i A_i exp[a_i (x - xbar_i)^2 + b_i (x - xbar_i)(y - ybar_i) + c_i (y - ybar_i)^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MbParams {
    pub amp: [f64; 4],
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
    pub xbar: [f64; 4],
    pub ybar: [f64; 4],
    pub extra: Option<MbExtraTerm>,
}

/// Fifth term of the modified potential,
/// `A_5 sin(xy) exp[a_5 (x - xbar_5)^2 + c_5 (y - ybar_5)^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbExtraTerm {
    pub amp: f64,
    pub a: f64,
    pub c: f64,
    pub xbar: f64,
    pub ybar: f64,
}

impl Default for MbParams {
    fn default() -> Self {
        Self {
            amp: [-200.0, -100.0, -170.0, 15.0],
            a: [-1.0, -1.0, -6.5, 0.7],
            b: [0.0, 0.0, 11.0, 0.6],
            c: [-10.0, -10.0, -6.5, 0.7],
            xbar: [1.0, 0.0, -0.5, -1.0],
            ybar: [0.0, 0.5, 1.5, 1.0],
            extra: None,
        }
    }
}

impl MbExtraTerm {
    fn eval(&self, x: f64, y: f64) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (dx, dy) = (x - self.xbar, y - self.ybar);
        let amp = self.amp * (self.a * dx * dx + self.c * dy * dy).exp();
        let (s, co) = (x * y).sin_cos();
        let fx = 2.0 * self.a * dx;
        let fy = 2.0 * self.c * dy;
        let g = Vector2::new(amp * (y * co + s * fx), amp * (x * co + s * fy));
        let hxx = amp * (-y * y * s + 2.0 * y * co * fx + s * (fx * fx + 2.0 * self.a));
        let hyy = amp * (-x * x * s + 2.0 * x * co * fy + s * (fy * fy + 2.0 * self.c));
        let hxy = amp * (co - x * y * s + x * co * fx + y * co * fy + s * fx * fy);
        (amp * s, g, Matrix2::new(hxx, hxy, hxy, hyy))
    }

    pub fn modified() -> Self {
        Self {
            amp: 500.0,
            a: -0.1,
            c: -0.1,
            xbar: -0.5582,
            ybar: 1.4417,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    amp: f64,
    a: f64,
    b: f64,
    c: f64,
    xbar: f64,
    ybar: f64,
}

impl Term {
    /// Value, gradient and Hessian of one Gaussian.
    fn eval(&self, x: f64, y: f64) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let dx = x - self.xbar;
        let dy = y - self.ybar;
        let e = self.amp * (self.a * dx * dx + self.b * dx * dy + self.c * dy * dy).exp();
        let qx = 2.0 * self.a * dx + self.b * dy;
        let qy = self.b * dx + 2.0 * self.c * dy;
        let g = Vector2::new(e * qx, e * qy);
        let h = Matrix2::new(
            e * (qx * qx + 2.0 * self.a),
            e * (qx * qy + self.b),
            e * (qx * qy + self.b),
            e * (qy * qy + 2.0 * self.c),
        );
        (e, g, h)
    }
}

/// The Müller-Brown potential, optionally with the fifth (modifying) term.
#[derive(Debug, Clone)]
pub struct MullerBrown {
    name: &'static str,
    params: MbParams,
    terms: Vec<Term>,
    target: Option<SaddleTarget>,
}

impl MullerBrown {
    pub fn new(params: MbParams) -> Self {
        let terms: Vec<Term> = (0..4)
            .map(|i| Term {
                amp: params.amp[i],
                a: params.a[i],
                b: params.b[i],
                c: params.c[i],
                xbar: params.xbar[i],
                ybar: params.ybar[i],
            })
            .collect();
        let name = if params.extra.is_some() { "mmb" } else { "mb" };
        Self {
            name,
            params,
            terms,
            target: None,
        }
    }

    pub fn params(&self) -> &MbParams {
        &self.params
    }

    fn eval(&self, p: &DVector<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let mut e = 0.0;
        let mut g = Vector2::zeros();
        let mut h = Matrix2::zeros();
        for t in &self.terms {
            let (te, tg, th) = t.eval(p[0], p[1]);
            e += te;
            g += tg;
            h += th;
        }
        if let Some(t) = &self.params.extra {
            let (te, tg, th) = t.eval(p[0], p[1]);
            e += te;
            g += tg;
            h += th;
        }
        (e, g, h)
    }

    /// Newton's method on `grad E = 0` from `seed`. Returns the refined point
    /// once the gradient stops decreasing.
    pub fn newton_critical_point(&self, seed: [f64; 2]) -> Option<DVector<f64>> {
        let mut p = DVector::from_column_slice(&seed);
        let mut best = f64::INFINITY;
        for _ in 0..100 {
            let (_, g, h) = self.eval(&p);
            let gn = g.norm();
            if !gn.is_finite() {
                return None;
            }
            if gn >= best && gn < 1e-8 {
                break;
            }
            best = best.min(gn);
            let step = h.lu().solve(&g)?;
            p[0] -= step[0];
            p[1] -= step[1];
        }
        let (_, g, _) = self.eval(&p);
        (g.norm() < 1e-8).then_some(p)
    }

    /// Attaches the critical point found by Newton's method from `seed` as
    /// the known saddle.
    fn with_saddle(mut self, seed: [f64; 2]) -> Self {
        let x = self
            .newton_critical_point(seed)
            .expect("Newton iteration from the tabulated seed converges");
        let h = self.hessian(&x).expect("analytic Hessian");
        let vals = symmetric_eigenvalues(&h).expect("2x2 symmetric Hessian");
        self.target = Some(SaddleTarget::from_spectrum(x, vals, ZERO_EIGENVALUE_REL_TOL));
        self
    }
}

/// Müller-Brown potential with its index-1 saddle near `(-0.8220, 0.6243)`.
pub fn mb_potential() -> MullerBrown {
    MullerBrown::new(MbParams::default()).with_saddle([-0.8220, 0.6243])
}

/// Modified Müller-Brown potential with the index-1 saddle near
/// `(0.0660, 0.1840)` reached from `(0.053, 2.047)`.
pub fn modified_mb() -> MullerBrown {
    MullerBrown::new(MbParams {
        extra: Some(MbExtraTerm::modified()),
        ..MbParams::default()
    })
    .with_saddle([0.0660, 0.1840])
}

impl EnergyLandscape for MullerBrown {
    fn name(&self) -> &str {
        self.name
    }

    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        let mut e: f64 = self
            .terms
            .iter()
            .map(|t| {
                let dx = x[0] - t.xbar;
                let dy = x[1] - t.ybar;
                t.amp * (t.a * dx * dx + t.b * dx * dy + t.c * dy * dy).exp()
            })
            .sum();
        if let Some(t) = &self.params.extra {
            let (dx, dy) = (x[0] - t.xbar, x[1] - t.ybar);
            e += t.amp * (x[0] * x[1]).sin() * (t.a * dx * dx + t.c * dy * dy).exp();
        }
        e
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, g, _) = self.eval(x);
        DVector::from_column_slice(g.as_slice())
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (_, _, h) = self.eval(x);
        Some(DMatrix::from_column_slice(2, 2, h.as_slice()))
    }

    fn has_hessian_vec(&self) -> bool {
        true
    }

    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        let (_, _, h) = self.eval(x);
        let hv = h * Vector2::new(v[0], v[1]);
        Some(DVector::from_column_slice(hv.as_slice()))
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        self.target.as_ref()
    }
}
