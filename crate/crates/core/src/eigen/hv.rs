use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::landscape::EnergyLandscape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvKind {
    Analytic,
    Dimer,
}

/// Central-difference (dimer) estimate of `nabla^2 E(x) v`:
/// `[grad E(x + l v) - grad E(x - l v)] / (2 l)`.
///
/// Costs exactly two gradient evaluations. `v` must be a unit vector.
pub fn dimer_hv(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    v: &DVector<f64>,
    l: f64,
) -> Result<DVector<f64>> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidDimerLength(l));
    }
    if x.len() != land.dim() || v.len() != land.dim() {
        return Err(Error::DimensionMismatch {
            expected: land.dim(),
            found: if x.len() != land.dim() { x.len() } else { v.len() },
        });
    }
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "dimer direction must be a unit vector, |v| = {}",
            v.norm()
        )));
    }
    Ok(dimer_unchecked(land, x, v, l))
}

fn dimer_unchecked(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    v: &DVector<f64>,
    l: f64,
) -> DVector<f64> {
    let plus = land.gradient(&(x + v * l));
    let minus = land.gradient(&(x - v * l));
    (plus - minus) / (2.0 * l)
}

enum Source<'a> {
    Landscape {
        land: &'a dyn EnergyLandscape,
        x: DVector<f64>,
    },
    Dimer {
        land: &'a dyn EnergyLandscape,
        x: DVector<f64>,
        l: f64,
    },
    Matrix(&'a DMatrix<f64>),
    Owned(DMatrix<f64>),
}

/// A linear operator `v -> H v` at a fixed point, backed by an analytic
/// Hessian-vector product, a dimer closure, or an explicit matrix.
///
/// Counts applications so callers can audit solver cost.
pub struct HvOperator<'a> {
    source: Source<'a>,
    dim: usize,
    applications: Cell<usize>,
}

impl<'a> HvOperator<'a> {
    /// Analytic product if the landscape offers one (and `force_dimer` is
    /// false), otherwise the dimer approximation with length `l`.
    pub fn for_landscape(
        land: &'a dyn EnergyLandscape,
        x: &DVector<f64>,
        l: f64,
        force_dimer: bool,
    ) -> Result<Self> {
        if x.len() != land.dim() {
            return Err(Error::DimensionMismatch {
                expected: land.dim(),
                found: x.len(),
            });
        }
        let source = if land.has_hessian_vec() && !force_dimer {
            Source::Landscape { land, x: x.clone() }
        } else {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidDimerLength(l));
            }
            Source::Dimer { land, x: x.clone(), l }
        };
        Ok(Self {
            source,
            dim: land.dim(),
            applications: Cell::new(0),
        })
    }

    pub fn dimer(land: &'a dyn EnergyLandscape, x: &DVector<f64>, l: f64) -> Result<Self> {
        Self::for_landscape(land, x, l, true)
    }

    pub fn from_matrix(h: &'a DMatrix<f64>) -> Self {
        Self {
            dim: h.nrows(),
            source: Source::Matrix(h),
            applications: Cell::new(0),
        }
    }

    pub fn from_owned_matrix(h: DMatrix<f64>) -> HvOperator<'static> {
        HvOperator {
            dim: h.nrows(),
            source: Source::Owned(h),
            applications: Cell::new(0),
        }
    }

    pub fn kind(&self) -> HvKind {
        match self.source {
            Source::Dimer { .. } => HvKind::Dimer,
            _ => HvKind::Analytic,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn applications(&self) -> usize {
        self.applications.get()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.applications.set(self.applications.get() + 1);
        match &self.source {
            Source::Landscape { land, x } => land
                .hessian_vec(x, v)
                .expect("landscape advertised a Hessian-vector product"),
            Source::Dimer { land, x, l } => {
                // The dimer is accurate for unit directions; rescale so the
                // operator stays (approximately) linear in v.
                let norm = v.norm();
                if norm == 0.0 {
                    return DVector::zeros(self.dim);
                }
                dimer_unchecked(*land, x, &(v / norm), *l) * norm
            }
            Source::Matrix(h) => *h * v,
            Source::Owned(h) => h * v,
        }
    }

    /// Applies the operator column by column.
    pub fn apply_block(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        for j in 0..v.ncols() {
            out.set_column(j, &self.apply(&v.column(j).into_owned()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::QuadraticLandscape;

    struct Quartic;

    impl EnergyLandscape for Quartic {
        fn name(&self) -> &str {
            "quartic"
        }
        fn dim(&self) -> usize {
            1
        }
        fn energy(&self, x: &DVector<f64>) -> f64 {
            x[0].powi(4)
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, 4.0 * x[0].powi(3))
        }
    }

    #[test]
    fn quartic_dimer_error_is_four_l_squared() {
        let x = DVector::zeros(1);
        let v = DVector::from_element(1, 1.0);
        for l in [1e-1, 1e-2, 1e-3] {
            let hv = dimer_hv(&Quartic, &x, &v, l).unwrap();
            assert!((hv[0] - 4.0 * l * l).abs() <= 1e-12 * 4.0 * l * l + 1e-300);
        }
    }

    #[test]
    fn zero_length_rejected() {
        let x = DVector::zeros(1);
        let v = DVector::from_element(1, 1.0);
        assert!(matches!(
            dimer_hv(&Quartic, &x, &v, 0.0),
            Err(Error::InvalidDimerLength(_))
        ));
    }

    #[test]
    fn dimer_exact_on_quadratic() {
        let land = QuadraticLandscape::new(vec![-1.5, 2.0, 7.0]).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.2, 2.5]);
        let v = DVector::from_vec(vec![1.0, 2.0, -2.0]).normalize();
        let exact = land.hessian_vec(&x, &v).unwrap();
        for l in [1e-1, 1e-3] {
            let hv = dimer_hv(&land, &x, &v, l).unwrap();
            assert!((&hv - &exact).norm() <= 1e-9 * exact.norm());
        }
    }

    #[test]
    fn operator_kind_and_counting() {
        let land = QuadraticLandscape::new(vec![-1.0, 2.0]).unwrap();
        let x = DVector::zeros(2);
        let op = HvOperator::for_landscape(&land, &x, 1e-3, false).unwrap();
        assert_eq!(op.kind(), HvKind::Analytic);
        let dim = HvOperator::for_landscape(&land, &x, 1e-3, true).unwrap();
        assert_eq!(dim.kind(), HvKind::Dimer);
        let _ = op.apply(&DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(op.applications(), 1);
    }
}
