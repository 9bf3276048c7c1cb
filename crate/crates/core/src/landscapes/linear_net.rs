use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::landscape::{dense_hessian, EnergyLandscape, SaddleTarget, ZERO_EIGENVALUE_REL_TOL};

/// Architecture, data and saddle selection for the deep linear network loss
/// `L(W) = ||W_H ... W_1 X - Y||_F^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNetSpec {
    /// Layer widths `d_0 = d_x, d_1, ..., d_H = d_y`.
    pub dims: Vec<usize>,
    /// Inputs, one column per sample (`d_x x m`).
    pub x: DMatrix<f64>,
    /// Targets (`d_y x m`).
    pub y: DMatrix<f64>,
    /// 1-based indices into the descending eigenvalues of `Sigma`.
    pub index_set: Vec<usize>,
    pub seed: u64,
}

impl LinearNetSpec {
    /// Draws `X` then `Y` (column by column) from a seeded standard normal
    /// stream.
    pub fn random(dims: Vec<usize>, samples: usize, index_set: Vec<usize>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dx = dims.first().copied().unwrap_or(0);
        let dy = dims.last().copied().unwrap_or(0);
        let x = DMatrix::from_fn(dx, samples, |_, _| StandardNormal.sample(&mut rng));
        let y = DMatrix::from_fn(dy, samples, |_, _| StandardNormal.sample(&mut rng));
        Self {
            dims,
            x,
            y,
            index_set,
            seed,
        }
    }

    /// `H = 5`, `d_x = 10`, hidden widths 10, `d_y = 4`, 100 samples,
    /// `S = {1, 2, 3}`.
    pub fn benchmark(seed: u64) -> Self {
        Self::random(vec![10, 10, 10, 10, 10, 4], 100, vec![1, 2, 3], seed)
    }

    pub fn depth(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    /// Number of parameters `sum_h d_{h-1} d_h`.
    pub fn param_dim(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1]).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(format!(
                "linear network needs at least one layer of positive width, got dims {:?}",
                self.dims
            )));
        }
        let (dx, dy) = (self.dims[0], *self.dims.last().unwrap());
        if self.x.nrows() != dx {
            return Err(Error::DimensionMismatch {
                expected: dx,
                found: self.x.nrows(),
            });
        }
        if self.y.nrows() != dy {
            return Err(Error::DimensionMismatch {
                expected: dy,
                found: self.y.nrows(),
            });
        }
        if self.x.ncols() != self.y.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.x.ncols(),
                found: self.y.ncols(),
            });
        }
        Ok(())
    }
}

/// The loss as a function of the row-major vectorization of
/// `W_1, ..., W_H` (`W_h` is `d_h x d_{h-1}`).
#[derive(Debug, Clone)]
pub struct LinearNet {
    spec: LinearNetSpec,
    offsets: Vec<usize>,
    w_star: DVector<f64>,
    target: SaddleTarget,
}

/// Builds the loss together with the saddle selected by `spec.index_set`
/// and its Hessian spectrum.
pub fn linear_net_loss(spec: LinearNetSpec) -> Result<LinearNet> {
    spec.validate()?;
    let mut offsets = vec![0];
    for w in spec.dims.windows(2) {
        offsets.push(offsets.last().unwrap() + w[0] * w[1]);
    }
    let w_star = construct_nn_saddle(&spec)?;
    let mut net = LinearNet {
        target: SaddleTarget::new(w_star.clone(), 0),
        w_star,
        offsets,
        spec,
    };
    let h = dense_hessian(&net, &net.w_star).expect("analytic Hessian-vector product");
    let vals = symmetric_eigenvalues(&h)?;
    net.target = SaddleTarget::from_spectrum(net.w_star.clone(), vals, ZERO_EIGENVALUE_REL_TOL);
    Ok(net)
}

/// The critical point
///
/// ```text
/// W_1 = [U_S^T Sigma_YX Sigma_XX^{-1}; 0],  W_h = I,  W_H = [U_S 0]
/// ```
///
/// with `Sigma = Sigma_YX Sigma_XX^{-1} Sigma_YX^T = U Lambda U^T`, `Lambda`
/// descending. Requires every hidden width to equal `d_x`.
pub fn construct_nn_saddle(spec: &LinearNetSpec) -> Result<DVector<f64>> {
    spec.validate()?;
    let dims = &spec.dims;
    let depth = dims.len() - 1;
    let (dx, dy) = (dims[0], dims[depth]);
    if depth < 2 {
        return Err(Error::InvalidParameter("the saddle construction needs depth >= 2".into()));
    }
    if dims[1..depth].iter().any(|&d| d != dx) {
        return Err(Error::InvalidParameter(format!(
            "hidden widths must equal d_x = {dx}, got {:?}",
            &dims[1..depth]
        )));
    }
    let r_max = *dims.iter().min().unwrap();
    let mut s = spec.index_set.clone();
    s.sort_unstable();
    s.dedup();
    if s.len() != spec.index_set.len()
        || s.iter().any(|&i| i == 0 || i > r_max)
        || s.len() > dy.min(r_max)
    {
        return Err(Error::InvalidParameter(format!(
            "index set {:?} must hold distinct entries of 1..={r_max}",
            spec.index_set
        )));
    }

    let sxx = &spec.x * spec.x.transpose();
    let syx = &spec.y * spec.x.transpose();
    let chol = sxx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Sigma_XX is not positive definite".into()))?;
    // Sigma_YX Sigma_XX^{-1} = (Sigma_XX^{-1} Sigma_XY)^T
    let b = chol.solve(&syx.transpose()).transpose();
    let sigma = &b * syx.transpose();
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let eig = SymmetricEigen::new(sigma);
    let mut order: Vec<usize> = (0..dy).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lambda: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = lambda[0].abs().max(f64::MIN_POSITIVE);
    let threshold = 1e-10 * scale;
    for w in lambda.windows(2) {
        if w[0] - w[1] <= threshold {
            return Err(Error::DegenerateSpectrum {
                gap: w[0] - w[1],
                threshold,
            });
        }
    }
    if lambda[dy - 1] <= threshold {
        return Err(Error::DegenerateSpectrum {
            gap: lambda[dy - 1],
            threshold,
        });
    }

    let mut u_s = DMatrix::zeros(dy, s.len());
    for (col, &idx) in spec.index_set.iter().enumerate() {
        let mut u = eig.eigenvectors.column(order[idx - 1]).into_owned();
        let pivot = u.iamax();
        if u[pivot] < 0.0 {
            u.neg_mut();
        }
        u_s.set_column(col, &u);
    }

    let mut layers = Vec::with_capacity(depth);
    let mut w1 = DMatrix::zeros(dims[1], dx);
    w1.rows_mut(0, s.len()).copy_from(&(u_s.transpose() * &b));
    layers.push(w1);
    for h in 2..depth {
        layers.push(DMatrix::identity(dims[h], dims[h - 1]));
    }
    let mut wh = DMatrix::zeros(dy, dims[depth - 1]);
    wh.columns_mut(0, s.len()).copy_from(&u_s);
    layers.push(wh);
    Ok(pack(&layers))
}

fn pack(layers: &[DMatrix<f64>]) -> DVector<f64> {
    let mut out = Vec::with_capacity(layers.iter().map(|w| w.len()).sum());
    for w in layers {
        for i in 0..w.nrows() {
            out.extend(w.row(i).iter());
        }
    }
    DVector::from_vec(out)
}

impl LinearNet {
    pub fn spec(&self) -> &LinearNetSpec {
        &self.spec
    }

    pub fn w_star(&self) -> &DVector<f64> {
        &self.w_star
    }

    /// Layer `h` (0-based) of a vectorized parameter.
    pub fn layer(&self, w: &DVector<f64>, h: usize) -> DMatrix<f64> {
        let (rows, cols) = (self.spec.dims[h + 1], self.spec.dims[h]);
        DMatrix::from_row_slice(rows, cols, &w.as_slice()[self.offsets[h]..self.offsets[h + 1]])
    }

    fn layers(&self, w: &DVector<f64>) -> Vec<DMatrix<f64>> {
        (0..self.spec.depth()).map(|h| self.layer(w, h)).collect()
    }

    /// `A_0 = X`, `A_h = W_h A_{h-1}`.
    fn forward(&self, ws: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let mut acts = Vec::with_capacity(ws.len() + 1);
        acts.push(self.spec.x.clone());
        for w in ws {
            let next = w * acts.last().unwrap();
            acts.push(next);
        }
        acts
    }

    /// `W* + (V_1, ..., V_H)` with `(V_h)_{ij} ~ N(0, sigma_h^2)`,
    /// `sigma_h = scale ||W_h*||_F / sqrt(d_{h-1} d_h)`.
    pub fn layerwise_gaussian_point(&self, scale: f64, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.w_star.clone();
        for h in 0..self.spec.depth() {
            let (a, b) = (self.offsets[h], self.offsets[h + 1]);
            let fro = self.w_star.rows(a, b - a).norm();
            let sigma = scale * fro / ((self.spec.dims[h] * self.spec.dims[h + 1]) as f64).sqrt();
            for i in a..b {
                let z: f64 = StandardNormal.sample(&mut rng);
                out[i] += sigma * z;
            }
        }
        out
    }
}

impl EnergyLandscape for LinearNet {
    fn name(&self) -> &str {
        "linear_nn"
    }

    fn dim(&self) -> usize {
        self.spec.param_dim()
    }

    fn energy(&self, w: &DVector<f64>) -> f64 {
        let acts = self.forward(&self.layers(w));
        (acts.last().unwrap() - &self.spec.y).norm_squared()
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let ws = self.layers(w);
        let acts = self.forward(&ws);
        let mut back = (acts.last().unwrap() - &self.spec.y) * 2.0;
        let mut grads = vec![DMatrix::zeros(0, 0); ws.len()];
        for h in (0..ws.len()).rev() {
            grads[h] = &back * acts[h].transpose();
            back = ws[h].tr_mul(&back);
        }
        pack(&grads)
    }

    fn has_hessian_vec(&self) -> bool {
        true
    }

    /// Directional derivative of the gradient along `v`, propagated in
    /// tangent mode through the forward and backward passes.
    fn hessian_vec(&self, w: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        let ws = self.layers(w);
        let vs = self.layers(v);
        let acts = self.forward(&ws);
        let mut dacts = Vec::with_capacity(ws.len() + 1);
        dacts.push(DMatrix::zeros(self.spec.x.nrows(), self.spec.x.ncols()));
        for h in 0..ws.len() {
            let next = &vs[h] * &acts[h] + &ws[h] * &dacts[h];
            dacts.push(next);
        }
        let mut back = (acts.last().unwrap() - &self.spec.y) * 2.0;
        let mut dback = dacts.last().unwrap() * 2.0;
        let mut out = vec![DMatrix::zeros(0, 0); ws.len()];
        for h in (0..ws.len()).rev() {
            out[h] = &dback * acts[h].transpose() + &back * dacts[h].transpose();
            let next_dback = vs[h].tr_mul(&back) + ws[h].tr_mul(&dback);
            back = ws[h].tr_mul(&back);
            dback = next_dback;
        }
        Some(pack(&out))
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        Some(&self.target)
    }

    fn degenerate(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_dimension() {
        let spec = LinearNetSpec::benchmark(0);
        assert_eq!(spec.param_dim(), 440);
    }

    #[test]
    fn scalar_closed_form() {
        let spec = LinearNetSpec {
            dims: vec![1, 1, 1],
            x: DMatrix::from_element(1, 1, 1.0),
            y: DMatrix::from_element(1, 1, 2.0),
            index_set: vec![1],
            seed: 0,
        };
        let w = construct_nn_saddle(&spec).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 1.0]);
        let net = linear_net_loss(spec).unwrap();
        assert_eq!(net.energy(&w), 0.0);
        assert_eq!(net.gradient(&w), DVector::zeros(2));
    }

    #[test]
    fn repeated_index_rejected() {
        let mut spec = LinearNetSpec::benchmark(1);
        spec.index_set = vec![1, 1];
        assert!(construct_nn_saddle(&spec).is_err());
    }

    #[test]
    fn mismatched_hidden_width_rejected() {
        let spec = LinearNetSpec::random(vec![3, 4, 2], 20, vec![1], 2);
        assert!(matches!(construct_nn_saddle(&spec), Err(Error::InvalidParameter(_))));
    }
}
