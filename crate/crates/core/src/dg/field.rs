use std::sync::Arc;

use ndarray::Array3;

use crate::basis::StochasticBasis;
use crate::dg::mesh::Side;
use crate::dg::space::{ortho_legendre, ortho_legendre_dr, ortho_legendre_left, ortho_legendre_right, DgSpace};

/// Discrete SG-DG solution: coefficient `[element][DG mode][chaos mode]`.
#[derive(Debug, Clone)]
pub struct SgField {
    space: Arc<DgSpace>,
    basis: Arc<StochasticBasis>,
    data: Array3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Value,
    Dx,
}

impl SgField {
    pub fn zeros(space: Arc<DgSpace>, basis: Arc<StochasticBasis>) -> Self {
        let shape = (
            space.mesh().n_elements(),
            space.degree() + 1,
            basis.n_modes(),
        );
        Self {
            space,
            basis,
            data: Array3::zeros(shape),
        }
    }

    pub fn from_data(space: Arc<DgSpace>, basis: Arc<StochasticBasis>, data: Array3<f64>) -> Self {
        assert_eq!(
            data.dim(),
            (space.mesh().n_elements(), space.degree() + 1, basis.n_modes()),
            "coefficient tensor shape does not match space and basis"
        );
        Self { space, basis, data }
    }

    /// Same space and basis, new coefficients.
    pub fn with_data(&self, data: Array3<f64>) -> Self {
        Self::from_data(self.space.clone(), self.basis.clone(), data)
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn basis(&self) -> &Arc<StochasticBasis> {
        &self.basis
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }

    pub fn n_elements(&self) -> usize {
        self.data.dim().0
    }

    pub fn degree(&self) -> usize {
        self.data.dim().1 - 1
    }

    pub fn n_modes(&self) -> usize {
        self.data.dim().2
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Chaos modes of `u` (or `u_x`) at reference point `r` of element `k`.
    pub fn modes_at(&self, k: usize, r: f64, deriv: Derivative, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let jac = 2.0 / self.space.mesh().width(k);
        for j in 0..=self.degree() {
            let phi = match deriv {
                Derivative::Value => ortho_legendre(j, r),
                Derivative::Dx => jac * ortho_legendre_dr(j, r),
            };
            for (m, o) in out.iter_mut().enumerate() {
                *o += phi * self.data[[k, j, m]];
            }
        }
    }

    /// Modes at the right end of element `k`, `u(x_{k+1}^-)`.
    pub fn trace_right(&self, k: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..=self.degree() {
            let phi = ortho_legendre_right(j);
            for (m, o) in out.iter_mut().enumerate() {
                *o += phi * self.data[[k, j, m]];
            }
        }
    }

    /// Modes at the left end of element `k`, `u(x_k^+)`.
    pub fn trace_left(&self, k: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..=self.degree() {
            let phi = ortho_legendre_left(j);
            for (m, o) in out.iter_mut().enumerate() {
                *o += phi * self.data[[k, j, m]];
            }
        }
    }

    /// Chaos modes at physical `x`; `side` picks the one-sided limit on vertices.
    pub fn modes_at_x(&self, x: f64, deriv: Derivative, side: Side) -> Vec<f64> {
        let (k, r) = self.space.mesh().locate(x, side);
        let mut out = vec![0.0; self.n_modes()];
        self.modes_at(k, r, deriv, &mut out);
        out
    }

    /// Pointwise value (or `d/dx`) of the chaos-expanded DG polynomial.
    pub fn eval(&self, x: f64, xi: f64, deriv: Derivative, side: Side) -> f64 {
        let modes = self.modes_at_x(x, deriv, side);
        self.basis.evaluate_series(&modes, xi)
    }

    /// Cell average of chaos mode `m` on element `k`.
    pub fn cell_mean(&self, k: usize, m: usize) -> f64 {
        self.data[[k, 0, m]] * std::f64::consts::FRAC_1_SQRT_2
    }

    /// `int E[u] dx` over the domain.
    pub fn total_mean(&self) -> f64 {
        let mesh = self.space.mesh();
        (0..self.n_elements())
            .map(|k| mesh.width(k) * self.cell_mean(k, 0))
            .sum()
    }

    /// `||u||^2_{L^2(domain x Omega)}` via orthonormality in `x` and `xi`.
    pub fn l2_norm_sq(&self) -> f64 {
        let mesh = self.space.mesh();
        (0..self.n_elements())
            .map(|k| {
                let h = mesh.width(k);
                0.5 * h
                    * self
                        .data
                        .slice(ndarray::s![k, .., ..])
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
            })
            .sum()
    }
}
