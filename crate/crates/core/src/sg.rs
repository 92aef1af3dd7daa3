//! Stochastic Galerkin flux, source and data assembly.

use std::fmt;
use std::sync::Arc;

use crate::basis::StochasticBasis;

/// Scalar flux law. The SG flux of each law is computed in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxLaw {
    /// `f(u) = a u`.
    LinearAdvection { speed: f64 },
    /// `f(u) = u^2 / 2`.
    Burgers,
}

impl FluxLaw {
    pub fn f(&self, u: f64) -> f64 {
        match *self {
            FluxLaw::LinearAdvection { speed } => speed * u,
            FluxLaw::Burgers => 0.5 * u * u,
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match *self {
            FluxLaw::LinearAdvection { speed } => speed,
            FluxLaw::Burgers => u,
        }
    }

    pub fn d2f(&self, _u: f64) -> f64 {
        match *self {
            FluxLaw::LinearAdvection { .. } => 0.0,
            FluxLaw::Burgers => 1.0,
        }
    }

    /// SG flux `f(u)_k = E[f(sum u_n Psi_n) Psi_k]`, written into `out`.
    pub fn sg_flux_into(&self, basis: &StochasticBasis, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), basis.n_modes());
        match *self {
            FluxLaw::LinearAdvection { speed } => {
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = speed * v;
                }
            }
            FluxLaw::Burgers => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = 0.5 * quadratic_form(basis, k, u, u);
                }
            }
        }
    }

    pub fn sg_flux(&self, basis: &StochasticBasis, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.sg_flux_into(basis, u, &mut out);
        out
    }

    /// Chaos mode `l` of `f(sum_{k<=N} u_k Psi_k)`, including modes beyond `N`.
    pub fn sg_flux_exact_mode(&self, basis: &StochasticBasis, u: &[f64], l: usize) -> f64 {
        match *self {
            FluxLaw::LinearAdvection { speed } => {
                if l < u.len() {
                    speed * u[l]
                } else {
                    0.0
                }
            }
            FluxLaw::Burgers => {
                if l > 2 * basis.max_degree() {
                    0.0
                } else {
                    0.5 * quadratic_form(basis, l, u, u)
                }
            }
        }
    }

    /// Mode `l` of `d/dx f(u)` given the modes of `u` and `u_x`.
    ///
    /// For Burgers this is `u^T C_l u_x`; modes beyond `2N` vanish.
    pub fn sg_flux_divergence_mode(
        &self,
        basis: &StochasticBasis,
        u: &[f64],
        u_x: &[f64],
        l: usize,
    ) -> f64 {
        match *self {
            FluxLaw::LinearAdvection { speed } => {
                if l < u_x.len() {
                    speed * u_x[l]
                } else {
                    0.0
                }
            }
            FluxLaw::Burgers => {
                if l > 2 * basis.max_degree() {
                    0.0
                } else {
                    quadratic_form(basis, l, u, u_x)
                }
            }
        }
    }

    /// `J(u) v` where `J` is the Jacobian of the SG flux.
    pub fn sg_jacobian_apply(&self, basis: &StochasticBasis, u: &[f64], v: &[f64], out: &mut [f64]) {
        match *self {
            FluxLaw::LinearAdvection { speed } => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = speed * x;
                }
            }
            FluxLaw::Burgers => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = quadratic_form(basis, k, u, v);
                }
            }
        }
    }
}

/// `u^T C_k v` using the sparse upper triangle of the symmetric `C_k`.
#[inline]
fn quadratic_form(basis: &StochasticBasis, k: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for e in basis.triple_sparse(k) {
        if e.i == e.j {
            acc += e.value * u[e.i] * v[e.i];
        } else {
            acc += e.value * (u[e.i] * v[e.j] + u[e.j] * v[e.i]);
        }
    }
    acc
}

type FieldFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
type GridFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A deterministic function of `(t, x, xi)`: initial data, source or exact solution.
#[derive(Clone)]
pub struct RandomField {
    eval: Arc<FieldFn>,
    grid: Option<Arc<GridFn>>,
    is_zero: bool,
    xi_degree: Option<usize>,
}

impl fmt::Debug for RandomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomField")
            .field("is_zero", &self.is_zero)
            .field("xi_degree", &self.xi_degree)
            .field("has_grid", &self.grid.is_some())
            .finish_non_exhaustive()
    }
}

impl RandomField {
    pub fn new(eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            grid: None,
            is_zero: false,
            xi_degree: None,
        }
    }

    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_, _, _| 0.0),
            grid: None,
            is_zero: true,
            xi_degree: Some(0),
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self::new(move |_, _, _| c).with_xi_degree(0)
    }

    /// Marks the field as a polynomial of the given degree in `xi`.
    pub fn with_xi_degree(mut self, degree: usize) -> Self {
        self.xi_degree = Some(degree);
        self
    }

    /// Attaches a faster evaluator over tensor grids, see [`Self::eval_grid`].
    /// It must agree with the pointwise function.
    pub fn with_grid(mut self, grid: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grid = Some(Arc::new(grid));
        self
    }

    /// Values at `(t, xs[i], xis[j])` into `out[i * xis.len() + j]`.
    pub fn eval_grid(&self, t: f64, xs: &[f64], xis: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), xs.len() * xis.len(), "grid output has the wrong length");
        if self.is_zero {
            out.fill(0.0);
            return;
        }
        if let Some(g) = &self.grid {
            g(t, xs, xis, out);
            return;
        }
        for (row, &x) in out.chunks_exact_mut(xis.len()).zip(xs) {
            for (o, &xi) in row.iter_mut().zip(xis) {
                *o = self.eval(t, x, xi);
            }
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64, xi: f64) -> f64 {
        (self.eval)(t, x, xi)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn xi_degree(&self) -> Option<usize> {
        self.xi_degree
    }

    /// Chaos mode `l` of the field at `(t, x)`; requires `l <= 2N`.
    pub fn project_mode(&self, basis: &StochasticBasis, t: f64, x: f64, l: usize) -> f64 {
        if self.is_zero {
            return 0.0;
        }
        basis
            .quadrature()
            .iter()
            .enumerate()
            .map(|(q, &(xi, w))| w * self.eval(t, x, xi) * basis.psi_at_node(q, l))
            .sum()
    }

    /// Modes `0..nm` at every `xs[i]` into `out[i * nm..(i + 1) * nm]`, with
    /// `nm <= 2N + 1`. `scratch` is resized as needed.
    pub fn project_grid_into(
        &self,
        basis: &StochasticBasis,
        t: f64,
        xs: &[f64],
        nm: usize,
        scratch: &mut Vec<f64>,
        out: &mut [f64],
    ) {
        out.fill(0.0);
        if self.is_zero {
            return;
        }
        let quad = basis.quadrature();
        scratch.resize(xs.len() * quad.len(), 0.0);
        self.eval_grid(t, xs, basis.nodes(), scratch);
        for (vals, modes) in scratch.chunks_exact(quad.len()).zip(out.chunks_exact_mut(nm)) {
            for (q, (&v, &(_, w))) in vals.iter().zip(quad).enumerate() {
                let v = w * v;
                for (o, p) in modes.iter_mut().zip(basis.psi_row(q)) {
                    *o += v * p;
                }
            }
        }
    }

    /// Modes `0..out.len()` at `(t, x)`; `out.len() <= 2N + 1`.
    pub fn project_into(&self, basis: &StochasticBasis, t: f64, x: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if self.is_zero {
            return;
        }
        for (q, &(xi, w)) in basis.quadrature().iter().enumerate() {
            let v = w * self.eval(t, x, xi);
            let psi = basis.psi_row(q);
            for (o, p) in out.iter_mut().zip(psi) {
                *o += v * p;
            }
        }
    }
}
