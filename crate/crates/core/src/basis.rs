//! Orthonormal Legendre chaos for a uniformly distributed random parameter.
//!
//! All inner products are expectations: quadrature weights are probability
//! weights summing to one, so `<g, h> = E[g h]`.

use crate::error::{Error, Result};
use crate::quadrature::{legendre, legendre_all, GaussLegendre};

/// Default number of stochastic quadrature points.
pub const DEFAULT_STOCHASTIC_POINTS: usize = 80;

/// `xi ~ U[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDistribution {
    lower: f64,
    upper: f64,
}

impl UniformDistribution {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidDistribution { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn density(&self) -> f64 {
        1.0 / (self.upper - self.lower)
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn variance(&self) -> f64 {
        (self.upper - self.lower).powi(2) / 12.0
    }

    /// Affine map of `[lower, upper]` onto the Legendre interval `[-1, 1]`.
    pub fn to_reference(&self, xi: f64) -> f64 {
        2.0 * (xi - self.lower) / (self.upper - self.lower) - 1.0
    }
}

/// Gauss–Legendre rule mapped to the support of `dist` with probability weights.
pub fn gauss_quadrature(n_points: usize, dist: &UniformDistribution) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(n_points);
    let mid = dist.mean();
    let half = 0.5 * (dist.upper - dist.lower);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| (mid + half * r, 0.5 * w))
        .collect()
}

/// Chaos modes `<g, Psi_m>` of a scalar function of `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticCoefficients {
    pub coeffs: Vec<f64>,
}

impl StochasticCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `(mean, variance)` read off the orthonormal expansion.
    pub fn moments(&self) -> (f64, f64) {
        let mean = self.coeffs.first().copied().unwrap_or(0.0);
        let variance = self.coeffs.iter().skip(1).map(|c| c * c).sum();
        (mean, variance)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Nonzero entry `C_k[i][j]` of the triple-product tensor, stored for `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Orthonormal basis `{Psi_0, .., Psi_N}` with quadrature tables and the
/// triple products `C_k[i][j] = E[Psi_i Psi_j Psi_k]`, `i, j <= N`, `k <= 2N`.
#[derive(Debug, Clone)]
pub struct StochasticBasis {
    dist: UniformDistribution,
    max_degree: usize,
    quad: Vec<(f64, f64)>,
    nodes: Vec<f64>,
    /// `psi_at_nodes[q * (2N+1) + n] = Psi_n(node_q)`.
    psi_at_nodes: Vec<f64>,
    /// Dense `C_k`, row-major `(N+1) x (N+1)`, for `k = 0..=2N`.
    triple: Vec<Vec<f64>>,
    /// Sparse upper triangle of each `C_k`.
    triple_sparse: Vec<Vec<TripleEntry>>,
}

impl StochasticBasis {
    pub fn new(dist: UniformDistribution, max_degree: usize) -> Self {
        Self::with_quadrature(dist, max_degree, DEFAULT_STOCHASTIC_POINTS)
    }

    /// The rule must integrate degree-`4N` polynomials exactly; `n_points`
    /// is raised to `2N + 1` if smaller.
    pub fn with_quadrature(dist: UniformDistribution, max_degree: usize, n_points: usize) -> Self {
        let n_points = n_points.max(2 * max_degree + 1);
        let quad = gauss_quadrature(n_points, &dist);
        let width = 2 * max_degree + 1;
        let mut psi_at_nodes = vec![0.0; quad.len() * width];
        for (q, &(xi, _)) in quad.iter().enumerate() {
            fill_psi(&dist, xi, &mut psi_at_nodes[q * width..(q + 1) * width]);
        }
        let nodes = quad.iter().map(|&(xi, _)| xi).collect();
        let mut basis = Self {
            dist,
            max_degree,
            quad,
            nodes,
            psi_at_nodes,
            triple: Vec::new(),
            triple_sparse: Vec::new(),
        };
        basis.triple = triple_products(&basis);
        basis.triple_sparse = basis
            .triple
            .iter()
            .map(|c| {
                let n = max_degree + 1;
                let mut entries = Vec::new();
                for i in 0..n {
                    for j in i..n {
                        let value = c[i * n + j];
                        if value.abs() > 1e-14 {
                            entries.push(TripleEntry { i, j, value });
                        }
                    }
                }
                entries
            })
            .collect();
        basis
    }

    pub fn distribution(&self) -> &UniformDistribution {
        &self.dist
    }

    /// Truncation degree `N`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of retained modes, `N + 1`.
    pub fn n_modes(&self) -> usize {
        self.max_degree + 1
    }

    pub fn quadrature(&self) -> &[(f64, f64)] {
        &self.quad
    }

    /// Quadrature nodes alone.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `Psi_n(xi)` for `n <= 2N`.
    pub fn eval(&self, n: usize, xi: f64) -> Result<f64> {
        let limit = 2 * self.max_degree;
        if n > limit {
            return Err(Error::DegreeOutOfRange { degree: n, limit });
        }
        Ok(psi(&self.dist, n, xi))
    }

    /// Fills `out[n] = Psi_n(xi)` for `n < out.len()`; no degree limit.
    pub fn eval_all(&self, xi: f64, out: &mut [f64]) {
        fill_psi(&self.dist, xi, out);
    }

    /// `Psi_n` at quadrature node `q`, `n <= 2N`.
    #[inline]
    pub fn psi_at_node(&self, q: usize, n: usize) -> f64 {
        self.psi_at_nodes[q * (2 * self.max_degree + 1) + n]
    }

    /// `Psi_0..Psi_2N` at quadrature node `q`.
    #[inline]
    pub fn psi_row(&self, q: usize) -> &[f64] {
        let w = 2 * self.max_degree + 1;
        &self.psi_at_nodes[q * w..(q + 1) * w]
    }

    /// Dense `C_k` as a row-major `(N+1)^2` slice.
    pub fn triple(&self, k: usize) -> &[f64] {
        &self.triple[k]
    }

    pub fn triple_entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.triple[k][i * self.n_modes() + j]
    }

    pub fn triple_sparse(&self, k: usize) -> &[TripleEntry] {
        &self.triple_sparse[k]
    }

    /// `coeffs[m] = sum_q w_q g(node_q) Psi_m(node_q)`, `m = 0..=N`.
    pub fn project(&self, g: impl Fn(f64) -> f64) -> StochasticCoefficients {
        let mut coeffs = vec![0.0; self.n_modes()];
        for (q, &(xi, w)) in self.quad.iter().enumerate() {
            let gw = w * g(xi);
            for (m, c) in coeffs.iter_mut().enumerate() {
                *c += gw * self.psi_at_node(q, m);
            }
        }
        StochasticCoefficients { coeffs }
    }

    /// `sum_m coeffs[m] Psi_m(xi)`.
    pub fn evaluate_series(&self, coeffs: &[f64], xi: f64) -> f64 {
        let mut psi = vec![0.0; coeffs.len()];
        self.eval_all(xi, &mut psi);
        coeffs.iter().zip(&psi).map(|(c, p)| c * p).sum()
    }
}

/// `E[Psi_i Psi_j Psi_k]` for `i, j <= N`, `k <= 2N`, by the basis quadrature.
pub fn triple_products(basis: &StochasticBasis) -> Vec<Vec<f64>> {
    let n = basis.n_modes();
    (0..=2 * basis.max_degree)
        .map(|k| {
            let mut c = vec![0.0; n * n];
            for (q, &(_, w)) in basis.quad.iter().enumerate() {
                let wk = w * basis.psi_at_node(q, k);
                for i in 0..n {
                    let wi = wk * basis.psi_at_node(q, i);
                    for j in i..n {
                        c[i * n + j] += wi * basis.psi_at_node(q, j);
                    }
                }
            }
            for i in 0..n {
                for j in 0..i {
                    c[i * n + j] = c[j * n + i];
                }
            }
            c
        })
        .collect()
}

fn psi(dist: &UniformDistribution, n: usize, xi: f64) -> f64 {
    ((2 * n + 1) as f64).sqrt() * legendre(n, dist.to_reference(xi))
}

fn fill_psi(dist: &UniformDistribution, xi: f64, out: &mut [f64]) {
    legendre_all(dist.to_reference(xi), out);
    for (n, v) in out.iter_mut().enumerate() {
        *v *= ((2 * n + 1) as f64).sqrt();
    }
}
