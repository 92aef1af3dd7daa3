use std::sync::Arc;

use crate::dg::mesh::Mesh1D;
use crate::quadrature::{legendre_with_derivative, GaussLegendre};

/// Default number of Gauss points per element.
pub const DEFAULT_SPACE_POINTS: usize = 25;

/// Orthonormal Legendre function on `[-1, 1]`: `sqrt((2j+1)/2) P_j(r)`.
pub fn ortho_legendre(j: usize, r: f64) -> f64 {
    scale(j) * legendre_with_derivative(j, r).0
}

/// Reference derivative `d/dr` of [`ortho_legendre`].
pub fn ortho_legendre_dr(j: usize, r: f64) -> f64 {
    scale(j) * legendre_with_derivative(j, r).1
}

/// `phi_j(1)`; `phi_j(-1) = (-1)^j phi_j(1)`.
pub fn ortho_legendre_right(j: usize) -> f64 {
    scale(j)
}

pub fn ortho_legendre_left(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        scale(j)
    } else {
        -scale(j)
    }
}

#[inline]
fn scale(j: usize) -> f64 {
    ((2 * j + 1) as f64 / 2.0).sqrt()
}

/// Tabulated orthonormal basis of degree `<= degree` at a set of reference points.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub degree: usize,
    pub points: Vec<f64>,
    /// `values[q * (degree+1) + j]`.
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl BasisTable {
    pub fn new(degree: usize, points: &[f64]) -> Self {
        let n = degree + 1;
        let mut values = vec![0.0; points.len() * n];
        let mut derivatives = vec![0.0; points.len() * n];
        for (q, &r) in points.iter().enumerate() {
            for j in 0..n {
                values[q * n + j] = ortho_legendre(j, r);
                derivatives[q * n + j] = ortho_legendre_dr(j, r);
            }
        }
        Self {
            degree,
            points: points.to_vec(),
            values,
            derivatives,
        }
    }

    #[inline]
    pub fn row(&self, q: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.values[q * n..(q + 1) * n]
    }

    #[inline]
    pub fn row_dr(&self, q: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.derivatives[q * n..(q + 1) * n]
    }
}

/// Broken polynomial space of degree `p` over a periodic mesh, with an
/// orthonormal modal basis per element.
#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: Mesh1D,
    degree: usize,
    quad: GaussLegendre,
    table: BasisTable,
}

impl DgSpace {
    pub fn new(mesh: Mesh1D, degree: usize) -> Arc<Self> {
        Self::with_quadrature(mesh, degree, DEFAULT_SPACE_POINTS)
    }

    pub fn with_quadrature(mesh: Mesh1D, degree: usize, n_points: usize) -> Arc<Self> {
        let quad = GaussLegendre::new(n_points.max(degree + 1));
        let table = BasisTable::new(degree, &quad.nodes);
        Arc::new(Self {
            mesh,
            degree,
            quad,
            table,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs_per_element(&self) -> usize {
        self.degree + 1
    }

    pub fn quadrature(&self) -> &GaussLegendre {
        &self.quad
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    /// Physical coordinate of reference point `r` in element `k`.
    pub fn to_physical(&self, k: usize, r: f64) -> f64 {
        self.mesh.x_left(k) + 0.5 * (r + 1.0) * self.mesh.width(k)
    }

    /// Element mass matrix in the modal basis; `(h/2) I` by orthonormality.
    pub fn mass_matrix(&self, k: usize) -> Vec<f64> {
        let n = self.degree + 1;
        let h = self.mesh.width(k);
        let mut m = vec![0.0; n * n];
        for (q, &w) in self.quad.weights.iter().enumerate() {
            let row = self.table.row(q);
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] += 0.5 * h * w * row[i] * row[j];
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_matrix_is_scaled_identity() {
        let mesh = Mesh1D::from_vertices(vec![0.0, 0.3, 1.0, 2.0]).unwrap();
        let space = DgSpace::new(mesh, 4);
        for k in 0..3 {
            let h = space.mesh().width(k);
            let m = space.mass_matrix(k);
            for i in 0..5 {
                for j in 0..5 {
                    let e = if i == j { 0.5 * h } else { 0.0 };
                    assert!((m[i * 5 + j] - e).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn endpoint_values() {
        for j in 0..6 {
            assert!((ortho_legendre(j, 1.0) - ortho_legendre_right(j)).abs() < 1e-14);
            assert!((ortho_legendre(j, -1.0) - ortho_legendre_left(j)).abs() < 1e-14);
        }
    }
}
