//! The semi-discrete DG right-hand side `L_h`.

use ndarray::Array3;

use crate::dg::field::SgField;
use crate::dg::flux::NumericalFlux;
use crate::dg::space::{ortho_legendre_left, ortho_legendre_right};
use crate::sg::RandomField;

/// `L_h(u)` at time `t`: the weak-form right-hand side tested against every
/// basis function and multiplied by the inverse (diagonal) mass matrix.
///
/// Interface jumps use `[psi]_i = psi(x_i^-) - psi(x_i^+)` with periodic
/// wraparound of the traces.
pub fn apply_lh(u: &SgField, flux: &NumericalFlux, source: &RandomField, t: f64) -> SgField {
    let space = u.space().clone();
    let basis = u.basis().clone();
    let mesh = space.mesh();
    let n_el = mesh.n_elements();
    let nd = space.degree() + 1;
    let nm = basis.n_modes();
    let coeffs = u.data().as_slice().expect("standard layout");

    let mut left = vec![0.0; n_el * nm];
    let mut right = vec![0.0; n_el * nm];
    for k in 0..n_el {
        u.trace_left(k, &mut left[k * nm..(k + 1) * nm]);
        u.trace_right(k, &mut right[k * nm..(k + 1) * nm]);
    }

    // flux at vertex i, between element i-1 and element i
    let mut g = vec![0.0; n_el * nm];
    for i in 0..n_el {
        let km = mesh.prev(i);
        flux.flux(
            &basis,
            &right[km * nm..(km + 1) * nm],
            &left[i * nm..(i + 1) * nm],
            mesh.interface_width(i),
            &mut g[i * nm..(i + 1) * nm],
        );
    }

    let quad = space.quadrature();
    let table = space.table();
    let mut out = Array3::<f64>::zeros((n_el, nd, nm));
    let out_slice = out.as_slice_mut().expect("standard layout");
    let mut uq = vec![0.0; nm];
    let mut fq = vec![0.0; nm];
    let has_source = !source.is_zero();
    let mut xs = vec![0.0; quad.nodes.len()];
    let mut sq = vec![0.0; quad.nodes.len() * nm];
    let mut scratch = Vec::new();
    for k in 0..n_el {
        let h = mesh.width(k);
        if has_source {
            for (x, &r) in xs.iter_mut().zip(&quad.nodes) {
                *x = space.to_physical(k, r);
            }
            source.project_grid_into(&basis, t, &xs, nm, &mut scratch, &mut sq);
        }
        let ck = &coeffs[k * nd * nm..(k + 1) * nd * nm];
        let rhs = &mut out_slice[k * nd * nm..(k + 1) * nd * nm];
        for (q, &w) in quad.weights.iter().enumerate() {
            let phi = table.row(q);
            let dphi = table.row_dr(q);
            uq.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..nd {
                let pj = phi[j];
                for m in 0..nm {
                    uq[m] += pj * ck[j * nm + m];
                }
            }
            flux.law.sg_flux_into(&basis, &uq, &mut fq);
            let sq = &sq[q * nm..(q + 1) * nm];
            for j in 0..nd {
                let a = w * dphi[j];
                let b = 0.5 * h * w * phi[j];
                for m in 0..nm {
                    rhs[j * nm + m] += a * fq[m];
                    if has_source {
                        rhs[j * nm + m] += b * sq[m];
                    }
                }
            }
        }
        let g_left = &g[k * nm..(k + 1) * nm];
        let kr = mesh.next(k);
        let g_right = &g[kr * nm..(kr + 1) * nm];
        let inv_mass = 2.0 / h;
        for j in 0..nd {
            let pr = ortho_legendre_right(j);
            let pl = ortho_legendre_left(j);
            for m in 0..nm {
                let v = rhs[j * nm + m] - g_right[m] * pr + g_left[m] * pl;
                rhs[j * nm + m] = inv_mass * v;
            }
        }
    }
    u.with_data(out)
}
