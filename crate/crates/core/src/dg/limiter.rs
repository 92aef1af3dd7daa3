//! TVB minmod slope limiter, applied to each chaos mode separately.

use crate::dg::field::SgField;
use crate::dg::space::{ortho_legendre_left, ortho_legendre_right};

fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// TVB-modified minmod: returns `a` untouched when `|a| <= threshold`.
pub fn tvb_minmod(a: f64, b: f64, c: f64, threshold: f64) -> f64 {
    if a.abs() <= threshold {
        a
    } else {
        minmod3(a, b, c)
    }
}

/// Limits every cell whose edge variations disagree with the neighbouring
/// mean differences. Cell means are untouched; limited cells keep only
/// their (limited) linear part. The TVB threshold is `tvb_constant * h^2`.
pub fn apply_limiter(u: &SgField, tvb_constant: f64) -> SgField {
    let mut out = u.clone();
    let p = u.degree();
    if p == 0 {
        return out;
    }
    let mesh = u.space().mesh();
    let n_el = mesh.n_elements();
    let nm = u.n_modes();
    let slope_scale = ortho_legendre_right(1);
    let data = u.data();
    for m in 0..nm {
        for k in 0..n_el {
            let h = mesh.width(k);
            let threshold = tvb_constant * h * h;
            let mean = u.cell_mean(k, m);
            let d_plus = u.cell_mean(mesh.next(k), m) - mean;
            let d_minus = mean - u.cell_mean(mesh.prev(k), m);
            let (mut right, mut left) = (0.0, 0.0);
            for j in 0..=p {
                right += data[[k, j, m]] * ortho_legendre_right(j);
                left += data[[k, j, m]] * ortho_legendre_left(j);
            }
            let var_r = right - mean;
            let var_l = mean - left;
            if tvb_minmod(var_r, d_plus, d_minus, threshold) == var_r
                && tvb_minmod(var_l, d_plus, d_minus, threshold) == var_l
            {
                continue;
            }
            let slope = data[[k, 1, m]] * slope_scale;
            let limited = tvb_minmod(slope, d_plus, d_minus, threshold);
            let d = out.data_mut();
            d[[k, 1, m]] = limited / slope_scale;
            for j in 2..=p {
                d[[k, j, m]] = 0.0;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{StochasticBasis, UniformDistribution};
    use crate::dg::mesh::Mesh1D;
    use crate::dg::space::DgSpace;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;
    use std::sync::Arc;

    fn field(n_el: usize, p: usize, n: usize) -> SgField {
        let space = DgSpace::new(Mesh1D::uniform(0.0, 1.0, n_el).unwrap(), p);
        let basis = Arc::new(StochasticBasis::new(UniformDistribution::new(-1.0, 1.0).unwrap(), n));
        SgField::zeros(space, basis)
    }

    #[test]
    fn opposite_signs_flatten_the_slope() {
        let mut u = field(3, 1, 0);
        let means = [0.0, 1.0, 0.0];
        for k in 0..3 {
            u.data_mut()[[k, 0, 0]] = means[k] * SQRT_2;
        }
        // edge variation +5 in the middle cell
        u.data_mut()[[1, 1, 0]] = 5.0 / ortho_legendre_right(1);
        let l = apply_limiter(&u, 0.0);
        assert_eq!(l.data()[[1, 1, 0]], 0.0);
        assert_eq!(l.cell_mean(1, 0), u.cell_mean(1, 0));
    }

    #[test]
    fn large_tvb_constant_bypasses() {
        let mut u = field(8, 2, 1);
        for k in 0..8 {
            let x = (k as f64 + 0.5) / 8.0;
            u.data_mut()[[k, 0, 0]] = (6.0 * x).sin();
            u.data_mut()[[k, 1, 0]] = 0.1 * (6.0 * x).cos();
            u.data_mut()[[k, 2, 1]] = 0.01;
        }
        let l = apply_limiter(&u, 1e6);
        assert_eq!(l.data(), u.data());
    }

    #[test]
    fn piecewise_constant_is_a_fixed_point() {
        let mut u = field(4, 2, 0);
        for k in 0..4 {
            u.data_mut()[[k, 0, 0]] = k as f64;
        }
        assert_eq!(apply_limiter(&u, 0.0).data(), u.data());
    }

    proptest! {
        #[test]
        fn preserves_means_and_is_idempotent(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 6 * 3 * 2),
            tvb in prop_oneof![Just(0.0), 0.0f64..50.0],
        ) {
            let mut u = field(6, 2, 1);
            u.data_mut().as_slice_mut().unwrap().copy_from_slice(&coeffs);
            let once = apply_limiter(&u, tvb);
            let twice = apply_limiter(&once, tvb);
            for k in 0..6 {
                for m in 0..2 {
                    prop_assert_eq!(once.cell_mean(k, m), u.cell_mean(k, m));
                }
            }
            for (a, b) in once.data().iter().zip(twice.data().iter()) {
                prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            }
        }
    }
}
