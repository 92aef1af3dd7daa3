//! Lipschitz space-time reconstruction of the fully discrete solution.
//!
//! In time, each interval carries the cubic Hermite interpolant of the
//! iterates and their `L_h` values. In space, each element is lifted to
//! degree `p + 1`: the lift keeps the moments against `P_{p-1}` and takes
//! the interface value `w(u^-, u^+)` of the numerical flux at both ends,
//! which makes it globally continuous.

use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Array3};

use crate::basis::StochasticBasis;
use crate::dg::space::{ortho_legendre, ortho_legendre_dr, ortho_legendre_left, ortho_legendre_right, BasisTable};
use crate::dg::{DgSpace, NumericalFlux, SgField, Side};
use crate::error::{Error, Result};
use crate::time::Trajectory;

/// Which quantity of the reconstruction to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Value,
    Dt,
    Dx,
}

/// Cubic Hermite basis on `[0, 1]` and its derivative.
fn hermite(s: f64) -> ([f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2],
        [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s],
    )
}

/// Piecewise-cubic-in-time reconstruction over `[t_start, T]`.
#[derive(Debug, Clone)]
pub struct TemporalReconstruction<'a> {
    traj: &'a Trajectory,
    start_node: usize,
}

pub fn temporal_reconstruct(traj: &Trajectory) -> Result<TemporalReconstruction<'_>> {
    TemporalReconstruction::new(traj, 0)
}

impl<'a> TemporalReconstruction<'a> {
    /// Reconstruction starting at trajectory node `start_node`.
    pub fn new(traj: &'a Trajectory, start_node: usize) -> Result<Self> {
        if let Some(n) = traj.derivatives.iter().position(Option::is_none) {
            return Err(Error::MissingDerivative(n));
        }
        if traj.derivatives.len() != traj.states.len() {
            return Err(Error::MissingDerivative(traj.derivatives.len()));
        }
        Ok(Self {
            traj,
            start_node: start_node.min(traj.times.len() - 1),
        })
    }

    pub fn trajectory(&self) -> &'a Trajectory {
        self.traj
    }

    pub fn start_node(&self) -> usize {
        self.start_node
    }

    pub fn start(&self) -> f64 {
        self.traj.times[self.start_node]
    }

    pub fn end(&self) -> f64 {
        self.traj.final_time()
    }

    /// Interval `n` with `t in [t_n, t_{n+1}]`.
    pub fn interval_of(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.start(), self.end());
        let tol = 1e-12 * end.abs().max(1.0);
        if t < start - tol || t > end + tol {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        let times = &self.traj.times;
        if times.len() < 2 {
            return Ok(0);
        }
        let n = times.partition_point(|&ti| ti <= t).saturating_sub(1);
        Ok(n.clamp(self.start_node, times.len() - 2))
    }

    /// Coefficients of `u^t(t)` and `d/dt u^t(t)`.
    pub fn eval(&self, t: f64) -> Result<(SgField, SgField)> {
        let times = &self.traj.times;
        if times.len() < 2 {
            let u = self.traj.states[0].clone();
            let rate = u.with_data(Array3::zeros(u.data().dim()));
            return Ok((u, rate));
        }
        let n = self.interval_of(t)?;
        let dt = times[n + 1] - times[n];
        let s = ((t - times[n]) / dt).clamp(0.0, 1.0);
        let (h, dh) = hermite(s);
        let u0 = self.traj.states[n].data();
        let u1 = self.traj.states[n + 1].data();
        let d0 = self.traj.derivatives[n].as_ref().expect("checked").data();
        let d1 = self.traj.derivatives[n + 1].as_ref().expect("checked").data();
        let mut value = Array3::<f64>::zeros(u0.dim());
        value.scaled_add(h[0], u0);
        value.scaled_add(h[1] * dt, d0);
        value.scaled_add(h[2], u1);
        value.scaled_add(h[3] * dt, d1);
        let mut rate = Array3::<f64>::zeros(u0.dim());
        rate.scaled_add(dh[0] / dt, u0);
        rate.scaled_add(dh[1], d0);
        rate.scaled_add(dh[2] / dt, u1);
        rate.scaled_add(dh[3], d1);
        let proto = &self.traj.states[n];
        Ok((proto.with_data(value), proto.with_data(rate)))
    }

    /// Step length of the interval containing `t`.
    pub fn step_at(&self, t: f64) -> Result<f64> {
        if self.traj.times.len() < 2 {
            return Ok(self.traj.flux.dt);
        }
        Ok(self.traj.step(self.interval_of(t)?))
    }
}

/// The elementwise `(p+2) x (p+2)` lifting system, inverted once per degree.
///
/// Unknowns are the `p + 2` modal coefficients; rows are the `p` moment
/// conditions followed by the left and right trace conditions.
#[derive(Debug, Clone)]
pub struct LiftingOperator {
    degree: usize,
    inverse: Vec<f64>,
}

impl LiftingOperator {
    pub fn new(degree: usize) -> Result<Self> {
        let n = degree + 2;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..degree {
            // int phi_i phi_j dr = delta_ij
            a[(j, j)] = 1.0;
        }
        for i in 0..n {
            a[(degree, i)] = ortho_legendre_left(i);
            a[(degree + 1, i)] = ortho_legendre_right(i);
        }
        let inv = a.try_inverse().ok_or(Error::SingularLifting(degree))?;
        let mut inverse = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                inverse[i * n + j] = inv[(i, j)];
            }
        }
        Ok(Self { degree, inverse })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Lifted coefficients from the low moments `c[0..p]` and the traces.
    pub fn apply(&self, moments: &[f64], left: f64, right: f64, out: &mut [f64]) {
        let n = self.degree + 2;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.inverse[i * n..(i + 1) * n];
            let mut acc = row[self.degree] * left + row[self.degree + 1] * right;
            for j in 0..self.degree {
                acc += row[j] * moments[j];
            }
            *o = acc;
        }
    }
}

/// A continuous degree-`p+1` field on the DG mesh, with optional time rate.
#[derive(Debug, Clone)]
pub struct LiftedField {
    space: Arc<DgSpace>,
    basis: Arc<StochasticBasis>,
    /// `[element][mode 0..=p+1][chaos mode]`.
    pub value: Array3<f64>,
    pub rate: Option<Array3<f64>>,
}

impl LiftedField {
    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn basis(&self) -> &Arc<StochasticBasis> {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.value.dim().1 - 1
    }

    /// Chaos modes of the requested quantity at reference point `r` of element `k`.
    pub fn modes_at(&self, k: usize, r: f64, which: Quantity, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let jac = 2.0 / self.space.mesh().width(k);
        let data = match which {
            Quantity::Dt => self.rate.as_ref().expect("reconstruction built without time rate"),
            _ => &self.value,
        };
        for j in 0..=self.degree() {
            let phi = match which {
                Quantity::Dx => jac * ortho_legendre_dr(j, r),
                _ => ortho_legendre(j, r),
            };
            for (m, o) in out.iter_mut().enumerate() {
                *o += phi * data[[k, j, m]];
            }
        }
    }

    pub fn modes_at_x(&self, x: f64, which: Quantity, side: Side) -> Vec<f64> {
        let (k, r) = self.space.mesh().locate(x, side);
        let mut out = vec![0.0; self.basis.n_modes()];
        self.modes_at(k, r, which, &mut out);
        out
    }

    /// Chaos modes at tabulated point `q`, using a precomputed degree-`p+1` table.
    pub fn modes_from_table(&self, k: usize, table: &BasisTable, q: usize, which: Quantity, out: &mut [f64]) {
        let nm = out.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        let (data, phi, scale) = match which {
            Quantity::Value => (&self.value, table.row(q), 1.0),
            Quantity::Dt => (self.rate.as_ref().expect("time rate"), table.row(q), 1.0),
            Quantity::Dx => (&self.value, table.row_dr(q), 2.0 / self.space.mesh().width(k)),
        };
        let slice = data.as_slice().expect("standard layout");
        let nd = self.degree() + 1;
        let base = &slice[k * nd * nm..(k + 1) * nd * nm];
        for (j, &p) in phi.iter().enumerate().take(nd) {
            let p = p * scale;
            for m in 0..nm {
                out[m] += p * base[j * nm + m];
            }
        }
    }
}

/// Interface states `w` (and their rates) at every vertex.
fn interface_states(
    ut: &SgField,
    rate: Option<&SgField>,
    flux: &NumericalFlux,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let mesh = ut.space().mesh();
    let basis = ut.basis();
    let n_el = mesh.n_elements();
    let nm = ut.n_modes();
    let mut w = vec![0.0; n_el * nm];
    let mut dw = rate.map(|_| vec![0.0; n_el * nm]);
    let (mut um, mut up) = (vec![0.0; nm], vec![0.0; nm]);
    let (mut dm, mut dp) = (vec![0.0; nm], vec![0.0; nm]);
    for i in 0..n_el {
        let km = mesh.prev(i);
        ut.trace_right(km, &mut um);
        ut.trace_left(i, &mut up);
        let h = mesh.interface_width(i);
        match (rate, dw.as_mut()) {
            (Some(r), Some(dw)) => {
                r.trace_right(km, &mut dm);
                r.trace_left(i, &mut dp);
                flux.trace_with_rate(
                    basis,
                    &um,
                    &up,
                    &dm,
                    &dp,
                    h,
                    &mut w[i * nm..(i + 1) * nm],
                    &mut dw[i * nm..(i + 1) * nm],
                );
            }
            _ => flux.trace(basis, &um, &up, h, &mut w[i * nm..(i + 1) * nm]),
        }
    }
    (w, dw)
}

fn lift(ut: &SgField, w: &[f64], lifting: &LiftingOperator) -> Array3<f64> {
    let mesh = ut.space().mesh();
    let n_el = mesh.n_elements();
    let p = ut.degree();
    let nm = ut.n_modes();
    let mut out = Array3::<f64>::zeros((n_el, p + 2, nm));
    let mut moments = vec![0.0; p];
    let mut coeffs = vec![0.0; p + 2];
    let data = ut.data();
    for k in 0..n_el {
        let kn = mesh.next(k);
        for m in 0..nm {
            for (j, mo) in moments.iter_mut().enumerate() {
                *mo = data[[k, j, m]];
            }
            lifting.apply(&moments, w[k * nm + m], w[kn * nm + m], &mut coeffs);
            for (j, c) in coeffs.iter().enumerate() {
                out[[k, j, m]] = *c;
            }
        }
    }
    out
}

/// Spatial reconstruction of a single DG field (no time rate).
pub fn spatial_reconstruct(ut: &SgField, flux: &NumericalFlux) -> Result<LiftedField> {
    let lifting = LiftingOperator::new(ut.degree())?;
    Ok(spatial_reconstruct_with(ut, None, flux, &lifting))
}

/// Spatial reconstruction of `ut` and, when given, of its time rate.
pub fn spatial_reconstruct_with(
    ut: &SgField,
    rate: Option<&SgField>,
    flux: &NumericalFlux,
    lifting: &LiftingOperator,
) -> LiftedField {
    let (w, dw) = interface_states(ut, rate, flux);
    let value = lift(ut, &w, lifting);
    let rate = match (rate, dw) {
        (Some(r), Some(dw)) => Some(lift(r, &dw, lifting)),
        _ => None,
    };
    LiftedField {
        space: ut.space().clone(),
        basis: ut.basis().clone(),
        value,
        rate,
    }
}

/// Space-time reconstruction, queried at arbitrary times.
#[derive(Debug, Clone)]
pub struct SpaceTimeReconstruction<'a> {
    temporal: TemporalReconstruction<'a>,
    lifting: LiftingOperator,
}

impl<'a> SpaceTimeReconstruction<'a> {
    pub fn new(temporal: TemporalReconstruction<'a>) -> Result<Self> {
        let p = temporal.trajectory().states[0].degree();
        Ok(Self {
            temporal,
            lifting: LiftingOperator::new(p)?,
        })
    }

    /// Reconstruction whose origin is the trajectory node nearest `start`.
    pub fn from_trajectory(traj: &'a Trajectory, start: f64) -> Result<Self> {
        let node = traj.nearest_node(start);
        Self::new(TemporalReconstruction::new(traj, node)?)
    }

    pub fn temporal(&self) -> &TemporalReconstruction<'a> {
        &self.temporal
    }

    pub fn start(&self) -> f64 {
        self.temporal.start()
    }

    pub fn end(&self) -> f64 {
        self.temporal.end()
    }

    pub fn basis(&self) -> &Arc<StochasticBasis> {
        self.temporal.trajectory().states[0].basis()
    }

    /// The lifted field (with time rate) at time `t`.
    pub fn at(&self, t: f64) -> Result<LiftedField> {
        let (value, rate) = self.temporal.eval(t)?;
        let flux = self.temporal.trajectory().flux.with_dt(self.temporal.step_at(t)?);
        Ok(spatial_reconstruct_with(&value, Some(&rate), &flux, &self.lifting))
    }

    /// Chaos-expanded value, `d/dt` or `d/dx` at `(t, x, xi)`.
    pub fn eval_sts(&self, t: f64, x: f64, xi: f64, which: Quantity) -> Result<f64> {
        let field = self.at(t)?;
        let modes = field.modes_at_x(x, which, Side::Plus);
        Ok(self.basis().evaluate_series(&modes, xi))
    }

    /// Sampled `sup |d/dx u^sts(t)|` over `n_x` Gauss points plus both
    /// endpoints of every element and `n_xi` Gauss points plus both ends
    /// of the parameter interval.
    pub fn lipschitz_bound_dx(&self, t: f64, n_x: usize, n_xi: usize) -> Result<f64> {
        let field = self.at(t)?;
        Ok(lipschitz_bound_dx(&field, n_x, n_xi))
    }
}

/// Precomputed sample grid for `sup |d/dx u^sts|`: `n_x` Gauss points plus
/// both endpoints of every element, `n_xi` Gauss points plus both ends of
/// the parameter interval.
#[derive(Debug, Clone)]
pub struct LipschitzSampler {
    table: BasisTable,
    /// `[chaos mode][xi sample]`.
    psi_t: Array2<f64>,
    dx: Array2<f64>,
    values: Array2<f64>,
}

impl LipschitzSampler {
    pub fn new(lifted_degree: usize, basis: &StochasticBasis, n_x: usize, n_xi: usize) -> Self {
        let dist = *basis.distribution();
        let nm = basis.n_modes();
        let mut xi_samples: Vec<f64> = crate::basis::gauss_quadrature(n_xi.max(1), &dist)
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        xi_samples.push(dist.lower());
        xi_samples.push(dist.upper());
        let mut psi_t = Array2::<f64>::zeros((nm, xi_samples.len()));
        let mut row = vec![0.0; nm];
        for (s, &xi) in xi_samples.iter().enumerate() {
            basis.eval_all(xi, &mut row);
            for m in 0..nm {
                psi_t[[m, s]] = row[m];
            }
        }
        let mut points = crate::quadrature::GaussLegendre::new(n_x.max(1)).nodes;
        points.push(-1.0);
        points.push(1.0);
        let n_pts = points.len();
        let n_xi_total = xi_samples.len();
        Self {
            table: BasisTable::new(lifted_degree, &points),
            psi_t,
            dx: Array2::zeros((n_pts, nm)),
            values: Array2::zeros((n_pts, n_xi_total)),
        }
    }

    pub fn sup_dx(&mut self, field: &LiftedField) -> f64 {
        let mut sup = 0.0f64;
        let n_pts = self.dx.nrows();
        for k in 0..field.space().mesh().n_elements() {
            for q in 0..n_pts {
                let row = self.dx.row_mut(q).into_slice().expect("contiguous row");
                field.modes_from_table(k, &self.table, q, Quantity::Dx, row);
            }
            general_mat_mul(1.0, &self.dx, &self.psi_t, 0.0, &mut self.values);
            sup = self.values.iter().fold(sup, |a, v| a.max(v.abs()));
        }
        sup
    }
}

/// Sampled sup norm of `d/dx` of a lifted field over space and parameter.
pub fn lipschitz_bound_dx(field: &LiftedField, n_x: usize, n_xi: usize) -> f64 {
    LipschitzSampler::new(field.degree(), field.basis(), n_x, n_xi).sup_dx(field)
}
