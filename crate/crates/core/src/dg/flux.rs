//! Interface fluxes of the form `G(u, v) = f(w(u, v))` with `w(u, u) = u`.

use std::fmt;
use std::str::FromStr;

use crate::basis::StochasticBasis;
use crate::error::Error;
use crate::sg::FluxLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericalFluxKind {
    /// `w(u, v) = u` (left trace); for positive wave speeds.
    Upwind,
    /// `w(u, v) = (u + v)/2 - dt/(2h) (f(v) - f(u))`.
    LaxWendroff,
}

impl FromStr for NumericalFluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upwind" => Ok(Self::Upwind),
            "lax-wendroff" | "lax_wendroff" | "laxwendroff" | "lw" => Ok(Self::LaxWendroff),
            other => Err(Error::Config(format!("unknown numerical flux `{other}`"))),
        }
    }
}

impl fmt::Display for NumericalFluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Upwind => write!(f, "upwind"),
            Self::LaxWendroff => write!(f, "lax-wendroff"),
        }
    }
}

/// Numerical flux bound to a flux law and the current step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalFlux {
    pub kind: NumericalFluxKind,
    pub law: FluxLaw,
    /// Step size entering the Lax–Wendroff trace; unused by upwind.
    pub dt: f64,
}

impl NumericalFlux {
    pub fn new(kind: NumericalFluxKind, law: FluxLaw, dt: f64) -> Self {
        Self { kind, law, dt }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    /// Interface state `w(u_minus, u_plus)`; `h` is the interface width.
    pub fn trace(&self, basis: &StochasticBasis, u_minus: &[f64], u_plus: &[f64], h: f64, out: &mut [f64]) {
        match self.kind {
            NumericalFluxKind::Upwind => out.copy_from_slice(u_minus),
            NumericalFluxKind::LaxWendroff => {
                let n = u_minus.len();
                let mut fm = vec![0.0; n];
                let mut fp = vec![0.0; n];
                self.law.sg_flux_into(basis, u_minus, &mut fm);
                self.law.sg_flux_into(basis, u_plus, &mut fp);
                let lambda = 0.5 * self.dt / h;
                for i in 0..n {
                    out[i] = 0.5 * (u_minus[i] + u_plus[i]) - lambda * (fp[i] - fm[i]);
                }
            }
        }
    }

    /// Trace `w` and its rate `dw/dt` given the rates of both arguments.
    #[allow(clippy::too_many_arguments)]
    pub fn trace_with_rate(
        &self,
        basis: &StochasticBasis,
        u_minus: &[f64],
        u_plus: &[f64],
        du_minus: &[f64],
        du_plus: &[f64],
        h: f64,
        w: &mut [f64],
        dw: &mut [f64],
    ) {
        match self.kind {
            NumericalFluxKind::Upwind => {
                w.copy_from_slice(u_minus);
                dw.copy_from_slice(du_minus);
            }
            NumericalFluxKind::LaxWendroff => {
                self.trace(basis, u_minus, u_plus, h, w);
                let n = u_minus.len();
                let mut jm = vec![0.0; n];
                let mut jp = vec![0.0; n];
                self.law.sg_jacobian_apply(basis, u_minus, du_minus, &mut jm);
                self.law.sg_jacobian_apply(basis, u_plus, du_plus, &mut jp);
                let lambda = 0.5 * self.dt / h;
                for i in 0..n {
                    dw[i] = 0.5 * (du_minus[i] + du_plus[i]) - lambda * (jp[i] - jm[i]);
                }
            }
        }
    }

    /// `G(u_minus, u_plus) = f(w(u_minus, u_plus))`.
    pub fn flux(&self, basis: &StochasticBasis, u_minus: &[f64], u_plus: &[f64], h: f64, out: &mut [f64]) {
        let mut w = vec![0.0; u_minus.len()];
        self.trace(basis, u_minus, u_plus, h, &mut w);
        self.law.sg_flux_into(basis, &w, out);
    }
}
