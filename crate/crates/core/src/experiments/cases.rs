//! The registered test cases with their exact solutions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::basis::UniformDistribution;
use crate::dg::{NumericalFluxKind, ProjectionMethod};
use crate::error::{Error, Result};
use crate::sg::{FluxLaw, RandomField};
use crate::time::SchemeKind;

/// Kink locations in `x` of the exact solution at `(t, xi)`.
pub type KinkFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

/// Discretization defaults of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseDefaults {
    pub elements: usize,
    pub dt: f64,
    pub chaos_degree: usize,
    pub dg_degree: usize,
    pub flux: NumericalFluxKind,
    pub limiter: bool,
    pub tvb: f64,
    pub reconstruction_start: f64,
    pub projection: ProjectionMethod,
    pub scheme: SchemeKind,
}

#[derive(Clone)]
pub struct TestCase {
    pub name: &'static str,
    pub description: &'static str,
    pub domain: (f64, f64),
    pub t_end: f64,
    pub law: FluxLaw,
    pub distribution: UniformDistribution,
    pub initial: RandomField,
    pub source: RandomField,
    pub exact: Option<RandomField>,
    pub kinks: Option<KinkFn>,
    /// A priori bound on `|u|`.
    pub m3: f64,
    pub defaults: CaseDefaults,
}

impl fmt::Debug for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_end", &self.t_end)
            .field("law", &self.law)
            .field("distribution", &self.distribution)
            .field("has_exact", &self.exact.is_some())
            .field("defaults", &self.defaults)
            .finish()
    }
}

impl TestCase {
    pub fn period(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    /// Kinks of the exact solution at time `t`, as a function of `xi`.
    pub fn kinks_at(&self, t: f64) -> Option<impl Fn(f64) -> Vec<f64> + '_> {
        self.kinks.as_ref().map(|k| move |xi| k(t, xi))
    }

    /// Largest `|u_t + f'(u) u_x - S|` of the exact solution over a sample
    /// grid, by fourth-order central differences with step `delta`.
    /// Stencils that straddle a kink are skipped.
    pub fn pde_defect(&self, delta: f64) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let (a, b) = (self.distribution.lower(), self.distribution.upper());
        let d5 = |g: &dyn Fn(f64) -> f64, s: f64| {
            (g(s - 2.0 * delta) - 8.0 * g(s - delta) + 8.0 * g(s + delta) - g(s + 2.0 * delta)) / (12.0 * delta)
        };
        let margin = 10.0 * delta * (1.0 + self.m3);
        let mut worst = 0.0f64;
        for it in 1..=4 {
            let t = self.t_end * it as f64 / 4.0 - 3.0 * delta;
            for ix in 0..23 {
                let x = self.domain.0 + self.period() * (ix as f64 + 0.37) / 23.0;
                for ixi in 0..5 {
                    let xi = a + (b - a) * (ixi as f64 + 0.5) / 5.0;
                    if let Some(k) = &self.kinks {
                        let near = k(t, xi).into_iter().any(|c| {
                            let d = (x - c).rem_euclid(self.period());
                            d.min(self.period() - d) < margin
                        });
                        if near {
                            continue;
                        }
                    }
                    let u = exact.eval(t, x, xi);
                    let ut = d5(&|s| exact.eval(s, x, xi), t);
                    let ux = d5(&|s| exact.eval(t, s, xi), x);
                    let r = ut + self.law.df(u) * ux - self.source.eval(t, x, xi);
                    worst = worst.max(r.abs());
                }
            }
        }
        Some(worst)
    }
}

fn advection() -> TestCase {
    let exact = RandomField::new(|t, x, xi| xi * (1.0 - 0.5 * (PI * (x - 2.0 * t)).cos())).with_xi_degree(1);
    TestCase {
        name: "advection",
        description: "linear advection u_t + 2 u_x = 0 on [0,2], u0 = xi (1 - cos(pi x)/2), xi ~ U[1,3]",
        domain: (0.0, 2.0),
        t_end: 0.2,
        law: FluxLaw::LinearAdvection { speed: 2.0 },
        distribution: UniformDistribution::new(1.0, 3.0).expect("valid"),
        initial: RandomField::new(|_, x, xi| xi * (1.0 - 0.5 * (PI * x).cos())).with_xi_degree(1),
        source: RandomField::zero(),
        exact: Some(exact),
        kinks: None,
        m3: 4.5,
        defaults: CaseDefaults {
            elements: 16,
            dt: 0.02,
            chaos_degree: 2,
            dg_degree: 2,
            flux: NumericalFluxKind::Upwind,
            limiter: false,
            tvb: 0.0,
            reconstruction_start: 0.0,
            projection: ProjectionMethod::RadauPlus,
            scheme: SchemeKind::Rk37,
        },
    }
}

/// Source making `xi cos(pi (x - xi t))` an exact solution of Burgers' equation.
pub fn burgers_source(t: f64, x: f64, xi: f64) -> f64 {
    let th = PI * (x - xi * t);
    PI * xi * xi * th.sin() * (1.0 - th.cos())
}

/// [`burgers_source`] on a tensor grid, with the phase split by angle addition.
fn burgers_source_grid(t: f64, xs: &[f64], xis: &[f64], out: &mut [f64]) {
    let sc_xi: Vec<(f64, f64, f64)> = xis
        .iter()
        .map(|&xi| {
            let (s, c) = (PI * xi * t).sin_cos();
            (s, c, PI * xi * xi)
        })
        .collect();
    for (row, &x) in out.chunks_exact_mut(xis.len()).zip(xs) {
        let (sx, cx) = (PI * x).sin_cos();
        for (o, &(s, c, a)) in row.iter_mut().zip(&sc_xi) {
            let sin = sx * c - cx * s;
            let cos = cx * c + sx * s;
            *o = a * sin * (1.0 - cos);
        }
    }
}

fn burgers(name: &'static str, description: &'static str, t_end: f64, n: usize, limiter: bool) -> TestCase {
    TestCase {
        name,
        description,
        domain: (0.0, 2.0),
        t_end,
        law: FluxLaw::Burgers,
        distribution: UniformDistribution::new(1.0, 3.0).expect("valid"),
        initial: RandomField::new(|_, x, xi| xi * (PI * x).cos()).with_xi_degree(1),
        source: RandomField::new(burgers_source).with_grid(burgers_source_grid),
        exact: Some(RandomField::new(|t, x, xi| xi * (PI * (x - xi * t)).cos())),
        kinks: None,
        m3: 3.0,
        defaults: CaseDefaults {
            elements: 16,
            dt: 0.008,
            chaos_degree: n,
            dg_degree: 2,
            flux: NumericalFluxKind::LaxWendroff,
            limiter,
            tvb: 0.0,
            reconstruction_start: 0.008,
            projection: ProjectionMethod::GaussLegendreInterp,
            scheme: SchemeKind::Rk37,
        },
    }
}

/// Periodic Riemann solution on `[-1, 1]`: a shock from `x = 0` and a
/// rarefaction fan from the wrapped jump at `x = -1`.
pub fn riemann_exact(t: f64, x: f64, xi: f64) -> f64 {
    let x = (x + 1.0).rem_euclid(2.0) - 1.0;
    let (low, high) = (0.5 + xi, 1.0 + xi);
    let shock = (0.75 + xi) * t;
    if x < -1.0 + low * t {
        low
    } else if x < -1.0 + high * t {
        (x + 1.0) / t
    } else if x <= shock {
        high
    } else {
        low
    }
}

fn riemann() -> TestCase {
    TestCase {
        name: "riemann",
        description: "Burgers Riemann problem on [-1,1], u0 = 1 + xi (x <= 0), 0.5 + xi (x > 0), xi ~ U[-0.2,0.2]",
        domain: (-1.0, 1.0),
        t_end: 0.1,
        law: FluxLaw::Burgers,
        distribution: UniformDistribution::new(-0.2, 0.2).expect("valid"),
        initial: RandomField::new(|_, x, xi| riemann_exact(0.0, x, xi)),
        source: RandomField::zero(),
        exact: Some(RandomField::new(riemann_exact)),
        kinks: Some(Arc::new(|t, xi| {
            vec![-1.0 + (0.5 + xi) * t, -1.0 + (1.0 + xi) * t, (0.75 + xi) * t]
        })),
        m3: 1.2,
        defaults: CaseDefaults {
            elements: 512,
            dt: 0.0005,
            chaos_degree: 4,
            dg_degree: 2,
            flux: NumericalFluxKind::Upwind,
            limiter: true,
            tvb: 0.0,
            reconstruction_start: 0.0,
            projection: ProjectionMethod::RadauPlus,
            scheme: SchemeKind::Rk37,
        },
    }
}

/// All registered cases.
pub fn registry() -> Vec<TestCase> {
    vec![
        advection(),
        burgers(
            "burgers_smooth",
            "Burgers with manufactured source on [0,2], exact xi cos(pi (x - xi t)), T = 0.2",
            0.2,
            4,
            false,
        ),
        burgers(
            "burgers_artificial_shock",
            "same data as burgers_smooth up to T = 0.56 with the slope limiter",
            0.56,
            1,
            true,
        ),
        riemann(),
    ]
}

/// Looks a case up by name and checks its exact solution against the PDE.
pub fn lookup(name: &str) -> Result<TestCase> {
    let case = registry()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
    if let Some(defect) = case.pde_defect(1e-3) {
        if defect > 1e-8 {
            return Err(Error::Config(format!(
                "exact solution of `{name}` violates the PDE by {defect:.3e}"
            )));
        }
    }
    Ok(case)
}

pub fn case_names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cases_with_consistent_exact_solutions() {
        assert_eq!(case_names(), ["advection", "burgers_smooth", "burgers_artificial_shock", "riemann"]);
        for case in registry() {
            let d = case.pde_defect(1e-3).expect("every case has an exact solution");
            assert!(d <= 1e-8, "{}: {d}", case.name);
            // initial data and exact solution agree at t = 0
            for &x in &[case.domain.0 + 0.13, case.domain.0 + 0.91, case.domain.1 - 0.2] {
                let xi = case.distribution.mean() + 0.1 * case.distribution.variance().sqrt();
                let e = case.exact.as_ref().unwrap().eval(0.0, x, xi);
                assert!((e - case.initial.eval(0.0, x, xi)).abs() < 1e-14);
            }
        }
        assert!(matches!(lookup("nope"), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn sample_values() {
        let adv = lookup("advection").unwrap();
        assert!((adv.exact.unwrap().eval(0.1, 0.2, 2.0) - 1.0).abs() < 1e-15);
        let r = lookup("riemann").unwrap();
        let e = r.exact.unwrap();
        assert!((e.eval(0.1, 0.0, 0.1) - 1.1).abs() < 1e-15);
        assert!((e.eval(0.1, 0.5, 0.1) - 0.6).abs() < 1e-15);
        // inside the fan from the wrapped jump
        assert!((e.eval(0.1, -1.0 + 0.1, 0.1) - 1.0).abs() < 1e-14);
    }

    // Source-free conservation laws keep the total mass; this catches wrong
    // shock speeds, which the pointwise defect cannot see.
    #[test]
    fn source_free_exact_solutions_conserve_mass() {
        for case in registry().into_iter().filter(|c| c.source.is_zero()) {
            let exact = case.exact.clone().unwrap();
            let xi = case.distribution.mean() + 0.3 * case.distribution.variance().sqrt();
            let n = 200_000;
            let mass = |t: f64| {
                let h = case.period() / n as f64;
                (0..n).map(|i| exact.eval(t, case.domain.0 + (i as f64 + 0.5) * h, xi)).sum::<f64>() * h
            };
            let m0 = mass(0.0);
            let m1 = mass(case.t_end);
            assert!((m0 - m1).abs() < 1e-4, "{}: {m0} vs {m1}", case.name);
        }
    }

    #[test]
    fn a_wrong_source_is_detected() {
        let mut case = lookup("burgers_smooth").unwrap();
        case.source = RandomField::new(|t, x, xi| -burgers_source(t, x, xi));
        assert!(case.pde_defect(1e-3).unwrap() > 1.0);
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let xs = [0.0, 0.37, 1.3, 1.999];
        let xis = [1.0, 1.7, 2.4, 3.0];
        for case in registry() {
            for t in [0.0, 0.13, case.t_end] {
                let mut grid = vec![0.0; xs.len() * xis.len()];
                case.source.eval_grid(t, &xs, &xis, &mut grid);
                for (i, &x) in xs.iter().enumerate() {
                    for (j, &xi) in xis.iter().enumerate() {
                        let v = case.source.eval(t, x, xi);
                        assert!((grid[i * xis.len() + j] - v).abs() < 1e-12 * (1.0 + v.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn burgers_source_value() {
        // theta = 0.25 pi: pi * 4 * sin * (1 - cos)
        let s = burgers_source(0.0, 0.25, 2.0);
        let expect = PI * 4.0 * (PI / 4.0).sin() * (1.0 - (PI / 4.0).cos());
        assert!((s - expect).abs() < 1e-14);
    }
}
