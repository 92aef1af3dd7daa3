//! Test-case registry, single runs and convergence studies.

pub mod cases;
pub mod config;
pub mod table;

use std::sync::Arc;
use std::time::Instant;

use crate::basis::StochasticBasis;
use crate::dg::{project_initial, DgSpace, Mesh1D, NumericalFlux};
use crate::error::{Error, Result};
use crate::estimator::{
    compute_bound, exact_error_sq, initial_error_split, reconstruction_gap_sq, residual_norms, EstimatorReport,
    ResidualReport,
};
use crate::reconstruction::SpaceTimeReconstruction;
use crate::time::{march, StepConfig, Trajectory};

pub use cases::{lookup, registry, TestCase};
pub use config::{OutputFormat, RefinementMode, RunConfig};
pub use table::ConvergenceRow;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub residuals: ResidualReport,
    pub estimator: EstimatorReport,
    pub row: ConvergenceRow,
}

/// March, reconstruct, evaluate residuals and the bound, and compare with
/// the exact solution when one is known.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    run_level(config, 0)
}

fn run_level(config: &RunConfig, level: usize) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let case = lookup(&config.case)?;
    let mesh = Mesh1D::uniform(case.domain.0, case.domain.1, config.elements)?;
    let h = mesh.max_width();
    let space = DgSpace::new(mesh, config.dg_degree);
    let basis = Arc::new(StochasticBasis::with_quadrature(
        case.distribution,
        config.chaos_degree,
        config.quadrature.n_stochastic,
    ));
    let u0 = project_initial(&case.initial, 0.0, &space, &basis, config.projection);
    let scheme = config.scheme.scheme();
    let flux = NumericalFlux::new(config.flux, case.law, config.dt);
    let step = StepConfig {
        scheme: &scheme,
        flux,
        source: &case.source,
        limiter: config.limiter.then_some(config.tvb),
    };
    log::info!(
        "{}: M = {}, dt = {}, N = {}, p = {}",
        case.name,
        config.elements,
        config.dt,
        config.chaos_degree,
        config.dg_degree
    );
    let trajectory = march(u0, &step, config.dt, config.t_end)?;
    let t_end = trajectory.final_time();
    log::info!("march: {} steps in {:.2?}", trajectory.n_steps(), started.elapsed());

    let rec = SpaceTimeReconstruction::from_trajectory(&trajectory, config.reconstruction_start)?;
    let needs_lipschitz = crate::estimator::c_fpp(case.law, case.m3, (0.0, 0.0)) > 0.0;
    let mut residuals = residual_norms(&rec, case.law, &case.source, &config.quadrature, needs_lipschitz)?;

    log::info!("residuals done at {:.2?}", started.elapsed());
    let t0 = rec.start();
    let initial = if t0 > 0.0 {
        case.exact.as_ref().unwrap_or_else(|| {
            let msg = format!("no exact solution at t = {t0}; initial error taken against the initial data");
            log::warn!("{msg}");
            &case.initial
        })
    } else {
        &case.initial
    };
    let kinks0 = case.kinks_at(t0);
    let (e0_st, e0_stoch) = initial_error_split(
        initial,
        t0,
        &rec.at(t0)?,
        &config.quadrature,
        kinks0.as_ref().map(|k| k as &dyn Fn(f64) -> Vec<f64>),
    );
    residuals.e0_st = e0_st;
    residuals.e0_stoch = e0_stoch;

    let final_state = trajectory.final_state();
    let gap = reconstruction_gap_sq(&rec.at(t_end)?, final_state);
    let error_sq = case.exact.as_ref().map(|exact| {
        let kinks = case.kinks_at(t_end);
        exact_error_sq(
            final_state,
            exact,
            t_end,
            &config.quadrature,
            kinks.as_ref().map(|k| k as &dyn Fn(f64) -> Vec<f64>),
        )
    });
    let estimator = compute_bound(&residuals, case.law, case.m3, gap, error_sq)?;
    let row = ConvergenceRow {
        level,
        elements: config.elements,
        h,
        dt: config.dt,
        chaos_degree: config.chaos_degree,
        p: config.dg_degree,
        error: error_sq.map(f64::sqrt),
        r_st: residuals.r_st_sq.sqrt(),
        r_stoch: residuals.r_stoch_sq.sqrt(),
        e0_st,
        e0_stoch,
        bound: estimator.bound_numerical.sqrt(),
        exp_factor: estimator.exp_factor,
        eoc_error: None,
        eoc_r_st: None,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        trajectory,
        residuals,
        estimator,
        row,
    })
}

/// Runs `base.levels` levels of `base.mode` refinement. Each finished level
/// is handed to `on_level` (with EOCs filled against the previous level)
/// before the next starts, so callers can flush partial tables.
pub fn convergence_study_with(
    base: &RunConfig,
    mut on_level: impl FnMut(&RunOutput, &[ConvergenceRow]),
) -> Result<Vec<ConvergenceRow>> {
    base.validate()?;
    if base.levels < 2 {
        return Err(Error::Config(format!(
            "a convergence study needs at least 2 levels, got {}",
            base.levels
        )));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(base.levels);
    for level in 0..base.levels {
        let out = run_level(&base.level(level), level)?;
        rows.push(out.row.clone());
        table::fill_eoc(&mut rows);
        on_level(&out, &rows);
    }
    Ok(rows)
}

pub fn convergence_study(base: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(base, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advection_level_zero() {
        let mut c = RunConfig::for_case("advection").unwrap();
        c.chaos_degree = 2;
        c.dg_degree = 2;
        let out = run(&c).unwrap();
        assert!(out.row.e0_stoch <= 1e-12);
        assert!(out.row.error.unwrap() > 0.0);
        assert!(out.estimator.bound_numerical >= out.row.error.unwrap().powi(2));
        assert!((out.row.exp_factor - 0.05f64.exp()).abs() < 1e-12);
        assert_eq!(out.trajectory.n_steps(), 10);
        assert!(out.row.wall_time < 5.0);
    }

    #[test]
    fn odd_element_counts_run() {
        let mut c = RunConfig::for_case("advection").unwrap();
        c.elements = 12;
        c.t_end = 0.04;
        c.quadrature.n_stochastic = 10;
        assert!(run(&c).is_ok());
    }

    #[test]
    fn studies_need_two_levels() {
        let mut c = RunConfig::for_case("advection").unwrap();
        c.levels = 1;
        assert!(convergence_study(&c).is_err());
    }
}
