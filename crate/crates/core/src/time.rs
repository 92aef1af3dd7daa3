//! Explicit Runge–Kutta time marching in Shu–Osher form with stage limiting.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::dg::{apply_lh, apply_limiter, NumericalFlux, SgField};
use crate::error::{Error, Result};
use crate::sg::RandomField;

/// `u^(j) = Lim( sum_{l<j} alpha_jl u^(l) + beta_jl dt L(u^(l)) )`, `j = 1..=S`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkScheme {
    name: String,
    /// Row `j - 1` holds `alpha_{j,0..j}`.
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    /// Time offset (in units of `dt`) of each stage state `u^(l)`, `l < S`.
    c: Vec<f64>,
    order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    SspRk3,
    Rk37,
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ssprk3" | "ssp-rk3" | "ssp_rk3" => Ok(Self::SspRk3),
            "rk3-7" | "rk37" | "rk3_7" => Ok(Self::Rk37),
            other => Err(Error::Config(format!("unknown Runge-Kutta scheme `{other}`"))),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SspRk3 => write!(f, "ssprk3"),
            Self::Rk37 => write!(f, "rk3-7"),
        }
    }
}

impl SchemeKind {
    pub fn scheme(self) -> RkScheme {
        match self {
            Self::SspRk3 => RkScheme::ssp_rk3(),
            Self::Rk37 => RkScheme::rk3_7(),
        }
    }
}

pub fn builtin_schemes() -> Vec<RkScheme> {
    vec![RkScheme::ssp_rk3(), RkScheme::rk3_7()]
}

impl RkScheme {
    pub fn new(name: &str, alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>, order: usize) -> Result<Self> {
        let stages = alpha.len();
        if stages == 0 || beta.len() != stages {
            return Err(Error::InvalidScheme("alpha and beta need the same nonzero row count".into()));
        }
        for (j, (a, b)) in alpha.iter().zip(&beta).enumerate() {
            if a.len() != j + 1 || b.len() != j + 1 {
                return Err(Error::InvalidScheme(format!("row {} must have {} entries", j + 1, j + 1)));
            }
            if a.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidScheme(format!("negative alpha in row {}", j + 1)));
            }
            let sum: f64 = a.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidScheme(format!("alpha row {} sums to {sum}", j + 1)));
            }
            if a.iter().zip(b).any(|(&x, &y)| y != 0.0 && x == 0.0) {
                return Err(Error::InvalidScheme(format!("beta without alpha in row {}", j + 1)));
            }
        }
        // effective Butcher rows of each stage state
        let mut rows: Vec<Vec<f64>> = vec![vec![0.0; stages]];
        for j in 0..stages {
            let mut row = vec![0.0; stages];
            for l in 0..=j {
                for (r, e) in row.iter_mut().zip(&rows[l]) {
                    *r += alpha[j][l] * e;
                }
                row[l] += beta[j][l];
            }
            rows.push(row);
        }
        let c = rows[..stages].iter().map(|r| r.iter().sum()).collect();
        Ok(Self {
            name: name.to_string(),
            alpha,
            beta,
            c,
            order,
        })
    }

    /// Builds the Shu–Osher form of an explicit Butcher tableau with
    /// `alpha_jl = 1/j`, so every `alpha` is positive.
    pub fn from_butcher(name: &str, a: &[Vec<f64>], b: &[f64], order: usize) -> Result<Self> {
        let stages = b.len();
        // target row of u^(j): Butcher row j for j < S, weights b for j = S
        let target = |j: usize| -> Vec<f64> {
            let mut row = vec![0.0; stages];
            let src: &[f64] = if j < stages { &a[j] } else { b };
            row[..src.len()].copy_from_slice(src);
            row
        };
        let mut alpha = Vec::with_capacity(stages);
        let mut beta = Vec::with_capacity(stages);
        for j in 1..=stages {
            let w = 1.0 / j as f64;
            let mut brow = target(j);
            for l in 0..j {
                let prev = if l == 0 { vec![0.0; stages] } else { target(l) };
                for (bb, p) in brow.iter_mut().zip(&prev) {
                    *bb -= w * p;
                }
            }
            alpha.push(vec![w; j]);
            beta.push(brow[..j].to_vec());
        }
        Self::new(name, alpha, beta, order)
    }

    /// Three-stage, third-order strong-stability-preserving scheme.
    pub fn ssp_rk3() -> Self {
        Self::new(
            "ssprk3",
            vec![vec![1.0], vec![0.75, 0.25], vec![1.0 / 3.0, 0.0, 2.0 / 3.0]],
            vec![vec![1.0], vec![0.0, 0.25], vec![0.0, 0.0, 2.0 / 3.0]],
            3,
        )
        .expect("valid SSP-RK3 table")
    }

    /// Seven-stage third-order low-storage scheme optimized for DG wave
    /// propagation (Toulorge & Desmet, J. Comput. Phys. 231, 2012).
    pub fn rk3_7() -> Self {
        const A: [f64; 7] = [
            0.0,
            -0.808_316_387_498_383,
            -1.503_407_858_773_331,
            -1.053_064_525_050_744,
            -1.463_149_119_280_508,
            -0.659_288_128_108_783,
            -1.667_891_931_891_068,
        ];
        const B: [f64; 7] = [
            0.011_970_526_730_978_4,
            0.888_689_779_382_071_1,
            0.457_838_208_926_141_9,
            0.579_004_525_333_847_1,
            0.316_021_463_813_848_4,
            0.248_352_536_826_412_2,
            0.067_712_309_594_088_4,
        ];
        // unroll the 2N-storage recursion into Butcher form
        let s = A.len();
        let mut du = vec![0.0; s];
        let mut u = vec![0.0; s];
        let mut rows = Vec::with_capacity(s);
        for i in 0..s {
            rows.push(u.clone());
            for (j, d) in du.iter_mut().enumerate() {
                *d = A[i] * *d + if i == j { 1.0 } else { 0.0 };
            }
            for (x, d) in u.iter_mut().zip(&du) {
                *x += B[i] * d;
            }
        }
        Self::from_butcher("rk3-7", &rows, &u, 3).expect("valid RK3-7 table")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Vec<f64>] {
        &self.beta
    }

    pub fn stage_times(&self) -> &[f64] {
        &self.c
    }
}

/// Options shared by every step of a march.
#[derive(Debug, Clone)]
pub struct StepConfig<'a> {
    pub scheme: &'a RkScheme,
    pub flux: NumericalFlux,
    pub source: &'a RandomField,
    /// TVB constant when the limiter is on.
    pub limiter: Option<f64>,
}

/// One step from `t_n` with step size `dt`.
pub fn rk_step(u_n: &SgField, cfg: &StepConfig<'_>, dt: f64, t_n: f64) -> Result<SgField> {
    let flux = cfg.flux.with_dt(dt);
    let d0 = apply_lh(u_n, &flux, cfg.source, t_n);
    rk_step_from(u_n, &d0, cfg, dt, t_n)
}

/// As [`rk_step`], reusing a precomputed `L_h(u_n)`.
fn rk_step_from(u_n: &SgField, d0: &SgField, cfg: &StepConfig<'_>, dt: f64, t_n: f64) -> Result<SgField> {
    let scheme = cfg.scheme;
    let flux = cfg.flux.with_dt(dt);
    let s = scheme.stages();
    let mut states: Vec<SgField> = Vec::with_capacity(s);
    let mut derivs: Vec<SgField> = Vec::with_capacity(s);
    states.push(u_n.clone());
    derivs.push(d0.clone());
    for j in 1..=s {
        let mut acc = ndarray::Array3::<f64>::zeros(u_n.data().dim());
        for l in 0..j {
            let a = scheme.alpha[j - 1][l];
            if a == 0.0 {
                continue;
            }
            let b = scheme.beta[j - 1][l];
            acc.scaled_add(a, states[l].data());
            if b != 0.0 {
                acc.scaled_add(b * dt, derivs[l].data());
            }
        }
        let mut next = u_n.with_data(acc);
        if let Some(tvb) = cfg.limiter {
            next = apply_limiter(&next, tvb);
        }
        if !next.is_finite() {
            return Err(Error::BlowUp { time: t_n, stage: j });
        }
        if j == s {
            return Ok(next);
        }
        let t_stage = t_n + scheme.c[j] * dt;
        derivs.push(apply_lh(&next, &flux, cfg.source, t_stage));
        states.push(next);
    }
    unreachable!("loop returns on the final stage")
}

/// Fully discrete solution history with `L_h` of every accepted state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SgField>,
    pub derivatives: Vec<Option<SgField>>,
    pub step_wall_times: Vec<f64>,
    /// Flux used by the scheme; its `dt` is replaced per interval.
    pub flux: NumericalFlux,
}

impl Trajectory {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_state(&self) -> &SgField {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one time")
    }

    /// Step length of interval `n`, `t_{n+1} - t_n`.
    pub fn step(&self, n: usize) -> f64 {
        self.times[n + 1] - self.times[n]
    }

    /// Index of the node closest to `t`.
    pub fn nearest_node(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }

    /// Step length whose `L_h` evaluation at node `n` is stored.
    pub fn node_dt(&self, n: usize) -> f64 {
        if self.times.len() < 2 {
            return self.flux.dt;
        }
        self.step(n.min(self.n_steps() - 1))
    }
}

/// Number of steps to reach `t_end` with nominal step `dt`, the last one
/// possibly truncated.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let ratio = t_end / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Marches `u0` from `t = 0` to `t_end`.
pub fn march(u0: SgField, cfg: &StepConfig<'_>, dt: f64, t_end: f64) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let n_steps = step_count(t_end, dt);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut derivatives = Vec::with_capacity(n_steps + 1);
    let mut step_wall_times = Vec::with_capacity(n_steps);
    times.push(0.0);
    let mut u = u0;
    for n in 0..n_steps {
        let t_n = times[n];
        let t_next = if n + 1 == n_steps { t_end } else { (n + 1) as f64 * dt };
        let step = t_next - t_n;
        let started = Instant::now();
        let d = apply_lh(&u, &cfg.flux.with_dt(step), cfg.source, t_n);
        let next = rk_step_from(&u, &d, cfg, step, t_n)?;
        step_wall_times.push(started.elapsed().as_secs_f64());
        derivatives.push(Some(d));
        states.push(u);
        times.push(t_next);
        u = next;
    }
    let last_dt = if n_steps > 0 { times[n_steps] - times[n_steps - 1] } else { dt };
    let t_last = *times.last().unwrap();
    derivatives.push(Some(apply_lh(&u, &cfg.flux.with_dt(last_dt), cfg.source, t_last)));
    states.push(u);
    log::debug!("march finished: {n_steps} steps to t = {t_last}");
    Ok(Trajectory {
        times,
        states,
        derivatives,
        step_wall_times,
        flux: cfg.flux.with_dt(dt),
    })
}
