//! Time evolution of the truncated flows.
//!
//! The integrated ODE system, mode by mode for 0 < n <= N:
//! `d c_n/dt = i n^3 c_n + lambda * NL_n(c)`,
//! where the gauged nonlinearity is `P_N(P(u^3) u_x)` (coefficient 1) and the
//! ungauged one is `P_N(d_x(u^4))` (coefficient 1/4). The stiff linear phase
//! `e^{i n^3 t}` is applied exactly inside an integrating-factor RK4 step,
//! so only the nonlinear part sees the time discretization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::least_squares_slope;
use crate::spectral::{
    derivative, from_grid, project, sobolev_norm, to_grid, GridField, NormSpec, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gauged,
    Ungauged,
}

impl Variant {
    pub fn default_coeff(self) -> f64 {
        match self {
            Variant::Gauged => 1.0,
            Variant::Ungauged => 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub max_mode: usize,
    pub dt: f64,
    pub horizon: f64,
    pub variant: Variant,
    /// nonlinearity coefficient; defaults to 1 (gauged) or 1/4 (ungauged),
    /// and 0 selects the pure linear flow for control experiments
    pub nonlin_coeff: f64,
    /// keep every `output_stride`-th step in the trajectory; 0 = automatic
    /// (at most ~1024 stored states)
    pub output_stride: usize,
}

impl FlowConfig {
    pub fn new(max_mode: usize, dt: f64, horizon: f64, variant: Variant) -> Self {
        Self {
            max_mode,
            dt,
            horizon,
            variant,
            nonlin_coeff: variant.default_coeff(),
            output_stride: 0,
        }
    }

    /// Nonlinear CFL heuristic for the integrating-factor scheme.
    pub fn dt_max(max_mode: usize) -> f64 {
        0.5 / max_mode as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_mode < 1 {
            return Err(Error::InvalidParameter("max_mode must be >= 1".into()));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.dt > Self::dt_max(self.max_mode) + 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds stability budget {} at N = {}",
                self.dt,
                Self::dt_max(self.max_mode),
                self.max_mode
            )));
        }
        if self.horizon.is_nan() || self.horizon < 0.0 {
            return Err(Error::InvalidParameter("horizon must be >= 0".into()));
        }
        if !self.nonlin_coeff.is_finite() {
            return Err(Error::InvalidParameter("nonlinear coefficient must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub config: FlowConfig,
    pub initial: SpectralField,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dt_out(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory never empty")
    }
}

/// `S(t) = e^{t d_x^3}` as the diagonal phase `c_n -> e^{i n^3 t} c_n`.
pub fn linear_propagate(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let n = (i + 1) as f64;
        *c *= Complex64::new(0.0, n * n * n * t).exp();
    }
    out
}

/// Right-hand-side nonlinearity at a state (without the linear part).
pub fn nonlinear_term(f: &SpectralField, cfg: &FlowConfig) -> Result<SpectralField> {
    if f.effective_max_mode() > cfg.max_mode {
        return Err(Error::InvalidParameter(format!(
            "state carries mode {} beyond truncation N = {}",
            f.effective_max_mode(),
            cfg.max_mode
        )));
    }
    let n = cfg.max_mode;
    // The product u^3 u_x has band 4N; a grid of >= 5N+1 points keeps the
    // retained modes <= N alias-free, and the grid mean of u^3 is its exact
    // mean (band 3N < M), so P(u^3) is one scalar subtraction.
    let m = (5 * n + 1).next_power_of_two().max(8);
    let grid = to_grid(&crate::spectral::project(f, n), m)?;
    let mut out = match cfg.variant {
        Variant::Gauged => {
            let gx = to_grid(&derivative(f), m)?;
            let mut cube: Vec<f64> = grid.values().iter().map(|v| v * v * v).collect();
            let mean = cube.iter().sum::<f64>() / m as f64;
            for (c, x) in cube.iter_mut().zip(gx.values()) {
                *c = (*c - mean) * x;
            }
            from_grid(&GridField::new(cube)?, n)?.0
        }
        Variant::Ungauged => {
            let quart: Vec<f64> = grid.values().iter().map(|v| v * v * v * v).collect();
            derivative(&from_grid(&GridField::new(quart)?, n)?.0)
        }
    };
    for c in out.coeffs_mut() {
        *c *= cfg.nonlin_coeff;
    }
    Ok(out)
}

fn half_phase(max_mode: usize, dt: f64) -> Vec<Complex64> {
    (1..=max_mode)
        .map(|n| {
            let n = n as f64;
            Complex64::new(0.0, n * n * n * dt / 2.0).exp()
        })
        .collect()
}

fn mul_phase(f: &SpectralField, phase: &[Complex64], squared: bool) -> SpectralField {
    let mut out = f.clone();
    for (c, p) in out.coeffs_mut().iter_mut().zip(phase) {
        *c *= if squared { p * p } else { *p };
    }
    out
}

fn axpy(f: &SpectralField, scale: f64, g: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    for (c, d) in out.coeffs_mut().iter_mut().zip(g.coeffs()) {
        *c += scale * d;
    }
    out
}

/// One integrating-factor RK4 step of size `dt`.
fn ifrk4_step(c: &SpectralField, dt: f64, phase: &[Complex64], cfg: &FlowConfig) -> Result<SpectralField> {
    let e = |f: &SpectralField| mul_phase(f, phase, false);
    let e2 = |f: &SpectralField| mul_phase(f, phase, true);

    let k1 = nonlinear_term(c, cfg)?;
    let k2 = nonlinear_term(&e(&axpy(c, dt / 2.0, &k1)), cfg)?;
    let k3 = nonlinear_term(&axpy(&e(c), dt / 2.0, &k2), cfg)?;
    let k4 = nonlinear_term(&axpy(&e2(c), dt, &e(&k3)), cfg)?;

    // c+ = E^2 c + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4)
    let mut out = e2(c);
    let ek1 = e2(&k1);
    let emid = e(&axpy(&k2, 1.0, &k3));
    for i in 0..out.coeffs().len() {
        let incr = ek1.coeffs()[i] + 2.0 * emid.coeffs()[i] + k4.coeffs()[i];
        out.coeffs_mut()[i] += dt / 6.0 * incr;
    }
    Ok(out)
}

/// Integrate the truncated flow from `f` to time `horizon`.
///
/// The step count is rounded so output samples are uniformly spaced and the
/// final time is exactly the horizon (the effective dt never exceeds the
/// configured one).
pub fn evolve(f: &SpectralField, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let initial = {
        let p = project(f, cfg.max_mode);
        let mut coeffs = p.coeffs().to_vec();
        coeffs.resize(cfg.max_mode, Complex64::new(0.0, 0.0));
        coeffs.truncate(cfg.max_mode);
        SpectralField::new(coeffs)?
    };
    if cfg.horizon == 0.0 {
        return Ok(Trajectory {
            times: vec![0.0],
            states: vec![initial.clone()],
            config: *cfg,
            initial,
        });
    }
    let raw_steps = (cfg.horizon / cfg.dt - 1e-12).ceil().max(1.0) as usize;
    let stride = if cfg.output_stride > 0 {
        // a stride beyond the whole run means "store endpoint only"
        cfg.output_stride.min(raw_steps)
    } else {
        raw_steps.div_ceil(1024)
    };
    let steps = raw_steps.div_ceil(stride) * stride;
    let dt = cfg.horizon / steps as f64;
    let phase = half_phase(cfg.max_mode, dt);

    let mut times = Vec::with_capacity(steps / stride + 1);
    let mut states = Vec::with_capacity(steps / stride + 1);
    times.push(0.0);
    states.push(initial.clone());
    let mut c = initial.clone();
    for step in 1..=steps {
        c = ifrk4_step(&c, dt, &phase, cfg)?;
        if !c.is_finite() {
            return Err(Error::BlowUp {
                step,
                time: step as f64 * dt,
            });
        }
        if step % stride == 0 {
            times.push(step as f64 * dt);
            states.push(c.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        config: *cfg,
        initial,
    })
}

/// Nonlinear remainder `D(t) = u(t) - S(t) u(0)` of a trajectory.
pub fn duhamel_part(traj: &Trajectory) -> Trajectory {
    let states = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let lin = linear_propagate(&traj.states[0], t);
            let mut d = u.clone();
            for (c, l) in d.coeffs_mut().iter_mut().zip(lin.coeffs()) {
                *c -= l;
            }
            d
        })
        .collect();
    Trajectory {
        times: traj.times.clone(),
        states,
        config: traj.config,
        initial: traj.initial.clone(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyReport {
    /// coarse truncation of each consecutive (N, 2N) comparison
    pub ns: Vec<usize>,
    /// max-in-time H^s distance between the 2N and N solutions after
    /// removing the linear evolution of the fresh modes
    pub errors: Vec<f64>,
    /// least-squares slope of log error against log N; None when every
    /// difference sits at machine precision
    pub slope: Option<f64>,
}

/// Truncation-convergence study: for consecutive truncations N < 2N measure
/// `max_t ||Phi^{2N} P_{2N} u0 - Phi^N P_N u0 - S(t)(P_{2N}-P_N) u0||_{H^s}`
/// and fit its decay in N.
pub fn cauchy_rate(
    u0: &SpectralField,
    ns: &[usize],
    s: f64,
    horizon: f64,
    template: &FlowConfig,
) -> Result<CauchyReport> {
    if ns.len() < 2 {
        return Err(Error::InvalidParameter(
            "cauchy_rate needs at least two truncations".into(),
        ));
    }
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidParameter(
            "truncations must double: N, 2N, 4N, ...".into(),
        ));
    }
    let spec = NormSpec::new(s);
    let n_max = *ns.last().unwrap();
    // one dt for all runs, stable at the finest truncation, with a common
    // output grid
    let dt = template.dt.min(FlowConfig::dt_max(n_max));
    let mut report = CauchyReport {
        ns: Vec::new(),
        errors: Vec::new(),
        slope: None,
    };
    let mut traj_coarse: Option<Trajectory> = None;
    for w in ns.windows(2) {
        let (n, n2) = (w[0], w[1]);
        let mk = |modes: usize| -> FlowConfig {
            FlowConfig {
                max_mode: modes,
                dt,
                horizon,
                variant: template.variant,
                nonlin_coeff: template.nonlin_coeff,
                output_stride: template.output_stride.max(1),
            }
        };
        let coarse = match traj_coarse.take() {
            Some(t) if t.config.max_mode == n => t,
            _ => evolve(u0, &mk(n))?,
        };
        let fine = evolve(u0, &mk(n2))?;
        assert_eq!(coarse.times.len(), fine.times.len());
        let u0_fine = project(u0, n2);
        let mut err: f64 = 0.0;
        for k in 0..fine.times.len() {
            let t = fine.times[k];
            // fresh-mode linear evolution S(t)(P_{2N} - P_N) u0
            let mut diff = vec![Complex64::new(0.0, 0.0); n2];
            for m in 1..=n2 {
                let fine_c = fine.states[k].coeff_signed(m as i64);
                let coarse_c = coarse.states[k].coeff_signed(m as i64);
                let mut d = fine_c - coarse_c;
                if m > n {
                    let m3 = (m * m * m) as f64;
                    let fresh = u0_fine.coeff_signed(m as i64)
                        * Complex64::new(0.0, m3 * t).exp();
                    d -= fresh;
                }
                diff[m - 1] = d;
            }
            err = err.max(sobolev_norm(&SpectralField::new(diff)?, spec));
        }
        report.ns.push(n);
        report.errors.push(err);
        traj_coarse = Some(fine);
    }
    let usable: Vec<(f64, f64)> = report
        .ns
        .iter()
        .zip(&report.errors)
        .filter(|(_, &e)| e > 1e-13)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
        report.slope = Some(least_squares_slope(&xs, &ys));
    }
    Ok(report)
}
