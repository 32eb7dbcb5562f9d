//! The invariance battery: conserved quantities of the truncated gauged flow,
//! the divergence-free vector field, Liouville volume preservation, and a
//! weighted Monte-Carlo test that the truncated Gibbs measure is invariant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{evolve, nonlinear_term, FlowConfig, Trajectory};
use crate::observable::Observable;
use crate::sampler::GibbsEnsemble;
use crate::spectral::{integral_of_power, l2_norm, SpectralField};

/// `H(u) = 1/2 int u_x^2 + 1/20 int u^5`, the conserved Hamiltonian of the
/// quartic equation (1/20 = 1/(p(p+1)) at p = 4).
pub fn hamiltonian(f: &SpectralField) -> f64 {
    let kinetic: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = (i + 1) as f64;
            n * n * c.norm_sqr()
        })
        .sum();
    2.0 * std::f64::consts::PI * kinetic
        + integral_of_power(f, 5).expect("p=5 in range") / 20.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub h: Vec<f64>,
    /// max_t |q(t) - q(0)| / |q(0)| (absolute drift when q(0) = 0)
    pub l2_drift: f64,
    pub h_drift: f64,
}

fn relative_drift(series: &[f64]) -> f64 {
    let q0 = series[0];
    let scale = if q0.abs() > 0.0 { q0.abs() } else { 1.0 };
    series
        .iter()
        .map(|q| (q - q0).abs() / scale)
        .fold(0.0, f64::max)
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let l2: Vec<f64> = traj.states.iter().map(l2_norm).collect();
    let h: Vec<f64> = traj.states.iter().map(hamiltonian).collect();
    ConservationReport {
        times: traj.times.clone(),
        l2_drift: relative_drift(&l2),
        h_drift: relative_drift(&h),
        l2,
        h,
    }
}

fn field_from_reals(x: &[f64]) -> SpectralField {
    let coeffs = x
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    SpectralField::new(coeffs).expect("finite coordinates")
}

fn reals_from_field(f: &SpectralField) -> Vec<f64> {
    f.coeffs().iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Full right-hand side `i n^3 c_n + lambda NL_n` in real coordinates.
fn rhs_reals(x: &[f64], cfg: &FlowConfig) -> Result<Vec<f64>> {
    let f = field_from_reals(x);
    let nl = nonlinear_term(&f, cfg)?;
    let out = f
        .coeffs()
        .iter()
        .zip(nl.coeffs())
        .enumerate()
        .map(|(i, (c, n))| {
            let n3 = {
                let m = (i + 1) as f64;
                m * m * m
            };
            Complex64::new(0.0, n3) * c + n
        })
        .flat_map(|c| [c.re, c.im])
        .collect();
    Ok(out)
}

/// Divergence of the full vector field at a state, by central differences
/// (step 1e-5) in the 2N real coordinates. Vanishes identically for the
/// truncated gauged system.
pub fn vector_field_divergence(f: &SpectralField, cfg: &FlowConfig) -> Result<f64> {
    const H: f64 = 1e-5;
    let mut x = reals_from_field(f);
    x.resize(2 * cfg.max_mode, 0.0);
    let mut div = 0.0;
    for j in 0..x.len() {
        let orig = x[j];
        x[j] = orig + H;
        let plus = rhs_reals(&x, cfg)?;
        x[j] = orig - H;
        let minus = rhs_reals(&x, cfg)?;
        x[j] = orig;
        div += (plus[j] - minus[j]) / (2.0 * H);
    }
    Ok(div)
}

fn det_in_place(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            let (pivot_rows, rest) = m.split_at_mut(row);
            let pivot = &pivot_rows[col];
            for (a, b) in rest[0][col..n].iter_mut().zip(&pivot[col..n]) {
                *a -= factor * b;
            }
        }
    }
    det
}

/// Jacobian determinant of the time-t flow map at `f`, by central
/// differences (step 1e-6) column by column. Liouville: det = 1.
pub fn jacobian_det(f: &SpectralField, t: f64, cfg: &FlowConfig) -> Result<f64> {
    if cfg.max_mode > 6 {
        return Err(Error::BudgetExceeded(format!(
            "jacobian_det capped at N <= 6, got {}",
            cfg.max_mode
        )));
    }
    const H: f64 = 1e-6;
    let mut cfg_t = *cfg;
    cfg_t.horizon = t;
    cfg_t.output_stride = 0;
    let flow_map = |x: &[f64]| -> Result<Vec<f64>> {
        let traj = evolve(&field_from_reals(x), &cfg_t)?;
        Ok(reals_from_field(traj.final_state()))
    };
    let mut x = reals_from_field(f);
    x.resize(2 * cfg.max_mode, 0.0);
    let dim = x.len();
    let mut jac = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        let orig = x[j];
        x[j] = orig + H;
        let plus = flow_map(&x)?;
        x[j] = orig - H;
        let minus = flow_map(&x)?;
        x[j] = orig;
        for i in 0..dim {
            jac[i][j] = (plus[i] - minus[i]) / (2.0 * H);
        }
    }
    Ok(det_in_place(jac))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableStat {
    pub name: String,
    pub mean_t0: f64,
    pub se_t0: f64,
    pub mean_t1: f64,
    pub se_t1: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub stats: Vec<ObservableStat>,
    pub ess: f64,
    pub max_mode: usize,
    pub count: usize,
    pub cutoff_b: f64,
    pub horizon: f64,
    pub seed: u64,
    /// multiplicative perturbation applied before evolving (negative control)
    pub perturbation: Option<f64>,
}

/// Evolve every ensemble member to the configured horizon and compare the
/// weighted means of each observable at time 0 and time T. Weights are
/// transported unchanged: invariance of the measure means the time-0 weights
/// remain the correct importance weights for the pushforward.
///
/// `perturbation = Some(r)` rescales every coefficient by `r` before
/// evolving — a deliberately non-measure-preserving map used as a negative
/// control.
pub fn invariance_test(
    ensemble: &GibbsEnsemble,
    cfg: &FlowConfig,
    observables: &[Observable],
    perturbation: Option<f64>,
) -> Result<InvarianceReport> {
    cfg.validate()?;
    // fail on a degenerate ensemble before paying for the evolution
    ensemble.weighted_mean(|_| 0.0)?;
    let evolved: Vec<SpectralField> = ensemble
        .samples
        .iter()
        .map(|u| {
            let mut u = u.clone();
            if let Some(r) = perturbation {
                for c in u.coeffs_mut() {
                    *c *= r;
                }
            }
            Ok(evolve(&u, cfg)?.final_state().clone())
        })
        .collect::<Result<_>>()?;
    let pushforward = GibbsEnsemble {
        samples: evolved,
        weights: ensemble.weights.clone(),
        cutoff_b: ensemble.cutoff_b,
        max_mode: ensemble.max_mode,
        seed: ensemble.seed,
        stream_id: ensemble.stream_id,
    };
    let mut stats = Vec::with_capacity(observables.len());
    for ob in observables {
        let (m0, se0) = ensemble.weighted_mean(|f| ob.eval(f))?;
        let (m1, se1) = pushforward.weighted_mean(|f| ob.eval(f))?;
        let denom = (se0 * se0 + se1 * se1).sqrt();
        let z = if denom == 0.0 { 0.0 } else { (m1 - m0) / denom };
        stats.push(ObservableStat {
            name: ob.name.clone(),
            mean_t0: m0,
            se_t0: se0,
            mean_t1: m1,
            se_t1: se1,
            z,
        });
    }
    Ok(InvarianceReport {
        stats,
        ess: ensemble.ess(),
        max_mode: ensemble.max_mode,
        count: ensemble.len(),
        cutoff_b: ensemble.cutoff_b,
        horizon: cfg.horizon,
        seed: ensemble.seed,
        perturbation,
    })
}
