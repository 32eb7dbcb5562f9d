//! The gauge transformation: spatial translation by the accumulated integral
//! alpha(t) = int_0^t int_T u^3 dx dt', applied trajectory-wide.
//!
//! Because the torus integral of u^3 is translation invariant, the shift
//! recomputed from the gauged trajectory equals the original one, which makes
//! the inverse exact up to quadrature error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::Trajectory;
use crate::spectral::{integral_of_power, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeRecord {
    /// raw accumulated shift per trajectory time (not reduced mod 2 pi)
    pub alpha: Vec<f64>,
    pub direction: Direction,
}

/// Trapezoid accumulation of `alpha(t) = int_0^t m(t') dt'` with
/// `m(t) = int_T u^3 dx` evaluated exactly per state.
pub fn gauge_shift(traj: &Trajectory) -> Result<GaugeRecord> {
    let m: Vec<f64> = traj
        .states
        .iter()
        .map(|s| integral_of_power(s, 3))
        .collect::<Result<_>>()?;
    let mut alpha = Vec::with_capacity(m.len());
    let mut acc = 0.0;
    alpha.push(0.0);
    for k in 1..m.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        acc += 0.5 * dt * (m[k] + m[k - 1]);
        alpha.push(acc);
    }
    Ok(GaugeRecord {
        alpha,
        direction: Direction::Forward,
    })
}

/// Exact spectral translation: `c_n -> e^{-i n a} c_n`, i.e. `u(x) -> u(x-a)`.
pub fn translate(f: &SpectralField, a: f64) -> SpectralField {
    let mut out = f.clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= Complex64::new(0.0, -((i + 1) as f64) * a).exp();
    }
    out
}

/// Gauge a trajectory: forward maps u to v(x,t) = u(x - alpha(t), t) with
/// alpha accumulated from the input; inverse undoes it, with the shift
/// likewise accumulated from its own input (valid because int u^3 is
/// translation invariant).
pub fn apply_gauge(traj: &Trajectory, direction: Direction) -> Result<(Trajectory, GaugeRecord)> {
    let mut record = gauge_shift(traj)?;
    record.direction = direction;
    let states = traj
        .states
        .iter()
        .zip(&record.alpha)
        .map(|(s, &a)| match direction {
            Direction::Forward => translate(s, a),
            Direction::Inverse => translate(s, -a),
        })
        .collect();
    Ok((
        Trajectory {
            times: traj.times.clone(),
            states,
            config: traj.config,
            initial: traj.initial.clone(),
        },
        record,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, FlowConfig, Variant};
    use crate::sampler::{sample_wiener, WienerSpec};
    use crate::spectral::l2_norm;
    use crate::spectral::{sobolev_norm, NormSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frozen_trajectory(states: Vec<SpectralField>, dt: f64) -> Trajectory {
        let times = (0..states.len()).map(|k| k as f64 * dt).collect();
        let initial = states[0].clone();
        Trajectory {
            times,
            states,
            config: FlowConfig::new(initial.max_mode(), dt.min(0.01), 1.0, Variant::Gauged),
            initial,
        }
    }

    #[test]
    fn translate_examples() {
        let u = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        assert_eq!(translate(&u, 0.0), u);
        assert!((translate(&u, 2.0 * PI).coeff(1) - u.coeff(1)).norm() < 1e-12);
        // 2cos(x - pi/2) = 2 sin x, i.e. c_1 = -i
        assert!((translate(&u, PI / 2.0).coeff(1) - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn translate_preserves_norms() {
        let f = SpectralField::new(vec![c(0.4, 0.2), c(-0.3, 0.8)]).unwrap();
        for s in [0.0, 0.7] {
            assert_relative_eq!(
                sobolev_norm(&translate(&f, 1.234), NormSpec::new(s)),
                sobolev_norm(&f, NormSpec::new(s)),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn shift_vanishes_for_odd_free_states() {
        // u = 2 cos x frozen in time: int u^3 = 0
        let u = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        let traj = frozen_trajectory(vec![u.clone(), u.clone(), u], 0.1);
        let rec = gauge_shift(&traj).unwrap();
        assert!(rec.alpha.iter().all(|&a| a.abs() < 1e-12));

        let z = SpectralField::zero(2);
        let traj = frozen_trajectory(vec![z.clone(), z], 0.1);
        assert!(gauge_shift(&traj).unwrap().alpha.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn trapezoid_exact_on_constant_integrand() {
        // u with nonzero int u^3, frozen: alpha_k = m * t_k exactly
        let u = SpectralField::new(vec![c(0.5, 0.0), c(0.25, 0.0)]).unwrap();
        let m = integral_of_power(&u, 3).unwrap();
        assert!(m.abs() > 1e-3);
        let traj = frozen_trajectory(vec![u.clone(), u.clone(), u.clone(), u], 0.25);
        let rec = gauge_shift(&traj).unwrap();
        for (t, a) in traj.times.iter().zip(&rec.alpha) {
            assert_relative_eq!(*a, m * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_state_gauge_is_identity() {
        let u = sample_wiener(&WienerSpec::new(4, 3, 0));
        let traj = frozen_trajectory(vec![u.clone()], 0.1);
        let (out, rec) = apply_gauge(&traj, Direction::Forward).unwrap();
        assert_eq!(rec.alpha, vec![0.0]);
        assert_eq!(out.states[0].coeffs(), u.coeffs());
    }

    #[test]
    fn roundtrip_on_evolved_trajectory() {
        let u = sample_wiener(&WienerSpec::new(8, 21, 0));
        let cfg = FlowConfig::new(8, 0.01, 1.0, Variant::Gauged);
        let traj = evolve(&u, &cfg).unwrap();
        let (fwd, _) = apply_gauge(&traj, Direction::Forward).unwrap();
        let (back, _) = apply_gauge(&fwd, Direction::Inverse).unwrap();
        for (a, b) in traj.states.iter().zip(&back.states) {
            let mut d = a.clone();
            for (x, y) in d.coeffs_mut().iter_mut().zip(b.coeffs()) {
                *x -= y;
            }
            assert!(l2_norm(&d) < 1e-10);
        }
    }
}
