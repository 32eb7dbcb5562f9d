//! Discrete Bourgain-space machinery: windowed space-time spectra, the
//! X^{s,b} / Y^{s,b} / Z^{s,b} norms built on them, nonlinear-smoothing
//! diagnostics, and quadrature checks of the scalar calculus inequality.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{duhamel_part, evolve, linear_propagate, FlowConfig, Trajectory, Variant};
use crate::sampler::least_squares_slope;
use crate::spectral::{bracket, fft_inplace, sobolev_norm, NormSpec, SpectralField};

/// Time window applied before the temporal DFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Box,
}

impl Window {
    fn weight(self, j: usize, period: usize) -> f64 {
        match self {
            Window::Box => 1.0,
            Window::Hann => {
                let phase = 2.0 * std::f64::consts::PI * j as f64 / period as f64;
                0.5 * (1.0 - phase.cos())
            }
        }
    }
}

/// Which of the three norms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    X,
    Y,
    Z,
}

/// Exponent pair and norm selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsbSpec {
    pub s: f64,
    pub b: f64,
    pub kind: NormKind,
}

impl XsbSpec {
    pub fn new(s: f64, b: f64, kind: NormKind) -> Self {
        Self { s, b, kind }
    }
}

/// `h_hat(n, tau_m)` for signed modes `0 < |n| <= N` on the uniform bin grid
/// `tau_m = 2 pi m / T_w`, `m in [-K/2, K/2)`, where `K` is the number of
/// time samples over one window length `T_w`.
#[derive(Debug, Clone)]
pub struct SpaceTimeSpectrum {
    /// rows for n = -N..-1 then 1..N, each in DFT bin order
    rows: Vec<Vec<Complex64>>,
    max_mode: usize,
    bins: usize,
    pub window: Window,
    pub window_length: f64,
}

impl SpaceTimeSpectrum {
    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Number of tau bins (= number of time samples).
    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin spacing `2 pi / T_w`.
    pub fn dtau(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.window_length
    }

    fn row_index(&self, n: i64) -> usize {
        debug_assert!(n != 0 && n.unsigned_abs() as usize <= self.max_mode);
        if n < 0 {
            (n + self.max_mode as i64) as usize
        } else {
            self.max_mode + n as usize - 1
        }
    }

    fn mode_of_row(&self, row: usize) -> i64 {
        if row < self.max_mode {
            row as i64 - self.max_mode as i64
        } else {
            (row - self.max_mode + 1) as i64
        }
    }

    /// Signed bin index for DFT position `j`.
    fn bin_m(&self, j: usize) -> i64 {
        if j <= (self.bins - 1) / 2 {
            j as i64
        } else {
            j as i64 - self.bins as i64
        }
    }

    /// Coefficient at signed mode `n` and signed bin `m`.
    pub fn coeff(&self, n: i64, m: i64) -> Complex64 {
        let j = m.rem_euclid(self.bins as i64) as usize;
        self.rows[self.row_index(n)][j]
    }

    /// Iterate `(n, tau_m, h_hat)` over all stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64, Complex64)> + '_ {
        let dtau = self.dtau();
        self.rows.iter().enumerate().flat_map(move |(r, row)| {
            let n = self.mode_of_row(r);
            row.iter()
                .enumerate()
                .map(move |(j, &c)| (n, self.bin_m(j) as f64 * dtau, c))
        })
    }
}

/// Temporal DFT of `window(t) c_n(t)` per signed mode, normalized by `dt` so
/// the bins approximate the continuum transform on one window period.
pub fn spacetime_spectrum(traj: &Trajectory, window: Window) -> Result<SpaceTimeSpectrum> {
    let k = traj.len().saturating_sub(1);
    if k < 64 {
        return Err(Error::InvalidParameter(format!(
            "need at least 64 uniform time samples, got {k}"
        )));
    }
    let dt = traj.dt_out();
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter("trajectory has zero time step".into()));
    }
    let t_w = k as f64 * dt;
    let n_max = traj.config.max_mode;
    let tau_reach = std::f64::consts::PI / dt;
    let n3 = (n_max as f64).powi(3);
    if tau_reach < n3 {
        log::warn!(
            "tau grid reaches only {tau_reach:.3e} < N^3 = {n3:.3e}; \
             modulation weights near the top mode are aliased"
        );
    }

    let mut rows = Vec::with_capacity(2 * n_max);
    for n in (-(n_max as i64)..=n_max as i64).filter(|&n| n != 0) {
        let mut buf: Vec<Complex64> = (0..k)
            .map(|j| {
                let c = traj.states[j].coeff_signed(n);
                c * window.weight(j, k)
            })
            .collect();
        fft_inplace(&mut buf, true);
        for v in &mut buf {
            *v *= dt;
        }
        rows.push(buf);
    }
    Ok(SpaceTimeSpectrum {
        rows,
        max_mode: n_max,
        bins: k,
        window,
        window_length: t_w,
    })
}

/// X / Y / Z norm of a spectrum. X is the weighted `l^2_{n,tau}` with bin
/// measure `dtau`; Y is `l^2_n` of the weighted `L^1_tau`; Z = X^{s,b} +
/// Y^{s,b-1/2}.
pub fn xsb_norm(sp: &SpaceTimeSpectrum, spec: XsbSpec) -> f64 {
    match spec.kind {
        NormKind::X => x_norm(sp, spec.s, spec.b),
        NormKind::Y => y_norm(sp, spec.s, spec.b),
        NormKind::Z => x_norm(sp, spec.s, spec.b) + y_norm(sp, spec.s, spec.b - 0.5),
    }
}

fn x_norm(sp: &SpaceTimeSpectrum, s: f64, b: f64) -> f64 {
    let dtau = sp.dtau();
    let mut acc = 0.0;
    for (n, tau, c) in sp.entries() {
        let nf = n as f64;
        let w = bracket(nf).powf(s) * bracket(tau - nf * nf * nf).powf(b);
        acc += (w * c.norm()).powi(2) * dtau;
    }
    acc.sqrt()
}

fn y_norm(sp: &SpaceTimeSpectrum, s: f64, b: f64) -> f64 {
    let dtau = sp.dtau();
    let n_max = sp.max_mode() as i64;
    let mut acc = 0.0;
    for n in (-n_max..=n_max).filter(|&n| n != 0) {
        let nf = n as f64;
        let mut l1 = 0.0;
        for j in 0..sp.bins() {
            let tau = sp.bin_m(j) as f64 * dtau;
            let w = bracket(nf).powf(s) * bracket(tau - nf * nf * nf).powf(b);
            l1 += w * sp.rows[sp.row_index(n)][j].norm() * dtau;
        }
        acc += l1 * l1;
    }
    acc.sqrt()
}

/// Ratio of the sharp-cutoff (box window) X norm to the smooth-extension
/// proxy (hann window) X norm; 1 for the zero trajectory.
pub fn cutoff_equivalence_check(traj: &Trajectory, s: f64, b: f64) -> Result<f64> {
    if b >= 0.5 {
        return Err(Error::InvalidParameter(
            "cutoff comparison requires b < 1/2".into(),
        ));
    }
    let spec = XsbSpec::new(s, b, NormKind::X);
    let sharp = xsb_norm(&spacetime_spectrum(traj, Window::Box)?, spec);
    let smooth = xsb_norm(&spacetime_spectrum(traj, Window::Hann)?, spec);
    if sharp == 0.0 && smooth == 0.0 {
        return Ok(1.0);
    }
    if smooth == 0.0 {
        return Err(Error::Degenerate(
            "smooth-window norm vanished on a nonzero trajectory".into(),
        ));
    }
    Ok(sharp / smooth)
}

/// X^{s,b} norms of the windowed free evolution of unit-`H^s` single-mode
/// data, one ratio per carrier mode `n = 1..=n_sweep`. A uniform ratio across
/// modes is the discrete content of the linear X^{s,b} bound.
pub fn windowed_linear_ratios(
    n_sweep: usize,
    max_mode: usize,
    s: f64,
    b: f64,
    time_samples: usize,
) -> Result<Vec<f64>> {
    if n_sweep < 1 || n_sweep > max_mode {
        return Err(Error::InvalidParameter(
            "sweep range must lie inside the mode band".into(),
        ));
    }
    let t_w = 2.0 * std::f64::consts::PI;
    let dt = t_w / time_samples as f64;
    let mut cfg = FlowConfig::new(max_mode, dt, t_w, Variant::Gauged);
    cfg.nonlin_coeff = 0.0;
    let spec = XsbSpec::new(s, b, NormKind::X);
    let mut ratios = Vec::with_capacity(n_sweep);
    for n in 1..=n_sweep {
        let amp = 1.0 / (2.0 * std::f64::consts::PI.sqrt() * bracket(n as f64).powf(s));
        let phi = SpectralField::single_mode(max_mode, n, Complex64::new(amp, 0.0));
        debug_assert!((sobolev_norm(&phi, NormSpec::new(s)) - 1.0).abs() < 1e-12);
        let times: Vec<f64> = (0..=time_samples).map(|j| j as f64 * dt).collect();
        let states: Vec<SpectralField> =
            times.iter().map(|&t| linear_propagate(&phi, t)).collect();
        let traj = Trajectory {
            times,
            states,
            config: cfg,
            initial: phi,
        };
        let sp = spacetime_spectrum(&traj, Window::Hann)?;
        ratios.push(xsb_norm(&sp, spec));
    }
    Ok(ratios)
}

/// One row of the smoothing table: truncation level, median data norm,
/// median peak Duhamel norm.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SmoothingRow {
    pub max_mode: usize,
    pub data_norm: f64,
    pub duhamel_norm: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SmoothingTable {
    pub delta: f64,
    pub horizon: f64,
    pub rows: Vec<SmoothingRow>,
    /// log-log slope of the data norms against the truncation level
    pub data_slope: Option<f64>,
    /// log-log slope of the Duhamel norms against the truncation level
    pub duhamel_slope: Option<f64>,
    /// slope of the analytic partial sums `sqrt(sum n^{2 delta - 1})` over
    /// the same truncation levels, the expected data-norm growth
    pub analytic_data_slope: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite norms"));
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn log_log_slope(ns: &[usize], values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .unzip();
    if xs.len() < 2 {
        None
    } else {
        Some(least_squares_slope(&xs, &ys))
    }
}

/// Compare the growth of `||P_N u_0||_{H^{1/2+delta}}` with the peak Duhamel
/// norm `max_t ||u^N(t) - S(t) P_N u_0||_{H^{1/2+delta}}` over an ensemble of
/// rough initial data: the data norm grows like `N^delta` while the Duhamel
/// part stays essentially flat.
pub fn smoothing_diagnostic(
    samples: &[SpectralField],
    ns: &[usize],
    delta: f64,
    horizon: f64,
    template: &FlowConfig,
) -> Result<SmoothingTable> {
    if !(0.0 < delta && delta < 0.25) {
        return Err(Error::InvalidParameter(
            "delta must lie in (0, 0.25)".into(),
        ));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns.is_empty() {
        return Err(Error::InvalidParameter(
            "truncation levels must be strictly increasing".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let norm = NormSpec::new(0.5 + delta);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if samples.iter().any(|u| u.max_mode() < n) {
            return Err(Error::InvalidParameter(format!(
                "ensemble band too small for truncation {n}"
            )));
        }
        let mut data = Vec::with_capacity(samples.len());
        let mut duh = Vec::with_capacity(samples.len());
        for u in samples {
            let u0 = SpectralField::new(
                (1..=n).map(|k| u.coeff(k)).collect::<Vec<_>>(),
            )?;
            data.push(sobolev_norm(&u0, norm));
            // template.dt is the step for the finest truncation; coarser
            // levels relax it by the empirical (n_max/n)^2 stability law
            let scale = (*ns.last().unwrap() as f64 / n as f64).powi(2);
            let cfg = FlowConfig {
                max_mode: n,
                horizon,
                dt: template.dt * scale,
                ..*template
            };
            let traj = evolve(&u0, &cfg)?;
            let d = duhamel_part(&traj);
            let peak = d
                .states
                .iter()
                .map(|s| sobolev_norm(s, norm))
                .fold(0.0f64, f64::max);
            duh.push(peak);
        }
        rows.push(SmoothingRow {
            max_mode: n,
            data_norm: median(data),
            duhamel_norm: median(duh),
        });
    }
    let data_series: Vec<f64> = rows.iter().map(|r| r.data_norm).collect();
    let duh_series: Vec<f64> = rows.iter().map(|r| r.duhamel_norm).collect();
    let analytic: Vec<f64> = ns
        .iter()
        .map(|&n| {
            (1..=n)
                .map(|k| (k as f64).powf(2.0 * delta - 1.0))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(SmoothingTable {
        delta,
        horizon,
        data_slope: log_log_slope(ns, &data_series),
        duhamel_slope: log_log_slope(ns, &duh_series),
        analytic_data_slope: log_log_slope(ns, &analytic),
        rows,
    })
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    eps: f64,
    depth: usize,
) -> Result<f64> {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        eps: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if (left + right - whole).abs() <= 15.0 * eps {
            return Ok(left + right + (left + right - whole) / 15.0);
        }
        if depth == 0 {
            return Err(Error::NonConvergence(0));
        }
        Ok(recurse(f, a, m, left, 0.5 * eps, depth - 1)?
            + recurse(f, m, b, right, 0.5 * eps, depth - 1)?)
    }
    let whole = simpson(f, a, 0.5 * (a + b), b);
    recurse(f, a, b, whole, eps, depth)
}

/// Max over `a_values` of `<a>^alpha * int d theta / (<theta>^{d1} <a-theta>^{d2})`
/// with `alpha = d1 - (1 - d2)_+`; the inequality asserts this stays bounded.
pub fn calculus_inequality_check(delta1: f64, delta2: f64, a_values: &[f64]) -> Result<f64> {
    if !(0.0 < delta1 && delta1 <= delta2) {
        return Err(Error::InvalidParameter(
            "require 0 < delta1 <= delta2".into(),
        ));
    }
    if delta1 + delta2 <= 1.0 {
        return Err(Error::InvalidParameter(
            "require delta1 + delta2 > 1".into(),
        ));
    }
    let alpha = delta1 - (1.0 - delta2).max(0.0);
    let mut worst = 0.0f64;
    for &a in a_values {
        if a < 0.0 {
            return Err(Error::InvalidParameter("a values must be >= 0".into()));
        }
        let f = move |theta: f64| bracket(theta).powf(-delta1) * bracket(a - theta).powf(-delta2);
        let l = 10.0 * (1.0 + a);
        // split at the integrand kinks theta = 0 and theta = a
        let mut total = adaptive_simpson(&f, -l, 0.0, 1e-10, 40)?
            + adaptive_simpson(&f, 0.0, a, 1e-10, 40)?
            + adaptive_simpson(&f, a, l, 1e-10, 40)?;
        // both brackets behave like <theta> beyond |theta| = 10(1+a)
        total += 2.0 * (1.0 + l).powf(1.0 - delta1 - delta2) / (delta1 + delta2 - 1.0);
        worst = worst.max(total * bracket(a).powf(alpha));
    }
    Ok(worst)
}
