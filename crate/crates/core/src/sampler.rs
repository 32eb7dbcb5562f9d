//! Random initial data: Wiener-measure samples `c_n = g_n / |n|` and
//! Gibbs-weighted ensembles with density `exp(-1/20 int u^5) 1{||u||_2 <= B}`.
//!
//! Randomness comes from ChaCha8 keyed by a 64-bit seed, with the stream id
//! selecting an independent substream; identical `(seed, stream_id, N)`
//! reproduce samples bit-exactly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{integral_of_power, l2_norm, sobolev_norm, NormSpec, SpectralField};

/// Exponent clamp for the Gibbs density; beyond this `exp` would overflow.
const MAX_LOG_WEIGHT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WienerSpec {
    pub max_mode: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl WienerSpec {
    pub fn new(max_mode: usize, seed: u64, stream_id: u64) -> Self {
        Self {
            max_mode,
            seed,
            stream_id,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One draw from the truncated Wiener measure: `c_n = g_n/|n|` with `g_n`
/// standard complex Gaussian (`E|g_n|^2 = 1`).
pub fn sample_wiener(spec: &WienerSpec) -> SpectralField {
    let mut rng = spec.rng();
    // real and imaginary parts each have variance 1/2
    let half = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    let coeffs = (1..=spec.max_mode)
        .map(|n| {
            let g = Complex64::new(half.sample(&mut rng), half.sample(&mut rng));
            g / n as f64
        })
        .collect();
    SpectralField::new(coeffs).expect("gaussian draw is finite")
}

/// Gibbs density relative to Wiener: `exp(-1/20 int u^5) 1{||u||_2 <= B}`.
/// The constant 1/20 is 1/(p(p+1)) at p = 4.
pub fn gibbs_weight(f: &SpectralField, cutoff_b: f64) -> f64 {
    assert!(cutoff_b > 0.0, "cutoff B must be positive");
    if l2_norm(f) > cutoff_b {
        return 0.0;
    }
    let mut exponent = -integral_of_power(f, 5).expect("p=5 in range") / 20.0;
    if exponent > MAX_LOG_WEIGHT {
        log::warn!("gibbs_weight: exponent {exponent:.3} clamped to {MAX_LOG_WEIGHT}");
        exponent = MAX_LOG_WEIGHT;
    }
    exponent.exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsEnsemble {
    pub samples: Vec<SpectralField>,
    pub weights: Vec<f64>,
    pub cutoff_b: f64,
    pub max_mode: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl GibbsEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Normalized weights `w_i / sum w`, computed against the max weight so
    /// extreme Gibbs exponents cannot overflow intermediate sums.
    fn normalized_weights(&self) -> Option<Vec<f64>> {
        let wmax = self.weights.iter().cloned().fold(0.0f64, f64::max);
        if wmax <= 0.0 {
            return None;
        }
        let mut w: Vec<f64> = self.weights.iter().map(|v| v / wmax).collect();
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        Some(w)
    }

    /// Effective sample size `(sum w)^2 / sum w^2`.
    pub fn ess(&self) -> f64 {
        match self.normalized_weights() {
            None => 0.0,
            Some(w) => 1.0 / w.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    fn guard(&self) -> Result<Vec<f64>> {
        let w = self.normalized_weights().ok_or_else(|| {
            Error::Degenerate("all importance weights are zero".into())
        })?;
        let ess = self.ess();
        if ess < 10.0 {
            return Err(Error::InsufficientEss { ess, min: 10.0 });
        }
        Ok(w)
    }

    /// Self-normalized importance estimate of `E_mu[F]` with its standard
    /// error `sqrt(sum wt_i^2 (F_i - mean)^2)` (normalized weights `wt`).
    /// Refuses when the effective sample size drops below 10.
    pub fn weighted_mean<F: Fn(&SpectralField) -> f64>(&self, observable: F) -> Result<(f64, f64)> {
        let w = self.guard()?;
        Ok(self.weighted_mean_with(&w, observable))
    }

    /// Like `weighted_mean` but without the ESS guard; the estimate is still
    /// exact in expectation, just possibly noisy.
    pub fn weighted_mean_unchecked<F: Fn(&SpectralField) -> f64>(
        &self,
        observable: F,
    ) -> Result<(f64, f64)> {
        let w = self.normalized_weights().ok_or_else(|| {
            Error::Degenerate("all importance weights are zero".into())
        })?;
        Ok(self.weighted_mean_with(&w, observable))
    }

    fn weighted_mean_with<F: Fn(&SpectralField) -> f64>(
        &self,
        w: &[f64],
        observable: F,
    ) -> (f64, f64) {
        let values: Vec<f64> = self.samples.iter().map(&observable).collect();
        let mean: f64 = values.iter().zip(w).map(|(v, wt)| v * wt).sum();
        let var: f64 = values
            .iter()
            .zip(w)
            .map(|(v, wt)| wt * wt * (v - mean) * (v - mean))
            .sum();
        (mean, var.sqrt())
    }
}

/// Draw `count` Wiener samples with Gibbs importance weights; sample `i`
/// uses substream `stream_id + i`, so ensembles are reproducible and
/// extendable.
pub fn sample_gibbs_ensemble(spec: &WienerSpec, cutoff_b: f64, count: usize) -> Result<GibbsEnsemble> {
    if count == 0 {
        return Err(Error::InvalidParameter("ensemble count must be >= 1".into()));
    }
    if cutoff_b.is_nan() || cutoff_b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff B must be positive, got {cutoff_b}"
        )));
    }
    let mut samples = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for i in 0..count {
        let sub = WienerSpec::new(
            spec.max_mode,
            spec.seed,
            spec.stream_id.wrapping_add(i as u64),
        );
        let f = sample_wiener(&sub);
        weights.push(gibbs_weight(&f, cutoff_b));
        samples.push(f);
    }
    Ok(GibbsEnsemble {
        samples,
        weights,
        cutoff_b,
        max_mode: spec.max_mode,
        seed: spec.seed,
        stream_id: spec.stream_id,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    pub log_tail: Vec<f64>,
    /// least-squares slope of log P(norm > K) against K^2; None when fewer
    /// than two usable points exist
    pub slope: Option<f64>,
}

/// Empirical large-deviation curve for `P(||u_0||_{H^s} > K)`. A Gaussian
/// tail shows up as a negative slope of the log-tail against `K^2`.
pub fn tail_check(spec: &WienerSpec, s: f64, count: usize) -> Result<TailCurve> {
    if s >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "tail_check requires s < 1/2 (H^s carries the measure), got {s}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let norm_spec = NormSpec::new(s);
    let mut norms: Vec<f64> = (0..count)
        .map(|i| {
            let sub = WienerSpec::new(spec.max_mode, spec.seed, spec.stream_id.wrapping_add(i as u64));
            sobolev_norm(&sample_wiener(&sub), norm_spec)
        })
        .collect();
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // thresholds at upper quantiles so each tail estimate keeps >= ~10 hits
    let qs = [0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99];
    let mut thresholds = Vec::new();
    let mut log_tail = Vec::new();
    for &q in &qs {
        let idx = ((count as f64) * q) as usize;
        if idx >= count {
            continue;
        }
        let k = norms[idx];
        let tail = norms.iter().filter(|&&x| x > k).count();
        if tail == 0 {
            continue;
        }
        thresholds.push(k);
        log_tail.push((tail as f64 / count as f64).ln());
    }
    let slope = if thresholds.len() >= 2 {
        Some(least_squares_slope(
            &thresholds.iter().map(|k| k * k).collect::<Vec<_>>(),
            &log_tail,
        ))
    } else {
        None
    };
    Ok(TailCurve {
        thresholds,
        log_tail,
        slope,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
