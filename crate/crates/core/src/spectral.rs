//! Mean-zero real fields on the torus as truncated Fourier series.
//!
//! A field `u(x) = sum_{0<|n|<=N} c_n e^{inx}` with `c_{-n} = conj(c_n)` is
//! stored as the positive-mode coefficients `c_1..c_N` only, so realness and
//! mean zero are structural. Nonlinear products are computed on zero-padded
//! grids large enough that no aliasing reaches the retained modes.
//!
//! Conventions used throughout the crate:
//! `||u||_{L^2}^2 = 2 pi sum_{n != 0} |c_n|^2` and `<n> = 1 + |n|`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_inplace(buf: &mut [Complex64], forward: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if forward {
            planner.plan_fft_forward(buf.len())
        } else {
            planner.plan_fft_inverse(buf.len())
        };
        fft.process(buf);
    });
}

/// Mean-zero real field stored as Hermitian Fourier coefficients `c_1..c_N`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Build a field from the coefficients `c_1..c_N`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("max mode must be >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectral coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(max_mode: usize) -> Self {
        assert!(max_mode >= 1);
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); max_mode],
        }
    }

    /// Field with a single nonzero mode `c_n = value`.
    pub fn single_mode(max_mode: usize, n: usize, value: Complex64) -> Self {
        assert!(n >= 1 && n <= max_mode);
        let mut f = Self::zero(max_mode);
        f.coeffs[n - 1] = value;
        f
    }

    pub fn max_mode(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient `c_n` for `1 <= n <= N`.
    pub fn coeff(&self, n: usize) -> Complex64 {
        assert!(n >= 1 && n <= self.coeffs.len());
        self.coeffs[n - 1]
    }

    /// Coefficient for any integer mode; negative modes by Hermitian symmetry,
    /// zero and out-of-band modes are zero.
    pub fn coeff_signed(&self, n: i64) -> Complex64 {
        let a = n.unsigned_abs() as usize;
        if n == 0 || a > self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else if n > 0 {
            self.coeffs[a - 1]
        } else {
            self.coeffs[a - 1].conj()
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `n` with `c_n != 0`, or 0 for the zero field.
    pub fn effective_max_mode(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm_sqr() > 0.0)
            .map_or(0, |i| i + 1)
    }
}

/// Real samples on the uniform grid `x_j = 2 pi j / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid value".into()));
        }
        Ok(Self { values })
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Sobolev exponent for `H^s` norms with the bracket `<n> = 1 + |n|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub s: f64,
}

impl NormSpec {
    pub fn new(s: f64) -> Self {
        Self { s }
    }
}

pub fn bracket(n: f64) -> f64 {
    1.0 + n.abs()
}

/// Synthesize grid values `u(x_j)` on `M` points; requires `M >= 2N + 1`.
pub fn to_grid(f: &SpectralField, grid_size: usize) -> Result<GridField> {
    let n_max = f.max_mode();
    if grid_size < 2 * n_max + 1 {
        return Err(Error::GridTooSmall {
            grid: grid_size,
            max_mode: n_max,
            needed: 2 * n_max + 1,
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    for n in 1..=n_max {
        let c = f.coeff(n);
        buf[n] = c;
        buf[grid_size - n] = c.conj();
    }
    fft_inplace(&mut buf, false);
    GridField::new(buf.into_iter().map(|z| z.re).collect())
}

/// Analyze grid values into modes `1..=N`; the (discarded) spatial mean is
/// returned separately.
pub fn from_grid(g: &GridField, max_mode: usize) -> Result<(SpectralField, f64)> {
    let m = g.grid_size();
    if m < 2 * max_mode + 1 {
        return Err(Error::GridTooSmall {
            grid: m,
            max_mode,
            needed: 2 * max_mode + 1,
        });
    }
    let mut buf: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_inplace(&mut buf, true);
    let scale = 1.0 / m as f64;
    let mean = buf[0].re * scale;
    let coeffs = (1..=max_mode).map(|n| buf[n] * scale).collect();
    Ok((SpectralField::new(coeffs)?, mean))
}

/// Dirichlet projection to modes `|n| <= cutoff`; the stored band keeps its
/// width so projections compose without reallocation surprises.
pub fn project(f: &SpectralField, cutoff: usize) -> SpectralField {
    assert!(cutoff >= 1, "cutoff must be >= 1");
    let mut out = f.clone();
    for n in (cutoff + 1)..=f.max_mode() {
        out.coeffs[n - 1] = Complex64::new(0.0, 0.0);
    }
    out
}

/// Spatial derivative: `c_n -> i n c_n`.
pub fn derivative(f: &SpectralField) -> SpectralField {
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| Complex64::new(0.0, (i + 1) as f64) * c)
        .collect();
    SpectralField { coeffs }
}

/// `H^s` norm: `sqrt(2 pi sum_{n != 0} <n>^{2s} |c_n|^2)`.
pub fn sobolev_norm(f: &SpectralField, spec: NormSpec) -> f64 {
    let sum: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| bracket((i + 1) as f64).powf(2.0 * spec.s) * c.norm_sqr())
        .sum();
    (4.0 * std::f64::consts::PI * sum).sqrt()
}

/// `L^2` norm (`H^0` with a unit bracket weight).
pub fn l2_norm(f: &SpectralField) -> f64 {
    let sum: f64 = f.coeffs.iter().map(|c| c.norm_sqr()).sum();
    (4.0 * std::f64::consts::PI * sum).sqrt()
}

fn padded_grid_size(product_band: usize) -> usize {
    (product_band + 1).next_power_of_two().max(8)
}

/// Exact (alias-free) Fourier coefficients of a pointwise product of 2 to 5
/// fields, truncated to modes `<= out_cutoff` with the mean removed.
pub fn power_product(fields: &[&SpectralField], out_cutoff: usize) -> Result<SpectralField> {
    let k = fields.len();
    if !(2..=5).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "product of {k} fields unsupported (need 2..=5)"
        )));
    }
    if out_cutoff < 1 {
        return Err(Error::InvalidParameter("out_cutoff must be >= 1".into()));
    }
    let n_max = fields.iter().map(|f| f.max_mode()).max().unwrap();
    let band = out_cutoff.min(k * n_max).max(1);
    // The product has frequency content up to k*N; a grid of at least
    // k*N + band + 1 points keeps every retained mode alias-free.
    let m = padded_grid_size(k * n_max + band);
    let mut grid = vec![1.0f64; m];
    for f in fields {
        let g = to_grid(f, m)?;
        for (acc, v) in grid.iter_mut().zip(g.values()) {
            *acc *= v;
        }
    }
    let (full, _mean) = from_grid(&GridField::new(grid)?, band)?;
    let mut coeffs = full.coeffs;
    coeffs.resize(out_cutoff, Complex64::new(0.0, 0.0));
    SpectralField::new(coeffs)
}

/// `int_T u^p dx` by quadrature on a padding-exact grid, `2 <= p <= 5`.
pub fn integral_of_power(f: &SpectralField, p: u32) -> Result<f64> {
    if !(2..=5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "integral_of_power: p = {p} out of range 2..=5"
        )));
    }
    let n_max = f.max_mode();
    let m = padded_grid_size(p as usize * n_max).max(2 * n_max + 2);
    let g = to_grid(f, m)?;
    let sum: f64 = g.values().iter().map(|&v| v.powi(p as i32)).sum();
    Ok(sum * 2.0 * std::f64::consts::PI / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct O(M*N) synthesis, the oracle for the FFT path.
    fn synth_direct(f: &SpectralField, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| {
                let x = 2.0 * PI * j as f64 / m as f64;
                (1..=f.max_mode())
                    .map(|n| 2.0 * (f.coeff(n) * Complex64::new(0.0, n as f64 * x).exp()).re)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn to_grid_single_cosine() {
        let f = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        let g = to_grid(&f, 8).unwrap();
        for (j, &v) in g.values().iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 8.0;
            assert_relative_eq!(v, 2.0 * x.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn to_grid_zero_field() {
        let g = to_grid(&SpectralField::zero(4), 16).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn to_grid_imaginary_mode_is_negative_sine() {
        let f = SpectralField::single_mode(1, 1, c(0.0, 1.0));
        let g = to_grid(&f, 8).unwrap();
        let oracle = synth_direct(&f, 8);
        for (j, (&v, &o)) in g.values().iter().zip(&oracle).enumerate() {
            let x = 2.0 * PI * j as f64 / 8.0;
            assert_relative_eq!(v, -2.0 * x.sin(), epsilon = 1e-12);
            assert_relative_eq!(v, o, epsilon = 1e-12);
        }
    }

    #[test]
    fn to_grid_rejects_small_grid() {
        let f = SpectralField::zero(4);
        assert!(to_grid(&f, 8).is_err());
    }

    #[test]
    fn grid_round_trip() {
        let f = SpectralField::new(vec![c(0.3, -0.2), c(0.0, 0.0), c(1.5, 0.7)]).unwrap();
        let g = to_grid(&f, 4 * f.max_mode()).unwrap();
        let (back, mean) = from_grid(&g, f.max_mode()).unwrap();
        assert!(mean.abs() < 1e-13);
        for n in 1..=3 {
            assert!((back.coeff(n) - f.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn from_grid_reports_mean() {
        let m = 16;
        let vals: Vec<f64> = (0..m)
            .map(|j| {
                let x = 2.0 * PI * j as f64 / m as f64;
                2.0 * x.cos() + 3.0
            })
            .collect();
        let (f, mean) = from_grid(&GridField::new(vals).unwrap(), 2).unwrap();
        assert_relative_eq!(mean, 3.0, epsilon = 1e-12);
        assert!((f.coeff(1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(f.coeff(2).norm() < 1e-12);
    }

    #[test]
    fn from_grid_constant_is_zero_field() {
        let (f, mean) = from_grid(&GridField::new(vec![1.0; 8]).unwrap(), 2).unwrap();
        assert_relative_eq!(mean, 1.0);
        assert!(f.coeffs().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn projection_truncates_and_nests() {
        let mut f = SpectralField::zero(3);
        f.coeffs_mut()[0] = c(1.0, 0.0);
        f.coeffs_mut()[2] = c(2.0, 0.0);
        let p2 = project(&f, 2);
        assert_eq!(p2.coeff(1), c(1.0, 0.0));
        assert_eq!(p2.coeff(3), c(0.0, 0.0));
        // K >= N is the identity
        assert_eq!(project(&f, 5), f);
        // nesting
        assert_eq!(project(&project(&f, 5), 3), project(&f, 3));
        // idempotent
        assert_eq!(project(&p2, 2), p2);
    }

    #[test]
    fn derivative_symbol() {
        let f = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        assert_eq!(derivative(&f).coeff(1), c(0.0, 1.0));
        let z = derivative(&SpectralField::zero(3));
        assert!(z.coeffs().iter().all(|v| v.norm() == 0.0));
        // triple application equals the (in)^3 = -i n^3 symbol
        let g = SpectralField::new(vec![c(0.5, 0.1), c(-0.3, 0.2)]).unwrap();
        let d3 = derivative(&derivative(&derivative(&g)));
        for n in 1..=2u32 {
            let sym = Complex64::new(0.0, -((n as f64).powi(3)));
            assert!((d3.coeff(n as usize) - sym * g.coeff(n as usize)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_by_finite_differences() {
        let f = SpectralField::new(vec![c(0.4, -0.1), c(0.2, 0.3)]).unwrap();
        let m = 4096;
        let g = to_grid(&f, m).unwrap();
        let d = to_grid(&derivative(&f), m).unwrap();
        let h = 2.0 * PI / m as f64;
        for j in 0..m {
            let fd = (g.values()[(j + 1) % m] - g.values()[(j + m - 1) % m]) / (2.0 * h);
            assert_relative_eq!(d.values()[j], fd, epsilon = 1e-4);
        }
    }

    #[test]
    fn derivative_commutes_with_projection() {
        let f = SpectralField::new(vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.5)]).unwrap();
        assert_eq!(project(&derivative(&f), 2), derivative(&project(&f, 2)));
    }

    #[test]
    fn sobolev_norm_closed_forms() {
        let f = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        assert_relative_eq!(
            sobolev_norm(&f, NormSpec::new(0.0)),
            (4.0 * PI).sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            sobolev_norm(&f, NormSpec::new(1.0)),
            (16.0 * PI).sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(sobolev_norm(&SpectralField::zero(3), NormSpec::new(0.5)), 0.0);
    }

    #[test]
    fn l2_norm_matches_quadrature() {
        let f = SpectralField::new(vec![c(0.7, -0.4), c(0.1, 0.9)]).unwrap();
        let m = 64;
        let g = to_grid(&f, m).unwrap();
        let quad: f64 = g.values().iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / m as f64;
        assert_relative_eq!(l2_norm(&f).powi(2), quad, max_relative = 1e-10);
    }

    #[test]
    fn cube_of_cosine() {
        // (2 cos x)^3 = 6 cos x + 2 cos 3x
        let u = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        let p = power_product(&[&u, &u, &u], 3).unwrap();
        assert!((p.coeff(1) - c(3.0, 0.0)).norm() < 1e-12);
        assert!(p.coeff(2).norm() < 1e-12);
        assert!((p.coeff(3) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn product_with_zero_field() {
        let u = SpectralField::single_mode(2, 1, c(1.0, 0.5));
        let z = SpectralField::zero(2);
        let p = power_product(&[&u, &z], 4).unwrap();
        assert!(p.coeffs().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn quartic_gauged_nonlinearity_example() {
        // u = 2 cos x: u^3 * u_x = -4 sin 2x - 2 sin 4x  =>  c_2 = 2i, c_4 = i
        let u = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        let ux = derivative(&u);
        let p = power_product(&[&u, &u, &u, &ux], 4).unwrap();
        assert!((p.coeff(2) - c(0.0, 2.0)).norm() < 1e-12);
        assert!((p.coeff(4) - c(0.0, 1.0)).norm() < 1e-12);
        assert!(p.coeff(1).norm() < 1e-12);
        assert!(p.coeff(3).norm() < 1e-12);
    }

    /// Brute-force convolution oracle for products of k fields.
    fn convolve_direct(fields: &[&SpectralField], out_cutoff: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); out_cutoff];
        let ns: Vec<i64> = fields.iter().map(|f| f.max_mode() as i64).collect();
        fn rec(
            fields: &[&SpectralField],
            ns: &[i64],
            depth: usize,
            sum: i64,
            acc: Complex64,
            out: &mut [Complex64],
        ) {
            if depth == fields.len() {
                if sum >= 1 && (sum as usize) <= out.len() {
                    out[sum as usize - 1] += acc;
                }
                return;
            }
            for n in -ns[depth]..=ns[depth] {
                if n == 0 {
                    continue;
                }
                let c = fields[depth].coeff_signed(n);
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                rec(fields, ns, depth + 1, sum + n, acc * c, out);
            }
        }
        rec(fields, &ns, 0, 0, Complex64::new(0.0, 0.0) + 1.0, &mut out);
        out
    }

    #[test]
    fn power_product_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in 2..=5usize {
            let n = 8;
            let fields: Vec<SpectralField> = (0..k)
                .map(|_| {
                    SpectralField::new(
                        (0..n)
                            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            let refs: Vec<&SpectralField> = fields.iter().collect();
            let fast = power_product(&refs, n).unwrap();
            let slow = convolve_direct(&refs, n);
            for (i, s) in slow.iter().enumerate().take(n) {
                assert!(
                    (fast.coeffs()[i] - s).norm() <= 1e-10 * (1.0 + s.norm()),
                    "k={k} mode={} fast={} slow={}",
                    i + 1,
                    fast.coeffs()[i],
                    s
                );
            }
        }
    }

    #[test]
    fn integral_of_power_closed_forms() {
        let u = SpectralField::single_mode(1, 1, c(1.0, 0.0));
        assert_relative_eq!(integral_of_power(&u, 2).unwrap(), 4.0 * PI, epsilon = 1e-10);
        assert!(integral_of_power(&u, 5).unwrap().abs() < 1e-10);
        assert_eq!(integral_of_power(&SpectralField::zero(2), 3).unwrap(), 0.0);
        assert!(integral_of_power(&u, 6).is_err());
    }

    #[test]
    fn perfect_derivative_integrates_to_zero() {
        // int u^p u_x dx = 0 for band-limited u
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for p in 1..=4usize {
            let f = SpectralField::new(
                (0..6)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();
            let ux = derivative(&f);
            let mut factors: Vec<&SpectralField> = vec![&f; p];
            factors.push(&ux);
            let prod = power_product(&factors, 1).unwrap();
            // the zero mode is the integral / 2pi; power_product discards it,
            // so integrate on the grid instead
            let m = 256;
            let gf = to_grid(&f, m).unwrap();
            let gx = to_grid(&ux, m).unwrap();
            let integral: f64 = gf
                .values()
                .iter()
                .zip(gx.values())
                .map(|(&a, &b)| a.powi(p as i32) * b)
                .sum::<f64>()
                * 2.0 * PI
                / m as f64;
            assert!(integral.abs() < 1e-10, "p={p} integral={integral}");
            let _ = prod;
        }
    }
}
