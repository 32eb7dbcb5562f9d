//! Frequency combinatorics for the quartic interaction: the resonance
//! function, zeta-set classification, modulation-region partition, exact root
//! counting, the two counting lemmas by exhaustive enumeration on dyadic
//! shells, the denominator cancellation identity, and the matrix-norm lemma.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One quartic interaction `n = n1 + n2 + n3 + n4` with all entries nonzero,
/// optionally carrying modulation weights `(sigma, sigma_1..sigma_4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTuple {
    pub n: i64,
    pub parts: [i64; 4],
    pub weights: Option<[f64; 5]>,
}

impl FrequencyTuple {
    pub fn new(n: i64, parts: [i64; 4]) -> Result<Self> {
        if n == 0 || parts.contains(&0) {
            return Err(Error::InvalidParameter(
                "frequency entries must be nonzero".into(),
            ));
        }
        if parts.iter().sum::<i64>() != n {
            return Err(Error::InvalidParameter(format!(
                "convolution constraint violated: {} != {}+{}+{}+{}",
                n, parts[0], parts[1], parts[2], parts[3]
            )));
        }
        Ok(Self {
            n,
            parts,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: [f64; 5]) -> Self {
        self.weights = Some(weights);
        self
    }

    /// Largest absolute frequency among all five entries.
    pub fn n_max(&self) -> i64 {
        self.parts
            .iter()
            .map(|v| v.abs())
            .fold(self.n.abs(), i64::max)
    }
}

fn cube(x: i64) -> i128 {
    let x = x as i128;
    x * x * x
}

/// Exact resonance function `Omega = n^3 - n1^3 - n2^3 - n3^3 - n4^3`.
pub fn resonance_fn(t: &FrequencyTuple) -> i128 {
    cube(t.n) - t.parts.iter().map(|&v| cube(v)).sum::<i128>()
}

/// The cubic two-factor identity `n^3 - n1^3 - n2^3 = 3 n n1 n2` for
/// `n = n1 + n2`; returns both sides.
pub fn kdv_factorization_check(n: i64, n1: i64, n2: i64) -> Result<(i128, i128)> {
    if n == 0 || n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter("zero mode".into()));
    }
    if n != n1 + n2 {
        return Err(Error::InvalidParameter(
            "requires n = n1 + n2".into(),
        ));
    }
    let lhs = cube(n) - cube(n1) - cube(n2);
    let rhs = 3 * n as i128 * n1 as i128 * n2 as i128;
    Ok((lhs, rhs))
}

/// Zeta-set membership of a quartic interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaClass {
    /// `n != n_k` for every k and `n1` is not the negative of `n2, n3, n4`
    Zeta1,
    /// the complementary coincidence set
    Zeta2,
    /// defensive: unreachable for tuples satisfying the type invariant
    Excluded,
}

fn is_zeta1(n: i64, parts: &[i64; 4]) -> bool {
    if parts.contains(&n) {
        return false;
    }
    let [n1, n2, n3, n4] = *parts;
    !(n1 == -n2 || n1 == -n3 || n1 == -n4)
}

pub fn zeta_classify(t: &FrequencyTuple) -> ZetaClass {
    if t.n == 0 || t.parts.contains(&0) || t.parts.iter().sum::<i64>() != t.n {
        return ZetaClass::Excluded;
    }
    if is_zeta1(t.n, &t.parts) {
        ZetaClass::Zeta1
    } else {
        ZetaClass::Zeta2
    }
}

/// Worst (smallest) value of `|Omega| / n_max^2` over the structured
/// coincidence tuples with all entries in `[-max_n, max_n] \ {0}`.
#[derive(Debug, Clone)]
pub struct Zeta2Report {
    pub min_ratio: f64,
    pub witness: FrequencyTuple,
    pub tuples: u64,
}

/// Enumerates the two-coincidence patterns that make up the zeta_2 set (a
/// triple coincidence only sharpens the bound) and verifies that each tuple
/// has `|Omega| >= n_max^2`. Patterns, up to which of the symmetric slots
/// `n2, n3, n4` participate:
///   (i) n = n1 = nj, (ii) n = nj = nk, (iii) n = n1 and n1 = -nj,
///   (iv) n1 = -nj = -nk, (v) n = -n1 and n = nj;
/// the remaining pattern `n = nj, n1 = -nk` forces the leftover entry to 0
/// and is impossible.
pub fn verify_zeta2_lower_bound(max_n: i64) -> Result<Zeta2Report> {
    if !(1..=64).contains(&max_n) {
        return Err(Error::BudgetExceeded(format!(
            "zeta2 enumeration capped at max_n = 64, got {max_n}"
        )));
    }
    let nonzero = |v: i64| v != 0 && v.abs() <= max_n;
    let mut best: Option<(f64, FrequencyTuple)> = None;
    let mut tuples = 0u64;
    let mut consider = |n: i64, parts: [i64; 4]| {
        if !nonzero(n) || !parts.iter().all(|&v| nonzero(v)) {
            return;
        }
        if parts.iter().sum::<i64>() != n {
            return;
        }
        let t = FrequencyTuple {
            n,
            parts,
            weights: None,
        };
        debug_assert_eq!(zeta_classify(&t), ZetaClass::Zeta2);
        tuples += 1;
        let nmx = t.n_max();
        let ratio = resonance_fn(&t).unsigned_abs() as f64 / (nmx * nmx) as f64;
        if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
            best = Some((ratio, t));
        }
    };

    let range = (-max_n..=max_n).filter(|&v| v != 0);
    // slot permutations: which of the indices {1,2,3} of `rest` play each role
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let place = |first: i64, rest: [i64; 3], perm: &[usize; 3]| {
        let mut parts = [first, 0, 0, 0];
        for (slot, &src) in perm.iter().enumerate() {
            parts[slot + 1] = rest[src];
        }
        parts
    };
    for a in range.clone() {
        for b in (-max_n..=max_n).filter(|&v| v != 0) {
            for perm in &PERMS {
                // (i) n = n1 = nj, remaining pair sums to -n
                consider(a, place(a, [a, b, -a - b], perm));
                // (ii) n = nj = nk, n1 + leftover = -n
                consider(a, place(b, [a, a, -a - b], perm));
                // (iii) n = n1, nj = -n, remaining pair sums to n
                consider(a, place(a, [-a, b, a - b], perm));
                // (iv) nj = nk = -n1, n = -n1 + leftover
                consider(b - a, place(a, [-a, -a, b], perm));
                // (v) n1 = -n, nj = n, remaining pair sums to n
                consider(a, place(-a, [a, b, a - b], perm));
            }
        }
    }
    let (min_ratio, witness) =
        best.ok_or_else(|| Error::Degenerate("no zeta2 tuples enumerated".into()))?;
    Ok(Zeta2Report {
        min_ratio,
        witness,
        tuples,
    })
}

/// Modulation-region label from the partition of the interaction set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    AMinus1,
    A0,
    A1,
    A2,
    A3,
    A4,
}

/// Priority partition: `A_{-1}` when every modulation is below
/// `c_low * n_max^2`, otherwise the first weight reaching `c_high * n_max^2`
/// in the order `sigma, sigma_1, ..., sigma_4` (falling back to the largest
/// weight when the thresholds leave a gap, so the function stays total).
pub fn region_classify(t: &FrequencyTuple, c_low: f64, c_high: f64) -> Result<RegionLabel> {
    let w = t.weights.ok_or_else(|| {
        Error::InvalidParameter("region classification needs modulation weights".into())
    })?;
    let nmx = t.n_max() as f64;
    let scale = nmx * nmx;
    let sigma_max = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if sigma_max < c_low * scale {
        return Ok(RegionLabel::AMinus1);
    }
    const LABELS: [RegionLabel; 5] = [
        RegionLabel::A0,
        RegionLabel::A1,
        RegionLabel::A2,
        RegionLabel::A3,
        RegionLabel::A4,
    ];
    for (i, v) in w.iter().enumerate() {
        if v.abs() >= c_high * scale {
            return Ok(LABELS[i]);
        }
    }
    let argmax = w
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(LABELS[argmax])
}

fn isqrt_u128(v: u128) -> u128 {
    if v == 0 {
        return 0;
    }
    let mut x = (v as f64).sqrt() as u128;
    while x.checked_mul(x).map(|s| s > v).unwrap_or(true) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map(|s| s <= v).unwrap_or(false) {
        x += 1;
    }
    x
}

/// Integer roots `n1` of `mu = n^3 - n1^3 - (K - n1)^3 - n3^3 - n4^3` with
/// `K = n - n3 - n4`, i.e. of the quadratic
/// `3 K n1^2 - 3 K^2 n1 + (mu - n^3 + K^3 + n3^3 + n4^3) = 0`.
/// Roots that would force `n1 = 0` or `n2 = 0` are dropped.
pub fn quad_roots(n: i64, n3: i64, n4: i64, mu: i128) -> Result<Vec<i64>> {
    let k = n - n3 - n4;
    if k == 0 {
        return Err(Error::Degenerate(
            "n1 + n2 = 0: the equation degenerates and the quadratic root count does not apply"
                .into(),
        ));
    }
    let a = 3 * k as i128;
    let b = -3 * (k as i128) * (k as i128);
    let c = mu - cube(n) + cube(k) + cube(n3) + cube(n4);
    let disc = b * b - 4 * a * c;
    if disc < 0 {
        return Ok(Vec::new());
    }
    let root = isqrt_u128(disc as u128);
    if root * root != disc as u128 {
        return Ok(Vec::new());
    }
    let root = root as i128;
    let mut out = Vec::new();
    for sign in [1i128, -1] {
        let num = -b + sign * root;
        if num % (2 * a) != 0 {
            continue;
        }
        let n1 = num / (2 * a);
        let n2 = k as i128 - n1;
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let n1 = i64::try_from(n1)
            .map_err(|_| Error::InvalidParameter("root out of i64 range".into()))?;
        if !out.contains(&n1) {
            out.push(n1);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Which counting lemma to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingLemma {
    /// paired second-iteration set with the top pair cancelling (CASE 1
    /// context): 12-index tuples over shells `(N, N1, N3, N4)`, counted at
    /// fixed `(n4, mu)`; bound `(N^0)^3`
    L1bi,
    /// paired set in the CASE 2.c context: 7-index tuples over shells
    /// `(N, N1, N2, N3, N4)`, counted at fixed `(n, mu)`; bound
    /// `min(N1 N2, N1 N3, N2 N3)`
    L2ci,
}

#[derive(Debug, Clone)]
pub struct CountReport {
    pub lemma: CountingLemma,
    pub sizes: Vec<usize>,
    /// worst exact count over the fixed-parameter fibers
    pub count: u64,
    /// the lemma's strict upper bound
    pub bound: u64,
}

impl CountReport {
    pub fn holds(&self) -> bool {
        self.count < self.bound
    }
}

fn shell(size: usize) -> Vec<i64> {
    let s = size as i64;
    (s..2 * s).flat_map(|a| [a, -a]).collect()
}

fn in_shell(v: i64, size: usize) -> bool {
    let s = size as i64;
    v != 0 && (s..2 * s).contains(&v.abs())
}

fn check_sizes(sizes: &[usize], want: usize) -> Result<()> {
    if sizes.len() != want {
        return Err(Error::InvalidParameter(format!(
            "expected {want} dyadic sizes, got {}",
            sizes.len()
        )));
    }
    for &s in sizes {
        if !s.is_power_of_two() || s > 16 {
            return Err(Error::BudgetExceeded(format!(
                "dyadic sizes must be powers of two <= 16, got {s}"
            )));
        }
    }
    Ok(())
}

/// `n != n_k` ordering and coincidence filters shared by both lemmas.
fn ordered_zeta1(n: i64, parts: &[i64; 4]) -> bool {
    let [_, n2, n3, n4] = *parts;
    n2.abs() >= n3.abs() && n3.abs() >= n4.abs() && is_zeta1(n, parts)
}

fn a_minus1(n: i64, parts: &[i64; 4], mu: i128) -> bool {
    let nmx = parts.iter().map(|v| v.abs()).fold(n.abs(), i64::max) as i128;
    mu.abs() < nmx * nmx
}

/// Five entries `(-n, n1, n2, n3, n4)` sorted by decreasing magnitude.
fn ordered5(n: i64, parts: &[i64; 4]) -> [i64; 5] {
    let mut e = [-n, parts[0], parts[1], parts[2], parts[3]];
    e.sort_by_key(|v| std::cmp::Reverse(v.abs()));
    e
}

/// CASE 1 shape: among the maximal-magnitude entries, two cancel.
fn case1_top_pair(n: i64, parts: &[i64; 4]) -> bool {
    let e = ordered5(n, parts);
    let m = e[0].abs();
    let tops: Vec<i64> = e.iter().copied().filter(|v| v.abs() == m).collect();
    tops.iter()
        .enumerate()
        .any(|(i, &x)| tops[i + 1..].contains(&-x))
}

/// CASE 2.c shape: no cancelling top pair, `N^3 < N^0`, and
/// `N^2 N^3 N^4 >= N^0 N^1 |n^0 + n^1|`.
fn case2c(n: i64, parts: &[i64; 4]) -> bool {
    let e = ordered5(n, parts);
    if e[0] == -e[1] {
        return false;
    }
    let nn: Vec<i128> = e.iter().map(|v| v.abs() as i128).collect();
    if nn[3] >= nn[0] {
        return false;
    }
    nn[2] * nn[3] * nn[4] >= nn[0] * nn[1] * (e[0] + e[1]).unsigned_abs() as i128
}

/// Multiset closed under negation: the Wick-pairing condition for a nonzero
/// Gaussian moment.
fn wick_pairs(indices: &[i64]) -> bool {
    let mut counts = std::collections::HashMap::new();
    for &v in indices {
        *counts.entry(v).or_insert(0i64) += 1;
    }
    counts
        .iter()
        .all(|(&k, &c)| counts.get(&-k).copied().unwrap_or(0) == c)
}

fn count_l1bi(sizes: &[usize]) -> Result<CountReport> {
    check_sizes(sizes, 4)?;
    let (s_n, s_n1, s_n3, s_n4) = (sizes[0], sizes[1], sizes[2], sizes[3]);
    let n0 = *sizes.iter().max().expect("nonempty") as u64;
    let bound = n0 * n0 * n0;
    let mut worst = 0u64;
    for n4 in shell(s_n4) {
        // admissible (n1, n2) pairs per (n, n3, mu), and the (n, n3) pairs
        // present per mu
        let mut cand: std::collections::HashMap<(i64, i64, i128), Vec<(i64, i64)>> =
            std::collections::HashMap::new();
        let mut fibers: std::collections::HashMap<i128, Vec<i64>> =
            std::collections::HashMap::new();
        for n in shell(s_n) {
            for n3 in shell(s_n3) {
                let k = n - n3 - n4;
                if k == 0 {
                    continue;
                }
                for n1 in shell(s_n1) {
                    let n2 = k - n1;
                    if n2 == 0 {
                        continue;
                    }
                    let parts = [n1, n2, n3, n4];
                    if !ordered_zeta1(n, &parts) || !case1_top_pair(n, &parts) {
                        continue;
                    }
                    let t = FrequencyTuple {
                        n,
                        parts,
                        weights: None,
                    };
                    let mu = resonance_fn(&t);
                    if !a_minus1(n, &parts, mu) {
                        continue;
                    }
                    cand.entry((n, n3, mu)).or_default().push((n1, n2));
                    let ns = fibers.entry(mu).or_default();
                    if !ns.contains(&n) {
                        ns.push(n);
                    }
                }
            }
        }
        for (&mu, ns) in &fibers {
            let mut count = 0u64;
            for &n in ns {
                for &np in ns {
                    if n == np {
                        continue;
                    }
                    for &n3 in &shell(s_n3) {
                        let (Some(a), Some(b)) =
                            (cand.get(&(n, n3, mu)), cand.get(&(np, n3, mu)))
                        else {
                            continue;
                        };
                        for &m3 in &shell(s_n3) {
                            let (Some(c), Some(d)) =
                                (cand.get(&(n, m3, mu)), cand.get(&(np, m3, mu)))
                            else {
                                continue;
                            };
                            for &(n1, n2) in a {
                                for &(n1p, n2p) in b {
                                    for &(m1, m2) in c {
                                        for &(m1p, m2p) in d {
                                            if wick_pairs(&[
                                                n1, n2, -n1p, -n2p, -m1, -m2, m1p, m2p,
                                            ]) {
                                                count += 1;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            worst = worst.max(count);
        }
    }
    Ok(CountReport {
        lemma: CountingLemma::L1bi,
        sizes: sizes.to_vec(),
        count: worst,
        bound,
    })
}

fn count_l2ci(sizes: &[usize]) -> Result<CountReport> {
    check_sizes(sizes, 5)?;
    let (s_n, s_n1, s_n2, s_n3, s_n4) = (sizes[0], sizes[1], sizes[2], sizes[3], sizes[4]);
    let (b1, b2, b3) = (s_n1 as u64, s_n2 as u64, s_n3 as u64);
    let bound = (b1 * b2).min(b1 * b3).min(b2 * b3);
    let mut cand: std::collections::HashMap<(i64, i128), Vec<[i64; 4]>> =
        std::collections::HashMap::new();
    for n in shell(s_n) {
        for n4 in shell(s_n4) {
            for n1 in shell(s_n1) {
                for n2 in shell(s_n2) {
                    let n3 = n - n1 - n2 - n4;
                    if !in_shell(n3, s_n3) {
                        continue;
                    }
                    let parts = [n1, n2, n3, n4];
                    if !ordered_zeta1(n, &parts) || !case2c(n, &parts) {
                        continue;
                    }
                    let t = FrequencyTuple {
                        n,
                        parts,
                        weights: None,
                    };
                    let mu = resonance_fn(&t);
                    if !a_minus1(n, &parts, mu) {
                        continue;
                    }
                    cand.entry((n, mu)).or_default().push(parts);
                }
            }
        }
    }
    let mut worst = 0u64;
    for list in cand.values() {
        let mut count = 0u64;
        for t in list {
            for m in list {
                if m[3] != t[3] {
                    continue;
                }
                if wick_pairs(&[t[0], t[1], t[2], -m[0], -m[1], -m[2]]) {
                    count += 1;
                }
            }
        }
        worst = worst.max(count);
    }
    Ok(CountReport {
        lemma: CountingLemma::L2ci,
        sizes: sizes.to_vec(),
        count: worst,
        bound,
    })
}

/// Exhaustive enumeration of the paired interaction sets of the two counting
/// lemmas on the given dyadic shells; returns the worst fiber count and the
/// lemma's strict bound.
pub fn count_resonant_tuples(lemma: CountingLemma, sizes: &[usize]) -> Result<CountReport> {
    match lemma {
        CountingLemma::L1bi => count_l1bi(sizes),
        CountingLemma::L2ci => count_l2ci(sizes),
    }
}

#[derive(Debug, Clone)]
pub struct CancellationReport {
    pub max_relative_residual: f64,
    pub resamples: u64,
}

/// Partial-fraction cancellation of the paired second-iteration denominators:
/// with `s = n2 + n3 + n4 != 0`, `n1 = n - s`,
/// `n8 = -(n2 + n3 + n4 + n6 + n7)`, `tau = tau2 + ... + tau8`,
/// `D2 = tau - tau2 - tau3 - tau4 - (n - s)^3`,
/// `D1 = tau - tau6 - tau7 - tau8 - (n + s)^3`,
/// the identity `1/D1 + 1/D2 = (tau + tau5 - 2 n^3 - 6 n (n - n1)^2)/(D1 D2)`
/// holds exactly; this samples random admissible tuples and reports the worst
/// relative residual.
pub fn cancellation_identity_check(samples: usize, seed: u64) -> Result<CancellationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_mode = |rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(-30i64..=30);
        if v != 0 {
            return v;
        }
    };
    let mut worst = 0.0f64;
    let mut resamples = 0u64;
    let mut accepted = 0usize;
    while accepted < samples {
        let n = draw_mode(&mut rng);
        let n2 = draw_mode(&mut rng);
        let n3 = draw_mode(&mut rng);
        let n4 = draw_mode(&mut rng);
        let n6 = draw_mode(&mut rng);
        let n7 = draw_mode(&mut rng);
        let s = n2 + n3 + n4;
        let n1 = n - s;
        let n8 = -(n2 + n3 + n4 + n6 + n7);
        if s == 0 || n1 == 0 || n8 == 0 {
            resamples += 1;
            continue;
        }
        let taus: Vec<f64> = (0..7).map(|_| rng.gen_range(-100.0..100.0)).collect();
        // taus = (tau2, tau3, tau4, tau5, tau6, tau7, tau8)
        let tau: f64 = taus.iter().sum();
        let tau5 = taus[3];
        let d2 = tau - taus[0] - taus[1] - taus[2] - cube(n - s) as f64;
        let d1 = tau - taus[4] - taus[5] - taus[6] - cube(n + s) as f64;
        if d1.abs() < 1e-6 || d2.abs() < 1e-6 {
            resamples += 1;
            continue;
        }
        accepted += 1;
        let lhs = 1.0 / d1 + 1.0 / d2;
        let numer =
            tau + tau5 - 2.0 * cube(n) as f64 - 6.0 * n as f64 * ((n - n1) as f64).powi(2);
        let rhs = numer / (d1 * d2);
        let denom = lhs.abs().max(1e-300);
        worst = worst.max((lhs - rhs).abs() / denom);
    }
    Ok(CancellationReport {
        max_relative_residual: worst,
        resamples,
    })
}

/// Schur-style bound `sup_n |a_nn| + (sum_{n != n'} |a_nn'|^2)^{1/2}`
/// against the true spectral norm computed by power iteration on `A* A`.
pub fn matrix_norm_bound(a: &[Vec<Complex64>]) -> Result<(f64, f64)> {
    let dim = a.len();
    if dim == 0 || dim > 512 {
        return Err(Error::InvalidParameter(
            "matrix dimension must be in 1..=512".into(),
        ));
    }
    if a.iter().any(|row| row.len() != dim) {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let mut diag = 0.0f64;
    let mut off = 0.0f64;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag = diag.max(v.norm());
            } else {
                off += v.norm_sqr();
            }
        }
    }
    let bound = diag + off.sqrt();

    // power iteration on A* A
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let ax: Vec<Complex64> = a
            .iter()
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
            .collect();
        (0..dim)
            .map(|j| (0..dim).map(|i| a[i][j].conj() * ax[i]).sum())
            .collect()
    };
    let mut v: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let norm = |x: &[Complex64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    for c in &mut v {
        *c /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..10_000 {
        let w = apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok((bound, 0.0));
        }
        let next: Vec<Complex64> = w.iter().map(|c| c / nw).collect();
        if (nw - lambda).abs() <= 1e-10 * nw.max(1.0) {
            return Ok((bound, nw.sqrt()));
        }
        lambda = nw;
        v = next;
    }
    Err(Error::NonConvergence(10_000))
}
