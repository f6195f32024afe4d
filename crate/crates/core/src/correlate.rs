//! Correlation estimators for `cov(Φ∘Fⁿ, ψ) = ν(Φ∘Fⁿ·ψ̄) − ν_av(Φ)ν(ψ)`:
//! exact cylinder enumeration, Monte Carlo over μ-typical words, and the
//! spectral formula `∫_X ∫ (𝓛_{−ξ}ⁿ ψ̂_ξ)(x) dη_x(ξ) dμ(x)` split into bands.
//!
//! All three share the fiber grid of `ψ`, so on atoms they agree to rounding.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::gibbs::RpfData;
use crate::numerics::{derive_seed, fit::fit_line};
use crate::observables::{
    low_freq_variation, nu_av_global, nu_local, Band, FrequencyGrid, GlobalObservable, LocalObservable,
};
use crate::skewprod::FiberCocycle;
use crate::symbolic::{SftSpace, Symbol, WordSpace};
use crate::twisted::TwistedOperator;

/// Default cap on the number of cylinders enumerated by [`cov_exact`].
pub const DEFAULT_EXACT_BUDGET: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    Direct,
    Spectral,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Exact => "exact",
            Estimator::Direct => "direct",
            Estimator::Spectral => "spectral",
        })
    }
}

/// Contributions of `ξ = 0`, `0 < |ξ| < n^{−α}` and `|ξ| ≥ n^{−α}`; the zero
/// band already has `ν_av(Φ)ν(ψ)` subtracted.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct BandSplit {
    pub zero: Complex64,
    pub low: Complex64,
    pub high: Complex64,
}

impl BandSplit {
    pub fn total(&self) -> Complex64 {
        self.zero + self.low + self.high
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationSeries {
    pub estimator: Estimator,
    pub n: Vec<usize>,
    pub cov: Vec<Complex64>,
    /// Standard error (direct) or quadrature error estimate (spectral, exact).
    pub err: Vec<f64>,
    pub bands: Vec<Option<BandSplit>>,
}

impl CorrelationSeries {
    pub fn new(estimator: Estimator, n: Vec<usize>, cov: Vec<Complex64>, err: Vec<f64>) -> Result<Self> {
        if cov.len() != n.len() || err.len() != n.len() {
            return Err(Error::DimensionMismatch { expected: n.len(), got: cov.len().min(err.len()) });
        }
        if n.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidArgument("n values must be strictly increasing".into()));
        }
        if err.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidArgument("errors must be nonnegative".into()));
        }
        let bands = vec![None; n.len()];
        Ok(CorrelationSeries { estimator, n, cov, err, bands })
    }

    /// Series built from a real sequence with zero error, for fitting tests.
    pub fn synthetic(n: Vec<usize>, values: impl Fn(usize) -> f64) -> Result<Self> {
        let cov = n.iter().map(|&k| Complex64::new(values(k), 0.0)).collect();
        let err = vec![0.0; n.len()];
        Self::new(Estimator::Exact, n, cov, err)
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// CSV with columns `n,re_cov,im_cov,err,band0,band_low,band_high,estimator`;
    /// band columns hold real parts and are empty when no split exists.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re_cov,im_cov,err,band0,band_low,band_high,estimator\n");
        for i in 0..self.len() {
            let bands =
                self.bands[i].map_or(",,".to_string(), |b| format!("{:e},{:e},{:e}", b.zero.re, b.low.re, b.high.re));
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{},{}\n",
                self.n[i], self.cov[i].re, self.cov[i].im, self.err[i], bands, self.estimator
            ));
        }
        out
    }
}

/// Word-to-row maps shared by the exact and Monte Carlo estimators.
struct Pairing<'a> {
    phi: &'a GlobalObservable,
    psi: &'a LocalObservable,
    memo: HashMap<(usize, u64, usize), Complex64>,
}

impl<'a> Pairing<'a> {
    fn new(phi: &'a GlobalObservable, psi: &'a LocalObservable) -> Self {
        Pairing { phi, psi, memo: HashMap::new() }
    }

    /// `Σ_j Δr ψ(row, r_j) Φ(w, r_j + shift)` over the support of the row.
    fn fiber_integral(&mut self, phi_word: usize, shift: f64, row: usize) -> Complex64 {
        let (phi, psi) = (self.phi, self.psi);
        *self.memo.entry((phi_word, shift.to_bits(), row)).or_insert_with(|| {
            let grid = psi.grid();
            let (values, lo, hi) = psi.row(row);
            let measure = phi.measure(phi_word);
            let s: Complex64 = (lo..hi).map(|j| measure.transform(grid.point(j) + shift) * values[j]).sum();
            s * grid.dr
        })
    }

    /// The same sum on every second grid point with step `2Δr`.
    fn coarse_fiber_integral(&self, phi_word: usize, shift: f64, row: usize) -> Complex64 {
        let grid = self.psi.grid();
        let (values, lo, hi) = self.psi.row(row);
        let measure = self.phi.measure(phi_word);
        let s: Complex64 = (lo..hi).step_by(2).map(|j| measure.transform(grid.point(j) + shift) * values[j]).sum();
        s * (2.0 * grid.dr)
    }

    /// Indices of `Φ`'s word at position `n` and of `ψ`'s row at position 0.
    fn locate(&self, w: &[Symbol], n: usize) -> Result<(usize, usize)> {
        let pd = self.phi.depth();
        let phi_word = self.phi.space().index_of(&w[n..n + pd]).ok_or_else(|| inadmissible(&w[n..n + pd]))?;
        let psi_word = self.psi.space().index_of(&w[..self.psi.depth()]).ok_or_else(|| inadmissible(w))?;
        Ok((phi_word, self.psi.row_index(psi_word)))
    }
}

fn inadmissible(w: &[Symbol]) -> Error {
    Error::InadmissibleWord(crate::symbolic::Word::new(w.to_vec()).to_string())
}

/// Word length needed to read `ψ`, `f_n`, `Φ∘σⁿ` and the Gibbs weights.
fn enumeration_depth(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
) -> usize {
    n + rpf.depth().max(psi.depth()).max(phi.depth()).max(f.depth())
}

/// Number of admissible words of the given length.
pub fn count_words(sft: &SftSpace, length: usize) -> f64 {
    if length == 0 {
        return 1.0;
    }
    let a = sft.alphabet_size();
    let mut v = vec![1.0f64; a];
    for _ in 1..length {
        v = (0..a).map(|i| (0..a).filter(|&j| sft.allows(i as Symbol, j as Symbol)).map(|j| v[j]).sum()).collect();
    }
    v.iter().sum()
}

/// Exact covariance by summing over every admissible cylinder of depth
/// `n + max(m, depths)`, grouped by `(Φ-word, f_n, ψ-row)`.
pub fn cov_exact(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
    budget: u64,
) -> Result<Complex64> {
    Ok(cov_exact_with_error(rpf, f, phi, psi, n, budget)?.0)
}

/// [`cov_exact`] together with the fiber-grid error, estimated as the
/// μ-weighted gap between the `Δr` and `2Δr` Riemann sums. The sum over the
/// base is exact; the fiber integral is exact up to rounding for smooth `Φ`
/// and carries an `O(Δr²)` error where `Φ` has a kink.
pub fn cov_exact_with_error(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
    budget: u64,
) -> Result<(Complex64, f64)> {
    let len = enumeration_depth(rpf, f, phi, psi, n);
    if count_words(rpf.sft(), len) > budget as f64 {
        return Err(Error::BudgetExceeded { budget });
    }
    let words = rpf.sft().words(len)?;
    let mut pairing = Pairing::new(phi, psi);
    let mut groups: HashMap<(usize, u64, usize), f64> = HashMap::new();
    for w in words.words() {
        let s = w.symbols();
        let (pw, row) = pairing.locate(s, n)?;
        let shift = f.birkhoff(s, n)?;
        *groups.entry((pw, shift.to_bits(), row)).or_insert(0.0) += rpf.cylinder_measure(s)?;
    }
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_by_key(|(k, _)| *k);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for ((pw, bits, row), mass) in keys {
        let shift = f64::from_bits(bits);
        let fine = pairing.fiber_integral(pw, shift, row);
        total += fine * mass;
        err += (fine - pairing.coarse_fiber_integral(pw, shift, row)).norm() * mass;
    }
    Ok((total - nu_av_global(phi, rpf)? * nu_local(psi, rpf)?, err))
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DirectEstimate {
    pub value: Complex64,
    pub stderr: f64,
}

/// Averages the fiber integral over `samples` μ-distributed words; the
/// result is a deterministic function of `seed`.
pub fn cov_direct(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<DirectEstimate> {
    if samples < 2 {
        return Err(Error::InsufficientData(format!("{samples} samples")));
    }
    let len = enumeration_depth(rpf, f, phi, psi, n);
    let chain = rpf.chain()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairing = Pairing::new(phi, psi);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let w = chain.sample_word(len, &mut rng);
        let (pw, row) = pairing.locate(&w, n)?;
        let z = pairing.fiber_integral(pw, f.birkhoff(&w, n)?, row);
        sum += z;
        sum_sq += z.norm_sqr();
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = ((sum_sq - k * mean.norm_sqr()) / (k - 1.0)).max(0.0);
    Ok(DirectEstimate { value: mean - nu_av_global(phi, rpf)? * nu_local(psi, rpf)?, stderr: (var / k).sqrt() })
}

/// Options of [`cov_spectral`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralParams {
    /// Band boundary `n^{−α}`, `α ∈ (0, 1/2)`.
    pub alpha: f64,
    /// Evaluate a second, finer quadrature and report the difference as error.
    pub refine: bool,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams { alpha: 0.4, refine: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralCov {
    pub n: usize,
    pub total: Complex64,
    pub bands: BandSplit,
    pub boundary: f64,
    /// Frequency cutoff of the density quadrature.
    pub cutoff: f64,
    pub err: f64,
    pub warnings: Vec<String>,
}

/// Per-word data on the operator's word space.
struct SpectralSetup<'a> {
    rpf: &'a RpfData,
    f: &'a FiberCocycle,
    psi: &'a LocalObservable,
    phi: &'a GlobalObservable,
    depth: usize,
    mu: Vec<f64>,
    psi_row: Vec<usize>,
    phi_word: Vec<usize>,
}

impl<'a> SpectralSetup<'a> {
    fn new(rpf: &'a RpfData, f: &'a FiberCocycle, phi: &'a GlobalObservable, psi: &'a LocalObservable) -> Result<Self> {
        let depth = rpf.depth().max(psi.depth()).max(phi.depth());
        let space: WordSpace = rpf.sft().words(depth)?;
        let mu = rpf.weights_for(&space)?;
        let mut psi_row = Vec::with_capacity(space.len());
        let mut phi_word = Vec::with_capacity(space.len());
        for w in space.words() {
            let s = w.symbols();
            let i = psi.space().index_of(&s[..psi.depth()]).ok_or_else(|| inadmissible(s))?;
            psi_row.push(psi.row_index(i));
            phi_word.push(phi.space().index_of(&s[..phi.depth()]).ok_or_else(|| inadmissible(s))?);
        }
        Ok(SpectralSetup { rpf, f, psi, phi, depth, mu, psi_row, phi_word })
    }

    /// `(𝓛_{−ξ}ⁿ ψ̂_ξ)` weighted by `μ`, per word.
    fn transported(&self, xi: f64, n: usize) -> Result<Vec<Complex64>> {
        let rows = self.psi.rows_fourier(xi);
        let op = TwistedOperator::new(self.rpf, self.f, -xi, self.depth)?;
        let v: Vec<Complex64> = self.psi_row.iter().map(|&k| rows[k]).collect();
        let u = power_apply(&op, v, n);
        Ok(u.into_iter().zip(&self.mu).map(|(z, m)| z * *m).collect())
    }

    fn density_integral(&self, grid: &FrequencyGrid, n: usize) -> Result<(Complex64, Complex64)> {
        let parts: Vec<(Band, Complex64)> = grid
            .nodes
            .par_iter()
            .zip(&grid.weights)
            .zip(&grid.bands)
            .map(|((&xi, &w), &band)| {
                let u = self.transported(xi, n)?;
                let s: Complex64 = u
                    .iter()
                    .zip(&self.phi_word)
                    .map(|(z, &pw)| {
                        self.phi.measure(pw).density.as_ref().map_or(Complex64::new(0.0, 0.0), |d| d.eval(xi) * z)
                    })
                    .sum();
                Ok((band, s * w))
            })
            .collect::<Result<_>>()?;
        let mut low = Complex64::new(0.0, 0.0);
        let mut high = Complex64::new(0.0, 0.0);
        for (band, z) in parts {
            match band {
                Band::High => high += z,
                _ => low += z,
            }
        }
        Ok((low, high))
    }
}

/// `𝓛ⁿ v`, by squaring the dense matrix when that is cheaper than `n` sparse steps.
fn power_apply(op: &TwistedOperator, v: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    let s = v.len();
    let squarings = usize::BITS - n.leading_zeros();
    if s <= 64 && (n * 2 * s) as f64 > 2.0 * squarings as f64 * (s * s * s) as f64 {
        let mut base = op.to_dense();
        let mut acc = nalgebra::DVector::from_vec(v);
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &base * acc;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        return acc.iter().copied().collect();
    }
    let mut cur = v;
    let mut next = cur.clone();
    for _ in 0..n {
        op.apply_slice(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Frequency beyond which every row transform stays below `1e−15` of the
/// largest row mass, scanned up to the grid's Nyquist frequency `π/Δr`.
pub fn fourier_cutoff(psi: &LocalObservable) -> (f64, bool) {
    let nyquist = std::f64::consts::PI / psi.grid().dr;
    let tol = 1e-15 * psi.max_l(0).max(f64::MIN_POSITIVE);
    let step = 0.25;
    let mut last = 0.0;
    let mut xi = step;
    while xi < nyquist {
        if psi.rows_fourier(xi).iter().any(|z| z.norm() > tol) {
            last = xi;
        }
        xi += step;
    }
    let resolved = last + 4.0 * step < nyquist;
    ((last + 4.0 * step).min(nyquist), resolved)
}

/// The spectral covariance with atoms evaluated exactly and densities by
/// composite Gauss–Legendre quadrature on `[−X, X]`.
pub fn cov_spectral(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
    params: SpectralParams,
) -> Result<SpectralCov> {
    let (cutoff, resolved) = fourier_cutoff(psi);
    spectral_with_cutoff(rpf, f, phi, psi, n, params, cutoff, resolved)
}

#[allow(clippy::too_many_arguments)]
fn spectral_with_cutoff(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    n: usize,
    params: SpectralParams,
    cutoff: f64,
    resolved: bool,
) -> Result<SpectralCov> {
    let setup = SpectralSetup::new(rpf, f, phi, psi)?;
    let atoms = phi.atom_locations();
    let grid = FrequencyGrid::new(n, params.alpha, cutoff, atoms.clone())?;
    let mut warnings = Vec::new();
    if !resolved {
        warnings.push(format!("psi transform not below tolerance at the grid Nyquist frequency {cutoff}"));
    }
    let mut bands = BandSplit::default();
    for &a in &atoms {
        let u = setup.transported(a, n)?;
        let s: Complex64 = u
            .iter()
            .zip(&setup.phi_word)
            .map(|(z, &pw)| {
                let w: Complex64 = phi.measure(pw).atoms.iter().filter(|t| t.location == a).map(|t| t.weight).sum();
                w * z
            })
            .sum();
        match grid.band_of(a) {
            Band::Zero => bands.zero += s,
            Band::Low => bands.low += s,
            Band::High => bands.high += s,
        }
    }
    bands.zero -= nu_av_global(phi, rpf)? * nu_local(psi, rpf)?;
    let mut err = 64.0 * f64::EPSILON * phi.norm() * psi.max_l(0);
    if phi.has_density() {
        for m in phi.measures() {
            if let Some(res) = m.density.as_ref().and_then(|d| d.resolution()) {
                if res > grid.boundary {
                    warnings.push(format!("density resolution {res} is coarser than the low band {}", grid.boundary));
                }
            }
        }
        let width = 0.25f64.min(2.0 / ((n + 1) as f64).sqrt());
        let coarse = FrequencyGrid::with_panels(n, params.alpha, cutoff, atoms.clone(), 0.3, width)?;
        let (mut low, mut high) = setup.density_integral(&coarse, n)?;
        if params.refine {
            let fine = FrequencyGrid::with_panels(n, params.alpha, cutoff, atoms, 0.3f64.sqrt(), width / 2.0)?;
            let (fl, fh) = setup.density_integral(&fine, n)?;
            err += (fl + fh - low - high).norm();
            (low, high) = (fl, fh);
        }
        let tail = phi.measures().map(|m| m.tail(cutoff)).fold(0.0, f64::max);
        err += tail * 1e-15 * psi.max_l(0);
        bands.low += low;
        bands.high += high;
    }
    Ok(SpectralCov { n, total: bands.total(), bands, boundary: grid.boundary, cutoff, err, warnings })
}

/// `cov_exact` over a list of `n`, evaluated in parallel.
pub fn exact_series(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    ns: &[usize],
    budget: u64,
) -> Result<CorrelationSeries> {
    let pairs =
        ns.par_iter().map(|&n| cov_exact_with_error(rpf, f, phi, psi, n, budget)).collect::<Result<Vec<_>>>()?;
    let (cov, err) = pairs.into_iter().unzip();
    CorrelationSeries::new(Estimator::Exact, ns.to_vec(), cov, err)
}

/// `cov_direct` over a list of `n`, with per-`n` seeds derived from `seed`.
pub fn direct_series(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    ns: &[usize],
    samples: usize,
    seed: u64,
) -> Result<CorrelationSeries> {
    let est = ns
        .par_iter()
        .map(|&n| cov_direct(rpf, f, phi, psi, n, samples, derive_seed(seed, n as u64)))
        .collect::<Result<Vec<_>>>()?;
    CorrelationSeries::new(
        Estimator::Direct,
        ns.to_vec(),
        est.iter().map(|e| e.value).collect(),
        est.iter().map(|e| e.stderr).collect(),
    )
}

/// `cov_spectral` over a list of `n`, with the band split attached.
pub fn spectral_series(
    rpf: &RpfData,
    f: &FiberCocycle,
    phi: &GlobalObservable,
    psi: &LocalObservable,
    ns: &[usize],
    params: SpectralParams,
) -> Result<(CorrelationSeries, Vec<String>)> {
    let (cutoff, resolved) = fourier_cutoff(psi);
    let res = ns
        .iter()
        .map(|&n| spectral_with_cutoff(rpf, f, phi, psi, n, params, cutoff, resolved))
        .collect::<Result<Vec<_>>>()?;
    let mut series = CorrelationSeries::new(
        Estimator::Spectral,
        ns.to_vec(),
        res.iter().map(|r| r.total).collect(),
        res.iter().map(|r| r.err).collect(),
    )?;
    series.bands = res.iter().map(|r| Some(r.bands)).collect();
    let mut warnings: Vec<String> = res.into_iter().flat_map(|r| r.warnings).collect();
    warnings.dedup();
    Ok((series, warnings))
}

/// Power-law fit of `|cov(n)|` and rapid-decay verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub window: (usize, usize),
    pub points: usize,
    pub exponent: f64,
    /// 95% confidence interval of the exponent.
    pub ci: (f64, f64),
    pub rapid: Vec<(u32, bool)>,
}

/// Points of the series inside `[lo, hi]` whose modulus exceeds ten times
/// their error.
fn window_points(series: &CorrelationSeries, window: (usize, usize)) -> Vec<(f64, f64)> {
    series
        .n
        .iter()
        .zip(&series.cov)
        .zip(&series.err)
        .filter(|((n, c), e)| **n >= window.0 && **n <= window.1 && **n > 0 && c.norm() > 10.0 * **e && c.norm() > 0.0)
        .map(|((n, c), _)| (*n as f64, c.norm()))
        .collect()
}

/// Finite-window proxy for `sup_n a_n < ∞`: the largest value over the
/// window is at most ten times the largest value over its first quarter.
pub fn bounded_on_window(values: &[f64]) -> bool {
    if values.is_empty() {
        return true;
    }
    let head = values[..values.len().div_ceil(4)].iter().fold(0.0f64, |m, v| m.max(*v));
    values.iter().all(|v| v.is_finite()) && values.iter().fold(0.0f64, |m, v| m.max(*v)) <= 10.0 * head
}

/// Least-squares slope of `log|cov|` against `log n` on the window, and
/// for each `ℓ` whether `|cov(n)| n^ℓ` stays bounded.
pub fn rate_fit(series: &CorrelationSeries, window: (usize, usize), levels: &[u32]) -> Result<RateFit> {
    let pts = window_points(series, window);
    if pts.len() < 5 {
        return Err(Error::DegenerateWindow(format!("{} usable points in [{}, {}]", pts.len(), window.0, window.1)));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let t = StudentsT::new(0.0, 1.0, (pts.len() - 2) as f64)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * fit.slope_stderr;
    let rapid = levels
        .iter()
        .map(|&l| {
            let scaled: Vec<f64> = pts.iter().map(|(n, c)| c * n.powi(l as i32)).collect();
            (l, bounded_on_window(&scaled))
        })
        .collect();
    Ok(RateFit { window, points: pts.len(), exponent: fit.slope, ci: (fit.slope - half, fit.slope + half), rapid })
}

/// Envelope check `|cov(n)| ≤ C (LF(Φ, n^{−1/2+ε}) + n^{−k})`.
#[derive(Clone, Debug, Serialize)]
pub struct LfBound {
    pub k: u32,
    pub eps: f64,
    pub n: Vec<usize>,
    pub envelope: Vec<f64>,
    /// Smallest constant valid on the window.
    pub c: f64,
    pub pass: bool,
}

/// Fits the smallest `C` over the series and passes when the ratios
/// `|cov(n)| / envelope(n)` stay bounded in the sense of [`bounded_on_window`].
pub fn lf_bound_check(
    series: &CorrelationSeries,
    phi: &GlobalObservable,
    rpf: &RpfData,
    k: u32,
    eps: f64,
) -> Result<LfBound> {
    let mut n_used = Vec::new();
    let mut envelope = Vec::new();
    let mut ratios = Vec::new();
    for (&n, c) in series.n.iter().zip(&series.cov) {
        if n == 0 {
            continue;
        }
        let nf = n as f64;
        let env = low_freq_variation(phi, rpf, nf.powf(-0.5 + eps))? + nf.powi(-(k as i32));
        n_used.push(n);
        envelope.push(env);
        ratios.push(c.norm() / env);
    }
    let c = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
    Ok(LfBound { k, eps, n: n_used, envelope, c, pass: c.is_finite() && bounded_on_window(&ratios) })
}

/// `∫∫ Φ ψ̄ dν` straight from the fiber grid, the `n = 0` reference value
/// for the spectral formula.
pub fn pairing_at_zero(rpf: &RpfData, phi: &GlobalObservable, psi: &LocalObservable) -> Result<Complex64> {
    let depth = rpf.depth().max(psi.depth()).max(phi.depth());
    let space = rpf.sft().words(depth)?;
    let mu = rpf.weights_for(&space)?;
    let mut pairing = Pairing::new(phi, psi);
    let mut total = Complex64::new(0.0, 0.0);
    for (w, m) in space.words().iter().zip(mu) {
        let (pw, row) = pairing.locate(w.symbols(), 0)?;
        total += pairing.fiber_integral(pw, 0.0, row) * m;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemPreset;
    use std::f64::consts::PI;

    #[test]
    fn constant_phi_has_zero_covariance() {
        let s = SystemPreset::GoldenMean.build().unwrap();
        let phi = GlobalObservable::constant(&s.sft, 1.0).unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        for n in [0, 1, 3, 7] {
            let e = cov_exact(&s.rpf, &s.cocycle, &phi, &psi, n, DEFAULT_EXACT_BUDGET).unwrap();
            assert!(e.norm() < 1e-12, "{e}");
            let sp = cov_spectral(&s.rpf, &s.cocycle, &phi, &psi, n, SpectralParams::default()).unwrap();
            assert!(sp.total.norm() < 1e-12, "{}", sp.total);
        }
        let d = cov_direct(&s.rpf, &s.cocycle, &phi, &psi, 5, 2000, 1).unwrap();
        assert!(d.value.norm() <= 3.0 * d.stderr + 1e-13);
    }

    #[test]
    fn cosine_at_zero_lag() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let phi = GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let c = cov_exact(&s.rpf, &s.cocycle, &phi, &psi, 0, DEFAULT_EXACT_BUDGET).unwrap();
        let closed = (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!((c.re - closed).abs() < 1e-12, "{c}");
        assert!(c.im.abs() < 1e-14);
    }

    #[test]
    fn estimators_agree_on_s1() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        for phi in [GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap(), GlobalObservable::gaussian(&s.sft).unwrap()] {
            for n in [0, 1, 2, 6] {
                let e = cov_exact(&s.rpf, &s.cocycle, &phi, &psi, n, DEFAULT_EXACT_BUDGET).unwrap();
                let sp = cov_spectral(&s.rpf, &s.cocycle, &phi, &psi, n, SpectralParams::default()).unwrap();
                assert!(
                    (e - sp.total).norm() <= 1e-6 * e.norm().max(1e-4),
                    "{} n={n}: {e} vs {}",
                    phi.name(),
                    sp.total
                );
                assert!((sp.bands.total() - sp.total).norm() == 0.0);
            }
        }
    }

    #[test]
    fn exact_grid_error_covers_a_kink() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let smooth = GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap();
        let (_, err) = cov_exact_with_error(&s.rpf, &s.cocycle, &smooth, &psi, 2, DEFAULT_EXACT_BUDGET).unwrap();
        assert!(err < 1e-12, "{err}");
        // 2∫₀^∞ e^{-r²/2}/(1+r) dr by adaptive quadrature.
        let reference = 1.5412518796393528;
        let phi = GlobalObservable::inverse_abs(&s.sft).unwrap();
        let (c, err) = cov_exact_with_error(&s.rpf, &s.cocycle, &phi, &psi, 0, DEFAULT_EXACT_BUDGET).unwrap();
        let actual = (c.re - reference).abs();
        assert!(actual > 1e-6 && actual <= err && err <= 4.0 * actual, "{actual} vs {err}");
        let sp = cov_spectral(&s.rpf, &s.cocycle, &phi, &psi, 0, SpectralParams::default()).unwrap();
        assert!((sp.total.re - reference).abs() < 1e-10);
    }

    #[test]
    fn round_trip_fixes_sign_convention() {
        let s = SystemPreset::GoldenMean.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let phi = GlobalObservable::cosine(&s.sft, 0.7, 1.0).unwrap();
        let skewed = crate::observables::compose_with_skew(&phi, &s.cocycle, &s.sft).unwrap();
        // Φ∘F at lag 0 equals Φ at lag 1.
        let direct = pairing_at_zero(&s.rpf, &skewed, &psi).unwrap();
        let sp = cov_spectral(&s.rpf, &s.cocycle, &phi, &psi, 1, SpectralParams::default()).unwrap();
        assert!((direct - sp.total).norm() < 1e-8, "{direct} vs {}", sp.total);
        let at_zero = cov_spectral(&s.rpf, &s.cocycle, &skewed, &psi, 0, SpectralParams::default()).unwrap();
        assert!((direct - at_zero.total).norm() < 1e-8);
    }

    #[test]
    fn direct_is_deterministic_and_close() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let phi = GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap();
        let a = cov_direct(&s.rpf, &s.cocycle, &phi, &psi, 4, 5000, 9).unwrap();
        let b = cov_direct(&s.rpf, &s.cocycle, &phi, &psi, 4, 5000, 9).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        let e = cov_exact(&s.rpf, &s.cocycle, &phi, &psi, 4, DEFAULT_EXACT_BUDGET).unwrap();
        assert!((a.value - e).norm() <= 3.0 * a.stderr);
    }

    #[test]
    fn budget_is_enforced() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let phi = GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap();
        assert!(matches!(cov_exact(&s.rpf, &s.cocycle, &phi, &psi, 10, 100), Err(Error::BudgetExceeded { .. })));
        assert_eq!(count_words(&SystemPreset::GoldenMean.build().unwrap().sft, 5), 13.0);
    }

    #[test]
    fn synthetic_rates() {
        let ns: Vec<usize> = (0..12).map(|j| 1 << j).collect();
        let s = CorrelationSeries::synthetic(ns.clone(), |n| (n as f64).powf(-0.5)).unwrap();
        let fit = rate_fit(&s, (1, 4096), &[1, 2]).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!(fit.ci.0 <= -0.5 && fit.ci.1 >= -0.5);
        assert_eq!(fit.rapid, vec![(1, false), (2, false)]);
        let e = CorrelationSeries::synthetic((8..=64).collect(), |n| (-(n as f64)).exp()).unwrap();
        let fit = rate_fit(&e, (8, 64), &[1, 2, 3, 4, 5, 6]).unwrap();
        assert!(fit.rapid.iter().all(|(_, ok)| *ok));
        let few = CorrelationSeries::synthetic(vec![1, 2, 3], |_| 1.0).unwrap();
        assert!(matches!(rate_fit(&few, (1, 3), &[]), Err(Error::DegenerateWindow(_))));
    }

    #[test]
    fn adversarial_series_fails_envelope() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let phi = GlobalObservable::cosine(&s.sft, 1.0, 1.0).unwrap();
        let slow = CorrelationSeries::synthetic((8..=256).step_by(8).collect(), |n| 1.0 / n as f64).unwrap();
        assert!(!lf_bound_check(&slow, &phi, &s.rpf, 4, 0.1).unwrap().pass);
        let fast = CorrelationSeries::synthetic((8..=256).step_by(8).collect(), |n| 0.5f64.powi(n as i32)).unwrap();
        assert!(lf_bound_check(&fast, &phi, &s.rpf, 4, 0.1).unwrap().pass);
    }

    #[test]
    fn low_band_obeys_lf_bound() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let psi = LocalObservable::gaussian_bump(&s.sft).unwrap();
        let phi = GlobalObservable::gaussian(&s.sft).unwrap();
        for n in [4, 16, 64] {
            let sp = cov_spectral(&s.rpf, &s.cocycle, &phi, &psi, n, SpectralParams::default()).unwrap();
            let lf = low_freq_variation(&phi, &s.rpf, sp.boundary).unwrap();
            assert!(sp.bands.low.norm() <= psi.max_l(0) * lf + 1e-12);
        }
    }
}
