//! Local observables `ψ(x, r)` sampled on a fiber grid and global observables
//! `Φ(x, r) = ∫ e^{-irξ} dη_x(ξ)` given by their spectral measures.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use libm::{erf, erfc};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::RpfData;
use crate::numerics::fit::fit_line;
use crate::numerics::quad::{graded_breaks, GaussLegendre};
use crate::numerics::special::{aux_f, aux_g};
use crate::skewprod::FiberCocycle;
use crate::symbolic::{SftSpace, StateFunction, Symbol, Word, WordSpace};

/// Uniform fiber grid `r_j = -r_max + j Δr`, `j = 0..=2 r_max / Δr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberGrid {
    pub r_max: f64,
    pub dr: f64,
}

impl Default for FiberGrid {
    fn default() -> Self {
        FiberGrid { r_max: 40.0, dr: 1.0 / 64.0 }
    }
}

impl FiberGrid {
    pub fn len(&self) -> usize {
        (2.0 * self.r_max / self.dr).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.r_max + j as f64 * self.dr
    }
}

/// Relative magnitude below which grid values are dropped from the support.
const SUPPORT_CUTOFF: f64 = 1e-17;

#[derive(Clone, Debug)]
struct FiberRow {
    values: Vec<f64>,
    lo: usize,
    hi: usize,
}

/// A real local observable: one fiber function per depth-`m` word.
#[derive(Clone, Debug)]
pub struct LocalObservable {
    name: String,
    space: WordSpace,
    grid: FiberGrid,
    rows: Vec<Arc<FiberRow>>,
    row_of: Vec<usize>,
    max_l: Vec<f64>,
    lip_l: Vec<f64>,
}

/// Highest derivative order tracked by default.
pub const DEFAULT_L_MAX: usize = 4;

impl LocalObservable {
    /// Samples `f(word, r)` on the grid; identical rows are shared.
    pub fn from_fn(
        name: &str,
        space: WordSpace,
        grid: FiberGrid,
        theta: f64,
        l_max: usize,
        f: impl Fn(&Word, f64) -> f64,
    ) -> Result<Self> {
        let mut rows: Vec<Arc<FiberRow>> = Vec::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut row_of = Vec::with_capacity(space.len());
        for w in space.words() {
            let values: Vec<f64> = (0..grid.len()).map(|j| f(w, grid.point(j))).collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("observable {name} is not finite on word {w}")));
            }
            let bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
            let idx = *seen.entry(bits).or_insert_with(|| {
                rows.push(Arc::new(make_row(values)));
                rows.len() - 1
            });
            row_of.push(idx);
        }
        let derivs: Vec<Vec<Vec<f64>>> = rows.iter().map(|r| derivatives(&r.values, grid.dr, l_max)).collect();
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>() * grid.dr;
        let max_l = (0..=l_max).map(|l| derivs.iter().map(|d| l1(&d[l])).fold(0.0, f64::max)).collect();
        let lip_l = (0..=l_max)
            .map(|l| {
                let mut best = 0.0f64;
                for i in 0..space.len() {
                    for j in i + 1..space.len() {
                        let (a, b) = (row_of[i], row_of[j]);
                        if a == b {
                            continue;
                        }
                        let diff: Vec<f64> = derivs[a][l].iter().zip(&derivs[b][l]).map(|(x, y)| x - y).collect();
                        best = best.max(l1(&diff) / space.distance(i, j, theta));
                    }
                }
                best
            })
            .collect();
        Ok(LocalObservable { name: name.to_string(), space, grid, rows, row_of, max_l, lip_l })
    }

    /// Word-independent `e^{-r²/2}`.
    pub fn gaussian_bump(sft: &SftSpace) -> Result<Self> {
        Self::from_fn("gaussian_bump", sft.words(0)?, FiberGrid::default(), sft.theta(), DEFAULT_L_MAX, |_, r| {
            (-0.5 * r * r).exp()
        })
    }

    /// Word-independent indicator of `[-1, 1]` convolved with a centered
    /// Gaussian of standard deviation `0.1`; equal to 1 on `[-1/2, 1/2]` up to
    /// rounding and negligible beyond `|r| ≈ 2`.
    pub fn mollified_indicator(sft: &SftSpace) -> Result<Self> {
        Self::from_fn("mollified_indicator", sft.words(0)?, FiberGrid::default(), sft.theta(), DEFAULT_L_MAX, |_, r| {
            mollified_indicator_value(r, 1.0, 0.1)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn grid(&self) -> FiberGrid {
        self.grid
    }

    /// `Max_ℓ(ψ) = max_w ‖∂^ℓ ψ(w, ·)‖_{L¹}`.
    pub fn max_l(&self, l: usize) -> f64 {
        self.max_l[l]
    }

    /// `Lip_ℓ(ψ)`: Lipschitz constant of `w ↦ ∂^ℓ ψ(w, ·)` into `L¹`.
    pub fn lip_l(&self, l: usize) -> f64 {
        self.lip_l[l]
    }

    pub fn l_max(&self) -> usize {
        self.max_l.len() - 1
    }

    /// Number of distinct fiber rows.
    pub fn distinct_rows(&self) -> usize {
        self.rows.len()
    }

    /// Index of the distinct row used by word `i`.
    pub fn row_index(&self, i: usize) -> usize {
        self.row_of[i]
    }

    /// Grid samples of row `k` with its support `[lo, hi)`.
    pub fn row(&self, k: usize) -> (&[f64], usize, usize) {
        let r = &self.rows[k];
        (&r.values, r.lo, r.hi)
    }

    /// Value at a grid point for word `i`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.rows[self.row_of[i]].values[j]
    }

    /// `∫ e^{-irξ} ψ(row k, r) dr` on the grid.
    pub fn row_fourier(&self, k: usize, xi: f64) -> Complex64 {
        let r = &self.rows[k];
        grid_fourier(&r.values[r.lo..r.hi], self.grid.point(r.lo), self.grid.dr, xi)
    }

    /// Fourier transforms of all distinct rows.
    pub fn rows_fourier(&self, xi: f64) -> Vec<Complex64> {
        (0..self.rows.len()).map(|k| self.row_fourier(k, xi)).collect()
    }
}

/// `ψ̂_ξ(w) = ∫ e^{-irξ} ψ(w, r) dr` for every word.
pub fn fiber_fourier(psi: &LocalObservable, xi: f64) -> StateFunction {
    let per_row = psi.rows_fourier(xi);
    StateFunction::new(psi.space.clone(), psi.row_of.iter().map(|&k| per_row[k]).collect())
        .expect("row map covers the word space")
}

/// `ν(ψ) = Σ_w μ(C_w) ∫ ψ(w, r) dr`.
pub fn nu_local(psi: &LocalObservable, rpf: &RpfData) -> Result<f64> {
    let weights = rpf.weights_for(&psi.space)?;
    let per_row: Vec<f64> = (0..psi.rows.len()).map(|k| psi.row_fourier(k, 0.0).re).collect();
    Ok(weights.iter().zip(&psi.row_of).map(|(w, &k)| w * per_row[k]).sum())
}

pub(crate) fn mollified_indicator_value(r: f64, a: f64, s: f64) -> f64 {
    let c = FRAC_1_SQRT_2 / s;
    0.5 * (erf((r + a) * c) - erf((r - a) * c))
}

fn make_row(values: Vec<f64>) -> FiberRow {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = peak * SUPPORT_CUTOFF;
    let lo = values.iter().position(|v| v.abs() > cut).unwrap_or(0);
    let hi = values.iter().rposition(|v| v.abs() > cut).map_or(0, |p| p + 1);
    FiberRow { values, lo, hi: hi.max(lo) }
}

fn derivatives(values: &[f64], dr: f64, l_max: usize) -> Vec<Vec<f64>> {
    let mut out = vec![values.to_vec()];
    for _ in 0..l_max {
        let prev = out.last().unwrap();
        let n = prev.len();
        let d: Vec<f64> = (0..n)
            .map(|j| {
                let a = if j > 0 { prev[j - 1] } else { 0.0 };
                let b = if j + 1 < n { prev[j + 1] } else { 0.0 };
                (b - a) / (2.0 * dr)
            })
            .collect();
        out.push(d);
    }
    out
}

/// `Σ_j Δr e^{-i r_j ξ} v_j` with `r_j = r0 + jΔr`; the phase is advanced by
/// recurrence and re-anchored every 64 steps.
pub(crate) fn grid_fourier(values: &[f64], r0: f64, dr: f64, xi: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -xi * dr);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(0.0, 0.0);
    for (j, &v) in values.iter().enumerate() {
        if j % 64 == 0 {
            phase = Complex64::from_polar(1.0, -xi * (r0 + j as f64 * dr));
        }
        acc += phase * v;
        phase *= step;
    }
    acc * dr
}

/// A point mass of a spectral measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub weight: Complex64,
}

/// Absolutely continuous part of a spectral measure.
#[derive(Clone, Debug, Serialize)]
pub enum Density {
    /// `weight · N(0, sd²)` density; transform `weight · e^{-sd² r²/2}`.
    Gaussian { weight: f64, sd: f64 },
    /// `weight · g(|ξ|)/π`; transform `weight / (1 + |r|)`.
    InverseAbs { weight: f64 },
    /// `weight · (s/π)/(s² + ξ²)`; transform `weight · e^{-s|r|}`.
    Cauchy { weight: f64, scale: f64 },
    /// Piecewise linear between nodes, zero outside.
    Tabulated { nodes: Vec<f64>, values: Vec<Complex64> },
    /// `base(ξ) e^{-iξ shift}`; transform `basê(r + shift)`.
    Modulated { base: Box<Density>, shift: f64 },
}

const TAB_ORDER: usize = 16;

impl Density {
    pub fn eval(&self, xi: f64) -> Complex64 {
        match self {
            Density::Gaussian { weight, sd } => {
                let z = xi / sd;
                Complex64::new(weight * (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt()), 0.0)
            }
            Density::InverseAbs { weight } => {
                if xi == 0.0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    Complex64::new(weight * aux_g(xi.abs()) / PI, 0.0)
                }
            }
            Density::Cauchy { weight, scale } => Complex64::new(weight * scale / (PI * (scale * scale + xi * xi)), 0.0),
            Density::Tabulated { nodes, values } => {
                if nodes.is_empty() || xi < nodes[0] || xi > *nodes.last().unwrap() {
                    return Complex64::new(0.0, 0.0);
                }
                let k = nodes.partition_point(|&x| x <= xi).clamp(1, nodes.len() - 1);
                let (x0, x1) = (nodes[k - 1], nodes[k]);
                let t = if x1 > x0 { (xi - x0) / (x1 - x0) } else { 0.0 };
                values[k - 1] * (1.0 - t) + values[k] * t
            }
            Density::Modulated { base, shift } => base.eval(xi) * Complex64::from_polar(1.0, -xi * shift),
        }
    }

    /// `∫ e^{-irξ} ρ(ξ) dξ`.
    pub fn transform(&self, r: f64) -> Complex64 {
        match self {
            Density::Gaussian { weight, sd } => Complex64::new(weight * (-0.5 * sd * sd * r * r).exp(), 0.0),
            Density::InverseAbs { weight } => Complex64::new(weight / (1.0 + r.abs()), 0.0),
            Density::Cauchy { weight, scale } => Complex64::new(weight * (-scale * r.abs()).exp(), 0.0),
            Density::Tabulated { nodes, values } => {
                let gl = GaussLegendre::new(TAB_ORDER);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 1..nodes.len() {
                    let (x0, x1) = (nodes[k - 1], nodes[k]);
                    let pieces = (((x1 - x0) * r.abs() / 2.0).ceil() as usize).max(1);
                    for p in 0..pieces {
                        let a = x0 + (x1 - x0) * p as f64 / pieces as f64;
                        let b = x0 + (x1 - x0) * (p + 1) as f64 / pieces as f64;
                        let (mut re, mut im) = (0.0, 0.0);
                        let half = 0.5 * (b - a);
                        let mid = 0.5 * (a + b);
                        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                            let xi = mid + half * x;
                            let t = (xi - x0) / (x1 - x0);
                            let v = (values[k - 1] * (1.0 - t) + values[k] * t) * Complex64::from_polar(1.0, -r * xi);
                            re += w * v.re;
                            im += w * v.im;
                        }
                        acc += Complex64::new(re, im) * half;
                    }
                }
                acc
            }
            Density::Modulated { base, shift } => base.transform(r + shift),
        }
    }

    /// True if the density has an integrable singularity at `ξ = 0`.
    pub fn singular_at_zero(&self) -> bool {
        match self {
            Density::InverseAbs { .. } => true,
            Density::Modulated { base, .. } => base.singular_at_zero(),
            _ => false,
        }
    }

    /// Node spacing of a tabulated density, if any.
    pub fn resolution(&self) -> Option<f64> {
        match self {
            Density::Tabulated { nodes, .. } => {
                nodes.windows(2).map(|p| p[1] - p[0]).fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
            }
            Density::Modulated { base, .. } => base.resolution(),
            _ => None,
        }
    }

    /// `|ρ|([a, b])`.
    pub fn abs_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if a < 0.0 && b > 0.0 {
            return self.abs_mass(a, 0.0) + self.abs_mass(0.0, b);
        }
        match self {
            Density::Gaussian { weight, sd } => {
                let c = FRAC_1_SQRT_2 / sd;
                let (lo, hi) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
                // Mass of a one-signed interval via erf or erfc, whichever is accurate.
                let m =
                    if lo * c > 1.0 { 0.5 * (erfc(lo * c) - erfc(hi * c)) } else { 0.5 * (erf(hi * c) - erf(lo * c)) };
                weight.abs() * m
            }
            Density::InverseAbs { weight } => {
                let (lo, hi) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
                let f_hi = if hi.is_infinite() { 0.0 } else { aux_f(hi) };
                weight.abs() * (aux_f(lo) - f_hi) / PI
            }
            Density::Cauchy { weight, scale } => weight.abs() * ((b / scale).atan() - (a / scale).atan()) / PI,
            Density::Tabulated { nodes, .. } => {
                let gl = GaussLegendre::new(TAB_ORDER);
                let mut breaks = vec![a];
                breaks.extend(nodes.iter().copied().filter(|&x| x > a && x < b));
                breaks.push(b.min(*nodes.last().unwrap_or(&b)).max(a));
                gl.integrate(&breaks, |x| self.eval(x).norm())
            }
            Density::Modulated { base, .. } => base.abs_mass(a, b),
        }
    }

    /// `|ρ|(ℝ \ [-r, r])`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        self.abs_mass(f64::NEG_INFINITY.max(-1e300), -r) + self.abs_mass(r, 1e300)
    }

    /// True if the density is a nonnegative real function.
    pub fn is_positive(&self) -> bool {
        match self {
            Density::Gaussian { weight, .. } | Density::InverseAbs { weight } | Density::Cauchy { weight, .. } => {
                *weight >= 0.0
            }
            Density::Tabulated { values, .. } => values.iter().all(|v| v.im == 0.0 && v.re >= 0.0),
            Density::Modulated { base, shift } => *shift == 0.0 && base.is_positive(),
        }
    }
}

/// A finite complex measure: exact atoms plus an optional density.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<Density>,
}

impl SpectralMeasure {
    pub fn dirac(location: f64, weight: f64) -> Self {
        SpectralMeasure { atoms: vec![Atom { location, weight: Complex64::new(weight, 0.0) }], density: None }
    }

    pub fn from_density(density: Density) -> Self {
        SpectralMeasure { atoms: Vec::new(), density: Some(density) }
    }

    /// `Φ(r) = ∫ e^{-irξ} dη(ξ)`.
    pub fn transform(&self, r: f64) -> Complex64 {
        let atoms: Complex64 = self.atoms.iter().map(|a| a.weight * Complex64::from_polar(1.0, -r * a.location)).sum();
        atoms + self.density.as_ref().map_or(Complex64::new(0.0, 0.0), |d| d.transform(r))
    }

    /// `η({0})`.
    pub fn atom_at_zero(&self) -> Complex64 {
        self.atoms.iter().filter(|a| a.location == 0.0).map(|a| a.weight).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.abs_mass(-1e300, 1e300))
    }

    /// `|η|(ℝ \ [-r, r])`.
    pub fn tail(&self, r: f64) -> f64 {
        self.atoms.iter().filter(|a| a.location.abs() > r).map(|a| a.weight.norm()).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.tail_mass(r))
    }

    /// `|η|((-r, r) \ {0})`.
    pub fn low_frequency_mass(&self, r: f64) -> f64 {
        self.atoms.iter().filter(|a| a.location != 0.0 && a.location.abs() < r).map(|a| a.weight.norm()).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.abs_mass(-r, r))
    }

    pub fn is_positive(&self) -> bool {
        self.atoms.iter().all(|a| a.weight.im == 0.0 && a.weight.re >= 0.0)
            && self.density.as_ref().is_none_or(Density::is_positive)
    }
}

/// A global observable: one spectral measure per depth-`m` word.
#[derive(Clone, Debug)]
pub struct GlobalObservable {
    name: String,
    space: WordSpace,
    measures: Vec<Arc<SpectralMeasure>>,
}

impl GlobalObservable {
    pub fn new(name: &str, space: WordSpace, measures: Vec<SpectralMeasure>) -> Result<Self> {
        if measures.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), got: measures.len() });
        }
        Ok(GlobalObservable { name: name.to_string(), space, measures: measures.into_iter().map(Arc::new).collect() })
    }

    /// The same measure on every word.
    pub fn uniform(name: &str, sft: &SftSpace, measure: SpectralMeasure) -> Result<Self> {
        let space = sft.words(0)?;
        Self::new(name, space, vec![measure])
    }

    /// `Φ ≡ amplitude` (`η = amplitude · δ₀`).
    pub fn constant(sft: &SftSpace, amplitude: f64) -> Result<Self> {
        Self::uniform("constant_one", sft, SpectralMeasure::dirac(0.0, amplitude))
    }

    /// `Φ(r) = amplitude · cos(ωr)` (atoms `amplitude/2` at `±ω`).
    pub fn cosine(sft: &SftSpace, omega: f64, amplitude: f64) -> Result<Self> {
        let w = Complex64::new(amplitude / 2.0, 0.0);
        Self::uniform(
            "cosine",
            sft,
            SpectralMeasure {
                atoms: vec![Atom { location: -omega, weight: w }, Atom { location: omega, weight: w }],
                density: None,
            },
        )
    }

    /// `Φ(r) = e^{-r²/2}` (standard normal spectral density).
    pub fn gaussian(sft: &SftSpace) -> Result<Self> {
        Self::uniform("gaussian", sft, SpectralMeasure::from_density(Density::Gaussian { weight: 1.0, sd: 1.0 }))
    }

    /// `Φ(r) = 1/(1+|r|)`.
    pub fn inverse_abs(sft: &SftSpace) -> Result<Self> {
        Self::uniform("inverse_abs", sft, SpectralMeasure::from_density(Density::InverseAbs { weight: 1.0 }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn measure(&self, i: usize) -> &SpectralMeasure {
        &self.measures[i]
    }

    pub fn measures(&self) -> impl Iterator<Item = &SpectralMeasure> {
        self.measures.iter().map(|m| m.as_ref())
    }

    /// Measure attached to the cylinder of `symbols`.
    pub fn measure_at(&self, symbols: &[Symbol]) -> Result<&SpectralMeasure> {
        let i = self
            .space
            .index_of_prefix(symbols)
            .ok_or_else(|| Error::InadmissibleWord(Word::new(symbols.to_vec()).to_string()))?;
        Ok(&self.measures[i])
    }

    /// `Φ(w, r)` for word index `i`.
    pub fn value(&self, i: usize, r: f64) -> Complex64 {
        self.measures[i].transform(r)
    }

    /// `‖Φ‖ = sup_w ‖η_w‖_TV`.
    pub fn norm(&self) -> f64 {
        self.measures().map(SpectralMeasure::total_variation).fold(0.0, f64::max)
    }

    /// Largest tail `sup_w |η_w|(ℝ \ [-r, r])`.
    pub fn tail(&self, r: f64) -> f64 {
        self.measures().map(|m| m.tail(r)).fold(0.0, f64::max)
    }

    /// Sorted distinct atom locations over all words.
    pub fn atom_locations(&self) -> Vec<f64> {
        let mut locs: Vec<f64> = self.measures().flat_map(|m| m.atoms.iter().map(|a| a.location)).collect();
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        locs.dedup();
        locs
    }

    pub fn has_density(&self) -> bool {
        self.measures().any(|m| m.density.is_some())
    }

    /// Multiplies the measure of each word by a per-word real factor.
    pub fn scaled(&self, space: WordSpace, factors: &[f64]) -> Result<Self> {
        if factors.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), got: factors.len() });
        }
        let measures = space
            .words()
            .iter()
            .zip(factors)
            .map(|(w, &c)| {
                let m = self.measure_at(w.symbols())?;
                Ok(SpectralMeasure {
                    atoms: m.atoms.iter().map(|a| Atom { location: a.location, weight: a.weight * c }).collect(),
                    density: m.density.as_ref().map(|d| scale_density(d, c)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&self.name, space, measures)
    }
}

fn scale_density(d: &Density, c: f64) -> Density {
    match d {
        Density::Gaussian { weight, sd } => Density::Gaussian { weight: weight * c, sd: *sd },
        Density::InverseAbs { weight } => Density::InverseAbs { weight: weight * c },
        Density::Cauchy { weight, scale } => Density::Cauchy { weight: weight * c, scale: *scale },
        Density::Tabulated { nodes, values } => {
            Density::Tabulated { nodes: nodes.clone(), values: values.iter().map(|v| v * c).collect() }
        }
        Density::Modulated { base, shift } => {
            Density::Modulated { base: Box::new(scale_density(base, c)), shift: *shift }
        }
    }
}

/// `ν_av(Φ) = Σ_w μ(C_w) η_w({0})`.
pub fn nu_av_global(phi: &GlobalObservable, rpf: &RpfData) -> Result<Complex64> {
    let weights = rpf.weights_for(&phi.space)?;
    Ok(weights.iter().zip(phi.measures()).map(|(w, m)| m.atom_at_zero() * *w).sum())
}

/// `LF(Φ, r) = Σ_w μ(C_w) |η_w|((-r, r) \ {0})`.
pub fn low_freq_variation(phi: &GlobalObservable, rpf: &RpfData, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    let weights = rpf.weights_for(&phi.space)?;
    Ok(weights.iter().zip(phi.measures()).map(|(w, m)| w * m.low_frequency_mass(r)).sum())
}

/// Spectral representation of `Φ∘F`: `η'_x = e^{-iξ f(x)} η_{σx}`.
pub fn compose_with_skew(phi: &GlobalObservable, f: &FiberCocycle, sft: &SftSpace) -> Result<GlobalObservable> {
    let depth = (phi.depth() + 1).max(f.depth());
    let space = sft.words(depth)?;
    let measures = space
        .words()
        .iter()
        .map(|w| {
            let shift = f.eval(w.symbols())?;
            let base = phi.measure_at(&w.symbols()[1..])?;
            Ok(SpectralMeasure {
                atoms: base
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        location: a.location,
                        weight: a.weight * Complex64::from_polar(1.0, -a.location * shift),
                    })
                    .collect(),
                density: base.density.as_ref().map(|d| Density::Modulated { base: Box::new(d.clone()), shift }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GlobalObservable::new(&format!("{}∘F", phi.name), space, measures)
}

/// Outcome of a tightness check `sup_w |η_w|(ℝ \ [-r, r]) ≤ A r^{-a}`.
#[derive(Clone, Debug, Serialize)]
pub struct TightnessReport {
    pub a: f64,
    pub a_const: f64,
    pub tails: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Fits `(a, A)` to the tails at the given radii (all `≥ 1`) and checks the
/// bound; a stated pair, if given, is checked instead of the fitted one.
pub fn tightness_check(phi: &GlobalObservable, radii: &[f64], stated: Option<(f64, f64)>) -> Result<TightnessReport> {
    if radii.iter().any(|&r| r < 1.0) {
        return Err(Error::InvalidArgument("tightness radii must be at least 1".into()));
    }
    let tails: Vec<(f64, f64)> = radii.iter().map(|&r| (r, phi.tail(r))).collect();
    let positive: Vec<(f64, f64)> = tails.iter().filter(|(_, t)| *t > 0.0).map(|(r, t)| (r.ln(), t.ln())).collect();
    let (a, a_const) = if positive.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        let a = (-fit_line(&x, &y)?.slope).max(0.0);
        let a_const = tails.iter().map(|(r, t)| t * r.powf(a)).fold(0.0, f64::max);
        (a, a_const)
    } else {
        let a_const = tails.iter().map(|(r, t)| t * r).fold(0.0, f64::max);
        (1.0, a_const)
    };
    let (ca, cc) = stated.unwrap_or((a, a_const));
    let pass = tails.iter().all(|(r, t)| *t <= cc * r.powf(-ca) * (1.0 + 1e-12) + 1e-300);
    Ok(TightnessReport { a, a_const, tails, pass })
}

/// Outcome of the positive-definite tail bound `η(ℝ \ [-r, r]) ≤ 2L/r`.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzTailReport {
    pub lipschitz: f64,
    pub checks: Vec<(f64, f64, f64)>,
    pub pass: bool,
}

/// Measures the fiber Lipschitz constant `L` of `Φ(w, ·)` on a fine grid and
/// checks the tail bound at every radius.
pub fn lipschitz_tail_check(phi: &GlobalObservable, radii: &[f64]) -> Result<LipschitzTailReport> {
    for (i, m) in phi.measures().enumerate() {
        if !m.is_positive() {
            return Err(Error::NotPositive(format!("measure of word {}", phi.space.word(i))));
        }
    }
    let dr = 1.0 / 256.0;
    let steps = (80.0 / dr) as usize;
    let mut lipschitz = 0.0f64;
    for i in 0..phi.space.len() {
        let mut prev = phi.value(i, -40.0);
        for j in 1..=steps {
            let cur = phi.value(i, -40.0 + j as f64 * dr);
            lipschitz = lipschitz.max((cur - prev).norm() / dr);
            prev = cur;
        }
    }
    let checks: Vec<(f64, f64, f64)> = radii.iter().map(|&r| (r, phi.tail(r), 2.0 * lipschitz / r)).collect();
    let pass = checks.iter().all(|(_, t, b)| t <= b);
    Ok(LipschitzTailReport { lipschitz, checks, pass })
}

/// Frequency band of the split used by the spectral estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Band {
    Zero,
    Low,
    High,
}

/// Quadrature nodes for `∫ ⋯ ρ(ξ) dξ` split at `b = n^{-α}`.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyGrid {
    pub alpha: f64,
    pub boundary: f64,
    pub cutoff: f64,
    pub atoms: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub bands: Vec<Band>,
}

impl FrequencyGrid {
    /// Composite Gauss–Legendre panels on `[-X, X]`: geometric grading toward
    /// zero inside the low band, geometric growth then uniform panels of width
    /// `0.25` in the high band.
    pub fn new(n: usize, alpha: f64, cutoff: f64, atoms: Vec<f64>) -> Result<Self> {
        Self::with_panels(n, alpha, cutoff, atoms, 0.3, 0.25)
    }

    /// As [`FrequencyGrid::new`] with grading ratio `q` toward zero and high
    /// band panel width `width`. For `n = 0` the boundary is 1.
    pub fn with_panels(n: usize, alpha: f64, cutoff: f64, atoms: Vec<f64>, q: f64, width: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1/2)")));
        }
        if !(q > 0.0 && q < 1.0 && width > 0.0) {
            return Err(Error::InvalidArgument(format!("panel grading {q} or width {width} invalid")));
        }
        let boundary = (n.max(1) as f64).powf(-alpha);
        let low_gl = GaussLegendre::new(12);
        let high_gl = GaussLegendre::new(16);
        let mut pos_nodes = Vec::new();
        let mut pos_weights = Vec::new();
        let mut pos_bands = Vec::new();
        let low = graded_breaks(boundary, q, 1e-16);
        for p in low.windows(2) {
            low_gl.push_panel(p[0], p[1], &mut pos_nodes, &mut pos_weights);
        }
        pos_bands.resize(pos_nodes.len(), Band::Low);
        if cutoff > boundary {
            let high = crate::numerics::quad::outward_breaks(boundary, cutoff, 1.6, width);
            for p in high.windows(2) {
                high_gl.push_panel(p[0], p[1], &mut pos_nodes, &mut pos_weights);
            }
        }
        pos_bands.resize(pos_nodes.len(), Band::High);
        let mut nodes: Vec<f64> = pos_nodes.iter().rev().map(|x| -x).collect();
        let mut weights: Vec<f64> = pos_weights.iter().rev().copied().collect();
        let mut bands: Vec<Band> = pos_bands.iter().rev().copied().collect();
        nodes.extend(&pos_nodes);
        weights.extend(&pos_weights);
        bands.extend(&pos_bands);
        Ok(FrequencyGrid { alpha, boundary, cutoff, atoms, nodes, weights, bands })
    }

    pub fn band_of(&self, xi: f64) -> Band {
        if xi == 0.0 {
            Band::Zero
        } else if xi.abs() < self.boundary {
            Band::Low
        } else {
            Band::High
        }
    }
}

/// Named observable presets.
pub const LOCAL_PRESETS: [(&str, &str); 2] = [
    ("gaussian_bump", "psi(r) = exp(-r^2/2), word-independent local observable"),
    ("mollified_indicator", "indicator of [-1,1] smoothed by a Gaussian of width 0.1; equals 1 on [-1/2,1/2]"),
];

pub const GLOBAL_PRESETS: [(&str, &str); 4] = [
    ("constant_one", "Phi = 1, spectral measure delta_0; nu_av = 1"),
    ("cosine", "Phi(r) = amplitude cos(omega r), atoms at +-omega; no spectral mass near 0"),
    ("gaussian", "Phi(r) = exp(-r^2/2), standard normal spectral density; LF(Phi, r) ~ 0.8 r"),
    ("inverse_abs", "Phi(r) = 1/(1+|r|), log-singular spectral density; the optimal-rate observable"),
];
