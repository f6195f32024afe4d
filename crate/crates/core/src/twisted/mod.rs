//! Twisted transfer operators `(𝓛_ξ v)(x) = Σ_{σy=x} g(y) e^{iξf(y)} v(y)`,
//! the `H`-norm, the leading eigenvalue curve near `ξ = 0` and norm decay.

mod cancel;

pub use cancel::*;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{BallFit, RpfData};
use crate::numerics::{complex_eigenvalues, fit::fit_line};
use crate::skewprod::FiberCocycle;
use crate::symbolic::{lipschitz_seminorm, seminorm_by, RealTable, SftSpace, StateFunction, Symbol, WordSpace};

/// `𝓛_ξ` acting on functions that are locally constant on depth-`D` words.
#[derive(Clone, Debug)]
pub struct TwistedOperator {
    xi: f64,
    theta: f64,
    sft: SftSpace,
    base_depth: usize,
    space: WordSpace,
    rows: Vec<Vec<(usize, Complex64)>>,
    g: RealTable,
    f: FiberCocycle,
    g_tilde_seminorm: f64,
}

/// `𝓛_ξ` on depth-`depth` words for the normalized weights of `rpf`.
pub fn twisted_matrix(rpf: &RpfData, f: &FiberCocycle, xi: f64, depth: usize) -> Result<TwistedOperator> {
    TwistedOperator::new(rpf, f, xi, depth)
}

impl TwistedOperator {
    pub fn new(rpf: &RpfData, f: &FiberCocycle, xi: f64, depth: usize) -> Result<Self> {
        let m = rpf.depth();
        if f.depth() > m {
            return Err(Error::DepthTooSmall { depth: m, required: f.depth() });
        }
        if depth < m {
            return Err(Error::DepthTooSmall { depth, required: m });
        }
        let sft = rpf.sft();
        let space = sft.words(depth)?;
        let g = rpf.g().clone();
        let mut buf: Vec<Symbol> = Vec::with_capacity(depth + 1);
        let mut rows = Vec::with_capacity(space.len());
        for w in space.words() {
            let mut row = Vec::new();
            for a in 0..sft.alphabet_size() as Symbol {
                if !sft.allows(a, w.symbols()[0]) {
                    continue;
                }
                buf.clear();
                buf.push(a);
                buf.extend_from_slice(w.symbols());
                let weight = g.eval(&buf)? * Complex64::from_polar(1.0, xi * f.eval(&buf)?);
                let target = space.index_of(&buf[..depth]).expect("preimage word is admissible");
                row.push((target, weight));
            }
            rows.push(row);
        }
        let edge = g.space().clone();
        let g_tilde: Vec<Complex64> = edge
            .words()
            .iter()
            .zip(g.values())
            .map(|(e, &gv)| Ok(gv * Complex64::from_polar(1.0, xi * f.eval(e.symbols())?)))
            .collect::<Result<_>>()?;
        let g_tilde_seminorm = seminorm_by(&edge, &g_tilde, sft.theta(), |a, b| (a - b).norm());
        Ok(TwistedOperator {
            xi,
            theta: sft.theta(),
            sft: sft.clone(),
            base_depth: m,
            space,
            rows,
            g,
            f: f.clone(),
            g_tilde_seminorm,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Depth of the Gibbs data; `g` lives on words one symbol longer.
    pub fn base_depth(&self) -> usize {
        self.base_depth
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn cocycle(&self) -> &FiberCocycle {
        &self.f
    }

    /// `|g̃_ξ|_θ` of the twisted weight `g̃_ξ = g e^{iξf}`.
    pub fn g_tilde_seminorm(&self) -> f64 {
        self.g_tilde_seminorm
    }

    pub fn apply_slice(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(y, w)| w * v[y]).sum();
        }
    }

    pub fn apply(&self, v: &StateFunction) -> Result<StateFunction> {
        self.check_space(v)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.space.len()];
        self.apply_slice(v.values(), &mut out);
        StateFunction::new(self.space.clone(), out)
    }

    /// `𝓛_ξⁿ v`.
    pub fn power(&self, v: &StateFunction, n: usize) -> Result<StateFunction> {
        self.check_space(v)?;
        let mut cur = v.values().to_vec();
        let mut next = cur.clone();
        for _ in 0..n {
            self.apply_slice(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        StateFunction::new(self.space.clone(), cur)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.space.len();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, w) in row {
                m[(x, y)] += w;
            }
        }
        m
    }

    /// `g_n(w) = Π_{j<n} g(σ^j w)` for a word of depth at least `n + m`.
    pub fn g_n(&self, symbols: &[Symbol], n: usize) -> Result<f64> {
        self.check_len(symbols, n)?;
        (0..n).try_fold(1.0, |acc, j| Ok(acc * self.g.eval(&symbols[j..])?))
    }

    /// Birkhoff sum `f_n(w)`.
    pub fn f_n(&self, symbols: &[Symbol], n: usize) -> Result<f64> {
        self.check_len(symbols, n)?;
        self.f.birkhoff(symbols, n)
    }

    /// `g̃_n(w) = g_n(w) e^{iξ f_n(w)}`.
    pub fn g_tilde_n(&self, symbols: &[Symbol], n: usize) -> Result<Complex64> {
        Ok(self.g_n(symbols, n)? * Complex64::from_polar(1.0, self.xi * self.f_n(symbols, n)?))
    }

    /// Norm constants `R = C₀|g̃_ξ|_θ` and `H = max{1, 2R/(1−θ)}`.
    pub fn constants(&self, c0: f64) -> NormConstants {
        let r = c0 * self.g_tilde_seminorm;
        NormConstants { c0, r, h: (2.0 * r / (1.0 - self.theta)).max(1.0) }
    }

    fn check_space(&self, v: &StateFunction) -> Result<()> {
        if v.space() != &self.space {
            return Err(Error::DepthMismatch { expected: self.depth(), got: v.depth() });
        }
        Ok(())
    }

    fn check_len(&self, symbols: &[Symbol], n: usize) -> Result<()> {
        if symbols.len() < n + self.base_depth {
            return Err(Error::WordTooShort(crate::symbolic::Word::new(symbols.to_vec()).to_string()));
        }
        Ok(())
    }
}

/// Constants of the basic inequality and the `H`-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormConstants {
    pub c0: f64,
    pub r: f64,
    pub h: f64,
}

/// `‖v‖_H = max{‖v‖_∞, |v|_θ / H}`.
pub fn h_norm(v: &StateFunction, h: f64, theta: f64) -> f64 {
    v.sup_norm().max(lipschitz_seminorm(v, theta) / h)
}

/// `‖v‖_θ = ‖v‖_∞ + |v|_θ`.
pub fn theta_norm(v: &StateFunction, theta: f64) -> f64 {
    v.sup_norm() + lipschitz_seminorm(v, theta)
}

/// Empirical constant of the basic inequality `|𝓛v|_θ ≤ θ|v|_θ + C₀|g̃|_θ‖v‖_∞`.
#[derive(Clone, Debug, Serialize)]
pub struct C0Calibration {
    pub c0: f64,
    pub trials: usize,
    pub worst_xi: f64,
    pub worst_depth: usize,
}

/// Smallest `C₀` consistent with randomized and hill-climbed functions at the
/// given frequencies and depths.
pub fn calibrate_c0(
    rpf: &RpfData,
    f: &FiberCocycle,
    xis: &[f64],
    depths: &[usize],
    trials: usize,
    seed: u64,
) -> Result<C0Calibration> {
    let theta = rpf.theta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = C0Calibration { c0: 0.0, trials: 0, worst_xi: 0.0, worst_depth: rpf.depth() };
    for &depth in depths {
        for &xi in xis {
            let op = TwistedOperator::new(rpf, f, xi, depth)?;
            let gs = op.g_tilde_seminorm();
            if gs == 0.0 {
                continue;
            }
            let ratio = |v: &StateFunction| -> f64 {
                let sup = v.sup_norm();
                if sup == 0.0 {
                    return 0.0;
                }
                let lv = op.apply(v).expect("same space");
                (lipschitz_seminorm(&lv, theta) - theta * lipschitz_seminorm(v, theta)) / (gs * sup)
            };
            let mut candidates: Vec<(f64, StateFunction)> = (0..trials)
                .map(|t| {
                    let v = random_function(op.space(), theta, t % 4, &mut rng);
                    (ratio(&v), v)
                })
                .collect();
            best.trials += trials;
            candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            candidates.truncate(4);
            for (mut r, mut v) in candidates {
                let mut step = 0.5;
                for _ in 0..400 {
                    let mut w = v.clone();
                    let i = rng.gen_range(0..w.values().len());
                    let z = Complex64::from_polar(rng.gen_range(0.0..step), rng.gen_range(-PI..PI));
                    let p = w.values()[i] + z;
                    w.values_mut()[i] = if p.norm() > 1.0 { p / p.norm() } else { p };
                    let rw = ratio(&w);
                    best.trials += 1;
                    if rw > r {
                        r = rw;
                        v = w;
                    } else {
                        step = (step * 0.995).max(1e-3);
                    }
                }
                if r > best.c0 {
                    best.c0 = r;
                    best.worst_xi = xi;
                    best.worst_depth = depth;
                }
            }
        }
    }
    Ok(best)
}

/// Random test functions of four shapes: disk-valued, unimodular,
/// θ-smooth phases, and a single spike.
pub(crate) fn random_function<R: Rng + ?Sized>(
    space: &WordSpace,
    theta: f64,
    kind: usize,
    rng: &mut R,
) -> StateFunction {
    let n = space.len();
    let values: Vec<Complex64> = match kind {
        0 => (0..n).map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))).collect(),
        1 => (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(-PI..PI))).collect(),
        2 => {
            let s = rng.gen_range(0.0..2.0);
            let phi0 = rng.gen_range(-PI..PI);
            let phases = smooth_phases(space, theta, s, rng);
            phases.into_iter().map(|p| Complex64::from_polar(1.0, phi0 + p)).collect()
        }
        _ => {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[rng.gen_range(0..n)] = Complex64::from_polar(1.0, rng.gen_range(-PI..PI));
            v
        }
    };
    StateFunction::new(space.clone(), values).expect("length matches")
}

/// `φ(w) = s Σ_j θ^j ζ(w₀…w_j)` with independent uniform `ζ ∈ [−π, π]`
/// per prefix; `|φ(x) − φ(y)| ≤ 2πs θ^{lcp}/(1−θ)`.
pub(crate) fn smooth_phases<R: Rng + ?Sized>(space: &WordSpace, theta: f64, s: f64, rng: &mut R) -> Vec<f64> {
    let mut phases = vec![0.0; space.len()];
    let words = space.words();
    for j in 0..space.depth() {
        let mut last: Option<&[Symbol]> = None;
        let mut z = 0.0;
        // Words are sorted, so equal prefixes are contiguous.
        for (i, w) in words.iter().enumerate() {
            let p = &w.symbols()[..=j];
            if last != Some(p) {
                z = rng.gen_range(-PI..PI);
                last = Some(p);
            }
            phases[i] += s * theta.powi(j as i32) * z;
        }
    }
    phases
}

/// Leading eigenvalue (largest modulus) of `𝓛_ξ` on its word space.
pub fn leading_eigenvalue(op: &TwistedOperator) -> Result<Complex64> {
    let eig =
        complex_eigenvalues(&op.to_dense()).ok_or(Error::NoConvergence { iterations: 10_000, residual: f64::NAN })?;
    Ok(eig.into_iter().fold(Complex64::new(0.0, 0.0), |m, z| if z.norm() > m.norm() { z } else { m }))
}

/// Options of [`spectral_curve`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurveParams {
    /// Frequencies must lie in `(−κ, κ)`.
    pub kappa: f64,
    /// Upper end of the window `[0, fit_max]` used for the quadratic fit.
    pub fit_max: f64,
    /// Step of the central second difference at 0.
    pub step: f64,
    /// Largest lag of the Green–Kubo sum.
    pub max_lag: usize,
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams { kappa: 0.3, fit_max: 0.2, step: 1e-3, max_lag: 500 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralCurve {
    pub xi: Vec<f64>,
    pub lambda: Vec<Complex64>,
    /// First frequency where the tracked eigenvalue stopped being dominant.
    pub crossing: Option<f64>,
    /// Central-difference `Re λ″(0)`.
    pub curvature: f64,
    /// Green–Kubo variance.
    pub sigma2: f64,
    /// Lag terms `∫ f·f∘σ^k dμ`, `k ≥ 1`.
    pub gk_terms: Vec<f64>,
    /// Fitted `2A_κ` in `λ_ξ ≈ 1 − 2A_κ ξ²`.
    pub two_a_kappa: f64,
    /// `max |λ_ξ − (1 − 2A_κξ²)| / ξ³` on the fit window.
    pub b_kappa: f64,
    /// `max |λ_ξ − (1 − σ²ξ²/2)| / ξ³` on the fit window.
    pub b_sigma: f64,
}

impl SpectralCurve {
    pub fn a_kappa(&self) -> f64 {
        self.two_a_kappa / 2.0
    }
}

/// Tracks the leading eigenvalue of `𝓛_ξ` on depth-`m` words from `ξ = 0`
/// outward on each side of the grid.
pub fn spectral_curve(rpf: &RpfData, f: &FiberCocycle, xi_grid: &[f64], params: CurveParams) -> Result<SpectralCurve> {
    if let Some(bad) = xi_grid.iter().find(|x| x.abs() >= params.kappa) {
        return Err(Error::InvalidArgument(format!("frequency {bad} outside (-{0}, {0})", params.kappa)));
    }
    let m = rpf.depth();
    let eigs = |xi: f64| -> Result<Vec<Complex64>> {
        complex_eigenvalues(&TwistedOperator::new(rpf, f, xi, m)?.to_dense())
            .ok_or(Error::NoConvergence { iterations: 10_000, residual: f64::NAN })
    };
    let nearest = |eig: &[Complex64], prev: Complex64| -> (Complex64, bool) {
        let k = (0..eig.len())
            .min_by(|&a, &b| (eig[a] - prev).norm().partial_cmp(&(eig[b] - prev).norm()).unwrap())
            .unwrap();
        let dominant = eig.iter().enumerate().all(|(j, z)| j == k || z.norm() < eig[k].norm() - 1e-12);
        (eig[k], dominant)
    };
    let mut pos: Vec<f64> = xi_grid.iter().copied().filter(|x| *x >= 0.0).collect();
    let mut neg: Vec<f64> = xi_grid.iter().copied().filter(|x| *x < 0.0).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    neg.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut points: Vec<(f64, Complex64)> = Vec::new();
    let mut crossing: Option<f64> = None;
    for side in [pos, neg] {
        let mut prev = Complex64::new(1.0, 0.0);
        for xi in side {
            let (z, dominant) = nearest(&eigs(xi)?, prev);
            if !dominant {
                crossing = Some(crossing.map_or(xi, |c: f64| if xi.abs() < c.abs() { xi } else { c }));
                break;
            }
            points.push((xi, z));
            prev = z;
        }
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (xi, lambda): (Vec<f64>, Vec<Complex64>) = points.into_iter().unzip();

    let h = params.step;
    let lead = |x: f64| -> Result<Complex64> { Ok(nearest(&eigs(x)?, Complex64::new(1.0, 0.0)).0) };
    let curvature = (lead(h)? + lead(-h)? - lead(0.0)? * 2.0).re / (h * h);
    let (sigma2, gk_terms) = green_kubo(rpf, f, params.max_lag)?;

    let window: Vec<(f64, Complex64)> =
        xi.iter().zip(&lambda).filter(|(x, _)| **x > 0.0 && **x <= params.fit_max).map(|(x, l)| (*x, *l)).collect();
    let num: f64 = window.iter().map(|(x, l)| (1.0 - l.re) * x * x).sum();
    let den: f64 = window.iter().map(|(x, _)| x.powi(4)).sum();
    let two_a_kappa = if den > 0.0 { num / den } else { f64::NAN };
    let cubic = |c: f64| {
        window.iter().map(|(x, l)| (l - Complex64::new(1.0 - c * x * x, 0.0)).norm() / x.powi(3)).fold(0.0, f64::max)
    };
    Ok(SpectralCurve {
        xi,
        lambda,
        crossing,
        curvature,
        sigma2,
        gk_terms,
        two_a_kappa,
        b_kappa: cubic(two_a_kappa),
        b_sigma: cubic(sigma2 / 2.0),
    })
}

/// `σ² = ∫f² dμ + 2Σ_{k≥1} ∫ f·(f∘σ^k) dμ`, each lag computed as `∫ (L^k f) f dμ`.
/// Stops after `max_lag` terms or once a term drops below `1e−18`.
pub fn green_kubo(rpf: &RpfData, f: &FiberCocycle, max_lag: usize) -> Result<(f64, Vec<f64>)> {
    let ft = f.table().lift(rpf.space())?;
    let fv = ft.values();
    let mu = rpf.mu().values();
    let dot = |a: &[f64]| -> f64 { a.iter().zip(fv).zip(mu).map(|((x, y), w)| x * y * w).sum() };
    let mut sigma2 = dot(fv);
    let mut terms = Vec::new();
    let mut cur = fv.to_vec();
    for _ in 0..max_lag {
        cur = rpf.transfer(&cur);
        let t = dot(&cur);
        terms.push(t);
        sigma2 += 2.0 * t;
        if cur.iter().fold(0.0f64, |m, x| m.max(x.abs())) < 1e-18 {
            break;
        }
    }
    Ok((sigma2, terms))
}

/// Sequence `w_n = ‖𝓛_ξⁿ probe‖_H` for a probe normalized to `‖probe‖_H = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub xi: f64,
    pub h: f64,
    pub w: Vec<f64>,
    pub monotone: bool,
    /// Per-step factor from a log-linear fit of the entries above `1e−13`.
    pub rate: Option<f64>,
}

impl DecayProfile {
    /// First `n` with `w_n < level`.
    pub fn first_below(&self, level: f64) -> Option<usize> {
        self.w.iter().position(|&w| w < level)
    }

    /// `max_n w_n / (4(1 − A ξ²)ⁿ)`; the envelope holds when this is at most 1.
    pub fn envelope_ratio(&self, a: f64) -> f64 {
        let q = 1.0 - a * self.xi * self.xi;
        self.w.iter().enumerate().map(|(n, w)| w / (4.0 * q.powi(n as i32))).fold(0.0, f64::max)
    }
}

pub fn norm_decay_profile(op: &TwistedOperator, probe: &StateFunction, h: f64, n_max: usize) -> Result<DecayProfile> {
    let theta = op.theta();
    let scale = h_norm(probe, h, theta);
    if scale == 0.0 {
        return Err(Error::InvalidArgument("probe is zero".into()));
    }
    let mut cur = probe.map(|z| z / scale);
    let mut w = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        w.push(h_norm(&cur, h, theta));
        if n < n_max {
            cur = op.apply(&cur)?;
        }
    }
    let monotone = w.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12) + 1e-15);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        w.iter().enumerate().filter(|(_, v)| **v > 1e-13).map(|(n, v)| (n as f64, v.ln())).unzip();
    let rate = if xs.len() >= 3 { Some(fit_line(&xs, &ys)?.slope.exp()) } else { None };
    Ok(DecayProfile { xi: op.xi(), h, w, monotone, rate })
}

/// Elementwise maximum of the decay profiles of several probes.
pub fn worst_decay_profile(
    op: &TwistedOperator,
    probes: &[StateFunction],
    h: f64,
    n_max: usize,
) -> Result<DecayProfile> {
    let profiles = probes.iter().map(|p| norm_decay_profile(op, p, h, n_max)).collect::<Result<Vec<_>>>()?;
    let first = profiles.first().ok_or_else(|| Error::InsufficientData("no probes".into()))?;
    let w: Vec<f64> = (0..=n_max).map(|n| profiles.iter().map(|p| p.w[n]).fold(0.0, f64::max)).collect();
    let rate = profiles.iter().filter_map(|p| p.rate).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    Ok(DecayProfile { xi: first.xi, h, monotone: profiles.iter().all(|p| p.monotone), rate, w })
}

/// Constant probe plus `count` random functions of mixed shapes.
pub fn standard_probes(space: &WordSpace, theta: f64, count: usize, seed: u64) -> Vec<StateFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = vec![StateFunction::constant(space.clone(), Complex64::new(1.0, 0.0))];
    probes.extend((0..count).map(|i| random_function(space, theta, i % 3, &mut rng)));
    probes
}

/// Upper bound `1 − C₁(ε/ℓ)^d ε` on `∫ v dμ` for `0 ≤ v ≤ 1` with `|v|_θ ≤ ℓ`
/// and `v(x̄) ≤ 1 − ε` somewhere, with `C₁ = C_u 2^{−(d+1)}` from the ball fit.
pub fn integral_deficit_bound(ball: &BallFit, epsilon: f64, ell: f64) -> f64 {
    1.0 - ball.c_u * 0.5 * (epsilon / (2.0 * ell)).powf(ball.d) * epsilon
}
