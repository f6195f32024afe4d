//! Ruelle–Perron–Frobenius eigendata, Gibbs measures and orbit sampling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::fit::fit_line;
use crate::symbolic::{PreimageGraph, RealTable, SftSpace, StateFunction, Symbol, WordSpace};

/// A locally constant potential `u`, one value per admissible depth-`k` word.
pub type Potential = RealTable;

/// Default stopping tolerance for the eigen-solver.
pub const DEFAULT_TOL: f64 = 1e-13;

const DENSE_FALLBACK_STATES: usize = 64;

/// Matrix of the transfer operator on depth-`m` words:
/// `M[x][y] = e^{u(y)}` whenever `y` is a one-step preimage of `x`.
///
/// Each preimage pair `(x, y)` with `y = a·x₀…x_{m-2}` is also labelled by the
/// depth-`(m+1)` edge word `a·x`, on which the normalized weights live.
#[derive(Clone, Debug)]
pub struct RuelleMatrix {
    sft: SftSpace,
    graph: PreimageGraph,
    weights: Vec<Vec<f64>>,
    edge_space: WordSpace,
    edge_words: Vec<Vec<usize>>,
}

pub fn ruelle_matrix(sft: &SftSpace, u: &Potential, m: usize) -> Result<RuelleMatrix> {
    let required = u.depth().max(1);
    if m < required {
        return Err(Error::DepthTooSmall { depth: m, required });
    }
    let space = sft.words(m)?;
    let graph = sft.preimage_graph(&space);
    let eu: Vec<f64> = space.words().iter().map(|w| u.eval(w.symbols()).map(f64::exp)).collect::<Result<_>>()?;
    let weights = graph.rows().iter().map(|row| row.iter().map(|&y| eu[y]).collect()).collect();
    let edge_space = sft.words(m + 1)?;
    let edge_words = graph
        .rows()
        .iter()
        .enumerate()
        .map(|(x, row)| {
            row.iter()
                .map(|&y| {
                    let mut s = vec![space.word(y).symbols()[0]];
                    s.extend_from_slice(space.word(x).symbols());
                    edge_space.index_of(&s).ok_or_else(|| Error::InadmissibleWord(format!("{s:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuelleMatrix { sft: sft.clone(), graph, weights, edge_space, edge_words })
}

impl RuelleMatrix {
    pub fn space(&self) -> &WordSpace {
        self.graph.space()
    }

    pub fn graph(&self) -> &PreimageGraph {
        &self.graph
    }

    /// Entry `M[x][y]`.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.graph.preimages(x).iter().position(|&p| p == y).map_or(0.0, |k| self.weights[x][k])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.space().len();
        let mut m = DMatrix::zeros(n, n);
        for (x, row) in self.graph.rows().iter().enumerate() {
            for (k, &y) in row.iter().enumerate() {
                m[(x, y)] += self.weights[x][k];
            }
        }
        m
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (x, row) in self.graph.rows().iter().enumerate() {
            out[x] = row.iter().zip(&self.weights[x]).map(|(&y, w)| w * v[y]).sum();
        }
    }

    fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (x, row) in self.graph.rows().iter().enumerate() {
            for (&y, w) in row.iter().zip(&self.weights[x]) {
                out[y] += w * v[x];
            }
        }
    }
}

/// Leading eigendata of a Ruelle matrix and the derived Gibbs measure.
///
/// `h`, `nu` and `mu` live on depth-`m` words. The normalized weight
/// `g = e^u h / (λ h∘σ)` depends on one more symbol than `h` in general, so it
/// is stored on the depth-`(m+1)` edge words.
#[derive(Clone, Debug)]
pub struct RpfData {
    sft: SftSpace,
    graph: PreimageGraph,
    edge_words: Vec<Vec<usize>>,
    lambda: f64,
    h: RealTable,
    nu: RealTable,
    g: RealTable,
    mu: RealTable,
    residual: f64,
}

/// Power iteration on the matrix and its transpose, stopped when the
/// Collatz–Wielandt bracket of the eigenvalue is narrower than `tol`.
pub fn rpf_eigendata(matrix: &RuelleMatrix, tol: f64) -> Result<RpfData> {
    let n = matrix.space().len();
    let max_iters = 200_000;
    let right = perron_vector(n, tol, max_iters, |v, o| matrix.apply(v, o));
    let left = perron_vector(n, tol, max_iters, |v, o| matrix.apply_transpose(v, o));
    let ((lambda, h, r1), (_, nu, r2)) = match (right, left) {
        (Ok(r), Ok(l)) => (r, l),
        (r, l) if n < DENSE_FALLBACK_STATES => {
            let dense = matrix.to_dense();
            let r = r.or_else(|_| dense_perron(&dense))?;
            let l = l.or_else(|_| dense_perron(&dense.transpose()))?;
            (r, l)
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let nu_sum: f64 = nu.iter().sum();
    let nu: Vec<f64> = nu.iter().map(|v| v / nu_sum).collect();
    let pairing: f64 = h.iter().zip(&nu).map(|(a, b)| a * b).sum();
    let h: Vec<f64> = h.iter().map(|v| v / pairing).collect();
    let mut mu: Vec<f64> = h.iter().zip(&nu).map(|(a, b)| a * b).collect();
    let mu_sum: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|v| *v /= mu_sum);

    let mut g = vec![0.0; matrix.edge_space.len()];
    for (x, row) in matrix.graph.rows().iter().enumerate() {
        for (k, &y) in row.iter().enumerate() {
            g[matrix.edge_words[x][k]] = matrix.weights[x][k] * h[y] / (lambda * h[x]);
        }
    }
    let space = matrix.space().clone();
    Ok(RpfData {
        sft: matrix.sft.clone(),
        graph: matrix.graph.clone(),
        edge_words: matrix.edge_words.clone(),
        lambda,
        h: RealTable::new(space.clone(), h)?,
        nu: RealTable::new(space.clone(), nu)?,
        g: RealTable::new(matrix.edge_space.clone(), g)?,
        mu: RealTable::new(space, mu)?,
        residual: r1.max(r2),
    })
}

type Perron = (f64, Vec<f64>, f64);

fn perron_vector(n: usize, tol: f64, max_iters: usize, apply: impl Fn(&[f64], &mut [f64])) -> Result<Perron> {
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for _ in 0..max_iters {
        apply(&v, &mut w);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in w.iter().zip(&v) {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = w.iter().fold(0.0f64, |m, x| m.max(*x));
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / norm;
        }
        gap = (hi - lo) / hi;
        if gap <= tol {
            return Ok((0.5 * (hi + lo), v, gap));
        }
    }
    Err(Error::NoConvergence { iterations: max_iters, residual: gap })
}

fn dense_perron(m: &DMatrix<f64>) -> Result<Perron> {
    let n = m.nrows();
    let ev = m.complex_eigenvalues();
    let lambda = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.ok_or(Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let (k, _) = svd.singular_values.argmin();
    let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x = (*x * sign).abs());
    let residual = svd.singular_values[k];
    Ok((lambda, v, residual))
}

impl RpfData {
    pub fn sft(&self) -> &SftSpace {
        &self.sft
    }

    pub fn theta(&self) -> f64 {
        self.sft.theta()
    }

    pub fn depth(&self) -> usize {
        self.mu.depth()
    }

    pub fn space(&self) -> &WordSpace {
        self.mu.space()
    }

    /// Depth-`(m+1)` edge words labelling the preimage pairs.
    pub fn edge_space(&self) -> &WordSpace {
        self.g.space()
    }

    /// Edge-word indices of the preimages of `x`, aligned with `graph().preimages(x)`.
    pub fn edge_words(&self, x: usize) -> &[usize] {
        &self.edge_words[x]
    }

    pub fn graph(&self) -> &PreimageGraph {
        &self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h(&self) -> &RealTable {
        &self.h
    }

    pub fn nu(&self) -> &RealTable {
        &self.nu
    }

    pub fn g(&self) -> &RealTable {
        &self.g
    }

    pub fn mu(&self) -> &RealTable {
        &self.mu
    }

    /// Width of the final eigenvalue bracket.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest deviation of `Σ_{σy=x} g(y)` from 1.
    pub fn normalization_defect(&self) -> f64 {
        self.edge_words
            .iter()
            .map(|row| (row.iter().map(|&e| self.g.get(e)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The normalized operator `(Lv)(x) = Σ_{σy=x} g(y) v(y)` on depth-`m` tables.
    pub fn transfer(&self, v: &[f64]) -> Vec<f64> {
        self.graph
            .rows()
            .iter()
            .zip(&self.edge_words)
            .map(|(row, edges)| row.iter().zip(edges).map(|(&y, &e)| self.g.get(e) * v[y]).sum())
            .collect()
    }

    /// Gibbs measure of the cylinder spanned by `symbols` (any length).
    pub fn cylinder_measure(&self, symbols: &[Symbol]) -> Result<f64> {
        let m = self.depth();
        let n = symbols.len();
        if !self.sft.is_admissible(symbols) {
            return Ok(0.0);
        }
        if n < m {
            let space = self.space();
            return Ok(space
                .words()
                .iter()
                .enumerate()
                .filter(|(_, w)| w.symbols().starts_with(symbols))
                .map(|(i, _)| self.mu.get(i))
                .sum());
        }
        let mut p = self.mu.eval(&symbols[n - m..])?;
        for i in 0..n - m {
            p *= self.g.eval(&symbols[i..])?;
        }
        Ok(p)
    }

    /// Gibbs measure of every admissible cylinder of the given depth.
    pub fn measure_table(&self, depth: usize) -> Result<RealTable> {
        let space = self.sft.words(depth)?;
        let values = space.words().iter().map(|w| self.cylinder_measure(w.symbols())).collect::<Result<Vec<_>>>()?;
        RealTable::new(space, values)
    }

    /// `∫ v dμ` for a real locally constant function.
    pub fn integrate(&self, v: &RealTable) -> Result<f64> {
        let weights = self.weights_for(v.space())?;
        Ok(weights.iter().zip(v.values()).map(|(a, b)| a * b).sum())
    }

    /// `∫ v dμ` for a complex locally constant function.
    pub fn integrate_complex(&self, v: &StateFunction) -> Result<Complex64> {
        let weights = self.weights_for(v.space())?;
        Ok(weights.iter().zip(v.values()).map(|(a, b)| b * *a).sum())
    }

    /// Cylinder masses on the words of `space`.
    pub fn weights_for(&self, space: &WordSpace) -> Result<Vec<f64>> {
        if space.depth() == self.depth() {
            return Ok(self.mu.values().to_vec());
        }
        space.words().iter().map(|w| self.cylinder_measure(w.symbols())).collect()
    }

    /// Forward Markov chain realizing the Gibbs measure.
    pub fn chain(&self) -> Result<GibbsChain> {
        GibbsChain::new(self)
    }
}

/// Forward Markov chain on depth-`m` words whose stationary law is `μ`:
/// `P(b | w) = g(wb) μ(w₁…w_{m-1}b) / μ(w)`.
#[derive(Clone, Debug)]
pub struct GibbsChain {
    space: WordSpace,
    initial: WeightedIndex<f64>,
    initial_probs: Vec<f64>,
    next: Vec<Vec<(Symbol, usize)>>,
    probs: Vec<Vec<f64>>,
    samplers: Vec<WeightedIndex<f64>>,
}

impl GibbsChain {
    fn new(rpf: &RpfData) -> Result<Self> {
        let space = rpf.space().clone();
        let m = space.depth();
        let a = rpf.sft.alphabet_size();
        let mut next = Vec::with_capacity(space.len());
        let mut probs = Vec::with_capacity(space.len());
        let mut buf = Vec::with_capacity(m);
        for (i, w) in space.words().iter().enumerate() {
            let last = w.symbols()[m - 1];
            let mut row = Vec::new();
            let mut p = Vec::new();
            for b in 0..a as Symbol {
                if !rpf.sft.allows(last, b) {
                    continue;
                }
                buf.clear();
                buf.extend_from_slice(&w.symbols()[1..]);
                buf.push(b);
                let j = space.index_of(&buf).ok_or_else(|| Error::InadmissibleWord(format!("{buf:?}")))?;
                row.push((b, j));
                let mut edge = w.symbols().to_vec();
                edge.push(b);
                p.push(rpf.g.eval(&edge)? * rpf.mu.get(j) / rpf.mu.get(i));
            }
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            next.push(row);
            probs.push(p);
        }
        let samplers = probs
            .iter()
            .map(|p| WeightedIndex::new(p.clone()).map_err(|e| Error::InvalidArgument(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let initial_probs = rpf.mu.values().to_vec();
        let initial = WeightedIndex::new(initial_probs.clone()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(GibbsChain { space, initial, initial_probs, next, probs, samplers })
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial_probs
    }

    /// Transition probabilities out of word `i`, paired with `(symbol, next word)`.
    pub fn row(&self, i: usize) -> (&[(Symbol, usize)], &[f64]) {
        (&self.next[i], &self.probs[i])
    }

    /// Draws a μ-distributed word of the given length.
    pub fn sample_word<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<Symbol> {
        let mut state = self.initial.sample(rng);
        let mut out = Vec::with_capacity(length.max(self.depth()));
        out.extend_from_slice(self.space.word(state).symbols());
        while out.len() < length {
            let k = self.samplers[state].sample(rng);
            let (b, j) = self.next[state][k];
            out.push(b);
            state = j;
        }
        out.truncate(length.max(self.depth()));
        out
    }
}

/// A μ-typical orbit of the given length, deterministic in `seed`.
pub fn sample_orbit(chain: &GibbsChain, length: usize, seed: u64) -> Result<Vec<Symbol>> {
    if length < chain.depth() {
        return Err(Error::InvalidArgument(format!("length {length} below chain depth {}", chain.depth())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(chain.sample_word(length, &mut rng))
}

/// Constants of the lower Gibbs bound `μ(B(x,r)) ≥ C_u r^d`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct BallFit {
    pub c_u: f64,
    pub d: f64,
}

/// Fits `log μ(B(x,r))` against `log r` over every ball of the given radii.
/// Radii must be powers `θ^j`; the ball of radius `θ^j` is a depth-`j` cylinder.
pub fn gibbs_ball_fit(rpf: &RpfData, radii: &[f64]) -> Result<BallFit> {
    if radii.len() < 2 {
        return Err(Error::InsufficientData(format!("{} radii", radii.len())));
    }
    let theta = rpf.theta();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let jf = r.ln() / theta.ln();
        let j = jf.round();
        if (jf - j).abs() > 1e-9 || j < 0.0 {
            return Err(Error::InvalidArgument(format!("radius {r} is not a power of theta")));
        }
        let table = rpf.measure_table(j as usize)?;
        for &m in table.values() {
            if m > 0.0 {
                xs.push(r.ln());
                ys.push(m.ln());
            }
        }
    }
    let fit = fit_line(&xs, &ys)?;
    let d = fit.slope;
    let c_u = xs.iter().zip(&ys).map(|(x, y)| (y - d * x).exp()).fold(f64::INFINITY, f64::min);
    Ok(BallFit { c_u, d })
}

/// Fitted spectral-gap envelope `‖Lⁿv − ∫v dμ‖∞ ≤ C δⁿ`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GapFit {
    pub c: f64,
    pub delta: f64,
    pub errors: Vec<f64>,
}

/// Iterates the normalized operator on sup-normalized probes and fits the
/// exponential rate of the worst-case deviation from the mean.
pub fn spectral_gap_fit(rpf: &RpfData, probes: &[RealTable], n_max: usize) -> Result<GapFit> {
    let mut errors = vec![0.0f64; n_max + 1];
    for probe in probes {
        let v = probe.lift(rpf.space())?;
        let scale = v.sup_norm().max(f64::MIN_POSITIVE);
        let mut cur: Vec<f64> = v.values().iter().map(|x| x / scale).collect();
        let mean: f64 = cur.iter().zip(rpf.mu.values()).map(|(a, b)| a * b).sum();
        for e in errors.iter_mut() {
            let dev = cur.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
            *e = e.max(dev);
            cur = rpf.transfer(&cur);
        }
    }
    let floor = 1e-13;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        errors.iter().enumerate().filter(|(_, e)| **e > floor).map(|(n, e)| (n as f64, e.ln())).unzip();
    let delta = if xs.len() >= 2 { fit_line(&xs, &ys)?.slope.exp().min(1.0) } else { 0.0 };
    let c = errors
        .iter()
        .enumerate()
        .map(|(n, e)| {
            if *e <= floor {
                0.0
            } else if delta > 0.0 {
                e / delta.powi(n as i32)
            } else {
                *e
            }
        })
        .fold(0.0, f64::max);
    Ok(GapFit { c, delta, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Word;

    fn bernoulli(m: usize) -> RpfData {
        let sft = SftSpace::full_shift(2, 0.5).unwrap();
        let u = Potential::constant(sft.words(1).unwrap(), -(2f64.ln()));
        rpf_eigendata(&ruelle_matrix(&sft, &u, m).unwrap(), DEFAULT_TOL).unwrap()
    }

    fn parry(m: usize) -> RpfData {
        let sft = SftSpace::golden_mean(0.5).unwrap();
        let u = Potential::constant(sft.words(1).unwrap(), 0.0);
        rpf_eigendata(&ruelle_matrix(&sft, &u, m).unwrap(), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn uniform_bernoulli_matrix() {
        let sft = SftSpace::full_shift(2, 0.5).unwrap();
        let u = Potential::constant(sft.words(1).unwrap(), -(2f64.ln()));
        let m = ruelle_matrix(&sft, &u, 1).unwrap().to_dense();
        assert!(m.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn golden_mean_adjacency() {
        let sft = SftSpace::golden_mean(0.5).unwrap();
        let u = Potential::constant(sft.words(1).unwrap(), 0.0);
        let m = ruelle_matrix(&sft, &u, 1).unwrap().to_dense();
        // Row x lists preimages y with y -> x allowed.
        assert_eq!(m.as_slice(), &[1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn non_uniform_potential_placement() {
        let sft = SftSpace::full_shift(2, 0.5).unwrap();
        let u = Potential::new(sft.words(1).unwrap(), vec![0.0, 3f64.ln()]).unwrap();
        let rm = ruelle_matrix(&sft, &u, 2).unwrap();
        let space = rm.space().clone();
        for (x, wx) in space.words().iter().enumerate() {
            for (y, wy) in space.words().iter().enumerate() {
                let is_pre = wy.symbols()[1] == wx.symbols()[0];
                let expected = if is_pre {
                    if wy.symbols()[0] == 1 {
                        3.0
                    } else {
                        1.0
                    }
                } else {
                    0.0
                };
                assert!((rm.entry(x, y) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn depth_too_small() {
        let sft = SftSpace::full_shift(2, 0.5).unwrap();
        let u = Potential::constant(sft.words(3).unwrap(), 0.0);
        assert!(matches!(ruelle_matrix(&sft, &u, 2), Err(Error::DepthTooSmall { .. })));
    }

    #[test]
    fn bernoulli_eigendata() {
        let rpf = bernoulli(3);
        assert!((rpf.lambda() - 1.0).abs() < 1e-12);
        assert!(rpf.h().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(rpf.mu().values().iter().all(|v| (v - 0.125).abs() < 1e-14));
        assert!(rpf.normalization_defect() < 1e-12);
    }

    #[test]
    fn parry_measure() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for m in 1..5 {
            let rpf = parry(m);
            assert!((rpf.lambda() - phi).abs() < 1e-10);
            let mu0 = rpf.cylinder_measure(&[0]).unwrap();
            assert!((mu0 - phi * phi / (phi * phi + 1.0)).abs() < 1e-10);
            assert!(rpf.normalization_defect() < 1e-12);
        }
    }

    #[test]
    fn kolmogorov_consistency_across_depths() {
        let a = parry(3);
        let b = parry(4);
        for w in a.space().words() {
            let ma = a.cylinder_measure(w.symbols()).unwrap();
            let mb = b.cylinder_measure(w.symbols()).unwrap();
            assert!((ma - mb).abs() < 1e-12);
            let shifted: f64 = (0..2u8)
                .map(|s| {
                    let mut v = vec![s];
                    v.extend_from_slice(w.symbols());
                    a.cylinder_measure(&v).unwrap()
                })
                .sum();
            assert!((shifted - ma).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_fixed() {
        let rpf = parry(3);
        let one = vec![1.0; rpf.space().len()];
        assert!(rpf.transfer(&one).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sampling_frequencies() {
        let rpf = bernoulli(2);
        let chain = rpf.chain().unwrap();
        let orbit = sample_orbit(&chain, 1_000_000, 7).unwrap();
        let zeros = orbit.iter().filter(|&&s| s == 0).count() as f64 / orbit.len() as f64;
        assert!((zeros - 0.5).abs() < 0.002);
        assert_eq!(orbit, sample_orbit(&chain, 1_000_000, 7).unwrap());

        let rpf = parry(2);
        let chain = rpf.chain().unwrap();
        let orbit = sample_orbit(&chain, 200_000, 3).unwrap();
        let p = orbit.iter().filter(|&&s| s == 0).count() as f64 / orbit.len() as f64;
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let target = phi * phi / (phi * phi + 1.0);
        // The chain is correlated; allow a generous multiple of the i.i.d. error.
        assert!((p - target).abs() < 6.0 * (target * (1.0 - target) / 2e5f64).sqrt());
        assert!(!orbit.windows(2).any(|w| w == [1, 1]));
    }

    #[test]
    fn ball_fit_bernoulli_and_parry() {
        let rpf = bernoulli(2);
        let radii: Vec<f64> = (0..8).map(|j| 0.5f64.powi(j)).collect();
        let fit = gibbs_ball_fit(&rpf, &radii).unwrap();
        assert!((fit.d - 1.0).abs() < 1e-10);
        assert!((fit.c_u - 1.0).abs() < 1e-10);

        let rpf = parry(2);
        let radii: Vec<f64> = (0..=12).map(|j| 0.5f64.powi(j)).collect();
        let fit = gibbs_ball_fit(&rpf, &radii).unwrap();
        for j in 0..=12 {
            let r = 0.5f64.powi(j);
            for &m in rpf.measure_table(j as usize).unwrap().values() {
                assert!(m >= fit.c_u * r.powf(fit.d) * (1.0 - 1e-12));
            }
        }
        assert!(matches!(gibbs_ball_fit(&rpf, &[0.5]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn spectral_gap_of_parry() {
        let rpf = parry(2);
        let space = rpf.space().clone();
        let probe = RealTable::from_fn(space, |w: &Word| w.symbols()[0] as f64 - 0.3 * w.symbols()[1] as f64);
        let fit = spectral_gap_fit(&rpf, &[probe], 30).unwrap();
        // Second eigenvalue of the golden-mean Parry chain: 1/φ².
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(fit.delta < 1.0);
        assert!((fit.delta - 1.0 / (phi * phi)).abs() < 0.05, "{}", fit.delta);
    }
}
