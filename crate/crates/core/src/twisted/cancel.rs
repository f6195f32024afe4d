//! Stable pairs, phase tolerances, cycles whose phase beats the tolerance,
//! and the cancellation dichotomy for nice functions.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{smooth_phases, TwistedOperator};
use crate::error::{Error, Result};
use crate::numerics::wrap_angle;
use crate::symbolic::{lipschitz_seminorm, word_metric, SftSpace, StateFunction, Word, WordSpace};

const KEY_SCALE: f64 = 1e9;

/// Two words of depth `n + m` with the same length-`m` suffix, so that
/// `σⁿx = σⁿy` as cylinders.
#[derive(Clone, Debug, Serialize)]
pub struct StablePair {
    pub x: Word,
    pub y: Word,
    pub n: usize,
    pub g_x: f64,
    pub g_y: f64,
    pub f_x: f64,
    pub f_y: f64,
    /// `ξ(f_n(y) − f_n(x))` wrapped to `(−π, π]`.
    pub phase: f64,
}

impl StablePair {
    pub fn new(op: &TwistedOperator, x: Word, y: Word, n: usize) -> Result<Self> {
        let len = n + op.base_depth();
        if x.depth() != len || y.depth() != len {
            return Err(Error::DepthMismatch { expected: len, got: x.depth().min(y.depth()) });
        }
        if x.symbols()[n..] != y.symbols()[n..] {
            return Err(Error::InvalidArgument(format!("{x} and {y} do not share a depth-{} suffix", op.base_depth())));
        }
        let (f_x, f_y) = (op.f_n(x.symbols(), n)?, op.f_n(y.symbols(), n)?);
        Ok(StablePair {
            g_x: op.g_n(x.symbols(), n)?,
            g_y: op.g_n(y.symbols(), n)?,
            phase: wrap_angle(op.xi() * (f_y - f_x)),
            f_x,
            f_y,
            x,
            y,
            n,
        })
    }

    pub fn stable_tolerance(&self, epsilon: f64) -> Result<f64> {
        stable_tolerance(self.g_x, self.g_y, epsilon)
    }
}

/// All ordered pairs, including `x = y`, of admissible words of depth
/// `n + |suffix|` ending in `suffix`.
pub fn stable_pairs(sft: &SftSpace, n: usize, suffix: &Word, budget: u64) -> Result<Vec<(Word, Word)>> {
    sft.check_word(suffix)?;
    let words: Vec<Word> = sft
        .words(n + suffix.depth())?
        .words()
        .iter()
        .filter(|w| w.symbols()[n..] == *suffix.symbols())
        .cloned()
        .collect();
    if (words.len() as u64).saturating_mul(words.len() as u64) > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    Ok(words.iter().flat_map(|x| words.iter().map(move |y| (x.clone(), y.clone()))).collect())
}

/// `δ_s ∈ [0, π]` with `1 − cos δ_s = ε(1/g_x + 1/g_y)`.
pub fn stable_tolerance(g_x: f64, g_y: f64, epsilon: f64) -> Result<f64> {
    let rhs = epsilon * (1.0 / g_x + 1.0 / g_y);
    if !(rhs < 2.0) || g_x <= 0.0 || g_y <= 0.0 {
        return Err(Error::ToleranceUndefined(format!("epsilon (1/g_x + 1/g_y) = {rhs}")));
    }
    Ok((1.0 - rhs).acos())
}

/// `δ_u ∈ [0, π/2)` with `sin δ_u = 2Hd`.
pub fn unstable_tolerance(d: f64, h: f64) -> Result<f64> {
    let s = 2.0 * h * d;
    if !(s < 1.0) || d < 0.0 {
        return Err(Error::ToleranceUndefined(format!("2Hd = {s}")));
    }
    Ok(s.asin())
}

/// Both tolerances of a pair: `δ_s` from its weights and `δ_u` from `d(x, y)`.
pub fn tolerances(pair: &StablePair, epsilon: f64, h: f64, theta: f64) -> Result<(f64, f64)> {
    Ok((pair.stable_tolerance(epsilon)?, unstable_tolerance(word_metric(&pair.x, &pair.y, theta)?, h)?))
}

/// `ε = (1 − cos(ξ₀/(2N))) / (2Gⁿ)` with `G = sup 1/g`, which forces every
/// stable tolerance below `ξ₀/(2N)`.
pub fn epsilon_schedule(op: &TwistedOperator, xi0: f64, n: usize, max_pairs: usize) -> f64 {
    let g_sup = op.g.values().iter().filter(|g| **g > 0.0).map(|g| 1.0 / g).fold(0.0, f64::max);
    (1.0 - (xi0 / (2.0 * max_pairs as f64)).cos()) / (2.0 * g_sup.powi(n as i32))
}

/// Options of [`find_us_cycle`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CycleParams {
    pub n: usize,
    /// Largest number of pairs `N`.
    pub max_pairs: usize,
    /// Shared prefix length is `n − prefix_slack`; `None` tries every admissible value.
    pub prefix_slack: Option<usize>,
    /// Defaults to [`epsilon_schedule`] at `ξ₀ = |ξ|`.
    pub epsilon: Option<f64>,
    pub budget: u64,
}

impl Default for CycleParams {
    fn default() -> Self {
        CycleParams { n: 8, max_pairs: 4, prefix_slack: None, epsilon: None, budget: 20_000_000 }
    }
}

/// A closed chain of stable pairs `(x_i, y_i)` where `y_i` and `x_{i+1}`
/// share a prefix, with phase exceeding the summed tolerances.
#[derive(Clone, Debug, Serialize)]
pub struct UsCycle {
    pub xi: f64,
    pub n: usize,
    pub epsilon: f64,
    pub h: f64,
    pub pairs: Vec<StablePair>,
    pub stable_tols: Vec<f64>,
    /// `d(y_i, x_{i+1})`, indices mod the cycle length.
    pub junction_distances: Vec<f64>,
    pub unstable_tols: Vec<f64>,
    /// `arg Π_i g̃_n(y_i)/g̃_n(x_i)` in `(−π, π]`.
    pub phase: f64,
    pub tolerance: f64,
    pub margin: f64,
}

impl UsCycle {
    fn assemble(op: &TwistedOperator, pairs: Vec<StablePair>, epsilon: f64, h: f64) -> Result<Self> {
        let k = pairs.len();
        let stable_tols = pairs.iter().map(|p| p.stable_tolerance(epsilon)).collect::<Result<Vec<_>>>()?;
        let junction_distances =
            (0..k).map(|i| word_metric(&pairs[i].y, &pairs[(i + 1) % k].x, op.theta())).collect::<Result<Vec<_>>>()?;
        let unstable_tols = junction_distances.iter().map(|&d| unstable_tolerance(d, h)).collect::<Result<Vec<_>>>()?;
        let phase = wrap_angle(pairs.iter().map(|p| p.phase).sum());
        let tolerance = stable_tols.iter().sum::<f64>() + unstable_tols.iter().sum::<f64>();
        Ok(UsCycle {
            xi: op.xi(),
            n: pairs[0].n,
            epsilon,
            h,
            pairs,
            stable_tols,
            junction_distances,
            unstable_tols,
            phase,
            margin: phase - tolerance,
            tolerance,
        })
    }

    /// Recomputes the phase from the complex weights and the tolerances from
    /// the words; fails if anything disagrees with the stored values.
    pub fn verify(&self, op: &TwistedOperator) -> Result<()> {
        let mut prod = Complex64::new(1.0, 0.0);
        for p in &self.pairs {
            prod *= op.g_tilde_n(p.y.symbols(), p.n)? / op.g_tilde_n(p.x.symbols(), p.n)?;
        }
        let fresh = UsCycle::assemble(op, self.pairs.clone(), self.epsilon, self.h)?;
        let bad = |a: f64, b: f64| (a - b).abs() > 1e-9;
        if bad(wrap_angle(prod.arg() - self.phase), 0.0)
            || bad(fresh.tolerance, self.tolerance)
            || bad(fresh.phase, self.phase)
        {
            return Err(Error::InvalidArgument("cycle data is inconsistent".into()));
        }
        if !(self.margin > 0.0) {
            return Err(Error::NotFound(format!("margin {}", self.margin)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Step {
    tol: f64,
    prev_state: usize,
    prev_key: i64,
    pair: (usize, usize),
}

/// Searches closed chains of at most `N` stable pairs for the largest
/// positive margin `phase − Σ(δ_s + δ_u)`.
///
/// States are prefixes of length `p = n − c`: pair `(x, y)` moves from the
/// prefix of `x` to the prefix of `y`, so consecutive pairs meet within
/// `θ^p`. Per state and Birkhoff key only the smallest tolerance survives.
pub fn find_us_cycle(op: &TwistedOperator, h: f64, params: CycleParams) -> Result<UsCycle> {
    let (n, m) = (params.n, op.base_depth());
    if n == 0 || params.max_pairs == 0 {
        return Err(Error::InvalidArgument("n and N must be positive".into()));
    }
    let theta = op.theta();
    let epsilon = params.epsilon.unwrap_or_else(|| epsilon_schedule(op, op.xi().abs(), n, params.max_pairs));
    let sft = &op.sft;
    let words = sft.words(n + m)?;
    let fs: Vec<f64> = words.words().iter().map(|w| op.f_n(w.symbols(), n)).collect::<Result<_>>()?;
    let gs: Vec<f64> = words.words().iter().map(|w| op.g_n(w.symbols(), n)).collect::<Result<_>>()?;
    let mut groups: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
    for (i, w) in words.words().iter().enumerate() {
        groups.entry(&w.symbols()[n..]).or_default().push(i);
    }
    let slacks: Vec<usize> = match params.prefix_slack {
        Some(c) => vec![c],
        None => (0..n).collect(),
    };
    let mut graphs = Vec::new();
    for c in slacks {
        let p = n
            .checked_sub(c)
            .filter(|p| *p >= 1)
            .ok_or_else(|| Error::InvalidArgument(format!("prefix slack {c} >= n")))?;
        let Ok(du) = unstable_tolerance(theta.powi(p as i32), h) else { continue };
        let prefixes = sft.words(p)?;
        let state = |i: usize| prefixes.index_of(&words.word(i).symbols()[..p]).expect("prefix is admissible");
        let mut moves: Moves = HashMap::new();
        for members in groups.values() {
            for &x in members {
                for &y in members {
                    if x == y {
                        continue;
                    }
                    let Ok(ds) = stable_tolerance(gs[x], gs[y], epsilon) else { continue };
                    let key = ((fs[x] - fs[y]) * KEY_SCALE).round() as i64;
                    let slot =
                        moves.entry((state(x), state(y))).or_default().entry(key).or_insert((f64::INFINITY, x, y));
                    if ds < slot.0 {
                        *slot = (ds, x, y);
                    }
                }
            }
        }
        let min_step = du + moves.values().flat_map(|m| m.values().map(|v| v.0)).fold(f64::INFINITY, f64::min);
        graphs.push(MoveGraph { states: prefixes.len(), du, min_step, moves });
    }
    let mut search = Search { op, n, epsilon, h, words: &words, work: 0, budget: params.budget, best: None };
    // Single pairs first: a good one caps the tolerance every longer chain may spend.
    for max_len in [1, params.max_pairs] {
        for g in &graphs {
            search.run(g, max_len)?;
        }
    }
    search.best.ok_or_else(|| Error::NotFound(format!("xi = {}, n = {n}, N = {}", op.xi(), params.max_pairs)))
}

/// `(a, b) → Birkhoff key → (δ_s, x, y)` with the smallest `δ_s` per key.
type Moves = HashMap<(usize, usize), HashMap<i64, (f64, usize, usize)>>;

struct MoveGraph {
    states: usize,
    du: f64,
    /// Cheapest tolerance of a single step.
    min_step: f64,
    moves: Moves,
}

struct Search<'a> {
    op: &'a TwistedOperator,
    n: usize,
    epsilon: f64,
    h: f64,
    words: &'a WordSpace,
    work: u64,
    budget: u64,
    best: Option<UsCycle>,
}

impl Search<'_> {
    fn run(&mut self, g: &MoveGraph, max_len: usize) -> Result<()> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.states];
        for &(a, b) in g.moves.keys() {
            out[a].push(b);
        }
        for start in 0..g.states {
            if max_len == 1 && !g.moves.contains_key(&(start, start)) {
                continue;
            }
            let mut layers: Vec<Vec<HashMap<i64, Step>>> = vec![vec![HashMap::new(); g.states]];
            layers[0][start].insert(0, Step { tol: 0.0, prev_state: start, prev_key: 0, pair: (0, 0) });
            for len in 1..=max_len {
                let cap = PI - self.best.as_ref().map_or(0.0, |b| b.margin);
                let mut next: Vec<HashMap<i64, Step>> = vec![HashMap::new(); g.states];
                for (a, entries) in layers[len - 1].iter().enumerate() {
                    for (&t, step) in entries {
                        if step.tol + g.min_step >= cap {
                            continue;
                        }
                        for &b in &out[a] {
                            if len == max_len && b != start {
                                continue;
                            }
                            for (&dk, &(ds, x, y)) in &g.moves[&(a, b)] {
                                self.work += 1;
                                if self.work > self.budget {
                                    return Err(Error::BudgetExceeded { budget: self.budget });
                                }
                                let tol = step.tol + ds + g.du;
                                // Anything off the start state needs at least one more step.
                                if tol >= cap || (b != start && tol + g.min_step >= cap) {
                                    continue;
                                }
                                let t2 = t + dk;
                                let slot = next[b].entry(t2).or_insert(Step {
                                    tol: f64::INFINITY,
                                    prev_state: a,
                                    prev_key: t,
                                    pair: (x, y),
                                });
                                if tol < slot.tol {
                                    *slot = Step { tol, prev_state: a, prev_key: t, pair: (x, y) };
                                }
                            }
                        }
                    }
                }
                let closing: Vec<(i64, f64)> = next[start].iter().map(|(&t, st)| (t, st.tol)).collect();
                for (t, tol) in closing {
                    let margin = wrap_angle(-self.op.xi() * t as f64 / KEY_SCALE) - tol;
                    if margin <= self.best.as_ref().map_or(0.0, |b| b.margin) {
                        continue;
                    }
                    let mut chain = Vec::with_capacity(len);
                    let (mut s, mut k) = (start, t);
                    for l in (1..=len).rev() {
                        let st = if l == len { &next[s][&k] } else { &layers[l][s][&k] };
                        chain.push(st.pair);
                        (s, k) = (st.prev_state, st.prev_key);
                    }
                    chain.reverse();
                    let pairs = chain
                        .into_iter()
                        .map(|(x, y)| {
                            StablePair::new(self.op, self.words.word(x).clone(), self.words.word(y).clone(), self.n)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let cycle = UsCycle::assemble(self.op, pairs, self.epsilon, self.h)?;
                    if cycle.margin > self.best.as_ref().map_or(0.0, |b| b.margin) {
                        self.best = Some(cycle);
                    }
                }
                layers.push(next);
            }
        }
        Ok(())
    }
}

/// Checks `1 − ε < |ṽ| ≤ 1` and `|ṽ|_θ ≤ H`.
pub fn check_nice(v: &StateFunction, epsilon: f64, h: f64, theta: f64) -> Result<()> {
    if let Some(z) = v.values().iter().find(|z| !(z.norm() > 1.0 - epsilon && z.norm() <= 1.0 + 1e-12)) {
        return Err(Error::NotNice(format!("modulus {} outside (1 - {epsilon}, 1]", z.norm())));
    }
    let lip = lipschitz_seminorm(v, theta);
    if lip > h * (1.0 + 1e-12) {
        return Err(Error::NotNice(format!("seminorm {lip} exceeds H = {h}")));
    }
    Ok(())
}

/// Random nice function on the operator's word space: moduli uniform in
/// `(1 − ε, 1)` and θ-smooth phases, rescaled until the seminorm is at most `H`.
pub fn sample_nice<R: Rng + ?Sized>(op: &TwistedOperator, epsilon: f64, h: f64, rng: &mut R) -> Result<StateFunction> {
    let space = op.space();
    let theta = op.theta();
    let moduli: Vec<f64> = (0..space.len()).map(|_| 1.0 - epsilon * rng.gen_range(0.001..0.999)).collect();
    let mut s = rng.gen_range(0.05..1.0) * h * (1.0 - theta) / (2.0 * std::f64::consts::PI);
    let phi0 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let unit: Vec<f64> = smooth_phases(space, theta, 1.0, rng);
    for _ in 0..200 {
        let values = moduli.iter().zip(&unit).map(|(r, u)| Complex64::from_polar(*r, phi0 + s * u)).collect();
        let v = StateFunction::new(space.clone(), values)?;
        if check_nice(&v, epsilon, h, theta).is_ok() {
            return Ok(v);
        }
        s *= 0.7;
    }
    Err(Error::NotNice(format!("no phase scale keeps the seminorm below H = {h}")))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CancellationCheck {
    pub is_cancellation: bool,
    /// `|g̃_n(x)ṽ(x) + g̃_n(y)ṽ(y)|`.
    pub lhs: f64,
    /// `g_n(x)|ṽ(x)| + g_n(y)|ṽ(y)| − ε`.
    pub rhs: f64,
    /// `|𝓛_ξⁿ ṽ|` at the shared suffix, computed when the pair cancels.
    pub transfer_modulus: Option<f64>,
}

/// Tests whether `(x, y)` is a cancellation pair for a nice `ṽ` on depth-`(n + m)`
/// words; when it is, also evaluates `|𝓛_ξⁿ ṽ|` on the common image.
pub fn cancellation_pair_check(
    pair: &StablePair,
    v: &StateFunction,
    op: &TwistedOperator,
    epsilon: f64,
    h: f64,
) -> Result<CancellationCheck> {
    if v.space() != op.space() || op.depth() != pair.x.depth() {
        return Err(Error::DepthMismatch { expected: pair.x.depth(), got: v.depth() });
    }
    check_nice(v, epsilon, h, op.theta())?;
    let n = pair.n;
    let vx = v.eval(pair.x.symbols())?;
    let vy = v.eval(pair.y.symbols())?;
    let lhs = (op.g_tilde_n(pair.x.symbols(), n)? * vx + op.g_tilde_n(pair.y.symbols(), n)? * vy).norm();
    let rhs = pair.g_x * vx.norm() + pair.g_y * vy.norm() - epsilon;
    let is_cancellation = lhs <= rhs;
    let transfer_modulus = if is_cancellation {
        let suffix = &pair.x.symbols()[n..];
        let mut total = Complex64::new(0.0, 0.0);
        for (w, val) in op.space().words().iter().zip(v.values()) {
            if &w.symbols()[n..] == suffix {
                total += op.g_tilde_n(w.symbols(), n)? * val;
            }
        }
        Some(total.norm())
    } else {
        None
    };
    Ok(CancellationCheck { is_cancellation, lhs, rhs, transfer_modulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemPreset;
    use crate::twisted::twisted_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s1_pair_phase() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let op = twisted_matrix(&s.rpf, &s.cocycle, 1.0, 4).unwrap();
        let p = StablePair::new(&op, Word::parse("0000").unwrap(), Word::parse("1100").unwrap(), 2).unwrap();
        assert!((p.phase + 2.0).abs() < 1e-15);
        assert_eq!(p.g_x, 0.25);
        assert!(StablePair::new(&op, Word::parse("0000").unwrap(), Word::parse("1101").unwrap(), 2).is_err());
    }

    #[test]
    fn tolerance_examples() {
        assert!((stable_tolerance(0.25, 0.25, 0.01).unwrap() - 0.92f64.acos()).abs() < 1e-15);
        assert!((0.92f64.acos() - 0.40272).abs() < 1e-5);
        assert!((unstable_tolerance(0.125, 1.0).unwrap() - 0.25f64.asin()).abs() < 1e-15);
        assert!(stable_tolerance(0.25, 0.25, 0.25).is_err());
        assert!(unstable_tolerance(0.5, 1.0).is_err());
    }

    #[test]
    fn golden_mean_pairs() {
        let s = SystemPreset::GoldenMean.build().unwrap();
        let pairs = stable_pairs(&s.sft, 2, &Word::parse("0").unwrap(), 1000).unwrap();
        assert_eq!(pairs.len(), 9);
        assert!(pairs.iter().all(|(x, y)| s.sft.is_admissible(x.symbols()) && y.symbols()[2] == 0));
        assert!(matches!(stable_pairs(&s.sft, 2, &Word::parse("0").unwrap(), 8), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn s1_cycle_witness() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let op = twisted_matrix(&s.rpf, &s.cocycle, 1.0, 10).unwrap();
        let cycle = find_us_cycle(&op, 1.0, CycleParams::default()).unwrap();
        cycle.verify(&op).unwrap();
        assert!(cycle.pairs.len() <= 4);
        assert!(cycle.margin > 0.0);
        assert!(cycle.stable_tols.iter().all(|d| *d <= 1.0 / 8.0 + 1e-12));
    }

    #[test]
    fn lattice_has_no_cycle_at_pi() {
        let s = SystemPreset::LatticeCounterexample.build().unwrap();
        let op = twisted_matrix(&s.rpf, &s.cocycle, std::f64::consts::PI, 8).unwrap();
        let params = CycleParams { n: 6, ..Default::default() };
        assert!(matches!(find_us_cycle(&op, 1.0, params), Err(Error::NotFound(_))));
    }

    #[test]
    fn cycle_forces_cancellation() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let op = twisted_matrix(&s.rpf, &s.cocycle, 1.0, 10).unwrap();
        let h = 1.0;
        let cycle = find_us_cycle(&op, h, CycleParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let v = sample_nice(&op, cycle.epsilon, h, &mut rng).unwrap();
            let mut found = false;
            for p in &cycle.pairs {
                let c = cancellation_pair_check(p, &v, &op, cycle.epsilon, h).unwrap();
                if let Some(t) = c.transfer_modulus {
                    assert!(t <= 1.0 - cycle.epsilon + 1e-12);
                    found = true;
                }
            }
            assert!(found);
        }
    }

    #[test]
    fn not_nice_is_rejected() {
        let s = SystemPreset::BernoulliS1.build().unwrap();
        let op = twisted_matrix(&s.rpf, &s.cocycle, 1.0, 4).unwrap();
        let p = StablePair::new(&op, Word::parse("0000").unwrap(), Word::parse("1100").unwrap(), 2).unwrap();
        let v = StateFunction::constant(op.space().clone(), Complex64::new(0.5, 0.0));
        assert!(matches!(cancellation_pair_check(&p, &v, &op, 0.01, 1.0), Err(Error::NotNice(_))));
    }
}
