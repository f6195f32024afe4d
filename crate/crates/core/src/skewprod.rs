//! The skew product `F(x, r) = (σx, r + f(x))`: Birkhoff sums, centering,
//! the finite-range two-sided reduction and accessibility diagnostics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::RpfData;
use crate::symbolic::{RealTable, SftSpace, Symbol, Word, WordSpace};

/// A locally constant real cocycle `f` of depth `k`.
#[derive(Clone, Debug)]
pub struct FiberCocycle {
    table: RealTable,
    mean: Option<f64>,
}

impl FiberCocycle {
    pub fn new(table: RealTable) -> Self {
        FiberCocycle { table, mean: None }
    }

    pub fn depth(&self) -> usize {
        self.table.depth()
    }

    pub fn table(&self) -> &RealTable {
        &self.table
    }

    /// `∫ f dμ` as recorded by [`center`], if the cocycle was centered.
    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn eval(&self, symbols: &[Symbol]) -> Result<f64> {
        self.table.eval(symbols)
    }

    /// `f_n` evaluated on a symbol sequence of length at least `n + k - 1`.
    pub fn birkhoff(&self, symbols: &[Symbol], n: usize) -> Result<f64> {
        let k = self.depth();
        if n == 0 {
            return Ok(0.0);
        }
        if symbols.len() + 1 < n + k.max(1) {
            return Err(Error::WordTooShort(Word::new(symbols.to_vec()).to_string()));
        }
        let mut s = 0.0;
        for i in 0..n {
            s += self.table.eval(&symbols[i..])?;
        }
        Ok(s)
    }

    /// Largest absolute value of the table.
    pub fn sup_norm(&self) -> f64 {
        self.table.sup_norm()
    }
}

/// `f_n(w) = Σ_{i<n} f(σ^i w)`; requires `depth(w) ≥ n + k - 1`.
pub fn birkhoff_sum(f: &FiberCocycle, w: &Word, n: usize) -> Result<f64> {
    f.birkhoff(w.symbols(), n)
}

/// Subtracts `∫ f dμ`.
pub fn center(f: &FiberCocycle, rpf: &RpfData) -> Result<FiberCocycle> {
    let mean = rpf.integrate(&f.table)?;
    let shifted = f.table.map(|v| v - mean);
    let residual = rpf.integrate(&shifted)?;
    Ok(FiberCocycle { table: shifted, mean: Some(residual) })
}

/// A cocycle depending on coordinates `-k..=k` of a two-sided sequence,
/// stored on windows of length `2k + 1`.
#[derive(Clone, Debug)]
pub struct TwoSidedCocycle {
    range: usize,
    table: RealTable,
}

impl TwoSidedCocycle {
    pub fn new(range: usize, table: RealTable) -> Result<Self> {
        if table.depth() != 2 * range + 1 {
            return Err(Error::DepthMismatch { expected: 2 * range + 1, got: table.depth() });
        }
        Ok(TwoSidedCocycle { range, table })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn table(&self) -> &RealTable {
        &self.table
    }
}

/// A function of the coordinates `offset..offset + depth` of a two-sided sequence.
#[derive(Clone, Debug)]
pub struct WindowFunction {
    pub offset: isize,
    pub table: RealTable,
}

/// Output of [`reduce_to_one_sided`]: `f = f⁺ + h − h∘σ`.
#[derive(Clone, Debug)]
pub struct OneSidedReduction {
    pub f_plus: FiberCocycle,
    pub h: WindowFunction,
}

/// Exact telescoping for a finite-range cocycle of range `k`:
/// `f⁺ = f∘σ^k` reads coordinates `0..=2k` and `h = Σ_{j<k} f∘σ^j` reads `-k..2k`.
pub fn reduce_to_one_sided(sft: &SftSpace, f2: &TwoSidedCocycle) -> Result<OneSidedReduction> {
    let k = f2.range;
    let f_plus = FiberCocycle::new(f2.table.clone());
    let h_space = sft.words(3 * k)?;
    let h = RealTable::from_fn(h_space, |w| {
        let s = w.symbols();
        (0..k).map(|j| f2.table.eval(&s[j..]).unwrap_or(f64::NAN)).sum()
    });
    if h.values().iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("cocycle table does not cover every admissible window".into()));
    }
    Ok(OneSidedReduction { f_plus, h: WindowFunction { offset: -(k as isize), table: h } })
}

impl OneSidedReduction {
    /// Largest `|f − (f⁺ + h − h∘σ)|` over admissible windows of coordinates `-k..=2k`.
    pub fn max_defect(&self, sft: &SftSpace, f2: &TwoSidedCocycle) -> Result<f64> {
        let k = f2.range;
        let space = sft.words(3 * k + 1)?;
        let mut worst = 0.0f64;
        for w in space.words() {
            let s = w.symbols();
            let lhs = f2.table.eval(s)?;
            let rhs = self.f_plus.eval(&s[k..])? + self.h.table.eval(s)? - self.h.table.eval(&s[1..])?;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }

    /// Checks the identity up to floating-point rounding of the telescoped sums.
    pub fn verify(&self, sft: &SftSpace, f2: &TwoSidedCocycle) -> Result<()> {
        let defect = self.max_defect(sft, f2)?;
        let scale = f2.table.sup_norm().max(1.0) * (f2.range as f64 + 1.0);
        if defect > 8.0 * f64::EPSILON * scale {
            return Err(Error::NotCohomologous(defect));
        }
        Ok(())
    }
}

/// Search parameters for the collapsed-accessibility coverage.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AccessParams {
    /// Birkhoff-sum length.
    pub n: usize,
    /// Largest number of stable pairs per cycle.
    pub max_pairs: usize,
    /// Junction words share a prefix of length at least `n - prefix_slack`.
    pub prefix_slack: usize,
    /// Bound on the number of search-state insertions.
    pub budget: u64,
}

impl Default for AccessParams {
    fn default() -> Self {
        AccessParams { n: 8, max_pairs: 4, prefix_slack: 7, budget: 50_000_000 }
    }
}

/// Achievable sums `Σ f_n(x_i) − f_n(y_i)` in `[0, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct AccessReport {
    pub n: usize,
    pub max_pairs: usize,
    pub budget: u64,
    pub prefix_slack: usize,
    /// Closeness constant `C = θ^{-c}` realized by the prefix slack.
    pub closeness_constant: f64,
    pub achieved: Vec<f64>,
    /// Achievable sums in `[-1, 1]`; symmetric under negation.
    pub signed: Vec<f64>,
    /// Smallest cycle length witnessing each achieved value.
    pub cycle_lengths: Vec<usize>,
    /// Largest cycle length needed for any achieved value.
    pub longest_needed: usize,
    pub covering_radius: f64,
    pub budget_exhausted: bool,
    pub states_visited: u64,
}

const KEY_SCALE: f64 = 1e9;

fn key(t: f64) -> i64 {
    (t * KEY_SCALE).round() as i64
}

/// Searches cycles of at most `N` stable pairs of depth-`(n+k)` words.
///
/// Consecutive pairs are joined by words sharing a prefix of length `n − c`,
/// so every Birkhoff window lying entirely in that prefix cancels. A pair
/// `(x, y)` is then summarized by the block `q` of prefix symbols still
/// entering a window on each side, and by `W(x) − W(y)`, where `W` sums the
/// windows meeting the free tail; the shared suffix stays internal to the
/// pair. Cycles are closed walks on the `q` blocks.
pub fn collapsed_access_coverage(sft: &SftSpace, f: &FiberCocycle, params: AccessParams) -> Result<AccessReport> {
    let k = f.depth().max(1);
    let c = params.prefix_slack;
    let q_len = (k - 1).max(1);
    if params.n < c + q_len {
        return Err(Error::InvalidArgument(format!(
            "n = {} must be at least prefix_slack + {} = {}",
            params.n,
            q_len,
            c + q_len
        )));
    }
    if params.n < 2 * params.max_pairs {
        return Err(Error::InvalidArgument(format!("n = {} must be at least 2N = {}", params.n, 2 * params.max_pairs)));
    }
    let tail_len = c + k;
    let nodes = sft.words(q_len + tail_len)?;
    let blocks = sft.words(q_len)?;
    let f_table = f.table();
    // Windows starting at positions n−c−k+1 ..= n−1, in node coordinates.
    let first = q_len + 1 - k;
    let weight: Vec<i64> = nodes
        .words()
        .iter()
        .map(|w| {
            let s = w.symbols();
            key((first..q_len + c).map(|o| f_table.eval(&s[o..]).unwrap_or(0.0)).sum())
        })
        .collect();
    let block_of = |i: usize| blocks.index_of_prefix(nodes.word(i).symbols()).expect("node prefix is admissible");
    let mut by_suffix: BTreeMap<Vec<Symbol>, Vec<usize>> = BTreeMap::new();
    for i in 0..nodes.len() {
        by_suffix.entry(nodes.word(i).symbols()[q_len + tail_len - k..].to_vec()).or_default().push(i);
    }
    // pair_values[a][b]: values W(x) − W(y) over stable pairs with q(x) = a, q(y) = b.
    let nb = blocks.len();
    let mut pair_values: Vec<Vec<BTreeSet<i64>>> = vec![vec![BTreeSet::new(); nb]; nb];
    for group in by_suffix.values() {
        for &x in group {
            for &y in group {
                pair_values[block_of(x)][block_of(y)].insert(weight[x] - weight[y]);
            }
        }
    }
    let pair_values: Vec<Vec<Vec<i64>>> =
        pair_values.into_iter().map(|row| row.into_iter().map(|s| s.into_iter().collect()).collect()).collect();
    let max_step = pair_values.iter().flatten().flatten().map(|v| v.abs()).max().unwrap_or(0);

    let per_start_budget = (params.budget / nb.max(1) as u64).max(1);
    let results: Vec<(BTreeMap<i64, usize>, u64, bool)> = (0..nb)
        .into_par_iter()
        .map(|s| search_from(s, &pair_values, params.max_pairs, max_step, per_start_budget))
        .collect();

    let mut merged: BTreeMap<i64, usize> = BTreeMap::new();
    let mut visited = 0;
    let mut exhausted = false;
    for (found, v, ex) in results {
        visited += v;
        exhausted |= ex;
        for (t, len) in found {
            let e = merged.entry(t).or_insert(len);
            *e = (*e).min(len);
        }
    }
    // Each node weight carries half a key unit of rounding; merge keys closer than the accumulated slack.
    let slack = 2 * params.max_pairs as i64;
    let mut clusters: Vec<(i64, usize)> = Vec::new();
    let mut last = i64::MIN;
    for (t, len) in merged {
        match clusters.last_mut() {
            Some(cl) if t - last <= slack => cl.1 = cl.1.min(len),
            _ => clusters.push((t, len)),
        }
        last = t;
    }
    let signed: Vec<f64> = clusters.iter().map(|&(t, _)| (t as f64 / KEY_SCALE).clamp(-1.0, 1.0)).collect();
    let (achieved, cycle_lengths): (Vec<f64>, Vec<usize>) = clusters
        .into_iter()
        .filter(|&(t, _)| t >= -slack)
        .map(|(t, len)| ((t as f64 / KEY_SCALE).clamp(0.0, 1.0), len))
        .unzip();
    let covering_radius = covering_radius(&achieved);
    Ok(AccessReport {
        n: params.n,
        max_pairs: params.max_pairs,
        budget: params.budget,
        prefix_slack: c,
        closeness_constant: sft.theta().powi(-(c as i32)),
        longest_needed: cycle_lengths.iter().copied().max().unwrap_or(0),
        achieved,
        signed,
        cycle_lengths,
        covering_radius,
        budget_exhausted: exhausted,
        states_visited: visited,
    })
}

fn search_from(
    start: usize,
    pair_values: &[Vec<Vec<i64>>],
    max_pairs: usize,
    max_step: i64,
    budget: u64,
) -> (BTreeMap<i64, usize>, u64, bool) {
    let mut found: BTreeMap<i64, usize> = BTreeMap::new();
    let mut frontier: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); pair_values.len()];
    frontier[start].insert(0);
    let mut visited = 0u64;
    let slack = 2 * max_pairs as i64;
    let one = key(1.0);
    for len in 1..=max_pairs {
        let remaining = (max_pairs - len) as i64;
        let bound = one + slack + remaining * max_step;
        let mut next: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); pair_values.len()];
        for (a, ts) in frontier.iter().enumerate() {
            for (b, deltas) in pair_values[a].iter().enumerate() {
                for &t in ts {
                    for &d in deltas {
                        let t2 = t + d;
                        if t2.abs() > bound {
                            continue;
                        }
                        if b == start && (-one - slack..=one + slack).contains(&t2) {
                            found.entry(t2).or_insert(len);
                        }
                        if remaining > 0 && next[b].insert(t2) {
                            visited += 1;
                            if visited >= budget {
                                return (found, visited, true);
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    (found, visited, false)
}

/// Half the largest gap of `{0} ∪ points ∪ {1}`.
pub fn covering_radius(points: &[f64]) -> f64 {
    let mut pts: Vec<f64> = points.iter().copied().filter(|t| (0.0..=1.0).contains(t)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = 0.0;
    let mut gap = 0.0f64;
    for &p in &pts {
        gap = gap.max(p - prev);
        prev = p;
    }
    gap = gap.max(1.0 - prev);
    gap / 2.0
}

/// Birkhoff sum over one period of a periodic orbit.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicSum {
    pub period: usize,
    pub word: String,
    pub sum: f64,
}

/// A fitted lattice `f_p ∈ p·offset + rℤ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lattice {
    pub r: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArithmeticityReport {
    pub max_period: usize,
    pub orbit_sums: Vec<PeriodicSum>,
    /// Distinct values of `f_p / p`, sorted.
    pub normalized: Vec<f64>,
    /// Largest pairwise difference of `f_p / p`.
    pub spread: f64,
    pub cohomologous_to_constant: bool,
    pub lattice: Option<Lattice>,
}

const PROBE_TOL: f64 = 1e-10;

/// Periodic-orbit diagnostics: constant `f_p / p` suggests a coboundary plus
/// constant, and `f_p ∈ pc + rℤ` suggests a lattice cocycle.
pub fn non_arithmeticity_probe(sft: &SftSpace, f: &FiberCocycle, max_period: usize) -> Result<ArithmeticityReport> {
    let k = f.depth();
    let mut orbit_sums = Vec::new();
    for p in 1..=max_period {
        for w in sft.periodic_words(p)? {
            let ext: Vec<Symbol> = (0..p + k).map(|i| w.symbols()[i % p]).collect();
            let sum = f.birkhoff(&ext, p)?;
            orbit_sums.push(PeriodicSum { period: p, word: w.to_string(), sum });
        }
    }
    let mut normalized: Vec<f64> = orbit_sums.iter().map(|o| o.sum / o.period as f64).collect();
    normalized.sort_by(|a, b| a.partial_cmp(b).unwrap());
    normalized.dedup_by(|a, b| (*a - *b).abs() < PROBE_TOL);
    let spread = match (normalized.first(), normalized.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let cohomologous_to_constant = spread <= PROBE_TOL;
    let lattice = if cohomologous_to_constant { None } else { fit_lattice(&orbit_sums) };
    Ok(ArithmeticityReport { max_period, orbit_sums, normalized, spread, cohomologous_to_constant, lattice })
}

fn fit_lattice(sums: &[PeriodicSum]) -> Option<Lattice> {
    let mut by_period: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in sums {
        by_period.entry(s.period).or_default().push(s.sum);
    }
    let diffs: Vec<f64> =
        by_period.values().flat_map(|v| v.iter().map(move |x| (x - v[0]).abs())).filter(|d| *d > PROBE_TOL).collect();
    let scale = diffs.iter().copied().fold(0.0, f64::max);
    if diffs.is_empty() {
        return None;
    }
    let tol = 1e-9 * scale.max(1.0);
    let r = diffs.iter().skip(1).fold(diffs[0], |g, &d| real_gcd(g, d, tol));
    let on_lattice = |x: f64| (x / r - (x / r).round()).abs() * r <= 1e-7 * scale.max(1.0);
    if r < 1e-6 * scale.max(1.0) || !diffs.iter().all(|&d| on_lattice(d)) {
        return None;
    }
    let (&p0, vals) = by_period.iter().next()?;
    let base = vals[0];
    (0..p0).find_map(|j| {
        let c = (base - r * j as f64) / p0 as f64;
        sums.iter().all(|s| on_lattice(s.sum - s.period as f64 * c)).then(|| Lattice { r, offset: c.rem_euclid(r) })
    })
}

fn real_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    while b > tol {
        let mut r = a % b;
        if b - r <= tol {
            r = 0.0;
        }
        a = b;
        b = r;
    }
    a
}

/// Enumerates the stable-pair partner classes of depth `n + m` words sharing
/// their last `m` symbols; exposed for diagnostics.
pub fn suffix_classes(space: &WordSpace, m: usize) -> BTreeMap<Vec<Symbol>, Vec<usize>> {
    let d = space.depth();
    let mut out: BTreeMap<Vec<Symbol>, Vec<usize>> = BTreeMap::new();
    for (i, w) in space.words().iter().enumerate() {
        out.entry(w.symbols()[d - m..].to_vec()).or_default().push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemPreset;

    #[test]
    fn birkhoff_examples() {
        let sys = SystemPreset::BernoulliS1.build().unwrap();
        let w = Word::parse("01011").unwrap();
        let v = birkhoff_sum(&sys.cocycle, &w, 3).unwrap();
        assert!((v - (-2.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(birkhoff_sum(&sys.cocycle, &w, 1).unwrap(), sys.cocycle.eval(&[0, 1]).unwrap());
        assert!(matches!(birkhoff_sum(&sys.cocycle, &w, 5), Err(Error::WordTooShort(_))));
    }

    #[test]
    fn centering() {
        let sys = SystemPreset::BernoulliS1.build().unwrap();
        let c = center(&sys.cocycle, &sys.rpf).unwrap();
        for (a, b) in c.table().values().iter().zip(sys.cocycle.table().values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let constant = FiberCocycle::new(RealTable::constant(sys.sft.words(2).unwrap(), 3.5));
        let c = center(&constant, &sys.rpf).unwrap();
        assert!(c.sup_norm() < 1e-12);
        assert!(c.mean().unwrap().abs() < 1e-12);
    }

    #[test]
    fn reduction_range_zero_and_one() {
        let sft = SftSpace::full_shift(2, 0.5).unwrap();
        let f0 = TwoSidedCocycle::new(0, RealTable::new(sft.words(1).unwrap(), vec![1.0, -1.0]).unwrap()).unwrap();
        let red = reduce_to_one_sided(&sft, &f0).unwrap();
        assert_eq!(red.f_plus.table().values(), f0.table().values());
        assert!(red.h.table.values().iter().all(|v| *v == 0.0));
        red.verify(&sft, &f0).unwrap();

        let f1 = TwoSidedCocycle::new(
            1,
            RealTable::from_fn(sft.words(3).unwrap(), |w| {
                [1.0, -1.0, 2f64.sqrt(), 0.3][(w.symbols()[0] * 2 + w.symbols()[1]) as usize]
            }),
        )
        .unwrap();
        let red = reduce_to_one_sided(&sft, &f1).unwrap();
        red.verify(&sft, &f1).unwrap();
        assert_eq!(red.h.offset, -1);
    }

    #[test]
    fn access_examples() {
        let params = AccessParams::default();
        let s1 = SystemPreset::BernoulliS1.build().unwrap();
        let rep = collapsed_access_coverage(&s1.sft, &s1.cocycle, params).unwrap();
        // Largest gap from 25√2 − 35 to 33 − 23√2, found by an independent enumeration.
        let expected = 34.0 - 24.0 * std::f64::consts::SQRT_2;
        assert!((rep.covering_radius - expected).abs() < 1e-8, "{}", rep.covering_radius);
        assert!(!rep.budget_exhausted);

        let zero = FiberCocycle::new(RealTable::constant(s1.sft.words(2).unwrap(), 0.0));
        let rep = collapsed_access_coverage(&s1.sft, &zero, params).unwrap();
        assert_eq!(rep.achieved, vec![0.0]);
        assert_eq!(rep.covering_radius, 0.5);

        let lat = SystemPreset::LatticeCounterexample.build().unwrap();
        let rep = collapsed_access_coverage(&lat.sft, &lat.cocycle, params).unwrap();
        assert_eq!(rep.achieved, vec![0.0]);
        assert_eq!(rep.covering_radius, 0.5);
    }

    /// Explicit cycles `x₁ y₁ x₂ y₂` of depth-`(n+2)` words.
    fn brute_force_cycles(f: &FiberCocycle, n: usize, c: usize) -> Vec<f64> {
        let len = n + 2;
        let words: Vec<Vec<Symbol>> =
            (0..1usize << len).map(|b| (0..len).map(|i| ((b >> (len - 1 - i)) & 1) as Symbol).collect()).collect();
        let fsum = |w: &Vec<Symbol>| f.birkhoff(w, n).unwrap();
        let stable = |x: &Vec<Symbol>, y: &Vec<Symbol>| x[n..] == y[n..];
        let close = |y: &Vec<Symbol>, x: &Vec<Symbol>| y[..n - c] == x[..n - c];
        let mut out: Vec<f64> = Vec::new();
        for x1 in &words {
            for y1 in words.iter().filter(|y| stable(x1, y)) {
                let a = fsum(x1) - fsum(y1);
                if close(y1, x1) {
                    out.push(a);
                }
                for x2 in words.iter().filter(|x| close(y1, x)) {
                    for y2 in words.iter().filter(|y| stable(x2, y) && close(y, x1)) {
                        out.push(a + fsum(x2) - fsum(y2));
                    }
                }
            }
        }
        out.retain(|t| (-1e-9..=1.0 + 1e-9).contains(t));
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
        out
    }

    #[test]
    fn access_matches_explicit_cycles() {
        let s1 = SystemPreset::BernoulliS1.build().unwrap();
        for c in [2, 4] {
            let params = AccessParams { n: 5, max_pairs: 2, prefix_slack: c, budget: 1_000_000 };
            let rep = collapsed_access_coverage(&s1.sft, &s1.cocycle, params).unwrap();
            let bf = brute_force_cycles(&s1.cocycle, 5, c);
            assert_eq!(rep.achieved.len(), bf.len(), "c={c} {:?} {:?}", rep.achieved, bf);
            for (a, b) in rep.achieved.iter().zip(&bf) {
                assert!((a - b.clamp(0.0, 1.0)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn probe_examples() {
        let s1 = SystemPreset::BernoulliS1.build().unwrap();
        let rep = non_arithmeticity_probe(&s1.sft, &s1.cocycle, 6).unwrap();
        assert!(!rep.cohomologous_to_constant);
        assert!(rep.lattice.is_none());
        assert!(rep.orbit_sums.iter().any(|o| o.word == "0" && (o.sum - 1.0).abs() < 1e-15));

        let zero = FiberCocycle::new(RealTable::constant(s1.sft.words(2).unwrap(), 0.0));
        let rep = non_arithmeticity_probe(&s1.sft, &zero, 6).unwrap();
        assert!(rep.cohomologous_to_constant);

        let lat = SystemPreset::LatticeCounterexample.build().unwrap();
        let rep = non_arithmeticity_probe(&lat.sft, &lat.cocycle, 6).unwrap();
        let l = rep.lattice.expect("lattice flagged");
        assert!((l.r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn covering_radius_endpoints() {
        assert_eq!(covering_radius(&[0.0]), 0.5);
        assert_eq!(covering_radius(&[0.0, 0.5, 1.0]), 0.25);
        assert!((covering_radius(&[0.2, 0.9]) - 0.35).abs() < 1e-15);
    }
}
