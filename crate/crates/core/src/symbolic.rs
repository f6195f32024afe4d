//! One-sided subshifts of finite type, finite-depth words and the metric `d_θ`.
//!
//! Points of the shift space are only ever represented through their depth-`m`
//! cylinder words. Every function on the shift is locally constant at some
//! fixed depth and is stored as a [`WordTable`] indexed by the admissible words
//! of that depth in lexicographic order.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// A finite word over the alphabet.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    /// Parses a word written as a string of decimal digits, e.g. `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::InvalidAlphabet(format!("cannot parse symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// The first `k` symbols.
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    /// The last `k` symbols.
    pub fn suffix(&self, k: usize) -> Word {
        let n = self.0.len();
        Word(self.0[n - k.min(n)..].to_vec())
    }

    /// Drops the first `k` symbols (the word of `σ^k x`).
    pub fn shift(&self, k: usize) -> Word {
        Word(self.0[k.min(self.0.len())..].to_vec())
    }

    /// Length of the longest common prefix.
    pub fn common_prefix(&self, other: &Word) -> usize {
        common_prefix(&self.0, &other.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&s| s > 9);
        for (i, s) in self.0.iter().enumerate() {
            if wide && i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

pub(crate) fn common_prefix(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// A one-sided topologically mixing subshift of finite type.
#[derive(Clone, Debug, Serialize)]
pub struct SftSpace {
    alphabet_size: usize,
    transitions: Vec<Vec<bool>>,
    theta: f64,
    mixing_power: usize,
}

/// Validates the transition matrix and records the smallest positive power.
pub fn build_sft(alphabet_size: usize, transitions: Vec<Vec<bool>>, theta: f64) -> Result<SftSpace> {
    if alphabet_size == 0 || alphabet_size > Symbol::MAX as usize + 1 {
        return Err(Error::InvalidAlphabet(format!("alphabet size {alphabet_size}")));
    }
    if transitions.len() != alphabet_size {
        return Err(Error::DimensionMismatch { expected: alphabet_size, got: transitions.len() });
    }
    for row in &transitions {
        if row.len() != alphabet_size {
            return Err(Error::DimensionMismatch { expected: alphabet_size, got: row.len() });
        }
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0,1), got {theta}")));
    }
    for a in 0..alphabet_size {
        let row = transitions[a].iter().any(|&t| t);
        let col = transitions.iter().any(|r| r[a]);
        if !row || !col {
            return Err(Error::DeadSymbol(a));
        }
    }
    let max_power = alphabet_size * alphabet_size;
    let mut power = transitions.clone();
    let mut mixing_power = None;
    for k in 1..=max_power {
        if power.iter().all(|r| r.iter().all(|&t| t)) {
            mixing_power = Some(k);
            break;
        }
        power = bool_product(&power, &transitions);
    }
    let mixing_power = mixing_power.ok_or(Error::NotMixing { max_power })?;
    Ok(SftSpace { alphabet_size, transitions, theta, mixing_power })
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect()).collect()
}

impl SftSpace {
    /// Full shift on `alphabet_size` symbols.
    pub fn full_shift(alphabet_size: usize, theta: f64) -> Result<Self> {
        build_sft(alphabet_size, vec![vec![true; alphabet_size]; alphabet_size], theta)
    }

    /// Golden-mean shift: the word `11` is forbidden.
    pub fn golden_mean(theta: f64) -> Result<Self> {
        build_sft(2, vec![vec![true, true], vec![true, false]], theta)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.transitions
    }

    /// Smallest `k` with `transitions^k` entrywise positive.
    pub fn mixing_power(&self) -> usize {
        self.mixing_power
    }

    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.transitions[a as usize][b as usize]
    }

    pub fn is_admissible(&self, symbols: &[Symbol]) -> bool {
        symbols.iter().all(|&s| (s as usize) < self.alphabet_size)
            && symbols.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if self.is_admissible(w.symbols()) {
            Ok(())
        } else {
            Err(Error::InadmissibleWord(w.to_string()))
        }
    }

    /// Admissible words of the given depth in lexicographic order.
    pub fn words(&self, depth: usize) -> Result<WordSpace> {
        WordSpace::build(self, depth)
    }

    /// One-step preimages `a·w[0..m-1]`, ascending in `a`.
    pub fn preimages(&self, w: &Word) -> Result<Vec<Word>> {
        self.check_word(w)?;
        let m = w.depth();
        if m == 0 {
            return Ok((0..self.alphabet_size as Symbol).map(|a| Word(vec![a])).collect());
        }
        let first = w.symbols()[0];
        Ok((0..self.alphabet_size as Symbol)
            .filter(|&a| self.allows(a, first))
            .map(|a| {
                let mut s = Vec::with_capacity(m);
                s.push(a);
                s.extend_from_slice(&w.symbols()[..m - 1]);
                Word(s)
            })
            .collect())
    }

    /// For each word `x` of `space`, the indices of the words `y` in `space`
    /// with `σy` in the cylinder of `x`, i.e. the one-step preimages.
    pub fn preimage_graph(&self, space: &WordSpace) -> PreimageGraph {
        let m = space.depth();
        let preimages = space
            .words()
            .iter()
            .map(|x| {
                let mut out = Vec::new();
                let mut buf = Vec::with_capacity(m);
                for a in 0..self.alphabet_size as Symbol {
                    if m > 0 && !self.allows(a, x.symbols()[0]) {
                        continue;
                    }
                    buf.clear();
                    buf.push(a);
                    buf.extend_from_slice(&x.symbols()[..m.saturating_sub(1)]);
                    if let Some(j) = space.index_of(&buf[..m]) {
                        out.push(j);
                    }
                }
                out
            })
            .collect();
        PreimageGraph { space: space.clone(), preimages }
    }

    /// Admissible words `w` of length `p` such that `w` repeated forever is an
    /// admissible periodic point (each point of each orbit appears once).
    pub fn periodic_words(&self, p: usize) -> Result<Vec<Word>> {
        let space = self.words(p)?;
        Ok(space.words().iter().filter(|w| p > 0 && self.allows(w.symbols()[p - 1], w.symbols()[0])).cloned().collect())
    }
}

/// The admissible words of one depth, sorted lexicographically.
#[derive(Clone)]
pub struct WordSpace(Arc<WordSpaceInner>);

struct WordSpaceInner {
    alphabet_size: usize,
    depth: usize,
    words: Vec<Word>,
    codes: Vec<u64>,
    /// `adjacent_lcp[i]` = common prefix length of words `i` and `i+1`.
    adjacent_lcp: Vec<usize>,
}

impl fmt::Debug for WordSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordSpace(depth={}, len={})", self.0.depth, self.0.words.len())
    }
}

impl PartialEq for WordSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.depth == other.0.depth
                && self.0.alphabet_size == other.0.alphabet_size
                && self.0.codes == other.0.codes)
    }
}

impl WordSpace {
    fn build(sft: &SftSpace, depth: usize) -> Result<Self> {
        let a = sft.alphabet_size as f64;
        if depth as f64 * a.log2() >= 63.0 {
            return Err(Error::InvalidArgument(format!("depth {depth} too large to index")));
        }
        let mut words = Vec::new();
        let mut stack: Vec<Symbol> = Vec::with_capacity(depth);
        enumerate(sft, depth, &mut stack, &mut words);
        let codes: Vec<u64> = words.iter().map(|w| encode(sft.alphabet_size, w.symbols())).collect();
        let adjacent_lcp = words.windows(2).map(|p| p[0].common_prefix(&p[1])).collect();
        Ok(WordSpace(Arc::new(WordSpaceInner { alphabet_size: sft.alphabet_size, depth, words, codes, adjacent_lcp })))
    }

    pub fn depth(&self) -> usize {
        self.0.depth
    }

    pub fn len(&self) -> usize {
        self.0.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.words.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.alphabet_size
    }

    pub fn words(&self) -> &[Word] {
        &self.0.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.0.words[i]
    }

    /// Index of the admissible word with exactly these symbols.
    pub fn index_of(&self, symbols: &[Symbol]) -> Option<usize> {
        if symbols.len() != self.0.depth || symbols.iter().any(|&s| s as usize >= self.0.alphabet_size) {
            return None;
        }
        self.0.codes.binary_search(&encode(self.0.alphabet_size, symbols)).ok()
    }

    /// Index of the word formed by the first `depth` symbols of `symbols`.
    pub fn index_of_prefix(&self, symbols: &[Symbol]) -> Option<usize> {
        if symbols.len() < self.0.depth {
            return None;
        }
        self.index_of(&symbols[..self.0.depth])
    }

    /// Common prefix length of words `i` and `j` (equal to the depth if `i == j`).
    pub fn lcp(&self, i: usize, j: usize) -> usize {
        if i == j {
            return self.0.depth;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.0.adjacent_lcp[lo..hi].iter().copied().min().unwrap_or(self.0.depth)
    }

    /// `d_θ` between words `i` and `j`.
    pub fn distance(&self, i: usize, j: usize, theta: f64) -> f64 {
        theta.powi(self.lcp(i, j) as i32)
    }
}

fn enumerate(sft: &SftSpace, depth: usize, stack: &mut Vec<Symbol>, out: &mut Vec<Word>) {
    if stack.len() == depth {
        out.push(Word(stack.clone()));
        return;
    }
    for a in 0..sft.alphabet_size as Symbol {
        if let Some(&last) = stack.last() {
            if !sft.allows(last, a) {
                continue;
            }
        }
        stack.push(a);
        enumerate(sft, depth, stack, out);
        stack.pop();
    }
}

fn encode(alphabet_size: usize, symbols: &[Symbol]) -> u64 {
    symbols.iter().fold(0u64, |acc, &s| acc * alphabet_size as u64 + s as u64)
}

/// One-step preimage structure on a word space.
#[derive(Clone, Debug)]
pub struct PreimageGraph {
    space: WordSpace,
    preimages: Vec<Vec<usize>>,
}

impl PreimageGraph {
    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn preimages(&self, x: usize) -> &[usize] {
        &self.preimages[x]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.preimages
    }

    /// Total number of (x, y) preimage pairs.
    pub fn edge_count(&self) -> usize {
        self.preimages.iter().map(Vec::len).sum()
    }
}

/// A locally constant function: one value per admissible word of a fixed depth.
#[derive(Clone, Debug)]
pub struct WordTable<T> {
    space: WordSpace,
    values: Vec<T>,
}

/// Complex-valued locally constant function.
pub type StateFunction = WordTable<Complex64>;

/// Real-valued locally constant function.
pub type RealTable = WordTable<f64>;

impl<T: Copy> WordTable<T> {
    pub fn new(space: WordSpace, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), got: values.len() });
        }
        Ok(WordTable { space, values })
    }

    pub fn from_fn(space: WordSpace, mut f: impl FnMut(&Word) -> T) -> Self {
        let values = space.words().iter().map(&mut f).collect();
        WordTable { space, values }
    }

    pub fn constant(space: WordSpace, value: T) -> Self {
        let values = vec![value; space.len()];
        WordTable { space, values }
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    /// Value at the cylinder containing `symbols` (which must be at least `depth` long).
    pub fn eval(&self, symbols: &[Symbol]) -> Result<T> {
        if symbols.len() < self.depth() {
            return Err(Error::WordTooShort(Word(symbols.to_vec()).to_string()));
        }
        self.space
            .index_of_prefix(symbols)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::InadmissibleWord(Word(symbols[..self.depth()].to_vec()).to_string()))
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> WordTable<U> {
        WordTable { space: self.space.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// The same function viewed on a deeper word space.
    pub fn lift(&self, to: &WordSpace) -> Result<WordTable<T>> {
        if to.depth() < self.depth() {
            return Err(Error::DepthTooSmall { depth: to.depth(), required: self.depth() });
        }
        let values = to.words().iter().map(|w| self.eval(w.symbols())).collect::<Result<Vec<_>>>()?;
        Ok(WordTable { space: to.clone(), values })
    }
}

impl RealTable {
    pub fn to_complex(&self) -> StateFunction {
        self.map(|v| Complex64::new(v, 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl StateFunction {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// `d_θ` on words of equal depth: `θ^j` with `j` the common prefix length,
/// and `θ^m` for identical words (the cylinder diameter).
pub fn word_metric(w1: &Word, w2: &Word, theta: f64) -> Result<f64> {
    if w1.depth() != w2.depth() {
        return Err(Error::DepthMismatch { expected: w1.depth(), got: w2.depth() });
    }
    Ok(theta.powi(w1.common_prefix(w2) as i32))
}

/// Exact θ-Lipschitz seminorm of a locally constant function.
pub fn lipschitz_seminorm(v: &StateFunction, theta: f64) -> f64 {
    seminorm_by(v.space(), v.values(), theta, |a, b| (a - b).norm())
}

/// Exact θ-Lipschitz seminorm of a real locally constant function.
pub fn lipschitz_seminorm_real(v: &RealTable, theta: f64) -> f64 {
    seminorm_by(v.space(), v.values(), theta, |a, b| (a - b).abs())
}

/// Maximum over word pairs of `dist(v_i, v_j) / d_θ(i, j)`.
pub fn seminorm_by<T>(space: &WordSpace, values: &[T], theta: f64, dist: impl Fn(&T, &T) -> f64) -> f64 {
    let n = values.len();
    let inner = &space.0;
    let inv: Vec<f64> = (0..=inner.depth).map(|j| theta.powi(-(j as i32))).collect();
    let mut best: f64 = 0.0;
    for i in 0..n {
        let mut lcp = inner.depth;
        for j in i + 1..n {
            lcp = lcp.min(inner.adjacent_lcp[j - 1]);
            let d = dist(&values[i], &values[j]);
            if d > 0.0 {
                best = best.max(d * inv[lcp]);
            }
        }
    }
    best
}
