//! Randomized invariant suites shared by the property tests and the
//! acceptance run. Each suite draws 1000 cases from a fixed seed.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewmix::correlate::{cov_exact, cov_spectral, SpectralParams, DEFAULT_EXACT_BUDGET};
use skewmix::observables::{low_freq_variation, Atom, GlobalObservable, LocalObservable, SpectralMeasure};
use skewmix::skewprod::{reduce_to_one_sided, TwoSidedCocycle};
use skewmix::symbolic::{lipschitz_seminorm, word_metric, RealTable, StateFunction, Word};
use skewmix::systems::{System, SystemPreset};
use skewmix::twisted::{
    calibrate_c0, cancellation_pair_check, h_norm, sample_nice, stable_tolerance, unstable_tolerance, StablePair,
    TwistedOperator,
};

const XIS: [f64; 6] = [0.1, 0.3, 0.7, 1.0, 2.0, 4.0];
const DEPTHS: [usize; 2] = [2, 3];

struct Setup {
    system: System,
    c0: f64,
}

fn setups() -> &'static [Setup; 2] {
    static CELL: OnceLock<[Setup; 2]> = OnceLock::new();
    CELL.get_or_init(|| {
        [SystemPreset::BernoulliS1, SystemPreset::GoldenMean].map(|p| {
            let system = p.build().unwrap();
            let c0 = calibrate_c0(&system.rpf, &system.cocycle, &XIS, &DEPTHS, 200, 17).unwrap().c0;
            Setup { system, c0 }
        })
    })
}

fn random_state(op: &TwistedOperator, seed: u64) -> StateFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..op.space().len())
        .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-3.2..3.2)))
        .collect();
    StateFunction::new(op.space().clone(), values).unwrap()
}

pub const CASES: u32 = 1000;

fn runner() -> TestRunner {
    let config = ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

pub fn basic_inequality() -> Result<(), String> {
    check((0usize..2, 0usize..6, 0usize..2, any::<u64>()), |(sys, xi, depth, seed)| {
        let s = &setups()[sys];
        let op = TwistedOperator::new(&s.system.rpf, &s.system.cocycle, XIS[xi], DEPTHS[depth]).unwrap();
        let v = random_state(&op, seed);
        let theta = op.theta();
        let lhs = lipschitz_seminorm(&op.apply(&v).unwrap(), theta);
        let rhs = theta * lipschitz_seminorm(&v, theta) + s.c0 * op.g_tilde_seminorm() * v.sup_norm();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-14, "{lhs} > {rhs}");
        Ok(())
    })
}

pub fn h_norm_is_monotone() -> Result<(), String> {
    check((0usize..2, 0usize..6, 0usize..2, any::<u64>(), 1usize..6), |(sys, xi, depth, seed, steps)| {
        let s = &setups()[sys];
        let op = TwistedOperator::new(&s.system.rpf, &s.system.cocycle, XIS[xi], DEPTHS[depth]).unwrap();
        let h = op.constants(s.c0).h;
        let mut v = random_state(&op, seed);
        for _ in 0..steps {
            let next = op.apply(&v).unwrap();
            let (a, b) = (h_norm(&next, h, op.theta()), h_norm(&v, h, op.theta()));
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-15, "{a} > {b}");
            v = next;
        }
        Ok(())
    })
}

pub fn birkhoff_sums_are_additive() -> Result<(), String> {
    check((0usize..2, any::<u64>(), 0usize..20, 0usize..20), |(sys, seed, n, k)| {
        let s = &setups()[sys].system;
        let chain = s.rpf.chain().unwrap();
        let depth = s.cocycle.depth();
        let w = chain.sample_word(n + k + depth, &mut ChaCha8Rng::seed_from_u64(seed));
        let f = &s.cocycle;
        let whole = f.birkhoff(&w, n + k).unwrap();
        let split = f.birkhoff(&w, n).unwrap() + f.birkhoff(&w[n..], k).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole.abs()));
        let direct: f64 = (0..n).map(|j| f.eval(&w[j..j + depth]).unwrap()).sum();
        prop_assert!((f.birkhoff(&w, n).unwrap() - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        Ok(())
    })
}

pub fn cohomology_reduction_is_exact() -> Result<(), String> {
    check((any::<bool>(), 0usize..3, any::<u64>()), |(golden, range, seed)| {
        let sft = if golden { SystemPreset::GoldenMean } else { SystemPreset::BernoulliS1 }.build().unwrap().sft;
        let space = sft.words(2 * range + 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..space.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let f2 = TwoSidedCocycle::new(range, RealTable::new(space, values).unwrap()).unwrap();
        let red = reduce_to_one_sided(&sft, &f2).unwrap();
        red.verify(&sft, &f2).unwrap();
        // Along a sampled orbit segment the telescoped sums agree.
        let len = 3 * range + 1 + 12;
        let mut w = vec![rng.gen_range(0..2u8)];
        while w.len() < len {
            let a = rng.gen_range(0..2u8);
            if sft.allows(*w.last().unwrap(), a) {
                w.push(a);
            }
        }
        let k = range;
        let steps = len - (3 * k + 1) + 1;
        let lhs: f64 = (0..steps).map(|j| f2.table().eval(&w[j..]).unwrap()).sum();
        let plus: f64 = (0..steps).map(|j| red.f_plus.eval(&w[j + k..]).unwrap()).sum();
        let h = |j: usize| red.h.table.eval(&w[j..]).unwrap();
        let rhs = plus + h(0) - h(steps);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        Ok(())
    })
}

pub fn measure_is_consistent_and_invariant() -> Result<(), String> {
    check((0usize..2, any::<u64>(), 1usize..10), |(sys, seed, len)| {
        let rpf = &setups()[sys].system.rpf;
        let chain = rpf.chain().unwrap();
        let w = chain.sample_word(len, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = rpf.cylinder_measure(&w).unwrap();
        prop_assert!(m > 0.0);
        let sft = rpf.sft();
        let mut right = 0.0;
        let mut left = 0.0;
        for a in 0..sft.alphabet_size() as u8 {
            let mut wa = w.clone();
            wa.push(a);
            if sft.is_admissible(&wa) {
                right += rpf.cylinder_measure(&wa).unwrap();
            }
            let mut aw = vec![a];
            aw.extend(&w);
            if sft.is_admissible(&aw) {
                left += rpf.cylinder_measure(&aw).unwrap();
            }
        }
        prop_assert!((right - m).abs() <= 1e-12, "consistency {right} vs {m}");
        prop_assert!((left - m).abs() <= 1e-12, "invariance {left} vs {m}");
        Ok(())
    })
}

pub fn tolerance_propositions() -> Result<(), String> {
    check((0usize..2, 4usize..7, 0usize..6, any::<u64>()), |(sys, n, xi, seed)| {
        let s = &setups()[sys];
        let m = s.system.depth();
        let op = TwistedOperator::new(&s.system.rpf, &s.system.cocycle, XIS[xi], n + m).unwrap();
        let h = op.constants(s.c0).h;
        let epsilon = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = sample_nice(&op, epsilon, h, &mut rng).unwrap();
        let words = op.space().words();
        let x = words[rng.gen_range(0..words.len())].clone();
        let suffix = &x.symbols()[n..];
        let partners: Vec<&Word> = words.iter().filter(|w| &w.symbols()[n..] == suffix).collect();
        let y = partners[rng.gen_range(0..partners.len())].clone();
        let pair = StablePair::new(&op, x.clone(), y.clone(), n).unwrap();
        let check = cancellation_pair_check(&pair, &v, &op, epsilon, h).unwrap();
        if !check.is_cancellation {
            let a = op.g_tilde_n(x.symbols(), n).unwrap() * v.eval(x.symbols()).unwrap();
            let b = op.g_tilde_n(y.symbols(), n).unwrap() * v.eval(y.symbols()).unwrap();
            let ds = stable_tolerance(pair.g_x, pair.g_y, epsilon).unwrap();
            prop_assert!((a / b).arg().abs() <= ds + 1e-12, "stable: {} > {ds}", (a / b).arg().abs());
        }
        let z = words[rng.gen_range(0..words.len())].clone();
        let d = word_metric(&x, &z, op.theta()).unwrap();
        if let Ok(du) = unstable_tolerance(d, h) {
            let r = v.eval(x.symbols()).unwrap() / v.eval(z.symbols()).unwrap();
            prop_assert!(r.arg().abs() <= du + 1e-12, "unstable: {} > {du}", r.arg().abs());
        }
        Ok(())
    })
}

pub fn spectral_bands_account_for_the_total() -> Result<(), String> {
    check(
        (
            0usize..7,
            prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0, -1.0f64..1.0), 1..4),
            any::<bool>(),
            0.05f64..0.49,
        ),
        |(n, atoms, with_zero, alpha)| {
            let s = &setups()[0].system;
            let mut list: Vec<Atom> =
                atoms.iter().map(|&(location, re, im)| Atom { location, weight: Complex64::new(re, im) }).collect();
            if with_zero {
                list.push(Atom { location: 0.0, weight: Complex64::new(0.5, 0.0) });
            }
            let phi =
                GlobalObservable::uniform("atoms", &s.sft, SpectralMeasure { atoms: list.clone(), density: None })
                    .unwrap();
            let psi = psi();
            let params = SpectralParams { alpha, refine: false };
            let sc = cov_spectral(&s.rpf, &s.cocycle, &phi, psi, n, params).unwrap();
            prop_assert_eq!(sc.total, sc.bands.total());
            let boundary = if n == 0 { 1.0 } else { (n as f64).powf(-alpha) };
            prop_assert!((sc.boundary - boundary).abs() <= 1e-15);
            if !list.iter().any(|a| a.location != 0.0 && a.location.abs() < boundary) {
                prop_assert_eq!(sc.bands.low, Complex64::new(0.0, 0.0));
            }
            if !list.iter().any(|a| a.location.abs() >= boundary) {
                prop_assert_eq!(sc.bands.high, Complex64::new(0.0, 0.0));
            }
            let lf = low_freq_variation(&phi, &s.rpf, boundary).unwrap();
            prop_assert!(sc.bands.low.norm() <= psi.max_l(0) * lf * (1.0 + 1e-9) + 1e-14);
            let exact = cov_exact(&s.rpf, &s.cocycle, &phi, psi, n, DEFAULT_EXACT_BUDGET).unwrap();
            prop_assert!((exact - sc.total).norm() <= 1e-8 + 1e-6 * exact.norm(), "{exact} vs {}", sc.total);
            Ok(())
        },
    )
}

fn psi() -> &'static LocalObservable {
    static CELL: OnceLock<LocalObservable> = OnceLock::new();
    CELL.get_or_init(|| LocalObservable::gaussian_bump(&setups()[0].system.sft).unwrap())
}

pub type Suite = fn() -> Result<(), String>;

/// Every suite with its name.
#[allow(dead_code)]
pub const SUITES: [(&str, Suite); 7] = [
    ("basic_inequality", basic_inequality),
    ("h_norm_is_monotone", h_norm_is_monotone),
    ("birkhoff_sums_are_additive", birkhoff_sums_are_additive),
    ("cohomology_reduction_is_exact", cohomology_reduction_is_exact),
    ("measure_is_consistent_and_invariant", measure_is_consistent_and_invariant),
    ("tolerance_propositions", tolerance_propositions),
    ("spectral_bands_account_for_the_total", spectral_bands_account_for_the_total),
];
