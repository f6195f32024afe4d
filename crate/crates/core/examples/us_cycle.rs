//! Finds a cycle of stable pairs whose phase beats the summed tolerances and
//! checks that random nice functions meet a cancellation pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewmix::systems::SystemPreset;
use skewmix::twisted::{
    calibrate_c0, cancellation_pair_check, find_us_cycle, sample_nice, CycleParams, TwistedOperator,
};

fn main() -> skewmix::Result<()> {
    let s = SystemPreset::BernoulliS1.build()?;
    let xi = 1.0;
    let m = s.depth();
    let c0 = calibrate_c0(&s.rpf, &s.cocycle, &[xi], &[m, m + 1], 100, 2)?.c0;
    let h = TwistedOperator::new(&s.rpf, &s.cocycle, xi, m)?.constants(c0).h;
    let params = CycleParams::default();
    let op = TwistedOperator::new(&s.rpf, &s.cocycle, xi, params.n + m)?;
    let cycle = find_us_cycle(&op, h, params)?;
    cycle.verify(&op)?;
    println!("H = {h:.3}, epsilon = {:.3e}", cycle.epsilon);
    for (i, p) in cycle.pairs.iter().enumerate() {
        println!(
            "pair {i}: {} / {}  phase {:+.4}  stable tol {:.2e}  unstable tol {:.2e}",
            p.x, p.y, p.phase, cycle.stable_tols[i], cycle.unstable_tols[i]
        );
    }
    println!("cycle phase {:.4}, tolerance {:.4}, margin {:.4}", cycle.phase, cycle.tolerance, cycle.margin);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 50;
    let mut hits = 0;
    for _ in 0..draws {
        let v = sample_nice(&op, cycle.epsilon, h, &mut rng)?;
        let mut hit = false;
        for p in &cycle.pairs {
            hit |= cancellation_pair_check(p, &v, &op, cycle.epsilon, h)?.is_cancellation;
        }
        hits += hit as usize;
    }
    println!("{hits}/{draws} nice functions hit a cancellation pair");
    Ok(())
}
