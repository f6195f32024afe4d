//! Contraction of powers of the twisted operator in the H-norm at low and
//! high frequencies, with `H` from a calibrated `C₀`.

use skewmix::systems::SystemPreset;
use skewmix::twisted::{calibrate_c0, standard_probes, worst_decay_profile, TwistedOperator};

fn main() -> skewmix::Result<()> {
    let s = SystemPreset::BernoulliS1.build()?;
    let m = s.depth();
    let xis = [0.05, 0.2, 1.0, 4.0];
    let cal = calibrate_c0(&s.rpf, &s.cocycle, &xis, &[m, m + 1], 100, 3)?;
    println!("C0 = {:.4} (worst at xi = {}, depth {})", cal.c0, cal.worst_xi, cal.worst_depth);
    for (k, &xi) in xis.iter().enumerate() {
        let op = TwistedOperator::new(&s.rpf, &s.cocycle, xi, m)?;
        let h = op.constants(cal.c0).h;
        let probes = standard_probes(op.space(), op.theta(), 8, k as u64);
        let p = worst_decay_profile(&op, &probes, h, 200)?;
        let rate = p.rate.map_or("-".to_string(), |r| format!("{r:.4}"));
        println!(
            "xi {xi:>5}: H = {h:.3}, w_10 = {:.3e}, w_50 = {:.3e}, rate {rate}, first below 1e-8 at {:?}",
            p.w[10],
            p.w[50],
            p.first_below(1e-8)
        );
    }
    Ok(())
}
