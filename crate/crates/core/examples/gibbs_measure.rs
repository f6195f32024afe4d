//! Ruelle–Perron–Frobenius data on the golden-mean shift: eigenvalue,
//! cylinder measures, spectral gap and the lower ball bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewmix::gibbs::{gibbs_ball_fit, sample_orbit, spectral_gap_fit};
use skewmix::symbolic::RealTable;
use skewmix::systems::SystemPreset;

fn main() -> skewmix::Result<()> {
    let s = SystemPreset::GoldenMean.build()?;
    let rpf = &s.rpf;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    println!("lambda {:.12} (golden ratio {golden:.12})", rpf.lambda());
    println!("residual {:.1e}, normalization defect {:.1e}", rpf.residual(), rpf.normalization_defect());
    for w in [&[0u8][..], &[1], &[0, 0], &[0, 1], &[1, 0]] {
        println!("mu{w:?} = {:.10}", rpf.cylinder_measure(w)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let probes: Vec<RealTable> =
        (0..8).map(|_| RealTable::from_fn(rpf.space().clone(), |_| rng.gen_range(-1.0..1.0))).collect();
    let gap = spectral_gap_fit(rpf, &probes, 40)?;
    println!("gap fit: C = {:.3}, delta = {:.4}", gap.c, gap.delta);

    let radii: Vec<f64> = (0..8).map(|j| rpf.theta().powi(j)).collect();
    let ball = gibbs_ball_fit(rpf, &radii)?;
    println!("ball fit: mu(B(x,r)) >= {:.3} r^{:.3}", ball.c_u, ball.d);

    let orbit = sample_orbit(&rpf.chain()?, 40, 7)?;
    let text: String = orbit.iter().map(|a| char::from(b'0' + a)).collect();
    println!("sampled word {text}");
    Ok(())
}
