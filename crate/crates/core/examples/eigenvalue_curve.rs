//! Leading eigenvalue of the twisted operator near zero frequency, compared
//! with the Green–Kubo variance.

use skewmix::systems::SystemPreset;
use skewmix::twisted::{spectral_curve, CurveParams};

fn main() -> skewmix::Result<()> {
    let s = SystemPreset::BernoulliS1.build()?;
    let grid: Vec<f64> = (-25..=25).map(|k| k as f64 * 0.01).collect();
    let curve = spectral_curve(&s.rpf, &s.cocycle, &grid, CurveParams::default())?;
    println!("{:>6} {:>14} {:>14} {:>12}", "xi", "re lambda", "1-s2 xi^2/2", "im lambda");
    for (xi, l) in curve.xi.iter().zip(&curve.lambda).step_by(5) {
        println!("{xi:>6.2} {:>14.10} {:>14.10} {:>12.2e}", l.re, 1.0 - curve.sigma2 * xi * xi / 2.0, l.im);
    }
    println!("-lambda''(0) = {:.6}, Green-Kubo sigma^2 = {:.6}", -curve.curvature, curve.sigma2);
    println!(
        "A_kappa = {:.4}, cubic constants B_kappa = {:.4}, B_sigma = {:.4}",
        curve.a_kappa(),
        curve.b_kappa,
        curve.b_sigma
    );
    if let Some(x) = curve.crossing {
        println!("eigenvalue crossing at xi = {x}");
    }
    Ok(())
}
