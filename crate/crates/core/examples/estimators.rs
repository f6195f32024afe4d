//! The three covariance estimators side by side for a cosine global
//! observable against a Gaussian bump.

use skewmix::correlate::{cov_direct, cov_exact, spectral_series, SpectralParams, DEFAULT_EXACT_BUDGET};
use skewmix::observables::{GlobalObservable, LocalObservable};
use skewmix::systems::SystemPreset;

fn main() -> skewmix::Result<()> {
    let s = SystemPreset::BernoulliS1.build()?;
    let phi = GlobalObservable::cosine(&s.sft, 1.0, 1.0)?;
    let psi = LocalObservable::gaussian_bump(&s.sft)?;
    let ns = [0, 1, 2, 4, 8, 12];
    let (spectral, warnings) = spectral_series(&s.rpf, &s.cocycle, &phi, &psi, &ns, SpectralParams::default())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("{:>4} {:>14} {:>14} {:>14} {:>10}", "n", "exact", "spectral", "direct", "stderr");
    for (i, &n) in ns.iter().enumerate() {
        let exact = cov_exact(&s.rpf, &s.cocycle, &phi, &psi, n, DEFAULT_EXACT_BUDGET)?;
        let direct = cov_direct(&s.rpf, &s.cocycle, &phi, &psi, n, 20_000, n as u64)?;
        println!(
            "{n:>4} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.2e}",
            exact.re, spectral.cov[i].re, direct.value.re, direct.stderr
        );
    }
    Ok(())
}
