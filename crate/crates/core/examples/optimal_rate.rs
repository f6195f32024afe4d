//! Correlation decay for `Φ(r) = 1/(1+|r|)` against a mollified indicator on
//! the Bernoulli system, with the fitted log-log exponent.

use skewmix::correlate::{rate_fit, spectral_series, SpectralParams};
use skewmix::observables::{GlobalObservable, LocalObservable};
use skewmix::systems::SystemPreset;

fn main() -> skewmix::error::Result<()> {
    let s = SystemPreset::BernoulliS1.build()?;
    let phi = GlobalObservable::inverse_abs(&s.sft)?;
    let psi = LocalObservable::mollified_indicator(&s.sft)?;
    let ns: Vec<usize> = (0..=12).map(|j| (16.0 * 2f64.powf(j as f64 / 2.0)).round() as usize).collect();
    let (series, warnings) = spectral_series(&s.rpf, &s.cocycle, &phi, &psi, &ns, SpectralParams::default())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("{:>6} {:>14} {:>12} {:>12}", "n", "cov", "err", "cov*sqrt(n)");
    for i in 0..series.len() {
        let n = series.n[i] as f64;
        println!(
            "{:>6} {:>14.6e} {:>12.3e} {:>12.6}",
            series.n[i],
            series.cov[i].re,
            series.err[i],
            series.cov[i].re * n.sqrt()
        );
    }
    let fit = rate_fit(&series, (16, 1024), &[])?;
    println!("exponent {:.4} (95% CI {:.4} .. {:.4})", fit.exponent, fit.ci.0, fit.ci.1);
    Ok(())
}
