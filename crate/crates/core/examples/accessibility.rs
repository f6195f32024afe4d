//! Collapsed accessibility and periodic-orbit arithmeticity for the
//! Bernoulli system and the lattice counterexample.

use skewmix::skewprod::{collapsed_access_coverage, non_arithmeticity_probe, AccessParams};
use skewmix::systems::SystemPreset;

fn main() -> skewmix::Result<()> {
    for preset in [SystemPreset::BernoulliS1, SystemPreset::LatticeCounterexample] {
        let s = preset.build()?;
        let access = collapsed_access_coverage(&s.sft, &s.cocycle, AccessParams::default())?;
        let probe = non_arithmeticity_probe(&s.sft, &s.cocycle, 8)?;
        println!("{}", preset.name());
        println!(
            "  {} achievable sums in [0, 1], covering radius {:.3e}, longest cycle {}, {} states",
            access.achieved.len(),
            access.covering_radius,
            access.longest_needed,
            access.states_visited
        );
        println!(
            "  f_p/p spread {:.4} over {} orbits, coboundary plus constant: {}",
            probe.spread,
            probe.orbit_sums.len(),
            probe.cohomologous_to_constant
        );
        match probe.lattice {
            Some(l) => println!("  periodic sums lie in p*{} + {}Z", l.offset, l.r),
            None => println!("  no lattice found"),
        }
    }
    Ok(())
}
