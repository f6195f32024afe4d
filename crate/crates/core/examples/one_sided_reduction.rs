//! Reduces a two-sided cocycle depending on `x_{-1} x_0 x_1` to a
//! cohomologous one-sided cocycle and checks the transfer function.

use skewmix::skewprod::{reduce_to_one_sided, TwoSidedCocycle};
use skewmix::symbolic::RealTable;
use skewmix::systems::SystemPreset;

fn main() -> skewmix::Result<()> {
    let sft = SystemPreset::GoldenMean.build()?.sft;
    let space = sft.words(3)?;
    let table = RealTable::from_fn(space, |w| {
        let s = w.symbols();
        s[0] as f64 - 0.5 * s[1] as f64 + 2.0 * s[2] as f64
    });
    let f2 = TwoSidedCocycle::new(1, table)?;
    let red = reduce_to_one_sided(&sft, &f2)?;
    println!("one-sided cocycle on depth-{} words:", red.f_plus.depth());
    for (w, v) in red.f_plus.table().space().words().iter().zip(red.f_plus.table().values()) {
        println!("  f+({w}) = {v:+.4}");
    }
    println!("transfer function offset {}, depth {}", red.h.offset, red.h.table.depth());
    println!("max defect {:.1e}", red.max_defect(&sft, &f2)?);
    Ok(())
}
