//! Named base systems: a shift, a potential, its Gibbs data and a centered cocycle.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{rpf_eigendata, ruelle_matrix, Potential, RpfData, DEFAULT_TOL};
use crate::skewprod::{center, FiberCocycle};
use crate::symbolic::{RealTable, SftSpace};

/// A fully assembled skew-product system.
#[derive(Clone, Debug)]
pub struct System {
    pub name: String,
    pub sft: SftSpace,
    pub potential: Potential,
    pub rpf: RpfData,
    pub cocycle: FiberCocycle,
}

impl System {
    /// Computes Gibbs data at depth `m` and optionally centers the cocycle.
    pub fn assemble(
        name: &str,
        sft: SftSpace,
        potential: Potential,
        cocycle: RealTable,
        m: usize,
        center_cocycle: bool,
    ) -> Result<Self> {
        let m = m.max(cocycle.depth()).max(potential.depth()).max(1);
        let rpf = rpf_eigendata(&ruelle_matrix(&sft, &potential, m)?, DEFAULT_TOL)?;
        let mut cocycle = FiberCocycle::new(cocycle);
        if center_cocycle {
            cocycle = center(&cocycle, &rpf)?;
        }
        Ok(System { name: name.to_string(), sft, potential, rpf, cocycle })
    }

    /// State depth of the Gibbs data.
    pub fn depth(&self) -> usize {
        self.rpf.depth()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemPreset {
    BernoulliS1,
    GoldenMean,
    LatticeCounterexample,
}

impl SystemPreset {
    pub const ALL: [SystemPreset; 3] =
        [SystemPreset::BernoulliS1, SystemPreset::GoldenMean, SystemPreset::LatticeCounterexample];

    pub fn name(self) -> &'static str {
        match self {
            SystemPreset::BernoulliS1 => "bernoulli_s1",
            SystemPreset::GoldenMean => "golden_mean",
            SystemPreset::LatticeCounterexample => "lattice_counterexample",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SystemPreset::BernoulliS1 => {
                "Bernoulli(1/2) full 2-shift, theta = 0.5, f = c[x0 x1] with c = (1, -1, sqrt2, -sqrt2); non-lattice, sigma^2 = 3/2"
            }
            SystemPreset::GoldenMean => {
                "golden-mean shift with the Parry measure (u = 0), centered depth-2 cocycle (1, -sqrt2, sqrt3)"
            }
            SystemPreset::LatticeCounterexample => {
                "Bernoulli(1/2) full 2-shift with f = (1, -1, 1, -1) taking values in 2Z + 1; flagged non-accessible"
            }
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn build(self) -> Result<System> {
        self.build_at(2)
    }

    /// Builds the preset with Gibbs data at depth `m` (at least 2).
    pub fn build_at(self, m: usize) -> Result<System> {
        match self {
            SystemPreset::BernoulliS1 | SystemPreset::LatticeCounterexample => {
                let sft = SftSpace::full_shift(2, 0.5)?;
                let u = Potential::constant(sft.words(1)?, -(2f64.ln()));
                let c = if self == SystemPreset::BernoulliS1 {
                    [1.0, -1.0, SQRT_2, -SQRT_2]
                } else {
                    [1.0, -1.0, 1.0, -1.0]
                };
                let f = RealTable::new(sft.words(2)?, c.to_vec())?;
                System::assemble(self.name(), sft, u, f, m, false)
            }
            SystemPreset::GoldenMean => {
                let sft = SftSpace::golden_mean(0.5)?;
                let u = Potential::constant(sft.words(1)?, 0.0);
                let f = RealTable::new(sft.words(2)?, vec![1.0, -SQRT_2, 3f64.sqrt()])?;
                System::assemble(self.name(), sft, u, f, m, true)
            }
        }
    }
}

impl std::str::FromStr for SystemPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemPreset::from_name(s).ok_or_else(|| Error::InvalidArgument(format!("unknown system preset {s:?}")))
    }
}
