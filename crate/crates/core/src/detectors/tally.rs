/// Arithmetic operation counts for one detector run.
///
/// Real-multiplication convention: a complex-by-complex multiply costs 4,
/// complex-by-real 2, real-by-real 1. Divisions are counted separately.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub complex_mults: u64,
    pub complex_real_mults: u64,
    pub real_mults: u64,
    pub divisions: u64,
}

impl Tally {
    pub fn real_multiplications(&self) -> u64 {
        4 * self.complex_mults + 2 * self.complex_real_mults + self.real_mults
    }

    pub fn merged(&self, other: &Tally) -> Tally {
        Tally {
            complex_mults: self.complex_mults + other.complex_mults,
            complex_real_mults: self.complex_real_mults + other.complex_real_mults,
            real_mults: self.real_mults + other.real_mults,
            divisions: self.divisions + other.divisions,
        }
    }
}

/// Operation counts split by phase: one-off matrix preparation (e.g. the
/// stair inverse), computing the initial estimate, and the iterations.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CostBreakdown {
    pub setup: Tally,
    pub init: Tally,
    pub iterations: Tally,
}

impl CostBreakdown {
    pub fn total(&self) -> Tally {
        self.setup.merged(&self.init).merged(&self.iterations)
    }
}
