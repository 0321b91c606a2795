//! Fixtures shared by the benchmarks.

use restrictlab_core::{build_parabola, erase, make_ring, random_instance, Amplitudes, ParabolaSet, RecoveryProblem};

pub fn parabola(n: u64) -> ParabolaSet {
    build_parabola(&make_ring(n).expect("modulus >= 2"))
}

/// A recovery instance with `support` Gaussian entries and the whole
/// parabola unobserved.
pub fn recovery_instance(n: u64, support: usize, trial: u64) -> RecoveryProblem {
    let sigma = parabola(n);
    let f = random_instance(sigma.ring(), support, trial, 1, Amplitudes::Gaussian);
    erase(&f, sigma.points())
}
