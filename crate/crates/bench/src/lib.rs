//! Benchmark fixtures for `sims-core` kernels.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use sims_core::problem::schedule_from_points;
use sims_core::rangegeom::{admissible_pair_alpha, build_default_region, RotationPair};
use sims_core::{CoefficientProblem, TruncationSchedule};

/// `-y'' + e^{i pi/3} x^2 y` with Neumann data at 0.
pub fn sector_oscillator() -> CoefficientProblem {
    CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, C::new(PI / 2.0, 0.0)).unwrap()
}

pub fn unit_schedule(p: &CoefficientProblem, n: usize) -> TruncationSchedule {
    schedule_from_points(p.interval, (1..=n).map(|k| p.interval.a + k as f64).collect()).unwrap()
}

pub fn pair(p: &CoefficientProblem, lambda: C) -> RotationPair {
    admissible_pair_alpha(&build_default_region(p).unwrap(), lambda, p.alpha).unwrap()
}
