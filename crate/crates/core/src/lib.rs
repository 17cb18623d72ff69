//! Titchmarsh-Weyl-Sims theory for `-(p y')' + q y = lambda w y` with complex
//! coefficients: numerical-range geometry, nested Weyl disks, the m-function and
//! its continuation, Case I/II/III classification, and resolvent checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accel;
pub mod classify;
pub mod error;
pub mod mextend;
pub mod odecore;
pub mod problem;
pub mod rangegeom;
pub mod resolventops;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use odecore::{integrate_pair, lagrange_bracket, SolutionFrame};
pub use problem::{
    evaluate, make_power_law, make_schedule, CoefficientProblem, FamilyTag, Interval, PowerLawParams,
    TruncationSchedule,
};
pub use weyl::{limit_disk, limit_with_frames, weyl_disk, LimitKind, LimitResult, WeylDisk};
pub use classify::{asymptotic_classify, sims_classify_numeric, Case, SimsCase};
pub use mextend::{
    alpha_transform, complex_gamma, continue_m, continue_m_case1, free_m, m_difference_residual, oscillator_m_closed_form,
    pole_scan, MRoute, MSample, PoleRecord, Rect,
};
pub use resolventops::{extend_m_resolvent, Resolvent, ResolventReport};
