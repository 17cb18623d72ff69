//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use sims_core::Complex64 as C;
use sims_core::{make_power_law, CoefficientProblem, PowerLawParams};

/// The three illustrated configurations: `p = e^{i phi}`, `q = -x - i x^2`, `w = 1`.
pub fn figure_problem(fig: usize) -> CoefficientProblem {
    let phi = match fig {
        1 => PI / 4.0,
        2 => -PI / 4.0,
        _ => PI / 2.0,
    };
    make_power_law(PowerLawParams::with_phase(phi, -1.0, -1.0, 1.0, 2.0, 0.0), C::new(0.0, 0.0)).unwrap()
}

/// Hand-derived membership in `Q` for the figure configurations, with a signed
/// margin (positive inside).
pub fn figure_q(fig: usize, z: C) -> f64 {
    let (u, v) = (z.re, z.im);
    let below_parabola = -u * u - v;
    match fig {
        1 => {
            if u >= -1.0 {
                (u - v) / 2f64.sqrt()
            } else {
                below_parabola.min(u - v)
            }
        }
        2 => {
            if u >= -1.0 {
                (-u - 2.0 - v) / 2f64.sqrt()
            } else {
                below_parabola
            }
        }
        _ => -1.0 - u,
    }
}

/// Expected `Q(alpha)` from the published tables, as a signed margin.
pub fn figure_q_alpha(fig: usize, alpha: f64, z: C) -> f64 {
    let s = (2.0 * alpha).sin();
    let zero = s.abs() < 1e-12;
    let (u, v) = (z.re, z.im);
    match fig {
        1 => {
            if zero || s < 0.0 {
                figure_q(1, z)
            } else {
                f64::INFINITY
            }
        }
        2 => {
            if zero {
                figure_q(2, z)
            } else if s < 0.0 {
                if u >= -1.0 {
                    -1.0 - v
                } else {
                    (-u * u - v).min(-1.0 - v)
                }
            } else {
                let lower = -1.0 - v;
                let side = if u <= -1.0 { (-1.0 - u).max(-u - 2.0 - v) } else { (-u - 2.0 - v) / 2f64.sqrt() };
                lower.min(side.max(-1.0 - u))
            }
        }
        _ => {
            if zero || s > 0.0 {
                figure_q(3, z)
            } else {
                f64::INFINITY
            }
        }
    }
}
