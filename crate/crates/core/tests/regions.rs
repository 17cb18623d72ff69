mod support;

use std::f64::consts::PI;

use sims_core::rangegeom::{build_default_region, q_alpha_member, ProbeConfig};
use sims_core::Complex64 as C;
use support::{figure_problem, figure_q, figure_q_alpha};

fn probes() -> Vec<C> {
    let mut v = vec![];
    for i in 0..15 {
        for j in 0..15 {
            v.push(C::new(-6.0 + i as f64 * 0.83, -9.0 + j as f64 * 0.97));
        }
    }
    v
}

#[test]
fn figure_regions_match_hand_derived_q() {
    for fig in 1..=3 {
        let r = build_default_region(&figure_problem(fig)).unwrap();
        for z in probes() {
            let m = figure_q(fig, z);
            if m.abs() > 0.05 {
                assert_eq!(r.contains_q(z), m > 0.0, "fig {fig} z {z}");
            }
        }
    }
}

#[test]
fn figure_q_alpha_tables() {
    let alphas = [-3.0, -2.0, -PI / 2.0, -1.0, -0.3, 0.0, 0.4, 1.2, PI / 2.0, 2.0, 2.8, PI];
    for fig in 1..=3 {
        let r = build_default_region(&figure_problem(fig)).unwrap();
        for &a in &alphas {
            for z in probes() {
                let m = figure_q_alpha(fig, a, z);
                if m.abs() > 0.05 {
                    let got = q_alpha_member(&r, C::new(a, 0.0), z, &ProbeConfig::default());
                    assert_eq!(got, m > 0.0, "fig {fig} alpha {a} z {z}");
                }
            }
        }
    }
}
