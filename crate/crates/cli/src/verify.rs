//! Built-in invariant suite behind `sims verify`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use sims_core::classify::{oscillator_params, ClassifyConfig};
use sims_core::mextend::{alpha_transform, disk_limit_sample, PoleRoute, ScanConfig, TruncatedCase1};
use sims_core::problem::{parse_problem, schedule_from_points};
use sims_core::rangegeom::{admissible_pair_alpha, build_default_region, check_pair, RotationPair};
use sims_core::resolventops::{extend_m_resolvent_report, random_bump, ResolventConfig};
use sims_core::weyl::{disk_trace, LimitConfig};
use sims_core::{
    asymptotic_classify, complex_gamma, continue_m, integrate_pair, limit_disk, m_difference_residual,
    make_schedule, oscillator_m_closed_form, pole_scan, sims_classify_numeric, Case, CoefficientProblem, Rect,
    Resolvent, TruncationSchedule,
};

use crate::config::Tolerances;
use crate::record::{Num, Records};

#[derive(Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub module: &'static str,
    pub pass: bool,
    pub value: Num,
    pub limit: Num,
    pub detail: String,
}

type Outcome = sims_core::Result<(f64, String)>;

/// A named check: `value <= limit` passes.
struct Check {
    module: &'static str,
    name: &'static str,
    limit: fn(&Tolerances) -> f64,
    run: fn(&Ctx) -> Outcome,
}

struct Ctx {
    tol: Tolerances,
    seed: u64,
}

impl Ctx {
    fn limit(&self) -> LimitConfig {
        self.tol.limit()
    }
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn pair(p: &CoefficientProblem, lambda: C) -> sims_core::Result<RotationPair> {
    admissible_pair_alpha(&build_default_region(p)?, lambda, p.alpha)
}

fn free() -> CoefficientProblem {
    CoefficientProblem::free(c(0.0, 0.0))
}

fn osc3() -> CoefficientProblem {
    CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, c(PI / 2.0, 0.0)).unwrap()
}

fn unit(p: &CoefficientProblem) -> TruncationSchedule {
    schedule_from_points(p.interval, (1..=6).map(|k| p.interval.a + k as f64).collect()).unwrap()
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

const CHECKS: &[Check] = &[
    Check {
        module: "problem",
        name: "problem.parse_round_trip",
        limit: |_| 0.0,
        run: |_| {
            let spec = parse_problem("family = oscillator\nc = 0+1i\nbeta = 2\nalpha = pi/2\n", None)?;
            let ok = spec.problem.alpha == c(PI / 2.0, 0.0) && spec.problem.interval.a == 0.0;
            let bad = parse_problem("family = oscillator\nbeta = 2\n", None).is_err();
            Ok((flag(ok && bad), "oscillator file parsed, missing key rejected".into()))
        },
    },
    Check {
        module: "rangegeom",
        name: "rangegeom.free_pair",
        limit: |_| 0.0,
        run: |_| {
            let p = free();
            let r = build_default_region(&p)?;
            let pr = admissible_pair_alpha(&r, c(0.0, 1.0), p.alpha)?;
            let ok = check_pair(&r, &pr, 1e-12) && r.contains_q(c(3.0, 0.0)) && !r.contains_q(c(-0.1, 0.0));
            Ok((flag(ok), format!("eta = {:.4}, K = {}, delta = {:.4}", pr.eta, pr.k, pr.delta)))
        },
    },
    Check {
        module: "odecore",
        name: "odecore.wronskian",
        limit: |t| t.wronskian,
        run: |ctx| {
            let mut worst = 0.0f64;
            for (p, lam) in [(free(), c(-1.0, 1.0)), (osc3(), c(0.0, 1.0)), (osc3(), c(-2.0, -1.0))] {
                let pr = pair(&p, lam)?;
                let xs: Vec<f64> = (1..=8).map(|k| p.interval.a + k as f64).collect();
                for f in integrate_pair(&p, lam, pr.eta, &xs, ctx.tol.integration)? {
                    worst = worst.max((f.wronskian() + 1.0).norm());
                }
            }
            Ok((worst, "max |[theta, phi] + 1| over 24 frames".into()))
        },
    },
    Check {
        module: "weyl",
        name: "weyl.free_limit_point",
        limit: |_| 1e-8,
        run: |ctx| {
            let p = free();
            let lam = c(0.0, 1.0);
            let s = make_schedule(p.interval, 2.0, 2.0, 6)?;
            let m = limit_disk(&p, &pair(&p, lam)?, lam, &s, &ctx.limit())?.m();
            Ok(((m - C::from_polar(1.0, -PI / 4.0)).norm(), format!("m(i) = {m}")))
        },
    },
    Check {
        module: "weyl",
        name: "weyl.disk_invariants",
        limit: |_| 0.0,
        run: |ctx| {
            let mut bad = 0usize;
            let mut disks = 0usize;
            for (p, lam) in [(free(), c(-1.0, -1.0)), (osc3(), c(-1.0, 1.0)), (osc3(), c(0.5, -2.0))] {
                let s = if p.interval.a == 0.0 { unit(&p) } else { make_schedule(p.interval, 2.0, 2.0, 6)? };
                let (_, ds) = disk_trace(&p, &pair(&p, lam)?, lam, &s, &ctx.limit())?;
                for d in &ds {
                    disks += 1;
                    bad += usize::from((d.log_radius - d.log_radius_boundary).abs() > ctx.tol.disk);
                    bad += usize::from(d.boundary_defect > ctx.tol.boundary * d.radius.max(1.0));
                }
            }
            Ok((bad as f64, format!("{disks} disks: nesting, strict decrease, radius formulas, boundary point")))
        },
    },
    Check {
        module: "classify",
        name: "classify.oscillator_table",
        limit: |_| 0.0,
        run: |ctx| {
            let lam = c(0.0, 1.0);
            let mut wrong = 0usize;
            for (cc, beta, want) in [
                (c(-1.0, 0.0), 1.0, Case::I),
                (c(-1.0, 0.0), 2.0, Case::I),
                (c(-1.0, 0.0), 3.0, Case::III),
                (C::from_polar(1.0, PI / 3.0), 2.0, Case::I),
            ] {
                let p = CoefficientProblem::oscillator(cc, beta, c(0.0, 0.0))?;
                let s = make_schedule(p.interval, 2.0, 2.0, 7)?;
                let cfg = ClassifyConfig { limit: ctx.limit(), ..ClassifyConfig::default() };
                let n = sims_classify_numeric(&p, &pair(&p, lam)?, lam, &s, &cfg)?.case;
                let a = asymptotic_classify(&oscillator_params(cc, beta), p.alpha, lam)?.case;
                wrong += usize::from(n != want) + usize::from(a != want);
            }
            Ok((wrong as f64, "c = -1 with beta = 1, 2, 3 and arg c = pi/3 with beta = 2, both routes".into()))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.gamma",
        limit: |_| 1e-12,
        run: |_| {
            let refs = [
                (c(0.5, 0.0), c(1.772_453_850_905_516, 0.0)),
                (c(3.7, 2.1), c(-1.859_825_295_966_519_6, 1.162_340_152_696_861_8)),
                (c(-2.5, 0.1), c(-0.896_507_701_199_758_8, -0.099_318_350_500_568_56)),
            ];
            let mut worst = 0.0f64;
            for (z, g) in refs {
                worst = worst.max((complex_gamma(z)? - g).norm() / g.norm());
            }
            Ok((worst, "relative error at three reference points".into()))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.oscillator_closed_form",
        limit: |_| 1e-6,
        run: |ctx| {
            let p = osc3();
            let s = unit(&p);
            let mut worst = 0.0f64;
            for lam in [c(-1.0, 1.0), c(0.0, -1.0), c(-3.0, 0.5)] {
                let m = limit_disk(&p, &pair(&p, lam)?, lam, &s, &ctx.limit())?.m();
                let e = oscillator_m_closed_form(C::from_polar(1.0, PI / 3.0), lam)?;
                worst = worst.max((m - e).norm() / e.norm());
            }
            Ok((worst, "disk limit vs Gamma ratio, relative".into()))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.difference_identity",
        limit: |_| 1e-5,
        run: |ctx| {
            let p = osc3();
            let lam = c(0.0, 1.0);
            let r = m_difference_residual(&p, &pair(&p, lam)?, lam, c(-1.0, 1.0), &unit(&p), &ctx.limit())?;
            Ok((r.residual, format!("m = {}, m' = {}", r.m, r.m_prime)))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.alpha_transform",
        limit: |_| 1e-6,
        run: |ctx| {
            let p = osc3();
            let s = unit(&p);
            let lam = c(-1.0, -1.0);
            let half = limit_disk(&p, &pair(&p, lam)?, lam, &s, &ctx.limit())?.m();
            let pa = p.with_alpha(c(PI / 4.0, 0.0));
            let direct = limit_disk(&pa, &pair(&pa, lam)?, lam, &s, &ctx.limit())?.m();
            Ok(((alpha_transform(half, pa.alpha)? - direct).norm(), "alpha = pi/4 at lambda = -1-i".into()))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.first_pole",
        limit: |_| 1e-4,
        run: |ctx| {
            let p = CoefficientProblem::oscillator(c(0.0, 1.0), 2.0, c(PI / 2.0, 0.0))?;
            let s = schedule_from_points(p.interval, vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0])?;
            let tc = TruncatedCase1::new(&p, 4.0, &s, &ctx.limit())?;
            let cfg = ScanConfig { tol: ctx.tol.scan, ..ScanConfig::default() };
            let found = pole_scan(&PoleRoute::Case1(&tc), Rect::new(-1.0, -1.0, 3.0, 3.0), &cfg)?;
            let want = C::from_polar(1.0, PI / 4.0);
            let err = match found.as_slice() {
                [only] if only.order == 1 => (only.location - want).norm(),
                _ => f64::INFINITY,
            };
            Ok((err, format!("{} pole(s) in [-1, 3]^2", found.len())))
        },
    },
    Check {
        module: "mextend",
        name: "mextend.case3_routes",
        limit: |_| 1e-5,
        run: |ctx| {
            let p = CoefficientProblem::oscillator(c(-1.0, 0.0), 3.0, c(0.0, 0.0))?;
            let s = make_schedule(p.interval, 2.0, 2.0, 7)?;
            let lp = c(0.0, 0.5);
            let anchor = disk_limit_sample(&p, &pair(&p, lp)?, lp, &s, &ctx.limit())?;
            let lam = c(-2.0, 0.3);
            let a = continue_m(&p, &anchor, lam, &s, &ctx.limit())?;
            let b = extend_m_resolvent_report(&p, &anchor, lam, &s, &ctx.limit())?;
            Ok(((a.m - b.sample.m).norm(), format!("[Psi, phi](a) = {}", b.bracket_phi)))
        },
    },
    Check {
        module: "resolventops",
        name: "resolventops.contract",
        limit: |_| 0.0,
        run: |ctx| {
            let p = free();
            let lam = c(0.0, 1.0);
            let s = make_schedule(p.interval, 4.0, 2.0, 5)?;
            let cfg = ResolventConfig { limit: ctx.limit(), ..ResolventConfig::default() };
            let r = Resolvent::new(&p, &pair(&p, lam)?, lam, &s, &cfg)?;
            let mut bad = 0usize;
            let mut ratio = 0.0f64;
            for k in 0..10 {
                let f = random_bump(ctx.seed.wrapping_add(k), 1.1, 4.1, 5);
                let rep = r.check(&|x| f.eval(x), 4.1)?;
                ratio = ratio.max(rep.bound_ratio);
                bad += usize::from(
                    rep.bound_ratio > 1.0 || rep.residual_ode > 1e-6 || rep.bc_residual > 1e-8 || rep.energy_check < 0.0,
                );
            }
            Ok((bad as f64, format!("10 bumps, max bound ratio {ratio:.3}")))
        },
    },
];

pub fn module_names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = CHECKS.iter().map(|c| c.module).collect();
    v.dedup();
    v
}

/// Runs the checks selected by `filter` (a module name or a check-name prefix).
/// Returns the number of failures; `None` when the filter selects nothing.
pub fn run(tol: &Tolerances, seed: u64, filter: Option<&str>, out: &mut Records) -> Option<usize> {
    let ctx = Ctx { tol: *tol, seed };
    let selected: Vec<&Check> =
        CHECKS.iter().filter(|c| filter.is_none_or(|f| c.module == f || c.name.starts_with(f))).collect();
    if selected.is_empty() {
        return None;
    }
    let mut failures = 0;
    for ch in selected {
        let limit = (ch.limit)(tol);
        let rec = match (ch.run)(&ctx) {
            Ok((value, detail)) => {
                let pass = value <= limit;
                CheckRecord { check: ch.name.into(), module: ch.module, pass, value: Num(value), limit: Num(limit), detail }
            }
            Err(e) => CheckRecord {
                check: ch.name.into(),
                module: ch.module,
                pass: false,
                value: Num(f64::NAN),
                limit: Num(limit),
                detail: e.to_string(),
            },
        };
        failures += usize::from(!rec.pass);
        out.push(&rec);
    }
    Some(failures)
}
