use num_complex::Complex64 as C;
use serde::Serialize;

use sims_core::classify::{asymptotic_classify_with, ClassifyConfig};
use sims_core::mextend::{disk_limit_sample, PoleRoute, TruncatedCase1};
use sims_core::problem::{parse_complex, parse_real, schedule_from_points};
use sims_core::rangegeom::{admissible_pair_alpha, build_default_region, q_alpha_member, Cone, ProbeConfig, RotationPair};
use sims_core::resolventops::{random_bump, ResolventConfig, SampledFunction};
use sims_core::weyl::{disk_trace, LimitKind};
use sims_core::{
    continue_m, continue_m_case1, limit_disk, pole_scan, sims_classify_numeric, CoefficientProblem, FamilyTag,
    MRoute, MSample, Resolvent, TruncationSchedule,
};

use crate::config::RunConfig;
use crate::record::{cxs, Cx, Num, Records};
use crate::Failure;

fn pair_at(problem: &CoefficientProblem, lambda: C) -> Result<RotationPair, Failure> {
    let region = build_default_region(problem)?;
    Ok(admissible_pair_alpha(&region, lambda, problem.alpha)?)
}

fn route_name(r: MRoute) -> &'static str {
    match r {
        MRoute::DiskLimit => "disk-limit",
        MRoute::TruncatedContinuation => "continue-case1",
        MRoute::Continuation => "continue",
        MRoute::ResolventExtend => "resolvent-extend",
        MRoute::ClosedForm => "closed-form",
    }
}

#[derive(Serialize)]
struct RegionRecord {
    vertices: Vec<Cx>,
    recession_directions: Vec<Cx>,
    cone: &'static str,
}

#[derive(Serialize)]
struct PairRecord {
    lambda: Cx,
    in_q: bool,
    in_q_alpha: bool,
    admissible: bool,
    eta: Option<Num>,
    k: Option<Cx>,
    delta: Option<Num>,
}

pub fn region(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, _) = cfg.problem()?;
    let region = build_default_region(&problem)?;
    let cone = match region.cone {
        Cone::Zero => "zero",
        Cone::Wedge { .. } => "wedge",
        Cone::HalfPlane { .. } => "half-plane",
        Cone::Line { .. } => "line",
        Cone::Plane => "plane",
    };
    out.push(&RegionRecord {
        vertices: cxs(&region.vertices),
        recession_directions: cxs(&region.recession_directions),
        cone,
    });
    if cfg.lambda.is_some() {
        let lambda = cfg.lambda()?;
        let pair = admissible_pair_alpha(&region, lambda, problem.alpha).ok();
        out.push(&PairRecord {
            lambda: Cx(lambda),
            in_q: region.contains_q(lambda),
            in_q_alpha: q_alpha_member(&region, problem.alpha, lambda, &ProbeConfig::default()),
            admissible: pair.is_some(),
            eta: pair.map(|p| Num(p.eta)),
            k: pair.map(|p| Cx(p.k)),
            delta: pair.map(|p| Num(p.delta)),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRecord {
    case: String,
    lambda: Cx,
    route: &'static str,
    eta: Num,
    k: Cx,
    rho_limit: Num,
    theta_l2w: Num,
    phi_l2w: Num,
    psi_energy: Num,
    asymptotic_case: Option<String>,
    routes_agree: Option<bool>,
}

pub fn classify(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, schedule) = cfg.problem()?;
    let lambda = cfg.lambda()?;
    let pair = pair_at(&problem, lambda)?;
    let ccfg = ClassifyConfig { limit: cfg.tol.limit(), ..ClassifyConfig::default() };
    let numeric = sims_classify_numeric(&problem, &pair, lambda, &schedule, &ccfg)?;
    let params = match &problem.family_tag {
        FamilyTag::PowerLaw(p) => Some(*p),
        FamilyTag::OscillatorSector { c, beta } => Some(sims_core::classify::oscillator_params(*c, *beta)),
        _ => None,
    };
    let asym = params.map(|p| asymptotic_classify_with(&p, &pair, lambda, 1e-6)).transpose()?;
    let ev = numeric.evidence.expect("numeric route records evidence");
    let agree = asym.as_ref().map(|a| a.case == numeric.case);
    out.push(&ClassifyRecord {
        case: numeric.case.to_string(),
        lambda: Cx(lambda),
        route: "numeric",
        eta: Num(numeric.eta),
        k: Cx(numeric.k),
        rho_limit: Num(ev.rho_limit),
        theta_l2w: Num(ev.theta_l2w.unwrap_or(f64::INFINITY)),
        phi_l2w: Num(ev.phi_l2w.unwrap_or(f64::INFINITY)),
        psi_energy: Num(ev.psi_energy),
        asymptotic_case: asym.map(|a| a.case.to_string()),
        routes_agree: agree,
    });
    if agree == Some(false) {
        return Err(Failure::Numeric("numeric and asymptotic classifications disagree".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct MRecord {
    lambda: Cx,
    m: Cx,
    error_bound: Num,
    route: &'static str,
    eta: Num,
    k: Cx,
    kind: Option<&'static str>,
    radius: Option<Num>,
}

fn m_record(s: &MSample, kind: Option<&'static str>, radius: Option<f64>) -> MRecord {
    MRecord {
        lambda: Cx(s.lambda),
        m: Cx(s.m),
        error_bound: Num(s.error_bound),
        route: route_name(s.route),
        eta: Num(s.eta),
        k: Cx(s.k),
        kind,
        radius: radius.map(Num),
    }
}

/// Disk limit when `lambda` is admissible; otherwise continuation through
/// `--cut` (Case I) or from `--anchor`.
pub fn m_eval(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, schedule) = cfg.problem()?;
    let lambda = cfg.lambda()?;
    let lcfg = cfg.tol.limit();
    if let Some(c) = cfg.cut {
        let sch = case1_schedule(&problem, c, cfg)?;
        out.push(&m_record(&continue_m_case1(&problem, c, lambda, &sch, &lcfg)?, None, None));
        return Ok(());
    }
    if let Some(lp) = cfg.anchor()? {
        let anchor = disk_limit_sample(&problem, &pair_at(&problem, lp)?, lp, &schedule, &lcfg)?;
        out.push(&m_record(&anchor, None, None));
        out.push(&m_record(&continue_m(&problem, &anchor, lambda, &schedule, &lcfg)?, None, None));
        return Ok(());
    }
    let pair = pair_at(&problem, lambda)?;
    let r = limit_disk(&problem, &pair, lambda, &schedule, &lcfg)?;
    let (kind, radius) = match r.kind {
        LimitKind::LimitPoint { .. } => ("limit-point", 0.0),
        LimitKind::LimitCircle { disk } => ("limit-circle", disk.radius),
    };
    let s = MSample {
        lambda,
        m: r.m(),
        eta: pair.eta,
        k: pair.k,
        error_bound: r.error_bound,
        route: MRoute::DiskLimit,
        denominator: None,
    };
    out.push(&m_record(&s, Some(kind), Some(radius)));
    Ok(())
}

#[derive(Serialize)]
struct DiskRecord {
    x: Num,
    center: Cx,
    radius: Num,
    radius_boundary: Num,
    log_radius: Num,
    boundary_defect: Num,
}

pub fn disk_trace_cmd(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, schedule) = cfg.problem()?;
    let lambda = cfg.lambda()?;
    let pair = pair_at(&problem, lambda)?;
    let (_, disks) = disk_trace(&problem, &pair, lambda, &schedule, &cfg.tol.limit())?;
    for d in disks {
        out.push(&DiskRecord {
            x: Num(d.x),
            center: Cx(d.center),
            radius: Num(d.radius),
            radius_boundary: Num(d.radius_boundary),
            log_radius: Num(d.log_radius),
            boundary_defect: Num(d.boundary_defect),
        });
    }
    Ok(())
}

/// Schedule beyond the cut: `--schedule` when given, else `c + 1, ..., c + 6`.
fn case1_schedule(problem: &CoefficientProblem, c: f64, cfg: &RunConfig) -> Result<TruncationSchedule, Failure> {
    match &cfg.schedule {
        Some(s) => crate::config::parse_schedule(problem, s),
        None => Ok(schedule_from_points(problem.interval, (1..=6).map(|k| c + k as f64).collect())?),
    }
}

#[derive(Serialize)]
struct PoleOut {
    location: Cx,
    order: u32,
    residual: Num,
}

pub fn poles(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, schedule) = cfg.problem()?;
    let rect = cfg.rect()?;
    let lcfg = cfg.tol.limit();
    let mut found = match cfg.anchor()? {
        Some(lp) => {
            let anchor = disk_limit_sample(&problem, &pair_at(&problem, lp)?, lp, &schedule, &lcfg)?;
            let route = PoleRoute::Continuation { problem: &problem, anchor, schedule: &schedule, cfg: lcfg };
            pole_scan(&route, rect, &cfg.scan())?
        }
        None => {
            let c = cfg.cut.unwrap_or(problem.interval.a + 4.0);
            let sch = case1_schedule(&problem, c, cfg)?;
            let tc = TruncatedCase1::new(&problem, c, &sch, &lcfg)?;
            pole_scan(&PoleRoute::Case1(&tc), rect, &cfg.scan())?
        }
    };
    found.sort_by(|a, b| {
        (a.location.re, a.location.im).partial_cmp(&(b.location.re, b.location.im)).unwrap_or(std::cmp::Ordering::Equal)
    });
    for p in found {
        out.push(&PoleOut { location: Cx(p.location), order: p.order, residual: Num(p.residual) });
    }
    Ok(())
}

#[derive(Serialize)]
struct ResolventRecord {
    index: usize,
    source: String,
    f_norm: Num,
    phi_norm: Num,
    bound_ratio: Num,
    residual_ode: Num,
    bc_residual: Num,
    energy_check: Num,
}

#[derive(Serialize)]
struct ResolventSummary {
    count: usize,
    max_bound_ratio: Num,
    max_residual_ode: Num,
    max_bc_residual: Num,
    min_energy_check: Num,
}

/// Two whitespace-separated columns per line: `x` and `re+imi`.
pub fn parse_samples(text: &str) -> Result<SampledFunction, Failure> {
    let (mut x, mut v) = (Vec::new(), Vec::new());
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Failure::Input(format!("samples line {}: expected 2 columns", n + 1)));
        }
        x.push(parse_real(cols[0])?);
        v.push(parse_complex(cols[1])?);
    }
    Ok(SampledFunction::new(x, v)?)
}

pub fn resolvent_check(cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    let (problem, schedule) = cfg.problem()?;
    let lambda = cfg.lambda()?;
    let pair = pair_at(&problem, lambda)?;
    let rcfg = ResolventConfig { limit: cfg.tol.limit(), ..ResolventConfig::default() };
    let r = Resolvent::new(&problem, &pair, lambda, &schedule, &rcfg)?;
    let a = problem.interval.a;
    let mut reports = Vec::new();
    match &cfg.samples {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            let f = parse_samples(&text)?;
            reports.push((path.display().to_string(), r.check(&|x| f.eval(x), f.support_end())?));
        }
        None => {
            for k in 0..cfg.count {
                let seed = cfg.seed.wrapping_add(k as u64);
                let f = random_bump(seed, a + 0.1, a + 3.1, 5);
                reports.push((format!("bump seed {seed}"), r.check(&|x| f.eval(x), a + 3.1)?));
            }
        }
    }
    let mut s = ResolventSummary {
        count: reports.len(),
        max_bound_ratio: Num(0.0),
        max_residual_ode: Num(0.0),
        max_bc_residual: Num(0.0),
        min_energy_check: Num(f64::INFINITY),
    };
    for (index, (source, rep)) in reports.into_iter().enumerate() {
        s.max_bound_ratio.0 = s.max_bound_ratio.0.max(rep.bound_ratio);
        s.max_residual_ode.0 = s.max_residual_ode.0.max(rep.residual_ode);
        s.max_bc_residual.0 = s.max_bc_residual.0.max(rep.bc_residual);
        s.min_energy_check.0 = s.min_energy_check.0.min(rep.energy_check);
        out.push(&ResolventRecord {
            index,
            source,
            f_norm: Num(rep.f_norm),
            phi_norm: Num(rep.phi_norm),
            bound_ratio: Num(rep.bound_ratio),
            residual_ode: Num(rep.residual_ode),
            bc_residual: Num(rep.bc_residual),
            energy_check: Num(rep.energy_check),
        });
    }
    out.push(&s);
    Ok(())
}
