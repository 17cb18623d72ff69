//! Nested Weyl disks `D_X(lambda)` on a half-plane `Lambda_{eta,K}` and their limit:
//! a point `m(lambda)` or a circle.

use num_complex::Complex64;

use crate::accel::{line_fit, prefix_limits, tail_test_with_floor, wynn, wynn_real, TailVerdict};
use crate::error::{Error, Result};
use crate::odecore::{integrate_pair, SolutionFrame};
use crate::problem::{CoefficientProblem, TruncationSchedule};
use crate::rangegeom::RotationPair;

type C = Complex64;

/// Disk at truncation point `x`. `radius` is the integral form; `radius_boundary`
/// the boundary-term form of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylDisk {
    pub x: f64,
    pub lambda: C,
    pub center: C,
    pub radius: f64,
    pub radius_boundary: f64,
    /// `ln radius`, finite even when `radius` underflows.
    pub log_radius: f64,
    pub log_radius_boundary: f64,
    /// `(mu + center) exp(log_scale - chi_log_scale)`, computed without cancellation.
    pub center_nu_chi: C,
    /// `| |l_X(0) - center| - radius |`, the distance of the image of `z = 0` from the circle.
    pub boundary_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKind {
    LimitPoint { m: C },
    LimitCircle { disk: WeylDisk },
}

/// Least-squares fits of `log rho` against `X` and against `log X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponential_rate: f64,
    pub exponential_rms: f64,
    pub algebraic_rate: f64,
    pub algebraic_rms: f64,
    pub extrapolated_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitResult {
    pub kind: LimitKind,
    pub radius_trace: Vec<(f64, f64)>,
    pub m_trace: Vec<(f64, C)>,
    pub disks: Vec<WeylDisk>,
    pub eta: f64,
    pub k: C,
    pub error_bound: f64,
    pub decay: DecayFit,
}

impl LimitResult {
    /// The limit point, or the (extrapolated) centre of the limit circle.
    pub fn m(&self) -> C {
        match self.kind {
            LimitKind::LimitPoint { m } => m,
            LimitKind::LimitCircle { disk } => disk.center,
        }
    }

    pub fn is_limit_point(&self) -> bool {
        matches!(self.kind, LimitKind::LimitPoint { .. })
    }

    /// A point on the limit circle, `center + radius e^{i angle}`.
    pub fn circle_point(&self, angle: f64) -> Option<C> {
        match self.kind {
            LimitKind::LimitCircle { disk } => Some(disk.center + C::from_polar(disk.radius, angle)),
            LimitKind::LimitPoint { .. } => None,
        }
    }
}

/// Tolerances for disk construction and the limit decision.
#[derive(Debug, Clone, Copy)]
pub struct LimitConfig {
    pub ode_tol: f64,
    pub disk_tol: f64,
    pub nest_tol: f64,
    pub boundary_tol: f64,
    pub limit_point_threshold: f64,
    pub plateau_tol: f64,
    pub tail_factor: f64,
    pub tail_sustain: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            disk_tol: 1e-6,
            nest_tol: 1e-8,
            boundary_tol: 1e-8,
            limit_point_threshold: 1e-8,
            plateau_tol: 1e-4,
            tail_factor: 0.9,
            tail_sustain: 4,
        }
    }
}

/// `l_X(lambda, z) = -(theta z + p theta') / (phi z + p phi')`.
pub fn mobius_l(frame: &SolutionFrame, z: C) -> Result<C> {
    let den = frame.phi * z + frame.p_dphi;
    if den.norm() == 0.0 {
        return Err(Error::input("z at the pole of the map"));
    }
    Ok(-(frame.theta * z + frame.p_dtheta) / den)
}

/// `z_X(lambda, l) = -(p phi' l + p theta') / (phi l + theta)`.
pub fn mobius_z(frame: &SolutionFrame, l: C) -> Result<C> {
    let den = frame.phi * l + frame.theta;
    if den.norm() == 0.0 {
        return Err(Error::input("l at the pole of the map"));
    }
    Ok(-(frame.p_dphi * l + frame.p_dtheta) / den)
}

/// `-Re[e^{i eta}(sin a - l cos a)(conj(cos a) + conj(l sin a))]`.
pub fn a_functional(alpha: C, eta: f64, l: C) -> f64 {
    let (s, c) = (alpha.sin(), alpha.cos());
    -(C::from_polar(1.0, eta) * (s - l * c) * (c.conj() + (l * s).conj())).re
}

/// Disk from an integrated frame; checks the two radius formulas against each other.
pub fn disk_from_frame(frame: &SolutionFrame, alpha: C, cfg: &LimitConfig) -> Result<WeylDisk> {
    let rot = C::from_polar(1.0, frame.eta);
    let rb = (rot * frame.p_dphi * frame.phi.conj()).re;
    let two_l = 2.0 * frame.log_scale;
    let ra = -(rot * alpha.cos() * alpha.sin().conj()).re;
    let denom_scaled = ra * (-two_l).exp() + frame.energy_phi;
    if !(rb > 0.0) || !(denom_scaled > 0.0) {
        return Err(Error::NotAdmissible { re: frame.lambda.re, im: frame.lambda.im });
    }
    let log_radius = -two_l - (2.0 * denom_scaled).ln();
    let log_boundary = -two_l - (2.0 * rb).ln();
    let radius_boundary = log_boundary.exp();
    let radius = log_radius.exp();
    if (log_radius - log_boundary).abs() > cfg.disk_tol {
        return Err(Error::Consistency(format!(
            "radius formulas disagree at X = {}: {radius} vs {radius_boundary}",
            frame.x
        )));
    }
    let r = frame.chi_ratio();
    let delta = (frame.chi * rot.conj() * frame.p_dphi.conj() + frame.p_dchi * rot * frame.phi.conj()) / (2.0 * rb);
    let center = -frame.mu - delta * r;
    // l_X(0) - center without the common offset mu
    let offset = (-frame.p_dchi / frame.p_dphi + delta) * r;
    let boundary_defect = (offset.norm() - radius).abs();
    Ok(WeylDisk { x: frame.x, lambda: frame.lambda, center, radius, radius_boundary, log_radius, log_radius_boundary: log_boundary, center_nu_chi: -delta, boundary_defect })
}

fn pair_frames(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    xs: &[f64],
    tol: f64,
) -> Result<Vec<SolutionFrame>> {
    if !pair.contains(lambda) {
        return Err(Error::NotAdmissible { re: lambda.re, im: lambda.im });
    }
    integrate_pair(problem, lambda, pair.eta, xs, tol)
}

/// `D_X(lambda)` for a single truncation point.
pub fn weyl_disk(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    x: f64,
    cfg: &LimitConfig,
) -> Result<WeylDisk> {
    let f = pair_frames(problem, pair, lambda, &[x], cfg.ode_tol)?;
    disk_from_frame(&f[0], problem.alpha, cfg)
}

/// Energy and geometric verdicts on `l in D_X`; they must agree.
pub fn membership_from_frame(frame: &SolutionFrame, disk: &WeylDisk, alpha: C, l: C, tol: f64) -> Result<bool> {
    let e = frame.scaled_energy(Some(l));
    let a = a_functional(alpha, frame.eta, l) * (-2.0 * frame.log_scale).exp();
    let scale = e.abs().max(a.abs()).max(f64::MIN_POSITIVE);
    let energy_margin = (a - e) / scale;
    let dist = (l - disk.center).norm();
    let geo_margin = (disk.radius - dist) / disk.radius.max(dist);
    let geometric = geo_margin >= -tol;
    let energetic = energy_margin >= -tol;
    if geometric != energetic && geo_margin.abs() > tol && energy_margin.abs() > tol {
        return Err(Error::Consistency(format!(
            "energy and geometric membership disagree at l = {l} (margins {energy_margin:e}, {geo_margin:e})"
        )));
    }
    Ok(geometric)
}

/// `l in D_X(lambda)` by the energy criterion, cross-checked geometrically.
pub fn disk_membership(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    x: f64,
    l: C,
    cfg: &LimitConfig,
) -> Result<bool> {
    let f = pair_frames(problem, pair, lambda, &[x], cfg.ode_tol)?;
    let d = disk_from_frame(&f[0], problem.alpha, cfg)?;
    membership_from_frame(&f[0], &d, problem.alpha, l, 1e-8)
}

/// Disks along the schedule with nesting checks.
pub fn disk_trace(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<(Vec<SolutionFrame>, Vec<WeylDisk>)> {
    let frames = pair_frames(problem, pair, lambda, &schedule.points, cfg.ode_tol)?;
    let disks = frames.iter().map(|f| disk_from_frame(f, problem.alpha, cfg)).collect::<Result<Vec<_>>>()?;
    for w in disks.windows(2) {
        let (dx, dy) = (&w[0], &w[1]);
        if !(dy.log_radius < dx.log_radius) {
            return Err(Error::Consistency(format!("radius not decreasing between X = {} and {}", dx.x, dy.x)));
        }
        if (dy.center - dx.center).norm() + dy.radius > dx.radius + cfg.nest_tol * dx.radius.max(1.0) {
            return Err(Error::Consistency(format!("nesting violated between X = {} and {}", dx.x, dy.x)));
        }
    }
    Ok((frames, disks))
}

fn decay_fit(disks: &[WeylDisk], extrapolated: f64) -> DecayFit {
    let xs: Vec<f64> = disks.iter().map(|d| d.x).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().max(1e-300).ln()).collect();
    let lr: Vec<f64> = disks.iter().map(|d| d.log_radius).collect();
    let (_, er, erms) = line_fit(&xs, &lr);
    let (_, ar, arms) = line_fit(&lx, &lr);
    DecayFit {
        exponential_rate: er,
        exponential_rms: erms,
        algebraic_rate: ar,
        algebraic_rms: arms,
        extrapolated_radius: extrapolated,
    }
}

/// Limit of the nested disks along the schedule.
pub fn limit_disk(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<LimitResult> {
    limit_with_frames(problem, pair, lambda, schedule, cfg).map(|(r, _)| r)
}

/// As [`limit_disk`], also returning the frames at the schedule points.
pub fn limit_with_frames(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<(LimitResult, Vec<SolutionFrame>)> {
    if schedule.len() < 3 {
        return Err(Error::input("schedule too short to extrapolate (need 3 points)"));
    }
    let (frames, disks) = disk_trace(problem, pair, lambda, schedule, cfg)?;
    let res = limit_from_disks(&frames, &disks, pair, cfg)?;
    Ok((res, frames))
}

fn limit_from_disks(frames: &[SolutionFrame], disks: &[WeylDisk], pair: &RotationPair, cfg: &LimitConfig) -> Result<LimitResult> {
    let last = *disks.last().unwrap();
    let radii: Vec<f64> = disks.iter().map(|d| d.radius).collect();
    let centers: Vec<C> = disks.iter().map(|d| d.center).collect();
    let w_defect = frames.iter().map(|f| (f.wronskian() + 1.0).norm()).fold(0.0, f64::max);
    let base = LimitResult {
        kind: LimitKind::LimitPoint { m: last.center },
        radius_trace: disks.iter().map(|d| (d.x, d.radius)).collect(),
        m_trace: disks.iter().map(|d| (d.x, d.center)).collect(),
        disks: disks.to_vec(),
        eta: pair.eta,
        k: pair.k,
        error_bound: 0.0,
        decay: decay_fit(disks, 0.0),
    };
    let integ = (w_defect + 100.0 * cfg.ode_tol) * (1.0 + last.center.norm());
    if last.radius <= cfg.limit_point_threshold {
        return Ok(LimitResult { error_bound: 2.0 * last.radius + integ, ..base });
    }
    let rho_hat = wynn_real(&radii);
    let sigma_hat = wynn(&centers);
    // 1 / (2 rho) is the boundary term at a plus the phi-energy over [a, X]
    let partial: Vec<f64> = disks.iter().map(|d| 0.5 * (-d.log_radius).exp()).collect();
    let energy_tail = tail_test_with_floor(&partial, cfg.tail_factor, cfg.tail_sustain, 100.0 * cfg.ode_tol);
    let vanishing = rho_hat.abs() <= cfg.limit_point_threshold.max(1e-3 * last.radius);
    if energy_tail == TailVerdict::Divergent || vanishing {
        let (m, bound) = if (sigma_hat - last.center).norm() <= last.radius {
            (sigma_hat, 2.0 * last.radius)
        } else {
            (last.center, last.radius)
        };
        return Ok(LimitResult {
            kind: LimitKind::LimitPoint { m },
            error_bound: bound + integ,
            decay: decay_fit(disks, rho_hat.max(0.0)),
            ..base
        });
    }
    let rho_c: Vec<C> = radii.iter().map(|&r| C::new(r, 0.0)).collect();
    let pl = prefix_limits(&rho_c);
    let plc = prefix_limits(&centers);
    let n = pl.len();
    let spread = pl[n.saturating_sub(3)..].iter().map(|z| (z.re - rho_hat).abs()).fold(0.0, f64::max);
    let plateau = n >= 3 && rho_hat > 0.0 && spread <= cfg.plateau_tol * rho_hat;
    let tail_radius = match energy_tail {
        TailVerdict::Convergent(v) => Some(0.5 / v),
        _ => None,
    };
    if plateau || (tail_radius.is_some() && rho_hat > 0.0) {
        let tail_gap = tail_radius.map_or(0.0, |r| (r - rho_hat).abs());
        let cspread = plc[plc.len().saturating_sub(3)..].iter().map(|z| (z - sigma_hat).norm()).fold(0.0, f64::max);
        let disk = WeylDisk {
            radius: rho_hat,
            radius_boundary: rho_hat,
            log_radius: rho_hat.ln(),
            log_radius_boundary: rho_hat.ln(),
            center: sigma_hat,
            ..last
        };
        return Ok(LimitResult {
            kind: LimitKind::LimitCircle { disk },
            error_bound: spread.max(tail_gap) + cspread + integ,
            decay: decay_fit(disks, rho_hat),
            ..base
        });
    }
    Err(Error::Inconclusive(format!(
        "radius neither vanishes nor settles: last {:.3e}, extrapolated {:.3e}",
        last.radius, rho_hat
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_schedule;
    use crate::rangegeom::{admissible_pair, build_default_region};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn free_pair(lambda: C) -> (CoefficientProblem, RotationPair) {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let r = build_default_region(&p).unwrap();
        let pair = admissible_pair(&r, lambda).unwrap();
        (p, pair)
    }

    #[test]
    fn mobius_identity_at_left_endpoint() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let f = integrate_pair(&p, c(0.0, 1.0), PI / 2.0, &[1.0], 1e-10).unwrap();
        let z = c(0.3, -0.7);
        assert!((mobius_l(&f[0], z).unwrap() - z).norm() < 1e-15);
        assert!((mobius_z(&f[0], z).unwrap() - z).norm() < 1e-15);
    }

    #[test]
    fn mobius_round_trip() {
        let p = CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, c(0.4, 0.0)).unwrap();
        let f = integrate_pair(&p, c(-1.0, 1.0), 2.0, &[1.5], 1e-10).unwrap();
        for z in [c(0.1, 0.2), c(-3.0, 1.0), c(0.0, -0.5)] {
            let l = mobius_l(&f[0], z).unwrap();
            assert!((mobius_z(&f[0], l).unwrap() - z).norm() < 1e-10 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn a_functional_examples() {
        let l = c(0.4, -1.1);
        assert!((a_functional(c(0.0, 0.0), 0.7, l) - (C::from_polar(1.0, 0.7) * l).re).abs() < 1e-15);
        let v = a_functional(c(PI / 2.0, 0.0), 0.7, l);
        assert!((v + (C::from_polar(1.0, 0.7) * l.conj()).re).abs() < 1e-14);
        assert!((a_functional(c(PI / 4.0, 0.0), 0.0, c(0.0, 0.0)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn radius_near_left_endpoint() {
        let p = CoefficientProblem::free(c(PI / 4.0, 0.0));
        // eta = pi places lambda = 1 - i ... any lambda with Re[(lambda - K) e^{i pi}] < 0 works
        let f = integrate_pair(&p, c(1.0, 0.0), PI, &[1.0 + 1e-9], 1e-12).unwrap();
        let d = disk_from_frame(&f[0], p.alpha, &LimitConfig::default()).unwrap();
        assert!((d.radius - 1.0).abs() < 1e-6, "{}", d.radius);
        let p0 = CoefficientProblem::free(c(0.0, 0.0));
        let f = integrate_pair(&p0, c(0.0, 1.0), PI / 2.0, &[1.0], 1e-12).unwrap();
        assert!(disk_from_frame(&f[0], p0.alpha, &LimitConfig::default()).is_err());
    }

    #[test]
    fn free_radius_forms_agree_with_closed_form() {
        let lam = c(0.0, 1.0);
        let (p, pair) = free_pair(lam);
        let d = weyl_disk(&p, &pair, lam, 6.0, &LimitConfig::default()).unwrap();
        // phi = -sin(k (x - 1)) / k: R(X) = Re[i phi' conj(phi)]
        let k = lam.sqrt();
        let t = 5.0;
        let phi = -(k * t).sin() / k;
        let dphi = -(k * t).cos();
        let rb = (c(0.0, 1.0) * dphi * phi.conj()).re;
        let exact = 1.0 / (2.0 * rb);
        assert!((d.radius - exact).abs() < 1e-8 * exact);
        assert!((d.radius_boundary - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn membership_examples() {
        let lam = c(0.0, 1.0);
        let (p, pair) = free_pair(lam);
        let cfg = LimitConfig::default();
        let f = integrate_pair(&p, lam, pair.eta, &[3.0], cfg.ode_tol).unwrap();
        let d = disk_from_frame(&f[0], p.alpha, &cfg).unwrap();
        assert!(membership_from_frame(&f[0], &d, p.alpha, d.center, 1e-8).unwrap());
        assert!(!membership_from_frame(&f[0], &d, p.alpha, d.center + 2.0 * d.radius, 1e-8).unwrap());
        for k in 0..8 {
            let l = d.center + C::from_polar(d.radius, k as f64);
            let e = f[0].scaled_energy(Some(l)) * (2.0 * f[0].log_scale).exp();
            let a = a_functional(p.alpha, pair.eta, l);
            assert!((e - a).abs() < 1e-7 * a.abs().max(1.0), "{e} {a}");
        }
    }

    #[test]
    fn free_limit_point() {
        let lam = c(0.0, 1.0);
        let (p, pair) = free_pair(lam);
        let s = make_schedule(p.interval, 2.0, 2.0, 5).unwrap();
        let res = limit_disk(&p, &pair, lam, &s, &LimitConfig::default()).unwrap();
        assert!(res.is_limit_point());
        let exact = C::from_polar(1.0, -PI / 4.0);
        assert!((res.m() - exact).norm() < 1e-8, "{}", res.m());
        assert!(res.error_bound < 1e-6);
    }

    #[test]
    fn short_schedule_rejected() {
        let lam = c(0.0, 1.0);
        let (p, pair) = free_pair(lam);
        let s = make_schedule(p.interval, 2.0, 2.0, 2).unwrap();
        assert!(limit_disk(&p, &pair, lam, &s, &LimitConfig::default()).is_err());
    }
}
