//! The m-function beyond the disk limit: the difference identity, continuation
//! through Cases II/III and through a truncated Case I problem, pole location by
//! the argument principle, the alpha-transform, and closed forms.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::accel::{tail_test_with_floor, wynn, TailVerdict};
use crate::error::{Error, Result};
use crate::odecore::{propagate, Accumulator, Point, Snapshot, Solution, StepControl};
use crate::problem::{CoefficientProblem, TruncationSchedule};
use crate::rangegeom::{admissible_pair_alpha, build_default_region, ConvexRegion, RotationPair};
use crate::weyl::{limit_disk, limit_with_frames, LimitConfig};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MRoute {
    DiskLimit,
    Continuation,
    TruncatedContinuation,
    ResolventExtend,
    ClosedForm,
}

/// A value of `m` at `lambda` with the half-plane it was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MSample {
    pub lambda: C,
    pub m: C,
    pub eta: f64,
    pub k: C,
    pub error_bound: f64,
    pub route: MRoute,
    /// `|denominator|` of the continuation formula, when there is one.
    pub denominator: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRecord {
    pub location: C,
    pub order: u32,
    /// Distance of the winding integral from the nearest integer.
    pub residual: f64,
}

/// `m` from boundary data of the square-integrable solution at `a`:
/// `(sin a psi - cos a p psi') / (cos a psi + sin a p psi')`.
pub fn m_from_boundary(alpha: C, psi: C, p_dpsi: C) -> Result<C> {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let den = ca * psi + sa * p_dpsi;
    if den.norm() <= 1e-300 || den.norm() <= 1e-14 * (psi.norm() + p_dpsi.norm()) {
        return Err(Error::Pole { re: f64::NAN, im: f64::NAN });
    }
    Ok((sa * psi - ca * p_dpsi) / den)
}

/// `(m sin a - cos a) / (m cos a + sin a)`: the `alpha` m-function from `m_{pi/2}`.
pub fn alpha_transform(m_half_pi: C, alpha: C) -> Result<C> {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let den = m_half_pi * ca + sa;
    if den.norm() <= 1e-14 * (m_half_pi.norm() * ca.norm() + sa.norm()) {
        return Err(Error::Consistency(format!("alpha-transform denominator vanishes at m = {m_half_pi}")));
    }
    Ok((m_half_pi * sa - ca) / den)
}

/// m-function of `-y'' = lambda y` on `[a, inf)`: `psi = e^{i k (x - a)}` with `Im k > 0`.
pub fn free_m(lambda: C, alpha: C) -> Result<C> {
    if lambda.im == 0.0 && lambda.re >= 0.0 {
        return Err(Error::NotAdmissible { re: lambda.re, im: lambda.im });
    }
    let k = lambda.sqrt();
    let k = if k.im < 0.0 { -k } else { k };
    m_from_boundary(alpha, C::new(1.0, 0.0), C::i() * k)
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_gamma_pole(z: C) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

fn ln_gamma_right(z: C) -> C {
    let z = z - 1.0;
    let mut x = C::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `sin(pi z)` with the real part reduced exactly modulo 2 first.
fn sin_pi(z: C) -> C {
    let re = z.re - 2.0 * (z.re / 2.0).round();
    (PI * C::new(re, z.im)).sin()
}

/// `Gamma(z)`: Lanczos (g = 7, 9 terms), reflection for `Re z < 1/2`.
pub fn complex_gamma(z: C) -> Result<C> {
    if is_gamma_pole(z) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::input("gamma argument must be finite"));
    }
    if z.re < 0.5 {
        Ok(PI / (sin_pi(z) * ln_gamma_right(1.0 - z).exp()))
    } else {
        Ok(ln_gamma_right(z).exp())
    }
}

/// `1 / Gamma(z)`, entire.
fn recip_gamma(z: C) -> C {
    if is_gamma_pole(z) {
        return C::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        sin_pi(z) * ln_gamma_right(1.0 - z).exp() / PI
    } else {
        (-ln_gamma_right(z)).exp()
    }
}

/// `r^{1/n} e^{i theta / n}` with `0 <= theta < 2 pi`.
pub fn principal_root(z: C, n: u32) -> C {
    let mut th = z.arg();
    if th < 0.0 {
        th += 2.0 * PI;
    }
    C::from_polar(z.norm().powf(1.0 / n as f64), th / n as f64)
}

/// `-Gamma(1/4 - lambda/(4 s)) / (2 r Gamma(3/4 - lambda/(4 s)))` with `s^2 = c = r^4`.
fn gamma_ratio_m(s: C, r: C, lambda: C) -> Result<C> {
    let t = lambda / (4.0 * s);
    let num = 0.25 - t;
    if is_gamma_pole(num) {
        return Err(Error::Pole { re: lambda.re, im: lambda.im });
    }
    let g = complex_gamma(num)?;
    Ok(-g * recip_gamma(0.75 - t) / (2.0 * r))
}

/// m-function `m_{pi/2}` of `-y'' + c x^2 y = lambda y` on `[0, inf)`.
///
/// For `0 <= arg c < pi` this is the meromorphic Gamma ratio. For `arg c = pi`
/// (real `c < 0`) the two boundary functions are returned by half-plane:
/// `m^(1)` for `Im lambda > 0` and `m^(2)` for `Im lambda < 0`.
pub fn oscillator_m_closed_form(c: C, lambda: C) -> Result<C> {
    if c.norm() == 0.0 {
        return Err(Error::input("c must be nonzero"));
    }
    if c.im == 0.0 && c.re < 0.0 {
        let mag = c.norm();
        let s = C::new(0.0, mag.sqrt());
        let r = C::from_polar(mag.powf(0.25), PI / 4.0);
        return if lambda.im > 0.0 {
            gamma_ratio_m(s, r, lambda)
        } else if lambda.im < 0.0 {
            gamma_ratio_m(-s, r.conj(), lambda)
        } else {
            Err(Error::NotAdmissible { re: lambda.re, im: lambda.im })
        };
    }
    if c.im < 0.0 {
        return Err(Error::input("closed form needs 0 <= arg c <= pi"));
    }
    gamma_ratio_m(principal_root(c, 2), principal_root(c, 4), lambda)
}

/// Sample of the disk-limit m.
pub fn disk_limit_sample(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<MSample> {
    let r = limit_disk(problem, pair, lambda, schedule, cfg)?;
    Ok(MSample {
        lambda,
        m: r.m(),
        eta: pair.eta,
        k: pair.k,
        error_bound: r.error_bound,
        route: MRoute::DiskLimit,
        denominator: None,
    })
}

/// True `(u, pu')` of solution `k`, which sits alone in group `k`.
fn true_value(s: &Snapshot, k: usize) -> (C, C) {
    let sc = s.log_scale[k].exp();
    (s.y[2 * k] * sc, s.y[2 * k + 1] * sc)
}

fn acc_true(s: &Snapshot, j: usize, g: (usize, usize)) -> C {
    s.acc[j] * s.acc_log_scale(j, (Some(g.0), Some(g.1))).exp()
}

/// Result of the difference identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceResidual {
    pub residual: f64,
    /// `|psi(X) psi'(X)|` of the normalized solutions at the last truncation point.
    pub tail_bound: f64,
    pub m: C,
    pub m_prime: C,
}

/// `|(lambda' - lambda) int_a^X psi psi' w - (m(lambda) - m(lambda'))|`.
///
/// Both m values come from the disk limit. The solutions are integrated backward
/// from the last schedule point, which is stable for decaying solutions, and
/// normalized by `cos a psi(a) + sin a p psi'(a) = 1`.
pub fn m_difference_residual(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    lambda_prime: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<DifferenceResidual> {
    let r1 = limit_disk(problem, pair, lambda, schedule, cfg)?;
    let r2 = if lambda_prime == lambda { r1.clone() } else { limit_disk(problem, pair, lambda_prime, schedule, cfg)? };
    if !r1.is_limit_point() || !r2.is_limit_point() {
        return Err(Error::input("difference identity needs the limit-point case at both points"));
    }
    let (m1, m2) = (r1.m(), r2.m());
    let x = schedule.last();
    let a = problem.interval.a;
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let sols = [
        Solution { lambda, u: one, pu: zero, group: 0 },
        Solution { lambda: lambda_prime, u: one, pu: zero, group: 1 },
    ];
    let accs = [Accumulator::quadratic(0, 1, |pt: &Point, y: &[C]| y[0] * y[2] * pt.w)];
    let snap = propagate(problem, &sols, &accs, x, &[a], StepControl::new(cfg.ode_tol))?.remove(0);
    let (ca, sa) = (problem.alpha.cos(), problem.alpha.sin());
    let d1 = ca * snap.y[0] + sa * snap.y[1];
    let d2 = ca * snap.y[2] + sa * snap.y[3];
    // backward accumulation gives int_X^a; scales cancel against the normalization
    let integral = -snap.acc[0] * snap.acc_shift[0].exp() / (d1 * d2);
    let tail_bound = (-snap.log_scale[0] - snap.log_scale[1]).exp() / (d1 * d2).norm();
    if !tail_bound.is_finite() || tail_bound > 1e-3 * (1.0 + integral.norm()) {
        return Err(Error::Inconclusive(format!("psi does not decay by X = {x} (tail {tail_bound:.3e})")));
    }
    let residual = ((lambda_prime - lambda) * integral - (m1 - m2)).norm();
    Ok(DifferenceResidual { residual, tail_bound, m: m1, m_prime: m2 })
}

struct Continued {
    m: Vec<C>,
    den: Vec<C>,
    dm_danchor: C,
    l2_theta: Vec<f64>,
    l2_phi: Vec<f64>,
}

fn continuation_trace(problem: &CoefficientProblem, anchor: &MSample, lambda: C, schedule: &TruncationSchedule, tol: f64) -> Result<Continued> {
    let (ca, sa) = (problem.alpha.cos(), problem.alpha.sin());
    let lp = anchor.lambda;
    let sols = [
        Solution { lambda, u: ca, pu: sa, group: 0 },
        Solution { lambda, u: sa, pu: -ca, group: 1 },
        Solution { lambda: lp, u: ca, pu: sa, group: 2 },
        Solution { lambda: lp, u: sa, pu: -ca, group: 3 },
    ];
    let bil = |i: usize, j: usize| move |pt: &Point, y: &[C]| y[2 * i] * y[2 * j] * pt.w;
    let sq = |i: usize| move |pt: &Point, y: &[C]| C::new(y[2 * i].norm_sqr() * pt.w, 0.0);
    let accs = [
        Accumulator::quadratic(0, 2, bil(0, 2)),
        Accumulator::quadratic(0, 3, bil(0, 3)),
        Accumulator::quadratic(1, 2, bil(1, 2)),
        Accumulator::quadratic(1, 3, bil(1, 3)),
        Accumulator::quadratic(0, 0, sq(0)),
        Accumulator::quadratic(1, 1, sq(1)),
    ];
    let snaps = propagate(problem, &sols, &accs, problem.interval.a, &schedule.points, StepControl::new(tol))?;
    let d = lambda - lp;
    let mp = anchor.m;
    let mut out = Continued { m: vec![], den: vec![], dm_danchor: C::new(0.0, 0.0), l2_theta: vec![], l2_phi: vec![] };
    for s in &snaps {
        let att = acc_true(s, 0, (0, 2));
        let atf = acc_true(s, 1, (0, 3));
        let aft = acc_true(s, 2, (1, 2));
        let aff = acc_true(s, 3, (1, 3));
        let num = mp * (1.0 - d * atf) - d * att;
        let den = 1.0 + d * (aft + mp * aff);
        out.m.push(num / den);
        out.den.push(den);
        out.dm_danchor = ((1.0 - d * atf) * den - num * d * aff) / (den * den);
        out.l2_theta.push(acc_true(s, 4, (0, 0)).re);
        out.l2_phi.push(acc_true(s, 5, (1, 1)).re);
    }
    Ok(out)
}

fn extrapolate(seq: &[C]) -> (C, f64) {
    let n = seq.len();
    let full = wynn(seq);
    let prev = if n >= 4 { wynn(&seq[..n - 1]) } else { seq[n - 1] };
    let est = if full.re.is_finite() && full.im.is_finite() { full } else { seq[n - 1] };
    (est, (est - prev).norm())
}

/// Continuation of `m` from an anchor at `lambda'` in Cases II and III:
/// `m = (m' - (l - l') int theta psi' w) / (1 + (l - l') int phi psi' w)`.
///
/// The truncated integrals are extrapolated along the schedule; the spread of
/// successive extrapolants and the propagated anchor error form the bound.
pub fn continue_m(
    problem: &CoefficientProblem,
    anchor: &MSample,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<MSample> {
    if lambda == anchor.lambda {
        return Ok(MSample { route: MRoute::Continuation, denominator: Some(1.0), ..*anchor });
    }
    let tr = continuation_trace(problem, anchor, lambda, schedule, cfg.ode_tol)?;
    for (name, part) in [("theta", &tr.l2_theta), ("phi", &tr.l2_phi)] {
        if !matches!(tail_test_with_floor(part, cfg.tail_factor, cfg.tail_sustain, 100.0 * cfg.ode_tol), TailVerdict::Convergent(_)) {
            return Err(Error::input(format!("{name} is not shown square integrable; continuation needs Case II or III")));
        }
    }
    let (den, _) = extrapolate(&tr.den);
    let scale = 1.0 + tr.den.iter().map(|d| d.norm()).fold(0.0, f64::max);
    if den.norm() < 1e-8 * scale {
        return Err(Error::Pole { re: lambda.re, im: lambda.im });
    }
    let (m, spread) = extrapolate(&tr.m);
    Ok(MSample {
        lambda,
        m,
        eta: anchor.eta,
        k: anchor.k,
        error_bound: spread + tr.dm_danchor.norm() * anchor.error_bound + 100.0 * cfg.ode_tol * (1.0 + m.norm()),
        route: MRoute::Continuation,
        denominator: Some(den.norm()),
    })
}

/// Denominator `1 + (l - l') int phi psi' w` of [`continue_m`]; zeros are poles of `m`.
pub fn continue_m_denominator(
    problem: &CoefficientProblem,
    anchor: &MSample,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<C> {
    let tr = continuation_trace(problem, anchor, lambda, schedule, cfg.ode_tol)?;
    Ok(extrapolate(&tr.den).0)
}

/// Truncated problem on `[c, b)` with its region, reused across many `lambda`.
pub struct TruncatedCase1 {
    pub problem: CoefficientProblem,
    pub truncated: CoefficientProblem,
    pub region: ConvexRegion,
    pub schedule: TruncationSchedule,
    pub cfg: LimitConfig,
}

struct Case1Eval {
    m: C,
    den: C,
    error_bound: f64,
    pair: RotationPair,
}

impl TruncatedCase1 {
    /// `schedule` must lie in `(c, b)`.
    pub fn new(problem: &CoefficientProblem, c: f64, schedule: &TruncationSchedule, cfg: &LimitConfig) -> Result<Self> {
        if c < problem.interval.a {
            return Err(Error::OutsideInterval { x: c });
        }
        let truncated = problem.truncated(c)?.with_alpha(C::new(0.0, 0.0));
        if schedule.points[0] <= c {
            return Err(Error::input("truncation schedule must start beyond c"));
        }
        let region = build_default_region(&truncated)?;
        Ok(Self { problem: problem.clone(), truncated, region, schedule: schedule.clone(), cfg: *cfg })
    }

    fn eval(&self, lambda: C) -> Result<Case1Eval> {
        let pair = admissible_pair_alpha(&self.region, lambda, C::new(0.0, 0.0)).map_err(|_| {
            Error::input(format!("lambda = {lambda} lies in the numerical range of the truncated problem"))
        })?;
        let (res, _) = limit_with_frames(&self.truncated, &pair, lambda, &self.schedule, &self.cfg)?;
        if !res.is_limit_point() {
            return Err(Error::input("truncated problem is not in the limit-point case"));
        }
        let mc = res.m();
        let c = self.truncated.interval.a;
        let a = self.problem.interval.a;
        // psi_c = u1 - m_c u2 with u1 = (1, 0), u2 = (0, 1) at c
        let (u1, pu1, u2, pu2) = if c == a {
            (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0))
        } else {
            let sols = [
                Solution { lambda, u: C::new(1.0, 0.0), pu: C::new(0.0, 0.0), group: 0 },
                Solution { lambda, u: C::new(0.0, 0.0), pu: C::new(1.0, 0.0), group: 1 },
            ];
            let s = propagate(&self.problem, &sols, &[], c, &[a], StepControl::new(self.cfg.ode_tol))?.remove(0);
            let (u1, pu1) = true_value(&s, 0);
            let (u2, pu2) = true_value(&s, 1);
            (u1, pu1, u2, pu2)
        };
        let (ca, sa) = (self.problem.alpha.cos(), self.problem.alpha.sin());
        let n1 = sa * u1 - ca * pu1;
        let n2 = sa * u2 - ca * pu2;
        let d1 = ca * u1 + sa * pu1;
        let d2 = ca * u2 + sa * pu2;
        let num = n1 - mc * n2;
        let den = d1 - mc * d2;
        let m = num / den;
        let dm = (num * d2 - n2 * den) / (den * den);
        let error_bound = dm.norm() * res.error_bound + 100.0 * self.cfg.ode_tol * (1.0 + m.norm());
        Ok(Case1Eval { m, den, error_bound, pair })
    }

    /// `cos a psi_c(a) + sin a p psi_c'(a)` with `psi_c(c) = 1`; analytic off `Q_c`.
    pub fn denominator(&self, lambda: C) -> Result<C> {
        self.eval(lambda).map(|e| e.den)
    }

    pub fn sample(&self, lambda: C) -> Result<MSample> {
        let e = self.eval(lambda)?;
        let scale = e.den.norm() / (1.0 + e.m.norm());
        if !(e.m.re.is_finite() && e.m.im.is_finite()) || scale < 1e-12 {
            return Err(Error::Pole { re: lambda.re, im: lambda.im });
        }
        Ok(MSample {
            lambda,
            m: e.m,
            eta: e.pair.eta,
            k: e.pair.k,
            error_bound: e.error_bound,
            route: MRoute::TruncatedContinuation,
            denominator: Some(e.den.norm()),
        })
    }
}

/// Case I continuation: disk-limit `m_c` on `[c, b)`, then `psi_c` integrated back to `a`.
pub fn continue_m_case1(
    problem: &CoefficientProblem,
    c: f64,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<MSample> {
    TruncatedCase1::new(problem, c, schedule, cfg)?.sample(lambda)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` in the lambda plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0: x0.min(x1), y0: y0.min(y1), x1: x0.max(x1), y1: y0.max(y1) }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    pub fn contains(&self, z: C) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    fn corners(&self) -> [C; 4] {
        [C::new(self.x0, self.y0), C::new(self.x1, self.y0), C::new(self.x1, self.y1), C::new(self.x0, self.y1)]
    }

    fn size(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    /// Cells at the first level.
    pub grid: (usize, usize),
    /// Refinement stops when a cell is smaller than this.
    pub tol: f64,
    /// Initial samples per edge of a first-level cell.
    pub edge_segments: usize,
    /// Edges are bisected while the argument changes by more than this.
    pub max_arg_step: f64,
    pub max_edge_depth: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { grid: (4, 4), tol: 1e-6, edge_segments: 4, max_arg_step: PI / 3.0, max_edge_depth: 40 }
    }
}

/// How the denominator whose zeros are the poles of `m` is evaluated.
pub enum PoleRoute<'a> {
    /// Case I, through [`TruncatedCase1::denominator`].
    Case1(&'a TruncatedCase1),
    /// Cases II/III, through [`continue_m_denominator`].
    Continuation { problem: &'a CoefficientProblem, anchor: MSample, schedule: &'a TruncationSchedule, cfg: LimitConfig },
    /// Any analytic function supplied by the caller.
    Function(&'a dyn Fn(C) -> Result<C>),
}

struct Winder<'f> {
    f: &'f dyn Fn(C) -> Result<C>,
    cache: RefCell<HashMap<(u64, u64), C>>,
    cfg: ScanConfig,
    scale: f64,
}

impl Winder<'_> {
    fn eval(&self, z: C) -> Result<C> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let mut last = None;
        for k in 0..4 {
            // nudge off points where the evaluation fails
            let zz = if k == 0 { z } else { z + C::from_polar(1e-9 * self.scale * k as f64, 0.7 * k as f64) };
            match (self.f)(zz) {
                Ok(v) if v.re.is_finite() && v.im.is_finite() && v.norm() > 0.0 => {
                    self.cache.borrow_mut().insert(key, v);
                    return Ok(v);
                }
                Ok(_) => last = Some(Error::Pole { re: z.re, im: z.im }),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap())
    }

    /// Argument change along a segment. Accepted when both halves turn little and
    /// `f` is close to linear there, so a near-full turn cannot alias to a small one.
    fn edge(&self, z0: C, f0: C, z1: C, f1: C, depth: u32) -> Result<f64> {
        let zm = (z0 + z1) / 2.0;
        let fm = self.eval(zm)?;
        let d1 = (fm / f0).arg();
        let d2 = (f1 / fm).arg();
        let bend = (fm - (f0 + f1) / 2.0).norm();
        let floor = f0.norm().min(f1.norm()).min(fm.norm());
        if d1.abs() <= self.cfg.max_arg_step && d2.abs() <= self.cfg.max_arg_step && bend <= 0.25 * floor {
            return Ok(d1 + d2);
        }
        if depth == 0 {
            return Err(Error::Inconclusive(format!("zero of the denominator on the contour near {zm}")));
        }
        Ok(self.edge(z0, f0, zm, fm, depth - 1)? + self.edge(zm, fm, z1, f1, depth - 1)?)
    }

    /// Winding number of the denominator around the rectangle, with `segments`
    /// equal pieces per edge before adaptive bisection.
    fn winding(&self, r: &Rect, segments: usize) -> Result<f64> {
        let cs = r.corners();
        let mut total = 0.0;
        for e in 0..4 {
            let (a, b) = (cs[e], cs[(e + 1) % 4]);
            let pts: Vec<C> = (0..=segments).map(|k| if k == segments { b } else { a + (b - a) * (k as f64 / segments as f64) }).collect();
            let vals: Vec<C> = pts.iter().map(|&z| self.eval(z)).collect::<Result<_>>()?;
            for k in 0..segments {
                total += self.edge(pts[k], vals[k], pts[k + 1], vals[k + 1], self.cfg.max_edge_depth)?;
            }
        }
        Ok(total / (2.0 * PI))
    }

    fn refine(&self, r: Rect, count: u32, residual: f64, out: &mut Vec<PoleRecord>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if r.size() <= self.cfg.tol {
            out.push(PoleRecord { location: C::new((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0), order: count, residual });
            return Ok(());
        }
        // off-centre split points avoid zeros sitting on symmetric lines
        for frac in [0.5 + 1.0 / 64.0, 0.5 - 3.0 / 128.0, 0.5 + 5.0 / 256.0] {
            let xm = r.x0 + frac * (r.x1 - r.x0);
            let ym = r.y0 + frac * (r.y1 - r.y0);
            let kids = [
                Rect::new(r.x0, r.y0, xm, ym),
                Rect::new(xm, r.y0, r.x1, ym),
                Rect::new(xm, ym, r.x1, r.y1),
                Rect::new(r.x0, ym, xm, r.y1),
            ];
            let mut counts = Vec::with_capacity(4);
            let mut ok = true;
            for k in &kids {
                match self.winding(k, 1) {
                    Ok(w) => counts.push(w),
                    Err(Error::Inconclusive(_)) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !ok {
                continue;
            }
            // a zero on a split line shows up as fractional windings
            if counts.iter().any(|w| (w - w.round()).abs() > 0.2) {
                continue;
            }
            let rounded: Vec<u32> = counts.iter().map(|w| w.round().max(0.0) as u32).collect();
            if rounded.iter().sum::<u32>() != count {
                continue;
            }
            for ((k, w), n) in kids.iter().zip(&counts).zip(&rounded) {
                self.refine(*k, *n, residual.max((w - w.round()).abs()), out)?;
            }
            return Ok(());
        }
        Err(Error::Inconclusive(format!("could not split a cell holding {count} zeros near ({}, {})", r.x0, r.y0)))
    }
}

/// Zeros of an analytic function in a rectangle by the argument principle.
pub fn scan_zeros(f: &dyn Fn(C) -> Result<C>, rect: Rect, cfg: &ScanConfig) -> Result<Vec<PoleRecord>> {
    if rect.is_empty() {
        return Ok(vec![]);
    }
    if cfg.grid.0 == 0 || cfg.grid.1 == 0 || !(cfg.tol > 0.0) {
        return Err(Error::input("scan grid and tolerance must be positive"));
    }
    let w = Winder { f, cache: RefCell::new(HashMap::new()), cfg: *cfg, scale: rect.size() };
    let (nx, ny) = cfg.grid;
    let dx = (rect.x1 - rect.x0) / nx as f64;
    let dy = (rect.y1 - rect.y0) / ny as f64;
    let mut out = vec![];
    for j in 0..ny {
        for i in 0..nx {
            let cell = Rect::new(
                rect.x0 + i as f64 * dx,
                rect.y0 + j as f64 * dy,
                if i + 1 == nx { rect.x1 } else { rect.x0 + (i + 1) as f64 * dx },
                if j + 1 == ny { rect.y1 } else { rect.y0 + (j + 1) as f64 * dy },
            );
            let wn = w.winding(&cell, cfg.edge_segments.max(1))?;
            let n = wn.round();
            if n < 0.0 {
                return Err(Error::Consistency(format!("negative winding {wn:.3} for an analytic denominator")));
            }
            w.refine(cell, n as u32, (wn - n).abs(), &mut out)?;
        }
    }
    Ok(out)
}

/// Poles of `m` in `rect`: zeros of the continuation denominator of `route`.
pub fn pole_scan(route: &PoleRoute<'_>, rect: Rect, cfg: &ScanConfig) -> Result<Vec<PoleRecord>> {
    match route {
        PoleRoute::Case1(t) => scan_zeros(&|z| t.denominator(z), rect, cfg),
        PoleRoute::Continuation { problem, anchor, schedule, cfg: lc } => {
            scan_zeros(&|z| continue_m_denominator(problem, anchor, z, schedule, lc), rect, cfg)
        }
        PoleRoute::Function(f) => scan_zeros(*f, rect, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odecore::lagrange_bracket;
    use crate::problem::make_schedule;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn gamma_identities() {
        assert!((complex_gamma(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((complex_gamma(c(0.5, 0.0)).unwrap() - PI.sqrt()).norm() < 1e-14);
        assert!((complex_gamma(c(5.0, 0.0)).unwrap() - 24.0).norm() < 1e-12);
        for z in [c(0.0, 0.0), c(-3.0, 0.0)] {
            assert!(matches!(complex_gamma(z), Err(Error::Pole { .. })));
        }
        let z = c(2.3, -1.7);
        let rec = complex_gamma(z + 1.0).unwrap() / (z * complex_gamma(z).unwrap());
        assert!((rec - 1.0).norm() < 1e-13);
    }

    #[test]
    fn alpha_transform_special_angles() {
        let m = c(-0.4, 0.9);
        assert!((alpha_transform(m, c(PI / 2.0, 0.0)).unwrap() - m).norm() < 1e-15);
        assert!((alpha_transform(m, c(0.0, 0.0)).unwrap() + 1.0 / m).norm() < 1e-15);
        assert!(alpha_transform(c(0.0, 0.0), c(PI / 2.0, 0.0)).is_ok());
        assert!(alpha_transform(c(-1.0, 0.0), c(PI / 4.0, 0.0)).is_err());
    }

    #[test]
    fn free_m_closed_form() {
        let m = free_m(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        assert!((m - C::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        assert!(free_m(c(2.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn m_is_bracket_with_theta() {
        for alpha in [c(0.0, 0.0), c(0.7, 0.0), c(1.1, 0.3)] {
            let m = c(0.3, -1.2);
            let (ca, sa) = (alpha.cos(), alpha.sin());
            let (psi, dpsi) = (ca + m * sa, sa - m * ca);
            assert!((lagrange_bracket(psi, dpsi, ca, sa) - m).norm() < 1e-12);
            assert!((m_from_boundary(alpha, psi, dpsi).unwrap() - m).norm() < 1e-12);
        }
    }

    #[test]
    fn oscillator_pole_and_branches() {
        assert!(matches!(oscillator_m_closed_form(c(1.0, 0.0), c(1.0, 0.0)), Err(Error::Pole { .. })));
        let s = principal_root(c(0.0, 1.0), 2);
        assert!((s - C::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        let up = oscillator_m_closed_form(c(-1.0, 0.0), c(0.3, 1.0)).unwrap();
        let down = oscillator_m_closed_form(c(-1.0, 0.0), c(0.3, -1.0)).unwrap();
        // real coefficients: m(conj lambda) = conj m(lambda)
        assert!((up.conj() - down).norm() < 1e-13);
        assert!(oscillator_m_closed_form(c(-1.0, 0.0), c(0.3, 0.0)).is_err());
    }

    #[test]
    fn free_difference_identity() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let region = build_default_region(&p).unwrap();
        let lam = c(0.0, 1.0);
        let lp = c(0.0, 2.0);
        let pair = admissible_pair_alpha(&region, lam, p.alpha).unwrap();
        let sch = make_schedule(p.interval, 2.0, 2.0, 5).unwrap();
        let cfg = LimitConfig::default();
        let r = m_difference_residual(&p, &pair, lam, lp, &sch, &cfg).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let z = m_difference_residual(&p, &pair, lam, lam, &sch, &cfg).unwrap();
        assert_eq!(z.residual, 0.0);
    }

    #[test]
    fn scan_finds_polynomial_zeros() {
        let f = |z: C| -> Result<C> { Ok((z - c(1.3, 0.7)) * (z - c(-0.4, -1.1)).powi(2)) };
        let cfg = ScanConfig { grid: (2, 2), tol: 1e-8, ..ScanConfig::default() };
        let mut poles = scan_zeros(&f, Rect::new(-2.0, -2.0, 2.0, 2.0), &cfg).unwrap();
        poles.sort_by(|a, b| a.location.re.partial_cmp(&b.location.re).unwrap());
        assert_eq!(poles.len(), 2);
        assert_eq!(poles[0].order, 2);
        assert!((poles[0].location - c(-0.4, -1.1)).norm() < 1e-7);
        assert_eq!(poles[1].order, 1);
        assert!((poles[1].location - c(1.3, 0.7)).norm() < 1e-7);
        assert!(scan_zeros(&f, Rect::new(0.0, 0.0, 0.0, 1.0), &cfg).unwrap().is_empty());
    }
}
