//! The resolvent `R_lambda f(x) = int G(x, y) f(y) w(y) dy` with the Green kernel
//! built from `phi` and `psi = theta + m phi`, checks of its contract, and the
//! resolvent extension of `m` in Cases II and III.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accel::{tail_test_with_floor, wynn, TailVerdict};
use crate::error::{Error, Result};
use crate::mextend::{MRoute, MSample};
use crate::odecore::{initial_data, lagrange_bracket, propagate, Accumulator, Point, Snapshot, Solution, StepControl};
use crate::problem::{CoefficientProblem, TruncationSchedule};
use crate::rangegeom::RotationPair;
use crate::weyl::{limit_disk, LimitConfig};

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct ResolventConfig {
    pub ode_tol: f64,
    /// Grid density on the support of `f`.
    pub nodes_per_unit: f64,
    pub min_nodes: usize,
    /// Nodes excluded at each end from the differential residual.
    pub margin_nodes: usize,
    pub limit: LimitConfig,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self { ode_tol: 1e-12, nodes_per_unit: 256.0, min_nodes: 512, margin_nodes: 4, limit: LimitConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventReport {
    pub lambda: C,
    /// `||(M - lambda) Phi - f||_w / ||f||_w` on interior nodes.
    pub residual_ode: f64,
    /// `|cos a Phi(a) + sin a p Phi'(a)|`.
    pub bc_residual: f64,
    /// `delta ||Phi||_w / ||f||_w`.
    pub bound_ratio: f64,
    /// Slack of the energy inequality at `epsilon = delta / 2`.
    pub energy_check: f64,
    pub f_norm: f64,
    pub phi_norm: f64,
}

/// `Phi = R_lambda f` on a uniform grid over the support `[a, c]` of `f`.
/// Beyond `c`, `Phi = tail_coeff * psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventField {
    pub x: Vec<f64>,
    pub u: Vec<C>,
    pub p_du: Vec<C>,
    pub f: Vec<C>,
    pub tail_coeff: C,
    pub psi_c: C,
    pub p_dpsi_c: C,
    /// `int_c^b |psi|^2 w`.
    pub tail_l2w: f64,
}

/// Resolvent at one `lambda` in the half-plane of `pair`, with the `psi` of the limit point.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub problem: CoefficientProblem,
    pub pair: RotationPair,
    pub lambda: C,
    pub m: C,
    pub m_error: f64,
    /// Point from which the tail of `psi` is integrated back.
    pub far: f64,
    pub cfg: ResolventConfig,
}

fn true_sol(s: &Snapshot, k: usize) -> (C, C) {
    let e = s.log_scale[k].exp();
    (s.y[2 * k] * e, s.y[2 * k + 1] * e)
}

fn true_acc(s: &Snapshot, j: usize, g: (Option<usize>, Option<usize>)) -> C {
    s.acc[j] * s.acc_log_scale(j, g).exp()
}

fn simpson(h: f64, v: &[f64]) -> f64 {
    let n = v.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut s = v[0] + v[n];
    for (i, x) in v.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * h / 3.0
}

impl Resolvent {
    /// Kernel from the disk-limit `m(lambda)`; the limit-point case is required.
    pub fn new(
        problem: &CoefficientProblem,
        pair: &RotationPair,
        lambda: C,
        schedule: &TruncationSchedule,
        cfg: &ResolventConfig,
    ) -> Result<Self> {
        let r = limit_disk(problem, pair, lambda, schedule, &cfg.limit)?;
        if !r.is_limit_point() {
            return Err(Error::input("the disk-limit kernel needs the limit-point case"));
        }
        Ok(Self::with_m(problem, pair, lambda, r.m(), r.error_bound, schedule.last(), cfg))
    }

    pub fn with_m(
        problem: &CoefficientProblem,
        pair: &RotationPair,
        lambda: C,
        m: C,
        m_error: f64,
        far: f64,
        cfg: &ResolventConfig,
    ) -> Self {
        Self { problem: problem.clone(), pair: *pair, lambda, m, m_error, far, cfg: *cfg }
    }

    fn basis_at(&self, xs: &[f64]) -> Result<Vec<(C, C, C, C)>> {
        let (t0, pt0, f0, pf0) = initial_data(self.problem.alpha);
        let sols =
            [Solution { lambda: self.lambda, u: t0, pu: pt0, group: 0 }, Solution { lambda: self.lambda, u: f0, pu: pf0, group: 1 }];
        let a = self.problem.interval.a;
        let inner: Vec<f64> = xs.iter().copied().filter(|&x| x > a).collect();
        let snaps = propagate(&self.problem, &sols, &[], a, &inner, StepControl::new(self.cfg.ode_tol))?;
        let mut it = snaps.iter();
        Ok(xs
            .iter()
            .map(|&x| {
                if x > a {
                    let s = it.next().unwrap();
                    let (t, pt) = true_sol(s, 0);
                    let (f, pf) = true_sol(s, 1);
                    (t, pt, f, pf)
                } else {
                    (t0, pt0, f0, pf0)
                }
            })
            .collect())
    }

    /// `G(x, y) = -phi(min) psi(max)`.
    pub fn kernel(&self, x: f64, y: f64) -> Result<C> {
        for z in [x, y] {
            if !(self.problem.interval.contains(z) || z == self.problem.interval.a) {
                return Err(Error::OutsideInterval { x: z });
            }
        }
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let pts = if lo == hi { vec![lo] } else { vec![lo, hi] };
        let v = self.basis_at(&pts)?;
        let phi_lo = v[0].2;
        let (t, _, f, _) = v[v.len() - 1];
        Ok(-phi_lo * (t + self.m * f))
    }

    /// Apply the resolvent to `f`, which must vanish outside `[a, support_end]`.
    pub fn apply(&self, f: &dyn Fn(f64) -> C, support_end: f64) -> Result<ResolventField> {
        let a = self.problem.interval.a;
        let c = support_end;
        if !(c > a) || !(c < self.far) {
            return Err(Error::input(format!("support end {c} must lie in (a, {})", self.far)));
        }
        let mut n = ((c - a) * self.cfg.nodes_per_unit).ceil() as usize;
        n = n.max(self.cfg.min_nodes);
        n += n % 2;
        let h = (c - a) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| if i == n { c } else { a + i as f64 * h }).collect();
        let fv: Vec<C> = xs.iter().map(|&x| f(x)).collect();
        if fv.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::input("f is not finite on its support"));
        }

        let (t0, pt0, f0, pf0) = initial_data(self.problem.alpha);
        let lambda = self.lambda;
        let sols = [Solution { lambda, u: t0, pu: pt0, group: 0 }, Solution { lambda, u: f0, pu: pf0, group: 1 }];
        let accs = [
            Accumulator::linear(0, |pt: &Point, y: &[C]| y[0] * f(pt.x) * pt.w),
            Accumulator::linear(1, |pt: &Point, y: &[C]| y[2] * f(pt.x) * pt.w),
        ];
        let snaps = propagate(&self.problem, &sols, &accs, a, &xs[1..], StepControl::new(self.cfg.ode_tol))?;
        let zero = C::new(0.0, 0.0);
        let mut state = vec![(t0, pt0, f0, pf0, zero, zero)];
        for s in &snaps {
            let (t, pt) = true_sol(s, 0);
            let (ph, pph) = true_sol(s, 1);
            state.push((t, pt, ph, pph, true_acc(s, 0, (Some(0), None)), true_acc(s, 1, (Some(1), None))));
        }
        let m = self.m;
        let i_psi_total = state[n].4 + m * state[n].5;
        let mut u = Vec::with_capacity(n + 1);
        let mut p_du = Vec::with_capacity(n + 1);
        for &(t, pt, ph, pph, it, ip) in &state {
            let rest = i_psi_total - (it + m * ip);
            u.push(-(t + m * ph) * ip - ph * rest);
            p_du.push(-(pt + m * pph) * ip - pph * rest);
        }
        let (tc, ptc, phc, pphc, _, ipc) = state[n];
        let psi_c = tc + m * phc;
        let p_dpsi_c = ptc + m * pphc;

        // psi beyond c: the decaying solution integrated back from `far`
        let back = [Solution { lambda, u: C::new(1.0, 0.0), pu: zero, group: 0 }];
        let bacc = [Accumulator::quadratic(0, 0, |pt: &Point, y: &[C]| C::new(y[0].norm_sqr() * pt.w, 0.0))];
        let bs = propagate(&self.problem, &back, &bacc, self.far, &[c], StepControl::new(self.cfg.ode_tol))?.remove(0);
        let (yb, _) = true_sol(&bs, 0);
        let scale = psi_c / yb;
        let tail_l2w = -(true_acc(&bs, 0, (Some(0), Some(0))).re) * scale.norm_sqr();
        if !tail_l2w.is_finite() {
            return Err(Error::Inconclusive("psi tail beyond the support is not finite".into()));
        }
        Ok(ResolventField { x: xs, u, p_du, f: fv, tail_coeff: -ipc, psi_c, p_dpsi_c, tail_l2w })
    }

    /// Resolvent identity, boundary condition, norm bound and energy slack for one `f`.
    pub fn check(&self, f: &dyn Fn(f64) -> C, support_end: f64) -> Result<ResolventReport> {
        let fld = self.apply(f, support_end)?;
        let n = fld.x.len() - 1;
        let h = fld.x[1] - fld.x[0];
        let coef: Vec<(C, C, f64)> = fld.x.iter().map(|&x| self.problem.coefficients(x)).collect();
        let f2: Vec<f64> = (0..=n).map(|i| fld.f[i].norm_sqr() * coef[i].2).collect();
        let f_norm = simpson(h, &f2).sqrt();
        let u2: Vec<f64> = (0..=n).map(|i| fld.u[i].norm_sqr() * coef[i].2).collect();
        let tail2 = fld.tail_coeff.norm_sqr() * fld.tail_l2w;
        let phi_norm = (simpson(h, &u2) + tail2).sqrt();

        let rot = C::from_polar(1.0, self.pair.eta);
        let k = self.pair.k;
        let en: Vec<f64> = (0..=n)
            .map(|i| {
                let (p, q, w) = coef[i];
                let du = fld.p_du[i] / p;
                (rot * (p * du.norm_sqr() + (q - k * w) * fld.u[i].norm_sqr())).re
            })
            .collect();
        let tail_energy = fld.tail_coeff.norm_sqr()
            * (rot * (-fld.p_dpsi_c * fld.psi_c.conj() + (self.lambda - k) * fld.tail_l2w)).re;
        let energy = simpson(h, &en) + tail_energy;
        let delta = self.pair.distance(self.lambda);
        let eps = delta / 2.0;
        let energy_check = f_norm * f_norm / (4.0 * eps) - energy - (delta - eps) * phi_norm * phi_norm;

        let (ca, sa) = (self.problem.alpha.cos(), self.problem.alpha.sin());
        let bc_residual = (ca * fld.u[0] + sa * fld.p_du[0]).norm();

        let lo = 2 + self.cfg.margin_nodes;
        let hi = n.saturating_sub(2 + self.cfg.margin_nodes);
        let mut r2 = 0.0;
        for i in lo..=hi {
            let g = &fld.p_du;
            let d = (-g[i + 2] + 8.0 * g[i + 1] - 8.0 * g[i - 1] + g[i - 2]) / (12.0 * h);
            let (_, q, w) = coef[i];
            let r = -d + (q - self.lambda * w) * fld.u[i] - w * fld.f[i];
            r2 += r.norm_sqr() / w * h;
        }
        let residual_ode = if f_norm > 0.0 { r2.sqrt() / f_norm } else { r2.sqrt() };
        let bound_ratio = if f_norm > 0.0 { delta * phi_norm / f_norm } else { 0.0 };
        Ok(ResolventReport { lambda: self.lambda, residual_ode, bc_residual, bound_ratio, energy_check, f_norm, phi_norm })
    }
}

/// Smooth, compactly supported test function
/// `sin^2(pi (x - lo)/(hi - lo)) sum_k c_k e^{i k omega (x - lo)}` on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    pub lo: f64,
    pub hi: f64,
    pub omega: f64,
    pub coeffs: Vec<C>,
}

impl BumpFunction {
    pub fn eval(&self, x: f64) -> C {
        if x <= self.lo || x >= self.hi {
            return C::new(0.0, 0.0);
        }
        let t = x - self.lo;
        let envelope = (PI * t / (self.hi - self.lo)).sin().powi(2);
        let mut s = C::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            s += c * C::from_polar(1.0, k as f64 * self.omega * t);
        }
        envelope * s
    }
}

/// Seeded band-limited bump with `modes` Fourier modes on `[lo, hi]`.
pub fn random_bump(seed: u64, lo: f64, hi: f64, modes: usize) -> BumpFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..modes)
        .map(|_| C::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
        .collect();
    BumpFunction { lo, hi, omega: 2.0 * PI / (hi - lo), coeffs }
}

/// Piecewise-linear function through samples, zero outside their range.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub x: Vec<f64>,
    pub v: Vec<C>,
}

impl SampledFunction {
    pub fn new(x: Vec<f64>, v: Vec<C>) -> Result<Self> {
        if x.len() != v.len() || x.len() < 2 {
            return Err(Error::input("samples need matching x and value columns with at least two rows"));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::input("sample abscissae must increase strictly"));
        }
        Ok(Self { x, v })
    }

    pub fn support_end(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> C {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return C::new(0.0, 0.0);
        }
        let j = self.x.partition_point(|&t| t <= x).clamp(1, n - 1);
        let (x0, x1) = (self.x[j - 1], self.x[j]);
        let s = (x - x0) / (x1 - x0);
        self.v[j - 1] * (1.0 - s) + self.v[j] * s
    }
}

/// Resolvent extension with the bracket check `[Psi, phi(lambda')](a)`, which equals -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventExtension {
    pub sample: MSample,
    pub bracket_phi: C,
}

/// `m(lambda) = [Psi, theta(lambda')](a)` with `Psi = psi' + (lambda - lambda') R_lambda psi'`.
///
/// `R_lambda` is the inverse of the realization closed at `b` by `[u, psi'](b) = 0`:
/// `R psi' = u_a + c phi` with `u_a = -theta int phi psi' w + phi int theta psi' w`
/// and `c` fixed by the bracket condition, evaluated along the schedule and extrapolated.
pub fn extend_m_resolvent_report(
    problem: &CoefficientProblem,
    anchor: &MSample,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<ResolventExtension> {
    let (ca, sa) = (problem.alpha.cos(), problem.alpha.sin());
    let lp = anchor.lambda;
    let mp = anchor.m;
    let d = lambda - lp;
    let bracket_with = |psi: C, p_dpsi: C| lagrange_bracket(psi, p_dpsi, sa, -ca);
    if d == C::new(0.0, 0.0) {
        let psi_a = (ca + mp * sa, sa - mp * ca);
        return Ok(ResolventExtension {
            sample: MSample { route: MRoute::ResolventExtend, denominator: Some(1.0), ..*anchor },
            bracket_phi: bracket_with(psi_a.0, psi_a.1),
        });
    }
    let (t0, pt0, f0, pf0) = initial_data(problem.alpha);
    let sols = [
        Solution { lambda, u: t0, pu: pt0, group: 0 },
        Solution { lambda, u: f0, pu: pf0, group: 1 },
        Solution { lambda: lp, u: t0 + mp * f0, pu: pt0 + mp * pf0, group: 2 },
    ];
    let g = |i: usize| move |pt: &Point, y: &[C]| y[2 * i] * y[4] * pt.w;
    let sq = |i: usize| move |pt: &Point, y: &[C]| C::new(y[2 * i].norm_sqr() * pt.w, 0.0);
    let accs = [
        Accumulator::quadratic(0, 2, g(0)),
        Accumulator::quadratic(1, 2, g(1)),
        Accumulator::quadratic(0, 0, sq(0)),
        Accumulator::quadratic(1, 1, sq(1)),
    ];
    let snaps = propagate(problem, &sols, &accs, problem.interval.a, &schedule.points, StepControl::new(cfg.ode_tol))?;
    let mut cs = vec![];
    let mut sens = C::new(0.0, 0.0);
    let (mut l2t, mut l2f) = (vec![], vec![]);
    for s in &snaps {
        let i_theta = true_acc(s, 0, (Some(0), Some(2)));
        let i_phi = true_acc(s, 1, (Some(1), Some(2)));
        // brackets with psi' in the product of the two scales
        let e_t = (s.log_scale[0] + s.log_scale[2]).exp();
        let e_f = (s.log_scale[1] + s.log_scale[2]).exp();
        let b_t = lagrange_bracket(s.y[0], s.y[1], s.y[4], s.y[5]) * e_t;
        let b_f = lagrange_bracket(s.y[2], s.y[3], s.y[4], s.y[5]) * e_f;
        if b_f.norm() < 1e-12 * (1.0 + b_t.norm()) {
            return Err(Error::Pole { re: lambda.re, im: lambda.im });
        }
        cs.push(i_phi * b_t / b_f - i_theta);
        sens = b_f;
        l2t.push(true_acc(s, 2, (Some(0), Some(0))).re);
        l2f.push(true_acc(s, 3, (Some(1), Some(1))).re);
    }
    for (name, part) in [("theta", &l2t), ("phi", &l2f)] {
        if !matches!(tail_test_with_floor(part, cfg.tail_factor, cfg.tail_sustain, 100.0 * cfg.ode_tol), TailVerdict::Convergent(_)) {
            return Err(Error::input(format!("{name} is not shown square integrable; the extension needs Case II or III")));
        }
    }
    let n = cs.len();
    let full = wynn(&cs);
    let c = if full.re.is_finite() && full.im.is_finite() { full } else { cs[n - 1] };
    let prev = if n >= 4 { wynn(&cs[..n - 1]) } else { cs[n - 1] };
    // Psi(a) = psi'(a) + d c phi(a)
    let psi_a = ca + mp * sa + d * c * sa;
    let p_dpsi_a = sa - mp * ca - d * c * ca;
    let m = lagrange_bracket(psi_a, p_dpsi_a, ca, sa);
    let spread = (d * (c - prev)).norm();
    // m = -[theta, psi'](b) / [phi, psi'](b); the anchor enters through psi'
    let error_bound = spread + anchor.error_bound * (1.0 + (d * c).norm()) + 100.0 * cfg.ode_tol * (1.0 + m.norm());
    Ok(ResolventExtension {
        sample: MSample {
            lambda,
            m,
            eta: anchor.eta,
            k: anchor.k,
            error_bound,
            route: MRoute::ResolventExtend,
            denominator: Some(sens.norm()),
        },
        bracket_phi: bracket_with(psi_a, p_dpsi_a),
    })
}

pub fn extend_m_resolvent(
    problem: &CoefficientProblem,
    anchor: &MSample,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &LimitConfig,
) -> Result<MSample> {
    extend_m_resolvent_report(problem, anchor, lambda, schedule, cfg).map(|r| r.sample)
}
