//! Adaptive Dormand-Prince 5(4) integration of `u' = (pu')/p`, `(pu')' = (q - lambda w) u`
//! for several solutions at once, with per-group renormalization and
//! quadrature accumulators advanced on the same steps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::CoefficientProblem;

type C = Complex64;

/// Coefficient values at one abscissa, passed to accumulator integrands.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: f64,
    pub p: C,
    pub q: C,
    pub w: f64,
}

/// One solution of the equation: spectral parameter, initial `(u, pu')`, scale group.
#[derive(Debug, Clone, Copy)]
pub struct Solution {
    pub lambda: C,
    pub u: C,
    pub pu: C,
    pub group: usize,
}

type Integrand<'a> = Box<dyn Fn(&Point, &[C]) -> C + 'a>;

/// A quadrature component. Its integrand may depend on the rescaled solution
/// states; `groups` names the scale groups it is homogeneous in (once or twice).
pub struct Accumulator<'a> {
    pub groups: (Option<usize>, Option<usize>),
    pub integrand: Integrand<'a>,
}

impl<'a> Accumulator<'a> {
    pub fn quadratic(g1: usize, g2: usize, f: impl Fn(&Point, &[C]) -> C + 'a) -> Self {
        Self { groups: (Some(g1), Some(g2)), integrand: Box::new(f) }
    }

    pub fn linear(g: usize, f: impl Fn(&Point, &[C]) -> C + 'a) -> Self {
        Self { groups: (Some(g), None), integrand: Box::new(f) }
    }
}

/// State at an output abscissa. Solution `k` occupies `y[2k]` (u) and `y[2k+1]` (pu');
/// true values are `y * exp(log_scale[group])`, accumulators carry the product of
/// their groups' scales times `exp(acc_shift)`.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub x: f64,
    pub y: Vec<C>,
    pub log_scale: Vec<f64>,
    pub acc: Vec<C>,
    pub acc_shift: Vec<f64>,
    /// Total coefficient removed by [`Ortho`]: `original = chi + mu * phi`.
    pub mu: C,
}

/// Keeps solution `chi` nearly orthogonal to solution `phi` (in separate groups)
/// by subtracting multiples of `phi`; `quadratic` lists accumulator triples
/// `(chi chi, chi phi, phi phi)` of sesquilinear forms to update alongside.
#[derive(Debug, Clone)]
pub struct Ortho {
    pub chi: usize,
    pub phi: usize,
    pub quadratic: Vec<[usize; 3]>,
}

impl Snapshot {
    /// Log of the unit of accumulator `j` with the given groups.
    pub fn acc_log_scale(&self, j: usize, groups: (Option<usize>, Option<usize>)) -> f64 {
        groups.0.map_or(0.0, |g| self.log_scale[g]) + groups.1.map_or(0.0, |g| self.log_scale[g]) + self.acc_shift[j]
    }
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_step: f64::INFINITY, max_steps: 20_000_000 }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

struct System<'p, 'a> {
    problem: &'p CoefficientProblem,
    sols: &'p [Solution],
    accs: &'p [Accumulator<'a>],
}

impl System<'_, '_> {
    fn rhs(&self, x: f64, y: &[C], out: &mut [C]) {
        let (p, q, w) = self.problem.coefficients(x);
        let ns = 2 * self.sols.len();
        for (k, s) in self.sols.iter().enumerate() {
            let u = y[2 * k];
            let pu = y[2 * k + 1];
            out[2 * k] = pu / p;
            out[2 * k + 1] = (q - s.lambda * w) * u;
        }
        let pt = Point { x, p, q, w };
        for (j, a) in self.accs.iter().enumerate() {
            out[ns + j] = (a.integrand)(&pt, &y[..ns]);
        }
    }
}

/// Integrate from `x_start` through the monotone list `outputs` (either direction).
pub fn propagate(
    problem: &CoefficientProblem,
    sols: &[Solution],
    accs: &[Accumulator<'_>],
    x_start: f64,
    outputs: &[f64],
    ctl: StepControl,
) -> Result<Vec<Snapshot>> {
    propagate_ortho(problem, sols, accs, x_start, outputs, ctl, None)
}

/// [`propagate`] with optional re-orthogonalization of one solution against another.
pub fn propagate_ortho(
    problem: &CoefficientProblem,
    sols: &[Solution],
    accs: &[Accumulator<'_>],
    x_start: f64,
    outputs: &[f64],
    ctl: StepControl,
    ortho: Option<&Ortho>,
) -> Result<Vec<Snapshot>> {
    if sols.is_empty() {
        return Err(Error::input("no solutions to integrate"));
    }
    if !(ctl.tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let ngroups = sols.iter().map(|s| s.group).max().unwrap() + 1;
    let ns = 2 * sols.len();
    let n = ns + accs.len();
    let sys = System { problem, sols, accs };
    let dir = match outputs.last() {
        Some(&xe) if xe < x_start => -1.0,
        _ => 1.0,
    };
    for w in outputs.windows(2) {
        if (w[1] - w[0]) * dir < 0.0 {
            return Err(Error::input("output points must be monotone"));
        }
    }
    for &xo in outputs {
        if (xo - x_start) * dir < 0.0 {
            return Err(Error::input("output point behind the starting point"));
        }
        if !problem.interval.contains(xo) && xo != problem.interval.a {
            return Err(Error::OutsideInterval { x: xo });
        }
    }

    let mut y = vec![C::new(0.0, 0.0); n];
    for (k, s) in sols.iter().enumerate() {
        y[2 * k] = s.u;
        y[2 * k + 1] = s.pu;
    }
    let mut log_scale = vec![0.0; ngroups];
    let mut comp = vec![C::new(0.0, 0.0); accs.len()];
    let mut shift = vec![0.0f64; accs.len()];
    let group_members: Vec<Vec<usize>> =
        (0..ngroups).map(|g| sols.iter().enumerate().filter(|(_, s)| s.group == g).map(|(k, _)| k).collect()).collect();
    renormalize(&mut y, &mut comp, &mut shift, &mut log_scale, &group_members, accs, ns, true);

    if let Some(o) = ortho {
        if o.chi >= sols.len() || o.phi >= sols.len() || sols[o.chi].group == sols[o.phi].group {
            return Err(Error::input("orthogonalized solutions must lie in distinct groups"));
        }
    }
    let mut mu = C::new(0.0, 0.0);
    let mut out = Vec::with_capacity(outputs.len());
    let mut x = x_start;
    let mut k1 = vec![C::new(0.0, 0.0); n];
    sys.rhs(x, &y, &mut k1);
    let span = outputs.last().map_or(0.0, |xe| (xe - x_start).abs());
    let mut h = {
        let d0 = group_norm_all(&y[..ns]);
        let d1 = group_norm_all(&k1[..ns]);
        let h0 = if d1 > 0.0 { 0.01 * d0 / d1 } else { 1e-3 };
        h0.min(ctl.max_step).min(span.max(1e-12)).max(1e-10)
    };
    let mut stages = vec![vec![C::new(0.0, 0.0); n]; 6];
    let mut ytmp = vec![C::new(0.0, 0.0); n];
    let mut ynew = vec![C::new(0.0, 0.0); n];
    let mut k7 = vec![C::new(0.0, 0.0); n];
    let mut steps = 0usize;

    for &target in outputs {
        while (target - x) * dir > 0.0 {
            steps += 1;
            if steps > ctl.max_steps {
                return Err(Error::StepUnderflow { x });
            }
            let remaining = (target - x).abs();
            let mut hs = h.min(ctl.max_step);
            let hit = hs >= remaining * (1.0 - 1e-12);
            if hit {
                hs = remaining;
            }
            let hh = hs * dir;
            // stages
            for i in 0..n {
                ytmp[i] = y[i] + k1[i] * (hh * A21);
            }
            sys.rhs(x + C2 * hh, &ytmp, &mut stages[0]);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A31 + stages[0][i] * A32) * hh;
            }
            sys.rhs(x + C3 * hh, &ytmp, &mut stages[1]);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A41 + stages[0][i] * A42 + stages[1][i] * A43) * hh;
            }
            sys.rhs(x + C4 * hh, &ytmp, &mut stages[2]);
            for i in 0..n {
                ytmp[i] = y[i]
                    + (k1[i] * A51 + stages[0][i] * A52 + stages[1][i] * A53 + stages[2][i] * A54) * hh;
            }
            sys.rhs(x + C5 * hh, &ytmp, &mut stages[3]);
            for i in 0..n {
                ytmp[i] = y[i]
                    + (k1[i] * A61
                        + stages[0][i] * A62
                        + stages[1][i] * A63
                        + stages[2][i] * A64
                        + stages[3][i] * A65)
                        * hh;
            }
            sys.rhs(x + hh, &ytmp, &mut stages[4]);
            let xn = if hit { target } else { x + hh };
            let mut incr_acc = vec![C::new(0.0, 0.0); n - ns];
            for i in 0..n {
                let incr = (k1[i] * B1
                    + stages[1][i] * B3
                    + stages[2][i] * B4
                    + stages[3][i] * B5
                    + stages[4][i] * B6)
                    * hh;
                if i < ns {
                    ynew[i] = y[i] + incr;
                } else {
                    incr_acc[i - ns] = incr;
                    ynew[i] = y[i] + incr;
                }
            }
            sys.rhs(xn, &ynew, &mut k7);
            let mut err = 0.0f64;
            for members in &group_members {
                let mut sc = 0.0f64;
                for &k in members {
                    for i in [2 * k, 2 * k + 1] {
                        sc = sc.max(y[i].norm()).max(ynew[i].norm());
                    }
                }
                let sc = (sc * ctl.tol).max(1e-300);
                for &k in members {
                    for i in [2 * k, 2 * k + 1] {
                        let e = (k1[i] * E1
                            + stages[1][i] * E3
                            + stages[2][i] * E4
                            + stages[3][i] * E5
                            + stages[4][i] * E6
                            + k7[i] * E7)
                            * hh;
                        err = err.max(e.norm() / sc);
                    }
                }
            }
            if !err.is_finite() {
                h = hs * 0.1;
                if h < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::StepUnderflow { x });
                }
                continue;
            }
            if err <= 1.0 {
                y[..ns].copy_from_slice(&ynew[..ns]);
                for j in 0..accs.len() {
                    let inc = if shift[j] == 0.0 { incr_acc[j] } else { incr_acc[j] * (-shift[j]).exp() };
                    let yk = inc - comp[j];
                    let t = y[ns + j] + yk;
                    comp[j] = (t - y[ns + j]) - yk;
                    y[ns + j] = t;
                }
                x = xn;
                std::mem::swap(&mut k1, &mut k7);
                let mut changed = false;
                if let Some(o) = ortho {
                    changed |= reorthogonalize(o, sols, &mut y, &mut comp, &shift, &log_scale, ns, &mut mu);
                }
                changed |= renormalize(&mut y, &mut comp, &mut shift, &mut log_scale, &group_members, accs, ns, false);
                if changed {
                    sys.rhs(x, &y, &mut k1);
                }
                let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                h = hs * fac.clamp(0.2, 5.0);
                if hit {
                    h = h.max(hs);
                }
            } else {
                let fac = 0.9 * err.powf(-0.2);
                h = hs * fac.clamp(0.1, 0.9);
                if h < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::StepUnderflow { x });
                }
            }
        }
        let acc = (0..accs.len()).map(|j| y[ns + j] - comp[j]).collect();
        out.push(Snapshot { x: target, y: y[..ns].to_vec(), log_scale: log_scale.clone(), acc, acc_shift: shift.clone(), mu });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn reorthogonalize(
    o: &Ortho,
    sols: &[Solution],
    y: &mut [C],
    comp: &mut [C],
    shift: &[f64],
    log_scale: &[f64],
    ns: usize,
    mu: &mut C,
) -> bool {
    let (ic, ip) = (o.chi, o.phi);
    let chi = [y[2 * ic], y[2 * ic + 1]];
    let phi = [y[2 * ip], y[2 * ip + 1]];
    let nphi = phi[0].norm_sqr() + phi[1].norm_sqr();
    let nchi = chi[0].norm_sqr() + chi[1].norm_sqr();
    if nphi == 0.0 || nchi == 0.0 {
        return false;
    }
    let inner = chi[0] * phi[0].conj() + chi[1] * phi[1].conj();
    if inner.norm_sqr() < 0.09 * nphi * nchi {
        return false;
    }
    let c = inner / nphi;
    y[2 * ic] -= c * phi[0];
    y[2 * ic + 1] -= c * phi[1];
    *mu += c * (log_scale[sols[ic].group] - log_scale[sols[ip].group]).exp();
    for t in &o.quadratic {
        for &j in t {
            y[ns + j] -= comp[j];
            comp[j] = C::new(0.0, 0.0);
        }
        let (cc, cp, pp) = (y[ns + t[0]], y[ns + t[1]], y[ns + t[2]]);
        let (sc, sp, spp) = (shift[t[0]], shift[t[1]], shift[t[2]]);
        let rel = |from: f64, to: f64| if from == to { 1.0 } else { (from - to).exp() };
        y[ns + t[0]] = cc - 2.0 * (c.conj() * cp).re * rel(sp, sc) + c.norm_sqr() * pp * rel(spp, sc);
        y[ns + t[1]] = cp - c * pp * rel(spp, sp);
    }
    true
}

fn group_norm_all(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rescale every group whose norm left `[0.5, 2]`; returns true if anything changed.
/// Accumulators that grow past `1e100` move their magnitude into `shift`.
#[allow(clippy::too_many_arguments)]
fn renormalize(
    y: &mut [C],
    comp: &mut [C],
    shift: &mut [f64],
    log_scale: &mut [f64],
    members: &[Vec<usize>],
    accs: &[Accumulator<'_>],
    ns: usize,
    force: bool,
) -> bool {
    let mut changed = false;
    for (g, mem) in members.iter().enumerate() {
        let nrm = mem.iter().map(|&k| y[2 * k].norm_sqr() + y[2 * k + 1].norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            continue;
        }
        if !force && (0.5..=2.0).contains(&nrm) {
            continue;
        }
        if force && (nrm - 1.0).abs() < 1e-15 {
            continue;
        }
        changed = true;
        let inv = 1.0 / nrm;
        for &k in mem {
            y[2 * k] *= inv;
            y[2 * k + 1] *= inv;
        }
        log_scale[g] += nrm.ln();
        for (j, a) in accs.iter().enumerate() {
            let mut f = 1.0;
            if a.groups.0 == Some(g) {
                f *= inv;
            }
            if a.groups.1 == Some(g) {
                f *= inv;
            }
            if f != 1.0 {
                y[ns + j] *= f;
                comp[j] *= f;
                let m = y[ns + j].norm();
                if m > 1e100 && m.is_finite() {
                    y[ns + j] /= m;
                    comp[j] /= m;
                    shift[j] += m.ln();
                }
            }
        }
    }
    changed
}

/// Fundamental pair at `x` in the split form `theta = chi + mu phi`, where `chi`
/// is kept nearly orthogonal to `phi` and carries its own scale. Values are
/// rescaled: true `phi = phi * exp(log_scale)`, true `chi = chi * exp(chi_log_scale)`.
/// `theta`, `p_dtheta` are given in the scale of `phi`. Quadratures over `[a, x]`
/// of the rotated energy form (with `lambda`) and of the `w`-weighted form are
/// stored for the pairs `(chi, chi)`, `(chi, phi)`, `(phi, phi)` in their own scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionFrame {
    pub x: f64,
    pub lambda: C,
    pub eta: f64,
    pub theta: C,
    pub p_dtheta: C,
    pub phi: C,
    pub p_dphi: C,
    pub log_scale: f64,
    pub chi: C,
    pub p_dchi: C,
    pub chi_log_scale: f64,
    pub mu: C,
    pub energy_chi: f64,
    pub energy_cross: C,
    pub energy_phi: f64,
    pub l2w_chi: f64,
    pub l2w_cross: C,
    pub l2w_phi: f64,
    /// Extra log factor on `energy_chi` and `l2w_chi`.
    pub chi_quad_shift: f64,
}

impl SolutionFrame {
    /// `exp(chi_log_scale - log_scale)`.
    pub fn chi_ratio(&self) -> f64 {
        (self.chi_log_scale - self.log_scale).exp()
    }

    /// `[theta, phi]` with scaling removed; equals -1 in exact arithmetic.
    pub fn wronskian(&self) -> C {
        lagrange_bracket(self.chi, self.p_dchi, self.phi, self.p_dphi)
            * (self.chi_log_scale + self.log_scale).exp()
    }

    fn combine(&self, l: Option<C>, cc: f64, cp: C, pp: f64) -> f64 {
        match l {
            None => pp,
            Some(l) => {
                let nu = self.mu + l;
                let r = self.chi_ratio();
                let mut v = 2.0 * (nu.conj() * cp).re * r + nu.norm_sqr() * pp;
                if cc != 0.0 {
                    v += cc * (2.0 * (self.chi_log_scale - self.log_scale) + self.chi_quad_shift).exp();
                }
                v
            }
        }
    }

    fn true_chi(&self, nu_chi: C, cc: f64, cp: C, pp: f64) -> f64 {
        let head = if cc != 0.0 { cc * (2.0 * self.chi_log_scale + self.chi_quad_shift).exp() } else { 0.0 };
        let rest = 2.0 * (nu_chi.conj() * cp).re + nu_chi.norm_sqr() * pp;
        head + if rest != 0.0 { rest * (2.0 * self.chi_log_scale).exp() } else { 0.0 }
    }

    /// True `int |y|^2 w` of `theta + l phi` where `mu + l = nu_chi exp(chi_log_scale - log_scale)`;
    /// stays finite when the scale ratio underflows.
    pub fn l2w_chi_form(&self, nu_chi: C) -> f64 {
        self.true_chi(nu_chi, self.l2w_chi, self.l2w_cross, self.l2w_phi)
    }

    /// Rotated energy counterpart of [`Self::l2w_chi_form`].
    pub fn energy_chi_form(&self, nu_chi: C) -> f64 {
        self.true_chi(nu_chi, self.energy_chi, self.energy_cross, self.energy_phi)
    }

    /// Rotated energy (with `lambda`) of `theta + l phi`, or of `phi` for `None`,
    /// in units of `exp(2 log_scale)`.
    pub fn scaled_energy(&self, l: Option<C>) -> f64 {
        self.combine(l, self.energy_chi, self.energy_cross, self.energy_phi)
    }

    /// `int |y|^2 w` for the same solutions, in units of `exp(2 log_scale)`.
    pub fn scaled_l2w(&self, l: Option<C>) -> f64 {
        self.combine(l, self.l2w_chi, self.l2w_cross, self.l2w_phi)
    }

    /// Rescaled `(y, p y')` of `theta + l phi` in the scale of `phi`.
    pub fn combination(&self, l: C) -> (C, C) {
        let nu = self.mu + l;
        let r = self.chi_ratio();
        (self.chi * r + nu * self.phi, self.p_dchi * r + nu * self.p_dphi)
    }
}

/// Initial data `theta(a) = cos alpha, p theta'(a) = sin alpha, phi(a) = sin alpha, p phi'(a) = -cos alpha`.
pub fn initial_data(alpha: C) -> (C, C, C, C) {
    (alpha.cos(), alpha.sin(), alpha.sin(), -alpha.cos())
}

/// Integrate `theta` and `phi` from `a` to each point of `outputs`.
pub fn integrate_pair(
    problem: &CoefficientProblem,
    lambda: C,
    eta: f64,
    outputs: &[f64],
    tol: f64,
) -> Result<Vec<SolutionFrame>> {
    let (t0, pt0, f0, pf0) = initial_data(problem.alpha);
    // start chi orthogonal to phi so theta = chi + mu phi from the outset
    let nphi = f0.norm_sqr() + pf0.norm_sqr();
    let mu0 = (t0 * f0.conj() + pt0 * pf0.conj()) / nphi;
    let sols = [
        Solution { lambda, u: t0 - mu0 * f0, pu: pt0 - mu0 * pf0, group: 0 },
        Solution { lambda, u: f0, pu: pf0, group: 1 },
    ];
    let rot = C::from_polar(1.0, eta);
    let weights = move |pt: &Point| -> (f64, f64) { ((rot * pt.p).re, (rot * (pt.q - lambda * pt.w)).re) };
    let e = move |i: usize, j: usize| {
        move |pt: &Point, y: &[C]| {
            let (wp, wq) = weights(pt);
            let di = y[2 * i + 1] / pt.p;
            let dj = y[2 * j + 1] / pt.p;
            di * dj.conj() * wp + y[2 * i] * y[2 * j].conj() * wq
        }
    };
    let g = |i: usize, j: usize| move |pt: &Point, y: &[C]| y[2 * i] * y[2 * j].conj() * pt.w;
    let accs = [
        Accumulator::quadratic(0, 0, e(0, 0)),
        Accumulator::quadratic(0, 1, e(0, 1)),
        Accumulator::quadratic(1, 1, e(1, 1)),
        Accumulator::quadratic(0, 0, g(0, 0)),
        Accumulator::quadratic(0, 1, g(0, 1)),
        Accumulator::quadratic(1, 1, g(1, 1)),
    ];
    let ortho = Ortho { chi: 0, phi: 1, quadratic: vec![[0, 1, 2], [3, 4, 5]] };
    let snaps =
        propagate_ortho(problem, &sols, &accs, problem.interval.a, outputs, StepControl::new(tol), Some(&ortho))?;
    Ok(snaps
        .into_iter()
        .map(|s| {
            let mu = s.mu + mu0;
            let r = (s.log_scale[0] - s.log_scale[1]).exp();
            let cs = s.acc_shift[0].max(s.acc_shift[3]);
            let to = |j: usize, val: f64, target: f64| val * (s.acc_shift[j] - target).exp();
            SolutionFrame {
                x: s.x,
                lambda,
                eta,
                theta: s.y[0] * r + mu * s.y[2],
                p_dtheta: s.y[1] * r + mu * s.y[3],
                phi: s.y[2],
                p_dphi: s.y[3],
                log_scale: s.log_scale[1],
                chi: s.y[0],
                p_dchi: s.y[1],
                chi_log_scale: s.log_scale[0],
                mu,
                energy_chi: to(0, s.acc[0].re, cs),
                energy_cross: s.acc[1] * s.acc_shift[1].exp(),
                energy_phi: to(2, s.acc[2].re, 0.0),
                l2w_chi: to(3, s.acc[3].re, cs),
                l2w_cross: s.acc[4] * s.acc_shift[4].exp(),
                l2w_phi: to(5, s.acc[5].re, 0.0),
                chi_quad_shift: cs,
            }
        })
        .collect())
}

/// `[u, v] = u (p v') - v (p u')`.
#[inline]
pub fn lagrange_bracket(u: C, p_du: C, v: C, p_dv: C) -> C {
    u * p_dv - v * p_du
}

/// Which solution an energy quadrature refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyTarget {
    Phi,
    /// `theta + l phi`.
    Combination(C),
}

/// True value of `int_a^x Re[e^{i eta}(p|y'|^2 + (q - shift w)|y|^2)]` for the
/// chosen solution; `shift` is either `lambda` or a translation point `K`.
pub fn energy(frame: &SolutionFrame, target: EnergyTarget, shift: C) -> f64 {
    let l = match target {
        EnergyTarget::Phi => None,
        EnergyTarget::Combination(l) => Some(l),
    };
    let corr = (C::from_polar(1.0, frame.eta) * (frame.lambda - shift)).re;
    let scaled = frame.scaled_energy(l) + corr * frame.scaled_l2w(l);
    if scaled == 0.0 {
        return 0.0;
    }
    scaled * (2.0 * frame.log_scale).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn true_vals(f: &SolutionFrame) -> (C, C, C, C) {
        let s = f.log_scale.exp();
        (f.theta * s, f.p_dtheta * s, f.phi * s, f.p_dphi * s)
    }

    #[test]
    fn free_lambda_zero_is_linear() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let fr = integrate_pair(&p, c(0.0, 0.0), 0.0, &[3.0], 1e-12).unwrap();
        let (t, _, f, _) = true_vals(&fr[0]);
        assert!((t - c(1.0, 0.0)).norm() < 1e-10);
        assert!((f - c(-2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn free_lambda_one_trig() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let fr = integrate_pair(&p, c(1.0, 0.0), 0.0, &[1.0 + PI / 2.0], 1e-12).unwrap();
        let (t, _, f, _) = true_vals(&fr[0]);
        assert!(t.norm() < 1e-9);
        assert!((f - c(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn bracket_identities() {
        for alpha in [0.0, 0.3, 1.2, -2.0] {
            let (t, pt, f, pf) = initial_data(c(alpha, 0.1));
            assert!((lagrange_bracket(t, pt, f, pf) + 1.0).norm() < 1e-14);
            assert_eq!(lagrange_bracket(t, pt, t, pt), c(0.0, 0.0));
            let m = c(0.7, -1.3);
            assert!((lagrange_bracket(t + m * f, pt + m * pf, t, pt) - m).norm() < 1e-14);
        }
    }

    #[test]
    fn oscillator_wronskian_preserved() {
        let p = CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, c(PI / 2.0, 0.0)).unwrap();
        let fr = integrate_pair(&p, c(0.0, 1.0), PI / 2.0, &[2.0, 5.0, 10.0], 1e-10).unwrap();
        for f in &fr {
            assert!((f.wronskian() + 1.0).norm() < 1e-9, "{} {} {:?}", f.x, f.log_scale, f.wronskian());
        }
        assert!(fr[2].log_scale > 30.0);
    }

    #[test]
    fn energy_matches_closed_form_quadrature() {
        // phi = -sin(sqrt(i)(x-1))/sqrt(i); with lambda = i the integrand reduces to |phi|^2.
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let lam = c(0.0, 1.0);
        let fr = integrate_pair(&p, lam, PI / 2.0, &[2.0], 1e-12).unwrap();
        let e = energy(&fr[0], EnergyTarget::Phi, lam);
        assert!(energy(&fr[0], EnergyTarget::Phi, c(0.0, 0.0)).abs() < 1e-12);
        let k = lam.sqrt();
        let n = 20000;
        let mut s = 0.0;
        for j in 0..=n {
            let x = j as f64 / n as f64;
            let phi = -(k * x).sin() / k;
            let wgt = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            s += wgt * phi.norm_sqr();
        }
        s /= 3.0 * n as f64;
        assert!((e - s).abs() < 1e-10 * s.max(1.0), "{e} vs {s}");
    }

    #[test]
    fn energy_zero_solution_and_monotone() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let lam = c(0.0, 1.0);
        let fr = integrate_pair(&p, lam, PI / 2.0, &[1.5, 3.0, 6.0], 1e-10).unwrap();
        let e: Vec<f64> = fr.iter().map(|f| energy(f, EnergyTarget::Phi, lam)).collect();
        assert!(e[0] < e[1] && e[1] < e[2]);
        let f0 = integrate_pair(&p, lam, PI / 2.0, &[1.0], 1e-10).unwrap();
        assert_eq!(energy(&f0[0], EnergyTarget::Phi, lam), 0.0);
    }

    #[test]
    fn backward_propagation_inverts_forward() {
        let p = CoefficientProblem::oscillator(c(0.0, 1.0), 2.0, c(0.0, 0.0)).unwrap();
        let lam = c(1.0, 0.5);
        let s = [Solution { lambda: lam, u: c(0.3, 0.1), pu: c(-0.2, 0.4), group: 0 }];
        let fw = propagate(&p, &s, &[], 0.0, &[3.0], StepControl::new(1e-12)).unwrap();
        let scale = fw[0].log_scale[0].exp();
        let back = [Solution { lambda: lam, u: fw[0].y[0] * scale, pu: fw[0].y[1] * scale, group: 0 }];
        let bw = propagate(&p, &back, &[], 3.0, &[0.0], StepControl::new(1e-12)).unwrap();
        let sc = bw[0].log_scale[0].exp();
        assert!((bw[0].y[0] * sc - c(0.3, 0.1)).norm() < 1e-9);
        assert!((bw[0].y[1] * sc - c(-0.2, 0.4)).norm() < 1e-9);
    }
}
