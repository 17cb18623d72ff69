//! Numerical-range geometry: the closed convex set `Q` generated by `q/w + r p`,
//! admissible rotation pairs `(eta, K)`, the boundary constraint `S(alpha)`, and
//! the enclosures `Q(alpha)` and `Q_b(alpha)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::{CoefficientProblem, FamilyTag, TruncationSchedule};

type C = Complex64;

/// Recession cone of a region, classified from its generating directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cone {
    Zero,
    /// Directions with argument in `[lo, hi]`, `hi - lo < pi`.
    Wedge { lo: f64, hi: f64 },
    /// Closed half-plane of directions `[lo, lo + pi]`.
    HalfPlane { lo: f64 },
    /// The two directions `theta` and `theta + pi`.
    Line { theta: f64 },
    Plane,
}

const ANGLE_EPS: f64 = 1e-12;
/// `|cos(alpha) conj(sin(alpha))|` below this counts as zero (`alpha` a multiple of `pi/2`).
const ALPHA_EPS: f64 = 1e-14;
const I: C = C { re: 0.0, im: 1.0 };

impl Cone {
    pub fn from_directions(dirs: &[C]) -> Cone {
        Self::classify(dirs).0
    }

    /// The cone and the input directions on its boundary (counter-clockwise).
    fn classify(dirs: &[C]) -> (Cone, Vec<C>) {
        let mut ang: Vec<(f64, C)> =
            dirs.iter().filter(|d| d.norm() > 0.0).map(|d| (d.arg().rem_euclid(TAU), d / d.norm())).collect();
        if ang.is_empty() {
            return (Cone::Zero, vec![]);
        }
        ang.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        ang.dedup_by(|a, b| (a.0 - b.0).abs() < ANGLE_EPS);
        let n = ang.len();
        let (mut gap, mut after) = (TAU - (ang[n - 1].0 - ang[0].0), 0usize);
        for i in 0..n.saturating_sub(1) {
            let g = ang[i + 1].0 - ang[i].0;
            if g > gap {
                gap = g;
                after = i + 1;
            }
        }
        let (lo, d_lo) = ang[after];
        let d_hi = ang[(after + n - 1) % n].1;
        let width = TAU - gap;
        if width < PI - 1e-10 {
            let ext = if n == 1 { vec![d_lo] } else { vec![d_lo, d_hi] };
            (Cone::Wedge { lo, hi: lo + width }, ext)
        } else if width <= PI + 1e-10 {
            let on_ends = ang.iter().all(|&(a, _)| {
                let d = (a - lo).rem_euclid(TAU);
                d < 1e-10 || (d - PI).abs() < 1e-10 || (TAU - d) < 1e-10
            });
            if on_ends {
                (Cone::Line { theta: lo }, vec![d_lo, d_hi])
            } else {
                (Cone::HalfPlane { lo }, vec![d_lo, d_hi])
            }
        } else {
            (Cone::Plane, vec![])
        }
    }
}

/// Admissible rotations `u = e^{i eta}` (region in a half-plane `Re[(z - K) u] >= 0`).
#[derive(Debug, Clone, PartialEq)]
pub enum EtaSet {
    All,
    /// Counter-clockwise closed arc from `start` to `end` of angular length `len`.
    Arc { start: C, end: C, len: f64 },
    Points(Vec<C>),
    Empty,
}

/// Hull of sampled `q/w` values plus a recession cone from the directions of `p`.
/// With `alpha` attached the region stands for `Q(alpha)` rather than `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRegion {
    pub vertices: Vec<C>,
    pub recession_directions: Vec<C>,
    pub cone: Cone,
    pub alpha: Option<C>,
}

/// `(eta, K)` with `Q` in the closed half-plane `Re[(z - K) e^{i eta}] >= 0`;
/// `delta` is the distance from `source_lambda0` to the boundary line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPair {
    pub eta: f64,
    pub k: C,
    pub source_lambda0: C,
    pub delta: f64,
}

impl RotationPair {
    /// `Re[(lambda - K) e^{i eta}]`; negative inside the half-plane `Lambda_{eta,K}`.
    pub fn offset(&self, lambda: C) -> f64 {
        ((lambda - self.k) * C::from_polar(1.0, self.eta)).re
    }

    pub fn contains(&self, lambda: C) -> bool {
        self.offset(lambda) < 0.0
    }

    /// Distance from `lambda` to the half-plane boundary when inside it.
    pub fn distance(&self, lambda: C) -> f64 {
        -self.offset(lambda)
    }
}

/// Probe resolution for `Q(alpha)` membership.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub eta_points: usize,
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { eta_points: 720, tol: 1e-9 }
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

impl ConvexRegion {
    pub fn new(points: &[C], directions: &[C]) -> Self {
        let (cone, ext) = Cone::classify(directions);
        Self { vertices: convex_hull(points), recession_directions: ext, cone, alpha: None }
    }

    pub fn empty() -> Self {
        Self { vertices: vec![], recession_directions: vec![], cone: Cone::Zero, alpha: None }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn with_alpha(mut self, alpha: C) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// `min Re[z u]` over the vertices, the support function for admissible `u`.
    pub fn support_u(&self, u: C) -> f64 {
        self.vertices.iter().map(|v| (v * u).re).fold(f64::INFINITY, f64::min)
    }

    pub fn support(&self, eta: f64) -> f64 {
        self.support_u(C::from_polar(1.0, eta))
    }

    pub fn admissible_eta(&self) -> EtaSet {
        if self.is_empty() {
            return EtaSet::All;
        }
        let d = &self.recession_directions;
        match self.cone {
            Cone::Zero => EtaSet::All,
            Cone::Wedge { lo, hi } => EtaSet::Arc {
                start: -I * d[0].conj(),
                end: I * d[d.len() - 1].conj(),
                len: (PI - (hi - lo)).max(0.0),
            },
            Cone::HalfPlane { .. } => EtaSet::Points(vec![-I * d[0].conj()]),
            Cone::Line { .. } => EtaSet::Points(vec![I * d[0].conj(), -I * d[0].conj()]),
            Cone::Plane => EtaSet::Empty,
        }
    }

    pub fn eta_is_admissible(&self, eta: f64) -> bool {
        let u = C::from_polar(1.0, eta);
        !matches!(self.cone, Cone::Plane) && self.recession_directions.iter().all(|d| (d * u).re >= -1e-10)
    }

    /// Nearest point of the region (`Q`, ignoring `alpha`) and its distance;
    /// distance 0 when `z` lies inside.
    pub fn nearest_point(&self, z: C) -> (C, f64) {
        if self.is_empty() {
            return (C::new(f64::NAN, f64::NAN), f64::INFINITY);
        }
        if self.cone == Cone::Plane {
            return (z, 0.0);
        }
        // feet of perpendiculars win ties so the certificate direction stays exact
        let mut best = (self.vertices[0], (z - self.vertices[0]).norm());
        let mut consider = |p: C, is_foot: bool| {
            let d = (z - p).norm();
            if d < best.1 || (is_foot && d <= best.1 * (1.0 + 1e-14)) {
                best = (p, d);
            }
        };
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            consider(a, false);
            if n > 1 {
                let b = self.vertices[(i + 1) % n];
                let (p, is_foot) = project_segment(z, a, b);
                consider(p, is_foot);
            }
            for d in &self.recession_directions {
                let t = ((z - a) * d.conj()).re;
                if t > 0.0 {
                    consider(foot(z, a, *d), true);
                }
            }
        }
        let (k, d) = best;
        if d <= 1e-13 * z.norm().max(k.norm()).max(1.0) {
            return (k, 0.0);
        }
        // certificate: the line through K normal to z - K supports the region
        let u = (k - z).conj() / d;
        let supports = self.vertices.iter().all(|v| ((v - k) * u).re >= -1e-10 * (v - k).norm())
            && self.recession_directions.iter().all(|dv| (dv * u).re >= -1e-10);
        if supports {
            (k, d)
        } else {
            (z, 0.0)
        }
    }

    /// Membership in `Q`, ignoring `alpha`.
    pub fn contains_q(&self, z: C) -> bool {
        !self.is_empty() && self.nearest_point(z).1 == 0.0
    }

    /// Membership in the region it stands for (`Q(alpha)` when `alpha` is attached).
    pub fn contains(&self, z: C) -> bool {
        match self.alpha {
            Some(a) => q_alpha_member(self, a, z, &ProbeConfig::default()),
            None => self.contains_q(z),
        }
    }
}

fn project_segment(z: C, a: C, b: C) -> (C, bool) {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (a, false);
    }
    let t = ((z - a) * d.conj()).re / l2;
    if t <= 0.0 {
        (a, false)
    } else if t >= 1.0 {
        (b, false)
    } else {
        (foot(z, if t <= 0.5 { a } else { b }, d), true)
    }
}

/// Orthogonal projection of `z` onto the line through `a` along `d`, moving `z`
/// only in the normal direction.
fn foot(z: C, a: C, d: C) -> C {
    let n = C::i() * d / d.norm();
    z - n * ((z - a) * n.conj()).re
}

fn cross(o: C, a: C, b: C) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Andrew's monotone chain; counter-clockwise, collinear points removed.
pub fn convex_hull(points: &[C]) -> Vec<C> {
    let mut pts: Vec<C> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    pts.dedup_by(|a, b| (*a - *b).norm() <= 1e-14 * scale);
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<C> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &C>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let o = hull[hull.len() - 2];
                let a = hull[hull.len() - 1];
                let tol = 1e-14 * (a - o).norm() * (p - o).norm();
                if cross(o, a, p) <= tol {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.is_empty() {
        hull.push(pts[0]);
    }
    hull
}

/// 512 log-spaced points on `[a, a + 1e8]` (infinite `b`) or geometrically toward a finite `b`.
pub fn default_grid(problem: &CoefficientProblem) -> Vec<f64> {
    let n = 512;
    let iv = problem.interval;
    let mut g: Vec<f64> = if iv.is_unbounded() {
        (0..n).map(|k| iv.a + 1e-6 * 1e14f64.powf(k as f64 / (n - 1) as f64)).collect()
    } else {
        let span = iv.b - iv.a;
        (0..n).map(|k| iv.b - span * 1e-12f64.powf(k as f64 / (n - 1) as f64)).collect()
    };
    g[0] = iv.a;
    g
}

/// Region from `q/w` samples on `x_grid` with cone spanned by the directions of `p`;
/// exactly known tail directions of the built-in families are added.
pub fn build_region(problem: &CoefficientProblem, x_grid: &[f64]) -> Result<ConvexRegion> {
    if x_grid.is_empty() {
        return Err(Error::input("empty x grid"));
    }
    let mut pts = Vec::with_capacity(x_grid.len());
    let mut dirs = Vec::with_capacity(x_grid.len() + 2);
    for &x in x_grid {
        let (p, q, w) = crate::problem::evaluate(problem, x)?;
        pts.push(q / w);
        dirs.push(p / p.norm());
    }
    let n = pts.len();
    let chord = (n >= 4 && pts[n - 1].norm() > 1e3 * pts[n / 2].norm().max(1.0)).then(|| pts[n - 1] - pts[n - 2]);
    // keep samples with |q/w| below the cap; the cone supplies the tail
    let cap = 1e6 * pts[0].norm().max(1.0);
    if let Some(cut) = pts.iter().position(|z| z.norm() > cap) {
        pts.truncate(cut.max(2));
    }
    let tail = problem.tail_directions();
    if let Some(d) = tail.p {
        dirs.push(d);
    }
    let builtin = matches!(problem.family_tag, FamilyTag::Free | FamilyTag::PowerLaw(_) | FamilyTag::OscillatorSector { .. });
    match tail.q_over_w {
        Some(d) => dirs.push(d),
        None if problem.interval.is_unbounded() && !builtin => {
            if let Some(d) = chord.filter(|d| d.norm() > 0.0) {
                dirs.push(d);
            }
        }
        None => {}
    }
    Ok(ConvexRegion::new(&pts, &dirs))
}

pub fn build_default_region(problem: &CoefficientProblem) -> Result<ConvexRegion> {
    build_region(problem, &default_grid(problem))
}

/// `Re[e^{i eta} cos(alpha) conj(sin(alpha))] <= 0`.
pub fn satisfies_alpha(eta: f64, alpha: C) -> bool {
    let c = alpha.cos() * alpha.sin().conj();
    (C::from_polar(1.0, eta) * c).re <= ALPHA_EPS
}

/// Feasible rotations: admissible for the region and, with `alpha`, inside `S(alpha)`.
fn feasible_eta(region: &ConvexRegion, alpha: Option<C>) -> EtaSet {
    let adm = region.admissible_eta();
    let c = match alpha {
        Some(a) => a.cos() * a.sin().conj(),
        None => C::new(0.0, 0.0),
    };
    if c.norm() <= ALPHA_EPS {
        return adm;
    }
    let chat = c / c.norm();
    let (s_start, s_end) = (I * chat.conj(), -I * chat.conj());
    let in_s = |u: C| (u * c).re <= ALPHA_EPS;
    match adm {
        EtaSet::All => EtaSet::Arc { start: s_start, end: s_end, len: PI },
        EtaSet::Empty => EtaSet::Empty,
        EtaSet::Points(p) => {
            let f: Vec<C> = p.into_iter().filter(|&u| in_s(u)).collect();
            if f.is_empty() {
                EtaSet::Empty
            } else {
                EtaSet::Points(f)
            }
        }
        EtaSet::Arc { start, end, len } => {
            let s = (s_start / start).arg().rem_euclid(TAU);
            let mut best: Option<(C, C, f64)> = None;
            let mut offer = |lo: f64, hi: f64, u_lo: C, u_hi: C| {
                if hi >= lo - 1e-13 {
                    let l = (hi - lo).max(0.0);
                    if best.is_none_or(|b| l > b.2) {
                        best = Some((u_lo, u_hi, l));
                    }
                }
            };
            let hi1 = (s + PI).min(len);
            offer(s, hi1, s_start, if s + PI < len { s_end } else { end });
            let hi2 = (s + PI - TAU).min(len);
            offer(0.0, hi2, start, if s + PI - TAU < len { s_end } else { end });
            if !(1e-13..=TAU - 1e-13).contains(&s) {
                offer(0.0, PI.min(len), start, if PI < len { s_end } else { end });
            }
            match best {
                Some((a, b, l)) => EtaSet::Arc { start: a, end: b, len: l },
                None => EtaSet::Empty,
            }
        }
    }
}

/// Minimize `F(u) = Re[lambda u] - h(u)` over a feasible set; returns `(u, F)`.
fn minimize_offset(region: &ConvexRegion, lambda: C, set: &EtaSet, n: usize) -> Option<(C, f64)> {
    let f = |u: C| (lambda * u).re - region.support_u(u);
    let (start, end, len) = match set {
        EtaSet::Empty => return None,
        EtaSet::Points(p) => {
            return p.iter().map(|&u| (u, f(u))).min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        }
        EtaSet::All => (C::new(1.0, 0.0), C::new(1.0, 0.0), TAU),
        EtaSet::Arc { start, end, len } => (*start, *end, *len),
    };
    let n = n.max(2);
    let a0 = start.arg();
    let at = |t: f64| C::from_polar(1.0, a0 + t);
    let ts: Vec<f64> = (0..=n).map(|k| len * k as f64 / n as f64).collect();
    let us: Vec<C> = ts
        .iter()
        .enumerate()
        .map(|(k, &t)| if k == 0 { start } else if k == n { end } else { at(t) })
        .collect();
    let vals: Vec<f64> = us.iter().map(|&u| f(u)).collect();
    let (i, _) = vals.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
    let mut best = (us[i], vals[i]);
    if len > 0.0 {
        let (mut a, mut b) = (ts[i.saturating_sub(1)], ts[(i + 1).min(n)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c1 = b - g * (b - a);
        let mut c2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(at(c1)), f(at(c2)));
        for _ in 0..80 {
            if f1 < f2 {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - g * (b - a);
                f1 = f(at(c1));
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + g * (b - a);
                f2 = f(at(c2));
            }
        }
        for (t, v) in [(c1, f1), (c2, f2)] {
            if v < best.1 {
                best = (at(t), v);
            }
        }
    }
    Some(best)
}

/// Pair maximizing the distance `delta` from `lambda0` to the supporting line;
/// `K` is the nearest point of the region to `lambda0`.
pub fn admissible_pair(region: &ConvexRegion, lambda0: C) -> Result<RotationPair> {
    if region.is_empty() {
        return Err(Error::input("empty region has no supporting lines"));
    }
    let (k, d) = region.nearest_point(lambda0);
    let tol = 1e-9 * lambda0.norm().max(1.0);
    if !(d > tol) {
        return Err(Error::NotAdmissible { re: lambda0.re, im: lambda0.im });
    }
    let eta = (k - lambda0).conj().arg();
    Ok(RotationPair { eta, k, source_lambda0: lambda0, delta: d })
}

/// As [`admissible_pair`] with `eta` restricted to `S(alpha)`.
pub fn admissible_pair_alpha(region: &ConvexRegion, lambda0: C, alpha: C) -> Result<RotationPair> {
    if let Ok(p) = admissible_pair(region, lambda0) {
        if satisfies_alpha(p.eta, alpha) {
            return Ok(p);
        }
    }
    let set = feasible_eta(region, Some(alpha));
    let not_adm = Error::NotAdmissible { re: lambda0.re, im: lambda0.im };
    let (u, fmin) = minimize_offset(region, lambda0, &set, 720).ok_or(not_adm.clone())?;
    let delta = -fmin;
    let tol = 1e-9 * lambda0.norm().max(1.0);
    if !(delta > tol) {
        return Err(not_adm);
    }
    Ok(RotationPair { eta: u.arg(), k: lambda0 + u.conj() * delta, source_lambda0: lambda0, delta })
}

/// Every sampled point and ray lies on the nonnegative side within `tol`.
pub fn check_pair(region: &ConvexRegion, pair: &RotationPair, tol: f64) -> bool {
    let r = C::from_polar(1.0, pair.eta);
    region.vertices.iter().all(|v| ((v - pair.k) * r).re >= -tol * (v - pair.k).norm().max(1.0))
        && region.recession_directions.iter().all(|d| (d * r).re >= -tol)
        && ((pair.source_lambda0 - pair.k) * r).re < 0.0
}

/// `lambda` in `Q(alpha)`: no feasible half-plane `Lambda_{eta,K}` contains it.
pub fn q_alpha_member(region: &ConvexRegion, alpha: C, lambda: C, probe: &ProbeConfig) -> bool {
    if region.is_empty() {
        return false;
    }
    let set = feasible_eta(region, Some(alpha));
    match minimize_offset(region, lambda, &set, probe.eta_points) {
        None => true,
        Some((_, fmin)) => fmin >= -probe.tol * lambda.norm().max(1.0),
    }
}

fn distance_from_origin(region: &ConvexRegion) -> f64 {
    region.nearest_point(C::new(0.0, 0.0)).1
}

/// `Q_b(alpha)` as the last stable `Q_c(alpha)` over the schedule of `c` values;
/// empty when the regions escape to infinity.
pub fn q_b_region(problem: &CoefficientProblem, alpha: C, c_schedule: &TruncationSchedule) -> Result<ConvexRegion> {
    if c_schedule.len() < 2 {
        return Err(Error::input("schedule needs at least two points"));
    }
    let mut regions = Vec::with_capacity(c_schedule.len());
    for &c in &c_schedule.points {
        let t = problem.truncated(c)?;
        regions.push(build_default_region(&t)?);
    }
    let dist: Vec<f64> = regions.iter().map(distance_from_origin).collect();
    let increasing = dist.windows(2).all(|w| w[1] > w[0]);
    let first = dist[0];
    let last = *dist.last().unwrap();
    if increasing && last > 100.0 * first.max(1e-300) && last > 1.0 {
        return Ok(ConvexRegion::empty().with_alpha(alpha));
    }
    Ok(regions.pop().unwrap().with_alpha(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_power_law, make_schedule, PowerLawParams};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn free_region_is_half_line() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let r = build_default_region(&p).unwrap();
        assert_eq!(r.vertices, vec![c(0.0, 0.0)]);
        assert_eq!(r.recession_directions, vec![c(1.0, 0.0)]);
        assert!(r.contains_q(c(5.0, 0.0)));
        assert!(!r.contains_q(c(5.0, 0.1)));
    }

    #[test]
    fn oscillator_sector_and_real_line() {
        let cc = C::from_polar(1.0, PI / 3.0);
        let r = build_default_region(&CoefficientProblem::oscillator(cc, 2.0, c(0.0, 0.0)).unwrap()).unwrap();
        assert!(matches!(r.cone, Cone::Wedge { lo, hi } if lo.abs() < 1e-12 && (hi - PI / 3.0).abs() < 1e-12));
        assert!(r.contains_q(C::from_polar(3.0, 0.5)));
        assert!(!r.contains_q(C::from_polar(3.0, 1.2)));
        assert!(!r.contains_q(c(-1.0, 0.0)));
        let r = build_default_region(&CoefficientProblem::oscillator(c(-1.0, 0.0), 3.0, c(0.0, 0.0)).unwrap()).unwrap();
        assert!(matches!(r.cone, Cone::Line { .. }));
        assert!(r.contains_q(c(-1e6, 0.0)) && r.contains_q(c(1e6, 0.0)));
        assert!(!r.contains_q(c(0.0, 1e-3)));
    }

    #[test]
    fn pair_for_free_problem() {
        let r = build_default_region(&CoefficientProblem::free(c(0.0, 0.0))).unwrap();
        let p = admissible_pair(&r, c(0.0, 1.0)).unwrap();
        assert!((p.eta - PI / 2.0).abs() < 1e-12);
        assert!(p.k.norm() < 1e-12);
        assert!((p.delta - 1.0).abs() < 1e-12);
        assert!(check_pair(&r, &p, 1e-12));
    }

    #[test]
    fn pair_for_quarter_sector_matches_brute_force() {
        let r = ConvexRegion::new(&[c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 1.0)]);
        let p = admissible_pair(&r, c(-1.0, 0.0)).unwrap();
        // brute force over an eta grid subject to the half-plane conditions
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..=7200 {
            let eta = -PI + TAU * k as f64 / 7200.0;
            let e = C::from_polar(1.0, eta);
            if e.re >= -1e-12 && (c(0.0, 1.0) * e).re >= -1e-12 {
                let delta = -(c(-1.0, 0.0) * e).re;
                if delta > best.1 {
                    best = (eta, delta);
                }
            }
        }
        assert!((p.delta - best.1).abs() < 1e-6);
        assert!((p.eta - best.0).abs() < 1e-3);
        assert!(p.k.norm() < 1e-12);
    }

    #[test]
    fn boundary_point_rejected() {
        let r = build_default_region(&CoefficientProblem::free(c(0.0, 0.0))).unwrap();
        assert!(matches!(admissible_pair(&r, c(0.0, 0.0)), Err(Error::NotAdmissible { .. })));
        assert!(matches!(admissible_pair(&r, c(3.0, 0.0)), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn alpha_constraint_examples() {
        assert!(satisfies_alpha(1.234, c(0.0, 0.0)));
        assert!(satisfies_alpha(PI, c(0.6, 0.0)));
        assert!(!satisfies_alpha(0.0, c(0.6, 0.0)));
    }

    #[test]
    fn q_alpha_equals_q_for_special_alpha() {
        let r = build_default_region(&CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, c(0.0, 0.0)).unwrap()).unwrap();
        let probe = ProbeConfig::default();
        for z in [c(-1.0, 1.0), c(2.0, 0.5), c(0.5, 2.0), c(1.0, -1.0), c(-3.0, -0.1)] {
            for alpha in [0.0, PI / 2.0] {
                assert_eq!(q_alpha_member(&r, c(alpha, 0.0), z, &probe), r.contains_q(z), "{z} {alpha}");
            }
        }
    }

    #[test]
    fn oscillator_real_axis_q_alpha() {
        let r = build_default_region(&CoefficientProblem::oscillator(c(-1.0, 0.0), 2.0, c(0.0, 0.0)).unwrap()).unwrap();
        for alpha in [c(0.3, 0.0), c(2.0, 0.0), c(0.3, -0.2)] {
            let cs = alpha.cos() * alpha.sin().conj();
            assert!(cs.im >= 0.0);
            assert!(q_alpha_member(&r, alpha, c(1.0, 0.0), &ProbeConfig::default()));
        }
    }

    #[test]
    fn q_b_examples() {
        let osc = CoefficientProblem::oscillator(C::from_polar(1.0, PI / 3.0), 2.0, c(0.0, 0.0)).unwrap();
        let sched = make_schedule(osc.interval, 1.0, 2.0, 6).unwrap();
        assert!(q_b_region(&osc, c(0.0, 0.0), &sched).unwrap().is_empty());
        let osc = CoefficientProblem::oscillator(c(-1.0, 0.0), 2.0, c(0.0, 0.0)).unwrap();
        let qb = q_b_region(&osc, c(0.0, 0.0), &sched).unwrap();
        assert!(qb.contains_q(c(-5.0, 0.0)) && qb.contains_q(c(5.0, 0.0)) && !qb.contains_q(c(0.0, 0.5)));
        let free = CoefficientProblem::free(c(0.0, 0.0));
        let sched = make_schedule(free.interval, 2.0, 2.0, 4).unwrap();
        let qb = q_b_region(&free, c(0.0, 0.0), &sched).unwrap();
        assert!(qb.contains_q(c(3.0, 0.0)) && !qb.contains_q(c(-0.5, 0.0)));
    }

    #[test]
    fn power_law_region_is_monotone_in_c() {
        let params = PowerLawParams { p1: 1.0, p2: 0.5, a1: 0.0, a2: 0.0, q1: 1.0, q2: 1.0, b1: 1.0, b2: 0.5, omega: 0.0 };
        let p = make_power_law(params, c(0.0, 0.0)).unwrap();
        let r1 = build_default_region(&p).unwrap();
        let r2 = build_default_region(&p.truncated(5.0).unwrap()).unwrap();
        for k in 0..200 {
            let z = C::from_polar(1.0 + k as f64 * 0.3, k as f64 * 0.7);
            if r2.contains_q(z) {
                assert!(r1.contains_q(z));
            }
        }
    }
}
