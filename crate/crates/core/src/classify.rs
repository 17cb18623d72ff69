//! Case I/II/III classification.
//!
//! Two routes: a numeric one that watches the Weyl disks and the `L^2(w)` tails of
//! `theta + m phi` and `phi` along a schedule, and, for power-law coefficients, an
//! asymptotic one built on Liouville-Green growth rates at infinity.

use std::fmt;

use num_complex::Complex64;

use crate::accel::{tail_test_with_floor, TailVerdict};
use crate::error::{Error, Result};
use crate::odecore::SolutionFrame;
use crate::problem::{make_power_law, CoefficientProblem, PowerLawParams, TruncationSchedule};
use crate::rangegeom::{admissible_pair_alpha, build_default_region, RotationPair};
use crate::weyl::{limit_with_frames, LimitConfig, LimitKind};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    I,
    II,
    III,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Numeric,
    Asymptotic,
}

/// Numeric evidence; `None` in an `l2w` slot means the integral diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub rho_limit: f64,
    pub theta_l2w: Option<f64>,
    pub phi_l2w: Option<f64>,
    pub psi_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimsCase {
    pub case: Case,
    pub route: Route,
    pub eta: f64,
    pub k: C,
    pub evidence: Option<Evidence>,
    pub asymptotics: Option<AsymptoticData>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Sub,
    Euler,
    Super,
}

/// Growth data at infinity for the power-law family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticData {
    pub a: f64,
    pub b: f64,
    pub regime: Regime,
    pub tau: Option<f64>,
    pub d: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub euler_c: Option<f64>,
}

/// Tail-test knobs for the numeric route.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyConfig {
    pub limit: LimitConfig,
    pub tail_factor: f64,
    pub tail_sustain: usize,
    pub boundary_margin: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { limit: LimitConfig::default(), tail_factor: 0.9, tail_sustain: 4, boundary_margin: 1e-6 }
    }
}

/// `int |theta + l phi|^2 w` along the frames; `None` gives `phi`.
fn l2w_partials(frames: &[SolutionFrame], nu_chi: Option<&[C]>) -> Vec<f64> {
    frames
        .iter()
        .enumerate()
        .map(|(k, f)| {
            match nu_chi {
                Some(nu) => f.l2w_chi_form(nu[k]),
                None => {
                    let v = f.scaled_l2w(None);
                    if v == 0.0 {
                        0.0
                    } else {
                        v * (2.0 * f.log_scale).exp()
                    }
                }
            }
        })
        .collect()
}

fn verdict_value(v: TailVerdict) -> Option<f64> {
    match v {
        TailVerdict::Convergent(x) => Some(x),
        _ => None,
    }
}

/// Classification from the disks and the `L^2(w)` tails along `schedule`.
pub fn sims_classify_numeric(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambda: C,
    schedule: &TruncationSchedule,
    cfg: &ClassifyConfig,
) -> Result<SimsCase> {
    let (res, frames) = limit_with_frames(problem, pair, lambda, schedule, &cfg.limit)?;
    let last = frames.last().unwrap();
    // theta + sigma_X phi on [a, X], with the centre of the disk at each X
    let nus: Vec<C> = match res.kind {
        LimitKind::LimitPoint { .. } => res.disks.iter().map(|d| d.center_nu_chi).collect(),
        LimitKind::LimitCircle { disk } => frames.iter().map(|f| (f.mu + disk.center) / f.chi_ratio()).collect(),
    };
    let floor = 100.0 * cfg.limit.ode_tol;
    let psi = tail_test_with_floor(&l2w_partials(&frames, Some(&nus)), cfg.tail_factor, cfg.tail_sustain, floor);
    let phi = tail_test_with_floor(&l2w_partials(&frames, None), cfg.tail_factor, cfg.tail_sustain, floor);
    let psi_energy = {
        let nu = nus[nus.len() - 1];
        let corr = (C::from_polar(1.0, pair.eta) * (lambda - pair.k)).re;
        last.energy_chi_form(nu) + corr * last.l2w_chi_form(nu)
    };
    let (case, rho_limit) = match res.kind {
        LimitKind::LimitCircle { disk } => (Case::III, disk.radius),
        LimitKind::LimitPoint { .. } => {
            if psi == TailVerdict::Inconclusive || phi == TailVerdict::Inconclusive {
                return Err(Error::Inconclusive(format!(
                    "L2(w) tail extrapolation undecided (theta + m phi: {psi:?}, phi: {phi:?})"
                )));
            }
            if psi == TailVerdict::Divergent {
                return Err(Error::Inconclusive("distinguished solution not resolved as L2(w)".into()));
            }
            match phi {
                TailVerdict::Convergent(_) => (Case::II, 0.0),
                _ => (Case::I, 0.0),
            }
        }
    };
    Ok(SimsCase {
        case,
        route: Route::Numeric,
        eta: pair.eta,
        k: pair.k,
        evidence: Some(Evidence {
            rho_limit,
            theta_l2w: verdict_value(psi),
            phi_l2w: verdict_value(phi),
            psi_energy,
        }),
        asymptotics: None,
    })
}

/// Generalized power series `sum c_j x^{e_j}`, exponents descending, truncated
/// below `lead - WINDOW`.
#[derive(Debug, Clone, PartialEq)]
struct Series {
    terms: Vec<(f64, C)>,
}

const WINDOW: f64 = 8.0;
const MAX_TERMS: usize = 64;
const EXP_EQ: f64 = 1e-12;

impl Series {
    fn from_terms(raw: Vec<(f64, C, f64)>) -> Series {
        let mut raw = raw;
        raw.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut merged: Vec<(f64, C, f64)> = Vec::new();
        for (e, c, mag) in raw {
            match merged.last_mut() {
                Some(last) if (last.0 - e).abs() <= EXP_EQ => {
                    last.1 += c;
                    last.2 += mag;
                }
                _ => merged.push((e, c, mag)),
            }
        }
        let kept: Vec<(f64, C)> =
            merged.into_iter().filter(|(_, c, mag)| c.norm() > 1e-13 * mag).map(|(e, c, _)| (e, c)).collect();
        let mut s = Series { terms: kept };
        s.truncate();
        s
    }

    fn monomials(terms: &[(f64, C)]) -> Series {
        Series::from_terms(terms.iter().filter(|t| t.1.norm() > 0.0).map(|&(e, c)| (e, c, c.norm())).collect())
    }

    fn truncate(&mut self) {
        if let Some(&(lead, _)) = self.terms.first() {
            self.terms.retain(|t| t.0 >= lead - WINDOW - EXP_EQ);
            self.terms.truncate(MAX_TERMS);
        }
    }

    fn lead(&self) -> Option<(f64, C)> {
        self.terms.first().copied()
    }

    fn mul(&self, other: &Series) -> Series {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(e1, c1) in &self.terms {
            for &(e2, c2) in &other.terms {
                raw.push((e1 + e2, c1 * c2, c1.norm() * c2.norm()));
            }
        }
        Series::from_terms(raw)
    }

    fn add(&self, other: &Series) -> Series {
        let raw = self.terms.iter().chain(&other.terms).map(|&(e, c)| (e, c, c.norm())).collect();
        Series::from_terms(raw)
    }

    fn scale(&self, z: C, shift: f64) -> Series {
        Series { terms: self.terms.iter().map(|&(e, c)| (e + shift, c * z)).collect() }
    }

    /// `self^k` with the leading coefficient raised on the branch `0 <= arg < 2 pi`.
    fn pow(&self, k: f64) -> Option<Series> {
        let (e0, c0) = self.lead()?;
        let mut arg = c0.arg();
        if arg < 0.0 {
            arg += 2.0 * std::f64::consts::PI;
        }
        let c0k = C::from_polar(c0.norm().powf(k), arg * k);
        let u = Series { terms: self.terms[1..].iter().map(|&(e, c)| (e - e0, c / c0)).collect() };
        let mut total = Series { terms: vec![(0.0, C::new(1.0, 0.0))] };
        if let Some((eu, _)) = u.lead() {
            let n_max = ((WINDOW / -eu).ceil() as usize + 1).min(48);
            let mut power = Series { terms: vec![(0.0, C::new(1.0, 0.0))] };
            let mut binom = 1.0;
            for n in 1..=n_max {
                binom *= (k - (n as f64 - 1.0)) / n as f64;
                power = power.mul(&u);
                if power.terms.is_empty() || binom == 0.0 {
                    break;
                }
                total = total.add(&power.scale(C::new(binom, 0.0), 0.0));
            }
        }
        Some(total.scale(c0k, e0 * k))
    }

    /// Real parts, dropping those negligible against their complex coefficient.
    fn real_part(&self) -> Vec<(f64, f64)> {
        self.terms.iter().filter(|(_, c)| c.re.abs() > 1e-12 * c.norm()).map(|&(e, c)| (e, c.re)).collect()
    }
}

fn nonzero_exponents(pairs: &[(f64, f64)]) -> Option<f64> {
    pairs.iter().filter(|(c, _)| *c != 0.0).map(|&(_, e)| e).fold(None, |m, e| Some(m.map_or(e, |v: f64| v.max(e))))
}

fn p_series(params: &PowerLawParams) -> Series {
    Series::monomials(&[(params.a1, C::new(params.p1, 0.0)), (params.a2, C::new(0.0, params.p2))])
}

fn s_series(params: &PowerLawParams, lambda: C) -> Series {
    Series::monomials(&[
        (params.b1, C::new(params.q1, 0.0)),
        (params.b2, C::new(0.0, params.q2)),
        (params.omega, -lambda),
    ])
}

/// `A`, `B`, regime and, in the sub-critical regime, `tau`, `D`, `gamma`, `epsilon`.
///
/// `A` and `B` range over the exponents of nonzero terms; `w` always counts.
pub fn liouville_green_exponents(params: &PowerLawParams, lambda: C) -> Result<AsymptoticData> {
    let a = nonzero_exponents(&[(params.p1, params.a1), (params.p2, params.a2)])
        .ok_or_else(|| Error::input("p vanishes identically"))?;
    let b = nonzero_exponents(&[(params.q1, params.b1), (params.q2, params.b2)])
        .map_or(params.omega, |v| v.max(params.omega));
    let diff = a - b;
    let regime = if (diff - 2.0).abs() <= EXP_EQ {
        Regime::Euler
    } else if diff < 2.0 {
        Regime::Sub
    } else {
        Regime::Super
    };
    let mut data = AsymptoticData { a, b, regime, tau: None, d: None, gamma: None, epsilon: None, euler_c: None };
    match regime {
        Regime::Euler => data.euler_c = Some((17f64.sqrt() - 1.0) / 4.0),
        Regime::Super => {}
        Regime::Sub => {
            let p = p_series(params);
            let s = s_series(params, lambda);
            let ratio = s.mul(&p.pow(-1.0).unwrap());
            let root = ratio.pow(0.5).ok_or_else(|| Error::input("s vanishes identically"))?;
            let re = root.real_part();
            let &(tau, d) = re.first().ok_or_else(|| {
                Error::Inconclusive("leading coefficient D of Re sqrt(s/p) vanishes".into())
            })?;
            let epsilon = re.get(1).map_or(WINDOW, |t| tau - t.0);
            let gamma = p.mul(&s).lead().map(|t| t.0).ok_or_else(|| Error::input("p s vanishes identically"))?;
            data.tau = Some(tau);
            data.d = Some(d);
            data.gamma = Some(gamma);
            data.epsilon = Some(epsilon);
        }
    }
    Ok(data)
}

/// Sign of `v` against a sharp threshold; `None` within `margin`.
fn side(v: f64, margin: f64) -> Option<bool> {
    if v.abs() < margin {
        None
    } else {
        Some(v > 0.0)
    }
}

fn boundary(what: &str) -> Error {
    Error::Inconclusive(format!("{what} lies on a decision boundary"))
}

/// Leading exponent of `Re[e^{i eta} f]`, or `-inf` when every term is imaginary.
fn rotated_exponent(f: &Series, eta: f64) -> f64 {
    f.scale(C::from_polar(1.0, eta), 0.0).real_part().first().map_or(f64::NEG_INFINITY, |t| t.0)
}

/// Classification from the Liouville-Green decision lists.
pub fn asymptotic_classify(params: &PowerLawParams, alpha: C, lambda: C) -> Result<SimsCase> {
    let problem = make_power_law(*params, alpha)?;
    let region = build_default_region(&problem)?;
    let pair = admissible_pair_alpha(&region, lambda, alpha)?;
    asymptotic_classify_with(params, &pair, lambda, 1e-6)
}

/// As [`asymptotic_classify`] for a given admissible pair.
pub fn asymptotic_classify_with(params: &PowerLawParams, pair: &RotationPair, lambda: C, margin: f64) -> Result<SimsCase> {
    let data = liouville_green_exponents(params, lambda)?;
    let (a, b) = (data.a, data.b);
    let w = params.omega;
    // (exponent of |y|, exponent of |p y'|) for y_+ and y_-
    let rates: [(f64, f64); 2];
    let case_one = match data.regime {
        Regime::Sub => {
            let (tau, d, gamma) = (data.tau.unwrap(), data.d.unwrap(), data.gamma.unwrap());
            let t = tau + 1.0;
            let i = if t.abs() <= EXP_EQ {
                side(2.0 * d.abs() + w - gamma / 2.0 + 1.0, margin)
            } else {
                match side(t, margin) {
                    None => None,
                    Some(true) => Some(true),
                    Some(false) => side(w - gamma / 2.0 + 1.0, margin),
                }
            };
            let g = if t.abs() <= EXP_EQ { d } else { 0.0 };
            rates = [(-gamma / 4.0 + g, gamma / 4.0 + g), (-gamma / 4.0 - g, gamma / 4.0 - g)];
            i
        }
        Regime::Euler => {
            let c = data.euler_c.unwrap();
            let am = a - 1.0;
            rates = [(2.0 * am * c, 2.0 * am * (0.5 + c)), (-2.0 * am * (0.5 + c), -2.0 * am * c)];
            if am.abs() <= EXP_EQ {
                side(w + 1.0, margin)
            } else if am > 0.0 {
                side(w + 4.0 * am * c + 1.0, margin)
            } else {
                side(w - 4.0 * am * (0.5 + c) + 1.0, margin)
            }
        }
        Regime::Super => {
            rates = [(0.0, a + (b - a) / 2.0), (-(a + b) / 2.0, 0.0)];
            side(w - (a + b).min(0.0) + 1.0, margin)
        }
    };
    let case_one = case_one.ok_or_else(|| boundary("the Case I inequality"))?;
    let case = if case_one {
        Case::I
    } else {
        let p = p_series(params);
        let s = s_series(params, lambda);
        let fp = data.a;
        let ep = rotated_exponent(&p, pair.eta);
        let es = rotated_exponent(&s, pair.eta);
        let mut integrable = true;
        for (gy, gpy) in rates {
            let kappa = (ep - 2.0 * fp + 2.0 * gpy).max(es + 2.0 * gy);
            match side(-1.0 - kappa, margin) {
                None => return Err(boundary("the W integrability exponent")),
                Some(ok) => integrable &= ok,
            }
        }
        if integrable {
            Case::III
        } else {
            Case::II
        }
    };
    Ok(SimsCase { case, route: Route::Asymptotic, eta: pair.eta, k: pair.k, evidence: None, asymptotics: Some(data) })
}

/// The oscillator `-y'' + c x^beta y` in power-law form.
pub fn oscillator_params(c: C, beta: f64) -> PowerLawParams {
    PowerLawParams { p1: 1.0, p2: 0.0, a1: 0.0, a2: 0.0, q1: c.re, q2: c.im, b1: beta, b2: beta, omega: 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEntry {
    pub lambda: C,
    pub case: Option<Case>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub entries: Vec<LambdaEntry>,
    pub consistent: bool,
    pub warnings: Vec<String>,
}

/// Classify at each `lambda` for a fixed pair and flag disagreements.
pub fn lambda_independence_report(
    problem: &CoefficientProblem,
    pair: &RotationPair,
    lambdas: &[C],
    schedule: &TruncationSchedule,
    cfg: &ClassifyConfig,
) -> IndependenceReport {
    let entries: Vec<LambdaEntry> = lambdas
        .iter()
        .map(|&lambda| match sims_classify_numeric(problem, pair, lambda, schedule, cfg) {
            Ok(c) => LambdaEntry { lambda, case: Some(c.case), note: None },
            Err(e) => LambdaEntry { lambda, case: None, note: Some(e.to_string()) },
        })
        .collect();
    let cases: Vec<Case> = entries.iter().filter_map(|e| e.case).collect();
    let mut warnings = Vec::new();
    if cases.contains(&Case::III) && cases.iter().any(|c| *c != Case::III) {
        warnings.push("Case III at some lambda but not at all; numerical resolution suspect".to_string());
    }
    if cases.iter().any(|c| *c != Case::I) && cases.contains(&Case::I) {
        warnings.push("all solutions L2(w) at some lambda but not at all; numerical resolution suspect".to_string());
    }
    for e in &entries {
        if let Some(n) = &e.note {
            warnings.push(format!("lambda = {}: {n}", e.lambda));
        }
    }
    IndependenceReport { consistent: warnings.is_empty(), entries, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_schedule;
    use crate::rangegeom::admissible_pair;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn series_square_root() {
        let s = Series::monomials(&[(2.0, c(-1.0, 0.0)), (0.0, c(0.0, -1.0))]);
        let r = s.pow(0.5).unwrap();
        assert!((r.terms[0].0 - 1.0).abs() < 1e-15 && (r.terms[0].1 - c(0.0, 1.0)).norm() < 1e-15);
        assert!((r.terms[1].0 + 1.0).abs() < 1e-15 && (r.terms[1].1 - c(-0.5, 0.0)).norm() < 1e-15);
        let sq = r.mul(&r);
        assert!((sq.terms[0].1 + 1.0).norm() < 1e-14 && (sq.terms[1].1 - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn oscillator_sub_regime_exponents() {
        let cc = C::from_polar(1.0, PI / 3.0);
        let d = liouville_green_exponents(&oscillator_params(cc, 2.0), c(0.0, 1.0)).unwrap();
        assert_eq!(d.regime, Regime::Sub);
        assert_eq!((d.a, d.b), (0.0, 2.0));
        assert!((d.tau.unwrap() - 1.0).abs() < 1e-14);
        assert!((d.d.unwrap() - cc.sqrt().re).abs() < 1e-14);
        assert!((d.gamma.unwrap() - 2.0).abs() < 1e-14);
        // symbolic expansion vs direct evaluation at large x
        for x in [1e3, 1e4] {
            let v = (cc * x * x - c(0.0, 1.0)).sqrt().re;
            assert!(((v / x) - d.d.unwrap()).abs() < 1e-5);
        }
    }

    #[test]
    fn euler_and_super_regimes() {
        let e = PowerLawParams { p1: 1.0, a1: 4.0, q1: 1.0, b1: 2.0, ..Default::default() };
        let d = liouville_green_exponents(&e, c(0.0, 1.0)).unwrap();
        assert_eq!(d.regime, Regime::Euler);
        assert!((d.euler_c.unwrap() - (17f64.sqrt() - 1.0) / 4.0).abs() < 1e-15);
        let s = PowerLawParams { p1: 1.0, a1: 5.0, q1: 1.0, b1: 1.0, ..Default::default() };
        assert_eq!(liouville_green_exponents(&s, c(0.0, 1.0)).unwrap().regime, Regime::Super);
        assert!(liouville_green_exponents(&PowerLawParams::default(), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn asymptotic_oscillator_table() {
        let i = c(0.0, 1.0);
        let zero = c(0.0, 0.0);
        let minus = c(-1.0, 0.0);
        assert_eq!(asymptotic_classify(&oscillator_params(minus, 1.0), zero, i).unwrap().case, Case::I);
        assert_eq!(asymptotic_classify(&oscillator_params(minus, 2.0), zero, i).unwrap().case, Case::I);
        assert_eq!(asymptotic_classify(&oscillator_params(minus, 3.0), zero, i).unwrap().case, Case::III);
        let cc = C::from_polar(1.0, PI / 3.0);
        assert_eq!(asymptotic_classify(&oscillator_params(cc, 2.0), zero, i).unwrap().case, Case::I);
    }

    #[test]
    fn asymptotic_decision_items() {
        let i = c(0.0, 1.0);
        let zero = c(0.0, 0.0);
        // Euler regime with A = 1 forces omega = -1, the boundary of item 2
        let e = PowerLawParams { p1: 1.0, a1: 1.0, q1: 1.0, b1: -1.0, omega: -1.0, ..Default::default() };
        assert!(asymptotic_classify(&e, zero, i).is_err());
        let e = PowerLawParams { p1: 1.0, a1: 3.0, q1: 1.0, b1: 1.0, omega: 0.0, ..Default::default() };
        assert_eq!(asymptotic_classify(&e, zero, i).unwrap().case, Case::I);
        let e = PowerLawParams { omega: -20.0, ..e };
        assert_ne!(asymptotic_classify(&e, zero, i).unwrap().case, Case::I);
        // Super regime, omega - min(0, A + B) >= -1
        let s = PowerLawParams { p1: 1.0, a1: 3.0, q1: 1.0, b1: 0.0, omega: 0.0, ..Default::default() };
        assert_eq!(asymptotic_classify(&s, zero, i).unwrap().case, Case::I);
    }

    #[test]
    fn numeric_free_is_case_one() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let r = build_default_region(&p).unwrap();
        let lam = c(0.0, 1.0);
        let pair = admissible_pair(&r, lam).unwrap();
        let s = make_schedule(p.interval, 2.0, 2.0, 6).unwrap();
        let out = sims_classify_numeric(&p, &pair, lam, &s, &ClassifyConfig::default()).unwrap();
        assert_eq!(out.case, Case::I);
        let ev = out.evidence.unwrap();
        assert_eq!(ev.rho_limit, 0.0);
        assert!(ev.theta_l2w.is_some() && ev.phi_l2w.is_none());
        // int_1^inf |e^{i k (x-1)}|^2 m-normalised: psi = theta + m phi = e^{i k (x - 1)}
        let k = lam.sqrt();
        assert!((ev.theta_l2w.unwrap() - 1.0 / (2.0 * k.im)).abs() < 1e-6);
    }

    #[test]
    fn independence_report_free() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        let r = build_default_region(&p).unwrap();
        let pair = admissible_pair(&r, c(0.0, 1.0)).unwrap();
        let s = make_schedule(p.interval, 2.0, 2.0, 6).unwrap();
        let rep = lambda_independence_report(&p, &pair, &[c(0.0, 1.0), c(0.0, 4.0)], &s, &ClassifyConfig::default());
        assert!(rep.consistent, "{:?}", rep.warnings);
        assert!(rep.entries.iter().all(|e| e.case == Some(Case::I)));
        let empty = lambda_independence_report(&p, &pair, &[], &s, &ClassifyConfig::default());
        assert!(empty.entries.is_empty() && empty.consistent);
    }
}
