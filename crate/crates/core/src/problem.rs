//! Coefficient problems `-(p y')' + q y = lambda w y` on `[a, b)`, the built-in
//! families, truncation schedules and the line-oriented problem file format.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `[a, b)` with `a` regular and `b` possibly `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::input("left endpoint must be finite"));
        }
        if !(a < b) {
            return Err(Error::input(format!("empty interval [{a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn half_line(a: f64) -> Self {
        Self { a, b: f64::INFINITY }
    }

    pub fn is_unbounded(&self) -> bool {
        self.b.is_infinite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x < self.b
    }
}

/// `p = p1 x^a1 + i p2 x^a2`, `q = q1 x^b1 + i q2 x^b2`, `w = x^omega`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerLawParams {
    pub p1: f64,
    pub p2: f64,
    pub a1: f64,
    pub a2: f64,
    pub q1: f64,
    pub q2: f64,
    pub b1: f64,
    pub b2: f64,
    pub omega: f64,
}

impl PowerLawParams {
    /// Constant `p = |p| e^{i phase}`, the modulus-phase form of the family.
    pub fn with_phase(phase: f64, q1: f64, q2: f64, b1: f64, b2: f64, omega: f64) -> Self {
        Self {
            p1: phase.cos(),
            p2: phase.sin(),
            a1: 0.0,
            a2: 0.0,
            q1,
            q2,
            b1,
            b2,
            omega,
        }
    }

    pub fn p(&self, x: f64) -> Complex64 {
        Complex64::new(self.p1 * x.powf(self.a1), self.p2 * x.powf(self.a2))
    }

    pub fn q(&self, x: f64) -> Complex64 {
        Complex64::new(self.q1 * x.powf(self.b1), self.q2 * x.powf(self.b2))
    }

    pub fn w(&self, x: f64) -> f64 {
        x.powf(self.omega)
    }
}

/// Which family a problem was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyTag {
    PowerLaw(PowerLawParams),
    OscillatorSector { c: Complex64, beta: f64 },
    Free,
    Tabulated,
}

/// Piecewise-linear coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub x: Vec<f64>,
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub w: Vec<f64>,
}

impl CoefficientTable {
    fn eval(&self, x: f64) -> (Complex64, Complex64, f64) {
        let n = self.x.len();
        let j = match self.x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(j) => j.min(n - 2),
            Err(j) => j.clamp(1, n - 1) - 1,
        };
        let t = (x - self.x[j]) / (self.x[j + 1] - self.x[j]);
        (
            self.p[j] + (self.p[j + 1] - self.p[j]) * t,
            self.q[j] + (self.q[j + 1] - self.q[j]) * t,
            self.w[j] + (self.w[j + 1] - self.w[j]) * t,
        )
    }
}

type CoefFn = dyn Fn(f64) -> (Complex64, Complex64, f64) + Send + Sync;

#[derive(Clone)]
enum Coefficients {
    PowerLaw(PowerLawParams),
    Oscillator { c: Complex64, beta: f64 },
    Free,
    Table(Arc<CoefficientTable>),
    Callback(Arc<CoefFn>),
}

/// A fully specified problem: interval, coefficients and boundary parameter `alpha`.
#[derive(Clone)]
pub struct CoefficientProblem {
    pub interval: Interval,
    pub alpha: Complex64,
    pub family_tag: FamilyTag,
    coef: Coefficients,
}

impl fmt::Debug for CoefficientProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientProblem")
            .field("interval", &self.interval)
            .field("alpha", &self.alpha)
            .field("family_tag", &self.family_tag)
            .finish()
    }
}

/// Limiting directions of `p` and of `q/w` as `x -> b`, when known exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct TailDirections {
    pub p: Option<Complex64>,
    pub q_over_w: Option<Complex64>,
}

pub fn make_power_law(params: PowerLawParams, alpha: Complex64) -> Result<CoefficientProblem> {
    make_power_law_on(params, alpha, Interval::half_line(1.0))
}

/// Power-law family on a custom interval with `a > 0`.
pub fn make_power_law_on(
    params: PowerLawParams,
    alpha: Complex64,
    interval: Interval,
) -> Result<CoefficientProblem> {
    if params.p1 == 0.0 && params.p2 == 0.0 {
        return Err(Error::input("p vanishes identically (p1 = p2 = 0)"));
    }
    if interval.a <= 0.0 {
        return Err(Error::input("power-law coefficients need a > 0"));
    }
    let all = [
        params.p1, params.p2, params.a1, params.a2, params.q1, params.q2, params.b1, params.b2,
        params.omega,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite power-law parameter"));
    }
    let free = params.p1 == 1.0
        && params.p2 == 0.0
        && params.a1 == 0.0
        && params.q1 == 0.0
        && params.q2 == 0.0
        && params.omega == 0.0;
    Ok(CoefficientProblem {
        interval,
        alpha,
        family_tag: if free { FamilyTag::Free } else { FamilyTag::PowerLaw(params) },
        coef: if free { Coefficients::Free } else { Coefficients::PowerLaw(params) },
    })
}

impl CoefficientProblem {
    /// `-y'' = lambda y` on `[1, inf)`.
    pub fn free(alpha: Complex64) -> Self {
        Self {
            interval: Interval::half_line(1.0),
            alpha,
            family_tag: FamilyTag::Free,
            coef: Coefficients::Free,
        }
    }

    /// `-y'' + c x^beta y = lambda y` on `[0, inf)`.
    pub fn oscillator(c: Complex64, beta: f64, alpha: Complex64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::input("oscillator exponent beta must be positive"));
        }
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(Error::input("oscillator coefficient c must be finite and nonzero"));
        }
        Ok(Self {
            interval: Interval::half_line(0.0),
            alpha,
            family_tag: FamilyTag::OscillatorSector { c, beta },
            coef: Coefficients::Oscillator { c, beta },
        })
    }

    pub fn tabulated(table: CoefficientTable, b: f64, alpha: Complex64) -> Result<Self> {
        let n = table.x.len();
        if n < 2 || table.p.len() != n || table.q.len() != n || table.w.len() != n {
            return Err(Error::input("coefficient table needs at least two complete rows"));
        }
        if table.x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::input("table abscissae must be strictly increasing"));
        }
        if table.w.iter().any(|&w| !(w > 0.0)) || table.p.iter().any(|p| p.norm() == 0.0) {
            return Err(Error::input("table needs w > 0 and p != 0"));
        }
        let b = if b.is_finite() { b.min(table.x[n - 1]) } else { table.x[n - 1] };
        Ok(Self {
            interval: Interval::new(table.x[0], b)?,
            alpha,
            family_tag: FamilyTag::Tabulated,
            coef: Coefficients::Table(Arc::new(table)),
        })
    }

    /// User-supplied evaluator; it must be pure.
    pub fn from_fn<F>(interval: Interval, alpha: Complex64, f: F) -> Self
    where
        F: Fn(f64) -> (Complex64, Complex64, f64) + Send + Sync + 'static,
    {
        Self {
            interval,
            alpha,
            family_tag: FamilyTag::Tabulated,
            coef: Coefficients::Callback(Arc::new(f)),
        }
    }

    pub fn with_alpha(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.alpha = alpha;
        out
    }

    /// Same coefficients restricted to `[c, b)`.
    pub fn truncated(&self, c: f64) -> Result<Self> {
        if !self.interval.contains(c) {
            return Err(Error::OutsideInterval { x: c });
        }
        let mut out = self.clone();
        out.interval.a = c;
        Ok(out)
    }

    /// Coefficients at `x` without the interval check; used in inner loops.
    #[inline]
    pub fn coefficients(&self, x: f64) -> (Complex64, Complex64, f64) {
        match &self.coef {
            Coefficients::Free => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0),
            Coefficients::PowerLaw(pl) => (pl.p(x), pl.q(x), pl.w(x)),
            Coefficients::Oscillator { c, beta } => {
                (Complex64::new(1.0, 0.0), c * x.powf(*beta), 1.0)
            }
            Coefficients::Table(t) => t.eval(x),
            Coefficients::Callback(f) => f(x),
        }
    }

    /// Exact limiting directions for the built-in families.
    pub fn tail_directions(&self) -> TailDirections {
        match &self.coef {
            Coefficients::Free => TailDirections { p: Some(Complex64::new(1.0, 0.0)), q_over_w: None },
            Coefficients::Oscillator { c, .. } => TailDirections {
                p: Some(Complex64::new(1.0, 0.0)),
                q_over_w: Some(c / c.norm()),
            },
            Coefficients::PowerLaw(pl) if self.interval.is_unbounded() => {
                let p = leading(pl.p1, pl.a1, pl.p2, pl.a2).map(|(z, _)| z / z.norm());
                let q = leading(pl.q1, pl.b1 - pl.omega, pl.q2, pl.b2 - pl.omega)
                    .filter(|&(_, e)| e > 0.0)
                    .map(|(z, _)| z / z.norm());
                TailDirections { p, q_over_w: q }
            }
            _ => TailDirections::default(),
        }
    }
}

/// Leading term of `r1 x^e1 + i r2 x^e2` as `x -> inf`.
fn leading(r1: f64, e1: f64, r2: f64, e2: f64) -> Option<(Complex64, f64)> {
    match (r1 != 0.0, r2 != 0.0) {
        (false, false) => None,
        (true, false) => Some((Complex64::new(r1, 0.0), e1)),
        (false, true) => Some((Complex64::new(0.0, r2), e2)),
        (true, true) => {
            if (e1 - e2).abs() < 1e-14 {
                Some((Complex64::new(r1, r2), e1))
            } else if e1 > e2 {
                Some((Complex64::new(r1, 0.0), e1))
            } else {
                Some((Complex64::new(0.0, r2), e2))
            }
        }
    }
}

/// `(p(x), q(x), w(x))`, rejecting points outside `[a, b)`.
pub fn evaluate(problem: &CoefficientProblem, x: f64) -> Result<(Complex64, Complex64, f64)> {
    if !problem.interval.contains(x) {
        return Err(Error::OutsideInterval { x });
    }
    let (p, q, w) = problem.coefficients(x);
    if !(w > 0.0) || p.norm() == 0.0 || !p.is_finite() || !q.is_finite() {
        return Err(Error::Consistency(format!("invalid coefficients at x = {x}")));
    }
    Ok((p, q, w))
}

/// Ordered truncation points approaching `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSchedule {
    pub points: Vec<f64>,
}

impl TruncationSchedule {
    pub fn last(&self) -> f64 {
        *self.points.last().expect("schedule is never empty")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn make_schedule(interval: Interval, x0: f64, ratio: f64, count: usize) -> Result<TruncationSchedule> {
    if count < 2 {
        return Err(Error::input("schedule needs at least two points"));
    }
    if !(x0 > interval.a && x0 < interval.b) {
        return Err(Error::input(format!("x0 = {x0} must lie inside (a, b)")));
    }
    let points: Vec<f64> = if interval.is_unbounded() {
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(Error::input("ratio must exceed 1 when b is infinite"));
        }
        (0..count).map(|k| x0 * ratio.powi(k as i32)).collect()
    } else {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::input("ratio must lie in (0, 1) when b is finite"));
        }
        let b = interval.b;
        (0..count).map(|k| b - (b - x0) * ratio.powi(k as i32)).collect()
    };
    if points.windows(2).any(|w| !(w[0] < w[1])) || !points.iter().all(|x| x.is_finite() && *x < interval.b) {
        return Err(Error::input("degenerate schedule"));
    }
    Ok(TruncationSchedule { points })
}

/// Build a schedule from explicit points.
pub fn schedule_from_points(interval: Interval, points: Vec<f64>) -> Result<TruncationSchedule> {
    if points.len() < 2 {
        return Err(Error::input("schedule needs at least two points"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points[0] <= interval.a || points[points.len() - 1] >= interval.b {
        return Err(Error::input("schedule points must increase strictly inside (a, b)"));
    }
    Ok(TruncationSchedule { points })
}

/// Parse `re+imi`, `re-imi`, `re`, or `imi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::input(format!("cannot parse complex value '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let num = |v: &str| -> Result<f64> {
        match v {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_real(v).map_err(|_| bad()),
        }
    };
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => Ok(Complex64::new(num(&body[..k])?, num(&body[k..])?)),
            None => Ok(Complex64::new(0.0, num(body)?)),
        }
    } else {
        Ok(Complex64::new(parse_real(&t).map_err(|_| bad())?, 0.0))
    }
}

/// Real number; accepts `inf`, `pi`, and `k*pi`, `pi/k` shorthands.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::input(format!("cannot parse real value '{s}'"));
    match t {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    if t.contains("pi") {
        let (sign, body) = match t.strip_prefix('-') {
            Some(r) => (-1.0, r),
            None => (1.0, t),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
            None => (body, 1.0),
        };
        let coef = match num.trim_end_matches("pi").trim_end_matches('*') {
            "" => 1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        if num.ends_with("pi") {
            return Ok(sign * coef * std::f64::consts::PI / den);
        }
    }
    Err(bad())
}

pub fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub problem: CoefficientProblem,
    pub schedule: Option<TruncationSchedule>,
}

/// Parse the `key = value` problem format; `base` resolves relative table paths.
pub fn parse_problem(text: &str, base: Option<&Path>) -> Result<ProblemSpec> {
    let mut kv: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::input(format!("line {}: expected key = value", lineno + 1)))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |key: &str| kv.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let real = |key: &str, default: Option<f64>| -> Result<f64> {
        match get(key) {
            Some(v) => parse_real(v),
            None => default.ok_or_else(|| Error::input(format!("missing key '{key}'"))),
        }
    };
    let known = [
        "family", "interval.a", "interval.b", "alpha", "p1", "p2", "a1", "a2", "q1", "q2", "b1", "b2",
        "omega", "c", "beta", "table", "schedule.x0", "schedule.ratio", "schedule.count",
    ];
    if let Some((k, _)) = kv.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(Error::input(format!("unknown key '{k}'")));
    }
    let alpha = match get("alpha") {
        Some(v) => parse_complex(v)?,
        None => Complex64::new(0.0, 0.0),
    };
    let family = get("family").ok_or_else(|| Error::input("missing key 'family'"))?;
    let problem = match family {
        "free" => {
            let a = real("interval.a", Some(1.0))?;
            let b = real("interval.b", Some(f64::INFINITY))?;
            let mut p = CoefficientProblem::free(alpha);
            p.interval = Interval::new(a, b)?;
            p
        }
        "power_law" | "powerlaw" => {
            let params = PowerLawParams {
                p1: real("p1", Some(1.0))?,
                p2: real("p2", Some(0.0))?,
                a1: real("a1", Some(0.0))?,
                a2: real("a2", Some(0.0))?,
                q1: real("q1", Some(0.0))?,
                q2: real("q2", Some(0.0))?,
                b1: real("b1", Some(0.0))?,
                b2: real("b2", Some(0.0))?,
                omega: real("omega", Some(0.0))?,
            };
            let a = real("interval.a", Some(1.0))?;
            let b = real("interval.b", Some(f64::INFINITY))?;
            make_power_law_on(params, alpha, Interval::new(a, b)?)?
        }
        "oscillator" | "oscillator_sector" => {
            let c = parse_complex(get("c").ok_or_else(|| Error::input("missing key 'c'"))?)?;
            let beta = real("beta", None)?;
            CoefficientProblem::oscillator(c, beta, alpha)?
        }
        "tabulated" => {
            let path = get("table").ok_or_else(|| Error::input("missing key 'table'"))?;
            let full = match base {
                Some(dir) => dir.join(path),
                None => Path::new(path).to_path_buf(),
            };
            let body = std::fs::read_to_string(&full)
                .map_err(|e| Error::input(format!("cannot read table {}: {e}", full.display())))?;
            let table = parse_table(&body)?;
            let b = real("interval.b", Some(f64::INFINITY))?;
            CoefficientProblem::tabulated(table, b, alpha)?
        }
        other => return Err(Error::input(format!("unknown family '{other}'"))),
    };
    let schedule = match get("schedule.x0") {
        Some(_) => {
            let x0 = real("schedule.x0", None)?;
            let ratio = real("schedule.ratio", Some(2.0))?;
            let count = get("schedule.count")
                .unwrap_or("8")
                .parse::<usize>()
                .map_err(|_| Error::input("schedule.count must be a nonnegative integer"))?;
            Some(make_schedule(problem.interval, x0, ratio, count)?)
        }
        None => None,
    };
    Ok(ProblemSpec { problem, schedule })
}

/// Whitespace table with columns `x p q w`; `p` and `q` in `re+imi` form.
pub fn parse_table(text: &str) -> Result<CoefficientTable> {
    let mut t = CoefficientTable { x: vec![], p: vec![], q: vec![], w: vec![] };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::input(format!("table line {}: expected 4 columns", lineno + 1)));
        }
        t.x.push(parse_real(cols[0])?);
        t.p.push(parse_complex(cols[1])?);
        t.q.push(parse_complex(cols[2])?);
        t.w.push(parse_real(cols[3])?);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_problem_coefficients() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        assert_eq!(evaluate(&p, 7.0).unwrap(), (c(1.0, 0.0), c(0.0, 0.0), 1.0));
    }

    #[test]
    fn oscillator_substitution() {
        let p = CoefficientProblem::oscillator(c(0.0, 1.0), 2.0, c(0.0, 0.0)).unwrap();
        let (pp, q, w) = evaluate(&p, 2.0).unwrap();
        assert_eq!((pp, w), (c(1.0, 0.0), 1.0));
        assert!((q - c(0.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn power_law_imaginary_p() {
        let params = PowerLawParams { p1: 0.0, p2: 1.0, a2: 1.0, ..Default::default() };
        let p = make_power_law(params, c(0.0, 0.0)).unwrap();
        assert_eq!(evaluate(&p, 3.0).unwrap().0, c(0.0, 3.0));
    }

    #[test]
    fn power_law_constant_complex_p_accepted() {
        let params = PowerLawParams { p1: 1.0, p2: 1.0, ..Default::default() };
        let p = make_power_law(params, c(0.0, 0.0)).unwrap();
        assert_eq!(evaluate(&p, 5.0).unwrap().0, c(1.0, 1.0));
    }

    #[test]
    fn power_law_reduces_to_free() {
        let params = PowerLawParams { p1: 1.0, ..Default::default() };
        let p = make_power_law(params, c(0.0, 0.0)).unwrap();
        assert_eq!(p.family_tag, FamilyTag::Free);
    }

    #[test]
    fn vanishing_p_rejected() {
        assert!(make_power_law(PowerLawParams::default(), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn evaluate_outside_interval() {
        let p = CoefficientProblem::free(c(0.0, 0.0));
        assert!(matches!(evaluate(&p, 0.5), Err(Error::OutsideInterval { .. })));
    }

    #[test]
    fn geometric_schedules() {
        let s = make_schedule(Interval::half_line(1.0), 2.0, 2.0, 3).unwrap();
        assert_eq!(s.points, vec![2.0, 4.0, 8.0]);
        let s = make_schedule(Interval::new(0.0, 1.0).unwrap(), 0.5, 0.5, 3).unwrap();
        assert_eq!(s.points, vec![0.5, 0.75, 0.875]);
        assert!(make_schedule(Interval::half_line(1.0), 2.0, 2.0, 1).is_err());
        assert!(make_schedule(Interval::half_line(1.0), 2.0, 0.5, 3).is_err());
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.0+1.0i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-1-2i").unwrap(), c(-1.0, -2.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), c(1e-3, 2e-4));
        assert_eq!(parse_complex("1.5e+2-3E-1i").unwrap(), c(150.0, -0.3));
        assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert!(parse_complex("abc").is_err());
        let z = c(-0.25, 3.5);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn real_parsing_with_pi() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_real("pi/2").unwrap(), pi / 2.0);
        assert_eq!(parse_real("-3pi/4").unwrap(), -3.0 * pi / 4.0);
        assert_eq!(parse_real("inf").unwrap(), f64::INFINITY);
    }

    #[test]
    fn problem_file_roundtrip() {
        let text = "family = oscillator\nc = 0+1i\nbeta = 2\nalpha = 1.5707963267948966+0i\n\
                    schedule.x0 = 2\nschedule.ratio = 2\nschedule.count = 3\n";
        let spec = parse_problem(text, None).unwrap();
        assert_eq!(spec.problem.interval, Interval::half_line(0.0));
        assert_eq!(spec.schedule.unwrap().points, vec![2.0, 4.0, 8.0]);
        assert!(parse_problem("family = nope\n", None).is_err());
        assert!(parse_problem("family = free\nbogus = 1\n", None).is_err());
    }

    #[test]
    fn table_interpolation() {
        let t = parse_table("1 1+0i 0+0i 1\n2 3+0i 0+2i 2\n").unwrap();
        let p = CoefficientProblem::tabulated(t, f64::INFINITY, c(0.0, 0.0)).unwrap();
        let (pp, q, w) = p.coefficients(1.5);
        assert_eq!((pp, q, w), (c(2.0, 0.0), c(0.0, 1.0), 1.5));
    }

    #[test]
    fn builtin_families_valid_on_log_grid() {
        let probs = vec![
            CoefficientProblem::free(c(0.0, 0.0)),
            CoefficientProblem::oscillator(c(-1.0, 0.0), 3.0, c(0.0, 0.0)).unwrap(),
            make_power_law(PowerLawParams { p1: -1.0, p2: 2.0, a1: 1.0, a2: 0.5, q1: 1.0, b1: 2.0, omega: -0.5, ..Default::default() }, c(0.0, 0.0)).unwrap(),
        ];
        for p in probs {
            for k in 0..1000 {
                let x = p.interval.a + 1e-3 * 10f64.powf(k as f64 * 9.0 / 999.0);
                let (pp, _, w) = evaluate(&p, x).unwrap();
                assert!(w > 0.0 && pp.norm() > 0.0);
                assert_eq!(p.coefficients(x), p.coefficients(x));
            }
        }
    }
}
