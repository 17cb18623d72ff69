//! Run configuration: problem file, flag overrides and tolerance keys.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C;
use sims_core::mextend::{Rect, ScanConfig};
use sims_core::problem::{parse_complex, parse_problem, parse_real};
use sims_core::weyl::LimitConfig;
use sims_core::{make_schedule, CoefficientProblem, TruncationSchedule};

use crate::Failure;

/// Tolerance keys accepted by `--tol key=value`.
pub const TOL_KEYS: &str = "integration (1e-10), disk (1e-6), nesting (1e-8), boundary (1e-8), \
limit_point (1e-8), plateau (1e-4), wronskian (1e-8), scan (1e-6)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub integration: f64,
    pub disk: f64,
    pub nesting: f64,
    pub boundary: f64,
    pub limit_point: f64,
    pub plateau: f64,
    pub wronskian: f64,
    pub scan: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let l = LimitConfig::default();
        Self {
            integration: l.ode_tol,
            disk: l.disk_tol,
            nesting: l.nest_tol,
            boundary: l.boundary_tol,
            limit_point: l.limit_point_threshold,
            plateau: l.plateau_tol,
            wronskian: 1e-8,
            scan: ScanConfig::default().tol,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, spec: &str) -> Result<(), Failure> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--tol expects key=value, got '{spec}'")))?;
        let v = parse_real(v).map_err(|e| Failure::Input(e.to_string()))?;
        if v.is_nan() || v <= 0.0 {
            return Err(Failure::Input(format!("tolerance '{k}' must be positive")));
        }
        let slot = match k.trim() {
            "integration" => &mut self.integration,
            "disk" => &mut self.disk,
            "nesting" => &mut self.nesting,
            "boundary" => &mut self.boundary,
            "limit_point" => &mut self.limit_point,
            "plateau" => &mut self.plateau,
            "wronskian" => &mut self.wronskian,
            "scan" => &mut self.scan,
            other => return Err(Failure::Input(format!("unknown tolerance key '{other}'; known: {TOL_KEYS}"))),
        };
        *slot = v;
        Ok(())
    }

    pub fn limit(&self) -> LimitConfig {
        LimitConfig {
            ode_tol: self.integration,
            disk_tol: self.disk,
            nest_tol: self.nesting,
            boundary_tol: self.boundary,
            limit_point_threshold: self.limit_point,
            plateau_tol: self.plateau,
            ..LimitConfig::default()
        }
    }
}

/// Everything a command needs after parsing.
pub struct RunConfig {
    pub problem_file: Option<PathBuf>,
    pub lambda: Option<String>,
    pub alpha: Option<String>,
    pub rect: Option<String>,
    pub schedule: Option<String>,
    pub tol: Tolerances,
    pub seed: u64,
    pub filter: Option<String>,
    pub samples: Option<PathBuf>,
    pub count: usize,
    pub cut: Option<f64>,
    pub anchor: Option<String>,
}

impl RunConfig {
    /// The problem with `--alpha` applied, and the schedule from `--schedule`,
    /// the problem file, or the default.
    pub fn problem(&self) -> Result<(CoefficientProblem, TruncationSchedule), Failure> {
        let path = self.problem_file.as_ref().ok_or_else(|| Failure::Input("--problem is required".into()))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        let spec = parse_problem(&text, path.parent().or(Some(Path::new(".")))).map_err(Failure::from)?;
        let mut problem = spec.problem;
        if let Some(a) = &self.alpha {
            problem = problem.with_alpha(parse_complex(a).map_err(Failure::from)?);
        }
        let schedule = match &self.schedule {
            Some(s) => parse_schedule(&problem, s)?,
            None => match spec.schedule {
                Some(s) => s,
                None => default_schedule(&problem)?,
            },
        };
        Ok((problem, schedule))
    }

    pub fn lambda(&self) -> Result<C, Failure> {
        let s = self.lambda.as_ref().ok_or_else(|| Failure::Input("--lambda is required".into()))?;
        parse_complex(s).map_err(Failure::from)
    }

    pub fn anchor(&self) -> Result<Option<C>, Failure> {
        self.anchor.as_deref().map(|s| parse_complex(s).map_err(Failure::from)).transpose()
    }

    pub fn rect(&self) -> Result<Rect, Failure> {
        let s = self.rect.as_ref().ok_or_else(|| Failure::Input("--rect is required".into()))?;
        let v: Vec<f64> = s
            .split(',')
            .map(|t| parse_real(t).map_err(Failure::from))
            .collect::<Result<_, _>>()?;
        if v.len() != 4 || !(v[0] < v[2] && v[1] < v[3]) {
            return Err(Failure::Input(format!("--rect expects x0,y0,x1,y1 with x0 < x1 and y0 < y1, got '{s}'")));
        }
        Ok(Rect::new(v[0], v[1], v[2], v[3]))
    }

    pub fn scan(&self) -> ScanConfig {
        ScanConfig { tol: self.tol.scan, ..ScanConfig::default() }
    }
}

/// `x0:ratio:count`.
pub fn parse_schedule(problem: &CoefficientProblem, s: &str) -> Result<TruncationSchedule, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Input(format!("--schedule expects x0:ratio:count, got '{s}'")));
    }
    let x0 = parse_real(parts[0]).map_err(Failure::from)?;
    let ratio = parse_real(parts[1]).map_err(Failure::from)?;
    let count = parts[2]
        .parse::<usize>()
        .map_err(|_| Failure::Input(format!("schedule count must be an integer, got '{}'", parts[2])))?;
    make_schedule(problem.interval, x0, ratio, count).map_err(Failure::from)
}

/// Doubling from `a + 2` on half-lines, halving the gap to `b` otherwise.
pub fn default_schedule(problem: &CoefficientProblem) -> Result<TruncationSchedule, Failure> {
    let iv = problem.interval;
    let s = if iv.is_unbounded() {
        make_schedule(iv, iv.a + 2.0, 2.0, 7)
    } else {
        make_schedule(iv, iv.a + 0.5 * (iv.b - iv.a), 0.5, 8)
    };
    s.map_err(Failure::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_keys() {
        let mut t = Tolerances::default();
        t.set("wronskian=1e-30").unwrap();
        assert_eq!(t.wronskian, 1e-30);
        assert!(matches!(t.set("bogus=1"), Err(Failure::Input(_))));
        assert!(matches!(t.set("disk"), Err(Failure::Input(_))));
        assert!(matches!(t.set("disk=-1"), Err(Failure::Input(_))));
        assert_eq!(t.limit().disk_tol, 1e-6);
    }

    #[test]
    fn schedule_flag() {
        let p = CoefficientProblem::free(C::new(0.0, 0.0));
        assert_eq!(parse_schedule(&p, "2:2:3").unwrap().points, vec![2.0, 4.0, 8.0]);
        assert!(parse_schedule(&p, "2:2").is_err());
        assert_eq!(default_schedule(&p).unwrap().points[0], 3.0);
    }
}
