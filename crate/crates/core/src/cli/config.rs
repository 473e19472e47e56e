//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Numbers accept fractions such as `1/64`; lists are separated by spaces or
//! commas. Unknown and repeated keys are errors.

use crate::coefficients::CoefficientBlocks;
use crate::grid::{Interval, TensorGrid};
use crate::nonlinear_ops::{Kernel, Nonlinearity, OperatorSpec};
use crate::solver::SolverConfig;
use crate::studies::{self, Problem, ResolventSource};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega1: Interval,
    pub omega2: Interval,
    pub n1: usize,
    pub n2: usize,
    pub coefficients: String,
    /// `kernel_inner`, `kernel_outer`, `projector`, `constant` or `zero`.
    pub operator: String,
    pub kernel: String,
    /// `tanh` or `power`.
    pub nonlinearity: String,
    pub scale: f64,
    pub shift: f64,
    pub q: f64,
    pub r_max: f64,
    pub constant: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
    pub ns: Vec<u32>,
    pub truncation_epsilons: Vec<f64>,
    pub resolvent_ns: Vec<u64>,
    pub resolvent_f: Vec<ResolventSource>,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub cg_tol: f64,
    pub cg_max: usize,
    pub region_margin: f64,
    pub rate_drop: usize,
    pub samples: usize,
    pub seed: u64,
    /// Assignment lines as written, for the output headers.
    pub echo: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            omega1: Interval::unit(),
            omega2: Interval::unit(),
            n1: 128,
            n2: 128,
            coefficients: "identity".into(),
            operator: "kernel_inner".into(),
            kernel: "separable".into(),
            nonlinearity: "tanh".into(),
            scale: 1.0,
            shift: 1.0,
            q: 0.5,
            r_max: 4.0,
            constant: 1.0,
            beta: solver.beta,
            epsilon: 1.0,
            epsilons: studies::default_epsilons(),
            ns: studies::truncation::default_ns(),
            truncation_epsilons: studies::truncation::default_epsilons(),
            resolvent_ns: studies::resolvent::default_ns(),
            resolvent_f: vec![ResolventSource::Eigen, ResolventSource::Pyramid],
            picard_tol: solver.picard_tol,
            picard_max: solver.picard_max,
            cg_tol: solver.cg_tol,
            cg_max: solver.cg_max,
            region_margin: 0.25,
            rate_drop: studies::rate::DEFAULT_DROP,
            samples: 200,
            seed: 0,
            echo: Vec::new(),
        }
    }
}

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {key}: {msg}"))
}

fn number(line: usize, key: &str, s: &str) -> Result<f64> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (
                a.trim().parse().map_err(|_| bad(line, key, format!("'{s}' is not a number")))?,
                b.trim().parse().map_err(|_| bad(line, key, format!("'{s}' is not a number")))?,
            );
            a / b
        }
        None => s.parse().map_err(|_| bad(line, key, format!("'{s}' is not a number")))?,
    };
    if !v.is_finite() {
        return Err(bad(line, key, format!("'{s}' is not finite")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| bad(line, key, format!("'{s}' is not a nonnegative integer")))
}

fn items(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn number_list(line: usize, key: &str, s: &str) -> Result<Vec<f64>> {
    items(s).map(|t| number(line, key, t)).collect()
}

fn interval(line: usize, key: &str, s: &str) -> Result<Interval> {
    let v = number_list(line, key, s)?;
    match v.as_slice() {
        [lo, hi] if hi > lo => Ok(Interval::new(*lo, *hi)),
        _ => Err(bad(line, key, "expected two increasing numbers 'lo hi'")),
    }
}

const KEYS: &[&str] = &[
    "omega1",
    "omega2",
    "n1",
    "n2",
    "coefficients",
    "operator",
    "kernel",
    "nonlinearity",
    "scale",
    "shift",
    "q",
    "r_max",
    "constant",
    "beta",
    "epsilon",
    "epsilons",
    "ns",
    "truncation_epsilons",
    "resolvent_ns",
    "resolvent_f",
    "picard_tol",
    "picard_max",
    "cg_tol",
    "cg_max",
    "region_margin",
    "rate_drop",
    "samples",
    "seed",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::Config(format!("line {line}: unknown key '{key}'")));
            };
            if seen.contains(&known) {
                return Err(Error::Config(format!("line {line}: key '{key}' given twice")));
            }
            seen.push(known);
            if value.is_empty() {
                return Err(bad(line, key, "missing value"));
            }
            cfg.set(line, known, value)?;
            cfg.echo.push(content.to_string());
        }
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "omega1" => self.omega1 = interval(line, key, v)?,
            "omega2" => self.omega2 = interval(line, key, v)?,
            "n1" => self.n1 = integer(line, key, v)?,
            "n2" => self.n2 = integer(line, key, v)?,
            "coefficients" => self.coefficients = v.into(),
            "operator" => self.operator = v.into(),
            "kernel" => self.kernel = v.into(),
            "nonlinearity" => self.nonlinearity = v.into(),
            "scale" => self.scale = number(line, key, v)?,
            "shift" => self.shift = number(line, key, v)?,
            "q" => self.q = number(line, key, v)?,
            "r_max" => self.r_max = number(line, key, v)?,
            "constant" => self.constant = number(line, key, v)?,
            "beta" => self.beta = number(line, key, v)?,
            "epsilon" => self.epsilon = number(line, key, v)?,
            "epsilons" => self.epsilons = number_list(line, key, v)?,
            "ns" => self.ns = items(v).map(|t| integer(line, key, t)).collect::<Result<_>>()?,
            "truncation_epsilons" => self.truncation_epsilons = number_list(line, key, v)?,
            "resolvent_ns" => self.resolvent_ns = items(v).map(|t| integer(line, key, t)).collect::<Result<_>>()?,
            "resolvent_f" => {
                self.resolvent_f = items(v)
                    .map(|t| ResolventSource::parse(t).map_err(|e| bad(line, key, e)))
                    .collect::<Result<_>>()?
            }
            "picard_tol" => self.picard_tol = number(line, key, v)?,
            "picard_max" => self.picard_max = integer(line, key, v)?,
            "cg_tol" => self.cg_tol = number(line, key, v)?,
            "cg_max" => self.cg_max = integer(line, key, v)?,
            "region_margin" => self.region_margin = number(line, key, v)?,
            "rate_drop" => self.rate_drop = integer(line, key, v)?,
            "samples" => self.samples = integer(line, key, v)?,
            "seed" => self.seed = integer(line, key, v)?,
            _ => unreachable!("key list and setter disagree on '{key}'"),
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TensorGrid> {
        TensorGrid::new(self.omega1, self.omega2, self.n1, self.n2)
    }

    pub fn blocks(&self) -> Result<CoefficientBlocks> {
        CoefficientBlocks::catalog(&self.coefficients)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let a = match self.nonlinearity.as_str() {
            "tanh" => Nonlinearity::Tanh {
                scale: self.scale,
                shift: self.shift,
            },
            "power" => Nonlinearity::Power {
                scale: self.scale,
                q: self.q,
                shift: self.shift,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown nonlinearity '{other}' (expected tanh or power)"
                )))
            }
        };
        a.validate()?;
        Ok(a)
    }

    pub fn spec(&self) -> Result<OperatorSpec> {
        let spec = match self.operator.as_str() {
            "kernel_inner" => OperatorSpec::kernel_inner(Kernel::catalog(&self.kernel)?, self.nonlinearity()?),
            "kernel_outer" => OperatorSpec::kernel_outer(Kernel::catalog(&self.kernel)?, self.nonlinearity()?),
            "projector" => OperatorSpec::projector(self.nonlinearity()?),
            "constant" => OperatorSpec::constant(self.constant),
            "zero" => OperatorSpec::zero(),
            other => {
                return Err(Error::Config(format!(
                    "unknown operator '{other}' (expected kernel_inner, kernel_outer, projector, constant or zero)"
                )))
            }
        }
        .with_r_max(self.r_max);
        spec.validate()?;
        Ok(spec)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            beta: self.beta,
            epsilon: self.epsilon,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            cg_tol: self.cg_tol,
            cg_max: self.cg_max,
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            grid: self.grid()?,
            blocks: self.blocks()?,
            spec: self.spec()?,
            solver: self.solver(),
            epsilons: self.epsilons.clone(),
            region_margin: self.region_margin,
        })
    }

    /// Header lines: the echoed assignments, or a marker for defaults.
    pub fn echo_lines(&self) -> Vec<String> {
        if self.echo.is_empty() {
            vec!["(defaults)".into()]
        } else {
            self.echo.clone()
        }
    }
}
