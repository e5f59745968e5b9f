//! Hamiltonians of the form `H = f(H0)` with `H0` the unit harmonic oscillator.

pub mod expr;

use std::fmt;

pub use expr::{parse_expression, BinOp, DomainError, Expr, Func, ParseError};

use crate::Error;

/// Oscillator spectrum `E_n = n + 1/2` (hbar = m = k = 1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpectrumMap;

impl SpectrumMap {
    #[inline]
    pub fn energy(self, n: usize) -> f64 {
        n as f64 + 0.5
    }

    /// `E_0 ..= E_nmax`.
    pub fn levels(self, nmax: usize) -> Vec<f64> {
        (0..=nmax).map(|n| self.energy(n)).collect()
    }
}

/// Built-in choices of `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    Identity,
    /// `chi * N(N - 1)` with `N = H0 - 1/2`.
    Kerr {
        chi: f64,
    },
    /// `2 (1 - exp(-H0 / 2))`.
    EinsteinRosen,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Builtin(Builtin),
    Expression { expr: Expr, derivative: Expr },
}

/// A differentiable scalar function `f` together with its derivative.
///
/// Values are immutable once built and can be shared freely across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianFunction {
    name: String,
    kind: Kind,
    domain_min: f64,
}

impl HamiltonianFunction {
    pub fn identity() -> Self {
        Self::from_builtin(Builtin::Identity)
    }

    pub fn kerr(chi: f64) -> Self {
        Self::from_builtin(Builtin::Kerr { chi })
    }

    pub fn einstein_rosen() -> Self {
        Self::from_builtin(Builtin::EinsteinRosen)
    }

    pub fn from_builtin(b: Builtin) -> Self {
        let name = match b {
            Builtin::Identity => "identity".to_string(),
            Builtin::Kerr { chi } => format!("kerr(chi={chi})"),
            Builtin::EinsteinRosen => "einstein_rosen".to_string(),
        };
        HamiltonianFunction {
            name,
            kind: Kind::Builtin(b),
            domain_min: 0.0,
        }
    }

    /// Looks up a built-in by name: `identity`, `einstein_rosen`, `kerr`
    /// (chi = 1) or `kerr(chi=<real>)`.
    pub fn builtin(name: &str) -> Result<Self, Error> {
        let name = name.trim();
        match name {
            "identity" => return Ok(Self::identity()),
            "einstein_rosen" => return Ok(Self::einstein_rosen()),
            "kerr" => return Ok(Self::kerr(1.0)),
            _ => {}
        }
        if let Some(arg) = name.strip_prefix("kerr(").and_then(|s| s.strip_suffix(')')) {
            let arg = arg.trim();
            let value = arg.strip_prefix("chi=").unwrap_or(arg);
            if let Ok(chi) = value.trim().parse::<f64>() {
                if chi.is_finite() {
                    return Ok(Self::kerr(chi));
                }
            }
        }
        Err(Error::UnknownHamiltonian(name.to_string()))
    }

    /// Resolves a command-line style selector: `id`, `er`, `kerr:chi=<real>`,
    /// any built-in name, or else an expression in `x`.
    pub fn resolve(spec: &str) -> Result<Self, Error> {
        let spec = spec.trim();
        match spec {
            "id" => return Ok(Self::identity()),
            "er" => return Ok(Self::einstein_rosen()),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("kerr:") {
            let value = rest.trim().strip_prefix("chi=").unwrap_or(rest).trim();
            return value
                .parse::<f64>()
                .ok()
                .filter(|chi| chi.is_finite())
                .map(Self::kerr)
                .ok_or_else(|| Error::UnknownHamiltonian(spec.to_string()));
        }
        if spec == "identity" || spec == "einstein_rosen" || spec.starts_with("kerr") {
            return Self::builtin(spec);
        }
        Ok(Self::from_expr(parse_expression(spec)?, spec))
    }

    /// Wraps a parsed expression; the derivative is computed symbolically.
    pub fn from_expr(expr: Expr, name: &str) -> Self {
        let derivative = expr.differentiate();
        HamiltonianFunction {
            name: name.to_string(),
            kind: Kind::Expression { expr, derivative },
            domain_min: 0.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain_min(&self) -> f64 {
        self.domain_min
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.kind {
            Kind::Builtin(b) => Some(b),
            Kind::Expression { .. } => None,
        }
    }

    /// The expression and its derivative, for parsed functions.
    pub fn expressions(&self) -> Option<(&Expr, &Expr)> {
        match &self.kind {
            Kind::Expression { expr, derivative } => Some((expr, derivative)),
            Kind::Builtin(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        match &self.kind {
            Kind::Builtin(Builtin::Identity) => Ok(x),
            Kind::Builtin(Builtin::Kerr { chi }) => Ok(chi * ((x - 0.5) * (x - 1.5))),
            Kind::Builtin(Builtin::EinsteinRosen) => Ok(2.0 * (1.0 - (-x / 2.0).exp())),
            Kind::Expression { expr, .. } => expr.eval(x),
        }
    }

    pub fn deriv(&self, x: f64) -> Result<f64, DomainError> {
        match &self.kind {
            Kind::Builtin(Builtin::Identity) => Ok(1.0),
            Kind::Builtin(Builtin::Kerr { chi }) => Ok(chi * (2.0 * x - 2.0)),
            Kind::Builtin(Builtin::EinsteinRosen) => Ok((-x / 2.0).exp()),
            Kind::Expression { derivative, .. } => derivative.eval(x),
        }
    }

    /// `f(E_n)` for `n = 0..=nmax`.
    pub fn spectrum(&self, nmax: usize) -> Result<Vec<f64>, DomainError> {
        SpectrumMap.levels(nmax).into_iter().map(|e| self.eval(e)).collect()
    }
}

impl fmt::Display for HamiltonianFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
