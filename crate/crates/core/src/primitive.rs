//! Scalar smooth functions `ℝ → ℝ` used as outer functions in compositions.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{usage, Result};
use crate::jet::MAX_ORDER;

/// Highest raw derivative a primitive is asked for. Leaves room for the
/// `φ'` and `φ''` wrappers on top of a full-order jet.
const MAX_RAW_ORDER: usize = MAX_ORDER + 4;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarPrimitive {
    /// `t ↦ sin(ω t)`
    Sin { omega: f64 },
    /// `t ↦ cos(ω t)`
    Cos { omega: f64 },
    Exp,
    Tanh,
    /// `t ↦ Σ c_j t^j`, coefficients in ascending degree.
    Polynomial(Vec<f64>),
    /// `t ↦ a t + b`
    Affine { a: f64, b: f64 },
    Sum(Vec<ScalarPrimitive>),
    Scaled(f64, Box<ScalarPrimitive>),
    /// The `d`-th derivative of the inner primitive.
    Derivative(usize, Box<ScalarPrimitive>),
}

impl ScalarPrimitive {
    pub fn sin() -> Self {
        Self::Sin { omega: 1.0 }
    }

    pub fn cos() -> Self {
        Self::Cos { omega: 1.0 }
    }

    /// `t ↦ sin(2π j t)`, 1-periodic.
    pub fn sin_cycles(j: i64) -> Self {
        Self::Sin {
            omega: 2.0 * PI * j as f64,
        }
    }

    /// `t ↦ cos(2π j t)`, 1-periodic.
    pub fn cos_cycles(j: i64) -> Self {
        Self::Cos {
            omega: 2.0 * PI * j as f64,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::Polynomial(vec![c])
    }

    /// `t ↦ t + e^t`, a diffeomorphism of ℝ with `φ'' = e^t`.
    pub fn t_plus_exp() -> Self {
        Self::Sum(vec![Self::Affine { a: 1.0, b: 0.0 }, Self::Exp])
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Sin { omega } => (omega * t).sin(),
            Self::Cos { omega } => (omega * t).cos(),
            Self::Exp => t.exp(),
            Self::Tanh => t.tanh(),
            Self::Polynomial(c) => horner(c, t),
            Self::Affine { a, b } => a * t + b,
            Self::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
            Self::Scaled(c, p) => c * p.eval(t),
            Self::Derivative(d, p) => p
                .raw_derivatives(t, *d)
                .map(|v| v[*d])
                .unwrap_or(f64::NAN),
        }
    }

    /// Raw derivatives `φ^(j)(t)` for `j = 0..=order`.
    pub fn raw_derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        if order > MAX_RAW_ORDER {
            return usage(format!(
                "derivative order {order} of {self} exceeds the supported {MAX_RAW_ORDER}"
            ));
        }
        let out = match self {
            Self::Sin { omega } | Self::Cos { omega } => {
                // sin^(j)(ωt) = ω^j sin(ωt + jπ/2); cos is sin shifted a quarter turn.
                let shift = usize::from(matches!(self, Self::Cos { .. }));
                let (s, c) = (omega * t).sin_cos();
                let cycle = [s, c, -s, -c];
                let mut w = 1.0;
                (0..=order)
                    .map(|j| {
                        let v = w * cycle[(j + shift) % 4];
                        w *= omega;
                        v
                    })
                    .collect()
            }
            Self::Exp => vec![t.exp(); order + 1],
            Self::Tanh => {
                let th = t.tanh();
                let mut poly = vec![0.0, 1.0];
                let mut out = Vec::with_capacity(order + 1);
                for _ in 0..=order {
                    out.push(horner(&poly, th));
                    // d/dt P(T) = P'(T) (1 - T^2)
                    let dp = poly_derivative(&poly);
                    poly = poly_mul(&dp, &[1.0, 0.0, -1.0]);
                }
                out
            }
            Self::Polynomial(c) => {
                let mut poly = c.clone();
                let mut out = Vec::with_capacity(order + 1);
                for _ in 0..=order {
                    out.push(horner(&poly, t));
                    poly = poly_derivative(&poly);
                }
                out
            }
            Self::Affine { a, b } => {
                let mut out = vec![0.0; order + 1];
                out[0] = a * t + b;
                if order > 0 {
                    out[1] = *a;
                }
                out
            }
            Self::Sum(parts) => {
                let mut out = vec![0.0; order + 1];
                for p in parts {
                    for (acc, v) in out.iter_mut().zip(p.raw_derivatives(t, order)?) {
                        *acc += v;
                    }
                }
                out
            }
            Self::Scaled(c, p) => p
                .raw_derivatives(t, order)?
                .into_iter()
                .map(|v| c * v)
                .collect(),
            Self::Derivative(d, p) => {
                let mut all = p.raw_derivatives(t, order + d)?;
                all.drain(..*d);
                all
            }
        };
        Ok(out)
    }

    /// The derivative `φ'` as a primitive, in closed form where one exists.
    pub fn derivative(&self) -> Self {
        match self {
            Self::Sin { omega } => Self::Scaled(*omega, Box::new(Self::Cos { omega: *omega })),
            Self::Cos { omega } => Self::Scaled(-omega, Box::new(Self::Sin { omega: *omega })),
            Self::Exp => Self::Exp,
            Self::Tanh => Self::Derivative(1, Box::new(Self::Tanh)),
            Self::Polynomial(c) => Self::Polynomial(poly_derivative(c)),
            Self::Affine { a, .. } => Self::Polynomial(vec![*a]),
            Self::Sum(parts) => Self::Sum(parts.iter().map(Self::derivative).collect()),
            Self::Scaled(c, p) => Self::Scaled(*c, Box::new(p.derivative())),
            Self::Derivative(d, p) => Self::Derivative(d + 1, p.clone()),
        }
    }

    /// Whether `φ(t + 1) = φ(t)` holds identically, decided structurally.
    pub fn is_one_periodic(&self) -> bool {
        match self {
            Self::Sin { omega } | Self::Cos { omega } => {
                let cycles = omega / (2.0 * PI);
                (cycles - cycles.round()).abs() <= 1e-12 * cycles.abs().max(1.0)
            }
            Self::Exp | Self::Tanh => false,
            Self::Polynomial(c) => c.iter().skip(1).all(|v| *v == 0.0),
            Self::Affine { a, .. } => *a == 0.0,
            Self::Sum(parts) => parts.iter().all(Self::is_one_periodic),
            Self::Scaled(c, p) => *c == 0.0 || p.is_one_periodic(),
            Self::Derivative(_, p) => p.is_one_periodic(),
        }
    }

    /// Highest oscillation frequency in cycles per unit of `t`; zero for
    /// non-oscillatory primitives.
    pub fn frequency(&self) -> f64 {
        match self {
            Self::Sin { omega } | Self::Cos { omega } => omega.abs() / (2.0 * PI),
            Self::Sum(parts) => parts.iter().map(Self::frequency).fold(0.0, f64::max),
            Self::Scaled(_, p) | Self::Derivative(_, p) => p.frequency(),
            _ => 0.0,
        }
    }
}

impl fmt::Display for ScalarPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sin { omega } => write!(f, "sin({omega}·t)"),
            Self::Cos { omega } => write!(f, "cos({omega}·t)"),
            Self::Exp => write!(f, "exp(t)"),
            Self::Tanh => write!(f, "tanh(t)"),
            Self::Polynomial(c) => write!(f, "poly{c:?}"),
            Self::Affine { a, b } => write!(f, "{a}·t + {b}"),
            Self::Sum(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Self::Scaled(c, p) => write!(f, "{c}·{p}"),
            Self::Derivative(d, p) => write!(f, "D^{d}[{p}]"),
        }
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, v)| j as f64 * v)
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
