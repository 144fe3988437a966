//! The two nonlinear maps under study and their directional derivatives.
//!
//! * [`MapSpec::Ex2`] acts on 1-periodic functions by
//!   `x ↦ φ∘(ι + x) · (n + x')` with `ι(s) = n s`. This is the local form of
//!   the pullback of a 1-form on the circle by an immersion.
//! * [`MapSpec::Ex4`] acts on smooth functions on `[0, 1]` by `x ↦ φ∘x`.
//!
//! Directional derivatives are built as analytic trees:
//!
//! ```text
//! Ex2: δf(x, u) = φ'∘(ι + x) · u · (n + x') + φ∘(ι + x) · u'
//! Ex4: δf(x, u) = φ'∘x · u
//! ```
//!
//! [`MapSpec::gateaux_fd`] is a central-difference oracle used only to check
//! those formulas.

use std::fmt;

use rayon::prelude::*;

use crate::error::{usage, Error, Result};
use crate::function::{DomainTag, GridSpec, SampledFunction, SmoothFunction};
use crate::primitive::ScalarPrimitive;

/// Smallest `inf |n + x'|` accepted as inside the open domain of Ex2.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Ex2 { phi: ScalarPrimitive, n: i64 },
    Ex4 { phi: ScalarPrimitive },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMargin {
    /// `inf |n + x'|` on the grid, zero when `n + x'` changes sign; infinite
    /// for maps defined everywhere.
    pub margin: f64,
    pub inside: bool,
}

impl MapSpec {
    pub fn ex2(phi: ScalarPrimitive, n: i64) -> Result<Self> {
        if n == 0 {
            return usage("n must be nonzero");
        }
        if !phi.is_one_periodic() {
            return usage(format!("phi = {phi} must be 1-periodic for ex2"));
        }
        Ok(Self::Ex2 { phi, n })
    }

    pub fn ex4(phi: ScalarPrimitive) -> Result<Self> {
        // Sampled stand-in for "φ is a diffeomorphism".
        for j in 0..=2000 {
            let t = -10.0 + j as f64 * 0.01;
            let d = phi.raw_derivatives(t, 1)?[1];
            if d.is_nan() || d <= 0.0 {
                return usage(format!(
                    "phi = {phi} must be increasing for ex4 (phi'({t}) = {d})"
                ));
            }
        }
        Ok(Self::Ex4 { phi })
    }

    pub fn phi(&self) -> &ScalarPrimitive {
        match self {
            Self::Ex2 { phi, .. } | Self::Ex4 { phi } => phi,
        }
    }

    pub fn domain(&self) -> DomainTag {
        match self {
            Self::Ex2 { .. } => DomainTag::Periodic1,
            Self::Ex4 { .. } => DomainTag::UnitInterval,
        }
    }

    fn check_tag(&self, f: &SmoothFunction) -> Result<()> {
        if f.domain() != self.domain() {
            return usage(format!(
                "function lives in {:?}, map expects {:?}",
                f.domain(),
                self.domain()
            ));
        }
        Ok(())
    }

    pub fn in_domain(&self, x: &SmoothFunction, grid: &GridSpec) -> Result<DomainMargin> {
        self.check_tag(x)?;
        let n = match self {
            Self::Ex4 { .. } => {
                return Ok(DomainMargin {
                    margin: f64::INFINITY,
                    inside: true,
                })
            }
            Self::Ex2 { n, .. } => *n as f64,
        };
        let points = grid.points(x);
        let values = points
            .par_iter()
            .map(|&s| x.raw_derivatives_unchecked(s, 1).map(|d| n + d[1]))
            .collect::<Result<Vec<_>>>()?;
        let len = values.len();
        let crosses = (0..len).any(|j| {
            let (a, b) = (values[j], values[(j + 1) % len]);
            a == 0.0 || a.signum() != b.signum()
        });
        let margin = if crosses {
            0.0
        } else {
            values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
        };
        Ok(DomainMargin {
            margin,
            inside: margin > DOMAIN_TOLERANCE,
        })
    }

    fn require_domain(&self, x: &SmoothFunction, grid: &GridSpec) -> Result<()> {
        let m = self.in_domain(x, grid)?;
        if !m.inside {
            return Err(Error::Domain {
                what: "inf |n + x'| is not positive".into(),
                margin: m.margin,
            });
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn apply(&self, x: &SmoothFunction, grid: &GridSpec) -> Result<SmoothFunction> {
        self.require_domain(x, grid)?;
        self.apply_unchecked(x)
    }

    fn apply_unchecked(&self, x: &SmoothFunction) -> Result<SmoothFunction> {
        match self {
            Self::Ex2 { phi, n } => {
                let speed = SmoothFunction::constant(*n as f64, x.domain()).add(&x.derivative())?;
                x.compose_shifted(phi, *n)?.mul(&speed)
            }
            Self::Ex4 { phi } => x.compose(phi),
        }
    }

    /// `δf(x, u)` as an analytic tree.
    pub fn gateaux(
        &self,
        x: &SmoothFunction,
        u: &SmoothFunction,
        grid: &GridSpec,
    ) -> Result<SmoothFunction> {
        self.check_tag(u)?;
        self.require_domain(x, grid)?;
        match self {
            Self::Ex2 { phi, n } => {
                let speed = SmoothFunction::constant(*n as f64, x.domain()).add(&x.derivative())?;
                let stretch = SmoothFunction::product(&[
                    &x.compose_shifted(&phi.derivative(), *n)?,
                    u,
                    &speed,
                ])?;
                let transport = x.compose_shifted(phi, *n)?.mul(&u.derivative())?;
                stretch.add(&transport)
            }
            Self::Ex4 { phi } => x.compose(&phi.derivative())?.mul(u),
        }
    }

    /// Central difference `(f(x + t u) − f(x − t u)) / 2t` sampled on the grid
    /// of `f(x + t u)`.
    pub fn gateaux_fd(
        &self,
        x: &SmoothFunction,
        u: &SmoothFunction,
        t: f64,
        grid: &GridSpec,
    ) -> Result<SampledFunction> {
        self.check_tag(u)?;
        let plus = self.apply(&x.add(&u.scale(t))?, grid)?;
        let minus = self.apply(&x.add(&u.scale(-t))?, grid)?;
        let points = grid.points(&plus);
        let values = points
            .par_iter()
            .map(|&s| Ok((plus.evaluate(s)? - minus.evaluate(s)?) / (2.0 * t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledFunction { points, values })
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ex2 { phi, n } => write!(f, "ex2(phi = {phi}, n = {n})"),
            Self::Ex4 { phi } => write!(f, "ex4(phi = {phi})"),
        }
    }
}

/// Samples `f` at the given points.
pub fn sample_at(f: &SmoothFunction, points: &[f64]) -> Result<SampledFunction> {
    let values = points
        .par_iter()
        .map(|&s| f.evaluate(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledFunction {
        points: points.to_vec(),
        values,
    })
}
