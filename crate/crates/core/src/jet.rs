//! Univariate truncated Taylor series ("jets").
//!
//! A [`TaylorJet`] of order `n` at `s0` stores the Taylor coefficients
//! `g^(i)(s0) / i!` for `i = 0..=n`. Arithmetic on jets is exact polynomial
//! arithmetic truncated at `n`, so the `i`-th derivative of a sum, product or
//! composition is obtained without any step-size error.
//!
//! Coefficients rather than raw derivatives are stored because the factorial
//! scaling keeps magnitudes moderate when high powers of large frequencies
//! appear. Raw derivatives are only produced by [`TaylorJet::derivative`].

use crate::error::{usage, Error, Result};
use crate::primitive::ScalarPrimitive;

/// Largest jet order accepted anywhere in the crate.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    base_point: f64,
    coeffs: Vec<f64>,
}

impl TaylorJet {
    /// Builds a jet from Taylor coefficients. The order is `coeffs.len() - 1`.
    pub fn new(base_point: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return usage("a jet needs at least one coefficient");
        }
        if coeffs.len() > MAX_ORDER + 1 {
            return usage(format!(
                "jet order {} exceeds the maximum {MAX_ORDER}",
                coeffs.len() - 1
            ));
        }
        if !base_point.is_finite() {
            return Err(Error::NonFinite(format!("base point {base_point}")));
        }
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {i} is {c}")));
        }
        Ok(Self { base_point, coeffs })
    }

    /// Builds a jet from raw derivatives `g^(i)(s0)`.
    pub fn from_derivatives(base_point: f64, derivs: &[f64]) -> Result<Self> {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i > 0 {
                    fact *= i as f64;
                }
                d / fact
            })
            .collect();
        Self::new(base_point, coeffs)
    }

    pub fn constant(base_point: f64, value: f64, order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self::new(base_point, coeffs)
    }

    /// The jet of the identity `s ↦ s` at `base_point`.
    pub fn variable(base_point: f64, order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = base_point;
        if order > 0 {
            coeffs[1] = 1.0;
        }
        Self::new(base_point, coeffs)
    }

    pub fn zero(base_point: f64, order: usize) -> Result<Self> {
        Self::constant(base_point, 0.0, order)
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// The raw `i`-th derivative, `i! * coeffs[i]`.
    pub fn derivative(&self, i: usize) -> Result<f64> {
        if i > self.order() {
            return usage(format!(
                "derivative order {i} exceeds jet order {}",
                self.order()
            ));
        }
        Ok(self.coeffs[i] * factorial(i))
    }

    /// All raw derivatives `g^(0..=order)(s0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i > 0 {
                    fact *= i as f64;
                }
                c * fact
            })
            .collect()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return usage(format!(
                "jet orders differ: {} vs {}",
                self.order(),
                other.order()
            ));
        }
        if self.base_point != other.base_point {
            return usage(format!(
                "jet base points differ: {} vs {}",
                self.base_point, other.base_point
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.base_point, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.base_point, coeffs)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.base_point, self.coeffs.iter().map(|a| c * a).collect())
    }

    /// Truncated Cauchy product `c_i = Σ_{j ≤ i} a_j b_{i-j}`, with the
    /// pairs `(j, i - j)` summed together in ascending `j`. Commutative
    /// bit for bit.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Self::new(self.base_point, cauchy(&self.coeffs, &other.coeffs))
    }

    /// Jet of `outer ∘ g` where `self` is the jet of `g`.
    ///
    /// The outer function's Taylor series at `g(s0)` is substituted into the
    /// non-constant part of `self` and truncated (Faà di Bruno by series
    /// substitution).
    pub fn compose(&self, outer: &ScalarPrimitive) -> Result<Self> {
        Self::new(self.base_point, compose_coeffs(outer, &self.coeffs)?)
    }
}

/// Taylor coefficients of `outer ∘ g` from those of `g`.
///
/// `sin`, `cos` and `exp` use the first-order ODE recurrences they satisfy
/// (`O(n²)`), polynomials use Horner's rule on series, and everything else
/// goes through series substitution.
pub(crate) fn compose_coeffs(outer: &ScalarPrimitive, inner: &[f64]) -> Result<Vec<f64>> {
    let n = inner.len();
    let c0 = inner[0];
    match outer {
        ScalarPrimitive::Sin { omega } | ScalarPrimitive::Cos { omega } => {
            // s' = ω c g', c' = −ω s g'
            let mut s = vec![0.0; n];
            let mut c = vec![0.0; n];
            (s[0], c[0]) = (omega * c0).sin_cos();
            for k in 1..n {
                let (mut ds, mut dc) = (0.0, 0.0);
                for j in 1..=k {
                    let jg = j as f64 * inner[j];
                    ds += jg * c[k - j];
                    dc += jg * s[k - j];
                }
                s[k] = omega * ds / k as f64;
                c[k] = -omega * dc / k as f64;
            }
            Ok(if matches!(outer, ScalarPrimitive::Sin { .. }) { s } else { c })
        }
        ScalarPrimitive::Exp => {
            // e' = e g'
            let mut e = vec![0.0; n];
            e[0] = c0.exp();
            for k in 1..n {
                let mut acc = 0.0;
                for j in 1..=k {
                    acc += j as f64 * inner[j] * e[k - j];
                }
                e[k] = acc / k as f64;
            }
            Ok(e)
        }
        ScalarPrimitive::Scaled(c, p) => {
            Ok(compose_coeffs(p, inner)?.into_iter().map(|v| c * v).collect())
        }
        ScalarPrimitive::Sum(parts) => {
            let mut acc = vec![0.0; n];
            for p in parts {
                for (a, v) in acc.iter_mut().zip(compose_coeffs(p, inner)?) {
                    *a += v;
                }
            }
            Ok(acc)
        }
        ScalarPrimitive::Affine { a, b } => {
            let mut out: Vec<f64> = inner.iter().map(|v| a * v).collect();
            out[0] += b;
            Ok(out)
        }
        ScalarPrimitive::Polynomial(coeffs) => {
            // Horner in the ring of truncated series.
            let mut acc = vec![0.0; n];
            for c in coeffs.iter().rev() {
                acc = cauchy(&acc, inner);
                acc[0] += c;
            }
            Ok(acc)
        }
        _ => compose_by_substitution(outer, inner),
    }
}

/// Composition through the outer primitive's own Taylor series at `g(s0)`.
pub(crate) fn compose_by_substitution(outer: &ScalarPrimitive, inner: &[f64]) -> Result<Vec<f64>> {
    let raw = outer.raw_derivatives(inner[0], inner.len() - 1)?;
    let mut fact = 1.0;
    let outer_coeffs: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(j, d)| {
            if j > 0 {
                fact *= j as f64;
            }
            d / fact
        })
        .collect();
    Ok(substitute(&outer_coeffs, inner))
}

/// `Σ_j outer[j] * h^j` truncated to `inner.len()` terms, with `h` the inner
/// series minus its constant term. Evaluated by Horner's rule.
pub(crate) fn substitute(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    let len = inner.len();
    let mut h = inner.to_vec();
    h[0] = 0.0;
    let mut acc = vec![0.0; len];
    for &a in outer.iter().rev() {
        acc = cauchy(&acc, &h);
        acc[0] += a;
    }
    acc
}

pub(crate) fn cauchy(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        // Terms j and i - j are added pairwise, so swapping a and b gives
        // bit-identical results.
        let mut acc = 0.0;
        for j in 0..i.div_ceil(2) {
            acc += a[j] * b[i - j] + a[i - j] * b[j];
        }
        if i % 2 == 0 {
            acc += a[i / 2] * b[i / 2];
        }
        *slot = acc;
    }
    out
}

pub(crate) fn factorial(i: usize) -> f64 {
    (1..=i).fold(1.0, |acc, k| acc * k as f64)
}
