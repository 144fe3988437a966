//! P-norms built from the seminorm family, and a checker for the
//! almost-tame estimate
//!
//! ```text
//! ϱ1(z) ≤ 1  ⇒  x + z ∈ dom f  and  ϱ2(δf(x + z, u) − δf(x, u)) ≤ ϱ1(u).
//! ```
//!
//! The default P-norm is `ϱ(x) = Σ_{i ≤ N} 2^{-i} p_i(x) / (1 + p_i(x))`. It
//! only sees `p_0 … p_N`, so it is a pseudo-metric surrogate for the full
//! Fréchet metric; `N` defaults to 12, above every derivative order the
//! counterexample driver uses.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::function::{seminorms, GridSpec, SmoothFunction};
use crate::jet::MAX_ORDER;
use crate::maps::MapSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// `w_i · p / (1 + p)`, default weight `2^{-i}`.
    #[default]
    Bounded,
    /// `w_i · p`, default weight `2^{-i}`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PNormSpec {
    pub truncation: usize,
    #[serde(default)]
    pub transform: Transform,
    /// Either empty (use `2^{-i}`) or exactly `truncation + 1` positive weights.
    #[serde(default)]
    pub weights: Vec<f64>,
}

impl Default for PNormSpec {
    fn default() -> Self {
        Self {
            truncation: 12,
            transform: Transform::Bounded,
            weights: Vec::new(),
        }
    }
}

impl PNormSpec {
    pub fn bounded(truncation: usize) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation > MAX_ORDER {
            return usage(format!(
                "P-norm truncation {} exceeds {MAX_ORDER}",
                self.truncation
            ));
        }
        if !self.weights.is_empty() {
            if self.weights.len() != self.truncation + 1 {
                return usage(format!(
                    "expected {} P-norm weights, got {}",
                    self.truncation + 1,
                    self.weights.len()
                ));
            }
            if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return usage("P-norm weights must be positive and finite");
            }
        }
        Ok(())
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights
            .get(i)
            .copied()
            .unwrap_or_else(|| 0.5f64.powi(i as i32))
    }

    /// `ϱ` from precomputed seminorms `p_0 … p_N` (extra entries ignored).
    pub fn from_seminorms(&self, p: &[f64]) -> f64 {
        p.iter()
            .take(self.truncation + 1)
            .enumerate()
            .map(|(i, &v)| {
                let t = match self.transform {
                    Transform::Bounded if v.is_infinite() => 1.0,
                    Transform::Bounded => v / (1.0 + v),
                    Transform::Linear => v,
                };
                self.weight(i) * t
            })
            .sum()
    }
}

pub fn pnorm_eval(spec: &PNormSpec, x: &SmoothFunction, grid: &GridSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.from_seminorms(&seminorms(x, spec.truncation, grid)?))
}

/// A probe `(z, u)` for which the estimate fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Position of the probe in the input list.
    pub probe_index: usize,
    pub z: SmoothFunction,
    pub u: SmoothFunction,
    /// `ϱ1(z)`, at most 1.
    pub rho1_z: f64,
    /// `ϱ2(δf(x + z, u) − δf(x, u))`
    pub lhs: f64,
    /// `ϱ1(u)`
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TameCheckReport {
    pub satisfied: bool,
    pub witnesses: Vec<Witness>,
    pub samples_checked: usize,
    /// Probes with `ϱ1(z) > 1`; the estimate says nothing about them.
    pub skipped: usize,
    /// Indices of probes with `ϱ1(z) ≤ 1` but `x + z ∉ dom f`.
    pub domain_exits: Vec<usize>,
}

/// Tests the estimate at `x` for every probe pair.
///
/// A domain exit is a failure of the membership clause and makes the report
/// unsatisfied without producing a witness.
pub fn check_tame_estimate(
    map: &MapSpec,
    x: &SmoothFunction,
    rho1: &PNormSpec,
    rho2: &PNormSpec,
    probes: &[(SmoothFunction, SmoothFunction)],
    grid: &GridSpec,
) -> Result<TameCheckReport> {
    if probes.is_empty() {
        return usage("no probes given");
    }
    rho1.validate()?;
    rho2.validate()?;
    let base_domain = map.in_domain(x, grid)?;
    if !base_domain.inside {
        return usage("x itself is outside the domain of the map");
    }

    let mut report = TameCheckReport {
        satisfied: true,
        witnesses: Vec::new(),
        samples_checked: 0,
        skipped: 0,
        domain_exits: Vec::new(),
    };
    for (idx, (z, u)) in probes.iter().enumerate() {
        let rho1_z = pnorm_eval(rho1, z, grid)?;
        if rho1_z > 1.0 {
            report.skipped += 1;
            continue;
        }
        report.samples_checked += 1;
        let xz = x.add(z)?;
        if !map.in_domain(&xz, grid)?.inside {
            report.domain_exits.push(idx);
            continue;
        }
        let v = map.gateaux(&xz, u, grid)?.sub(&map.gateaux(x, u, grid)?)?;
        let lhs = pnorm_eval(rho2, &v, grid)?;
        let rhs = pnorm_eval(rho1, u, grid)?;
        if lhs > rhs {
            report.witnesses.push(Witness {
                probe_index: idx,
                z: z.clone(),
                u: u.clone(),
                rho1_z,
                lhs,
                rhs,
            });
        }
    }
    report.satisfied = report.witnesses.is_empty() && report.domain_exits.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::DomainTag;
    use crate::primitive::ScalarPrimitive;
    use approx::assert_relative_eq;

    const P: DomainTag = DomainTag::Periodic1;
    const I: DomainTag = DomainTag::UnitInterval;

    #[test]
    fn zero_has_zero_norm() {
        let g = GridSpec::default();
        for tag in [P, I] {
            assert_eq!(pnorm_eval(&PNormSpec::default(), &SmoothFunction::zero(tag), &g).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_one() {
        // p_i(1) = 1 for every i under the max-over-orders grading.
        let g = GridSpec::default();
        let one = SmoothFunction::constant(1.0, P);
        assert_relative_eq!(pnorm_eval(&PNormSpec::bounded(0), &one, &g).unwrap(), 0.5);
        let n = 12;
        let expect = 0.5 * (2.0 - 0.5f64.powi(n));
        assert_relative_eq!(
            pnorm_eval(&PNormSpec::bounded(n as usize), &one, &g).unwrap(),
            expect,
            max_relative = 1e-15
        );
    }

    #[test]
    fn weights_are_validated() {
        let mut spec = PNormSpec::bounded(2);
        spec.weights = vec![1.0, 1.0];
        assert!(spec.validate().is_err());
        spec.weights = vec![1.0, -1.0, 1.0];
        assert!(spec.validate().is_err());
        spec.weights = vec![1.0, 2.0, 3.0];
        assert!(spec.validate().is_ok());
        assert!(PNormSpec::bounded(17).validate().is_err());
    }

    #[test]
    fn linear_transform() {
        let spec = PNormSpec {
            truncation: 1,
            transform: Transform::Linear,
            weights: vec![1.0, 3.0],
        };
        let f = SmoothFunction::constant(-2.0, I);
        assert_relative_eq!(pnorm_eval(&spec, &f, &GridSpec::default()).unwrap(), 8.0);
    }

    #[test]
    fn json_shape() {
        let spec: PNormSpec =
            serde_json::from_str(r#"{"truncation": 3, "transform": "linear", "weights": [1, 1, 1, 1]}"#)
                .unwrap();
        assert_eq!(spec.transform, Transform::Linear);
        let spec: PNormSpec = serde_json::from_str(r#"{"truncation": 5}"#).unwrap();
        assert_eq!(spec, PNormSpec::bounded(5));
    }

    #[test]
    fn affine_composition_is_tame() {
        let map = MapSpec::ex4(ScalarPrimitive::Affine { a: 2.0, b: 1.0 }).unwrap();
        let probes: Vec<_> = [16.0, 256.0]
            .iter()
            .map(|&m| {
                (
                    SmoothFunction::sinusoid(1e-3, m, 0.5, I).unwrap(),
                    SmoothFunction::constant(0.125, I),
                )
            })
            .collect();
        let rho = PNormSpec::default();
        let r = check_tame_estimate(
            &map,
            &SmoothFunction::zero(I),
            &rho,
            &rho,
            &probes,
            &GridSpec::default(),
        )
        .unwrap();
        assert!(r.satisfied);
        assert_eq!(r.samples_checked, 2);
    }

    #[test]
    fn large_probes_are_skipped_and_domain_exits_flagged() {
        let map = MapSpec::ex2(ScalarPrimitive::sin_cycles(1), 1).unwrap();
        let x = SmoothFunction::zero(P);
        // Linear weights make ϱ1 large for a large probe.
        let big = PNormSpec {
            truncation: 0,
            transform: Transform::Linear,
            weights: vec![1.0],
        };
        let z_big = SmoothFunction::sinusoid(5.0, 1.0, 0.0, P).unwrap();
        let z_exit = SmoothFunction::sinusoid(0.9 / std::f64::consts::PI, 2.0, 0.0, P).unwrap();
        let u = SmoothFunction::constant(0.1, P);
        let r = check_tame_estimate(
            &map,
            &x,
            &big,
            &PNormSpec::default(),
            &[(z_big, u.clone()), (z_exit, u)],
            &GridSpec::default(),
        )
        .unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.domain_exits, vec![1]);
        assert!(!r.satisfied);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn empty_probe_list_is_rejected() {
        let map = MapSpec::ex4(ScalarPrimitive::Exp).unwrap();
        let rho = PNormSpec::default();
        assert!(check_tame_estimate(&map, &SmoothFunction::zero(I), &rho, &rho, &[], &GridSpec::default()).is_err());
    }
}
