//! Oscillatory-probe counterexamples to the almost-tame estimate.
//!
//! For a map `f` and base point `x`, pick `t0` where `φ'` (Ex2) or `φ''`
//! (Ex4) is nonzero and `s0` whose image under the inner function is `t0`.
//! With `ε0 = 1/l` the probes are
//!
//! ```text
//! u(s) = ε0,     z(s) = (2πm)^{-k+1/2} sin(2πm (s − s0)),
//! ```
//!
//! so `p_{k-1}(z) = (2πm)^{-1/2}` shrinks while `z^(k)(s0) = ±(2πm)^{1/2}`
//! grows. The response `v = δf(x + z, u) − δf(x, u)` then satisfies
//!
//! ```text
//! v^(top) = ε0 (ψ∘(inner + z) · z^(k) + T_z),
//! ```
//!
//! with `top = k − 1, ψ = φ'` for Ex2 and `top = k, ψ = φ''` for Ex4, and a
//! residual `T_z` built only from lower derivatives of `z`. Sweeping `m`
//! exhibits the `√m` growth of `|v^(top)(s0)|` that breaks the estimate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::function::{seminorm_p, seminorms, DomainTag, GridSpec, SampledFunction, SmoothFunction};
use crate::maps::MapSpec;
use crate::primitive::ScalarPrimitive;
use crate::tameness::{pnorm_eval, PNormSpec};

/// Largest probe frequency the driver accepts.
pub const MAX_M: u64 = 1 << 14;

/// `|φ'|` (or `|φ''|`) below this counts as identically zero.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub k: u32,
    pub l: u32,
    pub eps0: f64,
    pub m: u64,
    pub s0: f64,
    pub t0: f64,
}

impl ProbeParams {
    pub fn new(k: u32, l: u32, m: u64, s0: f64, t0: f64) -> Result<Self> {
        if k.is_multiple_of(2) {
            return usage("k must be odd");
        }
        if l == 0 {
            return usage("l must be positive");
        }
        if m == 0 {
            return usage("m must be positive");
        }
        Ok(Self {
            k,
            l,
            eps0: 1.0 / l as f64,
            m,
            s0,
            t0,
        })
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * PI * self.m as f64).powf(0.5 - self.k as f64)
    }
}

/// One row of an `m`-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub m: u64,
    pub p_km1_z: f64,
    pub rho1_z: f64,
    pub rho1_u: f64,
    pub top_deriv_s0: f64,
    pub predicted: f64,
    #[serde(rename = "Tz_sup")]
    pub tz_sup: f64,
    pub rho2_v: f64,
}

/// Result of [`residual_tz`].
#[derive(Debug, Clone)]
pub struct Residual {
    /// `ε0 · ψ(t0) · z^(k)(s0)`
    pub leading: f64,
    /// `v^(top)(s0)`
    pub top_at_s0: f64,
    /// `T_z` on the grid of `v`.
    pub tz: SampledFunction,
    /// `v = δf(x + z, u) − δf(x, u)`
    pub v: SmoothFunction,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSweep {
    pub t0: f64,
    pub s0: f64,
    /// No point with `φ' ≠ 0` (Ex2) or `φ'' ≠ 0` on `rng x` (Ex4).
    pub degenerate: bool,
    pub records: Vec<GrowthRecord>,
    /// Least-squares slope of `ln |v^(top)(s0)|` against `ln m`.
    pub slope: Option<f64>,
    /// Some record has `ϱ1(z) ≤ 1` and `ϱ2(v) > ϱ1(u)`.
    pub violation: bool,
}

/// Order of the derivative of `v` that blows up: `k − 1` for Ex2, `k` for Ex4.
pub fn top_order(map: &MapSpec, k: u32) -> usize {
    match map {
        MapSpec::Ex2 { .. } => k as usize - 1,
        MapSpec::Ex4 { .. } => k as usize,
    }
}

/// `φ'` (Ex2) or `φ''` (Ex4).
fn leading_outer(map: &MapSpec) -> ScalarPrimitive {
    match map {
        MapSpec::Ex2 { phi, .. } => phi.derivative(),
        MapSpec::Ex4 { phi } => phi.derivative().derivative(),
    }
}

/// `|φ'(t0)|` (Ex2) or `|φ''(t0)|` (Ex4), the coefficient `fix_m` needs.
pub fn leading_coefficient(map: &MapSpec, t0: f64) -> f64 {
    leading_outer(map).eval(t0).abs()
}

/// `ι + x` (Ex2) or `x` (Ex4) evaluated at `s`.
fn inner_at(map: &MapSpec, x: &SmoothFunction, s: f64) -> Result<f64> {
    match map {
        MapSpec::Ex2 { n, .. } => Ok(*n as f64 * s + x.evaluate(s)?),
        MapSpec::Ex4 { .. } => x.evaluate(s),
    }
}

/// Grid argmax of `|φ'|` over one period (Ex2), or of `|φ''∘x|` over `[0, 1]`
/// mapped to `t0 = x(s*)` (Ex4). Ties go to the first grid point.
pub fn find_t0(map: &MapSpec, x: &SmoothFunction, grid: &GridSpec) -> Result<f64> {
    let psi = leading_outer(map);
    let (best_t, best) = match map {
        MapSpec::Ex2 { phi, .. } => {
            let g = grid.cells(phi.frequency().max(1.0));
            let mut best = (0.0, -1.0);
            for j in 0..g {
                let t = j as f64 / g as f64;
                let v = psi.eval(t).abs();
                if v > best.1 {
                    best = (t, v);
                }
            }
            best
        }
        MapSpec::Ex4 { .. } => {
            let points = grid.points(x);
            let mut best = (0.0, -1.0);
            for s in points {
                let t = x.evaluate(s)?;
                let v = psi.eval(t).abs();
                if v > best.1 {
                    best = (t, v);
                }
            }
            best
        }
    };
    if !(best > DEGENERACY_TOLERANCE) {
        return Err(Error::NoUsableT0(format!(
            "max |{psi}| = {best:e} on the sampled range"
        )));
    }
    Ok(best_t)
}

/// A root `s0` of `n s + x(s) = t0` (Ex2) or `x(s) = t0` (Ex4): grid scan for
/// a sign change, then bisection.
pub fn find_s0(map: &MapSpec, x: &SmoothFunction, t0: f64, grid: &GridSpec) -> Result<f64> {
    let g = |s: f64| -> Result<f64> { Ok(inner_at(map, x, s)? - t0) };
    let (lo, hi, cells) = match map {
        MapSpec::Ex2 { n, .. } => {
            // n s + x(s) − t0 is negative/positive at (t0 ∓ sup|x|) / n.
            let bound = seminorm_p(x, 0, grid)?;
            let n = *n as f64;
            let a = (t0 - bound) / n;
            let b = (t0 + bound) / n;
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if lo == hi {
                (lo, hi, 0)
            } else {
                (lo, hi, grid.cells(x.max_frequency().max(1.0)))
            }
        }
        MapSpec::Ex4 { .. } => (0.0, 1.0, grid.cells(x.max_frequency().max(1.0))),
    };
    let at = |j: usize| {
        if cells == 0 {
            lo
        } else {
            lo + (hi - lo) * j as f64 / cells as f64
        }
    };
    let mut prev = (at(0), g(at(0))?);
    if prev.1 == 0.0 {
        return Ok(prev.0);
    }
    for j in 1..=cells {
        let s = at(j);
        let v = g(s)?;
        if v == 0.0 {
            return Ok(s);
        }
        if v.signum() != prev.1.signum() {
            return bisect(&g, prev.0, s, prev.1);
        }
        prev = (s, v);
    }
    Err(Error::NotFound(format!(
        "no s in [{lo}, {hi}] maps to t0 = {t0}"
    )))
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    while b - a > ROOT_TOLERANCE {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// The probe pair `(z, u)`.
pub fn build_probe(params: &ProbeParams, domain: DomainTag) -> Result<(SmoothFunction, SmoothFunction)> {
    let z = SmoothFunction::sinusoid(params.amplitude(), params.m as f64, params.s0, domain)?;
    let u = SmoothFunction::constant(params.eps0, domain);
    Ok((z, u))
}

/// Splits `v^(top)` into the leading term `ε0 ψ∘(inner + z) z^(k)` and the
/// residual `T_z`, sampled on the grid of `v`.
pub fn residual_tz(
    map: &MapSpec,
    x: &SmoothFunction,
    params: &ProbeParams,
    z: &SmoothFunction,
    u: &SmoothFunction,
    grid: &GridSpec,
) -> Result<Residual> {
    let xz = x.add(z)?;
    let v = map.gateaux(&xz, u, grid)?.sub(&map.gateaux(x, u, grid)?)?;
    let top = top_order(map, params.k);
    let psi = leading_outer(map);
    let composed = match map {
        MapSpec::Ex2 { n, .. } => xz.compose_shifted(&psi, *n)?,
        MapSpec::Ex4 { .. } => xz.compose(&psi)?,
    };
    let k = params.k as usize;
    let eps0 = params.eps0;

    let split = |s: f64| -> Result<(f64, f64)> {
        let v_top = v.raw_derivatives_unchecked(s, top)?[top];
        let zk = z.raw_derivatives_unchecked(s, k)?[k];
        let leading = eps0 * composed.evaluate(s)? * zk;
        Ok((v_top, leading))
    };

    let (top_at_s0, leading) = split(params.s0)?;
    let points = grid.points(&v);
    let values = points
        .par_iter()
        .map(|&s| split(s).map(|(vt, lead)| (vt - lead) / eps0))
        .collect::<Result<Vec<_>>>()?;
    Ok(Residual {
        leading,
        top_at_s0,
        tz: SampledFunction { points, values },
        v,
    })
}

/// Where the probes are centred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub t0: f64,
    pub s0: f64,
    /// No usable `t0` exists; `s0` is a fixed default (0 for Ex2, 0.5 for
    /// Ex4) and `t0` its image.
    pub degenerate: bool,
}

/// `t0` and `s0` for the probes. For Ex4 with constant `x`, every `s`
/// maps to `t0` and the probe is centred at `s0 = 0.5`.
pub fn anchor(map: &MapSpec, x: &SmoothFunction, grid: &GridSpec) -> Result<Anchor> {
    let constant_x = x.derivative().is_zero();
    match find_t0(map, x, grid) {
        Ok(t0) => {
            let s0 = match map {
                MapSpec::Ex4 { .. } if constant_x => 0.5,
                _ => find_s0(map, x, t0, grid)?,
            };
            Ok(Anchor {
                t0,
                s0,
                degenerate: false,
            })
        }
        Err(Error::NoUsableT0(_)) => {
            let s0 = match map {
                MapSpec::Ex2 { .. } => 0.0,
                MapSpec::Ex4 { .. } => 0.5,
            };
            Ok(Anchor {
                t0: inner_at(map, x, s0)?,
                s0,
                degenerate: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn check_m_list(m_list: &[u64]) -> Result<()> {
    if m_list.is_empty() {
        return usage("m list is empty");
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return usage("m list must be strictly ascending");
    }
    if let Some(&m) = m_list.iter().find(|&&m| m > MAX_M) {
        return Err(Error::PrecisionBudget {
            required: m,
            budget: MAX_M,
        });
    }
    if m_list.contains(&0) {
        return usage("m must be positive");
    }
    Ok(())
}

/// Runs the probe construction for every `m` and records the growth of the
/// top derivative of `v` together with the P-norms entering the estimate.
#[allow(clippy::too_many_arguments)]
pub fn growth_sweep(
    map: &MapSpec,
    x: &SmoothFunction,
    rho1: &PNormSpec,
    rho2: &PNormSpec,
    k: u32,
    l: u32,
    m_list: &[u64],
    grid: &GridSpec,
) -> Result<GrowthSweep> {
    check_m_list(m_list)?;
    ProbeParams::new(k, l, 1, 0.0, 0.0)?;
    rho1.validate()?;
    rho2.validate()?;
    let Anchor { t0, s0, degenerate } = anchor(map, x, grid)?;
    let psi_t0 = leading_outer(map).eval(t0).abs();
    let rho1_u = pnorm_eval(rho1, &SmoothFunction::constant(1.0 / l as f64, map.domain()), grid)?;

    let records = m_list
        .par_iter()
        .map(|&m| -> Result<GrowthRecord> {
            let params = ProbeParams::new(k, l, m, s0, t0)?;
            let (z, u) = build_probe(&params, map.domain())?;
            let pz = seminorms(&z, rho1.truncation.max(k as usize - 1), grid)?;
            let residual = residual_tz(map, x, &params, &z, &u, grid)?;
            Ok(GrowthRecord {
                m,
                p_km1_z: pz[k as usize - 1],
                rho1_z: rho1.from_seminorms(&pz),
                rho1_u,
                top_deriv_s0: residual.top_at_s0.abs(),
                predicted: params.eps0 * (2.0 * PI * m as f64).sqrt() * psi_t0,
                tz_sup: residual.tz.sup_abs(),
                rho2_v: pnorm_eval(rho2, &residual.v, grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let slope = log_log_slope(
        &records
            .iter()
            .map(|r| (r.m as f64, r.top_deriv_s0))
            .collect::<Vec<_>>(),
    );
    let violation = records
        .iter()
        .any(|r| r.rho1_z <= 1.0 && r.rho2_v > r.rho1_u);
    Ok(GrowthSweep {
        t0,
        s0,
        degenerate,
        records,
        slope,
        violation,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points or any nonpositive value.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Smallest power of two `m` with `(2πm)^{-1/2} ≤ 1/k`.
pub fn smallest_admissible_m(k: u32) -> u64 {
    let mut m = 1u64;
    while (2.0 * PI * m as f64).powf(-0.5) > 1.0 / k as f64 {
        m *= 2;
    }
    m
}

/// Empirical bound on `sup |T_z|` over admissible probes:
/// `2 · max sup |T_z| + 1` from five doublings of `m`, starting at the
/// smallest admissible `m`, on a coarse grid.
pub fn estimate_m(map: &MapSpec, x: &SmoothFunction, k: u32, l: u32, grid: &GridSpec) -> Result<f64> {
    ProbeParams::new(k, l, 1, 0.0, 0.0)?;
    let coarse = GridSpec {
        factor: (grid.factor / 4.0).max(8.0),
        min_points: (grid.min_points / 4).max(256),
    };
    let Anchor { t0, s0, .. } = anchor(map, x, grid)?;
    let start = smallest_admissible_m(k);
    let ms: Vec<u64> = (0..5).map(|j| start << j).filter(|&m| m <= MAX_M).collect();
    let sups = ms
        .par_iter()
        .map(|&m| -> Result<f64> {
            let params = ProbeParams::new(k, l, m, s0, t0)?;
            let (z, u) = build_probe(&params, map.domain())?;
            Ok(residual_tz(map, x, &params, &z, &u, &coarse)?.tz.sup_abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(2.0 * sups.into_iter().fold(0.0, f64::max) + 1.0)
}

/// Smallest power of two `m` that closes the argument:
///
/// * Ex2: `(2πm)^{-1/2} ≤ 1/k` and `l + M < (2πm)^{1/2} |φ'(t0)|`;
/// * Ex4: `m > (2π)^{-1} max{k², |φ''(t0)|^{-2} (l + M)²}`.
///
/// `leading` is `|φ'(t0)|` or `|φ''(t0)|` respectively.
pub fn fix_m(map: &MapSpec, k: u32, l: u32, m_estimate: f64, leading: f64) -> Result<u64> {
    if !(m_estimate >= 0.0) {
        return usage("M estimate must be nonnegative");
    }
    if !(leading.abs() > DEGENERACY_TOLERANCE) {
        return Err(Error::NoUsableT0(format!("leading coefficient {leading:e}")));
    }
    let (k, l, c) = (k as f64, l as f64, leading.abs());
    let ok = |m: f64| -> bool {
        let w = 2.0 * PI * m;
        match map {
            MapSpec::Ex2 { .. } => w.powf(-0.5) <= 1.0 / k && l + m_estimate < w.sqrt() * c,
            MapSpec::Ex4 { .. } => {
                let bound = (k * k).max((l + m_estimate).powi(2) / (c * c)) / (2.0 * PI);
                m > bound
            }
        }
    };
    let mut m = 1u64;
    while !ok(m as f64) {
        if m >= 1 << 62 {
            break;
        }
        m *= 2;
    }
    if m > MAX_M {
        return Err(Error::PrecisionBudget {
            required: m,
            budget: MAX_M,
        });
    }
    Ok(m)
}
