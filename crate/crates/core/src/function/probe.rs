use std::f64::consts::PI;

use crate::error::{usage, Result};
use crate::jet::MAX_ORDER;

/// `i`-th derivative at `s` of the oscillatory probe
/// `z(s) = (2πm)^{-k+1/2} sin(2πm (s − s0))`, in closed form:
/// `(2πm)^{i-k+1/2} · trig_i(2πm (s − s0))` with `trig_i` cycling through
/// sin, cos, −sin, −cos.
pub fn probe_deriv_closed_form(m: u64, k: u32, s0: f64, i: usize, s: f64) -> Result<f64> {
    if m == 0 {
        return usage("probe frequency m must be at least 1");
    }
    if k.is_multiple_of(2) {
        return usage("k must be odd");
    }
    if i > MAX_ORDER {
        return usage(format!("derivative order {i} exceeds {MAX_ORDER}"));
    }
    let w = 2.0 * PI * m as f64;
    let theta = 2.0 * PI * (m as f64 * (s - s0)).rem_euclid(1.0);
    let (sn, cs) = theta.sin_cos();
    let trig = [sn, cs, -sn, -cs][i % 4];
    Ok(w.powf(i as f64 - k as f64 + 0.5) * trig)
}
