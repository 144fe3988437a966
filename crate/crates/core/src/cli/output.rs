//! CSV and JSON tables of growth records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::driver::{GrowthRecord, GrowthSweep};

pub const CSV_HEADER: [&str; 8] = [
    "m",
    "p_km1_z",
    "rho1_z",
    "rho1_u",
    "top_deriv_s0",
    "predicted",
    "Tz_sup",
    "rho2_v",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(records: &[GrowthRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.m.to_string(),
            format_f64(r.p_km1_z),
            format_f64(r.rho1_z),
            format_f64(r.rho1_u),
            format_f64(r.top_deriv_s0),
            format_f64(r.predicted),
            format_f64(r.tz_sup),
            format_f64(r.rho2_v),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<GrowthRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepDocument {
    pub variant: String,
    pub phi: String,
    pub k: u32,
    pub l: u32,
    pub t0: f64,
    pub s0: f64,
    pub degenerate: bool,
    pub slope: Option<f64>,
    pub violation: bool,
    pub records: Vec<GrowthRecord>,
}

impl SweepDocument {
    pub fn new(variant: &str, phi: &str, k: u32, l: u32, sweep: &GrowthSweep) -> Self {
        Self {
            variant: variant.to_owned(),
            phi: phi.to_owned(),
            k,
            l,
            t0: sweep.t0,
            s0: sweep.s0,
            degenerate: sweep.degenerate,
            slope: sweep.slope,
            violation: sweep.violation,
            records: sweep.records.clone(),
        }
    }
}
