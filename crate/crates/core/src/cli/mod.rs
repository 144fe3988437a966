//! The `tamelab` command line.
//!
//! Exit codes: 0 success, 2 unexpected demo outcome, 64 usage or config
//! error, 65 precision budget exceeded, 66 output not writable.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::driver::{
    anchor, build_probe, estimate_m, fix_m, growth_sweep, leading_coefficient, GrowthSweep, ProbeParams,
};
use crate::error::Error;
use crate::tameness::{check_tame_estimate, PNormSpec, TameCheckReport};
use config::{FunctionDescriptor, OutputFormat, Scenario, ScenarioConfig, Variant};
use output::{format_f64, write_csv, SweepDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNEXPECTED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_BUDGET: i32 = 65;
pub const EXIT_CANT_CREATE: i32 = 66;

#[derive(Debug, Parser)]
#[command(name = "tamelab", version, about = "Probe tame estimates for composition maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the growth sweep and check for the expected outcome.
    Demo(ScenarioArgs),
    /// Write the growth records to a CSV or JSON file.
    Sweep(ScenarioArgs),
    /// Test the tame estimate on the probes listed in a JSON file.
    CheckTame {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// JSON array of `{"m": .., "k": ..}` or `{"z": .., "u": ..}` entries.
        #[arg(long)]
        probes: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Which map to study; required unless the config file names one.
    #[arg(value_enum)]
    pub variant: Option<Variant>,
    /// JSON scenario file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Outer function, e.g. `sin`, `cos:2`, `affine:2,1`, `poly:0,1,0.5`, `t_plus_exp`.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    /// Base point as JSON, e.g. `{"sinusoid": {"amplitude": 0.01, "frequency": 2}}`.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    /// Comma-separated powers of two.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u64>>,
    #[arg(long)]
    pub grid_factor: Option<f64>,
    /// P-norm as JSON, e.g. `{"truncation": 8, "transform": "linear"}`.
    #[arg(long)]
    pub rho1: Option<String>,
    #[arg(long)]
    pub rho2: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A command failure and its exit code.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(PathBuf, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Self::Lib(Error::PrecisionBudget { .. } | Error::NonFinite(_)) => EXIT_BUDGET,
            Self::Lib(_) => EXIT_USAGE,
            Self::Io(..) => EXIT_CANT_CREATE,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Self::Lib(e) => e.to_string(),
            Self::Io(p, e) => format!("cannot write {}: {e}", p.display()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

fn bad<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Lib(Error::Usage(msg.into())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).or_else(|e| bad(format!("malformed {what}: {e}")))
}

impl ScenarioArgs {
    /// Config file (if any) with the flags applied on top.
    pub fn to_config(&self) -> Result<ScenarioConfig, Error> {
        self.config_inner().map_err(|f| match f {
            Failure::Lib(e) => e,
            Failure::Io(p, e) => Error::Usage(format!("{}: {e}", p.display())),
        })
    }

    fn config_inner(&self) -> CliResult<ScenarioConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .or_else(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
                let mut c: ScenarioConfig = parse_json("config", &text)?;
                if let Some(v) = self.variant {
                    c.variant = v;
                }
                c
            }
            None => match self.variant {
                Some(v) => ScenarioConfig::new(v),
                None => return bad("a variant (ex2 or ex4) or --config is required"),
            },
        };
        if let Some(p) = &self.phi {
            c.phi = Some(p.clone());
        }
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(x) = &self.x {
            c.x = parse_json::<FunctionDescriptor>("base point", x)?;
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(l) = self.l {
            c.l = l;
        }
        if let Some(m) = &self.m_list {
            c.m_list = m.clone();
        }
        if let Some(g) = self.grid_factor {
            c.grid_factor = g;
        }
        if let Some(r) = &self.rho1 {
            c.rho1 = parse_json::<PNormSpec>("rho1", r)?;
        }
        if let Some(r) = &self.rho2 {
            c.rho2 = parse_json::<PNormSpec>("rho2", r)?;
        }
        if let Some(f) = self.format {
            c.format = f;
        }
        if let Some(o) = &self.out {
            c.output = Some(o.clone());
        }
        Ok(c)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli.command, &mut out) {
        Ok(code) => code,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: &Command, out: &mut impl Write) -> CliResult<i32> {
    match cmd {
        Command::Demo(a) => cmd_demo(&scenario(a)?, out),
        Command::Sweep(a) => cmd_sweep(&scenario(a)?, out),
        Command::CheckTame { scenario: a, probes } => cmd_check_tame(&scenario(a)?, probes, out),
    }
}

fn scenario(a: &ScenarioArgs) -> CliResult<Scenario> {
    Ok(Scenario::from_config(a.config_inner()?)?)
}

fn run_sweep(s: &Scenario) -> CliResult<GrowthSweep> {
    let c = &s.config;
    Ok(growth_sweep(&s.map, &s.x, &c.rho1, &c.rho2, c.k, c.l, &c.m_list, &s.grid)?)
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::Io(PathBuf::from("<stdout>"), e.to_string())
}

pub fn cmd_demo(s: &Scenario, out: &mut impl Write) -> CliResult<i32> {
    let c = &s.config;
    let sweep = run_sweep(s)?;
    print_sweep(s, &sweep, out).map_err(stdout_err)?;

    let expected = if sweep.degenerate {
        !sweep.violation
            && sweep
                .records
                .iter()
                .all(|r| r.top_deriv_s0 == 0.0 && r.rho2_v == 0.0)
    } else {
        sweep.violation
    };

    if sweep.degenerate {
        writeln!(out, "certificate: none, the leading coefficient vanishes everywhere").map_err(stdout_err)?;
    } else {
        let m_est = estimate_m(&s.map, &s.x, c.k, c.l, &s.grid)?;
        let lead = leading_coefficient(&s.map, sweep.t0);
        let m = fix_m(&s.map, c.k, c.l, m_est, lead)?;
        let w = 2.0 * std::f64::consts::PI * m as f64;
        writeln!(out, "certificate: M = {}, leading = {}, m = {m}", format_f64(m_est), format_f64(lead))
            .map_err(stdout_err)?;
        match c.variant {
            Variant::Ex2 => writeln!(
                out,
                "  (2πm)^(-1/2) = {} <= 1/k = {}\n  l + M = {} < (2πm)^(1/2)|φ'(t0)| = {}",
                format_f64(w.powf(-0.5)),
                format_f64(1.0 / c.k as f64),
                format_f64(c.l as f64 + m_est),
                format_f64(w.sqrt() * lead),
            ),
            Variant::Ex4 => writeln!(
                out,
                "  2πm = {} > k^2 = {}\n  2πm = {} > ((l + M)/|φ''(t0)|)^2 = {}",
                format_f64(w),
                format_f64((c.k * c.k) as f64),
                format_f64(w),
                format_f64(((c.l as f64 + m_est) / lead).powi(2)),
            ),
        }
        .map_err(stdout_err)?;
    }
    writeln!(out, "outcome: {}", if expected { "as expected" } else { "UNEXPECTED" }).map_err(stdout_err)?;
    Ok(if expected { EXIT_OK } else { EXIT_UNEXPECTED })
}

fn print_sweep(s: &Scenario, sweep: &GrowthSweep, out: &mut impl Write) -> io::Result<()> {
    let c = &s.config;
    writeln!(
        out,
        "{:?} phi={} n={} k={} l={}  t0={} s0={}{}",
        c.variant,
        c.phi_name(),
        c.n,
        c.k,
        c.l,
        format_f64(sweep.t0),
        format_f64(sweep.s0),
        if sweep.degenerate { " (degenerate)" } else { "" },
    )?;
    writeln!(
        out,
        "{:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "m", "p_km1_z", "rho1_z", "rho1_u", "top_deriv", "predicted", "Tz_sup", "rho2_v"
    )?;
    for r in &sweep.records {
        writeln!(
            out,
            "{:>6} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            r.m, r.p_km1_z, r.rho1_z, r.rho1_u, r.top_deriv_s0, r.predicted, r.tz_sup, r.rho2_v
        )?;
    }
    match sweep.slope {
        Some(v) => writeln!(out, "slope: {}", format_f64(v))?,
        None => writeln!(out, "slope: undefined")?,
    }
    writeln!(out, "violation: {}", sweep.violation)
}

pub fn cmd_sweep(s: &Scenario, out: &mut impl Write) -> CliResult<i32> {
    let c = &s.config;
    let Some(path) = &c.output else {
        return bad("sweep needs --out PATH");
    };
    let sweep = run_sweep(s)?;
    let bytes = match c.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(&sweep.records, &mut buf).map_err(|e| Failure::Io(path.clone(), e.to_string()))?;
            buf
        }
        OutputFormat::Json => {
            let variant = match c.variant {
                Variant::Ex2 => "ex2",
                Variant::Ex4 => "ex4",
            };
            let doc = SweepDocument::new(variant, c.phi_name(), c.k, c.l, &sweep);
            let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| Failure::Io(path.clone(), e.to_string()))?;
            buf.push(b'\n');
            buf
        }
    };
    write_file(path, &bytes)?;
    writeln!(out, "wrote {} rows to {}", sweep.records.len(), path.display()).map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum ProbeEntry {
    Sweep { m: u64, k: u32 },
    Explicit { z: FunctionDescriptor, u: FunctionDescriptor },
}

pub fn cmd_check_tame(s: &Scenario, probes: &Path, out: &mut impl Write) -> CliResult<i32> {
    let c = &s.config;
    let text = fs::read_to_string(probes)
        .or_else(|e| bad(format!("cannot read probe file {}: {e}", probes.display())))?;
    let entries: Vec<ProbeEntry> = parse_json("probe file", &text)?;
    if entries.is_empty() {
        return bad("probe file lists no probes");
    }
    let domain = c.domain();
    let mut pairs = Vec::with_capacity(entries.len());
    let mut centre = None;
    for e in &entries {
        pairs.push(match e {
            ProbeEntry::Sweep { m, k } => {
                let a = match centre {
                    Some(a) => a,
                    None => *centre.insert(anchor(&s.map, &s.x, &s.grid)?),
                };
                if *m > crate::driver::MAX_M {
                    return Err(Error::PrecisionBudget {
                        required: *m,
                        budget: crate::driver::MAX_M,
                    }
                    .into());
                }
                build_probe(&ProbeParams::new(*k, c.l, *m, a.s0, a.t0)?, domain)?
            }
            ProbeEntry::Explicit { z, u } => (z.build(domain)?, u.build(domain)?),
        });
    }
    let report = check_tame_estimate(&s.map, &s.x, &c.rho1, &c.rho2, &pairs, &s.grid)?;
    print_report(&report, out).map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn print_report(r: &TameCheckReport, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "satisfied: {}", r.satisfied)?;
    writeln!(out, "checked: {}  skipped (rho1(z) > 1): {}", r.samples_checked, r.skipped)?;
    if !r.domain_exits.is_empty() {
        writeln!(out, "domain exits at probes: {:?}", r.domain_exits)?;
    }
    writeln!(out, "witnesses: {}", r.witnesses.len())?;
    for w in &r.witnesses {
        writeln!(
            out,
            "  probe {}: rho1(z) = {}  lhs = {} > rhs = {}",
            w.probe_index,
            format_f64(w.rho1_z),
            format_f64(w.lhs),
            format_f64(w.rhs)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["tamelab", "demo", "ex2", "--n", "-2", "--m-list", "16,32", "--k", "5"]).unwrap();
        let Command::Demo(a) = cli.command else { panic!() };
        let c = a.to_config().unwrap();
        assert_eq!(c.n, -2);
        assert_eq!(c.k, 5);
        assert_eq!(c.m_list, vec![16, 32]);
    }

    #[test]
    fn variant_required() {
        let cli = Cli::try_parse_from(["tamelab", "demo"]).unwrap();
        let Command::Demo(a) = cli.command else { panic!() };
        assert!(a.to_config().is_err());
    }

    #[test]
    fn probe_entries() {
        let v: Vec<ProbeEntry> =
            serde_json::from_str(r#"[{"m": 16, "k": 3}, {"z": {"constant": 0.1}, "u": {"constant": 0.5}}]"#).unwrap();
        assert!(matches!(v[0], ProbeEntry::Sweep { m: 16, k: 3 }));
        assert!(matches!(v[1], ProbeEntry::Explicit { .. }));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["tamelab", "--help"]), EXIT_OK);
        assert_eq!(run(["tamelab", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["tamelab", "demo", "ex2", "--k", "4"]), EXIT_USAGE);
        assert_eq!(run(["tamelab", "demo", "ex4", "--m-list", "16,32768"]), EXIT_BUDGET);
    }
}
