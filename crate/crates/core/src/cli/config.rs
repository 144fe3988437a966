//! Scenario configuration: JSON file and command-line overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::driver::MAX_M;
use crate::error::{usage, Error, Result};
use crate::function::{DomainTag, GridSpec, SmoothFunction};
use crate::maps::MapSpec;
use crate::primitive::ScalarPrimitive;
use crate::tameness::PNormSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ex2,
    Ex4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A base point or probe function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionDescriptor {
    Constant(f64),
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Affine {
        a: f64,
        b: f64,
    },
    Sum(Vec<FunctionDescriptor>),
}

impl Default for FunctionDescriptor {
    fn default() -> Self {
        Self::Constant(0.0)
    }
}

impl FunctionDescriptor {
    pub fn build(&self, domain: DomainTag) -> Result<SmoothFunction> {
        match self {
            Self::Constant(c) => Ok(SmoothFunction::constant(*c, domain)),
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => SmoothFunction::sinusoid(*amplitude, *frequency, *phase, domain),
            Self::Affine { a, b } => SmoothFunction::affine(*a, *b, domain),
            Self::Sum(parts) => {
                let built = parts
                    .iter()
                    .map(|p| p.build(domain))
                    .collect::<Result<Vec<_>>>()?;
                if built.is_empty() {
                    return Ok(SmoothFunction::zero(domain));
                }
                SmoothFunction::sum(&built.iter().collect::<Vec<_>>())
            }
        }
    }
}

/// Parses a named outer function:
/// `sin[:j]`, `cos[:j]` (2π j-periodic multiples), `affine:a,b`,
/// `poly:c0,c1,…`, `const:c`, `exp`, `tanh`, `t_plus_exp`.
pub fn parse_phi(desc: &str) -> Result<ScalarPrimitive> {
    let (name, args) = match desc.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a)),
        None => (desc.trim(), None),
    };
    let numbers = |a: Option<&str>| -> Result<Vec<f64>> {
        let Some(a) = a else { return Ok(Vec::new()) };
        a.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad number {v:?} in phi {desc:?}")))
            })
            .collect()
    };
    let cycles = |a: Option<&str>| -> Result<i64> {
        match a {
            None => Ok(1),
            Some(v) => v
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::Usage(format!("bad cycle count {v:?} in phi {desc:?}"))),
        }
    };
    Ok(match name {
        "sin" => ScalarPrimitive::sin_cycles(cycles(args)?),
        "cos" => ScalarPrimitive::cos_cycles(cycles(args)?),
        "exp" => ScalarPrimitive::Exp,
        "tanh" => ScalarPrimitive::Tanh,
        "t_plus_exp" => ScalarPrimitive::t_plus_exp(),
        "affine" => match numbers(args)?[..] {
            [a, b] => ScalarPrimitive::Affine { a, b },
            _ => return usage(format!("affine needs two numbers a,b: {desc:?}")),
        },
        "poly" => {
            let c = numbers(args)?;
            if c.is_empty() {
                return usage("poly needs at least one coefficient");
            }
            ScalarPrimitive::Polynomial(c)
        }
        "const" => match numbers(args)?[..] {
            [c] => ScalarPrimitive::constant(c),
            _ => return usage(format!("const needs one number: {desc:?}")),
        },
        _ => return usage(format!("unknown phi {desc:?}")),
    })
}

fn default_m_list() -> Vec<u64> {
    (4..=12).map(|e| 1u64 << e).collect()
}

fn default_k() -> u32 {
    3
}

fn default_l() -> u32 {
    8
}

fn default_n() -> i64 {
    1
}

fn default_grid_factor() -> f64 {
    GridSpec::default().factor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub variant: Variant,
    /// Registry name; defaults to `sin` (ex2) or `t_plus_exp` (ex4).
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default = "default_n")]
    pub n: i64,
    #[serde(default)]
    pub x: FunctionDescriptor,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<u64>,
    #[serde(default = "default_grid_factor")]
    pub grid_factor: f64,
    #[serde(default)]
    pub rho1: PNormSpec,
    #[serde(default)]
    pub rho2: PNormSpec,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            phi: None,
            n: default_n(),
            x: FunctionDescriptor::default(),
            k: default_k(),
            l: default_l(),
            m_list: default_m_list(),
            grid_factor: default_grid_factor(),
            rho1: PNormSpec::default(),
            rho2: PNormSpec::default(),
            format: OutputFormat::Csv,
            output: None,
        }
    }

    pub fn phi_name(&self) -> &str {
        match (&self.phi, self.variant) {
            (Some(p), _) => p,
            (None, Variant::Ex2) => "sin",
            (None, Variant::Ex4) => "t_plus_exp",
        }
    }

    pub fn domain(&self) -> DomainTag {
        match self.variant {
            Variant::Ex2 => DomainTag::Periodic1,
            Variant::Ex4 => DomainTag::UnitInterval,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::with_factor(self.grid_factor)
    }
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub map: MapSpec,
    pub x: SmoothFunction,
    pub grid: GridSpec,
}

impl Scenario {
    /// Validates the configuration. Errors name the violated constraint.
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        if config.k.is_multiple_of(2) {
            return usage("k must be odd");
        }
        if config.k > 15 {
            return usage("k must be at most 15");
        }
        if config.l == 0 {
            return usage("l must be positive");
        }
        if !(config.grid_factor.is_finite() && config.grid_factor >= 1.0) {
            return usage("grid factor must be at least 1");
        }
        if config.m_list.is_empty() {
            return usage("m list must not be empty");
        }
        if config.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return usage("m list must be strictly ascending");
        }
        if let Some(&m) = config.m_list.iter().find(|m| !m.is_power_of_two()) {
            return usage(format!("m = {m} is not a power of two"));
        }
        if let Some(&m) = config.m_list.iter().find(|&&m| m > MAX_M) {
            return Err(Error::PrecisionBudget {
                required: m,
                budget: MAX_M,
            });
        }
        config.rho1.validate()?;
        config.rho2.validate()?;
        let phi = parse_phi(config.phi_name())?;
        let map = match config.variant {
            Variant::Ex2 => MapSpec::ex2(phi, config.n)?,
            Variant::Ex4 => MapSpec::ex4(phi)?,
        };
        let x = config.x.build(config.domain())?;
        let grid = config.grid();
        if !map.in_domain(&x, &grid)?.inside {
            return usage("base point x lies outside the domain: inf |n + x'| must be positive");
        }
        Ok(Self {
            config,
            map,
            x,
            grid,
        })
    }
}
