//! Elements of the two function spaces, represented as expression trees.
//!
//! A [`SmoothFunction`] is a tree of [`Node`]s over one real variable,
//! tagged with the space it belongs to:
//!
//! * [`DomainTag::Periodic1`]: 1-periodic smooth functions on ℝ;
//! * [`DomainTag::UnitInterval`]: smooth functions on `[0, 1]`, seen as
//!   restrictions of trees defined on all of ℝ.
//!
//! Every tree can be evaluated and expanded into a [`TaylorJet`] at any
//! point, and differentiated symbolically. Oscillatory perturbations use the
//! dedicated [`SinusoidProbe`] leaf so their derivatives come from a closed
//! form rather than from repeated products of large frequencies.

mod probe;
mod seminorm;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{usage, Error, Result};
use crate::jet::{self, TaylorJet, MAX_ORDER};
use crate::primitive::ScalarPrimitive;

pub use probe::probe_deriv_closed_form;
pub use seminorm::{sample_derivative, seminorm_p, seminorms, seminorms_on_grid, GridSpec, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainTag {
    Periodic1,
    UnitInterval,
}

/// `amplitude · trig(2π · frequency · (s − phase))` where `trig` is `sin`
/// advanced by `quarter_turns` quarter periods (sin, cos, −sin, −cos).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidProbe {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub quarter_turns: u8,
}

impl SinusoidProbe {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
            quarter_turns: 0,
        }
    }

    /// Reduced angle in `[0, 2π)`; the reduction happens on cycles so that
    /// `s = phase` gives exactly zero.
    fn angle(&self, s: f64) -> f64 {
        2.0 * PI * (self.frequency * (s - self.phase)).rem_euclid(1.0)
    }

    fn coeffs(&self, s: f64, order: usize) -> Vec<f64> {
        let (sn, cs) = self.angle(s).sin_cos();
        let cycle = [sn, cs, -sn, -cs];
        let w = 2.0 * PI * self.frequency;
        let mut scale = self.amplitude;
        (0..=order)
            .map(|i| {
                if i > 0 {
                    scale *= w / i as f64;
                }
                scale * cycle[(i + self.quarter_turns as usize) % 4]
            })
            .collect()
    }

    fn eval(&self, s: f64) -> f64 {
        let (sn, cs) = self.angle(s).sin_cos();
        self.amplitude * [sn, cs, -sn, -cs][self.quarter_turns as usize % 4]
    }

    fn derivative(&self) -> Self {
        Self {
            amplitude: self.amplitude * 2.0 * PI * self.frequency,
            quarter_turns: (self.quarter_turns + 1) % 4,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Constant(f64),
    Identity,
    Affine { a: f64, b: f64 },
    SinusoidProbe(SinusoidProbe),
    Sum(Vec<Arc<Node>>),
    Product(Vec<Arc<Node>>),
    Scale(f64, Arc<Node>),
    PrimitiveCompose(ScalarPrimitive, Arc<Node>),
}

impl Node {
    fn sum(children: Vec<Arc<Node>>) -> Arc<Node> {
        let mut kept: Vec<_> = children
            .into_iter()
            .filter(|c| !matches!(**c, Node::Constant(v) if v == 0.0))
            .collect();
        match kept.len() {
            0 => Arc::new(Node::Constant(0.0)),
            1 => kept.pop().unwrap(),
            _ => Arc::new(Node::Sum(kept)),
        }
    }

    fn product(children: Vec<Arc<Node>>) -> Arc<Node> {
        if children
            .iter()
            .any(|c| matches!(**c, Node::Constant(v) if v == 0.0))
        {
            return Arc::new(Node::Constant(0.0));
        }
        let mut kept: Vec<_> = children
            .into_iter()
            .filter(|c| !matches!(**c, Node::Constant(v) if v == 1.0))
            .collect();
        match kept.len() {
            0 => Arc::new(Node::Constant(1.0)),
            1 => kept.pop().unwrap(),
            _ => Arc::new(Node::Product(kept)),
        }
    }

    fn scale(c: f64, child: Arc<Node>) -> Arc<Node> {
        if c == 0.0 {
            return Arc::new(Node::Constant(0.0));
        }
        if c == 1.0 {
            return child;
        }
        match *child {
            Node::Constant(v) => Arc::new(Node::Constant(c * v)),
            _ => Arc::new(Node::Scale(c, child)),
        }
    }

    fn eval(&self, s: f64) -> f64 {
        match self {
            Node::Constant(c) => *c,
            Node::Identity => s,
            Node::Affine { a, b } => a * s + b,
            Node::SinusoidProbe(p) => p.eval(s),
            Node::Sum(ch) => ch.iter().map(|c| c.eval(s)).sum(),
            Node::Product(ch) => ch.iter().map(|c| c.eval(s)).product(),
            Node::Scale(c, ch) => c * ch.eval(s),
            Node::PrimitiveCompose(p, ch) => p.eval(ch.eval(s)),
        }
    }

    fn coeffs(&self, s: f64, order: usize) -> Result<Vec<f64>> {
        let n = order + 1;
        Ok(match self {
            Node::Constant(c) => {
                let mut v = vec![0.0; n];
                v[0] = *c;
                v
            }
            Node::Identity | Node::Affine { .. } => {
                let (a, b) = match self {
                    Node::Affine { a, b } => (*a, *b),
                    _ => (1.0, 0.0),
                };
                let mut v = vec![0.0; n];
                v[0] = a * s + b;
                if order > 0 {
                    v[1] = a;
                }
                v
            }
            Node::SinusoidProbe(p) => p.coeffs(s, order),
            Node::Sum(ch) => {
                let mut acc = vec![0.0; n];
                for c in ch {
                    for (a, b) in acc.iter_mut().zip(c.coeffs(s, order)?) {
                        *a += b;
                    }
                }
                acc
            }
            Node::Product(ch) => {
                let mut acc = ch[0].coeffs(s, order)?;
                for c in &ch[1..] {
                    acc = jet::cauchy(&acc, &c.coeffs(s, order)?);
                }
                acc
            }
            Node::Scale(c, ch) => ch.coeffs(s, order)?.into_iter().map(|v| c * v).collect(),
            Node::PrimitiveCompose(p, ch) => jet::compose_coeffs(p, &ch.coeffs(s, order)?)?,
        })
    }

    fn derivative(&self) -> Arc<Node> {
        match self {
            Node::Constant(_) => Arc::new(Node::Constant(0.0)),
            Node::Identity => Arc::new(Node::Constant(1.0)),
            Node::Affine { a, .. } => Arc::new(Node::Constant(*a)),
            Node::SinusoidProbe(p) => Arc::new(Node::SinusoidProbe(p.derivative())),
            Node::Sum(ch) => Node::sum(ch.iter().map(|c| c.derivative()).collect()),
            Node::Product(ch) => {
                // Leibniz: Σ_i f_1 ⋯ f_i' ⋯ f_n
                let terms = (0..ch.len())
                    .map(|i| {
                        let factors = ch
                            .iter()
                            .enumerate()
                            .map(|(j, c)| if i == j { c.derivative() } else { c.clone() })
                            .collect();
                        Node::product(factors)
                    })
                    .collect();
                Node::sum(terms)
            }
            Node::Scale(c, ch) => Node::scale(*c, ch.derivative()),
            Node::PrimitiveCompose(p, ch) => Node::product(vec![
                Arc::new(Node::PrimitiveCompose(p.derivative(), ch.clone())),
                ch.derivative(),
            ]),
        }
    }

    /// The constant `d` with `f(s + 1) − f(s) = d` for all `s`, when the
    /// tree structure guarantees one.
    fn drift(&self) -> Option<f64> {
        match self {
            Node::Constant(_) => Some(0.0),
            Node::Identity => Some(1.0),
            Node::Affine { a, .. } => Some(*a),
            Node::SinusoidProbe(p) => (p.frequency.fract() == 0.0).then_some(0.0),
            Node::Sum(ch) => ch.iter().map(|c| c.drift()).sum(),
            Node::Product(ch) => {
                let drifts: Option<Vec<f64>> = ch.iter().map(|c| c.drift()).collect();
                drifts?.iter().all(|d| *d == 0.0).then_some(0.0)
            }
            Node::Scale(c, ch) => ch.drift().map(|d| c * d),
            Node::PrimitiveCompose(p, ch) => match ch.drift()? {
                d if d == 0.0 => Some(0.0),
                d if d.fract() == 0.0 && p.is_one_periodic() => Some(0.0),
                _ => None,
            },
        }
    }

    /// Rough upper bound on the frequency content in cycles per unit,
    /// used to size seminorm grids.
    fn max_frequency(&self) -> f64 {
        match self {
            Node::Constant(_) | Node::Identity | Node::Affine { .. } => 0.0,
            Node::SinusoidProbe(p) => p.frequency.abs(),
            Node::Sum(ch) => ch.iter().map(|c| c.max_frequency()).fold(0.0, f64::max),
            Node::Product(ch) => ch.iter().map(|c| c.max_frequency()).sum(),
            Node::Scale(_, ch) => ch.max_frequency(),
            Node::PrimitiveCompose(p, ch) => {
                let slope = ch.drift().map_or(1.0, |d| d.abs().max(1.0));
                p.frequency() * slope + ch.max_frequency()
            }
        }
    }

    /// `Some(probe, scale)` when the tree is a single, possibly scaled, probe.
    fn as_scaled_probe(&self) -> Option<(SinusoidProbe, f64)> {
        match self {
            Node::SinusoidProbe(p) => Some((*p, 1.0)),
            Node::Scale(c, ch) => ch.as_scaled_probe().map(|(p, k)| (p, c * k)),
            _ => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ch: &[Arc<Node>], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, c) in ch.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        };
        match self {
            Node::Constant(c) => write!(f, "{c}"),
            Node::Identity => write!(f, "s"),
            Node::Affine { a, b } => write!(f, "({a}·s + {b})"),
            Node::SinusoidProbe(p) => write!(
                f,
                "{}·trig{}(2π·{}·(s − {}))",
                p.amplitude, p.quarter_turns, p.frequency, p.phase
            ),
            Node::Sum(ch) => join(f, ch, " + "),
            Node::Product(ch) => join(f, ch, " · "),
            Node::Scale(c, ch) => write!(f, "{c}·{ch}"),
            Node::PrimitiveCompose(p, ch) => write!(f, "[{p}]∘{ch}"),
        }
    }
}

/// An element of one of the two function spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFunction {
    node: Arc<Node>,
    domain: DomainTag,
}

impl SmoothFunction {
    /// Wraps a tree, rejecting `Periodic1` trees that are not structurally
    /// 1-periodic.
    pub fn from_node(node: Arc<Node>, domain: DomainTag) -> Result<Self> {
        if domain == DomainTag::Periodic1 && node.drift() != Some(0.0) {
            return usage(format!("{node} is not 1-periodic"));
        }
        Ok(Self { node, domain })
    }

    pub fn constant(c: f64, domain: DomainTag) -> Self {
        Self {
            node: Arc::new(Node::Constant(c)),
            domain,
        }
    }

    pub fn zero(domain: DomainTag) -> Self {
        Self::constant(0.0, domain)
    }

    pub fn identity(domain: DomainTag) -> Result<Self> {
        Self::from_node(Arc::new(Node::Identity), domain)
    }

    pub fn affine(a: f64, b: f64, domain: DomainTag) -> Result<Self> {
        Self::from_node(Arc::new(Node::Affine { a, b }), domain)
    }

    pub fn probe(probe: SinusoidProbe, domain: DomainTag) -> Result<Self> {
        Self::from_node(Arc::new(Node::SinusoidProbe(probe)), domain)
    }

    /// `s ↦ amplitude · sin(2π · frequency · (s − phase))`
    pub fn sinusoid(amplitude: f64, frequency: f64, phase: f64, domain: DomainTag) -> Result<Self> {
        Self::probe(SinusoidProbe::new(amplitude, frequency, phase), domain)
    }

    fn same_domain(parts: &[&SmoothFunction]) -> Result<DomainTag> {
        let Some(first) = parts.first() else {
            return usage("empty combination");
        };
        if parts.iter().any(|p| p.domain != first.domain) {
            return usage("cannot combine functions from different spaces");
        }
        Ok(first.domain)
    }

    pub fn sum(parts: &[&SmoothFunction]) -> Result<Self> {
        let domain = Self::same_domain(parts)?;
        Self::from_node(Node::sum(parts.iter().map(|p| p.node.clone()).collect()), domain)
    }

    pub fn product(parts: &[&SmoothFunction]) -> Result<Self> {
        let domain = Self::same_domain(parts)?;
        Self::from_node(
            Node::product(parts.iter().map(|p| p.node.clone()).collect()),
            domain,
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            node: Node::scale(c, self.node.clone()),
            domain: self.domain,
        }
    }

    pub fn add(&self, other: &SmoothFunction) -> Result<Self> {
        Self::sum(&[self, other])
    }

    pub fn sub(&self, other: &SmoothFunction) -> Result<Self> {
        Self::sum(&[self, &other.scale(-1.0)])
    }

    pub fn mul(&self, other: &SmoothFunction) -> Result<Self> {
        Self::product(&[self, other])
    }

    /// `φ ∘ self`.
    pub fn compose(&self, outer: &ScalarPrimitive) -> Result<Self> {
        Self::from_node(
            Arc::new(Node::PrimitiveCompose(outer.clone(), self.node.clone())),
            self.domain,
        )
    }

    /// `φ ∘ (ι + self)` with `ι(s) = n s`, for a 1-periodic `φ` and an
    /// integer `n`. The result is again 1-periodic.
    pub fn compose_shifted(&self, outer: &ScalarPrimitive, n: i64) -> Result<Self> {
        if self.domain != DomainTag::Periodic1 {
            return usage("compose_shifted acts on 1-periodic functions");
        }
        if !outer.is_one_periodic() {
            return usage(format!("outer function {outer} is not 1-periodic"));
        }
        let inner = Node::sum(vec![
            Arc::new(Node::Affine {
                a: n as f64,
                b: 0.0,
            }),
            self.node.clone(),
        ]);
        Self::from_node(
            Arc::new(Node::PrimitiveCompose(outer.clone(), inner)),
            self.domain,
        )
    }

    /// Symbolic derivative `f'`.
    pub fn derivative(&self) -> Self {
        Self {
            node: self.node.derivative(),
            domain: self.domain,
        }
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self.node, Node::Constant(v) if v == 0.0)
    }

    /// Frequency estimate in cycles per unit (see [`GridSpec`]).
    pub fn max_frequency(&self) -> f64 {
        self.node.max_frequency()
    }

    pub(crate) fn as_scaled_probe(&self) -> Option<(SinusoidProbe, f64)> {
        self.node.as_scaled_probe()
    }

    fn check_point(&self, s: f64) -> Result<()> {
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("evaluation point {s}")));
        }
        if self.domain == DomainTag::UnitInterval && !(0.0..=1.0).contains(&s) {
            return usage(format!("s = {s} lies outside [0, 1]"));
        }
        Ok(())
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        self.check_point(s)?;
        Ok(self.node.eval(s))
    }

    /// Taylor jet of `f` at `s`.
    pub fn jet_at(&self, s: f64, order: usize) -> Result<TaylorJet> {
        self.check_point(s)?;
        if order > MAX_ORDER {
            return usage(format!("jet order {order} exceeds {MAX_ORDER}"));
        }
        TaylorJet::new(s, self.node.coeffs(s, order)?)
    }

    /// Raw derivatives `f^(0..=order)(s)` without constructing a jet; the
    /// point must already be valid.
    pub(crate) fn raw_derivatives_unchecked(&self, s: f64, order: usize) -> Result<Vec<f64>> {
        let mut c = self.node.coeffs(s, order)?;
        let mut fact = 1.0;
        for (i, v) in c.iter_mut().enumerate().skip(1) {
            fact *= i as f64;
            *v *= fact;
        }
        Ok(c)
    }
}

impl fmt::Display for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node)
    }
}
