//! Geometric Monte Carlo oracle: Poisson scenes of rectangular buildings and
//! disc-shaped people, image-theory ray tracing and seeded estimators.

mod estimate;
mod scene;
mod trace;

pub use estimate::{estimate, run, Estimate, EstimateWithCI, Histogram, McSummary, Quantity};
pub use scene::{generate_scene, Scene, TILE};
pub use trace::{trace_first_order, trace_second_order, Link, PathOrder, RayPath};

use crate::error::{Error, Result};
use crate::scenario::{Orientation, Scenario};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Family of building-dimension distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimKind {
    Constant,
    Uniform,
    /// Exponential shifted so both moments match.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimSampler {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    ShiftedExponential { shift: f64, scale: f64 },
}

impl DimSampler {
    /// Sampler of the given family with mean `m` and second moment `m2`.
    pub fn from_moments(kind: DimKind, m: f64, m2: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidScenario(format!("building dimension mean {m} must be positive")));
        }
        let var = (m2 - m * m).max(0.0);
        if var <= 1e-12 * m * m || kind == DimKind::Constant {
            if kind != DimKind::Constant && var > 0.0 {
                log::debug!("variance {var} too small for a {kind:?} sampler; using a constant");
            }
            if kind == DimKind::Constant && var > 1e-9 * m * m {
                return Err(Error::InvalidScenario(format!(
                    "constant dimensions need E[x²] = E[x]², got {m2} vs {}",
                    m * m
                )));
            }
            return Ok(Self::Constant(m));
        }
        let sd = var.sqrt();
        match kind {
            DimKind::Uniform => {
                let h = 3f64.sqrt() * sd;
                if m - h <= 0.0 {
                    return Err(Error::InvalidScenario(format!("uniform dimensions with mean {m} and sd {sd} reach zero")));
                }
                Ok(Self::Uniform { lo: m - h, hi: m + h })
            }
            DimKind::Exponential => {
                if m - sd < 0.0 {
                    return Err(Error::InvalidScenario(format!("shifted exponential needs sd {sd} ≤ mean {m}")));
                }
                Ok(Self::ShiftedExponential { shift: m - sd, scale: sd })
            }
            DimKind::Constant => unreachable!(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Constant(v) => v,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::ShiftedExponential { shift, scale } => shift + scale,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            Self::Constant(v) => v * v,
            Self::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            Self::ShiftedExponential { shift, scale } => (shift + scale).powi(2) + scale * scale,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Constant(v) => v,
            Self::Uniform { lo, hi } => rng.random_range(lo..hi),
            Self::ShiftedExponential { shift, scale } => {
                // A zero draw would give a degenerate rectangle when shift is zero.
                let e: f64 = Exp1.sample(rng);
                (shift + scale * e).max(1e-9)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationSampler {
    Fixed(f64),
    Uniform,
}

/// What to do with scenes that place a terminal inside a building.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalPolicy {
    /// Keep the scene; the enclosing building blocks every path.
    Block,
    /// Redraw the scene until both terminals are outdoors.
    Resample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub half_extent: f64,
    pub length: DimSampler,
    pub width: DimSampler,
    pub orientation: OrientationSampler,
    pub seed: u64,
    pub realizations: usize,
    pub terminal_policy: TerminalPolicy,
    pub second_order: bool,
    /// PDP histogram bin width (s).
    pub bin_width: f64,
}

impl SceneConfig {
    /// Configuration whose samplers reproduce the scenario's dimension moments.
    pub fn matching(s: &Scenario, kind: DimKind, seed: u64, realizations: usize) -> Result<Self> {
        let m = &s.moments;
        Ok(Self {
            half_extent: 400.0,
            length: DimSampler::from_moments(kind, m.e_l, m.e_l2)?,
            width: DimSampler::from_moments(kind, m.e_w, m.e_w2)?,
            orientation: match s.orientation {
                Orientation::Fixed(p) => OrientationSampler::Fixed(p),
                Orientation::UniformOverPi => OrientationSampler::Uniform,
            },
            seed,
            realizations,
            terminal_policy: TerminalPolicy::Block,
            second_order: s.second_order,
            bin_width: 1e-9,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_extent > 0.0 && self.half_extent.is_finite()) {
            return Err(Error::InvalidScenario("region half-extent must be positive".into()));
        }
        if self.realizations < 100 {
            return Err(Error::InvalidScenario(format!("need at least 100 realizations, got {}", self.realizations)));
        }
        if !(self.bin_width > 0.0) {
            return Err(Error::InvalidScenario("histogram bin width must be positive".into()));
        }
        Ok(())
    }
}
