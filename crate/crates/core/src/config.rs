//! Flat `key = value` run configuration in user units.
//!
//! Angles carry a `_deg` suffix and logarithmic quantities a `_dB`/`_dBW`
//! suffix. Everything else is SI. Values are stored exactly as written and
//! converted only when a [`Scenario`] or [`SceneConfig`] is built, so
//! serializing and re-parsing is lossless.

use crate::error::{Error, Result};
use crate::montecarlo::{DimKind, DimSampler, OrientationSampler, SceneConfig, TerminalPolicy};
use crate::scenario::{db_to_loss_ratio, BlockageMoments, ImageVariant, Orientation, Scenario};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationMode {
    Fixed,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub d: f64,
    pub f: f64,
    pub p_t_dbw: f64,
    pub phi_t_deg: f64,
    pub phi_r_deg: f64,
    pub theta_bt_deg: f64,
    pub theta_br_deg: f64,
    pub lambda_b: f64,
    pub e_l: f64,
    pub e_w: f64,
    /// Second moments; `None` means deterministic dimensions.
    pub e_l2: Option<f64>,
    pub e_w2: Option<f64>,
    pub orientation: OrientationMode,
    pub phi_b_deg: f64,
    pub lambda_h: f64,
    pub w_h: f64,
    pub p_self: f64,
    pub carried: u8,
    pub max_reflection_loss_db: f64,
    pub second_order: bool,
    pub image_variant: ImageVariant,
    /// Side of the square simulation region (m).
    pub region: f64,
    pub dim_dist: DimKind,
    pub terminal_policy: TerminalPolicy,
    pub seed: u64,
    pub realizations: usize,
    pub bin_width: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            d: 50.0,
            f: 38e9,
            p_t_dbw: 0.0,
            phi_t_deg: 110.0,
            phi_r_deg: 50.0,
            theta_bt_deg: 10.0,
            theta_br_deg: 10.0,
            lambda_b: 12e-5,
            e_l: 25.0,
            e_w: 25.0,
            e_l2: None,
            e_w2: None,
            orientation: OrientationMode::Fixed,
            phi_b_deg: 15.0,
            lambda_h: 20e-4,
            w_h: 0.3,
            p_self: 0.25,
            carried: 2,
            max_reflection_loss_db: 19.1,
            second_order: false,
            image_variant: ImageVariant::Corrected,
            region: 800.0,
            dim_dist: DimKind::Constant,
            terminal_policy: TerminalPolicy::Block,
            seed: 1,
            realizations: 200_000,
            bin_width: 1e-9,
        }
    }
}

/// Every accepted key. `theta_b_deg` is write-only shorthand for both beamwidths.
pub const KEYS: &[&str] = &[
    "d", "f", "p_t_dBW", "phi_t_deg", "phi_r_deg", "theta_b_deg", "theta_bt_deg", "theta_br_deg",
    "lambda_b", "e_l", "e_w", "e_l2", "e_w2", "orientation", "phi_b_deg", "lambda_h", "w_h", "p_self",
    "carried", "max_reflection_loss_dB", "second_order", "image_variant", "region", "dim_dist",
    "terminal_policy", "seed", "realizations", "bin_width",
];

fn err(line: usize, key: &str, msg: impl Into<String>) -> Error {
    Error::Config { line, key: key.to_string(), msg: msg.into() }
}

fn num(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| err(line, key, format!("`{v}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(line, key, "must be finite"))
    }
}

fn check(ok: bool, line: usize, key: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(err(line, key, msg))
    }
}

impl Config {
    /// Parse configuration text; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen: Vec<&str> = vec![];
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(err(line, body, "expected `key = value`"));
            };
            let (k, v) = (k.trim(), v.trim());
            if seen.contains(&k) {
                return Err(err(line, k, "duplicate key"));
            }
            c.set(k, v, line)?;
            seen.push(k);
        }
        c.validate()?;
        Ok(c)
    }

    /// Assign one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str, line: usize) -> Result<()> {
        let n = || num(line, key, v);
        match key {
            "d" => {
                self.d = n()?;
                check(self.d > 0.0, line, key, "must be positive")?;
            }
            "f" => {
                self.f = n()?;
                check(self.f > 0.0, line, key, "must be positive")?;
            }
            "p_t_dBW" => self.p_t_dbw = n()?,
            "phi_t_deg" => self.phi_t_deg = n()?,
            "phi_r_deg" => self.phi_r_deg = n()?,
            "theta_b_deg" | "theta_bt_deg" | "theta_br_deg" => {
                let t = n()?;
                check(t > 0.0 && t <= 180.0, line, key, "beamwidth must lie in (0, 180] degrees")?;
                if key != "theta_br_deg" {
                    self.theta_bt_deg = t;
                }
                if key != "theta_bt_deg" {
                    self.theta_br_deg = t;
                }
            }
            "lambda_b" => {
                self.lambda_b = n()?;
                check(self.lambda_b >= 0.0, line, key, "must be non-negative")?;
            }
            "e_l" | "e_w" => {
                let x = n()?;
                check(x > 0.0, line, key, "must be positive")?;
                *if key == "e_l" { &mut self.e_l } else { &mut self.e_w } = x;
            }
            "e_l2" | "e_w2" => {
                let x = n()?;
                check(x > 0.0, line, key, "must be positive")?;
                *if key == "e_l2" { &mut self.e_l2 } else { &mut self.e_w2 } = Some(x);
            }
            "orientation" => {
                self.orientation = match v {
                    "fixed" => OrientationMode::Fixed,
                    "uniform" => OrientationMode::Uniform,
                    _ => return Err(err(line, key, "expected `fixed` or `uniform`")),
                }
            }
            "phi_b_deg" => self.phi_b_deg = n()?,
            "lambda_h" => {
                self.lambda_h = n()?;
                check(self.lambda_h >= 0.0, line, key, "must be non-negative")?;
            }
            "w_h" => {
                self.w_h = n()?;
                check(self.w_h > 0.0, line, key, "must be positive")?;
            }
            "p_self" => {
                self.p_self = n()?;
                check((0.0..=1.0).contains(&self.p_self), line, key, "must lie in [0, 1]")?;
            }
            "carried" => {
                self.carried = match v {
                    "0" => 0,
                    "1" => 1,
                    "2" => 2,
                    _ => return Err(err(line, key, "expected 0, 1 or 2")),
                }
            }
            "max_reflection_loss_dB" => {
                self.max_reflection_loss_db = n()?;
                check(self.max_reflection_loss_db >= 0.0, line, key, "a loss cannot be negative")?;
            }
            "second_order" => {
                self.second_order = v.parse().map_err(|_| err(line, key, "expected `true` or `false`"))?
            }
            "image_variant" => {
                self.image_variant = match v {
                    "literal" => ImageVariant::Literal,
                    "corrected" => ImageVariant::Corrected,
                    _ => return Err(err(line, key, "expected `literal` or `corrected`")),
                }
            }
            "region" => {
                self.region = n()?;
                check(self.region > 0.0, line, key, "must be positive")?;
            }
            "dim_dist" => {
                self.dim_dist = match v {
                    "constant" => DimKind::Constant,
                    "uniform" => DimKind::Uniform,
                    "exponential" => DimKind::Exponential,
                    _ => return Err(err(line, key, "expected `constant`, `uniform` or `exponential`")),
                }
            }
            "terminal_policy" => {
                self.terminal_policy = match v {
                    "block" => TerminalPolicy::Block,
                    "resample" => TerminalPolicy::Resample,
                    _ => return Err(err(line, key, "expected `block` or `resample`")),
                }
            }
            "seed" => self.seed = v.parse().map_err(|_| err(line, key, "expected an unsigned integer"))?,
            "realizations" => {
                let m: f64 = n()?;
                check(m >= 100.0 && m.fract() == 0.0, line, key, "must be an integer ≥ 100")?;
                self.realizations = m as usize;
            }
            "bin_width" => {
                self.bin_width = n()?;
                check(self.bin_width > 0.0, line, key, "must be positive")?;
            }
            _ => return Err(err(line, key, "unknown key")),
        }
        Ok(())
    }

    /// Whether `key` takes a number and can therefore be swept.
    pub fn is_numeric(key: &str) -> bool {
        !matches!(
            key,
            "orientation" | "second_order" | "image_variant" | "dim_dist" | "terminal_policy" | "carried" | "seed"
        ) && KEYS.contains(&key)
    }

    /// Cross-key checks that single assignments cannot see.
    pub fn validate(&self) -> Result<()> {
        let s = self.scenario();
        s.moments.validate().map_err(|_| err(0, "e_l2", "second moments must be at least the squared means"))?;
        s.lambda_h().map_err(|e| err(0, "lambda_b", e.to_string()))?;
        s.validate().map_err(|e| err(0, "scenario", e.to_string()))?;
        let m = &s.moments;
        DimSampler::from_moments(self.dim_dist, m.e_l, m.e_l2).map_err(|e| err(0, "dim_dist", e.to_string()))?;
        DimSampler::from_moments(self.dim_dist, m.e_w, m.e_w2).map_err(|e| err(0, "dim_dist", e.to_string()))?;
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        let r = f64::to_radians;
        Scenario {
            d: self.d,
            f: self.f,
            p_t: 10f64.powf(self.p_t_dbw / 10.0),
            phi_t: r(self.phi_t_deg),
            phi_r: r(self.phi_r_deg),
            theta_bt: r(self.theta_bt_deg),
            theta_br: r(self.theta_br_deg),
            lambda_b: self.lambda_b,
            moments: BlockageMoments {
                e_l: self.e_l,
                e_w: self.e_w,
                e_l2: self.e_l2.unwrap_or(self.e_l * self.e_l),
                e_w2: self.e_w2.unwrap_or(self.e_w * self.e_w),
            },
            orientation: match self.orientation {
                OrientationMode::Fixed => Orientation::Fixed(r(self.phi_b_deg)),
                OrientationMode::Uniform => Orientation::UniformOverPi,
            },
            lambda_h_raw: self.lambda_h,
            w_h: self.w_h,
            p_self: self.p_self,
            carried: self.carried,
            gamma_rm: db_to_loss_ratio(self.max_reflection_loss_db),
            second_order: self.second_order,
            image_variant: self.image_variant,
        }
    }

    pub fn scene_config(&self) -> Result<SceneConfig> {
        let s = self.scenario();
        let m = &s.moments;
        let cfg = SceneConfig {
            half_extent: self.region / 2.0,
            length: DimSampler::from_moments(self.dim_dist, m.e_l, m.e_l2)?,
            width: DimSampler::from_moments(self.dim_dist, m.e_w, m.e_w2)?,
            orientation: match s.orientation {
                Orientation::Fixed(p) => OrientationSampler::Fixed(p),
                Orientation::UniformOverPi => OrientationSampler::Uniform,
            },
            seed: self.seed,
            realizations: self.realizations,
            terminal_policy: self.terminal_policy,
            second_order: self.second_order,
            bin_width: self.bin_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; `Config::parse(&c.serialize()) == c`.
    pub fn serialize(&self) -> String {
        let mut o = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        kv("d", self.d.to_string());
        kv("f", self.f.to_string());
        kv("p_t_dBW", self.p_t_dbw.to_string());
        kv("phi_t_deg", self.phi_t_deg.to_string());
        kv("phi_r_deg", self.phi_r_deg.to_string());
        kv("theta_bt_deg", self.theta_bt_deg.to_string());
        kv("theta_br_deg", self.theta_br_deg.to_string());
        kv("lambda_b", self.lambda_b.to_string());
        kv("e_l", self.e_l.to_string());
        kv("e_w", self.e_w.to_string());
        if let Some(x) = self.e_l2 {
            kv("e_l2", x.to_string());
        }
        if let Some(x) = self.e_w2 {
            kv("e_w2", x.to_string());
        }
        let orientation = match self.orientation {
            OrientationMode::Fixed => "fixed",
            OrientationMode::Uniform => "uniform",
        };
        kv("orientation", orientation.into());
        kv("phi_b_deg", self.phi_b_deg.to_string());
        kv("lambda_h", self.lambda_h.to_string());
        kv("w_h", self.w_h.to_string());
        kv("p_self", self.p_self.to_string());
        kv("carried", self.carried.to_string());
        kv("max_reflection_loss_dB", self.max_reflection_loss_db.to_string());
        kv("second_order", self.second_order.to_string());
        let variant = match self.image_variant {
            ImageVariant::Literal => "literal",
            ImageVariant::Corrected => "corrected",
        };
        kv("image_variant", variant.into());
        kv("region", self.region.to_string());
        let dist = match self.dim_dist {
            DimKind::Constant => "constant",
            DimKind::Uniform => "uniform",
            DimKind::Exponential => "exponential",
        };
        kv("dim_dist", dist.into());
        let policy = match self.terminal_policy {
            TerminalPolicy::Block => "block",
            TerminalPolicy::Resample => "resample",
        };
        kv("terminal_policy", policy.into());
        kv("seed", self.seed.to_string());
        kv("realizations", self.realizations.to_string());
        kv("bin_width", self.bin_width.to_string());
        o
    }
}
