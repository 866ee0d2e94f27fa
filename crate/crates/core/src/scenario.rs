//! Deployment parameterization shared by the analytic and simulation pipelines.

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// First and second moments of building length and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageMoments {
    pub e_l: f64,
    pub e_w: f64,
    pub e_l2: f64,
    pub e_w2: f64,
}

impl BlockageMoments {
    /// Moments of deterministic dimensions.
    pub fn constant(l: f64, w: f64) -> Self {
        Self { e_l: l, e_w: w, e_l2: l * l, e_w2: w * w }
    }

    /// Moments seen by a face family whose reflecting side is the width:
    /// the roles of length and width trade places.
    pub fn swapped(self) -> Self {
        Self { e_l: self.e_w, e_w: self.e_l, e_l2: self.e_w2, e_w2: self.e_l2 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |m: f64, m2: f64| m >= 0.0 && m2.is_finite() && m2 >= m * m * (1.0 - 1e-12);
        if ok(self.e_l, self.e_l2) && ok(self.e_w, self.e_w2) {
            Ok(())
        } else {
            Err(Error::InvalidScenario(format!("inconsistent dimension moments {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orientation {
    /// Every building has its length axis at this angle (radians).
    Fixed(f64),
    /// Length-axis angles are uniform over [0, π).
    UniformOverPi,
}

/// Formula variant for the image-transmitter reach and the upper image edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageVariant {
    /// Formulas exactly as typeset.
    Literal,
    /// Dimensionally consistent reading: tangent inside the arctangent and
    /// the half-depth term outside the distance scaling.
    Corrected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Tx-Rx separation (m).
    pub d: f64,
    /// Carrier frequency (Hz).
    pub f: f64,
    /// Transmit power (W). Cancels from every normalized output.
    pub p_t: f64,
    pub phi_t: f64,
    pub phi_r: f64,
    pub theta_bt: f64,
    pub theta_br: f64,
    /// Building density (1/m²).
    pub lambda_b: f64,
    pub moments: BlockageMoments,
    pub orientation: Orientation,
    /// Human density before thinning by building footprints (1/m²).
    pub lambda_h_raw: f64,
    /// Human disc diameter (m).
    pub w_h: f64,
    pub p_self: f64,
    /// Number of hand-held terminals, 0..=2.
    pub carried: u8,
    /// Maximum reflection power coefficient (linear).
    pub gamma_rm: f64,
    /// Include the second-order branch in PDP and delay statistics.
    pub second_order: bool,
    pub image_variant: ImageVariant,
}

impl Default for Scenario {
    fn default() -> Self {
        let deg = f64::to_radians;
        Self {
            d: 50.0,
            f: 38e9,
            p_t: 1.0,
            phi_t: deg(110.0),
            phi_r: deg(50.0),
            theta_bt: deg(10.0),
            theta_br: deg(10.0),
            lambda_b: 12e-5,
            moments: BlockageMoments::constant(25.0, 25.0),
            orientation: Orientation::Fixed(deg(15.0)),
            lambda_h_raw: 20e-4,
            w_h: 0.3,
            p_self: 0.25,
            carried: 2,
            gamma_rm: db_to_loss_ratio(19.1),
            second_order: false,
            image_variant: ImageVariant::Corrected,
        }
    }
}

/// Linear power ratio retained after a loss of `db` decibels.
pub fn db_to_loss_ratio(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let pi = std::f64::consts::PI;
        let bad = |what: &str| Err(Error::InvalidScenario(what.to_string()));
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad("d must be positive");
        }
        if !(self.f > 0.0 && self.f.is_finite()) {
            return bad("f must be positive");
        }
        if !(self.p_t > 0.0) {
            return bad("p_t must be positive");
        }
        if !(self.phi_t.is_finite() && self.phi_r.is_finite()) {
            return bad("pointing angles must be finite");
        }
        if !(self.theta_bt > 0.0 && self.theta_bt <= pi && self.theta_br > 0.0 && self.theta_br <= pi) {
            return bad("beamwidths must lie in (0, π]");
        }
        if !(self.lambda_b >= 0.0 && self.lambda_b.is_finite()) {
            return bad("lambda_b must be non-negative");
        }
        if !(self.lambda_h_raw >= 0.0 && self.lambda_h_raw.is_finite()) {
            return bad("lambda_h_raw must be non-negative");
        }
        if !(self.w_h > 0.0) {
            return bad("w_h must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_self) {
            return bad("p_self must lie in [0, 1]");
        }
        if self.carried > 2 {
            return bad("carried must be 0, 1 or 2");
        }
        if !(self.gamma_rm > 0.0 && self.gamma_rm <= 1.0) {
            return bad("gamma_rm must lie in (0, 1]");
        }
        if let Orientation::Fixed(p) = self.orientation {
            if !p.is_finite() {
                return bad("phi_b must be finite");
            }
        }
        self.moments.validate()
    }

    /// Friis constant (c / 4πf)².
    pub fn gamma_l(&self) -> f64 {
        (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.f)).powi(2)
    }

    /// Deterministic self-blockage weight P_self^i.
    pub fn self_weight(&self) -> f64 {
        self.p_self.powi(self.carried as i32)
    }

    /// Human density after removing the fraction covered by buildings.
    pub fn lambda_h(&self) -> Result<f64> {
        let keep = 1.0 - self.lambda_b * self.moments.e_l * self.moments.e_w;
        if keep < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "building coverage λ_b·E[l]·E[w] = {} exceeds 1",
                1.0 - keep
            )));
        }
        Ok(self.lambda_h_raw * keep)
    }
}
