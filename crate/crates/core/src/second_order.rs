//! Statistics of the virtual transmitter created by a first bounce: its reach,
//! the first-bounce feasible area, Bernoulli occupancy and the distance and
//! angle distributions of the image source.

use crate::error::{Error, Result};
use crate::first_order::{angle_set, face_families, FaceFamily, THETA_MAX};
use crate::geometry::FaceDim;
use crate::scenario::{ImageVariant, Scenario};
use std::f64::consts::{FRAC_PI_2, PI};

/// Smallest transmit-lobe edge angle admitted against the face.
const THETA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSourceModel {
    pub d_max: f64,
    pub a_prime_area: f64,
    pub p: f64,
    /// Depth of the first reflector, perpendicular to its reflecting face.
    pub a_prime: f64,
    /// Extent of the reflecting face.
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    /// Transmit lobe edges measured against the face.
    pub theta_ti: f64,
    pub theta_tu: f64,
    pub variant: ImageVariant,
}

fn cot(x: f64) -> f64 {
    1.0 / x.tan()
}

impl ImageSourceModel {
    /// Model for a reflecting face family, using the transmit lobe edges.
    pub fn for_family(s: &Scenario, fam: &FaceFamily) -> Self {
        let angles = angle_set(s.phi_t, s.phi_r, fam.phi, s.theta_bt, s.theta_br);
        let theta_ti = angles.theta_ti.clamp(THETA_MIN, THETA_MAX);
        let theta_tu = angles.theta_tu.clamp(THETA_MIN, THETA_MAX).min(theta_ti);
        let a = fam.moments.e_l;
        let a_prime = fam.moments.e_w;
        let (cphi, sphi) = (fam.phi.cos().abs(), fam.phi.sin().abs());
        let d_max = match s.image_variant {
            ImageVariant::Corrected => 0.5 * s.d * (cphi * theta_ti.tan() + sphi) + a_prime / 2.0,
            ImageVariant::Literal => 0.5 * s.d * (cphi * theta_ti.tan() + sphi + a_prime / 2.0),
        };
        let tilt = |t: f64| t.sin() / cot(t);
        let c1 = a / 2.0 * (tilt(theta_tu) + tilt(theta_ti));
        let c2 = (cot(theta_tu) - cot(theta_ti)) / 2.0;
        let h = a_prime / 2.0;
        let area = if d_max > h {
            a * (d_max - h) / 2.0 * (tilt(theta_ti) + tilt(theta_tu)) + (d_max * d_max - h * h) / 2.0 * (cot(theta_tu) - cot(theta_ti))
        } else {
            0.0
        };
        let area = area.max(0.0);
        Self {
            d_max,
            a_prime_area: area,
            p: 1.0 - (-s.lambda_b * area).exp(),
            a_prime,
            a,
            c1,
            c2,
            theta_ti,
            theta_tu,
            variant: s.image_variant,
        }
    }

    /// Model with no occupancy, used when the first bounce cannot couple.
    pub fn empty(s: &Scenario) -> Self {
        Self {
            d_max: 0.0,
            a_prime_area: 0.0,
            p: 0.0,
            a_prime: 0.0,
            a: 0.0,
            c1: 0.0,
            c2: 0.0,
            theta_ti: 0.0,
            theta_tu: 0.0,
            variant: s.image_variant,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0.0 || self.d_max <= self.a_prime / 2.0
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a_prime / 2.0, self.d_max)
    }

    pub fn distance_pdf(&self, d: f64) -> f64 {
        let (lo, hi) = self.support();
        if self.is_empty() || d < lo || d > hi {
            return 0.0;
        }
        (self.c1 + 2.0 * self.c2 * d) / self.a_prime_area
    }

    pub fn distance_cdf(&self, d: f64) -> f64 {
        let (lo, hi) = self.support();
        if d <= lo {
            return 0.0;
        }
        if d >= hi {
            return 1.0;
        }
        (self.c1 * (d - lo) + self.c2 * (d * d - lo * lo)) / self.a_prime_area
    }

    pub fn distance_quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        let rhs = u * self.a_prime_area + self.c1 * lo + self.c2 * lo * lo;
        let d = if self.c2.abs() < 1e-14 {
            rhs / self.c1
        } else {
            (-self.c1 + (self.c1 * self.c1 + 4.0 * self.c2 * rhs).sqrt()) / (2.0 * self.c2)
        };
        d.clamp(lo, hi)
    }

    /// Conditional law of the image-source angle given distance `d`.
    pub fn angle_pdf(&self, d: f64) -> Result<ImageAnglePdf> {
        let depth = d - self.a_prime / 2.0;
        if !(depth > 0.0) {
            return Err(Error::InvalidModel(format!("image distance {d} leaves no room behind the face")));
        }
        let lo = FRAC_PI_2 - self.theta_ti;
        let hi = FRAC_PI_2 - self.theta_tu;
        let tan_li = cot(self.theta_ti) - self.a / depth;
        let denom = cot(self.theta_tu) - tan_li;
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::InvalidModel("degenerate image-angle normalization".into()));
        }
        Ok(ImageAnglePdf { lo, hi, theta_li: tan_li.atan(), denom, atom_mass: (cot(self.theta_ti) - tan_li) / denom })
    }

    /// Upper edge of the angular range the image source illuminates.
    pub fn upper_edge(&self, theta_hat_ti: f64, d: f64) -> f64 {
        let ratio = self.a / (d - self.a_prime / 2.0);
        let edge = match self.variant {
            ImageVariant::Literal => (theta_hat_ti + ratio).atan().min(self.theta_tu),
            ImageVariant::Corrected => (theta_hat_ti.tan() + ratio).atan().min(FRAC_PI_2 - self.theta_tu),
        };
        edge.max(theta_hat_ti)
    }

    /// Lateral range of admissible image-ray offsets at distance `d`.
    pub fn offset_range(&self, d: f64) -> (f64, f64) {
        let depth = d - self.a_prime / 2.0;
        (depth * (cot(self.theta_ti) - self.a / depth), depth * cot(self.theta_tu))
    }

    /// Whether a reflector center at lateral offset `x` and perpendicular
    /// distance `y` (in the face frame anchored at Tx) lies in the first-bounce
    /// feasible region.
    pub fn region_contains(&self, x: f64, y: f64) -> bool {
        let (lo, hi) = self.support();
        if !(y >= lo && y <= hi) {
            return false;
        }
        let tilt = |t: f64| t.sin() * t.tan();
        let x_lo = y * cot(self.theta_ti) - self.a / 2.0 * tilt(self.theta_ti);
        let x_hi = y * cot(self.theta_tu) + self.a / 2.0 * tilt(self.theta_tu);
        x >= x_lo && x <= x_hi
    }

    /// Bounding box (x_lo, x_hi, y_lo, y_hi) of the first-bounce region.
    pub fn region_bounds(&self) -> (f64, f64, f64, f64) {
        let (lo, hi) = self.support();
        let tilt = |t: f64| t.sin() * t.tan();
        let xs = [
            lo * cot(self.theta_ti) - self.a / 2.0 * tilt(self.theta_ti),
            hi * cot(self.theta_ti) - self.a / 2.0 * tilt(self.theta_ti),
            lo * cot(self.theta_tu) + self.a / 2.0 * tilt(self.theta_tu),
            hi * cot(self.theta_tu) + self.a / 2.0 * tilt(self.theta_tu),
        ];
        let (xl, xh) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (xl, xh, lo, hi)
    }
}

/// Mixed law of the image-source angle: a density on [lo, hi] plus an atom at lo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageAnglePdf {
    pub lo: f64,
    pub hi: f64,
    pub theta_li: f64,
    denom: f64,
    pub atom_mass: f64,
}

impl ImageAnglePdf {
    pub fn density(&self, theta: f64) -> f64 {
        if theta < self.lo || theta > self.hi {
            return 0.0;
        }
        1.0 / (theta.cos().powi(2) * self.denom)
    }

    pub fn continuous_mass(&self) -> f64 {
        (self.hi.tan() - self.lo.tan()) / self.denom
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta < self.lo {
            0.0
        } else if theta >= self.hi {
            1.0
        } else {
            self.atom_mass + (theta.tan() - self.lo.tan()) / self.denom
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        if u <= self.atom_mass {
            return self.lo;
        }
        (self.lo.tan() + (u - self.atom_mass) * self.denom).atan().min(self.hi)
    }
}

/// Image-source model for buildings with length axis at `phi_b`. The length
/// faces reflect for φ_b in [0, π/2] and the width faces otherwise; the model
/// has zero occupancy when that family cannot couple.
pub fn image_source_model(s: &Scenario, phi_b: f64) -> Result<ImageSourceModel> {
    s.validate()?;
    let want = if phi_b.rem_euclid(PI) <= FRAC_PI_2 { FaceDim::Length } else { FaceDim::Width };
    Ok(face_families(s, phi_b)
        .iter()
        .find(|f| f.dim == want)
        .map(|f| ImageSourceModel::for_family(s, f))
        .unwrap_or_else(|| ImageSourceModel::empty(s)))
}
