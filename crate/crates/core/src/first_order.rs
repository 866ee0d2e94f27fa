//! First-order reflection statistics: main-lobe coupling, feasible area,
//! blockage probabilities, mean reflection count and path loss.

use crate::error::{Error, Result};
use crate::geometry::FaceDim;
use crate::quadrature::{integrate, Tolerance};
use crate::scenario::{BlockageMoments, Orientation, Scenario};
use std::f64::consts::{FRAC_PI_2, PI};

/// Largest admissible arrival angle; beyond it the reflector recedes to infinity.
pub const THETA_MAX: f64 = FRAC_PI_2 - 1e-3;
/// Windows narrower than this are treated as empty.
pub const MIN_WINDOW: f64 = 1e-12;

/// Lobe-edge and boresight angles measured against the reflecting face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    pub theta_ri: f64,
    pub theta_ru: f64,
    pub theta_ti: f64,
    pub theta_tu: f64,
    pub theta_ra: f64,
    pub theta_ta: f64,
}

pub fn angle_set(phi_t: f64, phi_r: f64, phi_b: f64, theta_bt: f64, theta_br: f64) -> AngleSet {
    AngleSet {
        theta_ri: phi_r + phi_b - theta_br / 2.0,
        theta_ru: phi_r + phi_b + theta_br / 2.0,
        theta_ti: PI - (phi_t + phi_b - theta_bt / 2.0),
        theta_tu: PI - (phi_t + phi_b + theta_bt / 2.0),
        theta_ra: phi_r + phi_b,
        theta_ta: PI - (phi_t + phi_b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingScenario {
    /// Transmit boresight steeper than receive boresight.
    Scenario1,
    Scenario2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingWindow {
    pub theta_i: f64,
    pub theta_u: f64,
    pub scenario: CouplingScenario,
    pub dim: FaceDim,
    /// Set when the upper limit was pulled back from π/2.
    pub clamped: bool,
}

impl CouplingWindow {
    pub fn width(&self) -> f64 {
        self.theta_u - self.theta_i
    }
}

/// Intersection of the arrival angles admitted by the receive lobe with those
/// that the transmit lobe can illuminate.
///
/// The transmit lobe's lower edge `theta_tu` bounds the window from below and
/// its upper edge `theta_ti` from above.
pub fn coupling_window(a: &AngleSet) -> Option<CouplingWindow> {
    let theta_i = a.theta_ri.max(a.theta_tu);
    let theta_u = a.theta_ru.min(a.theta_ti);
    if theta_u - theta_i < MIN_WINDOW {
        return None;
    }
    let scenario = if a.theta_ta > a.theta_ra { CouplingScenario::Scenario1 } else { CouplingScenario::Scenario2 };
    Some(CouplingWindow { theta_i, theta_u, scenario, dim: FaceDim::Length, clamped: false })
}

/// Face orientation folded into (−π/2, π/2].
pub fn normalize_face_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Coupling window for a face at orientation `phi_face` (normalized), after
/// requiring both terminals in front of the face and bounding the upper limit.
pub fn effective_window(s: &Scenario, phi_face: f64, dim: FaceDim) -> Option<CouplingWindow> {
    let mut w = coupling_window(&angle_set(s.phi_t, s.phi_r, phi_face, s.theta_bt, s.theta_br))?;
    w.dim = dim;
    w.theta_i = w.theta_i.max(phi_face.abs());
    if w.theta_u > THETA_MAX {
        w.theta_u = THETA_MAX;
        w.clamped = true;
    }
    (w.width() >= MIN_WINDOW).then_some(w)
}

/// Feasible-region area for reflector centers.
pub fn feasible_area(a: f64, d: f64, phi_b: f64, w: &CouplingWindow) -> Result<f64> {
    if w.theta_u >= FRAC_PI_2 {
        return Err(Error::UnboundedWindow(format!("upper arrival angle {} reaches π/2", w.theta_u)));
    }
    Ok((a * (d * phi_b.cos().abs() / 2.0) * (w.theta_u.tan() - w.theta_i.tan())).max(0.0))
}

pub fn elemental_area(d: f64, phi_b: f64, theta: f64, dtheta: f64, da: f64) -> f64 {
    d * phi_b.cos().abs() / 2.0 / theta.cos().powi(2) * dtheta * da
}

/// Building blockage area for arbitrary building orientation.
pub fn block_area_buildings(d: f64, phi_b: f64, theta: f64, m: &BlockageMoments) -> f64 {
    let len = d * phi_b.cos().abs() / theta.cos();
    let a = len * (2.0 / PI) * (m.e_l + m.e_w) + m.e_l * m.e_w
        - (2.0 - (theta.cos() + theta.sin())) / (2.0 * PI) * (m.e_w2 + m.e_l2);
    a.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockVariant {
    General,
    FixedOrientationApprox,
}

fn building_exponent(d: f64, phi_b: f64, theta: f64, lambda_b: f64, m: &BlockageMoments, v: BlockVariant) -> f64 {
    match v {
        BlockVariant::General => lambda_b * block_area_buildings(d, phi_b, theta, m),
        BlockVariant::FixedOrientationApprox => {
            lambda_b * (d * phi_b.cos().abs() * (m.e_l * theta.tan() + m.e_w) + m.e_l * m.e_w)
        }
    }
}

/// Probability that the path arriving at `theta` is blocked.
pub fn p_block(d: f64, phi_b: f64, theta: f64, s: &Scenario, v: BlockVariant) -> Result<f64> {
    let expo = building_exponent(d, phi_b, theta, s.lambda_b, &s.moments, v)
        + s.lambda_h()? * s.w_h * d * phi_b.cos().abs() / theta.cos();
    Ok((1.0 - s.self_weight() * (-expo).exp()).clamp(0.0, 1.0))
}

/// One family of parallel reflecting faces together with what it needs for
/// the first-order integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFamily {
    pub dim: FaceDim,
    /// Face orientation in (−π/2, π/2].
    pub phi: f64,
    /// Moments with the reflecting dimension in the length slot.
    pub moments: BlockageMoments,
    /// Mean reflecting-face extent.
    pub e_a: f64,
    pub variant: BlockVariant,
    pub window: CouplingWindow,
}

impl FaceFamily {
    pub fn cb(&self, s: &Scenario) -> f64 {
        s.d * self.phi.cos().abs()
    }

    /// Non-blocking probability without the self-blockage factor.
    pub fn survival(&self, s: &Scenario, lambda_h: f64, theta: f64) -> f64 {
        let expo = building_exponent(s.d, self.phi, theta, s.lambda_b, &self.moments, self.variant)
            + lambda_h * s.w_h * self.cb(s) / theta.cos();
        (-expo).exp()
    }
}

/// Reflecting face families for buildings whose length axis is at `phi_b`.
pub fn face_families(s: &Scenario, phi_b: f64) -> Vec<FaceFamily> {
    [(FaceDim::Length, phi_b, s.moments), (FaceDim::Width, phi_b + FRAC_PI_2, s.moments.swapped())]
        .into_iter()
        .filter_map(|(dim, phi, moments)| {
            let phi = normalize_face_angle(phi);
            let window = effective_window(s, phi, dim)?;
            if window.clamped {
                log::warn!("coupling window for the {dim:?} faces clamped at θ_u = π/2 − 1e−3");
            }
            Some(FaceFamily {
                dim,
                phi,
                moments,
                e_a: moments.e_l,
                variant: BlockVariant::FixedOrientationApprox,
                window,
            })
        })
        .collect()
}

/// Exponent composites of the linearized closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composites {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u0: f64,
    /// x + 2·u0·z / √(1 + u0²).
    pub x_bar: f64,
}

impl Composites {
    pub fn new(s: &Scenario, fam: &FaceFamily, lambda_h: f64, theta_i: f64, theta_u: f64) -> Self {
        let cb = fam.cb(s);
        let m = &fam.moments;
        let x = s.lambda_b * cb * m.e_l;
        let y = s.lambda_b * (cb * m.e_w + m.e_l * m.e_w);
        let z = lambda_h * s.w_h * cb;
        let u0 = 0.5 * (theta_i.tan() + theta_u.tan());
        let x_bar = x + 2.0 * u0 * z / (1.0 + u0 * u0).sqrt();
        Self { x, y, z, u0, x_bar }
    }

    /// Exponential factor frozen at the linearization point.
    pub fn envelope(&self) -> f64 {
        (-self.x * self.u0 - self.y - self.z * (1.0 + self.u0 * self.u0).sqrt()).exp()
    }

    /// Linearized survival at arrival angle `theta`.
    pub fn linearized(&self, theta: f64) -> f64 {
        self.envelope() * (1.0 + self.x_bar * self.u0 - self.x_bar * theta.tan())
    }
}

fn family_nr_exact(s: &Scenario, fam: &FaceFamily, lh: f64, tol: Tolerance) -> Result<f64> {
    let w = fam.window;
    let i = integrate(|t| fam.survival(s, lh, t) / t.cos().powi(2), w.theta_i, w.theta_u, tol)?;
    Ok(s.lambda_b * fam.e_a * fam.cb(s) / 2.0 * s.self_weight() * i)
}

fn family_ipl_exact(s: &Scenario, fam: &FaceFamily, lh: f64, tol: Tolerance) -> Result<f64> {
    let w = fam.window;
    let i = integrate(|t| t.sin() * fam.survival(s, lh, t), w.theta_i, w.theta_u, tol)?;
    Ok(s.gamma_l() * s.gamma_rm * s.lambda_b * fam.e_a * s.self_weight() / (2.0 * fam.cb(s)) * i)
}

pub fn family_nr_closed(s: &Scenario, fam: &FaceFamily, lh: f64) -> f64 {
    let w = fam.window;
    let c = Composites::new(s, fam, lh, w.theta_i, w.theta_u);
    let (ti, tu) = (w.theta_i.tan(), w.theta_u.tan());
    let bracket = (1.0 + c.x_bar * c.u0) * (tu - ti) - c.x_bar / 2.0 * (tu * tu - ti * ti);
    s.lambda_b * fam.e_a * fam.cb(s) / 2.0 * s.self_weight() * bracket * c.envelope()
}

pub fn family_ipl_closed(s: &Scenario, fam: &FaceFamily, lh: f64) -> f64 {
    let w = fam.window;
    let c = Composites::new(s, fam, lh, w.theta_i, w.theta_u);
    let (i, u) = (w.theta_i, w.theta_u);
    let ln_ratio = ((i.tan() + 1.0 / i.cos()) / (u.tan() + 1.0 / u.cos())).ln();
    let bracket = (1.0 + c.x_bar * c.u0) * (i.cos() - u.cos()) + c.x_bar * (ln_ratio + u.sin() - i.sin());
    s.gamma_l() * s.gamma_rm * s.lambda_b * fam.e_a * s.self_weight() / (2.0 * fam.cb(s)) * bracket * c.envelope()
}

/// Sub-intervals of face orientation over which main lobes can couple.
fn orientation_ranges(s: &Scenario) -> Vec<(f64, f64)> {
    let c = (PI - s.phi_t - s.phi_r) / 2.0;
    let hw = (s.theta_bt + s.theta_br) / 4.0;
    [-PI, 0.0, PI]
        .iter()
        .filter_map(|&shift| {
            let (a, b) = ((c - hw + shift).max(-FRAC_PI_2), (c + hw + shift).min(FRAC_PI_2));
            (b > a).then_some((a, b))
        })
        .flat_map(|(a, b)| {
            // Split where the binding lobe edge changes and at broadside.
            let mut cuts = vec![a, b, c, 0.0];
            cuts.retain(|&x| x >= a && x <= b);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.windows(2).map(|p| (p[0], p[1])).collect::<Vec<_>>()
        })
        .collect()
}

/// Face family for uniformly oriented buildings at face angle `phi`, with the
/// length and width contributions merged (the general blockage area is
/// symmetric in the two dimensions).
fn uniform_family(s: &Scenario, phi: f64) -> Option<FaceFamily> {
    let window = effective_window(s, phi, FaceDim::Length)?;
    Some(FaceFamily {
        dim: FaceDim::Length,
        phi,
        moments: s.moments,
        e_a: s.moments.e_l + s.moments.e_w,
        variant: BlockVariant::General,
        window,
    })
}

fn orientation_average<F>(s: &Scenario, tol: Tolerance, per_phi: F) -> Result<f64>
where
    F: Fn(&FaceFamily) -> Result<f64>,
{
    let mut total = 0.0;
    for (a, b) in orientation_ranges(s) {
        let mut failure = None;
        let v = integrate(
            |phi| match uniform_family(s, phi).map(|fam| per_phi(&fam)) {
                Some(Ok(v)) => v,
                Some(Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
                None => 0.0,
            },
            a,
            b,
            tol,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total += v / PI;
    }
    Ok(total)
}

/// Mean number of unblocked first-order reflections, by quadrature.
pub fn avg_first_order_exact(s: &Scenario) -> Result<f64> {
    s.validate()?;
    let lh = s.lambda_h()?;
    if s.lambda_b == 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance::default();
    match s.orientation {
        Orientation::Fixed(phi_b) => {
            face_families(s, phi_b).iter().try_fold(0.0, |acc, f| Ok(acc + family_nr_exact(s, f, lh, tol)?))
        }
        Orientation::UniformOverPi => orientation_average(s, tol, |f| family_nr_exact(s, f, lh, tol)),
    }
}

fn require_fixed(s: &Scenario) -> Result<f64> {
    match s.orientation {
        Orientation::Fixed(p) => Ok(p),
        Orientation::UniformOverPi => {
            Err(Error::InvalidScenario("closed forms require a fixed building orientation".into()))
        }
    }
}

/// Linearized closed form of the mean reflection count.
pub fn avg_first_order_closed(s: &Scenario) -> Result<f64> {
    s.validate()?;
    let phi_b = require_fixed(s)?;
    let lh = s.lambda_h()?;
    Ok(face_families(s, phi_b).iter().fold(0.0, |acc, f| acc + family_nr_closed(s, f, lh)))
}

/// Received-to-transmitted power ratio (1/PL), by quadrature.
pub fn inverse_path_loss_exact(s: &Scenario) -> Result<f64> {
    s.validate()?;
    let lh = s.lambda_h()?;
    if s.lambda_b == 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance::default();
    match s.orientation {
        Orientation::Fixed(phi_b) => {
            face_families(s, phi_b).iter().try_fold(0.0, |acc, f| Ok(acc + family_ipl_exact(s, f, lh, tol)?))
        }
        Orientation::UniformOverPi => orientation_average(s, tol, |f| family_ipl_exact(s, f, lh, tol)),
    }
}

pub fn inverse_path_loss_closed(s: &Scenario) -> Result<f64> {
    s.validate()?;
    let phi_b = require_fixed(s)?;
    let lh = s.lambda_h()?;
    Ok(face_families(s, phi_b).iter().fold(0.0, |acc, f| acc + family_ipl_closed(s, f, lh)))
}

/// Linear path loss; infinite when no reflection couples.
pub fn path_loss_exact(s: &Scenario) -> Result<f64> {
    inverse_path_loss_exact(s).map(|g| 1.0 / g)
}

pub fn path_loss_closed(s: &Scenario) -> Result<f64> {
    inverse_path_loss_closed(s).map(|g| 1.0 / g)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn window(i: f64, u: f64) -> CouplingWindow {
        CouplingWindow { theta_i: deg(i), theta_u: deg(u), scenario: CouplingScenario::Scenario1, dim: FaceDim::Length, clamped: false }
    }

    #[test]
    fn angle_set_substitution() {
        let a = angle_set(deg(110.0), deg(50.0), 0.0, deg(20.0), deg(20.0));
        assert!((a.theta_ri - deg(40.0)).abs() < 1e-12);
        assert!((a.theta_ru - deg(60.0)).abs() < 1e-12);
        assert!((a.theta_ti - deg(80.0)).abs() < 1e-12);
        assert!((a.theta_tu - deg(60.0)).abs() < 1e-12);
        assert!((a.theta_ra - deg(50.0)).abs() < 1e-12);
        assert!((a.theta_ta - deg(70.0)).abs() < 1e-12);
        assert!((a.theta_ru - a.theta_ri - deg(20.0)).abs() < 1e-12);
        assert!((a.theta_ti - a.theta_tu - deg(20.0)).abs() < 1e-12);
    }

    fn set(ri: f64, ru: f64, ti: f64, tu: f64) -> AngleSet {
        AngleSet {
            theta_ri: deg(ri),
            theta_ru: deg(ru),
            theta_ti: deg(ti),
            theta_tu: deg(tu),
            theta_ra: deg((ri + ru) / 2.0),
            theta_ta: deg((ti + tu) / 2.0),
        }
    }

    #[test]
    fn window_touching_edges_is_empty() {
        // Receive lobe [40, 60] meets transmit lobe [60, 80] in a single angle.
        assert!(coupling_window(&set(40.0, 60.0, 80.0, 60.0)).is_none());
        assert!(coupling_window(&set(40.0, 50.0, 80.0, 60.0)).is_none());
    }

    #[test]
    fn window_is_lobe_intersection() {
        let w = coupling_window(&set(40.0, 60.0, 55.0, 45.0)).unwrap();
        assert!((w.theta_i - deg(45.0)).abs() < 1e-12 && (w.theta_u - deg(55.0)).abs() < 1e-12);
        assert_eq!(w.scenario, CouplingScenario::Scenario2);
        let w = coupling_window(&set(40.0, 60.0, 70.0, 50.0)).unwrap();
        assert!((w.theta_i - deg(50.0)).abs() < 1e-12 && (w.theta_u - deg(60.0)).abs() < 1e-12);
        assert_eq!(w.scenario, CouplingScenario::Scenario1);
    }

    #[test]
    fn feasible_area_examples() {
        assert_eq!(feasible_area(25.0, 50.0, 0.3, &window(55.0, 55.0)).unwrap(), 0.0);
        assert!((feasible_area(1.0, 2.0, 0.0, &window(0.0, 45.0)).unwrap() - 1.0).abs() < 1e-12);
        let a = feasible_area(25.0, 50.0, deg(15.0), &window(55.0, 60.0)).unwrap();
        let hand = 25.0 * (50.0 * deg(15.0).cos() / 2.0) * (deg(60.0).tan() - deg(55.0).tan());
        assert!((a - hand).abs() < 1e-9);
        assert!((a - 183.47).abs() < 0.01);
        assert!(feasible_area(1.0, 1.0, 0.0, &window(10.0, 90.0)).is_err());
    }

    #[test]
    fn elemental_area_examples() {
        assert!((elemental_area(50.0, 0.0, 0.0, 1e-3, 1e-3) - 25.0 * 1e-6).abs() < 1e-18);
        let v = elemental_area(50.0, 0.0, deg(45.0), 1e-3, 1e-3);
        assert!((v - 5e-5).abs() < 1e-15);
    }

    #[test]
    fn elemental_area_integrates_to_feasible_area() {
        let w = window(52.0, 71.0);
        let (d, phi, a) = (63.0, deg(12.0), 18.0);
        let per_len = integrate(|t| elemental_area(d, phi, t, 1.0, 1.0), w.theta_i, w.theta_u, Tolerance::tight()).unwrap();
        let area = a * per_len;
        let eq = feasible_area(a, d, phi, &w).unwrap();
        assert!((area - eq).abs() <= 1e-10 * eq);
    }

    #[test]
    fn block_area_examples() {
        let z = BlockageMoments { e_l: 0.0, e_w: 0.0, e_l2: 0.0, e_w2: 0.0 };
        assert_eq!(block_area_buildings(50.0, 0.0, 0.5, &z), 0.0);
        let m = BlockageMoments::constant(25.0, 25.0);
        let v = block_area_buildings(0.0, 0.0, deg(45.0), &m);
        assert!((v - (625.0 - (2.0 - 2f64.sqrt()) / (2.0 * PI) * 1250.0)).abs() < 1e-9);
        assert!((v - 508.5).abs() < 0.05);
        let v = block_area_buildings(50.0, 0.0, deg(30.0), &m);
        let hand = 50.0 / deg(30.0).cos() * (2.0 / PI) * 50.0 + 625.0
            - (2.0 - deg(30.0).cos() - deg(30.0).sin()) / (2.0 * PI) * 1250.0;
        assert!((v - hand).abs() < 1e-9);
        assert!((v - 2336.6).abs() < 0.1);
    }

    #[test]
    fn p_block_examples() {
        let bare = Scenario { lambda_b: 0.0, lambda_h_raw: 0.0, carried: 0, ..Scenario::default() };
        assert_eq!(p_block(50.0, 0.2, 0.9, &bare, BlockVariant::General).unwrap(), 0.0);
        let selfb = Scenario { carried: 2, p_self: 0.25, ..bare };
        let p = p_block(50.0, 0.2, 0.9, &selfb, BlockVariant::FixedOrientationApprox).unwrap();
        assert!((p - (1.0 - 0.0625)).abs() < 1e-15);
        let s = Scenario::default();
        let g = p_block(50.0, deg(15.0), deg(57.5), &s, BlockVariant::General).unwrap();
        let fx = p_block(50.0, deg(15.0), deg(57.5), &s, BlockVariant::FixedOrientationApprox).unwrap();
        assert!((g - fx).abs() < 0.05, "general {g} vs fixed {fx}");
        let dense = Scenario { lambda_b: 2e-3, ..s };
        assert!(p_block(50.0, 0.0, 0.5, &dense, BlockVariant::General).is_err());
    }

    proptest! {
        #[test]
        fn p_block_is_monotone(
            d in 10.0f64..500.0, phi in -1.2f64..1.2, th in 0.0f64..1.5,
            lb in 0.0f64..5e-4, lh in 0.0f64..5e-3, el in 1.0f64..40.0, ew in 1.0f64..40.0,
            dd in 0.0f64..50.0, dth in 0.0f64..0.05, dlb in 0.0f64..1e-4, dlh in 0.0f64..1e-3,
            general in proptest::bool::ANY,
        ) {
            let v = if general { BlockVariant::General } else { BlockVariant::FixedOrientationApprox };
            let th2 = (th + dth).min(1.55);
            let s = Scenario { lambda_b: lb, lambda_h_raw: lh, moments: BlockageMoments::constant(el, ew), ..Scenario::default() };
            let base = p_block(d, phi, th, &s, v).unwrap();
            prop_assert!((0.0..=1.0).contains(&base));
            let slack = 1e-12;
            prop_assert!(p_block(d + dd, phi, th, &s, v).unwrap() >= base - slack);
            prop_assert!(p_block(d, phi, th2, &s, v).unwrap() >= base - slack);
            let more_b = Scenario { lambda_b: lb + dlb, ..s.clone() };
            prop_assert!(p_block(d, phi, th, &more_b, v).unwrap() >= base - slack);
            let more_h = Scenario { lambda_h_raw: lh + dlh, ..s.clone() };
            prop_assert!(p_block(d, phi, th, &more_h, v).unwrap() >= base - slack);
        }
    }

    #[test]
    fn empty_window_and_no_buildings_give_zero() {
        let s = Scenario::default(); // θ_b = 10°, pointing 110°/50°: lobes miss each other
        assert!(face_families(&s, deg(15.0)).is_empty());
        assert_eq!(avg_first_order_exact(&s).unwrap(), 0.0);
        assert_eq!(avg_first_order_closed(&s).unwrap(), 0.0);
        assert!(path_loss_exact(&s).unwrap().is_infinite());
        let s = Scenario { lambda_b: 0.0, theta_bt: deg(30.0), theta_br: deg(30.0), ..Scenario::default() };
        assert_eq!(avg_first_order_exact(&s).unwrap(), 0.0);
        assert!(path_loss_exact(&s).unwrap().is_infinite());
    }

    fn coupled() -> Scenario {
        Scenario { theta_bt: deg(30.0), theta_br: deg(30.0), ..Scenario::default() }
    }

    #[test]
    fn frequency_doubling_costs_six_db() {
        let s = coupled();
        let s2 = Scenario { f: 2.0 * s.f, ..s.clone() };
        let diff = to_db(path_loss_exact(&s2).unwrap()) - to_db(path_loss_exact(&s).unwrap());
        assert!((diff - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn transmit_power_cancels() {
        let s = coupled();
        let s2 = Scenario { p_t: 40.0, ..s.clone() };
        assert_eq!(path_loss_exact(&s).unwrap(), path_loss_exact(&s2).unwrap());
        assert_eq!(avg_first_order_closed(&s).unwrap(), avg_first_order_closed(&s2).unwrap());
    }

    #[test]
    fn closed_form_converges_as_window_narrows() {
        // Centered window of shrinking width, built from the receive lobe alone.
        let mut errs = vec![];
        for width in [10.0, 5.0, 1.0] {
            let s = Scenario {
                d: 75.0,
                phi_r: deg(45.0),
                phi_t: deg(110.0),
                theta_br: deg(width),
                theta_bt: deg(60.0),
                ..Scenario::default()
            };
            let fams = face_families(&s, deg(15.0));
            assert!((fams[0].window.width() - deg(width)).abs() < 1e-12);
            let e = avg_first_order_exact(&s).unwrap();
            let c = avg_first_order_closed(&s).unwrap();
            errs.push(((c - e) / e).abs());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3);
    }

    #[test]
    fn exact_count_matches_direct_double_integral() {
        // Independent oracle: integrate λ_b·(1 − P_b) over the feasible region
        // cell by cell in (θ, a), with P_b from the public p_block.
        let s = coupled();
        let phi = deg(15.0);
        let fam = face_families(&s, phi)[0];
        let w = fam.window;
        let a = s.moments.e_l;
        let per_theta = integrate(
            |t| {
                let nb = 1.0 - p_block(s.d, phi, t, &s, BlockVariant::FixedOrientationApprox).unwrap();
                s.lambda_b * nb * elemental_area(s.d, phi, t, 1.0, 1.0)
            },
            w.theta_i,
            w.theta_u,
            Tolerance::tight(),
        )
        .unwrap();
        let oracle = per_theta * a;
        let nr = avg_first_order_exact(&s).unwrap();
        assert!((nr - oracle).abs() <= 1e-8 * oracle, "{nr} vs {oracle}");
    }

    #[test]
    fn uniform_orientation_is_finite_and_positive() {
        let s = Scenario { orientation: Orientation::UniformOverPi, lambda_b: 8e-5, theta_bt: deg(20.0), theta_br: deg(20.0), d: 75.0, ..Scenario::default() };
        let n = avg_first_order_exact(&s).unwrap();
        let pl = path_loss_exact(&s).unwrap();
        assert!(n > 0.0 && n.is_finite());
        assert!(pl > 1.0 && pl.is_finite());
        assert!(avg_first_order_closed(&s).is_err());
    }

    #[test]
    fn width_faces_couple_when_rotated() {
        // A building turned by π/2 presents its width faces where its length
        // faces used to be: the count scales by E[w]/E[l].
        let base = Scenario { moments: BlockageMoments::constant(30.0, 10.0), lambda_h_raw: 0.0, ..coupled() };
        let turned = Scenario { orientation: Orientation::Fixed(deg(105.0)), moments: base.moments.swapped(), ..base.clone() };
        let a = avg_first_order_exact(&base).unwrap();
        let b = avg_first_order_exact(&turned).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let fams = face_families(&turned, deg(105.0));
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].dim, FaceDim::Width);
    }
}
