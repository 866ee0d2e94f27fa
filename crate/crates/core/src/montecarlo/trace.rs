//! First- and second-order specular path tracing.

use super::scene::Scene;
use crate::geometry::{
    grazing_angle, image_point, in_main_lobe, segment_blocked, Building, Cone, Face, FaceDim, Person, Point2,
    Segment2,
};
use crate::scenario::{Scenario, SPEED_OF_LIGHT};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    First,
    Second,
}

/// Terminal placement and antenna cones. The receiver sits at the origin and
/// the transmitter at (−d, 0); both beams point into the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: Point2,
    pub rx: Point2,
    pub tx_cone: Cone,
    pub rx_cone: Cone,
}

impl Link {
    pub fn new(s: &Scenario) -> Self {
        let tx = Point2::new(-s.d, 0.0);
        let rx = Point2::new(0.0, 0.0);
        Self {
            tx,
            rx,
            tx_cone: Cone { apex: tx, boresight: PI - s.phi_t, half_angle: s.theta_bt / 2.0 },
            rx_cone: Cone { apex: rx, boresight: PI - s.phi_r, half_angle: s.theta_br / 2.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub order: PathOrder,
    /// Tx, reflection points, Rx.
    pub vertices: Vec<Point2>,
    /// Arrival angle against the last reflecting face.
    pub theta_n: f64,
    pub length: f64,
    pub delay: f64,
    /// Γ_l·Γ_r/length², with Γ_r the product of per-bounce coefficients.
    pub power: f64,
    pub blocked: bool,
    pub self_block_weight: f64,
    /// Dimension of the last reflecting face.
    pub face_dim: FaceDim,
    pub reflectors: Vec<usize>,
}

/// A face reflection between `a` and `b`, requiring both on the outward side.
fn bounce(a: Point2, b: Point2, face: &Face) -> Option<Point2> {
    if face.outward_distance(a) <= 0.0 || face.outward_distance(b) <= 0.0 {
        return None;
    }
    crate::geometry::specular_reflection(a, b, &face.seg).ok().flatten()
}

fn lobe(cone: &Cone, p: Point2) -> bool {
    in_main_lobe(cone, p).unwrap_or(false)
}

/// Candidate first-order paths that pass the lobe tests, with building
/// blockage resolved and the human test left to [`apply_humans`].
pub(crate) fn first_order_candidates(buildings: &[Building], link: &Link, s: &Scenario) -> Vec<RayPath> {
    let mut out = vec![];
    for (k, b) in buildings.iter().enumerate() {
        for face in b.faces() {
            let Some(r) = bounce(link.tx, link.rx, &face) else { continue };
            if !lobe(&link.tx_cone, r) || !lobe(&link.rx_cone, r) {
                continue;
            }
            let legs = [Segment2::new(link.tx, r), Segment2::new(r, link.rx)];
            let blocked = legs.iter().any(|l| segment_blocked(l, buildings, &[], &[k]));
            let theta_n = grazing_angle(r, link.rx, &face.seg);
            let length = link.tx.dist(r) + r.dist(link.rx);
            out.push(RayPath {
                order: PathOrder::First,
                vertices: vec![link.tx, r, link.rx],
                theta_n,
                length,
                delay: length / SPEED_OF_LIGHT,
                power: s.gamma_l() * s.gamma_rm * theta_n.sin() / (length * length),
                blocked,
                self_block_weight: s.self_weight(),
                face_dim: face.dim,
                reflectors: vec![k],
            });
        }
    }
    out
}

pub(crate) fn second_order_candidates(buildings: &[Building], link: &Link, s: &Scenario) -> Vec<RayPath> {
    // Only faces that the transmit (receive) lobe can see can host the first
    // (second) bounce, since the path leaves (enters) through that lobe.
    let visible = |cone: &Cone, apex: Point2| -> Vec<(usize, Face)> {
        buildings
            .iter()
            .enumerate()
            .flat_map(|(k, b)| b.faces().into_iter().map(move |f| (k, f)))
            .filter(|(_, f)| f.outward_distance(apex) > 0.0 && cone.meets_segment(&f.seg))
            .collect()
    };
    let firsts = visible(&link.tx_cone, link.tx);
    let seconds = visible(&link.rx_cone, link.rx);
    let mut out = vec![];
    for &(ka, fa) in &firsts {
        let Ok(t1) = image_point(link.tx, &fa.seg) else { continue };
        for &(kb, fb) in &seconds {
            if ka == kb || fb.outward_distance(t1) <= 0.0 {
                continue;
            }
            let Ok(Some(r2)) = crate::geometry::specular_reflection(t1, link.rx, &fb.seg) else { continue };
            let Some(r1) = bounce(link.tx, r2, &fa) else { continue };
            if fb.outward_distance(r1) <= 0.0 || !lobe(&link.tx_cone, r1) || !lobe(&link.rx_cone, r2) {
                continue;
            }
            let legs = [
                (Segment2::new(link.tx, r1), vec![ka]),
                (Segment2::new(r1, r2), vec![ka, kb]),
                (Segment2::new(r2, link.rx), vec![kb]),
            ];
            let blocked = legs.iter().any(|(l, ex)| segment_blocked(l, buildings, &[], ex));
            let g1 = grazing_angle(link.tx, r1, &fa.seg);
            let g2 = grazing_angle(r2, link.rx, &fb.seg);
            let length = link.tx.dist(r1) + r1.dist(r2) + r2.dist(link.rx);
            out.push(RayPath {
                order: PathOrder::Second,
                vertices: vec![link.tx, r1, r2, link.rx],
                theta_n: g2,
                length,
                delay: length / SPEED_OF_LIGHT,
                power: s.gamma_l() * s.gamma_rm.powi(2) * g1.sin() * g2.sin() / (length * length),
                blocked,
                self_block_weight: s.self_weight(),
                face_dim: fb.dim,
                reflectors: vec![ka, kb],
            });
        }
    }
    out
}

/// Segments of a path, for human lookups.
pub(crate) fn legs(p: &RayPath) -> Vec<Segment2> {
    p.vertices.windows(2).map(|w| Segment2::new(w[0], w[1])).collect()
}

/// Apply human blockage to building-cleared candidates.
pub(crate) fn apply_humans(paths: &mut [RayPath], humans: &[Person]) {
    for p in paths.iter_mut().filter(|p| !p.blocked) {
        p.blocked = legs(p).iter().any(|l| segment_blocked(l, &[], humans, &[]));
    }
}

/// All lobe-valid first-order paths of a scene, flagged when blocked.
pub fn trace_first_order(scene: &Scene, s: &Scenario) -> Vec<RayPath> {
    let mut p = first_order_candidates(&scene.buildings, &Link::new(s), s);
    apply_humans(&mut p, &scene.humans);
    p
}

pub fn trace_second_order(scene: &Scene, s: &Scenario) -> Vec<RayPath> {
    if scene.buildings.len() < 2 {
        return vec![];
    }
    let mut p = second_order_candidates(&scene.buildings, &Link::new(s), s);
    apply_humans(&mut p, &scene.humans);
    p
}
