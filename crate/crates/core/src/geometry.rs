//! 2D computational-geometry kernel: mirror images, specular construction,
//! blockage predicates and cone containment.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

/// Absolute tolerance for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }
    pub fn bearing(self) -> f64 {
        self.y.atan2(self.x)
    }
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
    pub fn from_polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(r * c, r * s)
    }
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}
impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}
impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }
    pub fn dir(&self) -> Point2 {
        self.b - self.a
    }
    pub fn length(&self) -> f64 {
        self.dir().norm()
    }
    /// Signed area test: positive when `p` is left of a→b.
    pub fn side(&self, p: Point2) -> f64 {
        self.dir().cross(p - self.a)
    }
    pub fn point_at(&self, t: f64) -> Point2 {
        self.a + self.dir() * t
    }
}

/// Wrap an angle to (−π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Which building dimension a face spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceDim {
    Length,
    Width,
}

/// A building face with its outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub seg: Segment2,
    pub normal: Point2,
    pub dim: FaceDim,
}

impl Face {
    /// Signed distance of `p` from the face line, positive on the outward side.
    pub fn outward_distance(&self, p: Point2) -> f64 {
        (p - self.seg.a).dot(self.normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Building {
    pub center: Point2,
    pub l: f64,
    pub w: f64,
    /// Angle of the length axis, in [0, π).
    pub phi_b: f64,
}

impl Building {
    pub fn new(center: Point2, l: f64, w: f64, phi_b: f64) -> Result<Self> {
        if !(l > 0.0 && w > 0.0) || !center.is_finite() || !phi_b.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "building needs positive finite dimensions, got l={l}, w={w}"
            )));
        }
        Ok(Self { center, l, w, phi_b: phi_b.rem_euclid(PI) })
    }

    fn axes(&self) -> (Point2, Point2) {
        let u = Point2::from_polar(1.0, self.phi_b);
        (u, Point2::new(-u.y, u.x))
    }

    /// Coordinates of `p` in the building frame (x along the length axis).
    pub fn to_local(&self, p: Point2) -> Point2 {
        let (u, v) = self.axes();
        let q = p - self.center;
        Point2::new(q.dot(u), q.dot(v))
    }

    pub fn corners(&self) -> [Point2; 4] {
        let (u, v) = self.axes();
        let hu = u * (self.l / 2.0);
        let hv = v * (self.w / 2.0);
        let c = self.center;
        [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv]
    }

    /// The four faces, counter-clockwise, with outward normals.
    pub fn faces(&self) -> [Face; 4] {
        let (u, v) = self.axes();
        let k = self.corners();
        [
            Face { seg: Segment2::new(k[0], k[1]), normal: -v, dim: FaceDim::Length },
            Face { seg: Segment2::new(k[1], k[2]), normal: u, dim: FaceDim::Width },
            Face { seg: Segment2::new(k[2], k[3]), normal: v, dim: FaceDim::Length },
            Face { seg: Segment2::new(k[3], k[0]), normal: -u, dim: FaceDim::Width },
        ]
    }

    /// Strict interior containment.
    pub fn contains(&self, p: Point2) -> bool {
        let q = self.to_local(p);
        q.x.abs() < self.l / 2.0 && q.y.abs() < self.w / 2.0
    }

    pub fn bounding_radius(&self) -> f64 {
        0.5 * self.l.hypot(self.w)
    }

    /// True iff the open rectangle meets the segment.
    pub fn blocks(&self, s: &Segment2) -> bool {
        let r = self.bounding_radius();
        if s.a.x.min(s.b.x) > self.center.x + r
            || s.a.x.max(s.b.x) < self.center.x - r
            || s.a.y.min(s.b.y) > self.center.y + r
            || s.a.y.max(s.b.y) < self.center.y - r
        {
            return false;
        }
        let p0 = self.to_local(s.a);
        let p1 = self.to_local(s.b);
        let d = p1 - p0;
        let (hx, hy) = (self.l / 2.0, self.w / 2.0);
        // Liang-Barsky clip against the closed box.
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-d.x, p0.x + hx),
            (d.x, hx - p0.x),
            (-d.y, p0.y + hy),
            (d.y, hy - p0.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        if t0 >= t1 {
            return false;
        }
        // A chord of a convex set is interior unless it runs along the boundary;
        // its midpoint tells the two apart.
        let m = p0 + d * (0.5 * (t0 + t1));
        let eps = 1e-9 * (1.0 + hx.max(hy));
        m.x.abs() < hx - eps && m.y.abs() < hy - eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Person {
    pub center: Point2,
    pub diameter: f64,
}

impl Person {
    /// True iff the open disc meets the segment.
    pub fn blocks(&self, s: &Segment2) -> bool {
        let r = self.diameter / 2.0;
        let d = s.dir();
        let len2 = d.dot(d);
        let t = if len2 > 0.0 { ((self.center - s.a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
        s.point_at(t).dist(self.center) < r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub apex: Point2,
    pub boresight: f64,
    pub half_angle: f64,
}

impl Cone {
    fn bearing_inside(&self, bearing: f64) -> bool {
        wrap_pi(bearing - self.boresight).abs() <= self.half_angle + ANGLE_TOL
    }

    /// Whether any point of `s` lies inside the cone.
    pub fn meets_segment(&self, s: &Segment2) -> bool {
        let inside = |p: Point2| p == self.apex || self.bearing_inside((p - self.apex).bearing());
        if inside(s.a) || inside(s.b) {
            return true;
        }
        // Both endpoints outside: the segment enters the wedge only across a boundary ray.
        [self.boresight - self.half_angle, self.boresight + self.half_angle]
            .iter()
            .any(|&ang| ray_hits_segment(self.apex, Point2::from_polar(1.0, ang), s))
    }
}

fn ray_hits_segment(o: Point2, dir: Point2, s: &Segment2) -> bool {
    let e = s.dir();
    let denom = dir.cross(e);
    if denom == 0.0 {
        return false;
    }
    let w = s.a - o;
    let t = w.cross(e) / denom;
    let u = w.cross(dir) / denom;
    t >= 0.0 && (0.0..=1.0).contains(&u)
}

/// Mirror `p` across the infinite line through `face`.
pub fn image_point(p: Point2, face: &Segment2) -> Result<Point2> {
    let d = face.dir();
    let len2 = d.dot(d);
    if !(len2 > 0.0) {
        return Err(Error::InvalidGeometry("zero-length mirror face".into()));
    }
    let foot = face.a + d * ((p - face.a).dot(d) / len2);
    Ok(foot * 2.0 - p)
}

/// Specular point on `face` for a path tx → face → rx, if the construction
/// lands on the face segment.
pub fn specular_reflection(tx: Point2, rx: Point2, face: &Segment2) -> Result<Option<Point2>> {
    let len = face.length();
    if !(len > 0.0) {
        return Err(Error::InvalidGeometry("zero-length mirror face".into()));
    }
    let st = face.side(tx);
    let sr = face.side(rx);
    if st == 0.0 || sr == 0.0 {
        return Err(Error::InvalidGeometry("terminal lies on the mirror line".into()));
    }
    if (st > 0.0) != (sr > 0.0) {
        return Ok(None);
    }
    let img = image_point(tx, face)?;
    // rx and img straddle the line; split the segment by their distances.
    let (hr, hi) = (sr.abs(), face.side(img).abs());
    let r = rx + (img - rx) * (hr / (hr + hi));
    let t = (r - face.a).dot(face.dir()) / (len * len);
    Ok((0.0..=1.0).contains(&t).then_some(r))
}

/// True iff `s` crosses the interior of a building not listed in `exclude`
/// or of any human disc.
pub fn segment_blocked(s: &Segment2, buildings: &[Building], humans: &[Person], exclude: &[usize]) -> bool {
    buildings
        .iter()
        .enumerate()
        .any(|(k, b)| !exclude.contains(&k) && b.blocks(s))
        || humans.iter().any(|h| h.blocks(s))
}

pub fn in_main_lobe(cone: &Cone, target: Point2) -> Result<bool> {
    if target == cone.apex {
        return Err(Error::InvalidGeometry("lobe target coincides with apex".into()));
    }
    Ok(cone.bearing_inside((target - cone.apex).bearing()))
}

/// Angle between the directions a→b and the face line, in [0, π/2].
pub fn grazing_angle(a: Point2, b: Point2, face: &Segment2) -> f64 {
    let d = b - a;
    let f = face.dir();
    (d.cross(f).abs()).atan2(d.dot(f).abs())
}
