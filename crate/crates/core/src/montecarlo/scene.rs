//! Poisson scene generation.
//!
//! The plane is cut into square tiles anchored at the receiver, and every tile
//! draws its points from its own random stream keyed by (seed, realization,
//! tile). A tile's content therefore never depends on the region size or on
//! which other tiles were generated, which lets the tracer create people
//! lazily near candidate paths and keeps nested regions nested.

use super::{OrientationSampler, SceneConfig, TerminalPolicy};
use crate::geometry::{Building, Person, Point2, Segment2};
use crate::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Tile side (m).
pub const TILE: f64 = 50.0;

const KIND_BUILDINGS: u64 = 1;
const KIND_HUMANS: u64 = 2;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub buildings: Vec<Building>,
    pub humans: Vec<Person>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn realization_key(seed: u64, index: u64, attempt: u64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(index)) ^ attempt.wrapping_mul(0xA24B_AED4_963E_E407))
}

fn tile_rng(key: u64, kind: u64, i: i64, j: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let bias = 1i64 << 23;
    rng.set_stream((kind << 56) | (((i + bias) as u64) << 28) | ((j + bias) as u64));
    rng
}

fn tile_of(v: f64) -> i64 {
    (v / TILE).floor() as i64
}

fn tile_span(half: f64) -> (i64, i64) {
    (tile_of(-half), ((half / TILE).ceil() as i64) - 1)
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
    } else {
        0
    }
}

fn inside_region(p: Point2, half: f64) -> bool {
    p.x.abs() <= half && p.y.abs() <= half
}

pub(crate) fn generate_buildings(lambda_b: f64, cfg: &SceneConfig, key: u64) -> Vec<Building> {
    let (lo, hi) = tile_span(cfg.half_extent);
    let mean = lambda_b * TILE * TILE;
    let mut out = vec![];
    for i in lo..=hi {
        for j in lo..=hi {
            let mut rng = tile_rng(key, KIND_BUILDINGS, i, j);
            for _ in 0..poisson_count(&mut rng, mean) {
                let c = Point2::new(
                    (i as f64 + rng.random::<f64>()) * TILE,
                    (j as f64 + rng.random::<f64>()) * TILE,
                );
                let l = cfg.length.sample(&mut rng);
                let w = cfg.width.sample(&mut rng);
                let phi = match cfg.orientation {
                    OrientationSampler::Fixed(p) => p,
                    OrientationSampler::Uniform => rng.random_range(0.0..PI),
                };
                if inside_region(c, cfg.half_extent) {
                    out.push(Building::new(c, l, w, phi).expect("sampled dimensions are positive"));
                }
            }
        }
    }
    out
}

/// Lazily populated people, thinned against the building footprints.
pub(crate) struct HumanField<'a> {
    buildings: &'a [Building],
    grid: HashMap<(i64, i64), Vec<usize>>,
    density: f64,
    diameter: f64,
    half: f64,
    key: u64,
    tiles: HashMap<(i64, i64), Vec<Person>>,
}

impl<'a> HumanField<'a> {
    pub(crate) fn new(buildings: &'a [Building], s: &Scenario, cfg: &SceneConfig, key: u64) -> Self {
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, b) in buildings.iter().enumerate() {
            let r = b.bounding_radius();
            for i in tile_of(b.center.x - r)..=tile_of(b.center.x + r) {
                for j in tile_of(b.center.y - r)..=tile_of(b.center.y + r) {
                    grid.entry((i, j)).or_default().push(k);
                }
            }
        }
        Self {
            buildings,
            grid,
            density: s.lambda_h_raw,
            diameter: s.w_h,
            half: cfg.half_extent,
            key,
            tiles: HashMap::new(),
        }
    }

    fn indoors(&self, p: Point2) -> bool {
        self.grid
            .get(&(tile_of(p.x), tile_of(p.y)))
            .is_some_and(|ks| ks.iter().any(|&k| self.buildings[k].contains(p)))
    }

    fn tile(&mut self, i: i64, j: i64) -> &[Person] {
        if !self.tiles.contains_key(&(i, j)) {
            let mut rng = tile_rng(self.key, KIND_HUMANS, i, j);
            let mut people = vec![];
            for _ in 0..poisson_count(&mut rng, self.density * TILE * TILE) {
                let c = Point2::new(
                    (i as f64 + rng.random::<f64>()) * TILE,
                    (j as f64 + rng.random::<f64>()) * TILE,
                );
                if inside_region(c, self.half) && !self.indoors(c) {
                    people.push(Person { center: c, diameter: self.diameter });
                }
            }
            self.tiles.insert((i, j), people);
        }
        &self.tiles[&(i, j)]
    }

    /// Every person whose disc could touch one of `segs`.
    pub(crate) fn near(&mut self, segs: &[Segment2]) -> Vec<Person> {
        if self.density == 0.0 {
            return vec![];
        }
        let r = self.diameter / 2.0;
        let mut keys = vec![];
        for s in segs {
            let (x0, x1) = (s.a.x.min(s.b.x) - r, s.a.x.max(s.b.x) + r);
            let (y0, y1) = (s.a.y.min(s.b.y) - r, s.a.y.max(s.b.y) + r);
            for i in tile_of(x0)..=tile_of(x1) {
                for j in tile_of(y0)..=tile_of(y1) {
                    keys.push((i, j));
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let mut out = vec![];
        for (i, j) in keys {
            out.extend_from_slice(self.tile(i, j));
        }
        out
    }

    pub(crate) fn all(&mut self) -> Vec<Person> {
        let (lo, hi) = tile_span(self.half);
        let mut out = vec![];
        for i in lo..=hi {
            for j in lo..=hi {
                out.extend_from_slice(self.tile(i, j));
            }
        }
        out
    }
}

/// Buildings for a realization together with the key and number of redraws.
pub(crate) fn realization_buildings(s: &Scenario, cfg: &SceneConfig, index: u64) -> (Vec<Building>, u64, u64) {
    let tx = Point2::new(-s.d, 0.0);
    let rx = Point2::new(0.0, 0.0);
    let mut attempt = 0;
    loop {
        let key = realization_key(cfg.seed, index, attempt);
        let b = generate_buildings(s.lambda_b, cfg, key);
        let outdoors = || !b.iter().any(|x| x.contains(tx) || x.contains(rx));
        if cfg.terminal_policy == TerminalPolicy::Block || outdoors() {
            return (b, key, attempt);
        }
        attempt += 1;
    }
}

/// Full scene of realization `index`.
pub fn generate_scene(s: &Scenario, cfg: &SceneConfig, index: u64) -> Scene {
    let (buildings, key, _) = realization_buildings(s, cfg, index);
    let humans = HumanField::new(&buildings, s, cfg, key).all();
    Scene { buildings, humans }
}
