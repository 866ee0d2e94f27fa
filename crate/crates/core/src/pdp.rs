//! Analytic power delay profile and its delay moments.

use crate::error::{Error, Result};
use crate::first_order::{angle_set, face_families, Composites, FaceFamily, MIN_WINDOW, THETA_MAX};
use crate::quadrature::{gauss_legendre_on, integrate, Tolerance};
use crate::scenario::{Orientation, Scenario, SPEED_OF_LIGHT as C};
use crate::second_order::ImageSourceModel;
use std::f64::consts::FRAC_PI_2;

/// Panel size of the tensor rule over image distance and angle.
const MIXTURE_NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// One arrival-angle window with its linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub theta_i: f64,
    pub theta_u: f64,
    pub tau_i: f64,
    pub tau_u: f64,
    pub comps: Composites,
    /// Probability weight of this window (1 for first order).
    pub weight: f64,
}

impl Branch {
    fn new(s: &Scenario, fam: &FaceFamily, lh: f64, theta_i: f64, theta_u: f64, weight: f64) -> Self {
        let dc = fam.cb(s) / C;
        Self {
            theta_i,
            theta_u,
            tau_i: dc / theta_i.cos(),
            tau_u: dc / theta_u.cos(),
            comps: Composites::new(s, fam, lh, theta_i, theta_u),
            weight,
        }
    }

    pub fn contains(&self, tau: f64) -> bool {
        tau >= self.tau_i && tau <= self.tau_u
    }
}

/// First- and second-order delay structure for one reflecting face family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPdp {
    pub family: FaceFamily,
    pub first: Branch,
    pub image: ImageSourceModel,
    /// Second-order windows from the tensor rule; weights sum to about `image.p`.
    pub second: Vec<Branch>,
    /// D = d·|cos φ| for this family.
    pub d_cos: f64,
}

/// Piecewise-analytic power delay profile, normalized by transmit power and gains.
#[derive(Debug, Clone, PartialEq)]
pub struct PdpModel {
    pub families: Vec<FamilyPdp>,
    pub gamma_l: f64,
    pub gamma_rm: f64,
    pub self_weight: f64,
    pub lambda_b: f64,
    pub lambda_h: f64,
    pub include_second: bool,
    scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    pub tau_mean: f64,
    pub tau_rms: f64,
    pub coherence_bw: f64,
}

/// Raw delay moments ∫ τᵏ PDP(τ) dτ for k = 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Moments {
    fn add(&mut self, o: Moments) {
        self.m0 += o.m0;
        self.m1 += o.m1;
        self.m2 += o.m2;
    }

    pub fn stats(&self) -> Result<DelayStats> {
        if !(self.m0 > 0.0) {
            return Err(Error::UndefinedStats("zero received power".into()));
        }
        let tau_mean = self.m1 / self.m0;
        let mut var = self.m2 / self.m0 - tau_mean * tau_mean;
        if var < 0.0 {
            if var > -1e-18 {
                var = 0.0;
            } else {
                return Err(Error::UndefinedStats(format!("negative delay variance {var:e} s²")));
            }
        }
        let tau_rms = var.sqrt();
        Ok(DelayStats { tau_mean, tau_rms, coherence_bw: 1.0 / (50.0 * tau_rms) })
    }
}

/// Second-order arrival window seen by the receiver for an image source at
/// distance `d_hat` and angle `t_hat`.
fn second_window(s: &Scenario, fam: &FaceFamily, m: &ImageSourceModel, d_hat: f64, t_hat: f64) -> Option<(f64, f64)> {
    let a = angle_set(s.phi_t, s.phi_r, fam.phi, s.theta_bt, s.theta_br);
    let upper = m.upper_edge(t_hat, d_hat);
    let lo = a.theta_ri.max(FRAC_PI_2 - upper).max(fam.phi.abs());
    let hi = a.theta_ru.min(FRAC_PI_2 - t_hat).min(THETA_MAX);
    (hi - lo >= MIN_WINDOW).then_some((lo, hi))
}

fn mixture(s: &Scenario, fam: &FaceFamily, m: &ImageSourceModel, lh: f64) -> Result<Vec<Branch>> {
    if m.is_empty() {
        return Ok(vec![]);
    }
    let (lo, hi) = m.support();
    let mut out = vec![];
    for (d_hat, wd) in gauss_legendre_on(MIXTURE_NODES, lo, hi) {
        let pd = m.p * m.distance_pdf(d_hat) * wd;
        let ang = m.angle_pdf(d_hat)?;
        let mut push = |t: f64, w: f64| {
            if let Some((ti, tu)) = second_window(s, fam, m, d_hat, t) {
                out.push(Branch::new(s, fam, lh, ti, tu, pd * w));
            }
        };
        push(ang.lo, ang.atom_mass);
        for (t, wt) in gauss_legendre_on(MIXTURE_NODES, ang.lo, ang.hi) {
            push(t, ang.density(t) * wt);
        }
    }
    Ok(out)
}

impl PdpModel {
    /// Build the profile for a fixed building orientation.
    pub fn new(s: &Scenario) -> Result<Self> {
        s.validate()?;
        let Orientation::Fixed(phi_b) = s.orientation else {
            return Err(Error::InvalidScenario("the delay profile requires a fixed building orientation".into()));
        };
        let lh = s.lambda_h()?;
        let mut families = vec![];
        for fam in face_families(s, phi_b) {
            let w = fam.window;
            let image = ImageSourceModel::for_family(s, &fam);
            let second = if s.second_order { mixture(s, &fam, &image, lh)? } else { vec![] };
            families.push(FamilyPdp {
                family: fam,
                first: Branch::new(s, &fam, lh, w.theta_i, w.theta_u, 1.0),
                image,
                second,
                d_cos: fam.cb(s),
            });
        }
        Ok(Self {
            families,
            gamma_l: s.gamma_l(),
            gamma_rm: s.gamma_rm,
            self_weight: s.self_weight(),
            lambda_b: s.lambda_b,
            lambda_h: lh,
            include_second: s.second_order,
            scenario: s.clone(),
        })
    }

    fn amplitude(&self, f: &FamilyPdp, order: Order) -> f64 {
        let g = match order {
            Order::First => self.gamma_rm,
            Order::Second => self.gamma_rm * self.gamma_rm,
        };
        f.family.e_a * g * self.gamma_l * self.self_weight * self.lambda_b
    }

    fn angle_of(f: &FamilyPdp, tau: f64) -> f64 {
        (f.d_cos / (C * tau)).clamp(-1.0, 1.0).acos()
    }

    /// Power delay profile at delay `tau` (s), in 1/s.
    pub fn pdp(&self, tau: f64) -> f64 {
        let mut total = 0.0;
        for f in &self.families {
            let in_first = f.first.contains(tau);
            let w2: f64 = f.second.iter().filter(|b| b.contains(tau)).map(|b| b.weight).sum();
            if !in_first && w2 == 0.0 {
                continue;
            }
            let th = Self::angle_of(f, tau);
            let base = f.family.survival(&self.scenario, self.lambda_h, th) / (2.0 * C * tau * tau);
            if in_first {
                total += self.amplitude(f, Order::First) * base;
            }
            total += self.amplitude(f, Order::Second) * th.sin() * base * w2;
        }
        total
    }

    /// Expected arrival rate per unit delay, in 1/s.
    pub fn arrival_density(&self, order: Order, tau: f64) -> Result<f64> {
        let min = self.families.iter().map(|f| f.d_cos / C).fold(f64::INFINITY, f64::min);
        if tau < min {
            return Err(Error::Domain { tau, min });
        }
        let mut total = 0.0;
        for f in &self.families {
            let weight = match order {
                Order::First => f64::from(u8::from(f.first.contains(tau))),
                Order::Second => f.second.iter().filter(|b| b.contains(tau)).map(|b| b.weight).sum(),
            };
            if weight == 0.0 {
                continue;
            }
            let th = Self::angle_of(f, tau);
            let surv = self.self_weight * f.family.survival(&self.scenario, self.lambda_h, th);
            total += weight * f.family.e_a * C * self.lambda_b * surv / (2.0 * th.sin());
        }
        Ok(total)
    }

    /// Closed-form delay moments of one branch.
    fn branch_moments(&self, f: &FamilyPdp, b: &Branch, order: Order) -> Moments {
        let (i, u) = (b.theta_i, b.theta_u);
        let c = &b.comps;
        let lead = 1.0 + c.x_bar * c.u0;
        let x = c.x_bar;
        let amp = self.amplitude(f, order) * b.weight * c.envelope();
        let dd = f.d_cos;
        let sec = |t: f64| 1.0 / t.cos();
        let lsec = |t: f64| (sec(t) + t.tan()).ln();
        let diff = |g: &dyn Fn(f64) -> f64| g(u) - g(i);
        match order {
            Order::First => Moments {
                m0: amp / (2.0 * dd) * (lead * diff(&|t| -t.cos()) - x * diff(&|t| lsec(t) - t.sin())),
                m1: amp / (2.0 * C) * (lead * diff(&|t| -t.cos().ln()) - x * diff(&|t| t.tan() - t)),
                m2: amp * dd / (2.0 * C * C)
                    * (lead * diff(&sec) - x * diff(&|t| 0.5 * (sec(t) * t.tan() - lsec(t)))),
            },
            Order::Second => Moments {
                m0: amp / (2.0 * dd)
                    * (lead * diff(&|t| t / 2.0 - (2.0 * t).sin() / 4.0)
                        - x * diff(&|t| -t.cos().ln() - t.sin().powi(2) / 2.0)),
                m1: amp / (2.0 * C) * (lead * diff(&|t| lsec(t) - t.sin()) - x * diff(&|t| sec(t) + t.cos())),
                m2: amp * dd / (2.0 * C * C)
                    * (lead * diff(&|t| t.tan() - t) - x * diff(&|t| t.tan().powi(2) / 2.0 + t.cos().ln())),
            },
        }
    }

    /// Closed-form moments, first order only.
    pub fn first_order_moments(&self) -> Moments {
        let mut m = Moments::default();
        for f in &self.families {
            m.add(self.branch_moments(f, &f.first, Order::First));
        }
        m
    }

    pub fn second_order_moments(&self) -> Moments {
        let mut m = Moments::default();
        for f in &self.families {
            for b in &f.second {
                m.add(self.branch_moments(f, b, Order::Second));
            }
        }
        m
    }

    pub fn moments(&self) -> Moments {
        let mut m = self.first_order_moments();
        if self.include_second {
            m.add(self.second_order_moments());
        }
        m
    }

    /// Moments of the exact profile by quadrature in the arrival angle.
    pub fn moments_exact(&self) -> Result<Moments> {
        let tol = Tolerance::default();
        let mut m = Moments::default();
        for f in &self.families {
            let mut branches = vec![(f.first, Order::First)];
            if self.include_second {
                branches.extend(f.second.iter().map(|b| (*b, Order::Second)));
            }
            for (b, order) in branches {
                let amp = self.amplitude(f, order) * b.weight / (2.0 * f.d_cos);
                let kernel = |t: f64, k: i32| {
                    let g = if order == Order::Second { t.sin() * t.sin() } else { t.sin() };
                    g * (f.d_cos / (C * t.cos())).powi(k) * f.family.survival(&self.scenario, self.lambda_h, t)
                };
                m.add(Moments {
                    m0: amp * integrate(|t| kernel(t, 0), b.theta_i, b.theta_u, tol)?,
                    m1: amp * integrate(|t| kernel(t, 1), b.theta_i, b.theta_u, tol)?,
                    m2: amp * integrate(|t| kernel(t, 2), b.theta_i, b.theta_u, tol)?,
                });
            }
        }
        Ok(m)
    }

    /// Delay support [τ_i^f, max τ_u] over all branches.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self.families.iter().map(|f| f.first.tau_i).fold(f64::INFINITY, f64::min);
        let hi = self
            .families
            .iter()
            .flat_map(|f| std::iter::once(f.first.tau_u).chain(f.second.iter().map(|b| b.tau_u)))
            .fold(f64::NEG_INFINITY, f64::max);
        lo.is_finite().then_some((lo, hi))
    }

    /// Profile sampled on a 0.1 ns grid spanning [0.9·τ_i, 1.1·τ_u].
    pub fn curve(&self) -> Vec<(f64, f64)> {
        let Some((lo, hi)) = self.support() else { return vec![] };
        let step = 0.1e-9;
        let (a, b) = (0.9 * lo, 1.1 * hi);
        let n = ((b - a) / step).ceil() as usize;
        (0..=n).map(|k| a + k as f64 * step).map(|t| (t, self.pdp(t))).collect()
    }
}

pub fn pdp(s: &Scenario, tau: f64) -> Result<f64> {
    Ok(PdpModel::new(s)?.pdp(tau))
}

pub fn arrival_density(s: &Scenario, order: Order, tau: f64) -> Result<f64> {
    PdpModel::new(s)?.arrival_density(order, tau)
}

/// Mean delay, RMS delay spread and coherence bandwidth from the closed-form moments.
pub fn delay_stats(s: &Scenario) -> Result<DelayStats> {
    PdpModel::new(s)?.moments().stats()
}

/// Delay statistics of the exact profile, by quadrature.
pub fn delay_stats_exact(s: &Scenario) -> Result<DelayStats> {
    PdpModel::new(s)?.moments_exact()?.stats()
}
