//! Seeded estimators over independent scene realizations.

use super::scene::{realization_buildings, HumanField};
use super::trace::{apply_humans, first_order_candidates, legs, second_order_candidates, Link, PathOrder};
use super::SceneConfig;
use crate::error::Result;
use crate::pdp::DelayStats;
use crate::quadrature::KahanSum;
use crate::scenario::Scenario;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over √M.
    pub se: f64,
    pub m: usize,
}

impl EstimateWithCI {
    fn from_sums(sum: f64, sum_sq: f64, m: usize, scale: f64) -> Self {
        let n = m as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Self { mean: scale * mean, se: scale * (var / n).sqrt(), m }
    }
}

/// Binned mean power delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// (bin start in s, path count, mean PDP in 1/s).
    pub bins: Vec<(f64, u64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub realizations: usize,
    /// Fraction of drawn scenes discarded for an indoor terminal.
    pub rejection_rate: f64,
    /// Mean unblocked first-order count, self-blockage weighted.
    pub n_r: EstimateWithCI,
    pub n_r_second: EstimateWithCI,
    /// Frequencies of raw unblocked first-order counts, indexed by count.
    pub count_pmf: Vec<u64>,
    /// Received power ratio 1/PL, self-blockage weighted.
    pub received: EstimateWithCI,
    pub path_loss_db: f64,
    pub path_loss_db_se: f64,
    pub delay: Option<DelayStats>,
    pub histogram: Histogram,
}

impl McSummary {
    pub fn path_loss(&self) -> f64 {
        1.0 / self.received.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Count,
    PathLoss,
    PdpHistogram,
    DelayStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Value(EstimateWithCI),
    Histogram(Histogram),
    Delay(Option<DelayStats>),
}

#[derive(Debug, Default)]
struct Outcome {
    first: u32,
    second: u32,
    /// (delay, unweighted power) of unblocked paths.
    paths: Vec<(f64, f64)>,
    redraws: u64,
}

fn realize(s: &Scenario, cfg: &SceneConfig, link: &Link, index: u64) -> Outcome {
    let (buildings, key, redraws) = realization_buildings(s, cfg, index);
    let mut cands = first_order_candidates(&buildings, link, s);
    if cfg.second_order && buildings.len() >= 2 {
        cands.extend(second_order_candidates(&buildings, link, s));
    }
    cands.retain(|p| !p.blocked);
    if !cands.is_empty() && s.lambda_h_raw > 0.0 {
        let segs: Vec<_> = cands.iter().flat_map(legs).collect();
        let humans = HumanField::new(&buildings, s, cfg, key).near(&segs);
        apply_humans(&mut cands, &humans);
    }
    let mut out = Outcome { redraws, ..Outcome::default() };
    for p in cands.iter().filter(|p| !p.blocked) {
        match p.order {
            PathOrder::First => out.first += 1,
            PathOrder::Second => out.second += 1,
        }
        out.paths.push((p.delay, p.power));
    }
    out
}

/// Run every realization and reduce the outcomes in index order, so the
/// result is bit-identical for any number of worker threads.
pub fn run(s: &Scenario, cfg: &SceneConfig) -> Result<McSummary> {
    s.validate()?;
    cfg.validate()?;
    let link = Link::new(s);
    let outcomes: Vec<Outcome> =
        (0..cfg.realizations as u64).into_par_iter().map(|k| realize(s, cfg, &link, k)).collect();

    let w = s.self_weight();
    let m = cfg.realizations;
    let (mut c1, mut c1sq, mut c2, mut c2sq) = (KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default());
    let (mut pw, mut pwsq, mut t1, mut t2) = (KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default());
    let mut pmf: Vec<u64> = vec![];
    let mut bins: BTreeMap<i64, (u64, KahanSum)> = BTreeMap::new();
    let mut redraws = 0u64;
    for o in &outcomes {
        let (f, sc) = (o.first as f64, o.second as f64);
        c1.add(f);
        c1sq.add(f * f);
        c2.add(sc);
        c2sq.add(sc * sc);
        let idx = o.first as usize;
        if pmf.len() <= idx {
            pmf.resize(idx + 1, 0);
        }
        pmf[idx] += 1;
        let mut total = KahanSum::default();
        for &(tau, p) in &o.paths {
            total.add(p);
            t1.add(p * tau);
            t2.add(p * tau * tau);
            let e = bins.entry((tau / cfg.bin_width).floor() as i64).or_default();
            e.0 += 1;
            e.1.add(p);
        }
        let total = total.value();
        pw.add(total);
        pwsq.add(total * total);
        redraws += o.redraws;
    }
    let received = EstimateWithCI::from_sums(pw.value(), pwsq.value(), m, w);
    let (pl_db, pl_db_se) = if received.mean > 0.0 {
        (10.0 * (1.0 / received.mean).log10(), 10.0 / std::f64::consts::LN_10 * received.se / received.mean)
    } else {
        (f64::INFINITY, f64::NAN)
    };
    let p0 = pw.value();
    let delay = (p0 > 0.0).then(|| {
        let mean = t1.value() / p0;
        let var = (t2.value() / p0 - mean * mean).max(0.0);
        let rms = var.sqrt();
        DelayStats { tau_mean: mean, tau_rms: rms, coherence_bw: 1.0 / (50.0 * rms) }
    });
    let histogram = Histogram {
        bin_width: cfg.bin_width,
        bins: bins
            .into_iter()
            .map(|(k, (hits, p))| (k as f64 * cfg.bin_width, hits, w * p.value() / (m as f64 * cfg.bin_width)))
            .collect(),
    };
    Ok(McSummary {
        realizations: m,
        rejection_rate: redraws as f64 / (redraws as f64 + m as f64),
        n_r: EstimateWithCI::from_sums(c1.value(), c1sq.value(), m, w),
        n_r_second: EstimateWithCI::from_sums(c2.value(), c2sq.value(), m, w),
        count_pmf: pmf,
        received,
        path_loss_db: pl_db,
        path_loss_db_se: pl_db_se,
        delay,
        histogram,
    })
}

/// One statistic of the Monte Carlo run. Path loss is reported in dB.
pub fn estimate(s: &Scenario, cfg: &SceneConfig, what: Quantity) -> Result<Estimate> {
    let r = run(s, cfg)?;
    Ok(match what {
        Quantity::Count => Estimate::Value(r.n_r),
        Quantity::PathLoss => Estimate::Value(EstimateWithCI { mean: r.path_loss_db, se: r.path_loss_db_se, m: r.realizations }),
        Quantity::PdpHistogram => Estimate::Histogram(r.histogram),
        Quantity::DelayStats => Estimate::Delay(r.delay),
    })
}
