//! Acceptance gate. Prints one PASS/FAIL line per criterion and a summary.
//!
//! A red criterion is reported, not hidden: the process exits 0 so the rest of
//! the workspace suite still runs, unless `MMGEO_ACCEPTANCE_STRICT=1` is set.
//! `MMGEO_ACCEPTANCE_REALIZATIONS` shrinks the Monte Carlo runs for quick
//! local iterations; the printed verdicts are then marked as non-standard.

use mmgeo::first_order::{
    avg_first_order_closed, avg_first_order_exact, effective_window, elemental_area, face_families, feasible_area,
    inverse_path_loss_closed, inverse_path_loss_exact, to_db,
};
use mmgeo::geometry::{specular_reflection, Point2, Segment2};
use mmgeo::montecarlo::{self, DimKind, SceneConfig};
use mmgeo::pdp::{delay_stats, PdpModel};
use mmgeo::quadrature::{integrate, Tolerance};
use mmgeo::second_order::image_source_model;
use mmgeo::{BlockageMoments, Error, Orientation, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn deg(x: f64) -> f64 {
    x.to_radians()
}

fn pct(x: f64) -> String {
    format!("{:.4}%", 100.0 * x)
}

#[derive(Default)]
struct Report {
    pass: usize,
    fail: usize,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, what: &str) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        println!("{} {id:<6} {what}", if ok { "PASS" } else { "FAIL" });
    }

    fn info(&self, id: &str, what: &str) {
        println!("INFO {id:<6} {what}");
    }
}

/// Deployment used for the approximation-error study.
fn study(d: f64, theta_b: f64, phi_b: f64) -> Scenario {
    Scenario {
        d,
        theta_bt: deg(theta_b),
        theta_br: deg(theta_b),
        orientation: Orientation::Fixed(deg(phi_b)),
        ..Scenario::default()
    }
}

fn with_pointing(s: &Scenario, phi_t: f64, phi_r: f64) -> Scenario {
    Scenario { phi_t: deg(phi_t), phi_r: deg(phi_r), ..s.clone() }
}

struct GridErrors {
    n_mean: f64,
    n_max: (f64, f64, f64),
    pl_mean: f64,
    pl_max: (f64, f64, f64),
    ipl_mean: f64,
    coupled: usize,
    total: usize,
}

/// Closed-form errors over φ_r ∈ [40°, 90°] × φ_t ∈ [95°, 145°] in 5° steps,
/// averaged over pointings where some face couples both lobes.
fn grid_errors(base: &Scenario) -> GridErrors {
    let (mut n_sum, mut pl_sum, mut ipl_sum, mut coupled, mut total) = (0.0, 0.0, 0.0, 0, 0);
    let (mut n_max, mut pl_max) = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0));
    for i in 0..=10 {
        for j in 0..=10 {
            let (pr, pt) = (40.0 + 5.0 * i as f64, 95.0 + 5.0 * j as f64);
            let s = with_pointing(base, pt, pr);
            total += 1;
            let ne = avg_first_order_exact(&s).unwrap();
            if ne <= 0.0 {
                continue;
            }
            coupled += 1;
            let nc = avg_first_order_closed(&s).unwrap();
            let (ge, gc) = (inverse_path_loss_exact(&s).unwrap(), inverse_path_loss_closed(&s).unwrap());
            let en = ((nc - ne) / ne).abs();
            // Relative error of the linear path loss 1/g.
            let ep = (ge / gc - 1.0).abs();
            n_sum += en;
            pl_sum += ep;
            ipl_sum += ((gc - ge) / ge).abs();
            if en > n_max.0 {
                n_max = (en, pr, pt);
            }
            if ep > pl_max.0 {
                pl_max = (ep, pr, pt);
            }
        }
    }
    let c = coupled.max(1) as f64;
    GridErrors { n_mean: n_sum / c, n_max, pl_mean: pl_sum / c, pl_max, ipl_mean: ipl_sum / c, coupled, total }
}

fn point_errors(s: &Scenario) -> Option<(f64, f64)> {
    let ne = avg_first_order_exact(s).unwrap();
    if ne <= 0.0 {
        return None;
    }
    let nc = avg_first_order_closed(s).unwrap();
    let (ge, gc) = (inverse_path_loss_exact(s).unwrap(), inverse_path_loss_closed(s).unwrap());
    Some((((nc - ne) / ne).abs(), (ge / gc - 1.0).abs()))
}

fn approximation_errors(r: &mut Report) {
    let t0 = Instant::now();
    let wide = grid_errors(&study(75.0, 30.0, 15.0));
    let narrow = grid_errors(&study(50.0, 10.0, 15.0));
    let describe = |g: &GridErrors| format!("{} of {} grid pointings couple", g.coupled, g.total);
    r.info("C1", &format!("d=75 m, θ_b=30°, φ_b=15°: {}", describe(&wide)));
    r.check(
        "C1.a",
        (0.001..=0.01).contains(&wide.n_mean),
        &format!("N_r mean error d=75 θ_b=30: {} (bracket [0.1%, 1%])", pct(wide.n_mean)),
    );
    r.info("C1", &format!("d=50 m, θ_b=10°, φ_b=15°: {}", describe(&narrow)));
    r.check(
        "C1.b",
        narrow.n_mean <= 0.001,
        &format!("N_r mean error d=50 θ_b=10: {} (≤ 0.1%)", pct(narrow.n_mean)),
    );
    let probe = study(50.0, 10.0, 15.0);
    let at_probe = point_errors(&with_pointing(&probe, 95.0, 40.0));
    r.check(
        "C1.c",
        narrow.n_max.0 <= 0.04,
        &format!(
            "N_r max error d=50 θ_b=10: {} at φ_r={}°, φ_t={}° (≤ 4%); at φ_r=40°, φ_t=95°: {}",
            pct(narrow.n_max.0),
            narrow.n_max.1,
            narrow.n_max.2,
            at_probe.map_or("no coupled face".into(), |e| pct(e.0))
        ),
    );

    r.check(
        "C2.a",
        (0.0002..=0.005).contains(&wide.pl_mean),
        &format!(
            "PL mean error d=75 θ_b=30: {} (bracket [0.02%, 0.5%]); on 1/PL: {}",
            pct(wide.pl_mean),
            pct(wide.ipl_mean)
        ),
    );
    r.check(
        "C2.b",
        narrow.pl_mean <= 0.0005,
        &format!(
            "PL mean error d=50 θ_b=10: {} (≤ 0.05%); on 1/PL: {}",
            pct(narrow.pl_mean),
            pct(narrow.ipl_mean)
        ),
    );
    let probe_wide = point_errors(&with_pointing(&study(75.0, 30.0, 15.0), 95.0, 40.0));
    r.check(
        "C2.c",
        probe_wide.is_some_and(|e| (0.2..=0.45).contains(&e.1)),
        &format!(
            "PL error d=75 θ_b=30 at φ_r=40°, φ_t=95°: {} (bracket [20%, 45%]); grid max {} at φ_r={}°, φ_t={}°",
            probe_wide.map_or("no coupled face".into(), |e| pct(e.1)),
            pct(wide.pl_max.0),
            wide.pl_max.1,
            wide.pl_max.2
        ),
    );
    r.info("C2", &format!("N_r max error d=75 θ_b=30: {} at φ_r={}°, φ_t={}°", pct(wide.n_max.0), wide.n_max.1, wide.n_max.2));

    // Same study with the buildings turned to 25°, for comparison only.
    let alt = grid_errors(&study(75.0, 30.0, 25.0));
    let alt_probe = point_errors(&with_pointing(&study(75.0, 30.0, 25.0), 95.0, 40.0));
    r.info(
        "C1/C2",
        &format!(
            "φ_b=25° variant d=75 θ_b=30: N_r mean {}, PL mean {}, {}; at φ_r=40°, φ_t=95°: N_r {}, PL {}",
            pct(alt.n_mean),
            pct(alt.pl_mean),
            describe(&alt),
            alt_probe.map_or("-".into(), |e| pct(e.0)),
            alt_probe.map_or("-".into(), |e| pct(e.1)),
        ),
    );
    let secs = t0.elapsed().as_secs_f64();
    r.check("C1/C2", secs < 60.0, &format!("approximation study runtime {secs:.1} s (< 60 s)"));
}

fn realizations() -> (usize, bool) {
    match std::env::var("MMGEO_ACCEPTANCE_REALIZATIONS").ok().and_then(|v| v.parse().ok()) {
        Some(m) => (m, false),
        None => (20_000, true),
    }
}

/// Poisson pmf of the first three counts against the empirical frequencies,
/// without renormalizing the truncated tail.
fn truncated_kld(pmf: &[u64], mean: f64) -> f64 {
    let m: u64 = pmf.iter().sum();
    let mut q = (-mean).exp();
    let mut kld = 0.0;
    for k in 0..=2 {
        let p = pmf.get(k).copied().unwrap_or(0) as f64 / m as f64;
        if p > 0.0 {
            kld += p * (p / q).ln();
        }
        q *= mean / (k + 1) as f64;
    }
    kld
}

fn monte_carlo(r: &mut Report) {
    let (m, standard) = realizations();
    let tag = if standard { String::new() } else { format!(" [non-standard M={m}]") };
    let t0 = Instant::now();
    let base = Scenario { theta_bt: deg(30.0), theta_br: deg(30.0), ..Scenario::default() };
    for (k, d) in [50.0, 75.0, 150.0].into_iter().enumerate() {
        let s = Scenario { d, ..base.clone() };
        let cfg = SceneConfig::matching(&s, DimKind::Constant, 1000 + k as u64, m).unwrap();
        let mc = montecarlo::run(&s, &cfg).unwrap();
        let n = avg_first_order_exact(&s).unwrap();
        let g = inverse_path_loss_exact(&s).unwrap();
        let zn = (n - mc.n_r.mean) / mc.n_r.se;
        let zg = (g - mc.received.mean) / mc.received.se;
        r.check(
            &format!("C3.n{}", k + 1),
            zn.abs() <= 2.0,
            &format!(
                "N_r d={d}: exact {n:.5e}, MC {:.5e} ± {:.2e} (z = {zn:+.2}, |z| ≤ 2){tag}",
                mc.n_r.mean, mc.n_r.se
            ),
        );
        r.check(
            &format!("C3.p{}", k + 1),
            zg.abs() <= 3.0,
            &format!(
                "PL d={d}: exact {:.3} dB, MC {:.3} ± {:.3} dB (z on 1/PL = {zg:+.2}, |z| ≤ 3){tag}",
                -to_db(g),
                mc.path_loss_db,
                mc.path_loss_db_se
            ),
        );
        // Raw counts exclude self-blockage, which enters as a deterministic weight.
        let raw_mean = n / s.self_weight();
        let kld = truncated_kld(&mc.count_pmf, raw_mean);
        let pmf: Vec<String> = mc.count_pmf.iter().take(4).map(|c| c.to_string()).collect();
        let line = format!("KLD d={d}: {kld:+.3e} against Poisson({raw_mean:.4}), counts [{}]{tag}", pmf.join(", "));
        if d == 150.0 {
            r.check("C4", kld.abs() < 1e-2, &format!("{line} (|KLD| < 1e-2)"));
        } else {
            r.info("C4", &line);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    r.check("C3", secs < 600.0, &format!("Monte Carlo cross-check runtime {secs:.1} s (< 600 s){tag}"));
}

fn path_loss_db(s: &Scenario) -> f64 {
    -to_db(inverse_path_loss_exact(s).unwrap())
}

fn trends(r: &mut Report) {
    let fig = |d: f64, tb: f64| Scenario {
        d,
        theta_bt: deg(tb),
        theta_br: deg(tb),
        lambda_b: 8e-5,
        orientation: Orientation::UniformOverPi,
        ..Scenario::default()
    };
    let ds: Vec<f64> = (1..=6).map(|k| 25.0 * k as f64).collect();
    let mut table = vec![];
    for tb in [10.0, 20.0, 30.0] {
        let pl: Vec<f64> = ds.iter().map(|&d| path_loss_db(&fig(d, tb))).collect();
        let rising = pl.windows(2).all(|w| w[1] > w[0]);
        let cells: Vec<String> = pl.iter().map(|v| format!("{v:.2}")).collect();
        r.check(
            &format!("C5.a{}", tb as u32 / 10),
            rising,
            &format!("PL strictly increasing in d=25..150 at θ_b={tb}°: [{}] dB", cells.join(", ")),
        );
        table.push(pl);
    }
    let falling = (0..ds.len()).all(|k| table[0][k] > table[1][k] && table[1][k] > table[2][k]);
    r.check("C5.b", falling, "PL decreases with θ_b ∈ {10°, 20°, 30°} at every d");

    let mut deltas = vec![];
    for &d in &ds {
        let s = |lh: f64| Scenario { lambda_h_raw: lh, carried: 1, ..fig(d, 20.0) };
        deltas.push(path_loss_db(&s(6e-3)) - path_loss_db(&s(1e-3)));
    }
    let cells: Vec<String> = ds.iter().zip(&deltas).map(|(d, v)| format!("d={d}: {v:.2}")).collect();
    r.check(
        "C5.c",
        deltas.iter().all(|v| (1.0..=2.0).contains(v)),
        &format!("PL change for λ_h' 1e-3 → 6e-3 (one carried node), dB: {} (each in [1, 2])", cells.join(", ")),
    );
}

/// Pointings along which a face at φ_b couples both boresights.
fn diagonal(base: &Scenario, phi_b: f64, phi_r: f64) -> Scenario {
    with_pointing(base, 180.0 - 2.0 * phi_b - phi_r, phi_r)
}

fn delay_sweeps(r: &mut Report) {
    let base = Scenario { second_order: true, ..study(50.0, 10.0, 15.0) };
    let rs: Vec<f64> = (0..=6).map(|k| 10.0 * k as f64).collect();
    let mut bc = vec![];
    let mut first_only = vec![];
    for &pr in &rs {
        let s = diagonal(&base, 15.0, pr);
        bc.push(delay_stats(&s).unwrap().coherence_bw * 1e-6);
        first_only.push(delay_stats(&Scenario { second_order: false, ..s }).unwrap().coherence_bw * 1e-6);
    }
    let cells: Vec<String> = rs.iter().zip(&bc).map(|(p, b)| format!("{p}°: {b:.3}")).collect();
    r.info("C6", &format!("B_c (MHz) along φ_t = 150° − φ_r: {}", cells.join(", ")));
    let cells: Vec<String> = first_only.iter().map(|b| format!("{b:.3}")).collect();
    r.info("C6", &format!("first order only: [{}]", cells.join(", ")));
    let (b0, b60) = (bc[0], bc[bc.len() - 1]);
    r.check("C6.a", (10.0..=1000.0).contains(&b0), &format!("B_c at φ_r=0°: {b0:.3} MHz (within one decade of 100 MHz)"));
    r.check("C6.b", (0.1..=10.0).contains(&b60), &format!("B_c at φ_r=60°: {b60:.3} MHz (within one decade of 1 MHz)"));
    r.check("C6.c", bc.windows(2).all(|w| w[1] < w[0]), "B_c strictly decreasing across the sweep");

    let campus = Scenario {
        d: 75.0,
        theta_bt: deg(7.0),
        theta_br: deg(7.0),
        lambda_b: 8.75e-5,
        moments: BlockageMoments::constant(55.0, 54.0),
        gamma_rm: mmgeo::scenario::db_to_loss_ratio(3.18),
        second_order: true,
        ..study(75.0, 7.0, 15.0)
    };
    let sig: Vec<f64> = rs.iter().map(|&pr| delay_stats(&diagonal(&campus, 15.0, pr)).unwrap().tau_rms * 1e9).collect();
    let cells: Vec<String> = rs.iter().zip(&sig).map(|(p, v)| format!("{p}°: {v:.2}")).collect();
    r.check(
        "C6.d",
        sig.windows(2).all(|w| w[1] > w[0]),
        &format!("RMS delay spread (ns) rises with pointing angle, campus deployment: {}", cells.join(", ")),
    );
}

fn random_coupled(rng: &mut ChaCha8Rng) -> Scenario {
    loop {
        let phi_b = rng.random_range(0.0..90.0);
        let pr = rng.random_range(0.0..70.0);
        let tb = rng.random_range(5.0..40.0);
        let pt = 180.0 - 2.0 * phi_b - pr + rng.random_range(-0.4..0.4) * tb;
        let (l, w) = (rng.random_range(15.0..55.0), rng.random_range(15.0..55.0));
        let s = Scenario {
            d: rng.random_range(25.0..200.0),
            phi_t: deg(pt),
            phi_r: deg(pr),
            theta_bt: deg(tb),
            theta_br: deg(tb),
            lambda_b: rng.random_range(2e-5..12e-5),
            moments: BlockageMoments::constant(l, w),
            orientation: Orientation::Fixed(deg(phi_b)),
            lambda_h_raw: rng.random_range(0.0..6e-3),
            second_order: rng.random_bool(0.5),
            ..Scenario::default()
        };
        if !face_families(&s, deg(phi_b)).is_empty() {
            return s;
        }
    }
}

fn identities(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases: Vec<Scenario> = (0..200).map(|_| random_coupled(&mut rng)).collect();
    let tight = Tolerance::tight();

    let mut worst_area: f64 = 0.0;
    let mut windows = 0;
    for s in &cases {
        for fam in face_families(s, match s.orientation {
            Orientation::Fixed(p) => p,
            Orientation::UniformOverPi => unreachable!(),
        }) {
            let Some(w) = effective_window(s, fam.phi, fam.dim) else { continue };
            let a = fam.moments.e_l;
            let closed = feasible_area(a, s.d, fam.phi, &w).unwrap();
            let numeric = integrate(|t| elemental_area(s.d, fam.phi, t, 1.0, a), w.theta_i, w.theta_u, tight).unwrap();
            worst_area = worst_area.max(((numeric - closed) / closed).abs());
            windows += 1;
        }
    }
    r.check(
        "C7.a",
        worst_area <= 1e-10,
        &format!("integrated elemental area vs feasible area over {windows} windows: max rel {worst_area:.2e} (≤ 1e-10)"),
    );

    let mut worst_m0: f64 = 0.0;
    for s in &cases {
        let g = inverse_path_loss_closed(s).unwrap();
        let m0 = PdpModel::new(s).unwrap().first_order_moments().m0;
        worst_m0 = worst_m0.max(((m0 - g) / g).abs());
    }
    r.check("C7.b", worst_m0 <= 1e-9, &format!("first-order M0 vs 1/PL closed form: max rel {worst_m0:.2e} (≤ 1e-9)"));

    let (mut worst_pdf, mut models): (f64, usize) = (0.0, 0);
    for s in &cases {
        let Orientation::Fixed(phi_b) = s.orientation else { unreachable!() };
        let model = image_source_model(s, phi_b).unwrap();
        if model.is_empty() {
            continue;
        }
        models += 1;
        let (lo, hi) = model.support();
        let mass = integrate(|x| model.distance_pdf(x), lo, hi, tight).unwrap();
        worst_pdf = worst_pdf.max((mass - 1.0).abs());
        for k in 1..=5 {
            let d = lo + (hi - lo) * k as f64 / 6.0;
            let ang = model.angle_pdf(d).unwrap();
            let cont = integrate(|t| ang.density(t), ang.lo, ang.hi, tight).unwrap();
            worst_pdf = worst_pdf.max((cont + ang.atom_mass - 1.0).abs());
        }
    }
    r.check(
        "C7.c",
        worst_pdf <= 1e-9,
        &format!("distance and angle-plus-atom laws of {models} image models: max |mass − 1| {worst_pdf:.2e} (≤ 1e-9)"),
    );

    let mut bad = vec![];
    let mut min_sigma = f64::INFINITY;
    for s in &cases {
        match delay_stats(s) {
            Ok(st) => min_sigma = min_sigma.min(st.tau_rms),
            Err(Error::UndefinedStats(_)) => {}
            Err(e) => bad.push(e.to_string()),
        }
    }
    r.check(
        "C7.d",
        bad.is_empty() && min_sigma >= 0.0,
        &format!("σ_τ ≥ 0 over {} scenarios: min {:.3e} ns, {} failures", cases.len(), min_sigma * 1e9, bad.len()),
    );
}

fn geometry_and_determinism(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut accepted, mut worst_law, mut worst_len): (usize, f64, f64) = (0, 0.0, 0.0);
    while accepted < 10_000 {
        let c = Point2::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0));
        let ang = rng.random_range(0.0..std::f64::consts::PI);
        let half = rng.random_range(5.0..40.0);
        let u = Point2::new(ang.cos(), ang.sin());
        let n = Point2::new(-u.y, u.x);
        let face = Segment2::new(c - u * half, c + u * half);
        let place = |rng: &mut ChaCha8Rng| {
            c + u * rng.random_range(-150.0..150.0) + n * rng.random_range(0.5..150.0)
        };
        let (tx, rx) = (place(&mut rng), place(&mut rng));
        let Some(p) = specular_reflection(tx, rx, &face).unwrap() else { continue };
        accepted += 1;
        let inc = (p - tx) * (1.0 / p.dist(tx));
        let out = (rx - p) * (1.0 / rx.dist(p));
        let mirrored = inc - n * (2.0 * inc.dot(n));
        worst_law = worst_law.max((mirrored - out).norm());
        let image = tx - n * (2.0 * (tx - c).dot(n));
        let lhs = tx.dist(p) + p.dist(rx);
        let rhs = ((image.x - rx.x).powi(2) + (image.y - rx.y).powi(2)).sqrt();
        worst_len = worst_len.max(((lhs - rhs) / rhs).abs());
    }
    r.check(
        "C8.a",
        worst_law <= 1e-9 && worst_len <= 1e-9,
        &format!("{accepted} specular constructions: reflection law {worst_law:.2e}, path-length identity {worst_len:.2e} (≤ 1e-9)"),
    );

    let s = Scenario { theta_bt: deg(30.0), theta_br: deg(30.0), second_order: true, ..Scenario::default() };
    let cfg = SceneConfig::matching(&s, DimKind::Constant, 5, 1000).unwrap();
    let a = montecarlo::run(&s, &cfg).unwrap();
    let b = montecarlo::run(&s, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let c = pool.install(|| montecarlo::run(&s, &cfg).unwrap());
    let same_analytic = delay_stats(&diagonal(&s, 15.0, 30.0)) == delay_stats(&diagonal(&s, 15.0, 30.0));
    r.check(
        "C8.b",
        a == b && a == c && same_analytic,
        "repeated seeded runs bit-identical (Monte Carlo with 1 and 4 workers, analytic delay statistics)",
    );
}

fn main() {
    let mut r = Report::default();
    let strict = std::env::var("MMGEO_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    approximation_errors(&mut r);
    monte_carlo(&mut r);
    trends(&mut r);
    delay_sweeps(&mut r);
    identities(&mut r);
    geometry_and_determinism(&mut r);
    println!("acceptance: {} passed, {} failed", r.pass, r.fail);
    if strict && r.fail > 0 {
        std::process::exit(1);
    }
}
