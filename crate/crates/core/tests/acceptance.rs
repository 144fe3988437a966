//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamelab::driver::{estimate_m, find_t0, fix_m, growth_sweep, GrowthSweep};
use tamelab::function::{seminorms, seminorms_on_grid};
use tamelab::maps::sample_at;
use tamelab::tameness::{check_tame_estimate, pnorm_eval};
use tamelab::{DomainTag, GridSpec, MapSpec, PNormSpec, ScalarPrimitive, SmoothFunction};

const P: DomainTag = DomainTag::Periodic1;
const I: DomainTag = DomainTag::UnitInterval;
const K: u32 = 3;
const L: u32 = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn m_list() -> Vec<u64> {
    (4..=12).map(|e| 1u64 << e).collect()
}

fn ex2_sin() -> MapSpec {
    MapSpec::ex2(ScalarPrimitive::sin_cycles(1), 1).unwrap()
}

fn ex4_exp() -> MapSpec {
    MapSpec::ex4(ScalarPrimitive::t_plus_exp()).unwrap()
}

/// Least-squares slope of `ln y` on `ln x`.
fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

struct Sweeps {
    ex2: GrowthSweep,
    ex2_seconds: f64,
    ex4: GrowthSweep,
}

fn run_sweeps() -> Sweeps {
    let rho = PNormSpec::default();
    let grid = GridSpec::default();
    let start = Instant::now();
    let ex2 = growth_sweep(&ex2_sin(), &SmoothFunction::zero(P), &rho, &rho, K, L, &m_list(), &grid).unwrap();
    let ex2_seconds = start.elapsed().as_secs_f64();
    let ex4 = growth_sweep(&ex4_exp(), &SmoothFunction::zero(I), &rho, &rho, K, L, &m_list(), &grid).unwrap();
    Sweeps {
        ex2,
        ex2_seconds,
        ex4,
    }
}

fn criterion_1(s: &Sweeps) -> Outcome {
    let pts: Vec<_> = s.ex2.records.iter().map(|r| (r.m as f64, r.top_deriv_s0)).collect();
    let slope = fit_slope(&pts);
    let last = s.ex2.records.last().unwrap();
    // ε0 (2πm)^{1/2} |φ'(t0)| with φ = sin(2π ·).
    let predicted = (2.0 * PI * last.m as f64).sqrt() / L as f64 * (2.0 * PI * (2.0 * PI * s.ex2.t0).cos()).abs();
    let ratio = last.top_deriv_s0 / predicted;
    outcome(
        (slope - 0.5).abs() <= 0.05 && (0.95..=1.05).contains(&ratio) && s.ex2_seconds < 30.0,
        format!("slope {slope:.5}, ratio at m=4096 {ratio:.7}, sweep {:.1} s", s.ex2_seconds),
    )
}

fn criterion_2(s: &Sweeps) -> Outcome {
    let pts: Vec<_> = s.ex4.records.iter().map(|r| (r.m as f64, r.top_deriv_s0)).collect();
    let slope = fit_slope(&pts);
    let last = s.ex4.records.last().unwrap();
    // φ'' = exp.
    let predicted = (2.0 * PI * last.m as f64).sqrt() / L as f64 * s.ex4.t0.exp();
    let ratio = last.top_deriv_s0 / predicted;
    outcome((slope - 0.5).abs() <= 0.05, format!("slope {slope:.7}, ratio at m=4096 {ratio:.7}"))
}

fn criterion_3(s: &Sweeps) -> Outcome {
    let flags: Vec<bool> = s
        .ex2
        .records
        .iter()
        .map(|r| r.rho1_z <= 1.0 && r.rho2_v > r.rho1_u)
        .collect();
    let Some(first) = flags.iter().position(|&f| f) else {
        return outcome(false, "no witness in the sweep");
    };
    let persists = flags[first..].iter().all(|&f| f);
    // The same probes through the estimate checker.
    let grid = GridSpec::default();
    let rho = PNormSpec::default();
    let u = SmoothFunction::constant(1.0 / L as f64, P);
    let probes: Vec<_> = s.ex2.records[first..]
        .iter()
        .map(|r| {
            let w = 2.0 * PI * r.m as f64;
            (SmoothFunction::sinusoid(w.powf(-(K as f64) + 0.5), r.m as f64, s.ex2.s0, P).unwrap(), u.clone())
        })
        .collect();
    let report = check_tame_estimate(&ex2_sin(), &SmoothFunction::zero(P), &rho, &rho, &probes, &grid).unwrap();
    let r = &s.ex2.records[first];
    outcome(
        persists && report.witnesses.len() == probes.len(),
        format!(
            "first witness at m={} (rho1(z) {:.4}, rho2(v) {:.4} > rho1(u) {:.4}), persists: {persists}, checker witnesses {}/{}",
            r.m,
            r.rho1_z,
            r.rho2_v,
            r.rho1_u,
            report.witnesses.len(),
            probes.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let grid = GridSpec::default();
    let rho = PNormSpec::default();
    let cases = [
        (
            MapSpec::ex2(ScalarPrimitive::constant(0.7), 1).unwrap(),
            SmoothFunction::sinusoid(0.05, 2.0, 0.1, P).unwrap(),
        ),
        (
            MapSpec::ex4(ScalarPrimitive::Affine { a: 2.0, b: 1.0 }).unwrap(),
            SmoothFunction::sinusoid(0.3, 1.5, 0.2, I).unwrap(),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut satisfied = true;
    for (map, x) in &cases {
        let d = map.domain();
        let u = SmoothFunction::constant(1.0 / L as f64, d);
        let probes: Vec<_> = m_list()
            .iter()
            .map(|&m| {
                let w = 2.0 * PI * m as f64;
                (SmoothFunction::sinusoid(w.powf(-(K as f64) + 0.5), m as f64, 0.5, d).unwrap(), u.clone())
            })
            .collect();
        for (z, u) in &probes {
            let v = map
                .gateaux(&x.add(z).unwrap(), u, &grid)
                .unwrap()
                .sub(&map.gateaux(x, u, &grid).unwrap())
                .unwrap();
            let pts = grid.points(&z.add(&v).unwrap());
            worst = worst.max(sample_at(&v, &pts).unwrap().sup_abs());
        }
        satisfied &= check_tame_estimate(map, x, &rho, &rho, &probes, &grid).unwrap().satisfied;
    }
    outcome(
        worst <= 1e-12 && satisfied,
        format!("max sup|v| {worst:e}, checker satisfied: {satisfied}"),
    )
}

fn criterion_5(s: &Sweeps) -> Outcome {
    let window: Vec<_> = s.ex2.records.iter().filter(|r| (64..=4096).contains(&r.m)).collect();
    let hi = window.iter().map(|r| r.tz_sup).fold(0.0, f64::max);
    let lo = window.iter().map(|r| r.tz_sup).fold(f64::INFINITY, f64::min);
    let at = |m: u64| window.iter().find(|r| r.m == m).unwrap().tz_sup;
    let growth = at(4096) / at(64);
    outcome(
        hi / lo <= 2.0,
        format!(
            "sup|T_z| {:.4} at m=64, {:.4} at m=4096: max/min {:.3}, growth factor {growth:.3} (no sqrt(m) growth: {})",
            at(64),
            at(4096),
            hi / lo,
            growth <= 2.0
        ),
    )
}

fn criterion_6() -> Outcome {
    let grid = GridSpec::default();
    let mut worst_analytic: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    for k in [3u32, 5, 7, 9] {
        for e in 0..=14 {
            let m = 1u64 << e;
            let w = 2.0 * PI * m as f64;
            let z = SmoothFunction::sinusoid(w.powf(-(k as f64) + 0.5), m as f64, 0.37, P).unwrap();
            let analytic = seminorms(&z, k as usize, &grid).unwrap();
            let sampled = seminorms_on_grid(&z, k as usize, &grid).unwrap();
            for i in 0..=k as usize {
                let expect = w.powf(i as f64 - k as f64 + 0.5);
                worst_analytic = worst_analytic.max((analytic[i] / expect - 1.0).abs());
                worst_grid = worst_grid.max((sampled[i] / expect - 1.0).abs());
            }
        }
    }
    outcome(
        worst_analytic <= 1e-9 && worst_grid <= 1e-3,
        format!("max relative error: analytic {worst_analytic:e}, grid {worst_grid:e}"),
    )
}

fn random_periodic(rng: &mut ChaCha8Rng, scale: f64) -> SmoothFunction {
    let parts: Vec<SmoothFunction> = (0..rng.gen_range(1..=3))
        .map(|_| {
            SmoothFunction::sinusoid(
                scale * rng.gen_range(-1.0..1.0),
                rng.gen_range(1..=4) as f64,
                rng.gen_range(0.0..1.0),
                P,
            )
            .unwrap()
        })
        .collect();
    let c = SmoothFunction::constant(scale * rng.gen_range(-1.0..1.0), P);
    let mut refs: Vec<&SmoothFunction> = parts.iter().collect();
    refs.push(&c);
    SmoothFunction::sum(&refs).unwrap()
}

fn random_interval(rng: &mut ChaCha8Rng, scale: f64) -> SmoothFunction {
    let a = SmoothFunction::affine(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0), I).unwrap();
    let b = SmoothFunction::sinusoid(scale * rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0), rng.gen_range(0.0..1.0), I)
        .unwrap();
    a.add(&b).unwrap()
}

fn criterion_7() -> Outcome {
    let grid = GridSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_dist: f64 = 0.0;
    let mut ratios = Vec::new();
    for variant in 0..2 {
        let map = if variant == 0 { ex2_sin() } else { ex4_exp() };
        for _ in 0..10 {
            let (x, u) = if variant == 0 {
                (random_periodic(&mut rng, 0.01), random_periodic(&mut rng, 0.05))
            } else {
                (random_interval(&mut rng, 0.3), random_interval(&mut rng, 0.3))
            };
            let exact = map.gateaux(&x, &u, &grid).unwrap();
            let err = |t: f64| {
                let fd = map.gateaux_fd(&x, &u, t, &grid).unwrap();
                fd.max_abs_diff(&sample_at(&exact, &fd.points).unwrap()).unwrap()
            };
            worst_dist = worst_dist.max(err(1e-4));
            ratios.push(err(1e-2) / err(1e-3));
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        worst_dist <= 1e-5 && lo >= 60.0 && hi <= 140.0,
        format!("20 samples: max sup distance at t=1e-4 {worst_dist:e}, error ratio in [{lo:.2}, {hi:.2}]"),
    )
}

fn criterion_8() -> Outcome {
    let grid = GridSpec::default();
    let rho = PNormSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut asym = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for j in 0..1000 {
        // Every other triple is clustered, where the bounded transform is tight.
        let spread = if j % 2 == 0 { 1.0 } else { 1e-3 };
        let x = random_periodic(&mut rng, 1.0);
        let y = x.add(&random_periodic(&mut rng, spread)).unwrap();
        let z = y.add(&random_periodic(&mut rng, spread)).unwrap();
        let d = |a: &SmoothFunction, b: &SmoothFunction| pnorm_eval(&rho, &a.sub(b).unwrap(), &grid).unwrap();
        let (dxy, dyx) = (d(&x, &y), d(&y, &x));
        if dxy != dyx {
            asym += 1;
        }
        worst_excess = worst_excess.max(d(&x, &z) - dxy - d(&y, &z));
    }
    let zero = pnorm_eval(&rho, &SmoothFunction::zero(P), &grid).unwrap();
    outcome(
        asym == 0 && worst_excess <= 1e-12 && zero == 0.0,
        format!("1000 pairs: asymmetric {asym}, max triangle excess {worst_excess:e}, rho(0) = {zero}"),
    )
}

fn criterion_9() -> Outcome {
    let grid = GridSpec::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, map, x) in [
        ("ex2", ex2_sin(), SmoothFunction::zero(P)),
        ("ex4", ex4_exp(), SmoothFunction::zero(I)),
    ] {
        let m_est = estimate_m(&map, &x, K, L, &grid).unwrap();
        let t0 = find_t0(&map, &x, &grid).unwrap();
        let (k, l) = (K as f64, L as f64);
        let ok = match name {
            "ex2" => {
                let lead = (2.0 * PI * (2.0 * PI * t0).cos()).abs();
                let m = fix_m(&map, K, L, m_est, lead).unwrap();
                let w = 2.0 * PI * m as f64;
                let ok = w.powf(-0.5) <= 1.0 / k && l + m_est < w.sqrt() * lead;
                lines.push(format!("ex2 M={m_est:.3} m={m} ok={ok}"));
                ok
            }
            _ => {
                let lead = t0.exp();
                let m = fix_m(&map, K, L, m_est, lead).unwrap();
                let bound = (k * k).max(((l + m_est) / lead).powi(2)) / (2.0 * PI);
                let ok = m as f64 > bound;
                lines.push(format!("ex4 M={m_est:.3} m={m} ok={ok}"));
                ok
            }
        };
        pass &= ok;
    }
    outcome(pass, lines.join(", "))
}

fn main() {
    let total = Instant::now();
    let sweeps = run_sweeps();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "ex2 blow-up rate", criterion_1(&sweeps)),
        (2, "ex4 blow-up rate", criterion_2(&sweeps)),
        (3, "estimate violated, persistently", criterion_3(&sweeps)),
        (4, "degenerate outer functions", criterion_4()),
        (5, "residual bounded within factor 2", criterion_5(&sweeps)),
        (6, "closed-form seminorms", criterion_6()),
        (7, "gateaux vs central differences", criterion_7()),
        (8, "P-norm metric axioms", criterion_8()),
        (9, "fix_m certificates", criterion_9()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        results.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
