//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bandwagon::asymptotics::{log_log_slope, Regime};
use bandwagon::phase::{geometric_grid, CurveName, TraceOptions};
use bandwagon::simulate::{AgentPopulation, Verdict};
use bandwagon::supply::SupplyKind;
use bandwagon::{Error, Gaussian, Logistic, Market};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const BETA: f64 = PI / 1.7320508075688772;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure(
        (got - want).abs() <= tol,
        format!("{name} = {got}, expected {want} +- {tol}"),
    )
}

fn in_time(t: Instant, limit: Duration) -> Result<(), String> {
    let e = t.elapsed();
    ensure(e <= limit, format!("took {e:?}, limit {limit:?}"))
}

fn logistic() -> Market<Logistic> {
    Market::new(Logistic).expect("logistic market")
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

// Closed-form logistic demand, independent of the crate.
fn d_closed(j: f64, eta: f64) -> f64 {
    j * eta - (eta / (1.0 - eta)).ln() / BETA
}

fn d_closed_prime(j: f64, eta: f64) -> f64 {
    j - 1.0 / (BETA * eta * (1.0 - eta))
}

fn boundaries_closed(j: f64) -> (f64, f64, f64, f64) {
    let r = (1.0 - 4.0 / (BETA * j)).sqrt();
    let (eta_l, eta_u) = (0.5 * (1.0 - r), 0.5 * (1.0 + r));
    (eta_l, eta_u, d_closed(j, eta_l), d_closed(j, eta_u))
}

fn critical_points() -> Check {
    let t = Instant::now();
    let m = logistic();
    let cp = m.critical_points().map_err(|e| e.to_string())?;
    within("j_A exact", cp.a.j, 27.0 * 3f64.sqrt() / (8.0 * PI), 1e-8)?;
    within("j_B exact", cp.b_supply.j, 4.0 * 3f64.sqrt() / PI, 1e-8)?;
    within("j_A", cp.a.j, 1.86, 0.005)?;
    within("h_A", cp.a.value, -0.80, 0.01)?;
    within("j_B", cp.b_supply.j, 2.21, 0.01)?;
    within("h_B", cp.b_supply.value, -1.10, 0.01)?;
    within("j_C", cp.c.j, 2.61, 0.01)?;
    within("h_C", cp.c.value, -1.09, 0.01)?;
    within("j_D", cp.d.j, 3.27, 0.01)?;
    within("h_D", cp.d.value, -1.42, 0.01)?;
    in_time(t, Duration::from_secs(5))?;
    Ok(format!(
        "A=({:.4},{:.4}) B=({:.4},{:.4}) C=({:.4},{:.4}) D=({:.4},{:.4}) in {:?}",
        cp.a.j,
        cp.a.value,
        cp.b_supply.j,
        cp.b_supply.value,
        cp.c.j,
        cp.c.value,
        cp.d.j,
        cp.d.value,
        t.elapsed()
    ))
}

fn first_order_transition() -> Check {
    let t = Instant::now();
    let m = logistic();
    let hch = m.first_order_line(2.5).map_err(|e| e.to_string())?;
    within("h_ch(2.5)", hch, -1.247, 0.005)?;
    let low = m.optimize(2.5, -1.27).map_err(|e| e.to_string())?.global.kind;
    let high = m.optimize(2.5, -1.23).map_err(|e| e.to_string())?.global.kind;
    ensure(low == SupplyKind::InteriorLow, format!("(2.5, -1.27) -> {low:?}"))?;
    ensure(
        high == SupplyKind::InteriorHigh,
        format!("(2.5, -1.23) -> {high:?}"),
    )?;
    in_time(t, Duration::from_secs(1))?;
    Ok(format!(
        "h_ch(2.5) = {hch:.6}, low at -1.27, high at -1.23 in {:?}",
        t.elapsed()
    ))
}

fn scenario_matrix() -> Check {
    let t = Instant::now();
    let m = logistic();
    let j = 3.5;
    within(
        "h_ch(3.5)",
        m.first_order_line(j).map_err(|e| e.to_string())?,
        -2.0,
        0.05,
    )?;
    let (_, eta_u, p_l, _) = boundaries_closed(j);

    let a = m.run_introductory(j, -1.2).map_err(|e| e.to_string())?;
    ensure(
        a.verdict == Verdict::Success,
        format!("h = -1.2: {:?}", a.verdict),
    )?;
    ensure(-1.2 + p_l > 0.0, "h = -1.2: introductory price not viable")?;
    ensure(
        a.final_eta >= eta_u,
        format!("h = -1.2: ended at eta {}", a.final_eta),
    )?;

    let opt = m.optimize(j, -1.4).map_err(|e| e.to_string())?;
    let both = [SupplyKind::InteriorLow, SupplyKind::InteriorHigh]
        .iter()
        .all(|k| {
            opt.candidates
                .iter()
                .any(|c| c.kind == *k && c.in_multivalued_demand && c.viable)
        });
    ensure(both, "h = -1.4: low and high optima not both inside the band")?;
    ensure(-1.4 + p_l > 0.0, "h = -1.4: introductory price not viable")?;
    let b = m.run_introductory(j, -1.4).map_err(|e| e.to_string())?;
    ensure(
        b.verdict == Verdict::Success,
        format!("h = -1.4: {:?}", b.verdict),
    )?;

    let c = m.run_introductory(j, -1.5).map_err(|e| e.to_string())?;
    ensure(
        matches!(c.verdict, Verdict::Infeasible { .. }),
        format!("h = -1.5: {:?}", c.verdict),
    )?;
    ensure(
        -1.5 + p_l <= 0.0,
        "h = -1.5: introductory price unexpectedly viable",
    )?;
    in_time(t, Duration::from_secs(1))?;
    Ok(format!(
        "-1.2 success, -1.4 both in band and success, -1.5 infeasible in {:?}",
        t.elapsed()
    ))
}

fn hysteresis() -> Check {
    let t = Instant::now();
    let m = logistic();
    let (lo, hi, steps) = (1.0, 4.0, 2000);
    let step = (hi - lo) / steps as f64;
    ensure(step <= 2e-3, "sweep step too coarse")?;
    let (_, _, p_l, p_u) = boundaries_closed(5.0);
    let (up, down) = m
        .hysteresis_loop(5.0, 0.0, lo, hi, steps)
        .map_err(|e| e.to_string())?;
    ensure(
        up.jumps().len() == 1 && down.jumps().len() == 1,
        "expected one jump per direction",
    )?;
    let (ju, jd) = (up.jumps()[0].p_hat, down.jumps()[0].p_hat);
    within("up jump", ju, p_u, step)?;
    within("down jump", jd, p_l, step)?;
    ensure(ju > p_u && jd < p_l, "jumps must occur past the stability limits")?;
    in_time(t, Duration::from_secs(1))?;
    Ok(format!(
        "up {ju:.5} vs {p_u:.5}, down {jd:.5} vs {p_l:.5}, step {step} in {:?}",
        t.elapsed()
    ))
}

fn asymptotic_orders() -> Check {
    let t = Instant::now();
    let m = logistic();
    let eps = geometric_grid(1e-6, 1e-3, 13);
    let mut slopes = Vec::new();
    for regime in [Regime::FixedJVaryH, Regime::FixedHVaryJ] {
        let pts = eps
            .iter()
            .map(|&e| Ok((e, m.expansion_exact(regime, e)?.1 - m.eta_b())))
            .collect::<Result<Vec<_>, Error>>()
            .map_err(|e| e.to_string())?;
        let s = log_log_slope(&pts);
        within(regime.as_str(), s, 0.5, 0.02)?;
        slopes.push(s);
    }
    let rows = m
        .convergence_table(Regime::NullPriceLine { j: 5.0 }, &eps)
        .map_err(|e| e.to_string())?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, r.abs_error)).collect();
    let null = log_log_slope(&pts);
    within("null-price error order", null, 2.0, 0.1)?;
    let j_a = m.apex().j_a;
    let pts = geometric_grid(1e-5, 1e-2, 10)
        .into_iter()
        .map(|d| {
            let (hp, hm) = m.coexistence_point(j_a + d).ok_or("no coexistence")?;
            Ok((d, hm - hp))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let width = log_log_slope(&pts);
    within("width exponent", width, 1.5, 0.05)?;
    in_time(t, Duration::from_secs(10))?;
    Ok(format!(
        "slopes {:.4} {:.4}, null-price {null:.4}, width {width:.4} in {:?}",
        slopes[0],
        slopes[1],
        t.elapsed()
    ))
}

// Brute-force maximum of (h + D) eta over stable demand on a logit grid.
fn oracle_profit(j: f64, h: f64) -> f64 {
    const N: usize = 100_000;
    let mut best = f64::NEG_INFINITY;
    for k in 0..N {
        let x = -30.0 + 60.0 * k as f64 / (N - 1) as f64;
        let eta = 1.0 / (1.0 + (-x).exp());
        if !(eta > 0.0 && eta < 1.0) || d_closed_prime(j, eta) > 0.0 {
            continue;
        }
        best = best.max((h + d_closed(j, eta)) * eta);
    }
    best
}

// Roots of eta = S(p_hat - j eta) by sign scan and bisection.
fn oracle_roots(j: f64, p_hat: f64) -> Vec<f64> {
    const N: usize = 20_000;
    let f = |eta: f64| eta - 1.0 / (1.0 + (BETA * (p_hat - j * eta)).exp());
    let grid: Vec<f64> = (0..N)
        .map(|k| 1.0 / (1.0 + (-(-35.0 + 70.0 * k as f64 / (N - 1) as f64)).exp()))
        .collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        if f(a).signum() == f(b).signum() {
            continue;
        }
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if f(c).signum() == f(a).signum() {
                a = c;
            } else {
                b = c;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn oracle_equivalence() -> Check {
    let t = Instant::now();
    let m = logistic();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut compared, mut skipped, mut worst) = (0, 0, 0.0f64);
    for _ in 0..500 {
        let j = uniform(&mut rng, 0.5, 8.0);
        let h = uniform(&mut rng, -4.0, 2.0);
        let oracle = oracle_profit(j, h);
        match m.optimize(j, h) {
            Ok(opt) => {
                ensure(
                    oracle > 0.0,
                    format!("({j}, {h}): optimum found but oracle max {oracle}"),
                )?;
                let rel = (opt.global.profit - oracle).abs() / oracle.abs();
                ensure(
                    rel <= 1e-6,
                    format!("({j}, {h}): profit {} vs oracle {oracle}", opt.global.profit),
                )?;
                worst = worst.max(rel);
                compared += 1;
            }
            Err(Error::NoViableStrategy) => {
                ensure(
                    oracle <= 1e-12,
                    format!("({j}, {h}): no strategy but oracle max {oracle}"),
                )?;
                skipped += 1;
            }
            Err(e) => return Err(format!("({j}, {h}): {e}")),
        }
    }
    let mut root_worst = 0.0f64;
    for _ in 0..1000 {
        let j = uniform(&mut rng, 0.0, 8.0);
        let p_hat = uniform(&mut rng, 0.5 * j - 3.0, 0.5 * j + 3.0);
        let got: Vec<f64> = m
            .demand_equilibria(j, p_hat)
            .map_err(|e| e.to_string())?
            .roots
            .iter()
            .map(|r| r.eta)
            .collect();
        let want = oracle_roots(j, p_hat);
        ensure(
            got.len() == want.len(),
            format!("({j}, {p_hat}): {got:?} vs {want:?}"),
        )?;
        for (g, w) in got.iter().zip(&want) {
            root_worst = root_worst.max((g - w).abs());
        }
    }
    ensure(root_worst <= 1e-9, format!("demand root error {root_worst}"))?;
    in_time(t, Duration::from_secs(60))?;
    Ok(format!(
        "{compared} optima (worst rel {worst:.1e}), {skipped} without viable strategy, 1000 demand roots (worst {root_worst:.1e}) in {:?}",
        t.elapsed()
    ))
}

fn second_differences(samples: &[(f64, f64)]) -> impl Iterator<Item = f64> + '_ {
    samples.windows(3).map(|w| {
        let s0 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s1 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        (s1 - s0) / (w[2].0 - w[0].0)
    })
}

fn structural_invariants() -> Check {
    let m = logistic();
    let grid = m.default_j_grid();
    let opts = TraceOptions::default();
    let curve = |name| m.phase_curve(name, &grid, opts).map_err(|e: Error| e.to_string());

    let mut checked = 0;
    for &j in grid.iter().step_by(8) {
        for k in 0..=80 {
            let h = -6.0 + 8.0 * k as f64 / 80.0;
            match m.optimize(j, h) {
                Ok(o) => {
                    ensure(
                        o.global.kind != SupplyKind::BoundaryL,
                        format!("BoundaryL global at ({j}, {h})"),
                    )?;
                    checked += 1;
                }
                Err(Error::NoViableStrategy) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }

    for &j in grid.iter().filter(|&&j| j > m.j_b() + 1e-3).step_by(10) {
        let b = m.branch_boundaries(j).ok_or("no band")?;
        for k in 1..20 {
            let p_hat = b.p_hat_l + (b.p_hat_u - b.p_hat_l) * k as f64 / 20.0;
            let eq = m.demand_equilibria(j, p_hat).map_err(|e| e.to_string())?;
            let (lo, hi) = (eq.lowest_stable(), eq.highest_stable());
            for h in [-p_hat + 0.1, 0.0, 1.0] {
                let price = h + p_hat;
                if price > 0.0 {
                    ensure(
                        price * lo < price * hi,
                        format!("low profit not below high at ({j}, {p_hat})"),
                    )?;
                }
            }
        }
    }

    let hch = curve(CurveName::HCh)?;
    let j_c = m.critical_points().map_err(|e| e.to_string())?.c.j;
    for &(j, v) in hch.samples.iter().filter(|s| s.0 > j_c + 1e-6) {
        let hm = m.risk_points(j).ok_or("no risk points")?.h_small_m;
        ensure(v < hm, format!("h_ch {v} >= h_m {hm} at j = {j}"))?;
    }

    let pl = curve(CurveName::PL)?;
    let pu = curve(CurveName::PU)?;
    ensure(
        second_differences(&pl.samples).all(|d| d <= 1e-9),
        "p_hat_L not concave",
    )?;
    ensure(
        second_differences(&pu.samples).all(|d| d >= -1e-9),
        "p_hat_U not convex",
    )?;

    for (name, report) in [
        (
            "logistic",
            m.gamma()
                .check_supply_regularity(&m.gamma().regularity_grid(4096)),
        ),
        ("gaussian", {
            let g = Market::new(Gaussian).map_err(|e| e.to_string())?;
            g.gamma()
                .check_supply_regularity(&g.gamma().regularity_grid(4096))
        }),
    ] {
        ensure(
            report.regular,
            format!("{name} regularity fails at {:?}", report.first_violation),
        )?;
    }
    Ok(format!(
        "{checked} optima, {} h_ch samples, {} + {} customer samples, both laws regular",
        hch.samples.len(),
        pl.samples.len(),
        pu.samples.len()
    ))
}

fn finite_population() -> Check {
    let t = Instant::now();
    let m = logistic();
    const N: usize = 10_000;
    let tol = 5.0 / (N as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for setting in 0..100u64 {
        let (j, p_hat) = if setting < 80 {
            let j = uniform(&mut rng, 3.0, 8.0);
            let (_, _, p_l, p_u) = boundaries_closed(j);
            let w = p_u - p_l;
            (j, uniform(&mut rng, p_l + 0.1 * w, p_u - 0.1 * w))
        } else {
            let j = uniform(&mut rng, 0.5, 2.0);
            (j, uniform(&mut rng, -1.0, 1.0 + j))
        };
        let pop = AgentPopulation::sample(&Logistic, N, 1000 + setting);
        for eta0 in [0.0, 1.0] {
            let mf = m
                .mean_field_iterate(j, p_hat, eta0, 1_000_000)
                .map_err(|e| e.to_string())?;
            let fin = pop.settle(j, p_hat, eta0, 100_000);
            ensure(
                mf.converged && fin.converged,
                format!("({j}, {p_hat}) from {eta0} did not settle"),
            )?;
            let d = (fin.eta - mf.eta).abs();
            ensure(
                d <= tol,
                format!("({j}, {p_hat}) from {eta0}: |{} - {}| > {tol}", fin.eta, mf.eta),
            )?;
            worst = worst.max(d);
        }
    }
    in_time(t, Duration::from_secs(30))?;
    Ok(format!(
        "200 runs, worst deviation {worst:.4} <= {tol} in {:?}",
        t.elapsed()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 critical points", critical_points),
        ("2 first-order transition", first_order_transition),
        ("3 scenario matrix at j = 3.5", scenario_matrix),
        ("4 hysteresis at j = 5", hysteresis),
        ("5 asymptotic orders", asymptotic_orders),
        ("6 oracle equivalence", oracle_equivalence),
        ("7 structural invariants", structural_invariants),
        ("8 finite-N consistency", finite_population),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
