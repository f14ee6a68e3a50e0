//! One function per subcommand.

use std::io::Write;
use std::path::{Path, PathBuf};

use bandwagon::asymptotics::Regime;
use bandwagon::distribution::REGULARITY_GRID;
use bandwagon::phase::{geometric_grid, CurveName, TraceOptions};
use bandwagon::simulate::{AgentPopulation, Start, TrajectoryPoint, DEFAULT_MAX_STEPS, DEFAULT_SWEEP_STEPS};
use bandwagon::{Distribution, Market};
use serde_json::{json, Value};

use crate::config::{Command, Format, Policy, RegimeArg, RunConfig, StartBranch};
use crate::error::{CliError, Result};
use crate::format::fmt_num;
use crate::io::{csv_string, ensure_dir, json_string, write_csv, write_text};

type Model = Market<Distribution>;

const DEFAULT_ETA_GRID: usize = 1001;
const DEFAULT_EPSILONS: usize = 13;

/// Runs the configured subcommand, writing reports to `w`.
pub fn run(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let m = Market::new(cfg.dist.clone())?;
    match &cfg.command {
        Command::Demand => demand(&m, cfg, w),
        Command::PhaseCustomer => phase(&m, cfg, w, &[CurveName::PL, CurveName::PU]),
        Command::PhaseSupply => phase(&m, cfg, w, &CurveName::ALL[2..]),
        Command::Optimize => optimize(&m, cfg, w),
        Command::Simulate(_) => simulate(&m, cfg, w),
        Command::CheckDist => check_dist(&m, w),
        Command::Asymptotics(_) => asymptotics(&m, cfg, w),
    }
}

fn emit(w: &mut dyn Write, text: &str) -> Result<()> {
    w.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&dir)?;
    Ok(dir)
}

fn report(w: &mut dyn Write, path: &Path) -> Result<()> {
    emit(w, &format!("{}\n", path.display()))
}

fn eta_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

fn demand(m: &Model, cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    if cfg.j.is_empty() {
        return Err(CliError::config("--j is required"));
    }
    let dir = out_dir(cfg)?;
    let etas = eta_grid(cfg.grid.unwrap_or(DEFAULT_ETA_GRID));
    let format = cfg.format_or(Format::Csv);
    for &j in &cfg.j {
        let points = m.demand_curve(j, &etas)?;
        let stem = format!("demand_j{}", fmt_num(j));
        let path = match format {
            Format::Csv => write_csv(
                &dir.join(format!("{stem}.csv")),
                &["eta", "p_hat", "stable", "branch"],
                points.iter().map(|p| {
                    vec![
                        fmt_num(p.eta),
                        fmt_num(p.p_hat),
                        p.stable.to_string(),
                        p.branch.as_str().into(),
                    ]
                }),
            )?,
            Format::Json => write_text(
                &dir.join(format!("{stem}.json")),
                &json_string(json!({ "j": j, "points": points }))?,
            )?,
        };
        report(w, &path)?;
    }
    Ok(())
}

fn critical_points_json(m: &Model) -> Result<Value> {
    let c = m.critical_points()?;
    let point = |p: bandwagon::phase::CriticalPoint, key: &str| {
        let mut o = serde_json::Map::new();
        o.insert("j".into(), json!(p.j));
        o.insert(key.into(), json!(p.value));
        o.insert("eta".into(), json!(p.eta));
        Value::Object(o)
    };
    Ok(json!({
        "distribution": m.distribution().name(),
        "A": point(c.a, "h"),
        "B_demand": point(c.b_demand, "p_hat"),
        "B_supply": point(c.b_supply, "h"),
        "C": point(c.c, "h"),
        "D": point(c.d, "h"),
    }))
}

fn phase(m: &Model, cfg: &RunConfig, w: &mut dyn Write, names: &[CurveName]) -> Result<()> {
    let dir = out_dir(cfg)?;
    let grid = match cfg.grid {
        None => m.default_j_grid(),
        Some(n) => geometric_grid(1.05 * m.apex().j_a, 10.0, n),
    };
    for &name in names {
        let curve = m.phase_curve(name, &grid, TraceOptions::default())?;
        let path = write_csv(
            &dir.join(format!("{}.csv", name.file_stem())),
            &["j", "value"],
            curve.samples.iter().map(|&(j, v)| vec![fmt_num(j), fmt_num(v)]),
        )?;
        report(w, &path)?;
    }
    let path = write_text(
        &dir.join("critical_points.json"),
        &json_string(critical_points_json(m)?)?,
    )?;
    report(w, &path)
}

fn optimize(m: &Model, cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let j = cfg.single_j()?;
    let h = cfg.require_h()?;
    let (text, file) = match cfg.format_or(Format::Json) {
        Format::Json => (
            json_string(serde_json::to_value(m.optimize(j, h)?)?)?,
            "optimize.json",
        ),
        Format::Csv => {
            let etas = eta_grid(cfg.grid.unwrap_or(DEFAULT_ETA_GRID));
            let curve = m.profit_curve(j, h, &etas)?;
            let text = csv_string(
                &["eta", "p_d", "p_s", "pi"],
                curve
                    .iter()
                    .map(|p| vec![fmt_num(p.eta), fmt_num(p.p_d), fmt_num(p.p_s), fmt_num(p.pi)]),
            )?;
            (text, "profit_curve.csv")
        }
    };
    emit(w, &text)?;
    if cfg.out.is_some() {
        write_text(&out_dir(cfg)?.join(file), &text)?;
    }
    Ok(())
}

fn trajectory_rows(points: &[TrajectoryPoint], t0: usize) -> impl Iterator<Item = Vec<String>> + '_ {
    points.iter().map(move |p| {
        vec![
            (p.t + t0).to_string(),
            fmt_num(p.price),
            fmt_num(p.eta),
            fmt_num(p.profit),
            p.branch.as_str().into(),
        ]
    })
}

const TRAJECTORY_HEADER: [&str; 5] = ["t", "p", "eta", "pi", "branch"];

fn simulate(m: &Model, cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let dir = out_dir(cfg)?;
    let (trajectory, outcome): (Vec<Vec<String>>, Value) = match cfg.policy {
        Policy::Sweep => {
            let j = cfg.single_j()?;
            let h = cfg.h.unwrap_or(0.0);
            let bounds = m.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
            let (lo, hi) = match (cfg.p_hat.as_deref(), bounds) {
                (Some([lo, hi]), _) => (*lo, *hi),
                (Some(_), _) => return Err(CliError::config("sweep needs --p-hat lo,hi")),
                (None, Some(b)) => (b.p_hat_l - 1.0, b.p_hat_u + 1.0),
                (None, None) => (-3.0, 3.0),
            };
            let steps = cfg.grid.unwrap_or(DEFAULT_SWEEP_STEPS);
            let (up, down) = m.hysteresis_loop(j, h, lo, hi, steps)?;
            let n_up = up.history().len();
            let rows = trajectory_rows(up.history(), 0)
                .chain(trajectory_rows(down.history(), n_up))
                .collect();
            let outcome = json!({
                "policy": "sweep",
                "distribution": m.distribution().name(),
                "j": j,
                "h": h,
                "p_hat_range": [lo, hi],
                "steps": steps,
                "band": bounds.map(|b| json!({ "p_hat_l": b.p_hat_l, "p_hat_u": b.p_hat_u, "eta_l": b.eta_l, "eta_u": b.eta_u })),
                "jumps_up": up.jumps(),
                "jumps_down": down.jumps().iter().map(|e| {
                    let mut v = serde_json::to_value(e).unwrap_or(Value::Null);
                    v["t"] = json!(e.t + n_up);
                    v
                }).collect::<Vec<_>>(),
            });
            (rows, outcome)
        }
        Policy::Introductory | Policy::Tatonnement | Policy::Minimax => {
            let j = cfg.single_j()?;
            let h = cfg.require_h()?;
            let mut o = match cfg.policy {
                Policy::Introductory => m.run_introductory(j, h)?,
                Policy::Tatonnement => {
                    let start = match cfg.start {
                        StartBranch::Low => Start::Low,
                        StartBranch::High => Start::High,
                    };
                    m.run_tatonnement(j, h, start, cfg.step)?
                }
                _ => m.run_minimax_regret(j, h)?,
            };
            let rows = trajectory_rows(&o.trajectory, 0).collect();
            o.trajectory.clear();
            let mut v = serde_json::to_value(&o)?;
            if let Value::Object(map) = &mut v {
                map.remove("trajectory");
                map.insert("distribution".into(), json!(m.distribution().name()));
            }
            (rows, v)
        }
        Policy::BestResponse => {
            let j = cfg.single_j()?;
            let h = cfg.h.unwrap_or(0.0);
            let p_hat = match cfg.p_hat.as_deref() {
                Some([p]) => *p,
                _ => return Err(CliError::config("best-response needs a single --p-hat")),
            };
            let pop = AgentPopulation::sample(m.distribution(), cfg.agents, cfg.seed);
            let eta0 = match cfg.start {
                StartBranch::Low => 0.0,
                StartBranch::High => 1.0,
            };
            let bounds = m.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
            let mut eta = eta0;
            let mut rows = Vec::new();
            let mut converged = false;
            for t in 0..10_000usize {
                let next = pop.best_response_step(j, p_hat, eta);
                converged = next == eta;
                eta = next;
                let price = h + p_hat;
                let branch = match bounds {
                    Some(b) if b.p_hat_l <= p_hat && p_hat <= b.p_hat_u => {
                        if eta >= b.eta_u {
                            "high"
                        } else if eta <= b.eta_l {
                            "low"
                        } else {
                            "gap"
                        }
                    }
                    _ => "unique",
                };
                rows.push(vec![
                    t.to_string(),
                    fmt_num(price),
                    fmt_num(eta),
                    fmt_num(price * eta),
                    branch.into(),
                ]);
                if converged {
                    break;
                }
            }
            let mf = m.mean_field_iterate(j, p_hat, eta0, DEFAULT_MAX_STEPS)?;
            let tol = 5.0 / (cfg.agents as f64).sqrt();
            let outcome = json!({
                "policy": "best_response",
                "distribution": m.distribution().name(),
                "j": j,
                "h": h,
                "p_hat": p_hat,
                "agents": cfg.agents,
                "seed": cfg.seed,
                "eta0": eta0,
                "eta": eta,
                "converged": converged,
                "rounds": rows.len(),
                "mean_field_eta": mf.eta,
                "abs_difference": (eta - mf.eta).abs(),
                "tolerance": tol,
                "within_tolerance": (eta - mf.eta).abs() <= tol,
            });
            (rows, outcome)
        }
    };
    let path = write_csv(&dir.join("trajectory.csv"), &TRAJECTORY_HEADER, trajectory)?;
    report(w, &path)?;
    let path = write_text(&dir.join("outcome.json"), &json_string(outcome)?)?;
    report(w, &path)
}

fn check_dist(m: &Model, w: &mut dyn Write) -> Result<()> {
    let (mean, var) = bandwagon::distribution::moments(m.distribution());
    let g = m.gamma();
    let report = g.check_supply_regularity(&g.regularity_grid(REGULARITY_GRID));
    let v = json!({
        "distribution": m.distribution().name(),
        "mean": mean,
        "variance": var,
        "critical": m.critical_scalars(),
        "p_hat_b": m.p_hat_b(),
        "apex": m.apex(),
        "regularity": { "regular": report.regular, "first_violation": report.first_violation, "points": report.points },
    });
    emit(w, &json_string(v)?)?;
    match report.first_violation {
        Some(x) if !report.regular => Err(CliError::Numeric(bandwagon::Error::Domain {
            what: "supply regularity f' (1 - F) + 2 f^2 > 0 fails at x",
            value: x,
        })),
        _ => Ok(()),
    }
}

fn asymptotics(m: &Model, cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let regime = match cfg.regime {
        RegimeArg::FixedJ => Regime::FixedJVaryH,
        RegimeArg::FixedH => Regime::FixedHVaryJ,
        RegimeArg::NullPrice => Regime::NullPriceLine { j: cfg.single_j()? },
    };
    let eps = geometric_grid(1e-6, 1e-3, cfg.grid.unwrap_or(DEFAULT_EPSILONS));
    let rows = m.convergence_table(regime, &eps)?;
    let (text, ext) = match cfg.format_or(Format::Csv) {
        Format::Csv => (
            csv_string(
                &["epsilon", "predicted", "exact", "abs_error"],
                rows.iter().map(|r| {
                    vec![
                        fmt_num(r.epsilon),
                        fmt_num(r.predicted),
                        fmt_num(r.exact),
                        fmt_num(r.abs_error),
                    ]
                }),
            )?,
            "csv",
        ),
        Format::Json => (json_string(json!({ "regime": regime, "rows": rows }))?, "json"),
    };
    emit(w, &text)?;
    if cfg.out.is_some() {
        write_text(
            &out_dir(cfg)?.join(format!("asymptotics_{}.{ext}", regime.as_str())),
            &text,
        )?;
    }
    Ok(())
}
