//! Experiment runner behind the command-line front end: loads one JSON
//! config, executes its command, writes `<prefix>.rows.csv` and
//! `<prefix>.summary.json`, and maps failures to exit codes (2 for config
//! validation, 3 when the degeneracy budget is exhausted, 1 when a verify
//! command concludes a violation).

use rand::Rng;
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::constants::{
    self, beta_bar, beta_stability, c_inradius, c_voronoi, h_m, schlafli_count, StabilityKind,
    StabilityParams, Verdict,
};
use crate::convex::{cell_area_perimeter_s2, cell_u1_exact_s2, vertices, PolytopeJson};
use crate::error::{Result, SphError};
use crate::estimators::{
    check_cell_count, check_typical_identity, check_voronoi_tail, check_zero_cell_lower_bound,
    estimate_conditional_deviation, estimate_rate, sample_crofton_realization, TypicalFunctional,
};
use crate::functionals::{self, DeviationOpts};
use crate::mc;
use crate::processes::{sample_poisson, tessellation_cells, voronoi_typical_cell};
use crate::report::{fmt_f64, to_json_string, write_csv};
use crate::sphere::{sample_uniform, UnitVec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERACY: i32 = 3;

#[derive(Serialize)]
struct Summary<'a> {
    command: String,
    version: &'static str,
    seed: u64,
    pass: bool,
    runtime_seconds: f64,
    csv_sha256: String,
    config: &'a ExperimentConfig,
    results: serde_json::Value,
}

struct CommandOutput {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    results: serde_json::Value,
    pass: bool,
}

/// Run the config at `path`; returns the process exit code.
pub fn run_path(path: &Path) -> i32 {
    let cfg = match crate::config::load(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(&cfg) {
        Ok((pass, summary_path)) => {
            if pass {
                EXIT_OK
            } else {
                eprintln!("verification failed; see {}", summary_path.display());
                EXIT_VERIFY_FAILED
            }
        }
        Err(SphError::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(SphError::Degenerate(msg)) => {
            eprintln!("degeneracy budget exceeded: {msg}");
            EXIT_DEGENERACY
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VERIFY_FAILED
        }
    }
}

/// Execute one experiment config and write its artifacts. Returns the pass
/// flag and the summary path.
pub fn run(cfg: &ExperimentConfig) -> Result<(bool, PathBuf)> {
    let start = std::time::Instant::now();
    let prefix = cfg.output_prefix()?.to_string();
    let out = dispatch(cfg)?;
    let csv_path = PathBuf::from(format!("{prefix}.rows.csv"));
    let summary_path = PathBuf::from(format!("{prefix}.summary.json"));
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let hash = write_csv(&csv_path, &out.header, &out.rows)?;
    let summary = Summary {
        command: cfg.command.clone(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed_value(),
        pass: out.pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
        csv_sha256: hash,
        config: cfg,
        results: out.results,
    };
    std::fs::write(&summary_path, to_json_string(&summary)?)?;
    println!(
        "{}: seed {} version {} pass {} -> {}",
        cfg.command,
        cfg.seed_value(),
        env!("CARGO_PKG_VERSION"),
        out.pass,
        summary_path.display()
    );
    Ok((out.pass, summary_path))
}

fn dispatch(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    match cfg.command.as_str() {
        "simulate-crofton" => simulate_crofton(cfg),
        "simulate-voronoi-typical" => simulate_voronoi_typical(cfg),
        "tessellate" => tessellate(cfg),
        "verify-urysohn" => verify_urysohn_cmd(cfg),
        "verify-stability" => verify_stability_cmd(cfg),
        "check-cell-count" => check_cell_count_cmd(cfg),
        "check-typical-identity" => check_typical_identity_cmd(cfg),
        "check-voronoi-tail" => check_voronoi_tail_cmd(cfg),
        "check-lower-bound" => check_lower_bound_cmd(cfg),
        "estimate-rate" => estimate_rate_cmd(cfg),
        "estimate-conditional" => estimate_conditional_cmd(cfg),
        "constants" => constants_cmd(cfg),
        other => Err(SphError::Config(format!("command: unknown value `{other}`"))),
    }
}

fn write_cells_json(prefix: &str, value: &serde_json::Value) -> Result<()> {
    let path = PathBuf::from(format!("{prefix}.cells.json"));
    std::fs::write(&path, to_json_string(value)?)?;
    Ok(())
}

fn simulate_crofton(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let gamma = cfg.gamma()?;
    let n = cfg.count()?;
    let seed = cfg.seed_value();
    let mc_params = cfg.mc_params();

    struct Row {
        points: usize,
        volume: f64,
        u1: f64,
        inradius: f64,
        theta: f64,
        json: Option<serde_json::Value>,
    }
    let rows_data: Vec<Result<Row>> = mc::replicate(seed, n, |i, rng| {
        let cell = sample_crofton_realization(gamma, d, rng)?;
        let (volume, u1) = if d == 2 {
            let (area, _) = cell_area_perimeter_s2(&cell)?;
            (area, cell_u1_exact_s2(&cell)?)
        } else {
            let vol = functionals::volume(&cell, mc_params.volume_samples, rng.gen());
            let scan = vertices(&cell)?.polytope;
            let u1 = if scan.is_empty() {
                0.5
            } else {
                functionals::u1(&scan, mc_params.u1_samples, rng.gen())?.value
            };
            (vol.value, u1)
        };
        let (r, _) = functionals::inradius_free(&cell)?;
        let theta = functionals::theta_r(&cell)?;
        let json = if i < 10 {
            Some(json!({
                "cell": PolytopeJson::from_h(&cell),
            }))
        } else {
            None
        };
        Ok(Row { points: cell.normals().len(), volume, u1, inradius: r, theta, json })
    });

    let mut rows = Vec::with_capacity(rows_data.len());
    let mut cells_json = Vec::new();
    let mut mean_vol = 0.0;
    for (i, r) in rows_data.into_iter().enumerate() {
        let r = r?;
        mean_vol += r.volume;
        if let Some(j) = r.json {
            cells_json.push(j);
        }
        rows.push(vec![
            i.to_string(),
            r.points.to_string(),
            fmt_f64(r.volume),
            fmt_f64(r.u1),
            fmt_f64(r.inradius),
            fmt_f64(r.theta),
        ]);
    }
    mean_vol /= n as f64;
    write_cells_json(cfg.output_prefix()?, &json!({ "realizations": cells_json }))?;
    Ok(CommandOutput {
        header: vec!["rep", "hyperplanes", "volume", "u1", "inradius", "theta_r"],
        rows,
        results: json!({ "mean_volume": mean_vol, "n": n }),
        pass: true,
    })
}

fn simulate_voronoi_typical(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let gamma = cfg.gamma()?;
    let n = cfg.count()?;
    let seed = cfg.seed_value();
    let o = UnitVec::origin(d);

    type VoronoiRow = (usize, f64, f64, bool, Option<serde_json::Value>);
    let rows_data: Vec<Result<VoronoiRow>> = mc::replicate(seed, n, |i, rng| {
            let pts = sample_poisson(gamma, d, rng)?;
            let cell = voronoi_typical_cell(&pts, d)?;
            let twin = crate::processes::bisector_crofton_cell(&pts, d)?;
            let matched = cell.normals().len() == twin.normals().len()
                && cell
                    .normals()
                    .iter()
                    .zip(twin.normals())
                    .all(|(a, b)| a.chord_distance(b) <= 1e-10);
            let r = functionals::centred_inradius(&cell, &o)?;
            let scan = vertices(&cell)?.polytope;
            let big_r = if scan.is_empty() {
                std::f64::consts::FRAC_PI_2
            } else {
                functionals::centred_circumradius(&scan, &o)?
            };
            let json = if i < 10 {
                Some(json!({
                    "generators": pts.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
                    "cell": PolytopeJson::from_h(&cell),
                }))
            } else {
                None
            };
            Ok((pts.len(), r, big_r, matched, json))
        });

    let mut rows = Vec::with_capacity(rows_data.len());
    let mut cells_json = Vec::new();
    let mut mismatches = 0u64;
    for (i, r) in rows_data.into_iter().enumerate() {
        let (pts, rin, rout, matched, json) = r?;
        if !matched {
            mismatches += 1;
        }
        if let Some(j) = json {
            cells_json.push(j);
        }
        rows.push(vec![
            i.to_string(),
            pts.to_string(),
            fmt_f64(rin),
            fmt_f64(rout),
            fmt_f64((rout - rin).max(0.0)),
            matched.to_string(),
        ]);
    }
    write_cells_json(cfg.output_prefix()?, &json!({ "realizations": cells_json }))?;
    Ok(CommandOutput {
        header: vec!["rep", "points", "r_o", "R_o", "theta_o", "bisector_match"],
        rows,
        results: json!({ "n": n, "bisector_mismatches": mismatches }),
        pass: mismatches == 0,
    })
}

fn tessellate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    if d != 2 {
        return Err(SphError::Config("d: tessellate requires d = 2".into()));
    }
    let seed = cfg.seed_value();
    let mut rng = mc::rng_for(seed, 0);
    let normals: Vec<UnitVec> = match (cfg.k, cfg.gamma_s) {
        (Some(k), None) => (0..k).map(|_| sample_uniform(&mut rng, 2)).collect(),
        (None, Some(_)) => sample_poisson(cfg.gamma()?, 2, &mut rng)?,
        _ => {
            return Err(SphError::Config(
                "tessellate needs exactly one of `k` or `gamma_s`".into(),
            ))
        }
    };
    let tess = tessellation_cells(&normals, mc::derive_seed(seed, 1))?;
    let target = schlafli_count(2, normals.len());
    let mut rows = Vec::with_capacity(tess.cells.len());
    let mut total_area = 0.0;
    let mut cells_json = Vec::new();
    for (i, cell) in tess.cells.iter().enumerate() {
        let (area, perim) = cell_area_perimeter_s2(cell)?;
        let u1 = cell_u1_exact_s2(cell)?;
        let nverts = vertices(cell)?.polytope.vertices().len();
        total_area += area;
        cells_json.push(serde_json::to_value(PolytopeJson::from_h(cell))?);
        rows.push(vec![
            i.to_string(),
            nverts.to_string(),
            fmt_f64(area),
            fmt_f64(perim),
            fmt_f64(u1),
        ]);
    }
    let defect = (total_area - crate::sphere::omega(3)).abs();
    write_cells_json(
        cfg.output_prefix()?,
        &json!({
            "generators": normals.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>(),
            "cells": cells_json,
        }),
    )?;
    Ok(CommandOutput {
        header: vec!["cell", "vertices", "area", "perimeter", "u1"],
        rows,
        results: json!({
            "circles": normals.len(),
            "cells": tess.cells.len(),
            "schlafli": target,
            "partition_defect": defect,
        }),
        pass: tess.cells.len() as u64 == target && defect < 1e-8,
    })
}

fn verify_urysohn_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let gamma = cfg.gamma()?;
    let bodies = cfg.body_count()?;
    let n = cfg.mc_params().u1_samples;
    let seed = cfg.seed_value();
    let reports: Vec<Result<constants::StabilityReport>> =
        mc::replicate(seed, bodies, |i, rng| {
            let cell = sample_crofton_realization(gamma, d, rng)?;
            constants::verify_urysohn(&format!("body-{i}"), &cell, n, rng.gen())
        });
    let mut rows = Vec::new();
    let mut counts = [0u64; 4];
    for r in reports {
        let r = r?;
        counts[match r.verdict {
            Verdict::Holds => 0,
            Verdict::HoldsWithinError => 1,
            Verdict::InconclusiveUpperBoundDeviation => 2,
            Verdict::Violated => 3,
        }] += 1;
        rows.push(r.csv_row());
    }
    Ok(CommandOutput {
        header: constants::StabilityReport::csv_header(),
        rows,
        results: json!({
            "bodies": bodies,
            "holds": counts[0],
            "holds_within_error": counts[1],
            "inconclusive": counts[2],
            "violated": counts[3],
        }),
        pass: counts[3] == 0,
    })
}

fn parse_stability_kind(cfg: &ExperimentConfig) -> Result<StabilityKind> {
    match cfg
        .kind
        .as_deref()
        .ok_or_else(|| SphError::Config("kind: missing".into()))?
    {
        "volume-delta2" => Ok(StabilityKind::VolumeDelta2),
        "inradius-theta-r" => Ok(StabilityKind::InradiusThetaR),
        "voronoi-theta-o" => Ok(StabilityKind::VoronoiThetaO),
        other => Err(SphError::Config(format!("kind: unknown value `{other}`"))),
    }
}

fn verify_stability_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let kind = parse_stability_kind(cfg)?;
    let gamma = cfg.gamma()?;
    let bodies = cfg.body_count()?;
    let a = cfg.threshold()?;
    let seed = cfg.seed_value();
    let mc_params = cfg.mc_params();
    let opts = DeviationOpts { grid: mc_params.delta2_grid, ..DeviationOpts::default() };

    // oversample; keep the first `bodies` reports in replication order
    let budget = 50 * bodies;
    let attempts: Vec<Result<Option<constants::StabilityReport>>> =
        mc::replicate(seed, budget, |i, rng| {
            let cell = match kind {
                StabilityKind::VoronoiThetaO => {
                    let pts = sample_poisson(gamma, d, rng)?;
                    voronoi_typical_cell(&pts, d)?
                }
                _ => sample_crofton_realization(gamma, d, rng)?,
            };
            // per-body epsilon: the achieved deviation clamped to the
            // theorem domain [0, 1], unless the config pins one
            let eps = match cfg.epsilon {
                Some(e) => e,
                None => match kind {
                    StabilityKind::VolumeDelta2 => 0.0,
                    StabilityKind::InradiusThetaR => match functionals::theta_r(&cell) {
                        Ok(t) => t.clamp(0.0, 1.0),
                        Err(_) => return Ok(None),
                    },
                    StabilityKind::VoronoiThetaO => {
                        let o = UnitVec::origin(d);
                        let r = match functionals::centred_inradius(&cell, &o) {
                            Ok(r) => r,
                            Err(_) => return Ok(None),
                        };
                        let scan = vertices(&cell)?.polytope;
                        if scan.is_empty() {
                            return Ok(None);
                        }
                        let big_r = functionals::centred_circumradius(&scan, &o)?;
                        (big_r - r).clamp(0.0, 1.0)
                    }
                },
            };
            let params = StabilityParams {
                a,
                epsilon: eps,
                n: mc_params.u1_samples,
                seed: rng.gen(),
                deviation_opts: opts.clone(),
            };
            match constants::verify_stability(kind, &format!("body-{i}"), &cell, &params) {
                Ok(rep) => Ok(Some(rep)),
                Err(SphError::Precondition(_)) => Ok(None),
                Err(e) => Err(e),
            }
        });

    let mut rows = Vec::new();
    let mut counts = [0u64; 4];
    let mut skipped = 0u64;
    let mut kept = 0u64;
    for r in attempts {
        if kept == bodies {
            break;
        }
        match r? {
            Some(rep) => {
                kept += 1;
                counts[match rep.verdict {
                    Verdict::Holds => 0,
                    Verdict::HoldsWithinError => 1,
                    Verdict::InconclusiveUpperBoundDeviation => 2,
                    Verdict::Violated => 3,
                }] += 1;
                rows.push(rep.csv_row());
            }
            None => skipped += 1,
        }
    }
    if kept < bodies {
        return Err(SphError::Degenerate(format!(
            "only {kept} of {bodies} bodies met the preconditions within the sampling budget"
        )));
    }
    Ok(CommandOutput {
        header: constants::StabilityReport::csv_header(),
        rows,
        results: json!({
            "kind": kind.as_str(),
            "bodies": bodies,
            "precondition_skips": skipped,
            "holds": counts[0],
            "holds_within_error": counts[1],
            "inconclusive": counts[2],
            "violated": counts[3],
        }),
        pass: counts[3] == 0,
    })
}

fn check_cell_count_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let rep = check_cell_count(cfg.gamma()?, cfg.count()?, cfg.seed_value())?;
    let rows = vec![vec![
        fmt_f64(rep.gamma_s),
        rep.n.to_string(),
        fmt_f64(rep.mean),
        fmt_f64(rep.stderr),
        fmt_f64(rep.target),
        rep.rejections.to_string(),
        rep.pass.to_string(),
    ]];
    let pass = rep.pass && !rep.rejection_budget_exceeded;
    Ok(CommandOutput {
        header: vec!["gamma_s", "n", "mean_cells", "stderr", "target", "rejections", "pass"],
        rows,
        results: serde_json::to_value(&rep)?,
        pass,
    })
}

fn check_typical_identity_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let f = match cfg
        .f
        .as_deref()
        .ok_or_else(|| SphError::Config("f: missing".into()))?
    {
        "one" => TypicalFunctional::One,
        "volume" => TypicalFunctional::Volume,
        "volume-indicator" => TypicalFunctional::VolumeAtLeast(cfg.threshold()?),
        other => return Err(SphError::Config(format!("f: unknown value `{other}`"))),
    };
    let rep = check_typical_identity(f, cfg.gamma()?, cfg.count()?, cfg.seed_value())?;
    let rows = vec![vec![
        rep.f.clone(),
        fmt_f64(rep.gamma_s),
        rep.n.to_string(),
        fmt_f64(rep.lhs.value),
        fmt_f64(rep.lhs.stderr),
        fmt_f64(rep.rhs.value),
        fmt_f64(rep.rhs.stderr),
        rep.pass.to_string(),
    ]];
    let pass = rep.pass;
    Ok(CommandOutput {
        header: vec!["f", "gamma_s", "n", "lhs", "lhs_se", "rhs", "rhs_se", "pass"],
        rows,
        results: serde_json::to_value(&rep)?,
        pass,
    })
}

fn check_voronoi_tail_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let rep = check_voronoi_tail(
        cfg.threshold()?,
        cfg.gamma()?,
        cfg.dimension()?,
        cfg.count()?,
        cfg.seed_value(),
    )?;
    let rows = vec![vec![
        fmt_f64(rep.a),
        fmt_f64(rep.gamma_s),
        rep.n.to_string(),
        rep.successes.to_string(),
        fmt_f64(rep.p_hat),
        fmt_f64(rep.wilson3_low),
        fmt_f64(rep.wilson3_high),
        fmt_f64(rep.target),
        rep.pass.to_string(),
    ]];
    let pass = rep.pass;
    Ok(CommandOutput {
        header: vec![
            "a",
            "gamma_s",
            "n",
            "successes",
            "p_hat",
            "wilson3_low",
            "wilson3_high",
            "target",
            "pass",
        ],
        rows,
        results: serde_json::to_value(&rep)?,
        pass,
    })
}

fn check_lower_bound_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let size = cfg.size_spec(d)?;
    let rep = check_zero_cell_lower_bound(
        &size,
        cfg.threshold()?,
        cfg.gamma()?,
        cfg.count()?,
        cfg.seed_value(),
    )?;
    let rows = vec![vec![
        fmt_f64(rep.a),
        fmt_f64(rep.gamma_s),
        fmt_f64(rep.tau),
        fmt_f64(rep.rhs_exact),
        rep.n.to_string(),
        rep.successes.to_string(),
        fmt_f64(rep.p_hat),
        fmt_f64(rep.stderr),
        rep.pass.to_string(),
    ]];
    let pass = rep.pass;
    Ok(CommandOutput {
        header: vec![
            "a", "gamma_s", "tau", "rhs_exact", "n", "successes", "p_hat", "stderr", "pass",
        ],
        rows,
        results: serde_json::to_value(&rep)?,
        pass,
    })
}

fn estimate_rate_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let size = cfg.size_spec(d)?;
    let curve = estimate_rate(
        &size,
        cfg.threshold()?,
        &cfg.grid()?,
        cfg.count()?,
        cfg.seed_value(),
    )?;
    let mut rows = Vec::new();
    for p in &curve.points {
        rows.push(vec![
            fmt_f64(p.gamma_s),
            p.n.to_string(),
            p.successes.to_string(),
            fmt_f64(p.p_hat),
            fmt_f64(p.wilson_low),
            fmt_f64(p.wilson_high),
            p.ln_p_over_gamma.map(fmt_f64).unwrap_or_else(|| "".into()),
            fmt_f64(p.lower_bound_rhs),
            p.lower_bound_ok.to_string(),
            p.starved.to_string(),
        ]);
    }
    let pass = curve.points.iter().all(|p| p.lower_bound_ok);
    Ok(CommandOutput {
        header: vec![
            "gamma_s",
            "n",
            "successes",
            "p_hat",
            "wilson_low",
            "wilson_high",
            "ln_p_over_gamma",
            "lower_bound_rhs",
            "lower_bound_ok",
            "starved",
        ],
        rows,
        results: serde_json::to_value(&curve)?,
        pass,
    })
}

fn estimate_conditional_cmd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = cfg.dimension()?;
    let size = cfg.size_spec(d)?;
    let eps = cfg
        .epsilon
        .ok_or_else(|| SphError::Config("epsilon: missing".into()))?;
    if eps < 0.0 {
        return Err(SphError::Config(format!("epsilon: {eps} must be >= 0")));
    }
    let rep = estimate_conditional_deviation(
        cfg.cell_model()?,
        &size,
        cfg.dev_kind()?,
        cfg.threshold()?,
        eps,
        cfg.gamma()?,
        cfg.count()?,
        cfg.seed_value(),
        &cfg.mc_params(),
    )?;
    let rows = vec![vec![
        format!("{:?}", rep.model),
        format!("{:?}", rep.dev),
        fmt_f64(rep.a),
        fmt_f64(rep.epsilon),
        fmt_f64(rep.gamma_s),
        rep.n.to_string(),
        rep.conditioning_successes.to_string(),
        rep.joint_successes.to_string(),
        rep.degenerate_bodies.to_string(),
        fmt_f64(rep.p_hat),
        fmt_f64(rep.ci_low),
        fmt_f64(rep.ci_high),
        rep.starved.to_string(),
    ]];
    Ok(CommandOutput {
        header: vec![
            "model",
            "dev",
            "a",
            "epsilon",
            "gamma_s",
            "n",
            "conditioning_successes",
            "joint_successes",
            "degenerate_bodies",
            "p_hat",
            "ci_low",
            "ci_high",
            "starved",
        ],
        rows,
        results: serde_json::to_value(&rep)?,
        pass: true,
    })
}

fn constants_cmd(_cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |family: &str, p1: String, p2: String, value: f64| {
        println!("{family}({p1}, {p2}) = {value:.12}");
        rows.push(vec![family.to_string(), p1, p2, fmt_f64(value)]);
    };
    for d in 2..=3usize {
        for &ac in &[0.3f64, 0.6, 0.9, 1.2] {
            let v = beta_stability(ac, ac, d)?;
            push("beta", format!("alpha_C={ac},d={d}"), "alpha_0=alpha_C".into(), v);
        }
        let half_vol = crate::sphere::omega(d + 1) / 2.0;
        for frac in [0.1f64, 0.3, 0.6, 0.9] {
            let a = frac * half_vol;
            push("beta_bar", format!("a={a:.6}"), format!("d={d}"), beta_bar(a, d)?);
        }
        for &a in &[0.3f64, 0.6, 0.9, 1.2] {
            push("c_inradius", format!("a={a}"), format!("d={d}"), c_inradius(a, d)?);
            push("c_voronoi", format!("a={a}"), format!("d={d}"), c_voronoi(a, d)?);
        }
    }
    for m in 0..=8usize {
        for &t in &[0.0f64, 1.0, 4.0] {
            push("h_m", format!("m={m}"), format!("t={t}"), h_m(m, t)?);
        }
    }
    for d in 2..=3usize {
        for k in 0..=10usize {
            push("schlafli", format!("d={d}"), format!("k={k}"), schlafli_count(d, k) as f64);
        }
    }
    Ok(CommandOutput {
        header: vec!["family", "param1", "param2", "value"],
        rows,
        results: json!({"tables": "see csv"}),
        pass: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_json(text: &str) -> (bool, PathBuf) {
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        run(&cfg).unwrap()
    }

    fn tmp_prefix(name: &str) -> String {
        std::env::temp_dir()
            .join(format!("sphertess_cli_{name}_{}", std::process::id()))
            .to_string_lossy()
            .to_string()
    }

    #[test]
    fn tessellate_roundtrip() {
        let prefix = tmp_prefix("tess");
        let (pass, summary) = run_json(&format!(
            r#"{{"command": "tessellate", "k": 5, "seed": 3, "output": "{prefix}"}}"#
        ));
        assert!(pass);
        let text = std::fs::read_to_string(&summary).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["results"]["cells"], json!(22));
        // cells json parses back into polytopes
        let cells_text = std::fs::read_to_string(format!("{prefix}.cells.json")).unwrap();
        let cells: serde_json::Value = serde_json::from_str(&cells_text).unwrap();
        let first: PolytopeJson =
            serde_json::from_value(cells["cells"][0].clone()).unwrap();
        assert!(first.to_h().is_ok());
        cleanup(&prefix);
    }

    #[test]
    fn reproducible_csv_hash() {
        let prefix = tmp_prefix("rep");
        let cfg = format!(
            r#"{{"command": "check-voronoi-tail", "a": 0.3, "gamma_s": 1.2, "n": 500, "seed": 9, "output": "{prefix}"}}"#
        );
        run_json(&cfg);
        let h1 = crate::report::hash_csv_file(Path::new(&format!("{prefix}.rows.csv"))).unwrap();
        std::thread::sleep(std::time::Duration::from_millis(3));
        run_json(&cfg);
        let h2 = crate::report::hash_csv_file(Path::new(&format!("{prefix}.rows.csv"))).unwrap();
        assert_eq!(h1, h2);
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(format!("{prefix}.summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["csv_sha256"].as_str().unwrap(), h1);
        cleanup(&prefix);
    }

    #[test]
    fn config_errors_exit_2() {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("sphertess_badcfg_{}.json", std::process::id()));
        std::fs::write(&path, r#"{"command": "tessellate", "oops": 1}"#).unwrap();
        assert_eq!(run_path(&path), EXIT_CONFIG);
        std::fs::write(&path, r#"{"command": "nope", "output": "x"}"#).unwrap();
        assert_eq!(run_path(&path), EXIT_CONFIG);
        std::fs::remove_file(&path).ok();
    }

    fn cleanup(prefix: &str) {
        for ext in ["rows.csv", "summary.json", "cells.json"] {
            std::fs::remove_file(format!("{prefix}.{ext}")).ok();
        }
    }
}
