use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use eigenshape::analytic::AnalyticBody;
use eigenshape::functionals::SetFunctional;
use eigenshape::inequalities::{self as ineq, InequalityCertificate, SuiteConfig, SuiteKind};
use eigenshape::spectral::{eigenvalues, SolverConfig, SpectralResult};
use eigenshape::variational::{
    self as var, OptimizationRun, OptimizerConfig, ProblemKind, ThresholdEstimates,
    VariationalProblem,
};
use eigenshape::{configure_threads, ConvexBody};
use serde::Serialize;

use crate::output::{self, fmt_f64, manifest_path_for, RunManifest};
use crate::{
    CheckArgs, Cli, CliError, Command, EvalArgs, JkCurveArgs, OptimizeArgs, Settings, Tuning,
    EXIT_OK, EXIT_VIOLATIONS,
};

const DEFAULT_SEED: u64 = 42;

pub fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (mut s, config_input) = Settings::load(cli.config.as_deref())?;
    let seed = s.get("seed", cli.seed, DEFAULT_SEED)?;
    // thread count only changes speed, so it stays out of the snapshot
    let threads = s.get_opt("threads", cli.threads)?;
    s.snapshot.remove("threads");
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::input("--threads must be >= 1"));
        }
        configure_threads(t)?;
    }
    let start = Instant::now();
    let (name, mut manifest, manifest_path, code) = match cli.command {
        Command::Eval(a) => eval(a, &mut s, seed)?,
        Command::Check(a) => check(a, &mut s, seed)?,
        Command::Optimize(a) => optimize(a, &mut s, seed)?,
        Command::JkCurve(a) => jk_curve(a, &mut s, seed)?,
    };
    if let Some((path, bytes)) = config_input {
        manifest.input(&path, &bytes);
    }
    manifest.config = s.snapshot;
    manifest.command = name.into();
    if cli.record_time {
        manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    manifest.output(&manifest_path);
    output::write_json(&manifest_path, &manifest)?;
    Ok(code)
}

type Outcome = (&'static str, RunManifest, PathBuf, i32);

#[derive(Serialize)]
struct EvalReport {
    body: serde_json::Value,
    summary: serde_json::Value,
    spectrum: SpectralResult,
    certificates: Vec<InequalityCertificate>,
}

fn read_body(path: &Path) -> Result<(ConvexBody, Vec<u8>), CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let body = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((body, bytes))
}

fn eval(a: EvalArgs, s: &mut Settings, seed: u64) -> Result<Outcome, CliError> {
    let k = s.get("k", a.k, 4usize)?;
    let resolution = s.get("resolution", a.resolution, 128.0)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("eval.json"));
    let mut manifest = RunManifest::new("eval", BTreeMap::new(), seed);
    let report = match (&a.body, &a.analytic) {
        (Some(_), Some(_)) => {
            return Err(CliError::input("give a body file or --analytic, not both"))
        }
        (None, None) => return Err(CliError::input("missing body file or --analytic")),
        (Some(path), None) => {
            let (body, bytes) = read_body(path)?;
            manifest.input(path, &bytes);
            let cfg = SolverConfig::new(resolution, k);
            cfg.validate()?;
            let spectrum = eigenvalues(&body, &cfg)?;
            let mut certs = ineq::check_inradius_bounds(&body);
            certs.push(ineq::check_moment_isoperimetric(&body));
            certs.extend(ineq::check_diameter_bounds(&body));
            for name in ["measure", "perimeter", "moment"] {
                certs.push(ineq::check_normalized_bound(
                    &SetFunctional::builtin(name, 2)?,
                    &body,
                )?);
            }
            certs.extend(ineq::check_li_yau(&spectrum, body.measure(), 2)?);
            certs.push(ineq::check_convex_lambda1(&body, &spectrum));
            EvalReport {
                body: serde_json::to_value(&body).expect("body serializes"),
                summary: serde_json::to_value(body.summary()).expect("summary serializes"),
                spectrum,
                certificates: certs,
            }
        }
        (None, Some(kind)) => {
            let dim = s.get("dim", a.dim, 2usize)?;
            let body = match kind.as_str() {
                "ball" => AnalyticBody::ball(dim, s.get("radius", a.radius, 1.0)?)?,
                "cube" => AnalyticBody::cube(dim, s.get("side", a.side, 1.0)?)?,
                "rectangle" => AnalyticBody::rectangle(
                    a.sides
                        .ok_or_else(|| CliError::input("rectangle needs --sides"))?,
                )?,
                other => return Err(CliError::input(format!("unknown analytic body {other}"))),
            };
            let f = body.functionals();
            let eigs = body.eigenvalues(k)?;
            let certs = ineq::li_yau_for(&eigs, f.measure, body.dim(), 0.0)?;
            let summary = serde_json::json!({
                "measure": f.measure,
                "perimeter": f.perimeter,
                "moment": f.moment,
                "inradius": body.inradius(),
                "diameter": body.diameter(),
            });
            EvalReport {
                body: serde_json::to_value(&body).expect("body serializes"),
                summary,
                spectrum: SpectralResult {
                    eigenvalues: eigs,
                    grid_h: 0.0,
                    extrapolated: false,
                    interior_nodes: 0,
                },
                certificates: certs,
            }
        }
    };
    output::write_json(&out, &report)?;
    manifest.output(&out);
    let fails = report.certificates.iter().filter(|c| !c.passes()).count();
    let eigs: Vec<String> = report
        .spectrum
        .eigenvalues
        .iter()
        .map(|l| format!("{l:.6}"))
        .collect();
    println!("eigenvalues: {}", eigs.join(" "));
    println!(
        "certificates: {} checked, {} failing",
        report.certificates.len(),
        fails
    );
    Ok(("eval", manifest, manifest_path_for(&out), EXIT_OK))
}

fn check(a: CheckArgs, s: &mut Settings, seed: u64) -> Result<Outcome, CliError> {
    let defaults = SuiteConfig::default();
    let kind: SuiteKind = s
        .get("suite", a.suite, "all".to_string())?
        .parse()
        .map_err(|e: eigenshape::Error| CliError::input(e.to_string()))?;
    let samples = s.get("samples", a.samples, defaults.samples)?;
    if samples == 0 {
        return Err(CliError::input("--samples must be >= 1"));
    }
    let spectral_samples = s.get(
        "spectral-samples",
        a.spectral_samples,
        defaults.spectral_samples,
    )?;
    let resolution = s.get("resolution", a.resolution, defaults.solver.resolution)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("check.csv"));
    let cfg = SuiteConfig {
        kind,
        samples,
        seed,
        spectral_samples,
        solver: SolverConfig {
            resolution,
            ..defaults.solver
        },
        cube_k: defaults.cube_k,
    };
    let report = ineq::run_suite(&cfg)?;
    output::write_file(&out, &report.to_csv())?;
    let mut manifest = RunManifest::new("check", BTreeMap::new(), seed);
    manifest.output(&out);
    for f in report.summary() {
        println!(
            "{:<22} {:>7} checks  min slack {:>12.4e}  violations {}",
            f.id, f.count, f.min_slack, f.violations
        );
    }
    let v = report.violations();
    println!("total violations: {v}");
    let code = if v == 0 { EXIT_OK } else { EXIT_VIOLATIONS };
    Ok(("check", manifest, manifest_path_for(&out), code))
}

fn optimizer_config(t: &Tuning, s: &mut Settings) -> Result<OptimizerConfig, CliError> {
    let d = OptimizerConfig::default();
    let search = s.get(
        "search-resolution",
        t.search_resolution,
        d.search_solver.resolution,
    )?;
    let fin = s.get(
        "final-resolution",
        t.final_resolution,
        d.final_solver.resolution,
    )?;
    let cfg = OptimizerConfig {
        modes: s.get("modes", t.modes, d.modes)?,
        max_evaluations: s.get("max-evaluations", t.max_evaluations, d.max_evaluations)?,
        restarts: s.get("restarts", t.restarts, d.restarts)?,
        search_solver: SolverConfig {
            resolution: search,
            ..d.search_solver
        },
        final_solver: SolverConfig {
            resolution: fin,
            ..d.final_solver
        },
        ..d
    };
    cfg.validate()?;
    Ok(cfg)
}

fn numeric_on_search_failure(e: eigenshape::Error) -> CliError {
    match e {
        eigenshape::Error::InvalidConfig(_)
        | eigenshape::Error::UnknownFunctional(_)
        | eigenshape::Error::UnsupportedDimension(_) => e.into(),
        other => CliError::numeric(other.to_string()),
    }
}

fn optimize(a: OptimizeArgs, s: &mut Settings, seed: u64) -> Result<Outcome, CliError> {
    let kind: ProblemKind = s
        .get_opt("problem", a.problem)?
        .ok_or_else(|| CliError::input("--problem is required"))?
        .parse()?;
    let functional = s.get("functional", a.functional, "perimeter".to_string())?;
    let k = s.get("k", a.k, 1usize)?;
    let c = s.get_opt("c", a.c)?;
    let components = s.get(
        "components",
        a.components,
        if kind.is_union() { k } else { 1 },
    )?;
    let cfg = optimizer_config(&a.tuning, s)?;
    let problem = VariationalProblem {
        components,
        ..VariationalProblem::new(kind, &functional, k, c)
    };
    problem.validate()?;
    let run = if kind.is_union() {
        var::best_over_component_counts(kind, k, c.unwrap(), components, &cfg, seed)
    } else {
        var::optimize(&problem, &cfg, seed, None)
    }
    .map_err(numeric_on_search_failure)?;
    let dir = a
        .out_dir
        .unwrap_or_else(|| PathBuf::from(format!("runs/{kind:?}-k{k}")));
    let mut manifest = RunManifest::new("optimize", BTreeMap::new(), seed);
    write_run(&dir, &run, &mut manifest)?;
    println!(
        "{kind:?} k={k}: value {} after {} evaluations",
        fmt_f64(run.value),
        run.evaluations
    );
    Ok(("optimize", manifest, dir.join("manifest.json"), EXIT_OK))
}

/// `run.json`, `history.csv` and `minimizer.json` in `dir`.
pub fn write_run(dir: &Path, run: &OptimizationRun, m: &mut RunManifest) -> Result<(), CliError> {
    let paths = [
        dir.join("run.json"),
        dir.join("history.csv"),
        dir.join("minimizer.json"),
    ];
    output::write_json(&paths[0], run)?;
    output::write_file(&paths[1], &run.history_csv())?;
    if run.minimizer.components().len() == 1 {
        output::write_json(&paths[2], run.body())?;
    } else {
        output::write_json(&paths[2], &run.minimizer)?;
    }
    for p in &paths {
        m.output(p);
    }
    Ok(())
}

fn jk_curve(a: JkCurveArgs, s: &mut Settings, seed: u64) -> Result<Outcome, CliError> {
    let k = s.get("k", a.k, 1usize)?;
    let grid = match a.grid {
        Some(g) => {
            s.snapshot.insert(
                "grid".into(),
                g.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(","),
            );
            g
        }
        None => {
            let cmin = s.get("cmin", a.cmin, 1.0)?;
            let cmax = s.get("cmax", a.cmax, 6.0)?;
            let steps = s.get("steps", a.steps, 11usize)?;
            if steps < 2 || !(cmin > 0.0 && cmin < cmax) {
                return Err(CliError::input("need 0 < cmin < cmax and steps >= 2"));
            }
            (0..steps)
                .map(|i| cmin + (cmax - cmin) * i as f64 / (steps - 1) as f64)
                .collect()
        }
    };
    let components = s.get("components", a.components, k)?;
    let cfg = optimizer_config(&a.tuning, s)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("jk_curve.csv"));
    let est: ThresholdEstimates =
        var::estimate_thresholds(k, &cfg, seed).map_err(numeric_on_search_failure)?;
    let curve = var::jk_curve(k, &grid, components, &cfg, seed, Some(&est))
        .map_err(numeric_on_search_failure)?;
    output::write_file(&out, &curve.to_csv())?;
    let mut manifest = RunManifest::new("jk-curve", BTreeMap::new(), seed);
    manifest.output(&out);
    let thresholds = out.with_file_name(format!(
        "{}.thresholds.json",
        out.file_stem().unwrap_or_default().to_string_lossy()
    ));
    output::write_json(&thresholds, &est)?;
    manifest.output(&thresholds);
    for p in &curve.points {
        println!("c={:<10.6} J_k={:<14.6} {}", p.c, p.value, p.regime);
    }
    Ok(("jk-curve", manifest, manifest_path_for(&out), EXIT_OK))
}
