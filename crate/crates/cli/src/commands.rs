use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;
use smithcal::calibration::{comass_estimate, load_form, standard_form_with, ComassConfig, StandardCalibration};
use smithcal::exterior::{ExtSpace, KForm};
use smithcal::geometry::{FdConfig, JetBatch};
use smithcal::models::{curved_model, curved_names, flat_model, manifest, model_info, FlatModel, ManifestEntry};
use smithcal::smith::{
    immersion_report, k_energy, k_tension, submersion_report, summarize, sweep, tension_norm, Direction, PointData,
    QuadratureSpec, ResidualReport, SmithProblem,
};
use smithcal::suites::{run_suite, SuiteResult, SUITE_NAMES};

use crate::config::RunConfig;
use crate::{CliError, Outcome};

/// Flat registry names first, then the sheared curved-chart variants.
fn resolve_model(cfg: &RunConfig) -> Result<(SmithProblem<f64>, FlatModel), CliError> {
    let name = cfg.model.as_deref().ok_or_else(|| CliError::input("--model is required"))?;
    let (prob, info) = if let Ok(info) = model_info(name) {
        (flat_model::<f64>(name, cfg.perturb)?, info)
    } else if curved_names().iter().any(|n| n == name) {
        if cfg.perturb != 0.0 {
            return Err(CliError::input("curved-chart models take no perturbation"));
        }
        let base = name.trim_start_matches("sheared-");
        (curved_model::<f64>(name)?, model_info(base)?)
    } else {
        return Err(CliError::input(format!("unknown model `{name}`; see models-list")));
    };
    if let Some(d) = cfg.direction {
        if d != info.direction {
            return Err(CliError::input(format!("model `{name}` is a {}, not a {d}", info.direction)));
        }
    }
    let prob = prob.with_tolerances(cfg.tolerances).with_fd(FdConfig::with_step(cfg.fd_step));
    Ok((prob, info))
}

fn is_file(s: &str) -> bool {
    s.ends_with(".json") || Path::new(s).is_file()
}

fn standard(cfg: &RunConfig, name: &str, dim: Option<usize>) -> Result<KForm<f64>, CliError> {
    let kind: StandardCalibration = name.parse()?;
    let n = kind
        .fixed_dim()
        .or(dim)
        .ok_or_else(|| CliError::input(format!("calibration `{name}` needs --dim")))?;
    if dim.is_some_and(|d| d != n) {
        return Err(CliError::input(format!("calibration `{name}` lives in dimension {n}")));
    }
    Ok(standard_form_with::<f64>(kind, n, &cfg.table()?)?.form)
}

fn form_file(path: &Path) -> Result<KForm<f64>, CliError> {
    load_form(path).map_err(|e| CliError::input(format!("form file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct ComassSummary {
    value: f64,
    /// Columns of the maximizing frame.
    frame: Vec<Vec<f64>>,
    certificate: &'static str,
    restarts: usize,
    best_restart: usize,
    converged: usize,
}

pub fn comass(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let form = match (&cfg.standard, &cfg.file, &cfg.calibration) {
        (Some(s), None, None) => standard(cfg, s, cfg.dim)?,
        (None, Some(f), None) => form_file(f)?,
        (None, None, Some(c)) if is_file(c) => form_file(Path::new(c))?,
        (None, None, Some(c)) => standard(cfg, c, cfg.dim)?,
        (None, None, None) => return Err(CliError::input("give one of --standard, --file or --calibration")),
        _ => return Err(CliError::input("--standard, --file and --calibration are exclusive")),
    };
    let est = comass_estimate(&form, &ComassConfig { restarts: cfg.restarts, tol: cfg.comass_tol, seed: cfg.seed, ..Default::default() })?;
    let passed = est.value <= 1.0 + cfg.comass_tol;
    eprintln!("comass {:.9} over {} restarts: {}", est.value, est.restarts, if passed { "calibration" } else { "not a calibration" });
    let summary = ComassSummary {
        value: est.value,
        frame: est.frame.iter().map(|v| v.iter().copied().collect()).collect(),
        certificate: if passed { "calibration" } else { "not a calibration" },
        restarts: est.restarts,
        best_restart: est.best_restart,
        converged: est.converged,
    };
    Ok(Outcome::new::<(), _>(cfg, Vec::new(), summary, passed))
}

fn check_jets(cfg: &RunConfig, path: &Path) -> Result<Vec<ResidualReport>, CliError> {
    let direction = cfg.direction.ok_or_else(|| CliError::input("--jets needs --direction"))?;
    let file = File::open(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let batch = JetBatch::<f64>::read(BufReader::new(file))?;
    let ambient = match direction {
        Direction::Immersion => batch.n2,
        Direction::Submersion => batch.n1,
    };
    let name = cfg.calibration.as_deref().ok_or_else(|| CliError::input("--jets needs --calibration"))?;
    let alpha = if is_file(name) { form_file(Path::new(name))? } else { standard(cfg, name, cfg.dim.or(Some(ambient)))? };
    if alpha.dim() != ambient {
        return Err(CliError::input(format!("calibration has dimension {}, the jets need {ambient}", alpha.dim())));
    }
    let (source, target) = (ExtSpace::euclidean(batch.n1), ExtSpace::euclidean(batch.n2));
    let alpha = match direction {
        Direction::Immersion => alpha.rebase(&target)?,
        Direction::Submersion => alpha.rebase(&source)?,
    };
    batch
        .jets
        .into_iter()
        .map(|jet| {
            let pd = PointData { jet, source: source.clone(), target: target.clone(), alpha: alpha.clone() };
            Ok(match direction {
                Direction::Immersion => immersion_report(&pd, &cfg.tolerances)?,
                Direction::Submersion => submersion_report(&pd, &cfg.tolerances)?,
            })
        })
        .collect()
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let reports = match (&cfg.model, &cfg.jets) {
        (Some(_), None) => {
            let (prob, info) = resolve_model(cfg)?;
            sweep(&prob, &info.sample_grid::<f64>(cfg.grid()))?
        }
        (None, Some(path)) => check_jets(cfg, path)?,
        _ => return Err(CliError::input("check needs exactly one of --model and --jets")),
    };
    let summary = summarize(&reports);
    eprintln!(
        "{} points: max form {:.3e}, max conformal {:.3e}, min slack {:.3e}: {:?}",
        summary.points, summary.max_residual_form, summary.max_residual_conformal, summary.min_slack, summary.verdict
    );
    let passed = summary.verdict.is_pass();
    Ok(Outcome::new(cfg, reports, summary, passed))
}

pub fn energy(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (prob, info) = resolve_model(cfg)?;
    let rep = k_energy(&prob, &QuadratureSpec::new(cfg.grid()).on_axes(info.sample_axes.clone()))?;
    let passed = rep.bound_holds();
    eprintln!("energy {:.12} bound {:.12} gap {:.3e} (quadrature {:.1e})", rep.energy, rep.lower_bound, rep.gap, rep.quadrature_error);
    Ok(Outcome::new::<(), _>(cfg, Vec::new(), rep, passed))
}

#[derive(Serialize)]
struct TensionPoint {
    point: Vec<f64>,
    tension: Vec<f64>,
    norm: f64,
}

#[derive(Serialize)]
struct TensionSummary {
    points: usize,
    max_norm: f64,
    tolerance: f64,
    verdict: &'static str,
}

pub fn tension(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (prob, info) = resolve_model(cfg)?;
    let fd = FdConfig::with_step(cfg.fd_step);
    let points = info
        .sample_grid::<f64>(cfg.grid())
        .into_iter()
        .map(|x| {
            let tau = k_tension(&prob, &x, &fd)?;
            let norm = tension_norm(&prob, &x, &tau);
            Ok(TensionPoint { point: x, tension: tau.iter().copied().collect(), norm })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_norm = points.iter().map(|p| p.norm).fold(0.0, f64::max);
    let passed = max_norm <= cfg.tension_tol;
    eprintln!("{} points: max |tau_k| {max_norm:.3e}", points.len());
    let summary = TensionSummary { points: points.len(), max_norm, tolerance: cfg.tension_tol, verdict: if passed { "pass" } else { "fail" } };
    Ok(Outcome::new(cfg, points, summary, passed))
}

#[derive(Serialize)]
struct SuiteSummary {
    seed: u64,
    passed: usize,
    failed: Vec<String>,
    suites: Vec<SuiteResult>,
}

pub fn verify_lemmas(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sc = cfg.suite_config()?;
    let names: Vec<String> = match &cfg.suites {
        Some(v) => v.clone(),
        None => SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    if let Some(bad) = names.iter().find(|n| !SUITE_NAMES.contains(&n.as_str())) {
        return Err(CliError::input(format!("unknown suite `{bad}`")));
    }
    let mut suites = Vec::new();
    eprintln!("{:<22} {:>8} {:>12} {:>10}  verdict", "suite", "cases", "max defect", "tolerance");
    for name in &names {
        let r = run_suite(name, &sc)?;
        eprintln!(
            "{:<22} {:>8} {:>12.3e} {:>10.1e}  {}",
            r.name,
            r.cases,
            r.max_defect,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        );
        suites.push(r);
    }
    let failed: Vec<String> = suites.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    let passed = failed.is_empty();
    let summary = SuiteSummary { seed: cfg.seed, passed: suites.len() - failed.len(), failed, suites };
    Ok(Outcome::new::<(), _>(cfg, Vec::new(), summary, passed))
}

#[derive(Serialize)]
struct ModelList {
    registry: Vec<ManifestEntry>,
    curved: Vec<String>,
}

pub fn models_list(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let list = ModelList { registry: manifest(), curved: curved_names() };
    for m in &list.registry {
        eprintln!("{:<24} {:<10} {}->{} {}", m.name, m.direction, m.source_dim, m.target_dim, m.calibration);
    }
    Ok(Outcome::new::<(), _>(cfg, Vec::new(), list, true))
}
