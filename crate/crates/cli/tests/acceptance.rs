//! Acceptance run: every criterion at its full stated size and tolerance, one
//! PASS/FAIL line each. Criteria run one after another so the wall-clock
//! budgets are measured without interference.

#[path = "../../core/tests/common/variation.rs"]
mod variation;

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smithcal::geometry::FdConfig;
use smithcal::models::{bryant_salamon_asd, bryant_salamon_g2_s3, bryant_salamon_spin7, curved_model, curved_names, flat_model, registry, Profile};
use smithcal::smith::{k_energy, k_tension, sweep, tension_norm, QuadratureSpec};
use smithcal::suites::{run_suite, SuiteConfig, SuiteResult};

type Verdict = (bool, String);

fn suite(name: &str, cfg: SuiteConfig) -> SuiteResult {
    run_suite(name, &cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn suite_line(r: &SuiteResult) -> String {
    let mut s = format!("{} {} cases, max defect {:.2e} (tol {:.0e})", r.name, r.cases, r.max_defect, r.tolerance);
    if !r.detail.is_empty() {
        s.push_str(&format!("; {}", r.detail));
    }
    s
}

fn timed_suite(name: &str, cfg: SuiteConfig, budget_s: f64) -> Verdict {
    let t = Instant::now();
    let r = suite(name, cfg);
    let secs = t.elapsed().as_secs_f64();
    (r.passed && secs < budget_s, format!("{}; {secs:.1} s of {budget_s} s", suite_line(&r)))
}

fn exterior() -> Verdict {
    timed_suite("exterior", SuiteConfig { exterior_cases: 10_000, ..Default::default() }, 30.0)
}

fn hadamard() -> Verdict {
    timed_suite("hadamard", SuiteConfig { matrices: 10_000, ..Default::default() }, 30.0)
}

fn comass() -> Verdict {
    timed_suite("comass", SuiteConfig { restarts: 200, ..Default::default() }, 120.0)
}

fn first_cousin() -> Verdict {
    let r = suite("first_cousin", SuiteConfig { planes: 500, ..Default::default() });
    (r.passed, suite_line(&r))
}

fn smith_inequalities() -> Verdict {
    let ineq = suite("smith_inequality", SuiteConfig { jets: 10_000, ..Default::default() });
    let eq = suite("equality_cases", SuiteConfig { jets: 1_000, ..Default::default() });
    (ineq.passed && eq.passed, format!("{}; {}", suite_line(&ineq), suite_line(&eq)))
}

fn formulations() -> Verdict {
    let cfg = SuiteConfig { jets: 1_000, ..Default::default() };
    let rs: Vec<SuiteResult> = ["formulations", "kernel_calibration", "mixed_type"].iter().map(|n| suite(n, cfg.clone())).collect();
    (rs.iter().all(|r| r.passed), rs.iter().map(suite_line).collect::<Vec<_>>().join("; "))
}

fn flat_models() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in registry() {
        let grid = m.sample_grid::<f64>(32);
        let exact = sweep(&flat_model::<f64>(m.name, 0.0).unwrap(), &grid).unwrap();
        let r0 = exact.iter().map(|r| r.residual_form.max(r.residual_conformal)).fold(0.0, f64::max);
        let pert = sweep(&flat_model::<f64>(m.name, 0.1).unwrap(), &grid).unwrap();
        let r1 = pert.iter().map(|r| r.residual_form.max(r.residual_conformal)).fold(0.0, f64::max);
        let s1 = pert.iter().map(|r| r.inequality_slack).fold(f64::NEG_INFINITY, f64::max);
        ok &= r0 <= 1e-12 && r1 >= 1e-3 && s1 > 0.0;
        parts.push(format!("{} ({} pts): {r0:.1e} / {r1:.1e}, slack {s1:.1e}", m.name, grid.len()));
    }
    (ok, parts.join("; "))
}

fn k_harmonicity() -> Verdict {
    let fd = FdConfig::with_step(1e-3);
    let mut flat_max = 0.0f64;
    for m in registry() {
        let prob = flat_model::<f64>(m.name, 0.0).unwrap();
        for x in m.sample_grid::<f64>(3) {
            flat_max = flat_max.max(tension_norm(&prob, &x, &k_tension(&prob, &x, &fd).unwrap()));
        }
    }
    let mut curved_max = 0.0f64;
    for name in curved_names() {
        let prob = curved_model::<f64>(&name).unwrap();
        let base = registry().into_iter().find(|m| name.ends_with(m.name)).unwrap();
        for x in base.sample_grid::<f64>(2) {
            // off the lattice of flat coordinates
            let x: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + 0.3 + 0.1 * i as f64).collect();
            curved_max = curved_max.max(tension_norm(&prob, &x, &k_tension(&prob, &x, &fd).unwrap()));
        }
    }
    let mut worst_gap = 0.0f64;
    let mut var_ok = true;
    for case in variation::non_smith_cases() {
        for v in case.variations() {
            let (fd_grad, pred) = v.check(&case.prob);
            if v.expect_zero {
                var_ok &= fd_grad.abs() <= 1e-9 && pred.abs() <= 1e-9;
            } else {
                let gap = (fd_grad - pred).abs() / fd_grad.abs();
                worst_gap = worst_gap.max(gap);
                var_ok &= fd_grad.abs() > 1e-3 && gap <= 1e-3;
            }
        }
    }
    let ok = flat_max <= 1e-12 && curved_max <= 1e-4 && var_ok;
    (ok, format!("flat max |τ| {flat_max:.1e}; curved max |τ| {curved_max:.1e}; worst relative gap to dE/dt {worst_gap:.1e} on 3 maps"))
}

fn energy() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in registry() {
        let gaps: Vec<(f64, bool)> = [0.0, 0.05, 0.1, 0.2]
            .iter()
            .map(|&eps| {
                let p = flat_model::<f64>(m.name, eps).unwrap();
                let r = k_energy(&p, &QuadratureSpec::new(64).on_axes(m.sample_axes.clone())).unwrap();
                (r.gap, r.bound_holds())
            })
            .collect();
        let exact = gaps[0].0.abs() <= 1e-8;
        let bound = gaps.iter().all(|&(g, holds)| g >= -1e-8 && holds);
        let monotone = gaps.windows(2).all(|w| w[1].0 >= w[0].0);
        ok &= exact && bound && monotone;
        parts.push(format!("{}: gaps {:?}", m.name, gaps.iter().map(|g| format!("{:.2e}", g.0)).collect::<Vec<_>>()));
    }
    (ok, parts.join("; "))
}

fn conformal_invariance() -> Verdict {
    let r = suite("conformal_invariance", SuiteConfig { points: 100, ..Default::default() });
    (r.passed, suite_line(&r))
}

fn warped() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut worst_lambda = 0.0f64;
    let mut check = |m: &smithcal::models::WarpedFibration, lambda: &dyn Fn(f64) -> f64| {
        for i in 0..100 {
            let r = 10.0 * i as f64 / 99.0;
            let s = m.verify_at(r).unwrap();
            let d = s.conformal_defect.max(s.volume_defect).max(s.max_component_defect());
            let ld = (s.lambda_closed_form - lambda(r)).abs().max(s.lambda_defect);
            worst = worst.max(d);
            worst_lambda = worst_lambda.max(ld);
            ok &= d <= 1e-10 && ld <= 1e-12 && s.smith.verdicts.smith;
        }
    };
    for _ in 0..5 {
        let (kappa, c0, c1) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
        let m = bryant_salamon_g2_s3(kappa, c0, c1).unwrap();
        check(&m, &|r: f64| (3.0 * kappa * (c0 + c1 * r * r)).powf(-1.0 / 3.0));
    }
    for _ in 0..5 {
        let (a, b, c): (f64, f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(-0.4..0.4));
        let w: Profile = Arc::new(move |r| a * (1.0 + r * r).powf(0.5 * c.abs()));
        let v: Profile = Arc::new(move |r| b / (1.0 + c * c * r));
        let lambda = move |r: f64| 1.0 / (a * (1.0 + r * r).powf(0.5 * c.abs()));
        check(&bryant_salamon_asd(w.clone(), v.clone()), &lambda);
        check(&bryant_salamon_spin7(w, v), &lambda);
    }
    let s = bryant_salamon_g2_s3(1.0, 1.0, 1.0).unwrap().verify_at(0.0).unwrap();
    let values = (s.lambda_closed_form - 3f64.powf(-1.0 / 3.0)).abs() <= 1e-12 && (s.w * s.w - 3f64.powf(2.0 / 3.0)).abs() <= 1e-12;
    (
        ok && values,
        format!("G2, ASD and Spin(7) at 5 draws x 100 radii: max identity defect {worst:.1e}, max λ defect {worst_lambda:.1e}; unit-parameter values match: {values}"),
    )
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smithcal")).args(args).output().expect("binary runs")
}

fn cli_contract() -> Verdict {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let broken = fixtures.join("broken_table.json").display().to_string();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suites.json");
    std::fs::write(&cfg, r#"{"suite_sizes": {"jets": 20, "exterior_cases": 200, "matrices": 20, "planes": 10, "restarts": 40, "points": 3}}"#).unwrap();
    let cfg = cfg.display().to_string();

    let runs: [&[&str]; 3] = [
        &["verify-lemmas", "--config", &cfg, "--seed", "17", "--suites", "exterior,hadamard,smith_inequality,formulations"],
        &["check", "--model", "cayley-fibration-T8", "--perturb", "0.1", "--seed", "17"],
        &["comass", "--standard", "coassociative", "--restarts", "30", "--seed", "17"],
    ];
    let identical = runs.iter().all(|a| {
        let (x, y) = (cli(a), cli(a));
        !x.stdout.is_empty() && x.stdout == y.stdout && x.status == y.status
    });
    let code = |a: &[&str]| cli(a).status.code();
    let codes = [
        (code(&["check", "--model", "associative-T7"]), 0),
        (code(&["check", "--model", "associative-T7", "--perturb", "0.1"]), 1),
        (code(&["check", "--model", "no-such-model"]), 2),
        (code(&["comass", "--file", "/no/such/form.json"]), 2),
    ];
    let codes_ok = codes.iter().all(|(got, want)| *got == Some(*want));
    let neg = cli(&["verify-lemmas", "--config", &cfg, "--convention-table", &broken, "--suites", "comass,star_calibration"]);
    let report: serde_json::Value = serde_json::from_slice(&neg.stdout).unwrap_or_default();
    let failed: Vec<String> = serde_json::from_value(report["summary"]["failed"].clone()).unwrap_or_default();
    let neg_ok = neg.status.code() == Some(1) && failed.iter().any(|f| f == "comass") && failed.iter().any(|f| f == "star_calibration");
    (
        identical && codes_ok && neg_ok,
        format!("byte-identical reprints: {identical}; exit codes 0/1/2: {codes_ok}; broken table fails [{}]", failed.join(", ")),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("exterior algebra identities", exterior),
        ("Hadamard bound and its equality case", hadamard),
        ("comass certificates", comass),
        ("first cousin principle", first_cousin),
        ("pointwise inequalities and equality cases", smith_inequalities),
        ("formulation equivalences", formulations),
        ("flat registry models", flat_models),
        ("k-harmonicity", k_harmonicity),
        ("energy inequality", energy),
        ("conformal invariance", conformal_invariance),
        ("warped fibration identities", warped),
        ("CLI determinism and exit codes", cli_contract),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = run();
        println!("{} criterion {:>2} {title} [{:.1} s]: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1, t.elapsed().as_secs_f64());
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
