use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use smithcal::calibration::ConventionTable;
use smithcal::smith::{Direction, Tolerances};
use smithcal::suites::SuiteConfig;

use crate::CliError;

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Estimate the comass of a form by multistart ascent.
    Comass,
    /// Smith residuals of a registry model or a batch of jets.
    Check,
    /// k-energy against its topological lower bound.
    Energy,
    /// k-tension of a model at grid points.
    Tension,
    /// Run the seeded invariant suites.
    VerifyLemmas,
    /// List registry and curved-chart models.
    ModelsList,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Comass => "comass",
            Command::Check => "check",
            Command::Energy => "energy",
            Command::Tension => "tension",
            Command::VerifyLemmas => "verify-lemmas",
            Command::ModelsList => "models-list",
        }
    }

    fn default_grid(self) -> usize {
        match self {
            Command::Energy => 64,
            Command::Tension => 3,
            _ => 8,
        }
    }
}

/// Flags shared by all subcommands. Anything left unset falls back to the
/// config file, then to the defaults of [`RunConfig`].
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Registry model name (see `models-list`).
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// JSON-lines jet batch for `check`.
    #[arg(long, global = true, value_name = "FILE")]
    pub jets: Option<PathBuf>,
    /// Standard calibration name or a form JSON file.
    #[arg(long, global = true, value_name = "NAME|FILE")]
    pub calibration: Option<String>,
    /// Standard calibration for `comass`.
    #[arg(long, global = true, value_name = "NAME")]
    pub standard: Option<String>,
    /// Form JSON file for `comass`.
    #[arg(long, global = true, value_name = "FILE")]
    pub file: Option<PathBuf>,
    /// Ambient dimension for calibrations without a fixed one.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true, value_parser = ["immersion", "submersion"])]
    pub direction: Option<String>,
    /// Perturbation amplitude ε for registry models.
    #[arg(long, global = true, value_name = "EPS", allow_negative_numbers = true)]
    pub perturb: Option<f64>,
    /// Points per active axis.
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub restarts: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    pub tol_form: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    pub tol_conf: Option<f64>,
    /// Accept a comass value up to 1 + X.
    #[arg(long, global = true, value_name = "X")]
    pub tol_comass: Option<f64>,
    /// Largest acceptable tension norm.
    #[arg(long, global = true, value_name = "X")]
    pub tol_tension: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    pub fd_step: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// JSON config merged under the flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Structure-constant table for the G2 and Spin(7) forms.
    #[arg(long, global = true, value_name = "FILE")]
    pub convention_table: Option<PathBuf>,
    /// Comma-separated subset of suites for `verify-lemmas`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub suites: Option<Vec<String>>,
}

/// Sample sizes for `verify-lemmas`; see [`SuiteConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSizes {
    pub jets: usize,
    pub exterior_cases: usize,
    pub matrices: usize,
    pub planes: usize,
    pub restarts: usize,
    pub points: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        let d = SuiteConfig::default();
        SuiteSizes {
            jets: d.jets,
            exterior_cases: d.exterior_cases,
            matrices: d.matrices,
            planes: d.planes,
            restarts: d.restarts,
            points: d.points,
        }
    }
}

/// The fully merged configuration, echoed verbatim into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<String>,
    pub jets: Option<PathBuf>,
    pub calibration: Option<String>,
    pub standard: Option<String>,
    pub file: Option<PathBuf>,
    pub dim: Option<usize>,
    pub direction: Option<Direction>,
    pub perturb: f64,
    pub grid: Option<usize>,
    pub restarts: usize,
    pub tolerances: Tolerances,
    pub comass_tol: f64,
    pub tension_tol: f64,
    pub fd_step: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub convention_table: Option<PathBuf>,
    pub suites: Option<Vec<String>>,
    pub suite_sizes: SuiteSizes,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            model: None,
            jets: None,
            calibration: None,
            standard: None,
            file: None,
            dim: None,
            direction: None,
            perturb: 0.0,
            grid: None,
            restarts: 200,
            tolerances: Tolerances::default(),
            comass_tol: 1e-6,
            tension_tol: 1e-4,
            fd_step: 1e-3,
            seed: 0,
            out: None,
            convention_table: None,
            suites: None,
            suite_sizes: SuiteSizes::default(),
        }
    }
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))
}

impl RunConfig {
    /// Config file (if any) under the flags; flags win.
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let mut c = match &flags.config {
            Some(p) => serde_json::from_str(&read(p, "config")?)
                .map_err(|e| CliError::input(format!("config {}: {e}", p.display())))?,
            None => RunConfig::default(),
        };
        c.command = command.name().to_string();
        macro_rules! take {
            ($($f:ident),*) => {$(if flags.$f.is_some() { c.$f = flags.$f; })*};
        }
        take!(model, jets, calibration, standard, file, dim, grid, out, convention_table, suites);
        if let Some(d) = flags.direction {
            c.direction = Some(d.parse().map_err(|e| CliError::input(format!("{e}")))?);
        }
        if let Some(v) = flags.perturb {
            c.perturb = v;
        }
        if let Some(v) = flags.restarts {
            c.restarts = v;
        }
        if let Some(v) = flags.tol_form {
            c.tolerances.form = v;
        }
        if let Some(v) = flags.tol_conf {
            c.tolerances.conformal = v;
        }
        if let Some(v) = flags.tol_comass {
            c.comass_tol = v;
        }
        if let Some(v) = flags.tol_tension {
            c.tension_tol = v;
        }
        if let Some(v) = flags.fd_step {
            c.fd_step = v;
        }
        if let Some(v) = flags.seed {
            c.seed = v;
        }
        if c.grid.is_none() {
            c.grid = Some(command.default_grid());
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.tolerances.validate().map_err(|e| CliError::input(e.to_string()))?;
        for (name, v) in [("comass tolerance", self.comass_tol), ("tension tolerance", self.tension_tol), ("fd step", self.fd_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::input(format!("{name} must be finite and positive")));
            }
        }
        if !self.perturb.is_finite() {
            return Err(CliError::input("perturbation must be finite"));
        }
        if self.grid == Some(0) || self.restarts == 0 {
            return Err(CliError::input("grid and restarts must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or(8)
    }

    pub fn table(&self) -> Result<ConventionTable, CliError> {
        match &self.convention_table {
            None => Ok(ConventionTable::default()),
            Some(p) => ConventionTable::from_json(&read(p, "convention table")?)
                .map_err(|e| CliError::input(format!("convention table {}: {e}", p.display()))),
        }
    }

    pub fn suite_config(&self) -> Result<SuiteConfig, CliError> {
        let s = &self.suite_sizes;
        Ok(SuiteConfig {
            seed: self.seed,
            jets: s.jets,
            exterior_cases: s.exterior_cases,
            matrices: s.matrices,
            planes: s.planes,
            restarts: s.restarts,
            points: s.points,
            tolerances: self.tolerances,
            table: self.table()?,
        })
    }
}
