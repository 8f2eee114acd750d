//! Run configuration for `qsci`: defaults, then the config file, then flags.
//! A run manifest is itself a valid config file, which is how runs replay.

use std::path::{Path, PathBuf};

use rovib::qsci::{Schedule, ScheduleKind, DEFAULT_REFERENCES};
use rovib::trotter::TermOrder;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Schedule fields as they may appear, partially, in a file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub mode: Option<String>,
    pub tau_au: Option<f64>,
    pub steps: Option<Vec<usize>>,
    pub n_steps: Option<usize>,
    pub taus_au: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub n_shot: Option<u64>,
    pub seed: Option<u64>,
    pub lambda_cm1: Option<f64>,
    pub order: Option<TermOrder>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QsciFile {
    pub model: Option<PathBuf>,
    pub model_sha256: Option<String>,
    pub vmax: Option<usize>,
    pub j: Option<u32>,
    pub references: Option<Vec<String>>,
    pub exact: Option<bool>,
    #[serde(default)]
    pub schedule: ScheduleFile,
    // Written by manifests; only logged on input.
    pub tool_version: Option<String>,
    pub created_unix: Option<u64>,
    pub trotter: Option<toml::Table>,
}

impl QsciFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: QsciFile = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        if let Some(version) = &file.tool_version {
            let rotations = file.trotter.as_ref().and_then(|t| t.get("n_rotations")).and_then(|v| v.as_integer());
            log::info!(
                "replaying a manifest written by version {version} at {} (unix), {} Trotter rotations recorded",
                file.created_unix.unwrap_or(0),
                rotations.unwrap_or(0)
            );
        }
        Ok(file)
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default)]
pub struct QsciOverrides {
    pub model: Option<PathBuf>,
    pub vmax: Option<usize>,
    pub j: Option<u32>,
    pub references: Option<Vec<String>>,
    pub no_exact: bool,
    pub tau_au: Option<f64>,
    pub max_steps: Option<usize>,
    pub epsilon: Option<f64>,
    pub n_shot: Option<u64>,
    pub seed: Option<u64>,
    pub lambda_cm1: Option<f64>,
    pub order: Option<TermOrder>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsciConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Hash the model must have, when replaying.
    #[serde(skip)]
    pub expected_sha256: Option<String>,
    pub vmax: usize,
    pub j: u32,
    pub references: Vec<String>,
    pub exact: bool,
    pub schedule: Schedule,
}

impl Default for QsciConfig {
    fn default() -> Self {
        QsciConfig {
            model: None,
            expected_sha256: None,
            vmax: 3,
            j: 0,
            references: DEFAULT_REFERENCES.iter().map(|s| s.to_string()).collect(),
            exact: true,
            schedule: Schedule::fixed_tau(10),
        }
    }
}

fn merge_schedule(base: Schedule, file: &ScheduleFile) -> CliResult<Schedule> {
    let mut s = match file.mode.as_deref() {
        None => base,
        Some("fixed-tau") if matches!(base.kind, ScheduleKind::FixedTau { .. }) => base,
        Some("fixed-tau") => Schedule::fixed_tau(10),
        Some("fixed-steps") if matches!(base.kind, ScheduleKind::FixedSteps { .. }) => base,
        Some("fixed-steps") => Schedule::fixed_steps(5),
        Some(other) => return Err(CliError::Usage(format!("unknown schedule mode {other:?}"))),
    };
    match &mut s.kind {
        ScheduleKind::FixedTau { tau_au, steps } => {
            if file.n_steps.is_some() || file.taus_au.is_some() {
                return Err(CliError::Usage("n_steps and taus_au belong to the fixed-steps mode".into()));
            }
            if let Some(t) = file.tau_au {
                *tau_au = t;
            }
            if let Some(v) = &file.steps {
                *steps = v.clone();
            }
        }
        ScheduleKind::FixedSteps { n_steps, taus_au } => {
            if file.tau_au.is_some() || file.steps.is_some() {
                return Err(CliError::Usage("tau_au and steps belong to the fixed-tau mode".into()));
            }
            if let Some(n) = file.n_steps {
                *n_steps = n;
            }
            if let Some(v) = &file.taus_au {
                *taus_au = v.clone();
            }
        }
    }
    if let Some(x) = file.epsilon {
        s.epsilon = x;
    }
    if let Some(x) = file.n_shot {
        s.n_shot = x;
    }
    if let Some(x) = file.seed {
        s.seed = x;
    }
    if let Some(x) = file.lambda_cm1 {
        s.lambda_cm1 = x;
    }
    if let Some(x) = file.order {
        s.order = x;
    }
    Ok(s)
}

impl QsciConfig {
    /// Defaults, overlaid by `file`, overlaid by `flags`.
    pub fn resolve(file: Option<&QsciFile>, flags: &QsciOverrides) -> CliResult<Self> {
        let mut c = QsciConfig::default();
        if let Some(f) = file {
            if f.model.is_some() {
                c.model = f.model.clone();
            }
            c.expected_sha256 = f.model_sha256.clone();
            c.vmax = f.vmax.unwrap_or(c.vmax);
            c.j = f.j.unwrap_or(c.j);
            c.references = f.references.clone().unwrap_or(c.references);
            c.exact = f.exact.unwrap_or(c.exact);
            c.schedule = merge_schedule(c.schedule, &f.schedule)?;
        }
        if flags.model.is_some() {
            c.model = flags.model.clone();
            c.expected_sha256 = None;
        }
        c.vmax = flags.vmax.unwrap_or(c.vmax);
        c.j = flags.j.unwrap_or(c.j);
        if let Some(r) = &flags.references {
            c.references = r.clone();
        }
        if flags.no_exact {
            c.exact = false;
        }
        let flag_schedule = ScheduleFile {
            tau_au: flags.tau_au,
            steps: flags.max_steps.map(|n| (0..=n).collect()),
            epsilon: flags.epsilon,
            n_shot: flags.n_shot,
            seed: flags.seed,
            lambda_cm1: flags.lambda_cm1,
            order: flags.order,
            ..ScheduleFile::default()
        };
        c.schedule = merge_schedule(c.schedule, &flag_schedule)?;
        c.schedule.validate()?;
        Ok(c)
    }
}

/// Everything needed to rerun a qsci invocation; also a valid config file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub created_unix: u64,
    pub model_sha256: String,
    #[serde(flatten)]
    pub config: QsciConfig,
    pub trotter: TrotterRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrotterRecord {
    pub n_rotations: usize,
    /// "coefficient string" per rotation, in applied order.
    pub order_log: Vec<String>,
}

impl RunManifest {
    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Usage(format!("cannot serialize manifest: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flags_then_file_then_defaults() {
        let file: QsciFile = toml::from_str(
            r#"
            vmax = 5
            j = 1
            [schedule]
            tau_au = 12.5
            seed = 4
            order = "descending"
            "#,
        )
        .unwrap();
        let flags = QsciOverrides {
            j: Some(2),
            seed: Some(9),
            ..QsciOverrides::default()
        };
        let c = QsciConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!(c.vmax, 5);
        assert_eq!(c.j, 2);
        assert_eq!(c.schedule.seed, 9);
        assert_eq!(c.schedule.order, TermOrder::DescendingMagnitude);
        assert_eq!(c.schedule.kind, ScheduleKind::FixedTau { tau_au: 12.5, steps: (0..=10).collect() });
        assert_eq!(QsciConfig::resolve(None, &QsciOverrides::default()).unwrap(), QsciConfig::default());
    }

    #[test]
    fn mode_switch_and_conflicts() {
        let file: QsciFile = toml::from_str("[schedule]\nmode = \"fixed-steps\"\ntaus_au = [0.0, 20.0]\n").unwrap();
        let c = QsciConfig::resolve(Some(&file), &QsciOverrides::default()).unwrap();
        assert_eq!(c.schedule.kind, ScheduleKind::FixedSteps { n_steps: 1, taus_au: vec![0.0, 20.0] });
        let bad: QsciFile = toml::from_str("[schedule]\nmode = \"fixed-steps\"\ntau_au = 3.0\n").unwrap();
        assert!(QsciConfig::resolve(Some(&bad), &QsciOverrides::default()).is_err());
        assert!(toml::from_str::<QsciFile>("vmaks = 3\n").is_err());
    }

    #[test]
    fn manifest_reads_back_as_config() {
        let config = QsciConfig::default();
        let manifest = RunManifest {
            tool_version: "0.1.0".into(),
            created_unix: 1,
            model_sha256: "ab".into(),
            config: config.clone(),
            trotter: TrotterRecord {
                n_rotations: 1,
                order_log: vec!["1.5 XIIIII".into()],
            },
        };
        let file: QsciFile = toml::from_str(&manifest.to_toml().unwrap()).unwrap();
        let back = QsciConfig::resolve(Some(&file), &QsciOverrides::default()).unwrap();
        assert_eq!(back.schedule, config.schedule);
        assert_eq!(back.references, config.references);
        assert_eq!(back.expected_sha256.as_deref(), Some("ab"));
    }
}
