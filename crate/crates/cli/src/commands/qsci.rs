use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Args;
use rovib::qsci::{run_pipeline, solve_shared_basis, PipelineConfig, PipelineRun};
use rovib::trotter::TermOrder;
use rovib::units::HARTREE_PER_WAVENUMBER;
use rovib::WatsonHamiltonian;

use crate::config::{QsciConfig, QsciFile, QsciOverrides, RunManifest, TrotterRecord};
use crate::error::{CliError, CliResult};
use crate::model_source::ModelSource;
use crate::output::{csv_writer, fixed4, optional4, parse_references, sink, write_text};

#[derive(Debug, Args)]
pub struct QsciArgs {
    /// TOML run configuration; a manifest from an earlier run also works.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub vmax: Option<usize>,
    #[arg(long)]
    pub j: Option<u32>,
    /// Comma-separated vibrational labels, e.g. "000,010,020,100,001".
    #[arg(long)]
    pub references: Option<String>,
    /// Skip the dense reference spectrum.
    #[arg(long)]
    pub no_exact: bool,
    /// Fixed-tau schedules: time step in atomic units.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fixed-tau schedules: run N_ST = 0..=max_steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Shots per distribution; 0 uses exact probabilities.
    #[arg(long)]
    pub n_shot: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trotter cutoff in cm^-1.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Term order inside a Trotter step: lexicographic, descending or ascending.
    #[arg(long)]
    pub order: Option<String>,
}

impl QsciArgs {
    fn overrides(&self) -> CliResult<QsciOverrides> {
        let order = self.order.as_deref().map(str::parse::<TermOrder>).transpose()?;
        let references = self
            .references
            .as_deref()
            .map(|r| parse_references(r).map(|v| v.iter().map(|s| s.vib_label()).collect()))
            .transpose()?;
        Ok(QsciOverrides {
            model: self.model.clone(),
            vmax: self.vmax,
            j: self.j,
            references,
            no_exact: self.no_exact,
            tau_au: self.tau,
            max_steps: self.max_steps,
            epsilon: self.epsilon,
            n_shot: self.n_shot,
            seed: self.seed,
            lambda_cm1: self.lambda,
            order,
        })
    }
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn run(args: &QsciArgs) -> CliResult<()> {
    let file = args.config.as_deref().map(QsciFile::load).transpose()?;
    let config = QsciConfig::resolve(file.as_ref(), &args.overrides()?)?;
    let src = ModelSource::load(config.model.as_deref())?;
    if let Some(want) = &config.expected_sha256 {
        if *want != src.sha256 {
            return Err(CliError::Usage(format!(
                "model {} has sha256 {}, the configuration expects {want}",
                src.describe(),
                src.sha256
            )));
        }
    }
    log::info!("energies in cm^-1 (1 cm^-1 = {HARTREE_PER_WAVENUMBER} E_h), times in atomic units");
    let references = parse_references(&config.references.join(","))?;
    let pipeline = PipelineConfig {
        vmax: config.vmax,
        j: config.j,
        references,
        schedule: config.schedule.clone(),
        exact: config.exact,
    };
    create_dir(&args.out_dir)?;
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        model_sha256: src.sha256.clone(),
        config,
        trotter: TrotterRecord {
            n_rotations: 0,
            order_log: Vec::new(),
        },
    };
    let result = run_pipeline(&src.model, &src.frame, &pipeline).map_err(CliError::from);
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            write_text(&args.out_dir.join("manifest.toml"), &manifest.to_toml()?)?;
            write_text(&args.out_dir.join("FAILED"), &format!("{e}\n"))?;
            return Err(e);
        }
    };
    manifest.trotter = TrotterRecord {
        n_rotations: run.order_log.len(),
        order_log: run.order_log.clone(),
    };
    write_text(&args.out_dir.join("manifest.toml"), &manifest.to_toml()?)?;
    write_results(&run, &args.out_dir.join("results.csv"))?;
    write_distributions(&run, &args.out_dir.join("distributions"))?;
    if run.config.j == 0 {
        write_omega_big(&run, &src, &args.out_dir.join("omega_big.csv"))?;
    }
    log::info!("wrote {} schedule points to {}", run.points.len(), args.out_dir.display());
    Ok(())
}

fn write_results(run: &PipelineRun, path: &Path) -> CliResult<()> {
    let mut out = csv_writer(Some(path))?;
    out.write_record([
        "schedule_point",
        "tau_au",
        "n_steps",
        "reference",
        "omega_size",
        "raw_energy_cm1",
        "combined_energy_cm1",
        "delta_energy_cm1",
        "label",
        "exact_energy_cm1",
        "error_cm1",
    ])?;
    for (pi, p) in run.points.iter().enumerate() {
        for level in &p.solution.levels {
            out.write_record([
                pi.to_string(),
                fixed4(p.point.tau_au),
                p.point.n_steps.to_string(),
                level.reference.vib_label(),
                level.omega_size.to_string(),
                fixed4(level.raw_energy_cm1),
                fixed4(level.combined_energy_cm1),
                optional4(run.exact_ground_cm1.map(|e0| level.combined_energy_cm1 - e0)),
                level.label.to_string(),
                optional4(level.exact_energy_cm1),
                optional4(level.error_cm1()),
            ])?;
        }
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

fn write_distributions(run: &PipelineRun, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    for (pi, p) in run.points.iter().enumerate() {
        for (r, d) in run.config.references.iter().zip(&p.distributions) {
            let path = dir.join(format!("point{pi:02}_{}.txt", r.vib_label()));
            let mut w = sink(Some(&path))?;
            d.write_dump(&mut w).map_err(|e| CliError::io(&path, e))?;
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}

/// Energies from one diagonalization over the union of the sampled bases.
fn write_omega_big(run: &PipelineRun, src: &ModelSource, path: &Path) -> CliResult<()> {
    let w = WatsonHamiltonian::new(&src.model, &src.frame, run.config.vmax, 0)?;
    let mut out = csv_writer(Some(path))?;
    out.write_record(["schedule_point", "omega_big_size", "reference", "energy_cm1", "delta_energy_cm1"])?;
    for pi in 0..run.points.len() {
        let big = run.omega_big(pi);
        let energies = solve_shared_basis(&w, &run.config.references, &big)?;
        for (r, e) in run.config.references.iter().zip(energies) {
            out.write_record([
                pi.to_string(),
                big.len().to_string(),
                r.vib_label(),
                fixed4(e[0]),
                optional4(run.exact_ground_cm1.map(|e0| e[0] - e0)),
            ])?;
        }
    }
    out.flush().map_err(|e| CliError::io(path, e))
}
