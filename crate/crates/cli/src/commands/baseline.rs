use std::path::PathBuf;

use clap::Args;
use rovib::baselines::{greedy_combined, optimal_greedy, pt1_sampling, pt2_energies, random_baseline, BaselineMethod, BaselineReport};
use rovib::watson::dense_spectrum;
use rovib::{GroupMask, WatsonHamiltonian};

use crate::error::{CliError, CliResult};
use crate::model_source::ModelSource;
use crate::output::{csv_writer, fixed4, optional4, parse_references};

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// pt2, pt1, greedy or random.
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub vmax: usize,
    #[arg(long, default_value = "000,010,020,100,001")]
    pub references: String,
    /// Basis size for greedy and random.
    #[arg(long, default_value_t = 20)]
    pub size: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Selection threshold for pt1.
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Greedy only: CSV of the per-size energies of each reference.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

pub fn run(args: &BaselineArgs) -> CliResult<()> {
    let method: BaselineMethod = args.method.parse()?;
    let src = ModelSource::load(args.model.as_deref())?;
    let (model, frame) = (&src.model, &src.frame);
    let references = parse_references(&args.references)?;
    let report = match method {
        BaselineMethod::Pt2 => BaselineReport::from_pt2(&pt2_energies(model, frame, args.vmax, &references)?, args.vmax)?,
        BaselineMethod::Pt1 => BaselineReport::from_solution(method, &pt1_sampling(model, frame, args.vmax, &references, args.epsilon)?)?,
        BaselineMethod::Greedy => {
            if let Some(path) = &args.curve {
                let mut out = csv_writer(Some(path))?;
                out.write_record(["reference", "omega_size", "energy_cm1", "added_state"])?;
                for r in &references {
                    let curve = optimal_greedy(model, frame, args.vmax, r, args.size)?;
                    for (i, (e, s)) in curve.energies_cm1.iter().zip(&curve.added).enumerate() {
                        out.write_record([r.vib_label(), (i + 1).to_string(), fixed4(*e), s.vib_label()])?;
                    }
                    if !curve.ties.is_empty() {
                        log::info!("greedy {r}: ties broken by index at sizes {:?}", curve.ties);
                    }
                }
                out.flush().map_err(|e| CliError::io(path, e))?;
            }
            BaselineReport::from_solution(method, &greedy_combined(model, frame, args.vmax, &references, args.size)?)?
        }
        BaselineMethod::Random => BaselineReport::from_random(&random_baseline(model, frame, args.vmax, &references, args.size, args.trials, args.seed)?)?,
    };
    let w0 = WatsonHamiltonian::new(model, frame, args.vmax, 0)?;
    let ground = dense_spectrum(&w0.build(GroupMask::FULL)?, 1).ok().map(|e| e.values[0]);

    let mut out = csv_writer(args.out.as_deref())?;
    out.write_record(["method", "reference", "omega_size", "energy_cm1", "delta_energy_cm1", "std_cm1"])?;
    for row in &report.rows {
        out.write_record([
            report.method.tag().to_string(),
            row.reference.vib_label(),
            row.basis_size.to_string(),
            fixed4(row.energy_cm1),
            optional4(ground.map(|g| row.energy_cm1 - g)),
            optional4(row.std_cm1),
        ])?;
    }
    out.flush().map_err(|e| CliError::io(args.out.clone().unwrap_or_default(), e))
}
