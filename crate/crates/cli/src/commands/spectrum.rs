use std::path::PathBuf;

use clap::Args;
use rovib::operators::asymmetric_top_solve;
use rovib::qsci::assign_labels;
use rovib::watson::dense_spectrum;
use rovib::{GroupMask, RovibBasisState, WatsonHamiltonian};

use crate::error::{CliError, CliResult};
use crate::model_source::ModelSource;
use crate::output::{csv_writer, fixed4};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Molecule model file; the bundled water model if omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub vmax: usize,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    /// Term groups, e.g. "RR+HO+ANHARM" or "FULL".
    #[arg(long, default_value = "FULL")]
    pub groups: String,
    #[arg(long, default_value_t = 10)]
    pub n_lowest: usize,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SpectrumArgs) -> CliResult<()> {
    let src = ModelSource::load(args.model.as_deref())?;
    let mask = GroupMask::parse(&args.groups).ok_or_else(|| CliError::Usage(format!("unknown term groups {:?}", args.groups)))?;
    let w = WatsonHamiltonian::new(&src.model, &src.frame, args.vmax, args.j)?;
    let eig = dense_spectrum(&w.build(mask)?, args.n_lowest)?;
    let basis: Vec<RovibBasisState> = w.space().states().collect();
    let rotor = asymmetric_top_solve(&src.frame, args.j);
    log::info!("spectrum of {} with {mask}, dimension {}", src.describe(), w.space().dim());

    let mut out = csv_writer(args.out.as_deref())?;
    out.write_record(["index", "energy_cm1", "delta_cm1", "parity", "label", "label_overlap"])?;
    let lowest = eig.values.first().copied().unwrap_or(0.0);
    for i in 0..eig.len() {
        let v = eig.vector(i);
        let label = assign_labels(&v, &basis, &rotor);
        let dominant = (0..v.len()).max_by(|&a, &b| v[a].norm_sqr().total_cmp(&v[b].norm_sqr())).unwrap_or(0);
        let parity = w.space().parity(&basis[dominant]);
        out.write_record([
            i.to_string(),
            fixed4(eig.values[i]),
            fixed4(eig.values[i] - lowest),
            parity.to_string(),
            label.to_string(),
            fixed4(label.overlap),
        ])?;
    }
    out.flush().map_err(|e| CliError::io(args.out.clone().unwrap_or_default(), e))?;
    Ok(())
}
