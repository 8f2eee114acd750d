use std::path::PathBuf;

use clap::Args;
use rovib::pauli::{fit_lq_vs_j, header_for, pauli_decompose_factored, register_filling_js, term_counts_vs_j, term_statistics, CutoffDirection, QubitLayout};

use crate::error::{CliError, CliResult};
use crate::model_source::ModelSource;
use crate::output::{csv_writer, fixed4, sink};

#[derive(Debug, Args)]
pub struct PauliArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub vmax: usize,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    /// Keep only terms with |h| beyond this many cm^-1.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Which side of lambda to keep: above or below.
    #[arg(long, default_value = "above")]
    pub direction: String,
    /// Pauli-sum file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of term counts per Pauli weight.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Fit L_q = c J^b over the register-filling J up to this value.
    #[arg(long)]
    pub fit_max_j: Option<u32>,
    /// CSV of the (J, L_q) points behind the fit.
    #[arg(long, requires = "fit_max_j")]
    pub fit_table: Option<PathBuf>,
}

pub fn run(args: &PauliArgs) -> CliResult<()> {
    let src = ModelSource::load(args.model.as_deref())?;
    let direction: CutoffDirection = args.direction.parse()?;
    let layout = QubitLayout::new(src.model.n_modes(), args.vmax, args.j)?;
    let mut sum = pauli_decompose_factored(&src.model, &src.frame, args.vmax, args.j)?;
    if let Some(lambda) = args.lambda {
        sum = sum.cutoff(lambda, direction)?;
    }
    println!("N_q={} L_q={} non_identity={}", layout.n_qubits(), sum.len(), sum.non_identity_len());

    if let Some(path) = &args.out {
        let mut w = sink(Some(path))?;
        sum.write(&mut w, &header_for(&layout)).map_err(|e| CliError::io(path, e))?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    if !sum.is_empty() {
        let stats = term_statistics(&sum)?;
        let counts: Vec<String> = stats.by_weight.iter().map(|c| c.to_string()).collect();
        println!("by_weight={}", counts.join("/"));
        if let Some(path) = &args.stats {
            let mut out = csv_writer(Some(path))?;
            out.write_record(["weight", "count"])?;
            for (weight, count) in stats.by_weight.iter().enumerate() {
                out.write_record([weight.to_string(), count.to_string()])?;
            }
            out.flush().map_err(|e| CliError::io(path, e))?;
        }
    }
    if let Some(max_j) = args.fit_max_j {
        let js = register_filling_js(max_j);
        let (c, b) = fit_lq_vs_j(&src.model, &src.frame, args.vmax, &js)?;
        println!("fit L_q = {} J^{}", fixed4(c), fixed4(b));
        if let Some(path) = &args.fit_table {
            let mut out = csv_writer(Some(path))?;
            out.write_record(["j", "l_q"])?;
            for (j, l) in term_counts_vs_j(&src.model, &src.frame, args.vmax, &js)? {
                out.write_record([j.to_string(), l.to_string()])?;
            }
            out.flush().map_err(|e| CliError::io(path, e))?;
        }
    }
    Ok(())
}
