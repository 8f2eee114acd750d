use std::path::PathBuf;

use clap::Args;

use crate::error::CliResult;
use crate::model_source::ModelSource;
use crate::output::fixed4;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Model file; the bundled water model if omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

pub fn run(args: &ValidateArgs) -> CliResult<()> {
    let src = ModelSource::load(args.model.as_deref())?;
    src.model.validate()?;
    let [a, b, c] = src.frame.rotational_constants_cm1;
    println!("model: {}", src.describe());
    println!("sha256: {}", src.sha256);
    println!("atoms: {}  modes: {}", src.model.n_atoms(), src.model.n_modes());
    let omegas: Vec<String> = src.model.omega_cm1.iter().map(|w| fixed4(*w)).collect();
    println!("harmonic wavenumbers (cm^-1): {}", omegas.join(" "));
    println!("rotational constants A B C (cm^-1): {} {} {}", fixed4(a), fixed4(b), fixed4(c));
    println!("cubic: {}  quartic: {}", src.model.cubic.len(), src.model.quartic.len());
    println!("ok");
    Ok(())
}
