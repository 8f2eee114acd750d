use std::path::{Path, PathBuf};

use rovib::{DerivedFrame, MoleculeModel};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A loaded model together with where it came from.
pub struct ModelSource {
    pub model: MoleculeModel,
    pub frame: DerivedFrame,
    pub path: Option<PathBuf>,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ModelSource {
    /// The file at `path`, or the bundled water model.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let (text, path) = match path {
            Some(p) => (std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?, Some(p.to_path_buf())),
            None => (MoleculeModel::bundled_h2o_text().to_owned(), None),
        };
        let model = MoleculeModel::from_toml_str(&text)?;
        let frame = DerivedFrame::new(&model)?;
        Ok(ModelSource {
            model,
            frame,
            path,
            sha256: sha256_hex(text.as_bytes()),
        })
    }

    pub fn describe(&self) -> String {
        match &self.path {
            Some(p) => p.display().to_string(),
            None => "bundled H2O".into(),
        }
    }
}
