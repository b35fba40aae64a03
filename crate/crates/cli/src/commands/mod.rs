pub mod fit;
pub mod noise;
pub mod oracle;
pub mod sweep;

use std::path::PathBuf;

use crate::config::RunConfig;

/// Options shared by all subcommands, after config loading.
pub struct Context {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

/// Outcome of a subcommand that completed without a usage error.
pub enum Status {
    Success,
    ToleranceExceeded,
}
