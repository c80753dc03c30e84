//! Command implementations behind the `ela-predict` binary, exposed as a
//! library so integration tests can drive the full pipeline in-process.

pub mod commands;
pub mod config;

pub use commands::{
    atomic_write, cmd_evaluate, cmd_explain, cmd_features, cmd_ingest, cmd_simulate,
    compute_feature_matrix, explain_mode, ModeArtifacts,
};
pub use config::{ConfigFile, Profile, RunConfig};
