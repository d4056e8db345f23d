use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid --{field}: {message}")]
    Field { field: &'static str, message: String },

    #[error("config file: {0}")]
    File(String),

    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error(
        "zero-forcing schemes need K = M*n_r <= n_s, but {users} users x {per_user} receive harmonics = {streams} streams exceed n_s = {harmonics}"
    )]
    Infeasible {
        users: usize,
        per_user: usize,
        streams: usize,
        harmonics: usize,
    },

    #[error("unknown preset {0:?}; expected one of fig3, fig4, fig5, fig6, fig7, fig8")]
    UnknownPreset(String),

    #[error(transparent)]
    Model(#[from] holosim_core::Error),
}

impl ConfigError {
    pub fn field(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field,
            message: message.into(),
        }
    }
}
