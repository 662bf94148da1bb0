use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("radius {r} outside the domain [0, {r_bar})")]
    Domain { r: f64, r_bar: f64 },

    #[error("singular point at r = {r}: {what}")]
    SingularPoint { r: f64, what: &'static str },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("inadmissible parameters for {family}: violates {bound}")]
    Parameter { family: String, bound: String },

    #[error("degenerate profile: {0}")]
    Singularity(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flow exhausted at t = {t}: no active nodes left")]
    FlowExhausted { t: f64 },

    #[error("unknown model family `{0}`")]
    UnknownFamily(String),

    #[error("table error: {0}")]
    Table(String),
}

impl GeomError {
    /// True for errors that signal a violated precondition rather than a numerical failure.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            GeomError::Parameter { .. }
                | GeomError::Hypothesis(_)
                | GeomError::NotApplicable(_)
                | GeomError::Domain { .. }
                | GeomError::Singularity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
