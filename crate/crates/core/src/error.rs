use thiserror::Error;

/// Errors raised by the field, fluid and solver kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NledError {
    /// A precondition on form degrees, normalisation or argument shape was violated.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// `Δ(X, Y)` dropped to (or below) the admissible floor: the field is beyond the
    /// Born-Infeld bound.
    #[error("field strength beyond the Born-Infeld bound (Delta = {delta:e}){}", cell_suffix(*.cell))]
    FieldBoundExceeded { delta: f64, cell: Option<usize> },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// `ρ + p = 0`, the fluid has no inertia to accelerate.
    #[error("degenerate inertia: rho + p = {0:e}")]
    DegenerateInertia(f64),

    /// Failure inside a time step, tagged with where it happened.
    #[error("step {step}, stage {stage}: {source}")]
    InStep {
        step: usize,
        stage: usize,
        #[source]
        source: Box<NledError>,
    },
}

fn cell_suffix(cell: Option<usize>) -> String {
    match cell {
        Some(i) => format!(" at cell {i}"),
        None => String::new(),
    }
}

impl NledError {
    pub(crate) fn at_cell(self, i: usize) -> Self {
        match self {
            NledError::FieldBoundExceeded { delta, cell: None } => {
                NledError::FieldBoundExceeded { delta, cell: Some(i) }
            }
            other => other,
        }
    }
}

impl NledError {
    /// The underlying error with step annotations removed.
    pub fn root(&self) -> &NledError {
        match self {
            NledError::InStep { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_step(self, step: usize, stage: usize) -> Self {
        NledError::InStep { step, stage, source: Box::new(self) }
    }
}

pub type Result<T, E = NledError> = std::result::Result<T, E>;
