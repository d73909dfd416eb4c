use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, FloquetError>;

#[derive(Debug, Clone, Error)]
pub enum FloquetError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular monodromy (smallest |eigenvalue| {smallest:e})")]
    SingularMonodromy { smallest: f64 },

    #[error("log branch ambiguity: eigenvalue {eigenvalue} lies on the negative real axis{}", anchor_suffix(*.t0))]
    BranchAmbiguity { eigenvalue: Complex64, t0: Option<f64> },

    #[error("propagation did not converge at {steps} steps (last-two-iterate difference {difference:e})")]
    NonConvergence { steps: usize, difference: f64 },

    #[error("integration accuracy loss: trace drift {drift:e}")]
    AccuracyLoss { drift: f64 },

    #[error("insufficient truncation: residual {residual:e}")]
    InsufficientTruncation { residual: f64 },

    #[error("quadrature did not converge: residual {residual:e} at {points} nodes")]
    Quadrature { residual: f64, points: usize },

    #[error("micromotion gauge ambiguity (relative smallest singular value {sigma:e})")]
    GaugeAmbiguity { sigma: f64 },

    #[error("non-invertible dissipative propagator (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("degenerate steady space: singular value separation {separation:e} below 1e3")]
    DegenerateSteadySpace { separation: f64 },

    #[error("geometry formula inconsistency in {component}: closed form {closed_form}, quadrature {quadrature}")]
    GeometryInconsistency {
        component: &'static str,
        closed_form: f64,
        quadrature: f64,
    },

    #[error("trace preservation violated: defect {0:e}")]
    TracePreservation(f64),

    #[error("expectation value has imaginary part {0:e}")]
    NonHermitianExpectation(f64),

    #[error("decomposition failed: {0}")]
    Decomposition(&'static str),
}

fn anchor_suffix(t0: Option<f64>) -> String {
    match t0 {
        Some(t0) => format!(" (anchor t0 = {t0}; another anchor may move the spectrum off the cut)"),
        None => String::new(),
    }
}
