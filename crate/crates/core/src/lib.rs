pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod fieldsim;
pub mod inference;
pub mod quad;
pub mod specfun;

pub use diagnostics::DiagnosticsReport;
pub use engine::{CovarianceTable, LocalProps, ModelParams};
pub use error::{GwmError, Result};
pub use fieldsim::{FieldSample, Grid};
pub use quad::QuadConfig;
