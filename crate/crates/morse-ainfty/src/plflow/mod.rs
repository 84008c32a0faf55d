//! Exact piecewise linear gradient dynamics on triangulated surfaces and the
//! flow-tree counts that define the operations `m_d`.

pub mod assemble;
pub mod decor;
pub mod field;
pub mod geom;
pub mod meshes;
pub mod sets;
pub mod surface;

pub use assemble::*;
pub use decor::Decor;
pub use field::{FlowField, FlowTrace, TriField};
pub use geom::{Pt, Q};
pub use sets::*;
pub use surface::{classify, MeshJson, PLFunction, PLSurface, VertexKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("perturbation failed: {0}")]
    PerturbationFailed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl FlowError {
    pub fn with_context(self, ctx: &str) -> Self {
        match self {
            FlowError::Degenerate(m) => FlowError::Degenerate(format!("{m} ({ctx})")),
            FlowError::DimensionMismatch(m) => FlowError::DimensionMismatch(format!("{m} ({ctx})")),
            FlowError::PerturbationFailed(m) => FlowError::PerturbationFailed(format!("{m} ({ctx})")),
            FlowError::Unsupported(m) => FlowError::Unsupported(format!("{m} ({ctx})")),
            FlowError::Parse(m) => FlowError::Parse(format!("{m} ({ctx})")),
        }
    }
}
