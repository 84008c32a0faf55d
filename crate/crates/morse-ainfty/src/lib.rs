//! Exact Morse complexes and A-infinity operations on triangulated surfaces.
//!
//! Products `m_d` are counted as signed gradient flow trees; every count is
//! an integer obtained with rational arithmetic only.

pub mod ainfty;
pub mod cli;
pub mod continuation;
pub mod morse;
pub mod plflow;
pub mod signs;
pub mod trees;
