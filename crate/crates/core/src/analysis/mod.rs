//! Orbit asymptotics, basin classification, rasters and the verification
//! suite.

pub mod asymptotics;
pub mod classify;
pub mod raster;
pub mod verify;

use thiserror::Error;

use crate::fatou::FatouError;
use crate::regions::RegionError;

pub use asymptotics::{asymptotics, AsymptoticSample, AsymptoticsReport, InverseLogFit};
pub use classify::{Classification, Classifier, Verdict};
pub use raster::{raster, Raster, Slice};
pub use verify::{verify, Suite, VerifyConfig, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least 3 checkpoints, got {0}")]
    TooFewCheckpoints(usize),
    #[error("trace has {got} points, checkpoint {need} requested")]
    TraceTooShort { need: usize, got: usize },
    #[error("orbit escaped after {0} points")]
    Escaped(usize),
    #[error("trace carries no curve coordinate")]
    NoCurve,
    #[error("grid {width}x{height} is smaller than 2x2")]
    GridTooSmall { width: usize, height: usize },
    #[error(transparent)]
    Fatou(#[from] FatouError),
    #[error(transparent)]
    Region(#[from] RegionError),
}
