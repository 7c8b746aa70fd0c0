use std::path::PathBuf;

use crate::poly::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stages, named as they appear in timing reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    PolynomialEvaluation,
    KernelDegreeEstimation,
    KernelEstimation1d,
    KernelEstimation2dFft,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::PolynomialEvaluation => "polynomial_evaluation",
            Stage::KernelDegreeEstimation => "kernel_degree_estimation",
            Stage::KernelEstimation1d => "kernel_estimation_1d",
            Stage::KernelEstimation2dFft => "kernel_estimation_2d_fft",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid image plane: {0}")]
    InvalidPlane(String),

    #[error("sample point {index} has modulus {modulus}, expected 1")]
    NonUnitSamplePoint { index: usize, modulus: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("ill-conditioned null space: gap {gap:e} below threshold {threshold:e}")]
    IllConditioned { gap: f64, threshold: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid kernel width {0}: expected an odd width in 3..=63")]
    InvalidKernelWidth(usize),

    #[error("no coprime kernel pair of width {width} after {retries} draws (seed {seed})")]
    CoprimalityFailure {
        width: usize,
        seed: u64,
        retries: usize,
    },

    #[error("frame of {height}x{width} is smaller than kernel width {kernel_width}")]
    FrameTooSmall {
        height: usize,
        width: usize,
        kernel_width: usize,
    },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("sample {value} outside [0, 1]")]
    RangeExceeded { value: f64 },

    #[error("frame is not quantized")]
    NotQuantized,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel width estimates disagree: z1 axis gives {z1}, z2 axis gives {z2}")]
    InconsistentAxes { z1: usize, z2: usize },

    #[error("ill-conditioned {axis:?} slice {index}: gap {gap:e}")]
    IllConditionedSlice { axis: Axis, index: usize, gap: f64 },

    #[error("degenerate scale {value:e} relative to max {max:e}")]
    DegenerateScales { value: f64, max: f64 },

    #[error("kernel estimate is not real: imaginary energy fraction {fraction:.3e}")]
    NonRealKernel { fraction: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt manifest {path}: {reason}")]
    CorruptManifest { path: PathBuf, reason: String },

    #[error("missing frame {0}")]
    MissingFrame(usize),

    #[error("format violation in {path} at byte {offset}: {reason}")]
    FormatViolation {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("streams do not pair: {0}")]
    PairMismatch(String),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The pipeline stage this error was raised in, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
