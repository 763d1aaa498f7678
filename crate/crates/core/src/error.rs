use thiserror::Error;

use crate::types::SubjectId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("wearer index {0} out of range for {1} overhead detections")]
    WearerOutOfRange(usize, usize),
    #[error("subject coincides with the camera position")]
    CoincidentPoint,
    #[error("non-positive box height {h} for subject {id}")]
    InvalidHeight { id: SubjectId, h: f64 },
    #[error("duplicate source id {0} in vector set")]
    DuplicateSourceId(SubjectId),
    #[error("no inlier pairs for scale estimation")]
    NoInliers,
    #[error("dissimilarity matrix is empty")]
    EmptyMatrix,
    #[error("empty detection list: {0}")]
    EmptyInput(&'static str),
    #[error("every hypothesis yields an infinite matching cost")]
    NoFeasibleHypothesis,
    #[error("true wearer {0} is not among the ranked candidates")]
    UnknownWearer(SubjectId),
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid simulator parameters: {0}")]
    InvalidParams(String),
    #[error("schema error in {location}: {message}")]
    Schema { location: String, message: String },
    #[error("duplicate {view} id {id} in frame {frame}")]
    DuplicateId {
        frame: String,
        view: &'static str,
        id: SubjectId,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
