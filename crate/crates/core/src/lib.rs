//! Cross-view association of people seen from an overhead drone and from a
//! head-mounted camera.
//!
//! Both views are reduced to sorted (lateral, depth) vector sets. The overhead set
//! depends on the unknown wearer and view angle, so every candidate wearer and
//! every angle on a grid is tried; each hypothesis is scored by aligning the two
//! sets, and the cheapest one gives the wearer, the view angle and the pairs.

pub mod batch;
pub mod error;
pub mod evaluator;
pub mod horview;
pub mod ingestion;
pub mod locator;
pub mod matcher;
pub mod simulator;
pub mod topview;
pub mod types;

pub use error::{Error, Result};
pub use locator::{associate, cmc_ranking, AssociationResult, CandidateScore};
pub use types::{
    CameraHypothesis, Config, HorDetection, HorImageMeta, MatchResult, Point2, SubjectId,
    TopDetection, VectorEntry, VectorSet, VectorVariant,
};
