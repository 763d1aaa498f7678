//! Association and scoring over whole datasets.

use rayon::prelude::*;

use crate::error::Error;
use crate::evaluator::{aggregate, score_frame, BatchMetrics, FrameMetrics};
use crate::ingestion::FramePair;
use crate::locator::{associate, cmc_ranking, AssociationResult};
use crate::types::Config;

#[derive(Debug)]
pub struct FrameReport {
    pub frame_id: String,
    pub outcome: Result<AssociationResult, Error>,
    /// Present when the frame has non-empty ground truth.
    pub metrics: Option<FrameMetrics>,
}

impl FrameReport {
    pub fn is_feasible(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Associate and score every frame. Reports come back in input order.
///
/// A frame that cannot be associated still gets metrics: nothing predicted and
/// the true wearer ranked last.
pub fn run_frames(frames: &[FramePair], cfg: &Config) -> Vec<FrameReport> {
    frames
        .par_iter()
        .map(|frame| {
            let outcome = associate(&frame.top, &frame.hor, &frame.meta, cfg);
            let metrics = frame.ground_truth.as_ref().and_then(|gt| {
                let n = frame.top.len();
                let scored = match &outcome {
                    Ok(res) => score_frame(
                        &frame.frame_id,
                        &res.best.pairs,
                        &gt.pairs,
                        Some(frame.top[res.hypothesis.wearer_index].id),
                        gt.wearer,
                        cmc_ranking(res, gt.wearer).unwrap_or(n + 1),
                        n,
                    ),
                    Err(_) => score_frame(&frame.frame_id, &[], &gt.pairs, None, gt.wearer, n + 1, n),
                };
                scored.ok()
            });
            FrameReport {
                frame_id: frame.frame_id.clone(),
                outcome,
                metrics,
            }
        })
        .collect()
}

/// Per-frame metrics of the scored frames and their aggregate, if any frame was scored.
pub fn summarize(reports: &[FrameReport]) -> Option<(Vec<FrameMetrics>, BatchMetrics)> {
    let frames: Vec<FrameMetrics> = reports.iter().filter_map(|r| r.metrics.clone()).collect();
    let summary = aggregate(&frames).ok()?;
    Some((frames, summary))
}
