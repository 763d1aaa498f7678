//! Egocentric-view vector representation from bounding boxes.

use crate::error::{Error, Result};
use crate::types::{HorDetection, HorImageMeta, VectorEntry, VectorSet};

/// One entry per detection: x is the box center normalized to [-1, 1] across the
/// image width, y is the inverse box height.
pub fn build_hor_vector(dets: &[HorDetection], meta: &HorImageMeta) -> Result<VectorSet> {
    let half = meta.width / 2.0;
    let entries = dets
        .iter()
        .map(|d| {
            if !(d.h > 0.0) {
                return Err(Error::InvalidHeight { id: d.id, h: d.h });
            }
            Ok(VectorEntry {
                source_id: d.id,
                x: ((d.cx - half) / half).clamp(-1.0, 1.0),
                y: 1.0 / d.h,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    VectorSet::new(entries)
}
