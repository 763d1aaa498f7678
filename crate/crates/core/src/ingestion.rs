//! Frame-pair datasets and configuration files.
//!
//! Datasets are JSON documents of the form
//!
//! ```json
//! {"frames": [{"id": "f0",
//!              "top": [{"id": 0, "x": 12.5, "y": 40.0}],
//!              "hor": [{"id": 1000, "cx": 960.0, "h": 210.0}],
//!              "hor_width": 1920.0,
//!              "gt_pairs": [[0, 1000]],
//!              "gt_wearer": 3}]}
//! ```
//!
//! A frame may give raw detector boxes (`hor_boxes`) plus annotated boxes
//! (`hor_annotations`) instead of `hor`; the raw boxes then take their ids from
//! the annotations by IoU. Angles in configuration files are degrees.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{simulate_batch, RenderedFrame, SimulationParams};
use crate::types::{
    Config, HorDetection, HorImageMeta, Point2, SubjectId, TopDetection, VectorVariant,
};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub pairs: Vec<(SubjectId, SubjectId)>,
    pub wearer: SubjectId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    pub frame_id: String,
    pub top: Vec<TopDetection>,
    pub hor: Vec<HorDetection>,
    pub meta: HorImageMeta,
    pub ground_truth: Option<GroundTruth>,
}

impl FramePair {
    pub fn from_rendered(frame_id: String, r: RenderedFrame) -> Self {
        Self {
            frame_id,
            top: r.top,
            hor: r.hor,
            meta: r.meta,
            ground_truth: Some(GroundTruth {
                pairs: r.gt_pairs,
                wearer: r.wearer,
            }),
        }
    }
}

/// Frame id used for the `index`-th simulated scene.
pub fn scene_frame_id(index: usize) -> String {
    format!("scene_{index:06}")
}

/// A simulated dataset of `n` frames, see [`crate::simulator::simulate_batch`].
pub fn simulate_dataset(params: &SimulationParams, n: usize, seed: u64) -> Result<Vec<FramePair>> {
    Ok(simulate_batch(params, n, seed)?
        .into_iter()
        .enumerate()
        .map(|(i, (_, frame))| FramePair::from_rendered(scene_frame_id(i), frame))
        .collect())
}

/// Axis-aligned box in image pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        (self.x2 - self.x1).max(0.0) * (self.y2 - self.y1).max(0.0)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(0.0);
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(0.0);
        let inter = w * h;
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    pub fn to_hor_detection(&self, id: SubjectId) -> HorDetection {
        HorDetection {
            id,
            cx: (self.x1 + self.x2) / 2.0,
            h: self.y2 - self.y1,
        }
    }
}

/// Give raw boxes the ids of overlapping annotated boxes.
///
/// Candidate (raw, annotated) pairs with IoU strictly above `threshold` are taken
/// greedily by descending IoU; each raw box and each annotation is used at most
/// once. Raw boxes left without a partner are dropped. Output follows raw order.
pub fn resolve_by_iou(
    raw: &[BoundingBox],
    annotated: &[(SubjectId, BoundingBox)],
    threshold: f64,
) -> Vec<(SubjectId, BoundingBox)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (r, rb) in raw.iter().enumerate() {
        for (a, (_, ab)) in annotated.iter().enumerate() {
            let iou = rb.iou(ab);
            if iou > threshold {
                candidates.push((iou, r, a));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut raw_used = vec![None; raw.len()];
    let mut ann_used = vec![false; annotated.len()];
    for (_, r, a) in candidates {
        if raw_used[r].is_none() && !ann_used[a] {
            raw_used[r] = Some(a);
            ann_used[a] = true;
        }
    }
    raw_used
        .iter()
        .enumerate()
        .filter_map(|(r, a)| a.map(|a| (annotated[a].0, raw[r])))
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    frames: Vec<FrameRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    id: String,
    top: Vec<TopRecord>,
    #[serde(default)]
    hor: Vec<HorRecord>,
    hor_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hor_boxes: Option<Vec<BoundingBox>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hor_annotations: Option<Vec<AnnotatedBox>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    iou_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gt_pairs: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt_wearer: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopRecord {
    id: u64,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorRecord {
    id: u64,
    cx: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotatedBox {
    id: u64,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        location: location.into(),
        message: message.into(),
    }
}

fn check_unique(frame: &str, view: &'static str, ids: impl Iterator<Item = SubjectId>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId {
                frame: frame.to_string(),
                view,
                id,
            });
        }
    }
    Ok(())
}

impl FrameRecord {
    fn into_frame(self) -> Result<FramePair> {
        let fid = self.id.clone();
        let loc = |what: String| format!("frame {fid}, {what}");
        if !(self.hor_width.is_finite() && self.hor_width > 0.0) {
            return Err(schema(loc("hor_width".into()), "must be a positive number"));
        }
        let top: Vec<TopDetection> = self
            .top
            .iter()
            .map(|t| TopDetection {
                id: SubjectId(t.id),
                pos: Point2::new(t.x, t.y),
            })
            .collect();
        if let Some(k) = top.iter().position(|t| !t.pos.is_finite()) {
            return Err(schema(loc(format!("top[{k}]")), "coordinates must be finite"));
        }
        check_unique(&fid, "top", top.iter().map(|t| t.id))?;

        let mut hor: Vec<HorDetection> = self
            .hor
            .iter()
            .map(|h| HorDetection::new(h.id, h.cx, h.h))
            .collect();
        match (self.hor_boxes, self.hor_annotations) {
            (Some(raw), Some(ann)) => {
                if !hor.is_empty() {
                    return Err(schema(loc("hor".into()), "give either hor or hor_boxes, not both"));
                }
                let annotated: Vec<(SubjectId, BoundingBox)> = ann
                    .iter()
                    .map(|a| {
                        (
                            SubjectId(a.id),
                            BoundingBox {
                                x1: a.x1,
                                y1: a.y1,
                                x2: a.x2,
                                y2: a.y2,
                            },
                        )
                    })
                    .collect();
                check_unique(&fid, "hor_annotations", annotated.iter().map(|a| a.0))?;
                for (k, b) in raw.iter().chain(annotated.iter().map(|a| &a.1)).enumerate() {
                    if !(b.area() > 0.0) {
                        return Err(schema(loc(format!("box {k}")), "boxes need positive area"));
                    }
                }
                let threshold = self.iou_threshold.unwrap_or(DEFAULT_IOU_THRESHOLD);
                hor = resolve_by_iou(&raw, &annotated, threshold)
                    .into_iter()
                    .map(|(id, b)| b.to_hor_detection(id))
                    .collect();
            }
            (None, None) => {}
            _ => {
                return Err(schema(
                    loc("hor_boxes".into()),
                    "hor_boxes and hor_annotations must be given together",
                ))
            }
        }
        if let Some(k) = hor.iter().position(|h| !(h.h > 0.0 && h.h.is_finite() && h.cx.is_finite())) {
            return Err(schema(loc(format!("hor[{k}]")), "h must be positive and values finite"));
        }
        check_unique(&fid, "hor", hor.iter().map(|h| h.id))?;

        let ground_truth = match self.gt_wearer {
            Some(w) => {
                let wearer = SubjectId(w);
                if !top.iter().any(|t| t.id == wearer) {
                    return Err(schema(loc("gt_wearer".into()), format!("unknown top id {w}")));
                }
                let mut pairs = Vec::with_capacity(self.gt_pairs.len());
                for (k, &(t, h)) in self.gt_pairs.iter().enumerate() {
                    if !top.iter().any(|d| d.id.0 == t) {
                        return Err(schema(loc(format!("gt_pairs[{k}]")), format!("unknown top id {t}")));
                    }
                    if !hor.iter().any(|d| d.id.0 == h) {
                        return Err(schema(loc(format!("gt_pairs[{k}]")), format!("unknown hor id {h}")));
                    }
                    pairs.push((SubjectId(t), SubjectId(h)));
                }
                Some(GroundTruth { pairs, wearer })
            }
            None if !self.gt_pairs.is_empty() => {
                return Err(schema(loc("gt_pairs".into()), "gt_pairs given without gt_wearer"))
            }
            None => None,
        };

        Ok(FramePair {
            frame_id: self.id,
            top,
            hor,
            meta: HorImageMeta {
                width: self.hor_width,
            },
            ground_truth,
        })
    }

    fn from_frame(f: &FramePair) -> Self {
        Self {
            id: f.frame_id.clone(),
            top: f
                .top
                .iter()
                .map(|t| TopRecord {
                    id: t.id.0,
                    x: t.pos.x,
                    y: t.pos.y,
                })
                .collect(),
            hor: f
                .hor
                .iter()
                .map(|h| HorRecord {
                    id: h.id.0,
                    cx: h.cx,
                    h: h.h,
                })
                .collect(),
            hor_width: f.meta.width,
            hor_boxes: None,
            hor_annotations: None,
            iou_threshold: None,
            gt_pairs: f
                .ground_truth
                .as_ref()
                .map(|g| g.pairs.iter().map(|p| (p.0 .0, p.1 .0)).collect())
                .unwrap_or_default(),
            gt_wearer: f.ground_truth.as_ref().map(|g| g.wearer.0),
        }
    }
}

/// Parse and validate a dataset document. Frames come back ordered by id.
pub fn parse_dataset(text: &str) -> Result<Vec<FramePair>> {
    let file: DatasetFile = serde_json::from_str(text).map_err(|e| {
        schema(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let mut frames = file
        .frames
        .into_iter()
        .map(FrameRecord::into_frame)
        .collect::<Result<Vec<_>>>()?;
    frames.sort_by(|a, b| a.frame_id.cmp(&b.frame_id));
    if let Some(w) = frames.windows(2).find(|w| w[0].frame_id == w[1].frame_id) {
        return Err(schema(format!("frame {}", w[0].frame_id), "duplicate frame id"));
    }
    Ok(frames)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<FramePair>> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn dataset_to_string(frames: &[FramePair]) -> String {
    let file = DatasetFile {
        frames: frames.iter().map(FrameRecord::from_frame).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("dataset serializes");
    s.push('\n');
    s
}

pub fn save_dataset(path: impl AsRef<Path>, frames: &[FramePair]) -> Result<()> {
    fs::write(path, dataset_to_string(frames))?;
    Ok(())
}

/// Configuration as stored on disk; angles in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha_deg: f64,
    pub rho: f64,
    pub lambda: f64,
    pub beta_deg: f64,
    pub delta_theta_deg: f64,
    pub ransac_x_threshold: f64,
    pub mirror: bool,
    pub handle_occlusion: bool,
    pub variant: VectorVariant,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self::from(&Config::default())
    }
}

impl From<&Config> for ConfigFile {
    fn from(c: &Config) -> Self {
        Self {
            alpha_deg: c.alpha.to_degrees(),
            rho: c.rho,
            lambda: c.lambda,
            beta_deg: c.beta.to_degrees(),
            delta_theta_deg: c.delta_theta.to_degrees(),
            ransac_x_threshold: c.ransac_x_threshold,
            mirror: c.mirror,
            handle_occlusion: c.handle_occlusion,
            variant: c.variant,
        }
    }
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<Config> {
        Config {
            alpha: self.alpha_deg.to_radians(),
            rho: self.rho,
            lambda: self.lambda,
            beta: self.beta_deg.to_radians(),
            delta_theta: self.delta_theta_deg.to_radians(),
            ransac_x_threshold: self.ransac_x_threshold,
            mirror: self.mirror,
            handle_occlusion: self.handle_occlusion,
            variant: self.variant,
        }
        .checked()
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| {
        schema(
            format!("config line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    file.to_config()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    parse_config(&fs::read_to_string(path)?)
}
