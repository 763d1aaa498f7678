//! Synthetic ground-plane scenes rendered into both views with a pinhole model.
//!
//! Positions live in meters on the ground plane, in the same orientation as the
//! overhead image (x right, y down). The egocentric camera sits at the wearer,
//! looks along bearing `theta_true` and has its right direction a quarter turn
//! screen-clockwise from the optical axis.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{HorDetection, HorImageMeta, Point2, SubjectId, TopDetection};

/// Egocentric ids are the subject id plus this offset.
pub const HOR_ID_OFFSET: u64 = 1000;
/// Unshared egocentric-only subjects start here.
pub const HOR_EXTRA_ID_BASE: u64 = 5000;

const MAX_LAYOUT_ATTEMPTS: usize = 200;
const MAX_POSE_ATTEMPTS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneParams {
    pub n_subjects: usize,
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub min_separation_m: f64,
    pub height_mean_m: f64,
    /// Zero gives every subject the same height.
    pub height_sd_m: f64,
    pub pixels_per_meter_top: f64,
    pub hor_width_px: f64,
    pub alpha_deg: f64,
    /// Bearing separation below which the deeper subject is hidden.
    pub beta_deg: f64,
    /// Minimum number of subjects the wearer must see unoccluded.
    pub min_visible: usize,
    /// Pairs of subjects placed nearly collinear with the wearer, the deeper one hidden.
    pub occluded_pairs: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            n_subjects: 10,
            area_width_m: 30.0,
            area_height_m: 30.0,
            min_separation_m: 0.6,
            height_mean_m: 1.7,
            height_sd_m: 0.07,
            pixels_per_meter_top: 20.0,
            hor_width_px: 1920.0,
            alpha_deg: 120.0,
            beta_deg: 2.0,
            min_visible: 4,
            occluded_pairs: 0,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_subjects < 2 {
            return bad("at least two subjects are required");
        }
        if !(self.area_width_m > 0.0 && self.area_height_m > 0.0) {
            return bad("area dimensions must be positive");
        }
        if !(self.min_separation_m >= 0.0) {
            return bad("min_separation_m must be non-negative");
        }
        if !(self.height_mean_m > 1.0 && self.height_sd_m >= 0.0) {
            return bad("height mean must exceed 1 m and sd must be non-negative");
        }
        if !(self.pixels_per_meter_top > 0.0 && self.hor_width_px > 0.0) {
            return bad("image scales must be positive");
        }
        if !(self.alpha_deg > 0.0 && self.alpha_deg < 180.0) {
            return bad("alpha_deg must lie in (0, 180)");
        }
        if !(self.beta_deg > 0.0) {
            return bad("beta_deg must be positive");
        }
        if self.min_visible > self.n_subjects - 1 {
            return bad("min_visible exceeds the number of non-wearer subjects");
        }
        if 2 * self.occluded_pairs > self.n_subjects - 1 {
            return bad("too many occluded pairs for the subject count");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub top_pos_sigma: f64,
    /// Global relative scale jitter of the overhead map (altitude change).
    pub top_scale_sigma_rel: f64,
    /// Global rotation jitter of the overhead map, degrees.
    pub top_rotation_sigma_deg: f64,
    pub hor_cx_sigma: f64,
    pub hor_h_sigma_rel: f64,
    /// Per-render height perturbation (posture), meters.
    pub height_sigma: f64,
    pub top_false_negative_rate: f64,
    pub hor_false_negative_rate: f64,
    pub extra_top_subjects: usize,
    pub extra_hor_subjects: usize,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            top_pos_sigma: 0.0,
            top_scale_sigma_rel: 0.0,
            top_rotation_sigma_deg: 0.0,
            hor_cx_sigma: 0.0,
            hor_h_sigma_rel: 0.0,
            height_sigma: 0.0,
            top_false_negative_rate: 0.0,
            hor_false_negative_rate: 0.0,
            extra_top_subjects: 0,
            extra_hor_subjects: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.top_pos_sigma,
            self.top_scale_sigma_rel,
            self.top_rotation_sigma_deg,
            self.hor_cx_sigma,
            self.hor_h_sigma_rel,
            self.height_sigma,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidParams("noise sigmas must be non-negative".into()));
        }
        let rates = [self.top_false_negative_rate, self.hor_false_negative_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::InvalidParams("false negative rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSubject {
    pub id: SubjectId,
    pub pos: Point2,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub subjects: Vec<SceneSubject>,
    pub wearer_id: SubjectId,
    pub theta_true: f64,
    pub pixels_per_meter_top: f64,
    pub hor_focal_px: f64,
    pub hor_width_px: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

/// A subject as seen by the egocentric camera, before any detector noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraView {
    pub id: SubjectId,
    pub lateral: f64,
    pub depth: f64,
    pub bearing: f64,
}

impl Scene {
    pub fn wearer_index(&self) -> usize {
        self.subjects
            .iter()
            .position(|s| s.id == self.wearer_id)
            .expect("wearer is one of the subjects")
    }

    pub fn wearer(&self) -> &SceneSubject {
        &self.subjects[self.wearer_index()]
    }

    fn axes(&self) -> (Point2, Point2) {
        let (s, c) = self.theta_true.sin_cos();
        (Point2::new(c, s), Point2::new(-s, c))
    }

    /// Subjects inside the field of view, unoccluded, nearest first.
    pub fn visible_subjects(&self) -> Vec<CameraView> {
        let origin = self.wearer().pos;
        let (forward, right) = self.axes();
        let mut seen: Vec<CameraView> = self
            .subjects
            .iter()
            .filter(|s| s.id != self.wearer_id)
            .filter_map(|s| {
                let rel = s.pos.sub(origin);
                let depth = rel.dot(forward);
                let lateral = rel.dot(right);
                let bearing = lateral.atan2(depth);
                (depth > 0.0 && bearing.abs() <= self.alpha / 2.0).then_some(CameraView {
                    id: s.id,
                    lateral,
                    depth,
                    bearing,
                })
            })
            .collect();
        seen.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.id.cmp(&b.id)));
        let mut kept: Vec<CameraView> = Vec::with_capacity(seen.len());
        for v in seen {
            if kept.iter().all(|k| (k.bearing - v.bearing).abs() >= self.beta) {
                kept.push(v);
            }
        }
        kept
    }
}

fn focal_from(width: f64, alpha: f64) -> f64 {
    (width / 2.0) / (alpha / 2.0).tan()
}

/// Random scene, deterministic in `seed`.
pub fn generate_scene(params: &SceneParams, seed: u64) -> Result<Scene> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = params.alpha_deg.to_radians();
    let beta = params.beta_deg.to_radians();
    let heights = Normal::new(params.height_mean_m, params.height_sd_m)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;

    for _ in 0..MAX_LAYOUT_ATTEMPTS {
        let Some(positions) = sample_positions(params, &mut rng) else {
            continue;
        };
        let subjects: Vec<SceneSubject> = positions
            .into_iter()
            .enumerate()
            .map(|(k, pos)| SceneSubject {
                id: SubjectId(k as u64),
                pos,
                height: heights.sample(&mut rng).max(1.0),
            })
            .collect();
        let mut scene = Scene {
            subjects,
            wearer_id: SubjectId(0),
            theta_true: 0.0,
            pixels_per_meter_top: params.pixels_per_meter_top,
            hor_focal_px: focal_from(params.hor_width_px, alpha),
            hor_width_px: params.hor_width_px,
            alpha,
            beta,
            seed,
        };
        let base = scene.subjects.clone();
        for _ in 0..MAX_POSE_ATTEMPTS {
            scene.subjects.clone_from(&base);
            scene.wearer_id = SubjectId(rng.random_range(0..params.n_subjects) as u64);
            scene.theta_true = rng.random_range(0.0..TAU);
            if params.occluded_pairs > 0 && !place_occluded_pairs(&mut scene, params, &mut rng) {
                continue;
            }
            if scene.visible_subjects().len() >= params.min_visible {
                return Ok(scene);
            }
        }
    }
    Err(Error::InvalidParams(
        "could not place a wearer that sees enough subjects".into(),
    ))
}

fn sample_positions(params: &SceneParams, rng: &mut ChaCha8Rng) -> Option<Vec<Point2>> {
    let mut out: Vec<Point2> = Vec::with_capacity(params.n_subjects);
    let mut tries = 0;
    while out.len() < params.n_subjects {
        tries += 1;
        if tries > 100 * params.n_subjects {
            return None;
        }
        let p = Point2::new(
            rng.random_range(0.0..params.area_width_m),
            rng.random_range(0.0..params.area_height_m),
        );
        if out.iter().all(|q| q.sub(p).norm() > params.min_separation_m.max(1e-9)) {
            out.push(p);
        }
    }
    Some(out)
}

/// Move the last `2 * occluded_pairs` non-wearer subjects into near-collinear pairs.
fn place_occluded_pairs(scene: &mut Scene, params: &SceneParams, rng: &mut ChaCha8Rng) -> bool {
    let wearer = scene.wearer_index();
    let origin = scene.subjects[wearer].pos;
    let (forward, right) = scene.axes();
    let half = scene.alpha / 2.0;
    let movable: Vec<usize> = (0..scene.subjects.len())
        .rev()
        .filter(|&k| k != wearer)
        .take(2 * params.occluded_pairs)
        .collect();
    let at = |bearing: f64, depth: f64| {
        // depth is measured along the optical axis
        let lateral = depth * bearing.tan();
        Point2::new(
            origin.x + depth * forward.x + lateral * right.x,
            origin.y + depth * forward.y + lateral * right.y,
        )
    };
    for pair in movable.chunks(2) {
        let margin = scene.beta;
        if half <= 2.0 * margin {
            return false;
        }
        let bearing = rng.random_range(-half + margin..half - margin);
        let near = rng.random_range(3.0..10.0);
        let far = near + rng.random_range(2.0..8.0);
        let offset = rng.random_range(-0.5..0.5) * scene.beta;
        scene.subjects[pair[0]].pos = at(bearing, near);
        scene.subjects[pair[1]].pos = at(bearing + offset, far);
    }
    let positions: Vec<Point2> = scene.subjects.iter().map(|s| s.pos).collect();
    positions.iter().enumerate().all(|(a, p)| {
        positions[a + 1..]
            .iter()
            .all(|q| q.sub(*p).norm() > params.min_separation_m.max(1e-9))
    })
}

/// Detections of both views plus ground truth for one rendered scene.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedFrame {
    pub top: Vec<TopDetection>,
    pub hor: Vec<HorDetection>,
    pub gt_pairs: Vec<(SubjectId, SubjectId)>,
    pub meta: HorImageMeta,
    pub wearer: SubjectId,
}

/// Render `scene` into overhead points and egocentric boxes, deterministic in `seed`.
pub fn render_views(scene: &Scene, noise: &NoiseModel, seed: u64) -> Result<RenderedFrame> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |sigma: f64, rng: &mut ChaCha8Rng| -> f64 {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("sigma checked").sample(rng)
        } else {
            0.0
        }
    };

    let scale = 1.0 + gauss(noise.top_scale_sigma_rel, &mut rng);
    let rot = gauss(noise.top_rotation_sigma_deg, &mut rng).to_radians();
    let (rs, rc) = rot.sin_cos();
    let ppm = scene.pixels_per_meter_top * scale;

    let mut top = Vec::with_capacity(scene.subjects.len() + noise.extra_top_subjects);
    for s in &scene.subjects {
        let keep = s.id == scene.wearer_id || !rng.random_bool(noise.top_false_negative_rate);
        let (x, y) = (s.pos.x * ppm, s.pos.y * ppm);
        let (x, y) = (rc * x - rs * y, rs * x + rc * y);
        let jitter = (gauss(noise.top_pos_sigma, &mut rng), gauss(noise.top_pos_sigma, &mut rng));
        if keep {
            top.push(TopDetection {
                id: s.id,
                pos: Point2::new(x + jitter.0, y + jitter.1),
            });
        }
    }
    let mut extent = (0.0f64, 0.0f64);
    for s in &scene.subjects {
        extent = (extent.0.max(s.pos.x), extent.1.max(s.pos.y));
    }
    let next_id = scene.subjects.iter().map(|s| s.id.0).max().unwrap_or(0) + 1;
    for k in 0..noise.extra_top_subjects {
        let x = rng.random_range(0.0..extent.0.max(1.0)) * scene.pixels_per_meter_top;
        let y = rng.random_range(0.0..extent.1.max(1.0)) * scene.pixels_per_meter_top;
        top.push(TopDetection {
            id: SubjectId(next_id + k as u64),
            pos: Point2::new(x, y),
        });
    }

    let f = scene.hor_focal_px;
    let w = scene.hor_width_px;
    let mut views = scene.visible_subjects();
    views.sort_by_key(|v| v.id);
    let mut hor = Vec::with_capacity(views.len() + noise.extra_hor_subjects);
    let mut gt_pairs = Vec::new();
    for v in views {
        let subject = scene.subjects.iter().find(|s| s.id == v.id).expect("visible subject");
        let height = subject.height + gauss(noise.height_sigma, &mut rng);
        let cx = w / 2.0 + f * v.lateral / v.depth + gauss(noise.hor_cx_sigma, &mut rng);
        let h = f * height.max(0.5) / v.depth * (1.0 + gauss(noise.hor_h_sigma_rel, &mut rng));
        if rng.random_bool(noise.hor_false_negative_rate) {
            continue;
        }
        let hor_id = SubjectId(v.id.0 + HOR_ID_OFFSET);
        hor.push(HorDetection {
            id: hor_id,
            cx,
            h: h.max(1.0),
        });
        if top.iter().any(|t| t.id == v.id) {
            gt_pairs.push((v.id, hor_id));
        }
    }
    for k in 0..noise.extra_hor_subjects {
        let depth = rng.random_range(3.0..25.0);
        hor.push(HorDetection {
            id: SubjectId(HOR_EXTRA_ID_BASE + k as u64),
            cx: rng.random_range(0.0..w),
            h: f * 1.7 / depth,
        });
    }

    Ok(RenderedFrame {
        top,
        hor,
        gt_pairs,
        meta: HorImageMeta::new(w)?,
        wearer: scene.wearer_id,
    })
}

/// Contents of a simulation parameter file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    pub scene: SceneParams,
    pub noise: NoiseModel,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.noise.validate()
    }
}

const RENDER_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Scene and render seeds of the `index`-th frame of a batch started from `base`.
pub fn frame_seeds(base: u64, index: usize) -> (u64, u64) {
    let scene = base.wrapping_add(index as u64);
    (scene, scene ^ RENDER_SEED_SALT)
}

/// `n` scenes with their renderings, in index order. Frames are generated in
/// parallel but each depends only on its own seeds.
pub fn simulate_batch(
    params: &SimulationParams,
    n: usize,
    base_seed: u64,
) -> Result<Vec<(Scene, RenderedFrame)>> {
    params.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (scene_seed, render_seed) = frame_seeds(base_seed, i);
            let scene = generate_scene(&params.scene, scene_seed)?;
            let frame = render_views(&scene, &params.noise, render_seed)?;
            Ok((scene, frame))
        })
        .collect()
}
