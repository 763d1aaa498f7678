//! Browser bindings. Every operation takes and returns JSON strings so the page
//! needs no generated type glue beyond `wasm-bindgen`'s string passing.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use crossview_core::horview::build_hor_vector;
use crossview_core::ingestion::ConfigFile;
use crossview_core::locator::cost_profile;
use crossview_core::simulator::{generate_scene, render_views, SimulationParams};
use crossview_core::{associate, HorDetection, HorImageMeta, SubjectId, TopDetection};

#[derive(Serialize, Deserialize)]
pub struct Subject {
    pub id: SubjectId,
    pub x: f64,
    pub y: f64,
}

#[derive(Serialize, Deserialize)]
pub struct Box2 {
    pub id: SubjectId,
    pub cx: f64,
    pub h: f64,
}

/// One overhead/egocentric frame as the page holds it.
#[derive(Serialize, Deserialize)]
pub struct DemoFrame {
    pub top: Vec<Subject>,
    pub hor: Vec<Box2>,
    pub hor_width: f64,
    #[serde(default)]
    pub gt_pairs: Vec<(SubjectId, SubjectId)>,
    #[serde(default)]
    pub wearer: Option<SubjectId>,
    #[serde(default)]
    pub theta_true_deg: Option<f64>,
}

impl DemoFrame {
    fn detections(&self) -> Result<(Vec<TopDetection>, Vec<HorDetection>, HorImageMeta), String> {
        let top = self.top.iter().map(|s| TopDetection::new(s.id.0, s.x, s.y)).collect();
        let hor = self.hor.iter().map(|b| HorDetection::new(b.id.0, b.cx, b.h)).collect();
        let meta = HorImageMeta::new(self.hor_width).map_err(|e| e.to_string())?;
        Ok((top, hor, meta))
    }
}

#[derive(Serialize)]
struct Candidate {
    wearer_index: usize,
    wearer_id: SubjectId,
    theta_deg: f64,
    phi: Option<f64>,
}

#[derive(Serialize)]
struct Association {
    wearer_index: usize,
    wearer_id: SubjectId,
    theta_deg: f64,
    phi: f64,
    mu: f64,
    pairs: Vec<(SubjectId, SubjectId)>,
    ranking: Vec<Candidate>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn simulate_frame_json(params: &str, seed: u64) -> Result<String, String> {
    let params: SimulationParams = if params.trim().is_empty() {
        SimulationParams::default()
    } else {
        parse(params, "simulation parameters")?
    };
    params.validate().map_err(|e| e.to_string())?;
    let scene = generate_scene(&params.scene, seed).map_err(|e| e.to_string())?;
    let frame = render_views(&scene, &params.noise, seed).map_err(|e| e.to_string())?;
    to_json(&DemoFrame {
        top: frame
            .top
            .iter()
            .map(|t| Subject {
                id: t.id,
                x: t.pos.x,
                y: t.pos.y,
            })
            .collect(),
        hor: frame
            .hor
            .iter()
            .map(|d| Box2 {
                id: d.id,
                cx: d.cx,
                h: d.h,
            })
            .collect(),
        hor_width: frame.meta.width,
        gt_pairs: frame.gt_pairs,
        wearer: Some(frame.wearer),
        theta_true_deg: Some(scene.theta_true.to_degrees()),
    })
}

pub fn associate_json(frame: &str, config: &str) -> Result<String, String> {
    let frame: DemoFrame = parse(frame, "frame")?;
    let cfg = parse::<ConfigFile>(config, "config")?
        .to_config()
        .map_err(|e| e.to_string())?;
    let (top, hor, meta) = frame.detections()?;
    let res = associate(&top, &hor, &meta, &cfg).map_err(|e| e.to_string())?;
    to_json(&Association {
        wearer_index: res.hypothesis.wearer_index,
        wearer_id: top[res.hypothesis.wearer_index].id,
        theta_deg: res.hypothesis.theta.to_degrees(),
        phi: res.best.cost,
        mu: res.best.mu,
        pairs: res.best.pairs,
        ranking: res
            .candidate_ranking
            .iter()
            .map(|c| Candidate {
                wearer_index: c.wearer_index,
                wearer_id: c.wearer_id,
                theta_deg: c.theta.to_degrees(),
                phi: finite(c.cost),
            })
            .collect(),
    })
}

/// `[[theta_deg, phi], ...]` for one candidate; infinite costs become `null`.
pub fn cost_profile_json(frame: &str, config: &str, wearer_index: usize) -> Result<String, String> {
    let frame: DemoFrame = parse(frame, "frame")?;
    let cfg = parse::<ConfigFile>(config, "config")?
        .to_config()
        .map_err(|e| e.to_string())?;
    let (top, hor, meta) = frame.detections()?;
    let vh = build_hor_vector(&hor, &meta).map_err(|e| e.to_string())?;
    let profile = cost_profile(&top, &vh, wearer_index, &cfg).map_err(|e| e.to_string())?;
    let rows: Vec<(f64, Option<f64>)> = profile
        .into_iter()
        .map(|(t, c)| (t.to_degrees(), finite(c)))
        .collect();
    to_json(&rows)
}

#[wasm_bindgen(js_name = simulateFrame)]
pub fn simulate_frame(params: &str, seed: u32) -> Result<String, JsError> {
    simulate_frame_json(params, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = associateFrame)]
pub fn associate_frame(frame: &str, config: &str) -> Result<String, JsError> {
    associate_json(frame, config).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = costProfile)]
pub fn cost_profile_js(frame: &str, config: &str, wearer_index: usize) -> Result<String, JsError> {
    cost_profile_json(frame, config, wearer_index).map_err(|e| JsError::new(&e))
}
