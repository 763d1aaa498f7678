use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crossview_core::batch::{run_frames, summarize, FrameReport};
use crossview_core::evaluator::write_metrics_csv;
use crossview_core::ingestion::{load_config, load_dataset, save_dataset, simulate_dataset};
use crossview_core::simulator::SimulationParams;
use crossview_core::{Config, SubjectId};

pub enum Failure {
    /// Some frames could not be associated; the rest were written.
    Partial(usize),
    Invalid(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
    }
}

pub fn read_config(path: Option<&Path>) -> anyhow::Result<Config> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

#[derive(Serialize)]
struct ResultsFile {
    frames: Vec<FrameOut>,
}

#[derive(Serialize)]
struct FrameOut {
    id: String,
    #[serde(flatten)]
    body: FrameBody,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum FrameBody {
    Ok {
        wearer_index: usize,
        wearer_id: SubjectId,
        theta_deg: f64,
        phi: f64,
        mu: f64,
        pairs: Vec<(SubjectId, SubjectId)>,
    },
    Infeasible {
        error: String,
    },
}

fn frame_out(report: &FrameReport, top_ids: &[SubjectId]) -> FrameOut {
    let body = match &report.outcome {
        Ok(res) => FrameBody::Ok {
            wearer_index: res.hypothesis.wearer_index,
            wearer_id: top_ids[res.hypothesis.wearer_index],
            theta_deg: res.hypothesis.theta.to_degrees(),
            phi: res.best.cost,
            mu: res.best.mu,
            pairs: res.best.pairs.clone(),
        },
        Err(e) => FrameBody::Infeasible {
            error: e.to_string(),
        },
    };
    FrameOut {
        id: report.frame_id.clone(),
        body,
    }
}

pub fn default_metrics_path(out: &Path) -> PathBuf {
    out.with_extension("metrics.csv")
}

pub fn associate(
    dataset: &Path,
    config: Option<&Path>,
    out: &Path,
    metrics: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = read_config(config)?;
    let frames = load_dataset(dataset)
        .with_context(|| format!("reading dataset {}", dataset.display()))?;
    log::info!("{} frame(s) loaded from {}", frames.len(), dataset.display());

    let reports = run_frames(&frames, &cfg);
    let results = ResultsFile {
        frames: reports
            .iter()
            .zip(&frames)
            .map(|(r, f)| {
                let ids: Vec<SubjectId> = f.top.iter().map(|t| t.id).collect();
                frame_out(r, &ids)
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&results)?;
    text.push('\n');
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;

    if let Some((per_frame, summary)) = summarize(&reports) {
        let path = metrics.map_or_else(|| default_metrics_path(out), Path::to_path_buf);
        let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_metrics_csv(&mut w, &per_frame, Some(&summary))?;
        w.flush()?;
        log::info!(
            "prec_avg {:.4} reca_avg {:.4} wearer {:.4}",
            summary.prec_avg,
            summary.reca_avg,
            summary.wearer_accuracy
        );
    }

    let infeasible: Vec<&FrameReport> = reports.iter().filter(|r| !r.is_feasible()).collect();
    for r in &infeasible {
        if let Err(e) = &r.outcome {
            log::warn!("frame {}: {e}", r.frame_id);
        }
    }
    if infeasible.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial(infeasible.len()))
    }
}

pub fn simulate(params: Option<&Path>, out: &Path, n_scenes: usize, seed: u64) -> Result<(), Failure> {
    let params: SimulationParams = match params {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SimulationParams::default(),
    };
    let frames = simulate_dataset(&params, n_scenes, seed)?;
    save_dataset(out, &frames).with_context(|| format!("writing {}", out.display()))?;
    log::info!("{} frame(s) written to {}", frames.len(), out.display());
    Ok(())
}
