//! Configuration grids scored on one dataset.
//!
//! A sweep file looks like
//!
//! ```json
//! {"base": {"alpha_deg": 90},
//!  "delta_theta_deg": [1, 5, 10],
//!  "variants": ["full", "x-only"],
//!  "handle_occlusion": [true, false]}
//! ```
//!
//! Every list is optional and defaults to the base value. Rows follow the
//! cartesian product in the order delta_theta_deg, rho, lambda, variants,
//! handle_occlusion.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use crossview_core::batch::{run_frames, summarize};
use crossview_core::ingestion::{load_dataset, ConfigFile};
use crossview_core::{Config, VectorVariant};

use crate::commands::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ConfigFile,
    pub delta_theta_deg: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub variants: Option<Vec<VectorVariant>>,
    pub handle_occlusion: Option<Vec<bool>>,
}

impl SweepSpec {
    pub fn configs(&self) -> anyhow::Result<Vec<ConfigFile>> {
        fn axis<T: Clone>(name: &str, v: &Option<Vec<T>>, base: T) -> anyhow::Result<Vec<T>> {
            match v {
                Some(v) if v.is_empty() => bail!("sweep list `{name}` is empty"),
                Some(v) => Ok(v.clone()),
                None => Ok(vec![base]),
            }
        }
        let b = &self.base;
        let dts = axis("delta_theta_deg", &self.delta_theta_deg, b.delta_theta_deg)?;
        let rhos = axis("rho", &self.rho, b.rho)?;
        let lambdas = axis("lambda", &self.lambda, b.lambda)?;
        let variants = axis("variants", &self.variants, b.variant)?;
        let occ = axis("handle_occlusion", &self.handle_occlusion, b.handle_occlusion)?;

        let mut out = Vec::new();
        for &delta_theta_deg in &dts {
            for &rho in &rhos {
                for &lambda in &lambdas {
                    for &variant in &variants {
                        for &handle_occlusion in &occ {
                            let c = ConfigFile {
                                delta_theta_deg,
                                rho,
                                lambda,
                                variant,
                                handle_occlusion,
                                ..b.clone()
                            };
                            c.to_config().with_context(|| format!("sweep point {c:?}"))?;
                            out.push(c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

pub const HEADER: &str = "delta_theta_deg,rho,lambda,variant,handle_occlusion,frames,infeasible,\
prec_avg,reca_avg,prec_at_1,reca_at_1,wearer_accuracy";

pub fn run(dataset: &Path, spec_path: &Path, out: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(spec_path)
        .with_context(|| format!("reading sweep spec {}", spec_path.display()))?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing sweep spec {}", spec_path.display()))?;
    let configs = spec.configs()?;
    let frames = load_dataset(dataset)
        .with_context(|| format!("reading dataset {}", dataset.display()))?;
    if frames.iter().all(|f| f.ground_truth.is_none()) {
        return Err(Failure::Invalid(anyhow::anyhow!(
            "dataset {} has no ground truth to score against",
            dataset.display()
        )));
    }

    let mut csv = String::from(HEADER);
    csv.push('\n');
    for file in &configs {
        let cfg: Config = file.to_config()?;
        let reports = run_frames(&frames, &cfg);
        let infeasible = reports.iter().filter(|r| !r.is_feasible()).count();
        let (_, s) = summarize(&reports).context("no frame could be scored")?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            file.delta_theta_deg,
            file.rho,
            file.lambda,
            file.variant.name(),
            file.handle_occlusion,
            s.frames,
            infeasible,
            s.prec_avg,
            s.reca_avg,
            s.prec_at_1,
            s.reca_at_1,
            s.wearer_accuracy
        )
        .expect("writing to a String");
        log::info!("{:?}: prec_avg {:.4}", file, s.prec_avg);
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}
