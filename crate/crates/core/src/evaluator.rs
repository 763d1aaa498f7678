//! Association metrics per frame and over batches.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SubjectId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame_id: String,
    pub precision: f64,
    pub recall: f64,
    pub wearer_correct: bool,
    pub cmc_rank: usize,
    /// Number of wearer candidates the rank was taken among.
    pub n_candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub frames: usize,
    pub prec_avg: f64,
    pub reca_avg: f64,
    pub prec_at_1: f64,
    pub reca_at_1: f64,
    pub wearer_accuracy: f64,
    /// Entry `k - 1` is the fraction of frames whose true wearer ranks within the top `k`.
    pub cmc_curve: Vec<f64>,
}

/// Score one frame. A pair is correct only if both ids match a ground-truth pair.
///
/// With no predictions, precision is taken as 1.
pub fn score_frame(
    frame_id: &str,
    predicted: &[(SubjectId, SubjectId)],
    ground_truth: &[(SubjectId, SubjectId)],
    predicted_wearer: Option<SubjectId>,
    true_wearer: SubjectId,
    cmc_rank: usize,
    n_candidates: usize,
) -> Result<FrameMetrics> {
    if ground_truth.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let truth: HashSet<_> = ground_truth.iter().collect();
    let correct = predicted.iter().filter(|p| truth.contains(p)).count() as f64;
    let precision = if predicted.is_empty() {
        1.0
    } else {
        correct / predicted.len() as f64
    };
    Ok(FrameMetrics {
        frame_id: frame_id.to_string(),
        precision,
        recall: correct / truth.len() as f64,
        wearer_correct: predicted_wearer == Some(true_wearer),
        cmc_rank,
        n_candidates,
    })
}

pub fn aggregate(frames: &[FrameMetrics]) -> Result<BatchMetrics> {
    if frames.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = frames.len() as f64;
    let mean = |f: &dyn Fn(&FrameMetrics) -> f64| frames.iter().map(f).sum::<f64>() / n;
    let ranks = frames
        .iter()
        .map(|f| f.n_candidates.max(f.cmc_rank))
        .max()
        .unwrap_or(0);
    let cmc_curve = (1..=ranks)
        .map(|k| frames.iter().filter(|f| f.cmc_rank <= k).count() as f64 / n)
        .collect();
    Ok(BatchMetrics {
        frames: frames.len(),
        prec_avg: mean(&|f| f.precision),
        reca_avg: mean(&|f| f.recall),
        prec_at_1: mean(&|f| f64::from(u8::from(f.precision == 1.0))),
        reca_at_1: mean(&|f| f64::from(u8::from(f.recall == 1.0))),
        wearer_accuracy: mean(&|f| f64::from(u8::from(f.wearer_correct))),
        cmc_curve,
    })
}

/// Per-frame rows, then a `#`-prefixed summary block.
pub fn write_metrics_csv<W: Write>(
    mut out: W,
    frames: &[FrameMetrics],
    summary: Option<&BatchMetrics>,
) -> std::io::Result<()> {
    writeln!(out, "frame_id,precision,recall,wearer_correct,cmc_rank")?;
    for f in frames {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{}",
            csv_field(&f.frame_id),
            f.precision,
            f.recall,
            f.wearer_correct,
            f.cmc_rank
        )?;
    }
    if let Some(s) = summary {
        writeln!(out, "# frames,{}", s.frames)?;
        writeln!(out, "# prec_avg,{:.6}", s.prec_avg)?;
        writeln!(out, "# reca_avg,{:.6}", s.reca_avg)?;
        writeln!(out, "# prec_at_1,{:.6}", s.prec_at_1)?;
        writeln!(out, "# reca_at_1,{:.6}", s.reca_at_1)?;
        writeln!(out, "# wearer_accuracy,{:.6}", s.wearer_accuracy)?;
        let cmc: Vec<String> = s.cmc_curve.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(out, "# cmc,{}", cmc.join(","))?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: u64, b: u64) -> (SubjectId, SubjectId) {
        (SubjectId(a), SubjectId(b))
    }

    fn frame(precision: f64, recall: f64, rank: usize) -> FrameMetrics {
        FrameMetrics {
            frame_id: "f".into(),
            precision,
            recall,
            wearer_correct: rank == 1,
            cmc_rank: rank,
            n_candidates: 5,
        }
    }

    #[test]
    fn perfect_prediction() {
        let gt = [p(1, 11), p(2, 12)];
        let m = score_frame("a", &gt, &gt, Some(SubjectId(0)), SubjectId(0), 1, 3).unwrap();
        assert_eq!((m.precision, m.recall, m.wearer_correct), (1.0, 1.0, true));
    }

    #[test]
    fn partial_prediction() {
        let gt = [p(1, 11), p(2, 12), p(3, 13), p(4, 14)];
        let pred = [p(1, 11), p(2, 12), p(3, 14)];
        let m = score_frame("a", &pred, &gt, Some(SubjectId(9)), SubjectId(0), 2, 5).unwrap();
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.recall, 0.5);
        assert!(!m.wearer_correct);
    }

    #[test]
    fn zero_predictions() {
        let m = score_frame("a", &[], &[p(1, 2)], None, SubjectId(0), 3, 3).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 0.0));
    }

    #[test]
    fn empty_ground_truth() {
        let res = score_frame("a", &[p(1, 2)], &[], None, SubjectId(0), 1, 1);
        assert!(matches!(res, Err(Error::EmptyGroundTruth)));
    }

    #[test]
    fn aggregate_perfect() {
        let b = aggregate(&[frame(1.0, 1.0, 1), frame(1.0, 1.0, 1)]).unwrap();
        assert_eq!(b.prec_avg, 1.0);
        assert_eq!(b.reca_at_1, 1.0);
        assert_eq!(b.wearer_accuracy, 1.0);
        assert!(b.cmc_curve.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn aggregate_two_frames() {
        let b = aggregate(&[frame(1.0, 1.0, 1), frame(0.5, 0.25, 4)]).unwrap();
        assert_eq!(b.prec_avg, 0.75);
        assert_eq!(b.prec_at_1, 0.5);
        assert_eq!(b.reca_avg, 0.625);
        assert_eq!(b.cmc_curve, vec![0.5, 0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn aggregate_empty() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn aggregate_is_order_invariant() {
        let frames = vec![frame(1.0, 0.5, 2), frame(0.2, 0.4, 1), frame(0.7, 1.0, 5)];
        let mut rev = frames.clone();
        rev.reverse();
        assert_eq!(aggregate(&frames).unwrap(), aggregate(&rev).unwrap());
    }

    #[test]
    fn csv_layout() {
        let frames = [frame(1.0, 0.5, 2)];
        let b = aggregate(&frames).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &frames, Some(&b)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("frame_id,precision,recall,wearer_correct,cmc_rank"));
        assert_eq!(lines.next(), Some("f,1.000000,0.500000,false,2"));
        assert!(text.contains("# prec_avg,1.000000"));
    }
}
