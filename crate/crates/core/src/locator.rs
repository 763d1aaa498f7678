//! Exhaustive search over wearer candidates and view angles.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::horview::build_hor_vector;
use crate::matcher::match_vectors;
use crate::topview::build_top_vector;
use crate::types::{
    CameraHypothesis, Config, HorDetection, HorImageMeta, MatchResult, SubjectId, TopDetection,
    VectorSet,
};

/// Best hypothesis found for one wearer candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateScore {
    pub wearer_index: usize,
    pub wearer_id: SubjectId,
    pub theta: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociationResult {
    pub best: MatchResult,
    pub hypothesis: CameraHypothesis,
    /// Every overhead detection once, ascending by its best cost (ties by index).
    pub candidate_ranking: Vec<CandidateScore>,
    /// Number of (candidate, angle) hypotheses evaluated.
    pub evaluations: usize,
}

/// View angles searched for step `delta`: `k * delta` for `k = 0, 1, ...` below 2*pi.
///
/// When `delta` divides the full turn the angles are computed as `2*pi * (k / n)`,
/// so a coarse grid whose step is a multiple of a fine step is an exact subset of it.
pub fn theta_grid(delta: f64) -> Vec<f64> {
    let turns = TAU / delta;
    let rounded = turns.round();
    if rounded >= 1.0 && (turns - rounded).abs() < 1e-9 * rounded {
        let n = rounded as usize;
        (0..n).map(|k| TAU * (k as f64 / n as f64)).collect()
    } else {
        let n = turns.ceil() as usize;
        (0..n).map(|k| k as f64 * delta).collect()
    }
}

/// Match the overhead set seen from `hyp` against a prepared egocentric set.
pub fn evaluate_hypothesis(
    top: &[TopDetection],
    hor_vector: &VectorSet,
    hyp: &CameraHypothesis,
    cfg: &Config,
) -> MatchResult {
    match build_top_vector(top, hyp, cfg) {
        Ok(vt) => match_vectors(&vt, hor_vector, cfg),
        Err(_) => MatchResult::unmatched(),
    }
}

/// Cost of every grid angle for one wearer candidate.
pub fn cost_profile(
    top: &[TopDetection],
    hor_vector: &VectorSet,
    wearer_index: usize,
    cfg: &Config,
) -> Result<Vec<(f64, f64)>> {
    theta_grid(cfg.delta_theta)
        .into_iter()
        .map(|theta| {
            let hyp = CameraHypothesis::new(top, wearer_index, theta)?;
            Ok((theta, evaluate_hypothesis(top, hor_vector, &hyp, cfg).cost))
        })
        .collect()
}

/// Find the wearer, view angle and cross-view pairs with minimum matching cost.
///
/// Ties go to the smallest wearer index, then the smallest angle. The result does
/// not depend on how the rayon pool schedules candidates.
pub fn associate(
    top: &[TopDetection],
    hor: &[HorDetection],
    meta: &HorImageMeta,
    cfg: &Config,
) -> Result<AssociationResult> {
    cfg.validate()?;
    if top.is_empty() {
        return Err(Error::EmptyInput("overhead detections"));
    }
    if hor.is_empty() {
        return Err(Error::EmptyInput("egocentric detections"));
    }
    let hor_vector = build_hor_vector(hor, meta)?;
    associate_vectors(top, &hor_vector, cfg)
}

/// [`associate`] with the egocentric vector set already built.
pub fn associate_vectors(
    top: &[TopDetection],
    hor_vector: &VectorSet,
    cfg: &Config,
) -> Result<AssociationResult> {
    let grid = theta_grid(cfg.delta_theta);
    let counter = AtomicUsize::new(0);

    let per_candidate: Vec<(CameraHypothesis, MatchResult)> = (0..top.len())
        .into_par_iter()
        .map(|wearer_index| {
            let mut best: Option<(CameraHypothesis, MatchResult)> = None;
            for &theta in &grid {
                let hyp = CameraHypothesis {
                    wearer_index,
                    position: top[wearer_index].pos,
                    theta,
                };
                let m = evaluate_hypothesis(top, hor_vector, &hyp, cfg);
                counter.fetch_add(1, Ordering::Relaxed);
                if best.as_ref().is_none_or(|(_, b)| m.cost < b.cost) {
                    best = Some((hyp, m));
                }
            }
            best.expect("theta grid is never empty")
        })
        .collect();

    let (winner, (hypothesis, best)) = per_candidate
        .iter()
        .enumerate()
        .fold(None::<(usize, &(CameraHypothesis, MatchResult))>, |acc, (i, c)| match acc {
            Some((_, b)) if b.1.cost <= c.1.cost => acc,
            _ => Some((i, c)),
        })
        .ok_or(Error::EmptyInput("overhead detections"))?;
    if !best.cost.is_finite() {
        return Err(Error::NoFeasibleHypothesis);
    }
    debug_assert_eq!(winner, hypothesis.wearer_index);

    let mut candidate_ranking: Vec<CandidateScore> = per_candidate
        .iter()
        .map(|(hyp, m)| CandidateScore {
            wearer_index: hyp.wearer_index,
            wearer_id: top[hyp.wearer_index].id,
            theta: hyp.theta,
            cost: m.cost,
        })
        .collect();
    candidate_ranking.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.wearer_index.cmp(&b.wearer_index)));

    Ok(AssociationResult {
        best: best.clone(),
        hypothesis: *hypothesis,
        candidate_ranking,
        evaluations: counter.into_inner(),
    })
}

/// 1-based rank of `true_wearer` among the candidates.
pub fn cmc_ranking(result: &AssociationResult, true_wearer: SubjectId) -> Result<usize> {
    result
        .candidate_ranking
        .iter()
        .position(|c| c.wearer_id == true_wearer)
        .map(|p| p + 1)
        .ok_or(Error::UnknownWearer(true_wearer))
}
