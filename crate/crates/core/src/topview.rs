//! Overhead-view vector representation for a given camera hypothesis.
//!
//! A subject at `P` seen from the camera at `O` is described by its lateral offset
//! along the camera right direction and its depth along the optical axis. The
//! lateral coordinate is normalized so that the field-of-view edges land on +-1,
//! which makes the focal length cancel out.

use crate::error::{Error, Result};
use crate::types::{CameraHypothesis, Config, TopDetection, VectorEntry, VectorSet};

/// Slack on the closed field-of-view test.
const FOV_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopProjection {
    pub entry: VectorEntry,
    /// Depth along the optical axis, overhead pixels.
    pub raw_depth: f64,
    /// Angle between `OP` and the camera right direction, in [0, pi].
    pub angle_to_right: f64,
}

/// Project one overhead subject into the camera frame of `hyp`.
///
/// Returns `Ok(None)` when the subject lies outside the field of view.
pub fn project_subject(
    p: &TopDetection,
    hyp: &CameraHypothesis,
    cfg: &Config,
) -> Result<Option<TopProjection>> {
    let op = p.pos.sub(hyp.position);
    if op.x == 0.0 && op.y == 0.0 {
        return Err(Error::CoincidentPoint);
    }
    let forward = op.dot(hyp.axis());
    if forward <= 0.0 {
        return Ok(None);
    }
    let lateral = op.dot(hyp.right(cfg.mirror));
    // cot of the angle to the right direction, over cot((pi - alpha) / 2)
    let x = lateral / forward / cfg.half_fov_tan();
    if !(x.abs() <= 1.0 + FOV_EPS) {
        return Ok(None);
    }
    Ok(Some(TopProjection {
        entry: VectorEntry {
            source_id: p.id,
            x: x.clamp(-1.0, 1.0),
            y: forward,
        },
        raw_depth: forward,
        angle_to_right: forward.atan2(lateral),
    }))
}

/// Drop subjects hidden behind a nearer one.
///
/// Subjects are visited nearest first; each is kept only if its bearing differs by
/// at least `beta` from every subject already kept. Survivors keep input order.
pub fn filter_occlusions(projections: &[TopProjection], beta: f64) -> Vec<TopProjection> {
    let mut order: Vec<usize> = (0..projections.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&projections[a], &projections[b]);
        pa.raw_depth
            .total_cmp(&pb.raw_depth)
            .then(pa.entry.source_id.cmp(&pb.entry.source_id))
    });
    let mut keep = vec![false; projections.len()];
    let mut kept_angles: Vec<f64> = Vec::with_capacity(projections.len());
    for idx in order {
        let a = projections[idx].angle_to_right;
        if kept_angles.iter().all(|&k| (a - k).abs() >= beta) {
            keep[idx] = true;
            kept_angles.push(a);
        }
    }
    projections
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect()
}

/// Projections of every visible subject other than the wearer, occlusion-filtered
/// when `cfg.handle_occlusion` is set. Unsorted.
pub fn visible_projections(
    dets: &[TopDetection],
    hyp: &CameraHypothesis,
    cfg: &Config,
) -> Vec<TopProjection> {
    let projections: Vec<TopProjection> = dets
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != hyp.wearer_index)
        .filter_map(|(_, d)| project_subject(d, hyp, cfg).ok().flatten())
        .collect();
    if cfg.handle_occlusion {
        filter_occlusions(&projections, cfg.beta)
    } else {
        projections
    }
}

/// The overhead vector set for hypothesis `hyp`, sorted by x.
pub fn build_top_vector(
    dets: &[TopDetection],
    hyp: &CameraHypothesis,
    cfg: &Config,
) -> Result<VectorSet> {
    VectorSet::new(
        visible_projections(dets, hyp, cfg)
            .into_iter()
            .map(|p| p.entry)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Point2;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn hyp_at(x: f64, y: f64, theta: f64) -> CameraHypothesis {
        CameraHypothesis {
            wearer_index: 0,
            position: Point2::new(x, y),
            theta,
        }
    }

    fn cfg_with(alpha: f64, mirror: bool) -> Config {
        Config {
            alpha,
            mirror,
            ..Config::default()
        }
    }

    #[test]
    fn on_axis_subject() {
        // axis (0, 1), right (1, 0)
        let hyp = hyp_at(0.0, 0.0, FRAC_PI_2);
        let cfg = cfg_with(FRAC_PI_2, true);
        let p = project_subject(&TopDetection::new(1, 0.0, 5.0), &hyp, &cfg)
            .unwrap()
            .unwrap();
        assert!(p.entry.x.abs() < 1e-15);
        assert!((p.entry.y - 5.0).abs() < 1e-12);
        assert!((p.angle_to_right - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn boundary_subject_is_visible_at_plus_one() {
        let hyp = hyp_at(0.0, 0.0, FRAC_PI_2);
        let cfg = cfg_with(FRAC_PI_2, true);
        let p = project_subject(&TopDetection::new(1, 5.0, 5.0), &hyp, &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(p.entry.x, 1.0);
        assert!((p.entry.y - 5.0).abs() < 1e-12);
    }

    #[test]
    fn subject_beside_or_behind_is_not_visible() {
        let hyp = hyp_at(0.0, 0.0, FRAC_PI_2);
        let cfg = cfg_with(FRAC_PI_2, true);
        for (x, y) in [(-6.0, 0.0), (0.0, -3.0), (6.0, 1.0)] {
            let got = project_subject(&TopDetection::new(1, x, y), &hyp, &cfg).unwrap();
            assert!(got.is_none(), "({x}, {y}) should be outside the view");
        }
    }

    #[test]
    fn coincident_point_is_an_error() {
        let hyp = hyp_at(3.0, 4.0, 0.0);
        let res = project_subject(&TopDetection::new(1, 3.0, 4.0), &hyp, &Config::default());
        assert!(matches!(res, Err(Error::CoincidentPoint)));
    }

    #[test]
    fn unmirrored_right_is_screen_clockwise() {
        // facing +x; screen-clockwise quarter turn points down (+y)
        let hyp = hyp_at(0.0, 0.0, 0.0);
        let cfg = cfg_with(FRAC_PI_2, false);
        let p = project_subject(&TopDetection::new(1, 10.0, 5.0), &hyp, &cfg)
            .unwrap()
            .unwrap();
        assert!((p.entry.x - 0.5).abs() < 1e-12);
        assert!((p.entry.y - 10.0).abs() < 1e-12);
    }

    fn proj(id: u64, depth: f64, bearing_deg: f64) -> TopProjection {
        TopProjection {
            entry: VectorEntry {
                source_id: crate::types::SubjectId(id),
                x: 0.0,
                y: depth,
            },
            raw_depth: depth,
            angle_to_right: bearing_deg.to_radians(),
        }
    }

    #[test]
    fn collinear_deeper_subject_is_removed() {
        let hyp = hyp_at(0.0, 0.0, FRAC_PI_2);
        let cfg = cfg_with(FRAC_PI_2, true);
        let dets = [TopDetection::new(1, 0.0, 2.0), TopDetection::new(2, 0.0, 6.0)];
        let projections: Vec<_> = dets
            .iter()
            .map(|d| project_subject(d, &hyp, &cfg).unwrap().unwrap())
            .collect();
        let kept = filter_occlusions(&projections, 2f64.to_radians());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].entry.source_id.0, 1);
    }

    #[test]
    fn well_separated_subjects_are_kept() {
        let kept = filter_occlusions(&[proj(1, 3.0, 90.0), proj(2, 8.0, 95.0)], 2f64.to_radians());
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn occlusion_chain_is_decided_against_survivors() {
        // P2 sits 1.05 deg from P1, P3 sits 1.05 deg from P2 and 2.1 deg from P1.
        let input = [proj(3, 6.0, 92.1), proj(1, 2.0, 90.0), proj(2, 4.0, 91.05)];
        let kept = filter_occlusions(&input, 2f64.to_radians());
        let ids: Vec<u64> = kept.iter().map(|p| p.entry.source_id.0).collect();
        assert_eq!(ids, vec![3, 1]);
    }

    #[test]
    fn wearer_alone_gives_empty_set() {
        let dets = [TopDetection::new(7, 10.0, 10.0)];
        let hyp = CameraHypothesis::new(&dets, 0, 0.3).unwrap();
        let set = build_top_vector(&dets, &hyp, &Config::default()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn three_subjects_hand_computed() {
        // camera at origin facing +x, right = +y, alpha = 90 deg so x = lateral / forward
        let dets = [
            TopDetection::new(0, 0.0, 0.0),
            TopDetection::new(1, 10.0, 5.0),
            TopDetection::new(2, 4.0, -2.0),
            TopDetection::new(3, 8.0, 0.0),
        ];
        let hyp = CameraHypothesis::new(&dets, 0, 0.0).unwrap();
        let cfg = cfg_with(FRAC_PI_2, false);
        let set = build_top_vector(&dets, &hyp, &cfg).unwrap();
        let got: Vec<(u64, f64, f64)> = set
            .entries()
            .iter()
            .map(|e| (e.source_id.0, e.x, e.y))
            .collect();
        let want = [(2, -0.5, 4.0), (3, 0.0, 8.0), (1, 0.5, 10.0)];
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip(want) {
            assert_eq!(g.0, w.0);
            assert!((g.1 - w.1).abs() < 1e-12 && (g.2 - w.2).abs() < 1e-12);
        }
    }

    #[test]
    fn occlusion_toggle() {
        let dets = [
            TopDetection::new(0, 0.0, 0.0),
            TopDetection::new(1, 5.0, 0.0),
            TopDetection::new(2, 10.0, 0.05),
        ];
        let hyp = CameraHypothesis::new(&dets, 0, 0.0).unwrap();
        let mut cfg = Config::default();
        assert_eq!(build_top_vector(&dets, &hyp, &cfg).unwrap().len(), 1);
        cfg.handle_occlusion = false;
        assert_eq!(build_top_vector(&dets, &hyp, &cfg).unwrap().len(), 2);
    }

    #[test]
    fn behind_camera_with_wide_fov() {
        let dets = [TopDetection::new(0, 0.0, 0.0), TopDetection::new(1, -3.0, 0.1)];
        let hyp = CameraHypothesis::new(&dets, 0, 0.0).unwrap();
        let cfg = cfg_with(PI - 0.01, false);
        assert!(build_top_vector(&dets, &hyp, &cfg).unwrap().is_empty());
    }
}
