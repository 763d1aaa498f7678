//! Acceptance suite. Every criterion runs, prints one PASS/FAIL line, and the
//! process exits non-zero if any failed.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crossview_core::batch::{run_frames, summarize};
use crossview_core::evaluator::score_frame;
use crossview_core::ingestion::{
    resolve_by_iou, save_dataset, scene_frame_id, BoundingBox, FramePair,
};
use crossview_core::matcher::{dp_align, matching_cost, DissimilarityMatrix};
use crossview_core::simulator::{simulate_batch, NoiseModel, SceneParams, SimulationParams};
use crossview_core::topview::build_top_vector;
use crossview_core::{
    associate, CameraHypothesis, Config, SubjectId, TopDetection, VectorEntry, VectorSet,
    VectorVariant,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfg90() -> Config {
    Config {
        alpha: 90f64.to_radians(),
        ..Config::default()
    }
}

fn noiseless_params() -> SimulationParams {
    SimulationParams {
        scene: SceneParams {
            n_subjects: 10,
            alpha_deg: 90.0,
            height_sd_m: 0.0,
            ..SceneParams::default()
        },
        noise: NoiseModel::noiseless(),
    }
}

/// 200 scenes with 5 px cx noise, 5% relative height noise and 0.07 m spread in true height.
fn noisy_params() -> SimulationParams {
    SimulationParams {
        scene: SceneParams {
            n_subjects: 10,
            alpha_deg: 90.0,
            height_sd_m: 0.07,
            ..SceneParams::default()
        },
        noise: NoiseModel {
            hor_cx_sigma: 5.0,
            hor_h_sigma_rel: 0.05,
            ..NoiseModel::default()
        },
    }
}

const NOISY_SCENES: usize = 200;
const NOISY_SEED: u64 = 2_000;
const ROUND_TRIP_SCENES: usize = 500;
const ROUND_TRIP_SEED: u64 = 0;

fn frames_of(params: &SimulationParams, n: usize, seed: u64) -> Vec<FramePair> {
    simulate_batch(params, n, seed)
        .expect("simulation")
        .into_iter()
        .enumerate()
        .map(|(i, (_, r))| FramePair::from_rendered(scene_frame_id(i), r))
        .collect()
}

fn prec_avg(frames: &[FramePair], cfg: &Config) -> f64 {
    summarize(&run_frames(frames, cfg)).expect("scored frames").1.prec_avg
}

fn all_paths(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    fn walk(i: usize, j: usize, r: usize, c: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        cur.push((i, j));
        if i == r - 1 && j == c - 1 {
            out.push(cur.clone());
        } else {
            if i + 1 < r && j + 1 < c {
                walk(i + 1, j + 1, r, c, cur, out);
            }
            if i + 1 < r {
                walk(i + 1, j, r, c, cur, out);
            }
            if j + 1 < c {
                walk(i, j + 1, r, c, cur, out);
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    walk(0, 0, rows, cols, &mut Vec::new(), &mut out);
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let d = DissimilarityMatrix::from_fn(r, c, |_, _| rng.random_range(0.0..10.0));
        let dp = dp_align(&d).map_err(|e| e.to_string())?.total;
        let brute = all_paths(r, c)
            .iter()
            .map(|p| p.iter().fold(0.0, |acc, &(i, j)| acc + d.get(i, j)))
            .fold(f64::INFINITY, f64::min);
        if dp != brute {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches} mismatches in 1000 matrices, {elapsed:.2?}"),
    )
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let batch = simulate_batch(&noiseless_params(), ROUND_TRIP_SCENES, ROUND_TRIP_SEED)
        .map_err(|e| e.to_string())?;
    let cfg = cfg90();
    let tol = 0.5f64.to_radians() + 1e-6;
    let (mut recovered, mut theta_off, mut imperfect) = (0, Vec::new(), Vec::new());
    for (i, (scene, frame)) in batch.iter().enumerate() {
        let Ok(res) = associate(&frame.top, &frame.hor, &frame.meta, &cfg) else {
            continue;
        };
        if frame.top[res.hypothesis.wearer_index].id != scene.wearer_id {
            continue;
        }
        recovered += 1;
        if angle_gap(res.hypothesis.theta, scene.theta_true) > tol {
            theta_off.push(i);
        }
        let m = score_frame("", &res.best.pairs, &frame.gt_pairs, None, scene.wearer_id, 1, 1)
            .map_err(|e| e.to_string())?;
        if m.precision != 1.0 || m.recall != 1.0 {
            imperfect.push(i);
        }
    }
    let elapsed = start.elapsed();
    let rate = recovered as f64 / batch.len() as f64;
    check(
        rate >= 0.99 && theta_off.is_empty() && imperfect.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "wearer {recovered}/{} ({:.1}%), angle off in scenes {theta_off:?}, P/R < 1 in scenes {imperfect:?}, {elapsed:.1?}",
            batch.len(),
            100.0 * rate
        ),
    )
}

fn rotate(p: (f64, f64), phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (p.0 * c - p.1 * s, p.0 * s + p.1 * c)
}

fn by_id(v: &VectorSet) -> Vec<VectorEntry> {
    let mut e = v.entries().to_vec();
    e.sort_by_key(|e| e.source_id);
    e
}

fn criterion_3() -> Outcome {
    let params = SimulationParams {
        scene: SceneParams {
            alpha_deg: 90.0,
            min_visible: 1,
            ..SceneParams::default()
        },
        ..SimulationParams::default()
    };
    let batch = simulate_batch(&params, 1000, 3_000).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = cfg90();
    let mirrored = Config { mirror: true, ..cfg };
    let (mut worst_rt, mut worst_mirror, mut set_changes) = (0.0f64, 0.0f64, 0);
    for (_, frame) in &batch {
        let w = rng.random_range(0..frame.top.len());
        let theta = rng.random_range(0.0..TAU);
        let phi = rng.random_range(0.0..TAU);
        let shift = (rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
        let moved: Vec<TopDetection> = frame
            .top
            .iter()
            .map(|t| {
                let (x, y) = rotate((t.pos.x, t.pos.y), phi);
                TopDetection::new(t.id.0, x + shift.0, y + shift.1)
            })
            .collect();

        let hyp = CameraHypothesis::new(&frame.top, w, theta).map_err(|e| e.to_string())?;
        let hyp_moved = CameraHypothesis::new(&moved, w, theta + phi).map_err(|e| e.to_string())?;
        let base = by_id(&build_top_vector(&frame.top, &hyp, &cfg).map_err(|e| e.to_string())?);
        let turned = by_id(&build_top_vector(&moved, &hyp_moved, &cfg).map_err(|e| e.to_string())?);
        let mirror = by_id(&build_top_vector(&frame.top, &hyp, &mirrored).map_err(|e| e.to_string())?);

        if base.iter().map(|e| e.source_id).ne(turned.iter().map(|e| e.source_id))
            || base.iter().map(|e| e.source_id).ne(mirror.iter().map(|e| e.source_id))
        {
            set_changes += 1;
            continue;
        }
        for ((a, b), m) in base.iter().zip(&turned).zip(&mirror) {
            worst_rt = worst_rt.max((a.x - b.x).abs()).max((a.y - b.y).abs());
            worst_mirror = worst_mirror.max((a.x + m.x).abs()).max((a.y - m.y).abs());
        }
    }
    check(
        set_changes == 0 && worst_rt <= 1e-9 && worst_mirror <= 1e-9,
        format!(
            "1000 scenes, visible-set changes {set_changes}, max rigid-motion error {worst_rt:.1e}, max mirror error {worst_mirror:.1e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let batch = simulate_batch(&noiseless_params(), 100, 4_000).map_err(|e| e.to_string())?;
    let cfg = cfg90();
    let mut failures = Vec::new();
    let mut worst_phi = 0.0f64;
    for (i, (_, frame)) in batch.iter().enumerate() {
        let base = associate(&frame.top, &frame.hor, &frame.meta, &cfg).map_err(|e| e.to_string())?;
        for c in [0.5, 2.0, 10.0] {
            let scaled: Vec<TopDetection> = frame
                .top
                .iter()
                .map(|t| TopDetection::new(t.id.0, c * t.pos.x, c * t.pos.y))
                .collect();
            let res = associate(&scaled, &frame.hor, &frame.meta, &cfg).map_err(|e| e.to_string())?;
            let dphi = (res.best.cost - base.best.cost).abs();
            worst_phi = worst_phi.max(dphi);
            if res.hypothesis.wearer_index != base.hypothesis.wearer_index
                || (res.hypothesis.theta - base.hypothesis.theta).abs() > 1e-9
                || res.best.pairs != base.best.pairs
                || dphi > 1e-9
            {
                failures.push((i, c));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("100 scenes x 3 scales, changed results {failures:?}, max phi change {worst_phi:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let frames = frames_of(&noisy_params(), NOISY_SCENES, NOISY_SEED);
    let p: Vec<f64> = [1.0, 5.0, 10.0]
        .iter()
        .map(|&d: &f64| {
            prec_avg(
                &frames,
                &Config {
                    delta_theta: d.to_radians(),
                    ..cfg90()
                },
            )
        })
        .collect();
    check(
        p[0] >= p[1] && p[1] >= p[2] - 0.02,
        format!("Prec.Avg 1deg {:.4}, 5deg {:.4}, 10deg {:.4}", p[0], p[1], p[2]),
    )
}

fn criterion_6() -> Outcome {
    let mut params = noisy_params();
    params.scene.occluded_pairs = 2;
    let frames = frames_of(&params, NOISY_SCENES, NOISY_SEED);
    let on = prec_avg(&frames, &cfg90());
    let off = prec_avg(
        &frames,
        &Config {
            handle_occlusion: false,
            ..cfg90()
        },
    );
    check(
        on - off >= 0.05,
        format!("Prec.Avg with occlusion handling {on:.4}, without {off:.4}"),
    )
}

fn criterion_7() -> Outcome {
    let frames = frames_of(&noisy_params(), NOISY_SCENES, NOISY_SEED);
    let order = [
        VectorVariant::Full,
        VectorVariant::XyNaive,
        VectorVariant::XOnly,
        VectorVariant::YOnlyNaive,
    ];
    let p: Vec<f64> = order
        .iter()
        .map(|&variant| prec_avg(&frames, &Config { variant, ..cfg90() }))
        .collect();
    let ordered = p.windows(2).all(|w| w[0] >= w[1] - 0.01);
    check(
        ordered,
        format!(
            "Prec.Avg full {:.4}, xy-naive {:.4}, x-only {:.4}, y-only-naive {:.4}",
            p[0], p[1], p[2], p[3]
        ),
    )
}

fn criterion_8() -> Outcome {
    let set = |base: u64, e: &[(f64, f64)]| {
        VectorSet::new(
            e.iter()
                .enumerate()
                .map(|(k, &(x, y))| VectorEntry {
                    source_id: SubjectId(base + k as u64),
                    x,
                    y,
                })
                .collect(),
        )
        .expect("distinct ids")
    };
    // sum|dx| = 2 with lambda 0.015 gives 0.03; sum|dy| = 0.01; two pairs of two entries each
    let vt = set(0, &[(-1.0, 0.0), (0.5, 2.0)]);
    let vh = set(10, &[(0.5, 2.0), (1.0, 0.01)]);
    let cfg = Config {
        rho: 25.0,
        lambda: 0.015,
        ..Config::default()
    };
    let phi = matching_cost(&[(0, 1), (1, 0)], &vt, &vh, 1.0, &cfg);
    check(phi == 0.5, format!("phi = {phi:?}"))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("roundtrip.json");
    let frames = frames_of(&noiseless_params(), ROUND_TRIP_SCENES, ROUND_TRIP_SEED);
    save_dataset(&data, &frames).map_err(|e| e.to_string())?;
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"alpha_deg": 90}"#).map_err(|e| e.to_string())?;

    let mut outputs = Vec::new();
    for jobs in [1, 8] {
        let out = dir.path().join(format!("results_{jobs}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_crossview"))
            .args(["--jobs", &jobs.to_string(), "associate", "--dataset"])
            .arg(&data)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("--jobs {jobs} exited with {status}"));
        }
        let results = std::fs::read(&out).map_err(|e| e.to_string())?;
        let metrics = std::fs::read(out.with_extension("metrics.csv")).map_err(|e| e.to_string())?;
        outputs.push((results, metrics));
    }
    check(
        outputs[0] == outputs[1],
        format!(
            "results {} bytes, metrics {} bytes, identical: {}",
            outputs[0].0.len(),
            outputs[0].1.len(),
            outputs[0] == outputs[1]
        ),
    )
}

/// Overlap counted cell by cell on the integer grid.
fn brute_iou(a: (i32, i32, i32, i32), b: (i32, i32, i32, i32)) -> (i64, i64) {
    let inside = |r: (i32, i32, i32, i32), x: i32, y: i32| x >= r.0 && x < r.2 && y >= r.1 && y < r.3;
    let (mut inter, mut union) = (0, 0);
    for x in 0..32 {
        for y in 0..32 {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += i64::from(ia && ib);
            union += i64::from(ia || ib);
        }
    }
    (inter, union)
}

fn criterion_10() -> Outcome {
    let bb = |r: (i32, i32, i32, i32)| BoundingBox {
        x1: r.0.into(),
        y1: r.1.into(),
        x2: r.2.into(),
        y2: r.3.into(),
    };
    // 2x2 and 2x1 inside it: IoU exactly 0.5
    let half = resolve_by_iou(&[bb((0, 0, 2, 2))], &[(SubjectId(7), bb((0, 0, 2, 1)))], 0.5);
    if !half.is_empty() {
        return Err("IoU exactly 0.5 was accepted".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let boxed = |rng: &mut ChaCha8Rng| {
        let (x1, y1) = (rng.random_range(0..24), rng.random_range(0..24));
        (x1, y1, x1 + rng.random_range(1..8), y1 + rng.random_range(1..8))
    };
    let (mut iou_errors, mut decision_errors, mut at_half) = (0, 0, 0);
    for _ in 0..1000 {
        let (a, b) = (boxed(&mut rng), boxed(&mut rng));
        let (inter, union) = brute_iou(a, b);
        let expected = inter as f64 / union as f64;
        if (bb(a).iou(&bb(b)) - expected).abs() > 1e-12 {
            iou_errors += 1;
        }
        at_half += usize::from(2 * inter == union);
        let kept = !resolve_by_iou(&[bb(a)], &[(SubjectId(1), bb(b))], 0.5).is_empty();
        if kept != (2 * inter > union) {
            decision_errors += 1;
        }
    }
    check(
        iou_errors == 0 && decision_errors == 0,
        format!("1000 random pairs ({at_half} at exactly 0.5): IoU errors {iou_errors}, keep/drop errors {decision_errors}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("DP equals exhaustive path search", criterion_1),
        ("noiseless round trip", criterion_2),
        ("geometry invariants", criterion_3),
        ("scale absorption", criterion_4),
        ("angle step trend", criterion_5),
        ("occlusion handling gain", criterion_6),
        ("vector variant ordering", criterion_7),
        ("cost worked example", criterion_8),
        ("determinism across --jobs", criterion_9),
        ("IoU strict threshold", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {status}: {name}: {detail} [{:.1?}]",
            k + 1,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
