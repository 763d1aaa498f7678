//! Shared domain types: detections, camera hypotheses, vector sets, configuration.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque subject identifier. Unique within one view of one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectId(pub u64);

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A subject detected in the overhead image, reduced to its box center in pixels
/// (x right, y down).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopDetection {
    pub id: SubjectId,
    pub pos: Point2,
}

impl TopDetection {
    pub fn new(id: u64, x: f64, y: f64) -> Self {
        Self {
            id: SubjectId(id),
            pos: Point2::new(x, y),
        }
    }
}

/// A subject detected in the egocentric image: horizontal box center and box height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorDetection {
    pub id: SubjectId,
    pub cx: f64,
    pub h: f64,
}

impl HorDetection {
    pub fn new(id: u64, cx: f64, h: f64) -> Self {
        Self {
            id: SubjectId(id),
            cx,
            h,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorImageMeta {
    pub width: f64,
}

impl HorImageMeta {
    pub fn new(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizontal image width must be positive, got {width}"
            )));
        }
        Ok(Self { width })
    }
}

/// How each view is turned into (x, y) entries and compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorVariant {
    /// Normalized x plus depth surrogates aligned by the estimated scale.
    #[default]
    Full,
    /// Lateral coordinate only.
    XOnly,
    /// Depth surrogates only, each view min-max scaled to [0, 1].
    YOnlyNaive,
    /// Lateral coordinate plus min-max scaled depth surrogates.
    XyNaive,
}

impl VectorVariant {
    pub const ALL: [VectorVariant; 4] = [
        VectorVariant::Full,
        VectorVariant::XyNaive,
        VectorVariant::XOnly,
        VectorVariant::YOnlyNaive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VectorVariant::Full => "full",
            VectorVariant::XOnly => "x-only",
            VectorVariant::YOnlyNaive => "y-only-naive",
            VectorVariant::XyNaive => "xy-naive",
        }
    }
}

impl fmt::Display for VectorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Association parameters. Angles are radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    /// Full horizontal field of view of the egocentric camera.
    pub alpha: f64,
    /// Base of the pair-count incentive in the matching cost.
    pub rho: f64,
    /// Weight of the lateral residual against the depth residual.
    pub lambda: f64,
    /// Bearing tolerance below which the deeper of two subjects is occluded.
    pub beta: f64,
    /// Step of the view-angle search grid.
    pub delta_theta: f64,
    /// Maximum lateral gap for a pair to count as a scale-estimation inlier.
    pub ransac_x_threshold: f64,
    /// Flip the rotation sense of the camera right direction.
    pub mirror: bool,
    /// Drop overhead subjects hidden behind nearer ones.
    pub handle_occlusion: bool,
    pub variant: VectorVariant,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            alpha: 120f64.to_radians(),
            rho: 25.0,
            lambda: 0.015,
            beta: 2f64.to_radians(),
            delta_theta: 1f64.to_radians(),
            ransac_x_threshold: 0.05,
            mirror: false,
            handle_occlusion: true,
            variant: VectorVariant::Full,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha < PI) {
            return bad(format!("alpha must lie in (0, pi), got {}", self.alpha));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad(format!("rho must exceed 1, got {}", self.rho));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.delta_theta > 0.0 && self.delta_theta <= TAU) {
            return bad(format!(
                "delta_theta must lie in (0, 2pi], got {}",
                self.delta_theta
            ));
        }
        if !(self.ransac_x_threshold > 0.0 && self.ransac_x_threshold.is_finite()) {
            return bad(format!(
                "ransac_x_threshold must be positive, got {}",
                self.ransac_x_threshold
            ));
        }
        Ok(())
    }

    /// Validated copy of `self`.
    pub fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// tan(alpha / 2), the normalizer that maps the field-of-view edges to x = +-1.
    pub fn half_fov_tan(&self) -> f64 {
        (self.alpha / 2.0).tan()
    }
}

/// Candidate wearer location and optical-axis bearing in the overhead image.
///
/// The bearing is measured screen-clockwise from the +x axis (x right, y down).
/// The camera right direction is the optical axis rotated a further quarter turn
/// screen-clockwise, or counter-clockwise when `mirror` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraHypothesis {
    pub wearer_index: usize,
    pub position: Point2,
    pub theta: f64,
}

impl CameraHypothesis {
    pub fn new(top: &[TopDetection], wearer_index: usize, theta: f64) -> Result<Self> {
        let det = top
            .get(wearer_index)
            .ok_or(Error::WearerOutOfRange(wearer_index, top.len()))?;
        Ok(Self {
            wearer_index,
            position: det.pos,
            theta: theta.rem_euclid(TAU),
        })
    }

    pub fn axis(&self) -> Point2 {
        Point2::new(self.theta.cos(), self.theta.sin())
    }

    pub fn right(&self, mirror: bool) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        if mirror {
            Point2::new(s, -c)
        } else {
            Point2::new(-s, c)
        }
    }
}

/// One subject in the shared (x, y) representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorEntry {
    pub source_id: SubjectId,
    /// Normalized lateral coordinate in [-1, 1].
    pub x: f64,
    /// Depth surrogate: overhead pixels, or inverse box height.
    pub y: f64,
}

impl VectorEntry {
    fn order(&self, other: &Self) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.source_id.cmp(&other.source_id))
    }
}

/// Entries sorted ascending by x, then y, then source id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorSet {
    entries: Vec<VectorEntry>,
}

impl VectorSet {
    pub fn new(mut entries: Vec<VectorEntry>) -> Result<Self> {
        entries.sort_by(VectorEntry::order);
        let mut ids: Vec<_> = entries.iter().map(|e| e.source_id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSourceId(w[0]));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[VectorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.x)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.y)
    }
}

/// One-to-one association between the two vector sets for a single hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    /// (overhead id, egocentric id) pairs in ascending overhead-x order.
    pub pairs: Vec<(SubjectId, SubjectId)>,
    pub mu: f64,
    pub cost: f64,
}

impl MatchResult {
    pub fn unmatched() -> Self {
        Self {
            pairs: Vec::new(),
            mu: 0.0,
            cost: f64::INFINITY,
        }
    }

    pub fn gamma(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_feasible(&self) -> bool {
        self.cost.is_finite()
    }
}
