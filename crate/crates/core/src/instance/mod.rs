//! Geometric problem model: poses, disc footprints, arrangements, buffers and
//! the per-action cost model.

mod generate;
mod plan;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use generate::{
    default_workspace, generate_no_overlap, generate_with_overlap, GenerateError, OverlapConfig,
};
pub use plan::{plan_cost, replay, Action, ActionPlan, Location, Move, PlanError, ReplayError};

/// Distance slack for the overlap predicate. Tangent discs do not overlap.
pub const OVERLAP_TOL: f64 = 1e-9;

/// Planar position of a footprint center or a rest position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Pose {
    pub x: f64,
    pub y: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64) -> Self {
        Pose { x, y }
    }

    /// Euclidean distance.
    #[inline]
    pub fn dist(self, other: Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn translated(self, dx: f64, dy: f64) -> Pose {
        Pose::new(self.x + dx, self.y + dy)
    }
}

impl From<[f64; 2]> for Pose {
    fn from([x, y]: [f64; 2]) -> Self {
        Pose { x, y }
    }
}

impl From<Pose> for [f64; 2] {
    fn from(p: Pose) -> Self {
        [p.x, p.y]
    }
}

/// True iff two disc footprints overlap: center distance < `ra + rb - OVERLAP_TOL`.
#[inline]
pub fn overlaps(a: Pose, ra: f64, b: Pose, rb: f64) -> bool {
    a.dist(b) < ra + rb - OVERLAP_TOL
}

/// Axis-aligned bounding box of the tabletop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Workspace {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Workspace { xmin, ymin, xmax, ymax }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn contains(&self, p: Pose) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

/// Cost coefficients: per unit of travel, per grasp and per release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub c_m: f64,
    pub c_g: f64,
    pub c_r: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { c_m: 1.0, c_g: 1.0, c_r: 1.0 }
    }
}

/// An object with a disc footprint and its start and goal poses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: u32,
    pub radius: f64,
    pub start: Pose,
    pub goal: Pose,
}

/// A rearrangement problem.
///
/// Objects are addressed by their position in `objects` everywhere inside the
/// crate; `ObjectSpec::id` is only used for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub workspace: Workspace,
    pub rest_start: Pose,
    pub rest_goal: Pose,
    #[serde(default)]
    pub buffers: Vec<Pose>,
    #[serde(default = "default_labeled")]
    pub labeled: bool,
    #[serde(default)]
    pub cost: CostParams,
    pub objects: Vec<ObjectSpec>,
}

fn default_labeled() -> bool {
    true
}

/// One breached instance invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    StartOverlap { a: u32, b: u32 },
    GoalOverlap { a: u32, b: u32 },
    BufferOverlap { buffer: usize, object: u32, at_goal: bool },
    BufferCollision { a: usize, b: usize },
    DuplicateId { id: u32 },
    NonPositiveRadius { id: u32 },
    NonFinitePose { what: String },
    OutsideWorkspace { what: String },
    NegativeCost,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StartOverlap { a, b } => write!(f, "start-overlap(o_{a},o_{b})"),
            Violation::GoalOverlap { a, b } => write!(f, "goal-overlap(o_{a},o_{b})"),
            Violation::BufferOverlap { buffer, object, at_goal } => write!(
                f,
                "buffer-overlap(b_{buffer},{}_{object})",
                if *at_goal { "g" } else { "s" }
            ),
            Violation::BufferCollision { a, b } => write!(f, "buffer-collision(b_{a},b_{b})"),
            Violation::DuplicateId { id } => write!(f, "duplicate-id({id})"),
            Violation::NonPositiveRadius { id } => write!(f, "non-positive-radius(o_{id})"),
            Violation::NonFinitePose { what } => write!(f, "non-finite-pose({what})"),
            Violation::OutsideWorkspace { what } => write!(f, "outside-workspace({what})"),
            Violation::NegativeCost => write!(f, "negative-cost"),
        }
    }
}

impl Instance {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Footprint radius used for buffer slots: the largest object radius.
    pub fn buffer_radius(&self) -> f64 {
        self.objects.iter().map(|o| o.radius).fold(0.0, f64::max)
    }

    /// Object `i`'s start overlaps object `j`'s goal.
    pub fn start_hits_goal(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.objects[i], &self.objects[j]);
        overlaps(a.start, a.radius, b.goal, b.radius)
    }

    /// True iff some start overlaps some goal, own goal included.
    pub fn has_overlap(&self) -> bool {
        let n = self.len();
        (0..n).any(|i| (0..n).any(|j| self.start_hits_goal(i, j)))
    }

    pub fn id_of(&self, index: usize) -> u32 {
        self.objects[index].id
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Every pose shifted by `(dx, dy)`, workspace included.
    pub fn translated(&self, dx: f64, dy: f64) -> Instance {
        let mut out = self.clone();
        out.workspace = Workspace::new(
            self.workspace.xmin + dx,
            self.workspace.ymin + dy,
            self.workspace.xmax + dx,
            self.workspace.ymax + dy,
        );
        out.rest_start = self.rest_start.translated(dx, dy);
        out.rest_goal = self.rest_goal.translated(dx, dy);
        for b in &mut out.buffers {
            *b = b.translated(dx, dy);
        }
        for o in &mut out.objects {
            o.start = o.start.translated(dx, dy);
            o.goal = o.goal.translated(dx, dy);
        }
        out
    }
}

/// Lists every breached invariant; empty iff the instance is well formed.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let c = inst.cost;
    if !(c.c_m >= 0.0 && c.c_g >= 0.0 && c.c_r >= 0.0) {
        out.push(Violation::NegativeCost);
    }

    let check_pose = |what: String, p: Pose, out: &mut Vec<Violation>| {
        if !p.is_finite() {
            out.push(Violation::NonFinitePose { what });
        } else if !inst.workspace.contains(p) {
            out.push(Violation::OutsideWorkspace { what });
        }
    };
    check_pose("s_M".into(), inst.rest_start, &mut out);
    check_pose("g_M".into(), inst.rest_goal, &mut out);
    for (k, &b) in inst.buffers.iter().enumerate() {
        check_pose(format!("b_{k}"), b, &mut out);
    }

    let mut seen = HashSet::new();
    for o in &inst.objects {
        if !seen.insert(o.id) {
            out.push(Violation::DuplicateId { id: o.id });
        }
        if !(o.radius > 0.0 && o.radius.is_finite()) {
            out.push(Violation::NonPositiveRadius { id: o.id });
        }
        check_pose(format!("s_{}", o.id), o.start, &mut out);
        check_pose(format!("g_{}", o.id), o.goal, &mut out);
    }

    let objs = &inst.objects;
    for (i, a) in objs.iter().enumerate() {
        for b in &objs[i + 1..] {
            if overlaps(a.start, a.radius, b.start, b.radius) {
                out.push(Violation::StartOverlap { a: a.id, b: b.id });
            }
            if overlaps(a.goal, a.radius, b.goal, b.radius) {
                out.push(Violation::GoalOverlap { a: a.id, b: b.id });
            }
        }
    }

    let rb = inst.buffer_radius();
    for (k, &b) in inst.buffers.iter().enumerate() {
        for o in objs {
            if overlaps(b, rb, o.start, o.radius) {
                out.push(Violation::BufferOverlap { buffer: k, object: o.id, at_goal: false });
            }
            if overlaps(b, rb, o.goal, o.radius) {
                out.push(Violation::BufferOverlap { buffer: k, object: o.id, at_goal: true });
            }
        }
        for (l, &c) in inst.buffers.iter().enumerate().skip(k + 1) {
            if rb > 0.0 && overlaps(b, rb, c, rb) {
                out.push(Violation::BufferCollision { a: k, b: l });
            }
        }
    }
    out
}
