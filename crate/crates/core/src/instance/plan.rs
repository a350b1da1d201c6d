use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{overlaps, Instance, Pose};

/// A placement slot. Indices refer to positions in `Instance::objects`
/// (start and goal slots) or `Instance::buffers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Start(usize),
    Goal(usize),
    Buffer(usize),
}

impl Location {
    pub fn pose(self, inst: &Instance) -> Pose {
        match self {
            Location::Start(i) => inst.objects[i].start,
            Location::Goal(i) => inst.objects[i].goal,
            Location::Buffer(k) => inst.buffers[k],
        }
    }
}

/// A pick-and-place without distance bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub object: usize,
    pub from: Location,
    pub to: Location,
}

impl Move {
    pub fn new(object: usize, from: Location, to: Location) -> Self {
        Move { object, from, to }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub object_id: u32,
    pub object: usize,
    pub from: Location,
    pub to: Location,
    pub pick: Pose,
    pub place: Pose,
    /// Empty-handed travel from the previous release (or `s_M`).
    pub d_e: f64,
    /// Loaded travel from pick to place.
    pub d_l: f64,
}

/// Ordered pick-and-place actions with their travel distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPlan {
    pub actions: Vec<Action>,
    /// Travel from the last release (or `s_M` for an empty plan) to `g_M`.
    pub d_f: f64,
}

impl ActionPlan {
    pub fn from_moves(inst: &Instance, moves: impl IntoIterator<Item = Move>) -> Self {
        let mut at = inst.rest_start;
        let actions = moves
            .into_iter()
            .map(|m| {
                let pick = m.from.pose(inst);
                let place = m.to.pose(inst);
                let a = Action {
                    object_id: inst.objects[m.object].id,
                    object: m.object,
                    from: m.from,
                    to: m.to,
                    pick,
                    place,
                    d_e: at.dist(pick),
                    d_l: pick.dist(place),
                };
                at = place;
                a
            })
            .collect();
        ActionPlan { actions, d_f: at.dist(inst.rest_goal) }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn moves(&self) -> Vec<Move> {
        self.actions.iter().map(|a| Move::new(a.object, a.from, a.to)).collect()
    }

    /// `Σ (d_e + d_l) + d_f`.
    pub fn distance(&self) -> f64 {
        self.actions.iter().map(|a| a.d_e + a.d_l).sum::<f64>() + self.d_f
    }

    /// Number of objects parked in a buffer at least once.
    pub fn buffer_visits(&self) -> usize {
        self.actions.iter().filter(|a| matches!(a.to, Location::Buffer(_))).count()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("invalid plan: action {index} {field} is {found}, expected {expected}")]
    Inconsistent { index: usize, field: &'static str, found: f64, expected: f64 },
    #[error("invalid plan: action {index} {field} pose does not match its slot")]
    PoseMismatch { index: usize, field: &'static str },
    #[error("invalid plan: action {index} references a missing slot")]
    MissingSlot { index: usize },
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Total cost `|A| (c_g + c_r) + c_m (Σ (d_e + d_l) + d_f)` after checking the
/// distance fields against the poses.
pub fn plan_cost(inst: &Instance, plan: &ActionPlan) -> Result<f64, PlanError> {
    let mut at = inst.rest_start;
    for (index, a) in plan.actions.iter().enumerate() {
        let in_range = |l: Location| match l {
            Location::Start(i) | Location::Goal(i) => i < inst.objects.len(),
            Location::Buffer(k) => k < inst.buffers.len(),
        };
        if !in_range(a.from) || !in_range(a.to) {
            return Err(PlanError::MissingSlot { index });
        }
        if a.from.pose(inst) != a.pick {
            return Err(PlanError::PoseMismatch { index, field: "pick" });
        }
        if a.to.pose(inst) != a.place {
            return Err(PlanError::PoseMismatch { index, field: "place" });
        }
        let d_e = at.dist(a.pick);
        if !close(a.d_e, d_e) {
            return Err(PlanError::Inconsistent { index, field: "d_e", found: a.d_e, expected: d_e });
        }
        let d_l = a.pick.dist(a.place);
        if !close(a.d_l, d_l) {
            return Err(PlanError::Inconsistent { index, field: "d_l", found: a.d_l, expected: d_l });
        }
        at = a.place;
    }
    let d_f = at.dist(inst.rest_goal);
    if !close(plan.d_f, d_f) {
        return Err(PlanError::Inconsistent {
            index: plan.actions.len(),
            field: "d_f",
            found: plan.d_f,
            expected: d_f,
        });
    }
    let c = inst.cost;
    Ok(plan.actions.len() as f64 * (c.c_g + c.c_r) + c.c_m * plan.distance())
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("step {step}: object {object} is not at {from:?}")]
    NotAtPickSlot { step: usize, object: usize, from: Location },
    #[error("step {step}: target {to:?} is occupied")]
    Occupied { step: usize, to: Location },
    #[error("step {step}: placing object {object} at {to:?} collides with object {other}")]
    Collision { step: usize, object: usize, to: Location, other: usize },
    #[error("step {step}: object {object} cannot be placed at {to:?}")]
    WrongTarget { step: usize, object: usize, to: Location },
    #[error("object {object} did not end on a goal")]
    Unfinished { object: usize },
}

/// Replays `plan` against the footprints: every pick must find its object,
/// every placement must land on a vacant slot clear of all other objects, and
/// the run must end with all goals filled.
pub fn replay(inst: &Instance, plan: &ActionPlan) -> Result<(), ReplayError> {
    replay_moves(inst, &plan.moves())
}

pub(crate) fn replay_moves(inst: &Instance, moves: &[Move]) -> Result<(), ReplayError> {
    let n = inst.objects.len();
    let mut at: Vec<Location> = (0..n).map(Location::Start).collect();
    let rb = inst.buffer_radius();
    let footprint = |loc: Location, obj: usize| -> (Pose, f64) {
        match loc {
            Location::Buffer(_) => (loc.pose(inst), rb),
            _ => (loc.pose(inst), inst.objects[obj].radius),
        }
    };

    for (step, m) in moves.iter().enumerate() {
        let obj = m.object;
        if obj >= n || at[obj] != m.from {
            return Err(ReplayError::NotAtPickSlot { step, object: obj, from: m.from });
        }
        match m.to {
            Location::Start(_) => return Err(ReplayError::WrongTarget { step, object: obj, to: m.to }),
            Location::Goal(j) if inst.labeled && j != obj => {
                return Err(ReplayError::WrongTarget { step, object: obj, to: m.to })
            }
            Location::Goal(j) if j >= n => {
                return Err(ReplayError::WrongTarget { step, object: obj, to: m.to })
            }
            Location::Buffer(k) if k >= inst.buffers.len() => {
                return Err(ReplayError::WrongTarget { step, object: obj, to: m.to })
            }
            _ => {}
        }
        if at.iter().enumerate().any(|(o, &l)| o != obj && l == m.to) {
            return Err(ReplayError::Occupied { step, to: m.to });
        }
        let (place, r) = footprint(m.to, obj);
        for (other, &l) in at.iter().enumerate() {
            if other == obj {
                continue;
            }
            let (p, ro) = footprint(l, other);
            if overlaps(place, r, p, ro) {
                return Err(ReplayError::Collision { step, object: obj, to: m.to, other });
            }
        }
        at[obj] = m.to;
    }

    for (object, &l) in at.iter().enumerate() {
        match l {
            Location::Goal(j) if !inst.labeled || j == object => {}
            _ => return Err(ReplayError::Unfinished { object }),
        }
    }
    Ok(())
}
