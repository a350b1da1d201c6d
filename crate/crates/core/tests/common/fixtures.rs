use toro_core::instance::{CostParams, Instance, ObjectSpec, Pose, Workspace};

fn obj(id: u32, s: (f64, f64), g: (f64, f64)) -> ObjectSpec {
    ObjectSpec { id, radius: 1.0, start: Pose::new(s.0, s.1), goal: Pose::new(g.0, g.1) }
}

/// Two objects, each goal covering the other's start; one buffer above.
/// Buffering object 1 first is the shorter of the two minimal plans.
pub fn two_cycle() -> Instance {
    Instance {
        workspace: Workspace::new(-10.0, -10.0, 10.0, 10.0),
        rest_start: Pose::new(2.5, -4.0),
        rest_goal: Pose::new(2.5, -4.0),
        buffers: vec![Pose::new(2.5, 5.0)],
        labeled: true,
        cost: CostParams::default(),
        objects: vec![obj(1, (0.0, 0.0), (3.5, 0.0)), obj(2, (5.0, 0.0), (1.5, 0.0))],
    }
}

/// Object 0's goal covers the starts of 1 and 2, whose goals both cover
/// start 0. Buffering 0 needs four actions; clearing 0's goal first needs
/// five.
pub fn greedy_trap() -> Instance {
    Instance {
        workspace: Workspace::new(-10.0, -10.0, 20.0, 15.0),
        rest_start: Pose::new(5.0, -5.0),
        rest_goal: Pose::new(5.0, -5.0),
        buffers: vec![Pose::new(0.0, 10.0), Pose::new(5.0, 10.0)],
        labeled: true,
        cost: CostParams::default(),
        objects: vec![
            obj(0, (0.0, 0.0), (11.5, 0.0)),
            obj(1, (10.0, 0.0), (1.5, 0.0)),
            obj(2, (13.0, 0.0), (-1.5, 0.0)),
        ],
    }
}

pub fn line(n: usize) -> Instance {
    Instance {
        workspace: Workspace::new(-5.0, -5.0, 5.0 * n as f64 + 5.0, 10.0),
        rest_start: Pose::new(0.0, -3.0),
        rest_goal: Pose::new(0.0, -3.0),
        buffers: vec![],
        labeled: true,
        cost: CostParams::default(),
        objects: (0..n).map(|i| obj(i as u32, (5.0 * i as f64, 0.0), (5.0 * i as f64, 5.0))).collect(),
    }
}
