use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{overlaps, CostParams, Instance, ObjectSpec, Pose, Workspace};

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("sampling budget of {budget} draws exhausted after placing {placed} discs")]
    SamplingBudgetExhausted { budget: usize, placed: usize },
    #[error("degree target unreachable: {0}")]
    UnreachableDegree(String),
}

/// Square of side `sqrt(n)` (at least 1) anchored at the origin, so disc
/// density stays constant as `n` grows.
pub fn default_workspace(n: usize) -> Workspace {
    let side = (n.max(1) as f64).sqrt();
    Workspace::new(0.0, 0.0, side, side)
}

fn rest_pose(ws: &Workspace) -> Pose {
    Pose::new(0.5 * (ws.xmin + ws.xmax), ws.ymin)
}

fn sample_inside(rng: &mut ChaCha8Rng, ws: &Workspace, r: f64) -> Pose {
    let x = ws.xmin + r + rng.random::<f64>() * (ws.width() - 2.0 * r).max(0.0);
    let y = ws.ymin + r + rng.random::<f64>() * (ws.height() - 2.0 * r).max(0.0);
    Pose::new(x, y)
}

fn clear_of(p: Pose, r: f64, placed: &[Pose]) -> bool {
    placed.iter().all(|&q| !overlaps(p, r, q, r))
}

/// Random labeled instance in which no two discs among all starts and goals
/// overlap. Discs lie fully inside `workspace`; both rest poses sit at the
/// bottom-center edge.
pub fn generate_no_overlap(
    n: usize,
    seed: u64,
    workspace: Workspace,
    radius: f64,
) -> Result<Instance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 1000 * n;
    let mut placed: Vec<Pose> = Vec::with_capacity(2 * n);
    let mut draws = 0;
    while placed.len() < 2 * n {
        if draws == budget {
            return Err(GenerateError::SamplingBudgetExhausted { budget, placed: placed.len() });
        }
        draws += 1;
        let p = sample_inside(&mut rng, &workspace, radius);
        if clear_of(p, radius, &placed) {
            placed.push(p);
        }
    }
    let objects = (0..n)
        .map(|i| ObjectSpec { id: i as u32, radius, start: placed[2 * i], goal: placed[2 * i + 1] })
        .collect();
    let rest = rest_pose(&workspace);
    Ok(Instance {
        workspace,
        rest_start: rest,
        rest_goal: rest,
        buffers: Vec::new(),
        labeled: true,
        cost: CostParams::default(),
        objects,
    })
}

/// Parameters for [`generate_with_overlap`].
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapConfig {
    pub n: usize,
    /// Target average total (in + out) degree of the dependency digraph.
    pub avg_degree: f64,
    /// Cap on both in- and out-degree of every vertex.
    pub max_degree: usize,
    pub seed: u64,
    pub radius: f64,
    /// Object region; defaults to [`default_workspace`]. The buffer strip is
    /// appended above it.
    pub workspace: Option<Workspace>,
    /// Number of external buffers; defaults to `n`.
    pub buffers: Option<usize>,
}

impl OverlapConfig {
    pub fn new(n: usize, avg_degree: f64, max_degree: usize, seed: u64) -> Self {
        OverlapConfig {
            n,
            avg_degree,
            max_degree,
            seed,
            radius: 0.2,
            workspace: None,
            buffers: None,
        }
    }
}

// Starts overlapping more goals than this are rarely realizable among
// non-overlapping goal discs.
const MAX_WANT: usize = 3;
const ATTEMPTS: usize = 50;

/// Random labeled instance whose dependency digraph has `round(avg·n/2)` arcs
/// (average total degree within 10% of `avg_degree`) and in/out degrees at
/// most `max_degree`. Goals are placed first; each start is then placed so
/// that it overlaps exactly the number of foreign goals drawn for it.
pub fn generate_with_overlap(cfg: &OverlapConfig) -> Result<Instance, GenerateError> {
    let n = cfg.n;
    let quota = (cfg.avg_degree * n as f64 / 2.0).round() as usize;
    let cap = cfg.max_degree.min(MAX_WANT).min(n.saturating_sub(1));
    if cfg.avg_degree < 0.0 || cfg.avg_degree > cfg.max_degree as f64 {
        return Err(GenerateError::UnreachableDegree(format!(
            "average degree {} outside [0, {}]",
            cfg.avg_degree, cfg.max_degree
        )));
    }
    if quota > n * cap {
        return Err(GenerateError::UnreachableDegree(format!(
            "{quota} arcs do not fit {n} vertices with per-vertex cap {cap}"
        )));
    }
    if n > 0 && !degree_ok(quota, n, cfg.avg_degree) {
        return Err(GenerateError::UnreachableDegree(format!(
            "{quota} arcs over {n} vertices cannot be within 10% of average degree {}",
            cfg.avg_degree
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last = GenerateError::SamplingBudgetExhausted { budget: 1000 * n, placed: 0 };
    for _ in 0..ATTEMPTS {
        match attempt(cfg, quota, cap, &mut rng) {
            Ok(inst) => return Ok(inst),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn degree_ok(arcs: usize, n: usize, avg: f64) -> bool {
    let got = 2.0 * arcs as f64 / n as f64;
    (got - avg).abs() <= 0.1 * avg + 1e-12
}

fn attempt(
    cfg: &OverlapConfig,
    quota: usize,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Instance, GenerateError> {
    let n = cfg.n;
    let r = cfg.radius;
    let region = cfg.workspace.unwrap_or_else(|| default_workspace(n));
    let budget = 1000 * n;
    let mut draws = 0;

    let mut goals: Vec<Pose> = Vec::with_capacity(n);
    while goals.len() < n {
        if draws == budget {
            return Err(GenerateError::SamplingBudgetExhausted { budget, placed: goals.len() });
        }
        draws += 1;
        let p = sample_inside(rng, &region, r);
        if clear_of(p, r, &goals) {
            goals.push(p);
        }
    }

    let mut want = vec![0usize; n];
    for _ in 0..quota {
        let open: Vec<usize> = (0..n).filter(|&i| want[i] < cap).collect();
        want[*open.choose(rng).expect("quota checked against caps")] += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| std::cmp::Reverse(want[i]));

    let mut out_deg = vec![0usize; n];
    let mut starts: Vec<Option<Pose>> = vec![None; n];
    let mut placed_starts: Vec<Pose> = Vec::with_capacity(n);
    let mut carry = 0usize;
    let hits = |p: Pose, i: usize| -> Vec<usize> {
        (0..n).filter(|&j| j != i && overlaps(p, r, goals[j], r)).collect()
    };

    for &i in &order {
        let mut w = (want[i] + carry).min(cap);
        carry = want[i] + carry - w;
        let per_vertex = budget / n.max(1);
        let mut found = None;
        while found.is_none() {
            let mut tries = 0;
            while tries < per_vertex && draws < budget {
                tries += 1;
                draws += 1;
                let p = if w == 0 {
                    sample_inside(rng, &region, r)
                } else {
                    match near_goals(rng, &goals, &out_deg, cfg.max_degree, i, w, r) {
                        Some(p) => p,
                        None => break,
                    }
                };
                if !region_contains(&region, p, r)
                    || overlaps(p, r, goals[i], r)
                    || !clear_of(p, r, &placed_starts)
                {
                    continue;
                }
                let h = hits(p, i);
                if h.len() == w && h.iter().all(|&j| out_deg[j] < cfg.max_degree) {
                    found = Some((p, h));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
            if w == 0 || draws >= budget {
                return Err(GenerateError::SamplingBudgetExhausted {
                    budget,
                    placed: n + placed_starts.len(),
                });
            }
            w -= 1;
            carry += 1;
        }
        let (p, h) = found.expect("loop exits with a placement");
        for j in h {
            out_deg[j] += 1;
        }
        starts[i] = Some(p);
        placed_starts.push(p);
    }

    let arcs: usize = out_deg.iter().sum();
    if n > 0 && !degree_ok(arcs, n, cfg.avg_degree) {
        return Err(GenerateError::UnreachableDegree(format!(
            "realized {arcs} arcs against a quota of {quota}"
        )));
    }

    let objects = (0..n)
        .map(|i| ObjectSpec {
            id: i as u32,
            radius: r,
            start: starts[i].expect("every start placed"),
            goal: goals[i],
        })
        .collect();
    let (workspace, buffers) = buffer_strip(&region, cfg.buffers.unwrap_or(n), r);
    let rest = rest_pose(&workspace);
    Ok(Instance {
        workspace,
        rest_start: rest,
        rest_goal: rest,
        buffers,
        labeled: true,
        cost: CostParams::default(),
        objects,
    })
}

fn region_contains(ws: &Workspace, p: Pose, r: f64) -> bool {
    p.x >= ws.xmin + r && p.x <= ws.xmax - r && p.y >= ws.ymin + r && p.y <= ws.ymax - r
}

/// A point within overlap range of an anchor goal and, when `w ≥ 2`, of a
/// second goal close to the anchor.
fn near_goals(
    rng: &mut ChaCha8Rng,
    goals: &[Pose],
    out_deg: &[usize],
    max_degree: usize,
    own: usize,
    w: usize,
    r: f64,
) -> Option<Pose> {
    let open: Vec<usize> =
        (0..goals.len()).filter(|&j| j != own && out_deg[j] < max_degree).collect();
    let &a = open.choose(rng)?;
    let center = if w >= 2 {
        let near: Vec<usize> =
            open.iter().copied().filter(|&j| j != a && goals[j].dist(goals[a]) < 4.0 * r).collect();
        let &b = near.choose(rng)?;
        Pose::new(0.5 * (goals[a].x + goals[b].x), 0.5 * (goals[a].y + goals[b].y))
    } else {
        goals[a]
    };
    let rho = 2.0 * r * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Some(Pose::new(center.x + rho * theta.cos(), center.y + rho * theta.sin()))
}

/// Lays `count` buffer slots out in rows above `region` and returns the
/// enlarged workspace.
fn buffer_strip(region: &Workspace, count: usize, r: f64) -> (Workspace, Vec<Pose>) {
    let pitch = 2.0 * r * 1.1;
    let cols = ((region.width() / pitch).floor() as usize).max(1);
    let rows = count.div_ceil(cols);
    let base = region.ymax + pitch;
    let buffers = (0..count)
        .map(|k| {
            let (row, col) = (k / cols, k % cols);
            Pose::new(region.xmin + r + col as f64 * pitch, base + row as f64 * pitch)
        })
        .collect();
    let ymax = if rows == 0 { region.ymax } else { base + (rows - 1) as f64 * pitch + r };
    (Workspace::new(region.xmin, region.ymin, region.xmax.max(region.xmin + 2.0 * r), ymax), buffers)
}

#[cfg(test)]
mod tests {
    use super::super::validate;
    use super::*;

    fn degrees(inst: &Instance) -> (usize, Vec<usize>, Vec<usize>) {
        let n = inst.len();
        let (mut ins, mut outs, mut arcs) = (vec![0; n], vec![0; n], 0);
        for i in 0..n {
            for j in 0..n {
                if i != j && inst.start_hits_goal(j, i) {
                    outs[i] += 1;
                    ins[j] += 1;
                    arcs += 1;
                }
            }
        }
        (arcs, ins, outs)
    }

    #[test]
    fn empty_instance() {
        let inst = generate_no_overlap(0, 1, default_workspace(0), 0.1).unwrap();
        assert!(inst.objects.is_empty());
        assert!(validate(&inst).is_empty());
    }

    #[test]
    fn no_overlap_sizes() {
        for &(n, seed) in &[(10, 7), (200, 3)] {
            let inst = generate_no_overlap(n, seed, default_workspace(n), 0.15).unwrap();
            assert_eq!(inst.len(), n);
            assert!(validate(&inst).is_empty());
            assert!(!inst.has_overlap());
        }
    }

    #[test]
    fn too_dense_fails() {
        let err = generate_no_overlap(50, 1, Workspace::new(0.0, 0.0, 1.0, 1.0), 0.2).unwrap_err();
        assert!(matches!(err, GenerateError::SamplingBudgetExhausted { .. }));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_with_overlap(&OverlapConfig::new(12, 2.0, 4, 9)).unwrap();
        let b = generate_with_overlap(&OverlapConfig::new(12, 2.0, 4, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overlap_degree_targets() {
        for &(n, avg) in &[(10, 2.0), (20, 2.0), (35, 2.5)] {
            for seed in 0..5 {
                let inst = generate_with_overlap(&OverlapConfig::new(n, avg, 4, seed)).unwrap();
                assert!(validate(&inst).is_empty(), "{:?}", validate(&inst));
                let (arcs, ins, outs) = degrees(&inst);
                let got = 2.0 * arcs as f64 / n as f64;
                assert!((got - avg).abs() <= 0.1 * avg, "n={n} avg={got}");
                assert!(ins.iter().chain(&outs).all(|&d| d <= 4));
                assert_eq!(inst.buffers.len(), n);
            }
        }
    }

    #[test]
    fn zero_degree_is_arcless() {
        let inst = generate_with_overlap(&OverlapConfig::new(8, 0.0, 4, 2)).unwrap();
        assert_eq!(degrees(&inst).0, 0);
        assert!(!inst.has_overlap());
    }

    #[test]
    fn unreachable_targets_rejected() {
        assert!(generate_with_overlap(&OverlapConfig::new(1, 2.0, 4, 0)).is_err());
        assert!(generate_with_overlap(&OverlapConfig::new(5, 3.0, 2, 0)).is_err());
    }
}
