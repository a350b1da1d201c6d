use super::{Matching, TourGraph, TourVertex};

const EPS: f64 = 1e-10;

/// Nearest-neighbor construction followed by asymmetric 2-opt and or-opt
/// (segments of up to three nodes) on a depot-rooted cycle. Returns the order
/// of nodes `1..k` and the cycle cost.
pub fn labeled_heuristic(d: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let k = d.len();
    if k <= 1 {
        return (vec![], 0.0);
    }
    let mut used = vec![false; k];
    let mut t = vec![0];
    let mut cur = 0;
    for _ in 1..k {
        let nxt = (1..k)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| d[cur][a].total_cmp(&d[cur][b]))
            .expect("unvisited node remains");
        used[nxt] = true;
        t.push(nxt);
        cur = nxt;
    }
    t.push(0);

    while two_opt_asym(d, &mut t) || or_opt_asym(d, &mut t) {}
    let cost = t.windows(2).map(|w| d[w[0]][w[1]]).sum();
    (t[1..t.len() - 1].to_vec(), cost)
}

/// One pass of first-improvement 2-opt; segment reversal flips arc
/// directions, so forward and backward prefix sums price the interior.
fn two_opt_asym(d: &[Vec<f64>], t: &mut [usize]) -> bool {
    let len = t.len();
    let mut improved = false;
    let (mut fw, mut bw) = (vec![0.0; len], vec![0.0; len]);
    let refresh = |t: &[usize], fw: &mut Vec<f64>, bw: &mut Vec<f64>| {
        for p in 1..len {
            fw[p] = fw[p - 1] + d[t[p - 1]][t[p]];
            bw[p] = bw[p - 1] + d[t[p]][t[p - 1]];
        }
    };
    refresh(t, &mut fw, &mut bw);
    for i in 1..len - 1 {
        for j in i + 1..len - 1 {
            let delta = d[t[i - 1]][t[j]] + d[t[i]][t[j + 1]] - d[t[i - 1]][t[i]] - d[t[j]][t[j + 1]]
                + (bw[j] - bw[i])
                - (fw[j] - fw[i]);
            if delta < -EPS {
                t[i..=j].reverse();
                refresh(t, &mut fw, &mut bw);
                improved = true;
            }
        }
    }
    improved
}

fn or_opt_asym(d: &[Vec<f64>], t: &mut Vec<usize>) -> bool {
    let len = t.len();
    for seg in 1..=3 {
        for i in 1..len - seg {
            let j = i + seg - 1;
            let cut = d[t[i - 1]][t[j + 1]] - d[t[i - 1]][t[i]] - d[t[j]][t[j + 1]];
            for p in (0..len - 1).filter(|&p| p + 1 < i || p > j) {
                let delta = cut + d[t[p]][t[i]] + d[t[j]][t[p + 1]] - d[t[p]][t[p + 1]];
                if delta < -EPS {
                    relocate(t, i, j, p);
                    return true;
                }
            }
        }
    }
    false
}

/// Moves `t[i..=j]` to sit between `t[p]` and `t[p + 1]`.
fn relocate<T: Copy>(t: &mut Vec<T>, i: usize, j: usize, p: usize) {
    let seg: Vec<T> = t.drain(i..=j).collect();
    let at = if p < i { p + 1 } else { p + 1 - seg.len() };
    t.splice(at..at, seg);
}

/// Unlabeled tour improvement on the node sequence `s_M, s, g, s, g, ...,
/// g_M`. Moves keep the start/goal alternation: 2-opt between two nodes of
/// the same kind, swaps of two same-kind nodes, and relocation of 1 to 3
/// consecutive (start, goal) pairs.
pub fn unlabeled_heuristic(g: &TourGraph) -> (Matching, f64) {
    let n = g.n;
    if n == 0 {
        return (vec![], 0.0);
    }
    let s: Vec<usize> = (0..n).map(|i| g.index(TourVertex::Start(i))).collect();
    let gl: Vec<usize> = (0..n).map(|i| g.index(TourVertex::Goal(i))).collect();
    let nearest = |from: usize, pool: &[usize], used: &[bool]| {
        (0..n).filter(|&i| !used[i]).min_by(|&a, &b| g.w(from, pool[a]).total_cmp(&g.w(from, pool[b]))).unwrap()
    };
    let (mut su, mut gu) = (vec![false; n], vec![false; n]);
    let mut v = vec![0];
    let mut cur = 0;
    for _ in 0..n {
        let a = nearest(cur, &s, &su);
        su[a] = true;
        let b = nearest(s[a], &gl, &gu);
        gu[b] = true;
        v.extend([s[a], gl[b]]);
        cur = gl[b];
    }
    v.push(1);

    let len = v.len();
    let edge = |v: &[usize], k: usize| g.w(v[k], v[k + 1]);
    loop {
        let mut improved = false;
        // 2-opt between same-kind endpoints
        for i in 1..len - 1 {
            for j in (i + 2..len - 1).step_by(2) {
                let delta = g.w(v[i - 1], v[j]) + g.w(v[i], v[j + 1]) - edge(&v, i - 1) - edge(&v, j);
                if delta < -EPS {
                    v[i..=j].reverse();
                    improved = true;
                }
            }
        }
        // same-kind swaps
        for i in 1..len - 1 {
            for j in (i + 2..len - 1).step_by(2) {
                let touched = [i - 1, i, j - 1, j];
                let before: f64 = dedup_sum(&touched, |k| edge(&v, k));
                v.swap(i, j);
                let after: f64 = dedup_sum(&touched, |k| edge(&v, k));
                if after - before < -EPS {
                    improved = true;
                } else {
                    v.swap(i, j);
                }
            }
        }
        // pair-block relocation
        'outer: for pairs in 1..=3 {
            for i in (1..len - 1).step_by(2) {
                let j = i + 2 * pairs - 1;
                if j >= len - 1 {
                    break;
                }
                let cut = g.w(v[i - 1], v[j + 1]) - edge(&v, i - 1) - edge(&v, j);
                // interior parity is invariant: odd slots hold starts, even slots goals
                for p in (0..len - 1).step_by(2).filter(|&p| p + 1 < i || p > j) {
                    let delta = cut + g.w(v[p], v[i]) + g.w(v[j], v[p + 1]) - edge(&v, p);
                    if delta < -EPS {
                        relocate(&mut v, i, j, p);
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    let pairs: Matching = v[1..len - 1]
        .chunks(2)
        .map(|c| match (g.vertices[c[0]], g.vertices[c[1]]) {
            (TourVertex::Start(a), TourVertex::Goal(b)) => (a, b),
            other => unreachable!("alternation broken: {other:?}"),
        })
        .collect();
    let cost = (0..len - 1).map(|k| edge(&v, k)).sum();
    (pairs, cost)
}

fn dedup_sum(idx: &[usize], f: impl Fn(usize) -> f64) -> f64 {
    let mut seen: Vec<usize> = idx.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.into_iter().map(f).sum()
}

#[cfg(test)]
mod tests {
    use super::super::exact::held_karp;
    use super::*;

    #[test]
    fn relocate_moves_segment() {
        let mut t = vec![0, 1, 2, 3, 4, 5];
        relocate(&mut t, 1, 2, 4);
        assert_eq!(t, vec![0, 3, 4, 1, 2, 5]);
        relocate(&mut t, 3, 4, 0);
        assert_eq!(t, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn heuristic_finds_planted_cycle() {
        // cheap ring 0 -> 3 -> 1 -> 4 -> 2 -> 0, everything else costly
        let ring = [0, 3, 1, 4, 2];
        let mut d = vec![vec![10.0; 5]; 5];
        for w in 0..5 {
            d[ring[w]][ring[(w + 1) % 5]] = 1.0;
            d[w][w] = 0.0;
        }
        let (order, c) = labeled_heuristic(&d);
        assert_eq!(c, held_karp(&d).1);
        assert_eq!(order, vec![3, 1, 4, 2]);
    }
}
