use super::{Matching, TourGraph, TourVertex};

/// Largest node count (depot included) accepted by [`held_karp`].
pub const HELD_KARP_LIMIT: usize = 16;
/// Largest object count accepted by [`unlabeled_exact`].
pub const UNLABELED_EXACT_LIMIT: usize = 10;

/// Minimum directed Hamiltonian cycle through node 0 of an asymmetric matrix.
/// Returns the visiting order of nodes `1..k` and the cycle cost; ties resolve
/// toward lower node indices.
pub fn held_karp(d: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let k = d.len();
    assert!((1..=HELD_KARP_LIMIT).contains(&k), "held_karp takes 1..={HELD_KARP_LIMIT} nodes");
    let m = k - 1;
    if m == 0 {
        return (vec![], 0.0);
    }
    let full = 1usize << m;
    // dp[set][last]: cheapest path from 0 through `set` ending at node last+1
    let mut dp = vec![f64::INFINITY; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = d[0][j + 1];
    }
    for set in 1..full {
        for last in 0..m {
            let cur = dp[set * m + last];
            if set >> last & 1 == 0 || !cur.is_finite() {
                continue;
            }
            for nxt in 0..m {
                if set >> nxt & 1 == 1 {
                    continue;
                }
                let to = (set | 1 << nxt) * m + nxt;
                let c = cur + d[last + 1][nxt + 1];
                if c < dp[to] {
                    dp[to] = c;
                    parent[to] = last as u8;
                }
            }
        }
    }
    let all = full - 1;
    let (mut last, mut best) = (0, f64::INFINITY);
    for j in 0..m {
        let c = dp[all * m + j] + d[j + 1][0];
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut set = all;
    loop {
        order.push(last + 1);
        let p = parent[set * m + last];
        set &= !(1 << last);
        if p == u8::MAX {
            break;
        }
        last = p as usize;
    }
    order.reverse();
    (order, best)
}

/// Rank of every mask among masks with the same popcount, in increasing
/// numeric order.
fn popcount_ranks(n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rank = vec![0; 1 << n];
    let mut count = vec![0; n + 1];
    for mask in 0..1usize << n {
        let c = mask.count_ones() as usize;
        rank[mask] = count[c];
        count[c] += 1;
    }
    (rank, count)
}

/// Exact minimum over all start orders and start-to-goal assignments of the
/// unlabeled tour `s_M s_a1 g_b1 s_a2 ... g_bn g_M`, by dynamic programming
/// over (picked starts, filled goals, current position).
pub fn unlabeled_exact(g: &TourGraph) -> (Matching, f64) {
    let n = g.n;
    assert!(!g.labeled && n <= UNLABELED_EXACT_LIMIT);
    if n == 0 {
        return (vec![], 0.0);
    }
    let s: Vec<usize> = (0..n).map(|i| g.index(TourVertex::Start(i))).collect();
    let gl: Vec<usize> = (0..n).map(|i| g.index(TourVertex::Goal(i))).collect();
    let (rank, count) = popcount_ranks(n);
    let at = |ss: usize, gs: usize, v: usize| (rank[ss] * count[gs.count_ones() as usize] + rank[gs]) * n + v;

    // full[k]: k objects placed, standing at a filled goal.
    // half[k]: k starts picked, k - 1 goals filled, standing at a picked start.
    let mut full: Vec<Vec<f64>> = (0..=n).map(|k| vec![f64::INFINITY; count[k] * count[k] * n]).collect();
    let mut half: Vec<Vec<f64>> =
        (0..=n).map(|k| if k == 0 { vec![] } else { vec![f64::INFINITY; count[k] * count[k - 1] * n] }).collect();
    for a in 0..n {
        half[1][at(1 << a, 0, a)] = g.w(0, s[a]);
    }
    let masks_by_size = |k: usize| (0..1usize << n).filter(move |m| m.count_ones() as usize == k);
    for k in 1..=n {
        for ss in masks_by_size(k) {
            for gs in masks_by_size(k - 1) {
                for a in (0..n).filter(|a| ss >> a & 1 == 1) {
                    let h = half[k][at(ss, gs, a)];
                    if !h.is_finite() {
                        continue;
                    }
                    for b in (0..n).filter(|b| gs >> b & 1 == 0) {
                        let slot = &mut full[k][at(ss, gs | 1 << b, b)];
                        *slot = slot.min(h + g.w(s[a], gl[b]));
                    }
                }
            }
        }
        if k == n {
            break;
        }
        for ss in masks_by_size(k) {
            for gs in masks_by_size(k) {
                for b in (0..n).filter(|b| gs >> b & 1 == 1) {
                    let f = full[k][at(ss, gs, b)];
                    if !f.is_finite() {
                        continue;
                    }
                    for a in (0..n).filter(|a| ss >> a & 1 == 0) {
                        let slot = &mut half[k + 1][at(ss | 1 << a, gs, a)];
                        *slot = slot.min(f + g.w(gl[b], s[a]));
                    }
                }
            }
        }
    }

    let all = (1usize << n) - 1;
    let (mut b, mut best) = (0, f64::INFINITY);
    for j in 0..n {
        let c = full[n][at(all, all, j)] + g.w(gl[j], 1);
        if c < best {
            best = c;
            b = j;
        }
    }
    // Walk back, re-deriving the argmin at each step.
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
    let mut pairs = Vec::with_capacity(n);
    let (mut ss, mut gs) = (all, all);
    for k in (1..=n).rev() {
        let target = full[k][at(ss, gs, b)];
        let g_prev = gs & !(1 << b);
        let a = (0..n)
            .filter(|a| ss >> a & 1 == 1)
            .find(|&a| close(half[k][at(ss, g_prev, a)] + g.w(s[a], gl[b]), target))
            .expect("dp predecessor exists");
        pairs.push((a, b));
        gs = g_prev;
        if k == 1 {
            break;
        }
        let target = half[k][at(ss, gs, a)];
        let s_prev = ss & !(1 << a);
        b = (0..n)
            .filter(|b| gs >> b & 1 == 1)
            .find(|&b| close(full[k - 1][at(s_prev, gs, b)] + g.w(gl[b], s[a]), target))
            .expect("dp predecessor exists");
        ss = s_prev;
    }
    pairs.reverse();
    (pairs, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_cost(d: &[Vec<f64>], order: &[usize]) -> f64 {
        let mut prev = 0;
        let mut c = 0.0;
        for &v in order {
            c += d[prev][v];
            prev = v;
        }
        c + d[prev][0]
    }

    #[test]
    fn held_karp_small_asymmetric() {
        let d = vec![vec![0.0, 1.0, 9.0, 9.0], vec![9.0, 0.0, 1.0, 9.0], vec![9.0, 9.0, 0.0, 1.0], vec![1.0, 9.0, 9.0, 0.0]];
        let (order, c) = held_karp(&d);
        assert_eq!(order, vec![1, 2, 3]);
        assert_eq!(c, 4.0);
        assert_eq!(cycle_cost(&d, &order), c);
    }

    #[test]
    fn held_karp_trivial_sizes() {
        assert_eq!(held_karp(&[vec![0.0]]), (vec![], 0.0));
        assert_eq!(held_karp(&[vec![0.0, 2.0], vec![3.0, 0.0]]), (vec![1], 5.0));
    }

    #[test]
    fn popcount_ranks_are_dense() {
        let (rank, count) = popcount_ranks(4);
        assert_eq!(count, vec![1, 4, 6, 4, 1]);
        assert_eq!((rank[0b0011], rank[0b0101], rank[0b1100]), (0, 1, 5));
    }
}
