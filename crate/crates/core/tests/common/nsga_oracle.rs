//! Brute-force references for dominance sorting, crowding and
//! two-dimensional hypervolume.

use tensor_evo::fitness::Fitness;

fn dominates(a: &Fitness, b: &Fitness) -> bool {
    let no_worse = a.cost <= b.cost && a.error <= b.error;
    let better = a.cost < b.cost || a.error < b.error;
    no_worse && better
}

/// Peel fronts by checking every remaining pair: O(n^3).
pub fn fronts(fits: &[Fitness]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..fits.len()).collect();
    let mut out = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&fits[j], &fits[i]))).collect();
        left.retain(|i| !front.contains(i));
        out.push(front);
    }
    out
}

/// Crowding recomputed from scratch: for each member and objective, find
/// its sorted neighbours by scanning the whole front.
pub fn crowding(fits: &[Fitness], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let get = |i: usize, k: usize| if k == 0 { fits[i].cost } else { fits[i].error };
    // position of each member when sorted by (value, index)
    let key = |i: usize, k: usize| (get(i, k), i);
    let lt = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut out = vec![0.0; n];
    for k in 0..2 {
        let lo = front.iter().map(|&i| get(i, k)).fold(f64::INFINITY, f64::min);
        let hi = front.iter().map(|&i| get(i, k)).fold(f64::NEG_INFINITY, f64::max);
        for (p, &i) in front.iter().enumerate() {
            let below = front.iter().filter(|&&j| lt(key(j, k), key(i, k))).max_by(|&&a, &&b| {
                if lt(key(a, k), key(b, k)) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater }
            });
            let above = front.iter().filter(|&&j| lt(key(i, k), key(j, k))).min_by(|&&a, &&b| {
                if lt(key(a, k), key(b, k)) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater }
            });
            match (below, above) {
                (Some(&b), Some(&a)) => {
                    if hi - lo > 0.0 {
                        out[p] += (get(a, k) - get(b, k)) / (hi - lo);
                    }
                }
                _ => out[p] = f64::INFINITY,
            }
        }
    }
    out
}

/// Union area of the boxes `[x, rx] x [y, ry]` by inclusion-exclusion.
pub fn hypervolume(points: &[(f64, f64)], r: (f64, f64)) -> f64 {
    let pts: Vec<_> = points.iter().filter(|p| p.0 < r.0 && p.1 < r.1).collect();
    let n = pts.len();
    assert!(n <= 16);
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let (mut x, mut y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (i, p) in pts.iter().enumerate() {
            if mask & (1 << i) != 0 {
                x = x.max(p.0);
                y = y.max(p.1);
            }
        }
        let area = (r.0 - x) * (r.1 - y);
        total += if mask.count_ones() % 2 == 1 { area } else { -area };
    }
    total
}
