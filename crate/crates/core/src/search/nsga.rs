use std::cmp::Ordering;

use crate::fitness::Fitness;

/// Partition `fits` into non-dominated fronts, best first. Indices within
/// a front are ascending.
pub fn nondominated_sort(fits: &[Fitness]) -> Vec<Vec<usize>> {
    let n = fits.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if fits[i].dominates(&fits[j]) {
                dominates[i].push(j);
                dominated_by[j] += 1;
            } else if fits[j].dominates(&fits[i]) {
                dominates[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

fn objectives(f: &Fitness) -> [f64; 2] {
    [f.cost, f.error]
}

/// Crowding distance of each member of `front` (aligned with `front`).
/// Extremes of each objective get infinity; an objective with zero or
/// non-finite range adds nothing to interior members.
pub fn crowding_distance(fits: &[Fitness], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for k in 0..2 {
        let value = |pos: usize| objectives(&fits[front[pos]])[k];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(front[a].cmp(&front[b])));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = value(order[n - 1]) - value(order[0]);
        if !(range.is_finite() && range > 0.0) {
            continue;
        }
        for w in 1..n - 1 {
            dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / range;
        }
    }
    dist
}

/// Front index and crowding distance of one individual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rank {
    pub front: usize,
    pub crowding: f64,
}

pub fn rank_all(fits: &[Fitness]) -> Vec<Rank> {
    let mut out = vec![Rank { front: 0, crowding: 0.0 }; fits.len()];
    for (k, front) in nondominated_sort(fits).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(fits, front)) {
            out[i] = Rank { front: k, crowding: d };
        }
    }
    out
}

/// Crowded comparison: lower front first, then larger crowding distance,
/// then lower index.
pub fn crowded_cmp(ranks: &[Rank], a: usize, b: usize) -> Ordering {
    ranks[a]
        .front
        .cmp(&ranks[b].front)
        .then(ranks[b].crowding.total_cmp(&ranks[a].crowding))
        .then(a.cmp(&b))
}

/// Indices sorted best first by crowded comparison.
pub fn crowded_order(ranks: &[Rank]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ranks.len()).collect();
    idx.sort_by(|&a, &b| crowded_cmp(ranks, a, b));
    idx
}
