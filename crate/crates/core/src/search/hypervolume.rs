/// Area dominated by `points` (cost, error) and bounded by `reference`,
/// both objectives minimized. Points not strictly better than the
/// reference on both objectives contribute nothing.
pub fn hypervolume(points: &[(f64, f64)], reference: (f64, f64)) -> f64 {
    let mut pts: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(x, y)| x < reference.0 && y < reference.1).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_y = reference.1;
    for (i, &(x, y)) in pts.iter().enumerate() {
        if y < best_y {
            best_y = y;
        }
        let next_x = pts.get(i + 1).map_or(reference.0, |p| p.0);
        area += (next_x - x) * (reference.1 - best_y);
    }
    area
}
