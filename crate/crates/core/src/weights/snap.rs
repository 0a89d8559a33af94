use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::rational::Q;

/// Snaps `mean ± stderr` to the nearest p/q with q ≤ `max_den` when that
/// candidate lies within 3σ and every other candidate is more than 6σ away.
pub fn snap_rational(mean: f64, stderr: f64, max_den: u64) -> Option<Q> {
    if !mean.is_finite() || !stderr.is_finite() || max_den == 0 {
        return None;
    }
    let sigma = stderr.max(1e-12);
    let mut cands: BTreeMap<Q, f64> = BTreeMap::new();
    for q in 1..=max_den {
        let centre = (mean * q as f64).round() as i64;
        for p in [centre - 1, centre, centre + 1] {
            let dist = (mean - p as f64 / q as f64).abs();
            cands.insert(Q::new(BigInt::from(p), BigInt::from(q)), dist);
        }
    }
    let mut ranked: Vec<(f64, Q)> = cands.into_iter().map(|(r, d)| (d, r)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (dist, best) = ranked.first()?.clone();
    if dist >= 3.0 * sigma || ranked.get(1).is_some_and(|c| c.0 <= 6.0 * sigma) {
        return None;
    }
    Some(best)
}
