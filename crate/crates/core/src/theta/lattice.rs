//! Enumeration of integer points inside a lattice ellipsoid.

use crate::linalg::RMatrix;

/// Relative widening of each coordinate interval so that points lying
/// exactly on the boundary are never lost to rounding.
const SLACK: f64 = 1e-12;

/// Calls `visit(m, ‖T(m + center)‖²)` for every `m ∈ ℤ^g` with
/// `‖T(m + center)‖ ≤ radius`, where `t` is lower triangular.
///
/// Points are visited in lexicographic order of `m`. Returns
/// `Err(count)` as soon as more than `cap` points have been seen.
pub fn for_each_point<F>(
    t: &RMatrix,
    center: &[f64],
    radius: f64,
    cap: usize,
    mut visit: F,
) -> Result<usize, usize>
where
    F: FnMut(&[i64], f64),
{
    let g = t.nrows();
    assert_eq!(center.len(), g);
    if g == 0 {
        visit(&[], 0.0);
        return Ok(1);
    }
    let r2 = radius * radius;
    let mut m = vec![0i64; g];
    // partial[i] = Σ_{j<i} T_ij (m_j + c_j); used[i] = Σ_{j<i} u_j²
    let mut partial = vec![0.0f64; g];
    let mut used = vec![0.0f64; g + 1];
    let mut upper = vec![0i64; g];
    let mut count = 0usize;

    let interval = |i: usize, partial: f64, used: f64| -> Option<(i64, i64)> {
        let rem = r2 - used;
        if rem < -SLACK * r2 {
            return None;
        }
        let half = rem.max(0.0).sqrt() / t[(i, i)];
        let mid = -partial / t[(i, i)] - center[i];
        let pad = SLACK * (1.0 + mid.abs() + half);
        let lo = (mid - half - pad).ceil();
        let hi = (mid + half + pad).floor();
        (lo <= hi).then(|| (lo as i64, hi as i64))
    };

    let mut level = 0usize;
    match interval(0, 0.0, 0.0) {
        Some((lo, hi)) => {
            m[0] = lo;
            upper[0] = hi;
        }
        None => return Ok(0),
    }
    loop {
        if m[level] > upper[level] {
            if level == 0 {
                return Ok(count);
            }
            level -= 1;
            m[level] += 1;
            continue;
        }
        let u = t[(level, level)] * (m[level] as f64 + center[level]) + partial[level];
        used[level + 1] = used[level] + u * u;
        if level + 1 == g {
            if used[g] <= r2 * (1.0 + 2.0 * SLACK) {
                count += 1;
                if count > cap {
                    return Err(count);
                }
                visit(&m, used[g]);
            }
            m[level] += 1;
            continue;
        }
        let next = level + 1;
        partial[next] = (0..next).map(|j| t[(next, j)] * (m[j] as f64 + center[j])).sum();
        match interval(next, partial[next], used[next]) {
            Some((lo, hi)) => {
                level = next;
                m[level] = lo;
                upper[level] = hi;
            }
            None => m[level] += 1,
        }
    }
}

/// Collects the points visited by [`for_each_point`].
pub fn lattice_points(t: &RMatrix, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let _ = for_each_point(t, center, radius, usize::MAX, |m, _| out.push(m.to_vec()));
    out
}
