//! Maximum-weight assignment of rows to distinct columns.

/// Assigns every row to a distinct column maximizing the total weight.
///
/// `weights[r][c] = None` forbids the pair. Returns `None` when no complete
/// assignment exists.
pub(crate) fn max_weight_assignment(weights: &[Vec<Option<i64>>]) -> Option<i64> {
    let rows = weights.len();
    if rows == 0 {
        return Some(0);
    }
    let cols = weights[0].len();
    if cols < rows {
        return None;
    }
    let max_abs = weights
        .iter()
        .flatten()
        .flatten()
        .fold(0i64, |m, w| m.max(w.abs()));
    // forbidden pairs cost more than any feasible assignment can save
    let forbidden = (max_abs + 1) * (rows as i64 + 1) * 2;
    let cost = |r: usize, c: usize| weights[r][c].map_or(forbidden, |w| -w);

    // shortest augmenting path form, 1-based with a virtual column 0
    let mut u = vec![0i64; rows + 1];
    let mut v = vec![0i64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for r in 1..=rows {
        owner[0] = r;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0i64;
    for j in 1..=cols {
        if owner[j] != 0 {
            total += weights[owner[j] - 1][j - 1]?;
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(weights: &[Vec<Option<i64>>], row: usize, used: &mut Vec<bool>) -> Option<i64> {
        if row == weights.len() {
            return Some(0);
        }
        let mut best = None;
        for c in 0..used.len() {
            if used[c] {
                continue;
            }
            if let Some(w) = weights[row][c] {
                used[c] = true;
                if let Some(rest) = brute(weights, row + 1, used) {
                    best = best.max(Some(w + rest));
                }
                used[c] = false;
            }
        }
        best
    }

    #[test]
    fn small_cases() {
        assert_eq!(max_weight_assignment(&[]), Some(0));
        let w = vec![vec![Some(3), Some(1)], vec![Some(3), Some(2)]];
        assert_eq!(max_weight_assignment(&w), Some(5));
        let w = vec![vec![Some(1), None], vec![Some(5), None]];
        assert_eq!(max_weight_assignment(&w), None);
        let w = vec![vec![Some(1)], vec![Some(1)]];
        assert_eq!(max_weight_assignment(&w), None);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(
            rows in 1usize..5,
            extra in 0usize..3,
            seed in proptest::collection::vec(proptest::option::weighted(0.8, -20i64..50), 40),
        ) {
            let cols = rows + extra;
            let w: Vec<Vec<Option<i64>>> =
                (0..rows).map(|r| (0..cols).map(|c| seed[r * cols + c]).collect()).collect();
            let expected = brute(&w, 0, &mut vec![false; cols]);
            prop_assert_eq!(max_weight_assignment(&w), expected);
        }
    }
}
