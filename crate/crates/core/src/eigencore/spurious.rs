use super::{tridiagonal_eigenvalues, Tridiagonal};

/// Relative size under which a Ritz value is treated as a zero eigenvalue.
pub const ZERO_REL: f64 = 1e-3;

/// Drops Ritz values that cannot be genuine eigenvalues of a sample covariance.
///
/// `current` holds the (descending) Ritz values at `iteration`, `previous` the
/// filtered estimates from the iteration before. Two rules apply:
///
/// * duplicates: values within `tol` of an already kept value collapse into it;
/// * rank: `R` has at most `min(K, N)` nonzero eigenvalues, so past that
///   iteration a surplus of nonzero values is cut back. Values are paired
///   one-to-one with `previous`, closest pairs first; a ghost copy loses to
///   the original it shadows and a value still migrating through the
///   spectrum finds no partner. Unpaired values only fill remaining slots,
///   most isolated first.
///
/// Values below `max(tol, ZERO_REL · max|x|)` count as zero and are kept.
pub fn filter_spurious(
    current: &[f64],
    previous: &[f64],
    iteration: usize,
    nodes: usize,
    samples: usize,
    tol: f64,
) -> Vec<f64> {
    let rank = nodes.min(samples);
    let mut kept: Vec<f64> = Vec::with_capacity(current.len());
    for &x in current {
        if kept.last().is_some_and(|last| (last - x).abs() <= tol) {
            continue;
        }
        kept.push(x);
    }
    if iteration <= rank {
        return kept;
    }
    let zero = tol.max(ZERO_REL * kept.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    let nonzero: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].abs() > zero).collect();
    if nonzero.len() <= rank {
        return kept;
    }
    let anchors: Vec<f64> = previous.iter().copied().filter(|p| p.abs() > zero).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(nonzero.len() * anchors.len());
    for &i in &nonzero {
        for (a, p) in anchors.iter().enumerate() {
            pairs.push(((kept[i] - p).abs(), i, a));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut chosen = vec![false; kept.len()];
    let mut used = vec![false; anchors.len()];
    let mut count = 0;
    for (_, i, a) in pairs {
        if count == rank {
            break;
        }
        if !chosen[i] && !used[a] {
            chosen[i] = true;
            used[a] = true;
            count += 1;
        }
    }
    while count < rank {
        let isolation = |i: usize| {
            (0..kept.len())
                .filter(|&c| chosen[c])
                .map(|c| (kept[c] - kept[i]).abs())
                .fold(f64::INFINITY, f64::min)
        };
        let best = nonzero
            .iter()
            .copied()
            .filter(|&i| !chosen[i])
            .max_by(|&a, &b| isolation(a).total_cmp(&isolation(b)))
            .expect("surplus leaves unpaired values");
        chosen[best] = true;
        count += 1;
    }
    kept.iter()
        .enumerate()
        .filter(|&(i, x)| chosen[i] || x.abs() <= zero)
        .map(|(_, &x)| x)
        .collect()
}

/// Runs [`filter_spurious`] along `raw`, where `raw[j-1]` are the Ritz values
/// of the leading `j×j` block; each step is compared with the filtered list
/// before it. The tolerance is `tol_rel` times the largest `|x|` of each list.
pub fn filter_ritz_sequence(raw: &[Vec<f64>], nodes: usize, samples: usize, tol_rel: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for (i, current) in raw.iter().enumerate() {
        let scale = current.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let previous: &[f64] = out.last().map_or(&[], Vec::as_slice);
        let next = filter_spurious(current, previous, i + 1, nodes, samples, tol_rel * scale);
        out.push(next);
    }
    out
}

/// Cullum–Willoughby test: a simple eigenvalue of `T` that is also an
/// eigenvalue of `T` with its first row and column deleted is spurious.
///
/// Returns the surviving eigenvalues of `t`, descending, with multiple copies
/// collapsed into one.
pub fn cullum_willoughby(t: &Tridiagonal, tol: f64) -> Vec<f64> {
    let full = tridiagonal_eigenvalues(t);
    let reduced = tridiagonal_eigenvalues(&t.without_first());
    let mut out: Vec<f64> = Vec::with_capacity(full.len());
    let mut i = 0;
    while i < full.len() {
        let mut j = i + 1;
        while j < full.len() && (full[i] - full[j]).abs() <= tol {
            j += 1;
        }
        let simple = j - i == 1;
        let ghost = reduced.iter().any(|r| (r - full[i]).abs() <= tol);
        if !(simple && ghost) {
            out.push(full[i]);
        }
        i = j;
    }
    out
}
