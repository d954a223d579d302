//! Aggregation-based tentative prolongators.

use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Piecewise-constant prolongator from an aggregate id per row.
pub fn tentative_from_aggregates(agg: &[usize], naggs: usize) -> CsrMatrix {
    let n = agg.len();
    CsrMatrix::new(n, naggs, (0..=n).collect(), agg.to_vec(), vec![1.0; n]).expect("one entry per row")
}

/// Strongly connected off-diagonal neighbours of row `i` with their `|a_ij|`.
fn strong_neighbors<'a>(a: &'a CsrMatrix, diag: &'a [f64], theta: f64, i: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
    let (cols, vals) = a.row(i);
    cols.iter().zip(vals).filter_map(move |(&j, &v)| {
        (j != i && v.abs() >= theta * (diag[i] * diag[j]).abs().sqrt() && v != 0.0).then_some((j, v.abs()))
    })
}

/// Aggregate id per row from greedy distance-one smoothed-aggregation.
///
/// Pass 1 visits rows in natural order; a row whose strong neighbours are
/// all unassigned becomes a root and takes them into a new aggregate. Rows
/// without strong neighbours become singletons. Pass 2 attaches every
/// remaining row to the aggregate of its strongest neighbour assigned in
/// pass 1 (ties to the lowest column).
pub fn sa_aggregates(a: &CsrMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag = a.diagonal();
    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let mut has_strong = false;
        let mut free = true;
        for (j, _) in strong_neighbors(a, &diag, theta, i) {
            has_strong = true;
            if agg[j] != NONE {
                free = false;
                break;
            }
        }
        if !has_strong {
            agg[i] = count;
            count += 1;
        } else if free {
            agg[i] = count;
            for (j, _) in strong_neighbors(a, &diag, theta, i) {
                agg[j] = count;
            }
            count += 1;
        }
    }
    let first = agg.clone();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for (j, w) in strong_neighbors(a, &diag, theta, i) {
            if first[j] != NONE && best.map_or(true, |(bw, _)| w > bw) {
                best = Some((w, first[j]));
            }
        }
        match best {
            Some((_, g)) => agg[i] = g,
            None => {
                agg[i] = count;
                count += 1;
            }
        }
    }
    (agg, count)
}

/// Tentative prolongator of [`sa_aggregates`].
pub fn sa_aggregate(a: &CsrMatrix, theta: f64) -> CsrMatrix {
    let (agg, count) = sa_aggregates(a, theta);
    tentative_from_aggregates(&agg, count)
}

/// One round of greedy maximum-weight pairing on
/// `w_ij = 1 - 2 a_ij / (a_ii + a_jj)` (edges with `w_ij <= 0` are ignored).
/// Edges are visited by decreasing weight, ties by lowest `(i, j)`. Returns
/// the pair id per vertex; ids follow the lowest member index.
pub fn pairwise_matching(a: &CsrMatrix) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag = a.diagonal();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j > i {
                let w = (1.0 - 2.0 * v / (diag[i] + diag[j])).max(0.0);
                if w > 0.0 {
                    edges.push((w, i, j));
                }
            }
        }
    }
    edges.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut mate = vec![usize::MAX; n];
    for &(_, i, j) in &edges {
        if mate[i] == usize::MAX && mate[j] == usize::MAX {
            mate[i] = j;
            mate[j] = i;
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut count = 0;
    for i in 0..n {
        if id[i] != usize::MAX {
            continue;
        }
        id[i] = count;
        if mate[i] != usize::MAX {
            id[mate[i]] = count;
        }
        count += 1;
    }
    (id, count)
}

/// `sweeps` rounds of pairwise matching, each on the Galerkin operator of
/// the previous round. Aggregates have at most `2^sweeps` rows.
pub fn matching_aggregate(a: &CsrMatrix, sweeps: usize) -> Result<CsrMatrix> {
    let n = a.nrows();
    let mut agg: Vec<usize> = (0..n).collect();
    let mut count = n;
    let mut current = a.clone();
    for _ in 0..sweeps {
        let (pair, nc) = pairwise_matching(&current);
        if nc == count {
            break;
        }
        for g in agg.iter_mut() {
            *g = pair[*g];
        }
        count = nc;
        let p = tentative_from_aggregates(&pair, nc);
        current = super::galerkin_rap(&current, &p)?;
    }
    Ok(tentative_from_aggregates(&agg, count))
}
