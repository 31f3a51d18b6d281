//! Permutation searches: the row permutation that puts the largest
//! magnitudes of `W` on its diagonal, and the simultaneous row/column
//! permutation that makes `B` as close as possible to strictly lower
//! triangular.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LingamError, Result};
use crate::ica::UnmixingMatrix;
use crate::lingam::ConnectionMatrix;

/// Largest `n` for which brute-force enumeration is used by default.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Hard cap for the exact subset search (memory grows as `2^n`).
pub const EXACT_ORDER_MAX: usize = 20;

/// Row permutation of `W`: row `i` of the permuted matrix is row
/// `mapping[i]` of the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPermutation {
    pub mapping: Vec<usize>,
    pub objective_value: f64,
}

/// A causal order: `order[p]` is the variable at causal position `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalOrder {
    pub order: Vec<usize>,
    /// `sum_{p <= q} B[order[p]][order[q]]^2`.
    pub residual: f64,
    /// Set when produced by the greedy search.
    #[serde(default)]
    pub approximate: bool,
}

impl CausalOrder {
    /// Builds an order and computes its residual against `b`.
    pub fn from_order(order: Vec<usize>, b: &DMatrix<f64>) -> Result<Self> {
        check_bijection(&order, b.nrows())?;
        let residual = upper_mass(b, &order);
        Ok(Self {
            order,
            residual,
            approximate: false,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Causal position of each variable.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }
}

pub(crate) fn check_bijection(mapping: &[usize], n: usize) -> Result<()> {
    if mapping.len() != n {
        return Err(LingamError::DimensionMismatch(format!(
            "permutation has length {}, expected {n}",
            mapping.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in mapping {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(LingamError::DimensionMismatch(format!(
                "{mapping:?} is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

/// Rearranges `v` into the next lexicographic permutation; returns `false`
/// (leaving `v` sorted ascending) after the last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `sum_i 1/|W[mapping[i]][i]|`, with exact zeros costing `+inf`.
pub fn diagonal_objective(w: &DMatrix<f64>, mapping: &[usize]) -> f64 {
    mapping.iter().enumerate().map(|(i, &r)| 1.0 / w[(r, i)].abs()).sum()
}

/// Global minimizer of the diagonal objective by enumerating all `n!` row
/// permutations in lexicographic order; ties keep the first one found.
pub fn diag_permutation_exhaustive(w: &UnmixingMatrix) -> Result<RowPermutation> {
    diag_permutation_exhaustive_with_limit(w, EXHAUSTIVE_LIMIT)
}

pub fn diag_permutation_exhaustive_with_limit(w: &UnmixingMatrix, limit: usize) -> Result<RowPermutation> {
    let n = w.n();
    if n > limit {
        return Err(LingamError::TooLarge { n, limit });
    }
    let w = w.matrix();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<RowPermutation> = None;
    loop {
        let cost = diagonal_objective(w, &perm);
        if cost.is_finite() && best.as_ref().is_none_or(|b| cost < b.objective_value) {
            best = Some(RowPermutation {
                mapping: perm.clone(),
                objective_value: cost,
            });
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.ok_or_else(|| LingamError::SingularStructure("every row permutation leaves a zero on the diagonal".into()))
}

/// The same minimizer as [`diag_permutation_exhaustive`], found as a linear
/// assignment problem with cost `C[i][r] = 1/|W[r][i]|`. Exact for any `n`.
pub fn diag_permutation_assignment(w: &UnmixingMatrix) -> Result<RowPermutation> {
    let m = w.matrix();
    let n = w.n();
    let cost = DMatrix::from_fn(n, n, |i, r| 1.0 / m[(r, i)].abs());
    let mapping = hungarian_solve(&cost).map_err(|e| match e {
        LingamError::Infeasible => {
            LingamError::SingularStructure("every row permutation leaves a zero on the diagonal".into())
        }
        other => other,
    })?;
    let objective_value = diagonal_objective(m, &mapping);
    Ok(RowPermutation {
        mapping,
        objective_value,
    })
}

/// Minimum-cost perfect assignment (rows to columns) with the shortest
/// augmenting path Hungarian method, `O(n^3)`. `+inf` entries are
/// forbidden. Among optimal assignments the lexicographically smallest
/// row-to-column mapping is returned.
pub fn hungarian_solve(cost: &DMatrix<f64>) -> Result<Vec<usize>> {
    let n = cost.nrows();
    if cost.ncols() != n {
        return Err(LingamError::DimensionMismatch(format!(
            "cost matrix must be square, got {}x{}",
            n,
            cost.ncols()
        )));
    }
    if cost.iter().any(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
        return Err(LingamError::InvalidData("cost matrix contains NaN or -inf".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    // 1-based potentials; column 0 is a virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(r0 - 1, j - 1)] - u[r0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            if !delta.is_finite() {
                return Err(LingamError::Infeasible);
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    let scale = cost
        .iter()
        .filter(|c| c.is_finite())
        .fold(1.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * scale * n as f64;
    let tight = |r: usize, c: usize| {
        let x = cost[(r, c)];
        x.is_finite() && x - u[r + 1] - v[c + 1] <= tol
    };
    lexicographic_refine(&mut assign, cost, tight);
    Ok(assign)
}

/// Rewrites an optimal assignment into the lexicographically smallest one
/// that uses only tight (zero reduced cost) edges.
fn lexicographic_refine(assign: &mut [usize], cost: &DMatrix<f64>, tight: impl Fn(usize, usize) -> bool) {
    let n = assign.len();
    let total = |a: &[usize]| a.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum::<f64>();
    let mut owner = vec![0usize; n];
    for (r, &c) in assign.iter().enumerate() {
        owner[c] = r;
    }
    for r in 0..n {
        for c in 0..assign[r] {
            if owner[c] < r || !tight(r, c) {
                continue;
            }
            // Alternating path from the current owner of `c` back to the
            // column that `r` gives up, through rows after `r`.
            let target = assign[r];
            let mut visited = vec![false; n];
            let mut path = Vec::new();
            if augment(owner[c], c, target, r, assign, &owner, &tight, &mut visited, &mut path) {
                let mut candidate = assign.to_vec();
                candidate[r] = c;
                for &(row, col) in &path {
                    candidate[row] = col;
                }
                if total(&candidate) <= total(assign) {
                    assign.copy_from_slice(&candidate);
                    for (row, &col) in assign.iter().enumerate() {
                        owner[col] = row;
                    }
                    break;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn augment(
    row: usize,
    banned: usize,
    target: usize,
    locked_upto: usize,
    assign: &[usize],
    owner: &[usize],
    tight: &impl Fn(usize, usize) -> bool,
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for col in 0..assign.len() {
        if col == banned || visited[col] || !tight(row, col) {
            continue;
        }
        if col == target {
            path.push((row, col));
            return true;
        }
        let next = owner[col];
        if next <= locked_upto {
            continue;
        }
        visited[col] = true;
        if augment(next, banned, target, locked_upto, assign, owner, tight, visited, path) {
            path.push((row, col));
            return true;
        }
    }
    false
}

/// `sum_{p <= q} B[order[p]][order[q]]^2`: squared mass on and above the
/// diagonal of `P B P^T`.
pub fn upper_mass(b: &DMatrix<f64>, order: &[usize]) -> f64 {
    let mut total = 0.0;
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p..] {
            total += b[(i, j)] * b[(i, j)];
        }
    }
    total
}

/// Exact causal order search with the default size limit.
pub fn causal_order_search(b_hat: &ConnectionMatrix) -> Result<CausalOrder> {
    causal_order_search_with_limit(b_hat, EXHAUSTIVE_LIMIT)
}

/// Exact minimizer of the upper-triangular mass over all `n!` simultaneous
/// row/column permutations.
///
/// The mass splits into a cost per ordered pair (`B[u][v]^2` whenever `u`
/// precedes `v`), so the optimum is found by dynamic programming over the
/// set of already placed variables in `O(2^n n^2)`. Ties resolve to the
/// lexicographically smallest order. `limit` may be raised up to
/// [`EXACT_ORDER_MAX`].
pub fn causal_order_search_with_limit(b_hat: &ConnectionMatrix, limit: usize) -> Result<CausalOrder> {
    let b = b_hat.matrix();
    let n = b.nrows();
    let limit = limit.min(EXACT_ORDER_MAX);
    if n > limit {
        return Err(LingamError::TooLarge { n, limit });
    }
    let sq = b.map(|x| x * x);
    let full = (1usize << n) - 1;
    // best[s]: minimal cost of ordering the variables outside `s`, given
    // that the variables in `s` are already placed first.
    let mut best = vec![0.0f64; 1 << n];
    for s in (0..full).rev() {
        let mut m = f64::INFINITY;
        for v in (0..n).filter(|v| s >> v & 1 == 0) {
            let c = step_cost(&sq, s, v) + best[s | 1 << v];
            if c < m {
                m = c;
            }
        }
        best[s] = m;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = 0usize;
    while s != full {
        let v = (0..n)
            .filter(|v| s >> v & 1 == 0)
            .find(|&v| step_cost(&sq, s, v) + best[s | 1 << v] == best[s])
            .expect("minimum is attained");
        order.push(v);
        s |= 1 << v;
    }
    CausalOrder::from_order(order, b)
}

/// Cost of placing `v` right after the set `placed`: its diagonal plus the
/// entries from `v` to every variable that will come after it.
fn step_cost(sq: &DMatrix<f64>, placed: usize, v: usize) -> f64 {
    let n = sq.nrows();
    (0..n).filter(|&j| placed >> j & 1 == 0).map(|j| sq[(v, j)]).sum()
}

/// Greedy causal order for large `n`: repeatedly place the variable whose
/// squared coefficients on all unplaced variables sum smallest. The result
/// is marked approximate.
pub fn greedy_causal_order(b_hat: &ConnectionMatrix) -> Result<CausalOrder> {
    let b = b_hat.matrix();
    let n = b.nrows();
    let sq = b.map(|x| x * x);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (k, _) = remaining
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, remaining.iter().map(|&j| sq[(v, j)]).sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, (k, c)| if c < acc.1 { (k, c) } else { acc });
        order.push(remaining.remove(k));
    }
    let mut result = CausalOrder::from_order(order, b)?;
    result.approximate = true;
    Ok(result)
}

/// Share of the squared mass of `B` lying on or above the diagonal under
/// the given order, in `[0, 1]`; `0` means strictly lower triangular.
pub fn triangularity_score(b: &ConnectionMatrix, order: &CausalOrder) -> Result<f64> {
    let m = b.matrix();
    check_bijection(&order.order, m.nrows())?;
    let total = m.norm_squared();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok((upper_mass(m, &order.order) / total).clamp(0.0, 1.0))
}
