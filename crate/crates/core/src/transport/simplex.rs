//! Primal network simplex for the transportation problem
//!
//!   min Σ c_ij π_ij   s.t.  Σ_j π_ij = a_i,  Σ_i π_ij = b_j,  π ≥ 0,
//!
//! on the complete bipartite graph, started from an artificial root. The
//! spanning tree is kept strongly feasible by the usual leaving-arc rule,
//! which prevents cycling on degenerate pivots. Entering arcs are chosen by
//! block search, so costs are evaluated lazily and never stored.

use crate::error::{Error, Result};

/// A cost matrix that can be evaluated entry by entry.
pub trait CostMatrix: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn cost(&self, i: usize, j: usize) -> f64;
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCost {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseCost {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn<F: Fn(usize, usize) -> f64>(rows: usize, cols: usize, f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl CostMatrix for DenseCost {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// c((i_1..i_n), (j_1..j_n)) = Σ_k base(i_k, j_k) on a product grid whose
/// flat index has the first factor most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct SumCost {
    base: DenseCost,
    factors: usize,
    size: usize,
    /// Row offsets into `base` of each factor coordinate, `factors` per index.
    row_off: Vec<u32>,
    col: Vec<u32>,
}

impl SumCost {
    pub fn new(base: DenseCost, factors: usize) -> Result<Self> {
        if base.rows != base.cols {
            return Err(Error::InvalidCost("factor cost must be square".into()));
        }
        let size = base
            .rows
            .checked_pow(factors as u32)
            .ok_or_else(|| Error::Size("product grid overflows".into()))?;
        let g = base.rows;
        if size > u32::MAX as usize / g.max(1) {
            return Err(Error::Size("product grid too large".into()));
        }
        let mut row_off = Vec::with_capacity(size * factors);
        let mut col = Vec::with_capacity(size * factors);
        for k in 0..size {
            let mut r = k;
            for _ in 0..factors {
                row_off.push(((r % g) * g) as u32);
                col.push((r % g) as u32);
                r /= g;
            }
        }
        Ok(Self { base, factors, size, row_off, col })
    }
}

impl CostMatrix for SumCost {
    fn rows(&self) -> usize {
        self.size
    }
    fn cols(&self) -> usize {
        self.size
    }
    fn cost(&self, i: usize, j: usize) -> f64 {
        let f = self.factors;
        let rows = &self.row_off[i * f..i * f + f];
        let cols = &self.col[j * f..j * f + f];
        rows.iter().zip(cols).map(|(&r, &c)| self.base.data[(r + c) as usize]).sum()
    }
}

/// Optimal flows on the arcs of the final tree, as (row, col, mass).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub flows: Vec<(usize, usize, f64)>,
    pub value: f64,
    pub pivots: usize,
}

const UP: i8 = 1;
const DOWN: i8 = -1;

struct Tree<'c, C: CostMatrix + ?Sized> {
    cost: &'c C,
    m: usize,
    n: usize,
    parent: Vec<usize>,
    /// Arc joining a node to its parent: a real arc i*n + j, or
    /// `real_arcs + u` for the artificial arc of node u.
    pred: Vec<usize>,
    dir: Vec<i8>,
    flow: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    pi: Vec<f64>,
}

impl<'c, C: CostMatrix + ?Sized> Tree<'c, C> {
    fn arc_cost(&self, arc: usize) -> f64 {
        self.cost.cost(arc / self.n, arc % self.n)
    }

    fn reduced(&self, arc: usize) -> f64 {
        let (i, j) = (arc / self.n, arc % self.n);
        self.cost.cost(i, j) + self.pi[i] - self.pi[self.m + j]
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn remove_child(&mut self, p: usize, c: usize) {
        let list = &mut self.children[p];
        if let Some(k) = list.iter().position(|&x| x == c) {
            list.swap_remove(k);
        }
    }

    fn pivot(&mut self, in_arc: usize) {
        let first = in_arc / self.n;
        let second = self.m + in_arc % self.n;
        let join = self.join(first, second);

        let mut delta = f64::INFINITY;
        let mut u_out = usize::MAX;
        let mut side = 0;
        let mut u = first;
        while u != join {
            if self.dir[u] == UP {
                let d = self.flow[u].max(0.0);
                if d < delta {
                    delta = d;
                    u_out = u;
                    side = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.dir[u] == DOWN {
                let d = self.flow[u].max(0.0);
                if d <= delta {
                    delta = d;
                    u_out = u;
                    side = 2;
                }
            }
            u = self.parent[u];
        }
        debug_assert!(side != 0, "cycle without a blocking arc");

        if delta > 0.0 {
            let mut u = first;
            while u != join {
                self.flow[u] -= f64::from(self.dir[u]) * delta;
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                self.flow[u] += f64::from(self.dir[u]) * delta;
                u = self.parent[u];
            }
        }

        let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };

        // detach the subtree of u_out and re-root it at u_in
        let mut path = vec![u_in];
        let mut u = u_in;
        while u != u_out {
            u = self.parent[u];
            path.push(u);
        }
        let old_parent = self.parent[u_out];
        self.remove_child(old_parent, u_out);
        let saved: Vec<(usize, i8, f64)> = path.iter().map(|&p| (self.pred[p], self.dir[p], self.flow[p])).collect();
        for t in (1..path.len()).rev() {
            let (arc, d, f) = saved[t - 1];
            let (child, par) = (path[t], path[t - 1]);
            self.remove_child(child, par);
            self.children[par].push(child);
            self.parent[child] = par;
            self.pred[child] = arc;
            self.dir[child] = -d;
            self.flow[child] = f;
        }
        self.parent[u_in] = v_in;
        self.pred[u_in] = in_arc;
        self.dir[u_in] = if u_in == first { UP } else { DOWN };
        self.flow[u_in] = delta;
        self.children[v_in].push(u_in);

        let c = self.cost.cost(first, second - self.m);
        let sigma = if u_in == first {
            self.pi[second] - c - self.pi[first]
        } else {
            c + self.pi[first] - self.pi[second]
        };
        let base_depth = self.depth[v_in] + 1;
        let mut stack = vec![(u_in, base_depth)];
        while let Some((u, d)) = stack.pop() {
            self.depth[u] = d;
            self.pi[u] += sigma;
            for &c in &self.children[u] {
                stack.push((c, d + 1));
            }
        }
    }
}

/// Solves the transportation problem exactly. `supply` and `demand` must be
/// non-negative with equal totals (to 1e−9 relative).
pub fn solve<C: CostMatrix + ?Sized>(supply: &[f64], demand: &[f64], cost: &C) -> Result<Solution> {
    let (m, n) = (supply.len(), demand.len());
    if cost.rows() != m || cost.cols() != n {
        return Err(Error::DimensionMismatch { expected: m * n, got: cost.rows() * cost.cols() });
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidMeasure("empty support".into()));
    }
    if supply.iter().chain(demand).any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidMeasure("masses must be finite and non-negative".into()));
    }
    let ts: f64 = supply.iter().sum();
    let td: f64 = demand.iter().sum();
    if (ts - td).abs() > 1e-9 * ts.max(td) {
        return Err(Error::InvalidMeasure(format!("supply {ts} and demand {td} differ")));
    }
    let real_arcs = m * n;
    let mut max_cost: f64 = 0.0;
    for i in 0..m {
        for j in 0..n {
            let c = cost.cost(i, j);
            if !c.is_finite() {
                return Err(Error::InvalidCost(format!("cost ({i}, {j}) is {c}")));
            }
            max_cost = max_cost.max(c.abs());
        }
    }
    let nodes = m + n;
    let root = nodes;
    let art_cost = (max_cost + 1.0) * nodes as f64;
    let mut t = Tree {
        cost,
        m,
        n,
        parent: vec![root; nodes + 1],
        pred: (0..=nodes).map(|u| real_arcs + u).collect(),
        dir: vec![UP; nodes + 1],
        flow: vec![0.0; nodes + 1],
        depth: vec![1; nodes + 1],
        children: vec![Vec::new(); nodes + 1],
        pi: vec![0.0; nodes + 1],
    };
    t.depth[root] = 0;
    t.children[root] = (0..nodes).collect();
    for u in 0..nodes {
        let s = if u < m { supply[u] } else { -demand[u - m] };
        if s >= 0.0 {
            t.dir[u] = UP;
            t.flow[u] = s;
            t.pi[u] = 0.0;
        } else {
            t.dir[u] = DOWN;
            t.flow[u] = -s;
            t.pi[u] = art_cost;
        }
    }

    let eps = 64.0 * f64::EPSILON * art_cost;
    let block = ((real_arcs as f64).sqrt().ceil() as usize).max(10).min(real_arcs);
    let mut next = 0;
    let mut pivots = 0usize;
    let max_pivots = 50 * real_arcs + 10_000;
    loop {
        let mut best = -eps;
        let mut in_arc = usize::MAX;
        let mut scanned = 0;
        let mut e = next;
        let mut count = 0;
        while scanned < real_arcs {
            let c = t.reduced(e);
            if c < best {
                best = c;
                in_arc = e;
            }
            scanned += 1;
            count += 1;
            e += 1;
            if e == real_arcs {
                e = 0;
            }
            if count == block {
                if in_arc != usize::MAX {
                    break;
                }
                count = 0;
            }
        }
        if in_arc == usize::MAX {
            break;
        }
        next = e;
        t.pivot(in_arc);
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::numeric(format!("network simplex exceeded {max_pivots} pivots")));
        }
    }

    let scale = ts.max(td).max(1e-300);
    let mut flows = Vec::new();
    let mut value = 0.0;
    for u in 0..nodes {
        let arc = t.pred[u];
        if arc < real_arcs {
            let f = t.flow[u];
            if f > 0.0 {
                let (i, j) = (arc / n, arc % n);
                flows.push((i, j, f));
                value += f * t.arc_cost(arc);
            }
        } else if t.flow[u] > 1e-9 * scale {
            return Err(Error::numeric(format!(
                "artificial arc of node {u} still carries {} at optimum",
                t.flow[u]
            )));
        }
    }
    flows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(Solution { flows, value, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_unit_move() {
        let c = DenseCost::from_fn(1, 2, |_, j| j as f64);
        let s = solve(&[1.0], &[0.5, 0.5], &c).unwrap();
        assert!((s.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_is_free() {
        let pts = [0.0f64, 0.3, 1.1, 2.0, 4.5];
        let w = [0.1, 0.2, 0.3, 0.25, 0.15];
        let c = DenseCost::from_fn(5, 5, |i, j| (pts[i] - pts[j]).abs());
        let s = solve(&w, &w, &c).unwrap();
        assert!(s.value.abs() < 1e-15);
        for &(i, j, f) in &s.flows {
            assert_eq!(i, j, "off-diagonal flow {f}");
        }
    }

    #[test]
    fn sum_cost_indexing() {
        let base = DenseCost::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs());
        let s = SumCost::new(base, 2).unwrap();
        // (2,0) -> (0,1): |2-0| + |0-1|
        assert_eq!(s.cost(2 * 3, 1), 3.0);
        assert_eq!(s.rows(), 9);
    }

    #[test]
    fn rejects_unbalanced() {
        let c = DenseCost::from_fn(2, 2, |_, _| 1.0);
        assert!(solve(&[0.5, 0.5], &[0.5, 0.6], &c).is_err());
    }
}
