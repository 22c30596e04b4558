//! Structure of the transportation polytope `Π(a, b)`: support graphs, cycles,
//! the signed cycle perturbation, decomposition into extreme points and
//! vertex enumeration over spanning trees of the complete bipartite graph.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{matrix_support, Coupling, Histogram, Permutation, DEFAULT_SUPPORT_TOL};

/// Hard cap on `n·m` for vertex enumeration.
pub const VERTEX_CAP: usize = 25;

/// Bipartite graph on rows `0..n` and columns `0..m` with one edge per entry
/// above the support threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGraph {
    pub n: usize,
    pub m: usize,
    /// `(i, j, P_ij)` in row-major order.
    pub edges: Vec<(usize, usize, f64)>,
}

impl SupportGraph {
    fn from_matrix(p: &DMatrix<f64>, tol: f64) -> Self {
        let edges = matrix_support(p, tol)
            .into_iter()
            .map(|(i, j)| (i, j, p[(i, j)]))
            .collect();
        SupportGraph {
            n: p.nrows(),
            m: p.ncols(),
            edges,
        }
    }

    /// Adjacency on nodes `0..n` (rows) and `n..n+m` (columns), ascending.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for &(i, j, _) in &self.edges {
            adj[i].push(self.n + j);
            adj[self.n + j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

pub fn support_graph(p: &Coupling, tol: f64) -> SupportGraph {
    SupportGraph::from_matrix(p.matrix(), tol)
}

/// An alternating cycle `i_1, j_1, i_2, j_2, …, i_N, j_N, i_1`.
///
/// Forward edges are `(i_k, j_k)`; backward edges are `(i_{k+1}, j_k)` with
/// `i_{N+1} = i_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    n: usize,
    m: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Cycle {
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Number of forward edges.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn forward_edges(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .copied()
            .zip(self.cols.iter().copied())
            .collect()
    }

    pub fn backward_edges(&self) -> Vec<(usize, usize)> {
        let k = self.rows.len();
        (0..k)
            .map(|t| (self.rows[(t + 1) % k], self.cols[t]))
            .collect()
    }
}

/// Depth-first cycle search from the lowest row node, visiting neighbours in
/// ascending order.
pub fn find_cycle(g: &SupportGraph) -> Option<Cycle> {
    let adj = g.adjacency();
    let total = g.n + g.m;
    let mut visited = vec![false; total];
    let mut stack_pos: Vec<Option<usize>> = vec![None; total];

    for root in 0..total {
        if visited[root] || adj[root].is_empty() {
            continue;
        }
        // (node, parent, next neighbour index)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        visited[root] = true;
        stack_pos[root] = Some(0);
        while let Some(top) = stack.last_mut() {
            let (v, parent, next) = *top;
            if next == adj[v].len() {
                stack_pos[v] = None;
                stack.pop();
                continue;
            }
            top.2 += 1;
            let w = adj[v][next];
            if Some(w) == parent {
                continue;
            }
            if let Some(pos) = stack_pos[w] {
                let path: Vec<usize> = stack[pos..].iter().map(|e| e.0).collect();
                return Some(cycle_from_path(g.n, g.m, &path));
            }
            if !visited[w] {
                visited[w] = true;
                stack_pos[w] = Some(stack.len());
                stack.push((w, Some(v), 0));
            }
        }
    }
    None
}

fn cycle_from_path(n: usize, m: usize, path: &[usize]) -> Cycle {
    let start = if path[0] < n { 0 } else { 1 };
    let len = path.len();
    let mut rows = Vec::with_capacity(len / 2);
    let mut cols = Vec::with_capacity(len / 2);
    for t in 0..len {
        let v = path[(start + t) % len];
        if t % 2 == 0 {
            rows.push(v);
        } else {
            cols.push(v - n);
        }
    }
    Cycle { n, m, rows, cols }
}

pub fn is_extreme(p: &Coupling) -> bool {
    is_extreme_with_tol(p, DEFAULT_SUPPORT_TOL)
}

pub fn is_extreme_with_tol(p: &Coupling, tol: f64) -> bool {
    find_cycle(&support_graph(p, tol)).is_none()
}

/// Integer matrix with `+1` on forward edges and `-1` on backward edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPerturbation {
    n: usize,
    m: usize,
    entries: Vec<i8>,
}

impl SignedPerturbation {
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.m + j]
    }

    pub fn row_sums(&self) -> Vec<i64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.get(i, j) as i64).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<i64> {
        (0..self.m)
            .map(|j| (0..self.n).map(|i| self.get(i, j) as i64).sum())
            .collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m, |i, j| self.get(i, j) as f64)
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.iter().filter(|e| **e != 0).count()
    }
}

pub fn cycle_perturbation(cycle: &Cycle) -> SignedPerturbation {
    let mut entries = vec![0i8; cycle.n * cycle.m];
    for (i, j) in cycle.forward_edges() {
        entries[i * cycle.m + j] += 1;
    }
    for (i, j) in cycle.backward_edges() {
        entries[i * cycle.m + j] -= 1;
    }
    SignedPerturbation {
        n: cycle.n,
        m: cycle.m,
        entries,
    }
}

/// `P = Σ λ_i P_i` with every `P_i` an extreme point.
#[derive(Debug, Clone)]
pub struct ConvexDecomposition {
    pub components: Vec<(f64, Coupling)>,
}

impl ConvexDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let (n, m) = self.components[0].1.matrix().shape();
        self.components
            .iter()
            .fold(DMatrix::zeros(n, m), |acc, (w, p)| acc + p.matrix() * *w)
    }
}

type Weighted = (f64, DMatrix<f64>);

/// Recursive cycle cancelling. With `ε⁻` the smallest backward mass and `ε⁺`
/// the smallest forward mass on a cycle, `P = λ(P + ε⁻E) + (1-λ)(P - ε⁺E)`
/// with `λ = ε⁺/(ε⁺+ε⁻)`; each child loses at least one support edge.
/// Identical intermediate plans and leaves with equal support are merged.
pub fn extreme_decomposition(p: &Coupling) -> ConvexDecomposition {
    let tol = DEFAULT_SUPPORT_TOL;
    let (a, b) = (p.row_marginal(), p.col_marginal());
    let mut pending: BTreeMap<Vec<i64>, Weighted> = BTreeMap::new();
    pending.insert(plan_key(p.matrix(), 1e12), (1.0, p.matrix().clone()));
    let mut leaves: BTreeMap<Vec<(usize, usize)>, Weighted> = BTreeMap::new();

    while let Some((_, (w, mat))) = pending.pop_last() {
        let g = SupportGraph::from_matrix(&mat, tol);
        let Some(cycle) = find_cycle(&g) else {
            let entry = leaves
                .entry(matrix_support(&mat, tol))
                .or_insert((0.0, mat));
            entry.0 += w;
            continue;
        };
        let eps_minus = cycle
            .backward_edges()
            .iter()
            .map(|&(i, j)| mat[(i, j)])
            .fold(f64::INFINITY, f64::min);
        let eps_plus = cycle
            .forward_edges()
            .iter()
            .map(|&(i, j)| mat[(i, j)])
            .fold(f64::INFINITY, f64::min);
        let e = cycle_perturbation(&cycle).to_matrix();
        let lambda = eps_plus / (eps_plus + eps_minus);
        let children = [
            (w * lambda, &mat + &e * eps_minus),
            (w * (1.0 - lambda), &mat - &e * eps_plus),
        ];
        for (cw, mut child) in children {
            child.apply(|v| {
                if *v <= tol {
                    *v = 0.0
                }
            });
            let entry = pending
                .entry(plan_key(&child, 1e12))
                .or_insert((0.0, child));
            entry.0 += cw;
        }
    }

    let support = matrix_support(p.matrix(), tol);
    let leaves = caratheodory(leaves.into_values().collect(), &support);
    let mut components: Vec<(f64, Coupling)> = leaves
        .into_iter()
        .map(|(w, m)| {
            let c = Coupling::new(m, a, b).expect("cycle moves preserve marginals");
            (w, c)
        })
        .collect();
    components.sort_by_key(|c| std::cmp::Reverse(plan_key(c.1.matrix(), 1e10)));
    ConvexDecomposition { components }
}

/// Drops components until at most `support.len()` remain. Any `s + 1` plans
/// supported on `s` cells with equal marginals are affinely dependent, so a
/// null vector `α` of `[entries; 1ᵀ]` lets the weights move along `-α` until
/// one of them hits zero.
fn caratheodory(mut comps: Vec<Weighted>, support: &[(usize, usize)]) -> Vec<Weighted> {
    let s = support.len();
    while comps.len() > s {
        let k = s + 1;
        let mut system = DMatrix::from_fn(k, k, |r, c| {
            if r < s {
                let (i, j) = support[r];
                comps[c].1[(i, j)]
            } else {
                1.0
            }
        });
        // Row-scale so the ones row and the entries weigh the same.
        for r in 0..s {
            let norm = system.row(r).amax();
            if norm > 0.0 {
                system.row_mut(r).scale_mut(1.0 / norm);
            }
        }
        let svd = system.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let idx = svd.singular_values.imin();
        let mut alpha: Vec<f64> = v_t.row(idx).iter().copied().collect();
        if alpha.iter().all(|x| *x <= 0.0) {
            alpha.iter_mut().for_each(|x| *x = -*x);
        }
        let (drop, t) = (0..k)
            .filter(|&c| alpha[c] > 0.0)
            .map(|c| (c, comps[c].0 / alpha[c]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("null vector has a positive entry");
        for (c, a) in alpha.iter().enumerate() {
            comps[c].0 = (comps[c].0 - t * a).max(0.0);
        }
        comps[drop].0 = 0.0;
        comps.retain(|(w, _)| *w > 0.0);
    }
    let total: f64 = comps.iter().map(|(w, _)| w).sum();
    for c in &mut comps {
        c.0 /= total;
    }
    comps
}

fn plan_key(m: &DMatrix<f64>, scale: f64) -> Vec<i64> {
    let mut key = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            key.push((m[(i, j)] * scale).round() as i64);
        }
    }
    key
}

/// `σ` when `P` is a scaled permutation matrix `P_{iσ(i)} = 1/n`.
pub fn as_permutation(p: &Coupling) -> Option<Permutation> {
    as_permutation_with_tol(p, DEFAULT_SUPPORT_TOL)
}

pub fn as_permutation_with_tol(p: &Coupling, tol: f64) -> Option<Permutation> {
    let m = p.matrix();
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let target = 1.0 / n as f64;
    let mut sigma = Vec::with_capacity(n);
    for i in 0..n {
        let hits: Vec<usize> = (0..n).filter(|&j| m[(i, j)] > tol).collect();
        if hits.len() != 1 || (m[(i, hits[0])] - target).abs() > 1e-9 {
            return None;
        }
        sigma.push(hits[0]);
    }
    for j in 0..n {
        if (0..n).filter(|&i| m[(i, j)] > tol).count() != 1 {
            return None;
        }
    }
    Permutation::new(sigma).ok()
}

/// Greedy top-left fill. Returns the plan and the `n + m - 1` basic cells of
/// the spanning tree it walked (zero-flow cells included on ties).
pub(crate) fn northwest_basis(a: &Histogram, b: &Histogram) -> (DMatrix<f64>, Vec<(usize, usize)>) {
    let (n, m) = (a.len(), b.len());
    let mut rows = a.weights().to_vec();
    let mut cols = b.weights().to_vec();
    let mut plan = DMatrix::zeros(n, m);
    let mut basis = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = rows[i].min(cols[j]);
        plan[(i, j)] = x;
        basis.push((i, j));
        rows[i] -= x;
        cols[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if j == m - 1 || (i < n - 1 && rows[i] <= cols[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    (plan, basis)
}

pub fn northwest_corner(a: &Histogram, b: &Histogram) -> Coupling {
    let (plan, _) = northwest_basis(a, b);
    Coupling::new(plan, a, b).expect("northwest corner is feasible")
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(k: usize) -> Self {
        Dsu {
            parent: (0..k).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Unique flow on a spanning tree, by peeling leaves.
fn tree_flow(n: usize, m: usize, a: &[f64], b: &[f64], tree: &[(usize, usize)]) -> Vec<f64> {
    let total = n + m;
    let mut rem: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (e, &(i, j)) in tree.iter().enumerate() {
        incident[i].push(e);
        incident[n + j].push(e);
    }
    let mut degree: Vec<usize> = incident.iter().map(|v| v.len()).collect();
    let mut done = vec![false; tree.len()];
    let mut flow = vec![0.0; tree.len()];
    let mut queue: Vec<usize> = (0..total).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = queue.pop() {
        if degree[v] != 1 {
            continue;
        }
        let Some(&e) = incident[v].iter().find(|&&e| !done[e]) else {
            continue;
        };
        let (i, j) = tree[e];
        let other = if v == i { n + j } else { i };
        flow[e] = rem[v];
        rem[v] = 0.0;
        rem[other] -= flow[e];
        done[e] = true;
        degree[v] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            queue.push(other);
        }
    }
    flow
}

/// All extreme points of `Π(a, b)`, for `n·m <= 25`.
///
/// Every vertex has forest support, which extends to a spanning tree of the
/// complete bipartite graph; the flow on each spanning tree is unique. Trees
/// with a nonnegative flow give the vertices, deduplicated at 1e-10 and
/// returned in descending row-major order.
pub fn enumerate_vertices(a: &Histogram, b: &Histogram) -> Result<Vec<Coupling>> {
    let (n, m) = (a.len(), b.len());
    if n * m > VERTEX_CAP {
        return Err(Error::TooLarge {
            what: "vertex enumeration n*m",
            size: n * m,
            cap: VERTEX_CAP,
        });
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let need = n + m - 1;
    let mut found: BTreeMap<Vec<i64>, DMatrix<f64>> = BTreeMap::new();
    let mut chosen = Vec::with_capacity(need);
    let mut visit = |tree: &[(usize, usize)]| {
        let flow = tree_flow(n, m, a.weights(), b.weights(), tree);
        if flow.iter().any(|&f| f < -1e-12) {
            return;
        }
        let mut plan = DMatrix::zeros(n, m);
        for (&(i, j), &f) in tree.iter().zip(&flow) {
            plan[(i, j)] = f.max(0.0);
        }
        found.entry(plan_key(&plan, 1e10)).or_insert(plan);
    };
    spanning_trees(
        &edges,
        need,
        0,
        &mut chosen,
        &mut Dsu::new(n + m),
        n,
        &mut visit,
    );

    found
        .into_iter()
        .rev()
        .map(|(_, plan)| Coupling::new(plan, a, b))
        .collect()
}

fn spanning_trees<F: FnMut(&[(usize, usize)])>(
    edges: &[(usize, usize)],
    need: usize,
    idx: usize,
    chosen: &mut Vec<(usize, usize)>,
    dsu: &mut Dsu,
    n: usize,
    visit: &mut F,
) {
    if chosen.len() == need {
        visit(chosen);
        return;
    }
    if chosen.len() + (edges.len() - idx) < need {
        return;
    }
    let (i, j) = edges[idx];
    let (ri, rj) = (dsu.find(i), dsu.find(n + j));
    if ri != rj {
        let saved = dsu.parent.clone();
        dsu.parent[ri] = rj;
        chosen.push((i, j));
        spanning_trees(edges, need, idx + 1, chosen, dsu, n, visit);
        chosen.pop();
        dsu.parent = saved;
    }
    spanning_trees(edges, need, idx + 1, chosen, dsu, n, visit);
}
