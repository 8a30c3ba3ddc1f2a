//! Vietoris–Rips complexes: neighbour graphs, strong collapses and clique
//! counts.

use serde::{Deserialize, Serialize};

use super::bitset::Bits;
use super::EstimatorError;
use crate::grid::dist2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipsOptions {
    /// Strong-collapse the flag complex before counting. Collapses preserve
    /// the homotopy type, so χ is unchanged.
    pub reduce: bool,
    /// Count only simplices of dimension `≤ d` (the `d`-skeleton). Only
    /// allowed without reduction.
    pub max_dim: Option<usize>,
    pub clique_budget: u64,
    /// Scales with more raw edges than this are not evaluated.
    pub max_edges: usize,
    /// Apex candidates tried per edge, nearest to the edge midpoint first.
    pub edge_candidates: usize,
    pub max_passes: usize,
}

impl Default for RipsOptions {
    fn default() -> Self {
        Self {
            reduce: true,
            max_dim: None,
            clique_budget: 50_000_000,
            max_edges: 300_000,
            edge_candidates: 8,
            max_passes: 4,
        }
    }
}

impl RipsOptions {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.reduce && self.max_dim.is_some() {
            return Err(EstimatorError::InvalidOption(
                "skeleton truncation changes χ of a collapsed complex; disable reduction to use max_dim".into(),
            ));
        }
        Ok(())
    }
}

/// Counts for one scale. `counts` describe the evaluated complex, which is
/// the collapsed one when reduction is on; `raw_*` describe the full graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexStats {
    pub scale: f64,
    pub counts: Vec<u64>,
    pub chi: i64,
    pub raw_vertices: usize,
    pub raw_edges: usize,
    pub components: usize,
    /// Evaluation succeeded within budgets.
    pub valid: bool,
    /// The raw graph is complete, so the complex is a simplex.
    pub saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ComplexStats {
    pub fn alternating_sum(counts: &[u64]) -> i64 {
        counts
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Whether this scale can take part in a plateau.
    pub fn usable(&self) -> bool {
        self.valid && !self.saturated
    }
}

/// All pairs within `r_max`, sorted by length.
#[derive(Debug, Clone)]
pub(crate) struct PairList {
    pub n: usize,
    /// `(squared length, i, j)` with `i < j`.
    pub pairs: Vec<(f64, u32, u32)>,
}

impl PairList {
    pub fn new(coords: &[f64], dim: usize, r_max: f64) -> Self {
        let n = if dim == 0 { 0 } else { coords.len() / dim };
        let r2 = r_max * r_max;
        let mut pairs = Vec::new();
        for i in 0..n {
            let p = &coords[i * dim..(i + 1) * dim];
            for j in i + 1..n {
                let d2 = dist2(p, &coords[j * dim..(j + 1) * dim]);
                if d2 <= r2 {
                    pairs.push((d2, i as u32, j as u32));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        Self { n, pairs }
    }

    pub fn prefix_len(&self, r: f64) -> usize {
        let r2 = r * r;
        self.pairs.partition_point(|p| p.0 <= r2)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<u32>,
    pub components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
            self.components -= 1;
        }
    }
}

struct Graph {
    adj: Vec<Bits>,
    alive: Bits,
}

impl Graph {
    fn from_pairs(n: usize, pairs: &[(f64, u32, u32)]) -> Self {
        let mut adj = vec![Bits::new(n); n];
        for &(_, i, j) in pairs {
            adj[i as usize].set(j as usize);
            adj[j as usize].set(i as usize);
        }
        let mut alive = Bits::new(n);
        (0..n).for_each(|i| alive.set(i));
        Self { adj, alive }
    }

    fn remove_vertex(&mut self, v: usize) {
        let nbrs: Vec<usize> = self.adj[v].iter().collect();
        for w in nbrs {
            self.adj[w].clear(v);
        }
        self.adj[v] = Bits::new(self.alive_capacity());
        self.alive.clear(v);
    }

    fn alive_capacity(&self) -> usize {
        self.adj.len()
    }

    fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].clear(v);
        self.adj[v].clear(u);
    }

    /// Removes vertices whose closed neighbourhood lies in a neighbour's.
    fn collapse_vertices(&mut self) -> bool {
        let mut changed = false;
        for v in 0..self.adj.len() {
            if !self.alive.get(v) {
                continue;
            }
            let dominated = self.adj[v]
                .iter()
                .any(|w| self.adj[v].subset_except(&self.adj[w], w));
            if dominated {
                self.remove_vertex(v);
                changed = true;
            }
        }
        changed
    }

    /// Removes edges `uv` whose common neighbourhood is a cone with apex in it.
    fn collapse_edges(
        &mut self,
        pairs: &[(f64, u32, u32)],
        coords: &[f64],
        dim: usize,
        candidates: usize,
    ) -> bool {
        let mut changed = false;
        let mut mid = vec![0.0; dim];
        let mut common = Bits::new(self.adj.len());
        // Nearest `candidates` common neighbours to the midpoint, ascending.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(candidates + 1);
        for &(_, u, v) in pairs.iter().rev() {
            let (u, v) = (u as usize, v as usize);
            if !self.adj[u].get(v) {
                continue;
            }
            common.assign_and(&self.adj[u], &self.adj[v]);
            let pu = &coords[u * dim..(u + 1) * dim];
            let pv = &coords[v * dim..(v + 1) * dim];
            for (m, (a, b)) in mid.iter_mut().zip(pu.iter().zip(pv)) {
                *m = 0.5 * (a + b);
            }
            best.clear();
            for w in common.iter() {
                let d = dist2(&mid, &coords[w * dim..(w + 1) * dim]);
                if best.len() == candidates && d >= best[candidates - 1].0 {
                    continue;
                }
                let at = best.partition_point(|b| b.0 <= d);
                best.insert(at, (d, w));
                best.truncate(candidates);
            }
            if best.iter().any(|&(_, w)| common.subset_except(&self.adj[w], w)) {
                self.remove_edge(u, v);
                changed = true;
            }
        }
        changed
    }

    fn degeneracy_order(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut deg: Vec<usize> = (0..n).map(|v| self.adj[v].count()).collect();
        let mut done = vec![false; n];
        for v in 0..n {
            done[v] = !self.alive.get(v);
        }
        let mut order = Vec::with_capacity(self.alive.count());
        loop {
            let next = (0..n).filter(|&v| !done[v]).min_by_key(|&v| (deg[v], v));
            let Some(v) = next else { break };
            done[v] = true;
            order.push(v);
            for w in self.adj[v].iter() {
                if !done[w] {
                    deg[w] -= 1;
                }
            }
        }
        order
    }

    fn count_cliques(&self, max_dim: Option<usize>, budget: u64) -> Result<Vec<u64>, u64> {
        let n = self.adj.len();
        let order = self.degeneracy_order();
        let mut rank = vec![usize::MAX; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let fwd: Vec<Bits> = (0..n)
            .map(|v| {
                let mut b = Bits::new(n);
                for w in self.adj[v].iter() {
                    if rank[w] > rank[v] {
                        b.set(w);
                    }
                }
                b
            })
            .collect();
        let mut counts = vec![order.len() as u64];
        let mut total = order.len() as u64;
        if total > budget {
            return Err(total);
        }
        let limit = max_dim.map_or(usize::MAX, |d| d + 1);
        for &v in &order {
            extend(&fwd, &fwd[v], 1, limit, &mut counts, &mut total, budget)?;
        }
        while counts.len() > 1 && counts.last() == Some(&0) {
            counts.pop();
        }
        Ok(counts)
    }
}

/// Counts cliques obtained by adding one vertex of `cand` to a clique of
/// `size` vertices.
fn extend(
    fwd: &[Bits],
    cand: &Bits,
    size: usize,
    limit: usize,
    counts: &mut Vec<u64>,
    total: &mut u64,
    budget: u64,
) -> Result<(), u64> {
    if size >= limit {
        return Ok(());
    }
    for u in cand.iter() {
        if counts.len() <= size {
            counts.resize(size + 1, 0);
        }
        counts[size] += 1;
        *total += 1;
        if *total > budget {
            return Err(*total);
        }
        let next = cand.and(&fwd[u]);
        if next.iter().next().is_some() {
            extend(fwd, &next, size + 1, limit, counts, total, budget)?;
        }
    }
    Ok(())
}

/// Evaluates the flag complex of the graph made of `pairs` (already cut at
/// the scale) on `n` vertices.
pub(crate) fn evaluate(
    scale: f64,
    coords: &[f64],
    dim: usize,
    n: usize,
    pairs: &[(f64, u32, u32)],
    components: usize,
    opts: &RipsOptions,
) -> ComplexStats {
    let saturated = n >= 2 && pairs.len() == n * (n - 1) / 2;
    let mut stats = ComplexStats {
        scale,
        counts: Vec::new(),
        chi: 0,
        raw_vertices: n,
        raw_edges: pairs.len(),
        components,
        valid: false,
        saturated,
        note: None,
    };
    if pairs.len() > opts.max_edges {
        stats.note = Some(format!(
            "{} edges exceed the limit of {}",
            pairs.len(),
            opts.max_edges
        ));
        return stats;
    }
    if saturated && opts.reduce {
        // A complete graph spans a single simplex.
        stats.counts = vec![1];
        stats.chi = 1;
        stats.valid = true;
        return stats;
    }
    let mut g = Graph::from_pairs(n, pairs);
    if opts.reduce {
        for _ in 0..opts.max_passes {
            let v = g.collapse_vertices();
            let e = g.collapse_edges(pairs, coords, dim, opts.edge_candidates);
            if !(e || v) {
                break;
            }
        }
    }
    match g.count_cliques(opts.max_dim, opts.clique_budget) {
        Ok(counts) => {
            stats.chi = ComplexStats::alternating_sum(&counts);
            stats.counts = if n == 0 { Vec::new() } else { counts };
            stats.valid = true;
        }
        Err(seen) => {
            stats.note = Some(format!(
                "clique budget {} exceeded ({} simplices seen)",
                opts.clique_budget, seen
            ));
        }
    }
    stats
}

/// χ of the Vietoris–Rips complex of `coords` (rows of length `dim`) at
/// scale `r`: simplices are vertex sets of pairwise distance `≤ r`.
pub fn rips_chi(
    coords: &[f64],
    dim: usize,
    r: f64,
    opts: &RipsOptions,
) -> Result<ComplexStats, EstimatorError> {
    opts.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(EstimatorError::InvalidScale(r));
    }
    let pl = PairList::new(coords, dim, r);
    let mut uf = UnionFind::new(pl.n);
    for &(_, i, j) in &pl.pairs {
        uf.union(i, j);
    }
    let stats = evaluate(r, coords, dim, pl.n, &pl.pairs, uf.components, opts);
    if !stats.valid {
        return Err(EstimatorError::Budget {
            scale: r,
            detail: stats.note.unwrap_or_default(),
        });
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn literal() -> RipsOptions {
        RipsOptions {
            reduce: false,
            ..RipsOptions::default()
        }
    }

    #[test]
    fn two_points() {
        let pts = [0.0, 0.0, 1.0, 0.0];
        let s = rips_chi(&pts, 2, 0.5, &literal()).unwrap();
        assert_eq!((s.counts.clone(), s.chi), (vec![2], 2));
        let s = rips_chi(&pts, 2, 2.0, &literal()).unwrap();
        assert_eq!((s.counts.clone(), s.chi), (vec![2, 1], 1));
        assert!(s.saturated);
        let s = rips_chi(&pts, 2, 2.0, &RipsOptions::default()).unwrap();
        assert_eq!((s.counts, s.chi), (vec![1], 1));
    }

    #[test]
    fn tetrahedron_counts() {
        let pts = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let s = rips_chi(&pts, 3, 2.0, &literal()).unwrap();
        assert_eq!(s.counts, vec![4, 6, 4, 1]);
        assert_eq!(s.chi, 1);
        let opts = RipsOptions {
            max_dim: Some(1),
            ..literal()
        };
        assert_eq!(rips_chi(&pts, 3, 2.0, &opts).unwrap().counts, vec![4, 6]);
    }

    #[test]
    fn budget_is_reported() {
        let pts: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let opts = RipsOptions {
            clique_budget: 1000,
            ..literal()
        };
        assert!(matches!(
            rips_chi(&pts, 1, 1.0, &opts),
            Err(EstimatorError::Budget { .. })
        ));
    }

    #[test]
    fn truncation_with_reduction_is_rejected() {
        let opts = RipsOptions {
            max_dim: Some(1),
            ..RipsOptions::default()
        };
        assert!(rips_chi(&[0.0], 1, 1.0, &opts).is_err());
    }
}
