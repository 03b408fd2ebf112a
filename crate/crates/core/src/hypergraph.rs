//! Uniform hypergraphs with tuple-degree indexes, shadows and subgraph algebra.
//!
//! Edges are kept as sorted vertex tuples in lexicographic order, so an edge's
//! position in [`Hypergraph::edges`] is a stable identifier ("canonical edge
//! index") that every file format and copy family refers to.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::util::for_each_subset;

pub type Vertex = u32;

/// Degrees `d_G(σ)` of all `j`-subsets `σ` with positive degree.
#[derive(Debug, Clone, Default)]
pub struct TupleDegreeIndex {
    pub j: usize,
    degrees: HashMap<Vec<Vertex>, u32>,
    max: u32,
}

impl TupleDegreeIndex {
    pub fn get(&self, sorted: &[Vertex]) -> u32 {
        self.degrees.get(sorted).copied().unwrap_or(0)
    }

    pub fn max(&self) -> u32 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.degrees.values().map(|&d| d as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Vertex], u32)> {
        self.degrees.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

#[derive(Debug, Clone)]
pub struct Hypergraph {
    r: usize,
    n: usize,
    /// Flat storage, `r` vertices per edge.
    flat: Vec<Vertex>,
    lookup: HashMap<Box<[Vertex]>, u32>,
    incidence: Vec<Vec<u32>>,
    pairs: HashMap<(Vertex, Vertex), Vec<u32>>,
    tuples: Vec<OnceLock<TupleDegreeIndex>>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.n == other.n && self.flat == other.flat
    }
}

impl Eq for Hypergraph {}

impl Hypergraph {
    /// Builds a canonical hypergraph: each edge sorted, duplicates removed,
    /// edges ordered lexicographically.
    pub fn from_edges<I, E>(r: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[Vertex]>,
    {
        if r < 1 {
            return Err(Error::InvalidParameter("uniformity must be positive".into()));
        }
        let mut list: Vec<Vec<Vertex>> = Vec::new();
        for e in edges {
            let raw = e.as_ref();
            let mut v = raw.to_vec();
            v.sort_unstable();
            v.dedup();
            if v.len() != r || raw.len() != r {
                return Err(Error::NonUniformEdge {
                    edge: raw.to_vec(),
                    expected: r,
                    found: v.len(),
                });
            }
            if let Some(&bad) = v.iter().find(|&&x| x as usize >= n) {
                return Err(Error::VertexOutOfRange {
                    edge: raw.to_vec(),
                    vertex: bad,
                    n,
                });
            }
            list.push(v);
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_canonical(r, n, list))
    }

    fn from_canonical(r: usize, n: usize, list: Vec<Vec<Vertex>>) -> Self {
        let mut flat = Vec::with_capacity(list.len() * r);
        let mut lookup = HashMap::with_capacity(list.len());
        let mut incidence = vec![Vec::new(); n];
        let mut pairs: HashMap<(Vertex, Vertex), Vec<u32>> = HashMap::new();
        for (i, e) in list.into_iter().enumerate() {
            let id = i as u32;
            for &v in &e {
                incidence[v as usize].push(id);
            }
            for a in 0..e.len() {
                for b in a + 1..e.len() {
                    pairs.entry((e[a], e[b])).or_default().push(id);
                }
            }
            flat.extend_from_slice(&e);
            lookup.insert(e.into_boxed_slice(), id);
        }
        Hypergraph {
            r,
            n,
            flat,
            lookup,
            incidence,
            pairs,
            tuples: (0..=r).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn empty(r: usize, n: usize) -> Self {
        Self::from_canonical(r, n, Vec::new())
    }

    /// The complete `r`-graph `K_n^(r)`.
    pub fn complete(n: usize, r: usize) -> Self {
        let verts: Vec<Vertex> = (0..n as Vertex).collect();
        let mut list = Vec::new();
        for_each_subset(&verts, r, |s| list.push(s.to_vec()));
        Self::from_canonical(r, n, list)
    }

    pub fn uniformity(&self) -> usize {
        self.r
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.flat.len().checked_div(self.r).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// `d(G) = r·e(G)/n`.
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.r * self.edge_count()) as f64 / self.n as f64
        }
    }

    #[inline]
    pub fn edge(&self, i: usize) -> &[Vertex] {
        &self.flat[i * self.r..(i + 1) * self.r]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[Vertex]> + '_ {
        self.flat.chunks_exact(self.r.max(1))
    }

    pub fn index_of(&self, edge: &[Vertex]) -> Option<usize> {
        if edge.windows(2).all(|w| w[0] < w[1]) {
            self.lookup.get(edge).map(|&i| i as usize)
        } else {
            let mut v = edge.to_vec();
            v.sort_unstable();
            self.lookup.get(v.as_slice()).map(|&i| i as usize)
        }
    }

    pub fn contains_edge(&self, edge: &[Vertex]) -> bool {
        self.index_of(edge).is_some()
    }

    /// Canonical indexes of the edges through `v`.
    pub fn edges_with_vertex(&self, v: Vertex) -> &[u32] {
        self.incidence.get(v as usize).map_or(&[], |x| x.as_slice())
    }

    /// Canonical indexes of the edges containing both `u` and `v`.
    pub fn edges_with_pair(&self, u: Vertex, v: Vertex) -> &[u32] {
        let key = if u < v { (u, v) } else { (v, u) };
        self.pairs.get(&key).map_or(&[], |x| x.as_slice())
    }

    pub fn codegree(&self, u: Vertex, v: Vertex) -> usize {
        self.edges_with_pair(u, v).len()
    }

    pub fn vertex_degree(&self, v: Vertex) -> usize {
        self.edges_with_vertex(v).len()
    }

    /// All pairs with positive codegree.
    pub fn pair_codegrees(&self) -> impl Iterator<Item = ((Vertex, Vertex), usize)> + '_ {
        self.pairs.iter().map(|(&k, v)| (k, v.len()))
    }

    /// Number of edges containing the vertex set `sigma`.
    pub fn degree(&self, sigma: &[Vertex]) -> Result<usize> {
        let mut s = sigma.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() || s.len() != sigma.len() || s.len() > self.r {
            return Err(Error::TupleSize {
                size: sigma.len(),
                r: self.r,
            });
        }
        if let Some(&bad) = s.iter().find(|&&x| x as usize >= self.n) {
            return Err(Error::VertexOutOfRange {
                edge: sigma.to_vec(),
                vertex: bad,
                n: self.n,
            });
        }
        Ok(match s.len() {
            1 => self.vertex_degree(s[0]),
            2 => self.codegree(s[0], s[1]),
            j => self.tuple_degrees(j)?.get(&s) as usize,
        })
    }

    /// The lazily built degree index for `j`-subsets.
    pub fn tuple_degrees(&self, j: usize) -> Result<&TupleDegreeIndex> {
        if j == 0 || j > self.r {
            return Err(Error::TupleSize { size: j, r: self.r });
        }
        Ok(self.tuples[j].get_or_init(|| {
            let mut degrees: HashMap<Vec<Vertex>, u32> = HashMap::new();
            for e in self.edges() {
                for_each_subset(e, j, |s| *degrees.entry(s.to_vec()).or_insert(0) += 1);
            }
            let max = degrees.values().copied().max().unwrap_or(0);
            TupleDegreeIndex { j, degrees, max }
        }))
    }

    /// `Δ_j(G)`, 0 for the empty graph.
    pub fn max_degree(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.r {
            return Err(Error::TupleSize { size: j, r: self.r });
        }
        Ok(match j {
            1 => self.incidence.iter().map(Vec::len).max().unwrap_or(0),
            2 => self.pairs.values().map(Vec::len).max().unwrap_or(0),
            _ if j == self.r => usize::from(!self.is_empty()),
            _ => self.tuple_degrees(j)?.max() as usize,
        })
    }

    /// Subgraph on the same vertex set keeping the given canonical edge indexes.
    pub fn edge_subgraph(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut idx: Vec<usize> = indices.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        let list = idx.into_iter().map(|i| self.edge(i).to_vec()).collect();
        Self::from_canonical(self.r, self.n, list)
    }

    /// `G − C`: same vertex set, edges of `G` not in `C`.
    pub fn subtract(&self, other: &Hypergraph) -> Result<Self> {
        let mut drop = vec![false; self.edge_count()];
        for e in other.edges() {
            match self.index_of(e) {
                Some(i) if other.r == self.r => drop[i] = true,
                _ => return Err(Error::NotSubgraph { edge: e.to_vec() }),
            }
        }
        Ok(self.edge_subgraph((0..self.edge_count()).filter(|&i| !drop[i])))
    }

    /// `G[A]`: edges entirely inside `A`. Vertex ids are preserved.
    pub fn induced(&self, vertices: &[Vertex]) -> Self {
        let mut inside = vec![false; self.n];
        for &v in vertices {
            if (v as usize) < self.n {
                inside[v as usize] = true;
            }
        }
        self.edge_subgraph(
            (0..self.edge_count()).filter(|&i| self.edge(i).iter().all(|&v| inside[v as usize])),
        )
    }

    /// Adds one edge, returning a new hypergraph.
    pub fn with_edge(&self, edge: &[Vertex]) -> Result<Self> {
        Self::from_edges(self.r, self.n, self.edges().chain(std::iter::once(edge)))
    }
}

/// An `r`-partite hypergraph: every edge meets each part exactly once.
#[derive(Debug, Clone)]
pub struct PartiteHypergraph {
    graph: Hypergraph,
    part_of: Vec<Option<usize>>,
    parts: usize,
}

impl PartiteHypergraph {
    pub fn new(graph: Hypergraph, part_of: Vec<Option<usize>>) -> Result<Self> {
        let r = graph.uniformity();
        if part_of.len() != graph.vertex_count() {
            return Err(Error::NotPartite(format!(
                "partition covers {} of {} vertices",
                part_of.len(),
                graph.vertex_count()
            )));
        }
        if let Some(bad) = part_of.iter().flatten().find(|&&p| p >= r) {
            return Err(Error::NotPartite(format!("part index {bad} out of range")));
        }
        for e in graph.edges() {
            let mut seen = vec![false; r];
            for &v in e {
                match part_of[v as usize] {
                    Some(p) if !seen[p] => seen[p] = true,
                    _ => {
                        return Err(Error::NotPartite(format!(
                            "edge {e:?} does not meet every part exactly once"
                        )))
                    }
                }
            }
        }
        Ok(PartiteHypergraph {
            graph,
            part_of,
            parts: r,
        })
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn part_count(&self) -> usize {
        self.parts
    }

    pub fn part_of(&self, v: Vertex) -> Option<usize> {
        self.part_of.get(v as usize).copied().flatten()
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.part_of
    }

    /// Vertices assigned to part `i`, ascending.
    pub fn part(&self, i: usize) -> Vec<Vertex> {
        (0..self.part_of.len() as Vertex)
            .filter(|&v| self.part_of[v as usize] == Some(i))
            .collect()
    }

    /// The vertex of edge `e` lying in part `i`.
    pub fn vertex_in_part(&self, e: usize, i: usize) -> Vertex {
        *self
            .graph
            .edge(e)
            .iter()
            .find(|&&v| self.part_of[v as usize] == Some(i))
            .expect("partite edge meets every part")
    }

    pub fn shadow(&self, i: usize, j: usize) -> Result<ShadowGraph> {
        shadow(self, i, j)
    }
}

/// `∂_{V_i,V_j}`: part-pairs covered by some edge, each with its codegree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowGraph {
    pub parts: (usize, usize),
    /// `(v_i, v_j) -> d_H(v_i, v_j)`, with `v_i ∈ V_i`, `v_j ∈ V_j`.
    pairs: BTreeMap<(Vertex, Vertex), usize>,
    vertex_count: usize,
}

impl ShadowGraph {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn codegree(&self, vi: Vertex, vj: Vertex) -> usize {
        self.pairs.get(&(vi, vj)).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((Vertex, Vertex), usize)> + '_ {
        self.pairs.iter().map(|(&k, &v)| (k, v))
    }

    /// Contains the unordered pair `{a, b}` in either orientation.
    pub fn contains(&self, a: Vertex, b: Vertex) -> bool {
        self.pairs.contains_key(&(a, b)) || self.pairs.contains_key(&(b, a))
    }

    /// The shadow as a 2-graph on the host's vertex ids.
    pub fn to_graph(&self) -> Hypergraph {
        Hypergraph::from_edges(
            2,
            self.vertex_count,
            self.pairs.keys().map(|&(a, b)| [a, b]),
        )
        .expect("shadow pairs are valid 2-edges")
    }
}

pub fn shadow(h: &PartiteHypergraph, i: usize, j: usize) -> Result<ShadowGraph> {
    if i >= j || j >= h.part_count() {
        return Err(Error::InvalidParameter(format!(
            "shadow parts ({i}, {j}) invalid for {} parts",
            h.part_count()
        )));
    }
    let mut pairs = BTreeMap::new();
    for e in 0..h.graph.edge_count() {
        let a = h.vertex_in_part(e, i);
        let b = h.vertex_in_part(e, j);
        *pairs.entry((a, b)).or_insert(0) += 1;
    }
    Ok(ShadowGraph {
        parts: (i, j),
        pairs,
        vertex_count: h.graph.vertex_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> Hypergraph {
        Hypergraph::from_edges(2, 4, [[0, 1], [1, 2], [2, 3], [3, 0]]).unwrap()
    }

    #[test]
    fn dedups_identical_edges() {
        let g = Hypergraph::from_edges(3, 3, [[0, 1, 2], [2, 1, 0]]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn four_cycle_degrees() {
        let g = cycle4();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.max_degree(1).unwrap(), 2);
        assert_eq!(g.average_degree(), 2.0);
    }

    #[test]
    fn construction_errors_name_the_edge() {
        match Hypergraph::from_edges(3, 5, [[0, 1, 1]]) {
            Err(Error::NonUniformEdge { edge, .. }) => assert_eq!(edge, vec![0, 1, 1]),
            other => panic!("{other:?}"),
        }
        match Hypergraph::from_edges(2, 3, [[0, 7]]) {
            Err(Error::VertexOutOfRange { vertex: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(Hypergraph::from_edges(3, 5, [vec![0, 1]]).is_err());
    }

    #[test]
    fn degree_queries() {
        let k4 = Hypergraph::complete(4, 2);
        assert_eq!(k4.degree(&[0]).unwrap(), 3);
        assert_eq!(k4.max_degree(2).unwrap(), 1);
        let star = Hypergraph::from_edges(
            3,
            11,
            (0..5).map(|i| [0, 2 * i + 1, 2 * i + 2]),
        )
        .unwrap();
        assert_eq!(star.degree(&[0]).unwrap(), 5);
        assert!(star.degree(&[0, 1, 2, 3]).is_err());
        assert!(star.max_degree(4).is_err());
        assert_eq!(Hypergraph::empty(3, 5).max_degree(1).unwrap(), 0);
        assert_eq!(Hypergraph::empty(3, 5).max_degree(2).unwrap(), 0);
    }

    #[test]
    fn subtract_and_induced() {
        let k5 = Hypergraph::complete(5, 2);
        let none = k5.subtract(&k5).unwrap();
        assert_eq!(none.edge_count(), 0);
        assert_eq!(none.vertex_count(), 5);
        assert_eq!(k5.induced(&[0, 1, 2]), {
            let mut k3 = Hypergraph::complete(3, 2);
            k3 = Hypergraph::from_edges(2, 5, k3.edges()).unwrap();
            k3
        });
        let other = Hypergraph::from_edges(2, 6, [[4, 5]]).unwrap();
        assert!(matches!(k5.subtract(&other), Err(Error::NotSubgraph { .. })));
    }

    #[test]
    fn shadow_of_single_and_shared_edges() {
        let g = Hypergraph::from_edges(3, 4, [[0, 1, 2]]).unwrap();
        let h = PartiteHypergraph::new(g, vec![Some(0), Some(1), Some(2), None]).unwrap();
        let s = h.shadow(0, 1).unwrap();
        assert_eq!(s.pairs().collect::<Vec<_>>(), vec![((0, 1), 1)]);

        let g = Hypergraph::from_edges(3, 4, [[0, 1, 2], [0, 1, 3]]).unwrap();
        let h =
            PartiteHypergraph::new(g, vec![Some(0), Some(1), Some(2), Some(2)]).unwrap();
        let s = h.shadow(0, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.codegree(0, 1), 2);
    }

    #[test]
    fn non_partite_host_rejected() {
        let g = Hypergraph::from_edges(3, 4, [[0, 1, 2]]).unwrap();
        assert!(PartiteHypergraph::new(g, vec![Some(0), Some(0), Some(2), None]).is_err());
    }
}
