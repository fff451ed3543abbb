//! Graded branching graphs `(Z, E, r, s)` with a finite multiplicity on
//! every edge, stored as a depth-`N` truncation.
//!
//! Vertices are addressed by [`VertexId`] (level, index within level) and
//! edges by [`EdgeId`] (level of the target, index within that level's edge
//! list). Within a level, vertex order is the order the labels were given;
//! every deterministic ordering in the crate derives from it.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub level: usize,
    pub index: usize,
}

impl VertexId {
    pub const ROOT: VertexId = VertexId { level: 0, index: 0 };

    pub fn new(level: usize, index: usize) -> Self {
        VertexId { level, index }
    }
}

/// An edge of `E_level`; its target lives at `level`, its source at `level - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub level: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Index of `s(e)` within level `n - 1`.
    pub source: usize,
    /// Index of `r(e)` within level `n`.
    pub target: usize,
    pub multiplicity: u32,
}

/// Per-vertex data, indexed by [`VertexId`].
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMap<T>(pub Vec<Vec<T>>);

impl<T> VertexMap<T> {
    pub fn level(&self, n: usize) -> &[T] {
        &self.0[n]
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }
}

impl<T> std::ops::Index<VertexId> for VertexMap<T> {
    type Output = T;
    fn index(&self, v: VertexId) -> &T {
        &self.0[v.level][v.index]
    }
}

impl<T> std::ops::IndexMut<VertexId> for VertexMap<T> {
    fn index_mut(&mut self, v: VertexId) -> &mut T {
        &mut self.0[v.level][v.index]
    }
}

/// Per-edge data. `self.0[n - 1]` holds the entries for `E_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap<T>(pub Vec<Vec<T>>);

impl<T> EdgeMap<T> {
    pub fn level(&self, n: usize) -> &[T] {
        &self.0[n - 1]
    }
}

impl<T> std::ops::Index<EdgeId> for EdgeMap<T> {
    type Output = T;
    fn index(&self, e: EdgeId) -> &T {
        &self.0[e.level - 1][e.index]
    }
}

impl<T> std::ops::IndexMut<EdgeId> for EdgeMap<T> {
    fn index_mut(&mut self, e: EdgeId) -> &mut T {
        &mut self.0[e.level - 1][e.index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Level 0 must hold exactly one vertex.
    RootNotSingleton {
        count: usize,
    },
    /// Two edges share the same `(target, source)` pair.
    DuplicateEdge {
        first: EdgeId,
        second: EdgeId,
    },
    /// A vertex below the top level is the source of no edge.
    NotASource(VertexId),
    /// A vertex above the root is the target of no edge.
    NotATarget(VertexId),
    ZeroMultiplicity(EdgeId),
}

impl Violation {
    /// The graph axiom the violation breaks.
    pub fn axiom(&self) -> &'static str {
        match self {
            Violation::RootNotSingleton { .. } => "i",
            Violation::DuplicateEdge { .. } => "ii",
            Violation::NotASource(_) => "iii",
            Violation::NotATarget(_) => "iv",
            Violation::ZeroMultiplicity(_) => "multiplicity",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Path-times-eigenvector basis element of `H_z`: the edge path from the
/// root (one edge index per level) and one eigen index per edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisElement {
    pub path: Vec<usize>,
    pub eigen: Vec<usize>,
}

impl BasisElement {
    /// The basis element of the level-`m` vertex this one passes through.
    pub fn prefix(&self, m: usize) -> BasisElement {
        BasisElement {
            path: self.path[..m].to_vec(),
            eigen: self.eigen[..m].to_vec(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradedGraph {
    levels: Vec<Vec<String>>,
    edges: Vec<Vec<Edge>>,
    incoming: Vec<Vec<Vec<usize>>>,
    outgoing: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<String, usize>>,
}

impl PartialEq for GradedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels && self.edges == other.edges
    }
}

impl GradedGraph {
    /// Builds a graph from labels per level and edges per level
    /// (`edges[n - 1]` is `E_n`).
    ///
    /// Structural errors (dangling references, duplicate labels) are hard
    /// errors; axiom violations are left for [`GradedGraph::validate`].
    pub fn new(levels: Vec<Vec<String>>, edges: Vec<Vec<Edge>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::MalformedGraph("no levels".into()));
        }
        if edges.len() + 1 != levels.len() {
            return Err(Error::MalformedGraph(format!(
                "{} vertex levels need {} edge levels, got {}",
                levels.len(),
                levels.len() - 1,
                edges.len()
            )));
        }
        let mut lookup = Vec::with_capacity(levels.len());
        for (n, labels) in levels.iter().enumerate() {
            let mut map = HashMap::with_capacity(labels.len());
            for (i, label) in labels.iter().enumerate() {
                if map.insert(label.clone(), i).is_some() {
                    return Err(Error::MalformedGraph(format!(
                        "duplicate label {label:?} at level {n}"
                    )));
                }
            }
            lookup.push(map);
        }
        let mut incoming: Vec<Vec<Vec<usize>>> =
            levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        let mut outgoing: Vec<Vec<Vec<usize>>> =
            levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for (k, level_edges) in edges.iter().enumerate() {
            let n = k + 1;
            for (i, e) in level_edges.iter().enumerate() {
                if e.source >= levels[n - 1].len() || e.target >= levels[n].len() {
                    return Err(Error::MalformedGraph(format!(
                        "edge {i} of level {n} references a missing vertex"
                    )));
                }
                incoming[n][e.target].push(i);
                outgoing[n - 1][e.source].push(i);
            }
            for list in incoming[n].iter_mut() {
                list.sort_by_key(|&i| (level_edges[i].source, i));
            }
            for list in outgoing[n - 1].iter_mut() {
                list.sort_by_key(|&i| (level_edges[i].target, i));
            }
        }
        Ok(GradedGraph {
            levels,
            edges,
            incoming,
            outgoing,
            lookup,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.levels[n].len()
    }

    pub fn labels(&self, n: usize) -> &[String] {
        &self.levels[n]
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.levels[v.level][v.index]
    }

    pub fn vertices(&self, n: usize) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.levels[n].len()).map(move |i| VertexId::new(n, i))
    }

    pub fn all_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.levels.len()).flat_map(move |n| self.vertices(n))
    }

    pub fn vertex(&self, level: usize, label: &str) -> Result<VertexId> {
        self.lookup
            .get(level)
            .and_then(|m| m.get(label))
            .map(|&i| VertexId::new(level, i))
            .ok_or_else(|| Error::VertexNotFound(format!("[{level},{label}]")))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.level < self.levels.len() && v.index < self.levels[v.level].len()
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexNotFound(format!("[{},#{}]", v.level, v.index)))
        }
    }

    /// `[n,label]`, the textual key used in files.
    pub fn vertex_key(&self, v: VertexId) -> String {
        format!("[{},{}]", v.level, self.label(v))
    }

    /// Edges of `E_n` in storage order.
    pub fn edges(&self, n: usize) -> &[Edge] {
        &self.edges[n - 1]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.level - 1][e.index]
    }

    pub fn edge_ids(&self, n: usize) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges[n - 1].len()).map(move |i| EdgeId { level: n, index: i })
    }

    pub fn all_edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (1..self.levels.len()).flat_map(move |n| self.edge_ids(n))
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        VertexId::new(e.level - 1, self.edge(e).source)
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        VertexId::new(e.level, self.edge(e).target)
    }

    /// Edges `e` with `r(e) = z`, ordered by source index.
    pub fn incoming(&self, z: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let level = z.level;
        let list: &[usize] = if level == 0 {
            &[]
        } else {
            &self.incoming[level][z.index]
        };
        list.iter().map(move |&index| EdgeId { level, index })
    }

    /// Edges `e` with `s(e) = z`, ordered by target index.
    pub fn outgoing(&self, z: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let level = z.level + 1;
        let list: &[usize] = if level > self.depth() {
            &[]
        } else {
            &self.outgoing[z.level][z.index]
        };
        list.iter().map(move |&index| EdgeId { level, index })
    }

    /// The edge from `lower` into `upper`, if the two are adjacent and joined.
    pub fn edge_between(&self, upper: VertexId, lower: VertexId) -> Option<EdgeId> {
        if upper.level != lower.level + 1 || !self.contains(upper) || !self.contains(lower) {
            return None;
        }
        self.incoming(upper)
            .find(|&e| self.edge(e).source == lower.index)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.levels[0].len() != 1 {
            violations.push(Violation::RootNotSingleton {
                count: self.levels[0].len(),
            });
        }
        for n in 1..=self.depth() {
            let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
            for (i, e) in self.edges[n - 1].iter().enumerate() {
                if e.multiplicity == 0 {
                    violations.push(Violation::ZeroMultiplicity(EdgeId { level: n, index: i }));
                }
                match seen.get(&(e.target, e.source)) {
                    Some(&first) => violations.push(Violation::DuplicateEdge {
                        first: EdgeId {
                            level: n,
                            index: first,
                        },
                        second: EdgeId { level: n, index: i },
                    }),
                    None => {
                        seen.insert((e.target, e.source), i);
                    }
                }
            }
        }
        for n in 0..self.depth() {
            for v in self.vertices(n) {
                if self.outgoing[n][v.index].is_empty() {
                    violations.push(Violation::NotASource(v));
                }
            }
        }
        for n in 1..=self.depth() {
            for v in self.vertices(n) {
                if self.incoming[n][v.index].is_empty() {
                    violations.push(Violation::NotATarget(v));
                }
            }
        }
        ValidationReport { violations }
    }

    /// All edge paths from the root to `z`, each as one edge index per level.
    ///
    /// Paths are ordered lexicographically by the vertices they visit,
    /// compared from level 1 upwards.
    pub fn enumerate_paths(&self, z: VertexId) -> Result<Vec<Vec<usize>>> {
        self.check_vertex(z)?;
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut stack = Vec::new();
        self.collect_paths(z, &mut stack, &mut paths);
        for p in paths.iter_mut() {
            p.reverse();
        }
        paths.sort_by_cached_key(|p| self.path_key(p));
        Ok(paths)
    }

    fn collect_paths(&self, z: VertexId, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if z.level == 0 {
            out.push(stack.clone());
            return;
        }
        for e in self.incoming(z) {
            stack.push(e.index);
            self.collect_paths(self.source(e), stack, out);
            stack.pop();
        }
    }

    fn path_key(&self, path: &[usize]) -> Vec<(usize, usize)> {
        path.iter()
            .enumerate()
            .map(|(k, &i)| {
                let e = &self.edges[k][i];
                (e.target, e.source)
            })
            .collect()
    }

    /// Vertex visited by `path` at each level, root first.
    pub fn path_vertices(&self, path: &[usize]) -> Vec<VertexId> {
        let mut out = vec![VertexId::ROOT];
        for (k, &i) in path.iter().enumerate() {
            out.push(VertexId::new(k + 1, self.edges[k][i].target));
        }
        out
    }

    /// `dim H_z = sum over paths of the product of multiplicities`,
    /// by recursion over the down-cone of `z`.
    pub fn dim_vertex(&self, z: VertexId) -> Result<u128> {
        self.check_vertex(z)?;
        let mut prev: Vec<Option<u128>> = vec![Some(1); self.levels[0].len()];
        for n in 1..=z.level {
            let mut cur = vec![Some(0u128); self.levels[n].len()];
            for e in &self.edges[n - 1] {
                let add = prev[e.source].and_then(|d| d.checked_mul(e.multiplicity as u128));
                cur[e.target] = match (cur[e.target], add) {
                    (Some(a), Some(b)) => a.checked_add(b),
                    _ => None,
                };
            }
            prev = cur;
        }
        prev[z.index].ok_or_else(|| Error::DimensionOverflow(self.vertex_key(z)))
    }

    /// The canonical basis of `H_z`: paths in [`enumerate_paths`] order,
    /// and within a path the tensor basis with the lowest level most
    /// significant.
    ///
    /// [`enumerate_paths`]: GradedGraph::enumerate_paths
    pub fn basis(&self, z: VertexId) -> Result<Vec<BasisElement>> {
        let mut out = Vec::new();
        for path in self.enumerate_paths(z)? {
            let mults: Vec<usize> = path
                .iter()
                .enumerate()
                .map(|(k, &i)| self.edges[k][i].multiplicity as usize)
                .collect();
            let count: usize = mults.iter().product();
            for flat in 0..count {
                let mut eigen = vec![0usize; path.len()];
                let mut rest = flat;
                for k in (0..path.len()).rev() {
                    eigen[k] = rest % mults[k];
                    rest /= mults[k];
                }
                out.push(BasisElement {
                    path: path.clone(),
                    eigen,
                });
            }
        }
        Ok(out)
    }

    pub fn truncate(&self, n: usize) -> Result<GradedGraph> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        GradedGraph::new(self.levels[..=n].to_vec(), self.edges[..n].to_vec())
    }

    /// A vertex map with every entry set to `value`.
    pub fn vertex_map<T: Clone>(&self, value: T) -> VertexMap<T> {
        VertexMap(
            self.levels
                .iter()
                .map(|l| vec![value.clone(); l.len()])
                .collect(),
        )
    }

    pub fn edge_map<T: Clone>(&self, value: T) -> EdgeMap<T> {
        EdgeMap(
            self.edges
                .iter()
                .map(|l| vec![value.clone(); l.len()])
                .collect(),
        )
    }

    pub fn edge_map_with<T>(&self, mut f: impl FnMut(EdgeId, &Edge) -> T) -> EdgeMap<T> {
        EdgeMap(
            self.edges
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    l.iter()
                        .enumerate()
                        .map(|(i, e)| {
                            f(
                                EdgeId {
                                    level: k + 1,
                                    index: i,
                                },
                                e,
                            )
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

impl fmt::Display for GradedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, labels) in self.levels.iter().enumerate() {
            writeln!(f, "level {n}: {}", labels.join(" "))?;
        }
        Ok(())
    }
}

/// Incremental construction by label.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    levels: Vec<Vec<String>>,
    edges: Vec<Vec<(String, String, u32)>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder::default()
    }

    pub fn vertex(mut self, level: usize, label: impl Into<String>) -> Self {
        while self.levels.len() <= level {
            self.levels.push(Vec::new());
        }
        self.levels[level].push(label.into());
        self
    }

    /// Edge from `source` at level `level - 1` to `target` at `level`.
    pub fn edge(
        mut self,
        level: usize,
        source: impl Into<String>,
        target: impl Into<String>,
        multiplicity: u32,
    ) -> Self {
        while self.edges.len() < level {
            self.edges.push(Vec::new());
        }
        self.edges[level - 1].push((source.into(), target.into(), multiplicity));
        self
    }

    pub fn build(self) -> Result<GradedGraph> {
        let depth = self.levels.len().saturating_sub(1);
        if self.edges.len() > depth {
            return Err(Error::MalformedGraph("edge above the top level".into()));
        }
        let index = |n: usize, label: &str| -> Result<usize> {
            self.levels[n]
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::VertexNotFound(format!("[{n},{label}]")))
        };
        let mut edges = vec![Vec::new(); depth];
        for (k, list) in self.edges.iter().enumerate() {
            for (s, t, m) in list {
                edges[k].push(Edge {
                    source: index(k, s)?,
                    target: index(k + 1, t)?,
                    multiplicity: *m,
                });
            }
        }
        GradedGraph::new(self.levels, edges)
    }
}
