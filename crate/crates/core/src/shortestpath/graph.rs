use std::collections::{HashMap, VecDeque};
use std::fmt;

use super::SpError;
use crate::pareto::{MultiPartyObjectives, ObjectiveVector};

/// The source vertex of every path.
pub const SOURCE: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// One weight vector per party.
    pub weights: MultiPartyObjectives,
}

/// Directed graph on vertices `1..=n` with per-party weight vectors on every
/// edge. Immutable once built; every vertex is reachable from [`SOURCE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDigraph {
    n: usize,
    party_dims: Vec<usize>,
    edges: Vec<Edge>,
    // successors[v] holds (target, edge index), sorted by target
    successors: Vec<Vec<(usize, usize)>>,
    lookup: HashMap<(usize, usize), usize>,
}

impl WeightedDigraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn party_count(&self) -> usize {
        self.party_dims.len()
    }

    /// Number of objectives of each party.
    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.lookup.get(&(from, to)).map(|&i| &self.edges[i])
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.lookup.contains_key(&(from, to))
    }

    /// Successors of `v` in ascending order.
    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.successors[v].iter().map(|&(t, _)| t)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.successors[v].len()
    }

    /// Vertices other than the source, ascending.
    pub fn endpoints(&self) -> impl Iterator<Item = usize> {
        (SOURCE + 1)..=self.n
    }

    /// Largest weight any edge carries for party `m`.
    pub fn max_weight(&self, m: usize) -> u64 {
        self.edges
            .iter()
            .flat_map(|e| e.weights.party(m).values().iter().copied())
            .max()
            .unwrap_or(1)
    }

    /// All-zero objectives with this graph's party structure.
    pub fn zero_objectives(&self) -> MultiPartyObjectives {
        MultiPartyObjectives::new(self.party_dims.iter().map(|&k| ObjectiveVector::zeros(k)).collect())
    }

    /// Entrywise sum of the edge weights along `path`.
    pub fn eval_path(&self, path: &Path) -> Result<MultiPartyObjectives, SpError> {
        let mut total = self.zero_objectives();
        self.accumulate(path.vertices(), &mut total)?;
        Ok(total)
    }

    pub(crate) fn accumulate(&self, vertices: &[usize], total: &mut MultiPartyObjectives) -> Result<(), SpError> {
        for pair in vertices.windows(2) {
            let edge = self
                .edge(pair[0], pair[1])
                .ok_or(SpError::NotAnEdge(pair[0], pair[1]))?;
            for m in 0..self.party_dims.len() {
                let acc = total.party_mut(m).values_mut();
                for (a, w) in acc.iter_mut().zip(edge.weights.party(m).values()) {
                    *a += w;
                }
            }
        }
        Ok(())
    }
}

/// Incremental construction of a [`WeightedDigraph`]; `build` checks
/// reachability.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: usize,
    party_dims: Vec<usize>,
    edges: Vec<Edge>,
    lookup: HashMap<(usize, usize), usize>,
}

impl GraphBuilder {
    pub fn new(n: usize, party_dims: Vec<usize>) -> Result<Self, SpError> {
        if n < 2 {
            return Err(SpError::TooFewVertices(n));
        }
        if party_dims.is_empty() || party_dims.contains(&0) {
            return Err(SpError::PartyShape(party_dims));
        }
        Ok(GraphBuilder {
            n,
            party_dims,
            edges: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weights: Vec<Vec<u64>>) -> Result<&mut Self, SpError> {
        for v in [from, to] {
            if v == 0 || v > self.n {
                return Err(SpError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        if from == to {
            return Err(SpError::SelfLoop(from));
        }
        if self.lookup.contains_key(&(from, to)) {
            return Err(SpError::DuplicateEdge(from, to));
        }
        let shape: Vec<usize> = weights.iter().map(Vec::len).collect();
        if shape != self.party_dims {
            return Err(SpError::WeightShape {
                from,
                to,
                expected: self.party_dims.clone(),
                got: shape,
            });
        }
        if weights.iter().flatten().any(|&w| w == 0) {
            return Err(SpError::NonPositiveWeight(from, to));
        }
        let weights = MultiPartyObjectives::new(weights.into_iter().map(ObjectiveVector::new).collect());
        self.lookup.insert((from, to), self.edges.len());
        self.edges.push(Edge { from, to, weights });
        Ok(self)
    }

    /// Vertices not reachable from the source, ascending.
    pub fn unreachable(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        let mut seen = vec![false; self.n + 1];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        (1..=self.n).filter(|&v| !seen[v]).collect()
    }

    pub fn build(self) -> Result<WeightedDigraph, SpError> {
        if let Some(&v) = self.unreachable().first() {
            return Err(SpError::Unreachable(v));
        }
        let mut successors = vec![Vec::new(); self.n + 1];
        for (i, e) in self.edges.iter().enumerate() {
            successors[e.from].push((e.to, i));
        }
        for list in &mut successors {
            list.sort_unstable();
        }
        Ok(WeightedDigraph {
            n: self.n,
            party_dims: self.party_dims,
            edges: self.edges,
            successors,
            lookup: self.lookup,
        })
    }
}

/// Vertex sequence starting at the source. Vertices may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<usize>);

impl Path {
    /// The bare source, `(1)`.
    pub fn source() -> Self {
        Path(vec![SOURCE])
    }

    /// Checks only that the sequence starts at the source; use
    /// [`Path::validate`] to check edges.
    pub fn new(vertices: Vec<usize>) -> Result<Self, SpError> {
        if vertices.first() != Some(&SOURCE) {
            return Err(SpError::PathNotFromSource(vertices));
        }
        Ok(Path(vertices))
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<usize>) -> Self {
        debug_assert_eq!(vertices.first(), Some(&SOURCE));
        Path(vertices)
    }

    pub fn validate(&self, g: &WeightedDigraph) -> Result<(), SpError> {
        match self.0.windows(2).find(|p| !g.has_edge(p[0], p[1])) {
            Some(p) => Err(SpError::NotAnEdge(p[0], p[1])),
            None => Ok(()),
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn endpoint(&self) -> usize {
        *self.0.last().expect("paths are never empty")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The path without its last vertex; `None` for the bare source.
    pub fn parent_prefix(&self) -> Option<Path> {
        (self.0.len() > 1).then(|| Path(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.0.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> WeightedDigraph {
        let mut b = GraphBuilder::new(3, vec![1, 2]).unwrap();
        b.add_edge(1, 3, vec![vec![1], vec![2, 3]]).unwrap();
        b.add_edge(1, 2, vec![vec![4], vec![1, 1]]).unwrap();
        b.add_edge(2, 3, vec![vec![1], vec![1, 5]]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn successors_are_sorted() {
        let g = tiny();
        assert_eq!(g.successors(1).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(g.out_degree(3), 0);
    }

    #[test]
    fn eval_sums_weights() {
        let g = tiny();
        let p = Path::new(vec![1, 2, 3]).unwrap();
        assert_eq!(g.eval_path(&p).unwrap().to_string(), "(5)/(2,6)");
        assert_eq!(g.eval_path(&Path::source()).unwrap().to_string(), "(0)/(0,0)");
        let bad = Path::new(vec![1, 3, 2]).unwrap();
        assert_eq!(g.eval_path(&bad), Err(SpError::NotAnEdge(3, 2)));
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::new(3, vec![1, 1]).unwrap();
        assert_eq!(
            b.add_edge(1, 4, vec![vec![1], vec![1]]).unwrap_err(),
            SpError::VertexOutOfRange { vertex: 4, n: 3 }
        );
        assert_eq!(
            b.add_edge(2, 2, vec![vec![1], vec![1]]).unwrap_err(),
            SpError::SelfLoop(2)
        );
        assert_eq!(
            b.add_edge(1, 2, vec![vec![0], vec![1]]).unwrap_err(),
            SpError::NonPositiveWeight(1, 2)
        );
        assert!(matches!(
            b.add_edge(1, 2, vec![vec![1, 1], vec![1]]),
            Err(SpError::WeightShape { .. })
        ));
        b.add_edge(1, 2, vec![vec![1], vec![1]]).unwrap();
        assert_eq!(
            b.add_edge(1, 2, vec![vec![1], vec![1]]).unwrap_err(),
            SpError::DuplicateEdge(1, 2)
        );
        assert_eq!(b.clone().build().unwrap_err(), SpError::Unreachable(3));
        b.add_edge(2, 3, vec![vec![1], vec![1]]).unwrap();
        assert!(b.build().is_ok());
    }

    #[test]
    fn path_basics() {
        let p = Path::new(vec![1, 2, 1, 3]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.endpoint(), 3);
        assert!(!p.is_simple());
        assert_eq!(p.parent_prefix().unwrap().to_string(), "(1,2,1)");
        assert!(Path::source().is_empty());
        assert!(Path::source().parent_prefix().is_none());
        assert!(Path::new(vec![2, 3]).is_err());
    }
}
