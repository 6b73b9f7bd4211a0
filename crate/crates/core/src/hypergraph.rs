//! Request hypergraph: vertices are MSs, hyperedges are the minimal sets of
//! MSs that no equally sized group of BSs can jointly serve.
//!
//! Vertex subsets are `u64` bitmasks (bit k is MS k, 0-based), which caps
//! the number of MSs at 64. BS subsets use the same encoding.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::model::{Availability, FileId, Instance, RequestProfile};
use crate::scalar::DofInt;

/// Bitmask over MS (or BS) indices.
pub type VertexSet = u64;

pub const MAX_VERTICES: usize = 64;
pub const MAX_BS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("{0} MSs exceed the supported maximum of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("{0} BSs exceed the supported maximum of {MAX_BS}")]
    TooManyBs(usize),
    #[error("edge {0:#x} references a vertex outside 0..{1}")]
    VertexOutOfRange(VertexSet, usize),
    #[error("edge set is not an antichain")]
    NotAntichain,
    #[error("empty edge")]
    EmptyEdge,
}

/// Iterates the indices of the set bits of `set`, ascending.
pub fn members(set: VertexSet) -> impl Iterator<Item = usize> {
    let mut rest = set;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

pub fn set_of<I: IntoIterator<Item = usize>>(indices: I) -> VertexSet {
    indices.into_iter().fold(0, |acc, i| acc | (1u64 << i))
}

pub(crate) fn full_set(n: usize) -> VertexSet {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Sort key: cardinality, then the ascending member list lexicographically.
pub(crate) fn canonical_key(set: VertexSet) -> (u32, Vec<usize>) {
    (set.count_ones(), members(set).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    num_vertices: usize,
    edges: Vec<VertexSet>,
}

impl Hypergraph {
    /// Builds a hypergraph from an explicit minimal edge set.
    pub fn new(num_vertices: usize, mut edges: Vec<VertexSet>) -> Result<Self, HypergraphError> {
        if num_vertices > MAX_VERTICES {
            return Err(HypergraphError::TooManyVertices(num_vertices));
        }
        let universe = full_set(num_vertices);
        for &e in &edges {
            if e == 0 {
                return Err(HypergraphError::EmptyEdge);
            }
            if e & !universe != 0 {
                return Err(HypergraphError::VertexOutOfRange(e, num_vertices));
            }
        }
        edges.sort_by_cached_key(|&e| canonical_key(e));
        edges.dedup();
        for (i, &a) in edges.iter().enumerate() {
            if edges.iter().enumerate().any(|(j, &b)| i != j && a & b == a) {
                return Err(HypergraphError::NotAntichain);
            }
        }
        Ok(Self { num_vertices, edges })
    }

    pub fn edgeless(num_vertices: usize) -> Self {
        Self { num_vertices, edges: Vec::new() }
    }

    /// Builds the hypergraph from `holders[k]`, the mask of BSs able to
    /// transmit MS k's file.
    ///
    /// Level-wise search: a k-subset is examined only when all its
    /// (k-1)-subsets are independent, so any failing candidate is minimal and
    /// supersets of edges are never generated.
    pub fn from_holder_masks(holders: &[VertexSet]) -> Result<Self, HypergraphError> {
        let k = holders.len();
        if k > MAX_VERTICES {
            return Err(HypergraphError::TooManyVertices(k));
        }
        let mut edges = Vec::new();
        let mut level: Vec<(VertexSet, VertexSet)> = Vec::new();
        for (v, &serving) in holders.iter().enumerate() {
            if serving == 0 {
                edges.push(1u64 << v);
            } else {
                level.push((1u64 << v, serving));
            }
        }
        let mut size = 1u32;
        while !level.is_empty() {
            size += 1;
            let independent: HashSet<VertexSet> = level.iter().map(|&(s, _)| s).collect();
            let mut next = Vec::new();
            for &(set, serving) in &level {
                let top = 63 - set.leading_zeros() as usize;
                for (v, &held) in holders.iter().enumerate().skip(top + 1) {
                    let cand = set | (1u64 << v);
                    if !members(set).all(|u| independent.contains(&(cand & !(1u64 << u)))) {
                        continue;
                    }
                    let joint = serving & held;
                    if joint.count_ones() >= size {
                        next.push((cand, joint));
                    } else {
                        edges.push(cand);
                    }
                }
            }
            level = next;
        }
        edges.sort_by_cached_key(|&e| canonical_key(e));
        Ok(Self { num_vertices: k, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Minimal edges ordered by size, then lexicographically.
    pub fn edges(&self) -> &[VertexSet] {
        &self.edges
    }

    pub fn edges_containing(&self, v: usize) -> impl Iterator<Item = VertexSet> + '_ {
        let bit = 1u64 << v;
        self.edges.iter().copied().filter(move |e| e & bit != 0)
    }

    /// First vertex forming an edge on its own, i.e. an MS nobody can serve.
    pub fn singleton_vertex(&self) -> Option<usize> {
        self.edges
            .iter()
            .find(|e| e.count_ones() == 1)
            .map(|e| e.trailing_zeros() as usize)
    }

    /// True iff no edge lies inside `set`.
    pub fn is_independent(&self, set: VertexSet) -> bool {
        self.edges.iter().all(|&e| e & set != e)
    }

    /// Edges as ascending lists of 1-based MS numbers.
    pub fn edge_lists(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|&e| members(e).map(|v| v + 1).collect()).collect()
    }

    /// Vertex relabeling: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|&e| members(e).fold(0u64, |acc, v| acc | (1u64 << perm[v])))
            .collect();
        Self::new(self.num_vertices, edges).expect("relabeling preserves an antichain")
    }
}

/// Distinct files requested by the MSs in `subset`.
pub fn requested_files(subset: VertexSet, requests: &RequestProfile) -> BTreeSet<FileId> {
    members(subset).map(|k| requests.file_of(k)).collect()
}

/// BSs holding every file in `files` (0-based indices).
pub fn serving_set(files: &BTreeSet<FileId>, availability: &Availability) -> BTreeSet<usize> {
    (0..availability.num_bs())
        .filter(|&m| files.is_subset(availability.files(m)))
        .collect()
}

/// Whether some |subset| BSs each hold every file requested in `subset`.
pub fn is_independent<T: DofInt>(subset: VertexSet, instance: &Instance<T>) -> bool {
    let files = requested_files(subset, &instance.requests);
    serving_set(&files, &instance.availability).len() >= subset.count_ones() as usize
}

/// Per-MS masks of BSs holding the requested file.
pub fn holder_masks(
    availability: &Availability,
    requests: &RequestProfile,
) -> Result<Vec<VertexSet>, HypergraphError> {
    if availability.num_bs() > MAX_BS {
        return Err(HypergraphError::TooManyBs(availability.num_bs()));
    }
    if requests.num_ms() > MAX_VERTICES {
        return Err(HypergraphError::TooManyVertices(requests.num_ms()));
    }
    Ok(requests.as_slice().iter().map(|&f| availability.holder_mask(f)).collect())
}

pub fn build_hypergraph(
    availability: &Availability,
    requests: &RequestProfile,
) -> Result<Hypergraph, HypergraphError> {
    Hypergraph::from_holder_masks(&holder_masks(availability, requests)?)
}

/// The minimal hyperedges of an instance. Singleton edges (an MS whose file
/// no BS holds) are recorded, not rejected.
pub fn minimal_hyperedges<T: DofInt>(instance: &Instance<T>) -> Result<Hypergraph, HypergraphError> {
    build_hypergraph(&instance.availability, &instance.requests)
}
