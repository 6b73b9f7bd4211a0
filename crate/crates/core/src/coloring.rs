//! Hypergraph coloring: the greedy scheme used for DoF evaluation and an
//! exact backtracking oracle for small instances.
//!
//! A coloring is proper when no hyperedge is monochromatic. Each color class
//! is then an independent set of MSs scheduled on its own resource, so the
//! number of colors is the number of orthogonal slots.

use thiserror::Error;

use crate::hypergraph::{members, Hypergraph, VertexSet};

/// Largest vertex count accepted by [`exact_chromatic`].
pub const EXACT_MAX_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("MS {} forms a singleton hyperedge: its requested file is held by no BS", .0 + 1)]
    SingletonEdge(usize),
    #[error("order is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("exact coloring supports at most {EXACT_MAX_VERTICES} vertices, got {0}")]
    TooLarge(usize),
}

/// Color of every vertex, colors numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: Vec<u32>,
    num_colors: u32,
}

impl Coloring {
    /// Wraps a raw color vector; `num_colors` is its maximum.
    pub fn from_colors(colors: Vec<u32>) -> Self {
        let num_colors = colors.iter().copied().max().unwrap_or(0);
        Self { colors, num_colors }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color_of(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn num_colors(&self) -> u32 {
        self.num_colors
    }

    /// Vertex mask of each color class, class `c` at index `c - 1`.
    pub fn class_masks(&self) -> Vec<VertexSet> {
        let mut masks = vec![0u64; self.num_colors as usize];
        for (v, &c) in self.colors.iter().enumerate() {
            if c >= 1 {
                masks[c as usize - 1] |= 1u64 << v;
            }
        }
        masks
    }

    /// Color classes as ascending lists of 1-based MS numbers.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        self.class_masks()
            .into_iter()
            .map(|m| members(m).map(|v| v + 1).collect())
            .collect()
    }
}

/// Vertex processing order for the greedy scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyOrder {
    /// MS1, MS2, ..., MSK.
    #[default]
    Index,
    /// Most edges first, ties by index.
    DegreeDescending,
}

impl GreedyOrder {
    pub fn permutation(self, h: &Hypergraph) -> Vec<usize> {
        let mut order: Vec<usize> = (0..h.num_vertices()).collect();
        if self == GreedyOrder::DegreeDescending {
            order.sort_by_key(|&v| std::cmp::Reverse(h.edges_containing(v).count()));
        }
        order
    }
}

/// How the chromatic number of a slot is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringMethod {
    Greedy(GreedyOrder),
    Exact,
}

impl Default for ColoringMethod {
    fn default() -> Self {
        ColoringMethod::Greedy(GreedyOrder::Index)
    }
}

impl ColoringMethod {
    pub fn color(self, h: &Hypergraph) -> Result<Coloring, ColoringError> {
        match self {
            ColoringMethod::Greedy(order) => greedy_color(h, &order.permutation(h)),
            ColoringMethod::Exact => exact_coloring(h),
        }
    }
}

fn check_no_singleton(h: &Hypergraph) -> Result<(), ColoringError> {
    match h.singleton_vertex() {
        Some(v) => Err(ColoringError::SingletonEdge(v)),
        None => Ok(()),
    }
}

/// Would giving `v` the color whose class is `class` complete a
/// monochromatic edge?
fn conflicts(h: &Hypergraph, v: usize, class: VertexSet) -> bool {
    let bit = 1u64 << v;
    h.edges_containing(v).any(|e| (e & !bit) & !class == 0)
}

/// Colors vertices in `order`, each with the smallest color that leaves no
/// edge monochromatic.
pub fn greedy_color(h: &Hypergraph, order: &[usize]) -> Result<Coloring, ColoringError> {
    let k = h.num_vertices();
    let mut seen = 0u64;
    for &v in order {
        if v >= k || seen & (1u64 << v) != 0 {
            return Err(ColoringError::NotAPermutation(k));
        }
        seen |= 1u64 << v;
    }
    if order.len() != k {
        return Err(ColoringError::NotAPermutation(k));
    }
    check_no_singleton(h)?;

    let mut colors = vec![0u32; k];
    let mut classes: Vec<VertexSet> = Vec::new();
    for &v in order {
        let c = (0..classes.len())
            .find(|&c| !conflicts(h, v, classes[c]))
            .unwrap_or_else(|| {
                classes.push(0);
                classes.len() - 1
            });
        classes[c] |= 1u64 << v;
        colors[v] = c as u32 + 1;
    }
    Ok(Coloring::from_colors(colors))
}

struct Search<'a> {
    h: &'a Hypergraph,
    colors: Vec<u32>,
    classes: Vec<VertexSet>,
    best: Vec<u32>,
    best_count: usize,
}

impl Search<'_> {
    fn run(&mut self, v: usize) {
        if self.classes.len() >= self.best_count {
            return;
        }
        if v == self.h.num_vertices() {
            self.best_count = self.classes.len();
            self.best.clone_from(&self.colors);
            return;
        }
        for c in 0..self.classes.len() {
            if !conflicts(self.h, v, self.classes[c]) {
                self.classes[c] |= 1u64 << v;
                self.colors[v] = c as u32 + 1;
                self.run(v + 1);
                self.classes[c] &= !(1u64 << v);
            }
        }
        // open a new color only if it can still beat the incumbent
        if self.classes.len() + 1 < self.best_count {
            self.classes.push(1u64 << v);
            self.colors[v] = self.classes.len() as u32;
            self.run(v + 1);
            self.classes.pop();
        }
        self.colors[v] = 0;
    }
}

/// A minimum proper coloring, by backtracking over vertices in index order.
pub fn exact_coloring(h: &Hypergraph) -> Result<Coloring, ColoringError> {
    let k = h.num_vertices();
    if k > EXACT_MAX_VERTICES {
        return Err(ColoringError::TooLarge(k));
    }
    check_no_singleton(h)?;
    let incumbent = greedy_color(h, &GreedyOrder::Index.permutation(h))?;
    let mut search = Search {
        h,
        colors: vec![0; k],
        classes: Vec::new(),
        best_count: incumbent.num_colors() as usize,
        best: incumbent.colors,
    };
    search.run(0);
    Ok(Coloring::from_colors(search.best))
}

/// The chromatic number.
pub fn exact_chromatic(h: &Hypergraph) -> Result<u32, ColoringError> {
    exact_coloring(h).map(|c| c.num_colors())
}

/// Proper, and using exactly the colors 1..=num_colors.
pub fn validate_coloring(h: &Hypergraph, coloring: &Coloring) -> bool {
    let k = h.num_vertices();
    if coloring.colors.len() != k {
        return false;
    }
    let n = coloring.num_colors;
    if coloring.colors.iter().any(|&c| c == 0 || c > n) {
        return false;
    }
    let classes = coloring.class_masks();
    if classes.contains(&0) {
        return false;
    }
    h.edges().iter().all(|&e| classes.iter().all(|&m| e & m != e))
}
