//! Connected-component labeling of binary masks: classic two-pass scan with
//! union-find equivalence merging, final labels renumbered 1..K in row-major
//! first-appearance order.

use std::str::FromStr;

use crate::error::Error;
use crate::grid::{BinaryMask, GeoRef};

/// Pixel adjacency: horizontal/vertical only, or including diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got '{other}'"
            ))),
        }
    }
}

/// Labeled image: 0 marks background, components are numbered 1..=count.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGrid {
    georef: GeoRef,
    labels: Vec<u32>,
    component_count: usize,
    component_sizes: Vec<usize>,
}

impl LabeledGrid {
    pub fn georef(&self) -> GeoRef {
        self.georef
    }

    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u32 {
        self.labels[self.georef.index(row, col)]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// Pixel counts indexed by label; `component_sizes()[label - 1]`.
    pub fn component_sizes(&self) -> &[usize] {
        &self.component_sizes
    }

    pub fn component_size(&self, label: u32) -> usize {
        self.component_sizes[label as usize - 1]
    }

    /// Row-major pixels of one component.
    pub fn pixels_of(&self, label: u32) -> Vec<(usize, usize)> {
        let ncols = self.georef.ncols;
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| (i / ncols, i % ncols))
            .collect()
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new() -> Self {
        // slot 0 is the background sentinel and never unified
        Self {
            parent: vec![0],
            rank: vec![0],
        }
    }

    fn push(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (low, high) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[low as usize] = high;
        if self.rank[low as usize] == self.rank[high as usize] {
            self.rank[high as usize] += 1;
        }
    }
}

/// Label the connected components of `mask`. Deterministic: identical input
/// yields identical labels.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> LabeledGrid {
    let georef = mask.georef();
    let (nrows, ncols) = (georef.nrows, georef.ncols);
    let mut provisional = vec![0u32; georef.len()];
    let mut uf = UnionFind::new();

    // first pass: provisional labels from already-visited neighbors
    for row in 0..nrows {
        for col in 0..ncols {
            if !mask.bit(row, col) {
                continue;
            }
            let idx = row * ncols + col;
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            let mut push_neighbor = |r: usize, c: usize, n: &mut usize| {
                let l = provisional[r * ncols + c];
                if l != 0 {
                    neighbors[*n] = l;
                    *n += 1;
                }
            };
            if col > 0 && mask.bit(row, col - 1) {
                push_neighbor(row, col - 1, &mut n);
            }
            if row > 0 {
                if mask.bit(row - 1, col) {
                    push_neighbor(row - 1, col, &mut n);
                }
                if connectivity == Connectivity::Eight {
                    if col > 0 && mask.bit(row - 1, col - 1) {
                        push_neighbor(row - 1, col - 1, &mut n);
                    }
                    if col + 1 < ncols && mask.bit(row - 1, col + 1) {
                        push_neighbor(row - 1, col + 1, &mut n);
                    }
                }
            }
            if n == 0 {
                provisional[idx] = uf.push();
            } else {
                let min = *neighbors[..n].iter().min().expect("n > 0");
                provisional[idx] = min;
                for &l in &neighbors[..n] {
                    uf.union(min, l);
                }
            }
        }
    }

    // second pass: renumber roots 1..K by first row-major appearance
    let mut final_of_root = vec![0u32; uf.parent.len()];
    let mut labels = vec![0u32; georef.len()];
    let mut component_sizes = Vec::new();
    let mut next = 1u32;
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = uf.find(p);
        let mut label = final_of_root[root as usize];
        if label == 0 {
            label = next;
            final_of_root[root as usize] = label;
            component_sizes.push(0);
            next += 1;
        }
        labels[i] = label;
        component_sizes[label as usize - 1] += 1;
    }

    LabeledGrid {
        georef,
        labels,
        component_count: (next - 1) as usize,
        component_sizes,
    }
}
