//! Feature matrices and vectors.
//!
//! A term tree of depth `n` and width `m` becomes an `n x m` grid of
//! triples `(term value, type value, parent index)`. Gallina nodes hold
//! `([g], -1, p)` with `[g]` a fixed negative token value; term:type
//! nodes hold `([t1], [t2], p)` with positive component values supplied
//! by a [`Valuation`]; grid positions without a node hold `(0, 0, 0)`.
//! `p` is the level index of the node's parent, -1 at the root.
//!
//! For clustering, matrices are padded to common dimensions and flattened
//! row-major into vectors of length `depth * width * 3`.

use thiserror::Error;

use crate::term_tree::{AtomContent, GallinaToken, NodeContent, TermTree, TypeContent};

/// Fixed token values: binder-introducing tokens sit next to each other
/// so related syntax stays close in feature space.
pub fn gallina_value(tok: GallinaToken) -> f64 {
    match tok {
        GallinaToken::Forall => -1.0,
        GallinaToken::Fun => -2.0,
        GallinaToken::Arrow => -3.0,
        GallinaToken::Let => -4.0,
        GallinaToken::Fix => -5.0,
        GallinaToken::Match => -6.0,
        GallinaToken::AtSign => -7.0,
    }
}

/// One grid entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub term: f64,
    pub ty: f64,
    pub parent: f64,
}

impl Cell {
    pub const ABSENT: Cell = Cell { term: 0.0, ty: 0.0, parent: 0.0 };

    pub fn is_absent(&self) -> bool {
        *self == Cell::ABSENT
    }
}

/// A depth x width grid of cells, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub depth: usize,
    pub width: usize,
    cells: Vec<Cell>,
}

impl FeatureMatrix {
    pub fn new(depth: usize, width: usize) -> Self {
        FeatureMatrix { depth, width, cells: vec![Cell::ABSENT; depth * width] }
    }

    pub fn cell(&self, depth: usize, index: usize) -> Cell {
        if depth < self.depth && index < self.width {
            self.cells[depth * self.width + index]
        } else {
            Cell::ABSENT
        }
    }

    pub fn set(&mut self, depth: usize, index: usize, cell: Cell) {
        assert!(depth < self.depth && index < self.width, "cell out of range");
        self.cells[depth * self.width + index] = cell;
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    /// `(depth, index)` positions of non-absent cells.
    pub fn nonzero_mask(&self) -> Vec<(usize, usize)> {
        let mut mask = Vec::new();
        for d in 0..self.depth {
            for j in 0..self.width {
                if !self.cell(d, j).is_absent() {
                    mask.push((d, j));
                }
            }
        }
        mask
    }

    /// Flatten into a vector of the given padded dimensions, row-major,
    /// triple components in `(term, type, parent)` order.
    pub fn flatten_padded(&self, depth: usize, width: usize) -> Vec<f64> {
        assert!(depth >= self.depth && width >= self.width, "padded dims too small");
        let mut out = Vec::with_capacity(depth * width * 3);
        for d in 0..depth {
            for j in 0..width {
                let c = self.cell(d, j);
                out.push(c.term);
                out.push(c.ty);
                out.push(c.parent);
            }
        }
        out
    }
}

/// Rebuild a padded matrix from a flattened vector.
pub fn unflatten(values: &[f64], depth: usize, width: usize) -> FeatureMatrix {
    assert_eq!(values.len(), depth * width * 3, "vector length does not match dims");
    let mut m = FeatureMatrix::new(depth, width);
    for d in 0..depth {
        for j in 0..width {
            let base = (d * width + j) * 3;
            m.set(d, j, Cell { term: values[base], ty: values[base + 1], parent: values[base + 2] });
        }
    }
    m
}

/// Supplies term and type component values for matrix construction.
/// Implementations must map term components into the positive rationals
/// and keep Gallina token values negative (the default table does).
pub trait Valuation {
    type Error;

    fn term_value(&self, atom: &AtomContent) -> Result<f64, Self::Error>;
    fn type_value(&self, ty: &TypeContent) -> Result<f64, Self::Error>;

    fn gallina_value(&self, tok: GallinaToken) -> f64 {
        gallina_value(tok)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("valuation undefined for label `{0}`")]
    ValuationMiss(String),
}

/// Build the feature matrix of a tree under a valuation.
pub fn build_feature_matrix<V: Valuation>(
    tree: &TermTree,
    valuation: &V,
) -> Result<FeatureMatrix, V::Error> {
    let (depth, width) = tree.dims();
    let mut matrix = FeatureMatrix::new(depth, width);
    for node in tree.nodes() {
        let parent = match node.parent {
            Some(pid) => tree.node(pid).level_index as f64,
            None => -1.0,
        };
        let cell = match &node.content {
            NodeContent::Gallina(tok) => {
                Cell { term: valuation.gallina_value(*tok), ty: -1.0, parent }
            }
            NodeContent::TermType { term, ty } => Cell {
                term: valuation.term_value(term)?,
                ty: valuation.type_value(ty)?,
                parent,
            },
        };
        matrix.set(node.depth, node.level_index, cell);
    }
    Ok(matrix)
}

/// Smallest dimensions that fit every matrix.
pub fn common_dims(matrices: &[FeatureMatrix]) -> (usize, usize) {
    let depth = matrices.iter().map(|m| m.depth).max().unwrap_or(0);
    let width = matrices.iter().map(|m| m.width).max().unwrap_or(0);
    (depth, width)
}

/// Pad all matrices to common dimensions and flatten each one.
pub fn pad_and_flatten(matrices: &[FeatureMatrix]) -> Vec<Vec<f64>> {
    let (depth, width) = common_dims(matrices);
    matrices.iter().map(|m| m.flatten_padded(depth, width)).collect()
}

/// Standardize each dimension to zero mean and unit variance across the
/// vectors. Constant dimensions become zero. Off by default everywhere:
/// clustering works on raw values; this is an opt-in preprocessing step.
pub fn standardize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(dims) = vectors.first().map(Vec::len) else { return Vec::new() };
    let n = vectors.len() as f64;
    let mut means = vec![0.0; dims];
    for v in vectors {
        for (m, x) in means.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; dims];
    for v in vectors {
        for ((s, x), m) in stds.iter_mut().zip(v).zip(&means) {
            *s += (x - m) * (x - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }
    vectors
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(i, x)| if stds[i] > 0.0 { (x - means[i]) / stds[i] } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Fraction of non-absent cells over the padded grids.
pub fn density(matrices: &[FeatureMatrix]) -> f64 {
    let (depth, width) = common_dims(matrices);
    let total = depth * width * matrices.len();
    if total == 0 {
        return 0.0;
    }
    let nonzero: usize = matrices.iter().map(|m| m.nonzero_mask().len()).sum();
    nonzero as f64 / total as f64
}
