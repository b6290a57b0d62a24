//! Recurrent clustering: feature values from iterated clustering.
//!
//! Matrix cells need numeric values for term and type components. Fixed
//! rules cover the base cases — sorts get values just above 100, the
//! i-th distinct variable of an object gets the value `i`, recursive
//! calls get a designated constant — while references to earlier library
//! objects are valued from a clustering of everything before them:
//! an object in cluster `j` with proximity `p` is worth `200 + 2*j + p`,
//! so members of one cluster sit within a unit of each other and
//! different clusters are at least two apart. Compound local components
//! (binder types like `even n`) are classified against the same prior
//! model as if they were objects.
//!
//! Processing the library in order and reclustering the prefix before
//! each object makes the valuation of object `n` depend only on objects
//! `1..n`, so appending to a library never changes earlier vectors.
//!
//! Value bands, kept pairwise disjoint so component kinds stay
//! separable: variables in `1..=90`, sorts in `(100, 100.2)`, recursive
//! calls at exactly `150`, object references in `[200, 200 + 2k + 1]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    build_feature_matrix, common_dims, unflatten, FeatureMatrix, Valuation,
};
use crate::kmeans::{choose_k, dist_padded, kmeans, ClusterModel, KmeansError};
use crate::term_model::{TypeAnn, TypedBinder, TypedLibrary, TypedTerm};
use crate::term_tree::{build_term_tree, AtomContent, TypeContent};

/// Value of a recursive occurrence of the object under definition:
/// between the sort band and the cluster band.
pub const RECURSIVE_CALL_VALUE: f64 = 150.0;

/// Largest variable index; later variables are clamped here so variable
/// values never reach the sort band.
pub const VARIABLE_INDEX_CAP: usize = 90;

#[derive(Debug, Error, PartialEq)]
pub enum ValueError {
    #[error("proximity {0} outside [0, 1]")]
    ProximityRange(f64),
    #[error("cannot classify against an empty model")]
    EmptyModel,
    #[error("cannot value component: {0}")]
    UnknownComponent(String),
}

#[derive(Debug, Error)]
pub enum RecurrentError {
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error(transparent)]
    Kmeans(#[from] KmeansError),
}

/// Value of the `ordinal`-th sort, 1-based over `{Set, Prop, Type(0), ...}`:
/// `100 + sum_{j=1..i} 1/(10 * 2^(j-1))`, in closed form
/// `100 + 0.2 * (1 - 2^-i)`. Strictly increasing within `(100, 100.2)`.
pub fn sort_value(ordinal: u32) -> f64 {
    debug_assert!(ordinal >= 1, "sort ordinals are 1-based");
    100.0 + 0.2 * (1.0 - 0.5f64.powi(ordinal as i32))
}

/// Value of a reference to an object sitting in cluster `cluster_id`
/// with the given proximity: `200 + 2 * cluster_id + proximity`.
pub fn object_value(cluster_id: usize, proximity: f64) -> Result<f64, ValueError> {
    if !(0.0..=1.0).contains(&proximity) {
        return Err(ValueError::ProximityRange(proximity));
    }
    Ok(200.0 + 2.0 * cluster_id as f64 + proximity)
}

/// First-occurrence indexing of the distinct variables of a term,
/// starting at 1. The walk covers binders, variable occurrences and the
/// variables appearing inside type annotations, in reading order.
pub fn variable_indices(term: &TypedTerm) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    collect_vars(term, &mut map);
    map
}

fn add_var(name: &str, map: &mut HashMap<String, usize>) {
    if !map.contains_key(name) {
        let next = map.len() + 1;
        map.insert(name.to_string(), next);
    }
}

fn collect_ann(ann: &TypeAnn, map: &mut HashMap<String, usize>) {
    if let TypeAnn::Frag(t) = ann {
        collect_vars(t, map);
    }
}

fn collect_binders(binders: &[TypedBinder], map: &mut HashMap<String, usize>) {
    for b in binders {
        add_var(&b.var, map);
        collect_ann(&b.ty, map);
    }
}

fn collect_vars(term: &TypedTerm, map: &mut HashMap<String, usize>) {
    match term {
        TypedTerm::Sort { .. } => {}
        TypedTerm::Name { ty, .. } => collect_ann(ty, map),
        TypedTerm::Var { name, ty } => {
            add_var(name, map);
            collect_ann(ty, map);
        }
        TypedTerm::Forall { binders, body } | TypedTerm::Fun { binders, body } => {
            collect_binders(binders, map);
            collect_vars(body, map);
        }
        TypedTerm::Arrow { from, to } => {
            collect_vars(from, map);
            collect_vars(to, map);
        }
        TypedTerm::App { head, args } => {
            collect_vars(head, map);
            for a in args {
                collect_vars(a, map);
            }
        }
        TypedTerm::Let { binder, value, body } => {
            add_var(&binder.var, map);
            collect_ann(&binder.ty, map);
            collect_vars(value, map);
            collect_vars(body, map);
        }
        TypedTerm::Fix { ty, binders, body, .. } => {
            collect_ann(ty, map);
            collect_binders(binders, map);
            collect_vars(body, map);
        }
        TypedTerm::Match { scrutinees, branches } => {
            for s in scrutinees {
                collect_vars(s, map);
            }
            for (p, r) in branches {
                collect_vars(p, map);
                collect_vars(r, map);
            }
        }
    }
}

/// Everything needed to value the components of one object's tree.
pub struct ValuationContext<'a> {
    /// 0-based index of the object being valued.
    pub object_index: usize,
    var_indices: HashMap<String, usize>,
    prior: Option<&'a ClusterModel>,
    /// Grid dimensions the prior model's vectors were padded to.
    prior_dims: (usize, usize),
}

impl<'a> ValuationContext<'a> {
    pub fn for_object(
        lib: &TypedLibrary,
        index: usize,
        prior: Option<&'a ClusterModel>,
        prior_dims: (usize, usize),
    ) -> Self {
        ValuationContext {
            object_index: index,
            var_indices: variable_indices(lib.objects[index].mined()),
            prior,
            prior_dims,
        }
    }

    /// 1-based index of a distinct variable, clamped to the band cap.
    pub fn variable_value(&self, name: &str) -> Option<f64> {
        let i = *self.var_indices.get(name)?;
        if i > VARIABLE_INDEX_CAP {
            log::warn!(
                "variable index {i} of `{name}` exceeds {VARIABLE_INDEX_CAP}, clamping; \
                 variable values may collide"
            );
            return Some(VARIABLE_INDEX_CAP as f64);
        }
        Some(i as f64)
    }

    fn object_ref_value(&self, name: &str, index: usize) -> Result<f64, ValueError> {
        let model = self.prior.ok_or_else(|| {
            ValueError::UnknownComponent(format!(
                "`{name}` referenced before any prior model exists"
            ))
        })?;
        if index >= model.assignment.len() {
            return Err(ValueError::UnknownComponent(format!(
                "`{name}` (object {index}) is not covered by the prior model"
            )));
        }
        object_value(model.assignment[index], model.proximities[index])
    }

    fn atom_value(&self, atom: &AtomContent) -> Result<f64, ValueError> {
        match atom {
            AtomContent::Sort(o) => Ok(sort_value(*o)),
            AtomContent::Name { recursive: true, .. } => Ok(RECURSIVE_CALL_VALUE),
            AtomContent::Name { name, index, .. } => self.object_ref_value(name, *index),
            AtomContent::Var(name) => self.variable_value(name).ok_or_else(|| {
                ValueError::UnknownComponent(format!("variable `{name}` has no index"))
            }),
        }
    }

    fn fragment_value(&self, fragment: &TypedTerm) -> Result<f64, ValueError> {
        match fragment {
            TypedTerm::Sort { ordinal } => Ok(sort_value(*ordinal)),
            TypedTerm::Name { recursive: true, .. } => Ok(RECURSIVE_CALL_VALUE),
            TypedTerm::Name { name, index, .. } => self.object_ref_value(name, *index),
            TypedTerm::Var { name, .. } => self.variable_value(name).ok_or_else(|| {
                ValueError::UnknownComponent(format!("variable `{name}` has no index"))
            }),
            compound => {
                if self.prior.is_some() {
                    let (cluster, proximity) = classify_local(compound, self)?;
                    object_value(cluster, proximity)
                } else {
                    // before any model exists, fall back to the first atom
                    let head = first_atom(compound).ok_or_else(|| {
                        ValueError::UnknownComponent("fragment without atoms".to_string())
                    })?;
                    self.fragment_value(head)
                }
            }
        }
    }
}

/// Leftmost atomic leaf of a fragment (binder types first, then bodies).
fn first_atom(term: &TypedTerm) -> Option<&TypedTerm> {
    match term {
        TypedTerm::Sort { .. } | TypedTerm::Name { .. } | TypedTerm::Var { .. } => Some(term),
        TypedTerm::Forall { binders, body } | TypedTerm::Fun { binders, body } => binders
            .first()
            .and_then(|b| match &b.ty {
                TypeAnn::Frag(t) => first_atom(t),
                TypeAnn::SelfRef => None,
            })
            .or_else(|| first_atom(body)),
        TypedTerm::Arrow { from, to } => first_atom(from).or_else(|| first_atom(to)),
        TypedTerm::App { head, args } => {
            first_atom(head).or_else(|| args.iter().find_map(first_atom))
        }
        TypedTerm::Let { value, body, .. } => first_atom(value).or_else(|| first_atom(body)),
        TypedTerm::Fix { body, .. } => first_atom(body),
        TypedTerm::Match { scrutinees, branches } => scrutinees
            .iter()
            .find_map(first_atom)
            .or_else(|| branches.iter().find_map(|(p, r)| first_atom(p).or_else(|| first_atom(r)))),
    }
}

impl Valuation for ValuationContext<'_> {
    type Error = ValueError;

    fn term_value(&self, atom: &AtomContent) -> Result<f64, ValueError> {
        self.atom_value(atom)
    }

    fn type_value(&self, ty: &TypeContent) -> Result<f64, ValueError> {
        match ty {
            TypeContent::Sort(o) => Ok(sort_value(*o)),
            TypeContent::SelfRef => Ok(RECURSIVE_CALL_VALUE),
            TypeContent::Frag(t) => self.fragment_value(t),
        }
    }
}

/// Classify a compound fragment against the prior model: build its tree
/// and matrix with the same valuation, lay it out on the model's grid and
/// return the nearest centroid (ties to the lower id) with the proximity
/// of the fragment to that centroid.
pub fn classify_local(
    fragment: &TypedTerm,
    ctx: &ValuationContext<'_>,
) -> Result<(usize, f64), ValueError> {
    let model = ctx.prior.ok_or(ValueError::EmptyModel)?;
    if model.is_empty() {
        return Err(ValueError::EmptyModel);
    }
    let tree = build_term_tree(fragment);
    let matrix = build_feature_matrix(&tree, ctx)?;

    let (pd, pw) = ctx.prior_dims;
    let depth = matrix.depth.max(pd);
    let width = matrix.width.max(pw);
    let v = matrix.flatten_padded(depth, width);

    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (j, c) in model.centroids.iter().enumerate() {
        // re-lay the centroid on the union grid when the fragment outgrows
        // the model's grid; flat zero-padding would misalign rows
        let d = if (depth, width) == (pd, pw) {
            dist_padded(&v, c)
        } else {
            let re = unflatten(c, pd, pw).flatten_padded(depth, width);
            dist_padded(&v, &re)
        };
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    let p = (1.0 - best_d / (1.0 + model.radii[best])).clamp(0.0, 1.0);
    Ok((best, p))
}

/// Result of a recurrent clustering run.
#[derive(Debug, Clone)]
pub struct RecurrentOutput {
    /// Final model over all objects.
    pub model: ClusterModel,
    /// Unpadded per-object matrices; these depend only on the library
    /// prefix up to each object.
    pub matrices: Vec<FeatureMatrix>,
    /// Per-object vectors padded to the library-wide grid.
    pub vectors: Vec<Vec<f64>>,
    /// The library-wide grid dimensions.
    pub dims: (usize, usize),
}

/// Iterate over the library in order: value object `n` with a k-means
/// model of objects `1..n-1` as the prior, then cluster everything.
pub fn recurrent_cluster(
    lib: &TypedLibrary,
    g: u8,
    seed: u64,
) -> Result<RecurrentOutput, RecurrentError> {
    choose_k(1, g)?; // validate granularity up front
    let mut matrices: Vec<FeatureMatrix> = Vec::with_capacity(lib.len());
    for n in 0..lib.len() {
        let prior_dims = common_dims(&matrices);
        let prior = if n == 0 {
            None
        } else {
            let vectors: Vec<Vec<f64>> = matrices
                .iter()
                .map(|m| m.flatten_padded(prior_dims.0, prior_dims.1))
                .collect();
            Some(kmeans(&vectors, choose_k(n, g)?, seed)?)
        };
        let ctx = ValuationContext::for_object(lib, n, prior.as_ref(), prior_dims);
        let tree = build_term_tree(lib.objects[n].mined());
        matrices.push(build_feature_matrix(&tree, &ctx)?);
    }

    let dims = common_dims(&matrices);
    let vectors: Vec<Vec<f64>> =
        matrices.iter().map(|m| m.flatten_padded(dims.0, dims.1)).collect();
    let model = if vectors.is_empty() {
        kmeans(&[], 0, seed)?
    } else {
        kmeans(&vectors, choose_k(vectors.len(), g)?, seed)?
    };
    Ok(RecurrentOutput { model, matrices, vectors, dims })
}

/// One clustered object in a dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub proximity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub id: usize,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub depth: usize,
    pub width: usize,
}

/// Serializable cluster report: object names grouped by cluster with
/// their proximities, in library order within each cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub k: usize,
    pub granularity: u8,
    pub seed: u64,
    pub dims: GridDims,
    pub clusters: Vec<ClusterEntry>,
}

impl ModelDump {
    pub fn cluster_of(&self, name: &str) -> Option<usize> {
        self.clusters
            .iter()
            .find(|c| c.members.iter().any(|m| m.name == name))
            .map(|c| c.id)
    }

    pub fn members(&self, cluster: usize) -> Option<&[Member]> {
        self.clusters.iter().find(|c| c.id == cluster).map(|c| c.members.as_slice())
    }
}

/// Build the named dump of a run.
pub fn model_dump(out: &RecurrentOutput, lib: &TypedLibrary, g: u8, seed: u64) -> ModelDump {
    dump_model(&out.model, out.dims, lib, g, seed)
}

/// Named dump of any model over the library's objects (used when the
/// final clustering ran on transformed vectors).
pub fn dump_model(
    model: &ClusterModel,
    dims: (usize, usize),
    lib: &TypedLibrary,
    g: u8,
    seed: u64,
) -> ModelDump {
    let mut clusters: Vec<ClusterEntry> =
        (0..model.k).map(|id| ClusterEntry { id, members: Vec::new() }).collect();
    for (i, &c) in model.assignment.iter().enumerate() {
        clusters[c].members.push(Member {
            name: lib.objects[i].name.clone(),
            proximity: model.proximities[i],
        });
    }
    ModelDump {
        k: model.k,
        granularity: g,
        seed,
        dims: GridDims { depth: dims.0, width: dims.1 },
        clusters,
    }
}

/// The disjoint bands the valuation maps into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueBand {
    /// Absent cell component.
    Zero,
    /// Gallina token (negative).
    Gallina,
    /// Variable index, `1..=90`.
    Variable,
    /// Sort, `(100, 100.2)`.
    Sort,
    /// Recursive call, exactly 150.
    Recursive,
    /// Object or classified fragment, `[200, ...)`.
    ObjectRef,
}

/// Classify an emitted component value into its band, if any.
pub fn value_band(v: f64) -> Option<ValueBand> {
    if v == 0.0 {
        Some(ValueBand::Zero)
    } else if v < 0.0 {
        Some(ValueBand::Gallina)
    } else if (1.0..=VARIABLE_INDEX_CAP as f64).contains(&v) && v.fract() == 0.0 {
        Some(ValueBand::Variable)
    } else if v > 100.0 && v < 100.2 {
        Some(ValueBand::Sort)
    } else if v == RECURSIVE_CALL_VALUE {
        Some(ValueBand::Recursive)
    } else if v >= 200.0 {
        Some(ValueBand::ObjectRef)
    } else {
        None
    }
}
