//! Term trees.
//!
//! A typed term unfolds into a tree with two node kinds: Gallina nodes,
//! labelled by one of the fixed syntax tokens, and term:type nodes,
//! pairing an atomic term component (sort, name or variable) with its
//! type. Nodes are addressed by depth (root = 0) and by level index, the
//! 0-based position within the left-to-right sequence of nodes at that
//! depth.
//!
//! Construction rules, per head constructor of the typed term:
//! - sorts, names, variables: a single term:type node;
//! - `forall`/`fun`: a Gallina root with one term:type child per binder,
//!   then the body subtree;
//! - `->`: a Gallina root with the domain and codomain subtrees;
//! - `let`: a Gallina root with the bound variable, value and body;
//! - application with a name head: a term:type root labelled by the head,
//!   with one child per argument;
//! - application with any other head: an `@` Gallina root with the head
//!   and the arguments as children;
//! - `fix`: a Gallina root with the fix name node, binder nodes, body;
//! - `match`: a Gallina root with the scrutinee subtrees followed by one
//!   arrow-labelled Gallina node per branch holding pattern and rhs.

use std::fmt;

use crate::term_model::{sort_name, sort_of_sort, TypeAnn, TypedBinder, TypedTerm};

/// The closed set of Gallina syntax tokens that can label a tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GallinaToken {
    Forall,
    Fun,
    Arrow,
    Let,
    Fix,
    Match,
    /// Application head that is not a name.
    AtSign,
}

impl GallinaToken {
    pub const ALL: [GallinaToken; 7] = [
        GallinaToken::Forall,
        GallinaToken::Fun,
        GallinaToken::Arrow,
        GallinaToken::Let,
        GallinaToken::Fix,
        GallinaToken::Match,
        GallinaToken::AtSign,
    ];

    pub fn text(self) -> &'static str {
        match self {
            GallinaToken::Forall => "forall",
            GallinaToken::Fun => "fun",
            GallinaToken::Arrow => "->",
            GallinaToken::Let => "let",
            GallinaToken::Fix => "fix",
            GallinaToken::Match => "match",
            GallinaToken::AtSign => "@",
        }
    }
}

/// Term component of a term:type node.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomContent {
    Sort(u32),
    Name { name: String, index: usize, recursive: bool },
    Var(String),
}

impl fmt::Display for AtomContent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomContent::Sort(o) => write!(f, "{}", sort_name(*o)),
            AtomContent::Name { name, .. } => write!(f, "{name}"),
            AtomContent::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Type component of a term:type node.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeContent {
    /// The classifying sort of a sort atom.
    Sort(u32),
    /// The type is the object under definition.
    SelfRef,
    /// An annotated type fragment.
    Frag(TypedTerm),
}

impl fmt::Display for TypeContent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeContent::Sort(o) => write!(f, "{}", sort_name(*o)),
            TypeContent::SelfRef => write!(f, "<self>"),
            TypeContent::Frag(t) => write!(f, "{}", t.erase()),
        }
    }
}

fn type_content(ann: &TypeAnn) -> TypeContent {
    match ann {
        TypeAnn::SelfRef => TypeContent::SelfRef,
        TypeAnn::Frag(t) => TypeContent::Frag(t.as_ref().clone()),
    }
}

/// Node payload: Gallina token or term:type pair.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeContent {
    Gallina(GallinaToken),
    TermType { term: AtomContent, ty: TypeContent },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub content: NodeContent,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    pub level_index: usize,
}

/// A term tree with depth/level-index addressing.
#[derive(Debug, Clone, PartialEq)]
pub struct TermTree {
    nodes: Vec<TreeNode>,
    root: usize,
    levels: Vec<Vec<usize>>,
}

impl TermTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter()
    }

    /// Node ids level by level, left to right.
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// `(depth, width)`: number of levels and largest level size.
    pub fn dims(&self) -> (usize, usize) {
        tree_dims(self)
    }

    /// The unique node at `(depth, level_index)`, if any.
    pub fn node_at(&self, depth: usize, level_index: usize) -> Option<&TreeNode> {
        let level = self.levels.get(depth)?;
        level.get(level_index).map(|&id| &self.nodes[id])
    }

    /// One line per node: `d=<depth> j=<index> p=<parent index> <label>`,
    /// in level order. The parent index is the parent's level index, -1
    /// for the root.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for level in &self.levels {
            for &id in level {
                let node = &self.nodes[id];
                let p = match node.parent {
                    Some(pid) => self.nodes[pid].level_index as i64,
                    None => -1,
                };
                let label = match &node.content {
                    NodeContent::Gallina(tok) => tok.text().to_string(),
                    NodeContent::TermType { term, ty } => format!("{term} : {ty}"),
                };
                out.push_str(&format!("d={} j={} p={} {}\n", node.depth, node.level_index, p, label));
            }
        }
        out
    }
}

/// `(depth, width)` of a tree: depth counts levels, width is the largest
/// level size.
pub fn tree_dims(tree: &TermTree) -> (usize, usize) {
    let depth = tree.levels.len();
    let width = tree.levels.iter().map(Vec::len).max().unwrap_or(0);
    (depth, width)
}

struct Builder {
    nodes: Vec<TreeNode>,
}

impl Builder {
    fn push(&mut self, content: NodeContent) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { content, parent: None, children: Vec::new(), depth: 0, level_index: 0 });
        id
    }

    fn attach(&mut self, parent: usize, child: usize) {
        self.nodes[child].parent = Some(parent);
        self.nodes[parent].children.push(child);
    }

    fn leaf_for_binder(&mut self, b: &TypedBinder) -> usize {
        self.push(NodeContent::TermType {
            term: AtomContent::Var(b.var.clone()),
            ty: type_content(&b.ty),
        })
    }

    fn build(&mut self, t: &TypedTerm) -> usize {
        match t {
            TypedTerm::Sort { ordinal } => self.push(NodeContent::TermType {
                term: AtomContent::Sort(*ordinal),
                ty: TypeContent::Sort(sort_of_sort(*ordinal)),
            }),
            TypedTerm::Name { name, index, ty, recursive } => self.push(NodeContent::TermType {
                term: AtomContent::Name { name: name.clone(), index: *index, recursive: *recursive },
                ty: type_content(ty),
            }),
            TypedTerm::Var { name, ty } => self.push(NodeContent::TermType {
                term: AtomContent::Var(name.clone()),
                ty: type_content(ty),
            }),
            TypedTerm::Forall { binders, body } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Forall));
                for b in binders {
                    let leaf = self.leaf_for_binder(b);
                    self.attach(root, leaf);
                }
                let body = self.build(body);
                self.attach(root, body);
                root
            }
            TypedTerm::Fun { binders, body } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Fun));
                for b in binders {
                    let leaf = self.leaf_for_binder(b);
                    self.attach(root, leaf);
                }
                let body = self.build(body);
                self.attach(root, body);
                root
            }
            TypedTerm::Arrow { from, to } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Arrow));
                let from = self.build(from);
                self.attach(root, from);
                let to = self.build(to);
                self.attach(root, to);
                root
            }
            TypedTerm::App { head, args } => match head.as_ref() {
                TypedTerm::Name { name, index, ty, recursive } => {
                    let root = self.push(NodeContent::TermType {
                        term: AtomContent::Name {
                            name: name.clone(),
                            index: *index,
                            recursive: *recursive,
                        },
                        ty: type_content(ty),
                    });
                    for a in args {
                        let child = self.build(a);
                        self.attach(root, child);
                    }
                    root
                }
                _ => {
                    let root = self.push(NodeContent::Gallina(GallinaToken::AtSign));
                    let h = self.build(head);
                    self.attach(root, h);
                    for a in args {
                        let child = self.build(a);
                        self.attach(root, child);
                    }
                    root
                }
            },
            TypedTerm::Let { binder, value, body } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Let));
                let var = self.leaf_for_binder(binder);
                self.attach(root, var);
                let value = self.build(value);
                self.attach(root, value);
                let body = self.build(body);
                self.attach(root, body);
                root
            }
            TypedTerm::Fix { name, index, ty, binders, body } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Fix));
                let name_leaf = self.push(NodeContent::TermType {
                    term: AtomContent::Name { name: name.clone(), index: *index, recursive: true },
                    ty: type_content(ty),
                });
                self.attach(root, name_leaf);
                for b in binders {
                    let leaf = self.leaf_for_binder(b);
                    self.attach(root, leaf);
                }
                let body = self.build(body);
                self.attach(root, body);
                root
            }
            TypedTerm::Match { scrutinees, branches } => {
                let root = self.push(NodeContent::Gallina(GallinaToken::Match));
                for s in scrutinees {
                    let child = self.build(s);
                    self.attach(root, child);
                }
                for (pattern, rhs) in branches {
                    let arm = self.push(NodeContent::Gallina(GallinaToken::Arrow));
                    self.attach(root, arm);
                    let p = self.build(pattern);
                    self.attach(arm, p);
                    let r = self.build(rhs);
                    self.attach(arm, r);
                }
                root
            }
        }
    }
}

/// Build the term tree of a typed term. Total: every typed term has a
/// tree.
pub fn build_term_tree(t: &TypedTerm) -> TermTree {
    let mut builder = Builder { nodes: Vec::new() };
    let root = builder.build(t);
    let mut nodes = builder.nodes;

    // breadth-first pass assigns depths and level indices
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut frontier = vec![root];
    let mut depth = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (j, &id) in frontier.iter().enumerate() {
            nodes[id].depth = depth;
            nodes[id].level_index = j;
            next.extend(nodes[id].children.iter().copied());
        }
        levels.push(frontier);
        frontier = next;
        depth += 1;
    }

    TermTree { nodes, root, levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_model::{parse_library, resolve_types, TypedLibrary};

    fn fig1_typed() -> TypedLibrary {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "+", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                                  "to": {"tag": "name", "name": "nat"}}}},
            {"name": "even", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "sort", "sort": "Prop"}}},
            {"name": "odd", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "sort", "sort": "Prop"}}},
            {"name": "odd_after_even", "kind": "lemma",
             "statement": {"tag": "forall",
                "binders": [
                    {"var": "n", "type": {"tag": "name", "name": "nat"}},
                    {"var": "H", "type": {"tag": "app", "head": {"tag": "name", "name": "even"},
                                          "args": [{"tag": "var", "name": "n"}]}}],
                "body": {"tag": "app", "head": {"tag": "name", "name": "odd"},
                         "args": [{"tag": "app", "head": {"tag": "name", "name": "+"},
                                   "args": [{"tag": "var", "name": "n"},
                                            {"tag": "name", "name": "1"}]}]}}}
        ]}"#,
        )
        .unwrap();
        resolve_types(&lib).unwrap()
    }

    fn fig1_tree() -> TermTree {
        let typed = fig1_typed();
        let lemma = &typed.objects[typed.index_of("odd_after_even").unwrap()];
        build_term_tree(lemma.mined())
    }

    #[test]
    fn fig1_lemma_tree_shape() {
        let tree = fig1_tree();
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.dims(), (4, 3));

        let root = tree.node_at(0, 0).unwrap();
        assert_eq!(root.content, NodeContent::Gallina(GallinaToken::Forall));
        assert_eq!(root.children.len(), 3);

        // level 1: n : nat, H : even n, odd : nat -> Prop
        let labels: Vec<String> = (0..3)
            .map(|j| {
                let n = tree.node_at(1, j).unwrap();
                match &n.content {
                    NodeContent::TermType { term, ty } => format!("{term} : {ty}"),
                    other => panic!("unexpected {other:?}"),
                }
            })
            .collect();
        assert_eq!(labels, vec!["n : nat", "H : (even n)", "odd : nat -> Prop"]);

        // level 2: the + application head under odd
        let plus = tree.node_at(2, 0).unwrap();
        match &plus.content {
            NodeContent::TermType { term, ty } => {
                assert_eq!(term.to_string(), "+");
                assert_eq!(ty.to_string(), "nat -> nat -> nat");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(plus.children.len(), 2);

        // level 3: n : nat and 1 : nat
        assert!(tree.node_at(3, 0).is_some());
        assert!(tree.node_at(3, 1).is_some());
        assert!(tree.node_at(3, 2).is_none());
        assert!(tree.node_at(5, 0).is_none());
    }

    #[test]
    fn sort_node_is_single_with_classifying_sort() {
        let lib = parse_library(
            r#"{"objects": [
                {"name": "truth", "kind": "definition", "statement": {"tag": "sort", "sort": "Prop"}}
            ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let tree = build_term_tree(typed.objects[0].mined());
        assert_eq!(tree.dims(), (1, 1));
        let node = tree.node_at(0, 0).unwrap();
        match &node.content {
            NodeContent::TermType { term, ty } => {
                assert_eq!(term, &AtomContent::Sort(crate::term_model::SORT_PROP));
                assert_eq!(ty, &TypeContent::Sort(crate::term_model::type_sort(0)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_name_application_head_uses_at_sign() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "redex", "kind": "definition", "statement": {"tag": "name", "name": "nat"},
             "body": {"tag": "app",
                      "head": {"tag": "fun",
                               "binders": [{"var": "x", "type": {"tag": "name", "name": "nat"}}],
                               "body": {"tag": "var", "name": "x"}},
                      "args": [{"tag": "name", "name": "0"}]}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let redex = &typed.objects[typed.index_of("redex").unwrap()];
        let tree = build_term_tree(redex.mined());
        let root = tree.node_at(0, 0).unwrap();
        assert_eq!(root.content, NodeContent::Gallina(GallinaToken::AtSign));
        assert_eq!(root.children.len(), 2);
    }

    #[test]
    fn let_node_has_exactly_three_children() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "letex", "kind": "definition", "statement": {"tag": "name", "name": "nat"},
             "body": {"tag": "let", "var": "x", "var_type": {"tag": "name", "name": "nat"},
                      "value": {"tag": "name", "name": "0"},
                      "body": {"tag": "var", "name": "x"}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let obj = &typed.objects[typed.index_of("letex").unwrap()];
        let tree = build_term_tree(obj.mined());
        let root = tree.node_at(0, 0).unwrap();
        assert_eq!(root.content, NodeContent::Gallina(GallinaToken::Let));
        assert_eq!(root.children.len(), 3);
    }

    #[test]
    fn full_binary_tree_dims() {
        // nested arrows make a full binary tree of 7 nodes: levels of
        // size 1, 2 and 4
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "balanced", "kind": "definition",
             "statement": {"tag": "arrow",
                "from": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                         "to": {"tag": "name", "name": "nat"}},
                "to": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                       "to": {"tag": "name", "name": "nat"}}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let tree = build_term_tree(typed.objects[1].mined());
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.dims(), (3, 4));
    }

    #[test]
    fn fix_and_match_child_arities() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "succ", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "name", "name": "nat"}}},
            {"name": "half", "kind": "fixpoint",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "name", "name": "nat"}},
             "body": {"tag": "fix", "name": "half",
                      "binders": [{"var": "n", "type": {"tag": "name", "name": "nat"}}],
                      "body": {"tag": "match", "scrutinees": [{"tag": "var", "name": "n"}],
                               "branches": [
                                 {"pattern": {"tag": "name", "name": "0"},
                                  "rhs": {"tag": "name", "name": "0"}},
                                 {"pattern": {"tag": "app", "head": {"tag": "name", "name": "succ"},
                                              "args": [{"tag": "var", "name": "m"}]},
                                  "rhs": {"tag": "app", "head": {"tag": "name", "name": "half"},
                                          "args": [{"tag": "var", "name": "m"}]}}]}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let tree = build_term_tree(typed.objects[typed.index_of("half").unwrap()].mined());

        // fix: name node, one binder, body
        let root = tree.node_at(0, 0).unwrap();
        assert_eq!(root.content, NodeContent::Gallina(GallinaToken::Fix));
        assert_eq!(root.children.len(), 3);
        let name_node = tree.node(root.children[0]);
        match &name_node.content {
            NodeContent::TermType { term: AtomContent::Name { name, recursive, .. }, .. } => {
                assert_eq!(name, "half");
                assert!(recursive);
            }
            other => panic!("unexpected fix name node {other:?}"),
        }

        // match: one scrutinee plus one arm per branch; arms hold
        // exactly pattern and rhs
        let body = tree.node(root.children[2]);
        assert_eq!(body.content, NodeContent::Gallina(GallinaToken::Match));
        assert_eq!(body.children.len(), 1 + 2);
        for &arm in &body.children[1..] {
            let arm = tree.node(arm);
            assert_eq!(arm.content, NodeContent::Gallina(GallinaToken::Arrow));
            assert_eq!(arm.children.len(), 2);
        }
    }

    #[test]
    fn level_indices_are_contiguous_and_consistent() {
        let tree = fig1_tree();
        let mut total = 0;
        for (d, level) in tree.levels().iter().enumerate() {
            for (j, &id) in level.iter().enumerate() {
                let node = tree.node(id);
                assert_eq!(node.depth, d);
                assert_eq!(node.level_index, j);
                if let Some(p) = node.parent {
                    assert_eq!(tree.node(p).depth + 1, node.depth);
                }
            }
            total += level.len();
        }
        assert_eq!(total, tree.len());
    }

    #[test]
    fn construction_is_deterministic() {
        let a = fig1_tree();
        let b = fig1_tree();
        assert_eq!(a, b);
        assert_eq!(a.debug_dump(), b.debug_dump());
    }

    #[test]
    fn debug_dump_format() {
        let tree = fig1_tree();
        let dump = tree.debug_dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "d=0 j=0 p=-1 forall");
        assert!(lines[4].starts_with("d=2 j=0 p=2 "));
    }
}
