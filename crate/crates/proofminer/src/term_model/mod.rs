//! Term language and library model.
//!
//! The term syntax is a small pCIC-like calculus: sorts, global names,
//! variables, n-ary `forall`/`fun` binders, arrows, uncurried applications,
//! `let`, `fix` and `match`. Libraries are ordered sequences of named,
//! typed objects; the order is the processing order and every global
//! reference must point at an earlier object (or the object itself, for
//! recursive definitions).

mod json;
mod resolve;

pub use json::{parse_library, parse_term, serialize_library, term_to_json, ParseError};
pub use resolve::{
    erase_ann, resolve_types, shallow_type, TypeAnn, TypeResolutionError, TypedBinder,
    TypedLibrary, TypedObject, TypedTerm,
};

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based ordinal into the fixed sort hierarchy `{Set, Prop, Type(0), Type(1), ...}`.
pub const SORT_SET: u32 = 1;
pub const SORT_PROP: u32 = 2;

/// Ordinal of `Type(level)`.
pub fn type_sort(level: u32) -> u32 {
    3 + level
}

/// The sort classifying a sort: `Set : Type(0)`, `Prop : Type(0)`,
/// `Type(i) : Type(i+1)`.
pub fn sort_of_sort(ordinal: u32) -> u32 {
    if ordinal <= 2 {
        type_sort(0)
    } else {
        ordinal + 1
    }
}

/// Printable name of a sort ordinal.
pub fn sort_name(ordinal: u32) -> String {
    match ordinal {
        0 => "Sort(0)".to_string(), // never produced by the parser
        1 => "Set".to_string(),
        2 => "Prop".to_string(),
        n => format!("Type({})", n - 3),
    }
}

/// A binder `(var : ty)` in a `forall`, `fun`, `let` or `fix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub var: String,
    pub ty: Term,
}

/// One arm of a `match`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub pattern: Term,
    pub rhs: Term,
}

/// A term of the pCIC-like language.
///
/// Invariants maintained by the parser and by [`Term::flattened`]:
/// binder lists of `Forall`/`Fun`/`Fix` are nonempty and consecutive
/// binders are merged (`forall (x:T), forall (y:U), V` is stored as one
/// node); application argument lists are nonempty and nested heads are
/// merged (`((f x) y)` is stored as `(f x y)`). `Arrow` is the degenerate
/// forall whose bound variable does not occur in the codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Sort(u32),
    Name(String),
    Var(String),
    Forall { binders: Vec<Binder>, body: Box<Term> },
    Fun { binders: Vec<Binder>, body: Box<Term> },
    Arrow { from: Box<Term>, to: Box<Term> },
    App { head: Box<Term>, args: Vec<Term> },
    Let { binder: Box<Binder>, value: Box<Term>, body: Box<Term> },
    Fix { name: String, binders: Vec<Binder>, body: Box<Term> },
    Match { scrutinees: Vec<Term>, branches: Vec<Branch> },
}

impl Term {
    /// True for sorts, names and variables.
    pub fn is_atom(&self) -> bool {
        matches!(self, Term::Sort(_) | Term::Name(_) | Term::Var(_))
    }

    /// Normalize nested binders and applications.
    ///
    /// Idempotent: flattening a flattened term is a no-op.
    pub fn flattened(self) -> Term {
        match self {
            t @ (Term::Sort(_) | Term::Name(_) | Term::Var(_)) => t,
            Term::Forall { binders, body } => {
                let mut binders = flatten_binders(binders);
                match body.flattened() {
                    Term::Forall { binders: inner, body } => {
                        binders.extend(inner);
                        Term::Forall { binders, body }
                    }
                    body => Term::Forall { binders, body: Box::new(body) },
                }
            }
            Term::Fun { binders, body } => {
                let mut binders = flatten_binders(binders);
                match body.flattened() {
                    Term::Fun { binders: inner, body } => {
                        binders.extend(inner);
                        Term::Fun { binders, body }
                    }
                    body => Term::Fun { binders, body: Box::new(body) },
                }
            }
            Term::Arrow { from, to } => Term::Arrow {
                from: Box::new(from.flattened()),
                to: Box::new(to.flattened()),
            },
            Term::App { head, args } => {
                let args: Vec<Term> = args.into_iter().map(Term::flattened).collect();
                match head.flattened() {
                    Term::App { head, args: first } => {
                        let mut all = first;
                        all.extend(args);
                        Term::App { head, args: all }
                    }
                    head => Term::App { head: Box::new(head), args },
                }
            }
            Term::Let { binder, value, body } => Term::Let {
                binder: Box::new(Binder { var: binder.var, ty: binder.ty.flattened() }),
                value: Box::new(value.flattened()),
                body: Box::new(body.flattened()),
            },
            Term::Fix { name, binders, body } => Term::Fix {
                name,
                binders: flatten_binders(binders),
                body: Box::new(body.flattened()),
            },
            Term::Match { scrutinees, branches } => Term::Match {
                scrutinees: scrutinees.into_iter().map(Term::flattened).collect(),
                branches: branches
                    .into_iter()
                    .map(|b| Branch { pattern: b.pattern.flattened(), rhs: b.rhs.flattened() })
                    .collect(),
            },
        }
    }

    /// Visit every `Name` identifier in the term, left to right.
    pub fn visit_names<F: FnMut(&str)>(&self, f: &mut F) {
        match self {
            Term::Sort(_) | Term::Var(_) => {}
            Term::Name(n) => f(n),
            Term::Forall { binders, body } | Term::Fun { binders, body } => {
                for b in binders {
                    b.ty.visit_names(f);
                }
                body.visit_names(f);
            }
            Term::Arrow { from, to } => {
                from.visit_names(f);
                to.visit_names(f);
            }
            Term::App { head, args } => {
                head.visit_names(f);
                for a in args {
                    a.visit_names(f);
                }
            }
            Term::Let { binder, value, body } => {
                binder.ty.visit_names(f);
                value.visit_names(f);
                body.visit_names(f);
            }
            Term::Fix { binders, body, .. } => {
                for b in binders {
                    b.ty.visit_names(f);
                }
                body.visit_names(f);
            }
            Term::Match { scrutinees, branches } => {
                for s in scrutinees {
                    s.visit_names(f);
                }
                for b in branches {
                    b.pattern.visit_names(f);
                    b.rhs.visit_names(f);
                }
            }
        }
    }
}

fn flatten_binders(binders: Vec<Binder>) -> Vec<Binder> {
    binders
        .into_iter()
        .map(|b| Binder { var: b.var, ty: b.ty.flattened() })
        .collect()
}

/// True for identifiers like `0`, `1`, `42` that stand for numeric
/// literals. These are names of type `nat` and are declared implicitly
/// when a library uses them without declaring them.
pub fn is_numeric_literal(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_digit())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sort(o) => write!(f, "{}", sort_name(*o)),
            Term::Name(n) | Term::Var(n) => write!(f, "{n}"),
            Term::Forall { binders, body } => {
                write!(f, "forall")?;
                for b in binders {
                    write!(f, " ({} : {})", b.var, b.ty)?;
                }
                write!(f, ", {body}")
            }
            Term::Fun { binders, body } => {
                write!(f, "fun")?;
                for b in binders {
                    write!(f, " ({} : {})", b.var, b.ty)?;
                }
                write!(f, " => {body}")
            }
            Term::Arrow { from, to } => {
                // arrows associate to the right: the domain side needs parens
                // unless it is an atom or an already-parenthesized application
                match from.as_ref() {
                    Term::Sort(_) | Term::Name(_) | Term::Var(_) | Term::App { .. } => {
                        write!(f, "{from} -> {to}")
                    }
                    _ => write!(f, "({from}) -> {to}"),
                }
            }
            Term::App { head, args } => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Term::Let { binder, value, body } => {
                write!(f, "let {} := {} in {}", binder.var, value, body)
            }
            Term::Fix { name, binders, body } => {
                write!(f, "fix {name}")?;
                for b in binders {
                    write!(f, " ({} : {})", b.var, b.ty)?;
                }
                write!(f, " := {body}")
            }
            Term::Match { scrutinees, branches } => {
                write!(f, "match ")?;
                for (i, s) in scrutinees.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, " with")?;
                for b in branches {
                    write!(f, " | {} => {}", b.pattern, b.rhs)?;
                }
                write!(f, " end")
            }
        }
    }
}

/// What a library object is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Definition,
    Fixpoint,
    Lemma,
    Theorem,
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ObjectKind::Definition => "definition",
            ObjectKind::Fixpoint => "fixpoint",
            ObjectKind::Lemma => "lemma",
            ObjectKind::Theorem => "theorem",
        };
        write!(f, "{s}")
    }
}

/// Kind of a tactic argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgKind {
    /// Names another object of the library.
    Lemma,
    /// Names a top-level binder of the owning object's statement.
    Hypothesis,
    /// Opaque text, never substituted.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticArg {
    pub kind: ArgKind,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticStep {
    pub tactic: String,
    pub args: Vec<TacticArg>,
}

/// An ordered sequence of tactic invocations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TacticScript {
    pub steps: Vec<TacticStep>,
}

/// A named, typed object of a library.
#[derive(Debug, Clone, PartialEq)]
pub struct LibraryObject {
    pub name: String,
    pub kind: ObjectKind,
    /// The object's type. For lemmas and theorems this is the statement
    /// being proven; for definitions it is the declared type.
    pub statement: Term,
    /// Definition body or proof term, when available.
    pub body: Option<Term>,
    pub proof_script: Option<TacticScript>,
    /// True for implicitly declared numeric literals; synthetic objects
    /// are skipped on serialization.
    pub synthetic: bool,
}

/// An ordered proof library. The position of an object is its processing
/// index: objects may only reference themselves or earlier objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Library {
    pub objects: Vec<LibraryObject>,
}

impl Library {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&LibraryObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// Names of the top-level `forall` binders of an object's statement.
    pub fn statement_hypotheses(&self, name: &str) -> Option<Vec<String>> {
        let obj = self.get(name)?;
        Some(top_binders(&obj.statement))
    }
}

/// Top-level binder names of a statement, used as the hypothesis context.
pub fn top_binders(statement: &Term) -> Vec<String> {
    match statement {
        Term::Forall { binders, .. } => binders.iter().map(|b| b.var.clone()).collect(),
        _ => Vec::new(),
    }
}
