//! Type resolution.
//!
//! Annotates every atom of a term with its type so that term trees can
//! pair each sort, name and variable with a type component. Name
//! occurrences are annotated with the statement of the object they
//! reference, variables with their binder's type, and recursive calls
//! (the object's own name, or an enclosing `fix` name) are flagged.
//!
//! There is no type inference: types come from binders, from declared
//! statements, or, for `match` pattern variables, from peeling the
//! pattern constructor's statement.

use thiserror::Error;

use super::{sort_of_sort, Branch, Library, ObjectKind, TacticScript, Term};

#[derive(Debug, Error)]
pub enum TypeResolutionError {
    #[error("in `{object}`: variable `{variable}` is not bound and its type cannot be derived")]
    UnboundVariable { object: String, variable: String },
    #[error("in `{object}`: unknown name `{name}`")]
    UnknownName { object: String, name: String },
}

/// Type annotation of an atom.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeAnn {
    /// The type is the object currently being defined (self-referential
    /// statement); collapsed to avoid infinite expansion.
    SelfRef,
    /// An annotated type fragment.
    Frag(Box<TypedTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedBinder {
    pub var: String,
    pub ty: TypeAnn,
}

/// A term whose atoms carry resolved types.
#[derive(Debug, Clone, PartialEq)]
pub enum TypedTerm {
    Sort { ordinal: u32 },
    Name { name: String, index: usize, ty: TypeAnn, recursive: bool },
    Var { name: String, ty: TypeAnn },
    Forall { binders: Vec<TypedBinder>, body: Box<TypedTerm> },
    Fun { binders: Vec<TypedBinder>, body: Box<TypedTerm> },
    Arrow { from: Box<TypedTerm>, to: Box<TypedTerm> },
    App { head: Box<TypedTerm>, args: Vec<TypedTerm> },
    Let { binder: TypedBinder, value: Box<TypedTerm>, body: Box<TypedTerm> },
    Fix { name: String, index: usize, ty: TypeAnn, binders: Vec<TypedBinder>, body: Box<TypedTerm> },
    Match { scrutinees: Vec<TypedTerm>, branches: Vec<(TypedTerm, TypedTerm)> },
}

impl TypedTerm {
    pub fn is_atom(&self) -> bool {
        matches!(self, TypedTerm::Sort { .. } | TypedTerm::Name { .. } | TypedTerm::Var { .. })
    }

    /// Drop annotations, recovering the plain term.
    pub fn erase(&self) -> Term {
        match self {
            TypedTerm::Sort { ordinal } => Term::Sort(*ordinal),
            TypedTerm::Name { name, .. } => Term::Name(name.clone()),
            TypedTerm::Var { name, .. } => Term::Var(name.clone()),
            TypedTerm::Forall { binders, body } => Term::Forall {
                binders: binders.iter().map(erase_binder).collect(),
                body: Box::new(body.erase()),
            },
            TypedTerm::Fun { binders, body } => Term::Fun {
                binders: binders.iter().map(erase_binder).collect(),
                body: Box::new(body.erase()),
            },
            TypedTerm::Arrow { from, to } => Term::Arrow {
                from: Box::new(from.erase()),
                to: Box::new(to.erase()),
            },
            TypedTerm::App { head, args } => Term::App {
                head: Box::new(head.erase()),
                args: args.iter().map(TypedTerm::erase).collect(),
            },
            TypedTerm::Let { binder, value, body } => Term::Let {
                binder: Box::new(erase_binder(binder)),
                value: Box::new(value.erase()),
                body: Box::new(body.erase()),
            },
            TypedTerm::Fix { name, binders, body, .. } => Term::Fix {
                name: name.clone(),
                binders: binders.iter().map(erase_binder).collect(),
                body: Box::new(body.erase()),
            },
            TypedTerm::Match { scrutinees, branches } => Term::Match {
                scrutinees: scrutinees.iter().map(TypedTerm::erase).collect(),
                branches: branches
                    .iter()
                    .map(|(p, r)| Branch { pattern: p.erase(), rhs: r.erase() })
                    .collect(),
            },
        }
    }
}

fn erase_binder(b: &TypedBinder) -> super::Binder {
    super::Binder { var: b.var.clone(), ty: erase_ann(&b.ty) }
}

/// Render a type annotation as a plain term; `SelfRef` becomes the
/// placeholder name `<self>`.
pub fn erase_ann(ann: &TypeAnn) -> Term {
    match ann {
        TypeAnn::SelfRef => Term::Name("<self>".to_string()),
        TypeAnn::Frag(t) => t.erase(),
    }
}

/// A library object with annotated statement and body.
#[derive(Debug, Clone)]
pub struct TypedObject {
    pub name: String,
    pub kind: ObjectKind,
    pub statement: Term,
    pub typed_statement: TypedTerm,
    pub typed_body: Option<TypedTerm>,
    pub proof_script: Option<TacticScript>,
    pub synthetic: bool,
}

impl TypedObject {
    /// The term this object contributes to mining: the body when present,
    /// otherwise the statement. Proven lemmas carry proof terms; unproven
    /// ones and plain declarations are represented by their type.
    pub fn mined(&self) -> &TypedTerm {
        self.typed_body.as_ref().unwrap_or(&self.typed_statement)
    }
}

/// A fully resolved library, in the original object order.
#[derive(Debug, Clone)]
pub struct TypedLibrary {
    pub objects: Vec<TypedObject>,
}

impl TypedLibrary {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }
}

struct Ctx {
    /// Index and name of the object whose term is being resolved;
    /// occurrences of this name are recursive calls.
    root_index: usize,
    root_name: String,
    /// Binder stack of the term currently being annotated.
    scope: Vec<(String, Term)>,
    /// Enclosing `fix` names of the term currently being annotated.
    fix_stack: Vec<String>,
    /// Objects whose statements are being expanded, to cut
    /// self-referential statements.
    expanding: Vec<String>,
}

struct Resolver<'a> {
    lib: &'a Library,
}

impl<'a> Resolver<'a> {
    fn err_unknown(&self, ctx: &Ctx, name: &str) -> TypeResolutionError {
        TypeResolutionError::UnknownName {
            object: ctx.root_name.clone(),
            name: name.to_string(),
        }
    }

    /// Annotate the statement of object `index` as a type fragment.
    fn expand_statement(&self, index: usize, ctx: &mut Ctx) -> Result<TypeAnn, TypeResolutionError> {
        let obj = &self.lib.objects[index];
        if ctx.expanding.iter().any(|n| n == &obj.name) {
            return Ok(TypeAnn::SelfRef);
        }
        // statements are closed terms; annotate them in a fresh scope
        let saved_scope = std::mem::take(&mut ctx.scope);
        let saved_fixes = std::mem::take(&mut ctx.fix_stack);
        ctx.expanding.push(obj.name.clone());
        let result = self.annotate(&obj.statement, ctx);
        ctx.expanding.pop();
        ctx.scope = saved_scope;
        ctx.fix_stack = saved_fixes;
        Ok(TypeAnn::Frag(Box::new(result?)))
    }

    fn annotate_binders(
        &self,
        binders: &[super::Binder],
        ctx: &mut Ctx,
    ) -> Result<Vec<TypedBinder>, TypeResolutionError> {
        let mut out = Vec::with_capacity(binders.len());
        for b in binders {
            let ty = self.annotate(&b.ty, ctx)?;
            out.push(TypedBinder { var: b.var.clone(), ty: TypeAnn::Frag(Box::new(ty)) });
            ctx.scope.push((b.var.clone(), b.ty.clone()));
        }
        Ok(out)
    }

    fn annotate(&self, term: &Term, ctx: &mut Ctx) -> Result<TypedTerm, TypeResolutionError> {
        match term {
            Term::Sort(o) => Ok(TypedTerm::Sort { ordinal: *o }),
            Term::Var(x) => {
                let pos = ctx.scope.iter().rposition(|(v, _)| v == x).ok_or_else(|| {
                    TypeResolutionError::UnboundVariable {
                        object: ctx.root_name.clone(),
                        variable: x.clone(),
                    }
                })?;
                // annotate the binder's type in the scope as of its binding
                // position, so the type cannot see the binder itself
                let mut tail = ctx.scope.split_off(pos);
                let ty = self.annotate(&tail[0].1.clone(), ctx);
                ctx.scope.append(&mut tail);
                Ok(TypedTerm::Var { name: x.clone(), ty: TypeAnn::Frag(Box::new(ty?)) })
            }
            Term::Name(n) => {
                let recursive = *n == ctx.root_name || ctx.fix_stack.iter().any(|f| f == n);
                let index = if recursive {
                    ctx.root_index
                } else {
                    self.lib.index_of(n).ok_or_else(|| self.err_unknown(ctx, n))?
                };
                let ty = self.expand_statement(index, ctx)?;
                Ok(TypedTerm::Name { name: n.clone(), index, ty, recursive })
            }
            Term::Forall { binders, body } => {
                let depth = ctx.scope.len();
                let binders = self.annotate_binders(binders, ctx)?;
                let body = self.annotate(body, ctx)?;
                ctx.scope.truncate(depth);
                Ok(TypedTerm::Forall { binders, body: Box::new(body) })
            }
            Term::Fun { binders, body } => {
                let depth = ctx.scope.len();
                let binders = self.annotate_binders(binders, ctx)?;
                let body = self.annotate(body, ctx)?;
                ctx.scope.truncate(depth);
                Ok(TypedTerm::Fun { binders, body: Box::new(body) })
            }
            Term::Arrow { from, to } => Ok(TypedTerm::Arrow {
                from: Box::new(self.annotate(from, ctx)?),
                to: Box::new(self.annotate(to, ctx)?),
            }),
            Term::App { head, args } => Ok(TypedTerm::App {
                head: Box::new(self.annotate(head, ctx)?),
                args: args.iter().map(|a| self.annotate(a, ctx)).collect::<Result<_, _>>()?,
            }),
            Term::Let { binder, value, body } => {
                let ty = self.annotate(&binder.ty, ctx)?;
                let value = self.annotate(value, ctx)?;
                ctx.scope.push((binder.var.clone(), binder.ty.clone()));
                let body = self.annotate(body, ctx)?;
                ctx.scope.pop();
                Ok(TypedTerm::Let {
                    binder: TypedBinder { var: binder.var.clone(), ty: TypeAnn::Frag(Box::new(ty)) },
                    value: Box::new(value),
                    body: Box::new(body),
                })
            }
            Term::Fix { name, binders, body } => {
                // the fix name stands for the object under definition
                let ty = self.expand_statement(ctx.root_index, ctx)?;
                let depth = ctx.scope.len();
                ctx.fix_stack.push(name.clone());
                let binders = self.annotate_binders(binders, ctx)?;
                let body = self.annotate(body, ctx)?;
                ctx.fix_stack.pop();
                ctx.scope.truncate(depth);
                Ok(TypedTerm::Fix {
                    name: name.clone(),
                    index: ctx.root_index,
                    ty,
                    binders,
                    body: Box::new(body),
                })
            }
            Term::Match { scrutinees, branches } => {
                let typed_scruts: Vec<TypedTerm> = scrutinees
                    .iter()
                    .map(|s| self.annotate(s, ctx))
                    .collect::<Result<_, _>>()?;
                let scrut_ty = if scrutinees.len() == 1 {
                    shallow_type(&scrutinees[0], &ctx.scope, self.lib)
                } else {
                    None
                };
                let mut typed_branches = Vec::with_capacity(branches.len());
                for b in branches {
                    let mut bindings = Vec::new();
                    self.pattern_bindings(&b.pattern, scrut_ty.as_ref(), ctx, &mut bindings)?;
                    let depth = ctx.scope.len();
                    ctx.scope.extend(bindings);
                    let pattern = self.annotate(&b.pattern, ctx)?;
                    let rhs = self.annotate(&b.rhs, ctx)?;
                    ctx.scope.truncate(depth);
                    typed_branches.push((pattern, rhs));
                }
                Ok(TypedTerm::Match { scrutinees: typed_scruts, branches: typed_branches })
            }
        }
    }

    /// Types of variables bound by a pattern: a bare variable takes the
    /// scrutinee type, constructor arguments take the corresponding
    /// parameter of the constructor's statement.
    fn pattern_bindings(
        &self,
        pattern: &Term,
        expected: Option<&Term>,
        ctx: &Ctx,
        out: &mut Vec<(String, Term)>,
    ) -> Result<(), TypeResolutionError> {
        match pattern {
            Term::Var(x) => {
                let ty = expected.ok_or_else(|| TypeResolutionError::UnboundVariable {
                    object: ctx.root_name.clone(),
                    variable: x.clone(),
                })?;
                out.push((x.clone(), ty.clone()));
                Ok(())
            }
            Term::Name(_) | Term::Sort(_) => Ok(()),
            Term::App { head, args } => {
                let ctor_ty = match head.as_ref() {
                    Term::Name(c) => {
                        let idx =
                            self.lib.index_of(c).ok_or_else(|| self.err_unknown(ctx, c))?;
                        Some(self.lib.objects[idx].statement.clone())
                    }
                    _ => None,
                };
                for (i, arg) in args.iter().enumerate() {
                    let param = ctor_ty.as_ref().and_then(|t| nth_param(t, i));
                    self.pattern_bindings(arg, param, ctx, out)?;
                }
                Ok(())
            }
            // other pattern shapes bind nothing; stray variables inside
            // them surface as UnboundVariable during annotation
            _ => Ok(()),
        }
    }
}

/// The `i`-th parameter type of an arrow/forall chain.
fn nth_param(ty: &Term, i: usize) -> Option<&Term> {
    match ty {
        Term::Arrow { from, to } => {
            if i == 0 {
                Some(from)
            } else {
                nth_param(to, i - 1)
            }
        }
        Term::Forall { binders, body } => {
            if i < binders.len() {
                Some(&binders[i].ty)
            } else {
                nth_param(body, i - binders.len())
            }
        }
        _ => None,
    }
}

/// Structural type of a term, when derivable without inference: sorts
/// classify into sorts, variables and names carry declared types, and an
/// application of a name peels parameters off the head's statement.
pub fn shallow_type(term: &Term, scope: &[(String, Term)], lib: &Library) -> Option<Term> {
    match term {
        Term::Sort(o) => Some(Term::Sort(sort_of_sort(*o))),
        Term::Var(x) => scope.iter().rev().find(|(v, _)| v == x).map(|(_, t)| t.clone()),
        Term::Name(n) => lib.get(n).map(|o| o.statement.clone()),
        Term::App { head, args } => {
            let Term::Name(n) = head.as_ref() else { return None };
            let mut ty = lib.get(n)?.statement.clone();
            let mut remaining = args.len();
            while remaining > 0 {
                ty = match ty {
                    Term::Arrow { to, .. } => {
                        remaining -= 1;
                        *to
                    }
                    Term::Forall { mut binders, body } => {
                        let drop = remaining.min(binders.len());
                        binders.drain(..drop);
                        remaining -= drop;
                        if binders.is_empty() {
                            *body
                        } else {
                            Term::Forall { binders, body }
                        }
                    }
                    _ => return None,
                };
            }
            Some(ty)
        }
        _ => None,
    }
}

/// Annotate every object of a parsed library.
pub fn resolve_types(lib: &Library) -> Result<TypedLibrary, TypeResolutionError> {
    let resolver = Resolver { lib };
    let mut objects = Vec::with_capacity(lib.objects.len());
    for (index, obj) in lib.objects.iter().enumerate() {
        let mut ctx = Ctx {
            root_index: index,
            root_name: obj.name.clone(),
            scope: Vec::new(),
            fix_stack: Vec::new(),
            expanding: Vec::new(),
        };
        let typed_statement = resolver.annotate(&obj.statement, &mut ctx)?;
        debug_assert!(ctx.scope.is_empty() && ctx.fix_stack.is_empty());
        let typed_body = obj.body.as_ref().map(|b| resolver.annotate(b, &mut ctx)).transpose()?;
        objects.push(TypedObject {
            name: obj.name.clone(),
            kind: obj.kind,
            statement: obj.statement.clone(),
            typed_statement,
            typed_body,
            proof_script: obj.proof_script.clone(),
            synthetic: obj.synthetic,
        });
    }
    Ok(TypedLibrary { objects })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_model::parse_library;

    fn fig1_library() -> Library {
        parse_library(
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
        .unwrap()
    }

    #[test]
    fn annotates_names_with_referenced_statements() {
        let lib = fig1_library();
        let typed = resolve_types(&lib).unwrap();
        let lemma = &typed.objects[typed.index_of("odd_after_even").unwrap()];
        let TypedTerm::Forall { binders, body } = &lemma.typed_statement else {
            panic!("expected forall");
        };
        // `n : nat`
        let TypeAnn::Frag(n_ty) = &binders[0].ty else { panic!() };
        assert_eq!(n_ty.erase(), Term::Name("nat".into()));
        // the `+` head inside the body carries `nat -> nat -> nat`
        let TypedTerm::App { args, .. } = body.as_ref() else { panic!() };
        let TypedTerm::App { head, .. } = &args[0] else { panic!() };
        let TypedTerm::Name { name, ty, recursive, .. } = head.as_ref() else { panic!() };
        assert_eq!(name, "+");
        assert!(!recursive);
        let TypeAnn::Frag(plus_ty) = ty else { panic!() };
        assert_eq!(plus_ty.erase().to_string(), "nat -> nat -> nat");
    }

    #[test]
    fn variable_occurrences_take_binder_types() {
        let lib = fig1_library();
        let typed = resolve_types(&lib).unwrap();
        let lemma = &typed.objects[4 + 1]; // after synthetic literal `1`
        assert_eq!(lemma.name, "odd_after_even");
        let TypedTerm::Forall { body, .. } = &lemma.typed_statement else { panic!() };
        let TypedTerm::App { args, .. } = body.as_ref() else { panic!() };
        let TypedTerm::App { args: plus_args, .. } = &args[0] else { panic!() };
        let TypedTerm::Var { name, ty } = &plus_args[0] else { panic!("expected var") };
        assert_eq!(name, "n");
        let TypeAnn::Frag(t) = ty else { panic!() };
        assert_eq!(t.erase(), Term::Name("nat".into()));
    }

    #[test]
    fn recursive_fix_calls_are_flagged() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "loop", "kind": "fixpoint",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "name", "name": "nat"}},
             "body": {"tag": "fix", "name": "loop",
                      "binders": [{"var": "x", "type": {"tag": "name", "name": "nat"}}],
                      "body": {"tag": "app", "head": {"tag": "name", "name": "loop"},
                               "args": [{"tag": "var", "name": "x"}]}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let TypedTerm::Fix { body, index, .. } =
            typed.objects[1].typed_body.as_ref().unwrap()
        else {
            panic!("expected fix body");
        };
        assert_eq!(*index, 1);
        let TypedTerm::App { head, .. } = body.as_ref() else { panic!() };
        let TypedTerm::Name { recursive, index, .. } = head.as_ref() else { panic!() };
        assert!(recursive);
        assert_eq!(*index, 1);
    }

    #[test]
    fn unbound_variable_is_reported() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "broken", "kind": "definition",
             "statement": {"tag": "name", "name": "nat"},
             "body": {"tag": "var", "name": "ghost"}}
        ]}"#,
        )
        .unwrap();
        match resolve_types(&lib) {
            Err(TypeResolutionError::UnboundVariable { variable, .. }) => {
                assert_eq!(variable, "ghost")
            }
            other => panic!("expected unbound variable, got {other:?}"),
        }
    }

    #[test]
    fn pattern_variables_peel_constructor_types() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "succ", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "name", "name": "nat"}}},
            {"name": "pred", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "name", "name": "nat"}},
             "body": {"tag": "fun",
                      "binders": [{"var": "n", "type": {"tag": "name", "name": "nat"}}],
                      "body": {"tag": "match",
                               "scrutinees": [{"tag": "var", "name": "n"}],
                               "branches": [
                                 {"pattern": {"tag": "name", "name": "0"},
                                  "rhs": {"tag": "name", "name": "0"}},
                                 {"pattern": {"tag": "app", "head": {"tag": "name", "name": "succ"},
                                              "args": [{"tag": "var", "name": "m"}]},
                                  "rhs": {"tag": "var", "name": "m"}}]}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let pred = &typed.objects[typed.index_of("pred").unwrap()];
        let TypedTerm::Fun { body, .. } = pred.typed_body.as_ref().unwrap() else { panic!() };
        let TypedTerm::Match { branches, .. } = body.as_ref() else { panic!() };
        let (_, rhs) = &branches[1];
        let TypedTerm::Var { name, ty } = rhs else { panic!("expected var rhs") };
        assert_eq!(name, "m");
        let TypeAnn::Frag(t) = ty else { panic!() };
        assert_eq!(t.erase(), Term::Name("nat".into()));
    }

    #[test]
    fn self_referential_statement_collapses() {
        let lib = parse_library(
            r#"{"objects": [
            {"name": "weird", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "weird"},
                           "to": {"tag": "sort", "sort": "Set"}}}
        ]}"#,
        )
        .unwrap();
        let typed = resolve_types(&lib).unwrap();
        let TypedTerm::Arrow { from, .. } = &typed.objects[0].typed_statement else { panic!() };
        let TypedTerm::Name { recursive, ty, .. } = from.as_ref() else { panic!() };
        assert!(recursive);
        // expanding `weird`'s statement inside itself stops at SelfRef
        let TypeAnn::Frag(frag) = ty else { panic!() };
        let TypedTerm::Arrow { from: inner, .. } = frag.as_ref() else { panic!() };
        let TypedTerm::Name { ty: inner_ty, .. } = inner.as_ref() else { panic!() };
        assert_eq!(inner_ty, &TypeAnn::SelfRef);
    }

    #[test]
    fn annotations_never_come_from_later_objects() {
        let lib = fig1_library();
        let typed = resolve_types(&lib).unwrap();
        fn check(t: &TypedTerm, max: usize) {
            match t {
                TypedTerm::Name { index, ty, .. } => {
                    assert!(*index <= max, "annotation source {index} beyond object {max}");
                    if let TypeAnn::Frag(f) = ty {
                        check(f, max);
                    }
                }
                TypedTerm::Sort { .. } | TypedTerm::Var { .. } => {}
                TypedTerm::Forall { binders, body } | TypedTerm::Fun { binders, body } => {
                    for b in binders {
                        if let TypeAnn::Frag(f) = &b.ty {
                            check(f, max);
                        }
                    }
                    check(body, max);
                }
                TypedTerm::Arrow { from, to } => {
                    check(from, max);
                    check(to, max);
                }
                TypedTerm::App { head, args } => {
                    check(head, max);
                    args.iter().for_each(|a| check(a, max));
                }
                TypedTerm::Let { binder, value, body } => {
                    if let TypeAnn::Frag(f) = &binder.ty {
                        check(f, max);
                    }
                    check(value, max);
                    check(body, max);
                }
                TypedTerm::Fix { binders, body, index, .. } => {
                    assert!(*index <= max);
                    for b in binders {
                        if let TypeAnn::Frag(f) = &b.ty {
                            check(f, max);
                        }
                    }
                    check(body, max);
                }
                TypedTerm::Match { scrutinees, branches } => {
                    scrutinees.iter().for_each(|s| check(s, max));
                    for (p, r) in branches {
                        check(p, max);
                        check(r, max);
                    }
                }
            }
        }
        for (i, obj) in typed.objects.iter().enumerate() {
            check(&obj.typed_statement, i);
            if let Some(b) = &obj.typed_body {
                check(b, i);
            }
        }
    }
}
