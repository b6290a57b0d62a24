//! JSON library format.
//!
//! The on-disk schema is documented in `docs/format.md`. Term nodes are
//! tagged objects (`{"tag": "forall", ...}`); libraries are a single
//! `{"objects": [...]}` document. Parsing validates name uniqueness,
//! reference ordering and tactic-script references, and implicitly
//! declares numeric literals as `nat`-typed objects before first use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    is_numeric_literal, top_binders, type_sort, ArgKind, Binder, Branch, Library, LibraryObject,
    ObjectKind, sort_name, TacticArg, TacticScript, TacticStep, Term, SORT_PROP, SORT_SET,
};

#[derive(Debug, Error)]
pub enum ParseError {
    /// Malformed JSON or a node that does not match the schema.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// Schema violation detected after JSON decoding (no position available).
    #[error("invalid term: {0}")]
    Invalid(String),
    /// Empty binder or argument list.
    #[error("arity error in {construct}: {detail}")]
    Arity { construct: &'static str, detail: String },
    #[error("duplicate object name `{0}`")]
    DuplicateName(String),
    /// A name was used before (or without) being declared.
    #[error("object `{object}` references `{name}` before it is defined")]
    ForwardReference { object: String, name: String },
    /// A tactic-script argument does not resolve.
    #[error("invalid proof script of `{object}`: {message}")]
    Script { object: String, message: String },
}

impl ParseError {
    fn from_serde(err: serde_json::Error) -> Self {
        ParseError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryDoc {
    objects: Vec<ObjectDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    name: String,
    kind: ObjectKind,
    statement: TermDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<TermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    proof_script: Option<Vec<StepDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    tactic: String,
    #[serde(default)]
    args: Vec<ArgDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArgDoc {
    kind: ArgKind,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase", deny_unknown_fields)]
enum TermDoc {
    Sort { sort: String },
    Name { name: String },
    Var { name: String },
    Forall { binders: Vec<BinderDoc>, body: Box<TermDoc> },
    Fun { binders: Vec<BinderDoc>, body: Box<TermDoc> },
    Arrow { from: Box<TermDoc>, to: Box<TermDoc> },
    App { head: Box<TermDoc>, args: Vec<TermDoc> },
    Let { var: String, var_type: Box<TermDoc>, value: Box<TermDoc>, body: Box<TermDoc> },
    Fix { name: String, binders: Vec<BinderDoc>, body: Box<TermDoc> },
    Match { scrutinees: Vec<TermDoc>, branches: Vec<BranchDoc> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinderDoc {
    var: String,
    #[serde(rename = "type")]
    ty: Box<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDoc {
    pattern: Box<TermDoc>,
    rhs: Box<TermDoc>,
}

fn parse_sort(text: &str) -> Result<u32, ParseError> {
    match text {
        "Set" => Ok(SORT_SET),
        "Prop" => Ok(SORT_PROP),
        _ => {
            let inner = text
                .strip_prefix("Type(")
                .and_then(|rest| rest.strip_suffix(')'))
                .ok_or_else(|| ParseError::Invalid(format!("unknown sort `{text}`")))?;
            let level: u32 = inner
                .parse()
                .map_err(|_| ParseError::Invalid(format!("bad Type level in `{text}`")))?;
            Ok(type_sort(level))
        }
    }
}

fn convert(doc: TermDoc) -> Result<Term, ParseError> {
    let term = match doc {
        TermDoc::Sort { sort } => Term::Sort(parse_sort(&sort)?),
        TermDoc::Name { name } => Term::Name(name),
        TermDoc::Var { name } => Term::Var(name),
        TermDoc::Forall { binders, body } => Term::Forall {
            binders: convert_binders("forall", binders)?,
            body: Box::new(convert(*body)?),
        },
        TermDoc::Fun { binders, body } => Term::Fun {
            binders: convert_binders("fun", binders)?,
            body: Box::new(convert(*body)?),
        },
        TermDoc::Arrow { from, to } => Term::Arrow {
            from: Box::new(convert(*from)?),
            to: Box::new(convert(*to)?),
        },
        TermDoc::App { head, args } => {
            if args.is_empty() {
                return Err(ParseError::Arity {
                    construct: "app",
                    detail: "argument list is empty".into(),
                });
            }
            Term::App {
                head: Box::new(convert(*head)?),
                args: args.into_iter().map(convert).collect::<Result<_, _>>()?,
            }
        }
        TermDoc::Let { var, var_type, value, body } => Term::Let {
            binder: Box::new(Binder { var, ty: convert(*var_type)? }),
            value: Box::new(convert(*value)?),
            body: Box::new(convert(*body)?),
        },
        TermDoc::Fix { name, binders, body } => Term::Fix {
            name,
            binders: convert_binders("fix", binders)?,
            body: Box::new(convert(*body)?),
        },
        TermDoc::Match { scrutinees, branches } => {
            if scrutinees.is_empty() {
                return Err(ParseError::Arity {
                    construct: "match",
                    detail: "scrutinee list is empty".into(),
                });
            }
            if branches.is_empty() {
                return Err(ParseError::Arity {
                    construct: "match",
                    detail: "branch list is empty".into(),
                });
            }
            Term::Match {
                scrutinees: scrutinees.into_iter().map(convert).collect::<Result<_, _>>()?,
                branches: branches
                    .into_iter()
                    .map(|b| {
                        Ok(Branch { pattern: convert(*b.pattern)?, rhs: convert(*b.rhs)? })
                    })
                    .collect::<Result<_, _>>()?,
            }
        }
    };
    Ok(term)
}

fn convert_binders(
    construct: &'static str,
    binders: Vec<BinderDoc>,
) -> Result<Vec<Binder>, ParseError> {
    if binders.is_empty() {
        return Err(ParseError::Arity { construct, detail: "binder list is empty".into() });
    }
    binders
        .into_iter()
        .map(|b| Ok(Binder { var: b.var, ty: convert(*b.ty)? }))
        .collect()
}

/// Parse a single term node from a JSON value.
pub fn parse_term(node: &serde_json::Value) -> Result<Term, ParseError> {
    let doc: TermDoc =
        serde_json::from_value(node.clone()).map_err(ParseError::from_serde)?;
    Ok(convert(doc)?.flattened())
}

/// Parse a library document, validating ordering and script references.
///
/// Numeric literals used without a declaration are implicitly declared as
/// `nat`-typed synthetic objects immediately before their first use, so
/// libraries that use literals must declare `nat` first.
pub fn parse_library(text: &str) -> Result<Library, ParseError> {
    let doc: LibraryDoc = serde_json::from_str(text).map_err(ParseError::from_serde)?;

    let declared: Vec<String> = doc.objects.iter().map(|o| o.name.clone()).collect();
    for (i, name) in declared.iter().enumerate() {
        if declared[..i].contains(name) {
            return Err(ParseError::DuplicateName(name.clone()));
        }
    }

    let mut objects: Vec<LibraryObject> = Vec::with_capacity(doc.objects.len());
    for obj in doc.objects {
        let statement = convert(obj.statement)?.flattened();
        let body = obj.body.map(convert).transpose()?.map(Term::flattened);
        let proof_script = obj.proof_script.map(|steps| TacticScript {
            steps: steps
                .into_iter()
                .map(|s| TacticStep {
                    tactic: s.tactic,
                    args: s.args.into_iter().map(|a| TacticArg { kind: a.kind, value: a.value }).collect(),
                })
                .collect(),
        });

        // implicit declaration of numeric literals before first use
        let mut literals: Vec<String> = Vec::new();
        let mut collect = |n: &str| {
            if is_numeric_literal(n)
                && !declared.iter().any(|d| d == n)
                && !objects.iter().any(|o| o.name == n)
                && !literals.iter().any(|l| l == n)
            {
                literals.push(n.to_string());
            }
        };
        statement.visit_names(&mut collect);
        if let Some(b) = &body {
            b.visit_names(&mut collect);
        }
        for lit in literals {
            objects.push(LibraryObject {
                name: lit,
                kind: ObjectKind::Definition,
                statement: Term::Name("nat".to_string()),
                body: None,
                proof_script: None,
                synthetic: true,
            });
        }

        objects.push(LibraryObject {
            name: obj.name,
            kind: obj.kind,
            statement,
            body,
            proof_script,
            synthetic: false,
        });
    }

    // every reference must resolve to the object itself or an earlier one
    for n in 0..objects.len() {
        let mut bad: Option<String> = None;
        let mut check = |name: &str| {
            if bad.is_none()
                && name != objects[n].name
                && !objects[..n].iter().any(|o| o.name == name)
            {
                bad = Some(name.to_string());
            }
        };
        objects[n].statement.visit_names(&mut check);
        if let Some(b) = &objects[n].body {
            b.visit_names(&mut check);
        }
        if let Some(name) = bad {
            return Err(ParseError::ForwardReference { object: objects[n].name.clone(), name });
        }
    }

    let lib = Library { objects };

    // tactic-script references: lemma args name library objects, hypothesis
    // args name top-level binders of the owning statement
    for obj in &lib.objects {
        let Some(script) = &obj.proof_script else { continue };
        let hyps = top_binders(&obj.statement);
        for step in &script.steps {
            for arg in &step.args {
                match arg.kind {
                    ArgKind::Lemma => {
                        if lib.index_of(&arg.value).is_none() {
                            return Err(ParseError::Script {
                                object: obj.name.clone(),
                                message: format!("lemma argument `{}` is not in the library", arg.value),
                            });
                        }
                    }
                    ArgKind::Hypothesis => {
                        if !hyps.iter().any(|h| h == &arg.value) {
                            return Err(ParseError::Script {
                                object: obj.name.clone(),
                                message: format!(
                                    "hypothesis argument `{}` is not a binder of the statement",
                                    arg.value
                                ),
                            });
                        }
                    }
                    ArgKind::Literal => {}
                }
            }
        }
    }

    Ok(lib)
}

fn term_to_doc(term: &Term) -> TermDoc {
    match term {
        Term::Sort(o) => TermDoc::Sort { sort: sort_name(*o) },
        Term::Name(n) => TermDoc::Name { name: n.clone() },
        Term::Var(n) => TermDoc::Var { name: n.clone() },
        Term::Forall { binders, body } => TermDoc::Forall {
            binders: binders_to_doc(binders),
            body: Box::new(term_to_doc(body)),
        },
        Term::Fun { binders, body } => TermDoc::Fun {
            binders: binders_to_doc(binders),
            body: Box::new(term_to_doc(body)),
        },
        Term::Arrow { from, to } => TermDoc::Arrow {
            from: Box::new(term_to_doc(from)),
            to: Box::new(term_to_doc(to)),
        },
        Term::App { head, args } => TermDoc::App {
            head: Box::new(term_to_doc(head)),
            args: args.iter().map(term_to_doc).collect(),
        },
        Term::Let { binder, value, body } => TermDoc::Let {
            var: binder.var.clone(),
            var_type: Box::new(term_to_doc(&binder.ty)),
            value: Box::new(term_to_doc(value)),
            body: Box::new(term_to_doc(body)),
        },
        Term::Fix { name, binders, body } => TermDoc::Fix {
            name: name.clone(),
            binders: binders_to_doc(binders),
            body: Box::new(term_to_doc(body)),
        },
        Term::Match { scrutinees, branches } => TermDoc::Match {
            scrutinees: scrutinees.iter().map(term_to_doc).collect(),
            branches: branches
                .iter()
                .map(|b| BranchDoc {
                    pattern: Box::new(term_to_doc(&b.pattern)),
                    rhs: Box::new(term_to_doc(&b.rhs)),
                })
                .collect(),
        },
    }
}

fn binders_to_doc(binders: &[Binder]) -> Vec<BinderDoc> {
    binders
        .iter()
        .map(|b| BinderDoc { var: b.var.clone(), ty: Box::new(term_to_doc(&b.ty)) })
        .collect()
}

/// Serialize a term to its JSON node form.
pub fn term_to_json(term: &Term) -> serde_json::Value {
    serde_json::to_value(term_to_doc(term)).expect("term serialization cannot fail")
}

/// Serialize a library back to the on-disk format. Synthetic literal
/// objects are omitted; re-parsing the output reconstructs them.
pub fn serialize_library(lib: &Library) -> String {
    let doc = LibraryDoc {
        objects: lib
            .objects
            .iter()
            .filter(|o| !o.synthetic)
            .map(|o| ObjectDoc {
                name: o.name.clone(),
                kind: o.kind,
                statement: term_to_doc(&o.statement),
                body: o.body.as_ref().map(term_to_doc),
                proof_script: o.proof_script.as_ref().map(|s| {
                    s.steps
                        .iter()
                        .map(|st| StepDoc {
                            tactic: st.tactic.clone(),
                            args: st
                                .args
                                .iter()
                                .map(|a| ArgDoc { kind: a.kind, value: a.value.clone() })
                                .collect(),
                        })
                        .collect()
                }),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("library serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_sort_names() {
        let t = parse_term(&json!({"tag": "sort", "sort": "Prop"})).unwrap();
        assert_eq!(t, Term::Sort(SORT_PROP));
        let t = parse_term(&json!({"tag": "sort", "sort": "Type(2)"})).unwrap();
        assert_eq!(t, Term::Sort(type_sort(2)));
        assert!(parse_term(&json!({"tag": "sort", "sort": "Bogus"})).is_err());
    }

    #[test]
    fn parses_arrow_and_renders() {
        let t = parse_term(&json!({
            "tag": "arrow",
            "from": {"tag": "name", "name": "nat"},
            "to": {"tag": "sort", "sort": "Prop"}
        }))
        .unwrap();
        assert_eq!(t.to_string(), "nat -> Prop");
    }

    #[test]
    fn parses_forall_with_flattened_binders() {
        let t = parse_term(&json!({
            "tag": "forall",
            "binders": [
                {"var": "n", "type": {"tag": "name", "name": "nat"}},
                {"var": "H", "type": {"tag": "app", "head": {"tag": "name", "name": "even"},
                                       "args": [{"tag": "var", "name": "n"}]}}
            ],
            "body": {"tag": "app", "head": {"tag": "name", "name": "odd"},
                     "args": [{"tag": "app", "head": {"tag": "name", "name": "+"},
                               "args": [{"tag": "var", "name": "n"}, {"tag": "name", "name": "1"}]}]}
        }))
        .unwrap();
        match &t {
            Term::Forall { binders, body } => {
                assert_eq!(binders.len(), 2);
                match body.as_ref() {
                    Term::App { head, args } => {
                        assert_eq!(head.as_ref(), &Term::Name("odd".into()));
                        assert_eq!(args.len(), 1);
                    }
                    other => panic!("unexpected body {other:?}"),
                }
            }
            other => panic!("unexpected term {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_tag_and_empty_lists() {
        let err = parse_term(&json!({"tag": "lambda", "x": 1})).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = parse_term(&json!({
            "tag": "app", "head": {"tag": "name", "name": "f"}, "args": []
        }))
        .unwrap_err();
        assert!(matches!(err, ParseError::Arity { construct: "app", .. }));
        let err = parse_term(&json!({
            "tag": "forall", "binders": [], "body": {"tag": "sort", "sort": "Prop"}
        }))
        .unwrap_err();
        assert!(matches!(err, ParseError::Arity { construct: "forall", .. }));
    }

    #[test]
    fn empty_library_parses() {
        let lib = parse_library(r#"{"objects": []}"#).unwrap();
        assert_eq!(lib.len(), 0);
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = r#"{"objects": [
            {"name": "a", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "a", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}}
        ]}"#;
        assert!(matches!(parse_library(text), Err(ParseError::DuplicateName(n)) if n == "a"));
    }

    #[test]
    fn forward_reference_rejected() {
        let text = r#"{"objects": [
            {"name": "a", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "b", "kind": "definition", "statement": {"tag": "name", "name": "c"}},
            {"name": "c", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}}
        ]}"#;
        match parse_library(text) {
            Err(ParseError::ForwardReference { object, name }) => {
                assert_eq!(object, "b");
                assert_eq!(name, "c");
            }
            other => panic!("expected forward reference, got {other:?}"),
        }
    }

    #[test]
    fn self_reference_is_allowed() {
        let text = r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "tree", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"},
             "body": {"tag": "arrow", "from": {"tag": "name", "name": "tree"},
                      "to": {"tag": "name", "name": "nat"}}}
        ]}"#;
        assert!(parse_library(text).is_ok());
    }

    #[test]
    fn numeric_literals_are_declared_before_first_use() {
        let text = r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "uses_one", "kind": "definition", "statement": {"tag": "name", "name": "nat"},
             "body": {"tag": "name", "name": "1"}}
        ]}"#;
        let lib = parse_library(text).unwrap();
        assert_eq!(lib.len(), 3);
        assert_eq!(lib.objects[1].name, "1");
        assert!(lib.objects[1].synthetic);
        assert_eq!(lib.objects[1].statement, Term::Name("nat".into()));
        assert_eq!(lib.index_of("uses_one"), Some(2));
    }

    #[test]
    fn script_reference_validation() {
        let base = |script: serde_json::Value| {
            format!(
                r#"{{"objects": [
                {{"name": "nat", "kind": "definition", "statement": {{"tag": "sort", "sort": "Set"}}}},
                {{"name": "lem", "kind": "lemma",
                  "statement": {{"tag": "forall",
                                 "binders": [{{"var": "x", "type": {{"tag": "name", "name": "nat"}}}}],
                                 "body": {{"tag": "name", "name": "nat"}}}},
                  "proof_script": {script}}}
            ]}}"#
            )
        };
        let ok = base(json!([{"tactic": "induction",
                              "args": [{"kind": "hypothesis", "value": "x"}]}]));
        assert!(parse_library(&ok).is_ok());
        let bad_hyp = base(json!([{"tactic": "induction",
                                   "args": [{"kind": "hypothesis", "value": "y"}]}]));
        assert!(matches!(parse_library(&bad_hyp), Err(ParseError::Script { .. })));
        let bad_lemma = base(json!([{"tactic": "rewrite",
                                     "args": [{"kind": "lemma", "value": "ghost"}]}]));
        assert!(matches!(parse_library(&bad_lemma), Err(ParseError::Script { .. })));
    }

    #[test]
    fn literal_before_nat_declaration_is_rejected() {
        let text = r#"{"objects": [
            {"name": "mystery", "kind": "definition",
             "statement": {"tag": "name", "name": "1"}}
        ]}"#;
        match parse_library(text) {
            Err(ParseError::ForwardReference { object, name }) => {
                assert_eq!(object, "1");
                assert_eq!(name, "nat");
            }
            other => panic!("expected forward reference on nat, got {other:?}"),
        }
    }

    #[test]
    fn bundled_example_parses_in_file_order() {
        let text = include_str!("../../../../fixtures/running_example.json");
        let lib = parse_library(text).unwrap();
        let names: Vec<&str> = lib.objects.iter().map(|o| o.name.as_str()).collect();
        // the literal `1` is declared implicitly right before the lemma
        assert_eq!(names, vec!["nat", "+", "even", "odd", "1", "odd_after_even"]);
        assert!(lib.objects[4].synthetic);
        assert!(lib.objects.iter().filter(|o| !o.synthetic).count() == 5);
    }

    #[test]
    fn library_round_trip() {
        let text = r#"{"objects": [
            {"name": "nat", "kind": "definition", "statement": {"tag": "sort", "sort": "Set"}},
            {"name": "plus", "kind": "definition",
             "statement": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                           "to": {"tag": "arrow", "from": {"tag": "name", "name": "nat"},
                                  "to": {"tag": "name", "name": "nat"}}}},
            {"name": "one_plus", "kind": "definition", "statement": {"tag": "name", "name": "nat"},
             "body": {"tag": "app", "head": {"tag": "name", "name": "plus"},
                      "args": [{"tag": "name", "name": "1"}, {"tag": "name", "name": "1"}]}}
        ]}"#;
        let lib = parse_library(text).unwrap();
        let reparsed = parse_library(&serialize_library(&lib)).unwrap();
        assert_eq!(lib, reparsed);
    }
}
