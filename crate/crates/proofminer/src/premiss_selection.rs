//! Tactic suggestion by cluster analogy.
//!
//! To prove a target, look up its cluster mates, take their tactic
//! scripts, and stream candidate scripts to an external checker: first
//! each mate's script verbatim, then variants where tactic arguments are
//! substituted — hypothesis arguments range over the target statement's
//! own binders, lemma arguments over the members of the cluster of the
//! original lemma. Substituted variants are ordered by source proximity
//! (descending), number of changed arguments (ascending), then
//! lexicographically by the substituted values, and the stream stops at
//! the first acceptance or when the checker budget runs out.
//!
//! Checker protocol: the configured command is spawned once per
//! candidate and receives `{"library": <path>, "target": <name>,
//! "script": <steps>}` on stdin. Exit 0 accepts the candidate, exit 1
//! rejects it, any other exit is an infrastructure error. A call that
//! exceeds the per-call timeout is killed and counted as a rejection.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recurrent_clustering::{Member, ModelDump};
use crate::term_model::{top_binders, ArgKind, Library, TacticScript};

#[derive(Debug, Error)]
pub enum SuggestError {
    #[error("target `{0}` is not in the library")]
    TargetNotFound(String),
    #[error("target `{0}` is not covered by the cluster model")]
    TargetNotClustered(String),
    #[error("lemma `{0}` is not covered by the cluster model")]
    UnknownLemma(String),
    #[error("checker failed (exit {code:?}): {message}")]
    CheckerFailure { code: Option<i32>, message: String },
}

/// External checker configuration.
#[derive(Debug, Clone)]
pub struct CheckerConfig {
    /// Program and arguments, spawned per candidate.
    pub command: Vec<String>,
    /// Per-call wall-clock limit.
    pub timeout: Duration,
    /// Maximum number of checker calls.
    pub budget: usize,
}

impl CheckerConfig {
    pub fn new(command: Vec<String>) -> Self {
        CheckerConfig { command, timeout: Duration::from_secs(10), budget: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub original: String,
    pub replacement: String,
}

/// A candidate script with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub script: TacticScript,
    /// Cluster mate the script came from.
    pub source: String,
    /// Lemma-argument substitutions applied, in argument order.
    pub substitutions: Vec<Substitution>,
    #[serde(skip)]
    source_rank: usize,
    /// Number of changed arguments (lemma and hypothesis alike).
    #[serde(skip)]
    changed: usize,
    /// All argument values after substitution, the lexicographic key.
    #[serde(skip)]
    replacements: Vec<String>,
}

/// Outcome of a suggestion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionReport {
    pub target: String,
    /// Checker calls actually made.
    pub tried: usize,
    /// First accepted candidate, if any.
    pub accepted: Option<Accepted>,
    /// Every candidate in the order it was (or would have been) tried.
    pub candidates_ranked: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub script: TacticScript,
    pub source_lemma: String,
    pub substitutions: Vec<Substitution>,
}

/// Cluster mates of the target, ordered by descending proximity (ties
/// keep library order). The target itself is excluded.
pub fn find_cluster_of(target: &str, model: &ModelDump) -> Result<Vec<Member>, SuggestError> {
    let cluster = model
        .cluster_of(target)
        .ok_or_else(|| SuggestError::TargetNotClustered(target.to_string()))?;
    let mut mates: Vec<Member> = model
        .members(cluster)
        .expect("cluster id from cluster_of")
        .iter()
        .filter(|m| m.name != target)
        .cloned()
        .collect();
    mates.sort_by(|a, b| b.proximity.total_cmp(&a.proximity));
    Ok(mates)
}

/// Replacement pool for a lemma argument: every member of the lemma's
/// cluster, the lemma itself first.
pub fn candidate_substitutions(
    arg_lemma: &str,
    model: &ModelDump,
) -> Result<Vec<String>, SuggestError> {
    let cluster = model
        .cluster_of(arg_lemma)
        .ok_or_else(|| SuggestError::UnknownLemma(arg_lemma.to_string()))?;
    let members = model.members(cluster).expect("cluster id from cluster_of");
    let mut pool = vec![arg_lemma.to_string()];
    pool.extend(members.iter().map(|m| m.name.clone()).filter(|n| n != arg_lemma));
    Ok(pool)
}

/// Build the ordered candidate stream from the mates' scripts.
///
/// Verbatim scripts come first, one per source in proximity order; then
/// the cartesian product of per-argument substitution pools, globally
/// ordered by (source proximity desc, changed-argument count asc,
/// lexicographic on substituted values) and truncated at `budget`.
pub fn generate_candidates(
    scripts: &[(Member, TacticScript)],
    model: &ModelDump,
    target_hyps: &[String],
    budget: usize,
) -> Result<Vec<Candidate>, SuggestError> {
    let mut out: Vec<Candidate> = Vec::new();
    for (rank, (member, script)) in scripts.iter().enumerate() {
        out.push(Candidate {
            script: script.clone(),
            source: member.name.clone(),
            substitutions: Vec::new(),
            source_rank: rank,
            changed: 0,
            replacements: all_arg_values(script),
        });
    }

    let mut substituted: Vec<Candidate> = Vec::new();
    for (rank, (member, script)) in scripts.iter().enumerate() {
        // one pool per argument, in script order
        let mut pools: Vec<Vec<String>> = Vec::new();
        let mut originals: Vec<(usize, usize, ArgKind, String)> = Vec::new();
        for (si, step) in script.steps.iter().enumerate() {
            for (ai, arg) in step.args.iter().enumerate() {
                let pool = match arg.kind {
                    ArgKind::Lemma => candidate_substitutions(&arg.value, model)?,
                    ArgKind::Hypothesis => target_hyps.to_vec(),
                    ArgKind::Literal => vec![arg.value.clone()],
                };
                originals.push((si, ai, arg.kind, arg.value.clone()));
                pools.push(pool);
            }
        }
        if pools.iter().any(Vec::is_empty) {
            continue; // an argument with no replacements: verbatim only
        }

        let mut odometer = vec![0usize; pools.len()];
        loop {
            let combo: Vec<&String> =
                odometer.iter().enumerate().map(|(i, &j)| &pools[i][j]).collect();
            let changed = combo
                .iter()
                .zip(&originals)
                .filter(|(value, (_, _, _, original))| **value != original)
                .count();
            if changed > 0 {
                let mut script = script.clone();
                let mut substitutions = Vec::new();
                for (value, (si, ai, kind, original)) in combo.iter().zip(&originals) {
                    script.steps[*si].args[*ai].value = (*value).clone();
                    if *kind == ArgKind::Lemma && *value != original {
                        substitutions.push(Substitution {
                            original: original.clone(),
                            replacement: (*value).clone(),
                        });
                    }
                }
                substituted.push(Candidate {
                    replacements: combo.iter().map(|s| (*s).clone()).collect(),
                    script,
                    source: member.name.clone(),
                    substitutions,
                    source_rank: rank,
                    changed,
                });
            }
            // advance the odometer, rightmost digit fastest
            let mut pos = pools.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < pools[pos].len() {
                    break;
                }
                odometer[pos] = 0;
            }
            if odometer.iter().all(|&j| j == 0) {
                break; // wrapped around: every combination visited
            }
        }
    }
    substituted.sort_by(|a, b| {
        a.source_rank
            .cmp(&b.source_rank)
            .then(a.changed.cmp(&b.changed))
            .then_with(|| a.replacements.cmp(&b.replacements))
    });
    out.extend(substituted);
    out.truncate(budget);
    Ok(out)
}

fn all_arg_values(script: &TacticScript) -> Vec<String> {
    script.steps.iter().flat_map(|s| s.args.iter().map(|a| a.value.clone())).collect()
}

enum Verdict {
    Accepted,
    Rejected,
}

fn run_checker(
    config: &CheckerConfig,
    library_path: &Path,
    target: &str,
    script: &TacticScript,
) -> Result<Verdict, SuggestError> {
    let (program, args) = config
        .command
        .split_first()
        .ok_or_else(|| SuggestError::CheckerFailure {
            code: None,
            message: "empty checker command".to_string(),
        })?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SuggestError::CheckerFailure {
            code: None,
            message: format!("failed to spawn `{program}`: {e}"),
        })?;

    let payload = serde_json::json!({
        "library": library_path.to_string_lossy(),
        "target": target,
        "script": script,
    });
    if let Some(mut stdin) = child.stdin.take() {
        // the checker may exit without reading; a broken pipe is fine
        let _ = stdin.write_all(payload.to_string().as_bytes());
    }

    let deadline = Instant::now() + config.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    log::warn!("checker timed out after {:?}; counting as rejection", config.timeout);
                    return Ok(Verdict::Rejected);
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                return Err(SuggestError::CheckerFailure {
                    code: None,
                    message: format!("wait failed: {e}"),
                })
            }
        }
    };

    match status.code() {
        Some(0) => Ok(Verdict::Accepted),
        Some(1) => Ok(Verdict::Rejected),
        code => {
            let mut message = String::new();
            if let Some(mut err) = child.stderr.take() {
                use std::io::Read;
                let _ = err.read_to_string(&mut message);
            }
            Err(SuggestError::CheckerFailure { code, message: message.trim().to_string() })
        }
    }
}

/// Stream candidates for `target` to the checker, stopping at the first
/// acceptance or at the budget.
pub fn suggest(
    target: &str,
    lib: &Library,
    model: &ModelDump,
    checker: &CheckerConfig,
    library_path: &Path,
) -> Result<SuggestionReport, SuggestError> {
    let object =
        lib.get(target).ok_or_else(|| SuggestError::TargetNotFound(target.to_string()))?;
    let mates = find_cluster_of(target, model)?;
    let scripts: Vec<(Member, TacticScript)> = mates
        .iter()
        .filter_map(|m| {
            lib.get(&m.name).and_then(|o| o.proof_script.clone()).map(|s| (m.clone(), s))
        })
        .collect();
    let target_hyps = top_binders(&object.statement);
    let candidates = generate_candidates(&scripts, model, &target_hyps, checker.budget)?;

    let mut tried = 0;
    let mut accepted = None;
    for cand in &candidates {
        if tried >= checker.budget {
            break;
        }
        tried += 1;
        match run_checker(checker, library_path, target, &cand.script)? {
            Verdict::Accepted => {
                accepted = Some(Accepted {
                    script: cand.script.clone(),
                    source_lemma: cand.source.clone(),
                    substitutions: cand.substitutions.clone(),
                });
                break;
            }
            Verdict::Rejected => {}
        }
    }

    Ok(SuggestionReport {
        target: target.to_string(),
        tried,
        accepted,
        candidates_ranked: candidates,
    })
}
