//! Pattern-file checker for desk-scale runs.
//!
//! Reads `{"library", "target", "script"}` from stdin and accepts the
//! candidate (exit 0) when the rules file passed as the first argument
//! contains an entry whose target and script match exactly; otherwise it
//! rejects (exit 1). Malformed input or rules exit 2.
//!
//! Rules file: `{"rules": [{"target": <name>, "script": [<steps>]}]}`.

use std::io::Read;
use std::process::ExitCode;

use serde::Deserialize;

#[derive(Deserialize)]
struct Rules {
    rules: Vec<Rule>,
}

#[derive(Deserialize)]
struct Rule {
    target: String,
    script: serde_json::Value,
}

#[derive(Deserialize)]
struct Request {
    #[allow(dead_code)]
    library: String,
    target: String,
    script: serde_json::Value,
}

fn main() -> ExitCode {
    let Some(rules_path) = std::env::args().nth(1) else {
        eprintln!("usage: proofminer-stub-checker <rules.json>");
        return ExitCode::from(2);
    };
    let rules: Rules = match std::fs::read_to_string(&rules_path)
        .map_err(|e| e.to_string())
        .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot load rules {rules_path}: {e}");
            return ExitCode::from(2);
        }
    };

    let mut input = String::new();
    if let Err(e) = std::io::stdin().read_to_string(&mut input) {
        eprintln!("error: cannot read stdin: {e}");
        return ExitCode::from(2);
    }
    let request: Request = match serde_json::from_str(&input) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: malformed request: {e}");
            return ExitCode::from(2);
        }
    };

    let accepted = rules
        .rules
        .iter()
        .any(|r| r.target == request.target && r.script == request.script);
    if accepted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
