//! Golden transcript cases shared by the golden and acceptance targets.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub const CASES: &[(&str, &[&str])] = &[
    ("validate_chain3", &["validate", "chain3.json"]),
    ("validate_loop2", &["validate", "loop2.json"]),
    ("validate_derivation", &["validate", "chain3.json", "chain3_full.json"]),
    ("validate_open_chain", &["validate", "open_chain.json"]),
    ("validate_open_chain_closed", &["validate", "open_chain.json", "--no-close"]),
    ("validate_bad_transitive", &["validate", "chain3.json", "bad_transitive.json"]),
    ("validate_missing_file", &["validate", "missing.json"]),
    ("components_twochain", &["components", "twochain.json"]),
    ("components_isolated", &["components", "isolated.json"]),
    ("classes_chain3", &["classes", "chain3.json"]),
    ("classes_vee", &["classes", "vee.json"]),
    ("classes_loop2", &["classes", "loop2.json"]),
    ("classes_twochain", &["classes", "twochain.json"]),
    ("properness_chain3", &["properness", "chain3.json"]),
    ("properness_vee", &["properness", "vee.json"]),
    ("properness_twochain", &["properness", "twochain.json"]),
    ("properness_loop2", &["properness", "loop2.json"]),
    ("properness_isolated", &["properness", "isolated.json"]),
    ("check_vee_additive", &["check", "vee.json", "vee_additive.json"]),
    ("check_vee_witness_n3", &["check", "vee.json", "vee_witness.json", "--n", "3"]),
    (
        "check_chain3_full_seed7",
        &["check", "chain3.json", "chain3_full.json", "--seed", "7", "--probes", "200"],
    ),
    ("check_mod6", &["check", "chain3.json", "mod6.json"]),
    ("check_ring_mismatch", &["check", "vee.json", "vee_additive.json", "--ring", "int"]),
    ("witness_vee", &["witness", "vee.json"]),
    ("witness_chain3", &["witness", "chain3.json"]),
    ("witness_vee_int", &["witness", "vee.json", "--ring", "int"]),
    ("decompose_chain3_full", &["decompose", "chain3.json", "chain3_full.json"]),
    ("decompose_vee_witness", &["decompose", "vee.json", "vee_witness.json"]),
    ("decompose_loop2", &["decompose", "loop2.json", "loop2_inner.json"]),
    ("properize_twochain", &["properize", "twochain.json", "twochain_proper.json"]),
    ("properize_chain3_full", &["properize", "chain3.json", "chain3_full.json"]),
    ("properize_vee_witness", &["properize", "vee.json", "vee_witness.json"]),
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.out"))
}

/// Stdout, then stderr and the exit code, as one transcript.
pub fn transcript(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_filie"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("run filie");
    let mut text = format!("$ filie {}\n", args.join(" "));
    text.push_str(&String::from_utf8(out.stdout).expect("utf-8 stdout"));
    let stderr = String::from_utf8(out.stderr).expect("utf-8 stderr");
    if !stderr.is_empty() {
        text.push_str("--- stderr\n");
        text.push_str(&stderr);
    }
    text.push_str(&format!("--- exit {}\n", out.status.code().expect("exit code")));
    text
}

/// Names of the cases whose transcript differs from the stored file.
pub fn mismatches() -> Vec<&'static str> {
    CASES
        .iter()
        .filter(|(name, args)| fs::read_to_string(golden(name)).unwrap_or_default() != transcript(args))
        .map(|(name, _)| *name)
        .collect()
}
