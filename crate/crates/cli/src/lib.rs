//! Batch front end: parse poset and derivation documents, run the engines,
//! render deterministic reports.

pub mod documents;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use filie::algebra::Algebra;
use filie::decompose::{decompose, DecomposeError};
use filie::maps::SharedMap;
use filie::properness::{emit_witness, properize, properness_criterion, PropernessError};
use filie::ring::{validate_torsionfree, Admissibility, RingDescriptor};
use filie::verify::{check_lie_n_derivation, ProbeBudget, Verdict};
use thiserror::Error;

use documents::{derivation_document, to_pretty, Derivation, Poset};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Document(String),
    #[error("ring {ring} is not admissible for n = {n}: it has {torsion}-torsion")]
    Inadmissible {
        ring: RingDescriptor,
        n: u64,
        torsion: u64,
    },
    #[error("{0}")]
    Engine(String),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Pass, proper or decomposable.
    Ok = 0,
    /// Refutation or not proper.
    Refuted = 1,
    /// Malformed input or inadmissible ring.
    InputError = 2,
}

#[derive(Debug, Parser)]
#[command(name = "filie", version, about = "Lie n-derivations of incidence algebras of finite pre-orders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PosetArgs {
    /// Poset document.
    pub poset: PathBuf,
    /// Require the relation to be reflexive and transitive as given.
    #[arg(long)]
    pub no_close: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Override the document's n.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random probes run after the structured probe set.
    #[arg(long, default_value_t = 500)]
    pub probes: usize,
    /// Expected ring; must match the document.
    #[arg(long)]
    pub ring: Option<RingDescriptor>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a poset (and optionally a derivation) document.
    Validate {
        #[command(flatten)]
        poset: PosetArgs,
        derivation: Option<PathBuf>,
        #[arg(long)]
        ring: Option<RingDescriptor>,
    },
    /// List connected components.
    Components {
        #[command(flatten)]
        poset: PosetArgs,
    },
    /// List edge classes with their edges and vertex sets.
    Classes {
        #[command(flatten)]
        poset: PosetArgs,
    },
    /// Decide whether every Lie n-derivation is proper.
    Properness {
        #[command(flatten)]
        poset: PosetArgs,
    },
    /// Run the Lie n-derivation falsifier on a derivation document.
    Check {
        #[command(flatten)]
        poset: PosetArgs,
        derivation: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Decompose a derivation document and print the JSON report.
    Decompose {
        #[command(flatten)]
        poset: PosetArgs,
        derivation: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Emit a non-proper Lie derivation when the criterion fails.
    Witness {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value = "intpoly")]
        ring: RingDescriptor,
        #[arg(long, default_value_t = 2)]
        n: u64,
    },
    /// Rewrite a derivation document into derivation plus central part.
    Properize {
        #[command(flatten)]
        poset: PosetArgs,
        derivation: PathBuf,
        #[command(flatten)]
        probe: ProbeArgs,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_poset(args: &PosetArgs) -> Result<Poset, CliError> {
    Poset::parse(&read(&args.poset)?, args.no_close)
}

fn admissible(ring: RingDescriptor, n: u64) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Document(format!("n must be at least 2, got {n}")));
    }
    match validate_torsionfree(ring, n) {
        Admissibility::Admissible => Ok(()),
        Admissibility::Inadmissible { torsion } => Err(CliError::Inadmissible { ring, n, torsion }),
    }
}

struct Loaded {
    poset: Poset,
    algebra: Arc<Algebra>,
    derivation: Derivation,
    n: u64,
    budget: ProbeBudget,
}

fn load_all(poset: &PosetArgs, derivation: &Path, probe: &ProbeArgs) -> Result<Loaded, CliError> {
    let poset = load_poset(poset)?;
    let (derivation, algebra) = Derivation::parse(&read(derivation)?, &poset, probe.ring)?;
    let n = probe.n.unwrap_or(derivation.n);
    admissible(derivation.ring, n)?;
    let budget = ProbeBudget::new(derivation.ring, probe.seed, probe.probes);
    Ok(Loaded {
        poset,
        algebra,
        derivation,
        n,
        budget,
    })
}

/// Runs one command and returns its report and exit status.
pub fn execute(command: &Command) -> Result<(String, Status), CliError> {
    match command {
        Command::Validate {
            poset,
            derivation,
            ring,
        } => {
            let poset = load_poset(poset)?;
            let mut out = report::validate(&poset);
            if let Some(path) = derivation {
                let (d, _) = Derivation::parse(&read(path)?, &poset, *ring)?;
                admissible(d.ring, d.n)?;
                out.push_str(&format!(
                    "valid derivation: ring {}, n = {}, terms: {}\n",
                    d.ring, d.n, d.spec
                ));
            }
            Ok((out, Status::Ok))
        }
        Command::Components { poset } => Ok((report::components(&load_poset(poset)?), Status::Ok)),
        Command::Classes { poset } => Ok((report::classes(&load_poset(poset)?), Status::Ok)),
        Command::Properness { poset } => {
            let poset = load_poset(poset)?;
            let verdict = properness_criterion(&poset.preorder.edge_classes());
            let status = if verdict.proper_capable() {
                Status::Ok
            } else {
                Status::Refuted
            };
            Ok((report::properness(&poset, &verdict), status))
        }
        Command::Check {
            poset,
            derivation,
            probe,
        } => {
            let l = load_all(poset, derivation, probe)?;
            let verdict = check_lie_n_derivation(&l.derivation.spec, &l.algebra, l.n, &l.budget)
                .map_err(|e| CliError::Engine(e.to_string()))?;
            let status = if verdict.passed() {
                Status::Ok
            } else {
                Status::Refuted
            };
            Ok((report::check(&l.poset, &l.budget, l.n, l.derivation.ring, &verdict), status))
        }
        Command::Decompose {
            poset,
            derivation,
            probe,
        } => {
            let l = load_all(poset, derivation, probe)?;
            let map: SharedMap = Arc::new(l.derivation.spec.clone());
            match decompose(map, &l.algebra, l.n, &l.budget) {
                Ok(r) => {
                    let status = if r.decomposable() {
                        Status::Ok
                    } else {
                        Status::Refuted
                    };
                    Ok((to_pretty(&report::decomposition(&l.poset, &r)), status))
                }
                Err(DecomposeError::NotLieN { counterexample, .. }) => {
                    let lie = Verdict::Fail(counterexample);
                    let doc = report::rejected(&l.poset, l.derivation.ring, l.n, &l.budget, &lie);
                    Ok((to_pretty(&doc), Status::Refuted))
                }
                Err(e) => Err(CliError::Engine(e.to_string())),
            }
        }
        Command::Witness { poset, ring, n } => {
            let poset = load_poset(poset)?;
            admissible(*ring, *n)?;
            let algebra = Algebra::new(poset.preorder.clone(), *ring);
            match emit_witness(&algebra) {
                Ok(Some(w)) => Ok((to_pretty(&derivation_document(&w, *n, &poset)), Status::Ok)),
                Ok(None) => Ok((
                    "proper-capable: no non-proper Lie n-derivation exists\n".to_string(),
                    Status::Refuted,
                )),
                Err(e @ PropernessError::NoDerivation(_)) => Err(CliError::Document(e.to_string())),
                Err(e) => Err(CliError::Engine(e.to_string())),
            }
        }
        Command::Properize {
            poset,
            derivation,
            probe,
        } => {
            let l = load_all(poset, derivation, probe)?;
            let map: SharedMap = Arc::new(l.derivation.spec.clone());
            let r = match decompose(map, &l.algebra, l.n, &l.budget) {
                Ok(r) => r,
                Err(DecomposeError::NotLieN { counterexample, .. }) => {
                    let lie = Verdict::Fail(counterexample);
                    let doc = report::rejected(&l.poset, l.derivation.ring, l.n, &l.budget, &lie);
                    return Ok((to_pretty(&doc), Status::Refuted));
                }
                Err(e) => return Err(CliError::Engine(e.to_string())),
            };
            let outcome = properize(&r);
            let status = match &outcome {
                Ok(p) if p.kappa_verdict.passed() => Status::Ok,
                Ok(_) => Status::Refuted,
                Err(PropernessError::Map(_) | PropernessError::Verify(_)) => {
                    return Err(CliError::Engine(outcome.err().expect("error").to_string()))
                }
                Err(_) => Status::Refuted,
            };
            Ok((to_pretty(&report::properized(&l.poset, &r, &outcome)), status))
        }
    }
}

/// Runs the CLI on parsed arguments, writing the report; returns the exit status.
pub fn run(cli: &Cli) -> Status {
    match execute(&cli.command) {
        Ok((text, status)) => match &cli.out {
            Some(path) => match fs::write(path, text) {
                Ok(()) => status,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    Status::InputError
                }
            },
            None => {
                print!("{text}");
                status
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            Status::InputError
        }
    }
}
