//! Command-line front end: structure checking, classification, encoding,
//! decoding, formula evaluation, reductions, sample generation, and the
//! deterministic self-check battery.
//!
//! Exit codes: `0` for success (model, isomorphic, true verdict, all checks
//! passed), `1` for a well-formed negative outcome (non-model, not
//! isomorphic, false verdict, failing checks), `2` for usage, parse, or I/O
//! errors.

use std::fs;
use std::io::Read as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ulmforge::corpus::{scramble_structure, CorpusSpec};
use ulmforge::logic::{
    eval_divisible_with_cap, report_phi_exact, report_phi_geq, report_psi, FormulaId,
};
use ulmforge::ordinal::ExtendedCount;
use ulmforge::pgroup::ExplicitPGroup;
use ulmforge::reduction::borel_reduce;
use ulmforge::selftest::run_all;
use ulmforge::tp::{check_axioms, classify, decode, encode, structure_iso, LpStructure};
use ulmforge::ulm::profile_of;
use ulmforge::Error;

/// Exact computation with abelian p-groups and their relational encodings.
#[derive(Parser)]
#[command(name = "ulmforge", version, about, max_term_width = 100)]
struct Cli {
    /// Output format (only `text` is available)
    #[arg(long, global = true, default_value = "text", value_parser = ["text"])]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the eight axiom schemas on a structure read from a file (`-` for stdin)
    Check {
        /// Path to the structure text, or `-` for stdin
        path: String,
    },
    /// Print the classification profile of a group
    Ulm {
        /// Group text, e.g. "p=2; cyclic=[2,1]; divisible=0"
        group: String,
    },
    /// Decide whether two structures are isomorphic
    Iso {
        /// Path to the first structure
        left: String,
        /// Path to the second structure
        right: String,
    },
    /// Encode a group as a structure, with optional unlabeled free points
    Encode {
        /// Group text; must be finite
        group: String,
        /// Number of unlabeled extra points
        #[arg(long, default_value_t = 0)]
        free: u64,
    },
    /// Decode a structure back to its group and free-point count
    Decode {
        /// Path to the structure text, or `-` for stdin
        path: String,
    },
    /// Map a structure to its invariant-shifted group
    Reduce {
        /// Path to the structure text, or `-` for stdin
        path: String,
    },
    /// Evaluate a formula on a group and print the report
    Eval {
        /// Group text
        group: String,
        /// One of `psi[a]`, `phi[a,>=n]`, `phi[a,=n]`, `phi[a,=w]`,
        /// `divrank[=n]`, `divrank[inf]`; ordinals like `0`, `3`, `w`, `w+1`
        formula: String,
        /// Element text, required by `psi` formulas
        #[arg(long)]
        element: Option<String>,
        /// Denominator-exponent bound for quantifiers over divisible parts
        #[arg(long, default_value_t = 3)]
        denom_bound: u32,
        /// Truncation cap for `divrank[inf]`
        #[arg(long, default_value_t = 8)]
        cap: u64,
    },
    /// Print scrambled sample structures drawn from the built-in corpus
    Gen {
        /// Primes to draw from, comma separated
        #[arg(long = "p", value_delimiter = ',', default_values_t = vec![2u64, 3])]
        primes: Vec<u64>,
        /// Seed (falls back to ULMFORGE_SEED, then 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Largest group order to draw from
        #[arg(long, default_value_t = 16)]
        max_size: u64,
        /// Largest free-point count
        #[arg(long, default_value_t = 2)]
        max_m: u64,
        /// Number of structures to print, separated by `---` lines
        #[arg(long, default_value_t = 4)]
        samples: u64,
    },
    /// Run the deterministic self-check battery and print its ledger
    Selftest {
        /// Primes the corpus ranges over, comma separated
        #[arg(long = "p", value_delimiter = ',', default_values_t = vec![2u64, 3])]
        primes: Vec<u64>,
        /// Seed (falls back to ULMFORGE_SEED, then 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Elements sampled per group in the formula suite
        #[arg(long, default_value_t = 32)]
        samples: u64,
        /// Append known-damaged inputs to demonstrate failure reporting
        #[arg(long)]
        inject_defects: bool,
    },
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    debug_assert_eq!(cli.format, "text");
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Restore the default SIGPIPE disposition so that piping output into a
/// consumer that closes early (`gen | head`) ends the process quietly
/// instead of panicking on a closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Check { path } => {
            let m = parse_structure(&path)?;
            let report = check_axioms(&m);
            println!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Ulm { group } => {
            let g = parse_group(&group)?;
            println!("{}", profile_of(&g));
            Ok(0)
        }
        Command::Iso { left, right } => {
            let a = parse_structure(&left)?;
            let b = parse_structure(&right)?;
            match structure_iso(&a, &b) {
                Some(map) => {
                    let body: Vec<String> = map.iter().map(|y| y.to_string()).collect();
                    println!("isomorphic: [{}]", body.join(","));
                    Ok(0)
                }
                None => {
                    println!("not isomorphic");
                    Ok(1)
                }
            }
        }
        Command::Encode { group, free } => {
            let g = parse_group(&group)?;
            let m = encode(&g, free).map_err(|e| e.to_string())?;
            println!("{m}");
            Ok(0)
        }
        Command::Decode { path } => {
            let m = parse_structure(&path)?;
            match decode(&m) {
                Ok((table, free)) => {
                    let g = classify(&table, m.p()).map_err(|e| e.to_string())?;
                    println!("group: {g}");
                    println!("free: {free}");
                    Ok(0)
                }
                Err(Error::NotAModel(which)) => {
                    println!("not a model: failing axioms {which}");
                    Ok(1)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Reduce { path } => {
            let m = parse_structure(&path)?;
            match borel_reduce(&m) {
                Ok(g) => {
                    println!("{g}");
                    Ok(0)
                }
                Err(Error::NotAModel(which)) => {
                    println!("not a model: failing axioms {which}");
                    Ok(1)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Eval { group, formula, element, denom_bound, cap } => {
            let g = parse_group(&group)?;
            let f: FormulaId = formula.parse().map_err(|e: Error| e.to_string())?;
            let report = match f {
                FormulaId::Psi(alpha) => {
                    let text =
                        element.ok_or_else(|| "psi formulas need --element".to_string())?;
                    let x = g.parse_element(&text).map_err(|e| e.to_string())?;
                    report_psi(&g, &alpha, &x)
                }
                FormulaId::PhiGeq(alpha, n) => report_phi_geq(&g, &alpha, n),
                FormulaId::PhiExact(alpha, n) => report_phi_exact(&g, &alpha, &n),
                FormulaId::DivRankExact(n) => {
                    eval_divisible_with_cap(&g, &ExtendedCount::Finite(n), denom_bound, cap)
                }
                FormulaId::DivRankInfinite => {
                    eval_divisible_with_cap(&g, &ExtendedCount::Omega, denom_bound, cap)
                }
            }
            .map_err(|e| e.to_string())?;
            println!("{report}");
            Ok(if report.verdict { 0 } else { 1 })
        }
        Command::Gen { primes, seed, max_size, max_m, samples } => {
            let primes = validated_primes(primes)?;
            let spec =
                CorpusSpec { primes, seed: resolve_seed(seed), ..CorpusSpec::default() };
            let mut rng = spec.rng();
            let groups = spec.finite_groups(max_size);
            let mut blocks: Vec<String> = Vec::new();
            while (blocks.len() as u64) < samples && !groups.is_empty() {
                'refill: for g in &groups {
                    for m in 0..=max_m {
                        if blocks.len() as u64 == samples {
                            break 'refill;
                        }
                        let s = encode(g, m).map_err(|e| e.to_string())?;
                        blocks.push(scramble_structure(&s, &mut rng).to_string());
                    }
                }
            }
            println!("{}", blocks.join("\n---\n"));
            Ok(0)
        }
        Command::Selftest { primes, seed, samples, inject_defects } => {
            let primes = validated_primes(primes)?;
            let spec = CorpusSpec {
                primes,
                seed: resolve_seed(seed),
                samples,
                ..CorpusSpec::default()
            };
            let lines = run_all(&spec, inject_defects);
            for line in &lines {
                println!("{line}");
            }
            let failed = lines.iter().filter(|l| !l.pass).count();
            println!("passed {} of {}", lines.len() - failed, lines.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))
    }
}

fn parse_structure(path: &str) -> Result<LpStructure, String> {
    read_input(path)?.parse::<LpStructure>().map_err(|e| e.to_string())
}

fn parse_group(text: &str) -> Result<ExplicitPGroup, String> {
    text.parse::<ExplicitPGroup>().map_err(|e| e.to_string())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("ULMFORGE_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

/// The corpus builder asserts primality internally, so reject bad primes
/// here with a proper usage error instead.
fn validated_primes(primes: Vec<u64>) -> Result<Vec<u64>, String> {
    for &p in &primes {
        ExplicitPGroup::new(p, vec![1], 0).map_err(|e| e.to_string())?;
    }
    Ok(primes)
}
