use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use qenv_core::certificate::{certify, sha256_hex, TOOL_VERSION};
use qenv_core::cocycle::{
    extract_nontrivial_cocycle_with_cap, is_class_function_coboundary, symmetric_cocycle_system,
    symmetric_h2_with_cap, verify_cocycle, CocycleCheck, SymmetricCochain, DEFAULT_ORACLE_CAP,
};
use qenv_core::group::FiniteGroup;
use qenv_core::pquotient::{p_quotient_with, pc_derived_order, QuotientLimits};
use qenv_core::presentation::{envelope_presentation, envelope_raw_relator_count, Presentation};

const EXIT_ERROR: u8 = 1;
const EXIT_DISAGREEMENT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "qenv", version, about = "Certify nontrivial symmetric 2-cocycle classes of finite groups")]
struct Cli {
    /// Largest group a .perm file may generate.
    #[arg(long, global = true, default_value_t = 4096)]
    max_group_order: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OracleArgs {
    /// Refuse groups larger than this in the oracle.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Wall-clock budget for the oracle, in seconds.
    #[arg(long, default_value_t = 1800)]
    time_budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the quotient route and write a certificate.
    Certify {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 2)]
        prime: u32,
        #[arg(long, default_value_t = 3)]
        class: usize,
        /// Report path; `.json` selects JSON. Defaults to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also compute H^2_S directly and cross-check the verdict.
        #[arg(long)]
        with_oracle: bool,
        /// Write a non-coboundary symmetric cocycle here, if one exists.
        #[arg(long, requires = "with_oracle")]
        emit_cocycle: Option<PathBuf>,
        /// Shift the emitted cocycle by a constant so it vanishes on {1, h}.
        #[arg(long, requires = "emit_cocycle")]
        normalize_cocycle: bool,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Compute H^2_S(G, Q/Z) by exact linear algebra.
    Oracle {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the cocycle matrix M and coboundary matrix B to DIR in exchange format.
        #[arg(long, value_name = "DIR")]
        dump_system: Option<PathBuf>,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Print the order of the derived subgroup.
    Derived {
        #[arg(long)]
        group: PathBuf,
    },
    /// Write the enveloping group presentation as .fpres.
    Envelope {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a cochain dump against the cocycle identity.
    VerifyCocycle {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        cochain: PathBuf,
        /// Also decide whether the cochain is a class-function coboundary.
        #[arg(long)]
        check_coboundary: bool,
    },
    /// p-quotient of a presentation read from a .fpres file.
    Quotient {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long, default_value_t = 2)]
        prime: u32,
        #[arg(long, default_value_t = 3)]
        class: usize,
        /// Write the consistent pc presentation here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_ERROR, error }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Returns the group and the raw file contents.
fn load_group(path: &Path, max_order: usize) -> Result<(FiniteGroup, String)> {
    let text = read(path)?;
    let g = match path.extension().and_then(|e| e.to_str()) {
        Some("mtab") => FiniteGroup::parse_mtab(&text),
        Some("perm") => FiniteGroup::parse_perm(&text, max_order),
        _ => bail!("{}: expected a .mtab or .perm file", path.display()),
    }
    .with_context(|| format!("loading {}", path.display()))?;
    Ok((g, text))
}

/// Runs `f` on a worker thread and gives up after `seconds`.
fn with_budget<T: Send + 'static>(
    seconds: u64,
    f: impl FnOnce() -> Result<T> + Send + 'static,
) -> Result<T, Failure> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(f());
    });
    match rx.recv_timeout(Duration::from_secs(seconds)) {
        Ok(r) => Ok(r?),
        Err(mpsc::RecvTimeoutError::Timeout) => Err(Failure {
            code: EXIT_BUDGET,
            error: anyhow!("oracle stage: time budget of {}s exceeded", seconds),
        }),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(anyhow!("oracle stage: worker panicked").into()),
    }
}

#[derive(Serialize)]
struct OracleReport {
    group_order: usize,
    class_count: usize,
    oracle_invariant_factors: Vec<String>,
    tool_version: String,
    fixture_checksum: String,
}

impl OracleReport {
    fn to_text(&self) -> String {
        format!(
            "group_order: {}\nclass_count: {}\noracle_invariant_factors: [{}]\ntool_version: {}\nfixture_checksum: {}\n",
            self.group_order,
            self.class_count,
            self.oracle_invariant_factors.join(", "),
            self.tool_version,
            self.fixture_checksum
        )
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let max_order = cli.max_group_order;
    match cli.command {
        Command::Certify { group, prime, class, report, with_oracle, emit_cocycle, normalize_cocycle, oracle } => {
            let (g, text) = load_group(&group, max_order)?;
            let limits = QuotientLimits::from_env();
            let mut cert = certify(&g, text.as_bytes(), prime, class, &limits).map_err(anyhow::Error::from)?;
            cert.timestamp = Some(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
            info!("verdict {}", cert.verdict);
            if with_oracle {
                let cap = oracle.oracle_cap;
                let want_cocycle = emit_cocycle.is_some();
                let (h, alpha) = with_budget(oracle.time_budget, move || {
                    let h = symmetric_h2_with_cap(&g, cap)?;
                    let alpha = if want_cocycle && !h.is_trivial() {
                        extract_nontrivial_cocycle_with_cap(&g, cap)?
                    } else {
                        None
                    };
                    Ok((h, alpha))
                })?;
                cert.attach_oracle(&h);
                match (emit_cocycle, alpha) {
                    (Some(path), Some(alpha)) => {
                        let alpha = if normalize_cocycle { alpha.normalized() } else { alpha };
                        write(&path, &alpha.to_dump())?;
                        cert.cocycle_path = Some(path.display().to_string());
                    }
                    (Some(_), None) => eprintln!("H^2_S is trivial; no cocycle written"),
                    _ => {}
                }
            }
            match &report {
                Some(path) => {
                    let body = if is_json(path) { cert.to_json().map_err(anyhow::Error::from)? } else { cert.to_text() };
                    write(path, &body)?;
                    println!("verdict: {}", cert.verdict);
                }
                None => print!("{}", cert.to_text()),
            }
            if !cert.oracle_agrees() {
                return Err(Failure {
                    code: EXIT_DISAGREEMENT,
                    error: anyhow!("verdict NONTRIVIAL but the oracle found H^2_S trivial"),
                });
            }
        }
        Command::Oracle { group, report, dump_system, oracle } => {
            let (g, text) = load_group(&group, max_order)?;
            if let Some(dir) = &dump_system {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let (m, b) = symmetric_cocycle_system(&g);
                write(&dir.join("M.txt"), &m.to_exchange())?;
                write(&dir.join("B.txt"), &b.to_exchange())?;
            }
            let out = OracleReport {
                group_order: g.order(),
                class_count: g.conjugacy_classes().class_count(),
                oracle_invariant_factors: Vec::new(),
                tool_version: TOOL_VERSION.to_string(),
                fixture_checksum: sha256_hex(text.as_bytes()),
            };
            let cap = oracle.oracle_cap;
            let h = with_budget(oracle.time_budget, move || Ok(symmetric_h2_with_cap(&g, cap)?))?;
            let out = OracleReport {
                oracle_invariant_factors: h.invariant_factors.iter().map(|f| f.to_string()).collect(),
                ..out
            };
            match &report {
                Some(path) if is_json(path) => {
                    write(path, &(serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)? + "\n"))?
                }
                Some(path) => write(path, &out.to_text())?,
                None => {}
            }
            println!("oracle_invariant_factors: [{}]", out.oracle_invariant_factors.join(", "));
            println!("order: {}", h.order());
        }
        Command::Derived { group } => {
            let (g, _) = load_group(&group, max_order)?;
            println!("{}", g.derived_subgroup().len());
        }
        Command::Envelope { group, out } => {
            let (g, _) = load_group(&group, max_order)?;
            let p = envelope_presentation(&g);
            write(&out, &p.to_fpres())?;
            println!("generators: {}", p.generator_count());
            println!("raw_relators: {}", envelope_raw_relator_count(&g));
            println!("relators: {}", p.relators().len());
        }
        Command::VerifyCocycle { group, cochain, check_coboundary } => {
            let (g, _) = load_group(&group, max_order)?;
            let alpha = SymmetricCochain::parse_dump(g.order(), &read(&cochain)?)
                .with_context(|| format!("parsing {}", cochain.display()))?;
            match verify_cocycle(&g, &alpha).map_err(anyhow::Error::from)? {
                CocycleCheck::Cocycle => println!("COCYCLE"),
                CocycleCheck::NotCocycle { g, h, k } => println!("NOT_COCYCLE {} {} {}", g, h, k),
            }
            if check_coboundary {
                let cob = is_class_function_coboundary(&g, &alpha).map_err(anyhow::Error::from)?;
                println!("coboundary: {}", if cob { "yes" } else { "no" });
            }
        }
        Command::Quotient { presentation, prime, class, dump } => {
            let pres = Presentation::parse_fpres(&read(&presentation)?)
                .with_context(|| format!("parsing {}", presentation.display()))?;
            let (k, _) = p_quotient_with(&pres, prime, class, &QuotientLimits::from_env()).map_err(anyhow::Error::from)?;
            if let Some(path) = &dump {
                write(path, &k.to_dump())?;
            }
            println!("rank: {}", k.rank());
            println!("order: {}", k.order());
            println!("derived_order: {}", pc_derived_order(&k).map_err(anyhow::Error::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {:#}", error);
            ExitCode::from(code)
        }
    }
}
