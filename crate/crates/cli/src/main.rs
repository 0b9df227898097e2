mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::{ConnectionChoice, Outcome};
use config::{Flags, Format, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] kzcrystal::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use kzcrystal::Error as E;
        match self {
            CliError::Lib(E::NotOnto(_) | E::NoMatch(_) | E::DetNotUnit) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "kzcrystal", version, about = "Congruence checks for hyperelliptic KZ equations over Z/p^s")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The hypergeometric solutions Q^{s,l}, symbolic or at --point.
    Qsol,
    /// KZ residuals of Q^{s,l} (or of a vector read from --solution) mod p^s.
    VerifyKz {
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Q^{s+1,l} mod p^s lies in the span of the Q^{s,m} at sampled points.
    LimitCheck,
    /// Gauss-Manin sign measurement and duality with KZ.
    GmCheck,
    /// Poincare pairing and the Lagrangian congruences.
    Pairing,
    /// Hasse-Witt matrix, symbolic or at --point.
    HasseWitt,
    /// The map C_s, symbolic (with kernel flatness) or at --point.
    CartierMap,
    /// C_s onto, exact forms killed, kernel flat.
    UnitRootCheck,
    /// Iterate the Cartier operator on a one-form or check a witness.
    Cartier {
        /// Number of variables t_1..t_n.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        iterate: usize,
        #[arg(long)]
        input: PathBuf,
    },
    /// p-curvature of the KZ or Gauss-Manin connection.
    PCurvature {
        #[arg(long, value_enum, default_value = "kz")]
        connection: ConnectionChoice,
    },
    /// Local flat sections at an ordinary point: integral lattice and matching.
    LocalSolve {
        #[arg(long = "match")]
        with_match: bool,
    },
    /// Every check above for one (p, s, g).
    Report,
}

type Section = (&'static str, fn(&Params) -> Result<Outcome, CliError>);

const REPORT_SECTIONS: [Section; 8] = [
    ("verify-kz", |p| commands::verify_kz(p, None)),
    ("limit-check", commands::limit_check),
    ("gm-check", commands::gm_check),
    ("hasse-witt", commands::hasse_witt_cmd),
    ("unit-root-check", commands::unit_root_check),
    ("pairing", commands::pairing),
    ("p-curvature", |p| commands::p_curvature_cmd(p, ConnectionChoice::Kz)),
    ("local-solve", |p| commands::local_solve(p, true)),
];

fn run_report(par: &Params, timings: &mut Vec<(String, u128)>) -> Result<Outcome, CliError> {
    let mut sections = serde_json::Map::new();
    let mut verdicts = Vec::new();
    for (name, f) in REPORT_SECTIONS {
        let t = Instant::now();
        let out = f(par)?;
        timings.push((name.to_string(), t.elapsed().as_millis()));
        for mut v in out.verdicts {
            v.check = format!("{name}/{}", v.check);
            verdicts.push(v);
        }
        sections.insert(name.into(), out.report);
    }
    Ok(Outcome {
        report: Value::Object(sections),
        verdicts,
        matrix: None,
    })
}

fn manifest(name: &str, par: &Params, out: &Outcome, timings: &[(String, u128)]) -> Value {
    let mut m = json!({
        "tool": "kzcrystal",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "params": {
            "p": par.p,
            "s": par.s,
            "g": par.g,
            "point": par.point,
            "samples": par.samples,
            "degree": par.degree,
            "seed": par.seed,
        },
        "sigma": kzcrystal::derham::SIGMA,
        "verdicts": out.verdicts.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        "pass": out.verdicts.iter().all(|v| v.pass),
    });
    if par.timings {
        m["timings_ms"] = timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>().into();
    }
    m
}

fn csv(matrix: &[Vec<String>]) -> String {
    matrix.iter().map(|r| r.join(",")).collect::<Vec<_>>().join("\n")
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let par = cli.flags.resolve()?;
    let start = Instant::now();
    let mut timings = Vec::new();
    let (name, out) = match &cli.command {
        Command::Qsol => ("qsol", commands::qsol(&par)?),
        Command::VerifyKz { solution } => ("verify-kz", commands::verify_kz(&par, solution.as_deref())?),
        Command::LimitCheck => ("limit-check", commands::limit_check(&par)?),
        Command::GmCheck => ("gm-check", commands::gm_check(&par)?),
        Command::Pairing => ("pairing", commands::pairing(&par)?),
        Command::HasseWitt => ("hasse-witt", commands::hasse_witt_cmd(&par)?),
        Command::CartierMap => ("cartier-map", commands::cartier_map(&par)?),
        Command::UnitRootCheck => ("unit-root-check", commands::unit_root_check(&par)?),
        Command::Cartier { n, iterate, input } => ("cartier", commands::cartier_cmd(&par, *n, *iterate, input)?),
        Command::PCurvature { connection } => ("p-curvature", commands::p_curvature_cmd(&par, *connection)?),
        Command::LocalSolve { with_match } => ("local-solve", commands::local_solve(&par, *with_match)?),
        Command::Report => ("report", run_report(&par, &mut timings)?),
    };
    timings.push(("total".into(), start.elapsed().as_millis()));
    let pass = out.verdicts.iter().all(|v| v.pass);
    let text = match par.format {
        Format::Json => {
            let doc = json!({"manifest": manifest(name, &par, &out, &timings), "report": out.report});
            serde_json::to_string_pretty(&doc).expect("serializable")
        }
        Format::Csv => match &out.matrix {
            Some(m) => csv(m),
            None => return Err(CliError::Usage(format!("`{name}` has no matrix output; use --format json"))),
        },
    };
    Ok((text, pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, pass)) => {
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{text}").is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
