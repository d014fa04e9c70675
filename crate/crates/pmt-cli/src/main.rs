//! Command-line front end: theory reports, lattice spectra, omitting search.
//!
//! Exit codes: 0 success, 2 parse error, 3 element cap exceeded,
//! 4 distributivity violation, 5 supported omitting target.

use clap::{Parser, Subcommand, ValueEnum};
use pmt::dlattice::{DLattice, LatticeError, DEFAULT_ELEMENT_CAP};
use pmt::semantics::parse_theory;
use pmt::spectrum::spec;
use pmt::syntax::parse_formula;
use pmt::typespace::{TheoryContext, TypespaceError};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::exit;

#[derive(Parser)]
#[command(name = "pmt", about = "Positive model theory workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the type spaces of a theory file (.pmt) and print all checker
    /// verdicts.
    Report {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        nmax: usize,
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long = "max-model-size", default_value_t = 4)]
        max_model_size: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the spectrum of a lattice file (.lat, JSON meet/join tables).
    Spectrum {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a positively closed model omitting the given Pi-types.
    Omit {
        input: PathBuf,
        /// Arity of the targets.
        #[arg(long, default_value_t = 1)]
        arity: usize,
        /// Positive formulas to negate; may be repeated. All targets form a
        /// single Pi-type.
        #[arg(long = "target")]
        targets: Vec<String>,
        #[arg(long, default_value_t = 2)]
        nmax: usize,
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long = "max-model-size", default_value_t = 4)]
        max_model_size: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ! {
    eprintln!("error: {msg}");
    exit(code)
}

fn element_cap() -> usize {
    match std::env::var("PMT_ELEMENT_CAP") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 2 => n,
            _ => fail(2, format!("PMT_ELEMENT_CAP must be an integer >= 2, got {v:?}")),
        },
        Err(_) => DEFAULT_ELEMENT_CAP,
    }
}

fn read_input(path: &PathBuf) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| fail(2, format!("cannot read {}: {e}", path.display())))
}

fn emit(output: &Option<PathBuf>, artifact: &str) {
    match output {
        Some(path) => std::fs::write(path, artifact)
            .unwrap_or_else(|e| fail(1, format!("cannot write {}: {e}", path.display()))),
        None => print!("{artifact}"),
    }
}

fn build_ctx(text: &str, nmax: usize, budget: usize) -> TheoryContext {
    let class = parse_theory(text).unwrap_or_else(|e| fail(2, e));
    TheoryContext::build_with_cap(class, nmax, budget, element_cap()).unwrap_or_else(|e| match e {
        TypespaceError::CapExceeded { .. } => fail(3, e),
        other => fail(1, other),
    })
}

#[derive(Deserialize)]
struct LatFile {
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
}

fn main() {
    match Cli::parse().cmd {
        Cmd::Report {
            input,
            nmax,
            budget,
            max_model_size: _,
            format,
            output,
        } => {
            let ctx = build_ctx(&read_input(&input), nmax, budget);
            let report = ctx.report().unwrap_or_else(|e| fail(1, e));
            let artifact = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
                    s.push('\n');
                    s
                }
                Format::Text => text_report(&ctx),
                Format::Dot => {
                    let mut s = String::new();
                    for n in 0..=ctx.n_max() {
                        s.push_str(&ctx.type_space(n).unwrap().to_dot(&format!("S{n}")));
                    }
                    s
                }
            };
            emit(&output, &artifact);
        }
        Cmd::Spectrum {
            input,
            format,
            output,
        } => {
            let lat: LatFile = serde_json::from_str(&read_input(&input))
                .unwrap_or_else(|e| fail(2, format!("invalid lattice file: {e}")));
            let l = DLattice::from_tables(lat.meet, lat.join).unwrap_or_else(|e| match e {
                LatticeError::IdentityViolated { .. } => fail(4, e),
                other => fail(2, other),
            });
            let s = spec(&l);
            let artifact = match format {
                Format::Dot => s.to_dot("spectrum"),
                Format::Json => {
                    let mut out = serde_json::to_string_pretty(&s.report()).expect("serializable");
                    out.push('\n');
                    out
                }
                Format::Text => {
                    let r = s.report();
                    let mut out = String::new();
                    let _ = writeln!(out, "lattice elements: {}", r.lattice_size);
                    let _ = writeln!(out, "points: {}", r.points.len());
                    let _ = writeln!(out, "components: {}", r.components.len());
                    let _ = writeln!(
                        out,
                        "t0: {}  sober: {}  hausdorff: {}",
                        r.t0, r.sober, r.hausdorff
                    );
                    out
                }
            };
            emit(&output, &artifact);
        }
        Cmd::Omit {
            input,
            arity,
            targets,
            nmax,
            budget,
            max_model_size,
            output,
        } => {
            let ctx = build_ctx(&read_input(&input), nmax, budget);
            let formulas: Vec<_> = targets
                .iter()
                .map(|t| {
                    parse_formula(t, &ctx.class().sig).unwrap_or_else(|e| fail(2, e))
                })
                .collect();
            let pi = ctx
                .pi_type_from_formulas(arity, &formulas)
                .unwrap_or_else(|e| fail(2, e));
            let target_list = if formulas.is_empty() { vec![] } else { vec![pi] };
            match ctx.omitting_search(&target_list, max_model_size) {
                Ok(Some(m)) => emit(&output, &m.to_dsl("found")),
                Ok(None) => emit(&output, "not found within bound\n"),
                Err(TypespaceError::SupportedTarget { support }) => fail(
                    5,
                    format!("target has support {support}; it cannot be omitted"),
                ),
                Err(e) => fail(1, e),
            }
        }
    }
}

fn text_report(ctx: &TheoryContext) -> String {
    let report = ctx.report().expect("already built");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "window: n_max={} budget={} stabilized={}",
        report.n_max, report.budget, report.stabilized
    );
    let _ = writeln!(out, "jcp: {}", report.jcp);
    for a in &report.arities {
        let amalgamation = if a.amalgamation.disjoint {
            "true".to_string()
        } else {
            let w = a.amalgamation.witness.as_ref().unwrap();
            format!(
                "false (point {} shared by components of {} and {})",
                w.shared_point, w.generic_a, w.generic_b
            )
        };
        let _ = writeln!(
            out,
            "n={}: lattice={} points={} pmc={} amalgamation={} countcat={} dense={}",
            a.arity,
            a.lattice_size,
            a.point_count,
            a.hausdorff_pmc,
            amalgamation,
            a.countcat_condition,
            a.somewhere_dense_density
        );
    }
    for m in &report.models {
        let _ = writeln!(
            out,
            "model {}: pc={} atomic={} prime={}",
            m.name, m.positively_closed, m.atomic, m.prime
        );
    }
    out
}
