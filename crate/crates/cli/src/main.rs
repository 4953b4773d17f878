//! Command-line surface for the invariant pipeline.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 unreadable or unparseable
//! input, 3 relation-closure budget exhausted.

use clap::{Parser, Subcommand, ValueEnum};
use lmo_core::associator::{phi, Letter};
use lmo_core::kontsevich::{check_z, ZContext};
use lmo_core::links::{parse_input, LinkInput};
use lmo_core::lmo::{omega_log, omega_n, theta_coefficient, SurgeryPresentation};
use lmo_core::scalars::{ReductionTable, TableEntry};
use lmo_core::spaces::SpaceError;
use lmo_core::Element;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lmo", version, about = "Exact surgery invariants of 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker count. Accepted for interface stability; evaluation is
    /// sequential, so the value does not affect the output.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Framed Kontsevich integral Ž(L) of the input link, to a degree cap.
    Z {
        file: String,
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Normalized surgery invariant Ω_n(M) for one n.
    Invariant {
        file: String,
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
    /// ω(M) = log Ω(M) assembled through a degree cap, with its θ coefficient.
    Omega {
        file: String,
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Print the zeta reduction table and the associator coefficients.
    Tables {
        #[arg(long, default_value_t = 4)]
        weight: u32,
    },
    /// Run the built-in acceptance checks.
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = cli.format;
    match cli.command {
        Command::Z { file, degree } => run(fmt, &file, |input| {
            let mut ctx = ZContext::new();
            let e = check_z(&input.diagram, degree, &mut ctx)?;
            Ok(Report::element("z", e, Vec::new()))
        }),
        Command::Invariant { file, n } => run(fmt, &file, |input| {
            let p = SurgeryPresentation::new(input.diagram, input.framings)?;
            let (sp, sm, s0) = p.linking_matrix()?.signature_counts();
            let mut ctx = ZContext::new();
            let e = omega_n(&p, n, &mut ctx)?;
            Ok(Report::element(
                "invariant",
                e,
                vec![
                    ("n".into(), serde_json::json!(n)),
                    ("sigma".into(), serde_json::json!([sp, sm, s0])),
                ],
            ))
        }),
        Command::Omega { file, degree } => run(fmt, &file, |input| {
            let p = SurgeryPresentation::new(input.diagram, input.framings)?;
            let mut ctx = ZContext::new();
            let e = omega_log(&p, degree, &mut ctx)?;
            let theta = theta_coefficient(&e).to_string();
            Ok(Report::element(
                "omega",
                e,
                vec![("theta_coefficient".into(), serde_json::json!(theta))],
            ))
        }),
        Command::Tables { weight } => {
            print_tables(fmt, weight);
            ExitCode::SUCCESS
        }
        Command::Selftest => selftest(),
    }
}

struct Report {
    command: &'static str,
    element: Element,
    extra: Vec<(String, serde_json::Value)>,
}

impl Report {
    fn element(command: &'static str, element: Element, extra: Vec<(String, serde_json::Value)>) -> Report {
        Report { command, element, extra }
    }
}

fn run(fmt: Format, path: &str, job: impl FnOnce(LinkInput) -> Result<Report, SpaceError>) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            return ExitCode::from(2);
        }
    };
    let input = match parse_input(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match job(input) {
        Ok(report) => {
            print_report(fmt, &report);
            ExitCode::SUCCESS
        }
        Err(SpaceError::BudgetExceeded { budget }) => {
            eprintln!("error: relation closure budget ({budget} rounds) exceeded");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_report(fmt: Format, r: &Report) {
    match fmt {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("command".into(), serde_json::json!(r.command));
            for (k, v) in &r.extra {
                obj.insert(k.clone(), v.clone());
            }
            obj.insert(
                "element".into(),
                serde_json::to_value(&r.element).expect("element serializes"),
            );
            println!("{}", serde_json::Value::Object(obj));
        }
        Format::Text => {
            for (k, v) in &r.extra {
                println!("{k}: {v}");
            }
            print_element_text(&r.element);
        }
    }
}

fn print_element_text(e: &Element) {
    println!(
        "degree cap {}, {} skeleton component(s), {} term(s)",
        e.degree_cap(),
        e.kinds().len(),
        e.len()
    );
    for (code, d, s) in e.terms() {
        let code_str: Vec<String> = code.iter().map(|x| x.to_string()).collect();
        println!("  deg {}  [{}]  {}", d.degree(), code_str.join(","), s);
    }
}

fn print_tables(fmt: Format, weight: u32) {
    let table = ReductionTable::shipped();
    let series = phi(weight, table);
    match fmt {
        Format::Json => {
            let zetas: Vec<serde_json::Value> = table
                .entries()
                .map(|(idx, entry)| {
                    let value = match entry {
                        TableEntry::Rational(r) => r.to_string(),
                        TableEntry::Gen(name) => name.clone(),
                    };
                    serde_json::json!({ "index": idx.entries(), "value": value })
                })
                .collect();
            let assoc: Vec<serde_json::Value> = series
                .terms()
                .map(|(w, c)| serde_json::json!({ "word": word_str(w), "coefficient": c.to_string() }))
                .collect();
            println!(
                "{}",
                serde_json::json!({ "command": "tables", "zeta_table": zetas, "associator": assoc })
            );
        }
        Format::Text => {
            println!("zeta reduction table (normalized by (2 pi i)^weight):");
            for (idx, entry) in table.entries() {
                let value = match entry {
                    TableEntry::Rational(r) => r.to_string(),
                    TableEntry::Gen(name) => name.clone(),
                };
                println!("  {idx} = {value}");
            }
            println!("associator coefficients through weight {weight}:");
            for (w, c) in series.terms() {
                println!("  {}  {}", word_str(w), c);
            }
        }
    }
}

fn word_str(w: &[Letter]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|l| match l {
            Letter::A => 'A',
            Letter::B => 'B',
        })
        .collect()
}

fn selftest() -> ExitCode {
    let mut failed = 0u32;
    for c in lmo_core::selftest::checks() {
        let start = std::time::Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => {
                print!("criterion {:>2} ({}): pass [{secs:.1}s]", c.id, c.name);
                if let Some(n) = note {
                    print!(": {n}");
                }
                println!();
            }
            Err(msg) => {
                println!("criterion {:>2} ({}): FAIL [{secs:.1}s]: {msg}", c.id, c.name);
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::from(1)
    }
}
