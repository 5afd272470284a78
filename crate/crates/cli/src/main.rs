//! Command-line front end: typecheck, elaborate, and run programs,
//! print the built-in relation tables, and drive the property suites.
//!
//! Exit codes: 0 success; 1 type error, failed suite, or exhausted step
//! budget; 2 parse error; 3 the program ran to matchfail.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gradsum_core::elaborate::{elaborate, ty_trans, Mode};
use gradsum_core::harness::{run_suite, FragmentFilter, GenConfig, SuiteReport};
use gradsum_core::target::evaluate;
use gradsum_core::typecheck::{check, synth, synth_dynamic, synth_static, BiDerivation, TypeError};
use gradsum_core::{
    cast_class, dcons_sum, parse_expr_with_spans, parse_type, subsum, sum_precision, Ctx, SpanTree,
    StepTrace, SumCon, TargetSum, Verdict,
};

#[derive(Parser)]
#[command(
    name = "gradsum",
    version,
    about = "A gradual sums calculus",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print one of the built-in relation tables.
    Relations {
        /// Which table to print.
        #[arg(long, value_enum)]
        table: Table,
        /// Print the table as JSON instead of aligned text.
        #[arg(long)]
        json: bool,
    },
    /// Typecheck a program: against --type if given, else by synthesis.
    Check {
        file: PathBuf,
        /// Type to check the program against.
        #[arg(long = "type", value_name = "TYPE")]
        ty: Option<String>,
        /// Dump the derivation tree in the given format.
        #[arg(long, value_enum, value_name = "FORMAT")]
        emit_derivation: Option<DerivationFormat>,
    },
    /// Synthesize and print a program's type.
    Synth {
        file: PathBuf,
        /// Dump the derivation tree in the given format.
        #[arg(long, value_enum, value_name = "FORMAT")]
        emit_derivation: Option<DerivationFormat>,
    },
    /// Typecheck a program under one of the sublanguage checkers.
    Fragment {
        file: PathBuf,
        #[command(flatten)]
        pick: FragmentPick,
    },
    /// Translate a program to the cast calculus.
    Elaborate {
        file: PathBuf,
        /// Insert a cast at every coercion site, not only failable ones.
        #[arg(long)]
        saturate: bool,
        /// Output format.
        #[arg(long, value_enum, default_value_t = EmitFormat::Target)]
        emit: EmitFormat,
    },
    /// Elaborate a program and evaluate the result.
    Run {
        file: PathBuf,
        /// Give up after this many steps.
        #[arg(long, value_name = "N", default_value_t = 1_000_000)]
        max_steps: usize,
        /// Print every step with the rule that drove it.
        #[arg(long)]
        trace: bool,
        /// Insert a cast at every coercion site, not only failable ones.
        #[arg(long)]
        saturate: bool,
    },
    /// Run one of the property suites and report failures.
    Fuzz {
        /// Suite name; see the error message for the list.
        #[arg(long)]
        suite: String,
        /// Maximum generated program size.
        #[arg(long, value_name = "N")]
        size: Option<usize>,
        /// Number of generated programs.
        #[arg(long, value_name = "K")]
        count: Option<usize>,
        /// Generator seed.
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        /// Depth of the type universe for goals and annotations.
        #[arg(long, value_name = "D")]
        depth: Option<usize>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    /// Subsumption on the eight sum constructors.
    Subsum,
    /// The imprecision order on the eight sum constructors.
    Precision,
    /// Directed consistency on the eight sum constructors.
    DconsSum,
    /// Safety class of each cast between target constructors.
    CastClass,
}

#[derive(Clone, Copy, ValueEnum)]
enum DerivationFormat {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    /// Concrete target syntax.
    Target,
    /// Term, source type, and translated type as one JSON object.
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FragmentPick {
    /// Use the committed-sums checker (+, +1, +2 only).
    #[arg(long = "static")]
    is_static: bool,
    /// Use the unknown-sums checker (+? only).
    #[arg(long)]
    dynamic: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Relations { table, json } => {
            print_table(table, json);
            Ok(0)
        }
        Cmd::Check {
            file,
            ty,
            emit_derivation,
        } => {
            let (expr, spans, src) = load(&file)?;
            let Some(spans) = spans else { return Ok(2) };
            let goal = match ty.map(|t| parse_type(&t)).transpose() {
                Ok(goal) => goal,
                Err(e) => {
                    eprintln!("--type: {e}");
                    return Ok(2);
                }
            };
            let result = match &goal {
                Some(goal) => check(&Ctx::empty(), &expr, goal),
                None => synth(&Ctx::empty(), &expr),
            };
            report_typing(&file, &src, &spans, result, emit_derivation)
        }
        Cmd::Synth {
            file,
            emit_derivation,
        } => {
            let (expr, spans, src) = load(&file)?;
            let Some(spans) = spans else { return Ok(2) };
            let result = synth(&Ctx::empty(), &expr);
            report_typing(&file, &src, &spans, result, emit_derivation)
        }
        Cmd::Fragment { file, pick } => {
            let (expr, spans, src) = load(&file)?;
            let Some(spans) = spans else { return Ok(2) };
            let frag_synth = if pick.is_static {
                synth_static
            } else {
                synth_dynamic
            };
            report_typing(&file, &src, &spans, frag_synth(&Ctx::empty(), &expr), None)
        }
        Cmd::Elaborate {
            file,
            saturate,
            emit,
        } => {
            let (expr, spans, src) = load(&file)?;
            let Some(spans) = spans else { return Ok(2) };
            let d = match synth(&Ctx::empty(), &expr) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{}", type_error_line(&file, &src, &spans, &e));
                    return Ok(1);
                }
            };
            let mode = if saturate {
                Mode::Saturating
            } else {
                Mode::Standard
            };
            let m = elaborate(&d, mode);
            match emit {
                EmitFormat::Target => println!("{m}"),
                EmitFormat::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "mode": match mode {
                            Mode::Standard => "standard",
                            Mode::Saturating => "saturating",
                        },
                        "source_type": d.ty.to_string(),
                        "target_type": ty_trans(&d.ty).to_string(),
                        "term": m.to_string(),
                    }))?
                ),
            }
            Ok(0)
        }
        Cmd::Run {
            file,
            max_steps,
            trace,
            saturate,
        } => {
            let (expr, spans, src) = load(&file)?;
            let Some(spans) = spans else { return Ok(2) };
            let d = match synth(&Ctx::empty(), &expr) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{}", type_error_line(&file, &src, &spans, &e));
                    return Ok(1);
                }
            };
            let mode = if saturate {
                Mode::Saturating
            } else {
                Mode::Standard
            };
            let m = elaborate(&d, mode);
            let (verdict, steps) = evaluate(&m, max_steps, trace);
            if let Some(steps) = steps {
                print_trace(&steps);
            }
            match verdict {
                Verdict::Value(v) => {
                    println!("{v}");
                    Ok(0)
                }
                Verdict::Matchfail => {
                    println!("matchfail");
                    Ok(3)
                }
                Verdict::BudgetExceeded => {
                    eprintln!("no value after {max_steps} steps");
                    Ok(1)
                }
            }
        }
        Cmd::Fuzz {
            suite,
            size,
            count,
            seed,
            depth,
            json,
        } => {
            let mut cfg = GenConfig::default();
            if let Some(size) = size {
                cfg.max_size = size;
            }
            if let Some(count) = count {
                cfg.count = count;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(depth) = depth {
                cfg.type_depth = depth;
            }
            cfg.fragment = FragmentFilter::Full;
            let report = run_suite(&suite, &cfg).map_err(|e| anyhow::anyhow!(e))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_report(&report);
            }
            Ok(if report.ok() { 0 } else { 1 })
        }
    }
}

// ======================================================================
// File loading and error reporting
// ======================================================================

/// Read and parse a source file. A parse diagnostic is printed here;
/// the caller sees `None` spans and should exit 2.
fn load(file: &Path) -> anyhow::Result<(gradsum_core::Expr, Option<SpanTree>, String)> {
    let src = std::fs::read_to_string(file).with_context(|| file.display().to_string())?;
    match parse_expr_with_spans(&src) {
        Ok((expr, spans)) => Ok((expr, Some(spans), src)),
        Err(e) => {
            eprintln!("{}:{e}", file.display());
            Ok((gradsum_core::Expr::UnitVal, None, src))
        }
    }
}

/// `FILE:line:col: message`, resolving the error's expression path to a
/// source position.
fn type_error_line(file: &Path, _src: &str, spans: &SpanTree, e: &TypeError) -> String {
    let span = spans.at_path(&e.path).map(|n| n.span).unwrap_or(spans.span);
    format!(
        "{}:{}:{}: type error: {e}",
        file.display(),
        span.start_line,
        span.start_col
    )
}

fn report_typing(
    file: &Path,
    src: &str,
    spans: &SpanTree,
    result: Result<BiDerivation, TypeError>,
    emit: Option<DerivationFormat>,
) -> anyhow::Result<u8> {
    match result {
        Ok(d) => {
            match emit {
                Some(DerivationFormat::Json) => {
                    println!("{}", serde_json::to_string_pretty(&d.to_json())?)
                }
                None => println!("{}", d.ty),
            }
            Ok(0)
        }
        Err(e) => {
            eprintln!("{}", type_error_line(file, src, spans, &e));
            Ok(1)
        }
    }
}

// ======================================================================
// Tables
// ======================================================================

fn print_table(table: Table, as_json: bool) {
    match table {
        Table::Subsum => print_con_table("subsum", as_json, subsum),
        Table::Precision => print_con_table("precision", as_json, sum_precision),
        Table::DconsSum => print_con_table("dcons-sum", as_json, dcons_sum),
        Table::CastClass => print_cast_table(as_json),
    }
}

fn print_con_table(name: &str, as_json: bool, rel: impl Fn(SumCon, SumCon) -> bool) {
    if as_json {
        let rows: serde_json::Map<String, serde_json::Value> = SumCon::ALL
            .iter()
            .map(|a| {
                let cols: serde_json::Map<String, serde_json::Value> = SumCon::ALL
                    .iter()
                    .map(|b| (b.token().to_string(), rel(*a, *b).into()))
                    .collect();
                (a.token().to_string(), cols.into())
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "table": name, "rows": rows })).unwrap()
        );
        return;
    }
    println!("{name} (row, column):");
    print!("{:>5}", "");
    for b in SumCon::ALL {
        print!("{:>5}", b.token());
    }
    println!();
    for a in SumCon::ALL {
        print!("{:>5}", a.token());
        for b in SumCon::ALL {
            print!("{:>5}", if rel(a, b) { "x" } else { "." });
        }
        println!();
    }
}

fn print_cast_table(as_json: bool) {
    if as_json {
        let rows: serde_json::Map<String, serde_json::Value> = TargetSum::ALL
            .iter()
            .map(|a| {
                let cols: serde_json::Map<String, serde_json::Value> = TargetSum::ALL
                    .iter()
                    .map(|b| (b.token().to_string(), cast_class(*a, *b).to_string().into()))
                    .collect();
                (a.token().to_string(), cols.into())
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "table": "cast-class", "rows": rows })).unwrap()
        );
        return;
    }
    println!("cast-class (<row => column>):");
    print!("{:>4}", "");
    for b in TargetSum::ALL {
        print!("{:>11}", b.token());
    }
    println!();
    for a in TargetSum::ALL {
        print!("{:>4}", a.token());
        for b in TargetSum::ALL {
            print!("{:>11}", cast_class(a, b).to_string());
        }
        println!();
    }
}

// ======================================================================
// Traces and reports
// ======================================================================

fn print_trace(trace: &StepTrace) {
    println!("    {}", trace.initial);
    for (rule, term) in &trace.steps {
        println!("--> {term}    [{}]", rule.as_str());
    }
}

fn print_report(r: &SuiteReport) {
    println!(
        "suite {}: {} cases, {} failures, {} ms",
        r.suite,
        r.cases,
        r.failures.len(),
        r.wall_ms
    );
    for f in &r.failures {
        println!(
            "  FAIL {} (case {}, seed {}):\n    {}\n    {}",
            f.property, f.case_index, f.seed, f.program, f.detail
        );
    }
    if !r.coverage.0.is_empty() {
        println!("  coverage:");
        for (k, v) in &r.coverage.0 {
            println!("    {k:<32} {v}");
        }
    }
    println!("{}", if r.ok() { "ok" } else { "FAILED" });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_declares_consistent_arguments() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
