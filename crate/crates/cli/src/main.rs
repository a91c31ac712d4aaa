use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use globaldef::definable::{Membership, SetExpr};
use globaldef::ff::FqTable;
use globaldef::fgring::{build_ring_definition, FgRingDesc};
use globaldef::formula::{
    build_complement_union, dualize, eval_fq, eval_global, fq_defined_set, parse_in, to_diophantine, Ambient,
    Formula, GlobalEval, Truth,
};
use globaldef::place::{format_places, parse_places};
use globaldef::quaternion::{is_nonreal, ramification_set, QuaternionDesc};
use globaldef::suites::{run_suite, Outcome, SuiteConfig, SUITES};
use globaldef::synthesis::synthesize;
use globaldef::{FieldDesc, FieldElement};

const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "globaldef")]
#[command(about = "Quaternion ramification, S-integer definitions and their verification")]
#[command(version)]
struct Cli {
    /// Ambient global field: Q (default) or F<p>(T)
    #[arg(long, global = true)]
    field: Option<String>,

    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ramification set of a quaternion algebra, e.g. "CL(2;5)" or "AS[1;T]"
    Ramify { quaternion: String },
    /// Membership of elements in a set expression, e.g. "OS[{q:5}]" 1/5
    Member {
        set: String,
        #[arg(required = true)]
        elements: Vec<String>,
    },
    /// Synthesize (pi, u, c) for a set of places of odd size
    Synthesize {
        #[arg(long = "S")]
        places: String,
    },
    /// Emit a formula for the complement union, or O_S with --universal
    Emit {
        #[arg(long = "S")]
        places: String,
        #[command(flatten)]
        shape: EmitShape,
    },
    /// Run a verification suite (or "all")
    Verify {
        suite: String,
        #[arg(long)]
        height: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Analyze a finitely generated ring: Zinv:n, FpT:p, Mono:p:{g1,g2,...}
    Fgring {
        desc: String,
        /// Print the universal formula
        #[arg(long, conflicts_with = "member")]
        emit: bool,
        /// Decide membership of an element through the formula's semantics
        #[arg(long)]
        member: Option<String>,
        #[arg(long)]
        optimized: bool,
    },
    /// Evaluate a formula file over F_q (exhaustive) or a global field
    /// (bounded witness search)
    Eval {
        file: PathBuf,
        /// F<q> for a finite field, or Q / F<p>(T)
        #[arg(long)]
        domain: String,
        /// Atomic evaluations allowed in the global search
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Candidates tried per quantifier in the global search
        #[arg(long, default_value_t = 24)]
        candidates: usize,
        /// Values of free variables, e.g. --set x=1/5 (table indices over F_q)
        #[arg(long = "set", value_parser = parse_binding)]
        bindings: Vec<(String, String)>,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct EmitShape {
    /// Shorter variant with S = Odd(pi), extra places added back
    #[arg(long)]
    optimized: bool,
    /// A single polynomial equation under existential quantifiers
    #[arg(long)]
    diophantine: bool,
    /// The universal definition of O_S
    #[arg(long)]
    universal: bool,
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected name=value, got '{s}'"))
}

/// A failure with an exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<globaldef::Error> for Failure {
    fn from(e: globaldef::Error) -> Self {
        let code = match e {
            globaldef::Error::BudgetExhausted(_) => BUDGET,
            globaldef::Error::Parse { .. } => USAGE,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: USAGE,
        msg: msg.into(),
    }
}

fn emit(json: bool, text: impl AsRef<str>, value: Value) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        println!("{}", text.as_ref());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.msg, "exit": f.code }));
            } else {
                eprintln!("error: {}", f.msg);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let field = FieldDesc::parse(cli.field.as_deref().unwrap_or("Q")).map_err(|e| usage(e.to_string()))?;
    match &cli.command {
        Command::Ramify { quaternion } => {
            let q = QuaternionDesc::parse(field, quaternion)?;
            let delta = ramification_set(&q)?;
            let places: Vec<String> = delta.iter().map(|v| v.to_string()).collect();
            emit(
                cli.json,
                format_places(&delta),
                json!({ "quaternion": q.to_string(), "ramification": places, "nonreal": is_nonreal(&q) }),
            );
            Ok(0)
        }
        Command::Member { set, elements } => {
            let expr = SetExpr::parse(field, set)?;
            let xs: Vec<FieldElement> = elements
                .iter()
                .map(|s| field.parse_element(s))
                .collect::<globaldef::Result<_>>()?;
            let m = expr.contains(&xs)?;
            let word = match m {
                Membership::In => "true",
                Membership::Out => "false",
                Membership::Unknown => "unknown",
            };
            emit(cli.json, word, json!({ "set": expr.to_string(), "elements": elements, "member": word }));
            Ok(if m == Membership::Unknown { BUDGET } else { 0 })
        }
        Command::Synthesize { places } => {
            let s = parse_places(field, places)?;
            let pack = synthesize(field, &s)?;
            emit(
                cli.json,
                pack.to_string(),
                json!({
                    "S": format_places(&pack.s),
                    "pi": pack.pi.to_string(),
                    "u": pack.u.to_string(),
                    "c": pack.c.to_string(),
                }),
            );
            Ok(0)
        }
        Command::Emit { places, shape } => {
            let s = parse_places(field, places)?;
            let cu = build_complement_union(field, &s, shape.optimized)?;
            let (kind, f) = if shape.universal {
                ("universal", dualize(&cu.formula, "x")?)
            } else if shape.diophantine {
                ("diophantine", to_diophantine(&cu.formula, Ambient::Global(field))?)
            } else {
                ("existential", cu.formula.clone())
            };
            let rank = f.rank()?;
            if !cli.json {
                eprintln!("{kind}, rank {rank}, pack {}", cu.pack);
            }
            emit(
                cli.json,
                f.to_string(),
                json!({ "kind": kind, "rank": rank, "pack": cu.pack.to_string(), "formula": f.to_string() }),
            );
            Ok(0)
        }
        Command::Verify { suite, height, seed } => {
            let cfg = SuiteConfig {
                field: cli.field.as_ref().map(|_| field),
                height: *height,
                seed: *seed,
            };
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else if SUITES.contains(&suite.as_str()) {
                vec![suite.as_str()]
            } else {
                return Err(usage(format!("unknown suite '{suite}'; expected all or one of {}", SUITES.join(", "))));
            };
            let mut code = 0u8;
            let mut reports = Vec::new();
            for name in names {
                let report = run_suite(name, &cfg)?;
                if !cli.json {
                    println!("{}", report.summary());
                    for c in report.checks.iter().filter(|c| c.outcome != Outcome::Pass) {
                        println!("  {} {}: {} [input: {}]", c.outcome, c.name, c.detail, c.input);
                    }
                }
                code = match (code, report.exit_code() as u8) {
                    (1, _) | (_, 1) => 1,
                    (3, _) | (_, 3) => 3,
                    _ => 0,
                };
                reports.push(report);
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&reports).unwrap());
            }
            Ok(code)
        }
        Command::Fgring { desc, emit: show, member, optimized } => {
            let d = FgRingDesc::parse(desc)?;
            let def = build_ring_definition(&d, *optimized)?;
            let a = &def.analysis;
            let mut out = json!({
                "ring": d.to_string(),
                "S": format_places(&a.s),
                "conductor": a.conductor.to_string(),
                "coset_reps": a.coset_reps.iter().map(|y| y.to_string()).collect::<Vec<_>>(),
                "rank": def.formula.rank()?,
            });
            let mut text = a.to_string();
            if *show {
                out["formula"] = json!(def.formula.to_string());
                text = def.formula.to_string();
            }
            if let Some(x) = member {
                let x = d.field().parse_element(x)?;
                let via = def.contains_via_formula(&x)?;
                out["member"] = json!(via);
                out["direct"] = json!(d.contains(&x));
                text = via.to_string();
            }
            emit(cli.json, text, out);
            Ok(0)
        }
        Command::Eval { file, domain, budget, candidates, bindings } => {
            let src = fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let body: String = src
                .lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .collect::<Vec<_>>()
                .join(" ");
            let finite = domain.strip_prefix('F').filter(|r| !r.contains('('));
            match finite {
                Some(qs) => {
                    let q: usize = qs.parse().map_err(|_| usage(format!("bad domain '{domain}'")))?;
                    let table = FqTable::new(q)?;
                    let f = Formula::parse(&body)?;
                    eval_finite(cli.json, &f, &table, bindings)
                }
                None => {
                    let gf = FieldDesc::parse(domain).map_err(|e| usage(e.to_string()))?;
                    let f = parse_in(gf, &body)?;
                    let mut env = HashMap::new();
                    for (k, v) in bindings {
                        env.insert(k.clone(), gf.parse_element(v)?);
                    }
                    let cfg = GlobalEval::new(gf, *candidates, *budget);
                    let (truth, trail) = eval_global(&f, &cfg, &env)?;
                    let shown: Vec<String> = trail.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    let mut text = truth.to_string();
                    if !shown.is_empty() {
                        text.push_str(&format!(" ({})", shown.join(", ")));
                    }
                    emit(cli.json, text, json!({ "truth": truth, "witnesses": shown }));
                    Ok(if truth == Truth::Unknown { BUDGET } else { 0 })
                }
            }
        }
    }
}

fn eval_finite(json: bool, f: &Formula, table: &FqTable, bindings: &[(String, String)]) -> Result<u8, Failure> {
    let mut env = HashMap::new();
    for (k, v) in bindings {
        let idx: u16 = v.parse().map_err(|_| usage(format!("'{v}' is not an element index")))?;
        if idx as usize >= table.size() {
            return Err(usage(format!("index {idx} out of range for F_{}", table.size())));
        }
        env.insert(k.clone(), idx);
    }
    let open: Vec<String> = f.free_vars().into_iter().filter(|v| !env.contains_key(v)).collect();
    match open.as_slice() {
        [] => {
            let b = eval_fq(f, table, &env)?;
            emit(json, b.to_string(), json!({ "truth": b }));
        }
        [x] => {
            let set = fq_defined_set(f, table, x, &env)?;
            let items: Vec<String> = set.iter().map(u16::to_string).collect();
            emit(json, format!("{{{}}}", items.join(", ")), json!({ "variable": x, "set": set }));
        }
        _ => return Err(usage(format!("unbound free variables: {}", open.join(", ")))),
    }
    Ok(0)
}
