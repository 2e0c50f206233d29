//! Command-line front end: module inspection, dimension and basis
//! computation, the character-sum oracle, and regression against the
//! embedded dimension tables.
//!
//! Exit codes: 0 success, 1 computation error, 2 parse error (arguments or
//! genus symbol), 3 table-check mismatch.

use crate::fqm::{FiniteQuadraticModule, GenusSymbol};
use crate::invariants::{
    character_sum_dimension_min, dimension_opt, integral_basis_opt, InvariantOptions,
};
use crate::tables::{records, tables_check_with, TablesReport};
use crate::zfield::choose_primes;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BasisVectorOut {
    pub support: Vec<Vec<u32>>,
    pub coeffs: Vec<i64>,
}

/// One report line; serialized as a single JSON object in `--json` mode.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputReport {
    pub symbol: String,
    pub order: u64,
    pub level: u64,
    pub signature: u8,
    pub epsilon: Option<i32>,
    pub dimension: u64,
    pub primes: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<BasisVectorOut>>,
    pub ms: f64,
}

#[derive(Debug, Default)]
struct Args {
    command: String,
    symbol: Option<String>,
    primes: Vec<u64>,
    json: bool,
    max_order: Option<u64>,
    no_local: bool,
    check: bool,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    let mut args = Args::default();
    let mut it = argv.iter();
    let Some(cmd) = it.next() else {
        return Err("missing subcommand (info, dim, basis, oracle, tables)".into());
    };
    args.command = cmd.clone();
    let mut positionals = Vec::new();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--json" => args.json = true,
            "--no-local" => args.no_local = true,
            "--check" => args.check = true,
            "--prime" => {
                let v = it.next().ok_or("--prime needs a value")?;
                args.primes
                    .push(v.parse().map_err(|_| format!("bad prime: {v}"))?);
            }
            "--max-order" => {
                let v = it.next().ok_or("--max-order needs a value")?;
                args.max_order = Some(v.parse().map_err(|_| format!("bad bound: {v}"))?);
            }
            other if other.starts_with("--") => return Err(format!("unknown flag {other}")),
            other => positionals.push(other.to_string()),
        }
    }
    match args.command.as_str() {
        "tables" => {
            if !positionals.is_empty() {
                return Err("tables takes no positional argument".into());
            }
        }
        "info" | "dim" | "basis" | "oracle" => {
            if positionals.len() != 1 {
                return Err(format!("{} expects exactly one genus symbol", args.command));
            }
            args.symbol = positionals.pop();
        }
        other => return Err(format!("unknown subcommand {other}")),
    }
    Ok(args)
}

fn options_from(args: &Args) -> InvariantOptions {
    let prime_min = std::env::var("WEILINV_PRIME_MIN")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(5)
        .max(5);
    InvariantOptions {
        prime_min,
        primes: if args.primes.is_empty() {
            None
        } else {
            Some(args.primes.clone())
        },
        use_local: !args.no_local,
        crt_primes: 3,
    }
}

/// Primes the default policy would pick for a dimension run: one per
/// p-part level (or the explicit list, when given).
fn dimension_primes(m: &FiniteQuadraticModule, opts: &InvariantOptions) -> Vec<u64> {
    if let Some(p) = &opts.primes {
        return p.clone();
    }
    if !opts.use_local {
        return choose_primes(m.level().max(1), 1, opts.prime_min);
    }
    let mut out: Vec<u64> = m
        .p_parts()
        .iter()
        .map(|p| choose_primes(p.module.level().max(1), 1, opts.prime_min)[0])
        .collect();
    if out.is_empty() {
        out = choose_primes(1, 1, opts.prime_min);
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn run(argv: &[String]) -> i32 {
    let args = match parse_args(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!(
                "usage: weilinv <info|dim|basis|oracle> SYMBOL [--json] [--prime P]... [--no-local] [--max-order B]"
            );
            eprintln!("       weilinv tables [--check] [--max-order B] [--json] [--no-local]");
            return EXIT_PARSE;
        }
    };
    let opts = options_from(&args);
    if args.command == "tables" {
        return run_tables(&args, &opts);
    }
    let symbol_text = args.symbol.clone().unwrap_or_default();
    let symbol = match GenusSymbol::parse(&symbol_text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let module = symbol.realize();
    let started = Instant::now();
    let result = match args.command.as_str() {
        "info" => run_info(&symbol, &module, &args, &opts, started),
        "dim" => run_dim(&symbol, &module, &args, &opts, started),
        "basis" => run_basis(&symbol, &module, &args, &opts, started),
        "oracle" => run_oracle(&symbol, &module, &args, &opts, started),
        _ => unreachable!(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_COMPUTE
        }
    }
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn base_report(
    symbol: &GenusSymbol,
    module: &FiniteQuadraticModule,
) -> Result<OutputReport, Box<dyn std::error::Error>> {
    let profile = module.profile()?;
    Ok(OutputReport {
        symbol: symbol.to_string(),
        order: profile.order,
        level: profile.level,
        signature: profile.signature,
        epsilon: profile.epsilon,
        dimension: 0,
        primes: Vec::new(),
        basis: None,
        ms: 0.0,
    })
}

fn run_info(
    symbol: &GenusSymbol,
    module: &FiniteQuadraticModule,
    args: &Args,
    opts: &InvariantOptions,
    started: Instant,
) -> CmdResult {
    let profile = module.profile()?;
    if args.json {
        let mut report = base_report(symbol, module)?;
        report.dimension = dimension_opt(module, opts)?;
        report.primes = dimension_primes(module, opts);
        report.ms = millis_since(started);
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("symbol: {symbol}");
        println!("order: {}", profile.order);
        println!("level: {}", profile.level);
        println!("signature: {}", profile.signature);
        match profile.epsilon {
            Some(1) => println!("epsilon: +1"),
            Some(_) => println!("epsilon: -1"),
            None => println!("epsilon: odd-signature"),
        }
        println!("twotorsion: {}", profile.twotorsion);
    }
    Ok(EXIT_OK)
}

fn run_dim(
    symbol: &GenusSymbol,
    module: &FiniteQuadraticModule,
    args: &Args,
    opts: &InvariantOptions,
    started: Instant,
) -> CmdResult {
    let dim = dimension_opt(module, opts)?;
    if args.json {
        let mut report = base_report(symbol, module)?;
        report.dimension = dim;
        report.primes = dimension_primes(module, opts);
        report.ms = millis_since(started);
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("{dim}");
    }
    Ok(EXIT_OK)
}

fn run_basis(
    symbol: &GenusSymbol,
    module: &FiniteQuadraticModule,
    args: &Args,
    opts: &InvariantOptions,
    started: Instant,
) -> CmdResult {
    let basis = integral_basis_opt(module, opts)?;
    let vectors: Vec<BasisVectorOut> = basis
        .vectors
        .iter()
        .map(|v| {
            let full = basis.expand(module, v);
            let mut support = Vec::new();
            let mut coeffs = Vec::new();
            for (i, x) in module.elements().enumerate() {
                let c = full[i];
                if c != 0 {
                    support.push(x.coords.clone());
                    coeffs.push(c);
                }
            }
            BasisVectorOut { support, coeffs }
        })
        .collect();
    if args.json {
        let mut report = base_report(symbol, module)?;
        report.dimension = vectors.len() as u64;
        report.primes = basis.primes_used.clone();
        report.basis = Some(vectors);
        report.ms = millis_since(started);
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("dimension: {}", vectors.len());
        if !basis.primes_used.is_empty() {
            println!(
                "primes: {}",
                basis
                    .primes_used
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
        for (i, v) in vectors.iter().enumerate() {
            let terms: Vec<String> = v
                .support
                .iter()
                .zip(v.coeffs.iter())
                .map(|(s, c)| {
                    let coords: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                    if *c == 1 {
                        format!("e[{}]", coords.join(","))
                    } else {
                        format!("{c}*e[{}]", coords.join(","))
                    }
                })
                .collect();
            println!("v{}: {}", i + 1, terms.join(" + "));
        }
    }
    Ok(EXIT_OK)
}

fn run_oracle(
    symbol: &GenusSymbol,
    module: &FiniteQuadraticModule,
    args: &Args,
    opts: &InvariantOptions,
    started: Instant,
) -> CmdResult {
    let bound = args.max_order.map(u128::from).unwrap_or(100_000);
    let dim = character_sum_dimension_min(module, bound, opts.prime_min)?;
    if args.json {
        let profile = module.profile()?;
        let mut report = base_report(symbol, module)?;
        report.dimension = dim;
        // same deterministic policy as the oracle itself
        report.primes = choose_primes(
            profile.level.max(1),
            1,
            opts.prime_min.max(profile.order + 1),
        );
        report.ms = millis_since(started);
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("{dim}");
    }
    Ok(EXIT_OK)
}

fn run_tables(args: &Args, opts: &InvariantOptions) -> i32 {
    if !args.check {
        for rec in records() {
            println!("{},{},{}", rec.source, rec.symbol, rec.dim);
        }
        return EXIT_OK;
    }
    let bound = args.max_order.unwrap_or(4096);
    let json = args.json;
    let report: TablesReport = tables_check_with(
        bound,
        opts,
        |_| true,
        |rec, module, dim, ms| {
            if !json {
                return;
            }
            let Ok(sym) = GenusSymbol::parse(rec.symbol) else {
                return;
            };
            let Ok(mut line) = base_report(&sym, module) else {
                return;
            };
            line.dimension = dim;
            line.primes = dimension_primes(module, opts);
            line.ms = ms;
            if let Ok(s) = serde_json::to_string(&line) {
                println!("{s}");
            }
        },
    );
    for m in &report.mismatches {
        eprintln!(
            "MISMATCH {} {}: expected {}, got {}",
            m.source, m.symbol, m.expected, m.got
        );
    }
    for (source, checked, passed) in &report.per_source {
        println!("{source}: {passed}/{checked} ok");
    }
    println!(
        "{} records checked, {} skipped (order > {bound}), {} mismatches",
        report.per_source.iter().map(|(_, c, _)| c).sum::<usize>(),
        report.skipped,
        report.mismatches.len()
    );
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK
    }
}

/// Elapsed wall time in milliseconds, at microsecond resolution.
pub(crate) fn millis_since(started: Instant) -> f64 {
    (started.elapsed().as_secs_f64() * 1e6).round() / 1e3
}
