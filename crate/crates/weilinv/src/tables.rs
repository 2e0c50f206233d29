//! Embedded reference dimensions for small 2-, 3- and 5-modules, used by
//! the `tables` subcommand and the regression suite. The dataset is a
//! plain CSV (`source,symbol,dim`) compiled into the binary.

use crate::fqm::GenusSymbol;
use crate::invariants::{dimension_opt, InvariantOptions};
use std::sync::OnceLock;

const DATASET: &str = include_str!("../data/tables.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRecord {
    pub source: &'static str,
    pub symbol: &'static str,
    pub dim: u64,
}

/// All embedded records, in dataset order.
pub fn records() -> &'static [TableRecord] {
    static RECORDS: OnceLock<Vec<TableRecord>> = OnceLock::new();
    RECORDS.get_or_init(|| {
        DATASET
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let mut it = line.split(',');
                let source = it.next().expect("source column");
                let symbol = it.next().expect("symbol column");
                let dim = it
                    .next()
                    .expect("dim column")
                    .trim()
                    .parse()
                    .expect("dimension is an integer");
                TableRecord {
                    source,
                    symbol,
                    dim,
                }
            })
            .collect()
    })
}

#[derive(Debug, Clone)]
pub struct TableMismatch {
    pub source: &'static str,
    pub symbol: &'static str,
    pub expected: u64,
    pub got: u64,
}

#[derive(Debug, Clone, Default)]
pub struct TablesReport {
    /// (source, records checked, records passed) per table
    pub per_source: Vec<(&'static str, usize, usize)>,
    pub mismatches: Vec<TableMismatch>,
    pub skipped: usize,
}

impl TablesReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recomputes every record with module order <= max_order and compares
/// exactly.
pub fn tables_check(max_order: u64, opts: &InvariantOptions) -> TablesReport {
    tables_check_filtered(max_order, opts, |_| true)
}

pub fn tables_check_filtered<F>(max_order: u64, opts: &InvariantOptions, keep: F) -> TablesReport
where
    F: Fn(&TableRecord) -> bool,
{
    tables_check_with(max_order, opts, keep, |_, _, _, _| {})
}

/// As `tables_check_filtered`, invoking `observe` with each checked record,
/// its realized module, the computed dimension and the elapsed
/// milliseconds.
pub fn tables_check_with<F, O>(
    max_order: u64,
    opts: &InvariantOptions,
    keep: F,
    mut observe: O,
) -> TablesReport
where
    F: Fn(&TableRecord) -> bool,
    O: FnMut(&TableRecord, &crate::fqm::FiniteQuadraticModule, u64, f64),
{
    let mut report = TablesReport::default();
    for rec in records() {
        if !keep(rec) {
            continue;
        }
        let module = GenusSymbol::parse(rec.symbol)
            .expect("embedded symbol parses")
            .realize();
        if module.order() > max_order {
            report.skipped += 1;
            continue;
        }
        let started = std::time::Instant::now();
        let got = dimension_opt(&module, opts).expect("table module computes");
        observe(rec, &module, got, crate::cli::millis_since(started));
        let entry = match report
            .per_source
            .iter_mut()
            .find(|(s, _, _)| *s == rec.source)
        {
            Some(e) => e,
            None => {
                report.per_source.push((rec.source, 0, 0));
                report.per_source.last_mut().unwrap()
            }
        };
        entry.1 += 1;
        if got == rec.dim {
            entry.2 += 1;
        } else {
            report.mismatches.push(TableMismatch {
                source: rec.source,
                symbol: rec.symbol,
                expected: rec.dim,
                got,
            });
        }
    }
    report
}
