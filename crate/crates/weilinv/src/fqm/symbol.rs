//! Genus symbols: compact notation for Jordan components of finite
//! quadratic modules, e.g. `2_7^+1.4^+2.8_1^+1` or `3^-2`.
//!
//! Grammar (ASCII):
//!   symbol := block ("." block)* | ""
//!   block  := q [ "_" t ] "^" sign k
//! with q a prime power, t a digit 0-7 (only for 2-adic odd type), sign
//! `+` or `-`, and k a positive integer. A 2-adic block without `_t` is of
//! even type and must have even rank. Concatenated blocks without dots are
//! accepted on input when the split is unambiguous.

use super::FiniteQuadraticModule;
use crate::zfield::{factorize, jacobi, kronecker2};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolError {
    Syntax(String),
    NotPrimePower(String),
    EvenTypeOddRank(String),
    OddityParity(String),
    Unrealizable(String),
    DuplicateBlock(String),
    Ambiguous(String),
}

impl fmt::Display for SymbolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolError::Syntax(s) => write!(f, "syntax error in genus symbol: {s}"),
            SymbolError::NotPrimePower(s) => write!(f, "{s} is not a prime power"),
            SymbolError::EvenTypeOddRank(s) => {
                write!(f, "even-type 2-adic block with odd rank: {s}")
            }
            SymbolError::OddityParity(s) => {
                write!(f, "oddity does not match the rank parity: {s}")
            }
            SymbolError::Unrealizable(s) => write!(f, "unrealizable 2-adic block: {s}"),
            SymbolError::DuplicateBlock(s) => write!(f, "duplicate Jordan block: {s}"),
            SymbolError::Ambiguous(s) => write!(f, "ambiguous concatenated symbol: {s}"),
        }
    }
}

impl std::error::Error for SymbolError {}

/// One Jordan block q^{±k} (q = p^e), with oddity t for 2-adic odd type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JordanBlock {
    pub p: u64,
    pub e: u32,
    pub rank: u32,
    pub sign: i32,
    pub oddity: Option<u8>,
}

impl JordanBlock {
    pub fn q(&self) -> u64 {
        self.p.pow(self.e)
    }

    fn sort_key(&self) -> (u64, u32, bool) {
        (self.p, self.e, self.oddity.is_some())
    }
}

impl fmt::Display for JordanBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q())?;
        if let Some(t) = self.oddity {
            write!(f, "_{t}")?;
        }
        write!(f, "^{}{}", if self.sign > 0 { '+' } else { '-' }, self.rank)
    }
}

/// Ordered list of Jordan blocks, sorted ascending by (p, e, type).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenusSymbol {
    blocks: Vec<JordanBlock>,
}

impl GenusSymbol {
    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn parse(text: &str) -> Result<GenusSymbol, SymbolError> {
        let text = text.trim();
        let mut blocks = Vec::new();
        if !text.is_empty() {
            for segment in text.split('.') {
                if segment.is_empty() {
                    return Err(SymbolError::Syntax("empty block".into()));
                }
                blocks.extend(parse_segment(segment)?);
            }
        }
        blocks.sort_by_key(|b| b.sort_key());
        for w in blocks.windows(2) {
            if w[0].sort_key() == w[1].sort_key() {
                return Err(SymbolError::DuplicateBlock(format!("{}", w[1])));
            }
        }
        Ok(GenusSymbol { blocks })
    }

    /// Constructs the explicit module described by the symbol, block by
    /// block.
    ///
    /// Odd p, q^{±k}: diagonal (b, ..., b, a)/q with (2b/p) = +1 and
    /// (2a/p) = sign. 2-adic odd type q_t^{±k}: diagonal (a_1, ..., a_k)/2q
    /// with unit entries summing to t mod 8 whose Kronecker characters
    /// multiply to the sign. 2-adic even type: hyperbolic planes xy/q,
    /// with the last plane replaced by (x^2 + xy + y^2)/q for the minus
    /// sign.
    pub fn realize(&self) -> FiniteQuadraticModule {
        let mut m = FiniteQuadraticModule::trivial();
        for b in &self.blocks {
            m = m.direct_sum(&block_module(b));
        }
        m
    }
}

impl fmt::Display for GenusSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl FromStr for GenusSymbol {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenusSymbol::parse(s)
    }
}

/// Parses one dot-free segment, which may be a concatenation of blocks;
/// requires the split into blocks to be unique.
fn parse_segment(segment: &str) -> Result<Vec<JordanBlock>, SymbolError> {
    let mut parses = Vec::new();
    collect_parses(segment, &mut Vec::new(), &mut parses, segment);
    match parses.len() {
        0 => Err(first_block_error(segment)),
        1 => Ok(parses.pop().unwrap()),
        _ => Err(SymbolError::Ambiguous(segment.into())),
    }
}

fn collect_parses(
    rest: &str,
    acc: &mut Vec<JordanBlock>,
    out: &mut Vec<Vec<JordanBlock>>,
    _whole: &str,
) {
    if rest.is_empty() {
        out.push(acc.clone());
        return;
    }
    if out.len() > 1 {
        return; // enough to know it is ambiguous
    }
    for (block, tail) in block_prefixes(rest) {
        acc.push(block);
        collect_parses(tail, acc, out, _whole);
        acc.pop();
    }
}

/// All valid (block, remaining input) readings of a prefix of `s`.
fn block_prefixes(s: &str) -> Vec<(JordanBlock, &str)> {
    let bytes = s.as_bytes();
    let qlen = bytes.iter().take_while(|b| b.is_ascii_digit()).count();
    if qlen == 0 {
        return Vec::new();
    }
    let Ok(q) = s[..qlen].parse::<u64>() else {
        return Vec::new();
    };
    let mut pos = qlen;
    let mut oddity = None;
    if bytes.get(pos) == Some(&b'_') {
        pos += 1;
        match bytes.get(pos) {
            Some(c @ b'0'..=b'7') => {
                oddity = Some(c - b'0');
                pos += 1;
            }
            _ => return Vec::new(),
        }
    }
    if bytes.get(pos) != Some(&b'^') {
        return Vec::new();
    }
    pos += 1;
    let sign = match bytes.get(pos) {
        Some(b'+') => 1,
        Some(b'-') => -1,
        _ => return Vec::new(),
    };
    pos += 1;
    let klen = bytes[pos..]
        .iter()
        .take_while(|b| b.is_ascii_digit())
        .count();
    if klen == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    // the rank may end anywhere inside the digit run; each split that
    // yields a valid block is a candidate reading
    for take in 1..=klen {
        let Ok(rank) = s[pos..pos + take].parse::<u32>() else {
            continue;
        };
        if let Ok(block) = validate_block(q, oddity, sign, rank) {
            out.push((block, &s[pos + take..]));
        }
    }
    out
}

/// Error for the first (longest-rank) reading, for a useful message when no
/// reading of the segment is valid.
fn first_block_error(segment: &str) -> SymbolError {
    let bytes = segment.as_bytes();
    let qlen = bytes.iter().take_while(|b| b.is_ascii_digit()).count();
    if qlen == 0 {
        return SymbolError::Syntax(segment.into());
    }
    let q: u64 = match segment[..qlen].parse() {
        Ok(q) => q,
        Err(_) => return SymbolError::Syntax(segment.into()),
    };
    let mut pos = qlen;
    let mut oddity = None;
    if bytes.get(pos) == Some(&b'_') {
        pos += 1;
        match bytes.get(pos) {
            Some(c @ b'0'..=b'7') => {
                oddity = Some(c - b'0');
                pos += 1;
            }
            _ => return SymbolError::Syntax(segment.into()),
        }
    }
    if bytes.get(pos) != Some(&b'^') {
        return SymbolError::Syntax(segment.into());
    }
    pos += 1;
    let sign = match bytes.get(pos) {
        Some(b'+') => 1,
        Some(b'-') => -1,
        _ => return SymbolError::Syntax(segment.into()),
    };
    pos += 1;
    let rank: u32 = match segment[pos..].parse() {
        Ok(k) => k,
        Err(_) => return SymbolError::Syntax(segment.into()),
    };
    match validate_block(q, oddity, sign, rank) {
        Ok(_) => SymbolError::Syntax(segment.into()),
        Err(e) => e,
    }
}

fn validate_block(
    q: u64,
    oddity: Option<u8>,
    sign: i32,
    rank: u32,
) -> Result<JordanBlock, SymbolError> {
    if rank == 0 {
        return Err(SymbolError::Syntax(format!("rank 0 in block q={q}")));
    }
    let factors = factorize(q);
    if factors.len() != 1 || q < 2 {
        return Err(SymbolError::NotPrimePower(q.to_string()));
    }
    let (p, e) = factors[0];
    let block = JordanBlock {
        p,
        e,
        rank,
        sign,
        oddity,
    };
    if p != 2 {
        if oddity.is_some() {
            return Err(SymbolError::Syntax(format!(
                "oddity subscript on odd prime block {block}"
            )));
        }
        return Ok(block);
    }
    match oddity {
        None => {
            if rank % 2 != 0 {
                return Err(SymbolError::EvenTypeOddRank(block.to_string()));
            }
            Ok(block)
        }
        Some(t) => {
            if u32::from(t) % 2 != rank % 2 {
                return Err(SymbolError::OddityParity(block.to_string()));
            }
            if odd_type_entries(t, sign, rank).is_none() {
                return Err(SymbolError::Unrealizable(block.to_string()));
            }
            Ok(block)
        }
    }
}

/// Diagonal unit entries for a 2-adic odd-type block: k values from
/// {1,3,5,7} with trace t mod 8 and Kronecker characters multiplying to
/// the sign. The leading entries are fixed to 1 and the trailing
/// min(k, 3) entries are searched; three free entries reach every
/// realizable (t, sign) class.
fn odd_type_entries(t: u8, sign: i32, rank: u32) -> Option<Vec<u64>> {
    let free = rank.min(3) as usize;
    let fixed = rank as usize - free;
    let units = [1u64, 3, 5, 7];
    let mut idx = vec![0usize; free];
    loop {
        let tail: Vec<u64> = idx.iter().map(|&i| units[i]).collect();
        let total: u64 = fixed as u64 + tail.iter().sum::<u64>();
        let chi: i64 = tail.iter().map(|&a| kronecker2(a as i64)).product();
        if total % 8 == u64::from(t) && chi == i64::from(sign) {
            let mut entries = vec![1u64; fixed];
            entries.extend(tail);
            return Some(entries);
        }
        // next tuple in lexicographic order
        let mut c = free;
        loop {
            if c == 0 {
                return None;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < units.len() {
                break;
            }
            idx[c] = 0;
        }
    }
}

fn block_module(b: &JordanBlock) -> FiniteQuadraticModule {
    let q = b.q();
    let k = b.rank as usize;
    if b.p != 2 {
        // diagonal (b, ..., b, a)/q over (Z/q)^k
        let lead = (1..b.p)
            .find(|&u| jacobi(2 * u as i64, b.p) == 1)
            .expect("unit with (2u/p) = +1 exists");
        let last = (1..b.p)
            .find(|&u| jacobi(2 * u as i64, b.p) == i64::from(b.sign))
            .expect("unit with (2u/p) = sign exists");
        let mut qmat = vec![vec![0i64; k]; k];
        for i in 0..k {
            qmat[i][i] = if i + 1 == k { last as i64 } else { lead as i64 };
        }
        return FiniteQuadraticModule::new(vec![q as u32; k], q, &qmat)
            .expect("odd block is well-defined");
    }
    match b.oddity {
        Some(t) => {
            let entries = odd_type_entries(t, b.sign, b.rank).expect("validated at parse time");
            let mut qmat = vec![vec![0i64; k]; k];
            for (i, &a) in entries.iter().enumerate() {
                qmat[i][i] = a as i64;
            }
            FiniteQuadraticModule::new(vec![q as u32; k], 2 * q, &qmat)
                .expect("odd-type block is well-defined")
        }
        None => {
            // k/2 hyperbolic planes x_{2i} x_{2i+1} / q; for the minus sign
            // the last plane is replaced by (x^2 + x y + y^2)/q
            let mut qmat = vec![vec![0i64; k]; k];
            let pairs = k / 2;
            for i in 0..pairs {
                qmat[2 * i][2 * i + 1] = 1;
            }
            if b.sign < 0 {
                qmat[k - 2][k - 2] = 1;
                qmat[k - 1][k - 1] = 1;
                // the cross term x_{k-2} x_{k-1} = 1 is already set
            }
            FiniteQuadraticModule::new(vec![q as u32; k], q, &qmat)
                .expect("even-type block is well-defined")
        }
    }
}
