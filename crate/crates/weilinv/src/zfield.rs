//! Modular-arithmetic backend: admissible prime selection, roots of unity
//! in F_l, dense nullspace computation over F_l, and CRT combination with
//! rational reconstruction for integral lifting.
//!
//! A prime l is admissible for level N if l >= 5 and l == 1 (mod N); then
//! F_l contains the N-th roots of unity and the invariant dimension over
//! F_l agrees with the characteristic-zero dimension, so the whole pipeline
//! can run in small prime fields.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZfieldError {
    /// root_of_unity called with ell != 1 mod n.
    NotCongruent { ell: u64, n: u64 },
    /// No residue of the requested multiplicative order exists.
    NoElementOfOrder { ell: u64, n: u64 },
    /// The requested zeta does not have exact order n.
    WrongOrder { zeta: u64, n: u64 },
    /// Rational reconstruction failed for one entry; add more primes.
    ReconstructionFailed { index: usize },
    /// Product of the CRT primes exceeds the supported modulus range.
    ModulusOverflow,
    /// Mismatched lengths between residue vectors and the prime list.
    ShapeMismatch,
}

impl fmt::Display for ZfieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZfieldError::NotCongruent { ell, n } => {
                write!(f, "{ell} is not congruent to 1 mod {n}")
            }
            ZfieldError::NoElementOfOrder { ell, n } => {
                write!(f, "no element of order {n} in F_{ell}")
            }
            ZfieldError::WrongOrder { zeta, n } => {
                write!(f, "{zeta} does not have exact multiplicative order {n}")
            }
            ZfieldError::ReconstructionFailed { index } => {
                write!(f, "rational reconstruction failed at entry {index}")
            }
            ZfieldError::ModulusOverflow => write!(f, "CRT modulus exceeds supported range"),
            ZfieldError::ShapeMismatch => write!(f, "residue vectors and primes do not match"),
        }
    }
}

impl std::error::Error for ZfieldError {}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns (g, x, y) with a*x + b*y = g = gcd(a, b).
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % modulus as u128) as u64;
        }
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Inverse of a mod m for gcd(a, m) = 1.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = 17u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Jacobi symbol (a / n) for odd positive n.
pub fn jacobi(mut a: i64, mut n: u64) -> i64 {
    assert!(n % 2 == 1, "Jacobi symbol requires odd n");
    a = a.rem_euclid(n as i64);
    let mut result = 1i64;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        let t = n as i64;
        n = a as u64;
        a = t;
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n as i64;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol (a / 2): +1 for a = 1, 7 mod 8, -1 for a = 3, 5 mod 8, 0 for even a.
pub fn kronecker2(a: i64) -> i64 {
    match a.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Order of SL2(Z/nZ): n^3 * prod_{p | n} (p^2 - 1) / p^2.
pub fn sl2_order(n: u64) -> u128 {
    if n == 1 {
        return 1;
    }
    let mut order = (n as u128).pow(3);
    for (p, _) in factorize(n) {
        let p = p as u128;
        order = order / (p * p) * (p * p - 1);
    }
    order
}

/// The `count` smallest primes l >= max(min, 5) with l == 1 mod n.
///
/// Every returned prime is coprime to |SL2(Z/nZ)|, so invariant dimensions
/// over F_l agree with the characteristic-zero ones.
pub fn choose_primes(n: u64, count: usize, min: u64) -> Vec<u64> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(count);
    let start = min.max(5);
    // first candidate >= start that is == 1 mod n
    let mut cand = if n == 1 {
        start
    } else {
        let r = start % n;
        if r == 1 {
            start
        } else {
            start + (n + 1 - r) % n
        }
    };
    let g = sl2_order(n);
    let mut steps = 0u64;
    while out.len() < count {
        if is_prime(cand) {
            assert!(
                g % cand as u128 != 0,
                "admissible prime {cand} divides |SL2(Z/{n}Z)|"
            );
            out.push(cand);
        }
        cand += if n == 1 { 1 } else { n };
        steps += 1;
        assert!(steps < 100_000_000, "prime search did not terminate");
    }
    out
}

/// Smallest residue >= 2 of exact multiplicative order n in F_ell
/// (deterministic); returns 1 for n = 1.
pub fn root_of_unity(ell: u64, n: u64) -> Result<u64, ZfieldError> {
    if n == 1 {
        return Ok(1);
    }
    if (ell - 1) % n != 0 {
        return Err(ZfieldError::NotCongruent { ell, n });
    }
    let factors = factorize(n);
    for z in 2..ell {
        if has_exact_order(z, n, ell, &factors) {
            return Ok(z);
        }
    }
    Err(ZfieldError::NoElementOfOrder { ell, n })
}

fn has_exact_order(z: u64, n: u64, ell: u64, factors: &[(u64, u32)]) -> bool {
    if mod_pow(z, n, ell) != 1 {
        return false;
    }
    factors.iter().all(|&(p, _)| mod_pow(z, n / p, ell) != 1)
}

/// A prime l with a fixed element zeta of exact multiplicative order n,
/// modeling the embedding of the n-th cyclotomic field in F_l.
#[derive(Debug, Clone)]
pub struct ZetaFieldContext {
    pub ell: u64,
    pub n: u64,
    pub zeta: u64,
    /// zeta^j for j = 0..n
    pub zeta_pow: Vec<u64>,
}

impl ZetaFieldContext {
    pub fn new(ell: u64, n: u64) -> Result<Self, ZfieldError> {
        let zeta = root_of_unity(ell, n)?;
        Self::with_zeta(ell, n, zeta)
    }

    /// Builds a context with an explicit root; rejects residues whose exact
    /// order is not n.
    pub fn with_zeta(ell: u64, n: u64, zeta: u64) -> Result<Self, ZfieldError> {
        assert!(is_prime(ell) && ell >= 5, "ell must be a prime >= 5");
        assert!(
            !(n == 2 && ell == 3),
            "the pair (n, ell) = (2, 3) is excluded"
        );
        if n == 1 {
            if zeta != 1 {
                return Err(ZfieldError::WrongOrder { zeta, n });
            }
            return Ok(ZetaFieldContext {
                ell,
                n,
                zeta: 1,
                zeta_pow: vec![1],
            });
        }
        if (ell - 1) % n != 0 {
            return Err(ZfieldError::NotCongruent { ell, n });
        }
        let factors = factorize(n);
        if !has_exact_order(zeta % ell, n, ell, &factors) {
            return Err(ZfieldError::WrongOrder { zeta, n });
        }
        let mut zeta_pow = Vec::with_capacity(n as usize);
        let mut acc = 1u64;
        for _ in 0..n {
            zeta_pow.push(acc);
            acc = ((acc as u128 * zeta as u128) % ell as u128) as u64;
        }
        Ok(ZetaFieldContext {
            ell,
            n,
            zeta,
            zeta_pow,
        })
    }

    /// zeta^j with j interpreted mod n (j may be any residue class value).
    #[inline]
    pub fn zeta_to(&self, j: u64) -> u64 {
        self.zeta_pow[(j % self.n) as usize]
    }

    /// zeta^{-j}.
    #[inline]
    pub fn zeta_to_neg(&self, j: u64) -> u64 {
        self.zeta_pow[((self.n - j % self.n) % self.n) as usize]
    }

    pub fn inv(&self, a: u64) -> u64 {
        inv_mod(a % self.ell, self.ell).expect("inverse of zero")
    }
}

/// Barrett reducer for a fixed modulus < 2^32; reduces any u64.
#[derive(Clone, Copy)]
pub(crate) struct Reducer {
    ell: u64,
    magic: u64, // floor(2^64 / ell)
}

impl Reducer {
    pub(crate) fn new(ell: u64) -> Self {
        assert!(ell >= 2 && ell < (1 << 32));
        Reducer {
            ell,
            magic: ((1u128 << 64) / ell as u128) as u64,
        }
    }

    #[inline(always)]
    pub(crate) fn reduce(self, a: u64) -> u64 {
        let q = ((a as u128 * self.magic as u128) >> 64) as u64;
        let mut r = a - q * self.ell;
        while r >= self.ell {
            r -= self.ell;
        }
        r
    }
}

/// Dense row-major matrix over F_ell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    pub rows: usize,
    pub cols: usize,
    pub ell: u64,
    pub data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize, ell: u64) -> Self {
        assert!(ell >= 2 && ell < (1 << 32), "modulus out of range");
        FieldMatrix {
            rows,
            cols,
            ell,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, ell: u64) -> Self {
        let mut m = Self::zeros(n, n, ell);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, ell: u64) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut m = Self::zeros(r, c, ell);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = v % ell;
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.ell;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let c = self.cols;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * c);
        head[lo * c..lo * c + c].swap_with_slice(&mut tail[..c]);
    }

    pub fn mul(&self, other: &FieldMatrix) -> FieldMatrix {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.ell, other.ell);
        let red = Reducer::new(self.ell);
        let mut out = FieldMatrix::zeros(self.rows, other.cols, self.ell);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow.iter()) {
                    *d = red.reduce(*d + a * b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u128;
                for (a, b) in self.row(i).iter().zip(v.iter()) {
                    acc += *a as u128 * *b as u128;
                }
                (acc % self.ell as u128) as u64
            })
            .collect()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let red = Reducer::new(self.ell);
        let ell = self.ell;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(row, pr);
            let inv = inv_mod(self.get(row, col), ell).expect("pivot invertible");
            {
                let prow = &mut self.data[row * cols..(row + 1) * cols];
                for v in prow[col..].iter_mut() {
                    *v = red.reduce(*v * inv);
                }
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = self.get(r, col);
                if f == 0 {
                    continue;
                }
                let fneg = ell - f;
                let (pr_slice, r_slice) = if r < row {
                    let (head, tail) = self.data.split_at_mut(row * cols);
                    (&tail[..cols], &mut head[r * cols..(r + 1) * cols])
                } else {
                    let (head, tail) = self.data.split_at_mut(r * cols);
                    (&head[row * cols..(row + 1) * cols], &mut tail[..cols])
                };
                for k in col..cols {
                    r_slice[k] = red.reduce(r_slice[k] + fneg * pr_slice[k]);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }
}

/// Reduced-echelon kernel basis of m, deterministic with free columns
/// ascending; the basis has cols - rank elements.
pub fn kernel_basis(m: &FieldMatrix) -> Vec<Vec<u64>> {
    let mut r = m.clone();
    let pivots = r.rref();
    let ell = m.ell;
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::with_capacity(m.cols - pivots.len());
    for free in 0..m.cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0u64; m.cols];
        v[free] = 1;
        for (i, &p) in pivots.iter().enumerate() {
            let e = r.get(i, free);
            if e != 0 {
                v[p] = ell - e;
            }
        }
        out.push(v);
    }
    out
}

/// Integer vector of rationals over a common positive denominator, reduced
/// so that the gcd of all numerators with the denominator is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalVector {
    pub numerators: Vec<i64>,
    pub denominator: u64,
}

impl RationalVector {
    /// Clears the denominator and divides by the content, yielding a
    /// primitive integer vector with positive leading entry.
    pub fn to_primitive_integers(&self) -> Vec<i64> {
        let mut g: i64 = 0;
        for &n in &self.numerators {
            g = egcd(g as i128, n as i128).0 as i64;
        }
        if g == 0 {
            return self.numerators.clone();
        }
        let mut out: Vec<i64> = self.numerators.iter().map(|&n| n / g).collect();
        if let Some(first) = out.iter().find(|&&x| x != 0) {
            if *first < 0 {
                for x in out.iter_mut() {
                    *x = -*x;
                }
            }
        }
        out
    }
}

/// Half-extended Euclid rational reconstruction of residue r mod m with the
/// symmetric bound: |num|, den <= bound. Returns None on failure.
pub fn rational_reconstruct(r: i128, m: i128, bound: i128) -> Option<(i128, i128)> {
    let r = r.rem_euclid(m);
    let (mut v0, mut v1) = ((m, 0i128), (r, 1i128));
    while v1.0 > bound {
        let q = v0.0 / v1.0;
        let next = (v0.0 - q * v1.0, v0.1 - q * v1.1);
        v0 = v1;
        v1 = next;
    }
    let (num, den) = v1;
    if den == 0 || den.abs() > bound {
        return None;
    }
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    if egcd(num, den).0 != 1 {
        return None;
    }
    Some((num, den))
}

/// CRT-combines per-prime residue vectors and reconstructs each entry to a
/// rational of height at most sqrt(M/2), M the product of the primes; the
/// result is the reduced rational vector over a common denominator.
///
/// `bound` overrides the default symmetric height bound when given.
pub fn rational_lift(
    residues: &[Vec<u64>],
    primes: &[u64],
    bound: Option<u128>,
) -> Result<RationalVector, ZfieldError> {
    if residues.len() != primes.len() || primes.is_empty() {
        return Err(ZfieldError::ShapeMismatch);
    }
    let len = residues[0].len();
    if residues.iter().any(|v| v.len() != len) {
        return Err(ZfieldError::ShapeMismatch);
    }
    let mut modulus: i128 = 1;
    for &p in primes {
        modulus = modulus
            .checked_mul(p as i128)
            .filter(|&m| m < (1i128 << 63))
            .ok_or(ZfieldError::ModulusOverflow)?;
    }
    let b = match bound {
        Some(b) => b as i128,
        None => isqrt((modulus / 2) as u128) as i128,
    };
    // entrywise CRT then reconstruction
    let mut nums = Vec::with_capacity(len);
    let mut dens = Vec::with_capacity(len);
    for idx in 0..len {
        let mut x: i128 = residues[0][idx] as i128;
        let mut m: i128 = primes[0] as i128;
        for k in 1..primes.len() {
            let p = primes[k] as i128;
            let r = residues[k][idx] as i128;
            // x' == x mod m, x' == r mod p
            let (_, minv, _) = egcd(m % p, p);
            let t = ((r - x).rem_euclid(p) * minv.rem_euclid(p)).rem_euclid(p);
            x += m * t;
            m *= p;
        }
        let (n, d) = rational_reconstruct(x, modulus, b)
            .ok_or(ZfieldError::ReconstructionFailed { index: idx })?;
        nums.push(n);
        dens.push(d);
    }
    // common denominator, then reduce by the common content
    let mut common: i128 = 1;
    for &d in &dens {
        common = common / egcd(common, d).0 * d;
        if common > (1i128 << 62) {
            return Err(ZfieldError::ModulusOverflow);
        }
    }
    let mut scaled: Vec<i128> = nums
        .iter()
        .zip(dens.iter())
        .map(|(&n, &d)| n * (common / d))
        .collect();
    let mut g = common;
    for &n in &scaled {
        g = egcd(g, n).0;
    }
    if g > 1 {
        for n in scaled.iter_mut() {
            *n /= g;
        }
        common /= g;
    }
    let numerators = scaled
        .iter()
        .map(|&n| i64::try_from(n).map_err(|_| ZfieldError::ModulusOverflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalVector {
        numerators,
        denominator: common as u64,
    })
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}
