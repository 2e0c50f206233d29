//! Finite quadratic modules: finite abelian groups carrying a
//! non-degenerate Q/Z-valued quadratic form, stored as integer numerators
//! over a common denominator.
//!
//! A module is presented by cyclic-factor orders d_1, ..., d_r and a
//! symmetric numerator matrix (m_ij) over a denominator D, with
//!   Q(x) = (sum_i m_ii x_i^2 + sum_{i<j} m_ij x_i x_j) / D  (mod 1).
//! After construction D always equals the level, the least N with
//! N*Q(x) integral for all x. The signature s mod 8 is read off the
//! Gauss sum sum_x e(Q(x)) = sqrt(|A|) e(s/8).

mod snf;
mod symbol;

pub use symbol::{GenusSymbol, JordanBlock, SymbolError};

use crate::zfield::jacobi;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FqmError {
    /// The numerator matrix does not descend to the quotient group.
    IllDefined(String),
    /// The bilinear form has a nonzero radical.
    Degenerate,
    /// The floating-point Gauss sum matched no eighth root of unity.
    MilgramResidual,
    /// from_gram requires an even symmetric matrix.
    OddDiagonal,
    /// from_gram requires a non-singular matrix.
    SingularGram,
    /// Intermediate values exceed the supported range.
    Overflow,
}

impl fmt::Display for FqmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FqmError::IllDefined(d) => write!(f, "quadratic form is not well-defined: {d}"),
            FqmError::Degenerate => write!(f, "module is degenerate"),
            FqmError::MilgramResidual => {
                write!(f, "Gauss sum residual matched no signature class")
            }
            FqmError::OddDiagonal => write!(f, "Gram matrix has an odd diagonal entry"),
            FqmError::SingularGram => write!(f, "Gram matrix is singular"),
            FqmError::Overflow => write!(f, "intermediate value out of range"),
        }
    }
}

impl std::error::Error for FqmError {}

/// Group element given by reduced residue coordinates, `coords[i]` in `[0, d_i)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub coords: Vec<u32>,
}

impl Element {
    pub fn new(coords: Vec<u32>) -> Self {
        Element { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// Elementary invariants of a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleProfile {
    pub order: u64,
    pub level: u64,
    /// Milgram signature, mod 8.
    pub signature: u8,
    /// (-1)^(signature/2) for even signature, None for odd signature.
    pub epsilon: Option<i32>,
    /// `|A[2]|`, the number of 2-torsion elements.
    pub twotorsion: u64,
}

/// One local component from `p_parts`, with the embedding back into the
/// ambient module: part coordinate i maps to `scales[i]` times ambient
/// generator `positions[i]`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub positions: Vec<usize>,
    pub scales: Vec<u32>,
    ambient_orders: Vec<u32>,
}

impl Embedding {
    pub fn apply(&self, part_element: &Element) -> Element {
        let mut coords = vec![0u32; self.ambient_orders.len()];
        for (slot, &y) in part_element.coords.iter().enumerate() {
            let pos = self.positions[slot];
            let d = self.ambient_orders[pos] as u64;
            coords[pos] = ((self.scales[slot] as u64 * y as u64) % d) as u32;
        }
        Element::new(coords)
    }
}

#[derive(Debug, Clone)]
pub struct PPart {
    pub prime: u64,
    pub module: FiniteQuadraticModule,
    pub embedding: Embedding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuadraticModule {
    orders: Vec<u32>,
    denom: u64,
    /// full symmetric r x r numerator matrix, entries reduced mod denom;
    /// qmat[i][i] = m_ii, qmat[i][j] = qmat[j][i] = m_ij.
    qmat: Vec<Vec<u64>>,
}

impl FiniteQuadraticModule {
    /// Builds a module from cyclic orders, a common denominator and a
    /// symmetric numerator matrix (the upper triangle is read). The
    /// denominator is normalized to the level.
    pub fn new(orders: Vec<u32>, denom: u64, qmat: &[Vec<i64>]) -> Result<Self, FqmError> {
        let r = orders.len();
        if denom == 0 || denom >= (1 << 31) {
            return Err(FqmError::Overflow);
        }
        if orders.iter().any(|&d| d < 2 || d as u64 >= (1 << 31)) {
            return Err(FqmError::IllDefined("cyclic orders must be >= 2".into()));
        }
        if qmat.len() != r || qmat.iter().any(|row| row.len() != r) {
            return Err(FqmError::IllDefined("numerator matrix shape".into()));
        }
        let mut order: u64 = 1;
        for &d in &orders {
            order = order
                .checked_mul(d as u64)
                .filter(|&o| o < (1 << 40))
                .ok_or(FqmError::Overflow)?;
        }
        let mut m = vec![vec![0u64; r]; r];
        for i in 0..r {
            for j in i..r {
                let v = qmat[i][j].rem_euclid(denom as i64) as u64;
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        // Q must descend to the quotient: shifting x_i by d_i fixes Q mod 1.
        for i in 0..r {
            let d = orders[i] as u128;
            let dd = denom as u128;
            if (d * d % dd * m[i][i] as u128) % dd != 0 {
                return Err(FqmError::IllDefined(format!(
                    "d_{i}^2 m_{i}{i} not divisible by the denominator"
                )));
            }
            if (2 * d * m[i][i] as u128) % dd != 0 {
                return Err(FqmError::IllDefined(format!(
                    "2 d_{i} m_{i}{i} not divisible by the denominator"
                )));
            }
            for j in 0..r {
                if j != i && (d * m[i][j] as u128) % dd != 0 {
                    return Err(FqmError::IllDefined(format!(
                        "d_{i} m_{i}{j} not divisible by the denominator"
                    )));
                }
            }
        }
        // normalize: the minimal common denominator is the level
        let mut g = denom;
        for i in 0..r {
            for j in i..r {
                g = crate::zfield::gcd(g, m[i][j]);
            }
        }
        let (denom, m) = if g > 1 {
            (
                denom / g,
                m.iter()
                    .map(|row| row.iter().map(|&v| v / g).collect())
                    .collect(),
            )
        } else {
            (denom, m)
        };
        Ok(FiniteQuadraticModule {
            orders,
            denom,
            qmat: m,
        })
    }

    /// The module of order 1.
    pub fn trivial() -> Self {
        FiniteQuadraticModule {
            orders: Vec::new(),
            denom: 1,
            qmat: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// The level: equals the stored denominator after normalization.
    pub fn level(&self) -> u64 {
        self.denom
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().map(|&d| d as u64).product()
    }

    /// Numerator n with Q(x) = n / level (mod 1).
    pub fn q_value(&self, x: &Element) -> u64 {
        debug_assert_eq!(x.coords.len(), self.rank());
        let d = self.denom;
        let mut acc = 0u64;
        for i in 0..self.rank() {
            let xi = x.coords[i] as u64;
            if xi == 0 {
                continue;
            }
            acc += self.qmat[i][i] * (xi * xi % d) % d;
            for j in (i + 1)..self.rank() {
                let xj = x.coords[j] as u64;
                if xj != 0 {
                    acc += self.qmat[i][j] * (xi * xj % d) % d;
                }
            }
            acc %= d;
        }
        acc % d
    }

    /// Numerator of the bilinear form B(x, y) = Q(x+y) - Q(x) - Q(y)
    /// over the level.
    pub fn b_value(&self, x: &Element, y: &Element) -> u64 {
        let row = self.bilinear_form_row(x);
        let d = self.denom;
        let mut acc = 0u64;
        for (w, &yi) in row.iter().zip(y.coords.iter()) {
            acc = (acc + w * (yi as u64 % d)) % d;
        }
        acc
    }

    /// Linear form representing B(x, .): B(x, y) = sum_j `row[j]` y_j / level.
    pub fn bilinear_form_row(&self, x: &Element) -> Vec<u64> {
        let d = self.denom;
        let r = self.rank();
        let mut row = vec![0u64; r];
        for j in 0..r {
            let mut acc = 0u64;
            for i in 0..r {
                let xi = x.coords[i] as u64 % d;
                if xi == 0 {
                    continue;
                }
                let coeff = if i == j {
                    2 * self.qmat[j][j] % d
                } else {
                    self.qmat[i][j]
                };
                acc = (acc + coeff * xi) % d;
            }
            row[j] = acc;
        }
        row
    }

    pub fn zero(&self) -> Element {
        Element::new(vec![0; self.rank()])
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        Element::new(
            self.orders
                .iter()
                .zip(a.coords.iter().zip(b.coords.iter()))
                .map(|(&d, (&x, &y))| ((x as u64 + y as u64) % d as u64) as u32)
                .collect(),
        )
    }

    pub fn neg(&self, a: &Element) -> Element {
        Element::new(
            self.orders
                .iter()
                .zip(a.coords.iter())
                .map(|(&d, &x)| if x == 0 { 0 } else { d - x })
                .collect(),
        )
    }

    pub fn scale(&self, k: u64, a: &Element) -> Element {
        Element::new(
            self.orders
                .iter()
                .zip(a.coords.iter())
                .map(|(&d, &x)| ((k % d as u64) * x as u64 % d as u64) as u32)
                .collect(),
        )
    }

    /// Elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let order = self.order();
        (0..order).map(move |i| self.element_at(i))
    }

    /// The i-th element in lexicographic order (first coordinate most
    /// significant).
    pub fn element_at(&self, mut index: u64) -> Element {
        let r = self.rank();
        let mut coords = vec![0u32; r];
        for i in (0..r).rev() {
            let d = self.orders[i] as u64;
            coords[i] = (index % d) as u32;
            index /= d;
        }
        Element::new(coords)
    }

    pub fn index_of(&self, x: &Element) -> u64 {
        let mut idx = 0u64;
        for (i, &c) in x.coords.iter().enumerate() {
            idx = idx * self.orders[i] as u64 + c as u64;
        }
        idx
    }

    /// True when B embeds the group into its character group: no nonzero x
    /// pairs trivially with every generator.
    pub fn is_nondegenerate(&self) -> bool {
        for x in self.elements() {
            if x.is_zero() {
                continue;
            }
            if self.bilinear_form_row(&x).iter().all(|&w| w == 0) {
                return false;
            }
        }
        true
    }

    /// Counts of the Q-value numerators: `hist[n]` = #{x : Q(x) = n/level}.
    pub fn q_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.denom as usize];
        for x in self.elements() {
            hist[self.q_value(&x) as usize] += 1;
        }
        hist
    }

    /// Order, level, Milgram signature, parity and 2-torsion count.
    ///
    /// The signature is matched against all eight candidates of
    /// sum_x e(Q(x)) = sqrt(|A|) e(s/8); the residual must stay below
    /// 1e-6 * sqrt(|A|).
    pub fn profile(&self) -> Result<ModuleProfile, FqmError> {
        if !self.is_nondegenerate() {
            return Err(FqmError::Degenerate);
        }
        let order = self.order();
        let hist = self.q_histogram();
        let n = self.denom as f64;
        let tau = std::f64::consts::TAU;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (j, &c) in hist.iter().enumerate() {
            if c != 0 {
                let th = tau * j as f64 / n;
                re += c as f64 * th.cos();
                im += c as f64 * th.sin();
            }
        }
        let root = (order as f64).sqrt();
        let mut best = (f64::INFINITY, 0u8);
        for s in 0..8u8 {
            let th = tau * s as f64 / 8.0;
            let d = (re - root * th.cos()).hypot(im - root * th.sin());
            if d < best.0 {
                best = (d, s);
            }
        }
        if best.0 > 1e-6 * root {
            return Err(FqmError::MilgramResidual);
        }
        let signature = best.1;
        let epsilon = if signature % 2 == 0 {
            Some(if signature % 4 == 0 { 1 } else { -1 })
        } else {
            None
        };
        let twotorsion = self
            .orders
            .iter()
            .map(|&d| crate::zfield::gcd(d as u64, 2))
            .product();
        if order % 2 == 1 {
            // for odd order the parity is the Jacobi symbol (-1 / |A|)
            debug_assert_eq!(epsilon, Some(jacobi(-1, order) as i32));
        }
        Ok(ModuleProfile {
            order,
            level: self.denom,
            signature,
            epsilon,
            twotorsion,
        })
    }

    /// Orthogonal direct sum; orders concatenate, levels take the lcm,
    /// signatures add mod 8.
    pub fn direct_sum(&self, other: &FiniteQuadraticModule) -> FiniteQuadraticModule {
        let ra = self.rank();
        let rb = other.rank();
        let la = self.denom;
        let lb = other.denom;
        let l = la / crate::zfield::gcd(la, lb) * lb;
        let r = ra + rb;
        let mut qmat = vec![vec![0i64; r]; r];
        for i in 0..ra {
            for j in i..ra {
                qmat[i][j] = (self.qmat[i][j] * (l / la)) as i64;
            }
        }
        for i in 0..rb {
            for j in i..rb {
                qmat[ra + i][ra + j] = (other.qmat[i][j] * (l / lb)) as i64;
            }
        }
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        FiniteQuadraticModule::new(orders, l, &qmat).expect("direct sum is well-defined")
    }

    /// Same group with Q replaced by -Q.
    pub fn negate(&self) -> FiniteQuadraticModule {
        let d = self.denom;
        let r = self.rank();
        let qmat: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..r).map(|j| ((d - self.qmat[i][j]) % d) as i64).collect())
            .collect();
        FiniteQuadraticModule::new(self.orders.clone(), d, &qmat).expect("negation is well-defined")
    }

    /// Decomposition into p-subgroups, one entry per prime dividing |A|,
    /// with the embeddings realizing the orthogonal splitting.
    pub fn p_parts(&self) -> Vec<PPart> {
        let order = self.order();
        let primes: Vec<u64> = crate::zfield::factorize(order)
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let mut parts = Vec::with_capacity(primes.len());
        for p in primes {
            let mut positions = Vec::new();
            let mut scales = Vec::new();
            let mut part_orders = Vec::new();
            for (i, &d) in self.orders.iter().enumerate() {
                let mut pe = 1u64;
                let mut rest = d as u64;
                while rest % p == 0 {
                    pe *= p;
                    rest /= p;
                }
                if pe > 1 {
                    positions.push(i);
                    scales.push(rest as u32);
                    part_orders.push(pe as u32);
                }
            }
            let k = positions.len();
            let dd = self.denom as u128;
            let mut qmat = vec![vec![0i64; k]; k];
            for u in 0..k {
                for v in u..k {
                    let c = scales[u] as u128 * scales[v] as u128 % dd;
                    let m = self.qmat[positions[u]][positions[v]] as u128;
                    qmat[u][v] = ((c * m) % dd) as i64;
                }
            }
            let module = FiniteQuadraticModule::new(part_orders, self.denom, &qmat)
                .expect("p-part is well-defined");
            parts.push(PPart {
                prime: p,
                module,
                embedding: Embedding {
                    positions,
                    scales,
                    ambient_orders: self.orders.clone(),
                },
            });
        }
        parts
    }

    /// All x with Q(x) = 0, in lexicographic coordinate order.
    pub fn isotropic_elements(&self) -> Vec<Element> {
        self.elements().filter(|x| self.q_value(x) == 0).collect()
    }

    /// Discriminant module of an even lattice given by its Gram matrix.
    pub fn from_gram(gram: &[Vec<i64>]) -> Result<FiniteQuadraticModule, FqmError> {
        let n = gram.len();
        if gram.iter().any(|row| row.len() != n) {
            return Err(FqmError::IllDefined("Gram matrix must be square".into()));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(FqmError::OddDiagonal);
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(FqmError::IllDefined("Gram matrix must be symmetric".into()));
                }
            }
        }
        if n == 0 {
            return Ok(FiniteQuadraticModule::trivial());
        }
        let a: Vec<Vec<i128>> = gram
            .iter()
            .map(|row| row.iter().map(|&x| x as i128).collect())
            .collect();
        let (d, v) = snf::smith_normal_form(a.clone());
        if d.iter().any(|&x| x == 0) {
            return Err(FqmError::SingularGram);
        }
        // dual generators are the columns of V scaled by 1/d_i; drop the
        // trivial factors d_i = 1
        let kept: Vec<usize> = (0..n).filter(|&i| d[i] > 1).collect();
        let mut lcm: i128 = 1;
        for &i in &kept {
            lcm = lcm / gcd_i128(lcm, d[i]) * d[i];
        }
        let denom = 2 * lcm * lcm;
        if denom >= (1 << 31) {
            return Err(FqmError::Overflow);
        }
        let k = kept.len();
        let mut qmat = vec![vec![0i64; k]; k];
        for (u, &iu) in kept.iter().enumerate() {
            for (w, &iw) in kept.iter().enumerate().skip(u) {
                // pairing of dual generators: g_u^T G g_w
                let mut acc: i128 = 0;
                for r in 0..n {
                    for c in 0..n {
                        acc += v[r][iu] * a[r][c] * v[c][iw];
                    }
                }
                let scale = if u == w {
                    denom / (2 * d[iu] * d[iu])
                } else {
                    denom / (d[iu] * d[iw])
                };
                qmat[u][w] = (acc * scale).rem_euclid(denom) as i64;
            }
        }
        let orders: Vec<u32> = kept.iter().map(|&i| d[i] as u32).collect();
        FiniteQuadraticModule::new(orders, denom as u64, &qmat)
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
