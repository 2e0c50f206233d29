//! The Weil representation of SL2(Z/NZ) on the group algebra of a finite
//! quadratic module of level N, realized over a prime field F_l with a
//! distinguished root of unity of order N.
//!
//! On the standard basis (e_x) the generators act by
//!   T e_x = e(Q(x)) e_x,
//!   S e_x = w * sum_y e(-B(x, y)) e_y,
//! where w = e(-sig/8)/sqrt(|A|) = sum_x e(-Q(x)) / |A|. Under the fixed
//! embedding e(1/N) -> zeta both formulas make sense over F_l, and no
//! square roots or eighth roots ever need to be extracted: w is computed
//! as the normalized Gauss sum itself.

use crate::fqm::{Element, FiniteQuadraticModule, FqmError, ModuleProfile};
use crate::zfield::{choose_primes, inv_mod, FieldMatrix, ZetaFieldContext, ZfieldError};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeilError {
    /// The representation does not descend to SL2(Z) for odd signature.
    OddSignature,
    /// The prime is not admissible for the module's level.
    InadmissiblePrime {
        ell: u64,
        level: u64,
    },
    /// chi(d) requires gcd(d, N) = 1.
    NotAUnit {
        d: u64,
        n: u64,
    },
    /// The matrix is not in SL2(Z/NZ).
    NotUnimodular,
    /// An integral-basis certification check failed after retries.
    Certification(String),
    /// |SL2(Z/NZ)| exceeds the character-sum bound.
    OracleBound {
        size: u128,
        bound: u128,
    },
    /// tensor_compose received parts not matching the module.
    PartMismatch,
    Fqm(FqmError),
    Zfield(ZfieldError),
}

impl fmt::Display for WeilError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeilError::OddSignature => {
                write!(
                    f,
                    "odd signature: the invariant space is zero and no SL2(Z) action exists"
                )
            }
            WeilError::InadmissiblePrime { ell, level } => {
                write!(f, "prime {ell} is not admissible for level {level}")
            }
            WeilError::NotAUnit { d, n } => write!(f, "{d} is not a unit mod {n}"),
            WeilError::NotUnimodular => write!(f, "matrix is not in SL2(Z/NZ)"),
            WeilError::Certification(s) => write!(f, "certification failed: {s}"),
            WeilError::OracleBound { size, bound } => {
                write!(f, "|SL2(Z/NZ)| = {size} exceeds the bound {bound}")
            }
            WeilError::PartMismatch => write!(f, "part list does not match the module"),
            WeilError::Fqm(e) => write!(f, "{e}"),
            WeilError::Zfield(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for WeilError {}

impl From<FqmError> for WeilError {
    fn from(e: FqmError) -> Self {
        WeilError::Fqm(e)
    }
}

impl From<ZfieldError> for WeilError {
    fn from(e: ZfieldError) -> Self {
        WeilError::Zfield(e)
    }
}

/// 2x2 matrix over Z/nZ with determinant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    /// row-major [a, b, c, d]
    pub mat: [u64; 4],
    pub n: u64,
}

impl GroupElement {
    pub fn new(entries: [i64; 4], n: u64) -> Result<Self, WeilError> {
        assert!(n >= 1);
        let m: Vec<u64> = entries
            .iter()
            .map(|&x| x.rem_euclid(n as i64) as u64)
            .collect();
        let det = (m[0] as i128 * m[3] as i128 - m[1] as i128 * m[2] as i128).rem_euclid(n as i128)
            as u64;
        if det != 1 % n {
            return Err(WeilError::NotUnimodular);
        }
        Ok(GroupElement {
            mat: [m[0], m[1], m[2], m[3]],
            n,
        })
    }

    pub fn identity(n: u64) -> Self {
        GroupElement {
            mat: [1 % n, 0, 0, 1 % n],
            n,
        }
    }

    /// S = [[0, -1], [1, 0]].
    pub fn s(n: u64) -> Self {
        GroupElement::new([0, -1, 1, 0], n).unwrap()
    }

    /// T = [[1, 1], [0, 1]].
    pub fn t(n: u64) -> Self {
        GroupElement::new([1, 1, 0, 1], n).unwrap()
    }

    pub fn t_pow(k: i64, n: u64) -> Self {
        GroupElement::new([1, k, 0, 1], n).unwrap()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.n, other.n);
        let n = self.n as u128;
        let a = &self.mat;
        let b = &other.mat;
        let e = |x: u128| (x % n) as u64;
        GroupElement {
            mat: [
                e(a[0] as u128 * b[0] as u128 + a[1] as u128 * b[2] as u128),
                e(a[0] as u128 * b[1] as u128 + a[1] as u128 * b[3] as u128),
                e(a[2] as u128 * b[0] as u128 + a[3] as u128 * b[2] as u128),
                e(a[2] as u128 * b[1] as u128 + a[3] as u128 * b[3] as u128),
            ],
            n: self.n,
        }
    }
}

/// One S- or T-power factor of a word in the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    S,
    T(u64),
}

/// A module together with a zeta-field context at its level, the
/// precomputed Gauss-sum constant w and the parity epsilon.
#[derive(Debug, Clone)]
pub struct WeilContext {
    module: FiniteQuadraticModule,
    zf: ZetaFieldContext,
    profile: ModuleProfile,
    /// w = sum_x zeta^{-N Q(x)} / |A| in F_l.
    w: u64,
    /// (-1)^(sig/2), also w_{-1}/w_{+1} in F_l.
    epsilon: i32,
    /// Q-value numerators mod N, indexed like the element enumeration.
    qvals: Vec<u32>,
    elements: Vec<Element>,
}

impl WeilContext {
    /// Builds the context over an explicit zeta-field; the root order must
    /// be the module's level.
    pub fn new(module: &FiniteQuadraticModule, zf: ZetaFieldContext) -> Result<Self, WeilError> {
        let profile = module.profile()?;
        if profile.epsilon.is_none() {
            return Err(WeilError::OddSignature);
        }
        if zf.n != profile.level {
            return Err(WeilError::InadmissiblePrime {
                ell: zf.ell,
                level: profile.level,
            });
        }
        let ell = zf.ell;
        let elements: Vec<Element> = module.elements().collect();
        let qvals: Vec<u32> = elements.iter().map(|x| module.q_value(x) as u32).collect();
        let inv_order = inv_mod(profile.order % ell, ell).expect("|A| invertible");
        let mut plus = 0u64; // sum zeta^{-q}
        let mut minus = 0u64; // sum zeta^{+q}
        for &q in &qvals {
            plus = (plus + zf.zeta_to_neg(q as u64)) % ell;
            minus = (minus + zf.zeta_to(q as u64)) % ell;
        }
        let w = ((plus as u128 * inv_order as u128) % ell as u128) as u64;
        let w_m1 = ((minus as u128 * inv_order as u128) % ell as u128) as u64;
        // epsilon = w_{-1} / w_{+1} must be a sign and must match the
        // Milgram parity
        let eps_field =
            ((w_m1 as u128 * inv_mod(w, ell).expect("w invertible") as u128) % ell as u128) as u64;
        let epsilon = if eps_field == 1 % ell {
            1
        } else if eps_field == ell - 1 {
            -1
        } else {
            panic!("w_-1/w_+1 = {eps_field} is not a sign in F_{ell}");
        };
        assert_eq!(
            Some(epsilon),
            profile.epsilon,
            "field parity disagrees with the Milgram parity"
        );
        // w * conj(w) = 1/|A|
        debug_assert_eq!(
            (w as u128 * w_m1 as u128 % ell as u128) as u64,
            inv_order,
            "w does not have the Gauss-sum modulus"
        );
        Ok(WeilContext {
            module: module.clone(),
            zf,
            profile,
            w,
            epsilon,
            qvals,
            elements,
        })
    }

    pub fn module(&self) -> &FiniteQuadraticModule {
        &self.module
    }

    pub fn zf(&self) -> &ZetaFieldContext {
        &self.zf
    }

    pub fn profile(&self) -> &ModuleProfile {
        &self.profile
    }

    pub fn ell(&self) -> u64 {
        self.zf.ell
    }

    pub fn level(&self) -> u64 {
        self.zf.n
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn q_numerator(&self, index: usize) -> u64 {
        self.qvals[index] as u64
    }

    /// (T v)(x) = zeta^{N Q(x)} v(x); fixed vectors are exactly those
    /// supported on the isotropic elements.
    pub fn apply_t(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.elements.len());
        let ell = self.zf.ell;
        v.iter()
            .zip(self.qvals.iter())
            .map(|(&c, &q)| (c as u128 * self.zf.zeta_to(q as u64) as u128 % ell as u128) as u64)
            .collect()
    }

    /// (S v)(y) = w * sum_x zeta^{-N B(x, y)} v(x).
    pub fn apply_s(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.elements.len());
        let ell = self.zf.ell;
        let n = self.zf.n;
        let size = self.elements.len();
        let mut out = vec![0u128; size];
        for (xi, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let form = self.module.bilinear_form_row(&self.elements[xi]);
            for (yi, y) in self.elements.iter().enumerate() {
                let mut b = 0u64;
                for (w, &yc) in form.iter().zip(y.coords.iter()) {
                    b = (b + w * yc as u64) % n;
                }
                out[yi] += c as u128 * self.zf.zeta_to_neg(b) as u128;
            }
        }
        out.iter()
            .map(|&acc| ((acc % ell as u128) * self.w as u128 % ell as u128) as u64)
            .collect()
    }

    /// chi(d) = sigma_d(w) / w for units d mod N; for odd |A| this is the
    /// Jacobi symbol (d / |A|).
    pub fn chi(&self, d: u64) -> Result<u64, WeilError> {
        let n = self.zf.n;
        if crate::zfield::gcd(d % n.max(1), n) != 1 && n > 1 {
            return Err(WeilError::NotAUnit { d, n });
        }
        let ell = self.zf.ell;
        let mut sig = 0u64; // sigma_d(sum zeta^{-q}) = sum zeta^{-d q}
        for &q in &self.qvals {
            sig = (sig + self.zf.zeta_to_neg(d % n.max(1) * q as u64 % n.max(1))) % ell;
        }
        let inv_order = inv_mod(self.profile.order % ell, ell).unwrap();
        let sigma_w = (sig as u128 * inv_order as u128 % ell as u128) as u64;
        Ok((sigma_w as u128 * inv_mod(self.w, ell).unwrap() as u128 % ell as u128) as u64)
    }

    /// Dense matrix of rho(S): column x holds S e_x.
    pub fn s_matrix(&self) -> FieldMatrix {
        let size = self.elements.len();
        let ell = self.zf.ell;
        let n = self.zf.n;
        let mut m = FieldMatrix::zeros(size, size, ell);
        for (xi, x) in self.elements.iter().enumerate() {
            let form = self.module.bilinear_form_row(x);
            for (yi, y) in self.elements.iter().enumerate() {
                let mut b = 0u64;
                for (w, &yc) in form.iter().zip(y.coords.iter()) {
                    b = (b + w * yc as u64) % n;
                }
                let val = (self.w as u128 * self.zf.zeta_to_neg(b) as u128 % ell as u128) as u64;
                m.set(yi, xi, val);
            }
        }
        m
    }

    /// Diagonal of rho(T^k).
    fn t_diag(&self, k: u64) -> Vec<u64> {
        self.qvals
            .iter()
            .map(|&q| self.zf.zeta_to(k % self.zf.n * q as u64))
            .collect()
    }

    /// rho(g) for arbitrary g in SL2(Z/NZ), via a word in the generators
    /// obtained by Euclidean reduction of the bottom row; the word is
    /// multiplied back and checked against g before use.
    pub fn rho_matrix(&self, g: &GroupElement) -> Result<FieldMatrix, WeilError> {
        let n = self.zf.n;
        if g.n != n {
            return Err(WeilError::NotUnimodular);
        }
        let size = self.elements.len();
        let ell = self.zf.ell;
        if n == 1 {
            return Ok(FieldMatrix::identity(size, ell));
        }
        let word = sl2_word(g)?;
        // verify the decomposition by multiplying the word back
        let mut check = GroupElement::identity(n);
        for tok in &word {
            let f = match tok {
                Token::S => GroupElement::s(n),
                Token::T(k) => GroupElement::t_pow(*k as i64, n),
            };
            check = check.mul(&f);
        }
        if check != *g {
            return Err(WeilError::NotUnimodular);
        }
        let s_mat = self.s_matrix();
        let mut acc = FieldMatrix::identity(size, ell);
        for tok in &word {
            match tok {
                Token::S => acc = acc.mul(&s_mat),
                Token::T(k) => {
                    // right-multiplying by the diagonal scales columns
                    let diag = self.t_diag(*k);
                    for r in 0..size {
                        let row = &mut acc.data[r * size..(r + 1) * size];
                        for (c, v) in row.iter_mut().enumerate() {
                            *v = (*v as u128 * diag[c] as u128 % ell as u128) as u64;
                        }
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Convenience constructor: picks the smallest admissible prime for the
/// module's level when none is given.
pub fn make_weil_context(
    m: &FiniteQuadraticModule,
    ell: Option<u64>,
) -> Result<WeilContext, WeilError> {
    make_weil_context_min(m, ell, 5)
}

/// As `make_weil_context`, with a lower bound for the default prime search.
pub fn make_weil_context_min(
    m: &FiniteQuadraticModule,
    ell: Option<u64>,
    prime_min: u64,
) -> Result<WeilContext, WeilError> {
    let profile = m.profile()?;
    if profile.epsilon.is_none() {
        return Err(WeilError::OddSignature);
    }
    let n = profile.level;
    let ell = match ell {
        Some(l) => {
            if !crate::zfield::is_prime(l) || l < 5 || (l - 1) % n != 0 {
                return Err(WeilError::InadmissiblePrime { ell: l, level: n });
            }
            l
        }
        None => choose_primes(n, 1, prime_min)[0],
    };
    let zf = ZetaFieldContext::new(ell, n)?;
    WeilContext::new(m, zf)
}

/// Decomposes g into a word in S and T by Euclidean reduction of the
/// bottom row (powers of T shrink the lower-right entry, S swaps), then
/// expresses the remaining upper-triangular matrix through the identity
/// diag(a, d) = S^{-1} T^d S T^a S T^d with S^{-1} = S^3.
fn sl2_word(g: &GroupElement) -> Result<Vec<Token>, WeilError> {
    let n = g.n as i64;
    let (mut a, mut b, mut c, mut d) = (
        g.mat[0] as i64,
        g.mat[1] as i64,
        g.mat[2] as i64,
        g.mat[3] as i64,
    );
    // applied right-factors, to be inverted and appended
    let mut applied: Vec<Token> = Vec::new();
    while c.rem_euclid(n) != 0 {
        if c != 0 {
            // m <- m T^k zeroes d mod c: (c, d) -> (c, d mod c)
            let k = -d.div_euclid(c);
            if k != 0 {
                b += k * a;
                d += k * c;
                applied.push(Token::T(k.rem_euclid(n) as u64));
            }
        }
        // m <- m S: columns (v1, v2) -> (v2, -v1)
        let (na, nb) = (b, -a);
        let (nc, nd) = (d, -c);
        a = na;
        b = nb;
        c = nc;
        d = nd;
        applied.push(Token::S);
    }
    let am = a.rem_euclid(n) as u64;
    let bm = b.rem_euclid(n) as u64;
    let dm = d.rem_euclid(n) as u64;
    let dinv = inv_mod(am, n as u64).ok_or(WeilError::NotUnimodular)?;
    debug_assert_eq!(dinv, dm, "bottom-right entry inverts the top-left one");
    let mut word: Vec<Token> = Vec::new();
    if am == 1 % n as u64 && dm == 1 % n as u64 {
        if bm != 0 {
            word.push(Token::T(bm));
        }
    } else {
        // diag(a, d) followed by T^{a^{ -1} b} = T^{d b}
        word.extend([
            Token::S,
            Token::S,
            Token::S,
            Token::T(dm),
            Token::S,
            Token::T(am),
            Token::S,
        ]);
        let shift = (dm as u128 + dm as u128 * bm as u128) % n as u128;
        if shift != 0 {
            word.push(Token::T(shift as u64));
        }
    }
    // append inverses of the applied factors in reverse order
    for tok in applied.iter().rev() {
        match tok {
            Token::S => word.extend([Token::S, Token::S, Token::S]),
            Token::T(k) => {
                let inv = (n as u64 - k % n as u64) % n as u64;
                if inv != 0 {
                    word.push(Token::T(inv));
                }
            }
        }
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqm::GenusSymbol;

    fn ctx(sym: &str, ell: Option<u64>) -> WeilContext {
        make_weil_context(&GenusSymbol::parse(sym).unwrap().realize(), ell).unwrap()
    }

    #[test]
    fn context_examples() {
        // 2^+2 over F_5: w = 1/2 -> 3
        let c = ctx("2^+2", Some(5));
        assert_eq!(c.w(), 3);
        assert_eq!(c.epsilon(), 1);

        // 3^+1 over F_7, zeta = 2: Q-values are {0, 2/3, 2/3}, so
        // w = (1 + 2 zeta^{-2})/3 = (1 + 2 zeta)/3 = 5/3 -> 4
        let c = ctx("3^+1", Some(7));
        assert_eq!(c.zf().zeta, 2);
        assert_eq!(c.w(), 4);
        assert_eq!(c.epsilon(), -1);

        // odd signature is rejected
        let m = GenusSymbol::parse("2_7^+1").unwrap().realize();
        assert!(matches!(
            make_weil_context(&m, None),
            Err(WeilError::OddSignature)
        ));

        // inadmissible prime is rejected
        let m = GenusSymbol::parse("3^+1").unwrap().realize();
        assert!(matches!(
            make_weil_context(&m, Some(5)),
            Err(WeilError::InadmissiblePrime { .. })
        ));
    }

    #[test]
    fn apply_t_examples() {
        let c = ctx("3^+1", Some(7));
        // e_1 has Q(1) = 2/3, so T e_1 = zeta^2 e_1
        let v = vec![0, 1, 0];
        let tv = c.apply_t(&v);
        assert_eq!(tv, vec![0, c.zf().zeta_to(2), 0]);
        assert_eq!(c.apply_t(&[0, 0, 0]), vec![0, 0, 0]);

        // indicator of the isotropic set is fixed
        let c = ctx("2^+2", Some(5));
        let mut v = vec![0u64; 4];
        for (i, x) in c.elements().iter().enumerate() {
            if c.module().q_value(x) == 0 {
                v[i] = 1;
            }
        }
        assert_eq!(c.apply_t(&v), v);
    }

    #[test]
    fn apply_s_examples() {
        // footnote invariant of 2^+2: the characteristic function of the
        // self-dual subgroup {00, 10} is fixed by S
        let c = ctx("2^+2", Some(5));
        let idx = |coords: [u32; 2]| {
            c.module()
                .index_of(&crate::fqm::Element::new(coords.to_vec())) as usize
        };
        let mut v = vec![0u64; 4];
        v[idx([0, 0])] = 1;
        v[idx([1, 0])] = 1;
        assert_eq!(c.apply_s(&v), v);

        // S^2 v has coefficients epsilon * v(-x)
        let c = ctx("3^+1", Some(7));
        let v = vec![2u64, 3, 5];
        let s2 = c.apply_s(&c.apply_s(&v));
        let ell = c.ell();
        let eps = if c.epsilon() == 1 { 1 } else { ell - 1 };
        let want: Vec<u64> = (0..3)
            .map(|i| {
                let neg = c.module().neg(&c.elements()[i].clone());
                let j = c.module().index_of(&neg) as usize;
                (v[j] as u128 * eps as u128 % ell as u128) as u64
            })
            .collect();
        assert_eq!(s2, want);

        // trivial module: S e_0 = e_0
        let c = ctx("", Some(5));
        assert_eq!(c.apply_s(&[1]), vec![1]);
    }

    #[test]
    fn s_power_relations() {
        for sym in [
            "",
            "2^+2",
            "2^-2",
            "3^+1",
            "3^-2",
            "4^+2",
            "5^+1",
            "9^+1",
            "2^+2.3^+1",
        ] {
            let c = ctx(sym, None);
            let s = c.s_matrix();
            let s2 = s.mul(&s);
            let s4 = s2.mul(&s2);
            let size = c.order();
            assert_eq!(
                s4,
                FieldMatrix::identity(size, c.ell()),
                "S^4 != 1 for {sym}"
            );
            // S^2 = epsilon * negation permutation
            let mut negperm = FieldMatrix::zeros(size, size, c.ell());
            let eps = if c.epsilon() == 1 { 1 } else { c.ell() - 1 };
            for (i, x) in c.elements().iter().enumerate() {
                let j = c.module().index_of(&c.module().neg(x)) as usize;
                negperm.set(j, i, eps);
            }
            assert_eq!(s2, negperm, "S^2 != eps * neg for {sym}");
            // (ST)^3 = S^2
            let mut st = s.clone();
            let diag = c.t_diag(1);
            for r in 0..size {
                for cidx in 0..size {
                    let v = (st.get(r, cidx) as u128 * diag[cidx] as u128 % c.ell() as u128) as u64;
                    st.set(r, cidx, v);
                }
            }
            let st3 = st.mul(&st).mul(&st);
            assert_eq!(st3, s2, "(ST)^3 != S^2 for {sym}");
        }
    }

    #[test]
    fn chi_examples() {
        let c = ctx("3^+1", Some(7));
        assert_eq!(c.chi(1).unwrap(), 1);
        // chi(2) = -1, matching the Jacobi symbol (2/3)
        assert_eq!(c.chi(2).unwrap(), c.ell() - 1);

        let c = ctx("5^-1", None);
        assert_eq!(c.chi(2).unwrap(), c.ell() - 1); // (2/5) = -1
        assert!(c.chi(5).is_err());
    }

    #[test]
    fn chi_multiplicative_and_closed_form() {
        for sym in ["3^+1", "3^-2", "5^+1", "5^+2", "9^+1", "27^-1", "7^+1"] {
            let c = ctx(sym, None);
            let n = c.level();
            let order = c.profile().order;
            let ell = c.ell();
            let units: Vec<u64> = (1..n).filter(|&d| crate::zfield::gcd(d, n) == 1).collect();
            for &d in &units {
                let jd = crate::zfield::jacobi(d as i64, order);
                let want = if jd == 1 { 1 } else { ell - 1 };
                assert_eq!(c.chi(d).unwrap(), want, "chi({d}) on {sym}");
                for &e in &units {
                    let lhs = c.chi(d * e % n).unwrap();
                    let rhs = (c.chi(d).unwrap() as u128 * c.chi(e).unwrap() as u128 % ell as u128)
                        as u64;
                    assert_eq!(lhs, rhs, "chi not multiplicative on {sym}");
                }
            }
        }
    }

    #[test]
    fn rho_matrix_examples() {
        let c = ctx("3^-2", None);
        let n = c.level();
        // g = T matches apply_t on basis vectors
        let rho_t = c.rho_matrix(&GroupElement::t(n)).unwrap();
        let size = c.order();
        for x in 0..size {
            let mut e = vec![0u64; size];
            e[x] = 1;
            let tv = c.apply_t(&e);
            for y in 0..size {
                assert_eq!(rho_t.get(y, x), tv[y]);
            }
        }
        // g = -I acts as epsilon times the negation permutation
        let rho_neg = c
            .rho_matrix(&GroupElement::new([-1, 0, 0, -1], n).unwrap())
            .unwrap();
        let eps = if c.epsilon() == 1 { 1 } else { c.ell() - 1 };
        for (i, x) in c.elements().iter().enumerate() {
            let j = c.module().index_of(&c.module().neg(x)) as usize;
            for r in 0..size {
                assert_eq!(rho_neg.get(r, i), if r == j { eps } else { 0 });
            }
        }
        // g = diag(d^{-1}, d) = chi(d) * permutation x -> d x
        let d = 2u64;
        let dinv = inv_mod(d, n).unwrap();
        let rho_diag = c
            .rho_matrix(&GroupElement::new([dinv as i64, 0, 0, d as i64], n).unwrap())
            .unwrap();
        let chi = c.chi(d).unwrap();
        for (i, x) in c.elements().iter().enumerate() {
            let dx = c.module().scale(d, x);
            let j = c.module().index_of(&dx) as usize;
            for r in 0..size {
                assert_eq!(rho_diag.get(r, i), if r == j { chi } else { 0 });
            }
        }
    }

    #[test]
    fn rho_multiplicative() {
        let c = ctx("4^+2", None);
        let n = c.level();
        let gens = [
            GroupElement::s(n),
            GroupElement::t(n),
            GroupElement::new([1, 0, 1, 1], n).unwrap(),
            GroupElement::new([3, 2, 1, 1], n).unwrap(),
        ];
        for g in &gens {
            for h in &gens {
                let lhs = c.rho_matrix(&g.mul(h)).unwrap();
                let rhs = c.rho_matrix(g).unwrap().mul(&c.rho_matrix(h).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn galois_equivariance() {
        // building the context with zeta^s instead of zeta matches
        // conjugating the group element: rho_{zeta^s}(g) = rho_zeta(g')
        // with g' = [[a, s b], [s^{-1} c, d]]
        for sym in [
            "2^+2",
            "3^+1",
            "4^+2",
            "5^+1",
            "2^+2.3^+1",
            "8^+2",
            "9^+1",
            "7^+1",
            "11^+1",
            "4^+2.3^+1",
        ] {
            let m = GenusSymbol::parse(sym).unwrap().realize();
            let base = make_weil_context(&m, None).unwrap();
            let n = base.level();
            let ell = base.ell();
            if n > 12 {
                continue;
            }
            for s in 1..n {
                if crate::zfield::gcd(s, n) != 1 {
                    continue;
                }
                let zeta_s = crate::zfield::mod_pow(base.zf().zeta, s, ell);
                let twisted =
                    WeilContext::new(&m, ZetaFieldContext::with_zeta(ell, n, zeta_s).unwrap())
                        .unwrap();
                let sinv = inv_mod(s, n).unwrap();
                for g in [
                    GroupElement::s(n),
                    GroupElement::t(n),
                    GroupElement::s(n).mul(&GroupElement::t(n)),
                ] {
                    let [a, b, cc, d] = g.mat;
                    let conj = GroupElement::new(
                        [
                            a as i64,
                            (s as u128 * b as u128 % n as u128) as i64,
                            (sinv as u128 * cc as u128 % n as u128) as i64,
                            d as i64,
                        ],
                        n,
                    )
                    .unwrap();
                    assert_eq!(
                        twisted.rho_matrix(&g).unwrap(),
                        base.rho_matrix(&conj).unwrap(),
                        "Galois equivariance fails for {sym}, s = {s}"
                    );
                }
            }
        }
    }
}
