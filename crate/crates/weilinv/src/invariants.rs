//! Computation of the invariant space of the Weil representation: the
//! symmetrized basis, the H' matrix, kernel extraction over F_l,
//! dimensions via local decomposition, integral bases via multi-prime
//! lifting, and a character-sum oracle.
//!
//! Working on the eigenspace of the parity epsilon = (-1)^(sig/2), where
//! S is an involution, the invariants are
//!   { v in (1 + S)(span of isotropic symmetrized vectors) :
//!     supp(v) isotropic },
//! so a basis falls out of one nullspace computation: split H' into the
//! isotropic rows U and the rest V, take { U x : V x = 0 }.

use crate::fqm::{Element, FiniteQuadraticModule, PPart};
use crate::weil::{make_weil_context_min, GroupElement, WeilContext, WeilError};
use crate::zfield::{choose_primes, inv_mod, kernel_basis, rational_lift, sl2_order, FieldMatrix};
use std::collections::HashSet;

/// Policy knobs for prime selection and decomposition.
#[derive(Debug, Clone)]
pub struct InvariantOptions {
    /// Lower bound for the admissible-prime search.
    pub prime_min: u64,
    /// Explicit primes to use instead of the smallest admissible ones.
    pub primes: Option<Vec<u64>>,
    /// Split into p-parts before computing (dimension only).
    pub use_local: bool,
    /// Number of CRT primes for integral bases.
    pub crt_primes: usize,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions {
            prime_min: 5,
            primes: None,
            use_local: true,
            crt_primes: 3,
        }
    }
}

/// Basis of the parity eigenspace: one representative per ±-orbit,
/// isotropic representatives first.
#[derive(Debug, Clone)]
pub struct SymmetrizedBasis {
    pub epsilon: i32,
    /// isotropic reps, then non-isotropic reps, lexicographic in each block
    pub reps: Vec<Element>,
    pub self_paired: Vec<bool>,
    pub m_prime: usize,
    pub n_prime: usize,
}

/// Vectors spanning the invariant space, stored by their values at the
/// isotropic ±-orbit representatives; the value at -a is epsilon times the
/// value at a.
#[derive(Debug, Clone)]
pub struct InvariantBasis<T> {
    /// Some(l) for coefficients in F_l, None for integer coefficients.
    pub prime: Option<u64>,
    /// The primes that went into the computation (one for a modular basis,
    /// the CRT list for an integral one).
    pub primes_used: Vec<u64>,
    pub epsilon: i32,
    pub reps: Vec<Element>,
    pub self_paired: Vec<bool>,
    pub vectors: Vec<Vec<T>>,
}

pub type ModularBasis = InvariantBasis<u64>;
pub type IntegralBasis = InvariantBasis<i64>;

impl<T> InvariantBasis<T> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl ModularBasis {
    /// Expands a stored vector to full-module indexing.
    pub fn expand(&self, m: &FiniteQuadraticModule, vector: &[u64]) -> Vec<u64> {
        let ell = self.prime.expect("modular basis carries its prime");
        let eps = if self.epsilon >= 0 { 1 } else { ell - 1 };
        let mut full = vec![0u64; m.order() as usize];
        for (rep, &val) in self.reps.iter().zip(vector.iter()) {
            full[m.index_of(rep) as usize] = val;
            let neg = m.neg(rep);
            if &neg != rep {
                full[m.index_of(&neg) as usize] = (val as u128 * eps as u128 % ell as u128) as u64;
            }
        }
        full
    }
}

impl IntegralBasis {
    pub fn expand(&self, m: &FiniteQuadraticModule, vector: &[i64]) -> Vec<i64> {
        let mut full = vec![0i64; m.order() as usize];
        for (rep, &val) in self.reps.iter().zip(vector.iter()) {
            full[m.index_of(rep) as usize] = val;
            let neg = m.neg(rep);
            if &neg != rep {
                full[m.index_of(&neg) as usize] = self.epsilon as i64 * val;
            }
        }
        full
    }

    /// Reduction of a stored vector mod l, in full-module indexing.
    pub fn expand_mod(&self, m: &FiniteQuadraticModule, vector: &[i64], ell: u64) -> Vec<u64> {
        self.expand(m, vector)
            .iter()
            .map(|&v| v.rem_euclid(ell as i64) as u64)
            .collect()
    }
}

/// Representatives of the ±-orbits, isotropic first; self-paired orbits are
/// dropped for epsilon = -1 since their antisymmetrization vanishes.
pub fn symmetrized_basis(m: &FiniteQuadraticModule, epsilon: i32) -> SymmetrizedBasis {
    assert!(epsilon == 1 || epsilon == -1);
    let mut iso = Vec::new();
    let mut iso_sp = Vec::new();
    let mut non = Vec::new();
    let mut non_sp = Vec::new();
    for x in m.elements() {
        let nx = m.neg(&x);
        if nx < x {
            continue; // the representative min(x, -x) was seen earlier
        }
        let self_paired = nx == x;
        if self_paired && epsilon == -1 {
            continue;
        }
        if m.q_value(&x) == 0 {
            iso.push(x);
            iso_sp.push(self_paired);
        } else {
            non.push(x);
            non_sp.push(self_paired);
        }
    }
    let m_prime = iso.len();
    let n_prime = non.len();
    let mut reps = iso;
    reps.extend(non);
    let mut self_paired = iso_sp;
    self_paired.extend(non_sp);
    SymmetrizedBasis {
        epsilon,
        reps,
        self_paired,
        m_prime,
        n_prime,
    }
}

/// Row i of H' (and of the S-action matrix in value coordinates) for the
/// columns indexed by the first `cols` reps.
fn h_row(ctx: &WeilContext, sb: &SymmetrizedBasis, i: usize, cols: usize, delta: bool) -> Vec<u64> {
    let m = ctx.module();
    let zf = ctx.zf();
    let ell = ctx.ell();
    let n = ctx.level();
    let eps_f = if ctx.epsilon() == 1 { 1u64 } else { ell - 1 };
    let inv2 = inv_mod(2, ell).unwrap();
    // w / (2 f_i): f_i = 1 for self-paired reps, 1/2 otherwise
    let wf = if sb.self_paired[i] {
        (ctx.w() as u128 * inv2 as u128 % ell as u128) as u64
    } else {
        ctx.w()
    };
    let form = m.bilinear_form_row(&sb.reps[i]);
    let mut row = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut b = 0u64;
        for (w, &xc) in form.iter().zip(sb.reps[j].coords.iter()) {
            b = (b + w * xc as u64) % n;
        }
        let sym = (zf.zeta_to_neg(b) as u128 + eps_f as u128 * zf.zeta_to(b) as u128) % ell as u128;
        let mut val = (wf as u128 * sym % ell as u128) as u64;
        if delta && i == j {
            val = (val + 1) % ell;
        }
        row.push(val);
    }
    row
}

/// The (m'+n') x m' matrix H' with
///   h_ij = w/(2 f_i) (zeta^{-N B(x_j, x_i)} + eps zeta^{N B(x_j, x_i)}) + delta_ij,
/// expressing (1 + S) applied to the isotropic symmetrized basis vectors.
pub fn build_h_matrix(ctx: &WeilContext, sb: &SymmetrizedBasis) -> FieldMatrix {
    assert_eq!(
        ctx.epsilon(),
        sb.epsilon,
        "context parity must match the symmetrized basis"
    );
    let rows = sb.m_prime + sb.n_prime;
    let mut h = FieldMatrix::zeros(rows, sb.m_prime, ctx.ell());
    for i in 0..rows {
        let row = h_row(ctx, sb, i, sb.m_prime, true);
        h.data[i * sb.m_prime..(i + 1) * sb.m_prime].copy_from_slice(&row);
    }
    h
}

fn empty_basis<T>(prime: Option<u64>) -> InvariantBasis<T> {
    InvariantBasis {
        prime,
        primes_used: prime.into_iter().collect(),
        epsilon: 1,
        reps: Vec::new(),
        self_paired: Vec::new(),
        vectors: Vec::new(),
    }
}

/// Echelonized basis of the invariant space over F_l (the smallest
/// admissible prime for the level when none is given). Odd-signature
/// modules yield the empty basis without constructing a Weil context.
pub fn invariants_mod_ell(
    m: &FiniteQuadraticModule,
    ell: Option<u64>,
) -> Result<ModularBasis, WeilError> {
    invariants_mod_ell_min(m, ell, 5)
}

pub fn invariants_mod_ell_min(
    m: &FiniteQuadraticModule,
    ell: Option<u64>,
    prime_min: u64,
) -> Result<ModularBasis, WeilError> {
    let profile = m.profile()?;
    if profile.epsilon.is_none() {
        return Ok(empty_basis(ell));
    }
    let ctx = make_weil_context_min(m, ell, prime_min)?;
    let eps = ctx.epsilon();
    let sb = symmetrized_basis(m, eps);
    let ell = ctx.ell();

    // U: rows over the isotropic reps, V: rows over the rest
    let mut u = FieldMatrix::zeros(sb.m_prime, sb.m_prime, ell);
    for i in 0..sb.m_prime {
        let row = h_row(&ctx, &sb, i, sb.m_prime, true);
        u.data[i * sb.m_prime..(i + 1) * sb.m_prime].copy_from_slice(&row);
    }
    let mut v = FieldMatrix::zeros(sb.n_prime, sb.m_prime, ell);
    for i in 0..sb.n_prime {
        let row = h_row(&ctx, &sb, sb.m_prime + i, sb.m_prime, true);
        v.data[i * sb.m_prime..(i + 1) * sb.m_prime].copy_from_slice(&row);
    }

    let kernel = kernel_basis(&v);
    drop(v);
    let reps: Vec<Element> = sb.reps[..sb.m_prime].to_vec();
    let self_paired: Vec<bool> = sb.self_paired[..sb.m_prime].to_vec();
    if kernel.is_empty() {
        return Ok(ModularBasis {
            prime: Some(ell),
            primes_used: vec![ell],
            epsilon: eps,
            reps,
            self_paired,
            vectors: Vec::new(),
        });
    }

    // images U x, converted from coefficients over the symmetrized basis
    // to values at the reps (value = coefficient * f_i), then echelonized
    let mut k = FieldMatrix::zeros(sb.m_prime, kernel.len(), ell);
    for (c, vec) in kernel.iter().enumerate() {
        for (r, &val) in vec.iter().enumerate() {
            k.data[r * kernel.len() + c] = val;
        }
    }
    let p = u.mul(&k);
    drop(u);
    drop(k);
    let inv2 = inv_mod(2, ell).unwrap();
    let mut rows = FieldMatrix::zeros(kernel.len(), sb.m_prime, ell);
    for c in 0..kernel.len() {
        for r in 0..sb.m_prime {
            let coeff = p.get(r, c);
            let val = if self_paired[r] {
                coeff
            } else {
                (coeff as u128 * inv2 as u128 % ell as u128) as u64
            };
            rows.data[c * sb.m_prime + r] = val;
        }
    }
    let pivots = rows.rref();
    let vectors: Vec<Vec<u64>> = (0..pivots.len()).map(|i| rows.row(i).to_vec()).collect();
    Ok(ModularBasis {
        prime: Some(ell),
        primes_used: vec![ell],
        epsilon: eps,
        reps,
        self_paired,
        vectors,
    })
}

/// dim of the invariant space: 0 for odd signature, otherwise the product
/// over the p-parts of the local dimensions (or a direct whole-module run
/// when local splitting is disabled).
pub fn dimension(m: &FiniteQuadraticModule) -> Result<u64, WeilError> {
    dimension_opt(m, &InvariantOptions::default())
}

pub fn dimension_opt(m: &FiniteQuadraticModule, opts: &InvariantOptions) -> Result<u64, WeilError> {
    let profile = m.profile()?;
    if profile.epsilon.is_none() {
        return Ok(0);
    }
    let explicit = opts.primes.as_ref().and_then(|p| p.first().copied());
    if !opts.use_local {
        return Ok(invariants_mod_ell_min(m, explicit, opts.prime_min)?.len() as u64);
    }
    let mut dim = 1u64;
    for part in m.p_parts() {
        let basis = invariants_mod_ell_min(&part.module, explicit, opts.prime_min)?;
        dim *= basis.len() as u64;
        if dim == 0 {
            break;
        }
    }
    Ok(dim)
}

/// Integral basis of the invariant space: computes the echelonized mod-l
/// bases for several admissible primes, CRT-lifts the entries to rationals
/// and scales each vector to a primitive integer vector. Certifies the
/// outcome (cardinality equals the dimension, S-invariance modulo two
/// fresh primes) and retries with more primes on reconstruction failure.
pub fn integral_basis(m: &FiniteQuadraticModule, k: usize) -> Result<IntegralBasis, WeilError> {
    integral_basis_opt(
        m,
        &InvariantOptions {
            crt_primes: k,
            ..InvariantOptions::default()
        },
    )
}

pub fn integral_basis_opt(
    m: &FiniteQuadraticModule,
    opts: &InvariantOptions,
) -> Result<IntegralBasis, WeilError> {
    let profile = m.profile()?;
    if profile.epsilon.is_none() {
        return Ok(empty_basis(None));
    }
    let level = profile.level;
    let expected_dim = dimension_opt(m, opts)?;
    let mut last_err = WeilError::Certification("no attempt made".into());
    for attempt in 0..3 {
        let count = opts.crt_primes + 2 * attempt;
        let primes: Vec<u64> = match &opts.primes {
            Some(p) if attempt == 0 => p.clone(),
            Some(p) => {
                let start = p.iter().copied().max().unwrap_or(5) + 1;
                let mut all = p.clone();
                all.extend(choose_primes(level, 2 * attempt, start.max(opts.prime_min)));
                all
            }
            None => choose_primes(level, count, opts.prime_min),
        };
        match lift_attempt(m, &primes, expected_dim, opts.prime_min) {
            Ok(basis) => return Ok(basis),
            Err(e @ (WeilError::Zfield(_) | WeilError::Certification(_))) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn lift_attempt(
    m: &FiniteQuadraticModule,
    primes: &[u64],
    expected_dim: u64,
    prime_min: u64,
) -> Result<IntegralBasis, WeilError> {
    let mut bases = Vec::with_capacity(primes.len());
    for &ell in primes {
        bases.push(invariants_mod_ell_min(m, Some(ell), prime_min)?);
    }
    let dim = bases[0].len();
    if bases.iter().any(|b| b.len() != dim) {
        return Err(WeilError::Certification(
            "mod-l dimensions disagree across admissible primes".into(),
        ));
    }
    // echelon pivot patterns must agree entrywise for CRT to make sense
    let pivot_cols = |b: &ModularBasis| -> Vec<usize> {
        b.vectors
            .iter()
            .map(|v| v.iter().position(|&x| x != 0).unwrap_or(v.len()))
            .collect()
    };
    let pattern = pivot_cols(&bases[0]);
    if bases.iter().any(|b| pivot_cols(b) != pattern) {
        return Err(WeilError::Certification(
            "echelon pivot patterns disagree across primes".into(),
        ));
    }
    let mut vectors = Vec::with_capacity(dim);
    for i in 0..dim {
        let residues: Vec<Vec<u64>> = bases.iter().map(|b| b.vectors[i].clone()).collect();
        let rational = rational_lift(&residues, primes, None)?;
        vectors.push(rational.to_primitive_integers());
    }
    let basis = IntegralBasis {
        prime: None,
        primes_used: primes.to_vec(),
        epsilon: bases[0].epsilon,
        reps: bases[0].reps.clone(),
        self_paired: bases[0].self_paired.clone(),
        vectors,
    };
    // certification: count, exact isotropic support (structural), and
    // S- and T-invariance after reduction modulo two fresh primes
    if basis.len() as u64 != expected_dim {
        return Err(WeilError::Certification(format!(
            "lifted basis has {} vectors, dimension is {expected_dim}",
            basis.len()
        )));
    }
    let fresh_start = primes.iter().copied().max().unwrap_or(5) + 1;
    let fresh = choose_primes(m.level().max(1), 2, fresh_start);
    for &ell in &fresh {
        let ctx = make_weil_context_min(m, Some(ell), prime_min)?;
        for v in &basis.vectors {
            let full = basis.expand_mod(m, v, ell);
            if !verify_invariant(&ctx, &full) {
                return Err(WeilError::Certification(format!(
                    "lifted vector fails invariance mod fresh prime {ell}"
                )));
            }
        }
    }
    Ok(basis)
}

/// Tensor product of per-part integral bases along the CRT isomorphism;
/// the output has one vector per choice of one vector from each part.
pub fn tensor_compose(
    m: &FiniteQuadraticModule,
    parts: &[(PPart, IntegralBasis)],
) -> Result<IntegralBasis, WeilError> {
    let profile = m.profile()?;
    let Some(eps_full) = profile.epsilon else {
        return Err(WeilError::OddSignature);
    };
    let own_parts = m.p_parts();
    if parts.len() != own_parts.len()
        || parts
            .iter()
            .zip(own_parts.iter())
            .any(|((p, _), q)| p.prime != q.prime || p.module.order() != q.module.order())
    {
        return Err(WeilError::PartMismatch);
    }
    let sb = symmetrized_basis(m, eps_full);
    let reps: Vec<Element> = sb.reps[..sb.m_prime].to_vec();
    let self_paired: Vec<bool> = sb.self_paired[..sb.m_prime].to_vec();
    if parts.iter().any(|(_, b)| b.is_empty()) {
        return Ok(IntegralBasis {
            prime: None,
            primes_used: Vec::new(),
            epsilon: eps_full,
            reps,
            self_paired,
            vectors: Vec::new(),
        });
    }
    // expansions of every part vector over the part's full group
    let expansions: Vec<Vec<Vec<i64>>> = parts
        .iter()
        .map(|(p, b)| b.vectors.iter().map(|v| b.expand(&p.module, v)).collect())
        .collect();
    let part_elements: Vec<Vec<Element>> = parts
        .iter()
        .map(|(p, _)| p.module.elements().collect())
        .collect();
    let mut vectors = Vec::new();
    let mut choice = vec![0usize; parts.len()];
    loop {
        // dense product vector over the full module
        let mut full = vec![0i64; m.order() as usize];
        let mut stack = vec![(0usize, m.zero(), 1i64)];
        while let Some((depth, acc, coeff)) = stack.pop() {
            if coeff == 0 {
                continue;
            }
            if depth == parts.len() {
                full[m.index_of(&acc) as usize] = coeff;
                continue;
            }
            let expansion = &expansions[depth][choice[depth]];
            for (idx, el) in part_elements[depth].iter().enumerate() {
                let c = expansion[idx];
                if c != 0 {
                    let img = parts[depth].0.embedding.apply(el);
                    stack.push((depth + 1, m.add(&acc, &img), coeff * c));
                }
            }
        }
        // restrict to the isotropic reps; the support must be isotropic
        for (i, x) in m.elements().enumerate() {
            if full[i] != 0 {
                debug_assert_eq!(m.q_value(&x), 0, "tensor vector supported off Iso(A)");
            }
        }
        let vec: Vec<i64> = reps.iter().map(|r| full[m.index_of(r) as usize]).collect();
        vectors.push(vec);
        // advance the product counter
        let mut d = parts.len();
        loop {
            if d == 0 {
                let sizes: usize = parts.iter().map(|(_, b)| b.len()).product();
                assert_eq!(vectors.len(), sizes);
                return Ok(IntegralBasis {
                    prime: None,
                    primes_used: Vec::new(),
                    epsilon: eps_full,
                    reps,
                    self_paired,
                    vectors,
                });
            }
            d -= 1;
            choice[d] += 1;
            if choice[d] < parts[d].1.len() {
                break;
            }
            choice[d] = 0;
        }
    }
}

/// Dimension by character orthogonality: (1/|G_N|) sum_g tr rho(g),
/// computed in F_l over a prime exceeding |A| by breadth-first
/// enumeration of SL2(Z/NZ) from the identity with the generators S, T.
pub fn character_sum_dimension(m: &FiniteQuadraticModule, bound: u128) -> Result<u64, WeilError> {
    character_sum_dimension_min(m, bound, 5)
}

pub fn character_sum_dimension_min(
    m: &FiniteQuadraticModule,
    bound: u128,
    prime_min: u64,
) -> Result<u64, WeilError> {
    let profile = m.profile()?;
    if profile.epsilon.is_none() {
        return Err(WeilError::OddSignature);
    }
    let n = profile.level;
    let group_order = sl2_order(n);
    if group_order > bound {
        return Err(WeilError::OracleBound {
            size: group_order,
            bound,
        });
    }
    // the prime must exceed |A| so the dimension lifts uniquely
    let ell = choose_primes(n, 1, prime_min.max(profile.order + 1))[0];
    let ctx = make_weil_context_min(m, Some(ell), prime_min)?;
    let size = ctx.order();
    let s_mat = ctx.s_matrix();
    let t_diag: Vec<u64> = (0..size)
        .map(|i| ctx.zf().zeta_to(ctx.q_numerator(i)))
        .collect();
    let trace = |mm: &FieldMatrix| -> u64 {
        let mut acc = 0u64;
        for i in 0..size {
            acc = (acc + mm.get(i, i)) % ell;
        }
        acc
    };

    let identity = GroupElement::identity(n);
    let mut visited: HashSet<[u64; 4]> = HashSet::new();
    visited.insert(identity.mat);
    let mut frontier = vec![(identity, FieldMatrix::identity(size, ell))];
    let mut total = trace(&frontier[0].1);
    let mut seen = 1u128;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (g, rho) in &frontier {
            // g T: columns scale by the T-diagonal
            let gt = g.mul(&GroupElement::t(n));
            if visited.insert(gt.mat) {
                let mut rt = rho.clone();
                for r in 0..size {
                    let row = &mut rt.data[r * size..(r + 1) * size];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = (*v as u128 * t_diag[c] as u128 % ell as u128) as u64;
                    }
                }
                total = (total + trace(&rt)) % ell;
                seen += 1;
                next.push((gt, rt));
            }
            // g S: full product
            let gs = g.mul(&GroupElement::s(n));
            if visited.insert(gs.mat) {
                let rs = rho.mul(&s_mat);
                total = (total + trace(&rs)) % ell;
                seen += 1;
                next.push((gs, rs));
            }
        }
        frontier = next;
    }
    assert_eq!(seen, group_order, "BFS did not exhaust SL2(Z/NZ)");
    let inv = inv_mod((group_order % ell as u128) as u64, ell).expect("|G| invertible");
    let dim = (total as u128 * inv as u128 % ell as u128) as u64;
    if dim > profile.order {
        return Err(WeilError::Certification(format!(
            "character sum lifted to {dim} > |A|"
        )));
    }
    Ok(dim)
}

/// True iff v (full-module indexing over the context's field) is fixed by
/// both generators.
pub fn verify_invariant(ctx: &WeilContext, v: &[u64]) -> bool {
    ctx.apply_t(v) == v && ctx.apply_s(v) == v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqm::GenusSymbol;

    fn module(sym: &str) -> FiniteQuadraticModule {
        GenusSymbol::parse(sym).unwrap().realize()
    }

    #[test]
    fn symmetrized_basis_examples() {
        let sb = symmetrized_basis(&module("2^+2"), 1);
        assert_eq!(sb.reps.len(), 4);
        assert!(sb.self_paired.iter().all(|&s| s));
        assert_eq!((sb.m_prime, sb.n_prime), (3, 1));

        let sb = symmetrized_basis(&module("3^+1"), -1);
        assert_eq!((sb.m_prime, sb.n_prime), (0, 1));
        assert_eq!(sb.reps[0], Element::new(vec![1]));
        assert!(!sb.self_paired[0]);

        let sb = symmetrized_basis(&module("5^-1"), 1);
        assert_eq!(sb.reps.len(), 3); // (5 + 1)/2
        assert_eq!((sb.m_prime, sb.n_prime), (1, 2));
        assert_eq!(sb.reps[1], Element::new(vec![1]));
        assert_eq!(sb.reps[2], Element::new(vec![2]));
    }

    #[test]
    fn symmetrized_count_formula() {
        for sym in [
            "2^+2",
            "2^-4",
            "4^+2",
            "3^-2",
            "9^+1",
            "2_7^+1.4^+2.8_1^+1",
            "5^+2",
        ] {
            let m = module(sym);
            let p = m.profile().unwrap();
            for eps in [1, -1] {
                let sb = symmetrized_basis(&m, eps);
                let want = if eps == 1 {
                    (p.order + p.twotorsion) / 2
                } else {
                    (p.order - p.twotorsion) / 2
                };
                assert_eq!(sb.reps.len() as u64, want, "{sym} eps={eps}");
            }
        }
    }

    #[test]
    fn h_matrix_examples() {
        // 2^+2 over F_5: 4 x 3, entry (00, 00) = w + 1 = 4
        let m = module("2^+2");
        let ctx = make_weil_context_min(&m, Some(5), 5).unwrap();
        let sb = symmetrized_basis(&m, ctx.epsilon());
        let h = build_h_matrix(&ctx, &sb);
        assert_eq!((h.rows, h.cols), (4, 3));
        assert_eq!(h.get(0, 0), 4);

        // trivial module: 1 x 1 matrix [w + 1] = [2]
        let m = FiniteQuadraticModule::trivial();
        let ctx = make_weil_context_min(&m, None, 5).unwrap();
        let sb = symmetrized_basis(&m, 1);
        let h = build_h_matrix(&ctx, &sb);
        assert_eq!((h.rows, h.cols), (1, 1));
        assert_eq!(h.get(0, 0), 2);
    }

    #[test]
    fn invariants_small_examples() {
        // 2^+2: dimension 2; span contains both self-dual indicators
        let m = module("2^+2");
        let b = invariants_mod_ell(&m, None).unwrap();
        assert_eq!(b.len(), 2);
        let ctx = make_weil_context_min(&m, b.prime, 5).unwrap();
        for v in &b.vectors {
            assert!(verify_invariant(&ctx, &b.expand(&m, v)));
        }
        // the reductions of 1_{00,10} and 1_{00,01} lie in the span:
        // with reps [00, 01, 10] echelonized over F_5 the span is exactly
        // the vectors with v(01) + v(10) = v(00)
        for indicator in [[1u64, 0, 1], [1, 1, 0]] {
            let mut probe = b.vectors.clone();
            probe.push(indicator.to_vec());
            let mat = FieldMatrix::from_rows(probe, b.prime.unwrap());
            assert_eq!(mat.rank(), 2, "indicator not in the span");
        }

        assert_eq!(invariants_mod_ell(&module("3^+1"), None).unwrap().len(), 0);

        // 9^+1: one vector, proportional to the indicator of {0, 3, 6}
        let m = module("9^+1");
        let b = invariants_mod_ell(&m, None).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.vectors[0], vec![1, 1]);
        let full = b.expand(&m, &b.vectors[0]);
        let want: Vec<u64> = (0..9).map(|x| u64::from(x % 3 == 0)).collect();
        assert_eq!(full, want);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(&module("2^+2")).unwrap(), 2);
        assert_eq!(dimension(&module("3^-2")).unwrap(), 2);
        assert_eq!(dimension(&module("9^+1")).unwrap(), 1);
        assert_eq!(dimension(&module("2_7^+1")).unwrap(), 0); // odd signature
        assert_eq!(dimension(&FiniteQuadraticModule::trivial()).unwrap(), 1);
    }

    #[test]
    fn local_equals_global() {
        for sym in ["2^+2.3^-2", "2^+2.3^+1", "4^+2.9^+1"] {
            let m = module(sym);
            let local = dimension_opt(&m, &InvariantOptions::default()).unwrap();
            let direct = dimension_opt(
                &m,
                &InvariantOptions {
                    use_local: false,
                    ..InvariantOptions::default()
                },
            )
            .unwrap();
            assert_eq!(local, direct, "{sym}");
        }
        assert_eq!(dimension(&module("2^+2.3^-2")).unwrap(), 4);
    }

    #[test]
    fn integral_basis_examples() {
        // 2^+2: two integral vectors spanning the indicator plane
        let m = module("2^+2");
        let b = integral_basis(&m, 3).unwrap();
        assert_eq!(b.len(), 2);
        for v in &b.vectors {
            let g = v.iter().fold(0i64, |acc, &x| {
                crate::zfield::egcd(acc as i128, x as i128).0 as i64
            });
            assert_eq!(g, 1, "vector not primitive");
        }

        assert!(integral_basis(&module("3^+1"), 3).unwrap().is_empty());

        // 9^+1: the indicator of {0, 3, 6}
        let m = module("9^+1");
        let b = integral_basis(&m, 3).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.vectors[0], vec![1, 1]);
        assert_eq!(b.expand(&m, &b.vectors[0]), vec![1, 0, 0, 1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn tensor_compose_examples() {
        let m = module("2^+2.3^-2");
        let parts = m.p_parts();
        let with_bases: Vec<(PPart, IntegralBasis)> = parts
            .into_iter()
            .map(|p| {
                let b = integral_basis(&p.module, 3).unwrap();
                (p, b)
            })
            .collect();
        // single part is the identity
        let m2 = module("3^-2");
        let p2 = m2.p_parts().pop().unwrap();
        let b2 = integral_basis(&m2, 3).unwrap();
        let composed = tensor_compose(&m2, &[(p2, b2.clone())]).unwrap();
        assert_eq!(composed.len(), b2.len());

        // empty part yields an empty result
        let m0 = module("2^+2.3^+1");
        let parts0: Vec<(PPart, IntegralBasis)> = m0
            .p_parts()
            .into_iter()
            .map(|p| {
                let b = integral_basis(&p.module, 3).unwrap();
                (p, b)
            })
            .collect();
        assert_eq!(parts0.iter().map(|(_, b)| b.len()).product::<usize>(), 0);
        assert!(tensor_compose(&m0, &parts0).unwrap().is_empty());

        // 2^+2.3^-2: 2 * 2 = 4 vectors, all invariant
        let composed = tensor_compose(&m, &with_bases).unwrap();
        assert_eq!(composed.len(), 4);
        let ell = choose_primes(m.level(), 1, 5)[0];
        let ctx = make_weil_context_min(&m, Some(ell), 5).unwrap();
        for v in &composed.vectors {
            let full = composed.expand_mod(&m, v, ell);
            assert!(verify_invariant(&ctx, &full));
        }
        // mismatched part list is rejected
        let wrong = module("3^-2").p_parts().pop().unwrap();
        let wrong_b = integral_basis(&wrong.module, 3).unwrap();
        assert!(matches!(
            tensor_compose(&m, &[(wrong, wrong_b)]),
            Err(WeilError::PartMismatch)
        ));
    }

    #[test]
    fn character_sum_examples() {
        assert_eq!(
            character_sum_dimension(&FiniteQuadraticModule::trivial(), 100_000).unwrap(),
            1
        );
        assert_eq!(
            character_sum_dimension(&module("2^+2"), 100_000).unwrap(),
            2
        );
        assert_eq!(
            character_sum_dimension(&module("3^+1"), 100_000).unwrap(),
            0
        );
        assert!(matches!(
            character_sum_dimension(&module("5^+1"), 10),
            Err(WeilError::OracleBound { .. })
        ));
        assert!(matches!(
            character_sum_dimension(&module("2_7^+1"), 100_000),
            Err(WeilError::OddSignature)
        ));
    }

    #[test]
    fn verify_invariant_examples() {
        let m = module("2^+2");
        let ctx = make_weil_context_min(&m, Some(5), 5).unwrap();
        assert!(verify_invariant(&ctx, &[0, 0, 0, 0]));
        // 1_{00,10}
        let idx = |coords: [u32; 2]| m.index_of(&Element::new(coords.to_vec())) as usize;
        let mut v = vec![0u64; 4];
        v[idx([0, 0])] = 1;
        v[idx([1, 0])] = 1;
        assert!(verify_invariant(&ctx, &v));
        let mut e0 = vec![0u64; 4];
        e0[idx([0, 0])] = 1;
        assert!(!verify_invariant(&ctx, &e0));
    }

    #[test]
    fn prime_stability_small() {
        for sym in ["2^+2", "3^-2", "9^+1", "4^+2"] {
            let m = module(sym);
            let primes = choose_primes(m.level(), 3, 5);
            let dims: Vec<usize> = primes
                .iter()
                .map(|&l| invariants_mod_ell(&m, Some(l)).unwrap().len())
                .collect();
            assert!(dims.windows(2).all(|w| w[0] == w[1]), "{sym}: {dims:?}");
        }
    }

    #[test]
    fn parity_of_expansions() {
        for sym in ["2^+2", "3^-2", "9^+1", "5^+2"] {
            let m = module(sym);
            let b = invariants_mod_ell(&m, None).unwrap();
            let ell = b.prime.unwrap();
            let eps = if b.epsilon == 1 { 1 } else { ell - 1 };
            for v in &b.vectors {
                let full = b.expand(&m, v);
                for (i, x) in m.elements().enumerate() {
                    let j = m.index_of(&m.neg(&x)) as usize;
                    assert_eq!(
                        full[j],
                        (full[i] as u128 * eps as u128 % ell as u128) as u64
                    );
                }
            }
        }
    }
}
