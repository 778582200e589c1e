//! Matrices over the monoid ring, elementary words and Steinberg
//! relations.
//!
//! Words — ordered lists of `(p, q, λ)` standing for `∏ e_{pq}(λ)` — are
//! the certificate currency of the whole crate: every factorization
//! procedure returns a word so the result stays replayable, and matrices
//! are derived views obtained with [`ElemWord::eval`].
//!
//! The support classes `𝒜(ε)`, `ℬ(ε, l)`, `𝒟`, `𝒟_{>0}` classify matrices
//! by the last coordinate, squared length and cross-section image of
//! their support monomials; membership is tested term by term, exactly.

use crate::algebra::{Coeff, Field, RingElem};
use crate::lattice::{AffineHyperplane, ExpVec};
use crate::prelude::*;

/// A square matrix over the monoid ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    entries: Vec<RingElem>,
    size: usize,
    field: Field,
    ambient_dim: usize,
    base: u32,
}

impl RingMatrix {
    pub fn identity(size: usize, field: Field, ambient_dim: usize, base: u32) -> RingMatrix {
        assert!(size >= 1);
        let mut entries = vec![RingElem::zero(field, ambient_dim, base); size * size];
        for i in 0..size {
            entries[i * size + i] = RingElem::one(field, ambient_dim, base);
        }
        RingMatrix { entries, size, field, ambient_dim, base }
    }

    pub fn from_entries(entries: Vec<RingElem>, size: usize) -> Result<RingMatrix, Error> {
        if entries.len() != size * size || size == 0 {
            return Err(Error::Precondition("matrix entry count must be size²".into()));
        }
        let field = entries[0].field();
        let ambient_dim = entries[0].ambient_dim();
        let base = entries[0].base();
        for e in &entries {
            if e.field() != field || e.ambient_dim() != ambient_dim || e.base() != base {
                return Err(Error::Precondition("matrix entries have mixed context".into()));
            }
        }
        Ok(RingMatrix { entries, size, field, ambient_dim, base })
    }

    /// The standard elementary matrix `e_{pq}(λ) = 𝟙 + a_{pq}(λ)`
    /// (1-based indices).
    pub fn elementary(size: usize, p: usize, q: usize, lambda: &RingElem) -> Result<RingMatrix, Error> {
        check_indices(size, p, q)?;
        let mut m =
            RingMatrix::identity(size, lambda.field(), lambda.ambient_dim(), lambda.base());
        m.set(p - 1, q - 1, lambda.clone());
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn entry(&self, i: usize, j: usize) -> &RingElem {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RingElem) {
        self.entries[i * self.size + j] = v;
    }

    pub fn is_identity(&self) -> bool {
        for i in 0..self.size {
            for j in 0..self.size {
                let e = self.entry(i, j);
                if i == j && !e.is_one() {
                    return false;
                }
                if i != j && !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j && !self.entry(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn check_compat(&self, other: &RingMatrix) -> Result<(), Error> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, got: other.size });
        }
        if self.ambient_dim != other.ambient_dim
            || self.base != other.base
            || self.field != other.field
        {
            return Err(Error::Precondition("matrix context mismatch".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix, Error> {
        self.check_compat(other)?;
        let n = self.size;
        let mut out = RingMatrix::identity(n, self.field, self.ambient_dim, self.base);
        for i in 0..n {
            for j in 0..n {
                let mut acc = RingElem::zero(self.field, self.ambient_dim, self.base);
                for k in 0..n {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix, Error> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(i, j, self.entry(i, j).add(other.entry(i, j))?);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RingMatrix) -> Result<RingMatrix, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RingMatrix {
        let entries = self.entries.iter().map(|e| e.neg()).collect();
        RingMatrix { entries, ..self.clone() }
    }

    pub fn zero_like(&self) -> RingMatrix {
        let z = RingElem::zero(self.field, self.ambient_dim, self.base);
        RingMatrix { entries: vec![z; self.size * self.size], ..self.clone() }
    }

    /// Determinant by cofactor expansion; fine at desk scale (r ≤ 5).
    pub fn det(&self) -> Result<RingElem, Error> {
        fn minor_det(
            m: &RingMatrix,
            rows: &[usize],
            cols: &[usize],
            memo: &mut BTreeMap<(Vec<usize>, Vec<usize>), RingElem>,
        ) -> Result<RingElem, Error> {
            if rows.len() == 1 {
                return Ok(m.entry(rows[0], cols[0]).clone());
            }
            let key = (rows.to_vec(), cols.to_vec());
            if let Some(v) = memo.get(&key) {
                return Ok(v.clone());
            }
            let mut acc = RingElem::zero(m.field, m.ambient_dim, m.base);
            let sub_rows: Vec<usize> = rows[1..].to_vec();
            for (k, &c) in cols.iter().enumerate() {
                let e = m.entry(rows[0], c);
                if e.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> =
                    cols.iter().copied().filter(|&x| x != c).collect();
                let sub = minor_det(m, &sub_rows, &sub_cols, memo)?;
                let signed = if k % 2 == 0 { e.mul(&sub)? } else { e.mul(&sub)?.neg() };
                acc = acc.add(&signed)?;
            }
            memo.insert(key, acc.clone());
            Ok(acc)
        }
        let idx: Vec<usize> = (0..self.size).collect();
        let mut memo = BTreeMap::new();
        minor_det(self, &idx, &idx, &mut memo)
    }

    pub fn is_sl(&self) -> Result<bool, Error> {
        Ok(self.det()?.is_one())
    }

    /// Inverse of a determinant-one matrix via the adjugate.
    pub fn inverse_sl(&self) -> Result<RingMatrix, Error> {
        if !self.is_sl()? {
            return Err(Error::Precondition("matrix determinant is not 1".into()));
        }
        let n = self.size;
        let mut out = self.zero_like();
        let idx: Vec<usize> = (0..n).collect();
        let mut memo = BTreeMap::new();
        fn minor_det(
            m: &RingMatrix,
            rows: &[usize],
            cols: &[usize],
            memo: &mut BTreeMap<(Vec<usize>, Vec<usize>), RingElem>,
        ) -> Result<RingElem, Error> {
            if rows.is_empty() {
                return Ok(RingElem::one(m.field, m.ambient_dim, m.base));
            }
            if rows.len() == 1 {
                return Ok(m.entry(rows[0], cols[0]).clone());
            }
            let key = (rows.to_vec(), cols.to_vec());
            if let Some(v) = memo.get(&key) {
                return Ok(v.clone());
            }
            let mut acc = RingElem::zero(m.field, m.ambient_dim, m.base);
            let sub_rows: Vec<usize> = rows[1..].to_vec();
            for (k, &c) in cols.iter().enumerate() {
                let e = m.entry(rows[0], c);
                if e.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let sub = minor_det(m, &sub_rows, &sub_cols, memo)?;
                let signed = if k % 2 == 0 { e.mul(&sub)? } else { e.mul(&sub)?.neg() };
                acc = acc.add(&signed)?;
            }
            memo.insert(key, acc.clone());
            Ok(acc)
        }
        for i in 0..n {
            for j in 0..n {
                // adjugate: (−1)^{i+j} · minor with row j, column i removed
                let rows: Vec<usize> = idx.iter().copied().filter(|&r| r != j).collect();
                let cols: Vec<usize> = idx.iter().copied().filter(|&c| c != i).collect();
                let m = minor_det(self, &rows, &cols, &mut memo)?;
                out.set(i, j, if (i + j) % 2 == 0 { m } else { m.neg() });
            }
        }
        Ok(out)
    }

    /// All support monomials of all entries.
    pub fn support(&self) -> BTreeSet<ExpVec> {
        self.entries.iter().flat_map(|e| e.support()).collect()
    }

    pub fn frobenius(&self, j: i64) -> RingMatrix {
        let entries = self.entries.iter().map(|e| e.frobenius(j)).collect();
        RingMatrix { entries, ..self.clone() }
    }

    /// Applies the ring map entrywise.
    pub fn map_entries(
        &self,
        f: impl Fn(&RingElem) -> Result<RingElem, Error>,
    ) -> Result<RingMatrix, Error> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            entries.push(f(e)?);
        }
        Ok(RingMatrix { entries, ..self.clone() })
    }

    /// Embeds into a larger size, extending by the identity.
    pub fn stabilize(&self, new_size: usize) -> Result<RingMatrix, Error> {
        if new_size < self.size {
            return Err(Error::Precondition("stabilization cannot shrink".into()));
        }
        let mut out = RingMatrix::identity(new_size, self.field, self.ambient_dim, self.base);
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(i, j, self.entry(i, j).clone());
            }
        }
        Ok(out)
    }
}

fn check_indices(size: usize, p: usize, q: usize) -> Result<(), Error> {
    if p == q || p == 0 || q == 0 || p > size || q > size {
        return Err(Error::Precondition(format!(
            "invalid elementary position ({p},{q}) for size {size}"
        )));
    }
    Ok(())
}

/// An ordered product of standard elementary matrices
/// `∏ₖ e_{pₖqₖ}(λₖ)`, 1-based indices, `p ≠ q` for every factor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElemWord {
    factors: Vec<(usize, usize, RingElem)>,
}

impl ElemWord {
    pub fn new() -> ElemWord {
        ElemWord { factors: Vec::new() }
    }

    pub fn single(p: usize, q: usize, lambda: RingElem) -> Result<ElemWord, Error> {
        let mut w = ElemWord::new();
        w.push(p, q, lambda)?;
        Ok(w)
    }

    pub fn from_factors(factors: Vec<(usize, usize, RingElem)>) -> Result<ElemWord, Error> {
        let mut w = ElemWord::new();
        for (p, q, l) in factors {
            w.push(p, q, l)?;
        }
        Ok(w)
    }

    pub fn push(&mut self, p: usize, q: usize, lambda: RingElem) -> Result<(), Error> {
        if p == q || p == 0 || q == 0 {
            return Err(Error::Precondition(format!("invalid elementary position ({p},{q})")));
        }
        if !lambda.is_zero() {
            self.factors.push((p, q, lambda));
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &ElemWord) {
        self.factors.extend(other.factors.iter().cloned());
    }

    pub fn concat(mut self, other: &ElemWord) -> ElemWord {
        self.extend(other);
        self
    }

    pub fn factors(&self) -> &[(usize, usize, RingElem)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Left-to-right evaluation as a size-`r` matrix. Multiplying by an
    /// elementary factor on the right is the column operation
    /// `col_q += col_p · λ`.
    pub fn eval(&self, r: usize, field: Field, ambient_dim: usize, base: u32) -> Result<RingMatrix, Error> {
        let mut m = RingMatrix::identity(r, field, ambient_dim, base);
        for (p, q, lambda) in &self.factors {
            check_indices(r, *p, *q)?;
            for row in 0..r {
                let add = m.entry(row, p - 1).mul(lambda)?;
                let new = m.entry(row, q - 1).add(&add)?;
                m.set(row, q - 1, new);
            }
        }
        Ok(m)
    }

    /// The inverse word: reversed order, negated arguments.
    pub fn inverse(&self) -> ElemWord {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|(p, q, l)| (*p, *q, l.neg()))
            .collect();
        ElemWord { factors }
    }

    /// Applies the Frobenius to every factor argument.
    pub fn frobenius(&self, j: i64) -> ElemWord {
        let factors =
            self.factors.iter().map(|(p, q, l)| (*p, *q, l.frobenius(j))).collect();
        ElemWord { factors }
    }

    /// Splits every factor into single-term factors using the first
    /// Steinberg relation `e_{pq}(λ+μ) = e_{pq}(λ)e_{pq}(μ)`.
    pub fn split_terms(&self) -> ElemWord {
        let mut factors = Vec::new();
        for (p, q, l) in &self.factors {
            for (u, c) in l.sorted_terms() {
                let t = RingElem::term(c, &u).expect("term from sorted_terms");
                factors.push((*p, *q, t));
            }
        }
        ElemWord { factors }
    }

    /// Union of the supports of all factor arguments.
    pub fn support(&self) -> BTreeSet<ExpVec> {
        self.factors.iter().flat_map(|(_, _, l)| l.support()).collect()
    }

    /// Largest denominator power appearing in any factor support.
    pub fn max_denom_pow(&self) -> u32 {
        self.support().iter().map(|u| u.denom_pow()).max().unwrap_or(0)
    }
}

/// A formal word in Steinberg generators `x_{pq}(λ)` and their inverses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SteinbergWord {
    /// (p, q, λ, inverted)
    pub factors: Vec<(usize, usize, RingElem, bool)>,
}

impl SteinbergWord {
    pub fn push(&mut self, p: usize, q: usize, lambda: RingElem, inverted: bool) -> Result<(), Error> {
        if p == q || p == 0 || q == 0 {
            return Err(Error::Precondition(format!("invalid Steinberg position ({p},{q})")));
        }
        self.factors.push((p, q, lambda, inverted));
        Ok(())
    }

    /// The canonical map `St_r → E_r`: evaluate each generator as the
    /// corresponding elementary matrix.
    pub fn eval(&self, r: usize, field: Field, ambient_dim: usize, base: u32) -> Result<RingMatrix, Error> {
        let mut word = ElemWord::new();
        for (p, q, l, inv) in &self.factors {
            word.push(*p, *q, if *inv { l.neg() } else { l.clone() })?;
        }
        word.eval(r, field, ambient_dim, base)
    }
}

/// One instance of a Steinberg relation, with the indices and arguments
/// to check.
#[derive(Debug, Clone)]
pub enum SteinbergRelation {
    /// `e_{pq}(λ)·e_{pq}(μ) = e_{pq}(λ+μ)`
    Additive { p: usize, q: usize, lambda: RingElem, mu: RingElem },
    /// `[e_{pq}(λ), e_{qu}(μ)] = e_{pu}(λμ)`, `p ≠ u`
    Commutator { p: usize, q: usize, u: usize, lambda: RingElem, mu: RingElem },
    /// `[e_{pq}(λ), e_{uv}(μ)] = 𝟙`, `p ≠ v`, `q ≠ u`
    Disjoint { p: usize, q: usize, u: usize, v: usize, lambda: RingElem, mu: RingElem },
}

/// Checks one Steinberg relation instance by exact evaluation at the
/// given size. Errors if the side conditions on the indices fail.
pub fn steinberg_check(rel: &SteinbergRelation, r: usize) -> Result<bool, Error> {
    match rel {
        SteinbergRelation::Additive { p, q, lambda, mu } => {
            check_indices(r, *p, *q)?;
            let lhs = RingMatrix::elementary(r, *p, *q, lambda)?
                .mul(&RingMatrix::elementary(r, *p, *q, mu)?)?;
            let rhs = RingMatrix::elementary(r, *p, *q, &lambda.add(mu)?)?;
            Ok(lhs == rhs)
        }
        SteinbergRelation::Commutator { p, q, u, lambda, mu } => {
            check_indices(r, *p, *q)?;
            check_indices(r, *q, *u)?;
            if p == u {
                return Err(Error::Precondition("commutator relation needs p ≠ u".into()));
            }
            let a = RingMatrix::elementary(r, *p, *q, lambda)?;
            let b = RingMatrix::elementary(r, *q, *u, mu)?;
            let ainv = RingMatrix::elementary(r, *p, *q, &lambda.neg())?;
            let binv = RingMatrix::elementary(r, *q, *u, &mu.neg())?;
            let lhs = a.mul(&b)?.mul(&ainv)?.mul(&binv)?;
            let rhs = RingMatrix::elementary(r, *p, *u, &lambda.mul(mu)?)?;
            Ok(lhs == rhs)
        }
        SteinbergRelation::Disjoint { p, q, u, v, lambda, mu } => {
            check_indices(r, *p, *q)?;
            check_indices(r, *u, *v)?;
            if p == v || q == u {
                return Err(Error::Precondition(
                    "disjoint relation needs p ≠ v and q ≠ u".into(),
                ));
            }
            let a = RingMatrix::elementary(r, *p, *q, lambda)?;
            let b = RingMatrix::elementary(r, *u, *v, mu)?;
            let ainv = RingMatrix::elementary(r, *p, *q, &lambda.neg())?;
            let binv = RingMatrix::elementary(r, *u, *v, &mu.neg())?;
            let lhs = a.mul(&b)?.mul(&ainv)?.mul(&binv)?;
            Ok(lhs.is_identity())
        }
    }
}

/// The support classes of the rewriting engine.
#[derive(Debug, Clone)]
pub enum ClassSpec {
    /// `𝒜(ε)`: `1 ∉ supp` and every support monomial has last coordinate
    /// `≥ ε`.
    A { eps: Rat },
    /// `ℬ(ε, l)`: every support monomial has squared norm `≥ l²` and
    /// Φ-image last coordinate `≥ ε` (Φ w.r.t. the given cross-section
    /// hyperplane).
    B { eps: Rat, l: Rat, section: AffineHyperplane },
    /// `𝒟`: diagonal, `1 ∉ supp`, last coordinates `≥ 0`.
    D,
    /// `𝒟_{>0}`: diagonal, last coordinates `> 0`.
    DPos,
}

/// Exact class membership, term by term. The zero matrix belongs to every
/// class.
pub fn class_check(m: &RingMatrix, spec: &ClassSpec) -> Result<bool, Error> {
    match spec {
        ClassSpec::A { eps } => {
            for u in m.support() {
                if u.is_zero() || &u.nth_coord() < eps {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ClassSpec::B { eps, l, section } => {
            let l2 = l * l;
            for u in m.support() {
                if u.is_zero() {
                    return Ok(false);
                }
                if u.sq_norm() < l2 {
                    return Ok(false);
                }
                match section.phi_image(&u)? {
                    Some(phi) => {
                        if &phi[u.ambient_dim() - 1] < eps {
                            return Ok(false);
                        }
                    }
                    None => return Ok(false),
                }
            }
            Ok(true)
        }
        ClassSpec::D => {
            if !m.is_diagonal() {
                return Ok(false);
            }
            for u in m.support() {
                if u.is_zero() || u.nth_coord().is_negative() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ClassSpec::DPos => {
            if !m.is_diagonal() {
                return Ok(false);
            }
            for u in m.support() {
                if !u.nth_coord().is_positive() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// `a_{pq}(λ)`: the matrix with `λ` at position `(p,q)` (1-based) and
/// zeros elsewhere.
pub fn a_matrix(size: usize, p: usize, q: usize, lambda: &RingElem) -> RingMatrix {
    let mut m = RingMatrix::identity(size, lambda.field(), lambda.ambient_dim(), lambda.base());
    m = m.zero_like();
    m.set(p - 1, q - 1, lambda.clone());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(e: &[i64]) -> ExpVec {
        ExpVec::from_ints(e, 2)
    }

    fn mono(e: &[i64]) -> RingElem {
        RingElem::monomial(Field::Q, &x(e))
    }

    fn qconst(v: i64) -> RingElem {
        RingElem::constant(Coeff::from_i64(Field::Q, v), 2, 2)
    }

    fn cohn() -> RingMatrix {
        // [[1+t₁t₂, −t₁²], [t₂², 1−t₁t₂]]
        let one = RingElem::one(Field::Q, 2, 2);
        RingMatrix::from_entries(
            vec![
                one.add(&mono(&[1, 1])).unwrap(),
                mono(&[2, 0]).neg(),
                mono(&[0, 2]),
                one.sub(&mono(&[1, 1])).unwrap(),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn cohn_matrix_is_sl2() {
        assert!(cohn().is_sl().unwrap());
        let inv = cohn().inverse_sl().unwrap();
        assert!(cohn().mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn identity_det() {
        let id = RingMatrix::identity(3, Field::Q, 2, 2);
        assert!(id.det().unwrap().is_one());
    }

    #[test]
    fn word_eval_rotation() {
        // e₁₂(1)·e₂₁(−1)·e₁₂(1) = [[0,1],[−1,0]]
        let w = ElemWord::from_factors(vec![
            (1, 2, qconst(1)),
            (2, 1, qconst(-1)),
            (1, 2, qconst(1)),
        ])
        .unwrap();
        let m = w.eval(2, Field::Q, 2, 2).unwrap();
        assert!(m.entry(0, 0).is_zero());
        assert!(m.entry(0, 1).is_one());
        assert_eq!(m.entry(1, 0), &qconst(-1));
        assert!(m.entry(1, 1).is_zero());
        assert!(m.det().unwrap().is_one());
    }

    #[test]
    fn empty_word_is_identity() {
        let w = ElemWord::new();
        assert!(w.eval(3, Field::Q, 2, 2).unwrap().is_identity());
    }

    #[test]
    fn word_inverse_round_trip() {
        let w = ElemWord::from_factors(vec![
            (1, 2, mono(&[1, 0])),
            (2, 3, mono(&[0, 1]).add(&qconst(2)).unwrap()),
            (3, 1, mono(&[1, 1]).neg()),
            (1, 3, qconst(5)),
        ])
        .unwrap();
        let m = w.eval(3, Field::Q, 2, 2).unwrap();
        let minv = w.inverse().eval(3, Field::Q, 2, 2).unwrap();
        assert!(m.mul(&minv).unwrap().is_identity());
        assert!(minv.mul(&m).unwrap().is_identity());
    }

    #[test]
    fn word_concat_is_product() {
        let w1 = ElemWord::from_factors(vec![(1, 2, mono(&[1, 0])), (2, 1, mono(&[0, 1]))])
            .unwrap();
        let w2 = ElemWord::from_factors(vec![(1, 3, qconst(2)), (3, 2, mono(&[1, 1]))]).unwrap();
        let cat = w1.clone().concat(&w2);
        let lhs = cat.eval(3, Field::Q, 2, 2).unwrap();
        let rhs = w1
            .eval(3, Field::Q, 2, 2)
            .unwrap()
            .mul(&w2.eval(3, Field::Q, 2, 2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn word_det_is_one() {
        let w = ElemWord::from_factors(vec![
            (1, 2, mono(&[3, 1])),
            (2, 1, mono(&[1, 2]).neg()),
            (1, 2, qconst(7)),
        ])
        .unwrap();
        assert!(w.eval(2, Field::Q, 2, 2).unwrap().det().unwrap().is_one());
    }

    #[test]
    fn frobenius_commutes_with_eval() {
        let w = ElemWord::from_factors(vec![
            (1, 2, mono(&[1, 0]).add(&mono(&[1, 1])).unwrap()),
            (2, 1, mono(&[0, 1])),
        ])
        .unwrap();
        let lhs = w.frobenius(1).eval(2, Field::Q, 2, 2).unwrap();
        let rhs = w.eval(2, Field::Q, 2, 2).unwrap().frobenius(1);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn steinberg_relations_hold() {
        let lam = mono(&[1, 0]).add(&qconst(3)).unwrap();
        let mu = mono(&[0, 1]).sub(&mono(&[1, 1])).unwrap();
        assert!(steinberg_check(
            &SteinbergRelation::Additive { p: 1, q: 2, lambda: lam.clone(), mu: mu.clone() },
            3
        )
        .unwrap());
        assert!(steinberg_check(
            &SteinbergRelation::Commutator { p: 1, q: 2, u: 3, lambda: lam.clone(), mu: mu.clone() },
            3
        )
        .unwrap());
        assert!(steinberg_check(
            &SteinbergRelation::Disjoint { p: 1, q: 2, u: 3, v: 4, lambda: lam.clone(), mu: mu.clone() },
            4
        )
        .unwrap());
        // side-condition violations are errors, not false
        assert!(steinberg_check(
            &SteinbergRelation::Commutator { p: 1, q: 2, u: 1, lambda: lam.clone(), mu: mu.clone() },
            3
        )
        .is_err());
        assert!(steinberg_check(
            &SteinbergRelation::Disjoint { p: 1, q: 2, u: 2, v: 3, lambda: lam, mu },
            3
        )
        .is_err());
    }

    #[test]
    fn class_membership_cases() {
        // A = a₁₂(t₁³t₂) over ℤ₊², n = 2: in 𝒜(1)
        let a = a_matrix(2, 1, 2, &mono(&[3, 1]));
        assert!(class_check(&a, &ClassSpec::A { eps: rat_int(1) }).unwrap());
        // monotone: 𝒜(1) ⊆ 𝒜(1/2)
        assert!(class_check(&a, &ClassSpec::A { eps: rat(1, 2) }).unwrap());
        assert!(!class_check(&a, &ClassSpec::A { eps: rat_int(2) }).unwrap());
        // zero matrix in all classes
        let z = RingMatrix::identity(2, Field::Q, 2, 2).zero_like();
        let g = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        for spec in [
            ClassSpec::A { eps: rat_int(1) },
            ClassSpec::B { eps: rat(-1, 2), l: rat_int(3), section: g.clone() },
            ClassSpec::D,
            ClassSpec::DPos,
        ] {
            assert!(class_check(&z, &spec).unwrap());
        }
        // diag(t₁²t₂, −t₁²t₂): in 𝒟 and 𝒟_{>0}
        let mut d = z.clone();
        d.set(0, 0, mono(&[2, 1]));
        d.set(1, 1, mono(&[2, 1]).neg());
        assert!(class_check(&d, &ClassSpec::D).unwrap());
        assert!(class_check(&d, &ClassSpec::DPos).unwrap());
        // constants are excluded from 𝒜 and 𝒟
        let c = a_matrix(2, 1, 2, &qconst(1));
        assert!(!class_check(&c, &ClassSpec::A { eps: rat_int(0) }).unwrap());
    }

    #[test]
    fn b_class_length_and_phi() {
        let g = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        // t₁³t₂: sq_norm = 10, Φ = (1, 1/3): in ℬ(−1/2, 3) since 10 ≥ 9
        let b = a_matrix(2, 1, 2, &mono(&[3, 1]));
        let spec = ClassSpec::B { eps: rat(-1, 2), l: rat_int(3), section: g.clone() };
        assert!(class_check(&b, &spec).unwrap());
        let spec_long = ClassSpec::B { eps: rat(-1, 2), l: rat_int(4), section: g.clone() };
        assert!(!class_check(&b, &spec_long).unwrap());
        // negative Φ-height below the bound fails
        let neg = a_matrix(2, 1, 2, &RingElem::monomial(Field::Q, &x(&[1, -1])));
        let spec_neg = ClassSpec::B { eps: rat(-1, 2), l: rat_int(1), section: g };
        assert!(!class_check(&neg, &spec_neg).unwrap());
    }

    #[test]
    fn support_of_product() {
        let a = cohn();
        let b = cohn();
        let prod = a.mul(&b).unwrap();
        let sa = a.support();
        let sb = b.support();
        let mut allowed: BTreeSet<ExpVec> = BTreeSet::new();
        for u in &sa {
            for v in &sb {
                allowed.insert(u.add(v).unwrap());
            }
            allowed.insert(u.clone());
        }
        for v in &sb {
            allowed.insert(v.clone());
        }
        for u in prod.support() {
            assert!(allowed.contains(&u));
        }
    }

    #[test]
    fn split_terms_preserves_product() {
        let w = ElemWord::from_factors(vec![(
            1,
            2,
            mono(&[1, 0]).add(&mono(&[0, 1])).unwrap().add(&qconst(2)).unwrap(),
        )])
        .unwrap();
        let split = w.split_terms();
        assert_eq!(split.len(), 3);
        assert_eq!(
            split.eval(2, Field::Q, 2, 2).unwrap(),
            w.eval(2, Field::Q, 2, 2).unwrap()
        );
    }
}
