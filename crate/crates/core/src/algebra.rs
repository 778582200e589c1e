//! The monoid ring `k[M^{c^{-j}}]`: sparse term arithmetic.
//!
//! A [`RingElem`] is a finite map from canonicalized exponent vectors to
//! nonzero coefficients in `ℚ` or a prime field `𝔽_p`. The support is the
//! key set; no zero coefficient is ever stored.
//!
//! Context (ambient dimension, Frobenius base, coefficient field) is
//! checked on every binary operation. Whether the keys actually lie in a
//! given monoid hull is an advisory property checked by
//! [`RingElem::supports_in_hull`] — tests and certificate verifiers turn
//! it on, the inner rewriting loops do not.

use crate::lattice::{AffineHyperplane, ExpVec};
use crate::monoids::AffineMonoid;
use crate::polyhedra::{Cone, Polytope};
use crate::prelude::*;

/// Coefficient field: exact rationals or a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Q,
    Fp(u64),
}

impl Field {
    pub fn check_prime(self) -> Result<(), Error> {
        if let Field::Fp(p) = self {
            if p < 2 {
                return Err(Error::Precondition(format!("{p} is not prime")));
            }
            let mut d = 2u64;
            while d * d <= p {
                if p % d == 0 {
                    return Err(Error::Precondition(format!("{p} is not prime")));
                }
                d += 1;
            }
        }
        Ok(())
    }
}

/// An element of the coefficient field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coeff {
    Q(Rat),
    Fp { p: u64, v: u64 },
}

impl Coeff {
    pub fn field(&self) -> Field {
        match self {
            Coeff::Q(_) => Field::Q,
            Coeff::Fp { p, .. } => Field::Fp(*p),
        }
    }

    pub fn zero(field: Field) -> Coeff {
        match field {
            Field::Q => Coeff::Q(Rat::zero()),
            Field::Fp(p) => Coeff::Fp { p, v: 0 },
        }
    }

    pub fn one(field: Field) -> Coeff {
        match field {
            Field::Q => Coeff::Q(Rat::one()),
            Field::Fp(p) => Coeff::Fp { p, v: 1 % p },
        }
    }

    pub fn from_i64(field: Field, v: i64) -> Coeff {
        match field {
            Field::Q => Coeff::Q(rat_int(v)),
            Field::Fp(p) => {
                let m = v.rem_euclid(p as i64) as u64;
                Coeff::Fp { p, v: m }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Q(x) => x.is_zero(),
            Coeff::Fp { v, .. } => *v == 0,
        }
    }

    pub fn add(&self, other: &Coeff) -> Result<Coeff, Error> {
        match (self, other) {
            (Coeff::Q(a), Coeff::Q(b)) => Ok(Coeff::Q(a + b)),
            (Coeff::Fp { p, v }, Coeff::Fp { p: q, v: w }) if p == q => {
                Ok(Coeff::Fp { p: *p, v: (v + w) % p })
            }
            _ => Err(Error::Precondition("coefficient field mismatch".into())),
        }
    }

    pub fn mul(&self, other: &Coeff) -> Result<Coeff, Error> {
        match (self, other) {
            (Coeff::Q(a), Coeff::Q(b)) => Ok(Coeff::Q(a * b)),
            (Coeff::Fp { p, v }, Coeff::Fp { p: q, v: w }) if p == q => {
                Ok(Coeff::Fp { p: *p, v: ((*v as u128 * *w as u128) % *p as u128) as u64 })
            }
            _ => Err(Error::Precondition("coefficient field mismatch".into())),
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Q(a) => Coeff::Q(-a),
            Coeff::Fp { p, v } => Coeff::Fp { p: *p, v: if *v == 0 { 0 } else { p - v } },
        }
    }

    pub fn inv(&self) -> Result<Coeff, Error> {
        match self {
            Coeff::Q(a) => {
                if a.is_zero() {
                    Err(Error::Precondition("division by zero".into()))
                } else {
                    Ok(Coeff::Q(a.recip()))
                }
            }
            Coeff::Fp { p, v } => {
                if *v == 0 {
                    return Err(Error::Precondition("division by zero".into()));
                }
                // extended gcd on u64
                let (mut r0, mut r1) = (*p as i128, *v as i128);
                let (mut s0, mut s1) = (0i128, 1i128);
                while r1 != 0 {
                    let q = r0 / r1;
                    (r0, r1) = (r1, r0 - q * r1);
                    (s0, s1) = (s1, s0 - q * s1);
                }
                debug_assert_eq!(r0, 1);
                let inv = s0.rem_euclid(*p as i128) as u64;
                Ok(Coeff::Fp { p: *p, v: inv })
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Coeff::Q(a) => a.to_string(),
            Coeff::Fp { v, .. } => v.to_string(),
        }
    }
}

/// A sparse element of the monoid ring: finite sum of
/// `coefficient × monomial` with canonicalized exponent keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElem {
    terms: BTreeMap<ExpVec, Coeff>,
    field: Field,
    ambient_dim: usize,
    base: u32,
}

impl RingElem {
    pub fn zero(field: Field, ambient_dim: usize, base: u32) -> RingElem {
        RingElem { terms: BTreeMap::new(), field, ambient_dim, base }
    }

    pub fn one(field: Field, ambient_dim: usize, base: u32) -> RingElem {
        Self::term(Coeff::one(field), &ExpVec::zero(ambient_dim, base))
            .expect("unit monomial is valid")
    }

    pub fn constant(c: Coeff, ambient_dim: usize, base: u32) -> RingElem {
        let field = c.field();
        if c.is_zero() {
            return Self::zero(field, ambient_dim, base);
        }
        Self::term(c, &ExpVec::zero(ambient_dim, base)).expect("unit monomial is valid")
    }

    /// A single term `c·x^u`.
    pub fn term(c: Coeff, u: &ExpVec) -> Result<RingElem, Error> {
        let field = c.field();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(u.clone(), c);
        }
        Ok(RingElem { terms, field, ambient_dim: u.ambient_dim(), base: u.base() })
    }

    /// A monomial with coefficient one.
    pub fn monomial(field: Field, u: &ExpVec) -> RingElem {
        Self::term(Coeff::one(field), u).expect("monomial is valid")
    }

    pub fn from_terms(
        field: Field,
        ambient_dim: usize,
        base: u32,
        terms: impl IntoIterator<Item = (ExpVec, Coeff)>,
    ) -> Result<RingElem, Error> {
        let mut out = RingElem::zero(field, ambient_dim, base);
        for (u, c) in terms {
            let t = RingElem::term(c, &u)?;
            out = out.add(&t)?;
        }
        Ok(out)
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(u, c)| u.is_zero() && !c.is_zero() && *c == Coeff::one(self.field))
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVec, &Coeff)> {
        self.terms.iter()
    }

    /// True when the element is a single term.
    pub fn is_term(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn as_term(&self) -> Option<(&ExpVec, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn coeff_of(&self, u: &ExpVec) -> Coeff {
        self.terms.get(u).cloned().unwrap_or_else(|| Coeff::zero(self.field))
    }

    fn check_compat(&self, other: &RingElem) -> Result<(), Error> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: other.ambient_dim,
            });
        }
        if self.base != other.base {
            return Err(Error::BaseMismatch { expected: self.base, got: other.base });
        }
        if self.field != other.field {
            return Err(Error::Precondition("coefficient field mismatch".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElem) -> Result<RingElem, Error> {
        self.check_compat(other)?;
        let mut terms = self.terms.clone();
        for (u, c) in &other.terms {
            match terms.get_mut(u) {
                Some(existing) => {
                    let s = existing.add(c)?;
                    if s.is_zero() {
                        terms.remove(u);
                    } else {
                        *existing = s;
                    }
                }
                None => {
                    terms.insert(u.clone(), c.clone());
                }
            }
        }
        Ok(RingElem { terms, ..self.clone() })
    }

    pub fn neg(&self) -> RingElem {
        let terms = self.terms.iter().map(|(u, c)| (u.clone(), c.neg())).collect();
        RingElem { terms, ..self.clone() }
    }

    pub fn sub(&self, other: &RingElem) -> Result<RingElem, Error> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElem) -> Result<RingElem, Error> {
        self.check_compat(other)?;
        let mut out: BTreeMap<ExpVec, Coeff> = BTreeMap::new();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let key = u.add(v)?;
                let prod = a.mul(b)?;
                match out.get_mut(&key) {
                    Some(existing) => {
                        let s = existing.add(&prod)?;
                        if s.is_zero() {
                            out.remove(&key);
                        } else {
                            *existing = s;
                        }
                    }
                    None => {
                        if !prod.is_zero() {
                            out.insert(key, prod);
                        }
                    }
                }
            }
        }
        Ok(RingElem { terms: out, ..self.clone() })
    }

    pub fn scale(&self, c: &Coeff) -> Result<RingElem, Error> {
        if c.is_zero() {
            return Ok(RingElem::zero(self.field, self.ambient_dim, self.base));
        }
        let mut terms = BTreeMap::new();
        for (u, a) in &self.terms {
            terms.insert(u.clone(), a.mul(c)?);
        }
        Ok(RingElem { terms, ..self.clone() })
    }

    /// The set of support monomials.
    pub fn support(&self) -> Vec<ExpVec> {
        self.terms.keys().cloned().collect()
    }

    /// Applies `m ↦ c^j · m` to every support monomial.
    pub fn frobenius(&self, j: i64) -> RingElem {
        let terms = self.terms.iter().map(|(u, c)| (u.frobenius(j), c.clone())).collect();
        RingElem { terms, ..self.clone() }
    }

    /// Sum of the coefficient of the unit monomial (all other monomials
    /// map to zero).
    pub fn augmentation(&self) -> Coeff {
        self.coeff_of(&ExpVec::zero(self.ambient_dim, self.base))
    }

    /// Keeps exactly the terms whose `n`-th coordinate lies in the
    /// interval.
    pub fn slice(&self, interval: &Interval) -> RingElem {
        let terms = self
            .terms
            .iter()
            .filter(|(u, _)| interval.contains(&u.nth_coord()))
            .map(|(u, c)| (u.clone(), c.clone()))
            .collect();
        RingElem { terms, ..self.clone() }
    }

    /// The ring retraction onto `k[M|F]`: terms supported on the face
    /// survive, everything else maps to zero.
    pub fn facet_projection(&self, face: &Cone) -> RingElem {
        let terms = self
            .terms
            .iter()
            .filter(|(u, _)| face.contains(u))
            .map(|(u, c)| (u.clone(), c.clone()))
            .collect();
        RingElem { terms, ..self.clone() }
    }

    /// Convex hull of the Φ-images of the support monomials.
    /// Errors on the zero element and on supports containing the unit
    /// monomial (whose ray has no Φ-image).
    pub fn phi_polytope(&self, g: &AffineHyperplane) -> Result<Polytope, Error> {
        if self.is_zero() {
            return Err(Error::Precondition("Φ of the zero element is empty".into()));
        }
        let mut pts = Vec::new();
        for u in self.terms.keys() {
            match g.phi_image(u)? {
                Some(p) => pts.push(p),
                None => {
                    return Err(Error::Precondition(
                        "support ray does not meet the cross-section".into(),
                    ))
                }
            }
        }
        Polytope::from_vertices(&pts, self.ambient_dim)
    }

    /// True iff every support monomial is in the divisible hull of
    /// `monoid` at its canonical denominator level.
    pub fn supports_in_hull(&self, monoid: &AffineMonoid) -> Result<bool, Error> {
        for u in self.terms.keys() {
            if !monoid.hull_member(u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff every support monomial is in `(M_*)^{c^{-∞}}`.
    pub fn supports_in_interior_hull(&self, monoid: &AffineMonoid) -> Result<bool, Error> {
        for u in self.terms.keys() {
            if !monoid.interior_hull_member(u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Terms in the deterministic graded-lexicographic order
    /// (numerator sum, then numerators, then denominator power).
    pub fn sorted_terms(&self) -> Vec<(ExpVec, Coeff)> {
        let mut v: Vec<(ExpVec, Coeff)> =
            self.terms.iter().map(|(u, c)| (u.clone(), c.clone())).collect();
        v.sort_by(|(a, _), (b, _)| grlex(a, b));
        v
    }

    /// Deterministic textual form: `coeff*(nums)/c^j` atoms joined by `+`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut out = String::new();
        for (i, (u, c)) in self.sorted_terms().iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            out.push_str(&c.render());
            out.push('*');
            out.push_str(&u.render());
        }
        out
    }
}

/// Graded-lexicographic order on canonical exponent vectors.
pub fn grlex(a: &ExpVec, b: &ExpVec) -> core::cmp::Ordering {
    let sa: Int = a.numerators().iter().sum();
    let sb: Int = b.numerators().iter().sum();
    sa.cmp(&sb)
        .then_with(|| a.numerators().cmp(b.numerators()))
        .then_with(|| a.denom_pow().cmp(&b.denom_pow()))
}

/// An interval of rationals with optionally open/closed finite endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<(Rat, bool)>,
    pub hi: Option<(Rat, bool)>,
}

impl Interval {
    /// `[lo, hi]`
    pub fn closed(lo: Rat, hi: Rat) -> Interval {
        Interval { lo: Some((lo, true)), hi: Some((hi, true)) }
    }

    /// `[lo, hi)`
    pub fn half_open(lo: Rat, hi: Rat) -> Interval {
        Interval { lo: Some((lo, true)), hi: Some((hi, false)) }
    }

    /// `[lo, ∞)`
    pub fn at_least(lo: Rat) -> Interval {
        Interval { lo: Some((lo, true)), hi: None }
    }

    /// `(-∞, hi)`
    pub fn below(hi: Rat) -> Interval {
        Interval { lo: None, hi: Some((hi, false)) }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        if let Some((lo, closed)) = &self.lo {
            if x < lo || (!closed && x == lo) {
                return false;
            }
        }
        if let Some((hi, closed)) = &self.hi {
            if x > hi || (!closed && x == hi) {
                return false;
            }
        }
        true
    }
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

    fn q(v: i64) -> Coeff {
        Coeff::from_i64(Field::Q, v)
    }

    #[test]
    fn cohn_determinant_identity() {
        // (1 + t₁t₂)(1 − t₁t₂) + t₁²t₂² = 1
        let one = RingElem::one(Field::Q, 2, 2);
        let t1t2 = mono(&[1, 1]);
        let a = one.add(&t1t2).unwrap();
        let b = one.sub(&t1t2).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, one.sub(&mono(&[2, 2])).unwrap());
        let back = prod.add(&mono(&[2, 2])).unwrap();
        assert!(back.is_one());
    }

    #[test]
    fn add_zero_identity() {
        let g = mono(&[1, 0]).add(&mono(&[0, 1]).scale(&q(3)).unwrap()).unwrap();
        let z = RingElem::zero(Field::Q, 2, 2);
        assert_eq!(g.add(&z).unwrap(), g);
        assert!(g.sub(&g).unwrap().is_zero());
    }

    #[test]
    fn mul_respects_membership_context() {
        // (t₁)·(t₁) over the Veronese hull at level 1: key (2,0) is a
        // monoid element; oracle: exact membership check of every key
        let m = AffineMonoid::from_ints(&[&[2, 0], &[1, 1], &[0, 2]], 2).unwrap();
        let t1 = RingElem::monomial(Field::Q, &ExpVec::new(vec![Int::from(2), Int::zero()], 1, 2));
        let sq = t1.mul(&t1).unwrap();
        assert!(sq.supports_in_hull(&m).unwrap());
        assert!(!t1.supports_in_hull(&m).unwrap()); // (1,0) ∉ M at level 0… (2,0)/2 = (1,0)
    }

    #[test]
    fn field_mismatch_rejected() {
        let a = RingElem::one(Field::Q, 2, 2);
        let b = RingElem::one(Field::Fp(5), 2, 2);
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn fp_arithmetic() {
        let f = Field::Fp(7);
        f.check_prime().unwrap();
        assert!(Field::Fp(6).check_prime().is_err());
        let three = Coeff::from_i64(f, 3);
        let five = Coeff::from_i64(f, 5);
        assert_eq!(three.mul(&five).unwrap(), Coeff::from_i64(f, 1));
        assert_eq!(three.inv().unwrap(), Coeff::from_i64(f, 5));
        let e = RingElem::term(three, &x(&[1, 1])).unwrap();
        let sum = e.add(&e).unwrap().add(&e).unwrap();
        // 3+3+3 = 9 = 2 mod 7
        assert_eq!(sum.coeff_of(&x(&[1, 1])), Coeff::from_i64(f, 2));
    }

    #[test]
    fn slice_cases() {
        // γ = t₁t₂ − t₁³t₂, both terms have x₂ = 1
        let g = mono(&[1, 1]).sub(&mono(&[3, 1])).unwrap();
        let i = Interval::closed(rat_int(1), rat_int(1));
        assert_eq!(g.slice(&i), g);
        let empty = Interval::closed(rat_int(2), rat_int(1));
        assert!(g.slice(&empty).is_zero());
        // complementary slices recompose the element
        let g2 = g.add(&mono(&[0, 5]).scale(&q(2)).unwrap()).unwrap();
        let low = g2.slice(&Interval::below(rat_int(2)));
        let high = g2.slice(&Interval::at_least(rat_int(2)));
        assert_eq!(low.add(&high).unwrap(), g2);
    }

    #[test]
    fn facet_projection_cases() {
        let ray = Cone::from_generators(&[vec![Int::one(), Int::zero()]], 2).unwrap();
        // 1 + t₁t₂ ↦ 1 (constant survives since 0 ∈ F)
        let g = RingElem::one(Field::Q, 2, 2).add(&mono(&[1, 1])).unwrap();
        assert!(g.facet_projection(&ray).is_one());
        // supported entirely on the face: identity
        let h = mono(&[3, 0]).add(&RingElem::one(Field::Q, 2, 2)).unwrap();
        assert_eq!(h.facet_projection(&ray), h);
    }

    #[test]
    fn facet_projection_is_ring_retraction() {
        let ray = Cone::from_generators(&[vec![Int::one(), Int::zero()]], 2).unwrap();
        // multiplicativity and idempotence on sample elements
        let samples = [
            RingElem::one(Field::Q, 2, 2).add(&mono(&[1, 1])).unwrap(),
            mono(&[2, 0]).add(&mono(&[1, 2]).scale(&q(-4)).unwrap()).unwrap(),
            mono(&[3, 0]).sub(&mono(&[0, 2])).unwrap(),
            RingElem::one(Field::Q, 2, 2).scale(&q(5)).unwrap(),
        ];
        for a in &samples {
            let pa = a.facet_projection(&ray);
            assert_eq!(pa.facet_projection(&ray), pa);
            for b in &samples {
                let pab = a.mul(b).unwrap().facet_projection(&ray);
                assert_eq!(pab, pa.mul(&b.facet_projection(&ray)).unwrap());
            }
        }
    }

    #[test]
    fn frobenius_cases() {
        let g = RingElem::one(Field::Q, 2, 2).add(&mono(&[1, 1])).unwrap();
        let f = g.frobenius(1);
        assert_eq!(f, RingElem::one(Field::Q, 2, 2).add(&mono(&[2, 2])).unwrap());
        assert_eq!(f.frobenius(-1), g);
        // ring homomorphism on samples
        let a = mono(&[1, 0]).add(&mono(&[0, 1]).scale(&q(2)).unwrap()).unwrap();
        let b = mono(&[1, 1]).sub(&RingElem::one(Field::Q, 2, 2)).unwrap();
        assert_eq!(
            a.mul(&b).unwrap().frobenius(2),
            a.frobenius(2).mul(&b.frobenius(2)).unwrap()
        );
    }

    #[test]
    fn augmentation_cases() {
        let g = RingElem::constant(q(3), 2, 2).add(&mono(&[2, 0])).unwrap();
        assert_eq!(g.augmentation(), q(3));
        assert_eq!(mono(&[1, 1]).augmentation(), Coeff::zero(Field::Q));
    }

    #[test]
    fn support_convolution() {
        let a = mono(&[1, 0]).add(&mono(&[0, 1])).unwrap();
        let b = mono(&[1, 1]).add(&mono(&[2, 0])).unwrap();
        let prod = a.mul(&b).unwrap();
        let sums: BTreeSet<ExpVec> = a
            .support()
            .iter()
            .flat_map(|u| b.support().iter().map(|v| u.add(v).unwrap()).collect::<Vec<_>>())
            .collect();
        for u in prod.support() {
            assert!(sums.contains(&u));
        }
        // equality when one factor is a term
        let t = mono(&[1, 1]);
        let tp = a.mul(&t).unwrap();
        let expected: BTreeSet<ExpVec> =
            a.support().iter().map(|u| u.add(&x(&[1, 1])).unwrap()).collect();
        assert_eq!(tp.support().into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn phi_polytope_single_term() {
        let g = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        let p = mono(&[2, 1]).phi_polytope(&g).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.vertices()[0], vec![rat_int(1), rat(1, 2)]);
    }

    #[test]
    fn render_deterministic() {
        let g = mono(&[1, 1])
            .scale(&q(-1))
            .unwrap()
            .add(&RingElem::one(Field::Q, 2, 2))
            .unwrap()
            .add(&mono(&[2, 0]).scale(&q(3)).unwrap())
            .unwrap();
        assert_eq!(g.render(), "1*(0,0) + -1*(1,1) + 3*(2,0)");
    }
}
