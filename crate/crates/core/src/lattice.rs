//! Exponent vectors with denominators restricted to powers of a fixed base.
//!
//! An [`ExpVec`] is the additive form of a monomial in `M^{c^{-∞}}`: an
//! integer vector divided by `c^j`. The canonical form keeps `j` minimal
//! (when `j > 0`, not all numerators are divisible by `c`), which makes
//! values unique keys for sparse term maps. The scalar functions exposed
//! here — `n`-th coordinate, squared norm, image on a cross-section
//! hyperplane — are the quantities all the rewriting machinery compares,
//! and they are exact rationals throughout.

use crate::linalg::dot_rat;
use crate::prelude::*;

/// Exact rational scalar (re-export of the crate-wide type).
pub type RationalScalar = Rat;

/// An element of `(ℤ[1/c])^n`, stored as `numerators / c^denom_pow`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpVec {
    numerators: Vec<Int>,
    denom_pow: u32,
    base: u32,
}

impl ExpVec {
    /// Builds a vector from integer numerators at denominator `c^denom_pow`
    /// and canonicalizes. `base ≥ 2`, `numerators` nonempty.
    pub fn new(numerators: Vec<Int>, denom_pow: u32, base: u32) -> Self {
        assert!(base >= 2, "base must be at least 2");
        assert!(!numerators.is_empty(), "ambient dimension must be at least 1");
        let mut v = ExpVec { numerators, denom_pow, base };
        v.canonicalize();
        v
    }

    pub fn from_ints(numerators: &[i64], base: u32) -> Self {
        Self::new(numerators.iter().map(|&x| Int::from(x)).collect(), 0, base)
    }

    pub fn zero(ambient_dim: usize, base: u32) -> Self {
        Self::new(vec![Int::zero(); ambient_dim], 0, base)
    }

    /// The canonical form divides out common factors of `c` from the
    /// numerators. Idempotent.
    fn canonicalize(&mut self) {
        let c = Int::from(self.base);
        while self.denom_pow > 0 {
            if self.numerators.iter().all(|x| (x % &c).is_zero()) {
                for x in &mut self.numerators {
                    *x /= &c;
                }
                self.denom_pow -= 1;
            } else {
                break;
            }
        }
        if self.numerators.iter().all(|x| x.is_zero()) {
            self.denom_pow = 0;
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn denom_pow(&self) -> u32 {
        self.denom_pow
    }

    pub fn numerators(&self) -> &[Int] {
        &self.numerators
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(|x| x.is_zero())
    }

    fn check_compat(&self, other: &ExpVec) -> Result<(), Error> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: other.ambient_dim(),
            });
        }
        if self.base != other.base {
            return Err(Error::BaseMismatch { expected: self.base, got: other.base });
        }
        Ok(())
    }

    /// Componentwise sum (the monoid operation in additive notation).
    pub fn add(&self, other: &ExpVec) -> Result<ExpVec, Error> {
        self.check_compat(other)?;
        let (hi, lo) = if self.denom_pow >= other.denom_pow {
            (self, other)
        } else {
            (other, self)
        };
        let scale = Int::from(lo.base).pow(hi.denom_pow - lo.denom_pow);
        let nums: Vec<Int> = hi
            .numerators
            .iter()
            .zip(&lo.numerators)
            .map(|(a, b)| a + b * &scale)
            .collect();
        Ok(ExpVec::new(nums, hi.denom_pow, self.base))
    }

    pub fn neg(&self) -> ExpVec {
        ExpVec::new(self.numerators.iter().map(|x| -x).collect(), self.denom_pow, self.base)
    }

    pub fn sub(&self, other: &ExpVec) -> Result<ExpVec, Error> {
        self.add(&other.neg())
    }

    /// Integer scalar multiple.
    pub fn scale(&self, k: &Int) -> ExpVec {
        ExpVec::new(self.numerators.iter().map(|x| x * k).collect(), self.denom_pow, self.base)
    }

    /// `c^j · self`; negative `j` extracts `c`-th roots (deepens the hull).
    pub fn frobenius(&self, j: i64) -> ExpVec {
        if j >= 0 {
            let f = Int::from(self.base).pow(j as u32);
            ExpVec::new(self.numerators.iter().map(|x| x * &f).collect(), self.denom_pow, self.base)
        } else {
            let extra = (-j) as u32;
            ExpVec::new(self.numerators.clone(), self.denom_pow + extra, self.base)
        }
    }

    /// The exact rational value of coordinate `i`.
    pub fn coord(&self, i: usize) -> Rat {
        Rat::new(self.numerators[i].clone(), Int::from(self.base).pow(self.denom_pow))
    }

    /// The last ("`n`-th") coordinate.
    pub fn nth_coord(&self) -> Rat {
        self.coord(self.ambient_dim() - 1)
    }

    /// Exact squared Euclidean norm. Lengths are always compared through
    /// their squares so nothing leaves ℚ.
    pub fn sq_norm(&self) -> Rat {
        let den = Int::from(self.base).pow(self.denom_pow);
        let num: Int = self.numerators.iter().map(|x| x * x).sum();
        Rat::new(num, &den * &den)
    }

    /// Exact inner product with another vector.
    pub fn dot(&self, other: &ExpVec) -> Result<Rat, Error> {
        self.check_compat(other)?;
        Ok(dot_rat(&self.to_rationals(), &other.to_rationals()))
    }

    pub fn to_rationals(&self) -> Vec<Rat> {
        (0..self.ambient_dim()).map(|i| self.coord(i)).collect()
    }

    /// Builds the canonical `ExpVec` representing a rational point whose
    /// denominators are all powers of `base`. Fails otherwise.
    pub fn from_rationals(coords: &[Rat], base: u32) -> Result<ExpVec, Error> {
        let c = Int::from(base);
        let mut pow = 0u32;
        for x in coords {
            let mut d = x.denom().clone();
            let mut p = 0u32;
            while !d.is_one() {
                if (&d % &c).is_zero() {
                    d /= &c;
                    p += 1;
                } else {
                    return Err(Error::Precondition(format!(
                        "denominator of {x} is not a power of {base}"
                    )));
                }
            }
            pow = pow.max(p);
        }
        let scale = c.pow(pow);
        let nums: Vec<Int> = coords
            .iter()
            .map(|x| {
                let s = Rat::from_integer(scale.clone()) * x;
                debug_assert!(s.is_integer());
                s.to_integer()
            })
            .collect();
        Ok(ExpVec::new(nums, pow, base))
    }

    /// Text form `"(a,b,…)/c^j"`, or `"(a,b,…)"` when `j = 0`.
    pub fn render(&self) -> String {
        let mut s = String::from("(");
        for (i, x) in self.numerators.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&x.to_string());
        }
        s.push(')');
        if self.denom_pow > 0 {
            s.push_str(&format!("/{}^{}", self.base, self.denom_pow));
        }
        s
    }
}

/// An affine hyperplane `{x : g·x = level}` given by a rational functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHyperplane {
    pub functional: Vec<Rat>,
    pub level: Rat,
}

impl AffineHyperplane {
    pub fn new(functional: Vec<Rat>, level: Rat) -> Self {
        AffineHyperplane { functional, level }
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        dot_rat(&self.functional, point)
    }

    /// The unique point of `ℝ₊u ∩ G`, or `None` when the open ray misses
    /// the hyperplane. Errors on `u = 0`.
    pub fn phi_image(&self, u: &ExpVec) -> Result<Option<Vec<Rat>>, Error> {
        if u.is_zero() {
            return Err(Error::Precondition("Φ of the zero vector is undefined".into()));
        }
        Ok(self.phi_image_point(&u.to_rationals()))
    }

    /// Ray-hyperplane intersection for a plain rational direction; `None`
    /// when the open ray misses the hyperplane (or the direction is zero).
    pub fn phi_image_point(&self, coords: &[Rat]) -> Option<Vec<Rat>> {
        assert!(!self.level.is_zero(), "cross-section hyperplane must miss the origin");
        let g = self.eval(coords);
        if g.is_zero() || g.is_positive() != self.level.is_positive() {
            return None;
        }
        let t = &self.level / &g;
        Some(coords.iter().map(|x| x * &t).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(nums: &[i64], pow: u32) -> ExpVec {
        ExpVec::new(nums.iter().map(|&x| Int::from(x)).collect(), pow, 2)
    }

    #[test]
    fn add_integers() {
        let a = ExpVec::from_ints(&[1, 0], 2);
        let b = ExpVec::from_ints(&[0, 1], 2);
        assert_eq!(a.add(&b).unwrap(), ExpVec::from_ints(&[1, 1], 2));
    }

    #[test]
    fn add_halves_canonicalizes() {
        // (1,2)/2 + (1,2)/2 = (1,2)
        let h = ev(&[1, 2], 1);
        assert_eq!(h.add(&h).unwrap(), ev(&[1, 2], 0));
    }

    #[test]
    fn add_mixed_denominators() {
        // oracle: exact rational addition coordinate by coordinate
        let a = ev(&[1, 0], 1);
        let b = ev(&[1, 1], 2);
        let sum = a.add(&b).unwrap();
        let oracle: Vec<Rat> = a
            .to_rationals()
            .iter()
            .zip(&b.to_rationals())
            .map(|(x, y)| x + y)
            .collect();
        assert_eq!(sum.to_rationals(), oracle);
        assert_eq!(sum, ev(&[3, 1], 2));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = ExpVec::from_ints(&[1, 0], 2);
        let b = ExpVec::from_ints(&[1, 0, 0], 2);
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        let c3 = ExpVec::from_ints(&[1, 0], 3);
        assert!(matches!(a.add(&c3), Err(Error::BaseMismatch { .. })));
    }

    #[test]
    fn frobenius_scaling() {
        assert_eq!(ev(&[1, 1], 0).frobenius(1), ev(&[2, 2], 0));
        assert_eq!(ev(&[1, 1], 0).frobenius(-1), ev(&[1, 1], 1));
        // (4,2)/2 doubled is (4,2)
        assert_eq!(ev(&[4, 2], 1).frobenius(1), ev(&[4, 2], 0));
        assert_eq!(ev(&[4, 2], 1).frobenius(1).denom_pow(), 0);
    }

    #[test]
    fn frobenius_round_trip() {
        for nums in [[1i64, 1], [3, 5], [0, 7]] {
            for j in -3i64..=3 {
                let u = ev(&nums, 1);
                assert_eq!(u.frobenius(j).frobenius(-j), u);
            }
        }
    }

    #[test]
    fn scalar_functions() {
        let u = ExpVec::from_ints(&[3, 1], 2);
        assert_eq!(u.nth_coord(), rat_int(1));
        assert_eq!(u.sq_norm(), rat_int(10));
        let z = ExpVec::zero(2, 2);
        assert_eq!(z.nth_coord(), rat_int(0));
        assert_eq!(z.sq_norm(), rat_int(0));
        let h = ev(&[1, 2], 1);
        assert_eq!(h.nth_coord(), rat_int(1));
        assert_eq!(h.sq_norm(), rat(5, 4));
    }

    #[test]
    fn sq_norm_expansion() {
        // ‖u+v‖² = ‖u‖² + ‖v‖² + 2⟨u,v⟩, all exact
        let u = ev(&[3, 1], 1);
        let v = ev(&[1, 2], 2);
        let s = u.add(&v).unwrap();
        let lhs = s.sq_norm();
        let rhs = u.sq_norm() + v.sq_norm() + rat_int(2) * u.dot(&v).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn nth_coord_additive() {
        let u = ev(&[3, 1], 1);
        let v = ev(&[1, 5], 2);
        assert_eq!(u.add(&v).unwrap().nth_coord(), u.nth_coord() + v.nth_coord());
    }

    #[test]
    fn canonicalize_idempotent() {
        let raw = ExpVec::new(vec![Int::from(4), Int::from(2)], 1, 2);
        assert_eq!(raw, ev(&[2, 1], 0));
        let again = ExpVec::new(raw.numerators().to_vec(), raw.denom_pow(), 2);
        assert_eq!(raw, again);
    }

    #[test]
    fn phi_image_cases() {
        let diag = AffineHyperplane::new(vec![rat_int(1), rat_int(1)], rat_int(1));
        let u = ExpVec::from_ints(&[2, 2], 2);
        assert_eq!(diag.phi_image(&u).unwrap().unwrap(), vec![rat(1, 2), rat(1, 2)]);

        let g1 = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        let onit = ExpVec::from_ints(&[1, 0], 2);
        assert_eq!(g1.phi_image(&onit).unwrap().unwrap(), vec![rat_int(1), rat_int(0)]);

        let g2 = AffineHyperplane::new(vec![rat_int(0), rat_int(1)], rat_int(1));
        let miss = ExpVec::from_ints(&[0, -1], 2);
        assert_eq!(g2.phi_image(&miss).unwrap(), None);

        let zero = ExpVec::zero(2, 2);
        assert!(g2.phi_image(&zero).is_err());
    }

    #[test]
    fn render_form() {
        assert_eq!(ev(&[3, 1], 2).render(), "(3,1)/2^2");
        assert_eq!(ExpVec::from_ints(&[1, 0], 2).render(), "(1,0)");
    }
}
