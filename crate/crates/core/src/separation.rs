//! The certified rewriting engine: almost separation of elementary words.
//!
//! Given a word over `k[(M_*)^{c^{-j₀}}]` for a normal acute monoid `M`
//! whose cone is cut by the hyperplane `{x_n = 0}`, the engine produces a
//! factorization `E = A₁·A₂` with `A₁` an elementary word supported in the
//! divisible hull of `M₁(ε)_*` (the `x_n ≤ 0` side fattened by `ε`) and
//! `A₂ ∈ SL_r` supported in the hull of `M₂(ε)_*`.
//!
//! The three commuting rules `com1`, `com2`, `com3` push a low-degree
//! elementary factor through a matrix `𝟙 + A + B + D` classified by the
//! support classes `𝒜/ℬ/𝒟`; the main loop normalizes the input word into
//! an admissible representation and then sweeps the last maximal-degree
//! factor rightward, descending strictly in the lexicographic bounding
//! pair (max degree, count).
//!
//! Every matrix identity any step claims is re-verified by exact
//! multiplication before it is returned; iteration caps turn violated
//! termination arguments into named errors, never wrong answers.

use crate::algebra::{Field, Interval, RingElem};
use crate::lattice::{AffineHyperplane, ExpVec};
use crate::linalg::sqrt_upper_bound;
use crate::matgroups::{a_matrix, class_check, ClassSpec, ElemWord, RingMatrix};
use crate::monoids::{self, AffineMonoid};
use crate::polyhedra::{eps_cone_contains, Cone, CrossSection, Polytope};
use crate::prelude::*;

/// Budgets for every potentially long loop in the engine.
#[derive(Debug, Clone)]
pub struct SeparationConfig {
    /// Cap on the Frobenius level the good-representation search may use.
    /// Setting this to zero disables taking `c`-th roots.
    pub max_hull_level: u32,
    pub com1_budget: usize,
    pub com2_budget: usize,
    pub sweep_budget: usize,
    /// Check that every output support monomial decomposes over the input
    /// supports. On by default; the inner sweep loop switches it off for
    /// speed and the final certificate check covers the result.
    pub provenance_checks: bool,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            max_hull_level: 16,
            com1_budget: 256,
            com2_budget: 256,
            sweep_budget: 4096,
            provenance_checks: true,
        }
    }
}

/// Iteration counters reported with every certificate.
#[derive(Debug, Clone, Default)]
pub struct SeparationStats {
    pub hull_level_used: u32,
    pub com1_iterations: usize,
    pub com2_rounds: usize,
    pub sweeps: usize,
    pub peels: usize,
}

/// An almost-separation instance.
#[derive(Debug, Clone)]
pub struct SeparationProblem {
    /// Normal acute monoid with the cut at `x_n = 0`.
    pub monoid: AffineMonoid,
    /// Cross-section hyperplane `G` with `ℝ₊M = ℝ₊(ℝ₊M ∩ G)`.
    pub section: AffineHyperplane,
    pub eps: Rat,
    pub size: usize,
    pub word: ElemWord,
    pub config: SeparationConfig,
}

impl SeparationProblem {
    pub fn field(&self) -> Field {
        self.word.factors().first().map(|(_, _, l)| l.field()).unwrap_or(Field::Q)
    }

    /// The two sides of the cut: `C₁ = ℝ₊M ∩ {x_n ≤ 0}` and
    /// `C₂ = ℝ₊M ∩ {x_n ≥ 0}`. Either may be a proper face when the cut
    /// touches only the boundary.
    pub fn cut_sides(&self) -> Result<(Cone, Cone), Error> {
        let n = self.monoid.ambient_dim();
        let mut low = vec![Rat::zero(); n];
        low[n - 1] = -Rat::one();
        let mut high = vec![Rat::zero(); n];
        high[n - 1] = Rat::one();
        let cone = self.monoid.cone();
        let mut lo_ineqs = cone.facet_functionals().to_vec();
        lo_ineqs.push(low);
        let c1 = Cone::from_inequalities(&lo_ineqs, cone.span_equations(), n)?;
        let mut hi_ineqs = cone.facet_functionals().to_vec();
        hi_ineqs.push(high);
        let c2 = Cone::from_inequalities(&hi_ineqs, cone.span_equations(), n)?;
        if c1.dim() == 0 {
            return Err(Error::Precondition("the x_n ≤ 0 side of the cut is trivial".into()));
        }
        Ok((c1, c2))
    }

    fn validate(&self) -> Result<(), Error> {
        if self.size < 2 {
            return Err(Error::Precondition("separation needs matrix size at least 2".into()));
        }
        if !self.eps.is_positive() {
            return Err(Error::Precondition("ε must be positive".into()));
        }
        if !self.monoid.is_normal() {
            return Err(Error::Precondition("separation requires a normal monoid".into()));
        }
        if !monoids::is_acute(self.monoid.cone().generators()) {
            return Err(Error::Precondition(
                "monoid cone is not acute; apply the acuteness shear first".into(),
            ));
        }
        let cs = CrossSection::new(self.monoid.cone().clone(), self.section.clone())?;
        let _ = cs;
        for (_, _, l) in self.word.factors() {
            if !l.supports_in_interior_hull(&self.monoid)? {
                return Err(Error::Precondition(
                    "word factor support is not in the interior divisible hull".into(),
                ));
            }
        }
        self.cut_sides()?;
        Ok(())
    }
}

/// The output of [`almost_separate`]: a replayable factorization
/// `eval(input) = eval(word_a1) · a2` with side-classified supports.
#[derive(Debug, Clone)]
pub struct SeparationCertificate {
    /// Hull depth `j_A`: every support monomial lives in `(…)^{c^{-j_A}}`.
    pub hull_level: u32,
    pub word_a1: ElemWord,
    pub a2: RingMatrix,
    pub stats: SeparationStats,
}

/// Re-checks a certificate from scratch against its problem: the product
/// identity, the determinant of `A₂`, and side membership of every
/// support monomial.
pub fn verify_separation(
    problem: &SeparationProblem,
    cert: &SeparationCertificate,
) -> Result<(), Error> {
    let field = problem.field();
    let n = problem.monoid.ambient_dim();
    let base = problem.monoid.base();
    let r = problem.size;
    let lhs = problem.word.eval(r, field, n, base)?;
    let rhs = cert.word_a1.eval(r, field, n, base)?.mul(&cert.a2)?;
    if lhs != rhs {
        return Err(Error::VerificationFailed(
            "word_eval(A₁)·A₂ does not reproduce the input word".into(),
        ));
    }
    if !cert.a2.is_sl()? {
        return Err(Error::VerificationFailed("A₂ does not have determinant 1".into()));
    }
    let (c1, c2) = problem.cut_sides()?;
    let s1 = CrossSection::new(c1, problem.section.clone())?;
    let s2 = CrossSection::new(c2, problem.section.clone())?;
    for u in cert.word_a1.support() {
        if u.denom_pow() > cert.hull_level {
            return Err(Error::VerificationFailed(format!(
                "A₁ support {} is deeper than the certified hull level",
                u.render()
            )));
        }
        if !problem.monoid.interior_hull_member(&u)? {
            return Err(Error::VerificationFailed(format!(
                "A₁ support {} is not interior",
                u.render()
            )));
        }
        if !eps_cone_contains(&s1, &problem.eps, &u)? {
            return Err(Error::VerificationFailed(format!(
                "A₁ support {} is not in C₁(ε)",
                u.render()
            )));
        }
    }
    for u in cert.a2.support() {
        if u.denom_pow() > cert.hull_level {
            return Err(Error::VerificationFailed(format!(
                "A₂ support {} is deeper than the certified hull level",
                u.render()
            )));
        }
        if !problem.monoid.interior_hull_member(&u)? {
            return Err(Error::VerificationFailed(format!(
                "A₂ support {} is not interior",
                u.render()
            )));
        }
        if !eps_cone_contains(&s2, &problem.eps, &u)? {
            return Err(Error::VerificationFailed(format!(
                "A₂ support {} is not in C₂(ε)",
                u.render()
            )));
        }
    }
    Ok(())
}

/// Greedy three-way split of an element: a term goes to the `ℬ′`-bucket
/// if it passes the class test, else to the `𝒜`-slice if its degree
/// reaches `ε₁`, else to the low remainder `γ`.
///
/// The splitting is not unique; this deterministic rule satisfies the
/// required postconditions.
fn split_abc(
    elem: &RingElem,
    eps1: &Rat,
    eps: &Rat,
    l2: &Rat,
    g: &AffineHyperplane,
    low_floor: &Rat,
) -> Result<(RingElem, RingElem, RingElem), Error> {
    let mut gamma = RingElem::zero(elem.field(), elem.ambient_dim(), elem.base());
    let mut a = gamma.clone();
    let mut b = gamma.clone();
    for (u, c) in elem.terms() {
        let t = RingElem::term(c.clone(), u)?;
        let phi_n = if u.is_zero() {
            None
        } else {
            g.phi_image(u)?.map(|p| p[u.ambient_dim() - 1].clone())
        };
        let in_b = !u.is_zero()
            && &u.sq_norm() >= l2
            && phi_n.map(|h| &h >= &-eps.clone()).unwrap_or(false);
        if in_b {
            b = b.add(&t)?;
        } else if &u.nth_coord() >= eps1 {
            a = a.add(&t)?;
        } else {
            if &u.nth_coord() < low_floor {
                return Err(Error::Internal(format!(
                    "split term {} fell below the degree floor",
                    u.render()
                )));
            }
            gamma = gamma.add(&t)?;
        }
    }
    Ok((gamma, a, b))
}

fn diag_entry(m: &RingMatrix, i: usize) -> RingElem {
    m.entry(i, i).clone()
}

/// Checks that every monomial in `supports` is a sum of monomials from
/// `inputs` (the submonoid generated by the input supports).
fn provenance_check(
    outputs: &BTreeSet<ExpVec>,
    inputs: &BTreeSet<ExpVec>,
    base: u32,
) -> Result<(), Error> {
    if outputs.is_empty() {
        return Ok(());
    }
    let Some(first) = inputs.iter().next() else {
        return if outputs.iter().all(|u| u.is_zero()) {
            Ok(())
        } else {
            Err(Error::Internal("support from empty input set".into()))
        };
    };
    let dim = first.ambient_dim();
    let depth =
        inputs.iter().chain(outputs.iter()).map(|u| u.denom_pow()).max().unwrap_or(0);
    let scale = |u: &ExpVec| -> Vec<Int> {
        let s = u.frobenius(depth as i64);
        debug_assert_eq!(s.denom_pow(), 0);
        s.numerators().to_vec()
    };
    let gens: Vec<Vec<Int>> = inputs.iter().map(|u| scale(u)).collect();
    let monoid = AffineMonoid::new(gens, dim, base)?;
    for u in outputs {
        if !monoid.contains_int(&scale(u)) {
            return Err(Error::Internal(format!(
                "support {} does not decompose over the input supports",
                u.render()
            )));
        }
    }
    Ok(())
}

/// Lemma-style first commuting rule: for a term `α` with
/// `|α_n| < ε₁ ≤ β_n`, a diagonal `D ∈ 𝒟` and the cross-section `g`,
/// finds `γ ∈ R[M]_{[α_n, ε₁)}`, `A ∈ 𝒜(ε₁)`, `B ∈ ℬ(−ε, l)`, `D' ∈ 𝒟`
/// with
///
/// ```text
/// (e_{ji}(β) + D)·e_{ij}(α) = e_{ij}(α)·e_{ij}(γ)·(𝟙 + A + B + D')
/// ```
///
/// The identity is re-verified by multiplication before returning.
/// `β` may be any element with all degrees `≥ ε₁` (the `ji` entry of an
/// `𝒜(ε₁)` matrix), including zero; `α ∈ R` is allowed.
#[allow(clippy::too_many_arguments)]
pub fn com1(
    i: usize,
    j: usize,
    alpha: &RingElem,
    beta: &RingElem,
    d: &RingMatrix,
    eps1: &Rat,
    eps: &Rat,
    l: &Rat,
    g: &AffineHyperplane,
    config: &SeparationConfig,
    stats: &mut SeparationStats,
) -> Result<(RingElem, RingMatrix, RingMatrix, RingMatrix), Error> {
    let r = d.size();
    let field = alpha.field();
    let dim = alpha.ambient_dim();
    let base = alpha.base();
    let (au, _) = alpha
        .as_term()
        .ok_or_else(|| Error::Precondition("com1 needs a single-term α".into()))?;
    let alpha_n = au.nth_coord();
    if &alpha_n.abs() >= eps1 {
        return Err(Error::Precondition("com1 needs |α_n| < ε₁".into()));
    }
    for (u, _) in beta.terms() {
        if &u.nth_coord() < eps1 {
            return Err(Error::Precondition("com1 needs β_n ≥ ε₁".into()));
        }
    }
    if !class_check(d, &ClassSpec::D)? {
        return Err(Error::Precondition("com1 needs D ∈ 𝒟".into()));
    }
    let l2 = l * l;

    // e_{ij}(−α)(e_{ji}(β) + D)e_{ij}(α) = 𝟙 + a_ij(a₀+b₀) + a_ji(β) + D_acc
    let a0 = alpha.mul(alpha)?.mul(beta)?.neg();
    let b0 = alpha.mul(&diag_entry(d, i - 1).sub(&diag_entry(d, j - 1))?)?;
    let mut d_acc = d.clone();
    let ab = alpha.mul(beta)?;
    d_acc.set(i - 1, i - 1, d_acc.entry(i - 1, i - 1).sub(&ab)?);
    d_acc.set(j - 1, j - 1, d_acc.entry(j - 1, j - 1).add(&ab)?);

    let (mut gamma_cur, mut a_acc, mut b_acc) =
        split_abc(&a0.add(&b0)?, eps1, eps, &l2, g, &alpha_n)?;
    let mut gamma_total = RingElem::zero(field, dim, base);
    let mut last_min_norm: Option<Rat> = None;
    let mut iter = 0usize;
    while !gamma_cur.is_zero() {
        iter += 1;
        if iter > config.com1_budget {
            return Err(Error::BudgetExceeded(
                "com1 low-degree elimination (acuteness termination argument)".into(),
            ));
        }
        // strict growth of the minimum squared support norm
        let min_norm =
            gamma_cur.support().iter().map(|u| u.sq_norm()).min().expect("nonzero γ");
        if let Some(prev) = &last_min_norm {
            if &min_norm <= prev {
                return Err(Error::Internal("com1 termination metric did not increase".into()));
            }
        }
        last_min_norm = Some(min_norm);

        gamma_total = gamma_total.add(&gamma_cur)?;
        // e_{ij}(−γ)·[…] : the ij-entry gains −γ·D_jj, the diagonal loses γβ at (i,i)
        let delta = gamma_cur.mul(&diag_entry(&d_acc, j - 1))?.neg();
        d_acc.set(i - 1, i - 1, d_acc.entry(i - 1, i - 1).sub(&gamma_cur.mul(beta)?)?);
        let (g_next, a_inc, b_inc) = split_abc(&delta, eps1, eps, &l2, g, &alpha_n)?;
        a_acc = a_acc.add(&a_inc)?;
        b_acc = b_acc.add(&b_inc)?;
        gamma_cur = g_next;
    }
    stats.com1_iterations += iter;

    let mut a_out = a_matrix(r, i, j, &a_acc);
    a_out = a_out.add(&a_matrix(r, j, i, beta))?;
    let b_out = a_matrix(r, i, j, &b_acc);
    let d_out = d_acc;

    // mandatory re-verification of the displayed identity
    let lhs = RingMatrix::elementary(r, j, i, beta)?.add(d)?.mul(&RingMatrix::elementary(
        r,
        i,
        j,
        alpha,
    )?)?;
    let rhs = RingMatrix::elementary(r, i, j, alpha)?
        .mul(&RingMatrix::elementary(r, i, j, &gamma_total)?)?
        .mul(
            &RingMatrix::identity(r, field, dim, base)
                .add(&a_out)?
                .add(&b_out)?
                .add(&d_out)?,
        )?;
    if lhs != rhs {
        return Err(Error::Internal("com1 identity failed re-multiplication".into()));
    }
    // postcondition classes
    let gamma_window = Interval::half_open(alpha_n.clone(), eps1.clone());
    if gamma_total.slice(&gamma_window) != gamma_total {
        return Err(Error::Internal("com1 γ outside its degree window".into()));
    }
    if !class_check(&a_out, &ClassSpec::A { eps: eps1.clone() })? {
        return Err(Error::Internal("com1 A output failed 𝒜(ε₁)".into()));
    }
    if !class_check(
        &b_out,
        &ClassSpec::B { eps: -eps.clone(), l: l.clone(), section: g.clone() },
    )? {
        return Err(Error::Internal("com1 B output failed ℬ(−ε, l)".into()));
    }
    if !class_check(&d_out, &ClassSpec::D)? {
        return Err(Error::Internal("com1 D output failed 𝒟".into()));
    }
    if config.provenance_checks {
        let mut inputs: BTreeSet<ExpVec> = alpha.support().into_iter().collect();
        inputs.extend(beta.support());
        inputs.extend(d.support());
        let mut outputs: BTreeSet<ExpVec> = gamma_total.support().into_iter().collect();
        outputs.extend(a_out.support());
        outputs.extend(b_out.support());
        outputs.extend(d_out.support());
        outputs.retain(|u| !inputs.contains(u));
        provenance_check(&outputs, &inputs, base)?;
    }
    Ok((gamma_total, a_out, b_out, d_out))
}

/// Second commuting rule: clears every low short term out of
/// `𝟙 + A + B` by elementary factors with degrees in `[0, ε₁)`:
///
/// ```text
/// eval(Ē)·(𝟙 + A + B) = 𝟙 + A' + B' + D'
/// ```
#[allow(clippy::too_many_arguments)]
pub fn com2(
    a: &RingMatrix,
    b: &RingMatrix,
    eps1: &Rat,
    eps: &Rat,
    l: &Rat,
    g: &AffineHyperplane,
    config: &SeparationConfig,
    stats: &mut SeparationStats,
) -> Result<(ElemWord, RingMatrix, RingMatrix, RingMatrix), Error> {
    let r = a.size();
    let field = a.field();
    let dim = a.ambient_dim();
    let base = a.base();
    if !class_check(a, &ClassSpec::A { eps: Rat::zero() })? {
        return Err(Error::Precondition("com2 needs A ∈ 𝒜(0)".into()));
    }
    let b_spec = ClassSpec::B { eps: -eps.clone(), l: l.clone(), section: g.clone() };
    if !class_check(b, &b_spec)? {
        return Err(Error::Precondition("com2 needs B ∈ ℬ(−ε, l)".into()));
    }
    let l2 = l * l;
    let one = RingMatrix::identity(r, field, dim, base);
    // X carries 𝟙 + (A-bucket); the B-bucket evolves separately so its
    // class membership is preserved verbatim
    let mut x = one.add(a)?;
    let mut xb = b.clone();
    let mut word = ElemWord::new();
    let mut rounds = 0usize;
    let mut last_min: Option<Rat> = None;
    loop {
        // strip: off-diagonal terms with degree < ε₁ and length < l
        let low = Interval::below(eps1.clone());
        let mut stripped = Vec::new();
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    continue;
                }
                let e = x.entry(i, j).slice(&low);
                let short = RingElem::from_terms(
                    field,
                    dim,
                    base,
                    e.terms()
                        .filter(|(u, _)| u.sq_norm() < l2)
                        .map(|(u, c)| (u.clone(), c.clone())),
                )?;
                if !short.is_zero() {
                    stripped.push((i + 1, j + 1, short));
                }
            }
        }
        if stripped.is_empty() {
            break;
        }
        rounds += 1;
        if rounds > config.com2_budget {
            return Err(Error::BudgetExceeded(
                "com2 stripping rounds (length growth termination argument)".into(),
            ));
        }
        let bad_min = stripped
            .iter()
            .flat_map(|(_, _, e)| e.support())
            .map(|u| u.sq_norm())
            .min()
            .expect("nonempty strip");
        if let Some(prev) = &last_min {
            if &bad_min <= prev {
                return Err(Error::Internal("com2 termination metric did not increase".into()));
            }
        }
        last_min = Some(bad_min);
        for (i, j, e) in stripped {
            // factor degrees must sit in [0, ε₁)
            for (u, _) in e.terms() {
                if u.nth_coord().is_negative() {
                    return Err(Error::Internal("com2 stripped a negative-degree term".into()));
                }
            }
            let neg = e.neg();
            let factor = RingMatrix::elementary(r, i, j, &neg)?;
            x = factor.mul(&x)?;
            xb = factor.mul(&xb)?;
            word.push(i, j, neg)?;
        }
    }
    stats.com2_rounds += rounds;

    // final split: X = 𝟙 + A' + (long off-diagonal) + D'
    let mut a_out = x.zero_like();
    let mut b_out = xb;
    let mut d_out = x.zero_like();
    for i in 0..r {
        for j in 0..r {
            let mut e = x.entry(i, j).clone();
            if i == j {
                e = e.sub(&RingElem::one(field, dim, base))?;
                for (u, _) in e.terms() {
                    if u.is_zero() || u.nth_coord().is_negative() {
                        return Err(Error::Internal(
                            "com2 diagonal acquired a unit or negative term".into(),
                        ));
                    }
                }
                d_out.set(i, i, e);
            } else {
                let high = e.slice(&Interval::at_least(eps1.clone()));
                let rest = e.sub(&high)?;
                a_out.set(i, j, high);
                if !rest.is_zero() {
                    b_out.set(i, j, b_out.entry(i, j).add(&rest)?);
                }
            }
        }
    }

    // mandatory re-verification
    let lhs = word.eval(r, field, dim, base)?.mul(&one.add(a)?.add(b)?)?;
    let rhs = one.add(&a_out)?.add(&b_out)?.add(&d_out)?;
    if lhs != rhs {
        return Err(Error::Internal("com2 identity failed re-multiplication".into()));
    }
    for (_, _, lam) in word.factors() {
        for (u, _) in lam.terms() {
            if u.nth_coord().is_negative() || &u.nth_coord() >= eps1 {
                return Err(Error::Internal("com2 word factor degree out of [0, ε₁)".into()));
            }
        }
    }
    if !class_check(&a_out, &ClassSpec::A { eps: eps1.clone() })? {
        return Err(Error::Internal("com2 A' failed 𝒜(ε₁)".into()));
    }
    if !class_check(&b_out, &b_spec)? {
        return Err(Error::Internal("com2 B' failed ℬ(−ε, l)".into()));
    }
    if !class_check(&d_out, &ClassSpec::D)? {
        return Err(Error::Internal("com2 D' failed 𝒟".into()));
    }
    if config.provenance_checks {
        let mut inputs: BTreeSet<ExpVec> = a.support();
        inputs.extend(b.support());
        let mut outputs: BTreeSet<ExpVec> = a_out.support();
        outputs.extend(b_out.support());
        outputs.extend(d_out.support());
        outputs.extend(word.support());
        outputs.retain(|u| !inputs.contains(u));
        provenance_check(&outputs, &inputs, base)?;
    }
    Ok((word, a_out, b_out, d_out))
}

/// A certified threshold for the implication
///
/// ```text
/// A₁, A₂ ∈ 𝒜(−ε₁), B ∈ ℬ(−ε₂, l)  ⟹  A₁B, BA₂, A₁BA₂ ∈ ℬ(−ε₂−ε, l)
/// ```
///
/// valid for every `l ≥ l_bound(ε₁, ε₂, ε)` over an acute cone with the
/// given cross section. Derivation: on the cone, `g(x) ≥ ‖x‖ / W` with
/// `W = max‖Φ(C)‖` over the cross-section vertices, so a product monomial
/// `m + x` with `m_n ≥ −2ε₁` and `‖x‖ ≥ l` has
/// `Φ(m+x)_n ≥ Φ(x)_n − 2ε₁·W/l`; the bound makes the loss at most `ε`.
/// The length clause holds because the cone is acute. The bound does not
/// depend on ε₂; the parameter is kept for the call sites that schedule
/// budgets with it.
pub fn l_bound(
    eps1: &Rat,
    _eps2: &Rat,
    eps: &Rat,
    section: &CrossSection,
) -> Result<Rat, Error> {
    if !eps1.is_positive() || !eps.is_positive() {
        return Err(Error::Precondition("l_bound needs positive ε₁ and ε".into()));
    }
    let poly = section.polytope()?;
    let max_sq = poly
        .vertices()
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<Rat>())
        .max()
        .ok_or_else(|| Error::Internal("empty cross-section".into()))?;
    let w = sqrt_upper_bound(&max_sq);
    // certified: g(x) ≥ ‖x‖/w on the cone (assert on the extreme rays)
    for r in section.cone.generators() {
        let rr: Vec<Rat> = r.iter().map(|x| Rat::from_integer(x.clone())).collect();
        let sq: Rat = rr.iter().map(|x| x * x).sum();
        let gval = crate::linalg::dot_rat(&section.hyperplane.functional, &rr)
            / &section.hyperplane.level;
        if &gval * &gval * &w * &w < sq {
            return Err(Error::Internal("l_bound Lipschitz certificate failed".into()));
        }
    }
    Ok(rat_int(2) * eps1 * w / eps)
}

/// Third commuting rule: pushes `e_{ij}(α)` (a term with `|α_n| < ε₁`)
/// through `𝟙 + A + B + D`:
///
/// ```text
/// (𝟙 + A + B + D)·e_{ij}(α) = e_{ij}(α)·eval(Ē)·(𝟙 + A₁ + B₁ + D₁)
/// ```
///
/// with `min(α_n, 0) ≤ Ē_n < ε₁`, `A₁ ∈ 𝒜(ε₁)`, `B₁ ∈ ℬ(−ε₂−ε, l)`,
/// `D₁ ∈ 𝒟`, for any `l ≥ l_bound(ε₁, ε₂, ε)`.
#[allow(clippy::too_many_arguments)]
pub fn com3(
    i: usize,
    j: usize,
    alpha: &RingElem,
    a: &RingMatrix,
    b: &RingMatrix,
    d: &RingMatrix,
    eps1: &Rat,
    eps2: &Rat,
    eps: &Rat,
    l: &Rat,
    g: &AffineHyperplane,
    config: &SeparationConfig,
    stats: &mut SeparationStats,
) -> Result<(ElemWord, RingMatrix, RingMatrix, RingMatrix), Error> {
    let r = a.size();
    let field = a.field();
    let dim = a.ambient_dim();
    let base = a.base();
    if !class_check(a, &ClassSpec::A { eps: eps1.clone() })? {
        return Err(Error::Precondition("com3 needs A ∈ 𝒜(ε₁)".into()));
    }
    let b_in_spec = ClassSpec::B { eps: -eps2.clone(), l: l.clone(), section: g.clone() };
    if !class_check(b, &b_in_spec)? {
        return Err(Error::Precondition("com3 needs B ∈ ℬ(−ε₂, l)".into()));
    }
    if !class_check(d, &ClassSpec::D)? {
        return Err(Error::Precondition("com3 needs D ∈ 𝒟".into()));
    }

    let beta = a.entry(j - 1, i - 1).clone();
    let (gamma, a1, b1, d1) = com1(i, j, alpha, &beta, d, eps1, eps2, l, g, config, stats)?;
    let alpha_gamma = alpha.add(&gamma)?;

    // A'' = e_{ij}(−α−γ)(A − a_{ji}(β))e_{ij}(α)
    let a_nob = a.sub(&a_matrix(r, j, i, &beta))?;
    let e_neg = RingMatrix::elementary(r, i, j, &alpha_gamma.neg())?;
    let e_pos = RingMatrix::elementary(r, i, j, alpha)?;
    let a2mat = e_neg.mul(&a_nob)?.mul(&e_pos)?;
    // B'' = e_{ij}(−α−γ)·B·e_{ij}(α)
    let b2mat = e_neg.mul(b)?.mul(&e_pos)?;

    let x = a1.add(&a2mat)?.add(&d1)?;
    let bc = b1.add(&b2mat)?;
    let eps_out = eps2 + eps;
    let (word2, a_fin, b_fin, d_fin) = com2(&x, &bc, eps1, &eps_out, l, g, config, stats)?;

    let mut word = ElemWord::single(i, j, gamma)?;
    word.extend(&word2.inverse());

    // mandatory re-verification of the displayed identity
    let one = RingMatrix::identity(r, field, dim, base);
    let lhs = one.add(a)?.add(b)?.add(d)?.mul(&e_pos)?;
    let rhs = e_pos
        .mul(&word.eval(r, field, dim, base)?)?
        .mul(&one.add(&a_fin)?.add(&b_fin)?.add(&d_fin)?)?;
    if lhs != rhs {
        return Err(Error::Internal("com3 identity failed re-multiplication".into()));
    }
    // word degree window: min(α_n, 0) ≤ Ē_n < ε₁
    let (au, _) = alpha.as_term().ok_or_else(|| Error::Precondition("com3 needs a term α".into()))?;
    let floor = au.nth_coord().min(Rat::zero());
    for (_, _, lam) in word.factors() {
        for (u, _) in lam.terms() {
            let h = u.nth_coord();
            if h < floor || &h >= eps1 {
                return Err(Error::Internal("com3 word factor degree out of range".into()));
            }
        }
    }
    let b_out_spec =
        ClassSpec::B { eps: -eps_out.clone(), l: l.clone(), section: g.clone() };
    if !class_check(&a_fin, &ClassSpec::A { eps: eps1.clone() })?
        || !class_check(&b_fin, &b_out_spec)?
        || !class_check(&d_fin, &ClassSpec::D)?
    {
        return Err(Error::Internal("com3 output class check failed".into()));
    }
    Ok((word, a_fin, b_fin, d_fin))
}

/// The admissible-representation normalizer: returns a Frobenius level
/// `j` and a word `w` with `eval(w) = frobenius(eval(input), j)` whose
/// factors are terms with integral degrees, negative degrees equal to
/// `−1`, and every positive-degree factor certified to satisfy the
/// `C₁(ε)`-capture condition.
pub fn goodrep_normalize(problem: &SeparationProblem) -> Result<(u32, ElemWord), Error> {
    let monoid = &problem.monoid;
    let eps = &problem.eps;
    let base = monoid.base();
    let dim = monoid.ambient_dim();
    let field = problem.field();
    let r = problem.size;
    let (c1, _) = problem.cut_sides()?;
    let s1 = CrossSection::new(c1, problem.section.clone())?;

    let split = problem.word.split_terms();
    let mut chosen: Option<(u32, ElemWord)> = None;
    'level: for j in 0..=problem.config.max_hull_level {
        let w = split.frobenius(j as i64);
        for u in w.support() {
            if !u.nth_coord().is_integer() {
                continue 'level;
            }
        }
        for u in w.support() {
            let h = u.nth_coord();
            if h.is_positive() && !capture_condition(monoid, &s1, eps, &u)? {
                continue 'level;
            }
        }
        chosen = Some((j, w));
        break;
    }
    let Some((j, w)) = chosen else {
        return Err(Error::BudgetExceeded(
            "goodrep hull-level search (capture condition)".into(),
        ));
    };

    // condition (c): negative degrees must equal −1; split deeper ones
    // through graded decomposition and the commutator relation
    let mut out = ElemWord::new();
    let h_fun: Vec<Int> = {
        let mut v = vec![Int::zero(); dim];
        v[dim - 1] = Int::one();
        v
    };
    for (p, q, lam) in w.factors() {
        let (u, c) = lam.as_term().expect("split word has term factors");
        let h = u.nth_coord();
        debug_assert!(h.is_integer());
        if h >= -Rat::one() {
            out.push(*p, *q, lam.clone())?;
            continue;
        }
        if r < 3 {
            return Err(Error::Precondition(
                "degree below −1 needs matrix size at least 3".into(),
            ));
        }
        let parts = monoids::degree_decomposition(monoid, &h_fun, u)?;
        let expansion = commutator_expand(*p, *q, c.clone(), &parts, r, field, dim, base)?;
        // exact check of the expansion
        let lhs = RingMatrix::elementary(r, *p, *q, lam)?;
        if expansion.eval(r, field, dim, base)? != lhs {
            return Err(Error::Internal("commutator expansion failed re-multiplication".into()));
        }
        out.extend(&expansion);
    }

    // the output must be admissible
    for (_, _, lam) in out.factors() {
        let (u, _) = lam.as_term().expect("admissible factors are terms");
        let h = u.nth_coord();
        if !h.is_integer() || h < -Rat::one() {
            return Err(Error::Internal("good representation is not admissible".into()));
        }
    }
    Ok((j, out))
}

/// The `C₁(ε)`-capture certificate for a positive-degree monomial `μ`:
/// the Φ-image of the polyhedron `{μ + y : y ∈ ℝ₊M, y_n = 1 − μ_n}` must
/// lie within ε of `Φ(C₁)`. Checked exactly on the vertices and recession
/// directions.
fn capture_condition(
    monoid: &AffineMonoid,
    s1: &CrossSection,
    eps: &Rat,
    mu: &ExpVec,
) -> Result<bool, Error> {
    let n = monoid.ambient_dim();
    let level = Rat::one() - mu.nth_coord();
    let (verts, rays) = slice_polyhedron(monoid.cone(), &level)?;
    let phi_c1 = s1.polytope()?;
    let eps2 = eps * eps;
    let mu_r = mu.to_rationals();
    for v in &verts {
        let p: Vec<Rat> = (0..n).map(|k| &mu_r[k] + &v[k]).collect();
        match s1.hyperplane.phi_image_point(&p) {
            Some(phi) => {
                if phi_c1.sq_distance(&phi) >= eps2 {
                    return Ok(false);
                }
            }
            None => return Ok(false),
        }
    }
    for ray in &rays {
        match s1.hyperplane.phi_image_point(ray) {
            Some(phi) => {
                if phi_c1.sq_distance(&phi) >= eps2 {
                    return Ok(false);
                }
            }
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Vertices and recession directions of `C ∩ {x_n = level}`, via
/// homogenization. Empty when the slice misses the cone.
fn slice_polyhedron(cone: &Cone, level: &Rat) -> Result<(Vec<Vec<Rat>>, Vec<Vec<Rat>>), Error> {
    let n = cone.ambient_dim();
    // lift: {(t, y) : y ∈ C, y_n = level·t, t ≥ 0}
    let mut ineqs: Vec<Vec<Rat>> = Vec::new();
    for f in cone.facet_functionals() {
        let mut v = vec![Rat::zero()];
        v.extend(f.iter().cloned());
        ineqs.push(v);
    }
    let mut t_pos = vec![Rat::zero(); n + 1];
    t_pos[0] = Rat::one();
    ineqs.push(t_pos);
    let mut eqs: Vec<Vec<Rat>> = Vec::new();
    for eq in cone.span_equations() {
        let mut v = vec![Rat::zero()];
        v.extend(eq.iter().cloned());
        eqs.push(v);
    }
    let mut lvl = vec![-level.clone()];
    let mut en = vec![Rat::zero(); n];
    en[n - 1] = Rat::one();
    lvl.extend(en);
    eqs.push(lvl);
    let lifted = Cone::from_inequalities(&ineqs, &eqs, n + 1)?;
    let mut verts = Vec::new();
    let mut rays = Vec::new();
    for r in lifted.generators() {
        if r[0].is_zero() {
            rays.push(crate::linalg::int_to_rat(&r[1..]));
        } else {
            let s = Rat::from_integer(r[0].clone());
            verts.push(r[1..].iter().map(|x| Rat::from_integer(x.clone()) / &s).collect());
        }
    }
    Ok((verts, rays))
}

/// Binary commutator expansion of `e_{pq}(a·(ν₁+⋯+ν_m))` into factors of
/// degree `−⌈len/2⌉ … −1`, recursing on halves; needs a third index.
#[allow(clippy::too_many_arguments)]
fn commutator_expand(
    p: usize,
    q: usize,
    coeff: crate::algebra::Coeff,
    parts: &[ExpVec],
    r: usize,
    field: Field,
    dim: usize,
    base: u32,
) -> Result<ElemWord, Error> {
    if parts.len() == 1 {
        let lam = RingElem::term(coeff, &parts[0])?;
        return ElemWord::single(p, q, lam);
    }
    let k = (1..=r).find(|&k| k != p && k != q).expect("r ≥ 3");
    let mid = parts.len() / 2;
    let (first, second) = parts.split_at(mid);
    let mut sigma = ExpVec::zero(dim, base);
    for v in first {
        sigma = sigma.add(v)?;
    }
    let mut tau = ExpVec::zero(dim, base);
    for v in second {
        tau = tau.add(v)?;
    }
    // e_{pq}(a·στ) = e_{pk}(aσ) e_{kq}(τ) e_{pk}(−aσ) e_{kq}(−τ)
    let one = crate::algebra::Coeff::one(field);
    let mut word = ElemWord::new();
    word.extend(&commutator_expand(p, k, coeff.clone(), first, r, field, dim, base)?);
    word.extend(&commutator_expand(k, q, one.clone(), second, r, field, dim, base)?);
    word.extend(&commutator_expand(p, k, coeff.neg(), first, r, field, dim, base)?);
    word.extend(&commutator_expand(k, q, one.neg(), second, r, field, dim, base)?);
    let _ = (sigma, tau);
    Ok(word)
}

/// Almost separation: factorizes the problem word as
/// `eval(input) = eval(Ā₁)·A₂` with `Ā₁` supported in the hull of
/// `M₁(ε)_*` and `A₂ ∈ SL_r` supported in the hull of `M₂(ε)_*`.
///
/// Internal schedule: `ε₂ = δ/2` and `ε' = δ/(2(s − k_p))` per sweep,
/// where `δ ≤ ε` is a certified internal budget such that a Φ-height
/// `≥ −δ` implies the `C₂(ε)` distance test.
pub fn almost_separate(problem: &SeparationProblem) -> Result<SeparationCertificate, Error> {
    problem.validate()?;
    let monoid = &problem.monoid;
    let field = problem.field();
    let dim = monoid.ambient_dim();
    let base = monoid.base();
    let r = problem.size;
    let g = &problem.section;
    let full_section = CrossSection::new(monoid.cone().clone(), g.clone())?;

    let mut stats = SeparationStats::default();
    let delta = certify_internal_budget(problem)?;

    let (j0, mut w) = goodrep_normalize(problem)?;
    stats.hull_level_used = j0;
    let mut z_acc = RingMatrix::identity(r, field, dim, base);

    // inner loops skip the per-call provenance walk; the certificate
    // check below covers the final supports
    let mut inner_cfg = problem.config.clone();
    inner_cfg.provenance_checks = false;

    let mut last_bound: Option<(Rat, usize)> = None;
    let mut sweeps = 0usize;
    loop {
        sweeps += 1;
        if sweeps > problem.config.sweep_budget {
            return Err(Error::BudgetExceeded(
                "almost_separate bounding-pair descent".into(),
            ));
        }
        let degrees: Vec<Rat> = w
            .factors()
            .iter()
            .map(|(_, _, lam)| lam.as_term().expect("admissible word").0.nth_coord())
            .collect();
        let a_bound = degrees.iter().cloned().max().unwrap_or_else(Rat::zero);
        if a_bound <= Rat::one() {
            break;
        }
        let positions: Vec<usize> =
            (0..degrees.len()).filter(|&k| degrees[k] == a_bound).collect();
        let p_count = positions.len();
        if let Some((pa, pp)) = &last_bound {
            if !(a_bound < *pa || (a_bound == *pa && p_count < *pp)) {
                return Err(Error::Internal(
                    "bounding pair did not strictly decrease".into(),
                ));
            }
        }
        last_bound = Some((a_bound.clone(), p_count));

        let kp = *positions.last().expect("nonempty positions");
        let s = w.factors().len();
        if kp == s - 1 {
            // peel the trailing factor into the SL residual
            let (p, q, lam) = w.factors()[s - 1].clone();
            z_acc = RingMatrix::elementary(r, p, q, &lam)?.mul(&z_acc)?;
            let mut factors = w.factors().to_vec();
            factors.pop();
            w = ElemWord::from_factors(factors)?;
            stats.peels += 1;
            continue;
        }

        // sweep the factor at kp through the tail
        let tail_len = s - 1 - kp;
        let eps2 = &delta / rat_int(2);
        let eps_step = &delta / (rat_int(2) * rat_int(tail_len as i64));
        let mut l = Rat::zero();
        for t in 0..tail_len {
            let e2t = &eps2 + rat_int(t as i64) * &eps_step;
            let cand = l_bound(&a_bound, &e2t, &eps_step, &full_section)?;
            if cand > l {
                l = cand;
            }
        }
        if !l.is_positive() {
            l = Rat::one();
        }

        let (ip, jp, alpha_kp) = w.factors()[kp].clone();
        let mut a_cur = a_matrix(r, ip, jp, &alpha_kp);
        let mut b_cur = a_cur.zero_like();
        let mut d_cur = a_cur.zero_like();
        let mut new_factors: Vec<(usize, usize, RingElem)> = w.factors()[..kp].to_vec();
        for t in 0..tail_len {
            let (it, jt, alpha_t) = w.factors()[kp + 1 + t].clone();
            let e2t = &eps2 + rat_int(t as i64) * &eps_step;
            let (word_t, a_n, b_n, d_n) = com3(
                it,
                jt,
                &alpha_t,
                &a_cur,
                &b_cur,
                &d_cur,
                &a_bound,
                &e2t,
                &eps_step,
                &l,
                g,
                &inner_cfg,
                &mut stats,
            )?;
            new_factors.push((it, jt, alpha_t));
            for (p, q, lam) in word_t.split_terms().factors() {
                new_factors.push((*p, *q, lam.clone()));
            }
            a_cur = a_n;
            b_cur = b_n;
            d_cur = d_n;
        }
        let one = RingMatrix::identity(r, field, dim, base);
        let z = one.add(&a_cur)?.add(&b_cur)?.add(&d_cur)?;
        let new_w = ElemWord::from_factors(new_factors)?;
        // exact per-sweep verification: eval(w) = eval(new_w)·z
        let lhs = w.eval(r, field, dim, base)?;
        let rhs = new_w.eval(r, field, dim, base)?.mul(&z)?;
        if lhs != rhs {
            return Err(Error::Internal("sweep identity failed re-multiplication".into()));
        }
        z_acc = z.mul(&z_acc)?;
        w = new_w;
    }
    stats.sweeps = sweeps;

    // undo the good-representation Frobenius by taking c-th roots
    let word_a1 = w.frobenius(-(j0 as i64));
    let a2 = z_acc.frobenius(-(j0 as i64));
    let mut hull = word_a1.max_denom_pow();
    for u in a2.support() {
        hull = hull.max(u.denom_pow());
    }
    for u in problem.word.support() {
        hull = hull.max(u.denom_pow());
    }
    let cert = SeparationCertificate {
        hull_level: hull,
        word_a1,
        a2,
        stats,
    };
    verify_separation(problem, &cert)?;
    Ok(cert)
}

/// The largest `δ ≤ ε` (along a halving schedule) such that any cone
/// point whose Φ-height is `≥ −δ` passes the `C₂(ε)` distance test;
/// certified exactly on the vertices of the trimmed cross-section.
fn certify_internal_budget(problem: &SeparationProblem) -> Result<Rat, Error> {
    let (_, c2) = problem.cut_sides()?;
    let s2 = CrossSection::new(c2, problem.section.clone())?;
    let phi_c2 = s2.polytope()?;
    let phi_m = CrossSection::new(problem.monoid.cone().clone(), problem.section.clone())?
        .polytope()?;
    let n = problem.monoid.ambient_dim();
    let eps2 = &problem.eps * &problem.eps;
    let mut delta = problem.eps.clone();
    for _ in 0..64 {
        // T(δ) = Φ(M) ∩ {x_n ≥ −δ}; need max dist(T(δ), Φ(C₂)) < ε
        let mut a = vec![Rat::zero(); n];
        a[n - 1] = -Rat::one();
        let trimmed = match phi_m.intersect_halfspace(&a, &delta) {
            Ok(t) => t,
            Err(_) => {
                delta /= rat_int(2);
                continue;
            }
        };
        let ok = trimmed.vertices().iter().all(|v| phi_c2.sq_distance(v) < eps2);
        if ok {
            return Ok(delta);
        }
        delta /= rat_int(2);
    }
    Err(Error::BudgetExceeded("internal ε-budget certification".into()))
}
