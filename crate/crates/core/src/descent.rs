//! Orchestration above the rewriting engine: excision over facets,
//! base-case factorizers, simplicial factorization through free covers,
//! pyramidal descent, and the end-to-end factorization driver.
//!
//! The driver takes `A ∈ SL_r(k[M])` (`r ≥ 3`) and produces a certificate
//! `(j_A, word)` with `eval(word) = frobenius(A, j_A)` and all factor
//! supports in `M^{c^{-j_A}}`. Internally: normalize the lattice, clear
//! every facet by recursion on the rank, then factor the interior
//! residual over a simplicial region (through a free cover and a
//! polynomial base factorizer), descending along pyramidal extensions
//! when the cone is not yet simplicial.
//!
//! Base factorizers are pluggable: the univariate eliminator is complete;
//! the multivariate one is a documented-incomplete heuristic that either
//! returns a certified word or fails explicitly; a fixture oracle can be
//! consulted first. Every word from any factorizer is verified by exact
//! multiplication — oracles are checked, never trusted.

use crate::algebra::{Coeff, Field, RingElem};
use crate::lattice::{AffineHyperplane, ExpVec};
use crate::linalg::{self, dot_rat, int_to_rat};
use crate::matgroups::{ElemWord, RingMatrix};
use crate::monoids::{self, AffineMonoid};
use crate::polyhedra::{is_pyramidal_extension, Cone, CrossSection, Polytope};
use crate::prelude::*;
use crate::separation::{almost_separate, SeparationConfig, SeparationProblem};

/// Configuration for the descent driver.
#[derive(Debug, Clone)]
pub struct DescentConfig {
    pub separation: SeparationConfig,
    /// Cap on recursion depth over ranks and pyramidal steps.
    pub depth_budget: usize,
    /// Cap on λ-refinement retries in a pyramidal step.
    pub lambda_budget: usize,
    /// Budget for elimination loops in the base factorizers.
    pub elimination_budget: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            separation: SeparationConfig::default(),
            depth_budget: 16,
            lambda_budget: 12,
            elimination_budget: 512,
        }
    }
}

/// A certified factorization `eval(word) = frobenius(target, hull_level)`.
#[derive(Debug, Clone)]
pub struct FactorizationCertificate {
    pub hull_level: u32,
    pub word: ElemWord,
    /// One line per reduction stage that contributed word segments.
    pub provenance: Vec<String>,
}

/// Re-checks a certificate against the matrix and monoid it claims to
/// factor: exact product identity plus hull membership of every support.
pub fn verify_factorization(
    monoid: &AffineMonoid,
    target: &RingMatrix,
    cert: &FactorizationCertificate,
) -> Result<(), Error> {
    let r = target.size();
    let evaluated =
        cert.word.eval(r, target.field(), target.ambient_dim(), target.base())?;
    if evaluated != target.frobenius(cert.hull_level as i64) {
        return Err(Error::VerificationFailed(
            "word does not evaluate to the Frobenius power of the target".into(),
        ));
    }
    for u in cert.word.support() {
        if u.denom_pow() > cert.hull_level {
            return Err(Error::VerificationFailed(format!(
                "factor support {} deeper than the certified hull level",
                u.render()
            )));
        }
        // membership in M^{c^{-j_A}}: scaling by c^{j_A} must land in M
        let scaled = u.frobenius(cert.hull_level as i64);
        if scaled.denom_pow() != 0 || !monoid.contains_int(scaled.numerators()) {
            return Err(Error::VerificationFailed(format!(
                "factor support {} is not in the monoid hull",
                u.render()
            )));
        }
    }
    Ok(())
}

/// A pluggable factorizer for matrices over polynomial rings (free
/// monoids `ℤ₊^m`). Implementations must return words that evaluate to
/// the input exactly; callers re-verify regardless.
pub trait BaseFactorizer {
    fn name(&self) -> &'static str;
    fn factor(&self, a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error>;
}

/// Tries factorizers in order; the first verified word wins.
pub struct FactorizerChain {
    pub factorizers: Vec<Box<dyn BaseFactorizer>>,
}

impl FactorizerChain {
    /// Oracle (if any), then the complete univariate eliminator, then the
    /// multivariate heuristic.
    pub fn standard() -> FactorizerChain {
        FactorizerChain {
            factorizers: vec![
                Box::new(UnivariateFactorizer),
                Box::new(MultivariateHeuristic),
            ],
        }
    }

    pub fn with_oracle(oracle: OracleFactorizer) -> FactorizerChain {
        let mut chain = FactorizerChain::standard();
        chain.factorizers.insert(0, Box::new(oracle));
        chain
    }

    pub fn factor(&self, a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error> {
        let mut failures: Vec<String> = Vec::new();
        for f in &self.factorizers {
            match f.factor(a, config) {
                Ok(word) => {
                    let check =
                        word.eval(a.size(), a.field(), a.ambient_dim(), a.base())?;
                    if &check != a {
                        return Err(Error::Internal(format!(
                            "factorizer {} returned a word that does not multiply back",
                            f.name()
                        )));
                    }
                    for u in word.support() {
                        if u.denom_pow() != 0
                            || u.numerators().iter().any(|x| x.is_negative())
                        {
                            return Err(Error::Internal(format!(
                                "factorizer {} left the polynomial ring",
                                f.name()
                            )));
                        }
                    }
                    return Ok(word);
                }
                Err(e) => failures.push(format!("{}: {e}", f.name())),
            }
        }
        Err(Error::FactorizerFailure(failures.join("; ")))
    }
}

/// Canonical rendering of a matrix, used as the oracle lookup key.
pub fn render_matrix(a: &RingMatrix) -> String {
    let mut s = format!("r={};", a.size());
    for i in 0..a.size() {
        for j in 0..a.size() {
            s.push_str(&a.entry(i, j).render());
            s.push(';');
        }
    }
    s
}

/// A fixture-backed factorizer: pre-derived words keyed by the canonical
/// rendering of the matrix. Words are verified by the chain, never
/// trusted.
#[derive(Default)]
pub struct OracleFactorizer {
    pub entries: BTreeMap<String, ElemWord>,
}

impl BaseFactorizer for OracleFactorizer {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn factor(&self, a: &RingMatrix, _config: &DescentConfig) -> Result<ElemWord, Error> {
        self.entries
            .get(&render_matrix(a))
            .cloned()
            .ok_or_else(|| Error::FactorizerFailure("no oracle entry for this matrix".into()))
    }
}

/// Degree of a univariate element (ambient dimension 1), `None` for zero.
fn uni_degree(e: &RingElem) -> Option<Int> {
    e.support().iter().map(|u| u.numerators()[0].clone()).max()
}

fn uni_leading(e: &RingElem) -> Option<(Int, Coeff)> {
    let deg = uni_degree(e)?;
    let u = ExpVec::new(vec![deg.clone()], 0, e.base());
    Some((deg, e.coeff_of(&u)))
}

/// Euclidean division in `k[t]`: `a = q·b + r` with `deg r < deg b`.
fn uni_divmod(a: &RingElem, b: &RingElem) -> Result<(RingElem, RingElem), Error> {
    let (db, lb) = uni_leading(b)
        .ok_or_else(|| Error::Precondition("division by zero polynomial".into()))?;
    let lb_inv = lb.inv()?;
    let mut q = RingElem::zero(a.field(), 1, a.base());
    let mut r = a.clone();
    loop {
        let Some((dr, lr)) = uni_leading(&r) else { break };
        if dr < db {
            break;
        }
        let exp = ExpVec::new(vec![&dr - &db], 0, a.base());
        let t = RingElem::term(lr.mul(&lb_inv)?, &exp)?;
        q = q.add(&t)?;
        r = r.sub(&t.mul(b)?)?;
    }
    Ok((q, r))
}

/// Complete elimination over `k[t]` (and over `k` itself, where every
/// nonzero element is already a unit): reduces the matrix to the
/// identity by recorded row operations and returns the inverse word.
pub struct UnivariateFactorizer;

impl BaseFactorizer for UnivariateFactorizer {
    fn name(&self) -> &'static str {
        "univariate"
    }

    fn factor(&self, a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error> {
        if a.ambient_dim() != 1 {
            return Err(Error::FactorizerFailure(
                "univariate eliminator needs one variable".into(),
            ));
        }
        factor_by_division(a, config, uni_divmod)
    }
}

/// Row-reduction to the identity with a Euclidean `divmod`, recording
/// operations; works verbatim over the coefficient field (degree-zero
/// case). Requires `det = 1`.
fn factor_by_division(
    a: &RingMatrix,
    config: &DescentConfig,
    divmod: impl Fn(&RingElem, &RingElem) -> Result<(RingElem, RingElem), Error>,
) -> Result<ElemWord, Error> {
    if !a.is_sl()? {
        return Err(Error::Precondition("matrix determinant is not 1".into()));
    }
    let r = a.size();
    if r < 2 {
        return Err(Error::Precondition("elimination needs size at least 2".into()));
    }
    let mut work = a.clone();
    let mut ops: Vec<(usize, usize, RingElem)> = Vec::new();
    // row_p += λ·row_q, recorded as e_{pq}(λ) applied on the left
    let mut apply = |work: &mut RingMatrix, p: usize, q: usize, lam: &RingElem| -> Result<(), Error> {
        if lam.is_zero() {
            return Ok(());
        }
        for col in 0..work.size() {
            let v = work.entry(p, col).add(&lam.mul(work.entry(q, col))?)?;
            work.set(p, col, v);
        }
        ops.push((p + 1, q + 1, lam.clone()));
        Ok(())
    };

    for col in 0..r - 1 {
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > config.elimination_budget {
                return Err(Error::BudgetExceeded("euclidean column elimination".into()));
            }
            let nonzero: Vec<usize> =
                (col..r).filter(|&i| !work.entry(i, col).is_zero()).collect();
            if nonzero.is_empty() {
                return Err(Error::Internal("singular column in an SL matrix".into()));
            }
            if nonzero == [col] {
                break;
            }
            if nonzero.len() == 1 {
                // move the only nonzero entry up into the pivot row
                let i = nonzero[0];
                let one = RingElem::one(work.field(), work.ambient_dim(), work.base());
                apply(&mut work, col, i, &one)?;
                continue;
            }
            // reduce the larger-degree entry by the smaller
            let mut pick: Vec<usize> = nonzero.clone();
            pick.sort_by_key(|&i| uni_degree(work.entry(i, col)));
            let (small, big) = (pick[0], pick[1]);
            let (q, _) = divmod(work.entry(big, col), work.entry(small, col))?;
            if q.is_zero() {
                // equal degrees with non-reducing division cannot happen
                // over a field after leading-coefficient scaling
                return Err(Error::Internal("division made no progress".into()));
            }
            apply(&mut work, big, small, &q.neg())?;
        }
    }
    // back-substitute: clear above-diagonal entries; diagonal entries of
    // an upper-triangular SL matrix over k[t] are units (constants)
    for i in 0..r {
        let d = work.entry(i, i).clone();
        if uni_degree(&d).map(|x| x.is_positive()).unwrap_or(true) {
            return Err(Error::Internal("non-unit diagonal after triangularization".into()));
        }
    }
    for col in (0..r).rev() {
        let d_inv = RingElem::constant(
            work.entry(col, col).augmentation().inv()?,
            work.ambient_dim(),
            work.base(),
        );
        for row in 0..col {
            let e = work.entry(row, col).clone();
            if !e.is_zero() {
                let lam = e.mul(&d_inv)?.neg();
                apply(&mut work, row, col, &lam)?;
            }
        }
    }
    // diagonal pass: diag(d, d⁻¹)-style Whitehead words
    for i in 0..r - 1 {
        let d = work.entry(i, i).augmentation();
        if d == Coeff::one(work.field()) {
            continue;
        }
        // left-multiply by diag(d⁻¹, d) at rows (i, i+1):
        // diag(u, u⁻¹) = e₁₂(u)e₂₁(−u⁻¹)e₁₂(u) · e₁₂(−1)e₂₁(1)e₁₂(−1);
        // `apply` composes on the left, so feed the factors right-to-left
        let u = d.inv()?;
        let uinv = d;
        let c = |x: &Coeff| RingElem::constant(x.clone(), work.ambient_dim(), work.base());
        let seq = [
            (i, i + 1, c(&Coeff::one(work.field())).neg()),
            (i + 1, i, c(&Coeff::one(work.field()))),
            (i, i + 1, c(&Coeff::one(work.field())).neg()),
            (i, i + 1, c(&u)),
            (i + 1, i, c(&uinv).neg()),
            (i, i + 1, c(&u)),
        ];
        for (p, q, lam) in seq {
            apply(&mut work, p, q, &lam)?;
        }
    }
    if !work.is_identity() {
        return Err(Error::Internal("elimination did not reach the identity".into()));
    }
    // E_k⋯E_1·A = 𝟙 with E_t = e(λ_t), so A = E_1⁻¹⋯E_k⁻¹: same order,
    // negated arguments
    let word =
        ElemWord::from_factors(ops.into_iter().map(|(p, q, l)| (p, q, l.neg())).collect())?;
    Ok(word)
}

/// Factorization of a constant matrix (entries in the field) by Gaussian
/// elimination; works in any ambient dimension.
pub fn factor_constant(a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error> {
    for e in (0..a.size()).flat_map(|i| (0..a.size()).map(move |j| (i, j))) {
        let entry = a.entry(e.0, e.1);
        if !entry.is_zero() && entry.support().iter().any(|u| !u.is_zero()) {
            return Err(Error::Precondition("matrix is not constant".into()));
        }
    }
    // constants divide exactly: remainder is always zero
    factor_by_division(a, config, |x, y| {
        let q = x.mul(&RingElem::constant(
            y.augmentation().inv()?,
            x.ambient_dim(),
            x.base(),
        ))?;
        Ok((q, RingElem::zero(x.field(), x.ambient_dim(), x.base())))
    })
}

/// Documented-incomplete multivariate factorizer for `SL_r(k[t₁…t_m])`,
/// `r ≥ 3`: tries, in order, an already-elementary shape, a nilpotent
/// rank-one transvection wedge, and spare-row Bezout elimination driven
/// by unit constant terms. Fails explicitly rather than ever returning
/// an unverified word.
pub struct MultivariateHeuristic;

impl BaseFactorizer for MultivariateHeuristic {
    fn name(&self) -> &'static str {
        "multivariate-heuristic"
    }

    fn factor(&self, a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error> {
        if a.size() < 3 {
            return Err(Error::FactorizerFailure(
                "multivariate heuristic needs size at least 3".into(),
            ));
        }
        if !a.is_sl()? {
            return Err(Error::Precondition("matrix determinant is not 1".into()));
        }
        if let Some(w) = as_single_elementary(a)? {
            return Ok(w);
        }
        if let Some(w) = transvection_word(a)? {
            return Ok(w);
        }
        bezout_eliminate(a, config)
    }
}

fn as_single_elementary(a: &RingMatrix) -> Result<Option<ElemWord>, Error> {
    let r = a.size();
    let mut off: Option<(usize, usize)> = None;
    for i in 0..r {
        for j in 0..r {
            let e = a.entry(i, j);
            if i == j {
                if !e.is_one() {
                    return Ok(None);
                }
            } else if !e.is_zero() {
                if off.is_some() {
                    return Ok(None);
                }
                off = Some((i, j));
            }
        }
    }
    match off {
        Some((i, j)) => Ok(Some(ElemWord::single(i + 1, j + 1, a.entry(i, j).clone())?)),
        None => Ok(Some(ElemWord::new())),
    }
}

/// Exact division in the polynomial ring: `a / b` when every step of the
/// leading-term division leaves a divisible remainder.
fn exact_divide(a: &RingElem, b: &RingElem) -> Option<RingElem> {
    if a.is_zero() {
        return Some(RingElem::zero(a.field(), a.ambient_dim(), a.base()));
    }
    let mut r = a.clone();
    let mut q = RingElem::zero(a.field(), a.ambient_dim(), a.base());
    let lead = |e: &RingElem| -> Option<(ExpVec, Coeff)> {
        e.sorted_terms().last().cloned()
    };
    let (bu, bc) = lead(b)?;
    let bc_inv = bc.inv().ok()?;
    for _ in 0..(a.len() * b.len().max(1) + 4) {
        if r.is_zero() {
            return Some(q);
        }
        let (ru, rc) = lead(&r)?;
        let diff = ru.sub(&bu).ok()?;
        if diff.numerators().iter().any(|x| x.is_negative()) || diff.denom_pow() != 0 {
            return None;
        }
        let t = RingElem::term(rc.mul(&bc_inv).ok()?, &diff).ok()?;
        q = q.add(&t).ok()?;
        r = r.sub(&t.mul(b).ok()?).ok()?;
    }
    None
}

/// Recognizes `𝟙 + v·wᵀ` with `wᵀv = 0` and a shared zero slot `s`, and
/// emits the commutator word
/// `(∏ₖ e_{ks}(v_k)) (∏ₖ e_{sk}(w_k)) (∏ₖ e_{ks}(−v_k)) (∏ₖ e_{sk}(−w_k))`.
fn transvection_word(a: &RingMatrix) -> Result<Option<ElemWord>, Error> {
    let r = a.size();
    let one = RingMatrix::identity(r, a.field(), a.ambient_dim(), a.base());
    let n = a.sub(&one)?;
    // N must be nonzero with N² = 0
    if n.support().is_empty() || !n.mul(&n)?.support().is_empty() {
        return Ok(None);
    }
    // rank-one decomposition: pick a pivot entry
    let mut pivot = None;
    'scan: for i in 0..r {
        for j in 0..r {
            if !n.entry(i, j).is_zero() {
                pivot = Some((i, j));
                break 'scan;
            }
        }
    }
    let Some((i0, j0)) = pivot else { return Ok(None) };
    // v := column j0 with its monomial content divided out,
    // w_j := N[i0][j] / v_{i0}
    let content = {
        let mut mins: Option<Vec<Int>> = None;
        for i in 0..r {
            for u in n.entry(i, j0).support() {
                debug_assert_eq!(u.denom_pow(), 0);
                match &mut mins {
                    Some(m) => {
                        for (mk, uk) in m.iter_mut().zip(u.numerators()) {
                            if uk < mk {
                                *mk = uk.clone();
                            }
                        }
                    }
                    None => mins = Some(u.numerators().to_vec()),
                }
            }
        }
        mins.map(|m| ExpVec::new(m, 0, a.base()))
    };
    let Some(content) = content else { return Ok(None) };
    let content_mono = RingElem::monomial(a.field(), &content);
    let mut v: Vec<RingElem> = Vec::new();
    for i in 0..r {
        match exact_divide(n.entry(i, j0), &content_mono) {
            Some(q) => v.push(q),
            None => return Ok(None),
        }
    }
    if v[i0].is_zero() {
        return Ok(None);
    }
    let mut w: Vec<RingElem> = Vec::new();
    for j in 0..r {
        match exact_divide(n.entry(i0, j), &v[i0]) {
            Some(q) => w.push(q),
            None => return Ok(None),
        }
    }
    // verify N = v wᵀ and wᵀv = 0
    let mut dotvw = RingElem::zero(a.field(), a.ambient_dim(), a.base());
    for k in 0..r {
        dotvw = dotvw.add(&w[k].mul(&v[k])?)?;
    }
    if !dotvw.is_zero() {
        return Ok(None);
    }
    for i in 0..r {
        for j in 0..r {
            if &v[i].mul(&w[j])? != n.entry(i, j) {
                return Ok(None);
            }
        }
    }
    let Some(s) = (0..r).find(|&k| v[k].is_zero() && w[k].is_zero()) else {
        return Ok(None);
    };
    let mut word = ElemWord::new();
    for k in 0..r {
        if k != s {
            word.push(k + 1, s + 1, v[k].clone())?;
        }
    }
    for k in 0..r {
        if k != s {
            word.push(s + 1, k + 1, w[k].clone())?;
        }
    }
    for k in 0..r {
        if k != s {
            word.push(k + 1, s + 1, v[k].neg())?;
        }
    }
    for k in 0..r {
        if k != s {
            word.push(s + 1, k + 1, w[k].neg())?;
        }
    }
    Ok(Some(word))
}

/// The positive-degree part `f − f(0)`.
fn positive_part(f: &RingElem) -> RingElem {
    RingElem::constant(f.augmentation(), f.ambient_dim(), f.base())
        .neg()
        .add(f)
        .expect("same context")
}

/// Spare-row Bezout elimination: produce a `1` somewhere in the target
/// column using a row with a unit-constant-term entry plus a truncated
/// geometric series, absorbing the series tail into another entry by
/// exact division; then pivot the column clear.
fn bezout_eliminate(a: &RingMatrix, config: &DescentConfig) -> Result<ElemWord, Error> {
    let r = a.size();
    let field = a.field();
    let dim = a.ambient_dim();
    let base = a.base();
    let mut work = a.clone();
    let mut ops: Vec<(usize, usize, RingElem)> = Vec::new();
    let mut apply = |work: &mut RingMatrix,
                     ops: &mut Vec<(usize, usize, RingElem)>,
                     p: usize,
                     q: usize,
                     lam: &RingElem|
     -> Result<(), Error> {
        if lam.is_zero() {
            return Ok(());
        }
        for col in 0..work.size() {
            let v = work.entry(p, col).add(&lam.mul(work.entry(q, col))?)?;
            work.set(p, col, v);
        }
        ops.push((p + 1, q + 1, lam.clone()));
        Ok(())
    };

    for col in 0..r {
        // produce 1 at (col, col), then clear the column
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > config.elimination_budget {
                return Err(Error::BudgetExceeded("bezout pivot search".into()));
            }
            if work.entry(col, col).is_one() {
                break;
            }
            // search over pivot rows i (unit constant term) and spare
            // rows s (empty entries first) for a series-plus-absorption
            // combination producing a 1 at (s, col)
            let pivots: Vec<usize> =
                (col..r).filter(|&i| !work.entry(i, col).augmentation().is_zero()).collect();
            if pivots.is_empty() {
                return Err(Error::FactorizerFailure(
                    "no unit constant term in the pivot column".into(),
                ));
            }
            let mut plan: Option<(usize, usize, RingElem, Option<(usize, RingElem)>)> = None;
            'search: for &i in &pivots {
                let f = work.entry(i, col).clone();
                let c0_inv = RingElem::constant(f.augmentation().inv()?, dim, base);
                let g = RingElem::one(field, dim, base).sub(&c0_inv.mul(&f)?)?;
                let mut spares: Vec<usize> = (col..r).filter(|&s| s != i).collect();
                spares.sort_by_key(|&s| (!work.entry(s, col).is_zero(), work.entry(s, col).len()));
                for &s in &spares {
                    let fs = work.entry(s, col).clone();
                    let target_gap = RingElem::one(field, dim, base).sub(&fs)?;
                    let mut tk = RingElem::one(field, dim, base);
                    let mut gpow = g.clone();
                    for _k in 1..=10 {
                        // with w := target_gap·c0⁻¹·T_K:
                        //   fs + w·f = 1 − target_gap·g^K
                        let residual = target_gap.mul(&gpow)?;
                        let wcoef = target_gap.mul(&c0_inv)?.mul(&tk)?;
                        if residual.is_zero() {
                            plan = Some((i, s, wcoef, None));
                            break 'search;
                        }
                        for e_row in col..r {
                            if e_row == s {
                                continue;
                            }
                            let fe = work.entry(e_row, col);
                            if fe.is_zero() {
                                continue;
                            }
                            if let Some(u) = exact_divide(&residual, fe) {
                                plan = Some((i, s, wcoef.clone(), Some((e_row, u))));
                                break 'search;
                            }
                        }
                        tk = tk.add(&gpow)?;
                        gpow = gpow.mul(&g)?;
                    }
                }
            }
            let Some((i, s, wcoef, absorb)) = plan else {
                return Err(Error::FactorizerFailure(
                    "bezout residual did not divide out".into(),
                ));
            };
            apply(&mut work, &mut ops, s, i, &wcoef)?;
            if let Some((e_row, u)) = absorb {
                apply(&mut work, &mut ops, s, e_row, &u)?;
            }
            if !work.entry(s, col).is_one() {
                return Err(Error::Internal("bezout plan did not produce a unit".into()));
            }
            // move the 1 to the diagonal position
            if s != col {
                // row_col += (1 − work[col][col])·row_s makes (col,col) = 1
                let gap = RingElem::one(field, dim, base).sub(work.entry(col, col))?;
                apply(&mut work, &mut ops, col, s, &gap)?;
            }
            debug_assert!(work.entry(col, col).is_one());
        }
        // clear the rest of the column
        for row in 0..r {
            if row != col && !work.entry(row, col).is_zero() {
                let lam = work.entry(row, col).neg();
                apply(&mut work, &mut ops, row, col, &lam)?;
            }
        }
    }
    // E_k⋯E_1·A = work, so A = E_1⁻¹⋯E_k⁻¹·work
    let mut word =
        ElemWord::from_factors(ops.into_iter().map(|(p, q, l)| (p, q, l.neg())).collect())?;
    if !work.is_identity() {
        // leftover constant part
        let tail = factor_constant(&work, config)
            .map_err(|e| Error::FactorizerFailure(format!("nonidentity tail: {e}")))?;
        word.extend(&tail);
    }
    let check = word.eval(r, field, dim, base)?;
    if &check != a {
        return Err(Error::FactorizerFailure(
            "bezout elimination did not reproduce the matrix".into(),
        ));
    }
    Ok(word)
}

/// Excision over facets: clears, facet by facet, every boundary support
/// of `A ∈ SL_r(k[M])` by recursively factoring the facet projections.
/// Returns the accumulated word, the interior residual and the Frobenius
/// level, satisfying
/// `frobenius(A, level) = eval(word) · residual` with
/// `π_F(residual) = 𝟙` for every facet `F`.
pub fn facet_reduce(
    monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
    depth: usize,
) -> Result<(ElemWord, RingMatrix, u32), Error> {
    let mut word = ElemWord::new();
    let mut cur = a.clone();
    let mut level = 0u32;
    let mut processed: Vec<Cone> = Vec::new();
    for facet in monoid.cone().facets_of()? {
        let proj = cur.map_entries(|e| Ok(e.facet_projection(&facet)))?;
        if !proj.is_identity() {
            let sub_monoid = monoid.face_restrict(&facet)?;
            let sub_cert = factorize_inner(&sub_monoid, &proj, chain, config, depth + 1)?;
            let j = sub_cert.hull_level;
            cur = cur.frobenius(j as i64);
            word = word.frobenius(j as i64);
            level += j;
            word.extend(&sub_cert.word);
            let inv = sub_cert.word.inverse().eval(
                cur.size(),
                cur.field(),
                cur.ambient_dim(),
                cur.base(),
            )?;
            cur = inv.mul(&cur)?;
        }
        processed.push(facet);
        // processed-face exclusion invariant
        for f in &processed {
            if !cur.map_entries(|e| Ok(e.facet_projection(f)))?.is_identity() {
                return Err(Error::Internal(
                    "processed facet regained support monomials".into(),
                ));
            }
        }
    }
    // full soundness check of the accumulated identity
    let lhs = a.frobenius(level as i64);
    let rhs = word
        .eval(a.size(), a.field(), a.ambient_dim(), a.base())?
        .mul(&cur)?;
    if lhs != rhs {
        return Err(Error::Internal("facet reduction identity failed".into()));
    }
    Ok((word, cur, level))
}

/// Simplicial factorization: find a free cover of the support monomials,
/// transport to a polynomial matrix, run a base factorizer and pull the
/// word back.
pub fn simplicial_factor(
    monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
) -> Result<FactorizationCertificate, Error> {
    if !monoid.is_simplicial() {
        return Err(Error::Precondition("monoid is not simplicial".into()));
    }
    let mut support: Vec<ExpVec> = a.support().into_iter().filter(|u| !u.is_zero()).collect();
    support.sort();
    if support.is_empty() {
        let word = factor_constant(a, config)?;
        return Ok(FactorizationCertificate {
            hull_level: 0,
            word,
            provenance: vec!["constant matrix: field elimination".into()],
        });
    }
    for u in &support {
        if !monoid.interior_hull_member(u)? {
            return Err(Error::Precondition(format!(
                "support {} is not in the interior hull",
                u.render()
            )));
        }
    }
    let basis = monoids::free_cover(monoid, &support)?;
    let coords = monoids::expand_all(&basis, &support)
        .ok_or_else(|| Error::Internal("free cover lost its expansions".into()))?;
    let lookup: BTreeMap<ExpVec, Vec<Int>> =
        support.iter().cloned().zip(coords.into_iter()).collect();
    let m = basis.len();
    let transport = |e: &RingElem| -> Result<RingElem, Error> {
        let mut out = RingElem::zero(e.field(), m, e.base());
        for (u, c) in e.terms() {
            let key = if u.is_zero() {
                ExpVec::zero(m, e.base())
            } else {
                let coords = lookup
                    .get(u)
                    .ok_or_else(|| Error::Internal("missing transport coordinate".into()))?;
                ExpVec::new(coords.clone(), 0, e.base())
            };
            out = out.add(&RingElem::term(c.clone(), &key)?)?;
        }
        Ok(out)
    };
    let poly = a.map_entries(transport)?;
    let word_poly = chain.factor(&poly, config)?;
    // pull the word back along the free basis
    let pull = |e: &RingElem| -> Result<RingElem, Error> {
        let mut out = RingElem::zero(e.field(), monoid.ambient_dim(), e.base());
        for (u, c) in e.terms() {
            let mut exp = ExpVec::zero(monoid.ambient_dim(), e.base());
            for (k, b) in basis.iter().enumerate() {
                exp = exp.add(&b.scale(&u.numerators()[k]))?;
            }
            out = out.add(&RingElem::term(c.clone(), &exp)?)?;
        }
        Ok(out)
    };
    let mut word = ElemWord::new();
    for (p, q, lam) in word_poly.factors() {
        word.push(*p, *q, pull(lam)?)?;
    }
    let evaluated = word.eval(a.size(), a.field(), a.ambient_dim(), a.base())?;
    if &evaluated != a {
        return Err(Error::Internal("pulled-back word does not evaluate to A".into()));
    }
    let hull_level = word.max_denom_pow();
    Ok(FactorizationCertificate {
        hull_level: 0,
        word,
        provenance: vec![format!(
            "simplicial: free cover of {} supports at hull depth {}",
            support.len(),
            hull_level
        )],
    })
}

/// One pyramidal descent step: given a pyramidal extension `L ⊂ N` and
/// `A` supported in the interior hull of `N`, produce an elementary word
/// over the hull of `N_*` and a residual supported in the hull of `L_*`
/// with `eval(word)·residual = frobenius(A, level)`.
pub fn pyramidal_descent_step(
    n_monoid: &AffineMonoid,
    l_monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
    depth: usize,
) -> Result<(ElemWord, RingMatrix, u32), Error> {
    if depth > config.depth_budget {
        return Err(Error::BudgetExceeded("pyramidal descent depth".into()));
    }
    if !n_monoid.is_normal() || !l_monoid.is_normal() {
        return Err(Error::Precondition("pyramidal descent needs normal monoids".into()));
    }
    // trivial case: already over the hull of L_*
    let mut all_in_l = true;
    for u in a.support() {
        if !u.is_zero() && !l_monoid.interior_hull_member(&u)? {
            all_in_l = false;
            break;
        }
    }
    if all_in_l {
        return Ok((ElemWord::new(), a.clone(), 0));
    }
    let g = canonical_section(n_monoid.cone())?;
    let phi_n = n_monoid.cone().cross_section(&g)?;
    let phi_l = l_monoid.cone().cross_section(&g)?;
    if !is_pyramidal_extension(&phi_l, &phi_n)? {
        return Err(Error::Precondition("Φ(L) ⊂ Φ(N) is not a pyramidal extension".into()));
    }
    // the unique vertex of Φ(N) beyond Φ(L), and the cut facet of Φ(L)
    let (cut_a, cut_b) = phi_l
        .inequalities()
        .iter()
        .find(|(aa, bb)| phi_n.vertices().iter().any(|v| dot_rat(aa, v) > *bb))
        .cloned()
        .ok_or_else(|| Error::Internal("no cut facet found".into()))?;
    let xi = phi_l.barycenter();

    let mut t = 2u32;
    for _try in 0..config.lambda_budget {
        let lambda = Rat::one() - Rat::new(Int::one(), Int::from(2).pow(t));
        t += 1;
        // Δ₂λ: the vertex cone of Φ(N) at v truncated past Φ(N), scaled
        let delta2 = match truncated_vertex_cone(&phi_n, &cut_a, &cut_b) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let delta2_l = delta2.homothety(&xi, &lambda)?;
        // the matrix supports must live over the scaled pyramid
        let mut captured = true;
        for u in a.support() {
            if u.is_zero() {
                continue;
            }
            match g.phi_image(&u)? {
                Some(p) => {
                    if !delta2_l.contains(&p) {
                        captured = false;
                        break;
                    }
                }
                None => {
                    captured = false;
                    break;
                }
            }
        }
        if !captured {
            continue;
        }
        let sep_monoid = match n_monoid
            .polytope_restrict(&delta2_l)
            .and_then(|m| if m.rank() == n_monoid.rank() { Ok(m) } else { Err(Error::Precondition("degenerate restriction".into())) })
        {
            Ok(m) => m,
            Err(_) => continue,
        };
        // a word for A over the restricted monoid
        let base_cert = match factorize_interior(&sep_monoid, a, chain, config, depth + 1) {
            Ok(c) => c,
            Err(_) => continue,
        };
        // linear cut through the homothety image of the cut hyperplane,
        // oriented so the Δ₁ (vertex) side is the word side x_n ≤ 0
        let cut_b_l: Rat = {
            // the affine cut {a·x = b} maps to {a·x = b_λ} under the
            // homothety with center ξ
            &lambda * &cut_b + (Rat::one() - &lambda) * dot_rat(&cut_a, &xi)
        };
        let lvl = &g.level;
        let n_dim = n_monoid.ambient_dim();
        let h_cut: Vec<Rat> = (0..n_dim)
            .map(|k| &cut_b_l / lvl * &g.functional[k] - &cut_a[k])
            .collect();
        let scaled = a.frobenius(base_cert.hull_level as i64);
        match separated_split(
            &sep_monoid,
            &h_cut,
            &base_cert.word,
            scaled.size(),
            config,
        ) {
            Ok((word1, a2)) => {
                // Ā₁ over the hull of N_*, residual over the hull of L_*
                let mut ok = true;
                for u in word1.support() {
                    if !n_monoid.interior_hull_member(&u)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    for u in a2.support() {
                        if !u.is_zero() && !l_monoid.interior_hull_member(&u)? {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let lhs = scaled;
                let rhs = word1
                    .eval(a.size(), a.field(), a.ambient_dim(), a.base())?
                    .mul(&a2)?;
                if lhs != rhs {
                    return Err(Error::Internal("descent step identity failed".into()));
                }
                return Ok((word1, a2, base_cert.hull_level));
            }
            Err(_) => continue,
        }
    }
    Err(Error::BudgetExceeded("pyramidal descent λ-refinement".into()))
}

/// The pyramid over the cut facet: vertex cone of `Φ(N)` at the unique
/// vertex beyond the cut, truncated at the far side so it contains
/// `Φ(N)`.
fn truncated_vertex_cone(
    phi_n: &Polytope,
    cut_a: &[Rat],
    cut_b: &Rat,
) -> Result<Polytope, Error> {
    let beyond: Vec<&Vec<Rat>> =
        phi_n.vertices().iter().filter(|v| dot_rat(cut_a, v) > *cut_b).collect();
    if beyond.len() != 1 {
        return Err(Error::Precondition("cut does not isolate one vertex".into()));
    }
    let v = beyond[0].clone();
    let dim = phi_n.ambient_dim();
    let t_min = phi_n
        .vertices()
        .iter()
        .map(|w| dot_rat(cut_a, w))
        .min()
        .expect("nonempty");
    // rays of the vertex cone: directions to the other vertices, extended
    // until they hit {cut_a·x = t_min}
    let mut pts: Vec<Vec<Rat>> = vec![v.clone()];
    let av = dot_rat(cut_a, &v);
    for w in phi_n.vertices() {
        if w == &v {
            continue;
        }
        let aw = dot_rat(cut_a, w);
        debug_assert!(aw < av);
        // v + s(w − v) with cut_a·(…) = t_min
        let s = (&av - &t_min) / (&av - &aw);
        pts.push((0..dim).map(|k| &v[k] + &s * (&w[k] - &v[k])).collect());
    }
    Polytope::from_vertices(&pts, dim)
}

/// A strictly-positive integral cross-section functional for a pointed
/// cone: the sum of its facet functionals at level one.
pub fn canonical_section(cone: &Cone) -> Result<AffineHyperplane, Error> {
    let n = cone.ambient_dim();
    let mut acc = vec![Rat::zero(); n];
    for f in cone.facet_functionals() {
        for k in 0..n {
            acc[k] += &f[k];
        }
    }
    let prim = linalg::primitive_from_rat(&acc);
    Ok(AffineHyperplane::new(int_to_rat(&prim), Rat::one()))
}

/// Runs almost separation for a word over the interior hull of `monoid`
/// against the linear cut `h`, in normalized coordinates (lattice basis,
/// cut as the last coordinate, acuteness shear), then pulls the outputs
/// back. The ε-parameter is searched downward until both transforms and
/// the engine succeed.
fn separated_split(
    monoid: &AffineMonoid,
    h: &[Rat],
    word: &ElemWord,
    size: usize,
    config: &DescentConfig,
) -> Result<(ElemWord, RingMatrix), Error> {
    let base = monoid.base();
    // 1. lattice normalization
    let (basis_cols, m_latt) = monoids::lattice_normalize(monoid)?;
    let rank = m_latt.ambient_dim();
    // functional transported: h₁(y) = h(B y)
    let h1: Vec<Rat> = (0..rank)
        .map(|jc| {
            (0..monoid.ambient_dim())
                .map(|i| &h[i] * Rat::from_integer(basis_cols[jc][i].clone()))
                .sum()
        })
        .collect();
    let h1p = linalg::primitive_from_rat(&h1);
    // 2. unimodular change making the cut the last coordinate
    let (u_cols, gcd) = linalg::row_reduce_unimodular(&h1p);
    if !gcd.is_one() {
        return Err(Error::Internal("cut functional is not primitive on gp".into()));
    }
    // rearrange: last column should be the one with h·col = 1
    let mut cols: Vec<Vec<Int>> = u_cols[1..].to_vec();
    cols.push(u_cols[0].clone());
    let v_mat: Vec<Vec<Int>> = (0..rank)
        .map(|r_| (0..rank).map(|c| cols[c][r_].clone()).collect())
        .collect();
    let t_mat = linalg::inv_unimodular(&v_mat)?;
    let gens2: Vec<Vec<Int>> =
        m_latt.generators().iter().map(|g| linalg::mat_vec_int(&t_mat, g)).collect();
    let m_cut = AffineMonoid::new(gens2, rank, base)?;
    // 3. acuteness shear fixing the last coordinate
    let mut cut_fn = vec![Rat::zero(); rank];
    cut_fn[rank - 1] = Rat::one();
    let (shear, m_acute) = monoids::acuteness_shear(&m_cut, &cut_fn)?;
    let shear_rat: Vec<Vec<Rat>> = shear.iter().map(|row| int_to_rat(row)).collect();
    let shear_inv = linalg::inv_rat(&shear_rat)
        .ok_or_else(|| Error::Internal("shear is not invertible".into()))?;

    // point transport old → new: u ↦ shear · T · coords_B(u)
    let forward = |u: &ExpVec| -> Result<ExpVec, Error> {
        let coords = monoid
            .gp()
            .span_coords(&u.to_rationals())
            .ok_or_else(|| Error::Internal("support outside gp".into()))?;
        let y = linalg::mat_vec_rat(
            &t_mat.iter().map(|row| int_to_rat(row)).collect::<Vec<_>>(),
            &coords,
        );
        let z = linalg::mat_vec_rat(&shear_rat, &y);
        ExpVec::from_rationals(&z, base)
    };
    let backward = |u: &ExpVec| -> Result<ExpVec, Error> {
        let y = linalg::mat_vec_rat(&shear_inv, &u.to_rationals());
        let x = linalg::mat_vec_rat(
            &v_mat.iter().map(|row| int_to_rat(row)).collect::<Vec<_>>(),
            &y,
        );
        // back through the lattice basis
        let amb: Vec<Rat> = (0..monoid.ambient_dim())
            .map(|i| {
                (0..rank)
                    .map(|jc| Rat::from_integer(basis_cols[jc][i].clone()) * &x[jc])
                    .sum()
            })
            .collect();
        ExpVec::from_rationals(&amb, base)
    };

    let map_word = |w: &ElemWord, f: &dyn Fn(&ExpVec) -> Result<ExpVec, Error>| -> Result<ElemWord, Error> {
        let mut out = ElemWord::new();
        for (p, q, lam) in w.factors() {
            let mut e = RingElem::zero(lam.field(), rank.max(monoid.ambient_dim()), base);
            let mut terms: Vec<(ExpVec, Coeff)> = Vec::new();
            for (u, c) in lam.terms() {
                terms.push((f(u)?, c.clone()));
            }
            let dim_out = terms.first().map(|(u, _)| u.ambient_dim()).unwrap_or(rank);
            e = RingElem::zero(lam.field(), dim_out, base);
            for (u, c) in terms {
                e = e.add(&RingElem::term(c, &u)?)?;
            }
            out.push(*p, *q, e)?;
        }
        Ok(out)
    };

    let word_t = map_word(word, &forward)?;
    let section = canonical_section(m_acute.cone())?;
    let mut eps = rat(1, 2);
    let mut last_err: Option<Error> = None;
    for _ in 0..8 {
        let problem = SeparationProblem {
            monoid: m_acute.clone(),
            section: section.clone(),
            eps: eps.clone(),
            size,
            word: word_t.clone(),
            config: config.separation.clone(),
        };
        match almost_separate(&problem) {
            Ok(cert) => {
                let word1 = map_word(&cert.word_a1, &backward)?;
                let a2 = cert.a2.map_entries(|e| {
                    let mut out =
                        RingElem::zero(e.field(), monoid.ambient_dim(), base);
                    for (u, c) in e.terms() {
                        out = out.add(&RingElem::term(c.clone(), &backward(u)?)?)?;
                    }
                    Ok(out)
                })?;
                return Ok((word1, a2));
            }
            Err(e) => last_err = Some(e),
        }
        eps /= rat_int(2);
    }
    Err(last_err.unwrap_or_else(|| Error::BudgetExceeded("separated split ε search".into())))
}

/// Interior driver: factorizes `A` supported in the interior hull of a
/// normal monoid, descending along pyramidal extensions until the cone
/// is simplicial.
pub fn factorize_interior(
    monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
    depth: usize,
) -> Result<FactorizationCertificate, Error> {
    if depth > config.depth_budget {
        return Err(Error::BudgetExceeded("interior factorization depth".into()));
    }
    if a.is_identity() {
        return Ok(FactorizationCertificate {
            hull_level: 0,
            word: ElemWord::new(),
            provenance: vec!["identity matrix".into()],
        });
    }
    if monoid.is_simplicial() {
        return simplicial_factor(monoid, a, chain, config);
    }
    // descend: cut one vertex of Φ(M) pyramidally and recurse on the rest
    let g = canonical_section(monoid.cone())?;
    let phi = monoid.cone().cross_section(&g)?;
    let bary = phi.barycenter();
    let target = phi.homothety(&bary, &rat(1, 2))?;
    let seq = crate::polyhedra::admissible_sequence(&phi, &target, 128)?;
    if seq.len() < 2 {
        return Err(Error::BudgetExceeded("no pyramidal descent progress".into()));
    }
    let next_poly = &seq[1];
    let l_monoid = monoid.polytope_restrict(next_poly)?;
    let (word, residual, level) =
        pyramidal_descent_step(monoid, &l_monoid, a, chain, config, depth)?;
    let rest = factorize_interior(&l_monoid, &residual, chain, config, depth + 1)?;
    let mut total = word.frobenius(rest.hull_level as i64);
    total.extend(&rest.word);
    let mut provenance = vec![format!(
        "pyramidal step at depth {depth} (level {level})"
    )];
    provenance.extend(rest.provenance);
    Ok(FactorizationCertificate {
        hull_level: level + rest.hull_level,
        word: total,
        provenance,
    })
}

fn factorize_inner(
    monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
    depth: usize,
) -> Result<FactorizationCertificate, Error> {
    if depth > config.depth_budget {
        return Err(Error::BudgetExceeded("factorization recursion depth".into()));
    }
    // constants: plain Gaussian elimination over the field
    if a.support().iter().all(|u| u.is_zero()) {
        let word = factor_constant(a, config)?;
        return Ok(FactorizationCertificate {
            hull_level: 0,
            word,
            provenance: vec!["constant matrix: field elimination".into()],
        });
    }
    // rank-0 monoids carry constants only
    if monoid.rank() == 0 {
        return Err(Error::Precondition(
            "nonconstant matrix over the trivial monoid".into(),
        ));
    }
    // lattice normalization: coordinates of gp(M)
    let (basis_cols, m0) = monoids::lattice_normalize(monoid)?;
    let rank = m0.ambient_dim();
    let to_coords = |e: &RingElem| -> Result<RingElem, Error> {
        let mut out = RingElem::zero(e.field(), rank, e.base());
        for (u, c) in e.terms() {
            let lifted = u.frobenius(u.denom_pow() as i64);
            let coords = monoid
                .gp()
                .coords(lifted.numerators())
                .ok_or_else(|| Error::Precondition("support outside gp(M)".into()))?;
            let exp = ExpVec::new(coords, 0, e.base()).frobenius(-(u.denom_pow() as i64));
            out = out.add(&RingElem::term(c.clone(), &exp)?)?;
        }
        Ok(out)
    };
    let from_coords = |e: &RingElem| -> Result<RingElem, Error> {
        let mut out = RingElem::zero(e.field(), monoid.ambient_dim(), e.base());
        for (u, c) in e.terms() {
            let mut exp = ExpVec::zero(monoid.ambient_dim(), e.base());
            let lifted = u.frobenius(u.denom_pow() as i64);
            for (k, col) in basis_cols.iter().enumerate() {
                let v = ExpVec::new(col.clone(), 0, e.base());
                exp = exp.add(&v.scale(&lifted.numerators()[k]))?;
            }
            let exp = exp.frobenius(-(u.denom_pow() as i64));
            out = out.add(&RingElem::term(c.clone(), &exp)?)?;
        }
        Ok(out)
    };
    let a0 = a.map_entries(to_coords)?;

    // excision over the facets, then the interior driver
    let (word_facets, residual, level1) = facet_reduce(&m0, &a0, chain, config, depth)?;
    let interior = factorize_interior(&m0.normalization()?, &residual, chain, config, depth)?;
    let mut word0 = word_facets.frobenius(interior.hull_level as i64);
    word0.extend(&interior.word);
    let mut level = level1 + interior.hull_level;

    // normal form: scale until all supports are integral
    let depth_needed = word0.max_denom_pow();
    if depth_needed > 0 {
        word0 = word0.frobenius(depth_needed as i64);
        level += depth_needed;
    }
    // normalization elements need extra roots before they land in a
    // non-normal M; deep interior multiples always do eventually
    let mut adjust = 0u32;
    loop {
        let all_in = word0.support().iter().all(|u| {
            let s = u.frobenius(level as i64);
            s.denom_pow() == 0 && m0.contains_int(s.numerators())
        });
        if all_in {
            break;
        }
        adjust += 1;
        if adjust > 24 {
            return Err(Error::BudgetExceeded(
                "hull-level adjustment for non-normal supports".into(),
            ));
        }
        word0 = word0.frobenius(1);
        level += 1;
    }
    // pull back to the original coordinates
    let mut word = ElemWord::new();
    for (p, q, lam) in word0.factors() {
        word.push(*p, *q, from_coords(lam)?)?;
    }
    let mut provenance = vec![format!(
        "facet excision over {} facets (level {level1})",
        m0.cone().facets_of()?.len()
    )];
    provenance.extend(interior.provenance);
    let cert = FactorizationCertificate { hull_level: level, word, provenance };
    verify_factorization(monoid, a, &cert)?;
    Ok(cert)
}

/// End-to-end driver: factorizes `A ∈ SL_r(k[M])`, `r ≥ 3`, into a
/// certified elementary word for a Frobenius power of `A`.
pub fn factorize(
    monoid: &AffineMonoid,
    a: &RingMatrix,
    chain: &FactorizerChain,
    config: &DescentConfig,
) -> Result<FactorizationCertificate, Error> {
    if a.size() < 3 {
        return Err(Error::Precondition("factorization needs matrix size at least 3".into()));
    }
    if !a.is_sl()? {
        return Err(Error::Precondition("matrix determinant is not 1".into()));
    }
    for u in a.support() {
        if u.denom_pow() != 0 || !monoid.contains_int(u.numerators()) {
            return Err(Error::Precondition(format!(
                "entry support {} is not in the monoid",
                u.render()
            )));
        }
    }
    factorize_inner(monoid, a, chain, config, 0)
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

    fn qc(v: i64) -> RingElem {
        RingElem::constant(Coeff::from_i64(Field::Q, v), 2, 2)
    }

    fn uni(coeffs: &[i64]) -> RingElem {
        // polynomial with the given coefficients, ascending degree
        let mut e = RingElem::zero(Field::Q, 1, 2);
        for (d, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                let t = RingElem::term(
                    Coeff::from_i64(Field::Q, c),
                    &ExpVec::from_ints(&[d as i64], 2),
                )
                .unwrap();
                e = e.add(&t).unwrap();
            }
        }
        e
    }

    fn cohn_stab(r: usize) -> RingMatrix {
        let one = RingElem::one(Field::Q, 2, 2);
        let c2 = RingMatrix::from_entries(
            vec![
                one.add(&mono(&[1, 1])).unwrap(),
                mono(&[2, 0]).neg(),
                mono(&[0, 2]),
                one.sub(&mono(&[1, 1])).unwrap(),
            ],
            2,
        )
        .unwrap();
        c2.stabilize(r).unwrap()
    }

    #[test]
    fn univariate_rotation() {
        let w = ElemWord::from_factors(vec![
            (1, 2, RingElem::constant(Coeff::from_i64(Field::Q, 1), 1, 2)),
            (2, 1, RingElem::constant(Coeff::from_i64(Field::Q, -1), 1, 2)),
            (1, 2, RingElem::constant(Coeff::from_i64(Field::Q, 1), 1, 2)),
        ])
        .unwrap();
        let m = w.eval(2, Field::Q, 1, 2).unwrap();
        let config = DescentConfig::default();
        let word = UnivariateFactorizer.factor(&m, &config).unwrap();
        assert_eq!(word.eval(2, Field::Q, 1, 2).unwrap(), m);
    }

    #[test]
    fn univariate_round_trips() {
        let config = DescentConfig::default();
        let words = [
            vec![(1usize, 2usize, uni(&[0, 0, 0, 1]))],
            vec![(1, 2, uni(&[1, 2])), (2, 1, uni(&[0, -1, 3])), (1, 3, uni(&[5]))],
            vec![
                (2, 3, uni(&[0, 1])),
                (3, 1, uni(&[2, 0, 1])),
                (1, 2, uni(&[-3])),
                (2, 1, uni(&[0, 0, 4])),
            ],
        ];
        for factors in words {
            let w = ElemWord::from_factors(factors).unwrap();
            let m = w.eval(3, Field::Q, 1, 2).unwrap();
            let word = UnivariateFactorizer.factor(&m, &config).unwrap();
            assert_eq!(word.eval(3, Field::Q, 1, 2).unwrap(), m);
        }
    }

    #[test]
    fn constant_whitehead() {
        // diag(u, u⁻¹, 1) u = 5: six-factor style word through the
        // constant eliminator
        let mut m = RingMatrix::identity(3, Field::Q, 2, 2);
        m.set(0, 0, qc(5));
        m.set(
            1,
            1,
            RingElem::constant(Coeff::from_i64(Field::Q, 5).inv().unwrap(), 2, 2),
        );
        let config = DescentConfig::default();
        let w = factor_constant(&m, &config).unwrap();
        assert_eq!(w.eval(3, Field::Q, 2, 2).unwrap(), m);
    }

    #[test]
    fn transvection_covers_stabilized_cohn() {
        let m = cohn_stab(3);
        let w = transvection_word(&m).unwrap().unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(w.eval(3, Field::Q, 2, 2).unwrap(), m);
    }

    #[test]
    fn heuristic_on_elementary_and_products() {
        let config = DescentConfig::default();
        // already elementary
        let e = RingMatrix::elementary(3, 1, 3, &mono(&[1, 2])).unwrap();
        let w = MultivariateHeuristic.factor(&e, &config).unwrap();
        assert_eq!(w.eval(3, Field::Q, 2, 2).unwrap(), e);
        // a product of elementaries with unit constant terms
        let word = ElemWord::from_factors(vec![
            (1, 2, mono(&[1, 0])),
            (2, 3, mono(&[0, 1]).add(&mono(&[1, 1])).unwrap()),
            (3, 1, mono(&[2, 1]).neg()),
        ])
        .unwrap();
        let m = word.eval(3, Field::Q, 2, 2).unwrap();
        let w = MultivariateHeuristic.factor(&m, &config).unwrap();
        assert_eq!(w.eval(3, Field::Q, 2, 2).unwrap(), m);
    }

    fn veronese() -> AffineMonoid {
        AffineMonoid::from_ints(&[&[2, 0], &[1, 1], &[0, 2]], 2).unwrap()
    }

    #[test]
    fn facet_reduce_cohn() {
        let m = veronese();
        let a = cohn_stab(3);
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let (word, residual, level) = facet_reduce(&m, &a, &chain, &config, 0).unwrap();
        // all residual supports are interior
        for u in residual.support() {
            if !u.is_zero() {
                assert!(m.cone().interior_contains(&u));
            }
        }
        // identity: frobenius(A, level) = eval(word)·residual
        let lhs = a.frobenius(level as i64);
        let rhs = word.eval(3, Field::Q, 2, 2).unwrap().mul(&residual).unwrap();
        assert_eq!(lhs, rhs);
        // facet projections of the residual are trivial
        for f in m.cone().facets_of().unwrap() {
            assert!(residual
                .map_entries(|e| Ok(e.facet_projection(&f)))
                .unwrap()
                .is_identity());
        }
    }

    #[test]
    fn simplicial_factor_elementary() {
        let z2 = AffineMonoid::standard(2, 2);
        let a = RingMatrix::elementary(3, 1, 2, &mono(&[1, 1])).unwrap();
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let cert = simplicial_factor(&z2, &a, &chain, &config).unwrap();
        assert_eq!(
            cert.word.eval(3, Field::Q, 2, 2).unwrap(),
            a.frobenius(cert.hull_level as i64)
        );
    }

    #[test]
    fn factorize_constant_matrix() {
        let m = veronese();
        let w = ElemWord::from_factors(vec![(1, 2, qc(3)), (2, 3, qc(-2)), (3, 1, qc(1))])
            .unwrap();
        let a = w.eval(3, Field::Q, 2, 2).unwrap();
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let cert = factorize(&m, &a, &chain, &config).unwrap();
        assert_eq!(cert.hull_level, 0);
        verify_factorization(&m, &a, &cert).unwrap();
    }

    #[test]
    fn factorize_elementary_product_round_trip() {
        let m = veronese();
        let w = ElemWord::from_factors(vec![
            (1, 2, mono(&[1, 1])),
            (2, 1, mono(&[2, 0])),
            (1, 3, mono(&[0, 2]).neg()),
        ])
        .unwrap();
        let a = w.eval(3, Field::Q, 2, 2).unwrap();
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let cert = factorize(&m, &a, &chain, &config).unwrap();
        verify_factorization(&m, &a, &cert).unwrap();
    }

    #[test]
    fn oracle_is_verified_not_trusted() {
        let m = RingMatrix::elementary(3, 1, 2, &mono(&[1, 1])).unwrap();
        let mut oracle = OracleFactorizer::default();
        // a wrong word under the right key
        oracle
            .entries
            .insert(render_matrix(&m), ElemWord::single(1, 2, mono(&[2, 2])).unwrap());
        let chain = FactorizerChain::with_oracle(oracle);
        let config = DescentConfig::default();
        let out = chain.factor(&m, &config);
        assert!(matches!(out, Err(Error::Internal(_))));
    }

    #[test]
    fn pyramidal_step_rank2() {
        // N over the segment Φ(N) = [(1,0),(1,1)]-directions; L over a
        // subsegment sharing the (1,0) end
        let n = AffineMonoid::from_ints(&[&[1, 0], &[1, 1]], 2).unwrap();
        let l = AffineMonoid::from_ints(&[&[1, 0], &[2, 1]], 2).unwrap();
        // A supported in the interior hull of N
        let a = RingMatrix::elementary(3, 1, 2, &mono(&[3, 1])).unwrap();
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let (word, residual, level) =
            pyramidal_descent_step(&n, &l, &a, &chain, &config, 0).unwrap();
        let lhs = a.frobenius(level as i64);
        let rhs = word.eval(3, Field::Q, 2, 2).unwrap().mul(&residual).unwrap();
        assert_eq!(lhs, rhs);
        for u in residual.support() {
            if !u.is_zero() {
                assert!(l.interior_hull_member(&u).unwrap());
            }
        }
        for u in word.support() {
            assert!(n.interior_hull_member(&u).unwrap());
        }
    }

    #[test]
    fn pyramidal_step_trivial_when_already_inside() {
        let n = AffineMonoid::from_ints(&[&[1, 0], &[1, 1]], 2).unwrap();
        let l = AffineMonoid::from_ints(&[&[1, 0], &[2, 1]], 2).unwrap();
        let a = RingMatrix::elementary(3, 2, 3, &mono(&[3, 1])).unwrap();
        let chain = FactorizerChain::standard();
        let config = DescentConfig::default();
        let (word, residual, _) =
            pyramidal_descent_step(&n, &l, &a, &chain, &config, 0).unwrap();
        assert!(word.is_empty());
        assert_eq!(residual, a);
    }
}
