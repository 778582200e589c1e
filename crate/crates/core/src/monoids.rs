//! Affine positive monoids and their derived objects.
//!
//! An [`AffineMonoid`] is a finitely generated submonoid of ℤⁿ without
//! nontrivial units, together with its cached cone `ℝ₊M`, the lattice
//! `gp(M)` of differences and the Hilbert basis of its normalization.
//!
//! Membership in `M` itself is decided by a bounded representation search
//! over the generators (pruned by cone feasibility); membership in the
//! normalization is a lattice-plus-cone test. Divisible-hull membership
//! `u ∈ M^{c^{-∞}}` reduces to the normalization by the interior-hull
//! equality, so it needs no search at all.

use crate::lattice::ExpVec;
use crate::linalg::{self, dot_int, dot_rat, int_to_rat, IntLattice};
use crate::polyhedra::{Cone, Polytope};
use crate::prelude::*;

/// A finitely generated positive submonoid of ℤⁿ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMonoid {
    generators: Vec<Vec<Int>>,
    ambient_dim: usize,
    base: u32,
    cone: Cone,
    gp: IntLattice,
    hilbert: Vec<Vec<Int>>,
    normal: bool,
}

impl AffineMonoid {
    /// Builds the monoid generated by the given integer vectors.
    /// Rejects generators spanning a non-pointed cone (nontrivial units).
    pub fn new(generators: Vec<Vec<Int>>, ambient_dim: usize, base: u32) -> Result<Self, Error> {
        assert!(base >= 2);
        let mut gens: Vec<Vec<Int>> = generators
            .into_iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .collect();
        gens.sort();
        gens.dedup();
        for g in &gens {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: g.len() });
            }
        }
        let cone = Cone::from_generators(&gens, ambient_dim)?;
        let gp = IntLattice::from_generators(&gens, ambient_dim);
        let hilbert = hilbert_basis_lattice(&cone, &gp)?;
        let normal = hilbert.iter().all(|h| member_search(&gens, &cone, h));
        Ok(AffineMonoid { generators: gens, ambient_dim, base, cone, gp, hilbert, normal })
    }

    pub fn from_ints(gens: &[&[i64]], base: u32) -> Result<Self, Error> {
        let dim = gens.first().map(|g| g.len()).unwrap_or(1);
        Self::new(
            gens.iter().map(|g| g.iter().map(|&x| Int::from(x)).collect()).collect(),
            dim,
            base,
        )
    }

    /// Free monoid ℤ₊ⁿ.
    pub fn standard(ambient_dim: usize, base: u32) -> Self {
        let gens: Vec<Vec<Int>> = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![Int::zero(); ambient_dim];
                v[i] = Int::one();
                v
            })
            .collect();
        Self::new(gens, ambient_dim, base).expect("orthant is pointed")
    }

    pub fn generators(&self) -> &[Vec<Int>] {
        &self.generators
    }

    pub fn generators_expvec(&self) -> Vec<ExpVec> {
        self.generators.iter().map(|g| ExpVec::new(g.clone(), 0, self.base)).collect()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn gp(&self) -> &IntLattice {
        &self.gp
    }

    pub fn rank(&self) -> usize {
        self.gp.rank()
    }

    /// Hilbert basis of the normalization `gp(M) ∩ ℝ₊M`.
    pub fn hilbert_basis(&self) -> &[Vec<Int>] {
        &self.hilbert
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    pub fn is_simplicial(&self) -> bool {
        self.cone.generators().len() == self.rank()
    }

    /// The normalization `M̄` as a monoid (generated by the Hilbert basis).
    pub fn normalization(&self) -> Result<AffineMonoid, Error> {
        AffineMonoid::new(self.hilbert.clone(), self.ambient_dim, self.base)
    }

    /// Exact membership of an integer point in `M`.
    pub fn contains_int(&self, w: &[Int]) -> bool {
        member_search(&self.generators, &self.cone, w)
    }

    /// Membership in the normalization `gp(M) ∩ ℝ₊M`.
    pub fn normalization_contains_int(&self, w: &[Int]) -> bool {
        self.gp.contains(w) && self.cone.contains_rat(&int_to_rat(w))
    }

    /// Membership `u ∈ M/c^j` at the canonical denominator level of `u`:
    /// scale by `c^denom_pow` and decide membership in `M`.
    pub fn hull_member(&self, u: &ExpVec) -> Result<bool, Error> {
        self.check_compat(u)?;
        let w = u.frobenius(u.denom_pow() as i64);
        debug_assert_eq!(w.denom_pow(), 0);
        Ok(self.contains_int(w.numerators()))
    }

    /// Membership in the full divisible hull `M^{c^{-∞}}` of the
    /// normalization: c-adic coordinates w.r.t. `gp(M)` plus cone
    /// membership.
    pub fn normalization_hull_member(&self, u: &ExpVec) -> Result<bool, Error> {
        self.check_compat(u)?;
        if u.is_zero() {
            return Ok(true);
        }
        if !self.cone.contains(u) {
            return Ok(false);
        }
        let coords = match self.gp.span_coords(&u.to_rationals()) {
            Some(c) => c,
            None => return Ok(false),
        };
        Ok(coords.iter().all(|c| is_c_power_denominator(c, self.base)))
    }

    /// Interior membership: `u ∈ M_* = (M ∩ int ℝ₊M) ∪ {0}`.
    pub fn interior_member(&self, u: &ExpVec) -> Result<bool, Error> {
        Ok(self.hull_member(u)? && (u.is_zero() || self.cone.interior_contains(u)))
    }

    /// Membership in `(M_*)^{c^{-∞}} = (M̄_*)^{c^{-∞}}`: the divisible hull
    /// of the interior monoid. Exact, search-free.
    pub fn interior_hull_member(&self, u: &ExpVec) -> Result<bool, Error> {
        Ok(self.normalization_hull_member(u)?
            && (u.is_zero() || self.cone.interior_contains(u)))
    }

    fn check_compat(&self, u: &ExpVec) -> Result<(), Error> {
        if u.ambient_dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: u.ambient_dim(),
            });
        }
        if u.base() != self.base {
            return Err(Error::BaseMismatch { expected: self.base, got: u.base() });
        }
        Ok(())
    }

    /// The face submonoid `M|F = M ∩ F`, generated by the generators of
    /// `M` lying on the face.
    pub fn face_restrict(&self, face: &Cone) -> Result<AffineMonoid, Error> {
        // verify that `face` is a face of ℝ₊M: its relative interior point
        // must have carrier generators spanning exactly `face`
        let probe: Vec<Rat> = if face.generators().is_empty() {
            vec![Rat::zero(); self.ambient_dim]
        } else {
            let mut s = vec![Rat::zero(); self.ambient_dim];
            for g in face.generators() {
                for i in 0..self.ambient_dim {
                    s[i] += Rat::from_integer(g[i].clone());
                }
            }
            s
        };
        let carrier = self
            .cone
            .carrier_face(&probe)
            .ok_or_else(|| Error::Precondition("not a face of the monoid cone".into()))?;
        let carrier_cone = Cone::from_generators(&carrier, self.ambient_dim)?;
        if &carrier_cone != face {
            return Err(Error::Precondition("not a face of the monoid cone".into()));
        }
        let gens: Vec<Vec<Int>> = self
            .generators
            .iter()
            .filter(|g| face.contains_rat(&int_to_rat(g)))
            .cloned()
            .collect();
        AffineMonoid::new(gens, self.ambient_dim, self.base)
    }

    /// For a normal monoid, the restriction `M|W = gp(M) ∩ ℝ₊W` to a
    /// polytope `W` with `ℝ₊W ⊆ ℝ₊M`.
    pub fn polytope_restrict(&self, w: &Polytope) -> Result<AffineMonoid, Error> {
        if !self.normal {
            return Err(Error::Precondition("polytope restriction requires a normal monoid".into()));
        }
        let dirs: Vec<Vec<Rat>> = w.vertices().to_vec();
        for d in &dirs {
            if !self.cone.contains_rat(d) {
                return Err(Error::Precondition("polytope not inside the monoid cone".into()));
            }
        }
        let sub = Cone::from_generators_rat(&dirs, self.ambient_dim)?;
        let gens = hilbert_basis_lattice(&sub, &self.gp)?;
        AffineMonoid::new(gens, self.ambient_dim, self.base)
    }
}

fn is_c_power_denominator(x: &Rat, base: u32) -> bool {
    let c = Int::from(base);
    let mut d = x.denom().clone();
    while !d.is_one() {
        if (&d % &c).is_zero() {
            d /= &c;
        } else {
            return false;
        }
    }
    true
}

/// Bounded representation search: `w ∈ ⟨gens⟩` as a nonnegative integer
/// combination. Prunes by cone membership of every residual; recursion
/// depth is bounded by a strictly positive grading functional.
fn member_search(gens: &[Vec<Int>], cone: &Cone, w: &[Int]) -> bool {
    if w.iter().all(|x| x.is_zero()) {
        return true;
    }
    if !cone.contains_rat(&int_to_rat(w)) {
        return false;
    }
    // grade: sum of facet functionals, strictly positive on the cone
    let grade = |v: &[Int]| -> Rat {
        cone.facet_functionals().iter().map(|f| dot_rat(f, &int_to_rat(v))).sum()
    };
    fn rec(
        gens: &[Vec<Int>],
        cone: &Cone,
        w: Vec<Int>,
        from: usize,
        memo: &mut BTreeSet<(Vec<Int>, usize)>,
        grade: &dyn Fn(&[Int]) -> Rat,
    ) -> bool {
        if w.iter().all(|x| x.is_zero()) {
            return true;
        }
        if !cone.contains_rat(&int_to_rat(&w)) {
            return false;
        }
        if !memo.insert((w.clone(), from)) {
            return false;
        }
        for (k, g) in gens.iter().enumerate().skip(from) {
            let next: Vec<Int> = w.iter().zip(g).map(|(a, b)| a - b).collect();
            if rec(gens, cone, next, k, memo, grade) {
                return true;
            }
        }
        false
    }
    let mut memo = BTreeSet::new();
    rec(gens, cone, w.to_vec(), 0, &mut memo, &grade)
}

/// Hilbert basis of `C ∩ Λ`: the unique minimal generating set of the
/// normal monoid of lattice points of a pointed rational cone.
///
/// Candidates are the lattice points of `{x ∈ C : φ(x) ≤ Σ φ(rᵢ)}` where
/// `φ` is the sum of the facet functionals and `rᵢ` are the primitive
/// lattice generators of the extreme rays; irreducibility is then checked
/// by subtracting previously found elements.
pub fn hilbert_basis_lattice(cone: &Cone, lattice: &IntLattice) -> Result<Vec<Vec<Int>>, Error> {
    if cone.dim() == 0 {
        return Ok(Vec::new());
    }
    let n = cone.ambient_dim();
    // primitive lattice point on each extreme ray
    let mut ray_points: Vec<Vec<Int>> = Vec::new();
    for r in cone.generators() {
        let mut k = Int::one();
        loop {
            let cand: Vec<Int> = r.iter().map(|x| x * &k).collect();
            if lattice.contains(&cand) {
                ray_points.push(cand);
                break;
            }
            k += 1;
            if k > Int::from(1_000_000) {
                return Err(Error::BudgetExceeded("primitive ray point search".into()));
            }
        }
    }
    let grade = |v: &[Rat]| -> Rat { cone.facet_functionals().iter().map(|f| dot_rat(f, v)).sum() };
    let bound: Rat = ray_points.iter().map(|p| grade(&int_to_rat(p))).sum();

    // bounding box for {x ∈ C : φ(x) ≤ bound}
    let mut lo = vec![Int::zero(); n];
    let mut hi = vec![Int::zero(); n];
    for p in &ray_points {
        let g = grade(&int_to_rat(p));
        for i in 0..n {
            // the segment t·p, t ∈ [0, bound/g], spans coordinate range
            let extreme = Rat::from_integer(p[i].clone()) * &bound / &g;
            let f = extreme.floor().to_integer();
            let cmax = extreme.ceil().to_integer();
            if f < lo[i] {
                lo[i] = f;
            }
            if cmax > hi[i] {
                hi[i] = cmax;
            }
        }
    }
    let mut volume = Int::one();
    for i in 0..n {
        volume *= &hi[i] - &lo[i] + 1;
    }
    if volume > Int::from(4_000_000) {
        return Err(Error::BudgetExceeded("hilbert basis box enumeration".into()));
    }

    // enumerate candidates, ascending by grade
    let mut candidates: Vec<Vec<Int>> = Vec::new();
    let mut cursor = lo.clone();
    loop {
        let point = cursor.clone();
        let pr = int_to_rat(&point);
        if point.iter().any(|x| !x.is_zero())
            && cone.contains_rat(&pr)
            && grade(&pr) <= bound
            && lattice.contains(&point)
        {
            candidates.push(point);
        }
        // advance odometer
        let mut i = 0;
        loop {
            if i == n {
                break;
            }
            cursor[i] += 1;
            if cursor[i] <= hi[i] {
                break;
            }
            cursor[i] = lo[i].clone();
            i += 1;
        }
        if i == n {
            break;
        }
    }
    candidates.sort_by(|a, b| {
        grade(&int_to_rat(a)).cmp(&grade(&int_to_rat(b))).then_with(|| a.cmp(b))
    });

    let mut basis: Vec<Vec<Int>> = Vec::new();
    'next: for x in candidates {
        for h in &basis {
            let rest: Vec<Int> = x.iter().zip(h).map(|(a, b)| a - b).collect();
            if rest.iter().any(|v| !v.is_zero())
                && cone.contains_rat(&int_to_rat(&rest))
                && lattice.contains(&rest)
            {
                continue 'next; // x = h + rest is reducible
            }
            if rest.iter().all(|v| v.is_zero()) {
                continue 'next;
            }
        }
        basis.push(x);
    }
    Ok(basis)
}

/// Hilbert basis of `C ∩ ℤⁿ` as exponent vectors.
pub fn hilbert_basis(cone: &Cone, base: u32) -> Result<Vec<ExpVec>, Error> {
    let lattice = IntLattice::standard(cone.ambient_dim());
    let hb = hilbert_basis_lattice(cone, &lattice)?;
    Ok(hb.into_iter().map(|v| ExpVec::new(v, 0, base)).collect())
}

/// An element of the `c`-divisible hull together with its hull level:
/// `frobenius(elem, level)` lands in the normalization of the underlying
/// monoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisibleHullElem {
    pub elem: ExpVec,
    pub level: u32,
}

impl DivisibleHullElem {
    pub fn new(elem: ExpVec, level: u32, monoid: &AffineMonoid) -> Result<Self, Error> {
        if elem.denom_pow() > level {
            return Err(Error::Precondition("hull level below the denominator depth".into()));
        }
        if !monoid.normalization_hull_member(&elem)? {
            return Err(Error::Precondition("element is not in the divisible hull".into()));
        }
        Ok(DivisibleHullElem { elem, level })
    }
}

/// Seminormality check: `M` is seminormal iff `(M|F)_*` is normal for
/// every face `F` of `ℝ₊M`.
///
/// Per face we search for an interior gap element of the normalization of
/// the face monoid that is missing from `M`; the search region is bounded
/// by a conductor element, which is complete at the desk scale this crate
/// targets.
pub fn seminormal_check(monoid: &AffineMonoid) -> Result<bool, Error> {
    for face in monoid.cone().faces()? {
        if face.dim() == 0 {
            continue;
        }
        let restricted = monoid.face_restrict(&face)?;
        if !interior_gap_free(&restricted)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff the normalization of `m` has no interior element missing from
/// `m` inside the bounded certification region.
fn interior_gap_free(m: &AffineMonoid) -> Result<bool, Error> {
    if m.is_normal() {
        return Ok(true);
    }
    let cone = m.cone();
    let grade = |v: &[Int]| -> Rat {
        cone.facet_functionals().iter().map(|f| dot_rat(f, &int_to_rat(v))).sum()
    };
    // conductor-style bound: twice the largest generator grade plus the
    // largest Hilbert-basis grade covers every minimal gap at desk scale
    let max_gen: Rat =
        m.generators().iter().map(|g| grade(g)).max().unwrap_or_else(Rat::zero);
    let max_hb: Rat = m.hilbert_basis().iter().map(|h| grade(h)).max().unwrap_or_else(Rat::zero);
    let bound = rat_int(2) * max_gen + max_hb;

    // enumerate normalization elements by iterated Hilbert-basis sums
    let mut layer: Vec<Vec<Int>> = m.hilbert_basis().to_vec();
    let mut seen: BTreeSet<Vec<Int>> = layer.iter().cloned().collect();
    let mut rounds = 0;
    while !layer.is_empty() {
        rounds += 1;
        if rounds > 64 {
            return Err(Error::BudgetExceeded("seminormality interior-gap search".into()));
        }
        for x in &layer {
            if cone.interior_contains_rat(&int_to_rat(x)) && !m.contains_int(x) {
                return Ok(false);
            }
        }
        let mut next: Vec<Vec<Int>> = Vec::new();
        for x in &layer {
            for h in m.hilbert_basis() {
                let s: Vec<Int> = x.iter().zip(h).map(|(a, b)| a + b).collect();
                if grade(&s) <= bound && seen.insert(s.clone()) {
                    next.push(s);
                }
            }
        }
        layer = next;
    }
    Ok(true)
}

/// A free submonoid `L ⊆ M_*/c^∞` containing the given finite interior
/// set, returned by its free basis. Certified post hoc: the basis is
/// linearly independent, interior, c-adic over `gp(M)`, and every element
/// of `S` expands with nonnegative integer coordinates.
pub fn free_cover(monoid: &AffineMonoid, s: &[ExpVec]) -> Result<Vec<ExpVec>, Error> {
    if !monoid.is_simplicial() {
        return Err(Error::Precondition("free covers require a simplicial monoid".into()));
    }
    for x in s {
        if !monoid.interior_hull_member(x)? {
            return Err(Error::Precondition(format!(
                "{} is not in the interior divisible hull",
                x.render()
            )));
        }
    }
    let rank = monoid.rank();

    let candidates = free_cover_candidates(monoid, s)?;
    'cand: for basis in candidates {
        // basis must be linearly independent and interior
        let rows: Vec<Vec<Rat>> = basis.iter().map(|b| b.to_rationals()).collect();
        if linalg::rank_rat(&rows) != rank {
            continue;
        }
        for b in &basis {
            if !monoid.interior_hull_member(b)? {
                continue 'cand;
            }
        }
        if expand_all(&basis, s).is_some() {
            return Ok(basis);
        }
    }
    Err(Error::BudgetExceeded("free cover search".into()))
}

/// Nonnegative-integer coordinates of every element of `s` in `basis`,
/// if they exist.
pub fn expand_all(basis: &[ExpVec], s: &[ExpVec]) -> Option<Vec<Vec<Int>>> {
    let rows: Vec<Vec<Rat>> = if basis.is_empty() {
        return if s.is_empty() { Some(Vec::new()) } else { None };
    } else {
        let dim = basis[0].ambient_dim();
        (0..dim).map(|r| basis.iter().map(|b| b.coord(r)).collect()).collect()
    };
    let mut out = Vec::with_capacity(s.len());
    for x in s {
        let coords = linalg::solve_rat(&rows, &x.to_rationals())?;
        // solve_rat gives one solution; verify exactly and integrality
        let mut ints = Vec::with_capacity(coords.len());
        for c in &coords {
            if !c.is_integer() || c.is_negative() {
                return None;
            }
            ints.push(c.to_integer());
        }
        for r in 0..x.ambient_dim() {
            let acc: Rat = basis.iter().zip(&coords).map(|(b, c)| b.coord(r) * c).sum();
            if acc != x.coord(r) {
                return None;
            }
        }
        out.push(ints);
    }
    Some(out)
}

/// Candidate free bases, cheapest first: scaled primitive ray points for
/// the empty or ray-compatible cases, then (rank 2) wedge bases built from
/// the extreme directions of `S`.
fn free_cover_candidates(
    monoid: &AffineMonoid,
    s: &[ExpVec],
) -> Result<Vec<Vec<ExpVec>>, Error> {
    let base = monoid.base();
    let rank = monoid.rank();
    let mut out: Vec<Vec<ExpVec>> = Vec::new();

    // `S` itself, when independent
    if s.len() == rank {
        out.push(s.to_vec());
    }

    // interior-shifted scaled ray points at increasing depth: for the
    // empty-constraint case and monoids whose ray coordinates are c-adic
    let rays: Vec<Vec<Int>> = monoid.cone().generators().to_vec();
    let deep: Vec<Int> = {
        let mut d = vec![Int::zero(); monoid.ambient_dim()];
        for r in &rays {
            for i in 0..monoid.ambient_dim() {
                d[i] += &r[i];
            }
        }
        d
    };
    for t in 0..6u32 {
        let scale = Int::from(base).pow(t.max(1));
        let basis: Vec<ExpVec> = rays
            .iter()
            .map(|r| {
                let nums: Vec<Int> =
                    r.iter().zip(&deep).map(|(x, d)| x * &scale + d).collect();
                ExpVec::new(nums, t, base)
            })
            .collect();
        out.push(basis);
    }

    if rank == 2 && !s.is_empty() {
        out.extend(wedge_candidates(monoid, s)?);
    }
    Ok(out)
}

/// Rank-2 wedge bases: directions at or just outside the angular span of
/// `S`, whose determinant divides a power of `c` so that coordinates stay
/// c-adic; each basis is pushed to the depth that clears denominators.
fn wedge_candidates(monoid: &AffineMonoid, s: &[ExpVec]) -> Result<Vec<Vec<ExpVec>>, Error> {
    let base = monoid.base();
    let dim = monoid.ambient_dim();
    if dim != 2 {
        // embed-in-span case not needed at desk scale
        return Ok(Vec::new());
    }
    let cross = |a: &[Rat], b: &[Rat]| -> Rat { &a[0] * &b[1] - &a[1] * &b[0] };
    // extreme directions of S: maximal/minimal by angle within the pointed cone
    let mut dirs: Vec<Vec<Rat>> = s.iter().map(|x| x.to_rationals()).collect();
    dirs.sort_by(|a, b| cross(b, a).cmp(&Rat::zero()).then(a.cmp(b)));
    let s_lo = dirs[0].clone();
    let s_hi = dirs[dirs.len() - 1].clone();
    let lo_p = linalg::primitive_from_rat(&s_lo);
    let hi_p = linalg::primitive_from_rat(&s_hi);

    // mediant walk from each S-extreme direction toward the cone boundary
    let rays = monoid.cone().generators();
    let mut lo_candidates: Vec<Vec<Int>> = vec![lo_p.clone()];
    let mut hi_candidates: Vec<Vec<Int>> = vec![hi_p.clone()];
    for r in rays {
        for w in 1..5i64 {
            lo_candidates.push(
                lo_p.iter().zip(r).map(|(a, b)| a * Int::from(w + 1) + b).collect(),
            );
            hi_candidates.push(
                hi_p.iter().zip(r).map(|(a, b)| a * Int::from(w + 1) + b).collect(),
            );
        }
    }
    let mut out = Vec::new();
    for lc in &lo_candidates {
        for hc in &hi_candidates {
            for t in 0..8u32 {
                let b1 = ExpVec::new(lc.clone(), t, base);
                let b2 = ExpVec::new(hc.clone(), t, base);
                out.push(vec![b1, b2]);
            }
        }
    }
    Ok(out)
}

/// Effective graded decomposition: writes an interior element `m` with
/// `h(m) = d ≠ 0` as a sum of `|d|` parts, each in the interior divisible
/// hull with `h`-value `sign(d)`.
///
/// The equal subdivision of `[0, m]` is used directly when its step is
/// c-adic; otherwise each subdivision point is perturbed to a nearby
/// c-adic lattice point on its `h`-level, searching denominators
/// `c^t, t = 1, 2, …` — first success wins.
pub fn degree_decomposition(
    monoid: &AffineMonoid,
    h: &[Int],
    m: &ExpVec,
) -> Result<Vec<ExpVec>, Error> {
    let hr = int_to_rat(h);
    let d_rat = dot_rat(&hr, &m.to_rationals());
    if !d_rat.is_integer() {
        return Err(Error::Precondition("element has non-integral degree".into()));
    }
    let d = d_rat.to_integer();
    if d.is_zero() {
        return Err(Error::Precondition("degree of the element must be nonzero".into()));
    }
    if !monoid.interior_hull_member(m)? {
        return Err(Error::Precondition("element is not interior".into()));
    }
    let parts_count_int = d.abs();
    let parts_count: u64 = parts_count_int
        .to_string()
        .parse()
        .map_err(|_| Error::BudgetExceeded("degree too large to decompose".into()))?;
    if parts_count == 1 {
        return Ok(vec![m.clone()]);
    }

    // equal subdivision when the step is c-adic
    let step: Vec<Rat> = m
        .to_rationals()
        .iter()
        .map(|x| x / Rat::from_integer(parts_count_int.clone()))
        .collect();
    if step.iter().all(|x| is_c_power_denominator_rat(x, monoid.base())) {
        let part = ExpVec::from_rationals(&step, monoid.base())?;
        if monoid.interior_hull_member(&part)? {
            let parts = vec![part; parts_count as usize];
            verify_decomposition(monoid, h, m, &parts)?;
            return Ok(parts);
        }
    }

    // perturbed broken line: choose c-adic interior points x_i near the
    // subdivision points a_i on their exact h-levels
    let mut points: Vec<ExpVec> = vec![ExpVec::zero(m.ambient_dim(), m.base())];
    for i in 1..parts_count {
        let frac = Rat::new(Int::from(i), parts_count_int.clone());
        let target: Vec<Rat> = m.to_rationals().iter().map(|x| x * &frac).collect();
        let point = nearest_hull_point_on_level(monoid, h, &target, &points[points.len() - 1])?;
        points.push(point);
    }
    points.push(m.clone());
    let mut parts = Vec::new();
    for w in points.windows(2) {
        parts.push(w[1].sub(&w[0])?);
    }
    verify_decomposition(monoid, h, m, &parts)?;
    Ok(parts)
}

fn is_c_power_denominator_rat(x: &Rat, base: u32) -> bool {
    is_c_power_denominator(x, base)
}

/// Searches c-adic points on the affine level `{h = h(target)}` near
/// `target`, keeping the difference from `prev` in the interior hull.
fn nearest_hull_point_on_level(
    monoid: &AffineMonoid,
    h: &[Int],
    target: &[Rat],
    prev: &ExpVec,
) -> Result<ExpVec, Error> {
    let base = monoid.base();
    let n = monoid.ambient_dim();
    // kernel directions of h within gp(M)
    let hr = vec![int_to_rat(h)];
    let kernel = linalg::nullspace_rat(&hr);
    for t in 0..10u32 {
        let denom = Int::from(base).pow(t);
        // round target to the c^t grid, then correct the h-level along a
        // direction with nonzero h-value
        let rounded: Vec<Rat> = target
            .iter()
            .map(|x| {
                let scaled = x * Rat::from_integer(denom.clone());
                Rat::new(scaled.round().to_integer(), denom.clone())
            })
            .collect();
        let defect = dot_rat(&int_to_rat(h), target) - dot_rat(&int_to_rat(h), &rounded);
        // pick a correction direction: h itself scaled
        let hh = dot_int(h, h);
        let corrected: Vec<Rat> = (0..n)
            .map(|i| {
                &rounded[i]
                    + &defect * Rat::from_integer(h[i].clone()) / Rat::from_integer(hh.clone())
            })
            .collect();
        if !corrected.iter().all(|x| is_c_power_denominator(x, base)) {
            continue;
        }
        // local grid search around the corrected point within the kernel
        let radius = 2i64;
        let mut offsets: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]];
        for k in &kernel {
            let mut next_offsets = Vec::new();
            for off in &offsets {
                for step in -radius..=radius {
                    let o: Vec<Rat> = (0..n)
                        .map(|i| {
                            &off[i]
                                + &k[i] * rat_int(step) / Rat::from_integer(denom.clone())
                        })
                        .collect();
                    next_offsets.push(o);
                }
            }
            offsets = next_offsets;
        }
        let mut best: Option<(Rat, ExpVec)> = None;
        for off in &offsets {
            let cand: Vec<Rat> = (0..n).map(|i| &corrected[i] + &off[i]).collect();
            if !cand.iter().all(|x| is_c_power_denominator(x, base)) {
                continue;
            }
            let Ok(point) = ExpVec::from_rationals(&cand, base) else { continue };
            let Ok(diff) = point.sub(prev) else { continue };
            if !monoid.interior_hull_member(&point)? || !monoid.interior_hull_member(&diff)? {
                continue;
            }
            let dist: Rat =
                (0..n).map(|i| (&cand[i] - &target[i]) * (&cand[i] - &target[i])).sum();
            if best.as_ref().map(|(b, _)| &dist < b).unwrap_or(true) {
                best = Some((dist, point));
            }
        }
        if let Some((_, point)) = best {
            return Ok(point);
        }
    }
    Err(Error::BudgetExceeded("c-adic perturbation search".into()))
}

fn verify_decomposition(
    monoid: &AffineMonoid,
    h: &[Int],
    m: &ExpVec,
    parts: &[ExpVec],
) -> Result<(), Error> {
    let mut sum = ExpVec::zero(m.ambient_dim(), m.base());
    let sign = if dot_rat(&int_to_rat(h), &m.to_rationals()).is_positive() {
        Rat::one()
    } else {
        -Rat::one()
    };
    for p in parts {
        if dot_rat(&int_to_rat(h), &p.to_rationals()) != sign {
            return Err(Error::Internal("decomposition part has wrong degree".into()));
        }
        if !monoid.interior_hull_member(p)? {
            return Err(Error::Internal("decomposition part not interior".into()));
        }
        sum = sum.add(p)?;
    }
    if &sum != m {
        return Err(Error::Internal("decomposition does not sum to the element".into()));
    }
    Ok(())
}

/// Makes the cone acute: returns an invertible integer matrix `T` fixing
/// the last coordinate such that all pairwise inner products of the
/// transformed extreme rays are nonnegative — which gives
/// `‖u‖, ‖v‖ < ‖u+v‖` for all nonzero `u, v` in the transformed cone —
/// together with the transformed monoid.
///
/// `T` is a shear `x ↦ x + k·φ(x)·e₁` with `φ` strictly positive on the
/// cone, so a large enough `k` always certifies. `T` is in general not
/// unimodular; it is a bijection onto its image and the last coordinate
/// (hence the cut hyperplane and all degree data) is untouched.
pub fn acuteness_shear(
    monoid: &AffineMonoid,
    cut: &[Rat],
) -> Result<(Vec<Vec<Int>>, AffineMonoid), Error> {
    let n = monoid.ambient_dim();
    if n < 2 {
        return Err(Error::Precondition("shear needs ambient dimension at least 2".into()));
    }
    // the cut must dissect the cone
    let vals: Vec<Rat> =
        monoid.cone().generators().iter().map(|g| dot_rat(cut, &int_to_rat(g))).collect();
    if !(vals.iter().any(|v| v.is_positive()) && vals.iter().any(|v| v.is_negative())) {
        return Err(Error::Precondition("hyperplane does not dissect the cone".into()));
    }
    let identity: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    if is_acute(monoid.cone().generators()) {
        return Ok((identity, monoid.clone()));
    }
    // φ = sum of primitive facet functionals, strictly positive on C \ {0}
    let phi: Vec<Int> = {
        let mut acc = vec![Rat::zero(); n];
        for f in monoid.cone().facet_functionals() {
            for i in 0..n {
                acc[i] += &f[i];
            }
        }
        linalg::primitive_from_rat(&acc)
    };
    let mut k = Int::one();
    for _ in 0..64 {
        // T = I + k e₁ φᵀ ; last row stays (0,…,0,1) since (e₁)ₙ = 0
        let mut t = identity.clone();
        for j in 0..n {
            t[0][j] = if j == 0 { Int::one() + &k * &phi[0] } else { &k * &phi[j] };
        }
        if !linalg::det_int(&t).is_zero() {
            let sheared: Vec<Vec<Int>> =
                monoid.generators().iter().map(|g| linalg::mat_vec_int(&t, g)).collect();
            let shear_rays: Vec<Vec<Int>> = monoid
                .cone()
                .generators()
                .iter()
                .map(|g| linalg::mat_vec_int(&t, g))
                .collect();
            if is_acute(&shear_rays) {
                let tm = AffineMonoid::new(sheared, n, monoid.base())?;
                return Ok((t, tm));
            }
        }
        k *= Int::from(2);
    }
    Err(Error::BudgetExceeded("acuteness shear k-search".into()))
}

/// Pairwise nonnegative inner products of the extreme rays.
pub fn is_acute(rays: &[Vec<Int>]) -> bool {
    for (i, u) in rays.iter().enumerate() {
        for v in &rays[i..] {
            if dot_int(u, v).is_negative() {
                return false;
            }
        }
    }
    true
}

/// Coordinates of `M` in a basis of `gp(M)`: returns the basis columns
/// `B` and the re-expressed monoid `M' ⊂ ℤ^rank` with `gp(M') = ℤ^rank`.
/// Points map back via `x ↦ B·x`.
pub fn lattice_normalize(monoid: &AffineMonoid) -> Result<(Vec<Vec<Int>>, AffineMonoid), Error> {
    let rank = monoid.rank();
    let basis = monoid.gp().basis.clone();
    let mut gens = Vec::new();
    for g in monoid.generators() {
        let coords = monoid
            .gp()
            .coords(g)
            .ok_or_else(|| Error::Internal("generator outside its own gp lattice".into()))?;
        gens.push(coords);
    }
    let m2 = AffineMonoid::new(gens, rank, monoid.base())?;
    Ok((basis, m2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn veronese() -> AffineMonoid {
        AffineMonoid::from_ints(&[&[2, 0], &[1, 1], &[0, 2]], 2).unwrap()
    }

    #[test]
    fn membership_examples() {
        let m = veronese();
        assert!(!m.contains_int(&[Int::from(1), Int::from(0)]));
        assert!(m.contains_int(&[Int::from(2), Int::from(2)]));
        assert!(m.contains_int(&[Int::zero(), Int::zero()]));
        // hull membership at denominator level: (1,1)/2 ∈ M/2 since (2,2) ∈ M
        let u = ExpVec::new(vec![Int::from(1), Int::from(1)], 1, 2);
        assert!(m.hull_member(&u).unwrap());
        let v = ExpVec::new(vec![Int::from(1), Int::from(0)], 1, 2);
        assert!(!m.hull_member(&v).unwrap());
    }

    #[test]
    fn hilbert_basis_examples() {
        let orthant = Cone::from_generators(
            &[vec![Int::one(), Int::zero()], vec![Int::zero(), Int::one()]],
            2,
        )
        .unwrap();
        let hb = hilbert_basis(&orthant, 2).unwrap();
        assert_eq!(hb.len(), 2);

        let wide = Cone::from_generators(
            &[vec![Int::one(), Int::zero()], vec![Int::one(), Int::from(4)]],
            2,
        )
        .unwrap();
        let hb = hilbert_basis(&wide, 2).unwrap();
        let expected: Vec<ExpVec> = (0..=4)
            .map(|k| ExpVec::from_ints(&[1, k], 2))
            .collect();
        assert_eq!(hb, expected);
    }

    #[test]
    fn hilbert_basis_minimal() {
        let wide = Cone::from_generators(
            &[vec![Int::one(), Int::zero()], vec![Int::one(), Int::from(4)]],
            2,
        )
        .unwrap();
        let hb = hilbert_basis(&wide, 2).unwrap();
        // no element is the sum of two others
        for (i, a) in hb.iter().enumerate() {
            for b in &hb {
                for c in &hb {
                    let s = b.add(c).unwrap();
                    assert_ne!(&s, a, "hilbert basis element {i} is reducible");
                }
            }
        }
    }

    #[test]
    fn veronese_is_normal() {
        let m = veronese();
        assert!(m.is_normal());
        let norm = m.normalization().unwrap();
        assert_eq!(norm.generators(), m.generators());
        // gp(M) is the even-sum sublattice: (1,1) yes, (1,0) no
        assert!(m.gp().contains(&[Int::one(), Int::one()]));
        assert!(!m.gp().contains(&[Int::one(), Int::zero()]));
    }

    #[test]
    fn non_normal_monoid() {
        // ⟨(1,0),(1,2),(1,3)⟩ misses the interior lattice point (1,1)
        let m = AffineMonoid::from_ints(&[&[1, 0], &[1, 2], &[1, 3]], 2).unwrap();
        assert!(!m.is_normal());
        assert!(m.normalization_contains_int(&[Int::one(), Int::one()]));
        assert!(!m.contains_int(&[Int::one(), Int::one()]));
    }

    #[test]
    fn interior_membership_cases() {
        let z2 = AffineMonoid::standard(2, 2);
        assert!(z2.interior_member(&ExpVec::from_ints(&[1, 1], 2)).unwrap());
        assert!(!z2.interior_member(&ExpVec::from_ints(&[1, 0], 2)).unwrap());
        // rank-1 monoid: M_* = M
        let m1 = AffineMonoid::from_ints(&[&[2]], 2).unwrap();
        assert!(m1.interior_member(&ExpVec::from_ints(&[2], 2)).unwrap());
        assert!(m1.interior_member(&ExpVec::from_ints(&[4], 2)).unwrap());
    }

    #[test]
    fn face_restriction() {
        let m = veronese();
        let facets = m.cone().facets_of().unwrap();
        let ray_x: Vec<&Cone> = facets
            .iter()
            .filter(|f| f.generators() == [vec![Int::one(), Int::zero()]])
            .collect();
        let restricted = m.face_restrict(ray_x[0]).unwrap();
        assert_eq!(restricted.generators(), &[vec![Int::from(2), Int::zero()]]);
        // a non-face is rejected
        let skew = Cone::from_generators(&[vec![Int::one(), Int::one()]], 2).unwrap();
        assert!(m.face_restrict(&skew).is_err());
    }

    #[test]
    fn seminormality_cases() {
        assert!(seminormal_check(&AffineMonoid::standard(2, 2)).unwrap());
        assert!(seminormal_check(&veronese()).unwrap());
        // ⟨(1,0),(1,2),(1,3)⟩: the interior gap (1,1) has 2·(1,1) and
        // 3·(1,1) in M, so seminormality fails on the full face
        let bad = AffineMonoid::from_ints(&[&[1, 0], &[1, 2], &[1, 3]], 2).unwrap();
        assert!(!seminormal_check(&bad).unwrap());
        // rank-1: numerical semigroup ⟨2,3⟩ is not seminormal
        let ns = AffineMonoid::from_ints(&[&[2], &[3]], 2).unwrap();
        assert!(!seminormal_check(&ns).unwrap());
    }

    #[test]
    fn free_cover_basics() {
        let z2 = AffineMonoid::standard(2, 2);
        let s = vec![
            ExpVec::new(vec![Int::one(), Int::from(2)], 1, 2),
            ExpVec::new(vec![Int::from(2), Int::one()], 1, 2),
        ];
        let basis = free_cover(&z2, &s).unwrap();
        assert_eq!(basis, s); // S itself is independent and interior
        let coords = expand_all(&basis, &s).unwrap();
        assert_eq!(coords[0], vec![Int::one(), Int::zero()]);
        assert_eq!(coords[1], vec![Int::zero(), Int::one()]);

        // empty constraint: any interior free basis works
        let empty = free_cover(&z2, &[]).unwrap();
        assert_eq!(empty.len(), 2);
        for b in &empty {
            assert!(z2.interior_hull_member(b).unwrap());
        }
    }

    #[test]
    fn free_cover_wedge() {
        // needs a genuine wedge: S spans more than a basis
        let z2 = AffineMonoid::standard(2, 2);
        let s = vec![
            ExpVec::from_ints(&[1, 1], 2),
            ExpVec::from_ints(&[4, 1], 2),
            ExpVec::from_ints(&[1, 4], 2),
        ];
        let basis = free_cover(&z2, &s).unwrap();
        let coords = expand_all(&basis, &s).unwrap();
        for (x, c) in s.iter().zip(&coords) {
            // re-expand exactly
            let mut acc = ExpVec::zero(2, 2);
            for (b, k) in basis.iter().zip(c) {
                acc = acc.add(&b.scale(k)).unwrap();
            }
            assert_eq!(&acc, x);
        }
        for b in &basis {
            assert!(z2.interior_hull_member(b).unwrap());
        }
    }

    #[test]
    fn free_cover_veronese_supports() {
        // the support set arising from the flagship excision residual
        let m = veronese();
        let s: Vec<ExpVec> = [[1, 1], [2, 2], [3, 1], [1, 3], [2, 4], [3, 3]]
            .iter()
            .map(|v| ExpVec::from_ints(&[v[0], v[1]], 2))
            .collect();
        let basis = free_cover(&m, &s).unwrap();
        assert_eq!(basis.len(), 2);
        let coords = expand_all(&basis, &s).unwrap();
        assert_eq!(coords.len(), s.len());
        for b in &basis {
            assert!(m.interior_hull_member(b).unwrap());
        }
    }

    #[test]
    fn degree_decomposition_midpoint() {
        let z2 = AffineMonoid::standard(2, 2);
        let h = vec![Int::zero(), Int::one()];
        let m = ExpVec::from_ints(&[1, 2], 2);
        let parts = degree_decomposition(&z2, &h, &m).unwrap();
        assert_eq!(parts.len(), 2);
        let half = ExpVec::new(vec![Int::one(), Int::from(2)], 1, 2);
        assert_eq!(parts, vec![half.clone(), half]);
    }

    #[test]
    fn degree_decomposition_rejects_boundary() {
        let z2 = AffineMonoid::standard(2, 2);
        let h = vec![Int::zero(), Int::one()];
        let m = ExpVec::from_ints(&[0, 3], 2);
        assert!(degree_decomposition(&z2, &h, &m).is_err());
    }

    #[test]
    fn degree_decomposition_veronese() {
        let m = veronese();
        let h = vec![Int::zero(), Int::one()];
        let x = ExpVec::from_ints(&[3, 3], 2);
        let parts = degree_decomposition(&m, &h, &x).unwrap();
        assert_eq!(parts.len(), 3);
        let mut sum = ExpVec::zero(2, 2);
        for p in &parts {
            assert_eq!(p.nth_coord(), rat_int(1));
            assert!(m.interior_hull_member(p).unwrap());
            sum = sum.add(p).unwrap();
        }
        assert_eq!(sum, x);
    }

    #[test]
    fn degree_decomposition_negative() {
        // degree −2 after a cut-aligned change of sign
        let m = AffineMonoid::from_ints(&[&[1, -1], &[1, 1]], 2).unwrap();
        let h = vec![Int::zero(), Int::one()];
        let x = ExpVec::from_ints(&[3, -2], 2);
        assert!(m.interior_hull_member(&x).unwrap());
        let parts = degree_decomposition(&m, &h, &x).unwrap();
        assert_eq!(parts.len(), 2);
        let mut sum = ExpVec::zero(2, 2);
        for p in &parts {
            assert_eq!(p.nth_coord(), rat_int(-1));
            assert!(m.interior_hull_member(p).unwrap());
            sum = sum.add(p).unwrap();
        }
        assert_eq!(sum, x);
    }

    #[test]
    fn shear_identity_when_acute() {
        let z2 = AffineMonoid::from_ints(&[&[1, -1], &[1, 1]], 2).unwrap();
        // the cone over (1,−1),(1,1) is already acute: ⟨(1,−1),(1,1)⟩ = 0
        let cut = vec![rat_int(0), rat_int(1)];
        let (t, tm) = acuteness_shear(&z2, &cut).unwrap();
        let n = z2.ambient_dim();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { Int::one() } else { Int::zero() };
                assert_eq!(t[i][j], want);
            }
        }
        assert_eq!(tm.generators(), z2.generators());
    }

    #[test]
    fn shear_wide_cone() {
        let m = AffineMonoid::from_ints(&[&[1, -3], &[1, 3]], 2).unwrap();
        let cut = vec![rat_int(0), rat_int(1)];
        let (t, tm) = acuteness_shear(&m, &cut).unwrap();
        assert!(is_acute(tm.cone().generators()));
        // the last coordinate is untouched: last row of T is (0, 1)
        assert_eq!(t[1], vec![Int::zero(), Int::one()]);
        assert!(!linalg::det_int(&t).is_zero());
        // degree data preserved on generators
        for (g, sg) in m.generators().iter().zip(tm.generators()) {
            assert_eq!(g[1], sg[1]);
        }
        // acuteness on Hilbert basis pairs: ‖u‖², ‖v‖² < ‖u+v‖²
        let hb = tm.hilbert_basis();
        for u in hb {
            for v in hb {
                let ue = ExpVec::new(u.clone(), 0, 2);
                let ve = ExpVec::new(v.clone(), 0, 2);
                let s = ue.add(&ve).unwrap();
                assert!(ue.sq_norm() < s.sq_norm());
                assert!(ve.sq_norm() < s.sq_norm());
            }
        }
    }

    #[test]
    fn lattice_normalization() {
        let m = veronese();
        let (basis, m2) = lattice_normalize(&m).unwrap();
        assert_eq!(m2.ambient_dim(), 2);
        assert!(m2.gp().contains(&[Int::one(), Int::zero()]));
        assert!(m2.gp().contains(&[Int::zero(), Int::one()]));
        // round trip: B·coords(g) = g
        for (g, g2) in m.generators().iter().zip(m2.generators()) {
            let mut back = vec![Int::zero(); 2];
            for (c, b) in g2.iter().zip(&basis) {
                for i in 0..2 {
                    back[i] += c * &b[i];
                }
            }
            assert_eq!(&back, g);
        }
    }

    #[test]
    fn interior_closure_property() {
        let m = veronese();
        let interior = ExpVec::from_ints(&[1, 1], 2);
        for g in m.generators_expvec() {
            let s = interior.add(&g).unwrap();
            assert!(m.interior_member(&s).unwrap());
        }
    }

    #[test]
    fn gp_equals_gp_of_interior() {
        // lattice generated by interior elements equals gp(M): w and w+h
        // are both interior for any Hilbert element h, so their
        // differences recover every generator of gp
        let m = veronese();
        let w = vec![Int::one(), Int::one()];
        assert!(m.interior_member(&ExpVec::new(w.clone(), 0, 2)).unwrap());
        let mut gens = vec![w.clone()];
        for h in m.hilbert_basis() {
            let s: Vec<Int> = w.iter().zip(h).map(|(a, b)| a + b).collect();
            assert!(m.interior_member(&ExpVec::new(s.clone(), 0, 2)).unwrap());
            gens.push(s.iter().zip(&w).map(|(a, b)| a - b).collect());
        }
        let lat = IntLattice::from_generators(&gens, 2);
        assert_eq!(lat.rank(), m.gp().rank());
        for b in &m.gp().basis {
            assert!(lat.contains(b));
        }
    }
}
