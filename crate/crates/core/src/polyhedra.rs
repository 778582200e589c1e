//! Exact rational polyhedral geometry.
//!
//! Cones are kept in double description (extreme rays and facet
//! inequalities, converted with the incremental double description method);
//! polytopes carry vertices and supporting inequalities obtained by
//! homogenization. Everything is exact over ℚ and sized for desk scale:
//! ambient dimension ≤ 6, a handful of facets.
//!
//! Distances are always squared so no computation leaves ℚ. The squared
//! distance from a point to a polytope is minimized over the face lattice:
//! project onto each face's affine hull and keep feasible projections.

use crate::lattice::{AffineHyperplane, ExpVec};
use crate::linalg::{
    self, dot_rat, int_to_rat, mat_vec_rat, primitive_from_rat, rank_rat, solve_rat,
};
use crate::prelude::*;

fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat_int(x)).collect()
}

/// Incremental double description: extreme rays and lineality basis of
/// `{x ∈ ℝ^dim : a·x ≥ 0 for all a ∈ ineqs}`.
///
/// Rays come back primitive, sorted and minimal; the solution set is
/// `cone(rays) + span(lineality)`. After each insertion rays are filtered
/// by the rank of their tight inequality set, so no adjacency bookkeeping
/// is needed (fine at desk scale).
pub fn dd_rays(ineqs: &[Vec<Rat>], dim: usize) -> (Vec<Vec<Int>>, Vec<Vec<Rat>>) {
    let mut lineality: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut v = vec![Rat::zero(); dim];
            v[i] = Rat::one();
            v
        })
        .collect();
    let mut rays: Vec<Vec<Rat>> = Vec::new();
    let mut processed: Vec<Vec<Rat>> = Vec::new();

    for a in ineqs {
        if a.iter().all(|x| x.is_zero()) {
            continue;
        }
        let vals: Vec<Rat> = lineality.iter().map(|l| dot_rat(a, l)).collect();
        if let Some(k) = vals.iter().position(|v| !v.is_zero()) {
            // consume one lineality direction to satisfy the new halfspace
            let mut l0 = lineality.remove(k);
            let mut v0 = vals[k].clone();
            if v0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                v0 = -v0;
            }
            for l in &mut lineality {
                let f = dot_rat(a, l) / &v0;
                for i in 0..dim {
                    let t = &l[i] - &f * &l0[i];
                    l[i] = t;
                }
            }
            for r in &mut rays {
                let f = dot_rat(a, r) / &v0;
                for i in 0..dim {
                    let t = &r[i] - &f * &l0[i];
                    r[i] = t;
                }
            }
            rays.push(l0);
            processed.push(a.clone());
        } else {
            let vals: Vec<Rat> = rays.iter().map(|r| dot_rat(a, r)).collect();
            if vals.iter().all(|v| !v.is_negative()) {
                processed.push(a.clone());
                continue;
            }
            let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
            let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
            let mut next: Vec<Vec<Rat>> = (0..rays.len())
                .filter(|&i| !vals[i].is_negative())
                .map(|i| rays[i].clone())
                .collect();
            for &p in &pos {
                for &n in &neg {
                    let combo: Vec<Rat> = (0..dim)
                        .map(|i| &vals[p] * &rays[n][i] - &vals[n] * &rays[p][i])
                        .collect();
                    if combo.iter().any(|x| !x.is_zero()) {
                        next.push(combo);
                    }
                }
            }
            processed.push(a.clone());
            rays = next;
        }
        // keep exactly the extreme rays of the current intersection:
        // tight-set rank must be dim − lineality − 1
        let want = dim - lineality.len() - 1;
        let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
        rays.retain(|r| {
            let tight: Vec<Vec<Rat>> =
                processed.iter().filter(|q| dot_rat(q, r).is_zero()).cloned().collect();
            rank_rat(&tight) == want && seen.insert(primitive_from_rat(r))
        });
    }

    let mut out: Vec<Vec<Int>> = rays.iter().map(|r| primitive_from_rat(r)).collect();
    out.sort();
    out.dedup();
    (out, lineality)
}

/// A rational pointed cone in double description.
///
/// Lower-dimensional cones carry the rational equations of their linear
/// span; facet inequalities are only meaningful together with those
/// equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    generators: Vec<Vec<Int>>,
    facets: Vec<Vec<Rat>>,
    span_equations: Vec<Vec<Rat>>,
    ambient_dim: usize,
    dim: usize,
}

impl Cone {
    /// Builds the cone spanned by the given rational directions, rejecting
    /// non-pointed input.
    pub fn from_generators_rat(gens: &[Vec<Rat>], ambient_dim: usize) -> Result<Cone, Error> {
        let gens: Vec<Vec<Int>> = gens
            .iter()
            .map(|g| primitive_from_rat(g))
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .collect();
        Self::from_generators(&gens, ambient_dim)
    }

    pub fn from_generators(gens: &[Vec<Int>], ambient_dim: usize) -> Result<Cone, Error> {
        for g in gens {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: g.len() });
            }
        }
        let gens: Vec<Vec<Int>> = gens
            .iter()
            .map(|g| linalg::primitive_int(g))
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .collect();
        if gens.is_empty() {
            return Ok(Cone {
                generators: Vec::new(),
                facets: Vec::new(),
                span_equations: (0..ambient_dim)
                    .map(|i| {
                        let mut v = vec![Rat::zero(); ambient_dim];
                        v[i] = Rat::one();
                        v
                    })
                    .collect(),
                ambient_dim,
                dim: 0,
            });
        }
        let gen_rows: Vec<Vec<Rat>> = gens.iter().map(|g| int_to_rat(g)).collect();
        let span_equations = linalg::nullspace_rat(&gen_rows);
        let dim = ambient_dim - span_equations.len();

        // map into span coordinates and run double description there
        let basis = span_basis(&gen_rows, dim);
        let to_span = span_projector(&basis)?;
        let gens_span: Vec<Vec<Rat>> = gen_rows.iter().map(|g| mat_vec_rat(&to_span, g)).collect();

        // facet normals of the cone = extreme rays of its dual
        let (dual_rays, dual_lin) = dd_rays(&gens_span, dim);
        if !dual_lin.is_empty() {
            return Err(Error::Internal("dual cone of full-dimensional cone has lineality".into()));
        }
        let facets_span: Vec<Vec<Rat>> = dual_rays.iter().map(|r| int_to_rat(r)).collect();
        if rank_rat(&facets_span) < dim {
            return Err(Error::NotPointed);
        }

        // extreme rays: convert back from the facet description
        let (rays_span, lin) = dd_rays(&facets_span, dim);
        if !lin.is_empty() {
            return Err(Error::NotPointed);
        }
        let generators: Vec<Vec<Int>> = {
            let mut v: Vec<Vec<Int>> = rays_span
                .iter()
                .map(|r| {
                    let amb: Vec<Rat> = (0..ambient_dim)
                        .map(|i| {
                            (0..dim)
                                .map(|j| &basis[j][i] * Rat::from_integer(r[j].clone()))
                                .sum()
                        })
                        .collect();
                    primitive_from_rat(&amb)
                })
                .collect();
            v.sort();
            v.dedup();
            v
        };
        // facet functionals extended to the ambient space
        let facets: Vec<Vec<Rat>> = facets_span
            .iter()
            .map(|f| {
                (0..ambient_dim)
                    .map(|i| (0..dim).map(|j| &f[j] * &to_span[j][i]).sum())
                    .collect()
            })
            .collect();

        let cone = Cone { generators, facets, span_equations, ambient_dim, dim };
        cone.check_double_description()?;
        Ok(cone)
    }

    /// The cone `{x : a·x ≥ 0 for all a}` intersected with the given span.
    pub fn from_inequalities(
        ineqs: &[Vec<Rat>],
        span_equations: &[Vec<Rat>],
        ambient_dim: usize,
    ) -> Result<Cone, Error> {
        let mut all: Vec<Vec<Rat>> = ineqs.to_vec();
        for eq in span_equations {
            all.push(eq.clone());
            all.push(eq.iter().map(|x| -x).collect());
        }
        let (rays, lin) = dd_rays(&all, ambient_dim);
        if !lin.is_empty() {
            return Err(Error::NotPointed);
        }
        Cone::from_generators(&rays, ambient_dim)
    }

    fn check_double_description(&self) -> Result<(), Error> {
        for g in &self.generators {
            let gr = int_to_rat(g);
            for f in &self.facets {
                if dot_rat(f, &gr).is_negative() {
                    return Err(Error::Internal("generator violates facet inequality".into()));
                }
            }
            for eq in &self.span_equations {
                if !dot_rat(eq, &gr).is_zero() {
                    return Err(Error::Internal("generator off the span".into()));
                }
            }
        }
        for f in &self.facets {
            let tight: Vec<Vec<Rat>> = self
                .generators
                .iter()
                .map(|g| int_to_rat(g))
                .filter(|g| dot_rat(f, g).is_zero())
                .collect();
            if self.dim >= 1 && rank_rat(&tight) + 1 != self.dim {
                return Err(Error::Internal("facet not spanned by tight generators".into()));
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extreme ray generators, primitive and sorted.
    pub fn generators(&self) -> &[Vec<Int>] {
        &self.generators
    }

    pub fn facet_functionals(&self) -> &[Vec<Rat>] {
        &self.facets
    }

    pub fn span_equations(&self) -> &[Vec<Rat>] {
        &self.span_equations
    }

    pub fn contains_rat(&self, u: &[Rat]) -> bool {
        self.span_equations.iter().all(|eq| dot_rat(eq, u).is_zero())
            && self.facets.iter().all(|f| !dot_rat(f, u).is_negative())
    }

    pub fn contains(&self, u: &ExpVec) -> bool {
        self.contains_rat(&u.to_rationals())
    }

    /// Membership in the relative interior (strict facet inequalities).
    pub fn interior_contains_rat(&self, u: &[Rat]) -> bool {
        if self.dim == 0 {
            return u.iter().all(|x| x.is_zero());
        }
        self.span_equations.iter().all(|eq| dot_rat(eq, u).is_zero())
            && self.facets.iter().all(|f| dot_rat(f, u).is_positive())
    }

    pub fn interior_contains(&self, u: &ExpVec) -> bool {
        self.interior_contains_rat(&u.to_rationals())
    }

    /// All faces, from `{0}` up to the cone itself.
    pub fn faces(&self) -> Result<Vec<Cone>, Error> {
        let mut seen: BTreeSet<Vec<Vec<Int>>> = BTreeSet::new();
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        seen.insert(self.generators.clone());
        while let Some(c) = stack.pop() {
            out.push(c.clone());
            for f in c.facets_of()? {
                if seen.insert(f.generators.clone()) {
                    stack.push(f);
                }
            }
        }
        if seen.insert(Vec::new()) {
            out.push(Cone::from_generators(&[], self.ambient_dim)?);
        }
        out.sort_by(|a, b| (a.dim, a.generators.clone()).cmp(&(b.dim, b.generators.clone())));
        Ok(out)
    }

    /// Codimension-one faces.
    pub fn facets_of(&self) -> Result<Vec<Cone>, Error> {
        let mut out: Vec<Cone> = Vec::new();
        for f in &self.facets {
            let tight: Vec<Vec<Int>> = self
                .generators
                .iter()
                .filter(|g| dot_rat(f, &int_to_rat(g)).is_zero())
                .cloned()
                .collect();
            let face = Cone::from_generators(&tight, self.ambient_dim)?;
            if !out.contains(&face) {
                out.push(face);
            }
        }
        out.sort_by(|a, b| a.generators.cmp(&b.generators));
        Ok(out)
    }

    /// Generators of the smallest face containing `u`, or `None` if `u`
    /// is outside the cone.
    pub fn carrier_face(&self, u: &[Rat]) -> Option<Vec<Vec<Int>>> {
        if !self.contains_rat(u) {
            return None;
        }
        let tight: Vec<&Vec<Rat>> =
            self.facets.iter().filter(|f| dot_rat(f, u).is_zero()).collect();
        let gens: Vec<Vec<Int>> = self
            .generators
            .iter()
            .filter(|g| tight.iter().all(|f| dot_rat(f, &int_to_rat(g)).is_zero()))
            .cloned()
            .collect();
        Some(gens)
    }

    /// Splits the cone along a hyperplane through the origin that meets its
    /// relative interior: `(C ∩ {h ≤ 0}, C ∩ {h ≥ 0})`.
    pub fn dissect(&self, h: &[Rat]) -> Result<(Cone, Cone), Error> {
        let vals: Vec<Rat> = self.generators.iter().map(|g| dot_rat(h, &int_to_rat(g))).collect();
        let has_pos = vals.iter().any(|v| v.is_positive());
        let has_neg = vals.iter().any(|v| v.is_negative());
        if !(has_pos && has_neg) {
            return Err(Error::Precondition(
                "hyperplane does not meet the cone's relative interior".into(),
            ));
        }
        let neg_h: Vec<Rat> = h.iter().map(|x| -x).collect();
        let mut lower_ineqs = self.facets.clone();
        lower_ineqs.push(neg_h);
        let lower = Cone::from_inequalities(&lower_ineqs, &self.span_equations, self.ambient_dim)?;
        let mut upper_ineqs = self.facets.clone();
        upper_ineqs.push(h.to_vec());
        let upper = Cone::from_inequalities(&upper_ineqs, &self.span_equations, self.ambient_dim)?;
        if lower.dim() != self.dim || upper.dim() != self.dim {
            return Err(Error::Internal("dissection produced a degenerate half".into()));
        }
        Ok((lower, upper))
    }

    /// Cross-section polytope `Φ(C) = C ∩ G`.
    pub fn cross_section(&self, g: &AffineHyperplane) -> Result<Polytope, Error> {
        let mut vertices = Vec::new();
        for r in &self.generators {
            match g.phi_image_point(&int_to_rat(r)) {
                Some(p) => vertices.push(p),
                None => {
                    return Err(Error::Precondition(
                        "hyperplane does not cross-sect the cone".into(),
                    ))
                }
            }
        }
        Polytope::from_vertices(&vertices, self.ambient_dim)
    }
}

/// Checks that `g` is strictly positive on `C \ {0}`, i.e. `(C, G)` is a
/// valid cross-section pair.
pub fn is_cross_section(cone: &Cone, g: &AffineHyperplane) -> bool {
    let lvl_pos = g.level.is_positive();
    !cone.generators().is_empty()
        && cone.generators().iter().all(|r| {
            let v = dot_rat(&g.functional, &int_to_rat(r));
            !v.is_zero() && (v.is_positive() == lvl_pos)
        })
}

fn span_basis(rows: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    let mut work = rows.to_vec();
    linalg::rref(&mut work);
    work.truncate(dim);
    work
}

/// A left inverse `P` (dim × n) of the basis matrix, so `P·x` are the span
/// coordinates of `x`.
fn span_projector(basis: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>, Error> {
    let d = basis.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let n = basis[0].len();
    let gram: Vec<Vec<Rat>> =
        (0..d).map(|i| (0..d).map(|j| dot_rat(&basis[i], &basis[j])).collect()).collect();
    let ginv = linalg::inv_rat(&gram).ok_or_else(|| Error::Internal("singular Gram".into()))?;
    let mut p = vec![vec![Rat::zero(); n]; d];
    for i in 0..d {
        for k in 0..n {
            let mut acc = Rat::zero();
            for j in 0..d {
                acc += &ginv[i][j] * &basis[j][k];
            }
            p[i][k] = acc;
        }
    }
    Ok(p)
}

/// A rational polytope: vertices plus supporting halfspaces `a·x ≤ b`
/// plus the affine-hull equations `a·x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    vertices: Vec<Vec<Rat>>,
    /// (a, b) meaning a·x ≤ b
    inequalities: Vec<(Vec<Rat>, Rat)>,
    /// (a, b) meaning a·x = b
    equations: Vec<(Vec<Rat>, Rat)>,
    ambient_dim: usize,
    dim: usize,
}

impl Polytope {
    /// Convex hull by homogenization: the polytope is the cross-section of
    /// the cone over `{(1, v)}` at height one.
    pub fn from_vertices(points: &[Vec<Rat>], ambient_dim: usize) -> Result<Polytope, Error> {
        if points.is_empty() {
            return Err(Error::Precondition("empty vertex set".into()));
        }
        let lifted: Vec<Vec<Rat>> = points
            .iter()
            .map(|p| {
                let mut v = vec![Rat::one()];
                v.extend(p.iter().cloned());
                v
            })
            .collect();
        let cone = Cone::from_generators_rat(&lifted, ambient_dim + 1)?;
        let mut vertices: Vec<Vec<Rat>> = Vec::new();
        for r in cone.generators() {
            if !r[0].is_positive() {
                return Err(Error::Internal("homogenization produced a recession ray".into()));
            }
            let scale = Rat::from_integer(r[0].clone());
            vertices.push(r[1..].iter().map(|x| Rat::from_integer(x.clone()) / &scale).collect());
        }
        vertices.sort();
        let mut inequalities = Vec::new();
        for f in cone.facet_functionals() {
            // f₀ + f·x ≥ 0  ⇔  (−f)·x ≤ f₀
            let a: Vec<Rat> = f[1..].iter().map(|x| -x).collect();
            if a.iter().any(|x| !x.is_zero()) {
                inequalities.push((a, f[0].clone()));
            }
        }
        let mut equations = Vec::new();
        for eq in cone.span_equations() {
            let a: Vec<Rat> = eq[1..].to_vec();
            if a.iter().any(|x| !x.is_zero()) {
                equations.push((a, -eq[0].clone()));
            }
        }
        let dim = cone.dim() - 1;
        Ok(Polytope { vertices, inequalities, equations, ambient_dim, dim })
    }

    pub fn from_int_vertices(points: &[Vec<i64>], ambient_dim: usize) -> Result<Polytope, Error> {
        let pts: Vec<Vec<Rat>> = points.iter().map(|p| rat_vec(p)).collect();
        Self::from_vertices(&pts, ambient_dim)
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[(Vec<Rat>, Rat)] {
        &self.inequalities
    }

    pub fn equations(&self) -> &[(Vec<Rat>, Rat)] {
        &self.equations
    }

    pub fn contains(&self, p: &[Rat]) -> bool {
        self.equations.iter().all(|(a, b)| dot_rat(a, p) == *b)
            && self.inequalities.iter().all(|(a, b)| dot_rat(a, p) <= *b)
    }

    /// Membership in the relative interior.
    pub fn relint_contains(&self, p: &[Rat]) -> bool {
        if self.dim == 0 {
            return self.vertices[0] == p;
        }
        self.equations.iter().all(|(a, b)| dot_rat(a, p) == *b)
            && self.inequalities.iter().all(|(a, b)| dot_rat(a, p) < *b)
    }

    pub fn is_subset_of(&self, other: &Polytope) -> bool {
        self.vertices.iter().all(|v| other.contains(v))
    }

    /// Average of the vertices; lies in the relative interior.
    pub fn barycenter(&self) -> Vec<Rat> {
        let n = Rat::from_integer(Int::from(self.vertices.len() as i64));
        (0..self.ambient_dim)
            .map(|i| self.vertices.iter().map(|v| v[i].clone()).sum::<Rat>() / &n)
            .collect()
    }

    /// Intersection with the halfspace `a·x ≤ b`.
    pub fn intersect_halfspace(&self, a: &[Rat], b: &Rat) -> Result<Polytope, Error> {
        let mut cut = vec![b.clone()];
        cut.extend(a.iter().map(|x| -x));
        let lifted: Vec<Vec<Rat>> = self
            .vertices
            .iter()
            .map(|p| {
                let mut v = vec![Rat::one()];
                v.extend(p.iter().cloned());
                v
            })
            .collect();
        let cone = Cone::from_generators_rat(&lifted, self.ambient_dim + 1)?;
        let mut ineqs: Vec<Vec<Rat>> = cone.facet_functionals().to_vec();
        ineqs.push(cut);
        let half = Cone::from_inequalities(&ineqs, cone.span_equations(), self.ambient_dim + 1)?;
        let mut pts = Vec::new();
        for r in half.generators() {
            if !r[0].is_positive() {
                return Err(Error::Internal("halfspace cut is unbounded".into()));
            }
            let scale = Rat::from_integer(r[0].clone());
            pts.push(
                r[1..].iter().map(|x| Rat::from_integer(x.clone()) / &scale).collect::<Vec<_>>(),
            );
        }
        if pts.is_empty() {
            return Err(Error::Precondition("halfspace cut is empty".into()));
        }
        Polytope::from_vertices(&pts, self.ambient_dim)
    }

    /// Homothety with the given center and rational factor.
    pub fn homothety(&self, center: &[Rat], lambda: &Rat) -> Result<Polytope, Error> {
        let pts: Vec<Vec<Rat>> = self
            .vertices
            .iter()
            .map(|v| {
                (0..self.ambient_dim).map(|i| &center[i] + lambda * (&v[i] - &center[i])).collect()
            })
            .collect();
        Polytope::from_vertices(&pts, self.ambient_dim)
    }

    /// Vertex index sets of all nonempty faces (including the polytope
    /// itself), derived from facet incidence.
    fn face_vertex_sets(&self) -> Vec<Vec<usize>> {
        let nf = self.inequalities.len();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        seen.insert(all.clone());
        let mut frontier = vec![all];
        while let Some(cur) = frontier.pop() {
            for f in 0..nf {
                let (a, b) = &self.inequalities[f];
                let sub: Vec<usize> = cur
                    .iter()
                    .copied()
                    .filter(|&v| dot_rat(a, &self.vertices[v]) == *b)
                    .collect();
                if !sub.is_empty() && seen.insert(sub.clone()) {
                    frontier.push(sub);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Exact squared Euclidean distance from `p` to the polytope,
    /// minimized over the face lattice.
    pub fn sq_distance(&self, p: &[Rat]) -> Rat {
        if self.contains(p) {
            return Rat::zero();
        }
        let mut best: Option<Rat> = None;
        for face in self.face_vertex_sets() {
            let v0 = &self.vertices[face[0]];
            let dirs: Vec<Vec<Rat>> = face[1..]
                .iter()
                .map(|&i| (0..self.ambient_dim).map(|k| &self.vertices[i][k] - &v0[k]).collect())
                .collect();
            let proj: Vec<Rat> = if dirs.is_empty() {
                v0.clone()
            } else {
                let m = dirs.len();
                let gram: Vec<Vec<Rat>> = (0..m)
                    .map(|i| (0..m).map(|j| dot_rat(&dirs[i], &dirs[j])).collect())
                    .collect();
                let diff: Vec<Rat> = (0..self.ambient_dim).map(|k| &p[k] - &v0[k]).collect();
                let rhs: Vec<Rat> = (0..m).map(|i| dot_rat(&dirs[i], &diff)).collect();
                match solve_rat(&gram, &rhs) {
                    Some(t) => (0..self.ambient_dim)
                        .map(|k| {
                            let mut acc = v0[k].clone();
                            for i in 0..m {
                                acc += &t[i] * &dirs[i][k];
                            }
                            acc
                        })
                        .collect(),
                    None => continue,
                }
            };
            if !self.contains(&proj) {
                continue;
            }
            let d2: Rat =
                (0..self.ambient_dim).map(|k| (&p[k] - &proj[k]) * (&p[k] - &proj[k])).sum();
            best = Some(match best {
                Some(b) if b <= d2 => b,
                _ => d2,
            });
        }
        best.expect("nearest vertex is always feasible")
    }

    /// `pyr(v, F)` search: an apex vertex and base facet with
    /// `P = conv(v, F)`, if the polytope is a pyramid.
    pub fn is_pyramid(&self) -> Option<(Vec<Rat>, Polytope)> {
        if self.dim == 0 {
            return None;
        }
        for (vi, v) in self.vertices.iter().enumerate() {
            for (a, b) in &self.inequalities {
                if dot_rat(a, v) == *b {
                    continue;
                }
                let on_facet: Vec<usize> = (0..self.vertices.len())
                    .filter(|&i| dot_rat(a, &self.vertices[i]) == *b)
                    .collect();
                if on_facet.len() + 1 == self.vertices.len() && !on_facet.contains(&vi) {
                    let base_pts: Vec<Vec<Rat>> =
                        on_facet.iter().map(|&i| self.vertices[i].clone()).collect();
                    if let Ok(base) = Polytope::from_vertices(&base_pts, self.ambient_dim) {
                        return Some((v.clone(), base));
                    }
                }
            }
        }
        None
    }

    /// The complexity `𝔠(P) = dim P − i` where `i` is the longest pyramid
    /// tower ending at `P`, with a witness chain `P₀ ⊂ … ⊂ P_i = P`.
    ///
    /// All pyramid decompositions of a polytope yield the same complexity
    /// (the invariant is preserved under taking pyramids), so following one
    /// witness base per level is enough.
    pub fn complexity(&self) -> (usize, Vec<Polytope>) {
        fn tower(p: &Polytope, memo: &mut BTreeMap<String, Vec<Polytope>>) -> Vec<Polytope> {
            let key = render_vertices(p);
            if let Some(t) = memo.get(&key) {
                return t.clone();
            }
            let mut best: Vec<Polytope> = vec![p.clone()];
            if let Some((_, base)) = p.is_pyramid() {
                let mut t = tower(&base, memo);
                t.push(p.clone());
                if t.len() > best.len() {
                    best = t;
                }
            }
            memo.insert(key, best.clone());
            best
        }
        let mut memo = BTreeMap::new();
        let chain = tower(self, &mut memo);
        (self.dim - (chain.len() - 1), chain)
    }
}

fn render_vertices(p: &Polytope) -> String {
    let mut s = String::new();
    for v in p.vertices() {
        s.push('[');
        for x in v {
            s.push_str(&x.to_string());
            s.push(',');
        }
        s.push(']');
    }
    s
}

/// A cross-section pair: a cone together with an affine hyperplane `G`
/// such that `C = ℝ₊(C ∩ G)`.
#[derive(Debug, Clone)]
pub struct CrossSection {
    pub cone: Cone,
    pub hyperplane: AffineHyperplane,
}

impl CrossSection {
    pub fn new(cone: Cone, hyperplane: AffineHyperplane) -> Result<CrossSection, Error> {
        if !is_cross_section(&cone, &hyperplane) {
            return Err(Error::Precondition(
                "functional is not strictly positive on the cone".into(),
            ));
        }
        Ok(CrossSection { cone, hyperplane })
    }

    pub fn polytope(&self) -> Result<Polytope, Error> {
        self.cone.cross_section(&self.hyperplane)
    }
}

/// Membership of `u` in the open cone `C(ε) = ℝ₊(Φ(C)(ε))`: true iff
/// `u = 0` or the squared distance from `Φ(u)` to `Φ(C)` within `G` is
/// `< ε²`. Points whose ray misses `G` are outside.
pub fn eps_cone_contains(section: &CrossSection, eps: &Rat, u: &ExpVec) -> Result<bool, Error> {
    if !eps.is_positive() {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    if u.is_zero() {
        return Ok(true);
    }
    let Some(phi) = section.hyperplane.phi_image(u)? else {
        return Ok(false);
    };
    let poly = section.polytope()?;
    Ok(poly.sq_distance(&phi) < eps * eps)
}

/// Decides whether `small ⊂ big` is a pyramidal extension: `big` is
/// `small` with a pyramid glued back at one vertex.
pub fn is_pyramidal_extension(small: &Polytope, big: &Polytope) -> Result<bool, Error> {
    if small == big || !small.is_subset_of(big) || small.dim() != big.dim() {
        return Ok(false);
    }
    // candidate cut hyperplanes: facets of `small` not valid for `big`
    let cuts: Vec<&(Vec<Rat>, Rat)> = small
        .inequalities()
        .iter()
        .filter(|(a, b)| big.vertices().iter().any(|v| dot_rat(a, v) > *b))
        .collect();
    if cuts.len() != 1 {
        return Ok(false);
    }
    let (a, b) = cuts[0];
    let beyond: Vec<&Vec<Rat>> = big.vertices().iter().filter(|v| dot_rat(a, v) > *b).collect();
    if beyond.len() != 1 {
        return Ok(false);
    }
    // big ∩ {a ≤ b} must reproduce small exactly
    let clipped = big.intersect_halfspace(a, b)?;
    if clipped.vertices() != small.vertices() {
        return Ok(false);
    }
    // the piece beyond must be a full-dimensional pyramid over the cut
    let apex = beyond[0].clone();
    let neg_a: Vec<Rat> = a.iter().map(|x| -x).collect();
    let piece = big.intersect_halfspace(&neg_a, &-b.clone())?;
    if piece.dim() != big.dim() {
        return Ok(false);
    }
    let mut base_pts: Vec<Vec<Rat>> =
        piece.vertices().iter().filter(|v| dot_rat(a, v) == *b).cloned().collect();
    if base_pts.is_empty() {
        return Ok(false);
    }
    base_pts.push(apex);
    let rebuilt = Polytope::from_vertices(&base_pts, big.ambient_dim())?;
    Ok(rebuilt.vertices() == piece.vertices())
}

/// Produces an admissible sequence `P = P₀, P₁, …` whose final member is
/// contained in `U`: each consecutive pair is either a pyramidal extension
/// (cut) or an inclusion (growth), and every member stays inside `P`.
///
/// Schedule: one-dimensional polytopes are driven into `U` by direct
/// endpoint cuts. Otherwise the polytope shrinks around a steering point
/// `ξ ∈ relint U` by two kinds of verified cuts: absorbing a vertex into
/// the hull of the others, and sliding the vertex farthest from `ξ` along
/// an incident edge. Every step is re-verified with
/// [`is_pyramidal_extension`] before it is accepted.
pub fn admissible_sequence(
    p: &Polytope,
    u: &Polytope,
    budget: usize,
) -> Result<Vec<Polytope>, Error> {
    if !u.is_subset_of(p) {
        return Err(Error::Precondition("target not contained in the polytope".into()));
    }
    if u.dim() != p.dim() {
        return Err(Error::Precondition(
            "target must have the same dimension as the polytope".into(),
        ));
    }
    let mut seq = vec![p.clone()];
    let mut cur = p.clone();
    let xi = u.barycenter();
    let mut steps = 0usize;
    while !cur.is_subset_of(u) {
        steps += 1;
        if steps > budget {
            return Err(Error::BudgetExceeded("admissible_sequence move loop".into()));
        }
        let next = if p.dim() == 1 {
            interval_cut(&cur, u)?
        } else if let Some(n) = absorb_move(&cur, &xi)? {
            n
        } else if let Some(n) = slide_move(&cur, &xi)? {
            n
        } else {
            return Err(Error::BudgetExceeded("admissible_sequence: no legal move".into()));
        };
        if !is_pyramidal_extension(&next, &cur)? {
            return Err(Error::Internal("scheduled cut is not pyramidal".into()));
        }
        seq.push(next.clone());
        cur = next;
    }
    Ok(seq)
}

/// One endpoint cut of an interval toward the target interval.
fn interval_cut(cur: &Polytope, u: &Polytope) -> Result<Polytope, Error> {
    for (a, b) in u.inequalities() {
        let beyond: Vec<&Vec<Rat>> =
            cur.vertices().iter().filter(|v| dot_rat(a, v) > *b).collect();
        if beyond.len() == 1 {
            return cur.intersect_halfspace(a, b);
        }
    }
    Err(Error::Internal("interval cut: no single-endpoint halfspace".into()))
}

/// Cut replacing the polytope by the hull of all vertices but one, when
/// that is a legal pyramidal extension keeping the steering point.
fn absorb_move(cur: &Polytope, xi: &[Rat]) -> Result<Option<Polytope>, Error> {
    if cur.vertices().len() <= cur.dim() + 1 {
        return Ok(None); // already a simplex-sized vertex set
    }
    let mut order: Vec<usize> = (0..cur.vertices().len()).collect();
    order.sort_by_key(|&i| {
        let d: Rat = (0..cur.ambient_dim())
            .map(|k| (&cur.vertices()[i][k] - &xi[k]) * (&cur.vertices()[i][k] - &xi[k]))
            .sum();
        core::cmp::Reverse(d)
    });
    for vi in order {
        let rest: Vec<Vec<Rat>> = (0..cur.vertices().len())
            .filter(|&i| i != vi)
            .map(|i| cur.vertices()[i].clone())
            .collect();
        let Ok(next) = Polytope::from_vertices(&rest, cur.ambient_dim()) else {
            continue;
        };
        if next.dim() == cur.dim()
            && next.contains(xi)
            && is_pyramidal_extension(&next, cur)?
        {
            return Ok(Some(next));
        }
    }
    Ok(None)
}

/// Slide the vertex farthest from the steering point along an incident
/// edge, cutting off a pyramid at that vertex.
fn slide_move(cur: &Polytope, xi: &[Rat]) -> Result<Option<Polytope>, Error> {
    let sq = |v: &[Rat]| -> Rat {
        (0..cur.ambient_dim()).map(|k| (&v[k] - &xi[k]) * (&v[k] - &xi[k])).sum()
    };
    let mut order: Vec<usize> = (0..cur.vertices().len()).collect();
    order.sort_by_key(|&i| core::cmp::Reverse(sq(&cur.vertices()[i])));
    // edges: one-dimensional faces
    let edges: Vec<Vec<usize>> =
        cur.face_vertex_sets().into_iter().filter(|f| f.len() == 2).collect();
    for &vi in &order {
        let v = cur.vertices()[vi].clone();
        let mut best: Option<(Rat, Polytope)> = None;
        for e in &edges {
            if !e.contains(&vi) {
                continue;
            }
            let other = if e[0] == vi { e[1] } else { e[0] };
            let w = &cur.vertices()[other];
            let mut t = rat(1, 2);
            for _ in 0..6 {
                let vp: Vec<Rat> =
                    (0..cur.ambient_dim()).map(|k| &v[k] + &t * (&w[k] - &v[k])).collect();
                let mut pts: Vec<Vec<Rat>> = (0..cur.vertices().len())
                    .filter(|&i| i != vi)
                    .map(|i| cur.vertices()[i].clone())
                    .collect();
                pts.push(vp);
                if let Ok(cand) = Polytope::from_vertices(&pts, cur.ambient_dim()) {
                    if cand.dim() == cur.dim()
                        && cand.contains(xi)
                        && cand != *cur
                        && is_pyramidal_extension(&cand, cur)?
                    {
                        let gain = cand
                            .vertices()
                            .iter()
                            .map(|p| sq(p))
                            .max()
                            .unwrap_or_else(Rat::zero);
                        if best.as_ref().map(|(g, _)| &gain < g).unwrap_or(true) {
                            best = Some((gain, cand));
                        }
                        break;
                    }
                }
                t /= rat_int(2);
            }
        }
        if let Some((_, cand)) = best {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone2(gens: &[[i64; 2]]) -> Cone {
        let g: Vec<Vec<Int>> =
            gens.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
        Cone::from_generators(&g, 2).unwrap()
    }

    #[test]
    fn orthant_facets() {
        let c = cone2(&[[1, 0], [0, 1]]);
        assert_eq!(c.dim(), 2);
        let facets = c.facets_of().unwrap();
        assert_eq!(facets.len(), 2);
        assert!(facets.iter().all(|f| f.dim() == 1));
    }

    #[test]
    fn redundant_generator_dropped() {
        // (1,1) is interior to the cone over (2,0),(0,2)
        let c = cone2(&[[2, 0], [1, 1], [0, 2]]);
        assert_eq!(c.generators().len(), 2);
        let f = c.facets_of().unwrap();
        assert_eq!(f.len(), 2);
        let rays: Vec<Vec<Int>> = f.iter().flat_map(|x| x.generators().to_vec()).collect();
        assert!(rays.contains(&vec![Int::from(1), Int::from(0)]));
        assert!(rays.contains(&vec![Int::from(0), Int::from(1)]));
    }

    #[test]
    fn non_pointed_rejected() {
        let g: Vec<Vec<Int>> =
            vec![vec![Int::from(1), Int::from(0)], vec![Int::from(-1), Int::from(0)]];
        assert!(matches!(Cone::from_generators(&g, 2), Err(Error::NotPointed)));
    }

    #[test]
    fn three_dim_cube_cone() {
        // cone over the unit square at height 1: 4 extreme rays, 4 facets
        let g: Vec<Vec<Int>> = [[1, 0, 0], [1, 1, 0], [1, 0, 1], [1, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| Int::from(x)).collect())
            .collect();
        let c = Cone::from_generators(&g, 3).unwrap();
        assert_eq!(c.dim(), 3);
        assert_eq!(c.generators().len(), 4);
        assert_eq!(c.facet_functionals().len(), 4);
        let faces = c.faces().unwrap();
        // 1 zero + 4 rays + 4 facets + cone itself
        assert_eq!(faces.len(), 10);
    }

    #[test]
    fn membership_and_interior() {
        let c = cone2(&[[1, 0], [0, 1]]);
        let inside = ExpVec::from_ints(&[1, 1], 2);
        let boundary = ExpVec::from_ints(&[1, 0], 2);
        assert!(c.contains(&inside) && c.interior_contains(&inside));
        assert!(c.contains(&boundary) && !c.interior_contains(&boundary));
        let c2 = cone2(&[[2, 0], [0, 2]]);
        let half = ExpVec::new(vec![Int::from(1), Int::from(2)], 1, 2);
        assert!(c2.interior_contains(&half));
    }

    #[test]
    fn dissect_orthant() {
        let c = cone2(&[[1, 0], [0, 1]]);
        let h = vec![rat_int(-1), rat_int(1)]; // x₂ = x₁
        let (lo, hi) = c.dissect(&h).unwrap();
        assert_eq!(lo.dim(), 2);
        assert_eq!(hi.dim(), 2);
        assert!(lo.generators().contains(&vec![Int::from(1), Int::from(1)]));
        assert!(hi.generators().contains(&vec![Int::from(1), Int::from(1)]));
        // boundary-touching hyperplane is rejected
        let c2 = cone2(&[[2, 0], [0, 2]]);
        let h2 = vec![rat_int(0), rat_int(1)];
        assert!(c2.dissect(&h2).is_err());
        // generic dissection of a wider cone
        let c3 = cone2(&[[1, -1], [1, 1]]);
        let (lo3, hi3) = c3.dissect(&h2).unwrap();
        for v in [[1i64, 0], [1, -1]] {
            assert!(lo3.generators().contains(&v.iter().map(|&x| Int::from(x)).collect()));
        }
        for v in [[1i64, 0], [1, 1]] {
            assert!(hi3.generators().contains(&v.iter().map(|&x| Int::from(x)).collect()));
        }
    }

    #[test]
    fn polytope_hull_and_distance() {
        let seg = Polytope::from_int_vertices(&[vec![1, 0], vec![1, 1]], 2).unwrap();
        assert_eq!(seg.dim(), 1);
        // distance from (1, −1/4) to the segment is 1/4
        let p = vec![rat_int(1), rat(-1, 4)];
        assert_eq!(seg.sq_distance(&p), rat(1, 16));
        let far = vec![rat_int(1), rat_int(-1)];
        assert_eq!(seg.sq_distance(&far), rat_int(1));
        let mid = vec![rat_int(1), rat(1, 2)];
        assert_eq!(seg.sq_distance(&mid), rat_int(0));
        // off-hull distance in 2d: corner projection
        let tri = Polytope::from_int_vertices(&[vec![0, 0], vec![2, 0], vec![0, 2]], 2).unwrap();
        assert_eq!(tri.sq_distance(&vec![rat_int(-3), rat_int(-4)]), rat_int(25));
        assert_eq!(tri.sq_distance(&vec![rat_int(2), rat_int(2)]), rat_int(2));
    }

    #[test]
    fn eps_cone_membership() {
        let cone = cone2(&[[1, 0], [1, 1]]);
        let g = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        let cs = CrossSection::new(cone, g).unwrap();
        let inside = ExpVec::from_ints(&[2, 1], 2);
        assert!(eps_cone_contains(&cs, &rat(1, 2), &inside).unwrap());
        // (1, −1/4): distance from Φ-image to Φ(C) is 1/4 < 1/2
        let near = ExpVec::new(vec![Int::from(4), Int::from(-1)], 2, 2);
        assert!(eps_cone_contains(&cs, &rat(1, 2), &near).unwrap());
        // (1, −1): distance 1 ≥ 1/2
        let far = ExpVec::from_ints(&[1, -1], 2);
        assert!(!eps_cone_contains(&cs, &rat(1, 2), &far).unwrap());
        assert!(eps_cone_contains(&cs, &rat(1, 2), &ExpVec::zero(2, 2)).unwrap());
        let behind = ExpVec::from_ints(&[-1, 0], 2);
        assert!(!eps_cone_contains(&cs, &rat(1, 2), &behind).unwrap());
    }

    #[test]
    fn eps_monotone_and_limit() {
        let cone = cone2(&[[1, 0], [1, 1]]);
        let g = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        let cs = CrossSection::new(cone.clone(), g).unwrap();
        let u = ExpVec::new(vec![Int::from(4), Int::from(-1)], 2, 2);
        assert!(!eps_cone_contains(&cs, &rat(1, 8), &u).unwrap());
        assert!(eps_cone_contains(&cs, &rat(1, 2), &u).unwrap());
        // contains ⇒ ε-contains for every ε
        let v = ExpVec::from_ints(&[3, 2], 2);
        assert!(cone.contains(&v));
        for eps in [rat(1, 100), rat(1, 7), rat_int(1)] {
            assert!(eps_cone_contains(&cs, &eps, &v).unwrap());
        }
    }

    #[test]
    fn pyramid_detection_and_complexity() {
        let triangle = Polytope::from_int_vertices(&[vec![0, 0], vec![1, 0], vec![0, 1]], 2).unwrap();
        assert_eq!(triangle.complexity().0, 0);

        let square =
            Polytope::from_int_vertices(&[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]], 2)
                .unwrap();
        assert!(square.is_pyramid().is_none());
        assert_eq!(square.complexity().0, 2);

        let pyr_sq = Polytope::from_int_vertices(
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1]],
            3,
        )
        .unwrap();
        let (apex, base) = pyr_sq.is_pyramid().unwrap();
        assert_eq!(apex, rat_vec(&[0, 0, 1]));
        assert_eq!(base.vertices().len(), 4);
        assert_eq!(pyr_sq.complexity().0, 2);
        assert_eq!(pyr_sq.complexity().1.len(), 2);

        let tet = Polytope::from_int_vertices(
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            3,
        )
        .unwrap();
        assert_eq!(tet.complexity().0, 0);
    }

    #[test]
    fn pyramidal_extension_cases() {
        let p = Polytope::from_int_vertices(&[vec![0], vec![2]], 1).unwrap();
        let q = Polytope::from_int_vertices(&[vec![0], vec![3]], 1).unwrap();
        assert!(is_pyramidal_extension(&p, &q).unwrap());
        assert!(!is_pyramidal_extension(&p, &p).unwrap());
        // strict sub-square inside a square: four cut facets, not pyramidal
        let small = Polytope::from_vertices(
            &[
                vec![rat(1, 4), rat(1, 4)],
                vec![rat(3, 4), rat(1, 4)],
                vec![rat(1, 4), rat(3, 4)],
                vec![rat(3, 4), rat(3, 4)],
            ],
            2,
        )
        .unwrap();
        let big =
            Polytope::from_int_vertices(&[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]], 2)
                .unwrap();
        assert!(!is_pyramidal_extension(&small, &big).unwrap());
        // cutting one corner of a square is pyramidal
        let clipped = big.intersect_halfspace(&[rat_int(1), rat_int(1)], &rat(3, 2)).unwrap();
        assert!(is_pyramidal_extension(&clipped, &big).unwrap());
    }

    #[test]
    fn admissible_sequence_interval() {
        let p = Polytope::from_int_vertices(&[vec![0], vec![3]], 1).unwrap();
        let u = Polytope::from_vertices(&[vec![rat(5, 4)], vec![rat(7, 4)]], 1).unwrap();
        let seq = admissible_sequence(&p, &u, 64).unwrap();
        assert!(seq.last().unwrap().is_subset_of(&u));
        for w in seq.windows(2) {
            assert!(is_pyramidal_extension(&w[1], &w[0]).unwrap() || w[0].is_subset_of(&w[1]));
            assert!(w[1].is_subset_of(&p));
            assert_eq!(w[1].dim(), p.dim());
        }
        let same = admissible_sequence(&p, &p, 8).unwrap();
        assert_eq!(same.len(), 1);
    }

    #[test]
    fn admissible_sequence_triangle() {
        let p = Polytope::from_int_vertices(&[vec![0, 0], vec![8, 0], vec![0, 8]], 2).unwrap();
        let center = vec![rat(8, 3), rat(8, 3)];
        let u = p.homothety(&center, &rat(1, 4)).unwrap();
        let seq = admissible_sequence(&p, &u, 512).unwrap();
        assert!(seq.last().unwrap().is_subset_of(&u));
        for w in seq.windows(2) {
            let cut = is_pyramidal_extension(&w[1], &w[0]).unwrap();
            let grow = w[0].is_subset_of(&w[1]);
            assert!(cut ^ grow);
            assert!(w[1].is_subset_of(&p));
            assert_eq!(w[1].dim(), p.dim());
        }
    }

    #[test]
    fn cross_section_requires_positive_functional() {
        let c = cone2(&[[1, -1], [1, 1]]);
        let bad = AffineHyperplane::new(vec![rat_int(0), rat_int(1)], rat_int(1));
        assert!(CrossSection::new(c.clone(), bad).is_err());
        let good = AffineHyperplane::new(vec![rat_int(1), rat_int(0)], rat_int(1));
        let cs = CrossSection::new(c, good).unwrap();
        let poly = cs.polytope().unwrap();
        assert_eq!(poly.vertices().len(), 2);
    }
}
