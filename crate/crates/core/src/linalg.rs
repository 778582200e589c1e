//! Exact linear algebra over ℚ and ℤ.
//!
//! Small dense kernels used by the polyhedral and monoid layers: reduced row
//! echelon form and solving over the rationals, Hermite/Smith forms over the
//! integers, full-rank lattices given by basis columns, and unimodular
//! completions of primitive functionals. Everything is exact; matrices are
//! `Vec<Vec<_>>` in row-major order and stay desk-scale.

use crate::prelude::*;
use num_integer::Integer;

/// Reduces `m` in place to reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for c in col..cols {
            let v = &m[row][c] * &inv;
            m[row][c] = v;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..cols {
                    let v = &m[r][c] - &f * &m[row][c];
                    m[r][c] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank_rat(m: &[Vec<Rat>]) -> usize {
    let mut work: Vec<Vec<Rat>> = m.to_vec();
    rref(&mut work).len()
}

/// Solves `A x = b` over ℚ. Returns one solution, or `None` if inconsistent.
pub fn solve_rat(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rat>> = (0..rows)
        .map(|r| {
            let mut row = a[r].clone();
            row.push(b[r].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None; // pivot in the constant column
    }
    let mut x = vec![Rat::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}

/// Basis of the right nullspace of `a` over ℚ.
pub fn nullspace_rat(a: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut work = a.to_vec();
    let pivots = rref(&mut work);
    let mut basis = Vec::new();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    for &fc in &free {
        let mut v = vec![Rat::zero(); cols];
        v[fc] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -work[r][fc].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn dot_rat(u: &[Rat], v: &[Rat]) -> Rat {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn dot_int(u: &[Int], v: &[Int]) -> Int {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn int_to_rat(v: &[Int]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// Divides by the gcd of the entries, making the vector primitive.
/// The zero vector is returned unchanged.
pub fn primitive_int(v: &[Int]) -> Vec<Int> {
    let mut g = Int::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Clears denominators and divides by the content: the primitive integer
/// vector spanning the same ray as `v`.
pub fn primitive_from_rat(v: &[Rat]) -> Vec<Int> {
    let mut lcm = Int::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<Int> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitive_int(&ints)
}

/// Hermite-style column reduction: returns a basis (as columns) of the
/// lattice generated by the given integer columns. The output is linearly
/// independent with `rank` many columns, in column echelon form.
pub fn lattice_basis(cols: &[Vec<Int>]) -> Vec<Vec<Int>> {
    if cols.is_empty() {
        return Vec::new();
    }
    let n = cols[0].len();
    let mut work: Vec<Vec<Int>> = cols.to_vec();
    let mut basis: Vec<Vec<Int>> = Vec::new();
    let mut row = 0;
    while row < n && !work.is_empty() {
        // gcd-fold all columns with a nonzero entry in `row` into one
        loop {
            let mut nz: Vec<usize> = (0..work.len()).filter(|&c| !work[c][row].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| work[a][row].abs().cmp(&work[b][row].abs()));
            let (small, other) = (nz[0], nz[1]);
            let q = work[other][row].div_floor(&work[small][row]);
            for r in 0..n {
                let v = &work[other][r] - &q * &work[small][r];
                work[other][r] = v;
            }
        }
        if let Some(c) = (0..work.len()).find(|&c| !work[c][row].is_zero()) {
            let col = work.remove(c);
            basis.push(col);
        }
        row += 1;
    }
    basis
}

/// Smith normal form invariant factors of an integer matrix
/// (nonzero diagonal entries `d_1 | d_2 | ...`, all positive).
pub fn smith_invariants(mat: &[Vec<Int>]) -> Vec<Int> {
    let rows = mat.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut m: Vec<Vec<Int>> = mat.to_vec();
    let mut start = 0usize;
    let mut inv = Vec::new();
    while start < rows.min(cols) {
        // find a nonzero pivot
        let mut found = None;
        'scan: for r in start..rows {
            for c in start..cols {
                if !m[r][c].is_zero() {
                    found = Some((r, c));
                    break 'scan;
                }
            }
        }
        let Some((pr, pc)) = found else { break };
        m.swap(start, pr);
        for r in 0..rows {
            m[r].swap(start, pc);
        }
        loop {
            // clear column by division steps
            let mut dirty = false;
            for r in start + 1..rows {
                if !m[r][start].is_zero() {
                    let q = m[r][start].div_floor(&m[start][start]);
                    for c in start..cols {
                        let v = &m[r][c] - &q * &m[start][c];
                        m[r][c] = v;
                    }
                    if !m[r][start].is_zero() {
                        m.swap(start, r);
                        dirty = true;
                    }
                }
            }
            for c in start + 1..cols {
                if !m[start][c].is_zero() {
                    let q = m[start][c].div_floor(&m[start][start]);
                    for r in start..rows {
                        let v = &m[r][c] - &q * &m[r][start];
                        m[r][c] = v;
                    }
                    if !m[start][c].is_zero() {
                        for r in 0..rows {
                            m[r].swap(start, c);
                        }
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        inv.push(m[start][start].abs());
        start += 1;
    }
    // enforce divisibility chain
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..inv.len().saturating_sub(1) {
            let (a, b) = (inv[i].clone(), inv[i + 1].clone());
            if !(&b % &a).is_zero() {
                let g = a.gcd(&b);
                let l = a.lcm(&b);
                inv[i] = g;
                inv[i + 1] = l;
                changed = true;
            }
        }
    }
    inv
}

/// A full-column-rank integer lattice given by basis columns in ℤ^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLattice {
    /// Basis vectors, one per column, linearly independent.
    pub basis: Vec<Vec<Int>>,
    pub ambient_dim: usize,
}

impl IntLattice {
    pub fn from_generators(gens: &[Vec<Int>], ambient_dim: usize) -> Self {
        let basis = lattice_basis(gens);
        IntLattice { basis, ambient_dim }
    }

    pub fn standard(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![Int::zero(); ambient_dim];
                v[i] = Int::one();
                v
            })
            .collect();
        IntLattice { basis, ambient_dim }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Rational coordinates of `v` in this basis, if `v` lies in the span.
    pub fn span_coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        let rows: Vec<Vec<Rat>> = (0..self.ambient_dim)
            .map(|r| self.basis.iter().map(|b| Rat::from_integer(b[r].clone())).collect())
            .collect();
        let x = solve_rat(&rows, v)?;
        // solve_rat only checks consistency of the reduced system; verify.
        for r in 0..self.ambient_dim {
            let mut acc = Rat::zero();
            for (c, b) in self.basis.iter().enumerate() {
                acc += Rat::from_integer(b[r].clone()) * &x[c];
            }
            if acc != v[r] {
                return None;
            }
        }
        Some(x)
    }

    /// Integer coordinates of `v` in this basis, if `v` is a lattice point.
    pub fn coords(&self, v: &[Int]) -> Option<Vec<Int>> {
        let vr = int_to_rat(v);
        let x = self.span_coords(&vr)?;
        let mut out = Vec::with_capacity(x.len());
        for c in x {
            if !c.is_integer() {
                return None;
            }
            out.push(c.to_integer());
        }
        Some(out)
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        self.coords(v).is_some()
    }

    /// Member test for vectors with rational entries (used for points of
    /// `(1/c^j)·Λ` after scaling by `c^j` is not possible).
    pub fn contains_rat(&self, v: &[Rat]) -> bool {
        match self.span_coords(v) {
            Some(x) => x.iter().all(|c| c.is_integer()),
            None => false,
        }
    }

    /// Linear combination of basis vectors with integer coefficients.
    pub fn point(&self, coords: &[Int]) -> Vec<Int> {
        let mut out = vec![Int::zero(); self.ambient_dim];
        for (c, b) in self.basis.iter().enumerate() {
            for r in 0..self.ambient_dim {
                out[r] += &coords[c] * &b[r];
            }
        }
        out
    }
}

/// Finds a unimodular `U` (columns) with `h · U = (g, 0, …, 0)` where
/// `g = gcd(h)`, by pairwise extended-gcd column operations.
pub fn row_reduce_unimodular(h: &[Int]) -> (Vec<Vec<Int>>, Int) {
    let n = h.len();
    let mut u: Vec<Vec<Int>> = (0..n)
        .map(|i| {
            let mut v = vec![Int::zero(); n];
            v[i] = Int::one();
            v
        })
        .collect();
    let mut w = h.to_vec(); // w = h · U maintained
    for j in 1..n {
        if w[j].is_zero() {
            continue;
        }
        if w[0].is_zero() {
            w.swap(0, j);
            u.swap(0, j);
            continue;
        }
        let ext = w[0].extended_gcd(&w[j]);
        let (g, x, y) = (ext.gcd, ext.x, ext.y);
        let (a, b) = (&w[0] / &g, &w[j] / &g);
        // new col0 = x*col0 + y*colj ; new colj = -b*col0 + a*colj
        let c0: Vec<Int> = (0..n).map(|r| &x * &u[0][r] + &y * &u[j][r]).collect();
        let cj: Vec<Int> = (0..n).map(|r| -&b * &u[0][r] + &a * &u[j][r]).collect();
        u[0] = c0;
        u[j] = cj;
        w[0] = g;
        w[j] = Int::zero();
    }
    let g = w[0].clone();
    (u, g)
}

pub fn mat_vec_int(m: &[Vec<Int>], v: &[Int]) -> Vec<Int> {
    m.iter().map(|row| dot_int(row, v)).collect()
}

pub fn mat_vec_rat(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| dot_rat(row, v)).collect()
}

pub fn mat_mul_int(a: &[Vec<Int>], b: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Int::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Int::zero();
            for t in 0..k {
                acc += &a[i][t] * &b[t][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn det_int(m: &[Vec<Int>]) -> Int {
    let n = m.len();
    if n == 0 {
        return Int::one();
    }
    let rows: Vec<Vec<Rat>> = m.iter().map(|r| int_to_rat(r)).collect();
    let d = det_rat(&rows);
    debug_assert!(d.is_integer());
    d.to_integer()
}

pub fn det_rat(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut work = m.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !work[r][col].is_zero()) else {
            return Rat::zero();
        };
        if p != col {
            work.swap(col, p);
            det = -det;
        }
        det *= work[col][col].clone();
        let inv = work[col][col].recip();
        for r in col + 1..n {
            if !work[r][col].is_zero() {
                let f = &work[r][col] * &inv;
                for c in col..n {
                    let v = &work[r][c] - &f * &work[col][c];
                    work[r][c] = v;
                }
            }
        }
    }
    det
}

/// Inverse of an integer matrix with determinant ±1.
pub fn inv_unimodular(m: &[Vec<Int>]) -> Result<Vec<Vec<Int>>, Error> {
    let n = m.len();
    let rows: Vec<Vec<Rat>> = m.iter().map(|r| int_to_rat(r)).collect();
    let inv = inv_rat(&rows).ok_or_else(|| Error::Precondition("matrix not invertible".into()))?;
    let mut out = vec![vec![Int::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if !inv[i][j].is_integer() {
                return Err(Error::Precondition("matrix is not unimodular".into()));
            }
            out[i][j] = inv[i][j].to_integer();
        }
    }
    Ok(out)
}

pub fn inv_rat(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|r| {
            let mut row = m[r].clone();
            for c in 0..n {
                row.push(if c == r { Rat::one() } else { Rat::zero() });
            }
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n {
        return None;
    }
    Some((0..n).map(|r| aug[r][n..].to_vec()).collect())
}

/// Floor of the integer square root.
pub fn isqrt(n: &Int) -> Int {
    assert!(!n.is_negative());
    if n.is_zero() {
        return Int::zero();
    }
    let bits = n.bits();
    let mut x = Int::one() << (bits / 2 + 1);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    x
}

/// A rational upper bound for √q (q ≥ 0), exact when q is a perfect square
/// of a rational.
pub fn sqrt_upper_bound(q: &Rat) -> Rat {
    assert!(!q.is_negative());
    if q.is_zero() {
        return Rat::zero();
    }
    // √(a/b) = √(ab)/b ≤ (⌊√(ab)⌋ + 1)/b, exact if ab is a perfect square
    let ab = q.numer() * q.denom();
    let r = isqrt(&ab);
    if &r * &r == ab {
        Rat::new(r, q.denom().clone())
    } else {
        Rat::new(r + 1, q.denom().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn solve_and_rank() {
        let a = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(3), rat_int(4)],
        ];
        let b = vec![rat_int(5), rat_int(11)];
        let x = solve_rat(&a, &b).unwrap();
        assert_eq!(x, vec![rat_int(1), rat_int(2)]);
        assert_eq!(rank_rat(&a), 2);
        let singular = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(2), rat_int(4)],
        ];
        assert_eq!(rank_rat(&singular), 1);
        assert!(solve_rat(&singular, &vec![rat_int(1), rat_int(3)]).is_none());
    }

    #[test]
    fn lattice_even_sum() {
        // gp of ⟨(2,0),(1,1),(0,2)⟩ is the even-coordinate-sum sublattice
        let gens = vec![iv(&[2, 0]), iv(&[1, 1]), iv(&[0, 2])];
        let lat = IntLattice::from_generators(&gens, 2);
        assert_eq!(lat.rank(), 2);
        assert!(lat.contains(&iv(&[1, 1])));
        assert!(lat.contains(&iv(&[3, 1])));
        assert!(!lat.contains(&iv(&[1, 0])));
        // index 2 in ℤ²
        let cols: Vec<Vec<Int>> = (0..2)
            .map(|r| lat.basis.iter().map(|b| b[r].clone()).collect())
            .collect();
        assert_eq!(det_int(&cols).abs(), Int::from(2));
    }

    #[test]
    fn smith_small() {
        let m = vec![iv(&[2, 4, 4]), iv(&[-6, 6, 12]), iv(&[10, 4, 16])];
        let inv = smith_invariants(&m);
        assert_eq!(inv, iv(&[2, 2, 156])); // classical worked example
    }

    #[test]
    fn functional_completion() {
        let h = iv(&[3, 5, 7]);
        let (u, g) = row_reduce_unimodular(&h);
        assert_eq!(g, Int::one());
        // columns of u form a unimodular matrix with h·u = (1,0,0)
        let m: Vec<Vec<Int>> = (0..3).map(|r| (0..3).map(|c| u[c][r].clone()).collect()).collect();
        assert_eq!(det_int(&m).abs(), Int::one());
        assert_eq!(dot_int(&h, &u[0]), Int::one());
        assert!(dot_int(&h, &u[1]).is_zero());
        assert!(dot_int(&h, &u[2]).is_zero());
    }

    #[test]
    fn sqrt_bounds() {
        assert_eq!(sqrt_upper_bound(&rat(9, 4)), rat(3, 2));
        let q = rat(2, 1);
        let u = sqrt_upper_bound(&q);
        assert!(&u * &u >= q);
        assert_eq!(isqrt(&Int::from(15)), Int::from(3));
        assert_eq!(isqrt(&Int::from(16)), Int::from(4));
    }
}
