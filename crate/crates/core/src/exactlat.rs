//! Exact integer linear algebra: Hermite and Smith normal forms, integer and
//! rational linear solving, and quotient presentations of finitely generated
//! abelian groups.
//!
//! All arithmetic is over arbitrary-precision integers (`num_bigint::BigInt`)
//! or rationals; nothing here is approximate. Matrices are dense and
//! row-major, and act on column vectors. The intended scale is desk-sized
//! (a few hundred rows/columns), so gcd-driven elimination with a
//! smallest-absolute-value pivot is used rather than anything asymptotically
//! clever.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        assert!(!rows.is_empty(), "matrix must be nonempty");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn from_cols(cols: &[Vec<BigInt>]) -> Self {
        assert!(!cols.is_empty(), "matrix must be nonempty");
        let nrows = cols[0].len();
        assert!(cols.iter().all(|c| c.len() == nrows), "ragged columns");
        let mut m = IntMatrix::zero(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        IntMatrix::from_rows(&v)
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a * &other[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Exact determinant of a square matrix (Bareiss fraction-free elimination).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut prev = BigInt::one();
        let mut sign = 1i32;
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = &num / &prev;
                }
                a[(i, k)] = BigInt::zero();
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        if sign < 0 { -d } else { d }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row i += k * row j
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        for c in 0..self.cols {
            let t = k * &self[(j, c)];
            self[(i, c)] += t;
        }
    }

    /// col i += k * col j
    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        for r in 0..self.rows {
            let t = k * &self[(r, j)];
            self[(r, i)] += t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let t = -self[(i, c)].clone();
            self[(i, c)] = t;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for r in 0..self.rows {
            let t = -self[(r, j)].clone();
            self[(r, j)] = t;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of Hermite normal form reduction: `h = u * a` with `u` unimodular,
/// `h` in row echelon form with positive pivots and entries above each pivot
/// reduced into `[0, pivot)`.
pub struct Hnf {
    pub h: IntMatrix,
    pub u: IntMatrix,
}

pub fn hnf(a: &IntMatrix) -> Hnf {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut pivot_row = 0;
    for col in 0..h.cols {
        if pivot_row >= h.rows {
            break;
        }
        // gcd elimination in this column below pivot_row, always pulling the
        // smallest-magnitude nonzero entry up to limit coefficient growth
        loop {
            let best = (pivot_row..h.rows)
                .filter(|&i| !h[(i, col)].is_zero())
                .min_by_key(|&i| h[(i, col)].abs());
            let best = match best {
                Some(b) => b,
                None => break,
            };
            if best != pivot_row {
                h.swap_rows(pivot_row, best);
                u.swap_rows(pivot_row, best);
            }
            let mut done = true;
            let p = h[(pivot_row, col)].clone();
            for i in pivot_row + 1..h.rows {
                if !h[(i, col)].is_zero() {
                    let q = -h[(i, col)].div_floor(&p);
                    h.add_row(i, pivot_row, &q);
                    u.add_row(i, pivot_row, &q);
                    if !h[(i, col)].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[(pivot_row, col)].is_zero() {
            continue;
        }
        if h[(pivot_row, col)].is_negative() {
            h.negate_row(pivot_row);
            u.negate_row(pivot_row);
        }
        let p = h[(pivot_row, col)].clone();
        for i in 0..pivot_row {
            if !h[(i, col)].is_zero() {
                let q = -h[(i, col)].div_floor(&p);
                h.add_row(i, pivot_row, &q);
                u.add_row(i, pivot_row, &q);
            }
        }
        pivot_row += 1;
    }
    Hnf { h, u }
}

/// Result of Smith normal form reduction: `d = u * a * v` diagonal with
/// `d_1 | d_2 | ...` (zeros last), `u`, `v` unimodular, and the inverses of
/// both transforms maintained alongside.
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl Snf {
    /// Diagonal entry d_i, with indices past the matrix shape read as 0.
    pub fn diag(&self, i: usize) -> BigInt {
        if i < self.d.rows.min(self.d.cols) {
            self.d[(i, i)].clone()
        } else {
            BigInt::zero()
        }
    }
}

pub fn snf(a: &IntMatrix) -> Snf {
    let mut d = a.clone();
    let (m, n) = (d.rows, d.cols);
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut v_inv = IntMatrix::identity(n);

    // bookkeeping closures are not used so that u/u_inv stay in sync by
    // construction at each call site
    macro_rules! row_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let k = $k;
            d.add_row($i, $j, &k);
            u.add_row($i, $j, &k);
            u_inv.add_col($j, $i, &-k);
        }};
    }
    macro_rules! col_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let k = $k;
            d.add_col($i, $j, &k);
            v.add_col($i, $j, &k);
            v_inv.add_row($j, $i, &-k);
        }};
    }

    let bound = m.min(n);
    let mut t = 0;
    while t < bound {
        // locate smallest-magnitude nonzero entry in the trailing submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[(i, j)].is_zero()
                    && pivot.map_or(true, |(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break, // trailing submatrix is zero
        };
        if pi != t {
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
        }
        if pj != t {
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);
        }

        // clear row t and column t; restart if a reduction leaves a remainder
        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..m {
                if !d[(i, t)].is_zero() {
                    let q = -d[(i, t)].div_floor(&d[(t, t)].clone());
                    row_add!(i, t, q);
                    if !d[(i, t)].is_zero() {
                        // remainder is smaller than the pivot: swap it up
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        u_inv.swap_cols(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !d[(t, j)].is_zero() {
                    let q = -d[(t, j)].div_floor(&d[(t, t)].clone());
                    col_add!(j, t, q);
                    if !d[(t, j)].is_zero() {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        v_inv.swap_rows(t, j);
                        clean = false;
                    }
                }
            }
        }

        // enforce the divisibility chain: fold any non-multiple into column t
        let p = d[(t, t)].clone();
        let offender = (t + 1..m)
            .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !(&d[(i, j)] % &p).is_zero());
        if let Some((i, _)) = offender {
            row_add!(t, i, BigInt::one());
            continue; // re-run elimination at the same index
        }

        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        t += 1;
    }

    // move zero diagonal entries past nonzero ones (they can only arise as a
    // zero trailing block already, but keep the invariant explicit)
    debug_assert!({
        let diag: Vec<BigInt> = (0..bound).map(|i| d[(i, i)].clone()).collect();
        diag.windows(2).all(|w| w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()))
            || diag.iter().skip_while(|x| !x.is_zero()).all(|x| x.is_zero())
    });

    Snf { d, u, v, u_inv, v_inv }
}

/// Solve A·x = b over the integers. Returns an exact solution (verified by
/// substitution) or `None` when no integer solution exists.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    LatticeSolver::new(a.clone()).solve(b)
}

/// Precomputed Smith decomposition of a fixed matrix, for solving many
/// right-hand sides A·x = b.
pub struct LatticeSolver {
    a: IntMatrix,
    snf: Snf,
}

impl LatticeSolver {
    pub fn new(a: IntMatrix) -> Self {
        let snf = snf(&a);
        LatticeSolver { a, snf }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(b.len(), self.a.rows, "dimension mismatch in solve");
        let c = self.snf.u.mul_vec(b);
        let m = self.a.rows;
        let n = self.a.cols;
        let mut y = vec![BigInt::zero(); n];
        for i in 0..m {
            let di = self.snf.diag(i);
            if di.is_zero() {
                if !c[i].is_zero() {
                    return None;
                }
            } else {
                let (q, r) = c[i].div_rem(&di);
                if !r.is_zero() {
                    return None;
                }
                y[i] = q;
            }
        }
        let x = self.snf.v.mul_vec(&y);
        debug_assert_eq!(self.a.mul_vec(&x), b.to_vec());
        Some(x)
    }

    pub fn contains(&self, b: &[BigInt]) -> bool {
        self.solve(b).is_some()
    }
}

/// Finite presentation of a quotient Z^n / L for a sublattice L, as a product
/// of cyclic groups Z/d_1 × Z/d_2 × ... with d_1 | d_2 | ... and 0 encoding a
/// free factor (zeros come last). Trivial factors d = 1 are dropped.
#[derive(Clone, Debug)]
pub struct FGAbelianPresentation {
    pub invariant_factors: Vec<BigInt>,
    ambient_dim: usize,
    kept: Vec<usize>,
    diag: Vec<BigInt>,
    u: IntMatrix,
    u_inv: IntMatrix,
}

impl FGAbelianPresentation {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_generators(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    /// Group order; `None` when the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        let mut o = BigInt::one();
        for d in &self.invariant_factors {
            if d.is_zero() {
                return None;
            }
            o *= d;
        }
        Some(o)
    }

    /// Image of an ambient vector in the quotient, in normalized coordinates
    /// (component i in [0, d_i) when d_i > 0, arbitrary integer when d_i = 0).
    pub fn project(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.ambient_dim, "dimension mismatch in project");
        let y = self.u.mul_vec(x);
        self.kept
            .iter()
            .map(|&i| {
                if self.diag[i].is_zero() {
                    y[i].clone()
                } else {
                    y[i].mod_floor(&self.diag[i])
                }
            })
            .collect()
    }

    /// A representative in the ambient lattice of a quotient coordinate
    /// vector; project(lift(y)) = y (after normalization).
    pub fn lift(&self, y: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(y.len(), self.kept.len(), "dimension mismatch in lift");
        let mut full = vec![BigInt::zero(); self.ambient_dim];
        for (slot, val) in self.kept.iter().zip(y) {
            full[*slot] = val.clone();
        }
        self.u_inv.mul_vec(&full)
    }

    /// Whether an ambient vector lies in the sublattice (i.e. maps to zero).
    pub fn is_zero_class(&self, x: &[BigInt]) -> bool {
        self.project(x).iter().all(|c| c.is_zero())
    }

    /// Normalize a quotient coordinate vector into canonical range.
    pub fn reduce(&self, y: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(y.len(), self.kept.len(), "dimension mismatch in reduce");
        self.kept
            .iter()
            .zip(y)
            .map(|(&i, v)| if self.diag[i].is_zero() { v.clone() } else { v.mod_floor(&self.diag[i]) })
            .collect()
    }
}

/// Presentation of Z^ambient_dim modulo the sublattice spanned by `sub`
/// (each generator an ambient coordinate vector). `sub` may be empty.
pub fn quotient_structure(sub: &[Vec<BigInt>], ambient_dim: usize) -> FGAbelianPresentation {
    assert!(sub.iter().all(|g| g.len() == ambient_dim), "generator dimension mismatch");
    let b = if sub.is_empty() {
        IntMatrix::zero(ambient_dim.max(1), 1)
    } else {
        IntMatrix::from_cols(sub)
    };
    // When ambient_dim = 0 the quotient is trivial; keep shapes consistent.
    if ambient_dim == 0 {
        return FGAbelianPresentation {
            invariant_factors: vec![],
            ambient_dim: 0,
            kept: vec![],
            diag: vec![],
            u: IntMatrix::identity(1),
            u_inv: IntMatrix::identity(1),
        };
    }
    let s = snf(&b);
    // In coordinates y = U x the sublattice is the span of d_i e_i, so the
    // quotient is the product of Z/d_i over all ambient coordinates.
    let diag: Vec<BigInt> = (0..ambient_dim).map(|i| s.diag(i)).collect();
    let kept: Vec<usize> = (0..ambient_dim).filter(|&i| !diag[i].is_one()).collect();
    let invariant_factors: Vec<BigInt> = kept.iter().map(|&i| diag[i].clone()).collect();
    FGAbelianPresentation {
        invariant_factors,
        ambient_dim,
        kept,
        diag,
        u: s.u,
        u_inv: s.u_inv,
    }
}

/// Solve A·x = b over the rationals by Gaussian elimination. Returns one
/// solution, or `None` when the system is inconsistent.
pub fn solve_rational(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    assert_eq!(b.len(), m, "dimension mismatch in rational solve");
    if m == 0 {
        return Some(vec![]);
    }
    let n = a[0].len();
    assert!(a.iter().all(|r| r.len() == n), "ragged matrix");
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut prow = 0;
    for col in 0..n {
        let Some(sel) = (prow..m).find(|&i| !aug[i][col].is_zero()) else {
            continue;
        };
        aug.swap(prow, sel);
        let inv = aug[prow][col].recip();
        for c in col..=n {
            aug[prow][c] = &aug[prow][c] * &inv;
        }
        for i in 0..m {
            if i != prow && !aug[i][col].is_zero() {
                let f = aug[i][col].clone();
                for c in col..=n {
                    let t = &f * &aug[prow][c];
                    aug[i][c] = &aug[i][c] - &t;
                }
            }
        }
        pivot_cols.push(col);
        prow += 1;
        if prow == m {
            break;
        }
    }
    // inconsistency: a zero row with nonzero rhs
    for i in prow..m {
        if !aug[i][n].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = aug[r][n].clone();
    }
    Some(x)
}

/// Basis of the rational null space of A (vectors x with A·x = 0).
pub fn kernel_rational(a: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let m = a.len();
    if m == 0 {
        return vec![];
    }
    let n = a[0].len();
    let mut red: Vec<Vec<BigRational>> = a.to_vec();
    let mut pivot_cols = Vec::new();
    let mut prow = 0;
    for col in 0..n {
        let Some(sel) = (prow..m).find(|&i| !red[i][col].is_zero()) else {
            continue;
        };
        red.swap(prow, sel);
        let inv = red[prow][col].recip();
        for c in col..n {
            red[prow][c] = &red[prow][c] * &inv;
        }
        for i in 0..m {
            if i != prow && !red[i][col].is_zero() {
                let f = red[i][col].clone();
                for c in col..n {
                    let t = &f * &red[prow][c];
                    red[i][c] = &red[i][c] - &t;
                }
            }
        }
        pivot_cols.push(col);
        prow += 1;
        if prow == m {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); n];
        v[free] = BigRational::one();
        for (r, &c) in pivot_cols.iter().enumerate() {
            v[c] = -red[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Saturated basis of the integer kernel {x in Z^n : A x = 0}.
/// The basis spans the full lattice of integer solutions (it is a direct
/// summand of Z^n), because it comes from unimodular columns of the Smith
/// transform.
pub fn kernel_integer(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let s = snf(a);
    (0..a.cols).filter(|&i| s.diag(i).is_zero()).map(|i| s.v.col(i)).collect()
}

/// Saturation of the lattice spanned by the given row vectors inside Z^dim:
/// a basis of (Q-span of rows) intersected with Z^dim.
pub fn saturate_rows(rows: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return vec![];
    }
    let s = IntMatrix::from_rows(rows);
    // annihilator of the row span
    let ann = kernel_integer(&s);
    if ann.is_empty() {
        // full span
        return (0..dim)
            .map(|i| {
                let mut v = vec![BigInt::zero(); dim];
                v[i] = BigInt::one();
                v
            })
            .collect();
    }
    let ann_t = IntMatrix::from_cols(&ann).transpose();
    kernel_integer(&ann_t)
}

/// Clear denominators: returns (integer vector, common denominator d > 0)
/// with v = (integer vector) / d componentwise.
pub fn clear_denominators(v: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let mut d = BigInt::one();
    for x in v {
        d = d.lcm(x.denom());
    }
    let ints = v.iter().map(|x| x.numer() * (&d / x.denom())).collect();
    (ints, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn hnf_identity_fixed_point() {
        let a = IntMatrix::identity(2);
        let r = hnf(&a);
        assert_eq!(r.h, IntMatrix::identity(2));
        assert_eq!(r.u, IntMatrix::identity(2));
    }

    #[test]
    fn hnf_zero_matrix() {
        let a = IntMatrix::zero(3, 2);
        let r = hnf(&a);
        assert!(r.h.is_zero());
        assert_eq!(r.u, IntMatrix::identity(3));
    }

    #[test]
    fn hnf_upper_triangular_example() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[0, 3]]);
        let r = hnf(&a);
        assert_eq!(r.h[(0, 0)], bi(2));
        assert_eq!(r.h[(1, 1)], bi(3));
        assert_eq!(r.h[(1, 0)], bi(0));
        // entry above the second pivot is reduced mod 3
        assert!(r.h[(0, 1)] >= bi(0) && r.h[(0, 1)] < bi(3));
        assert_eq!(r.u.mul(&a), r.h);
        assert_eq!(r.u.det().abs(), bi(1));
    }

    #[test]
    fn snf_divisibility_example() {
        let a = IntMatrix::from_i64(&[&[6, 0], &[0, 4]]);
        let s = snf(&a);
        assert_eq!(s.diag(0), bi(2));
        assert_eq!(s.diag(1), bi(12));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(2));
        assert_eq!(s.v.mul(&s.v_inv), IntMatrix::identity(2));
    }

    #[test]
    fn snf_identity_and_zero() {
        let s = snf(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        let z = snf(&IntMatrix::from_i64(&[&[0]]));
        assert!(z.d.is_zero());
    }

    #[test]
    fn solve_identity() {
        let a = IntMatrix::identity(3);
        let b = vec![bi(5), bi(-2), bi(7)];
        assert_eq!(solve_integer(&a, &b), Some(b));
    }

    #[test]
    fn solve_parity_obstruction() {
        let a = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(solve_integer(&a, &[bi(3)]), None);
    }

    #[test]
    fn solve_bezout() {
        let a = IntMatrix::from_i64(&[&[2, 3]]);
        let x = solve_integer(&a, &[bi(1)]).expect("gcd(2,3)=1 so solvable");
        assert_eq!(a.mul_vec(&x), vec![bi(1)]);
    }

    #[test]
    fn quotient_two_z_in_z() {
        let q = quotient_structure(&[vec![bi(2)]], 1);
        assert_eq!(q.invariant_factors, vec![bi(2)]);
        assert!(!q.is_zero_class(&[bi(1)]));
        assert!(q.is_zero_class(&[bi(4)]));
    }

    #[test]
    fn quotient_mixed_diagonal() {
        // Z^2 / <(2,0),(0,3)> is cyclic of order 6
        let q = quotient_structure(&[vec![bi(2), bi(0)], vec![bi(0), bi(3)]], 2);
        assert_eq!(q.invariant_factors, vec![bi(6)]);
        assert_eq!(q.order(), Some(bi(6)));
    }

    #[test]
    fn quotient_full_lattice_trivial() {
        let q = quotient_structure(&[vec![bi(1), bi(0)], vec![bi(0), bi(1)]], 2);
        assert!(q.is_trivial());
        assert_eq!(q.order(), Some(bi(1)));
    }

    #[test]
    fn quotient_with_free_part() {
        // Z^2 / <(2,0)> = Z/2 x Z
        let q = quotient_structure(&[vec![bi(2), bi(0)]], 2);
        assert_eq!(q.invariant_factors, vec![bi(2), bi(0)]);
        assert_eq!(q.order(), None);
    }

    #[test]
    fn integer_kernel_and_saturation() {
        // kernel of [1 2 3] is rank 2 and saturated
        let a = IntMatrix::from_i64(&[&[1, 2, 3]]);
        let k = kernel_integer(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        // saturation of span{(2,0)} in Z^2 is span{(1,0)}
        let s = saturate_rows(&[vec![bi(2), bi(0)]], 2);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0][0].abs(), bi(1));
        assert_eq!(s[0][1], bi(0));
        // saturation of span{(2,2),(0,4)} is all of Z^2
        let s2 = saturate_rows(&[vec![bi(2), bi(2)], vec![bi(0), bi(4)]], 2);
        assert_eq!(s2.len(), 2);
        let det = IntMatrix::from_rows(&s2).det();
        assert_eq!(det.abs(), bi(1));
    }

    #[test]
    fn rational_solve_and_kernel() {
        let r = |n: i64, d: i64| BigRational::new(bi(n), bi(d));
        let a = vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]];
        let x = solve_rational(&a, &[r(3, 1), r(6, 1)]).unwrap();
        assert_eq!(&x[0] + &x[1] * r(2, 1), r(3, 1));
        assert!(solve_rational(&a, &[r(3, 1), r(5, 1)]).is_none());
        let k = kernel_rational(&a);
        assert_eq!(k.len(), 1);
        assert_eq!(&k[0][0] + &k[0][1] * r(2, 1), r(0, 1));
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-20i64..21, r * c).prop_map(move |v| {
                let rows: Vec<Vec<BigInt>> =
                    v.chunks(c).map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect()).collect();
                IntMatrix::from_rows(&rows)
            })
        })
    }

    proptest! {
        #[test]
        fn hnf_transform_is_unimodular(a in small_matrix()) {
            let r = hnf(&a);
            prop_assert_eq!(r.u.det().abs(), BigInt::one());
            prop_assert_eq!(r.u.mul(&a), r.h);
        }

        #[test]
        fn snf_transforms_are_unimodular(a in small_matrix()) {
            let s = snf(&a);
            prop_assert_eq!(s.u.det().abs(), BigInt::one());
            prop_assert_eq!(s.v.det().abs(), BigInt::one());
            prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
            prop_assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(a.rows));
            prop_assert_eq!(s.v.mul(&s.v_inv), IntMatrix::identity(a.cols));
            // divisibility chain
            let bound = a.rows.min(a.cols);
            for i in 1..bound {
                let (p, q) = (s.diag(i - 1), s.diag(i));
                prop_assert!(p.is_zero() && q.is_zero() || !p.is_zero() && (&q % &p).is_zero() || !p.is_zero() && q.is_zero());
            }
        }

        #[test]
        fn solve_verifies_by_substitution(a in small_matrix(), seed in proptest::collection::vec(-10i64..11, 1..5)) {
            let x0: Vec<BigInt> = (0..a.cols).map(|i| BigInt::from(seed[i % seed.len()])).collect();
            let b = a.mul_vec(&x0);
            let x = solve_integer(&a, &b).expect("constructed rhs must be solvable");
            prop_assert_eq!(a.mul_vec(&x), b);
        }

        #[test]
        fn project_lift_round_trip(a in small_matrix()) {
            let gens: Vec<Vec<BigInt>> = (0..a.cols).map(|j| a.col(j)).collect();
            let q = quotient_structure(&gens, a.rows);
            // every generator of the sublattice maps to zero
            for g in &gens {
                prop_assert!(q.is_zero_class(g));
            }
            // project . lift = id on arbitrary classes
            let y: Vec<BigInt> = q.invariant_factors.iter().enumerate()
                .map(|(i, _)| BigInt::from(i as i64 + 1)).collect();
            let y = q.reduce(&y);
            prop_assert_eq!(q.project(&q.lift(&y)), y);
        }
    }
}
