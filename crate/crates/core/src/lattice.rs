//! Integer lattices: Hermite and Smith normal forms, finite-index sublattices
//! of ℤ^m with their cosets, intersections, and the coset covering decision
//! used for abelian closures.
//!
//! Column conventions throughout: a sublattice is spanned by the columns of
//! its basis matrix, and `hermite_form` performs column operations only.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{input, Error, Result};
use crate::words::{Alphabet, Word};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return input("matrix dimensions must be positive");
        }
        if rows.iter().any(|row| row.len() != c) {
            return input("ragged matrix rows");
        }
        let data = rows.iter().flat_map(|row| row.iter().cloned().map(Into::into)).collect();
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = IntMatrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Parses `r11 r12; r21 r22` (row-major, semicolon row separator).
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .split(';')
            .map(|row| {
                row.split_whitespace()
                    .map(|x| x.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad integer `{x}`"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        IntMatrix::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == IntMatrix::identity(self.rows)
    }

    pub fn rank(&self) -> usize {
        hermite(self).rank()
    }

    /// Determinant from the Hermite form: `det M = det H / det U`.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let hf = hermite(self);
        if hf.rank() < self.rows {
            return Ok(BigInt::zero());
        }
        let diag: BigInt = (0..self.rows).map(|i| hf.h[(i, i)].clone()).product();
        Ok(diag * hf.u_det)
    }

    /// Exact inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let hf = hermite(self);
        if !hf.h.is_identity() {
            return input("matrix is not unimodular");
        }
        Ok(hf.u)
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// col_j -= q · col_k
    fn col_sub(&mut self, j: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = &self[(i, k)] * q;
            self[(i, j)] -= t;
        }
    }

    /// row_i -= q · row_k
    fn row_sub(&mut self, i: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = &self[(k, j)] * q;
            self[(i, j)] -= t;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let x = -&self[(i, j)];
            self[(i, j)] = x;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = -&self[(i, j)];
            self[(i, j)] = x;
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

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Column Hermite form `H = M·U`.
///
/// Pivots are placed right-aligned: the pivot of column `j` is its lowest
/// non-zero entry, pivot rows increase with the column index, pivots are
/// positive and every entry in a pivot row to the right of the pivot lies in
/// `[0, pivot)`. Zero columns come first and the matching columns of `U` span
/// the integer kernel of `M`. For a full-rank square matrix `H` is upper
/// triangular.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// `(row, column)` of each pivot, by increasing column.
    pub pivots: Vec<(usize, usize)>,
    u_det: BigInt,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Columns of `U` spanning the integer kernel of the input.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        (0..self.h.cols - self.rank()).map(|j| self.u.column(j)).collect()
    }

    /// Reduces `v` modulo the column span of `H`. Returns the canonical
    /// residue and the coefficients `q` (one per pivot column) with
    /// `v = residue + Σ q_j · H_{pivot col j}`.
    pub fn reduce(&self, v: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut r = v.to_vec();
        let mut q = vec![BigInt::zero(); self.pivots.len()];
        for (idx, &(row, col)) in self.pivots.iter().enumerate().rev() {
            let k = r[row].div_floor(&self.h[(row, col)]);
            if !k.is_zero() {
                for (i, ri) in r.iter_mut().enumerate().take(row + 1) {
                    *ri -= &k * &self.h[(i, col)];
                }
            }
            q[idx] = k;
        }
        (r, q)
    }
}

pub fn hermite(m: &IntMatrix) -> Hermite {
    let (rows, cols) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut u_det = BigInt::one();
    let mut next = cols;
    let mut pivots = Vec::new();
    for row in (0..rows).rev() {
        if next == 0 {
            break;
        }
        let mut found = false;
        loop {
            let best = (0..next)
                .filter(|&j| !h[(row, j)].is_zero())
                .min_by(|&a, &b| h[(row, a)].abs().cmp(&h[(row, b)].abs()).then(a.cmp(&b)));
            let Some(best) = best else { break };
            found = true;
            let p = next - 1;
            if best != p {
                h.swap_cols(best, p);
                u.swap_cols(best, p);
                u_det = -u_det;
            }
            let mut clean = true;
            for j in 0..p {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = h[(row, j)].div_floor(&h[(row, p)]);
                h.col_sub(j, p, &q);
                u.col_sub(j, p, &q);
                clean &= h[(row, j)].is_zero();
            }
            if clean {
                break;
            }
        }
        if found {
            let p = next - 1;
            if h[(row, p)].is_negative() {
                h.negate_col(p);
                u.negate_col(p);
                u_det = -u_det;
            }
            pivots.push((row, p));
            next -= 1;
        }
    }
    pivots.reverse();
    for jdx in 0..pivots.len() {
        let j = pivots[jdx].1;
        for kdx in (0..jdx).rev() {
            let (prow, k) = pivots[kdx];
            let q = h[(prow, j)].div_floor(&h[(prow, k)]);
            h.col_sub(j, k, &q);
            u.col_sub(j, k, &q);
        }
    }
    Hermite { h, u, pivots, u_det }
}

/// `(H, U)` with `H = M·U` in column Hermite form and `U` unimodular.
pub fn hermite_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let hf = hermite(m);
    (hf.h, hf.u)
}

/// `(U, S, V)` with `U·M·V = S` diagonal, `d₁ | d₂ | …`, `d_i ≥ 0` and
/// `U`, `V` unimodular.
pub fn smith_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if s[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return (u, s, v);
            };
            s.swap_rows(t, bi);
            u.swap_rows(t, bi);
            s.swap_cols(t, bj);
            v.swap_cols(t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                let q = s[(i, t)].div_floor(&s[(t, t)]);
                s.row_sub(i, t, &q);
                u.row_sub(i, t, &q);
                clean &= s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                let q = s[(t, j)].div_floor(&s[(t, t)]);
                s.col_sub(j, t, &q);
                v.col_sub(j, t, &q);
                clean &= s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&s[(t, t)])));
            match offender {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    s.row_sub(t, i, &minus_one);
                    u.row_sub(t, i, &minus_one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (u, s, v)
}

pub fn to_bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn format_vector(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_vector(text: &str) -> Result<Vec<BigInt>> {
    text.split_whitespace()
        .map(|x| x.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad integer `{x}`"))))
        .collect()
}

/// A finite-index subgroup of ℤ^m. Equality compares the lattices, not the
/// generating sets.
#[derive(Clone, Debug)]
pub struct Sublattice {
    basis: IntMatrix,
    hnf: Hermite,
}

impl PartialEq for Sublattice {
    fn eq(&self, other: &Self) -> bool {
        self.hnf.h == other.hnf.h
    }
}

impl Eq for Sublattice {}

impl Sublattice {
    /// The lattice spanned by the columns of `basis`; must have full rank.
    pub fn new(basis: IntMatrix) -> Result<Self> {
        let full = hermite(&basis);
        if full.rank() < basis.rows {
            return Err(Error::RankDeficient { rank: full.rank(), needed: basis.rows });
        }
        let cols: Vec<_> = full.pivots.iter().map(|&(_, c)| full.h.column(c)).collect();
        let square = IntMatrix::from_columns(basis.rows, &cols);
        let hnf = hermite(&square);
        Ok(Sublattice { basis, hnf })
    }

    pub fn from_columns(dim: usize, cols: &[Vec<BigInt>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != dim) {
            return input("basis vector of wrong dimension");
        }
        Sublattice::new(IntMatrix::from_columns(dim, cols))
    }

    /// `k₁ℤ ⊕ … ⊕ k_mℤ`.
    pub fn diagonal(ks: &[i64]) -> Result<Self> {
        let cols: Vec<Vec<BigInt>> = (0..ks.len())
            .map(|j| (0..ks.len()).map(|i| BigInt::from(if i == j { ks[j] } else { 0 })).collect())
            .collect();
        Sublattice::from_columns(ks.len(), &cols)
    }

    pub fn full(dim: usize) -> Self {
        Sublattice::new(IntMatrix::identity(dim)).expect("identity has full rank")
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Upper-triangular Hermite basis with positive diagonal.
    pub fn hermite_basis(&self) -> &IntMatrix {
        &self.hnf.h
    }

    /// `|ℤ^m : U|`, the product of the Hermite diagonal.
    pub fn index(&self) -> BigInt {
        (0..self.dim()).map(|i| self.hnf.h[(i, i)].clone()).product()
    }

    pub fn reduce(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        self.check_dim(v.len())?;
        Ok(self.hnf.reduce(v).0)
    }

    pub fn contains(&self, v: &[BigInt]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(Zero::is_zero))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

impl fmt::Display for Sublattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.hnf.h.columns().iter().map(|c| format_vector(c)).collect();
        write!(f, "{}", cols.join("; "))
    }
}

/// `offset + lattice`, with the offset stored as its canonical residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    offset: Vec<BigInt>,
    lattice: Sublattice,
}

impl Coset {
    pub fn new(offset: Vec<BigInt>, lattice: Sublattice) -> Result<Self> {
        let offset = lattice.reduce(&offset)?;
        Ok(Coset { offset, lattice })
    }

    /// Parses `offset | basis` where basis columns are separated by `;`,
    /// e.g. `2 | 3` or `0 0 | 2 0; 0 3`.
    pub fn parse(text: &str) -> Result<Self> {
        let (off, basis) = text
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("coset `{text}` needs `offset | basis`")))?;
        let offset = parse_vector(off)?;
        let cols = basis.split(';').map(parse_vector).collect::<Result<Vec<_>>>()?;
        let lattice = Sublattice::from_columns(offset.len(), &cols)?;
        Coset::new(offset, lattice)
    }

    pub fn offset(&self) -> &[BigInt] {
        &self.offset
    }

    pub fn lattice(&self) -> &Sublattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn contains(&self, p: &[BigInt]) -> Result<bool> {
        self.lattice.check_dim(p.len())?;
        let diff: Vec<BigInt> = p.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        self.lattice.contains(&diff)
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", format_vector(&self.offset), self.lattice)
    }
}

/// Intersection of full-rank sublattices of the same ambient dimension.
pub fn intersect(lattices: &[Sublattice]) -> Result<Sublattice> {
    let Some(first) = lattices.first() else {
        return input("intersection of an empty family");
    };
    let mut acc = first.clone();
    for other in &lattices[1..] {
        acc.check_dim(other.dim())?;
        let m = acc.dim();
        let a = acc.hermite_basis();
        let b = other.hermite_basis();
        // kernel of [A | -B] gives A·x = B·y
        let mut stacked = IntMatrix::zeros(m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                stacked[(i, j)] = a[(i, j)].clone();
                stacked[(i, m + j)] = -&b[(i, j)];
            }
        }
        let kernel = hermite(&stacked).kernel();
        let cols = kernel
            .iter()
            .map(|k| a.mul_vec(&k[..m]))
            .collect::<Result<Vec<_>>>()?;
        acc = Sublattice::from_columns(m, &cols)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Covering {
    Covered,
    /// The lexicographically least uncovered residue.
    Uncovered(Vec<BigInt>),
}

impl Covering {
    pub fn is_covered(&self) -> bool {
        matches!(self, Covering::Covered)
    }
}

/// Decides whether the cosets cover ℤ^m by checking every residue class of
/// ℤ^m modulo the intersection of their lattices.
pub fn covers(cosets: &[Coset], m: usize) -> Result<Covering> {
    if let Some(c) = cosets.iter().find(|c| c.dim() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: c.dim() });
    }
    if cosets.is_empty() {
        return Ok(if m == 0 { Covering::Covered } else { Covering::Uncovered(vec![BigInt::zero(); m]) });
    }
    let lattices: Vec<Sublattice> = cosets.iter().map(|c| c.lattice.clone()).collect();
    let common = intersect(&lattices)?;
    // the box ∏[0, d_i) over the Hermite diagonal is a full residue system
    let diag: Vec<u64> = (0..m)
        .map(|i| {
            common.hermite_basis()[(i, i)]
                .to_u64()
                .ok_or_else(|| Error::Input("intersection index too large to enumerate".into()))
        })
        .collect::<Result<_>>()?;
    let mut point = vec![0u64; m];
    loop {
        let p: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
        let mut hit = false;
        for c in cosets {
            if c.contains(&p)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(Covering::Uncovered(p));
        }
        // odometer, last coordinate fastest
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(Covering::Covered);
            }
            i -= 1;
            point[i] += 1;
            if point[i] < diag[i] {
                break;
            }
            point[i] = 0;
        }
    }
}

/// An embedding `f` of a free abelian group `⟨c, a₁…a_m⟩` into
/// `⟨c, z₁…z_m⟩` that is the identity on the optional fixed generator `c`.
///
/// Column `i` of `matrix` holds the exponents of `f(a_i)`: first the
/// fixed-part exponent (when there is a fixed generator), then the exponents
/// of `z₁…z_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureEmbedding {
    fixed: Vec<String>,
    free: Vec<String>,
    targets: Vec<String>,
    matrix: IntMatrix,
}

impl ClosureEmbedding {
    pub fn new(
        fixed: Vec<String>,
        free: Vec<String>,
        targets: Vec<String>,
        matrix: IntMatrix,
    ) -> Result<Self> {
        if fixed.len() > 1 {
            return input("at most one fixed generator is supported");
        }
        let m = free.len();
        if m == 0 || targets.len() != m {
            return input("need as many target generators as free generators");
        }
        if matrix.rows() != fixed.len() + m || matrix.cols() != m {
            return Err(Error::DimensionMismatch { expected: fixed.len() + m, got: matrix.rows() });
        }
        let f = ClosureEmbedding { fixed, free, targets, matrix };
        if f.free_block().det()?.is_zero() {
            return input("closure embedding must have non-zero determinant");
        }
        Ok(f)
    }

    /// Reads images like `c2=c1^2 z2^3`; generators not mentioned as fixed
    /// or target names are rejected.
    pub fn from_images(fixed: &[&str], targets: &[&str], images: &[(&str, &str)]) -> Result<Self> {
        let alphabet = Alphabet::new(fixed.iter().chain(targets))?;
        let cols = images
            .iter()
            .map(|(_, img)| {
                let w = alphabet.parse(img)?;
                Ok(to_bigints(&w.exponent_vector(&alphabet)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let matrix = IntMatrix::from_columns(alphabet.len(), &cols);
        ClosureEmbedding::new(
            fixed.iter().map(|s| s.to_string()).collect(),
            images.iter().map(|(n, _)| n.to_string()).collect(),
            targets.iter().map(|s| s.to_string()).collect(),
            matrix,
        )
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn fixed(&self) -> &[String] {
        &self.fixed
    }

    pub fn free(&self) -> &[String] {
        &self.free
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// The `z`-exponent block.
    pub fn free_block(&self) -> IntMatrix {
        let r = self.fixed.len();
        let m = self.dim();
        let mut b = IntMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                b[(i, j)] = self.matrix[(r + i, j)].clone();
            }
        }
        b
    }

    /// Fixed-part exponent of each `f(a_i)`; zero without a fixed generator.
    pub fn fixed_exponents(&self) -> Vec<BigInt> {
        match self.fixed.len() {
            0 => vec![BigInt::zero(); self.dim()],
            _ => self.matrix.row(0),
        }
    }

    pub fn word_image(&self, i: usize) -> Word {
        let names: Vec<&str> = self.fixed.iter().chain(&self.targets).map(String::as_str).collect();
        let alphabet = Alphabet::new(names).expect("names validated on construction");
        let exps: Vec<i64> = self.matrix.column(i).iter().map(|x| x.to_i64().unwrap_or(0)).collect();
        Word::from_exponents(&alphabet, &exps)
    }
}

/// The coset `K_f + U_f` of exponent vectors `p` (with `φ(a_i) = u^{p_i}`,
/// `φ(c) = u`) for which `φ` extends through `f`.
///
/// Extending means choosing `φ̄(z_j) = u^{y_j}`, so `p = K + Bᵀ·y` where `B`
/// is the `z`-exponent block and `K` the fixed-part exponents.
pub fn closure_coset(f: &ClosureEmbedding) -> Result<Coset> {
    let lattice = Sublattice::new(f.free_block().transpose())?;
    Coset::new(f.fixed_exponents(), lattice)
}

pub fn extendable(p: &[BigInt], f: &ClosureEmbedding) -> Result<bool> {
    if p.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: p.len() });
    }
    closure_coset(f)?.contains(p)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<BigInt> {
        to_bigints(xs)
    }

    /// Fraction-free (Bareiss) determinant.
    pub(crate) fn bareiss_det(a: &IntMatrix) -> BigInt {
        let n = a.rows();
        let mut a = a.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
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
                    let x = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = x;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    fn random_matrix(rng: &mut StdRng, r: usize, c: usize, span: i64) -> IntMatrix {
        let rows: Vec<Vec<i64>> =
            (0..r).map(|_| (0..c).map(|_| rng.gen_range(-span..=span)).collect()).collect();
        IntMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn hermite_examples() {
        let (h, u) = hermite_form(&IntMatrix::identity(3));
        assert!(h.is_identity() && u.is_identity());
        let d = m(&[&[2, 0], &[0, 3]]);
        assert_eq!(hermite_form(&d).0, d);
        assert_eq!(hermite_form(&m(&[&[2, 1], &[0, 3]])).0, m(&[&[2, 1], &[0, 3]]));
    }

    #[test]
    fn hermite_random_invariants() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let a = random_matrix(&mut rng, 3, 3, 9);
            let det = bareiss_det(&a);
            let (h, u) = hermite_form(&a);
            assert_eq!(a.mul(&u).unwrap(), h);
            assert_eq!(bareiss_det(&u).abs(), BigInt::one());
            if !det.is_zero() {
                let hd: BigInt = (0..3).map(|i| h[(i, i)].clone()).product();
                assert_eq!(hd, det.abs());
                for i in 0..3 {
                    assert!(h[(i, i)].is_positive());
                    for j in 0..3 {
                        if i > j {
                            assert!(h[(i, j)].is_zero());
                        } else if i < j {
                            assert!(!h[(i, j)].is_negative() && h[(i, j)] < h[(i, i)]);
                        }
                    }
                }
            }
            assert_eq!(a.det().unwrap(), det);
        }
    }

    #[test]
    fn hermite_kernel_of_wide_matrices() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 2, 4, 5);
            let hf = hermite(&a);
            for k in hf.kernel() {
                assert!(a.mul_vec(&k).unwrap().iter().all(Zero::is_zero));
            }
            assert_eq!(hf.kernel().len() + hf.rank(), 4);
        }
    }

    fn divides(a: &BigInt, b: &BigInt) -> bool {
        if a.is_zero() {
            b.is_zero()
        } else {
            b.is_multiple_of(a)
        }
    }

    #[test]
    fn smith_examples() {
        let (u, s, vv) = smith_form(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(s, m(&[&[1, 0], &[0, 6]]));
        assert_eq!(u.mul(&m(&[&[2, 0], &[0, 3]])).unwrap().mul(&vv).unwrap(), s);
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(smith_form(&z).1, z);
    }

    #[test]
    fn smith_random_invariants() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let r = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=4);
            let a = random_matrix(&mut rng, r, c, 12);
            let (u, s, vv) = smith_form(&a);
            assert_eq!(u.mul(&a).unwrap().mul(&vv).unwrap(), s);
            assert_eq!(bareiss_det(&u).abs(), BigInt::one());
            assert_eq!(bareiss_det(&vv).abs(), BigInt::one());
            let n = r.min(c);
            for i in 0..r {
                for j in 0..c {
                    if i != j {
                        assert!(s[(i, j)].is_zero());
                    }
                }
            }
            for i in 0..n {
                assert!(!s[(i, i)].is_negative());
                if i + 1 < n {
                    assert!(divides(&s[(i, i)], &s[(i + 1, i + 1)]), "{s}");
                }
            }
            if r == c {
                let prod: BigInt = (0..n).map(|i| s[(i, i)].clone()).product();
                assert_eq!(prod, bareiss_det(&a).abs());
            }
            // d₁ is the gcd of all entries
            let g = a.data.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            assert_eq!(s[(0, 0)], g);
        }
    }

    #[test]
    fn index_examples() {
        assert_eq!(Sublattice::diagonal(&[3]).unwrap().index(), BigInt::from(3));
        assert_eq!(Sublattice::full(4).index(), BigInt::one());
        let l = Sublattice::diagonal(&[2, 3]).unwrap();
        assert_eq!(l.index(), BigInt::from(6));
        // count residues in [0,2)×[0,3) that are pairwise inequivalent
        let mut reps: Vec<Vec<BigInt>> = Vec::new();
        for x in 0..2 {
            for y in 0..3 {
                let r = l.reduce(&v(&[x, y])).unwrap();
                if !reps.contains(&r) {
                    reps.push(r);
                }
            }
        }
        assert_eq!(reps.len(), 6);
        assert!(matches!(
            Sublattice::new(m(&[&[1, 2], &[2, 4]])),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn index_equals_det() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 3, 3, 6);
            let det = bareiss_det(&a);
            if det.is_zero() {
                continue;
            }
            assert_eq!(Sublattice::new(a).unwrap().index(), det.abs());
        }
    }

    #[test]
    fn coset_examples() {
        let c = Coset::parse("2 | 3").unwrap();
        assert!(c.contains(&v(&[5])).unwrap());
        assert!(!c.contains(&v(&[0])).unwrap());
        assert!(c.contains(&v(&[-1])).unwrap());
        assert!(c.contains(&v(&[1, 2])).is_err());
        assert_eq!(c.to_string(), "2 | 3");
        let c = Coset::parse("0 0 | 2 0; 0 3").unwrap();
        assert_eq!(c.to_string(), "0 0 | 2 0; 0 3");
        assert_eq!(Coset::parse("7 | 3").unwrap(), Coset::parse("1 | 3").unwrap());
    }

    #[test]
    fn coset_contains_matches_residue_table() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..60 {
            let a = random_matrix(&mut rng, 2, 2, 4);
            if bareiss_det(&a).is_zero() {
                continue;
            }
            let l = Sublattice::new(a.clone()).unwrap();
            let off = v(&[rng.gen_range(-5..5), rng.gen_range(-5..5)]);
            let c = Coset::new(off.clone(), l).unwrap();
            // residue test: d = p − off lies in A·ℤ² iff adj(A)·d ≡ 0 mod det A
            let det = bareiss_det(&a);
            for _ in 0..20 {
                let p = v(&[rng.gen_range(-10..10), rng.gen_range(-10..10)]);
                let d = [&p[0] - &off[0], &p[1] - &off[1]];
                let adj = [
                    &a[(1, 1)] * &d[0] - &a[(0, 1)] * &d[1],
                    -&a[(1, 0)] * &d[0] + &a[(0, 0)] * &d[1],
                ];
                let brute = adj.iter().all(|x| x.is_multiple_of(&det));
                assert_eq!(c.contains(&p).unwrap(), brute, "{a} {p:?}");
            }
        }
    }

    #[test]
    fn intersect_examples() {
        let two = Sublattice::diagonal(&[2]).unwrap();
        let three = Sublattice::diagonal(&[3]).unwrap();
        assert_eq!(intersect(&[two.clone(), three]).unwrap(), Sublattice::diagonal(&[6]).unwrap());
        assert_eq!(intersect(&[two.clone(), two.clone()]).unwrap(), two);
    }

    #[test]
    fn intersect_random_pairs() {
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..60 {
            let a = random_matrix(&mut rng, 2, 2, 5);
            let b = random_matrix(&mut rng, 2, 2, 5);
            if bareiss_det(&a).is_zero() || bareiss_det(&b).is_zero() {
                continue;
            }
            let (la, lb) = (Sublattice::new(a).unwrap(), Sublattice::new(b).unwrap());
            let w = intersect(&[la.clone(), lb.clone()]).unwrap();
            let prod = la.index() * lb.index();
            assert!(prod.is_multiple_of(&w.index()));
            for c in w.hermite_basis().columns() {
                assert!(la.contains(&c).unwrap() && lb.contains(&c).unwrap());
            }
            for _ in 0..50 {
                let p = v(&[rng.gen_range(-30..30), rng.gen_range(-30..30)]);
                let both = la.contains(&p).unwrap() && lb.contains(&p).unwrap();
                assert_eq!(w.contains(&p).unwrap(), both);
            }
        }
    }

    #[test]
    fn cover_examples() {
        let c = |s: &str| Coset::parse(s).unwrap();
        assert_eq!(covers(&[c("0 | 2"), c("1 | 2")], 1).unwrap(), Covering::Covered);
        assert_eq!(covers(&[c("2 | 3")], 1).unwrap(), Covering::Uncovered(v(&[0])));
        assert_eq!(covers(&[c("0 | 2"), c("1 | 4"), c("3 | 4")], 1).unwrap(), Covering::Covered);
        assert_eq!(covers(&[], 2).unwrap(), Covering::Uncovered(v(&[0, 0])));
        assert_eq!(covers(&[c("0 | 2"), c("1 | 4")], 1).unwrap(), Covering::Uncovered(v(&[3])));
        assert!(covers(&[c("0 | 2")], 2).is_err());
    }

    #[test]
    fn closure_coset_examples() {
        let f = ClosureEmbedding::from_images(&["c1"], &["z2"], &[("c2", "c1^2 z2^3")]).unwrap();
        let c = closure_coset(&f).unwrap();
        assert_eq!(c.to_string(), "2 | 3");
        assert_eq!(c.lattice().index(), BigInt::from(3));
        assert!(extendable(&v(&[5]), &f).unwrap());
        assert!(!extendable(&v(&[4]), &f).unwrap());

        let id = ClosureEmbedding::from_images(&[], &["z1", "z2"], &[("a1", "z1"), ("a2", "z2")]).unwrap();
        assert_eq!(closure_coset(&id).unwrap(), Coset::new(v(&[0, 0]), Sublattice::full(2)).unwrap());
        assert!(extendable(&v(&[0, 0]), &id).unwrap());

        let diag =
            ClosureEmbedding::from_images(&[], &["z1", "z2"], &[("a1", "z1^2"), ("a2", "z2^3")]).unwrap();
        let c = closure_coset(&diag).unwrap();
        assert_eq!(c.lattice(), &Sublattice::diagonal(&[2, 3]).unwrap());
        assert!(c.offset().iter().all(Zero::is_zero));

        assert!(ClosureEmbedding::from_images(&[], &["z1"], &[("a1", "1")]).is_err());
    }

    /// Solves `Bᵀ·y = p − K` over ℚ by Cramer's rule and checks integrality.
    fn extendable_oracle(p: &[BigInt], f: &ClosureEmbedding) -> bool {
        let bt = f.free_block().transpose();
        let n = bt.rows();
        let rhs: Vec<BigInt> = p.iter().zip(f.fixed_exponents()).map(|(a, k)| a - k).collect();
        let det = bareiss_det(&bt);
        (0..n).all(|j| {
            let mut mj = bt.clone();
            for i in 0..n {
                mj[(i, j)] = rhs[i].clone();
            }
            bareiss_det(&mj).is_multiple_of(&det)
        })
    }

    #[test]
    fn extendable_matches_cramer_oracle() {
        let mut rng = StdRng::seed_from_u64(8);
        let mut checked = 0;
        while checked < 100 {
            let mut rows: Vec<Vec<i64>> = vec![(0..2).map(|_| rng.gen_range(-4..=4)).collect()];
            rows.extend((0..2).map(|_| (0..2).map(|_| rng.gen_range(-4..=4)).collect::<Vec<_>>()));
            let mat = IntMatrix::from_rows(&rows).unwrap();
            let Ok(f) = ClosureEmbedding::new(
                vec!["c".into()],
                vec!["a1".into(), "a2".into()],
                vec!["z1".into(), "z2".into()],
                mat,
            ) else {
                continue;
            };
            checked += 1;
            let coset = closure_coset(&f).unwrap();
            for _ in 0..10 {
                let p = v(&[rng.gen_range(-20..20), rng.gen_range(-20..20)]);
                let got = extendable(&p, &f).unwrap();
                assert_eq!(got, extendable_oracle(&p, &f));
                // depends only on the residue of p modulo U_f
                let shifted: Vec<BigInt> = p
                    .iter()
                    .zip(coset.lattice().hermite_basis().column(1))
                    .map(|(a, b)| a + b * 3)
                    .collect();
                assert_eq!(extendable(&shifted, &f).unwrap(), got);
            }
        }
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let a = m(&[&[1, 5], &[0, 1]]);
        assert_eq!(a.unimodular_inverse().unwrap(), m(&[&[1, -5], &[0, 1]]));
        assert!(m(&[&[2, 0], &[0, 1]]).unimodular_inverse().is_err());
    }

    #[test]
    fn matrix_text_roundtrip() {
        let a = IntMatrix::parse("1 -2; 3 4").unwrap();
        assert_eq!(a.to_string(), "1 -2; 3 4");
        assert!(IntMatrix::parse("1 2; 3").is_err());
    }
}
