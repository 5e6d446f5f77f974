//! Dense and sparse exact linear algebra over `F_p`, and subspaces in reduced echelon form.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::Fp;

/// Dense row-major matrix over `F_p`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub fp: Fp,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} mod {}", self.rows, self.cols, self.fp.p())?;
        for r in 0..self.rows {
            let row: Vec<i64> = (0..self.cols).map(|c| self.fp.to_signed(self[(r, c)])).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = u64;
    fn index(&self, (r, c): (usize, usize)) -> &u64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut u64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(fp: Fp, rows: usize, cols: usize) -> Self {
        Matrix { fp, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(fp: Fp, n: usize) -> Self {
        let mut m = Self::zeros(fp, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(fp: Fp, rows: &[Vec<u64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| x % fp.p()));
        }
        Matrix { fp, rows: r, cols: c, data }
    }

    pub fn from_i64(fp: Fp, rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| fp.from_i64(x)).collect()).collect();
        Self::from_rows(fp, &rows)
    }

    pub fn from_flat(fp: Fp, rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { fp, rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_flat(&self) -> &[u64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.fp, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let fp = self.fp;
        let mut out = Matrix::zeros(fp, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    if b != 0 {
                        out.data[base + j] = fp.add(out.data[base + j], fp.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.fp.add(a, b)).collect();
        Matrix { data, ..*self }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.fp.sub(a, b)).collect();
        Matrix { data, ..*self }
    }

    pub fn scale(&self, s: u64) -> Matrix {
        let data = self.data.iter().map(|&a| self.fp.mul(a, s)).collect();
        Matrix { data, ..*self }
    }

    pub fn trace(&self) -> u64 {
        (0..self.rows.min(self.cols)).fold(0, |acc, i| self.fp.add(acc, self[(i, i)]))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let fp = self.fp;
        let mut out = Matrix::zeros(fp, self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = fp.mul(a, other[(k, l)]);
                    }
                }
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let fp = self.fp;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m[(i, c)] != 0) else { continue };
            if piv != r {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, r * m.cols + j);
                }
            }
            let inv = fp.inv(m[(r, c)]);
            for j in 0..m.cols {
                m[(r, j)] = fp.mul(m[(r, j)], inv);
            }
            for i in 0..m.rows {
                if i != r && m[(i, c)] != 0 {
                    let f = m[(i, c)];
                    for j in 0..m.cols {
                        let v = fp.mul(f, m[(r, j)]);
                        m[(i, j)] = fp.sub(m[(i, j)], v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let fp = self.fp;
        let (m, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0; self.cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = fp.neg(m[(r, free)]);
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.fp, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = 1;
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(self.fp, n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)];
            }
        }
        Some(inv)
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(0, |acc, (&a, &b)| self.fp.add(acc, self.fp.mul(a, b))))
            .collect()
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        assert_eq!(self.rows, self.cols, "sparse matrices are square");
        let entries = self.data.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (i, v)).collect();
        SparseMatrix { n: self.rows, entries }
    }

    /// Characteristic polynomial `det(xI - self)`, coefficients from constant term up.
    pub fn charpoly(&self) -> Vec<u64> {
        assert_eq!(self.rows, self.cols);
        let fp = self.fp;
        let n = self.rows;
        let mut h = self.clone();
        // Reduce to upper Hessenberg form by similarity.
        for c in 0..n.saturating_sub(2) {
            let Some(piv) = (c + 1..n).find(|&i| h[(i, c)] != 0) else { continue };
            if piv != c + 1 {
                for j in 0..n {
                    h.data.swap(piv * n + j, (c + 1) * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + piv, i * n + c + 1);
                }
            }
            let inv = fp.inv(h[(c + 1, c)]);
            for i in c + 2..n {
                let f = fp.mul(h[(i, c)], inv);
                if f == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = fp.mul(f, h[(c + 1, j)]);
                    h[(i, j)] = fp.sub(h[(i, j)], v);
                }
                for k in 0..n {
                    let v = fp.mul(f, h[(k, i)]);
                    h[(k, c + 1)] = fp.add(h[(k, c + 1)], v);
                }
            }
        }
        // p_k(x) = (x - h_kk) p_{k-1}(x) - sum_{i<k} h_ik (prod_{j=i+1}^{k} h_{j,j-1}) p_{i-1}(x)
        let mut ps: Vec<Vec<u64>> = vec![vec![1]];
        for k in 0..n {
            let mut next = poly::mul(fp, &ps[k], &[fp.neg(h[(k, k)]), 1]);
            let mut prod = 1;
            for i in (0..k).rev() {
                prod = fp.mul(prod, h[(i + 1, i)]);
                let coef = fp.mul(prod, h[(i, k)]);
                if coef != 0 {
                    let term = poly::scale(fp, &ps[i], coef);
                    next = poly::sub(fp, &next, &term);
                }
            }
            ps.push(next);
        }
        ps.pop().unwrap()
    }
}

/// Square sparse matrix; entries keyed by flat index `row * n + col`, sorted, nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseMatrix {
    pub n: usize,
    pub entries: Vec<(usize, u64)>,
}

impl SparseMatrix {
    pub fn zero(n: usize) -> Self {
        SparseMatrix { n, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { n, entries: (0..n).map(|i| (i * n + i, 1)).collect() }
    }

    pub fn from_triplets(fp: Fp, n: usize, mut t: Vec<(usize, usize, u64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, u64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            let k = r * n + c;
            match entries.last_mut() {
                Some(last) if last.0 == k => last.1 = fp.add(last.1, v),
                _ => entries.push((k, v % fp.p())),
            }
        }
        entries.retain(|&(_, v)| v != 0);
        SparseMatrix { n, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        let k = r * self.n + c;
        self.entries.binary_search_by_key(&k, |e| e.0).map_or(0, |i| self.entries[i].1)
    }

    fn row_range(&self, r: usize) -> &[(usize, u64)] {
        let lo = self.entries.partition_point(|e| e.0 < r * self.n);
        let hi = self.entries.partition_point(|e| e.0 < (r + 1) * self.n);
        &self.entries[lo..hi]
    }

    pub fn mul(&self, other: &SparseMatrix, fp: Fp) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut acc: Vec<(usize, usize, u64)> = Vec::new();
        for &(k, a) in &self.entries {
            let (r, m) = (k / n, k % n);
            for &(k2, b) in other.row_range(m) {
                acc.push((r, k2 % n, fp.mul(a, b)));
            }
        }
        SparseMatrix::from_triplets(fp, n, acc)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let n = self.n;
        let mut entries: Vec<(usize, u64)> = self.entries.iter().map(|&(k, v)| ((k % n) * n + k / n, v)).collect();
        entries.sort_unstable_by_key(|e| e.0);
        SparseMatrix { n, entries }
    }

    pub fn scale(&self, s: u64, fp: Fp) -> SparseMatrix {
        if s.is_multiple_of(fp.p()) {
            return SparseMatrix::zero(self.n);
        }
        SparseMatrix { n: self.n, entries: self.entries.iter().map(|&(k, v)| (k, fp.mul(v, s))).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: u64, other: &SparseMatrix, fp: Fp) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(ka, va)), Some(&(kb, vb))) if ka == kb => {
                    out.push((ka, fp.add(va, fp.mul(s, vb))));
                    i += 1;
                    j += 1;
                }
                (Some(&(ka, va)), Some(&(kb, _))) if ka < kb => {
                    out.push((ka, va));
                    i += 1;
                }
                (Some(&(ka, va)), None) => {
                    out.push((ka, va));
                    i += 1;
                }
                (_, Some(&(kb, vb))) => {
                    out.push((kb, fp.mul(s, vb)));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        out.retain(|&(_, v)| v != 0);
        SparseMatrix { n: self.n, entries: out }
    }

    pub fn trace(&self, fp: Fp) -> u64 {
        let n = self.n;
        self.entries.iter().filter(|(k, _)| k / n == k % n).fold(0, |a, &(_, v)| fp.add(a, v))
    }

    pub fn to_dense(&self, fp: Fp) -> Matrix {
        let mut m = Matrix::zeros(fp, self.n, self.n);
        for &(k, v) in &self.entries {
            m.data[k] = v;
        }
        m
    }

    /// Flattened vector view (row-major).
    pub fn as_vec(&self) -> SparseVec {
        SparseVec(self.entries.clone())
    }

    pub fn from_vec(n: usize, v: SparseVec) -> Self {
        SparseMatrix { n, entries: v.0 }
    }
}

/// Sparse vector: sorted `(index, value)` pairs with nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec(pub Vec<(usize, u64)>);

impl SparseVec {
    pub fn from_dense(v: &[u64]) -> Self {
        SparseVec(v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u64> {
        let mut out = vec![0; dim];
        for &(i, x) in &self.0 {
            out[i] = x;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0.binary_search_by_key(&i, |e| e.0).map_or(0, |k| self.0[k].1)
    }

    pub fn scale(&self, s: u64, fp: Fp) -> SparseVec {
        if s.is_multiple_of(fp.p()) {
            return SparseVec::default();
        }
        SparseVec(self.0.iter().map(|&(i, x)| (i, fp.mul(x, s))).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: u64, other: &SparseVec, fp: Fp) -> SparseVec {
        let a = SparseMatrix { n: 0, entries: self.0.clone() };
        let b = SparseMatrix { n: 0, entries: other.0.clone() };
        SparseVec(a.axpy(s, &b, fp).entries)
    }
}

/// Rank of a family of sparse vectors by forward elimination on leading entries.
pub fn echelon_rank<I: IntoIterator<Item = SparseVec>>(fp: Fp, vs: I) -> usize {
    let mut lead: HashMap<usize, SparseVec> = HashMap::new();
    for mut v in vs {
        while let Some(&(c, x)) = v.0.first() {
            match lead.get(&c) {
                Some(row) => v = v.axpy(fp.neg(x), row, fp),
                None => {
                    let inv = fp.inv(x);
                    lead.insert(c, v.scale(inv, fp));
                    break;
                }
            }
        }
    }
    lead.len()
}

/// Subspace of `F_p^dim` kept as a reduced row echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    fp: Fp,
    dim: usize,
    rows: Vec<SparseVec>,
    pivots: Vec<usize>,
    row_of_pivot: Vec<u32>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.fp == other.fp && self.dim == other.dim && self.sorted_rows() == other.sorted_rows()
    }
}

impl Eq for Subspace {}

const NO_ROW: u32 = u32::MAX;

impl Subspace {
    pub fn zero(fp: Fp, dim: usize) -> Self {
        Subspace { fp, dim, rows: Vec::new(), pivots: Vec::new(), row_of_pivot: vec![NO_ROW; dim] }
    }

    pub fn full(fp: Fp, dim: usize) -> Self {
        Subspace {
            fp,
            dim,
            rows: (0..dim).map(|i| SparseVec(vec![(i, 1)])).collect(),
            pivots: (0..dim).collect(),
            row_of_pivot: (0..dim as u32).collect(),
        }
    }

    pub fn span<I: IntoIterator<Item = SparseVec>>(fp: Fp, dim: usize, vs: I) -> Self {
        let mut s = Subspace::zero(fp, dim);
        for v in vs {
            s.insert(&v);
        }
        s
    }

    /// Span of vectors with pairwise disjoint supports.
    pub fn from_disjoint<I: IntoIterator<Item = SparseVec>>(fp: Fp, dim: usize, vs: I) -> Self {
        let mut s = Subspace::zero(fp, dim);
        for v in vs {
            let Some(&(piv, lead)) = v.0.first() else { continue };
            let v = if lead == 1 { v } else { v.scale(fp.inv(lead), fp) };
            debug_assert!(v.0.iter().all(|&(k, _)| s.row_of_pivot[k] == NO_ROW));
            s.row_of_pivot[piv] = s.rows.len() as u32;
            s.rows.push(v);
            s.pivots.push(piv);
        }
        s
    }

    pub fn span_dense(fp: Fp, dim: usize, vs: &[Vec<u64>]) -> Result<Self> {
        let mut s = Subspace::zero(fp, dim);
        for v in vs {
            if v.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "vector of length {} in ambient dimension {dim}",
                    v.len()
                )));
            }
            s.insert(&SparseVec::from_dense(v));
        }
        Ok(s)
    }

    pub fn fp(&self) -> Fp {
        self.fp
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    fn sorted_rows(&self) -> Vec<&SparseVec> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_unstable_by_key(|&i| self.pivots[i]);
        idx.into_iter().map(|i| &self.rows[i]).collect()
    }

    /// Canonical basis rows, ordered by pivot column.
    pub fn basis(&self) -> impl Iterator<Item = &SparseVec> {
        self.sorted_rows().into_iter()
    }

    /// Basis row whose pivot is column `c`, if any.
    #[inline]
    pub fn pivot_row(&self, c: usize) -> Option<&SparseVec> {
        match self.row_of_pivot[c] {
            NO_ROW => None,
            r => Some(&self.rows[r as usize]),
        }
    }

    /// Residual of `v` after elimination against the basis; zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let fp = self.fp;
        let mut terms: Vec<(usize, u64)> = Vec::new();
        let mut hit = false;
        for &(i, x) in &v.0 {
            if let Some(row) = self.pivot_row(i) {
                if !hit {
                    terms.extend_from_slice(&v.0);
                    hit = true;
                }
                let s = fp.neg(x);
                terms.extend(row.0.iter().map(|&(j, y)| (j, fp.mul(s, y))));
            }
        }
        if !hit {
            return v.clone();
        }
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(usize, u64)> = Vec::with_capacity(terms.len());
        for (j, y) in terms {
            match out.last_mut() {
                Some(last) if last.0 == j => last.1 = fp.add(last.1, y),
                _ => out.push((j, y)),
            }
        }
        out.retain(|&(_, y)| y != 0);
        SparseVec(out)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn contains_dense(&self, v: &[u64]) -> Result<bool> {
        self.check_len(v.len())?;
        Ok(self.contains(&SparseVec::from_dense(v)))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::InvalidParameter(format!("dimension mismatch: {len} vs ambient {}", self.dim)));
        }
        Ok(())
    }

    /// Adds `v`; returns whether the subspace grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let fp = self.fp;
        let r = self.reduce(v);
        let Some(&(piv, lead)) = r.0.first() else { return false };
        let r = if lead == 1 { r } else { r.scale(fp.inv(lead), fp) };
        for row in self.rows.iter_mut() {
            let c = row.get(piv);
            if c != 0 {
                *row = row.axpy(fp.neg(c), &r, fp);
            }
        }
        self.row_of_pivot[piv] = self.rows.len() as u32;
        self.rows.push(r);
        self.pivots.push(piv);
        true
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_len(other.dim)?;
        let mut s = self.clone();
        for v in &other.rows {
            s.insert(v);
        }
        Ok(s)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.check_len(other.dim)?;
        let fp = self.fp;
        let a = &self.rows;
        let b = &other.rows;
        if a.is_empty() || b.is_empty() {
            return Ok(Subspace::zero(fp, self.dim));
        }
        // Solve sum x_i a_i - sum y_j b_j = 0.
        let mut m = Matrix::zeros(fp, self.dim, a.len() + b.len());
        for (i, v) in a.iter().enumerate() {
            for &(k, x) in &v.0 {
                m[(k, i)] = x;
            }
        }
        for (j, v) in b.iter().enumerate() {
            for &(k, x) in &v.0 {
                m[(k, a.len() + j)] = fp.neg(x);
            }
        }
        let mut out = Subspace::zero(fp, self.dim);
        for null in m.nullspace() {
            let mut acc = SparseVec::default();
            for (i, v) in a.iter().enumerate() {
                if null[i] != 0 {
                    acc = acc.axpy(null[i], v, fp);
                }
            }
            out.insert(&acc);
        }
        Ok(out)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.dim == other.dim && self.rows.iter().all(|v| other.contains(v))
    }

    pub fn dense_basis(&self) -> Vec<Vec<u64>> {
        self.basis().map(|v| v.to_dense(self.dim)).collect()
    }
}

/// Result of solving `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Infeasible,
    Solutions { particular: Vec<u64>, nullspace: Vec<Vec<u64>> },
}

pub fn solve_linear(a: &Matrix, b: &[u64]) -> Result<Solution> {
    if b.len() != a.rows() {
        return Err(Error::InvalidParameter(format!("right-hand side of length {} for {} rows", b.len(), a.rows())));
    }
    let fp = a.fp;
    let mut aug = Matrix::zeros(fp, a.rows(), a.cols() + 1);
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            aug[(r, c)] = a[(r, c)];
        }
        aug[(r, a.cols())] = b[r] % fp.p();
    }
    let (red, pivots) = aug.rref();
    if pivots.last() == Some(&a.cols()) {
        return Ok(Solution::Infeasible);
    }
    let mut particular = vec![0; a.cols()];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = red[(r, a.cols())];
    }
    Ok(Solution::Solutions { particular, nullspace: a.nullspace() })
}

/// Polynomials over `F_p` as coefficient vectors, constant term first.
pub mod poly {
    use crate::field::Fp;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(fp: Fp, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = fp.add(out[i + j], fp.mul(x, y));
            }
        }
        trim(out)
    }

    pub fn scale(fp: Fp, a: &[u64], s: u64) -> Vec<u64> {
        trim(a.iter().map(|&x| fp.mul(x, s)).collect())
    }

    pub fn sub(fp: Fp, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| fp.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0))).collect())
    }

    /// Remainder of `a` modulo nonzero `m`.
    pub fn rem(fp: Fp, a: &[u64], m: &[u64]) -> Vec<u64> {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        let lead_inv = fp.inv(*m.last().expect("division by zero polynomial"));
        while r.len() >= m.len() {
            let shift = r.len() - m.len();
            let f = fp.mul(*r.last().unwrap(), lead_inv);
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = fp.sub(r[shift + i], fp.mul(f, c));
            }
            r = trim(r);
        }
        r
    }

    pub fn divide(fp: Fp, a: &[u64], m: &[u64]) -> Vec<u64> {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        if r.len() < m.len() {
            return Vec::new();
        }
        let lead_inv = fp.inv(*m.last().unwrap());
        let mut q = vec![0; r.len() - m.len() + 1];
        while r.len() >= m.len() {
            let shift = r.len() - m.len();
            let f = fp.mul(*r.last().unwrap(), lead_inv);
            q[shift] = f;
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = fp.sub(r[shift + i], fp.mul(f, c));
            }
            r = trim(r);
        }
        trim(q)
    }

    pub fn monic(fp: Fp, a: &[u64]) -> Vec<u64> {
        let a = trim(a.to_vec());
        match a.last() {
            Some(&l) => scale(fp, &a, fp.inv(l)),
            None => a,
        }
    }

    pub fn gcd(fp: Fp, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(fp, &a, &b);
            a = b;
            b = r;
        }
        monic(fp, &a)
    }

    /// `base^e mod m`.
    pub fn powmod(fp: Fp, base: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
        let mut result = rem(fp, &[1], m);
        let mut b = rem(fp, base, m);
        while e > 0 {
            if e & 1 == 1 {
                result = rem(fp, &mul(fp, &result, &b), m);
            }
            b = rem(fp, &mul(fp, &b, &b), m);
            e >>= 1;
        }
        result
    }

    /// Distinct roots in `F_p` of a nonzero polynomial, sorted.
    pub fn roots(fp: Fp, f: &[u64]) -> Vec<u64> {
        let f = monic(fp, f);
        if f.len() <= 1 {
            return Vec::new();
        }
        // g = gcd(f, x^p - x) is the product of the distinct linear factors.
        let xp = powmod(fp, &[0, 1], fp.p(), &f);
        let g = gcd(fp, &f, &sub(fp, &xp, &[0, 1]));
        let mut out = Vec::new();
        split_roots(fp, &g, &mut out);
        out.sort_unstable();
        out
    }

    fn split_roots(fp: Fp, g: &[u64], out: &mut Vec<u64>) {
        match g.len() {
            0 | 1 => {}
            2 => out.push(fp.neg(fp.mul(g[0], fp.inv(g[1])))),
            _ => {
                // Deterministic equal-degree splitting: gcd(g, (x + a)^((p-1)/2) - 1) for a = 0, 1, ...
                for a in 0..fp.p() {
                    let h = powmod(fp, &[a, 1], (fp.p() - 1) / 2, g);
                    let d = gcd(fp, g, &sub(fp, &h, &[1]));
                    if d.len() > 1 && d.len() < g.len() {
                        let q = monic(fp, &divide(fp, g, &d));
                        split_roots(fp, &d, out);
                        split_roots(fp, &q, out);
                        return;
                    }
                }
                unreachable!("squarefree split polynomial failed to split");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f13() -> Fp {
        Fp::new(13).unwrap()
    }

    #[test]
    fn full_spans_agree() {
        let fp = f13();
        let a = Subspace::span_dense(fp, 2, &[vec![1, 0], vec![0, 1]]).unwrap();
        let b = Subspace::span_dense(fp, 2, &[vec![1, 1], vec![1, 12]]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn axis_intersection_is_zero() {
        let fp = f13();
        let a = Subspace::span_dense(fp, 2, &[vec![1, 0]]).unwrap();
        let b = Subspace::span_dense(fp, 2, &[vec![0, 1]]).unwrap();
        assert!(a.intersection(&b).unwrap().is_zero());
    }

    #[test]
    fn membership() {
        let fp = f13();
        let a = Subspace::span_dense(fp, 2, &[vec![1, 1]]).unwrap();
        assert!(a.contains_dense(&[2, 2]).unwrap());
        assert!(!a.contains_dense(&[2, 3]).unwrap());
        assert!(a.contains_dense(&[1, 1, 1]).is_err());
    }

    #[test]
    fn solve_cases() {
        let fp = f13();
        let id = Matrix::identity(fp, 3);
        assert_eq!(
            solve_linear(&id, &[1, 2, 3]).unwrap(),
            Solution::Solutions { particular: vec![1, 2, 3], nullspace: vec![] }
        );
        let z = Matrix::zeros(fp, 2, 2);
        assert_eq!(solve_linear(&z, &[1, 0]).unwrap(), Solution::Infeasible);
        let r1 = Matrix::from_rows(fp, &[vec![1, 2], vec![2, 4]]);
        match solve_linear(&r1, &[3, 6]).unwrap() {
            Solution::Solutions { particular, nullspace } => {
                assert_eq!(r1.apply(&particular), vec![3, 6]);
                assert_eq!(nullspace.len(), 1);
                assert_eq!(r1.apply(&nullspace[0]), vec![0, 0]);
            }
            Solution::Infeasible => panic!("consistent system reported infeasible"),
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let fp = f13();
        let m = Matrix::from_i64(fp, &[vec![0, 1], vec![-1, 0]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(fp, 2));
        assert!(Matrix::from_rows(fp, &[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn charpoly_and_roots() {
        let fp = f13();
        // diag(2, 3, 3) conjugated by a unipotent matrix
        let d = Matrix::from_rows(fp, &[vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 3]]);
        let p = Matrix::from_rows(fp, &[vec![1, 4, 5], vec![0, 1, 7], vec![0, 0, 1]]);
        let m = p.mul(&d).mul(&p.inverse().unwrap());
        let cp = m.charpoly();
        // (x-2)(x-3)^2 = x^3 - 8x^2 + 21x - 18
        assert_eq!(cp, vec![fp.from_i64(-18), 21 % 13, fp.from_i64(-8), 1]);
        assert_eq!(poly::roots(fp, &cp), vec![2, 3]);
        // x^2 + 1 has roots +-5 mod 13
        assert_eq!(poly::roots(fp, &[1, 0, 1]), vec![5, 8]);
        // x^2 - 2 is irreducible mod 13
        assert!(poly::roots(fp, &[11, 0, 1]).is_empty());
    }

    #[test]
    fn sparse_dense_products_agree() {
        let fp = f13();
        let a = Matrix::from_rows(fp, &[vec![1, 2, 0], vec![0, 0, 3], vec![4, 0, 5]]);
        let b = Matrix::from_rows(fp, &[vec![0, 1, 0], vec![7, 0, 0], vec![0, 0, 2]]);
        assert_eq!(a.to_sparse().mul(&b.to_sparse(), fp).to_dense(fp), a.mul(&b));
        assert_eq!(a.to_sparse().transpose().to_dense(fp), a.transpose());
    }
}
