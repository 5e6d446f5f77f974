//! Concretely realized graded matrix algebras `F(G, D, kappa)`, grading verification,
//! elementary gradings, embeddings and isomorphism fingerprints.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, RootField};
use crate::group::{CosetTable, Elem, FinAbGroup, Subgroup};
use crate::linalg::{echelon_rank, poly, Matrix, SparseMatrix, SparseVec, Subspace};
use crate::pauli::PauliAlgebra;

/// Multiplicities `kappa(A)` of the cosets of `T`, indexed in canonical coset order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaMap {
    pub values: Vec<usize>,
    table: Arc<CosetTable>,
}

impl KappaMap {
    pub fn new(t: &Subgroup, values: Vec<usize>) -> Result<Self> {
        Self::with_cosets(&Arc::new(CosetTable::new(t, None)?), values)
    }

    /// Reuses an unpaired canonical coset table.
    pub fn with_cosets(table: &Arc<CosetTable>, values: Vec<usize>) -> Result<Self> {
        if table.pairing.is_some() || table.gamma.iter().zip(&table.cosets).any(|(g, c)| *g != c[0]) {
            return Err(Error::InvalidParameter("kappa needs the canonical unpaired coset table".into()));
        }
        if values.len() != table.len() {
            return Err(Error::InvalidParameter(format!(
                "kappa has {} entries, G/T has {} cosets",
                values.len(),
                table.len()
            )));
        }
        Ok(KappaMap { values, table: table.clone() })
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.table.subgroup
    }

    pub fn total(&self) -> usize {
        self.values.iter().sum()
    }

    pub fn cosets(&self) -> &Arc<CosetTable> {
        &self.table
    }

    /// `kappa^g` with `kappa^g(A + g) = kappa(A)`.
    pub fn shift(&self, g: Elem) -> KappaMap {
        let mut values = vec![0; self.values.len()];
        for (a, &k) in self.values.iter().enumerate() {
            values[self.table.shift(a, g)] = k;
        }
        KappaMap { values, ..self.clone() }
    }

    /// `kappa~(A) = kappa(A^{-1})`.
    pub fn reflect(&self) -> KappaMap {
        let values = (0..self.values.len()).map(|a| self.values[self.table.inverse(a)]).collect();
        KappaMap { values, ..self.clone() }
    }

    /// Pointwise `self <= other`.
    pub fn dominated_by(&self, other: &KappaMap) -> bool {
        self.subgroup() == other.subgroup() && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

/// A family of subspaces of `M_n(F)`, one per degree, each given by a spanning set.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n: usize,
    pub fp: Fp,
    /// `(degree, spanning matrices)`, sorted by degree.
    pub components: Vec<(Elem, Vec<SparseMatrix>)>,
}

impl Decomposition {
    pub fn component(&self, g: Elem) -> Option<&[SparseMatrix]> {
        self.components.iter().find(|(d, _)| *d == g).map(|(_, v)| v.as_slice())
    }

    pub fn subspace(&self, g: Elem) -> Subspace {
        let dim = self.n * self.n;
        match self.component(g) {
            Some(span) => Subspace::span(self.fp, dim, span.iter().map(SparseMatrix::as_vec)),
            None => Subspace::zero(self.fp, dim),
        }
    }

    /// Applies `f` to every spanning element.
    pub fn map(&self, f: impl Fn(&SparseMatrix) -> SparseMatrix) -> Decomposition {
        Decomposition {
            n: self.n,
            fp: self.fp,
            components: self.components.iter().map(|(g, v)| (*g, v.iter().map(&f).collect())).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Product {
    /// `xy`
    Associative,
    /// `xy - yx`
    Lie,
}

/// Closure violation: `x_i in U_g`, `y_j in U_h` with product outside `U_{gh}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub g: Elem,
    pub h: Elem,
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectSumFailure {
    pub sum_of_dims: usize,
    pub dim_of_sum: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingReport {
    pub direct_sum_failure: Option<DirectSumFailure>,
    pub violations: Vec<Violation>,
    /// Dimension of the sum of all components.
    pub total_dim: usize,
    /// `(degree, dimension)` of every component.
    pub dims: Vec<(Elem, usize)>,
}

impl GradingReport {
    pub fn is_valid(&self) -> bool {
        self.direct_sum_failure.is_none() && self.violations.is_empty()
    }
}

struct Element {
    comp: usize,
    local: usize,
    start: usize,
    end: usize,
    lead_inv: u64,
}

fn arena_pos(e: &(u32, u32, u64), n: usize) -> usize {
    e.0 as usize * n + e.1 as usize
}

/// Compressed lists of the elements touching each row (or column).
struct Incidence {
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl Incidence {
    fn get(&self, i: usize) -> &[u32] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }
}

fn incidence(
    n: usize,
    elems: &[Element],
    arena: &[(u32, u32, u64)],
    key: impl Fn(&(u32, u32, u64)) -> u32,
) -> Incidence {
    let mut last = vec![u32::MAX; n];
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (i, e) in elems.iter().enumerate() {
        for en in &arena[e.start..e.end] {
            let k = key(en) as usize;
            if last[k] != i as u32 {
                last[k] = i as u32;
                pairs.push((k as u32, i as u32));
            }
        }
    }
    let mut offsets = vec![0usize; n + 1];
    for &(k, _) in &pairs {
        offsets[k as usize + 1] += 1;
    }
    for k in 0..n {
        offsets[k + 1] += offsets[k];
    }
    let mut fill = offsets.clone();
    let mut items = vec![0u32; pairs.len()];
    for (k, i) in pairs {
        items[fill[k as usize]] = i;
        fill[k as usize] += 1;
    }
    Incidence { offsets, items }
}

/// Decomposition packed into one arena of `(row, col, value)` entries.
struct Flat {
    n: usize,
    fp: Fp,
    degrees: Vec<Elem>,
    elems: Vec<Element>,
    arena: Vec<(u32, u32, u64)>,
}

impl Flat {
    fn from_decomposition(d: &Decomposition) -> Flat {
        let n = d.n;
        let mut arena = Vec::new();
        let mut elems = Vec::new();
        for (ci, (_, span)) in d.components.iter().enumerate() {
            for (li, m) in span.iter().enumerate() {
                let start = arena.len();
                arena.extend(m.entries.iter().map(|&(k, v)| ((k / n) as u32, (k % n) as u32, v)));
                elems.push(Element { comp: ci, local: li, start, end: arena.len(), lead_inv: 0 });
            }
        }
        Flat { n, fp: d.fp, degrees: d.components.iter().map(|(g, _)| *g).collect(), elems, arena }
    }
}

/// Checks that the components are independent and that `U_g U_h` (or `[U_g, U_h]`)
/// lies in `U_{gh}`. Every violating pair of spanning elements is reported.
pub fn verify_grading(group: &FinAbGroup, d: &Decomposition, product: Product) -> GradingReport {
    verify_flat(group, Flat::from_decomposition(d), product)
}

fn verify_flat(group: &FinAbGroup, flat: Flat, product: Product) -> GradingReport {
    let Flat { n, fp, degrees, mut elems, arena } = flat;
    let dim = n * n;
    let nc = degrees.len();
    for e in elems.iter_mut() {
        e.lead_inv = arena[e.start..e.end].first().map_or(0, |x| fp.inv(x.2));
    }
    // Element-level ownership of matrix positions; disjoint supports make every
    // spanning set its own echelon basis.
    let mut owner = vec![u32::MAX; dim];
    let mut disjoint = true;
    'own: for (i, e) in elems.iter().enumerate() {
        for x in &arena[e.start..e.end] {
            let k = arena_pos(x, n);
            if owner[k] != u32::MAX {
                disjoint = false;
                break 'own;
            }
            owner[k] = i as u32;
        }
    }
    let mut dims: Vec<(Elem, usize)> = degrees.iter().map(|&g| (g, 0)).collect();
    let subs: Vec<Subspace> = if disjoint {
        for e in &elems {
            if e.end > e.start {
                dims[e.comp].1 += 1;
            }
        }
        Vec::new()
    } else {
        let mut subs: Vec<Subspace> = (0..nc).map(|_| Subspace::zero(fp, dim)).collect();
        for e in &elems {
            let v = SparseVec(arena[e.start..e.end].iter().map(|x| (arena_pos(x, n), x.2)).collect());
            subs[e.comp].insert(&v);
        }
        for (c, s) in subs.iter().enumerate() {
            dims[c].1 = s.rank();
        }
        subs
    };
    let sum_of_dims: usize = dims.iter().map(|&(_, k)| k).sum();
    let total_rank =
        if disjoint { sum_of_dims } else { echelon_rank(fp, subs.iter().flat_map(|s| s.basis().cloned())) };
    let direct_sum_failure =
        (total_rank != sum_of_dims).then_some(DirectSumFailure { sum_of_dims, dim_of_sum: total_rank });

    let mut comp_of_degree: Vec<usize> = vec![usize::MAX; group.order()];
    for (i, &g) in degrees.iter().enumerate() {
        comp_of_degree[g] = i;
    }
    let mut targets = vec![usize::MAX; nc * nc];
    for (i, &g) in degrees.iter().enumerate() {
        for (j, &h) in degrees.iter().enumerate() {
            targets[i * nc + j] = comp_of_degree[group.add(g, h)];
        }
    }
    let by_row = incidence(n, &elems, &arena, |e| e.0);
    let by_col = incidence(n, &elems, &arena, |e| e.1);
    let mut acc = vec![0u64; dim];
    let mut touched: Vec<usize> = Vec::new();
    let mut stamp = vec![u32::MAX; elems.len()];
    let mut cands: Vec<u32> = Vec::new();
    let mut violations = Vec::new();

    let mul_into =
        |x: &[(u32, u32, u64)], y: &[(u32, u32, u64)], add: bool, acc: &mut [u64], touched: &mut Vec<usize>| {
            for &(r, c, a) in x {
                let lo = y.partition_point(|e| e.0 < c);
                for &(r2, k, b) in &y[lo..] {
                    if r2 != c {
                        break;
                    }
                    let q = r as usize * n + k as usize;
                    if acc[q] == 0 {
                        touched.push(q);
                    }
                    let ab = fp.mul(a, b);
                    acc[q] = if add { fp.add(acc[q], ab) } else { fp.sub(acc[q], ab) };
                }
            }
        };

    for (i, x) in elems.iter().enumerate() {
        let xe = &arena[x.start..x.end];
        cands.clear();
        for &(_, c, _) in xe {
            for &j in by_row.get(c as usize) {
                if stamp[j as usize] != i as u32 {
                    stamp[j as usize] = i as u32;
                    cands.push(j);
                }
            }
        }
        if product == Product::Lie {
            for &(r, _, _) in xe {
                for &j in by_col.get(r as usize) {
                    if stamp[j as usize] != i as u32 {
                        stamp[j as usize] = i as u32;
                        cands.push(j);
                    }
                }
            }
        }
        for &j in &cands {
            let j = j as usize;
            if product == Product::Lie && j < i {
                continue;
            }
            let y = &elems[j];
            let ye = &arena[y.start..y.end];
            mul_into(xe, ye, true, &mut acc, &mut touched);
            if product == Product::Lie {
                mul_into(ye, xe, false, &mut acc, &mut touched);
            }
            let target = targets[x.comp * nc + y.comp];
            if disjoint && target != usize::MAX {
                let base = touched.len();
                for t in 0..base {
                    let q = touched[t];
                    let coef = acc[q];
                    if coef == 0 {
                        continue;
                    }
                    let o = &elems[owner[q] as usize];
                    if o.comp != target || arena_pos(&arena[o.start], n) != q {
                        continue;
                    }
                    let s = fp.neg(fp.mul(coef, o.lead_inv));
                    for &(r, c, v) in &arena[o.start..o.end] {
                        let p = r as usize * n + c as usize;
                        if acc[p] == 0 {
                            touched.push(p);
                        }
                        acc[p] = fp.add(acc[p], fp.mul(s, v));
                    }
                }
            } else if target != usize::MAX {
                let sub = &subs[target];
                let base = touched.len();
                for t in 0..base {
                    let q = touched[t];
                    let coef = acc[q];
                    if coef == 0 {
                        continue;
                    }
                    if let Some(row) = sub.pivot_row(q) {
                        let s = fp.neg(coef);
                        for &(col, v) in &row.0 {
                            if acc[col] == 0 {
                                touched.push(col);
                            }
                            acc[col] = fp.add(acc[col], fp.mul(s, v));
                        }
                    }
                }
            }
            let mut bad = false;
            for &q in &touched {
                bad |= acc[q] != 0;
                acc[q] = 0;
            }
            touched.clear();
            if bad {
                let (g, h) = (degrees[x.comp], degrees[y.comp]);
                violations.push(Violation { g, h, x: x.local, y: y.local });
            }
        }
    }
    violations.sort();
    violations.dedup();
    GradingReport { direct_sum_failure, violations, total_dim: total_rank, dims }
}

/// Label of a basis element `E^{A,B}_{i,j}(t)`: row block `(A, i)`, column block `(B, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLabel {
    pub row: usize,
    pub col: usize,
    pub t: Elem,
}

/// `F(G, D, kappa)` realized in `M_n(F)` with `n = |kappa| ell`.
#[derive(Clone, Debug)]
pub struct GradedMatrixAlgebra {
    pub field: RootField,
    pub pauli: Arc<PauliAlgebra>,
    pub table: Arc<CosetTable>,
    pub kappa: KappaMap,
    pub n: usize,
    pub ell: usize,
    /// Blocks `(coset, index)` in layout order.
    pub blocks: Vec<(usize, usize)>,
    first_block: Vec<usize>,
    degrees: Vec<Elem>,
}

impl GradedMatrixAlgebra {
    /// Builds the algebra with the transversal of the canonical (optionally paired) coset table.
    pub fn new(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap, pairing: Option<Elem>) -> Result<Self> {
        let table = match pairing {
            None => kappa.table.clone(),
            Some(_) => Arc::new(CosetTable::new(pauli.support(), pairing)?),
        };
        Self::with_table(pauli, kappa, table)
    }

    pub fn with_table(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap, table: Arc<CosetTable>) -> Result<Self> {
        if kappa.subgroup() != pauli.support() || table.subgroup != *pauli.support() {
            return Err(Error::InvalidParameter("kappa, transversal and D must share the support T".into()));
        }
        if kappa.total() == 0 {
            return Err(Error::InvalidParameter("kappa is identically zero".into()));
        }
        let group = table.group();
        let mut blocks = Vec::new();
        let mut first_block = Vec::with_capacity(table.len());
        for (a, &k) in kappa.values.iter().enumerate() {
            first_block.push(blocks.len());
            for i in 0..k {
                blocks.push((a, i));
            }
        }
        let ell = pauli.ell;
        let n = blocks.len() * ell;
        let t = pauli.support();
        let nb = blocks.len();
        let nt = t.order();
        let nco = table.len();
        let mut coset_degrees = Vec::with_capacity(nco * nco * nt);
        for a in 0..nco {
            for b in 0..nco {
                let base = group.sub(table.gamma[a], table.gamma[b]);
                coset_degrees.extend(t.elements().iter().map(|&s| group.add(base, s)));
            }
        }
        let mut degrees = Vec::with_capacity(nb * nb * nt);
        for &(a, _) in &blocks {
            for &(b, _) in &blocks {
                let k = (a * nco + b) * nt;
                degrees.extend_from_slice(&coset_degrees[k..k + nt]);
            }
        }
        Ok(GradedMatrixAlgebra {
            field: pauli.field,
            pauli: pauli.clone(),
            table,
            kappa: kappa.clone(),
            n,
            ell,
            blocks,
            first_block,
            degrees,
        })
    }

    pub fn fp(&self) -> Fp {
        self.field.fp
    }

    pub fn group(&self) -> &FinAbGroup {
        self.table.group()
    }

    pub fn support_t(&self) -> &Subgroup {
        self.pauli.support()
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    /// Block position of `(coset, index)`.
    pub fn block_of(&self, coset: usize, i: usize) -> usize {
        debug_assert!(i < self.kappa.values[coset]);
        self.first_block[coset] + i
    }

    pub fn index(&self, row: usize, col: usize, t: Elem) -> usize {
        let nt = self.support_t().order();
        (row * self.blocks.len() + col) * nt + self.support_t().index_of(t).expect("t in T")
    }

    pub fn label(&self, idx: usize) -> BasisLabel {
        let nt = self.support_t().order();
        let nb = self.blocks.len();
        let t = self.support_t().elements()[idx % nt];
        let rc = idx / nt;
        BasisLabel { row: rc / nb, col: rc % nb, t }
    }

    /// `deg E^{A,B}_{i,j}(t) = gamma(A) t gamma(B)^{-1}`.
    pub fn degree(&self, idx: usize) -> Elem {
        self.degrees[idx]
    }

    pub fn degrees(&self) -> &[Elem] {
        &self.degrees
    }

    /// Matrix with `X_t` in block `(row, col)`.
    pub fn block_matrix(&self, row: usize, col: usize, x: &Matrix) -> SparseMatrix {
        let l = self.ell;
        let n = self.n;
        let mut entries = Vec::with_capacity(l);
        for r in 0..l {
            for (c, &v) in x.row(r).iter().enumerate() {
                if v != 0 {
                    entries.push(((row * l + r) * n + col * l + c, v));
                }
            }
        }
        SparseMatrix { n, entries }
    }

    pub fn realize(&self, idx: usize) -> SparseMatrix {
        let lab = self.label(idx);
        self.block_matrix(lab.row, lab.col, self.pauli.x(lab.t))
    }

    /// Basis indices grouped by degree, degrees in canonical order.
    pub fn components(&self) -> Vec<(Elem, Vec<usize>)> {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); self.group().order()];
        for (i, &g) in self.degrees.iter().enumerate() {
            buckets[g].push(i);
        }
        buckets.into_iter().enumerate().filter(|(_, v)| !v.is_empty()).collect()
    }

    pub fn decomposition(&self) -> Decomposition {
        Decomposition {
            n: self.n,
            fp: self.fp(),
            components: self
                .components()
                .into_iter()
                .map(|(g, idx)| (g, idx.into_iter().map(|i| self.realize(i)).collect()))
                .collect(),
        }
    }

    /// Coordinates of `m` in the basis `E^{A,B}_{i,j}(t)`, sorted by basis index.
    pub fn expand(&self, m: &SparseMatrix) -> Vec<(usize, u64)> {
        let fp = self.fp();
        let (n, l) = (self.n, self.ell);
        if l == 1 {
            let nb = self.blocks.len();
            return m.entries.iter().map(|&(k, v)| ((k / n) * nb + k % n, v)).collect();
        }
        let mut blocks: BTreeMap<(usize, usize), Matrix> = BTreeMap::new();
        for &(k, v) in &m.entries {
            let (r, c) = (k / n, k % n);
            blocks.entry((r / l, c / l)).or_insert_with(|| Matrix::zeros(fp, l, l))[(r % l, c % l)] = v;
        }
        let linv = fp.inv(l as u64 % fp.p());
        let mut out = Vec::new();
        for ((rb, cb), blk) in blocks {
            for &t in self.support_t().elements() {
                let xi = self.pauli.x_inv(t);
                let mut tr = 0;
                for i in 0..l {
                    for (j, &x) in xi.row(i).iter().enumerate() {
                        if x != 0 {
                            tr = fp.add(tr, fp.mul(x, blk[(j, i)]));
                        }
                    }
                }
                let c = fp.mul(tr, linv);
                if c != 0 {
                    out.push((self.index(rb, cb, t), c));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Degree of a nonzero homogeneous matrix; `None` if zero or inhomogeneous.
    pub fn homogeneous_degree(&self, m: &SparseMatrix) -> Option<Elem> {
        let e = self.expand(m);
        let g = self.degree(e.first()?.0);
        e.iter().all(|&(i, _)| self.degree(i) == g).then_some(g)
    }

    /// Linear combination of basis elements.
    pub fn combine(&self, coeffs: &[(usize, u64)]) -> SparseMatrix {
        let fp = self.fp();
        let mut t = Vec::new();
        for &(i, c) in coeffs {
            for &(k, v) in &self.realize(i).entries {
                t.push((k / self.n, k % self.n, fp.mul(c, v)));
            }
        }
        SparseMatrix::from_triplets(fp, self.n, t)
    }

    pub fn component_subspace(&self, g: Elem) -> Subspace {
        Subspace::span(
            self.fp(),
            self.n * self.n,
            self.degrees.iter().enumerate().filter(|(_, &d)| d == g).map(|(i, _)| self.realize(i).as_vec()),
        )
    }

    pub fn verify(&self) -> GradingReport {
        verify_flat(self.group(), self.flat(), Product::Associative)
    }

    fn flat(&self) -> Flat {
        let l = self.ell;
        let mut arena = Vec::with_capacity(self.dim() * l);
        let mut elems = Vec::with_capacity(self.dim());
        let mut degrees = Vec::new();
        for (ci, (g, idx)) in self.components().into_iter().enumerate() {
            degrees.push(g);
            for (li, i) in idx.into_iter().enumerate() {
                let lab = self.label(i);
                let x = self.pauli.x(lab.t);
                let start = arena.len();
                for r in 0..l {
                    for (c, &v) in x.row(r).iter().enumerate() {
                        if v != 0 {
                            arena.push(((lab.row * l + r) as u32, (lab.col * l + c) as u32, v));
                        }
                    }
                }
                elems.push(Element { comp: ci, local: li, start, end: arena.len(), lead_inv: 0 });
            }
        }
        Flat { n: self.n, fp: self.fp(), degrees, elems, arena }
    }

    /// Compares realized products with `E E' = delta delta sigma(t, t') E(tt')` on all basis
    /// pairs, or on every `stride`-th pair.
    pub fn verify_structure_constants(&self, stride: usize) -> Result<()> {
        let fp = self.fp();
        let g = self.group();
        let dim = self.dim();
        let stride = stride.max(1);
        let mats: Vec<SparseMatrix> = (0..dim).map(|i| self.realize(i)).collect();
        let mut k = 0usize;
        for i in 0..dim {
            for j in 0..dim {
                k += 1;
                if !k.is_multiple_of(stride) {
                    continue;
                }
                let (a, b) = (self.label(i), self.label(j));
                let expect = if a.col == b.row {
                    let s = self.pauli.sigma(a.t, b.t);
                    mats[self.index(a.row, b.col, g.add(a.t, b.t))].scale(s, fp)
                } else {
                    SparseMatrix::zero(self.n)
                };
                if mats[i].mul(&mats[j], fp) != expect {
                    return Err(Error::Internal(format!("structure constant mismatch at basis pair ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        fingerprint(self.group(), &self.decomposition())
    }
}

/// Elementary grading on `M_k(D)` from degrees `(h_1, ..., h_k)`, realized as `F(G, D, kappa)`
/// with `kappa` counting the cosets `h_i T` and transversal `gamma(h_i T) = h_i` for the
/// first occurrence of each coset.
pub fn elementary_grading(pauli: &Arc<PauliAlgebra>, degrees: &[Elem]) -> Result<GradedMatrixAlgebra> {
    let t = pauli.support();
    let mut table = CosetTable::new(t, None)?;
    let mut values = vec![0; table.len()];
    let mut seen = vec![false; table.len()];
    for &h in degrees {
        if h >= table.coset_of.len() {
            return Err(Error::InvalidParameter(format!("degree {h} outside the group")));
        }
        let a = table.coset_of[h];
        values[a] += 1;
        if !seen[a] {
            seen[a] = true;
            table.gamma[a] = h;
        }
    }
    let kappa = KappaMap::new(t, values)?;
    GradedMatrixAlgebra::with_table(pauli, &kappa, Arc::new(table))
}

/// The elementary grading built directly: `deg(E_ij ⊗ X_t) = h_i t h_j^{-1}` with rows in tuple order.
pub fn elementary_decomposition(pauli: &PauliAlgebra, degrees: &[Elem]) -> Decomposition {
    let t = pauli.support();
    let g = &t.parent;
    let fp = pauli.field.fp;
    let l = pauli.ell;
    let n = degrees.len() * l;
    let mut m: BTreeMap<Elem, Vec<SparseMatrix>> = BTreeMap::new();
    for (i, &hi) in degrees.iter().enumerate() {
        for (j, &hj) in degrees.iter().enumerate() {
            for &s in t.elements() {
                let x = pauli.x(s);
                let mut trip = Vec::new();
                for r in 0..l {
                    for c in 0..l {
                        if x[(r, c)] != 0 {
                            trip.push((i * l + r, j * l + c, x[(r, c)]));
                        }
                    }
                }
                m.entry(g.sub(g.add(hi, s), hj)).or_default().push(SparseMatrix::from_triplets(fp, n, trip));
            }
        }
    }
    Decomposition { n, fp, components: m.into_iter().collect() }
}

/// Conjugating matrix carrying the direct elementary decomposition onto the realized one.
pub fn elementary_alignment(alg: &GradedMatrixAlgebra, degrees: &[Elem]) -> Matrix {
    let g = alg.group();
    let l = alg.ell;
    let mut used = vec![0usize; alg.table.len()];
    let mut u = Matrix::zeros(alg.fp(), alg.n, alg.n);
    for (i, &h) in degrees.iter().enumerate() {
        let a = alg.table.coset_of[h];
        let pos = alg.block_of(a, used[a]);
        used[a] += 1;
        let s = g.sub(h, alg.table.gamma[a]);
        let x = alg.pauli.x(s);
        for r in 0..l {
            for c in 0..l {
                u[(pos * l + r, i * l + c)] = x[(r, c)];
            }
        }
    }
    u
}

/// Non-unital graded embedding sending each basis element to its same-named counterpart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub n_small: usize,
    pub n_large: usize,
    /// Image block of every small block.
    pub block_map: Vec<usize>,
    /// Image basis index of every small basis index.
    pub index_map: Vec<usize>,
    ell: usize,
}

impl Embedding {
    pub fn new(small: &GradedMatrixAlgebra, large: &GradedMatrixAlgebra) -> Result<Self> {
        if small.group() != large.group()
            || small.support_t() != large.support_t()
            || small.pauli.beta.table() != large.pauli.beta.table()
        {
            return Err(Error::InvalidParameter("embedding needs the same G and D".into()));
        }
        if small.table.gamma != large.table.gamma {
            return Err(Error::InvalidParameter("embedding needs the same transversal".into()));
        }
        if !small.kappa.dominated_by(&large.kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa {:?} is not dominated by {:?}",
                small.kappa.values, large.kappa.values
            )));
        }
        let block_map: Vec<usize> = small.blocks.iter().map(|&(a, i)| large.block_of(a, i)).collect();
        let index_map = (0..small.dim())
            .map(|k| {
                let lab = small.label(k);
                large.index(block_map[lab.row], block_map[lab.col], lab.t)
            })
            .collect();
        Ok(Embedding { n_small: small.n, n_large: large.n, block_map, index_map, ell: small.ell })
    }

    /// Image of an arbitrary matrix under the block injection.
    pub fn apply(&self, m: &SparseMatrix, fp: Fp) -> SparseMatrix {
        let l = self.ell;
        let map = |x: usize| self.block_map[x / l] * l + x % l;
        let t = m.entries.iter().map(|&(k, v)| (map(k / m.n), map(k % m.n), v)).collect();
        SparseMatrix::from_triplets(fp, self.n_large, t)
    }

    pub fn compose(&self, next: &Embedding) -> Result<Embedding> {
        if self.n_large != next.n_small {
            return Err(Error::InvalidParameter("embeddings do not compose".into()));
        }
        Ok(Embedding {
            n_small: self.n_small,
            n_large: next.n_large,
            block_map: self.block_map.iter().map(|&b| next.block_map[b]).collect(),
            index_map: self.index_map.iter().map(|&k| next.index_map[k]).collect(),
            ell: self.ell,
        })
    }

    /// Checks injectivity, degree preservation, agreement with the matrix map and
    /// multiplicativity on all basis pairs.
    pub fn verify(&self, small: &GradedMatrixAlgebra, large: &GradedMatrixAlgebra) -> Result<()> {
        let fp = small.fp();
        let mut seen = std::collections::HashSet::new();
        if !self.index_map.iter().all(|&k| seen.insert(k)) {
            return Err(Error::VerificationFailure("embedding not injective on the basis".into()));
        }
        let small_m: Vec<SparseMatrix> = (0..small.dim()).map(|i| small.realize(i)).collect();
        let images: Vec<SparseMatrix> = small_m.iter().map(|m| self.apply(m, fp)).collect();
        for (i, img) in images.iter().enumerate() {
            let k = self.index_map[i];
            if small.degree(i) != large.degree(k) {
                return Err(Error::VerificationFailure(format!("degree not preserved at basis element {i}")));
            }
            if *img != large.realize(k) {
                return Err(Error::VerificationFailure(format!("matrix image mismatch at basis element {i}")));
            }
        }
        for i in 0..small_m.len() {
            for j in 0..small_m.len() {
                let lhs = self.apply(&small_m[i].mul(&small_m[j], fp), fp);
                let rhs = images[i].mul(&images[j], fp);
                if lhs != rhs {
                    return Err(Error::VerificationFailure(format!("not multiplicative at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// Invariants of a graded decomposition under graded isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub support: Vec<Elem>,
    pub dims: Vec<(Elem, usize)>,
    /// Subgroup generated by the support.
    pub support_subgroup: Vec<Elem>,
    /// Sizes of the indecomposable summands of `F^n` invariant under the identity component
    /// and the center of the algebra it generates, sorted.
    pub identity_blocks: Vec<usize>,
}

pub fn fingerprint(group: &FinAbGroup, d: &Decomposition) -> Fingerprint {
    let dims: Vec<(Elem, usize)> =
        d.components.iter().map(|(g, _)| (*g, d.subspace(*g).rank())).filter(|&(_, k)| k > 0).collect();
    let support: Vec<Elem> = dims.iter().map(|&(g, _)| g).collect();
    let support_subgroup =
        Subgroup::from_generators(group, &support).map(|s| s.elements().to_vec()).unwrap_or_default();
    let gens: Vec<SparseMatrix> = d.component(0).map(|c| c.to_vec()).unwrap_or_default();
    let identity_blocks = invariant_block_sizes(d.fp, d.n, &gens);
    Fingerprint { support, dims, support_subgroup, identity_blocks }
}

/// First discrepancy between two fingerprints, if any.
pub fn fingerprint_compare(a: &Fingerprint, b: &Fingerprint) -> Option<String> {
    if a.dims != b.dims {
        let da: BTreeMap<Elem, usize> = a.dims.iter().copied().collect();
        let db: BTreeMap<Elem, usize> = b.dims.iter().copied().collect();
        let degrees: BTreeSet<Elem> = da.keys().chain(db.keys()).copied().collect();
        let show = |m: &BTreeMap<Elem, usize>| {
            let v: Vec<String> = degrees.iter().map(|g| m.get(g).copied().unwrap_or(0).to_string()).collect();
            format!("({})", v.join(", "))
        };
        let g = degrees.iter().copied().find(|g| da.get(g) != db.get(g)).unwrap();
        return Some(format!(
            "component dimensions {} vs {} over degrees {:?}, first difference at degree {g}",
            show(&da),
            show(&db),
            degrees
        ));
    }
    if a.support_subgroup != b.support_subgroup {
        return Some("support generates different subgroups".into());
    }
    if a.identity_blocks != b.identity_blocks {
        return Some(format!("identity-component blocks {:?} vs {:?}", a.identity_blocks, b.identity_blocks));
    }
    None
}

/// Unital algebra generated by `gens` inside `M_n`, as a subspace of flattened matrices.
pub fn generated_algebra(fp: Fp, n: usize, gens: &[SparseMatrix]) -> Subspace {
    let mut alg = Subspace::zero(fp, n * n);
    let mut queue: Vec<SparseMatrix> = vec![SparseMatrix::identity(n)];
    alg.insert(&queue[0].as_vec());
    for g in gens {
        if alg.insert(&g.as_vec()) {
            queue.push(g.clone());
        }
    }
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i].clone();
        for g in gens {
            let y = x.mul(g, fp);
            if alg.insert(&y.as_vec()) {
                queue.push(y);
            }
        }
        i += 1;
    }
    alg
}

/// Dimensions of the summands of `F^n` cut out by the primitive central idempotents (over
/// `F_p`) of the unital algebra generated by `gens`.
pub fn invariant_block_sizes(fp: Fp, n: usize, gens: &[SparseMatrix]) -> Vec<usize> {
    // Keep a small generating set.
    let mut alg = generated_algebra(fp, n, &[]);
    let mut small: Vec<SparseMatrix> = Vec::new();
    for g in gens {
        if !alg.contains(&g.as_vec()) {
            small.push(g.clone());
            alg = generated_algebra(fp, n, &small);
        }
    }
    let basis: Vec<SparseMatrix> = alg.basis().map(|v| SparseMatrix::from_vec(n, v.clone())).collect();
    // Center: sum c_k a_k commuting with every generator.
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let comms: Vec<Vec<SparseVec>> = basis
        .iter()
        .map(|a| small.iter().map(|g| a.mul(g, fp).axpy(fp.p() - 1, &g.mul(a, fp), fp).as_vec()).collect())
        .collect();
    for gi in 0..small.len() {
        let mut eq: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (k, c) in comms.iter().enumerate() {
            for &(pos, v) in &c[gi].0 {
                eq.entry(pos).or_insert_with(|| vec![0; basis.len()])[k] = v;
            }
        }
        rows.extend(eq.into_values());
    }
    let center: Vec<Matrix> = if rows.is_empty() {
        basis.iter().map(|a| a.to_dense(fp)).collect()
    } else {
        Matrix::from_rows(fp, &rows)
            .nullspace()
            .into_iter()
            .map(|c| {
                let mut z = SparseMatrix::zero(n);
                for (k, &ck) in c.iter().enumerate() {
                    if ck != 0 {
                        z = z.axpy(ck, &basis[k], fp);
                    }
                }
                z.to_dense(fp)
            })
            .collect()
    };
    let mut blocks: Vec<Subspace> = vec![Subspace::full(fp, n)];
    for z in &center {
        let pieces = fitting_pieces(z);
        if pieces.len() < 2 {
            continue;
        }
        let mut next = Vec::new();
        for w in &blocks {
            for p in &pieces {
                let x = w.intersection(p).expect("same ambient");
                if !x.is_zero() {
                    next.push(x);
                }
            }
        }
        blocks = next;
    }
    let mut sizes: Vec<usize> = blocks.iter().map(Subspace::rank).collect();
    sizes.sort_unstable();
    sizes
}

fn mat_pow(m: &Matrix, mut e: usize) -> Matrix {
    let mut r = Matrix::identity(m.fp, m.rows());
    let mut b = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            r = r.mul(&b);
        }
        b = b.mul(&b);
        e >>= 1;
    }
    r
}

/// Generalized eigenspaces of `z` for its eigenvalues in `F_p`, plus the invariant complement
/// on which `z` has no eigenvalue in `F_p`.
fn fitting_pieces(z: &Matrix) -> Vec<Subspace> {
    let fp = z.fp;
    let n = z.rows();
    let roots = poly::roots(fp, &z.charpoly());
    let mut pieces = Vec::new();
    let mut rest = Matrix::identity(fp, n);
    for &lam in &roots {
        let shifted = z.sub(&Matrix::identity(fp, n).scale(lam));
        let p = mat_pow(&shifted, n);
        pieces.push(Subspace::span_dense(fp, n, &p.nullspace()).expect("square"));
        rest = rest.mul(&p);
    }
    let image = Subspace::span_dense(
        fp,
        n,
        &rest.transpose().rref().0.as_flat().chunks(n).map(|r| r.to_vec()).collect::<Vec<_>>(),
    )
    .expect("square");
    if !image.is_zero() {
        pieces.push(image);
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Bicharacter;

    fn setup(factors: &[u32], kappa: Vec<usize>) -> GradedMatrixAlgebra {
        let g = FinAbGroup::new(factors).unwrap();
        let t = Subgroup::trivial(&g);
        let f = RootField::new(&[g.exponent()], None).unwrap();
        let d = Arc::new(PauliAlgebra::new(&Bicharacter::trivial(&t), &f).unwrap());
        GradedMatrixAlgebra::new(&d, &KappaMap::new(&t, kappa).unwrap(), None).unwrap()
    }

    fn pauli_klein() -> GradedMatrixAlgebra {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let t = Subgroup::whole(&g);
        let beta = Bicharacter::from_gram(&t, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let f = RootField::new(&[2], None).unwrap();
        let d = Arc::new(PauliAlgebra::new(&beta, &f).unwrap());
        GradedMatrixAlgebra::new(&d, &KappaMap::new(&t, vec![1]).unwrap(), None).unwrap()
    }

    #[test]
    fn z2_elementary_m2() {
        let r = setup(&[2], vec![1, 1]);
        assert_eq!(r.n, 2);
        assert_eq!(r.degree(r.index(0, 1, 0)), 1);
        let rep = r.verify();
        assert!(rep.is_valid());
        assert_eq!(rep.dims, vec![(0, 2), (1, 2)]);
        r.verify_structure_constants(1).unwrap();
        let fpr = r.fingerprint();
        assert_eq!(fpr.identity_blocks, vec![1, 1]);
        assert_eq!(fpr.support_subgroup, vec![0, 1]);
    }

    #[test]
    fn pauli_grading() {
        let r = pauli_klein();
        let rep = r.verify();
        assert!(rep.is_valid());
        assert_eq!(rep.dims, vec![(0, 1), (1, 1), (2, 1), (3, 1)]);
        for i in 0..4 {
            assert_eq!(r.degree(i), r.label(i).t);
        }
        assert_eq!(r.fingerprint().identity_blocks, vec![2]);
    }

    #[test]
    fn mismatched_blocks_multiply_to_zero() {
        let r = setup(&[3], vec![1, 1, 1]);
        let fp = r.fp();
        let x = r.realize(r.index(0, 1, 0));
        let y = r.realize(r.index(2, 0, 0));
        assert!(x.mul(&y, fp).is_zero());
    }

    #[test]
    fn swapped_components_violate() {
        let r = setup(&[2], vec![1, 1]);
        let mut d = r.decomposition();
        let (a, b) = (d.components[0].1.clone(), d.components[1].1.clone());
        d.components[0].1 = b;
        d.components[1].1 = a;
        let rep = verify_grading(r.group(), &d, Product::Associative);
        assert!(rep.violations.iter().any(|v| v.g == 1 && v.h == 1));
    }

    #[test]
    fn trivial_grading_fingerprint() {
        let r = setup(&[], vec![2]);
        let f = r.fingerprint();
        assert_eq!(f.dims, vec![(0, 4)]);
        assert_eq!(f.identity_blocks, vec![2]);
    }

    #[test]
    fn shift_and_reflect() {
        let r = setup(&[2], vec![2, 1]);
        assert_eq!(r.kappa.shift(1).values, vec![1, 2]);
        assert_eq!(r.kappa.shift(0).values, vec![2, 1]);
        let z4 = setup(&[4], vec![1, 2, 0, 0]);
        assert_eq!(z4.kappa.reflect().values, vec![1, 0, 0, 2]);
        assert_eq!(z4.kappa.reflect().reflect(), z4.kappa);
        assert_eq!(z4.kappa.shift(1).shift(2), z4.kappa.shift(3));
    }

    #[test]
    fn corner_embedding() {
        let small = setup(&[2], vec![1, 1]);
        let large = setup(&[2], vec![2, 1]);
        let e = Embedding::new(&small, &large).unwrap();
        assert_eq!(e.block_map, vec![0, 2]);
        e.verify(&small, &large).unwrap();
        assert!(Embedding::new(&large, &small).is_err());
        let id = Embedding::new(&small, &small).unwrap();
        assert_eq!(id.index_map, (0..small.dim()).collect::<Vec<_>>());
    }

    #[test]
    fn elementary_matches_direct() {
        let g = FinAbGroup::new(&[2]).unwrap();
        let t = Subgroup::trivial(&g);
        let f = RootField::new(&[2], None).unwrap();
        let d = Arc::new(PauliAlgebra::new(&Bicharacter::trivial(&t), &f).unwrap());
        let a = elementary_grading(&d, &[0, 1]).unwrap();
        assert_eq!(a.kappa.values, vec![1, 1]);
        assert!(a.verify().is_valid());
        let b = elementary_grading(&d, &[0, 0]).unwrap();
        assert_eq!(b.components().len(), 1);
    }
}
