//! Balanced sesquilinear forms on the graded module, their Gram matrices `S`, the adjoint
//! antiautomorphism `phi(r) = S^{-1} r^T S` and the involution checks around it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedMatrixAlgebra, KappaMap};
use crate::group::{CosetTable, Elem};
use crate::linalg::{Matrix, SparseMatrix};
use crate::pauli::PauliAlgebra;

/// Coset `g0^{-1} A^{-1}` paired with coset `a`.
pub fn paired_coset(table: &CosetTable, g0: Elem, a: usize) -> usize {
    let g = table.group();
    table.coset_of[g.sub(g.neg(g0), table.cosets[a][0])]
}

/// `tau(A) = g0 gamma(A)^2` for a self-paired coset.
pub fn tau_of(a: usize, g0: Elem, table: &CosetTable) -> Result<Elem> {
    let g = table.group();
    if paired_coset(table, g0, a) != a {
        return Err(Error::NotSelfPaired(format!("g0 A^2 != T for A = {}", g.fmt_elem(table.cosets[a][0]))));
    }
    let tau = g.add(g0, g.times(2, table.gamma[a]));
    let other = *table.cosets[a].last().unwrap();
    if g.add(g0, g.times(2, other)) != tau {
        return Err(Error::Unsupported(
            "tau depends on the coset representative (T is not an elementary 2-group)".into(),
        ));
    }
    debug_assert!(table.subgroup.contains(tau));
    Ok(tau)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuOrigin {
    /// `mu_A = delta beta(tau(A))` or `delta`.
    Delta { delta: i8 },
    /// `mu_A = mu0 chi^{-2}(A) beta(tau(A))` or `mu0 chi^{-2}(A)`.
    TypeTwo { mu0: u64 },
    /// Given directly.
    Explicit,
}

/// Symmetry scalars `B(v, u) = mu_A B(u, v)` per coset, as field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuMap {
    pub table: Arc<CosetTable>,
    pub g0: Elem,
    pub values: Vec<u64>,
    pub origin: MuOrigin,
}

fn sign_value(d: &PauliAlgebra, s: i8) -> u64 {
    if s == 1 {
        1
    } else {
        d.field.minus_one()
    }
}

pub fn mu_from_delta(table: &Arc<CosetTable>, g0: Elem, delta: i8, d: &PauliAlgebra) -> Result<MuMap> {
    if delta != 1 && delta != -1 {
        return Err(Error::InvalidParameter(format!("delta must be +1 or -1, got {delta}")));
    }
    d.transpose_signs()?;
    let dv = sign_value(d, delta);
    let fp = d.field.fp;
    let mut values = Vec::with_capacity(table.len());
    for a in 0..table.len() {
        if paired_coset(table, g0, a) == a {
            let tau = tau_of(a, g0, table)?;
            values.push(fp.mul(dv, sign_value(d, d.sign(tau)?)));
        } else {
            values.push(dv);
        }
    }
    Ok(MuMap { table: table.clone(), g0, values, origin: MuOrigin::Delta { delta } })
}

/// Arbitrary scalars with `mu_A mu_{g0^{-1} A^{-1}} = 1`.
pub fn mu_explicit(table: &Arc<CosetTable>, g0: Elem, values: Vec<u64>, fp: crate::field::Fp) -> Result<MuMap> {
    if values.len() != table.len() {
        return Err(Error::InvalidParameter(format!("{} mu values for {} cosets", values.len(), table.len())));
    }
    let values: Vec<u64> = values.into_iter().map(|v| v % fp.p()).collect();
    for a in 0..table.len() {
        let b = paired_coset(table, g0, a);
        if values[a] == 0 || fp.mul(values[a], values[b]) != 1 {
            return Err(Error::InvalidParameter(format!(
                "mu_A mu_A* != 1 at A = {}",
                table.group().fmt_elem(table.cosets[a][0])
            )));
        }
    }
    Ok(MuMap { table: table.clone(), g0, values, origin: MuOrigin::Explicit })
}

/// `chi_sq[g]` is the field value of `chi^2` at every element `g` of the grading group.
pub fn mu_from_type2(table: &Arc<CosetTable>, g0: Elem, mu0: u64, chi_sq: &[u64], d: &PauliAlgebra) -> Result<MuMap> {
    let fp = d.field.fp;
    let g = table.group();
    if chi_sq.len() != g.order() {
        return Err(Error::InvalidParameter("chi^2 table has the wrong length".into()));
    }
    if let Some(&t) = table.subgroup.elements().iter().find(|&&t| chi_sq[t] != 1) {
        return Err(Error::SplittingViolation(format!("chi^2 is nontrivial at {} in T", g.fmt_elem(t))));
    }
    d.transpose_signs()?;
    let mu0 = mu0 % fp.p();
    if mu0 == 0 || fp.mul(mu0, mu0) != fp.inv(chi_sq[g0]) {
        return Err(Error::InvalidParameter(format!("mu0 = {mu0} violates mu0^2 = chi^-2(g0)")));
    }
    let mut values = Vec::with_capacity(table.len());
    for a in 0..table.len() {
        let base = fp.mul(mu0, fp.inv(chi_sq[table.gamma[a]]));
        if paired_coset(table, g0, a) == a {
            let tau = tau_of(a, g0, table)?;
            values.push(fp.mul(base, sign_value(d, d.sign(tau)?)));
        } else {
            values.push(base);
        }
    }
    Ok(MuMap { table: table.clone(), g0, values, origin: MuOrigin::TypeTwo { mu0 } })
}

/// Form data on `F(G, D, kappa)`: Gram matrix `S` and the adjoint `phi`.
#[derive(Clone, Debug)]
pub struct InvolutionData {
    pub algebra: GradedMatrixAlgebra,
    pub g0: Elem,
    pub mu: MuMap,
    /// `tau(A)` on self-paired cosets.
    pub tau: Vec<Option<Elem>>,
    /// `g0^{-1} A^{-1}` per coset.
    pub partner: Vec<usize>,
    /// `y(A) = g0 gamma(A) gamma(A*)`: the Pauli factor of block `(A, A*)`.
    pub y: Vec<Elem>,
    pub s: SparseMatrix,
    pub s_inv: SparseMatrix,
    /// `S^T = L S` with `L` the block scalar map `lambda`.
    pub lambda: Vec<u64>,
    /// `Some(delta)` when `phi` is an involution.
    pub sign: Option<i8>,
    /// Entry maps of `S^{-1}` by column and of `S` by row, when both are monomial.
    monomial: Option<(EntryMap, EntryMap)>,
}

/// `(position, value)` per row or column of a monomial matrix.
type EntryMap = Vec<(usize, u64)>;

/// Gram block on one coset: identity, or the standard skew shape.
fn gram_block(fp: crate::field::Fp, k: usize, skew: bool) -> Matrix {
    if !skew {
        return Matrix::identity(fp, k);
    }
    let h = k / 2;
    let mut m = Matrix::zeros(fp, k, k);
    for i in 0..h {
        m[(i, h + i)] = 1;
        m[(h + i, i)] = fp.p() - 1;
    }
    m
}

/// Inverse of a matrix with exactly one nonzero entry in every row and column.
fn monomial_inverse(s: &SparseMatrix, fp: crate::field::Fp) -> Option<SparseMatrix> {
    let n = s.n;
    if s.entries.len() != n {
        return None;
    }
    let mut seen = vec![false; n];
    let mut t = Vec::with_capacity(n);
    for (i, &(k, v)) in s.entries.iter().enumerate() {
        let (r, c) = (k / n, k % n);
        if r != i || std::mem::replace(&mut seen[c], true) {
            return None;
        }
        t.push((c, r, fp.inv(v)));
    }
    Some(SparseMatrix::from_triplets(fp, n, t))
}

pub fn build_b_and_s(r: &GradedMatrixAlgebra, g0: Elem, mu: &MuMap) -> Result<InvolutionData> {
    let fp = r.fp();
    let d = &r.pauli;
    let table = &r.table;
    let g = r.group();
    let kappa = &r.kappa.values;
    if mu.g0 != g0 || mu.table.subgroup != table.subgroup || mu.values.len() != table.len() {
        return Err(Error::InvalidParameter("mu does not match g0 and the coset table".into()));
    }
    d.transpose_signs()?;
    let nco = table.len();
    let partner: Vec<usize> = (0..nco).map(|a| paired_coset(table, g0, a)).collect();
    for a in 0..nco {
        if kappa[a] != kappa[partner[a]] {
            return Err(Error::NoForm(format!(
                "kappa({}) = {} but kappa of its paired coset is {}",
                g.fmt_elem(table.cosets[a][0]),
                kappa[a],
                kappa[partner[a]]
            )));
        }
    }
    let mu_at = |a: usize| if kappa[a] == 0 { 1 } else { mu.values[a] };
    let minus = fp.p() - 1;
    let mut tau = vec![None; nco];
    let mut y = vec![0; nco];
    let mut grams: Vec<Option<Matrix>> = vec![None; nco];
    for a in 0..nco {
        let b = partner[a];
        y[a] = g.add(g0, g.add(table.gamma[a], table.gamma[b]));
        if a == b {
            tau[a] = Some(tau_of(a, g0, table)?);
        }
        if kappa[a] == 0 {
            continue;
        }
        let m = mu_at(a);
        if a == b {
            if m != 1 && m != minus {
                return Err(Error::InvalidParameter("mu on a self-paired coset must be +-1".into()));
            }
            if m == minus && kappa[a] % 2 == 1 {
                return Err(Error::NoForm(format!(
                    "coset {} needs a skew form in odd dimension {}",
                    g.fmt_elem(table.cosets[a][0]),
                    kappa[a]
                )));
            }
            grams[a] = Some(gram_block(fp, kappa[a], m == minus));
        } else if a < b {
            if fp.mul(m, mu_at(b)) != 1 {
                return Err(Error::InvalidParameter("mu_A mu_A* != 1".into()));
            }
            grams[a] = Some(Matrix::identity(fp, kappa[a]));
            grams[b] = Some(Matrix::identity(fp, kappa[a]).scale(m));
        }
    }
    let l = r.ell;
    let mut trip = Vec::new();
    for a in 0..nco {
        let Some(gram) = &grams[a] else { continue };
        let x = d.x(y[a]);
        let b = partner[a];
        for i in 0..kappa[a] {
            for j in 0..kappa[b] {
                let c = gram[(i, j)];
                if c == 0 {
                    continue;
                }
                let (rb, cb) = (r.block_of(a, i), r.block_of(b, j));
                for u in 0..l {
                    for v in 0..l {
                        let xv = x[(u, v)];
                        if xv != 0 {
                            trip.push((rb * l + u, cb * l + v, fp.mul(c, xv)));
                        }
                    }
                }
            }
        }
    }
    let s = SparseMatrix::from_triplets(fp, r.n, trip);
    let monomial = monomial_inverse(&s, fp).map(|inv| {
        let n = r.n;
        let mut inv_by_col = vec![(0, 0); n];
        for &(k, v) in &inv.entries {
            inv_by_col[k % n] = (k / n, v);
        }
        let s_by_row = s.entries.iter().map(|&(k, v)| (k % n, v)).collect();
        (inv, (inv_by_col, s_by_row))
    });
    let (s_inv, monomial) = match monomial {
        Some((inv, maps)) => (inv, Some(maps)),
        None => (
            s.to_dense(fp).inverse().ok_or_else(|| Error::Internal("Gram matrix is singular".into()))?.to_sparse(),
            None,
        ),
    };
    let lambda: Vec<u64> = (0..nco).map(|a| fp.mul(mu_at(a), sign_value(d, d.sign(y[a]).unwrap_or(1)))).collect();
    // S^T = L S, row block by row block.
    let mut ls = Vec::with_capacity(s.entries.len());
    for &(k, v) in &s.entries {
        let (a, _) = r.blocks[k / r.n / l];
        ls.push((k / r.n, k % r.n, fp.mul(lambda[a], v)));
    }
    if s.transpose() != SparseMatrix::from_triplets(fp, r.n, ls) {
        return Err(Error::Internal("S^T differs from the block scalar map times S".into()));
    }
    let nonempty: Vec<u64> = (0..nco).filter(|&a| kappa[a] > 0).map(|a| lambda[a]).collect();
    let sign = if nonempty.iter().all(|&c| c == nonempty[0]) {
        match nonempty[0] {
            1 => Some(1),
            c if c == minus => Some(-1),
            _ => None,
        }
    } else {
        None
    };
    Ok(InvolutionData { algebra: r.clone(), g0, mu: mu.clone(), tau, partner, y, s, s_inv, lambda, sign, monomial })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvolutionKind {
    Involution {
        sign: i8,
    },
    /// `phi^2(r) = Q^{-1} r Q` with `Q` the block scalar map.
    Antiautomorphism {
        lambda: Vec<u64>,
    },
}

impl InvolutionData {
    pub fn phi(&self, r: &SparseMatrix) -> SparseMatrix {
        let fp = self.algebra.fp();
        let Some((inv_by_col, s_by_row)) = &self.monomial else {
            return self.s_inv.mul(&r.transpose(), fp).mul(&self.s, fp);
        };
        // (S^-1 r^T S)[a][b] = u_a r[j][c] s_j with S^-1 = (a, c, u_a), S = (j, b, s_j).
        let n = r.n;
        let mut entries: Vec<(usize, u64)> = r
            .entries
            .iter()
            .map(|&(k, v)| {
                let (a, u) = inv_by_col[k % n];
                let (b, sj) = s_by_row[k / n];
                (a * n + b, fp.mul(fp.mul(u, v), sj))
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        SparseMatrix { n, entries }
    }

    /// Coset of the row block of each matrix block.
    fn block_coset(&self, block: usize) -> usize {
        self.algebra.blocks[block].0
    }

    /// Basis indices whose image under `phi` is not homogeneous of the same degree.
    pub fn grading_violations(&self) -> Vec<usize> {
        let r = &self.algebra;
        (0..r.dim()).filter(|&i| r.homogeneous_degree(&self.phi(&r.realize(i))) != Some(r.degree(i))).collect()
    }

    /// Nonzero blocks `(A, A')` of `S` with `A' != g0^{-1} A^{-1}`.
    pub fn orthogonality_violations(&self) -> Vec<(usize, usize)> {
        let r = &self.algebra;
        let l = r.ell;
        let mut out: Vec<(usize, usize)> = self
            .s
            .entries
            .iter()
            .map(|&(k, _)| (self.block_coset(k / r.n / l), self.block_coset(k % r.n / l)))
            .filter(|&(a, b)| self.partner[a] != b)
            .collect();
        out.dedup();
        out
    }

    /// Checks `phi(xy) = phi(y) phi(x)` on every `stride`-th basis pair.
    pub fn verify_antiautomorphism(&self, stride: usize) -> Result<()> {
        let r = &self.algebra;
        let fp = r.fp();
        let mats: Vec<SparseMatrix> = (0..r.dim()).map(|i| r.realize(i)).collect();
        let imgs: Vec<SparseMatrix> = mats.iter().map(|m| self.phi(m)).collect();
        let mut k = 0usize;
        for i in 0..mats.len() {
            for j in 0..mats.len() {
                k += 1;
                if !k.is_multiple_of(stride.max(1)) {
                    continue;
                }
                if self.phi(&mats[i].mul(&mats[j], fp)) != imgs[j].mul(&imgs[i], fp) {
                    return Err(Error::VerificationFailure(format!("phi not anti-multiplicative at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// Decides between an involution (with its sign) and an antiautomorphism with
/// `phi^2(E^{A,B}) = lambda_A^{-1} lambda_B E^{A,B}`, checking every basis element.
pub fn check_involution(data: &InvolutionData) -> Result<InvolutionKind> {
    let r = &data.algebra;
    let fp = r.fp();
    for i in 0..r.dim() {
        let lab = r.label(i);
        let e = r.realize(i);
        let (a, b) = (data.block_coset(lab.row), data.block_coset(lab.col));
        let want = e.scale(fp.mul(fp.inv(data.lambda[a]), data.lambda[b]), fp);
        if data.phi(&data.phi(&e)) != want {
            return Err(Error::Internal(format!("phi^2 is not the block scalar conjugation at basis element {i}")));
        }
    }
    match data.sign {
        Some(sign) => {
            let c = if sign == 1 { 1 } else { fp.p() - 1 };
            if data.s.transpose() != data.s.scale(c, fp) {
                return Err(Error::Internal("involution sign disagrees with the symmetry of S".into()));
            }
            Ok(InvolutionKind::Involution { sign })
        }
        None => {
            let nonempty: Vec<usize> = (0..r.table.len()).filter(|&a| r.kappa.values[a] > 0).collect();
            if nonempty.iter().all(|&a| data.lambda[a] == data.lambda[nonempty[0]]) {
                return Err(Error::Internal("phi^2 = id but S is neither symmetric nor skew".into()));
            }
            Ok(InvolutionKind::Antiautomorphism { lambda: data.lambda.clone() })
        }
    }
}

/// Outcome of checking `phi^2(r) = chi^2(g) r` on every homogeneous basis element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compat38 {
    pub holds: bool,
    /// Degrees carrying a violating basis element.
    pub violations: Vec<Elem>,
    /// `chi^2` trivial on `T` and `mu` of the `mu0 chi^{-2}` shape for a valid `mu0`.
    pub predicted: bool,
}

impl Compat38 {
    pub fn agree(&self) -> bool {
        self.holds == self.predicted
    }
}

pub fn check_compat_38(data: &InvolutionData, chi_sq: &[u64]) -> Compat38 {
    let r = &data.algebra;
    let fp = r.fp();
    let mut violations = Vec::new();
    for i in 0..r.dim() {
        let e = r.realize(i);
        let deg = r.degree(i);
        if data.phi(&data.phi(&e)) != e.scale(chi_sq[deg], fp) {
            violations.push(deg);
        }
    }
    violations.sort_unstable();
    violations.dedup();
    let table = &r.table;
    let split = table.subgroup.elements().iter().all(|&t| chi_sq[t] == 1);
    let kappa = &r.kappa.values;
    let d = &r.pauli;
    let predicted = split && {
        // mu_A beta(y(A)) chi^2(A) must be one constant mu0 with mu0^2 = chi^-2(g0).
        let vals: Vec<u64> = (0..table.len())
            .filter(|&a| kappa[a] > 0)
            .map(|a| {
                let sgn = sign_value(d, d.sign(data.y[a]).unwrap_or(1));
                fp.mul(fp.mul(data.mu.values[a], sgn), chi_sq[table.gamma[a]])
            })
            .collect();
        let mu0 = vals[0];
        vals.iter().all(|&v| v == mu0) && fp.mul(mu0, mu0) == fp.inv(chi_sq[data.g0])
    };
    Compat38 { holds: violations.is_empty(), violations, predicted }
}

/// Existence of a graded involution of sign `delta` with form degree `g0`: `kappa` is
/// symmetric under `A -> g0^{-1} A^{-1}` and every self-paired coset of odd multiplicity
/// has `beta(tau(A)) = delta`.
pub fn exist_involution(kappa: &KappaMap, d: &PauliAlgebra, delta: i8, g0: Elem) -> Result<bool> {
    d.transpose_signs()?;
    let table = kappa.cosets();
    for a in 0..table.len() {
        let b = paired_coset(table, g0, a);
        if kappa.values[a] != kappa.values[b] {
            return Ok(false);
        }
        if a == b && kappa.values[a] % 2 == 1 && d.sign(tau_of(a, g0, table)?)? != delta {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RootField;
    use crate::group::{Bicharacter, FinAbGroup, Subgroup};

    fn trivial_t(factors: &[u32]) -> (Arc<PauliAlgebra>, Subgroup) {
        let g = FinAbGroup::new(factors).unwrap();
        let t = Subgroup::trivial(&g);
        let f = RootField::new(&[g.exponent()], None).unwrap();
        (Arc::new(PauliAlgebra::new(&Bicharacter::trivial(&t), &f).unwrap()), t)
    }

    fn build(factors: &[u32], kappa: Vec<usize>, g0: Elem, delta: i8) -> Result<InvolutionData> {
        let (d, t) = trivial_t(factors);
        let k = KappaMap::new(&t, kappa).unwrap();
        let r = GradedMatrixAlgebra::new(&d, &k, Some(g0)).unwrap();
        let mu = mu_from_delta(&r.table, g0, delta, &d).unwrap();
        build_b_and_s(&r, g0, &mu)
    }

    #[test]
    fn symplectic_on_z2() {
        let data = build(&[2], vec![1, 1], 1, -1).unwrap();
        let fp = data.algebra.fp();
        assert_eq!(data.s.to_dense(fp), Matrix::from_i64(fp, &[vec![0, 1], vec![-1, 0]]));
        assert_eq!(check_involution(&data).unwrap(), InvolutionKind::Involution { sign: -1 });
        assert!(data.grading_violations().is_empty());
        assert!(data.orthogonality_violations().is_empty());
        data.verify_antiautomorphism(1).unwrap();
    }

    #[test]
    fn transpose_on_z2() {
        let data = build(&[2], vec![1, 1], 0, 1).unwrap();
        let fp = data.algebra.fp();
        assert_eq!(data.s.to_dense(fp), Matrix::identity(fp, 2));
        assert_eq!(check_involution(&data).unwrap(), InvolutionKind::Involution { sign: 1 });
    }

    #[test]
    fn odd_skew_has_no_form() {
        assert!(matches!(build(&[2], vec![1, 0], 0, -1), Err(Error::NoForm(_))));
        let (d, t) = trivial_t(&[2]);
        assert!(!exist_involution(&KappaMap::new(&t, vec![1, 0]).unwrap(), &d, -1, 0).unwrap());
        assert!(!exist_involution(&KappaMap::new(&t, vec![2, 1]).unwrap(), &d, 1, 1).unwrap());
        assert!(exist_involution(&KappaMap::new(&t, vec![2, 2]).unwrap(), &d, -1, 0).unwrap());
    }

    #[test]
    fn tau_examples() {
        let g = FinAbGroup::new(&[4]).unwrap();
        let t = Subgroup::from_generators(&g, &[2]).unwrap();
        let table = CosetTable::new(&t, None).unwrap();
        assert_eq!(tau_of(1, 0, &table).unwrap(), 2);
        assert_eq!(tau_of(0, 0, &table).unwrap(), 0);
        assert!(matches!(tau_of(0, 1, &table), Err(Error::NotSelfPaired(_))));
    }

    #[test]
    fn klein_mu() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let t = Subgroup::whole(&g);
        let beta = Bicharacter::from_gram(&t, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let f = RootField::new(&[2], None).unwrap();
        let d = Arc::new(PauliAlgebra::new(&beta, &f).unwrap());
        let g0 = g.from_coords(&[1, 1]).unwrap();
        let table = Arc::new(CosetTable::new(&t, Some(g0)).unwrap());
        assert_eq!(tau_of(0, g0, &table).unwrap(), g0);
        let mu = mu_from_delta(&table, g0, 1, &d).unwrap();
        assert_eq!(mu.values, vec![f.minus_one()]);
        let r = GradedMatrixAlgebra::new(&d, &KappaMap::new(&t, vec![2]).unwrap(), Some(g0)).unwrap();
        let data = build_b_and_s(&r, g0, &mu).unwrap();
        assert_eq!(check_involution(&data).unwrap(), InvolutionKind::Involution { sign: 1 });
        assert!(data.grading_violations().is_empty());
    }

    #[test]
    fn type_two_mu() {
        let (d, t) = trivial_t(&[]);
        let table = Arc::new(CosetTable::new(&t, Some(0)).unwrap());
        let m = d.field.minus_one();
        assert_eq!(mu_from_type2(&table, 0, 1, &[1], &d).unwrap().values, vec![1]);
        assert_eq!(mu_from_type2(&table, 0, m, &[1], &d).unwrap().values, vec![m]);
        assert!(matches!(mu_from_type2(&table, 0, 2, &[1], &d), Err(Error::InvalidParameter(_))));
    }
}
