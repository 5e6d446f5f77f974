//! Graded Lie algebras of the four model families inside graded matrix algebras:
//! traceless parts (Type I and Type II) and skew elements of a graded involution.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, RootField};
use crate::forms::{build_b_and_s, check_compat_38, exist_involution, mu_from_delta, mu_from_type2, InvolutionData};
use crate::graded::{
    generated_algebra, verify_grading, Decomposition, GradedMatrixAlgebra, GradingReport, KappaMap, Product,
};
use crate::group::{quotient, solve_character, Character, Elem, FinAbGroup, Quotient, Subgroup};
use crate::linalg::{solve_linear, Matrix, Solution, SparseMatrix, Subspace};
use crate::pauli::PauliAlgebra;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LieFamily {
    #[serde(rename = "A-I")]
    AI,
    #[serde(rename = "A-II")]
    AII,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "C")]
    C,
}

impl LieFamily {
    pub fn name(self) -> &'static str {
        match self {
            LieFamily::AI => "A-I",
            LieFamily::AII => "A-II",
            LieFamily::B => "B",
            LieFamily::C => "C",
        }
    }

    /// Dimension of the whole Lie algebra for matrix size `n`.
    pub fn expected_dim(self, n: usize) -> usize {
        match self {
            LieFamily::AI | LieFamily::AII => n * n - 1,
            LieFamily::B => n * (n - 1) / 2,
            LieFamily::C => n * (n + 1) / 2,
        }
    }
}

/// Quotient data for Type II: `G -> G/<h>` and the canonical character with `chi(h) = -1`.
#[derive(Clone, Debug)]
pub struct TypeTwoSetup {
    pub group: FinAbGroup,
    pub h: Elem,
    pub h_sub: Subgroup,
    pub quotient: Quotient,
    /// Image of `H` in the quotient.
    pub tbar: Subgroup,
    pub chi: Character,
    /// Field value of `chi` at every element of `G`.
    pub chi_values: Vec<u64>,
    /// Field value of `chi^2` at every element of the quotient.
    pub chi_sq_bar: Vec<u64>,
}

impl TypeTwoSetup {
    pub fn new(g: &FinAbGroup, h_sub: &Subgroup, h: Elem, field: &RootField) -> Result<Self> {
        if !h_sub.is_elementary_two() {
            return Err(Error::InvalidParameter("H must be an elementary 2-group".into()));
        }
        if h == g.identity() || !h_sub.contains(h) {
            return Err(Error::InvalidParameter(format!("h = {} must be a nonidentity element of H", g.fmt_elem(h))));
        }
        let hh = Subgroup::from_generators(g, &[h])?;
        let q = quotient(g, &hh)?;
        let images: Vec<Elem> = h_sub.elements().iter().map(|&x| q.proj[x]).collect();
        let tbar = Subgroup::from_generators(&q.group, &images)?;
        let e = g.exponent();
        let chi = solve_character(g, &[(h, e / 2)])?;
        let chi_values = g.elements().map(|x| field.root(e, chi.value(g, x) as i64)).collect::<Result<Vec<u64>>>()?;
        let fp = field.fp;
        let mut chi_sq_bar = vec![0u64; q.group.order()];
        for x in g.elements() {
            chi_sq_bar[q.proj[x]] = fp.mul(chi_values[x], chi_values[x]);
        }
        Ok(TypeTwoSetup { group: g.clone(), h, h_sub: h_sub.clone(), quotient: q, tbar, chi, chi_values, chi_sq_bar })
    }

    /// The two preimages of `gbar`, in increasing order.
    pub fn lifts(&self, gbar: Elem) -> [Elem; 2] {
        let g = &self.group;
        let a = g.elements().find(|&x| self.quotient.proj[x] == gbar).expect("projection is onto");
        let b = g.add(a, self.h);
        [a.min(b), a.max(b)]
    }
}

/// `[b_i, b_j] = sum_k c_k b_k` as `((i, j), [(k, c_k)])`.
pub type StructureConstants = Vec<((usize, usize), Vec<(usize, u64)>)>;

/// A graded Lie algebra with a homogeneous basis per degree.
#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    pub family: LieFamily,
    /// The grading group `G` (for Type II the group before the quotient).
    pub group: FinAbGroup,
    pub n: usize,
    /// Associative ambient: `G`-graded, or `G/<h>`-graded for Type II.
    pub ambient: GradedMatrixAlgebra,
    pub involution: Option<InvolutionData>,
    pub type_two: Option<TypeTwoSetup>,
    /// Nonempty homogeneous bases sorted by degree.
    pub basis: Vec<(Elem, Vec<SparseMatrix>)>,
    /// Type II only: bases of the refined associative components `R_g`.
    pub refined: Option<Vec<(Elem, Vec<SparseMatrix>)>>,
    /// Nonzero candidates dropped by rank extraction.
    pub dropped: usize,
}

impl GradedLieAlgebra {
    pub fn fp(&self) -> Fp {
        self.ambient.fp()
    }

    pub fn dim(&self) -> usize {
        self.basis.iter().map(|(_, b)| b.len()).sum()
    }

    pub fn component(&self, g: Elem) -> &[SparseMatrix] {
        self.basis.binary_search_by_key(&g, |(d, _)| *d).map(|i| self.basis[i].1.as_slice()).unwrap_or(&[])
    }

    pub fn component_subspace(&self, g: Elem) -> Subspace {
        let mut s = Subspace::zero(self.fp(), self.n * self.n);
        for m in self.component(g) {
            s.insert(&m.as_vec());
        }
        s
    }

    /// `(degree, dim)` over the support.
    pub fn dims(&self) -> Vec<(Elem, usize)> {
        self.basis.iter().map(|(g, b)| (*g, b.len())).collect()
    }

    pub fn decomposition(&self) -> Decomposition {
        Decomposition { n: self.n, fp: self.fp(), components: self.basis.clone() }
    }

    pub fn refined_decomposition(&self) -> Option<Decomposition> {
        self.refined.as_ref().map(|r| Decomposition { n: self.n, fp: self.fp(), components: r.clone() })
    }

    /// Structure constants of the bracket in the graded basis: `[x_i, x_j] = sum c_k x_k`
    /// over basis pairs `i < j`, with basis elements numbered in degree order.
    pub fn structure_constants(&self) -> Result<StructureConstants> {
        let fp = self.fp();
        let flat: Vec<(Elem, &SparseMatrix)> =
            self.basis.iter().flat_map(|(g, b)| b.iter().map(move |m| (*g, m))).collect();
        let mut offsets = BTreeMap::new();
        let mut off = 0;
        for (g, b) in &self.basis {
            offsets.insert(*g, off);
            off += b.len();
        }
        let mut out = Vec::new();
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                let (gi, x) = flat[i];
                let (gj, y) = flat[j];
                let z = bracket(x, y, fp);
                if z.is_zero() {
                    continue;
                }
                let target = self.target_degree(gi, gj);
                let comp = self.component(target);
                let mut a = Matrix::zeros(fp, self.n * self.n, comp.len());
                for (k, m) in comp.iter().enumerate() {
                    for &(pos, v) in &m.entries {
                        a[(pos, k)] = v;
                    }
                }
                let rhs = z.as_vec().to_dense(self.n * self.n);
                let coeffs = match solve_linear(&a, &rhs)? {
                    Solution::Solutions { particular, .. } => particular,
                    Solution::Infeasible => {
                        return Err(Error::VerificationFailure(format!("bracket of basis elements {i}, {j} leaves L")))
                    }
                };
                let base = offsets[&target];
                out.push((
                    (i, j),
                    coeffs.into_iter().enumerate().filter(|&(_, c)| c != 0).map(|(k, c)| (base + k, c)).collect(),
                ));
            }
        }
        Ok(out)
    }

    fn target_degree(&self, a: Elem, b: Elem) -> Elem {
        self.group.add(a, b)
    }
}

pub fn bracket(x: &SparseMatrix, y: &SparseMatrix, fp: Fp) -> SparseMatrix {
    x.mul(y, fp).axpy(fp.p() - 1, &y.mul(x, fp), fp)
}

/// Maximal independent subset of the nonzero candidates, in order; also the number of
/// nonzero candidates dropped.
fn extract(fp: Fp, n: usize, cands: impl IntoIterator<Item = SparseMatrix>) -> (Vec<SparseMatrix>, usize) {
    let mut span = Subspace::zero(fp, n * n);
    let mut out = Vec::new();
    let mut dropped = 0;
    for m in cands {
        if m.is_zero() {
            continue;
        }
        if span.insert(&m.as_vec()) {
            out.push(m);
        } else {
            dropped += 1;
        }
    }
    (out, dropped)
}

/// Replace every candidate `c` by `c - (tr c / tr a) a` for the first `a` of nonzero trace.
fn trace_correct(fp: Fp, cands: Vec<SparseMatrix>) -> Vec<SparseMatrix> {
    let Some(k) = cands.iter().position(|c| c.trace(fp) != 0) else {
        return cands;
    };
    let anchor = cands[k].clone();
    let inv = fp.inv(anchor.trace(fp));
    cands
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, c)| {
            let t = fp.mul(c.trace(fp), inv);
            if t == 0 {
                c
            } else {
                c.axpy(fp.neg(t), &anchor, fp)
            }
        })
        .collect()
}

fn check_size(n: usize, family: LieFamily) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("{} needs n >= 2, got n = {n}", family.name())));
    }
    Ok(())
}

/// Traceless part of `F(G, D, kappa)`.
pub fn build_ai(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap) -> Result<GradedLieAlgebra> {
    let r = GradedMatrixAlgebra::new(pauli, kappa, None)?;
    check_size(r.n, LieFamily::AI)?;
    let fp = r.fp();
    let e = r.group().identity();
    let anchor = r.realize(r.index(0, 0, e));
    let mut basis = Vec::new();
    for (g, idxs) in r.components() {
        let elems: Vec<SparseMatrix> = if g == e {
            idxs.iter()
                .filter_map(|&i| {
                    let lab = r.label(i);
                    if lab.row == 0 && lab.col == 0 && lab.t == e {
                        None
                    } else if lab.row == lab.col && lab.t == e {
                        Some(r.realize(i).axpy(fp.p() - 1, &anchor, fp))
                    } else {
                        Some(r.realize(i))
                    }
                })
                .collect()
        } else {
            idxs.iter().map(|&i| r.realize(i)).collect()
        };
        if !elems.is_empty() {
            basis.push((g, elems));
        }
    }
    Ok(GradedLieAlgebra {
        family: LieFamily::AI,
        group: r.group().clone(),
        n: r.n,
        ambient: r,
        involution: None,
        type_two: None,
        basis,
        refined: None,
        dropped: 0,
    })
}

/// Type II: refine the `G/<h>`-grading of `F(G/<h>, D, kappa)` through the antiautomorphism
/// with scalars `mu0 chi^{-2}` and take the traceless part.
pub fn build_aii(
    setup: &TypeTwoSetup,
    pauli: &Arc<PauliAlgebra>,
    kappa: &KappaMap,
    mu0: u64,
    g0bar: Elem,
) -> Result<GradedLieAlgebra> {
    if pauli.support() != &setup.tbar || kappa.subgroup() != &setup.tbar {
        return Err(Error::InvalidParameter("division grading must be supported on the image of H".into()));
    }
    let r = GradedMatrixAlgebra::new(pauli, kappa, Some(g0bar))?;
    check_size(r.n, LieFamily::AII)?;
    let fp = r.fp();
    let n = r.n;
    let mu = mu_from_type2(&r.table, g0bar, mu0, &setup.chi_sq_bar, pauli)?;
    let data = build_b_and_s(&r, g0bar, &mu)?;
    let compat = check_compat_38(&data, &setup.chi_sq_bar);
    if !compat.holds {
        return Err(Error::InvalidParameter(format!(
            "compatibility phi^2 = chi^2 fails in degrees {:?}",
            compat.violations
        )));
    }
    let half = fp.inv(2);
    let mut refined = Vec::new();
    let mut basis = Vec::new();
    let mut dropped = 0;
    for (gbar, idxs) in r.components() {
        let elems: Vec<SparseMatrix> = idxs.iter().map(|&i| r.realize(i)).collect();
        let images: Vec<SparseMatrix> = elems.iter().map(|m| data.phi(m)).collect();
        let mut whole = Subspace::zero(fp, n * n);
        for g in setup.lifts(gbar) {
            let c = fp.neg(fp.mul(half, fp.inv(setup.chi_values[g])));
            let proj: Vec<SparseMatrix> =
                elems.iter().zip(&images).map(|(m, p)| m.scale(half, fp).axpy(c, p, fp)).collect();
            let (rg, _) = extract(fp, n, proj.iter().cloned());
            for m in &rg {
                whole.insert(&m.as_vec());
            }
            let (lg, d) = extract(fp, n, trace_correct(fp, proj));
            dropped += d;
            if !rg.is_empty() {
                refined.push((g, rg));
            }
            if !lg.is_empty() {
                basis.push((g, lg));
            }
        }
        if whole.rank() != idxs.len() {
            return Err(Error::Internal(format!(
                "refined components do not split the component of degree {}",
                r.group().fmt_elem(gbar)
            )));
        }
    }
    refined.sort_by_key(|(g, _)| *g);
    basis.sort_by_key(|(g, _)| *g);
    Ok(GradedLieAlgebra {
        family: LieFamily::AII,
        group: setup.group.clone(),
        n,
        ambient: r,
        involution: Some(data),
        type_two: Some(setup.clone()),
        basis,
        refined: Some(refined),
        dropped,
    })
}

fn build_skew(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap, g0: Elem, delta: i8) -> Result<GradedLieAlgebra> {
    let family = if delta == 1 { LieFamily::B } else { LieFamily::C };
    let n = kappa.total() * pauli.ell;
    check_size(n, family)?;
    if delta == -1 && n % 2 == 1 {
        return Err(Error::NoInvolution(format!("symplectic involutions need even n, got n = {n}")));
    }
    if !exist_involution(kappa, pauli, delta, g0)? {
        return Err(Error::NoInvolution(format!(
            "no involution of sign {delta} with form degree {}",
            kappa.subgroup().parent.fmt_elem(g0)
        )));
    }
    let r = GradedMatrixAlgebra::new(pauli, kappa, Some(g0))?;
    let fp = r.fp();
    let mu = mu_from_delta(&r.table, g0, delta, pauli)?;
    let data = build_b_and_s(&r, g0, &mu)?;
    let mut basis = Vec::new();
    let mut dropped = 0;
    for (g, idxs) in r.components() {
        let cands = idxs.iter().map(|&i| {
            let m = r.realize(i);
            let p = data.phi(&m);
            m.axpy(fp.p() - 1, &p, fp)
        });
        let (b, d) = extract(fp, n, cands);
        // Every skew element pairs with the one spanning its image; only true extras count.
        dropped += d.saturating_sub(b.len());
        if !b.is_empty() {
            basis.push((g, b));
        }
    }
    Ok(GradedLieAlgebra {
        family,
        group: r.group().clone(),
        n,
        ambient: r,
        involution: Some(data),
        type_two: None,
        basis,
        refined: None,
        dropped,
    })
}

/// Skew elements of the orthogonal involution with form degree `g0`.
pub fn build_b(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap, g0: Elem) -> Result<GradedLieAlgebra> {
    build_skew(pauli, kappa, g0, 1)
}

/// Skew elements of the symplectic involution with form degree `g0`.
pub fn build_c(pauli: &Arc<PauliAlgebra>, kappa: &KappaMap, g0: Elem) -> Result<GradedLieAlgebra> {
    build_skew(pauli, kappa, g0, -1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieReport {
    pub family: LieFamily,
    pub bracket: GradingReport,
    pub dim: usize,
    pub expected_dim: usize,
    /// Degrees whose basis fails independence, homogeneity, tracelessness or skewness.
    pub basis_failures: Vec<Elem>,
    /// Unital associative algebra generated by `L` is all of `M_n` (A families).
    pub generates: Option<bool>,
    /// Type II: bracket check on the refined associative components.
    pub refined_bracket: Option<GradingReport>,
    /// Type II: associative check on the refined components.
    pub refined_associative: Option<GradingReport>,
    /// Type II: some component of the quotient grading splits into two nonzero parts.
    pub refinement_proper: Option<bool>,
    /// Type II: degrees `gbar` where `R_g + R_gh` is not a direct sum equal to `R_gbar`.
    pub split_failures: Vec<Elem>,
}

impl LieReport {
    pub fn is_valid(&self) -> bool {
        let assoc_ok = match (&self.refined_associative, self.refinement_proper) {
            (Some(rep), Some(true)) => !rep.violations.is_empty(),
            _ => true,
        };
        self.bracket.is_valid()
            && self.dim == self.expected_dim
            && self.basis_failures.is_empty()
            && self.generates != Some(false)
            && self.refined_bracket.as_ref().is_none_or(|r| r.is_valid())
            && assoc_ok
            && self.split_failures.is_empty()
    }
}

/// Degree-`g` membership of `x`, checked on the ambient structure.
fn basis_element_ok(l: &GradedLieAlgebra, g: Elem, x: &SparseMatrix) -> bool {
    let fp = l.fp();
    if x.trace(fp) != 0 {
        return false;
    }
    let amb = &l.ambient;
    match l.family {
        LieFamily::AI => amb.homogeneous_degree(x) == Some(g),
        LieFamily::B | LieFamily::C => {
            let data = l.involution.as_ref().expect("skew families carry their involution");
            amb.homogeneous_degree(x) == Some(g) && data.phi(x) == x.scale(fp.p() - 1, fp)
        }
        LieFamily::AII => {
            let setup = l.type_two.as_ref().expect("type two data");
            let data = l.involution.as_ref().expect("type two carries its antiautomorphism");
            amb.homogeneous_degree(x) == Some(setup.quotient.proj[g])
                && data.phi(x) == x.scale(fp.neg(setup.chi_values[g]), fp)
        }
    }
}

pub fn verify_lie(l: &GradedLieAlgebra) -> LieReport {
    let fp = l.fp();
    let n = l.n;
    let bracket = verify_grading(&l.group, &l.decomposition(), Product::Lie);
    let mut basis_failures = Vec::new();
    for (g, b) in &l.basis {
        let (ind, _) = extract(fp, n, b.iter().cloned());
        if ind.len() != b.len() || !b.iter().all(|x| basis_element_ok(l, *g, x)) {
            basis_failures.push(*g);
        }
    }
    let generates = match l.family {
        LieFamily::AI | LieFamily::AII => {
            let gens: Vec<SparseMatrix> = l.basis.iter().flat_map(|(_, b)| b.iter().cloned()).collect();
            Some(generated_algebra(fp, n, &gens).rank() == n * n)
        }
        _ => None,
    };
    let mut report = LieReport {
        family: l.family,
        bracket,
        dim: l.dim(),
        expected_dim: l.family.expected_dim(n),
        basis_failures,
        generates,
        refined_bracket: None,
        refined_associative: None,
        refinement_proper: None,
        split_failures: Vec::new(),
    };
    if let (Some(setup), Some(refined)) = (&l.type_two, l.refined_decomposition()) {
        report.refined_bracket = Some(verify_grading(&l.group, &refined, Product::Lie));
        report.refined_associative = Some(verify_grading(&l.group, &refined, Product::Associative));
        let amb = &l.ambient;
        let mut proper = false;
        for (gbar, idxs) in amb.components() {
            let [a, b] = setup.lifts(gbar);
            let sa = refined.subspace(a);
            let sb = refined.subspace(b);
            if sa.rank() > 0 && sb.rank() > 0 {
                proper = true;
            }
            let whole = amb.component_subspace(gbar);
            let sum_ok = sa.sum(&sb).map(|s| s.rank() == whole.rank() && s.is_subspace_of(&whole)).unwrap_or(false);
            if sa.rank() + sb.rank() != idxs.len() || !sum_ok {
                report.split_failures.push(gbar);
            }
        }
        report.refinement_proper = Some(proper);
    }
    report
}
