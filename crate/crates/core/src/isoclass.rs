//! Equivalence of classification parameters under shifts by `G` (and, for Type I special
//! linear models, reversal), with explicit conjugation witnesses and fingerprint refutations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, RootField};
use crate::forms::{
    build_b_and_s, exist_involution, mu_explicit, mu_from_delta, mu_from_type2, paired_coset, InvolutionData,
};
use crate::graded::{fingerprint, fingerprint_compare, Fingerprint, GradedMatrixAlgebra, KappaMap};
use crate::group::{Bicharacter, CosetTable, Elem, FinAbGroup, Subgroup};
use crate::lie::{build_ai, build_aii, build_b, build_c, GradedLieAlgebra, TypeTwoSetup};
use crate::linalg::{Matrix, SparseMatrix, Subspace};
use crate::pauli::PauliAlgebra;
use crate::sweep::{division_data, kappas};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "assoc")]
    Assoc,
    #[serde(rename = "assoc-antiauto")]
    Antiauto,
    #[serde(rename = "assoc-involution")]
    Involution,
    #[serde(rename = "sl-I")]
    SlI,
    #[serde(rename = "sl-II")]
    SlII,
    #[serde(rename = "so")]
    So,
    #[serde(rename = "sp")]
    Sp,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::Assoc, Kind::Antiauto, Kind::Involution, Kind::SlI, Kind::SlII, Kind::So, Kind::Sp];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Assoc => "assoc",
            Kind::Antiauto => "assoc-antiauto",
            Kind::Involution => "assoc-involution",
            Kind::SlI => "sl-I",
            Kind::SlII => "sl-II",
            Kind::So => "so",
            Kind::Sp => "sp",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown kind {s:?}")))
    }

    pub fn is_lie(self) -> bool {
        matches!(self, Kind::SlI | Kind::SlII | Kind::So | Kind::Sp)
    }

    fn family(self) -> u8 {
        match self {
            Kind::Assoc => 0,
            Kind::Antiauto => 1,
            Kind::Involution => 2,
            Kind::SlI | Kind::SlII => 3,
            Kind::So | Kind::Sp => 4,
        }
    }
}

/// Classification data of one model. For sl-II, `t`, `beta`, `kappa` and `g0` live in
/// `G/<h>`.
#[derive(Clone, Debug)]
pub struct ParamTuple {
    pub kind: Kind,
    pub group: FinAbGroup,
    pub t: Subgroup,
    pub beta: Bicharacter,
    pub kappa: Vec<usize>,
    pub g0: Option<Elem>,
    pub delta: Option<i8>,
    /// Per-coset symmetry scalars, `1` on empty cosets.
    pub mu: Option<Vec<u64>>,
    pub h: Option<Elem>,
    pub h_sub: Option<Subgroup>,
    pub mu0: Option<u64>,
}

impl PartialEq for ParamTuple {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
            && self.group == o.group
            && self.t.elements() == o.t.elements()
            && self.beta.table() == o.beta.table()
            && self.kappa == o.kappa
            && self.g0 == o.g0
            && self.delta == o.delta
            && self.mu == o.mu
            && self.h == o.h
            && self.h_sub.as_ref().map(|s| s.elements()) == o.h_sub.as_ref().map(|s| s.elements())
            && self.mu0 == o.mu0
    }
}

impl ParamTuple {
    fn base(kind: Kind, t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>) -> Self {
        ParamTuple {
            kind,
            group: t.parent.clone(),
            t: t.clone(),
            beta: beta.clone(),
            kappa,
            g0: None,
            delta: None,
            mu: None,
            h: None,
            h_sub: None,
            mu0: None,
        }
    }

    pub fn assoc(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>) -> Self {
        Self::base(Kind::Assoc, t, beta, kappa)
    }

    /// `mu` is normalized to `1` on cosets with `kappa = 0`.
    pub fn antiauto(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>, g0: Elem, mu: Vec<u64>) -> Self {
        let mu = mu.iter().zip(&kappa).map(|(&m, &k)| if k == 0 { 1 } else { m }).collect();
        ParamTuple { g0: Some(g0), mu: Some(mu), ..Self::base(Kind::Antiauto, t, beta, kappa) }
    }

    pub fn involution(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>, g0: Elem, delta: i8) -> Self {
        ParamTuple { g0: Some(g0), delta: Some(delta), ..Self::base(Kind::Involution, t, beta, kappa) }
    }

    pub fn sl1(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>) -> Self {
        Self::base(Kind::SlI, t, beta, kappa)
    }

    /// `beta` and `kappa` on the image of `H` in `G/<h>`; `g0bar` in `G/<h>`.
    #[allow(clippy::too_many_arguments)]
    pub fn sl2(
        group: &FinAbGroup,
        h_sub: &Subgroup,
        h: Elem,
        beta: &Bicharacter,
        kappa: Vec<usize>,
        mu0: u64,
        g0bar: Elem,
    ) -> Self {
        ParamTuple {
            kind: Kind::SlII,
            group: group.clone(),
            t: beta.subgroup.clone(),
            beta: beta.clone(),
            kappa,
            g0: Some(g0bar),
            delta: None,
            mu: None,
            h: Some(h),
            h_sub: Some(h_sub.clone()),
            mu0: Some(mu0),
        }
    }

    pub fn so(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>, g0: Elem) -> Self {
        ParamTuple { g0: Some(g0), delta: Some(1), ..Self::base(Kind::So, t, beta, kappa) }
    }

    pub fn sp(t: &Subgroup, beta: &Bicharacter, kappa: Vec<usize>, g0: Elem) -> Self {
        ParamTuple { g0: Some(g0), delta: Some(-1), ..Self::base(Kind::Sp, t, beta, kappa) }
    }

    pub fn ell(&self) -> usize {
        self.t.sqrt_order().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.kappa.iter().sum::<usize>() * self.ell()
    }

    pub fn kappa_map(&self) -> Result<KappaMap> {
        KappaMap::new(&self.t, self.kappa.clone())
    }

    pub fn pauli(&self, field: &RootField) -> Result<Arc<PauliAlgebra>> {
        Ok(Arc::new(PauliAlgebra::new(&self.beta, field)?))
    }

    pub fn type_two(&self, field: &RootField) -> Result<TypeTwoSetup> {
        match (&self.h_sub, self.h) {
            (Some(hs), Some(h)) => TypeTwoSetup::new(&self.group, hs, h, field),
            _ => Err(Error::InvalidParameter("sl-II needs H and h".into())),
        }
    }

    fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
        v.ok_or_else(|| Error::InvalidParameter(format!("missing {what}")))
    }

    /// Applies the shift by `g`.
    pub fn transform(&self, g: Elem, field: &RootField) -> Result<ParamTuple> {
        let grp = &self.group;
        let mut out = self.clone();
        match self.kind {
            Kind::SlII => {
                let setup = self.type_two(field)?;
                let gbar = setup.quotient.proj[g];
                let qg = &setup.quotient.group;
                out.kappa = self.kappa_map()?.shift(gbar).values;
                let g0 = Self::need(self.g0, "g0")?;
                out.g0 = Some(qg.sub(g0, qg.times(2, gbar)));
                let fp = field.fp;
                let c = setup.chi_values[g];
                out.mu0 = Some(fp.mul(Self::need(self.mu0, "mu0")?, fp.mul(c, c)));
            }
            _ => {
                let km = self.kappa_map()?;
                out.kappa = km.shift(g).values;
                if let Some(g0) = self.g0 {
                    out.g0 = Some(grp.sub(g0, grp.times(2, g)));
                }
                if let Some(mu) = &self.mu {
                    let table = km.cosets();
                    let mut shifted = vec![1; mu.len()];
                    for (a, &m) in mu.iter().enumerate() {
                        shifted[table.shift(a, g)] = m;
                    }
                    out.mu = Some(shifted);
                }
            }
        }
        Ok(out)
    }

    /// `beta -> beta^{-1}`, `kappa -> kappa~` (Type I special linear only).
    pub fn reverse(&self) -> Result<ParamTuple> {
        if self.kind != Kind::SlI {
            return Err(Error::InvalidParameter("reversal applies to sl-I only".into()));
        }
        let mut out = self.clone();
        out.beta = self.beta.inverse();
        out.kappa = self.kappa_map()?.reflect().values;
        Ok(out)
    }

    pub fn to_spec(&self, field: &RootField) -> ParamSpec {
        let fp = field.fp;
        let g = &self.group;
        let coords = |x: Elem, grp: &FinAbGroup| grp.coords(x).iter().map(|&c| c as i64).collect::<Vec<i64>>();
        let (t_gens, g0_group) = match self.kind {
            Kind::SlII => {
                let hs = self.h_sub.as_ref().expect("sl-II carries H");
                (hs.gens().iter().map(|&x| coords(x, g)).collect(), self.t.parent.clone())
            }
            _ => (self.t.gens().iter().map(|&x| coords(x, g)).collect(), g.clone()),
        };
        ParamSpec {
            kind: self.kind,
            group: g.factors().to_vec(),
            t: t_gens,
            beta: Some(self.beta.gram.clone()),
            kappa: self.kappa.clone(),
            g0: self.g0.map(|x| coords(x, &g0_group)),
            delta: match self.kind {
                Kind::Involution => self.delta,
                _ => None,
            },
            mu: self.mu.as_ref().map(|m| m.iter().map(|&v| fp.to_signed(v)).collect()),
            h: self.h.map(|x| coords(x, g)),
            mu0: self.mu0.map(|v| fp.to_signed(v)),
        }
    }

    pub fn from_spec(spec: &ParamSpec, field: &RootField) -> Result<ParamTuple> {
        let fp = field.fp;
        let g = FinAbGroup::new(&spec.group)?;
        let elem = |grp: &FinAbGroup, c: &[i64]| grp.from_coords(c);
        let gens: Vec<Elem> = spec.t.iter().map(|c| elem(&g, c)).collect::<Result<_>>()?;
        let given = Subgroup::from_generators(&g, &gens)?;
        let need = |o: &Option<Vec<i64>>, what: &str| {
            o.clone().ok_or_else(|| Error::InvalidParameter(format!("{} needs {what}", spec.kind.name())))
        };
        let make_beta = |t: &Subgroup| -> Result<Bicharacter> {
            let beta = match &spec.beta {
                Some(gram) => Bicharacter::from_gram(t, gram.clone())?,
                None if t.order() == 1 => Bicharacter::trivial(t),
                None => Bicharacter::enumerate_nondegenerate(t).into_iter().next().ok_or_else(|| {
                    Error::InvalidParameter("T carries no nondegenerate alternating bicharacter".into())
                })?,
            };
            beta.validate()?;
            Ok(beta)
        };
        if spec.kind == Kind::SlII {
            let h = elem(&g, &need(&spec.h, "h")?)?;
            let setup = TypeTwoSetup::new(&g, &given, h, field)?;
            let beta = make_beta(&setup.tbar)?;
            let g0 = elem(&setup.quotient.group, &need(&spec.g0, "g0")?)?;
            let mu0 = spec.mu0.ok_or_else(|| Error::InvalidParameter("sl-II needs mu0".into()))?;
            return Ok(ParamTuple::sl2(&g, &given, h, &beta, spec.kappa.clone(), fp.from_i64(mu0), g0));
        }
        let beta = make_beta(&given)?;
        let t = &given;
        let kappa = spec.kappa.clone();
        Ok(match spec.kind {
            Kind::Assoc => ParamTuple::assoc(t, &beta, kappa),
            Kind::SlI => ParamTuple::sl1(t, &beta, kappa),
            Kind::Antiauto => {
                let g0 = elem(&g, &need(&spec.g0, "g0")?)?;
                let mu = need(&spec.mu, "mu")?.iter().map(|&v| fp.from_i64(v)).collect();
                ParamTuple::antiauto(t, &beta, kappa, g0, mu)
            }
            Kind::Involution => {
                let g0 = elem(&g, &need(&spec.g0, "g0")?)?;
                let delta = spec.delta.ok_or_else(|| Error::InvalidParameter("assoc-involution needs delta".into()))?;
                ParamTuple::involution(t, &beta, kappa, g0, delta)
            }
            Kind::So => ParamTuple::so(t, &beta, kappa, elem(&g, &need(&spec.g0, "g0")?)?),
            Kind::Sp => ParamTuple::sp(t, &beta, kappa, elem(&g, &need(&spec.g0, "g0")?)?),
            Kind::SlII => unreachable!(),
        })
    }
}

/// Serialized parameters. Elements are coordinate vectors; `t` lists generators of `T`
/// (of `H` for sl-II); `beta` holds gram exponents of `zeta_E` (`E` the exponent of the
/// ambient group) on the canonical generators of `T` (of `H/<h>` for sl-II) and defaults to
/// the first nondegenerate one; for sl-II, `kappa` and `g0` refer to `G/<h>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub kind: Kind,
    pub group: Vec<u32>,
    #[serde(default)]
    pub t: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Vec<u64>>>,
    pub kappa: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<i64>,
}

/// Default field for a grading group: roots of unity of order `2 exp(G)`.
pub fn default_field(group: &FinAbGroup, prime: Option<u64>) -> Result<RootField> {
    RootField::new(&[group.exponent().max(1)], prime)
}

/// The algebra a tuple describes.
#[derive(Clone, Debug)]
pub enum Realization {
    Assoc(GradedMatrixAlgebra),
    Form(Box<InvolutionData>),
    Lie(Box<GradedLieAlgebra>),
}

impl Realization {
    pub fn ambient(&self) -> &GradedMatrixAlgebra {
        match self {
            Realization::Assoc(r) => r,
            Realization::Form(d) => &d.algebra,
            Realization::Lie(l) => &l.ambient,
        }
    }

    pub fn involution(&self) -> Option<&InvolutionData> {
        match self {
            Realization::Assoc(_) => None,
            Realization::Form(d) => Some(d),
            Realization::Lie(l) => l.involution.as_ref(),
        }
    }

    pub fn lie(&self) -> Option<&GradedLieAlgebra> {
        match self {
            Realization::Lie(l) => Some(l),
            _ => None,
        }
    }

    /// Homogeneous bases of the graded object (Lie components for Lie kinds).
    pub fn components(&self) -> Vec<(Elem, Vec<SparseMatrix>)> {
        match self {
            Realization::Lie(l) => l.basis.clone(),
            _ => self.ambient().decomposition().components,
        }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        match self {
            Realization::Lie(l) => fingerprint(&l.group, &l.decomposition()),
            _ => self.ambient().fingerprint(),
        }
    }
}

pub fn build(p: &ParamTuple, field: &RootField) -> Result<Realization> {
    let kappa = p.kappa_map()?;
    if p.kind == Kind::SlII {
        let setup = p.type_two(field)?;
        let pauli = p.pauli(field)?;
        let l = build_aii(&setup, &pauli, &kappa, ParamTuple::need(p.mu0, "mu0")?, ParamTuple::need(p.g0, "g0")?)?;
        return Ok(Realization::Lie(Box::new(l)));
    }
    let pauli = p.pauli(field)?;
    Ok(match p.kind {
        Kind::Assoc => Realization::Assoc(GradedMatrixAlgebra::new(&pauli, &kappa, None)?),
        Kind::Antiauto => {
            let g0 = ParamTuple::need(p.g0, "g0")?;
            let r = GradedMatrixAlgebra::new(&pauli, &kappa, Some(g0))?;
            let mu = mu_explicit(&r.table, g0, p.mu.clone().unwrap_or_default(), field.fp)?;
            Realization::Form(Box::new(build_b_and_s(&r, g0, &mu)?))
        }
        Kind::Involution => {
            let g0 = ParamTuple::need(p.g0, "g0")?;
            let delta = ParamTuple::need(p.delta, "delta")?;
            if !exist_involution(&kappa, &pauli, delta, g0)? {
                return Err(Error::NoInvolution(format!("no involution of sign {delta} with this g0 and kappa")));
            }
            let r = GradedMatrixAlgebra::new(&pauli, &kappa, Some(g0))?;
            let mu = mu_from_delta(&r.table, g0, delta, &pauli)?;
            let data = build_b_and_s(&r, g0, &mu)?;
            if data.sign != Some(delta) {
                return Err(Error::Internal(format!("form has sign {:?}, expected {delta}", data.sign)));
            }
            Realization::Form(Box::new(data))
        }
        Kind::SlI => Realization::Lie(Box::new(build_ai(&pauli, &kappa)?)),
        Kind::So => Realization::Lie(Box::new(build_b(&pauli, &kappa, ParamTuple::need(p.g0, "g0")?)?)),
        Kind::Sp => Realization::Lie(Box::new(build_c(&pauli, &kappa, ParamTuple::need(p.g0, "g0")?)?)),
        Kind::SlII => unreachable!(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Inequivalent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Shift,
    ShiftWithReversal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Coordinates of the shift element.
    pub g: Vec<i64>,
    pub flavor: Flavor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    /// Elements `g` (times branches) for which the criterion was checked and failed.
    pub checked_g_count: usize,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint_delta: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoDecision {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Refutation>,
}

impl IsoDecision {
    fn equivalent(group: &FinAbGroup, g: Elem, flavor: Flavor) -> Self {
        IsoDecision {
            verdict: Verdict::Equivalent,
            witness: Some(Witness { g: group.coords(g).iter().map(|&c| c as i64).collect(), flavor }),
            refutation: None,
        }
    }

    fn inequivalent(checked: usize, reason: impl Into<String>) -> Self {
        IsoDecision {
            verdict: Verdict::Inequivalent,
            witness: None,
            refutation: Some(Refutation { checked_g_count: checked, reason: reason.into(), fingerprint_delta: None }),
        }
    }

    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

/// Decides parameter equivalence: whether `q` is obtained from `p` by a shift (or, for sl-I, a
/// shift after reversal). Exhaustive over `G`.
pub fn decide(p: &ParamTuple, q: &ParamTuple, field: &RootField) -> Result<IsoDecision> {
    if p.group != q.group {
        return Err(Error::InvalidParameter("tuples live over different groups".into()));
    }
    if p.kind.family() != q.kind.family() {
        return Err(Error::InvalidParameter(format!(
            "kinds {} and {} are not comparable",
            p.kind.name(),
            q.kind.name()
        )));
    }
    if p.kind != q.kind {
        let reason = match p.kind.family() {
            3 => "Type I and Type II special linear models are never isomorphic",
            _ => "orthogonal and symplectic models are never isomorphic",
        };
        return Ok(IsoDecision::inequivalent(0, reason));
    }
    let g = &p.group;
    let mut checked = 0;
    for x in g.elements() {
        checked += 1;
        if p.transform(x, field)? == *q {
            return Ok(IsoDecision::equivalent(g, x, Flavor::Shift));
        }
    }
    if p.kind == Kind::SlI {
        let rev = p.reverse()?;
        for x in g.elements() {
            checked += 1;
            if rev.transform(x, field)? == *q {
                return Ok(IsoDecision::equivalent(g, x, Flavor::ShiftWithReversal));
            }
        }
    }
    Ok(IsoDecision::inequivalent(checked, "no g in G satisfies the criterion"))
}

/// [`decide`], with the first fingerprint discrepancy attached to refutations.
pub fn decide_with_fingerprints(p: &ParamTuple, q: &ParamTuple, field: &RootField) -> Result<IsoDecision> {
    let mut d = decide(p, q, field)?;
    if let Some(r) = d.refutation.as_mut() {
        let a = build(p, field)?.fingerprint();
        let b = build(q, field)?.fingerprint();
        r.fingerprint_delta = fingerprint_compare(&a, &b);
    }
    Ok(d)
}

/// Block-monomial conjugator from `r` to `r2`: block `(A, i)` goes to `(gA, i)` with factor
/// `X_{s(A)}`, `s(A) = gamma'(gA)^{-1} g gamma(A)`. With `w`, block `(B, j)` goes to
/// `(g B^{-1}, j)` with factor `X'_{s} w`, `s = g gamma(B)^{-1} gamma'(g B^{-1})^{-1}`, for use
/// after transposition.
fn conjugator(r: &GradedMatrixAlgebra, r2: &GradedMatrixAlgebra, g: Elem, w: Option<&Matrix>) -> Result<Matrix> {
    let fp = r.fp();
    let grp = r.group();
    let l = r.ell;
    if r.n != r2.n || l != r2.ell {
        return Err(Error::VerificationFailure("the two algebras have different sizes".into()));
    }
    let mut u = Matrix::zeros(fp, r.n, r.n);
    for (sb, &(a, i)) in r.blocks.iter().enumerate() {
        let rep = r.table.cosets[a][0];
        let target = match w {
            None => grp.add(rep, g),
            Some(_) => grp.sub(g, rep),
        };
        let a2 = r2.table.coset_of[target];
        if r2.kappa.values[a2] <= i {
            return Err(Error::VerificationFailure("shift does not match the multiplicities".into()));
        }
        let tb = r2.block_of(a2, i);
        let s = match w {
            None => grp.sub(grp.add(r.table.gamma[a], g), r2.table.gamma[a2]),
            Some(_) => grp.sub(grp.sub(g, r.table.gamma[a]), r2.table.gamma[a2]),
        };
        if !r2.support_t().contains(s) {
            return Err(Error::Internal("block factor outside T".into()));
        }
        let x = r2.pauli.x(s);
        let block = match w {
            None => x.clone(),
            Some(w) => x.mul(w),
        };
        for p in 0..l {
            for q in 0..l {
                u[(tb * l + p, sb * l + q)] = block[(p, q)];
            }
        }
    }
    Ok(u)
}

/// `w` with `w X_t^T w^{-1}` proportional to `X'_t` for all `t`.
fn transpose_intertwiner(d: &PauliAlgebra, d2: &PauliAlgebra, field: &RootField) -> Result<Matrix> {
    let fp = field.fp;
    let l = d.ell;
    let t = d.support();
    let gens = t.gens().to_vec();
    let grp = &t.parent;
    let mut options: Vec<Vec<u64>> = Vec::new();
    for &x in &gens {
        let o = grp.elem_order(x);
        let mut a = d.x(x).clone();
        let mut b = d2.x(x).clone();
        for _ in 1..o {
            a = a.mul(d.x(x));
            b = b.mul(d2.x(x));
        }
        let ratio = fp.mul(a[(0, 0)], fp.inv(b[(0, 0)]));
        let roots: Vec<u64> =
            (0..field.order as i64).map(|k| field.zeta_pow(k)).filter(|&c| fp.pow(c, o) == ratio).collect();
        if roots.is_empty() {
            return Err(Error::VerificationFailure("transposed Pauli power has no matching root".into()));
        }
        options.push(roots);
    }
    let mut choice = vec![0usize; gens.len()];
    loop {
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for (k, &x) in gens.iter().enumerate() {
            let c = options[k][choice[k]];
            let xt = d.x(x).transpose();
            let x2 = d2.x(x);
            // (W X^T - c X' W)[i][j] over unknowns W[a][b] at a * l + b.
            for i in 0..l {
                for j in 0..l {
                    let mut row = vec![0u64; l * l];
                    for k2 in 0..l {
                        row[i * l + k2] = fp.add(row[i * l + k2], xt[(k2, j)]);
                        row[k2 * l + j] = fp.sub(row[k2 * l + j], fp.mul(c, x2[(i, k2)]));
                    }
                    rows.push(row);
                }
            }
        }
        let sys = if rows.is_empty() { Matrix::zeros(fp, 1, l * l) } else { Matrix::from_rows(fp, &rows) };
        if let Some(v) = sys.nullspace().into_iter().next() {
            let w = Matrix::from_flat(fp, l, l, v);
            if w.inverse().is_some() {
                return Ok(w);
            }
        }
        // Next combination of root choices.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Err(Error::VerificationFailure(
                    "no intertwiner between transposed and inverse Pauli bases".into(),
                ));
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Rescale the source blocks of `u` by per-coset scalars so that `u^T S' u = c S`.
fn fix_form_scalars(u: &mut Matrix, d1: &InvolutionData, d2: &InvolutionData) -> Result<u64> {
    let r = &d1.algebra;
    let fp = r.fp();
    let l = r.ell;
    let us = u.to_sparse();
    let m = us.transpose().mul(&d2.s, fp).mul(&us, fp).to_dense(fp);
    let s = d1.s.to_dense(fp);
    let nco = r.table.len();
    let kappa = &r.kappa.values;
    let mut ratio = vec![0u64; nco];
    for a in 0..nco {
        if kappa[a] == 0 {
            continue;
        }
        let rows: Vec<usize> = (0..kappa[a]).flat_map(|i| (0..l).map(move |p| r.block_of(a, i) * l + p)).collect();
        let mut rho = None;
        for &i in &rows {
            for j in 0..r.n {
                let (mv, sv) = (m[(i, j)], s[(i, j)]);
                match (sv, rho) {
                    (0, _) if mv != 0 => {
                        return Err(Error::VerificationFailure("conjugated form has extra entries".into()))
                    }
                    (0, _) => {}
                    (_, None) => rho = Some(fp.mul(mv, fp.inv(sv))),
                    (_, Some(c)) if fp.mul(c, sv) != mv => {
                        return Err(Error::VerificationFailure("conjugated form is not block proportional".into()))
                    }
                    _ => {}
                }
            }
        }
        ratio[a] = rho.unwrap_or(0);
        if ratio[a] == 0 {
            return Err(Error::VerificationFailure("conjugated form is degenerate".into()));
        }
    }
    let nonempty = |a: usize| kappa[a] > 0;
    let c = (0..nco).find(|&a| nonempty(a) && d1.partner[a] == a).map(|a| ratio[a]).unwrap_or(1);
    let mut d = vec![1u64; nco];
    for a in (0..nco).filter(|&a| nonempty(a)) {
        let b = d1.partner[a];
        if a == b {
            d[a] = fp
                .sqrt(fp.mul(c, fp.inv(ratio[a])))
                .ok_or_else(|| Error::VerificationFailure("form scalar has no square root".into()))?;
        } else if a < b {
            if ratio[a] != ratio[b] {
                return Err(Error::VerificationFailure("paired blocks of the conjugated form disagree".into()));
            }
            d[b] = fp.mul(c, fp.inv(ratio[a]));
        }
    }
    for (sb, &(a, _)) in r.blocks.iter().enumerate() {
        if d[a] != 1 {
            for row in 0..r.n {
                for q in 0..l {
                    let v = u[(row, sb * l + q)];
                    u[(row, sb * l + q)] = fp.mul(v, d[a]);
                }
            }
        }
    }
    Ok(c)
}

/// Checks that `f` maps every component of `a` onto the component of `b` of the same degree.
fn components_match(
    fp: Fp,
    n: usize,
    a: &[(Elem, Vec<SparseMatrix>)],
    b: &[(Elem, Vec<SparseMatrix>)],
    f: impl Fn(&SparseMatrix) -> SparseMatrix,
) -> Result<()> {
    let span = |ms: &mut dyn Iterator<Item = SparseMatrix>| {
        let mut s = Subspace::zero(fp, n * n);
        for m in ms {
            s.insert(&m.as_vec());
        }
        s
    };
    let nonzero = |c: &[(Elem, Vec<SparseMatrix>)]| -> Vec<Elem> {
        c.iter().filter(|(_, v)| v.iter().any(|m| !m.is_zero())).map(|(g, _)| *g).collect()
    };
    if nonzero(a) != nonzero(b) {
        return Err(Error::VerificationFailure("supports differ".into()));
    }
    for ((g, xa), (_, xb)) in a.iter().zip(b.iter()) {
        let img = span(&mut xa.iter().map(&f));
        let target = span(&mut xb.iter().cloned());
        if img.rank() != target.rank() || !img.is_subspace_of(&target) {
            return Err(Error::VerificationFailure(format!(
                "component of degree {g} is not mapped onto its counterpart"
            )));
        }
    }
    Ok(())
}

/// Rebuilds both algebras and checks the conjugation (with transpose twist for reversal)
/// given by the witness.
pub fn verify_witness(p: &ParamTuple, q: &ParamTuple, decision: &IsoDecision, field: &RootField) -> Result<()> {
    let w = match (&decision.verdict, &decision.witness) {
        (Verdict::Equivalent, Some(w)) => w,
        _ => return Err(Error::InvalidParameter("decision carries no witness".into())),
    };
    let g = p.group.from_coords(&w.g)?;
    let a = build(p, field)?;
    let b = build(q, field)?;
    let (r, r2) = (a.ambient(), b.ambient());
    let fp = r.fp();
    // The ambient of sl-II is graded by the quotient.
    let shift = match p.kind {
        Kind::SlII => p.type_two(field)?.quotient.proj[g],
        _ => g,
    };
    let reversal = w.flavor == Flavor::ShiftWithReversal;
    let inter = if reversal { Some(transpose_intertwiner(&r.pauli, &r2.pauli, field)?) } else { None };
    let mut u = conjugator(r, r2, shift, inter.as_ref())?;
    let c = match (a.involution(), b.involution()) {
        (Some(d1), Some(d2)) => Some((fix_form_scalars(&mut u, d1, d2)?, d1, d2)),
        _ => None,
    };
    let u_inv = u.inverse().ok_or_else(|| Error::VerificationFailure("witness matrix is singular".into()))?.to_sparse();
    let us = u.to_sparse();
    if let Some((c, d1, d2)) = c {
        if us.transpose().mul(&d2.s, fp).mul(&us, fp) != d1.s.scale(c, fp) {
            return Err(Error::VerificationFailure("u^T S' u is not a multiple of S".into()));
        }
    }
    let minus = fp.p() - 1;
    let map = |x: &SparseMatrix| {
        if reversal {
            us.mul(&x.transpose(), fp).mul(&u_inv, fp).scale(minus, fp)
        } else {
            us.mul(x, fp).mul(&u_inv, fp)
        }
    };
    components_match(fp, r.n, &a.components(), &b.components(), map)?;
    if let (Some(la), Some(lb)) = (a.lie(), b.lie()) {
        if let (Some(ra), Some(rb)) = (&la.refined, &lb.refined) {
            components_match(fp, r.n, ra, rb, map)?;
        }
    }
    Ok(())
}

/// All valid tuples of one kind over `group` with `n <= max_n`, in a fixed order.
pub fn enumerate_tuples(group: &FinAbGroup, kind: Kind, max_n: usize, field: &RootField) -> Result<Vec<ParamTuple>> {
    let mut out = Vec::new();
    if kind == Kind::SlII {
        for h_sub in Subgroup::all(group).into_iter().filter(|s| s.is_elementary_two() && s.order() > 1) {
            for &h in h_sub.elements().iter().filter(|&&h| h != group.identity()) {
                let setup = TypeTwoSetup::new(group, &h_sub, h, field)?;
                let Some(ell) = setup.tbar.sqrt_order() else { continue };
                if setup.tbar.elements().iter().any(|&t| setup.chi_sq_bar[t] != 1) {
                    continue;
                }
                let qg = &setup.quotient.group;
                let k = qg.order() / setup.tbar.order();
                let tables: Vec<Arc<CosetTable>> = qg
                    .elements()
                    .map(|g0| CosetTable::new(&setup.tbar, Some(g0)).map(Arc::new))
                    .collect::<Result<_>>()?;
                for beta in Bicharacter::enumerate_nondegenerate(&setup.tbar) {
                    let pauli = PauliAlgebra::new(&beta, field)?;
                    let mut mus = Vec::new();
                    for g0 in qg.elements() {
                        let target = field.fp.inv(setup.chi_sq_bar[g0]);
                        let Some(r) = field.fp.sqrt(target) else { continue };
                        let mut roots = vec![r, field.fp.neg(r)];
                        roots.sort_unstable();
                        roots.dedup();
                        for mu0 in roots {
                            let mu = mu_from_type2(&tables[g0], g0, mu0, &setup.chi_sq_bar, &pauli)?;
                            mus.push((g0, mu0, mu));
                        }
                    }
                    for kappa in kappas(k, max_n / ell) {
                        if kappa.iter().sum::<usize>() * ell < 2 {
                            continue;
                        }
                        for (g0, mu0, mu) in &mus {
                            let table = &tables[*g0];
                            let admissible = (0..table.len()).all(|a| {
                                let b = paired_coset(table, *g0, a);
                                kappa[a] == kappa[b] && !(a == b && mu.values[a] != 1 && kappa[a] % 2 == 1)
                            });
                            if admissible {
                                out.push(ParamTuple::sl2(group, &h_sub, h, &beta, kappa.clone(), *mu0, *g0));
                            }
                        }
                    }
                }
            }
        }
        return Ok(out);
    }
    let minus = field.fp.p() - 1;
    for (t, beta) in division_data(group) {
        let ell = t.sqrt_order().expect("square order");
        let elementary = t.is_elementary_two();
        if matches!(kind, Kind::Antiauto | Kind::Involution | Kind::So | Kind::Sp) && !elementary {
            continue;
        }
        let table = Arc::new(CosetTable::new(&t, None)?);
        let pauli = PauliAlgebra::new(&beta, field)?;
        for kappa in kappas(table.len(), max_n / ell) {
            let n = kappa.iter().sum::<usize>() * ell;
            match kind {
                Kind::Assoc => out.push(ParamTuple::assoc(&t, &beta, kappa)),
                Kind::SlI => {
                    if n >= 2 {
                        out.push(ParamTuple::sl1(&t, &beta, kappa))
                    }
                }
                Kind::Involution | Kind::So | Kind::Sp => {
                    let deltas: &[i8] = match kind {
                        Kind::So => &[1],
                        Kind::Sp => &[-1],
                        _ => &[1, -1],
                    };
                    if kind != Kind::Involution && n < 2 {
                        continue;
                    }
                    if kind == Kind::Sp && n % 2 == 1 {
                        continue;
                    }
                    let km = KappaMap::with_cosets(&table, kappa.clone())?;
                    for g0 in group.elements() {
                        for &delta in deltas {
                            if exist_involution(&km, &pauli, delta, g0)? {
                                out.push(match kind {
                                    Kind::So => ParamTuple::so(&t, &beta, kappa.clone(), g0),
                                    Kind::Sp => ParamTuple::sp(&t, &beta, kappa.clone(), g0),
                                    _ => ParamTuple::involution(&t, &beta, kappa.clone(), g0, delta),
                                });
                            }
                        }
                    }
                }
                Kind::Antiauto => {
                    for g0 in group.elements() {
                        let partner: Vec<usize> = (0..table.len()).map(|a| paired_coset(&table, g0, a)).collect();
                        if (0..table.len()).any(|a| kappa[a] != kappa[partner[a]]) {
                            continue;
                        }
                        // Signs on each nonempty orbit {A, A*}; the partner carries the inverse.
                        let free: Vec<usize> = (0..table.len()).filter(|&a| kappa[a] > 0 && a <= partner[a]).collect();
                        for mask in 0..1u32 << free.len() {
                            let mut mu = vec![1u64; table.len()];
                            let mut ok = true;
                            for (bit, &a) in free.iter().enumerate() {
                                if mask >> bit & 1 == 1 {
                                    if partner[a] == a && kappa[a] % 2 == 1 {
                                        ok = false;
                                    }
                                    mu[a] = minus;
                                    mu[partner[a]] = minus;
                                }
                            }
                            if ok {
                                out.push(ParamTuple::antiauto(&t, &beta, kappa.clone(), g0, mu));
                            }
                        }
                    }
                }
                Kind::SlII => unreachable!(),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusClass {
    pub n: usize,
    pub size: usize,
    pub representative: ParamSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub group: Vec<u32>,
    pub kind: Kind,
    pub max_n: usize,
    pub tuples: usize,
    pub classes: Vec<CensusClass>,
}

/// Buckets all tuples of one kind into decider classes; classes ordered by `n`, then by
/// first appearance.
pub fn census(group: &FinAbGroup, kind: Kind, max_n: usize, field: &RootField) -> Result<Census> {
    let tuples = enumerate_tuples(group, kind, max_n, field)?;
    let mut reps: Vec<(ParamTuple, usize)> = Vec::new();
    for p in &tuples {
        let mut found = None;
        for (i, (rep, _)) in reps.iter().enumerate() {
            if rep.n() == p.n() && decide(rep, p, field)?.is_equivalent() {
                found = Some(i);
                break;
            }
        }
        match found {
            Some(i) => reps[i].1 += 1,
            None => reps.push((p.clone(), 1)),
        }
    }
    let mut classes: Vec<CensusClass> = reps
        .iter()
        .map(|(rep, size)| CensusClass { n: rep.n(), size: *size, representative: rep.to_spec(field) })
        .collect();
    classes.sort_by_key(|c| c.n);
    Ok(Census { group: group.factors().to_vec(), kind, max_n, tuples: tuples.len(), classes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> (FinAbGroup, Subgroup, Bicharacter, RootField) {
        let g = FinAbGroup::new(&[2]).unwrap();
        let t = Subgroup::trivial(&g);
        let b = Bicharacter::trivial(&t);
        let f = default_field(&g, None).unwrap();
        (g, t, b, f)
    }

    fn check(p: &ParamTuple, q: &ParamTuple, f: &RootField) -> IsoDecision {
        let d = decide(p, q, f).unwrap();
        if d.is_equivalent() {
            verify_witness(p, q, &d, f).unwrap();
        }
        d
    }

    #[test]
    fn assoc_shift() {
        let (g, t, b, f) = z2();
        let d = check(&ParamTuple::assoc(&t, &b, vec![2, 1]), &ParamTuple::assoc(&t, &b, vec![1, 2]), &f);
        assert_eq!(d.witness.unwrap(), Witness { g: vec![1], flavor: Flavor::Shift });
        let d = decide(&ParamTuple::assoc(&t, &b, vec![2, 1]), &ParamTuple::assoc(&t, &b, vec![3, 0]), &f).unwrap();
        assert_eq!(d.refutation.unwrap().checked_g_count, g.order());
    }

    #[test]
    fn involutions_over_z2() {
        let (_, t, b, f) = z2();
        let p = ParamTuple::involution(&t, &b, vec![1, 1], 0, 1);
        let q = ParamTuple::involution(&t, &b, vec![1, 1], 1, 1);
        assert!(!decide(&p, &q, &f).unwrap().is_equivalent());
        let q = ParamTuple::involution(&t, &b, vec![1, 1], 0, -1);
        assert!(!decide(&p, &q, &f).unwrap().is_equivalent());
        let p = ParamTuple::involution(&t, &b, vec![2, 0], 0, 1);
        let q = ParamTuple::involution(&t, &b, vec![0, 2], 0, 1);
        assert!(check(&p, &q, &f).is_equivalent());
    }

    #[test]
    fn so2_pair_refuted_by_fingerprint() {
        let (_, t, b, f) = z2();
        let p = ParamTuple::so(&t, &b, vec![1, 1], 0);
        let q = ParamTuple::so(&t, &b, vec![1, 1], 1);
        let d = decide_with_fingerprints(&p, &q, &f).unwrap();
        assert_eq!(d.verdict, Verdict::Inequivalent);
        let delta = d.refutation.unwrap().fingerprint_delta.unwrap();
        assert!(delta.contains("(0, 1) vs (1, 0)"), "{delta}");
    }

    #[test]
    fn sl1_reversal() {
        let g = FinAbGroup::new(&[3]).unwrap();
        let t = Subgroup::trivial(&g);
        let b = Bicharacter::trivial(&t);
        let f = default_field(&g, None).unwrap();
        let p = ParamTuple::sl1(&t, &b, vec![2, 1, 0]);
        let q = p.reverse().unwrap();
        assert_eq!(q.kappa, vec![2, 0, 1]);
        let d = check(&p, &q, &f);
        assert_eq!(d.witness.unwrap(), Witness { g: vec![0], flavor: Flavor::ShiftWithReversal });
        for x in g.elements() {
            let q = p.reverse().unwrap().transform(x, &f).unwrap();
            assert!(check(&p, &q, &f).is_equivalent());
        }
    }

    #[test]
    fn cross_type_is_inequivalent() {
        let (g, t, b, f) = z2();
        let p = ParamTuple::sl1(&t, &b, vec![1, 1]);
        let setup = TypeTwoSetup::new(&g, &Subgroup::whole(&g), 1, &f).unwrap();
        let q = ParamTuple::sl2(&g, &Subgroup::whole(&g), 1, &Bicharacter::trivial(&setup.tbar), vec![2], 1, 0);
        assert!(!decide(&p, &q, &f).unwrap().is_equivalent());
        let p = ParamTuple::so(&t, &b, vec![1, 1], 0);
        let q = ParamTuple::sp(&t, &b, vec![1, 1], 1);
        assert!(!decide(&p, &q, &f).unwrap().is_equivalent());
    }

    #[test]
    fn transforms_are_witnessed() {
        for factors in [&[2u32][..], &[4], &[2, 2]] {
            let g = FinAbGroup::new(factors).unwrap();
            let f = default_field(&g, None).unwrap();
            for kind in Kind::ALL {
                for p in enumerate_tuples(&g, kind, 4, &f).unwrap().iter().step_by(7) {
                    for x in g.elements() {
                        let q = p.transform(x, &f).unwrap();
                        let d = check(p, &q, &f);
                        assert!(d.is_equivalent(), "{kind:?} {p:?} by {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn so_census_over_z2() {
        let (g, _, _, f) = z2();
        let c = census(&g, Kind::So, 2, &f).unwrap();
        let at_11: Vec<_> = c.classes.iter().filter(|c| c.representative.kappa == vec![1, 1]).collect();
        assert_eq!(at_11.len(), 2);
        assert_eq!(c.classes.len(), 3);
    }

    #[test]
    fn trivial_group_single_class() {
        let g = FinAbGroup::trivial();
        let f = default_field(&g, None).unwrap();
        let c = census(&g, Kind::SlI, 3, &f).unwrap();
        assert_eq!(c.classes.iter().map(|c| c.n).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn spec_round_trip() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let f = default_field(&g, None).unwrap();
        for kind in Kind::ALL {
            for p in enumerate_tuples(&g, kind, 4, &f).unwrap() {
                let s = p.to_spec(&f);
                let json = serde_json::to_string(&s).unwrap();
                let back: ParamSpec = serde_json::from_str(&json).unwrap();
                assert_eq!(ParamTuple::from_spec(&back, &f).unwrap(), p);
            }
        }
    }
}
