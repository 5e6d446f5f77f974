//! JSON artifacts: a versioned header, the parameters, the basis index with its degree
//! table, and optional matrices, form and Lie blocks. Verification reads the stored data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RootField;
use crate::forms::check_involution;
use crate::graded::{fingerprint, verify_grading, Decomposition, Fingerprint, GradingReport, Product};
use crate::group::{Elem, FinAbGroup};
use crate::isoclass::{build, Kind, ParamSpec, ParamTuple, Realization};
use crate::lie::{GradedLieAlgebra, LieFamily};
use crate::linalg::SparseMatrix;

pub const FORMAT: &str = "gal-v1";

/// Sparse matrix entries `(row, col, residue)`.
pub type Entries = Vec<(usize, usize, u64)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub p: u64,
    /// Order `N` of the distinguished root of unity.
    pub root_order: u64,
    pub zeta: u64,
    pub group: Vec<u32>,
    pub invariant_factors: Vec<u32>,
    /// Factors of `G/<h>` for Type II models; ambient degrees refer to this group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<Vec<u32>>,
}

/// Basis element `E^{row, col} (x) X_t` of the associative ambient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub row: usize,
    pub col: usize,
    pub t: Vec<u32>,
    pub degree: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormBlock {
    pub g0: Vec<u32>,
    pub mu: Vec<u64>,
    pub lambda: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    pub s: Entries,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub degree: Vec<u32>,
    pub basis: Vec<Entries>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieBlock {
    pub family: LieFamily,
    pub dim: usize,
    pub components: Vec<Component>,
    /// Type II: refined associative components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined: Option<Vec<Component>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub header: Header,
    pub params: ParamSpec,
    pub n: usize,
    pub basis: Vec<BasisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Entries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<FormBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lie: Option<LieBlock>,
}

fn entries(m: &SparseMatrix) -> Entries {
    m.entries.iter().map(|&(k, v)| (k / m.n, k % m.n, v)).collect()
}

fn from_entries(n: usize, e: &Entries, field: &RootField) -> Result<SparseMatrix> {
    if let Some(&(i, j, v)) = e.iter().find(|&&(i, j, v)| i >= n || j >= n || v >= field.p()) {
        return Err(Error::InvalidParameter(format!("matrix entry ({i}, {j}, {v}) out of range")));
    }
    Ok(SparseMatrix::from_triplets(field.fp, n, e.clone()))
}

fn components(group: &FinAbGroup, comps: &[(Elem, Vec<SparseMatrix>)]) -> Vec<Component> {
    comps.iter().map(|(g, b)| Component { degree: group.coords(*g), basis: b.iter().map(entries).collect() }).collect()
}

impl Artifact {
    pub fn from_realization(p: &ParamTuple, real: &Realization, field: &RootField, with_matrices: bool) -> Self {
        let r = real.ambient();
        let ag = r.group();
        let basis = (0..r.dim())
            .map(|i| {
                let lab = r.label(i);
                BasisEntry { row: lab.row, col: lab.col, t: ag.coords(lab.t), degree: ag.coords(r.degree(i)) }
            })
            .collect();
        let matrices = with_matrices.then(|| (0..r.dim()).map(|i| entries(&r.realize(i))).collect());
        let involution = real.involution().map(|d| FormBlock {
            g0: ag.coords(d.g0),
            mu: d.mu.values.clone(),
            lambda: d.lambda.clone(),
            sign: d.sign,
            s: entries(&d.s),
        });
        let lie = real.lie().map(|l: &GradedLieAlgebra| LieBlock {
            family: l.family,
            dim: l.dim(),
            components: components(&l.group, &l.basis),
            refined: l.refined.as_ref().map(|c| components(&l.group, c)),
        });
        Artifact {
            header: Header {
                format: FORMAT.into(),
                p: field.p(),
                root_order: field.order,
                zeta: field.zeta,
                group: p.group.factors().to_vec(),
                invariant_factors: p.group.invariant_factors(),
                quotient: (p.kind == Kind::SlII).then(|| ag.factors().to_vec()),
            },
            params: p.to_spec(field),
            n: r.n,
            basis,
            matrices,
            involution,
            lie,
        }
    }

    pub fn field(&self) -> Result<RootField> {
        if self.header.format != FORMAT {
            return Err(Error::InvalidParameter(format!("unknown artifact format {:?}", self.header.format)));
        }
        RootField::from_parts(self.header.p, self.header.root_order, self.header.zeta)
    }

    pub fn params(&self) -> Result<ParamTuple> {
        let field = self.field()?;
        if self.params.group != self.header.group {
            return Err(Error::InvalidParameter("header group differs from the parameters".into()));
        }
        ParamTuple::from_spec(&self.params, &field)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("artifact does not parse: {e}")))
    }
}

/// Stored associative decomposition of the ambient, graded by the stored degree table.
pub fn ambient_decomposition(a: &Artifact, real: &Realization) -> Result<Decomposition> {
    let field = a.field()?;
    let r = real.ambient();
    let g = r.group();
    let mut comps: std::collections::BTreeMap<Elem, Vec<SparseMatrix>> = Default::default();
    for (i, e) in a.basis.iter().enumerate() {
        let m = match &a.matrices {
            Some(ms) => {
                from_entries(a.n, ms.get(i).ok_or_else(|| Error::InvalidParameter("missing matrix".into()))?, &field)?
            }
            None => {
                let t = g.from_coords(&e.t.iter().map(|&c| c as i64).collect::<Vec<_>>())?;
                let nb = r.blocks.len();
                if e.row >= nb || e.col >= nb || !r.support_t().contains(t) {
                    return Err(Error::InvalidParameter(format!("basis entry {i} is out of range")));
                }
                r.block_matrix(e.row, e.col, r.pauli.x(t))
            }
        };
        let d = g.from_coords(&e.degree.iter().map(|&c| c as i64).collect::<Vec<_>>())?;
        comps.entry(d).or_default().push(m);
    }
    Ok(Decomposition { n: a.n, fp: field.fp, components: comps.into_iter().collect() })
}

fn stored_components(n: usize, group: &FinAbGroup, comps: &[Component], field: &RootField) -> Result<Decomposition> {
    let mut out: Vec<(Elem, Vec<SparseMatrix>)> = Vec::new();
    for c in comps {
        let d = group.from_coords(&c.degree.iter().map(|&x| x as i64).collect::<Vec<_>>())?;
        let b = c.basis.iter().map(|e| from_entries(n, e, field)).collect::<Result<Vec<_>>>()?;
        match out.iter_mut().find(|(g, _)| *g == d) {
            Some((_, v)) => v.extend(b),
            None => out.push((d, b)),
        }
    }
    out.sort_by_key(|(g, _)| *g);
    Ok(Decomposition { n, fp: field.fp, components: out })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Associative check on the ambient (stored basis and degrees).
    pub ambient: GradingReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lie: Option<GradingReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_lie: Option<GradingReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_associative: Option<GradingReport>,
    /// Problems found outside the closure checks.
    pub issues: Vec<String>,
    pub ok: bool,
}

/// Checks a parsed artifact. With `associative`, a Type II artifact is expected to FAIL the
/// associative check on its refined components, and `ok` means it does.
pub fn verify_artifact(a: &Artifact, associative: bool) -> Result<VerifyReport> {
    let field = a.field()?;
    let p = a.params()?;
    let real = build(&p, &field)?;
    let r = real.ambient();
    if r.n != a.n {
        return Err(Error::InvalidParameter(format!("artifact says n = {}, parameters give {}", a.n, r.n)));
    }
    let ambient = verify_grading(r.group(), &ambient_decomposition(a, &real)?, Product::Associative);
    let mut issues = Vec::new();
    if ambient.total_dim != a.n * a.n {
        issues.push(format!("ambient components span {} of {} dimensions", ambient.total_dim, a.n * a.n));
    }
    if let Some(d) = real.involution() {
        match &a.involution {
            None => issues.push("involution block missing".into()),
            Some(f) => {
                if from_entries(a.n, &f.s, &field)? != d.s || f.mu != d.mu.values || f.sign != d.sign {
                    issues.push("stored form differs from the one the parameters define".into());
                }
            }
        }
        if let Err(e) = check_involution(d) {
            issues.push(e.to_string());
        }
        if !d.grading_violations().is_empty() {
            issues.push("phi does not preserve the grading".into());
        }
        if !d.orthogonality_violations().is_empty() {
            issues.push("S has blocks outside the paired pattern".into());
        }
    }
    let mut report =
        VerifyReport { ambient, lie: None, refined_lie: None, refined_associative: None, issues, ok: false };
    if let Some(l) = real.lie() {
        let Some(block) = &a.lie else {
            return Err(Error::InvalidParameter("Lie block missing".into()));
        };
        let dec = stored_components(a.n, &l.group, &block.components, &field)?;
        let rep = verify_grading(&l.group, &dec, Product::Lie);
        let expected = l.family.expected_dim(a.n);
        if rep.total_dim != expected {
            report.issues.push(format!("Lie components span {} dimensions, expected {expected}", rep.total_dim));
        }
        if dec.components.iter().flat_map(|(_, b)| b).any(|m| m.trace(field.fp) != 0) {
            report.issues.push("a Lie basis element has nonzero trace".into());
        }
        report.lie = Some(rep);
        if let Some(refined) = &block.refined {
            let dec = stored_components(a.n, &l.group, refined, &field)?;
            report.refined_lie = Some(verify_grading(&l.group, &dec, Product::Lie));
            report.refined_associative = Some(verify_grading(&l.group, &dec, Product::Associative));
        }
    }
    if associative {
        let Some(assoc) = &report.refined_associative else {
            return Err(Error::InvalidParameter("--associative applies to Type II artifacts only".into()));
        };
        report.ok = !assoc.violations.is_empty();
    } else {
        report.ok = report.ambient.is_valid()
            && report.issues.is_empty()
            && report.lie.as_ref().is_none_or(|r| r.is_valid())
            && report.refined_lie.as_ref().is_none_or(|r| r.is_valid());
    }
    Ok(report)
}

/// Fingerprint of the stored graded object (Lie components for Lie artifacts).
pub fn artifact_fingerprint(a: &Artifact) -> Result<Fingerprint> {
    let field = a.field()?;
    let p = a.params()?;
    let real = build(&p, &field)?;
    match (real.lie(), &a.lie) {
        (Some(l), Some(block)) => {
            Ok(fingerprint(&l.group, &stored_components(a.n, &l.group, &block.components, &field)?))
        }
        (Some(_), None) => Err(Error::InvalidParameter("Lie block missing".into())),
        _ => Ok(fingerprint(real.ambient().group(), &ambient_decomposition(a, &real)?)),
    }
}

/// Basis matrices of degree `g` (coordinates): Lie components for Lie artifacts, otherwise
/// the ambient basis.
pub fn basis_of_degree(a: &Artifact, g: &[u32]) -> Result<Vec<Entries>> {
    if let Some(block) = &a.lie {
        return Ok(block.components.iter().filter(|c| c.degree == g).flat_map(|c| c.basis.clone()).collect());
    }
    let field = a.field()?;
    let real = build(&a.params()?, &field)?;
    let dec = ambient_decomposition(a, &real)?;
    let d = real.ambient().group().from_coords(&g.iter().map(|&c| c as i64).collect::<Vec<_>>())?;
    Ok(dec.component(d).map(|c| c.iter().map(entries).collect()).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoclass::{default_field, enumerate_tuples};

    #[test]
    fn round_trip_all_kinds() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let f = default_field(&g, None).unwrap();
        for kind in Kind::ALL {
            for p in enumerate_tuples(&g, kind, 3, &f).unwrap().iter().step_by(5) {
                let real = build(p, &f).unwrap();
                let a = Artifact::from_realization(p, &real, &f, kind == Kind::Assoc);
                let s = a.to_json();
                let b = Artifact::from_json(&s).unwrap();
                assert_eq!(a, b);
                assert_eq!(b.to_json(), s);
                let rep = verify_artifact(&b, false).unwrap();
                assert!(rep.ok, "{kind:?}: {rep:?}");
                assert_eq!(rep, verify_artifact(&a, false).unwrap());
            }
        }
    }

    #[test]
    fn corrupted_degree_is_caught() {
        let g = FinAbGroup::new(&[2]).unwrap();
        let f = default_field(&g, None).unwrap();
        let p = enumerate_tuples(&g, Kind::Assoc, 2, &f).unwrap().into_iter().find(|p| p.kappa == vec![1, 1]).unwrap();
        let mut a = Artifact::from_realization(&p, &build(&p, &f).unwrap(), &f, false);
        let e = a.basis.iter_mut().find(|e| e.degree == vec![1]).unwrap();
        e.degree = vec![0];
        let rep = verify_artifact(&a, false).unwrap();
        assert!(!rep.ok);
        assert!(!rep.ambient.violations.is_empty());
    }

    #[test]
    fn type_two_associative_mode() {
        let g = FinAbGroup::new(&[2]).unwrap();
        let f = default_field(&g, None).unwrap();
        let p = enumerate_tuples(&g, Kind::SlII, 2, &f).unwrap().remove(0);
        let a = Artifact::from_realization(&p, &build(&p, &f).unwrap(), &f, false);
        assert!(verify_artifact(&a, false).unwrap().ok);
        assert!(verify_artifact(&a, true).unwrap().ok);
    }
}
