//! Graded division algebra `M_ell(F)` spanned by generalized Pauli matrices `X_t`.

use crate::error::{Error, Result};
use crate::field::RootField;
use crate::group::{symplectic_basis, Bicharacter, Elem, Subgroup, SymplecticBasis};
use crate::linalg::Matrix;

#[derive(Clone, Debug)]
pub struct PauliAlgebra {
    pub field: RootField,
    pub beta: Bicharacter,
    pub basis: SymplecticBasis,
    pub ell: usize,
    /// `X_t`, indexed by position of `t` in the sorted subgroup.
    x: Vec<Matrix>,
    x_inv: Vec<Matrix>,
    /// `sigma(t, t')` with `X_t X_t' = sigma X_{tt'}`, row-major over subgroup positions.
    sigma: Vec<u64>,
    /// `X_t^T = sign(t) X_t` when the support is an elementary 2-group.
    signs: Option<Vec<i8>>,
}

fn clock(field: &RootField, l: u64) -> Result<Matrix> {
    let z = field.root(l, 1)?;
    let mut m = Matrix::zeros(field.fp, l as usize, l as usize);
    let mut cur = 1;
    for i in 0..l as usize {
        m[(i, i)] = cur;
        cur = field.fp.mul(cur, z);
    }
    Ok(m)
}

fn shift(field: &RootField, l: u64) -> Matrix {
    let l = l as usize;
    let mut m = Matrix::zeros(field.fp, l, l);
    for j in 0..l {
        m[((j + 1) % l, j)] = 1;
    }
    m
}

fn mat_pow(m: &Matrix, k: u64) -> Matrix {
    let mut r = Matrix::identity(m.fp, m.rows());
    for _ in 0..k {
        r = r.mul(m);
    }
    r
}

/// Scalar `c` with `a = c * b`, if one exists and `b` is nonzero.
pub fn proportionality(a: &Matrix, b: &Matrix) -> Option<u64> {
    let fp = a.fp;
    let k = b.as_flat().iter().position(|&x| x != 0)?;
    let c = fp.mul(a.as_flat()[k], fp.inv(b.as_flat()[k]));
    (a == &b.scale(c)).then_some(c)
}

impl PauliAlgebra {
    /// Builds `X_t` as tensor products of clock and shift matrices over the symplectic pairs.
    pub fn new(beta: &Bicharacter, field: &RootField) -> Result<Self> {
        beta.validate()?;
        let basis = symplectic_basis(beta)?;
        Self::with_basis(beta, basis, field)
    }

    pub fn with_basis(beta: &Bicharacter, basis: SymplecticBasis, field: &RootField) -> Result<Self> {
        let t = &beta.subgroup;
        let g = &t.parent;
        let fp = field.fp;
        if (t.order() as u64).is_multiple_of(fp.p()) {
            return Err(Error::InvalidField(format!("characteristic {} divides |T|", fp.p())));
        }
        let mut clocks = Vec::new();
        let mut shifts = Vec::new();
        for &l in &basis.ells {
            clocks.push(clock(field, l)?);
            shifts.push(shift(field, l));
        }
        let ell: usize = basis.ells.iter().product::<u64>() as usize;
        let mut x = Vec::with_capacity(t.order());
        for &el in t.elements() {
            let c = basis
                .coordinates(g, el)
                .ok_or_else(|| Error::InvalidParameter("symplectic pairs do not generate T".into()))?;
            let mut m = Matrix::identity(fp, 1);
            for i in 0..basis.pairs.len() {
                let factor = mat_pow(&clocks[i], c[2 * i]).mul(&mat_pow(&shifts[i], c[2 * i + 1]));
                m = m.kron(&factor);
            }
            x.push(m);
        }
        let n = t.order();
        let mut sigma = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let prod = x[i].mul(&x[j]);
                let k = t.index_of(g.add(t.elements()[i], t.elements()[j])).unwrap();
                sigma[i * n + j] = proportionality(&prod, &x[k])
                    .ok_or_else(|| Error::Internal("X_t X_t' not proportional to X_tt'".into()))?;
            }
        }
        let x_inv = x
            .iter()
            .map(|m| m.inverse().ok_or_else(|| Error::Internal("singular Pauli matrix".into())))
            .collect::<Result<Vec<_>>>()?;
        let mut d = PauliAlgebra { field: *field, beta: beta.clone(), basis, ell, x, x_inv, sigma, signs: None };
        // Commutation must reproduce beta.
        let e = g.exponent();
        for &a in t.elements() {
            for &b in t.elements() {
                let want = field.root(e, beta.value(a, b) as i64)?;
                if d.commutator_scalar(a, b) != want {
                    return Err(Error::Internal(format!(
                        "commutation of X_{:?}, X_{:?} disagrees with beta",
                        g.coords(a),
                        g.coords(b)
                    )));
                }
            }
        }
        if t.is_elementary_two() {
            d.signs = Some(d.compute_signs()?);
        }
        Ok(d)
    }

    pub fn support(&self) -> &Subgroup {
        &self.beta.subgroup
    }

    fn pos(&self, t: Elem) -> usize {
        self.support().index_of(t).expect("element outside the support")
    }

    pub fn x(&self, t: Elem) -> &Matrix {
        &self.x[self.pos(t)]
    }

    pub fn x_inv(&self, t: Elem) -> &Matrix {
        &self.x_inv[self.pos(t)]
    }

    pub fn sigma(&self, a: Elem, b: Elem) -> u64 {
        self.sigma[self.pos(a) * self.support().order() + self.pos(b)]
    }

    /// `sigma(a, b) / sigma(b, a)`.
    pub fn commutator_scalar(&self, a: Elem, b: Elem) -> u64 {
        let fp = self.field.fp;
        fp.mul(self.sigma(a, b), fp.inv(self.sigma(b, a)))
    }

    /// `beta(a, b)` as a field element.
    pub fn beta_value(&self, a: Elem, b: Elem) -> u64 {
        let e = self.support().parent.exponent();
        self.field.root(e, self.beta.value(a, b) as i64).expect("field carries beta's roots")
    }

    fn compute_signs(&self) -> Result<Vec<i8>> {
        let t = self.support();
        let mut out = Vec::with_capacity(t.order());
        for m in &self.x {
            let c = proportionality(&m.transpose(), m)
                .ok_or_else(|| Error::Internal("X_t^T not proportional to X_t".into()))?;
            out.push(match c {
                1 => 1,
                c if c == self.field.minus_one() => -1,
                _ => return Err(Error::Internal("transpose sign is not +-1".into())),
            });
        }
        // Quadratic relation sign(tt') = sign(t) sign(t') beta(t, t').
        let g = &t.parent;
        for &a in t.elements() {
            for &b in t.elements() {
                let lhs = out[t.index_of(g.add(a, b)).unwrap()];
                let bv = if self.beta_value(a, b) == 1 { 1 } else { -1 };
                if lhs != out[t.index_of(a).unwrap()] * out[t.index_of(b).unwrap()] * bv {
                    return Err(Error::Internal("transpose signs are not a quadratic form for beta".into()));
                }
            }
        }
        Ok(out)
    }

    /// `t -> sign(t)` with `X_t^T = sign(t) X_t`; only for elementary 2-group supports.
    pub fn transpose_signs(&self) -> Result<&[i8]> {
        self.signs
            .as_deref()
            .ok_or_else(|| Error::Unsupported("transpose signs need an elementary 2-group support".into()))
    }

    pub fn sign(&self, t: Elem) -> Result<i8> {
        Ok(self.transpose_signs()?[self.pos(t)])
    }

    /// The normalized antiautomorphism `phi0(X_t) = sign(t) X_t` of the division algebra:
    /// matrix transposition.
    pub fn phi0(&self, m: &Matrix) -> Result<Matrix> {
        self.transpose_signs()?;
        Ok(m.transpose())
    }

    /// Checks `phi0(X_t) = sign(t) X_t`, `phi0^2 = id` and `phi0(X_s X_t) = phi0(X_t) phi0(X_s)`.
    pub fn verify_phi0(&self) -> Result<()> {
        let signs = self.transpose_signs()?;
        let fp = self.field.fp;
        for (i, m) in self.x.iter().enumerate() {
            let s = if signs[i] == 1 { 1 } else { fp.p() - 1 };
            if self.phi0(m)? != m.scale(s) || self.phi0(&self.phi0(m)?)? != *m {
                return Err(Error::Internal("phi0 normalization fails".into()));
            }
            for m2 in &self.x {
                if self.phi0(&m.mul(m2))? != self.phi0(m2)?.mul(&self.phi0(m)?) {
                    return Err(Error::Internal("phi0 is not anti-multiplicative".into()));
                }
            }
        }
        Ok(())
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FinAbGroup;

    fn klein() -> (FinAbGroup, PauliAlgebra) {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let t = Subgroup::whole(&g);
        let beta = Bicharacter::from_gram(&t, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let f = RootField::new(&[2], None).unwrap();
        (g.clone(), PauliAlgebra::new(&beta, &f).unwrap())
    }

    #[test]
    fn klein_four_tables() {
        let (g, d) = klein();
        let fp = d.field.fp;
        let e10 = g.from_coords(&[1, 0]).unwrap();
        let e01 = g.from_coords(&[0, 1]).unwrap();
        let e11 = g.from_coords(&[1, 1]).unwrap();
        assert_eq!(d.basis.pairs, vec![(e10, e01)]);
        assert_eq!(*d.x(e10), Matrix::from_i64(fp, &[vec![1, 0], vec![0, -1]]));
        assert_eq!(*d.x(e01), Matrix::from_i64(fp, &[vec![0, 1], vec![1, 0]]));
        assert_eq!(*d.x(e11), Matrix::from_i64(fp, &[vec![0, 1], vec![-1, 0]]));
        assert_eq!(d.sigma(e10, e01), 1);
        assert_eq!(d.sigma(e01, e10), fp.p() - 1);
        assert_eq!(d.commutator_scalar(e10, e01), fp.p() - 1);
        assert_eq!(d.transpose_signs().unwrap(), &[1, 1, 1, -1]);
        d.verify_phi0().unwrap();
        assert_eq!(d.phi0(d.x(e11)).unwrap(), d.x(e11).scale(fp.p() - 1));
    }

    #[test]
    fn trivial_support() {
        let g = FinAbGroup::new(&[3]).unwrap();
        let t = Subgroup::trivial(&g);
        let f = RootField::new(&[3], None).unwrap();
        let d = PauliAlgebra::new(&Bicharacter::trivial(&t), &f).unwrap();
        assert_eq!(d.ell, 1);
        assert_eq!(*d.x(0), Matrix::identity(f.fp, 1));
        assert_eq!(d.transpose_signs().unwrap(), &[1]);
    }

    #[test]
    fn z3_squared_commutation() {
        let g = FinAbGroup::new(&[3, 3]).unwrap();
        let t = Subgroup::whole(&g);
        let beta = Bicharacter::from_gram(&t, vec![vec![0, 1], vec![2, 0]]).unwrap();
        let f = RootField::new(&[3], None).unwrap();
        let d = PauliAlgebra::new(&beta, &f).unwrap();
        let z3 = f.root(3, 1).unwrap();
        assert_eq!(d.commutator_scalar(g.from_coords(&[1, 0]).unwrap(), g.from_coords(&[0, 1]).unwrap()), z3);
        assert!(matches!(d.transpose_signs(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn two_planes_signs() {
        let g = FinAbGroup::new(&[2, 2, 2, 2]).unwrap();
        let t = Subgroup::whole(&g);
        let gram = vec![vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]];
        let beta = Bicharacter::from_gram(&t, gram).unwrap();
        let f = RootField::new(&[2], None).unwrap();
        let d = PauliAlgebra::new(&beta, &f).unwrap();
        assert_eq!(d.basis.pairs.len(), 2);
        assert_eq!(d.sign(g.from_coords(&[1, 1, 0, 0]).unwrap()).unwrap(), -1);
        assert_eq!(d.sign(g.from_coords(&[1, 1, 1, 1]).unwrap()).unwrap(), 1);
    }
}
