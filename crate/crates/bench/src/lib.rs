//! Fixed workloads shared by the benchmarks.

use gal_core::isoclass::enumerate_tuples;
use gal_core::{default_field, Bicharacter, FinAbGroup, Kind, ParamTuple, RootField, Subgroup};

/// `Z2 x Z2` with the Pauli division grading on all of `G` and `kappa = (m)`.
pub fn pauli_assoc(m: usize) -> (ParamTuple, RootField) {
    let g = FinAbGroup::new(&[2, 2]).unwrap();
    let t = Subgroup::whole(&g);
    let beta = Bicharacter::from_gram(&t, vec![vec![0, 1], vec![1, 0]]).unwrap();
    (ParamTuple::assoc(&t, &beta, vec![m]), default_field(&g, None).unwrap())
}

/// Elementary grading by `Z_k` with `kappa = (m, ..., m)`, for the given kind.
pub fn elementary(k: u32, m: usize, kind: Kind) -> (ParamTuple, RootField) {
    let g = FinAbGroup::new(&[k]).unwrap();
    let t = Subgroup::trivial(&g);
    let beta = Bicharacter::trivial(&t);
    let kappa = vec![m; k as usize];
    let p = match kind {
        Kind::So => ParamTuple::so(&t, &beta, kappa, 0),
        Kind::Sp => ParamTuple::sp(&t, &beta, kappa, 0),
        Kind::SlI => ParamTuple::sl1(&t, &beta, kappa),
        _ => ParamTuple::assoc(&t, &beta, kappa),
    };
    (p, default_field(&g, None).unwrap())
}

/// Type II model over `G = H = Z2` with `mu0 = 1` and matrix size `m`.
pub fn type_two(m: usize) -> (ParamTuple, RootField) {
    let g = FinAbGroup::new(&[2]).unwrap();
    let f = default_field(&g, None).unwrap();
    let p = enumerate_tuples(&g, Kind::SlII, m, &f)
        .unwrap()
        .into_iter()
        .find(|p| p.n() == m && p.mu0 == Some(1))
        .expect("Type II tuple of the requested size");
    (p, f)
}
