use std::sync::OnceLock;

use gal_core::artifact::verify_artifact;
use gal_core::isoclass::enumerate_tuples;
use gal_core::sweep::groups_up_to;
use gal_core::{
    build, decide, default_field, Artifact, FinAbGroup, Fp, KappaMap, Kind, Matrix, ParamTuple, RootField, Subgroup,
};
use proptest::prelude::*;

const PRIMES: [u64; 6] = [3, 13, 97, 65537, 2147483647, 4294967291];

fn fp_strategy() -> impl Strategy<Value = Fp> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| Fp::new(p).unwrap())
}

struct Pool {
    group: FinAbGroup,
    field: RootField,
    tuples: Vec<ParamTuple>,
}

fn pools() -> &'static Vec<(Kind, Vec<Pool>)> {
    static POOLS: OnceLock<Vec<(Kind, Vec<Pool>)>> = OnceLock::new();
    POOLS.get_or_init(|| {
        Kind::ALL
            .iter()
            .map(|&kind| {
                let ps = groups_up_to(8)
                    .into_iter()
                    .filter_map(|g| {
                        let f = default_field(&g, None).unwrap();
                        let tuples = enumerate_tuples(&g, kind, 4, &f).unwrap();
                        (!tuples.is_empty()).then_some(Pool { group: g, field: f, tuples })
                    })
                    .collect();
                (kind, ps)
            })
            .collect()
    })
}

/// Indices selecting a kind, a group pool and two tuples plus two group elements.
fn picks() -> impl Strategy<Value = (usize, usize, usize, usize, usize, usize)> {
    (0..Kind::ALL.len(), any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>())
}

proptest! {
    #[test]
    fn barrett_matches_remainder(fp in fp_strategy(), x in any::<u64>()) {
        prop_assert_eq!(fp.reduce(x), x % fp.p());
    }

    #[test]
    fn products_and_inverses(fp in fp_strategy(), a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (a % fp.p(), b % fp.p());
        prop_assert_eq!(fp.mul(a, b) as u128, (a as u128 * b as u128) % fp.p() as u128);
        prop_assert_eq!(fp.sub(fp.add(a, b), b), a);
        if a != 0 {
            prop_assert_eq!(fp.mul(a, fp.inv(a)), 1);
        }
    }

    #[test]
    fn square_roots_square_back(fp in fp_strategy(), a in any::<u64>()) {
        let a = a % fp.p();
        let sq = fp.mul(a, a);
        let r = fp.sqrt(sq).expect("a square has a root");
        prop_assert_eq!(fp.mul(r, r), sq);
        prop_assert!(r <= fp.p() - r || r == 0);
    }

    #[test]
    fn kappa_shifts_compose(gi in 0usize..16, vals in prop::collection::vec(0usize..3, 1..9), x in any::<usize>(), y in any::<usize>()) {
        let groups = groups_up_to(8);
        let g = &groups[gi % groups.len()];
        let t = Subgroup::trivial(g);
        let mut v = vals;
        v.resize(g.order(), 0);
        v[0] += 1;
        let k = KappaMap::new(&t, v).unwrap();
        let (x, y) = (x % g.order(), y % g.order());
        prop_assert_eq!(k.shift(x).shift(y), k.shift(g.add(x, y)));
        prop_assert_eq!(k.shift(x).shift(g.neg(x)), k.clone());
        prop_assert_eq!(k.reflect().reflect(), k.clone());
        prop_assert_eq!(k.shift(x).total(), k.total());
    }

    #[test]
    fn inverse_is_two_sided(rows in prop::collection::vec(prop::collection::vec(0u64..13, 4), 4)) {
        let fp = Fp::new(13).unwrap();
        let m = Matrix::from_rows(fp, &rows);
        match m.inverse() {
            Some(inv) => {
                prop_assert_eq!(m.mul(&inv), Matrix::identity(fp, 4));
                prop_assert_eq!(inv.mul(&m), Matrix::identity(fp, 4));
                prop_assert_eq!(m.rank(), 4);
            }
            None => prop_assert!(m.rank() < 4),
        }
        prop_assert_eq!(m.rank() + m.nullspace().len(), 4);
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decider_is_an_equivalence((k, gi, i, j, x, y) in picks()) {
        let (_, ps) = &pools()[k];
        let pool = &ps[gi % ps.len()];
        let f = &pool.field;
        let p = &pool.tuples[i % pool.tuples.len()];
        let q = &pool.tuples[j % pool.tuples.len()];
        let (x, y) = (x % pool.group.order(), y % pool.group.order());
        prop_assert!(decide(p, p, f).unwrap().is_equivalent());
        prop_assert_eq!(decide(p, q, f).unwrap().verdict, decide(q, p, f).unwrap().verdict);
        let px = p.transform(x, f).unwrap();
        let pxy = px.transform(y, f).unwrap();
        prop_assert!(decide(p, &px, f).unwrap().is_equivalent());
        prop_assert!(decide(&px, &pxy, f).unwrap().is_equivalent());
        prop_assert!(decide(p, &pxy, f).unwrap().is_equivalent());
        prop_assert_eq!(decide(&px, q, f).unwrap().verdict, decide(p, q, f).unwrap().verdict);
    }

    #[test]
    fn artifacts_round_trip((k, gi, i, _, _, _) in picks()) {
        let (_, ps) = &pools()[k];
        let pool = &ps[gi % ps.len()];
        let p = &pool.tuples[i % pool.tuples.len()];
        let real = build(p, &pool.field).unwrap();
        let a = Artifact::from_realization(p, &real, &pool.field, i % 2 == 0);
        let b = Artifact::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&b.params().unwrap(), p);
        let rep = verify_artifact(&b, false).unwrap();
        prop_assert!(rep.ok);
        prop_assert_eq!(rep, verify_artifact(&a, false).unwrap());
    }

    #[test]
    fn shifted_models_share_fingerprints((k, gi, i, _, x, _) in picks()) {
        let (_, ps) = &pools()[k];
        let pool = &ps[gi % ps.len()];
        let f = &pool.field;
        let p = &pool.tuples[i % pool.tuples.len()];
        let q = p.transform(x % pool.group.order(), f).unwrap();
        prop_assert_eq!(build(p, f).unwrap().fingerprint(), build(&q, f).unwrap().fingerprint());
    }
}
