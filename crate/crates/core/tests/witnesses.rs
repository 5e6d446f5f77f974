use gal_core::isoclass::{enumerate_tuples, ParamTuple};
use gal_core::sweep::groups_up_to;
use gal_core::{build, decide, default_field, verify_witness, Kind};

/// Every shift (and reversal, for sl-I) of every third tuple up to n = 4 over groups of
/// order at most 8 is decided equivalent with a witness that checks out.
#[test]
fn shifts_and_reversals_are_witnessed() {
    let mut checked = 0;
    for g in groups_up_to(8) {
        let f = default_field(&g, None).unwrap();
        for kind in Kind::ALL {
            for p in enumerate_tuples(&g, kind, 4, &f).unwrap().iter().step_by(3) {
                let fa = build(p, &f).unwrap().fingerprint();
                for x in g.elements() {
                    let mut qs: Vec<ParamTuple> = vec![p.transform(x, &f).unwrap()];
                    if kind == Kind::SlI {
                        qs.push(p.reverse().unwrap().transform(x, &f).unwrap());
                    }
                    for q in qs {
                        let d = decide(p, &q, &f).unwrap();
                        assert!(d.is_equivalent(), "{:?} vs {:?}", p.to_spec(&f), q.to_spec(&f));
                        verify_witness(p, &q, &d, &f)
                            .unwrap_or_else(|e| panic!("{e}: {:?} vs {:?}", p.to_spec(&f), q.to_spec(&f)));
                        assert_eq!(build(&q, &f).unwrap().fingerprint(), fa);
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 40_000, "{checked}");
}
