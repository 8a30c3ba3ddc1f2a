use milnor_core::formulas::*;
use milnor_core::space::{self, chi, sphere_chi, ChiValue, SpaceExpr, CHI_BF, CHI_F};
use proptest::prelude::*;

fn grid() -> impl Iterator<Item = (i64, i64, i64)> {
    (3..=12).flat_map(|m| (2..m).flat_map(move |k| (-5..=5).map(move |c| (m, k, c))))
}

// Direct geometric counts, independent of the closed forms: χ(S^n) by parity.
fn oracle_sphere(n: i64) -> i64 {
    match n {
        n if n < 0 => 0,
        n if n % 2 == 0 => 2,
        _ => 0,
    }
}

#[test]
fn three_boundary_routes_agree() {
    for (m, k, c) in grid() {
        for i in 1..=k {
            let closed = chi_boundary(m, k, i, c).unwrap();
            assert_eq!(closed, c * oracle_sphere(m - i - 1));
            assert_eq!(chi_boundary_by_parity(m, k, i, c).unwrap(), closed);
            assert_eq!(symbolic_boundary(m, k, i, c).unwrap(), closed);
        }
    }
}

#[test]
fn differences_and_periods() {
    for (m, k, c) in grid() {
        for i in 1..k {
            let lb = le_greuel_boundary(m, k, i, c).unwrap();
            assert_eq!(lb, le_greuel_link(m, k, i, c).unwrap());
            assert_eq!(
                lb,
                chi_boundary(m, k, i + 1, c).unwrap() - chi_boundary(m, k, i, c).unwrap()
            );
        }
        for i in 1..=k - 2 {
            assert_eq!(chi_boundary(m, k, i, c), chi_boundary(m, k, i + 2, c));
            assert_eq!(chi_link(m, k, i, c), chi_link(m, k, i + 2, c));
        }
    }
}

#[test]
fn doubling_matches_next_stage() {
    for (m, k, c) in grid() {
        for i in 1..k {
            let v = chi(&space::double_decomposition(k, i).unwrap());
            let (sf, sbf) = space::stage_symbols(i + 1);
            let next = chi_boundary(m, k, i + 1, c).unwrap();
            let val = v.substitute_all(&[(&sf, c), (&sbf, next)]).as_integer().unwrap();
            assert_eq!(val, chi_boundary(m, k, i, c).unwrap());
        }
    }
}

#[test]
fn tube_and_complement_rebuild_the_sphere() {
    for (m, k, c) in grid() {
        for i in 1..=k {
            assert_eq!(tube_sphere_total(m, k, i, c).unwrap(), oracle_sphere(m - 1));
        }
    }
}

#[test]
fn odd_source_dichotomy() {
    for (m, k, c) in grid().filter(|(m, _, _)| m % 2 == 1) {
        for i in 1..=k {
            let (b, l) = (chi_boundary(m, k, i, c).unwrap(), chi_link(m, k, i, c).unwrap());
            if i % 2 == 0 {
                assert_eq!((b, l), (2 * c, 2));
            } else {
                assert_eq!((b, l), (0, 2 - 2 * c));
            }
            if i >= 2 {
                assert_eq!(carac2_predicate(m, k, i, c).unwrap(), c == 1);
            }
        }
    }
}

#[test]
fn even_source_boundary_equals_link() {
    for (m, k, c) in grid().filter(|(m, _, _)| m % 2 == 0) {
        let r = build_stage_report(m, k, c).unwrap();
        assert_eq!(r.db, 0);
        assert!(r.stages.iter().all(|s| s.chi_boundary == s.chi_link));
    }
}

#[test]
fn reports_build_on_whole_grid() {
    for (m, k, c) in grid() {
        let r = build_stage_report(m, k, c).unwrap();
        assert_eq!(r.stages.len() as i64, k);
        assert!(r.stages.iter().all(|s| s.chi_fiber == c));
        assert_eq!(r.chi_boundary_f, chi_boundary_f(m, k, c).unwrap());
    }
}

#[test]
fn boundary_decomposition_with_symbols() {
    let v = chi(&space::boundary_decomposition(3, 2, 1).unwrap());
    let expected = &(&ChiValue::symbol(CHI_BF) + &(&ChiValue::symbol(CHI_F) * &2.into()))
        - &(&ChiValue::symbol(CHI_BF) * &2.into());
    assert_eq!(v, expected);
}

fn leaf() -> impl Strategy<Value = SpaceExpr> {
    prop_oneof![
        Just(SpaceExpr::Empty),
        Just(SpaceExpr::Point),
        (-1i32..7).prop_map(SpaceExpr::sphere),
        (0u32..7).prop_map(SpaceExpr::disk),
        (-4i64..5).prop_map(|c| SpaceExpr::known("A", c)),
    ]
}

fn tree() -> impl Strategy<Value = SpaceExpr> {
    leaf().prop_recursive(6, 64, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(SpaceExpr::product),
            prop::collection::vec(inner.clone(), 0..3).prop_map(SpaceExpr::union),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(a, b, c)| SpaceExpr::glue(a, b, c)),
            (inner.clone(), inner).prop_map(|(f, b)| SpaceExpr::double(f, b)),
        ]
    })
}

// Plain integer evaluator used as the reference.
fn reference(e: &SpaceExpr) -> i64 {
    use milnor_core::space::AtomChi;
    match e {
        SpaceExpr::Empty => 0,
        SpaceExpr::Point | SpaceExpr::Disk(_) => 1,
        SpaceExpr::Sphere(n) => oracle_sphere(*n as i64),
        SpaceExpr::Atom { chi: AtomChi::Known(c), .. } => *c,
        SpaceExpr::Atom { .. } => unreachable!(),
        SpaceExpr::Product(p) => p.iter().map(reference).product(),
        SpaceExpr::DisjointUnion(p) => p.iter().map(reference).sum(),
        SpaceExpr::Glue { a, b, along } => reference(a) + reference(b) - reference(along),
        SpaceExpr::Double { fiber, boundary } => 2 * reference(fiber) - reference(boundary),
    }
}

proptest! {
    #[test]
    fn chi_is_a_semiring_morphism(a in tree(), b in tree()) {
        let (ca, cb) = (chi(&a).as_integer().unwrap(), chi(&b).as_integer().unwrap());
        prop_assert_eq!(ca, reference(&a));
        let p = SpaceExpr::product(vec![a.clone(), b.clone()]);
        let u = SpaceExpr::union(vec![a, b]);
        prop_assert_eq!(chi(&p).as_integer().unwrap(), ca * cb);
        prop_assert_eq!(chi(&u).as_integer().unwrap(), ca + cb);
    }

    #[test]
    fn double_parity(f in -50i64..50, b in -50i64..50) {
        let d = chi(&SpaceExpr::double(SpaceExpr::known("F", f), SpaceExpr::known("bF", 2 * b)));
        prop_assert_eq!(d.as_integer().unwrap() % 2, 0);
        let d = chi(&SpaceExpr::double(SpaceExpr::known("F", f), SpaceExpr::known("bF", 2 * f)));
        prop_assert_eq!(d.as_integer(), Some(0));
    }

    #[test]
    fn substitution_commutes_with_chi(c in -6i64..6, n in 0i32..6) {
        let sym = SpaceExpr::product(vec![SpaceExpr::atom("F", CHI_F), SpaceExpr::sphere(n)]);
        let num = SpaceExpr::product(vec![SpaceExpr::known("F", c), SpaceExpr::sphere(n)]);
        prop_assert_eq!(chi(&sym).substitute(CHI_F, c), chi(&num));
        prop_assert_eq!(chi(&num).as_integer(), Some(c * sphere_chi(n)));
    }
}
