//! Randomized structural properties over arbitrary (not necessarily
//! well-typed) trees: order laws for the constructor relations, printer
//! inverses, translation totality, and precision laws.

use proptest::prelude::*;

use gradsum_core::elaborate;
use gradsum_core::harness::{vary_precision, VaryDirection};
use gradsum_core::target;
use gradsum_core::*;

// ======================================================================
// Strategies
// ======================================================================

fn arb_sum_con() -> impl Strategy<Value = SumCon> {
    (0..8usize).prop_map(|i| SumCon::ALL[i])
}

fn arb_target_sum() -> impl Strategy<Value = TargetSum> {
    prop_oneof![
        Just(TargetSum::TPlus),
        Just(TargetSum::TPlus1),
        Just(TargetSum::TPlus2),
    ]
}

fn arb_index() -> impl Strategy<Value = Index> {
    prop_oneof![Just(Index::One), Just(Index::Two)]
}

fn arb_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("z".to_string()),
    ]
}

fn arb_ty() -> impl Strategy<Value = Type> {
    Just(Type::Unit).prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), arb_sum_con(), inner.clone()).prop_map(|(l, c, r)| Type::sum(l, c, r)),
            (inner.clone(), inner).prop_map(|(d, c)| Type::arrow(d, c)),
        ]
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::UnitVal), arb_name().prop_map(Expr::var)];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (arb_name(), inner.clone()).prop_map(|(x, b)| Expr::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Expr::app(f, a)),
            (arb_index(), inner.clone()).prop_map(|(i, p)| Expr::inj(i, p)),
            (inner.clone(), arb_ty()).prop_map(|(e, t)| Expr::anno(e, t)),
            (inner.clone(), arb_index(), arb_name(), inner.clone())
                .prop_map(|(s, i, x, a)| Expr::case_one(s, i, x, a)),
            (inner.clone(), arb_name(), inner.clone(), arb_name(), inner)
                .prop_map(|(s, x1, a1, x2, a2)| Expr::case_two(s, x1, a1, x2, a2)),
        ]
    })
}

/// Surface target types only: the uninhabited type has no syntax, so it
/// never appears under a printed lambda annotation.
fn arb_surface_target_ty() -> impl Strategy<Value = TargetType> {
    Just(TargetType::TUnit).prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), arb_target_sum(), inner.clone())
                .prop_map(|(l, c, r)| TargetType::sum(l, c, r)),
            (inner.clone(), inner).prop_map(|(d, c)| TargetType::arrow(d, c)),
        ]
    })
}

fn arb_target_term() -> impl Strategy<Value = TargetTerm> {
    let leaf = prop_oneof![
        Just(TargetTerm::TUnitVal),
        Just(TargetTerm::Matchfail),
        arb_name().prop_map(TargetTerm::var),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (arb_name(), arb_surface_target_ty(), inner.clone())
                .prop_map(|(x, t, b)| TargetTerm::lam(x, t, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| TargetTerm::app(f, a)),
            (arb_index(), inner.clone()).prop_map(|(i, p)| TargetTerm::inj(i, p)),
            (arb_target_sum(), arb_target_sum(), inner.clone())
                .prop_map(|(f, t, m)| TargetTerm::cast(f, t, m)),
            (inner.clone(), arb_index(), arb_name(), inner.clone())
                .prop_map(|(s, i, x, a)| TargetTerm::case_one(s, i, x, a)),
            (inner.clone(), arb_name(), inner.clone(), arb_name(), inner)
                .prop_map(|(s, x1, a1, x2, a2)| TargetTerm::case_two(s, x1, a1, x2, a2)),
        ]
    })
}

/// Two types over the same erasure shape, labeled independently.
fn arb_shaped_pair() -> impl Strategy<Value = (Type, Type)> {
    Just((Type::Unit, Type::Unit)).prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), arb_sum_con(), arb_sum_con(), inner.clone()).prop_map(
                |((l1, l2), c1, c2, (r1, r2))| (Type::sum(l1, c1, r1), Type::sum(l2, c2, r2))
            ),
            (inner.clone(), inner)
                .prop_map(|((d1, d2), (c1, c2))| { (Type::arrow(d1, c1), Type::arrow(d2, c2)) }),
        ]
    })
}

fn arb_shaped_triple() -> impl Strategy<Value = (Type, Type, Type)> {
    Just((Type::Unit, Type::Unit, Type::Unit)).prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                arb_sum_con(),
                arb_sum_con(),
                arb_sum_con(),
                inner.clone()
            )
                .prop_map(|((l1, l2, l3), c1, c2, c3, (r1, r2, r3))| {
                    (
                        Type::sum(l1, c1, r1),
                        Type::sum(l2, c2, r2),
                        Type::sum(l3, c3, r3),
                    )
                }),
            (inner.clone(), inner).prop_map(|((d1, d2, d3), (c1, c2, c3))| {
                (
                    Type::arrow(d1, c1),
                    Type::arrow(d2, c2),
                    Type::arrow(d3, c3),
                )
            }),
        ]
    })
}

fn arb_shaped_target_pair() -> impl Strategy<Value = (TargetType, TargetType)> {
    let leaf = prop_oneof![
        Just((TargetType::TUnit, TargetType::TUnit)),
        Just((TargetType::Bottom, TargetType::TUnit)),
        Just((TargetType::TUnit, TargetType::Bottom)),
        Just((TargetType::Bottom, TargetType::Bottom)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                arb_target_sum(),
                arb_target_sum(),
                inner.clone()
            )
                .prop_map(|((l1, l2), c1, c2, (r1, r2))| {
                    (TargetType::sum(l1, c1, r1), TargetType::sum(l2, c2, r2))
                }),
            (inner.clone(), inner).prop_map(|((d1, d2), (c1, c2))| {
                (TargetType::arrow(d1, c1), TargetType::arrow(d2, c2))
            }),
        ]
    })
}

fn same_shape(a: &Type, t: &TargetType) -> bool {
    match (a, t) {
        (Type::Unit, TargetType::TUnit) => true,
        (Type::Sum(l1, _, r1), TargetType::TSum(l2, _, r2)) => {
            same_shape(l1, l2) && same_shape(r1, r2)
        }
        (Type::Arrow(d1, c1), TargetType::TArrow(d2, c2)) => {
            same_shape(d1, d2) && same_shape(c1, c2)
        }
        _ => false,
    }
}

// ======================================================================
// Properties
// ======================================================================

proptest! {
    #[test]
    fn types_reparse_to_themselves(a in arb_ty()) {
        prop_assert_eq!(parse_type(&format!("{a}")).unwrap(), a);
    }

    #[test]
    fn exprs_reparse_to_themselves(e in arb_expr()) {
        let back = parse_expr(&format!("{e}")).unwrap();
        prop_assert!(back.alpha_eq(&e), "{} reparsed as {}", e, back);
    }

    #[test]
    fn target_terms_reparse_to_themselves(m in arb_target_term()) {
        let back = parse_target(&format!("{m}")).unwrap();
        prop_assert!(back.alpha_eq(&m), "{} reparsed as {}", m, back);
    }

    #[test]
    fn subtyping_is_a_partial_order(
        (a, b, c) in arb_shaped_triple()
    ) {
        prop_assert!(subtype(&a, &a));
        if subtype(&a, &b) && subtype(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if subtype(&a, &b) && subtype(&b, &c) {
            prop_assert!(subtype(&a, &c));
        }
    }

    #[test]
    fn precision_is_a_partial_order(
        (a, b, c) in arb_shaped_triple()
    ) {
        prop_assert!(type_precision(&a, &a));
        if type_precision(&a, &b) && type_precision(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if type_precision(&a, &b) && type_precision(&b, &c) {
            prop_assert!(type_precision(&a, &c));
        }
    }

    #[test]
    fn consistency_extends_subtyping(
        (a, b) in arb_shaped_pair()
    ) {
        if subtype(&a, &b) {
            prop_assert!(dcons(&a, &b), "{} <: {} but not consistent", a, b);
        }
    }

    #[test]
    fn translation_is_total_and_shape_preserving(a in arb_ty()) {
        let t = elaborate::ty_trans(&a);
        prop_assert!(!t.contains_bottom(), "{} translated to {}", a, t);
        prop_assert!(same_shape(&a, &t));
    }

    #[test]
    fn coercions_typecheck_at_the_translated_type(
        (a, b) in arb_shaped_pair()
    ) {
        if dcons(&a, &b) {
            for mode in [Mode::Standard, Mode::Saturating] {
                let filled = elaborate::coerce(&a, &b, mode).fill(TargetTerm::var("subject"));
                let ctx = TargetCtx::from_pairs([(
                    "subject".to_string(),
                    elaborate::ty_trans(&a),
                )]);
                let t = target::target_typecheck(&ctx, &filled).unwrap();
                prop_assert!(
                    target_subtype(&t, &elaborate::ty_trans(&b)),
                    "coercion {} ~> {} has type {}", a, b, t
                );
            }
        }
    }

    #[test]
    fn join_bounds_above_and_meet_below(
        (a, b) in arb_shaped_target_pair()
    ) {
        let j = target::join(&a, &b).unwrap();
        prop_assert!(target_subtype(&a, &j), "{} not below join {}", a, j);
        prop_assert!(target_subtype(&b, &j), "{} not below join {}", b, j);
        let m = target::meet(&a, &b);
        prop_assert!(target_subtype(&m, &a), "meet {} not below {}", m, a);
        prop_assert!(target_subtype(&m, &b), "meet {} not below {}", m, b);
    }

    #[test]
    fn term_precision_is_reflexive_with_failure_at_the_bottom(
        m in arb_target_term()
    ) {
        prop_assert!(term_precision(&m, &m));
        prop_assert!(term_precision(&TargetTerm::Matchfail, &m));
    }

    #[test]
    fn loosening_moves_strictly_up_expression_precision(e in arb_expr()) {
        for e2 in vary_precision(&e, VaryDirection::Loosen) {
            prop_assert!(expr_precision(&e, &e2), "{} not below {}", e, e2);
            prop_assert!(!expr_precision(&e2, &e), "{} below its loosening {}", e2, e);
        }
        for e2 in vary_precision(&e, VaryDirection::Tighten) {
            prop_assert!(expr_precision(&e2, &e), "{} not below {}", e2, e);
        }
    }
}
