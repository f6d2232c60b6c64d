use proptest::prelude::*;
use stategen_core::dsl::{parse_expr, parse_model, render_model};
use stategen_core::expr::{BinaryOp, Expr, UnaryOp};
use stategen_core::testkit::{
    arb_hierarchical_statechart, arb_statechart, arb_typed_expr, expr_scope,
};

/// Trees with no regard for types: any operator over any operand.
fn arb_untyped_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-9i64..=9).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        proptest::sample::select(vec!["x", "y", "p"]).prop_map(|n| Expr::Var(n.to_string())),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (
                proptest::sample::select(vec![UnaryOp::Not, UnaryOp::Neg]),
                inner.clone()
            )
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (
                proptest::sample::select(vec![
                    BinaryOp::Add,
                    BinaryOp::Sub,
                    BinaryOp::Mul,
                    BinaryOp::Lt,
                    BinaryOp::Le,
                    BinaryOp::Gt,
                    BinaryOp::Ge,
                    BinaryOp::Eq,
                    BinaryOp::Ne,
                    BinaryOp::And,
                    BinaryOp::Or,
                ]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn well_typed_expressions_round_trip((e, ty) in arb_typed_expr()) {
        let scope = expr_scope();
        let text = e.to_string();
        let back = parse_expr(&text, &scope).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.type_of(&scope).unwrap(), ty);
    }

    #[test]
    fn ill_typed_expressions_are_rejected(e in arb_untyped_expr()) {
        let scope = expr_scope();
        let text = e.to_string();
        match e.type_of(&scope) {
            Ok(_) => prop_assert_eq!(parse_expr(&text, &scope).unwrap(), e),
            Err(_) => prop_assert!(parse_expr(&text, &scope).is_err(), "accepted {}", text),
        }
    }

    #[test]
    fn flat_models_round_trip(sc in arb_statechart()) {
        let text = render_model(&sc);
        let back = parse_model(&text).map_err(|err| TestCaseError::fail(format!("{err}\n{text}")))?;
        prop_assert_eq!(back, sc);
    }

    #[test]
    fn hierarchical_models_round_trip(sc in arb_hierarchical_statechart()) {
        let text = render_model(&sc);
        let back = parse_model(&text).map_err(|err| TestCaseError::fail(format!("{err}\n{text}")))?;
        prop_assert_eq!(back, sc);
    }
}
