//! Cast insertion: translating source typing derivations into the cast
//! calculus.
//!
//! ```text
//! |A|                  type translation (ty_trans)
//! coerce(A1, A2)       value coercion between consistent types
//! elaborate(d, mode)   derivation-directed cast insertion
//! ```
//!
//! Coercions are type-directed: unit coercions are the hole, arrow
//! coercions eta-expand, and sum coercions case on the subject, rebuild
//! the injections, and retag the result. Where static information
//! guarantees a retagging is safe, [`Mode::Standard`] emits no cast at
//! all; [`Mode::Saturating`] emits every cast, which keeps the cast
//! structure of related programs aligned site-for-site.

use crate::relations::target_subsum;
use crate::syntax::ast::{
    Coercion, Ctx, Expr, Index, SumCon, TargetSum, TargetTerm, TargetType, Type,
};
use crate::typecheck::{self, BiDerivation, BiRule, SideFact, TypeError};

/// Translate a sum constructor to its runtime tag discipline: the three
/// unknown-tag constructors keep both tags open, the rest commit to one.
pub fn sum_trans(con: SumCon) -> TargetSum {
    match con {
        SumCon::Plus | SumCon::PlusQ => TargetSum::TPlus,
        SumCon::Plus1 | SumCon::PlusQ1 | SumCon::PlusStar1 => TargetSum::TPlus1,
        SumCon::Plus2 | SumCon::PlusQ2 | SumCon::PlusStar2 => TargetSum::TPlus2,
    }
}

/// Translate a source type; homomorphic everywhere else. Never produces
/// `Bottom`.
pub fn ty_trans(a: &Type) -> TargetType {
    match a {
        Type::Unit => TargetType::TUnit,
        Type::Sum(a1, con, a2) => TargetType::sum(ty_trans(a1), sum_trans(*con), ty_trans(a2)),
        Type::Arrow(a1, a2) => TargetType::arrow(ty_trans(a1), ty_trans(a2)),
    }
}

/// How eagerly to materialize casts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Omit casts whose source tag is already below the target tag.
    #[default]
    Standard,
    /// Emit a cast at every coercion site, safe or not.
    Saturating,
}

/// The retagging coercion from constructor `d1` to `d2`.
pub fn coerce_sum(d1: SumCon, d2: SumCon, mode: Mode) -> Coercion {
    let (from, to) = (sum_trans(d1), sum_trans(d2));
    if mode == Mode::Standard && target_subsum(from, to) {
        Coercion::hole()
    } else {
        Coercion::new(TargetTerm::cast(from, to, TargetTerm::var(Coercion::HOLE)))
    }
}

/// The value coercion from `a1` to `a2`.
///
/// Panics unless the two types are consistent (`dcons`); elaboration
/// only requests coercions licensed by a side condition of the typing
/// derivation.
pub fn coerce(a1: &Type, a2: &Type, mode: Mode) -> Coercion {
    match (a1, a2) {
        (Type::Unit, Type::Unit) => Coercion::hole(),
        (Type::Arrow(b1, b2), Type::Arrow(c1, c2)) => {
            // λx:|C1|. C_cod[ HOLE C_dom[x] ] — contravariant domain.
            let c_dom = coerce(c1, b1, mode);
            let c_cod = coerce(b2, c2, mode);
            let call = TargetTerm::app(
                TargetTerm::var(Coercion::HOLE),
                c_dom.fill(TargetTerm::var("x")),
            );
            Coercion::new(TargetTerm::lam("x", ty_trans(c1), c_cod.fill(call)))
        }
        (Type::Sum(b1, dp, b2), Type::Sum(c1, d, c2)) => {
            let outer = coerce_sum(*dp, *d, mode);
            let rebuilt = |i: Index, payload: Coercion| {
                // inj_i C_i[x_i], retagged from the bare tag back to |δ'|
                // so both arms of a two-armed wrapper agree.
                let x = format!("x{i}");
                let inj = TargetTerm::inj(i, payload.fill(TargetTerm::var(&x)));
                (x, coerce_sum(SumCon::plus_q(i), *dp, mode).fill(inj))
            };
            let hole = TargetTerm::var(Coercion::HOLE);
            let case = match dp {
                SumCon::Plus1 | SumCon::PlusQ1 => {
                    let (x, arm) = rebuilt(Index::One, coerce(b1, c1, mode));
                    TargetTerm::case_one(hole, Index::One, x, arm)
                }
                SumCon::Plus2 | SumCon::PlusQ2 => {
                    let (x, arm) = rebuilt(Index::Two, coerce(b2, c2, mode));
                    TargetTerm::case_one(hole, Index::Two, x, arm)
                }
                SumCon::Plus | SumCon::PlusQ | SumCon::PlusStar1 | SumCon::PlusStar2 => {
                    let (x1, arm1) = rebuilt(Index::One, coerce(b1, c1, mode));
                    let (x2, arm2) = rebuilt(Index::Two, coerce(b2, c2, mode));
                    TargetTerm::case_two(hole, x1, arm1, x2, arm2)
                }
            };
            Coercion::new(outer.fill(case))
        }
        _ => panic!("coerce: inconsistent types {a1} and {a2}"),
    }
}

/// Translate a typing derivation into the cast calculus.
///
/// Panics on derivations not produced by the checker; every shape it
/// relies on is guaranteed by the corresponding rule.
pub fn elaborate(d: &BiDerivation, mode: Mode) -> TargetTerm {
    match d.rule {
        BiRule::SynVar => {
            let Expr::Var(x) = &d.expr else {
                panic!("variable rule on {}", d.expr)
            };
            TargetTerm::var(x)
        }
        BiRule::SynAnno => elaborate(&d.children[0], mode),
        BiRule::SynFunElim => TargetTerm::app(
            elaborate(&d.children[0], mode),
            elaborate(&d.children[1], mode),
        ),
        BiRule::ChkCSub => {
            let Some(SideFact::Dcons(from, to)) = &d.side else {
                panic!("subsumption without consistency evidence")
            };
            coerce(from, to, mode).fill(elaborate(&d.children[0], mode))
        }
        BiRule::ChkUnitIntro => TargetTerm::TUnitVal,
        BiRule::ChkFunIntro => {
            let Expr::Lam(x, _) = &d.expr else {
                panic!("function rule on {}", d.expr)
            };
            let Type::Arrow(dom, _) = &d.ty else {
                panic!("function rule at type {}", d.ty)
            };
            TargetTerm::lam(x, ty_trans(dom), elaborate(&d.children[0], mode))
        }
        BiRule::ChkSumIntro => {
            let Expr::Inj(i, _) = &d.expr else {
                panic!("injection rule on {}", d.expr)
            };
            let Some(SideFact::Subsum(tag, con)) = &d.side else {
                panic!("injection without a tag side condition")
            };
            let payload = elaborate(&d.children[0], mode);
            coerce_sum(*tag, *con, mode).fill(TargetTerm::inj(*i, payload))
        }
        BiRule::ChkSumElimOne => {
            let Expr::CaseOne(_, i, x, _) = &d.expr else {
                panic!("one-armed case rule on {}", d.expr)
            };
            let Some(SideFact::SumSynth(con, goal)) = &d.side else {
                panic!("one-armed case without a constructor side condition")
            };
            let scrut = coerce_sum(*con, *goal, mode).fill(elaborate(&d.children[0], mode));
            TargetTerm::case_one(scrut, *i, x, elaborate(&d.children[1], mode))
        }
        BiRule::ChkSumElimTwo => {
            let Expr::CaseTwo(_, x1, _, x2, _) = &d.expr else {
                panic!("two-armed case rule on {}", d.expr)
            };
            let Some(SideFact::SumSynth(con, goal)) = &d.side else {
                panic!("two-armed case without a constructor side condition")
            };
            let scrut = coerce_sum(*con, *goal, mode).fill(elaborate(&d.children[0], mode));
            TargetTerm::case_two(
                scrut,
                x1,
                elaborate(&d.children[1], mode),
                x2,
                elaborate(&d.children[2], mode),
            )
        }
    }
}

/// Check `e` against `ty` and elaborate the resulting derivation.
pub fn elab_check(ctx: &Ctx, e: &Expr, ty: &Type, mode: Mode) -> Result<TargetTerm, TypeError> {
    Ok(elaborate(&typecheck::check(ctx, e, ty)?, mode))
}

/// Synthesize a type for `e` and elaborate; returns the term and type.
pub fn elab_synth(ctx: &Ctx, e: &Expr, mode: Mode) -> Result<(TargetTerm, Type), TypeError> {
    let d = typecheck::synth(ctx, e)?;
    let ty = d.ty.clone();
    Ok((elaborate(&d, mode), ty))
}
