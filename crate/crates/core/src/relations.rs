//! The orderings and consistency relations of the calculus.
//!
//! ```text
//! δ1 ≤ δ2     subsum:        δ1 can be used where δ2 is expected
//! δ1 ⊑ δ2     sum_precision: δ1 carries at least the information of δ2
//! A1 <: A2    subtype:       componentwise on sums, contra/co on arrows
//! A1 ⊑ A2     type_precision: covariant everywhere (information order)
//! A1 ~ A2     dcons:         directed consistency; some precise sharpening
//!                            of A1 is a subtype of some sharpening of A2
//! δ ⇛ δ*      sum_synth:     what a scrutinee constructor can be read as
//! φ1 ≤ φ2     target_subsum / target_subtype: the target's static orders
//! ```
//!
//! The sum-constructor relations are finite, so they are produced by
//! transitively closing small generator sets once and then answered by
//! table lookup. The generator sets are the definitions; the frozen tables
//! in the tests are the regression oracle.

use std::sync::LazyLock;

use crate::syntax::ast::{Ctx, Expr, Index, SumCon, TargetSum, TargetType, Type};

fn transitive_closure<const N: usize>(r: &mut [[bool; N]; N]) {
    for k in 0..N {
        for i in 0..N {
            if r[i][k] {
                let row_k = r[k];
                for (cell, &reach) in r[i].iter_mut().zip(row_k.iter()) {
                    *cell |= reach;
                }
            }
        }
    }
}

fn close_edges<const N: usize>(edges: &[(usize, usize)]) -> [[bool; N]; N] {
    let mut r = [[false; N]; N];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    transitive_closure(&mut r);
    r
}

// ----------------------------------------------------------------------
// Subsumption on sum constructors
// ----------------------------------------------------------------------

/// Generating edges of `≤`: a discovered injection may be treated as the
/// statically known one or forgotten to the dynamic sum; known injections
/// and the dynamic sum allow one-armed matching; one-armed-matchable sums
/// are ordinary sums.
fn subsum_edges() -> Vec<(usize, usize)> {
    use SumCon::*;
    let mut es = Vec::new();
    for i in Index::ALL {
        es.push((SumCon::plus_q(i).code(), SumCon::plus(i).code()));
        es.push((SumCon::plus_q(i).code(), PlusQ.code()));
        es.push((SumCon::plus(i).code(), SumCon::star(i).code()));
        es.push((PlusQ.code(), SumCon::star(i).code()));
        es.push((SumCon::star(i).code(), Plus.code()));
    }
    es
}

static SUBSUM: LazyLock<[[bool; 8]; 8]> = LazyLock::new(|| close_edges(&subsum_edges()));

/// `δ1 ≤ δ2`: an injection into `δ1` may be used at `δ2`.
pub fn subsum(a: SumCon, b: SumCon) -> bool {
    SUBSUM[a.code()][b.code()]
}

// ----------------------------------------------------------------------
// Precision on sum constructors
// ----------------------------------------------------------------------

/// Generating edges of `⊑`: static information may be weakened toward the
/// dynamic sum `+?`. Note `+?1` and `+*1` are incomparable: knowing the
/// injection dynamically and permitting a one-armed match are different
/// pieces of information.
fn sum_precision_edges() -> Vec<(usize, usize)> {
    use SumCon::*;
    let mut es = vec![(Plus.code(), PlusQ.code())];
    for i in Index::ALL {
        es.push((SumCon::plus(i).code(), SumCon::plus_q(i).code()));
        es.push((SumCon::plus(i).code(), SumCon::star(i).code()));
        es.push((SumCon::plus_q(i).code(), PlusQ.code()));
        es.push((SumCon::star(i).code(), PlusQ.code()));
    }
    es
}

static SUM_PRECISION: LazyLock<[[bool; 8]; 8]> =
    LazyLock::new(|| close_edges(&sum_precision_edges()));

/// `δ1 ⊑ δ2`: `δ1` is at least as precise as `δ2`.
pub fn sum_precision(a: SumCon, b: SumCon) -> bool {
    SUM_PRECISION[a.code()][b.code()]
}

// ----------------------------------------------------------------------
// Directed consistency on sum constructors
// ----------------------------------------------------------------------

static DCONS_SUM: LazyLock<[[bool; 8]; 8]> = LazyLock::new(|| {
    let mut r = [[false; 8]; 8];
    for a in SumCon::ALL {
        for b in SumCon::ALL {
            // ∃ m ⊑ a, n ⊑ b with m ≤ n.
            r[a.code()][b.code()] = SumCon::ALL.iter().any(|&m| {
                sum_precision(m, a)
                    && SumCon::ALL
                        .iter()
                        .any(|&n| sum_precision(n, b) && subsum(m, n))
            });
        }
    }
    r
});

/// Directed consistency on constructors: some sharpening of `a` is
/// subsumed by some sharpening of `b`.
pub fn dcons_sum(a: SumCon, b: SumCon) -> bool {
    DCONS_SUM[a.code()][b.code()]
}

// ----------------------------------------------------------------------
// Type-level relations
// ----------------------------------------------------------------------

/// `A <: B`. Sums are componentwise covariant under `≤`; arrows are
/// contravariant in the domain and covariant in the codomain.
pub fn subtype(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Unit, Type::Unit) => true,
        (Type::Sum(a1, c, a2), Type::Sum(b1, d, b2)) => {
            subsum(*c, *d) && subtype(a1, b1) && subtype(a2, b2)
        }
        (Type::Arrow(a1, a2), Type::Arrow(b1, b2)) => subtype(b1, a1) && subtype(a2, b2),
        _ => false,
    }
}

/// `A ⊑ B`. Precision is an information order, not a subtyping order:
/// it is covariant in *both* arrow positions.
pub fn type_precision(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Unit, Type::Unit) => true,
        (Type::Sum(a1, c, a2), Type::Sum(b1, d, b2)) => {
            sum_precision(*c, *d) && type_precision(a1, b1) && type_precision(a2, b2)
        }
        (Type::Arrow(a1, a2), Type::Arrow(b1, b2)) => {
            type_precision(a1, b1) && type_precision(a2, b2)
        }
        _ => false,
    }
}

/// `Γ1 ⊑ Γ2`: same domain, pointwise type precision.
pub fn ctx_precision(a: &Ctx, b: &Ctx) -> bool {
    a.len() == b.len()
        && a.iter()
            .all(|(x, t)| b.lookup(x).is_some_and(|u| type_precision(t, u)))
}

/// `e1 ⊑ e2`: same erasure, same binder names, pointwise `⊑` on
/// annotation types. An annotation may not be dropped on either side.
pub fn expr_precision(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::UnitVal, Expr::UnitVal) => true,
        (Expr::Var(x), Expr::Var(y)) => x == y,
        (Expr::Lam(x, e1), Expr::Lam(y, e2)) => x == y && expr_precision(e1, e2),
        (Expr::App(f1, a1), Expr::App(f2, a2)) => expr_precision(f1, f2) && expr_precision(a1, a2),
        (Expr::Inj(i, e1), Expr::Inj(j, e2)) => i == j && expr_precision(e1, e2),
        (Expr::Anno(e1, t1), Expr::Anno(e2, t2)) => {
            type_precision(t1, t2) && expr_precision(e1, e2)
        }
        (Expr::CaseOne(s1, i, x, m1), Expr::CaseOne(s2, j, y, m2)) => {
            i == j && x == y && expr_precision(s1, s2) && expr_precision(m1, m2)
        }
        (Expr::CaseTwo(s1, x1, m1, y1, n1), Expr::CaseTwo(s2, x2, m2, y2, n2)) => {
            x1 == x2
                && y1 == y2
                && expr_precision(s1, s2)
                && expr_precision(m1, m2)
                && expr_precision(n1, n2)
        }
        _ => false,
    }
}

/// `A ~> B`: directed consistency. Defined by its sharpening property and
/// computed structurally; sums defer to [`dcons_sum`], arrows flip the
/// domain.
pub fn dcons(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Unit, Type::Unit) => true,
        (Type::Sum(a1, c, a2), Type::Sum(b1, d, b2)) => {
            dcons_sum(*c, *d) && dcons(a1, b1) && dcons(a2, b2)
        }
        (Type::Arrow(a1, a2), Type::Arrow(b1, b2)) => dcons(b1, a1) && dcons(a2, b2),
        _ => false,
    }
}

// ----------------------------------------------------------------------
// Scrutinee constructor synthesis
// ----------------------------------------------------------------------

/// `δ ⇛ goal` where `goal` is `+*1`, `+*2`, or `+`: may a scrutinee whose
/// sum constructor is `δ` be eliminated at `goal`? Any sum has a two-armed
/// elimination, but one-armed elimination at `+*i` requires evidence for
/// side `i`; in particular the ordinary static sum `+` has none.
///
/// Calling this with any other goal is a bug in the caller.
pub fn sum_synth(con: SumCon, goal: SumCon) -> bool {
    match goal {
        SumCon::Plus => true,
        SumCon::PlusStar1 | SumCon::PlusStar2 => {
            let i = if goal == SumCon::PlusStar1 {
                Index::One
            } else {
                Index::Two
            };
            con == SumCon::plus_q(i)
                || con == SumCon::plus(i)
                || con == SumCon::PlusQ
                || con == SumCon::star(i)
        }
        _ => panic!("sum_synth goal must be +*1, +*2, or +, got {goal}"),
    }
}

// ----------------------------------------------------------------------
// Target-side relations
// ----------------------------------------------------------------------

/// `φ1 ≤ φ2` in the target: reflexivity plus `+i ≤ +`.
pub fn target_subsum(a: TargetSum, b: TargetSum) -> bool {
    a == b || b == TargetSum::TPlus
}

/// `T1 <: T2` in the target. `Bottom` is below everything; it is the
/// principal type of terms that cannot produce a value.
pub fn target_subtype(a: &TargetType, b: &TargetType) -> bool {
    match (a, b) {
        (TargetType::Bottom, _) => true,
        (TargetType::TUnit, TargetType::TUnit) => true,
        (TargetType::TSum(a1, c, a2), TargetType::TSum(b1, d, b2)) => {
            target_subsum(*c, *d) && target_subtype(a1, b1) && target_subtype(a2, b2)
        }
        (TargetType::TArrow(a1, a2), TargetType::TArrow(b1, b2)) => {
            target_subtype(b1, a1) && target_subtype(a2, b2)
        }
        _ => false,
    }
}

/// How a cast can behave at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CastClass {
    /// `φ1 ≤ φ2`: erasable, never fails.
    Safe,
    /// `<+ => +i>`: recovers static knowledge, may fail.
    Backward,
    /// `<+1 => +2>` or `<+2 => +1>`: fails on every value.
    MatchCast,
}

impl std::fmt::Display for CastClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CastClass::Safe => "safe",
            CastClass::Backward => "backward",
            CastClass::MatchCast => "matchcast",
        })
    }
}

/// Classify `<from => to>`. Total on all nine constructor pairs.
pub fn cast_class(from: TargetSum, to: TargetSum) -> CastClass {
    if target_subsum(from, to) {
        CastClass::Safe
    } else if from == TargetSum::TPlus {
        CastClass::Backward
    } else {
        debug_assert!(to != TargetSum::TPlus && from != to);
        CastClass::MatchCast
    }
}

fn cast_code(c: (TargetSum, TargetSum)) -> usize {
    c.0.code() * 3 + c.1.code()
}

fn all_casts() -> impl Iterator<Item = (TargetSum, TargetSum)> {
    TargetSum::ALL
        .into_iter()
        .flat_map(|a| TargetSum::ALL.into_iter().map(move |b| (a, b)))
}

static CAST_PRECISION: LazyLock<[[bool; 9]; 9]> = LazyLock::new(|| {
    let mut r = [[false; 9]; 9];
    let rank = |c: CastClass| match c {
        CastClass::MatchCast => 0,
        CastClass::Backward => 1,
        CastClass::Safe => 2,
    };
    for c1 in all_casts() {
        for c2 in all_casts() {
            let refl = c1 == c2;
            // Class-level: a matchcast is more precise than a backward
            // cast, which is more precise than a safe cast.
            let class = rank(cast_class(c1.0, c1.1)) < rank(cast_class(c2.0, c2.1));
            // The identity cast at + is more precise than a cast that
            // merely forgets a known injection.
            let forget = c1 == (TargetSum::TPlus, TargetSum::TPlus) && c2.1 == TargetSum::TPlus;
            // Componentwise: tightening both endpoints can only sharpen.
            let pointwise = target_subsum(c1.0, c2.0) && target_subsum(c1.1, c2.1);
            if refl || class || forget || pointwise {
                r[cast_code(c1)][cast_code(c2)] = true;
            }
        }
    }
    transitive_closure(&mut r);
    r
});

/// Precision on casts, a preorder: `c1 ⊑ c2` when replacing `c2` by `c1`
/// (on suitably related subjects) only sharpens behaviour.
pub fn cast_precision(c1: (TargetSum, TargetSum), c2: (TargetSum, TargetSum)) -> bool {
    CAST_PRECISION[cast_code(c1)][cast_code(c2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use SumCon::*;
    use TargetSum::*;

    fn ups(rel: fn(SumCon, SumCon) -> bool, c: SumCon) -> Vec<SumCon> {
        SumCon::ALL
            .into_iter()
            .filter(|&d| d != c && rel(c, d))
            .collect()
    }

    #[test]
    fn subsum_matches_hand_computed_closure() {
        let expect: &[(SumCon, &[SumCon])] = &[
            (PlusQ1, &[Plus1, PlusQ, PlusStar1, PlusStar2, Plus]),
            (PlusQ2, &[Plus2, PlusQ, PlusStar1, PlusStar2, Plus]),
            (Plus1, &[PlusStar1, Plus]),
            (Plus2, &[PlusStar2, Plus]),
            (PlusQ, &[PlusStar1, PlusStar2, Plus]),
            (PlusStar1, &[Plus]),
            (PlusStar2, &[Plus]),
            (Plus, &[]),
        ];
        for (c, strict_ups) in expect {
            let mut got = ups(subsum, *c);
            let mut want = strict_ups.to_vec();
            got.sort();
            want.sort();
            assert_eq!(got, want, "strict upward set of {c}");
            assert!(subsum(*c, *c), "reflexivity at {c}");
        }
        let total: usize = SumCon::ALL
            .iter()
            .flat_map(|&a| SumCon::ALL.iter().map(move |&b| usize::from(subsum(a, b))))
            .sum();
        assert_eq!(total, 27);
    }

    #[test]
    fn adding_the_redundant_dynamic_edge_changes_nothing() {
        // +? ≤ + follows from +? ≤ +*1 ≤ +; stating it directly must give
        // the same closure.
        let mut edges = subsum_edges();
        edges.push((PlusQ.code(), Plus.code()));
        let with: [[bool; 8]; 8] = close_edges(&edges);
        assert_eq!(with, *SUBSUM);
    }

    #[test]
    fn precision_matches_hand_computed_closure() {
        let expect: &[(SumCon, &[SumCon])] = &[
            (Plus1, &[PlusQ1, PlusStar1, PlusQ]),
            (Plus2, &[PlusQ2, PlusStar2, PlusQ]),
            (Plus, &[PlusQ]),
            (PlusQ1, &[PlusQ]),
            (PlusQ2, &[PlusQ]),
            (PlusStar1, &[PlusQ]),
            (PlusStar2, &[PlusQ]),
            (PlusQ, &[]),
        ];
        for (c, strict_ups) in expect {
            let mut got = ups(sum_precision, *c);
            let mut want = strict_ups.to_vec();
            got.sort();
            want.sort();
            assert_eq!(got, want, "strict upward set of {c}");
        }
        let total: usize = SumCon::ALL
            .iter()
            .flat_map(|&a| {
                SumCon::ALL
                    .iter()
                    .map(move |&b| usize::from(sum_precision(a, b)))
            })
            .sum();
        assert_eq!(total, 19);
        // The two kinds of partial knowledge are incomparable.
        assert!(!sum_precision(PlusQ1, PlusStar1));
        assert!(!sum_precision(PlusStar1, PlusQ1));
    }

    #[test]
    fn everything_is_below_the_tops() {
        for c in SumCon::ALL {
            assert!(subsum(c, Plus), "{c} ≤ +");
            assert!(sum_precision(c, PlusQ), "{c} ⊑ +?");
        }
    }

    #[test]
    fn dcons_sum_spot_facts() {
        let facts = [
            ((PlusQ, Plus2), true),
            ((Plus1, Plus2), false),
            ((Plus1, PlusQ), true),
            ((Plus, Plus1), false),
            ((PlusStar1, PlusQ1), true),
            ((PlusQ1, Plus2), false),
            ((PlusQ1, PlusQ2), false),
            ((PlusQ1, PlusStar2), true),
        ];
        for ((a, b), want) in facts {
            assert_eq!(dcons_sum(a, b), want, "dcons_sum({a}, {b})");
        }
    }

    #[test]
    fn dcons_sum_contains_both_orders() {
        for a in SumCon::ALL {
            for b in SumCon::ALL {
                if subsum(a, b) || sum_precision(a, b) || sum_precision(b, a) {
                    assert!(dcons_sum(a, b), "dcons_sum({a}, {b}) should hold");
                }
            }
        }
    }

    #[test]
    fn sum_synth_accepts_exactly_the_matchable_constructors() {
        for i in Index::ALL {
            let goal = SumCon::star(i);
            for c in SumCon::ALL {
                let want = c == SumCon::plus(i)
                    || c == SumCon::plus_q(i)
                    || c == PlusQ
                    || c == SumCon::star(i);
                assert_eq!(sum_synth(c, goal), want, "{c} ⇛ {goal}");
            }
        }
        for c in SumCon::ALL {
            assert!(sum_synth(c, Plus));
        }
    }

    #[test]
    #[should_panic(expected = "sum_synth goal")]
    fn sum_synth_rejects_bad_goals() {
        sum_synth(Plus, PlusQ);
    }

    #[test]
    fn arrow_variance_differs_between_orders() {
        let a = Type::sum(Type::Unit, Plus1, Type::Unit);
        let b = Type::sum(Type::Unit, Plus, Type::Unit);
        // a <: b, so b -> Unit <: a -> Unit but not conversely.
        assert!(subtype(&a, &b));
        assert!(subtype(
            &Type::arrow(b.clone(), Type::Unit),
            &Type::arrow(a.clone(), Type::Unit)
        ));
        assert!(!subtype(
            &Type::arrow(a.clone(), Type::Unit),
            &Type::arrow(b.clone(), Type::Unit)
        ));
        // Precision is covariant on the left: +1 ⊑ +?1 lifts pointwise.
        let p = Type::sum(Type::Unit, Plus1, Type::Unit);
        let q = Type::sum(Type::Unit, PlusQ1, Type::Unit);
        assert!(type_precision(
            &Type::arrow(p.clone(), Type::Unit),
            &Type::arrow(q.clone(), Type::Unit)
        ));
        assert!(!subtype(&p, &q));
    }

    #[test]
    fn dcons_flips_arrow_domains() {
        // (+? -> Unit) ~> (+2 -> Unit) needs +2 ~> +? in the domain.
        let dom_q = Type::sum(Type::Unit, PlusQ, Type::Unit);
        let dom_2 = Type::sum(Type::Unit, Plus2, Type::Unit);
        assert!(dcons(
            &Type::arrow(dom_q.clone(), Type::Unit),
            &Type::arrow(dom_2.clone(), Type::Unit)
        ));
        // +1 ~> +2 fails in either orientation.
        let dom_1 = Type::sum(Type::Unit, Plus1, Type::Unit);
        assert!(!dcons(
            &Type::arrow(dom_1.clone(), Type::Unit),
            &Type::arrow(dom_2.clone(), Type::Unit)
        ));
    }

    #[test]
    fn target_subtype_bottom_is_least() {
        let t = TargetType::sum(TargetType::TUnit, TPlus1, TargetType::Bottom);
        assert!(target_subtype(&TargetType::Bottom, &t));
        assert!(target_subtype(
            &t,
            &TargetType::sum(TargetType::TUnit, TPlus, TargetType::TUnit)
        ));
        assert!(!target_subtype(&t, &TargetType::Bottom));
    }

    #[test]
    fn cast_class_is_exhaustive_and_correct() {
        let classes = [
            ((TPlus, TPlus), CastClass::Safe),
            ((TPlus1, TPlus1), CastClass::Safe),
            ((TPlus2, TPlus2), CastClass::Safe),
            ((TPlus1, TPlus), CastClass::Safe),
            ((TPlus2, TPlus), CastClass::Safe),
            ((TPlus, TPlus1), CastClass::Backward),
            ((TPlus, TPlus2), CastClass::Backward),
            ((TPlus1, TPlus2), CastClass::MatchCast),
            ((TPlus2, TPlus1), CastClass::MatchCast),
        ];
        assert_eq!(classes.len(), 9);
        for ((f, t), want) in classes {
            assert_eq!(cast_class(f, t), want, "<{f} => {t}>");
        }
    }

    #[test]
    fn cast_precision_has_the_stated_instances() {
        // Class order: matchcast ⊑ backward ⊑ safe.
        assert!(cast_precision((TPlus1, TPlus2), (TPlus, TPlus1)));
        assert!(cast_precision((TPlus, TPlus1), (TPlus1, TPlus)));
        assert!(cast_precision((TPlus2, TPlus1), (TPlus, TPlus)));
        // Identity at + is more precise than forgetting an injection.
        assert!(cast_precision((TPlus, TPlus), (TPlus1, TPlus)));
        assert!(cast_precision((TPlus, TPlus), (TPlus2, TPlus)));
        // Componentwise tightening.
        assert!(cast_precision((TPlus2, TPlus2), (TPlus, TPlus2)));
        assert!(cast_precision((TPlus2, TPlus2), (TPlus2, TPlus)));
        assert!(cast_precision((TPlus1, TPlus1), (TPlus, TPlus)));
        // A safe cast is never more precise than a matchcast.
        assert!(!cast_precision((TPlus1, TPlus1), (TPlus1, TPlus2)));
        assert!(!cast_precision((TPlus, TPlus), (TPlus2, TPlus1)));
    }

    #[test]
    fn cast_precision_is_a_preorder() {
        let cs: Vec<_> = all_casts().collect();
        for &c in &cs {
            assert!(cast_precision(c, c), "reflexivity at <{} => {}>", c.0, c.1);
        }
        for &a in &cs {
            for &b in &cs {
                for &c in &cs {
                    if cast_precision(a, b) && cast_precision(b, c) {
                        assert!(
                            cast_precision(a, c),
                            "transitivity: <{} => {}> ⊑ <{} => {}> ⊑ <{} => {}>",
                            a.0,
                            a.1,
                            b.0,
                            b.1,
                            c.0,
                            c.1
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn expr_precision_requires_matching_erasure() {
        let x_anno = Expr::anno(Expr::var("x"), Type::Unit);
        let x = Expr::var("x");
        assert!(!expr_precision(&x_anno, &x));
        assert!(!expr_precision(&x, &x_anno));
        assert!(expr_precision(&x_anno, &x_anno));
        // Binder names are compared literally.
        assert!(!expr_precision(
            &Expr::lam("x", Expr::var("x")),
            &Expr::lam("y", Expr::var("y"))
        ));
    }
}
