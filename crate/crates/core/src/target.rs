//! The cast calculus: principal target typing and a deterministic
//! small-step operational semantics.
//!
//! ```text
//! Θ ⊢ M : T            principal typing (target_typecheck)
//! M ↦ M'               one step (step), via unique decomposition M = E[r]
//! ```
//!
//! Typing computes *principal* types. `Bottom` is the principal type of
//! `matchfail` and of the missing component of a bare injection; it is
//! below every type and never escapes into user-visible output. Case
//! arms are combined with a join, which is total on subtypes of a common
//! type — exactly the shape elaboration produces.

use crate::relations::{cast_class, cast_precision, target_subsum, target_subtype, CastClass};
use crate::syntax::ast::{EvalContext, Frame, Index, TargetCtx, TargetSum, TargetTerm, TargetType};

// ======================================================================
// Typing
// ======================================================================

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TargetTypeError {
    #[error("unbound variable '{name}'")]
    Unbound { name: String },
    #[error("cannot apply a value of type {found}; it is not a function")]
    NotAFunction { found: TargetType },
    #[error("argument type {found} is not a subtype of the domain {expected}")]
    ArgMismatch {
        expected: TargetType,
        found: TargetType,
    },
    #[error("cast or case subject has non-sum type {found}")]
    NotASum { found: TargetType },
    #[error("cast source {expected} does not cover the subject constructor {found}")]
    CastMismatch {
        expected: TargetSum,
        found: TargetSum,
    },
    #[error("a case on inj{index} cannot eliminate a {con} sum")]
    WrongCaseIndex { index: Index, con: TargetSum },
    #[error("cannot join arm types {left} and {right}")]
    JoinFailure { left: TargetType, right: TargetType },
}

fn join_con(a: TargetSum, b: TargetSum) -> TargetSum {
    if a == b {
        a
    } else {
        TargetSum::TPlus
    }
}

fn meet_con(a: TargetSum, b: TargetSum) -> Option<TargetSum> {
    if a == b {
        Some(a)
    } else if a == TargetSum::TPlus {
        Some(b)
    } else if b == TargetSum::TPlus {
        Some(a)
    } else {
        None
    }
}

/// Least upper bound. Fails only on incompatible shapes, which cannot
/// arise between subtypes of a common type.
pub fn join(a: &TargetType, b: &TargetType) -> Result<TargetType, TargetTypeError> {
    match (a, b) {
        (TargetType::Bottom, t) | (t, TargetType::Bottom) => Ok(t.clone()),
        (TargetType::TUnit, TargetType::TUnit) => Ok(TargetType::TUnit),
        (TargetType::TSum(a1, c, a2), TargetType::TSum(b1, d, b2)) => Ok(TargetType::sum(
            join(a1, b1)?,
            join_con(*c, *d),
            join(a2, b2)?,
        )),
        (TargetType::TArrow(a1, a2), TargetType::TArrow(b1, b2)) => {
            Ok(TargetType::arrow(meet(a1, b1), join(a2, b2)?))
        }
        _ => Err(TargetTypeError::JoinFailure {
            left: a.clone(),
            right: b.clone(),
        }),
    }
}

/// Greatest lower bound, total: incompatibilities collapse to `Bottom`.
pub fn meet(a: &TargetType, b: &TargetType) -> TargetType {
    match (a, b) {
        (TargetType::Bottom, _) | (_, TargetType::Bottom) => TargetType::Bottom,
        (TargetType::TUnit, TargetType::TUnit) => TargetType::TUnit,
        (TargetType::TSum(a1, c, a2), TargetType::TSum(b1, d, b2)) => match meet_con(*c, *d) {
            Some(con) => TargetType::sum(meet(a1, b1), con, meet(a2, b2)),
            None => TargetType::Bottom,
        },
        (TargetType::TArrow(a1, a2), TargetType::TArrow(b1, b2)) => match join(a1, b1) {
            Ok(dom) => TargetType::arrow(dom, meet(a2, b2)),
            Err(_) => TargetType::Bottom,
        },
        _ => TargetType::Bottom,
    }
}

/// Compute the principal type of `m` under `ctx`.
pub fn target_typecheck(ctx: &TargetCtx, m: &TargetTerm) -> Result<TargetType, TargetTypeError> {
    match m {
        TargetTerm::TUnitVal => Ok(TargetType::TUnit),
        TargetTerm::TVar(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| TargetTypeError::Unbound { name: x.clone() }),
        TargetTerm::TLam(x, dom, body) => {
            let cod = target_typecheck(&ctx.extended(x, dom.clone()), body)?;
            Ok(TargetType::arrow(dom.clone(), cod))
        }
        TargetTerm::TApp(f, arg) => {
            let tf = target_typecheck(ctx, f)?;
            let ta = target_typecheck(ctx, arg)?;
            match tf {
                TargetType::TArrow(dom, cod) => {
                    if target_subtype(&ta, &dom) {
                        Ok(*cod)
                    } else {
                        Err(TargetTypeError::ArgMismatch {
                            expected: *dom,
                            found: ta,
                        })
                    }
                }
                // A head that cannot produce a value: the application
                // cannot either, but the argument must still be typable.
                TargetType::Bottom => Ok(TargetType::Bottom),
                other => Err(TargetTypeError::NotAFunction { found: other }),
            }
        }
        TargetTerm::TInj(i, payload) => {
            let tp = target_typecheck(ctx, payload)?;
            let (l, r) = match i {
                Index::One => (tp, TargetType::Bottom),
                Index::Two => (TargetType::Bottom, tp),
            };
            Ok(TargetType::sum(l, TargetSum::plus(*i), r))
        }
        TargetTerm::Cast(from, to, inner) => match target_typecheck(ctx, inner)? {
            TargetType::TSum(t1, con, t2) => {
                if target_subsum(con, *from) {
                    Ok(TargetType::TSum(t1, *to, t2))
                } else {
                    Err(TargetTypeError::CastMismatch {
                        expected: *from,
                        found: con,
                    })
                }
            }
            TargetType::Bottom => Ok(TargetType::sum(TargetType::Bottom, *to, TargetType::Bottom)),
            other => Err(TargetTypeError::NotASum { found: other }),
        },
        TargetTerm::TCaseOne(s, i, x, arm) => {
            let (t1, t2) = match target_typecheck(ctx, s)? {
                TargetType::TSum(t1, con, t2) => {
                    if con != TargetSum::plus(*i) {
                        return Err(TargetTypeError::WrongCaseIndex { index: *i, con });
                    }
                    (*t1, *t2)
                }
                TargetType::Bottom => (TargetType::Bottom, TargetType::Bottom),
                other => return Err(TargetTypeError::NotASum { found: other }),
            };
            let bound = match i {
                Index::One => t1,
                Index::Two => t2,
            };
            target_typecheck(&ctx.extended(x, bound), arm)
        }
        TargetTerm::TCaseTwo(s, x1, arm1, x2, arm2) => {
            let (t1, t2) = match target_typecheck(ctx, s)? {
                TargetType::TSum(t1, _, t2) => (*t1, *t2),
                TargetType::Bottom => (TargetType::Bottom, TargetType::Bottom),
                other => return Err(TargetTypeError::NotASum { found: other }),
            };
            let u1 = target_typecheck(&ctx.extended(x1, t1), arm1)?;
            let u2 = target_typecheck(&ctx.extended(x2, t2), arm2)?;
            join(&u1, &u2)
        }
        TargetTerm::Matchfail => Ok(TargetType::Bottom),
    }
}

// ======================================================================
// Operational semantics
// ======================================================================

/// Values: unit, lambdas, and injections of values.
pub fn is_value(m: &TargetTerm) -> bool {
    match m {
        TargetTerm::TUnitVal | TargetTerm::TLam(..) => true,
        TargetTerm::TInj(_, p) => is_value(p),
        _ => false,
    }
}

/// The unique decomposition of a closed term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    /// The term is a value.
    Value,
    /// `m = E[r]` with `r` an instruction.
    Redex(EvalContext, TargetTerm),
    /// `m = E[matchfail]`.
    Matchfail(EvalContext),
    /// No decomposition: open or ill-typed.
    Stuck,
}

/// Decompose `m` into an evaluation context and the next instruction.
/// Every well-typed closed term decomposes (progress); stuckness is
/// reported, not panicked on, so it can be asserted against.
pub fn decompose(m: &TargetTerm) -> Decomposition {
    if is_value(m) {
        return Decomposition::Value;
    }
    let descend = |inner: &TargetTerm, frame: Frame| match decompose(inner) {
        Decomposition::Redex(mut ctx, r) => {
            ctx.0.insert(0, frame);
            Decomposition::Redex(ctx, r)
        }
        Decomposition::Matchfail(mut ctx) => {
            ctx.0.insert(0, frame);
            Decomposition::Matchfail(ctx)
        }
        Decomposition::Stuck => Decomposition::Stuck,
        Decomposition::Value => unreachable!("decomposing inside a non-value"),
    };
    match m {
        TargetTerm::Matchfail => Decomposition::Matchfail(EvalContext::empty()),
        TargetTerm::TInj(i, p) => descend(p, Frame::InjPayload(*i)),
        TargetTerm::Cast(from, to, inner) => {
            if is_value(inner) {
                match **inner {
                    TargetTerm::TInj(..) => Decomposition::Redex(EvalContext::empty(), m.clone()),
                    _ => Decomposition::Stuck,
                }
            } else {
                descend(inner, Frame::CastInner(*from, *to))
            }
        }
        TargetTerm::TApp(f, arg) => {
            if !is_value(f) {
                descend(f, Frame::AppFun((**arg).clone()))
            } else if !is_value(arg) {
                descend(arg, Frame::AppArg((**f).clone()))
            } else if matches!(**f, TargetTerm::TLam(..)) {
                Decomposition::Redex(EvalContext::empty(), m.clone())
            } else {
                Decomposition::Stuck
            }
        }
        TargetTerm::TCaseOne(s, i, x, arm) => {
            if !is_value(s) {
                descend(s, Frame::CaseOneScrut(*i, x.clone(), (**arm).clone()))
            } else if matches!(&**s, TargetTerm::TInj(j, _) if j == i) {
                Decomposition::Redex(EvalContext::empty(), m.clone())
            } else {
                Decomposition::Stuck
            }
        }
        TargetTerm::TCaseTwo(s, x1, arm1, x2, arm2) => {
            if !is_value(s) {
                descend(
                    s,
                    Frame::CaseTwoScrut(x1.clone(), (**arm1).clone(), x2.clone(), (**arm2).clone()),
                )
            } else if matches!(**s, TargetTerm::TInj(..)) {
                Decomposition::Redex(EvalContext::empty(), m.clone())
            } else {
                Decomposition::Stuck
            }
        }
        TargetTerm::TUnitVal | TargetTerm::TLam(..) | TargetTerm::TVar(_) => Decomposition::Stuck,
    }
}

/// Names of the reduction and matchfail-propagation steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepRule {
    ReduceBeta,
    ReduceUpcast,
    ReduceCastSuccess,
    ReduceCastFailure,
    ReduceCaseOne,
    ReduceCaseTwo,
    StepMatchfail,
}

impl StepRule {
    pub const ALL: [StepRule; 7] = [
        StepRule::ReduceBeta,
        StepRule::ReduceUpcast,
        StepRule::ReduceCastSuccess,
        StepRule::ReduceCastFailure,
        StepRule::ReduceCaseOne,
        StepRule::ReduceCaseTwo,
        StepRule::StepMatchfail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StepRule::ReduceBeta => "ReduceBeta",
            StepRule::ReduceUpcast => "ReduceUpcast",
            StepRule::ReduceCastSuccess => "ReduceCastSuccess",
            StepRule::ReduceCastFailure => "ReduceCastFailure",
            StepRule::ReduceCaseOne => "ReduceCaseOne",
            StepRule::ReduceCaseTwo => "ReduceCaseTwo",
            StepRule::StepMatchfail => "StepMatchfail",
        }
    }
}

/// Contract an instruction. The argument must be a redex as produced by
/// [`decompose`].
pub fn reduce(r: &TargetTerm) -> (TargetTerm, StepRule) {
    match r {
        TargetTerm::TApp(f, arg) => match &**f {
            TargetTerm::TLam(x, _, body) => (body.subst(x, arg), StepRule::ReduceBeta),
            other => unreachable!("beta redex with head {other}"),
        },
        TargetTerm::Cast(from, to, inner) => {
            let j = match &**inner {
                TargetTerm::TInj(j, _) => *j,
                other => unreachable!("cast redex over {other}"),
            };
            match cast_class(*from, *to) {
                CastClass::Safe => ((**inner).clone(), StepRule::ReduceUpcast),
                CastClass::Backward => {
                    if Some(j) == to.index() {
                        ((**inner).clone(), StepRule::ReduceCastSuccess)
                    } else {
                        (TargetTerm::Matchfail, StepRule::ReduceCastFailure)
                    }
                }
                CastClass::MatchCast => (TargetTerm::Matchfail, StepRule::ReduceCastFailure),
            }
        }
        TargetTerm::TCaseOne(s, i, x, arm) => match &**s {
            TargetTerm::TInj(j, w) if j == i => (arm.subst(x, w), StepRule::ReduceCaseOne),
            other => unreachable!("one-armed case redex over {other}"),
        },
        TargetTerm::TCaseTwo(s, x1, arm1, x2, arm2) => match &**s {
            TargetTerm::TInj(Index::One, w) => (arm1.subst(x1, w), StepRule::ReduceCaseTwo),
            TargetTerm::TInj(Index::Two, w) => (arm2.subst(x2, w), StepRule::ReduceCaseTwo),
            other => unreachable!("two-armed case redex over {other}"),
        },
        other => unreachable!("not an instruction: {other}"),
    }
}

/// The outcome of trying to advance a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// A value or a bare `matchfail`: execution is over.
    Terminal,
    /// One step of the deterministic machine.
    Next { term: TargetTerm, rule: StepRule },
    /// No rule applies (open or ill-typed input).
    Stuck,
}

/// Advance `m` by exactly one step. A `matchfail` inside a non-empty
/// evaluation context aborts to the top immediately.
pub fn step(m: &TargetTerm) -> Step {
    match decompose(m) {
        Decomposition::Value => Step::Terminal,
        Decomposition::Matchfail(ctx) => {
            if ctx.is_empty() {
                Step::Terminal
            } else {
                Step::Next {
                    term: TargetTerm::Matchfail,
                    rule: StepRule::StepMatchfail,
                }
            }
        }
        Decomposition::Redex(ctx, r) => {
            let (contractum, rule) = reduce(&r);
            Step::Next {
                term: ctx.plug(contractum),
                rule,
            }
        }
        Decomposition::Stuck => Step::Stuck,
    }
}

/// Where evaluation ended up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Value(TargetTerm),
    Matchfail,
    BudgetExceeded,
}

/// The steps taken during an evaluation, for diagnostics and replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTrace {
    pub initial: TargetTerm,
    pub steps: Vec<(StepRule, TargetTerm)>,
}

/// Run `m` for at most `budget` steps.
///
/// Panics on a stuck term: evaluation is only defined on well-typed
/// closed terms, which never get stuck.
pub fn evaluate(m: &TargetTerm, budget: usize, want_trace: bool) -> (Verdict, Option<StepTrace>) {
    let mut trace = want_trace.then(|| StepTrace {
        initial: m.clone(),
        steps: Vec::new(),
    });
    let mut cur = m.clone();
    for _ in 0..budget {
        match step(&cur) {
            Step::Terminal => {
                let verdict = if cur == TargetTerm::Matchfail {
                    Verdict::Matchfail
                } else {
                    Verdict::Value(cur)
                };
                return (verdict, trace);
            }
            Step::Next { term, rule } => {
                if let Some(t) = trace.as_mut() {
                    t.steps.push((rule, term.clone()));
                }
                cur = term;
            }
            Step::Stuck => panic!("stuck term during evaluation: {cur}"),
        }
    }
    if matches!(step(&cur), Step::Terminal) {
        let verdict = if cur == TargetTerm::Matchfail {
            Verdict::Matchfail
        } else {
            Verdict::Value(cur)
        };
        return (verdict, trace);
    }
    (Verdict::BudgetExceeded, trace)
}

// ======================================================================
// Term queries and precision
// ======================================================================

/// Does the term contain a cast anywhere?
pub fn contains_cast(m: &TargetTerm) -> bool {
    match m {
        TargetTerm::Cast(..) => true,
        TargetTerm::TUnitVal | TargetTerm::TVar(_) | TargetTerm::Matchfail => false,
        TargetTerm::TLam(_, _, b) | TargetTerm::TInj(_, b) => contains_cast(b),
        TargetTerm::TApp(f, a) => contains_cast(f) || contains_cast(a),
        TargetTerm::TCaseOne(s, _, _, arm) => contains_cast(s) || contains_cast(arm),
        TargetTerm::TCaseTwo(s, _, a1, _, a2) => {
            contains_cast(s) || contains_cast(a1) || contains_cast(a2)
        }
    }
}

/// Does the term contain `matchfail` anywhere?
pub fn contains_matchfail(m: &TargetTerm) -> bool {
    match m {
        TargetTerm::Matchfail => true,
        TargetTerm::TUnitVal | TargetTerm::TVar(_) => false,
        TargetTerm::TLam(_, _, b) | TargetTerm::TInj(_, b) | TargetTerm::Cast(_, _, b) => {
            contains_matchfail(b)
        }
        TargetTerm::TApp(f, a) => contains_matchfail(f) || contains_matchfail(a),
        TargetTerm::TCaseOne(s, _, _, arm) => contains_matchfail(s) || contains_matchfail(arm),
        TargetTerm::TCaseTwo(s, _, a1, _, a2) => {
            contains_matchfail(s) || contains_matchfail(a1) || contains_matchfail(a2)
        }
    }
}

/// Syntactic precision on target terms, `m1 ⊑ m2`: the left side carries
/// more static commitment — stricter casts, one-armed where the right is
/// two-armed, possibly already failed — while both describe the same
/// program. Domain annotations are ignored; they have no run-time role.
pub fn term_precision(m1: &TargetTerm, m2: &TargetTerm) -> bool {
    // The failed side is below everything.
    if matches!(m1, TargetTerm::Matchfail) {
        return true;
    }
    // A cast present only on the committed side.
    if let TargetTerm::Cast(_, _, inner) = m1 {
        if term_precision(inner, m2) {
            return true;
        }
    }
    match (m1, m2) {
        (TargetTerm::TUnitVal, TargetTerm::TUnitVal) => true,
        (TargetTerm::TVar(x), TargetTerm::TVar(y)) => x == y,
        (TargetTerm::TLam(x, _, b1), TargetTerm::TLam(y, _, b2)) => {
            x == y && term_precision(b1, b2)
        }
        (TargetTerm::TApp(f1, a1), TargetTerm::TApp(f2, a2)) => {
            term_precision(f1, f2) && term_precision(a1, a2)
        }
        (TargetTerm::TInj(i, p1), TargetTerm::TInj(j, p2)) => i == j && term_precision(p1, p2),
        (TargetTerm::Cast(f1, t1, p1), TargetTerm::Cast(f2, t2, p2)) => {
            cast_precision((*f1, *t1), (*f2, *t2)) && term_precision(p1, p2)
        }
        (TargetTerm::TCaseOne(s1, i, x, b1), TargetTerm::TCaseOne(s2, j, y, b2)) => {
            i == j && x == y && term_precision(s1, s2) && term_precision(b1, b2)
        }
        (TargetTerm::TCaseTwo(s1, x1, a1, x2, a2), TargetTerm::TCaseTwo(s2, y1, b1, y2, b2)) => {
            x1 == y1
                && x2 == y2
                && term_precision(s1, s2)
                && term_precision(a1, b1)
                && term_precision(a2, b2)
        }
        // A committed one-armed elimination below the open two-armed one.
        (TargetTerm::TCaseOne(s1, i, x, arm), TargetTerm::TCaseTwo(s2, y1, b1, y2, b2)) => {
            let (y, b) = match i {
                Index::One => (y1, b1),
                Index::Two => (y2, b2),
            };
            x == y && term_precision(s1, s2) && term_precision(arm, b)
        }
        _ => false,
    }
}
