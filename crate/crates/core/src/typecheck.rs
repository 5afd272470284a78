//! Typechecking: the bidirectional algorithm, a validator for declarative
//! type-assignment derivations, and the translations between the two.
//!
//! ```text
//! Γ ⊢ e ⇐ A    check: e accepts type A        (algorithmic)
//! Γ ⊢ e ⇒ A    synth: e produces type A       (algorithmic)
//! Γ ⊢ e : A    assignment                     (validated, not inferred)
//! ```
//!
//! Unit values, functions, injections, and case expressions are checked
//! against a goal type; variables, applications, and annotated terms
//! synthesize and meet a check goal through consistent subsumption. The
//! static and dynamic fragments run the same algorithm with subsumption
//! restricted to subtyping, respectively type equality, after rejecting
//! inputs that mention constructors outside the fragment.

use serde_json::{json, Value};

use crate::relations::{dcons, subsum, subtype, sum_synth};
use crate::syntax::ast::{Ctx, Expr, Index, SumCon, Type};

// ======================================================================
// Derivations
// ======================================================================

/// Which judgment a bidirectional node concludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Check,
    Synth,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Check => "check",
            Direction::Synth => "synth",
        }
    }
}

/// Rules of the bidirectional system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BiRule {
    SynVar,
    SynAnno,
    SynFunElim,
    ChkCSub,
    ChkUnitIntro,
    ChkFunIntro,
    ChkSumIntro,
    ChkSumElimOne,
    ChkSumElimTwo,
}

impl BiRule {
    pub const ALL: [BiRule; 9] = [
        BiRule::SynVar,
        BiRule::SynAnno,
        BiRule::SynFunElim,
        BiRule::ChkCSub,
        BiRule::ChkUnitIntro,
        BiRule::ChkFunIntro,
        BiRule::ChkSumIntro,
        BiRule::ChkSumElimOne,
        BiRule::ChkSumElimTwo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BiRule::SynVar => "SynVar",
            BiRule::SynAnno => "SynAnno",
            BiRule::SynFunElim => "SynFunElim",
            BiRule::ChkCSub => "ChkCSub",
            BiRule::ChkUnitIntro => "ChkUnitIntro",
            BiRule::ChkFunIntro => "ChkFunIntro",
            BiRule::ChkSumIntro => "ChkSumIntro",
            BiRule::ChkSumElimOne => "ChkSumElimOne",
            BiRule::ChkSumElimTwo => "ChkSumElimTwo",
        }
    }
}

/// Rules of the declarative type-assignment system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TARule {
    SVar,
    SCSub,
    SAnno,
    SUnitIntro,
    SFunIntro,
    SFunElim,
    SSumIntro,
    SSumElimOne,
    SSumElimTwo,
}

impl TARule {
    pub const ALL: [TARule; 9] = [
        TARule::SVar,
        TARule::SCSub,
        TARule::SAnno,
        TARule::SUnitIntro,
        TARule::SFunIntro,
        TARule::SFunElim,
        TARule::SSumIntro,
        TARule::SSumElimOne,
        TARule::SSumElimTwo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TARule::SVar => "SVar",
            TARule::SCSub => "SCSub",
            TARule::SAnno => "SAnno",
            TARule::SUnitIntro => "SUnitIntro",
            TARule::SFunIntro => "SFunIntro",
            TARule::SFunElim => "SFunElim",
            TARule::SSumIntro => "SSumIntro",
            TARule::SSumElimOne => "SSumElimOne",
            TARule::SSumElimTwo => "SSumElimTwo",
        }
    }
}

/// A side condition discharged at a derivation node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideFact {
    /// `A ~> B` (consistent subsumption).
    Dcons(Type, Type),
    /// `A <: B` (static fragment subsumption).
    Subtype(Type, Type),
    /// `A = B` (dynamic fragment subsumption).
    TypeEq(Type, Type),
    /// `δ1 ≤ δ2` on sum constructors (injection introduction).
    Subsum(SumCon, SumCon),
    /// `δ ⇛ goal` (scrutinee elimination evidence).
    SumSynth(SumCon, SumCon),
}

impl SideFact {
    pub fn to_json(&self) -> Value {
        let (relation, left, right) = match self {
            SideFact::Dcons(a, b) => ("dcons", a.to_string(), b.to_string()),
            SideFact::Subtype(a, b) => ("subtype", a.to_string(), b.to_string()),
            SideFact::TypeEq(a, b) => ("type-eq", a.to_string(), b.to_string()),
            SideFact::Subsum(a, b) => ("subsum", a.to_string(), b.to_string()),
            SideFact::SumSynth(a, b) => ("sum-synth", a.to_string(), b.to_string()),
        };
        json!({ "relation": relation, "left": left, "right": right })
    }
}

fn ctx_to_json(ctx: &Ctx) -> Value {
    Value::Object(
        ctx.iter()
            .map(|(x, t)| (x.clone(), Value::String(t.to_string())))
            .collect(),
    )
}

/// A node of a bidirectional derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct BiDerivation {
    pub rule: BiRule,
    pub ctx: Ctx,
    pub expr: Expr,
    pub dir: Direction,
    pub ty: Type,
    pub side: Option<SideFact>,
    pub children: Vec<BiDerivation>,
}

impl BiDerivation {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// All nodes, preorder.
    pub fn nodes(&self) -> Vec<&BiDerivation> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let n = out[i];
            out.extend(n.children.iter());
            i += 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule.as_str(),
            "dir": self.dir.as_str(),
            "ctx": ctx_to_json(&self.ctx),
            "expr": self.expr.to_string(),
            "type": self.ty.to_string(),
            "side": self.side.as_ref().map(|s| s.to_json()),
            "children": self.children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// A node of a type-assignment derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct TADerivation {
    pub rule: TARule,
    pub ctx: Ctx,
    pub expr: Expr,
    pub ty: Type,
    pub side: Option<SideFact>,
    pub children: Vec<TADerivation>,
}

impl TADerivation {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn nodes(&self) -> Vec<&TADerivation> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let n = out[i];
            out.extend(n.children.iter());
            i += 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule.as_str(),
            "ctx": ctx_to_json(&self.ctx),
            "expr": self.expr.to_string(),
            "type": self.ty.to_string(),
            "side": self.side.as_ref().map(|s| s.to_json()),
            "children": self.children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

// ======================================================================
// Errors
// ======================================================================

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeErrorKind {
    #[error("unbound variable '{name}'")]
    UnboundVariable { name: String },
    #[error("cannot apply a value of type {found}; it is not a function")]
    NotAFunction { found: Type },
    #[error("cannot synthesize a type for this expression; annotate it")]
    NeedsAnnotation,
    #[error("this expression requires {expected}, but got {found}")]
    ShapeMismatch { expected: &'static str, found: Type },
    #[error("inj{index} cannot build a value of a {con} sum")]
    WrongInjection { index: Index, con: SumCon },
    #[error("a one-armed case on inj{index} cannot eliminate a {con} sum")]
    DoomedOneArmedCase { index: Index, con: SumCon },
    #[error("type {from} is not consistent with {to}")]
    NoDcons { from: Type, to: Type },
    #[error("type {sub} is not subsumed by {sup} in this fragment")]
    NotASubsum { sub: Type, sup: Type },
    #[error("sum constructor {con} is outside this fragment")]
    FragmentViolation { con: SumCon },
}

/// A type error together with the path (child indices from the root
/// expression) of the subexpression it blames.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: Vec<usize>,
}

// ======================================================================
// The algorithmic checker
// ======================================================================

/// Which subsumption the check/synth algorithm discharges `ChkCSub` with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Subsumption {
    /// Directed consistency `~>`.
    Consistent,
    /// Subtyping only (static fragment).
    Static,
    /// Type equality only (dynamic fragment).
    Dynamic,
}

struct Checker {
    mode: Subsumption,
}

fn pick<'a>(i: Index, one: &'a Type, two: &'a Type) -> &'a Type {
    match i {
        Index::One => one,
        Index::Two => two,
    }
}

impl Checker {
    fn err(&self, kind: TypeErrorKind, path: &[usize]) -> TypeError {
        TypeError {
            kind,
            path: path.to_vec(),
        }
    }

    fn synth(&self, ctx: &Ctx, e: &Expr, path: &mut Vec<usize>) -> Result<BiDerivation, TypeError> {
        match e {
            Expr::Var(x) => match ctx.lookup(x) {
                Some(a) => Ok(BiDerivation {
                    rule: BiRule::SynVar,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Synth,
                    ty: a.clone(),
                    side: None,
                    children: vec![],
                }),
                None => Err(self.err(TypeErrorKind::UnboundVariable { name: x.clone() }, path)),
            },
            Expr::Anno(inner, a) => {
                path.push(0);
                let d = self.check(ctx, inner, a, path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::SynAnno,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Synth,
                    ty: a.clone(),
                    side: None,
                    children: vec![d],
                })
            }
            Expr::App(f, arg) => {
                path.push(0);
                let df = self.synth(ctx, f, path)?;
                let (dom, cod) = match &df.ty {
                    Type::Arrow(dom, cod) => ((**dom).clone(), (**cod).clone()),
                    other => {
                        return Err(self.err(
                            TypeErrorKind::NotAFunction {
                                found: other.clone(),
                            },
                            path,
                        ))
                    }
                };
                path.pop();
                path.push(1);
                let da = self.check(ctx, arg, &dom, path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::SynFunElim,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Synth,
                    ty: cod,
                    side: None,
                    children: vec![df, da],
                })
            }
            Expr::UnitVal
            | Expr::Lam(..)
            | Expr::Inj(..)
            | Expr::CaseOne(..)
            | Expr::CaseTwo(..) => Err(self.err(TypeErrorKind::NeedsAnnotation, path)),
        }
    }

    fn check(
        &self,
        ctx: &Ctx,
        e: &Expr,
        a: &Type,
        path: &mut Vec<usize>,
    ) -> Result<BiDerivation, TypeError> {
        match e {
            Expr::UnitVal => {
                if *a != Type::Unit {
                    return Err(self.err(
                        TypeErrorKind::ShapeMismatch {
                            expected: "Unit",
                            found: a.clone(),
                        },
                        path,
                    ));
                }
                Ok(BiDerivation {
                    rule: BiRule::ChkUnitIntro,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: Type::Unit,
                    side: None,
                    children: vec![],
                })
            }
            Expr::Lam(x, body) => {
                let (dom, cod) = match a {
                    Type::Arrow(dom, cod) => (dom, cod),
                    other => {
                        return Err(self.err(
                            TypeErrorKind::ShapeMismatch {
                                expected: "a function type",
                                found: other.clone(),
                            },
                            path,
                        ))
                    }
                };
                path.push(0);
                let db = self.check(&ctx.extended(x, (**dom).clone()), body, cod, path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::ChkFunIntro,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: a.clone(),
                    side: None,
                    children: vec![db],
                })
            }
            Expr::Inj(i, payload) => {
                let (a1, del, a2) = match a {
                    Type::Sum(a1, del, a2) => (a1, *del, a2),
                    other => {
                        return Err(self.err(
                            TypeErrorKind::ShapeMismatch {
                                expected: "a sum type",
                                found: other.clone(),
                            },
                            path,
                        ))
                    }
                };
                // Evidence that side i is possible. In the static fragment
                // the injection has static constructor +i; everywhere else
                // it enters as a discovered injection +?i.
                let tag = match self.mode {
                    Subsumption::Static => SumCon::plus(*i),
                    _ => SumCon::plus_q(*i),
                };
                if !subsum(tag, del) {
                    return Err(self.err(
                        TypeErrorKind::WrongInjection {
                            index: *i,
                            con: del,
                        },
                        path,
                    ));
                }
                path.push(0);
                let dp = self.check(ctx, payload, pick(*i, a1, a2), path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::ChkSumIntro,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: a.clone(),
                    side: Some(SideFact::Subsum(tag, del)),
                    children: vec![dp],
                })
            }
            Expr::CaseOne(s, i, x, arm) => {
                path.push(0);
                let ds = self.synth(ctx, s, path)?;
                let (b1, del, b2) = match &ds.ty {
                    Type::Sum(b1, del, b2) => ((**b1).clone(), *del, (**b2).clone()),
                    other => {
                        return Err(self.err(
                            TypeErrorKind::ShapeMismatch {
                                expected: "a sum type",
                                found: other.clone(),
                            },
                            path,
                        ))
                    }
                };
                path.pop();
                let goal = SumCon::star(*i);
                if !sum_synth(del, goal) {
                    return Err(self.err(
                        TypeErrorKind::DoomedOneArmedCase {
                            index: *i,
                            con: del,
                        },
                        path,
                    ));
                }
                path.push(1);
                let darm =
                    self.check(&ctx.extended(x, pick(*i, &b1, &b2).clone()), arm, a, path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::ChkSumElimOne,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: a.clone(),
                    side: Some(SideFact::SumSynth(del, goal)),
                    children: vec![ds, darm],
                })
            }
            Expr::CaseTwo(s, x1, arm1, x2, arm2) => {
                path.push(0);
                let ds = self.synth(ctx, s, path)?;
                let (b1, del, b2) = match &ds.ty {
                    Type::Sum(b1, del, b2) => ((**b1).clone(), *del, (**b2).clone()),
                    other => {
                        return Err(self.err(
                            TypeErrorKind::ShapeMismatch {
                                expected: "a sum type",
                                found: other.clone(),
                            },
                            path,
                        ))
                    }
                };
                path.pop();
                // Every sum permits a two-armed elimination.
                debug_assert!(sum_synth(del, SumCon::Plus));
                path.push(1);
                let d1 = self.check(&ctx.extended(x1, b1), arm1, a, path)?;
                path.pop();
                path.push(2);
                let d2 = self.check(&ctx.extended(x2, b2), arm2, a, path)?;
                path.pop();
                Ok(BiDerivation {
                    rule: BiRule::ChkSumElimTwo,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: a.clone(),
                    side: Some(SideFact::SumSynth(del, SumCon::Plus)),
                    children: vec![ds, d1, d2],
                })
            }
            // Synthesis forms meet a check goal through subsumption.
            Expr::Var(_) | Expr::App(..) | Expr::Anno(..) => {
                let d = self.synth(ctx, e, path)?;
                let got = d.ty.clone();
                let (ok, side) = match self.mode {
                    Subsumption::Consistent => {
                        (dcons(&got, a), SideFact::Dcons(got.clone(), a.clone()))
                    }
                    Subsumption::Static => {
                        (subtype(&got, a), SideFact::Subtype(got.clone(), a.clone()))
                    }
                    Subsumption::Dynamic => (got == *a, SideFact::TypeEq(got.clone(), a.clone())),
                };
                if !ok {
                    let kind = match self.mode {
                        Subsumption::Consistent => TypeErrorKind::NoDcons {
                            from: got,
                            to: a.clone(),
                        },
                        _ => TypeErrorKind::NotASubsum {
                            sub: got,
                            sup: a.clone(),
                        },
                    };
                    return Err(self.err(kind, path));
                }
                Ok(BiDerivation {
                    rule: BiRule::ChkCSub,
                    ctx: ctx.clone(),
                    expr: e.clone(),
                    dir: Direction::Check,
                    ty: a.clone(),
                    side: Some(side),
                    children: vec![d],
                })
            }
        }
    }
}

/// `Γ ⊢ e ⇐ A` in the full calculus.
pub fn check(ctx: &Ctx, e: &Expr, a: &Type) -> Result<BiDerivation, TypeError> {
    Checker {
        mode: Subsumption::Consistent,
    }
    .check(ctx, e, a, &mut Vec::new())
}

/// `Γ ⊢ e ⇒ A` in the full calculus.
pub fn synth(ctx: &Ctx, e: &Expr) -> Result<BiDerivation, TypeError> {
    Checker {
        mode: Subsumption::Consistent,
    }
    .synth(ctx, e, &mut Vec::new())
}

fn require_fragment(
    ctx: &Ctx,
    e: &Expr,
    a: Option<&Type>,
    allowed: fn(SumCon) -> bool,
) -> Result<(), TypeError> {
    let mut cons: Vec<SumCon> = ctx.iter().flat_map(|(_, t)| t.sum_cons()).collect();
    cons.extend(e.sum_cons());
    if let Some(a) = a {
        cons.extend(a.sum_cons());
    }
    match cons.into_iter().find(|&c| !allowed(c)) {
        Some(con) => Err(TypeError {
            kind: TypeErrorKind::FragmentViolation { con },
            path: vec![],
        }),
        None => Ok(()),
    }
}

/// `Γ ⊢ e ⇐ A` in the static fragment (`+`, `+1`, `+2` only; subsumption
/// is subtyping).
pub fn check_static(ctx: &Ctx, e: &Expr, a: &Type) -> Result<BiDerivation, TypeError> {
    require_fragment(ctx, e, Some(a), SumCon::is_static)?;
    Checker {
        mode: Subsumption::Static,
    }
    .check(ctx, e, a, &mut Vec::new())
}

/// `Γ ⊢ e ⇒ A` in the static fragment.
pub fn synth_static(ctx: &Ctx, e: &Expr) -> Result<BiDerivation, TypeError> {
    require_fragment(ctx, e, None, SumCon::is_static)?;
    Checker {
        mode: Subsumption::Static,
    }
    .synth(ctx, e, &mut Vec::new())
}

/// `Γ ⊢ e ⇐ A` in the dynamic fragment (`+?` only; subsumption is type
/// equality).
pub fn check_dynamic(ctx: &Ctx, e: &Expr, a: &Type) -> Result<BiDerivation, TypeError> {
    require_fragment(ctx, e, Some(a), SumCon::is_dynamic)?;
    Checker {
        mode: Subsumption::Dynamic,
    }
    .check(ctx, e, a, &mut Vec::new())
}

/// `Γ ⊢ e ⇒ A` in the dynamic fragment.
pub fn synth_dynamic(ctx: &Ctx, e: &Expr) -> Result<BiDerivation, TypeError> {
    require_fragment(ctx, e, None, SumCon::is_dynamic)?;
    Checker {
        mode: Subsumption::Dynamic,
    }
    .synth(ctx, e, &mut Vec::new())
}

// ======================================================================
// Bidirectional -> type assignment
// ======================================================================

fn ta(
    rule: TARule,
    from: &BiDerivation,
    ty: Type,
    side: Option<SideFact>,
    children: Vec<TADerivation>,
) -> TADerivation {
    TADerivation {
        rule,
        ctx: from.ctx.clone(),
        expr: from.expr.clone(),
        ty,
        side,
        children,
    }
}

/// Wrap `inner` (typing `expr` at `inner.ty`) in an `SCSub` step up to
/// `ty`, unless the types already coincide.
fn csub_to(inner: TADerivation, ty: &Type) -> TADerivation {
    if inner.ty == *ty {
        return inner;
    }
    TADerivation {
        rule: TARule::SCSub,
        ctx: inner.ctx.clone(),
        expr: inner.expr.clone(),
        ty: ty.clone(),
        side: Some(SideFact::Dcons(inner.ty.clone(), ty.clone())),
        children: vec![inner],
    }
}

/// Translate a bidirectional derivation into a type-assignment derivation
/// of the same context, expression, and type.
///
/// Check-mode subsumption becomes `SCSub`; injections enter through their
/// discovered constructor and are subsumed up; case scrutinees are subsumed
/// to the exact constructor their elimination rule demands.
pub fn embed(d: &BiDerivation) -> TADerivation {
    match d.rule {
        BiRule::SynVar => ta(TARule::SVar, d, d.ty.clone(), None, vec![]),
        BiRule::SynAnno => ta(
            TARule::SAnno,
            d,
            d.ty.clone(),
            None,
            vec![embed(&d.children[0])],
        ),
        BiRule::SynFunElim => ta(
            TARule::SFunElim,
            d,
            d.ty.clone(),
            None,
            vec![embed(&d.children[0]), embed(&d.children[1])],
        ),
        BiRule::ChkCSub => {
            let inner = embed(&d.children[0]);
            let side = SideFact::Dcons(inner.ty.clone(), d.ty.clone());
            ta(TARule::SCSub, d, d.ty.clone(), Some(side), vec![inner])
        }
        BiRule::ChkUnitIntro => ta(TARule::SUnitIntro, d, Type::Unit, None, vec![]),
        BiRule::ChkFunIntro => ta(
            TARule::SFunIntro,
            d,
            d.ty.clone(),
            None,
            vec![embed(&d.children[0])],
        ),
        BiRule::ChkSumIntro => {
            let i = match &d.expr {
                Expr::Inj(i, _) => *i,
                other => unreachable!("ChkSumIntro over non-injection {other}"),
            };
            let (a1, a2) = match &d.ty {
                Type::Sum(a1, _, a2) => ((**a1).clone(), (**a2).clone()),
                other => unreachable!("ChkSumIntro at non-sum {other}"),
            };
            let intro_ty = Type::sum(a1, SumCon::plus_q(i), a2);
            let intro = ta(
                TARule::SSumIntro,
                d,
                intro_ty,
                None,
                vec![embed(&d.children[0])],
            );
            csub_to(intro, &d.ty)
        }
        BiRule::ChkSumElimOne => {
            let i = match &d.expr {
                Expr::CaseOne(_, i, _, _) => *i,
                other => unreachable!("ChkSumElimOne over non-case {other}"),
            };
            let ds = embed(&d.children[0]);
            let (b1, b2) = match &ds.ty {
                Type::Sum(b1, _, b2) => ((**b1).clone(), (**b2).clone()),
                other => unreachable!("case scrutinee at non-sum {other}"),
            };
            let exact = Type::sum(b1, SumCon::star(i), b2);
            let ds = csub_to(ds, &exact);
            ta(
                TARule::SSumElimOne,
                d,
                d.ty.clone(),
                None,
                vec![ds, embed(&d.children[1])],
            )
        }
        BiRule::ChkSumElimTwo => {
            let ds = embed(&d.children[0]);
            let (b1, b2) = match &ds.ty {
                Type::Sum(b1, _, b2) => ((**b1).clone(), (**b2).clone()),
                other => unreachable!("case scrutinee at non-sum {other}"),
            };
            let exact = Type::sum(b1, SumCon::Plus, b2);
            let ds = csub_to(ds, &exact);
            ta(
                TARule::SSumElimTwo,
                d,
                d.ty.clone(),
                None,
                vec![ds, embed(&d.children[1]), embed(&d.children[2])],
            )
        }
    }
}

// ======================================================================
// Type-assignment validation
// ======================================================================

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Check that `d` is a well-formed type-assignment derivation: every node
/// instantiates its rule's schema exactly.
pub fn validate_assignment(d: &TADerivation) -> Result<(), String> {
    validate_node(d)?;
    for c in &d.children {
        validate_assignment(c)?;
    }
    Ok(())
}

fn validate_node(d: &TADerivation) -> Result<(), String> {
    let arity = |n: usize| {
        expect(d.children.len() == n, || {
            format!(
                "{} expects {n} premise(s), found {}",
                d.rule.as_str(),
                d.children.len()
            )
        })
    };
    match d.rule {
        TARule::SVar => {
            arity(0)?;
            let x = match &d.expr {
                Expr::Var(x) => x,
                other => return Err(format!("SVar over non-variable {other}")),
            };
            expect(d.ctx.lookup(x) == Some(&d.ty), || {
                format!("SVar: '{x}' is not bound to {} in the context", d.ty)
            })
        }
        TARule::SCSub => {
            arity(1)?;
            let c = &d.children[0];
            expect(c.ctx == d.ctx && c.expr == d.expr, || {
                "SCSub premise must type the same expression in the same context".into()
            })?;
            expect(dcons(&c.ty, &d.ty), || {
                format!("SCSub: {} is not consistent with {}", c.ty, d.ty)
            })
        }
        TARule::SAnno => {
            arity(1)?;
            let (inner, a) = match &d.expr {
                Expr::Anno(inner, a) => (inner, a),
                other => return Err(format!("SAnno over non-annotation {other}")),
            };
            expect(*a == d.ty, || {
                format!("SAnno must conclude the annotated type {a}, got {}", d.ty)
            })?;
            let c = &d.children[0];
            expect(c.ctx == d.ctx && c.expr == **inner && c.ty == d.ty, || {
                "SAnno premise must type the annotated expression at the annotation".into()
            })
        }
        TARule::SUnitIntro => {
            arity(0)?;
            expect(d.expr == Expr::UnitVal && d.ty == Type::Unit, || {
                "SUnitIntro types () at Unit".into()
            })
        }
        TARule::SFunIntro => {
            arity(1)?;
            let (x, body) = match &d.expr {
                Expr::Lam(x, body) => (x, body),
                other => return Err(format!("SFunIntro over non-function {other}")),
            };
            let (dom, cod) = match &d.ty {
                Type::Arrow(dom, cod) => (dom, cod),
                other => return Err(format!("SFunIntro at non-function type {other}")),
            };
            let c = &d.children[0];
            expect(
                c.ctx == d.ctx.extended(x, (**dom).clone()) && c.expr == **body && c.ty == **cod,
                || "SFunIntro premise must type the body under the bound domain".into(),
            )
        }
        TARule::SFunElim => {
            arity(2)?;
            let (f, arg) = match &d.expr {
                Expr::App(f, arg) => (f, arg),
                other => return Err(format!("SFunElim over non-application {other}")),
            };
            let (df, da) = (&d.children[0], &d.children[1]);
            expect(
                df.ctx == d.ctx && da.ctx == d.ctx && df.expr == **f && da.expr == **arg,
                || "SFunElim premises must type the function and argument in place".into(),
            )?;
            match &df.ty {
                Type::Arrow(dom, cod) => expect(da.ty == **dom && d.ty == **cod, || {
                    format!("SFunElim: applying {} to {}", df.ty, da.ty)
                }),
                other => Err(format!("SFunElim head has non-function type {other}")),
            }
        }
        TARule::SSumIntro => {
            arity(1)?;
            let (i, payload) = match &d.expr {
                Expr::Inj(i, payload) => (*i, payload),
                other => return Err(format!("SSumIntro over non-injection {other}")),
            };
            let (a1, con, a2) = match &d.ty {
                Type::Sum(a1, con, a2) => (a1, *con, a2),
                other => return Err(format!("SSumIntro at non-sum type {other}")),
            };
            expect(con == SumCon::plus_q(i), || {
                format!("SSumIntro concludes exactly the discovered sum, got {con}")
            })?;
            let c = &d.children[0];
            expect(
                c.ctx == d.ctx && c.expr == **payload && c.ty == *pick(i, a1, a2),
                || "SSumIntro premise must type the payload at its component".into(),
            )
        }
        TARule::SSumElimOne => {
            arity(2)?;
            let (s, i, x, arm) = match &d.expr {
                Expr::CaseOne(s, i, x, arm) => (s, *i, x, arm),
                other => return Err(format!("SSumElimOne over non-case {other}")),
            };
            let (ds, darm) = (&d.children[0], &d.children[1]);
            expect(ds.ctx == d.ctx && ds.expr == **s, || {
                "SSumElimOne scrutinee premise must type the scrutinee in place".into()
            })?;
            let (b1, con, b2) = match &ds.ty {
                Type::Sum(b1, con, b2) => (b1, *con, b2),
                other => return Err(format!("SSumElimOne scrutinee at non-sum {other}")),
            };
            expect(con == SumCon::star(i), || {
                format!("SSumElimOne needs a one-armed-matchable scrutinee, got {con}")
            })?;
            expect(
                darm.ctx == d.ctx.extended(x, pick(i, b1, b2).clone())
                    && darm.expr == **arm
                    && darm.ty == d.ty,
                || "SSumElimOne arm premise must bind the component and give the result".into(),
            )
        }
        TARule::SSumElimTwo => {
            arity(3)?;
            let (s, x1, arm1, x2, arm2) = match &d.expr {
                Expr::CaseTwo(s, x1, arm1, x2, arm2) => (s, x1, arm1, x2, arm2),
                other => return Err(format!("SSumElimTwo over non-case {other}")),
            };
            let (ds, d1, d2) = (&d.children[0], &d.children[1], &d.children[2]);
            expect(ds.ctx == d.ctx && ds.expr == **s, || {
                "SSumElimTwo scrutinee premise must type the scrutinee in place".into()
            })?;
            let (b1, con, b2) = match &ds.ty {
                Type::Sum(b1, con, b2) => (b1, *con, b2),
                other => return Err(format!("SSumElimTwo scrutinee at non-sum {other}")),
            };
            expect(con == SumCon::Plus, || {
                format!("SSumElimTwo needs an ordinary sum scrutinee, got {con}")
            })?;
            expect(
                d1.ctx == d.ctx.extended(x1, (**b1).clone())
                    && d1.expr == **arm1
                    && d1.ty == d.ty
                    && d2.ctx == d.ctx.extended(x2, (**b2).clone())
                    && d2.expr == **arm2
                    && d2.ty == d.ty,
                || {
                    "SSumElimTwo arm premises must bind the components and agree on the result"
                        .into()
                },
            )
        }
    }
}

// ======================================================================
// Type assignment -> bidirectional, by inserting annotations
// ======================================================================

/// `e2` is `e1` with zero or more extra annotations.
pub fn eq_anno(e1: &Expr, e2: &Expr) -> bool {
    match (e1, e2) {
        (Expr::Anno(a, t1), Expr::Anno(b, t2)) if t1 == t2 && eq_anno(a, b) => true,
        // An annotation on the right may be an insertion.
        (_, Expr::Anno(b, _)) => eq_anno(e1, b),
        (Expr::UnitVal, Expr::UnitVal) => true,
        (Expr::Var(x), Expr::Var(y)) => x == y,
        (Expr::Lam(x, a), Expr::Lam(y, b)) => x == y && eq_anno(a, b),
        (Expr::App(f1, a1), Expr::App(f2, a2)) => eq_anno(f1, f2) && eq_anno(a1, a2),
        (Expr::Inj(i, a), Expr::Inj(j, b)) => i == j && eq_anno(a, b),
        (Expr::CaseOne(s1, i, x, m1), Expr::CaseOne(s2, j, y, m2)) => {
            i == j && x == y && eq_anno(s1, s2) && eq_anno(m1, m2)
        }
        (Expr::CaseTwo(s1, x1, m1, y1, n1), Expr::CaseTwo(s2, x2, m2, y2, n2)) => {
            x1 == x2 && y1 == y2 && eq_anno(s1, s2) && eq_anno(m1, m2) && eq_anno(n1, n2)
        }
        _ => false,
    }
}

fn bi(
    rule: BiRule,
    ctx: &Ctx,
    expr: Expr,
    dir: Direction,
    ty: Type,
    side: Option<SideFact>,
    children: Vec<BiDerivation>,
) -> BiDerivation {
    BiDerivation {
        rule,
        ctx: ctx.clone(),
        expr,
        dir,
        ty,
        side,
        children,
    }
}

/// Turn a synthesis derivation into a check derivation for the same type
/// by a reflexive consistent-subsumption step.
fn chk_of_syn(d: BiDerivation) -> BiDerivation {
    BiDerivation {
        rule: BiRule::ChkCSub,
        ctx: d.ctx.clone(),
        expr: d.expr.clone(),
        dir: Direction::Check,
        ty: d.ty.clone(),
        side: Some(SideFact::Dcons(d.ty.clone(), d.ty.clone())),
        children: vec![d],
    }
}

/// Wrap a check derivation `e ⇐ A` into the synthesis `( e : A ) ⇒ A`.
fn anno_of_chk(d: BiDerivation) -> (Expr, BiDerivation) {
    let e = Expr::anno(d.expr.clone(), d.ty.clone());
    let syn = BiDerivation {
        rule: BiRule::SynAnno,
        ctx: d.ctx.clone(),
        expr: e.clone(),
        dir: Direction::Synth,
        ty: d.ty.clone(),
        side: None,
        children: vec![d],
    };
    (e, syn)
}

/// Produce an annotated variant of the subject of `d` that *synthesizes*
/// exactly `d.ty`, together with its bidirectional derivation.
///
/// The result adds annotations but changes nothing else
/// ([`eq_anno`]`(d.expr, result)` holds), and the algorithmic checker
/// accepts it: `synth(d.ctx, result) == d.ty`.
///
/// The input must be a valid assignment derivation
/// (see [`validate_assignment`]); this function panics on malformed input.
pub fn annotate(d: &TADerivation) -> (Expr, BiDerivation) {
    match d.rule {
        TARule::SVar => (
            d.expr.clone(),
            bi(
                BiRule::SynVar,
                &d.ctx,
                d.expr.clone(),
                Direction::Synth,
                d.ty.clone(),
                None,
                vec![],
            ),
        ),
        // Both re-annotate the rebuilt subject with the concluded type; for
        // SCSub the inner type differs and consistency bridges the gap.
        TARule::SCSub | TARule::SAnno => {
            let (e2, inner) = annotate(&d.children[0]);
            let side = SideFact::Dcons(inner.ty.clone(), d.ty.clone());
            let chk = bi(
                BiRule::ChkCSub,
                &d.ctx,
                e2,
                Direction::Check,
                d.ty.clone(),
                Some(side),
                vec![inner],
            );
            anno_of_chk(chk)
        }
        TARule::SUnitIntro => {
            let chk = bi(
                BiRule::ChkUnitIntro,
                &d.ctx,
                Expr::UnitVal,
                Direction::Check,
                Type::Unit,
                None,
                vec![],
            );
            anno_of_chk(chk)
        }
        TARule::SFunIntro => {
            let x = match &d.expr {
                Expr::Lam(x, _) => x.clone(),
                other => unreachable!("SFunIntro over {other}"),
            };
            let (b2, db) = annotate(&d.children[0]);
            let lam = Expr::lam(x, b2);
            let chk = bi(
                BiRule::ChkFunIntro,
                &d.ctx,
                lam,
                Direction::Check,
                d.ty.clone(),
                None,
                vec![chk_of_syn(db)],
            );
            anno_of_chk(chk)
        }
        TARule::SFunElim => {
            let (f2, df) = annotate(&d.children[0]);
            let (a2, da) = annotate(&d.children[1]);
            let app = Expr::app(f2, a2);
            let syn = bi(
                BiRule::SynFunElim,
                &d.ctx,
                app.clone(),
                Direction::Synth,
                d.ty.clone(),
                None,
                vec![df, chk_of_syn(da)],
            );
            (app, syn)
        }
        TARule::SSumIntro => {
            let i = match &d.expr {
                Expr::Inj(i, _) => *i,
                other => unreachable!("SSumIntro over {other}"),
            };
            let (p2, dp) = annotate(&d.children[0]);
            let inj = Expr::inj(i, p2);
            let tag = SumCon::plus_q(i);
            let chk = bi(
                BiRule::ChkSumIntro,
                &d.ctx,
                inj,
                Direction::Check,
                d.ty.clone(),
                Some(SideFact::Subsum(tag, tag)),
                vec![chk_of_syn(dp)],
            );
            anno_of_chk(chk)
        }
        TARule::SSumElimOne => {
            let (i, x) = match &d.expr {
                Expr::CaseOne(_, i, x, _) => (*i, x.clone()),
                other => unreachable!("SSumElimOne over {other}"),
            };
            let (s2, ds) = annotate(&d.children[0]);
            let (m2, dm) = annotate(&d.children[1]);
            let goal = SumCon::star(i);
            let case = Expr::case_one(s2, i, x, m2);
            let chk = bi(
                BiRule::ChkSumElimOne,
                &d.ctx,
                case,
                Direction::Check,
                d.ty.clone(),
                Some(SideFact::SumSynth(goal, goal)),
                vec![ds, chk_of_syn(dm)],
            );
            anno_of_chk(chk)
        }
        TARule::SSumElimTwo => {
            let (x1, x2) = match &d.expr {
                Expr::CaseTwo(_, x1, _, x2, _) => (x1.clone(), x2.clone()),
                other => unreachable!("SSumElimTwo over {other}"),
            };
            let (s2, ds) = annotate(&d.children[0]);
            let (m2, d1) = annotate(&d.children[1]);
            let (n2, d2) = annotate(&d.children[2]);
            let case = Expr::case_two(s2, x1, m2, x2, n2);
            let chk = bi(
                BiRule::ChkSumElimTwo,
                &d.ctx,
                case,
                Direction::Check,
                d.ty.clone(),
                Some(SideFact::SumSynth(SumCon::Plus, SumCon::Plus)),
                vec![ds, chk_of_syn(d1), chk_of_syn(d2)],
            );
            anno_of_chk(chk)
        }
    }
}
