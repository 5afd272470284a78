//! Pretty-printers for types, expressions, target types, and target terms.
//!
//! Output re-parses to the same tree (up to alpha-equivalence it is the
//! identical tree): parentheses are inserted exactly where the grammar
//! needs them, plus around `fn`/`case` in scrutinee position for
//! readability. The first arm of a two-armed `case` is parenthesized when
//! it is itself a `fn` or `case`, since those forms could otherwise
//! swallow the `| inj2 ...` arm on re-parse.

use super::ast::{Expr, TargetTerm, TargetType, Type};

// Precedence levels, loosest to tightest.
const TOP: u8 = 0; // anywhere a full expression may appear
const FUN: u8 = 1; // function/scrutinee position: fn and case need parens
const ATOM: u8 = 2; // argument/payload position: applications also need parens

fn type_prec(t: &Type) -> u8 {
    match t {
        Type::Arrow(..) => TOP,
        Type::Sum(..) => FUN,
        Type::Unit => ATOM,
    }
}

fn fmt_type(t: &Type, prec: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let parens = type_prec(t) < prec;
    if parens {
        f.write_str("(")?;
    }
    match t {
        Type::Unit => f.write_str("Unit")?,
        Type::Sum(a, c, b) => {
            // Right-associative: the left operand needs parens if it is a sum.
            fmt_type(a, ATOM, f)?;
            write!(f, " {c} ")?;
            fmt_type(b, FUN, f)?;
        }
        Type::Arrow(a, b) => {
            fmt_type(a, FUN, f)?;
            f.write_str(" -> ")?;
            fmt_type(b, TOP, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_type(self, TOP, f)
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..) | Expr::CaseOne(..) | Expr::CaseTwo(..) => TOP,
        Expr::App(..) => FUN,
        // Annotations print their own parentheses, so they act as atoms.
        Expr::UnitVal | Expr::Var(_) | Expr::Inj(..) | Expr::Anno(..) => ATOM,
    }
}

/// Would re-parsing `e` in first-arm position swallow a following `|`?
fn arm_needs_sealing(e: &Expr) -> bool {
    matches!(e, Expr::Lam(..) | Expr::CaseOne(..) | Expr::CaseTwo(..))
}

fn fmt_expr(e: &Expr, prec: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let parens = expr_prec(e) < prec;
    if parens {
        f.write_str("(")?;
    }
    match e {
        Expr::UnitVal => f.write_str("()")?,
        Expr::Var(x) => f.write_str(x)?,
        Expr::Lam(x, body) => {
            write!(f, "fn {x} => ")?;
            fmt_expr(body, TOP, f)?;
        }
        Expr::App(fun, arg) => {
            fmt_expr(fun, FUN, f)?;
            f.write_str(" ")?;
            fmt_expr(arg, ATOM, f)?;
        }
        Expr::Inj(i, payload) => {
            write!(f, "inj{i} ")?;
            fmt_expr(payload, ATOM, f)?;
        }
        Expr::Anno(inner, ty) => {
            f.write_str("(")?;
            fmt_expr(inner, TOP, f)?;
            write!(f, " : {ty})")?;
        }
        Expr::CaseOne(scrut, i, x, arm) => {
            f.write_str("case ")?;
            fmt_expr(scrut, FUN, f)?;
            write!(f, " of inj{i} {x} => ")?;
            fmt_expr(arm, TOP, f)?;
        }
        Expr::CaseTwo(scrut, x1, arm1, x2, arm2) => {
            f.write_str("case ")?;
            fmt_expr(scrut, FUN, f)?;
            write!(f, " of inj1 {x1} => ")?;
            fmt_expr(arm1, if arm_needs_sealing(arm1) { ATOM } else { TOP }, f)?;
            write!(f, " | inj2 {x2} => ")?;
            fmt_expr(arm2, TOP, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_expr(self, TOP, f)
    }
}

fn ttype_prec(t: &TargetType) -> u8 {
    match t {
        TargetType::TArrow(..) => TOP,
        TargetType::TSum(..) => FUN,
        TargetType::TUnit | TargetType::Bottom => ATOM,
    }
}

fn fmt_ttype(t: &TargetType, prec: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let parens = ttype_prec(t) < prec;
    if parens {
        f.write_str("(")?;
    }
    match t {
        TargetType::TUnit => f.write_str("Unit")?,
        // No surface syntax; shows up only in internal diagnostics.
        TargetType::Bottom => f.write_str("_|_")?,
        TargetType::TSum(a, c, b) => {
            fmt_ttype(a, ATOM, f)?;
            write!(f, " {c} ")?;
            fmt_ttype(b, FUN, f)?;
        }
        TargetType::TArrow(a, b) => {
            fmt_ttype(a, FUN, f)?;
            f.write_str(" -> ")?;
            fmt_ttype(b, TOP, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl std::fmt::Display for TargetType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_ttype(self, TOP, f)
    }
}

fn tterm_prec(m: &TargetTerm) -> u8 {
    match m {
        TargetTerm::TLam(..) | TargetTerm::TCaseOne(..) | TargetTerm::TCaseTwo(..) => TOP,
        TargetTerm::TApp(..) => FUN,
        TargetTerm::TUnitVal
        | TargetTerm::TVar(_)
        | TargetTerm::TInj(..)
        | TargetTerm::Cast(..)
        | TargetTerm::Matchfail => ATOM,
    }
}

fn tterm_arm_needs_sealing(m: &TargetTerm) -> bool {
    matches!(
        m,
        TargetTerm::TLam(..) | TargetTerm::TCaseOne(..) | TargetTerm::TCaseTwo(..)
    )
}

fn fmt_tterm(m: &TargetTerm, prec: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let parens = tterm_prec(m) < prec;
    if parens {
        f.write_str("(")?;
    }
    match m {
        TargetTerm::TUnitVal => f.write_str("()")?,
        TargetTerm::TVar(x) => f.write_str(x)?,
        TargetTerm::Matchfail => f.write_str("matchfail")?,
        TargetTerm::TLam(x, dom, body) => {
            write!(f, "fn {x} : {dom} => ")?;
            fmt_tterm(body, TOP, f)?;
        }
        TargetTerm::TApp(fun, arg) => {
            fmt_tterm(fun, FUN, f)?;
            f.write_str(" ")?;
            fmt_tterm(arg, ATOM, f)?;
        }
        TargetTerm::TInj(i, payload) => {
            write!(f, "inj{i} ")?;
            fmt_tterm(payload, ATOM, f)?;
        }
        TargetTerm::Cast(from, to, inner) => {
            write!(f, "<{from} => {to}>(")?;
            fmt_tterm(inner, TOP, f)?;
            f.write_str(")")?;
        }
        TargetTerm::TCaseOne(scrut, i, x, arm) => {
            f.write_str("case ")?;
            fmt_tterm(scrut, FUN, f)?;
            write!(f, " of inj{i} {x} => ")?;
            fmt_tterm(arm, TOP, f)?;
        }
        TargetTerm::TCaseTwo(scrut, x1, arm1, x2, arm2) => {
            f.write_str("case ")?;
            fmt_tterm(scrut, FUN, f)?;
            write!(f, " of inj1 {x1} => ")?;
            fmt_tterm(
                arm1,
                if tterm_arm_needs_sealing(arm1) {
                    ATOM
                } else {
                    TOP
                },
                f,
            )?;
            write!(f, " | inj2 {x2} => ")?;
            fmt_tterm(arm2, TOP, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl std::fmt::Display for TargetTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_tterm(self, TOP, f)
    }
}
