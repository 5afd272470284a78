//! Recursive-descent parsers for source expressions, source types, target
//! terms, and target types.
//!
//! Grammar notes:
//! - Sums bind tighter than `->`; both are right-associative.
//! - Application is a sequence of atoms, left-associative.
//! - `fn` bodies and `case` arms extend as far right as possible; an
//!   unparenthesized `|` therefore belongs to the nearest enclosing `case`.
//! - `injK` takes an atom: `inj1 f x` is `(inj1 f) x`.
//! - Annotation is `(e : A)`; a `(` opens unit, grouping, or annotation.
//! - Target casts are atoms: `<+1 => +>(M)`. Target lambdas carry a domain:
//!   `fn x : T => M`.

use super::ast::{Expr, Index, SumCon, TargetSum, TargetTerm, TargetType, Type};
use super::lexer::{lex, Lexed, Token};

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "parse error at {}:{}: expected {}, found {}",
            self.line,
            self.col,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

/// Half-open character region of the source, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span {
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

/// Source positions mirroring an [`Expr`]: one node per expression node,
/// children in the same order as [`Expr::children`]. Lets diagnostics map a
/// path of child indices back to a span.
#[derive(Debug, Clone)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    /// The node reached by following `path` (child indices from the root).
    pub fn at_path(&self, path: &[usize]) -> Option<&SpanTree> {
        let mut node = self;
        for &i in path {
            node = node.children.get(i)?;
        }
        Some(node)
    }
}

struct P {
    toks: Vec<Lexed>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl P {
    fn new(src: &str) -> Result<P, ParseError> {
        let toks = lex(src)?;
        let (end_line, end_col) = toks
            .last()
            .map(|l| (l.line, l.col + l.len))
            .unwrap_or((1, 1));
        Ok(P {
            toks,
            pos: 0,
            end_line,
            end_col,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn bump(&mut self) -> &Lexed {
        let l = &self.toks[self.pos];
        self.pos += 1;
        l
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|l| (l.line, l.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn span_here(&self) -> Span {
        let l = &self.toks[self.pos];
        Span {
            start_line: l.line,
            start_col: l.col,
            end_line: l.line,
            end_col: l.col + l.len,
        }
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().map_or("end of input".into(), |t| t.describe()),
        }
    }

    fn expect(&mut self, tok: Token, desc: &str) -> Result<Span, ParseError> {
        if self.peek() == Some(&tok) {
            let sp = self.span_here();
            self.bump();
            Ok(sp)
        } else {
            Err(self.err(&[desc]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Some(Token::Ident(_)) => {
                let sp = self.span_here();
                if let Token::Ident(x) = self.bump().tok.clone() {
                    Ok((x, sp))
                } else {
                    unreachable!()
                }
            }
            _ => Err(self.err(&["an identifier"])),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(&["end of input"]))
        }
    }

    // ------------------------------------------------------------------
    // Source expressions
    // ------------------------------------------------------------------

    fn expr(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        match self.peek() {
            Some(Token::Fn) => {
                let start = self.span_here();
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Token::FatArrow, "'=>'")?;
                let (body, bt) = self.expr()?;
                let span = start.join(bt.span);
                Ok((
                    Expr::lam(x, body),
                    SpanTree {
                        span,
                        children: vec![bt],
                    },
                ))
            }
            Some(Token::Case) => {
                let start = self.span_here();
                self.bump();
                let (scrut, st) = self.expr()?;
                self.expect(Token::Of, "'of'")?;
                let i = match self.peek() {
                    Some(Token::Inj(i)) => *i,
                    _ => return Err(self.err(&["'inj1'", "'inj2'"])),
                };
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Token::FatArrow, "'=>'")?;
                let (arm1, a1t) = self.expr()?;
                if i == Index::One && self.peek() == Some(&Token::Bar) {
                    self.bump();
                    self.expect(Token::Inj(Index::Two), "'inj2'")?;
                    let (x2, _) = self.ident()?;
                    self.expect(Token::FatArrow, "'=>'")?;
                    let (arm2, a2t) = self.expr()?;
                    let span = start.join(a2t.span);
                    Ok((
                        Expr::case_two(scrut, x, arm1, x2, arm2),
                        SpanTree {
                            span,
                            children: vec![st, a1t, a2t],
                        },
                    ))
                } else {
                    let span = start.join(a1t.span);
                    Ok((
                        Expr::case_one(scrut, i, x, arm1),
                        SpanTree {
                            span,
                            children: vec![st, a1t],
                        },
                    ))
                }
            }
            _ => self.app(),
        }
    }

    fn app(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        let (mut e, mut t) = self.atom()?;
        while self.starts_atom() {
            let (arg, at) = self.atom()?;
            let span = t.span.join(at.span);
            e = Expr::app(e, arg);
            t = SpanTree {
                span,
                children: vec![t, at],
            };
        }
        Ok((e, t))
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::LParen | Token::Ident(_) | Token::Inj(_))
        )
    }

    fn atom(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        match self.peek() {
            Some(Token::LParen) => {
                let start = self.span_here();
                self.bump();
                if self.peek() == Some(&Token::RParen) {
                    let end = self.span_here();
                    self.bump();
                    return Ok((
                        Expr::UnitVal,
                        SpanTree {
                            span: start.join(end),
                            children: vec![],
                        },
                    ));
                }
                let (e, t) = self.expr()?;
                match self.peek() {
                    Some(Token::Colon) => {
                        self.bump();
                        let a = self.ty()?;
                        let end = self.expect(Token::RParen, "')'")?;
                        Ok((
                            Expr::anno(e, a),
                            SpanTree {
                                span: start.join(end),
                                children: vec![t],
                            },
                        ))
                    }
                    Some(Token::RParen) => {
                        let end = self.span_here();
                        self.bump();
                        Ok((
                            e,
                            SpanTree {
                                span: start.join(end),
                                ..t
                            },
                        ))
                    }
                    _ => Err(self.err(&["':'", "')'"])),
                }
            }
            Some(Token::Ident(_)) => {
                let (x, sp) = self.ident()?;
                Ok((
                    Expr::var(x),
                    SpanTree {
                        span: sp,
                        children: vec![],
                    },
                ))
            }
            Some(Token::Inj(i)) => {
                let i = *i;
                let start = self.span_here();
                self.bump();
                let (payload, pt) = self.atom()?;
                let span = start.join(pt.span);
                Ok((
                    Expr::inj(i, payload),
                    SpanTree {
                        span,
                        children: vec![pt],
                    },
                ))
            }
            _ => Err(self.err(&["an expression"])),
        }
    }

    // ------------------------------------------------------------------
    // Source types
    // ------------------------------------------------------------------

    fn ty(&mut self) -> Result<Type, ParseError> {
        let a = self.sum_ty()?;
        if self.peek() == Some(&Token::Arrow) {
            self.bump();
            let b = self.ty()?;
            Ok(Type::arrow(a, b))
        } else {
            Ok(a)
        }
    }

    fn sum_ty(&mut self) -> Result<Type, ParseError> {
        let a = self.atom_ty()?;
        if let Some(Token::Sum(c)) = self.peek() {
            let c = *c;
            self.bump();
            let b = self.sum_ty()?;
            Ok(Type::sum(a, c, b))
        } else {
            Ok(a)
        }
    }

    fn atom_ty(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Some(Token::Ident(x)) if x == "Unit" => {
                self.bump();
                Ok(Type::Unit)
            }
            Some(Token::LParen) => {
                self.bump();
                let t = self.ty()?;
                self.expect(Token::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(self.err(&["a type"])),
        }
    }

    // ------------------------------------------------------------------
    // Target terms and types
    // ------------------------------------------------------------------

    fn tterm(&mut self) -> Result<TargetTerm, ParseError> {
        match self.peek() {
            Some(Token::Fn) => {
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Token::Colon, "':'")?;
                let dom = self.tty()?;
                self.expect(Token::FatArrow, "'=>'")?;
                let body = self.tterm()?;
                Ok(TargetTerm::lam(x, dom, body))
            }
            Some(Token::Case) => {
                self.bump();
                let scrut = self.tterm()?;
                self.expect(Token::Of, "'of'")?;
                let i = match self.peek() {
                    Some(Token::Inj(i)) => *i,
                    _ => return Err(self.err(&["'inj1'", "'inj2'"])),
                };
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Token::FatArrow, "'=>'")?;
                let arm1 = self.tterm()?;
                if i == Index::One && self.peek() == Some(&Token::Bar) {
                    self.bump();
                    self.expect(Token::Inj(Index::Two), "'inj2'")?;
                    let (x2, _) = self.ident()?;
                    self.expect(Token::FatArrow, "'=>'")?;
                    let arm2 = self.tterm()?;
                    Ok(TargetTerm::case_two(scrut, x, arm1, x2, arm2))
                } else {
                    Ok(TargetTerm::case_one(scrut, i, x, arm1))
                }
            }
            _ => self.tapp(),
        }
    }

    fn tapp(&mut self) -> Result<TargetTerm, ParseError> {
        let mut m = self.tatom()?;
        while self.starts_tatom() {
            let arg = self.tatom()?;
            m = TargetTerm::app(m, arg);
        }
        Ok(m)
    }

    fn starts_tatom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::LParen | Token::Ident(_) | Token::Inj(_) | Token::Matchfail | Token::Lt)
        )
    }

    fn tatom(&mut self) -> Result<TargetTerm, ParseError> {
        match self.peek() {
            Some(Token::LParen) => {
                self.bump();
                if self.peek() == Some(&Token::RParen) {
                    self.bump();
                    return Ok(TargetTerm::TUnitVal);
                }
                let m = self.tterm()?;
                self.expect(Token::RParen, "')'")?;
                Ok(m)
            }
            Some(Token::Ident(_)) => {
                let (x, _) = self.ident()?;
                Ok(TargetTerm::var(x))
            }
            Some(Token::Matchfail) => {
                self.bump();
                Ok(TargetTerm::Matchfail)
            }
            Some(Token::Inj(i)) => {
                let i = *i;
                self.bump();
                let payload = self.tatom()?;
                Ok(TargetTerm::inj(i, payload))
            }
            Some(Token::Lt) => {
                self.bump();
                let from = self.tsum()?;
                self.expect(Token::FatArrow, "'=>'")?;
                let to = self.tsum()?;
                self.expect(Token::Gt, "'>'")?;
                self.expect(Token::LParen, "'('")?;
                let m = self.tterm()?;
                self.expect(Token::RParen, "')'")?;
                Ok(TargetTerm::cast(from, to, m))
            }
            _ => Err(self.err(&["a term"])),
        }
    }

    fn tsum(&mut self) -> Result<TargetSum, ParseError> {
        match self.peek() {
            Some(Token::Sum(SumCon::Plus)) => {
                self.bump();
                Ok(TargetSum::TPlus)
            }
            Some(Token::Sum(SumCon::Plus1)) => {
                self.bump();
                Ok(TargetSum::TPlus1)
            }
            Some(Token::Sum(SumCon::Plus2)) => {
                self.bump();
                Ok(TargetSum::TPlus2)
            }
            _ => Err(self.err(&["'+'", "'+1'", "'+2'"])),
        }
    }

    fn tty(&mut self) -> Result<TargetType, ParseError> {
        let a = self.tsum_ty()?;
        if self.peek() == Some(&Token::Arrow) {
            self.bump();
            let b = self.tty()?;
            Ok(TargetType::arrow(a, b))
        } else {
            Ok(a)
        }
    }

    fn tsum_ty(&mut self) -> Result<TargetType, ParseError> {
        let a = self.tatom_ty()?;
        if matches!(self.peek(), Some(Token::Sum(_))) {
            let c = self.tsum()?;
            let b = self.tsum_ty()?;
            Ok(TargetType::sum(a, c, b))
        } else {
            Ok(a)
        }
    }

    fn tatom_ty(&mut self) -> Result<TargetType, ParseError> {
        match self.peek() {
            Some(Token::Ident(x)) if x == "Unit" => {
                self.bump();
                Ok(TargetType::TUnit)
            }
            Some(Token::LParen) => {
                self.bump();
                let t = self.tty()?;
                self.expect(Token::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(self.err(&["a type"])),
        }
    }
}

/// Parse a source expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    Ok(parse_expr_with_spans(src)?.0)
}

/// Parse a source expression together with its span tree.
pub fn parse_expr_with_spans(src: &str) -> Result<(Expr, SpanTree), ParseError> {
    let mut p = P::new(src)?;
    let (e, t) = p.expr()?;
    p.expect_end()?;
    Ok((e, t))
}

/// Parse a source type.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = P::new(src)?;
    let t = p.ty()?;
    p.expect_end()?;
    Ok(t)
}

/// Parse a target term.
pub fn parse_target(src: &str) -> Result<TargetTerm, ParseError> {
    let mut p = P::new(src)?;
    let m = p.tterm()?;
    p.expect_end()?;
    Ok(m)
}

/// Parse a target type. `Bottom` has no syntax; only surface target types
/// can be written.
pub fn parse_target_type(src: &str) -> Result<TargetType, ParseError> {
    let mut p = P::new(src)?;
    let t = p.tty()?;
    p.expect_end()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{Expr, Index, SumCon, Type};

    #[test]
    fn application_is_left_associative() {
        let e = parse_expr("f x y").unwrap();
        assert_eq!(
            e,
            Expr::app(Expr::app(Expr::var("f"), Expr::var("x")), Expr::var("y"))
        );
    }

    #[test]
    fn inj_takes_one_atom() {
        let e = parse_expr("inj1 f x").unwrap();
        assert_eq!(
            e,
            Expr::app(Expr::inj(Index::One, Expr::var("f")), Expr::var("x"))
        );
    }

    #[test]
    fn annotation_and_unit() {
        let e = parse_expr("(() : Unit +? Unit)").unwrap();
        assert_eq!(
            e,
            Expr::anno(
                Expr::UnitVal,
                Type::sum(Type::Unit, SumCon::PlusQ, Type::Unit)
            )
        );
    }

    #[test]
    fn sums_bind_tighter_than_arrow_and_right_associate() {
        let t = parse_type("Unit + Unit -> Unit + Unit + Unit").unwrap();
        assert_eq!(
            t,
            Type::arrow(
                Type::sum(Type::Unit, SumCon::Plus, Type::Unit),
                Type::sum(
                    Type::Unit,
                    SumCon::Plus,
                    Type::sum(Type::Unit, SumCon::Plus, Type::Unit)
                )
            )
        );
    }

    #[test]
    fn bar_attaches_to_nearest_case() {
        let e = parse_expr("case s of inj1 x => case t of inj1 y => y | inj2 z => z").unwrap();
        match e {
            Expr::CaseOne(_, Index::One, _, arm) => {
                assert!(matches!(*arm, Expr::CaseTwo(..)));
            }
            other => panic!("expected one-armed outer case, got {other:?}"),
        }
    }

    #[test]
    fn one_armed_case_on_either_side() {
        assert!(matches!(
            parse_expr("case s of inj2 x => x").unwrap(),
            Expr::CaseOne(_, Index::Two, _, _)
        ));
    }

    #[test]
    fn lam_body_extends_maximally() {
        let e = parse_expr("fn x => f x").unwrap();
        assert_eq!(e, Expr::lam("x", Expr::app(Expr::var("f"), Expr::var("x"))));
    }

    #[test]
    fn target_cast_and_matchfail() {
        let m = parse_target("<+1 => +>(inj1 ())").unwrap();
        assert_eq!(
            m,
            TargetTerm::cast(
                TargetSum::TPlus1,
                TargetSum::TPlus,
                TargetTerm::inj(Index::One, TargetTerm::TUnitVal)
            )
        );
        assert_eq!(parse_target("matchfail").unwrap(), TargetTerm::Matchfail);
    }

    #[test]
    fn target_lam_carries_domain() {
        let m = parse_target("fn x : Unit +1 Unit => x").unwrap();
        assert_eq!(
            m,
            TargetTerm::lam(
                "x",
                TargetType::sum(TargetType::TUnit, TargetSum::TPlus1, TargetType::TUnit),
                TargetTerm::var("x")
            )
        );
    }

    #[test]
    fn target_types_reject_gradual_sums() {
        assert!(parse_target("fn x : Unit +? Unit => x").is_err());
    }

    #[test]
    fn error_positions_point_at_the_problem() {
        let err = parse_expr("fn x => (y :)").unwrap_err();
        assert_eq!((err.line, err.col), (1, 13));
        let err = parse_expr("case s of inj2 x => x | inj2 y => y").unwrap_err();
        // A one-armed inj2 case cannot take a second arm.
        assert_eq!((err.line, err.col), (1, 23));
    }

    #[test]
    fn span_tree_follows_paths() {
        let (_, spans) = parse_expr_with_spans("fn x => f (g x)").unwrap();
        // Path to `g x`: lam body [0], then app arg [1].
        let node = spans.at_path(&[0, 1]).unwrap();
        assert_eq!(node.span.start_col, 11);
        assert_eq!(node.span.end_col, 16);
    }
}
