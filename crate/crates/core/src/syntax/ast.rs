//! Abstract syntax for the source language (types `A`, expressions `e`,
//! contexts `Γ`) and the cast-calculus target (types `T`, terms `M`,
//! coercion contexts `C`, evaluation contexts `E`).
//!
//! Everything here is an immutable tree. Binders are plain identifiers;
//! alpha-equivalence and capture-avoiding substitution live alongside the
//! types they operate on.

use std::collections::{BTreeMap, BTreeSet};

/// Injection index: 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    One,
    Two,
}

impl Index {
    pub const ALL: [Index; 2] = [Index::One, Index::Two];

    pub fn as_u8(self) -> u8 {
        match self {
            Index::One => 1,
            Index::Two => 2,
        }
    }

    /// The other index (1 <-> 2).
    pub fn flip(self) -> Index {
        match self {
            Index::One => Index::Two,
            Index::Two => Index::One,
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// The eight source sum constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SumCon {
    /// `+` — both injections possible, two-armed elimination.
    Plus,
    /// `+1` — statically known to be a left injection.
    Plus1,
    /// `+2` — statically known to be a right injection.
    Plus2,
    /// `+?` — dynamic sum; nothing known statically.
    PlusQ,
    /// `+?1` — dynamically discovered left injection.
    PlusQ1,
    /// `+?2` — dynamically discovered right injection.
    PlusQ2,
    /// `+*1` — one-armed-matchable on the left.
    PlusStar1,
    /// `+*2` — one-armed-matchable on the right.
    PlusStar2,
}

impl SumCon {
    pub const ALL: [SumCon; 8] = [
        SumCon::Plus,
        SumCon::Plus1,
        SumCon::Plus2,
        SumCon::PlusQ,
        SumCon::PlusQ1,
        SumCon::PlusQ2,
        SumCon::PlusStar1,
        SumCon::PlusStar2,
    ];

    /// Stable position in the 8x8 relation tables.
    pub fn code(self) -> usize {
        match self {
            SumCon::Plus => 0,
            SumCon::Plus1 => 1,
            SumCon::Plus2 => 2,
            SumCon::PlusQ => 3,
            SumCon::PlusQ1 => 4,
            SumCon::PlusQ2 => 5,
            SumCon::PlusStar1 => 6,
            SumCon::PlusStar2 => 7,
        }
    }

    pub fn plus(i: Index) -> SumCon {
        match i {
            Index::One => SumCon::Plus1,
            Index::Two => SumCon::Plus2,
        }
    }

    pub fn plus_q(i: Index) -> SumCon {
        match i {
            Index::One => SumCon::PlusQ1,
            Index::Two => SumCon::PlusQ2,
        }
    }

    pub fn star(i: Index) -> SumCon {
        match i {
            Index::One => SumCon::PlusStar1,
            Index::Two => SumCon::PlusStar2,
        }
    }

    /// True for the static sums `+`, `+1`, `+2`.
    pub fn is_static(self) -> bool {
        matches!(self, SumCon::Plus | SumCon::Plus1 | SumCon::Plus2)
    }

    /// True for the dynamic sum `+?`.
    pub fn is_dynamic(self) -> bool {
        self == SumCon::PlusQ
    }

    pub fn token(self) -> &'static str {
        match self {
            SumCon::Plus => "+",
            SumCon::Plus1 => "+1",
            SumCon::Plus2 => "+2",
            SumCon::PlusQ => "+?",
            SumCon::PlusQ1 => "+?1",
            SumCon::PlusQ2 => "+?2",
            SumCon::PlusStar1 => "+*1",
            SumCon::PlusStar2 => "+*2",
        }
    }
}

impl std::fmt::Display for SumCon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Source types `A ::= Unit | A1 δ A2 | A1 -> A2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Unit,
    Sum(Box<Type>, SumCon, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn sum(left: Type, con: SumCon, right: Type) -> Type {
        Type::Sum(Box::new(left), con, Box::new(right))
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }

    /// Nesting depth; `Unit` is 0.
    pub fn depth(&self) -> usize {
        match self {
            Type::Unit => 0,
            Type::Sum(a, _, b) | Type::Arrow(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Every sum constructor in the type, outermost first.
    pub fn sum_cons(&self) -> Vec<SumCon> {
        let mut out = Vec::new();
        self.visit_cons(&mut |c| out.push(c));
        out
    }

    fn visit_cons(&self, f: &mut impl FnMut(SumCon)) {
        match self {
            Type::Unit => {}
            Type::Sum(a, c, b) => {
                f(*c);
                a.visit_cons(f);
                b.visit_cons(f);
            }
            Type::Arrow(a, b) => {
                a.visit_cons(f);
                b.visit_cons(f);
            }
        }
    }

    /// All sums drawn from `{+, +1, +2}`.
    pub fn is_static(&self) -> bool {
        self.sum_cons().iter().all(|c| c.is_static())
    }

    /// All sums drawn from `{+?}`.
    pub fn is_dynamic(&self) -> bool {
        self.sum_cons().iter().all(|c| c.is_dynamic())
    }
}

/// Source expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    /// `()`
    UnitVal,
    /// `x`
    Var(String),
    /// `fn x => e`
    Lam(String, Box<Expr>),
    /// `e1 e2`
    App(Box<Expr>, Box<Expr>),
    /// `inj1 e` / `inj2 e`
    Inj(Index, Box<Expr>),
    /// `(e : A)`
    Anno(Box<Expr>, Type),
    /// `case e0 of inj1 x1 => e1 | inj2 x2 => e2`
    CaseTwo(Box<Expr>, String, Box<Expr>, String, Box<Expr>),
    /// `case e0 of inji x => e`
    CaseOne(Box<Expr>, Index, String, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn lam(x: impl Into<String>, body: Expr) -> Expr {
        Expr::Lam(x.into(), Box::new(body))
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn inj(i: Index, e: Expr) -> Expr {
        Expr::Inj(i, Box::new(e))
    }

    pub fn anno(e: Expr, ty: Type) -> Expr {
        Expr::Anno(Box::new(e), ty)
    }

    pub fn case_one(scrut: Expr, i: Index, x: impl Into<String>, arm: Expr) -> Expr {
        Expr::CaseOne(Box::new(scrut), i, x.into(), Box::new(arm))
    }

    pub fn case_two(
        scrut: Expr,
        x1: impl Into<String>,
        arm1: Expr,
        x2: impl Into<String>,
        arm2: Expr,
    ) -> Expr {
        Expr::CaseTwo(
            Box::new(scrut),
            x1.into(),
            Box::new(arm1),
            x2.into(),
            Box::new(arm2),
        )
    }

    /// Node count. Leaves count 1; annotation types are not expression nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::UnitVal | Expr::Var(_) => 1,
            Expr::Lam(_, e) | Expr::Inj(_, e) | Expr::Anno(e, _) => 1 + e.size(),
            Expr::App(f, a) => 1 + f.size() + a.size(),
            Expr::CaseOne(s, _, _, arm) => 1 + s.size() + arm.size(),
            Expr::CaseTwo(s, _, a1, _, a2) => 1 + s.size() + a1.size() + a2.size(),
        }
    }

    /// Child subexpressions in path order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::UnitVal | Expr::Var(_) => vec![],
            Expr::Lam(_, e) | Expr::Inj(_, e) | Expr::Anno(e, _) => vec![e],
            Expr::App(f, a) => vec![f, a],
            Expr::CaseOne(s, _, _, arm) => vec![s, arm],
            Expr::CaseTwo(s, _, a1, _, a2) => vec![s, a1, a2],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::UnitVal => {}
            Expr::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Expr::Lam(x, e) => {
                bound.push(x.clone());
                e.collect_free(bound, out);
                bound.pop();
            }
            Expr::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Expr::Inj(_, e) | Expr::Anno(e, _) => e.collect_free(bound, out),
            Expr::CaseOne(s, _, x, arm) => {
                s.collect_free(bound, out);
                bound.push(x.clone());
                arm.collect_free(bound, out);
                bound.pop();
            }
            Expr::CaseTwo(s, x1, a1, x2, a2) => {
                s.collect_free(bound, out);
                bound.push(x1.clone());
                a1.collect_free(bound, out);
                bound.pop();
                bound.push(x2.clone());
                a2.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Alpha-equivalence. Annotation types must match exactly.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        fn go(a: &Expr, b: &Expr, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Expr::UnitVal, Expr::UnitVal) => true,
                (Expr::Var(x), Expr::Var(y)) => {
                    // Innermost binding wins; free variables must agree by name.
                    for (bx, by) in env.iter().rev() {
                        match (bx == x, by == y) {
                            (true, true) => return true,
                            (false, false) => continue,
                            _ => return false,
                        }
                    }
                    x == y
                }
                (Expr::Lam(x, e1), Expr::Lam(y, e2)) => {
                    env.push((x.clone(), y.clone()));
                    let r = go(e1, e2, env);
                    env.pop();
                    r
                }
                (Expr::App(f1, a1), Expr::App(f2, a2)) => go(f1, f2, env) && go(a1, a2, env),
                (Expr::Inj(i, e1), Expr::Inj(j, e2)) => i == j && go(e1, e2, env),
                (Expr::Anno(e1, t1), Expr::Anno(e2, t2)) => t1 == t2 && go(e1, e2, env),
                (Expr::CaseOne(s1, i, x, m1), Expr::CaseOne(s2, j, y, m2)) => {
                    i == j && go(s1, s2, env) && {
                        env.push((x.clone(), y.clone()));
                        let r = go(m1, m2, env);
                        env.pop();
                        r
                    }
                }
                (Expr::CaseTwo(s1, x1, m1, y1, n1), Expr::CaseTwo(s2, x2, m2, y2, n2)) => {
                    go(s1, s2, env)
                        && {
                            env.push((x1.clone(), x2.clone()));
                            let r = go(m1, m2, env);
                            env.pop();
                            r
                        }
                        && {
                            env.push((y1.clone(), y2.clone()));
                            let r = go(n1, n2, env);
                            env.pop();
                            r
                        }
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Annotation types, in path order.
    pub fn annotations(&self) -> Vec<&Type> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Type>) {
            if let Expr::Anno(_, t) = e {
                out.push(t);
            }
            for c in e.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// All sum constructors mentioned in annotations.
    pub fn sum_cons(&self) -> Vec<SumCon> {
        self.annotations()
            .into_iter()
            .flat_map(|t| t.sum_cons())
            .collect()
    }

    pub fn is_static(&self) -> bool {
        self.sum_cons().iter().all(|c| c.is_static())
    }

    pub fn is_dynamic(&self) -> bool {
        self.sum_cons().iter().all(|c| c.is_dynamic())
    }
}

/// Typing context `Γ`: a finite map from variable names to types.
/// Rebinding replaces (innermost scope wins).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ctx(BTreeMap<String, Type>);

impl Ctx {
    pub fn empty() -> Ctx {
        Ctx(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Type)>) -> Ctx {
        Ctx(pairs.into_iter().collect())
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    /// A copy with `x : a` added, replacing any previous binding of `x`.
    pub fn extended(&self, x: &str, a: Type) -> Ctx {
        let mut m = self.0.clone();
        m.insert(x.to_string(), a);
        Ctx(m)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Type)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn is_static(&self) -> bool {
        self.0.values().all(|t| t.is_static())
    }

    pub fn is_dynamic(&self) -> bool {
        self.0.values().all(|t| t.is_dynamic())
    }
}

/// Target sum constructors `φ ::= + | +1 | +2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetSum {
    TPlus,
    TPlus1,
    TPlus2,
}

impl TargetSum {
    pub const ALL: [TargetSum; 3] = [TargetSum::TPlus, TargetSum::TPlus1, TargetSum::TPlus2];

    pub fn code(self) -> usize {
        match self {
            TargetSum::TPlus => 0,
            TargetSum::TPlus1 => 1,
            TargetSum::TPlus2 => 2,
        }
    }

    pub fn plus(i: Index) -> TargetSum {
        match i {
            Index::One => TargetSum::TPlus1,
            Index::Two => TargetSum::TPlus2,
        }
    }

    /// `Some(i)` for `+i`, `None` for `+`.
    pub fn index(self) -> Option<Index> {
        match self {
            TargetSum::TPlus => None,
            TargetSum::TPlus1 => Some(Index::One),
            TargetSum::TPlus2 => Some(Index::Two),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            TargetSum::TPlus => "+",
            TargetSum::TPlus1 => "+1",
            TargetSum::TPlus2 => "+2",
        }
    }
}

impl std::fmt::Display for TargetSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Target types. `Bottom` is internal plumbing for principal types
/// (matchfail, free injection components); it never appears in surface
/// syntax or in type translations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetType {
    TUnit,
    TSum(Box<TargetType>, TargetSum, Box<TargetType>),
    TArrow(Box<TargetType>, Box<TargetType>),
    Bottom,
}

impl TargetType {
    pub fn sum(left: TargetType, con: TargetSum, right: TargetType) -> TargetType {
        TargetType::TSum(Box::new(left), con, Box::new(right))
    }

    pub fn arrow(dom: TargetType, cod: TargetType) -> TargetType {
        TargetType::TArrow(Box::new(dom), Box::new(cod))
    }

    pub fn contains_bottom(&self) -> bool {
        match self {
            TargetType::Bottom => true,
            TargetType::TUnit => false,
            TargetType::TSum(a, _, b) | TargetType::TArrow(a, b) => {
                a.contains_bottom() || b.contains_bottom()
            }
        }
    }
}

/// Target terms `M`. Lambda domain annotations make target typechecking
/// algorithmic; the evaluator ignores them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetTerm {
    TUnitVal,
    TVar(String),
    TLam(String, TargetType, Box<TargetTerm>),
    TApp(Box<TargetTerm>, Box<TargetTerm>),
    TInj(Index, Box<TargetTerm>),
    TCaseTwo(
        Box<TargetTerm>,
        String,
        Box<TargetTerm>,
        String,
        Box<TargetTerm>,
    ),
    TCaseOne(Box<TargetTerm>, Index, String, Box<TargetTerm>),
    /// `<φ1 => φ2>(M)`
    Cast(TargetSum, TargetSum, Box<TargetTerm>),
    Matchfail,
}

impl TargetTerm {
    pub fn var(name: impl Into<String>) -> TargetTerm {
        TargetTerm::TVar(name.into())
    }

    pub fn lam(x: impl Into<String>, dom: TargetType, body: TargetTerm) -> TargetTerm {
        TargetTerm::TLam(x.into(), dom, Box::new(body))
    }

    pub fn app(f: TargetTerm, a: TargetTerm) -> TargetTerm {
        TargetTerm::TApp(Box::new(f), Box::new(a))
    }

    pub fn inj(i: Index, m: TargetTerm) -> TargetTerm {
        TargetTerm::TInj(i, Box::new(m))
    }

    pub fn cast(from: TargetSum, to: TargetSum, m: TargetTerm) -> TargetTerm {
        TargetTerm::Cast(from, to, Box::new(m))
    }

    pub fn case_one(
        scrut: TargetTerm,
        i: Index,
        x: impl Into<String>,
        arm: TargetTerm,
    ) -> TargetTerm {
        TargetTerm::TCaseOne(Box::new(scrut), i, x.into(), Box::new(arm))
    }

    pub fn case_two(
        scrut: TargetTerm,
        x1: impl Into<String>,
        arm1: TargetTerm,
        x2: impl Into<String>,
        arm2: TargetTerm,
    ) -> TargetTerm {
        TargetTerm::TCaseTwo(
            Box::new(scrut),
            x1.into(),
            Box::new(arm1),
            x2.into(),
            Box::new(arm2),
        )
    }

    pub fn size(&self) -> usize {
        match self {
            TargetTerm::TUnitVal | TargetTerm::TVar(_) | TargetTerm::Matchfail => 1,
            TargetTerm::TLam(_, _, m) | TargetTerm::TInj(_, m) | TargetTerm::Cast(_, _, m) => {
                1 + m.size()
            }
            TargetTerm::TApp(f, a) => 1 + f.size() + a.size(),
            TargetTerm::TCaseOne(s, _, _, arm) => 1 + s.size() + arm.size(),
            TargetTerm::TCaseTwo(s, _, a1, _, a2) => 1 + s.size() + a1.size() + a2.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            TargetTerm::TUnitVal | TargetTerm::Matchfail => {}
            TargetTerm::TVar(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            TargetTerm::TLam(x, _, m) => {
                bound.push(x.clone());
                m.collect_free(bound, out);
                bound.pop();
            }
            TargetTerm::TApp(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            TargetTerm::TInj(_, m) | TargetTerm::Cast(_, _, m) => m.collect_free(bound, out),
            TargetTerm::TCaseOne(s, _, x, arm) => {
                s.collect_free(bound, out);
                bound.push(x.clone());
                arm.collect_free(bound, out);
                bound.pop();
            }
            TargetTerm::TCaseTwo(s, x1, a1, x2, a2) => {
                s.collect_free(bound, out);
                bound.push(x1.clone());
                a1.collect_free(bound, out);
                bound.pop();
                bound.push(x2.clone());
                a2.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding substitution `[n/x]self`. Binders that would
    /// capture a free variable of `n` are freshened with primes.
    pub fn subst(&self, x: &str, n: &TargetTerm) -> TargetTerm {
        let fv = n.free_vars();
        self.subst_in(x, n, &fv)
    }

    fn subst_in(&self, x: &str, n: &TargetTerm, fv_n: &BTreeSet<String>) -> TargetTerm {
        match self {
            TargetTerm::TUnitVal | TargetTerm::Matchfail => self.clone(),
            TargetTerm::TVar(y) => {
                if y == x {
                    n.clone()
                } else {
                    self.clone()
                }
            }
            TargetTerm::TLam(y, dom, m) => {
                if y == x {
                    self.clone()
                } else if fv_n.contains(y) {
                    let y2 = fresh_name(y, &avoid_set(fv_n, m, x));
                    let m2 = m.subst_in(y, &TargetTerm::var(y2.clone()), &single(&y2));
                    TargetTerm::lam(y2, dom.clone(), m2.subst_in(x, n, fv_n))
                } else {
                    TargetTerm::lam(y.clone(), dom.clone(), m.subst_in(x, n, fv_n))
                }
            }
            TargetTerm::TApp(f, a) => {
                TargetTerm::app(f.subst_in(x, n, fv_n), a.subst_in(x, n, fv_n))
            }
            TargetTerm::TInj(i, m) => TargetTerm::inj(*i, m.subst_in(x, n, fv_n)),
            TargetTerm::Cast(c1, c2, m) => TargetTerm::cast(*c1, *c2, m.subst_in(x, n, fv_n)),
            TargetTerm::TCaseOne(s, i, y, arm) => {
                let s2 = s.subst_in(x, n, fv_n);
                if y == x {
                    TargetTerm::case_one(s2, *i, y.clone(), (**arm).clone())
                } else if fv_n.contains(y) {
                    let y2 = fresh_name(y, &avoid_set(fv_n, arm, x));
                    let arm2 = arm.subst_in(y, &TargetTerm::var(y2.clone()), &single(&y2));
                    TargetTerm::case_one(s2, *i, y2, arm2.subst_in(x, n, fv_n))
                } else {
                    TargetTerm::case_one(s2, *i, y.clone(), arm.subst_in(x, n, fv_n))
                }
            }
            TargetTerm::TCaseTwo(s, y1, a1, y2, a2) => {
                let s2 = s.subst_in(x, n, fv_n);
                let (z1, b1) = subst_under_binder(y1, a1, x, n, fv_n);
                let (z2, b2) = subst_under_binder(y2, a2, x, n, fv_n);
                TargetTerm::case_two(s2, z1, b1, z2, b2)
            }
        }
    }

    /// Alpha-equivalence. Domain annotations must match exactly.
    pub fn alpha_eq(&self, other: &TargetTerm) -> bool {
        fn go(a: &TargetTerm, b: &TargetTerm, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (TargetTerm::TUnitVal, TargetTerm::TUnitVal) => true,
                (TargetTerm::Matchfail, TargetTerm::Matchfail) => true,
                (TargetTerm::TVar(x), TargetTerm::TVar(y)) => {
                    for (bx, by) in env.iter().rev() {
                        match (bx == x, by == y) {
                            (true, true) => return true,
                            (false, false) => continue,
                            _ => return false,
                        }
                    }
                    x == y
                }
                (TargetTerm::TLam(x, t1, m1), TargetTerm::TLam(y, t2, m2)) => {
                    t1 == t2 && {
                        env.push((x.clone(), y.clone()));
                        let r = go(m1, m2, env);
                        env.pop();
                        r
                    }
                }
                (TargetTerm::TApp(f1, a1), TargetTerm::TApp(f2, a2)) => {
                    go(f1, f2, env) && go(a1, a2, env)
                }
                (TargetTerm::TInj(i, m1), TargetTerm::TInj(j, m2)) => i == j && go(m1, m2, env),
                (TargetTerm::Cast(a1, b1, m1), TargetTerm::Cast(a2, b2, m2)) => {
                    a1 == a2 && b1 == b2 && go(m1, m2, env)
                }
                (TargetTerm::TCaseOne(s1, i, x, m1), TargetTerm::TCaseOne(s2, j, y, m2)) => {
                    i == j && go(s1, s2, env) && {
                        env.push((x.clone(), y.clone()));
                        let r = go(m1, m2, env);
                        env.pop();
                        r
                    }
                }
                (
                    TargetTerm::TCaseTwo(s1, x1, m1, y1, n1),
                    TargetTerm::TCaseTwo(s2, x2, m2, y2, n2),
                ) => {
                    go(s1, s2, env)
                        && {
                            env.push((x1.clone(), x2.clone()));
                            let r = go(m1, m2, env);
                            env.pop();
                            r
                        }
                        && {
                            env.push((y1.clone(), y2.clone()));
                            let r = go(n1, n2, env);
                            env.pop();
                            r
                        }
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

fn subst_under_binder(
    y: &str,
    body: &TargetTerm,
    x: &str,
    n: &TargetTerm,
    fv_n: &BTreeSet<String>,
) -> (String, TargetTerm) {
    if y == x {
        (y.to_string(), body.clone())
    } else if fv_n.contains(y) {
        let y2 = fresh_name(y, &avoid_set(fv_n, body, x));
        let body2 = body.subst_in(y, &TargetTerm::var(y2.clone()), &single(&y2));
        (y2.clone(), body2.subst_in(x, n, fv_n))
    } else {
        (y.to_string(), body.subst_in(x, n, fv_n))
    }
}

fn single(name: &str) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    s.insert(name.to_string());
    s
}

fn avoid_set(fv_n: &BTreeSet<String>, body: &TargetTerm, x: &str) -> BTreeSet<String> {
    let mut avoid = fv_n.clone();
    avoid.extend(body.free_vars());
    avoid.insert(x.to_string());
    avoid
}

/// A name not in `avoid`, built from `base` by appending primes.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

/// Target typing context `Θ`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TargetCtx(BTreeMap<String, TargetType>);

impl TargetCtx {
    pub fn empty() -> TargetCtx {
        TargetCtx(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, TargetType)>) -> TargetCtx {
        TargetCtx(pairs.into_iter().collect())
    }

    pub fn lookup(&self, x: &str) -> Option<&TargetType> {
        self.0.get(x)
    }

    pub fn extended(&self, x: &str, t: TargetType) -> TargetCtx {
        let mut m = self.0.clone();
        m.insert(x.to_string(), t);
        TargetCtx(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &TargetType)> {
        self.0.iter()
    }
}

/// A target term with exactly one hole, used to coerce `|A'|` to `|A|`.
/// The hole is a reserved variable that cannot be written in the surface
/// syntax, so filling is ordinary capture-avoiding substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coercion(TargetTerm);

impl Coercion {
    /// Reserved hole marker; not a lexable identifier.
    pub const HOLE: &'static str = "\u{b7}";

    pub fn hole() -> Coercion {
        Coercion(TargetTerm::var(Self::HOLE))
    }

    /// Wrap a term containing exactly one hole occurrence.
    pub fn new(t: TargetTerm) -> Coercion {
        debug_assert_eq!(hole_count(&t), 1, "coercion must contain exactly one hole");
        Coercion(t)
    }

    pub fn is_hole(&self) -> bool {
        self.0 == TargetTerm::var(Self::HOLE)
    }

    /// Fill the hole with `m`. Coercion binders are freshened away from the
    /// free variables of `m`, so filling never captures.
    pub fn fill(&self, m: TargetTerm) -> TargetTerm {
        self.0.subst(Self::HOLE, &m)
    }

    pub fn as_term(&self) -> &TargetTerm {
        &self.0
    }
}

/// Occurrences of the hole marker in a term.
pub fn hole_count(t: &TargetTerm) -> usize {
    match t {
        TargetTerm::TVar(x) if x == Coercion::HOLE => 1,
        TargetTerm::TUnitVal | TargetTerm::TVar(_) | TargetTerm::Matchfail => 0,
        TargetTerm::TLam(_, _, m) | TargetTerm::TInj(_, m) | TargetTerm::Cast(_, _, m) => {
            hole_count(m)
        }
        TargetTerm::TApp(f, a) => hole_count(f) + hole_count(a),
        TargetTerm::TCaseOne(s, _, _, arm) => hole_count(s) + hole_count(arm),
        TargetTerm::TCaseTwo(s, _, a1, _, a2) => hole_count(s) + hole_count(a1) + hole_count(a2),
    }
}

/// One layer of evaluation context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    /// `inj i E`
    InjPayload(Index),
    /// `<φ1 => φ2>(E)`
    CastInner(TargetSum, TargetSum),
    /// `case E of inji x => arm`
    CaseOneScrut(Index, String, TargetTerm),
    /// `case E of inj1 x1 => arm1 | inj2 x2 => arm2`
    CaseTwoScrut(String, TargetTerm, String, TargetTerm),
    /// `E m` — argument not yet touched.
    AppFun(TargetTerm),
    /// `w E` — function already a value.
    AppArg(TargetTerm),
}

/// Evaluation context `E`: a stack of frames, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalContext(pub Vec<Frame>);

impl EvalContext {
    pub fn empty() -> EvalContext {
        EvalContext(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Rebuild `E[m]`.
    pub fn plug(&self, m: TargetTerm) -> TargetTerm {
        let mut t = m;
        for frame in self.0.iter().rev() {
            t = match frame {
                Frame::InjPayload(i) => TargetTerm::inj(*i, t),
                Frame::CastInner(a, b) => TargetTerm::cast(*a, *b, t),
                Frame::CaseOneScrut(i, x, arm) => {
                    TargetTerm::case_one(t, *i, x.clone(), arm.clone())
                }
                Frame::CaseTwoScrut(x1, a1, x2, a2) => {
                    TargetTerm::case_two(t, x1.clone(), a1.clone(), x2.clone(), a2.clone())
                }
                Frame::AppFun(arg) => TargetTerm::app(t, arg.clone()),
                Frame::AppArg(f) => TargetTerm::app(f.clone(), t),
            };
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_eq_renames_binders() {
        let a = Expr::lam("x", Expr::var("x"));
        let b = Expr::lam("y", Expr::var("y"));
        assert!(a.alpha_eq(&b));
        let c = Expr::lam("x", Expr::var("z"));
        let d = Expr::lam("y", Expr::var("z"));
        assert!(c.alpha_eq(&d));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn alpha_eq_respects_shadowing() {
        // fn x => fn x => x  vs  fn x => fn y => x : inner var refers to
        // different binders.
        let a = Expr::lam("x", Expr::lam("x", Expr::var("x")));
        let b = Expr::lam("x", Expr::lam("y", Expr::var("x")));
        assert!(!a.alpha_eq(&b));
    }

    #[test]
    fn subst_avoids_capture() {
        // [y/x](fn y => x y)  must rename the binder.
        let body = TargetTerm::lam(
            "y",
            TargetType::TUnit,
            TargetTerm::app(TargetTerm::var("x"), TargetTerm::var("y")),
        );
        let result = body.subst("x", &TargetTerm::var("y"));
        let expected = TargetTerm::lam(
            "y'",
            TargetType::TUnit,
            TargetTerm::app(TargetTerm::var("y"), TargetTerm::var("y'")),
        );
        assert!(result.alpha_eq(&expected));
    }

    #[test]
    fn coercion_fill_is_capture_avoiding() {
        // (fn x => [] x) filled with a term mentioning a free x.
        let c = Coercion::new(TargetTerm::lam(
            "x",
            TargetType::TUnit,
            TargetTerm::app(TargetTerm::var(Coercion::HOLE), TargetTerm::var("x")),
        ));
        let filled = c.fill(TargetTerm::var("x"));
        let expected = TargetTerm::lam(
            "x'",
            TargetType::TUnit,
            TargetTerm::app(TargetTerm::var("x"), TargetTerm::var("x'")),
        );
        assert!(filled.alpha_eq(&expected));
    }

    #[test]
    fn expr_size_counts_nodes() {
        // case (inj1 ()) of inj1 x => x  : case + inj + unit + var = 4
        let e = Expr::case_one(
            Expr::inj(Index::One, Expr::UnitVal),
            Index::One,
            "x",
            Expr::var("x"),
        );
        assert_eq!(e.size(), 4);
    }

    #[test]
    fn plug_rebuilds_contexts() {
        let e = EvalContext(vec![
            Frame::InjPayload(Index::One),
            Frame::CastInner(TargetSum::TPlus, TargetSum::TPlus1),
        ]);
        let t = e.plug(TargetTerm::TUnitVal);
        assert_eq!(
            t,
            TargetTerm::inj(
                Index::One,
                TargetTerm::cast(TargetSum::TPlus, TargetSum::TPlus1, TargetTerm::TUnitVal)
            )
        );
    }
}
