//! Program enumeration, seeded generation of well-typed programs,
//! brute-force oracles, and the property suites.
//!
//! ```text
//! enum_types(d)        every type of depth ≤ d
//! enum_exprs(Γ, n)     every expression of size exactly n
//! gen_welltyped(cfg)   seeded stream of typechecked judgments
//! vary_precision(e)    one-step loosenings/tightenings of annotations
//! run_suite(name, cfg) one of the six property suites
//! ```
//!
//! Suites re-derive everything they check from independent definitions:
//! closure tables are rebuilt by breadth-first search from re-transcribed
//! edge lists, consistency is re-decided by bitset search over all
//! precision-lowerings, and the metatheory suites drive the checker,
//! elaborator, and evaluator against each other on generated corpora.
//! Reports are deterministic given a config, byte-identical up to wall
//! time.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elaborate::{coerce, elaborate, ty_trans, Mode};
use crate::relations::{
    dcons, subsum, subtype, sum_precision, sum_synth, target_subtype, type_precision,
};
use crate::syntax::ast::{Ctx, Expr, Index, SumCon, TargetCtx, TargetTerm, Type};
use crate::syntax::parser::{parse_expr, parse_target, parse_type};
use crate::target::{
    contains_cast, contains_matchfail, decompose, evaluate, is_value, step, target_typecheck,
    term_precision, Decomposition, Step, StepTrace, Verdict,
};
use crate::typecheck::{
    annotate, check, check_dynamic, check_static, embed, eq_anno, synth, synth_dynamic,
    synth_static, validate_assignment, BiDerivation, Direction, TypeError,
};

// ======================================================================
// Type universe and exhaustive enumeration
// ======================================================================

/// Every type of depth at most `depth`, in a fixed construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeUniverse {
    pub depth: usize,
    pub types: Vec<Type>,
}

/// Enumerate all types of depth ≤ `d` over the unit base. The count
/// obeys c(0) = 1, c(d) = 1 + 9·c(d−1)².
pub fn enum_types(d: usize) -> TypeUniverse {
    let mut types = vec![Type::Unit];
    for _ in 0..d {
        let prev = types.clone();
        let mut next = vec![Type::Unit];
        for left in &prev {
            for right in &prev {
                for con in SumCon::ALL {
                    next.push(Type::sum(left.clone(), con, right.clone()));
                }
                next.push(Type::arrow(left.clone(), right.clone()));
            }
        }
        types = next;
    }
    TypeUniverse { depth: d, types }
}

/// Every expression of size exactly `size` under `ctx`, with annotation
/// types drawn from `annos` and canonical binder names `x0, x1, …`
/// numbered by enclosing scope depth.
pub fn enum_exprs(ctx: &Ctx, size: usize, annos: &[Type]) -> Vec<Expr> {
    let base: Vec<String> = ctx.domain().cloned().collect();
    let mut memo = HashMap::new();
    enum_at(&base, size, annos, &mut memo)
}

/// Union of [`enum_exprs`] at every size from 1 to `size`.
pub fn enum_exprs_upto(ctx: &Ctx, size: usize, annos: &[Type]) -> Vec<Expr> {
    (1..=size).flat_map(|s| enum_exprs(ctx, s, annos)).collect()
}

fn enum_at(
    scope: &[String],
    size: usize,
    annos: &[Type],
    memo: &mut HashMap<(usize, usize), Vec<Expr>>,
) -> Vec<Expr> {
    // Scope contents are determined by the ambient names plus the depth,
    // so (size, extra binder count) is a sound memo key.
    if let Some(hit) = memo.get(&(size, scope.len())) {
        return hit.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.push(Expr::UnitVal);
        for x in scope {
            out.push(Expr::var(x.clone()));
        }
    } else if size >= 2 {
        let inner = size - 1;
        let deeper: Vec<String> = scope
            .iter()
            .cloned()
            .chain([format!("x{}", scope.len())])
            .collect();
        let binder = format!("x{}", scope.len());
        for body in enum_at(&deeper, inner, annos, memo) {
            out.push(Expr::lam(binder.clone(), body));
        }
        for payload in enum_at(scope, inner, annos, memo) {
            for i in Index::ALL {
                out.push(Expr::inj(i, payload.clone()));
            }
        }
        for e in enum_at(scope, inner, annos, memo) {
            for a in annos {
                out.push(Expr::anno(e.clone(), a.clone()));
            }
        }
        for fun_size in 1..inner {
            let arg_size = inner - fun_size;
            for f in enum_at(scope, fun_size, annos, memo) {
                for a in enum_at(scope, arg_size, annos, memo) {
                    out.push(Expr::app(f.clone(), a.clone()));
                }
            }
        }
        for scrut_size in 1..inner {
            let arm_size = inner - scrut_size;
            for s in enum_at(scope, scrut_size, annos, memo) {
                for arm in enum_at(&deeper, arm_size, annos, memo) {
                    for i in Index::ALL {
                        out.push(Expr::case_one(s.clone(), i, binder.clone(), arm.clone()));
                    }
                }
            }
        }
        for scrut_size in 1..inner.saturating_sub(1) {
            for arm1_size in 1..(inner - scrut_size) {
                let arm2_size = inner - scrut_size - arm1_size;
                for s in enum_at(scope, scrut_size, annos, memo) {
                    for a1 in enum_at(&deeper, arm1_size, annos, memo) {
                        for a2 in enum_at(&deeper, arm2_size, annos, memo) {
                            out.push(Expr::case_two(
                                s.clone(),
                                binder.clone(),
                                a1.clone(),
                                binder.clone(),
                                a2.clone(),
                            ));
                        }
                    }
                }
            }
        }
    }
    memo.insert((size, scope.len()), out.clone());
    out
}

// ======================================================================
// Seeded generation of well-typed programs
// ======================================================================

/// Which sublanguage generated programs must stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FragmentFilter {
    Full,
    Static,
    Dynamic,
}

impl FragmentFilter {
    pub fn as_str(self) -> &'static str {
        match self {
            FragmentFilter::Full => "full",
            FragmentFilter::Static => "static",
            FragmentFilter::Dynamic => "dynamic",
        }
    }

    fn admits(self, t: &Type) -> bool {
        match self {
            FragmentFilter::Full => true,
            FragmentFilter::Static => t.is_static(),
            FragmentFilter::Dynamic => t.is_dynamic(),
        }
    }
}

/// Reproducible generator configuration: the same config always yields
/// the same corpus and the same suite report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Number of generated judgments.
    pub count: usize,
    /// Upper bound on expression size.
    pub max_size: usize,
    /// Depth of the type universe used for goals and annotations.
    pub type_depth: usize,
    /// Number of ambient context bindings (0 generates closed programs).
    pub ctx_vars: usize,
    /// Probability of routing a subgoal through an annotation.
    pub annotation_density: f64,
    pub fragment: FragmentFilter,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            seed: 42,
            count: 10_000,
            max_size: 25,
            type_depth: 2,
            ctx_vars: 2,
            annotation_density: 0.35,
            fragment: FragmentFilter::Full,
        }
    }
}

/// One generated, typechecked judgment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenCase {
    pub index: usize,
    pub seed: u64,
    pub ctx: Ctx,
    pub expr: Expr,
    pub ty: Type,
    pub dir: Direction,
}

fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shape_key(t: &Type) -> String {
    match t {
        Type::Unit => "U".to_string(),
        Type::Sum(a, _, b) => format!("({}+{})", shape_key(a), shape_key(b)),
        Type::Arrow(a, b) => format!("({}>{})", shape_key(a), shape_key(b)),
    }
}

struct Gen<'a> {
    cfg: &'a GenConfig,
    universe: Vec<Type>,
    sums: Vec<Type>,
    by_shape: HashMap<String, Vec<usize>>,
}

impl<'a> Gen<'a> {
    fn new(cfg: &'a GenConfig) -> Gen<'a> {
        let universe: Vec<Type> = enum_types(cfg.type_depth)
            .types
            .into_iter()
            .filter(|t| cfg.fragment.admits(t))
            .collect();
        let sums = universe
            .iter()
            .filter(|t| matches!(t, Type::Sum(..)))
            .cloned()
            .collect();
        let mut by_shape: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in universe.iter().enumerate() {
            by_shape.entry(shape_key(t)).or_default().push(i);
        }
        Gen {
            cfg,
            universe,
            sums,
            by_shape,
        }
    }

    /// The subsumption this config's checker applies at leaves.
    fn relates(&self, a: &Type, b: &Type) -> bool {
        match self.cfg.fragment {
            FragmentFilter::Full => dcons(a, b),
            FragmentFilter::Static => subtype(a, b),
            FragmentFilter::Dynamic => a == b,
        }
    }

    fn pick<'t>(&self, rng: &mut ChaCha8Rng, pool: &'t [Type]) -> &'t Type {
        &pool[rng.gen_range(0..pool.len())]
    }

    /// A same-shape type related to `goal` under the fragment relation.
    fn related_partner(&self, rng: &mut ChaCha8Rng, goal: &Type) -> Type {
        let cands: Vec<&Type> = self
            .by_shape
            .get(&shape_key(goal))
            .map(|ids| {
                ids.iter()
                    .map(|&i| &self.universe[i])
                    .filter(|t| self.relates(t, goal))
                    .collect()
            })
            .unwrap_or_default();
        if cands.is_empty() {
            goal.clone()
        } else {
            cands[rng.gen_range(0..cands.len())].clone()
        }
    }

    /// A total, fuel-free inhabitant of `goal`.
    fn leaf(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, goal: &Type) -> Expr {
        let vars: Vec<&String> = ctx
            .iter()
            .filter(|(_, t)| self.relates(t, goal))
            .map(|(x, _)| x)
            .collect();
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return Expr::var(vars[rng.gen_range(0..vars.len())].clone());
        }
        match goal {
            Type::Unit => Expr::UnitVal,
            Type::Arrow(dom, cod) => {
                let x = format!("x{}", ctx.len());
                let body = self.leaf(rng, &ctx.extended(&x, (**dom).clone()), cod);
                Expr::lam(x, body)
            }
            Type::Sum(l, con, r) => {
                let i = *valid_injections(*con).first().expect("inhabited sum");
                let payload = self.leaf(rng, ctx, if i == Index::One { l } else { r });
                Expr::inj(i, payload)
            }
        }
    }

    /// An expression that checks against `goal` under `ctx`, of size at
    /// most `fuel`. Total: falls back to [`Gen::leaf`].
    fn gen_check(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, goal: &Type, fuel: usize) -> Expr {
        if fuel <= 1 {
            return self.leaf(rng, ctx, goal);
        }
        if rng.gen_bool(self.cfg.annotation_density) {
            let against = self.related_partner(rng, goal);
            let inner = self.gen_check(rng, ctx, &against, fuel - 1);
            return Expr::anno(inner, against);
        }
        match rng.gen_range(0..10) {
            // Elimination forms around the goal.
            0 | 1 => self.gen_case_two(rng, ctx, goal, fuel),
            2 => self.gen_case_one(rng, ctx, goal, fuel),
            3 => self.gen_app(rng, ctx, goal, fuel),
            // Introduction forms for the goal's own shape.
            _ => match goal {
                Type::Unit => Expr::UnitVal,
                Type::Arrow(dom, cod) => {
                    let x = format!("x{}", ctx.len());
                    let body =
                        self.gen_check(rng, &ctx.extended(&x, (**dom).clone()), cod, fuel - 1);
                    Expr::lam(x, body)
                }
                Type::Sum(l, con, r) => {
                    let valid = valid_injections(*con);
                    let i = valid[rng.gen_range(0..valid.len())];
                    let comp = if i == Index::One { l } else { r };
                    Expr::inj(i, self.gen_check(rng, ctx, comp, fuel - 1))
                }
            },
        }
    }

    /// An expression that synthesizes exactly `ty`.
    fn gen_synth_of(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, ty: &Type, fuel: usize) -> Expr {
        let exact: Vec<&String> = ctx
            .iter()
            .filter(|(_, t)| *t == ty)
            .map(|(x, _)| x)
            .collect();
        if !exact.is_empty() && rng.gen_bool(0.5) {
            return Expr::var(exact[rng.gen_range(0..exact.len())].clone());
        }
        Expr::anno(
            self.gen_check(rng, ctx, ty, fuel.saturating_sub(1).max(1)),
            ty.clone(),
        )
    }

    fn gen_app(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, goal: &Type, fuel: usize) -> Expr {
        if fuel < 4 {
            return self.leaf(rng, ctx, goal);
        }
        let arg_ty = self.pick(rng, &self.universe).clone();
        let res_ty = self.related_partner(rng, goal);
        let fun_ty = Type::arrow(arg_ty.clone(), res_ty);
        let fun_fuel = (fuel - 2) / 2;
        let fun = self.gen_synth_of(rng, ctx, &fun_ty, fun_fuel);
        let arg_fuel = fuel.saturating_sub(1 + fun.size()).max(1);
        let arg = self.gen_check(rng, ctx, &arg_ty, arg_fuel);
        Expr::app(fun, arg)
    }

    fn gen_case_two(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, goal: &Type, fuel: usize) -> Expr {
        if fuel < 4 || self.sums.is_empty() {
            return self.leaf(rng, ctx, goal);
        }
        let scrut_ty = self.pick(rng, &self.sums).clone();
        let Type::Sum(l, _, r) = &scrut_ty else {
            unreachable!("sum pool holds sums")
        };
        let scrut = self.gen_synth_of(rng, ctx, &scrut_ty, (fuel - 3) / 2);
        let arm_fuel = (fuel.saturating_sub(1 + scrut.size())) / 2;
        let x = format!("x{}", ctx.len());
        let arm1 = self.gen_check(rng, &ctx.extended(&x, (**l).clone()), goal, arm_fuel.max(1));
        let arm2 = self.gen_check(rng, &ctx.extended(&x, (**r).clone()), goal, arm_fuel.max(1));
        Expr::case_two(scrut, x.clone(), arm1, x, arm2)
    }

    fn gen_case_one(&self, rng: &mut ChaCha8Rng, ctx: &Ctx, goal: &Type, fuel: usize) -> Expr {
        // Pick a scrutinee sum whose constructor admits a one-armed case.
        let cands: Vec<(Type, Index)> = self
            .sums
            .iter()
            .flat_map(|t| {
                let Type::Sum(_, con, _) = t else {
                    unreachable!()
                };
                Index::ALL
                    .into_iter()
                    .filter(|i| sum_synth(*con, SumCon::star(*i)))
                    .map(|i| (t.clone(), i))
                    .collect::<Vec<_>>()
            })
            .collect();
        if fuel < 4 || cands.is_empty() {
            return self.leaf(rng, ctx, goal);
        }
        let (scrut_ty, i) = cands[rng.gen_range(0..cands.len())].clone();
        let Type::Sum(l, _, r) = &scrut_ty else {
            unreachable!()
        };
        let scrut = self.gen_synth_of(rng, ctx, &scrut_ty, (fuel - 2) / 2);
        let comp = if i == Index::One { l } else { r };
        let x = format!("x{}", ctx.len());
        let arm_fuel = fuel.saturating_sub(1 + scrut.size()).max(1);
        let arm = self.gen_check(rng, &ctx.extended(&x, (**comp).clone()), goal, arm_fuel);
        Expr::case_one(scrut, i, x, arm)
    }

    fn gen_case(&self, index: usize) -> GenCase {
        let seed = mix_seed(self.cfg.seed, index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ctx = Ctx::empty();
        for v in 0..self.cfg.ctx_vars {
            ctx = ctx.extended(
                &format!("v{v}"),
                self.pick(&mut rng, &self.universe).clone(),
            );
        }
        let goal = self.pick(&mut rng, &self.universe).clone();
        let dir = if rng.gen_bool(0.5) {
            Direction::Check
        } else {
            Direction::Synth
        };
        let body = self.gen_check(&mut rng, &ctx, &goal, self.cfg.max_size.max(2));
        let expr = match dir {
            Direction::Check => body,
            Direction::Synth => Expr::anno(body, goal.clone()),
        };
        GenCase {
            index,
            seed,
            ctx,
            expr,
            ty: goal,
            dir,
        }
    }
}

fn valid_injections(con: SumCon) -> Vec<Index> {
    Index::ALL
        .into_iter()
        .filter(|i| subsum(SumCon::plus_q(*i), con))
        .collect()
}

/// Generate `cfg.count` well-typed judgments. Every output is accepted
/// by the checker; this is asserted, not assumed.
pub fn gen_welltyped(cfg: &GenConfig) -> Vec<GenCase> {
    let gen = Gen::new(cfg);
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let case = gen.gen_case(i);
            let ok = match case.dir {
                Direction::Check => check(&case.ctx, &case.expr, &case.ty).map(|_| ()),
                Direction::Synth => synth(&case.ctx, &case.expr).map(|d| {
                    assert_eq!(d.ty, case.ty, "synthesis drifted from the goal");
                }),
            };
            if let Err(e) = ok {
                panic!(
                    "generator produced an ill-typed case (seed {}): {} — {e}",
                    case.seed, case.expr
                );
            }
            case
        })
        .collect()
}

// ======================================================================
// Precision variation
// ======================================================================

/// Which way to move along the imprecision order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaryDirection {
    /// Replace constructors with strictly less precise ones.
    Loosen,
    /// Replace constructors with strictly more precise ones.
    Tighten,
}

fn con_variants(con: SumCon, dir: VaryDirection) -> Vec<SumCon> {
    SumCon::ALL
        .into_iter()
        .filter(|c| {
            *c != con
                && match dir {
                    VaryDirection::Loosen => sum_precision(con, *c),
                    VaryDirection::Tighten => sum_precision(*c, con),
                }
        })
        .collect()
}

/// All types obtained by moving exactly one constructor one hop.
pub fn vary_type_precision(a: &Type, dir: VaryDirection) -> Vec<Type> {
    match a {
        Type::Unit => vec![],
        Type::Sum(l, con, r) => {
            let mut out: Vec<Type> = con_variants(*con, dir)
                .into_iter()
                .map(|c| Type::sum((**l).clone(), c, (**r).clone()))
                .collect();
            out.extend(
                vary_type_precision(l, dir)
                    .into_iter()
                    .map(|l2| Type::sum(l2, *con, (**r).clone())),
            );
            out.extend(
                vary_type_precision(r, dir)
                    .into_iter()
                    .map(|r2| Type::sum((**l).clone(), *con, r2)),
            );
            out
        }
        Type::Arrow(d, c) => {
            let mut out: Vec<Type> = vary_type_precision(d, dir)
                .into_iter()
                .map(|d2| Type::arrow(d2, (**c).clone()))
                .collect();
            out.extend(
                vary_type_precision(c, dir)
                    .into_iter()
                    .map(|c2| Type::arrow((**d).clone(), c2)),
            );
            out
        }
    }
}

/// All expressions obtained by moving one constructor of one annotation.
pub fn vary_precision(e: &Expr, dir: VaryDirection) -> Vec<Expr> {
    match e {
        Expr::UnitVal | Expr::Var(_) => vec![],
        Expr::Lam(x, b) => vary_precision(b, dir)
            .into_iter()
            .map(|b2| Expr::lam(x.clone(), b2))
            .collect(),
        Expr::App(f, a) => {
            let mut out: Vec<Expr> = vary_precision(f, dir)
                .into_iter()
                .map(|f2| Expr::app(f2, (**a).clone()))
                .collect();
            out.extend(
                vary_precision(a, dir)
                    .into_iter()
                    .map(|a2| Expr::app((**f).clone(), a2)),
            );
            out
        }
        Expr::Inj(i, p) => vary_precision(p, dir)
            .into_iter()
            .map(|p2| Expr::inj(*i, p2))
            .collect(),
        Expr::Anno(inner, a) => {
            let mut out: Vec<Expr> = vary_type_precision(a, dir)
                .into_iter()
                .map(|a2| Expr::anno((**inner).clone(), a2))
                .collect();
            out.extend(
                vary_precision(inner, dir)
                    .into_iter()
                    .map(|i2| Expr::anno(i2, a.clone())),
            );
            out
        }
        Expr::CaseOne(s, i, x, arm) => {
            let mut out: Vec<Expr> = vary_precision(s, dir)
                .into_iter()
                .map(|s2| Expr::case_one(s2, *i, x.clone(), (**arm).clone()))
                .collect();
            out.extend(
                vary_precision(arm, dir)
                    .into_iter()
                    .map(|a2| Expr::case_one((**s).clone(), *i, x.clone(), a2)),
            );
            out
        }
        Expr::CaseTwo(s, x1, a1, x2, a2) => {
            let mut out: Vec<Expr> = vary_precision(s, dir)
                .into_iter()
                .map(|s2| {
                    Expr::case_two(s2, x1.clone(), (**a1).clone(), x2.clone(), (**a2).clone())
                })
                .collect();
            out.extend(
                vary_precision(a1, dir).into_iter().map(|b| {
                    Expr::case_two((**s).clone(), x1.clone(), b, x2.clone(), (**a2).clone())
                }),
            );
            out.extend(
                vary_precision(a2, dir).into_iter().map(|b| {
                    Expr::case_two((**s).clone(), x1.clone(), (**a1).clone(), x2.clone(), b)
                }),
            );
            out
        }
    }
}

/// All contexts obtained by moving one constructor of one binding.
pub fn vary_ctx_precision(ctx: &Ctx, dir: VaryDirection) -> Vec<Ctx> {
    let pairs: Vec<(String, Type)> = ctx.iter().map(|(x, t)| (x.clone(), t.clone())).collect();
    let mut out = Vec::new();
    for (i, (_, t)) in pairs.iter().enumerate() {
        for t2 in vary_type_precision(t, dir) {
            let mut next = pairs.clone();
            next[i].1 = t2;
            out.push(Ctx::from_pairs(next));
        }
    }
    out
}

// ======================================================================
// Counterexample shrinking
// ======================================================================

fn proper_subterms(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    for c in e.children() {
        out.push(c.clone());
        out.extend(proper_subterms(c));
    }
    out
}

fn unit_replacements(e: &Expr) -> Vec<Expr> {
    // Every term obtained by replacing one subterm with ().
    fn rebuild(e: &Expr, out: &mut Vec<Expr>) {
        for (i, c) in e.children().iter().enumerate() {
            out.push(replace_child(e, i, Expr::UnitVal));
            let mut inner = Vec::new();
            rebuild(c, &mut inner);
            for sub in inner {
                out.push(replace_child(e, i, sub));
            }
        }
    }
    let mut out = Vec::new();
    rebuild(e, &mut out);
    out
}

fn replace_child(e: &Expr, idx: usize, sub: Expr) -> Expr {
    match (e, idx) {
        (Expr::Lam(x, _), 0) => Expr::lam(x.clone(), sub),
        (Expr::Inj(i, _), 0) => Expr::inj(*i, sub),
        (Expr::Anno(_, a), 0) => Expr::anno(sub, a.clone()),
        (Expr::App(_, a), 0) => Expr::app(sub, (**a).clone()),
        (Expr::App(f, _), 1) => Expr::app((**f).clone(), sub),
        (Expr::CaseOne(_, i, x, arm), 0) => Expr::case_one(sub, *i, x.clone(), (**arm).clone()),
        (Expr::CaseOne(s, i, x, _), 1) => Expr::case_one((**s).clone(), *i, x.clone(), sub),
        (Expr::CaseTwo(_, x1, a1, x2, a2), 0) => {
            Expr::case_two(sub, x1.clone(), (**a1).clone(), x2.clone(), (**a2).clone())
        }
        (Expr::CaseTwo(s, x1, _, x2, a2), 1) => {
            Expr::case_two((**s).clone(), x1.clone(), sub, x2.clone(), (**a2).clone())
        }
        (Expr::CaseTwo(s, x1, a1, x2, _), 2) => {
            Expr::case_two((**s).clone(), x1.clone(), (**a1).clone(), x2.clone(), sub)
        }
        _ => panic!("no child {idx} on {e}"),
    }
}

/// Greedily minimize a failing expression: repeatedly replace it with a
/// proper subterm, or a subterm with `()`, while `still_fails` holds.
/// Bounded to 1,000 candidate evaluations.
pub fn shrink_expr(e: &Expr, still_fails: &dyn Fn(&Expr) -> bool) -> Expr {
    let mut cur = e.clone();
    let mut budget = 1000usize;
    loop {
        let mut improved = false;
        let mut candidates = proper_subterms(&cur);
        candidates.extend(unit_replacements(&cur));
        candidates.sort_by_key(Expr::size);
        for cand in candidates {
            if budget == 0 {
                return cur;
            }
            budget -= 1;
            if cand.size() < cur.size() && still_fails(&cand) {
                cur = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            return cur;
        }
    }
}

// ======================================================================
// Coverage and reports
// ======================================================================

/// Counts of rule firings, keyed `bi/…`, `ta/…`, `tgt/…`, `step/…`,
/// plus `prop/…` counters for property instances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage(pub BTreeMap<String, u64>);

impl Coverage {
    pub fn record(&mut self, key: &str) {
        self.add(key, 1);
    }

    pub fn add(&mut self, key: &str, n: u64) {
        *self.0.entry(key.to_string()).or_insert(0) += n;
    }

    pub fn merge(&mut self, other: &Coverage) {
        for (k, v) in &other.0 {
            self.add(k, *v);
        }
    }

    pub fn record_bi(&mut self, d: &BiDerivation) {
        for node in d.nodes() {
            self.record(&format!("bi/{}", node.rule.as_str()));
        }
    }

    pub fn record_ta(&mut self, d: &crate::typecheck::TADerivation) {
        for node in d.nodes() {
            self.record(&format!("ta/{}", node.rule.as_str()));
        }
    }

    pub fn record_target(&mut self, m: &TargetTerm) {
        let key = match m {
            TargetTerm::TUnitVal => "tgt/Unit",
            TargetTerm::TVar(_) => "tgt/Var",
            TargetTerm::TLam(..) => "tgt/Lam",
            TargetTerm::TApp(..) => "tgt/App",
            TargetTerm::TInj(..) => "tgt/Inj",
            TargetTerm::Cast(..) => "tgt/Cast",
            TargetTerm::TCaseOne(..) => "tgt/CaseOne",
            TargetTerm::TCaseTwo(..) => "tgt/CaseTwo",
            TargetTerm::Matchfail => "tgt/Matchfail",
        };
        self.record(key);
        match m {
            TargetTerm::TLam(_, _, b) | TargetTerm::TInj(_, b) | TargetTerm::Cast(_, _, b) => {
                self.record_target(b)
            }
            TargetTerm::TApp(f, a) => {
                self.record_target(f);
                self.record_target(a);
            }
            TargetTerm::TCaseOne(s, _, _, arm) => {
                self.record_target(s);
                self.record_target(arm);
            }
            TargetTerm::TCaseTwo(s, _, a1, _, a2) => {
                self.record_target(s);
                self.record_target(a1);
                self.record_target(a2);
            }
            _ => {}
        }
    }

    pub fn record_trace(&mut self, t: &StepTrace) {
        for (rule, _) in &t.steps {
            self.record(&format!("step/{}", rule.as_str()));
        }
    }
}

/// One failed property instance, reproducible from its seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub case_index: usize,
    pub property: String,
    /// Minimized counterexample program (pretty-printed).
    pub program: String,
    pub detail: String,
}

/// The outcome of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub failures: Vec<Failure>,
    pub coverage: Coverage,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    /// The report with wall time zeroed, for reproducibility comparison.
    pub fn stable(&self) -> SuiteReport {
        SuiteReport {
            wall_ms: 0,
            ..self.clone()
        }
    }
}

pub const SUITE_NAMES: [&str; 6] = [
    "relations-oracle",
    "metatheory-typing",
    "metatheory-runtime",
    "translation",
    "precision-pipeline",
    "fragments",
];

/// Run one of the named property suites under `cfg`.
pub fn run_suite(name: &str, cfg: &GenConfig) -> Result<SuiteReport, String> {
    match name {
        "relations-oracle" => Ok(suite_relations_oracle(cfg)),
        "metatheory-typing" => Ok(suite_metatheory_typing(cfg)),
        "metatheory-runtime" => Ok(suite_metatheory_runtime(cfg)),
        "translation" => Ok(suite_translation(cfg)),
        "precision-pipeline" => Ok(suite_precision_pipeline(cfg)),
        "fragments" => Ok(suite_fragments(cfg)),
        other => Err(format!(
            "unknown suite '{other}'; expected one of: {}",
            SUITE_NAMES.join(", ")
        )),
    }
}

fn finish(
    suite: &str,
    cases: u64,
    failures: Vec<Failure>,
    coverage: Coverage,
    start: Instant,
) -> SuiteReport {
    SuiteReport {
        suite: suite.to_string(),
        cases,
        failures,
        coverage,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

// ======================================================================
// Suite: relations-oracle
// ======================================================================

/// Re-transcribed generating edges of the two constructor orders,
/// closed here by breadth-first search rather than the table closure.
fn oracle_subsum_edges() -> Vec<(SumCon, SumCon)> {
    use SumCon::*;
    vec![
        (PlusQ1, Plus1),
        (PlusQ2, Plus2),
        (PlusQ1, PlusQ),
        (PlusQ2, PlusQ),
        (Plus1, PlusStar1),
        (Plus2, PlusStar2),
        (PlusQ, PlusStar1),
        (PlusQ, PlusStar2),
        (PlusStar1, Plus),
        (PlusStar2, Plus),
    ]
}

fn oracle_precision_edges() -> Vec<(SumCon, SumCon)> {
    use SumCon::*;
    vec![
        (Plus1, PlusQ1),
        (Plus2, PlusQ2),
        (Plus1, PlusStar1),
        (Plus2, PlusStar2),
        (Plus, PlusQ),
        (PlusQ1, PlusQ),
        (PlusQ2, PlusQ),
        (PlusStar1, PlusQ),
        (PlusStar2, PlusQ),
    ]
}

fn bfs_closure(edges: &[(SumCon, SumCon)]) -> [[bool; 8]; 8] {
    let mut reach = [[false; 8]; 8];
    for start in SumCon::ALL {
        let mut frontier = vec![start];
        reach[start.code()][start.code()] = true;
        while let Some(cur) = frontier.pop() {
            for (a, b) in edges {
                if *a == cur && !reach[start.code()][b.code()] {
                    reach[start.code()][b.code()] = true;
                    frontier.push(*b);
                }
            }
        }
    }
    reach
}

/// Brute-force directed consistency over one same-shape class: for each
/// pair, search all precision-lowerings of both sides for a subtyping
/// bridge, using bitset rows to keep the search affordable.
fn dcons_brute_class(types: &[Type]) -> Vec<Vec<bool>> {
    let n = types.len();
    let words = n.div_ceil(64);
    let mut le_rows = vec![vec![0u64; words]; n];
    let mut down_rows = vec![vec![0u64; words]; n];
    let mut down_lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if subtype(&types[i], &types[j]) {
                le_rows[i][j / 64] |= 1 << (j % 64);
            }
            if type_precision(&types[j], &types[i]) {
                down_rows[i][j / 64] |= 1 << (j % 64);
                down_lists[i].push(j);
            }
        }
    }
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    down_lists[a].iter().any(|&a0| {
                        le_rows[a0]
                            .iter()
                            .zip(&down_rows[b])
                            .any(|(le, dn)| le & dn != 0)
                    })
                })
                .collect()
        })
        .collect()
}

fn suite_relations_oracle(_cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0u64;
    let coverage = Coverage::default();
    let mut fail = |property: &str, program: String, detail: String| {
        failures.push(Failure {
            seed: 0,
            case_index: 0,
            property: property.to_string(),
            program,
            detail,
        });
    };

    // Closure equality for both constructor orders.
    let sub_oracle = bfs_closure(&oracle_subsum_edges());
    let pre_oracle = bfs_closure(&oracle_precision_edges());
    for a in SumCon::ALL {
        for b in SumCon::ALL {
            cases += 2;
            if subsum(a, b) != sub_oracle[a.code()][b.code()] {
                fail(
                    "subsum-closure",
                    format!("{a} <= {b}"),
                    format!(
                        "table {} vs oracle {}",
                        subsum(a, b),
                        sub_oracle[a.code()][b.code()]
                    ),
                );
            }
            if sum_precision(a, b) != pre_oracle[a.code()][b.code()] {
                fail(
                    "precision-closure",
                    format!("{a} sqsubseteq {b}"),
                    format!(
                        "table {} vs oracle {}",
                        sum_precision(a, b),
                        pre_oracle[a.code()][b.code()]
                    ),
                );
            }
        }
    }

    // Pinned spot facts.
    let spots: [(&str, bool, bool); 4] = [
        (
            "subsum(+?2, +*1)",
            subsum(SumCon::PlusQ2, SumCon::PlusStar1),
            true,
        ),
        (
            "subsum(+?, +1)",
            subsum(SumCon::PlusQ, SumCon::Plus1),
            false,
        ),
        (
            "precision(+, +?)",
            sum_precision(SumCon::Plus, SumCon::PlusQ),
            true,
        ),
        (
            "precision(+?1, +*1)",
            sum_precision(SumCon::PlusQ1, SumCon::PlusStar1),
            false,
        ),
    ];
    for (name, got, want) in spots {
        cases += 1;
        if got != want {
            fail(
                "spot-fact",
                name.to_string(),
                format!("got {got}, want {want}"),
            );
        }
    }

    // Brute-force directed consistency over the depth-≤2 universe,
    // same-shape pair by same-shape pair.
    let universe = enum_types(2);
    let mut classes: BTreeMap<String, Vec<Type>> = BTreeMap::new();
    for t in &universe.types {
        classes.entry(shape_key(t)).or_default().push(t.clone());
    }
    let class_results: Vec<(u64, Vec<Failure>)> = classes
        .par_iter()
        .map(|(_, types)| {
            let oracle = dcons_brute_class(types);
            let mut local_failures = Vec::new();
            let mut local_cases = 0u64;
            for (i, a) in types.iter().enumerate() {
                for (j, b) in types.iter().enumerate() {
                    local_cases += 1;
                    if dcons(a, b) != oracle[i][j] {
                        local_failures.push(Failure {
                            seed: 0,
                            case_index: 0,
                            property: "dcons-brute-force".to_string(),
                            program: format!("{a}  ~>  {b}"),
                            detail: format!(
                                "structural {} vs brute-force {}",
                                dcons(a, b),
                                oracle[i][j]
                            ),
                        });
                    }
                }
            }
            (local_cases, local_failures)
        })
        .collect();
    for (c, fs) in class_results {
        cases += c;
        failures.extend(fs);
    }

    finish("relations-oracle", cases, failures, coverage, start)
}

// ======================================================================
// Shared corpus plumbing
// ======================================================================

/// Closed, synthesizable programs pinned into every runtime corpus so
/// all reduction rules fire at default scale.
pub fn pinned_programs() -> Vec<&'static str> {
    vec![
        "((fn y => case y of inj2 z => z) : (Unit +2 Unit) -> Unit) ((inj2 ()) : (Unit +2 Unit))",
        "((fn y => case y of inj2 z => z) : (Unit +2 Unit) -> Unit) ((inj2 ()) : (Unit +? Unit))",
        "((fn y => case y of inj2 z => z) : (Unit +? Unit) -> Unit) ((inj2 ()) : (Unit +2 Unit))",
        "((fn y => case y of inj2 z => z) : (Unit +? Unit) -> Unit) ((inj2 ()) : (Unit +? Unit))",
        "((fn y => case y of inj2 z => z) : (Unit +2 Unit) -> Unit) ((inj1 ()) : (Unit +? Unit))",
        "((case ((inj1 ()) : (Unit +? Unit)) of inj2 x => x) : Unit)",
        "((case ((inj1 ()) : (Unit +? Unit)) of inj1 x => inj1 x | inj2 x => inj2 x) : Unit +? Unit)",
        "((fn x => x) : Unit -> Unit) ()",
        "((inj1 ()) : Unit +1 Unit)",
        "((inj1 (fn x => x)) : ((Unit -> Unit) +?1 Unit))",
        "((case ((inj2 ()) : (Unit +*2 Unit)) of inj2 x => x) : Unit)",
    ]
}

fn closed_corpus(cfg: &GenConfig) -> Vec<GenCase> {
    let closed_cfg = GenConfig {
        ctx_vars: 0,
        ..cfg.clone()
    };
    let mut corpus = gen_welltyped(&closed_cfg);
    for (k, src) in pinned_programs().into_iter().enumerate() {
        let expr = parse_expr(src).expect("pinned program parses");
        let d = synth(&Ctx::empty(), &expr).expect("pinned program synthesizes");
        corpus.push(GenCase {
            index: closed_cfg.count + k,
            seed: 0,
            ctx: Ctx::empty(),
            expr,
            ty: d.ty,
            dir: Direction::Synth,
        });
    }
    corpus
}

fn derive(case: &GenCase) -> Result<BiDerivation, TypeError> {
    match case.dir {
        Direction::Check => check(&case.ctx, &case.expr, &case.ty),
        Direction::Synth => synth(&case.ctx, &case.expr),
    }
}

fn failure(case: &GenCase, property: &str, detail: String) -> Failure {
    Failure {
        seed: case.seed,
        case_index: case.index,
        property: property.to_string(),
        program: format!("{}", case.expr),
        detail,
    }
}

/// A failure whose program is first shrunk while `still_fails` holds.
fn shrunk_failure(
    case: &GenCase,
    property: &str,
    detail: String,
    still_fails: &dyn Fn(&Expr) -> bool,
) -> Failure {
    let small = shrink_expr(&case.expr, still_fails);
    Failure {
        seed: case.seed,
        case_index: case.index,
        property: property.to_string(),
        program: format!("{small}"),
        detail,
    }
}

// ======================================================================
// Suite: metatheory-typing
// ======================================================================

fn suite_metatheory_typing(cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let corpus = gen_welltyped(cfg);
    let outs: Vec<(Vec<Failure>, Coverage)> = corpus.par_iter().map(typing_case).collect();
    let mut failures = Vec::new();
    let mut coverage = Coverage::default();
    for (fs, cov) in outs {
        failures.extend(fs);
        coverage.merge(&cov);
    }
    finish(
        "metatheory-typing",
        corpus.len() as u64,
        failures,
        coverage,
        start,
    )
}

fn typing_case(case: &GenCase) -> (Vec<Failure>, Coverage) {
    let mut fs = Vec::new();
    let mut cov = Coverage::default();
    let d = match derive(case) {
        Ok(d) => d,
        Err(e) => {
            fs.push(failure(case, "typechecks", e.to_string()));
            return (fs, cov);
        }
    };
    cov.record_bi(&d);

    // Round-trip of the surface syntax (source half of the identity).
    match parse_expr(&format!("{}", case.expr)) {
        Ok(back) if back.alpha_eq(&case.expr) => cov.record("prop/roundtrip-source"),
        Ok(back) => fs.push(failure(
            case,
            "roundtrip-source",
            format!("reparsed to a different program: {back}"),
        )),
        Err(e) => fs.push(failure(case, "roundtrip-source", e.to_string())),
    }
    match parse_type(&format!("{}", case.ty)) {
        Ok(back) if back == case.ty => {}
        other => fs.push(failure(case, "roundtrip-type", format!("{other:?}"))),
    }

    // Syntax-directedness gives a hard size bound on derivations.
    if d.node_count() > 2 * case.expr.size() {
        fs.push(failure(
            case,
            "derivation-size",
            format!("{} nodes for size {}", d.node_count(), case.expr.size()),
        ));
    }

    // Embedding into the declarative system validates rule-by-rule.
    let ta = embed(&d);
    cov.record_ta(&ta);
    if let Err(e) = validate_assignment(&ta) {
        let ctx = case.ctx.clone();
        let ty = case.ty.clone();
        let dir = case.dir;
        fs.push(shrunk_failure(case, "embed-validates", e, &|e2| {
            let d2 = match dir {
                Direction::Check => check(&ctx, e2, &ty),
                Direction::Synth => synth(&ctx, e2),
            };
            d2.map(|d2| validate_assignment(&embed(&d2)).is_err())
                .unwrap_or(false)
        }));
    }

    // Annotation recovers a synthesizing program of the same type.
    let (annotated, _) = annotate(&ta);
    match synth(&case.ctx, &annotated) {
        Ok(d2) if d2.ty == d.ty && eq_anno(&case.expr, &annotated) => {
            cov.record("prop/annotate-synthesizes")
        }
        Ok(d2) => fs.push(failure(
            case,
            "annotate-synthesizes",
            format!(
                "annotated program {annotated} synthesized {} (want {}), eq_anno {}",
                d2.ty,
                d.ty,
                eq_anno(&case.expr, &annotated)
            ),
        )),
        Err(e) => fs.push(failure(
            case,
            "annotate-synthesizes",
            format!("annotated program {annotated} rejected: {e}"),
        )),
    }

    // Loosening any one precision site preserves typing; loosened
    // synthesis can only move up the imprecision order.
    let mut loosenings: Vec<(Ctx, Expr, Type)> = Vec::new();
    for ctx2 in vary_ctx_precision(&case.ctx, VaryDirection::Loosen) {
        loosenings.push((ctx2, case.expr.clone(), case.ty.clone()));
    }
    for e2 in vary_precision(&case.expr, VaryDirection::Loosen) {
        loosenings.push((case.ctx.clone(), e2, case.ty.clone()));
    }
    if case.dir == Direction::Check {
        for ty2 in vary_type_precision(&case.ty, VaryDirection::Loosen) {
            loosenings.push((case.ctx.clone(), case.expr.clone(), ty2));
        }
    }
    for (ctx2, e2, ty2) in loosenings {
        cov.record("prop/varying-precision-instances");
        match case.dir {
            Direction::Check => {
                if let Err(e) = check(&ctx2, &e2, &ty2) {
                    fs.push(failure(
                        case,
                        "varying-precision-check",
                        format!("loosened program {e2} no longer checks against {ty2}: {e}"),
                    ));
                }
            }
            Direction::Synth => match synth(&ctx2, &e2) {
                Ok(d2) if type_precision(&d.ty, &d2.ty) => {}
                Ok(d2) => fs.push(failure(
                    case,
                    "varying-precision-synth",
                    format!("loosened type {} is not above {}", d2.ty, d.ty),
                )),
                Err(e) => fs.push(failure(
                    case,
                    "varying-precision-synth",
                    format!("loosened program {e2} no longer synthesizes: {e}"),
                )),
            },
        }
    }

    // Committed inputs never mention uncommitted constructors in their
    // derivations (contexts, subjects, and types of every node).
    if case.ctx.is_static() && case.expr.is_static() && case.ty.is_static() {
        cov.record("prop/subformula-witness");
        for node in d.nodes() {
            let mentions: Vec<SumCon> = node
                .ty
                .sum_cons()
                .into_iter()
                .chain(node.expr.sum_cons())
                .chain(node.ctx.iter().flat_map(|(_, t)| t.sum_cons()))
                .filter(|c| !c.is_static())
                .collect();
            if !mentions.is_empty() {
                fs.push(failure(
                    case,
                    "subformula-witness",
                    format!("derivation node mentions {mentions:?}"),
                ));
                break;
            }
        }
    }

    (fs, cov)
}

// ======================================================================
// Suite: metatheory-runtime
// ======================================================================

const STEP_BUDGET: usize = 1_000_000;

fn suite_metatheory_runtime(cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let corpus = closed_corpus(cfg);
    // Exhaustive small closed programs diversify the generated corpus.
    let annos = enum_types(1).types;
    let small: Vec<GenCase> = enum_exprs_upto(&Ctx::empty(), 5, &annos)
        .into_iter()
        .filter_map(|e| synth(&Ctx::empty(), &e).ok().map(|d| (e, d.ty)))
        .enumerate()
        .map(|(k, (expr, ty))| GenCase {
            index: usize::MAX - k,
            seed: 0,
            ctx: Ctx::empty(),
            expr,
            ty,
            dir: Direction::Synth,
        })
        .collect();
    let all: Vec<&GenCase> = corpus.iter().chain(small.iter()).collect();
    let outs: Vec<(Vec<Failure>, Coverage)> =
        all.par_iter().map(|case| runtime_case(case)).collect();
    let mut failures = Vec::new();
    let mut coverage = Coverage::default();
    for (fs, cov) in outs {
        failures.extend(fs);
        coverage.merge(&cov);
    }
    finish(
        "metatheory-runtime",
        all.len() as u64,
        failures,
        coverage,
        start,
    )
}

fn runtime_case(case: &GenCase) -> (Vec<Failure>, Coverage) {
    let mut fs = Vec::new();
    let mut cov = Coverage::default();
    let d = match derive(case) {
        Ok(d) => d,
        Err(e) => {
            fs.push(failure(case, "typechecks", e.to_string()));
            return (fs, cov);
        }
    };
    let m = elaborate(&d, Mode::Standard);
    cov.record_target(&m);
    let pure = !contains_cast(&m) && !contains_matchfail(&m);

    let empty = TargetCtx::empty();
    let mut ty = match target_typecheck(&empty, &m) {
        Ok(t) => t,
        Err(e) => {
            fs.push(failure(case, "target-typechecks", e.to_string()));
            return (fs, cov);
        }
    };
    let mut cur = m;
    let mut steps = 0usize;
    loop {
        // Unique decomposition backs determinism: the context must
        // rebuild the term it was split from.
        match decompose(&cur) {
            Decomposition::Value => break,
            Decomposition::Matchfail(ctx) if ctx.is_empty() => break,
            Decomposition::Matchfail(ctx) => {
                if ctx.plug(TargetTerm::Matchfail) != cur {
                    fs.push(failure(case, "unique-decomposition", format!("{cur}")));
                    return (fs, cov);
                }
            }
            Decomposition::Redex(ctx, r) => {
                if ctx.plug(r) != cur {
                    fs.push(failure(case, "unique-decomposition", format!("{cur}")));
                    return (fs, cov);
                }
            }
            Decomposition::Stuck => {
                fs.push(failure(case, "progress", format!("stuck at {cur}")));
                return (fs, cov);
            }
        }
        let next = match (step(&cur), step(&cur)) {
            (a, b) if a != b => {
                fs.push(failure(case, "determinism", format!("{cur}")));
                return (fs, cov);
            }
            (Step::Next { term, rule }, _) => {
                cov.record(&format!("step/{}", rule.as_str()));
                term
            }
            (Step::Terminal, _) => break,
            (Step::Stuck, _) => {
                fs.push(failure(case, "progress", format!("stuck at {cur}")));
                return (fs, cov);
            }
        };
        let next_ty = match target_typecheck(&empty, &next) {
            Ok(t) => t,
            Err(e) => {
                fs.push(failure(
                    case,
                    "preservation",
                    format!("step result untypable: {e} at {next}"),
                ));
                return (fs, cov);
            }
        };
        if !target_subtype(&next_ty, &ty) {
            fs.push(failure(
                case,
                "preservation",
                format!("type rose from {ty} to {next_ty}"),
            ));
            return (fs, cov);
        }
        if pure && (contains_cast(&next) || contains_matchfail(&next)) {
            fs.push(failure(
                case,
                "matchfail-freeness",
                format!("pure program reached {next}"),
            ));
            return (fs, cov);
        }
        ty = next_ty;
        cur = next;
        steps += 1;
        if steps > STEP_BUDGET {
            fs.push(failure(case, "termination", format!("{}", case.expr)));
            return (fs, cov);
        }
    }
    cov.record_target(&cur);
    if pure && !is_value(&cur) {
        fs.push(failure(
            case,
            "matchfail-freeness",
            format!("pure program ended at {cur}"),
        ));
    }
    (fs, cov)
}

// ======================================================================
// Suite: translation
// ======================================================================

fn value_shape(m: &TargetTerm) -> String {
    match m {
        TargetTerm::TUnitVal => "()".to_string(),
        TargetTerm::TLam(..) => "fn".to_string(),
        TargetTerm::TInj(i, p) => format!("inj{i} {}", value_shape(p)),
        other => format!("?{other}"),
    }
}

fn verdict_shape(v: &Verdict) -> String {
    match v {
        Verdict::Value(w) => format!("value {}", value_shape(w)),
        Verdict::Matchfail => "matchfail".to_string(),
        Verdict::BudgetExceeded => "budget-exceeded".to_string(),
    }
}

fn suite_translation(cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let corpus = closed_corpus(cfg);
    let outs: Vec<(Vec<Failure>, Coverage)> = corpus.par_iter().map(translation_case).collect();
    let mut failures = Vec::new();
    let mut coverage = Coverage::default();
    let mut cases = corpus.len() as u64;
    for (fs, cov) in outs {
        failures.extend(fs);
        coverage.merge(&cov);
    }

    // Coercions between all consistent same-shape pairs in the depth-≤2
    // universe typecheck at the translated right-hand type.
    let universe = enum_types(2);
    let mut classes: BTreeMap<String, Vec<Type>> = BTreeMap::new();
    for t in &universe.types {
        classes.entry(shape_key(t)).or_default().push(t.clone());
    }
    let coercion_outs: Vec<(u64, Vec<Failure>)> = classes
        .par_iter()
        .map(|(_, types)| {
            let mut local = Vec::new();
            let mut n = 0u64;
            for a in types {
                for b in types {
                    if !dcons(a, b) {
                        continue;
                    }
                    n += 1;
                    for mode in [Mode::Standard, Mode::Saturating] {
                        let filled = coerce(a, b, mode).fill(TargetTerm::var("subject"));
                        let ctx = TargetCtx::from_pairs([("subject".to_string(), ty_trans(a))]);
                        match target_typecheck(&ctx, &filled) {
                            Ok(t) if target_subtype(&t, &ty_trans(b)) => {}
                            Ok(t) => local.push(Failure {
                                seed: 0,
                                case_index: 0,
                                property: "coercion-typing".to_string(),
                                program: format!("{a}  ~>  {b}"),
                                detail: format!(
                                    "coercion has type {t}, want at most {}",
                                    ty_trans(b)
                                ),
                            }),
                            Err(e) => local.push(Failure {
                                seed: 0,
                                case_index: 0,
                                property: "coercion-typing".to_string(),
                                program: format!("{a}  ~>  {b}"),
                                detail: e.to_string(),
                            }),
                        }
                    }
                }
            }
            (n, local)
        })
        .collect();
    for (n, fs) in coercion_outs {
        cases += n;
        failures.extend(fs);
    }

    finish("translation", cases, failures, coverage, start)
}

fn translation_case(case: &GenCase) -> (Vec<Failure>, Coverage) {
    let mut fs = Vec::new();
    let mut cov = Coverage::default();
    let d = match derive(case) {
        Ok(d) => d,
        Err(e) => {
            fs.push(failure(case, "typechecks", e.to_string()));
            return (fs, cov);
        }
    };
    let expected = ty_trans(&d.ty);
    let empty = TargetCtx::empty();
    let mut verdicts = Vec::new();
    for mode in [Mode::Standard, Mode::Saturating] {
        let m = elaborate(&d, mode);
        // Translation soundness at the translated type.
        match target_typecheck(&empty, &m) {
            Ok(t) if target_subtype(&t, &expected) => cov.record("prop/translation-soundness"),
            Ok(t) => fs.push(failure(
                case,
                "translation-soundness",
                format!("{mode:?} elaboration has type {t}, want at most {expected}"),
            )),
            Err(e) => fs.push(failure(
                case,
                "translation-soundness",
                format!("{mode:?} elaboration untypable: {e}"),
            )),
        }
        // Target round-trip (target half of the parse/print identity).
        match parse_target(&format!("{m}")) {
            Ok(back) if back.alpha_eq(&m) => cov.record("prop/roundtrip-target"),
            Ok(back) => fs.push(failure(
                case,
                "roundtrip-target",
                format!("{m} reparsed as {back}"),
            )),
            Err(e) => fs.push(failure(case, "roundtrip-target", format!("{m}: {e}"))),
        }
        let (verdict, trace) = evaluate(&m, STEP_BUDGET, true);
        if let Some(t) = trace {
            cov.record_trace(&t);
        }
        verdicts.push(verdict);
    }
    // The two modes are observationally indistinguishable.
    let (std_v, sat_v) = (&verdicts[0], &verdicts[1]);
    if verdict_shape(std_v) != verdict_shape(sat_v) {
        fs.push(failure(
            case,
            "mode-agreement",
            format!(
                "standard {} vs saturating {}",
                verdict_shape(std_v),
                verdict_shape(sat_v)
            ),
        ));
    }
    (fs, cov)
}

// ======================================================================
// Suite: precision-pipeline
// ======================================================================

/// Per-case cap on loosened partners, to keep default runs inside the
/// time budget while still counting thousands of pairs.
const PAIR_CAP: usize = 8;

fn suite_precision_pipeline(cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let corpus = closed_corpus(cfg);
    let outs: Vec<(Vec<Failure>, Coverage)> = corpus.par_iter().map(pipeline_case).collect();
    let mut failures = Vec::new();
    let mut coverage = Coverage::default();
    for (fs, cov) in outs {
        failures.extend(fs);
        coverage.merge(&cov);
    }
    finish(
        "precision-pipeline",
        corpus.len() as u64,
        failures,
        coverage,
        start,
    )
}

fn pipeline_case(case: &GenCase) -> (Vec<Failure>, Coverage) {
    let mut fs = Vec::new();
    let mut cov = Coverage::default();
    // Work from a checking judgment: the generated goal type checks both
    // the original and its loosenings.
    let tight = match check(&case.ctx, &case.expr, &case.ty) {
        Ok(d) => d,
        Err(_) => match derive(case) {
            Ok(d) => d,
            Err(e) => {
                fs.push(failure(case, "typechecks", e.to_string()));
                return (fs, cov);
            }
        },
    };
    let m_tight = elaborate(&tight, Mode::Saturating);

    let mut partners: Vec<(Expr, Type)> = vary_precision(&case.expr, VaryDirection::Loosen)
        .into_iter()
        .map(|e2| (e2, case.ty.clone()))
        .collect();
    partners.extend(
        vary_type_precision(&case.ty, VaryDirection::Loosen)
            .into_iter()
            .map(|t2| (case.expr.clone(), t2)),
    );
    partners.truncate(PAIR_CAP);

    for (loose_e, loose_ty) in partners {
        cov.record("prop/precision-pairs");
        let loose = match check(&case.ctx, &loose_e, &loose_ty) {
            Ok(d) => d,
            Err(e) => {
                fs.push(failure(
                    case,
                    "pipeline-loosening-checks",
                    format!("loosened {loose_e} against {loose_ty}: {e}"),
                ));
                continue;
            }
        };
        let m_loose = elaborate(&loose, Mode::Saturating);
        if !term_precision(&m_tight, &m_loose) {
            fs.push(failure(
                case,
                "translation-preserves-precision",
                format!("{m_tight}\n  is not below\n{m_loose}"),
            ));
            continue;
        }
        if let Some(f) = co_step(case, &m_tight, &m_loose) {
            fs.push(f);
        } else {
            cov.record("prop/co-stepping");
        }
    }
    (fs, cov)
}

/// Drive the committed side and hold the loose side to the stepping
/// trichotomy; on convergence of the committed side, require the loose
/// side to converge with the same top-level injection index.
fn co_step(case: &GenCase, m_tight: &TargetTerm, m_loose: &TargetTerm) -> Option<Failure> {
    let mut a = m_tight.clone();
    let mut b = m_loose.clone();
    for _ in 0..STEP_BUDGET {
        let a2 = match step(&a) {
            Step::Terminal => break,
            Step::Stuck => {
                return Some(failure(
                    case,
                    "co-stepping",
                    format!("committed side stuck: {a}"),
                ))
            }
            Step::Next { term, .. } => term,
        };
        // Trichotomy: a terminal loose side must already dominate; a
        // stepping loose side must dominate after its own step.
        match step(&b) {
            Step::Terminal => {
                if !term_precision(&a2, &b) {
                    return Some(failure(
                        case,
                        "step-precision",
                        format!("{a2}\n  escaped terminal loose side\n{b}"),
                    ));
                }
            }
            Step::Stuck => {
                return Some(failure(
                    case,
                    "co-stepping",
                    format!("loose side stuck: {b}"),
                ))
            }
            Step::Next { term: b2, .. } => {
                if !term_precision(&a2, &b2) {
                    return Some(failure(
                        case,
                        "step-precision",
                        format!("{a2}\n  is not below\n{b2}"),
                    ));
                }
                b = b2;
            }
        }
        a = a2;
    }
    if is_value(&a) {
        // Convergence respect: the loose side must converge too.
        let (verdict, _) = evaluate(&b, STEP_BUDGET, false);
        match verdict {
            Verdict::Value(w) => {
                if let (TargetTerm::TInj(i, _), TargetTerm::TInj(k, _)) = (&a, &w) {
                    if i != k {
                        return Some(failure(
                            case,
                            "convergence-respect",
                            format!("indices disagree: inj{i} vs inj{k}"),
                        ));
                    }
                }
            }
            other => {
                return Some(failure(
                    case,
                    "convergence-respect",
                    format!(
                        "committed side converged, loose side {}",
                        verdict_shape(&other)
                    ),
                ))
            }
        }
    }
    None
}

// ======================================================================
// Suite: fragments
// ======================================================================

fn static_con_swaps(e: &Expr) -> Vec<Expr> {
    // Replace one constructor of one annotation with any other
    // constructor of the same sublanguage, well-typed or not.
    fn swap_type(t: &Type) -> Vec<Type> {
        match t {
            Type::Unit => vec![],
            Type::Sum(l, con, r) => {
                let mut out: Vec<Type> = [SumCon::Plus, SumCon::Plus1, SumCon::Plus2]
                    .into_iter()
                    .filter(|c| c != con)
                    .map(|c| Type::sum((**l).clone(), c, (**r).clone()))
                    .collect();
                out.extend(
                    swap_type(l)
                        .into_iter()
                        .map(|l2| Type::sum(l2, *con, (**r).clone())),
                );
                out.extend(
                    swap_type(r)
                        .into_iter()
                        .map(|r2| Type::sum((**l).clone(), *con, r2)),
                );
                out
            }
            Type::Arrow(d, c) => {
                let mut out: Vec<Type> = swap_type(d)
                    .into_iter()
                    .map(|d2| Type::arrow(d2, (**c).clone()))
                    .collect();
                out.extend(
                    swap_type(c)
                        .into_iter()
                        .map(|c2| Type::arrow((**d).clone(), c2)),
                );
                out
            }
        }
    }
    fn walk(e: &Expr) -> Vec<Expr> {
        let mut out = Vec::new();
        if let Expr::Anno(inner, a) = e {
            out.extend(
                swap_type(a)
                    .into_iter()
                    .map(|a2| Expr::anno((**inner).clone(), a2)),
            );
        }
        for (i, c) in e.children().iter().enumerate() {
            for c2 in walk(c) {
                out.push(replace_child(e, i, c2));
            }
        }
        out
    }
    walk(e)
}

fn suite_fragments(cfg: &GenConfig) -> SuiteReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut coverage = Coverage::default();
    let mut cases = 0u64;

    for fragment in [FragmentFilter::Static, FragmentFilter::Dynamic] {
        let frag_cfg = GenConfig {
            fragment,
            count: cfg.count / 2,
            ..cfg.clone()
        };
        let corpus = gen_welltyped(&frag_cfg);
        cases += corpus.len() as u64;
        let outs: Vec<(Vec<Failure>, Coverage)> = corpus
            .par_iter()
            .map(|case| fragment_case(case, fragment))
            .collect();
        for (fs, cov) in outs {
            failures.extend(fs);
            coverage.merge(&cov);
        }
    }

    // Committed programs cannot fail: closed static programs elaborate
    // cast-free and run to values.
    let static_closed = GenConfig {
        fragment: FragmentFilter::Static,
        ctx_vars: 0,
        count: cfg.count / 2,
        ..cfg.clone()
    };
    let corpus = gen_welltyped(&static_closed);
    cases += corpus.len() as u64;
    let outs: Vec<Vec<Failure>> = corpus
        .par_iter()
        .map(|case| {
            let mut fs = Vec::new();
            let d = match derive(case) {
                Ok(d) => d,
                Err(e) => {
                    fs.push(failure(case, "typechecks", e.to_string()));
                    return fs;
                }
            };
            let m = elaborate(&d, Mode::Standard);
            if contains_cast(&m) || contains_matchfail(&m) {
                fs.push(failure(case, "static-elaboration-pure", format!("{m}")));
                return fs;
            }
            match evaluate(&m, STEP_BUDGET, false).0 {
                Verdict::Value(_) => {}
                other => fs.push(failure(
                    case,
                    "static-programs-terminate",
                    verdict_shape(&other),
                )),
            }
            fs
        })
        .collect();
    for fs in outs {
        failures.extend(fs);
    }
    coverage.add("prop/static-programs-run", corpus.len() as u64);

    finish("fragments", cases, failures, coverage, start)
}

fn fragment_case(case: &GenCase, fragment: FragmentFilter) -> (Vec<Failure>, Coverage) {
    let mut fs = Vec::new();
    let mut cov = Coverage::default();
    let frag_check = match fragment {
        FragmentFilter::Static => check_static,
        _ => check_dynamic,
    };
    let frag_synth = match fragment {
        FragmentFilter::Static => synth_static,
        _ => synth_dynamic,
    };
    // Agreement on the generated program and on nearby mutants, which
    // need not be well-typed.
    let mut probes: Vec<Expr> = vec![case.expr.clone()];
    if fragment == FragmentFilter::Static {
        probes.extend(static_con_swaps(&case.expr).into_iter().take(8));
    }
    for probe in probes {
        cov.record("prop/fragment-correspondence");
        match case.dir {
            Direction::Check => {
                let full = check(&case.ctx, &probe, &case.ty);
                let frag = frag_check(&case.ctx, &probe, &case.ty);
                if full.is_ok() != frag.is_ok() {
                    fs.push(failure(
                        case,
                        "fragment-correspondence",
                        format!(
                            "{probe}: full {} vs {} {}",
                            full.is_ok(),
                            fragment.as_str(),
                            frag.is_ok()
                        ),
                    ));
                }
            }
            Direction::Synth => {
                let full = synth(&case.ctx, &probe);
                let frag = frag_synth(&case.ctx, &probe);
                match (&full, &frag) {
                    (Ok(a), Ok(b)) if a.ty == b.ty => {}
                    (Err(_), Err(_)) => {}
                    _ => fs.push(failure(
                        case,
                        "fragment-correspondence",
                        format!(
                            "{probe}: full {:?} vs {} {:?}",
                            full.map(|d| d.ty),
                            fragment.as_str(),
                            frag.map(|d| d.ty)
                        ),
                    )),
                }
            }
        }
    }
    (fs, cov)
}
