//! A reference implementation of a call-by-value lambda calculus with
//! graded sum types, where each sum constructor records how much is
//! known about which injections can actually occur.
//!
//! ```text
//! A +  B    either injection, nothing ruled out
//! A +1 B    committed: only inj1 values
//! A +2 B    committed: only inj2 values
//! A +? B    unknown: commitment deferred to run time
//! A +?1 B   unknown, but evidence says inj1 was built
//! A +?2 B   unknown, but evidence says inj2 was built
//! A +*1 B   one-armed inj1 matching allowed, may fail
//! A +*2 B   one-armed inj2 matching allowed, may fail
//! ```
//!
//! The crate provides, in dependency order:
//!
//! - [`syntax`] — source and target trees, parsers, and printers;
//! - [`relations`] — the constructor orders (subsumption, imprecision),
//!   subtyping, precision, and directed consistency;
//! - [`typecheck`] — the bidirectional checker for the full language and
//!   its committed/uncommitted sublanguages, plus the declarative type
//!   assignment system and translations between the two;
//! - [`elaborate`] — translation into a three-constructor target
//!   language, inserting casts where committed and uncommitted types
//!   meet (or everywhere, in saturating mode);
//! - [`target`] — the target language: principal types, the small-step
//!   evaluator, and the term precision order;
//! - [`harness`] — exhaustive enumerators, a seeded generator of
//!   well-typed programs, independent oracles, and the property suites.

pub mod syntax;

pub mod relations;

pub mod typecheck;

pub mod elaborate;

pub mod target;

pub mod harness;

pub use syntax::ast::{
    Coercion, Ctx, EvalContext, Expr, Frame, Index, SumCon, TargetCtx, TargetSum, TargetTerm,
    TargetType, Type,
};
pub use syntax::parser::{
    parse_expr, parse_expr_with_spans, parse_target, parse_target_type, parse_type, ParseError,
    Span, SpanTree,
};

pub use relations::{
    cast_class, cast_precision, ctx_precision, dcons, dcons_sum, expr_precision, subsum, subtype,
    sum_precision, sum_synth, target_subsum, target_subtype, type_precision, CastClass,
};

pub use typecheck::{
    annotate, check, check_dynamic, check_static, embed, eq_anno, synth, synth_dynamic,
    synth_static, validate_assignment, BiDerivation, BiRule, Direction, SideFact, TADerivation,
    TARule, TypeError, TypeErrorKind,
};

pub use elaborate::{
    coerce, coerce_sum, elab_check, elab_synth, elaborate, sum_trans, ty_trans, Mode,
};

pub use target::{
    contains_cast, contains_matchfail, decompose, evaluate, is_value, reduce, step,
    target_typecheck, term_precision, Decomposition, Step, StepRule, StepTrace, TargetTypeError,
    Verdict,
};

pub use harness::{
    enum_exprs, enum_types, gen_welltyped, run_suite, shrink_expr, vary_ctx_precision,
    vary_precision, vary_type_precision, Coverage, Failure, FragmentFilter, GenCase, GenConfig,
    SuiteReport, TypeUniverse, VaryDirection, SUITE_NAMES,
};
