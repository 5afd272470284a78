//! End-to-end acceptance checks. Each numbered test pins one headline
//! guarantee of the implementation at full default scale and reports a
//! single pass/fail line; the property suites behind them are shared
//! across tests and run once.

use std::sync::OnceLock;
use std::time::Instant;

use gradsum_core::elaborate;
use gradsum_core::target;
use gradsum_core::typecheck;
use gradsum_core::*;

// ======================================================================
// Shared suite reports
// ======================================================================

fn suite(name: &'static str) -> &'static SuiteReport {
    static RELATIONS: OnceLock<SuiteReport> = OnceLock::new();
    static TYPING: OnceLock<SuiteReport> = OnceLock::new();
    static RUNTIME: OnceLock<SuiteReport> = OnceLock::new();
    static TRANSLATION: OnceLock<SuiteReport> = OnceLock::new();
    static PIPELINE: OnceLock<SuiteReport> = OnceLock::new();
    static FRAGMENTS: OnceLock<SuiteReport> = OnceLock::new();
    let slot = match name {
        "relations-oracle" => &RELATIONS,
        "metatheory-typing" => &TYPING,
        "metatheory-runtime" => &RUNTIME,
        "translation" => &TRANSLATION,
        "precision-pipeline" => &PIPELINE,
        "fragments" => &FRAGMENTS,
        other => panic!("no acceptance suite named {other}"),
    };
    slot.get_or_init(|| run_suite(name, &GenConfig::default()).unwrap())
}

/// The failures in `r` whose property is one of `props`.
fn failures_for<'a>(r: &'a SuiteReport, props: &[&str]) -> Vec<&'a Failure> {
    r.failures
        .iter()
        .filter(|f| props.contains(&f.property.as_str()))
        .collect()
}

fn assert_clean(r: &SuiteReport, props: &[&str]) {
    let bad = failures_for(r, props);
    assert!(
        bad.is_empty(),
        "{}: {} failures: {:#?}",
        r.suite,
        bad.len(),
        &bad[..bad.len().min(3)]
    );
}

fn covered(r: &SuiteReport, key: &str) -> u64 {
    r.coverage.0.get(key).copied().unwrap_or(0)
}

fn pass(n: u32, what: &str, detail: String) {
    println!("criterion {n:02}: PASS — {what}: {detail}");
}

// ======================================================================
// 1. Constructor orders
// ======================================================================

/// Independent reflexive-transitive closure of an edge list over the
/// eight constructors, by repeated relational composition.
fn closure(edges: &[(SumCon, SumCon)]) -> [[bool; 8]; 8] {
    let mut r = [[false; 8]; 8];
    for c in SumCon::ALL {
        r[c.code()][c.code()] = true;
    }
    for (a, b) in edges {
        r[a.code()][b.code()] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..8 {
            for j in 0..8 {
                if !r[i][j] && (0..8).any(|k| r[i][k] && r[k][j]) {
                    r[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

#[test]
fn criterion_01_constructor_orders_match_independent_closures() {
    use SumCon::*;
    let start = Instant::now();
    let sub = closure(&[
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
    ]);
    let pre = closure(&[
        (Plus1, PlusQ1),
        (Plus2, PlusQ2),
        (Plus1, PlusStar1),
        (Plus2, PlusStar2),
        (Plus, PlusQ),
        (PlusQ1, PlusQ),
        (PlusQ2, PlusQ),
        (PlusStar1, PlusQ),
        (PlusStar2, PlusQ),
    ]);
    for a in SumCon::ALL {
        for b in SumCon::ALL {
            assert_eq!(subsum(a, b), sub[a.code()][b.code()], "subsum({a}, {b})");
            assert_eq!(
                sum_precision(a, b),
                pre[a.code()][b.code()],
                "sum_precision({a}, {b})"
            );
        }
    }
    assert!(subsum(PlusQ2, PlusStar1));
    assert!(!subsum(PlusQ, Plus1));
    assert!(sum_precision(Plus, PlusQ));
    assert!(!sum_precision(PlusQ1, PlusStar1));
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1, "took {elapsed:?}");
    assert_clean(
        suite("relations-oracle"),
        &["subsum-closure", "precision-closure", "spot-fact"],
    );
    pass(
        1,
        "constructor orders",
        format!("128 closure entries and 4 spot facts in {elapsed:?}"),
    );
}

// ======================================================================
// 2. Directed consistency vs brute force
// ======================================================================

#[test]
fn criterion_02_consistency_agrees_with_brute_force_search() {
    let r = suite("relations-oracle");
    assert_clean(r, &["dcons-brute-force"]);
    assert!(
        r.cases > 100_000,
        "expected every same-shape pair of the depth-2 universe, got {}",
        r.cases
    );
    assert!(r.wall_ms < 30_000, "took {} ms", r.wall_ms);
    pass(
        2,
        "directed consistency",
        format!(
            "{} pairs against exhaustive search in {} ms",
            r.cases, r.wall_ms
        ),
    );
}

// ======================================================================
// 3. The migration example
// ======================================================================

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn criterion_03_migration_example_typechecks_casts_and_runs() {
    let start = Instant::now();
    let variants = [
        "migration_f2_x2.gsum",
        "migration_f2_xq.gsum",
        "migration_fq_x2.gsum",
        "migration_fq_xq.gsum",
    ];
    for name in variants {
        let e = parse_expr(&golden(name)).unwrap();
        let d = synth(&Ctx::empty(), &e).unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(d.ty, Type::Unit, "{name}");
        let m = elaborate::elaborate(&d, Mode::Standard);
        let (verdict, _) = evaluate(&m, 10_000, false);
        assert!(
            matches!(verdict, Verdict::Value(TargetTerm::TUnitVal)),
            "{name}: {verdict:?}"
        );
    }

    // The mixed variant bridges the unknown producer to the committed
    // consumer with one consistent-subsumption step.
    let src = golden("migration_f2_xq.gsum");
    let e = parse_expr(&src).unwrap();
    let d = synth(&Ctx::empty(), &e).unwrap();
    let unknown = parse_type("Unit +? Unit").unwrap();
    let committed = parse_type("Unit +2 Unit").unwrap();
    let bridge = d.nodes().into_iter().any(|n| {
        n.rule == typecheck::BiRule::ChkCSub
            && n.side
                == Some(typecheck::SideFact::Dcons(
                    unknown.clone(),
                    committed.clone(),
                ))
    });
    assert!(
        bridge,
        "no consistent-subsumption node from {unknown} to {committed}"
    );

    let m = elaborate::elaborate(&d, Mode::Standard);
    assert_eq!(
        format!("{m}"),
        golden("migration_f2_xq.expected.txt").trim(),
        "elaboration drifted from the pinned expectation"
    );

    // The inserted cast commits at run time: the matching injection
    // passes, the other aborts.
    let twin = src.replacen("inj2 ()", "inj1 ()", 1);
    assert_ne!(twin, src);
    let e1 = parse_expr(&twin).unwrap();
    let d1 = synth(&Ctx::empty(), &e1).unwrap();
    let m1 = elaborate::elaborate(&d1, Mode::Standard);
    let (verdict, _) = evaluate(&m1, 10_000, false);
    assert!(matches!(verdict, Verdict::Matchfail), "{verdict:?}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1, "took {elapsed:?}");
    pass(
        3,
        "migration example",
        format!("4 variants typecheck, cast commits and aborts, in {elapsed:?}"),
    );
}

// ======================================================================
// 4–6, 12. The typing corpus
// ======================================================================

#[test]
fn criterion_04_derivations_stay_linear_in_program_size() {
    let r = suite("metatheory-typing");
    assert_clean(r, &["derivation-size"]);
    assert_eq!(r.cases, 10_000);
    pass(
        4,
        "derivation size",
        format!("node count ≤ 2 × program size on {} programs", r.cases),
    );
}

#[test]
fn criterion_05_bidirectional_embeds_and_reannotates() {
    let r = suite("metatheory-typing");
    assert_clean(r, &["embed-validates", "annotate-synthesizes"]);
    assert_eq!(covered(r, "prop/annotate-synthesizes"), r.cases);
    pass(
        5,
        "embedding round trip",
        format!(
            "{} derivations validate declaratively and re-annotate to the same type",
            r.cases
        ),
    );
}

#[test]
fn criterion_06_loosening_precision_preserves_typing() {
    let r = suite("metatheory-typing");
    assert_clean(r, &["varying-precision-check", "varying-precision-synth"]);
    let instances = covered(r, "prop/varying-precision-instances");
    assert!(instances >= 10_000, "only {instances} loosened instances");
    assert!(r.wall_ms < 300_000, "took {} ms", r.wall_ms);
    pass(
        6,
        "varying precision",
        format!(
            "{instances} one-step loosenings keep typing, in {} ms",
            r.wall_ms
        ),
    );
}

#[test]
fn criterion_12_printing_and_parsing_are_inverse() {
    let typing = suite("metatheory-typing");
    let translation = suite("translation");
    assert_clean(typing, &["roundtrip-source", "roundtrip-type"]);
    assert_clean(translation, &["roundtrip-target"]);
    let source = covered(typing, "prop/roundtrip-source");
    let target = covered(translation, "prop/roundtrip-target");
    assert_eq!(source, typing.cases);
    assert!(target >= 2 * 10_000, "only {target} target round trips");
    pass(
        12,
        "round trips",
        format!("{source} source and {target} target terms reparse to themselves"),
    );
}

// ======================================================================
// 7, 9. Fragments
// ======================================================================

#[test]
fn criterion_07_fragment_checkers_agree_with_the_full_system() {
    let r = suite("fragments");
    assert_clean(r, &["fragment-correspondence"]);
    let probes = covered(r, "prop/fragment-correspondence");
    assert!(probes >= 10_000, "only {probes} probes");
    pass(
        7,
        "fragment correspondence",
        format!("{probes} programs and mutants decided identically with equal types"),
    );
}

#[test]
fn criterion_09_committed_programs_never_fail() {
    let r = suite("fragments");
    assert_clean(r, &["static-elaboration-pure", "static-programs-terminate"]);
    let runs = covered(r, "prop/static-programs-run");
    assert!(runs >= 1_000, "only {runs} runs");
    pass(
        9,
        "committed programs",
        format!("{runs} cast-free elaborations all reached values"),
    );
}

// ======================================================================
// 8. Translation soundness and mode agreement
// ======================================================================

#[test]
fn criterion_08_elaboration_is_type_sound_and_mode_agnostic() {
    let r = suite("translation");
    assert_clean(
        r,
        &["translation-soundness", "mode-agreement", "coercion-typing"],
    );
    let sound = covered(r, "prop/translation-soundness");
    assert!(sound >= 2 * 10_000, "only {sound} soundness checks");
    pass(
        8,
        "translation",
        format!(
            "{sound} elaborations typecheck at the translated type; both modes agree on {} programs",
            sound / 2
        ),
    );
}

// ======================================================================
// 10. Runtime metatheory
// ======================================================================

#[test]
fn criterion_10_runtime_metatheory_holds_on_closed_programs() {
    let r = suite("metatheory-runtime");
    assert!(
        r.failures.is_empty(),
        "{} failures: {:#?}",
        r.failures.len(),
        &r.failures[..r.failures.len().min(3)]
    );
    assert!(r.cases >= 10_000, "only {} programs", r.cases);
    pass(
        10,
        "runtime metatheory",
        format!(
            "preservation, progress, determinism, termination on {} programs",
            r.cases
        ),
    );
}

// ======================================================================
// 11. Precision as a runtime simulation
// ======================================================================

#[test]
fn criterion_11_precision_is_a_simulation_at_runtime() {
    let r = suite("precision-pipeline");
    assert_clean(
        r,
        &[
            "pipeline-loosening-checks",
            "translation-preserves-precision",
            "step-precision",
            "co-stepping",
            "convergence-respect",
        ],
    );
    let pairs = covered(r, "prop/precision-pairs");
    assert!(pairs >= 1_000, "only {pairs} pairs");
    assert!(r.wall_ms < 300_000, "took {} ms", r.wall_ms);
    pass(
        11,
        "runtime precision",
        format!(
            "{pairs} program pairs co-step inside the precision order, in {} ms",
            r.wall_ms
        ),
    );
}

// ======================================================================
// Coverage union
// ======================================================================

#[test]
fn all_rules_fire_at_default_scale() {
    let mut union = Coverage::default();
    for name in SUITE_NAMES {
        union.merge(&suite(name).coverage);
    }
    let mut missing: Vec<String> = Vec::new();
    for rule in typecheck::BiRule::ALL {
        let key = format!("bi/{}", rule.as_str());
        if !union.0.contains_key(&key) {
            missing.push(key);
        }
    }
    for rule in typecheck::TARule::ALL {
        let key = format!("ta/{}", rule.as_str());
        if !union.0.contains_key(&key) {
            missing.push(key);
        }
    }
    for rule in target::StepRule::ALL {
        let key = format!("step/{}", rule.as_str());
        if !union.0.contains_key(&key) {
            missing.push(key);
        }
    }
    for form in [
        "Unit",
        "Var",
        "Lam",
        "App",
        "Inj",
        "Cast",
        "CaseOne",
        "CaseTwo",
        "Matchfail",
    ] {
        let key = format!("tgt/{form}");
        if !union.0.contains_key(&key) {
            missing.push(key);
        }
    }
    assert!(missing.is_empty(), "rules never fired: {missing:?}");
}

// ======================================================================
// Suite hygiene
// ======================================================================

#[test]
fn all_suites_run_clean_at_default_scale() {
    for name in SUITE_NAMES {
        let r = suite(name);
        assert!(
            r.ok(),
            "{name}: {} failures: {:#?}",
            r.failures.len(),
            &r.failures[..r.failures.len().min(3)]
        );
    }
}
