use super::*;
use crate::metrics::tokenize;
use crate::primitives::Address;

fn identity() -> ContractIdentity {
    ContractIdentity {
        name: "Foo".into(),
        deployer: Address([1; 20]),
    }
}

fn scan(i: u32, src: &str) -> VersionDebt {
    scan_source(i, src, &KeywordList::default()).unwrap()
}

#[test]
fn detection_examples() {
    let k = KeywordList::default();
    let s = tokenize("uint a; // todo: this should be external\nuint b; // calculates interest\n// prefix sums here");
    let found = detect_satd(&s.comments, &k);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].comment_text, "// todo: this should be external");
    assert_eq!(found[0].matched_keyword, "todo");
}

#[test]
fn one_instance_per_comment() {
    let s = tokenize("// TODO fixme workaround\n/* wip */");
    let found = detect_satd(&s.comments, &KeywordList::default());
    assert_eq!(found.len(), 2);
    assert_eq!(found[0].matched_keyword, "todo");
    assert_eq!(found[1].matched_keyword, "wip");
}

#[test]
fn snippet_inside_function_is_body() {
    let src = "contract C {\n function f() public {\n  // todo: check overflow\n  x = x + 1;\n }\n}";
    let v = scan(1, src);
    assert_eq!(v.instances.len(), 1);
    assert_eq!(v.instances[0].location, "f");
    assert_eq!(v.instances[0].snippet, "x = x + 1 ;");
}

#[test]
fn snippet_above_contract_is_contract_block() {
    let src = "pragma solidity ^0.8.0;\n// todo: split this contract\ncontract C {\n uint a; // trailing\n}\n";
    let v = scan(1, src);
    assert_eq!(v.instances[0].location, FILE_SCOPE);
    assert_eq!(v.instances[0].snippet, "contract C { uint a ; }");
}

#[test]
fn snippet_for_state_variable_is_next_statement() {
    let src = "contract C {\n // fixme: wrong type\n uint8 a;\n uint b;\n}";
    assert_eq!(scan(1, src).instances[0].snippet, "uint8 a ;");
}

#[test]
fn trailing_comment_has_empty_snippet() {
    let src = "contract C {}\n// todo: later";
    let v = scan(1, src);
    assert_eq!(v.instances[0].snippet, "");
    let src = "contract C {\n uint a;\n // todo: more state\n}";
    assert_eq!(scan(1, src).instances[0].snippet, "");
}

fn kinds(t: &DebtTimeline, v: usize) -> Vec<DebtEventKind> {
    t.per_version[v].events.iter().map(|e| e.kind).collect()
}

#[test]
fn removal_with_rewrite_is_resolved() {
    let v1 = scan(1, "contract C { function f() public { // todo: optimise\n x = 1; } }");
    let v2 = scan(2, "contract C { function f() public { x = 2; } }");
    let t = track_evolution(identity(), &[v1, v2]);
    assert_eq!(kinds(&t, 1), vec![DebtEventKind::Resolved]);
}

#[test]
fn removal_without_code_change_is_inconsistent() {
    let v1 = scan(1, "contract C { function f() public { // todo: optimise\n x = 1; } }");
    let v2 = scan(2, "contract C {\n  function f() public {\n    x = 1;\n  }\n}");
    let t = track_evolution(identity(), &[v1, v2]);
    assert_eq!(kinds(&t, 1), vec![DebtEventKind::InconsistentCommentRemoval]);
}

#[test]
fn kept_comment_with_rewrite_persists() {
    let v1 = scan(1, "contract C { function f() public { // todo: optimise\n x = 1; } }");
    let v2 = scan(2, "contract C { function f() public { // todo: optimise\n x = 3; } }");
    let t = track_evolution(identity(), &[v1, v2]);
    assert_eq!(kinds(&t, 1), vec![DebtEventKind::PersistsDespiteCodeChange]);
}

#[test]
fn unchanged_and_introduced() {
    let v1 = scan(1, "contract C { function f() public { // todo: a\n x = 1; } }");
    let v2 = scan(
        2,
        "contract C { function f() public { // todo: a\n x = 1; } // wip\n function g() public {} }",
    );
    let t = track_evolution(identity(), &[v1, v2]);
    assert_eq!(kinds(&t, 1), vec![DebtEventKind::Introduced]);
    assert_eq!(t.per_version[1].events[0].comment_text, "// wip");
}

#[test]
fn file_scope_removal_checks_snippet_presence() {
    let v1 = scan(1, "contract C {\n // fixme: wrong type\n uint8 a;\n}");
    let same = scan(2, "contract C {\n uint8 a;\n}");
    let changed = scan(2, "contract C {\n uint256 a;\n}");
    assert_eq!(
        kinds(&track_evolution(identity(), &[v1.clone(), same]), 1),
        vec![DebtEventKind::InconsistentCommentRemoval]
    );
    assert_eq!(
        kinds(&track_evolution(identity(), &[v1, changed]), 1),
        vec![DebtEventKind::Resolved]
    );
}

#[test]
fn duplicates_match_positionally() {
    let v1 = scan(1, "contract C {\n // todo\n uint a;\n // todo\n uint b;\n}");
    let v2 = scan(2, "contract C {\n // todo\n uint a;\n uint b;\n}");
    let t = track_evolution(identity(), &[v1, v2]);
    // The second occurrence disappears; its snippet `uint b ;` is still there.
    assert_eq!(t.per_version[1].events.len(), 1);
    assert_eq!(t.per_version[1].events[0].occurrence, 1);
    assert_eq!(
        t.per_version[1].events[0].kind,
        DebtEventKind::InconsistentCommentRemoval
    );
}

#[test]
fn single_version_has_no_events() {
    let t = track_evolution(identity(), &[scan(1, "// todo\ncontract C {}")]);
    assert!(t.per_version[0].events.is_empty());
    assert_eq!(t.initial_debt(), 1);
}

fn timeline_with(initial: usize, resolved: bool) -> DebtTimeline {
    let inst = SatdInstance {
        comment_text: "// todo".into(),
        matched_keyword: "todo".into(),
        snippet: String::new(),
        location: FILE_SCOPE.into(),
        line: 1,
    };
    let mut per_version = vec![VersionTimeline {
        version_index: 1,
        instances: vec![inst; initial],
        events: vec![],
    }];
    if resolved {
        per_version.push(VersionTimeline {
            version_index: 2,
            instances: vec![],
            events: vec![DebtEvent {
                kind: DebtEventKind::Resolved,
                comment_text: "// todo".into(),
                occurrence: 0,
            }],
        });
    }
    DebtTimeline {
        family: identity(),
        per_version,
    }
}

#[test]
fn stats_mean_and_median() {
    let ts: Vec<DebtTimeline> = [0, 1, 0, 1, 1, 2].iter().map(|&n| timeline_with(n, false)).collect();
    let s = debt_stats::<f64>(&ts).unwrap();
    assert!((s.mean_initial_debt - 5.0 / 6.0).abs() < 1e-12);
    assert!((s.mean_initial_debt - 0.833).abs() < 1e-3);
    assert_eq!(s.median_initial_debt, 1.0);
}

#[test]
fn stats_removal_percentage() {
    let mut ts: Vec<DebtTimeline> = (0..15).map(|_| timeline_with(1, false)).collect();
    ts.push(timeline_with(2, true));
    ts.push(timeline_with(0, false));
    let s = debt_stats::<f64>(&ts).unwrap();
    assert_eq!(s.families_with_initial_debt, 16);
    assert_eq!(s.families_with_removal, 1);
    assert_eq!(s.pct_with_removal, 6.25);
    assert!(!s.removal_undefined);
}

#[test]
fn stats_degenerate_and_empty() {
    let ts: Vec<DebtTimeline> = (0..4).map(|_| timeline_with(0, false)).collect();
    let s = debt_stats::<f64>(&ts).unwrap();
    assert_eq!(
        (s.mean_initial_debt, s.median_initial_debt, s.pct_with_removal),
        (0.0, 0.0, 0.0)
    );
    assert!(s.removal_undefined);
    assert_eq!(debt_stats::<f64>(&[]), Err(SatdError::EmptyInput));
}
