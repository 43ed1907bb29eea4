use codebadger_checks::criteria;

fn check(o: criteria::Outcome) {
    println!("{}", o.line());
    assert!(o.passed, "{}", o.line());
}

#[test]
fn taint_oracle_equivalence() {
    check(criteria::taint_oracle_equivalence());
}

#[test]
fn path_cap_semantics() {
    check(criteria::path_cap_semantics());
}

#[test]
fn slice_fixpoint() {
    check(criteria::slice_fixpoint());
}

#[test]
fn slice_reduction() {
    check(criteria::slice_reduction());
}

#[test]
fn dataflow_control_oracles() {
    check(criteria::dataflow_control_oracles());
}

#[test]
fn bounds_check_ordering() {
    check(criteria::bounds_check_ordering());
}

#[test]
fn cache_correctness() {
    check(criteria::cache_correctness());
}

#[test]
fn async_equivalence() {
    check(criteria::async_equivalence());
}

#[test]
fn workflow_replay() {
    check(criteria::workflow_replay());
}
