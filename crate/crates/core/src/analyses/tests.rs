use super::*;
use crate::cpg::build_cpg;
use crate::frontend::SourceFile;
use crate::glob::Glob;

fn cpg_of(src: &str) -> Cpg {
    build_cpg(vec![SourceFile::new("t.c", src)])
}

fn cfg() -> SourceSinkConfig {
    SourceSinkConfig::default()
}

fn at(cpg: &Cpg, line: u32) -> NodeId {
    resolve_point(cpg, "t.c", line, None).unwrap()
}

#[test]
fn sink_spec_parsing() {
    let s = SinkSpec::parse("memcpy:1|2").unwrap();
    assert_eq!(s.args, ArgSelector::Positions(vec![1, 2]));
    assert_eq!(s.to_string(), "memcpy:1|2");
    assert_eq!(SinkSpec::parse("sprintf:*").unwrap().args, ArgSelector::All);
    assert_eq!(SinkSpec::parse("exec").unwrap().args, ArgSelector::All);
    assert!(SinkSpec::parse("x:a").is_err());
    assert!(SinkSpec::parse(":1").is_err());
    assert_eq!(SinkSpec::parse("strcpy:1|2").unwrap().relevant(2), vec![1]);
}

#[test]
fn sources_single_read() {
    let cpg = cpg_of("int f() {\n  char buf[8];\n  int n = read(0, buf, 8);\n  return n;\n}");
    let src = find_taint_sources(&cpg, &cfg()).unwrap();
    assert_eq!(src.len(), 1);
    assert_eq!(src[0].point.line, 3);
    assert_eq!(src[0].tainted, ["buf", "n"]);
}

#[test]
fn sources_none_and_empty_config() {
    let cpg = cpg_of("int f() { return 0; }");
    assert!(find_taint_sources(&cpg, &cfg()).unwrap().is_empty());
    let empty = SourceSinkConfig {
        sources: Vec::new(),
        sinks: Vec::new(),
    };
    assert_eq!(find_taint_sources(&cpg, &empty).unwrap_err().code(), "config_error");
    assert_eq!(find_taint_sinks(&cpg, &empty).unwrap_err().code(), "config_error");
}

#[test]
fn sources_sorted_by_file() {
    let cpg = build_cpg(vec![
        SourceFile::new("z.c", "int g() { int p = getenv(1); return p; }"),
        SourceFile::new("a.c", "int f() { int q = getenv(2); return q; }"),
    ]);
    let src = find_taint_sources(&cpg, &cfg()).unwrap();
    let files: Vec<_> = src.iter().map(|s| s.point.file.as_str()).collect();
    assert_eq!(files, ["a.c", "z.c"]);
}

#[test]
fn sinks_examples() {
    let cpg = cpg_of("int f(char d[], char s[], int n) { memcpy(d, s, n); return 0; }");
    let sinks = find_taint_sinks(&cpg, &cfg()).unwrap();
    assert_eq!(sinks.len(), 1);
    assert_eq!(sinks[0].relevant_args, [1, 2]);
    assert!(find_taint_sinks(&build_cpg(Vec::new()), &cfg()).unwrap().is_empty());
    let cpg = cpg_of("int f(char c[]) { system(c); exec(c); return 0; }");
    assert_eq!(find_taint_sinks(&cpg, &cfg()).unwrap().len(), 2);
}

#[test]
fn flow_read_to_system() {
    let cpg = cpg_of("int f() { char buf[8]; int n = read(0, buf, 8); system(buf); return 0; }");
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows.len(), 1);
    let p = &flows[0];
    assert_eq!(p.source.code, "read(0, buf, 8)");
    assert_eq!(p.sink.code, "system(buf)");
    assert_eq!(p.length, 1);
    assert_eq!(p.steps[1].variable.as_deref(), Some("buf"));
    assert_eq!(p.steps[1].edge, Some(StepEdge::ReachingDef));
}

#[test]
fn flow_disconnected() {
    let cpg = cpg_of("int f() { char a[8]; char b[8]; read(0, a, 8); system(b); return 0; }");
    assert!(find_taint_flows(&cpg, &cfg(), 10).is_empty());
}

#[test]
fn flow_nested_source_is_zero_length() {
    let cpg = cpg_of("int f() { system(getenv(1)); return 0; }");
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows.len(), 1);
    assert_eq!(flows[0].length, 0);
}

#[test]
fn flow_cap_keeps_shortest() {
    let src = "int f() {\n  int a = getenv(1);\n  int b = a + 1;\n  int c = b + 1;\n  system(c);\n  system(b);\n  system(a);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let all = find_taint_flows(&cpg, &cfg(), 100);
    assert_eq!(all.len(), 3);
    let lens: Vec<_> = all.iter().map(|p| p.length).collect();
    assert_eq!(lens, [1, 2, 3]);
    let two = find_taint_flows(&cpg, &cfg(), 2);
    assert_eq!(two, all[..2]);
    let sinks: Vec<_> = two.iter().map(|p| p.sink.line).collect();
    assert_eq!(sinks, [7, 6]);
}

#[test]
fn flow_into_callee() {
    let src =
        "int run(int v) {\n  system(v);\n  return 0;\n}\nint main() {\n  int a = getenv(1);\n  run(a);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows.len(), 1);
    let edges: Vec<_> = flows[0].steps.iter().map(|s| s.edge).collect();
    assert_eq!(edges, [None, Some(StepEdge::ParamBinding), Some(StepEdge::ReachingDef)]);
    assert_eq!(flows[0].steps[1].variable.as_deref(), Some("v"));
}

#[test]
fn flow_back_through_array_argument() {
    let src = "int fill(char p[]) {\n  read(0, p, 8);\n  return 0;\n}\nint main() {\n  char buf[8];\n  fill(buf);\n  system(buf);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows.len(), 1);
    let edges: Vec<_> = flows[0].steps.iter().map(|s| s.edge).collect();
    assert_eq!(
        edges,
        [
            None,
            Some(StepEdge::ReachingDef),
            Some(StepEdge::ReturnBinding),
            Some(StepEdge::ReachingDef)
        ]
    );
}

#[test]
fn flow_return_value_used_directly() {
    let src = "int src() {\n  return getenv(1);\n}\nint main() {\n  system(src());\n  return 0;\n}";
    let cpg = cpg_of(src);
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows.len(), 1);
    assert_eq!(flows[0].sink.line, 5);
}

#[test]
fn flow_records_control_governors() {
    let src = "int f(int c) {\n  int a = getenv(1);\n  if (c) {\n    system(a);\n  }\n  return 0;\n}";
    let cpg = cpg_of(src);
    let flows = find_taint_flows(&cpg, &cfg(), 10);
    assert_eq!(flows[0].steps.last().unwrap().control, [3]);
}

#[test]
fn slice_single_statement() {
    let cpg = cpg_of("int f() {\n  int x = 1;\n}");
    let s = get_program_slice(&cpg, at(&cpg, 2));
    assert_eq!(s.points, [at(&cpg, 2)]);
}

#[test]
fn slice_excludes_independent() {
    let src = "int f() {\n  int x = 1;\n  int y = x + 2;\n  int z = 5;\n  sink(y);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let s = get_program_slice(&cpg, at(&cpg, 5));
    let lines: Vec<_> = s.lines.iter().map(|l| l.line).collect();
    assert_eq!(lines, [2, 3, 5]);
    assert_eq!(
        s.code,
        "// f (t.c)\nt.c:2:   int x = 1;\nt.c:3:   int y = x + 2;\nt.c:5:   sink(y);\n"
    );
}

#[test]
fn slice_includes_control() {
    let src = "int f(int c) {\n  int x = 3;\n  int y = 0;\n  if (c)\n    y = x;\n  sink(y);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let s = get_program_slice(&cpg, at(&cpg, 6));
    let lines: Vec<_> = s.lines.iter().map(|l| l.line).collect();
    assert_eq!(lines, [1, 2, 3, 4, 5, 6]);
}

#[test]
fn slice_crosses_into_caller_control() {
    let src = "int g(int v) {\n  sink(v);\n  return 0;\n}\nint main(int k) {\n  int q = 5;\n  if (k > 1)\n    g(q);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let s = get_program_slice(&cpg, at(&cpg, 2));
    let lines: Vec<_> = s.lines.iter().map(|l| l.line).collect();
    // The call statement also receives g's return value.
    assert_eq!(lines, [1, 2, 3, 5, 6, 7, 8]);
}

#[test]
fn unresolved_point() {
    let cpg = cpg_of("int f() {\n  return 0;\n}\n\n");
    let err = resolve_point(&cpg, "t.c", 4, None).unwrap_err();
    assert_eq!(err.code(), "unresolved_point");
    assert!(resolve_point(&cpg, "nope.c", 1, None).is_err());
}

#[test]
fn point_prefers_outer_statement_and_column() {
    let cpg = cpg_of("int f(int c) { if (c) x = g(1); y = 2; }");
    let p = resolve_point(&cpg, "t.c", 1, None).unwrap();
    assert_eq!(cpg.node(p).kind, NodeKind::ControlStructure);
    let col = "int f(int c) { if (c) x = g(1); y".len() as u32;
    let p = resolve_point(&cpg, "t.c", 1, Some(col)).unwrap();
    assert_eq!(cpg.node(p).code, "y = 2");
    let col = "int f(int c) { if (c) x = g".len() as u32;
    let p = resolve_point(&cpg, "t.c", 1, Some(col)).unwrap();
    assert_eq!(cpg.node(p).code, "x = g(1)");
}

#[test]
fn deps_examples() {
    let cpg = cpg_of("int f() {\n  int x = 1;\n  int y = x;\n  return 0;\n}");
    let d = get_data_dependencies(&cpg, at(&cpg, 3), Direction::Backward, 1, None);
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].point.line, d[0].variable.as_str(), d[0].hop), (2, "x", 1));
    assert!(get_data_dependencies(&cpg, at(&cpg, 2), Direction::Backward, 1, None).is_empty());

    let cpg = cpg_of("int f() {\n  int a = 1;\n  int b = a;\n  int c = b;\n  return c;\n}");
    let d = get_data_dependencies(&cpg, at(&cpg, 4), Direction::Backward, 2, None);
    let got: Vec<_> = d.iter().map(|d| (d.point.line, d.variable.as_str(), d.hop)).collect();
    assert_eq!(got, [(3, "b", 1), (2, "a", 2)]);
    let fwd = get_data_dependencies(&cpg, at(&cpg, 2), Direction::Forward, 3, None);
    let got: Vec<_> = fwd.iter().map(|d| (d.point.line, d.hop)).collect();
    assert_eq!(got, [(3, 1), (4, 2), (5, 3)]);
}

#[test]
fn deps_variable_filter() {
    let cpg = cpg_of("int f() {\n  int a = 1;\n  int b = 2;\n  int c = a + b;\n  return c;\n}");
    let d = get_data_dependencies(&cpg, at(&cpg, 4), Direction::Backward, 1, Some("b"));
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].point.line, 3);
}

#[test]
fn bounds_check_before_use() {
    let cpg = cpg_of("int f(char a[], int i, int n) {\n  if (i < n) a[i] = 0;\n  return 0;\n}");
    let r = find_bounds_checks(&cpg, "t.c", 2, None).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert!(r.checks[0].dominates_access);
    assert_eq!(r.checks[0].relation, "<");
}

#[test]
fn bounds_check_after_use() {
    let cpg = cpg_of("int f(char a[], int i, int n) {\n  a[i] = 0;\n  if (i < n) g();\n  return 0;\n}");
    let r = find_bounds_checks(&cpg, "t.c", 2, None).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert!(!r.checks[0].dominates_access);
}

#[test]
fn bounds_no_checks_and_errors() {
    let cpg = cpg_of("int f(char a[], int i) {\n  a[i] = 0;\n  int k = 1;\n  return 0;\n}");
    assert!(find_bounds_checks(&cpg, "t.c", 2, None).unwrap().checks.is_empty());
    let err = find_bounds_checks(&cpg, "t.c", 3, None).unwrap_err();
    assert_eq!(err.code(), "not_a_bounds_context");
    assert_eq!(
        find_bounds_checks(&cpg, "t.c", 9, None).unwrap_err().code(),
        "unresolved_point"
    );
}

#[test]
fn bounds_through_size_definition() {
    let src = "int f(char d[], char s[], int m) {\n  int n = m + 1;\n  if (m > 8) return 0;\n  memcpy(d, s, n);\n  return 1;\n}";
    let cpg = cpg_of(src);
    let r = find_bounds_checks(&cpg, "t.c", 4, None).unwrap();
    assert_eq!(r.tracked, ["m", "n"]);
    assert_eq!(r.checks.len(), 1);
    assert!(r.checks[0].dominates_access);
}

const CALLS: &str = "int g() { return 0; }\nint f() { return g(); }\nint main() { f(); return 0; }\nint r(int n) { return r(n); }\nint iso() { return 1; }";

#[test]
fn call_graph_examples() {
    let cpg = cpg_of(CALLS);
    let cg = get_call_graph(&cpg, "main", 2).unwrap();
    let edges: Vec<_> = cg
        .edges
        .iter()
        .map(|e| (e.caller.as_str(), e.callee.as_str()))
        .collect();
    assert_eq!(edges, [("main", "f"), ("f", "g")]);
    let cg = get_call_graph(&cpg, "main", 0).unwrap();
    assert!(cg.edges.is_empty());
    assert_eq!(cg.methods.len(), 1);
    let cg = get_call_graph(&cpg, "r", 5).unwrap();
    assert_eq!(cg.edges.len(), 1);
    assert_eq!((cg.edges[0].caller.as_str(), cg.edges[0].callee.as_str()), ("r", "r"));
    assert_eq!(get_call_graph(&cpg, "zz", 1).unwrap_err().code(), "unknown_method");
}

#[test]
fn reachability_examples() {
    let cpg = cpg_of(CALLS);
    let r = check_reachability(&cpg, "main", "main").unwrap();
    assert_eq!(r.path.unwrap(), ["main"]);
    assert!(!check_reachability(&cpg, "main", "iso").unwrap().reachable);
    let r = check_reachability(&cpg, "main", "g").unwrap();
    assert_eq!(r.path.unwrap(), ["main", "f", "g"]);
    assert!(check_reachability(&cpg, "main", "zz").is_err());
}

#[test]
fn list_methods_examples() {
    let cpg = cpg_of("int gtTileContig() { return 0; }\nint gtStripContig() { return 0; }\nint other() { return 0; }");
    assert_eq!(list_methods(&cpg, &Glob::new("*")).len(), 3);
    assert!(list_methods(&cpg, &Glob::new("zz*")).is_empty());
    let names: Vec<_> = list_methods(&cpg, &Glob::new("gt*"))
        .into_iter()
        .map(|m| m.name)
        .collect();
    assert_eq!(names, ["gtTileContig", "gtStripContig"]);
}

#[test]
fn method_source_examples() {
    let src = "int f(int a) {\n  return a;\n}\n";
    let cpg = cpg_of(src);
    let m = get_method_source(&cpg, "f", None).unwrap();
    assert_eq!(m.source, src.trim_end());
    assert_eq!(m.numbered, "   1 | int f(int a) {\n   2 |   return a;\n   3 | }\n");
    assert_eq!(get_method_source(&cpg, "g", None).unwrap_err().code(), "unknown_method");
    let cpg = build_cpg(vec![
        SourceFile::new("a.c", "int f() { return 0; }"),
        SourceFile::new("b.c", "int f() { return 1; }"),
    ]);
    let err = get_method_source(&cpg, "f", None).unwrap_err();
    assert_eq!(err.code(), "ambiguous_method");
    assert_eq!(err.detail()["candidates"].as_array().unwrap().len(), 2);
    assert_eq!(
        get_method_source(&cpg, "f", Some("b.c")).unwrap().source,
        "int f() { return 1; }"
    );
}

#[test]
fn list_calls_examples() {
    let src = "int f(char d[], char s[]) {\n  memcpy(d, s, 4);\n  memcpy(d, s, 8);\n  return 0;\n}\nint g(char d[]) {\n  memcpy(d, d, 1);\n  return 0;\n}";
    let cpg = cpg_of(src);
    let calls = list_calls(&cpg, &Glob::new("memcpy"), Some("f")).unwrap();
    let lines: Vec<_> = calls.iter().map(|c| c.line).collect();
    assert_eq!(lines, [2, 3]);
    assert_eq!(calls[0].args, ["d", "s", "4"]);
    assert_eq!(list_calls(&cpg, &Glob::new("memcpy"), None).unwrap().len(), 3);
    assert!(list_calls(&cpg, &Glob::new("strcpy"), None).unwrap().is_empty());
    assert!(list_calls(&cpg, &Glob::new("*"), Some("nope")).is_err());
}

#[test]
fn snippet_examples() {
    let src = "l1\nl2\nl3\nl4\nl5\nl6\n";
    let cpg = build_cpg(vec![SourceFile::new("t.c", src)]);
    assert_eq!(get_code_snippet(&cpg, "t.c", 1, 6).unwrap().code, src);
    assert_eq!(get_code_snippet(&cpg, "t.c", 3, 5).unwrap().code, "l3\nl4\nl5\n");
    assert_eq!(get_code_snippet(&cpg, "t.c", 0, 2).unwrap_err().code(), "range_error");
    assert!(get_code_snippet(&cpg, "t.c", 4, 3).is_err());
    assert!(get_code_snippet(&cpg, "t.c", 1, 7).is_err());
}

#[test]
fn literal_examples() {
    let cpg = cpg_of("int f() { char b[8]; g(\"/tmp/path\", \"x\", 80); return 0; }");
    let hits = search_literals(&cpg, &Glob::new("8"), LiteralKind::Int);
    assert_eq!(hits.len(), 1);
    assert!(search_literals(&cpg_of("int f() { return g(); }"), &Glob::new("*"), LiteralKind::Any).is_empty());
    let hits = search_literals(&cpg, &Glob::new("*path*"), LiteralKind::String);
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].value, "/tmp/path");
    assert!(search_literals(&cpg, &Glob::new("*path*"), LiteralKind::Int).is_empty());
}

#[test]
fn summary_examples() {
    let s = get_codebase_summary(&build_cpg(Vec::new()));
    assert_eq!((s.files, s.methods, s.call_sites, s.loc), (0, 0, 0, 0));
    let cpg = cpg_of("int f() { read(0, 0, 1); return g(); }\nint g() { return f(); }");
    let s = get_codebase_summary(&cpg);
    assert_eq!((s.methods, s.call_sites), (2, 3));
    assert_eq!(s.external_callees, ["read"]);
}

#[test]
fn query_examples() {
    let src = "int f(int n) {\n  int m = n * 2;\n  int p = malloc(m);\n  int q = malloc(8);\n  return p + q;\n}";
    let cpg = cpg_of(src);
    let q = StructuredQuery {
        kind: Some("Call".into()),
        name_glob: Some("malloc".into()),
        ..Default::default()
    };
    let r = run_structured_query(&cpg, &q, 100).unwrap();
    assert_eq!(r.nodes.len(), 2);
    assert!(!r.truncated);
    let none = StructuredQuery {
        name_glob: Some("zz".into()),
        ..Default::default()
    };
    assert!(run_structured_query(&cpg, &none, 100).unwrap().nodes.is_empty());
    let back = StructuredQuery {
        expand: Some(Expansion {
            edge_kind: "REACHING_DEF".into(),
            direction: Direction::Backward,
            depth: 1,
        }),
        ..q.clone()
    };
    let r = run_structured_query(&cpg, &back, 100).unwrap();
    let lines: Vec<_> = r.nodes.iter().map(|n| n.line).collect();
    assert_eq!(lines, [2]);
    let r = run_structured_query(&cpg, &q, 1).unwrap();
    assert!(r.truncated);
    assert_eq!(r.total, 2);
    let bad = StructuredQuery {
        kind: Some("Bogus".into()),
        ..Default::default()
    };
    assert_eq!(run_structured_query(&cpg, &bad, 1).unwrap_err().code(), "query_error");
}
