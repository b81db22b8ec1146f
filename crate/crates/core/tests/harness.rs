mod common;

use std::io::ErrorKind;
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use eipe_core::harness::{synthesize_driver, CompileOutcome, RunStatus};
use eipe_core::{Problem, ResourceLimits, VerdictKind};

fn problem(id: &str) -> Arc<Problem> {
    common::bank().get(id).unwrap().clone()
}

fn short_limits() -> ResourceLimits {
    ResourceLimits {
        run_timeout_per_case: Duration::from_millis(300),
        ..ResourceLimits::default()
    }
}

const FIRST_ZERO: &str = "int foo(int a[], int n) {\n    for (int i = 0; i < n; i++) if (a[i] == 0) return i;\n    return -1;\n}\n";

#[test]
fn self_judgment_passes() {
    let p = problem("index-last-zero");
    let v = common::harness()
        .judge_problem("c", &p.reference_source, &p.reference_source, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass);
    assert_eq!(v.case_results.len(), p.test_suite.len());
}

#[test]
fn first_zero_candidate_fails_on_the_two_zero_case() {
    let p = problem("index-last-zero");
    let v = common::harness()
        .judge_problem("c", &p.reference_source, FIRST_ZERO, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::TestFail);
    let c0 = &v.case_results[0];
    assert_eq!(p.test_suite[0].args[0], eipe_core::Value::IntArray(vec![1, 0, 3, 0, 5]));
    assert!(!c0.passed);
    assert_eq!(c0.expected_observation, "case 0 ret=3");
    assert_eq!(c0.actual_observation, "case 0 ret=1");
}

#[test]
fn absent_zero_expects_minus_one() {
    let p = problem("index-last-zero");
    let idx = p
        .test_suite
        .iter()
        .position(|t| t.args[0].as_ints().is_some_and(|a| !a.is_empty() && !a.contains(&0)))
        .unwrap();
    let v = common::harness()
        .judge_problem("c", &p.reference_source, &p.reference_source, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.case_results[idx].expected_observation, format!("case {idx} ret=-1"));
}

#[test]
fn count_even_reference_prints_one_line_per_case() {
    let p = problem("count-even");
    let suite = &p.test_suite[..3];
    let h = common::harness();
    let driver = synthesize_driver(&p.signature, suite).unwrap();
    let limits = ResourceLimits::default();
    let CompileOutcome::Built(artifact) = h.compile(&p.reference_source, &driver, &limits).unwrap() else {
        panic!("reference must compile");
    };
    let rec = h.execute(&artifact, &limits).unwrap();
    assert_eq!(rec.status, RunStatus::Exited(0));
    let obs: Vec<String> = rec.observations.into_iter().map(Option::unwrap).collect();
    assert_eq!(obs, ["case 0 ret=3", "case 1 ret=0", "case 2 ret=0"]);
}

#[test]
fn reverse_observes_the_mutated_string() {
    let p = problem("reverse-string");
    let h = common::harness();
    let v = h
        .judge_problem("c", &p.reference_source, &p.reference_source, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.case_results[0].expected_observation, "case 0 arg0=<<<olleh>>>");
    let noop = "void foo(char *s) { (void)s; }";
    let v = h.judge_problem("c", &p.reference_source, noop, &p.signature, &p.test_suite).unwrap();
    assert_eq!(v.kind, VerdictKind::TestFail);
}

#[test]
fn syntax_error_is_a_compile_error() {
    let p = problem("sum-between");
    let v = common::harness()
        .judge_problem("c", &p.reference_source, "int foo(int a, int b) { return a + b }", &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::CompileError);
    assert!(!v.diagnostics.is_empty());
    assert!(v.case_results.is_empty());
}

#[test]
fn wrong_arity_is_a_compile_error() {
    let p = problem("sum-between");
    let v = common::harness()
        .judge_problem("c", &p.reference_source, "int foo(int a) { return a; }", &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::CompileError);
    assert!(v.diagnostics.contains("conflicting types"), "{}", v.diagnostics);
}

#[test]
fn pointer_and_const_spellings_are_accepted() {
    let p = problem("contains-substring");
    let cand = "#include <string.h>\nint foo(const char *a, const char *b) { return strstr(a, b) != 0; }";
    let v = common::harness()
        .judge_problem("c", &p.reference_source, cand, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass, "{}", v.diagnostics);
    let cand = "int foo(char *a, char *b) { int i, j; for (i = 0; ; i++) { for (j = 0; b[j] && a[i+j] == b[j]; j++); if (!b[j]) return 1; if (!a[i]) return 0; } }";
    let v = common::harness()
        .judge_problem("c", &p.reference_source, cand, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass, "{}", v.diagnostics);
}

#[test]
fn helpers_are_allowed() {
    let p = problem("sum-positive");
    let cand = "static int pos(int x) { return x > 0 ? x : 0; }\nint foo(int a[], int n) { int s = 0; for (int i = 0; i < n; i++) s += pos(a[i]); return s; }";
    let v = common::harness()
        .judge_problem("c", &p.reference_source, cand, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass);
}

#[test]
fn infinite_loop_times_out() {
    let p = problem("sum-between");
    let started = Instant::now();
    let v = common::harness()
        .judge(&p.reference_source, "int foo(int a, int b) { for (;;) {} return a + b; }", &p.signature, &p.test_suite, &short_limits())
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Timeout);
    assert!(started.elapsed() < Duration::from_secs(10));
}

#[test]
fn invalid_dereference_is_a_runtime_error() {
    let p = problem("sum-between");
    let v = common::harness()
        .judge_problem("c", &p.reference_source, "int foo(int a, int b) { int *q = (int *)16; return *q + a + b; }", &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::RuntimeError);
    assert!(v.diagnostics.contains("SIGSEGV"), "{}", v.diagnostics);
}

#[test]
fn oversized_output_is_truncated() {
    let p = problem("sum-between");
    let cand = "#include <stdio.h>\nint foo(int a, int b) { for (long i = 0; i < 100000000; i++) fputs(\"spam spam spam\\n\", stdout); return a + b; }";
    let v = common::harness()
        .judge(&p.reference_source, cand, &p.signature, &p.test_suite, &short_limits())
        .unwrap();
    assert_eq!(v.kind, VerdictKind::RuntimeError);
    assert!(v.output_truncated, "{v:?}");
}

#[test]
fn verdicts_are_deterministic() {
    let p = problem("index-last-zero");
    let h = common::harness();
    let first = h.judge_problem("c", &p.reference_source, FIRST_ZERO, &p.signature, &p.test_suite).unwrap();
    for _ in 0..3 {
        let again = h.judge_problem("c", &p.reference_source, FIRST_ZERO, &p.signature, &p.test_suite).unwrap();
        assert_eq!(again.kind, first.kind);
        assert_eq!(again.case_results, first.case_results);
    }
}

#[test]
fn network_is_closed_to_candidates() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let port = listener.local_addr().unwrap().port();
    let p = problem("sum-between");
    let cand = format!(
        "#include <sys/socket.h>\n#include <netinet/in.h>\n#include <arpa/inet.h>\n#include <unistd.h>\n\
         int foo(int a, int b) {{\n  int fd = socket(AF_INET, SOCK_STREAM, 0);\n  struct sockaddr_in sa = {{0}};\n\
           sa.sin_family = AF_INET; sa.sin_port = htons({port}); sa.sin_addr.s_addr = inet_addr(\"127.0.0.1\");\n\
           if (fd >= 0) {{ connect(fd, (struct sockaddr *)&sa, sizeof sa); close(fd); }}\n\
           int lo = a < b ? a : b, hi = a < b ? b : a, s = 0;\n  for (int i = lo; i <= hi; i++) s += i;\n  return s;\n}}\n"
    );
    let v = common::harness()
        .judge_problem("c", &p.reference_source, &cand, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass, "{}", v.diagnostics);
    match listener.accept() {
        Err(e) if e.kind() == ErrorKind::WouldBlock => {}
        other => panic!("candidate reached the host network: {other:?}"),
    }
}

/// A candidate that tries to vandalise its own and sibling build
/// directories while an honest candidate is being judged alongside it.
#[test]
fn hostile_candidates_do_not_disturb_concurrent_judgments() {
    let p = problem("count-even");
    let h = common::harness();
    let vandal = "#include <stdio.h>\n#include <stdlib.h>\n\
        int foo(int a[], int n) {\n\
          const char *targets[] = {\"../prog\", \"../prog.c\", \"../../../prog\", \"/tmp/eipe-vandal\"};\n\
          for (int i = 0; i < 4; i++) { FILE *f = fopen(targets[i], \"w\"); if (f) { fputs(\"x\", f); fclose(f); } }\n\
          system(\"for d in ../../*/; do cp /bin/false \\\"$d\\\"prog 2>/dev/null; done\");\n\
          return n;\n}\n";
    let honest = "int foo(int v[], int len) { int c = 0; for (int i = 0; i < len; i++) c += v[i] % 2 == 0; return c; }";
    let handles: Vec<_> = (0..6)
        .map(|i| {
            let (h, p) = (h.clone(), p.clone());
            thread::spawn(move || {
                let src = if i % 2 == 0 { vandal } else { honest };
                (i, h.judge_problem("c", &p.reference_source, src, &p.signature, &p.test_suite).unwrap())
            })
        })
        .collect();
    for t in handles {
        let (i, v) = t.join().unwrap();
        if i % 2 == 1 {
            assert_eq!(v.kind, VerdictKind::Pass, "honest run {i}: {v:?}");
        } else {
            assert_ne!(v.kind, VerdictKind::Pass);
        }
    }
    let v = h
        .judge_problem("c", &p.reference_source, &p.reference_source, &p.signature, &p.test_suite)
        .unwrap();
    assert_eq!(v.kind, VerdictKind::Pass);
}
