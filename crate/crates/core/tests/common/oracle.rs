//! Hand-written Rust versions of the bank tasks and random inputs for them.

use rand::Rng;

use eipe_core::{TestCase, Value};

pub fn ints(v: &Value) -> &[i64] {
    v.as_ints().unwrap_or(&[])
}

fn int(v: &Value) -> i64 {
    v.as_int().unwrap()
}

fn s(v: &Value) -> &str {
    v.as_str().unwrap()
}

/// Expected canonical observation for case `i`.
pub fn expected(problem_id: &str, i: usize, args: &[Value]) -> String {
    let ret = |v: i64| format!("case {i} ret={v}");
    match problem_id {
        "sum-between" => {
            let (a, b) = (int(&args[0]), int(&args[1]));
            ret((a.min(b)..=a.max(b)).sum())
        }
        "count-even" => {
            let n = int(&args[1]) as usize;
            ret(ints(&args[0])[..n].iter().filter(|x| *x % 2 == 0).count() as i64)
        }
        "index-last-zero" => {
            let n = int(&args[1]) as usize;
            ret(ints(&args[0])[..n].iter().rposition(|x| *x == 0).map_or(-1, |p| p as i64))
        }
        "sum-positive" => {
            let n = int(&args[1]) as usize;
            ret(ints(&args[0])[..n].iter().filter(|x| **x > 0).sum())
        }
        "reverse-string" => {
            let r: String = s(&args[0]).chars().rev().collect();
            format!("case {i} arg0=<<<{r}>>>")
        }
        "row-sum" => {
            let m = args[2].as_matrix().unwrap();
            ret(m[int(&args[3]) as usize].iter().sum())
        }
        "contains-vowel" => ret(s(&args[0]).chars().any(|c| "aeiouAEIOU".contains(c)) as i64),
        "contains-substring" => ret(s(&args[0]).contains(s(&args[1])) as i64),
        other => panic!("no oracle for {other}"),
    }
}

fn small_array(rng: &mut impl Rng, zero_bias: bool) -> Vec<i64> {
    let len = rng.gen_range(0..=8);
    (0..len)
        .map(|_| {
            if zero_bias && rng.gen_bool(0.3) {
                0
            } else {
                rng.gen_range(-20..=20)
            }
        })
        .collect()
}

fn word(rng: &mut impl Rng, max: usize) -> String {
    const ALPHABET: &[u8] = b"abcdeiouxyzAEBQ _!";
    let len = rng.gen_range(0..=max);
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

/// A random argument tuple valid for the task's signature.
pub fn random_args(problem_id: &str, rng: &mut impl Rng) -> Vec<Value> {
    match problem_id {
        "sum-between" => vec![
            Value::Int(rng.gen_range(-50..=50)),
            Value::Int(rng.gen_range(-50..=50)),
        ],
        "count-even" | "sum-positive" | "index-last-zero" => {
            let a = small_array(rng, problem_id == "index-last-zero");
            let n = rng.gen_range(0..=a.len()) as i64;
            vec![Value::IntArray(a), Value::Int(n)]
        }
        "reverse-string" | "contains-vowel" => vec![Value::Str(word(rng, 12))],
        "row-sum" => {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=5);
            let m: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-30..=30)).collect())
                .collect();
            let r = rng.gen_range(0..rows) as i64;
            vec![Value::Int(rows as i64), Value::Int(cols as i64), Value::Matrix(m), Value::Int(r)]
        }
        "contains-substring" => {
            let hay = word(rng, 10);
            let needle = if !hay.is_empty() && rng.gen_bool(0.5) {
                let a = rng.gen_range(0..hay.len());
                let b = rng.gen_range(a..=hay.len());
                hay[a..b].to_string()
            } else {
                word(rng, 3)
            };
            vec![Value::Str(hay), Value::Str(needle)]
        }
        other => panic!("no generator for {other}"),
    }
}

pub fn random_suite(problem_id: &str, n: usize, rng: &mut impl Rng) -> Vec<TestCase> {
    let sig = &super::bank().get(problem_id).unwrap().signature.clone();
    (0..n)
        .map(|_| TestCase::with_default_plan(random_args(problem_id, rng), sig))
        .collect()
}
