//! Seeded generator of small Mini-C programs mixing taint sources, sinks,
//! helper calls, branches and loops. Every statement sits on its own line
//! and holds at most one call.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INTS: [&str; 3] = ["v0", "v1", "v2"];
const ARRAYS: [&str; 2] = ["s0", "s1"];

struct Helper {
    name: String,
    /// `true` for array parameters.
    params: Vec<bool>,
}

struct Scope {
    ints: Vec<String>,
    arrays: Vec<String>,
    callable: Vec<usize>,
}

struct Gen {
    rng: ChaCha8Rng,
    out: String,
    helpers: Vec<Helper>,
    budget: usize,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &'a [String]) -> &'a str {
        &xs[self.rng.random_range(0..xs.len())]
    }

    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn atom(&mut self, s: &Scope) -> String {
        match self.rng.random_range(0..10) {
            0..=5 => self.pick(&s.ints).to_string(),
            6..=8 => self.rng.random_range(0..10).to_string(),
            _ => format!("{}[{}]", self.pick(&s.arrays), self.pick(&s.ints)),
        }
    }

    fn expr(&mut self, s: &Scope) -> String {
        let a = self.atom(s);
        if self.rng.random_bool(0.5) {
            return a;
        }
        let op = ["+", "-", "*"][self.rng.random_range(0..3)];
        format!("{a} {op} {}", self.atom(s))
    }

    fn cond(&mut self, s: &Scope) -> String {
        let v = self.pick(&s.ints).to_string();
        let op = ["<", ">", "==", "!="][self.rng.random_range(0..4)];
        let rhs = if self.rng.random_bool(0.7) {
            self.rng.random_range(0..20).to_string()
        } else {
            self.pick(&s.ints).to_string()
        };
        format!("{v} {op} {rhs}")
    }

    fn source(&mut self, s: &Scope) -> String {
        let v = self.pick(&s.ints).to_string();
        let a = self.pick(&s.arrays).to_string();
        let fd = self.pick(&s.ints).to_string();
        match self.rng.random_range(0..5) {
            0 => format!("{v} = read({fd}, {a}, 16);"),
            1 => format!("{v} = getenv(\"KEY\");"),
            2 => format!("gets({a});"),
            3 => format!("recv({fd}, {a}, 16, 0);"),
            _ => format!("{v} = scanf(\"%d\", {a});"),
        }
    }

    fn sink(&mut self, s: &Scope) -> String {
        let a = self.pick(&s.arrays).to_string();
        let b = self.pick(&s.arrays).to_string();
        let v = self.pick(&s.ints).to_string();
        match self.rng.random_range(0..6) {
            0 => format!("system({a});"),
            1 => format!("exec({a});"),
            2 => format!("malloc({});", self.expr(s)),
            3 => format!("memcpy({a}, {b}, {v});"),
            4 => format!("strcpy({a}, {b});"),
            _ => format!("sprintf({a}, \"%d\", {v});"),
        }
    }

    fn call(&mut self, s: &Scope) -> Option<String> {
        if s.callable.is_empty() {
            return None;
        }
        let h = s.callable[self.rng.random_range(0..s.callable.len())];
        let params = self.helpers[h].params.clone();
        let args: Vec<String> = params
            .iter()
            .map(|&is_array| {
                if is_array {
                    self.pick(&s.arrays).to_string()
                } else {
                    self.atom(s)
                }
            })
            .collect();
        let target = self.pick(&s.ints).to_string();
        Some(format!("{target} = {}({});", self.helpers[h].name, args.join(", ")))
    }

    fn block(&mut self, s: &Scope, depth: usize, max: usize) {
        let n = self.rng.random_range(1..=max);
        for i in 0..n {
            if self.budget == 0 {
                break;
            }
            if depth > 1 && i + 1 == n && self.rng.random_bool(0.15) {
                let v = self.pick(&s.ints).to_string();
                self.line(depth, &format!("return {v};"));
                self.budget -= 1;
                break;
            }
            self.stmt(s, depth);
        }
    }

    fn stmt(&mut self, s: &Scope, depth: usize) {
        self.budget = self.budget.saturating_sub(1);
        let roll = self.rng.random_range(0..100);
        let text = match roll {
            0..=21 => None,
            22..=35 => Some(self.source(s)),
            36..=51 => Some(self.sink(s)),
            52..=61 => self.call(s),
            62..=69 => {
                let a = self.pick(&s.arrays).to_string();
                let i = self.pick(&s.ints).to_string();
                Some(format!("{a}[{i}] = {};", self.atom(s)))
            }
            70..=84 if depth < 3 => {
                let c = self.cond(s);
                self.line(depth, &format!("if ({c}) {{"));
                self.block(s, depth + 1, 3);
                if self.rng.random_bool(0.4) {
                    self.line(depth, "} else {");
                    self.block(s, depth + 1, 2);
                }
                self.line(depth, "}");
                return;
            }
            85..=93 if depth < 3 => {
                let v = self.pick(&s.ints).to_string();
                let bound = self.rng.random_range(2..10);
                self.line(depth, &format!("while ({v} < {bound}) {{"));
                self.block(s, depth + 1, 3);
                self.line(depth + 1, &format!("{v} = {v} + 1;"));
                self.line(depth, "}");
                return;
            }
            _ => None,
        };
        let text = text.unwrap_or_else(|| {
            let v = self.pick(&s.ints).to_string();
            format!("{v} = {};", self.expr(s))
        });
        self.line(depth, &text);
    }

    fn function(&mut self, name: &str, params: &[(String, bool)], callable: Vec<usize>, budget: usize) {
        let sig: Vec<String> = params
            .iter()
            .map(|(p, arr)| {
                if *arr {
                    format!("char {p}[]")
                } else {
                    format!("int {p}")
                }
            })
            .collect();
        self.line(0, &format!("int {name}({}) {{", sig.join(", ")));
        let n_ints = self.rng.random_range(1..=INTS.len());
        let n_arrays = self.rng.random_range(1..=ARRAYS.len());
        let mut ints: Vec<String> = INTS[..n_ints].iter().map(|s| s.to_string()).collect();
        let mut arrays: Vec<String> = ARRAYS[..n_arrays].iter().map(|s| s.to_string()).collect();
        for v in &ints {
            let init = self.rng.random_range(0..5);
            self.line(1, &format!("int {v} = {init};"));
        }
        for a in &arrays {
            self.line(1, &format!("char {a}[16];"));
        }
        for (p, arr) in params {
            if *arr {
                arrays.push(p.clone());
            } else {
                ints.push(p.clone());
            }
        }
        let scope = Scope { ints, arrays, callable };
        self.budget = budget;
        while self.budget > 0 {
            self.stmt(&scope, 1);
        }
        let ret = self.pick(&scope.ints).to_string();
        self.line(1, &format!("return {ret};"));
        self.line(0, "}");
    }
}

/// Program for `seed`: one or two helpers followed by `main(int fd)`. Each
/// helper may call earlier helpers; `main` may call any.
pub fn program(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::new(),
        helpers: Vec::new(),
        budget: 0,
    };
    let count = g.rng.random_range(1..=2);
    for h in 0..count {
        let mut params = vec![("p0".to_string(), false)];
        if g.rng.random_bool(0.6) {
            params.push(("b0".to_string(), true));
        }
        if g.rng.random_bool(0.4) {
            params.push(("p1".to_string(), false));
        }
        let name = format!("helper{h}");
        let budget = g.rng.random_range(3..=7);
        g.function(&name, &params, (0..h).collect(), budget);
        g.out.push('\n');
        g.helpers.push(Helper {
            name,
            params: params.iter().map(|p| p.1).collect(),
        });
    }
    let budget = g.rng.random_range(6..=12);
    g.function("main", &[("fd".to_string(), false)], (0..count).collect(), budget);
    g.out
}

/// Statements in Mini-C text: declarations, assignments, calls, returns
/// and control headers.
pub fn statement_count(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| l.ends_with(';') || l.starts_with("if ") || l.starts_with("while "))
        .count()
}
