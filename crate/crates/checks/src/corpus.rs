//! The bundled corpus. Hand-written programs carry line markers:
//! `// source:a` and `// sink:a` plant a flow between every source and sink
//! sharing a tag; `// clean` marks a sink no source may reach.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use codebadger_core::cpg::{build_cpg, Cpg};
use codebadger_core::frontend::SourceFile;

use crate::gen;

#[derive(Debug, Clone)]
pub struct Program {
    pub name: String,
    pub files: Vec<SourceFile>,
}

/// A flow reported as (source position, sink position).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowPair {
    pub source_file: String,
    pub source_line: u32,
    pub sink_file: String,
    pub sink_line: u32,
}

impl fmt::Display for FlowPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} -> {}:{}",
            self.source_file, self.source_line, self.sink_file, self.sink_line
        )
    }
}

struct Marker {
    file: String,
    line: u32,
    sources: Vec<String>,
    sinks: Vec<String>,
    clean: bool,
}

impl Program {
    fn new(name: &str, files: &[(&str, &str)]) -> Self {
        Program {
            name: name.to_string(),
            files: files.iter().map(|(p, c)| SourceFile::new(*p, *c)).collect(),
        }
    }

    pub fn cpg(&self) -> Cpg {
        build_cpg(self.files.clone())
    }

    /// Total number of source lines across files.
    pub fn line_count(&self) -> usize {
        self.files.iter().map(|f| f.line_count()).sum()
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        for f in &self.files {
            let path = dir.join(&f.path);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, &f.content)?;
        }
        Ok(())
    }

    fn markers(&self) -> Vec<Marker> {
        let mut out = Vec::new();
        for f in &self.files {
            for (i, text) in f.content.lines().enumerate() {
                let Some((_, comment)) = text.split_once("//") else {
                    continue;
                };
                let mut m = Marker {
                    file: f.path.clone(),
                    line: i as u32 + 1,
                    sources: Vec::new(),
                    sinks: Vec::new(),
                    clean: false,
                };
                for word in comment.split_whitespace() {
                    if let Some(tags) = word.strip_prefix("source:") {
                        m.sources.extend(tags.split(',').map(String::from));
                    } else if let Some(tags) = word.strip_prefix("sink:") {
                        m.sinks.extend(tags.split(',').map(String::from));
                    } else if word == "clean" {
                        m.clean = true;
                    }
                }
                out.push(m);
            }
        }
        out
    }

    /// Flows planted by the markers.
    pub fn planted(&self) -> BTreeSet<FlowPair> {
        let markers = self.markers();
        let mut out = BTreeSet::new();
        for s in &markers {
            for k in &markers {
                if s.sources.iter().any(|t| k.sinks.contains(t)) {
                    out.insert(FlowPair {
                        source_file: s.file.clone(),
                        source_line: s.line,
                        sink_file: k.file.clone(),
                        sink_line: k.line,
                    });
                }
            }
        }
        out
    }

    /// Sink positions marked clean.
    pub fn clean_sinks(&self) -> BTreeSet<(String, u32)> {
        self.markers()
            .into_iter()
            .filter(|m| m.clean)
            .map(|m| (m.file, m.line))
            .collect()
    }
}

macro_rules! embedded {
    ($name:literal) => {
        Program::new(
            $name,
            &[(
                concat!($name, ".c"),
                include_str!(concat!("../corpus/taint/", $name, ".c")),
            )],
        )
    };
}

/// Hand-written taint programs.
pub fn handwritten() -> Vec<Program> {
    vec![
        embedded!("array_writeback"),
        embedded!("branch_join"),
        embedded!("call_chain"),
        embedded!("callee_copy"),
        embedded!("callee_sink"),
        embedded!("direct"),
        embedded!("file_copy"),
        embedded!("format_all_args"),
        embedded!("guarded_exec"),
        embedded!("killed_size"),
        embedded!("loop_accumulate"),
        embedded!("nested_call"),
        embedded!("overwritten"),
        embedded!("returned_source"),
        embedded!("sized_alloc"),
        embedded!("two_pairs"),
        Program::new(
            "split",
            &[
                ("handler.c", include_str!("../corpus/taint/split/handler.c")),
                ("serve.c", include_str!("../corpus/taint/split/serve.c")),
            ],
        ),
    ]
}

pub const GENERATED_PROGRAMS: u64 = 12;

/// Seeded random programs; identical on every run.
pub fn generated() -> Vec<Program> {
    (0..GENERATED_PROGRAMS)
        .map(|seed| {
            let name = format!("generated_{seed:02}");
            let file = format!("{name}.c");
            Program::new(&name, &[(&file, &gen::program(seed))])
        })
        .collect()
}

/// The taint corpus: hand-written and generated programs.
pub fn taint_corpus() -> Vec<Program> {
    let mut all = handwritten();
    all.extend(generated());
    all
}

pub fn slice_program() -> Program {
    Program::new(
        "inventory",
        &[("inventory.c", include_str!("../corpus/slice/inventory.c"))],
    )
}

/// Designated slice criteria in `inventory.c`: the return statement of
/// each helper from `checksum` to `ship_cost`, and the final report call in
/// `main`.
pub const SLICE_CRITERIA: [u32; 10] = [35, 70, 89, 111, 139, 172, 191, 214, 234, 296];

pub fn bounds_vulnerable() -> Program {
    Program::new(
        "strip_vulnerable",
        &[("strip.c", include_str!("../corpus/bounds/strip_vulnerable.c"))],
    )
}

pub fn bounds_patched() -> Program {
    Program::new(
        "strip_patched",
        &[("strip.c", include_str!("../corpus/bounds/strip_patched.c"))],
    )
}

/// Line of `pixel = buf[pos];` in each bounds variant.
pub const BOUNDS_ACCESS_LINE: (u32, u32) = (12, 15);

pub fn qname() -> Program {
    Program::new("qname", &[("tree.c", include_str!("../corpus/qname/tree.c"))])
}

/// Every bundled codebase.
pub fn everything() -> Vec<Program> {
    let mut all = taint_corpus();
    all.push(slice_program());
    all.push(bounds_vulnerable());
    all.push(bounds_patched());
    all.push(qname());
    all
}
