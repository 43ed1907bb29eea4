//! Code property graph engine for Mini-C: frontend, graph construction,
//! analyses, sessions, and the shared tool dispatch used by the server and CLI.

pub mod analyses;
pub mod config;
pub mod cpg;
pub mod frontend;
pub mod glob;
pub mod session;
pub mod tools;
