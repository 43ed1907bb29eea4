//! Invariants over generated programs, each checked against the reference
//! oracles.

use std::collections::BTreeSet;

use proptest::prelude::*;

use codebadger_checks::corpus::FlowPair;
use codebadger_checks::criteria::ORACLE_MAX_CFG_NODES;
use codebadger_checks::{gen, oracle};
use codebadger_core::analyses::{find_taint_flows, get_program_slice, SourceSinkConfig};
use codebadger_core::cpg::{build_cpg, Cpg, NodeKind};
use codebadger_core::frontend::SourceFile;

fn generated(seed: u64) -> Cpg {
    build_cpg(vec![SourceFile::new("gen.c", gen::program(seed))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_programs_parse_cleanly(seed in any::<u64>()) {
        let text = gen::program(seed);
        let cpg = build_cpg(vec![SourceFile::new("gen.c", text.clone())]);
        prop_assert!(cpg.report().errors.is_empty(), "{text}");
        prop_assert!(gen::statement_count(&text) <= 60);
    }

    #[test]
    fn small_methods_match_textbook_oracles(seed in any::<u64>()) {
        let cpg = generated(seed);
        for m in cpg.methods().iter().filter(|m| m.cfg_nodes.len() <= ORACLE_MAX_CFG_NODES) {
            prop_assert_eq!(oracle::reaching_definitions(&cpg, m), oracle::reaching_def_edges(&cpg, m), "{}", m.name);
            prop_assert_eq!(oracle::control_dependences(&cpg, m), oracle::cdg_edges(&cpg, m), "{}", m.name);
        }
    }

    #[test]
    fn dominator_trees_agree_with_path_removal(seed in any::<u64>()) {
        let cpg = generated(seed);
        for m in cpg.methods() {
            let doms = oracle::dominators(&cpg, m);
            let pdoms = oracle::postdominators(&cpg, m);
            for &n in &m.cfg_nodes {
                prop_assert!(m.dom.dominates(m.entry(), n));
                let expected = doms.get(&n).cloned().unwrap_or_default();
                let tree: BTreeSet<_> = m.cfg_nodes.iter().copied().filter(|&d| m.dom.dominates(d, n)).collect();
                prop_assert_eq!(tree, expected);
                if let Some(expected) = pdoms.get(&n) {
                    prop_assert!(m.pdom.dominates(m.exit, n));
                    let tree: BTreeSet<_> = m.cfg_nodes.iter().copied().filter(|&d| m.pdom.dominates(d, n)).collect();
                    prop_assert_eq!(&tree, expected);
                }
            }
        }
    }

    #[test]
    fn taint_pairs_match_path_enumeration(seed in any::<u64>()) {
        let cpg = generated(seed);
        let config = SourceSinkConfig::default();
        let actual: BTreeSet<FlowPair> = find_taint_flows(&cpg, &config, 1000)
            .iter()
            .map(|p| FlowPair {
                source_file: p.source.file.clone(),
                source_line: p.source.line,
                sink_file: p.sink.file.clone(),
                sink_line: p.sink.line,
            })
            .collect();
        prop_assert_eq!(actual, oracle::taint_pairs(&cpg, &config));
    }

    #[test]
    fn capped_results_are_prefixes(seed in any::<u64>(), cap in 1usize..8) {
        let cpg = generated(seed);
        let config = SourceSinkConfig::default();
        let all = serde_json::to_value(find_taint_flows(&cpg, &config, 1000)).unwrap();
        let all = all.as_array().unwrap();
        let capped = serde_json::to_value(find_taint_flows(&cpg, &config, cap)).unwrap();
        let capped = capped.as_array().unwrap();
        prop_assert_eq!(capped.len(), cap.min(all.len()));
        prop_assert_eq!(&capped[..], &all[..capped.len()]);
    }

    #[test]
    fn slices_are_minimal_closed_fixpoints(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let cpg = generated(seed);
        let stmts: Vec<_> = cpg
            .methods()
            .iter()
            .flat_map(|m| m.cfg_nodes.iter().copied())
            .filter(|&n| !matches!(cpg.node(n).kind, NodeKind::Method | NodeKind::MethodReturn))
            .collect();
        let c = stmts[pick.index(stmts.len())];
        let oracle = oracle::SliceOracle::new(&cpg);
        let slice: BTreeSet<_> = get_program_slice(&cpg, c).points.into_iter().collect();
        prop_assert!(slice.contains(&c));
        prop_assert!(oracle.is_closed(&slice));
        prop_assert!(oracle.removable(&slice, c).is_empty());
        prop_assert_eq!(slice, oracle.slice(c));
    }
}
