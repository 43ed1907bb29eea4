//! Statement-level control flow graphs.
//!
//! Each simple statement is one node. An `if` is a branch node whose
//! successors are the then-branch and the else-branch (or the join point); a
//! `while` header branches to its body and to the loop exit; `return` jumps to
//! the method exit. The Method node is the entry and the MethodReturn node is
//! the exit. Statements unreachable from the entry are left out.

use std::collections::{BTreeSet, VecDeque};

use super::{Cpg, NodeId, NodeKind};

pub(crate) fn build_cfg(cpg: &Cpg, method: NodeId) -> Vec<(NodeId, NodeId)> {
    let kids = cpg.children(method);
    let exit = kids
        .iter()
        .copied()
        .find(|&c| cpg.node(c).kind == NodeKind::MethodReturn)
        .expect("method exit");
    let body = kids.iter().copied().find(|&c| cpg.node(c).kind == NodeKind::Block);

    let mut builder = CfgBuilder {
        cpg,
        exit,
        edges: BTreeSet::new(),
    };
    let mut tail = vec![method];
    if let Some(body) = body {
        tail = builder.statement(body, tail);
    }
    for p in tail {
        builder.edges.insert((p, exit));
    }

    let edges = builder.edges;
    let mut reachable = BTreeSet::from([method]);
    let mut queue = VecDeque::from([method]);
    while let Some(n) = queue.pop_front() {
        for &(_, dst) in edges.range((n, NodeId(0))..=(n, NodeId(u32::MAX))) {
            if reachable.insert(dst) {
                queue.push_back(dst);
            }
        }
    }
    edges.into_iter().filter(|(src, _)| reachable.contains(src)).collect()
}

struct CfgBuilder<'a> {
    cpg: &'a Cpg,
    exit: NodeId,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl CfgBuilder<'_> {
    fn connect(&mut self, preds: &[NodeId], node: NodeId) {
        for &p in preds {
            self.edges.insert((p, node));
        }
    }

    /// Wires `stmt` after `preds` and returns the nodes that fall through to
    /// whatever follows.
    fn statement(&mut self, stmt: NodeId, preds: Vec<NodeId>) -> Vec<NodeId> {
        let node = self.cpg.node(stmt);
        let kids = self.cpg.children(stmt).to_vec();
        match node.kind {
            NodeKind::Block => kids
                .into_iter()
                .fold(preds, |preds, child| self.statement(child, preds)),
            NodeKind::ControlStructure if node.name.as_deref() == Some("while") => {
                self.connect(&preds, stmt);
                let body_out = self.statement(kids[1], vec![stmt]);
                self.connect(&body_out, stmt);
                vec![stmt]
            }
            NodeKind::ControlStructure => {
                self.connect(&preds, stmt);
                let mut out = self.statement(kids[1], vec![stmt]);
                match kids.get(2) {
                    Some(&els) => out.extend(self.statement(els, vec![stmt])),
                    None => out.push(stmt),
                }
                out.sort();
                out.dedup();
                out
            }
            NodeKind::Return => {
                self.connect(&preds, stmt);
                self.edges.insert((stmt, self.exit));
                Vec::new()
            }
            _ => {
                self.connect(&preds, stmt);
                vec![stmt]
            }
        }
    }
}
