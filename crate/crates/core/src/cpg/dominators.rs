//! Iterative dominator computation (Cooper, Harvey, Kennedy) over an
//! arbitrary rooted graph. Post-dominators are obtained by running it on the
//! reversed CFG rooted at the exit node.

use std::collections::{BTreeMap, HashMap};

use super::NodeId;

/// Immediate-dominator tree. The root has no entry; nodes unreachable from
/// the root are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomTree {
    root: Option<NodeId>,
    idom: BTreeMap<NodeId, NodeId>,
}

impl DomTree {
    pub fn compute<F>(root: NodeId, succs: F) -> DomTree
    where
        F: Fn(NodeId) -> Vec<NodeId>,
    {
        // Reverse postorder by iterative DFS.
        let mut postorder = Vec::new();
        let mut visited = HashMap::new();
        let mut stack = vec![(root, succs(root), 0usize)];
        visited.insert(root, ());
        while let Some((node, next, i)) = stack.last_mut() {
            if *i < next.len() {
                let s = next[*i];
                *i += 1;
                if visited.insert(s, ()).is_none() {
                    let ss = succs(s);
                    stack.push((s, ss, 0));
                }
            } else {
                postorder.push(*node);
                stack.pop();
            }
        }
        let rpo: Vec<NodeId> = postorder.iter().rev().copied().collect();
        let order: HashMap<NodeId, usize> = rpo.iter().enumerate().map(|(i, &n)| (n, i)).collect();

        let mut preds: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &n in &rpo {
            for s in succs(n) {
                preds.entry(s).or_default().push(n);
            }
        }

        let mut idom: Vec<Option<usize>> = vec![None; rpo.len()];
        idom[0] = Some(0);
        let intersect = |idom: &[Option<usize>], mut a: usize, mut b: usize| {
            while a != b {
                while a > b {
                    a = idom[a].expect("processed");
                }
                while b > a {
                    b = idom[b].expect("processed");
                }
            }
            a
        };
        let mut changed = true;
        while changed {
            changed = false;
            for (i, node) in rpo.iter().enumerate().skip(1) {
                let mut new_idom: Option<usize> = None;
                for p in preds.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                    let Some(&pi) = order.get(p) else { continue };
                    if idom[pi].is_none() {
                        continue;
                    }
                    new_idom = Some(match new_idom {
                        None => pi,
                        Some(cur) => intersect(&idom, pi, cur),
                    });
                }
                if new_idom.is_some() && idom[i] != new_idom {
                    idom[i] = new_idom;
                    changed = true;
                }
            }
        }

        let idom = rpo
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(i, &n)| idom[i].map(|d| (n, rpo[d])))
            .collect();
        DomTree { root: Some(root), idom }
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn idom(&self, node: NodeId) -> Option<NodeId> {
        self.idom.get(&node).copied()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.root == Some(node) || self.idom.contains_key(&node)
    }

    /// Reflexive dominance: `a` dominates `b`.
    pub fn dominates(&self, a: NodeId, b: NodeId) -> bool {
        if !self.contains(b) {
            return false;
        }
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match self.idom(cur) {
                Some(next) => cur = next,
                None => return false,
            }
        }
    }

    pub fn strictly_dominates(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.dominates(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn graph(edges: &[(u32, u32)]) -> impl Fn(NodeId) -> Vec<NodeId> + '_ {
        move |n| {
            edges
                .iter()
                .filter(|(a, _)| *a == n.0)
                .map(|&(_, b)| NodeId(b))
                .collect()
        }
    }

    /// Textbook set-based dominators.
    fn dom_sets(n: u32, edges: &[(u32, u32)]) -> Vec<BTreeSet<u32>> {
        let all: BTreeSet<u32> = (0..n).collect();
        let mut dom = vec![all.clone(); n as usize];
        dom[0] = [0].into();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 1..n {
                let preds: Vec<u32> = edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect();
                let mut new = preds
                    .iter()
                    .map(|&p| dom[p as usize].clone())
                    .reduce(|a, b| a.intersection(&b).copied().collect())
                    .unwrap_or_default();
                new.insert(v);
                if new != dom[v as usize] {
                    dom[v as usize] = new;
                    changed = true;
                }
            }
        }
        dom
    }

    #[test]
    fn diamond_and_loop() {
        let edges = [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 1), (4, 5)];
        let tree = DomTree::compute(NodeId(0), graph(&edges));
        assert_eq!(tree.idom(NodeId(4)), Some(NodeId(1)));
        assert_eq!(tree.idom(NodeId(5)), Some(NodeId(4)));
        let sets = dom_sets(6, &edges);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(
                    tree.dominates(NodeId(a), NodeId(b)),
                    sets[b as usize].contains(&a),
                    "{a} dom {b}"
                );
            }
        }
    }

    #[test]
    fn unreachable_nodes_are_absent() {
        let edges = [(0, 1), (2, 1)];
        let tree = DomTree::compute(NodeId(0), graph(&edges));
        assert!(!tree.contains(NodeId(2)));
        assert!(!tree.dominates(NodeId(0), NodeId(2)));
        assert!(tree.dominates(NodeId(0), NodeId(1)));
    }
}
