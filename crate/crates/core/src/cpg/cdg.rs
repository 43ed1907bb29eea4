use std::collections::BTreeSet;

use super::{MethodInfo, NodeId};

/// Control dependences of one method as (branch, dependent) pairs, by walking
/// the post-dominator tree from each branch successor up to the branch's
/// immediate post-dominator.
pub(crate) fn control_dependences(info: &MethodInfo) -> BTreeSet<(NodeId, NodeId)> {
    let mut deps = BTreeSet::new();
    for &branch in &info.cfg_nodes {
        if !info.pdom.contains(branch) {
            continue;
        }
        let stop = info.pdom.idom(branch);
        for &succ in info.successors(branch) {
            if info.pdom.dominates(succ, branch) {
                continue;
            }
            let mut runner = Some(succ);
            while let Some(r) = runner {
                if Some(r) == stop {
                    break;
                }
                if r != branch {
                    deps.insert((branch, r));
                }
                runner = info.pdom.idom(r);
            }
        }
    }
    deps
}
