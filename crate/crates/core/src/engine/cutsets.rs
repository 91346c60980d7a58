use fixedbitset::FixedBitSet;

use super::compiled::{CNode, Compiled, Op};
use super::{CutSetReport, EngineError};
use crate::flat::FlatModel;

/// Minimal cut sets by top-down expansion (MOCUS).
///
/// The part of the model under the top must be coherent and free of ANDOR
/// gates; see [`super::resolve`]. Sets larger than `max_order` are dropped.
pub fn minimal_cut_sets(flat: &FlatModel, max_order: Option<usize>) -> Result<CutSetReport, EngineError> {
    let c = Compiled::new(flat);
    let reachable = c.reachable();
    for (n, node) in c.nodes.iter().enumerate() {
        if !reachable[n] {
            continue;
        }
        match node {
            CNode::Gate { op: Op::Not, .. } => return Err(EngineError::NoncoherentModel { gate: c.ids[n].clone() }),
            CNode::Gate { op: Op::Uncertain(_), .. } => {
                return Err(EngineError::UnresolvedAndor { gate: c.ids[n].clone() })
            }
            _ => {}
        }
    }
    let sets = mocus(&c, &[], max_order);
    Ok(CutSetReport {
        cut_sets: sets
            .into_iter()
            .map(|s| s.into_iter().map(|l| c.leaves[l as usize].clone()).collect())
            .collect(),
        truncated_at_order: max_order,
    })
}

struct Row {
    leaves: Vec<u32>,
    pending: Vec<usize>,
}

/// Minimal cut sets as sorted leaf-index lists, ordered by size and then
/// lexicographically. ANDOR gates follow `res`; NOT gates must be absent.
pub(crate) fn mocus(c: &Compiled, res: &[bool], max_order: Option<usize>) -> Vec<Vec<u32>> {
    let limit = max_order.unwrap_or(usize::MAX);
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut stack = vec![Row { leaves: Vec::new(), pending: vec![c.top] }];
    'rows: while let Some(mut row) = stack.pop() {
        while let Some(n) = row.pending.pop() {
            match &c.nodes[n] {
                CNode::Leaf(l) => {
                    let l = *l as u32;
                    if let Err(at) = row.leaves.binary_search(&l) {
                        row.leaves.insert(at, l);
                        if row.leaves.len() > limit {
                            continue 'rows;
                        }
                    }
                }
                CNode::Gate { op, children } => match c.op(*op, res) {
                    Op::And => row.pending.extend(children.iter().rev()),
                    Op::Or => {
                        for &ch in children[1..].iter().rev() {
                            let mut pending = row.pending.clone();
                            pending.push(ch);
                            stack.push(Row { leaves: row.leaves.clone(), pending });
                        }
                        row.pending.push(children[0]);
                    }
                    Op::Not | Op::Uncertain(_) => unreachable!("checked by the caller"),
                },
            }
        }
        out.push(row.leaves);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    // on a tree every expansion path yields a distinct minimal set
    if c.is_tree() {
        return out;
    }
    out.dedup();
    let l = c.leaf_count();
    let mut kept: Vec<(Vec<u32>, FixedBitSet)> = Vec::new();
    for set in out {
        let mut bits = FixedBitSet::with_capacity(l);
        bits.extend(set.iter().map(|&i| i as usize));
        if !kept.iter().any(|(_, k)| k.is_subset(&bits)) {
            kept.push((set, bits));
        }
    }
    kept.into_iter().map(|(s, _)| s).collect()
}
