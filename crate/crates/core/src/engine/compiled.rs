use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;

use super::{EngineError, Resolved, Scenario, GateResolution};
use crate::flat::FlatModel;
use crate::model::{effective_probability, GateKind, Identifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Op {
    And,
    Or,
    Not,
    /// Index into [`Compiled::uncertain`].
    Uncertain(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum CNode {
    Leaf(usize),
    Gate { op: Op, children: Vec<usize> },
}

/// Index-based view of a flat model. Nodes are numbered in topological
/// order; leaves are numbered in identifier order.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub leaves: Vec<Identifier>,
    pub ids: Vec<Identifier>,
    pub nodes: Vec<CNode>,
    pub top: usize,
    /// ANDOR gates in identifier order, with the model weight.
    pub uncertain: Vec<(Identifier, f64)>,
    support: Vec<FixedBitSet>,
    /// Children have pairwise disjoint supports, all the way down.
    independent: Vec<bool>,
}

impl Compiled {
    pub fn new(flat: &FlatModel) -> Compiled {
        let leaves: Vec<Identifier> = flat.events().keys().cloned().collect();
        let leaf_index: HashMap<&Identifier, usize> = leaves.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let uncertain: Vec<(Identifier, f64)> = flat
            .uncertain_gates()
            .map(|g| match g.kind {
                GateKind::AndOr { w } => (g.id.clone(), w),
                _ => unreachable!(),
            })
            .collect();
        let uncertain_index: HashMap<&Identifier, usize> =
            uncertain.iter().enumerate().map(|(i, (id, _))| (id, i)).collect();

        let ids: Vec<Identifier> = flat.topological_order().to_vec();
        let index: HashMap<Identifier, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut nodes = Vec::with_capacity(ids.len());
        for id in &ids {
            if let Some(&l) = leaf_index.get(id) {
                nodes.push(CNode::Leaf(l));
            } else {
                let g = &flat.gates()[id];
                let op = match g.kind {
                    GateKind::And => Op::And,
                    GateKind::Or => Op::Or,
                    GateKind::Not => Op::Not,
                    GateKind::AndOr { .. } => Op::Uncertain(uncertain_index[id]),
                };
                nodes.push(CNode::Gate { op, children: g.children.iter().map(|c| index[c]).collect() });
            }
        }
        let top = index[flat.top()];
        Self::finish(leaves, ids, nodes, top, uncertain)
    }

    /// `OR` over `AND`s of the given leaf sets; leaves are those of `base`.
    pub fn disjunction(base: &Compiled, sets: &[Vec<u32>]) -> Compiled {
        let leaves = base.leaves.clone();
        let mut ids = leaves.clone();
        let mut nodes: Vec<CNode> = (0..leaves.len()).map(CNode::Leaf).collect();
        let mut terms = Vec::with_capacity(sets.len());
        for (k, set) in sets.iter().enumerate() {
            if set.len() == 1 {
                terms.push(set[0] as usize);
            } else {
                ids.push(Identifier::new(format!("term_{k}")).expect("valid id"));
                nodes.push(CNode::Gate { op: Op::And, children: set.iter().map(|&l| l as usize).collect() });
                terms.push(nodes.len() - 1);
            }
        }
        ids.push(Identifier::new("union").expect("valid id"));
        nodes.push(CNode::Gate { op: Op::Or, children: terms });
        let top = nodes.len() - 1;
        Self::finish(leaves, ids, nodes, top, Vec::new())
    }

    fn finish(
        leaves: Vec<Identifier>,
        ids: Vec<Identifier>,
        nodes: Vec<CNode>,
        top: usize,
        uncertain: Vec<(Identifier, f64)>,
    ) -> Compiled {
        let l = leaves.len();
        let mut support: Vec<FixedBitSet> = Vec::with_capacity(nodes.len());
        let mut independent = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let mut s = FixedBitSet::with_capacity(l);
            match node {
                CNode::Leaf(i) => {
                    s.insert(*i);
                    independent.push(true);
                }
                CNode::Gate { children, .. } => {
                    let mut ok = true;
                    for &c in children {
                        ok &= independent[c] && s.is_disjoint(&support[c]);
                        s.union_with(&support[c]);
                    }
                    independent.push(ok);
                }
            }
            support.push(s);
        }
        Compiled { leaves, ids, nodes, top, uncertain, support, independent }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn support(&self, node: usize) -> &FixedBitSet {
        &self.support[node]
    }

    /// The subgraph under the top node is a tree.
    pub fn is_tree(&self) -> bool {
        self.independent[self.top]
    }

    #[cfg(test)]
    pub fn is_independent(&self, node: usize) -> bool {
        self.independent[node]
    }

    /// Nodes reachable from the top.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.top];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            if let CNode::Gate { children, .. } = &self.nodes[n] {
                stack.extend(children.iter().copied().filter(|&c| !seen[c]));
            }
        }
        seen
    }

    /// Effective point probability per leaf under the scenario.
    pub fn leaf_probabilities(&self, flat: &FlatModel, scenario: &Scenario) -> Result<Vec<f64>, EngineError> {
        self.leaves
            .iter()
            .map(|id| {
                let p0 = match scenario.overrides.get(id) {
                    Some(&p) => p,
                    None => flat.events()[id]
                        .prob
                        .as_point()
                        .ok_or_else(|| EngineError::NonpointParameter { event: id.clone() })?,
                };
                Ok(effective_probability(id, p0, &scenario.decisions, flat.influences_on(id)))
            })
            .collect()
    }

    /// ANDOR weights in gate order, scenario values taking precedence.
    pub fn weights(&self, scenario: &Scenario) -> Vec<f64> {
        self.uncertain.iter().map(|(id, w)| scenario.gate_weights.get(id).copied().unwrap_or(*w)).collect()
    }

    pub fn resolution_map(&self, res: &[bool]) -> GateResolution {
        GateResolution(
            self.uncertain
                .iter()
                .zip(res)
                .map(|((id, _), &and)| (id.clone(), if and { Resolved::And } else { Resolved::Or }))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    /// Gate operation after resolving ANDOR gates.
    pub fn op(&self, op: Op, res: &[bool]) -> Op {
        match op {
            Op::Uncertain(k) if res[k] => Op::And,
            Op::Uncertain(_) => Op::Or,
            op => op,
        }
    }
}

#[derive(Clone)]
struct Ctx {
    set: FixedBitSet,
    val: FixedBitSet,
}

impl Ctx {
    fn with(&self, leaf: usize, value: bool) -> Ctx {
        let mut c = self.clone();
        c.set.insert(leaf);
        c.val.set(leaf, value);
        c
    }
}

/// Probability evaluator for one leaf vector and one resolution.
pub(crate) struct Eval<'a> {
    c: &'a Compiled,
    probs: &'a [f64],
    res: &'a [bool],
    /// When set, OR gates above this leaf keep only the child leading to
    /// it; on a tree that is the union of the cut sets containing the leaf.
    focus: Option<usize>,
    marginal: Vec<Option<f64>>,
    memo: HashMap<(usize, FixedBitSet, FixedBitSet), f64>,
}

impl<'a> Eval<'a> {
    pub fn new(c: &'a Compiled, probs: &'a [f64], res: &'a [bool]) -> Self {
        Eval { c, probs, res, focus: None, marginal: vec![None; c.len()], memo: HashMap::new() }
    }

    pub fn with_focus(mut self, leaf: usize) -> Self {
        debug_assert!(self.c.is_tree());
        self.focus = Some(leaf);
        self
    }

    /// Unconditional probability that `node` is true.
    pub fn marginal(&mut self, node: usize) -> f64 {
        let l = self.c.leaf_count();
        let ctx = Ctx { set: FixedBitSet::with_capacity(l), val: FixedBitSet::with_capacity(l) };
        self.prob(node, &ctx)
    }

    fn prob(&mut self, n: usize, ctx: &Ctx) -> f64 {
        let c = self.c;
        if let CNode::Leaf(l) = c.nodes[n] {
            return match (ctx.set.contains(l), ctx.val.contains(l)) {
                (true, true) => 1.0,
                (true, false) => 0.0,
                _ => self.probs[l],
            };
        }
        let free = ctx.set.is_disjoint(&c.support[n]);
        if free {
            if let Some(p) = self.marginal[n] {
                return p;
            }
        }
        let p = if c.independent[n] {
            self.combine(n, ctx)
        } else {
            let mut set = ctx.set.clone();
            set.intersect_with(&c.support[n]);
            let mut val = ctx.val.clone();
            val.intersect_with(&c.support[n]);
            let key = (n, set, val);
            if let Some(&p) = self.memo.get(&key) {
                return p;
            }
            let p = self.shannon(n, ctx);
            self.memo.insert(key, p);
            p
        };
        if free {
            self.marginal[n] = Some(p);
        }
        p
    }

    /// Condition on the smallest unassigned leaf shared by two children, or
    /// combine directly once the children are independent.
    fn shannon(&mut self, n: usize, ctx: &Ctx) -> f64 {
        let c = self.c;
        let CNode::Gate { children, .. } = &c.nodes[n] else { unreachable!() };
        let l = c.leaf_count();
        let mut seen = FixedBitSet::with_capacity(l);
        let mut shared = FixedBitSet::with_capacity(l);
        for &ch in children {
            let mut s = c.support[ch].clone();
            s.difference_with(&ctx.set);
            let mut both = s.clone();
            both.intersect_with(&seen);
            shared.union_with(&both);
            seen.union_with(&s);
        }
        let Some(x) = shared.minimum() else { return self.combine(n, ctx) };
        let p = self.probs[x];
        let hi = if p > 0.0 { self.prob(n, &ctx.with(x, true)) } else { 0.0 };
        let lo = if p < 1.0 { self.prob(n, &ctx.with(x, false)) } else { 0.0 };
        p * hi + (1.0 - p) * lo
    }

    fn combine(&mut self, n: usize, ctx: &Ctx) -> f64 {
        let c = self.c;
        let CNode::Gate { op, children } = &c.nodes[n] else { unreachable!() };
        let op = c.op(*op, self.res);
        if let Some(f) = self.focus {
            if op == Op::Or && c.support[n].contains(f) {
                let path = children.iter().copied().find(|&ch| c.support[ch].contains(f)).expect("path child");
                return self.prob(path, ctx);
            }
        }
        match op {
            Op::And => children.iter().map(|&ch| self.prob(ch, ctx)).product(),
            Op::Or => 1.0 - children.iter().map(|&ch| 1.0 - self.prob(ch, ctx)).product::<f64>(),
            Op::Not => 1.0 - self.prob(children[0], ctx),
            Op::Uncertain(_) => unreachable!("resolved above"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelDoc;

    fn compiled(doc: &ModelDoc) -> (FlatModel, Compiled) {
        let flat = crate::expand(doc).unwrap();
        let c = Compiled::new(&flat);
        (flat, c)
    }

    #[test]
    fn tree_detection() {
        let mut doc = ModelDoc::new("m");
        doc.add_event("a", 0.5).add_event("b", 0.5).add_gate("t", GateKind::Or, &["a", "b"]).set_top("t");
        assert!(compiled(&doc).1.is_tree());
        doc.add_gate("u", GateKind::And, &["t", "a"]).set_top("u");
        let (_, c) = compiled(&doc);
        assert!(!c.is_tree());
        assert!(c.is_independent(c.ids.iter().position(|x| x.as_str() == "t").unwrap()));
    }

    #[test]
    fn focus_keeps_the_path_child() {
        // t = AND(OR(a, b), c): cut sets with a are {a, c}
        let mut doc = ModelDoc::new("m");
        doc.add_event("a", 0.2)
            .add_event("b", 0.3)
            .add_event("c", 0.5)
            .add_gate("x", GateKind::Or, &["a", "b"])
            .add_gate("t", GateKind::And, &["x", "c"])
            .set_top("t");
        let (_, c) = compiled(&doc);
        let probs = [0.2, 0.3, 0.5];
        let p = Eval::new(&c, &probs, &[]).with_focus(0).marginal(c.top);
        assert!((p - 0.1).abs() < 1e-15);
    }

    #[test]
    fn disjunction_matches_union() {
        let mut doc = ModelDoc::new("m");
        doc.add_event("a", 0.2).add_event("b", 0.3).add_event("c", 0.5);
        doc.add_gate("t", GateKind::Or, &["a", "b"]).set_top("t");
        let (_, c) = compiled(&doc);
        let d = Compiled::disjunction(&c, &[vec![0, 2], vec![1, 2]]);
        let probs = [0.2, 0.3, 0.5];
        let p = Eval::new(&d, &probs, &[]).marginal(d.top);
        assert!((p - 0.5 * 0.44).abs() < 1e-15);
    }
}
