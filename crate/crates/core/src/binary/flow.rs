use std::collections::VecDeque;

use crate::model::{Allocation, Instance};

/// Source → agents (capacity `c`) → approved goods (capacity 1) → sink (capacity 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    pub n_agents: usize,
    pub n_goods: usize,
    pub capacity: u64,
    /// `(agent, good)` pairs with `v_ij = 1`, in row-major order.
    pub approvals: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: u64,
    /// Agent receiving each good's unit of flow, if any.
    pub assignment: Vec<Option<usize>>,
}

impl FlowNetwork {
    pub fn new(instance: &Instance, capacity: u64) -> Self {
        let approvals = (0..instance.n_agents())
            .flat_map(|i| (0..instance.n_goods()).map(move |j| (i, j)))
            .filter(|&(i, j)| instance.value(i, j) > 0)
            .collect();
        FlowNetwork {
            n_agents: instance.n_agents(),
            n_goods: instance.n_goods(),
            capacity,
            approvals,
        }
    }

    pub fn max_flow(&self) -> FlowResult {
        let n = self.n_agents;
        let source = 0;
        let sink = 1 + n + self.n_goods;
        let mut g = Residual::new(sink + 1);
        for i in 0..n {
            g.add_edge(source, 1 + i, self.capacity);
        }
        let approval_edges: Vec<(usize, usize, usize)> = self
            .approvals
            .iter()
            .map(|&(i, j)| (i, j, g.add_edge(1 + i, 1 + n + j, 1)))
            .collect();
        for j in 0..self.n_goods {
            g.add_edge(1 + n + j, sink, 1);
        }
        let value = g.max_flow(source, sink);
        let mut assignment = vec![None; self.n_goods];
        for (i, j, e) in approval_edges {
            if g.cap[e] == 0 {
                assignment[j] = Some(i);
            }
        }
        FlowResult { value, assignment }
    }
}

/// Edmonds–Karp on an adjacency-list residual graph; edges are explored in
/// insertion order, so the resulting flow is deterministic.
struct Residual {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl Residual {
    fn new(nodes: usize) -> Self {
        Residual {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: u64) -> usize {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.adj[u].push(e);
        self.to.push(u);
        self.cap.push(0);
        self.adj[v].push(e + 1);
        e
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        via[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = u64::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
    }
}

/// One edge `i → k` per good held by `i` in `from` and by `k ≠ i` in `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformationGraph {
    pub n_agents: usize,
    /// `(from_agent, to_agent, good)`.
    pub edges: Vec<(usize, usize, usize)>,
}

impl TransformationGraph {
    pub fn new(from: &Allocation, to: &Allocation) -> Self {
        let edges = from
            .owners()
            .iter()
            .zip(to.owners())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(g, (&a, &b))| (a, b, g))
            .collect();
        TransformationGraph {
            n_agents: from.n_agents(),
            edges,
        }
    }

    pub fn out_degree(&self, agent: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == agent).count()
    }

    pub fn in_degree(&self, agent: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == agent).count()
    }
}
