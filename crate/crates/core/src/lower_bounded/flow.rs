//! Min-cost flow with arc lower bounds.
//!
//! Lower bounds are moved into node supplies, a super source and super sink
//! absorb the imbalance, and successive shortest paths (Dijkstra on reduced
//! costs) route it. Arc costs must be nonnegative.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: u64,
    pub capacity: u64,
    pub cost: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<FlowArc>,
}

/// A feasible circulation of least cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Circulation {
    /// Flow on every arc, in insertion order.
    pub flow: Vec<u64>,
    pub cost: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> FlowNetwork {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn add_arc(
        &mut self,
        from: usize,
        to: usize,
        lower: u64,
        capacity: u64,
        cost: f64,
    ) -> usize {
        assert!(
            from < self.nodes && to < self.nodes,
            "arc endpoint out of range"
        );
        assert!(
            lower <= capacity,
            "lower bound {lower} above capacity {capacity}"
        );
        assert!(
            cost >= 0.0 && cost.is_finite(),
            "arc costs must be finite and nonnegative"
        );
        self.arcs.push(FlowArc {
            from,
            to,
            lower,
            capacity,
            cost,
        });
        self.arcs.len() - 1
    }

    /// Cheapest circulation meeting every lower bound and capacity, or
    /// `None` if none exists.
    pub fn min_cost_circulation(&self) -> Option<Circulation> {
        let source = self.nodes;
        let sink = self.nodes + 1;
        let mut residual = Residual::new(self.nodes + 2);
        let mut supply = vec![0i128; self.nodes];
        let mut handles = Vec::with_capacity(self.arcs.len());
        for arc in &self.arcs {
            supply[arc.to] += arc.lower as i128;
            supply[arc.from] -= arc.lower as i128;
            handles.push(residual.add(arc.from, arc.to, arc.capacity - arc.lower, arc.cost));
        }
        let mut required = 0u64;
        for (v, &b) in supply.iter().enumerate() {
            if b > 0 {
                residual.add(source, v, b as u64, 0.0);
                required += b as u64;
            } else if b < 0 {
                residual.add(v, sink, (-b) as u64, 0.0);
            }
        }
        let routed = residual.route(source, sink, required);
        if routed < required {
            return None;
        }
        let flow: Vec<u64> = self
            .arcs
            .iter()
            .zip(&handles)
            .map(|(arc, &h)| arc.lower + residual.flow_on(h))
            .collect();
        let cost = self
            .arcs
            .iter()
            .zip(&flow)
            .map(|(arc, &x)| arc.cost * x as f64)
            .sum();
        Some(Circulation { flow, cost })
    }
}

struct Edge {
    to: usize,
    cap: u64,
    cost: f64,
}

struct Residual {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed for a min-heap; node index breaks ties
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl Residual {
    fn new(nodes: usize) -> Residual {
        Residual {
            edges: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: u64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        id
    }

    fn flow_on(&self, id: usize) -> u64 {
        self.edges[id ^ 1].cap
    }

    /// Sends up to `limit` units from `source` to `sink` along successive
    /// cheapest paths; returns the amount sent.
    fn route(&mut self, source: usize, sink: usize, limit: u64) -> u64 {
        let n = self.adjacency.len();
        let mut potential = vec![0.0; n];
        let mut sent = 0;
        while sent < limit {
            let mut dist = vec![f64::INFINITY; n];
            let mut parent = vec![usize::MAX; n];
            let mut heap = BinaryHeap::new();
            dist[source] = 0.0;
            heap.push(Entry(0.0, source));
            while let Some(Entry(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adjacency[u] {
                    let edge = &self.edges[e];
                    if edge.cap == 0 {
                        continue;
                    }
                    let reduced = (edge.cost + potential[u] - potential[edge.to]).max(0.0);
                    let candidate = d + reduced;
                    if candidate < dist[edge.to] {
                        dist[edge.to] = candidate;
                        parent[edge.to] = e;
                        heap.push(Entry(candidate, edge.to));
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            // capping at the sink distance keeps every reduced cost nonnegative
            for v in 0..n {
                potential[v] += dist[v].min(dist[sink]);
            }
            let mut push = limit - sent;
            let mut v = sink;
            while v != source {
                let e = parent[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = parent[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            sent += push;
        }
        sent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_forces_expensive_arc() {
        // two parallel arcs a->b closed by a free return arc b->a
        let mut net = FlowNetwork::new(2);
        let cheap = net.add_arc(0, 1, 0, 5, 1.0);
        let pricey = net.add_arc(0, 1, 2, 5, 3.0);
        net.add_arc(1, 0, 0, 10, 0.0);
        let c = net.min_cost_circulation().unwrap();
        assert_eq!(c.flow[cheap], 0);
        assert_eq!(c.flow[pricey], 2);
        assert_eq!(c.cost, 6.0);
    }

    #[test]
    fn unsatisfiable_lower_bound() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 3, 3, 0.0);
        net.add_arc(1, 0, 0, 2, 0.0);
        assert!(net.min_cost_circulation().is_none());
    }

    #[test]
    fn zero_circulation_without_lower_bounds() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 0, 4, 2.0);
        net.add_arc(1, 2, 0, 4, 2.0);
        net.add_arc(2, 0, 0, 4, 2.0);
        let c = net.min_cost_circulation().unwrap();
        assert_eq!(c.cost, 0.0);
        assert!(c.flow.iter().all(|&x| x == 0));
    }
}
