use num_bigint::BigInt;
use num_traits::Zero;

/// Residual graph with paired arcs (`2k` forward, `2k + 1` reverse).
/// Adjacency lists are sorted by head node so that every search visits
/// neighbours in ascending node id.
pub(crate) struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<BigInt>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    pub fn new(nodes: usize) -> Self {
        Residual {
            head: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: u64, cost: BigInt) -> usize {
        let id = self.head.len();
        self.head.push(to);
        self.cap.push(cap.min(i64::MAX as u64) as i64);
        self.cost.push(cost.clone());
        self.adj[from].push(id);
        self.head.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[to].push(id + 1);
        id
    }

    pub fn finish(&mut self) {
        let head = &self.head;
        for list in &mut self.adj {
            list.sort_by_key(|&a| (head[a], a));
        }
    }

    /// Flow currently on forward arc `arc`.
    pub fn flow(&self, arc: usize) -> i64 {
        self.cap[arc ^ 1]
    }

    /// Ford–Fulkerson with depth-first search, lowest node id first.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0u64;
        loop {
            let mut visited = vec![false; self.adj.len()];
            let pushed = self.dfs(source, sink, i64::MAX, &mut visited);
            if pushed == 0 {
                return total;
            }
            total += pushed as u64;
        }
    }

    fn dfs(&mut self, node: usize, sink: usize, limit: i64, visited: &mut [bool]) -> i64 {
        if node == sink {
            return limit;
        }
        visited[node] = true;
        for k in 0..self.adj[node].len() {
            let arc = self.adj[node][k];
            let next = self.head[arc];
            if self.cap[arc] > 0 && !visited[next] {
                let pushed = self.dfs(next, sink, limit.min(self.cap[arc]), visited);
                if pushed > 0 {
                    self.cap[arc] -= pushed;
                    self.cap[arc ^ 1] += pushed;
                    return pushed;
                }
            }
        }
        0
    }

    /// Successive shortest paths with Bellman–Ford (costs may be negative;
    /// the initial graph is acyclic so no negative cycle ever appears).
    /// Stops after `limit` units, or when the sink becomes unreachable.
    pub fn min_cost_flow(&mut self, source: usize, sink: usize, limit: Option<u64>) -> (u64, BigInt) {
        let n = self.adj.len();
        let mut flow = 0u64;
        let mut cost = BigInt::zero();
        while limit.is_none_or(|l| flow < l) {
            let mut dist: Vec<Option<BigInt>> = vec![None; n];
            let mut parent: Vec<Option<usize>> = vec![None; n];
            dist[source] = Some(BigInt::zero());
            for _ in 0..n {
                let mut changed = false;
                for u in 0..n {
                    let Some(du) = dist[u].clone() else { continue };
                    for &arc in &self.adj[u] {
                        if self.cap[arc] <= 0 {
                            continue;
                        }
                        let v = self.head[arc];
                        let cand = &du + &self.cost[arc];
                        if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                            dist[v] = Some(cand);
                            parent[v] = Some(arc);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[sink].is_none() {
                break;
            }
            let mut bottleneck = i64::MAX;
            let mut v = sink;
            while v != source {
                let arc = parent[v].expect("path");
                bottleneck = bottleneck.min(self.cap[arc]);
                v = self.head[arc ^ 1];
            }
            if let Some(l) = limit {
                bottleneck = bottleneck.min((l - flow) as i64);
            }
            let mut v = sink;
            while v != source {
                let arc = parent[v].expect("path");
                self.cap[arc] -= bottleneck;
                self.cap[arc ^ 1] += bottleneck;
                cost += &self.cost[arc] * BigInt::from(bottleneck);
                v = self.head[arc ^ 1];
            }
            flow += bottleneck as u64;
        }
        (flow, cost)
    }
}
