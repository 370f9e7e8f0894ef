use crate::model::Instance;

/// Assignment network with workers aggregated by group:
/// `source → group l → requester j (cap τ_lj) → sink (cap c_j)`.
///
/// Workers of one group are interchangeable in the worker-level network, so
/// a set of workers is routable iff its per-group counts are. Workers are
/// added one at a time with [`GroupFlow::try_add`]; a unit that cannot be
/// routed is rejected and leaves the flow unchanged. Because routable sets
/// form a matroid, adding candidates in a fixed priority order yields the
/// optimal set for that order (max weight when sorted by weight, the
/// lexicographically smallest when sorted by position).
#[derive(Debug, Clone)]
pub struct GroupFlow {
    m: usize,
    groups: usize,
    residual: Vec<u64>,
    flow: Vec<u64>,
    sink_residual: Vec<u64>,
    value: u64,
    // scratch buffers reused across searches
    seen_group: Vec<bool>,
    seen_req: Vec<bool>,
    via_req: Vec<usize>,
    via_group: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl GroupFlow {
    pub fn new(inst: &Instance, caps: &[u64]) -> Self {
        let m = inst.m();
        let groups = inst.num_groups();
        assert_eq!(caps.len(), m);
        let mut residual = Vec::with_capacity(groups * m);
        for row in inst.tau().rows() {
            residual.extend_from_slice(row);
        }
        GroupFlow {
            m,
            groups,
            residual,
            flow: vec![0; groups * m],
            sink_residual: caps.to_vec(),
            value: 0,
            seen_group: vec![false; groups],
            seen_req: vec![false; m],
            via_req: vec![NONE; m],
            via_group: vec![NONE; groups],
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Units of group `group` currently routed to requester `requester`.
    pub fn flow_between(&self, group: usize, requester: usize) -> u64 {
        self.flow[group * self.m + requester]
    }

    /// Routes one more unit out of `group`. Searches groups and requesters in
    /// ascending index order; returns `false` (and changes nothing) when no
    /// augmenting path exists.
    pub fn try_add(&mut self, group: usize) -> bool {
        self.seen_group.iter_mut().for_each(|x| *x = false);
        self.seen_req.iter_mut().for_each(|x| *x = false);
        // via_req[j]: group we reached requester j from (forward arc)
        // via_group[g]: requester we reached group g from (reverse arc)
        let mut stack = vec![group];
        self.seen_group[group] = true;
        self.via_group[group] = NONE;
        let mut end = NONE;
        'search: while let Some(g) = stack.pop() {
            for j in 0..self.m {
                if self.seen_req[j] || self.residual[g * self.m + j] == 0 {
                    continue;
                }
                self.seen_req[j] = true;
                self.via_req[j] = g;
                if self.sink_residual[j] > 0 {
                    end = j;
                    break 'search;
                }
                for g2 in (0..self.groups).rev() {
                    if !self.seen_group[g2] && self.flow[g2 * self.m + j] > 0 {
                        self.seen_group[g2] = true;
                        self.via_group[g2] = j;
                        stack.push(g2);
                    }
                }
            }
        }
        if end == NONE {
            return false;
        }
        self.sink_residual[end] -= 1;
        let mut j = end;
        loop {
            let g = self.via_req[j];
            let idx = g * self.m + j;
            self.residual[idx] -= 1;
            self.flow[idx] += 1;
            let back = self.via_group[g];
            if back == NONE {
                break;
            }
            // undo one unit of g → back, freeing requester `back` for g's predecessor
            let idx = g * self.m + back;
            self.residual[idx] += 1;
            self.flow[idx] -= 1;
            j = back;
        }
        self.value += 1;
        true
    }

    /// Max flow for the given per-group supplies, added group by group.
    /// A group that fails once can never succeed later in the same flow.
    pub fn saturate(&mut self, counts: &[u64]) -> u64 {
        for (g, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                if !self.try_add(g) {
                    break;
                }
            }
        }
        self.value
    }
}
