//! Primal network simplex for the uniform-weight transport problem.
//!
//! Follows the spanning-tree layout of LEMON's `NetworkSimplex` (thread,
//! reverse thread, successor counts, last successors) with block-search
//! pivoting and a strongly feasible leaving-arc rule. Sources carry `m` units
//! each and sinks demand `n` units each, so flows stay integral; a flow of
//! `f` on arc `(i, j)` is transport mass `f / (n m)`.

use crate::error::{Result, WimError};

const NONE: usize = usize::MAX;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;

/// Optimal coupling between `n` sources and `m` sinks with uniform weights.
#[derive(Debug, Clone)]
pub(crate) struct Solution {
    /// Total cost `Σ mass_ij c_ij`.
    pub cost: f64,
    /// `(i, j, mass)` for every arc carrying flow.
    pub flows: Vec<(usize, usize, f64)>,
}

struct Solver<'a> {
    n: usize,
    m: usize,
    node_num: usize,
    arc_num: usize,
    root: usize,
    cost: &'a [f64],
    art_cost: f64,
    eps: f64,
    art_source: Vec<usize>,
    art_target: Vec<usize>,
    flow: Vec<i64>,
    state: Vec<i8>,
    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,
    block_size: usize,
    next_arc: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
}

impl<'a> Solver<'a> {
    fn new(n: usize, m: usize, cost: &'a [f64]) -> Self {
        let node_num = n + m;
        let arc_num = n * m;
        let all_arc = arc_num + node_num;
        let root = node_num;
        let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
        let art_cost = (max_cost + 1.0) * node_num as f64;
        let mut s = Solver {
            n,
            m,
            node_num,
            arc_num,
            root,
            cost,
            art_cost,
            eps: 1e-12 * max_cost.max(f64::MIN_POSITIVE),
            art_source: vec![0; node_num],
            art_target: vec![0; node_num],
            flow: vec![0; all_arc],
            state: vec![STATE_LOWER; all_arc],
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0,
        };
        s.init();
        s
    }

    fn init(&mut self) {
        let root = self.root;
        self.parent[root] = NONE;
        self.pred[root] = NONE;
        self.thread[root] = 0;
        self.rev_thread[0] = root;
        self.succ_num[root] = self.node_num + 1;
        self.last_succ[root] = root - 1;
        self.pi[root] = 0.0;
        for u in 0..self.node_num {
            let e = self.arc_num + u;
            self.parent[u] = root;
            self.pred[u] = e;
            self.thread[u] = u + 1;
            self.rev_thread[u + 1] = u;
            self.succ_num[u] = 1;
            self.last_succ[u] = u;
            self.state[e] = STATE_TREE;
            if u < self.n {
                // Source: supply m, artificial arc u -> root at zero cost.
                self.pred_dir[u] = DIR_UP;
                self.pi[u] = 0.0;
                self.art_source[u] = u;
                self.art_target[u] = root;
                self.flow[e] = self.m as i64;
            } else {
                // Sink: demand n, artificial arc root -> u.
                self.pred_dir[u] = DIR_DOWN;
                self.pi[u] = self.art_cost;
                self.art_source[u] = root;
                self.art_target[u] = u;
                self.flow[e] = self.n as i64;
            }
        }
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.m
        } else {
            self.art_source[e - self.arc_num]
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.n + e % self.m
        } else {
            self.art_target[e - self.arc_num]
        }
    }

    #[inline]
    fn arc_cost(&self, e: usize) -> f64 {
        if e < self.arc_num {
            self.cost[e]
        } else if self.art_source[e - self.arc_num] == self.root {
            self.art_cost
        } else {
            0.0
        }
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.eps;
        let mut found = false;
        let mut cnt = self.block_size;
        let total = self.arc_num;
        let mut e = self.next_arc;
        let mut i = e / self.m;
        let mut j = e % self.m;
        for _ in 0..total {
            let st = self.state[e];
            if st != STATE_TREE {
                let c = st as f64 * (self.cost[e] + self.pi[i] - self.pi[self.n + j]);
                if c < min {
                    min = c;
                    self.in_arc = e;
                    found = true;
                }
            }
            e += 1;
            j += 1;
            if j == self.m {
                j = 0;
                i += 1;
            }
            if e == total {
                e = 0;
                i = 0;
                j = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if found {
            self.next_arc = e;
        }
        found
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (self.source(self.in_arc), self.target(self.in_arc))
        } else {
            (self.target(self.in_arc), self.source(self.in_arc))
        };
        self.delta = i64::MAX;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN { i64::MAX } else { self.flow[e] };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP { i64::MAX } else { self.flow[e] };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self) {
        if self.delta > 0 {
            let val = self.state[self.in_arc] as i64 * self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
            let mut u = self.target(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        debug_assert_eq!(self.flow[out], 0, "uncapacitated arcs leave the tree empty");
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let in_arc = self.in_arc;
        let join = self.join;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) { DIR_UP } else { DIR_DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            let mut p = self.parent[u];
            while u != u_in {
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u];
                tmp_sc -= self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
                p = self.parent[u];
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - self.pred_dir[self.u_in] as f64 * self.arc_cost(self.in_arc);
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn run(&mut self) -> Result<()> {
        // Generous ceiling; the pivot count is normally a small multiple of the node count.
        let max_pivots = 50 * (self.arc_num + self.node_num) + 10_000;
        let mut pivots = 0usize;
        while self.find_entering_arc() {
            self.find_join_node();
            if !self.find_leaving_arc() || self.delta == i64::MAX {
                return Err(WimError::Precondition("transport problem is unbounded".into()));
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            pivots += 1;
            if pivots > max_pivots {
                return Err(WimError::Precondition("network simplex exceeded its pivot budget".into()));
            }
        }
        if (self.arc_num..self.arc_num + self.node_num).any(|e| self.flow[e] != 0) {
            return Err(WimError::Precondition("transport problem is infeasible".into()));
        }
        Ok(())
    }
}

/// Solves the balanced transport problem between `n` uniform sources and `m`
/// uniform sinks; `cost[i * m + j]` is the cost of moving source `i` to sink `j`.
pub(crate) fn solve(n: usize, m: usize, cost: &[f64]) -> Result<Solution> {
    assert_eq!(cost.len(), n * m);
    if n == 0 || m == 0 {
        return Err(WimError::Precondition("transport needs non-empty point sets".into()));
    }
    let mut s = Solver::new(n, m, cost);
    s.run()?;
    let total = (n * m) as f64;
    let mut flows = Vec::with_capacity(n + m);
    let mut value = 0.0;
    for e in 0..s.arc_num {
        if s.flow[e] > 0 {
            let mass = s.flow[e] as f64 / total;
            value += mass * cost[e];
            flows.push((e / m, e % m, mass));
        }
    }
    Ok(Solution { cost: value, flows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_assignment_is_free() {
        let n = 5;
        let cost: Vec<f64> = (0..n * n).map(|e| ((e / n) as f64 - (e % n) as f64).abs()).collect();
        let s = solve(n, n, &cost).unwrap();
        assert!(s.cost.abs() < 1e-15);
        assert_eq!(s.flows.len(), n);
    }

    #[test]
    fn unequal_sizes_split_mass() {
        // Two sources at 0 and 1, three sinks at 0, 0.5, 1 on a line.
        let a = [0.0f64, 1.0];
        let b = [0.0f64, 0.5, 1.0];
        let cost: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).abs())).collect();
        let s = solve(2, 3, &cost).unwrap();
        // Monotone coupling: 1/3 at cost 0, 1/6 at 0.5, 1/6 at 0.5, 1/3 at cost 0.
        assert!((s.cost - 1.0 / 6.0).abs() < 1e-14, "{}", s.cost);
        for i in 0..2 {
            let row: f64 = s.flows.iter().filter(|f| f.0 == i).map(|f| f.2).sum();
            assert!((row - 0.5).abs() < 1e-15);
        }
    }
}
