//! Primal network simplex for dense bipartite transportation problems.
//!
//! Spanning-tree bookkeeping (parent, thread, successor counts) and the
//! block-search pivot follow the classical LEMON layout. Arcs between
//! sources and sinks are implicit: arc `e < m·k` joins source `e / k` to
//! sink `e % k`. Each node also has an artificial arc to the root forming
//! the initial feasible tree.

use crate::scalar::Real;

const STATE_UPPER: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

#[allow(dead_code)]
pub(crate) struct FlowSolution<T> {
    /// `(source, sink, flow)` with positive flow.
    pub flows: Vec<(usize, usize, i64)>,
    /// `u_i + v_j ≤ c_ij` potentials, tight on positive flows.
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub pivots: usize,
}

struct Simplex<'a, T> {
    m: usize,
    k: usize,
    cost: &'a [T],
    art_cost: T,
    arc_num: usize,
    node_num: usize,
    root: usize,
    // artificial arc ends, indexed by node
    art_source: Vec<usize>,
    art_target: Vec<usize>,
    flow: Vec<i64>,
    state: Vec<i8>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    pi: Vec<T>,
    dirty_revs: Vec<usize>,
    // pivot state
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
    next_arc: usize,
    block_size: usize,
    eps: T,
}

const NONE: usize = usize::MAX;

impl<'a, T: Real> Simplex<'a, T> {
    fn new(cost: &'a [T], supply: &[i64], demand: &[i64]) -> Self {
        let m = supply.len();
        let k = demand.len();
        let arc_num = m * k;
        let node_num = m + k;
        let root = node_num;
        let all_arcs = arc_num + node_num;
        let max_cost = cost.iter().fold(T::zero(), |a, &c| a.max(c.abs()));
        let art_cost = (max_cost + T::one()) * T::of(node_num);
        let mut s = Self {
            m,
            k,
            cost,
            art_cost,
            arc_num,
            node_num,
            root,
            art_source: vec![0; node_num],
            art_target: vec![0; node_num],
            flow: vec![0; all_arcs],
            state: vec![STATE_LOWER; all_arcs],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            pi: vec![T::zero(); node_num + 1],
            dirty_revs: Vec::new(),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0,
            next_arc: 0,
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            eps: T::epsilon() * T::lit(64.0) * (max_cost + T::one()),
        };
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            let sup = if u < m { supply[u] } else { -demand[u - m] };
            if sup >= 0 {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = T::zero();
                s.art_source[u] = u;
                s.art_target[u] = root;
                s.flow[e] = sup;
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.art_source[u] = root;
                s.art_target[u] = u;
                s.flow[e] = -sup;
            }
        }
        s
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.k
        } else {
            self.art_source[e - self.arc_num]
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.m + e % self.k
        } else {
            self.art_target[e - self.arc_num]
        }
    }

    #[inline]
    fn arc_cost(&self, e: usize) -> T {
        if e < self.arc_num {
            self.cost[e]
        } else if self.art_source[e - self.arc_num] == self.root {
            self.art_cost
        } else {
            T::zero()
        }
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = T::zero();
        let mut cnt = self.block_size;
        let mut found = NONE;
        let total = self.arc_num;
        let start = self.next_arc;
        let mut scanned = 0usize;
        let mut e = start;
        while scanned < total {
            if self.state[e] != STATE_TREE {
                let i = e / self.k;
                let j = self.m + e % self.k;
                let c = T::lit(self.state[e] as f64) * (self.cost[e] + self.pi[i] - self.pi[j]);
                if c < min {
                    min = c;
                    found = e;
                }
            }
            scanned += 1;
            e += 1;
            if e == total {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if min < -self.eps {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if found == NONE || min >= -self.eps {
            return false;
        }
        self.in_arc = found;
        self.next_arc = e;
        true
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
        let mut delta = i64::MAX;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            // arcs are uncapacitated: only arcs pointing along the cycle
            // direction against their flow can block
            if self.pred_dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    self.u_out = u;
                    result = 2;
                }
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
        self.delta = delta;
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
        self.state[out] = if self.flow[out] == 0 {
            STATE_LOWER
        } else {
            STATE_UPPER
        };
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) {
                DIR_UP
            } else {
                DIR_DOWN
            };
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

            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
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
                tmp_sc += self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
                p = self.parent[u];
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) {
                DIR_UP
            } else {
                DIR_DOWN
            };
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
        let dir = T::lit(self.pred_dir[self.u_in] as f64);
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - dir * self.arc_cost(self.in_arc);
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn run(&mut self) -> usize {
        let mut pivots = 0;
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            assert!(change && self.delta < i64::MAX, "transport problem is bounded");
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            pivots += 1;
        }
        pivots
    }
}

/// Min-cost flow from integer `supply` (rows) to integer `demand` (columns)
/// over the complete bipartite graph with row-major `cost`. Totals must
/// match.
pub(crate) fn solve<T: Real>(cost: &[T], supply: &[i64], demand: &[i64]) -> FlowSolution<T> {
    let m = supply.len();
    let k = demand.len();
    assert_eq!(cost.len(), m * k);
    assert_eq!(supply.iter().sum::<i64>(), demand.iter().sum::<i64>(), "unbalanced supplies");
    let mut s = Simplex::new(cost, supply, demand);
    let pivots = s.run();
    for u in 0..s.node_num {
        assert_eq!(s.flow[s.arc_num + u], 0, "artificial arc carries flow at optimum");
    }
    let mut flows = Vec::new();
    for e in 0..s.arc_num {
        if s.flow[e] > 0 {
            flows.push((e / k, e % k, s.flow[e]));
        }
    }
    // reduced cost c + π_i - π_j ≥ 0, so u_i = -π_i and v_j = π_j
    let u = s.pi[..m].iter().map(|&x| -x).collect();
    let v = s.pi[m..m + k].to_vec();
    FlowSolution {
        flows,
        u,
        v,
        pivots,
    }
}
