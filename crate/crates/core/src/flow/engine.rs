//! Successive shortest paths with node potentials on the bipartite network
//! source cells -> sink cells -> terminal.
//!
//! Each phase runs Dijkstra on reduced costs, updates the potentials and then
//! saturates as many zero-reduced-cost augmenting paths as a depth-first pass
//! finds. Edge lists are sorted by cost; since every potential stays below the
//! terminal's, scanning a source's list can stop once its cost alone exceeds
//! the best known distance to the terminal.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub(crate) const MASS_SCALE: f64 = 1e12;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct Key(f64, u32);
impl Eq for Key {}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

pub(crate) struct Network {
    pub ns: usize,
    pub nt: usize,
    pub supply_left: Vec<i64>,
    pub cap_left: Vec<i64>,
    pub edge_start: Vec<usize>,
    pub edge_sink: Vec<u32>,
    pub edge_src: Vec<u32>,
    pub edge_cost: Vec<f64>,
    pub edge_flow: Vec<i64>,
    sink_in: Vec<Vec<u32>>,
    pub pot: Vec<f64>,
    dist: Vec<f64>,
    done: Vec<bool>,
    parent: Vec<u32>,
    heap: BinaryHeap<Reverse<Key>>,
    pub phases: usize,
}

impl Network {
    /// `edges[i]` lists `(sink, cost)` pairs of source `i`.
    pub fn new(supply: Vec<i64>, capacity: Vec<i64>, edges: Vec<Vec<(u32, f64)>>) -> Network {
        let ns = supply.len();
        let nt = capacity.len();
        let mut edge_start = Vec::with_capacity(ns + 1);
        let total: usize = edges.iter().map(Vec::len).sum();
        let mut edge_sink = Vec::with_capacity(total);
        let mut edge_src = Vec::with_capacity(total);
        let mut edge_cost = Vec::with_capacity(total);
        edge_start.push(0);
        for (i, mut list) in edges.into_iter().enumerate() {
            list.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            for (j, c) in list {
                edge_sink.push(j);
                edge_src.push(i as u32);
                edge_cost.push(c);
            }
            edge_start.push(edge_sink.len());
        }
        let nodes = ns + nt + 1;
        Network {
            ns,
            nt,
            supply_left: supply,
            cap_left: capacity,
            edge_start,
            edge_flow: vec![0; edge_sink.len()],
            edge_sink,
            edge_src,
            edge_cost,
            sink_in: vec![Vec::new(); nt],
            pot: vec![0.0; nodes],
            dist: vec![f64::INFINITY; nodes],
            done: vec![false; nodes],
            parent: vec![NONE; nodes],
            heap: BinaryHeap::new(),
            phases: 0,
        }
    }

    /// Starts from the given source potentials. Sinks without flow lead only
    /// to the terminal, so they all sit at its potential, the largest value
    /// dual feasibility and `cap` allow.
    pub fn warm_start(&mut self, source_pot: &[f64], cap: f64) {
        let ns = self.ns;
        let mut pot_t = cap;
        for (i, &pi) in source_pot.iter().enumerate() {
            for e in self.edge_start[i]..self.edge_start[i + 1] {
                pot_t = pot_t.min(self.edge_cost[e] + pi);
            }
        }
        self.pot[..ns].copy_from_slice(source_pot);
        self.pot[ns..].fill(pot_t);
    }

    fn terminal(&self) -> usize {
        self.ns + self.nt
    }

    pub fn solve(&mut self) -> Result<()> {
        let mut left: i64 = self.supply_left.iter().sum();
        while left > 0 {
            let Some(d) = self.dijkstra() else {
                return Err(Error::Capacity {
                    shortfall: left as f64 / MASS_SCALE,
                    required_extension: None,
                });
            };
            self.update_potentials(d);
            let mut pushed = self.augment_admissible();
            if pushed == 0 {
                pushed = self.augment_parent_path();
            }
            if pushed <= 0 {
                return Err(Error::Solver("no augmenting progress along a shortest path".into()));
            }
            left -= pushed;
            self.phases += 1;
            for list in &mut self.sink_in {
                list.retain(|&e| self.edge_flow[e as usize] > 0);
            }
        }
        Ok(())
    }

    fn relax(&mut self, v: usize, nd: f64, via: u32) {
        if nd < self.dist[v] {
            self.dist[v] = nd;
            self.parent[v] = via;
            self.heap.push(Reverse(Key(nd, v as u32)));
        }
    }

    fn dijkstra(&mut self) -> Option<f64> {
        let (ns, t) = (self.ns, self.terminal());
        self.dist.fill(f64::INFINITY);
        self.done.fill(false);
        self.parent.fill(NONE);
        self.heap.clear();
        for i in 0..ns {
            if self.supply_left[i] > 0 {
                self.dist[i] = 0.0;
                self.heap.push(Reverse(Key(0.0, i as u32)));
            }
        }
        let pot_t = self.pot[t];
        while let Some(Reverse(Key(d, u))) = self.heap.pop() {
            let u = u as usize;
            if self.done[u] || d > self.dist[u] {
                continue;
            }
            self.done[u] = true;
            if u == t {
                return Some(d);
            }
            if u < ns {
                let pu = self.pot[u];
                let base = d + pu - pot_t;
                for e in self.edge_start[u]..self.edge_start[u + 1] {
                    let c = self.edge_cost[e];
                    if base + c >= self.dist[t] {
                        break;
                    }
                    let j = self.edge_sink[e] as usize;
                    let v = ns + j;
                    if self.done[v] {
                        continue;
                    }
                    let nd = d + (c + pu - self.pot[v]).max(0.0);
                    if nd < self.dist[v] {
                        self.relax(v, nd, e as u32);
                        if self.cap_left[j] > 0 {
                            let dt = nd + (self.pot[v] - pot_t).max(0.0);
                            self.relax(t, dt, j as u32);
                        }
                    }
                }
            } else {
                let j = u - ns;
                let pu = self.pot[u];
                for k in 0..self.sink_in[j].len() {
                    let e = self.sink_in[j][k] as usize;
                    if self.edge_flow[e] == 0 {
                        continue;
                    }
                    let i = self.edge_src[e] as usize;
                    if self.done[i] {
                        continue;
                    }
                    let nd = d + (pu - self.edge_cost[e] - self.pot[i]).max(0.0);
                    self.relax(i, nd, e as u32);
                }
                if self.cap_left[j] > 0 {
                    let dt = d + (pu - pot_t).max(0.0);
                    self.relax(t, dt, j as u32);
                }
            }
        }
        None
    }

    fn update_potentials(&mut self, d: f64) {
        for (p, &dv) in self.pot.iter_mut().zip(&self.dist) {
            *p += dv.min(d);
        }
    }

    fn admissible_eps(&self) -> f64 {
        1e-11 * self.pot[self.terminal()].abs().max(1.0)
    }

    /// Depth-first augmentation along zero-reduced-cost edges with current-arc
    /// pointers; nodes that dead-end are skipped for the rest of the pass.
    fn augment_admissible(&mut self) -> i64 {
        let (ns, t) = (self.ns, self.terminal());
        let eps = self.admissible_eps();
        let pot_t = self.pot[t];
        let mut arc: Vec<usize> = (0..ns + self.nt)
            .map(|v| if v < ns { self.edge_start[v] } else { 0 })
            .collect();
        let mut dead = vec![false; ns + self.nt];
        let mut on_path = vec![false; ns + self.nt];
        let mut pushed = 0i64;
        let mut stack: Vec<usize> = Vec::new();
        let mut via: Vec<usize> = Vec::new();
        for s in 0..ns {
            while self.supply_left[s] > 0 && !dead[s] {
                stack.clear();
                via.clear();
                stack.push(s);
                on_path[s] = true;
                let mut found = false;
                while let Some(&u) = stack.last() {
                    let mut next = None;
                    if u < ns {
                        let pu = self.pot[u];
                        while arc[u] < self.edge_start[u + 1] {
                            let e = arc[u];
                            let c = self.edge_cost[e];
                            if c + pu - pot_t > eps {
                                arc[u] = self.edge_start[u + 1];
                                break;
                            }
                            let v = ns + self.edge_sink[e] as usize;
                            if !dead[v] && !on_path[v] && c + pu - self.pot[v] <= eps {
                                next = Some((v, e));
                                break;
                            }
                            arc[u] += 1;
                        }
                    } else {
                        let j = u - ns;
                        let pu = self.pot[u];
                        if self.cap_left[j] > 0 && pu - pot_t <= eps && pot_t - pu <= eps {
                            found = true;
                            break;
                        }
                        while arc[u] < self.sink_in[j].len() {
                            let e = self.sink_in[j][arc[u]] as usize;
                            let i = self.edge_src[e] as usize;
                            if self.edge_flow[e] > 0
                                && !dead[i]
                                && !on_path[i]
                                && pu - self.edge_cost[e] - self.pot[i] <= eps
                            {
                                next = Some((i, e));
                                break;
                            }
                            arc[u] += 1;
                        }
                    }
                    match next {
                        Some((v, e)) => {
                            on_path[v] = true;
                            stack.push(v);
                            via.push(e);
                        }
                        None => {
                            dead[u] = true;
                            on_path[u] = false;
                            stack.pop();
                            via.pop();
                            if let Some(&w) = stack.last() {
                                arc[w] += 1;
                            }
                        }
                    }
                }
                if !found {
                    break;
                }
                pushed += self.apply_path(&stack, &via);
                for &v in &stack {
                    on_path[v] = false;
                }
            }
        }
        pushed
    }

    // stack = [s, sink, source, sink, ...], via[k] is the edge between stack[k] and stack[k + 1].
    fn apply_path(&mut self, stack: &[usize], via: &[usize]) -> i64 {
        let ns = self.ns;
        let s = stack[0];
        let last = *stack.last().expect("path is nonempty") - ns;
        let mut amount = self.supply_left[s].min(self.cap_left[last]);
        for (k, &e) in via.iter().enumerate() {
            if stack[k] >= ns {
                amount = amount.min(self.edge_flow[e]);
            }
        }
        if amount <= 0 {
            return 0;
        }
        for (k, &e) in via.iter().enumerate() {
            if stack[k] < ns {
                if self.edge_flow[e] == 0 {
                    self.sink_in[self.edge_sink[e] as usize].push(e as u32);
                }
                self.edge_flow[e] += amount;
            } else {
                self.edge_flow[e] -= amount;
            }
        }
        self.supply_left[s] -= amount;
        self.cap_left[last] -= amount;
        amount
    }

    fn augment_parent_path(&mut self) -> i64 {
        let ns = self.ns;
        let t = self.terminal();
        let mut rev = vec![ns + self.parent[t] as usize];
        let mut edges = Vec::new();
        loop {
            let v = *rev.last().expect("path is nonempty");
            let e = self.parent[v];
            if e == NONE {
                break;
            }
            let e = e as usize;
            edges.push(e);
            rev.push(if v >= ns { self.edge_src[e] as usize } else { ns + self.edge_sink[e] as usize });
        }
        rev.reverse();
        edges.reverse();
        self.apply_path(&rev, &edges)
    }
}
