//! Depth-first search over proper partial facet lists.
//!
//! Vertex labels are used as a prefix `0..used`; a new facet may only
//! introduce the next unused labels in increasing order, so every partial
//! list is one representative of its relabelings by unused labels.
//!
//! Branching prefers an edge that lies in exactly two facets so far. In a
//! 2-simple sphere that edge lies in exactly one further facet, so the
//! candidates for that facet partition the completions. When no such edge
//! exists, an unsaturated facet is picked and one of its missing neighbours
//! is chosen; there the branches are made disjoint by excluding the earlier
//! siblings from later subtrees.

use std::time::Instant;

use super::{max_facet_size, PVectorCandidate};
use crate::complex::{bits, FacetList};

/// Forbids every facet `g` with `g & used == inner` and exactly `fresh`
/// vertices outside `used`. Since labels outside `used` are interchangeable
/// at the time the exclusion is made, this is the orbit of one facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exclusion {
    pub used: u64,
    pub inner: u64,
    pub fresh: u32,
}

impl Exclusion {
    fn of(g: u64, used: u64) -> Self {
        Exclusion { used, inner: g & used, fresh: (g & !used).count_ones() }
    }

    fn matches(&self, g: u64) -> bool {
        g & self.used == self.inner && (g & !self.used).count_ones() == self.fresh
    }
}

/// A subtree of the search: the facets fixed so far in insertion order and
/// the facet classes excluded below it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub facets: Vec<u64>,
    pub exclusions: Vec<Exclusion>,
}

pub(crate) struct TaskOutput {
    pub leaves: Vec<FacetList>,
    pub nodes: u64,
}

struct Aborted;

struct Ctx {
    deadline: Option<Instant>,
    split_at: Option<usize>,
    nodes: u64,
    leaves: Vec<FacetList>,
    tasks: Vec<Task>,
}

impl Ctx {
    fn tick(&mut self) -> Result<(), Aborted> {
        self.nodes += 1;
        if self.nodes % 512 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Aborted);
                }
            }
        }
        Ok(())
    }
}

struct State {
    n: usize,
    m: usize,
    imax: usize,
    facets: Vec<u64>,
    /// Number of neighbours (facets sharing a triangle) of each facet.
    nbrs: Vec<usize>,
    p_rem: Vec<usize>,
    used: Vec<usize>,
    /// Number of facets containing each vertex pair, indexed `u * n + v`.
    pair: Vec<u8>,
    edges: usize,
    vdeg: Vec<usize>,
    /// Missing neighbours summed over all facets.
    deficit: usize,
    exclusions: Vec<Exclusion>,
}

fn slots(size: usize) -> usize {
    2 * size - 4
}

fn prefix(k: usize) -> u64 {
    if k == 0 {
        0
    } else {
        u64::MAX >> (64 - k)
    }
}

/// Calls `f` on every `r`-subset of `pool`; stops early when `f` returns false.
fn subsets(pool: u64, r: usize, f: &mut impl FnMut(u64) -> bool) -> bool {
    fn rec(pool: u64, r: usize, acc: u64, f: &mut impl FnMut(u64) -> bool) -> bool {
        if r == 0 {
            return f(acc);
        }
        if (pool.count_ones() as usize) < r {
            return true;
        }
        let low = pool & pool.wrapping_neg();
        rec(pool & !low, r - 1, acc | low, f) && rec(pool & !low, r, acc, f)
    }
    rec(pool, r, 0, f)
}

impl State {
    fn new(cand: &PVectorCandidate) -> Self {
        let n = cand.n;
        let imax = max_facet_size(n).max(cand.p.max_size().unwrap_or(0));
        State {
            n,
            m: cand.m,
            imax,
            facets: Vec::new(),
            nbrs: Vec::new(),
            p_rem: (0..=imax).map(|i| cand.p.get(i)).collect(),
            used: vec![0],
            pair: vec![0; n * n],
            edges: 0,
            vdeg: vec![0; n],
            deficit: 0,
            exclusions: Vec::new(),
        }
    }

    fn used_mask(&self) -> u64 {
        prefix(*self.used.last().unwrap())
    }

    fn n_used(&self) -> usize {
        *self.used.last().unwrap()
    }

    /// Whether `g` can be added: sizes and counts stay within bounds, the
    /// list stays proper and `g` is not excluded.
    fn fits(&self, g: u64) -> bool {
        let s = g.count_ones() as usize;
        if s > self.imax || self.p_rem[s] == 0 {
            return false;
        }
        let mut tris = [0u64; 64];
        let mut nt = 0;
        for (j, &h) in self.facets.iter().enumerate() {
            let x = g & h;
            match x.count_ones() {
                0 | 1 => {}
                3 => {
                    // (I1) allows the triangle; h must still have room.
                    if self.nbrs[j] >= slots(h.count_ones() as usize) {
                        return false;
                    }
                    tris[nt] = x;
                    nt += 1;
                }
                _ => return false,
            }
        }
        if nt > slots(s) {
            return false;
        }
        // (I2): two facets meeting g in the same triangle would meet each
        // other in it too.
        for a in 0..nt {
            for b in a + 1..nt {
                if tris[a] == tris[b] {
                    return false;
                }
            }
        }
        // (I3) is equivalent to no vertex pair lying in four facets. A pair in
        // three facets at a vertex of degree k has one more facet than the
        // vertex figure allows once k exceeds the bound below.
        let mut new_edges = 0;
        let vs: Vec<usize> = bits(g).collect();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                match self.pair[u * self.n + v] {
                    0 => {}
                    1 => new_edges += 1,
                    2 => {}
                    _ => return false,
                }
            }
        }
        // Every edge of a 2s2s sphere lies in at least two facets, and the
        // edge count is m, so more than m such pairs cannot be completed.
        if self.edges + new_edges > self.m {
            return false;
        }
        // A vertex in k facets has a simple 3-polytope with k facets as its
        // vertex figure, which has 2k - 4 vertices, one per edge at v; these
        // go to distinct vertices, so 2k - 4 <= n - 1.
        let kmax = max_facet_size(self.n);
        if vs.iter().any(|&v| self.vdeg[v] + 1 > kmax) {
            return false;
        }
        !self.exclusions.iter().any(|e| e.matches(g))
    }

    fn add(&mut self, g: u64) {
        let s = g.count_ones() as usize;
        let mut t = 0;
        for (j, &h) in self.facets.iter().enumerate() {
            if (g & h).count_ones() == 3 {
                self.nbrs[j] += 1;
                t += 1;
            }
        }
        self.nbrs.push(t);
        self.deficit = self.deficit + slots(s) - 2 * t;
        let vs: Vec<usize> = bits(g).collect();
        for (i, &u) in vs.iter().enumerate() {
            self.vdeg[u] += 1;
            for &v in &vs[i + 1..] {
                let c = &mut self.pair[u * self.n + v];
                *c += 1;
                if *c == 2 {
                    self.edges += 1;
                }
            }
        }
        self.p_rem[s] -= 1;
        let top = 64 - g.leading_zeros() as usize;
        let used = self.n_used().max(top);
        self.used.push(used);
        self.facets.push(g);
    }

    fn remove(&mut self) {
        let g = self.facets.pop().unwrap();
        self.used.pop();
        let s = g.count_ones() as usize;
        self.p_rem[s] += 1;
        let vs: Vec<usize> = bits(g).collect();
        for (i, &u) in vs.iter().enumerate() {
            self.vdeg[u] -= 1;
            for &v in &vs[i + 1..] {
                let c = &mut self.pair[u * self.n + v];
                if *c == 2 {
                    self.edges -= 1;
                }
                *c -= 1;
            }
        }
        let t = self.nbrs.pop().unwrap();
        for (j, &h) in self.facets.iter().enumerate() {
            if (g & h).count_ones() == 3 {
                self.nbrs[j] -= 1;
            }
        }
        self.deficit = self.deficit + 2 * t - slots(s);
    }

    /// Counting bounds that every completion must satisfy.
    fn feasible(&self) -> bool {
        let mut room = 0;
        let mut fresh_room = 0;
        let mut left = 0;
        for (i, &p) in self.p_rem.iter().enumerate().skip(4) {
            room += p * slots(i);
            fresh_room += p * (i - 3);
            left += p;
        }
        // Each missing neighbour of a present facet is a future facet, and
        // each future ridge lowers deficit + room by exactly 2.
        if self.deficit > room || (self.deficit + room) % 2 == 1 {
            return false;
        }
        // Every facet is added across a triangle of an earlier one, so it
        // brings at most i - 3 new vertices.
        if self.n - self.n_used() > fresh_room {
            return false;
        }
        // With no open neighbour slot, further facets would form a separate
        // component.
        !(left > 0 && self.deficit == 0)
    }

    fn fresh_labels(&self, k: usize) -> Option<u64> {
        let used = self.n_used();
        (used + k <= self.n).then(|| prefix(used + k) & !prefix(used))
    }

    /// Facets through the pair `e` lying in exactly the two facets `h`, `k`
    /// so far. The third facet meets each of them in a triangle through `e`
    /// avoiding their common third vertex, and nothing else of `h | k`.
    fn edge_candidates(&self, e: u64, limit: usize, out: &mut Vec<u64>) {
        let mut through = self.facets.iter().filter(|&&f| f & e == e);
        let h = *through.next().unwrap();
        let k = *through.next().unwrap();
        let pool = self.used_mask() & !(h | k);
        for a in bits(h & !k) {
            for b in bits(k & !h) {
                let base = e | 1 << a | 1 << b;
                if !self.extend(base, 4, pool, limit, out) {
                    return;
                }
            }
        }
    }

    /// Missing neighbours of facet `j`: a triangle of it that is not a ridge
    /// yet, plus vertices outside it.
    fn facet_candidates(&self, j: usize, limit: usize, out: &mut Vec<u64>) {
        let f = self.facets[j];
        let ridges: Vec<u64> = self
            .facets
            .iter()
            .map(|&h| h & f)
            .filter(|x| x.count_ones() == 3)
            .collect();
        let pool = self.used_mask() & !f;
        let mut keep = true;
        subsets(f, 3, &mut |t| {
            if !ridges.contains(&t) {
                keep = self.extend(t, 3, pool, limit, out);
            }
            keep
        });
    }

    /// Adds to `out` every fitting facet `base | extra`, where `extra` is a
    /// subset of `pool` plus the next unused labels. Returns false once `out`
    /// exceeds `limit`.
    fn extend(&self, base: u64, base_len: usize, pool: u64, limit: usize, out: &mut Vec<u64>) -> bool {
        for s in base_len.max(4)..=self.imax {
            if self.p_rem[s] == 0 {
                continue;
            }
            let r = s - base_len;
            for fresh in 0..=r {
                let Some(new) = self.fresh_labels(fresh) else { break };
                let ok = subsets(pool, r - fresh, &mut |sub| {
                    let g = base | sub | new;
                    if self.fits(g) {
                        out.push(g);
                    }
                    out.len() <= limit
                });
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// The branching pair with the fewest candidates, or `None` when no pair
    /// lies in exactly two facets.
    fn edge_branch(&self) -> Option<Vec<u64>> {
        let mut best: Option<Vec<u64>> = None;
        let mut buf = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.pair[u * self.n + v] != 2 {
                    continue;
                }
                let limit = best.as_ref().map_or(usize::MAX, |b| b.len());
                buf.clear();
                self.edge_candidates(1 << u | 1 << v, limit, &mut buf);
                if buf.len() < limit {
                    let done = buf.is_empty();
                    best = Some(std::mem::take(&mut buf));
                    if done {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn facet_branch(&self) -> Vec<u64> {
        let mut best: Option<Vec<u64>> = None;
        let mut buf = Vec::new();
        for j in 0..self.facets.len() {
            if self.nbrs[j] >= slots(self.facets[j].count_ones() as usize) {
                continue;
            }
            let limit = best.as_ref().map_or(usize::MAX, |b| b.len());
            buf.clear();
            self.facet_candidates(j, limit, &mut buf);
            if buf.len() < limit {
                let done = buf.is_empty();
                best = Some(std::mem::take(&mut buf));
                if done {
                    break;
                }
            }
        }
        best.unwrap_or_default()
    }

    fn task(&self) -> Task {
        Task { facets: self.facets.clone(), exclusions: self.exclusions.clone() }
    }

    fn dfs(&mut self, ctx: &mut Ctx) -> Result<(), Aborted> {
        ctx.tick()?;
        if self.p_rem.iter().all(|&p| p == 0) {
            if ctx.split_at.is_some() {
                ctx.tasks.push(self.task());
            } else if self.pair.iter().all(|&c| c != 2) {
                let fl = FacetList::new(self.n, self.facets.clone()).expect("search keeps lists valid");
                ctx.leaves.push(fl);
            }
            return Ok(());
        }
        if ctx.split_at == Some(self.facets.len()) {
            ctx.tasks.push(self.task());
            return Ok(());
        }
        match self.edge_branch() {
            Some(cands) => {
                for g in cands {
                    self.add(g);
                    if self.feasible() {
                        self.dfs(ctx)?;
                    }
                    self.remove();
                }
            }
            None => {
                let cands = self.facet_branch();
                let base = self.exclusions.len();
                let used = self.used_mask();
                for g in cands {
                    self.add(g);
                    if self.feasible() {
                        self.dfs(ctx)?;
                    }
                    self.remove();
                    self.exclusions.push(Exclusion::of(g, used));
                }
                self.exclusions.truncate(base);
            }
        }
        Ok(())
    }
}

/// Splits the search for `cand` into tasks `depth` facets below the two
/// fixed ones.
///
/// The first facet is `{0, .., i-1}` for a largest facet size `i`. Any
/// sphere with this p-vector can be relabeled so that one of its largest
/// facets is that set and one of its ridges is `{0, 1, 2}`; the neighbour
/// across that ridge then gets the next labels.
pub(crate) fn root_tasks(cand: &PVectorCandidate, depth: usize) -> Vec<Task> {
    let mut st = State::new(cand);
    let Some(i) = cand.p.max_size() else { return Vec::new() };
    if i < 4 || i > st.imax || cand.p.total() < 2 || i > cand.n {
        return Vec::new();
    }
    st.add(prefix(i));
    let mut ctx = Ctx { deadline: None, split_at: Some(2 + depth), nodes: 0, leaves: Vec::new(), tasks: Vec::new() };
    for s in 4..=st.imax {
        if st.p_rem[s] == 0 {
            continue;
        }
        let Some(new) = st.fresh_labels(s - 3) else { continue };
        let g = 0b111 | new;
        if !st.fits(g) {
            continue;
        }
        st.add(g);
        if st.feasible() {
            let _ = st.dfs(&mut ctx);
        }
        st.remove();
    }
    ctx.tasks
}

/// Runs one task to completion. Returns `None` if the deadline passes first.
pub(crate) fn run_task(cand: &PVectorCandidate, task: &Task, deadline: Option<Instant>) -> Option<TaskOutput> {
    if deadline.is_some_and(|d| Instant::now() >= d) {
        return None;
    }
    let mut st = State::new(cand);
    for &g in &task.facets {
        st.add(g);
    }
    st.exclusions = task.exclusions.clone();
    let mut ctx = Ctx { deadline, split_at: None, nodes: 0, leaves: Vec::new(), tasks: Vec::new() };
    if st.feasible() || st.p_rem.iter().all(|&p| p == 0) {
        st.dfs(&mut ctx).ok()?;
    }
    Some(TaskOutput { leaves: ctx.leaves, nodes: ctx.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_counts() {
        let mut count = 0;
        subsets(0b1011_0110, 3, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 10);
    }

    #[test]
    fn add_remove_round_trip() {
        let w = crate::data::w12_40();
        let cand = PVectorCandidate { n: 12, m: 40, p: w.p_vector() };
        let mut st = State::new(&cand);
        for &f in w.facets() {
            st.add(f);
        }
        assert_eq!(st.edges, 40);
        assert_eq!(st.deficit, 0);
        assert!(st.pair.iter().all(|&c| c == 0 || c == 1 || c == 3));
        for _ in 0..12 {
            st.remove();
        }
        assert_eq!(st.edges, 0);
        assert_eq!(st.deficit, 0);
        assert!(st.pair.iter().all(|&c| c == 0));
        assert!(st.vdeg.iter().all(|&c| c == 0));
    }
}
