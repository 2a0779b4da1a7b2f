//! Backtracking completion of partial chirotopes.
//!
//! Each node branches on one undetermined basis, `+` before `-`, and runs
//! the engine to a fixpoint; a conflict closes the branch. The branching
//! basis is the one occurring in the most relations that already have two
//! determined terms, ties broken by the smallest index.

use std::time::{Duration, Instant};

use super::{term_values, BfpCertificate, BfpOutcome, Engine, PartialChirotope, Sign};

#[derive(Clone, Debug, Default)]
pub struct SearchConfig {
    /// Nodes with at least this many determined signs are not expanded
    /// further: they are reported as frontier nodes, or handed to the bfp
    /// search when `prune_with_bfp` is set.
    pub floor: Option<usize>,
    /// At floor nodes, complete ones included, look for a final polynomial.
    /// A node without one is expanded as usual.
    pub prune_with_bfp: bool,
    /// Stop after this many completions.
    pub max_completions: Option<usize>,
    pub budget: Option<Duration>,
}

/// Subtrees not yet explored, each given by its decisions from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchState {
    pub pending: Vec<Vec<(usize, Sign)>>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    pub completions: Vec<PartialChirotope>,
    pub frontier: Vec<PartialChirotope>,
    pub refuted: Vec<(PartialChirotope, BfpCertificate)>,
    pub nodes: u64,
    pub dead_ends: u64,
    /// Set when the budget ran out; resume with [`complete_search`] and this
    /// state.
    pub interrupted: Option<SearchState>,
}

impl SearchOutcome {
    /// The whole tree was explored and nothing survived.
    pub fn is_refutation(&self) -> bool {
        self.interrupted.is_none() && self.completions.is_empty() && self.frontier.is_empty()
    }
}

struct Searcher<'a> {
    config: &'a SearchConfig,
    deadline: Option<Instant>,
    out: SearchOutcome,
    stopped: bool,
    timed_out: bool,
    pending: Vec<Vec<(usize, Sign)>>,
}

/// Picks the undetermined basis in the most relations with two determined
/// terms.
pub(crate) fn branch_variable(e: &Engine) -> Option<usize> {
    let pc = e.chirotope();
    let mut best: Option<(usize, usize)> = None;
    for idx in 0..pc.n_bases() {
        if pc.get_index(idx).is_some() {
            continue;
        }
        let mut score = 0;
        for &r in e.relations_of(idx) {
            let f = e.relation_factors(r as usize);
            let vals: [Option<Sign>; 6] = std::array::from_fn(|k| pc.get_index(f[k].0 as usize).map(|s| s * f[k].1));
            if term_values(&vals).iter().filter(|t| t.is_some()).count() >= 2 {
                score += 1;
            }
        }
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, idx));
        }
    }
    best.map(|(_, idx)| idx)
}

impl Searcher<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn dfs(&mut self, engine: Engine, path: &mut Vec<(usize, Sign)>) {
        if self.stopped {
            return;
        }
        if self.out_of_time() {
            self.stopped = true;
            self.timed_out = true;
            self.pending.push(path.clone());
            return;
        }
        self.out.nodes += 1;
        let pc = engine.chirotope();
        let at_floor = self.config.floor.is_some_and(|f| pc.determined() >= f);
        if at_floor && self.config.prune_with_bfp {
            if let Ok(BfpOutcome::Found(cert)) = super::bfp_search(pc) {
                self.out.refuted.push((pc.clone(), cert));
                return;
            }
        }
        if pc.is_complete() {
            self.out.completions.push(pc.clone());
            if self.config.max_completions.is_some_and(|m| self.out.completions.len() >= m) {
                self.stopped = true;
            }
            return;
        }
        if at_floor && !self.config.prune_with_bfp {
            self.out.frontier.push(pc.clone());
            return;
        }
        let Some(var) = branch_variable(&engine) else { return };
        for sign in [Sign::Pos, Sign::Neg] {
            path.push((var, sign));
            if self.timed_out {
                self.pending.push(path.clone());
            } else if !self.stopped {
                let mut child = engine.clone();
                match child.decide(var, sign).and_then(|()| child.run()) {
                    Ok(()) => self.dfs(child, path),
                    Err(_) => self.out.dead_ends += 1,
                }
            }
            path.pop();
        }
    }
}

/// Explores completions of the fixpoint of `engine`. With `resume`, only
/// the listed subtrees are explored.
pub fn complete_search(engine: &Engine, config: &SearchConfig, resume: Option<&SearchState>) -> SearchOutcome {
    let mut s = Searcher {
        config,
        deadline: config.budget.map(|b| Instant::now() + b),
        out: SearchOutcome::default(),
        stopped: false,
        timed_out: false,
        pending: Vec::new(),
    };
    let mut root = engine.clone();
    if root.run().is_err() {
        s.out.dead_ends += 1;
        return s.out;
    }
    let starts = match resume {
        Some(state) => state.pending.clone(),
        None => vec![Vec::new()],
    };
    for start in starts {
        if s.timed_out {
            s.pending.push(start);
            continue;
        }
        if s.stopped {
            break;
        }
        let mut e = root.clone();
        let ok = start.iter().try_for_each(|&(idx, sign)| e.decide(idx, sign).and_then(|()| e.run()));
        if ok.is_err() {
            s.out.dead_ends += 1;
            continue;
        }
        let mut path = start;
        s.dfs(e, &mut path);
    }
    if s.timed_out {
        s.out.interrupted = Some(SearchState { pending: std::mem::take(&mut s.pending) });
    }
    s.out
}

/// Walks from the fixpoint of `engine` to a node with at least `floor`
/// determined signs, taking a random sign at each branching and the other
/// one when it conflicts. Returns `None` at a dead end or a completion
/// below the floor.
pub fn random_descent<R: rand::Rng>(engine: &Engine, floor: usize, rng: &mut R) -> Option<PartialChirotope> {
    let mut e = engine.clone();
    e.run().ok()?;
    while e.chirotope().determined() < floor {
        let var = branch_variable(&e)?;
        let first = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
        let mut next = None;
        for sign in [first, -first] {
            let mut child = e.clone();
            if child.decide(var, sign).and_then(|()| child.run()).is_ok() {
                next = Some(child);
                break;
            }
        }
        e = next?;
    }
    Some(e.chirotope().clone())
}
