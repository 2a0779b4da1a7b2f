//! Fixpoint propagation over a partial chirotope with a proof log.
//!
//! Two rule families run to a joint fixpoint: local rules triggered by a
//! newly determined basis (the facet exchange rule in rank 5, the ridge
//! rules of a diagram in rank 4) and three-term Grassmann-Plücker forcing.
//! The local queue is always drained before the next relation is examined.
//! Every determined sign is recorded as a step naming its rule and the steps
//! it was derived from.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{forced_third, gp_holds, gp_relations, sort_with_parity, term_values, GpRelation, PartialChirotope, Sign, TERM_SIGN};
use crate::complex::{bits, mask_of, FacetList};

/// How a step's sign was obtained. Facet indices are 0-based here and
/// printed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Present in the input chirotope.
    Given,
    Seed,
    /// The basis lies inside a facet.
    Flat { facet: usize },
    /// Four elements in `facet`; `out` replaced by `inn`, both off the facet.
    Exchange { facet: usize, out: usize, inn: usize },
    Gp { lambda: Vec<usize>, quad: [usize; 4] },
    /// Interior ridge of a diagram: its plane separates the two facets.
    Ridge { ridge: [usize; 3] },
    /// 2-face of the base facet of a diagram: all other points on one side.
    Boundary { face: [usize; 3] },
    /// A branching decision of a search.
    Choice,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    /// Ascending basis.
    pub basis: Vec<usize>,
    /// Sign of the ascending basis.
    pub sign: Sign,
    pub rule: Rule,
    /// 1-based ids of earlier steps.
    pub premises: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conflict {
    /// Steps `first` and `second` give the basis different signs.
    Basis { basis: Vec<usize>, first: usize, second: usize },
    /// A relation whose six factors are all determined is violated.
    Relation { lambda: Vec<usize>, quad: [usize; 4], premises: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Contradiction(Conflict),
    /// Every basis is determined and no relation is violated.
    Completed,
    /// Fixpoint reached with undetermined bases.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofMode {
    Rank5,
    Diagram { base: usize },
    Plain { rank: usize },
}

/// Why a seed basis cannot be zero: `ridge` is a triangle 2-face of `facet`,
/// `point` another vertex of `facet`. In rank 5 the remaining seed element
/// lies off the facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedJustification {
    pub facet: usize,
    pub ridge: [usize; 3],
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofCertificate {
    pub mode: ProofMode,
    pub n: usize,
    /// The seed tuple as given, not sorted.
    pub seed: Vec<usize>,
    pub seed_sign: Sign,
    pub justification: Option<SeedJustification>,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
enum RidgeKind {
    /// Vertices of the two facets off the ridge, on opposite sides.
    Interior { pos: u64, neg: u64 },
    /// Every vertex off the face lies on the same side.
    Boundary { rest: u64 },
}

#[derive(Clone, Debug)]
enum Local {
    None,
    Polytope { facets: Vec<u64> },
    Diagram { ridges: HashMap<u64, RidgeKind> },
}

struct Compiled {
    n: usize,
    rank: usize,
    relations: Vec<GpRelation>,
    /// Basis index and permutation sign of each factor tuple.
    factors: Vec<[(u32, Sign); 6]>,
    rel_of: Vec<Vec<u32>>,
    local: Local,
}

impl Compiled {
    fn new(n: usize, rank: usize, local: Local) -> Self {
        let pc = PartialChirotope::new(n, rank);
        let relations = gp_relations(n, rank);
        let mut rel_of = vec![Vec::new(); pc.n_bases()];
        let factors = relations
            .iter()
            .enumerate()
            .map(|(r, rel)| {
                let f = rel.factors();
                std::array::from_fn(|k| {
                    let (i, p) = pc.locate(&f[k]).expect("factors have distinct elements");
                    rel_of[i].push(r as u32);
                    (i as u32, p)
                })
            })
            .collect();
        Compiled { n, rank, relations, factors, rel_of, local }
    }
}

/// Propagation state. Cloning is cheap enough for search: the relation
/// tables are shared.
#[derive(Clone)]
pub struct Engine {
    compiled: Arc<Compiled>,
    pc: PartialChirotope,
    /// Step id per basis, 0 when undetermined.
    origin: Vec<u32>,
    steps: Vec<Step>,
    log: bool,
    local_q: VecDeque<u32>,
    gp_q: VecDeque<u32>,
    queued: Vec<bool>,
    rng: Option<StdRng>,
    mode: ProofMode,
}

fn ridge_table(fl: &FacetList, base: usize) -> HashMap<u64, RidgeKind> {
    let f = fl.facets();
    let all = crate::complex::full_mask(fl.n_vertices());
    let mut out = HashMap::new();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            let t = f[i] & f[j];
            if t.count_ones() != 3 {
                continue;
            }
            let kind = if i == base || j == base {
                RidgeKind::Boundary { rest: all & !t }
            } else {
                RidgeKind::Interior { pos: f[i] & !t, neg: f[j] & !t }
            };
            out.insert(t, kind);
        }
    }
    out
}

fn tri(mask: u64) -> [usize; 3] {
    let v: Vec<usize> = bits(mask).collect();
    [v[0], v[1], v[2]]
}

impl Engine {
    fn build(n: usize, rank: usize, local: Local, log: bool, mode: ProofMode) -> Self {
        let compiled = Arc::new(Compiled::new(n, rank, local));
        let nb = compiled.rel_of.len();
        let nr = compiled.relations.len();
        Engine {
            pc: PartialChirotope::new(n, rank),
            origin: vec![0; nb],
            steps: Vec::new(),
            log,
            local_q: VecDeque::new(),
            gp_q: (0..nr as u32).collect(),
            queued: vec![true; nr],
            rng: None,
            mode,
            compiled,
        }
    }

    /// Rank-5 engine for a sphere: bases inside a facet are recorded as zero
    /// and the facet exchange rule is active.
    pub fn rank5(fl: &FacetList, log: bool) -> Self {
        let n = fl.n_vertices();
        let mut e = Self::build(n, 5, Local::Polytope { facets: fl.facets().to_vec() }, log, ProofMode::Rank5);
        for (j, &f) in fl.facets().iter().enumerate() {
            if f.count_ones() < 5 {
                continue;
            }
            let verts: Vec<usize> = bits(f).collect();
            for sub in super::subsets(verts.len(), 5) {
                let b: Vec<usize> = sub.iter().map(|&k| verts[k]).collect();
                let idx = e.pc.index_of(&b);
                e.record(idx, Sign::Zero, Rule::Flat { facet: j }, Vec::new())
                    .expect("flat bases of distinct facets never conflict");
            }
        }
        e
    }

    /// Rank-4 engine for a diagram of `fl` based on facet `base`.
    pub fn diagram(fl: &FacetList, base: usize, log: bool) -> Self {
        let local = Local::Diagram { ridges: ridge_table(fl, base) };
        Self::build(fl.n_vertices(), 4, local, log, ProofMode::Diagram { base })
    }

    /// Engine with only Grassmann-Plücker forcing, starting from the signs
    /// of `pc`.
    pub fn plain(pc: &PartialChirotope, log: bool) -> Self {
        let mut e = Self::build(pc.n_elements(), pc.rank(), Local::None, log, ProofMode::Plain { rank: pc.rank() });
        e.load(pc).expect("empty engine accepts any signs");
        e
    }

    /// Adds the determined signs of `pc` as given facts.
    pub fn load(&mut self, pc: &PartialChirotope) -> Result<(), Conflict> {
        assert_eq!((pc.n_elements(), pc.rank()), (self.compiled.n, self.compiled.rank));
        for (i, s) in pc.signs().iter().enumerate() {
            if let Some(s) = *s {
                self.record(i, s, Rule::Given, Vec::new())?;
            }
        }
        Ok(())
    }

    /// Processes queues in random order. Used to check that the fixpoint
    /// does not depend on the schedule.
    pub fn shuffle_schedule(&mut self, seed: u64) {
        self.rng = Some(StdRng::seed_from_u64(seed));
    }

    pub fn chirotope(&self) -> &PartialChirotope {
        &self.pc
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn n_relations(&self) -> usize {
        self.compiled.relations.len()
    }

    pub(crate) fn relations_of(&self, idx: usize) -> &[u32] {
        &self.compiled.rel_of[idx]
    }

    pub(crate) fn relation_factors(&self, r: usize) -> &[(u32, Sign); 6] {
        &self.compiled.factors[r]
    }

    /// Sets an ordered tuple as seed.
    pub fn seed(&mut self, tuple: &[usize], sign: Sign) -> Result<(), Conflict> {
        let (idx, parity) = self.pc.locate(tuple).expect("seed has distinct elements");
        self.record(idx, sign * parity, Rule::Seed, Vec::new())
    }

    /// Sets a basis by index as a search decision.
    pub fn decide(&mut self, idx: usize, sign: Sign) -> Result<(), Conflict> {
        self.record(idx, sign, Rule::Choice, Vec::new())
    }

    fn premise(&self, idx: u32) -> usize {
        self.origin[idx as usize] as usize
    }

    fn record(&mut self, idx: usize, sign: Sign, rule: Rule, mut premises: Vec<usize>) -> Result<(), Conflict> {
        let old = self.pc.get_index(idx);
        if old == Some(sign) {
            return Ok(());
        }
        let id = if self.log {
            premises.sort_unstable();
            premises.dedup();
            self.steps.push(Step { basis: self.pc.basis(idx), sign, rule, premises });
            self.steps.len()
        } else {
            0
        };
        if old.is_some() {
            return Err(Conflict::Basis { basis: self.pc.basis(idx), first: self.origin[idx] as usize, second: id });
        }
        self.pc.set_unchecked(idx, Some(sign));
        self.origin[idx] = id as u32;
        self.local_q.push_back(idx as u32);
        for &r in &self.compiled.rel_of[idx] {
            if !self.queued[r as usize] {
                self.queued[r as usize] = true;
                self.gp_q.push_back(r);
            }
        }
        Ok(())
    }

    fn pop(rng: &mut Option<StdRng>, q: &mut VecDeque<u32>) -> Option<u32> {
        match rng {
            Some(rng) if !q.is_empty() => {
                let k = rng.gen_range(0..q.len());
                q.swap_remove_back(k)
            }
            _ => q.pop_front(),
        }
    }

    /// Runs local rules and relation forcing to a joint fixpoint.
    pub fn run(&mut self) -> Result<(), Conflict> {
        self.run_inner(true)
    }

    /// Runs only the local rules.
    pub fn run_local(&mut self) -> Result<(), Conflict> {
        self.run_inner(false)
    }

    fn run_inner(&mut self, gp: bool) -> Result<(), Conflict> {
        loop {
            if let Some(idx) = Self::pop(&mut self.rng, &mut self.local_q) {
                self.apply_local(idx as usize)?;
                continue;
            }
            if !gp {
                return Ok(());
            }
            match Self::pop(&mut self.rng, &mut self.gp_q) {
                Some(r) => {
                    self.queued[r as usize] = false;
                    self.apply_relation(r as usize)?;
                }
                None => return Ok(()),
            }
        }
    }

    fn apply_local(&mut self, idx: usize) -> Result<(), Conflict> {
        let compiled = Arc::clone(&self.compiled);
        let sign = self.pc.get_index(idx).expect("queued bases are determined");
        let basis = self.pc.basis(idx);
        let bmask = mask_of(&basis);
        let from = vec![self.origin[idx] as usize];
        match &compiled.local {
            Local::None => {}
            Local::Polytope { facets } => {
                for (j, &f) in facets.iter().enumerate() {
                    if (bmask & f).count_ones() != 4 {
                        continue;
                    }
                    let x = bits(bmask & !f).next().unwrap();
                    let pos_x = basis.iter().position(|&v| v == x).unwrap();
                    for y in 0..compiled.n {
                        if f & (1 << y) != 0 || bmask & (1 << y) != 0 {
                            continue;
                        }
                        let mut next: Vec<usize> = basis.iter().copied().filter(|&v| v != x).collect();
                        next.push(y);
                        next.sort_unstable();
                        let pos_y = next.iter().position(|&v| v == y).unwrap();
                        let flip = if (pos_x + pos_y) % 2 == 1 { Sign::Neg } else { Sign::Pos };
                        let target = self.pc.index_of(&next);
                        self.record(target, sign * flip, Rule::Exchange { facet: j, out: x, inn: y }, from.clone())?;
                    }
                }
            }
            Local::Diagram { ridges } => {
                for (t, &x) in basis.iter().enumerate() {
                    let tmask = bmask & !(1 << x);
                    let Some(kind) = ridges.get(&tmask) else { continue };
                    // Moving x to the end of the ascending basis.
                    let at_end = if (3 - t) % 2 == 1 { -sign } else { sign };
                    let (targets, rule) = match kind {
                        RidgeKind::Interior { pos, neg } => {
                            let side_x = if pos & (1 << x) != 0 {
                                Sign::Pos
                            } else if neg & (1 << x) != 0 {
                                Sign::Neg
                            } else {
                                continue;
                            };
                            let ts: Vec<(usize, Sign)> = bits(pos | neg)
                                .filter(|&y| y != x)
                                .map(|y| (y, if pos & (1 << y) != 0 { side_x } else { -side_x }))
                                .collect();
                            (ts, Rule::Ridge { ridge: tri(tmask) })
                        }
                        RidgeKind::Boundary { rest } => {
                            let ts: Vec<(usize, Sign)> = bits(*rest).filter(|&y| y != x).map(|y| (y, Sign::Pos)).collect();
                            (ts, Rule::Boundary { face: tri(tmask) })
                        }
                    };
                    for (y, rel) in targets {
                        let mut tuple: Vec<usize> = bits(tmask).collect();
                        tuple.push(y);
                        let (sorted, parity) = sort_with_parity(&tuple).unwrap();
                        let target = self.pc.index_of(&sorted);
                        self.record(target, at_end * rel * parity, rule.clone(), from.clone())?;
                    }
                }
            }
        }
        Ok(())
    }

    fn factor_values(&self, r: usize) -> [Option<Sign>; 6] {
        let f = &self.compiled.factors[r];
        std::array::from_fn(|k| self.pc.get_index(f[k].0 as usize).map(|s| s * f[k].1))
    }

    /// Premises that determine term `k`: a zero factor alone, or both.
    fn term_premises(&self, r: usize, k: usize, vals: &[Option<Sign>; 6], out: &mut Vec<usize>) {
        let f = &self.compiled.factors[r];
        for slot in [2 * k, 2 * k + 1] {
            if vals[slot] == Some(Sign::Zero) {
                out.push(self.premise(f[slot].0));
                return;
            }
        }
        out.push(self.premise(f[2 * k].0));
        out.push(self.premise(f[2 * k + 1].0));
    }

    fn apply_relation(&mut self, r: usize) -> Result<(), Conflict> {
        let vals = self.factor_values(r);
        let terms = term_values(&vals);
        let known = terms.iter().filter(|t| t.is_some()).count();
        if known < 2 {
            return Ok(());
        }
        let rel = &self.compiled.relations[r];
        let rule = || Rule::Gp { lambda: rel.lambda.clone(), quad: rel.quad };
        if known == 2 {
            let k = terms.iter().position(|t| t.is_none()).unwrap();
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let Some(v) = forced_third(terms[i].unwrap(), terms[j].unwrap()) else { return Ok(()) };
            // Term k is undetermined, so it has no zero factor and at most
            // one known factor.
            let (p, q) = match (vals[2 * k], vals[2 * k + 1]) {
                (Some(_), None) => (2 * k, 2 * k + 1),
                (None, Some(_)) => (2 * k + 1, 2 * k),
                _ => return Ok(()),
            };
            let fp = vals[p].unwrap();
            let fq = v * TERM_SIGN[k] * fp;
            let mut premises = Vec::new();
            self.term_premises(r, i, &vals, &mut premises);
            self.term_premises(r, j, &vals, &mut premises);
            premises.push(self.premise(self.compiled.factors[r][p].0));
            let (target, parity) = self.compiled.factors[r][q];
            return self.record(target as usize, fq * parity, rule(), premises);
        }
        let [a, b, c] = terms.map(Option::unwrap);
        if gp_holds(a, b, c) {
            return Ok(());
        }
        // Prefer a conflict on a single basis: a term whose forced value
        // disagrees with its two nonzero factors.
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let Some(v) = forced_third(terms[i].unwrap(), terms[j].unwrap()) else { continue };
            let (Some(fp), Some(fq)) = (vals[2 * k], vals[2 * k + 1]) else { continue };
            if v == Sign::Zero || fp == Sign::Zero || fq == Sign::Zero {
                continue;
            }
            let mut premises = Vec::new();
            self.term_premises(r, i, &vals, &mut premises);
            self.term_premises(r, j, &vals, &mut premises);
            premises.push(self.premise(self.compiled.factors[r][2 * k].0));
            let (target, parity) = self.compiled.factors[r][2 * k + 1];
            let forced = v * TERM_SIGN[k] * fp;
            return self.record(target as usize, forced * parity, rule(), premises);
        }
        let mut premises = Vec::new();
        for k in 0..3 {
            self.term_premises(r, k, &vals, &mut premises);
        }
        premises.sort_unstable();
        premises.dedup();
        Err(Conflict::Relation { lambda: rel.lambda.clone(), quad: rel.quad, premises })
    }

    /// Certificate of the steps so far, without a seed, given the result
    /// of the last [`Engine::run`].
    pub fn proof(&self, result: Result<(), Conflict>) -> ProofCertificate {
        self.certificate(Vec::new(), Sign::Pos, None, result)
    }

    fn certificate(&self, seed: Vec<usize>, seed_sign: Sign, justification: Option<SeedJustification>, result: Result<(), Conflict>) -> ProofCertificate {
        let verdict = match result {
            Err(c) => Verdict::Contradiction(c),
            Ok(()) if self.pc.is_complete() => Verdict::Completed,
            Ok(()) => Verdict::Exhausted,
        };
        ProofCertificate {
            mode: self.mode,
            n: self.compiled.n,
            seed,
            seed_sign,
            justification,
            steps: self.steps.clone(),
            verdict,
        }
    }
}

/// Rank-5 partial chirotope of a sphere: every basis inside a facet is
/// zero, everything else undetermined.
pub fn from_sphere_rank5(fl: &FacetList) -> PartialChirotope {
    let mut pc = PartialChirotope::new(fl.n_vertices(), 5);
    for &f in fl.facets() {
        let verts: Vec<usize> = bits(f).collect();
        if verts.len() < 5 {
            continue;
        }
        for sub in super::subsets(verts.len(), 5) {
            let b: Vec<usize> = sub.iter().map(|&k| verts[k]).collect();
            let i = pc.index_of(&b);
            pc.set_index(i, Sign::Zero).expect("zero bases agree");
        }
    }
    pc
}

/// Applies the facet exchange rule to `pc` until nothing changes.
pub fn apply_p2(pc: &PartialChirotope, fl: &FacetList) -> Result<(PartialChirotope, Vec<Step>), Conflict> {
    let mut e = Engine::build(
        pc.n_elements(),
        pc.rank(),
        Local::Polytope { facets: fl.facets().to_vec() },
        true,
        ProofMode::Rank5,
    );
    e.load(pc)?;
    e.run_local()?;
    Ok((e.pc, e.steps))
}

/// Grassmann-Plücker forcing to a fixpoint, jointly with the facet
/// exchange rule when a facet list is given.
pub fn gp_propagate(pc: &PartialChirotope, fl: Option<&FacetList>) -> Result<(PartialChirotope, Vec<Step>), Conflict> {
    let local = match fl {
        Some(fl) => Local::Polytope { facets: fl.facets().to_vec() },
        None => Local::None,
    };
    let mut e = Engine::build(pc.n_elements(), pc.rank(), local, true, ProofMode::Plain { rank: pc.rank() });
    e.load(pc)?;
    e.run()?;
    Ok((e.pc, e.steps))
}

fn ridges_of(fl: &FacetList, facet: usize) -> Vec<u64> {
    let f = fl.facets();
    let mut out: Vec<u64> = (0..f.len())
        .filter(|&j| j != facet)
        .map(|j| f[facet] & f[j])
        .filter(|t| t.count_ones() == 3)
        .collect();
    out.sort_by_key(|&t| bits(t).collect::<Vec<_>>());
    out
}

/// Finds a triangle 2-face plus a further vertex of one facet inside the
/// seed, with (in rank 5) the last element off that facet.
pub fn seed_justification(fl: &FacetList, seed: &[usize]) -> Option<SeedJustification> {
    let b = mask_of(seed);
    for (j, &f) in fl.facets().iter().enumerate() {
        let inside = b & f;
        if inside.count_ones() != 4 || (seed.len() == 4 && inside != b) {
            continue;
        }
        for t in ridges_of(fl, j) {
            if t & inside == t {
                let point = bits(inside & !t).next().unwrap();
                return Some(SeedJustification { facet: j, ridge: tri(t), point });
            }
        }
    }
    None
}

/// A justified rank-5 seed: the first ridge of the first facet with a
/// vertex outside it, the smallest further vertex of that facet and the
/// smallest vertex off it, in ascending order.
pub fn default_seed(fl: &FacetList) -> Option<Vec<usize>> {
    let n = fl.n_vertices();
    for (j, &f) in fl.facets().iter().enumerate() {
        let Some(q) = (0..n).find(|&v| f & (1 << v) == 0) else { continue };
        let Some(&t) = ridges_of(fl, j).first() else { continue };
        let Some(p) = bits(f & !t).next() else { continue };
        let mut seed: Vec<usize> = bits(t).chain([p, q]).collect();
        seed.sort_unstable();
        return Some(seed);
    }
    None
}

/// Seeds the rank-5 partial chirotope of `fl` and propagates the
/// polytopality conditions and Grassmann-Plücker forcing to a fixpoint.
pub fn prove_nonpolytopal(fl: &FacetList, seed: &[usize], sign: Sign) -> ProofCertificate {
    let mut e = Engine::rank5(fl, true);
    let justification = seed_justification(fl, seed);
    let result = e.seed(seed, sign).and_then(|()| e.run());
    e.certificate(seed.to_vec(), sign, justification, result)
}

/// Diagram engine for `base` holding the forced signs of
/// [`diagram_partial_chirotope`], ready for [`super::complete_search`].
pub fn diagram_search_root(fl: &FacetList, base: usize) -> Result<Engine, Conflict> {
    let (pc, _) = diagram_partial_chirotope(fl, base);
    let mut e = Engine::diagram(fl, base, false);
    e.load(&pc)?;
    Ok(e)
}

/// The default diagram seed: the lexicographically first ridge, and the
/// smallest further vertex of the first facet containing it.
fn diagram_seed(fl: &FacetList) -> Option<(Vec<usize>, SeedJustification)> {
    let f = fl.facets();
    let mut best: Option<(Vec<usize>, usize)> = None;
    for i in 0..f.len() {
        for &t in &ridges_of(fl, i) {
            let key: Vec<usize> = bits(t).collect();
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, i));
            }
        }
    }
    let (ridge, facet) = best?;
    let t = mask_of(&ridge);
    let point = bits(f[facet] & !t).next()?;
    let mut seed = ridge.clone();
    seed.push(point);
    Some((seed, SeedJustification { facet, ridge: [ridge[0], ridge[1], ridge[2]], point }))
}

/// Rank-4 partial chirotope forced on a diagram of `fl` with base facet
/// `base`, seeded on the first ridge with sign `+`.
pub fn diagram_partial_chirotope(fl: &FacetList, base: usize) -> (PartialChirotope, ProofCertificate) {
    let mut e = Engine::diagram(fl, base, true);
    let Some((seed, just)) = diagram_seed(fl) else {
        let cert = e.certificate(Vec::new(), Sign::Pos, None, Ok(()));
        return (e.pc, cert);
    };
    let result = e.seed(&seed, Sign::Pos).and_then(|()| e.run());
    let cert = e.certificate(seed, Sign::Pos, Some(just), result);
    (e.pc, cert)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("missing or unsupported certificate header")]
    Header,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

const HEADER: &str = "# polysphere certificate v1";

fn tuple_text(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn ids_text(v: &[usize]) -> String {
    if v.is_empty() {
        "-".to_string()
    } else {
        let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        parts.join(",")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Given => write!(f, "GIVEN"),
            Rule::Seed => write!(f, "SEED"),
            Rule::Flat { facet } => write!(f, "FLAT F{}", facet + 1),
            Rule::Exchange { facet, out, inn } => write!(f, "P2 F{} {}<->{}", facet + 1, out, inn),
            Rule::Gp { lambda, quad } => write!(f, "GP lambda={} quad={}", tuple_text(lambda), tuple_text(quad)),
            Rule::Ridge { ridge } => write!(f, "RIDGE {}", tuple_text(ridge)),
            Rule::Boundary { face } => write!(f, "BOUNDARY {}", tuple_text(face)),
            Rule::Choice => write!(f, "CHOICE"),
        }
    }
}

impl ProofCertificate {
    /// Signs determined by the steps, first step per basis.
    pub fn determined_signs(&self) -> PartialChirotope {
        let rank = match self.mode {
            ProofMode::Rank5 => 5,
            ProofMode::Diagram { .. } => 4,
            ProofMode::Plain { rank } => rank,
        };
        let mut pc = PartialChirotope::new(self.n, rank);
        for s in &self.steps {
            let i = pc.index_of(&s.basis);
            if pc.get_index(i).is_none() {
                pc.set_unchecked(i, Some(s.sign));
            }
        }
        pc
    }

    pub fn is_contradiction(&self) -> bool {
        matches!(self.verdict, Verdict::Contradiction(_))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\n");
        match self.mode {
            ProofMode::Rank5 => out.push_str("mode rank5\n"),
            ProofMode::Diagram { base } => {
                let _ = writeln!(out, "mode diagram base=F{}", base + 1);
            }
            ProofMode::Plain { rank } => {
                let _ = writeln!(out, "mode plain rank={rank}");
            }
        }
        let _ = writeln!(out, "n {}", self.n);
        let just = match &self.justification {
            Some(j) => format!("facet=F{} ridge={} point={}", j.facet + 1, tuple_text(&j.ridge), j.point),
            None => "unjustified".to_string(),
        };
        if !self.seed.is_empty() {
            let _ = writeln!(out, "seed chi{} = {} {}", tuple_text(&self.seed), self.seed_sign, just);
        }
        for (k, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "STEP {}: chi{} = {} BY {} FROM {}",
                k + 1,
                tuple_text(&s.basis),
                s.sign,
                s.rule,
                ids_text(&s.premises)
            );
        }
        let determined = self.determined_signs().determined();
        match &self.verdict {
            Verdict::Contradiction(Conflict::Basis { basis, first, second }) => {
                let _ = writeln!(out, "VERDICT: CONTRADICTION basis={} steps={first},{second}", tuple_text(basis));
            }
            Verdict::Contradiction(Conflict::Relation { lambda, quad, premises }) => {
                let _ = writeln!(
                    out,
                    "VERDICT: CONTRADICTION lambda={} quad={} FROM {}",
                    tuple_text(lambda),
                    tuple_text(quad),
                    ids_text(premises)
                );
            }
            Verdict::Completed => {
                let _ = writeln!(out, "VERDICT: COMPLETED determined={determined}");
            }
            Verdict::Exhausted => {
                let _ = writeln!(out, "VERDICT: EXHAUSTED determined={determined}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CertificateError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(CertificateError::Header),
        }
        let mut mode = None;
        let mut n = None;
        let mut seed = Vec::new();
        let mut seed_sign = Sign::Pos;
        let mut justification = None;
        let mut steps = Vec::new();
        let mut verdict = None;
        for (line, l) in lines {
            let bad = |msg: &str| CertificateError::Malformed { line, msg: msg.to_string() };
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(rest) = l.strip_prefix("mode ") {
                mode = Some(if rest == "rank5" {
                    ProofMode::Rank5
                } else if let Some(b) = rest.strip_prefix("diagram base=F") {
                    let b: usize = b.parse().map_err(|_| bad("bad base facet"))?;
                    ProofMode::Diagram { base: b.checked_sub(1).ok_or_else(|| bad("facets are 1-based"))? }
                } else if let Some(r) = rest.strip_prefix("plain rank=") {
                    ProofMode::Plain { rank: r.parse().map_err(|_| bad("bad rank"))? }
                } else {
                    return Err(bad("unknown mode"));
                });
            } else if let Some(rest) = l.strip_prefix("n ") {
                n = Some(rest.parse().map_err(|_| bad("bad n"))?);
            } else if let Some(rest) = l.strip_prefix("seed chi") {
                let (tuple, rest) = parse_tuple(rest).ok_or_else(|| bad("bad seed tuple"))?;
                let rest = rest.trim_start().strip_prefix('=').ok_or_else(|| bad("expected `=`"))?.trim();
                let (sign, rest) = rest.split_once(' ').unwrap_or((rest, ""));
                seed = tuple;
                seed_sign = Sign::parse(sign).ok_or_else(|| bad("bad seed sign"))?;
                let rest = rest.trim();
                if rest != "unjustified" {
                    justification = Some(parse_justification(rest).ok_or_else(|| bad("bad seed justification"))?);
                }
            } else if let Some(rest) = l.strip_prefix("STEP ") {
                let (id, rest) = rest.split_once(':').ok_or_else(|| bad("expected `STEP k:`"))?;
                if id.trim().parse::<usize>().ok() != Some(steps.len() + 1) {
                    return Err(bad("steps must be numbered consecutively from 1"));
                }
                steps.push(parse_step(rest.trim()).ok_or_else(|| bad("malformed step"))?);
            } else if let Some(rest) = l.strip_prefix("VERDICT: ") {
                verdict = Some(parse_verdict(rest).ok_or_else(|| bad("malformed verdict"))?);
            } else {
                return Err(bad("unrecognized line"));
            }
        }
        let missing = |what: &str| CertificateError::Malformed { line: 0, msg: format!("missing {what}") };
        Ok(ProofCertificate {
            mode: mode.ok_or_else(|| missing("mode"))?,
            n: n.ok_or_else(|| missing("n"))?,
            seed,
            seed_sign,
            justification,
            steps,
            verdict: verdict.ok_or_else(|| missing("verdict"))?,
        })
    }
}

fn parse_tuple(s: &str) -> Option<(Vec<usize>, &str)> {
    let s = s.strip_prefix('(')?;
    let (inner, rest) = s.split_once(')')?;
    let v: Result<Vec<usize>, _> = inner.split(',').map(|x| x.trim().parse()).collect();
    Some((v.ok()?, rest))
}

fn parse_ids(s: &str) -> Option<Vec<usize>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_facet(s: &str) -> Option<usize> {
    s.strip_prefix('F')?.parse::<usize>().ok()?.checked_sub(1)
}

fn parse_justification(s: &str) -> Option<SeedJustification> {
    let mut facet = None;
    let mut ridge = None;
    let mut point = None;
    for field in s.split_whitespace() {
        let (k, v) = field.split_once('=')?;
        match k {
            "facet" => facet = Some(parse_facet(v)?),
            "ridge" => {
                let (t, _) = parse_tuple(v)?;
                ridge = Some(<[usize; 3]>::try_from(t).ok()?);
            }
            "point" => point = Some(v.parse().ok()?),
            _ => return None,
        }
    }
    Some(SeedJustification { facet: facet?, ridge: ridge?, point: point? })
}

fn parse_rule(s: &str) -> Option<Rule> {
    let mut tok = s.split_whitespace();
    let rule = match tok.next()? {
        "GIVEN" => Rule::Given,
        "SEED" => Rule::Seed,
        "CHOICE" => Rule::Choice,
        "FLAT" => Rule::Flat { facet: parse_facet(tok.next()?)? },
        "P2" => {
            let facet = parse_facet(tok.next()?)?;
            let (out, inn) = tok.next()?.split_once("<->")?;
            Rule::Exchange { facet, out: out.parse().ok()?, inn: inn.parse().ok()? }
        }
        "GP" => {
            let (lambda, _) = parse_tuple(tok.next()?.strip_prefix("lambda=")?)?;
            let (quad, _) = parse_tuple(tok.next()?.strip_prefix("quad=")?)?;
            Rule::Gp { lambda, quad: quad.try_into().ok()? }
        }
        "RIDGE" => Rule::Ridge { ridge: parse_tuple(tok.next()?)?.0.try_into().ok()? },
        "BOUNDARY" => Rule::Boundary { face: parse_tuple(tok.next()?)?.0.try_into().ok()? },
        _ => return None,
    };
    tok.next().is_none().then_some(rule)
}

fn parse_step(s: &str) -> Option<Step> {
    let (basis, rest) = parse_tuple(s.strip_prefix("chi")?)?;
    let rest = rest.trim_start().strip_prefix('=')?.trim_start();
    let (sign, rest) = rest.split_once(' ')?;
    let rest = rest.trim_start().strip_prefix("BY ")?;
    let (rule, from) = rest.rsplit_once(" FROM ")?;
    Some(Step { basis, sign: Sign::parse(sign)?, rule: parse_rule(rule)?, premises: parse_ids(from.trim())? })
}

fn parse_verdict(s: &str) -> Option<Verdict> {
    if let Some(rest) = s.strip_prefix("CONTRADICTION ") {
        if let Some(b) = rest.strip_prefix("basis=") {
            let (basis, rest) = parse_tuple(b)?;
            let ids = parse_ids(rest.trim().strip_prefix("steps=")?)?;
            let [first, second] = ids[..] else { return None };
            return Some(Verdict::Contradiction(Conflict::Basis { basis, first, second }));
        }
        let (lambda, rest) = parse_tuple(rest.strip_prefix("lambda=")?)?;
        let (quad, rest) = parse_tuple(rest.trim_start().strip_prefix("quad=")?)?;
        let premises = parse_ids(rest.trim().strip_prefix("FROM ")?)?;
        return Some(Verdict::Contradiction(Conflict::Relation { lambda, quad: quad.try_into().ok()?, premises }));
    }
    if s.starts_with("COMPLETED") {
        return Some(Verdict::Completed);
    }
    if s.starts_with("EXHAUSTED") {
        return Some(Verdict::Exhausted);
    }
    None
}
