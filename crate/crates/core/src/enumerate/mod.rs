//! Exhaustive generation of 2-simple 2-simplicial 3-spheres by p-vector.
//!
//! A candidate `(n, m, p)` is searched by growing a facet list from one
//! facet of maximal size, adding one neighbouring facet at a time while the
//! partial list stays proper. Completed lists are checked against the face
//! lattice filters and deduplicated by canonical form.

mod frontier;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::complex::{canonical_labeling, FaceLattice, FacetList, FlagVector, PVector};

pub use frontier::{Frontier, FrontierError};
pub use search::{Exclusion, Task};

/// Bounds on the edge count of a 2s2s 3-sphere with `n` vertices:
/// `(2n, floor(n(n+3)/4))`.
pub fn m_range(n: usize) -> (usize, usize) {
    (2 * n, n * (n + 3) / 4)
}

/// Largest facet size allowed: a facet with `i` vertices has `2i - 4`
/// neighbours, all distinct facets, so `2i - 4 < n`.
pub fn max_facet_size(n: usize) -> usize {
    (n + 3) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PVectorCandidate {
    pub n: usize,
    pub m: usize,
    pub p: PVector,
}

impl fmt::Display for PVectorCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} p={}", self.n, self.m, self.p)
    }
}

/// All p-vectors with `sum p_i = n`, `sum (2i-4) p_i = 2m` and facet sizes
/// `4 <= i <= max_facet_size(n)`, in lexicographic order of `(p4, p5, ...)`.
pub fn p_vector_candidates(n: usize, m: usize) -> Vec<PVectorCandidate> {
    fn rec(i: usize, imax: usize, left: usize, weight: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i > imax {
            if left == 0 && weight == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = 2 * i - 4;
        for p in 0..=left {
            if p * w > weight {
                break;
            }
            cur.push(p);
            rec(i + 1, imax, left - p, weight - p * w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let imax = max_facet_size(n);
    if imax >= 4 {
        rec(4, imax, n, 2 * m, &mut Vec::new(), &mut out);
    }
    out.sort();
    out.into_iter()
        .map(|p4| PVectorCandidate { n, m, p: PVector::from_p4(&p4) })
        .collect()
}

/// The facets (0-based positions) witnessing a failure of (I1), (I2) or (I3)
/// and their common vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperViolation {
    pub facets: Vec<usize>,
    pub common: u64,
}

/// Checks that pairs of facets meet in 0, 1 or 3 vertices, triples in at
/// most 2 and quadruples in at most 1.
pub fn is_proper(facets: &[u64]) -> Result<(), ProperViolation> {
    for k in 1..facets.len() {
        check_newest(&facets[..=k])?;
    }
    Ok(())
}

/// Like [`is_proper`], but only examines tuples containing the last facet.
/// The earlier facets are assumed to be proper already.
pub fn is_proper_incremental(facets: &[u64]) -> Result<(), ProperViolation> {
    if facets.is_empty() {
        return Ok(());
    }
    check_newest(facets)
}

fn check_newest(facets: &[u64]) -> Result<(), ProperViolation> {
    let last = facets.len() - 1;
    let g = facets[last];
    let witness = |idx: &[usize], common: u64| ProperViolation { facets: idx.to_vec(), common };
    for a in 0..last {
        let x = g & facets[a];
        if !matches!(x.count_ones(), 0 | 1 | 3) {
            return Err(witness(&[a, last], x));
        }
        for b in a + 1..last {
            let y = x & facets[b];
            if y.count_ones() > 2 {
                return Err(witness(&[a, b, last], y));
            }
            for c in b + 1..last {
                let z = y & facets[c];
                if z.count_ones() > 1 {
                    return Err(witness(&[a, b, c, last], z));
                }
            }
        }
    }
    Ok(())
}

/// Facet lists of all connected 2s2s Eulerian lattices with the given
/// p-vector, one per isomorphism class, in canonical form.
pub fn find_facet_lists(cand: &PVectorCandidate) -> Vec<FacetList> {
    let mut found = BTreeMap::new();
    for task in search::root_tasks(cand, 0) {
        let out = search::run_task(cand, &task, None).expect("no deadline");
        for fl in out.leaves {
            if let Some(s) = verify_sphere(&fl) {
                found.entry(canonical_key(&s.facet_list)).or_insert(s.facet_list);
            }
        }
    }
    found.into_values().collect()
}

/// A sphere found by the classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereType {
    /// Canonically labeled facet list.
    pub facet_list: FacetList,
    pub flag_vector: FlagVector,
    pub p_vector: PVector,
}

/// Runs the lattice filters on a completed facet list. Returns the
/// canonically labeled sphere if it is a connected 2s2s Eulerian lattice.
pub fn verify_sphere(fl: &FacetList) -> Option<SphereType> {
    if is_proper(fl.facets()).is_err() || !facet_graph_connected(fl) {
        return None;
    }
    let lattice = FaceLattice::new(fl).ok()?;
    if !lattice.is_eulerian() || !lattice.is_2simple() || !lattice.is_2simplicial() {
        return None;
    }
    let (canon, _) = canonical_labeling(fl);
    Some(SphereType {
        flag_vector: lattice.flag_vector(),
        p_vector: fl.p_vector(),
        facet_list: canon,
    })
}

/// Facets are adjacent when they share a triangle.
pub fn facet_graph_connected(fl: &FacetList) -> bool {
    let f = fl.facets();
    if f.is_empty() {
        return true;
    }
    let mut seen = vec![false; f.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..f.len() {
            if !seen[j] && (f[i] & f[j]).count_ones() >= 3 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn canonical_key(canon: &FacetList) -> Vec<u64> {
    canon.facets().to_vec()
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Wall-clock limit; `None` runs to completion.
    pub budget: Option<Duration>,
    /// Restrict to one edge count.
    pub m: Option<usize>,
    /// Restrict to one p-vector.
    pub p: Option<PVector>,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// Number of facets added below the two fixed ones before the search
    /// tree is cut into tasks.
    pub split_depth: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { budget: Some(Duration::from_secs(3600)), m: None, p: None, jobs: None, split_depth: 2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub candidates: usize,
    pub tasks: usize,
    pub nodes: u64,
    pub leaves: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub n: usize,
    /// Sorted by `(m, p-vector, canonical facets)`.
    pub spheres: Vec<SphereType>,
    pub stats: SearchStats,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("n = {n} is below 5")]
    TooSmall { n: usize },
    #[error("budget exceeded with {} unfinished tasks", .frontier.tasks.len())]
    BudgetExceeded {
        partial: Box<Classification>,
        frontier: Box<Frontier>,
    },
    #[error("frontier is for n = {found}, not {expected}")]
    FrontierMismatch { expected: usize, found: usize },
}

/// Classifies all connected 2s2s Eulerian lattices with `n` vertices within
/// the scope of `opts`.
pub fn classify(n: usize, opts: &ClassifyOptions) -> Result<Classification, ClassifyError> {
    if n < 5 {
        return Err(ClassifyError::TooSmall { n });
    }
    let (lo, hi) = m_range(n);
    let mut tasks = Vec::new();
    let mut stats = SearchStats::default();
    for m in lo..=hi {
        if opts.m.is_some_and(|want| want != m) {
            continue;
        }
        for cand in p_vector_candidates(n, m) {
            if opts.p.as_ref().is_some_and(|want| *want != cand.p) {
                continue;
            }
            stats.candidates += 1;
            for task in search::root_tasks(&cand, opts.split_depth) {
                tasks.push((cand.clone(), task));
            }
        }
    }
    run(n, tasks, Vec::new(), stats, opts)
}

/// Continues a classification from a saved frontier.
pub fn resume(frontier: Frontier, opts: &ClassifyOptions) -> Result<Classification, ClassifyError> {
    let stats = SearchStats { candidates: 0, ..Default::default() };
    run(frontier.n, frontier.tasks, frontier.found, stats, opts)
}

fn run(
    n: usize,
    tasks: Vec<(PVectorCandidate, Task)>,
    found: Vec<FacetList>,
    mut stats: SearchStats,
    opts: &ClassifyOptions,
) -> Result<Classification, ClassifyError> {
    let deadline = opts.budget.map(|b| Instant::now() + b);
    stats.tasks = tasks.len();
    let work = || -> Vec<Option<search::TaskOutput>> {
        tasks
            .par_iter()
            .map(|(cand, task)| search::run_task(cand, task, deadline))
            .collect()
    };
    let outputs = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };

    let mut merged: BTreeMap<Vec<u64>, SphereType> = BTreeMap::new();
    for fl in found {
        if let Some(s) = verify_sphere(&fl) {
            merged.entry(canonical_key(&s.facet_list)).or_insert(s);
        }
    }
    let mut unfinished = Vec::new();
    for ((cand, task), out) in tasks.into_iter().zip(outputs) {
        match out {
            Some(out) => {
                stats.nodes += out.nodes;
                stats.leaves += out.leaves.len() as u64;
                for fl in out.leaves {
                    if let Some(s) = verify_sphere(&fl) {
                        merged.entry(canonical_key(&s.facet_list)).or_insert(s);
                    }
                }
            }
            None => unfinished.push((cand, task)),
        }
    }
    let mut spheres: Vec<SphereType> = merged.into_values().collect();
    spheres.sort_by(|a, b| {
        (a.flag_vector.f1, a.p_vector.from_four(), a.facet_list.facets())
            .cmp(&(b.flag_vector.f1, b.p_vector.from_four(), b.facet_list.facets()))
    });
    let classification = Classification { n, spheres, stats };
    if unfinished.is_empty() {
        Ok(classification)
    } else {
        let frontier = Frontier {
            n,
            found: classification.spheres.iter().map(|s| s.facet_list.clone()).collect(),
            tasks: unfinished,
        };
        Err(ClassifyError::BudgetExceeded { partial: Box::new(classification), frontier: Box::new(frontier) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{is_isomorphic, mask_of};
    use crate::data;
    use rand::{Rng, SeedableRng};

    #[test]
    fn m_range_examples() {
        assert_eq!(m_range(12), (24, 45));
        assert_eq!(m_range(5), (10, 10));
        let (lo, hi) = m_range(9);
        assert_eq!((lo, hi), (18, 27));
        assert!((lo..=hi).contains(&26));
    }

    #[test]
    fn p_vector_counts() {
        let c = p_vector_candidates(12, 40);
        assert!(c.iter().any(|c| c.p.from_four() == vec![4, 1, 6, 1]));
        let mut sorted = c.clone();
        sorted.sort_by_key(|c| c.p.from_four());
        assert_eq!(sorted, c);
        let five = p_vector_candidates(5, 10);
        assert_eq!(five.len(), 1);
        assert_eq!(five[0].p, PVector::from_p4(&[5]));
    }

    /// Brute force over all vectors bounded by `n`, independent of the
    /// recursive generator.
    #[test]
    fn p_vector_candidates_match_brute_force() {
        for n in 5..=12 {
            let (lo, hi) = m_range(n);
            for m in lo..=hi {
                let imax = max_facet_size(n);
                let len = imax - 3;
                let mut expected = Vec::new();
                let mut digits = vec![0usize; len];
                loop {
                    let total: usize = digits.iter().sum();
                    let weight: usize = digits.iter().enumerate().map(|(k, &p)| (2 * (k + 4) - 4) * p).sum();
                    if total == n && weight == 2 * m {
                        expected.push(PVector::from_p4(&digits));
                    }
                    let mut k = 0;
                    while k < len && digits[k] == n {
                        digits[k] = 0;
                        k += 1;
                    }
                    if k == len {
                        break;
                    }
                    digits[k] += 1;
                }
                let mut got: Vec<PVector> = p_vector_candidates(n, m).into_iter().map(|c| c.p).collect();
                got.sort();
                expected.sort();
                assert_eq!(got, expected, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn w12_40_is_proper() {
        assert_eq!(is_proper(data::w12_40().facets()), Ok(()));
    }

    #[test]
    fn renamed_facet_violates_i1() {
        let f2 = mask_of(&[0, 2, 3, 4, 5, 6, 7]);
        let renamed = mask_of(&[0, 2, 3, 4, 5, 6, 8]);
        let err = is_proper(&[f2, renamed]).unwrap_err();
        assert_eq!(err.facets, vec![0, 1]);
        assert_eq!(err.common.count_ones(), 6);
    }

    #[test]
    fn third_facet_on_a_ridge_violates_i2() {
        let w = data::w12_40();
        let f = w.facets();
        // F1 and F2 share the triangle {0,2,3}; a third facet through it
        // meets each of them in exactly three vertices.
        let ridge = f[0] & f[1];
        assert_eq!(ridge.count_ones(), 3);
        let extra = ridge | mask_of(&[9, 10]);
        let err = is_proper(&[f[0], f[1], extra]).unwrap_err();
        assert_eq!(err.facets, vec![0, 1, 2]);
        assert_eq!(err.common, ridge);
    }

    fn brute_proper(facets: &[u64]) -> bool {
        let k = facets.len();
        for a in 0..k {
            for b in a + 1..k {
                let x = facets[a] & facets[b];
                if !matches!(x.count_ones(), 0 | 1 | 3) {
                    return false;
                }
                for c in b + 1..k {
                    if (x & facets[c]).count_ones() > 2 {
                        return false;
                    }
                    for d in c + 1..k {
                        if (x & facets[c] & facets[d]).count_ones() > 1 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn incremental_agrees_with_full() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let w = data::w12_40();
        let mut disagreements = 0;
        for _ in 0..1000 {
            // Mostly facets of W12_40 so that a good fraction is proper.
            let mut list: Vec<u64> = Vec::new();
            let len = rng.gen_range(2..8);
            while list.len() < len {
                let f = if rng.gen_bool(0.7) {
                    w.facets()[rng.gen_range(0..12)]
                } else {
                    let mut m = 0u64;
                    while m.count_ones() < rng.gen_range(4..7) {
                        m |= 1 << rng.gen_range(0..12);
                    }
                    m
                };
                if !list.contains(&f) {
                    list.push(f);
                }
            }
            let prefix_ok = brute_proper(&list[..list.len() - 1]);
            if !prefix_ok {
                continue;
            }
            if is_proper_incremental(&list).is_ok() != brute_proper(&list) {
                disagreements += 1;
            }
            assert_eq!(is_proper(&list).is_ok(), brute_proper(&list));
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn simplex_is_the_only_n5_sphere() {
        let out = find_facet_lists(&p_vector_candidates(5, 10)[0]);
        assert_eq!(out.len(), 1);
        assert!(is_isomorphic(&out[0], &data::simplex5()));
    }

    #[test]
    fn nothing_for_n6() {
        let (lo, hi) = m_range(6);
        for m in lo..=hi {
            for cand in p_vector_candidates(6, m) {
                assert!(find_facet_lists(&cand).is_empty(), "{cand}");
            }
        }
    }

    #[test]
    fn hypersimplex_candidate_finds_it() {
        let h = data::hypersimplex();
        let fv = FaceLattice::new(&h).unwrap().flag_vector();
        let cand = PVectorCandidate { n: 10, m: fv.f1, p: h.p_vector() };
        let out = find_facet_lists(&cand);
        assert!(out.iter().any(|fl| is_isomorphic(fl, &h)));
    }

    #[test]
    fn disjoint_simplices_are_rejected() {
        let mut facets = data::simplex5().facets().to_vec();
        facets.extend(data::simplex5().facets().iter().map(|f| f << 5));
        let fl = FacetList::new(10, facets).unwrap();
        assert!(is_proper(fl.facets()).is_ok());
        assert!(FaceLattice::new(&fl).unwrap().is_eulerian());
        assert!(!facet_graph_connected(&fl));
        assert!(verify_sphere(&fl).is_none());
    }
}
