//! Canonical labeling of facet lists.
//!
//! The vertex-facet incidence graph is a bipartite graph with the two sides
//! kept in separate colour classes. Colour refinement followed by
//! individualization of the first non-singleton cell enumerates a
//! label-invariant set of discrete partitions; the lexicographically smallest
//! relabeled facet list over all of them is the canonical form.

use super::{bits, FacetList};

type Partition = Vec<Vec<usize>>;

struct Incidence {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Incidence {
    fn new(fl: &FacetList) -> Self {
        let n = fl.n_vertices();
        let f = fl.len();
        let mut adj = vec![Vec::new(); n + f];
        for (j, &mask) in fl.facets().iter().enumerate() {
            for v in bits(mask) {
                adj[v].push(n + j);
                adj[n + j].push(v);
            }
        }
        Incidence { n, adj }
    }

    /// Colour refinement until the number of cells is stable. Cells are split
    /// in place and the pieces ordered by signature, so the result depends
    /// only on the input's cell order.
    fn refine(&self, mut cells: Partition) -> Partition {
        let mut cell_of = vec![0usize; self.adj.len()];
        loop {
            for (c, cell) in cells.iter().enumerate() {
                for &u in cell {
                    cell_of[u] = c;
                }
            }
            let mut next: Partition = Vec::with_capacity(cells.len());
            for cell in &cells {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<(usize, usize)>, usize)> = cell
                    .iter()
                    .map(|&u| {
                        let mut counts: Vec<usize> = self.adj[u].iter().map(|&w| cell_of[w]).collect();
                        counts.sort_unstable();
                        let mut sig: Vec<(usize, usize)> = Vec::new();
                        for c in counts {
                            match sig.last_mut() {
                                Some((last, k)) if *last == c => *k += 1,
                                _ => sig.push((c, 1)),
                            }
                        }
                        (sig, u)
                    })
                    .collect();
                keyed.sort();
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        next.push(keyed[start..i].iter().map(|(_, u)| *u).collect());
                        start = i;
                    }
                }
            }
            if next.len() == cells.len() {
                return next;
            }
            cells = next;
        }
    }

    fn search(&self, cells: Partition, best: &mut Option<(Vec<u64>, Vec<usize>)>) {
        let cells = self.refine(cells);
        match cells.iter().position(|c| c.len() > 1) {
            None => {
                let mut perm = vec![0usize; self.n];
                let mut next = 0;
                for cell in &cells {
                    if cell[0] < self.n {
                        perm[cell[0]] = next;
                        next += 1;
                    }
                }
                let mut cert: Vec<u64> = (self.n..self.adj.len())
                    .map(|node| self.adj[node].iter().fold(0u64, |m, &v| m | 1 << perm[v]))
                    .collect();
                cert.sort_unstable();
                if best.as_ref().is_none_or(|(b, _)| cert < *b) {
                    *best = Some((cert, perm));
                }
            }
            Some(t) => {
                for &u in &cells[t] {
                    let mut split = Vec::with_capacity(cells.len() + 1);
                    split.extend_from_slice(&cells[..t]);
                    split.push(vec![u]);
                    split.push(cells[t].iter().copied().filter(|&w| w != u).collect());
                    split.extend_from_slice(&cells[t + 1..]);
                    self.search(split, best);
                }
            }
        }
    }
}

/// Returns the canonical relabeling of `fl` together with the permutation
/// `perm[old] = new` that produces it.
pub fn canonical_labeling(fl: &FacetList) -> (FacetList, Vec<usize>) {
    let g = Incidence::new(fl);
    let n = fl.n_vertices();
    let vertices: Vec<usize> = (0..n).collect();
    let facets: Vec<usize> = (n..n + fl.len()).collect();
    let mut initial = vec![vertices];
    if !facets.is_empty() {
        initial.push(facets);
    }
    let mut best = None;
    g.search(initial, &mut best);
    let (_, perm) = best.expect("search visits at least one leaf");
    (fl.relabel(&perm), perm)
}

/// Byte string identifying the isomorphism class of `fl`.
pub fn canonical_form(fl: &FacetList) -> Vec<u8> {
    let (canon, _) = canonical_labeling(fl);
    let masks: Vec<String> = canon.facets().iter().map(|m| format!("{m:x}")).collect();
    format!("n{}:{}", canon.n_vertices(), masks.join(",")).into_bytes()
}

pub fn is_isomorphic(a: &FacetList, b: &FacetList) -> bool {
    a.n_vertices() == b.n_vertices() && a.len() == b.len() && canonical_form(a) == canonical_form(b)
}
