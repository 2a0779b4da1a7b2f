//! Facet lists and face lattices of polyhedral 3-spheres.
//!
//! Vertex sets are stored as `u64` bitsets, so at most 63 vertices are
//! supported (the top element of a lattice needs the full mask). Every type
//! here is an immutable value once constructed.

mod canon;
mod lattice;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use canon::{canonical_form, canonical_labeling, is_isomorphic};
pub use lattice::{EulerViolation, FaceLattice, LatticeError};

/// Largest vertex count a [`FacetList`] can hold.
pub const MAX_VERTICES: usize = 63;

/// Iterates the set bits of `mask` in increasing order.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Builds a bitset from vertex indices.
pub fn mask_of(vertices: &[usize]) -> u64 {
    vertices.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

/// Mask with the lowest `n` bits set.
pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FacetListError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: expected `n <N>` header before the first facet")]
    MissingHeader { line: usize },
    #[error("vertex count {n} exceeds the supported maximum of {MAX_VERTICES}")]
    TooManyVertices { n: usize },
    #[error("line {line}: vertex {vertex} out of range 0..{n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: vertex {vertex} repeated within one facet")]
    RepeatedVertex { line: usize, vertex: usize },
    #[error("line {line}: facet has {size} vertices, a facet of a 3-sphere needs at least 4")]
    FacetTooSmall { line: usize, size: usize },
    #[error("line {line}: duplicate of the facet on line {first}")]
    DuplicateFacet { line: usize, first: usize },
    #[error("line {line}: facet is contained in the facet on line {other}")]
    SubsetFacet { line: usize, other: usize },
    #[error("vertex {vertex} lies in no facet")]
    UncoveredVertex { vertex: usize },
    #[error("{count} facets given; a 3-sphere has at least 5")]
    TooFewFacets { count: usize },
}

/// A list of facets, each a set of vertex indices in `0..n`.
///
/// Construction validates the invariants every facet list of a 3-sphere
/// satisfies: facets have at least four vertices, none contains another,
/// and every vertex is covered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FacetList {
    n: usize,
    facets: Vec<u64>,
}

impl FacetList {
    /// Validates `facets` (bitsets over `0..n`). Error positions are the
    /// 1-based index of the offending facet.
    pub fn new(n: usize, facets: Vec<u64>) -> Result<Self, FacetListError> {
        let lines: Vec<usize> = (1..=facets.len()).collect();
        Self::validated(n, facets, &lines)
    }

    pub fn from_vertex_lists(n: usize, facets: &[&[usize]]) -> Result<Self, FacetListError> {
        let mut masks = Vec::with_capacity(facets.len());
        for (i, f) in facets.iter().enumerate() {
            let mut m = 0u64;
            for &v in f.iter() {
                if v >= n {
                    return Err(FacetListError::VertexOutOfRange { line: i + 1, vertex: v, n });
                }
                if m & (1 << v) != 0 {
                    return Err(FacetListError::RepeatedVertex { line: i + 1, vertex: v });
                }
                m |= 1 << v;
            }
            masks.push(m);
        }
        Self::new(n, masks)
    }

    fn validated(n: usize, facets: Vec<u64>, lines: &[usize]) -> Result<Self, FacetListError> {
        if n > MAX_VERTICES {
            return Err(FacetListError::TooManyVertices { n });
        }
        let all = full_mask(n);
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for (i, &f) in facets.iter().enumerate() {
            if f & !all != 0 {
                let vertex = bits(f & !all).next().unwrap_or(n);
                return Err(FacetListError::VertexOutOfRange { line: lines[i], vertex, n });
            }
            let size = f.count_ones() as usize;
            if size < 4 {
                return Err(FacetListError::FacetTooSmall { line: lines[i], size });
            }
            if let Some(&first) = seen.get(&f) {
                return Err(FacetListError::DuplicateFacet { line: lines[i], first });
            }
            seen.insert(f, lines[i]);
        }
        for (i, &f) in facets.iter().enumerate() {
            for (j, &g) in facets.iter().enumerate() {
                if i != j && f & g == f {
                    return Err(FacetListError::SubsetFacet { line: lines[i], other: lines[j] });
                }
            }
        }
        let covered = facets.iter().fold(0u64, |m, &f| m | f);
        if let Some(vertex) = bits(all & !covered).next() {
            return Err(FacetListError::UncoveredVertex { vertex });
        }
        if facets.len() < 5 {
            return Err(FacetListError::TooFewFacets { count: facets.len() });
        }
        Ok(FacetList { n, facets })
    }

    /// Parses the line-oriented facet-list format: `#` comments, an `n <N>`
    /// header, then one facet per line as space-separated vertex indices.
    pub fn parse(text: &str) -> Result<Self, FacetListError> {
        let mut n: Option<usize> = None;
        let mut facets = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(rest) = content.strip_prefix('n') {
                if n.is_some() {
                    return Err(FacetListError::Malformed { line, msg: "second `n` header".into() });
                }
                let value = rest.trim().parse::<usize>().map_err(|_| FacetListError::Malformed {
                    line,
                    msg: format!("bad vertex count `{}`", rest.trim()),
                })?;
                if value > MAX_VERTICES {
                    return Err(FacetListError::TooManyVertices { n: value });
                }
                n = Some(value);
                continue;
            }
            let Some(nv) = n else {
                return Err(FacetListError::MissingHeader { line });
            };
            let mut mask = 0u64;
            for tok in content.split_whitespace() {
                let v = tok.parse::<usize>().map_err(|_| FacetListError::Malformed {
                    line,
                    msg: format!("`{tok}` is not a vertex index"),
                })?;
                if v >= nv {
                    return Err(FacetListError::VertexOutOfRange { line, vertex: v, n: nv });
                }
                if mask & (1 << v) != 0 {
                    return Err(FacetListError::RepeatedVertex { line, vertex: v });
                }
                mask |= 1 << v;
            }
            facets.push(mask);
            lines.push(line);
        }
        let Some(n) = n else {
            return Err(FacetListError::MissingHeader { line: text.lines().count().max(1) });
        };
        Self::validated(n, facets, &lines)
    }

    /// Parses a file holding several facet lists, each introduced by its own
    /// `n <N>` header. Line numbers in errors refer to the whole file.
    pub fn parse_many(text: &str) -> Result<Vec<Self>, FacetListError> {
        let mut out = Vec::new();
        let mut chunk: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim_start().starts_with('n') {
                if let Some(body) = chunk.take() {
                    out.push(Self::parse(&body)?);
                }
                // Pad with empty lines so reported line numbers stay file-relative.
                chunk = Some("\n".repeat(idx));
            }
            match chunk.as_mut() {
                Some(body) => {
                    body.push_str(raw);
                    body.push('\n');
                }
                None => {
                    let t = raw.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        return Err(FacetListError::MissingHeader { line: idx + 1 });
                    }
                }
            }
        }
        if let Some(body) = chunk {
            out.push(Self::parse(&body)?);
        }
        Ok(out)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn facets(&self) -> &[u64] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn facet_vertices(&self, j: usize) -> Vec<usize> {
        bits(self.facets[j]).collect()
    }

    /// Index of the facet with exactly this vertex set.
    pub fn position(&self, mask: u64) -> Option<usize> {
        self.facets.iter().position(|&f| f == mask)
    }

    /// Number of facets containing each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &f in &self.facets {
            for v in bits(f) {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Applies the vertex relabeling `perm[old] = new` and sorts the facets.
    pub fn relabel(&self, perm: &[usize]) -> FacetList {
        let mut facets: Vec<u64> = self
            .facets
            .iter()
            .map(|&f| bits(f).fold(0u64, |m, v| m | (1 << perm[v])))
            .collect();
        facets.sort_unstable();
        FacetList { n: self.n, facets }
    }

    /// The same facet list with facets sorted by bitset value.
    pub fn sorted(&self) -> FacetList {
        let mut facets = self.facets.clone();
        facets.sort_unstable();
        FacetList { n: self.n, facets }
    }

    pub fn p_vector(&self) -> PVector {
        let mut counts = vec![0usize; self.n + 1];
        for &f in &self.facets {
            counts[f.count_ones() as usize] += 1;
        }
        PVector::from_counts(counts)
    }

    /// Vertices lying in exactly four facets.
    pub fn simple_vertices(&self) -> Vec<usize> {
        self.vertex_degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 4)
            .map(|(v, _)| v)
            .collect()
    }

    /// Indices of facets containing no simple vertex.
    pub fn facets_without_simple_vertex(&self) -> Vec<usize> {
        let simple = mask_of(&self.simple_vertices());
        (0..self.facets.len()).filter(|&j| self.facets[j] & simple == 0).collect()
    }

    /// Serializes to the facet-list text format (ascending indices).
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for &f in &self.facets {
            let line: Vec<String> = bits(f).map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for FacetList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Facet counts by vertex number: `p[i]` facets have exactly `i` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PVector {
    counts: Vec<usize>,
}

impl PVector {
    pub fn from_counts(mut counts: Vec<usize>) -> Self {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        PVector { counts }
    }

    /// Builds a p-vector from `(p4, p5, ...)`.
    pub fn from_p4(entries: &[usize]) -> Self {
        let mut counts = vec![0; 4];
        counts.extend_from_slice(entries);
        Self::from_counts(counts)
    }

    pub fn get(&self, i: usize) -> usize {
        self.counts.get(i).copied().unwrap_or(0)
    }

    /// Largest `i` with `p_i > 0`.
    pub fn max_size(&self) -> Option<usize> {
        (0..self.counts.len()).rev().find(|&i| self.counts[i] > 0)
    }

    /// `(p4, p5, ..., p_max)`.
    pub fn from_four(&self) -> Vec<usize> {
        (4..self.counts.len().max(4)).map(|i| self.get(i)).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `sum (2i - 4) p_i`, which equals `2 f1` for a 2-simplicial sphere.
    pub fn ridge_incidences(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, &p)| (2 * i).saturating_sub(4) * p).sum()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

impl fmt::Display for PVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.from_four().iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Face counts by rank plus the incidence counts `f02` and `f13`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlagVector {
    pub f0: usize,
    pub f1: usize,
    pub f2: usize,
    pub f3: usize,
    /// Incident (vertex, 2-face) pairs.
    pub f02: usize,
    /// Incident (edge, facet) pairs.
    pub f13: usize,
}

impl FlagVector {
    pub fn euler_characteristic(&self) -> isize {
        self.f0 as isize - self.f1 as isize + self.f2 as isize - self.f3 as isize
    }

    /// The generalized Dehn-Sommerville relations for Eulerian rank-5 lattices
    /// force `f0 - f1 + f2 - f3 = 0` and `f02 = f13`.
    pub fn dehn_sommerville_consistent(&self) -> bool {
        self.euler_characteristic() == 0 && self.f02 == self.f13
    }
}

impl fmt::Display for FlagVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{};{})", self.f0, self.f1, self.f2, self.f3, self.f02)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn parse_w12_40() {
        let fl = data::w12_40();
        assert_eq!(fl.n_vertices(), 12);
        assert_eq!(fl.len(), 12);
        assert_eq!(fl.facet_vertices(6), vec![0, 5, 7, 8, 9, 10]);
    }

    #[test]
    fn parse_rejects_single_facet() {
        let err = FacetList::parse("n 5\n0 1 2 3 4\n").unwrap_err();
        assert_eq!(err, FacetListError::TooFewFacets { count: 1 });
    }

    #[test]
    fn parse_accepts_simplex() {
        let fl = FacetList::parse("n 5\n1 2 3 4\n0 2 3 4\n0 1 3 4\n0 1 2 4\n0 1 2 3\n").unwrap();
        assert_eq!(fl.len(), 5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# comment\nn 6\n0 1 2 3\n0 1 2 3\n";
        assert_eq!(
            FacetList::parse(text).unwrap_err(),
            FacetListError::DuplicateFacet { line: 4, first: 3 }
        );
        let text = "n 6\n0 1 2 3 4\n0 1 2 3\n";
        assert_eq!(
            FacetList::parse(text).unwrap_err(),
            FacetListError::SubsetFacet { line: 3, other: 2 }
        );
        let text = "n 6\n0 1 2 3\n0 1 2 9\n";
        assert_eq!(
            FacetList::parse(text).unwrap_err(),
            FacetListError::VertexOutOfRange { line: 3, vertex: 9, n: 6 }
        );
        let text = "n 6\n0 1 x 3\n";
        assert!(matches!(FacetList::parse(text), Err(FacetListError::Malformed { line: 2, .. })));
        assert!(matches!(
            FacetList::parse("0 1 2 3\n"),
            Err(FacetListError::MissingHeader { line: 1 })
        ));
        assert!(matches!(
            FacetList::parse("n 7\n0 1 2 3\n0 1 2 4\n0 1 3 4\n0 2 3 4\n1 2 3 4\n"),
            Err(FacetListError::UncoveredVertex { vertex: 5 })
        ));
    }

    #[test]
    fn p_vector_of_w12_40() {
        let p = data::w12_40().p_vector();
        assert_eq!(p.from_four(), vec![4, 1, 6, 1]);
        assert_eq!(p.total(), 12);
        assert_eq!(p.ridge_incidences(), 80);
    }

    #[test]
    fn simple_vertices_of_w12_40() {
        let fl = data::w12_40();
        assert_eq!(fl.simple_vertices(), vec![3, 6, 7, 9]);
        assert_eq!(fl.facets_without_simple_vertex(), vec![11]);
        let s = data::simplex5();
        assert_eq!(s.simple_vertices(), vec![0, 1, 2, 3, 4]);
        assert!(s.facets_without_simple_vertex().is_empty());
    }

    #[test]
    fn parse_many_round_trip() {
        let a = data::simplex5();
        let b = data::w12_40();
        let text = format!("# first\n{}\n# second\n{}", a.to_text(), b.to_text());
        let lists = FacetList::parse_many(&text).unwrap();
        assert_eq!(lists, vec![a, b]);
    }
}
