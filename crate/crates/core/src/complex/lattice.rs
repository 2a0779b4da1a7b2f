use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::{bits, full_mask, FacetList, FlagVector};

/// Rank of the face lattice of a 3-sphere (bottom 0, top 5).
pub const SPHERE_RANK: u8 = 5;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    /// Two faces in a covering relation whose ranks differ by more than one,
    /// or a top element of the wrong rank.
    #[error("intersection closure is not graded of rank 5: {reason}")]
    NotGraded { reason: String },
    #[error("intersection closure has a chain of length {rank}, longer than 5")]
    RankOverflow { rank: u8 },
    #[error("vertex {vertex} is not an atom of the intersection closure")]
    MissingVertex { vertex: usize },
}

/// An interval `[lower, upper]` whose even- and odd-rank element counts differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerViolation {
    pub lower: u64,
    pub upper: u64,
    pub lower_rank: u8,
    pub upper_rank: u8,
    pub even: usize,
    pub odd: usize,
}

impl fmt::Display for EulerViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "interval [{}, {}] (ranks {}..{}) has {} even and {} odd elements",
            fmt_face(self.lower),
            fmt_face(self.upper),
            self.lower_rank,
            self.upper_rank,
            self.even,
            self.odd
        )
    }
}

pub(crate) fn fmt_face(mask: u64) -> String {
    let items: Vec<String> = bits(mask).map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// The graded poset of all faces of a facet list, closed under intersection.
///
/// Faces are kept sorted by rank and then by bitset value; `∅` has rank 0,
/// vertices rank 1 and the top element (the full vertex set) rank 5.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    facet_list: FacetList,
    faces: Vec<u64>,
    ranks: Vec<u8>,
    rank_start: [usize; 7],
    index: HashMap<u64, usize>,
}

impl FaceLattice {
    /// Builds the intersection closure of the facets and ranks each face by
    /// the longest chain below it, then verifies the grading.
    pub fn new(fl: &FacetList) -> Result<Self, LatticeError> {
        let n = fl.n_vertices();
        let top = full_mask(n);
        let mut seen: HashSet<u64> = fl.facets().iter().copied().collect();
        let mut work: Vec<u64> = fl.facets().to_vec();
        while let Some(face) = work.pop() {
            for &f in fl.facets() {
                let x = face & f;
                if x != 0 && seen.insert(x) {
                    work.push(x);
                }
            }
        }
        seen.insert(0);
        seen.insert(top);
        let mut faces: Vec<u64> = seen.into_iter().collect();
        faces.sort_unstable_by_key(|&m| (m.count_ones(), m));

        // Longest chain from the bottom; subsets always precede supersets.
        let mut ranks = vec![0u8; faces.len()];
        for j in 1..faces.len() {
            let y = faces[j];
            let mut best = 0u8;
            for i in 0..j {
                let x = faces[i];
                if x & y == x && x != y {
                    best = best.max(ranks[i] + 1);
                }
            }
            ranks[j] = best;
        }
        let top_rank = *ranks.last().unwrap();
        if top_rank > SPHERE_RANK {
            return Err(LatticeError::RankOverflow { rank: top_rank });
        }
        // Graded: every covering pair differs by exactly one in rank.
        for j in 0..faces.len() {
            let y = faces[j];
            for i in 0..j {
                let x = faces[i];
                if x & y != x || x == y || ranks[i] + 1 == ranks[j] {
                    continue;
                }
                let covered = !(i + 1..j).any(|k| {
                    let z = faces[k];
                    z != x && z != y && x & z == x && z & y == z
                });
                if covered {
                    return Err(LatticeError::NotGraded {
                        reason: format!(
                            "{} (rank {}) is covered by {} (rank {})",
                            fmt_face(x),
                            ranks[i],
                            fmt_face(y),
                            ranks[j]
                        ),
                    });
                }
            }
        }
        if top_rank != SPHERE_RANK {
            return Err(LatticeError::NotGraded {
                reason: format!("top element has rank {top_rank}"),
            });
        }
        let index: HashMap<u64, usize> = faces.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        for v in 0..n {
            match index.get(&(1u64 << v)) {
                Some(&i) if ranks[i] == 1 => {}
                _ => return Err(LatticeError::MissingVertex { vertex: v }),
            }
        }

        let mut order: Vec<usize> = (0..faces.len()).collect();
        order.sort_by_key(|&i| (ranks[i], faces[i]));
        let faces: Vec<u64> = order.iter().map(|&i| faces[i]).collect();
        let ranks: Vec<u8> = order.iter().map(|&i| ranks[i]).collect();
        let mut rank_start = [0usize; 7];
        for r in 0..=6u8 {
            rank_start[r as usize] = ranks.partition_point(|&x| x < r);
        }
        let index = faces.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Ok(FaceLattice { facet_list: fl.clone(), faces, ranks, rank_start, index })
    }

    pub fn facet_list(&self) -> &FacetList {
        &self.facet_list
    }

    pub fn n_vertices(&self) -> usize {
        self.facet_list.n_vertices()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> &[u64] {
        &self.faces
    }

    pub fn rank_of(&self, face: u64) -> Option<u8> {
        self.index.get(&face).map(|&i| self.ranks[i])
    }

    /// Faces of the given rank, sorted by bitset value.
    pub fn faces_of_rank(&self, r: u8) -> &[u64] {
        let r = r as usize;
        if r > 5 {
            return &[];
        }
        &self.faces[self.rank_start[r]..self.rank_start[r + 1]]
    }

    /// Face counts of ranks 0 through 5.
    pub fn rank_counts(&self) -> [usize; 6] {
        let mut c = [0; 6];
        for (r, slot) in c.iter_mut().enumerate() {
            *slot = self.faces_of_rank(r as u8).len();
        }
        c
    }

    /// Edges as vertex pairs.
    pub fn edges(&self) -> &[u64] {
        self.faces_of_rank(2)
    }

    /// 2-faces (ridges).
    pub fn ridges(&self) -> &[u64] {
        self.faces_of_rank(3)
    }

    /// Indices (into the facet list) of the facets containing `face`.
    pub fn facets_containing(&self, face: u64) -> Vec<usize> {
        let fs = self.facet_list.facets();
        (0..fs.len()).filter(|&j| fs[j] & face == face).collect()
    }

    /// Checks the Euler relation on every interval of length at least one.
    pub fn euler_violation(&self) -> Option<EulerViolation> {
        let f = &self.faces;
        for i in 0..f.len() {
            for j in (i + 1)..f.len() {
                let (x, y) = (f[i], f[j]);
                if x & y != x || self.ranks[j] <= self.ranks[i] {
                    continue;
                }
                let (mut even, mut odd) = (0usize, 0usize);
                for k in i..=j {
                    let z = f[k];
                    if x & z == x && z & y == z {
                        if self.ranks[k] % 2 == 0 {
                            even += 1;
                        } else {
                            odd += 1;
                        }
                    }
                }
                if even != odd {
                    return Some(EulerViolation {
                        lower: x,
                        upper: y,
                        lower_rank: self.ranks[i],
                        upper_rank: self.ranks[j],
                        even,
                        odd,
                    });
                }
            }
        }
        None
    }

    pub fn is_eulerian(&self) -> bool {
        self.euler_violation().is_none()
    }

    pub fn flag_vector(&self) -> FlagVector {
        let [_, f0, f1, f2, f3, _] = self.rank_counts();
        // Atoms are singletons, so incidences with vertices are popcounts.
        let f02 = self.faces_of_rank(3).iter().map(|m| m.count_ones() as usize).sum();
        let facets = self.faces_of_rank(4);
        let f13 = self
            .faces_of_rank(2)
            .iter()
            .map(|&e| facets.iter().filter(|&&g| g & e == e).count())
            .sum();
        FlagVector { f0, f1, f2, f3, f02, f13 }
    }

    /// Every edge lies in exactly three facets.
    pub fn is_2simple(&self) -> bool {
        let facets = self.faces_of_rank(4);
        let direct = self
            .faces_of_rank(2)
            .iter()
            .all(|&e| facets.iter().filter(|&&g| g & e == e).count() == 3);
        let fv = self.flag_vector();
        debug_assert_eq!(direct, fv.f13 == 3 * fv.f1);
        direct
    }

    /// Every 2-face has exactly three vertices.
    pub fn is_2simplicial(&self) -> bool {
        let direct = self.faces_of_rank(3).iter().all(|m| m.count_ones() == 3);
        let fv = self.flag_vector();
        debug_assert_eq!(direct, fv.f02 == 3 * fv.f2);
        direct
    }

    /// The order-dual lattice, written on the facets: dual vertex `j` is
    /// facet `j`, and each old vertex becomes the dual facet of the facets
    /// containing it.
    pub fn dual(&self) -> FaceLattice {
        let fs = self.facet_list.facets();
        let dual_facets: Vec<u64> = (0..self.n_vertices())
            .map(|v| {
                (0..fs.len()).filter(|&j| fs[j] >> v & 1 == 1).fold(0u64, |m, j| m | (1 << j))
            })
            .collect();
        let fl = FacetList::new(fs.len(), dual_facets)
            .expect("dual of an Eulerian rank-5 lattice is a valid facet list");
        FaceLattice::new(&fl).expect("dual of an Eulerian lattice is graded")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn simplex_is_boolean() {
        let l = FaceLattice::new(&data::simplex5()).unwrap();
        assert_eq!(l.rank_counts(), [1, 5, 10, 10, 5, 1]);
        assert!(l.is_eulerian());
        assert_eq!(l.flag_vector().to_string(), "(5,10,10,5;30)");
        assert!(l.is_2simple() && l.is_2simplicial());
    }

    #[test]
    fn w12_40_flag_vector() {
        let l = FaceLattice::new(&data::w12_40()).unwrap();
        let fv = l.flag_vector();
        assert_eq!(fv.to_string(), "(12,40,40,12;120)");
        assert_eq!(fv.f13, 120);
        assert!(fv.dehn_sommerville_consistent());
        assert!(l.is_eulerian());
        assert!(l.is_2simple() && l.is_2simplicial());
    }

    #[test]
    fn three_facets_not_graded() {
        // Pairwise intersections are edges and no vertex is ever cut out.
        let fl = FacetList {
            n: 6,
            facets: vec![0b001111, 0b110011, 0b111100],
        };
        assert!(matches!(FaceLattice::new(&fl), Err(LatticeError::NotGraded { .. })));
    }

    #[test]
    fn wedge_of_simplices_is_graded_but_not_eulerian() {
        // Two boundaries of 4-simplices glued at vertex 4.
        let mut facets = Vec::new();
        for skip in 0..5 {
            facets.push((0..5).filter(|&v| v != skip).fold(0u64, |m, v| m | 1 << v));
            facets.push((4..9).filter(|&v| v != skip + 4).fold(0u64, |m, v| m | 1 << v));
        }
        let fl = FacetList::new(9, facets).unwrap();
        let l = FaceLattice::new(&fl).unwrap();
        let w = l.euler_violation().expect("wedge is not Eulerian");

        // Oracle: faces are the nonempty proper subsets of either simplex,
        // plus bottom and top; rank = cardinality.
        let mut oracle: HashSet<u64> = HashSet::new();
        for base in [0usize, 4] {
            for sub in 1u64..31 {
                oracle.insert(bits(sub).fold(0u64, |m, v| m | 1 << (v + base)));
            }
        }
        // Bottom has rank 0 (even), top rank 5 (odd).
        let even = 1 + oracle.iter().filter(|m| m.count_ones() % 2 == 0).count();
        let odd = 1 + oracle.iter().filter(|m| m.count_ones() % 2 == 1).count();
        assert_eq!(l.len(), oracle.len() + 2);
        // Proper intervals below the top are simplex intervals, so [∅, top]
        // is the first violation in scan order.
        assert_eq!((w.lower, w.upper), (0, full_mask(9)));
        assert_eq!((w.even, w.odd), (even, odd));
        assert_ne!(even, odd);
    }

    #[test]
    fn dual_swaps_incidences() {
        for fl in [data::w12_40(), data::hypersimplex(), data::simplex5()] {
            let l = FaceLattice::new(&fl).unwrap();
            let d = l.dual();
            let (a, b) = (l.flag_vector(), d.flag_vector());
            assert_eq!((b.f0, b.f1, b.f2, b.f3, b.f02), (a.f3, a.f2, a.f1, a.f0, a.f13));
            assert!(d.is_eulerian());
        }
    }

    #[test]
    fn lattice_construction_is_idempotent() {
        let l = FaceLattice::new(&data::w12_40()).unwrap();
        let again = FaceLattice::new(l.facet_list()).unwrap();
        assert_eq!(l.faces(), again.faces());
    }
}
