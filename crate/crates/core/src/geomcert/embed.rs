//! Combinatorial facts about simple vertices and tetrahedral facets.

use std::fmt::Write as _;

use crate::chirotope::subsets;
use crate::complex::{bits, mask_of, FacetList};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddabilityReport {
    /// Vertices in exactly four facets, with those facets.
    pub simple_vertices: Vec<(usize, Vec<usize>)>,
    pub facets_without_simple_vertex: Vec<usize>,
    /// Each tetrahedral facet with its neighbour across each triangle.
    pub tetrahedra: Vec<(usize, Vec<([usize; 3], usize)>)>,
}

pub fn embeddability_report(fl: &FacetList) -> EmbeddabilityReport {
    let f = fl.facets();
    let simple_vertices = fl
        .simple_vertices()
        .into_iter()
        .map(|v| (v, (0..f.len()).filter(|&j| f[j] & (1 << v) != 0).collect()))
        .collect();
    let tetrahedra = (0..f.len())
        .filter(|&j| f[j].count_ones() == 4)
        .map(|j| {
            let verts: Vec<usize> = bits(f[j]).collect();
            let across = subsets(4, 3)
                .into_iter()
                .filter_map(|t| {
                    let tri = [verts[t[0]], verts[t[1]], verts[t[2]]];
                    let m = mask_of(&tri);
                    (0..f.len()).find(|&k| k != j && f[k] & m == m).map(|k| (tri, k))
                })
                .collect();
            (j, across)
        })
        .collect();
    EmbeddabilityReport { simple_vertices, facets_without_simple_vertex: fl.facets_without_simple_vertex(), tetrahedra }
}

fn facets(js: &[usize]) -> String {
    let p: Vec<String> = js.iter().map(|j| format!("F{}", j + 1)).collect();
    p.join(" ")
}

impl EmbeddabilityReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, js) in &self.simple_vertices {
            let _ = writeln!(out, "simple v{v}: {}", facets(js));
        }
        let _ = writeln!(out, "without simple vertex: {}", facets(&self.facets_without_simple_vertex));
        for (j, across) in &self.tetrahedra {
            let parts: Vec<String> =
                across.iter().map(|(t, k)| format!("({},{},{})->F{}", t[0], t[1], t[2], k + 1)).collect();
            let _ = writeln!(out, "tetrahedron F{}: {}", j + 1, parts.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn w12_40_structure() {
        let r = embeddability_report(&data::w12_40());
        let simple: Vec<usize> = r.simple_vertices.iter().map(|(v, _)| *v).collect();
        assert_eq!(simple, vec![3, 6, 7, 9]);
        assert_eq!(r.simple_vertices[0].1, vec![0, 1, 2, 7]);
        assert_eq!(r.facets_without_simple_vertex, vec![11]);
        let (_, f12) = r.tetrahedra.iter().find(|(j, _)| *j == 11).unwrap();
        let mut nb: Vec<usize> = f12.iter().map(|(_, k)| *k).collect();
        nb.sort_unstable();
        assert_eq!(nb, vec![1, 7, 8, 10]);
    }

    #[test]
    fn simplex_vertices_are_all_simple() {
        let r = embeddability_report(&data::simplex5());
        assert_eq!(r.simple_vertices.len(), 5);
        assert!(r.facets_without_simple_vertex.is_empty());
    }
}
