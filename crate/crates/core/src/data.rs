//! Bundled facet lists and coordinate tables.

use crate::chirotope::{BfpCertificate, PartialChirotope};
use crate::complex::{FaceLattice, FacetList};
use crate::geomcert::PointConfiguration;

pub const W12_40: &str = include_str!("../data/w12_40.facets");
pub const SIMPLEX5: &str = include_str!("../data/simplex5.facets");
pub const HYPERSIMPLEX: &str = include_str!("../data/hypersimplex.facets");
pub const W12_40_DIAGRAM_F2: &str = include_str!("../data/w12_40_diagram_f2.coords");
pub const W12_40_FAN: &str = include_str!("../data/w12_40_fan.coords");
pub const PAPPUS9: &str = include_str!("../data/pappus9.chi");
pub const PAPPUS9_REFUTED: &str = include_str!("../data/pappus9_refuted.chi");
pub const PAPPUS9_BFP: &str = include_str!("../data/pappus9.bfp");

fn parse(text: &str) -> FacetList {
    FacetList::parse(text).expect("bundled facet list is valid")
}

/// The 2s2s sphere with flag vector (12,40,40,12;120), facets `F1..F12`.
pub fn w12_40() -> FacetList {
    parse(W12_40)
}

/// Boundary of the 4-simplex.
pub fn simplex5() -> FacetList {
    parse(SIMPLEX5)
}

/// The hypersimplex `Δ4(2)`.
pub fn hypersimplex() -> FacetList {
    parse(HYPERSIMPLEX)
}

/// Dual of the hypersimplex, written on its ten facets.
pub fn hypersimplex_dual() -> FacetList {
    FaceLattice::new(&hypersimplex()).expect("hypersimplex is a sphere").dual().facet_list().clone()
}

/// Integer diagram coordinates of `W12_40` with base facet `F2`.
pub fn w12_40_diagram_f2() -> PointConfiguration {
    PointConfiguration::parse(W12_40_DIAGRAM_F2).expect("bundled coordinates are valid")
}

/// Fan ray generators of `W12_40`.
pub fn w12_40_fan() -> PointConfiguration {
    PointConfiguration::parse(W12_40_FAN).expect("bundled coordinates are valid")
}

/// Rank 3 signs of nine points perturbed off a Pappus configuration, with
/// the orientation of the ninth line reversed. Only 44 of the 84 bases are
/// given; the rest are left for propagation and search.
pub fn pappus9() -> PartialChirotope {
    PartialChirotope::parse(PAPPUS9).expect("bundled chirotope is valid")
}

/// The floor node of [`pappus9`] that the search refutes.
pub fn pappus9_refuted() -> PartialChirotope {
    PartialChirotope::parse(PAPPUS9_REFUTED).expect("bundled chirotope is valid")
}

/// Final polynomial for [`pappus9_refuted`].
pub fn pappus9_bfp() -> BfpCertificate {
    BfpCertificate::parse(PAPPUS9_BFP).expect("bundled certificate is valid")
}
