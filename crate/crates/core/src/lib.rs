//! Combinatorics and realizability certificates for 2-simple 2-simplicial
//! polyhedral 3-spheres: facet-list enumeration, face-lattice checks,
//! partial-chirotope propagation with replayable proofs, biquadratic final
//! polynomials, and exact verification of coordinate certificates.

pub mod chirotope;
pub mod complex;
pub mod data;
pub mod enumerate;
pub mod geomcert;
pub mod lp;
pub mod replay;
