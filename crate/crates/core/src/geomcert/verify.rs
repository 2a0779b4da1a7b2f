//! Diagram and fan checks by exact orientation tests.
//!
//! A set of vertices spans a 3-polytope (or a pointed 4-cone) whose 2-faces
//! are found by brute force: three vertices span a face plane exactly when
//! all remaining vertices lie strictly on one side or on the plane. Facet
//! sizes are at most seven, so this stays cheap.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Homogenization, PointConfiguration};
use crate::chirotope::{subsets, Sign};
use crate::complex::{bits, mask_of, FaceLattice, FacetList, LatticeError};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("configuration has {points} points but the sphere has {vertices} vertices")]
    Size { points: usize, vertices: usize },
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("ray generator v{0} is the zero vector")]
    ZeroVector(usize),
    #[error("base facet F{0} does not exist")]
    Base(usize),
    #[error("2-face {0:?} is not a triangle")]
    NotTwoSimplicial(Vec<usize>),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One family of conditions: how many instances were tested and the first
/// failing one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub tested: usize,
    pub witness: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateReport {
    /// `diagram base=F<k>` or `fan`.
    pub subject: String,
    pub checks: Vec<Check>,
}

pub type DiagramReport = CertificateReport;
pub type FanReport = CertificateReport;

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# polysphere report\nsubject {}\n", self.subject);
        for c in &self.checks {
            match &c.witness {
                None => {
                    let _ = writeln!(out, "{}: pass ({} tested)", c.name, c.tested);
                }
                Some(w) => {
                    let _ = writeln!(out, "{}: FAIL {}", c.name, w);
                }
            }
        }
        let _ = writeln!(out, "verdict: {}", if self.passed() { "pass" } else { "FAIL" });
        out
    }
}

fn tuple(v: &[usize]) -> String {
    let p: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", p.join(","))
}

fn vertex_set(mask: u64) -> String {
    tuple(&bits(mask).collect::<Vec<_>>())
}

/// A face plane of a hull: spanning triple, the vertices on it, and the
/// side the other vertices are on.
struct HullFace {
    triple: [usize; 3],
    on: u64,
    side: Sign,
}

/// Faces of the hull of `verts`, or `None` when all of them are coplanar.
fn hull_faces(pc: &PointConfiguration, h: Homogenization, verts: &[usize]) -> Option<Vec<HullFace>> {
    let mut faces: BTreeMap<u64, HullFace> = BTreeMap::new();
    let mut flat = true;
    for t in subsets(verts.len(), 3) {
        let triple = [verts[t[0]], verts[t[1]], verts[t[2]]];
        let mut on = mask_of(&triple);
        let mut side = Sign::Zero;
        let mut split = false;
        for &x in verts {
            if on & (1 << x) != 0 {
                continue;
            }
            match pc.orientation(&[triple[0], triple[1], triple[2], x], h) {
                Sign::Zero => on |= 1 << x,
                s if side == Sign::Zero => side = s,
                s if s != side => split = true,
                _ => {}
            }
        }
        if side != Sign::Zero {
            flat = false;
        }
        if !split && side != Sign::Zero {
            faces.entry(on).or_insert(HullFace { triple, on, side });
        }
    }
    (!flat).then(|| faces.into_values().collect())
}

fn sphere_two_faces(lattice: &FaceLattice) -> Result<Vec<u64>, VerifyError> {
    let faces = lattice.ridges().to_vec();
    if let Some(&t) = faces.iter().find(|t| t.count_ones() != 3) {
        return Err(VerifyError::NotTwoSimplicial(bits(t).collect()));
    }
    Ok(faces)
}

/// Hull faces of every facet must be exactly the sphere's 2-faces inside it.
fn facial_structure(
    pc: &PointConfiguration,
    h: Homogenization,
    fl: &FacetList,
    two_faces: &[u64],
    pointed: bool,
) -> (Check, Vec<Vec<HullFace>>) {
    let mut check = Check { name: "facial-structure", tested: 0, witness: None };
    let mut hulls = Vec::new();
    for (j, &f) in fl.facets().iter().enumerate() {
        check.tested += 1;
        let verts: Vec<usize> = bits(f).collect();
        let Some(faces) = hull_faces(pc, h, &verts) else {
            check.witness.get_or_insert_with(|| format!("F{} is flat", j + 1));
            hulls.push(Vec::new());
            continue;
        };
        let mut expected: Vec<u64> = two_faces.iter().copied().filter(|&t| t & f == t).collect();
        let mut got: Vec<u64> = faces.iter().map(|x| x.on).collect();
        expected.sort_unstable();
        got.sort_unstable();
        if expected != got {
            let w = match got.iter().find(|g| !expected.contains(g)) {
                Some(&g) => format!("F{}: hull face {} is not a 2-face", j + 1, vertex_set(g)),
                None => {
                    let e = expected.iter().find(|e| !got.contains(e)).unwrap();
                    format!("F{}: 2-face {} is not a hull face", j + 1, vertex_set(*e))
                }
            };
            check.witness.get_or_insert(w);
        } else if pointed && !is_pointed(pc, &faces, &verts) {
            check.witness.get_or_insert_with(|| format!("F{}: cone is not pointed", j + 1));
        }
        hulls.push(faces);
    }
    (check, hulls)
}

/// Inward normal of the linear hyperplane through three 4-vectors.
fn normal(pc: &PointConfiguration, triple: [usize; 3], side: Sign) -> [i128; 4] {
    let rows: Vec<Vec<i64>> = triple.iter().map(|&v| pc.vector(v, Homogenization::Linear)).collect();
    std::array::from_fn(|k| {
        let mut m = rows.clone();
        let mut e = vec![0; 4];
        e[k] = 1;
        m.push(e);
        super::determinant(&m) * side.to_i8() as i128
    })
}

/// The sum of inward facet normals is positive on every generator of a
/// pointed cone.
fn is_pointed(pc: &PointConfiguration, faces: &[HullFace], verts: &[usize]) -> bool {
    let mut c = [0i128; 4];
    for f in faces {
        let n = normal(pc, f.triple, f.side);
        for k in 0..4 {
            c[k] += n[k];
        }
    }
    verts.iter().all(|&v| {
        let x = pc.vector(v, Homogenization::Linear);
        (0..4).map(|k| c[k] * x[k] as i128).sum::<i128>() > 0
    })
}

/// Checks a 2-face plane: the other vertices of each adjacent facet lie
/// strictly on one side, the two facets on opposite sides.
fn ridge_separation(
    pc: &PointConfiguration,
    h: Homogenization,
    fl: &FacetList,
    lattice: &FaceLattice,
    two_faces: &[u64],
    skip: Option<usize>,
) -> Check {
    let mut check = Check { name: "ridge-separation", tested: 0, witness: None };
    for &t in two_faces {
        let adj = lattice.facets_containing(t);
        let [g, hf] = adj[..] else { continue };
        if Some(g) == skip || Some(hf) == skip {
            continue;
        }
        check.tested += 1;
        let tri: Vec<usize> = bits(t).collect();
        let side = |x: usize| pc.orientation(&[tri[0], tri[1], tri[2], x], h);
        let f = fl.facets();
        let sg = bits(f[g] & !t).next().map(side).unwrap_or(Sign::Zero);
        let bad = bits(f[g] & !t)
            .find(|&x| sg == Sign::Zero || side(x) != sg)
            .or_else(|| bits(f[hf] & !t).find(|&x| side(x) != -sg));
        if let Some(x) = bad {
            check.witness.get_or_insert_with(|| {
                format!("2-face {} between F{} and F{}: v{x}", tuple(&tri), g + 1, hf + 1)
            });
        }
    }
    check
}

fn check_size(pc: &PointConfiguration, fl: &FacetList, dim: usize) -> Result<(), VerifyError> {
    if pc.dim() != dim {
        return Err(VerifyError::Dimension { expected: dim, got: pc.dim() });
    }
    if pc.len() != fl.n_vertices() {
        return Err(VerifyError::Size { points: pc.len(), vertices: fl.n_vertices() });
    }
    Ok(())
}

/// Checks that 3D points form a diagram of `fl` based on facet `base`.
pub fn verify_diagram(pc: &PointConfiguration, fl: &FacetList, base: usize) -> Result<DiagramReport, VerifyError> {
    check_size(pc, fl, 3)?;
    if base >= fl.len() {
        return Err(VerifyError::Base(base + 1));
    }
    let h = Homogenization::Affine;
    let lattice = FaceLattice::new(fl)?;
    let two_faces = sphere_two_faces(&lattice)?;
    let (facial, _) = facial_structure(pc, h, fl, &two_faces, false);
    let ridges = ridge_separation(pc, h, fl, &lattice, &two_faces, Some(base));

    let b = fl.facets()[base];
    let all = crate::complex::full_mask(fl.n_vertices());
    let mut boundary = Check { name: "boundary", tested: 0, witness: None };
    for &t in two_faces.iter().filter(|&&t| t & b == t) {
        boundary.tested += 1;
        let tri: Vec<usize> = bits(t).collect();
        let signs: Vec<(usize, Sign)> =
            bits(all & !t).map(|x| (x, pc.orientation(&[tri[0], tri[1], tri[2], x], h))).collect();
        let inner = bits(b & !t).next().map(|x| pc.orientation(&[tri[0], tri[1], tri[2], x], h));
        if let Some(&(x, _)) = signs.iter().find(|&&(_, s)| s == Sign::Zero || Some(s) != inner) {
            boundary.witness.get_or_insert_with(|| format!("base 2-face {}: v{x}", tuple(&tri)));
        }
    }

    let mut containment = Check { name: "containment", tested: 0, witness: None };
    let base_verts: Vec<usize> = bits(b).collect();
    match hull_faces(pc, h, &base_verts) {
        None => containment.witness = Some(format!("base F{} is flat", base + 1)),
        Some(faces) => {
            for x in bits(all & !b) {
                containment.tested += 1;
                let outside = faces.iter().find(|f| {
                    pc.orientation(&[f.triple[0], f.triple[1], f.triple[2], x], h) != f.side
                });
                if let Some(f) = outside {
                    containment
                        .witness
                        .get_or_insert_with(|| format!("v{x} is not strictly inside hull face {}", vertex_set(f.on)));
                }
            }
        }
    }
    Ok(CertificateReport {
        subject: format!("diagram base=F{}", base + 1),
        checks: vec![facial, ridges, boundary, containment],
    })
}

/// Checks that 4D ray generators span a complete fan with the face
/// structure of `fl`: each facet cone is pointed with the right facets,
/// each 2-face hyperplane separates its two cones, and no ray lies in a
/// cone of a facet it does not belong to. Together with the sphere's
/// combinatorics these local conditions make the cones cover space exactly
/// once.
pub fn verify_fan(pc: &PointConfiguration, fl: &FacetList) -> Result<FanReport, VerifyError> {
    check_size(pc, fl, 4)?;
    if let Some(v) = (0..pc.len()).find(|&v| pc.point(v).iter().all(|&c| c == 0)) {
        return Err(VerifyError::ZeroVector(v));
    }
    let h = Homogenization::Linear;
    let lattice = FaceLattice::new(fl)?;
    let two_faces = sphere_two_faces(&lattice)?;
    let (facial, hulls) = facial_structure(pc, h, fl, &two_faces, true);
    let ridges = ridge_separation(pc, h, fl, &lattice, &two_faces, None);
    let mut rays = Check { name: "ray-incidence", tested: 0, witness: None };
    for (j, &f) in fl.facets().iter().enumerate() {
        for v in bits(crate::complex::full_mask(fl.n_vertices()) & !f) {
            rays.tested += 1;
            let outside = hulls[j]
                .iter()
                .any(|x| pc.orientation(&[x.triple[0], x.triple[1], x.triple[2], v], h) == -x.side);
            if !outside {
                rays.witness.get_or_insert_with(|| format!("v{v} lies in the cone of F{}", j + 1));
            }
        }
    }
    Ok(CertificateReport { subject: "fan".to_string(), checks: vec![facial, ridges, rays] })
}
