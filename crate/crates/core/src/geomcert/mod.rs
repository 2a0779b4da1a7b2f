//! Exact verification of integer coordinate certificates.

mod embed;
mod verify;

use std::fmt;

pub use embed::{embeddability_report, EmbeddabilityReport};
pub use verify::{verify_diagram, verify_fan, Check, CertificateReport, DiagramReport, FanReport, VerifyError};

use crate::chirotope::{subsets, PartialChirotope, Sign};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CoordError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing `dim` header")]
    MissingDim,
    #[error("vertex v{vertex} has no coordinates")]
    MissingVertex { vertex: usize },
}

/// Integer points indexed by sphere vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfiguration {
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl PointConfiguration {
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Self {
        assert!(points.iter().all(|p| p.len() == dim), "every point needs {dim} coordinates");
        PointConfiguration { dim, points }
    }

    /// Parses `dim <d>` followed by `v<i> <c1> ... <cd>` lines; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self, CoordError> {
        let mut dim = None;
        let mut rows: Vec<Option<Vec<i64>>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let bad = |msg: &str| CoordError::Malformed { line, msg: msg.to_string() };
            let mut tok = l.split_whitespace();
            let head = tok.next().unwrap_or("");
            if head == "dim" {
                let d = tok.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| bad("bad dimension"))?;
                if d == 0 || tok.next().is_some() {
                    return Err(bad("bad dimension"));
                }
                dim = Some(d);
                continue;
            }
            let d = dim.ok_or(CoordError::MissingDim)?;
            let v = head
                .strip_prefix('v')
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| bad("expected `v<index>`"))?;
            let coords: Result<Vec<i64>, _> = tok.map(str::parse::<i64>).collect();
            let coords = coords.map_err(|_| bad("coordinates must be integers"))?;
            if coords.len() != d {
                return Err(bad(&format!("expected {d} coordinates, got {}", coords.len())));
            }
            if rows.len() <= v {
                rows.resize(v + 1, None);
            }
            if rows[v].is_some() {
                return Err(bad(&format!("v{v} given twice")));
            }
            rows[v] = Some(coords);
        }
        let dim = dim.ok_or(CoordError::MissingDim)?;
        let points = rows
            .into_iter()
            .enumerate()
            .map(|(v, r)| r.ok_or(CoordError::MissingVertex { vertex: v }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PointConfiguration { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, v: usize) -> &[i64] {
        &self.points[v]
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// Multiplies every coordinate by `k`.
    pub fn scaled(&self, k: i64) -> Self {
        let points = self.points.iter().map(|p| p.iter().map(|c| c * k).collect()).collect();
        PointConfiguration { dim: self.dim, points }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PointConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        for (v, p) in self.points.iter().enumerate() {
            let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            writeln!(f, "v{v} {}", cs.join(" "))?;
        }
        Ok(())
    }
}

/// How points become chirotope vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogenization {
    /// Append a coordinate 1; rank is `dim + 1`.
    Affine,
    /// Use coordinates as they are; rank is `dim`.
    Linear,
}

impl PointConfiguration {
    /// The vector of point `v` under `h`.
    pub fn vector(&self, v: usize, h: Homogenization) -> Vec<i64> {
        let mut x = self.points[v].clone();
        if h == Homogenization::Affine {
            x.push(1);
        }
        x
    }

    /// Sign of the determinant of the vectors of `tuple`, in order.
    pub fn orientation(&self, tuple: &[usize], h: Homogenization) -> Sign {
        let rows: Vec<Vec<i64>> = tuple.iter().map(|&v| self.vector(v, h)).collect();
        Sign::of(determinant_sign(&rows))
    }
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn determinant(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn determinant_sign(rows: &[Vec<i64>]) -> i64 {
    determinant(rows).signum() as i64
}

/// The chirotope of the configuration, every basis determined.
pub fn chirotope_from_points(pc: &PointConfiguration, h: Homogenization) -> PartialChirotope {
    let rank = match h {
        Homogenization::Affine => pc.dim() + 1,
        Homogenization::Linear => pc.dim(),
    };
    assert!(rank <= pc.len(), "need at least {rank} points");
    let mut chi = PartialChirotope::new(pc.len(), rank);
    for b in subsets(pc.len(), rank) {
        let i = chi.index_of(&b);
        chi.set_index(i, pc.orientation(&b, h)).expect("fresh chirotope");
    }
    chi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use proptest::prelude::*;

    #[test]
    fn unit_simplex_is_positive() {
        let pts = PointConfiguration::new(
            4,
            vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![0, 0, 0, 0]],
        );
        let chi = chirotope_from_points(&pts, Homogenization::Affine);
        // det of the identity with a column of ones appended and the origin
        // last.
        assert_eq!(chi.get(&[0, 1, 2, 3, 4]), Some(Sign::of(determinant(&[
            vec![1, 0, 0, 0, 1],
            vec![0, 1, 0, 0, 1],
            vec![0, 0, 1, 0, 1],
            vec![0, 0, 0, 1, 1],
            vec![0, 0, 0, 0, 1],
        ]) as i64)));
        assert_eq!(chi.get(&[0, 1, 2, 3, 4]), Some(Sign::Pos));
    }

    #[test]
    fn diagram_coordinates_are_in_general_position() {
        let chi = chirotope_from_points(&data::w12_40_diagram_f2(), Homogenization::Affine);
        assert!(chi.is_complete());
        assert!(chi.signs().iter().all(|s| *s != Some(Sign::Zero)));
        assert_eq!(chi.get(&[7, 8, 10, 2]), chi.get(&[8, 7, 10, 2]).map(|s| -s));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(PointConfiguration::parse("v0 1 2 3\n"), Err(CoordError::MissingDim));
        assert_eq!(PointConfiguration::parse("dim 2\nv1 1 2\n"), Err(CoordError::MissingVertex { vertex: 0 }));
        assert!(matches!(PointConfiguration::parse("dim 2\nv0 1 2\nv0 3 4\n"), Err(CoordError::Malformed { line: 3, .. })));
        assert!(matches!(PointConfiguration::parse("dim 2\nv0 1.5 2\n"), Err(CoordError::Malformed { .. })));
        let p = data::w12_40_fan();
        assert_eq!(PointConfiguration::parse(&p.to_text()).unwrap(), p);
    }

    fn naive_det(m: &[Vec<i64>]) -> i128 {
        if m.len() == 1 {
            return m[0][0] as i128;
        }
        (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &x)| x).collect()).collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * m[0][c] as i128 * naive_det(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(m in proptest::collection::vec(proptest::collection::vec(-50i64..50, 5), 5)) {
            prop_assert_eq!(determinant(&m), naive_det(&m));
        }
    }
}
