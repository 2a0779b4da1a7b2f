//! Biquadratic final polynomials.
//!
//! In a realization every uniform three-term relation reads
//! `t1 + t2 + t3 = 0` with `|ti|` a product of two brackets, so the term
//! whose sign differs from the other two strictly dominates each of them in
//! absolute value. Taking logarithms gives strict linear inequalities over
//! bracket magnitudes. A nonnegative, nonzero combination summing to zero
//! (as a formal multiset of brackets) shows that no realization exists.
//! By Gordan's alternative, either such a combination exists or the
//! inequalities have a common solution, which is returned as a witness.
//! Floating point linear programming only proposes; every answer is
//! checked in exact arithmetic before it is returned.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{gp_relations, term_values, GpRelation, PartialChirotope, Sign};
use crate::lp;

/// `|term big| > |term small|` for one relation, terms numbered 0..3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub lambda: Vec<usize>,
    pub quad: [usize; 4],
    pub big: usize,
    pub small: usize,
    /// Ascending bases of the dominating product.
    pub lhs: [Vec<usize>; 2],
    pub rhs: [Vec<usize>; 2],
}

fn term_bases(rel: &GpRelation, k: usize) -> [Vec<usize>; 2] {
    let f = rel.factors();
    let mut a = f[2 * k].clone();
    let mut b = f[2 * k + 1].clone();
    a.sort_unstable();
    b.sort_unstable();
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    [a, b]
}

impl Inequality {
    pub fn new(rel: &GpRelation, big: usize, small: usize) -> Self {
        Inequality {
            lambda: rel.lambda.clone(),
            quad: rel.quad,
            big,
            small,
            lhs: term_bases(rel, big),
            rhs: term_bases(rel, small),
        }
    }

    fn relation(&self) -> GpRelation {
        GpRelation { lambda: self.lambda.clone(), quad: self.quad }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfpCertificate {
    pub n: usize,
    pub rank: usize,
    /// Inequalities with positive multipliers.
    pub inequalities: Vec<(Inequality, BigRational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BfpOutcome {
    Found(BfpCertificate),
    /// No final polynomial: integer log-magnitudes per basis (ascending)
    /// satisfying every strict inequality.
    None { witness: Vec<(Vec<usize>, i64)> },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BfpError {
    #[error("linear programming solver failed: {0}")]
    Solver(String),
    #[error("floating point solution could not be made exact")]
    Numerical,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BfpVerifyError {
    #[error("certificate has no inequalities")]
    Empty,
    #[error("certificate is for n={n}, rank {rank}")]
    Shape { n: usize, rank: usize },
    #[error("inequality {index}: multiplier is not positive")]
    NonPositive { index: usize },
    #[error("inequality {index}: {reason}")]
    Provenance { index: usize, reason: String },
    #[error("basis {basis:?} does not cancel")]
    Unbalanced { basis: Vec<usize> },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// All strict inequalities the determined signs of `pc` imply.
pub fn inequalities(pc: &PartialChirotope) -> Vec<Inequality> {
    let mut out = Vec::new();
    for rel in gp_relations(pc.n_elements(), pc.rank()) {
        let f = rel.factors();
        let vals: [Option<Sign>; 6] = std::array::from_fn(|k| pc.get(&f[k]));
        let terms = term_values(&vals);
        let Some(t) = terms.iter().copied().collect::<Option<Vec<Sign>>>() else { continue };
        if t.contains(&Sign::Zero) {
            continue;
        }
        // Exactly one term of each relation that holds has the odd sign.
        let pos = t.iter().filter(|&&s| s == Sign::Pos).count();
        let odd = match pos {
            1 => t.iter().position(|&s| s == Sign::Pos).unwrap(),
            2 => t.iter().position(|&s| s == Sign::Neg).unwrap(),
            _ => continue,
        };
        for small in (0..3).filter(|&k| k != odd) {
            out.push(Inequality::new(&rel, odd, small));
        }
    }
    out
}

/// Maps bases to dense row indices.
fn index_bases(ineqs: &[Inequality]) -> BTreeMap<Vec<usize>, usize> {
    let mut rows = BTreeMap::new();
    for q in ineqs {
        for b in q.lhs.iter().chain(&q.rhs) {
            let k = rows.len();
            rows.entry(b.clone()).or_insert(k);
        }
    }
    rows
}

fn column(q: &Inequality, rows: &BTreeMap<Vec<usize>, usize>) -> Vec<(usize, i64)> {
    let mut c = BTreeMap::new();
    for b in &q.lhs {
        *c.entry(rows[b]).or_insert(0) += 1;
    }
    for b in &q.rhs {
        *c.entry(rows[b]).or_insert(0) -= 1;
    }
    c.into_iter().filter(|&(_, v)| v != 0).collect()
}

const SUPPORT_EPS: f64 = 1e-9;
const MARGIN_EPS: f64 = 1e-9;
const TIGHT_EPS: f64 = 1e-7;
/// Inequalities in the first primal round, and added per round.
const BATCH: usize = 1500;

/// Maximizes the common margin `t <= 1` of the active inequalities over
/// the box `[-1, 1]`.
fn max_margin(columns: &[Vec<(usize, i64)>], n_vars: usize, active: &[usize]) -> Result<(f64, Vec<f64>), BfpError> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..n_vars).map(|_| p.add_var(0.0, (-1.0, 1.0))).collect();
    let t = p.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for &k in active {
        let mut e: Vec<(minilp::Variable, f64)> = columns[k].iter().map(|&(r, v)| (xs[r], v as f64)).collect();
        e.push((t, -1.0));
        p.add_constraint(e.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = p.solve().map_err(|e| BfpError::Solver(e.to_string()))?;
    Ok((sol.objective(), xs.iter().map(|&v| *sol.var_value(v)).collect()))
}

fn value(c: &[(usize, i64)], x: &[f64]) -> f64 {
    c.iter().map(|&(r, v)| v as f64 * x[r]).sum()
}

/// Searches for a biquadratic final polynomial of `pc`.
///
/// Cutting planes on the primal: maximize the margin over a growing subset
/// of the inequalities. A zero margin means the subset already admits a
/// final polynomial, read off the dual restricted to the tight inequalities
/// and made exact by elimination on its support. A positive margin that
/// every inequality respects is rounded to an integer witness and checked
/// exactly.
pub fn bfp_search(pc: &PartialChirotope) -> Result<BfpOutcome, BfpError> {
    let ineqs = inequalities(pc);
    let rows = index_bases(&ineqs);
    let columns: Vec<Vec<(usize, i64)>> = ineqs.iter().map(|q| column(q, &rows)).collect();
    if ineqs.is_empty() {
        return Ok(BfpOutcome::None { witness: Vec::new() });
    }
    let stride = columns.len().div_ceil(BATCH);
    let mut active: Vec<usize> = (0..columns.len()).step_by(stride).collect();
    let mut in_active = vec![false; columns.len()];
    for &k in &active {
        in_active[k] = true;
    }
    loop {
        let (t, x) = max_margin(&columns, rows.len(), &active)?;
        if t <= MARGIN_EPS {
            let tight: Vec<usize> = active.iter().copied().filter(|&k| value(&columns[k], &x) - t < TIGHT_EPS).collect();
            let cert = match dual_certificate(pc, &ineqs, &columns, rows.len(), &tight) {
                Ok(c) => c,
                Err(_) => dual_certificate(pc, &ineqs, &columns, rows.len(), &active)?,
            };
            return Ok(BfpOutcome::Found(cert));
        }
        let mut violated: Vec<(f64, usize)> = (0..columns.len())
            .filter(|&k| !in_active[k])
            .map(|k| (value(&columns[k], &x), k))
            .filter(|&(v, _)| v < t / 2.0)
            .collect();
        if violated.is_empty() {
            let scale = (8.0 / t).max(1e3);
            let xi: Vec<i64> = x.iter().map(|v| (v * scale).round() as i64).collect();
            let failing: Vec<usize> = (0..columns.len())
                .filter(|&k| columns[k].iter().map(|&(r, v)| v * xi[r]).sum::<i64>() <= 0)
                .collect();
            if failing.is_empty() {
                let witness = rows.into_iter().map(|(b, r)| (b, xi[r])).collect();
                return Ok(BfpOutcome::None { witness });
            }
            violated = failing.into_iter().filter(|&k| !in_active[k]).map(|k| (0.0, k)).collect();
            if violated.is_empty() {
                return Err(BfpError::Numerical);
            }
        }
        violated.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, k) in violated.iter().take(BATCH) {
            in_active[k] = true;
            active.push(k);
        }
    }
}

/// Finds multipliers on `candidates` by the floating point dual, then
/// solves exactly on its support.
fn dual_certificate(
    pc: &PartialChirotope,
    ineqs: &[Inequality],
    columns: &[Vec<(usize, i64)>],
    n_rows: usize,
    candidates: &[usize],
) -> Result<BfpCertificate, BfpError> {
    let mut dual = Problem::new(OptimizationDirection::Minimize);
    let ys: Vec<_> = candidates.iter().map(|_| dual.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let mut by_row: Vec<Vec<(minilp::Variable, f64)>> = vec![Vec::new(); n_rows];
    for (&k, &y) in candidates.iter().zip(&ys) {
        for &(r, v) in &columns[k] {
            by_row[r].push((y, v as f64));
        }
    }
    for terms in by_row.iter().filter(|t| !t.is_empty()) {
        dual.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let all: Vec<(minilp::Variable, f64)> = ys.iter().map(|&y| (y, 1.0)).collect();
    dual.add_constraint(all.as_slice(), ComparisonOp::Eq, 1.0);
    let sol = dual.solve().map_err(|e| match e {
        minilp::Error::Infeasible => BfpError::Numerical,
        e => BfpError::Solver(e.to_string()),
    })?;
    let support: Vec<usize> =
        candidates.iter().zip(&ys).filter(|&(_, &y)| *sol.var_value(y) > SUPPORT_EPS).map(|(&k, _)| k).collect();
    exact_certificate(pc, ineqs, columns, n_rows, &support)
}

fn exact_certificate(
    pc: &PartialChirotope,
    ineqs: &[Inequality],
    columns: &[Vec<(usize, i64)>],
    n_rows: usize,
    support: &[usize],
) -> Result<BfpCertificate, BfpError> {
    let mut cols: Vec<lp::Column> = support.iter().map(|&k| columns[k].clone()).collect();
    for c in &mut cols {
        c.push((n_rows, 1));
    }
    let mut b = vec![0; n_rows + 1];
    b[n_rows] = 1;
    let y = match lp::linear_solution(n_rows + 1, &cols, &b) {
        Some(y) if y.iter().all(|v| !v.is_negative()) => y,
        _ => lp::nonnegative_solution(n_rows + 1, &cols, &b).ok_or(BfpError::Numerical)?,
    };
    // Scale to coprime integers.
    let lcm = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = y.iter().map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let inequalities = support
        .iter()
        .zip(ints)
        .filter(|(_, m)| m.is_positive())
        .map(|(&k, m)| (ineqs[k].clone(), BigRational::from_integer(m / &gcd)))
        .collect();
    let cert = BfpCertificate { n: pc.n_elements(), rank: pc.rank(), inequalities };
    bfp_verify(pc, &cert).map_err(|_| BfpError::Numerical)?;
    Ok(cert)
}

/// Replays a certificate against `pc` without any solver.
pub fn bfp_verify(pc: &PartialChirotope, cert: &BfpCertificate) -> Result<(), BfpVerifyError> {
    if (cert.n, cert.rank) != (pc.n_elements(), pc.rank()) {
        return Err(BfpVerifyError::Shape { n: cert.n, rank: cert.rank });
    }
    if cert.inequalities.is_empty() {
        return Err(BfpVerifyError::Empty);
    }
    let mut balance: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for (index, (q, mult)) in cert.inequalities.iter().enumerate() {
        if !mult.is_positive() {
            return Err(BfpVerifyError::NonPositive { index });
        }
        let bad = |reason: &str| BfpVerifyError::Provenance { index, reason: reason.to_string() };
        let mut elems: Vec<usize> = q.lambda.iter().chain(&q.quad).copied().collect();
        elems.sort_unstable();
        elems.dedup();
        if q.lambda.len() + 2 != pc.rank() || elems.len() != pc.rank() + 2 || elems.iter().any(|&e| e >= pc.n_elements()) {
            return Err(bad("lambda and quad do not form a relation"));
        }
        if q.big > 2 || q.small > 2 || q.big == q.small {
            return Err(bad("term indices must be distinct and below 3"));
        }
        let rel = q.relation();
        if term_bases(&rel, q.big) != q.lhs || term_bases(&rel, q.small) != q.rhs {
            return Err(bad("monomials do not match the relation's terms"));
        }
        let f = rel.factors();
        let vals: [Option<Sign>; 6] = std::array::from_fn(|k| pc.get(&f[k]));
        let terms = term_values(&vals);
        let Some(t) = terms.iter().copied().collect::<Option<Vec<Sign>>>() else {
            return Err(bad("relation has undetermined factors"));
        };
        let s = t[q.big];
        if s == Sign::Zero || (0..3).any(|k| k != q.big && t[k] != -s) {
            return Err(bad("dominating term does not have the odd sign"));
        }
        for b in &q.lhs {
            *balance.entry(b.clone()).or_insert_with(BigRational::zero) += mult;
        }
        for b in &q.rhs {
            *balance.entry(b.clone()).or_insert_with(BigRational::zero) -= mult;
        }
    }
    match balance.into_iter().find(|(_, v)| !v.is_zero()) {
        Some((basis, _)) => Err(BfpVerifyError::Unbalanced { basis }),
        None => Ok(()),
    }
}

/// Checks that a witness satisfies every inequality of `pc` strictly.
pub fn witness_holds(pc: &PartialChirotope, witness: &[(Vec<usize>, i64)]) -> bool {
    let x: BTreeMap<&Vec<usize>, i64> = witness.iter().map(|(b, v)| (b, *v)).collect();
    inequalities(pc).iter().all(|q| {
        let get = |b: &Vec<usize>| x.get(b).copied();
        match (get(&q.lhs[0]), get(&q.lhs[1]), get(&q.rhs[0]), get(&q.rhs[1])) {
            (Some(a), Some(b), Some(c), Some(d)) => a + b > c + d,
            _ => false,
        }
    })
}

const HEADER: &str = "# polysphere bfp v1";

fn tuple(v: &[usize]) -> String {
    let p: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", p.join(","))
}

fn rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl BfpCertificate {
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nn {}\nrank {}\n", self.n, self.rank);
        for (q, m) in &self.inequalities {
            let _ = writeln!(
                out,
                "ineq lambda={} quad={} big={} small={} lhs={}*{} rhs={}*{} mult={}",
                tuple(&q.lambda),
                tuple(&q.quad),
                q.big + 1,
                q.small + 1,
                tuple(&q.lhs[0]),
                tuple(&q.lhs[1]),
                tuple(&q.rhs[0]),
                tuple(&q.rhs[1]),
                rational(m)
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, BfpVerifyError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(BfpVerifyError::Malformed { line: 1, msg: format!("expected `{HEADER}`") }),
        }
        let (mut n, mut rank) = (None, None);
        let mut inequalities = Vec::new();
        for (line, l) in lines {
            let bad = || BfpVerifyError::Malformed { line, msg: "malformed line".to_string() };
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(v) = l.strip_prefix("n ") {
                n = Some(v.parse().map_err(|_| bad())?);
            } else if let Some(v) = l.strip_prefix("rank ") {
                rank = Some(v.parse().map_err(|_| bad())?);
            } else if let Some(rest) = l.strip_prefix("ineq ") {
                inequalities.push(parse_ineq(rest).ok_or_else(bad)?);
            } else {
                return Err(bad());
            }
        }
        let missing = |what: &str| BfpVerifyError::Malformed { line: 0, msg: format!("missing {what}") };
        Ok(BfpCertificate { n: n.ok_or_else(|| missing("n"))?, rank: rank.ok_or_else(|| missing("rank"))?, inequalities })
    }
}

fn parse_tuple(s: &str) -> Option<Vec<usize>> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_pair(s: &str) -> Option<[Vec<usize>; 2]> {
    let (a, b) = s.split_once(")*(")?;
    Some([parse_tuple(&format!("{a})"))?, parse_tuple(&format!("({b}"))?])
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn parse_ineq(s: &str) -> Option<(Inequality, BigRational)> {
    let mut fields = BTreeMap::new();
    for f in s.split_whitespace() {
        let (k, v) = f.split_once('=')?;
        fields.insert(k, v);
    }
    let term = |k: &str| -> Option<usize> { fields.get(k)?.parse::<usize>().ok()?.checked_sub(1) };
    let q = Inequality {
        lambda: parse_tuple(fields.get("lambda")?)?,
        quad: parse_tuple(fields.get("quad")?)?.try_into().ok()?,
        big: term("big")?,
        small: term("small")?,
        lhs: parse_pair(fields.get("lhs")?)?,
        rhs: parse_pair(fields.get("rhs")?)?,
    };
    Some((q, parse_rational(fields.get("mult")?)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn determinant_chirotope(points: &[[i64; 3]]) -> PartialChirotope {
        let n = points.len();
        let mut pc = PartialChirotope::new(n, 4);
        for b in super::super::subsets(n, 4) {
            let m: Vec<[i64; 4]> = b.iter().map(|&i| [points[i][0], points[i][1], points[i][2], 1]).collect();
            let d = det4(&m);
            pc.set(&b, Sign::of(d)).unwrap();
        }
        pc
    }

    fn det4(m: &[[i64; 4]]) -> i64 {
        // Cofactor expansion is enough for this oracle.
        fn det3(a: [[i64; 3]; 3]) -> i64 {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        (0..4)
            .map(|c| {
                let minor: [[i64; 3]; 3] = std::array::from_fn(|r| {
                    let cols: Vec<usize> = (0..4).filter(|&k| k != c).collect();
                    std::array::from_fn(|k| m[r + 1][cols[k]])
                });
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * m[0][c] * det3(minor)
            })
            .sum()
    }

    fn sample_points() -> Vec<[i64; 3]> {
        vec![[0, 0, 0], [7, 1, 2], [2, 9, 1], [1, 3, 8], [5, 5, 5], [9, 7, 3], [3, 8, 6]]
    }

    #[test]
    fn realizable_chirotope_has_no_bfp() {
        let pc = determinant_chirotope(&sample_points());
        assert!(pc.signs().iter().all(|s| *s != Some(Sign::Zero)));
        match bfp_search(&pc).unwrap() {
            BfpOutcome::None { witness } => assert!(witness_holds(&pc, &witness)),
            BfpOutcome::Found(c) => panic!("realizable chirotope refuted: {}", c.to_text()),
        }
    }

    #[test]
    fn empty_certificate_is_rejected() {
        let pc = determinant_chirotope(&sample_points());
        let cert = BfpCertificate { n: 7, rank: 4, inequalities: Vec::new() };
        assert_eq!(bfp_verify(&pc, &cert), Err(BfpVerifyError::Empty));
    }

    #[test]
    fn inequalities_are_true_for_realizations() {
        let pts = sample_points();
        let pc = determinant_chirotope(&pts);
        let det = |b: &[usize]| {
            let m: Vec<[i64; 4]> = b.iter().map(|&i| [pts[i][0], pts[i][1], pts[i][2], 1]).collect();
            det4(&m).abs()
        };
        let qs = inequalities(&pc);
        assert!(!qs.is_empty());
        for q in qs {
            assert!(det(&q.lhs[0]) * det(&q.lhs[1]) > det(&q.rhs[0]) * det(&q.rhs[1]), "{q:?}");
        }
    }

    #[test]
    fn certificate_text_round_trip() {
        let rel = GpRelation { lambda: vec![0, 1], quad: [2, 3, 4, 5] };
        let cert = BfpCertificate {
            n: 6,
            rank: 4,
            inequalities: vec![
                (Inequality::new(&rel, 0, 1), BigRational::new(3.into(), 2.into())),
                (Inequality::new(&rel, 0, 2), BigRational::from_integer(2.into())),
            ],
        };
        assert_eq!(BfpCertificate::parse(&cert.to_text()).unwrap(), cert);
    }
}
