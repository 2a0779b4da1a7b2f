//! Partial chirotopes of rank 4 and 5 and the propagation machinery built on
//! them.
//!
//! Signs are stored per basis (an ascending subset of `rank` elements) at
//! the basis' colexicographic rank. Queries on ordered tuples are
//! canonicalized by sorting and multiplying with the permutation sign.

mod bfp;
mod engine;
mod search;

use std::fmt;
use std::ops::{Mul, Neg};

pub use bfp::{bfp_search, bfp_verify, inequalities, witness_holds, BfpCertificate, BfpError, BfpOutcome, BfpVerifyError, Inequality};
pub use engine::{
    apply_p2, default_seed, diagram_partial_chirotope, diagram_search_root, from_sphere_rank5, gp_propagate, prove_nonpolytopal, seed_justification,
    CertificateError, Conflict, Engine, ProofCertificate, ProofMode, Rule, SeedJustification, Step, Verdict,
};
pub use search::{complete_search, random_descent, SearchConfig, SearchOutcome, SearchState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(v: i64) -> Sign {
        match v.signum() {
            -1 => Sign::Neg,
            0 => Sign::Zero,
            _ => Sign::Pos,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Neg),
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Pos),
            _ => None,
        }
    }

    /// Parses `+`, `-`, `0`, `+1`, `-1`.
    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" | "+1" | "1" => Some(Sign::Pos),
            "-" | "-1" => Some(Sign::Neg),
            "0" => Some(Sign::Zero),
            _ => None,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::of((self.to_i8() * rhs.to_i8()) as i64)
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::of(-self.to_i8() as i64)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Sorts `tuple` and returns the sign of the sorting permutation, or `None`
/// if an element repeats.
pub fn sort_with_parity(tuple: &[usize]) -> Option<(Vec<usize>, Sign)> {
    let mut v = tuple.to_vec();
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, if odd { Sign::Neg } else { Sign::Pos }))
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ChirotopeError {
    #[error("tuple {tuple:?} has a repeated element")]
    Repeated { tuple: Vec<usize> },
    #[error("tuple {tuple:?} does not have {rank} elements below {n}")]
    BadTuple { tuple: Vec<usize>, rank: usize, n: usize },
    #[error("basis {basis:?} is already {old}, cannot set {new}")]
    Conflict { basis: Vec<usize>, old: Sign, new: Sign },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Map from bases to `{-, 0, +, unknown}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialChirotope {
    n: usize,
    rank: usize,
    signs: Vec<Option<Sign>>,
}

impl PartialChirotope {
    pub fn new(n: usize, rank: usize) -> Self {
        assert!(rank >= 1 && rank <= n && n <= 64, "need 1 <= rank <= n <= 64");
        let count = binom(n, rank);
        PartialChirotope { n, rank, signs: vec![None; count] }
    }

    pub fn n_elements(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_bases(&self) -> usize {
        self.signs.len()
    }

    /// Colexicographic rank of an ascending basis.
    pub fn index_of(&self, sorted: &[usize]) -> usize {
        debug_assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        sorted.iter().enumerate().map(|(i, &b)| binom(b, i + 1)).sum()
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn basis(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.rank];
        let mut top = self.n;
        for k in (1..=self.rank).rev() {
            let mut c = k - 1;
            while c + 1 < top && binom(c + 1, k) <= idx {
                c += 1;
            }
            out[k - 1] = c;
            idx -= binom(c, k);
            top = c;
        }
        out
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<(), ChirotopeError> {
        if tuple.len() != self.rank || tuple.iter().any(|&v| v >= self.n) {
            return Err(ChirotopeError::BadTuple { tuple: tuple.to_vec(), rank: self.rank, n: self.n });
        }
        Ok(())
    }

    /// Basis index and permutation sign of an ordered tuple; `None` on
    /// repeated elements.
    pub fn locate(&self, tuple: &[usize]) -> Option<(usize, Sign)> {
        let (sorted, parity) = sort_with_parity(tuple)?;
        Some((self.index_of(&sorted), parity))
    }

    /// Sign of an ordered tuple. Tuples with repeated elements are `0`.
    ///
    /// # Panics
    /// If the tuple has the wrong length or an element out of range.
    pub fn get(&self, tuple: &[usize]) -> Option<Sign> {
        self.check_tuple(tuple).expect("valid tuple");
        match self.locate(tuple) {
            None => Some(Sign::Zero),
            Some((i, p)) => self.signs[i].map(|s| s * p),
        }
    }

    pub fn get_index(&self, idx: usize) -> Option<Sign> {
        self.signs[idx]
    }

    /// Sets the sign of an ordered tuple. Returns whether it was unknown.
    pub fn set(&mut self, tuple: &[usize], sign: Sign) -> Result<bool, ChirotopeError> {
        self.check_tuple(tuple)?;
        let (i, p) = self
            .locate(tuple)
            .ok_or_else(|| ChirotopeError::Repeated { tuple: tuple.to_vec() })?;
        self.set_index(i, sign * p)
    }

    pub fn set_index(&mut self, idx: usize, sign: Sign) -> Result<bool, ChirotopeError> {
        match self.signs[idx] {
            None => {
                self.signs[idx] = Some(sign);
                Ok(true)
            }
            Some(old) if old == sign => Ok(false),
            Some(old) => Err(ChirotopeError::Conflict { basis: self.basis(idx), old, new: sign }),
        }
    }

    pub(crate) fn set_unchecked(&mut self, idx: usize, sign: Option<Sign>) {
        self.signs[idx] = sign;
    }

    pub fn determined(&self) -> usize {
        self.signs.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.signs.iter().all(|s| s.is_some())
    }

    pub fn signs(&self) -> &[Option<Sign>] {
        &self.signs
    }

    /// Every determined sign flipped.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for s in out.signs.iter_mut() {
            *s = s.map(|x| -x);
        }
        out
    }

    /// Whether every sign determined here is determined equally in `other`.
    pub fn is_restriction_of(&self, other: &PartialChirotope) -> bool {
        self.n == other.n
            && self.rank == other.rank
            && self.signs.iter().zip(&other.signs).all(|(a, b)| a.is_none() || a == b)
    }

    /// Text form: header, then the signs in colexicographic basis order as
    /// `+ - 0 ?`, wrapped at 60 characters.
    pub fn to_text(&self) -> String {
        let mut out = format!("# polysphere chirotope v1\nn {}\nrank {}\n", self.n, self.rank);
        let chars: Vec<char> = self.signs.iter().map(|s| s.map_or('?', Sign::as_char)).collect();
        for chunk in chars.chunks(60) {
            out.extend(chunk);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ChirotopeError> {
        let bad = |line: usize, msg: &str| ChirotopeError::Malformed { line, msg: msg.to_string() };
        let mut n = None;
        let mut rank = None;
        let mut body = String::new();
        let mut last = 0;
        for (i, l) in text.lines().enumerate() {
            let line = i + 1;
            last = line;
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(v) = l.strip_prefix("n ") {
                n = Some(v.trim().parse::<usize>().map_err(|_| bad(line, "bad n"))?);
            } else if let Some(v) = l.strip_prefix("rank ") {
                rank = Some(v.trim().parse::<usize>().map_err(|_| bad(line, "bad rank"))?);
            } else if l.chars().all(|c| "+-0?".contains(c)) {
                body.push_str(l);
            } else {
                return Err(bad(line, "expected sign characters"));
            }
        }
        let (Some(n), Some(rank)) = (n, rank) else {
            return Err(bad(last, "missing `n` or `rank`"));
        };
        if rank == 0 || rank > n || n > 64 {
            return Err(bad(last, "need 1 <= rank <= n <= 64"));
        }
        let mut pc = PartialChirotope::new(n, rank);
        if body.chars().count() != pc.n_bases() {
            return Err(bad(last, &format!("expected {} signs, got {}", pc.n_bases(), body.chars().count())));
        }
        for (i, c) in body.chars().enumerate() {
            pc.signs[i] = Sign::from_char(c);
        }
        Ok(pc)
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A three-term Grassmann-Plücker relation: the products
/// `[λab][λcd]`, `-[λac][λbd]`, `[λad][λbc]` must either all vanish or
/// include both signs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GpRelation {
    pub lambda: Vec<usize>,
    pub quad: [usize; 4],
}

/// Outcome of checking one relation against the determined signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpStatus {
    Satisfied,
    Violated,
    Undetermined,
}

impl GpRelation {
    /// The six factor tuples, paired by term.
    pub fn factors(&self) -> [Vec<usize>; 6] {
        let [a, b, c, d] = self.quad;
        let t = |x: usize, y: usize| {
            let mut v = self.lambda.clone();
            v.push(x);
            v.push(y);
            v
        };
        [t(a, b), t(c, d), t(a, c), t(b, d), t(a, d), t(b, c)]
    }

    /// Term values, `None` where undetermined. A term with a known zero
    /// factor is zero.
    pub fn terms(&self, pc: &PartialChirotope) -> [Option<Sign>; 3] {
        let f = self.factors();
        let vals: Vec<Option<Sign>> = f.iter().map(|t| pc.get(t)).collect();
        term_values(&[vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]])
    }

    pub fn status(&self, pc: &PartialChirotope) -> GpStatus {
        match self.terms(pc) {
            [Some(a), Some(b), Some(c)] => {
                if gp_holds(a, b, c) {
                    GpStatus::Satisfied
                } else {
                    GpStatus::Violated
                }
            }
            _ => GpStatus::Undetermined,
        }
    }
}

pub(crate) const TERM_SIGN: [Sign; 3] = [Sign::Pos, Sign::Neg, Sign::Pos];

pub(crate) fn term_values(f: &[Option<Sign>; 6]) -> [Option<Sign>; 3] {
    let mut out = [None; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let (x, y) = (f[2 * k], f[2 * k + 1]);
        *o = match (x, y) {
            (Some(Sign::Zero), _) | (_, Some(Sign::Zero)) => Some(Sign::Zero),
            (Some(x), Some(y)) => Some(TERM_SIGN[k] * x * y),
            _ => None,
        };
    }
    out
}

/// `{a, b, c}` equals `{0}` or contains both signs.
pub fn gp_holds(a: Sign, b: Sign, c: Sign) -> bool {
    let s = [a, b, c];
    s.iter().all(|&x| x == Sign::Zero) || (s.contains(&Sign::Pos) && s.contains(&Sign::Neg))
}

/// The value the third term must take given two others, if determined.
pub(crate) fn forced_third(a: Sign, b: Sign) -> Option<Sign> {
    match (a, b) {
        (Sign::Zero, Sign::Zero) => Some(Sign::Zero),
        (Sign::Zero, s) | (s, Sign::Zero) => Some(-s),
        (x, y) if x == y => Some(-x),
        _ => None,
    }
}

/// One relation per `(lambda, quad)` pair of disjoint ascending subsets.
pub fn gp_relations(n: usize, rank: usize) -> Vec<GpRelation> {
    let mut out = Vec::new();
    for lambda in subsets(n, rank - 2) {
        let rest: Vec<usize> = (0..n).filter(|v| !lambda.contains(v)).collect();
        for q in subsets(rest.len(), 4) {
            out.push(GpRelation { lambda: lambda.clone(), quad: [rest[q[0]], rest[q[1]], rest[q[2]], rest[q[3]]] });
        }
    }
    out
}
