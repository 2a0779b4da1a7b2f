//! Independent checker for proof certificates.
//!
//! Every step is rechecked from the conclusions of the steps it cites,
//! using only the facet list. Sign bookkeeping and the Grassmann-Plücker
//! sign rules are implemented here from scratch rather than borrowed from
//! the propagation engine.

use std::collections::HashMap;

use crate::chirotope::{Conflict, PartialChirotope, ProofCertificate, ProofMode, Rule, Sign, Step, Verdict};
use crate::complex::FacetList;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: String },
    #[error("verdict: {0}")]
    Verdict(String),
    #[error("{0}")]
    Setup(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplaySummary {
    pub steps: usize,
    pub determined: usize,
    pub seed_justified: bool,
}

fn val(s: Sign) -> i8 {
    s.to_i8()
}

/// Parity of the permutation sorting `t` by counting inversions; `None`
/// on repeated entries.
fn parity(t: &[usize]) -> Option<i8> {
    let mut inv = 0;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if t[i] == t[j] {
                return None;
            }
            if t[i] > t[j] {
                inv += 1;
            }
        }
    }
    Some(if inv % 2 == 0 { 1 } else { -1 })
}

fn sorted(t: &[usize]) -> Vec<usize> {
    let mut s = t.to_vec();
    s.sort_unstable();
    s
}

fn contains(facet: u64, v: usize) -> bool {
    facet & (1u64 << v) != 0
}

fn mask(t: &[usize]) -> u64 {
    t.iter().fold(0, |m, &v| m | (1u64 << v))
}

struct Replayer<'a> {
    cert: &'a ProofCertificate,
    fl: Option<&'a FacetList>,
    given: Option<&'a PartialChirotope>,
    rank: usize,
}

impl Replayer<'_> {
    fn facets(&self) -> Result<&[u64], String> {
        self.fl.map(|f| f.facets()).ok_or_else(|| "rule needs the facet list".to_string())
    }

    /// Value of an ordered tuple from one step's conclusion, if the tuple
    /// is a reordering of its basis.
    fn ordered_value(step: &Step, tuple: &[usize]) -> Option<i8> {
        (sorted(tuple) == step.basis).then(|| parity(tuple).map(|p| p * val(step.sign))).flatten()
    }

    fn premise<'s>(&self, steps: &'s [Step], k: usize, id: usize) -> Result<&'s Step, String> {
        if id == 0 || id >= k {
            return Err(format!("premise {id} is not an earlier step"));
        }
        Ok(&steps[id - 1])
    }

    fn single_premise<'s>(&self, steps: &'s [Step], k: usize, s: &Step) -> Result<&'s Step, String> {
        match s.premises[..] {
            [id] => self.premise(steps, k, id),
            _ => Err("rule takes exactly one premise".to_string()),
        }
    }

    fn check_step(&self, steps: &[Step], k: usize) -> Result<(), String> {
        let s = &steps[k - 1];
        let n = self.cert.n;
        if s.basis.len() != self.rank || s.basis.windows(2).any(|w| w[0] >= w[1]) || s.basis.iter().any(|&v| v >= n) {
            return Err("basis must be ascending, distinct and in range".to_string());
        }
        let v = val(s.sign);
        match &s.rule {
            Rule::Given => {
                let g = self.given.ok_or("GIVEN needs the input chirotope")?;
                if g.get(&s.basis) != Some(s.sign) {
                    return Err("sign differs from the input chirotope".to_string());
                }
            }
            Rule::Choice => return Err("search decisions are not proof steps".to_string()),
            Rule::Seed => {
                let seed = &self.cert.seed;
                let p = parity(seed).ok_or("seed has repeated elements")?;
                if sorted(seed) != s.basis || p * val(self.cert.seed_sign) != v || !s.premises.is_empty() {
                    return Err("does not match the declared seed".to_string());
                }
            }
            Rule::Flat { facet } => {
                let f = *self.facets()?.get(*facet).ok_or("no such facet")?;
                if !matches!(self.cert.mode, ProofMode::Rank5) {
                    return Err("flat bases only occur in rank 5".to_string());
                }
                if v != 0 || s.basis.iter().any(|&x| !contains(f, x)) {
                    return Err("basis is not a zero basis of the facet".to_string());
                }
            }
            Rule::Exchange { facet, out, inn } => {
                let f = *self.facets()?.get(*facet).ok_or("no such facet")?;
                let p = self.single_premise(steps, k, s)?;
                let inside = p.basis.iter().filter(|&&x| contains(f, x)).count();
                if inside != 4 || !p.basis.contains(out) || contains(f, *out) || contains(f, *inn) || p.basis.contains(inn) {
                    return Err("exchange does not fit the facet".to_string());
                }
                // Replace in place, keeping the premise's order.
                let tuple: Vec<usize> = p.basis.iter().map(|&x| if x == *out { *inn } else { x }).collect();
                if sorted(&tuple) != s.basis {
                    return Err("basis is not the exchanged premise".to_string());
                }
                if parity(&tuple).unwrap() * v != val(p.sign) {
                    return Err("exchanged sign is wrong".to_string());
                }
            }
            Rule::Ridge { ridge } => self.check_ridge(steps, k, s, ridge, false)?,
            Rule::Boundary { face } => self.check_ridge(steps, k, s, face, true)?,
            Rule::Gp { lambda, quad } => self.check_gp(steps, k, s, lambda, quad)?,
        }
        Ok(())
    }

    fn check_ridge(&self, steps: &[Step], k: usize, s: &Step, t: &[usize; 3], boundary: bool) -> Result<(), String> {
        let ProofMode::Diagram { base } = self.cert.mode else {
            return Err("ridge rules only occur in diagrams".to_string());
        };
        let fs = self.facets()?;
        let tm = mask(t);
        let adjacent: Vec<usize> = (0..fs.len()).filter(|&j| fs[j] & tm == tm).collect();
        let [g, h] = adjacent[..] else { return Err("not a ridge".to_string()) };
        if fs[g] & fs[h] != tm {
            return Err("not a ridge".to_string());
        }
        if boundary != (g == base || h == base) {
            return Err("wrong rule for this ridge".to_string());
        }
        let p = self.single_premise(steps, k, s)?;
        let extra = |b: &[usize]| -> Option<usize> {
            let rest: Vec<usize> = b.iter().copied().filter(|x| !t.contains(x)).collect();
            (rest.len() == 1 && b.len() == 4).then(|| rest[0])
        };
        let (x, y) = match (extra(&p.basis), extra(&s.basis)) {
            (Some(x), Some(y)) if x != y => (x, y),
            _ => return Err("premise and conclusion must be the ridge plus one point".to_string()),
        };
        let tx = [t[0], t[1], t[2], x];
        let ty = [t[0], t[1], t[2], y];
        let cx = Self::ordered_value(p, &tx).unwrap();
        let cy = Self::ordered_value(s, &ty).unwrap();
        let expected = if boundary {
            cx
        } else {
            let side = |z: usize| -> Option<i8> {
                if contains(fs[g], z) {
                    Some(1)
                } else if contains(fs[h], z) {
                    Some(-1)
                } else {
                    None
                }
            };
            match (side(x), side(y)) {
                (Some(a), Some(b)) => cx * a * b,
                _ => return Err("points must lie in the two facets of the ridge".to_string()),
            }
        };
        if cy != expected {
            return Err("side sign is wrong".to_string());
        }
        Ok(())
    }

    fn check_gp(&self, steps: &[Step], k: usize, s: &Step, lambda: &[usize], quad: &[usize; 4]) -> Result<(), String> {
        if lambda.len() + 2 != self.rank {
            return Err("lambda has the wrong size".to_string());
        }
        let [a, b, c, d] = *quad;
        let tuple = |x: usize, y: usize| -> Vec<usize> {
            let mut t = lambda.to_vec();
            t.push(x);
            t.push(y);
            t
        };
        // P1 = (ab)(cd), P2 = (ac)(bd), P3 = (ad)(bc); the relation is on
        // {P1, -P2, P3}.
        let pairs = [(tuple(a, b), tuple(c, d), 1i8), (tuple(a, c), tuple(b, d), -1), (tuple(a, d), tuple(b, c), 1)];
        if pairs.iter().any(|(x, y, _)| parity(x).is_none() || parity(y).is_none()) {
            return Err("relation has repeated elements".to_string());
        }
        let premises: Vec<&Step> = s.premises.iter().map(|&id| self.premise(steps, k, id)).collect::<Result<_, _>>()?;
        let lookup = |t: &[usize]| -> Option<i8> { premises.iter().find_map(|p| Self::ordered_value(p, t)) };
        let mut target_slot = None;
        let mut factors = Vec::new();
        for (i, (x, y, _)) in pairs.iter().enumerate() {
            for (j, t) in [x, y].into_iter().enumerate() {
                if sorted(t) == s.basis {
                    target_slot = Some((i, j));
                }
                factors.push(lookup(t));
            }
        }
        let (ti, tj) = target_slot.ok_or("conclusion is not a factor of the relation")?;
        let term = |i: usize| -> Option<i8> {
            let (f, g) = (factors[2 * i], factors[2 * i + 1]);
            match (f, g) {
                (Some(0), _) | (_, Some(0)) => Some(0),
                (Some(f), Some(g)) => Some(pairs[i].2 * f * g),
                _ => None,
            }
        };
        let others: Vec<Option<i8>> = (0..3).filter(|&i| i != ti).map(term).collect();
        let (Some(u), Some(w)) = (others[0], others[1]) else {
            return Err("the other two terms are not determined by the premises".to_string());
        };
        let needed = match (u, w) {
            (0, 0) => 0,
            (0, z) | (z, 0) => -z,
            (z, q) if z == q => -z,
            _ => return Err("the other two terms do not force the third".to_string()),
        };
        let partner = factors[2 * ti + (1 - tj)].ok_or("the partner factor is not a premise")?;
        if partner == 0 {
            return Err("the partner factor is zero".to_string());
        }
        let target_tuple = if tj == 0 { &pairs[ti].0 } else { &pairs[ti].1 };
        let forced_ordered = needed * pairs[ti].2 * partner;
        let forced = forced_ordered * parity(target_tuple).unwrap();
        if forced != val(s.sign) {
            return Err("forced sign is wrong".to_string());
        }
        Ok(())
    }

    fn check_relation_violated(&self, steps: &[Step], lambda: &[usize], quad: &[usize; 4], premises: &[usize]) -> Result<(), String> {
        let n = steps.len() + 1;
        let ps: Vec<&Step> = premises.iter().map(|&id| self.premise(steps, n, id)).collect::<Result<_, _>>()?;
        let [a, b, c, d] = *quad;
        let t = |x: usize, y: usize| -> Vec<usize> {
            let mut v = lambda.to_vec();
            v.push(x);
            v.push(y);
            v
        };
        let lookup = |tu: &[usize]| -> Option<i8> { ps.iter().find_map(|p| Self::ordered_value(p, tu)) };
        let pairs = [(t(a, b), t(c, d), 1i8), (t(a, c), t(b, d), -1), (t(a, d), t(b, c), 1)];
        let mut terms = Vec::new();
        for (x, y, sgn) in &pairs {
            let (f, g) = (lookup(x), lookup(y));
            terms.push(match (f, g) {
                (Some(0), _) | (_, Some(0)) => 0,
                (Some(f), Some(g)) => sgn * f * g,
                _ => return Err("relation is not determined by the cited steps".to_string()),
            });
        }
        let holds = terms.iter().all(|&x| x == 0) || (terms.contains(&1) && terms.contains(&-1));
        if holds {
            return Err("relation is not violated".to_string());
        }
        Ok(())
    }

    fn justified(&self) -> bool {
        let (Some(j), Some(fl)) = (&self.cert.justification, self.fl) else { return false };
        let fs = fl.facets();
        let Some(&f) = fs.get(j.facet) else { return false };
        let t = mask(&j.ridge);
        let is_ridge = (0..fs.len()).any(|g| g != j.facet && fs[g] & f == t) && t.count_ones() == 3;
        let seed = mask(&self.cert.seed);
        let point_ok = contains(f, j.point) && t & (1 << j.point) == 0;
        let covers = seed & t == t && contains(seed, j.point);
        let rest_ok = match self.rank {
            5 => (seed & f).count_ones() == 4,
            _ => true,
        };
        is_ridge && point_ok && covers && rest_ok
    }
}

/// Rechecks every step of `cert` and its verdict. `fl` is needed for facet
/// and ridge rules, `given` for steps taken from an input chirotope.
pub fn replay(
    cert: &ProofCertificate,
    fl: Option<&FacetList>,
    given: Option<&PartialChirotope>,
) -> Result<ReplaySummary, ReplayError> {
    let rank = match cert.mode {
        ProofMode::Rank5 => 5,
        ProofMode::Diagram { .. } => 4,
        ProofMode::Plain { rank } => rank,
    };
    if let Some(fl) = fl {
        if fl.n_vertices() != cert.n {
            return Err(ReplayError::Setup(format!("certificate is on {} elements, facet list on {}", cert.n, fl.n_vertices())));
        }
    }
    let r = Replayer { cert, fl, given, rank };
    let steps = &cert.steps;
    let mut first: HashMap<&[usize], usize> = HashMap::new();
    for k in 1..=steps.len() {
        r.check_step(steps, k).map_err(|reason| ReplayError::Step { step: k, reason })?;
        first.entry(&steps[k - 1].basis).or_insert(k);
    }
    match &cert.verdict {
        Verdict::Contradiction(Conflict::Basis { basis, first: a, second: b }) => {
            let ok = |id: usize| id >= 1 && id <= steps.len() && steps[id - 1].basis == *basis;
            if !ok(*a) || !ok(*b) || steps[*a - 1].sign == steps[*b - 1].sign {
                return Err(ReplayError::Verdict("cited steps do not disagree on the basis".to_string()));
            }
        }
        Verdict::Contradiction(Conflict::Relation { lambda, quad, premises }) => {
            r.check_relation_violated(steps, lambda, quad, premises).map_err(ReplayError::Verdict)?;
        }
        Verdict::Completed => {
            let total = (0..rank).fold(1usize, |acc, i| acc * (cert.n - i) / (i + 1));
            if first.len() != total {
                return Err(ReplayError::Verdict(format!("{} of {total} bases determined", first.len())));
            }
        }
        Verdict::Exhausted => {}
    }
    Ok(ReplaySummary { steps: steps.len(), determined: first.len(), seed_justified: r.justified() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirotope::{diagram_partial_chirotope, prove_nonpolytopal};
    use crate::data;

    #[test]
    fn parity_counts_inversions() {
        assert_eq!(parity(&[0, 1, 2]), Some(1));
        assert_eq!(parity(&[1, 0, 2]), Some(-1));
        assert_eq!(parity(&[2, 0, 1]), Some(1));
        assert_eq!(parity(&[1, 1]), None);
    }

    #[test]
    fn w12_40_certificate_replays() {
        let w = data::w12_40();
        let cert = prove_nonpolytopal(&w, &[7, 8, 10, 2, 9], Sign::Pos);
        let summary = replay(&cert, Some(&w), None).unwrap();
        assert!(summary.seed_justified);
        assert_eq!(summary.steps, cert.steps.len());
    }

    #[test]
    fn diagram_certificates_replay() {
        let w = data::w12_40();
        for base in 0..w.len() {
            let (_, cert) = diagram_partial_chirotope(&w, base);
            let summary = replay(&cert, Some(&w), None).unwrap();
            assert!(summary.seed_justified, "base F{}", base + 1);
        }
    }

    #[test]
    fn flipped_sign_is_rejected() {
        let w = data::w12_40();
        let mut cert = prove_nonpolytopal(&w, &[7, 8, 10, 2, 9], Sign::Pos);
        let k = cert.steps.iter().position(|s| matches!(s.rule, Rule::Gp { .. })).unwrap();
        cert.steps[k].sign = -cert.steps[k].sign;
        assert!(matches!(replay(&cert, Some(&w), None), Err(ReplayError::Step { step, .. }) if step == k + 1));
    }

    #[test]
    fn facet_rules_need_the_facet_list() {
        let w = data::w12_40();
        let cert = prove_nonpolytopal(&w, &[7, 8, 10, 2, 9], Sign::Pos);
        assert!(replay(&cert, None, None).is_err());
    }
}
