//! Text format for interrupted classifications.
//!
//! ```text
//! # polysphere frontier v1
//! n 10
//! found 1f,e3,...
//! task m=30 p=4,2,4 facets=3f,1c7,... excl=-
//! ```
//!
//! `found` lines hold canonical facet lists as hexadecimal vertex masks.
//! Each `task` line is one untraversed subtree; `excl` is `-` or a list of
//! `used:inner:fresh` triples in hexadecimal.

use std::fmt::Write as _;

use super::{Exclusion, PVectorCandidate, Task};
use crate::complex::{FacetList, PVector};

const HEADER: &str = "# polysphere frontier v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frontier {
    pub n: usize,
    pub found: Vec<FacetList>,
    pub tasks: Vec<(PVectorCandidate, Task)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FrontierError {
    #[error("missing or unsupported header, expected `{HEADER}`")]
    Header,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

fn hex_list(masks: &[u64]) -> String {
    let parts: Vec<String> = masks.iter().map(|m| format!("{m:x}")).collect();
    parts.join(",")
}

impl Frontier {
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nn {}\n", self.n);
        for fl in &self.found {
            let _ = writeln!(out, "found {}", hex_list(fl.facets()));
        }
        for (cand, task) in &self.tasks {
            let p: Vec<String> = cand.p.from_four().iter().map(|x| x.to_string()).collect();
            let excl = if task.exclusions.is_empty() {
                "-".to_string()
            } else {
                let parts: Vec<String> = task
                    .exclusions
                    .iter()
                    .map(|e| format!("{:x}:{:x}:{:x}", e.used, e.inner, e.fresh))
                    .collect();
                parts.join(",")
            };
            let _ = writeln!(
                out,
                "task m={} p={} facets={} excl={}",
                cand.m,
                p.join(","),
                hex_list(&task.facets),
                excl
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FrontierError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(FrontierError::Header),
        }
        let bad = |line: usize, msg: &str| FrontierError::Malformed { line, msg: msg.to_string() };
        let hex = |line: usize, s: &str| u64::from_str_radix(s, 16).map_err(|_| bad(line, "bad hex number"));
        let hexes = |line: usize, s: &str| -> Result<Vec<u64>, FrontierError> {
            s.split(',').map(|x| hex(line, x)).collect()
        };
        let mut n = None;
        let mut found = Vec::new();
        let mut tasks = Vec::new();
        for (line, l) in lines {
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (key, rest) = l.split_once(' ').ok_or_else(|| bad(line, "expected `key value`"))?;
            match key {
                "n" => n = Some(rest.trim().parse::<usize>().map_err(|_| bad(line, "bad vertex count"))?),
                "found" => {
                    let n = n.ok_or_else(|| bad(line, "`n` must come first"))?;
                    let fl = FacetList::new(n, hexes(line, rest.trim())?).map_err(|e| bad(line, &e.to_string()))?;
                    found.push(fl);
                }
                "task" => {
                    let n = n.ok_or_else(|| bad(line, "`n` must come first"))?;
                    let (mut m, mut p, mut facets, mut excl) = (None, None, None, None);
                    for field in rest.split_whitespace() {
                        let (k, v) = field.split_once('=').ok_or_else(|| bad(line, "expected `key=value`"))?;
                        match k {
                            "m" => m = Some(v.parse::<usize>().map_err(|_| bad(line, "bad m"))?),
                            "p" => {
                                let entries: Result<Vec<usize>, _> = v.split(',').map(str::parse).collect();
                                p = Some(PVector::from_p4(&entries.map_err(|_| bad(line, "bad p-vector"))?));
                            }
                            "facets" => facets = Some(hexes(line, v)?),
                            "excl" if v == "-" => excl = Some(Vec::new()),
                            "excl" => {
                                let mut out = Vec::new();
                                for e in v.split(',') {
                                    let parts: Vec<&str> = e.split(':').collect();
                                    let [used, inner, fresh] = parts[..] else {
                                        return Err(bad(line, "exclusion needs three fields"));
                                    };
                                    out.push(Exclusion {
                                        used: hex(line, used)?,
                                        inner: hex(line, inner)?,
                                        fresh: hex(line, fresh)? as u32,
                                    });
                                }
                                excl = Some(out);
                            }
                            _ => return Err(bad(line, "unknown task field")),
                        }
                    }
                    let (Some(m), Some(p), Some(facets), Some(exclusions)) = (m, p, facets, excl) else {
                        return Err(bad(line, "task needs m, p, facets and excl"));
                    };
                    tasks.push((PVectorCandidate { n, m, p }, Task { facets, exclusions }));
                }
                _ => return Err(bad(line, "unknown key")),
            }
        }
        let n = n.ok_or(FrontierError::Malformed { line: 0, msg: "missing `n`".to_string() })?;
        Ok(Frontier { n, found, tasks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn round_trip() {
        let w = data::w12_40();
        let f = Frontier {
            n: 12,
            found: vec![w.clone()],
            tasks: vec![(
                PVectorCandidate { n: 12, m: 40, p: w.p_vector() },
                Task {
                    facets: w.facets()[..3].to_vec(),
                    exclusions: vec![Exclusion { used: 0x3ff, inner: 0x7, fresh: 2 }],
                },
            )],
        };
        let text = f.to_text();
        assert!(text.starts_with(HEADER));
        assert_eq!(Frontier::parse(&text).unwrap(), f);
    }

    #[test]
    fn rejects_unknown_version() {
        assert_eq!(Frontier::parse("# polysphere frontier v0\nn 5\n"), Err(FrontierError::Header));
    }
}
