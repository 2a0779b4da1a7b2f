//! Proof and final polynomial certificates: generation, independent replay,
//! and rejection of corrupted copies.

use polysphere::chirotope::{
    bfp_search, bfp_verify, complete_search, default_seed, diagram_partial_chirotope, prove_nonpolytopal, BfpOutcome,
    BfpVerifyError, Engine, ProofCertificate, Rule, SearchConfig, Sign, Verdict,
};
use polysphere::complex::FacetList;
use polysphere::data;
use polysphere::geomcert::{chirotope_from_points, Homogenization};
use polysphere::replay::{replay, ReplayError};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: [usize; 5] = [7, 8, 10, 2, 9];

/// Certificates from every generator, with the facet list they need.
fn generated() -> Vec<(ProofCertificate, Option<FacetList>, Option<polysphere::chirotope::PartialChirotope>)> {
    let w = data::w12_40();
    let mut out = Vec::new();
    for sign in [Sign::Pos, Sign::Neg] {
        out.push((prove_nonpolytopal(&w, &SEED, sign), Some(w.clone()), None));
    }
    for base in 0..w.len() {
        out.push((diagram_partial_chirotope(&w, base).1, Some(w.clone()), None));
    }
    for fl in [data::simplex5(), data::hypersimplex(), data::hypersimplex_dual()] {
        let seed = default_seed(&fl).unwrap();
        out.push((prove_nonpolytopal(&fl, &seed, Sign::Pos), Some(fl), None));
    }
    let given = data::pappus9();
    let mut e = Engine::plain(&given, true);
    let result = e.run();
    out.push((e.proof(result), None, Some(given)));
    out
}

#[test]
fn replay_accepts_generated_certificates() {
    for (cert, fl, given) in generated() {
        let text = cert.to_text();
        let parsed = ProofCertificate::parse(&text).unwrap();
        assert_eq!(parsed, cert);
        let summary = replay(&parsed, fl.as_ref(), given.as_ref()).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(summary.steps, cert.steps.len());
        assert_eq!(summary.determined, cert.determined_signs().determined());
    }
}

/// One corruption of one step, each of a kind that can never be valid.
fn mutate(cert: &mut ProofCertificate, rng: &mut ChaCha8Rng) -> usize {
    loop {
        let k = rng.gen_range(0..cert.steps.len());
        let step = &mut cert.steps[k];
        match rng.gen_range(0..3) {
            0 => {
                step.sign = match step.sign {
                    Sign::Zero => Sign::Pos,
                    s => -s,
                };
                return k + 1;
            }
            1 if !step.premises.is_empty() => {
                let i = rng.gen_range(0..step.premises.len());
                step.premises[i] = k + 1 + rng.gen_range(0..3);
                return k + 1;
            }
            2 if !step.premises.is_empty() => {
                step.premises.clear();
                return k + 1;
            }
            _ => {}
        }
    }
}

#[test]
fn replay_rejects_single_step_mutations() {
    let certs = generated();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rejected = 0;
    for trial in 0..100 {
        let (cert, fl, given) = &certs[trial % certs.len()];
        let mut bad = cert.clone();
        let k = mutate(&mut bad, &mut rng);
        // Through the text format, as a tampered file would arrive.
        let Ok(bad) = ProofCertificate::parse(&bad.to_text()) else {
            rejected += 1;
            continue;
        };
        match replay(&bad, fl.as_ref(), given.as_ref()) {
            Err(ReplayError::Step { step, .. }) => {
                assert_eq!(step, k, "trial {trial}");
                rejected += 1;
            }
            other => panic!("trial {trial}: mutation of step {k} gave {other:?}"),
        }
    }
    assert_eq!(rejected, 100);
}

#[test]
fn replay_rejects_a_wrong_verdict() {
    let w = data::w12_40();
    let mut cert = prove_nonpolytopal(&w, &SEED, Sign::Pos);
    let Verdict::Contradiction(polysphere::chirotope::Conflict::Basis { basis, first, .. }) = cert.verdict.clone() else {
        panic!("expected a basis conflict");
    };
    cert.verdict = Verdict::Contradiction(polysphere::chirotope::Conflict::Basis { basis, first, second: first });
    assert!(matches!(replay(&cert, Some(&w), None), Err(ReplayError::Verdict(_))));
}

#[test]
fn replay_rejects_a_facet_outside_the_sphere() {
    let w = data::w12_40();
    let mut cert = prove_nonpolytopal(&w, &SEED, Sign::Pos);
    let k = cert.steps.iter().position(|s| matches!(s.rule, Rule::Flat { .. })).unwrap();
    cert.steps[k].rule = Rule::Flat { facet: 12 };
    assert!(matches!(replay(&cert, Some(&w), None), Err(ReplayError::Step { step, .. }) if step == k + 1));
}

#[test]
fn negated_seed_negates_the_fixpoint() {
    let w = data::w12_40();
    let plus = prove_nonpolytopal(&w, &SEED, Sign::Pos);
    let minus = prove_nonpolytopal(&w, &SEED, Sign::Neg);
    assert!(plus.is_contradiction() && minus.is_contradiction());
    assert_eq!(minus.determined_signs(), plus.determined_signs().negated());
    assert_eq!(minus.steps.len(), plus.steps.len());
}

#[test]
fn bundled_final_polynomial_verifies() {
    let pc = data::pappus9_refuted();
    let cert = data::pappus9_bfp();
    bfp_verify(&pc, &cert).unwrap();
    // It certifies only the node it was made for.
    assert!(bfp_verify(&data::pappus9(), &cert).is_err());
}

#[test]
fn search_reproduces_the_bundled_refutation() {
    let instance = data::pappus9();
    let config = SearchConfig { floor: Some(83), prune_with_bfp: true, ..Default::default() };
    let out = complete_search(&Engine::plain(&instance, false), &config, None);
    assert!(out.is_refutation());
    assert_eq!(out.refuted[0].0, data::pappus9_refuted());
    for (pc, cert) in &out.refuted {
        bfp_verify(pc, cert).unwrap();
    }
}

#[test]
fn corrupted_final_polynomials_are_rejected() {
    let pc = data::pappus9_refuted();
    let cert = data::pappus9_bfp();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let mut bad = cert.clone();
        let i = rng.gen_range(0..bad.inequalities.len());
        match rng.gen_range(0..3) {
            0 => {
                bad.inequalities.remove(i);
            }
            1 => {
                let m = &mut bad.inequalities[i].1;
                *m = &*m + BigRational::from_integer(1.into());
            }
            _ => {
                let q = &mut bad.inequalities[i].0;
                std::mem::swap(&mut q.big, &mut q.small);
                std::mem::swap(&mut q.lhs, &mut q.rhs);
            }
        }
        assert!(bfp_verify(&pc, &bad).is_err());
    }
    let mut empty = cert.clone();
    empty.inequalities.clear();
    assert_eq!(bfp_verify(&pc, &empty), Err(BfpVerifyError::Empty));
}

#[test]
fn realizable_diagram_has_no_final_polynomial() {
    let pc = chirotope_from_points(&data::w12_40_diagram_f2(), Homogenization::Affine);
    assert!(matches!(bfp_search(&pc), Ok(BfpOutcome::None { .. })));
}
