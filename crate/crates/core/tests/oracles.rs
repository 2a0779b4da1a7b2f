//! Library results checked against brute force and exact determinants.

use std::collections::BTreeSet;

use polysphere::chirotope::{
    complete_search, diagram_partial_chirotope, gp_relations, subsets, Engine, GpStatus, PartialChirotope, SearchConfig,
    Sign,
};
use polysphere::complex::FacetList;
use polysphere::data;
use polysphere::enumerate::{classify, verify_sphere, ClassifyOptions};
use polysphere::geomcert::{chirotope_from_points, Homogenization, PointConfiguration};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every family of `n` facets with 4 to `n - 1` vertices, run through the
/// sphere filters. A 2s2s sphere has as many facets as vertices.
fn brute_force_spheres(n: usize) -> BTreeSet<Vec<u64>> {
    let candidates: Vec<u64> = (0u64..1 << n)
        .filter(|m| (4..n as u32).contains(&m.count_ones()))
        .collect();
    let mut found = BTreeSet::new();
    for pick in subsets(candidates.len(), n) {
        let facets: Vec<u64> = pick.iter().map(|&i| candidates[i]).collect();
        let Ok(fl) = FacetList::new(n, facets) else { continue };
        if let Some(s) = verify_sphere(&fl) {
            found.insert(s.facet_list.facets().to_vec());
        }
    }
    found
}

#[test]
fn enumeration_matches_brute_force() {
    for n in [5, 6] {
        let class = classify(n, &ClassifyOptions::default()).unwrap();
        let ours: BTreeSet<Vec<u64>> = class.spheres.iter().map(|s| s.facet_list.facets().to_vec()).collect();
        assert_eq!(ours, brute_force_spheres(n), "n = {n}");
    }
}

#[test]
fn enumeration_is_independent_of_jobs() {
    let run = |jobs| classify(9, &ClassifyOptions { jobs: Some(jobs), ..Default::default() }).unwrap();
    assert_eq!(run(1), run(3));
}

/// Cofactor expansion along the first row.
fn det(m: &[Vec<i128>]) -> i128 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i128>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

fn sign_of(v: i128) -> i8 {
    v.signum() as i8
}

struct Vectors(Vec<Vec<i128>>);

impl Vectors {
    fn of(pc: &PointConfiguration, h: Homogenization) -> Self {
        Vectors((0..pc.len()).map(|v| pc.vector(v, h).into_iter().map(i128::from).collect()).collect())
    }

    fn chi(&self, t: &[usize]) -> i8 {
        let rows: Vec<Vec<i128>> = t.iter().map(|&v| self.0[v].clone()).collect();
        sign_of(det(&rows))
    }
}

/// Samples relations, checks the three-term sign condition on exact
/// determinants, and checks that the library's chirotope agrees.
fn sample_relations(vs: &Vectors, pc: &PartialChirotope, samples: usize, rng: &mut ChaCha8Rng) -> usize {
    let n = pc.n_elements();
    let rank = pc.rank();
    let mut violations = 0;
    for _ in 0..samples {
        let mut elems: Vec<usize> = (0..n).collect();
        for i in 0..rank + 2 {
            let j = rng.gen_range(i..n);
            elems.swap(i, j);
        }
        let lambda = &elems[..rank - 2];
        let [a, b, c, d] = [elems[rank - 2], elems[rank - 1], elems[rank], elems[rank + 1]];
        let t = |x: usize, y: usize| -> Vec<usize> { lambda.iter().copied().chain([x, y]).collect() };
        let terms = [
            vs.chi(&t(a, b)) * vs.chi(&t(c, d)),
            -vs.chi(&t(a, c)) * vs.chi(&t(b, d)),
            vs.chi(&t(a, d)) * vs.chi(&t(b, c)),
        ];
        let holds = terms.iter().all(|&x| x == 0) || (terms.contains(&1) && terms.contains(&-1));
        if !holds {
            violations += 1;
        }
        for tuple in [t(a, b), t(c, d), t(a, c), t(b, d), t(a, d), t(b, c)] {
            assert_eq!(pc.get(&tuple).map(|s| s.to_i8()), Some(vs.chi(&tuple)), "basis {tuple:?}");
        }
    }
    violations
}

#[test]
fn determinant_chirotopes_satisfy_sampled_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total = 0;
    let mut violations = 0;
    let configs = [
        (data::w12_40_diagram_f2(), Homogenization::Affine),
        (data::w12_40_fan(), Homogenization::Linear),
        (random_points(&mut rng, 10, 2), Homogenization::Affine),
        (random_points(&mut rng, 9, 4), Homogenization::Linear),
        (random_points(&mut rng, 9, 5), Homogenization::Linear),
    ];
    for (coords, h) in &configs {
        let pc = chirotope_from_points(coords, *h);
        let vs = Vectors::of(coords, *h);
        violations += sample_relations(&vs, &pc, 20_000, &mut rng);
        total += 20_000;
    }
    assert_eq!(total, 100_000);
    assert_eq!(violations, 0);
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointConfiguration {
    // Small coordinates so that degenerate tuples occur too.
    let pts = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    PointConfiguration::new(dim, pts)
}

#[test]
fn library_relations_hold_on_determinant_chirotopes() {
    let coords = data::w12_40_fan();
    let pc = chirotope_from_points(&coords, Homogenization::Linear);
    assert!(gp_relations(12, 4).iter().all(|r| r.status(&pc) == GpStatus::Satisfied));
}

#[test]
fn diagram_signs_agree_with_the_coordinates() {
    let w = data::w12_40();
    let (pc, _) = diagram_partial_chirotope(&w, 1);
    let coords = chirotope_from_points(&data::w12_40_diagram_f2(), Homogenization::Affine);
    assert!(pc.is_restriction_of(&coords) || pc.negated().is_restriction_of(&coords));
}

fn all_relations_hold(n: usize, rank: usize, signs: &[i8]) -> bool {
    // Positions follow the chirotope's own basis order.
    let order = PartialChirotope::new(n, rank);
    let idx: std::collections::HashMap<Vec<usize>, usize> = (0..order.n_bases()).map(|i| (order.basis(i), i)).collect();
    let value = |t: &[usize]| -> i8 {
        let mut s = t.to_vec();
        let mut inv = 0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                if s[i] > s[j] {
                    inv += 1;
                }
                if s[i] == s[j] {
                    return 0;
                }
            }
        }
        s.sort_unstable();
        let k = idx[&s];
        if inv % 2 == 0 {
            signs[k]
        } else {
            -signs[k]
        }
    };
    for lambda in subsets(n, rank - 2) {
        let rest: Vec<usize> = (0..n).filter(|v| !lambda.contains(v)).collect();
        for q in subsets(rest.len(), 4) {
            let [a, b, c, d] = [rest[q[0]], rest[q[1]], rest[q[2]], rest[q[3]]];
            let t = |x: usize, y: usize| -> Vec<usize> { lambda.iter().copied().chain([x, y]).collect() };
            let terms = [
                value(&t(a, b)) * value(&t(c, d)),
                -value(&t(a, c)) * value(&t(b, d)),
                value(&t(a, d)) * value(&t(b, c)),
            ];
            if !(terms.iter().all(|&x| x == 0) || (terms.contains(&1) && terms.contains(&-1))) {
                return false;
            }
        }
    }
    true
}

/// All uniform completions of a partial sign vector, by trying every
/// assignment of the unknowns.
fn brute_force_completions(n: usize, rank: usize, given: &[Option<i8>]) -> BTreeSet<Vec<i8>> {
    let unknown: Vec<usize> = (0..given.len()).filter(|&i| given[i].is_none()).collect();
    let mut out = BTreeSet::new();
    for bits in 0u32..1 << unknown.len() {
        let mut signs: Vec<i8> = given.iter().map(|s| s.unwrap_or(0)).collect();
        for (k, &i) in unknown.iter().enumerate() {
            signs[i] = if bits & (1 << k) != 0 { -1 } else { 1 };
        }
        if all_relations_hold(n, rank, &signs) {
            out.insert(signs);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_finds_exactly_the_completions(
        given in proptest::collection::vec(prop_oneof![Just(None), Just(Some(1i8)), Just(Some(-1i8))], 20),
    ) {
        prop_assume!(given.iter().filter(|s| s.is_none()).count() <= 12);
        let mut pc = PartialChirotope::new(6, 3);
        for (i, s) in given.iter().enumerate() {
            if let Some(v) = s {
                pc.set_index(i, if *v > 0 { Sign::Pos } else { Sign::Neg }).unwrap();
            }
        }
        let out = complete_search(&Engine::plain(&pc, false), &SearchConfig::default(), None);
        let found: BTreeSet<Vec<i8>> =
            out.completions.iter().map(|c| c.signs().iter().map(|s| s.unwrap().to_i8()).collect()).collect();
        prop_assert_eq!(found.len(), out.completions.len());
        prop_assert_eq!(found, brute_force_completions(6, 3, &given));
    }
}

#[test]
fn interrupted_search_resumes_to_the_same_completions() {
    let mut pc = PartialChirotope::new(6, 3);
    let full = chirotope_from_points(&random_points(&mut ChaCha8Rng::seed_from_u64(5), 6, 2), Homogenization::Affine);
    for i in (0..20).step_by(3) {
        if let Some(s) = full.get_index(i).filter(|&s| s != Sign::Zero) {
            pc.set_index(i, s).unwrap();
        }
    }
    let e = Engine::plain(&pc, false);
    let whole = complete_search(&e, &SearchConfig::default(), None);
    let cut = complete_search(&e, &SearchConfig { budget: Some(std::time::Duration::ZERO), ..Default::default() }, None);
    let state = cut.interrupted.expect("a zero budget interrupts");
    let rest = complete_search(&e, &SearchConfig::default(), Some(&state));
    let mut a = whole.completions.clone();
    let mut b: Vec<_> = cut.completions.into_iter().chain(rest.completions).collect();
    a.sort_by_key(|c| c.to_text());
    b.sort_by_key(|c| c.to_text());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn search_refutes_a_basis_both_of_whose_signs_fail() {
    // Rank 2 on five points: the relation on {0,1,2,4} forces [04] = +
    // and the one on {0,1,3,4} forces [04] = -.
    let mut pc = PartialChirotope::new(5, 2);
    for (t, s) in [
        ([0, 1], Sign::Pos),
        ([0, 2], Sign::Pos),
        ([1, 2], Sign::Pos),
        ([1, 4], Sign::Pos),
        ([2, 4], Sign::Neg),
        ([0, 3], Sign::Neg),
        ([1, 3], Sign::Pos),
        ([3, 4], Sign::Pos),
    ] {
        pc.set(&t, s).unwrap();
    }
    let mut signs: Vec<Option<i8>> = pc.signs().iter().map(|s| s.map(Sign::to_i8)).collect();
    assert!(brute_force_completions(5, 2, &signs).is_empty());
    // Both values of the free basis fail on their own.
    let free = pc.index_of(&[0, 4]);
    for v in [1, -1] {
        signs[free] = Some(v);
        let mut partial = signs.clone();
        partial[pc.index_of(&[2, 3])] = Some(1);
        let fails_a = !all_relations_hold(5, 2, &partial.iter().map(|s| s.unwrap()).collect::<Vec<_>>());
        partial[pc.index_of(&[2, 3])] = Some(-1);
        let fails_b = !all_relations_hold(5, 2, &partial.iter().map(|s| s.unwrap()).collect::<Vec<_>>());
        assert!(fails_a && fails_b);
    }
    let out = complete_search(&Engine::plain(&pc, false), &SearchConfig::default(), None);
    assert!(out.is_refutation());
}
