//! End-to-end checks of the two evaluators of `Z_k`.

use bcr::gauss_eval::{Configuration, DirectionFamily};
use bcr::knot_model::{perturbed_unknot, trivial, KnotSpec};
use bcr::zk_engine::{
    solve_intersections, zk_count, zk_mc, CountOptions, McOptions, Propagators, System, DET_TOL, RESIDUAL_TOL,
};
use bcr::{enumerate_numbered, NumberedDiagram};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A graph-type unknot steep enough for the direction map to hit the
/// sampled directions.
fn steep_unknot() -> KnotSpec {
    KnotSpec::parse(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../knots/steep_unknot.knot"))).unwrap()
}

fn count_opts(starts: usize, pairing: bool) -> CountOptions {
    CountOptions { starts, seed: 3, pairing, ..Default::default() }
}

/// Degree-3 systems known to carry roots for `steep_unknot` with direction
/// seed 3 and 40 starts, as indices into `enumerate_numbered(3)`.
const ROOTED_K3: [usize; 4] = [29, 627, 1575, 2857];

/// Every degree-2 system with a root, then the listed degree-3 ones.
fn rooted_systems() -> Vec<(usize, usize, NumberedDiagram)> {
    let knot = steep_unknot();
    let dirs = DirectionFamily::sample(2, 3, 3);
    let mut out: Vec<_> = enumerate_numbered(2)
        .unwrap()
        .into_iter()
        .enumerate()
        .filter(|(i, nd)| !solve_intersections(nd, &knot, &dirs, &count_opts(40, false), *i as u64).unwrap().roots.is_empty())
        .map(|(i, nd)| (2, i, nd))
        .collect();
    assert!(!out.is_empty(), "no degree-2 roots");
    let k3 = enumerate_numbered(3).unwrap();
    out.extend(ROOTED_K3.iter().map(|&i| (3, i, k3[i].clone())));
    out
}

#[test]
fn accepted_roots_are_sharp_and_stable() {
    let knot = steep_unknot();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut total = 0;
    for (k, task, nd) in rooted_systems() {
        let dirs = DirectionFamily::sample(k, 3, 3);
        let census = solve_intersections(&nd, &knot, &dirs, &count_opts(40, false), task as u64).unwrap();
        let system = System::new(&nd, &knot, &dirs);
        for root in &census.roots {
            total += 1;
            assert!(root.residual < RESIDUAL_TOL, "residual {}", root.residual);
            assert!(root.det.abs() > DET_TOL);
            assert_eq!(root.epsilon.len(), 2 * k);
            for _ in 0..3 {
                let shaken = Configuration {
                    layout: root.config.layout.clone(),
                    coords: root.config.coords.iter().map(|x| x + 1e-8 * rng.random_range(-1.0..1.0)).collect(),
                };
                let again = system.polish(shaken, 30).expect("re-polishing converges");
                assert_eq!(again.sign, root.sign, "{} {:?}", nd.diagram(), nd.numbering());
                assert_eq!(again.epsilon, root.epsilon);
                let moved = again.config.coords.iter().zip(&root.config.coords).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(moved < 1e-6, "root drifted by {moved}");
            }
        }
    }
    assert!(total >= ROOTED_K3.len() + 1, "found only {total} roots");
}

#[test]
fn reversed_roots_carry_the_sign_of_the_degree() {
    let knot = steep_unknot();
    for (k, task, nd) in rooted_systems() {
        let dirs = DirectionFamily::sample(k, 3, 3);
        let census = solve_intersections(&nd, &knot, &dirs, &count_opts(40, true), task as u64).unwrap();
        assert!(!census.roots.is_empty());
        let expected: i8 = if k % 2 == 0 { 1 } else { -1 };
        for r in &census.roots {
            assert_eq!(r.reversed_sign, Some(expected * r.sign), "k = {k}");
        }
        let paired = census.paired_count_x2();
        if k % 2 == 1 {
            assert_eq!(paired, 0);
        } else {
            assert_eq!(paired, 2 * census.signed_count());
        }
    }
}

#[test]
fn count_weights_are_exact() {
    let knot = steep_unknot();
    let dirs = DirectionFamily::sample(2, 3, 3);
    let report = zk_count(2, &knot, &dirs, &count_opts(40, false)).unwrap();
    let signed: i64 = report.per_diagram.iter().map(|t| t.signed_roots.unwrap()).sum();
    let roots: usize = report.per_diagram.iter().map(|t| t.roots.unwrap()).sum();
    assert!(roots > 0);
    assert_eq!(report.scaled.as_deref(), Some(signed.to_string().as_str()));
    let exact: BigRational = report.exact.as_deref().unwrap().parse().unwrap();
    // (1/2)^{2k} per root and 1/(2k)! overall
    assert_eq!(exact, BigRational::new(BigInt::from(signed), BigInt::from(16 * 24)));
    assert_eq!(report.z_k, signed as f64 / 384.0);
    for t in &report.per_diagram {
        assert_eq!(t.value, t.signed_roots.unwrap() as f64 / 16.0);
    }
}

#[test]
fn one_term_per_numbered_diagram() {
    let census = enumerate_numbered(2).unwrap().len();
    assert_eq!(census, 84);
    let mc = zk_mc(2, &trivial(3), &Propagators::<f64>::round(2, 3), &McOptions { samples: 64, ..Default::default() })
        .unwrap();
    assert_eq!(mc.per_diagram.len(), census);
    let dirs = DirectionFamily::sample(2, 3, 1);
    let count = zk_count(2, &trivial(3), &dirs, &count_opts(5, false)).unwrap();
    assert_eq!(count.per_diagram.len(), census);
    let (mc_terms, count_terms): (Vec<_>, Vec<_>) = mc
        .per_diagram
        .iter()
        .zip(&count.per_diagram)
        .map(|(a, b)| ((a.diagram.clone(), a.sigma.clone()), (b.diagram.clone(), b.sigma.clone())))
        .unzip();
    assert_eq!(mc_terms, count_terms);
}

#[test]
fn results_do_not_depend_on_threads() {
    let knot = perturbed_unknot(3);
    let props = Propagators::<f64>::round(2, 3);
    let run = |threads| {
        zk_mc(2, &knot, &props, &McOptions { samples: 3000, seed: 9, pairing: false, threads: Some(threads) })
            .unwrap()
            .to_json()
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
    let dirs = DirectionFamily::sample(2, 3, 3);
    let count = |threads| {
        zk_count(2, &steep_unknot(), &dirs, &CountOptions { threads: Some(threads), ..count_opts(20, false) })
            .unwrap()
            .to_json()
    };
    assert_eq!(count(1), count(2));
}

#[test]
fn evaluators_agree_on_the_perturbed_unknot() {
    let knot = perturbed_unknot(3);
    let dirs = DirectionFamily::sample(2, 3, 3);
    let count = zk_count(2, &knot, &dirs, &count_opts(200, false)).unwrap();
    let mc = zk_mc(2, &knot, &Propagators::<f64>::round(2, 3), &McOptions { samples: 40_000, seed: 1, ..Default::default() })
        .unwrap();
    assert!(mc.stderr > 0.0);
    assert!(
        (count.z_k - mc.z_k).abs() <= 3.0 * mc.stderr,
        "count {} vs mc {} ± {}",
        count.z_k,
        mc.z_k,
        mc.stderr
    );
}

#[test]
fn odd_degree_mc_with_pairing_is_exactly_zero() {
    let knot = perturbed_unknot(3);
    let props = Propagators::<f64>::round(3, 3);
    let run = |pairing| zk_mc(3, &knot, &props, &McOptions { samples: 40, seed: 2, pairing, threads: None }).unwrap();
    let plain = run(false);
    assert!(plain.per_diagram.iter().any(|t| t.value != 0.0), "every unpaired term vanished; the check would be vacuous");
    let paired = run(true);
    assert_eq!(paired.z_k, 0.0);
    assert_eq!(paired.stderr, 0.0);
}
