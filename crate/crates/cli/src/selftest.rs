//! A fast pass over the invariant suite. The full-size checks live in the
//! `acceptance` integration test.

use std::time::Instant;

use anyhow::Result;
use bcr::diagram_core::ConfigLayout;
use bcr::face_calculus::{blowup_graph, edge_dimension_sum, half_edge_dims, involution_census};
use bcr::gauss_eval::{Configuration, DirectionFamily};
use bcr::knot_model::{connected_sum, perturbed_unknot, trivial};
use bcr::zk_engine::{integrand, zk_count, zk_mc, CountOptions, McOptions, Propagators};
use bcr::{enumerate, enumerate_numbered, NumberedDiagram};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Failed;

type Check = fn(u64, Option<usize>) -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn census(_: u64, _: Option<usize>) -> Result<String, String> {
    let ds = enumerate(2).map_err(|e| e.to_string())?;
    let mut legs: Vec<usize> = ds.iter().map(|d| d.cycle_and_legs().legs.len()).collect();
    legs.sort_unstable();
    ensure(legs == [0, 1, 1, 2, 2], || format!("leg multiset {legs:?}"))?;
    Ok(format!("{} classes", ds.len()))
}

fn structure(_: u64, _: Option<usize>) -> Result<String, String> {
    let mut count = 0;
    for k in 2..=3 {
        for d in enumerate(k).map_err(|e| e.to_string())? {
            ensure(d.n_vertices() == 2 * k && d.n_edges() == 2 * k, || format!("{d}: wrong size"))?;
            for n in [3, 5] {
                let dims: usize = d.kinds().iter().map(|kind| kind.coord_dim(n)).sum();
                ensure(half_edge_dims(&d, n).total == dims && edge_dimension_sum(&d, n) == dims, || {
                    format!("{d}: dimension count fails for n = {n}")
                })?;
            }
            let p = d.parity_data();
            ensure((p.l + p.r) % 2 == k % 2, || format!("{d}: L + r = {} + {}", p.l, p.r))?;
            count += 1;
        }
    }
    Ok(format!("{count} diagrams, k ≤ 3"))
}

fn involutions(_: u64, _: Option<usize>) -> Result<String, String> {
    let c = involution_census(2, false).map_err(|e| e.to_string())?;
    ensure(c.ok(), || format!("{c:?}"))?;
    Ok(format!("{} numbered, {} hidden, {} principal", c.numbered, c.hidden_faces, c.principal_faces))
}

fn blowups(_: u64, _: Option<usize>) -> Result<String, String> {
    let mut checked = 0;
    for d in enumerate(2).map_err(|e| e.to_string())? {
        let nd = NumberedDiagram::identity(d.clone());
        let nv = d.n_vertices() as u32;
        for code in 0..3usize.pow(nv) {
            let (mut s1, mut s2, mut c) = (0u64, 0u64, code);
            for v in 0..nv {
                match c % 3 {
                    1 => s1 |= 1 << v,
                    2 => s2 |= 1 << v,
                    _ => {}
                }
                c /= 3;
            }
            let Ok(g) = blowup_graph(&nd, s1, s2) else { continue };
            let (dim, sum) = (g.dimension(3), g.edge_dimension_sum(3));
            let empty = s1 | s2 == 0;
            ensure(if empty { dim == sum } else { dim < sum }, || format!("{d} S1={s1:#b} S2={s2:#b}: {dim} vs {sum}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} splits"))
}

fn trivial_pointwise(seed: u64, _: Option<usize>) -> Result<String, String> {
    let triv = trivial(3);
    let props = Propagators::<f64>::round(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for d in enumerate(2).map_err(|e| e.to_string())? {
        let nd = NumberedDiagram::identity(d.clone());
        for _ in 0..50 {
            let c = Configuration::random(ConfigLayout::new(&d, 3), &mut rng, 0.7);
            worst = worst.max(integrand(&nd, &triv, &c, &props).value.abs());
        }
    }
    ensure(worst < 1e-6, || format!("max |integrand| = {worst:e}"))?;
    Ok(format!("max |integrand| = {worst:e}"))
}

fn trivial_global(seed: u64, threads: Option<usize>) -> Result<String, String> {
    let triv = trivial(3);
    let r = zk_mc(2, &triv, &Propagators::<f64>::round(2, 3), &McOptions { samples: 2000, seed, pairing: false, threads })
        .map_err(|e| e.to_string())?;
    ensure(r.z_k == 0.0 && r.stderr == 0.0, || format!("Z_2 = {} ± {}", r.z_k, r.stderr))?;
    let dirs = DirectionFamily::sample(2, 3, seed);
    let opts = CountOptions { starts: 50, seed, threads, ..Default::default() };
    let c = zk_count(2, &triv, &dirs, &opts).map_err(|e| e.to_string())?;
    let roots: usize = c.per_diagram.iter().filter_map(|t| t.roots).sum();
    ensure(roots == 0, || format!("{roots} roots"))?;
    Ok("mc 0 ± 0, no roots".into())
}

fn reversal(seed: u64, _: Option<usize>) -> Result<String, String> {
    let knot = perturbed_unknot(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in [2, 3] {
        let props = Propagators::<f64>::round(k, 3);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for nd in enumerate_numbered(k).map_err(|e| e.to_string())?.iter().step_by(if k == 2 { 1 } else { 40 }) {
            let rev = nd.reverse_cycle();
            for _ in 0..5 {
                let c = Configuration::random(ConfigLayout::new(nd.diagram(), 3), &mut rng, 0.5);
                let a = integrand(nd, &knot, &c, &props).value;
                let b = integrand(&rev, &knot, &c, &props).value;
                worst = worst.max((b - sign * a).abs());
            }
        }
    }
    ensure(worst < 1e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn connected_sums(_: u64, _: Option<usize>) -> Result<String, String> {
    let triv = trivial(3);
    let sum = connected_sum(&triv, &triv).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            for l in 0..6 {
                let x: Vec<f64> = [i, j, l].iter().map(|&t| -1.1 + 2.2 * t as f64 / 5.0).collect();
                let a = sum.eval(&x).map_err(|e| e.to_string())?;
                let b = triv.eval(&x).map_err(|e| e.to_string())?;
                worst = a.iter().zip(&b).fold(worst, |m, (p, q)| m.max((p - q).abs()));
            }
        }
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn jacobians(seed: u64, _: Option<usize>) -> Result<String, String> {
    use rand::Rng;
    let knot = perturbed_unknot(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = knot.jacobian(&x).map_err(|e| e.to_string())?;
        let f = knot.jacobian_fd(&x, 1e-6).map_err(|e| e.to_string())?;
        for r in 0..5 {
            for c in 0..3 {
                worst = worst.max((a[(r, c)] - f[(r, c)]).abs() / a[(r, c)].abs().max(1.0));
            }
        }
    }
    ensure(worst < 1e-6, || format!("relative error {worst:e}"))?;
    Ok(format!("relative error {worst:e}"))
}

const CHECKS: [(&str, Check); 9] = [
    ("degree-2 census", census),
    ("structural identities", structure),
    ("involutions", involutions),
    ("blow-up dimensions", blowups),
    ("trivial knot, pointwise", trivial_pointwise),
    ("trivial knot, global", trivial_global),
    ("cycle-reversal covariance", reversal),
    ("connected sum with the trivial knot", connected_sums),
    ("knot Jacobians", jacobians),
];

pub fn run(seed: u64, threads: Option<usize>) -> Result<()> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        let t = Instant::now();
        let outcome = check(seed, threads);
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({ms} ms)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({ms} ms)");
            }
        }
    }
    if failed > 0 {
        return Err(Failed(format!("{failed} of {} self-checks failed", CHECKS.len())).into());
    }
    Ok(())
}
