//! Acceptance suite: one test per headline guarantee of the pipeline.
//! Every test prints a single summary line with the measured worst case
//! (visible with `--nocapture`); the test name doubles as the criterion.

use std::collections::HashSet;
use std::sync::Arc;

use num::{Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use sdl_core::beckmann::solve_beckmann;
use sdl_core::calculus::adjoint;
use sdl_core::currents::Current1;
use sdl_core::exact::{rat, Rat};
use sdl_core::normed::Norm;
use sdl_core::sobolev::{equivalence_report, min_weak_upper_gradient, ReportConfig};
use sdl_core::space::{build_instance, restrict, GeneratorSpec, Instance, Topology};
use sdl_core::superposition::{decompose_acyclic, plan_from_dual};

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Deterministic mixed-topology instance per seed. Random-geometric draws
/// can come out invalid (isolated vertices); those seeds are bumped by a
/// fixed stride so the result stays reproducible.
fn instance_for(seed: u64) -> Arc<Instance> {
    let topology = match seed % 5 {
        0 => Topology::Path { n: 4 + (seed as usize % 6) },
        1 => Topology::Grid { rows: 2 + (seed as usize % 2), cols: 2 + (seed as usize % 3) },
        2 => Topology::Star { k: 3 + (seed as usize % 4) },
        3 => Topology::Tree { n: 5 + (seed as usize % 7) },
        _ => Topology::RandomGeometric { n: 7 + (seed as usize % 5), radius: 0.9 },
    };
    let mut s = seed;
    loop {
        let spec = GeneratorSpec { seed: s, ..GeneratorSpec::new(topology.clone()) };
        match build_instance(&spec) {
            Ok(inst) => return Arc::new(inst),
            Err(_) => s += 1000,
        }
    }
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect()
}

/// Unique flow on a tree by leaf elimination, independent of the solver.
fn tree_flow_oracle(inst: &Instance, g: &[f64]) -> Vec<f64> {
    let n = inst.n_vertices();
    let ne = inst.n_edges();
    let mut demand: Vec<f64> = (0..n).map(|v| inst.lumped_mass(v) * g[v]).collect();
    let mut used = vec![false; ne];
    let mut degree: Vec<usize> = (0..n).map(|v| inst.incident(v).len()).collect();
    let mut flow = vec![0.0; ne];
    let mut leaves: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = leaves.pop() {
        let Some(&(e, sign)) = inst.incident(v).iter().find(|&&(e, _)| !used[e]) else { continue };
        flow[e] = sign as f64 * demand[v] * inst.length(e) / inst.edge_mass(e);
        used[e] = true;
        let (t, h) = inst.ends(e);
        let other = if t == v { h } else { t };
        demand[other] += demand[v];
        demand[v] = 0.0;
        degree[other] -= 1;
        degree[v] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    flow
}

#[test]
fn acceptance_1_tree_flows_match_the_unique_oracle() {
    let mut worst_res = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut worst_err = 0.0f64;
    let mut solves = 0;
    for seed in 0..50u64 {
        let spec = GeneratorSpec {
            seed,
            ..GeneratorSpec::new(Topology::Tree { n: 4 + (seed as usize % 9) })
        };
        let inst = Arc::new(build_instance(&spec).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let l0: Vec<f64> = (0..inst.n_edges()).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let g = adjoint(&inst, &l0).unwrap();
        let oracle = tree_flow_oracle(&inst, &g);
        for q in [1.5, 2.0, 3.0] {
            let sol = solve_beckmann(&inst, &g, q, 1e-12).unwrap();
            worst_res = worst_res.max(sol.residual);
            worst_gap = worst_gap.max(sol.gap);
            assert!(sol.residual <= 1e-8, "seed {seed} q {q}: residual {}", sol.residual);
            assert!(sol.gap <= 1e-8, "seed {seed} q {q}: gap {}", sol.gap);
            for e in 0..inst.n_edges() {
                let err = (sol.l[e] - oracle[e]).abs() / oracle[e].abs().max(1.0);
                worst_err = worst_err.max(err);
                assert!(err <= 1e-10, "seed {seed} q {q} edge {e}: {} vs {}", sol.l[e], oracle[e]);
            }
            solves += 1;
        }
    }
    println!(
        "criterion 1 (tree Beckmann flows, {solves} solves): PASS — \
         worst residual {worst_res:.2e}, gap {worst_gap:.2e}, flow error {worst_err:.2e}"
    );
}

#[test]
fn acceptance_2_acyclic_decompositions_are_exact() {
    let mut paths_total = 0;
    for seed in 0..200u64 {
        let inst = instance_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b9));

        // Random acyclic orientation: coefficients follow a shuffled
        // vertex order, so the sign digraph has no directed cycle.
        let n = inst.n_vertices();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, pick(&mut rng, i + 1));
        }
        let mut rank = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        let j: Vec<Rat> = (0..inst.n_edges())
            .map(|e| {
                let (t, h) = inst.ends(e);
                let mag = rat(pick(&mut rng, 10) as i64, 1 + pick(&mut rng, 9) as i64);
                if rank[t] < rank[h] {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let t = Current1::new(inst.clone(), j).unwrap();
        let plan = decompose_acyclic(&t).unwrap();

        assert_eq!(plan.current().coefficients(), t.coefficients(), "seed {seed}");
        let occ = plan.occupation();
        for e in 0..inst.n_edges() {
            assert_eq!(occ[e], t.coefficients()[e].abs(), "seed {seed} edge {e}");
        }
        assert_eq!(plan.boundary_rat(), t.boundary(), "seed {seed}");
        assert_eq!(plan.mass_rat(), t.mass(), "seed {seed}");
        for path in plan.paths() {
            assert!(path.weight.is_positive());
            let distinct: HashSet<_> = path.vertices.iter().collect();
            assert_eq!(distinct.len(), path.vertices.len(), "seed {seed}: walk not simple");
        }
        paths_total += plan.n_paths();
    }
    println!(
        "criterion 2 (200 acyclic flows decompose exactly): PASS — {paths_total} paths stripped"
    );
}

#[test]
fn acceptance_3_cycle_removal_invariants_are_exact() {
    let mut cyclic_inputs = 0;
    for seed in 0..200u64 {
        let inst = instance_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xc2b2ae35));
        let j: Vec<Rat> = (0..inst.n_edges())
            .map(|_| rat(pick(&mut rng, 19) as i64 - 9, 1 + pick(&mut rng, 9) as i64))
            .collect();
        let t = Current1::new(inst.clone(), j).unwrap();
        if !t.is_acyclic() {
            cyclic_inputs += 1;
        }
        let (c, a) = t.remove_cycles();

        assert!(a.is_acyclic(), "seed {seed}");
        assert!(c.boundary().iter().all(Rat::is_zero), "seed {seed}");
        let recombined = c.add(&a).unwrap();
        assert_eq!(recombined.coefficients(), t.coefficients(), "seed {seed}");
        assert_eq!(a.boundary(), t.boundary(), "seed {seed}");
        assert!(c.is_subcurrent_of(&t).unwrap(), "seed {seed}");
        assert!(a.is_subcurrent_of(&t).unwrap(), "seed {seed}");
        assert_eq!(c.mass() + a.mass(), t.mass(), "seed {seed}");
    }
    println!(
        "criterion 3 (200 cycle removals, all identities in exact arithmetic): PASS — \
         {cyclic_inputs} inputs actually carried cycles"
    );
}

#[test]
fn acceptance_4_dual_superposition_preserves_boundary_and_energy() {
    let mut lossless = 0;
    for i in 0..100u64 {
        // Alternate trees (always acyclic duals) with cyclic topologies.
        let seed = if i % 2 == 0 { 3 + 5 * i } else { i };
        let inst = instance_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(i.wrapping_mul(0x100000001b3));
        let l: Vec<f64> = (0..inst.n_edges())
            .map(|_| if unit(&mut rng) < 0.2 { 0.0 } else { uniform(&mut rng, -2.0, 2.0) })
            .collect();
        let q = [1.5, 2.0, 3.0][(i % 3) as usize];
        let dual = plan_from_dual(inst.clone(), &l, q).unwrap();

        // The plan's current is the acyclic part: same boundary as w·L.
        let mut j = Vec::with_capacity(l.len());
        for e in 0..l.len() {
            j.push(inst.density_rat(e) * sdl_core::exact::rat_from_f64(l[e]).unwrap());
        }
        let t = Current1::new(inst.clone(), j).unwrap();
        assert_eq!(dual.plan.current().boundary(), t.boundary(), "instance {i}");

        let occ = dual.plan.occupation();
        for e in 0..inst.n_edges() {
            assert!(occ[e] <= t.coefficients()[e].abs(), "instance {i} edge {e}");
        }
        assert!(dual.bar_norm <= dual.l_norm, "instance {i}");
        let mass_drop = t.mass_f64() - dual.plan.mass();
        assert!(
            (mass_drop - dual.cycle_mass).abs() <= 1e-12 * (1.0 + t.mass_f64()),
            "instance {i}: {mass_drop} vs {}",
            dual.cycle_mass
        );
        if t.is_acyclic() {
            assert_eq!(dual.bar_norm.to_bits(), dual.l_norm.to_bits(), "instance {i}");
            assert_eq!(dual.cycle_mass, 0.0, "instance {i}");
            lossless += 1;
        }
    }
    println!(
        "criterion 4 (100 dual superpositions): PASS — {lossless} acyclic cases bit-exact"
    );
}

#[test]
fn acceptance_5_energy_equivalence_across_instances_fields_exponents() {
    let mut worst_spread = 0.0f64;
    let mut reports = 0;
    for seed in 0..30u64 {
        let inst = instance_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x1234567));
        for _ in 0..5 {
            let f = random_field(&mut rng, inst.n_vertices());
            for p in [1.5, 2.0, 3.0] {
                let report = equivalence_report(&inst, &f, p, &ReportConfig::default()).unwrap();
                assert!(
                    report.passed,
                    "seed {seed} p {p}: failing verdicts {:?}\n{report:#?}",
                    report.verdicts.failures()
                );
                let spread = report.chain.iter().cloned().fold(f64::MIN, f64::max)
                    - report.chain.iter().cloned().fold(f64::MAX, f64::min);
                worst_spread = worst_spread.max(spread / report.f_energy.abs().max(1.0));
                reports += 1;
            }
        }
    }
    println!(
        "criterion 5 ({reports} equivalence reports, 30 instances × 5 fields × 3 exponents): \
         PASS — worst relative chain spread {worst_spread:.2e}"
    );
}

#[test]
fn acceptance_6_atoms_separate_lipschitz_from_sobolev_energy() {
    // Star with three unit-atom leaves and the odd field (1, 1, −1): the
    // Lipschitz energy strictly exceeds the Sobolev energy by the atom
    // term, while the relaxed and weak energies agree with the conjugate
    // value. The finest raw competitor sits (32/30)^{p−1} above the limit,
    // within 10% at p = 2.
    let inst = Arc::new(build_instance(&GeneratorSpec::new(Topology::Star { k: 3 })).unwrap());
    let f = vec![0.0, 1.0, 1.0, -1.0];
    let p = 2.0;
    let report = equivalence_report(&inst, &f, p, &ReportConfig::default()).unwrap();
    assert!(report.passed, "{:?}", report.verdicts.failures());

    let f_energy = report.f_energy;
    assert!((f_energy - 1.5).abs() < 1e-14);
    assert!((report.e_lip - 3.5).abs() < 1e-14);
    assert!(report.e_lip - report.e_w > 1.0, "strict gap");

    let (k, raw) = *report.relax_sequence.last().unwrap();
    assert_eq!(k, 32);
    let overshoot = raw / f_energy - 1.0;
    let predicted = (32.0f64 / 30.0).powf(p - 1.0) - 1.0;
    assert!((overshoot - predicted).abs() < 1e-12, "{overshoot} vs {predicted}");
    assert!(overshoot < 0.10, "raw competitor within 10% of the limit");
    assert!((report.e_h - f_energy).abs() <= 1e-12 * (1.0 + f_energy));
    println!(
        "criterion 6 (atom strictness on the 3-star): PASS — \
         E_lip − E_W = {:.3}, raw overshoot {:.4} < 0.10",
        report.e_lip - report.e_w,
        overshoot
    );
}

#[test]
fn acceptance_7_minimal_gradients_are_local() {
    let mut pairs = 0;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let inst = instance_for(seed + 2); // skip degenerate two-vertex paths
        let n = inst.n_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xfeed));
        let f = random_field(&mut rng, n);

        // A connected-ish neighbourhood: a vertex, its neighbours, and
        // their neighbours.
        let start = pick(&mut rng, n);
        let mut subset: HashSet<usize> = HashSet::from([start]);
        for _ in 0..2 {
            for v in subset.clone() {
                for &(e, _) in inst.incident(v) {
                    let (t, h) = inst.ends(e);
                    subset.insert(t);
                    subset.insert(h);
                }
            }
        }
        let mut subset: Vec<usize> = subset.into_iter().collect();
        subset.sort_unstable();

        let (piece, map) = restrict(&inst, &subset).unwrap();
        let f_piece: Vec<f64> = map.vertices.iter().map(|&v| f[v]).collect();
        let p = [1.5, 2.0, 3.0][(seed % 3) as usize];
        let full = min_weak_upper_gradient(&inst, &f, p, None).unwrap();
        let local = min_weak_upper_gradient(&piece, &f_piece, p, None).unwrap();
        for (new_e, &old_e) in map.edges.iter().enumerate() {
            let diff = (local.density.edge[new_e] - full.density.edge[old_e]).abs();
            worst = worst.max(diff);
            assert!(diff <= 1e-12, "seed {seed} edge {old_e}: diff {diff}");
        }
        pairs += 1;
    }
    println!(
        "criterion 7 ({pairs} restriction pairs): PASS — \
         worst gradient discrepancy {worst:.2e} ≤ 1e-12"
    );
}

#[test]
fn acceptance_8_norm_duality_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1a1);
    let exponents = [1.0, 1.3, 1.5, 2.0, 3.0, 7.5, f64::INFINITY];
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let dim = 1 + pick(&mut rng, 4);
        let r = exponents[pick(&mut rng, exponents.len())];
        let norm = if i % 2 == 0 {
            Norm::lr(dim, r).unwrap()
        } else {
            let w: Vec<f64> = (0..dim).map(|_| uniform(&mut rng, 0.2, 3.0)).collect();
            Norm::weighted_lr(r, w).unwrap()
        };
        let dual = norm.dual();
        let x: Vec<f64> = (0..dim).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();

        // Hölder: |⟨x,y⟩| ≤ ‖x‖·‖y‖_*.
        let pairing: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let bound = norm.eval(&x).unwrap() * dual.eval(&y).unwrap();
        let slack = 1e-9 * (1.0 + bound);
        assert!(pairing.abs() <= bound + slack, "tuple {i}: {pairing} > {bound}");
        worst = worst.max(pairing.abs() - bound);

        // The second conjugate returns the original norm.
        let double = dual.dual();
        let nx = norm.eval(&x).unwrap();
        let ddx = double.eval(&x).unwrap();
        assert!((nx - ddx).abs() <= 1e-9 * (1.0 + nx), "tuple {i}: {nx} vs {ddx}");

        // Triangle inequality and homogeneity.
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = norm.eval(&sum).unwrap();
        let rhs = nx + norm.eval(&y).unwrap();
        assert!(lhs <= rhs + 1e-9 * (1.0 + rhs), "tuple {i}");
        let scaled: Vec<f64> = x.iter().map(|a| -2.5 * a).collect();
        let hom = norm.eval(&scaled).unwrap();
        assert!((hom - 2.5 * nx).abs() <= 1e-9 * (1.0 + nx), "tuple {i}");
    }
    println!(
        "criterion 8 (10000 norm tuples: Hölder, double dual, triangle, homogeneity): PASS — \
         worst Hölder excess {worst:.2e}"
    );
}
