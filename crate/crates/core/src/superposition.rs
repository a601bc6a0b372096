//! Superposition: weighted path plans, their occupation geometry, and the
//! exact decomposition of acyclic flows into such plans.
//!
//! A plan is a finite family of walks with positive rational weights. Its
//! occupation measure charges each edge with the total weight of the
//! traversals through it, the barycenter is the occupation density relative
//! to the edge weight, and the boundary is the signed endpoint distribution.
//! `decompose_acyclic` inverts this picture: every acyclic flow is the
//! current of a plan whose occupation density reproduces |J| edge by edge,
//! with all bookkeeping done in rational arithmetic so the identities hold
//! exactly, not merely to rounding.

use std::sync::Arc;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::calculus::check_exponent;
use crate::currents::Current1;
use crate::exact::{rat_from_f64, rat_to_f64, ExactNum, Rat};
use crate::space::{DensityField, Instance};
use crate::{Error, Result};

/// One walk of a plan: consecutive vertices joined by edges, carrying a
/// positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPath {
    pub vertices: Vec<usize>,
    pub weight: Rat,
}

/// A finite superposition of weighted walks on a fixed instance.
#[derive(Debug, Clone)]
pub struct Plan {
    inst: Arc<Instance>,
    paths: Vec<PlanPath>,
    /// Resolved traversals per path: (edge, +1 if walked tail→head).
    traversals: Vec<Vec<(usize, i8)>>,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    paths: Vec<PathFile>,
}

#[derive(Serialize, Deserialize)]
struct PathFile {
    vertices: Vec<usize>,
    weight: ExactNum,
}

impl Plan {
    pub fn new(inst: Arc<Instance>, paths: Vec<PlanPath>) -> Result<Plan> {
        let n = inst.n_vertices();
        let mut traversals = Vec::with_capacity(paths.len());
        for (k, path) in paths.iter().enumerate() {
            let bad = |detail: String| Error::InvalidWalk { path: k, detail };
            if !path.weight.is_positive() {
                return Err(bad(format!("weight {} is not positive", path.weight)));
            }
            if path.vertices.len() < 2 {
                return Err(bad("needs at least one edge".into()));
            }
            let mut seq = Vec::with_capacity(path.vertices.len() - 1);
            for pair in path.vertices.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if a >= n || b >= n {
                    return Err(bad(format!("vertex {} out of range", a.max(b))));
                }
                // Parallel edges are excluded by instance validation, so
                // the connecting edge is unique when it exists.
                let hit = inst.incident(a).iter().find(|&&(e, _)| {
                    let (t, h) = inst.ends(e);
                    t == b || h == b
                });
                match hit {
                    Some(&(e, sign_at_a)) => seq.push((e, -sign_at_a)),
                    None => return Err(bad(format!("no edge joins {a} and {b}"))),
                }
            }
            traversals.push(seq);
        }
        Ok(Plan { inst, paths, traversals })
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.inst
    }

    pub fn paths(&self) -> &[PlanPath] {
        &self.paths
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn traversals(&self, k: usize) -> &[(usize, i8)] {
        &self.traversals[k]
    }

    pub fn path_length(&self, k: usize) -> Rat {
        self.traversals[k].iter().map(|&(e, _)| self.inst.length_rat(e).clone()).sum()
    }

    /// Signed endpoint distribution: −weight at each start, +weight at each end.
    pub fn boundary_rat(&self) -> Vec<Rat> {
        let mut b = vec![Rat::zero(); self.inst.n_vertices()];
        for path in &self.paths {
            b[path.vertices[0]] -= &path.weight;
            b[*path.vertices.last().unwrap()] += &path.weight;
        }
        b
    }

    pub fn boundary(&self) -> Vec<f64> {
        self.boundary_rat().iter().map(rat_to_f64).collect()
    }

    /// Total traversal weight per edge, ignoring direction.
    pub fn occupation(&self) -> Vec<Rat> {
        let mut occ = vec![Rat::zero(); self.inst.n_edges()];
        for (k, seq) in self.traversals.iter().enumerate() {
            for &(e, _) in seq {
                occ[e] += &self.paths[k].weight;
            }
        }
        occ
    }

    /// Occupation density relative to μ: occ_e/w_e on edges, zero on atoms.
    pub fn barycenter(&self) -> DensityField {
        let occ = self.occupation();
        let edge = (0..self.inst.n_edges())
            .map(|e| rat_to_f64(&(&occ[e] / self.inst.density_rat(e))))
            .collect();
        DensityField { edge, vertex: vec![0.0; self.inst.n_vertices()] }
    }

    /// The signed flow induced by the plan.
    pub fn current(&self) -> Current1 {
        let mut j = vec![Rat::zero(); self.inst.n_edges()];
        for (k, seq) in self.traversals.iter().enumerate() {
            for &(e, dir) in seq {
                if dir == 1 {
                    j[e] += &self.paths[k].weight;
                } else {
                    j[e] -= &self.paths[k].weight;
                }
            }
        }
        Current1::new(self.inst.clone(), j).expect("plan flows live on their own instance")
    }

    /// Total length-weighted mass Σ_k c_k·length(path k).
    pub fn mass_rat(&self) -> Rat {
        (0..self.paths.len()).map(|k| &self.paths[k].weight * self.path_length(k)).sum()
    }

    pub fn mass(&self) -> f64 {
        rat_to_f64(&self.mass_rat())
    }

    pub fn to_json_string(&self) -> String {
        let file = PlanFile {
            paths: self
                .paths
                .iter()
                .map(|p| PathFile {
                    vertices: p.vertices.clone(),
                    weight: ExactNum(p.weight.clone()),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(inst: Arc<Instance>, s: &str) -> Result<Plan> {
        let file: PlanFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let paths = file
            .paths
            .into_iter()
            .map(|p| PlanPath { vertices: p.vertices, weight: p.weight.0 })
            .collect();
        Plan::new(inst, paths)
    }
}

/// Decompose an acyclic flow into a plan with occupation density exactly
/// |J|. Rejects flows whose sign-oriented support contains a directed cycle.
///
/// Paths are stripped deterministically: repeatedly start at the
/// lowest-index vertex with negative residual boundary, follow the
/// lowest-index outgoing residual edge until reaching a sink, and subtract
/// the minimal traversed magnitude. Residual signs only shrink toward zero,
/// so the support digraph stays acyclic and every walk is simple.
pub fn decompose_acyclic(t: &Current1) -> Result<Plan> {
    if let Some(cycle) = t.find_directed_cycle() {
        return Err(Error::CyclicInput(cycle));
    }
    let inst = t.instance().clone();
    let n = inst.n_vertices();
    let mut j: Vec<Rat> = t.coefficients().to_vec();
    let mut boundary = t.boundary();
    let mut paths = Vec::new();

    while let Some(v0) = (0..n).find(|&v| boundary[v].is_negative()) {
        let mut vertices = vec![v0];
        let mut walk: Vec<(usize, i8)> = Vec::new();
        let mut v = v0;
        loop {
            let mut next: Option<(usize, i8, usize)> = None;
            for &(e, sign) in inst.incident(v) {
                if j[e].is_zero() {
                    continue;
                }
                let outgoing =
                    (sign == -1 && j[e].is_positive()) || (sign == 1 && j[e].is_negative());
                if outgoing && next.map_or(true, |(best, _, _)| e < best) {
                    let (tail, head) = inst.ends(e);
                    let other = if v == tail { head } else { tail };
                    next = Some((e, -sign, other));
                }
            }
            let Some((e, dir, other)) = next else { break };
            walk.push((e, dir));
            vertices.push(other);
            v = other;
        }
        let weight = walk
            .iter()
            .map(|&(e, _)| j[e].abs())
            .min()
            .expect("a residual source has an outgoing edge");
        for &(e, dir) in &walk {
            if dir == 1 {
                j[e] -= &weight;
            } else {
                j[e] += &weight;
            }
        }
        boundary[v0] += &weight;
        boundary[v] -= &weight;
        paths.push(PlanPath { vertices, weight });
    }
    debug_assert!(j.iter().all(Rat::is_zero), "acyclic flow decomposes completely");
    Plan::new(inst, paths)
}

/// Plan summary: boundary, barycenter, mass, and endpoint densities
/// relative to the vertex atoms (membership in the admissible class
/// requires the endpoint distribution to charge only atoms).
#[derive(Debug, Clone)]
pub struct PlanStats {
    pub boundary: Vec<f64>,
    pub barycenter: DensityField,
    pub mass: f64,
    pub start_density: Vec<f64>,
    pub end_density: Vec<f64>,
    pub in_bq: bool,
}

pub fn plan_stats(plan: &Plan) -> PlanStats {
    let inst = plan.instance();
    let n = inst.n_vertices();
    let mut start_mass = vec![Rat::zero(); n];
    let mut end_mass = vec![Rat::zero(); n];
    for path in plan.paths() {
        start_mass[path.vertices[0]] += &path.weight;
        end_mass[*path.vertices.last().unwrap()] += &path.weight;
    }
    let mut in_bq = true;
    let mut densities = |mass: &[Rat]| -> Vec<f64> {
        (0..n)
            .map(|v| {
                if mass[v].is_zero() {
                    0.0
                } else if inst.atom_rat(v).is_zero() {
                    in_bq = false;
                    f64::INFINITY
                } else {
                    rat_to_f64(&(&mass[v] / inst.atom_rat(v)))
                }
            })
            .collect()
    };
    let start_density = densities(&start_mass);
    let end_density = densities(&end_mass);
    PlanStats {
        boundary: plan.boundary(),
        barycenter: plan.barycenter(),
        mass: plan.mass(),
        start_density,
        end_density,
        in_bq,
    }
}

/// A Beckmann dual element rendered as a plan, with the cycle part removed.
#[derive(Debug, Clone)]
pub struct DualPlan {
    pub plan: Plan,
    /// (1/q)·Σ_e m_e·Bar_e^q for the plan's barycenter.
    pub bar_norm: f64,
    /// (1/q)·Σ_e m_e·|L_e|^q for the input dual element.
    pub l_norm: f64,
    /// Length-weighted mass of the removed cycle part.
    pub cycle_mass: f64,
}

/// Convert a dual edge field L into a plan via the flow J_e = w_e·L_e, with
/// exact float-to-rational conversion so the acyclic case loses nothing:
/// when no cycles are removed, `bar_norm` equals `l_norm` bit for bit.
pub fn plan_from_dual(inst: Arc<Instance>, l: &[f64], q: f64) -> Result<DualPlan> {
    check_exponent(q)?;
    if l.len() != inst.n_edges() {
        return Err(Error::DimensionMismatch { expected: inst.n_edges(), got: l.len() });
    }
    let mut j = Vec::with_capacity(l.len());
    for e in 0..l.len() {
        j.push(inst.density_rat(e) * rat_from_f64(l[e])?);
    }
    let t = Current1::new(inst.clone(), j)?;
    let (cycle, acyclic) = t.remove_cycles();
    let plan = decompose_acyclic(&acyclic)?;
    let bar = plan.barycenter();
    let q_energy = |x: &[f64]| -> f64 {
        (0..x.len()).map(|e| inst.edge_mass(e) * x[e].abs().powf(q)).sum::<f64>() / q
    };
    let bar_norm = q_energy(&bar.edge);
    let l_norm = q_energy(l);
    Ok(DualPlan { plan, bar_norm, l_norm, cycle_mass: cycle.mass_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use crate::space::{build_instance, EdgeData, GeneratorSpec, Topology};

    fn arc(spec: GeneratorSpec) -> Arc<Instance> {
        Arc::new(build_instance(&spec).unwrap())
    }

    /// s(0) → a(1) → t(3) and s(0) → b(2) → t(3), unit everything.
    fn diamond() -> Arc<Instance> {
        let mut data = build_instance(&GeneratorSpec::new(Topology::Path { n: 4 })).unwrap().data();
        data.edges.clear();
        for (tail, head) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            data.edges.push(EdgeData { tail, head, w: rat_int(1), length: Some(rat_int(1)) });
        }
        Arc::new(data.build().unwrap())
    }

    fn rat_vec(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn diamond_splits_into_two_paths() {
        let inst = diamond();
        let t = Current1::new(inst.clone(), rat_vec(&[1, 1, 1, 1])).unwrap();
        let plan = decompose_acyclic(&t).unwrap();
        assert_eq!(plan.n_paths(), 2);
        assert_eq!(plan.paths()[0].vertices, vec![0, 1, 3]);
        assert_eq!(plan.paths()[1].vertices, vec![0, 2, 3]);
        assert_eq!(plan.paths()[0].weight, rat_int(1));
        assert_eq!(plan.mass_rat(), rat_int(4));
        assert_eq!(plan.occupation(), rat_vec(&[1, 1, 1, 1]));
        assert_eq!(plan.current().coefficients(), t.coefficients());
        assert_eq!(plan.boundary_rat(), rat_vec(&[-2, 0, 0, 2]));
    }

    #[test]
    fn single_edge_and_zero() {
        let inst = arc(GeneratorSpec::new(Topology::Path { n: 2 }));
        let t = Current1::new(inst.clone(), vec![rat(3, 2)]).unwrap();
        let plan = decompose_acyclic(&t).unwrap();
        assert_eq!(plan.n_paths(), 1);
        assert_eq!(plan.paths()[0].vertices, vec![0, 1]);
        assert_eq!(plan.paths()[0].weight, rat(3, 2));

        let zero = Current1::zero(inst);
        assert_eq!(decompose_acyclic(&zero).unwrap().n_paths(), 0);
    }

    #[test]
    fn reversed_flow_walks_backwards() {
        let inst = arc(GeneratorSpec::new(Topology::Path { n: 3 }));
        let t = Current1::new(inst, rat_vec(&[-1, -1])).unwrap();
        let plan = decompose_acyclic(&t).unwrap();
        assert_eq!(plan.paths()[0].vertices, vec![2, 1, 0]);
        assert_eq!(plan.current().coefficients(), t.coefficients());
    }

    #[test]
    fn cyclic_flow_is_rejected() {
        let mut data = build_instance(&GeneratorSpec::new(Topology::Path { n: 3 })).unwrap().data();
        data.edges.push(EdgeData { tail: 2, head: 0, w: rat_int(1), length: Some(rat_int(1)) });
        let inst = Arc::new(data.build().unwrap());
        let t = Current1::new(inst, rat_vec(&[1, 1, 1])).unwrap();
        let err = decompose_acyclic(&t).unwrap_err();
        assert!(matches!(err, Error::CyclicInput(_)), "{err}");
    }

    #[test]
    fn weights_scale_linearly() {
        let inst = diamond();
        let t = Current1::new(inst.clone(), rat_vec(&[1, 1, 1, 1])).unwrap();
        let doubled = t.add(&t).unwrap();
        let plan = decompose_acyclic(&doubled).unwrap();
        assert_eq!(plan.paths()[0].weight, rat_int(2));
        assert_eq!(plan.mass_rat(), rat_int(8));
    }

    #[test]
    fn occupation_identity_against_path_sums() {
        // Σ_e m_e·Bar_e·h_e = Σ_k c_k·Σ_{e∈path k} ℓ_e·h_e for any edge data h,
        // verified in exact arithmetic.
        let inst = diamond();
        let t = Current1::new(inst.clone(), rat_vec(&[3, 2, 3, 2])).unwrap();
        let plan = decompose_acyclic(&t).unwrap();
        let h = rat_vec(&[5, -1, 2, 7]);
        let occ = plan.occupation();
        let lhs: Rat = (0..4).map(|e| &occ[e] * inst.length_rat(e) * &h[e]).sum();
        let rhs: Rat = (0..plan.n_paths())
            .map(|k| {
                let along: Rat = plan
                    .traversals(k)
                    .iter()
                    .map(|&(e, _)| inst.length_rat(e) * &h[e])
                    .sum();
                &plan.paths()[k].weight * along
            })
            .sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn plan_json_round_trip() {
        let inst = diamond();
        let plan = Plan::new(
            inst.clone(),
            vec![
                PlanPath { vertices: vec![0, 1, 3], weight: rat(1, 3) },
                PlanPath { vertices: vec![0, 2, 3], weight: rat_int(2) },
            ],
        )
        .unwrap();
        let text = plan.to_json_string();
        assert!(text.contains("\"1/3\""), "exact weight survives: {text}");
        let back = Plan::from_json_str(inst, &text).unwrap();
        assert_eq!(back.paths(), plan.paths());
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn invalid_walks_are_rejected() {
        let inst = diamond();
        let no_edge = Plan::new(
            inst.clone(),
            vec![PlanPath { vertices: vec![1, 2], weight: rat_int(1) }],
        );
        assert!(matches!(no_edge.unwrap_err(), Error::InvalidWalk { path: 0, .. }));

        let bad_weight = Plan::new(
            inst.clone(),
            vec![PlanPath { vertices: vec![0, 1], weight: rat_int(0) }],
        );
        assert!(matches!(bad_weight.unwrap_err(), Error::InvalidWalk { .. }));

        let too_short = Plan::new(inst, vec![PlanPath { vertices: vec![2], weight: rat_int(1) }]);
        assert!(matches!(too_short.unwrap_err(), Error::InvalidWalk { .. }));
    }

    #[test]
    fn stats_report_endpoint_densities() {
        let inst = diamond();
        let t = Current1::new(inst, rat_vec(&[1, 1, 1, 1])).unwrap();
        let plan = decompose_acyclic(&t).unwrap();
        let stats = plan_stats(&plan);
        assert!(stats.in_bq);
        assert_eq!(stats.start_density[0], 2.0);
        assert_eq!(stats.end_density[3], 2.0);
        assert_eq!(stats.boundary, vec![-2.0, 0.0, 0.0, 2.0]);
        assert_eq!(stats.mass, 4.0);
        assert_eq!(stats.barycenter.edge, vec![1.0; 4]);

        // Atom-free endpoints are flagged.
        let spec = GeneratorSpec {
            atom: rat_int(0),
            ..GeneratorSpec::new(Topology::Path { n: 2 })
        };
        let bare = arc(spec);
        let t = Current1::new(bare, vec![rat_int(1)]).unwrap();
        let stats = plan_stats(&decompose_acyclic(&t).unwrap());
        assert!(!stats.in_bq);
        assert!(stats.start_density[0].is_infinite());
    }

    #[test]
    fn dual_plan_without_cycles_is_lossless() {
        let inst = arc(GeneratorSpec::new(Topology::Path { n: 2 }));
        let dual = plan_from_dual(inst, &[1.0], 2.0).unwrap();
        assert_eq!(dual.bar_norm, dual.l_norm);
        assert_eq!(dual.bar_norm, 0.5);
        assert_eq!(dual.cycle_mass, 0.0);

        let inst = diamond();
        let dual = plan_from_dual(inst, &[0.3, 0.7, 0.3, 0.7], 1.5).unwrap();
        assert_eq!(dual.bar_norm, dual.l_norm);
        assert_eq!(dual.cycle_mass, 0.0);
        assert_eq!(dual.plan.n_paths(), 2);
    }

    #[test]
    fn dual_plan_drops_cycle_energy() {
        // Diamond plus a closing edge t→s carrying a circulation: the cycle
        // part holds mass 3 and the surviving plan is the single path s→b→t.
        let mut data = diamond().data();
        data.edges.push(EdgeData { tail: 3, head: 0, w: rat_int(1), length: Some(rat_int(1)) });
        let inst = Arc::new(data.build().unwrap());
        let dual = plan_from_dual(inst, &[1.0, 1.0, 1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(dual.cycle_mass, 3.0);
        assert_eq!(dual.plan.n_paths(), 1);
        assert_eq!(dual.plan.paths()[0].vertices, vec![0, 2, 3]);
        assert!(dual.bar_norm < dual.l_norm);
        assert_eq!(dual.bar_norm, 1.0);
        assert_eq!(dual.l_norm, 2.5);
    }

    #[test]
    fn empty_plan_from_pure_circulation() {
        let mut data = build_instance(&GeneratorSpec::new(Topology::Path { n: 3 })).unwrap().data();
        data.edges.push(EdgeData { tail: 2, head: 0, w: rat_int(1), length: Some(rat_int(1)) });
        let inst = Arc::new(data.build().unwrap());
        let dual = plan_from_dual(inst, &[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(dual.plan.n_paths(), 0);
        assert_eq!(dual.bar_norm, 0.0);
        assert_eq!(dual.cycle_mass, 3.0);
    }
}
