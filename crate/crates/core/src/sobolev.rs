//! Sobolev energies and the equivalence machinery: minimal weak upper
//! gradients, relaxed slope energies along subdivisions, and the duality
//! chain that pins every definition to the same number.
//!
//! Three a priori different energies attach to a vertex field f with
//! exponent p:
//!
//!  * the Lipschitz-type energy, integrating the asymptotic slope against
//!    all of μ including vertex atoms;
//!  * the relaxed energy, the limit of Lipschitz energies of competitors
//!    along finer and finer edge subdivisions — flattening near vertices
//!    kills the atom contribution at the cost of steepening interior
//!    slopes by k/(k−2);
//!  * the weak (upper-gradient) energy, the least p-energy of a density
//!    satisfying the path inequality ∫ G ≥ |Δf| along test plans.
//!
//! The duality chain certifies their common value against the Beckmann
//! conjugate: plan lower bound ≤ conjugate lower bound ≤ cylinder energy =
//! weak energy, with equality throughout at the optimal dual slope.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::beckmann::{phi_p, solve_beckmann};
use crate::calculus::{
    check_exponent, cylinder_energy, density_energy, differential, lip_energy, mu_inner,
};
use crate::normed::conjugate_exponent;
use crate::space::{subdivide, DensityField, Instance, ScalarField};
use crate::superposition::{plan_from_dual, Plan};
use crate::{Error, Result};

/// Slack for inequalities that hold analytically and are only exposed to
/// rounding: chain monotonicity and the sandwich bounds.
const CHAIN_SLACK: f64 = 1e-9;

/// A p-integrable density together with its energy (1/p)∫ G^p dμ.
#[derive(Debug, Clone)]
pub struct WeakGradient {
    pub density: DensityField,
    pub value: f64,
}

/// Least p-energy density satisfying ∫_path G ≥ |f(end) − f(start)| along
/// every path of every plan in the family.
///
/// With `plans = None` the constraint family is exhaustive and the minimum
/// is attained at G = |df| on edges and 0 on atoms (vertex values are free
/// of constraints and only cost energy). A finite family yields a lower
/// bound, computed by an interior-point iteration on the edge values; the
/// family's paths must start and end on atoms.
pub fn min_weak_upper_gradient(
    inst: &Instance,
    f: &ScalarField,
    p: f64,
    plans: Option<&[Plan]>,
) -> Result<WeakGradient> {
    check_exponent(p)?;
    let df = differential(inst, f)?;
    let exact: Vec<f64> = df.iter().map(|x| x.abs()).collect();

    let Some(plans) = plans else {
        let density = DensityField { edge: exact, vertex: vec![0.0; inst.n_vertices()] };
        let value = density_energy(inst, &density, p)?;
        return Ok(WeakGradient { density, value });
    };

    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for plan in plans {
        if !plan.instance().same_shape(inst) {
            return Err(Error::InstanceMismatch);
        }
        for (k, path) in plan.paths().iter().enumerate() {
            for &v in [path.vertices[0], *path.vertices.last().unwrap()].iter() {
                if inst.atom(v) == 0.0 {
                    return Err(Error::NotInBq { vertex: v });
                }
            }
            let mut coef = vec![0.0; inst.n_edges()];
            for &(e, _) in plan.traversals(k) {
                coef[e] += inst.length(e);
            }
            let sparse: Vec<(usize, f64)> =
                coef.iter().enumerate().filter(|&(_, &c)| c != 0.0).map(|(e, &c)| (e, c)).collect();
            let gap = (f[*path.vertices.last().unwrap()] - f[path.vertices[0]]).abs();
            rows.push((sparse, gap));
        }
    }

    // Strictly feasible start: |df| + 1 clears every path constraint by at
    // least the path length.
    let x0: Vec<f64> = exact.iter().map(|g| g + 1.0).collect();
    let masses: Vec<f64> = (0..inst.n_edges()).map(|e| inst.edge_mass(e)).collect();
    let x = barrier_min(&masses, p, &rows, x0);
    let value = (0..x.len()).map(|e| masses[e] * x[e].powf(p)).sum::<f64>() / p;
    let density = DensityField { edge: x, vertex: vec![0.0; inst.n_vertices()] };
    Ok(WeakGradient { density, value })
}

/// Interior-point minimization of (1/p)Σ m_e x_e^p over x > 0 subject to
/// sparse inequalities a·x ≥ b, via the standard log-barrier path with
/// damped Newton steps.
fn barrier_min(m: &[f64], p: f64, rows: &[(Vec<(usize, f64)>, f64)], x0: Vec<f64>) -> Vec<f64> {
    let ne = x0.len();
    if ne == 0 {
        return x0;
    }
    let n_ineq = (rows.len() + ne) as f64;
    let mut x = x0;
    let mut t = 1.0;

    let objective = |x: &[f64], t: f64| -> f64 {
        let energy: f64 = (0..ne).map(|e| m[e] * x[e].powf(p)).sum::<f64>() / p;
        let barrier: f64 = rows
            .iter()
            .map(|(a, b)| (a.iter().map(|&(e, c)| c * x[e]).sum::<f64>() - b).ln())
            .sum::<f64>()
            + x.iter().map(|v| v.ln()).sum::<f64>();
        t * energy - barrier
    };

    while n_ineq / t > 1e-11 {
        for _ in 0..60 {
            let slacks: Vec<f64> = rows
                .iter()
                .map(|(a, b)| a.iter().map(|&(e, c)| c * x[e]).sum::<f64>() - b)
                .collect();
            let mut grad: Vec<f64> =
                (0..ne).map(|e| t * m[e] * x[e].powf(p - 1.0) - 1.0 / x[e]).collect();
            let mut h = DMatrix::zeros(ne, ne);
            for e in 0..ne {
                h[(e, e)] = t * m[e] * (p - 1.0) * x[e].powf(p - 2.0) + 1.0 / (x[e] * x[e]);
            }
            for (i, (a, _)) in rows.iter().enumerate() {
                let s = slacks[i];
                for &(e1, c1) in a {
                    grad[e1] -= c1 / s;
                    for &(e2, c2) in a {
                        h[(e1, e2)] += c1 * c2 / (s * s);
                    }
                }
            }
            let rhs = DVector::from_iterator(ne, grad.iter().map(|&g| -g));
            let dir = match Cholesky::new(h.clone()) {
                Some(ch) => ch.solve(&rhs),
                None => match h.lu().solve(&rhs) {
                    Some(d) => d,
                    None => break,
                },
            };
            let decrement: f64 = -grad.iter().zip(dir.iter()).map(|(g, d)| g * d).sum::<f64>();
            if decrement <= 2e-13 * (1.0 + t) {
                break;
            }

            // Largest step keeping every logarithm defined, then Armijo.
            let mut alpha: f64 = 1.0;
            for e in 0..ne {
                if dir[e] < 0.0 {
                    alpha = alpha.min(-0.99 * x[e] / dir[e]);
                }
            }
            for (i, (a, _)) in rows.iter().enumerate() {
                let along: f64 = a.iter().map(|&(e, c)| c * dir[e]).sum();
                if along < 0.0 {
                    alpha = alpha.min(-0.99 * slacks[i] / along);
                }
            }
            let base = objective(&x, t);
            loop {
                let trial: Vec<f64> = (0..ne).map(|e| x[e] + alpha * dir[e]).collect();
                if objective(&trial, t) <= base - 1e-4 * alpha * decrement {
                    x = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    break;
                }
            }
        }
        t *= 10.0;
    }
    x
}

/// Lipschitz energies of subdivision competitors, level by level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxSequence {
    /// (subdivision level k, competitor energy at that level).
    pub levels: Vec<(usize, f64)>,
    /// Relaxed energy: the flattened values converge to it like
    /// (k/(k−2))^{p−1}, so the finest level is corrected by that factor.
    pub e_h: f64,
}

/// Evaluate the relaxation along k-fold subdivisions. Levels ≤ 2 use the
/// affine interpolant (no flattening is possible with at most one interior
/// vertex); levels ≥ 3 use the competitor that is constant on the first
/// and last sub-edge of every base edge and affine in between.
pub fn relaxed_slope_via_subdivision(
    inst: &Instance,
    f: &ScalarField,
    p: f64,
    levels: &[usize],
) -> Result<RelaxSequence> {
    check_exponent(p)?;
    if f.len() != inst.n_vertices() {
        return Err(Error::DimensionMismatch { expected: inst.n_vertices(), got: f.len() });
    }
    if levels.is_empty() {
        return Err(Error::InvalidParameter("at least one subdivision level is required".into()));
    }
    let mut out = Vec::with_capacity(levels.len());
    for &k in levels {
        if k == 0 {
            return Err(Error::InvalidParameter("subdivision level 0 is not defined".into()));
        }
        let value = if k == 1 {
            lip_energy(inst, f, p)?
        } else {
            let (sub, map) = subdivide(inst, k)?;
            let g = if k == 2 {
                map.interpolate(f)?
            } else {
                let mut g = map.interpolate(f)?;
                for e in 0..inst.n_edges() {
                    let (tail, head) = inst.ends(e);
                    for j in 1..k {
                        let s = (j as f64 - 1.0) / (k as f64 - 2.0);
                        g[map.interior_vertex(e, j)] = f[tail] + (f[head] - f[tail]) * s;
                    }
                }
                g
            };
            lip_energy(&sub, &g, p)?
        };
        out.push((k, value));
    }
    let e_h = match out.iter().filter(|&&(k, _)| k >= 3).max_by_key(|&&(k, _)| k) {
        Some(&(k, v)) => v * ((k as f64 - 2.0) / k as f64).powf(p - 1.0),
        None => out.last().unwrap().1,
    };
    Ok(RelaxSequence { levels: out, e_h })
}

/// The four stations of the duality argument, evaluated at one field.
#[derive(Debug, Clone)]
pub struct DualityChain {
    /// ⟨f,∂π⟩ − (1/q)Σ m_e Bar_e^q for the plan carried by the optimal
    /// dual slope.
    pub plan: f64,
    /// ⟨f,g*⟩_μ − F*(g*) at g* = d*(φ_p(df)).
    pub fenchel: f64,
    /// (1/p)Σ m_e|df_e|^p.
    pub energy: f64,
    /// Minimal weak upper gradient energy.
    pub weak: f64,
    /// Mass lost to cycle removal when superposing the dual slope —
    /// zero, because gradient flows are acyclic.
    pub cycle_mass: f64,
    /// Constraint residual max|d*L − g*| of the dual solve.
    pub residual: f64,
    /// residual·Σ_v μ_v|f_v|: a bound on how far the plan and conjugate
    /// bounds can be displaced by the inexact divergence. Monotonicity of
    /// the chain holds analytically and numerically up to this amount.
    pub pairing_error_bound: f64,
    pub iterations: usize,
}

/// Evaluate plan bound ≤ conjugate bound ≤ cylinder energy = weak energy.
/// All four collapse to the same number: the chain is evaluated at the
/// maximizing slope g*, where Fenchel–Young holds with equality and the
/// dual flow superposes without cycle loss.
pub fn duality_chain(inst: &Arc<Instance>, f: &ScalarField, p: f64, tol: f64) -> Result<DualityChain> {
    check_exponent(p)?;
    let df = differential(inst, f)?;
    let l_star: Vec<f64> = df.iter().map(|&x| phi_p(x, p)).collect();
    let g_star = crate::calculus::adjoint(inst, &l_star)?;
    let q = conjugate_exponent(p);

    let sol = solve_beckmann(inst, &g_star, q, tol)?;
    let fenchel = mu_inner(inst, f, &g_star)? - sol.value;

    let dual = plan_from_dual(inst.clone(), &sol.l, q)?;
    let boundary = dual.plan.boundary();
    let pairing: f64 = (0..f.len()).map(|v| f[v] * boundary[v]).sum();
    let plan = pairing - dual.bar_norm;

    let energy = cylinder_energy(inst, f, p)?;
    let weak = min_weak_upper_gradient(inst, f, p, None)?.value;
    let mu_f_mass: f64 = (0..f.len()).map(|v| inst.lumped_mass(v) * f[v].abs()).sum();

    Ok(DualityChain {
        plan,
        fenchel,
        energy,
        weak,
        cycle_mass: dual.cycle_mass,
        residual: sol.residual,
        pairing_error_bound: sol.residual * mu_f_mass,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    /// Relative tolerance for the equivalence verdicts; defaults to 1e-6
    /// for q = 2 and 1e-4 otherwise.
    pub rel_tol: Option<f64>,
    /// Beckmann solver tolerance; defaults to 1e-10 for q = 2 and 1e-8
    /// otherwise.
    pub solver_tol: Option<f64>,
    /// Subdivision levels for the relaxation sequence.
    pub levels: Vec<usize>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { rel_tol: None, solver_tol: None, levels: vec![3, 4, 8, 16, 32] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdicts {
    /// plan ≤ fenchel ≤ energy ≤ weak, each up to rounding slack.
    pub chain_monotone: bool,
    /// max − min of the chain within the relative tolerance.
    pub chain_collapses: bool,
    /// |E_W − F| within the relative tolerance.
    pub ew_matches_f: bool,
    /// Relaxation values nonincreasing for levels ≥ 3 and matching the
    /// analytic factor (k/(k−2))^{p−1} to near machine precision.
    pub eh_trend: bool,
    /// Every energy lies between the plan lower bound and E_lip.
    pub sandwich: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.chain_monotone
            && self.chain_collapses
            && self.ew_matches_f
            && self.eh_trend
            && self.sandwich
    }

    /// Names of failing verdicts, for diagnostics.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.chain_monotone {
            out.push("chain_monotone");
        }
        if !self.chain_collapses {
            out.push("chain_collapses");
        }
        if !self.ew_matches_f {
            out.push("ew_matches_f");
        }
        if !self.eh_trend {
            out.push("eh_trend");
        }
        if !self.sandwich {
            out.push("sandwich");
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "F")]
    pub f_energy: f64,
    #[serde(rename = "E_lip")]
    pub e_lip: f64,
    pub relax_sequence: Vec<(usize, f64)>,
    #[serde(rename = "E_H")]
    pub e_h: f64,
    #[serde(rename = "E_W")]
    pub e_w: f64,
    /// [plan bound, conjugate bound, cylinder energy, weak energy].
    pub chain: [f64; 4],
    pub cycle_mass: f64,
    pub iterations: usize,
    pub verdicts: Verdicts,
    pub passed: bool,
}

/// Run the full equivalence experiment for one field: evaluate every
/// energy, the duality chain, and the verdicts that certify they agree.
pub fn equivalence_report(
    inst: &Arc<Instance>,
    f: &ScalarField,
    p: f64,
    cfg: &ReportConfig,
) -> Result<EquivalenceReport> {
    check_exponent(p)?;
    let q = conjugate_exponent(p);
    let rel_tol = cfg.rel_tol.unwrap_or(if q == 2.0 { 1e-6 } else { 1e-4 });
    let solver_tol = cfg.solver_tol.unwrap_or(if q == 2.0 { 1e-10 } else { 1e-8 });

    let f_energy = cylinder_energy(inst, f, p)?;
    let e_lip = lip_energy(inst, f, p)?;
    let relax = relaxed_slope_via_subdivision(inst, f, p, &cfg.levels)?;
    let chain = duality_chain(inst, f, p, solver_tol)?;
    let e_w = chain.weak;
    let values = [chain.plan, chain.fenchel, chain.energy, chain.weak];

    let scale = 1.0 + f_energy.abs();
    let slack = CHAIN_SLACK * scale + chain.pairing_error_bound;
    let rel = rel_tol * f_energy.abs().max(1.0);

    let chain_monotone = values.windows(2).all(|w| w[0] <= w[1] + slack);
    let spread = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    let chain_collapses = spread <= rel;
    let ew_matches_f = (e_w - f_energy).abs() <= rel;

    let mut eh_trend = true;
    let mut prev: Option<(usize, f64)> = None;
    for &(k, v) in relax.levels.iter().filter(|&&(k, _)| k >= 3) {
        let predicted = (k as f64 / (k as f64 - 2.0)).powf(p - 1.0) * f_energy;
        if (v - predicted).abs() > 1e-12 * scale {
            eh_trend = false;
        }
        if let Some((pk, pv)) = prev {
            if k >= pk && v > pv + 1e-12 * scale {
                eh_trend = false;
            }
        }
        prev = Some((k, v));
    }

    let sandwich = [f_energy, e_w, relax.e_h]
        .iter()
        .all(|&v| chain.plan - slack <= v && v <= e_lip + CHAIN_SLACK * scale);

    let verdicts = Verdicts { chain_monotone, chain_collapses, ew_matches_f, eh_trend, sandwich };
    let passed = verdicts.all();
    Ok(EquivalenceReport {
        p,
        q,
        f_energy,
        e_lip,
        relax_sequence: relax.levels,
        e_h: relax.e_h,
        e_w,
        chain: values,
        cycle_mass: chain.cycle_mass,
        iterations: chain.iterations,
        verdicts,
        passed,
    })
}
