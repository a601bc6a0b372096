//! Discrete normal 1-currents: signed edge flows with boundary, mass,
//! subcurrent algebra, and deterministic cycle removal.
//!
//! Coefficients are exact rationals so every identity here (boundary
//! conservation, mass additivity of the cycle split) holds with zero
//! tolerance. Flows arriving from floating-point solvers go through
//! [`Current1::from_floats`], which snaps near-zero entries and marks the
//! current as float-born; comparisons then use a 1e-12 relative slack
//! instead of exact equality.
//!
//! Acyclicity is defined through the sign-oriented support digraph (edge e
//! points tail→head when J_e > 0, head→tail when J_e < 0). For edge flows
//! this is equivalent to the subcurrent formulation — a nonzero cycle
//! subcurrent must be sign-compatible edgewise, so its support is a
//! boundaryless subgraph of the oriented support, which contains a
//! directed cycle; conversely cancelling along a directed cycle exhibits a
//! nonzero cycle subcurrent.

use std::sync::Arc;

use num::{Signed, Zero};

use crate::exact::{rat_from_f64, rat_to_f64, Rat};
use crate::space::Instance;
use crate::{Error, Result};

/// A signed edge flow J with boundary b_v = Σ_e σ(v,e)·J_e and mass
/// Σ_e ℓ_e·|J_e|.
#[derive(Debug, Clone)]
pub struct Current1 {
    inst: Arc<Instance>,
    j: Vec<Rat>,
    float_mode: bool,
}

impl Current1 {
    pub fn new(inst: Arc<Instance>, j: Vec<Rat>) -> Result<Self> {
        if j.len() != inst.n_edges() {
            return Err(Error::DimensionMismatch { expected: inst.n_edges(), got: j.len() });
        }
        Ok(Current1 { inst, j, float_mode: false })
    }

    /// Build from solver output: entries within 1e-13·max|J| of zero are
    /// snapped to exact zero, the rest convert exactly (doubles are
    /// dyadic rationals).
    pub fn from_floats(inst: Arc<Instance>, j: &[f64]) -> Result<Self> {
        if j.len() != inst.n_edges() {
            return Err(Error::DimensionMismatch { expected: inst.n_edges(), got: j.len() });
        }
        let peak = j.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let threshold = 1e-13 * peak;
        let mut coeffs = Vec::with_capacity(j.len());
        for &x in j {
            if x.abs() <= threshold {
                coeffs.push(Rat::zero());
            } else {
                coeffs.push(rat_from_f64(x)?);
            }
        }
        Ok(Current1 { inst, j: coeffs, float_mode: true })
    }

    pub fn zero(inst: Arc<Instance>) -> Self {
        let n = inst.n_edges();
        Current1 { inst, j: vec![Rat::zero(); n], float_mode: false }
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.inst
    }

    pub fn coefficients(&self) -> &[Rat] {
        &self.j
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.j.iter().map(rat_to_f64).collect()
    }

    pub fn float_mode(&self) -> bool {
        self.float_mode
    }

    pub fn is_zero(&self) -> bool {
        self.j.iter().all(Rat::is_zero)
    }

    fn check_same(&self, other: &Current1) -> Result<()> {
        if Arc::ptr_eq(&self.inst, &other.inst) || self.inst.same_shape(&other.inst) {
            Ok(())
        } else {
            Err(Error::InstanceMismatch)
        }
    }

    /// Net inflow per vertex, as a signed vertex measure. Satisfies
    /// ⟨f, boundary⟩ = Σ_e ℓ_e·J_e·(df)_e for every vertex function f.
    pub fn boundary(&self) -> Vec<Rat> {
        let mut b = vec![Rat::zero(); self.inst.n_vertices()];
        for e in 0..self.j.len() {
            if self.j[e].is_zero() {
                continue;
            }
            let (t, h) = self.inst.ends(e);
            b[h] += &self.j[e];
            b[t] -= &self.j[e];
        }
        b
    }

    pub fn boundary_f64(&self) -> Vec<f64> {
        self.boundary().iter().map(rat_to_f64).collect()
    }

    pub fn mass(&self) -> Rat {
        let mut m = Rat::zero();
        for e in 0..self.j.len() {
            if !self.j[e].is_zero() {
                m += self.inst.length_rat(e) * self.j[e].abs();
            }
        }
        m
    }

    pub fn mass_f64(&self) -> f64 {
        rat_to_f64(&self.mass())
    }

    pub fn add(&self, other: &Current1) -> Result<Current1> {
        self.check_same(other)?;
        let j = self.j.iter().zip(&other.j).map(|(a, b)| a + b).collect();
        Ok(Current1 { inst: self.inst.clone(), j, float_mode: self.float_mode || other.float_mode })
    }

    pub fn sub(&self, other: &Current1) -> Result<Current1> {
        self.check_same(other)?;
        let j = self.j.iter().zip(&other.j).map(|(a, b)| a - b).collect();
        Ok(Current1 { inst: self.inst.clone(), j, float_mode: self.float_mode || other.float_mode })
    }

    pub fn neg(&self) -> Current1 {
        Current1 {
            inst: self.inst.clone(),
            j: self.j.iter().map(|x| -x).collect(),
            float_mode: self.float_mode,
        }
    }

    /// Edgewise mass-additivity test |S_e| + |T_e − S_e| = |T_e|: exact for
    /// rational-born currents, within 1e-12·max|T| for float-born ones.
    pub fn is_subcurrent_of(&self, t: &Current1) -> Result<bool> {
        self.check_same(t)?;
        if self.float_mode || t.float_mode {
            let scale = t.j.iter().map(|x| rat_to_f64(&x.abs())).fold(1.0f64, f64::max);
            Ok(self.j.iter().zip(&t.j).all(|(s, tc)| {
                let defect = s.abs() + (tc - s).abs() - tc.abs();
                rat_to_f64(&defect).abs() <= 1e-12 * scale
            }))
        } else {
            Ok(self
                .j
                .iter()
                .zip(&t.j)
                .all(|(s, tc)| s.abs() + (tc - s).abs() == tc.abs()))
        }
    }

    /// Splits T = C + A with ∂C = 0, C a subcurrent of T, and A acyclic;
    /// mass(C) + mass(A) = mass(T) exactly. Cancellation is deterministic:
    /// depth-first from the lowest-index vertex, incident edges scanned in
    /// edge order, subtracting the minimum |J| around each directed cycle
    /// found (each step zeroes at least one edge).
    pub fn remove_cycles(&self) -> (Current1, Current1) {
        let mut res = self.j.clone();
        let mut cyc = vec![Rat::zero(); res.len()];
        while let Some((_, edges)) = directed_cycle(&self.inst, &res) {
            let delta = edges.iter().map(|&(e, _)| res[e].abs()).min().expect("cycle is nonempty");
            for &(e, dir) in &edges {
                let signed = if dir > 0 { delta.clone() } else { -delta.clone() };
                res[e] -= &signed;
                cyc[e] += &signed;
            }
        }
        let c = Current1 { inst: self.inst.clone(), j: cyc, float_mode: self.float_mode };
        let a = Current1 { inst: self.inst.clone(), j: res, float_mode: self.float_mode };
        (c, a)
    }

    pub fn is_acyclic(&self) -> bool {
        directed_cycle(&self.inst, &self.j).is_none()
    }

    /// A directed cycle in the sign-oriented support, as its vertex list,
    /// if one exists.
    pub fn find_directed_cycle(&self) -> Option<Vec<usize>> {
        directed_cycle(&self.inst, &self.j).map(|(verts, _)| verts)
    }
}

/// Depth-first search for a directed cycle in the sign-oriented support of
/// `j`. Returns the cycle's vertices and its edges as (index, traversal
/// sign relative to the stored orientation).
fn directed_cycle(inst: &Instance, j: &[Rat]) -> Option<(Vec<usize>, Vec<(usize, i8)>)> {
    let n = inst.n_vertices();
    let mut color = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        // (vertex, cursor into its incident list, edge used to enter)
        let mut frames: Vec<(usize, usize, Option<(usize, i8)>)> = vec![(start, 0, None)];
        color[start] = 1;
        'dfs: while let Some(&(v, cursor, _)) = frames.last() {
            let inc = inst.incident(v);
            let mut cur = cursor;
            while cur < inc.len() {
                let (e, sign) = inc[cur];
                cur += 1;
                if j[e].is_zero() {
                    continue;
                }
                let dir: i8 = if j[e].is_positive() { 1 } else { -1 };
                let outgoing = (sign == -1 && dir == 1) || (sign == 1 && dir == -1);
                if !outgoing {
                    continue;
                }
                let (t, h) = inst.ends(e);
                let w = if dir == 1 { h } else { t };
                if color[w] == 1 {
                    let pos = frames.iter().position(|f| f.0 == w).expect("gray vertex is on the stack");
                    let verts = frames[pos..].iter().map(|f| f.0).collect();
                    let mut edges: Vec<(usize, i8)> =
                        frames[pos + 1..].iter().map(|f| f.2.expect("non-root frame has an entry edge")).collect();
                    edges.push((e, dir));
                    return Some((verts, edges));
                }
                if color[w] == 0 {
                    frames.last_mut().expect("frame exists").1 = cur;
                    color[w] = 1;
                    frames.push((w, 0, Some((e, dir))));
                    continue 'dfs;
                }
            }
            color[v] = 2;
            frames.pop();
        }
    }
    None
}
