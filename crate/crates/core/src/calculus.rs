//! The discrete differential, its adjoint, and the slope energies.
//!
//! For a vertex function f the differential is the edge slope
//! (df)_e = (f_head − f_tail)/ℓ_e. Its adjoint d* is taken with respect to
//! the lumped vertex pairing ⟨f,g⟩ = Σ_v μ_v f_v g_v and the edge pairing
//! ⟨df,L⟩ = Σ_e m_e (df)_e L_e, which yields the weighted graph divergence
//! below. The two energies differ in how they treat vertex atoms: the
//! cylindrical energy F integrates |df|^p over edges only, while the slope
//! energy also charges every atom with the worst incident slope. That gap
//! is exactly what the relaxation in [`crate::sobolev`] closes.

use crate::space::{DensityField, Instance, ScalarField};
use crate::{Error, Result};

/// One signed value per oriented edge (df, dual elements L, flows).
pub type EdgeField = Vec<f64>;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

fn check_vertex_dim(inst: &Instance, f: &[f64]) -> Result<()> {
    if f.len() == inst.n_vertices() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: inst.n_vertices(), got: f.len() })
    }
}

fn check_edge_dim(inst: &Instance, l: &[f64]) -> Result<()> {
    if l.len() == inst.n_edges() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: inst.n_edges(), got: l.len() })
    }
}

/// (df)_e = (f_head − f_tail)/ℓ_e.
pub fn differential(inst: &Instance, f: &ScalarField) -> Result<EdgeField> {
    check_vertex_dim(inst, f)?;
    Ok((0..inst.n_edges())
        .map(|e| {
            let (t, h) = inst.ends(e);
            (f[h] - f[t]) / inst.length(e)
        })
        .collect())
}

/// The adjoint d*: (d*L)_v = (1/μ_v)·Σ_e σ(v,e)·(m_e/ℓ_e)·L_e, so that
/// Σ_e m_e (df)_e L_e = Σ_v μ_v f_v (d*L)_v for every f.
pub fn adjoint(inst: &Instance, l: &EdgeField) -> Result<ScalarField> {
    check_edge_dim(inst, l)?;
    let mut g = vec![0.0; inst.n_vertices()];
    for e in 0..inst.n_edges() {
        let (t, h) = inst.ends(e);
        let flux = inst.edge_mass(e) / inst.length(e) * l[e];
        g[h] += flux;
        g[t] -= flux;
    }
    for (v, gv) in g.iter_mut().enumerate() {
        *gv /= inst.lumped_mass(v);
    }
    Ok(g)
}

/// Lumped vertex pairing ⟨f,g⟩ = Σ_v μ_v f_v g_v.
pub fn mu_inner(inst: &Instance, f: &ScalarField, g: &ScalarField) -> Result<f64> {
    check_vertex_dim(inst, f)?;
    check_vertex_dim(inst, g)?;
    Ok((0..inst.n_vertices()).map(|v| inst.lumped_mass(v) * f[v] * g[v]).sum())
}

/// Edge pairing ⟨a,b⟩ = Σ_e m_e a_e b_e.
pub fn edge_inner(inst: &Instance, a: &EdgeField, b: &EdgeField) -> Result<f64> {
    check_edge_dim(inst, a)?;
    check_edge_dim(inst, b)?;
    Ok((0..inst.n_edges()).map(|e| inst.edge_mass(e) * a[e] * b[e]).sum())
}

/// Cylindrical energy F(f) = (1/p)·Σ_e m_e|(df)_e|^p — the exact value of
/// (1/p)∫|f′|^p dμ for the piecewise-affine representative. Atoms do not
/// contribute: F is built from differentials, not slopes.
pub fn cylinder_energy(inst: &Instance, f: &ScalarField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let df = differential(inst, f)?;
    Ok((0..inst.n_edges()).map(|e| inst.edge_mass(e) * df[e].abs().powf(p)).sum::<f64>() / p)
}

/// The asymptotic slope of the piecewise-affine representative: |df_e| on
/// edges, the maximum incident slope at vertices (0 if isolated).
pub fn asymptotic_slope(inst: &Instance, f: &ScalarField) -> Result<DensityField> {
    let df = differential(inst, f)?;
    let edge: Vec<f64> = df.iter().map(|x| x.abs()).collect();
    let vertex = (0..inst.n_vertices())
        .map(|v| inst.incident(v).iter().map(|&(e, _)| edge[e]).fold(0.0, f64::max))
        .collect();
    Ok(DensityField { edge, vertex })
}

/// (1/p)·∫ G^p dμ for a density field: edges weighted by m_e, vertices by
/// their atom mass a_v.
pub fn density_energy(inst: &Instance, g: &DensityField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_edge_dim(inst, &g.edge)?;
    check_vertex_dim(inst, &g.vertex)?;
    let edges: f64 = (0..inst.n_edges()).map(|e| inst.edge_mass(e) * g.edge[e].powf(p)).sum();
    let atoms: f64 = (0..inst.n_vertices()).map(|v| inst.atom(v) * g.vertex[v].powf(p)).sum();
    Ok((edges + atoms) / p)
}

/// Pre-relaxation slope energy (1/p)∫ lip_a(f)^p dμ; always ≥ the
/// cylindrical energy because atoms are charged.
pub fn lip_energy(inst: &Instance, f: &ScalarField, p: f64) -> Result<f64> {
    let slope = asymptotic_slope(inst, f)?;
    density_energy(inst, &slope, p)
}
