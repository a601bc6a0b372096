//! Weighted metric graphs carrying an atom-plus-edge measure.
//!
//! An instance is a finite graph embedded in a normed space. Each edge has
//! a length ℓ_e (defaulting to the norm of the endpoint difference) and a
//! linear density w_e, contributing mass m_e = w_e·ℓ_e; each vertex may
//! carry a point mass a_v. Integrals of piecewise-affine functions are
//! represented by mass lumping: μ_v = a_v + ½·Σ_{e ∋ v} m_e, which is
//! exact for the pairings used here and conserves total mass.
//!
//! All measure data is stored as exact rationals (inputs are parsed
//! exactly, including decimal literals), with `f64` views cached for the
//! analytic routines. Vertex atoms are the interesting part of the model:
//! slope functionals charge them, differentials do not, which is what the
//! relaxation machinery in [`crate::sobolev`] probes.

use std::collections::HashSet;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{rat, rat_from_f64, rat_from_json, rat_int, rat_to_f64, ExactNum, Rat};
use crate::normed::{Norm, NormSpec};
use crate::rng;
use crate::{Error, Result, Violation};

/// One value per vertex, read as the piecewise-affine function with these
/// vertex values.
pub type ScalarField = Vec<f64>;

/// A nonnegative density with respect to μ: a value per edge (density
/// against the edge length measure) and a value per vertex (read at the
/// atom).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub edge: Vec<f64>,
    pub vertex: Vec<f64>,
}

impl DensityField {
    pub fn zeros(inst: &Instance) -> Self {
        DensityField { edge: vec![0.0; inst.n_edges()], vertex: vec![0.0; inst.n_vertices()] }
    }
}

#[derive(Debug, Clone)]
pub struct VertexData {
    pub x: Vec<f64>,
    pub atom: Rat,
}

#[derive(Debug, Clone)]
pub struct EdgeData {
    pub tail: usize,
    pub head: usize,
    pub w: Rat,
    /// `None` means: use the norm of the coordinate difference.
    pub length: Option<Rat>,
}

/// Unvalidated instance description; [`InstanceData::build`] promotes it
/// to an [`Instance`] once [`InstanceData::validate`] finds nothing wrong.
#[derive(Debug, Clone)]
pub struct InstanceData {
    pub norm: Norm,
    pub vertices: Vec<VertexData>,
    pub edges: Vec<EdgeData>,
}

impl InstanceData {
    /// All violated invariants; empty iff the data describes a valid
    /// instance.
    pub fn validate(&self) -> Vec<Violation> {
        self.resolve().1
    }

    /// Resolved edge lengths (defaults filled in) plus diagnostics.
    fn resolve(&self) -> (Vec<Rat>, Vec<Violation>) {
        let mut violations = Vec::new();
        let nv = self.vertices.len();
        if nv == 0 {
            violations.push(Violation::NoVertices);
        }
        let dim = self.norm.dim();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.x.len() != dim {
                violations.push(Violation::CoordinateDimension { vertex: i });
            } else if v.x.iter().any(|c| !c.is_finite()) {
                violations.push(Violation::NonfiniteCoordinate { vertex: i });
            }
            if v.atom.is_negative() {
                violations.push(Violation::NegativeAtom { vertex: i });
            }
        }

        let mut seen = HashSet::new();
        let mut lengths = Vec::with_capacity(self.edges.len());
        for (ei, e) in self.edges.iter().enumerate() {
            if e.tail >= nv || e.head >= nv {
                violations.push(Violation::BadEdgeIndex { edge: ei });
                lengths.push(rat_int(1));
                continue;
            }
            if e.tail == e.head {
                violations.push(Violation::SelfLoop { edge: ei });
            } else if !seen.insert((e.tail.min(e.head), e.tail.max(e.head))) {
                violations.push(Violation::ParallelEdge { edge: ei });
            }
            if !e.w.is_positive() {
                violations.push(Violation::NonpositiveDensity { edge: ei });
            }
            let length = match &e.length {
                Some(l) => l.clone(),
                None => self.default_length(e.tail, e.head).unwrap_or_else(|| rat_int(0)),
            };
            if !length.is_positive() {
                violations.push(Violation::NonpositiveLength { edge: ei });
            }
            lengths.push(length);
        }

        if violations.is_empty() {
            let mut lumped: Vec<Rat> = self.vertices.iter().map(|v| v.atom.clone()).collect();
            let half = rat(1, 2);
            let mut total = Rat::zero();
            for (ei, e) in self.edges.iter().enumerate() {
                let m = &e.w * &lengths[ei];
                lumped[e.tail] += &half * &m;
                lumped[e.head] += &half * &m;
                total += m;
            }
            for (i, mu) in lumped.iter().enumerate() {
                if !mu.is_positive() {
                    violations.push(Violation::ZeroVertexMass { vertex: i });
                }
            }
            for v in &self.vertices {
                total += &v.atom;
            }
            if !total.is_positive() {
                violations.push(Violation::NonpositiveTotalMass);
            }
        }

        (lengths, violations)
    }

    fn default_length(&self, tail: usize, head: usize) -> Option<Rat> {
        let a = &self.vertices[tail].x;
        let b = &self.vertices[head].x;
        if a.len() != self.norm.dim() || b.len() != self.norm.dim() {
            return None;
        }
        let diff: Vec<f64> = a.iter().zip(b).map(|(s, t)| t - s).collect();
        let d = self.norm.eval(&diff).ok()?;
        rat_from_f64(d).ok()
    }

    pub fn build(self) -> Result<Instance> {
        let (lengths, violations) = self.resolve();
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }

        let nv = self.vertices.len();
        let ne = self.edges.len();
        let half = rat(1, 2);

        let mut edge_mass_r = Vec::with_capacity(ne);
        let mut incident: Vec<Vec<(usize, i8)>> = vec![Vec::new(); nv];
        for (ei, e) in self.edges.iter().enumerate() {
            edge_mass_r.push(&e.w * &lengths[ei]);
            incident[e.tail].push((ei, -1));
            incident[e.head].push((ei, 1));
        }
        let mut lumped_r: Vec<Rat> = self.vertices.iter().map(|v| v.atom.clone()).collect();
        let mut total_mass = Rat::zero();
        for (ei, e) in self.edges.iter().enumerate() {
            let hm = &half * &edge_mass_r[ei];
            lumped_r[e.tail] += &hm;
            lumped_r[e.head] += &hm;
            total_mass += &edge_mass_r[ei];
        }
        for v in &self.vertices {
            total_mass += &v.atom;
        }

        // Connected components, in vertex order.
        let mut component_of = vec![usize::MAX; nv];
        let mut members = Vec::new();
        for start in 0..nv {
            if component_of[start] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut queue = vec![start];
            let mut seen = vec![start];
            component_of[start] = c;
            while let Some(v) = queue.pop() {
                for &(ei, _) in &incident[v] {
                    let e = &self.edges[ei];
                    let other = if e.tail == v { e.head } else { e.tail };
                    if component_of[other] == usize::MAX {
                        component_of[other] = c;
                        seen.push(other);
                        queue.push(other);
                    }
                }
            }
            seen.sort_unstable();
            members.push(seen);
        }

        let length_f = lengths.iter().map(rat_to_f64).collect();
        let mass_f = edge_mass_r.iter().map(rat_to_f64).collect();
        let lumped_f = lumped_r.iter().map(rat_to_f64).collect();
        let atom_f = self.vertices.iter().map(|v| rat_to_f64(&v.atom)).collect();
        let density_f = self.edges.iter().map(|e| rat_to_f64(&e.w)).collect();

        Ok(Instance {
            norm: self.norm,
            vertices: self.vertices,
            edges: self.edges,
            length_r: lengths,
            edge_mass_r,
            lumped_r,
            total_mass,
            incident,
            component_of,
            component_members: members,
            length_f,
            mass_f,
            lumped_f,
            atom_f,
            density_f,
        })
    }
}

/// A validated weighted metric graph. Immutable after construction; all
/// derived quantities are precomputed.
#[derive(Debug, Clone)]
pub struct Instance {
    norm: Norm,
    vertices: Vec<VertexData>,
    edges: Vec<EdgeData>,
    length_r: Vec<Rat>,
    edge_mass_r: Vec<Rat>,
    lumped_r: Vec<Rat>,
    total_mass: Rat,
    incident: Vec<Vec<(usize, i8)>>,
    component_of: Vec<usize>,
    component_members: Vec<Vec<usize>>,
    length_f: Vec<f64>,
    mass_f: Vec<f64>,
    lumped_f: Vec<f64>,
    atom_f: Vec<f64>,
    density_f: Vec<f64>,
}

impl Instance {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn coordinates(&self, v: usize) -> &[f64] {
        &self.vertices[v].x
    }

    /// (tail, head) of edge `e`; orientation is bookkeeping for flows.
    pub fn ends(&self, e: usize) -> (usize, usize) {
        (self.edges[e].tail, self.edges[e].head)
    }

    /// Incidence sign σ(v,e): +1 at the head, −1 at the tail, 0 otherwise.
    pub fn sign(&self, v: usize, e: usize) -> i8 {
        if self.edges[e].head == v {
            1
        } else if self.edges[e].tail == v {
            -1
        } else {
            0
        }
    }

    /// Edges incident to `v` as (edge index, sign) pairs, in edge order.
    pub fn incident(&self, v: usize) -> &[(usize, i8)] {
        &self.incident[v]
    }

    pub fn length(&self, e: usize) -> f64 {
        self.length_f[e]
    }

    pub fn length_rat(&self, e: usize) -> &Rat {
        &self.length_r[e]
    }

    pub fn density(&self, e: usize) -> f64 {
        self.density_f[e]
    }

    pub fn density_rat(&self, e: usize) -> &Rat {
        &self.edges[e].w
    }

    /// Edge mass m_e = w_e·ℓ_e.
    pub fn edge_mass(&self, e: usize) -> f64 {
        self.mass_f[e]
    }

    pub fn edge_mass_rat(&self, e: usize) -> &Rat {
        &self.edge_mass_r[e]
    }

    pub fn atom(&self, v: usize) -> f64 {
        self.atom_f[v]
    }

    pub fn atom_rat(&self, v: usize) -> &Rat {
        &self.vertices[v].atom
    }

    /// Lumped vertex mass μ_v = a_v + ½·Σ_{e ∋ v} m_e.
    pub fn lumped_mass(&self, v: usize) -> f64 {
        self.lumped_f[v]
    }

    pub fn lumped_mass_rat(&self, v: usize) -> &Rat {
        &self.lumped_r[v]
    }

    /// μ(X) = Σ_v a_v + Σ_e m_e.
    pub fn total_mass_rat(&self) -> &Rat {
        &self.total_mass
    }

    pub fn n_components(&self) -> usize {
        self.component_members.len()
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// Vertices of component `c`, sorted.
    pub fn component(&self, c: usize) -> &[usize] {
        &self.component_members[c]
    }

    /// Measure-level equality: same combinatorics, lengths, densities and
    /// atoms. Coordinates and the ambient norm are not compared.
    pub fn same_shape(&self, other: &Instance) -> bool {
        self.n_vertices() == other.n_vertices()
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.tail == b.tail && a.head == b.head && a.w == b.w)
            && self.length_r == other.length_r
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a.atom == b.atom)
    }

    /// Clone back into editable form.
    pub fn data(&self) -> InstanceData {
        InstanceData {
            norm: self.norm.clone(),
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let out = InstanceOut {
            dim: self.dim(),
            norm: NormSpec::of(&self.norm),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexOut { x: v.x.clone(), atom: ExactNum(v.atom.clone()) })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(ei, e)| EdgeOut {
                    tail: e.tail,
                    head: e.head,
                    w: ExactNum(e.w.clone()),
                    length: ExactNum(self.length_r[ei].clone()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("instance serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Instance> {
        let raw: InstanceIn =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance file: {e}")))?;
        let norm = raw.norm.into_norm(raw.dim)?;
        let mut vertices = Vec::with_capacity(raw.vertices.len());
        for v in raw.vertices {
            let mut x = Vec::with_capacity(v.x.len());
            for c in &v.x {
                x.push(rat_to_f64(&rat_from_json(c)?));
            }
            vertices.push(VertexData { x, atom: v.atom.0 });
        }
        let edges = raw
            .edges
            .into_iter()
            .map(|e| EdgeData { tail: e.tail, head: e.head, w: e.w.0, length: e.length.map(|l| l.0) })
            .collect();
        InstanceData { norm, vertices, edges }.build()
    }
}

#[derive(Serialize)]
struct InstanceOut {
    dim: usize,
    norm: NormSpec,
    vertices: Vec<VertexOut>,
    edges: Vec<EdgeOut>,
}

#[derive(Serialize)]
struct VertexOut {
    x: Vec<f64>,
    atom: ExactNum,
}

#[derive(Serialize)]
struct EdgeOut {
    tail: usize,
    head: usize,
    w: ExactNum,
    length: ExactNum,
}

#[derive(Deserialize)]
struct InstanceIn {
    dim: usize,
    norm: NormSpec,
    vertices: Vec<VertexIn>,
    edges: Vec<EdgeIn>,
}

#[derive(Deserialize)]
struct VertexIn {
    x: Vec<serde_json::Value>,
    atom: ExactNum,
}

#[derive(Deserialize)]
struct EdgeIn {
    tail: usize,
    head: usize,
    w: ExactNum,
    #[serde(default)]
    length: Option<ExactNum>,
}

/// Index bookkeeping for a k-fold edge subdivision. Original vertices keep
/// their indices; interior vertices and sub-edges are addressed per
/// original edge.
#[derive(Debug, Clone)]
pub struct Subdivision {
    k: usize,
    n_base_vertices: usize,
    ends: Vec<(usize, usize)>,
}

impl Subdivision {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Interior vertex j (1 ≤ j ≤ k−1) of original edge `e`, counted from
    /// the tail.
    pub fn interior_vertex(&self, e: usize, j: usize) -> usize {
        debug_assert!(j >= 1 && j < self.k);
        self.n_base_vertices + e * (self.k - 1) + (j - 1)
    }

    /// Sub-edge j (0 ≤ j < k) of original edge `e`, oriented along `e`.
    pub fn sub_edge(&self, e: usize, j: usize) -> usize {
        debug_assert!(j < self.k);
        e * self.k + j
    }

    /// Piecewise-affine interpolation of vertex values onto the refinement.
    pub fn interpolate(&self, f: &ScalarField) -> Result<ScalarField> {
        if f.len() != self.n_base_vertices {
            return Err(Error::DimensionMismatch { expected: self.n_base_vertices, got: f.len() });
        }
        let mut out = f.clone();
        for &(t, h) in &self.ends {
            for j in 1..self.k {
                out.push(f[t] + (f[h] - f[t]) * j as f64 / self.k as f64);
            }
        }
        Ok(out)
    }
}

/// Split every edge into k equal sub-edges. Interior vertices carry atom
/// mass 0 and the density is preserved per sub-edge, so μ is conserved
/// exactly.
pub fn subdivide(inst: &Instance, k: usize) -> Result<(Instance, Subdivision)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("subdivision level k = {k} must be ≥ 2")));
    }
    let nv = inst.n_vertices();
    let ne = inst.n_edges();
    let mut vertices: Vec<VertexData> = inst.vertices.clone();
    vertices.reserve(ne * (k - 1));
    let kr = rat_int(k as i64);
    for e in 0..ne {
        let (t, h) = inst.ends(e);
        let (a, b) = (inst.coordinates(t), inst.coordinates(h));
        for j in 1..k {
            let s = j as f64 / k as f64;
            let x = a.iter().zip(b).map(|(p, q)| p + (q - p) * s).collect();
            vertices.push(VertexData { x, atom: Rat::zero() });
        }
    }

    let sub = Subdivision { k, n_base_vertices: nv, ends: (0..ne).map(|e| inst.ends(e)).collect() };
    let mut edges = Vec::with_capacity(ne * k);
    for e in 0..ne {
        let (t, h) = inst.ends(e);
        let l_sub = inst.length_rat(e) / &kr;
        for j in 0..k {
            let tail = if j == 0 { t } else { sub.interior_vertex(e, j) };
            let head = if j == k - 1 { h } else { sub.interior_vertex(e, j + 1) };
            edges.push(EdgeData {
                tail,
                head,
                w: inst.density_rat(e).clone(),
                length: Some(l_sub.clone()),
            });
        }
    }

    let refined = InstanceData { norm: inst.norm.clone(), vertices, edges }.build()?;
    Ok((refined, sub))
}

/// Index maps from a restriction back to the original instance.
#[derive(Debug, Clone)]
pub struct Restriction {
    /// New vertex index → original vertex index (sorted).
    pub vertices: Vec<usize>,
    /// New edge index → original edge index (in original edge order).
    pub edges: Vec<usize>,
}

/// Induced sub-instance on a vertex subset; keeps every edge with both
/// endpoints retained and recomputes lumped masses.
pub fn restrict(inst: &Instance, subset: &[usize]) -> Result<(Instance, Restriction)> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("restriction subset is empty".into()));
    }
    let mut keep = subset.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if *keep.last().unwrap() >= inst.n_vertices() {
        return Err(Error::InvalidParameter(format!(
            "restriction subset contains vertex {} out of range",
            keep.last().unwrap()
        )));
    }
    let mut new_index = vec![usize::MAX; inst.n_vertices()];
    for (ni, &v) in keep.iter().enumerate() {
        new_index[v] = ni;
    }
    let vertices = keep.iter().map(|&v| inst.vertices[v].clone()).collect();
    let mut edges = Vec::new();
    let mut edge_keep = Vec::new();
    for (ei, e) in inst.edges.iter().enumerate() {
        if new_index[e.tail] != usize::MAX && new_index[e.head] != usize::MAX {
            edges.push(EdgeData {
                tail: new_index[e.tail],
                head: new_index[e.head],
                w: e.w.clone(),
                length: Some(inst.length_r[ei].clone()),
            });
            edge_keep.push(ei);
        }
    }
    let restricted = InstanceData { norm: inst.norm.clone(), vertices, edges }.build()?;
    Ok((restricted, Restriction { vertices: keep, edges: edge_keep }))
}

#[derive(Debug, Clone)]
pub enum Topology {
    Path { n: usize },
    Grid { rows: usize, cols: usize },
    Star { k: usize },
    Tree { n: usize },
    RandomGeometric { n: usize, radius: f64 },
}

/// Generator description: a named topology plus uniform atom/density
/// defaults. Randomized topologies are driven entirely by `seed`.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub topology: Topology,
    pub seed: u64,
    pub norm: Option<Norm>,
    pub atom: Rat,
    pub density: Rat,
}

impl GeneratorSpec {
    pub fn new(topology: Topology) -> Self {
        GeneratorSpec { topology, seed: 0, norm: None, atom: rat_int(1), density: rat_int(1) }
    }
}

/// Deterministic instance construction for the named topologies. All
/// generators embed in the plane; explicit unit lengths are used except
/// for random geometric graphs, which inherit the embedding distance.
pub fn build_instance(spec: &GeneratorSpec) -> Result<Instance> {
    let norm = match &spec.norm {
        Some(n) => {
            if n.dim() != 2 {
                return Err(Error::InvalidParameter(
                    "generator embeddings are planar; the norm must have dimension 2".into(),
                ));
            }
            n.clone()
        }
        None => Norm::lr(2, 2.0)?,
    };
    let unit = rat_int(1);
    let vertex = |x: Vec<f64>| VertexData { x, atom: spec.atom.clone() };
    let edge = |tail: usize, head: usize, length: Option<Rat>| EdgeData {
        tail,
        head,
        w: spec.density.clone(),
        length,
    };

    let (vertices, edges) = match spec.topology {
        Topology::Path { n } => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("path topology needs n ≥ 2, got {n}")));
            }
            let vertices = (0..n).map(|i| vertex(vec![i as f64, 0.0])).collect();
            let edges = (0..n - 1).map(|i| edge(i, i + 1, Some(unit.clone()))).collect();
            (vertices, edges)
        }
        Topology::Grid { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols < 2 {
                return Err(Error::InvalidParameter(format!(
                    "grid topology needs at least two vertices, got {rows}×{cols}"
                )));
            }
            let mut vertices = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    vertices.push(vertex(vec![c as f64, r as f64]));
                }
            }
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push(edge(v, v + 1, Some(unit.clone())));
                    }
                    if r + 1 < rows {
                        edges.push(edge(v, v + cols, Some(unit.clone())));
                    }
                }
            }
            (vertices, edges)
        }
        Topology::Star { k } => {
            if k < 1 {
                return Err(Error::InvalidParameter("star topology needs k ≥ 1 leaves".into()));
            }
            let mut vertices = vec![vertex(vec![0.0, 0.0])];
            for j in 0..k {
                let theta = std::f64::consts::TAU * j as f64 / k as f64;
                vertices.push(vertex(vec![theta.cos(), theta.sin()]));
            }
            let edges = (1..=k).map(|j| edge(0, j, Some(unit.clone()))).collect();
            (vertices, edges)
        }
        Topology::Tree { n } => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("tree topology needs n ≥ 2, got {n}")));
            }
            let mut rng = rng::seeded(spec.seed);
            let vertices = (0..n).map(|i| vertex(vec![i as f64, 0.0])).collect();
            let edges = (1..n).map(|i| edge(rng::pick(&mut rng, i), i, Some(unit.clone()))).collect();
            (vertices, edges)
        }
        Topology::RandomGeometric { n, radius } => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "random-geometric topology needs n ≥ 2, got {n}"
                )));
            }
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid radius {radius}")));
            }
            let mut rng = rng::seeded(spec.seed);
            let points: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng::unit(&mut rng), rng::unit(&mut rng)]).collect();
            let mut edges = Vec::new();
            let mut degree = vec![0usize; n];
            for i in 0..n {
                for j in i + 1..n {
                    let diff: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| b - a).collect();
                    if norm.eval(&diff)? <= radius {
                        edges.push(edge(i, j, None));
                        degree[i] += 1;
                        degree[j] += 1;
                    }
                }
            }
            if let Some(v) = degree.iter().position(|&d| d == 0) {
                return Err(Error::InvalidParameter(format!(
                    "radius {radius} leaves vertex {v} isolated"
                )));
            }
            let vertices = points.into_iter().map(vertex).collect();
            (vertices, edges)
        }
    };

    InstanceData { norm, vertices, edges }.build()
}
