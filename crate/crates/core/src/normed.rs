//! Finite-dimensional normed spaces: (weighted) ℓr norms, their duals, and
//! linear maps with covector pullback.
//!
//! Norms here serve two roles. On the ambient coordinate space they supply
//! default edge lengths for embedded graphs; as an abstract pair
//! (norm, dual norm) they provide the cost geometry for dual edge fields.
//! The family is deliberately restricted to weighted ℓr so dual norms stay
//! closed-form: the dual of exponent r with weights w is the conjugate
//! exponent r* = r/(r−1) with weights w^(1−r*), and inverting twice returns
//! the original norm.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rng;
use crate::{Error, Result};

/// Slack accepted when certifying an operator norm ≤ 1.
const OP_NORM_SLACK: f64 = 1e-9;

/// Conjugate exponent: 1/r + 1/r* = 1, with 1 ↔ ∞.
pub fn conjugate_exponent(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

/// A (weighted) ℓr norm on R^dim; `r = f64::INFINITY` is the max norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Norm {
    dim: usize,
    r: f64,
    weights: Option<Vec<f64>>,
}

impl Norm {
    pub fn lr(dim: usize, r: f64) -> Result<Self> {
        Self::build(dim, r, None)
    }

    pub fn weighted_lr(r: f64, weights: Vec<f64>) -> Result<Self> {
        Self::build(weights.len(), r, Some(weights))
    }

    fn build(dim: usize, r: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("norm dimension must be ≥ 1".into()));
        }
        if !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!("norm exponent r = {r} must be ≥ 1")));
        }
        if let Some(w) = &weights {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: w.len() });
            }
            if w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter("norm weights must be positive and finite".into()));
            }
        }
        Ok(Norm { dim, r, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got })
        }
    }

    /// ‖v‖; zero exactly when v = 0.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        let terms = v.iter().enumerate().map(|(i, x)| (self.weight(i), x.abs()));
        let value = if self.r.is_infinite() {
            terms.map(|(w, a)| w * a).fold(0.0, f64::max)
        } else if self.r == 1.0 {
            terms.map(|(w, a)| w * a).sum()
        } else if self.r == 2.0 {
            terms.map(|(w, a)| w * a * a).sum::<f64>().sqrt()
        } else {
            terms.map(|(w, a)| w * a.powf(self.r)).sum::<f64>().powf(1.0 / self.r)
        };
        Ok(value)
    }

    /// The dual norm as a `Norm` in the same family.
    pub fn dual(&self) -> Norm {
        let r_star = conjugate_exponent(self.r);
        let weights = self.weights.as_ref().map(|w| {
            if self.r == 1.0 || self.r.is_infinite() {
                w.iter().map(|wi| 1.0 / wi).collect()
            } else {
                // w^(1−r*) = w^(−1/(r−1))
                let e = -1.0 / (self.r - 1.0);
                w.iter().map(|wi| wi.powf(e)).collect()
            }
        });
        Norm { dim: self.dim, r: r_star, weights }
    }

    /// sup{⟨ω,v⟩ : ‖v‖ ≤ 1}, via the conjugate-exponent formula.
    pub fn dual_eval(&self, omega: &[f64]) -> Result<f64> {
        self.dual().eval(omega)
    }
}

/// Wire form of a norm inside instance files; the dimension comes from the
/// enclosing instance.
#[derive(Debug, Clone)]
pub struct NormSpec {
    pub r: f64,
    pub weights: Option<Vec<f64>>,
}

impl NormSpec {
    pub fn of(norm: &Norm) -> Self {
        NormSpec { r: norm.r, weights: norm.weights.clone() }
    }

    pub fn into_norm(self, dim: usize) -> Result<Norm> {
        match self.weights {
            Some(w) => {
                if w.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: w.len() });
                }
                Norm::weighted_lr(self.r, w)
            }
            None => Norm::lr(dim, self.r),
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            family: &'a str,
            r: serde_json::Value,
            #[serde(skip_serializing_if = "Option::is_none")]
            weights: &'a Option<Vec<f64>>,
        }
        let r = if self.r.is_infinite() {
            serde_json::Value::String("inf".into())
        } else {
            serde_json::json!(self.r)
        };
        let family = if self.weights.is_some() { "weighted-lr" } else { "lr" };
        Raw { family, r, weights: &self.weights }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            family: String,
            r: serde_json::Value,
            #[serde(default)]
            weights: Option<Vec<serde_json::Value>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.family != "lr" && raw.family != "weighted-lr" {
            return Err(D::Error::custom(format!("unknown norm family {:?}", raw.family)));
        }
        let r = match &raw.r {
            serde_json::Value::String(s) if s == "inf" => f64::INFINITY,
            other => crate::exact::rat_from_json(other)
                .map(|x| crate::exact::rat_to_f64(&x))
                .map_err(|e| D::Error::custom(e.to_string()))?,
        };
        let weights = match raw.weights {
            None => None,
            Some(vals) => {
                let mut w = Vec::with_capacity(vals.len());
                for v in &vals {
                    let x = crate::exact::rat_from_json(v).map_err(|e| D::Error::custom(e.to_string()))?;
                    w.push(crate::exact::rat_to_f64(&x));
                }
                Some(w)
            }
        };
        if raw.family == "weighted-lr" && weights.is_none() {
            return Err(D::Error::custom("weighted-lr norm requires weights"));
        }
        Ok(NormSpec { r, weights })
    }
}

/// A linear map between two normed spaces, stored as a target×source matrix.
#[derive(Debug, Clone)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    source: Norm,
    target: Norm,
    one_lipschitz_checked: bool,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>, source: Norm, target: Norm) -> Result<Self> {
        if matrix.ncols() != source.dim() {
            return Err(Error::DimensionMismatch { expected: source.dim(), got: matrix.ncols() });
        }
        if matrix.nrows() != target.dim() {
            return Err(Error::DimensionMismatch { expected: target.dim(), got: matrix.nrows() });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("linear map entries must be finite".into()));
        }
        Ok(LinearMap { matrix, source, target, one_lipschitz_checked: false })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> &Norm {
        &self.source
    }

    pub fn target(&self) -> &Norm {
        &self.target
    }

    pub fn one_lipschitz_checked(&self) -> bool {
        self.one_lipschitz_checked
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.source.dim() {
            return Err(Error::DimensionMismatch { expected: self.source.dim(), got: x.len() });
        }
        let y = &self.matrix * DVector::from_column_slice(x);
        Ok(y.iter().copied().collect())
    }

    /// Pullback of a covector on the target: ω ↦ Mᵀω, so that
    /// ⟨pullback(ω), x⟩ = ⟨ω, Mx⟩ for every source vector x.
    pub fn pullback_covector(&self, omega: &[f64]) -> Result<Vec<f64>> {
        if omega.len() != self.target.dim() {
            return Err(Error::DimensionMismatch { expected: self.target.dim(), got: omega.len() });
        }
        let y = self.matrix.transpose() * DVector::from_column_slice(omega);
        Ok(y.iter().copied().collect())
    }

    /// Upper bound on the operator norm: by Hölder,
    /// ‖Mx‖ ≤ Σ_j |x_j|·‖col_j‖ ≤ ‖x‖·‖(‖col_j‖)_j‖_source*.
    /// Exact (not just a bound) when the source exponent is 1.
    pub fn column_bound(&self) -> f64 {
        let cols: Vec<f64> = (0..self.matrix.ncols())
            .map(|j| {
                let col: Vec<f64> = self.matrix.column(j).iter().copied().collect();
                self.target.eval(&col).expect("column lives in the target space")
            })
            .collect();
        self.source.dual_eval(&cols).expect("column norms form a source covector")
    }

    /// Largest sampled Rayleigh quotient ‖Mx‖/‖x‖ — a lower estimate.
    pub fn sampled_operator_norm(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = rng::seeded(seed);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let x = gaussian_direction(&mut rng, self.source.dim());
            let nx = self.source.eval(&x).unwrap();
            if nx == 0.0 {
                continue;
            }
            let y = self.apply(&x).unwrap();
            best = best.max(self.target.eval(&y).unwrap() / nx);
        }
        best
    }

    /// Certify ‖M‖ ≤ 1 (within slack 1e-9). The Hölder column bound is
    /// conclusive when it holds; otherwise sphere sampling must fail to
    /// exhibit a violating direction, which makes the certificate
    /// probabilistic. Returns whether the flag was set.
    pub fn certify_one_lipschitz(&mut self, samples: usize, seed: u64) -> bool {
        let ok = if self.column_bound() <= 1.0 + OP_NORM_SLACK {
            true
        } else {
            self.sampled_operator_norm(samples, seed) <= 1.0 + OP_NORM_SLACK
        };
        self.one_lipschitz_checked = ok;
        ok
    }
}

fn gaussian_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng::gaussian(rng)).collect()
}
