//! Base metrics and their extended companions.
//!
//! A [`Metric`] carries the symmetric base metric `g` of an `n`-dimensional
//! flat space together with the positive scale `xi` used for the extended
//! space. Extended arrays are `(n+1) x (n+1)` with the extra slot stored at
//! index `n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    name: Option<String>,
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    xi: f64,
}

impl Metric {
    pub fn new(g: DMatrix<f64>, xi: f64) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || g.ncols() != n {
            return Err(Error::InvalidMetric(format!(
                "metric must be square and non-empty, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMetric("non-finite metric entry".into()));
        }
        let asym = (&g - g.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidMetric(format!(
                "g is not symmetric (residual {asym:e})"
            )));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "xi must be positive, got {xi}"
            )));
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidMetric("g is singular".into()))?;
        let residual = (&g * &g_inv - DMatrix::identity(n, n)).amax();
        if residual > SYMMETRY_TOL {
            return Err(Error::InvalidMetric(format!(
                "g is too ill-conditioned (g g^-1 residual {residual:e})"
            )));
        }
        Ok(Self {
            name: None,
            g,
            g_inv,
            xi,
        })
    }

    /// Flat 3-space with `g = diag(1, 1, 1)`.
    pub fn euclidean3() -> Self {
        let mut m = Self::new(DMatrix::identity(3, 3), 1.0).expect("identity metric");
        m.name = Some("euclidean3".into());
        m
    }

    /// Minkowski space with signature `diag(1, -1, -1, -1)`.
    pub fn minkowski4() -> Self {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]));
        let mut m = Self::new(g, 1.0).expect("minkowski metric");
        m.name = Some("minkowski4".into());
        m
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "euclidean3" => Ok(Self::euclidean3()),
            "minkowski4" => Ok(Self::minkowski4()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "xi must be positive, got {xi}"
            )));
        }
        self.xi = xi;
        Ok(self)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Base dimension `n`.
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// Extended dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.n() + 1
    }

    /// Array index of the extra ("5") slot.
    pub fn five(&self) -> usize {
        self.n()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn g_inv(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn lower(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.g * v
    }

    pub fn raise(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.g_inv * v
    }

    pub fn is_euclidean3(&self) -> bool {
        self.n() == 3 && self.g == DMatrix::identity(3, 3)
    }

    pub fn require_dim(&self, expected: usize) -> Result<()> {
        if self.n() != expected {
            return Err(Error::UnsupportedDimension {
                expected,
                found: self.n(),
            });
        }
        Ok(())
    }

    /// `g` padded with a zero fifth row and column; the matrix of the
    /// degenerate lowering map used by `theta_g` and the generators.
    pub fn g_degenerate(&self) -> DMatrix<f64> {
        self.block_diag(&self.g, 0.0)
    }

    /// `block-diag(g, 1)`: lowers base indices and leaves the fifth slot alone.
    pub fn g_lowering(&self) -> DMatrix<f64> {
        self.block_diag(&self.g, 1.0)
    }

    /// `block-diag(g^-1, 1)`: inverse of [`Metric::g_lowering`].
    pub fn g_raising(&self) -> DMatrix<f64> {
        self.block_diag(&self.g_inv, 1.0)
    }

    /// `block-diag(g, xi)`. Informational only; no operation depends on it.
    pub fn h_ext(&self) -> DMatrix<f64> {
        self.block_diag(&self.g, self.xi)
    }

    fn block_diag(&self, base: &DMatrix<f64>, corner: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(base);
        m[(n, n)] = corner;
        m
    }

    /// Is `l` an isometry (`l^T g l = g`) to within `tol`? Returns the residual.
    pub fn isometry_residual(&self, l: &DMatrix<f64>) -> f64 {
        (l.transpose() * &self.g * l - &self.g).amax()
    }
}

/// Serialized form of a metric: a preset name or an explicit matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MetricSpec {
    Preset(String),
    Explicit {
        g: Vec<Vec<f64>>,
        #[serde(default = "default_xi")]
        xi: f64,
    },
}

fn default_xi() -> f64 {
    1.0
}

impl MetricSpec {
    pub fn build(&self) -> Result<Metric> {
        match self {
            MetricSpec::Preset(name) => Metric::from_name(name),
            MetricSpec::Explicit { g, xi } => {
                let n = g.len();
                if g.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidMetric(
                        "metric rows have unequal length".into(),
                    ));
                }
                let m = DMatrix::from_fn(n, n, |i, j| g[i][j]);
                Metric::new(m, *xi)
            }
        }
    }
}

impl From<&Metric> for MetricSpec {
    fn from(m: &Metric) -> Self {
        match (m.name(), m.xi == 1.0) {
            (Some(name), true) => MetricSpec::Preset(name.to_string()),
            _ => MetricSpec::Explicit {
                g: (0..m.n())
                    .map(|i| (0..m.n()).map(|j| m.g[(i, j)]).collect())
                    .collect(),
                xi: m.xi,
            },
        }
    }
}
