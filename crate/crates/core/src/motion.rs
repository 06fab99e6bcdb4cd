//! Finite and infinitesimal active motions as extended tensors.
//!
//! A motion is described by the coordinate change `x' = L x + a` between an
//! initial chart and its image. Its transformation tensor has, in the
//! initial chart's P-basis,
//!
//! ```text
//! T^a_b = (L^-1)^a_b    T^a_5 = 0
//! T^5_b = a_b           T^5_5 = 1        (a_b = g_bc a^c)
//! ```
//!
//! and maps the initial P-basis onto the final one, `p'_A = p_B T^B_A`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameKind};
use crate::metric::Metric;
use crate::tensor::ExtTensor;

/// Tolerance for `L^T g L = g`.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Largest `|omega| t` accepted by [`exp_motion`].
pub const EXP_NORM_LIMIT: f64 = 600.0;

/// Parameters `(L, a)` of the coordinate change `x' = L x + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionParams {
    pub l: DMatrix<f64>,
    pub a: DVector<f64>,
}

impl MotionParams {
    pub fn new(l: DMatrix<f64>, a: DVector<f64>) -> Self {
        Self { l, a }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            l: DMatrix::identity(n, n),
            a: DVector::zeros(n),
        }
    }

    pub fn translation(a: DVector<f64>) -> Self {
        let n = a.len();
        Self {
            l: DMatrix::identity(n, n),
            a,
        }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Checks shapes, finiteness and the isometry condition under `metric`.
    pub fn validate(&self, metric: &Metric) -> Result<()> {
        let n = metric.n();
        if self.l.nrows() != n || self.l.ncols() != n || self.a.len() != n {
            return Err(Error::Shape(format!(
                "motion parameters must be {n}x{n} and {n}, got {}x{} and {}",
                self.l.nrows(),
                self.l.ncols(),
                self.a.len()
            )));
        }
        if self.l.iter().chain(self.a.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("motion parameters".into()));
        }
        let residual = metric.isometry_residual(&self.l);
        if residual > ISOMETRY_TOL {
            return Err(Error::NotIsometry { residual });
        }
        Ok(())
    }

    /// Parameters of "apply `self` first, then `then`":
    /// `(L2 L1, L2 a1 + a2)`.
    pub fn then(&self, then: &MotionParams) -> MotionParams {
        MotionParams {
            l: &then.l * &self.l,
            a: &then.l * &self.a + &then.a,
        }
    }

    pub fn inverse(&self) -> Result<MotionParams> {
        let l_inv = self
            .l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("L".into()))?;
        let a = -(&l_inv * &self.a);
        Ok(MotionParams { l: l_inv, a })
    }

    /// The point map `x -> L x + a`.
    pub fn apply_point(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.l * x + &self.a
    }
}

/// JSON form `{"L": [[...]], "a": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MotionParamsDoc {
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    pub a: Vec<f64>,
}

impl MotionParamsDoc {
    pub fn build(&self) -> Result<MotionParams> {
        let n = self.a.len();
        if self.l.len() != n || self.l.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("L must be {n}x{n}")));
        }
        Ok(MotionParams {
            l: DMatrix::from_fn(n, n, |i, j| self.l[i][j]),
            a: DVector::from_vec(self.a.clone()),
        })
    }
}

impl From<&MotionParams> for MotionParamsDoc {
    fn from(p: &MotionParams) -> Self {
        let n = p.n();
        MotionParamsDoc {
            l: (0..n)
                .map(|i| (0..n).map(|j| p.l[(i, j)]).collect())
                .collect(),
            a: p.a.as_slice().to_vec(),
        }
    }
}

/// Rank-(1,1) covariantly constant tensor of a finite motion, held by its
/// component matrix in a P-basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionTensor {
    comps: DMatrix<f64>,
    frame: Frame,
}

fn require_p_basis(frame: &Frame) -> Result<()> {
    if frame.kind() != FrameKind::PBasis {
        return Err(Error::Contract(format!(
            "motion tensors live in a P-basis, got {}",
            frame.kind()
        )));
    }
    Ok(())
}

/// Builds the transformation tensor of `p` in the P-basis `frame`.
pub fn t_from_params(p: &MotionParams, frame: &Frame) -> Result<MotionTensor> {
    require_p_basis(frame)?;
    let metric = frame.metric();
    p.validate(metric)?;
    let n = metric.n();
    let lambda =
        p.l.clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("L".into()))?;
    let a_low = metric.lower(&p.a);
    let mut comps = DMatrix::zeros(n + 1, n + 1);
    comps.view_mut((0, 0), (n, n)).copy_from(&lambda);
    for b in 0..n {
        comps[(n, b)] = a_low[b];
    }
    comps[(n, n)] = 1.0;
    Ok(MotionTensor {
        comps,
        frame: frame.clone(),
    })
}

impl MotionTensor {
    /// Wraps a component matrix after checking the motion-tensor invariants.
    pub fn from_comps(comps: DMatrix<f64>, frame: &Frame) -> Result<Self> {
        require_p_basis(frame)?;
        let n = frame.n();
        if comps.nrows() != n + 1 || comps.ncols() != n + 1 {
            return Err(Error::Shape("motion tensor must be (n+1)x(n+1)".into()));
        }
        let t = MotionTensor {
            comps,
            frame: frame.clone(),
        };
        t.check_invariants(ISOMETRY_TOL)?;
        Ok(t)
    }

    pub fn identity(frame: &Frame) -> Result<Self> {
        require_p_basis(frame)?;
        let d = frame.dim();
        Ok(MotionTensor {
            comps: DMatrix::identity(d, d),
            frame: frame.clone(),
        })
    }

    pub fn comps(&self) -> &DMatrix<f64> {
        &self.comps
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn to_tensor(&self) -> ExtTensor {
        ExtTensor::from_matrix(self.frame.clone(), 1, 1, &self.comps).expect("motion tensor shape")
    }

    pub fn from_tensor(t: &ExtTensor) -> Result<Self> {
        if t.rank() != (1, 1) {
            return Err(Error::Shape(format!(
                "motion tensor must have rank (1,1), got {:?}",
                t.rank()
            )));
        }
        Self::from_comps(t.to_matrix()?, t.frame())
    }

    /// `T^a_5 = 0`, `T^5_5 = 1`, `Lambda^T g Lambda = g`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.frame.n();
        if self.comps.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("motion tensor".into()));
        }
        let column_residual = (0..n).map(|a| self.comps[(a, n)].abs()).fold(0.0, f64::max);
        let corner = (self.comps[(n, n)] - 1.0).abs();
        if column_residual > tol || corner > tol {
            return Err(Error::Contract(format!(
                "fifth column of a motion tensor must be e_5 (residual {:e})",
                column_residual.max(corner)
            )));
        }
        let lambda = self.comps.view((0, 0), (n, n)).into_owned();
        let residual = self.frame.metric().isometry_residual(&lambda);
        if residual > tol {
            return Err(Error::NotIsometry { residual });
        }
        Ok(())
    }

    /// Recovers `(L, a)` from the components.
    pub fn params(&self) -> Result<MotionParams> {
        let n = self.frame.n();
        let lambda = self.comps.view((0, 0), (n, n)).into_owned();
        let l = lambda
            .try_inverse()
            .ok_or_else(|| Error::Singular("motion tensor base block".into()))?;
        let a_low = DVector::from_fn(n, |b, _| self.comps[(n, b)]);
        Ok(MotionParams {
            l,
            a: self.frame.metric().raise(&a_low),
        })
    }

    /// Inverse from the closed form `(T^-1)^a_b = L^a_b`,
    /// `(T^-1)^5_b = -a_c L^c_b`.
    pub fn inverse(&self) -> Result<MotionTensor> {
        let n = self.frame.n();
        let lambda = self.comps.view((0, 0), (n, n)).into_owned();
        let l = lambda
            .try_inverse()
            .ok_or_else(|| Error::Singular("motion tensor base block".into()))?;
        let a_low = DVector::from_fn(n, |b, _| self.comps[(n, b)]);
        let row = -(a_low.transpose() * &l);
        let mut comps = DMatrix::zeros(n + 1, n + 1);
        comps.view_mut((0, 0), (n, n)).copy_from(&l);
        for b in 0..n {
            comps[(n, b)] = row[b];
        }
        comps[(n, n)] = 1.0;
        Ok(MotionTensor {
            comps,
            frame: self.frame.clone(),
        })
    }

    /// Components in the contravariant P-basis (`p^a = g^ab p_b`, `p^5 = p_5`),
    /// written with the row index on the basis 1-form slot. For a motion built
    /// from `(L, a)` this is the affine matrix `[[L, a], [0, 1]]`.
    pub fn contravariant_components(&self) -> DMatrix<f64> {
        let metric = self.frame.metric();
        (metric.g_lowering() * &self.comps * metric.g_raising()).transpose()
    }
}

/// Applies `t` to a vector (forward) or a 1-form. On 1-forms the action is
/// `w_B -> w_A T^A_B`, which sends the final dual basis back to the initial
/// one.
pub fn apply_motion(t: &MotionTensor, v: &ExtTensor) -> Result<ExtTensor> {
    t.frame.ensure_same(v.frame())?;
    let x = v.to_vector()?;
    let out = match v.rank() {
        (1, 0) => &t.comps * x,
        (0, 1) => t.comps.transpose() * x,
        r => {
            return Err(Error::Shape(format!(
                "apply_motion needs a vector or 1-form, got rank {r:?}"
            )))
        }
    };
    ExtTensor::from_comps(
        v.frame().clone(),
        v.rank().0,
        v.rank().1,
        out.as_slice().to_vec(),
    )
}

/// Matrix product `t1 . t2`. Corresponds to the parameters
/// `t2.params().then(...)`: `(L2 L1, L2 a1 + a2)` for `t1 = T(L1, a1)`.
pub fn compose(t1: &MotionTensor, t2: &MotionTensor) -> Result<MotionTensor> {
    t1.frame.ensure_same(&t2.frame)?;
    Ok(MotionTensor {
        comps: &t1.comps * &t2.comps,
        frame: t1.frame.clone(),
    })
}

/// Infinitesimal (or rate) parameters: `omega_ab` antisymmetric in lower
/// index form and a translation `a^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalMotion {
    metric: Arc<Metric>,
    omega: DMatrix<f64>,
    a: DVector<f64>,
}

impl InfinitesimalMotion {
    pub fn new(metric: Arc<Metric>, omega_lower: DMatrix<f64>, a: DVector<f64>) -> Result<Self> {
        let n = metric.n();
        if omega_lower.nrows() != n || omega_lower.ncols() != n || a.len() != n {
            return Err(Error::Shape(format!(
                "omega must be {n}x{n} and a must have {n} entries"
            )));
        }
        if omega_lower.iter().chain(a.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("infinitesimal motion".into()));
        }
        let max_asymmetry = (&omega_lower + omega_lower.transpose()).amax();
        if max_asymmetry > crate::bivector::ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric { max_asymmetry });
        }
        let omega = (&omega_lower - omega_lower.transpose()) * 0.5;
        Ok(Self { metric, omega, a })
    }

    pub fn translation(metric: Arc<Metric>, a: DVector<f64>) -> Result<Self> {
        let n = metric.n();
        Self::new(metric, DMatrix::zeros(n, n), a)
    }

    /// The parameters carried by a bivector `r`: `omega^{ab} = r^{ab}`,
    /// `a^a = r^{a5}`.
    pub fn from_bivector(r: &ExtTensor) -> Result<Self> {
        let split = crate::bivector::bivector_split(r)?;
        let metric = r.frame().metric_arc().clone();
        let g = metric.g();
        let omega_lower = g * &split.z_part * g;
        Self::new(metric, omega_lower, split.e_part)
    }

    pub fn metric(&self) -> &Arc<Metric> {
        &self.metric
    }

    /// `omega_ab`.
    pub fn omega_lower(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// `omega^a_b = g^ac omega_cb`.
    pub fn omega_mixed(&self) -> DMatrix<f64> {
        self.metric.g_inv() * &self.omega
    }

    /// `omega^ab = omega^a_c g^cb`.
    pub fn omega_upper(&self) -> DMatrix<f64> {
        self.metric.g_inv() * &self.omega * self.metric.g_inv()
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            metric: self.metric.clone(),
            omega: &self.omega * s,
            a: &self.a * s,
        }
    }

    pub fn is_pure_translation(&self) -> bool {
        self.omega.iter().all(|v| *v == 0.0)
    }
}

/// The antisymmetric bivector of an infinitesimal motion:
/// `R^ab = omega^ab`, `R^a5 = -R^5a = a^a`, `R^55 = 0`.
pub fn r_from_infinitesimal(m: &InfinitesimalMotion, frame: &Frame) -> Result<ExtTensor> {
    if frame.metric() != m.metric.as_ref() {
        return Err(Error::FrameMismatch(
            "infinitesimal motion and frame use different metrics".into(),
        ));
    }
    let n = frame.n();
    let upper = m.omega_upper();
    let mut r = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = upper[(i, j)];
        }
        r[(i, n)] = m.a[i];
        r[(n, i)] = -m.a[i];
    }
    ExtTensor::from_matrix(frame.clone(), 2, 0, &r)
}

/// Generator `(M_KL)^A_B = delta^A_L g_KB - delta^A_K g_LB`, with `g`
/// extended by a zero fifth row and column.
pub fn generator(metric: &Metric, k: usize, l: usize) -> DMatrix<f64> {
    let d = metric.dim();
    let g = metric.g_degenerate();
    DMatrix::from_fn(d, d, |a, b| {
        let mut v = 0.0;
        if a == l {
            v += g[(k, b)];
        }
        if a == k {
            v -= g[(l, b)];
        }
        v
    })
}

/// `S^A_B = -1/2 R^KL (M_KL)^A_B`.
pub fn s_from_r(r: &ExtTensor) -> Result<ExtTensor> {
    if r.rank() != (2, 0) {
        return Err(Error::Shape(format!(
            "s_from_r needs rank (2,0), got {:?}",
            r.rank()
        )));
    }
    r.ensure_antisymmetric(crate::bivector::ANTISYMMETRY_TOL)?;
    let metric = r.frame().metric();
    let d = metric.dim();
    let mut s = DMatrix::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let rkl = r.get(&[k, l]);
            if rkl != 0.0 {
                s += generator(metric, k, l) * rkl;
            }
        }
    }
    ExtTensor::from_matrix(r.frame().clone(), 1, 1, &(s * -0.5))
}

/// The finite motion generated by constant rates `m` over time `t`:
/// `exp(-S t)` with `S` the infinitesimal tensor of `m`.
pub fn exp_motion(m: &InfinitesimalMotion, t: f64, frame: &Frame) -> Result<MotionTensor> {
    require_p_basis(frame)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("exp_motion time".into()));
    }
    let r = r_from_infinitesimal(m, frame)?;
    let s = s_from_r(&r)?.to_matrix()?;
    let d = frame.dim();
    let comps = if m.is_pure_translation() {
        // S is nilpotent of order two here
        DMatrix::identity(d, d) - s * t
    } else {
        let norm = m.omega_mixed().norm() * t.abs();
        if norm > EXP_NORM_LIMIT {
            return Err(Error::Overflow { norm });
        }
        (s * -t).exp()
    };
    Ok(MotionTensor {
        comps,
        frame: frame.clone(),
    })
}
