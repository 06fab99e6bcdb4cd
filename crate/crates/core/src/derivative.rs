//! The bivector derivative of polynomial scalar and vector fields in flat
//! space(-time), its connection coefficients, and a finite-difference check
//! against pulled-back fields.
//!
//! Field variables are the coordinates of the chart whose P-basis carries
//! the bivector argument; the chart origin is that frame's anchor.

use nalgebra::{DMatrix, DVector};

use crate::bivector::{bivector_split, ANTISYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameKind};
use crate::metric::Metric;
use crate::motion::{exp_motion, InfinitesimalMotion, MotionParams};
use crate::poly::{FieldKind, Poly, PolyField, PolyMatrix};
use crate::tensor::ExtTensor;
use crate::transport::p_to_o;

/// Smallest step accepted by [`r_partial_check`].
pub const MIN_FD_STEP: f64 = 1e-6;

/// `(M_mn)^a_b = delta^a_n g_mb - delta^a_m g_nb`.
pub fn base_generator(g: &DMatrix<f64>, m: usize, n: usize) -> DMatrix<f64> {
    let d = g.nrows();
    DMatrix::from_fn(d, d, |a, b| {
        let mut v = 0.0;
        if a == n {
            v += g[(m, b)];
        }
        if a == m {
            v -= g[(n, b)];
        }
        v
    })
}

/// `x_m = g_ms x^s` as a polynomial.
fn lowered_coordinate(metric: &Metric, m: usize) -> Poly {
    let n = metric.n();
    (0..n).fold(Poly::zero(n), |acc, s| {
        acc.add(&Poly::var(n, s).scale(metric.g()[(m, s)]))
    })
}

fn check_field(metric: &Metric, field: &PolyField) -> Result<()> {
    if field.n() != metric.n() {
        return Err(Error::Shape(format!(
            "field has {} variables, metric dimension is {}",
            field.n(),
            metric.n()
        )));
    }
    Ok(())
}

/// `D_{p_S ^ p_T}` applied to a field, for P-basis indices `S`, `T`.
pub fn d_pair(metric: &Metric, field: &PolyField, s: usize, t: usize) -> Result<PolyField> {
    check_field(metric, field)?;
    let n = metric.n();
    if s > n || t > n {
        return Err(Error::Shape(format!(
            "bivector index out of range for dimension {}",
            n + 1
        )));
    }
    if s == t {
        return Ok(field.map(|p| Poly::zero(p.n())));
    }
    if s == n {
        return Ok(d_pair(metric, field, t, s)?.map(|p| p.scale(-1.0)));
    }
    if t == n {
        return Ok(field.map(|p| p.deriv(s)));
    }
    let xt = lowered_coordinate(metric, t);
    let xs = lowered_coordinate(metric, s);
    let orbital = field.map(|p| xt.mul(&p.deriv(s)).sub(&xs.mul(&p.deriv(t))));
    match field.kind() {
        FieldKind::Scalar => Ok(orbital),
        FieldKind::Vector => {
            let gen = base_generator(metric.g(), s, t);
            let comps = (0..n)
                .map(|a| {
                    (0..n).fold(orbital.comps()[a].clone(), |acc, b| {
                        acc.add(&field.comps()[b].scale(gen[(a, b)]))
                    })
                })
                .collect();
            PolyField::vector(comps)
        }
    }
}

fn require_constant_arg(metric: &Metric, arg: &ExtTensor) -> Result<()> {
    if arg.frame().kind() != FrameKind::PBasis {
        return Err(Error::Contract(format!(
            "a constant bivector argument must be given in a P-basis, found {}",
            arg.frame().kind()
        )));
    }
    if arg.frame().metric() != metric {
        return Err(Error::FrameMismatch(
            "argument and field use different metrics".into(),
        ));
    }
    if arg.rank() != (2, 0) {
        return Err(Error::Shape(format!(
            "bivector argument must have rank (2,0), got {:?}",
            arg.rank()
        )));
    }
    arg.ensure_antisymmetric(ANTISYMMETRY_TOL)
}

/// `D_A` for a covariantly constant bivector `A` (P-basis components).
pub fn d_field(field: &PolyField, arg: &ExtTensor) -> Result<PolyField> {
    let metric = arg.frame().metric();
    require_constant_arg(metric, arg)?;
    check_field(metric, field)?;
    let d = metric.dim();
    let mut out = field.map(|p| Poly::zero(p.n()));
    for k in 0..d {
        for l in k + 1..d {
            let a = arg.get(&[k, l]);
            if a != 0.0 {
                out = out.add(&d_pair(metric, field, k, l)?.map(|p| p.scale(a)))?;
            }
        }
    }
    Ok(out)
}

/// Bivector derivative of a scalar field.
pub fn d_scalar(f: &PolyField, arg: &ExtTensor) -> Result<PolyField> {
    f.as_scalar()?;
    d_field(f, arg)
}

/// Bivector derivative of a vector field.
pub fn d_vector(u: &PolyField, arg: &ExtTensor) -> Result<PolyField> {
    if u.kind() != FieldKind::Vector {
        return Err(Error::Contract("expected a vector field".into()));
    }
    d_field(u, arg)
}

/// Value of `D_A` at chart coordinates `x`, computed from the split of `A`
/// in the O-basis at `x`: the E-part differentiates, the Z-part acts through
/// the local generators. `arg` may be given in the chart's P-basis or in the
/// O-basis at the point.
pub fn derivative_at(
    field: &PolyField,
    chart: &Frame,
    arg: &ExtTensor,
    x: &[f64],
) -> Result<DVector<f64>> {
    if chart.kind() != FrameKind::PBasis {
        return Err(Error::Contract(
            "the chart is identified by its P-basis".into(),
        ));
    }
    let metric = chart.metric();
    check_field(metric, field)?;
    let n = metric.n();
    if x.len() != n {
        return Err(Error::Shape(format!(
            "point has {} coordinates, expected {n}",
            x.len()
        )));
    }
    let global = chart.anchor() + DVector::from_column_slice(x);
    let local = match arg.frame().kind() {
        FrameKind::PBasis => {
            chart.ensure_same(arg.frame())?;
            p_to_o(arg, global.as_slice())?
        }
        _ => {
            if arg.frame().anchor() != &global || arg.frame().metric() != metric {
                return Err(Error::FrameMismatch(
                    "pointwise argument is not anchored at the evaluation point".into(),
                ));
            }
            arg.clone()
        }
    };
    let split = bivector_split(&local)?;
    let mut out = DVector::zeros(field.comps().len());
    for m in 0..n {
        let a = split.e_part[m];
        if a != 0.0 {
            out += field.map(|p| p.deriv(m)).eval(x) * a;
        }
    }
    if field.kind() == FieldKind::Vector {
        let u = field.eval(x);
        for m in 0..n {
            for k in m + 1..n {
                let b = split.z_part[(m, k)];
                if b != 0.0 {
                    out += base_generator(metric.g(), m, k) * &u * b;
                }
            }
        }
    }
    Ok(out)
}

/// The derivative 2-form of a field: for every field component, the
/// antisymmetric array `DG_{KL} = D_{p_K ^ p_L} G` of polynomials in the
/// P-basis of `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeForm {
    frame: Frame,
    kind: FieldKind,
    comps: Vec<Vec<Poly>>,
}

/// Builds the derivative 2-form of `field` in the P-basis `frame`.
pub fn d_form(field: &PolyField, frame: &Frame) -> Result<DerivativeForm> {
    if frame.kind() != FrameKind::PBasis {
        return Err(Error::Contract(
            "derivative forms are expressed in a P-basis".into(),
        ));
    }
    let metric = frame.metric();
    let d = metric.dim();
    let mut comps = vec![vec![Poly::zero(field.n()); d * d]; field.comps().len()];
    for k in 0..d {
        for l in k + 1..d {
            let dkl = d_pair(metric, field, k, l)?;
            for (alpha, p) in dkl.comps().iter().enumerate() {
                comps[alpha][k * d + l] = p.clone();
                comps[alpha][l * d + k] = p.scale(-1.0);
            }
        }
    }
    Ok(DerivativeForm {
        frame: frame.clone(),
        kind: field.kind(),
        comps,
    })
}

impl DerivativeForm {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Polynomial `DG^alpha_{KL}`; `alpha = 0` for scalars.
    pub fn component(&self, alpha: usize, k: usize, l: usize) -> &Poly {
        &self.comps[alpha][k * self.frame.dim() + l]
    }

    /// Rank-(0,2) values at chart coordinates `x`, one per field component.
    pub fn at(&self, x: &[f64]) -> Result<Vec<ExtTensor>> {
        self.comps
            .iter()
            .map(|c| {
                ExtTensor::from_comps(
                    self.frame.clone(),
                    0,
                    2,
                    c.iter().map(|p| p.eval(x)).collect(),
                )
            })
            .collect()
    }

    /// `<DG, A> = 1/2 DG_{KL} A^{KL}`.
    pub fn contract(&self, arg: &ExtTensor) -> Result<PolyField> {
        require_constant_arg(self.frame.metric(), arg)?;
        self.frame.ensure_same(arg.frame())?;
        let d = self.frame.dim();
        let n = self.frame.n();
        let comps: Vec<Poly> = self
            .comps
            .iter()
            .map(|c| {
                let mut acc = Poly::zero(n);
                for k in 0..d {
                    for l in 0..d {
                        let a = arg.get(&[k, l]);
                        if a != 0.0 {
                            acc = acc.add(&c[k * d + l].scale(0.5 * a));
                        }
                    }
                }
                acc
            })
            .collect();
        match self.kind {
            FieldKind::Scalar => Ok(PolyField::scalar(
                comps.into_iter().next().expect("one component"),
            )),
            FieldKind::Vector => PolyField::vector(comps),
        }
    }
}

/// Bivector connection coefficients `Gamma^m_{n A B}` at one point, defined
/// by `D_{e_A ^ e_B} E_n = E_m Gamma^m_{n A B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    n: usize,
    data: Vec<f64>,
}

impl ConnectionTable {
    fn zeros(n: usize) -> Self {
        ConnectionTable {
            n,
            data: vec![0.0; n * n * (n + 1) * (n + 1)],
        }
    }

    fn index(&self, m: usize, nu: usize, a: usize, b: usize) -> usize {
        let d = self.n + 1;
        ((m * self.n + nu) * d + a) * d + b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, nu: usize, a: usize, b: usize) -> f64 {
        self.data[self.index(m, nu, a, b)]
    }

    fn set(&mut self, m: usize, nu: usize, a: usize, b: usize, v: f64) {
        let i = self.index(m, nu, a, b);
        self.data[i] = v;
    }

    /// `Gamma^.._{. A B}` as an `n x n` matrix (row `m`, column `nu`).
    pub fn block(&self, a: usize, b: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |m, nu| self.get(m, nu, a, b))
    }

    pub fn max_abs_diff(&self, other: &ConnectionTable) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// `max |Gamma_{..AB} + Gamma_{..BA}|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.n + 1;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                worst = worst.max((self.block(a, b) + self.block(b, a)).amax());
            }
        }
        worst
    }
}

fn check_basis_fields(metric: &Metric, four: &PolyMatrix, five: &PolyMatrix) -> Result<()> {
    let n = metric.n();
    if four.rows() != n || four.cols() != n || four.n() != n {
        return Err(Error::Shape(format!(
            "four-basis field must be {n}x{n} in {n} variables"
        )));
    }
    if five.rows() != n + 1 || five.cols() != n + 1 || five.n() != n {
        return Err(Error::Shape(format!(
            "five-basis field must be {}x{} in {n} variables",
            n + 1,
            n + 1
        )));
    }
    Ok(())
}

fn invert_at(m: &PolyMatrix, x: &[f64], what: &str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let value = m.eval(x);
    let inv = value
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} at {x:?}")))?;
    Ok((value, inv))
}

/// `D_{p_S ^ p_T}` of every entry of a polynomial matrix, evaluated at `x`.
fn d_matrix_at(
    metric: &Metric,
    m: &PolyMatrix,
    s: usize,
    t: usize,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let f = PolyField::scalar(m.get(i, j).clone());
            out[(i, j)] = d_pair(metric, &f, s, t)?.comps()[0].eval(x);
        }
    }
    Ok(out)
}

/// The O-basis of a chart as a field over the chart's P-basis:
/// `e_a = p_a - x_a p_5`, `e_5 = p_5`.
pub fn o_basis_field(metric: &Metric) -> PolyMatrix {
    let n = metric.n();
    PolyMatrix::from_fn(n + 1, n + 1, n, |row, col| {
        if row == col {
            Poly::constant(n, 1.0)
        } else if row == n && col < n {
            lowered_coordinate(metric, col).scale(-1.0)
        } else {
            Poly::zero(n)
        }
    })
}

/// The active regular five-basis attached to the four-basis
/// `E'_a = E_b Lambda^b_a`: `e'_a = e_b Lambda^b_a`, `e'_5 = e_5`, written
/// over the P-basis.
pub fn active_regular_field(metric: &Metric, four: &PolyMatrix) -> Result<PolyMatrix> {
    let n = metric.n();
    let lifted = PolyMatrix::from_fn(n + 1, n + 1, n, |row, col| match (row < n, col < n) {
        (true, true) => four.get(row, col).clone(),
        (false, false) => Poly::constant(n, 1.0),
        _ => Poly::zero(n),
    });
    o_basis_field(metric).mul(&lifted)
}

/// Connection coefficients at chart coordinates `x` for the four-basis
/// `E'_a = E_b Lambda^b_a(x)` (over the chart's Lorentz/Cartesian basis) and
/// the five-basis `e'_A = p_B L^B_A(x)` (over the chart's P-basis).
pub fn connection_coeffs(
    metric: &Metric,
    four: &PolyMatrix,
    five: &PolyMatrix,
    x: &[f64],
) -> Result<ConnectionTable> {
    check_basis_fields(metric, four, five)?;
    let n = metric.n();
    let (_, lambda_inv) = invert_at(four, x, "four-basis")?;
    let l = five.eval(x);
    // D_{p_S ^ p_T} E'_nu in the reference basis, for every S < T
    let mut d_basis = vec![DMatrix::zeros(n, n); (n + 1) * (n + 1)];
    for s in 0..=n {
        for t in s + 1..=n {
            let mut block = DMatrix::zeros(n, n);
            for nu in 0..n {
                let column = PolyField::vector((0..n).map(|b| four.get(b, nu).clone()).collect())?;
                let value = d_pair(metric, &column, s, t)?.eval(x);
                block.set_column(nu, &value);
            }
            d_basis[s * (n + 1) + t] = block.clone();
            d_basis[t * (n + 1) + s] = -block;
        }
    }
    let mut table = ConnectionTable::zeros(n);
    for a in 0..=n {
        for b in 0..=n {
            let mut acc = DMatrix::zeros(n, n);
            for s in 0..=n {
                for t in 0..=n {
                    let w = l[(s, a)] * l[(t, b)];
                    if w != 0.0 && s != t {
                        acc += &d_basis[s * (n + 1) + t] * w;
                    }
                }
            }
            let gamma = &lambda_inv * acc;
            for m in 0..n {
                for nu in 0..n {
                    table.set(m, nu, a, b, gamma[(m, nu)]);
                }
            }
        }
    }
    Ok(table)
}

/// Connection coefficients after the basis change `E''_a = E'_b Lambda^b_a`,
/// `e''_A = e'_B L^B_A`, from the coefficients of the old pair. `old_five`
/// is the old five-basis over the P-basis; it fixes `D_{e'_S ^ e'_T}`.
pub fn transform_connection(
    metric: &Metric,
    old: &ConnectionTable,
    old_five: &PolyMatrix,
    lambda: &PolyMatrix,
    l: &PolyMatrix,
    x: &[f64],
) -> Result<ConnectionTable> {
    check_basis_fields(metric, lambda, l)?;
    let n = metric.n();
    if old.n() != n {
        return Err(Error::Shape("connection table dimension mismatch".into()));
    }
    let (lam, lam_inv) = invert_at(lambda, x, "basis change")?;
    let lv = l.eval(x);
    let l_old = old_five.eval(x);
    // D_{e'_S ^ e'_T} Lambda = L_old^P_S L_old^Q_T D_{p_P ^ p_Q} Lambda
    let mut d_pq = vec![DMatrix::zeros(n, n); (n + 1) * (n + 1)];
    for p in 0..=n {
        for q in 0..=n {
            if p != q {
                d_pq[p * (n + 1) + q] = d_matrix_at(metric, lambda, p, q, x)?;
            }
        }
    }
    let mut table = ConnectionTable::zeros(n);
    for a in 0..=n {
        for b in 0..=n {
            let mut acc = DMatrix::zeros(n, n);
            for s in 0..=n {
                for t in 0..=n {
                    let w = lv[(s, a)] * lv[(t, b)];
                    if w == 0.0 {
                        continue;
                    }
                    let mut d_lambda = DMatrix::zeros(n, n);
                    for p in 0..=n {
                        for q in 0..=n {
                            let c = l_old[(p, s)] * l_old[(q, t)];
                            if c != 0.0 && p != q {
                                d_lambda += &d_pq[p * (n + 1) + q] * c;
                            }
                        }
                    }
                    acc += (old.block(s, t) * &lam + d_lambda) * w;
                }
            }
            let gamma = &lam_inv * acc;
            for m in 0..n {
                for nu in 0..n {
                    table.set(m, nu, a, b, gamma[(m, nu)]);
                }
            }
        }
    }
    Ok(table)
}

/// `Pi{G}` under the motion with parameters `(L, a)`: scalars become
/// `f(Lx + a)`, vectors `L^-1 U(Lx + a)`.
fn pulled_back(
    field: &PolyField,
    l: &DMatrix<f64>,
    l_inv: &DMatrix<f64>,
    a: &DVector<f64>,
    x: &[f64],
) -> DVector<f64> {
    let y = l * DVector::from_column_slice(x) + a;
    let value = field.eval(y.as_slice());
    match field.kind() {
        FieldKind::Scalar => value,
        FieldKind::Vector => l_inv * value,
    }
}

/// Image of a field under the active motion `x -> Lx + a`: scalars become
/// `f(L^-1 (y - a))`, vectors `L U(L^-1 (y - a))`.
pub fn transform_field(field: &PolyField, p: &MotionParams) -> Result<PolyField> {
    let n = field.n();
    if p.n() != n {
        return Err(Error::Shape(format!(
            "motion acts on {} coordinates, field has {n}",
            p.n()
        )));
    }
    let l_inv =
        p.l.clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("L".into()))?;
    let shift = -(&l_inv * &p.a);
    let moved = field.map(|q| q.compose_affine(&l_inv, &shift));
    match field.kind() {
        FieldKind::Scalar => Ok(moved),
        FieldKind::Vector => PolyField::vector(
            (0..n)
                .map(|i| {
                    (0..n).fold(Poly::zero(n), |acc, j| {
                        acc.add(&moved.comps()[j].scale(p.l[(i, j)]))
                    })
                })
                .collect(),
        ),
    }
}

/// The lattice `{-2, 0, 2}^n`.
pub fn sample_grid(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| [-2.0, 0.0, 2.0].map(|c| [p.clone(), vec![c]].concat()))
            .collect();
    }
    out
}

/// Compares `D_{AB} G` with the central difference in `h` of the field
/// pulled back by the finite motion generated by `R^{AB} = -R^{BA} = h`.
/// Returns the largest deviation over [`sample_grid`].
pub fn r_partial_check(
    field: &PolyField,
    frame: &Frame,
    a: usize,
    b: usize,
    h: f64,
) -> Result<f64> {
    if frame.kind() != FrameKind::PBasis {
        return Err(Error::Contract("r_partial_check works in a P-basis".into()));
    }
    if !(h >= MIN_FD_STEP && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step {h} is below {MIN_FD_STEP}"
        )));
    }
    if a == b {
        return Err(Error::InvalidParameter(
            "bivector indices must differ".into(),
        ));
    }
    let metric = frame.metric();
    let d = metric.dim();
    if a >= d || b >= d {
        return Err(Error::Shape(format!(
            "bivector index out of range for dimension {d}"
        )));
    }
    check_field(metric, field)?;
    let motion = |step: f64| -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
        let mut r = ExtTensor::zeros(frame.clone(), 2, 0);
        r.set(&[a, b], step);
        r.set(&[b, a], -step);
        let inf = InfinitesimalMotion::from_bivector(&r)?;
        let p = exp_motion(&inf, 1.0, frame)?.params()?;
        let l_inv =
            p.l.clone()
                .try_inverse()
                .ok_or_else(|| Error::Singular("motion".into()))?;
        Ok((p.l, l_inv, p.a))
    };
    let (lp, lp_inv, ap) = motion(h)?;
    let (lm, lm_inv, am) = motion(-h)?;
    let exact = d_pair(metric, field, a, b)?;
    let mut worst: f64 = 0.0;
    for x in sample_grid(metric.n()) {
        let fd = (pulled_back(field, &lp, &lp_inv, &ap, &x)
            - pulled_back(field, &lm, &lm_inv, &am, &x))
            / (2.0 * h);
        worst = worst.max((fd - exact.eval(&x)).amax());
    }
    Ok(worst)
}
