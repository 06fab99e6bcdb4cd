//! Parallel transport of extended tensors in flat space, the degenerate
//! lowering map `theta_g`, and contravariant bases.
//!
//! Transporting the standard basis from `x` to `y` gives
//! `e_a(x) -> e_a(y) + d_a e_5(y)` and `e_5(x) -> e_5(y)` with `d = y - x` and
//! `d_a = g_ab d^b`. On components this is a single `(n+1) x (n+1)` matrix:
//! vectors gain `d_a v^a` in their fifth slot, base slots are unchanged.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameKind};
use crate::metric::Metric;
use crate::tensor::ExtTensor;

/// Vector-component transport matrix for displacement `d = to - from`.
pub fn transport_matrix(metric: &Metric, displacement: &DVector<f64>) -> DMatrix<f64> {
    let n = metric.n();
    let lowered = metric.lower(displacement);
    let mut t = DMatrix::identity(n + 1, n + 1);
    for b in 0..n {
        t[(n, b)] = lowered[b];
    }
    t
}

/// Inverse of [`transport_matrix`], built directly rather than by inversion.
pub fn transport_matrix_inv(metric: &Metric, displacement: &DVector<f64>) -> DMatrix<f64> {
    transport_matrix(metric, &-displacement)
}

fn check_point(metric: &Metric, p: &[f64]) -> Result<DVector<f64>> {
    if p.len() != metric.n() {
        return Err(Error::Shape(format!(
            "point has {} coordinates, expected {}",
            p.len(),
            metric.n()
        )));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("transport target".into()));
    }
    Ok(DVector::from_column_slice(p))
}

fn apply_transport(t: &ExtTensor, displacement: &DVector<f64>, frame: Frame) -> ExtTensor {
    let metric = t.frame().metric();
    let vec_map = transport_matrix(metric, displacement);
    let form_map = transport_matrix_inv(metric, displacement).transpose();
    let mut out = t.clone();
    let (p, q) = t.rank();
    for axis in 0..p {
        out = out.apply_along(axis, &vec_map);
    }
    for axis in p..p + q {
        out = out.apply_along(axis, &form_map);
    }
    if p + q == 2 && p != 1 && t.antisymmetry_residual().is_ok_and(|r| r == 0.0) {
        out.mirror_upper();
    }
    out.relabel(frame).expect("same dimension")
}

/// Transports a tensor given in an O-basis at its anchor to the O-basis at `to`.
pub fn transport_tensor(t: &ExtTensor, to: &[f64]) -> Result<ExtTensor> {
    t.frame().ensure_pointwise()?;
    let metric = t.frame().metric();
    let to = check_point(metric, to)?;
    let d = &to - t.frame().anchor();
    let frame = t.frame().with_anchor(to)?;
    Ok(apply_transport(t, &d, frame))
}

/// [`transport_tensor`] restricted to rank-(1,0) tensors.
pub fn transport_vector(v: &ExtTensor, to: &[f64]) -> Result<ExtTensor> {
    if v.rank() != (1, 0) {
        return Err(Error::Shape(format!(
            "expected a vector, got rank {:?}",
            v.rank()
        )));
    }
    transport_tensor(v, to)
}

/// P-basis components (chart origin at the frame anchor) re-expressed in
/// the O-basis at `at`.
pub fn p_to_o(t: &ExtTensor, at: &[f64]) -> Result<ExtTensor> {
    if t.frame().kind() != FrameKind::PBasis {
        return Err(Error::Contract(format!(
            "expected P-basis components, found {}",
            t.frame().kind()
        )));
    }
    let metric = t.frame().metric();
    let at = check_point(metric, at)?;
    let d = &at - t.frame().anchor();
    let frame = Frame::new(t.frame().metric_arc().clone(), at, FrameKind::OBasis)?;
    Ok(apply_transport(t, &d, frame))
}

/// O-basis components at the anchor re-expressed in the P-basis of the
/// chart with origin `chart_origin`.
pub fn o_to_p(t: &ExtTensor, chart_origin: &[f64]) -> Result<ExtTensor> {
    t.frame().ensure_pointwise()?;
    let metric = t.frame().metric();
    let origin = check_point(metric, chart_origin)?;
    let d = &origin - t.frame().anchor();
    let frame = Frame::new(t.frame().metric_arc().clone(), origin, FrameKind::PBasis)?;
    Ok(apply_transport(t, &d, frame))
}

/// The map `theta_g`: base components lowered with `g`, fifth component 0.
/// Its kernel is the span of `e_5`.
pub fn theta_g(v: &ExtTensor) -> Result<ExtTensor> {
    if v.rank() != (1, 0) {
        return Err(Error::Shape(format!(
            "theta_g acts on vectors, got rank {:?}",
            v.rank()
        )));
    }
    let m = v.frame().metric().g_degenerate();
    let comps = &m * v.to_vector()?;
    ExtTensor::covector(v.frame().clone(), comps.as_slice())
}

/// The contravariant companion of a standard basis: `e^a = g^ab e_b`, `e^5 = e_5`.
#[derive(Debug, Clone)]
pub struct ContravariantBasis {
    frame: Frame,
    vectors: DMatrix<f64>,
    forms: DMatrix<f64>,
}

impl ContravariantBasis {
    /// Column `A` holds the components of `e^A` in the original basis.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Row `A` holds the components of the dual 1-form `o_A` in the original
    /// dual basis: `o_a = o^b g_ba`, `o_5 = o^5`.
    pub fn forms(&self) -> &DMatrix<f64> {
        &self.forms
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// `g(e_a, e^b)` for the base indices, using the base metric on the base
    /// parts of both vectors.
    pub fn base_pairing(&self) -> DMatrix<f64> {
        let n = self.frame.n();
        let g = self.frame.metric().g();
        let up = self.vectors.view((0, 0), (n, n));
        g * up
    }

    /// For a P-basis frame: the contravariant P-basis vectors expressed in
    /// the O-basis at `at` (column `A` is `p^A`).
    pub fn p_basis_in_o_basis(&self, at: &[f64]) -> Result<DMatrix<f64>> {
        if self.frame.kind() != FrameKind::PBasis {
            return Err(Error::Contract(
                "p_basis_in_o_basis needs a P-basis frame".into(),
            ));
        }
        let metric = self.frame.metric();
        let at = check_point(metric, at)?;
        let d = at - self.frame.anchor();
        Ok(transport_matrix(metric, &d) * &self.vectors)
    }
}

pub fn contravariant_frame(frame: &Frame) -> ContravariantBasis {
    let metric = frame.metric();
    ContravariantBasis {
        frame: frame.clone(),
        vectors: metric.g_raising(),
        forms: metric.g_lowering(),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::Metric;

    fn at(m: &Arc<Metric>, p: &[f64]) -> Frame {
        Frame::o_basis(m.clone(), p).unwrap()
    }

    #[test]
    fn fifth_vector_is_transport_invariant() {
        let m = Arc::new(Metric::minkowski4());
        let e5 = ExtTensor::basis_vector(Frame::origin(m.clone()), 4);
        let moved = transport_vector(&e5, &[3.0, -1.0, 2.0, 0.5]).unwrap();
        assert_eq!(moved.comps(), e5.comps());
    }

    #[test]
    fn base_vector_picks_up_fifth_component() {
        let m = Arc::new(Metric::euclidean3());
        let e1 = ExtTensor::basis_vector(Frame::origin(m.clone()), 0);
        let moved = transport_vector(&e1, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(moved.comps(), &[1.0, 0.0, 0.0, 2.0]);
        assert_eq!(moved.frame().anchor().as_slice(), &[2.0, 0.0, 0.0]);

        // minkowski lowers the displacement with g
        let mk = Arc::new(Metric::minkowski4());
        let e2 = ExtTensor::basis_vector(Frame::origin(mk), 1);
        let moved = transport_vector(&e2, &[0.0, 3.0, 0.0, 0.0]).unwrap();
        assert_eq!(moved.comps(), &[0.0, 1.0, 0.0, 0.0, -3.0]);
    }

    #[test]
    fn zero_displacement_is_identity() {
        let m = Arc::new(Metric::euclidean3());
        let f = at(&m, &[1.0, 2.0, 3.0]);
        let t = ExtTensor::from_comps(f, 1, 1, (0..16).map(|k| k as f64).collect()).unwrap();
        assert_eq!(transport_tensor(&t, &[1.0, 2.0, 3.0]).unwrap(), t);
    }

    #[test]
    fn velocity_bivector_transport_rule() {
        // W^{5j}(x) = W^{5j}(0) + x_i W^{ij}(0)
        let m = Arc::new(Metric::euclidean3());
        let mut w = ExtTensor::zeros(Frame::origin(m), 2, 0);
        w.set(&[0, 1], 1.5);
        w.set(&[1, 0], -1.5);
        let x = [0.5, -2.0, 1.0];
        let moved = transport_tensor(&w, &x).unwrap();
        assert_eq!(moved.get(&[3, 1]), x[0] * 1.5);
        assert_eq!(moved.get(&[3, 0]), x[1] * -1.5);
        assert_eq!(moved.get(&[0, 1]), 1.5);
        assert!(moved.antisymmetry_residual().unwrap() == 0.0);
    }

    #[test]
    fn particle_momentum_transport_rule() {
        // M_{5j} = m v_j at x  ->  M_ij(0) = m (x_i v_j - x_j v_i)
        let m = Arc::new(Metric::euclidean3());
        let (mass, x, v) = (2.0, [1.0, -0.5, 3.0], [0.25, 1.0, -2.0]);
        let mut local = ExtTensor::zeros(at(&m, &x), 0, 2);
        for (j, vj) in v.iter().enumerate() {
            local.set(&[3, j], mass * vj);
            local.set(&[j, 3], -mass * vj);
        }
        let origin = transport_tensor(&local, &[0.0; 3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = mass * (x[i] * v[j] - x[j] * v[i]);
                assert!((origin.get(&[i, j]) - expected).abs() < 1e-14);
            }
            assert_eq!(origin.get(&[3, i]), mass * v[i]);
        }
    }

    #[test]
    fn identity_tensor_is_transport_invariant() {
        let m = Arc::new(Metric::minkowski4());
        let id = ExtTensor::identity(Frame::origin(m));
        let moved = transport_tensor(&id, &[1.0, 2.0, -3.0, 4.0]).unwrap();
        assert_eq!(moved.comps(), id.comps());
    }

    #[test]
    fn p_basis_components_are_rejected() {
        let m = Arc::new(Metric::euclidean3());
        let v = ExtTensor::basis_vector(Frame::p_basis(m, &[0.0; 3]).unwrap(), 0);
        assert!(matches!(
            transport_vector(&v, &[1.0, 0.0, 0.0]),
            Err(Error::Contract(_))
        ));
        assert!(p_to_o(&v, &[1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn p_and_o_conversions_invert() {
        let m = Arc::new(Metric::minkowski4());
        let f = Frame::p_basis(m, &[0.5, 0.0, -1.0, 2.0]).unwrap();
        let t =
            ExtTensor::from_comps(f, 1, 1, (0..25).map(|k| (k as f64) * 0.1).collect()).unwrap();
        let o = p_to_o(&t, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let back = o_to_p(&o, &[0.5, 0.0, -1.0, 2.0]).unwrap();
        assert!(back.max_abs_diff(&t).unwrap() < 1e-14);
    }

    #[test]
    fn theta_g_examples() {
        let e = Arc::new(Metric::euclidean3());
        let f = Frame::origin(e);
        assert_eq!(
            theta_g(&ExtTensor::basis_vector(f.clone(), 3))
                .unwrap()
                .max_abs(),
            0.0
        );
        assert_eq!(
            theta_g(&ExtTensor::basis_vector(f, 0)).unwrap().comps(),
            &[1.0, 0.0, 0.0, 0.0]
        );

        let mk = Arc::new(Metric::minkowski4());
        let e2 = ExtTensor::basis_vector(Frame::origin(mk), 1);
        assert_eq!(theta_g(&e2).unwrap().comps(), &[0.0, -1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn contravariant_bases() {
        let e = contravariant_frame(&Frame::origin(Arc::new(Metric::euclidean3())));
        assert_eq!(e.vectors(), &DMatrix::identity(4, 4));

        let mk = contravariant_frame(&Frame::origin(Arc::new(Metric::minkowski4())));
        let v = mk.vectors();
        assert_eq!(v.column(1).as_slice(), &[0.0, -1.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.column(4).as_slice(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(mk.base_pairing(), DMatrix::identity(4, 4));
        // o_a = o^b g_ba, o_5 = o^5 ; dual to e^A
        assert_eq!(mk.forms() * v, DMatrix::identity(5, 5));
        assert_eq!(mk.forms()[(1, 1)], -1.0);
    }
}
