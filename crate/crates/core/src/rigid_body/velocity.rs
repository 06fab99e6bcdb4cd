use nalgebra::{Matrix3, Vector3};

use super::{frame_at, require_euclidean, FIVE, PAIRS};
use crate::bivector::{dual3, dual3_inv, ANTISYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::tensor::ExtTensor;
use crate::transport::transport_tensor;

/// Antisymmetric rank-(2,0) tensor packaging the translational velocity `V`
/// of a reference point and the angular velocity `Omega`:
/// `W^{5i} = -W^{i5} = V^i`, `W^{ij} = eps^{ij}_k Omega^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBivector {
    w: ExtTensor,
}

impl VelocityBivector {
    /// Velocity bivector of a frame moving with `(v, omega)` at point `at`.
    pub fn from_frame_motion(
        v: &Vector3<f64>,
        omega: &Vector3<f64>,
        at: &Vector3<f64>,
    ) -> Result<Self> {
        let frame = frame_at(at);
        let b = dual3_inv(frame.metric(), omega)?;
        let mut w = ExtTensor::zeros(frame, 2, 0);
        for i in 0..3 {
            for j in 0..3 {
                w.set(&[i, j], b[(i, j)]);
            }
            w.set(&[FIVE, i], v[i]);
            w.set(&[i, FIVE], -v[i]);
        }
        Ok(VelocityBivector { w })
    }

    pub fn from_tensor(w: ExtTensor) -> Result<Self> {
        require_euclidean(w.frame())?;
        if w.rank() != (2, 0) {
            return Err(Error::Shape(format!(
                "velocity bivector must have rank (2,0), got {:?}",
                w.rank()
            )));
        }
        w.ensure_antisymmetric(ANTISYMMETRY_TOL)?;
        Ok(VelocityBivector { w })
    }

    pub fn tensor(&self) -> &ExtTensor {
        &self.w
    }

    pub fn frame(&self) -> &Frame {
        self.w.frame()
    }

    pub fn anchor(&self) -> Vector3<f64> {
        Vector3::from_column_slice(self.w.frame().anchor().as_slice())
    }

    /// `(V, Omega)` at the anchor point.
    pub fn frame_motion(&self) -> (Vector3<f64>, Vector3<f64>) {
        let v = Vector3::from_fn(|i, _| self.w.get(&[FIVE, i]));
        let b = Matrix3::from_fn(|i, j| self.w.get(&[i, j]));
        let omega = dual3(self.w.frame().metric(), &b).expect("euclidean3 frame");
        (v, omega)
    }

    /// The same motion seen from the O-basis at `to`, by tensor transport.
    pub fn transfer(&self, to: &Vector3<f64>) -> Result<VelocityBivector> {
        Ok(VelocityBivector {
            w: transport_tensor(&self.w, to.as_slice())?,
        })
    }

    /// `(V', Omega')` at `to`.
    pub fn transfer_velocity(&self, to: &Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>)> {
        Ok(self.transfer(to)?.frame_motion())
    }

    /// Components `W^{GD}` over the ordered pairs `G < D`.
    pub(crate) fn pair_components(&self) -> [f64; 6] {
        PAIRS.map(|(a, b)| self.w.get(&[a, b]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_placement() {
        let o = Vector3::zeros();
        let w = VelocityBivector::from_frame_motion(
            &Vector3::new(1.0, 0.0, 0.0),
            &Vector3::zeros(),
            &o,
        )
        .unwrap();
        assert_eq!(w.tensor().get(&[3, 0]), 1.0);
        assert_eq!(w.tensor().get(&[0, 3]), -1.0);
        assert_eq!(w.tensor().max_abs(), 1.0);
        assert_eq!(w.tensor().comps().iter().filter(|c| **c != 0.0).count(), 2);

        let w = VelocityBivector::from_frame_motion(
            &Vector3::zeros(),
            &Vector3::new(0.0, 0.0, 1.0),
            &o,
        )
        .unwrap();
        assert_eq!(w.tensor().get(&[0, 1]), 1.0);
        assert_eq!(w.tensor().get(&[1, 0]), -1.0);

        let w =
            VelocityBivector::from_frame_motion(&Vector3::zeros(), &Vector3::zeros(), &o).unwrap();
        assert_eq!(w.tensor().max_abs(), 0.0);
    }

    #[test]
    fn round_trip_and_transfer() {
        let v = Vector3::new(0.5, -1.0, 2.0);
        let omega = Vector3::new(0.1, 0.2, -0.3);
        let at = Vector3::new(1.0, 2.0, 3.0);
        let w = VelocityBivector::from_frame_motion(&v, &omega, &at).unwrap();
        assert_eq!(w.frame_motion(), (v, omega));
        assert_eq!(w.transfer_velocity(&at).unwrap(), (v, omega));

        let spin = VelocityBivector::from_frame_motion(
            &Vector3::zeros(),
            &Vector3::z(),
            &Vector3::zeros(),
        )
        .unwrap();
        let (v1, o1) = spin.transfer_velocity(&Vector3::x()).unwrap();
        assert_eq!(v1, Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(o1, Vector3::z());

        let drift = VelocityBivector::from_frame_motion(&v, &Vector3::zeros(), &at).unwrap();
        assert_eq!(
            drift
                .transfer_velocity(&Vector3::new(-4.0, 0.0, 9.0))
                .unwrap()
                .0,
            v
        );
    }

    #[test]
    fn rejects_spacetime_metric() {
        let m = std::sync::Arc::new(crate::metric::Metric::minkowski4());
        let t = ExtTensor::zeros(Frame::origin(m), 2, 0);
        assert!(VelocityBivector::from_tensor(t).is_err());
    }
}
