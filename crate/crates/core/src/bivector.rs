//! Z/E decomposition of extended bivectors and 3D Hodge duality.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metric::Metric;
use crate::tensor::ExtTensor;

/// Antisymmetry tolerance accepted on input bivectors.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Rotation part (`z_part[a][b] = b^{ab}`) and translation part
/// (`e_part[a] = b^{a5}`) of an extended bivector.
#[derive(Debug, Clone, PartialEq)]
pub struct BivectorSplit {
    pub z_part: DMatrix<f64>,
    pub e_part: DVector<f64>,
    pub frame: Frame,
}

/// Splits a rank-(2,0) antisymmetric tensor into its Z- and E-components.
///
/// The bivector inner product is taken with the `1/xi` normalization, which
/// makes the E-component equal the `b^{a5}` components for every `xi`.
pub fn bivector_split(b: &ExtTensor) -> Result<BivectorSplit> {
    if b.rank() != (2, 0) {
        return Err(Error::Shape(format!(
            "bivector_split needs rank (2,0), got {:?}",
            b.rank()
        )));
    }
    b.ensure_antisymmetric(ANTISYMMETRY_TOL)?;
    let n = b.frame().n();
    let m = b.to_matrix()?;
    let mut z = m.view((0, 0), (n, n)).into_owned();
    // store the Z block exactly antisymmetric
    for i in 0..n {
        z[(i, i)] = 0.0;
        for j in i + 1..n {
            z[(j, i)] = -z[(i, j)];
        }
    }
    let e = DVector::from_fn(n, |a, _| m[(a, n)]);
    Ok(BivectorSplit {
        z_part: z,
        e_part: e,
        frame: b.frame().clone(),
    })
}

impl BivectorSplit {
    /// Rebuilds the extended bivector.
    pub fn reassemble(&self) -> ExtTensor {
        let n = self.frame.n();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.z_part);
        for a in 0..n {
            m[(a, n)] = self.e_part[a];
            m[(n, a)] = -self.e_part[a];
        }
        ExtTensor::from_matrix(self.frame.clone(), 2, 0, &m).expect("bivector shape")
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `Omega^k = 1/2 eps^{kij} b_ij` for an antisymmetric 3x3 array.
pub fn dual3(metric: &Metric, b: &Matrix3<f64>) -> Result<Vector3<f64>> {
    metric.require_dim(3)?;
    Ok(Vector3::new(
        b[(1, 2)] - b[(2, 1)],
        b[(2, 0)] - b[(0, 2)],
        b[(0, 1)] - b[(1, 0)],
    ) * 0.5)
}

/// `b^{ij} = eps^{ij}_k Omega^k`, inverse of [`dual3`].
pub fn dual3_inv(metric: &Metric, omega: &Vector3<f64>) -> Result<Matrix3<f64>> {
    metric.require_dim(3)?;
    Ok(Matrix3::from_fn(|i, j| {
        (0..3).map(|k| levi_civita(i, j, k) * omega[k]).sum()
    }))
}

/// The Levi-Civita symbol, exposed for oracles and contractions.
pub fn epsilon(i: usize, j: usize, k: usize) -> f64 {
    levi_civita(i, j, k)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn bivector(frame: Frame, z: [[f64; 3]; 3], e: [f64; 3]) -> ExtTensor {
        let mut t = ExtTensor::zeros(frame, 2, 0);
        for (i, row) in z.iter().enumerate() {
            for (j, zij) in row.iter().enumerate() {
                t.set(&[i, j], *zij);
            }
            t.set(&[i, 3], e[i]);
            t.set(&[3, i], -e[i]);
        }
        t
    }

    #[test]
    fn translation_only_bivector() {
        let f = Frame::origin(Arc::new(Metric::euclidean3()));
        let s = bivector_split(&bivector(f, [[0.0; 3]; 3], [1.0, -2.0, 0.5])).unwrap();
        assert_eq!(s.z_part, DMatrix::zeros(3, 3));
        assert_eq!(s.e_part.as_slice(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn rotation_only_bivector_and_round_trip() {
        let f = Frame::origin(Arc::new(Metric::euclidean3()));
        let z = [[0.0, 0.3, -1.0], [-0.3, 0.0, 2.0], [1.0, -2.0, 0.0]];
        let b = bivector(f, z, [0.0; 3]);
        let s = bivector_split(&b).unwrap();
        assert_eq!(s.e_part, DVector::zeros(3));
        assert_eq!(s.z_part[(1, 2)], 2.0);
        assert_eq!(s.reassemble(), b);
    }

    #[test]
    fn zero_bivector_splits_to_zero() {
        let f = Frame::origin(Arc::new(Metric::minkowski4()));
        let s = bivector_split(&ExtTensor::zeros(f, 2, 0)).unwrap();
        assert_eq!(s.z_part.amax(), 0.0);
        assert_eq!(s.e_part.amax(), 0.0);
    }

    #[test]
    fn asymmetric_input_reports_residual() {
        let f = Frame::origin(Arc::new(Metric::euclidean3()));
        let mut t = ExtTensor::zeros(f, 2, 0);
        t.set(&[0, 1], 1.0);
        match bivector_split(&t) {
            Err(Error::NotAntisymmetric { max_asymmetry }) => assert_eq!(max_asymmetry, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dual3_examples() {
        let m = Metric::euclidean3();
        let mut b = Matrix3::zeros();
        b[(0, 1)] = 1.0;
        b[(1, 0)] = -1.0;
        assert_eq!(dual3(&m, &b).unwrap(), Vector3::new(0.0, 0.0, 1.0));
        let omega = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(dual3(&m, &dual3_inv(&m, &omega).unwrap()).unwrap(), omega);
        assert_eq!(dual3(&m, &Matrix3::zeros()).unwrap(), Vector3::zeros());
        assert!(matches!(
            dual3(&Metric::minkowski4(), &b),
            Err(Error::UnsupportedDimension {
                expected: 3,
                found: 4
            })
        ));
    }
}
