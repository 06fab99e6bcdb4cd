//! Random inputs for property cases.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng as _;

use super::Rng;
use crate::frame::Frame;
use crate::metric::Metric;
use crate::motion::MotionParams;
use crate::poly::{Poly, PolyField};
use crate::rigid_body::Particle;
use crate::tensor::ExtTensor;

pub fn euclidean3() -> Arc<Metric> {
    static M: OnceLock<Arc<Metric>> = OnceLock::new();
    M.get_or_init(|| Arc::new(Metric::euclidean3())).clone()
}

pub fn minkowski4() -> Arc<Metric> {
    static M: OnceLock<Arc<Metric>> = OnceLock::new();
    M.get_or_init(|| Arc::new(Metric::minkowski4())).clone()
}

/// Either preset, with equal probability.
pub fn metric(rng: &mut Rng) -> Arc<Metric> {
    if rng.random_bool(0.5) {
        euclidean3()
    } else {
        minkowski4()
    }
}

pub fn uniform(rng: &mut Rng, r: f64) -> f64 {
    rng.random_range(-r..=r)
}

pub fn int(rng: &mut Rng, r: i32) -> f64 {
    rng.random_range(-r..=r) as f64
}

pub fn point(rng: &mut Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| uniform(rng, r)).collect()
}

pub fn dvec(rng: &mut Rng, n: usize, r: f64) -> DVector<f64> {
    DVector::from_vec(point(rng, n, r))
}

pub fn vec3(rng: &mut Rng, r: f64) -> Vector3<f64> {
    Vector3::new(uniform(rng, r), uniform(rng, r), uniform(rng, r))
}

pub fn antisymmetric(rng: &mut Rng, n: usize, r: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = uniform(rng, r);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// `exp(g^-1 w)` for a random antisymmetric `w`: a proper isometry of `g`.
pub fn isometry(rng: &mut Rng, metric: &Metric, r: f64) -> DMatrix<f64> {
    let w = antisymmetric(rng, metric.n(), r);
    (metric.g_inv() * w).exp()
}

pub fn motion_params(rng: &mut Rng, metric: &Metric) -> MotionParams {
    let l = isometry(rng, metric, 1.0);
    MotionParams::new(l, dvec(rng, metric.n(), 3.0))
}

pub fn tensor(rng: &mut Rng, frame: &Frame, contra: usize, co: usize, r: f64) -> ExtTensor {
    let len = frame.dim().pow((contra + co) as u32);
    let comps = (0..len).map(|_| uniform(rng, r)).collect();
    ExtTensor::from_comps(frame.clone(), contra, co, comps).expect("component count")
}

pub fn bivector(rng: &mut Rng, frame: &Frame, integer: bool) -> ExtTensor {
    let d = frame.dim();
    let mut t = ExtTensor::zeros(frame.clone(), 2, 0);
    for a in 0..d {
        for b in a + 1..d {
            let v = if integer {
                int(rng, 3)
            } else {
                uniform(rng, 2.0)
            };
            t.set(&[a, b], v);
            t.set(&[b, a], -v);
        }
    }
    t
}

pub fn basis_bivector(frame: &Frame, a: usize, b: usize) -> ExtTensor {
    let mut t = ExtTensor::zeros(frame.clone(), 2, 0);
    t.set(&[a, b], 1.0);
    t.set(&[b, a], -1.0);
    t
}

/// Two distinct indices below `d`.
pub fn index_pair(rng: &mut Rng, d: usize) -> (usize, usize) {
    let a = rng.random_range(0..d);
    let b = (a + rng.random_range(1..d)) % d;
    (a, b)
}

/// A polynomial with `terms` random monomials of total degree at most
/// `max_deg`; integer coefficients in [-3, 3] or real ones in [-1, 1].
pub fn poly(rng: &mut Rng, n: usize, max_deg: u32, terms: usize, integer: bool) -> Poly {
    let mut p = Poly::zero(n);
    for _ in 0..terms {
        let mut exps = vec![0u32; n];
        for _ in 0..rng.random_range(0..=max_deg) {
            exps[rng.random_range(0..n)] += 1;
        }
        let c = if integer {
            int(rng, 3)
        } else {
            uniform(rng, 1.0)
        };
        p = p.add(&Poly::monomial(c, exps));
    }
    p
}

pub fn vector_field(rng: &mut Rng, n: usize, max_deg: u32, integer: bool) -> PolyField {
    PolyField::vector((0..n).map(|_| poly(rng, n, max_deg, 3, integer)).collect())
        .expect("n components")
}

pub fn field_diff(a: &PolyField, b: &PolyField) -> f64 {
    a.comps()
        .iter()
        .zip(b.comps())
        .map(|(p, q)| p.max_coef_diff(q))
        .fold(0.0, f64::max)
}

/// `n` particles with masses in [0.1, 5], positions in [-5, 5]^3 and
/// velocities in [-2, 2]^3.
pub fn particles(rng: &mut Rng, n: usize) -> Vec<Particle> {
    (0..n)
        .map(|_| Particle {
            m: rng.random_range(0.1..=5.0),
            x: vec3(rng, 5.0),
            v: vec3(rng, 2.0),
        })
        .collect()
}

/// Positions in [-r, r]^3 pairwise at least `sep` apart and at least `sep`
/// from `avoid`.
pub fn separated_positions(
    rng: &mut Rng,
    n: usize,
    r: f64,
    sep: f64,
    avoid: Option<Vector3<f64>>,
) -> Vec<Vector3<f64>> {
    let mut out: Vec<Vector3<f64>> = Vec::with_capacity(n);
    while out.len() < n {
        let x = vec3(rng, r);
        let clear = out
            .iter()
            .chain(avoid.iter())
            .all(|y| (x - y).norm() >= sep);
        if clear {
            out.push(x);
        }
    }
    out
}
