use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{body_inertia_at, frame_at, require_euclidean, Body, Particle, VelocityBivector, FIVE};
use crate::bivector::dual3;
use crate::error::{Error, Result};
use crate::tensor::ExtTensor;
use crate::transport::transport_tensor;

/// Relative tolerance on pairwise distance rates when deciding whether a
/// state is a rigid motion.
pub const RIGIDITY_TOL: f64 = 1e-9;

/// Local 2-form of a particle at its own position: `X_{5i} = -X_{i5} = q_i`.
fn local_pair_form(at: &Vector3<f64>, q: &Vector3<f64>) -> ExtTensor {
    let mut t = ExtTensor::zeros(frame_at(at), 0, 2);
    for i in 0..3 {
        t.set(&[FIVE, i], q[i]);
        t.set(&[i, FIVE], -q[i]);
    }
    t
}

fn sum_transported<'a>(
    o: &Vector3<f64>,
    parts: impl Iterator<Item = (&'a Vector3<f64>, Vector3<f64>)>,
) -> Result<ExtTensor> {
    let mut total = ExtTensor::zeros(frame_at(o), 0, 2);
    for (x, q) in parts {
        let local = local_pair_form(x, &q);
        total = total.add(&transport_tensor(&local, o.as_slice())?)?;
    }
    Ok(total)
}

/// Momentum 2-form at `o`: the per-particle `M_{5i} = m v_i` transported to
/// `o` and summed.
pub fn momentum_tensor(b: &Body, o: &Vector3<f64>) -> Result<ExtTensor> {
    sum_transported(o, b.particles.iter().map(|p| (&p.x, p.v * p.m)))
}

/// Force 2-form at `o`: the per-particle `K_{5i} = F_i` transported to `o`
/// and summed.
pub fn force_tensor(b: &Body, o: &Vector3<f64>) -> Result<ExtTensor> {
    let forces = b.forces()?;
    sum_transported(o, b.particles.iter().zip(forces).map(|(p, f)| (&p.x, f)))
}

/// The pair `(X_{5i}, 1/2 eps^{ijk} X_jk)` of a 2-form: momentum and angular
/// momentum about the anchor, or force and torque.
pub fn linear_angular(t: &ExtTensor) -> Result<(Vector3<f64>, Vector3<f64>)> {
    require_euclidean(t.frame())?;
    if t.rank() != (0, 2) {
        return Err(Error::Shape(format!(
            "expected a rank (0,2) tensor, got {:?}",
            t.rank()
        )));
    }
    let linear = Vector3::from_fn(|i, _| t.get(&[FIVE, i]));
    let block = Matrix3::from_fn(|i, j| t.get(&[i, j]));
    Ok((linear, dual3(t.frame().metric(), &block)?))
}

/// `(sum m v, sum (x - o) x m v)` computed directly.
pub fn total_momentum(particles: &[Particle], o: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    particles
        .iter()
        .fold((Vector3::zeros(), Vector3::zeros()), |(p, l), q| {
            let mv = q.v * q.m;
            (p + mv, l + (q.x - o).cross(&mv))
        })
}

fn cross_matrix(r: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -r[2], r[1], r[2], 0.0, -r[0], -r[1], r[0], 0.0)
}

/// Velocity bivector at `o` of a rigidly moving particle set.
///
/// Fails with [`Error::NotRigid`] when some pairwise distance changes at a
/// relative rate above [`RIGIDITY_TOL`].
pub fn rigid_motion_of(particles: &[Particle], o: &Vector3<f64>) -> Result<VelocityBivector> {
    if particles.is_empty() {
        return Err(Error::InvalidParameter("no particles".into()));
    }
    let speed = particles.iter().map(|p| p.v.norm()).fold(0.0, f64::max);
    for (i, a) in particles.iter().enumerate() {
        for b in &particles[i + 1..] {
            let d = a.x - b.x;
            let dist = d.norm();
            let rate = d.dot(&(a.v - b.v)).abs();
            if rate > RIGIDITY_TOL * dist * speed.max(f64::MIN_POSITIVE) {
                return Err(Error::NotRigid(format!(
                    "distance rate {:e} between particles at distance {dist:e}",
                    rate / dist.max(f64::MIN_POSITIVE)
                )));
            }
        }
    }
    // v_k = V + Omega x r_k = V - [r_k]x Omega
    let n = particles.len();
    // zero rows keep the system at least square for the SVD solve
    let rows = (3 * n).max(6);
    let mut a = DMatrix::zeros(rows, 6);
    let mut rhs = DVector::zeros(rows);
    for (k, p) in particles.iter().enumerate() {
        let r = p.x - o;
        let c = -cross_matrix(&r);
        for i in 0..3 {
            a[(3 * k + i, i)] = 1.0;
            for j in 0..3 {
                a[(3 * k + i, 3 + j)] = c[(i, j)];
            }
            rhs[3 * k + i] = p.v[i];
        }
    }
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Singular(format!("rigid motion fit: {e}")))?;
    let fit_residual = (&a * &sol - &rhs).amax();
    let scale = speed
        + particles
            .iter()
            .map(|p| (p.x - o).norm())
            .fold(0.0, f64::max)
            * sol.rows(3, 3).norm();
    if fit_residual > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotRigid(format!(
            "velocity field residual {fit_residual:e}"
        )));
    }
    let v = Vector3::new(sol[0], sol[1], sol[2]);
    let omega = Vector3::new(sol[3], sol[4], sol[5]);
    VelocityBivector::from_frame_motion(&v, &omega, o)
}

/// Momentum 2-form of a rigid body from its inertia tensor at `o` and its
/// velocity bivector, `M_GD = I_{GD|TS|} W^TS`.
pub fn momentum_tensor_rigid(b: &Body, o: &Vector3<f64>) -> Result<ExtTensor> {
    let w = rigid_motion_of(&b.particles, o)?;
    body_inertia_at(b, o)?.contract(&w)
}
