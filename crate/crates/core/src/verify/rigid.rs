//! Rigid-body and dynamics properties, each against a classical-vector
//! oracle.

use nalgebra::{Matrix3, Vector3};
use rand::Rng as _;

use super::sample;
use super::{relative, Property, Rng};
use crate::error::Result;
use crate::rigid_body::{
    body_inertia_at, force_tensor, kinetic_energy, linear_angular, momentum_tensor,
    momentum_tensor_rigid, simulate, Body, ForceModel, Particle, SimulationOptions,
    VelocityBivector,
};
use crate::transport::transport_tensor;

pub fn properties() -> Vec<Property> {
    vec![
        Property::new(
            "rigid.velocity_transfer",
            1e-12,
            "transport of W gives V + Omega x X, Omega",
            velocity_transfer,
        ),
        Property::new(
            "rigid.kinetic_energy",
            1e-10,
            "1/2 I W W equals 1/2 sum m |V + Omega x r|^2",
            kinetic,
        ),
        Property::new(
            "rigid.inertia_dual",
            1e-12,
            "dualized inertia equals sum m (r^2 delta - r r)",
            inertia_dual,
        ),
        Property::new(
            "rigid.momentum_pair",
            1e-12,
            "summed momentum 2-form holds (sum m v, sum r x m v)",
            momentum_pair,
        ),
        Property::new(
            "rigid.momentum_rigid_path",
            1e-10,
            "I W equals the per-particle momentum sum",
            momentum_rigid_path,
        ),
        Property::new(
            "rigid.momentum_transport",
            1e-12,
            "M at o1 transported to o2 equals M at o2",
            momentum_transport,
        ),
        Property::new(
            "rigid.force_pair",
            1e-12,
            "force 2-form holds (sum F, sum r x F)",
            force_pair,
        ),
        Property::new(
            "rigid.antisymmetry",
            0.0,
            "W, M and K are exactly antisymmetric",
            antisymmetry,
        ),
        Property::new(
            "dynamics.free_conservation",
            1e-10,
            "free systems keep M constant",
            free_conservation,
        ),
    ]
}

fn rigid_body(rng: &mut Rng, o: &Vector3<f64>) -> Result<(Body, Vector3<f64>, Vector3<f64>)> {
    let n = rng.random_range(1..=20);
    let v = sample::vec3(rng, 3.0);
    let omega = sample::vec3(rng, 3.0);
    let mut ps = sample::particles(rng, n);
    for p in &mut ps {
        p.v = v + omega.cross(&(p.x - o));
    }
    Ok((Body::free(ps)?, v, omega))
}

fn velocity_transfer(rng: &mut Rng) -> Result<f64> {
    let at = sample::vec3(rng, 5.0);
    let to = sample::vec3(rng, 5.0);
    let v = sample::vec3(rng, 3.0);
    let omega = sample::vec3(rng, 3.0);
    let (v2, omega2) =
        VelocityBivector::from_frame_motion(&v, &omega, &at)?.transfer_velocity(&to)?;
    let expected = v + omega.cross(&(to - at));
    Ok(relative(
        (v2 - expected).amax().max((omega2 - omega).amax()),
        expected.amax(),
    ))
}

fn kinetic(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let (b, v, omega) = rigid_body(rng, &o)?;
    let w = VelocityBivector::from_frame_motion(&v, &omega, &o)?;
    let e = kinetic_energy(&body_inertia_at(&b, &o)?, &w)?;
    let expected: f64 = b
        .particles
        .iter()
        .map(|p| 0.5 * p.m * (v + omega.cross(&(p.x - o))).norm_squared())
        .sum();
    Ok((e - expected).abs() / expected.abs().max(f64::MIN_POSITIVE))
}

fn inertia_dual(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let n = rng.random_range(1..=20);
    let b = Body::free(sample::particles(rng, n))?;
    let got = body_inertia_at(&b, &o)?.dualized();
    let expected = b.particles.iter().fold(Matrix3::zeros(), |acc, p| {
        let r = p.x - o;
        acc + (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * p.m
    });
    Ok(relative((got - expected).amax(), expected.amax()))
}

fn momentum_pair(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let n = rng.random_range(1..=20);
    let b = Body::free(sample::particles(rng, n))?;
    let (p, l) = linear_angular(&momentum_tensor(&b, &o)?)?;
    let (ep, el) = b
        .particles
        .iter()
        .fold((Vector3::zeros(), Vector3::zeros()), |(sp, sl), q| {
            (sp + q.v * q.m, sl + (q.x - o).cross(&(q.v * q.m)))
        });
    Ok(relative(
        (p - ep).amax().max((l - el).amax()),
        ep.amax().max(el.amax()),
    ))
}

fn momentum_rigid_path(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let (b, _, _) = rigid_body(rng, &o)?;
    let a = momentum_tensor(&b, &o)?;
    let r = momentum_tensor_rigid(&b, &o)?;
    Ok(relative(a.max_abs_diff(&r)?, a.max_abs()))
}

fn momentum_transport(rng: &mut Rng) -> Result<f64> {
    let (o1, o2) = (sample::vec3(rng, 5.0), sample::vec3(rng, 5.0));
    let n = rng.random_range(1..=20);
    let b = Body::free(sample::particles(rng, n))?;
    let moved = transport_tensor(&momentum_tensor(&b, &o1)?, o2.as_slice())?;
    let direct = momentum_tensor(&b, &o2)?;
    Ok(relative(moved.max_abs_diff(&direct)?, direct.max_abs()))
}

fn random_force(rng: &mut Rng) -> ForceModel {
    match rng.random_range(0..3) {
        0 => ForceModel::UniformGravity {
            g: sample::vec3(rng, 10.0),
        },
        1 => ForceModel::PairwiseSpring {
            k: rng.random_range(0.5..=20.0),
            rest_length: rng.random_range(0.0..=2.0),
        },
        _ => ForceModel::InverseSquare {
            k: rng.random_range(0.5..=5.0),
            center: Some(sample::vec3(rng, 1.0) * 10.0),
        },
    }
}

fn force_pair(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let n = rng.random_range(2..=10);
    let b = Body::new(sample::particles(rng, n), random_force(rng))?;
    let (f, t) = linear_angular(&force_tensor(&b, &o)?)?;
    let forces = b.forces()?;
    let ef: Vector3<f64> = forces.iter().sum();
    let et = b
        .particles
        .iter()
        .zip(&forces)
        .fold(Vector3::zeros(), |acc, (p, f)| acc + (p.x - o).cross(f));
    let scale = forces.iter().map(|f| f.amax()).fold(0.0, f64::max) * 10.0;
    Ok(relative((f - ef).amax().max((t - et).amax()), scale))
}

fn antisymmetry(rng: &mut Rng) -> Result<f64> {
    let o = sample::vec3(rng, 5.0);
    let n = rng.random_range(2..=10);
    let b = Body::new(sample::particles(rng, n), random_force(rng))?;
    let w =
        VelocityBivector::from_frame_motion(&sample::vec3(rng, 3.0), &sample::vec3(rng, 3.0), &o)?;
    let moved = w.transfer(&sample::vec3(rng, 5.0))?;
    Ok([
        w.tensor().antisymmetry_residual()?,
        moved.tensor().antisymmetry_residual()?,
        momentum_tensor(&b, &o)?.antisymmetry_residual()?,
        force_tensor(&b, &o)?.antisymmetry_residual()?,
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

fn free_conservation(rng: &mut Rng) -> Result<f64> {
    let n = rng.random_range(1..=5);
    let ps: Vec<Particle> = sample::particles(rng, n);
    let opts = SimulationOptions {
        dt: 1e-2,
        steps: 100,
        origin: sample::vec3(rng, 5.0),
        record_every: 100,
    };
    Ok(simulate(&Body::free(ps)?, &opts)?
        .summary
        .momentum_tensor_drift)
}
