use nalgebra::Vector3;
use serde::Serialize;

use super::{force_tensor, momentum_tensor, total_momentum, Body, Particle};
use crate::error::{Error, Result};

fn derivative(b: &Body, particles: &[Particle]) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>> {
    let forces = b.force.forces(particles)?;
    Ok(particles
        .iter()
        .zip(forces)
        .map(|(p, f)| (p.v, f / p.m))
        .collect())
}

fn advanced(particles: &[Particle], k: &[(Vector3<f64>, Vector3<f64>)], h: f64) -> Vec<Particle> {
    particles
        .iter()
        .zip(k)
        .map(|(p, (dx, dv))| Particle {
            m: p.m,
            x: p.x + dx * h,
            v: p.v + dv * h,
        })
        .collect()
}

/// One classical RK4 step of Newton's equations for every particle.
pub fn step_dynamics(b: &Body, dt: f64) -> Result<Body> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let s = &b.particles;
    let k1 = derivative(b, s)?;
    let k2 = derivative(b, &advanced(s, &k1, dt / 2.0))?;
    let k3 = derivative(b, &advanced(s, &k2, dt / 2.0))?;
    let k4 = derivative(b, &advanced(s, &k3, dt))?;
    let next = s
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dx = (k1[i].0 + k2[i].0 * 2.0 + k3[i].0 * 2.0 + k4[i].0) * (dt / 6.0);
            let dv = (k1[i].1 + k2[i].1 * 2.0 + k3[i].1 * 2.0 + k4[i].1) * (dt / 6.0);
            Particle {
                m: p.m,
                x: p.x + dx,
                v: p.v + dv,
            }
        })
        .collect::<Vec<_>>();
    if next
        .iter()
        .any(|p| p.x.iter().chain(p.v.iter()).any(|c| !c.is_finite()))
    {
        return Err(Error::NonFinite("integrated state".into()));
    }
    Ok(b.with_particles(next))
}

/// Discrete check of `dM/dt = K` over one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumBalance {
    /// `max |(M(t+dt) - M(t)) / dt - K(t + dt/2)|` over components.
    pub residual: f64,
    /// Largest component of the midpoint force tensor.
    pub force_scale: f64,
}

impl MomentumBalance {
    /// Compares total momentum tensors at `o` before and after a step of
    /// length `dt` with the force tensor at the step midpoint.
    pub fn evaluate(
        before: &Body,
        after: &Body,
        dt: f64,
        o: &Vector3<f64>,
    ) -> Result<MomentumBalance> {
        if before.len() != after.len() {
            return Err(Error::ParticleCount {
                left: before.len(),
                right: after.len(),
            });
        }
        let rate = momentum_tensor(after, o)?
            .sub(&momentum_tensor(before, o)?)?
            .scale(1.0 / dt);
        let midpoint = step_dynamics(before, dt / 2.0)?;
        let k = force_tensor(&midpoint, o)?;
        Ok(MomentumBalance {
            residual: rate.max_abs_diff(&k)?,
            force_scale: k.max_abs(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub dt: f64,
    pub steps: u64,
    /// Reference point for momentum, angular momentum and torque.
    pub origin: Vector3<f64>,
    /// Keep every `record_every`-th state (the first and last are always kept).
    pub record_every: u64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            dt: 1e-3,
            steps: 1000,
            origin: Vector3::zeros(),
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub particles: Vec<Particle>,
    pub momentum: Vector3<f64>,
    pub angular_momentum: Vector3<f64>,
    pub kinetic_energy: f64,
}

impl Sample {
    fn of(t: f64, b: &Body, o: &Vector3<f64>) -> Sample {
        let (momentum, angular_momentum) = total_momentum(&b.particles, o);
        Sample {
            t,
            particles: b.particles.clone(),
            momentum,
            angular_momentum,
            kinetic_energy: b.kinetic_energy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub steps: u64,
    pub dt: f64,
    /// `max |E(t) - E(0)| / |E(0)|` for kinetic plus potential energy;
    /// absolute when `E(0) = 0`, absent for custom forces.
    pub energy_drift: Option<f64>,
    /// Same measure for the momentum 2-form at the reference point.
    pub momentum_tensor_drift: f64,
    pub balance_max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub summary: TrajectorySummary,
    pub final_body: Body,
}

fn relative(change: f64, reference: f64) -> f64 {
    if reference != 0.0 {
        change / reference.abs()
    } else {
        change
    }
}

/// Integrates `steps` RK4 steps, checking `dM/dt = K` at every step.
pub fn simulate(b: &Body, opts: &SimulationOptions) -> Result<Trajectory> {
    let o = &opts.origin;
    let every = opts.record_every.max(1);
    let m0 = momentum_tensor(b, o)?;
    let e0 = b.total_energy();
    let mut samples = vec![Sample::of(0.0, b, o)];
    let mut body = b.clone();
    let mut m_drift: f64 = 0.0;
    let mut e_drift: Option<f64> = e0.map(|_| 0.0);
    let mut balance: f64 = 0.0;
    for step in 1..=opts.steps {
        let next = step_dynamics(&body, opts.dt)?;
        balance = balance.max(MomentumBalance::evaluate(&body, &next, opts.dt, o)?.residual);
        body = next;
        m_drift = m_drift.max(momentum_tensor(&body, o)?.max_abs_diff(&m0)?);
        if let (Some(d), Some(start), Some(now)) = (e_drift.as_mut(), e0, body.total_energy()) {
            *d = d.max((now - start).abs());
        }
        if step % every == 0 || step == opts.steps {
            samples.push(Sample::of(step as f64 * opts.dt, &body, o));
        }
    }
    let summary = TrajectorySummary {
        steps: opts.steps,
        dt: opts.dt,
        energy_drift: e_drift.zip(e0).map(|(d, e)| relative(d, e)),
        momentum_tensor_drift: relative(m_drift, m0.max_abs()),
        balance_max_residual: balance,
    };
    Ok(Trajectory {
        samples,
        summary,
        final_body: body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigid_body::{linear_angular, ForceModel};

    fn particle(m: f64, x: [f64; 3], v: [f64; 3]) -> Particle {
        Particle {
            m,
            x: Vector3::from(x),
            v: Vector3::from(v),
        }
    }

    #[test]
    fn free_particles_move_straight() {
        let b = Body::free(vec![particle(1.0, [0.0; 3], [1.0, 2.0, 3.0])]).unwrap();
        let next = step_dynamics(&b, 0.5).unwrap();
        assert_eq!(next.particles[0].x, Vector3::new(0.5, 1.0, 1.5));
        assert!(step_dynamics(&b, 0.0).is_err());
    }

    #[test]
    fn free_system_conserves_momentum_tensor() {
        let b = Body::free(vec![
            particle(1.0, [0.0, 0.0, 0.0], [1.0, 0.0, 0.5]),
            particle(2.0, [1.0, -1.0, 0.0], [0.0, 2.0, -1.0]),
            particle(0.5, [0.0, 3.0, 1.0], [-1.0, -1.0, 0.0]),
        ])
        .unwrap();
        let opts = SimulationOptions {
            dt: 1e-3,
            steps: 10_000,
            record_every: 1000,
            ..Default::default()
        };
        let traj = simulate(&b, &opts).unwrap();
        assert!(traj.summary.momentum_tensor_drift <= 1e-8);
        assert_eq!(traj.samples.len(), 11);
    }

    #[test]
    fn constant_force_gives_linear_momentum_rate() {
        let b = Body::new(
            vec![particle(2.0, [0.0; 3], [1.0, 0.0, 0.0])],
            ForceModel::UniformGravity {
                g: Vector3::new(0.0, 0.0, -9.81),
            },
        )
        .unwrap();
        let dt = 1e-2;
        let next = step_dynamics(&b, dt).unwrap();
        let o = Vector3::zeros();
        let (p0, _) = linear_angular(&momentum_tensor(&b, &o).unwrap()).unwrap();
        let (p1, _) = linear_angular(&momentum_tensor(&next, &o).unwrap()).unwrap();
        let rate = (p1 - p0) / dt;
        assert!((rate - Vector3::new(0.0, 0.0, -19.62)).amax() < 1e-12);
        assert!(
            MomentumBalance::evaluate(&b, &next, dt, &o)
                .unwrap()
                .residual
                < 1e-10
        );
    }

    #[test]
    fn spring_pair_conserves_momentum_tensor() {
        let b = Body::new(
            vec![
                particle(1.0, [-0.5, 0.0, 0.0], [0.0, 0.3, 0.0]),
                particle(1.0, [0.5, 0.0, 0.0], [0.0, -0.3, 0.1]),
            ],
            ForceModel::PairwiseSpring {
                k: 10.0,
                rest_length: 0.8,
            },
        )
        .unwrap();
        let opts = SimulationOptions {
            dt: 1e-3,
            steps: 2000,
            ..Default::default()
        };
        let traj = simulate(&b, &opts).unwrap();
        assert!(traj.summary.momentum_tensor_drift < 1e-9);
        assert!(traj.summary.energy_drift.unwrap() < 1e-8);
        assert!(traj.summary.balance_max_residual < 1e-6);
    }
}
