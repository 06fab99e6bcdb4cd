//! Point-particle and rigid-body mechanics in three dimensions, written with
//! (3+1)-tensors: velocity bivector, inertia tensor, momentum and force
//! 2-forms, and a Newtonian integrator whose output is checked against
//! `dM/dt = K`.

mod dynamics;
mod forces;
mod inertia;
mod momentum;
mod velocity;

use std::sync::{Arc, OnceLock};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metric::Metric;

pub use dynamics::{
    simulate, step_dynamics, MomentumBalance, Sample, SimulationOptions, Trajectory,
    TrajectorySummary,
};
pub use forces::{ForceFn, ForceModel, ForcePreset, ForceSpec};
pub use inertia::{body_inertia_at, kinetic_energy, particle_inertia, InertiaTensor};
pub use momentum::{
    force_tensor, linear_angular, momentum_tensor, momentum_tensor_rigid, rigid_motion_of,
    total_momentum, RIGIDITY_TOL,
};
pub use velocity::VelocityBivector;

/// Index of the fifth direction in the (3+1) layout.
pub const FIVE: usize = 3;

/// The six ordered index pairs `(G, D)`, `G < D`, of a 4x4 antisymmetric
/// array, with the fifth direction last.
pub(crate) const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub(crate) fn euclidean() -> Arc<Metric> {
    static METRIC: OnceLock<Arc<Metric>> = OnceLock::new();
    METRIC
        .get_or_init(|| Arc::new(Metric::euclidean3()))
        .clone()
}

/// O-basis at `o` over the euclidean3 metric.
pub fn frame_at(o: &Vector3<f64>) -> Frame {
    Frame::o_basis(euclidean(), o.as_slice()).expect("finite point")
}

pub(crate) fn require_euclidean(frame: &Frame) -> Result<()> {
    frame.metric().require_dim(3)?;
    if !frame.metric().is_euclidean3() {
        return Err(Error::InvalidMetric(
            "rigid-body quantities need the euclidean3 metric".into(),
        ));
    }
    frame.ensure_pointwise()
}

/// Point mass with position and velocity (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub m: f64,
    pub x: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl Particle {
    pub fn new(m: f64, x: Vector3<f64>, v: Vector3<f64>) -> Result<Self> {
        let p = Particle { m, x, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "particle mass must be positive, got {}",
                self.m
            )));
        }
        if self.x.iter().chain(self.v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("particle state".into()));
        }
        Ok(())
    }
}

/// A system of particles together with the force law acting on them.
#[derive(Debug, Clone)]
pub struct Body {
    pub particles: Vec<Particle>,
    pub force: ForceModel,
}

impl Body {
    pub fn new(particles: Vec<Particle>, force: ForceModel) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParameter(
                "a body needs at least one particle".into(),
            ));
        }
        for p in &particles {
            p.validate()?;
        }
        Ok(Body { particles, force })
    }

    pub fn free(particles: Vec<Particle>) -> Result<Self> {
        Self::new(particles, ForceModel::None)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.m).sum()
    }

    pub fn forces(&self) -> Result<Vec<Vector3<f64>>> {
        self.force.forces(&self.particles)
    }

    /// `1/2 sum m |v|^2`.
    pub fn kinetic_energy(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| 0.5 * p.m * p.v.norm_squared())
            .sum()
    }

    /// Kinetic plus potential energy, when the force law has a potential.
    pub fn total_energy(&self) -> Option<f64> {
        self.force
            .potential(&self.particles)
            .map(|u| u + self.kinetic_energy())
    }

    pub fn with_particles(&self, particles: Vec<Particle>) -> Body {
        Body {
            particles,
            force: self.force.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Body> {
        serde_json::from_str::<BodyDoc>(s)?.build()
    }
}

/// JSON form `{"particles": [{"m", "x", "v"}], "force": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyDoc {
    pub particles: Vec<Particle>,
    #[serde(default)]
    pub force: ForceSpec,
}

impl BodyDoc {
    pub fn build(&self) -> Result<Body> {
        Body::new(self.particles.clone(), self.force.build()?)
    }
}
