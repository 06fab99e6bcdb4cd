//! Properties of the Lagrange layer.

use nalgebra::Vector3;
use rand::Rng as _;

use super::sample::{self, euclidean3};
use super::{relative, Property, Rng};
use crate::error::Result;
use crate::frame::Frame;
use crate::lagrange::{
    dh_l, dl_form, k_identity_check, Lagrangian, StateOfMotion, DEFAULT_FAMILY_STEP,
};
use crate::motion::{r_from_infinitesimal, InfinitesimalMotion};
use crate::rigid_body::{force_tensor, momentum_tensor, step_dynamics, Body, ForceModel, Particle};
use crate::transport::{o_to_p, p_to_o, transport_tensor};

pub fn properties() -> Vec<Property> {
    vec![
        Property::new(
            "lagrange.contraction",
            1e-6,
            "1/2 DL_KL A^KL equals the family derivative of L",
            contraction,
        ),
        Property::new(
            "lagrange.k_identity",
            1e-12,
            "DL = -K with analytic gradients",
            k_identity,
        ),
        Property::new(
            "lagrange.chart_transport",
            1e-8,
            "DL in one chart transports to DL in another",
            chart_transport,
        ),
        Property::new(
            "lagrange.linearity",
            1e-6,
            "family derivatives of L are linear in the family",
            linearity,
        ),
        Property::new(
            "lagrange.antisymmetry",
            0.0,
            "DL is exactly antisymmetric",
            antisymmetry,
        ),
        Property::new(
            "lagrange.trajectory",
            1e-5,
            "dM/dt = -DL at step midpoints",
            trajectory,
        ),
    ]
}

struct System {
    masses: Vec<f64>,
    force: ForceModel,
    x: Vec<Vector3<f64>>,
    v: Vec<Vector3<f64>>,
}

impl System {
    fn lagrangian(&self) -> Result<Lagrangian> {
        Lagrangian::from_force_model(self.masses.clone(), self.force.clone())
    }

    fn state(&self) -> Result<StateOfMotion> {
        StateOfMotion::new(0.0, self.x.clone(), self.v.clone())
    }

    fn body(&self) -> Result<Body> {
        let ps = self
            .masses
            .iter()
            .zip(&self.x)
            .zip(&self.v)
            .map(|((m, x), v)| Particle {
                m: *m,
                x: *x,
                v: *v,
            });
        Body::new(ps.collect(), self.force.clone())
    }
}

/// A random conservative system; `analytic_only` leaves out the
/// inverse-square presets.
fn system(rng: &mut Rng, analytic_only: bool) -> System {
    let kinds = if analytic_only { 2 } else { 4 };
    let kind = rng.random_range(0..kinds);
    let n = if kind == 0 {
        rng.random_range(1..=4)
    } else {
        rng.random_range(2..=4)
    };
    let center = (kind == 3).then(|| sample::vec3(rng, 2.0));
    let force = match kind {
        0 => ForceModel::UniformGravity {
            g: sample::vec3(rng, 10.0),
        },
        1 => ForceModel::PairwiseSpring {
            k: rng.random_range(0.5..=10.0),
            rest_length: rng.random_range(0.0..=1.5),
        },
        2 => ForceModel::InverseSquare {
            k: rng.random_range(0.5..=2.0),
            center: None,
        },
        _ => ForceModel::InverseSquare {
            k: rng.random_range(0.5..=2.0),
            center,
        },
    };
    let masses = (0..n).map(|_| rng.random_range(0.2..=3.0)).collect();
    let x = sample::separated_positions(rng, n, 2.0, 0.5, center);
    let v = (0..n).map(|_| sample::vec3(rng, 1.0)).collect();
    System {
        masses,
        force,
        x,
        v,
    }
}

fn chart(rng: &mut Rng) -> Result<Frame> {
    Frame::p_basis(euclidean3(), &sample::point(rng, 3, 2.0))
}

fn family(rng: &mut Rng) -> Result<InfinitesimalMotion> {
    InfinitesimalMotion::new(
        euclidean3(),
        sample::antisymmetric(rng, 3, 1.0),
        sample::dvec(rng, 3, 1.0),
    )
}

fn contraction(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, false);
    let lag = sys.lagrangian()?.numeric();
    let s = sys.state()?;
    let chart = chart(rng)?;
    let h = family(rng)?;
    let a = r_from_infinitesimal(&h, &chart)?;
    let dl = dl_form(&lag, &s, &chart)?;
    let mut paired = 0.0;
    for k in 0..4 {
        for l in 0..4 {
            paired += 0.5 * dl.get(&[k, l]) * a.get(&[k, l]);
        }
    }
    let direct = dh_l(&lag, &s, &h, &chart, DEFAULT_FAMILY_STEP)?;
    Ok(relative(paired - direct, direct))
}

fn k_identity(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, true);
    let b = sys.body()?;
    let o = sample::vec3(rng, 3.0);
    let residual = k_identity_check(&sys.lagrangian()?, &b, &o)?;
    Ok(relative(residual, force_tensor(&b, &o)?.max_abs()))
}

fn chart_transport(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, false);
    let lag = sys.lagrangian()?.numeric();
    let s = sys.state()?;
    let (c1, c2) = (chart(rng)?, chart(rng)?);
    let first = dl_form(&lag, &s, &c1)?;
    let moved = o_to_p(
        &transport_tensor(
            &p_to_o(&first, c1.anchor().as_slice())?,
            c2.anchor().as_slice(),
        )?,
        c2.anchor().as_slice(),
    )?;
    let direct = dl_form(&lag, &s, &c2)?;
    Ok(relative(moved.max_abs_diff(&direct)?, direct.max_abs()))
}

fn linearity(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, false);
    let lag = sys.lagrangian()?;
    let s = sys.state()?;
    let chart = chart(rng)?;
    let (h1, h2) = (family(rng)?, family(rng)?);
    let (a, b) = (sample::uniform(rng, 2.0), sample::uniform(rng, 2.0));
    let combined = InfinitesimalMotion::new(
        euclidean3(),
        h1.omega_lower() * a + h2.omega_lower() * b,
        h1.a() * a + h2.a() * b,
    )?;
    let step = DEFAULT_FAMILY_STEP;
    let lhs = dh_l(&lag, &s, &combined, &chart, step)?;
    let rhs = a * dh_l(&lag, &s, &h1, &chart, step)? + b * dh_l(&lag, &s, &h2, &chart, step)?;
    Ok(relative(lhs - rhs, lhs))
}

fn antisymmetry(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, false);
    let lag = if rng.random_bool(0.5) {
        sys.lagrangian()?
    } else {
        sys.lagrangian()?.numeric()
    };
    dl_form(&lag, &sys.state()?, &chart(rng)?)?.antisymmetry_residual()
}

fn trajectory(rng: &mut Rng) -> Result<f64> {
    let sys = system(rng, true);
    let b = sys.body()?;
    let lag = sys.lagrangian()?;
    let chart = chart(rng)?;
    let o = Vector3::from_column_slice(chart.anchor().as_slice());
    let dt = 1e-3;
    let next = step_dynamics(&b, dt)?;
    let rate = momentum_tensor(&next, &o)?
        .sub(&momentum_tensor(&b, &o)?)?
        .scale(1.0 / dt)
        .relabel(chart.clone())?;
    let mid = step_dynamics(&b, dt / 2.0)?;
    let dl = dl_form(&lag, &StateOfMotion::of_body(&mid, 0.0), &chart)?;
    Ok(relative(rate.add(&dl)?.max_abs(), dl.max_abs()))
}
