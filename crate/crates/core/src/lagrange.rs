//! The bivector derivative of an N-particle Lagrange function and its
//! relation to the total force tensor.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameKind};
use crate::motion::{exp_motion, InfinitesimalMotion, MotionParams};
use crate::rigid_body::{force_tensor, Body, ForceModel, ForceSpec, Particle, FIVE};
use crate::tensor::ExtTensor;

/// Default step of the central difference in the family parameter.
pub const DEFAULT_FAMILY_STEP: f64 = 1e-5;

/// Relative step of the central-difference position gradient.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Positions and velocities of every particle at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOfMotion {
    pub t: f64,
    pub x: Vec<Vector3<f64>>,
    pub v: Vec<Vector3<f64>>,
}

impl StateOfMotion {
    pub fn new(t: f64, x: Vec<Vector3<f64>>, v: Vec<Vector3<f64>>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::ParticleCount {
                left: x.len(),
                right: v.len(),
            });
        }
        let s = StateOfMotion { t, x, v };
        if !s.t.is_finite()
            || s.x
                .iter()
                .chain(&s.v)
                .any(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::NonFinite("state of motion".into()));
        }
        Ok(s)
    }

    pub fn of_body(b: &Body, t: f64) -> Self {
        StateOfMotion {
            t,
            x: b.particles.iter().map(|p| p.x).collect(),
            v: b.particles.iter().map(|p| p.v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Image of a state under `x -> L x + a`, `v -> L v`.
pub fn transform_state(s: &StateOfMotion, motion: &MotionParams) -> Result<StateOfMotion> {
    motion.validate(&crate::metric::Metric::euclidean3())?;
    let l = motion.l.fixed_view::<3, 3>(0, 0).into_owned();
    let a = Vector3::from_column_slice(motion.a.as_slice());
    Ok(StateOfMotion {
        t: s.t,
        x: s.x.iter().map(|x| l * x + a).collect(),
        v: s.v.iter().map(|v| l * v).collect(),
    })
}

pub type Evaluator = Arc<dyn Fn(&StateOfMotion) -> Result<f64> + Send + Sync>;
pub type Gradient = Arc<dyn Fn(&StateOfMotion) -> Result<Vec<Vector3<f64>>> + Send + Sync>;

/// A Lagrange function of a fixed number of particles, with an optional
/// analytic position gradient.
#[derive(Clone)]
pub struct Lagrangian {
    particles: usize,
    evaluator: Evaluator,
    gradient: Option<Gradient>,
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lagrangian")
            .field("particles", &self.particles)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

fn particles_of(masses: &[f64], s: &StateOfMotion) -> Vec<Particle> {
    masses
        .iter()
        .zip(&s.x)
        .zip(&s.v)
        .map(|((m, x), v)| Particle {
            m: *m,
            x: *x,
            v: *v,
        })
        .collect()
}

impl Lagrangian {
    pub fn new(particles: usize, evaluator: Evaluator) -> Self {
        Lagrangian {
            particles,
            evaluator,
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, gradient: Gradient) -> Self {
        self.gradient = Some(gradient);
        self
    }

    /// `L = sum 1/2 m v^2 - U(x)` for a force law with a potential; the
    /// position gradient is the force.
    pub fn from_force_model(masses: Vec<f64>, force: ForceModel) -> Result<Self> {
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("masses must be positive".into()));
        }
        if matches!(force, ForceModel::Custom(_)) {
            return Err(Error::InvalidParameter(
                "custom forces have no potential; supply a Lagrangian".into(),
            ));
        }
        let n = masses.len();
        let masses = Arc::new(masses);
        let (m1, f1) = (masses.clone(), force.clone());
        let evaluator: Evaluator = Arc::new(move |s: &StateOfMotion| {
            let ps = particles_of(&m1, s);
            let kinetic: f64 = ps.iter().map(|p| 0.5 * p.m * p.v.norm_squared()).sum();
            let u = f1
                .potential(&ps)
                .ok_or_else(|| Error::Evaluator("force law has no potential".into()))?;
            Ok(kinetic - u)
        });
        let gradient: Gradient =
            Arc::new(move |s: &StateOfMotion| force.forces(&particles_of(&masses, s)));
        Ok(Lagrangian::new(n, evaluator).with_gradient(gradient))
    }

    /// Lagrangian of the same system as a body: its masses and force law.
    pub fn for_body(b: &Body) -> Result<Self> {
        Self::from_force_model(b.particles.iter().map(|p| p.m).collect(), b.force.clone())
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Drops the analytic gradient so that finite differences are used.
    pub fn numeric(&self) -> Self {
        Lagrangian {
            gradient: None,
            ..self.clone()
        }
    }

    fn check(&self, s: &StateOfMotion) -> Result<()> {
        if s.len() != self.particles {
            return Err(Error::ParticleCount {
                left: self.particles,
                right: s.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, s: &StateOfMotion) -> Result<f64> {
        self.check(s)?;
        let value = (self.evaluator)(s)?;
        if !value.is_finite() {
            return Err(Error::Evaluator(
                "Lagrangian returned a non-finite value".into(),
            ));
        }
        Ok(value)
    }

    /// `dL/dx` per particle: analytic when available, otherwise central
    /// differences with step `1e-5 max(1, |x|)` per coordinate.
    pub fn position_gradient(&self, s: &StateOfMotion) -> Result<Vec<Vector3<f64>>> {
        self.check(s)?;
        if let Some(g) = &self.gradient {
            let grad = g(s)?;
            if grad.len() != self.particles {
                return Err(Error::ParticleCount {
                    left: self.particles,
                    right: grad.len(),
                });
            }
            return Ok(grad);
        }
        let mut out = vec![Vector3::zeros(); self.particles];
        let mut probe = s.clone();
        for (l, slot) in out.iter_mut().enumerate() {
            for i in 0..3 {
                let x0 = s.x[l][i];
                let h = GRADIENT_STEP * x0.abs().max(1.0);
                probe.x[l][i] = x0 + h;
                let plus = self.eval(&probe)?;
                probe.x[l][i] = x0 - h;
                let minus = self.eval(&probe)?;
                probe.x[l][i] = x0;
                slot[i] = (plus - minus) / (2.0 * h);
            }
        }
        Ok(out)
    }
}

fn require_cartesian_chart(chart: &Frame) -> Result<()> {
    if chart.kind() != FrameKind::PBasis {
        return Err(Error::Contract(
            "the chart is identified by its P-basis".into(),
        ));
    }
    if !chart.metric().is_euclidean3() {
        return Err(Error::InvalidMetric(
            "the Lagrange layer works over euclidean3".into(),
        ));
    }
    Ok(())
}

/// Finite motion `exp(s R)` of the family, as a map of global coordinates.
fn family_motion(family: &InfinitesimalMotion, s: f64, chart: &Frame) -> Result<MotionParams> {
    let local = exp_motion(family, s, chart)?.params()?;
    let c = chart.anchor();
    let a = &local.a + c - &local.l * c;
    Ok(MotionParams::new(local.l, a))
}

/// `D_H L` at `s` for the family generated by `family` in the chart: the
/// central difference in the family parameter of `L` on the moved state.
pub fn dh_l(
    lag: &Lagrangian,
    s: &StateOfMotion,
    family: &InfinitesimalMotion,
    chart: &Frame,
    h: f64,
) -> Result<f64> {
    require_cartesian_chart(chart)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "family step must be positive, got {h}"
        )));
    }
    let plus = lag.eval(&transform_state(s, &family_motion(family, h, chart)?)?)?;
    let minus = lag.eval(&transform_state(s, &family_motion(family, -h, chart)?)?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// The 2-form `DL` in the chart's P-basis:
/// `DL_{i5} = sum dL/dx^i`, `DL_{ij} = sum (x_j dL/dx^i - x_i dL/dx^j)`,
/// positions measured from the chart origin.
pub fn dl_form(lag: &Lagrangian, s: &StateOfMotion, chart: &Frame) -> Result<ExtTensor> {
    require_cartesian_chart(chart)?;
    let grad = lag.position_gradient(s)?;
    let c = Vector3::from_column_slice(chart.anchor().as_slice());
    let mut out = ExtTensor::zeros(chart.clone(), 0, 2);
    let total: Vector3<f64> = grad.iter().sum();
    for i in 0..3 {
        out.set(&[i, FIVE], total[i]);
        out.set(&[FIVE, i], -total[i]);
        for j in i + 1..3 {
            let v: f64 =
                s.x.iter()
                    .zip(&grad)
                    .map(|(x, g)| (x[j] - c[j]) * g[i] - (x[i] - c[i]) * g[j])
                    .sum();
            out.set(&[i, j], v);
            out.set(&[j, i], -v);
        }
    }
    Ok(out)
}

/// `max |DL + K_tot|` with both 2-forms taken at `o`.
pub fn k_identity_check(lag: &Lagrangian, b: &Body, o: &Vector3<f64>) -> Result<f64> {
    if lag.particles() != b.len() {
        return Err(Error::ParticleCount {
            left: lag.particles(),
            right: b.len(),
        });
    }
    let chart = Frame::p_basis(crate::rigid_body::euclidean(), o.as_slice())?;
    let dl = dl_form(lag, &StateOfMotion::of_body(b, 0.0), &chart)?;
    let k = force_tensor(b, o)?.relabel(chart)?;
    Ok(dl.add(&k)?.max_abs())
}

/// Lagrangian presets for configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LagrangianSpec {
    Free {
        masses: Vec<f64>,
    },
    UniformGravity {
        masses: Vec<f64>,
        g: [f64; 3],
    },
    PairwiseSpring {
        masses: Vec<f64>,
        k: f64,
        #[serde(default)]
        rest_length: f64,
    },
    InverseSquare {
        masses: Vec<f64>,
        k: f64,
        #[serde(default)]
        center: Option<[f64; 3]>,
    },
}

impl LagrangianSpec {
    pub fn build(&self) -> Result<Lagrangian> {
        use crate::rigid_body::ForcePreset as P;
        let (masses, preset) = match self {
            LagrangianSpec::Free { masses } => (masses, P::None),
            LagrangianSpec::UniformGravity { masses, g } => (masses, P::UniformGravity { g: *g }),
            LagrangianSpec::PairwiseSpring {
                masses,
                k,
                rest_length,
            } => (
                masses,
                P::PairwiseSpring {
                    k: *k,
                    rest_length: *rest_length,
                },
            ),
            LagrangianSpec::InverseSquare { masses, k, center } => (
                masses,
                P::InverseSquare {
                    k: *k,
                    center: *center,
                },
            ),
        };
        Lagrangian::from_force_model(masses.clone(), ForceSpec::Preset(preset).build()?)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::rigid_body::euclidean;

    fn state(x: &[[f64; 3]], v: &[[f64; 3]]) -> StateOfMotion {
        StateOfMotion::new(
            0.0,
            x.iter().map(|p| Vector3::from(*p)).collect(),
            v.iter().map(|p| Vector3::from(*p)).collect(),
        )
        .unwrap()
    }

    fn origin_chart() -> Frame {
        Frame::p_basis(euclidean(), &[0.0; 3]).unwrap()
    }

    #[test]
    fn transform_examples() {
        let s = state(&[[1.0, 0.0, 0.0]], &[[0.0, 1.0, 0.0]]);
        assert_eq!(transform_state(&s, &MotionParams::identity(3)).unwrap(), s);
        let shifted = transform_state(
            &s,
            &MotionParams::translation(DVector::from_vec(vec![1.0, 2.0, 3.0])),
        )
        .unwrap();
        assert_eq!(shifted.v, s.v);
        assert_eq!(shifted.x[0], Vector3::new(2.0, 2.0, 3.0));
        let (sn, cs) = FRAC_PI_2.sin_cos();
        let rot = DMatrix::from_row_slice(3, 3, &[cs, -sn, 0.0, sn, cs, 0.0, 0.0, 0.0, 1.0]);
        let turned = transform_state(&s, &MotionParams::new(rot, DVector::zeros(3))).unwrap();
        assert!((turned.x[0] - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-15);
        assert!((turned.v[0] - Vector3::new(-1.0, 0.0, 0.0)).amax() < 1e-15);
        let squash = MotionParams::new(DMatrix::identity(3, 3) * 0.5, DVector::zeros(3));
        assert!(transform_state(&s, &squash).is_err());
    }

    #[test]
    fn symmetric_lagrangians_have_zero_derivative() {
        let free = Lagrangian::from_force_model(vec![1.0, 2.0], ForceModel::None).unwrap();
        let s = state(
            &[[1.0, 0.0, 0.5], [0.0, -1.0, 2.0]],
            &[[0.3, 0.0, 1.0], [0.0, 2.0, -1.0]],
        );
        let chart = origin_chart();
        let m = euclidean();
        let shift =
            InfinitesimalMotion::translation(m.clone(), DVector::from_vec(vec![1.0, -2.0, 0.5]))
                .unwrap();
        assert!(
            dh_l(&free, &s, &shift, &chart, DEFAULT_FAMILY_STEP)
                .unwrap()
                .abs()
                < 1e-9
        );
        let spring = Lagrangian::from_force_model(
            vec![1.0, 2.0],
            ForceModel::PairwiseSpring {
                k: 3.0,
                rest_length: 0.5,
            },
        )
        .unwrap();
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -0.5, -1.0, 0.0, 2.0, 0.5, -2.0, 0.0]);
        let spin = InfinitesimalMotion::new(m, w, DVector::zeros(3)).unwrap();
        assert!(
            dh_l(&spring, &s, &spin, &chart, DEFAULT_FAMILY_STEP)
                .unwrap()
                .abs()
                < 1e-8
        );
    }

    #[test]
    fn translation_family_gives_position_derivative() {
        let g = [0.0, 0.0, -9.81];
        let lag = Lagrangian::from_force_model(
            vec![2.0],
            ForceModel::UniformGravity {
                g: Vector3::from(g),
            },
        )
        .unwrap();
        let s = state(&[[0.5, 0.5, 3.0]], &[[1.0, 0.0, 0.0]]);
        let family =
            InfinitesimalMotion::translation(euclidean(), DVector::from_vec(vec![0.0, 0.0, 1.0]))
                .unwrap();
        let d = dh_l(&lag, &s, &family, &origin_chart(), DEFAULT_FAMILY_STEP).unwrap();
        // L = ... - m g z, so dL/dz = -19.62
        assert!((d + 19.62).abs() < 1e-8);
        let form = dl_form(&lag, &s, &origin_chart()).unwrap();
        assert_eq!(form.get(&[2, 3]), -19.62);
    }

    #[test]
    fn form_examples() {
        let chart = origin_chart();
        let s = state(
            &[[1.0, 2.0, 3.0], [-1.0, 0.0, 2.0], [0.0, 1.0, -1.0]],
            &[[0.0; 3]; 3],
        );
        let free = Lagrangian::from_force_model(vec![1.0; 3], ForceModel::None).unwrap();
        assert_eq!(dl_form(&free, &s, &chart).unwrap().max_abs(), 0.0);

        let masses = vec![1.0, 2.0, 0.5];
        let g = Vector3::new(0.0, 0.0, -9.81);
        let grav =
            Lagrangian::from_force_model(masses.clone(), ForceModel::UniformGravity { g }).unwrap();
        let form = dl_form(&grav, &s, &chart).unwrap();
        let total_m: f64 = masses.iter().sum();
        assert!((form.get(&[2, 3]) + total_m * 9.81).abs() < 1e-12);
        // torque of gravity about the origin, with the sign flipped
        let torque: Vector3<f64> =
            s.x.iter()
                .zip(&masses)
                .map(|(x, m)| x.cross(&(g * *m)))
                .sum();
        let dual = Vector3::new(form.get(&[1, 2]), form.get(&[2, 0]), form.get(&[0, 1]));
        assert!((dual + torque).amax() < 1e-12);

        let spring = Lagrangian::from_force_model(
            masses,
            ForceModel::PairwiseSpring {
                k: 4.0,
                rest_length: 1.0,
            },
        )
        .unwrap();
        assert!(dl_form(&spring, &s, &chart).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn k_identity_examples() {
        let o = Vector3::new(0.5, -0.5, 1.0);
        let ps = vec![
            Particle {
                m: 1.0,
                x: Vector3::new(1.0, 0.0, 0.0),
                v: Vector3::zeros(),
            },
            Particle {
                m: 2.0,
                x: Vector3::new(0.0, 2.0, -1.0),
                v: Vector3::new(1.0, 0.0, 0.0),
            },
            Particle {
                m: 3.0,
                x: Vector3::new(-1.0, 1.0, 2.0),
                v: Vector3::zeros(),
            },
        ];
        let free = Body::free(ps.clone()).unwrap();
        assert_eq!(
            k_identity_check(&Lagrangian::for_body(&free).unwrap(), &free, &o).unwrap(),
            0.0
        );
        let grav = Body::new(
            ps.clone(),
            ForceModel::UniformGravity {
                g: Vector3::new(0.0, 0.0, -9.81),
            },
        )
        .unwrap();
        assert!(
            k_identity_check(&Lagrangian::for_body(&grav).unwrap(), &grav, &o).unwrap() <= 1e-12
        );
        let pair = Body::new(
            ps[..2].to_vec(),
            ForceModel::InverseSquare {
                k: 1.5,
                center: None,
            },
        )
        .unwrap();
        let numeric = Lagrangian::for_body(&pair).unwrap().numeric();
        assert!(k_identity_check(&numeric, &pair, &o).unwrap() <= 1e-6);
        assert!(k_identity_check(&numeric, &grav, &o).is_err());
    }

    #[test]
    fn spec_parsing() {
        let spec: LagrangianSpec = serde_json::from_str(
            r#"{"kind": "uniform_gravity", "masses": [1, 2], "g": [0, 0, -1]}"#,
        )
        .unwrap();
        let lag = spec.build().unwrap();
        assert_eq!(lag.particles(), 2);
        assert!(lag.has_gradient());
    }
}
