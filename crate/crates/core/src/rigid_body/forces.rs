use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Particle;
use crate::error::{Error, Result};

/// Custom force law: all particle states in, one force per particle out.
pub type ForceFn = Arc<dyn Fn(&[Particle]) -> Result<Vec<Vector3<f64>>> + Send + Sync>;

/// Force laws available to a [`super::Body`].
#[derive(Clone, Default)]
pub enum ForceModel {
    #[default]
    None,
    /// `F = m g`.
    UniformGravity {
        g: Vector3<f64>,
    },
    /// Hooke springs between every pair of particles.
    PairwiseSpring {
        k: f64,
        rest_length: f64,
    },
    /// `F = -k m (x - c) / |x - c|^3` towards a fixed center, or
    /// `-k m_i m_j d / |d|^3` between every pair when no center is given.
    InverseSquare {
        k: f64,
        center: Option<Vector3<f64>>,
    },
    Custom(ForceFn),
}

impl fmt::Debug for ForceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForceModel::None => f.write_str("None"),
            ForceModel::UniformGravity { g } => {
                f.debug_struct("UniformGravity").field("g", g).finish()
            }
            ForceModel::PairwiseSpring { k, rest_length } => f
                .debug_struct("PairwiseSpring")
                .field("k", k)
                .field("rest_length", rest_length)
                .finish(),
            ForceModel::InverseSquare { k, center } => f
                .debug_struct("InverseSquare")
                .field("k", k)
                .field("center", center)
                .finish(),
            ForceModel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn pair_separation(a: &Particle, b: &Particle) -> Result<(Vector3<f64>, f64)> {
    let d = a.x - b.x;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::Evaluator("two particles coincide".into()));
    }
    Ok((d, r))
}

impl ForceModel {
    pub fn forces(&self, particles: &[Particle]) -> Result<Vec<Vector3<f64>>> {
        let n = particles.len();
        let mut out = vec![Vector3::zeros(); n];
        match self {
            ForceModel::None => {}
            ForceModel::UniformGravity { g } => {
                for (f, p) in out.iter_mut().zip(particles) {
                    *f = g * p.m;
                }
            }
            ForceModel::PairwiseSpring { k, rest_length } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let (d, r) = pair_separation(&particles[i], &particles[j])?;
                        let f = d * (-k * (r - rest_length) / r);
                        out[i] += f;
                        out[j] -= f;
                    }
                }
            }
            ForceModel::InverseSquare { k, center: Some(c) } => {
                for (f, p) in out.iter_mut().zip(particles) {
                    let d = p.x - c;
                    let r = d.norm();
                    if r == 0.0 {
                        return Err(Error::Evaluator("particle at the force center".into()));
                    }
                    *f = d * (-k * p.m / (r * r * r));
                }
            }
            ForceModel::InverseSquare { k, center: None } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let (d, r) = pair_separation(&particles[i], &particles[j])?;
                        let f = d * (-k * particles[i].m * particles[j].m / (r * r * r));
                        out[i] += f;
                        out[j] -= f;
                    }
                }
            }
            ForceModel::Custom(func) => {
                let forces = func(particles)?;
                if forces.len() != n {
                    return Err(Error::ParticleCount {
                        left: n,
                        right: forces.len(),
                    });
                }
                if forces.iter().any(|f| f.iter().any(|c| !c.is_finite())) {
                    return Err(Error::Evaluator(
                        "force callback returned a non-finite value".into(),
                    ));
                }
                return Ok(forces);
            }
        }
        Ok(out)
    }

    /// Potential energy of the configuration, `None` for custom forces.
    pub fn potential(&self, particles: &[Particle]) -> Option<f64> {
        let n = particles.len();
        let pairs = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
        match self {
            ForceModel::None => Some(0.0),
            ForceModel::UniformGravity { g } => {
                Some(particles.iter().map(|p| -p.m * g.dot(&p.x)).sum())
            }
            ForceModel::PairwiseSpring { k, rest_length } => Some(
                pairs()
                    .map(|(i, j)| {
                        let r = (particles[i].x - particles[j].x).norm();
                        0.5 * k * (r - rest_length).powi(2)
                    })
                    .sum(),
            ),
            ForceModel::InverseSquare { k, center: Some(c) } => {
                Some(particles.iter().map(|p| -k * p.m / (p.x - c).norm()).sum())
            }
            ForceModel::InverseSquare { k, center: None } => Some(
                pairs()
                    .map(|(i, j)| {
                        -k * particles[i].m * particles[j].m
                            / (particles[i].x - particles[j].x).norm()
                    })
                    .sum(),
            ),
            ForceModel::Custom(_) => None,
        }
    }
}

/// Serialized force presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ForceSpec {
    Name(String),
    Preset(ForcePreset),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcePreset {
    None,
    UniformGravity {
        #[serde(default = "default_gravity")]
        g: [f64; 3],
    },
    PairwiseSpring {
        k: f64,
        #[serde(default)]
        rest_length: f64,
    },
    InverseSquare {
        k: f64,
        #[serde(default)]
        center: Option<[f64; 3]>,
    },
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

impl Default for ForceSpec {
    fn default() -> Self {
        ForceSpec::Preset(ForcePreset::None)
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

impl ForceSpec {
    pub fn build(&self) -> Result<ForceModel> {
        let preset = match self {
            ForceSpec::Name(name) => match name.as_str() {
                "none" => ForcePreset::None,
                "uniform_gravity" => ForcePreset::UniformGravity {
                    g: default_gravity(),
                },
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "force preset `{other}` needs parameters or is unknown"
                    )))
                }
            },
            ForceSpec::Preset(p) => p.clone(),
        };
        Ok(match preset {
            ForcePreset::None => ForceModel::None,
            ForcePreset::UniformGravity { g } => {
                for c in g {
                    finite("g", c)?;
                }
                ForceModel::UniformGravity {
                    g: Vector3::from(g),
                }
            }
            ForcePreset::PairwiseSpring { k, rest_length } => {
                finite("k", k)?;
                if !(rest_length >= 0.0 && rest_length.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "rest_length must be non-negative".into(),
                    ));
                }
                ForceModel::PairwiseSpring { k, rest_length }
            }
            ForcePreset::InverseSquare { k, center } => {
                finite("k", k)?;
                ForceModel::InverseSquare {
                    k,
                    center: center.map(Vector3::from),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(m: f64, x: [f64; 3]) -> Particle {
        Particle {
            m,
            x: Vector3::from(x),
            v: Vector3::zeros(),
        }
    }

    #[test]
    fn spring_forces_are_newton_pairs() {
        let ps = [
            particle(1.0, [0.0, 0.0, 0.0]),
            particle(2.0, [2.0, 0.0, 0.0]),
        ];
        let f = ForceModel::PairwiseSpring {
            k: 3.0,
            rest_length: 1.0,
        }
        .forces(&ps)
        .unwrap();
        assert_eq!(f[0], Vector3::new(3.0, 0.0, 0.0));
        assert_eq!(f[1], -f[0]);
    }

    #[test]
    fn potential_gradient_matches_force() {
        let ps = vec![
            particle(1.0, [0.3, -1.0, 2.0]),
            particle(2.5, [1.0, 0.5, -0.5]),
            particle(0.7, [-1.0, 2.0, 0.0]),
        ];
        let models = [
            ForceModel::UniformGravity {
                g: Vector3::new(0.0, 0.0, -9.81),
            },
            ForceModel::PairwiseSpring {
                k: 2.0,
                rest_length: 0.5,
            },
            ForceModel::InverseSquare {
                k: 1.5,
                center: Some(Vector3::new(0.1, 0.2, 0.3)),
            },
            ForceModel::InverseSquare {
                k: 1.5,
                center: None,
            },
        ];
        let h = 1e-6;
        for model in &models {
            let f = model.forces(&ps).unwrap();
            for (i, fi) in f.iter().enumerate() {
                for c in 0..3 {
                    let mut plus = ps.clone();
                    plus[i].x[c] += h;
                    let mut minus = ps.clone();
                    minus[i].x[c] -= h;
                    let grad = (model.potential(&plus).unwrap() - model.potential(&minus).unwrap())
                        / (2.0 * h);
                    assert!((fi[c] + grad).abs() < 1e-6, "{model:?}");
                }
            }
        }
    }

    #[test]
    fn preset_parsing() {
        let spec: ForceSpec =
            serde_json::from_str(r#"{"kind": "pairwise_spring", "k": 4}"#).unwrap();
        assert!(
            matches!(spec.build().unwrap(), ForceModel::PairwiseSpring { k, rest_length } if k == 4.0 && rest_length == 0.0)
        );
        let spec: ForceSpec =
            serde_json::from_str(r#"{"kind": "inverse_square", "k": 1, "center": [0, 0, 0]}"#)
                .unwrap();
        assert!(matches!(
            spec.build().unwrap(),
            ForceModel::InverseSquare {
                center: Some(_),
                ..
            }
        ));
        let spec: ForceSpec = serde_json::from_str(r#""bogus""#).unwrap();
        assert!(spec.build().is_err());
        assert!(serde_json::from_str::<ForceSpec>(r#"{"kind": "magnetic"}"#).is_err());
    }

    #[test]
    fn custom_force_length_is_checked() {
        let model = ForceModel::Custom(Arc::new(|_: &[Particle]| Ok(vec![Vector3::zeros()])));
        let ps = [particle(1.0, [0.0; 3]), particle(1.0, [1.0, 0.0, 0.0])];
        assert!(matches!(
            model.forces(&ps),
            Err(Error::ParticleCount { .. })
        ));
    }
}
