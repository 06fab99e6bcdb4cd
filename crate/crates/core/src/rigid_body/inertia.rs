use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::{frame_at, require_euclidean, Body, Particle, VelocityBivector, FIVE, PAIRS};
use crate::bivector::epsilon;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::tensor::ExtTensor;
use crate::transport::transport_tensor;

/// Number of independent components: the upper triangle of a symmetric 6x6
/// array over ordered index pairs.
const PACKED: usize = 21;

fn packed_index(p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    p * 6 - p * (p + 1) / 2 + q
}

/// Position of `(a, b)` in [`PAIRS`] and the sign relating `t_ab` to the
/// stored ordered pair.
fn pair_of(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|k| (k, sign))
}

/// Rank-(0,4) inertia tensor with `I_GDTS = I_TSGD = -I_DGTS = -I_GDST`,
/// stored through its 21 independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaTensor {
    frame: Frame,
    packed: [f64; PACKED],
}

impl InertiaTensor {
    pub fn zeros(frame: Frame) -> Result<Self> {
        require_euclidean(&frame)?;
        Ok(InertiaTensor {
            frame,
            packed: [0.0; PACKED],
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Component over ordered pairs, `J[p][q] = I_{PAIRS[p] PAIRS[q]}`.
    pub fn pair_entry(&self, p: usize, q: usize) -> f64 {
        self.packed[packed_index(p, q)]
    }

    pub fn pair_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|p, q| self.pair_entry(p, q))
    }

    /// `I_{abcd}` for arbitrary indices.
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match (pair_of(a, b), pair_of(c, d)) {
            (Some((p, s1)), Some((q, s2))) => s1 * s2 * self.pair_entry(p, q),
            _ => 0.0,
        }
    }

    /// Packs a rank-(0,4) tensor, reading the stored slots only.
    pub fn from_tensor(t: &ExtTensor) -> Result<Self> {
        require_euclidean(t.frame())?;
        if t.rank() != (0, 4) {
            return Err(Error::Shape(format!(
                "inertia tensor must have rank (0,4), got {:?}",
                t.rank()
            )));
        }
        let mut packed = [0.0; PACKED];
        for p in 0..6 {
            for q in p..6 {
                let (a, b) = PAIRS[p];
                let (c, d) = PAIRS[q];
                packed[packed_index(p, q)] = t.get(&[a, b, c, d]);
            }
        }
        Ok(InertiaTensor {
            frame: t.frame().clone(),
            packed,
        })
    }

    pub fn to_tensor(&self) -> ExtTensor {
        let mut t = ExtTensor::zeros(self.frame.clone(), 0, 4);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        t.set(&[a, b, c, d], self.get(a, b, c, d));
                    }
                }
            }
        }
        t
    }

    pub fn add(&self, other: &InertiaTensor) -> Result<InertiaTensor> {
        self.frame.ensure_same(&other.frame)?;
        let mut packed = self.packed;
        for (x, y) in packed.iter_mut().zip(other.packed.iter()) {
            *x += y;
        }
        Ok(InertiaTensor {
            frame: self.frame.clone(),
            packed,
        })
    }

    /// The tensor re-expressed in the O-basis at `to`.
    pub fn transport(&self, to: &Vector3<f64>) -> Result<InertiaTensor> {
        Self::from_tensor(&transport_tensor(&self.to_tensor(), to.as_slice())?)
    }

    /// `I_{|GD||TS|} W^{TS}`: the momentum 2-form of a rigid motion.
    pub fn contract(&self, w: &VelocityBivector) -> Result<ExtTensor> {
        self.frame.ensure_same(w.frame())?;
        let m = self.pair_matrix() * Vector6::from(w.pair_components());
        let mut out = ExtTensor::zeros(self.frame.clone(), 0, 2);
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            out.set(&[a, b], m[p]);
            out.set(&[b, a], -m[p]);
        }
        Ok(out)
    }

    /// `I_{5i5j}`: total mass times the identity.
    pub fn mass_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(FIVE, i, FIVE, j))
    }

    /// `sum_{j<k} I_{5ijk} eps^{jk}_l`: first moments of mass.
    pub fn cross_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, l| {
            let mut s = 0.0;
            for j in 0..3 {
                for k in j + 1..3 {
                    s += self.get(FIVE, i, j, k) * epsilon(j, k, l);
                }
            }
            s
        })
    }

    /// `sum_{i<j, k<l} I_ijkl eps^{ij}_m eps^{kl}_n`: the moments of inertia.
    pub fn dualized(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|m, n| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in i + 1..3 {
                    for k in 0..3 {
                        for l in k + 1..3 {
                            s += self.get(i, j, k, l) * epsilon(i, j, m) * epsilon(k, l, n);
                        }
                    }
                }
            }
            s
        })
    }
}

/// Inertia of a point mass in the O-basis at its own position:
/// `I_{5i5j} = I_{i5j5} = -I_{5ij5} = -I_{i55j} = m delta_ij`, all else zero.
pub fn particle_inertia(p: &Particle) -> Result<InertiaTensor> {
    p.validate()?;
    let mut t = InertiaTensor::zeros(frame_at(&p.x))?;
    for i in 0..3 {
        let (k, _) = pair_of(i, FIVE).expect("distinct indices");
        t.packed[packed_index(k, k)] = p.m;
    }
    Ok(t)
}

/// Sum of the particle inertias transported to `o`.
pub fn body_inertia_at(b: &Body, o: &Vector3<f64>) -> Result<InertiaTensor> {
    let mut total = InertiaTensor::zeros(frame_at(o))?;
    for p in &b.particles {
        total = total.add(&particle_inertia(p)?.transport(o)?)?;
    }
    Ok(total)
}

/// `E = 1/2 I_{|GD||TS|} W^{GD} W^{TS}`.
pub fn kinetic_energy(i_at_o: &InertiaTensor, w: &VelocityBivector) -> Result<f64> {
    i_at_o.frame.ensure_same(w.frame())?;
    let wv = Vector6::from(w.pair_components());
    Ok(0.5 * wv.dot(&(i_at_o.pair_matrix() * wv)))
}
