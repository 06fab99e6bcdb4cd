//! Dense extended tensors of arbitrary rank `(p, q)`.
//!
//! Components are stored row-major over `p + q` axes of length `n + 1`;
//! contravariant axes come first, then covariant ones. The extra ("5")
//! index is stored at array position `n`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameKind};
use crate::metric::MetricSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtTensor {
    frame: Frame,
    contra: usize,
    co: usize,
    comps: Vec<f64>,
}

impl ExtTensor {
    pub fn zeros(frame: Frame, contra: usize, co: usize) -> Self {
        let len = frame.dim().pow((contra + co) as u32);
        Self {
            frame,
            contra,
            co,
            comps: vec![0.0; len],
        }
    }

    pub fn from_comps(frame: Frame, contra: usize, co: usize, comps: Vec<f64>) -> Result<Self> {
        let len = frame.dim().pow((contra + co) as u32);
        if comps.len() != len {
            return Err(Error::Shape(format!(
                "rank ({contra},{co}) in dimension {} needs {len} components, got {}",
                frame.dim(),
                comps.len()
            )));
        }
        if comps.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("tensor components".into()));
        }
        Ok(Self {
            frame,
            contra,
            co,
            comps,
        })
    }

    pub fn vector(frame: Frame, comps: &[f64]) -> Result<Self> {
        Self::from_comps(frame, 1, 0, comps.to_vec())
    }

    pub fn covector(frame: Frame, comps: &[f64]) -> Result<Self> {
        Self::from_comps(frame, 0, 1, comps.to_vec())
    }

    /// The `i`-th basis vector of `frame`.
    pub fn basis_vector(frame: Frame, i: usize) -> Self {
        let mut t = Self::zeros(frame, 1, 0);
        t.comps[i] = 1.0;
        t
    }

    /// The dual basis 1-form with index `i`.
    pub fn basis_covector(frame: Frame, i: usize) -> Self {
        let mut t = Self::zeros(frame, 0, 1);
        t.comps[i] = 1.0;
        t
    }

    /// The unit tensor `delta^A_B`.
    pub fn identity(frame: Frame) -> Self {
        let d = frame.dim();
        Self::from_matrix(frame, 1, 1, &DMatrix::identity(d, d)).expect("identity shape")
    }

    /// Builds a rank-2 tensor whose `[i][j]` component is `m[(i, j)]`.
    pub fn from_matrix(frame: Frame, contra: usize, co: usize, m: &DMatrix<f64>) -> Result<Self> {
        if contra + co != 2 {
            return Err(Error::Shape(format!(
                "from_matrix needs rank 2, got ({contra},{co})"
            )));
        }
        let d = frame.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape(format!(
                "expected {d}x{d} matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let comps = (0..d * d).map(|f| m[(f / d, f % d)]).collect();
        Self::from_comps(frame, contra, co, comps)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.contra, self.co)
    }

    pub fn order(&self) -> usize {
        self.contra + self.co
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<f64> {
        self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let d = self.dim();
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let f = self.flat(idx);
        self.comps[f] = value;
    }

    /// Same components, different frame label.
    pub fn relabel(&self, frame: Frame) -> Result<Self> {
        if frame.dim() != self.dim() {
            return Err(Error::Shape("relabel across dimensions".into()));
        }
        Ok(Self {
            frame,
            ..self.clone()
        })
    }

    pub fn to_vector(&self) -> Result<DVector<f64>> {
        if self.order() != 1 {
            return Err(Error::Shape(format!(
                "expected rank 1, got {:?}",
                self.rank()
            )));
        }
        Ok(DVector::from_column_slice(&self.comps))
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.order() != 2 {
            return Err(Error::Shape(format!(
                "expected rank 2, got {:?}",
                self.rank()
            )));
        }
        let d = self.dim();
        Ok(DMatrix::from_row_slice(d, d, &self.comps))
    }

    fn ensure_same_shape(&self, other: &ExtTensor) -> Result<()> {
        self.frame.ensure_same(&other.frame)?;
        if self.rank() != other.rank() {
            return Err(Error::Shape(format!(
                "rank {:?} vs {:?}",
                self.rank(),
                other.rank()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ExtTensor) -> Result<ExtTensor> {
        self.ensure_same_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            comps,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &ExtTensor) -> Result<ExtTensor> {
        self.ensure_same_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            comps,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: f64) -> ExtTensor {
        Self {
            comps: self.comps.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest componentwise difference; shapes and frames must match.
    pub fn max_abs_diff(&self, other: &ExtTensor) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Applies `m` along one axis: `new[.., i, ..] = sum_j m[i][j] old[.., j, ..]`.
    pub(crate) fn apply_along(&self, axis: usize, m: &DMatrix<f64>) -> ExtTensor {
        let d = self.dim();
        let r = self.order();
        let stride = d.pow((r - 1 - axis) as u32);
        let mut out = vec![0.0; self.comps.len()];
        for (f, slot) in out.iter_mut().enumerate() {
            let i = (f / stride) % d;
            let base = f - i * stride;
            let mut acc = 0.0;
            for j in 0..d {
                let mij = m[(i, j)];
                if mij != 0.0 {
                    acc += mij * self.comps[base + j * stride];
                }
            }
            *slot = acc;
        }
        Self {
            comps: out,
            ..self.clone()
        }
    }

    /// Re-expresses the tensor after a change of basis in which vector
    /// components transform by `vec_map`. Contravariant slots take `vec_map`,
    /// covariant slots take its inverse transpose. `frame` labels the result.
    pub fn change_basis(&self, vec_map: &DMatrix<f64>, frame: Frame) -> Result<ExtTensor> {
        let d = self.dim();
        if vec_map.nrows() != d || vec_map.ncols() != d || frame.dim() != d {
            return Err(Error::Shape("basis change has the wrong dimension".into()));
        }
        let form_map = if self.co > 0 {
            vec_map
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Singular("basis change".into()))?
                .transpose()
        } else {
            DMatrix::zeros(0, 0)
        };
        let mut t = self.clone();
        for axis in 0..self.contra {
            t = t.apply_along(axis, vec_map);
        }
        for axis in self.contra..self.order() {
            t = t.apply_along(axis, &form_map);
        }
        t.frame = frame;
        Ok(t)
    }

    /// Reorders axes: result axis `k` is source axis `perm[k]`.
    fn permute(&self, perm: &[usize], contra: usize, co: usize) -> ExtTensor {
        let d = self.dim();
        let r = self.order();
        let mut out = vec![0.0; self.comps.len()];
        let mut idx = vec![0usize; r];
        let mut src = vec![0usize; r];
        for (f, slot) in out.iter_mut().enumerate() {
            unravel(f, d, &mut idx);
            for k in 0..r {
                src[perm[k]] = idx[k];
            }
            *slot = self.comps[self.flat(&src)];
        }
        Self {
            frame: self.frame.clone(),
            contra,
            co,
            comps: out,
        }
    }

    /// Contracts contravariant slot `upper` with covariant slot `lower`
    /// (both counted within their own group).
    pub fn contract(&self, upper: usize, lower: usize) -> Result<ExtTensor> {
        if upper >= self.contra || lower >= self.co {
            return Err(Error::Shape(format!(
                "cannot contract slots ({upper}, {lower}) of a rank {:?} tensor",
                self.rank()
            )));
        }
        let d = self.dim();
        let r = self.order();
        let a = upper;
        let b = self.contra + lower;
        let out_len = d.pow((r - 2) as u32);
        let mut out = vec![0.0; out_len];
        let mut idx = vec![0usize; r - 2];
        let mut full = vec![0usize; r];
        for (f, slot) in out.iter_mut().enumerate() {
            unravel(f, d, &mut idx);
            let mut it = idx.iter();
            for (k, v) in full.iter_mut().enumerate() {
                if k != a && k != b {
                    *v = *it.next().expect("index count");
                }
            }
            let mut acc = 0.0;
            for k in 0..d {
                full[a] = k;
                full[b] = k;
                acc += self.comps[self.flat(&full)];
            }
            *slot = acc;
        }
        Ok(Self {
            frame: self.frame.clone(),
            contra: self.contra - 1,
            co: self.co - 1,
            comps: out,
        })
    }

    /// Full contraction of a scalar-valued tensor of rank (0,0).
    pub fn scalar(&self) -> Result<f64> {
        if self.order() != 0 {
            return Err(Error::Shape(format!(
                "expected rank (0,0), got {:?}",
                self.rank()
            )));
        }
        Ok(self.comps[0])
    }

    /// Tensor product. Result slots: contravariant of `self`, contravariant of
    /// `other`, covariant of `self`, covariant of `other`.
    pub fn outer(&self, other: &ExtTensor) -> Result<ExtTensor> {
        self.frame.ensure_same(&other.frame)?;
        let mut comps = Vec::with_capacity(self.comps.len() * other.comps.len());
        for a in &self.comps {
            for b in &other.comps {
                comps.push(a * b);
            }
        }
        let raw = Self {
            frame: self.frame.clone(),
            contra: self.contra + other.contra,
            co: self.co + other.co,
            comps,
        };
        // raw axes: [self contra, self co, other contra, other co]
        let (p1, q1, p2) = (self.contra, self.co, other.contra);
        let mut perm = Vec::with_capacity(raw.order());
        perm.extend(0..p1);
        perm.extend(p1 + q1..p1 + q1 + p2);
        perm.extend(p1..p1 + q1);
        perm.extend(p1 + q1 + p2..raw.order());
        Ok(raw.permute(&perm, raw.contra, raw.co))
    }

    /// `a ^ b = a (x) b - b (x) a` for two vectors or two 1-forms.
    pub fn wedge(&self, other: &ExtTensor) -> Result<ExtTensor> {
        if self.order() != 1 || self.rank() != other.rank() {
            return Err(Error::Shape(format!(
                "wedge needs two vectors or two 1-forms, got {:?} and {:?}",
                self.rank(),
                other.rank()
            )));
        }
        let ab = self.outer(other)?;
        let ba = other.outer(self)?;
        ab.sub(&ba)
    }

    /// Lowers contravariant slot `slot` with `block-diag(g, 1)`. The new
    /// covariant slot becomes the first covariant slot.
    pub fn lower(&self, slot: usize) -> Result<ExtTensor> {
        if slot >= self.contra {
            return Err(Error::Shape(format!(
                "no contravariant slot {slot} in rank {:?}",
                self.rank()
            )));
        }
        let t = self.apply_along(slot, &self.frame.metric().g_lowering());
        let mut perm: Vec<usize> = (0..self.contra).filter(|&k| k != slot).collect();
        perm.push(slot);
        perm.extend(self.contra..self.order());
        Ok(t.permute(&perm, self.contra - 1, self.co + 1))
    }

    /// Raises covariant slot `slot` with `block-diag(g^-1, 1)`. The new
    /// contravariant slot becomes the last contravariant slot.
    pub fn raise(&self, slot: usize) -> Result<ExtTensor> {
        if slot >= self.co {
            return Err(Error::Shape(format!(
                "no covariant slot {slot} in rank {:?}",
                self.rank()
            )));
        }
        let axis = self.contra + slot;
        let t = self.apply_along(axis, &self.frame.metric().g_raising());
        let mut perm: Vec<usize> = (0..self.contra).collect();
        perm.push(axis);
        perm.extend((self.contra..self.order()).filter(|&k| k != axis));
        Ok(t.permute(&perm, self.contra + 1, self.co - 1))
    }

    /// `max |t[i][j] + t[j][i]|` for a rank-(2,0) or rank-(0,2) tensor.
    pub fn antisymmetry_residual(&self) -> Result<f64> {
        if self.rank() != (2, 0) && self.rank() != (0, 2) {
            return Err(Error::Shape(format!(
                "antisymmetry needs rank (2,0) or (0,2), got {:?}",
                self.rank()
            )));
        }
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.comps[i * d + j] + self.comps[j * d + i]).abs());
            }
        }
        Ok(worst)
    }

    /// Rebuilds the lower triangle of a rank-2 tensor as minus the upper one.
    pub(crate) fn mirror_upper(&mut self) {
        let d = self.dim();
        for i in 0..d {
            self.comps[i * d + i] = 0.0;
            for j in i + 1..d {
                self.comps[j * d + i] = -self.comps[i * d + j];
            }
        }
    }

    pub fn ensure_antisymmetric(&self, tol: f64) -> Result<()> {
        let max_asymmetry = self.antisymmetry_residual()?;
        if max_asymmetry > tol {
            return Err(Error::NotAntisymmetric { max_asymmetry });
        }
        Ok(())
    }
}

pub(crate) fn unravel(mut f: usize, d: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = f % d;
        f /= d;
    }
}

/// JSON form: `{metric, frame: {anchor, kind}, rank: [p, q], comps}` with
/// components flattened row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TensorDoc {
    pub metric: MetricSpec,
    pub frame: FrameDoc,
    pub rank: [usize; 2],
    pub comps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameDoc {
    pub anchor: Vec<f64>,
    pub kind: FrameKind,
}

impl From<&ExtTensor> for TensorDoc {
    fn from(t: &ExtTensor) -> Self {
        TensorDoc {
            metric: MetricSpec::from(t.frame.metric()),
            frame: FrameDoc {
                anchor: t.frame.anchor().as_slice().to_vec(),
                kind: t.frame.kind(),
            },
            rank: [t.contra, t.co],
            comps: t.comps.clone(),
        }
    }
}

impl TensorDoc {
    pub fn build(&self) -> Result<ExtTensor> {
        let metric = Arc::new(self.metric.build()?);
        let frame = Frame::new(
            metric,
            DVector::from_column_slice(&self.frame.anchor),
            self.frame.kind,
        )?;
        ExtTensor::from_comps(frame, self.rank[0], self.rank[1], self.comps.clone())
    }
}

impl ExtTensor {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TensorDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<TensorDoc>(s)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn frame(m: Metric) -> Frame {
        Frame::origin(Arc::new(m))
    }

    #[test]
    fn wedge_of_e1_and_e5() {
        let f = frame(Metric::euclidean3());
        let w = ExtTensor::basis_vector(f.clone(), 0)
            .wedge(&ExtTensor::basis_vector(f, 3))
            .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (0, 3) => 1.0,
                    (3, 0) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(w.get(&[i, j]), expected);
            }
        }
    }

    #[test]
    fn trace_of_identity_is_extended_dimension() {
        for m in [Metric::euclidean3(), Metric::minkowski4()] {
            let n = m.n();
            let id = ExtTensor::identity(frame(m));
            assert_eq!(id.contract(0, 0).unwrap().scalar().unwrap(), (n + 1) as f64);
        }
    }

    #[test]
    fn lower_then_raise_restores() {
        let f = frame(Metric::minkowski4());
        let comps: Vec<f64> = (0..25).map(|k| k as f64 - 7.5).collect();
        let r = ExtTensor::from_comps(f, 2, 0, comps).unwrap();
        let lowered = r.lower(1).unwrap();
        assert_eq!(lowered.rank(), (1, 1));
        // R^A_B = R^{AC} g_CB: sign flips on spatial B, fifth slot untouched.
        assert_eq!(lowered.get(&[0, 1]), -r.get(&[0, 1]));
        assert_eq!(lowered.get(&[2, 4]), r.get(&[2, 4]));
        assert_eq!(lowered.raise(0).unwrap(), r);

        let lowered_first = r.lower(0).unwrap();
        // slot order is [B (contra), A (co)]
        assert_eq!(lowered_first.get(&[3, 2]), -r.get(&[2, 3]));
        // raising puts A back as the last contravariant slot: [B, A]
        assert_eq!(lowered_first.raise(0).unwrap().get(&[3, 2]), r.get(&[2, 3]));
    }

    #[test]
    fn outer_orders_contravariant_slots_first() {
        let f = frame(Metric::euclidean3());
        let v = ExtTensor::vector(f.clone(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let w = ExtTensor::covector(f.clone(), &[0.5, -1.0, 0.0, 2.0]).unwrap();
        let u = ExtTensor::vector(f, &[0.0, 1.0, 0.0, -1.0]).unwrap();
        let t = w.outer(&v).unwrap().outer(&u).unwrap();
        assert_eq!(t.rank(), (2, 1));
        assert_eq!(t.get(&[1, 3, 3]), -(2.0 * 2.0));
        // contracting v against w gives <w, v> u
        let c = t.contract(0, 0).unwrap();
        let wv = 0.5 + -2.0 + 8.0;
        assert_eq!(c.comps(), u.scale(wv).comps());
    }

    #[test]
    fn contraction_rejects_bad_slots() {
        let f = frame(Metric::euclidean3());
        let t = ExtTensor::zeros(f, 2, 0);
        assert!(matches!(t.contract(0, 0), Err(Error::Shape(_))));
        assert!(t.antisymmetry_residual().is_ok());
    }

    #[test]
    fn frame_mismatch_is_reported() {
        let m = Arc::new(Metric::euclidean3());
        let a = ExtTensor::zeros(Frame::origin(m.clone()), 1, 0);
        let b = ExtTensor::zeros(Frame::o_basis(m, &[1.0, 0.0, 0.0]).unwrap(), 1, 0);
        assert!(matches!(a.add(&b), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn json_document_round_trip() {
        let m = Arc::new(Metric::minkowski4());
        let f = Frame::p_basis(m, &[1.0, 0.0, 2.0, 0.0]).unwrap();
        let comps: Vec<f64> = (0..25).map(|k| (k as f64).sin()).collect();
        let t = ExtTensor::from_comps(f, 1, 1, comps).unwrap();
        let json = t.to_json().unwrap();
        assert!(json.contains("\"p_basis\""));
        assert!(json.contains("\"minkowski4\""));
        assert_eq!(ExtTensor::from_json(&json).unwrap(), t);
        let bad = json.replace("[1,1]", "[2,1]");
        assert!(matches!(ExtTensor::from_json(&bad), Err(Error::Shape(_))));
    }
}
