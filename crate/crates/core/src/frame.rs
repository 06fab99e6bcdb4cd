use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Which standard extended basis a set of components refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    /// Standard basis at the anchor point; not self-parallel.
    OBasis,
    /// Self-parallel basis of a chart whose origin is the anchor.
    PBasis,
    /// Active regular basis at the anchor. Transports like the O-basis.
    ActiveRegular,
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrameKind::OBasis => "O-basis",
            FrameKind::PBasis => "P-basis",
            FrameKind::ActiveRegular => "active regular basis",
        };
        f.write_str(s)
    }
}

/// A standard extended basis: metric, anchor point and kind.
///
/// For O-bases the anchor is the point the basis lives at. For P-bases it is
/// the origin of the associated chart; P-basis components are the same at
/// every point.
#[derive(Debug, Clone)]
pub struct Frame {
    metric: Arc<Metric>,
    anchor: DVector<f64>,
    kind: FrameKind,
}

impl Frame {
    pub fn new(metric: Arc<Metric>, anchor: DVector<f64>, kind: FrameKind) -> Result<Self> {
        if anchor.len() != metric.n() {
            return Err(Error::Shape(format!(
                "anchor has {} coordinates, metric dimension is {}",
                anchor.len(),
                metric.n()
            )));
        }
        if anchor.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("frame anchor".into()));
        }
        Ok(Self {
            metric,
            anchor,
            kind,
        })
    }

    pub fn o_basis(metric: Arc<Metric>, at: &[f64]) -> Result<Self> {
        Self::new(metric, DVector::from_column_slice(at), FrameKind::OBasis)
    }

    pub fn p_basis(metric: Arc<Metric>, origin: &[f64]) -> Result<Self> {
        Self::new(
            metric,
            DVector::from_column_slice(origin),
            FrameKind::PBasis,
        )
    }

    /// O-basis at the origin.
    pub fn origin(metric: Arc<Metric>) -> Self {
        let n = metric.n();
        Self {
            metric,
            anchor: DVector::zeros(n),
            kind: FrameKind::OBasis,
        }
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn metric_arc(&self) -> &Arc<Metric> {
        &self.metric
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn with_anchor(&self, anchor: DVector<f64>) -> Result<Self> {
        Self::new(self.metric.clone(), anchor, self.kind)
    }

    pub fn with_kind(&self, kind: FrameKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    /// True for the kinds whose components change under transport.
    pub fn is_pointwise(&self) -> bool {
        matches!(self.kind, FrameKind::OBasis | FrameKind::ActiveRegular)
    }

    pub fn same_as(&self, other: &Frame) -> bool {
        self.kind == other.kind
            && (Arc::ptr_eq(&self.metric, &other.metric) || *self.metric == *other.metric)
            && self.anchor == other.anchor
    }

    pub fn ensure_same(&self, other: &Frame) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::FrameMismatch(format!(
                "{} at {:?} vs {} at {:?}",
                self.kind,
                self.anchor.as_slice(),
                other.kind,
                other.anchor.as_slice()
            )))
        }
    }

    pub fn ensure_pointwise(&self) -> Result<()> {
        if self.is_pointwise() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "expected components in an O-basis, found {}",
                self.kind
            )))
        }
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_must_match_dimension() {
        let m = Arc::new(Metric::euclidean3());
        assert!(Frame::o_basis(m.clone(), &[0.0, 1.0]).is_err());
        assert!(Frame::o_basis(m.clone(), &[0.0, f64::NAN, 1.0]).is_err());
        let f = Frame::o_basis(m, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.dim(), 4);
    }

    #[test]
    fn equality_checks_kind_and_anchor() {
        let m = Arc::new(Metric::minkowski4());
        let a = Frame::origin(m.clone());
        let b = Frame::p_basis(m.clone(), &[0.0; 4]).unwrap();
        assert!(a.ensure_same(&b).is_err());
        assert!(a.ensure_same(&b.with_kind(FrameKind::OBasis)).is_ok());
        assert!(b.ensure_pointwise().is_err());
    }
}
