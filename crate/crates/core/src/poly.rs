//! Multivariate polynomials with `f64` coefficients, polynomial scalar and
//! vector fields, and matrices of polynomials.
//!
//! Coefficients that are small integers stay exact under every operation
//! here, which lets the derivative identities be checked by coefficient
//! comparison.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polynomial in `n` variables, keyed by exponent multi-index.
#[derive(Clone, PartialEq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0)
                    .map(|(i, p)| {
                        if *p == 1 {
                            format!("x{i}")
                        } else {
                            format!("x{i}^{p}")
                        }
                    })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(c, vec![0; n])
    }

    /// The coordinate function `x^i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(1.0, e)
    }

    pub fn monomial(coef: f64, exps: Vec<u32>) -> Self {
        let mut p = Poly {
            n: exps.len(),
            terms: BTreeMap::new(),
        };
        p.push(exps, coef);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Poly::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::Shape(format!(
                    "exponent list of length {} in {n} variables",
                    e.len()
                )));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient".into()));
            }
            p.push(e, c);
        }
        Ok(p)
    }

    fn push(&mut self, exps: Vec<u32>, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += coef;
        if *slot == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn check(&self, other: &Poly) {
        assert_eq!(
            self.n, other.n,
            "polynomials in different numbers of variables"
        );
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            out.push(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check(other);
        let mut out = Poly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push(e, ca * cb);
            }
        }
        out
    }

    /// `x^i * self`.
    pub fn mul_var(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[i] += 1;
            out.push(e, *c);
        }
        out
    }

    /// Partial derivative with respect to `x^i`.
    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d[i] -= 1;
                out.push(d, c * f64::from(e[i]));
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "evaluation point dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(p, xi)| xi.powi(*p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// `p(M y + c)` as a polynomial in `y`.
    pub fn compose_affine(&self, m: &DMatrix<f64>, c: &DVector<f64>) -> Poly {
        let n = self.n;
        let images: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p = Poly::constant(n, c[i]);
                for j in 0..n {
                    p.push(
                        {
                            let mut e = vec![0; n];
                            e[j] = 1;
                            e
                        },
                        m[(i, j)],
                    );
                }
                p
            })
            .collect();
        let mut out = Poly::zero(n);
        for (e, coef) in &self.terms {
            let mut term = Poly::constant(n, *coef);
            for (i, p) in e.iter().enumerate() {
                for _ in 0..*p {
                    term = term.mul(&images[i]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Largest coefficient difference, for approximate comparisons.
    pub fn max_coef_diff(&self, other: &Poly) -> f64 {
        self.sub(other)
            .terms
            .values()
            .fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Whether a field is a scalar or has one component per base direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
}

/// A scalar field or a vector field with polynomial components in a
/// Lorentz/Cartesian chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    kind: FieldKind,
    comps: Vec<Poly>,
}

impl PolyField {
    pub fn scalar(p: Poly) -> Self {
        PolyField {
            kind: FieldKind::Scalar,
            comps: vec![p],
        }
    }

    pub fn vector(comps: Vec<Poly>) -> Result<Self> {
        let n = comps
            .first()
            .map(Poly::n)
            .ok_or_else(|| Error::Shape("empty vector field".into()))?;
        if comps.len() != n || comps.iter().any(|p| p.n() != n) {
            return Err(Error::Shape(format!(
                "vector field in {n} variables needs {n} components"
            )));
        }
        Ok(PolyField {
            kind: FieldKind::Vector,
            comps,
        })
    }

    /// The constant basis field `E_alpha`.
    pub fn basis_vector(n: usize, alpha: usize) -> Self {
        let comps = (0..n)
            .map(|b| Poly::constant(n, if b == alpha { 1.0 } else { 0.0 }))
            .collect();
        PolyField {
            kind: FieldKind::Vector,
            comps,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.comps[0].n()
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn as_scalar(&self) -> Result<&Poly> {
        match self.kind {
            FieldKind::Scalar => Ok(&self.comps[0]),
            FieldKind::Vector => Err(Error::Contract("expected a scalar field".into())),
        }
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyField {
        PolyField {
            kind: self.kind,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &PolyField) -> Result<PolyField> {
        if self.kind != other.kind || self.n() != other.n() {
            return Err(Error::Shape("adding fields of different kinds".into()));
        }
        Ok(PolyField {
            kind: self.kind,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    /// `f * self` for a scalar polynomial `f`.
    pub fn mul_scalar(&self, f: &Poly) -> PolyField {
        self.map(|p| p.mul(f))
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.comps.len(), self.comps.iter().map(|p| p.eval(x)))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<PolyFieldDoc>(s)?.build()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PolyFieldDoc::from(self))?)
    }
}

/// `{"exps": [...], "coef": c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exps: Vec<u32>,
    pub coef: f64,
}

/// JSON form: `{"kind": "scalar", "terms": [...]}` or
/// `{"kind": "vector", "components": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolyFieldDoc {
    Scalar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        terms: Vec<TermDoc>,
    },
    Vector {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        components: Vec<Vec<TermDoc>>,
    },
}

fn poly_of(n: usize, terms: &[TermDoc]) -> Result<Poly> {
    Poly::from_terms(n, terms.iter().map(|t| (t.exps.clone(), t.coef)))
}

fn terms_of(p: &Poly) -> Vec<TermDoc> {
    p.terms()
        .map(|(e, c)| TermDoc {
            exps: e.to_vec(),
            coef: c,
        })
        .collect()
}

impl PolyFieldDoc {
    pub fn build(&self) -> Result<PolyField> {
        match self {
            PolyFieldDoc::Scalar { n, terms } => {
                let n = n
                    .or_else(|| terms.first().map(|t| t.exps.len()))
                    .ok_or_else(|| {
                        Error::Shape("scalar field without terms needs an explicit `n`".into())
                    })?;
                Ok(PolyField::scalar(poly_of(n, terms)?))
            }
            PolyFieldDoc::Vector { n, components } => {
                let n = n.unwrap_or(components.len());
                if components.len() != n {
                    return Err(Error::Shape(format!(
                        "vector field needs {n} components, got {}",
                        components.len()
                    )));
                }
                PolyField::vector(
                    components
                        .iter()
                        .map(|c| poly_of(n, c))
                        .collect::<Result<_>>()?,
                )
            }
        }
    }
}

impl From<&PolyField> for PolyFieldDoc {
    fn from(f: &PolyField) -> Self {
        let n = Some(f.n());
        match f.kind {
            FieldKind::Scalar => PolyFieldDoc::Scalar {
                n,
                terms: terms_of(&f.comps[0]),
            },
            FieldKind::Vector => PolyFieldDoc::Vector {
                n,
                components: f.comps.iter().map(terms_of).collect(),
            },
        }
    }
}

/// A matrix whose entries are polynomials, e.g. a position-dependent basis
/// change.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    n: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn from_fn(rows: usize, cols: usize, n: usize, f: impl Fn(usize, usize) -> Poly) -> Self {
        let entries = (0..rows * cols)
            .map(|k| f(k / cols, k % cols))
            .collect::<Vec<_>>();
        assert!(
            entries.iter().all(|p| p.n() == n),
            "entries in different numbers of variables"
        );
        PolyMatrix {
            rows,
            cols,
            n,
            entries,
        }
    }

    pub fn constant(m: &DMatrix<f64>, n: usize) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), n, |i, j| Poly::constant(n, m[(i, j)]))
    }

    pub fn identity(size: usize, n: usize) -> Self {
        Self::constant(&DMatrix::identity(size, size), n)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows || self.n != other.n {
            return Err(Error::Shape(
                "polynomial matrix product shape mismatch".into(),
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, self.n, |i, j| {
            (0..self.cols).fold(Poly::zero(self.n), |acc, k| {
                acc.add(&self.get(i, k).mul(other.get(k, j)))
            })
        }))
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(x))
    }
}
