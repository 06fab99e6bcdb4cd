//! Seeded random property batches over the invariant catalogue of every
//! module.
//!
//! Each case draws from its own xoshiro256++ stream, seeded from the run
//! seed, the property id and the case index, so results do not depend on
//! scheduling. With the `parallel` feature, cases run on the rayon pool.

mod algebra;
mod derivative;
mod lagrange;
mod motion;
mod rigid;
mod sample;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::Result;

pub type Rng = Xoshiro256PlusPlus;

/// One case of a property: draws its inputs and returns a residual.
pub type Check = fn(&mut Rng) -> Result<f64>;

pub const DEFAULT_CASES: usize = 200;

#[derive(Clone, Copy)]
pub struct Property {
    pub id: &'static str,
    pub tolerance: f64,
    pub summary: &'static str,
    check: Check,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Property")
            .field("id", &self.id)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl Property {
    pub(crate) const fn new(
        id: &'static str,
        tolerance: f64,
        summary: &'static str,
        check: Check,
    ) -> Self {
        Property {
            id,
            tolerance,
            summary,
            check,
        }
    }

    /// Residual of case `case` under run seed `seed`.
    pub fn residual(&self, seed: u64, case: u64) -> Result<f64> {
        (self.check)(&mut case_rng(seed, self.id, case))
    }
}

/// The full catalogue, sorted by id.
pub fn catalogue() -> Vec<Property> {
    let mut all = [
        algebra::properties(),
        motion::properties(),
        rigid::properties(),
        derivative::properties(),
        lagrange::properties(),
    ]
    .concat();
    all.sort_by_key(|p| p.id);
    all
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// The random stream of one case.
pub fn case_rng(seed: u64, id: &str, case: u64) -> Rng {
    Rng::seed_from_u64(fnv1a(id) ^ seed.rotate_left(29) ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub cases: usize,
    /// Replaces every property's own tolerance.
    pub tolerance: Option<f64>,
    /// Keep only properties whose id starts with this prefix.
    pub only: Option<String>,
    /// Run cases on the rayon pool (ignored without the `parallel` feature).
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            cases: DEFAULT_CASES,
            tolerance: None,
            only: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub id: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases_per_property: usize,
    pub pass: bool,
    pub properties: Vec<PropertyReport>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &PropertyReport> {
        self.properties.iter().filter(|p| !p.pass)
    }
}

fn residuals(p: &Property, seed: u64, cases: usize, parallel: bool) -> Vec<Result<f64>> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..cases as u64)
            .into_par_iter()
            .map(|c| p.residual(seed, c))
            .collect();
    }
    let _ = parallel;
    (0..cases as u64).map(|c| p.residual(seed, c)).collect()
}

pub fn run_property(p: &Property, opts: &VerifyOptions) -> PropertyReport {
    let tolerance = opts.tolerance.unwrap_or(p.tolerance);
    let mut max_residual: f64 = 0.0;
    let mut error = None;
    for (case, r) in residuals(p, opts.seed, opts.cases, opts.parallel)
        .into_iter()
        .enumerate()
    {
        match r {
            Ok(v) if v.is_nan() => {
                max_residual = f64::INFINITY;
                error.get_or_insert_with(|| format!("case {case}: residual is NaN"));
            }
            Ok(v) => max_residual = max_residual.max(v),
            Err(e) => {
                max_residual = f64::INFINITY;
                error.get_or_insert_with(|| format!("case {case}: {e}"));
            }
        }
    }
    PropertyReport {
        id: p.id.to_string(),
        cases: opts.cases,
        max_residual,
        tolerance,
        pass: error.is_none() && max_residual <= tolerance,
        error,
    }
}

/// Runs the selected properties; the report is in property-id order.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let selected: Vec<Property> = catalogue()
        .into_iter()
        .filter(|p| {
            opts.only
                .as_deref()
                .is_none_or(|prefix| p.id.starts_with(prefix))
        })
        .collect();
    let properties: Vec<PropertyReport> = selected.iter().map(|p| run_property(p, opts)).collect();
    VerifyReport {
        seed: opts.seed,
        cases_per_property: opts.cases,
        pass: properties.iter().all(|p| p.pass),
        properties,
    }
}

/// `diff / max(1, scale)`.
pub(crate) fn relative(diff: f64, scale: f64) -> f64 {
    diff / scale.abs().max(1.0)
}
