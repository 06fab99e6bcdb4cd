//! Motion-tensor properties.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::sample;
use super::{relative, Property, Rng};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::motion::{
    compose, exp_motion, r_from_infinitesimal, s_from_r, t_from_params, InfinitesimalMotion,
    MotionParams,
};
use crate::transport::{o_to_p, p_to_o, transport_tensor};

pub fn properties() -> Vec<Property> {
    vec![
        Property::new(
            "motion.frame_independence",
            1e-10,
            "T agrees across initial charts",
            frame_independence,
        ),
        Property::new(
            "motion.r_s_consistency",
            0.0,
            "S built from R and the generators matches omega and -a",
            r_s_consistency,
        ),
        Property::new(
            "motion.compose",
            1e-12,
            "T1 T2 = T of the composed parameters",
            compose_params,
        ),
        Property::new(
            "motion.exp_additivity",
            1e-10,
            "exp(t1 + t2) = exp(t1) exp(t2)",
            exp_additivity,
        ),
        Property::new(
            "motion.exp_derivative",
            1e-6,
            "d/dt exp(-S t) at 0 is -S",
            exp_derivative,
        ),
        Property::new("motion.inverse", 1e-12, "T T^-1 = 1", inverse),
        Property::new(
            "motion.covariantly_constant",
            1e-12,
            "T is unchanged by transport between anchors",
            covariantly_constant,
        ),
    ]
}

fn p_frame(rng: &mut Rng, r: f64) -> Frame {
    let metric = sample::metric(rng);
    let c = sample::point(rng, metric.n(), r);
    Frame::p_basis(metric, &c).expect("finite point")
}

fn infinitesimal(rng: &mut Rng, frame: &Frame, r: f64) -> Result<InfinitesimalMotion> {
    let n = frame.n();
    let omega = sample::antisymmetric(rng, n, r);
    let a = sample::dvec(rng, n, 2.0 * r);
    InfinitesimalMotion::new(frame.metric_arc().clone(), omega, a)
}

fn frame_independence(rng: &mut Rng) -> Result<f64> {
    let metric = sample::metric(rng);
    let n = metric.n();
    let chart1 = Frame::p_basis(metric.clone(), &vec![0.0; n])?;
    let motion = sample::motion_params(rng, &metric);
    // chart 2 coordinates: y = K x + c
    let k = sample::isometry(rng, &metric, 1.0);
    let c = sample::dvec(rng, n, 5.0);
    let k_inv = k
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("K".into()))?;
    let x0 = -(&k_inv * &c);
    let chart2 = Frame::p_basis(metric.clone(), x0.as_slice())?;
    let l2 = &k * &motion.l * &k_inv;
    let a2 = &k * &motion.a + &c - &l2 * &c;
    let t1 = t_from_params(&motion, &chart1)?;
    let t2 = t_from_params(&MotionParams::new(l2, a2), &chart2)?;
    // chart-2 P-basis over chart-1 P-basis: q_b = (p_a - x0_a p_5) (K^-1)^a_b,
    // q_5 = p_5, with x0 the chart-2 origin
    let x0_low = metric.lower(&x0);
    let mut basis = DMatrix::zeros(n + 1, n + 1);
    basis.view_mut((0, 0), (n, n)).copy_from(&k_inv);
    let row = -(x0_low.transpose() * &k_inv);
    for b in 0..n {
        basis[(n, b)] = row[b];
    }
    basis[(n, n)] = 1.0;
    let basis_inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("chart change".into()))?;
    let back = &basis * t2.comps() * basis_inv;
    Ok(relative((back - t1.comps()).amax(), t1.comps().amax()))
}

fn r_s_consistency(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let n = frame.n();
    let m = infinitesimal(rng, &frame, 2.0)?;
    let s = s_from_r(&r_from_infinitesimal(&m, &frame)?)?.to_matrix()?;
    let mixed = m.omega_mixed();
    let a_low = frame.metric().lower(m.a());
    let mut expected = DMatrix::zeros(n + 1, n + 1);
    expected.view_mut((0, 0), (n, n)).copy_from(&mixed);
    for b in 0..n {
        expected[(n, b)] = -a_low[b];
    }
    Ok((s - expected).amax())
}

fn compose_params(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let p1 = sample::motion_params(rng, frame.metric());
    let p2 = sample::motion_params(rng, frame.metric());
    let product = compose(&t_from_params(&p1, &frame)?, &t_from_params(&p2, &frame)?)?;
    let direct = t_from_params(&p1.then(&p2), &frame)?;
    Ok(relative(
        (product.comps() - direct.comps()).amax(),
        direct.comps().amax(),
    ))
}

fn exp_additivity(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let m = infinitesimal(rng, &frame, 1.0)?;
    let (t1, t2) = (sample::uniform(rng, 1.0), sample::uniform(rng, 1.0));
    let whole = exp_motion(&m, t1 + t2, &frame)?;
    let parts = compose(&exp_motion(&m, t1, &frame)?, &exp_motion(&m, t2, &frame)?)?;
    Ok(relative(
        (whole.comps() - parts.comps()).amax(),
        whole.comps().amax(),
    ))
}

fn exp_derivative(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let m = infinitesimal(rng, &frame, 1.0)?;
    let eps = 1e-4;
    let fd = (exp_motion(&m, eps, &frame)?.comps() - exp_motion(&m, -eps, &frame)?.comps())
        / (2.0 * eps);
    let s = s_from_r(&r_from_infinitesimal(&m, &frame)?)?.to_matrix()?;
    Ok(relative((fd + &s).amax(), s.amax()))
}

fn inverse(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let t = t_from_params(&sample::motion_params(rng, frame.metric()), &frame)?;
    let d = frame.dim();
    let id = compose(&t, &t.inverse()?)?;
    Ok(relative(
        (id.comps() - DMatrix::identity(d, d)).amax(),
        t.comps().amax(),
    ))
}

fn covariantly_constant(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng, 5.0);
    let n = frame.n();
    let t = t_from_params(&sample::motion_params(rng, frame.metric()), &frame)?;
    let x = sample::point(rng, n, 5.0);
    let mut moved = p_to_o(&t.to_tensor(), &x)?;
    for _ in 0..rng.random_range(1..=2) {
        moved = transport_tensor(&moved, &sample::point(rng, n, 5.0))?;
    }
    let back = o_to_p(&moved, frame.anchor().as_slice())?;
    Ok(relative(
        back.max_abs_diff(&t.to_tensor())?,
        t.comps().amax(),
    ))
}
