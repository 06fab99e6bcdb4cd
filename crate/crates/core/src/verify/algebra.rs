//! Transport, bivector and contravariant-basis properties.

use nalgebra::{DMatrix, Matrix3};
use rand::Rng as _;

use super::sample::{self, euclidean3};
use super::{relative, Property, Rng};
use crate::bivector::{bivector_split, dual3, dual3_inv};
use crate::error::Result;
use crate::frame::Frame;
use crate::motion::t_from_params;
use crate::tensor::ExtTensor;
use crate::transport::{contravariant_frame, theta_g, transport_tensor};

pub fn properties() -> Vec<Property> {
    vec![
        Property::new(
            "transport.chain",
            1e-12,
            "chained transport equals direct transport",
            transport_chain,
        ),
        Property::new(
            "transport.contraction",
            1e-12,
            "transport commutes with contraction",
            transport_contraction,
        ),
        Property::new(
            "transport.theta_g",
            1e-12,
            "theta_g commutes with transport and kills e_5",
            transport_theta,
        ),
        Property::new(
            "bivector.split_round_trip",
            0.0,
            "reassemble(split(b)) = b",
            split_round_trip,
        ),
        Property::new(
            "bivector.dual3",
            0.0,
            "dual3(dual3_inv(w)) = w",
            dual_round_trip,
        ),
        Property::new(
            "appendix.dual_pairing",
            0.0,
            "g(e_a, e^b) = delta and o_A(e^B) = delta",
            dual_pairing,
        ),
        Property::new(
            "appendix.contravariant_p_basis",
            1e-12,
            "p^a = e^a + x^a e^5",
            contravariant_p_basis,
        ),
        Property::new(
            "appendix.motion_representation",
            1e-12,
            "T in the contravariant P-basis is [[L, a], [0, 1]]",
            motion_representation,
        ),
    ]
}

fn random_rank(rng: &mut Rng) -> (usize, usize) {
    loop {
        let (p, q) = (rng.random_range(0..=2), rng.random_range(0..=2));
        if (1..=3).contains(&(p + q)) {
            return (p, q);
        }
    }
}

fn o_frame(rng: &mut Rng) -> Frame {
    let metric = sample::metric(rng);
    let at = sample::point(rng, metric.n(), 5.0);
    Frame::o_basis(metric, &at).expect("finite point")
}

fn transport_chain(rng: &mut Rng) -> Result<f64> {
    let frame = o_frame(rng);
    let n = frame.n();
    let (p, q) = random_rank(rng);
    let t = sample::tensor(rng, &frame, p, q, 1.0);
    let stops = rng.random_range(1..=3);
    let mut chained = t.clone();
    for _ in 0..stops {
        chained = transport_tensor(&chained, &sample::point(rng, n, 5.0))?;
    }
    let end = sample::point(rng, n, 5.0);
    let chained = transport_tensor(&chained, &end)?;
    let direct = transport_tensor(&t, &end)?;
    Ok(relative(chained.max_abs_diff(&direct)?, direct.max_abs()))
}

fn transport_contraction(rng: &mut Rng) -> Result<f64> {
    let frame = o_frame(rng);
    let (p, q) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let t = sample::tensor(rng, &frame, p, q, 1.0);
    let (up, down) = (rng.random_range(0..p), rng.random_range(0..q));
    let to = sample::point(rng, frame.n(), 5.0);
    let a = transport_tensor(&t, &to)?.contract(up, down)?;
    let b = transport_tensor(&t.contract(up, down)?, &to)?;
    Ok(relative(a.max_abs_diff(&b)?, a.max_abs()))
}

fn transport_theta(rng: &mut Rng) -> Result<f64> {
    let frame = o_frame(rng);
    let v = sample::tensor(rng, &frame, 1, 0, 2.0);
    let to = sample::point(rng, frame.n(), 5.0);
    let a = theta_g(&transport_tensor(&v, &to)?)?;
    let b = transport_tensor(&theta_g(&v)?, &to)?;
    let kernel = theta_g(
        &ExtTensor::basis_vector(frame.clone(), frame.n()).scale(sample::uniform(rng, 3.0)),
    )?;
    Ok(relative(a.max_abs_diff(&b)?, a.max_abs()).max(kernel.max_abs()))
}

fn split_round_trip(rng: &mut Rng) -> Result<f64> {
    let frame = o_frame(rng);
    let b = sample::bivector(rng, &frame, false);
    bivector_split(&b)?.reassemble().max_abs_diff(&b)
}

fn dual_round_trip(rng: &mut Rng) -> Result<f64> {
    let m = euclidean3();
    let w = sample::vec3(rng, 5.0);
    let back = dual3(&m, &dual3_inv(&m, &w)?)?;
    let b = Matrix3::from_fn(|i, j| {
        if i < j {
            sample::uniform(rng, 5.0)
        } else {
            0.0
        }
    });
    let b = b - b.transpose();
    let again = dual3_inv(&m, &dual3(&m, &b)?)?;
    Ok((back - w).amax().max((again - b).amax()))
}

fn dual_pairing(rng: &mut Rng) -> Result<f64> {
    let frame = o_frame(rng);
    let basis = contravariant_frame(&frame);
    let n = frame.n();
    let base = (basis.base_pairing() - DMatrix::identity(n, n)).amax();
    let full = (basis.forms() * basis.vectors() - DMatrix::identity(n + 1, n + 1)).amax();
    Ok(base.max(full))
}

fn p_frame(rng: &mut Rng) -> Frame {
    let metric = sample::metric(rng);
    let c = sample::point(rng, metric.n(), 5.0);
    Frame::p_basis(metric, &c).expect("finite point")
}

fn contravariant_p_basis(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng);
    let n = frame.n();
    let g_inv = frame.metric().g_inv().clone();
    let at = sample::point(rng, n, 5.0);
    let x: Vec<f64> = at
        .iter()
        .zip(frame.anchor().iter())
        .map(|(a, c)| a - c)
        .collect();
    let got = contravariant_frame(&frame).p_basis_in_o_basis(&at)?;
    let mut expected = DMatrix::zeros(n + 1, n + 1);
    for alpha in 0..n {
        for beta in 0..n {
            expected[(beta, alpha)] = g_inv[(beta, alpha)];
        }
        expected[(n, alpha)] = x[alpha];
    }
    expected[(n, n)] = 1.0;
    Ok(relative((got - &expected).amax(), expected.amax()))
}

fn motion_representation(rng: &mut Rng) -> Result<f64> {
    let frame = p_frame(rng);
    let n = frame.n();
    let p = sample::motion_params(rng, frame.metric());
    let got = t_from_params(&p, &frame)?.contravariant_components();
    let mut expected = DMatrix::zeros(n + 1, n + 1);
    expected.view_mut((0, 0), (n, n)).copy_from(&p.l);
    for i in 0..n {
        expected[(i, n)] = p.a[i];
    }
    expected[(n, n)] = 1.0;
    Ok(relative((got - &expected).amax(), expected.amax()))
}
