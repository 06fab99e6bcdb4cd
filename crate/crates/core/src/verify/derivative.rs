//! Bivector-derivative properties: exact identities on integer polynomial
//! fields, connection coefficients and the finite-difference check.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::sample::{self, field_diff};
use super::{relative, Property, Rng};
use crate::derivative::{
    active_regular_field, base_generator, connection_coeffs, d_field, d_pair, derivative_at,
    o_basis_field, r_partial_check, transform_connection,
};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::poly::{Poly, PolyField, PolyMatrix};
use crate::tensor::ExtTensor;
use crate::transport::p_to_o;

pub fn properties() -> Vec<Property> {
    vec![
        Property::new(
            "derivative.linearity",
            0.0,
            "D_(fA+gB) U = f D_A U + g D_B U",
            linearity,
        ),
        Property::new(
            "derivative.leibniz",
            0.0,
            "D_A (f U) = (D_A f) U + f D_A U",
            leibniz,
        ),
        Property::new(
            "derivative.e_part_reduction",
            0.0,
            "translation arguments give partial derivatives",
            e_part_reduction,
        ),
        Property::new("derivative.antisymmetry", 0.0, "D_AB = -D_BA", antisymmetry),
        Property::new(
            "derivative.basis_equivalence",
            0.0,
            "D over p_A ^ p_B equals D over e_A ^ e_B on Lorentz basis fields",
            basis_equivalence,
        ),
        Property::new(
            "derivative.pointwise_route",
            1e-12,
            "split-based evaluation equals the P-basis formula",
            pointwise_route,
        ),
        Property::new(
            "derivative.connection_lorentz",
            0.0,
            "Lorentz basis: Gamma_a5 = 0, Gamma_ab = M_ab",
            connection_lorentz,
        ),
        Property::new(
            "derivative.connection_active_regular",
            1e-12,
            "active regular basis: ordinary connection and M_ab",
            connection_active_regular,
        ),
        Property::new(
            "derivative.connection_transform",
            1e-12,
            "transformation law reproduces direct coefficients",
            connection_transform,
        ),
        Property::new(
            "derivative.r_partial",
            1e-7,
            "D_AB G matches the finite-difference pullback at h = 1e-4",
            r_partial,
        ),
    ]
}

fn origin_chart(rng: &mut Rng) -> Frame {
    let metric = sample::metric(rng);
    let n = metric.n();
    Frame::p_basis(metric, &vec![0.0; n]).expect("origin")
}

fn linearity(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let u = sample::vector_field(rng, n, 3, true);
    let (a, b) = (
        sample::bivector(rng, &frame, true),
        sample::bivector(rng, &frame, true),
    );
    let (f, g) = (sample::int(rng, 4), sample::int(rng, 4));
    let lhs = d_field(&u, &a.scale(f).add(&b.scale(g))?)?;
    let rhs = d_field(&u, &a)?
        .map(|p| p.scale(f))
        .add(&d_field(&u, &b)?.map(|p| p.scale(g)))?;
    Ok(field_diff(&lhs, &rhs))
}

fn leibniz(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let f = sample::poly(rng, n, 2, 3, true);
    let u = sample::vector_field(rng, n, 2, true);
    let a = sample::bivector(rng, &frame, true);
    let lhs = d_field(&u.mul_scalar(&f), &a)?;
    let df = d_field(&PolyField::scalar(f.clone()), &a)?;
    let rhs = u
        .mul_scalar(&df.comps()[0])
        .add(&d_field(&u, &a)?.mul_scalar(&f))?;
    Ok(field_diff(&lhs, &rhs))
}

fn e_part_reduction(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let u = sample::vector_field(rng, n, 3, true);
    let mut a = ExtTensor::zeros(frame.clone(), 2, 0);
    let mut expected = u.map(|p| Poly::zero(p.n()));
    for mu in 0..n {
        let c = sample::int(rng, 3);
        a.set(&[mu, n], c);
        a.set(&[n, mu], -c);
        expected = expected.add(&u.map(|p| p.deriv(mu).scale(c)))?;
    }
    Ok(field_diff(&d_field(&u, &a)?, &expected))
}

fn antisymmetry(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let field = if rng.random_bool(0.5) {
        PolyField::scalar(sample::poly(rng, n, 3, 4, true))
    } else {
        sample::vector_field(rng, n, 3, true)
    };
    let (s, t) = sample::index_pair(rng, n + 1);
    let sum = d_pair(frame.metric(), &field, s, t)?.add(&d_pair(frame.metric(), &field, t, s)?)?;
    Ok(field_diff(&sum, &sum.map(|p| Poly::zero(p.n()))))
}

fn basis_equivalence(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let alpha = rng.random_range(0..n);
    let (a, b) = sample::index_pair(rng, n + 1);
    let x: Vec<f64> = (0..n).map(|_| sample::int(rng, 3)).collect();
    let e = PolyField::basis_vector(n, alpha);
    let over_p = d_pair(frame.metric(), &e, a, b)?.eval(&x);
    let o_frame = Frame::o_basis(frame.metric_arc().clone(), &x)?;
    let over_e = derivative_at(&e, &frame, &sample::basis_bivector(&o_frame, a, b), &x)?;
    Ok((over_p - over_e).amax())
}

fn pointwise_route(rng: &mut Rng) -> Result<f64> {
    let metric = sample::metric(rng);
    let n = metric.n();
    let frame = Frame::p_basis(metric, &sample::point(rng, n, 3.0))?;
    let field = if rng.random_bool(0.5) {
        PolyField::scalar(sample::poly(rng, n, 3, 4, false))
    } else {
        sample::vector_field(rng, n, 3, false)
    };
    let arg = sample::bivector(rng, &frame, false);
    let x = sample::point(rng, n, 2.0);
    let symbolic = d_field(&field, &arg)?.eval(&x);
    // the same argument handed over in the O-basis at the point
    let global: Vec<f64> = frame.anchor().iter().zip(&x).map(|(c, y)| c + y).collect();
    let local = p_to_o(&arg, &global)?;
    let a = derivative_at(&field, &frame, &arg, &x)?;
    let b = derivative_at(&field, &frame, &local, &x)?;
    Ok(relative(
        (&a - &symbolic).amax().max((&b - &symbolic).amax()),
        symbolic.amax(),
    ))
}

fn connection_lorentz(rng: &mut Rng) -> Result<f64> {
    let metric = sample::metric(rng);
    let n = metric.n();
    let x = sample::point(rng, n, 3.0);
    let five = if rng.random_bool(0.5) {
        PolyMatrix::identity(n + 1, n)
    } else {
        o_basis_field(&metric)
    };
    let table = connection_coeffs(&metric, &PolyMatrix::identity(n, n), &five, &x)?;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        worst = worst
            .max(table.block(a, n).amax())
            .max(table.block(n, a).amax());
        for b in 0..n {
            worst = worst.max((table.block(a, b) - base_generator(metric.g(), a, b)).amax());
        }
    }
    Ok(worst.max(table.block(n, n).amax()))
}

/// A four-basis `Lambda(x) = Lambda_0 + sum x^s Lambda_s` near the identity,
/// with its constant coefficient matrices.
struct LinearBasis {
    field: PolyMatrix,
    slopes: Vec<DMatrix<f64>>,
}

fn linear_basis(rng: &mut Rng, n: usize) -> LinearBasis {
    let base =
        DMatrix::<f64>::identity(n, n) + DMatrix::from_fn(n, n, |_, _| sample::uniform(rng, 0.1));
    let slopes: Vec<DMatrix<f64>> = (0..n)
        .map(|_| DMatrix::from_fn(n, n, |_, _| sample::uniform(rng, 0.05)))
        .collect();
    let field = PolyMatrix::from_fn(n, n, n, |i, j| {
        (0..n).fold(Poly::constant(n, base[(i, j)]), |acc, s| {
            acc.add(&Poly::var(n, s).scale(slopes[s][(i, j)]))
        })
    });
    LinearBasis { field, slopes }
}

fn connection_active_regular(rng: &mut Rng) -> Result<f64> {
    let metric = sample::metric(rng);
    let n = metric.n();
    let basis = linear_basis(rng, n);
    let x = sample::point(rng, n, 1.0);
    let lambda = basis.field.eval(&x);
    let lambda_inv = lambda
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("four-basis".into()))?;
    let table = connection_coeffs(
        &metric,
        &basis.field,
        &active_regular_field(&metric, &basis.field)?,
        &x,
    )?;
    let g_prime = lambda.transpose() * metric.g() * &lambda;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..n {
        // Gamma^m_{n a} = (Lambda^-1 Lambda^s_a d_s Lambda)^m_n
        let ordinary = &lambda_inv
            * (0..n).fold(DMatrix::zeros(n, n), |acc, s| {
                acc + &basis.slopes[s] * lambda[(s, a)]
            });
        worst = worst
            .max((table.block(a, n) - &ordinary).amax())
            .max((table.block(n, a) + &ordinary).amax());
        scale = scale.max(ordinary.amax());
        for b in 0..n {
            let m = base_generator(&g_prime, a, b);
            worst = worst.max((table.block(a, b) - &m).amax());
            scale = scale.max(m.amax());
        }
    }
    Ok(relative(worst.max(table.block(n, n).amax()), scale))
}

fn lift(m: &PolyMatrix) -> PolyMatrix {
    let n = m.rows();
    PolyMatrix::from_fn(n + 1, n + 1, m.n(), |i, j| match (i < n, j < n) {
        (true, true) => m.get(i, j).clone(),
        (false, false) => Poly::constant(m.n(), 1.0),
        _ => Poly::zero(m.n()),
    })
}

fn connection_transform(rng: &mut Rng) -> Result<f64> {
    let metric = sample::metric(rng);
    let n = metric.n();
    let basis = linear_basis(rng, n);
    let x = sample::point(rng, n, 1.0);
    let target_five = active_regular_field(&metric, &basis.field)?;
    let direct = connection_coeffs(&metric, &basis.field, &target_five, &x)?;
    let identity = PolyMatrix::identity(n, n);
    // from (Lorentz, P-basis) with L = active regular, or from
    // (Lorentz, O-basis) with L = diag(Lambda, 1)
    let (old_five, l) = if rng.random_bool(0.5) {
        (PolyMatrix::identity(n + 1, n), target_five.clone())
    } else {
        (o_basis_field(&metric), lift(&basis.field))
    };
    let old = connection_coeffs(&metric, &identity, &old_five, &x)?;
    let moved = transform_connection(&metric, &old, &old_five, &basis.field, &l, &x)?;
    let scale = (0..=n)
        .flat_map(|a| (0..=n).map(move |b| (a, b)))
        .map(|(a, b)| direct.block(a, b).amax())
        .fold(0.0, f64::max);
    Ok(relative(moved.max_abs_diff(&direct), scale))
}

fn r_partial(rng: &mut Rng) -> Result<f64> {
    let frame = origin_chart(rng);
    let n = frame.n();
    let mut exps = vec![0u32; n];
    for _ in 0..rng.random_range(0..=2) {
        exps[rng.random_range(0..n)] += 1;
    }
    let mono = Poly::monomial(1.0, exps);
    let field = if rng.random_bool(0.5) {
        PolyField::scalar(mono)
    } else {
        let slot = rng.random_range(0..n);
        PolyField::vector(
            (0..n)
                .map(|i| {
                    if i == slot {
                        mono.clone()
                    } else {
                        Poly::zero(n)
                    }
                })
                .collect(),
        )?
    };
    let (a, b) = sample::index_pair(rng, n + 1);
    r_partial_check(&field, &frame, a, b, 1e-4)
}
