use std::sync::Arc;

use fivevec::bivector::bivector_split;
use fivevec::derivative::{d_field, d_pair, transform_field};
use fivevec::motion::{compose, t_from_params};
use fivevec::rigid_body::{momentum_tensor, Body, Particle, VelocityBivector};
use fivevec::transport::{o_to_p, p_to_o, transport_tensor};
use fivevec::{ExtTensor, Frame, Metric, MotionParams, Poly, PolyField};
use nalgebra::{DMatrix, DVector, Vector3};
use proptest::prelude::*;

fn metric(minkowski: bool) -> Arc<Metric> {
    Arc::new(if minkowski {
        Metric::minkowski4()
    } else {
        Metric::euclidean3()
    })
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b, c)| Vector3::new(a, b, c))
}

/// A rotation about a random axis: an isometry of either preset on its
/// spatial block.
fn rotation(n: usize, angle: f64, axis: (usize, usize)) -> DMatrix<f64> {
    let mut l = DMatrix::identity(n, n);
    let (i, j) = axis;
    l[(i, i)] = angle.cos();
    l[(j, j)] = angle.cos();
    l[(i, j)] = -angle.sin();
    l[(j, i)] = angle.sin();
    l
}

fn motion(minkowski: bool) -> impl Strategy<Value = MotionParams> {
    let n = if minkowski { 4 } else { 3 };
    let first = if minkowski { 1 } else { 0 };
    (-3.0..3.0f64, first..n - 1, coords(n)).prop_map(move |(angle, i, a)| {
        MotionParams::new(rotation(n, angle, (i, n - 1)), DVector::from_vec(a))
    })
}

fn int_poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..3, n), -3i32..=3), 1..4).prop_map(
        move |terms| {
            terms.into_iter().fold(Poly::zero(n), |acc, (e, c)| {
                acc.add(&Poly::monomial(c as f64, e))
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_round_trip(minkowski: bool, x in coords(4), y in coords(4), comps in coords(25)) {
        let m = metric(minkowski);
        let n = m.n();
        let d = n + 1;
        let frame = Frame::o_basis(m, &x[..n]).unwrap();
        let t = ExtTensor::from_comps(frame, 1, 1, comps[..d * d].to_vec()).unwrap();
        let there = transport_tensor(&t, &y[..n]).unwrap();
        let back = transport_tensor(&there, &x[..n]).unwrap();
        prop_assert!(back.max_abs_diff(&t).unwrap() < 1e-12);
    }

    #[test]
    fn p_and_o_bases_round_trip(minkowski: bool, c in coords(4), x in coords(4), comps in coords(25)) {
        let m = metric(minkowski);
        let n = m.n();
        let d = n + 1;
        let frame = Frame::p_basis(m, &c[..n]).unwrap();
        let t = ExtTensor::from_comps(frame, 0, 2, comps[..d * d].to_vec()).unwrap();
        let back = o_to_p(&p_to_o(&t, &x[..n]).unwrap(), &c[..n]).unwrap();
        prop_assert!(back.max_abs_diff(&t).unwrap() < 1e-12);
    }

    #[test]
    fn bivector_split_is_lossless(minkowski: bool, x in coords(4), upper in coords(10)) {
        let m = metric(minkowski);
        let n = m.n();
        let frame = Frame::o_basis(m, &x[..n]).unwrap();
        let mut b = ExtTensor::zeros(frame, 2, 0);
        let mut k = 0;
        for i in 0..=n {
            for j in i + 1..=n {
                b.set(&[i, j], upper[k]);
                b.set(&[j, i], -upper[k]);
                k += 1;
            }
        }
        prop_assert_eq!(bivector_split(&b).unwrap().reassemble().max_abs_diff(&b).unwrap(), 0.0);
    }

    #[test]
    fn motion_composition_matches_parameters(minkowski: bool, p1 in motion(false), p2 in motion(false)) {
        let m = metric(minkowski);
        let n = m.n();
        let lift = |p: &MotionParams| {
            let mut l = DMatrix::identity(n, n);
            l.view_mut((n - 3, n - 3), (3, 3)).copy_from(&p.l);
            let mut a = DVector::zeros(n);
            a.rows_mut(n - 3, 3).copy_from(&p.a);
            MotionParams::new(l, a)
        };
        let (p1, p2) = (lift(&p1), lift(&p2));
        let frame = Frame::p_basis(m, &vec![0.5; n]).unwrap();
        let product = compose(&t_from_params(&p1, &frame).unwrap(), &t_from_params(&p2, &frame).unwrap()).unwrap();
        let direct = t_from_params(&p1.then(&p2), &frame).unwrap();
        prop_assert!((product.comps() - direct.comps()).amax() < 1e-12);
        let id = compose(&direct, &direct.inverse().unwrap()).unwrap();
        prop_assert!((id.comps() - DMatrix::identity(n + 1, n + 1)).amax() < 1e-11);
    }

    #[test]
    fn motions_in_minkowski_space_compose(p1 in motion(true), p2 in motion(true)) {
        let frame = Frame::p_basis(metric(true), &[0.0, 1.0, -1.0, 2.0]).unwrap();
        let product = compose(&t_from_params(&p1, &frame).unwrap(), &t_from_params(&p2, &frame).unwrap()).unwrap();
        let direct = t_from_params(&p1.then(&p2), &frame).unwrap();
        prop_assert!((product.comps() - direct.comps()).amax() < 1e-12);
    }

    #[test]
    fn bivector_derivative_is_a_derivation(minkowski: bool, f in int_poly(4), g in int_poly(4), s in 0usize..5, t in 0usize..5) {
        let m = metric(minkowski);
        let n = m.n();
        prop_assume!(s != t && s <= n && t <= n);
        let restrict = |p: &Poly| {
            let mut out = Poly::zero(n);
            for (e, c) in p.terms() {
                out = out.add(&Poly::monomial(c, e[..n].to_vec()));
            }
            out
        };
        let (f, g) = (restrict(&f), restrict(&g));
        let d = |p: &Poly| d_pair(&m, &PolyField::scalar(p.clone()), s, t).unwrap().comps()[0].clone();
        let lhs = d(&f.mul(&g));
        let rhs = d(&f).mul(&g).add(&f.mul(&d(&g)));
        prop_assert_eq!(lhs.max_coef_diff(&rhs), 0.0);
        prop_assert_eq!(d(&f).add(&d_pair(&m, &PolyField::scalar(f.clone()), t, s).unwrap().comps()[0]).max_coef_diff(&Poly::zero(n)), 0.0);
    }

    #[test]
    fn translations_differentiate(f in int_poly(3), mu in 0usize..3) {
        let m = metric(false);
        let frame = Frame::p_basis(m.clone(), &[0.0; 3]).unwrap();
        let mut arg = ExtTensor::zeros(frame, 2, 0);
        arg.set(&[mu, 3], 1.0);
        arg.set(&[3, mu], -1.0);
        let got = d_field(&PolyField::scalar(f.clone()), &arg).unwrap();
        prop_assert_eq!(got.comps()[0].max_coef_diff(&f.deriv(mu)), 0.0);
    }

    #[test]
    fn transformed_fields_follow_points(p in motion(false), f in int_poly(3), x in coords(3)) {
        let field = PolyField::scalar(f);
        let moved = transform_field(&field, &p).unwrap();
        let y = p.apply_point(&DVector::from_column_slice(&x));
        let a = moved.eval(y.as_slice())[0];
        let b = field.eval(&x)[0];
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn velocity_transfer_is_rigid(v in vec3(), w in vec3(), at in vec3(), to in vec3()) {
        let (v2, w2) = VelocityBivector::from_frame_motion(&v, &w, &at).unwrap().transfer_velocity(&to).unwrap();
        let expected = v + w.cross(&(to - at));
        prop_assert!((v2 - expected).amax() <= 1e-12 * expected.amax().max(1.0));
        prop_assert_eq!(w2, w);
    }

    #[test]
    fn momentum_moves_with_its_anchor(
        ps in prop::collection::vec((0.1..5.0f64, vec3(), vec3()), 1..8),
        o1 in vec3(),
        o2 in vec3(),
    ) {
        let b = Body::free(ps.into_iter().map(|(m, x, v)| Particle { m, x, v }).collect()).unwrap();
        let moved = transport_tensor(&momentum_tensor(&b, &o1).unwrap(), o2.as_slice()).unwrap();
        let direct = momentum_tensor(&b, &o2).unwrap();
        prop_assert!(moved.max_abs_diff(&direct).unwrap() <= 1e-12 * direct.max_abs().max(1.0));
    }
}
