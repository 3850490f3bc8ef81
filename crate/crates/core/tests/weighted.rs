use cdsplit_core::builtins::{sine_sphere, vector_field_example};
use cdsplit_core::chart::{
    hessian_scalar, lie_derivative_metric, DensitySpec, MetricSpec, ScalarField, VectorField,
};
use cdsplit_core::warped::{radial_identity_n, split_cd_threshold};
use cdsplit_core::weighted::{
    cd_verify, drift_field, generalized_ricci, generalized_ricci_gradient, generalized_ricci_vector,
    min_relative_eigenvalue, ExtendedReal, SampleGrid, Verdict, TOL_CD,
};
use cdsplit_core::chart::BilinearForm;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn skewed_metric() -> MetricSpec {
    MetricSpec::new(3, |p| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 + 0.1 * p[1] * p[1], 0.1 * p[0], 0.0,
                0.1 * p[0], 2.0 + p[2].sin() * 0.3, 0.05,
                0.0, 0.05, 1.5 + 0.2 * p[0].cos(),
            ],
        )
    })
}

fn potential(a: f64, b: f64) -> ScalarField {
    ScalarField::new(move |p| a * p[0] * p[1] + b * p[2].sin() + 0.3 * p[0] * p[0])
}

const NS: [f64; 4] = [-5.0, 0.0, 0.5, 1.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_and_vector_forms_agree(
        a in -1.0..1.0f64, b in -1.0..1.0f64,
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
        k in 0usize..5,
    ) {
        let m = skewed_metric();
        let f = potential(a, b);
        let n_param = if k == 4 { ExtendedReal::PosInfinity } else { ExtendedReal::Finite(NS[k]) };
        let p = [x, y, z];
        let grad = generalized_ricci_gradient(&m, &f, n_param, &p).unwrap();
        let x_field = drift_field(&m, &DensitySpec::Gradient(f));
        let vec = generalized_ricci_vector(&m, &x_field, n_param, &p).unwrap();
        let chol = m.factor(&p).unwrap();
        prop_assert!(vec.relative_error(&grad, &chol) < 1e-5);
    }

    #[test]
    fn half_lie_derivative_of_gradient_is_hessian(
        a in -1.0..1.0f64, b in -1.0..1.0f64,
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
    ) {
        let m = skewed_metric();
        let f = potential(a, b);
        let p = [x, y, z];
        let hess = hessian_scalar(&m, &f, &p).unwrap();
        let lie = lie_derivative_metric(&m, &drift_field(&m, &DensitySpec::Gradient(f)), &p).unwrap();
        prop_assert!(lie.scale(0.5).sub(&hess).max_abs() < 1e-5);
    }

    #[test]
    fn monotone_in_the_parameter(
        a in -1.0..1.0f64, b in -1.0..1.0f64,
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
        n1 in -10.0..2.9f64, gap in 0.01..5.0f64,
    ) {
        // below the dimension, and above it, the tensor increases with N
        let m = skewed_metric();
        let f = potential(a, b);
        let p = [x, y, z];
        let n2 = (n1 + gap).min(2.95);
        let lo = generalized_ricci_gradient(&m, &f, ExtendedReal::Finite(n1), &p).unwrap();
        let hi = generalized_ricci_gradient(&m, &f, ExtendedReal::Finite(n2), &p).unwrap();
        let inf = generalized_ricci_gradient(&m, &f, ExtendedReal::PosInfinity, &p).unwrap();
        let above = generalized_ricci_gradient(&m, &f, ExtendedReal::Finite(3.0 + gap), &p).unwrap();
        let g = BilinearForm::from_matrix(m.components(&p).unwrap());
        prop_assert!(min_relative_eigenvalue(&hi.sub(&lo), &g).unwrap() > -1e-9);
        prop_assert!(min_relative_eigenvalue(&lo.sub(&inf), &g).unwrap() > -1e-9);
        prop_assert!(min_relative_eigenvalue(&inf.sub(&above), &g).unwrap() > -1e-9);
    }

    #[test]
    fn additive_constants_do_not_matter(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -50.0..50.0f64,
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
    ) {
        let m = skewed_metric();
        let f = potential(a, b);
        let p = [x, y, z];
        let n = ExtendedReal::Finite(0.5);
        let r1 = generalized_ricci_gradient(&m, &f, n, &p).unwrap();
        let r2 = generalized_ricci_gradient(&m, &f.shifted(c), n, &p).unwrap();
        // second differences of f + c lose about |c|·ε/h² to cancellation
        prop_assert!(r1.sub(&r2).max_abs() < 1e-6 * c.abs().max(1.0));
    }
}

#[test]
fn cd_zero_n_below_one_implies_cd_zero_one() {
    let s = sine_sphere(1.0).unwrap();
    let grid = SampleGrid::split(-3.0, 3.0, 21, s.fiber().safe_box(), 3);
    for n in [-5.0, -1.0, 0.0, 0.5] {
        let rep = cd_verify(s.metric(), &s.density(), 0.0, ExtendedReal::Finite(n), &grid, TOL_CD).unwrap();
        let one = cd_verify(s.metric(), &s.density(), 0.0, ExtendedReal::Finite(1.0), &grid, TOL_CD).unwrap();
        if rep.verdict == Verdict::Pass {
            assert_eq!(one.verdict, Verdict::Pass);
            assert!(one.min >= rep.min - 1e-9);
        }
    }
}

#[test]
fn sine_sphere_threshold_and_verdicts() {
    let s = sine_sphere(1.0).unwrap();
    let thr = split_cd_threshold(&s, -10.0, 10.0, 2001).unwrap();
    let oracle = (-1.0f64).exp() / 2.0;
    assert!((thr.value - oracle).abs() < 1e-6);
    for (lam, expect) in [(thr.value + 0.01, Verdict::Pass), (thr.value - 0.01, Verdict::Fail)] {
        let s = sine_sphere(lam).unwrap();
        let grid = SampleGrid::split(-10.0, 10.0, 201, s.fiber().safe_box(), 3);
        let rep = cd_verify(s.metric(), &s.density(), 0.0, ExtendedReal::Finite(1.0), &grid, TOL_CD).unwrap();
        assert_eq!(rep.verdict, expect, "λ = {lam}");
        if expect == Verdict::Fail {
            let r = rep.witness[0];
            assert!((r.sin() + 1.0).abs() < 0.05, "witness r = {r}");
        }
    }
}

#[test]
fn radial_identity_for_negative_parameters() {
    let s = sine_sphere(0.5).unwrap();
    for n in [-5.0, -1.0, 0.0, 0.5, 1.0] {
        for p in [[0.3, 0.1, -0.2], [-2.0, 1.0, 0.5], [4.0, -0.7, 0.0]] {
            let id = radial_identity_n(&s, ExtendedReal::Finite(n), &p).unwrap();
            assert!((id.analytic - id.numeric).abs() < 1e-6, "N {n}: {id:?}");
        }
    }
}

#[test]
fn vector_example_kills_the_radial_row() {
    for n in [3, 4] {
        let ex = vector_field_example(n, 0.1).unwrap();
        let m = ex.space.metric();
        let lo = vec![-2.0; n];
        let grid = SampleGrid::random_in(&cdsplit_core::chart::ChartDomain::new(lo, vec![2.0; n]).unwrap(), 25, 9);
        for p in grid.points().unwrap() {
            let ric = generalized_ricci_vector(m, &ex.field, ExtendedReal::Finite(1.0), &p).unwrap();
            let row = (0..n).map(|j| ric.get(0, j).abs()).fold(0.0_f64, f64::max);
            assert!(row < 1e-5, "n {n} at {p:?}: {row:e}");
        }
    }
}

#[test]
fn vector_example_is_a_gradient_in_dimension_three() {
    // for n = 3 the field is ∂_rφ ∂_r; a radial drift cos r ∂_r equals ∇ sin r
    // and both forms must agree
    let ex = vector_field_example(3, 0.1).unwrap();
    let m = ex.space.metric();
    let p = [0.2, 0.3, -0.4];
    let x = ex.field.at(&p).unwrap();
    let dphi = ex.phi.analytic_gradient(&p).unwrap();
    assert!((x[0] - dphi[0]).abs() < 1e-14 && x[1] == 0.0 && x[2] == 0.0);
    let via_vec = generalized_ricci(m, &DensitySpec::Vector(VectorField::new(|q| {
        let mut v = nalgebra::DVector::zeros(3);
        v[0] = q[0].cos();
        v
    })), ExtendedReal::PosInfinity, &p).unwrap();
    let via_grad = generalized_ricci(m, &DensitySpec::Gradient(ScalarField::new(|q| q[0].sin())), ExtendedReal::PosInfinity, &p).unwrap();
    assert!(via_vec.sub(&via_grad).max_abs() < 1e-5);
}
