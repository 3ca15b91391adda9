use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cauchyquad::aaa::{aaa_fit, evaluate, AaaOptions, SampleSet};
use cauchyquad::geometry::{self, winding_number};
use cauchyquad::linalg::{eigenvalues, svd, ComplexMatrix, LuDecomposition};
use cauchyquad::quad::{integrate_segment, QuadTolerance};
use cauchyquad::recipes::{run_recipe, GeometryFile, RecipeConfig, RecipeName};
use cauchyquad::rule::{apply_rule, error_bound};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_circle(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// Poles with moduli in [1.3, 3] and residues in the unit square.
fn pole_data(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((1.3..3.0f64, 0.0..2.0 * PI, -1.0..1.0f64, -1.0..1.0f64), 1..=max)
}

fn samples_of(poles: &[(f64, f64, f64, f64)]) -> SampleSet {
    let z = unit_circle(150);
    let f = z
        .iter()
        .map(|&s| poles.iter().map(|&(r, t, a, b)| c(a, b) / (s - Complex64::from_polar(r, t))).sum())
        .collect();
    SampleSet::new(z, f, "poles").unwrap()
}

fn matrix(entries: &[(f64, f64)], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let (a, b) = entries[i * cols + j];
        c(a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pole_residue_form_matches_barycentric_form(poles in pole_data(6), seed in 0u64..1000) {
        let s = samples_of(&poles);
        let fit = aaa_fit(&s, &AaaOptions::with_degree(poles.len() + 2)).unwrap();
        let pr = &fit.poles;
        let scale = s.max_abs_value();
        let diameter = 2.0;
        let mut k = seed;
        let mut tested = 0;
        while tested < 100 {
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = (k >> 11) as f64 / (1u64 << 53) as f64;
            let z = Complex64::from_polar(0.2 + 1.6 * t, 2.0 * PI * ((k >> 3) % 1000) as f64 / 1000.0);
            if pr.poles.iter().any(|p| (z - p).norm() <= 1e-2 * diameter) {
                continue;
            }
            tested += 1;
            let gap = (evaluate(&fit.rational, z) - pr.evaluate(z)).norm();
            prop_assert!(gap <= 1e-8 * scale, "gap {gap:e} at {z}");
        }
    }

    #[test]
    fn support_points_reproduce_samples(values in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 40), degree in 1usize..10) {
        let z = unit_circle(40);
        let f: Vec<Complex64> = values.iter().map(|&(a, b)| c(a, b)).collect();
        let s = SampleSet::new(z, f, "random").unwrap();
        let fit = aaa_fit(&s, &AaaOptions::with_degree(degree)).unwrap();
        for (&zj, &fj) in fit.rational.support_points().iter().zip(fit.rational.support_values()) {
            prop_assert_eq!(evaluate(&fit.rational, zj), fj);
        }
    }

    #[test]
    fn svd_reconstructs(rows in 1usize..12, cols in 1usize..12, entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 144)) {
        let a = matrix(&entries, rows, cols);
        let d = svd(&a).unwrap();
        let s = ComplexMatrix::from_diag(&d.singular_values.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let back = d.left_singular_vectors.matmul(&s).matmul(&d.right_singular_vectors.adjoint());
        let diff = ComplexMatrix::from_fn(rows, cols, |i, j| back[(i, j)] - a[(i, j)]);
        prop_assert!(diff.frobenius_norm() <= 1e-11 * a.frobenius_norm().max(f64::MIN_POSITIVE));
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant(n in 1usize..12, entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 144)) {
        let a = matrix(&entries, n, n);
        let ev = eigenvalues(&a).unwrap();
        let tr: Complex64 = ev.iter().sum();
        let det: Complex64 = ev.iter().product();
        let lu_det = LuDecomposition::new(&a).unwrap().determinant();
        prop_assert!((tr - a.trace()).norm() <= 1e-10 * a.frobenius_norm());
        prop_assert!((det - lu_det).norm() <= 1e-8 * lu_det.norm());
    }

    #[test]
    fn integration_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, w in 0.5..6.0f64, x0 in -2.0..0.0f64, x1 in 0.5..2.0f64) {
        let tol = QuadTolerance::default();
        let f = |z: Complex64| (z * w).sin();
        let g = |z: Complex64| 1.0 / (z * z + 2.0);
        let (a, b) = (c(x0, 0.1), c(x1, -0.3));
        let both = integrate_segment(|z| alpha * f(z) + beta * g(z), a, b, tol).unwrap().value;
        let sep = alpha * integrate_segment(f, a, b, tol).unwrap().value + beta * integrate_segment(g, a, b, tol).unwrap().value;
        prop_assert!((both - sep).norm() <= 1e-12 * (1.0 + both.norm()));
    }

    #[test]
    fn closed_generators_are_distinct_and_wind_once(rho in 1.05..3.0f64, radius in 0.1..4.0f64, eps in 0.05..1.0f64, n in 20usize..300) {
        let shapes = [
            (geometry::bernstein_ellipse(rho, n).unwrap(), c(0.0, 0.0)),
            (geometry::circle(c(0.3, -0.2), radius, n).unwrap(), c(0.3, -0.2)),
            (geometry::stadium(eps, n, n / 2 + 1).unwrap(), c(0.0, 0.0)),
            (geometry::rectangle(c(-1.0, -eps), c(2.0, eps), n / 4 + 2).unwrap(), c(0.5, 0.0)),
        ];
        for (pts, probe) in shapes {
            let d = geometry::Discretization::from_points(pts.clone(), true);
            prop_assert!(d.check_distinct().is_ok());
            prop_assert!((winding_number(&pts, probe) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn real_symmetric_recipe_gives_exactly_real_results() {
    let run = run_recipe(&RecipeConfig::new(RecipeName::Gauss)).unwrap();
    assert!(run.options.enforce_real_symmetry);
    let v = run.integral.unwrap();
    assert_eq!(v.im, 0.0);
    for z in &run.rule.nodes {
        assert!(z.im == 0.0 || run.rule.nodes.iter().any(|w| *w == z.conj()), "{z} has no exact conjugate");
    }

    let mut cfg = RecipeConfig::new(RecipeName::Hankel);
    cfg.real_symmetry = Some(true);
    let run = run_recipe(&cfg).unwrap();
    for (z, w) in run.rule.nodes.iter().zip(&run.rule.weights) {
        let k = run.rule.nodes.iter().position(|p| *p == z.conj()).expect("conjugate node");
        assert_eq!(run.rule.weights[k], w.conj());
    }
    assert_eq!(run.integral.unwrap().im, 0.0);
}

#[test]
fn rule_reproduces_the_pole_residue_form() {
    let run = run_recipe(&RecipeConfig::new(RecipeName::Jacobi)).unwrap();
    let pr = &run.fit.poles;
    for &s in run.problem.gamma.points.iter().step_by(17) {
        let v = apply_rule(&run.rule, |z| 1.0 / (s - z)).unwrap();
        let r = pr.evaluate(s) - pr.constant;
        assert!((v - r).norm() <= 1e-12 * r.norm().max(1.0), "{v} vs {r}");
    }
}

#[test]
fn error_bound_dominates_observed_error() {
    for recipe in [RecipeName::Gauss, RecipeName::Jacobi, RecipeName::Slits, RecipeName::Hankel, RecipeName::Circle, RecipeName::Strip, RecipeName::Matfun] {
        let run = run_recipe(&RecipeConfig::new(recipe)).unwrap();
        let f = run.problem.integrand.unwrap();
        let f_sup = run.problem.gamma.points.iter().map(|&z| f.eval(z).norm()).fold(0.0, f64::max);
        let bound = error_bound(&run.rule, f_sup).unwrap();
        let err = run.error.unwrap();
        assert!(err <= 2.0 * bound, "{recipe}: error {err:e} exceeds 2 x bound {bound:e}");
    }
}

#[test]
fn ellipse_residual_improves_with_degree() {
    let lo = run_recipe(&RecipeConfig::new(RecipeName::Gauss).with_degree(10)).unwrap();
    let hi = run_recipe(&RecipeConfig::new(RecipeName::Gauss).with_degree(20)).unwrap();
    assert!(hi.fit.max_error < lo.fit.max_error);
}

#[test]
fn every_recipe_runs_quickly() {
    let custom: GeometryFile =
        serde_json::from_str(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/custom_chebyshev.json")).unwrap()).unwrap();
    for recipe in RecipeName::ALL {
        let mut cfg = RecipeConfig::new(recipe);
        if recipe == RecipeName::Custom {
            cfg.geometry = Some(custom.clone());
        }
        let t = Instant::now();
        let run = run_recipe(&cfg).unwrap_or_else(|e| panic!("{e}"));
        assert!(t.elapsed() < Duration::from_secs(30), "{recipe} took {:?}", t.elapsed());
        assert!(!run.rule.nodes.is_empty());
        if let Some(e) = run.error {
            assert!(e < 1e-3, "{recipe}: error {e:e}");
        }
    }
}
