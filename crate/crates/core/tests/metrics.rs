use ncsc_core::instances::{DeterministicInstance, HardInstanceSpec};
use ncsc_core::metrics::{fit_scaling, maximize_y, primal_grad_norm, verify_lower_bound, Algorithm};
use ncsc_core::problem::QuadraticSaddle;
use ncsc_core::solvers::SolverKind;
use ncsc_core::{Error, Logged, SaddleProblem};
use proptest::prelude::*;

/// Hides the closed-form primal so callers have to fall back to ascent.
struct NoPrimal<P>(P);

impl<P: SaddleProblem> SaddleProblem for NoPrimal<P> {
    fn dim_x(&self) -> usize {
        self.0.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.0.dim_y()
    }
    fn smoothness(&self) -> f64 {
        self.0.smoothness()
    }
    fn strong_concavity(&self) -> f64 {
        self.0.strong_concavity()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.0.value(x, y)
    }
    fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.0.grad(x, y, gx, gy)
    }
}

#[test]
fn square_root_law_recovers_half_slope() {
    let pts: Vec<(f64, f64)> = [2.0f64, 8.0, 32.0, 128.0, 512.0]
        .iter()
        .flat_map(|&k| [(k, 3.0 * k.sqrt()), (k, 3.0 * k.sqrt())])
        .collect();
    let fit = fit_scaling(&pts).unwrap();
    assert!((fit.slope - 0.5).abs() <= 1e-9);
    assert!(fit.r_squared > 1.0 - 1e-12);
}

#[test]
fn three_kappas_are_too_few() {
    let pts = [(4.0, 10.0), (16.0, 20.0), (64.0, 40.0), (64.0, 41.0)];
    assert!(matches!(
        fit_scaling(&pts),
        Err(Error::TooFewPoints { needed: 4, got: 3 })
    ));
}

proptest! {
    #[test]
    fn slope_is_invariant_under_rescaling(
        ys in prop::collection::vec(1.0f64..1e4, 5),
        a in 1e-3f64..1e3,
        b in 1e-3f64..1e3,
    ) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (4f64.powi(i as i32 + 1), y)).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(k, y)| (a * k, b * y)).collect();
        let s1 = fit_scaling(&pts).unwrap().slope;
        let s2 = fit_scaling(&scaled).unwrap().slope;
        prop_assert!((s1 - s2).abs() <= 1e-9 * (1.0 + s1.abs()));
    }
}

#[test]
fn ascent_measure_matches_closed_form() {
    // f = x²/2 + xy − y², so Φ(x) = 3x²/4
    let f = QuadraticSaddle::scalar(1.0, 1.0, 2.0);
    for x in [-2.0, -0.3, 0.0, 0.7, 5.0] {
        let exact = 1.5 * f64::abs(x);
        let closed = primal_grad_norm(&f, &[x], 1e-10).unwrap();
        assert_eq!(closed.slack, 0.0);
        assert!((closed.value - exact).abs() <= 1e-12);
        let ascent = primal_grad_norm(&NoPrimal(f.clone()), &[x], 1e-10).unwrap();
        assert!(ascent.calls > 0);
        assert!((ascent.value - exact).abs() <= 1e-8);
        assert!((ascent.value - exact).abs() <= ascent.slack + 1e-15);
        let r = maximize_y(&f, &[x], &[0.0], 1e-12, 10_000).unwrap();
        assert!((r.y[0] - x / 2.0).abs() <= 1e-11);
    }
}

#[test]
fn nonpositive_inner_tolerance_is_rejected() {
    let f = QuadraticSaddle::scalar(1.0, 1.0, 2.0);
    assert!(matches!(
        primal_grad_norm(&f, &[1.0], 0.0),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn gda_respects_call_floor_on_chain() {
    let spec = HardInstanceSpec::deterministic(1.0, 0.25, 1.0, 0.01, Some(10)).unwrap();
    let rep = verify_lower_bound(&spec, &[Algorithm::Plain(SolverKind::Gda)], &[0], 200_000).unwrap();
    assert_eq!(rep.floor, 19.0);
    let row = &rep.rows[0];
    // x_{d−1} first nonzero at query 2(d−1)+2
    assert_eq!(row.calls_to_activation, Some(19));
    assert!(rep.checks[0].activation_ok);
    assert!(rep.passed());
}

#[test]
fn lower_bound_report_lists_every_run() {
    let spec = HardInstanceSpec::finite_sum(3, 1.0, 1.0 / 16.0, 1.0, 0.01, Some(4)).unwrap();
    let algs = [Algorithm::Plain(SolverKind::Gda), Algorithm::Plain(SolverKind::Svrg)];
    let rep = verify_lower_bound(&spec, &algs, &[0, 1], 50_000).unwrap();
    assert_eq!(rep.rows.len(), 4);
    assert_eq!(rep.checks.len(), 2);
    assert!(rep.checks.iter().all(|c| c.activation_ok));
}

#[test]
fn repeated_origin_queries_activate_nothing() {
    let f = DeterministicInstance::new(&HardInstanceSpec::deterministic(1.0, 0.25, 1.0, 0.01, Some(4)).unwrap()).unwrap();
    let logged = Logged::new(&f);
    let (mut gx, mut gy) = (vec![0.0; f.dim_x()], vec![0.0; f.dim_y()]);
    let x0 = vec![0.0; f.dim_x()];
    let y0 = vec![0.0; f.dim_y()];
    logged.grad(&x0, &y0, &mut gx, &mut gy);
    logged.grad(&x0, &y0, &mut gx, &mut gy);
    let log = logged.log();
    assert_eq!(log.total_calls(), 2);
    assert!(log.x_activation.is_empty());
    assert!(log.y_activation.is_empty());

    let mut x1 = x0.clone();
    x1[0] = 0.5;
    logged.grad(&x1, &y0, &mut gx, &mut gy);
    assert_eq!(logged.log().x_activation, vec![(0, 3)]);
}
