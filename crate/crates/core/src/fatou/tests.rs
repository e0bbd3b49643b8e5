use std::sync::OnceLock;

use num_complex::Complex64;
use num_rational::BigRational;

use super::*;
use crate::regions::certify_params;

fn machine() -> &'static FatouMachine {
    static M: OnceLock<FatouMachine> = OnceLock::new();
    M.get_or_init(|| FatouMachine::build(&MapChain::standard(), &MachineConfig::default()).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn series_have_no_constant_term_and_known_leading_terms() {
    let s = machine().series();
    assert_eq!(s.g[0], q(0, 1));
    assert_eq!(s.h[0], q(0, 1));
    assert_eq!(s.g[1], q(-2, 1));
    // g(u) = 1 - e^{2u}: oracle from the exponential series
    let mut f = q(1, 1);
    for j in 1..s.g.len() {
        f *= q(2, j as i64);
        assert_eq!(s.g[j], -f.clone(), "g_{j}");
    }
}

#[test]
fn c_two_ways_and_k() {
    let s = machine().series();
    assert_eq!(s.c, q(-1, 2));
    assert_eq!(s.c, s.c_from_curve);
    assert_eq!(s.k, q(2, 1));
    let m = machine();
    assert_eq!(m.r(), m.c());
    assert_eq!(m.s(), -m.k());
}

#[test]
fn operational_k_matches_symbolic() {
    let f = machine().fit_k();
    assert!((f.k - f.symbolic).norm() < 1e-6, "{f:?}");
}

#[test]
fn curve_order_is_checked() {
    let jet = germ_of_chain(&MapChain::standard(), 9).unwrap();
    let curve = solve_curve(&jet, 8, 0.05).unwrap();
    assert!(matches!(extract_series(&jet, &curve, 7), Err(FatouError::CurveOrderTooLow { .. })));
    assert!(extract_series(&jet, &curve, 6).is_ok());
    let long = germ_of_chain(&MapChain::standard(), 11).unwrap();
    assert!(matches!(extract_series(&long, &curve, 6), Err(FatouError::CurveOrderTooLow { .. })));
}

#[test]
fn chart_values_and_poles() {
    let m = machine();
    let (x, y) = m.to_xy((c(-1e-2, 0.0), c(-1e-1, 0.0))).unwrap();
    assert!((x - c(-100.0, 0.0)).norm() < 1e-12);
    // γ(-1e-2) ≈ γ_3 z^3 + γ_4 z^4 = 1e-6/9 - (95/192) 1e-8
    let oracle = 1.0 / (-0.1 - (1e-6 / 9.0 - 95.0 / 192.0 * 1e-8));
    assert!((y.re - oracle).abs() < 1e-8 && y.im == 0.0);
    let p = (c(-0.02, 0.01), c(-0.03, 0.004));
    let back = m.from_xy(m.to_xy(p).unwrap());
    assert!((back.0 - p.0).norm() < 1e-12 * p.0.norm() && (back.1 - p.1).norm() < 1e-12 * p.1.norm());
    let z = c(-0.01, 0.002);
    assert_eq!(m.to_xy((z, m.curve().gamma_unchecked(z))), Err(FatouError::CurvePole));
    assert_eq!(m.to_xy((c(0.0, 0.0), c(0.1, 0.0))), Err(FatouError::AxisPole));
}

#[test]
fn beta_properties() {
    let m = machine();
    let r = m.params().r;
    let y = c(-1e5, 0.0);
    assert!(((y * m.beta_at(y).unwrap()).re + 2.0).abs() < 0.1);
    let y = c(-3.0 * r, 0.0);
    let b = m.beta().integrate(y).unwrap();
    assert!(m.beta().residual(y, b, m.beta().series_derivative(y)).norm() < 1e-10);
    let y = Complex64::from_polar(700.0, std::f64::consts::PI - 0.3);
    let straight = m.beta().integrate(y).unwrap();
    let bent = m.beta().integrate_via(y, &[c(y.re, 0.3 * y.im)]).unwrap();
    assert!((straight - bent).norm() < 1e-9);
    for y in crate::regions::boundary_samples(r * 1.0001, 32) {
        assert!((y * m.beta_at(y).unwrap()).norm() <= 4.0);
    }
    for n in m.beta().nodes() {
        let y = c(n.y, 0.0);
        let d = m.beta().series_derivative(y);
        assert!(m.beta().residual(y, n.beta, d).norm() < 1e-10, "node {}", n.y);
    }
}

#[test]
fn telescoping_is_exact() {
    let m = machine();
    let p = m.from_xy((c(-300.0, 20.0), c(-200.0, -10.0)));
    let a = m.mu_sequence(p, 2000).unwrap();
    let b = m.mu_sequence(m.chain().eval_forward(p), 1999).unwrap();
    for n in 0..1999 {
        assert!((b[n] - a[n + 1] + 1.0).norm() < 1e-10, "n = {n}");
    }
    let direct = m.mu(c(-300.0, 20.0), c(-200.0, -10.0), 50).unwrap();
    assert!((direct - a[50]).norm() < 1e-9);
}

#[test]
fn increments_decay_faster_than_one_over_n() {
    let m = machine();
    let p = m.from_xy((c(-200.0, 0.0), c(-150.0, 0.0)));
    assert!(m.increment_slope(p, 100, 100_000) <= -1.3);
}

#[test]
fn eta_shrinks_along_the_axis() {
    let m = machine();
    let y = c(-150.0, 0.0);
    let near = m.eta(c(-1e2, 0.0), y).unwrap().norm();
    let far = m.eta(c(-1e4, 0.0), y).unwrap().norm();
    assert!(far < near, "{far} vs {near}");
}

#[test]
fn psi_semiconjugacy_and_extension() {
    let m = machine();
    let p = (c(-2e-3, 1e-4), c(-4e-3, -2e-4));
    let a = m.psi(p).unwrap();
    let fp = m.chain().eval_forward(p);
    let b = m.psi(fp).unwrap();
    assert!((b.value - a.value + 1.0).norm() < 1e-10);
    assert_eq!(b.n + 1, a.n);
    // extension through a later iterate
    let mut q = p;
    for _ in 0..37 {
        q = m.chain().eval_forward(q);
    }
    assert!((m.psi(q).unwrap().value + 37.0 - a.value).norm() < 1e-10);
    assert!(a.err_est > 0.0 && a.err_est < 0.1);
}

#[test]
fn axis_points_are_not_in_the_basin() {
    assert_eq!(machine().psi((c(0.0, 0.0), c(-0.01, 0.0))), Err(FatouError::AxisPole));
}

#[test]
fn theta_translates_and_separates() {
    let m = machine();
    let p = (c(-4e-3, 1e-4), c(-5e-3, 1e-4));
    assert!(in_d(p, m.params(), m.curve()));
    let (t, y) = m.theta(p).unwrap();
    let fp = m.chain().eval_forward(p);
    let (t1, _) = m.theta(fp).unwrap();
    assert!((t1 - t + 1.0).norm() < 1e-10);
    assert!((y - m.to_xy(p).unwrap().1).norm() < 1e-12);
    let p2 = (p.0 + 2e-3 * 1e-3, p.1);
    let (t2, _) = m.theta(p2).unwrap();
    assert!((t2 - t).norm() > 1e-9);
    assert_eq!(m.theta((c(0.01, 0.0), c(-0.02, 0.0))), Err(FatouError::OutsideDomain));
}

#[test]
fn margin_and_certification_with_series() {
    let m = machine();
    let margin = m.injectivity_margin().unwrap();
    assert!(margin.pass, "{margin:?}");
    let rep = certify_params(m.params().eps, m.params().r, Some(m));
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.checks.len(), 5);
}

#[test]
fn json_and_csv() {
    let m = machine();
    let v = m.to_json_value();
    assert_eq!(v["c"], "-1/2");
    assert_eq!(v["k"], "2");
    assert_eq!(v["s"], "-2");
    assert_eq!(v["g"][0][1], "-2");
    assert!(v["beta"]["nodes"].as_array().unwrap().len() > 10);
    let csv = m.psi_csv(&[(c(-2e-3, 0.0), c(-4e-3, 0.0)), (c(0.0, 0.0), c(0.1, 0.0))]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "re_z,im_z,re_w,im_w,re_psi,im_psi,err_est");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].contains("NaN"));
}
