//! The consolidated invariant suite behind `verify`.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::asymptotics::asymptotics;
use super::classify::{Classifier, Verdict};
use super::raster::{raster, Slice};
use super::AnalysisError;
use crate::curve::{sector_grid, CurveFatou};
use crate::fatou::{FatouMachine, MachineConfig, TruncPolicy};
use crate::fibers::Fibers;
use crate::fit::loglog_slope;
use crate::jets::{characteristic_directions, director};
use crate::mapchain::{MapChain, Point, Precision};
use crate::regions::{certify_params, in_d, Check, RegionParams, APERTURE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub order: usize,
    pub budget: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let m = MachineConfig::default();
        VerifyConfig { eps: m.params.eps, r: m.params.r, order: m.curve_order, budget: 1000, tol: m.policy.tol, seed: 7 }
    }
}

impl VerifyConfig {
    pub fn machine_config(&self) -> Result<MachineConfig, AnalysisError> {
        let params = RegionParams::new(self.eps, self.r)?;
        let d = MachineConfig::default();
        Ok(MachineConfig { params, curve_order: self.order, series_order: d.series_order.min(self.order - 2), policy: TruncPolicy { tol: self.tol, ..d.policy } })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Suite {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub pass: bool,
    pub suites: Vec<Suite>,
}

struct Builder {
    name: &'static str,
    checks: Vec<Check>,
}

impl Builder {
    fn new(name: &'static str) -> Self {
        Builder { name, checks: Vec::new() }
    }

    /// `lhs < rhs`.
    fn below(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.push(name, lhs, rhs, lhs < rhs);
    }

    fn push(&mut self, name: &str, lhs: f64, rhs: f64, pass: bool) {
        self.checks.push(Check { name: name.to_string(), lhs, rhs, pass });
    }

    fn flag(&mut self, name: &str, pass: bool) {
        self.push(name, pass as u8 as f64, 1.0, pass);
    }

    fn done(self) -> Suite {
        Suite { name: self.name.to_string(), pass: self.checks.iter().all(|c| c.pass), checks: self.checks }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Uniform samples of the invariant domain `D`.
pub fn sample_domain(params: &RegionParams, m: &FatouMachine, count: usize, rng: &mut impl Rng) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = -Complex64::from_polar(params.eps * rng.gen::<f64>(), APERTURE * (2.0 * rng.gen::<f64>() - 1.0));
        let u = -Complex64::from_polar(params.eps * rng.gen::<f64>(), APERTURE * (2.0 * rng.gen::<f64>() - 1.0));
        let p = (z, u + m.curve().gamma_unchecked(z));
        if in_d(p, params, m.curve()) {
            out.push(p);
        }
    }
    out
}

fn germ(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("germ");
    let j = m.jet();
    let (f, s) = (&j.first, &j.second);
    b.flag("first: z^2 = 1", f.coeff(2, 0) == q(1, 1));
    b.flag("second: z w^2 = -1", s.coeff(1, 2) == q(-1, 1));
    b.flag("second: z^4 = -1/3", s.coeff(4, 0) == q(-1, 3));
    b.flag("second: z^3 w = 8/3", s.coeff(3, 1) == q(8, 3));
    b.flag("DF(0) = Id", j.is_tangent_to_identity());
    b.done()
}

fn axis(chain: &MapChain, rng: &mut ChaCha8Rng) -> Suite {
    let mut b = Builder::new("axis");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let w = Complex64::from_polar(10.0 * rng.gen::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.gen::<f64>());
        let (z1, w1) = chain.eval_forward((Complex64::new(0.0, 0.0), w));
        worst = worst.max(z1.norm().max((w1 - w).norm()) / w.norm());
    }
    b.below("max |F(0,w) - (0,w)| / |w|", worst, 1e-14);
    let mut rt: f64 = 0.0;
    for _ in 0..10_000 {
        let mut d = || Complex64::from_polar(rng.gen::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.gen::<f64>());
        let p = (d(), d());
        let r = chain.round_trip(p);
        rt = rt.max((r.0 - p.0).norm().max((r.1 - p.1).norm()));
    }
    b.below("max round trip error on the unit bidisk", rt, 1e-12);
    b.done()
}

fn directions(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("directions");
    match characteristic_directions(m.jet()) {
        Ok(dirs) => {
            let hor = dirs.iter().find(|d| !d.at_infinity() && d.direction[1].norm() == 0.0);
            let ver = dirs.iter().find(|d| d.at_infinity());
            b.flag("two directions", dirs.len() == 2);
            b.flag("[1:0] non-degenerate with lambda 1", hor.is_some_and(|d| !d.degenerate && d.lambda == Complex64::new(1.0, 0.0)));
            b.flag("[0:1] degenerate", ver.is_some_and(|d| d.degenerate && d.lambda.norm() == 0.0));
            let a = hor.and_then(|d| director(m.jet(), d).ok()).and_then(|d| d.exact);
            b.flag("director((1,0)) = -1", a == Some(q(-1, 1)));
        }
        Err(_) => b.flag("characteristic directions", false),
    }
    b.done()
}

fn curve(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("curve");
    let c = m.curve();
    b.flag("gamma_1 = gamma_2 = 0", c.exact_coefficient(1) == Some(q(0, 1)) && c.exact_coefficient(2) == Some(q(0, 1)));
    b.flag("gamma_3 = -1/9", c.exact_coefficient(3) == Some(q(-1, 9)));
    let zs: Vec<f64> = (0..5).map(|k| 1e-4 * 10f64.powf(k as f64 / 2.0)).collect();
    let rs: Vec<f64> = zs.iter().map(|&z| c.invariance_residual_real(m.chain(), -z, 320)).collect();
    b.push("invariance residual log-log slope", loglog_slope(&zs, &rs), 8.5, loglog_slope(&zs, &rs) >= 8.5);
    let sup = sector_grid(c.eps(), 12, 15).iter().map(|&z| c.gamma_unchecked(z).norm() / z.norm().powi(3)).fold(0.0, f64::max);
    b.push("sup |gamma(z)|/|z|^3 on V_eps", sup, f64::INFINITY, sup.is_finite());
    b.done()
}

fn domain(m: &FatouMachine, rng: &mut ChaCha8Rng) -> Suite {
    let mut b = Builder::new("domain");
    let p = m.params();
    let rep = certify_params(p.eps, p.r, Some(m));
    for c in rep.checks {
        b.push(&c.name, c.lhs, c.rhs, c.pass);
    }
    let pts = sample_domain(p, m, 10_000, rng);
    let bad = pts.iter().filter(|&&q| !in_d(m.chain().eval_forward(q), p, m.curve())).count();
    b.push("violations of F(D) in D over 10^4 samples", bad as f64, 0.0, bad == 0);
    b.done()
}

fn orbit_asymptotics(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("asymptotics");
    let seed = (Complex64::new(-1e-3, 0.0), Complex64::new(-1e-2, 0.0));
    let tr = m.chain().orbit(seed, 1_000_000, Some(m.curve()), Precision::Binary64);
    match asymptotics(&tr, &[10_000, 100_000, 1_000_000]) {
        Ok(r) => {
            b.below("|a_z + 1| for n z_n", (r.a_z() + 1.0).norm(), 0.1);
            b.below("|a_u + 1| for log(n) u_n", (r.a_u() + 1.0).norm(), 0.15);
            b.flag("|n z_n + 1| decreasing", r.z_error_decreasing);
        }
        Err(_) => b.flag("orbit long enough", false),
    }
    b.done()
}

fn fatou(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("fatou");
    let s = m.series();
    b.flag("c = 1 - c_3 exactly", s.c == s.c_from_curve);
    b.flag("k = A + 2 c g_1", s.k == &s.a_zu + q(2, 1) * &s.c * &s.g[1]);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let p = m.from_xy((Complex64::new(-300.0 - 40.0 * k as f64, 5.0 * k as f64), Complex64::new(-150.0 - 5.0 * k as f64, -2.0 * k as f64)));
        let (Ok(a), Ok(c)) = (m.mu_sequence(p, 2000), m.mu_sequence(m.chain().eval_forward(p), 1999)) else {
            b.flag("telescoping sequences exist", false);
            continue;
        };
        worst = (0..1999).map(|n| (c[n] - a[n + 1] + 1.0).norm()).fold(worst, f64::max);
    }
    b.below("telescoping |mu_n(F p) - mu_{n+1}(p) + 1|", worst, 1e-10);
    let seed = m.from_xy((Complex64::new(-200.0, 0.0), Complex64::new(-150.0, 0.0)));
    let slope = m.increment_slope(seed, 100, 100_000);
    b.below("increment log-log slope", slope, -1.3);
    let y = Complex64::new(-3.0 * m.params().r, 0.0);
    let res = m.beta().integrate(y).map(|v| m.beta().residual(y, v, m.beta().series_derivative(y)).norm()).unwrap_or(f64::INFINITY);
    b.below("beta ODE residual", res, 1e-10);
    let y = Complex64::new(-1e5, 0.0);
    let yb = m.beta_at(y).map(|v| (y * v).re).unwrap_or(f64::NAN);
    b.below("|y beta(y) + 2| / 2 at y = -1e5", (yb + 2.0).abs() / 2.0, 0.05);
    b.done()
}

fn fibers(m: &FatouMachine) -> Suite {
    let mut b = Builder::new("fibers");
    let mut f = Fibers::new(m);
    f.policy.tol = 1e-7;
    let mut inv: f64 = 0.0;
    let mut glob: f64 = 0.0;
    let mut images = Vec::new();
    for k in 0..12 {
        let p = m.from_xy((-Complex64::from_polar(400.0 + 150.0 * k as f64, 0.02 * k as f64 - 0.1), -Complex64::from_polar(130.0 + 10.0 * k as f64, 0.1 - 0.015 * k as f64)));
        let fp = m.chain().eval_forward(p);
        match (f.upsilon(p), f.global_map(fp)) {
            (Ok(a), Ok((t1, u1))) => {
                inv = inv.max((u1 - a.upsilon).norm());
                glob = glob.max((t1 - a.t + 1.0).norm().max((u1 - a.upsilon).norm()));
                images.push((p, (a.t, a.upsilon)));
            }
            _ => b.flag("fiber coordinate defined", false),
        }
    }
    b.below("|Y(F p) - Y(p)|", inv, 1e-9);
    b.below("|G(F p) - (psi(p) - 1, Y(p))|", glob, 1e-9);
    let mut min_sep = f64::INFINITY;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            let (p, a) = images[i];
            let (q, c) = images[j];
            if (p.0 - q.0).norm().max((p.1 - q.1).norm()) > 1e-6 {
                min_sep = min_sep.min((a.0 - c.0).norm().max((a.1 - c.1).norm()));
            }
        }
    }
    b.push("min image separation of distinct samples", min_sep, 1e-9, min_sep > 1e-9);
    let w = f.weight();
    b.flag("summable weight on log y is 4/3", (w.re - 4.0 / 3.0).abs() < 1e-15 && w.im == 0.0);
    b.done()
}

fn boundary(m: &FatouMachine, cl: &Classifier<'_>) -> Suite {
    let mut b = Builder::new("boundary");
    let c = m.curve();
    let zs: Vec<Complex64> = (0..20).map(|k| -Complex64::from_polar(2e-3 + 1e-3 * k as f64, 0.3 * (k as f64 / 19.0 - 0.5))).collect();
    let mut curve_entered = 0;
    let mut shifted_missed = 0;
    for &z in &zs {
        let g = c.gamma_unchecked(z);
        if cl.classify((z, g), 10_000).verdict == Verdict::Basin {
            curve_entered += 1;
        }
        if cl.classify((z, g - 1e-3), 10_000).verdict != Verdict::Basin {
            shifted_missed += 1;
        }
    }
    b.push("curve points entering D' within 10^4 iterates", curve_entered as f64, 0.0, curve_entered == 0);
    b.push("shifted points not entering D'", shifted_missed as f64, 0.0, shifted_missed == 0);
    let axis_ok = [0.2, -0.01, 3.0, -7.5].iter().all(|&w| cl.classify((Complex64::new(0.0, 0.0), Complex64::new(w, 0.1)), 10_000).verdict == Verdict::Axis);
    b.flag("axis points classify as axis", axis_ok);
    match CurveFatou::new(m.jet(), c, m.chain()) {
        Ok(cf) => {
            let mut worst: f64 = 0.0;
            for &z in zs.iter().step_by(4) {
                let p = (z, c.gamma_unchecked(z));
                let r = cf.phi(m.chain().eval_forward(p), 1e-10, 10).and_then(|a| Ok(a - cf.phi(p, 1e-10, 10)? - 1.0));
                worst = worst.max(r.map(|d| d.norm()).unwrap_or(f64::INFINITY));
            }
            b.below("|Phi(F p) - Phi(p) - 1| on the curve", worst, 1e-6);
        }
        Err(_) => b.flag("curve Fatou coordinate", false),
    }
    b.done()
}

fn rasters(cl: &Classifier<'_>, budget: usize) -> Suite {
    let mut b = Builder::new("raster");
    let slice = Slice::standard();
    match (raster(cl, slice, 48, 48, budget), raster(cl, slice, 48, 48, budget)) {
        (Ok(a), Ok(c)) => {
            b.flag("byte-identical reruns", a.to_pgm() == c.to_pgm());
            b.flag("conjugation symmetry", a.symmetric_in_t());
            b.flag("basin cells present", a.count(Verdict::Basin) > 0);
        }
        _ => b.flag("raster", false),
    }
    b.done()
}

/// Run every suite.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport, AnalysisError> {
    let m = FatouMachine::build(&MapChain::standard(), &cfg.machine_config()?)?;
    let cl = Classifier::new(&m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let suites = vec![
        germ(&m),
        axis(m.chain(), &mut rng),
        directions(&m),
        curve(&m),
        domain(&m, &mut rng),
        orbit_asymptotics(&m),
        fatou(&m),
        fibers(&m),
        boundary(&m, &cl),
        rasters(&cl, cfg.budget),
    ];
    Ok(VerifyReport { config: *cfg, pass: suites.iter().all(|s| s.pass), suites })
}
