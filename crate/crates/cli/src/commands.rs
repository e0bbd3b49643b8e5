use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fbdomain::analysis::{raster, verify, Classifier};
use fbdomain::curve::solve_curve;
use fbdomain::fatou::FatouMachine;
use fbdomain::fibers::Fibers;
use fbdomain::jets::germ_of_chain;
use fbdomain::mapchain::{MapChain, Point, Precision};
use fbdomain::regions::certify_params;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::parse_complex;
use crate::{CliError, Command, Config};

pub(crate) fn dispatch(cmd: &Command, cfg: &Config, stamp: bool) -> Result<(), CliError> {
    match cmd {
        Command::Verify { .. } => run_verify(cfg, stamp),
        Command::Jet => jet(cfg),
        Command::Orbit { z, w, steps, extended } => orbit(cfg, z, w, *steps, *extended),
        Command::Curve => curve(cfg, stamp),
        Command::Fatou { input } => fatou(cfg, input),
        Command::Basin { .. } => basin(cfg, stamp),
        Command::Certify => certify(cfg, stamp),
    }
}

fn emit(cfg: &Config, bytes: &[u8]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(cfg: &Config, mut v: Value, stamp: bool) -> Result<(), CliError> {
    v["run_config"] = serde_json::to_value(cfg).map_err(|e| CliError::Failed(e.to_string()))?;
    if stamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        v["stamp"] = json!(secs);
    }
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    emit(cfg, text.as_bytes())
}

fn machine(cfg: &Config) -> Result<FatouMachine, CliError> {
    FatouMachine::build(&MapChain::standard(), &cfg.machine()?).map_err(|e| CliError::Failed(e.to_string()))
}

fn run_verify(cfg: &Config, stamp: bool) -> Result<(), CliError> {
    let report = verify(&cfg.verify()).map_err(|e| CliError::Failed(e.to_string()))?;
    for s in &report.suites {
        eprintln!("{:<12} {}", s.name, if s.pass { "pass" } else { "FAIL" });
    }
    let v = serde_json::to_value(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    emit_json(cfg, v, stamp)?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect();
        Err(CliError::Failed(format!("verification failed: {}", failed.join(", "))))
    }
}

fn jet(cfg: &Config) -> Result<(), CliError> {
    let jet = germ_of_chain(&MapChain::standard(), cfg.jet_order).map_err(|e| CliError::Usage(e.to_string()))?;
    match &cfg.out {
        Some(path) => {
            let v = json!({"order": cfg.jet_order, "first": jet.first.to_json_value(), "second": jet.second.to_json_value()});
            std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&v).map_err(|e| CliError::Failed(e.to_string()))?))?;
        }
        None => {
            let mut text = String::new();
            for (name, comp) in [("first", &jet.first), ("second", &jet.second)] {
                for (i, j, c) in comp.terms() {
                    text.push_str(&format!("{name}[z^{i} w^{j}] = {c}\n"));
                }
            }
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn orbit(cfg: &Config, z: &str, w: &str, steps: usize, extended: bool) -> Result<(), CliError> {
    let seed = (parse_complex("z", z)?, parse_complex("w", w)?);
    let jet = germ_of_chain(&MapChain::standard(), cfg.jet_order + 1).map_err(|e| CliError::Usage(e.to_string()))?;
    let curve = solve_curve(&jet, cfg.jet_order, cfg.eps).map_err(|e| CliError::Failed(e.to_string()))?;
    let precision = if extended { Precision::Extended } else { Precision::Binary64 };
    let trace = MapChain::standard().orbit(seed, steps, Some(&curve), precision);
    if trace.truncated {
        eprintln!("orbit left the finite range after {} points", trace.len());
    }
    emit(cfg, trace.to_csv().as_bytes())
}

fn curve(cfg: &Config, stamp: bool) -> Result<(), CliError> {
    let jet = germ_of_chain(&MapChain::standard(), cfg.jet_order + 1).map_err(|e| CliError::Usage(e.to_string()))?;
    let curve = solve_curve(&jet, cfg.jet_order, cfg.eps).map_err(|e| CliError::Failed(e.to_string()))?;
    emit_json(cfg, json!({"curve": curve.to_json_value()}), stamp)
}

/// Rows `re_z,im_z,re_w,im_w`; a non-numeric first line is a header.
pub(crate) fn read_points(text: &str) -> Result<Vec<Point>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(f) if f.len() == 4 => out.push((Complex64::new(f[0], f[1]), Complex64::new(f[2], f[3]))),
            Err(_) if i == 0 => continue,
            _ => return Err(CliError::Usage(format!("input line {}: expected re_z,im_z,re_w,im_w", i + 1))),
        }
    }
    Ok(out)
}

fn fatou(cfg: &Config, input: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let points = read_points(&text)?;
    let m = machine(cfg)?;
    let fibers = Fibers::new(&m);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut out = String::from("re_z,im_z,re_w,im_w,re_psi,im_psi,psi_err,re_upsilon,im_upsilon,upsilon_err\n");
    for &p in &points {
        let (psi, pe) = m.psi(p).map(|l| (l.value, l.err_est)).unwrap_or((nan, f64::NAN));
        let (ups, ue) = fibers.upsilon(p).map(|f| (f.upsilon, f.err_est)).unwrap_or((nan, f64::NAN));
        out.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            p.0.re, p.0.im, p.1.re, p.1.im, psi.re, psi.im, pe, ups.re, ups.im, ue
        ));
    }
    emit(cfg, out.as_bytes())
}

pub(crate) fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn basin(cfg: &Config, stamp: bool) -> Result<(), CliError> {
    let out = cfg.out.as_ref().ok_or_else(|| CliError::Usage("basin needs --out <file.pgm>".into()))?;
    if cfg.width < 2 || cfg.height < 2 {
        return Err(CliError::Usage(format!("raster must be at least 2x2, got {}x{}", cfg.width, cfg.height)));
    }
    let m = machine(cfg)?;
    let cl = Classifier::new(&m).map_err(|e| CliError::Failed(e.to_string()))?;
    let r = raster(&cl, cfg.slice, cfg.width, cfg.height, cfg.budget).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::write(out, r.to_pgm())?;
    let mut side = r.sidecar();
    side["eta_bound"] = json!(cl.eta_bound());
    let side_cfg = Config { out: Some(sidecar_path(out)), ..cfg.clone() };
    emit_json(&side_cfg, side, stamp)
}

fn certify(cfg: &Config, stamp: bool) -> Result<(), CliError> {
    let mut report = certify_params(cfg.eps, cfg.r, None);
    // the series bounds need a machine, which needs certified parameters
    if report.passed() {
        let m = machine(cfg)?;
        report = certify_params(cfg.eps, cfg.r, Some(&m));
    }
    let passed = report.passed();
    let v = serde_json::to_value(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    emit_json(cfg, json!({"pass": passed, "certification": v}), stamp)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed("parameter certification failed".into()))
    }
}
