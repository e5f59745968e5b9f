use std::f64::consts::SQRT_2;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use super::{CliError, Command, Method, RunConfig, EXIT_OK};
use crate::classical::{analytic_trajectory, integrate_eom, reparametrized_time, PhasePoint};
use crate::evolution::{find_revival_peaks, scan_probe, CoherentProbe, EnergyConvention};
use crate::fock::{
    expectations, identity_resolution_check, position_wavefunction, truncation_rule, write_wavefunction_csv,
    CoherentLabel,
};
use crate::nogo::{self, er_impossibility_scan, family_existence_check, impossibility_scan};
use crate::{table, uniform_grid, Error, HamiltonianFunction};

const EVOLVE_HEADER: [&str; 8] = [
    "t", "autocorr", "mean_x", "mean_p", "var_x", "var_p", "mean_h0", "var_h0",
];

/// Result of a successful run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// One-line human summary.
    pub summary: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, io::Error::from(e.kind())))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        body(&mut w).map_err(|e| CliError::io(path, e))?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// CSV to `--out`, or to `stdout` when no path is given.
fn emit_csv<F>(out: Option<&Path>, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => write_atomic(path, body),
        None => body(stdout).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn json_text(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("json values always serialize");
    text.push('\n');
    text
}

fn emit_json(path: Option<&Path>, stdout: Option<&mut dyn Write>, report: &Value) -> Result<(), CliError> {
    let text = json_text(report);
    match (path, stdout) {
        (Some(path), _) => write_atomic(path, |w| w.write_all(text.as_bytes())),
        (None, Some(out)) => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        (None, None) => Ok(()),
    }
}

/// Parameters shared by the commands, validated up front.
struct Resolved<'a> {
    cfg: &'a RunConfig,
    command: Command,
}

impl<'a> Resolved<'a> {
    fn function(&self, default: Option<&str>) -> Result<HamiltonianFunction, CliError> {
        let spec = self
            .cfg
            .f
            .as_deref()
            .or(default)
            .ok_or_else(|| invalid(format!("{} needs --f", self.command)))?;
        Ok(HamiltonianFunction::resolve(spec)?)
    }

    fn f_spec(&self, default: &str) -> String {
        self.cfg.f.clone().unwrap_or_else(|| default.to_string())
    }

    fn label(&self) -> Result<CoherentLabel, CliError> {
        match (self.cfg.alpha, self.cfg.z0) {
            (Some(_), Some(_)) => Err(invalid("give either --alpha or --z0, not both")),
            (Some(a), None) => Ok(CoherentLabel::new(a.0)),
            (None, Some(z)) => Ok(CoherentLabel::from_phase_point(PhasePoint(z.0))),
            (None, None) => Err(invalid(format!("{} needs --alpha or --z0", self.command))),
        }
    }

    fn phase_point(&self) -> Result<PhasePoint, CliError> {
        match (self.cfg.alpha, self.cfg.z0) {
            (Some(_), Some(_)) => Err(invalid("give either --alpha or --z0, not both")),
            (Some(a), None) => Ok(PhasePoint(a.0 * SQRT_2)),
            (None, Some(z)) => Ok(PhasePoint(z.0)),
            (None, None) => Err(invalid(format!("{} needs --z0 or --alpha", self.command))),
        }
    }

    fn tmax(&self) -> Result<f64, CliError> {
        let t = self
            .cfg
            .tmax
            .ok_or_else(|| invalid(format!("{} needs --tmax", self.command)))?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("--tmax must be non-negative, got {t}")));
        }
        Ok(t)
    }

    fn dt(&self, default: f64) -> Result<f64, CliError> {
        let dt = self.cfg.dt.unwrap_or(default);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("--dt must be positive, got {dt}")));
        }
        Ok(dt)
    }

    fn positive(&self, name: &str, value: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = value.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("--{name} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn convention(&self) -> EnergyConvention {
        self.cfg.energy_convention.unwrap_or_default()
    }

    /// Truncation for a quantum run: the rule unless overridden; overrides
    /// below the rule need `--force-nmax`.
    fn truncation(&self, label: CoherentLabel) -> Result<usize, CliError> {
        let required = label.default_nmax();
        match self.cfg.nmax {
            None => Ok(required),
            Some(n) if n >= required || self.cfg.force_nmax => Ok(n),
            Some(n) => Err(Error::Truncation {
                given: n,
                required,
                abs_alpha: label.alpha.norm(),
            }
            .into()),
        }
    }

    fn threshold(&self) -> Result<f64, CliError> {
        self.positive("threshold", self.cfg.threshold, 0.999)
    }

    fn paths(&self) -> Value {
        let show = |p: &Option<std::path::PathBuf>| p.as_ref().map(|p| p.display().to_string());
        json!({
            "out": show(&self.cfg.out),
            "json": show(&self.cfg.json),
        })
    }
}

fn truncation_json(probe: &CoherentProbe, label: CoherentLabel) -> Value {
    let nmax = probe.initial().nmax();
    let rule = truncation_rule(label.alpha.norm());
    json!({
        "nmax": nmax,
        "rule_nmax": rule,
        "below_rule": nmax < rule,
        "tail_bound": probe.initial().tail_bound(),
    })
}

fn truncation_warning(probe: &CoherentProbe, label: CoherentLabel) -> String {
    if probe.initial().nmax() < label.default_nmax() {
        format!(
            " WARNING: nmax {} below truncation rule, tail_bound = {:e}",
            probe.initial().nmax(),
            probe.initial().tail_bound()
        )
    } else {
        String::new()
    }
}

/// Runs the experiment named by `cfg.command`. CSV and JSON artifacts go to
/// their paths; anything without a path goes to `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let command = cfg
        .command
        .ok_or_else(|| invalid("no command given (on the command line or in the config file)"))?;
    let r = Resolved { cfg, command };
    let summary = match command {
        Command::Evolve => run_evolve(&r, stdout)?,
        Command::Classical => run_classical(&r, stdout)?,
        Command::Dephase => run_scan(&r, stdout, true)?,
        Command::Revival => run_scan(&r, stdout, false)?,
        Command::Nogo => run_nogo(&r, stdout)?,
        Command::IdentityCheck => run_identity(&r, stdout)?,
        Command::Wavefunction => run_wavefunction(&r, stdout)?,
    };
    Ok(Outcome {
        exit_code: EXIT_OK,
        summary,
    })
}

fn run_evolve(r: &Resolved, stdout: &mut dyn Write) -> Result<String, CliError> {
    let f = r.function(None)?;
    let label = r.label()?;
    let (tmax, dt) = (r.tmax()?, r.dt(0.01)?);
    let convention = r.convention();
    let probe = CoherentProbe::with_nmax(label, &f, convention, r.truncation(label)?)?;
    let times = uniform_grid(tmax, dt)?;
    let rows: Vec<[f64; 8]> = times
        .iter()
        .map(|&t| {
            let state = probe.state_at(t);
            let obs = expectations(&state);
            let auto = probe.initial().inner(&state).norm();
            [
                t,
                auto,
                obs.mean_x,
                obs.mean_p,
                obs.var_x,
                obs.var_p,
                obs.mean_h0,
                obs.var_h0,
            ]
        })
        .collect();
    emit_csv(r.cfg.out.as_deref(), stdout, |w| {
        table::write_csv(w, &EVOLVE_HEADER, &rows)
    })?;
    let last = rows.last().expect("grid is never empty");
    let min_auto = rows.iter().map(|row| row[1]).fold(f64::INFINITY, f64::min);
    let report = json!({
        "command": "evolve",
        "config": {
            "f": r.f_spec(""),
            "f_name": f.name(),
            "alpha": complex_json(label.alpha),
            "tmax": tmax,
            "dt": dt,
            "energy_convention": convention.as_str(),
            "truncation": truncation_json(&probe, label),
            "paths": r.paths(),
        },
        "samples": rows.len(),
        "final": {
            "t": last[0],
            "autocorr": last[1],
            "mean_x": last[2],
            "mean_p": last[3],
            "var_x": last[4],
            "var_p": last[5],
            "mean_h0": last[6],
            "var_h0": last[7],
        },
        "min_autocorr": min_auto,
    });
    emit_json(r.cfg.json.as_deref(), None, &report)?;
    Ok(format!(
        "evolve: f={} alpha={} samples={} final autocorr={:.12}{}",
        f.name(),
        label.alpha,
        rows.len(),
        last[1],
        truncation_warning(&probe, label)
    ))
}

fn run_classical(r: &Resolved, stdout: &mut dyn Write) -> Result<String, CliError> {
    let f = r.function(None)?;
    let z0 = r.phase_point()?;
    let (tmax, dt) = (r.tmax()?, r.dt(1e-3)?);
    let method = r.cfg.method.unwrap_or_default();
    let analytic = analytic_trajectory(&f, z0, tmax, dt)?;
    let rk4 = integrate_eom(&f, z0, tmax, dt)?;
    let chosen = match method {
        Method::Analytic => &analytic,
        Method::Rk4 => &rk4,
    };
    emit_csv(r.cfg.out.as_deref(), stdout, |w| chosen.write_csv(w))?;
    let deviation = (analytic.last().z() - rk4.last().z()).norm();
    let report = json!({
        "command": "classical",
        "config": {
            "f": r.f_spec(""),
            "f_name": f.name(),
            "z0": complex_json(z0.z()),
            "tmax": tmax,
            "dt": dt,
            "method": match method { Method::Analytic => "analytic", Method::Rk4 => "rk4" },
            "paths": r.paths(),
        },
        "h0": z0.energy(),
        "frequency": f.deriv(z0.energy()).map_err(Error::from)?,
        "reparametrized_time": reparametrized_time(&f, z0, tmax)?,
        "final_analytic": complex_json(analytic.last().z()),
        "final_rk4": complex_json(rk4.last().z()),
        "final_deviation": deviation,
        "rk4_radius_drift": rk4.radius_drift(),
    });
    emit_json(r.cfg.json.as_deref(), None, &report)?;
    Ok(format!(
        "classical: f={} z0={} samples={} |analytic - rk4| = {:e}, rk4 radius drift = {:e}",
        f.name(),
        z0.z(),
        chosen.samples.len(),
        deviation,
        rk4.radius_drift()
    ))
}

fn run_scan(r: &Resolved, stdout: &mut dyn Write, csv_default: bool) -> Result<String, CliError> {
    let f = r.function(None)?;
    let label = r.label()?;
    let (tmax, dt) = (r.tmax()?, r.dt(0.01)?);
    let threshold = r.threshold()?;
    let convention = r.convention();
    let probe = CoherentProbe::with_nmax(label, &f, convention, r.truncation(label)?)?;
    let series = scan_probe(&probe, tmax, dt)?;
    let peaks = find_revival_peaks(&series, threshold);
    let (t_at_max, max_defect) = series.max_defect();

    let mut stdout = Some(stdout);
    if csv_default || r.cfg.out.is_some() {
        let out = stdout.take().expect("stdout available");
        emit_csv(r.cfg.out.as_deref(), out, |w| series.write_csv(w))?;
        if r.cfg.out.is_some() {
            stdout = Some(out);
        }
    }
    let name = r.command.as_str();
    let report = json!({
        "command": name,
        "config": {
            "f": r.f_spec(""),
            "f_name": f.name(),
            "alpha": complex_json(label.alpha),
            "tmax": tmax,
            "dt": dt,
            "threshold": threshold,
            "energy_convention": convention.as_str(),
            "truncation": truncation_json(&probe, label),
            "paths": r.paths(),
        },
        "samples": series.len(),
        "max_defect": max_defect,
        "t_max_defect": t_at_max,
        "final_defect": series.defect.last(),
        "min_autocorr": series.autocorrelation.iter().copied().fold(f64::INFINITY, f64::min),
        "max_ehrenfest_gap": series.ehrenfest_gap.iter().copied().fold(0.0, f64::max),
        "revivals": peaks,
    });
    // revival reports go to stdout when there is no --json
    let json_stdout = if r.command == Command::Revival { stdout } else { None };
    emit_json(r.cfg.json.as_deref(), json_stdout, &report)?;
    Ok(format!(
        "{name}: f={} alpha={} samples={} max defect={:.6e} at t={} revivals={}{}",
        f.name(),
        label.alpha,
        series.len(),
        max_defect,
        t_at_max,
        peaks.len(),
        truncation_warning(&probe, label)
    ))
}

fn run_nogo(r: &Resolved, stdout: &mut dyn Write) -> Result<String, CliError> {
    let f = r.function(None)?;
    let n_max = r.cfg.nmax.unwrap_or(nogo::DEFAULT_LEVELS);
    let k_max = r.cfg.kmax.unwrap_or(nogo::DEFAULT_WINDINGS);
    let radii = r.cfg.radii.clone().map_or_else(|| vec![0.5, 1.0, 2.0], |l| l.0);
    let tol = r.positive("tol", r.cfg.tol, nogo::DEFAULT_TOLERANCE)?;
    let floor = r.cfg.floor.unwrap_or(nogo::DEFAULT_FLOOR);
    if radii.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("--radii must be non-negative reals"));
    }
    let existence = family_existence_check(&f, n_max, &radii, tol)?;
    let scan = match f.as_builtin() {
        Some(crate::hamiltonian::Builtin::EinsteinRosen) => er_impossibility_scan(n_max, k_max, &radii, floor)?,
        _ => impossibility_scan(&f, n_max, k_max, &radii, floor)?,
    };
    if let Some(path) = r.cfg.dump_residuals.as_deref() {
        write_atomic(path, |w| scan.write_samples_csv(w))?;
    }
    let report = json!({
        "f": f.name(),
        "verdict": existence.verdict,
        "witness": existence.witness,
        "min_residual": scan.min_residual,
        "grid": {
            "n_max": n_max,
            "k_max": k_max,
            "radii": radii,
            "tol": tol,
            "floor": floor,
        },
        "existence": existence,
        "residuals": {
            "argmin": scan.argmin,
            "per_radius": scan.per_radius,
            "exceeds_floor": scan.exceeds_floor,
        },
        "config": {
            "command": "nogo",
            "f": r.f_spec(""),
            "dump_residuals": r.cfg.dump_residuals.as_ref().map(|p| p.display().to_string()),
            "paths": r.paths(),
        },
    });
    emit_json(r.cfg.json.as_deref(), Some(stdout), &report)?;
    Ok(format!(
        "nogo: f={} verdict={} min residual={:.6e} (floor {:e}, exceeded: {})",
        f.name(),
        match existence.verdict {
            nogo::Verdict::Pass => "pass",
            nogo::Verdict::Fail => "fail",
        },
        scan.min_residual,
        floor,
        scan.exceeds_floor
    ))
}

fn run_identity(r: &Resolved, stdout: &mut dyn Write) -> Result<String, CliError> {
    let nmax = r.cfg.nmax.unwrap_or(12);
    let radius = match (r.cfg.radius, r.cfg.r2) {
        (Some(_), Some(_)) => return Err(invalid("give either --radius or --r2, not both")),
        (Some(v), None) => r.positive("radius", Some(v), 1.0)?,
        (None, Some(v)) => r.positive("r2", Some(v), 1.0)?.sqrt(),
        (None, None) => 1.0,
    };
    let nr = r.cfg.nr.unwrap_or(400);
    let ntheta = r.cfg.ntheta.unwrap_or(256);
    let check = identity_resolution_check(nmax, radius, nr, ntheta)?;
    let report = check.report();
    let value = json!({
        "nmax": report.nmax,
        "R": report.radius,
        "max_offdiag": report.max_offdiag,
        "diag": report.diag,
        "config": {
            "command": "identity-check",
            "nmax": nmax,
            "R": radius,
            "nr": nr,
            "ntheta": ntheta,
            "paths": r.paths(),
        },
    });
    emit_json(r.cfg.json.as_deref(), Some(stdout), &value)?;
    Ok(format!(
        "identity-check: nmax={nmax} R={radius} M00={:.12} max offdiag={:e}",
        report.diag[0], report.max_offdiag
    ))
}

fn run_wavefunction(r: &Resolved, stdout: &mut dyn Write) -> Result<String, CliError> {
    let f = r.function(Some("id"))?;
    let label = r.label()?;
    let t = r.cfg.t.unwrap_or(0.0);
    if !t.is_finite() {
        return Err(invalid("--t must be finite"));
    }
    let xmin = r.cfg.xmin.unwrap_or(-8.0);
    let xmax = r.cfg.xmax.unwrap_or(8.0);
    let nx = r.cfg.nx.unwrap_or(801);
    if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) || nx < 2 {
        return Err(invalid("need finite --xmin < --xmax and --nx >= 2"));
    }
    let convention = r.convention();
    let probe = CoherentProbe::with_nmax(label, &f, convention, r.truncation(label)?)?;
    let state = probe.state_at(t);
    let dx = (xmax - xmin) / (nx - 1) as f64;
    let xs: Vec<f64> = (0..nx)
        .map(|k| if k + 1 == nx { xmax } else { xmin + dx * k as f64 })
        .collect();
    let psi = position_wavefunction(&state, &xs);
    emit_csv(r.cfg.out.as_deref(), stdout, |w| write_wavefunction_csv(w, &xs, &psi))?;
    let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
    let report = json!({
        "command": "wavefunction",
        "config": {
            "f": r.f_spec("id"),
            "f_name": f.name(),
            "alpha": complex_json(label.alpha),
            "t": t,
            "xmin": xmin,
            "xmax": xmax,
            "nx": nx,
            "truncation": truncation_json(&probe, label),
            "paths": r.paths(),
        },
        "grid_norm": norm,
    });
    emit_json(r.cfg.json.as_deref(), None, &report)?;
    Ok(format!(
        "wavefunction: f={} alpha={} t={t} points={nx} grid norm={norm:.9}{}",
        f.name(),
        label.alpha,
        truncation_warning(&probe, label)
    ))
}
