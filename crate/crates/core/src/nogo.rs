//! Single-valuedness test for would-be coherent-state families of `f(H0)`.
//!
//! Requiring `exp(-i t f(H0))|z>` to stay in the family along the classical
//! flow fixes the angular dependence of every component:
//! `psi_n(r, theta) = c_n(r^2) exp(i [f(E_n) theta + X(theta, r)] / f'(r^2/2))`
//! with `X` shared by all levels. Going once around (`theta -> theta + 2 pi`)
//! leaves all components single-valued only if
//! `(f(E_n) - f(E_m)) / f'(r^2/2)` is an integer for every pair of levels and
//! every radius. That ratio is what this module checks.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use serde::Serialize;

use crate::{table, Error, HamiltonianFunction, Result, SpectrumMap};

pub const DEFAULT_LEVELS: usize = 12;
pub const DEFAULT_WINDINGS: i64 = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_FLOOR: f64 = 1e-6;

fn frequency(f: &HamiltonianFunction, r: f64) -> Result<f64> {
    let w = f.deriv(r * r / 2.0)?;
    if w == 0.0 {
        return Err(Error::SingularFrequency { radius: r });
    }
    Ok(w)
}

/// `(f(E_n) - f(E_m)) / f'(r^2 / 2)`.
pub fn branch_ratio(f: &HamiltonianFunction, n: usize, m: usize, r: f64) -> Result<f64> {
    let w = frequency(f, r)?;
    if n == m {
        return Ok(0.0);
    }
    let diff = f.eval(SpectrumMap.energy(n))? - f.eval(SpectrumMap.energy(m))?;
    Ok(diff / w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Inclusive level range `[0, n_max]`.
    pub tested_levels: [usize; 2],
    pub tested_radii: Vec<f64>,
    pub tolerance: f64,
}

fn distance_to_integer(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Passes iff every branch ratio for `n < m <= n_max` and every radius is
/// within `tol` of an integer. The first violation in `(n, m, radius)`
/// order is the witness.
pub fn family_existence_check(
    f: &HamiltonianFunction,
    n_max: usize,
    radii: &[f64],
    tol: f64,
) -> Result<ExistenceReport> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("at least one radius is required".into()));
    }
    // reject degenerate radii before looking at any pair
    let freqs = radii.iter().map(|&r| frequency(f, r)).collect::<Result<Vec<_>>>()?;
    let fe = f.spectrum(n_max)?;
    let mut witness = None;
    'outer: for n in 0..n_max {
        for m in (n + 1)..=n_max {
            for (&r, &w) in radii.iter().zip(&freqs) {
                let ratio = (fe[n] - fe[m]) / w;
                if ratio.is_nan() || distance_to_integer(ratio) > tol {
                    witness = Some(Witness { n, m, r, ratio });
                    break 'outer;
                }
            }
        }
    }
    Ok(ExistenceReport {
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness,
        tested_levels: [0, n_max],
        tested_radii: radii.to_vec(),
        tolerance: tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualSample {
    pub n: usize,
    pub m: usize,
    pub k: i64,
    pub r: f64,
    /// Distance of the winding phase to the nearest multiple of `2 pi`.
    pub residual: f64,
}

/// Distance from `v` to `2 pi Z`, in `[0, pi]`.
pub fn distance_to_2pi_multiple(v: f64) -> f64 {
    let rem = v.rem_euclid(TAU);
    rem.min(TAU - rem).min(PI).abs()
}

/// `v = 4 pi k e^{r^2/4} (e^{-(n+1/2)/2} - e^{-(m+1/2)/2})` reduced mod `2 pi`,
/// for the Einstein-Rosen `f`. Meant for `n != m`, `k != 0`; otherwise
/// `v = 0`.
pub fn er_residual(n: usize, m: usize, k: i64, r: f64) -> ResidualSample {
    let en = SpectrumMap.energy(n);
    let em = SpectrumMap.energy(m);
    let v = 4.0 * PI * k as f64 * (r * r / 4.0).exp() * ((-en / 2.0).exp() - (-em / 2.0).exp());
    ResidualSample {
        n,
        m,
        k,
        r,
        residual: distance_to_2pi_multiple(v),
    }
}

/// Same winding condition for any `f`: `v = 2 pi k * branch_ratio`.
pub fn branch_residual(f: &HamiltonianFunction, n: usize, m: usize, k: i64, r: f64) -> Result<ResidualSample> {
    let v = TAU * k as f64 * branch_ratio(f, n, m, r)?;
    Ok(ResidualSample {
        n,
        m,
        k,
        r,
        residual: distance_to_2pi_multiple(v),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusMinimum {
    pub r: f64,
    pub min_residual: f64,
    pub argmin: ResidualSample,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImpossibilityReport {
    pub n_max: usize,
    pub k_max: i64,
    pub radii: Vec<f64>,
    pub floor: f64,
    pub min_residual: f64,
    pub argmin: ResidualSample,
    pub per_radius: Vec<RadiusMinimum>,
    /// `min_residual > floor`.
    pub exceeds_floor: bool,
    #[serde(skip)]
    pub samples: Vec<ResidualSample>,
}

impl ImpossibilityReport {
    /// CSV with header `n,m,k,r,residual`.
    pub fn write_samples_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,m,k,r,residual")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.n,
                s.m,
                s.k,
                table::fmt_f64(s.r),
                table::fmt_f64(s.residual)
            )?;
        }
        Ok(())
    }
}

fn residual_grid<F>(n_max: usize, k_max: i64, radii: &[f64], floor: f64, mut sample: F) -> Result<ImpossibilityReport>
where
    F: FnMut(usize, usize, i64, f64) -> Result<ResidualSample>,
{
    if n_max < 1 || k_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max and k_max must be at least 1 (got {n_max}, {k_max})"
        )));
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("at least one radius is required".into()));
    }
    let mut samples = Vec::new();
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: Option<ResidualSample> = None;
        for n in 0..n_max {
            for m in (n + 1)..=n_max {
                for k in 1..=k_max {
                    let s = sample(n, m, k, r)?;
                    if best.is_none_or(|b| s.residual < b.residual) {
                        best = Some(s);
                    }
                    samples.push(s);
                }
            }
        }
        let argmin = best.expect("non-empty grid");
        per_radius.push(RadiusMinimum {
            r,
            min_residual: argmin.residual,
            argmin,
        });
    }
    let argmin = per_radius
        .iter()
        .map(|p| p.argmin)
        .reduce(|a, b| if b.residual < a.residual { b } else { a })
        .expect("non-empty radii");
    Ok(ImpossibilityReport {
        n_max,
        k_max,
        radii: radii.to_vec(),
        floor,
        min_residual: argmin.residual,
        argmin,
        per_radius,
        exceeds_floor: argmin.residual > floor,
        samples,
    })
}

/// Minimum Einstein-Rosen winding residual over `0 <= n < m <= n_max`,
/// `1 <= k <= k_max` and the given radii.
pub fn er_impossibility_scan(n_max: usize, k_max: i64, radii: &[f64], floor: f64) -> Result<ImpossibilityReport> {
    residual_grid(n_max, k_max, radii, floor, |n, m, k, r| Ok(er_residual(n, m, k, r)))
}

/// Same scan for an arbitrary `f`, through [`branch_residual`].
pub fn impossibility_scan(
    f: &HamiltonianFunction,
    n_max: usize,
    k_max: i64,
    radii: &[f64],
    floor: f64,
) -> Result<ImpossibilityReport> {
    residual_grid(n_max, k_max, radii, floor, |n, m, k, r| branch_residual(f, n, m, k, r))
}
