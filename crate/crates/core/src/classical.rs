//! Classical phase-space evolution under `H0` and `f(H0)`.
//!
//! With `z = x + i p`, the oscillator flow is a rigid rotation
//! `z(T) = z0 exp(-i T)`. Under `f(H0)` the same circle is traversed at the
//! conserved angular frequency `f'(H0)`, i.e. `T(t) = f'(H0) t`.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::{table, uniform_grid, Error, HamiltonianFunction, Result};

/// Classical state `z = x + i p` (m = k = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint(pub Complex64);

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        PhasePoint(Complex64::new(x, p))
    }

    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.re
    }

    pub fn p(self) -> f64 {
        self.0.im
    }

    /// `H0 = |z|^2 / 2`.
    pub fn energy(self) -> f64 {
        self.0.norm_sqr() / 2.0
    }
}

impl From<Complex64> for PhasePoint {
    fn from(z: Complex64) -> Self {
        PhasePoint(z)
    }
}

/// `z0 exp(-i T)`.
pub fn evolve_h0(z0: PhasePoint, t: f64) -> PhasePoint {
    PhasePoint(z0.0 * Complex64::from_polar(1.0, -t))
}

/// `T(t) = f'(H0) t` with `H0` the energy of `z0`.
pub fn reparametrized_time(f: &HamiltonianFunction, z0: PhasePoint, t: f64) -> Result<f64> {
    Ok(f.deriv(z0.energy())? * t)
}

/// `z0 exp(-i t f'(|z0|^2 / 2))`.
pub fn evolve_f(f: &HamiltonianFunction, z0: PhasePoint, t: f64) -> Result<PhasePoint> {
    Ok(evolve_h0(z0, reparametrized_time(f, z0, t)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub z: PhasePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalTrajectory {
    pub f_name: String,
    pub z0: PhasePoint,
    pub samples: Vec<TrajectorySample>,
}

impl ClassicalTrajectory {
    pub fn last(&self) -> PhasePoint {
        self.samples.last().map_or(self.z0, |s| s.z)
    }

    /// Largest deviation of `|z|` from `|z0|` over the samples.
    pub fn radius_drift(&self) -> f64 {
        let r0 = self.z0.0.norm();
        self.samples
            .iter()
            .map(|s| (s.z.0.norm() - r0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,x,p`.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        table::write_csv(
            w,
            &["t", "x", "p"],
            self.samples.iter().map(|s| [s.t, s.z.x(), s.z.p()]),
        )
    }
}

/// Closed-form trajectory sampled on the uniform grid of [`uniform_grid`].
pub fn analytic_trajectory(
    f: &HamiltonianFunction,
    z0: PhasePoint,
    t_max: f64,
    dt: f64,
) -> Result<ClassicalTrajectory> {
    let omega = f.deriv(z0.energy())?;
    let samples = uniform_grid(t_max, dt)?
        .into_iter()
        .map(|t| TrajectorySample {
            t,
            z: evolve_h0(z0, omega * t),
        })
        .collect();
    Ok(ClassicalTrajectory {
        f_name: f.name().to_string(),
        z0,
        samples,
    })
}

fn vector_field(f: &HamiltonianFunction, x: f64, p: f64) -> Result<(f64, f64)> {
    let w = f.deriv((x * x + p * p) / 2.0)?;
    Ok((w * p, -w * x))
}

/// Fixed-step RK4 integration of `dx/dt = f'(H0) p`, `dp/dt = -f'(H0) x`,
/// with `H0` recomputed from the current stage. Independent of the
/// closed-form path and used to check it.
pub fn integrate_eom(f: &HamiltonianFunction, z0: PhasePoint, t_max: f64, dt: f64) -> Result<ClassicalTrajectory> {
    let times = uniform_grid(t_max, dt)?;
    let mut samples = Vec::with_capacity(times.len());
    let (mut x, mut p) = (z0.x(), z0.p());
    samples.push(TrajectorySample { t: 0.0, z: z0 });
    for pair in times.windows(2) {
        let h = pair[1] - pair[0];
        let (k1x, k1p) = vector_field(f, x, p)?;
        let (k2x, k2p) = vector_field(f, x + 0.5 * h * k1x, p + 0.5 * h * k1p)?;
        let (k3x, k3p) = vector_field(f, x + 0.5 * h * k2x, p + 0.5 * h * k2p)?;
        let (k4x, k4p) = vector_field(f, x + h * k3x, p + h * k3p)?;
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !(x.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite { t: pair[1], x, p });
        }
        samples.push(TrajectorySample {
            t: pair[1],
            z: PhasePoint::new(x, p),
        });
    }
    Ok(ClassicalTrajectory {
        f_name: f.name().to_string(),
        z0,
        samples,
    })
}
