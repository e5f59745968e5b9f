//! Truncated Fock-space states of the oscillator, coherent states, ladder
//! operator expectations and position-space wave functions.
//!
//! A coherent state is labelled by the annihilation-operator eigenvalue
//! `alpha`. The matching classical phase point is `z = sqrt(2) alpha`, so
//! that `<X> = Re z` and `<P> = Im z`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::classical::PhasePoint;
use crate::quadrature::gauss_legendre_on;
use crate::{table, Error, Result, SpectrumMap};

/// Annihilation-operator eigenvalue labelling a coherent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentLabel {
    pub alpha: Complex64,
}

impl CoherentLabel {
    pub fn new(alpha: Complex64) -> Self {
        CoherentLabel { alpha }
    }

    pub fn real(alpha: f64) -> Self {
        Self::new(Complex64::new(alpha, 0.0))
    }

    /// `alpha = z / sqrt(2)`.
    pub fn from_phase_point(z: PhasePoint) -> Self {
        Self::new(z.z() / SQRT_2)
    }

    /// `z = sqrt(2) alpha`.
    pub fn phase_point(self) -> PhasePoint {
        PhasePoint(self.alpha * SQRT_2)
    }

    /// `<N> = |alpha|^2`, which is also the classical `H0` of the phase point.
    pub fn mean_occupation(self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Default truncation for this label, see [`truncation_rule`].
    pub fn default_nmax(self) -> usize {
        truncation_rule(self.alpha.norm())
    }
}

/// `nmax = ceil(|alpha|^2 + 10 |alpha| + 20)`. Keeps the discarded Poisson
/// tail below 1e-12 for `|alpha| <= 5`.
pub fn truncation_rule(abs_alpha: f64) -> usize {
    (abs_alpha * abs_alpha + 10.0 * abs_alpha + 20.0).ceil() as usize
}

/// Amplitudes `c_0 ..= c_nmax` over the oscillator eigenstates.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
    tail_bound: f64,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument(
                "a Fock state needs at least one amplitude".into(),
            ));
        }
        if tail_bound.is_nan() || tail_bound < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tail bound must be >= 0, got {tail_bound}"
            )));
        }
        Ok(FockState { amplitudes, tail_bound })
    }

    /// `|n>` in a space truncated at `nmax`.
    pub fn basis(n: usize, nmax: usize) -> Result<Self> {
        if n > nmax {
            return Err(Error::InvalidArgument(format!("level {n} exceeds nmax {nmax}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); nmax + 1];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(FockState {
            amplitudes,
            tail_bound: 0.0,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn nmax(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Upper bound on the probability discarded at construction.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Occupation probabilities `|c_n|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `<self|other>`; missing levels count as zero.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Same state with amplitudes replaced, tail bound kept.
    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> FockState {
        FockState {
            amplitudes,
            tail_bound: self.tail_bound,
        }
    }

    /// `a|psi>` inside the truncated space, `(a c)_n = sqrt(n+1) c_{n+1}`.
    pub fn annihilate(&self) -> Vec<Complex64> {
        let n = self.amplitudes.len();
        (0..n)
            .map(|k| {
                if k + 1 < n {
                    self.amplitudes[k + 1] * ((k + 1) as f64).sqrt()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// `X|psi>` and `P|psi>` in the space extended by one level, so no
    /// amplitude is dropped.
    fn quadratures(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = &self.amplitudes;
        let len = c.len() + 1;
        let at = |k: usize| c.get(k).copied().unwrap_or_default();
        let mut xv = Vec::with_capacity(len);
        let mut pv = Vec::with_capacity(len);
        for m in 0..len {
            // a c and a^dagger c at level m
            let down = at(m + 1) * ((m + 1) as f64).sqrt();
            let up = if m == 0 {
                Complex64::default()
            } else {
                at(m - 1) * (m as f64).sqrt()
            };
            xv.push((down + up) / SQRT_2);
            pv.push(Complex64::i() * (up - down) / SQRT_2);
        }
        (xv, pv)
    }
}

fn coherent_amplitudes(alpha: Complex64, nmax: usize) -> Vec<Complex64> {
    // Multiplicative recurrence c_n = c_{n-1} alpha / sqrt(n) with a running
    // log scale so that exp(-|alpha|^2 / 2) never underflows on its own.
    const RESCALE: f64 = 1e100;
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = 0.0;
    let mut c = Complex64::new(1.0, 0.0);
    out.push(c);
    for n in 1..=nmax {
        c = c * alpha / (n as f64).sqrt();
        if c.norm() > RESCALE {
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
            c /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(c);
    }
    let factor = (log_scale - alpha.norm_sqr() / 2.0).exp();
    out.into_iter().map(|v| v * factor).collect()
}

/// Poisson mass beyond `nmax` for mean `lambda`, summed from the last kept
/// probability.
fn poisson_tail(lambda: f64, last: f64, nmax: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let mut p = last;
    let mut sum = 0.0;
    let mut n = nmax + 1;
    loop {
        p *= lambda / n as f64;
        sum += p;
        if (n as f64 > lambda && p <= sum * 1e-17) || p == 0.0 || n > nmax + 100_000 {
            break;
        }
        n += 1;
    }
    sum
}

/// Truncated coherent state `exp(-|alpha|^2/2) sum alpha^n / sqrt(n!) |n>`.
///
/// Refuses `nmax` below [`truncation_rule`].
pub fn coherent_state(label: CoherentLabel, nmax: usize) -> Result<FockState> {
    let required = label.default_nmax();
    if nmax < required {
        return Err(Error::Truncation {
            given: nmax,
            required,
            abs_alpha: label.alpha.norm(),
        });
    }
    Ok(coherent_state_forced(label, nmax))
}

/// Coherent state at the default truncation.
pub fn coherent_state_default(label: CoherentLabel) -> FockState {
    coherent_state_forced(label, label.default_nmax())
}

/// Coherent state at any `nmax`; the tail bound records what was dropped.
pub fn coherent_state_forced(label: CoherentLabel, nmax: usize) -> FockState {
    let amplitudes = coherent_amplitudes(label.alpha, nmax);
    let last = amplitudes[nmax].norm_sqr();
    let tail_bound = poisson_tail(label.alpha.norm_sqr(), last, nmax);
    FockState { amplitudes, tail_bound }
}

/// `||(a - alpha)|psi>||` with `a` truncated at `nmax`.
pub fn annihilation_defect(state: &FockState, alpha: Complex64) -> f64 {
    state
        .annihilate()
        .iter()
        .zip(state.amplitudes())
        .map(|(ac, c)| (ac - alpha * c).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservableReport {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub mean_h0: f64,
    pub var_h0: f64,
}

impl ObservableReport {
    pub fn delta_x(&self) -> f64 {
        self.var_x.sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        self.var_p.sqrt()
    }

    pub fn delta_h0(&self) -> f64 {
        self.var_h0.sqrt()
    }

    /// `tau = 1 / (2 Delta H0)`, so that `tau Delta H0 = 1/2`.
    pub fn characteristic_time(&self) -> f64 {
        1.0 / (2.0 * self.delta_h0())
    }
}

/// Moments of `X`, `P` and `H0`, normalised by `<psi|psi>`.
///
/// `X` and `P` act through their tridiagonal ladder matrix elements on the
/// state extended by one level; variances are taken as `||(O - <O>)psi||^2`.
pub fn expectations(state: &FockState) -> ObservableReport {
    let norm = state.norm_sqr();
    let c = state.amplitudes();
    let (xv, pv) = state.quadratures();
    let mean_of = |v: &[Complex64]| -> f64 { c.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / norm };
    let var_of = |v: &[Complex64], mean: f64| -> f64 {
        v.iter()
            .enumerate()
            .map(|(k, ov)| (ov - c.get(k).copied().unwrap_or_default() * mean).norm_sqr())
            .sum::<f64>()
            / norm
    };
    let mean_x = mean_of(&xv);
    let mean_p = mean_of(&pv);
    let var_x = var_of(&xv, mean_x);
    let var_p = var_of(&pv, mean_p);

    let probs = state.probabilities();
    let energies = SpectrumMap.levels(state.nmax());
    let mean_h0 = probs.iter().zip(&energies).map(|(p, e)| p * e).sum::<f64>() / norm;
    let var_h0 = probs
        .iter()
        .zip(&energies)
        .map(|(p, e)| p * (e - mean_h0).powi(2))
        .sum::<f64>()
        / norm;
    ObservableReport {
        mean_x,
        mean_p,
        var_x,
        var_p,
        mean_h0,
        var_h0,
    }
}

/// `psi(x) = sum_n c_n phi_n(x)` with Hermite functions from the
/// normalised three-term recurrence.
pub fn position_wavefunction(state: &FockState, xs: &[f64]) -> Vec<Complex64> {
    let c = state.amplitudes();
    let norm0 = PI.powf(-0.25);
    xs.iter()
        .map(|&x| {
            let mut prev = 0.0;
            let mut cur = norm0 * (-x * x / 2.0).exp();
            let mut psi = c[0] * cur;
            for n in 0..state.nmax() {
                let nf = n as f64;
                let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
                psi += c[n + 1] * cur;
            }
            psi
        })
        .collect()
}

/// CSV with header `x,re_psi,im_psi,abs2_psi`.
pub fn write_wavefunction_csv<W: Write>(w: W, xs: &[f64], psi: &[Complex64]) -> io::Result<()> {
    table::write_csv(
        w,
        &["x", "re_psi", "im_psi", "abs2_psi"],
        xs.iter().zip(psi).map(|(x, v)| [*x, v.re, v.im, v.norm_sqr()]),
    )
}

/// Radial rule used by [`identity_resolution_check_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RadialRule {
    #[default]
    GaussLegendre,
    Midpoint,
}

/// `(1/pi) \int_{|alpha| <= R} |alpha><alpha| d^2 alpha` in the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub nmax: usize,
    pub radius: f64,
    entries: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheckReport {
    pub nmax: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub max_offdiag: f64,
    pub diag: Vec<f64>,
}

impl IdentityCheck {
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * (self.nmax + 1) + n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..=self.nmax).map(|n| self.get(n, n).re).collect()
    }

    pub fn max_offdiag(&self) -> f64 {
        let dim = self.nmax + 1;
        (0..dim)
            .flat_map(|m| (0..dim).filter(move |&n| n != m).map(move |n| (m, n)))
            .map(|(m, n)| self.get(m, n).norm())
            .fold(0.0, f64::max)
    }

    /// Real parts, row-major.
    pub fn real_matrix(&self) -> Vec<Vec<f64>> {
        let dim = self.nmax + 1;
        (0..dim)
            .map(|m| (0..dim).map(|n| self.get(m, n).re).collect())
            .collect()
    }

    pub fn report(&self) -> IdentityCheckReport {
        IdentityCheckReport {
            nmax: self.nmax,
            radius: self.radius,
            max_offdiag: self.max_offdiag(),
            diag: self.diag(),
        }
    }
}

/// Polar product rule: trapezoid in angle, Gauss-Legendre in radius.
/// The exact value of `M_nn` is `P(n + 1, R^2)`.
pub fn identity_resolution_check(nmax: usize, radius: f64, nr: usize, ntheta: usize) -> Result<IdentityCheck> {
    identity_resolution_check_with(nmax, radius, nr, ntheta, RadialRule::GaussLegendre)
}

pub fn identity_resolution_check_with(
    nmax: usize,
    radius: f64,
    nr: usize,
    ntheta: usize,
    rule: RadialRule,
) -> Result<IdentityCheck> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if nr < 16 || ntheta < 16 {
        return Err(Error::InvalidArgument(format!(
            "quadrature sizes must be >= 16, got nr = {nr}, ntheta = {ntheta}"
        )));
    }
    let (rs, wr) = match rule {
        RadialRule::GaussLegendre => gauss_legendre_on(nr, 0.0, radius),
        RadialRule::Midpoint => {
            let h = radius / nr as f64;
            ((0..nr).map(|k| (k as f64 + 0.5) * h).collect(), vec![h; nr])
        }
    };
    let dim = nmax + 1;
    let mut entries = vec![Complex64::default(); dim * dim];
    let wtheta = TAU / ntheta as f64;
    for (r, w) in rs.iter().zip(&wr) {
        let weight = w * r * wtheta / PI;
        for j in 0..ntheta {
            let alpha = Complex64::from_polar(*r, wtheta * j as f64);
            let c = coherent_amplitudes(alpha, nmax);
            for m in 0..dim {
                let cm = c[m] * weight;
                for n in 0..dim {
                    entries[m * dim + n] += cm * c[n].conj();
                }
            }
        }
    }
    Ok(IdentityCheck { nmax, radius, entries })
}
