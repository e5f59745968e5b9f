//! Exact quantum evolution under `f(H0)` by spectral phases, and the
//! diagnostics that compare it with the classical flow.
//!
//! Every eigenstate `|n>` only picks up the phase `exp(-i t f(E_n))`, so the
//! occupation distribution never changes. What changes is the relative
//! phase between levels: for nonlinear `f` a coherent state dephases instead
//! of following the classical circle.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{coherent_state_forced, expectations, CoherentLabel, FockState, ObservableReport};
use crate::{table, uniform_grid, Error, HamiltonianFunction, Result};

/// Which energy feeds `f'` when moving a coherent label classically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyConvention {
    /// `|alpha|^2`, the energy of the phase point `sqrt(2) alpha`.
    #[default]
    Classical,
    /// `<H0> = |alpha|^2 + 1/2`.
    QuantumMean,
}

impl EnergyConvention {
    pub fn energy(self, label: CoherentLabel) -> f64 {
        match self {
            EnergyConvention::Classical => label.mean_occupation(),
            EnergyConvention::QuantumMean => label.mean_occupation() + 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyConvention::Classical => "classical",
            EnergyConvention::QuantumMean => "quantum-mean",
        }
    }
}

impl fmt::Display for EnergyConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnergyConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(EnergyConvention::Classical),
            "quantum-mean" => Ok(EnergyConvention::QuantumMean),
            other => Err(Error::InvalidArgument(format!(
                "unknown energy convention `{other}` (expected classical or quantum-mean)"
            ))),
        }
    }
}

/// `f(E_n)` precomputed for `n = 0..=nmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionPlan {
    f: HamiltonianFunction,
    phases_per_unit_time: Vec<f64>,
}

impl EvolutionPlan {
    pub fn new(f: &HamiltonianFunction, nmax: usize) -> Result<Self> {
        let phases_per_unit_time = f.spectrum(nmax)?;
        if let Some((level, &value)) = phases_per_unit_time.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSpectrum { level, value });
        }
        Ok(EvolutionPlan {
            phases_per_unit_time,
            f: f.clone(),
        })
    }

    pub fn function(&self) -> &HamiltonianFunction {
        &self.f
    }

    pub fn phases_per_unit_time(&self) -> &[f64] {
        &self.phases_per_unit_time
    }

    pub fn nmax(&self) -> usize {
        self.phases_per_unit_time.len() - 1
    }

    fn check(&self, state: &FockState) -> Result<()> {
        if state.nmax() > self.nmax() {
            return Err(Error::InvalidArgument(format!(
                "state has nmax {} but the plan covers only {}",
                state.nmax(),
                self.nmax()
            )));
        }
        Ok(())
    }

    fn phase(&self, n: usize, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -t * self.phases_per_unit_time[n])
    }

    /// `c_n -> c_n exp(-i t f(E_n))`.
    pub fn evolve(&self, state: &FockState, t: f64) -> Result<FockState> {
        self.check(state)?;
        let amplitudes = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| c * self.phase(n, t))
            .collect();
        Ok(state.with_amplitudes(amplitudes))
    }

    /// `|sum_n |c_n|^2 exp(-i t f(E_n))|`.
    pub fn autocorrelation(&self, state: &FockState, t: f64) -> Result<f64> {
        self.check(state)?;
        Ok(state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| self.phase(n, t) * c.norm_sqr())
            .sum::<Complex64>()
            .norm())
    }
}

pub fn evolve(state: &FockState, f: &HamiltonianFunction, t: f64) -> Result<FockState> {
    EvolutionPlan::new(f, state.nmax())?.evolve(state, t)
}

pub fn autocorrelation(state0: &FockState, f: &HamiltonianFunction, t: f64) -> Result<f64> {
    EvolutionPlan::new(f, state0.nmax())?.autocorrelation(state0, t)
}

/// `alpha0 exp(-i t f'(H_cl))`, the label moved along the classical flow.
pub fn classical_label(
    alpha0: CoherentLabel,
    f: &HamiltonianFunction,
    t: f64,
    convention: EnergyConvention,
) -> Result<CoherentLabel> {
    let omega = f.deriv(convention.energy(alpha0))?;
    Ok(CoherentLabel::new(
        alpha0.alpha * Complex64::from_polar(1.0, -t * omega),
    ))
}

/// Per-sample diagnostics for a coherent initial state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub defect: f64,
    pub autocorrelation: f64,
    pub ehrenfest_gap: f64,
    pub observables: ObservableReport,
}

/// Coherent initial state with everything needed to probe it at any time.
#[derive(Clone, Debug)]
pub struct CoherentProbe {
    pub alpha0: CoherentLabel,
    pub convention: EnergyConvention,
    plan: EvolutionPlan,
    initial: FockState,
    omega: f64,
}

impl CoherentProbe {
    /// Uses the default truncation for `alpha0`.
    pub fn new(alpha0: CoherentLabel, f: &HamiltonianFunction, convention: EnergyConvention) -> Result<Self> {
        Self::with_nmax(alpha0, f, convention, alpha0.default_nmax())
    }

    /// Any `nmax`; the state's tail bound records the truncation loss.
    pub fn with_nmax(
        alpha0: CoherentLabel,
        f: &HamiltonianFunction,
        convention: EnergyConvention,
        nmax: usize,
    ) -> Result<Self> {
        Ok(CoherentProbe {
            alpha0,
            convention,
            plan: EvolutionPlan::new(f, nmax)?,
            initial: coherent_state_forced(alpha0, nmax),
            omega: f.deriv(convention.energy(alpha0))?,
        })
    }

    pub fn initial(&self) -> &FockState {
        &self.initial
    }

    pub fn plan(&self) -> &EvolutionPlan {
        &self.plan
    }

    pub fn classical_label(&self, t: f64) -> CoherentLabel {
        CoherentLabel::new(self.alpha0.alpha * Complex64::from_polar(1.0, -t * self.omega))
    }

    pub fn state_at(&self, t: f64) -> FockState {
        self.plan
            .evolve(&self.initial, t)
            .expect("plan built for the initial state")
    }

    pub fn coherence_defect(&self, t: f64) -> f64 {
        let evolved = self.state_at(t);
        self.defect_of(&evolved, t)
    }

    fn defect_of(&self, evolved: &FockState, t: f64) -> f64 {
        let target = coherent_state_forced(self.classical_label(t), self.initial.nmax());
        (1.0 - target.inner(evolved).norm()).clamp(0.0, 1.0)
    }

    fn gap_of(&self, obs: &ObservableReport, t: f64) -> f64 {
        let z = self.classical_label(t).alpha * SQRT_2;
        (obs.mean_x - z.re).hypot(obs.mean_p - z.im)
    }

    pub fn ehrenfest_gap(&self, t: f64) -> f64 {
        self.gap_of(&expectations(&self.state_at(t)), t)
    }

    pub fn diagnostics(&self, t: f64) -> Diagnostics {
        let evolved = self.state_at(t);
        let observables = expectations(&evolved);
        Diagnostics {
            defect: self.defect_of(&evolved, t),
            autocorrelation: self.initial.inner(&evolved).norm(),
            ehrenfest_gap: self.gap_of(&observables, t),
            observables,
        }
    }
}

/// `1 - |<alpha_cl(t)| exp(-i t f(H0)) |alpha0>|` at the default truncation
/// and the classical energy convention.
pub fn coherence_defect(alpha0: CoherentLabel, f: &HamiltonianFunction, t: f64) -> Result<f64> {
    coherence_defect_with(alpha0, f, t, EnergyConvention::Classical)
}

pub fn coherence_defect_with(
    alpha0: CoherentLabel,
    f: &HamiltonianFunction,
    t: f64,
    convention: EnergyConvention,
) -> Result<f64> {
    Ok(CoherentProbe::new(alpha0, f, convention)?.coherence_defect(t))
}

/// Distance between the quantum means `(<X>, <P>)` and the classical point
/// `sqrt(2) alpha_cl(t)`.
pub fn ehrenfest_gap(
    alpha0: CoherentLabel,
    f: &HamiltonianFunction,
    t: f64,
    convention: EnergyConvention,
) -> Result<f64> {
    Ok(CoherentProbe::new(alpha0, f, convention)?.ehrenfest_gap(t))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DephasingSeries {
    pub times: Vec<f64>,
    pub defect: Vec<f64>,
    pub autocorrelation: Vec<f64>,
    pub ehrenfest_gap: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_p: Vec<f64>,
}

pub const SCAN_HEADER: [&str; 8] = [
    "t",
    "defect",
    "autocorr",
    "ehrenfest_gap",
    "mean_x",
    "mean_p",
    "var_x",
    "var_p",
];

impl DephasingSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest defect and the time it occurs.
    pub fn max_defect(&self) -> (f64, f64) {
        self.times
            .iter()
            .zip(&self.defect)
            .fold((0.0, 0.0), |best, (&t, &d)| if d > best.1 { (t, d) } else { best })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        table::write_csv(
            w,
            &SCAN_HEADER,
            (0..self.len()).map(|k| {
                [
                    self.times[k],
                    self.defect[k],
                    self.autocorrelation[k],
                    self.ehrenfest_gap[k],
                    self.mean_x[k],
                    self.mean_p[k],
                    self.var_x[k],
                    self.var_p[k],
                ]
            }),
        )
    }
}

/// Defect, autocorrelation and Ehrenfest gap on a uniform grid over
/// `[0, t_max]`.
pub fn dephasing_scan(
    alpha0: CoherentLabel,
    f: &HamiltonianFunction,
    t_max: f64,
    dt: f64,
    convention: EnergyConvention,
) -> Result<DephasingSeries> {
    let probe = CoherentProbe::new(alpha0, f, convention)?;
    scan_probe(&probe, t_max, dt)
}

pub fn scan_probe(probe: &CoherentProbe, t_max: f64, dt: f64) -> Result<DephasingSeries> {
    let times = uniform_grid(t_max, dt)?;
    let mut series = DephasingSeries::default();
    for &t in &times {
        let d = probe.diagnostics(t);
        series.defect.push(d.defect);
        series.autocorrelation.push(d.autocorrelation);
        series.ehrenfest_gap.push(d.ehrenfest_gap);
        series.mean_x.push(d.observables.mean_x);
        series.mean_p.push(d.observables.mean_p);
        series.var_x.push(d.observables.var_x);
        series.var_p.push(d.observables.var_p);
    }
    series.times = times;
    Ok(series)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Revival {
    pub t: f64,
    pub autocorrelation: f64,
}

/// Interior local maxima of the autocorrelation above `threshold`.
pub fn find_revival_peaks(series: &DephasingSeries, threshold: f64) -> Vec<Revival> {
    let a = &series.autocorrelation;
    (1..a.len().saturating_sub(1))
        .filter(|&k| a[k] >= a[k - 1] && a[k] > a[k + 1] && a[k] > threshold)
        .map(|k| Revival {
            t: series.times[k],
            autocorrelation: a[k],
        })
        .collect()
}

pub fn find_revivals(series: &DephasingSeries, threshold: f64) -> Vec<f64> {
    find_revival_peaks(series, threshold).into_iter().map(|r| r.t).collect()
}

/// Best alignment of `psi_f(t)` with the oscillator orbit `psi_H0(T)` up to a
/// global phase: returns `min_T ||psi_f(t) - e^{i theta*} psi_H0(T)||`.
///
/// The overlap is a trigonometric polynomial in `T`; it is maximised on a
/// grid of `samples` points and refined by golden-section search around the
/// best grid point.
pub fn orbit_alignment_distance(state0: &FockState, f: &HamiltonianFunction, t: f64, samples: usize) -> Result<f64> {
    let plan = EvolutionPlan::new(f, state0.nmax())?;
    let evolved = plan.evolve(state0, t)?;
    // <psi_H0(T)|psi_f(t)> up to the irrelevant e^{iT/2}
    let weights: Vec<Complex64> = state0
        .amplitudes()
        .iter()
        .zip(evolved.amplitudes())
        .map(|(c0, ct)| c0.conj() * ct)
        .collect();
    let overlap = |big_t: f64| -> f64 {
        weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * Complex64::from_polar(1.0, big_t * n as f64))
            .sum::<Complex64>()
            .norm()
    };
    let samples = samples.max(8);
    let h = TAU / samples as f64;
    let (best_k, _) = (0..samples)
        .map(|k| (k, overlap(h * k as f64)))
        .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
    let (mut lo, mut hi) = (h * (best_k as f64 - 1.0), h * (best_k as f64 + 1.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if overlap(a) > overlap(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let best = overlap(0.5 * (lo + hi)).max(overlap(h * best_k as f64));
    let norms = state0.norm_sqr() + evolved.norm_sqr();
    Ok((norms - 2.0 * best).max(0.0).sqrt())
}

/// Instantaneous rotation rate of `<a>` at `t = 0`, i.e. the rate at which
/// `(<X>, <P>)` turns clockwise. Classically this is `f'(H0)`.
pub fn mean_rotation_rate(state: &FockState, f: &HamiltonianFunction) -> Result<f64> {
    let fe = f.spectrum(state.nmax())?;
    let c = state.amplitudes();
    let mut mean_a = Complex64::default();
    let mut weighted = Complex64::default();
    for n in 0..state.nmax() {
        let a_n = c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
        mean_a += a_n;
        weighted += a_n * (fe[n + 1] - fe[n]);
    }
    if mean_a.norm() == 0.0 {
        return Err(Error::InvalidArgument("<a> vanishes; rotation rate undefined".into()));
    }
    Ok((weighted / mean_a).re)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fock::coherent_state_default;

    fn er() -> HamiltonianFunction {
        HamiltonianFunction::einstein_rosen()
    }

    #[test]
    fn zero_time_is_identity() {
        let s = coherent_state_default(CoherentLabel::new(Complex64::new(1.0, 0.3)));
        assert_eq!(evolve(&s, &er(), 0.0).unwrap(), s);
    }

    #[test]
    fn stationary_basis_state() {
        let s = FockState::basis(3, 8).unwrap();
        let out = evolve(&s, &HamiltonianFunction::identity(), PI).unwrap();
        let expected = Complex64::from_polar(1.0, -PI * 3.5);
        assert!((out.amplitudes()[3] - expected).norm() < 1e-15);
        assert_eq!(out.probabilities(), s.probabilities());
    }

    #[test]
    fn coherent_closure_under_h0() {
        let alpha = Complex64::new(1.0, 0.5);
        let label = CoherentLabel::new(alpha);
        let s = coherent_state_default(label);
        for t in [0.7, 3.0, 11.0] {
            let out = evolve(&s, &HamiltonianFunction::identity(), t).unwrap();
            let moved = coherent_state_forced(CoherentLabel::new(alpha * Complex64::from_polar(1.0, -t)), s.nmax());
            let global = Complex64::from_polar(1.0, -t / 2.0);
            let err: f64 = out
                .amplitudes()
                .iter()
                .zip(moved.amplitudes())
                .map(|(a, b)| (a - global * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn defect_identity_and_zero_time() {
        let id = HamiltonianFunction::identity();
        for alpha in [Complex64::new(0.5, 0.0), Complex64::new(-1.0, 2.0)] {
            for t in [0.0, 1.0, 17.3] {
                assert!(coherence_defect(CoherentLabel::new(alpha), &id, t).unwrap() <= 1e-10);
            }
        }
        assert!(coherence_defect(CoherentLabel::real(2.0), &er(), 0.0).unwrap() <= 1e-12);
    }

    #[test]
    fn er_defect_positive() {
        let d = coherence_defect(CoherentLabel::real(SQRT_2), &er(), 20.0).unwrap();
        assert!(d > 0.1);
    }

    #[test]
    fn autocorrelation_examples() {
        let s = coherent_state_default(CoherentLabel::new(Complex64::new(1.2, -0.4)));
        assert!((autocorrelation(&s, &er(), 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((autocorrelation(&s, &HamiltonianFunction::identity(), TAU).unwrap() - 1.0).abs() < 1e-10);
        for chi in [1.0, 0.25, 3.0] {
            let v = autocorrelation(&s, &HamiltonianFunction::kerr(chi), PI / chi).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "chi={chi}");
        }
    }

    #[test]
    fn ehrenfest_gap_identity() {
        let id = HamiltonianFunction::identity();
        let probe = CoherentProbe::new(
            CoherentLabel::new(Complex64::new(0.3, 1.1)),
            &id,
            EnergyConvention::Classical,
        )
        .unwrap();
        for k in 0..=50 {
            assert!(probe.ehrenfest_gap(k as f64 * 2.0) <= 1e-8);
        }
    }

    #[test]
    fn er_means_spiral_inward() {
        let probe = CoherentProbe::new(CoherentLabel::real(SQRT_2), &er(), EnergyConvention::Classical).unwrap();
        assert!(probe.ehrenfest_gap(0.0) < 1e-12);
        let radius = 2.0;
        let late = probe.ehrenfest_gap(40.0);
        assert!(late > 0.5 * radius, "{late}");
        assert!(late < 2.0 * radius);
    }

    #[test]
    fn energy_conventions_differ() {
        let label = CoherentLabel::real(1.5);
        let a = coherence_defect_with(label, &er(), 5.0, EnergyConvention::Classical).unwrap();
        let b = coherence_defect_with(label, &er(), 5.0, EnergyConvention::QuantumMean).unwrap();
        assert!((a - b).abs() > 1e-6);
        assert_eq!(
            "quantum-mean".parse::<EnergyConvention>().unwrap(),
            EnergyConvention::QuantumMean
        );
        assert!("bogus".parse::<EnergyConvention>().is_err());
    }

    #[test]
    fn scan_keeps_occupations() {
        let label = CoherentLabel::real(1.0);
        let f = er();
        let probe = CoherentProbe::new(label, &f, EnergyConvention::Classical).unwrap();
        let p0 = probe.initial().probabilities();
        for t in [0.5, 9.0, 33.0] {
            for (a, b) in probe.state_at(t).probabilities().iter().zip(&p0) {
                assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
            }
        }
        let series = scan_probe(&probe, 2.0, 0.5).unwrap();
        assert_eq!(series.len(), 5);
        assert!(series.defect[0] <= 1e-12);
        assert!(series.autocorrelation[0] >= 1.0 - 1e-12);
    }

    #[test]
    fn revivals() {
        let label = CoherentLabel::real(2.0);
        let kerr = dephasing_scan(
            label,
            &HamiltonianFunction::kerr(1.0),
            4.0,
            1e-3,
            EnergyConvention::Classical,
        )
        .unwrap();
        let times = find_revivals(&kerr, 0.999);
        assert!(times.iter().any(|t| (t - PI).abs() <= 1e-3), "{times:?}");
        assert!(find_revivals(&kerr, 1.1).is_empty());

        let id = dephasing_scan(
            label,
            &HamiltonianFunction::identity(),
            8.0,
            1e-2,
            EnergyConvention::Classical,
        )
        .unwrap();
        let times = find_revivals(&id, 0.999);
        assert!(times.iter().any(|t| (t - TAU).abs() <= 1e-2), "{times:?}");
    }

    #[test]
    fn group_law() {
        let s = coherent_state_default(CoherentLabel::new(Complex64::new(0.8, 0.8)));
        let f = er();
        let a = evolve(&evolve(&s, &f, 1.7).unwrap(), &f, 2.9).unwrap();
        let b = evolve(&s, &f, 4.6).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn plan_rejects_larger_state() {
        let plan = EvolutionPlan::new(&er(), 4).unwrap();
        assert!(plan.evolve(&FockState::basis(0, 6).unwrap(), 1.0).is_err());
        assert_eq!(plan.phases_per_unit_time()[2], er().eval(2.5).unwrap());
    }

    #[test]
    fn plan_rejects_non_finite_spectrum() {
        let f = HamiltonianFunction::resolve("exp(exp(x))").unwrap();
        assert!(matches!(
            EvolutionPlan::new(&f, 10),
            Err(Error::NonFiniteSpectrum { .. })
        ));
    }

    #[test]
    fn alignment_distance_zero_for_identity() {
        let s = coherent_state_default(CoherentLabel::real(SQRT_2));
        for t in [0.0, 1.3, 40.0] {
            let d = orbit_alignment_distance(&s, &HamiltonianFunction::identity(), t, 256).unwrap();
            assert!(d < 1e-6, "{d}");
        }
    }

    #[test]
    fn rotation_rate_identity() {
        let s = coherent_state_default(CoherentLabel::new(Complex64::new(1.0, 1.0)));
        assert!((mean_rotation_rate(&s, &HamiltonianFunction::identity()).unwrap() - 1.0).abs() < 1e-12);
        assert!(mean_rotation_rate(&FockState::basis(2, 4).unwrap(), &er()).is_err());
    }
}
