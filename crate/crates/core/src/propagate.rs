//! Time evolution `dψ/dt = -2πi (H(t)/h) ψ` with time in ns and `H/h` in GHz.
//!
//! Piecewise-constant drives are propagated exactly, one spectral propagator
//! per constant segment; smooth drives use classic RK4. Both methods split
//! time at the drive's switching instants and at the sample times, so no step
//! ever straddles a discontinuity and every sample lands on a step boundary.

use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex;

use crate::circuit::{CircuitConstants, ParamKernel};
use crate::drive::DriveWaveform;
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, zero_vec, BandedTerms, HamiltonianTerms, HilbertSpace, BandWeights, Cell};
use crate::linalg::{HermitianEigen, OperatorMatrix, StateVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Product of exact propagators of the constant segments.
    PiecewiseExact,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PiecewiseExact => "exact",
            Method::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig<T> {
    /// Total time, ns. Must be a whole number of `dt`.
    pub t_total: T,
    /// Step, ns. Sets the sample grid for both methods and the RK4 step.
    pub dt: T,
    /// Record every `sample_stride`-th step (the final step is always recorded).
    pub sample_stride: usize,
    pub method: Method,
    /// Maximum tolerated `|‖ψ‖ - 1|`.
    pub renorm_tol: T,
    /// Reuse propagators of repeated segments.
    pub cache_propagators: bool,
}

impl<T: Real> Default for EvolutionConfig<T> {
    fn default() -> Self {
        Self {
            t_total: T::lit(2000.0),
            dt: T::lit(1e-4),
            sample_stride: 10_000,
            method: Method::PiecewiseExact,
            renorm_tol: T::lit(1e-8),
            cache_propagators: true,
        }
    }
}

impl<T: Real> EvolutionConfig<T> {
    /// Default config with the method suited to `drive`.
    pub fn for_drive(drive: &DriveWaveform<T>) -> Self {
        Self {
            method: default_method(drive),
            ..Self::default()
        }
    }

    /// Validates against `drive`, returning the number of `dt` steps.
    pub fn validate(&self, drive: &DriveWaveform<T>) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.t_total.is_finite() && self.t_total > T::zero()) {
            return bad(format!("t_total must be positive, got {}", self.t_total));
        }
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.sample_stride < 1 {
            return bad("sample_stride must be at least 1".into());
        }
        if !(self.renorm_tol > T::zero()) {
            return bad(format!("renorm_tol must be positive, got {}", self.renorm_tol));
        }
        let ratio = self.t_total / self.dt;
        let steps = ratio.round();
        if steps < T::one() || (steps - ratio).abs() > T::lit(1e-6) * ratio.max(T::one()) {
            return bad(format!(
                "t_total {} is not a whole number of steps dt {}",
                self.t_total, self.dt
            ));
        }
        if self.method == Method::PiecewiseExact && !drive.is_piecewise_constant() {
            return Err(Error::MethodMismatch(format!(
                "exact piecewise propagation needs a piecewise-constant drive, got {}",
                drive.kind()
            )));
        }
        steps
            .to_usize()
            .ok_or_else(|| Error::InvalidConfig("step count overflow".into()))
    }
}

pub fn default_method<T: Real>(drive: &DriveWaveform<T>) -> Method {
    if drive.is_piecewise_constant() {
        Method::PiecewiseExact
    } else {
        Method::Rk4
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    /// `|‖ψ‖ - 1|` at each sample.
    pub norm_drift: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&StateVector<T>> {
        self.states.last()
    }

    pub fn max_norm_drift(&self) -> T {
        self.norm_drift.iter().fold(T::zero(), |m, d| m.max(*d))
    }
}

/// `exp(-2πi H Δt)` from the spectral decomposition of `H`.
pub fn expm_step<T: Real>(h: &OperatorMatrix<T>, delta_t: T) -> Result<OperatorMatrix<T>> {
    let eig = HermitianEigen::new(h)?;
    Ok(eig.map_spectrum(|e| phase_factor(e, delta_t)))
}

#[inline]
fn phase_factor<T: Real>(energy: T, delta_t: T) -> Complex<T> {
    Complex::from_polar(T::one(), -T::TAU() * energy * delta_t)
}

/// Evolves `psi0` and records the sampled states.
pub fn evolve<T: Real>(
    space: &HilbertSpace<T>,
    constants: &CircuitConstants<T>,
    drive: &DriveWaveform<T>,
    config: &EvolutionConfig<T>,
    psi0: &StateVector<T>,
) -> Result<Trajectory<T>> {
    let mut traj = Trajectory::default();
    evolve_observed(space, constants, drive, config, psi0, |t, psi, drift| {
        traj.times.push(t);
        traj.states.push(psi.clone());
        traj.norm_drift.push(drift);
    })?;
    Ok(traj)
}

/// Like [`evolve`] but hands each sample `(t, ψ, drift)` to `observer`
/// instead of storing it. Returns the final state.
pub fn evolve_observed<T: Real>(
    space: &HilbertSpace<T>,
    constants: &CircuitConstants<T>,
    drive: &DriveWaveform<T>,
    config: &EvolutionConfig<T>,
    psi0: &StateVector<T>,
    mut observer: impl FnMut(T, &StateVector<T>, T),
) -> Result<StateVector<T>> {
    let n_steps = config.validate(drive)?;
    constants.validate()?;
    if psi0.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: psi0.dim(),
        });
    }
    let drift0 = (psi0.norm() - T::one()).abs();
    if drift0 > T::lit(1e-8) {
        return Err(Error::NotNormalized(drift0.to_f64_lossy()));
    }

    let intervals = build_intervals(drive, config, n_steps)?;
    let mut psi = psi0.clone();
    observer(T::zero(), &psi, drift0);

    let mut stepper: Box<dyn Stepper<T> + '_> = match config.method {
        Method::PiecewiseExact => Box::new(ExactStepper::new(space, constants, config.cache_propagators)),
        Method::Rk4 => Box::new(Rk4Stepper::new(space, constants, config.dt)),
    };

    for iv in &intervals {
        stepper.advance(drive, iv.start, iv.end, psi.as_mut_slice())?;
        let drift = (psi.norm() - T::one()).abs();
        if !(drift <= config.renorm_tol) {
            return Err(Error::NormDrift {
                t: iv.end.to_f64_lossy(),
                drift: drift.to_f64_lossy(),
                tol: config.renorm_tol.to_f64_lossy(),
            });
        }
        if iv.sample {
            observer(iv.end, &psi, drift);
        }
    }
    Ok(psi)
}

#[derive(Debug, Clone, Copy)]
struct Interval<T> {
    start: T,
    end: T,
    sample: bool,
}

fn build_intervals<T: Real>(
    drive: &DriveWaveform<T>,
    config: &EvolutionConfig<T>,
    n_steps: usize,
) -> Result<Vec<Interval<T>>> {
    let step_time = |i: usize| T::from_usize(i).expect("step representable") * config.dt;
    let mut samples: Vec<usize> = (1..=n_steps / config.sample_stride)
        .map(|j| j * config.sample_stride)
        .collect();
    if samples.last() != Some(&n_steps) {
        samples.push(n_steps);
    }
    let t_end = step_time(n_steps);
    let switches = drive.discontinuities(T::zero(), t_end)?;
    let tol = T::epsilon() * T::lit(1024.0) * t_end.max(T::one());

    let mut out = Vec::with_capacity(samples.len() + switches.len());
    let mut start = T::zero();
    let mut sw = switches.into_iter().peekable();
    for s in samples {
        let ts = step_time(s);
        while let Some(&t) = sw.peek() {
            if t >= ts - tol {
                break;
            }
            if t > start + tol {
                out.push(Interval {
                    start,
                    end: t,
                    sample: false,
                });
                start = t;
            }
            sw.next();
        }
        // a switch within tol of the sample time coincides with it
        while sw.peek().is_some_and(|&t| t <= ts + tol) {
            sw.next();
        }
        out.push(Interval {
            start,
            end: ts,
            sample: true,
        });
        start = ts;
    }
    Ok(out)
}

trait Stepper<T: Real> {
    fn advance(&mut self, drive: &DriveWaveform<T>, t0: T, t1: T, psi: &mut [Complex<T>]) -> Result<()>;
}

#[derive(Default)]
struct CacheSlot<T> {
    seen: u32,
    propagator: Option<OperatorMatrix<T>>,
}

struct ExactStepper<'a, T: Real> {
    space: &'a HilbertSpace<T>,
    constants: &'a CircuitConstants<T>,
    caching: bool,
    eigen: HashMap<u64, Rc<HermitianEigen<T>>>,
    propagators: HashMap<(u64, i64), CacheSlot<T>>,
    scratch: Vec<Complex<T>>,
}

impl<'a, T: Real> ExactStepper<'a, T> {
    fn new(space: &'a HilbertSpace<T>, constants: &'a CircuitConstants<T>, caching: bool) -> Self {
        Self {
            space,
            constants,
            caching,
            eigen: HashMap::new(),
            propagators: HashMap::new(),
            scratch: zero_vec(space.dim()),
        }
    }

    fn decompose(&self, phase: T) -> Result<HermitianEigen<T>> {
        let p = self.constants.instant_params(phase)?;
        HermitianEigen::new(&assemble(self.space, &p))
    }
}

/// Segment lengths are keyed at this resolution (ns) so that float noise in
/// `m·T_s/2` differences does not defeat the cache.
const LENGTH_QUANTUM: f64 = 1e-10;

impl<T: Real> Stepper<T> for ExactStepper<'_, T> {
    fn advance(&mut self, drive: &DriveWaveform<T>, t0: T, t1: T, psi: &mut [Complex<T>]) -> Result<()> {
        let phase = drive.phase_at((t0 + t1) / T::lit(2.0));
        let len = t1 - t0;
        if !self.caching {
            let eig = self.decompose(phase)?;
            eig.apply_spectrum(|e| phase_factor(e, len), psi);
            return Ok(());
        }

        let phase_key = phase.to_f64_lossy().to_bits();
        let eig = match self.eigen.get(&phase_key) {
            Some(e) => Rc::clone(e),
            None => {
                let e = Rc::new(self.decompose(phase)?);
                self.eigen.insert(phase_key, Rc::clone(&e));
                e
            }
        };
        let len_key = (len.to_f64_lossy() / LENGTH_QUANTUM).round() as i64;
        let slot = self.propagators.entry((phase_key, len_key)).or_default();
        slot.seen += 1;
        if slot.propagator.is_none() && slot.seen >= 2 {
            slot.propagator = Some(eig.map_spectrum(|e| phase_factor(e, len)));
        }
        match &slot.propagator {
            Some(u) => {
                self.scratch.copy_from_slice(psi);
                u.apply_into(&self.scratch, psi);
            }
            None => eig.apply_spectrum(|e| phase_factor(e, len), psi),
        }
        Ok(())
    }
}

struct Rk4Stepper<T: Real> {
    kernel: ParamKernel<T>,
    terms: BandedTerms<T>,
    dt: T,
    /// Padded state, stage derivatives and stage argument.
    psi: Vec<Cell<T>>,
    k: [Vec<Cell<T>>; 4],
    tmp: Vec<Cell<T>>,
    /// Generator weights at the step start, midpoint and end.
    w: [BandWeights<T>; 3],
}

impl<T: Real> Rk4Stepper<T> {
    fn new(space: &HilbertSpace<T>, constants: &CircuitConstants<T>, dt: T) -> Self {
        let terms = BandedTerms::new(space);
        let zero = vec![[T::zero(); 4]; terms.padded_len()];
        let w = terms.zero_weights();
        Self {
            kernel: ParamKernel::new(constants),
            dt,
            psi: zero.clone(),
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
            w: [w.clone(), w.clone(), w],
            terms,
        }
    }

    /// Generator weights of `2π (H(t) - E_ref(t))` into buffer `which`. The
    /// scalar `E_ref` only adds a global phase; centring the populated levels
    /// keeps RK4's amplitude error small.
    fn load(&mut self, drive: &DriveWaveform<T>, t: T, which: usize) -> Result<()> {
        let p = self.kernel.eval(drive.phase_at(t))?;
        let coef = HamiltonianTerms::coefficients(&p);
        self.terms.weights(&coef, T::TAU(), &mut self.w[which]);
        Ok(())
    }

    /// One classic RK4 step using weight buffers 0 (start), 1 (midpoint) and 2 (end).
    #[inline]
    fn step(&mut self, h: T) {
        let half = h / T::lit(2.0);
        let [k1, k2, k3, k4] = &mut self.k;
        let [w0, w_mid, w1] = &self.w;
        let (psi, tmp, terms) = (&mut self.psi, &mut self.tmp, &self.terms);
        terms.apply_rotated(w0, psi, k1);
        axpy(tmp, psi, k1, half);
        terms.apply_rotated(w_mid, tmp, k2);
        axpy(tmp, psi, k2, half);
        terms.apply_rotated(w_mid, tmp, k3);
        axpy(tmp, psi, k3, h);
        terms.apply_rotated(w1, tmp, k4);
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let (k1, k2, k3, k4) = (k1.as_flattened(), k2.as_flattened(), k3.as_flattened(), k4.as_flattened());
        for (p, (a, (b, (c, d)))) in psi.as_flattened_mut().iter_mut().zip(k1.iter().zip(k2.iter().zip(k3.iter().zip(k4)))) {
            *p = *p + (*a + (*b + *c) * two + *d) * sixth;
        }
    }
}

/// `out = x + a·y`.
#[inline]
fn axpy<T: Real>(out: &mut [Cell<T>], x: &[Cell<T>], y: &[Cell<T>], a: T) {
    for (o, (x, y)) in out.as_flattened_mut().iter_mut().zip(x.as_flattened().iter().zip(y.as_flattened())) {
        *o = *x + *y * a;
    }
}

impl<T: Real> Stepper<T> for Rk4Stepper<T> {
    fn advance(&mut self, drive: &DriveWaveform<T>, t0: T, t1: T, psi: &mut [Complex<T>]) -> Result<()> {
        let len = t1 - t0;
        let n = (len / self.dt - T::lit(1e-6)).ceil().max(T::one());
        let h = len / n;
        let n = n.to_usize().expect("substep count");
        self.terms.pad(psi, &mut self.psi);
        if drive.is_piecewise_constant() {
            self.load(drive, (t0 + t1) / T::lit(2.0), 0)?;
            let [w0, w_mid, w1] = &mut self.w;
            w_mid.clone_from(w0);
            w1.clone_from(w0);
            for _ in 0..n {
                self.step(h);
            }
        } else {
            self.load(drive, t0, 0)?;
            for i in 0..n {
                let t = t0 + T::from_usize(i).unwrap() * h;
                self.load(drive, t + h / T::lit(2.0), 1)?;
                self.load(drive, t + h, 2)?;
                self.step(h);
                self.w.swap(0, 2);
            }
        }
        self.terms.unpad(&self.psi, psi);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{default_constants, Regime};
    use crate::hamiltonian::Qubit;
    use crate::linalg::test_support::{random_hermitian, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn defaults() -> CircuitConstants<f64> {
        default_constants()
    }

    #[test]
    fn expm_diagonal_and_zero_time() {
        let h = OperatorMatrix::<f64>::diagonal(&[1.5, -0.25, 3.0]);
        let u = expm_step(&h, 0.2).unwrap();
        for (i, e) in [1.5, -0.25, 3.0].iter().enumerate() {
            let expected = Complex::from_polar(1.0, -std::f64::consts::TAU * e * 0.2);
            assert!((u[(i, i)] - expected).norm() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 10, 5.0);
        let id = expm_step(&h, 0.0).unwrap();
        assert!(id.max_diff(&OperatorMatrix::identity(10)) < 1e-13);
    }

    #[test]
    fn expm_group_property_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 6, 18] {
            let h = random_hermitian(&mut rng, n, 4.0);
            let u1 = expm_step(&h, 0.137).unwrap();
            let u2 = expm_step(&h, 0.274).unwrap();
            assert!(u1.matmul(&u1).max_diff(&u2) < 1e-12, "n={n}");
            assert!(u2.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn expm_requires_hermitian() {
        let m = OperatorMatrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(expm_step(&m, 1.0).is_err());
    }

    #[test]
    fn energy_conserved_by_segment_propagator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(&mut rng, 12, 3.0);
        let psi = random_state(&mut rng, 12);
        let e0 = h.expectation(&psi).re;
        let u = expm_step(&h, 0.71).unwrap();
        let e1 = h.expectation(&u.apply(&psi)).re;
        assert!((e1 - e0).abs() <= 1e-10 * e0.abs().max(1.0));
    }

    #[test]
    fn config_validation() {
        let sq = DriveWaveform::square(13.75, 9).unwrap();
        let sin = DriveWaveform::sinusoidal(13.9, 9).unwrap();
        let ok = EvolutionConfig {
            t_total: 1.0,
            dt: 1e-3,
            sample_stride: 10,
            ..Default::default()
        };
        assert_eq!(ok.validate(&sq).unwrap(), 1000);
        assert!(matches!(ok.validate(&sin), Err(Error::MethodMismatch(_))));
        let rk = EvolutionConfig { method: Method::Rk4, ..ok };
        assert!(rk.validate(&sin).is_ok());
        for bad in [
            EvolutionConfig { t_total: 0.0, ..ok },
            EvolutionConfig { dt: -1.0, ..ok },
            EvolutionConfig { sample_stride: 0, ..ok },
            EvolutionConfig { dt: 0.3, ..ok },
            EvolutionConfig { renorm_tol: 0.0, ..ok },
        ] {
            assert!(matches!(bad.validate(&sq), Err(Error::InvalidConfig(_))), "{bad:?}");
        }
    }

    #[test]
    fn intervals_split_at_switches_and_samples() {
        let sq = DriveWaveform::square(1.0, 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 2.0,
            dt: 0.1,
            sample_stride: 3,
            ..Default::default()
        };
        let n = cfg.validate(&sq).unwrap();
        let iv: Vec<Interval<f64>> = build_intervals(&sq, &cfg, n).unwrap();
        let ends: Vec<f64> = iv.iter().map(|i| (i.end * 1e9).round() / 1e9).collect();
        assert_eq!(
            ends,
            vec![0.3, 0.5, 0.6, 0.9, 1.0, 1.2, 1.5, 1.8, 2.0]
        );
        assert!(iv.windows(2).all(|w| w[0].end == w[1].start));
        let samples = iv.iter().filter(|i| i.sample).count();
        assert_eq!(samples, 7);
    }

    #[test]
    fn rejects_unnormalized_or_misdimensioned_state() {
        let s = HilbertSpace::<f64>::new(2).unwrap();
        let sq = DriveWaveform::square(13.75, 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 1.0,
            dt: 0.1,
            sample_stride: 1,
            ..Default::default()
        };
        let twice = StateVector::from_vec(s.ground().as_slice().iter().map(|z| z * 2.0).collect());
        assert!(matches!(evolve(&s, &defaults(), &sq, &cfg, &twice), Err(Error::NotNormalized(_))));
        let wrong = StateVector::basis(3, 0);
        assert!(matches!(evolve(&s, &defaults(), &sq, &cfg, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn decoupled_ground_state_is_stationary() {
        let mut c = defaults();
        c.e_j2 = c.e_j1;
        let s = HilbertSpace::<f64>::new(4).unwrap();
        let psi0 = s.ground();
        for (drive, method) in [
            (DriveWaveform::square(13.75, 9).unwrap(), Method::PiecewiseExact),
            (DriveWaveform::square(13.75, 9).unwrap(), Method::Rk4),
            (DriveWaveform::sinusoidal(13.9, 9).unwrap(), Method::Rk4),
        ] {
            let cfg = EvolutionConfig {
                t_total: 5.0,
                dt: 1e-4,
                sample_stride: 5000,
                method,
                ..Default::default()
            };
            let traj = evolve(&s, &c, &drive, &cfg, &psi0).unwrap();
            assert_eq!(traj.len(), 11);
            for st in &traj.states {
                assert!((st.fidelity(&psi0) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trajectory_times_start_at_zero_and_increase() {
        let s = HilbertSpace::<f64>::new(3).unwrap();
        let drive = DriveWaveform::square(13.75, 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 1.05,
            dt: 0.01,
            sample_stride: 10,
            ..Default::default()
        };
        let traj = evolve(&s, &defaults(), &drive, &cfg, &s.ground()).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert!((traj.times.last().unwrap() - 1.05).abs() < 1e-12);
        assert_eq!(traj.len(), 12);
        assert!(traj.max_norm_drift() < 1e-12);
    }

    #[test]
    fn cache_is_transparent() {
        let s = HilbertSpace::<f64>::new(6).unwrap();
        let drive = DriveWaveform::square(13.75, 9).unwrap();
        let base = EvolutionConfig {
            t_total: 10.0,
            dt: 1e-3,
            sample_stride: 250,
            ..Default::default()
        };
        let psi0 = s.ground();
        let a = evolve(&s, &defaults(), &drive, &base, &psi0).unwrap();
        let b = evolve(
            &s,
            &defaults(),
            &drive,
            &EvolutionConfig {
                cache_propagators: false,
                ..base
            },
            &psi0,
        )
        .unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(x.max_diff(y) < 1e-14, "{}", x.max_diff(y));
        }
    }

    #[test]
    fn energy_constant_within_segments() {
        let c = defaults();
        let s = HilbertSpace::<f64>::new(6).unwrap();
        // T_s/2 = 1 ns with samples every 0.1 ns
        let drive = DriveWaveform::square(0.5, 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 4.0,
            dt: 0.1,
            sample_stride: 1,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let psi0 = random_state(&mut rng, s.dim());
        let traj = evolve(&s, &c, &drive, &cfg, &psi0).unwrap();
        let h = |t: f64| assemble(&s, &c.instant_params(drive.phase_at(t)).unwrap());
        for w in 0..traj.len() - 1 {
            let (ta, tb) = (traj.times[w], traj.times[w + 1]);
            // same half period: both ends inside one segment
            if (ta * 2.0 * 0.5).floor() != ((tb - 1e-9) * 2.0 * 0.5).floor() {
                continue;
            }
            let hm = h((ta + tb) / 2.0);
            let ea = hm.expectation(&traj.states[w]).re;
            let eb = hm.expectation(&traj.states[w + 1]).re;
            assert!((ea - eb).abs() <= 1e-10 * ea.abs(), "t={ta}: {ea} vs {eb}");
        }
    }

    #[test]
    fn norm_drift_is_reported_not_hidden() {
        let s = HilbertSpace::<f64>::new(4).unwrap();
        let drive = DriveWaveform::sinusoidal(13.9, 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 1.0,
            dt: 0.02,
            sample_stride: 5,
            method: Method::Rk4,
            ..Default::default()
        };
        let psi0 = s.basis_state(Qubit::Excited, 3);
        match evolve(&s, &defaults(), &drive, &cfg, &psi0) {
            Err(Error::NormDrift { drift, tol, .. }) => assert!(drift > tol),
            other => panic!("expected norm drift error, got {other:?}"),
        }
    }

    #[test]
    fn exact_and_rk4_agree_on_square_wave() {
        let c = defaults();
        let s = HilbertSpace::<f64>::new(6).unwrap();
        let drive = DriveWaveform::square(13.75, 9).unwrap();
        let base = EvolutionConfig {
            t_total: 2.0,
            dt: 1e-4,
            sample_stride: 2000,
            ..Default::default()
        };
        let psi0 = s.ground();
        let a = evolve(&s, &c, &drive, &base, &psi0).unwrap();
        let b = evolve(&s, &c, &drive, &EvolutionConfig { method: Method::Rk4, ..base }, &psi0).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(x.fidelity(y) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn longitudinal_constant_drive_matches_expm() {
        let c = defaults();
        let s = HilbertSpace::<f64>::new(5).unwrap();
        let drive = DriveWaveform::constant(c.longitudinal_phase(), 9).unwrap();
        let cfg = EvolutionConfig {
            t_total: 3.0,
            dt: 0.5,
            sample_stride: 6,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let psi0 = random_state(&mut rng, s.dim());
        let traj = evolve(&s, &c, &drive, &cfg, &psi0).unwrap();
        let u = expm_step(&assemble(&s, &c.limit_params(Regime::Longitudinal)), 3.0).unwrap();
        assert!(traj.final_state().unwrap().max_diff(&u.apply(&psi0)) < 1e-12);
    }
}

