//! Observables, time-averaged transition frequencies and switching-frequency sweeps.

use rayon::prelude::*;

use crate::circuit::{CircuitConstants, Regime};
use crate::drive::{DriveKind, DriveWaveform};
use crate::error::{Error, Result};
use crate::hamiltonian::HilbertSpace;
use crate::linalg::StateVector;
use crate::propagate::{evolve_observed, EvolutionConfig};
use crate::scalar::Real;

fn fock_size<T: Real>(psi: &StateVector<T>) -> usize {
    assert!(psi.dim() >= 4 && psi.dim().is_multiple_of(2), "state is not a qubit ⊗ Fock vector");
    psi.dim() / 2
}

/// `Σ_n |⟨e,n|ψ⟩|²`
pub fn p_excited<T: Real>(psi: &StateVector<T>) -> T {
    let m = fock_size(psi);
    psi.as_slice()[m..].iter().fold(T::zero(), |s, z| s + z.norm_sqr())
}

/// `Σ_n |⟨g,n|ψ⟩|²`
pub fn p_ground<T: Real>(psi: &StateVector<T>) -> T {
    let m = fock_size(psi);
    psi.as_slice()[..m].iter().fold(T::zero(), |s, z| s + z.norm_sqr())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution<T> {
    /// `P(n)` for `n = 0..=n_max`, traced over the qubit.
    pub p_n: Vec<T>,
    /// `1 - P(0)`
    pub p_any: T,
    /// `|⟨e,1|ψ⟩|²`
    pub p_e1: T,
}

pub fn photon_distribution<T: Real>(psi: &StateVector<T>) -> PhotonDistribution<T> {
    let m = fock_size(psi);
    let amp = psi.as_slice();
    let p_n: Vec<T> = (0..m).map(|n| amp[n].norm_sqr() + amp[m + n].norm_sqr()).collect();
    PhotonDistribution {
        p_any: T::one() - p_n[0],
        p_e1: amp[m + 1].norm_sqr(),
        p_n,
    }
}

/// `(f̄_0, f̄_r)`: qubit and resonator frequencies averaged over one drive period.
pub fn time_avg_frequencies<T: Real>(constants: &CircuitConstants<T>, drive: &DriveWaveform<T>) -> Result<(T, T)> {
    let half = T::lit(0.5);
    match drive.kind() {
        DriveKind::SquareWave => {
            let t = constants.limit_params(Regime::Transverse);
            let l = constants.limit_params(Regime::Longitudinal);
            Ok(((t.f_0 + l.f_0) * half, (t.f_r + l.f_r) * half))
        }
        DriveKind::ConstantPhase => {
            let p = constants.instant_params(drive.fixed_phase())?;
            Ok((p.f_0, p.f_r))
        }
        DriveKind::Sinusoidal => {
            let period = drive.period().expect("periodic drive");
            const INTERVALS: usize = 1000;
            let h = period / T::from_usize(INTERVALS).unwrap();
            let (mut s0, mut sr) = (T::zero(), T::zero());
            for i in 0..=INTERVALS {
                let w = if i == 0 || i == INTERVALS {
                    T::one()
                } else if i % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                let p = constants.instant_params(drive.phase_at(T::from_usize(i).unwrap() * h))?;
                s0 = s0 + w * p.f_0;
                sr = sr + w * p.f_r;
            }
            let scale = h / T::lit(3.0) / period;
            Ok((s0 * scale, sr * scale))
        }
    }
}

/// `points` uniform frequencies spanning `[lo, hi]`.
pub fn linear_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let span = hi - lo;
            let last = T::from_usize(points - 1).unwrap();
            (0..points)
                .map(|i| lo + span * T::from_usize(i).unwrap() / last)
                .collect()
        }
    }
}

/// `points` frequencies over `[0.75 S, 1.25 S]`.
pub fn default_grid<T: Real>(sum: T, points: usize) -> Vec<T> {
    linear_grid(T::lit(0.75) * sum, T::lit(1.25) * sum, points)
}

/// Probability surfaces over a switching-frequency grid. Rows are grid
/// points, columns are sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub f_s: Vec<T>,
    pub times: Vec<T>,
    pub p_e: Vec<Vec<T>>,
    /// `1 - P(n = 0)`
    pub p_ph: Vec<Vec<T>>,
    pub p_e1: Vec<Vec<T>>,
    pub kind: DriveKind,
    pub n_max: usize,
    pub t_total: T,
    pub f0_bar: T,
    pub fr_bar: T,
}

impl<T: Real> SweepResult<T> {
    pub fn freq_sum(&self) -> T {
        self.f0_bar + self.fr_bar
    }

    pub fn max_p_e(&self, row: usize) -> T {
        row_max(&self.p_e[row])
    }

    pub fn max_p_ph(&self, row: usize) -> T {
        row_max(&self.p_ph[row])
    }

    pub fn row_of(&self, f_s: T) -> Option<usize> {
        self.f_s.iter().position(|f| *f == f_s)
    }

    /// Grid spacing (zero for a single point).
    pub fn spacing(&self) -> T {
        match self.f_s.len() {
            0 | 1 => T::zero(),
            n => (self.f_s[n - 1] - self.f_s[0]) / T::from_usize(n - 1).unwrap(),
        }
    }
}

fn row_max<T: Real>(row: &[T]) -> T {
    row.iter().fold(T::zero(), |m, v| m.max(*v))
}

struct PointTrace<T> {
    times: Vec<T>,
    p_e: Vec<T>,
    p_ph: Vec<T>,
    p_e1: Vec<T>,
}

/// Evolves `|g,0⟩` at each grid frequency, in parallel.
pub fn sweep<T: Real>(
    space: &HilbertSpace<T>,
    constants: &CircuitConstants<T>,
    kind: DriveKind,
    grid: &[T],
    config: &EvolutionConfig<T>,
) -> Result<SweepResult<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty frequency grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidGrid("grid must be strictly ascending".into()));
    }
    if !kind.is_periodic() {
        return Err(Error::InvalidGrid(format!("sweeps need a periodic drive, got {kind}")));
    }
    let k = constants.k;
    let (f0_bar, fr_bar) = time_avg_frequencies(constants, &DriveWaveform::new(kind, grid[0], k, T::zero())?)?;
    let psi0 = space.ground();

    let traces: Vec<PointTrace<T>> = grid
        .par_iter()
        .map(|&f_s| {
            let tag = |e: Error| Error::SweepPoint {
                f_s: f_s.to_f64_lossy(),
                source: Box::new(e),
            };
            let drive = DriveWaveform::new(kind, f_s, k, T::zero()).map_err(tag)?;
            let mut tr = PointTrace {
                times: Vec::new(),
                p_e: Vec::new(),
                p_ph: Vec::new(),
                p_e1: Vec::new(),
            };
            evolve_observed(space, constants, &drive, config, &psi0, |t, psi, _| {
                let dist = photon_distribution(psi);
                tr.times.push(t);
                tr.p_e.push(p_excited(psi));
                tr.p_ph.push(dist.p_any);
                tr.p_e1.push(dist.p_e1);
            })
            .map_err(tag)?;
            Ok(tr)
        })
        .collect::<Result<_>>()?;

    let times = traces[0].times.clone();
    let mut out = SweepResult {
        f_s: grid.to_vec(),
        times,
        p_e: Vec::with_capacity(grid.len()),
        p_ph: Vec::with_capacity(grid.len()),
        p_e1: Vec::with_capacity(grid.len()),
        kind,
        n_max: space.n_max(),
        t_total: config.t_total,
        f0_bar,
        fr_bar,
    };
    for tr in traces {
        debug_assert_eq!(tr.times, out.times);
        out.p_e.push(tr.p_e);
        out.p_ph.push(tr.p_ph);
        out.p_e1.push(tr.p_e1);
    }
    Ok(out)
}

/// Grid frequency with the largest `max_t P_e`; ties go to the lower frequency.
pub fn find_resonance<T: Real>(result: &SweepResult<T>) -> T {
    let mut best = 0;
    let mut best_val = T::neg_infinity();
    for row in 0..result.f_s.len() {
        let v = result.max_p_e(row);
        if v > best_val {
            best = row;
            best_val = v;
        }
    }
    result.f_s[best]
}
