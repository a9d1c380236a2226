//! External flux-phase schedules.
//!
//! Both periodic waveforms swing between `0` (transverse) and `kπ/2`
//! (longitudinal) and sit at `kπ/2` right after `t = 0`. Time is in ns and
//! `f_s` is an ordinary frequency in GHz, so the period is `T_s = 1/f_s`.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveKind {
    SquareWave,
    Sinusoidal,
    ConstantPhase,
}

impl DriveKind {
    pub fn name(self) -> &'static str {
        match self {
            DriveKind::SquareWave => "square",
            DriveKind::Sinusoidal => "sinusoidal",
            DriveKind::ConstantPhase => "constant",
        }
    }

    pub fn is_periodic(self) -> bool {
        !matches!(self, DriveKind::ConstantPhase)
    }
}

impl std::str::FromStr for DriveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(DriveKind::SquareWave),
            "sinusoidal" => Ok(DriveKind::Sinusoidal),
            "constant" => Ok(DriveKind::ConstantPhase),
            other => Err(Error::InvalidDrive(format!(
                "unknown drive kind {other:?} (expected square, sinusoidal or constant)"
            ))),
        }
    }
}

impl std::fmt::Display for DriveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveWaveform<T> {
    kind: DriveKind,
    f_s: T,
    k: u32,
    fixed_phase: T,
}

impl<T: Real> DriveWaveform<T> {
    pub fn new(kind: DriveKind, f_s: T, k: u32, fixed_phase: T) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidDrive("junction count k must be at least 1".into()));
        }
        if kind.is_periodic() && !(f_s.is_finite() && f_s > T::zero()) {
            return Err(Error::InvalidDrive(format!(
                "switching frequency must be positive and finite, got {f_s}"
            )));
        }
        let drive = Self {
            kind,
            f_s,
            k,
            fixed_phase,
        };
        if kind == DriveKind::ConstantPhase
            && !(fixed_phase >= T::zero() && fixed_phase <= drive.amplitude())
        {
            return Err(Error::InvalidDrive(format!(
                "fixed phase {fixed_phase} outside [0, kπ/2]"
            )));
        }
        Ok(drive)
    }

    pub fn square(f_s: T, k: u32) -> Result<Self> {
        Self::new(DriveKind::SquareWave, f_s, k, T::zero())
    }

    pub fn sinusoidal(f_s: T, k: u32) -> Result<Self> {
        Self::new(DriveKind::Sinusoidal, f_s, k, T::zero())
    }

    pub fn constant(phase: T, k: u32) -> Result<Self> {
        Self::new(DriveKind::ConstantPhase, T::zero(), k, phase)
    }

    pub fn kind(&self) -> DriveKind {
        self.kind
    }

    pub fn f_s(&self) -> T {
        self.f_s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn fixed_phase(&self) -> T {
        self.fixed_phase
    }

    /// `kπ/2`.
    pub fn amplitude(&self) -> T {
        T::from_u32(self.k).expect("k representable") * T::FRAC_PI_2()
    }

    /// `T_s = 1/f_s` for periodic kinds.
    pub fn period(&self) -> Option<T> {
        self.kind.is_periodic().then(|| T::one() / self.f_s)
    }

    pub fn phase_at(&self, t: T) -> T {
        match self.kind {
            DriveKind::SquareWave => {
                // θ(sin(2π f_s t)) with θ(0) = 0: on for the open first half of each period
                let frac = (t * self.f_s).fract();
                let frac = if frac < T::zero() { frac + T::one() } else { frac };
                if frac > T::zero() && frac < T::lit(0.5) {
                    self.amplitude()
                } else {
                    T::zero()
                }
            }
            DriveKind::Sinusoidal => {
                let half = T::lit(0.5);
                self.amplitude() * (half + half * (T::TAU() * self.f_s * t).cos())
            }
            DriveKind::ConstantPhase => self.fixed_phase,
        }
    }

    /// Switching instants `m·T_s/2` strictly inside `(t0, t1)`, ascending.
    pub fn discontinuities(&self, t0: T, t1: T) -> Result<Vec<T>> {
        if !(t0 < t1) {
            return Err(Error::EmptyInterval {
                t0: t0.to_f64_lossy(),
                t1: t1.to_f64_lossy(),
            });
        }
        if self.kind != DriveKind::SquareWave {
            return Ok(Vec::new());
        }
        let rate = T::lit(2.0) * self.f_s;
        let first = (t0 * rate).floor().to_i64().unwrap_or(0);
        let mut out = Vec::new();
        let mut m = first;
        loop {
            let t = T::from_i64(m).expect("index representable") / rate;
            if t >= t1 {
                break;
            }
            if t > t0 {
                out.push(t);
            }
            m += 1;
        }
        Ok(out)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, DriveKind::SquareWave | DriveKind::ConstantPhase)
    }
}
