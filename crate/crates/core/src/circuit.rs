//! Flux-dependent Hamiltonian parameters of the tunable-coupler circuit.
//!
//! Units throughout: energies are `E/h` in GHz, frequencies are ordinary
//! (cycles) in GHz, capacitances in fF, inductance in nH. The external flux
//! enters as the phase `phi_x = 2π Φ_x / Φ_0`; the coupling switches between
//! transverse (`phi_x = 0`) and longitudinal (`phi_x = kπ/2`).
//!
//! The zero-point flux of the resonator is `(ħ² L / (C (1+η)))^{1/4}`, so
//! every appearance of `(π/Φ_0)·(L/(C(1+η)))^{1/4}` becomes the dimensionless
//! half zero-point phase `θ/2 · (1+η)^{-1/4}` with `θ² = 8π Z / R_K`.

use crate::error::{Error, Result};
use crate::scalar::{quadrant_cos_sin, Real};

/// CODATA 2019 exact SI constants.
pub mod si {
    /// Planck constant, J·s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    /// Superconducting flux quantum h/2e, Wb.
    pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
    /// von Klitzing constant h/e², Ω.
    pub const VON_KLITZING: f64 = PLANCK / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);
}

/// Lumped-element constants of the circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitConstants<T> {
    /// Josephson junctions per branch.
    pub k: u32,
    /// Qubit junction energy, GHz.
    pub e_jq: T,
    pub e_j1: T,
    pub e_j2: T,
    /// Loop capacitance, fF.
    pub c: T,
    /// Qubit capacitance, fF.
    pub c_q: T,
    /// Loop inductance, nH.
    pub l: T,
}

/// Which set-point of the square-wave flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `phi_x = 0`: `g_xx`, `g_zz` on; `g_zx`, `g_xz` off.
    Transverse,
    /// `phi_x = kπ/2`: `g_zx`, `g_xz` on; `g_xx`, `g_zz` off.
    Longitudinal,
}

/// The Hamiltonian parameters at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InstantParams<T> {
    pub eta: T,
    pub e_c: T,
    pub e_jq_star: T,
    pub f_r: T,
    pub f_0: T,
    pub g_xx: T,
    pub g_zz: T,
    pub g_zx: T,
    pub g_xz: T,
}

impl<T: Real> InstantParams<T> {
    pub const FIELD_NAMES: [&'static str; 9] = [
        "eta", "E_c", "E_Jq_star", "f_r", "f_0", "g_xx", "g_zz", "g_zx", "g_xz",
    ];

    /// Values in `FIELD_NAMES` order.
    pub fn to_array(&self) -> [T; 9] {
        [
            self.eta,
            self.e_c,
            self.e_jq_star,
            self.f_r,
            self.f_0,
            self.g_xx,
            self.g_zz,
            self.g_zx,
            self.g_xz,
        ]
    }
}

/// The circuit used throughout the reference calculations: k = 9,
/// E_Jq = 10 GHz, E_J1 = 81.6 GHz, E_J2 = 78.4 GHz, C = 102 fF,
/// C_q = 60 fF, L = 5 nH.
pub fn default_constants<T: Real>() -> CircuitConstants<T> {
    CircuitConstants {
        k: 9,
        e_jq: T::lit(10.0),
        e_j1: T::lit(81.6),
        e_j2: T::lit(78.4),
        c: T::lit(102.0),
        c_q: T::lit(60.0),
        l: T::lit(5.0),
    }
}

impl<T: Real> Default for CircuitConstants<T> {
    fn default() -> Self {
        default_constants()
    }
}

impl<T: Real> CircuitConstants<T> {
    pub fn new(k: u32, e_jq: T, e_j1: T, e_j2: T, c: T, c_q: T, l: T) -> Result<Self> {
        let out = Self {
            k,
            e_jq,
            e_j1,
            e_j2,
            c,
            c_q,
            l,
        };
        out.validate()?;
        Ok(out)
    }

    /// Checks positivity and that `eta > -1` holds at every flux phase.
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConstants("k must be at least 1".into()));
        }
        let named = [
            ("E_Jq", self.e_jq),
            ("E_J1", self.e_j1),
            ("E_J2", self.e_j2),
            ("C", self.c),
            ("C_q", self.c_q),
            ("L", self.l),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidConstants(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        let amp = self.eta_amplitude();
        if amp >= T::one() {
            return Err(Error::InvalidConstants(format!(
                "eta amplitude {amp} >= 1 makes the resonator frequency imaginary near phi_x/k = π"
            )));
        }
        Ok(())
    }

    pub fn k_t(&self) -> T {
        T::from_u32(self.k).expect("k representable")
    }

    /// Set-point amplitude `kπ/2`.
    pub fn longitudinal_phase(&self) -> T {
        self.k_t() * T::FRAC_PI_2()
    }

    pub fn regime_phase(&self, regime: Regime) -> T {
        match regime {
            Regime::Transverse => T::zero(),
            Regime::Longitudinal => self.longitudinal_phase(),
        }
    }

    /// Flux quantum, Wb.
    pub fn phi0(&self) -> f64 {
        si::FLUX_QUANTUM
    }

    /// Charging energy `e²/(2C_q + C)`, GHz.
    pub fn charging_energy(&self) -> T {
        // e²/h in S, scaled by 1e-9 (GHz) / 1e-15 (fF)
        T::lit(1e6 / si::VON_KLITZING) / (T::lit(2.0) * self.c_q + self.c)
    }

    /// Inductive energy `(Φ_0/2π)²/L`, GHz.
    pub fn inductive_energy(&self) -> T {
        T::lit(si::VON_KLITZING / (16.0 * std::f64::consts::PI * std::f64::consts::PI)) / self.l
    }

    /// Bare LC frequency `1/(2π√(LC))`, GHz.
    pub fn lc_frequency(&self) -> T {
        T::lit(1e3) / (T::TAU() * (self.l * self.c).sqrt())
    }

    /// Half of the resonator zero-point phase at `eta = 0`, i.e.
    /// `(π/Φ_0)(ħ² L / C)^{1/4}`.
    pub fn half_zpf_phase(&self) -> T {
        let z = (self.l / self.c * T::lit(1e6)).sqrt();
        let theta_sq = T::lit(8.0) * T::PI() * z / T::lit(si::VON_KLITZING);
        theta_sq.sqrt() / T::lit(2.0)
    }

    /// `(E_J1 + E_J2) / (2k) · (2π/Φ_0)² L`: the value of `eta` at `phi_x = 0`.
    pub fn eta_amplitude(&self) -> T {
        (self.e_j1 + self.e_j2) / (T::lit(2.0) * self.k_t()) / self.inductive_energy()
    }

    /// All nine parameters at flux phase `phi_x`.
    pub fn instant_params(&self, phi_x: T) -> Result<InstantParams<T>> {
        ParamKernel::new(self).eval(phi_x)
    }

    /// Closed-form parameters at the two square-wave set-points.
    pub fn limit_params(&self, regime: Regime) -> InstantParams<T> {
        let two = T::lit(2.0);
        let k = self.k_t();
        let k2 = k * k;
        let e_l = self.inductive_energy();
        let e_c = self.charging_energy();
        let delta = self.e_j1 - self.e_j2;
        let h = self.half_zpf_phase();

        match regime {
            Regime::Transverse => {
                let eta = self.eta_amplitude();
                let one_eta = T::one() + eta;
                let e_jq_star = self.e_jq + e_l * one_eta / two;
                let ratio = two * e_c / e_jq_star;
                InstantParams {
                    eta,
                    e_c,
                    e_jq_star,
                    f_r: self.lc_frequency() * one_eta.sqrt(),
                    f_0: (T::lit(8.0) * e_c * e_jq_star).sqrt()
                        - e_c * (self.e_jq + e_l * eta / (two * k2)) / e_jq_star,
                    g_xx: delta / (two * k2) * ratio.sqrt().sqrt() * (h / one_eta.sqrt().sqrt()),
                    g_zz: -delta / (T::lit(16.0) * k2 * k)
                        * ratio.sqrt()
                        * (h * h / one_eta.sqrt()),
                    g_zx: T::zero(),
                    g_xz: T::zero(),
                }
            }
            Regime::Longitudinal => {
                let e_jq_star = self.e_jq + e_l / two;
                let ratio = two * e_c / e_jq_star;
                InstantParams {
                    eta: T::zero(),
                    e_c,
                    e_jq_star,
                    f_r: self.lc_frequency(),
                    f_0: (T::lit(8.0) * e_c * e_jq_star).sqrt() - e_c * self.e_jq / e_jq_star,
                    g_xx: T::zero(),
                    g_zz: T::zero(),
                    g_zx: -delta / (T::lit(8.0) * k2) * ratio.sqrt() * h,
                    g_xz: -delta / (T::lit(4.0) * k2) * ratio.sqrt().sqrt() * (h * h),
                }
            }
        }
    }
}

/// Flux-independent factors of [`CircuitConstants::instant_params`],
/// hoisted for repeated evaluation along a drive.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamKernel<T> {
    k: T,
    e_jq: T,
    e_l: T,
    e_c: T,
    eta_amp: T,
    f_lc: T,
    zpf: T,
    /// `-E_c E_L / (2k²)`
    f0_eta: T,
    g_xx: T,
    g_zz: T,
    g_zx: T,
    g_xz: T,
}

impl<T: Real> ParamKernel<T> {
    pub(crate) fn new(c: &CircuitConstants<T>) -> Self {
        let two = T::lit(2.0);
        let k = c.k_t();
        let k2 = k * k;
        let delta = c.e_j1 - c.e_j2;
        let e_l = c.inductive_energy();
        let e_c = c.charging_energy();
        Self {
            k,
            e_jq: c.e_jq,
            e_l,
            e_c,
            eta_amp: c.eta_amplitude(),
            f_lc: c.lc_frequency(),
            zpf: c.half_zpf_phase(),
            f0_eta: e_l / (two * k2),
            g_xx: delta / (two * k2),
            g_zz: -delta / (T::lit(16.0) * k2 * k),
            g_zx: -delta / (T::lit(8.0) * k2),
            g_xz: -delta / (T::lit(4.0) * k2),
        }
    }

    pub(crate) fn eval(&self, phi_x: T) -> Result<InstantParams<T>> {
        if !phi_x.is_finite() {
            return Err(Error::NonFinitePhase(phi_x.to_f64_lossy()));
        }
        let (cos, sin) = quadrant_cos_sin(phi_x / self.k);
        let two = T::lit(2.0);
        let e_c = self.e_c;

        let eta = self.eta_amp * cos;
        let one_eta = T::one() + eta;
        let e_jq_star = self.e_jq + self.e_l * one_eta / two;
        if !(eta > -T::one()) || !(e_jq_star > T::zero()) {
            return Err(Error::Unphysical {
                phi_x: phi_x.to_f64_lossy(),
                eta: eta.to_f64_lossy(),
                e_jq_star: e_jq_star.to_f64_lossy(),
            });
        }

        let sqrt_one_eta = one_eta.sqrt();
        let f_r = self.f_lc * sqrt_one_eta;
        let f_0 = (T::lit(8.0) * e_c * e_jq_star).sqrt() - e_c * (self.e_jq + self.f0_eta * eta) / e_jq_star;

        let ratio_h = (two * e_c / e_jq_star).sqrt();
        let ratio_q = ratio_h.sqrt();
        // (π/Φ_0)·Φ_zpf and its square
        let zpf = self.zpf / sqrt_one_eta.sqrt();
        let zpf_sq = self.zpf * self.zpf / sqrt_one_eta;

        Ok(InstantParams {
            eta,
            e_c,
            e_jq_star,
            f_r,
            f_0,
            g_xx: self.g_xx * ratio_q * zpf * cos,
            g_zz: self.g_zz * ratio_h * zpf_sq * cos,
            g_zx: self.g_zx * ratio_h * zpf * sin,
            g_xz: self.g_xz * ratio_q * zpf_sq * sin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn defaults() -> CircuitConstants<f64> {
        default_constants()
    }

    #[test]
    fn default_values() {
        let c = defaults();
        assert_eq!(c.k, 9);
        assert_eq!(c.l, 5.0);
        assert_relative_eq!(c.e_j1 - c.e_j2, 3.2, max_relative = 1e-12);
        assert_relative_eq!(c.phi0(), 2.067_833_848e-15, max_relative = 1e-9);
        assert_relative_eq!(
            si::FLUX_QUANTUM,
            si::PLANCK / (2.0 * si::ELEMENTARY_CHARGE),
            max_relative = 1e-12
        );
        c.validate().unwrap();
    }

    #[test]
    fn transverse_checkpoint() {
        let p = defaults().instant_params(0.0).unwrap();
        assert!((p.eta - 0.2719).abs() < 5e-4, "{}", p.eta);
        assert!((p.f_r - 7.95).abs() < 5e-3, "{}", p.f_r);
        assert!((p.f_0 - 6.50).abs() < 5e-3, "{}", p.f_0);
        assert_eq!(p.g_zx, 0.0);
        assert_eq!(p.g_xz, 0.0);
    }

    #[test]
    fn longitudinal_checkpoint() {
        let c = defaults();
        let p = c.instant_params(c.longitudinal_phase()).unwrap();
        assert_eq!(p.eta, 0.0);
        assert_eq!(p.g_xx, 0.0);
        assert_eq!(p.g_zz, 0.0);
        assert!((p.f_r - 7.05).abs() < 5e-3, "{}", p.f_r);
        assert!((p.f_0 - 6.00).abs() < 5e-3, "{}", p.f_0);
    }

    #[test]
    fn equal_junctions_decouple() {
        let mut c = defaults();
        c.e_j2 = c.e_j1;
        for phi in [0.0, 1.0, 7.3, c.longitudinal_phase()] {
            let p = c.instant_params(phi).unwrap();
            assert_eq!([p.g_xx, p.g_zz, p.g_zx, p.g_xz], [0.0; 4]);
        }
    }

    #[test]
    fn limits_forced_zeros() {
        let c = defaults();
        let l = c.limit_params(Regime::Longitudinal);
        assert_eq!((l.eta, l.g_xx, l.g_zz), (0.0, 0.0, 0.0));
        let t = c.limit_params(Regime::Transverse);
        assert_eq!((t.g_zx, t.g_xz), (0.0, 0.0));
        // at each set-point one of the pair vanishes
        assert_eq!(t.g_xx * t.g_zx, 0.0);
        assert_eq!(l.g_xx * l.g_zx, 0.0);
    }

    #[test]
    fn rejects_bad_constants() {
        let mut c = defaults();
        c.k = 0;
        assert!(c.validate().is_err());
        let mut c = defaults();
        c.c = -1.0;
        assert!(c.validate().is_err());
        // eta amplitude pushed above one
        let mut c = defaults();
        c.l = 50.0;
        assert!(matches!(c.validate(), Err(Error::InvalidConstants(_))));
        assert!(matches!(c.instant_params(c.k_t() * std::f64::consts::PI), Err(Error::Unphysical { .. })));
        assert!(matches!(defaults().instant_params(f64::NAN), Err(Error::NonFinitePhase(_))));
    }

    #[test]
    fn f32_pipeline_tracks_f64() {
        let c32: CircuitConstants<f32> = default_constants();
        let c64 = defaults();
        let p32 = c32.instant_params(0.0).unwrap().to_array();
        let p64 = c64.instant_params(0.0).unwrap().to_array();
        for (a, b) in p32.iter().zip(p64) {
            assert!(((*a as f64) - b).abs() <= 1e-5 * b.abs().max(1e-12), "{a} vs {b}");
        }
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()) || a == b
    }

    fn arb_constants() -> impl Strategy<Value = CircuitConstants<f64>> {
        (1u32..16, 1.0..30.0f64, 20.0..120.0f64, 0.0..10.0f64, 30.0..200.0f64, 20.0..120.0f64, 0.5..8.0f64).prop_filter_map(
            "physical",
            |(k, ejq, ej1, d, c, cq, l)| CircuitConstants::new(k, ejq, ej1, ej1 - d.min(ej1 - 1.0), c, cq, l).ok(),
        )
    }

    proptest! {
        #[test]
        fn limits_match_instant(c in arb_constants()) {
            for regime in [Regime::Transverse, Regime::Longitudinal] {
                let a = c.limit_params(regime).to_array();
                let b = c.instant_params(c.regime_phase(regime)).unwrap().to_array();
                for (x, y) in a.iter().zip(b) {
                    prop_assert!(rel_close(*x, y, 1e-12), "{regime:?}: {x} vs {y}");
                }
            }
        }

        #[test]
        fn couplings_linear_in_junction_asymmetry(c in arb_constants(), phi in 0.0..20.0f64) {
            let sum = c.e_j1 + c.e_j2;
            let half = (c.e_j1 - c.e_j2) / 2.0;
            prop_assume!(half > 1e-3 && 2.0 * half < sum / 2.0 - 1e-3);
            let mut c2 = c;
            c2.e_j1 = sum / 2.0 + 2.0 * half;
            c2.e_j2 = sum / 2.0 - 2.0 * half;
            let p1 = c.instant_params(phi).unwrap();
            let p2 = c2.instant_params(phi).unwrap();
            for (g1, g2) in [(p1.g_xx, p2.g_xx), (p1.g_zz, p2.g_zz), (p1.g_zx, p2.g_zx), (p1.g_xz, p2.g_xz)] {
                prop_assert!(rel_close(2.0 * g1, g2, 1e-9) || (g1.abs() < 1e-300 && g2.abs() < 1e-300));
            }
            prop_assert!(rel_close(p1.f_0, p2.f_0, 1e-12));
        }

        #[test]
        fn phase_periodicity(c in arb_constants(), phi in -30.0..30.0f64) {
            let period = 2.0 * std::f64::consts::PI * c.k_t();
            let a = c.instant_params(phi).unwrap().to_array();
            let b = c.instant_params(phi + period).unwrap().to_array();
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
            }
        }

        #[test]
        fn eta_decreases_to_zero(c in arb_constants()) {
            let end = c.longitudinal_phase();
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let eta = c.instant_params(end * i as f64 / 100.0).unwrap().eta;
                prop_assert!(eta <= prev);
                prev = eta;
            }
            prop_assert_eq!(prev, 0.0);
        }
    }

    #[test]
    fn default_frequencies_positive_over_phase_range() {
        let c = defaults();
        for i in 0..=200 {
            let p = c.instant_params(c.longitudinal_phase() * i as f64 / 200.0).unwrap();
            assert!(p.f_r > 0.0 && p.f_0 > 0.0 && p.eta > -1.0);
        }
    }
}
