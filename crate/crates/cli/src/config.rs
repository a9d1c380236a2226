//! Flat `section.key = value` run configuration.
//!
//! Every key has a default (the reference circuit and the standard sweep
//! settings), so an empty file is a complete configuration. Unknown keys,
//! duplicate keys and unparsable values are errors. [`RunConfig::to_text`]
//! writes every key back in canonical order, and parsing that text yields the
//! same configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use lambsim::{default_constants, CircuitConstants, DriveKind, Method};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSection {
    pub k: u32,
    pub e_jq_ghz: f64,
    pub e_j1_ghz: f64,
    pub e_j2_ghz: f64,
    pub c_ff: f64,
    pub c_q_ff: f64,
    pub l_nh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSection {
    pub kind: DriveKind,
    /// `None` means the time-averaged frequency sum of the drive kind.
    pub f_s_ghz: Option<f64>,
    /// Phase of the constant drive, radians.
    pub fixed_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSection {
    pub t_total_ns: f64,
    pub dt_ns: f64,
    pub sample_stride: usize,
    /// `None` picks exact propagation for piecewise-constant drives and RK4 otherwise.
    pub method: Option<Method>,
    pub renorm_tol: f64,
    pub cache_propagators: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub points: usize,
    /// Grid bounds as multiples of the frequency sum.
    pub lo_factor: f64,
    pub hi_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub n_max: usize,
    pub drive: DriveSection,
    pub evolve: EvolveSection,
    pub sweep: SweepSection,
    /// Number of phases in the `params` grid over `[0, kπ/2]`.
    pub params_points: usize,
    pub output_dir: PathBuf,
}

/// All keys, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "circuit.k",
    "circuit.e_jq_ghz",
    "circuit.e_j1_ghz",
    "circuit.e_j2_ghz",
    "circuit.c_ff",
    "circuit.c_q_ff",
    "circuit.l_nh",
    "space.n_max",
    "drive.kind",
    "drive.f_s_ghz",
    "drive.fixed_phase",
    "evolve.t_total_ns",
    "evolve.dt_ns",
    "evolve.sample_stride",
    "evolve.method",
    "evolve.renorm_tol",
    "evolve.cache_propagators",
    "sweep.points",
    "sweep.lo_factor",
    "sweep.hi_factor",
    "params.points",
    "output.dir",
];

impl Default for RunConfig {
    fn default() -> Self {
        let c: CircuitConstants = default_constants();
        Self {
            circuit: CircuitSection {
                k: c.k,
                e_jq_ghz: c.e_jq,
                e_j1_ghz: c.e_j1,
                e_j2_ghz: c.e_j2,
                c_ff: c.c,
                c_q_ff: c.c_q,
                l_nh: c.l,
            },
            n_max: 8,
            drive: DriveSection {
                kind: DriveKind::SquareWave,
                f_s_ghz: None,
                fixed_phase: 0.0,
            },
            evolve: EvolveSection {
                t_total_ns: 2000.0,
                dt_ns: 1e-4,
                sample_stride: 10_000,
                method: None,
                renorm_tol: 1e-8,
                cache_propagators: true,
            },
            sweep: SweepSection {
                points: 101,
                lo_factor: 0.75,
                hi_factor: 1.25,
            },
            params_points: 101,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub fn method_name(method: Option<Method>) -> &'static str {
    method.map_or("auto", Method::name)
}

impl RunConfig {
    pub fn circuit_constants(&self) -> lambsim::Result<CircuitConstants> {
        let c = &self.circuit;
        CircuitConstants::new(c.k, c.e_jq_ghz, c.e_j1_ghz, c.e_j2_ghz, c.c_ff, c.c_q_ff, c.l_nh)
    }

    /// Value of `key` as written in the resolved config.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "circuit.k" => self.circuit.k.to_string(),
            "circuit.e_jq_ghz" => self.circuit.e_jq_ghz.to_string(),
            "circuit.e_j1_ghz" => self.circuit.e_j1_ghz.to_string(),
            "circuit.e_j2_ghz" => self.circuit.e_j2_ghz.to_string(),
            "circuit.c_ff" => self.circuit.c_ff.to_string(),
            "circuit.c_q_ff" => self.circuit.c_q_ff.to_string(),
            "circuit.l_nh" => self.circuit.l_nh.to_string(),
            "space.n_max" => self.n_max.to_string(),
            "drive.kind" => self.drive.kind.to_string(),
            "drive.f_s_ghz" => self.drive.f_s_ghz.map_or_else(|| "auto".into(), |f| f.to_string()),
            "drive.fixed_phase" => self.drive.fixed_phase.to_string(),
            "evolve.t_total_ns" => self.evolve.t_total_ns.to_string(),
            "evolve.dt_ns" => self.evolve.dt_ns.to_string(),
            "evolve.sample_stride" => self.evolve.sample_stride.to_string(),
            "evolve.method" => method_name(self.evolve.method).into(),
            "evolve.renorm_tol" => self.evolve.renorm_tol.to_string(),
            "evolve.cache_propagators" => self.evolve.cache_propagators.to_string(),
            "sweep.points" => self.sweep.points.to_string(),
            "sweep.lo_factor" => self.sweep.lo_factor.to_string(),
            "sweep.hi_factor" => self.sweep.hi_factor.to_string(),
            "params.points" => self.params_points.to_string(),
            "output.dir" => self.output_dir.display().to_string(),
            _ => return None,
        };
        Some(v)
    }

    /// Sets `key` from its textual value. `line` is only used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let p = Parser { key, value, line };
        match key {
            "circuit.k" => self.circuit.k = p.at_least(p.int::<u32>()?, 1)?,
            "circuit.e_jq_ghz" => self.circuit.e_jq_ghz = p.positive()?,
            "circuit.e_j1_ghz" => self.circuit.e_j1_ghz = p.positive()?,
            "circuit.e_j2_ghz" => self.circuit.e_j2_ghz = p.positive()?,
            "circuit.c_ff" => self.circuit.c_ff = p.positive()?,
            "circuit.c_q_ff" => self.circuit.c_q_ff = p.positive()?,
            "circuit.l_nh" => self.circuit.l_nh = p.positive()?,
            "space.n_max" => self.n_max = p.at_least(p.int::<usize>()?, 1)?,
            "drive.kind" => {
                self.drive.kind = value
                    .parse()
                    .map_err(|_| p.malformed("expected square, sinusoidal or constant"))?
            }
            "drive.f_s_ghz" => self.drive.f_s_ghz = if value == "auto" { None } else { Some(p.positive()?) },
            "drive.fixed_phase" => self.drive.fixed_phase = p.float()?,
            "evolve.t_total_ns" => self.evolve.t_total_ns = p.positive()?,
            "evolve.dt_ns" => self.evolve.dt_ns = p.positive()?,
            "evolve.sample_stride" => self.evolve.sample_stride = p.at_least(p.int::<usize>()?, 1)?,
            "evolve.method" => {
                self.evolve.method = match value {
                    "auto" => None,
                    "exact" => Some(Method::PiecewiseExact),
                    "rk4" => Some(Method::Rk4),
                    _ => return Err(p.malformed("expected auto, exact or rk4")),
                }
            }
            "evolve.renorm_tol" => self.evolve.renorm_tol = p.positive()?,
            "evolve.cache_propagators" => {
                self.evolve.cache_propagators = value.parse().map_err(|_| p.malformed("expected true or false"))?
            }
            "sweep.points" => self.sweep.points = p.at_least(p.int::<usize>()?, 1)?,
            "sweep.lo_factor" => self.sweep.lo_factor = p.positive()?,
            "sweep.hi_factor" => self.sweep.hi_factor = p.positive()?,
            "params.points" => self.params_points = p.at_least(p.int::<usize>()?, 1)?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            _ => {
                return Err(CliError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Checks relations between keys.
    pub fn validate(&self) -> Result<()> {
        if self.sweep.lo_factor >= self.sweep.hi_factor {
            return Err(CliError::OutOfRange {
                key: "sweep.lo_factor".into(),
                msg: format!(
                    "must be below sweep.hi_factor ({} >= {})",
                    self.sweep.lo_factor, self.sweep.hi_factor
                ),
            });
        }
        Ok(())
    }

    /// The fully resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("listed key"));
        }
        out
    }
}

/// Parses config text over the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Malformed {
                line,
                msg: format!("expected `section.key = value`, got {content:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(CliError::Malformed {
                line,
                msg: format!("missing value for {key}"),
            });
        }
        if !KEYS.contains(&key) {
            return Err(CliError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(CliError::Malformed {
                line,
                msg: format!("duplicate key {key}"),
            });
        }
        cfg.set(key, value, line)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Parser<'a> {
    key: &'a str,
    value: &'a str,
    line: usize,
}

impl Parser<'_> {
    fn malformed(&self, what: &str) -> CliError {
        CliError::Malformed {
            line: self.line,
            msg: format!("{}: {what}, got {:?}", self.key, self.value),
        }
    }

    fn out_of_range(&self, what: &str) -> CliError {
        CliError::OutOfRange {
            key: self.key.to_string(),
            msg: format!("{what}, got {}", self.value),
        }
    }

    fn float(&self) -> Result<f64> {
        let v: f64 = self.value.parse().map_err(|_| self.malformed("expected a number"))?;
        if !v.is_finite() {
            return Err(self.malformed("expected a finite number"));
        }
        Ok(v)
    }

    fn positive(&self) -> Result<f64> {
        let v = self.float()?;
        if v <= 0.0 {
            return Err(self.out_of_range("must be positive"));
        }
        Ok(v)
    }

    fn int<I: std::str::FromStr + TryFrom<i128>>(&self) -> Result<I> {
        // parse wide first so "-1" is a range error, not a syntax error
        let wide: i128 = self.value.parse().map_err(|_| self.malformed("expected an integer"))?;
        I::try_from(wide).map_err(|_| self.out_of_range("integer out of range"))
    }

    fn at_least<I: PartialOrd + std::fmt::Display>(&self, v: I, min: I) -> Result<I> {
        if v < min {
            return Err(self.out_of_range(&format!("must be at least {min}")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips_through_get_and_set() {
        let cfg = RunConfig::default();
        let mut copy = RunConfig::default();
        for key in KEYS {
            let v = cfg.get(key).unwrap();
            copy.set(key, &v, 1).unwrap();
        }
        assert_eq!(cfg, copy);
        assert!(cfg.get("space.nmax").is_none());
    }

    #[test]
    fn inline_comments_and_blank_lines() {
        let cfg = parse_config("# header\n\n  space.n_max = 3   # small\n").unwrap();
        assert_eq!(cfg.n_max, 3);
    }

    #[test]
    fn duplicate_key_is_malformed() {
        let err = parse_config("space.n_max = 3\nspace.n_max = 4\n").unwrap_err();
        assert!(matches!(err, CliError::Malformed { line: 2, .. }));
    }

    #[test]
    fn negative_integer_is_a_range_error() {
        let err = parse_config("space.n_max = -1").unwrap_err();
        assert!(matches!(err, CliError::OutOfRange { .. }));
        let err = parse_config("space.n_max = 1.5").unwrap_err();
        assert!(matches!(err, CliError::Malformed { .. }));
    }

    #[test]
    fn lo_factor_must_be_below_hi_factor() {
        let err = parse_config("sweep.lo_factor = 1.3").unwrap_err();
        assert!(matches!(err, CliError::OutOfRange { .. }));
    }
}
