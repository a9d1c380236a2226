//! The four subcommands. Each writes its files into the output directory and
//! returns `key,value` summary lines for stdout.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lambsim::analysis::{find_resonance, linear_grid, p_excited, photon_distribution, sweep, time_avg_frequencies};
use lambsim::hamiltonian::{assemble, nonzero_structure};
use lambsim::propagate::{default_method, evolve_observed};
use lambsim::{
    CircuitConstants, DriveKind, DriveWaveform, EvolutionConfig, HilbertSpace, InstantParams, Regime,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::format::sig12;

type CsvWriter = csv::Writer<fs::File>;

fn csv_writer(path: &Path) -> Result<CsvWriter> {
    csv::Writer::from_path(path).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_row<I, S>(w: &mut CsvWriter, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn finish(mut w: CsvWriter, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn param_row(phi_x: f64, p: &InstantParams) -> Vec<String> {
    std::iter::once(phi_x)
        .chain(p.to_array())
        .map(sig12)
        .collect()
}

fn param_header() -> Vec<&'static str> {
    std::iter::once("phi_x").chain(InstantParams::FIELD_NAMES).collect()
}

/// Frequency sum `f̄_0 + f̄_r` for a periodic drive kind.
pub fn frequency_sum(constants: &CircuitConstants, kind: DriveKind) -> Result<f64> {
    let probe = DriveWaveform::new(kind, 1.0, constants.k, 0.0)?;
    let (f0, fr) = time_avg_frequencies(constants, &probe)?;
    Ok(f0 + fr)
}

/// The configured drive, resolving `drive.f_s_ghz = auto` to the frequency sum.
pub fn resolve_drive(cfg: &RunConfig, constants: &CircuitConstants) -> Result<DriveWaveform> {
    let kind = cfg.drive.kind;
    let f_s = match (kind.is_periodic(), cfg.drive.f_s_ghz) {
        (false, _) => 0.0,
        (true, Some(f)) => f,
        (true, None) => frequency_sum(constants, kind)?,
    };
    Ok(DriveWaveform::new(kind, f_s, constants.k, cfg.drive.fixed_phase)?)
}

pub fn evolution_config(cfg: &RunConfig, drive: &DriveWaveform) -> EvolutionConfig {
    let e = &cfg.evolve;
    EvolutionConfig {
        t_total: e.t_total_ns,
        dt: e.dt_ns,
        sample_stride: e.sample_stride,
        method: e.method.unwrap_or_else(|| default_method(drive)),
        renorm_tol: e.renorm_tol,
        cache_propagators: e.cache_propagators,
    }
}

/// `params.csv`: all nine parameters on a uniform grid over `[0, kπ/2]`.
pub fn params(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let constants = cfg.circuit_constants()?;
    let hi = constants.longitudinal_phase();
    let mut grid = linear_grid(0.0, hi, cfg.params_points);
    if let Some(last) = grid.last_mut() {
        if cfg.params_points > 1 {
            *last = hi;
        }
    }
    let path = dir.join("params.csv");
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, param_header())?;
    for &phi in &grid {
        let p = constants.instant_params(phi)?;
        write_row(&mut w, &path, param_row(phi, &p))?;
    }
    finish(w, &path)?;
    Ok(vec![format!("rows,{}", grid.len())])
}

/// `limits.csv` with both set-points and `limits_structure.csv` listing the
/// nonzero Hamiltonian entries at each of them.
pub fn limits(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let constants = cfg.circuit_constants()?;
    let space = HilbertSpace::new(cfg.n_max)?;

    let table_path = dir.join("limits.csv");
    let mut table = csv_writer(&table_path)?;
    let mut header = vec!["regime"];
    header.extend(param_header());
    write_row(&mut table, &table_path, header)?;

    let structure_path = dir.join("limits_structure.csv");
    let mut structure = csv_writer(&structure_path)?;
    write_row(&mut structure, &structure_path, ["regime", "row", "col", "re", "im"])?;

    let mut lines = Vec::new();
    for (name, regime, off) in [
        ("transverse", Regime::Transverse, [7, 8]),
        ("longitudinal", Regime::Longitudinal, [5, 6]),
    ] {
        let phi = constants.regime_phase(regime);
        let p = constants.limit_params(regime);
        let mut row = vec![name.to_string()];
        row.extend(param_row(phi, &p));
        write_row(&mut table, &table_path, row)?;

        let h = assemble(&space, &p);
        let entries = nonzero_structure(&h);
        for (r, c, z) in &entries {
            write_row(
                &mut structure,
                &structure_path,
                [
                    name.to_string(),
                    space.label(*r),
                    space.label(*c),
                    sig12(z.re),
                    sig12(z.im),
                ],
            )?;
        }

        let values = p.to_array();
        let forced_zero = off.iter().all(|&i| values[i] == 0.0);
        lines.push(format!(
            "{name},phi_x={},f_r={},f_0={},nonzero_entries={},forced_zeros_exact={forced_zero}",
            sig12(phi),
            sig12(p.f_r),
            sig12(p.f_0),
            entries.len(),
        ));
    }
    finish(table, &table_path)?;
    finish(structure, &structure_path)?;
    Ok(lines)
}

/// `trajectory.csv`: populations of `|g,0⟩` evolved under the configured drive.
pub fn evolve(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let constants = cfg.circuit_constants()?;
    let space = HilbertSpace::new(cfg.n_max)?;
    let drive = resolve_drive(cfg, &constants)?;
    let ec = evolution_config(cfg, &drive);

    let path = dir.join("trajectory.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["t_ns".to_string(), "p_e".to_string()];
    header.extend((0..=cfg.n_max).map(|n| format!("p_n{n}")));
    header.extend(["p_e1".to_string(), "norm".to_string()]);
    write_row(&mut w, &path, &header)?;

    let mut samples = 0usize;
    let mut max_p_e = 0.0_f64;
    let mut failure = None;
    evolve_observed(&space, &constants, &drive, &ec, &space.ground(), |t, psi, _| {
        if failure.is_some() {
            return;
        }
        let p_e = p_excited(psi);
        let dist = photon_distribution(psi);
        let mut row = vec![sig12(t), sig12(p_e)];
        row.extend(dist.p_n.iter().map(|p| sig12(*p)));
        row.push(sig12(dist.p_e1));
        row.push(sig12(psi.norm()));
        if let Err(e) = write_row(&mut w, &path, row) {
            failure = Some(e);
        }
        samples += 1;
        max_p_e = max_p_e.max(p_e);
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    finish(w, &path)?;
    Ok(vec![
        format!("drive,{}", drive.kind()),
        format!("f_s_ghz,{}", sig12(drive.f_s())),
        format!("method,{}", ec.method.name()),
        format!("samples,{samples}"),
        format!("max_p_e,{}", sig12(max_p_e)),
    ])
}

/// `sweep_pe.csv` and `sweep_ph.csv` over `[lo, hi]·S`, plus the resonance.
pub fn run_sweep(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let constants = cfg.circuit_constants()?;
    let space = HilbertSpace::new(cfg.n_max)?;
    let kind = cfg.drive.kind;
    if !kind.is_periodic() {
        return Err(lambsim::Error::InvalidGrid(format!("sweeps need a periodic drive, got {kind}")).into());
    }
    let sum = frequency_sum(&constants, kind)?;
    let grid = linear_grid(cfg.sweep.lo_factor * sum, cfg.sweep.hi_factor * sum, cfg.sweep.points);
    let probe = DriveWaveform::new(kind, grid[0], constants.k, 0.0)?;
    let ec = evolution_config(cfg, &probe);
    let result = sweep(&space, &constants, kind, &grid, &ec)?;

    let pe_path = dir.join("sweep_pe.csv");
    let mut pe = csv_writer(&pe_path)?;
    write_row(&mut pe, &pe_path, ["f_s_ghz", "t_ns", "p_e"])?;
    let ph_path = dir.join("sweep_ph.csv");
    let mut ph = csv_writer(&ph_path)?;
    write_row(&mut ph, &ph_path, ["f_s_ghz", "t_ns", "p_ph", "p_e1"])?;
    for (row, &f) in result.f_s.iter().enumerate() {
        for (col, &t) in result.times.iter().enumerate() {
            let (f, t) = (sig12(f), sig12(t));
            write_row(&mut pe, &pe_path, [f.clone(), t.clone(), sig12(result.p_e[row][col])])?;
            write_row(
                &mut ph,
                &ph_path,
                [f, t, sig12(result.p_ph[row][col]), sig12(result.p_e1[row][col])],
            )?;
        }
    }
    finish(pe, &pe_path)?;
    finish(ph, &ph_path)?;

    let resonance = find_resonance(&result);
    let row = result.row_of(resonance).expect("resonance is a grid point");
    Ok(vec![
        format!("resonance_f_s_ghz,{}", sig12(resonance)),
        format!("frequency_sum_ghz,{}", sig12(result.freq_sum())),
        format!("grid_spacing_ghz,{}", sig12(result.spacing())),
        format!("max_p_e,{}", sig12(result.max_p_e(row))),
        format!("method,{}", ec.method.name()),
    ])
}

/// Writes `resolved.conf` and `run_meta.txt`.
pub fn write_meta(cfg: &RunConfig, dir: &Path, command: &str, threads: usize, wall_s: f64) -> Result<()> {
    let resolved = cfg.to_text();
    write_file(&dir.join("resolved.conf"), &resolved)?;
    let meta = format!(
        "command = {command}\nlambsim_version = {}\nlambsim_cli_version = {}\nthreads = {threads}\nwall_time_s = {wall_s:.3}\n\n# resolved configuration\n{resolved}",
        lambsim::VERSION,
        env!("CARGO_PKG_VERSION"),
    );
    write_file(&dir.join("run_meta.txt"), &meta)
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}
