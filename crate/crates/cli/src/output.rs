//! Run directories: snapshots, diagnostics, gnuplot profiles and the
//! manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use coalkin_core::{run, DensityField, Error, RunOutput, Scenario, ScenarioFile, Snapshot, TimeConfig};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: ScenarioFile,
    pub output_dir: String,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub enlargements: Vec<EnlargementEntry>,
    pub clamped_nodes: usize,
}

#[derive(Debug, Serialize)]
pub struct EnlargementEntry {
    pub t: f64,
    pub side: coalkin_core::Side,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(Error::from)?))
}

pub fn snapshot_name(t: f64) -> String {
    format!("snap_T{t}.csv")
}

fn write_snapshots(snaps: &[Snapshot], dir: &Path, files: &mut Vec<String>) -> Result<()> {
    for s in snaps {
        let name = snapshot_name(s.t);
        let mut w = create(&dir.join(&name))?;
        s.field.write_csv(&mut w)?;
        w.flush().map_err(Error::from)?;
        files.push(name);
    }
    Ok(())
}

/// Columns `x, ρ_{T1}, ρ_{T2}, …` on the lattice of the last snapshot.
/// Earlier snapshots on smaller domains contribute their ghost values
/// outside their own domain.
fn write_profiles(snaps: &[Snapshot], path: &Path) -> Result<()> {
    let Some(last) = snaps.last() else {
        return Ok(());
    };
    let grid = *last.field.grid();
    let mut w = create(path)?;
    let head: Vec<String> = snaps.iter().map(|s| format!("T={}", s.t)).collect();
    writeln!(w, "# x {}", head.join(" ")).map_err(Error::from)?;
    for x in grid.nodes() {
        write!(w, "{x}").map_err(Error::from)?;
        for s in snaps {
            write!(w, " {}", value_at(&s.field, x)).map_err(Error::from)?;
        }
        writeln!(w).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn value_at(f: &DensityField, x: f64) -> f64 {
    f.interpolate(x)
}

fn write_manifest(s: &Scenario, dir: &Path, files: Vec<String>, out: &RunOutput, started: Instant) -> Result<RunManifest> {
    let mut versions = BTreeMap::new();
    versions.insert("coalkin-core", coalkin_core::VERSION);
    versions.insert("coalkin-cli", env!("CARGO_PKG_VERSION"));
    let mut manifest = RunManifest {
        config: s.to_file(),
        output_dir: dir.display().to_string(),
        files,
        wall_clock_seconds: 0.0,
        versions,
        enlargements: out
            .final_state
            .enlargements
            .iter()
            .map(|e| EnlargementEntry { t: e.t, side: e.side })
            .collect(),
        clamped_nodes: out.final_state.total_clamped,
    };
    manifest.files.push("manifest.json".to_string());
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let mut w = create(&dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(Error::from)?;
    writeln!(w).map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    Ok(manifest)
}

fn run_into(s: &Scenario, tc: &TimeConfig, model: &coalkin_core::ModelConfig, dir: &Path, profiles: bool) -> Result<(RunOutput, Vec<String>)> {
    fs::create_dir_all(dir).map_err(Error::from)?;
    let out = run(s.initial_field()?, model, tc)?;
    let mut files = Vec::new();
    write_snapshots(&out.snapshots, dir, &mut files)?;
    let mut w = create(&dir.join("diagnostics.csv"))?;
    out.diagnostics.write_csv(&mut w)?;
    w.flush().map_err(Error::from)?;
    files.push("diagnostics.csv".to_string());
    if profiles {
        write_profiles(&out.snapshots, &dir.join("profiles.dat"))?;
        files.push("profiles.dat".to_string());
    }
    Ok((out, files))
}

/// Executes one scenario file into `dir`.
pub fn run_scenario(s: &Scenario, dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let (out, files) = run_into(s, &s.time, &s.model, dir, false)?;
    write_manifest(s, dir, files, &out, started)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

/// Runs a registry scenario and its variants, one simulation per worker.
/// Returns the number of files written.
pub fn reproduce_scenario(s: &Scenario, dir: &Path) -> Result<usize> {
    let started = Instant::now();
    let mut base_tc = s.time.clone();
    base_tc.diagnostics_stride = ((1.0 / base_tc.dt).round() as u64).max(1);

    let mut jobs: Vec<(std::path::PathBuf, TimeConfig, coalkin_core::ModelConfig)> =
        vec![(dir.to_path_buf(), base_tc.clone(), s.model)];
    for v in &s.variants {
        let mut tc = s.variant_time(v);
        tc.diagnostics_stride = base_tc.diagnostics_stride;
        jobs.push((dir.join(format!("variant_{}", sanitize(&v.label))), tc, v.model));
    }
    let results: Vec<Result<(RunOutput, Vec<String>)>> = jobs
        .par_iter()
        .map(|(d, tc, m)| run_into(s, tc, m, d, true))
        .collect();
    let mut files = Vec::new();
    let mut base_out = None;
    for ((d, _, _), r) in jobs.iter().zip(results) {
        let (out, names) = r?;
        let rel = d.strip_prefix(dir).unwrap_or(d);
        files.extend(names.into_iter().map(|n| rel.join(n).display().to_string()));
        if base_out.is_none() {
            base_out = Some(out);
        }
    }
    let out = base_out.expect("base run is the first job");
    let manifest = write_manifest(s, dir, files, &out, started)?;
    Ok(manifest.files.len())
}
