//! Executes an [`ExperimentConfig`] and writes its CSV and manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{fit_convergence, write_sweep_csv, ConvergenceFit, Sweep, SweepRecord, SWEEP_CSV_HEADER};
use crate::error::{Error, Result};
use crate::nodegen::{quality, NodeRole, NodeSet};
use crate::pde::GlobalSystem;

/// Bumped whenever a CSV layout or manifest field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const CONVERGENCE_CSV_HEADER: &str = "h,n,n_nodes,e_max_poiss,e_avg_poiss,e_max_lap,e_avg_lap";
pub const FIT_CSV_HEADER: &str = "n,slope,intercept,r_squared";
pub const IMEX_CSV_HEADER: &str = "n,imex_avg,wall_time_s";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub h: f64,
    pub total: usize,
    pub interior: usize,
    pub boundary: usize,
    /// Ghost nodes added for Neumann and Robin conditions.
    pub ghosts: usize,
    pub rho: f64,
    pub delta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

/// Everything needed to rerun an experiment and interpret its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub library_version: String,
    pub csv_header: String,
    pub config: ExperimentConfig,
    pub node_sets: Vec<NodeSummary>,
    pub timings: Timings,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    /// `(n, message)` for stencil sizes whose solve failed.
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n: usize,
    pub n_nodes: usize,
    pub e_max_poiss: f64,
    pub e_avg_poiss: f64,
    pub e_max_lap: f64,
    pub e_avg_lap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    /// Fit of `e_max_poiss` against `h`, per stencil size.
    pub fits: Vec<(usize, ConvergenceFit)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunData {
    Sweep(Vec<SweepRecord>),
    Convergence(ConvergenceResult),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub data: RunData,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn records(&self) -> Option<&[SweepRecord]> {
        match &self.data {
            RunData::Sweep(r) => Some(r),
            RunData::Convergence(_) => None,
        }
    }

    pub fn convergence(&self) -> Option<&ConvergenceResult> {
        match &self.data {
            RunData::Convergence(c) => Some(c),
            RunData::Sweep(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Write every assembled system and right-hand side as MatrixMarket.
    pub dump_system: bool,
    /// Progress lines on stderr.
    pub verbose: bool,
}

fn summarize(prepared: &NodeSet, raw: &NodeSet, config: &ExperimentConfig, h: f64) -> Result<NodeSummary> {
    let domain = config.domain.build()?;
    let dim = domain.dim();
    let density = ((2.0 * domain.diameter() / h).ceil() as usize).clamp(16, if dim == 3 { 60 } else { 400 });
    let q = quality(raw, &domain, density)?;
    Ok(NodeSummary {
        h,
        total: prepared.len(),
        interior: prepared.count(NodeRole::Interior),
        boundary: prepared.boundary_indices().len(),
        ghosts: prepared.count(NodeRole::Ghost),
        rho: q.rho,
        delta: q.delta,
        gamma: q.gamma,
    })
}

fn write_vector_market(v: &[f64], out: &mut impl Write) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} 1", v.len())?;
    for x in v {
        writeln!(out, "{x:.16e}")?;
    }
    Ok(())
}

fn dump(system: &GlobalSystem, dir: &Path, stem: &str) -> Result<Vec<String>> {
    let mtx = format!("{stem}.mtx");
    let rhs = format!("{stem}_rhs.mtx");
    let mut w = BufWriter::new(File::create(dir.join(&mtx))?);
    system.matrix.write_matrix_market(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join(&rhs))?);
    write_vector_market(&system.rhs, &mut w)?;
    w.flush()?;
    Ok(vec![mtx, rhs])
}

/// Runs the experiment without writing anything except MatrixMarket dumps
/// into `dump_dir`.
pub fn execute(config: &ExperimentConfig, dump_dir: Option<&Path>, verbose: bool) -> Result<RunOutcome> {
    config.validate().map_err(|e| e.at_stage("validate"))?;
    let total = Instant::now();
    let problem = config.problem().map_err(|e| e.at_stage("problem"))?;
    let kernel = config.kernel()?;
    let exact = config.solution_entry()?.map(|s| s.field());
    let mut manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").into(),
        csv_header: String::new(),
        config: config.clone(),
        node_sets: Vec::new(),
        timings: Timings::default(),
        artifacts: Vec::new(),
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    let spacings: Vec<f64> = match &config.convergence {
        Some(c) => c.h_list.clone(),
        None => vec![config.h],
    };
    let n_max = match (&config.sweep, &config.convergence) {
        (Some(s), _) => s.n_max.max(config.region_fix.map_or(0, |r| r.n_fixed)),
        (_, Some(c)) => *c.n_list.iter().max().unwrap_or(&0),
        _ => 0,
    };

    let mut conv_rows = Vec::new();
    let mut records = Vec::new();
    for &h in &spacings {
        let t = Instant::now();
        let raw = config.nodes_at(h).map_err(|e| e.at_stage("nodegen"))?;
        let sweep = Sweep::new(problem.clone(), exact.clone(), &raw, kernel, config.m, config.solver.clone(), config.m_high(), n_max)
            .map_err(|e| e.at_stage("neighbors"))?;
        manifest.timings.generate_s += t.elapsed().as_secs_f64();
        manifest.node_sets.push(summarize(&sweep.nodes, &raw, config, h).map_err(|e| e.at_stage("quality"))?);
        manifest.warnings.extend(sweep.nodes.warnings.iter().cloned());
        if verbose {
            eprintln!("[{}] h = {h}: {} nodes", config.name, sweep.nodes.len());
        }

        let t = Instant::now();
        let sizes: Vec<usize> = match (&config.sweep, &config.convergence) {
            (Some(s), _) => (s.n_min..=s.n_max).collect(),
            (_, Some(c)) => c.n_list.clone(),
            _ => Vec::new(),
        };
        sweep.check_range(&(sizes[0]..=*sizes.last().unwrap())).map_err(|e| e.at_stage("sweep"))?;
        let fixed: Option<(Vec<bool>, usize)> = config.region_fix.map(|r| {
            let pred = r.region.predicate(&problem.domain);
            (sweep.nodes.positions.iter().map(pred).collect(), r.n_fixed)
        });
        for n in sizes {
            let n_of = |i: usize| match &fixed {
                Some((mask, nf)) if mask[i] => *nf,
                _ => n,
            };
            let (rec, outcome) = sweep.record_keep(n, &n_of);
            if let (Some(dir), Some(o)) = (dump_dir, &outcome) {
                let stem = if spacings.len() > 1 { format!("{}_h{h}_n{n}", config.name) } else { format!("{}_n{n}", config.name) };
                manifest.artifacts.extend(dump(&o.system, dir, &stem).map_err(|e| e.at_stage("dump"))?);
            }
            if let Some(e) = &rec.error {
                manifest.failures.push((n, e.clone()));
            }
            if verbose {
                match &rec.error {
                    None => eprintln!(
                        "[{}] n = {n}: e_max_poiss = {:.3e}, dN_poiss = {:+.3}{} ({:.2} s)",
                        config.name,
                        rec.e_max_poiss,
                        rec.dn_poiss,
                        rec.imex_avg.map(|v| format!(", imex = {v:.3e}")).unwrap_or_default(),
                        rec.wall_time_s
                    ),
                    Some(e) => eprintln!("[{}] n = {n}: failed: {e}", config.name),
                }
            }
            if config.convergence.is_some() {
                conv_rows.push(ConvergenceRow {
                    h,
                    n,
                    n_nodes: sweep.nodes.len(),
                    e_max_poiss: rec.e_max_poiss,
                    e_avg_poiss: rec.e_avg_poiss,
                    e_max_lap: rec.e_max_lap,
                    e_avg_lap: rec.e_avg_lap,
                });
            } else {
                records.push(rec);
            }
        }
        manifest.timings.solve_s += t.elapsed().as_secs_f64();
    }

    let data = match &config.convergence {
        Some(c) => {
            let mut fits = Vec::new();
            for &n in &c.n_list {
                let (h, e): (Vec<f64>, Vec<f64>) =
                    conv_rows.iter().filter(|r| r.n == n).map(|r| (r.h, r.e_max_poiss)).unzip();
                match fit_convergence(&h, &e) {
                    Ok(f) => fits.push((n, f)),
                    Err(err) => manifest.warnings.push(format!("no convergence fit for n = {n}: {err}")),
                }
            }
            manifest.csv_header = CONVERGENCE_CSV_HEADER.into();
            RunData::Convergence(ConvergenceResult { rows: conv_rows, fits })
        }
        None => {
            manifest.csv_header = SWEEP_CSV_HEADER.into();
            RunData::Sweep(records)
        }
    };
    manifest.timings.total_s = total.elapsed().as_secs_f64();
    Ok(RunOutcome { data, manifest })
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CONVERGENCE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.h, r.n, r.n_nodes, r.e_max_poiss, r.e_avg_poiss, r.e_max_lap, r.e_avg_lap
        )?;
    }
    Ok(())
}

pub fn write_fit_csv(fits: &[(usize, ConvergenceFit)], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{FIT_CSV_HEADER}")?;
    for (n, f) in fits {
        writeln!(out, "{n},{:.6},{:.6},{:.6}", f.slope, f.intercept, f.r_squared)?;
    }
    Ok(())
}

fn write_imex_csv(records: &[SweepRecord], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{IMEX_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{},{:.6e},{:.4}", r.n, r.imex_avg.unwrap_or(f64::NAN), r.wall_time_s)?;
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Validates, executes and writes `<output>/<name>.csv` (plus
/// `<name>_fit.csv` for convergence studies and `<name>_imex.csv` when the
/// IMEX indicator is requested) and `<name>.manifest.json`. Nothing is
/// written if validation fails.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome> {
    config.validate().map_err(|e| e.at_stage("validate"))?;
    let dir: PathBuf = config.output.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::from(e).at_stage("output"))?;
    let mut outcome = execute(config, options.dump_system.then_some(dir.as_path()), options.verbose)?;
    let write = || -> Result<Vec<String>> {
        let mut names = Vec::new();
        let main = format!("{}.csv", config.name);
        let mut w = create(&dir, &main)?;
        match &outcome.data {
            RunData::Sweep(records) => {
                write_sweep_csv(records, &mut w)?;
                if records.iter().any(|r| r.imex_avg.is_some()) {
                    let name = format!("{}_imex.csv", config.name);
                    let mut wi = create(&dir, &name)?;
                    write_imex_csv(records, &mut wi)?;
                    wi.flush()?;
                    names.push(name);
                }
            }
            RunData::Convergence(c) => {
                write_convergence_csv(&c.rows, &mut w)?;
                let name = format!("{}_fit.csv", config.name);
                let mut wf = create(&dir, &name)?;
                write_fit_csv(&c.fits, &mut wf)?;
                wf.flush()?;
                names.push(name);
            }
        }
        w.flush()?;
        names.insert(0, main);
        Ok(names)
    };
    let names = write().map_err(|e| e.at_stage("output"))?;
    outcome.manifest.artifacts.splice(0..0, names);
    let manifest_name = format!("{}.manifest.json", config.name);
    let json = serde_json::to_string_pretty(&outcome.manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(dir.join(manifest_name), json).map_err(|e| Error::from(e).at_stage("output"))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{BcLayout, ConvergenceSpec};

    #[test]
    fn small_sweep_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::sweep("small", "disc", 0.05, 12, 14);
        c.output = dir.path().to_path_buf();
        c.imex = Some(crate::bench::config::ImexSpec { m_high: None });
        let out = run(&c, &RunOptions { dump_system: true, verbose: false }).unwrap();
        let recs = out.records().unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.is_ok() && r.imex_avg.is_some()));
        let csv = fs::read_to_string(dir.path().join("small.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(dir.path().join("small_imex.csv").exists());
        assert!(dir.path().join("small_n13.mtx").exists());
        assert!(dir.path().join("small_n13_rhs.mtx").exists());
        let manifest: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("small.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.config, c);
        assert_eq!(manifest.schema_version, SCHEMA_VERSION);
        assert_eq!(manifest.node_sets.len(), 1);
        assert!(manifest.node_sets[0].gamma > 0.0);
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::sweep("bad", "disc", 0.05, 14, 12);
        c.output = dir.path().join("sub");
        let err = run(&c, &RunOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("validate stage failed"), "{err}");
        assert!(!c.output.exists());
    }

    #[test]
    fn convergence_study() {
        let mut c = ExperimentConfig::sweep("conv", "disc", 0.1, 12, 12);
        c.sweep = None;
        c.convergence = Some(ConvergenceSpec { h_list: vec![0.1, 0.07, 0.05], n_list: vec![15, 20] });
        let out = execute(&c, None, false).unwrap();
        let conv = out.convergence().unwrap();
        assert_eq!(conv.rows.len(), 6);
        assert_eq!(conv.fits.len(), 2);
        assert!(conv.fits.iter().all(|(_, f)| f.slope > 1.0), "{:?}", conv.fits);
    }

    #[test]
    fn heatsink_without_solution() {
        let mut c = ExperimentConfig::sweep("hs", "disc", 0.08, 8, 9);
        c.m = 2;
        c.solution = "none".into();
        c.bc = BcLayout::Heatsink { t_hot: 80.0, t_out: 20.0, alpha: 2.09, cut: 0.5 };
        c.imex = Some(crate::bench::config::ImexSpec { m_high: Some(4) });
        let out = execute(&c, None, false).unwrap();
        let recs = out.records().unwrap();
        assert!(recs.iter().all(|r| r.is_ok() && r.e_max_poiss.is_nan() && r.imex_avg.unwrap() >= 0.0));
        assert!(out.manifest.node_sets[0].ghosts > 0);
    }
}
