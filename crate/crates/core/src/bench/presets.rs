//! Named experiment bundles, one per reproduced figure or table, with the
//! checks evaluated on their results.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::checks::{self, Check};
use super::config::{
    BcLayout, ConvergenceSpec, DomainSpec, ExperimentConfig, Generator, ImexSpec, RegionFix, RegionId,
};
use super::runner::{run, RunOptions, RunOutcome};
use crate::basis::basis_size;
use crate::error::{config, Error, Result};

pub const PRESETS: [&str; 13] = [
    "fig2", "tableA2", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "fig14", "fig15lite",
];

/// Base seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub configs: Vec<ExperimentConfig>,
}

fn disc(name: String, n_min: usize, n_max: usize, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::sweep(&name, "disc", 0.01, n_min, n_max);
    c.seed = seed;
    c
}

/// Disc Poisson problem with `sin(pi x) sin(pi y)`, h = 0.01, phs3, m = 3,
/// n = 10..69.
pub fn base_config(name: &str, seed: u64) -> ExperimentConfig {
    disc(name.into(), 10, 69, seed)
}

/// The three dimensions used for the dimensionality figures.
fn dimensions(prefix: &str, bc: BcLayout, seed: u64) -> Vec<ExperimentConfig> {
    let mut one = ExperimentConfig::sweep(&format!("{prefix}_1d"), "interval", 0.01, 5, 60);
    let mut two = ExperimentConfig::sweep(&format!("{prefix}_2d"), "disc", 0.01, 10, 100);
    let mut three = ExperimentConfig::sweep(&format!("{prefix}_3d"), "ball", 0.04, 20, 120);
    for c in [&mut one, &mut two, &mut three] {
        c.bc = bc.clone();
        c.seed = seed;
    }
    vec![one, two, three]
}

/// The heat-sink analog: unit-diameter ball, `u = 80` below its center,
/// `u + 2.09 du/dn = 20` elsewhere, `m = 2`, IMEX with `m_high = 4`.
pub fn fig15lite_config(seed: u64, h: f64, n_min: usize, n_max: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::sweep("fig15lite", "ball", h, n_min, n_max);
    c.seed = seed;
    c.m = 2;
    c.solution = "none".into();
    c.bc = BcLayout::Heatsink { t_hot: 80.0, t_out: 20.0, alpha: 209.0 / 100.0, cut: 0.5 };
    c.imex = Some(ImexSpec { m_high: Some(4) });
    c
}

pub fn preset(name: &str, seed: Option<u64>) -> Result<Preset> {
    let s = seed.unwrap_or(DEFAULT_SEED);
    let p = match name {
        "fig2" => {
            let mut c = base_config("fig2", s);
            c.imex = Some(ImexSpec { m_high: None });
            Preset { name: "fig2", description: "error oscillations and dN on the disc", configs: vec![c] }
        }
        "tableA2" => Preset {
            name: "tableA2",
            description: "row-wise comparison with the bundled reference table",
            configs: vec![base_config("tableA2", s)],
        },
        "fig5" => {
            let mut c = base_config("fig5", s);
            c.sweep = None;
            c.convergence = Some(ConvergenceSpec { h_list: vec![0.04, 0.02, 0.01, 0.005], n_list: vec![34, 40, 46] });
            Preset { name: "fig5", description: "convergence order under refinement", configs: vec![c] }
        }
        "fig6" => {
            let mut configs = Vec::new();
            for k in 0..10 {
                configs.push(base_config(&format!("fig6_af_seed{}", s + k), s + k));
            }
            let mut polar = base_config("fig6_polar", s);
            polar.generator = Generator::Polar;
            configs.push(polar);
            for k in 0..10 {
                let mut c = base_config(&format!("fig6_halton_seed{}", s + k), s + k);
                c.generator = Generator::Halton;
                configs.push(c);
            }
            Preset { name: "fig6", description: "advancing-front, polar and Halton node sets", configs }
        }
        "fig7" => {
            let plain = base_config("fig7_plain", s);
            let mut band = base_config("fig7_boundary_fixed", s);
            band.region_fix = Some(RegionFix { region: RegionId::BoundaryBand, n_fixed: 28 });
            let mut core = base_config("fig7_interior_fixed", s);
            core.region_fix = Some(RegionFix { region: RegionId::InteriorCore, n_fixed: 28 });
            Preset { name: "fig7", description: "stencil size fixed at 28 in one region", configs: vec![plain, band, core] }
        }
        "fig8" => {
            let mut configs = Vec::new();
            for kernel in ["phs3", "phs5", "tps2", "tps4"] {
                for m in 2..=4u32 {
                    let n_min = 10.max(basis_size(m, 2) + 2);
                    let mut c = disc(format!("fig8_{kernel}_m{m}"), n_min, 69, s);
                    c.kernel = kernel.into();
                    c.m = m;
                    configs.push(c);
                }
            }
            Preset { name: "fig8", description: "polyharmonic and thin-plate kernels, m = 2..4", configs }
        }
        "fig9" => {
            let mut configs = Vec::new();
            for kind in ["gauss", "mq", "imq"] {
                for eps in ["1", "0.1"] {
                    let mut c = base_config(&format!("fig9_{kind}_eps{eps}"), s);
                    c.kernel = format!("{kind}:{eps}");
                    configs.push(c);
                }
            }
            Preset { name: "fig9", description: "Gaussian, multiquadric and inverse multiquadric kernels", configs }
        }
        "fig10" => Preset {
            name: "fig10",
            description: "1D, 2D and 3D sweeps with Dirichlet conditions",
            configs: dimensions("fig10", BcLayout::DirichletAll, s),
        },
        "fig11" => Preset {
            name: "fig11",
            description: "1D, 2D and 3D sweeps with mixed Dirichlet/Neumann conditions",
            configs: dimensions("fig11", BcLayout::MixedXGtHalf, s),
        },
        "fig12" => {
            let configs = ["nephroid", "triangle", "pacman", "annulus", "rose"]
                .iter()
                .map(|d| {
                    let mut c = base_config(&format!("fig12_{d}"), s);
                    c.domain = DomainSpec::Named((*d).into());
                    c
                })
                .collect();
            Preset { name: "fig12", description: "other 2D domains", configs }
        }
        "fig13" => {
            let configs = ["L1", "L2", "L3", "L4", "L5"]
                .iter()
                .map(|op| {
                    let mut c = base_config(&format!("fig13_{op}"), s);
                    c.operator = (*op).into();
                    c
                })
                .collect();
            Preset { name: "fig13", description: "other elliptic operators", configs }
        }
        "fig14" => {
            let configs = ["u1", "u2", "u3", "u4", "u5", "u6"]
                .iter()
                .map(|u| {
                    let mut c = base_config(&format!("fig14_{u}"), s);
                    c.solution = (*u).into();
                    c
                })
                .collect();
            Preset { name: "fig14", description: "other analytic solutions", configs }
        }
        "fig15lite" => Preset {
            name: "fig15lite",
            description: "heat-sink analog on a ball with Robin conditions, IMEX only",
            configs: vec![fig15lite_config(s, 0.04, 11, 60)],
        },
        other => return config(format!("unknown preset '{other}'; available: {}", PRESETS.join(", "))),
    };
    Ok(p)
}

fn find<'a>(results: &'a [(ExperimentConfig, RunOutcome)], name: &str) -> Option<&'a RunOutcome> {
    results.iter().find(|(c, _)| c.name == name).map(|(_, o)| o)
}

fn sweep_of<'a>(results: &'a [(ExperimentConfig, RunOutcome)], name: &str) -> Result<&'a [crate::analysis::SweepRecord]> {
    find(results, name)
        .and_then(|o| o.records())
        .ok_or_else(|| Error::Config(format!("missing sweep '{name}'")))
}

/// Checks of the preset against its results (matched by config name).
pub fn evaluate(preset: &Preset, results: &[(ExperimentConfig, RunOutcome)]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let each_oscillates = |out: &mut Vec<Check>| -> Result<()> {
        for c in &preset.configs {
            let (ok, d) = checks::oscillates(sweep_of(results, &c.name)?, 2);
            out.push(Check::new(format!("{}: oscillation", c.name), ok, d));
        }
        Ok(())
    };
    match preset.name {
        "fig2" => {
            let r = sweep_of(results, "fig2")?;
            let (ok, d) = checks::oscillation(r, 0, true);
            out.push(Check::new("extrema locations and values", ok, d));
            let (ok, d) = checks::sign_flip(r);
            out.push(Check::new("dN sign flip", ok, d));
            let (ok, d) = checks::imex_colocation(r, 2);
            out.push(Check::new("IMEX extrema co-located with e_avg_lap", ok, d));
        }
        "tableA2" => {
            let r = sweep_of(results, "tableA2")?;
            let (hits, total) = checks::table_agreement(r);
            out.push(Check::info("rows within factor 3", format!("{hits}/{total}")));
            let (ok, d) = checks::oscillation(r, 0, true);
            out.push(Check::new("extrema locations and values", ok, d));
        }
        "fig5" => {
            let conv = find(results, "fig5")
                .and_then(|o| o.convergence())
                .ok_or_else(|| Error::Config("missing convergence result".into()))?;
            let (ok, d) = checks::convergence_order(conv, 1.6, 2.4);
            out.push(Check::new("order p in [1.6, 2.4]", ok, d));
        }
        "fig6" => {
            let mut gamma_af = f64::MIN;
            let mut gamma_halton = f64::MAX;
            for (c, o) in results {
                let g = o.manifest.node_sets[0].gamma;
                match c.generator {
                    Generator::Halton => gamma_halton = gamma_halton.min(g),
                    _ => {
                        let (ok, d) = checks::oscillation(sweep_of(results, &c.name)?, 2, false);
                        out.push(Check::new(format!("{}: extrema locations", c.name), ok, d));
                        if c.generator == Generator::AdvancingFront {
                            gamma_af = gamma_af.max(g);
                        }
                    }
                }
            }
            out.push(Check::new(
                "Halton gamma above advancing front",
                gamma_halton > gamma_af,
                format!("min Halton {gamma_halton:.3}, max advancing front {gamma_af:.3}"),
            ));
        }
        "fig7" => {
            let plain = sweep_of(results, "fig7_plain")?;
            let (ok, d) = checks::curves_within(plain, sweep_of(results, "fig7_boundary_fixed")?, 2.0);
            out.push(Check::new("boundary-fixed curve within factor 2", ok, d));
            let core = sweep_of(results, "fig7_interior_fixed")?;
            let spread = |r: &[crate::analysis::SweepRecord]| {
                let v: Vec<f64> = r.iter().map(|x| x.e_max_poiss).filter(|x| x.is_finite()).collect();
                v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
            };
            out.push(Check::info(
                "max/min spread, plain vs interior-fixed",
                format!("{:.1} vs {:.1}", spread(plain), spread(core)),
            ));
        }
        "fig8" | "fig10" | "fig12" | "fig14" => each_oscillates(&mut out)?,
        "fig9" => {
            for kind in ["gauss", "mq", "imq"] {
                let one = sweep_of(results, &format!("fig9_{kind}_eps1"))?;
                let small = sweep_of(results, &format!("fig9_{kind}_eps0.1"))?;
                let (ok, d) = checks::oscillates(one, 2);
                out.push(Check::new(format!("{kind} eps=1 oscillation"), ok, d));
                let failures = small.iter().filter(|r| !r.is_ok()).count();
                let gap = one
                    .iter()
                    .zip(small)
                    .map(|(a, b)| (a.e_max_poiss / b.e_max_poiss).log10().abs())
                    .filter(|x| x.is_finite())
                    .fold(0.0, f64::max);
                out.push(Check::new(
                    format!("{kind} eps=0.1 differs"),
                    failures > 0 || gap >= 1.0,
                    format!("{failures} failed solves, largest gap {gap:.2} decades"),
                ));
            }
        }
        "fig11" => {
            each_oscillates(&mut out)?;
            let (ok, d) = checks::contrast(sweep_of(results, "fig11_2d")?, 3.0);
            out.push(Check::new("2D minimum 3x below maximum", ok, d));
        }
        "fig13" => {
            for c in &preset.configs {
                let (ok, d) = checks::minimum_in(sweep_of(results, &c.name)?, 26, 30);
                out.push(Check::new(format!("{}: minimum in [26, 30]", c.name), ok, d));
            }
        }
        "fig15lite" => {
            let r = sweep_of(results, "fig15lite")?;
            let ns: Vec<usize> = r.iter().map(|x| x.n).collect();
            let v: Vec<f64> = r.iter().map(|x| x.imex_avg.unwrap_or(f64::NAN)).collect();
            let (ok, d) = checks::prominent_minimum(&ns, &v, 3.0);
            out.push(Check::new("IMEX minimum with 3x contrast", ok, d));
        }
        _ => {}
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproSummary {
    pub preset: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl ReproSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Runs every configuration of the preset into `out/<preset>/`, evaluates
/// its checks and writes `summary.json` next to the CSVs.
pub fn repro(name: &str, out: &Path, seed: Option<u64>, options: &RunOptions) -> Result<ReproSummary> {
    let p = preset(name, seed)?;
    let dir = out.join(p.name);
    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    for mut c in p.configs.clone() {
        c.output = dir.clone();
        let o = run(&c, options)?;
        artifacts.extend(o.manifest.artifacts.iter().cloned());
        artifacts.push(format!("{}.manifest.json", c.name));
        results.push((c, o));
    }
    let summary = ReproSummary {
        preset: p.name.into(),
        seed: seed.unwrap_or(DEFAULT_SEED),
        checks: evaluate(&p, &results)?,
        artifacts,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}
