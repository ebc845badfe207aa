use std::io::Write;
use std::ops::RangeInclusive;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::imex::{imex_from_stencils, imex_stencil_size};
use super::{error_report, ErrorReport};
use crate::basis::{basis_size, RadialKernel};
use crate::error::{config, Result};
use crate::neighbors::{needs_stencil, NeighborTable, SpatialIndex, Stencil};
use crate::nodegen::NodeSet;
use crate::pde::{assemble, prepare_nodes, solve, GlobalSystem, ProblemSpec, ScalarField, SolutionField, SolverKind};
use crate::point::Point;

pub const SWEEP_CSV_HEADER: &str = "n,e_max_poiss,e_avg_poiss,e_max_lap,e_avg_lap,dN_poiss,dN_lap,wall_time_s";

/// Aggregates for one stencil size. Failed solves keep their message in
/// `error` and carry NaN aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub e_max_poiss: f64,
    pub e_avg_poiss: f64,
    pub e_max_lap: f64,
    pub e_avg_lap: f64,
    pub dn_poiss: f64,
    pub dn_lap: f64,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imex_avg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(n: usize, wall_time_s: f64, message: String) -> Self {
        SweepRecord {
            n,
            e_max_poiss: f64::NAN,
            e_avg_poiss: f64::NAN,
            e_max_lap: f64::NAN,
            e_avg_lap: f64::NAN,
            dn_poiss: f64::NAN,
            dn_lap: f64::NAN,
            wall_time_s,
            imex_avg: None,
            error: Some(message),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

pub fn write_sweep_csv(records: &[SweepRecord], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6},{:.6},{:.4}",
            r.n, r.e_max_poiss, r.e_avg_poiss, r.e_max_lap, r.e_avg_lap, r.dn_poiss, r.dn_lap, r.wall_time_s
        )?;
    }
    Ok(())
}

/// Shared state for repeated solves of one problem on one node set:
/// boundary roles and ghosts are applied once, and every stencil is a prefix
/// of a precomputed neighbour list.
pub struct Sweep {
    pub problem: ProblemSpec,
    /// Analytic solution; without it only the solve and the IMEX indicator
    /// are available and error aggregates are NaN.
    pub exact: Option<ScalarField>,
    /// Nodes with boundary roles and ghosts.
    pub nodes: NodeSet,
    pub index: SpatialIndex,
    pub kernel: RadialKernel,
    pub m: u32,
    pub solver: SolverKind,
    /// Augmentation degree of the IMEX operator, if requested.
    pub imex_m_high: Option<u32>,
    table: NeighborTable,
}

/// One assembled and solved instance.
pub struct SweepOutcome {
    pub system: GlobalSystem,
    pub solution: SolutionField,
    pub report: Option<ErrorReport>,
    pub stencils: Vec<Stencil>,
}

impl Sweep {
    /// `n_max` bounds every stencil size used later (IMEX stencils are
    /// accounted for automatically).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        problem: ProblemSpec,
        exact: Option<ScalarField>,
        nodes: &NodeSet,
        kernel: RadialKernel,
        m: u32,
        solver: SolverKind,
        imex_m_high: Option<u32>,
        n_max: usize,
    ) -> Result<Self> {
        kernel.validate()?;
        let nodes = prepare_nodes(&problem, nodes)?;
        let index = SpatialIndex::build(&nodes)?;
        let mut table_n = n_max;
        if let Some(mh) = imex_m_high {
            if mh <= m {
                return config(format!("IMEX degree {mh} must exceed the solve degree {m}"));
            }
            table_n = table_n.max(imex_stencil_size(n_max, mh, nodes.dim));
        }
        if table_n > nodes.len() {
            return config(format!("stencil size {table_n} exceeds the {} available nodes", nodes.len()));
        }
        let centers = nodes.indices_with(needs_stencil);
        let table = NeighborTable::new(&index, centers, table_n)?;
        Ok(Sweep { problem, exact, nodes, index, kernel, m, solver, imex_m_high, table })
    }

    fn stencils(&self, n_of: &dyn Fn(usize) -> usize) -> Result<Vec<Stencil>> {
        (0..self.table.centers.len())
            .map(|row| self.table.stencil(row, n_of(self.table.centers[row])))
            .collect()
    }

    /// Assembles and solves with per-node stencil sizes `n_of(node)`.
    pub fn solve_with(&self, n_of: &dyn Fn(usize) -> usize) -> Result<SweepOutcome> {
        let stencils = self.stencils(n_of)?;
        let system = assemble(&self.problem, &self.nodes, &stencils, &self.kernel, self.m)?;
        let solution = solve(&system, &self.solver)?;
        let report = match &self.exact {
            Some(u) => Some(error_report(
                &solution,
                u.as_ref(),
                self.problem.rhs.as_ref(),
                &system.operator_weights,
                &self.nodes,
            )?),
            None => None,
        };
        Ok(SweepOutcome { system, solution, report, stencils })
    }

    /// Uniform stencil size `n`.
    pub fn solve_n(&self, n: usize) -> Result<SweepOutcome> {
        self.solve_with(&|_| n)
    }

    /// Record for the label `n` with sizes `n_of`; failures are captured.
    pub fn record_with(&self, n: usize, n_of: &dyn Fn(usize) -> usize) -> SweepRecord {
        self.record_keep(n, n_of).0
    }

    /// Like [`Sweep::record_with`], also returning the solved instance.
    pub fn record_keep(&self, n: usize, n_of: &dyn Fn(usize) -> usize) -> (SweepRecord, Option<SweepOutcome>) {
        let start = Instant::now();
        let result = self.solve_with(n_of).and_then(|o| {
            let imex = match self.imex_m_high {
                Some(mh) => {
                    let n_high = imex_stencil_size(n, mh, self.nodes.dim);
                    let st = self.stencils(&|_| n_high)?;
                    Some(imex_from_stencils(&self.problem, &self.nodes, &st, &o.solution.values, &self.kernel, mh)?.average)
                }
                None => None,
            };
            Ok((o, imex))
        });
        let wall = start.elapsed().as_secs_f64();
        match result {
            Ok((o, imex_avg)) => {
                let mut rec = SweepRecord::failed(n, wall, String::new());
                rec.error = None;
                rec.imex_avg = imex_avg;
                if let Some(r) = &o.report {
                    rec.e_max_poiss = r.e_poiss_max;
                    rec.e_avg_poiss = r.e_poiss_avg;
                    rec.e_max_lap = r.e_lap_max;
                    rec.e_avg_lap = r.e_lap_avg;
                    rec.dn_poiss = r.dn_poiss;
                    rec.dn_lap = r.dn_lap;
                }
                (rec, Some(o))
            }
            Err(e) => (SweepRecord::failed(n, wall, e.to_string()), None),
        }
    }

    pub(crate) fn check_range(&self, range: &RangeInclusive<usize>) -> Result<()> {
        if range.is_empty() {
            return config("empty stencil-size range");
        }
        let need = basis_size(self.m, self.nodes.dim);
        if *range.start() < need {
            return config(format!("n_min {} is below the {need} monomials of degree {}", range.start(), self.m));
        }
        if *range.end() > self.table.n_max() {
            return config(format!("n_max {} exceeds the prepared neighbour lists", range.end()));
        }
        Ok(())
    }

    pub fn run(&self, range: RangeInclusive<usize>) -> Result<Vec<SweepRecord>> {
        self.check_range(&range)?;
        Ok(range.map(|n| self.record_with(n, &|_| n)).collect())
    }

    /// Nodes accepted by `region` keep `n_fixed`; all others are swept.
    pub fn run_region(
        &self,
        region: &dyn Fn(&Point) -> bool,
        n_fixed: usize,
        range: RangeInclusive<usize>,
    ) -> Result<Vec<SweepRecord>> {
        self.check_range(&range)?;
        self.check_range(&(n_fixed..=n_fixed))?;
        let fixed: Vec<bool> = self.nodes.positions.iter().map(region).collect();
        Ok(range
            .map(|n| self.record_with(n, &|i| if fixed[i] { n_fixed } else { n }))
            .collect())
    }
}

/// One assemble, solve and report per `n`, reusing nodes and neighbour
/// lists.
pub fn stencil_sweep(
    problem: &ProblemSpec,
    exact: ScalarField,
    nodes: &NodeSet,
    n_range: RangeInclusive<usize>,
    kernel: &RadialKernel,
    m: u32,
    solver: &SolverKind,
) -> Result<Vec<SweepRecord>> {
    let sweep = Sweep::new(problem.clone(), Some(exact), nodes, *kernel, m, solver.clone(), None, *n_range.end())?;
    sweep.run(n_range)
}

#[allow(clippy::too_many_arguments)]
pub fn region_sweep(
    problem: &ProblemSpec,
    exact: ScalarField,
    nodes: &NodeSet,
    region: &dyn Fn(&Point) -> bool,
    n_fixed: usize,
    n_range: RangeInclusive<usize>,
    kernel: &RadialKernel,
    m: u32,
    solver: &SolverKind,
) -> Result<Vec<SweepRecord>> {
    let n_max = (*n_range.end()).max(n_fixed);
    let sweep = Sweep::new(problem.clone(), Some(exact), nodes, *kernel, m, solver.clone(), None, n_max)?;
    sweep.run_region(region, n_fixed, n_range)
}
