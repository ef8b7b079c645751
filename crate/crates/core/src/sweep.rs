//! 2-D scans over the beam-geometry plane (z0, d), locating the f-STIRAP
//! working point of scheme 1, plus 1-D robustness scans.
//!
//! Cells are independent pure propagations, evaluated in parallel (capped by
//! the `SIM_THREADS` env var) and written to disjoint slots, so results are
//! bitwise identical regardless of evaluation order.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{initial_state, leakage, propagate, run_metrics, w_fidelity, RunMetrics};
use crate::pulses::{make_time_grid, Geometry};
use crate::{Result, SimError};

/// Final-state and transient metrics of a single sweep cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellMetrics {
    pub final_populations: Vec<f64>,
    pub w_fidelity: f64,
    /// Summed final population of the excited labels and the photon label.
    pub leakage_final: f64,
    /// Max over the grid of the same sum.
    pub max_transient_leakage: f64,
    pub excited_exposure: f64,
    pub photon_exposure: f64,
}

/// Metrics on a (z0, d) grid; `cells[i][j]` corresponds to
/// `(z0_values[i], d_values[j])`.
#[derive(Clone, Debug, Serialize)]
pub struct SweepGrid {
    pub z0_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub cells: Vec<Vec<CellMetrics>>,
}

/// Selected sweep cell with its location.
#[derive(Clone, Debug, Serialize)]
pub struct WorkingPoint {
    pub z0: f64,
    pub d: f64,
    pub metrics: CellMetrics,
    /// Max over the ground labels of |P − 1/N|.
    pub deviation: f64,
}

/// Evaluate one cell: propagate scheme 1 (or whatever the base scheme is)
/// at the given offsets and summarize.
pub fn evaluate_cell(base: &Geometry, z0: f64, d: f64, n_steps: usize) -> Result<CellMetrics> {
    let mut geo = base.clone();
    geo.z0 = z0;
    geo.d = d;
    let grid = make_time_grid(&geo, n_steps)?;
    let traj = propagate(&geo, &grid, &initial_state(&geo))?;
    let n = geo.n_atoms;
    let dt = grid.dt().abs();
    let excited: Vec<f64> = traj
        .populations
        .iter()
        .map(|p| p[n..2 * n].iter().sum())
        .collect();
    let photon: Vec<f64> = traj.populations.iter().map(|p| p[2 * n]).collect();
    let max_transient_leakage = traj
        .populations
        .iter()
        .map(|p| leakage(p, n))
        .fold(0.0, f64::max);
    Ok(CellMetrics {
        w_fidelity: w_fidelity(traj.final_state(), n),
        leakage_final: leakage(traj.final_populations(), n),
        max_transient_leakage,
        excited_exposure: crate::dynamics::trapezoid(&excited, dt),
        photon_exposure: crate::dynamics::trapezoid(&photon, dt),
        final_populations: traj.final_populations().to_vec(),
    })
}

fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    (0..n)
        .map(|k| min + (max - min) * k as f64 / (n as f64 - 1.0))
        .collect()
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var("SIM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::invalid(format!("thread pool: {e}")))
}

/// Scan (z0, d) over the given inclusive ranges with `resolution`
/// (nz, nd) cells per axis.
pub fn run_sweep(
    base: &Geometry,
    z0_range: (f64, f64),
    d_range: (f64, f64),
    resolution: (usize, usize),
    n_steps: usize,
) -> Result<SweepGrid> {
    base.validate()?;
    for (name, (lo, hi)) in [("z0", z0_range), ("d", d_range)] {
        if !(lo >= 0.0 && hi >= lo) {
            return Err(SimError::invalid(format!(
                "{name} range must be ordered and non-negative, got {lo}..{hi}"
            )));
        }
    }
    if resolution.0 < 8 || resolution.1 < 8 {
        return Err(SimError::invalid(format!(
            "sweep resolution must be at least 8 per axis, got {}x{}",
            resolution.0, resolution.1
        )));
    }
    let z0_values = linspace(z0_range.0, z0_range.1, resolution.0);
    let d_values = linspace(d_range.0, d_range.1, resolution.1);

    let tasks: Vec<(f64, f64)> = z0_values
        .iter()
        .flat_map(|&z0| d_values.iter().map(move |&d| (z0, d)))
        .collect();
    let pool = thread_pool()?;
    let flat: Vec<Result<CellMetrics>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(z0, d)| evaluate_cell(base, z0, d, n_steps))
            .collect()
    });

    let mut cells = Vec::with_capacity(z0_values.len());
    let mut it = flat.into_iter();
    for _ in 0..z0_values.len() {
        let mut row = Vec::with_capacity(d_values.len());
        for _ in 0..d_values.len() {
            row.push(it.next().expect("cell count matches grid shape")?);
        }
        cells.push(row);
    }
    Ok(SweepGrid {
        z0_values,
        d_values,
        cells,
    })
}

/// Max leakage a cell may have to qualify as a working point.
pub const WORKING_POINT_LEAKAGE_CAP: f64 = 0.02;

fn deviation(cell: &CellMetrics) -> f64 {
    let n = cell.final_populations.len() / 2;
    let target = 1.0 / n as f64;
    cell.final_populations[..n]
        .iter()
        .map(|p| (p - target).abs())
        .fold(0.0, f64::max)
}

/// Cell minimizing the max-component deviation from 1/N among cells with
/// final leakage ≤ 0.02. Ties break toward smaller leakage, then smaller z0,
/// then smaller d.
pub fn find_working_point(grid: &SweepGrid) -> Result<WorkingPoint> {
    if grid.cells.is_empty() || grid.cells[0].is_empty() {
        return Err(SimError::invalid("empty sweep grid"));
    }
    let mut best: Option<WorkingPoint> = None;
    let mut best_any: Option<WorkingPoint> = None;
    for (i, row) in grid.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let wp = WorkingPoint {
                z0: grid.z0_values[i],
                d: grid.d_values[j],
                metrics: cell.clone(),
                deviation: deviation(cell),
            };
            let better = |cur: &WorkingPoint, cand: &WorkingPoint| {
                (cand.deviation, cand.metrics.leakage_final, cand.z0, cand.d)
                    < (cur.deviation, cur.metrics.leakage_final, cur.z0, cur.d)
            };
            if best_any.as_ref().is_none_or(|cur| better(cur, &wp)) {
                best_any = Some(wp.clone());
            }
            if cell.leakage_final <= WORKING_POINT_LEAKAGE_CAP
                && best.as_ref().is_none_or(|cur| better(cur, &wp))
            {
                best = Some(wp);
            }
        }
    }
    best.ok_or_else(|| SimError::NotFound {
        reason: format!(
            "no cell has final leakage ≤ {WORKING_POINT_LEAKAGE_CAP}"
        ),
        best: Box::new(best_any.expect("grid is non-empty")),
    })
}

/// Which geometry parameter a robustness scan perturbs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    V,
    Omega0,
    G0,
    /// Ω0 and G0 scaled together.
    OmegaG,
}

/// Re-run the scheme with one parameter scaled by each factor. The time grid
/// is regenerated per factor (the window depends on v).
pub fn robustness_scan(
    geo: &Geometry,
    parameter: ScanParameter,
    factors: &[f64],
    n_steps: usize,
) -> Result<Vec<RunMetrics>> {
    geo.validate()?;
    if factors.iter().any(|&f| !(f > 0.0)) {
        return Err(SimError::invalid("scan factors must be positive"));
    }
    factors
        .iter()
        .map(|&f| {
            let mut g = geo.clone();
            match parameter {
                ScanParameter::V => g.v *= f,
                ScanParameter::Omega0 => g.omega0 *= f,
                ScanParameter::G0 => g.g0 *= f,
                ScanParameter::OmegaG => {
                    g.omega0 *= f;
                    g.g0 *= f;
                }
            }
            let grid = make_time_grid(&g, n_steps)?;
            let traj = propagate(&g, &grid, &initial_state(&g))?;
            Ok(run_metrics(&traj, &g))
        })
        .collect()
}
