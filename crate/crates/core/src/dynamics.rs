//! Time integration of the Schrödinger equation i·ψ̇ = H(t)·ψ.
//!
//! The stepper samples H at the midpoint of each step and advances by the
//! exact matrix exponential of that frozen real-symmetric matrix (via its
//! eigen-decomposition), so every step is unitary regardless of step size.
//! The remaining error is the midpoint sampling, controlled by requiring
//! ‖H‖·Δt ≤ 0.05 (spectral norm bounded by the max row sum); steps on the
//! user grid that violate the bound are subdivided internally.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::model::{
    build_effective_hamiltonian, build_full_hamiltonian, subspace_dim,
};
use crate::pulses::{couplings_at, Geometry, Scheme, TimeGrid};
use crate::spectral;
use crate::{Result, SimError};

/// Midpoint-sampling accuracy bound on ‖H‖·Δt per substep.
pub const STEP_CRITERION: f64 = 0.05;

const NORM_TOL: f64 = 1e-9;

/// What the stepper actually did, for diagnostics output.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct StepperStats {
    /// Total number of exponential substeps taken.
    pub substeps: usize,
    /// Largest subdivision factor applied to a single grid interval.
    pub max_subdivision: usize,
    /// Max over the run of the row-sum bound on ‖H‖ (rad/s).
    pub max_h_norm: f64,
}

/// Time grid, state history, and derived observables of one propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    /// One state per grid point; dimension 2N+1 (or 2·3^N for full-space
    /// runs).
    pub states: Vec<Vec<Complex64>>,
    /// populations[k][i] = |states[k][i]|².
    pub populations: Vec<Vec<f64>>,
    /// Max over the grid of |‖ψ‖ − 1|.
    pub norm_drift: f64,
    pub stats: StepperStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().expect("trajectory has at least one state")
    }
}

/// Scalar summary of a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetrics {
    pub final_populations: Vec<f64>,
    /// |⟨W|ψ(t_f)⟩|² with |W⟩ the equal superposition of the ground labels.
    pub w_fidelity: f64,
    /// ∫ Σ_i P(excited i) dt over the window (seconds).
    pub excited_exposure: f64,
    /// ∫ P(photon label) dt (seconds).
    pub photon_exposure: f64,
    /// Same exposures as fractions of the window length.
    pub excited_exposure_fraction: f64,
    pub photon_exposure_fraction: f64,
    /// Min over the grid of the squared projection onto the instantaneous
    /// dark subspace.
    pub min_dark_overlap: f64,
}

/// Initial state prescribed by the scheme: scheme 1 starts with atom 1 in g1
/// and the cavity empty; scheme 2 starts with all atoms in g2 and one photon.
pub fn initial_state(geo: &Geometry) -> Vec<Complex64> {
    let dim = subspace_dim(geo.n_atoms);
    let mut psi = vec![Complex64::ZERO; dim];
    let idx = match geo.scheme {
        Scheme::Scheme1 => 0,
        Scheme::Scheme2 => dim - 1,
    };
    psi[idx] = Complex64::ONE;
    psi
}

fn check_normalized(psi: &[Complex64]) -> Result<()> {
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(SimError::invalid(format!(
            "initial state is not normalized: ‖ψ‖ = {norm}"
        )));
    }
    Ok(())
}

/// Row-sum (infinity-norm) bound on the spectral norm.
fn row_sum_norm(h: &DMatrix<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..h.nrows() {
        let mut s = 0.0;
        for j in 0..h.ncols() {
            s += h[(i, j)].abs();
        }
        best = best.max(s);
    }
    best
}

/// One exact-exponential substep: ψ ← V·exp(−iΛ·dt)·Vᵀ·ψ, splitting ψ into
/// real and imaginary parts so all matrix products stay real.
fn exp_step(h: DMatrix<f64>, dt: f64, re: &mut DVector<f64>, im: &mut DVector<f64>) {
    let eig = h.symmetric_eigen();
    let a = eig.eigenvectors.tr_mul(&*re);
    let b = eig.eigenvectors.tr_mul(&*im);
    let n = a.len();
    let mut a2 = DVector::zeros(n);
    let mut b2 = DVector::zeros(n);
    for j in 0..n {
        let (s, c) = (-eig.eigenvalues[j] * dt).sin_cos();
        a2[j] = a[j] * c - b[j] * s;
        b2[j] = a[j] * s + b[j] * c;
    }
    *re = &eig.eigenvectors * a2;
    *im = &eig.eigenvectors * b2;
}

/// Propagate an arbitrary (possibly reversed) grid with a caller-supplied
/// Hamiltonian. Backbone for both the effective and full-space runs.
pub fn propagate_with<F>(h_of_t: F, grid: &TimeGrid, psi0: &[Complex64]) -> Result<Trajectory>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    check_normalized(psi0)?;
    let dim = psi0.len();
    let n_points = grid.times.len();

    let mut re = DVector::from_iterator(dim, psi0.iter().map(|a| a.re));
    let mut im = DVector::from_iterator(dim, psi0.iter().map(|a| a.im));

    let mut states = Vec::with_capacity(n_points);
    let mut populations = Vec::with_capacity(n_points);
    let mut norm_drift: f64 = 0.0;
    let mut stats = StepperStats::default();

    let record =
        |re: &DVector<f64>, im: &DVector<f64>, states: &mut Vec<Vec<Complex64>>,
         populations: &mut Vec<Vec<f64>>, norm_drift: &mut f64| {
            let state: Vec<Complex64> = re
                .iter()
                .zip(im.iter())
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect();
            let pops: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
            let norm = pops.iter().sum::<f64>().sqrt();
            *norm_drift = norm_drift.max((norm - 1.0).abs());
            states.push(state);
            populations.push(pops);
        };

    record(&re, &im, &mut states, &mut populations, &mut norm_drift);

    for w in grid.times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let dt = t1 - t0;
        // Bound ‖H‖ over the interval by sampling endpoints and midpoint.
        let bound = row_sum_norm(&h_of_t(t0))
            .max(row_sum_norm(&h_of_t(t1)))
            .max(row_sum_norm(&h_of_t(0.5 * (t0 + t1))));
        stats.max_h_norm = stats.max_h_norm.max(bound);
        let m = ((bound * dt.abs() / STEP_CRITERION).ceil() as usize).max(1);
        stats.max_subdivision = stats.max_subdivision.max(m);
        stats.substeps += m;
        let sub = dt / m as f64;
        for j in 0..m {
            let t_mid = t0 + sub * (j as f64 + 0.5);
            exp_step(h_of_t(t_mid), sub, &mut re, &mut im);
        }
        record(&re, &im, &mut states, &mut populations, &mut norm_drift);
    }

    Ok(Trajectory {
        grid: grid.clone(),
        states,
        populations,
        norm_drift,
        stats,
    })
}

/// Propagate in the (2N+1)-dimensional subspace.
pub fn propagate(geo: &Geometry, grid: &TimeGrid, psi0: &[Complex64]) -> Result<Trajectory> {
    geo.validate()?;
    if psi0.len() != subspace_dim(geo.n_atoms) {
        return Err(SimError::invalid(format!(
            "state dimension {} does not match subspace dimension {}",
            psi0.len(),
            subspace_dim(geo.n_atoms)
        )));
    }
    let h = |t: f64| {
        build_effective_hamiltonian(&couplings_at(geo, t))
            .expect("validated geometry yields finite couplings")
    };
    propagate_with(h, grid, psi0)
}

/// Propagate in the full tensor space (3^N·2 dimensions). Oracle/diagnostic
/// path only.
pub fn propagate_full(geo: &Geometry, grid: &TimeGrid, psi0_full: &[Complex64]) -> Result<Trajectory> {
    geo.validate()?;
    let h = |t: f64| {
        build_full_hamiltonian(&couplings_at(geo, t))
            .expect("validated geometry yields finite couplings")
    };
    propagate_with(h, grid, psi0_full)
}

/// Trapezoid integral of a sampled series over a uniform grid.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dt * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Squared overlap of the final state with the N-atom W state
/// (equal superposition of the ground labels, cavity vacuum).
pub fn w_fidelity(state: &[Complex64], n_atoms: usize) -> f64 {
    let amp: Complex64 = state[..n_atoms].iter().sum();
    amp.norm_sqr() / n_atoms as f64
}

/// Summed population of the lossy labels (excited states + photon).
pub fn leakage(populations: &[f64], n_atoms: usize) -> f64 {
    populations[n_atoms..].iter().sum()
}

pub fn run_metrics(traj: &Trajectory, geo: &Geometry) -> RunMetrics {
    let n = geo.n_atoms;
    let dt = traj.grid.dt().abs();
    let window = (traj.grid.t_f - traj.grid.t_i).abs();

    let excited_series: Vec<f64> = traj
        .populations
        .iter()
        .map(|p| p[n..2 * n].iter().sum())
        .collect();
    let photon_series: Vec<f64> = traj.populations.iter().map(|p| p[2 * n]).collect();

    let excited_exposure = trapezoid(&excited_series, dt);
    let photon_exposure = trapezoid(&photon_series, dt);

    let overlap = spectral::dark_overlap_series(traj, geo);
    let min_dark_overlap = overlap.iter().copied().fold(f64::INFINITY, f64::min);

    RunMetrics {
        final_populations: traj.final_populations().to_vec(),
        w_fidelity: w_fidelity(traj.final_state(), n),
        excited_exposure,
        photon_exposure,
        excited_exposure_fraction: excited_exposure / window,
        photon_exposure_fraction: photon_exposure / window,
        min_dark_overlap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::make_time_grid;

    fn geometry(scheme: Scheme) -> Geometry {
        Geometry {
            scheme,
            n_atoms: 3,
            v: 2.0,
            w_l: 20e-6,
            w_c: 40e-6,
            lambda: 780e-9,
            omega0: 2e6,
            g0: 5e6,
            z0: 0.0,
            d: 30e-6,
            t_span: 4.0,
            omega_e: None,
            omega_c_freq: None,
        }
    }

    #[test]
    fn initial_states_by_scheme() {
        let s1 = initial_state(&geometry(Scheme::Scheme1));
        assert_eq!(s1[0], Complex64::ONE);
        assert_eq!(s1.iter().map(|a| a.norm_sqr()).sum::<f64>(), 1.0);
        let s2 = initial_state(&geometry(Scheme::Scheme2));
        assert_eq!(s2[6], Complex64::ONE);
        assert_eq!(s2.iter().map(|a| a.norm_sqr()).sum::<f64>(), 1.0);
    }

    #[test]
    fn zero_couplings_freeze_the_state() {
        let mut geo = geometry(Scheme::Scheme1);
        geo.omega0 = 0.0;
        geo.g0 = 0.0;
        let grid = make_time_grid(&geo, 200).unwrap();
        let psi0 = initial_state(&geo);
        let traj = propagate(&geo, &grid, &psi0).unwrap();
        for state in &traj.states {
            assert_eq!(state[0], Complex64::ONE);
            for a in &state[1..] {
                assert_eq!(*a, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn constant_coupling_rabi_oscillation() {
        // Constant Ω1, everything else zero: two-level Rabi cycling between
        // index 0 and index 3, P_excited(t) = sin²(Ω·t).
        let omega = 1.0e5;
        let h = move |_t: f64| {
            let c = crate::model::CouplingSet {
                omega: vec![omega, 0.0, 0.0],
                g: vec![0.0; 3],
            };
            build_effective_hamiltonian(&c).unwrap()
        };
        let t_f = 3.0 / omega;
        let times: Vec<f64> = (0..=300).map(|k| t_f * k as f64 / 300.0).collect();
        let grid = TimeGrid { t_i: 0.0, t_f, times };
        let mut psi0 = vec![Complex64::ZERO; 7];
        psi0[0] = Complex64::ONE;
        let traj = propagate_with(h, &grid, &psi0).unwrap();
        for (k, t) in grid.times.iter().enumerate() {
            let expected = (omega * t).sin().powi(2);
            assert!(
                (traj.populations[k][3] - expected).abs() < 1e-9,
                "t={t}: {} vs {expected}",
                traj.populations[k][3]
            );
        }
    }

    #[test]
    fn non_normalized_initial_state_rejected() {
        let geo = geometry(Scheme::Scheme1);
        let grid = make_time_grid(&geo, 200).unwrap();
        let mut psi0 = initial_state(&geo);
        psi0[0] = Complex64::new(0.5, 0.0);
        assert!(propagate(&geo, &grid, &psi0).is_err());
    }

    #[test]
    fn norm_is_conserved() {
        let geo = geometry(Scheme::Scheme1);
        let grid = make_time_grid(&geo, 500).unwrap();
        let traj = propagate(&geo, &grid, &initial_state(&geo)).unwrap();
        assert!(traj.norm_drift <= 1e-9, "norm drift {}", traj.norm_drift);
    }

    #[test]
    fn forward_backward_returns_initial_state() {
        let geo = geometry(Scheme::Scheme2);
        let grid = make_time_grid(&geo, 400).unwrap();
        let psi0 = initial_state(&geo);
        let fwd = propagate(&geo, &grid, &psi0).unwrap();
        let back = propagate(&geo, &grid.reversed(), fwd.final_state()).unwrap();
        let err: f64 = back
            .final_state()
            .iter()
            .zip(&psi0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-8, "reconstruction error {err}");
    }

    #[test]
    fn populations_invariant_under_global_sign_flip() {
        let geo = geometry(Scheme::Scheme1);
        let mut flipped = geo.clone();
        flipped.omega0 = -geo.omega0;
        flipped.g0 = -geo.g0;
        let grid = make_time_grid(&geo, 300).unwrap();
        let a = propagate(&geo, &grid, &initial_state(&geo)).unwrap();
        let b = propagate(&flipped, &grid, &initial_state(&flipped)).unwrap();
        for (pa, pb) in a.populations.iter().zip(&b.populations) {
            for (x, y) in pa.iter().zip(pb) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn refinement_converges() {
        let geo = geometry(Scheme::Scheme2);
        let coarse = make_time_grid(&geo, 1000).unwrap();
        let fine = make_time_grid(&geo, 2000).unwrap();
        let a = propagate(&geo, &coarse, &initial_state(&geo)).unwrap();
        let b = propagate(&geo, &fine, &initial_state(&geo)).unwrap();
        for (x, y) in a.final_populations().iter().zip(b.final_populations()) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn exposures_zero_without_transfer() {
        let mut geo = geometry(Scheme::Scheme1);
        geo.omega0 = 0.0;
        geo.g0 = 0.0;
        let grid = make_time_grid(&geo, 200).unwrap();
        let traj = propagate(&geo, &grid, &initial_state(&geo)).unwrap();
        let m = run_metrics(&traj, &geo);
        assert_eq!(m.excited_exposure, 0.0);
        assert_eq!(m.photon_exposure, 0.0);
        // |⟨W|g1,g2,g2,0⟩|² = 1/3
        assert!((m.w_fidelity - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn w_state_has_unit_fidelity() {
        let a = 1.0 / 3f64.sqrt();
        let mut state = vec![Complex64::ZERO; 7];
        for i in 0..3 {
            state[i] = Complex64::new(a, 0.0);
        }
        assert!((w_fidelity(&state, 3) - 1.0).abs() < 1e-12);
    }
}
