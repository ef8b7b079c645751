//! Instantaneous eigen-analysis of the effective Hamiltonian: spectral gaps,
//! the numeric dark (null) subspace, closed-form dark states, and the
//! f-STIRAP pulse-ratio diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::model::{build_effective_hamiltonian, CouplingSet};
use crate::pulses::{couplings_at, make_time_grid, Geometry, Scheme};
use crate::{Result, SimError};

/// Default relative tolerance separating numerical zeros from bright
/// eigenvalues.
pub const DEFAULT_NULL_TOL: f64 = 1e-8;

/// Eigen-structure of the effective Hamiltonian at one instant.
#[derive(Clone, Debug)]
pub struct SpectralSnapshot {
    /// Sorted ascending, rad/s.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal basis of the numeric null space, one column per vector.
    pub dark_subspace: DMatrix<f64>,
    /// Smallest |λ| among the bright (non-null) eigenvalues, rad/s.
    pub gap: f64,
    /// False when every eigenvalue is null (zero Hamiltonian), in which case
    /// `gap` is reported as 0.
    pub gap_defined: bool,
}

/// Full eigen-decomposition with null/bright classification at
/// |λ| ≤ null_tol·‖H‖.
pub fn snapshot(h: &DMatrix<f64>, null_tol: f64) -> SpectralSnapshot {
    let eig = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let scale = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let threshold = null_tol * scale;
    let null_idx: Vec<usize> = (0..dim)
        .filter(|&k| eig.eigenvalues[k].abs() <= threshold)
        .collect();
    let mut dark = DMatrix::zeros(dim, null_idx.len());
    for (c, &k) in null_idx.iter().enumerate() {
        dark.set_column(c, &eig.eigenvectors.column(k));
    }
    let gap = (0..dim)
        .filter(|&k| eig.eigenvalues[k].abs() > threshold)
        .map(|k| eig.eigenvalues[k].abs())
        .fold(f64::INFINITY, f64::min);
    let gap_defined = gap.is_finite();
    SpectralSnapshot {
        eigenvalues,
        dark_subspace: dark,
        gap: if gap_defined { gap } else { 0.0 },
        gap_defined,
    }
}

const SYMMETRY_RTOL: f64 = 1e-12;

fn require_equal(a: f64, b: f64, what: &str) -> Result<()> {
    let scale = a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() > SYMMETRY_RTOL * scale {
        return Err(SimError::invalid(format!(
            "{what} must be equal for the closed-form dark state ({a} vs {b})"
        )));
    }
    Ok(())
}

fn require_nonzero(x: f64, name: &str) -> Result<()> {
    if x == 0.0 {
        return Err(SimError::invalid(format!(
            "coupling {name} vanishes; the closed-form dark state is singular"
        )));
    }
    Ok(())
}

/// Closed-form zero-eigenvalue eigenstate.
///
/// Scheme 1 (Ω_2 = … = Ω_N, G_1 = … = G_N): the ground amplitudes are
/// (1, Ω_1/Ω_2, …, Ω_1/Ω_2), exciteds zero, photon −Ω_1/G. Scheme 2 (all
/// couplings symmetric) is the Ω_1 = Ω_2 special case: (1, …, 1, 0, …, −Ω/G).
pub fn analytic_dark_state(c: &CouplingSet, scheme: Scheme) -> Result<Vec<f64>> {
    let n = c.n_atoms();
    for i in 2..n {
        require_equal(c.omega[i], c.omega[1], "trailing laser couplings")?;
    }
    for i in 1..n {
        require_equal(c.g[i], c.g[0], "cavity couplings")?;
    }
    if scheme == Scheme::Scheme2 {
        require_equal(c.omega[0], c.omega[1], "laser couplings")?;
    }
    require_nonzero(c.g[0], "G")?;
    let ratio = if scheme == Scheme::Scheme2 {
        1.0
    } else {
        require_nonzero(c.omega[1], "Ω_2")?;
        c.omega[0] / c.omega[1]
    };
    let mut d = vec![0.0; 2 * n + 1];
    d[0] = 1.0;
    for i in 1..n {
        d[i] = ratio;
    }
    d[2 * n] = -c.omega[0] / c.g[0];
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut d {
        *x /= norm;
    }
    Ok(d)
}

/// Squared projection of ψ(t) onto the instantaneous numeric dark subspace,
/// per grid point. A grid point where the Hamiltonian vanishes identically
/// reports 1 (everything is dark there).
pub fn dark_overlap_series(traj: &Trajectory, geo: &Geometry) -> Vec<f64> {
    traj.grid
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, state)| {
            let c = couplings_at(geo, t);
            let h = build_effective_hamiltonian(&c).expect("finite couplings");
            if h.iter().all(|&x| x == 0.0) {
                return 1.0;
            }
            let snap = snapshot(&h, DEFAULT_NULL_TOL);
            dark_projection(&snap.dark_subspace, state)
        })
        .collect()
}

/// ‖P_dark ψ‖² for a real orthonormal dark basis.
pub fn dark_projection(dark: &DMatrix<f64>, state: &[Complex64]) -> f64 {
    let re = DVector::from_iterator(state.len(), state.iter().map(|a| a.re));
    let im = DVector::from_iterator(state.len(), state.iter().map(|a| a.im));
    let pr = dark.tr_mul(&re);
    let pi = dark.tr_mul(&im);
    pr.norm_squared() + pi.norm_squared()
}

/// Pulse-ratio diagnostics for the fractional-STIRAP conditions of scheme 1.
#[derive(Clone, Debug, Serialize)]
pub struct FstirapReport {
    /// Ω_1/Ω_2 where Ω_2 first exceeds 1% of its peak.
    pub ratio_initial: f64,
    /// Ω_1/Ω_2 where Ω_1 last exceeds 1% of its peak.
    pub ratio_final: f64,
    /// min of G/max(Ω_1, Ω_2) over the window where either laser pulse
    /// exceeds 1% of its peak (G is the on-axis cavity envelope G_2).
    pub g_dominance: f64,
}

pub fn fstirap_condition_check(geo: &Geometry) -> Result<FstirapReport> {
    if geo.scheme != Scheme::Scheme1 {
        return Err(SimError::invalid(
            "f-STIRAP conditions apply to scheme 1 only",
        ));
    }
    let grid = make_time_grid(geo, 8001)?;
    let sets: Vec<CouplingSet> = grid.times.iter().map(|&t| couplings_at(geo, t)).collect();
    let omega1_peak = sets.iter().map(|c| c.omega[0].abs()).fold(0.0, f64::max);
    let omega2_peak = sets.iter().map(|c| c.omega[1].abs()).fold(0.0, f64::max);

    let first_on = sets
        .iter()
        .position(|c| c.omega[1].abs() > 0.01 * omega2_peak)
        .ok_or_else(|| SimError::invalid("laser pulse Ω_2 never turns on"))?;
    let last_on = sets
        .iter()
        .rposition(|c| c.omega[0].abs() > 0.01 * omega1_peak)
        .ok_or_else(|| SimError::invalid("laser pulse Ω_1 never turns on"))?;

    let ratio_initial = sets[first_on].omega[0] / sets[first_on].omega[1];
    let ratio_final = sets[last_on].omega[0] / sets[last_on].omega[1];

    let laser_peak = omega1_peak.max(omega2_peak);
    let g_dominance = sets
        .iter()
        .filter(|c| c.omega[0].abs().max(c.omega[1].abs()) > 0.01 * laser_peak)
        .map(|c| c.g[1].abs() / c.omega[0].abs().max(c.omega[1].abs()))
        .fold(f64::INFINITY, f64::min);

    Ok(FstirapReport {
        ratio_initial,
        ratio_final,
        g_dominance,
    })
}

/// Minimum bright gap over the grid times where the couplings are
/// non-negligible (above 1% of peak).
pub fn min_gap_over_window(geo: &Geometry, n_samples: usize) -> Result<f64> {
    let grid = make_time_grid(geo, n_samples.max(100))?;
    let sets: Vec<CouplingSet> = grid.times.iter().map(|&t| couplings_at(geo, t)).collect();
    let peak = sets
        .iter()
        .flat_map(|c| c.omega.iter().chain(c.g.iter()))
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let mut min_gap = f64::INFINITY;
    for c in &sets {
        let max_c = c
            .omega
            .iter()
            .chain(c.g.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        if max_c <= 0.01 * peak {
            continue;
        }
        let h = build_effective_hamiltonian(c)?;
        let snap = snapshot(&h, DEFAULT_NULL_TOL);
        if snap.gap_defined {
            min_gap = min_gap.min(snap.gap);
        }
    }
    Ok(if min_gap.is_finite() { min_gap } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_from(omega: [f64; 3], g: [f64; 3]) -> DMatrix<f64> {
        build_effective_hamiltonian(&CouplingSet {
            omega: omega.to_vec(),
            g: g.to_vec(),
        })
        .unwrap()
    }

    #[test]
    fn zero_matrix_is_all_dark() {
        let snap = snapshot(&h_from([0.0; 3], [0.0; 3]), DEFAULT_NULL_TOL);
        assert!(snap.eigenvalues.iter().all(|&l| l == 0.0));
        assert_eq!(snap.dark_subspace.ncols(), 7);
        assert!(!snap.gap_defined);
        assert_eq!(snap.gap, 0.0);
    }

    #[test]
    fn symmetric_couplings_have_two_dark_dimensions() {
        let snap = snapshot(&h_from([1.0; 3], [1.0; 3]), DEFAULT_NULL_TOL);
        assert_eq!(snap.dark_subspace.ncols(), 2);
        assert!(snap.gap > 0.0);
    }

    #[test]
    fn spectrum_is_symmetric_about_zero() {
        let h = h_from([1.3, -0.4, 2.2], [0.9, 1.1, -2.0]);
        let snap = snapshot(&h, DEFAULT_NULL_TOL);
        let scale = snap.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        for (a, b) in snap
            .eigenvalues
            .iter()
            .zip(snap.eigenvalues.iter().rev())
        {
            assert!((a + b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    fn null_residual(c: &CouplingSet, scheme: Scheme) -> f64 {
        let d = analytic_dark_state(c, scheme).unwrap();
        let h = build_effective_hamiltonian(c).unwrap();
        let hd = &h * DVector::from_column_slice(&d);
        let scale = h.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        hd.norm() / scale
    }

    #[test]
    fn scheme2_dark_state_limits() {
        // Ω = 0: the W state.
        let c = CouplingSet {
            omega: vec![0.0; 3],
            g: vec![2.0; 3],
        };
        let d = analytic_dark_state(&c, Scheme::Scheme2).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((d[i] - a).abs() < 1e-12);
        }
        for x in &d[3..] {
            assert!(x.abs() < 1e-12);
        }

        // Ω/G large: photon label dominates.
        let c = CouplingSet {
            omega: vec![1e4; 3],
            g: vec![1.0; 3],
        };
        let d = analytic_dark_state(&c, Scheme::Scheme2).unwrap();
        assert!(d[6].abs() > 0.999);
        assert!(null_residual(&c, Scheme::Scheme2) < 1e-12);
    }

    #[test]
    fn scheme1_dark_state_with_equal_lasers() {
        let c = CouplingSet {
            omega: vec![0.7, 0.7, 0.7],
            g: vec![500.0; 3],
        };
        let d = analytic_dark_state(&c, Scheme::Scheme1).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((d[i] - a).abs() < 1e-4);
        }
        assert!(d[6].abs() < 2e-3);
        assert!(null_residual(&c, Scheme::Scheme1) < 1e-12);
    }

    #[test]
    fn dark_state_preconditions_enforced() {
        let asym = CouplingSet {
            omega: vec![1.0, 2.0, 3.0],
            g: vec![1.0; 3],
        };
        assert!(analytic_dark_state(&asym, Scheme::Scheme1).is_err());
        let zero_g = CouplingSet {
            omega: vec![1.0, 1.0, 1.0],
            g: vec![0.0; 3],
        };
        assert!(analytic_dark_state(&zero_g, Scheme::Scheme2).is_err());
        let zero_omega2 = CouplingSet {
            omega: vec![1.0, 0.0, 0.0],
            g: vec![1.0; 3],
        };
        assert!(analytic_dark_state(&zero_omega2, Scheme::Scheme1).is_err());
    }

    #[test]
    fn dark_projection_of_dark_and_bright_vectors() {
        let h = h_from([1.0; 3], [1.0; 3]);
        let snap = snapshot(&h, DEFAULT_NULL_TOL);
        // A dark vector projects to 1.
        let d: Vec<Complex64> = snap
            .dark_subspace
            .column(0)
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        assert!((dark_projection(&snap.dark_subspace, &d) - 1.0).abs() < 1e-12);
        // A bright eigenvector projects to 0.
        let eig = h.clone().symmetric_eigen();
        let bright_idx = (0..7)
            .max_by(|&a, &b| {
                eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs())
            })
            .unwrap();
        let b: Vec<Complex64> = eig
            .eigenvectors
            .column(bright_idx)
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        assert!(dark_projection(&snap.dark_subspace, &b) < 1e-12);
    }

    #[test]
    fn fstirap_check_rejects_scheme2() {
        let geo = Geometry {
            scheme: Scheme::Scheme2,
            n_atoms: 3,
            v: 2.0,
            w_l: 20e-6,
            w_c: 30e-6,
            lambda: 780e-9,
            omega0: 2e7,
            g0: 5e5,
            z0: 31.9e-6,
            d: 30e-6,
            t_span: 4.0,
            omega_e: None,
            omega_c_freq: None,
        };
        assert!(fstirap_condition_check(&geo).is_err());
    }

    #[test]
    fn fstirap_separated_pulses_have_zero_initial_ratio() {
        // d ≫ W_L, z0 = 0: Ω_1 is negligible when Ω_2 turns on.
        let geo = Geometry {
            scheme: Scheme::Scheme1,
            n_atoms: 3,
            v: 2.0,
            w_l: 20e-6,
            w_c: 40e-6,
            lambda: 780e-9,
            omega0: 2e6,
            g0: 5e6,
            z0: 0.0,
            d: 120e-6,
            t_span: 4.0,
            omega_e: None,
            omega_c_freq: None,
        };
        let rep = fstirap_condition_check(&geo).unwrap();
        assert!(rep.ratio_initial.abs() < 1e-6, "{}", rep.ratio_initial);
    }
}
