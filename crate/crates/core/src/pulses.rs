//! Geometric pulse profiles.
//!
//! The atoms cross the cavity mode and the laser beam at constant speed, so
//! the spatial Gaussian/standing-wave mode profiles become time-dependent
//! Rabi frequencies. Scheme 1 sends atom 1 against atoms 2..N to realize a
//! fractional STIRAP; scheme 2 sends all atoms together on the z = z0 line
//! with one photon initially in the cavity (multilevel STIRAP).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::CouplingSet;
use crate::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Scheme1,
    Scheme2,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Scheme1 => write!(f, "scheme1"),
            Scheme::Scheme2 => write!(f, "scheme2"),
        }
    }
}

/// Physical/geometric configuration of the cavity-laser-atom arrangement.
/// All quantities in SI units (m, s, rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub scheme: Scheme,
    /// Number of atoms; only 3 is validated against the reference figures.
    pub n_atoms: usize,
    /// Atom speed (m/s).
    pub v: f64,
    /// Laser beam waist (m).
    pub w_l: f64,
    /// Cavity mode waist (m).
    pub w_c: f64,
    /// Cavity wavelength (m).
    pub lambda: f64,
    /// Peak laser Rabi frequency (rad/s); may be negative.
    pub omega0: f64,
    /// Peak cavity Rabi frequency (rad/s); may be negative.
    pub g0: f64,
    /// Off-axis line offset z0 (m).
    pub z0: f64,
    /// Distance between cavity center and laser axis (m).
    pub d: f64,
    /// Half-width of the simulation window in units of (max waist + d)/v.
    pub t_span: f64,
    /// Optional excited-state frequency (rad/s) for the resonant-approximation
    /// advisory check.
    pub omega_e: Option<f64>,
    /// Optional cavity frequency (rad/s) for the same check.
    pub omega_c_freq: Option<f64>,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 2 {
            return Err(SimError::invalid("n_atoms must be at least 2"));
        }
        let positives = [
            ("v", self.v),
            ("w_l", self.w_l),
            ("w_c", self.w_c),
            ("lambda", self.lambda),
            ("t_span", self.t_span),
        ];
        for (name, val) in positives {
            if !(val > 0.0) || !val.is_finite() {
                return Err(SimError::invalid(format!(
                    "{name} must be positive and finite, got {val}"
                )));
            }
        }
        let nonnegatives = [("z0", self.z0), ("d", self.d)];
        for (name, val) in nonnegatives {
            if !(val >= 0.0) || !val.is_finite() {
                return Err(SimError::invalid(format!(
                    "{name} must be non-negative and finite, got {val}"
                )));
            }
        }
        for (name, val) in [("omega0", self.omega0), ("g0", self.g0)] {
            if !val.is_finite() {
                return Err(SimError::invalid(format!("{name} must be finite, got {val}")));
            }
        }
        Ok(())
    }

    /// Standing-wave factor cos(2π z0 / λ) seen on the z = z0 line.
    pub fn standing_wave(&self) -> f64 {
        (2.0 * PI * self.z0 / self.lambda).cos()
    }
}

/// Uniform time grid, symmetric about the moment the atoms cross the cavity
/// center.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_i: f64,
    pub t_f: f64,
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn n_steps(&self) -> usize {
        self.times.len()
    }

    pub fn dt(&self) -> f64 {
        (self.t_f - self.t_i) / (self.times.len() as f64 - 1.0)
    }

    /// Grid running through the same instants in reverse (for time-reversal
    /// checks).
    pub fn reversed(&self) -> TimeGrid {
        TimeGrid {
            t_i: self.t_f,
            t_f: self.t_i,
            times: self.times.iter().rev().copied().collect(),
        }
    }
}

/// Instantaneous Rabi frequencies at time `t` (t = 0 when the atoms cross the
/// cavity center).
pub fn couplings_at(geo: &Geometry, t: f64) -> CouplingSet {
    let n = geo.n_atoms;
    let x = geo.v * t;
    let g_envelope = geo.g0 * (-(x * x) / (geo.w_c * geo.w_c)).exp();
    let cosz = geo.standing_wave();
    let waist_sq = geo.w_l * geo.w_l;
    let z_factor = (-(geo.z0 * geo.z0) / waist_sq).exp();
    match geo.scheme {
        Scheme::Scheme1 => {
            // Atom 1 runs opposite to the others: it meets the laser at
            // +d/v, the others at -d/v; only atom 1 travels on z = z0.
            let mut omega = vec![geo.omega0 * (-((x + geo.d).powi(2)) / waist_sq).exp(); n];
            let mut g = vec![g_envelope; n];
            omega[0] = geo.omega0 * z_factor * (-((x - geo.d).powi(2)) / waist_sq).exp();
            g[0] = g_envelope * cosz;
            CouplingSet { omega, g }
        }
        Scheme::Scheme2 => {
            let omega = geo.omega0 * z_factor * (-((x + geo.d).powi(2)) / waist_sq).exp();
            CouplingSet {
                omega: vec![omega; n],
                g: vec![g_envelope * cosz; n],
            }
        }
    }
}

/// Symmetric uniform grid wide enough that every coupling at the window edge
/// is below exp(-t_span²) of its peak.
pub fn make_time_grid(geo: &Geometry, n_steps: usize) -> Result<TimeGrid> {
    geo.validate()?;
    if n_steps < 100 {
        return Err(SimError::invalid(format!(
            "n_steps must be at least 100, got {n_steps}"
        )));
    }
    let t_f = geo.t_span * (geo.w_c.max(geo.w_l) + geo.d) / geo.v;
    let t_i = -t_f;
    let dt = (t_f - t_i) / (n_steps as f64 - 1.0);
    let mut times: Vec<f64> = (0..n_steps).map(|k| t_i + dt * k as f64).collect();
    times[n_steps - 1] = t_f;
    Ok(TimeGrid { t_i, t_f, times })
}

/// Dimensionless pulse areas controlling global adiabaticity
/// (Ω0·T_L and G0·T_C with T_L = W_L/v, T_C = W_C/v).
#[derive(Clone, Debug, Serialize)]
pub struct AdiabaticityReport {
    pub omega_area: f64,
    pub g_area: f64,
    /// Set when either area is below 10.
    pub warning: bool,
    /// Resonant-approximation check; present only when the optical
    /// frequencies were supplied.
    pub rwa_ok: Option<bool>,
}

pub fn adiabaticity_report(geo: &Geometry) -> AdiabaticityReport {
    let omega_area = geo.omega0.abs() * geo.w_l / geo.v;
    let g_area = geo.g0.abs() * geo.w_c / geo.v;
    let rwa_ok = match (geo.omega_e, geo.omega_c_freq) {
        (Some(we), Some(wc)) => {
            Some(geo.omega0.abs() <= 1e-2 * we && geo.g0.abs() <= 1e-2 * wc)
        }
        _ => None,
    };
    AdiabaticityReport {
        omega_area,
        g_area,
        warning: omega_area < 10.0 || g_area < 10.0,
        rwa_ok,
    }
}
