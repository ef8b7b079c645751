//! Basis bookkeeping and Hamiltonian construction.
//!
//! The single-excitation subspace for N atoms has dimension 2N+1 and is
//! ordered as: the N "ground" labels (atom i in g1, all others in g2, cavity
//! vacuum) for i = 1..N, then the N excited labels (atom i in e), then the
//! photon label (all atoms in g2, one cavity photon). This block ordering
//! (grounds | exciteds | photon) keeps the coupling sparsity pattern and the
//! dark-state formulas transparent.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Result, SimError};

/// Internal state of a single three-level atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomState {
    G1,
    E,
    G2,
}

impl AtomState {
    fn symbol(self) -> &'static str {
        match self {
            AtomState::G1 => "g1",
            AtomState::E => "e",
            AtomState::G2 => "g2",
        }
    }

    /// Position in the {g1, e, g2} tensor ordering of one atom.
    fn tensor_digit(self) -> usize {
        match self {
            AtomState::G1 => 0,
            AtomState::E => 1,
            AtomState::G2 => 2,
        }
    }
}

/// One basis ket |A1,...,AN, n⟩ of the single-excitation subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisLabel {
    pub atom_states: Vec<AtomState>,
    pub photon_number: u8,
}

impl BasisLabel {
    /// Number of excitations carried by this label (g1 and e count as one,
    /// as does the photon).
    pub fn excitations(&self) -> usize {
        let atom_exc = self
            .atom_states
            .iter()
            .filter(|s| !matches!(s, AtomState::G2))
            .count();
        atom_exc + self.photon_number as usize
    }

    /// Index of this label in the full tensor basis {g1,e,g2}^⊗N ⊗ {0,1}.
    pub fn tensor_index(&self) -> usize {
        let mut idx = 0;
        for s in &self.atom_states {
            idx = idx * 3 + s.tensor_digit();
        }
        idx * 2 + self.photon_number as usize
    }

    /// Compact name used for CSV column headers, e.g. "g1g2g2_0".
    pub fn name(&self) -> String {
        let atoms: String = self.atom_states.iter().map(|s| s.symbol()).collect();
        format!("{}_{}", atoms, self.photon_number)
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let atoms: Vec<&str> = self.atom_states.iter().map(|s| s.symbol()).collect();
        write!(f, "|{},{}⟩", atoms.join(","), self.photon_number)
    }
}

/// Dimension of the single-excitation subspace for `n_atoms` atoms.
pub fn subspace_dim(n_atoms: usize) -> usize {
    2 * n_atoms + 1
}

/// Dimension of the full tensor Hilbert space (photon numbers 0 and 1).
pub fn full_dim(n_atoms: usize) -> usize {
    3usize.pow(n_atoms as u32) * 2
}

/// Ordered basis of the single-excitation subspace.
pub fn canonical_basis(n_atoms: usize) -> Result<Vec<BasisLabel>> {
    if n_atoms < 2 {
        return Err(SimError::invalid(format!(
            "canonical_basis requires at least 2 atoms, got {n_atoms}"
        )));
    }
    let mut labels = Vec::with_capacity(subspace_dim(n_atoms));
    for state in [AtomState::G1, AtomState::E] {
        for i in 0..n_atoms {
            let mut atoms = vec![AtomState::G2; n_atoms];
            atoms[i] = state;
            labels.push(BasisLabel {
                atom_states: atoms,
                photon_number: 0,
            });
        }
    }
    labels.push(BasisLabel {
        atom_states: vec![AtomState::G2; n_atoms],
        photon_number: 1,
    });
    Ok(labels)
}

/// The 2N instantaneous Rabi frequencies, in rad/s. Signs are physical
/// (standing-wave cosine and dipole conventions can flip them).
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    /// Laser Rabi frequencies Ω_1..Ω_N.
    pub omega: Vec<f64>,
    /// Cavity Rabi frequencies G_1..G_N.
    pub g: Vec<f64>,
}

impl CouplingSet {
    pub fn n_atoms(&self) -> usize {
        self.omega.len()
    }

    fn validate(&self) -> Result<()> {
        if self.omega.len() != self.g.len() {
            return Err(SimError::invalid(format!(
                "coupling set has {} laser but {} cavity values",
                self.omega.len(),
                self.g.len()
            )));
        }
        if self.omega.len() < 2 {
            return Err(SimError::invalid("coupling set needs at least 2 atoms"));
        }
        for (k, v) in self.omega.iter().chain(self.g.iter()).enumerate() {
            if !v.is_finite() {
                return Err(SimError::invalid(format!(
                    "non-finite coupling at position {k}: {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Effective Hamiltonian on the single-excitation subspace, canonical
/// ordering, units rad/s. Real symmetric with zero diagonal.
///
/// Linkage: ground i ↔ excited i via Ω_i, excited i ↔ photon via G_i.
pub fn build_effective_hamiltonian(c: &CouplingSet) -> Result<DMatrix<f64>> {
    c.validate()?;
    let n = c.n_atoms();
    let dim = subspace_dim(n);
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        h[(i, n + i)] = c.omega[i];
        h[(n + i, i)] = c.omega[i];
        h[(n + i, 2 * n)] = c.g[i];
        h[(2 * n, n + i)] = c.g[i];
    }
    Ok(h)
}

/// Full-space Hamiltonian over {g1,e,g2}^⊗N ⊗ {0,1} in the resonant rotating
/// frame (all diagonal entries zero). Used as a validation oracle for the
/// effective Hamiltonian: the subspace is exactly decoupled.
pub fn build_full_hamiltonian(c: &CouplingSet) -> Result<DMatrix<f64>> {
    c.validate()?;
    let n = c.n_atoms();
    let dim = full_dim(n);
    let mut h = DMatrix::zeros(dim, dim);
    // Enumerate tensor basis states: index = (atom digits base 3) * 2 + n.
    for idx in 0..dim {
        let photon = idx % 2;
        let mut digits = vec![0usize; n];
        let mut rest = idx / 2;
        for i in (0..n).rev() {
            digits[i] = rest % 3;
            rest /= 3;
        }
        for i in 0..n {
            // Laser: g1_i ↔ e_i, photon number unchanged.
            if digits[i] == 0 {
                let mut to = digits.clone();
                to[i] = 1;
                let j = tensor_index(&to, photon);
                h[(idx, j)] = c.omega[i];
                h[(j, idx)] = c.omega[i];
            }
            // Cavity: e_i ⊗ |m⟩ ↔ g2_i ⊗ |m+1⟩ with element G_i·√(m+1).
            if digits[i] == 1 && photon == 0 {
                let mut to = digits.clone();
                to[i] = 2;
                let j = tensor_index(&to, 1);
                h[(idx, j)] = c.g[i];
                h[(j, idx)] = c.g[i];
            }
        }
    }
    Ok(h)
}

fn tensor_index(digits: &[usize], photon: usize) -> usize {
    let mut idx = 0;
    for &d in digits {
        idx = idx * 3 + d;
    }
    idx * 2 + photon
}

/// Embed a subspace state vector into the full tensor space. Norm-preserving.
pub fn embed_state(amplitudes: &[Complex64], n_atoms: usize) -> Result<Vec<Complex64>> {
    let dim = subspace_dim(n_atoms);
    if amplitudes.len() != dim {
        return Err(SimError::invalid(format!(
            "embed_state: expected {dim} amplitudes for {n_atoms} atoms, got {}",
            amplitudes.len()
        )));
    }
    let basis = canonical_basis(n_atoms)?;
    let mut full = vec![Complex64::ZERO; full_dim(n_atoms)];
    for (a, label) in amplitudes.iter().zip(&basis) {
        full[label.tensor_index()] = *a;
    }
    Ok(full)
}

/// Project a full-space vector back onto the subspace (adjoint of
/// [`embed_state`]).
pub fn project_state(full: &[Complex64], n_atoms: usize) -> Result<Vec<Complex64>> {
    if full.len() != full_dim(n_atoms) {
        return Err(SimError::invalid(format!(
            "project_state: expected {} amplitudes, got {}",
            full_dim(n_atoms),
            full.len()
        )));
    }
    let basis = canonical_basis(n_atoms)?;
    Ok(basis.iter().map(|l| full[l.tensor_index()]).collect())
}
