use serde::Serialize;

use crate::discretization::StateField;
use crate::error::Error;
use crate::memory::{DirectHistory, ModeHistory};

/// Normed quantities at one report node. Optional entries are absent when the
/// run cannot produce them (no Gram inverse, no direct history, first node).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport<T> {
    pub t: T,
    pub step: usize,
    /// `||U||^2_{X^2}`.
    pub x2: T,
    /// `||U||^2_{V^1}`.
    pub v1: T,
    /// `||Phi||^2_{M^1}`.
    pub m1: T,
    /// `||Phi||^2_{M^0}`.
    pub m0: T,
    /// `x2 + m1`.
    pub energy: T,
    /// `(||U||^2_{V^-1} + ||Phi||^2_{M^0})^{1/2}`.
    pub dual: Option<T>,
    /// `<T Phi, Phi>_{M^1}`.
    pub pairing: T,
    /// `sup_tau tau TT(tau; Phi)`.
    pub tail_sup: Option<T>,
    /// Residual of the discrete energy identity over the last step.
    pub identity_residual: Option<T>,
    /// Residual of the differential inequality (should be `<= 0`).
    pub inequality_residual: Option<T>,
    /// `||u||^4_{L^4(Omega)}`.
    pub l4: T,
    /// `||u||^r_{L^r(Gamma)}`.
    pub lr: T,
}

/// Output of one run.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub reports: Vec<EnergyReport<T>>,
    /// Strided `(t, U(t))` snapshots.
    pub snapshots: Vec<(T, StateField<T>)>,
    pub final_state: StateField<T>,
    pub final_modes: Option<ModeHistory<T>>,
    pub final_direct: Option<DirectHistory<T>>,
    /// Set when the run aborted; the other fields hold the last good state.
    pub failure: Option<Error>,
}

impl<T: Copy> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.reports.iter().map(|r| r.t).collect()
    }

    /// `(t, E(t))` rows.
    pub fn energy_series(&self) -> Vec<(T, T)> {
        self.reports.iter().map(|r| (r.t, r.energy)).collect()
    }

    /// Turns an aborted run into its error.
    pub fn into_result(self) -> Result<Self, Error> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}
