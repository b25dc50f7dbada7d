//! Ideal polytropic gas thermodynamics and the 1D Euler eigensystem.
//!
//! Everything here is a pure function of the state; the eigendecomposition
//! is the one used to diagonalize the linearized system for the hyperbolic
//! wave, so its normalization is fixed once and for all: right eigenvectors
//! have first component 1 and the left matrix is the exact inverse.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// States with squared sound speed below this are rejected as near-vacuum.
pub const VACUUM_C2_THRESHOLD: f64 = 1e-12;

/// Fluid constants: ratio of specific heats, gas constant, entropy
/// normalization, and the dissipation base constants that get scaled by eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    pub r: f64,
    pub a: f64,
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
}

impl GasModel {
    pub fn new(gamma: f64, r: f64, a: f64, mu: f64, lambda: f64, kappa: f64) -> Result<Self> {
        let gas = GasModel {
            gamma,
            r,
            a,
            mu,
            lambda,
            kappa,
        };
        gas.validate()?;
        Ok(gas)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::Config(format!("gamma must be > 1, got {}", self.gamma)));
        }
        if !(self.r > 0.0) || !(self.a > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::Config(
                "gas constants R, A, kappa must be positive".into(),
            ));
        }
        if !(self.mu > 0.0) || 2.0 * self.mu + 3.0 * self.lambda < 0.0 {
            return Err(Error::Config(
                "viscosity must satisfy mu > 0 and 2*mu + 3*lambda >= 0".into(),
            ));
        }
        Ok(())
    }

    /// gamma = 1.4, R = A = mu = kappa = 1, lambda = 0.
    pub fn air_like() -> Self {
        GasModel {
            gamma: 1.4,
            r: 1.0,
            a: 1.0,
            mu: 1.0,
            lambda: 0.0,
            kappa: 1.0,
        }
    }

    /// Effective longitudinal viscosity 2*mu + lambda.
    pub fn mu_long(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }
}

/// (rho, v1, theta) at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub v1: f64,
    pub theta: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, v1: f64, theta: f64) -> Result<Self> {
        if !(rho > 0.0) || !(theta > 0.0) || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "need rho > 0 and theta > 0, got rho = {rho}, theta = {theta}"
            )));
        }
        Ok(PrimitiveState { rho, v1, theta })
    }
}

/// (rho, m1, E) at a point, with m1 = rho v1 and E the total energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    pub rho: f64,
    pub m1: f64,
    pub energy: f64,
}

impl ConservedState {
    pub fn internal_energy(&self) -> f64 {
        self.energy - self.m1 * self.m1 / (2.0 * self.rho)
    }

    fn check(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::Domain(format!("need rho > 0, got {}", self.rho)));
        }
        if self.internal_energy() <= 0.0 || !self.energy.is_finite() {
            return Err(Error::Domain(format!(
                "negative internal energy: E = {}, m1 = {}, rho = {}",
                self.energy, self.m1, self.rho
            )));
        }
        Ok(())
    }
}

fn check_positive(rho: f64, theta: f64) -> Result<()> {
    if !(rho > 0.0) || !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "need rho > 0 and theta > 0, got rho = {rho}, theta = {theta}"
        )));
    }
    Ok(())
}

/// p = R rho theta.
pub fn pressure(gas: &GasModel, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    Ok(gas.r * rho * theta)
}

/// S = -R ln rho + R/(gamma-1) ln theta + R/(gamma-1) ln(R/A).
pub fn entropy(gas: &GasModel, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    let g1 = gas.gamma - 1.0;
    Ok(-gas.r * rho.ln() + gas.r / g1 * theta.ln() + gas.r / g1 * (gas.r / gas.a).ln())
}

/// Pressure from the entropy form p = A rho^gamma exp((gamma-1) S / R).
pub fn pressure_from_entropy(gas: &GasModel, rho: f64, s: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("need rho > 0, got {rho}")));
    }
    Ok(gas.a * rho.powf(gas.gamma) * ((gas.gamma - 1.0) * s / gas.r).exp())
}

/// c = sqrt(gamma R theta).
pub fn sound_speed(gas: &GasModel, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    Ok((gas.gamma * gas.r * theta).sqrt())
}

/// (v1 - c, v1, v1 + c), strictly ordered.
pub fn eigenvalues(gas: &GasModel, state: &PrimitiveState) -> Result<(f64, f64, f64)> {
    let c = sound_speed(gas, state.rho, state.theta)?;
    Ok((state.v1 - c, state.v1, state.v1 + c))
}

/// The two 3-Riemann invariants: (v1 - 2c/(gamma-1), S).
pub fn riemann_invariants_3(gas: &GasModel, state: &PrimitiveState) -> Result<(f64, f64)> {
    let c = sound_speed(gas, state.rho, state.theta)?;
    let s = entropy(gas, state.rho, state.theta)?;
    Ok((state.v1 - 2.0 * c / (gas.gamma - 1.0), s))
}

pub fn prim_to_cons(gas: &GasModel, state: &PrimitiveState) -> ConservedState {
    let kinetic = 0.5 * state.v1 * state.v1;
    ConservedState {
        rho: state.rho,
        m1: state.rho * state.v1,
        energy: state.rho * (gas.r * state.theta / (gas.gamma - 1.0) + kinetic),
    }
}

pub fn cons_to_prim(gas: &GasModel, cstate: &ConservedState) -> Result<PrimitiveState> {
    cstate.check()?;
    let v1 = cstate.m1 / cstate.rho;
    let theta = (gas.gamma - 1.0) * cstate.internal_energy() / (gas.r * cstate.rho);
    PrimitiveState::new(cstate.rho, v1, theta)
}

/// Exact 1D Euler flux (m1, m1 v1 + p, (E + p) v1).
pub fn euler_flux(gas: &GasModel, cstate: &ConservedState) -> Result<Vector3<f64>> {
    cstate.check()?;
    let v1 = cstate.m1 / cstate.rho;
    let p = (gas.gamma - 1.0) * cstate.internal_energy();
    Ok(Vector3::new(
        cstate.m1,
        cstate.m1 * v1 + p,
        (cstate.energy + p) * v1,
    ))
}

/// Jacobian of the 1D Euler flux in conserved variables, from the closed-form
/// partials of p(rho, m1, E) = (gamma - 1)(E - m1^2 / 2 rho).
pub fn conservative_jacobian(gas: &GasModel, cstate: &ConservedState) -> Result<Matrix3<f64>> {
    cstate.check()?;
    let g1 = gas.gamma - 1.0;
    let rho = cstate.rho;
    let m = cstate.m1;
    let e = cstate.energy;
    let p = g1 * cstate.internal_energy();
    let p_rho = g1 * m * m / (2.0 * rho * rho);
    let p_m = -g1 * m / rho;
    let p_e = g1;
    Ok(Matrix3::new(
        0.0,
        1.0,
        0.0,
        -m * m / (rho * rho) + p_rho,
        2.0 * m / rho + p_m,
        p_e,
        -m * e / (rho * rho) + m / rho * p_rho - p * m / (rho * rho),
        e / rho + m / rho * p_m + p / rho,
        m / rho + m / rho * p_e,
    ))
}

/// Eigendecomposition of the conservative Jacobian: returns (L, lambda, R)
/// with L A R = diag(lambda), L R = I. Right eigenvectors are normalized to
/// first component 1; L is the matrix inverse of R.
pub fn eigendecompose_jacobian(
    gas: &GasModel,
    cstate: &ConservedState,
) -> Result<(Matrix3<f64>, Vector3<f64>, Matrix3<f64>)> {
    let prim = cons_to_prim(gas, cstate)?;
    let c2 = gas.gamma * gas.r * prim.theta;
    if c2 < VACUUM_C2_THRESHOLD {
        return Err(Error::Conditioning { c2 });
    }
    let c = c2.sqrt();
    let u = prim.v1;
    let p = gas.r * prim.rho * prim.theta;
    let enthalpy = (cstate.energy + p) / cstate.rho;
    let r_mat = Matrix3::new(
        1.0,
        1.0,
        1.0,
        u - c,
        u,
        u + c,
        enthalpy - u * c,
        0.5 * u * u,
        enthalpy + u * c,
    );
    let l_mat = r_mat.try_inverse().ok_or(Error::Conditioning { c2 })?;
    Ok((l_mat, Vector3::new(u - c, u, u + c), r_mat))
}
