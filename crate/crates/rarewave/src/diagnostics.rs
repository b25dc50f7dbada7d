//! Discrete norms, the perturbation decomposition against the composite
//! profile, the relative entropy functional, and the sup-norm distance of a
//! trajectory to the exact fan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{cons_to_prim, ConservedState, GasModel};
use crate::profile::CompositeProfile;
use crate::rarefaction::{exact_fan, Grid1, LpNorm, RiemannData};
use crate::solver::Trajectory;

/// k-th central-difference derivative with one-sided end stencils (exact on
/// affine fields); k = 0 returns a copy.
pub fn derivative(field: &[f64], dx: f64, order: usize) -> Result<Vec<f64>> {
    if order > 2 {
        return Err(Error::Contract(format!(
            "derivative order must be 0..=2, got {order}"
        )));
    }
    let n = field.len();
    if n < 3 {
        return Err(Error::Contract(format!("need at least 3 samples, got {n}")));
    }
    match order {
        0 => Ok(field.to_vec()),
        1 => {
            let mut out = vec![0.0; n];
            for i in 1..n - 1 {
                out[i] = (field[i + 1] - field[i - 1]) / (2.0 * dx);
            }
            out[0] = (field[1] - field[0]) / dx;
            out[n - 1] = (field[n - 1] - field[n - 2]) / dx;
            Ok(out)
        }
        _ => {
            let mut out = vec![0.0; n];
            for i in 1..n - 1 {
                out[i] = (field[i + 1] - 2.0 * field[i] + field[i - 1]) / (dx * dx);
            }
            out[0] = out[1];
            out[n - 1] = out[n - 2];
            Ok(out)
        }
    }
}

/// Grid-weighted L^p norm of the order-th derivative of a sampled field.
pub fn discrete_norm(field: &[f64], dx: f64, p: LpNorm, order: usize) -> Result<f64> {
    Ok(p.of(&derivative(field, dx, order)?, dx))
}

/// Pointwise differences between a solver field and the composite profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationField {
    pub grid: Grid1,
    /// phi = rho - rho~.
    pub phi: Vec<f64>,
    /// psi = v1 - v1~.
    pub psi: Vec<f64>,
    /// xi = theta - theta~.
    pub xi: Vec<f64>,
}

impl PerturbationField {
    /// Squared H^order half-norm: sum of the squared L2 norms of the order-th
    /// derivatives of (phi, psi, xi).
    pub fn norm_sq(&self, order: usize) -> Result<f64> {
        let dx = self.grid.dx();
        let mut sum = 0.0;
        for f in [&self.phi, &self.psi, &self.xi] {
            let v = discrete_norm(f, dx, LpNorm::L2, order)?;
            sum += v * v;
        }
        Ok(sum)
    }

    pub fn sup(&self) -> f64 {
        self.phi
            .iter()
            .chain(&self.psi)
            .chain(&self.xi)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Decompose a conserved solver field around the profile in primitives.
pub fn perturbation(
    gas: &GasModel,
    field: &[ConservedState],
    profile: &CompositeProfile,
) -> Result<PerturbationField> {
    if field.len() != profile.grid.n {
        return Err(Error::Contract(format!(
            "field has {} cells, profile grid has {}",
            field.len(),
            profile.grid.n
        )));
    }
    let mut phi = Vec::with_capacity(field.len());
    let mut psi = Vec::with_capacity(field.len());
    let mut xi = Vec::with_capacity(field.len());
    for (c, p) in field.iter().zip(&profile.prim) {
        let s = cons_to_prim(gas, c)?;
        phi.push(s.rho - p.rho);
        psi.push(s.v1 - p.v1);
        xi.push(s.theta - p.theta);
    }
    Ok(PerturbationField {
        grid: profile.grid.clone(),
        phi,
        psi,
        xi,
    })
}

/// Phi(s) = s - ln s - 1; nonnegative, zero only at s = 1.
pub fn entropy_phi(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("Phi needs s > 0, got {s}")));
    }
    Ok(s - s.ln() - 1.0)
}

/// Relative entropy density per cell and its integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyField {
    pub eta_star: Vec<f64>,
    pub integral: f64,
}

/// eta* = R rho theta~ Phi(rho~/rho) + R/(gamma-1) rho theta~ Phi(theta/theta~)
///        + 1/2 rho |v - v~|^2.
pub fn relative_entropy(
    gas: &GasModel,
    field: &[ConservedState],
    profile: &CompositeProfile,
) -> Result<EntropyField> {
    if field.len() != profile.grid.n {
        return Err(Error::Contract(format!(
            "field has {} cells, profile grid has {}",
            field.len(),
            profile.grid.n
        )));
    }
    let mut eta = Vec::with_capacity(field.len());
    for (c, p) in field.iter().zip(&profile.prim) {
        let s = cons_to_prim(gas, c)?;
        let dv = s.v1 - p.v1;
        let value = gas.r * s.rho * p.theta * entropy_phi(p.rho / s.rho)?
            + gas.r / (gas.gamma - 1.0) * s.rho * p.theta * entropy_phi(s.theta / p.theta)?
            + 0.5 * s.rho * dv * dv;
        eta.push(value);
    }
    let integral = eta.iter().sum::<f64>() * profile.grid.dx();
    Ok(EntropyField {
        eta_star: eta,
        integral,
    })
}

/// Max over snapshots with t in [h, T] of the componentwise sup distance to
/// the exact self-similar fan.
pub fn sup_error_vs_fan(
    gas: &GasModel,
    traj: &Trajectory,
    data: &RiemannData,
    h: f64,
    t_max: f64,
) -> Result<f64> {
    if !(h > 0.0 && h <= t_max) {
        return Err(Error::Contract(format!(
            "need 0 < h <= T, got h = {h}, T = {t_max}"
        )));
    }
    let mut any = false;
    let mut worst = 0.0f64;
    for (s, t) in traj.times.iter().enumerate() {
        if *t < h - 1e-12 || *t > t_max + 1e-12 {
            continue;
        }
        any = true;
        for (i, x) in traj.grid.centers().enumerate() {
            let p = cons_to_prim(gas, &traj.fields[s][i])?;
            let f = exact_fan(gas, data, *t, x)?;
            worst = worst
                .max((p.rho - f.rho).abs())
                .max((p.v1 - f.v1).abs())
                .max((p.theta - f.theta).abs());
        }
    }
    if !any {
        return Err(Error::Contract(format!(
            "no snapshots in the window [{h}, {t_max}]"
        )));
    }
    Ok(worst)
}

/// Time series of squared perturbation norms per derivative order, plus the
/// time-integrated dissipation ledgers (trapezoid rule over snapshots).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSeries {
    pub times: Vec<f64>,
    /// norms_sq[s][i] for order i in the requested list.
    pub norms_sq: Vec<Vec<f64>>,
    pub orders: Vec<usize>,
    /// int eps ||d^(1+i)(psi, xi)||^2 dt per order.
    pub dissipation: Vec<f64>,
    /// int || sqrt(v1 bar_x) d^i phi ||^2 dt per order.
    pub weighted_phi: Vec<f64>,
}

impl PerturbationSeries {
    pub fn sup_norm_sq(&self, order: usize) -> Option<f64> {
        let k = self.orders.iter().position(|o| *o == order)?;
        self.norms_sq
            .iter()
            .map(|row| row[k])
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,order,norm_sq\n");
        for (s, t) in self.times.iter().enumerate() {
            for (k, o) in self.orders.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", t, o, self.norms_sq[s][k]));
            }
        }
        out
    }
}

/// Measure perturbation norms along a trajectory. `profiles` must be aligned
/// with the trajectory snapshots (same grid, same times).
pub fn perturbation_norms(
    gas: &GasModel,
    traj: &Trajectory,
    profiles: &[CompositeProfile],
    eps: f64,
    orders: &[usize],
) -> Result<PerturbationSeries> {
    if profiles.len() != traj.times.len() {
        return Err(Error::Contract(format!(
            "{} profiles for {} snapshots",
            profiles.len(),
            traj.times.len()
        )));
    }
    for o in orders {
        if *o > 2 {
            return Err(Error::Contract(format!("orders must be <= 2, got {o}")));
        }
    }
    let dx = traj.grid.dx();
    let mut norms_sq = Vec::with_capacity(traj.times.len());
    let mut diss_rows = Vec::with_capacity(traj.times.len());
    let mut wphi_rows = Vec::with_capacity(traj.times.len());
    for (s, profile) in profiles.iter().enumerate() {
        if (profile.t - traj.times[s]).abs() > 1e-9 * (1.0 + traj.times[s]) {
            return Err(Error::Contract(format!(
                "profile time {} does not match snapshot time {}",
                profile.t, traj.times[s]
            )));
        }
        let pert = perturbation(gas, &traj.fields[s], profile)?;
        let mut row = Vec::with_capacity(orders.len());
        let mut drow = Vec::with_capacity(orders.len());
        let mut wrow = Vec::with_capacity(orders.len());
        for &o in orders {
            row.push(pert.norm_sq(o)?);
            // dissipation integrand: one derivative more on (psi, xi), but
            // capped at the stored stencil
            let o1 = (o + 1).min(2);
            let dpsi = discrete_norm(&pert.psi, dx, LpNorm::L2, o1)?;
            let dxi = discrete_norm(&pert.xi, dx, LpNorm::L2, o1)?;
            drow.push(eps * (dpsi * dpsi + dxi * dxi));
            let dphi = derivative(&pert.phi, dx, o)?;
            let mut w = 0.0;
            for (i, v) in dphi.iter().enumerate() {
                let v1x = profile.smooth[i].d1[1].max(0.0);
                w += v1x * v * v;
            }
            wrow.push(w * dx);
        }
        norms_sq.push(row);
        diss_rows.push(drow);
        wphi_rows.push(wrow);
    }
    // trapezoid rule in time
    let integrate = |rows: &[Vec<f64>], k: usize| -> f64 {
        let mut acc = 0.0;
        for s in 1..traj.times.len() {
            let dt = traj.times[s] - traj.times[s - 1];
            acc += 0.5 * dt * (rows[s][k] + rows[s - 1][k]);
        }
        acc
    };
    let dissipation = (0..orders.len()).map(|k| integrate(&diss_rows, k)).collect();
    let weighted_phi = (0..orders.len()).map(|k| integrate(&wphi_rows, k)).collect();
    Ok(PerturbationSeries {
        times: traj.times.clone(),
        norms_sq,
        orders: orders.to_vec(),
        dissipation,
        weighted_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{prim_to_cons, GasModel, PrimitiveState};
    use crate::hyperbolic::{solve_hyperbolic_wave, DEFAULT_CFL};
    use crate::profile::assemble_profile;
    use crate::rarefaction::SmoothFanParams;

    fn gas() -> GasModel {
        GasModel::air_like()
    }

    fn data() -> RiemannData {
        RiemannData::connect(&gas(), PrimitiveState::new(1.0, 0.0, 1.0).unwrap(), 0.5).unwrap()
    }

    fn profile_at(eps: f64, delta: f64, t: f64) -> CompositeProfile {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, delta).unwrap();
        let grid = Grid1::for_fan(&params, t, 16).unwrap();
        let hw = solve_hyperbolic_wave(&g, &d, &params, eps, t, &grid, DEFAULT_CFL, 1).unwrap();
        assemble_profile(&g, &d, &params, &hw, hw.times.len() - 1).unwrap()
    }

    #[test]
    fn norm_examples() {
        let grid = Grid1::new(0.0, 4.0, 400).unwrap();
        let dx = grid.dx();
        let constant: Vec<f64> = (0..grid.n).map(|_| 3.0).collect();
        let v = discrete_norm(&constant, dx, LpNorm::L2, 0).unwrap();
        assert!((v - 3.0 * 4.0f64.sqrt()).abs() < 1e-12);
        // linear field: first derivative exact everywhere
        let linear: Vec<f64> = grid.centers().map(|x| 2.5 * x).collect();
        let v = discrete_norm(&linear, dx, LpNorm::L2, 1).unwrap();
        assert!((v - 2.5 * 2.0).abs() < 1e-10, "v = {v}");
        let v2 = discrete_norm(&linear, dx, LpNorm::L2, 2).unwrap();
        assert!(v2 < 1e-8);
        // sin over full periods: L2 = sqrt(M/2)
        let per = Grid1::new(0.0, 2.0 * std::f64::consts::PI, 512).unwrap();
        let sine: Vec<f64> = per.centers().map(|x| (3.0 * x).sin()).collect();
        let v = discrete_norm(&sine, per.dx(), LpNorm::L2, 0).unwrap();
        let expect = (std::f64::consts::PI).sqrt();
        assert!((v - expect).abs() < 1e-4, "v = {v}, expect {expect}");
        assert!(discrete_norm(&sine, per.dx(), LpNorm::L2, 3).is_err());
    }

    #[test]
    fn phi_reference_values() {
        assert_eq!(entropy_phi(1.0).unwrap(), 0.0);
        let v = entropy_phi(2.0).unwrap();
        assert!((v - (1.0 - 2.0f64.ln())).abs() < 1e-15);
        assert!((v - 0.306853).abs() < 1e-6);
        assert!(entropy_phi(0.0).is_err());
        assert!(entropy_phi(-1.0).is_err());
    }

    #[test]
    fn entropy_zero_on_coincidence() {
        let g = gas();
        let cp = profile_at(0.02, 0.4, 0.5);
        let field: Vec<_> = cp.prim.iter().map(|p| prim_to_cons(&g, p)).collect();
        let e = relative_entropy(&g, &field, &cp).unwrap();
        assert!(e.eta_star.iter().all(|v| v.abs() < 1e-12));
        assert!(e.integral.abs() < 1e-12);
    }

    #[test]
    fn entropy_quadratic_equivalence() {
        use rand::{Rng, SeedableRng};
        let g = gas();
        let cp = profile_at(0.0, 0.4, 0.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut ratios = Vec::new();
        for _ in 0..1000 {
            let i = rng.gen_range(0..cp.grid.n);
            let p = &cp.prim[i];
            let dphi = rng.gen_range(-0.1..0.1);
            let dpsi = rng.gen_range(-0.1..0.1);
            let dxi = rng.gen_range(-0.1..0.1);
            let mag = dphi * dphi + dpsi * dpsi + dxi * dxi;
            if mag < 1e-6 {
                continue;
            }
            let state = PrimitiveState::new(p.rho + dphi, p.v1 + dpsi, p.theta + dxi).unwrap();
            let field = vec![prim_to_cons(&g, &state)];
            let mut one = cp.clone();
            one.grid = Grid1::new(0.0, 1.0, 1).unwrap();
            one.prim = vec![*p];
            one.smooth = vec![cp.smooth[i]];
            one.z = vec![cp.z[i]];
            one.prim_x = vec![cp.prim_x[i]];
            one.prim_xx = vec![cp.prim_xx[i]];
            let eta = relative_entropy(&g, &field, &one).unwrap().eta_star[0];
            assert!(eta >= 0.0);
            ratios.push(eta / mag);
        }
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        assert!(lo > 0.05 && hi < 20.0, "ratio range [{lo}, {hi}]");
    }

    #[test]
    fn perturbation_reconstruction_exact() {
        let g = gas();
        let cp = profile_at(0.02, 0.4, 0.5);
        let field: Vec<_> = cp
            .prim
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let bump = 0.01 * ((i as f64) * 0.1).sin();
                prim_to_cons(
                    &g,
                    &PrimitiveState::new(p.rho + bump, p.v1 - bump, p.theta + 0.5 * bump).unwrap(),
                )
            })
            .collect();
        let pert = perturbation(&g, &field, &cp).unwrap();
        for i in 0..cp.grid.n {
            let rec = PrimitiveState::new(
                cp.prim[i].rho + pert.phi[i],
                cp.prim[i].v1 + pert.psi[i],
                cp.prim[i].theta + pert.xi[i],
            )
            .unwrap();
            let back = cons_to_prim(&g, &field[i]).unwrap();
            assert!((rec.rho - back.rho).abs() < 1e-13);
            assert!((rec.v1 - back.v1).abs() < 1e-13);
            assert!((rec.theta - back.theta).abs() < 1e-13);
        }
    }

    #[test]
    fn fan_error_examples() {
        let g = gas();
        let d = data();
        let grid = Grid1::new(-4.0, 4.0, 256).unwrap();
        // trajectory that IS the exact fan
        let times = [0.5, 1.0];
        let mut fields = Vec::new();
        for t in times {
            let row: Vec<_> = grid
                .centers()
                .map(|x| prim_to_cons(&g, &exact_fan(&g, &d, t, x).unwrap()))
                .collect();
            fields.push(row);
        }
        let traj = Trajectory {
            grid: grid.clone(),
            times: times.to_vec(),
            fields,
            ledger: Vec::new(),
        };
        assert!(sup_error_vs_fan(&g, &traj, &d, 0.4, 1.0).unwrap() < 1e-12);
        assert!(sup_error_vs_fan(&g, &traj, &d, 2.0, 3.0).is_err());
        // enlarging the window never decreases the sup
        let narrow = sup_error_vs_fan(&g, &traj, &d, 0.9, 1.0).unwrap();
        let wide = sup_error_vs_fan(&g, &traj, &d, 0.4, 1.0).unwrap();
        assert!(wide >= narrow);
    }

    #[test]
    fn zero_perturbation_series() {
        let g = gas();
        let cp = profile_at(0.02, 0.4, 0.5);
        let field: Vec<_> = cp.prim.iter().map(|p| prim_to_cons(&g, p)).collect();
        let traj = Trajectory {
            grid: cp.grid.clone(),
            times: vec![cp.t],
            fields: vec![field],
            ledger: Vec::new(),
        };
        let series = perturbation_norms(&g, &traj, &[cp.clone()], 0.02, &[0, 1, 2]).unwrap();
        for row in &series.norms_sq {
            for v in row {
                assert!(*v < 1e-20, "norm_sq = {v}");
            }
        }
        assert!(perturbation_norms(&g, &traj, &[], 0.02, &[0]).is_err());
        assert!(perturbation_norms(&g, &traj, &[cp], 0.02, &[3]).is_err());
    }
}
