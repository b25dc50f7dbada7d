//! The hyperbolic correction wave z(t, x1).
//!
//! z solves the hyperbolic system linearized around the smooth rarefaction
//! with the physical dissipation terms as source, starting from zero data.
//! The solve works in the diagonal coordinates Z = L z, where the first two
//! components decouple from the third; a first-order conservative upwind
//! scheme integrates the transport part and explicit Euler the sources and
//! coupling, with all coefficients re-evaluated from closed-form profile
//! samples each step.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_log_fit, FitLine};
use crate::gas::{eigendecompose_jacobian, eigenvalues, prim_to_cons, GasModel};
use crate::rarefaction::{
    delta_rule, smooth_rarefaction, Grid1, ProfileSample, RiemannData, SmoothFanParams,
};

/// Courant number used by default against max |lambda3|.
pub const DEFAULT_CFL: f64 = 0.45;

/// Momentum and energy sources of the linearized system: the viscous terms
/// of the smooth profile scaled by eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwSource {
    pub s2: f64,
    pub s3: f64,
}

/// s2 = (2 mu + lambda) eps v1_xx, s3 = kappa eps theta_xx +
/// (2 mu + lambda) eps (v1 v1_x)_x.
pub fn hw_source(gas: &GasModel, sample: &ProfileSample, eps: f64) -> HwSource {
    let ml = gas.mu_long();
    let v1 = sample.state.v1;
    HwSource {
        s2: ml * eps * sample.d2[1],
        s3: gas.kappa * eps * sample.d2[2] + ml * eps * (sample.d1[1] * sample.d1[1] + v1 * sample.d2[1]),
    }
}

fn left_matrix(
    gas: &GasModel,
    sample: &ProfileSample,
) -> Result<(Matrix3<f64>, Vector3<f64>, Matrix3<f64>)> {
    let cons = prim_to_cons(gas, &sample.state);
    eigendecompose_jacobian(gas, &cons)
}

/// Max over the grid and matrix entries of |L_t + lambda3 L_x| measured by
/// central differences of the closed-form coefficient matrix. The structure
/// relation holds exactly, so this vanishes at discretization order.
pub fn verify_structure_relation(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    t: f64,
    grid: &Grid1,
) -> Result<f64> {
    grid.resolves(params.delta, 16)?;
    let h = grid.dx();
    if t - h < 0.0 {
        return Err(Error::Contract(format!(
            "need t >= dx for the centered time stencil, got t = {t}, dx = {h}"
        )));
    }
    let l_at = |t: f64, x: f64| -> Result<Matrix3<f64>> {
        let s = smooth_rarefaction(gas, data, params, t, x)?;
        Ok(left_matrix(gas, &s)?.0)
    };
    let mut worst = 0.0f64;
    for x in grid.centers() {
        let lam3 = smooth_rarefaction(gas, data, params, t, x)?.b.b;
        let lt = (l_at(t + h, x)? - l_at(t - h, x)?) / (2.0 * h);
        let lx = (l_at(t, x + h)? - l_at(t, x - h)?) / (2.0 * h);
        let res = lt + lam3 * lx;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max(res[(i, j)].abs());
            }
        }
    }
    Ok(worst)
}

/// The solved correction wave: diagonal coordinates Z and physical
/// components z = R Z on a fixed grid at the stored snapshot times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperbolicWaveField {
    pub grid: Grid1,
    pub times: Vec<f64>,
    /// capital_z[s][i] = (Z1, Z2, Z3) at snapshot s, cell i.
    pub capital_z: Vec<Vec<[f64; 3]>>,
    /// z[s][i] = (z1, z2, z3) = R Z.
    pub z: Vec<Vec<[f64; 3]>>,
    pub eps: f64,
    pub delta: f64,
    /// Final value of int |Z|^2 dx + int_0^T int v1_x |Z|^2 dx dt.
    pub weighted_energy: f64,
}

impl HyperbolicWaveField {
    pub fn snapshot_at(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|s| (s - t).abs() < 1e-9 * (1.0 + t.abs()))
    }

    /// Sup over cells of |z| at snapshot s.
    pub fn sup_z(&self, s: usize) -> f64 {
        self.z[s]
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// L2 norms of the k-th x1-derivative of z at snapshot s, k = 0..=k_max,
    /// taken componentwise-euclidean with boundary stencils excluded.
    pub fn z_derivative_l2(&self, s: usize, k_max: usize) -> Vec<f64> {
        derivative_norms(&self.z[s], self.grid.dx(), k_max).0
    }

    pub fn z_derivative_sup(&self, s: usize, k_max: usize) -> Vec<f64> {
        derivative_norms(&self.z[s], self.grid.dx(), k_max).1
    }

    /// CSV rows (t, x1, z1, z2, z3, Z1, Z2, Z3) for every stored snapshot.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,z1,z2,z3,Z1,Z2,Z3\n");
        for (s, t) in self.times.iter().enumerate() {
            for (i, x) in self.grid.centers().enumerate() {
                let z = self.z[s][i];
                let zc = self.capital_z[s][i];
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    t, x, z[0], z[1], z[2], zc[0], zc[1], zc[2]
                ));
            }
        }
        out
    }
}

fn derivative_norms(field: &[[f64; 3]], dx: f64, k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut l2 = Vec::with_capacity(k_max + 1);
    let mut sup = Vec::with_capacity(k_max + 1);
    let mut current: Vec<[f64; 3]> = field.to_vec();
    for k in 0..=k_max {
        if k > 0 {
            let n = current.len();
            if n < 3 {
                break;
            }
            let mut next = Vec::with_capacity(n - 2);
            for i in 1..n - 1 {
                let mut d = [0.0; 3];
                for c in 0..3 {
                    d[c] = (current[i + 1][c] - current[i - 1][c]) / (2.0 * dx);
                }
                next.push(d);
            }
            current = next;
        }
        let sum: f64 = current
            .iter()
            .map(|c| c[0] * c[0] + c[1] * c[1] + c[2] * c[2])
            .sum();
        l2.push((sum * dx).sqrt());
        sup.push(
            current
                .iter()
                .flat_map(|c| c.iter())
                .fold(0.0f64, |m, v| m.max(v.abs())),
        );
    }
    (l2, sup)
}

/// Solve the diagonalized system from zero data on [0, t_final].
pub fn solve_hyperbolic_wave(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    eps: f64,
    t_final: f64,
    grid: &Grid1,
    cfl: f64,
    n_snapshots: usize,
) -> Result<HyperbolicWaveField> {
    let init = vec![[0.0; 3]; grid.n];
    solve_with_initial_data(gas, data, params, eps, t_final, grid, cfl, n_snapshots, &init)
}

/// Same solve with caller-supplied initial diagonal data. The physical
/// problem always starts from zero; nonzero data exists to exercise the
/// decoupling of (Z1, Z2) from Z3.
#[allow(clippy::too_many_arguments)]
pub fn solve_with_initial_data(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    eps: f64,
    t_final: f64,
    grid: &Grid1,
    cfl: f64,
    n_snapshots: usize,
    init: &[[f64; 3]],
) -> Result<HyperbolicWaveField> {
    if !(cfl > 0.0 && cfl <= 0.9) {
        return Err(Error::Config(format!("CFL must be in (0, 0.9], got {cfl}")));
    }
    if eps < 0.0 || t_final <= 0.0 {
        return Err(Error::Config(format!(
            "need eps >= 0 and t_final > 0, got {eps}, {t_final}"
        )));
    }
    grid.resolves(params.delta, 16)?;
    if init.len() != grid.n {
        return Err(Error::Contract(format!(
            "initial data has {} cells, grid has {}",
            init.len(),
            grid.n
        )));
    }

    let n = grid.n;
    let dx = grid.dx();
    let mut zc: Vec<[f64; 3]> = init.to_vec();
    let mut t = 0.0f64;
    let mut dissipation = 0.0f64;

    let snap_times: Vec<f64> = (0..=n_snapshots)
        .map(|s| t_final * s as f64 / n_snapshots.max(1) as f64)
        .collect();
    let mut times = Vec::new();
    let mut snaps_z = Vec::new();
    let mut snaps_capital = Vec::new();
    let mut next_snap = 0usize;

    // per-cell coefficient workspace, refreshed every step
    let record = |t: f64,
                      zc: &[[f64; 3]],
                      times: &mut Vec<f64>,
                      snaps_z: &mut Vec<Vec<[f64; 3]>>,
                      snaps_capital: &mut Vec<Vec<[f64; 3]>>|
     -> Result<()> {
        let mut z_row = Vec::with_capacity(n);
        for (i, x) in grid.centers().enumerate() {
            let sample = smooth_rarefaction(gas, data, params, t, x)?;
            let (_, _, r) = left_matrix(gas, &sample)?;
            let v = r * Vector3::new(zc[i][0], zc[i][1], zc[i][2]);
            z_row.push([v[0], v[1], v[2]]);
        }
        times.push(t);
        snaps_z.push(z_row);
        snaps_capital.push(zc.to_vec());
        Ok(())
    };

    record(0.0, &zc, &mut times, &mut snaps_z, &mut snaps_capital)?;
    next_snap += 1;

    let max_steps = 2_000_000usize;
    for _step in 0..max_steps {
        if t >= t_final - 1e-14 {
            break;
        }
        // coefficients at cell centers
        let mut l_mats = Vec::with_capacity(n);
        let mut r_mats = Vec::with_capacity(n);
        let mut lams = Vec::with_capacity(n);
        let mut l_source = Vec::with_capacity(n);
        let mut v1x = Vec::with_capacity(n);
        for x in grid.centers() {
            let sample = smooth_rarefaction(gas, data, params, t, x)?;
            let (l, lam, r) = left_matrix(gas, &sample)?;
            let s = hw_source(gas, &sample, eps);
            l_source.push(l * Vector3::new(0.0, s.s2, s.s3));
            l_mats.push(l);
            r_mats.push(r);
            lams.push(lam);
            v1x.push(sample.d1[1]);
        }
        // face eigenvalues from profile samples at faces
        let mut face_lams = Vec::with_capacity(n + 1);
        let mut max_speed = 0.0f64;
        for f in 0..=n {
            let x = grid.x_left + f as f64 * dx;
            let sample = smooth_rarefaction(gas, data, params, t, x)?;
            let (l1, l2, l3) = eigenvalues(gas, &sample.state)?;
            max_speed = max_speed.max(l1.abs()).max(l3.abs());
            face_lams.push([l1, l2, l3]);
        }
        let mut dt = cfl * dx / max_speed.max(1e-12);
        if t + dt > t_final {
            dt = t_final - t;
        }
        // land exactly on snapshot times so stored slices support centered
        // time differences
        if next_snap < snap_times.len() && t + dt > snap_times[next_snap] + 1e-14 {
            dt = snap_times[next_snap] - t;
        }

        // coupling coefficients (l_j,x . r_k)(lambda_k - lambda_3), k = 1, 2
        let mut coup = vec![[0.0f64; 3]; n];
        for i in 1..n - 1 {
            let lx = (l_mats[i + 1] - l_mats[i - 1]) / (2.0 * dx);
            let r1 = r_mats[i].column(0);
            let r2 = r_mats[i].column(1);
            let f1 = (lams[i][0] - lams[i][2]) * zc[i][0];
            let f2 = (lams[i][1] - lams[i][2]) * zc[i][1];
            for j in 0..3 {
                let row = lx.row(j);
                let d1 = row[0] * r1[0] + row[1] * r1[1] + row[2] * r1[2];
                let d2 = row[0] * r2[0] + row[1] * r2[1] + row[2] * r2[2];
                coup[i][j] = d1 * f1 + d2 * f2;
            }
        }

        // conservative upwind fluxes per diagonal component
        let cell = |i: isize| -> [f64; 3] {
            let i = i.clamp(0, n as isize - 1) as usize;
            zc[i]
        };
        let mut new_zc = vec![[0.0f64; 3]; n];
        let mut flux = vec![[0.0f64; 3]; n + 1];
        for f in 0..=n {
            let zl = cell(f as isize - 1);
            let zr = cell(f as isize);
            for j in 0..3 {
                let lam = face_lams[f][j];
                flux[f][j] = if lam >= 0.0 { lam * zl[j] } else { lam * zr[j] };
            }
        }
        for i in 0..n {
            for j in 0..3 {
                new_zc[i][j] = zc[i][j] - dt / dx * (flux[i + 1][j] - flux[i][j])
                    + dt * (l_source[i][j] + coup[i][j]);
            }
        }

        // weighted dissipation ledger
        let mut diss_step = 0.0;
        for i in 0..n {
            let q = zc[i][0] * zc[i][0] + zc[i][1] * zc[i][1] + zc[i][2] * zc[i][2];
            diss_step += v1x[i] * q;
        }
        dissipation += dt * diss_step * dx;

        zc = new_zc;
        t += dt;
        if zc.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                t,
                reason: "NaN in hyperbolic wave".into(),
            });
        }
        while next_snap < snap_times.len() && t >= snap_times[next_snap] - 1e-12 {
            record(t, &zc, &mut times, &mut snaps_z, &mut snaps_capital)?;
            next_snap += 1;
        }
    }
    if t < t_final - 1e-10 {
        return Err(Error::Divergence {
            t,
            reason: "step budget exhausted".into(),
        });
    }

    let final_l2: f64 = zc
        .iter()
        .map(|c| c[0] * c[0] + c[1] * c[1] + c[2] * c[2])
        .sum::<f64>()
        * dx;

    Ok(HyperbolicWaveField {
        grid: grid.clone(),
        times,
        capital_z: snaps_capital,
        z: snaps_z,
        eps,
        delta: params.delta,
        weighted_energy: final_l2 + dissipation,
    })
}

/// Per-eps norms measured for the scaling fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsNorms {
    pub eps: f64,
    pub delta: f64,
    /// l2[k] = L2 norm of the k-th derivative of z at t = T.
    pub l2: Vec<f64>,
    pub sup: Vec<f64>,
    pub weighted_energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFitRow {
    pub k: usize,
    pub l2: FitLine,
    /// Present for k <= 2 only.
    pub sup: Option<FitLine>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub rows: Vec<ScalingFitRow>,
    pub norms: Vec<EpsNorms>,
}

/// Solve the wave over an eps sweep with delta = eps^b |ln eps| and fit
/// log ||d^k z(T)||_L2 against log(eps / delta^(k+1)) and the sup norms
/// against eps / delta^(3/2 + k).
#[allow(clippy::too_many_arguments)]
pub fn lemma_scaling(
    gas: &GasModel,
    data: &RiemannData,
    sweep: &[f64],
    b_exponent: f64,
    t_final: f64,
    k_max: usize,
    cells_per_delta: usize,
) -> Result<ScalingFit> {
    if sweep.len() < 3 {
        return Err(Error::Fit(format!(
            "sweep needs at least 3 eps values, got {}",
            sweep.len()
        )));
    }
    if k_max > 3 {
        return Err(Error::Contract("k_max <= 3 for L2 norms".into()));
    }
    let mut norms = Vec::new();
    for &eps in sweep {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("sweep eps must be in (0,1), got {eps}")));
        }
        let delta = delta_rule(eps, b_exponent);
        let params = SmoothFanParams::for_data(gas, data, delta)?;
        let grid = Grid1::for_fan(&params, t_final, cells_per_delta)?;
        let field = solve_hyperbolic_wave(gas, data, &params, eps, t_final, &grid, DEFAULT_CFL, 4)?;
        let s = field.times.len() - 1;
        norms.push(EpsNorms {
            eps,
            delta,
            l2: field.z_derivative_l2(s, k_max),
            sup: field.z_derivative_sup(s, k_max.min(2)),
            weighted_energy: field.weighted_energy,
        });
    }
    if norms.iter().all(|n| n.l2[0] == 0.0) {
        return Err(Error::Fit("all measured norms are zero".into()));
    }
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let xs: Vec<f64> = norms
            .iter()
            .map(|n| n.eps / n.delta.powi(k as i32 + 1))
            .collect();
        let ys: Vec<f64> = norms.iter().map(|n| n.l2[k]).collect();
        let l2 = log_log_fit(&xs, &ys)?;
        let sup = if k <= 2 {
            let xs: Vec<f64> = norms
                .iter()
                .map(|n| n.eps / n.delta.powf(1.5 + k as f64))
                .collect();
            let ys: Vec<f64> = norms.iter().map(|n| n.sup[k]).collect();
            Some(log_log_fit(&xs, &ys)?)
        } else {
            None
        };
        rows.push(ScalingFitRow { k, l2, sup });
    }
    Ok(ScalingFit { rows, norms })
}
