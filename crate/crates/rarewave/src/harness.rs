//! Epsilon-sweep orchestration: the coupled delta-rule, per-run diagnostics,
//! rate fits against the decay envelopes, and report persistence.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{perturbation_norms, sup_error_vs_fan};
use crate::error::{Error, Result};
use crate::fit::fit_rate;
use crate::gas::{prim_to_cons, GasModel, PrimitiveState};
use crate::hyperbolic::{solve_hyperbolic_wave, DEFAULT_CFL};
use crate::profile::{assemble_profile, CompositeProfile};
use crate::rarefaction::{delta_rule, Grid1, LpNorm, RiemannData, SmoothFanParams};
use crate::solver::{run_1d, Boundary, ConvectiveFlux, SolverConfig};

/// Decay-exponent ledger (a1, a2, b). The defaults are the optimal choice;
/// alternatives must satisfy the closure inequalities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentLedger {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl Default for ExponentLedger {
    fn default() -> Self {
        Self {
            a1: 0.75,
            a2: 0.25,
            b: 1.0 / 6.0,
        }
    }
}

impl ExponentLedger {
    /// Reject ledgers that violate a closure inequality, naming it.
    pub fn validate(&self) -> Result<()> {
        if self.a2 < 0.25 {
            return Err(Error::Config(format!(
                "exponent ledger violates a2 >= 1/4 (a2 = {})",
                self.a2
            )));
        }
        let b_cap = (2.0 - 2.0 * self.a2) / 9.0;
        if !(self.b > 0.0 && self.b <= b_cap + 1e-15) {
            return Err(Error::Config(format!(
                "exponent ledger violates 0 < b <= (2 - 2*a2)/9 = {b_cap} (b = {})",
                self.b
            )));
        }
        if 2.0 * self.a1 < 3.0 - 6.0 * self.a2 - 1e-15 {
            return Err(Error::Config(format!(
                "exponent ledger violates 2*a1 >= 3 - 6*a2 (a1 = {}, a2 = {})",
                self.a1, self.a2
            )));
        }
        Ok(())
    }
}

/// Full description of an epsilon sweep; a given spec determines the report
/// bytes exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub gas: GasModel,
    pub left: PrimitiveState,
    pub v1_plus: f64,
    /// Strictly decreasing, all in (0, 1).
    pub eps_list: Vec<f64>,
    pub ledger: ExponentLedger,
    pub t_final: f64,
    /// Start of the measurement window [h, T].
    pub h: f64,
    /// Cells per delta; the resolution rule requires dx <= delta/24.
    pub cells_per_delta: usize,
    /// Snapshot cadence per unit time.
    pub snapshots_per_unit: usize,
    /// Worker threads for the sweep; 0 means the global default.
    pub workers: usize,
}

impl SweepSpec {
    pub fn default_sweep() -> Self {
        Self {
            gas: GasModel::air_like(),
            left: PrimitiveState::new(1.0, 0.0, 1.0).expect("valid left state"),
            v1_plus: 0.5,
            eps_list: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            ledger: ExponentLedger::default(),
            t_final: 1.0,
            h: 0.1,
            cells_per_delta: 64,
            snapshots_per_unit: 20,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        self.ledger.validate()?;
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        for w in self.eps_list.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Config(format!(
                    "eps_list must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for e in &self.eps_list {
            if !(*e > 0.0 && *e < 1.0) {
                return Err(Error::Config(format!("eps must lie in (0, 1), got {e}")));
            }
        }
        if self.cells_per_delta < 24 {
            return Err(Error::Config(format!(
                "resolution rule dx <= delta/24 needs cells_per_delta >= 24, got {}",
                self.cells_per_delta
            )));
        }
        if !(self.h > 0.0 && self.h <= self.t_final) {
            return Err(Error::Config(format!(
                "need 0 < h <= T, got h = {}, T = {}",
                self.h, self.t_final
            )));
        }
        if self.snapshots_per_unit == 0 {
            return Err(Error::Config("snapshot cadence must be positive".into()));
        }
        Ok(())
    }

    pub fn data(&self) -> Result<RiemannData> {
        RiemannData::connect(&self.gas, self.left, self.v1_plus)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        format!("{:x}", hasher.finalize())
    }
}

/// One row of the sweep: either a full set of measurements or a failure tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub delta: f64,
    /// Componentwise sup distance to the exact fan over [h, T].
    pub sup_error: Option<f64>,
    /// sup_t of the squared perturbation norm per derivative order 0..=2.
    pub pert_norm_sq: Option<[f64; 3]>,
    pub q1_l2: Option<f64>,
    pub f1_l2: Option<f64>,
    pub z_l2: Option<f64>,
    pub z_sup: Option<f64>,
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Fitted envelope for one reported quantity: value ~ C eps^alpha |ln eps|^beta.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub quantity: String,
    pub alpha: f64,
    /// Fixed, never fitted.
    pub beta: f64,
    pub c: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportManifest {
    pub config_hash: String,
    pub eps_list: Vec<f64>,
    pub ledger: ExponentLedger,
    pub t_final: f64,
    pub h: f64,
    pub cells_per_delta: usize,
    pub snapshots_per_unit: usize,
    pub scheme: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub manifest: ReportManifest,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<FitSummary>,
}

impl ConvergenceReport {
    /// Rows with full measurements, in sweep order.
    pub fn ok_rows(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.is_ok()).collect()
    }

    pub fn fit(&self, quantity: &str) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "eps,delta,sup_error,pert0_sq,pert1_sq,pert2_sq,q1_l2,f1_l2,z_l2,z_sup,status\n",
        );
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let p = r.pert_norm_sq;
            let status = match &r.failure {
                None => "ok".to_string(),
                Some(msg) => format!("failed:{}", msg.replace([',', '\n'], ";")),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.eps,
                r.delta,
                cell(r.sup_error),
                cell(p.map(|p| p[0])),
                cell(p.map(|p| p[1])),
                cell(p.map(|p| p[2])),
                cell(r.q1_l2),
                cell(r.f1_l2),
                cell(r.z_l2),
                cell(r.z_sup),
                status
            );
        }
        out
    }
}

/// Everything produced by one run of the laboratory at a single eps. Heavier
/// than a [`SweepRow`]; used by callers that need the fields themselves.
pub struct RunArtifacts {
    pub eps: f64,
    pub delta: f64,
    pub profiles: Vec<CompositeProfile>,
    pub trajectory: crate::solver::Trajectory,
    pub row: SweepRow,
}

/// Build the profile, run the viscous solver from it, and measure one row.
pub fn run_single(spec: &SweepSpec, eps: f64) -> Result<RunArtifacts> {
    let gas = spec.gas;
    let data = spec.data()?;
    let delta = delta_rule(eps, spec.ledger.b);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let grid = Grid1::for_fan(&params, spec.t_final, spec.cells_per_delta)?;
    if grid.n > 50_000 {
        return Err(Error::Resolution(format!(
            "delta-rule gives delta = {delta} at eps = {eps}; resolving it needs \
             {} cells, over the 50000-cell budget",
            grid.n
        )));
    }
    let n_snap = ((spec.t_final * spec.snapshots_per_unit as f64).ceil() as usize).max(1);

    let hw = solve_hyperbolic_wave(
        &gas,
        &data,
        &params,
        eps,
        spec.t_final,
        &grid,
        DEFAULT_CFL,
        n_snap,
    )?;
    let mut profiles = Vec::with_capacity(hw.times.len());
    for s in 0..hw.times.len() {
        profiles.push(assemble_profile(&gas, &data, &params, &hw, s)?);
    }

    let init: Vec<_> = profiles[0].prim.iter().map(|p| prim_to_cons(&gas, p)).collect();
    let config = SolverConfig {
        gas,
        eps,
        grid: grid.clone(),
        t_final: spec.t_final,
        cfl: DEFAULT_CFL,
        flux: ConvectiveFlux::Hllc,
        bc: Boundary::FarField,
        far_field: Some((data.left, data.right)),
        n_snapshots: n_snap,
        fixed_dt: None,
    };
    let traj = run_1d(&config, &init, None)?;
    if traj.times.len() != profiles.len() {
        return Err(Error::Contract(format!(
            "{} solver snapshots vs {} profile snapshots",
            traj.times.len(),
            profiles.len()
        )));
    }

    let sup_error = sup_error_vs_fan(&gas, &traj, &data, spec.h, spec.t_final)?;
    let series = perturbation_norms(&gas, &traj, &profiles, eps, &[0, 1, 2])?;
    let pert = [
        series.sup_norm_sq(0).unwrap_or(0.0),
        series.sup_norm_sq(1).unwrap_or(0.0),
        series.sup_norm_sq(2).unwrap_or(0.0),
    ];

    let last = profiles.len() - 1;
    let dx = grid.dx();
    let q1_l2 = LpNorm::L2.of(&profiles[last].q1(&gas), dx);
    let f1_l2 = LpNorm::L2.of(&profiles[last].f1(&gas), dx);
    let z_l2 = hw.z_derivative_l2(last, 0)[0];
    let z_sup = hw.sup_z(last);

    let row = SweepRow {
        eps,
        delta,
        sup_error: Some(sup_error),
        pert_norm_sq: Some(pert),
        q1_l2: Some(q1_l2),
        f1_l2: Some(f1_l2),
        z_l2: Some(z_l2),
        z_sup: Some(z_sup),
        failure: None,
    };
    Ok(RunArtifacts {
        eps,
        delta,
        profiles,
        trajectory: traj,
        row,
    })
}

fn failed_row(spec: &SweepSpec, eps: f64, err: &Error) -> SweepRow {
    SweepRow {
        eps,
        delta: delta_rule(eps, spec.ledger.b),
        sup_error: None,
        pert_norm_sq: None,
        q1_l2: None,
        f1_l2: None,
        z_l2: None,
        z_sup: None,
        failure: Some(err.to_string()),
    }
}

/// Run the whole sweep. Diverged rows are recorded with a failure tag and
/// excluded from the fits; the sweep itself keeps going.
pub fn epsilon_sweep(spec: &SweepSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let run = |eps: &f64| -> SweepRow {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            run_single(spec, *eps)
        }));
        match outcome {
            Ok(Ok(a)) => a.row,
            Ok(Err(e)) => failed_row(spec, *eps, &e),
            Err(_) => failed_row(
                spec,
                *eps,
                &Error::Divergence {
                    t: f64::NAN,
                    reason: "run panicked".into(),
                },
            ),
        }
    };
    let rows: Vec<SweepRow> = if spec.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| spec.eps_list.par_iter().map(run).collect())
    } else {
        spec.eps_list.par_iter().map(run).collect()
    };

    let mut fits = Vec::new();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    if ok.len() >= 3 {
        let eps: Vec<f64> = ok.iter().map(|r| r.eps).collect();
        let mut push = |quantity: &str, beta: f64, ys: Vec<f64>| {
            if ys.iter().all(|v| *v > 0.0) {
                if let Ok((alpha, c, residual)) = fit_rate(&eps, &ys, beta) {
                    fits.push(FitSummary {
                        quantity: quantity.to_string(),
                        alpha,
                        beta,
                        c,
                        residual,
                    });
                }
            }
        };
        push(
            "sup_error",
            2.0,
            ok.iter().map(|r| r.sup_error.unwrap()).collect(),
        );
        push(
            "pert_norm0_sq",
            -7.0,
            ok.iter().map(|r| r.pert_norm_sq.unwrap()[0]).collect(),
        );
        push("z_l2", -1.0, ok.iter().map(|r| r.z_l2.unwrap()).collect());
        push("z_sup", -1.5, ok.iter().map(|r| r.z_sup.unwrap()).collect());
    }

    Ok(ConvergenceReport {
        manifest: ReportManifest {
            config_hash: spec.config_hash(),
            eps_list: spec.eps_list.clone(),
            ledger: spec.ledger,
            t_final: spec.t_final,
            h: spec.h,
            cells_per_delta: spec.cells_per_delta,
            snapshots_per_unit: spec.snapshots_per_unit,
            scheme: "hllc-muscl-ssprk2".to_string(),
            seed: None,
        },
        rows,
        fits,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Persist report.csv, fits.json, manifest.json, and plots/*.dat under
/// `out_dir`. All floats use round-trip decimal formatting.
pub fn emit_report(report: &ConvergenceReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = out_dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::Io {
        path: plots.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();

    let manifest_path = out_dir.join("manifest.json");
    let manifest = serde_json::to_string_pretty(&report.manifest)
        .map_err(|e| Error::Config(format!("manifest encode: {e}")))?;
    write_file(&manifest_path, &manifest)?;
    written.push(manifest_path);

    let csv_path = out_dir.join("report.csv");
    write_file(&csv_path, &report.to_csv())?;
    written.push(csv_path);

    let fits_path = out_dir.join("fits.json");
    let fits = serde_json::to_string_pretty(&report.fits)
        .map_err(|e| Error::Config(format!("fits encode: {e}")))?;
    write_file(&fits_path, &fits)?;
    written.push(fits_path);

    for fit in &report.fits {
        let mut dat = String::from("# log_eps log_value log_envelope\n");
        for row in report.ok_rows() {
            let value = match fit.quantity.as_str() {
                "sup_error" => row.sup_error,
                "pert_norm0_sq" => row.pert_norm_sq.map(|p| p[0]),
                "z_l2" => row.z_l2,
                "z_sup" => row.z_sup,
                _ => None,
            };
            let Some(value) = value else { continue };
            if value <= 0.0 {
                continue;
            }
            let envelope =
                fit.c * row.eps.powf(fit.alpha) * row.eps.ln().abs().powf(fit.beta);
            let _ = writeln!(
                dat,
                "{} {} {}",
                row.eps.ln(),
                value.ln(),
                envelope.ln()
            );
        }
        let path = plots.join(format!("{}.dat", fit.quantity));
        write_file(&path, &dat)?;
        written.push(path);
    }
    Ok(written)
}
