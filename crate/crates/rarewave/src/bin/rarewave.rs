//! Thin command-line front end over the library: build profiles, run the
//! viscous solver, orchestrate epsilon sweeps, and verify property suites.
//!
//! Exit codes: 0 success, 1 property failure, 2 config/usage error,
//! 3 runtime divergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use rarewave::config::Config;
use rarewave::diagnostics::{discrete_norm, sup_error_vs_fan};
use rarewave::error::Error;
use rarewave::fit::observed_order;
use rarewave::gas::{eigendecompose_jacobian, prim_to_cons, PrimitiveState};
use rarewave::harness::{emit_report, epsilon_sweep, run_single};
use rarewave::hyperbolic::{solve_hyperbolic_wave, verify_structure_relation, DEFAULT_CFL};
use rarewave::profile::{assemble_profile, profile_system_residual};
use rarewave::rarefaction::{
    delta_rule, derivative_norm_table, exact_fan, fan_distance, smooth_rarefaction, Grid1, LpNorm,
    RiemannData, SmoothFanParams,
};
use rarewave::solver::{
    add_bump, initial_riemann, run_1d, Boundary, ConvectiveFlux, SolverConfig,
};

#[derive(Parser)]
#[command(name = "rarewave", version, about = "Rarefaction-wave laboratory")]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override a config key, e.g. --set run.eps=0.01 (repeatable).
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,
    /// Worker threads for sweeps; 0 uses the default pool.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Seed for the perturbation injector (simulate only).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the composite wave profile and its residual/norm tables.
    Profile,
    /// Run the viscous solver from rarefaction Riemann data.
    Simulate,
    /// Run the epsilon sweep and emit the convergence report.
    Sweep,
    /// Run a property suite: all | gas | fan | wave | profile | solver | harness.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_path: Option<String>,
    config_hash: String,
    tool_version: String,
    started_unix: u64,
    finished_unix: Option<u64>,
    outputs: Vec<String>,
    status: String,
}

impl RunManifest {
    fn begin(command: &str, config: &Config, config_path: Option<&Path>) -> Self {
        Self {
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            config_hash: config.hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: now(),
            finished_unix: None,
            outputs: Vec::new(),
            status: "running".to_string(),
        }
    }

    fn write(&self, out_dir: &Path) -> Result<(), Error> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest encode: {e}")))?;
        write_text(&path, &text)
    }

    fn complete(&mut self, out_dir: &Path) -> Result<(), Error> {
        self.finished_unix = Some(now());
        self.status = "complete".to_string();
        self.write(out_dir)
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Contract(_) | Error::Io { .. } | Error::Resolution(_) => 2,
        Error::NotARarefaction(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match Config::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if !matches!(cli.command, Command::Verify { .. }) {
        if let Err(e) = fs::create_dir_all(&cli.out) {
            eprintln!("cannot create {}: {e}", cli.out.display());
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Profile => cmd_profile(&cli, &config),
        Command::Simulate => cmd_simulate(&cli, &config),
        Command::Sweep => cmd_sweep(&cli, &config),
        Command::Verify { suite } => return cmd_verify(&config, suite),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn profile_delta(config: &Config) -> f64 {
    if config.run.eps > 0.0 {
        delta_rule(config.run.eps, config.run.b_exponent)
    } else {
        // the coupled rule degenerates at eps = 0; keep a fixed layer width
        0.25
    }
}

fn cmd_profile(cli: &Cli, config: &Config) -> Result<(), Error> {
    let mut manifest = RunManifest::begin("profile", config, cli.config.as_deref());
    manifest.write(&cli.out)?;

    let gas = config.gas;
    let data = RiemannData::connect(&gas, config.left_state(), config.wave.v1_plus)?;
    let delta = profile_delta(config);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let t_final = config.run.t_final;
    let grid = Grid1::for_fan(&params, t_final, config.run.cells_per_delta)?;
    let n_snap = ((t_final * config.run.snapshots_per_unit as f64).ceil() as usize).max(1);

    let hw = solve_hyperbolic_wave(
        &gas,
        &data,
        &params,
        config.run.eps,
        t_final,
        &grid,
        DEFAULT_CFL,
        n_snap,
    )?;
    let wave_path = cli.out.join("hyperbolic_wave.csv");
    write_text(&wave_path, &hw.to_csv())?;
    manifest.outputs.push(wave_path.display().to_string());

    for (label, snapshot) in [("t0", 0usize), ("tfinal", hw.times.len() - 1)] {
        let profile = assemble_profile(&gas, &data, &params, &hw, snapshot)?;
        let mut csv = String::from("x1,rho,v1,theta\n");
        for (i, x) in grid.centers().enumerate() {
            let p = &profile.prim[i];
            csv.push_str(&format!("{},{},{},{}\n", x, p.rho, p.v1, p.theta));
        }
        let path = cli.out.join(format!("profile_{label}.csv"));
        write_text(&path, &csv)?;
        manifest.outputs.push(path.display().to_string());
        if snapshot != 0 {
            let path = cli.out.join("residuals.csv");
            write_text(&path, &profile.residual_csv(&gas))?;
            manifest.outputs.push(path.display().to_string());
        }
    }

    let table = derivative_norm_table(
        &gas,
        &data,
        &params,
        t_final,
        &[LpNorm::L1, LpNorm::L2, LpNorm::LInf],
        &grid,
    )?;
    let path = cli.out.join("norms.csv");
    write_text(&path, &table.to_csv())?;
    manifest.outputs.push(path.display().to_string());

    manifest.complete(&cli.out)?;
    println!(
        "profile: delta = {delta}, grid n = {}, wrote {} files to {}",
        grid.n,
        manifest.outputs.len(),
        cli.out.display()
    );
    Ok(())
}

fn cmd_simulate(cli: &Cli, config: &Config) -> Result<(), Error> {
    let mut manifest = RunManifest::begin("simulate", config, cli.config.as_deref());
    manifest.write(&cli.out)?;

    let gas = config.gas;
    let data = RiemannData::connect(&gas, config.left_state(), config.wave.v1_plus)?;
    let delta = profile_delta(config);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let t_final = config.run.t_final;
    let grid = Grid1::for_fan(&params, t_final, config.run.cells_per_delta)?;
    let n_snap = ((t_final * config.run.snapshots_per_unit as f64).ceil() as usize).max(1);

    let mut init = initial_riemann(&gas, &data.left, &data.right, &grid);
    if let Some(seed) = cli.seed {
        if config.run.bump_amplitude != 0.0 {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let center = rng.gen_range(-1.0..1.0);
            let component = rng.gen_range(0..3usize);
            init = add_bump(
                &init,
                &grid,
                component,
                config.run.bump_amplitude,
                center,
                delta.max(0.1),
            )?;
        }
    }

    let solver_config = SolverConfig {
        gas,
        eps: config.run.eps,
        grid: grid.clone(),
        t_final,
        cfl: DEFAULT_CFL,
        flux: ConvectiveFlux::Hllc,
        bc: Boundary::FarField,
        far_field: Some((data.left, data.right)),
        n_snapshots: n_snap,
        fixed_dt: None,
    };
    let traj = run_1d(&solver_config, &init, None)?;

    for (s, t) in traj.times.iter().enumerate() {
        let path = cli.out.join(format!("snapshot_{s:03}.csv"));
        write_text(&path, &traj.snapshot_csv(&gas, s)?)?;
        manifest.outputs.push(path.display().to_string());
        let _ = t;
    }

    // error time series vs the exact fan, measured per snapshot in [h, T]
    let mut series = String::from("t,quantity,value\n");
    for (s, t) in traj.times.iter().enumerate() {
        if *t < config.run.h {
            continue;
        }
        let mut sup = 0.0f64;
        for (i, x) in traj.grid.centers().enumerate() {
            let p = rarewave::gas::cons_to_prim(&gas, &traj.fields[s][i])?;
            let f = exact_fan(&gas, &data, *t, x)?;
            sup = sup
                .max((p.rho - f.rho).abs())
                .max((p.v1 - f.v1).abs())
                .max((p.theta - f.theta).abs());
        }
        series.push_str(&format!("{t},sup_error_vs_fan,{sup}\n"));
    }
    for row in &traj.ledger {
        series.push_str(&format!("{},mass,{}\n", row.t, row.mass));
        series.push_str(&format!("{},energy,{}\n", row.t, row.energy));
    }
    let path = cli.out.join("series.csv");
    write_text(&path, &series)?;
    manifest.outputs.push(path.display().to_string());

    let overall = sup_error_vs_fan(&gas, &traj, &data, config.run.h, t_final)?;
    manifest.complete(&cli.out)?;
    println!(
        "simulate: eps = {}, sup error vs fan over [{}, {}] = {overall}",
        config.run.eps, config.run.h, t_final
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, config: &Config) -> Result<(), Error> {
    let mut manifest = RunManifest::begin("sweep", config, cli.config.as_deref());
    manifest.write(&cli.out)?;

    let spec = config.sweep_spec(cli.workers);
    let report = epsilon_sweep(&spec)?;
    let ok = report.ok_rows().len();
    let total = report.rows.len();
    if ok == 0 {
        manifest.status = "failed".to_string();
        manifest.finished_unix = Some(now());
        manifest.write(&cli.out)?;
        return Err(Error::Divergence {
            t: f64::NAN,
            reason: "every sweep row failed".to_string(),
        });
    }
    let report_dir = cli.out.join("sweep");
    let files = emit_report(&report, &report_dir)?;
    for f in &files {
        manifest.outputs.push(f.display().to_string());
    }
    manifest.complete(&cli.out)?;
    println!("sweep: {ok}/{total} rows ok; report in {}", report_dir.display());
    for fit in &report.fits {
        println!(
            "fit {}: alpha = {:.4}, beta = {} (fixed), C = {:.4e}, residual = {:.3e}",
            fit.quantity, fit.alpha, fit.beta, fit.c, fit.residual
        );
    }
    Ok(())
}

struct Check {
    name: String,
    pass: bool,
    value: String,
}

fn check(name: &str, pass: bool, value: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        value,
    }
}

fn suite_gas(config: &Config) -> Result<Vec<Check>, Error> {
    let gas = config.gas;
    let mut checks = Vec::new();
    let state = PrimitiveState::new(1.3, 0.4, 0.9)?;
    let (l, lam, r) = eigendecompose_jacobian(&gas, &prim_to_cons(&gas, &state))?;
    let identity = l * r;
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((identity[(i, j)] - expect).abs());
        }
    }
    checks.push(check("gas.left_right_inverse", worst < 1e-12, format!("{worst:e}")));
    let c = rarewave::gas::sound_speed(&gas, state.rho, state.theta)?;
    let ordered = lam[0] < lam[1] && lam[1] < lam[2];
    checks.push(check("gas.eigenvalues_ordered", ordered, format!("{:?}", lam)));
    let spread = (lam[2] - lam[0] - 2.0 * c).abs();
    checks.push(check("gas.acoustic_spread", spread < 1e-12, format!("{spread:e}")));
    Ok(checks)
}

fn suite_fan(config: &Config) -> Result<Vec<Check>, Error> {
    let gas = config.gas;
    let data = RiemannData::connect(&gas, config.left_state(), config.wave.v1_plus)?;
    let mut checks = Vec::new();
    let delta = 0.2;
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let grid = Grid1::for_fan(&params, 1.0, 32)?;
    // derivative closure: finite difference of the closed-form profile
    // matches its own reported first derivative
    let mut worst = 0.0f64;
    let h = 1e-6;
    for x in [-0.5, 0.0, 0.7] {
        let s = smooth_rarefaction(&gas, &data, &params, 1.0, x)?;
        let sp = smooth_rarefaction(&gas, &data, &params, 1.0, x + h)?;
        let sm = smooth_rarefaction(&gas, &data, &params, 1.0, x - h)?;
        let fd = (sp.state.v1 - sm.state.v1) / (2.0 * h);
        worst = worst.max((fd - s.d1[1]).abs());
    }
    checks.push(check("fan.derivative_closure", worst < 1e-6, format!("{worst:e}")));
    let dist = fan_distance(&gas, &data, &params, 1.0, &grid)?;
    let envelope = delta * ((2.0f64).ln() + delta.ln().abs());
    checks.push(check(
        "fan.distance_envelope",
        dist < 2.0 * envelope,
        format!("{dist:e} vs {envelope:e}"),
    ));
    Ok(checks)
}

fn suite_wave(config: &Config) -> Result<Vec<Check>, Error> {
    let gas = config.gas;
    let data = RiemannData::connect(&gas, config.left_state(), config.wave.v1_plus)?;
    let mut checks = Vec::new();
    let params = SmoothFanParams::for_data(&gas, &data, 0.4)?;
    let sgrid = Grid1::for_fan(&params, 0.5, 32)?;
    let worst = verify_structure_relation(&gas, &data, &params, 0.5, &sgrid)?;
    // central differences: the defect shrinks at second order in dx
    let tol = 10.0 * sgrid.dx().powi(2);
    checks.push(check(
        "wave.structure_relation",
        worst < tol,
        format!("{worst:e} vs {tol:e}"),
    ));
    let eps = if config.run.eps > 0.0 { config.run.eps } else { 1e-2 };
    let grid = Grid1::for_fan(&params, 0.5, 32)?;
    let hw = solve_hyperbolic_wave(&gas, &data, &params, eps, 0.5, &grid, DEFAULT_CFL, 1)?;
    let bound = (eps / params.delta).powi(2);
    checks.push(check(
        "wave.weighted_energy",
        hw.weighted_energy < 100.0 * bound,
        format!("{:e} vs (eps/delta)^2 = {bound:e}", hw.weighted_energy),
    ));
    Ok(checks)
}

fn suite_profile(config: &Config) -> Result<Vec<Check>, Error> {
    let gas = config.gas;
    let data = RiemannData::connect(&gas, config.left_state(), config.wave.v1_plus)?;
    let mut checks = Vec::new();
    let eps = if config.run.eps > 0.0 { config.run.eps } else { 1e-2 };
    let delta = delta_rule(eps, config.run.b_exponent);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let grid = Grid1::for_fan(&params, 0.5, 32)?;
    let hw = solve_hyperbolic_wave(&gas, &data, &params, eps, 0.5, &grid, DEFAULT_CFL, 1)?;
    let profile = assemble_profile(&gas, &data, &params, &hw, hw.times.len() - 1)?;
    let bounds_ok = profile.check_bounds(&data).is_ok();
    checks.push(check("profile.state_bounds", bounds_ok, String::new()));
    let q1a = profile.q1(&gas);
    let q1b = profile.q1_defining(&gas)?;
    let worst = q1a
        .iter()
        .zip(&q1b)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    checks.push(check("profile.q1_agreement", worst < 1e-9, format!("{worst:e}")));
    let q2a = profile.q2(&gas);
    let q2b = profile.q2_defining(&gas)?;
    let worst = q2a
        .iter()
        .zip(&q2b)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    checks.push(check("profile.q2_agreement", worst < 1e-9, format!("{worst:e}")));
    let res = profile_system_residual(&gas, &data, &params, eps, 0.25, 0.05, 16)?;
    checks.push(check(
        "profile.system_residual_finite",
        res.mass.is_finite() && res.momentum.is_finite() && res.energy.is_finite(),
        format!("({:e}, {:e}, {:e})", res.mass, res.momentum, res.energy),
    ));
    Ok(checks)
}

fn suite_solver(config: &Config) -> Result<Vec<Check>, Error> {
    let gas = config.gas;
    let mut checks = Vec::new();
    // constant state stays constant
    let grid = Grid1::new(-2.0, 2.0, 128)?;
    let state = PrimitiveState::new(1.0, 0.2, 1.0)?;
    let init: Vec<_> = (0..grid.n).map(|_| prim_to_cons(&gas, &state)).collect();
    let sc = SolverConfig {
        gas,
        eps: 1e-2,
        grid: grid.clone(),
        t_final: 0.2,
        cfl: DEFAULT_CFL,
        flux: ConvectiveFlux::Hllc,
        bc: Boundary::FarField,
        far_field: Some((state, state)),
        n_snapshots: 1,
        fixed_dt: None,
    };
    let traj = run_1d(&sc, &init, None)?;
    let mut worst = 0.0f64;
    for c in traj.last() {
        worst = worst
            .max((c.rho - init[0].rho).abs())
            .max((c.m1 - init[0].m1).abs())
            .max((c.energy - init[0].energy).abs());
    }
    checks.push(check("solver.constant_preserved", worst < 1e-12, format!("{worst:e}")));
    // conservation ledger drift on periodic data
    let init2: Vec<_> = grid
        .centers()
        .map(|x| {
            let p = PrimitiveState::new(
                1.0 + 0.1 * (std::f64::consts::PI * x / 2.0).sin(),
                0.0,
                1.0,
            )
            .expect("positive");
            prim_to_cons(&gas, &p)
        })
        .collect();
    let sc2 = SolverConfig {
        bc: Boundary::Periodic,
        far_field: None,
        ..sc
    };
    let traj = run_1d(&sc2, &init2, None)?;
    let drift = (traj.ledger.last().unwrap().mass - traj.ledger[0].mass).abs();
    checks.push(check("solver.mass_conserved", drift < 1e-11, format!("{drift:e}")));
    Ok(checks)
}

fn suite_harness(config: &Config) -> Result<Vec<Check>, Error> {
    let mut checks = Vec::new();
    let ledger = config.ledger();
    checks.push(check(
        "harness.exponent_ledger",
        ledger.validate().is_ok(),
        format!("a1 = {}, a2 = {}, b = {}", ledger.a1, ledger.a2, ledger.b),
    ));
    let mut spec = config.sweep_spec(0);
    spec.eps_list = vec![1e-1, 5e-2];
    spec.t_final = 0.2;
    spec.h = 0.1;
    spec.cells_per_delta = 24;
    spec.snapshots_per_unit = 10;
    let a = run_single(&spec, 5e-2)?;
    let b = run_single(&spec, 1e-1)?;
    checks.push(check(
        "harness.wave_shrinks_with_eps",
        a.row.z_l2.unwrap() < b.row.z_l2.unwrap(),
        format!("{:e} < {:e}", a.row.z_l2.unwrap(), b.row.z_l2.unwrap()),
    ));
    // refinement order of the discrete norm operator on a smooth field
    let mut errs = Vec::new();
    for n in [200usize, 400] {
        let g = Grid1::new(0.0, 2.0 * std::f64::consts::PI, n)?;
        let f: Vec<f64> = g.centers().map(|x| x.sin()).collect();
        let v = discrete_norm(&f, g.dx(), LpNorm::L2, 2)?;
        errs.push((v - std::f64::consts::PI.sqrt()).abs());
    }
    let order = observed_order(errs[0], errs[1]);
    checks.push(check("harness.norm_operator_order", order > 1.5, format!("{order:.2}")));
    Ok(checks)
}

fn cmd_verify(config: &Config, suite: &str) -> ExitCode {
    let suites: Vec<&str> = match suite {
        "all" => vec!["gas", "fan", "wave", "profile", "solver", "harness"],
        "gas" | "fan" | "wave" | "profile" | "solver" | "harness" => vec![suite],
        other => {
            eprintln!("unknown suite '{other}'; expected all | gas | fan | wave | profile | solver | harness");
            return ExitCode::from(2);
        }
    };
    let mut all_pass = true;
    for s in suites {
        let result = match s {
            "gas" => suite_gas(config),
            "fan" => suite_fan(config),
            "wave" => suite_wave(config),
            "profile" => suite_profile(config),
            "solver" => suite_solver(config),
            "harness" => suite_harness(config),
            _ => unreachable!(),
        };
        match result {
            Ok(checks) => {
                for c in checks {
                    let tag = if c.pass { "PASS" } else { "FAIL" };
                    println!("{tag} {} {}", c.name, c.value);
                    all_pass &= c.pass;
                }
            }
            Err(e) => {
                println!("FAIL {s} error: {e}");
                all_pass = false;
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
