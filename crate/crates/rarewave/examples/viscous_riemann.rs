//! Run the viscous solver from rarefaction Riemann data and measure the
//! distance to the exact fan plus the conservation ledger.
//!
//! Run with: cargo run --release --example viscous_riemann

use rarewave::diagnostics::sup_error_vs_fan;
use rarewave::gas::{cons_to_prim, GasModel, PrimitiveState};
use rarewave::hyperbolic::DEFAULT_CFL;
use rarewave::rarefaction::{Grid1, RiemannData};
use rarewave::solver::{initial_riemann, run_1d, Boundary, ConvectiveFlux, SolverConfig};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    let eps = 1e-2;
    let grid = Grid1::new(-4.0, 4.0, 1024)?;
    let config = SolverConfig {
        gas,
        eps,
        grid: grid.clone(),
        t_final: 1.0,
        cfl: DEFAULT_CFL,
        flux: ConvectiveFlux::Hllc,
        bc: Boundary::FarField,
        far_field: Some((data.left, data.right)),
        n_snapshots: 10,
        fixed_dt: None,
    };
    let init = initial_riemann(&gas, &data.left, &data.right, &grid);
    let traj = run_1d(&config, &init, None)?;

    println!("eps = {eps}, grid n = {}, {} snapshots", grid.n, traj.times.len());
    let err = sup_error_vs_fan(&gas, &traj, &data, 0.1, 1.0)?;
    println!("sup error vs exact fan over t in [0.1, 1.0]: {err:e}");

    // the state stays inside the invariant region spanned by the end states
    let mut v_min = f64::MAX;
    let mut v_max = f64::MIN;
    for c in traj.last() {
        let p = cons_to_prim(&gas, c)?;
        v_min = v_min.min(p.v1);
        v_max = v_max.max(p.v1);
    }
    println!("velocity range at T: [{v_min:e}, {v_max:e}] (end states: [0, 0.5])");

    let first = &traj.ledger[0];
    let last = traj.ledger.last().expect("ledger");
    println!(
        "conservation drift over the run: mass = {:e}, energy = {:e}",
        (last.mass - first.mass).abs(),
        (last.energy - first.energy).abs()
    );

    let s = traj.times.len() - 1;
    std::fs::write("viscous_riemann.csv", traj.snapshot_csv(&gas, s)?)
        .expect("write viscous_riemann.csv");
    println!("wrote viscous_riemann.csv (t = {})", traj.times[s]);
    Ok(())
}
