//! 2D slab run (periodic transverse direction): a planar rarefaction stays
//! planar, and a transverse velocity perturbation decays.
//!
//! Run with: cargo run --release --example slab_2d

use rarewave::gas::{GasModel, PrimitiveState};
use rarewave::hyperbolic::DEFAULT_CFL;
use rarewave::rarefaction::{Grid1, RiemannData};
use rarewave::solver::{
    add_transverse_perturbation, initial_riemann, planar_slab_field, run_2d_slab, ConvectiveFlux,
    SlabConfig,
};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    let grid = Grid1::new(-3.0, 3.0, 256)?;
    let config = SlabConfig {
        gas,
        eps: 1e-2,
        grid: grid.clone(),
        x2_len: 1.0,
        n2: 16,
        t_final: 0.5,
        cfl: DEFAULT_CFL,
        flux: ConvectiveFlux::Hllc,
        far_field: Some((data.left, data.right)),
        n_snapshots: 5,
        fixed_dt: None,
    };

    // planar initial data: every transverse row identical, v2 = 0
    let planar = planar_slab_field(&initial_riemann(&gas, &data.left, &data.right, &grid), config.n2);

    let mut perturbed = planar.clone();
    add_transverse_perturbation(&config, &mut perturbed, 0.05, 0.0, 0.5)?;

    let base = run_2d_slab(&config, &planar)?;
    let traj = run_2d_slab(&config, &perturbed)?;

    println!("planar run: ||v2||_L2 stays at {:e}", base.v2_l2.last().unwrap());
    println!("perturbed run, ||v2||_L2 per snapshot:");
    for (t, v) in traj.times.iter().zip(&traj.v2_l2) {
        println!("  t = {t:.2}: {v:e}");
    }
    let decay = traj.v2_l2.last().unwrap() / traj.v2_l2[0];
    println!("transverse energy retained after T = {}: {decay:.3}", config.t_final);
    println!(
        "mass drift: planar {:e}, perturbed {:e}",
        (base.mass.last().unwrap() - base.mass[0]).abs(),
        (traj.mass.last().unwrap() - traj.mass[0]).abs()
    );
    Ok(())
}
