//! Solve the hyperbolic correction wave driven by the smooth rarefaction and
//! check its amplitude scalings along an eps sweep.
//!
//! Run with: cargo run --release --example hyperbolic_wave

use rarewave::gas::{GasModel, PrimitiveState};
use rarewave::hyperbolic::{lemma_scaling, solve_hyperbolic_wave, DEFAULT_CFL};
use rarewave::rarefaction::{delta_rule, Grid1, RiemannData, SmoothFanParams};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    // one solve in detail
    let eps = 1e-2;
    let b = 1.0 / 6.0;
    let delta = delta_rule(eps, b);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let t_final = 1.0;
    let grid = Grid1::for_fan(&params, t_final, 32)?;
    let hw = solve_hyperbolic_wave(&gas, &data, &params, eps, t_final, &grid, DEFAULT_CFL, 4)?;
    let last = hw.times.len() - 1;
    println!("eps = {eps}, delta = {delta:.4}, grid n = {}", grid.n);
    println!("sup |z|(T) = {:e}", hw.sup_z(last));
    println!("L2 norms of z and its first two derivatives at T:");
    for (k, v) in hw.z_derivative_l2(last, 2).iter().enumerate() {
        println!("  k = {k}: {v:e} (predicted scale eps/delta^(k+1) = {:e})", eps / delta.powi(k as i32 + 1));
    }
    println!(
        "weighted energy = {:e} vs (eps/delta)^2 = {:e}",
        hw.weighted_energy,
        (eps / delta).powi(2)
    );
    std::fs::write("hyperbolic_wave.csv", hw.to_csv()).expect("write hyperbolic_wave.csv");
    println!("wrote hyperbolic_wave.csv");

    // scaling fit across the sweep
    let sweep = [1e-1, 3e-2, 1e-2, 3e-3];
    let fit = lemma_scaling(&gas, &data, &sweep, b, 0.5, 2, 32)?;
    println!("scaling fits over eps = {sweep:?} at T = 0.5:");
    for row in &fit.rows {
        print!("  k = {}: L2 slope = {:.3}", row.k, row.l2.slope);
        if let Some(s) = &row.sup {
            print!(", sup slope = {:.3}", s.slope);
        }
        println!();
    }
    Ok(())
}
