//! Assemble the composite wave profile (smooth rarefaction plus hyperbolic
//! correction), check its pointwise bounds, compare the two algebraic
//! representations of the interaction terms, and measure the residual of the
//! profile system under grid refinement.
//!
//! Run with: cargo run --release --example composite_profile

use rarewave::fit::observed_order;
use rarewave::gas::{GasModel, PrimitiveState};
use rarewave::hyperbolic::{solve_hyperbolic_wave, DEFAULT_CFL};
use rarewave::profile::{assemble_profile, profile_system_residual};
use rarewave::rarefaction::{delta_rule, Grid1, LpNorm, RiemannData, SmoothFanParams};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    let eps = 1e-2;
    let delta = delta_rule(eps, 1.0 / 6.0);
    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
    let t = 0.5;
    let grid = Grid1::for_fan(&params, t, 32)?;
    let hw = solve_hyperbolic_wave(&gas, &data, &params, eps, t, &grid, DEFAULT_CFL, 1)?;
    let profile = assemble_profile(&gas, &data, &params, &hw, hw.times.len() - 1)?;

    profile.check_bounds(&data)?;
    println!("profile bounds hold (eps = {eps}, delta = {delta:.4}, t = {t})");

    let dx = grid.dx();
    let q1 = profile.q1(&gas);
    let q1_def = profile.q1_defining(&gas)?;
    let worst_q1 = q1
        .iter()
        .zip(&q1_def)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let q2 = profile.q2(&gas);
    let q2_def = profile.q2_defining(&gas)?;
    let worst_q2 = q2
        .iter()
        .zip(&q2_def)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("Q1 representations agree to {worst_q1:e}");
    println!("Q2 representations agree to {worst_q2:e}");
    println!("||Q1||_L2 = {:e}", LpNorm::L2.of(&q1, dx));
    println!("||Q2||_L2 = {:e}", LpNorm::L2.of(&q2, dx));
    println!("||F1||_L2 = {:e}", LpNorm::L2.of(&profile.f1(&gas), dx));
    std::fs::write("profile_residuals.csv", profile.residual_csv(&gas))
        .expect("write profile_residuals.csv");
    println!("wrote profile_residuals.csv");

    // the discrete residual of the profile system decays under refinement
    println!("profile-system residual under refinement (t = 0.25, h = 0.05):");
    let mut energies = Vec::new();
    for cells in [16usize, 32] {
        let res = profile_system_residual(&gas, &data, &params, eps, 0.25, 0.05, cells)?;
        println!(
            "  {cells} cells/delta: mass = {:e}, momentum = {:e}, energy = {:e}",
            res.mass, res.momentum, res.energy
        );
        energies.push(res.energy);
    }
    println!(
        "observed refinement order (energy residual): {:.2}",
        observed_order(energies[0], energies[1])
    );
    Ok(())
}
