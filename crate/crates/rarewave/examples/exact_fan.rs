//! Connect a 3-rarefaction across given left data and sample the exact
//! self-similar fan.
//!
//! Run with: cargo run --example exact_fan

use rarewave::gas::{entropy, riemann_invariants_3, GasModel, PrimitiveState};
use rarewave::rarefaction::{exact_fan, RiemannData};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    println!("left  state: rho = {}, v1 = {}, theta = {}", data.left.rho, data.left.v1, data.left.theta);
    println!("right state: rho = {}, v1 = {}, theta = {}", data.right.rho, data.right.v1, data.right.theta);
    println!("wave strength |v1+ - v1-| = {}", data.strength());
    println!(
        "edge speeds: lambda3- = {}, lambda3+ = {}",
        data.lambda3_left(&gas)?,
        data.lambda3_right(&gas)?
    );

    // both Riemann invariants are constant across the fan
    let t = 1.0;
    let mut csv = String::from("x1,rho,v1,theta\n");
    let mut max_inv_drift = 0.0f64;
    let mut max_entropy_drift = 0.0f64;
    let s_left = entropy(&gas, data.left.rho, data.left.theta)?;
    let (sigma_left, _) = riemann_invariants_3(&gas, &data.left)?;
    for k in 0..=200 {
        let x = -3.0 + 6.0 * k as f64 / 200.0;
        let state = exact_fan(&gas, &data, t, x)?;
        csv.push_str(&format!("{},{},{},{}\n", x, state.rho, state.v1, state.theta));
        let (sigma, _) = riemann_invariants_3(&gas, &state)?;
        max_inv_drift = max_inv_drift.max((sigma - sigma_left).abs());
        max_entropy_drift =
            max_entropy_drift.max((entropy(&gas, state.rho, state.theta)? - s_left).abs());
    }
    println!("max drift of the 3-Riemann invariant across the fan: {max_inv_drift:e}");
    println!("max entropy drift across the fan: {max_entropy_drift:e}");

    std::fs::write("exact_fan.csv", csv).expect("write exact_fan.csv");
    println!("wrote exact_fan.csv (t = {t})");
    Ok(())
}
