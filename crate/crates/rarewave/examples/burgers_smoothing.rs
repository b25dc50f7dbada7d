//! Smooth the rarefaction fan through the Burgers equation and measure the
//! decay of its derivative norms against the predicted scales.
//!
//! Run with: cargo run --example burgers_smoothing

use rarewave::fit::log_log_fit;
use rarewave::gas::{GasModel, PrimitiveState};
use rarewave::rarefaction::{
    derivative_norm_table, fan_distance, Grid1, LpNorm, RiemannData, SmoothFanParams,
};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;

    // dyadic delta sweep; each norm should track its predicted decay scale
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let ps = [LpNorm::L1, LpNorm::L2, LpNorm::LInf];
    for t in [0.0, 1.0] {
        println!("t = {t}:");
        for order in 1..=3usize {
            for p in ps {
                let mut values = Vec::new();
                let mut scales = Vec::new();
                for &delta in &deltas {
                    let params = SmoothFanParams::for_data(&gas, &data, delta)?;
                    let grid = Grid1::for_fan(&params, t, 32)?;
                    let table = derivative_norm_table(&gas, &data, &params, t, &[p], &grid)?;
                    let row = table.get(order, p).expect("row exists");
                    values.push(row.value);
                    scales.push(row.predicted_scale);
                }
                let fit = log_log_fit(&scales, &values)?;
                println!(
                    "  order {order}, {}: slope vs predicted scale = {:.3}",
                    p.label(),
                    fit.slope
                );
            }
        }
    }

    // distance to the exact fan at t = 1 shrinks with delta
    println!("sup distance to the exact fan at t = 1:");
    for &delta in &deltas {
        let params = SmoothFanParams::for_data(&gas, &data, delta)?;
        let grid = Grid1::for_fan(&params, 1.0, 32)?;
        let dist = fan_distance(&gas, &data, &params, 1.0, &grid)?;
        let envelope = delta * ((2.0f64).ln() + delta.ln().abs());
        println!("  delta = {delta}: {dist:.5} (envelope {envelope:.5})");
    }
    Ok(())
}
