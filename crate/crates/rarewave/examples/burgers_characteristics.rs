//! Follow the Burgers smoothing underneath the fan: sample the smoothed
//! speed, verify it solves Burgers along characteristics, and show the
//! derivative decay at a point inside the wave.
//!
//! Run with: cargo run --example burgers_characteristics

use rarewave::gas::{GasModel, PrimitiveState};
use rarewave::rarefaction::{burgers_initial, burgers_smooth, RiemannData, SmoothFanParams};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let left = PrimitiveState::new(1.0, 0.0, 1.0)?;
    let data = RiemannData::connect(&gas, left, 0.5)?;
    let params = SmoothFanParams::for_data(&gas, &data, 0.1)?;
    println!(
        "edge speeds b- = {}, b+ = {}, delta = {}",
        params.b_minus, params.b_plus, params.delta
    );

    // b(t, x) is constant along x = x0 + t b0(x0): sample a few feet points
    let t = 1.0;
    let mut worst = 0.0f64;
    for x0 in [-0.6, -0.2, 0.0, 0.3, 0.8] {
        let b0 = burgers_initial(&params, x0);
        let sample = burgers_smooth(&params, t, x0 + t * b0)?;
        worst = worst.max((sample.b - b0).abs());
    }
    println!("max drift of b along characteristics at t = {t}: {worst:e}");

    // entropy solution property: b_x stays bounded by 1/t for all data
    let mut max_bx = 0.0f64;
    for k in 0..=400 {
        let x = -3.0 + 6.0 * k as f64 / 400.0;
        max_bx = max_bx.max(burgers_smooth(&params, t, x)?.bx);
    }
    println!("max b_x at t = {t}: {max_bx:.4} (rarefaction bound 1/t = {:.4})", 1.0 / t);

    // derivative decay at the fan center as time grows
    println!("derivatives of b at x = t*(b- + b+)/2:");
    let mid = 0.5 * (params.b_minus + params.b_plus);
    for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let s = burgers_smooth(&params, t, mid * t)?;
        println!(
            "  t = {t}: b = {:.4}, b_x = {:.4e}, b_xx = {:.4e}, b_xxx = {:.4e}",
            s.b, s.bx, s.bxx, s.bxxx
        );
    }
    Ok(())
}
