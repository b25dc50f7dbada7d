//! Run a small vanishing-dissipation sweep with the coupled delta-rule and
//! emit the convergence report.
//!
//! Run with: cargo run --release --example epsilon_sweep
//! The full five-point sweep is what `rarewave sweep` runs by default; this
//! example keeps a trimmed list so it finishes in seconds.

use rarewave::harness::{emit_report, epsilon_sweep, SweepSpec};

fn main() -> rarewave::Result<()> {
    let mut spec = SweepSpec::default_sweep();
    spec.eps_list = vec![1e-1, 3e-2, 1e-2];
    spec.t_final = 0.5;
    spec.h = 0.1;
    spec.cells_per_delta = 32;
    spec.snapshots_per_unit = 10;

    let report = epsilon_sweep(&spec)?;
    println!("eps      delta    sup_error      z_l2");
    for row in &report.rows {
        match row.sup_error {
            Some(err) => println!(
                "{:<8} {:.4}   {:.6e}   {:.6e}",
                row.eps,
                row.delta,
                err,
                row.z_l2.unwrap()
            ),
            None => println!("{:<8} failed: {}", row.eps, row.failure.as_deref().unwrap_or("?")),
        }
    }
    for fit in &report.fits {
        println!(
            "fit {}: alpha = {:.4} (beta = {} fixed), C = {:.4e}, residual = {:.3e}",
            fit.quantity, fit.alpha, fit.beta, fit.c, fit.residual
        );
    }

    let out = std::path::Path::new("sweep_out");
    let files = emit_report(&report, out)?;
    println!("wrote {} files under {}", files.len(), out.display());
    Ok(())
}
