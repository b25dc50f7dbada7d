//! Track the relative entropy and the perturbation norms of a viscous run
//! measured against the composite profile.
//!
//! Run with: cargo run --release --example relative_entropy

use rarewave::diagnostics::{perturbation_norms, relative_entropy};
use rarewave::gas::GasModel;
use rarewave::harness::{run_single, SweepSpec};

fn main() -> rarewave::Result<()> {
    let gas = GasModel::air_like();
    let mut spec = SweepSpec::default_sweep();
    spec.eps_list = vec![1e-2];
    spec.t_final = 0.5;
    spec.h = 0.1;
    spec.cells_per_delta = 32;
    spec.snapshots_per_unit = 10;

    let eps = 1e-2;
    let run = run_single(&spec, eps)?;
    println!("eps = {eps}, delta = {:.4}", run.delta);

    let mut csv = String::from("t,quantity,value\n");
    println!("relative entropy integral per snapshot:");
    for (s, t) in run.trajectory.times.iter().enumerate() {
        let eta = relative_entropy(&gas, &run.trajectory.fields[s], &run.profiles[s])?;
        println!("  t = {t:.2}: {:e}", eta.integral);
        csv.push_str(&format!("{t},relative_entropy,{}\n", eta.integral));
    }

    let series = perturbation_norms(&gas, &run.trajectory, &run.profiles, eps, &[0, 1, 2])?;
    for (s, t) in series.times.iter().enumerate() {
        for (k, o) in series.orders.iter().enumerate() {
            csv.push_str(&format!("{t},pert_norm{o}_sq,{}\n", series.norms_sq[s][k]));
        }
    }
    println!("sup over time of the squared perturbation norms:");
    for o in 0..=2usize {
        println!("  order {o}: {:e}", series.sup_norm_sq(o).unwrap());
    }
    println!(
        "time-integrated dissipation (order 0 ledger): {:e}",
        series.dissipation[0]
    );

    std::fs::write("relative_entropy.csv", csv).expect("write relative_entropy.csv");
    println!("wrote relative_entropy.csv");
    Ok(())
}
