//! Convergence of the semilinear PDE solver against the closed-form bound.
//!
//! In the regime without traded drift and drift uncertainty the valuation
//! equation has a closed-form solution, which makes it an exact oracle for
//! the finite-difference scheme. The maximal relative error is measured on
//! the economically relevant band of index levels and is expected to drop
//! by roughly an order of magnitude per grid doubling for the compact
//! fourth-order spatial discretization used here.
//!
//! Run with: cargo run --example pde_vs_closed_form

use std::time::Instant;

use gooddeal::markovian::{
    closed_form_bound, good_deal_driver, solve_semilinear_pde, PdeParams, PutScenario,
};
use gooddeal::Result;

fn main() -> Result<()> {
    let s = PutScenario::default();
    let exact_at_spot = closed_form_bound(&s, 0.0, s.l0)?;
    println!("closed-form bound at the spot: {exact_at_spot:.8}");
    println!();
    println!(
        "{:>10} {:>14} {:>14} {:>10} {:>8}",
        "grid", "v(0, l0)", "max rel err", "ratio", "time"
    );

    let mut previous: Option<f64> = None;
    for nodes in [100, 200, 400] {
        let params = PdeParams {
            space_nodes: nodes,
            time_nodes: nodes,
            width_stds: 8.0,
        };
        let clock = Instant::now();
        let grid = solve_semilinear_pde(&s, good_deal_driver(&s), &params)?;
        let elapsed = clock.elapsed();

        // Interior band: half to twice the strike.
        let mut worst = 0.0_f64;
        for (i, &x) in grid.x_nodes().iter().enumerate() {
            if x < 0.5 * s.strike || x > 2.0 * s.strike {
                continue;
            }
            let exact = closed_form_bound(&s, 0.0, x)?;
            worst = worst.max((grid.values()[0][i] - exact).abs() / exact);
        }
        let ratio = previous.map_or(String::from("-"), |p| format!("{:.1}x", p / worst));
        previous = Some(worst);
        println!(
            "{:>7}x{:<3} {:>14.8} {:>14.2e} {ratio:>10} {:>6.1}ms",
            nodes,
            nodes,
            grid.value_at(0.0, s.l0)?,
            worst,
            1e3 * elapsed.as_secs_f64()
        );
    }
    Ok(())
}
