//! The constant solution on the round football: `K = 2` gives `u = 1`.

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{solve_bvp, KFamily, SolveOutcome, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    for order in [1, 2, 5] {
        let g = RadialGeometry::football(order)?;
        match solve_bvp(&g, &KFamily::constant(2.0)?, 3.0, &SolverOptions::default())? {
            SolveOutcome::Found(sol) => println!(
                "|G| = {order}: u in [{:.12}, {:.12}], residual {:.1e}",
                sol.min_u, sol.max_u, sol.residual_sup
            ),
            SolveOutcome::NotFound(_) => println!("|G| = {order}: no solution"),
        }
    }
    Ok(())
}
