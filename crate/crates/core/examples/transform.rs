//! A critical solution on `O(-3)` read as a solution on `O(-2)` with a modified
//! curvature, and the randomized identity check of both residual forms.

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{solve_bvp, transform_identity_check, transform_n_to_2, KFamily, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    let k = KFamily::bump(-0.5)?;
    let g = RadialGeometry::lebrun_compact(3)?;
    let found = solve_bvp(&g, &k, 3.0, &SolverOptions::default())?;
    if let Some(sol) = found.solution() {
        let rep = transform_n_to_2(sol, &k, 3, 2001)?;
        println!(
            "finite-difference residuals: O(-3) {:.1e}, O(-2) {:.1e}, difference {:.1e}",
            rep.residual_n_sup, rep.residual_2_sup, rep.max_residual_difference
        );
    }
    for n in [1, 3, 4, 5] {
        let c = transform_identity_check(n, 42, 20, 10)?;
        println!("n = {n}: {} evaluations, max relative difference {:.1e}", c.evaluations, c.max_relative_difference);
    }
    Ok(())
}
