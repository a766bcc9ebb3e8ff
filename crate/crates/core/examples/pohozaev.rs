//! Pohozaev balance on a ball: exact for the flat bubble, second-order
//! convergent for sampled solutions.

use orbifold_yamabe::asymptotics::log_spaced;
use orbifold_yamabe::bubble::bubble_jet;
use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::pohozaev::{pohozaev_report, refinement_study, BallQuadrature, FlatEquation};
use orbifold_yamabe::solver::{solve_bvp, KFamily, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    let eq = FlatEquation { potential: 0.0, curvature: 8.0, p: 3.0 };
    let u = |r: f64| bubble_jet(8.0, r);
    for r in log_spaced(0.1, 5.0, 4) {
        let rep = pohozaev_report(&eq, &u, r, 1, BallQuadrature::Adaptive { tol: 1e-12 })?;
        println!("bubble, r = {r:.3}: boundary {:+.6e}, relative residual {:.1e}", rep.boundary_p, rep.relative_residual());
    }
    let g = RadialGeometry::lebrun_compact(2)?;
    if let Some(sol) = solve_bvp(&g, &KFamily::bump(-0.5)?, 3.0, &SolverOptions::default())?.solution() {
        let study = refinement_study(sol, 1.0, 51, 4)?;
        for (m, rep) in study.points.iter().zip(&study.reports) {
            println!("solution, {m:>4} nodes: relative residual {:.2e}", rep.relative_residual());
        }
        println!("observed orders {:?}", study.orders);
    }
    Ok(())
}
