//! Continuation in the exponent for constant curvature on `O(-3)`, where no
//! critical solution exists.  The maximum grows only close to the critical exponent.

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{continuation_in_p, ContinuationOptions, KFamily, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    let g = RadialGeometry::lebrun_compact(3)?;
    let grid = [2.0, 2.25, 2.5, 2.75, 2.9, 2.95, 2.99, 2.995, 2.999];
    let cont = continuation_in_p(
        &g,
        &KFamily::constant(1.0)?,
        &grid,
        &SolverOptions::default(),
        &ContinuationOptions::default(),
    )?;
    for step in &cont.report.steps {
        match (&step.solution, &step.error) {
            (Some(s), _) => println!("p = {:<6} max u = {:>10.4} at t = {:.3}", step.p, s.max_u, s.argmax),
            (None, e) => println!("p = {:<6} unsolved: {}", step.p, e.as_deref().unwrap_or("")),
        }
    }
    let r = &cont.report;
    println!(
        "ratio {:.2}, monotone {}, peak at orbifold point {}, {:?}",
        r.growth_ratio, r.monotone, r.argmax_at_orbifold_point, r.classification
    );
    Ok(())
}
