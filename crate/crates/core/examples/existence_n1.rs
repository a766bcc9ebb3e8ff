//! A curvature on the positive side of the wall admits a critical solution,
//! reached by continuation from subcritical exponents.

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{
    classify_wall, continuation_in_p, ContinuationOptions, KFamily, SolverOptions,
};

fn main() -> orbifold_yamabe::Result<()> {
    let cases = [(1, KFamily::constant(1.0)?), (2, KFamily::bump(-0.5)?)];
    for (n, k) in cases {
        let g = RadialGeometry::lebrun_compact(n)?;
        let wall = classify_wall(&k, n);
        let grid: Vec<f64> = (0..=8).map(|i| 2.0 + 0.125 * i as f64).collect();
        let cont = continuation_in_p(&g, &k, &grid, &SolverOptions::default(), &ContinuationOptions::default())?;
        println!("n = {n}, {:?} (margin {:+.3}):", wall.label, wall.margin);
        for (p, m) in &cont.report.max_u_trace {
            println!("  p = {p:.3}: max u = {m:.6}");
        }
        println!("  growth ratio {:.3}, {:?}", cont.report.growth_ratio, cont.report.classification);
    }
    Ok(())
}
