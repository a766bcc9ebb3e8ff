//! Solution counts across the wall for `K_a = 1 + a exp(-s²)` on `O(-3)`.

use rayon::prelude::*;

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{classify_wall, multi_start_count, KFamily, Problem, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    let g = RadialGeometry::lebrun_compact(3)?;
    let opts = SolverOptions::default();
    let amplitudes: Vec<f64> = (0..40).map(|i| -0.9 + 0.1 * i as f64).collect();
    let rows = amplitudes
        .par_iter()
        .map(|&a| {
            let k = KFamily::bump(a)?;
            let count = multi_start_count(&Problem::new(&g, &k, 3.0)?, &opts.slope_grid(), &opts)?;
            Ok((a, classify_wall(&k, 3), count.count))
        })
        .collect::<orbifold_yamabe::Result<Vec<_>>>()?;
    for (a, wall, count) in rows {
        println!("a = {a:+.1}  margin {:+8.3}  {:?}  solutions {count}", wall.margin, wall.label);
    }
    Ok(())
}
