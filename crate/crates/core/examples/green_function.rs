//! Green's function of the conformal Laplacian on the compactified metric,
//! compared with its closed form `s^-2 + n`.

use orbifold_yamabe::asymptotics::{green_function_radial, GreenOptions};
use orbifold_yamabe::geometry::RadialGeometry;

fn main() -> orbifold_yamabe::Result<()> {
    for n in [1, 2, 3, 5] {
        let g = RadialGeometry::lebrun_compact(n)?;
        let green = green_function_radial(&g, &GreenOptions::default())?;
        print!("n = {n}: regular term {:.10}, ", green.regular_term_s);
        for s in [0.01, 1.0, 100.0] {
            let psi = green.psi(s)?;
            let exact = s.powi(-2) + n as f64;
            print!("psi({s}) rel err {:.1e}  ", (psi - exact).abs() / exact);
        }
        println!();
    }
    Ok(())
}
