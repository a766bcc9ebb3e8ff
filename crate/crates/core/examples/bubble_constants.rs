//! The flat bubble, its residual, and the constants of its energy expansion.

use orbifold_yamabe::bubble::{bubble_eval, bubble_residual, conformal_constant, hat_constants, sobolev_quotient};

fn main() -> orbifold_yamabe::Result<()> {
    let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    for c in [1.0, 2.0, 8.0] {
        println!(
            "U_{c}(0) = {:.6}, max residual on [0, 10] = {:.1e}",
            bubble_eval(c, 0.0),
            bubble_residual(c, &grid)
        );
    }
    let h = hat_constants(4)?;
    let q = sobolev_quotient(4)?;
    println!("c0 = {:.9}, c2 = {:.9}, d1 = {:.9}", h.c0, h.c2, h.d1);
    println!("c(4) c0 = {:.9}, Sobolev quotient = {q:.9}", conformal_constant(4) * h.c0);
    Ok(())
}
