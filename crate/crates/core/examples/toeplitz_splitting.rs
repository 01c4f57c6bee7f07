//! Splitting type of Laurent loops from kernel dimensions of block-Toeplitz matrices.

use jumplab::birkhoff::{det_winding, h0_twisted, splitting_type, LaurentLoop};
use jumplab::linalg::{c, zeros};

fn main() -> jumplab::Result<()> {
    let diag = LaurentLoop::diagonal(&[2, -1, -1]);
    println!("diag(z^2, z^-1, z^-1): type {}, winding {}", splitting_type(&diag)?, det_winding(&diag)?);

    // [[z, 1], [0, 1/z]] is a non-split extension and has the balanced type
    let mut coeffs = vec![zeros(2); 3];
    coeffs[2][(0, 0)] = c(1.0, 0.0);
    coeffs[1][(0, 1)] = c(1.0, 0.0);
    coeffs[0][(1, 1)] = c(1.0, 0.0);
    let ext = LaurentLoop::new(2, 1, coeffs)?;
    println!("[[z, 1], [0, 1/z]]: type {}", splitting_type(&ext)?);
    for k in -2..=2 {
        println!("  h0 twisted by {k:>2}: {}", h0_twisted(&ext, k, 8)?);
    }
    Ok(())
}
