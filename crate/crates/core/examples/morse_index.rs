//! Hessian index of geodesic loops against the index formula.

use jumplab::linalg::identity;
use jumplab::loopspace::{formula_morse_index, geodesic_loop, hessian_report, orbit_dimension, WeightVector};

fn main() -> jumplab::Result<()> {
    for d in [vec![1, -1], vec![2, -2], vec![3, -3], vec![1, 0, -1], vec![2, -1, -1]] {
        let d = WeightVector::new(d);
        let gamma = geodesic_loop(&d, &identity(d.rank()), 128, true)?;
        let h = hessian_report(&gamma, Some(orbit_dimension(&d)))?;
        println!(
            "{d:>10}: formula {:>3}, Hessian {:>3} negative, {} near zero (orbit {}), 2r-2 = {}",
            formula_morse_index(&d)?,
            h.negative,
            h.near_zero,
            orbit_dimension(&d),
            2 * d.rank() - 2
        );
    }
    Ok(())
}
