//! Energy of closed geodesics exp(2 pi i t diag(d)) equals sum d_i^2.

use jumplab::linalg::random_unitary;
use jumplab::loopspace::{geodesic_loop, loop_energy, WeightVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> jumplab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in [vec![1, -1], vec![2, -1, -1], vec![3, 1, -1, -3], vec![2, 0]] {
        let d = WeightVector::new(d);
        let q = random_unitary(d.rank(), &mut rng);
        for n in [64, 512] {
            let gamma = geodesic_loop(&d, &q, n, d.sum() == 0)?;
            println!("{d:>14}  N = {n:>4}  E = {:.10}  sum d^2 = {}", loop_energy(&gamma)?, d.energy());
        }
    }
    Ok(())
}
