//! Curvature of split and complex-gauge perturbed connections: Chern number and
//! the lower bound sup|F| * area >= max|d_i|.

use jumplab::bundle::{
    chern_number, complex_gauge_perturb, gromov_check, make_split_connection, random_complex_gauge, ym_energy,
    GaugeShape, PolarGrid, SphereMetric,
};
use jumplab::loopspace::WeightVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> jumplab::Result<()> {
    let grid = PolarGrid::default();
    let g = SphereMetric::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [vec![1, -1], vec![2, 0], vec![2, -1, -1]] {
        let d = WeightVector::new(d);
        let a = make_split_connection(&d, grid)?;
        let h = random_complex_gauge(&d, grid, 0.3, GaugeShape::Levi, a.spec.special, &mut rng);
        for (what, conn) in [("split", a.clone()), ("gauged", complex_gauge_perturb(&a, &h)?)] {
            let rec = gromov_check(&conn, &g, &d)?;
            println!(
                "{d:>10} {what:>6}: c1 = {}, YM = {:.5}, sup|F| area = {:.4} >= {}",
                chern_number(&conn)?,
                ym_energy(&conn, &g)?,
                rec.lhs,
                rec.rhs
            );
        }
    }
    Ok(())
}
