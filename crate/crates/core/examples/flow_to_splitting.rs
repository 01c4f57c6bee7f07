//! Flow a perturbed geodesic down to its limit and read off the weights.

use jumplab::birkhoff::{planted_loop, unitarize, FactorShape};
use jumplab::flow::{flow_to_weights, run_flow, FlowConfig};
use jumplab::loopspace::WeightVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> jumplab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = FlowConfig::default();
    for d in [vec![1, 1, -2], vec![2, -1, -1], vec![1, 1, -1, -1]] {
        let d = WeightVector::new(d);
        let gamma = unitarize(&planted_loop(&d, 2, 0.4, FactorShape::Levi, &mut rng), 64)?;
        let trace = run_flow(&gamma, &cfg)?;
        let out = flow_to_weights(&gamma, &cfg)?;
        println!(
            "planted {d}: energy {:.4} -> {:.8} in {} steps (monotone {}), weights {}",
            out.start_energy,
            out.energy,
            out.steps,
            trace.is_monotone(),
            out.weights
        );
    }
    Ok(())
}
