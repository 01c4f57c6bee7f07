//! Energy profile of the degree generator family in Omega SU(2), and its
//! block stabilizations.

use jumplab::flow::FlowConfig;
use jumplab::invariants::{family_sup_energy, skeleton_energy, su2_degree_generator_family};

fn main() -> jumplab::Result<()> {
    let cfg = FlowConfig::default();
    let fam = su2_degree_generator_family(16)?;
    for k in 0..=2 {
        let f = if k == 0 { fam.clone() } else { fam.stabilized(k)? };
        let e = family_sup_energy(&f, &cfg)?;
        println!(
            "rank {}: {} samples, sup energy {}, sup max|d| {}, oracle disagreements {}",
            2 + k,
            f.len(),
            e.sup_a,
            e.sup_inf,
            e.disagreements
        );
    }
    let s = skeleton_energy(2, 2);
    println!("index <= 2 skeleton in rank 2: {:?}, energy {}", s.weights.iter().map(|d| d.to_string()).collect::<Vec<_>>(), s.energy);
    Ok(())
}
