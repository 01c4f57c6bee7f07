//! Mod-2 cascade homology of small Morse-Bott problems and the perfect complex of
//! the loop space.

use jumplab::cascade::{cascade_complex, perfect_complex_for_weights, Builtin, MorseBottProblem};

fn main() -> jumplab::Result<()> {
    for b in Builtin::ALL {
        let data = cascade_complex(&MorseBottProblem::builtin(b))?;
        println!("{b}: degrees {:?}, betti {:?}", data.degrees, data.betti);
    }
    let p = perfect_complex_for_weights(2, 2)?;
    for (l, d) in p.labels.iter().zip(&p.degrees) {
        println!("  loop space, rank 2: degree {d}  {l}");
    }
    Ok(())
}
