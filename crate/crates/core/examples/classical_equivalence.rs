//! The quantum pipeline and a classical coin-flip embedder produce the same
//! distribution of error counts at the secret positions.

use qumark::qstate::{Basis, RandomSource};
use qumark::watermark::{build_message, classical_flip_embed, embed, observe, WatermarkSecret};

const MARKS: usize = 16;

fn main() -> qumark::Result<()> {
    let plaintext: Vec<bool> = (0..32).map(|i| i % 3 == 0).collect();
    let secret = WatermarkSecret::new((0..32).step_by(2).collect(), Basis::DIAGONAL, None)?;
    let message = build_message(&plaintext, Basis::RECTILINEAR)?;
    let trials = 20_000;

    let mut quantum = [0u32; MARKS + 1];
    let mut classical = [0u32; MARKS + 1];
    let mut rng = RandomSource::seeded(3);
    for _ in 0..trials {
        let obs = observe(&embed(&message, &secret, &mut rng)?, Basis::RECTILINEAR, &mut rng);
        quantum[errors(&obs.bits, &plaintext, secret.indices())] += 1;
        let bits = classical_flip_embed(&plaintext, secret.indices(), 0.5, &mut rng)?;
        classical[errors(&bits, &plaintext, secret.indices())] += 1;
    }

    println!("errors  quantum  classical");
    for k in 0..=MARKS {
        println!("{k:>6}  {:>7}  {:>9}", quantum[k], classical[k]);
    }
    Ok(())
}

fn errors(a: &[bool], b: &[bool], at: &[usize]) -> usize {
    at.iter().filter(|&&i| a[i] != b[i]).count()
}
