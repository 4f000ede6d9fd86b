//! Shifting the released bits by one position. Against a carrier whose
//! neighbouring bits are correlated the shifted copy no longer matches the
//! reference at the marks at rate p_e; against uncorrelated bits the
//! misaligned comparison disagrees half the time, which is p_e = 0.5 again.

use qumark::attacks::shift_attack;
use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource, UniformSource};
use qumark::stats::DecisionRule;
use qumark::watermark::{build_message, embed, observe, verify, ObservedMessage, WatermarkSecret};

fn main() -> qumark::Result<()> {
    let len = 8192;
    let mut rng = RandomSource::seeded(11);
    let indices = derive_indices(&SecretKey::generate(&mut rng), &DerivationParams::new(len, 4096, None)?)?;
    let secret = WatermarkSecret::new(indices, Basis::DIAGONAL, None)?;

    println!("{:>12} {:>9} {:>10} {:>10}", "carrier", "offset", "frequency", "verdict");
    for (name, switch) in [("runs of 16", 1.0 / 16.0), ("runs of 4", 0.25), ("uniform", 0.5)] {
        let plaintext = markov_bits(len, switch, &mut rng);
        let reference = ObservedMessage::new(plaintext.clone(), Basis::RECTILINEAR);
        let message = build_message(&plaintext, Basis::RECTILINEAR)?;
        let released = observe(&embed(&message, &secret, &mut rng)?, Basis::RECTILINEAR, &mut rng);
        for offset in [0, 1, 8] {
            let suspect = if offset == 0 { released.clone() } else { shift_attack(&released, offset, false)? };
            let r = verify(&suspect, &reference, &secret, DecisionRule::default())?;
            println!("{name:>12} {offset:>9} {:>10.4} {:>10}", r.observed_frequency, r.decision.to_string());
        }
    }
    Ok(())
}

/// Each bit repeats the previous one except with probability `switch`.
fn markov_bits(n: usize, switch: f64, rng: &mut RandomSource) -> Vec<bool> {
    let mut cur = rng.next_uniform() < 0.5;
    (0..n)
        .map(|_| {
            let b = cur;
            if rng.next_uniform() < switch {
                cur = !cur;
            }
            b
        })
        .collect()
}
