//! Flipping every released bit with probability q moves the error rate at
//! the marks to p_e + q(1 - 2 p_e).

use qumark::attacks::noise_attack;
use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource, UniformSource};
use qumark::stats::DecisionRule;
use qumark::watermark::{build_message, embed, observe, verify, ObservedMessage, WatermarkSecret};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let len = 20_000;
    let mut rng = RandomSource::seeded(10);
    let plaintext: Vec<bool> = (0..len).map(|_| rng.next_uniform() < 0.5).collect();
    let indices = derive_indices(&SecretKey::generate(&mut rng), &DerivationParams::new(len, 10_000, None)?)?;
    let reference = ObservedMessage::new(plaintext.clone(), Basis::RECTILINEAR);
    let message = build_message(&plaintext, Basis::RECTILINEAR)?;
    let rule: DecisionRule = "binom:0.99".parse()?;

    println!("{:>5} {:>5} {:>9} {:>9} {:>8}", "p_e", "q", "predicted", "observed", "verdict");
    for mark in [30.0, 45.0] {
        let secret = WatermarkSecret::new(indices.clone(), Basis::new(mark)?, None)?;
        let pe = secret.expected_pe(Basis::RECTILINEAR);
        let released = observe(&embed(&message, &secret, &mut rng)?, Basis::RECTILINEAR, &mut rng);
        for q in [0.0, 0.01, 0.05, 0.1, 0.3] {
            let noisy = noise_attack(&released, q, &mut rng)?;
            let r = verify(&noisy, &reference, &secret, rule)?;
            println!(
                "{pe:>5} {q:>5} {:>9.4} {:>9.4} {:>8}",
                pe + q * (1.0 - 2.0 * pe),
                r.observed_frequency,
                r.decision.to_string()
            );
        }
    }
    Ok(())
}
