//! Averaging many released copies of the same message. Positions where the
//! copies disagree reveal the index set; the majority vote either restores
//! the plaintext (p_e < 0.5) or leaves coin flips at the marks (p_e = 0.5).

use qumark::attacks::averaging_attack;
use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource, UniformSource};
use qumark::stats::DecisionRule;
use qumark::watermark::{build_message, embed, observe, verify, ObservedMessage, WatermarkSecret};

fn main() -> qumark::Result<()> {
    let len = 8192;
    let mut rng = RandomSource::seeded(9);
    let plaintext: Vec<bool> = (0..len).map(|_| rng.next_uniform() < 0.5).collect();
    let indices = derive_indices(&SecretKey::generate(&mut rng), &DerivationParams::new(len, 4096, None)?)?;
    let reference = ObservedMessage::new(plaintext.clone(), Basis::RECTILINEAR);
    let message = build_message(&plaintext, Basis::RECTILINEAR)?;

    for mark in [45.0, 30.0] {
        let secret = WatermarkSecret::new(indices.clone(), Basis::new(mark)?, None)?;
        println!("mark basis {mark} deg, p_e = {}", secret.expected_pe(Basis::RECTILINEAR));
        println!("{:>7} {:>10} {:>12} {:>9}", "copies", "found", "recovered f", "verdict");
        for m in [2, 5, 10, 20] {
            let copies: Vec<_> = (0..m)
                .map(|_| embed(&message, &secret, &mut rng).map(|q| observe(&q, Basis::RECTILINEAR, &mut rng)))
                .collect::<qumark::Result<_>>()?;
            let result = averaging_attack(&copies)?;
            let report = verify(&result.recovered, &reference, &secret, DecisionRule::default())?;
            println!(
                "{m:>7} {:>10.6} {:>12.4} {:>9}",
                result.suspected_indices.len() as f64 / secret.len() as f64,
                report.observed_frequency,
                report.decision.to_string()
            );
        }
        println!();
    }
    Ok(())
}
