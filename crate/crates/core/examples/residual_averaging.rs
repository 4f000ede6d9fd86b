//! Averaging when every released copy carries its own index set, derived
//! from a fresh key. The attacker can no longer single out one index set,
//! but each position is marked in only a few copies, so the majority vote
//! restores the plaintext there whatever p_e is.
//!
//!     cargo run --example residual_averaging -- [copies]

use qumark::attacks::averaging_attack;
use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource, UniformSource};
use qumark::stats::DecisionRule;
use qumark::watermark::{build_message, embed, observe, verify, ObservedMessage, WatermarkSecret};

fn main() -> qumark::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let (len, marks) = (8192, 1024);
    let mut rng = RandomSource::seeded(12);
    let plaintext: Vec<bool> = (0..len).map(|_| rng.next_uniform() < 0.5).collect();
    let reference = ObservedMessage::new(plaintext.clone(), Basis::RECTILINEAR);
    let message = build_message(&plaintext, Basis::RECTILINEAR)?;
    let params = DerivationParams::new(len, marks, None)?;

    for mark in [30.0, 45.0] {
        let mut fixed = Vec::new();
        let mut varying = Vec::new();
        let shared = WatermarkSecret::new(derive_indices(&SecretKey::generate(&mut rng), &params)?, Basis::new(mark)?, None)?;
        for _ in 0..m {
            fixed.push(observe(&embed(&message, &shared, &mut rng)?, Basis::RECTILINEAR, &mut rng));
            let own = WatermarkSecret::new(derive_indices(&SecretKey::generate(&mut rng), &params)?, Basis::new(mark)?, None)?;
            let copy = observe(&embed(&message, &own, &mut rng)?, Basis::RECTILINEAR, &mut rng);
            varying.push((own, copy));
        }

        let fixed_result = averaging_attack(&fixed)?;
        let r = verify(&fixed_result.recovered, &reference, &shared, DecisionRule::default())?;
        println!("k = {mark}: {m} copies");
        println!(
            "  shared I:   {:>5} suspected, frequency at I {:.4} -> {}",
            fixed_result.suspected_indices.len(),
            r.observed_frequency,
            r.decision
        );

        let copies: Vec<_> = varying.iter().map(|(_, c)| c.clone()).collect();
        let result = averaging_attack(&copies)?;
        let mut accepted = 0;
        let mut freq = 0.0;
        for (secret, _) in &varying {
            let r = verify(&result.recovered, &reference, secret, DecisionRule::default())?;
            freq += r.observed_frequency;
            accepted += r.decision.is_accept() as usize;
        }
        println!(
            "  per-copy I: {:>5} suspected, mean frequency {:.4}, {accepted}/{m} index sets still verify",
            result.suspected_indices.len(),
            freq / m as f64
        );
    }
    Ok(())
}
