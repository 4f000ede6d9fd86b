//! Attacks on released (already observed) watermarked messages: collusion by
//! averaging several copies, random bit-flip noise, and index
//! desynchronization by shifting.

use crate::error::{Error, Result};
use crate::qstate::UniformSource;
use crate::stats::DecisionRule;
use crate::watermark::{verify, ObservedMessage, VerificationReport, WatermarkSecret};

/// What an averaging attacker learns from several copies.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingResult {
    pub recovered: ObservedMessage,
    /// Positions where at least two copies disagree: the attacker's guess at `I`.
    pub suspected_indices: Vec<usize>,
    /// Per position, the number of copies that differ from the majority value.
    pub disagreement_counts: Vec<usize>,
}

/// Verification of the same suspect before and after an attack.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub attacked: ObservedMessage,
    pub verification_before: VerificationReport,
    pub verification_after: VerificationReport,
}

/// Majority vote over `copies` (ties resolve to 0).
pub fn averaging_attack(copies: &[ObservedMessage]) -> Result<AveragingResult> {
    if copies.len() < 2 {
        return Err(Error::TooFewCopies(copies.len()));
    }
    let first = &copies[0];
    let len = first.len();
    for c in &copies[1..] {
        if c.len() != len {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: len,
            });
        }
        if c.basis().is_dissimilar(&first.basis()) {
            return Err(Error::BasisMismatch {
                left: c.basis().theta(),
                right: first.basis().theta(),
            });
        }
    }

    let m = copies.len();
    let mut bits = Vec::with_capacity(len);
    let mut suspected = Vec::new();
    let mut disagreement = Vec::with_capacity(len);
    for i in 0..len {
        let ones = copies.iter().filter(|c| c.bits[i]).count();
        let zeros = m - ones;
        let majority = ones > zeros;
        bits.push(majority);
        disagreement.push(ones.min(zeros));
        if ones != 0 && zeros != 0 {
            suspected.push(i);
        }
    }
    Ok(AveragingResult {
        recovered: ObservedMessage::new(bits, first.basis()),
        suspected_indices: suspected,
        disagreement_counts: disagreement,
    })
}

/// Flips every bit independently with probability `flip_rate`, one draw
/// per bit in index order.
pub fn noise_attack<R: UniformSource + ?Sized>(
    message: &ObservedMessage,
    flip_rate: f64,
    rng: &mut R,
) -> Result<ObservedMessage> {
    if !(0.0..=1.0).contains(&flip_rate) {
        return Err(Error::InvalidProbability(flip_rate));
    }
    let bits = message
        .bits
        .iter()
        .map(|&b| b ^ (rng.next_uniform() < flip_rate))
        .collect();
    Ok(ObservedMessage::new(bits, message.basis()))
}

/// Moves every bit up by `offset` positions, fills the vacated prefix with
/// `pad_bit` and drops the tail, preserving length.
pub fn shift_attack(message: &ObservedMessage, offset: usize, pad_bit: bool) -> Result<ObservedMessage> {
    let len = message.len();
    if offset == 0 || offset >= len {
        return Err(Error::OffsetTooLarge { offset, len });
    }
    let mut bits = vec![pad_bit; offset];
    bits.extend_from_slice(&message.bits[..len - offset]);
    Ok(ObservedMessage::new(bits, message.basis()))
}

/// Verifies `suspect`, applies `attack`, verifies the result.
pub fn run_attack_report<F>(
    reference: &ObservedMessage,
    suspect: &ObservedMessage,
    attack: F,
    secret: &WatermarkSecret,
    rule: DecisionRule,
) -> Result<AttackOutcome>
where
    F: FnOnce(&ObservedMessage) -> Result<ObservedMessage>,
{
    let verification_before = verify(suspect, reference, secret, rule)?;
    let attacked = attack(suspect)?;
    let verification_after = verify(&attacked, reference, secret, rule)?;
    Ok(AttackOutcome {
        attacked,
        verification_before,
        verification_after,
    })
}
