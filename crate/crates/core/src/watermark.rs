//! The fuzzy watermarking protocol.
//!
//! Alice writes a message as eigenstates of the writing basis `j`. To
//! watermark it she observes the qubits at the secret positions `I` in `j`
//! and writes the observed values back in a dissimilar basis `k`. Anyone who
//! later observes the message in `j` reads each of those positions flipped
//! with probability `p_e = sin²(k - j)`; the watermark is that error
//! frequency. Verification compares a suspect observation against Alice's
//! retained plaintext at `I` and asks a [`DecisionRule`] whether the
//! disagreement rate is close enough to `p_e`.

use log::warn;

use crate::error::{Error, Result};
use crate::qstate::{encode_bit, expected_error_probability, measure, Basis, RebitState, UniformSource};
use crate::stats::{self, Decision, DecisionOutcome, DecisionRule};

/// Below this many watermark positions, embedding logs a warning.
pub const SMALL_MARK_WARNING: usize = 64;

/// Below this flip probability the mark is practically indistinguishable
/// from an unwatermarked copy; embedding logs a warning.
pub const LOW_PE_WARNING: f64 = 0.05;

/// A message of rebit states together with its writing basis `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMessage {
    states: Vec<RebitState>,
    writing_basis: Basis,
}

impl QuantumMessage {
    pub fn new(states: Vec<RebitState>, writing_basis: Basis) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyMessage);
        }
        Ok(QuantumMessage {
            states,
            writing_basis,
        })
    }

    pub fn states(&self) -> &[RebitState] {
        &self.states
    }

    pub fn writing_basis(&self) -> Basis {
        self.writing_basis
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// The verification secret: positions `I`, mark basis `k`, and optionally
/// the key `K` the positions were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkSecret {
    indices: Vec<usize>,
    mark_basis: Basis,
    key: Option<Vec<u8>>,
}

impl WatermarkSecret {
    /// Sorts `indices`; rejects an empty set and duplicates.
    pub fn new(mut indices: Vec<usize>, mark_basis: Basis, key: Option<Vec<u8>>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(WatermarkSecret {
            indices,
            mark_basis,
            key,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mark_basis(&self) -> Basis {
        self.mark_basis
    }

    pub fn key(&self) -> Option<&[u8]> {
        self.key.as_deref()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `p_e` for messages observed in `observation_basis`.
    pub fn expected_pe(&self, observation_basis: Basis) -> f64 {
        expected_error_probability(self.mark_basis, observation_basis)
    }

    fn check_range(&self, len: usize) -> Result<()> {
        match self.indices.last() {
            Some(&index) if index >= len => Err(Error::IndexOutOfRange { index, len }),
            _ => Ok(()),
        }
    }
}

/// Classical outcome of observing a message: `M ∘ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMessage {
    pub bits: Vec<bool>,
    pub observation_basis: Basis,
}

impl ObservedMessage {
    pub fn new(bits: Vec<bool>, observation_basis: Basis) -> Self {
        ObservedMessage {
            bits,
            observation_basis,
        }
    }

    pub fn basis(&self) -> Basis {
        self.observation_basis
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub error_count: usize,
    pub sample_size: usize,
    pub observed_frequency: f64,
    pub expected_pe: f64,
    pub decision: Decision,
    pub decision_detail: DecisionOutcome,
}

/// Extra checks applied by [`embed_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmbedPolicy {
    /// Reject secrets smaller than the exact-test sample size needed to tell
    /// the mark from an unwatermarked copy at 99% confidence and 99% power.
    pub strict: bool,
}

/// Writes `bits` as eigenstates of `basis`.
pub fn build_message(bits: &[bool], basis: Basis) -> Result<QuantumMessage> {
    QuantumMessage::new(bits.iter().map(|&b| encode_bit(b, basis)).collect(), basis)
}

/// Embeds the watermark with the default (lenient) policy.
pub fn embed<R: UniformSource + ?Sized>(
    message: &QuantumMessage,
    secret: &WatermarkSecret,
    rng: &mut R,
) -> Result<QuantumMessage> {
    embed_with(message, secret, rng, EmbedPolicy::default())
}

/// Observes each position in `I` in the writing basis and re-encodes the
/// observed value in the mark basis. One draw per index, ascending order.
pub fn embed_with<R: UniformSource + ?Sized>(
    message: &QuantumMessage,
    secret: &WatermarkSecret,
    rng: &mut R,
    policy: EmbedPolicy,
) -> Result<QuantumMessage> {
    let j = message.writing_basis;
    let k = secret.mark_basis;
    secret.check_range(message.len())?;
    if !k.is_dissimilar(&j) {
        return Err(Error::BasisNotDissimilar {
            mark: k.theta(),
            writing: j.theta(),
        });
    }

    let pe = expected_error_probability(k, j);
    if policy.strict {
        let need = stats::recommended_sample_size(pe, 0.0, 0.99, 0.99)?;
        if secret.len() < need {
            return Err(Error::InsufficientMarks {
                have: secret.len(),
                need,
            });
        }
    } else if secret.len() < SMALL_MARK_WARNING {
        warn!(
            "watermark has only {} positions; verification will be unreliable below {}",
            secret.len(),
            SMALL_MARK_WARNING
        );
    }
    if pe < LOW_PE_WARNING {
        warn!("expected flip probability {pe:.4} is too small to distinguish from an unmarked copy");
    }

    let mut states = message.states.clone();
    for &i in &secret.indices {
        let value = measure(states[i], j, rng);
        states[i] = encode_bit(value, k);
    }
    Ok(QuantumMessage {
        states,
        writing_basis: j,
    })
}

/// Measures every qubit in `basis`, in index order, one draw each.
pub fn observe<R: UniformSource + ?Sized>(
    message: &QuantumMessage,
    basis: Basis,
    rng: &mut R,
) -> ObservedMessage {
    let bits = message.states.iter().map(|&s| measure(s, basis, rng)).collect();
    ObservedMessage::new(bits, basis)
}

/// Compares `suspect` with Alice's `reference` observation at the secret
/// positions and applies `rule`.
pub fn verify(
    suspect: &ObservedMessage,
    reference: &ObservedMessage,
    secret: &WatermarkSecret,
    rule: DecisionRule,
) -> Result<VerificationReport> {
    if suspect.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: suspect.len(),
            right: reference.len(),
        });
    }
    let basis = reference.basis();
    if suspect.basis().is_dissimilar(&basis) {
        return Err(Error::BasisMismatch {
            left: suspect.basis().theta(),
            right: basis.theta(),
        });
    }
    secret.check_range(reference.len())?;

    let error_count = secret
        .indices
        .iter()
        .filter(|&&i| suspect.bits[i] != reference.bits[i])
        .count();
    let sample_size = secret.len();
    let expected_pe = secret.expected_pe(basis);
    let detail = stats::decide(error_count, sample_size, expected_pe, rule)?;
    Ok(VerificationReport {
        error_count,
        sample_size,
        observed_frequency: detail.statistic,
        expected_pe,
        decision: detail.decision,
        decision_detail: detail,
    })
}

/// The classical equivalent: flip each indexed bit independently with
/// probability `pe`. One draw per index, ascending order.
pub fn classical_flip_embed<R: UniformSource + ?Sized>(
    bits: &[bool],
    indices: &[usize],
    pe: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::InvalidProbability(pe));
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= bits.len()) {
        return Err(Error::IndexOutOfRange {
            index,
            len: bits.len(),
        });
    }
    let mut out = bits.to_vec();
    for &i in indices {
        if rng.next_uniform() < pe {
            out[i] = !out[i];
        }
    }
    Ok(out)
}

/// Parses a string of `0`/`1` characters; whitespace and `_` are ignored.
pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{FixedSequence, RandomSource};

    fn basis(theta: f64) -> Basis {
        Basis::new(theta).unwrap()
    }

    fn four_mark_secret() -> WatermarkSecret {
        WatermarkSecret::new(vec![2, 3, 4, 6], basis(45.0), None).unwrap()
    }

    #[test]
    fn build_message_examples() {
        let m = build_message(&[false], basis(0.0)).unwrap();
        assert_eq!(m.states(), &[RebitState::new(0.0).unwrap()]);
        let m = build_message(&parse_bits("10").unwrap(), basis(0.0)).unwrap();
        assert_eq!(m.states()[0].phi(), 90.0);
        assert_eq!(m.states()[1].phi(), 0.0);
        assert_eq!(build_message(&[], basis(0.0)), Err(Error::EmptyMessage));

        let m = build_message(&parse_bits("0110 0101").unwrap(), basis(0.0)).unwrap();
        assert_eq!(m.len(), 8);
        for s in m.states() {
            assert!(s.is_eigenstate_of(basis(0.0)));
            assert!(!s.is_eigenstate_of(basis(45.0)));
        }
    }

    #[test]
    fn secret_construction() {
        let s = WatermarkSecret::new(vec![6, 2, 4, 3], basis(45.0), None).unwrap();
        assert_eq!(s.indices(), &[2, 3, 4, 6]);
        assert_eq!(WatermarkSecret::new(vec![], basis(45.0), None), Err(Error::EmptyIndexSet));
        assert_eq!(
            WatermarkSecret::new(vec![1, 3, 1], basis(45.0), None),
            Err(Error::DuplicateIndex(1))
        );
    }

    #[test]
    fn embed_single_position() {
        let m = build_message(&[false, true], basis(0.0)).unwrap();
        let secret = WatermarkSecret::new(vec![0], basis(45.0), None).unwrap();
        let out = embed(&m, &secret, &mut RandomSource::seeded(1)).unwrap();
        assert_eq!(out.states()[0].phi(), 45.0);
        assert_eq!(out.states()[1], m.states()[1]);
        // Input untouched.
        assert_eq!(m.states()[0].phi(), 0.0);
    }

    #[test]
    fn embed_four_mark_shape() {
        let m = build_message(&parse_bits("01100101").unwrap(), basis(0.0)).unwrap();
        let out = embed(&m, &four_mark_secret(), &mut RandomSource::seeded(3)).unwrap();
        for (i, s) in out.states().iter().enumerate() {
            let marked = [2, 3, 4, 6].contains(&i);
            assert_eq!(s.is_eigenstate_of(basis(45.0)), marked, "position {i}");
            assert_eq!(s.is_eigenstate_of(basis(0.0)), !marked, "position {i}");
        }
    }

    #[test]
    fn embed_is_seed_independent_for_eigenstates() {
        let m = build_message(&parse_bits("01100101").unwrap(), basis(0.0)).unwrap();
        let a = embed(&m, &four_mark_secret(), &mut RandomSource::seeded(1)).unwrap();
        let b = embed(&m, &four_mark_secret(), &mut RandomSource::seeded(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn embed_errors() {
        let m = build_message(&[false; 4], basis(0.0)).unwrap();
        let far = WatermarkSecret::new(vec![4], basis(45.0), None).unwrap();
        assert_eq!(
            embed(&m, &far, &mut RandomSource::seeded(0)),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        );
        let same = WatermarkSecret::new(vec![1], basis(90.0), None).unwrap();
        assert!(matches!(
            embed(&m, &same, &mut RandomSource::seeded(0)),
            Err(Error::BasisNotDissimilar { .. })
        ));
    }

    #[test]
    fn strict_policy_enforces_statistical_bound() {
        let m = build_message(&[false; 16], basis(0.0)).unwrap();
        let small = WatermarkSecret::new(vec![0, 1, 2, 3], basis(45.0), None).unwrap();
        let strict = EmbedPolicy { strict: true };
        assert_eq!(
            embed_with(&m, &small, &mut RandomSource::seeded(0), strict),
            Err(Error::InsufficientMarks { have: 4, need: 8 })
        );
        let enough = WatermarkSecret::new((0..8).collect(), basis(45.0), None).unwrap();
        assert!(embed_with(&m, &enough, &mut RandomSource::seeded(0), strict).is_ok());
        // Lenient default only warns.
        assert!(embed(&m, &small, &mut RandomSource::seeded(0)).is_ok());
    }

    #[test]
    fn observe_unwatermarked_is_identity() {
        let bits = parse_bits("1100101001").unwrap();
        let m = build_message(&bits, basis(30.0)).unwrap();
        for seed in 0..10 {
            let obs = observe(&m, basis(30.0), &mut RandomSource::seeded(seed));
            assert_eq!(obs.bits, bits);
        }
    }

    #[test]
    fn observe_draws_in_index_order() {
        let m = build_message(&parse_bits("0000").unwrap(), basis(0.0)).unwrap();
        let marked = embed(&m, &WatermarkSecret::new(vec![1, 3], basis(45.0), None).unwrap(), &mut RandomSource::seeded(0)).unwrap();
        // Positions 1 and 3 read the 2nd and 4th draws.
        let mut rng = FixedSequence::new(vec![0.9, 0.9, 0.1, 0.1]);
        let obs = observe(&marked, basis(0.0), &mut rng);
        assert_eq!(format_bits(&obs.bits), "0100");
        assert_eq!(rng.consumed(), 4);
    }

    #[test]
    fn verify_two_errors_in_four() {
        let reference = ObservedMessage::new(parse_bits("01100101").unwrap(), basis(0.0));
        // Errors at 3 and 6.
        let suspect = ObservedMessage::new(parse_bits("01110111").unwrap(), basis(0.0));
        let report = verify(&suspect, &reference, &four_mark_secret(), DecisionRule::fixed(0.25).unwrap()).unwrap();
        assert_eq!(report.error_count, 2);
        assert_eq!(report.sample_size, 4);
        assert_eq!(report.observed_frequency, 0.5);
        assert!((report.expected_pe - 0.5).abs() < 1e-12);
        assert_eq!(report.decision, Decision::Accept);
    }

    #[test]
    fn verify_unwatermarked_copy_rejects() {
        let reference = ObservedMessage::new(parse_bits("01100101").unwrap(), basis(0.0));
        let report = verify(&reference, &reference, &four_mark_secret(), DecisionRule::fixed(0.25).unwrap()).unwrap();
        assert_eq!(report.observed_frequency, 0.0);
        assert_eq!(report.decision, Decision::Reject);
    }

    #[test]
    fn verify_errors() {
        let a = ObservedMessage::new(vec![false; 8], basis(0.0));
        let short = ObservedMessage::new(vec![false; 7], basis(0.0));
        let other = ObservedMessage::new(vec![false; 8], basis(10.0));
        let rule = DecisionRule::default();
        assert_eq!(
            verify(&short, &a, &four_mark_secret(), rule),
            Err(Error::LengthMismatch { left: 7, right: 8 })
        );
        assert!(matches!(verify(&other, &a, &four_mark_secret(), rule), Err(Error::BasisMismatch { .. })));
        let far = WatermarkSecret::new(vec![8], basis(45.0), None).unwrap();
        assert!(matches!(verify(&a, &a, &far, rule), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn verify_symmetric_error_count() {
        let mut rng = RandomSource::seeded(9);
        let a: Vec<bool> = (0..64).map(|_| rng.next_uniform() < 0.5).collect();
        let b: Vec<bool> = (0..64).map(|_| rng.next_uniform() < 0.5).collect();
        let (a, b) = (ObservedMessage::new(a, basis(0.0)), ObservedMessage::new(b, basis(0.0)));
        let secret = WatermarkSecret::new((0..64).step_by(3).collect(), basis(45.0), None).unwrap();
        let rule = DecisionRule::default();
        assert_eq!(
            verify(&a, &b, &secret, rule).unwrap().error_count,
            verify(&b, &a, &secret, rule).unwrap().error_count
        );
    }

    #[test]
    fn classical_flip_extremes() {
        let bits = parse_bits("10110").unwrap();
        let mut rng = RandomSource::seeded(4);
        assert_eq!(classical_flip_embed(&bits, &[0, 2, 4], 0.0, &mut rng).unwrap(), bits);
        assert_eq!(
            format_bits(&classical_flip_embed(&bits, &[0, 2, 4], 1.0, &mut rng).unwrap()),
            "00011"
        );
        assert_eq!(
            classical_flip_embed(&bits, &[5], 0.5, &mut rng),
            Err(Error::IndexOutOfRange { index: 5, len: 5 })
        );
        assert_eq!(
            classical_flip_embed(&bits, &[0], 1.5, &mut rng),
            Err(Error::InvalidProbability(1.5))
        );
    }

    #[test]
    fn bit_string_helpers() {
        assert_eq!(parse_bits("01_10 1"), Some(vec![false, true, true, false, true]));
        assert_eq!(parse_bits("012"), None);
        assert_eq!(format_bits(&[true, false]), "10");
    }
}
