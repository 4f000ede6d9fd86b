//! Versioned JSON file formats for secrets, quantum messages and
//! observations.
//!
//! Angles are fixed-point decimal strings with six places. Observation bits
//! are packed MSB-first and base64-encoded, with the exact bit length stored
//! alongside. Encoders emit pretty-printed JSON with a trailing newline; a
//! file produced by an encoder decodes and re-encodes to identical bytes.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::carrier::{bits_to_bytes, bytes_to_bits};
use crate::qstate::{Basis, RebitState};
use crate::watermark::{ObservedMessage, QuantumMessage, WatermarkSecret};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported file version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Six-place fixed-point rendering of an angle already reduced to
/// `[0, period)`. Values that round up to `period` wrap to zero.
pub fn format_angle(angle: f64, period: f64) -> String {
    let s = format!("{angle:.6}");
    if s == format!("{period:.6}") {
        format!("{:.6}", 0.0)
    } else {
        s
    }
}

/// Parses a canonical angle string: it must re-render identically.
fn parse_angle(s: &str, period: f64, what: &str) -> Result<f64, FormatError> {
    let v: f64 = s
        .parse()
        .map_err(|_| invalid(format!("{what}: {s:?} is not a number")))?;
    if !(0.0..period).contains(&v) {
        return Err(invalid(format!("{what}: {s} outside [0, {period})")));
    }
    if format_angle(v, period) != s {
        return Err(invalid(format!("{what}: {s:?} is not six-place fixed point")));
    }
    Ok(v)
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version { found: v })
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file structs always serialize");
    s.push('\n');
    s
}

/// The watermark secret: `I`, `k`, the key it came from, and `p_e` for the
/// writing basis it was generated against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretFile {
    pub version: u32,
    pub message_len: usize,
    pub indices: Vec<usize>,
    pub mark_basis_theta: String,
    pub key: Option<String>,
    pub expected_pe: f64,
}

impl SecretFile {
    pub fn new(secret: &WatermarkSecret, message_len: usize, expected_pe: f64) -> Self {
        SecretFile {
            version: FORMAT_VERSION,
            message_len,
            indices: secret.indices().to_vec(),
            mark_basis_theta: format_angle(secret.mark_basis().theta(), 90.0),
            key: secret.key().map(|k| BASE64.encode(k)),
            expected_pe,
        }
    }

    pub fn decode(text: &str) -> Result<Self, FormatError> {
        let f: SecretFile = serde_json::from_str(text)?;
        check_version(f.version)?;
        f.to_secret()?;
        if !(0.0..=1.0).contains(&f.expected_pe) {
            return Err(invalid("expected_pe outside [0, 1]"));
        }
        Ok(f)
    }

    pub fn encode(&self) -> String {
        to_json(self)
    }

    pub fn to_secret(&self) -> Result<WatermarkSecret, FormatError> {
        let theta = parse_angle(&self.mark_basis_theta, 90.0, "mark_basis_theta")?;
        let key = self
            .key
            .as_deref()
            .map(|k| BASE64.decode(k).map_err(|e| invalid(format!("key: {e}"))))
            .transpose()?;
        if !self.indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("indices must be strictly increasing"));
        }
        if let Some(&last) = self.indices.last() {
            if last >= self.message_len {
                return Err(invalid(format!(
                    "index {last} out of range for message length {}",
                    self.message_len
                )));
            }
        }
        let basis = Basis::new(theta).map_err(|e| invalid(e.to_string()))?;
        WatermarkSecret::new(self.indices.clone(), basis, key).map_err(|e| invalid(e.to_string()))
    }
}

/// A message left in qubit form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumMessageFile {
    pub version: u32,
    pub writing_basis_theta: String,
    pub states: Vec<String>,
}

impl QuantumMessageFile {
    pub fn new(message: &QuantumMessage) -> Self {
        QuantumMessageFile {
            version: FORMAT_VERSION,
            writing_basis_theta: format_angle(message.writing_basis().theta(), 90.0),
            states: message
                .states()
                .iter()
                .map(|s| format_angle(s.phi(), 180.0))
                .collect(),
        }
    }

    pub fn decode(text: &str) -> Result<Self, FormatError> {
        let f: QuantumMessageFile = serde_json::from_str(text)?;
        check_version(f.version)?;
        f.to_message()?;
        Ok(f)
    }

    pub fn encode(&self) -> String {
        to_json(self)
    }

    pub fn to_message(&self) -> Result<QuantumMessage, FormatError> {
        let theta = parse_angle(&self.writing_basis_theta, 90.0, "writing_basis_theta")?;
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let phi = parse_angle(s, 180.0, &format!("states[{i}]"))?;
                RebitState::new(phi).map_err(|e| invalid(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let basis = Basis::new(theta).map_err(|e| invalid(e.to_string()))?;
        QuantumMessage::new(states, basis).map_err(|e| invalid(e.to_string()))
    }
}

/// A classical observation `M ∘ j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationFile {
    pub version: u32,
    pub observation_basis_theta: String,
    pub bit_len: usize,
    pub bits: String,
}

impl ObservationFile {
    pub fn new(obs: &ObservedMessage) -> Self {
        ObservationFile {
            version: FORMAT_VERSION,
            observation_basis_theta: format_angle(obs.basis().theta(), 90.0),
            bit_len: obs.len(),
            bits: BASE64.encode(bits_to_bytes(&obs.bits)),
        }
    }

    pub fn decode(text: &str) -> Result<Self, FormatError> {
        let f: ObservationFile = serde_json::from_str(text)?;
        check_version(f.version)?;
        f.to_observation()?;
        Ok(f)
    }

    pub fn encode(&self) -> String {
        to_json(self)
    }

    pub fn to_observation(&self) -> Result<ObservedMessage, FormatError> {
        let theta = parse_angle(&self.observation_basis_theta, 90.0, "observation_basis_theta")?;
        let bytes = BASE64
            .decode(&self.bits)
            .map_err(|e| invalid(format!("bits: {e}")))?;
        // bit_len <= 8·bytes < bit_len + 8
        if self.bit_len > bytes.len() * 8 || bytes.len() * 8 >= self.bit_len + 8 {
            return Err(invalid(format!(
                "bit_len {} inconsistent with {} payload bytes",
                self.bit_len,
                bytes.len()
            )));
        }
        let mut bits = bytes_to_bits(&bytes);
        if bits[self.bit_len..].iter().any(|&b| b) {
            return Err(invalid("nonzero padding bits"));
        }
        bits.truncate(self.bit_len);
        let basis = Basis::new(theta).map_err(|e| invalid(e.to_string()))?;
        Ok(ObservedMessage::new(bits, basis))
    }
}
