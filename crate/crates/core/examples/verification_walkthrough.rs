//! Verifying a suspect copy: count disagreements with the reference at the
//! secret positions and compare the rate with p_e under each decision rule.

use qumark::qstate::Basis;
use qumark::stats::DecisionRule;
use qumark::watermark::{parse_bits, verify, ObservedMessage, WatermarkSecret};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let secret = WatermarkSecret::new(vec![2, 3, 4, 6], Basis::DIAGONAL, None)?;
    let reference = ObservedMessage::new(parse_bits("01100101").unwrap(), Basis::RECTILINEAR);
    let suspect = ObservedMessage::new(parse_bits("01110111").unwrap(), Basis::RECTILINEAR);

    for rule in ["fixed:0.25", "wilson:0.99", "binom:0.99"] {
        let rule: DecisionRule = rule.parse()?;
        let r = verify(&suspect, &reference, &secret, rule)?;
        println!(
            "{rule:<12} errors {}/{}  frequency {}  p_e {}  -> {}",
            r.error_count, r.sample_size, r.observed_frequency, r.expected_pe, r.decision
        );
    }

    // An unaltered copy of the reference shows no errors at all.
    let r = verify(&reference, &reference, &secret, "fixed:0.25".parse()?)?;
    println!("\nclean copy   errors {}/{} -> {}", r.error_count, r.sample_size, r.decision);
    Ok(())
}
