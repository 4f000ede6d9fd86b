//! Watermarking the least significant bits of a greyscale PGM image.
//!
//!     cargo run --example pgm_lsb_watermark -- [in.pgm] [out.pgm]
//!
//! Without arguments a 64x64 gradient is generated and nothing is written.

use std::fs;

use qumark::carrier::{emit, ingest_pgm, pgm_payload, CarrierPayload, ImageMeta};
use qumark::keys::{generate_secret, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource};
use qumark::stats::DecisionRule;
use qumark::watermark::{build_message, embed, observe, verify, ObservedMessage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let image = match args.first() {
        Some(path) => fs::read(path)?,
        None => {
            let meta = ImageMeta::new(64, 64)?;
            let pixels: Vec<u8> = (0..64 * 64).map(|i| ((i % 64) * 4 + i / 64) as u8).collect();
            emit(&pgm_payload(&pixels, &meta)?, Some(&meta))?
        }
    };
    let (payload, meta) = ingest_pgm(&image)?;
    println!("{}x{} image, {} eligible bits", meta.width, meta.height, meta.pixel_count());

    let mut rng = RandomSource::seeded(5);
    let count = meta.pixel_count() / 4;
    let params = DerivationParams::new(payload.bits.len(), count, Some(payload.eligibility_mask.clone()))?;
    let secret = generate_secret(&SecretKey::generate(&mut rng), &params, Basis::DIAGONAL)?;

    let message = build_message(&payload.bits, Basis::RECTILINEAR)?;
    let released = observe(&embed(&message, &secret, &mut rng)?, Basis::RECTILINEAR, &mut rng);
    let marked = CarrierPayload { bits: released.bits.clone(), ..payload.clone() };
    let out = emit(&marked, Some(&meta))?;

    let header = image.len() - meta.pixel_count();
    let changed = image[header..].iter().zip(&out[header..]).filter(|(a, b)| a != b).count();
    let worst = image[header..]
        .iter()
        .zip(&out[header..])
        .map(|(a, b)| a.abs_diff(*b))
        .max()
        .unwrap_or(0);
    println!("{count} marked pixels, {changed} changed, max change {worst}");

    let reference = ObservedMessage::new(payload.bits, Basis::RECTILINEAR);
    let report = verify(&released, &reference, &secret, DecisionRule::default())?;
    println!(
        "verification: {} errors in {} ({:.4}) -> {}",
        report.error_count, report.sample_size, report.observed_frequency, report.decision
    );

    if let Some(path) = args.get(1) {
        fs::write(path, &out)?;
        println!("wrote {path}");
    }
    Ok(())
}
