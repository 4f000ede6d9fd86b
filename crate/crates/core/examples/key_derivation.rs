//! Deriving the secret index set from a 256-bit key, optionally restricted
//! to an eligibility mask.

use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::RandomSource;

fn main() -> qumark::Result<()> {
    let mut rng = RandomSource::seeded(1);
    let key = SecretKey::generate(&mut rng);

    let params = DerivationParams::new(64, 8, None)?;
    println!("64 positions, 8 marks: {:?}", derive_indices(&key, &params)?);
    println!("same key again:        {:?}", derive_indices(&key, &params)?);

    let mut flipped = key.as_bytes().to_vec();
    flipped[0] ^= 1;
    let other = SecretKey::new(flipped)?;
    println!("one key bit flipped:   {:?}", derive_indices(&other, &params)?);

    // Only every eighth bit is eligible, as for the LSBs of 8-bit pixels.
    let mask: Vec<bool> = (0..64).map(|i| i % 8 == 7).collect();
    let params = DerivationParams::new(64, 4, Some(mask))?;
    println!("LSB-only, 4 marks:     {:?}", derive_indices(&key, &params)?);
    Ok(())
}
