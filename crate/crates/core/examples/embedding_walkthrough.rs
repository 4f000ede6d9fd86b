//! Embedding a watermark into an 8-bit message at positions {2, 3, 4, 6}.
//! Positions in the index set are measured in the writing basis and
//! re-encoded in the diagonal basis; every other qubit is left alone.

use qumark::qstate::{Basis, RandomSource};
use qumark::watermark::{build_message, embed, format_bits, observe, parse_bits, WatermarkSecret};

fn main() -> qumark::Result<()> {
    let plaintext = parse_bits("01100101").expect("literal bitstring");
    let secret = WatermarkSecret::new(vec![2, 3, 4, 6], Basis::DIAGONAL, None)?;
    let message = build_message(&plaintext, Basis::RECTILINEAR)?;
    let mut rng = RandomSource::seeded(7);

    let marked = embed(&message, &secret, &mut rng)?;
    println!("pos  before   after");
    for (i, (a, b)) in message.states().iter().zip(marked.states()).enumerate() {
        let tag = if secret.indices().contains(&i) { "*" } else { " " };
        println!("{i}{tag}  {:>7.1}  {:>6.1}", a.phi(), b.phi());
    }

    println!("\nplaintext   {}", format_bits(&plaintext));
    for copy in 1..=4 {
        let obs = observe(&marked, Basis::RECTILINEAR, &mut rng);
        println!("release #{copy}  {}", format_bits(&obs.bits));
    }
    Ok(())
}
