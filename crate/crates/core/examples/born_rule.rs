//! Measuring rebits: the flip rate of a bit written in one basis and read
//! in another is sin² of the angle between the bases.
//!
//!     cargo run --example born_rule -- [trials]

use qumark::qstate::{encode_bit, expected_error_probability, measure, Basis, RandomSource};

fn main() -> qumark::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let reading = Basis::RECTILINEAR;
    let mut rng = RandomSource::seeded(2024);

    println!("{:>8} {:>10} {:>10}", "k (deg)", "sin^2", "measured");
    for k in [0.0, 15.0, 30.0, 45.0, 60.0, 75.0] {
        let writing = Basis::new(k)?;
        let state = encode_bit(false, writing);
        let flips = (0..trials).filter(|_| measure(state, reading, &mut rng)).count();
        println!(
            "{:>8} {:>10.5} {:>10.5}",
            k,
            expected_error_probability(writing, reading),
            flips as f64 / trials as f64
        );
    }
    Ok(())
}
