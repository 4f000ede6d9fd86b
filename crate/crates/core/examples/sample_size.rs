//! How many marks a watermark needs: the literal lower bound and the size
//! at which the exact binomial test separates p_e from an alternative rate
//! with the requested confidence and power.

use qumark::stats::{exact_test_power, min_sample_size_literal, recommended_sample_size, LnFactorial};

fn main() -> qumark::Result<()> {
    for pe in [0.5, 0.25, 0.1] {
        let s = min_sample_size_literal(pe)?;
        println!("p_e = {pe}: literal minimum a={} b={} n={}", s.a, s.b, s.n);
    }

    println!("\n{:>5} {:>6} {:>6} {:>6} {:>8} {:>8}", "p_e", "null", "conf", "power", "n", "achieved");
    for (pe, null) in [(0.5, 0.0), (0.5, 0.25), (0.5, 0.4), (0.5, 0.45), (0.25, 0.1), (0.25, 0.2)] {
        for (conf, power) in [(0.95, 0.9), (0.99, 0.99)] {
            match recommended_sample_size(pe, null, conf, power) {
                Ok(n) => println!(
                    "{pe:>5} {null:>6} {conf:>6} {power:>6} {n:>8} {:>8.4}",
                    exact_test_power(&LnFactorial::up_to(n), n, pe, null, 1.0 - conf)
                ),
                Err(e) => println!("{pe:>5} {null:>6} {conf:>6} {power:>6} {e}"),
            }
        }
    }
    Ok(())
}
