#![allow(dead_code)]

use qumark::keys::{derive_indices, DerivationParams, SecretKey};
use qumark::qstate::{Basis, RandomSource, UniformSource};
use qumark::watermark::{build_message, embed, observe, ObservedMessage, WatermarkSecret};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn basis(theta: f64) -> Basis {
    Basis::new(theta).unwrap()
}

/// I.i.d. fair bits.
pub fn random_bits(n: usize, rng: &mut RandomSource) -> Vec<bool> {
    (0..n).map(|_| rng.next_uniform() < 0.5).collect()
}

/// Balanced two-state Markov bitstream: each bit repeats its predecessor
/// except with probability `switch`. Models carriers whose neighbouring bits
/// are correlated (runs of mean length `1/switch`).
pub fn structured_bits(n: usize, switch: f64, rng: &mut RandomSource) -> Vec<bool> {
    let mut bits = Vec::with_capacity(n);
    let mut cur = rng.next_uniform() < 0.5;
    for _ in 0..n {
        bits.push(cur);
        if rng.next_uniform() < switch {
            cur = !cur;
        }
    }
    bits
}

/// A key-derived secret of `count` positions out of `len`.
pub fn keyed_secret(len: usize, count: usize, mark: Basis, rng: &mut RandomSource) -> WatermarkSecret {
    let key = SecretKey::generate(rng);
    let params = DerivationParams::new(len, count, None).unwrap();
    WatermarkSecret::new(derive_indices(&key, &params).unwrap(), mark, None).unwrap()
}

/// Embeds `secret` into `plaintext` written in `writing` and observes the
/// result in `writing`: one released, pre-observed copy.
pub fn released_copy(
    plaintext: &[bool],
    writing: Basis,
    secret: &WatermarkSecret,
    rng: &mut RandomSource,
) -> ObservedMessage {
    let m = build_message(plaintext, writing).unwrap();
    let marked = embed(&m, secret, rng).unwrap();
    observe(&marked, writing, rng)
}

pub fn flips_at(a: &[bool], b: &[bool], indices: &[usize]) -> usize {
    indices.iter().filter(|&&i| a[i] != b[i]).count()
}

pub fn binomial_pmf(k: usize, n: usize, p: f64) -> f64 {
    use statrs::distribution::{Binomial, Discrete};
    Binomial::new(p, n as u64).unwrap().pmf(k as u64)
}

/// Merges adjacent bins until each merged bin satisfies `ok`.
fn merge_bins<T: Copy>(bins: &[T], ok: impl Fn(&[T]) -> bool) -> Vec<Vec<T>> {
    let mut groups: Vec<Vec<T>> = Vec::new();
    let mut cur = Vec::new();
    for &b in bins {
        cur.push(b);
        if ok(&cur) {
            groups.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(cur),
            None => groups.push(cur),
        }
    }
    groups
}

/// Pearson goodness-of-fit p-value of `observed` counts against `probs`.
/// Bins are merged until each expects at least 5 counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let pairs: Vec<(u64, f64)> = observed.iter().copied().zip(probs.iter().copied()).collect();
    let groups = merge_bins(&pairs, |g| g.iter().map(|p| p.1).sum::<f64>() * total as f64 >= 5.0);
    let stat: f64 = groups
        .iter()
        .map(|g| {
            let o: u64 = g.iter().map(|p| p.0).sum();
            let e = g.iter().map(|p| p.1).sum::<f64>() * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = groups.len() - 1;
    if df == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// Two-sample chi-square p-value for histograms with equal totals.
/// Bins are merged until each holds at least 10 combined counts.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> f64 {
    let len = a.len().max(b.len());
    let pairs: Vec<(u64, u64)> = (0..len)
        .map(|i| (a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0)))
        .collect();
    let groups = merge_bins(&pairs, |g| g.iter().map(|p| p.0 + p.1).sum::<u64>() >= 10);
    let stat: f64 = groups
        .iter()
        .map(|g| {
            let x: u64 = g.iter().map(|p| p.0).sum();
            let y: u64 = g.iter().map(|p| p.1).sum();
            if x + y == 0 {
                0.0
            } else {
                (x as f64 - y as f64).powi(2) / (x + y) as f64
            }
        })
        .sum();
    let df = groups.len() - 1;
    if df == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

pub fn histogram(values: impl IntoIterator<Item = usize>, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for v in values {
        h[v] += 1;
    }
    h
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares `actual` with the frozen file `tests/golden/<name>`.
/// With `QUMARK_BLESS=1` the file is (re)written instead.
pub fn check_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("QUMARK_BLESS").is_some() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != actual {
        return Err(format!(
            "{} differs:\n--- expected\n{}\n--- actual\n{}",
            name,
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(actual)
        ));
    }
    Ok(())
}

/// Runs the CLI in-process. Returns (exit code, stdout, stderr).
pub fn qumark(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = qumark::cli::run(
        std::iter::once("qumark").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Writes the two-error scenario files into `dir`: reference 01100101,
/// suspect 01110111, I = {2, 3, 4, 6}, k = 45 degrees.
pub fn write_two_error_case(dir: &std::path::Path) {
    use qumark::cli::formats::{ObservationFile, SecretFile};
    use qumark::watermark::parse_bits;
    let secret = WatermarkSecret::new(vec![2, 3, 4, 6], basis(45.0), None).unwrap();
    let obs = |s: &str| ObservedMessage::new(parse_bits(s).unwrap(), basis(0.0));
    std::fs::write(dir.join("secret.json"), SecretFile::new(&secret, 8, 0.5).encode()).unwrap();
    std::fs::write(dir.join("reference.json"), ObservationFile::new(&obs("01100101")).encode()).unwrap();
    std::fs::write(dir.join("suspect.json"), ObservationFile::new(&obs("01110111")).encode()).unwrap();
}
