//! Decision theory for fuzzy verification.
//!
//! The verification statistic is the relative frequency of disagreement at
//! the watermark positions. Whether that frequency is "close enough" to the
//! expected flip probability is settled by a [`DecisionRule`]:
//!
//! * `fixed:EPS`  accept iff `|f - pe| <= EPS`;
//! * `wilson:C`   accept iff `pe` lies in the Wilson score interval at confidence `C`;
//! * `binom:C`    two-sided exact binomial test of `p = pe`, accept iff `p-value > 1 - C`.
//!
//! Binomial probabilities are evaluated from a table of `ln k!` built by
//! compensated summation, which stays accurate up to `n = 100_000` and beyond.

use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest sample size [`recommended_sample_size`] will consider.
pub const MAX_RECOMMENDED_SAMPLE: usize = 100_000;

/// Relative tolerance used to treat two binomial probabilities as tied when
/// summing the two-sided p-value (the convention of R's `binom.test`).
const TIE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
        })
    }
}

/// How "very nearly the expected probability" is decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    FixedTolerance { tolerance: f64 },
    WilsonInterval { confidence: f64 },
    ExactBinomial { confidence: f64 },
}

fn open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl DecisionRule {
    pub fn fixed(tolerance: f64) -> Result<Self> {
        Ok(DecisionRule::FixedTolerance {
            tolerance: open_unit("tolerance", tolerance)?,
        })
    }

    pub fn wilson(confidence: f64) -> Result<Self> {
        Ok(DecisionRule::WilsonInterval {
            confidence: open_unit("confidence", confidence)?,
        })
    }

    pub fn exact_binomial(confidence: f64) -> Result<Self> {
        Ok(DecisionRule::ExactBinomial {
            confidence: open_unit("confidence", confidence)?,
        })
    }
}

impl Default for DecisionRule {
    fn default() -> Self {
        DecisionRule::WilsonInterval { confidence: 0.99 }
    }
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionRule::FixedTolerance { tolerance } => write!(f, "fixed:{tolerance}"),
            DecisionRule::WilsonInterval { confidence } => write!(f, "wilson:{confidence}"),
            DecisionRule::ExactBinomial { confidence } => write!(f, "binom:{confidence}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid decision rule {0:?}; expected fixed:EPS, wilson:CONF or binom:CONF")]
pub struct ParseRuleError(String);

impl FromStr for DecisionRule {
    type Err = ParseRuleError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = || ParseRuleError(s.to_string());
        let (kind, value) = s.split_once(':').ok_or_else(err)?;
        let value: f64 = value.trim().parse().map_err(|_| err())?;
        match kind.trim() {
            "fixed" => DecisionRule::fixed(value),
            "wilson" => DecisionRule::wilson(value),
            "binom" | "binomial" => DecisionRule::exact_binomial(value),
            _ => return Err(err()),
        }
        .map_err(|_| err())
    }
}

/// Result of applying a [`DecisionRule`].
///
/// `bound_low..=bound_high` is the tolerance band around `pe` for the fixed
/// rule, the Wilson interval for the Wilson rule, and the range of
/// frequencies the exact test would accept for the binomial rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionOutcome {
    pub decision: Decision,
    pub statistic: f64,
    pub bound_low: f64,
    pub bound_high: f64,
    pub p_value: Option<f64>,
}

/// `errors / total`.
pub fn relative_frequency(errors: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    if errors > total {
        return Err(Error::CountExceedsTotal { errors, total });
    }
    Ok(errors as f64 / total as f64)
}

fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Applies `rule` to `errors` disagreements out of `total` watermark bits.
pub fn decide(
    errors: usize,
    total: usize,
    expected_pe: f64,
    rule: DecisionRule,
) -> Result<DecisionOutcome> {
    let statistic = relative_frequency(errors, total)?;
    let pe = check_probability(expected_pe)?;
    let outcome = match rule {
        DecisionRule::FixedTolerance { tolerance } => {
            let accept = (statistic - pe).abs() <= tolerance;
            DecisionOutcome {
                decision: verdict(accept),
                statistic,
                bound_low: (pe - tolerance).max(0.0),
                bound_high: (pe + tolerance).min(1.0),
                p_value: None,
            }
        }
        DecisionRule::WilsonInterval { confidence } => {
            let (lo, hi) = wilson_interval(errors, total, confidence)?;
            DecisionOutcome {
                decision: verdict(lo <= pe && pe <= hi),
                statistic,
                bound_low: lo,
                bound_high: hi,
                p_value: None,
            }
        }
        DecisionRule::ExactBinomial { confidence } => {
            let alpha = 1.0 - confidence;
            let table = LnFactorial::up_to(total);
            let p_value = binomial_two_sided_p_value(&table, errors, total, pe);
            let (a, b) = acceptance_region(&table, total, pe, alpha);
            DecisionOutcome {
                decision: verdict(p_value > alpha),
                statistic,
                bound_low: a as f64 / total as f64,
                bound_high: b as f64 / total as f64,
                p_value: Some(p_value),
            }
        }
    };
    Ok(outcome)
}

fn verdict(accept: bool) -> Decision {
    if accept {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// Two-sided standard normal quantile for `confidence`.
pub fn z_for_confidence(confidence: f64) -> Result<f64> {
    let c = open_unit("confidence", confidence)?;
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - c) / 2.0))
}

/// Wilson score interval for `errors` successes out of `total`.
pub fn wilson_interval(errors: usize, total: usize, confidence: f64) -> Result<(f64, f64)> {
    let p_hat = relative_frequency(errors, total)?;
    let z = z_for_confidence(confidence)?;
    let n = total as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    // Rounding must not push the interval off the point estimate.
    Ok((lo.min(p_hat), hi.max(p_hat)))
}

/// Table of `ln k!` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn up_to(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        // Neumaier summation keeps the accumulated error near one ulp.
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=n {
            let x = (k as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        LnFactorial { table }
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.table[k]
    }

    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `P(X = k)` for `X ~ Binomial(n, p)`.
    pub fn binomial_pmf(&self, k: usize, n: usize, p: f64) -> f64 {
        if k > n {
            return 0.0;
        }
        if p == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if p == 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        let ln = self.ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
        ln.exp()
    }
}

/// Two-sided exact binomial p-value of observing `x` under `p0`: the total
/// probability of outcomes no more likely than `x`.
pub fn binomial_two_sided_p_value(table: &LnFactorial, x: usize, n: usize, p0: f64) -> f64 {
    let dx = table.binomial_pmf(x, n, p0);
    let limit = dx * (1.0 + TIE_TOLERANCE);
    let p: f64 = (0..=n)
        .map(|k| table.binomial_pmf(k, n, p0))
        .filter(|&d| d <= limit)
        .sum();
    p.min(1.0)
}

/// Range `[a, b]` of counts the two-sided exact test at level `alpha`
/// accepts (p-value > alpha) for `n` trials under `p0`.
///
/// Walks outward from the mode in decreasing-probability order; the first
/// count whose p-value drops to `alpha` or below ends the walk.
pub fn acceptance_region(table: &LnFactorial, n: usize, p0: f64, alpha: f64) -> (usize, usize) {
    if p0 == 0.0 {
        return (0, 0);
    }
    if p0 == 1.0 {
        return (n, n);
    }
    let mode = (((n + 1) as f64 * p0).floor() as usize).min(n);
    let pmf = |k: usize| table.binomial_pmf(k, n, p0);

    let mut taken: Vec<f64> = vec![pmf(mode)];
    let mut total = taken[0];
    let (mut lo, mut hi) = (mode, mode);
    loop {
        let left = lo.checked_sub(1).map(|k| (k, pmf(k)));
        let right = (hi < n).then(|| (hi + 1, pmf(hi + 1)));
        let (k, d) = match (left, right) {
            (None, None) => break,
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (Some(l), Some(r)) => {
                if l.1 >= r.1 {
                    l
                } else {
                    r
                }
            }
        };
        // Mass of already-taken outcomes strictly more likely than k.
        let limit = d * (1.0 + TIE_TOLERANCE);
        let mut greater = total;
        for &t in taken.iter().rev() {
            if t <= limit {
                greater -= t;
            } else {
                break;
            }
        }
        let p_value = 1.0 - greater;
        if p_value <= alpha {
            break;
        }
        taken.push(d);
        total += d;
        if k < lo {
            lo = k;
        } else {
            hi = k;
        }
    }
    (lo, hi)
}

/// `n = a + b` with `a/(a+b) >= pe`, as stated literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSizeSpec {
    pub a: usize,
    pub b: usize,
    pub n: usize,
}

/// Smallest `n = a + b >= 1` with `a/(a+b) >= pe`, ties broken by the
/// smallest `a`.
///
/// Taken literally this bound is `n = 1` for every `pe` (one error out of
/// one bit always meets it), so it is no guide to a usable `|I|`; see
/// [`recommended_sample_size`].
pub fn min_sample_size_literal(pe: f64) -> Result<SampleSizeSpec> {
    let pe = check_probability(pe)?;
    let mut n = 1usize;
    loop {
        for a in 0..=n {
            if a as f64 / n as f64 >= pe {
                return Ok(SampleSizeSpec { a, b: n - a, n });
            }
        }
        n += 1;
    }
}

/// Power of the exact test of `H0: p = pe` at level `alpha` with `n` trials
/// against a true rate of `null_rate`.
pub fn exact_test_power(
    table: &LnFactorial,
    n: usize,
    pe: f64,
    null_rate: f64,
    alpha: f64,
) -> f64 {
    let (a, b) = acceptance_region(table, n, pe, alpha);
    let accepted: f64 = (a..=b).map(|k| table.binomial_pmf(k, n, null_rate)).sum();
    (1.0 - accepted).clamp(0.0, 1.0)
}

/// Smallest `|I|` at which the exact binomial test of `p = pe` at the given
/// confidence rejects a copy whose true disagreement rate is `null_rate`
/// with probability at least `power`.
///
/// The search is exhaustive over `n`, except that it starts at half the
/// normal-approximation estimate when that estimate is large; power there is
/// far below any target in `(0, 1)` worth asking for.
pub fn recommended_sample_size(
    pe: f64,
    null_rate: f64,
    confidence: f64,
    power: f64,
) -> Result<usize> {
    let pe = open_unit("pe", pe)?;
    if !(0.0..1.0).contains(&null_rate) {
        return Err(Error::InvalidParameter {
            name: "null_rate",
            value: null_rate,
        });
    }
    let confidence = open_unit("confidence", confidence)?;
    let power = open_unit("power", power)?;
    if pe == null_rate {
        return Err(Error::RatesEqual(pe));
    }
    let alpha = 1.0 - confidence;

    let normal = Normal::standard();
    let z_a = normal.inverse_cdf(1.0 - alpha / 2.0);
    let z_b = normal.inverse_cdf(power);
    let delta = (pe - null_rate).abs();
    let spread = z_a * (pe * (1.0 - pe)).sqrt() + z_b * (null_rate * (1.0 - null_rate)).sqrt();
    let estimate = (spread / delta).powi(2);
    if estimate > 2.0 * MAX_RECOMMENDED_SAMPLE as f64 {
        return Err(Error::Unachievable {
            limit: MAX_RECOMMENDED_SAMPLE,
        });
    }
    let start = if estimate > 1_000.0 {
        (estimate * 0.5) as usize
    } else {
        1
    };

    let table = LnFactorial::up_to(MAX_RECOMMENDED_SAMPLE);
    (start..=MAX_RECOMMENDED_SAMPLE)
        .find(|&n| exact_test_power(&table, n, pe, null_rate, alpha) >= power)
        .ok_or(Error::Unachievable {
            limit: MAX_RECOMMENDED_SAMPLE,
        })
}
