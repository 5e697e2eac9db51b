//! Mutual information between the message bit and what Alice (`C`) or Eve
//! (`E`) accumulates over a run, in bits.
//!
//! Every quantity here is an average over `k`, the number of
//! bit-announcements, which is binomial in `N` and `p_a`. Within a fixed `k`
//! the information reduces to a binary-symmetric channel used `x` times:
//! the likelihood ratio between `b = 0` and `b = 1` depends only on how many
//! observations favour each value.

use serde::Serialize;

use crate::eavesdropper::{discrimination_table, event_probabilities};
use crate::error::{check_probability, check_strength, Error, Result};
use crate::qubit::{Basis, Bit, Outcome, Preparation};

/// Cumulative `Pr(k)` mass after which the outer sum may stop.
pub const TRUNCATION_MASS: f64 = 1e-9;

/// Shot counts at or below this are always summed in full.
pub const FULL_SUM_MAX_SHOTS: usize = 100;

/// Largest `k` evaluated with the explicit multinomial sum.
pub const MULTINOMIAL_MAX_K: usize = 64;

/// Upper limit on the number of strings [`brute_force_mi`] will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e7;

const DIST_TOL: f64 = 1e-12;

/// A single-shot observation model: each event with its probability given
/// `b = 0` and given `b = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventDistribution {
    events: Vec<(String, f64, f64)>,
}

impl EventDistribution {
    pub fn new(events: Vec<(String, f64, f64)>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidDistribution("no events".into()));
        }
        let (mut s0, mut s1) = (0.0, 0.0);
        for (label, p0, p1) in &events {
            if !(*p0 >= 0.0 && *p1 >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "event `{label}` has a negative probability"
                )));
            }
            s0 += p0;
            s1 += p1;
        }
        for (b, s) in [(0, s0), (1, s1)] {
            if (s - 1.0).abs() > DIST_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "probabilities given b={b} sum to {s}"
                )));
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[(String, f64, f64)] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn given(&self, b: Bit) -> Vec<f64> {
        self.events
            .iter()
            .map(|(_, p0, p1)| if b == Bit::Zero { *p0 } else { *p1 })
            .collect()
    }

    /// Bob's view of one bit-announcement shot: the sixteen compound events
    /// `(ρ_i, σ_l, a)` when Alice's apparatus mismatches with probability `D`.
    pub fn bob_compound_events(mismatch: f64) -> Result<Self> {
        check_strength(mismatch)?;
        let mut events = Vec::with_capacity(16);
        for prep in Preparation::ALL {
            for basis in Basis::ALL {
                for a in [Bit::Zero, Bit::One] {
                    let prob = |b: Bit| {
                        if prep.matches(basis) {
                            // Alice's m agrees with the ideal outcome with probability 1 − D
                            let m_if_ideal = a.xor(b) == prep.ideal_outcome().as_bit();
                            let pm = if m_if_ideal { 1.0 - mismatch } else { mismatch };
                            pm / 8.0
                        } else {
                            1.0 / 16.0
                        }
                    };
                    events.push((
                        format!("{prep},{basis},a={a}"),
                        prob(Bit::Zero),
                        prob(Bit::One),
                    ));
                }
            }
        }
        Self::new(events)
    }

    /// Eve's view of one bit-announcement shot: `(σ_l, a, E_i)` after her
    /// basis-matched measurement, for an attack of strength `d`.
    pub fn eve_compound_events(d: f64) -> Result<Self> {
        let table = discrimination_table(d)?;
        let mut events = Vec::with_capacity(16);
        for basis in Basis::ALL {
            for a in [Bit::Zero, Bit::One] {
                for (i, row) in table.iter().enumerate() {
                    // m = +1 leaves the probe in the Γ1 image, m = −1 in the Γ0 image
                    let prob = |b: Bit| {
                        let m = if a.xor(b) == Bit::Zero { Outcome::Plus } else { Outcome::Minus };
                        let col = if m == Outcome::Plus { 1 } else { 0 };
                        row[col] / 4.0
                    };
                    events.push((
                        format!("{basis},a={a},E{}", i + 1),
                        prob(Bit::Zero),
                        prob(Bit::One),
                    ));
                }
            }
        }
        Self::new(events)
    }

    /// The four event classes with probabilities `p1..p4` (and their swap
    /// under `b = 1`).
    pub fn eve_event_sets(d: f64) -> Result<Self> {
        let p = event_probabilities(d)?;
        let (g0, g1) = (p.given(Bit::Zero), p.given(Bit::One));
        Self::new(
            (0..4)
                .map(|i| (format!("S{}", i + 1), g0[i], g1[i]))
                .collect(),
        )
    }

    /// Mixes in an outcome carrying no information: with probability
    /// `1 − weight` the shot produces `label` regardless of `b`.
    pub fn with_uninformative(&self, weight: f64, label: &str) -> Result<Self> {
        check_probability("weight", weight)?;
        let mut events: Vec<_> = self
            .events
            .iter()
            .map(|(l, p0, p1)| (l.clone(), p0 * weight, p1 * weight))
            .collect();
        events.push((label.to_string(), 1.0 - weight, 1.0 - weight));
        Self::new(events)
    }
}

/// A mutual information value with the bookkeeping of its outer sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiResult {
    /// Bits.
    pub value: f64,
    pub terms_evaluated: usize,
    /// `Pr(k)` mass of the terms that were skipped.
    pub truncation_mass: f64,
}

/// `ln n!` for `n ≤ max`.
#[derive(Debug, Clone)]
pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub(crate) fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for i in 1..=max {
            acc += (i as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    pub(crate) fn get(&self, n: usize) -> f64 {
        self.0[n]
    }

    pub(crate) fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// `k·ln p` with `0·ln 0 = 0`.
fn xlnp(k: usize, p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * p.ln()
    }
}

/// `½[P0 log₂(P0/P̄) + P1 log₂(P1/P̄)]` for `P̄ = (P0 + P1)/2`, from logs.
fn pair_term(ln_p0: f64, ln_p1: f64) -> f64 {
    let half = |ln_a: f64, ln_b: f64| {
        let a = ln_a.exp();
        if a == 0.0 {
            return 0.0;
        }
        let r = (ln_b - ln_a).exp();
        a * (2.0 / (1.0 + r)).log2()
    };
    0.5 * (half(ln_p0, ln_p1) + half(ln_p1, ln_p0))
}

fn ln_binomial_pmf(table: &LnFactorial, n: usize, k: usize, p: f64) -> f64 {
    table.ln_choose(n, k) + xlnp(k, p) + xlnp(n - k, 1.0 - p)
}

/// `Pr(k)`: probability of exactly `k` bit-announcements in `n` shots.
pub fn prob_k(n: usize, p_announce: f64, k: usize) -> Result<f64> {
    check_probability("p_announce", p_announce)?;
    if k > n {
        return Err(Error::InvalidCount { k, n });
    }
    let table = LnFactorial::new(n);
    Ok(ln_binomial_pmf(&table, n, k, p_announce).exp())
}

/// Information about a uniform bit carried by `x` independent copies of a
/// binary symmetric channel with flip probability `q`.
pub fn binary_symmetric_mi(x: usize, q: f64) -> f64 {
    binary_symmetric_mi_with(&LnFactorial::new(x), x, q)
}

fn binary_symmetric_mi_with(table: &LnFactorial, x: usize, q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    let (lq, lp) = (q, 1.0 - q);
    let mut total = 0.0;
    for j in 0..=x {
        let c = table.ln_choose(x, j);
        let ln_a = c + xlnp(j, lq) + xlnp(x - j, lp);
        let ln_b = c + xlnp(x - j, lq) + xlnp(j, lp);
        total += pair_term(ln_a, ln_b);
    }
    total.clamp(0.0, 1.0)
}

/// Pr(k) weights in the order they are summed, plus the skipped mass.
fn outer_weights(n: usize, p_announce: f64, table: &LnFactorial) -> (Vec<(usize, f64)>, f64) {
    let pmf: Vec<f64> = (0..=n)
        .map(|k| ln_binomial_pmf(table, n, k, p_announce).exp())
        .collect();
    if n <= FULL_SUM_MAX_SHOTS {
        return (pmf.into_iter().enumerate().collect(), 0.0);
    }
    // grow outwards from the mode, heaviest neighbour first
    let mode = pmf
        .iter()
        .enumerate()
        .fold(0, |best, (k, &p)| if p > pmf[best] { k } else { best });
    let mut chosen = vec![(mode, pmf[mode])];
    let mut mass = pmf[mode];
    let (mut lo, mut hi) = (mode, mode);
    while mass < 1.0 - TRUNCATION_MASS && (lo > 0 || hi < n) {
        let left = if lo > 0 { pmf[lo - 1] } else { -1.0 };
        let right = if hi < n { pmf[hi + 1] } else { -1.0 };
        let k = if right > left {
            hi += 1;
            hi
        } else {
            lo -= 1;
            lo
        };
        chosen.push((k, pmf[k]));
        mass += pmf[k];
    }
    chosen.sort_by_key(|&(k, _)| k);
    (chosen, (1.0 - mass).max(0.0))
}

/// `I(B:C)`: what Alice's announcements and Bob's private preparations
/// together reveal about `b`, for `n` shots, announcement probability
/// `p_announce` and apparatus mismatch probability `mismatch`.
pub fn mutual_info_bc(n: usize, p_announce: f64, mismatch: f64) -> Result<MiResult> {
    check_probability("p_announce", p_announce)?;
    check_strength(mismatch)?;
    let table = LnFactorial::new(n);
    let (weights, skipped) = outer_weights(n, p_announce, &table);
    let mut cache: Vec<Option<f64>> = vec![None; n + 1];
    let mut bsc = |x: usize| *cache[x].get_or_insert_with(|| binary_symmetric_mi_with(&table, x, mismatch));
    let mut value = 0.0;
    for &(k, pk) in &weights {
        if pk == 0.0 {
            continue;
        }
        // x of the k bit-announcements have a matching basis
        let mut inner = 0.0;
        for x in 0..=k {
            let px = (table.ln_choose(k, x) - k as f64 * std::f64::consts::LN_2).exp();
            if px > 0.0 {
                inner += px * bsc(x);
            }
        }
        value += pk * inner;
    }
    Ok(MiResult {
        value: value.clamp(0.0, 1.0),
        terms_evaluated: weights.len(),
        truncation_mass: skipped,
    })
}

/// `I_k(B:E[d])` by the explicit sum over event-class counts `(k1, k2, k3, k4)`.
pub fn mutual_info_be_k_multinomial(k: usize, d: f64) -> Result<f64> {
    let p = event_probabilities(d)?;
    let table = LnFactorial::new(k);
    let lp = [p.p1, p.p2, p.p3, p.p4];
    let mut total = 0.0;
    for k1 in 0..=k {
        for k2 in 0..=(k - k1) {
            for k3 in 0..=(k - k1 - k2) {
                let k4 = k - k1 - k2 - k3;
                let coeff = table.get(k) - table.get(k1) - table.get(k2) - table.get(k3) - table.get(k4);
                let ln_p0 = coeff + xlnp(k1, lp[0]) + xlnp(k2, lp[1]) + xlnp(k3, lp[2]) + xlnp(k4, lp[3]);
                let ln_p1 = coeff + xlnp(k1, lp[1]) + xlnp(k2, lp[0]) + xlnp(k3, lp[3]) + xlnp(k4, lp[2]);
                total += pair_term(ln_p0, ln_p1);
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `sin²γ = (1 − 2√(d(1−d)))/2`, without the rounding of squaring a root.
fn eve_flip(d: f64) -> Result<f64> {
    check_strength(d)?;
    Ok(0.5 * (1.0 - 2.0 * (d * (1.0 - d)).sqrt()).max(0.0))
}

/// `I_k(B:E[d])` through its sufficient statistic: S1 and S3 each favour
/// the other bit value by the same factor `sin²γ : cos²γ`, so only the number
/// of S1 ∪ S3 events matters.
pub fn mutual_info_be_k_reduced(k: usize, d: f64) -> Result<f64> {
    Ok(binary_symmetric_mi(k, eve_flip(d)?))
}

/// `I_k(B:E[d])`, what Eve learns about `b` from `k` bit-announcements.
pub fn mutual_info_be_k(k: usize, d: f64) -> Result<f64> {
    if k <= MULTINOMIAL_MAX_K {
        mutual_info_be_k_multinomial(k, d)
    } else {
        mutual_info_be_k_reduced(k, d)
    }
}

/// `I(B:E[d]) = Σ_k Pr(k) I_k(B:E[d])`.
pub fn mutual_info_be(n: usize, p_announce: f64, d: f64) -> Result<MiResult> {
    check_probability("p_announce", p_announce)?;
    let q = eve_flip(d)?;
    let table = LnFactorial::new(n);
    let (weights, skipped) = outer_weights(n, p_announce, &table);
    let mut value = 0.0;
    for &(k, pk) in &weights {
        if pk == 0.0 {
            continue;
        }
        let ik = if k <= MULTINOMIAL_MAX_K {
            mutual_info_be_k_multinomial(k, d)?
        } else {
            binary_symmetric_mi_with(&table, k, q)
        };
        value += pk * ik;
    }
    Ok(MiResult {
        value: value.clamp(0.0, 1.0),
        terms_evaluated: weights.len(),
        truncation_mass: skipped,
    })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Eve's best information per bit-announcement at disturbance `d`:
/// `½[(1+2√(d(1−d)))log₂(1+2√(d(1−d))) + (1−2√(d(1−d)))log₂(1−2√(d(1−d)))]`.
pub fn fuchs_bound(d: f64) -> Result<f64> {
    check_strength(d)?;
    Ok(bound_from_radical(2.0 * (d * (1.0 - d)).sqrt()).clamp(0.0, 1.0))
}

/// The same expression with `√(d(1+d))` under the radical.
///
/// Fails with [`Error::InvalidDistribution`] once `1 − 2√(d(1+d))` turns
/// negative, which happens for `d > (√2 − 1)/2`.
pub fn fuchs_bound_alt(d: f64) -> Result<f64> {
    check_strength(d)?;
    let x = 2.0 * (d * (1.0 + d)).sqrt();
    if x > 1.0 {
        return Err(Error::InvalidDistribution(format!(
            "log argument 1 − 2√(d(1+d)) = {} is negative",
            1.0 - x
        )));
    }
    Ok(bound_from_radical(x))
}

fn bound_from_radical(x: f64) -> f64 {
    let t = |v: f64| if v <= 0.0 { 0.0 } else { v * v.log2() };
    0.5 * (t(1.0 + x) + t(1.0 - x))
}

/// Exact information carried by `k` independent draws from `dist`, by
/// enumerating every length-`k` event string.
pub fn brute_force_mi(dist: &EventDistribution, k: usize) -> Result<f64> {
    let m = dist.len();
    let strings = (m as f64).powi(k as i32);
    if strings > ENUMERATION_BUDGET {
        return Err(Error::TooLarge(strings));
    }
    let p0 = dist.given(Bit::Zero);
    let p1 = dist.given(Bit::One);
    let mut total = 0.0;
    // depth-first over prefixes, carrying the running products
    let mut stack = vec![(0usize, 1.0f64, 1.0f64)];
    while let Some((depth, a, b)) = stack.pop() {
        if depth == k {
            let mix = 0.5 * (a + b);
            if a > 0.0 {
                total += 0.5 * a * (a / mix).log2();
            }
            if b > 0.0 {
                total += 0.5 * b * (b / mix).log2();
            }
            continue;
        }
        for e in 0..m {
            let (na, nb) = (a * p0[e], b * p1[e]);
            if na > 0.0 || nb > 0.0 {
                stack.push((depth + 1, na, nb));
            }
        }
    }
    Ok(total.max(0.0))
}

/// Plug-in single-shot information from empirical event counts observed
/// under `b = 0` and `b = 1`, treating both values as equally likely.
pub fn plugin_mi_estimate(counts_b0: &[u64], counts_b1: &[u64]) -> Result<f64> {
    if counts_b0.len() != counts_b1.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} event counts for b=0 but {} for b=1",
            counts_b0.len(),
            counts_b1.len()
        )));
    }
    let n0: u64 = counts_b0.iter().sum();
    let n1: u64 = counts_b1.iter().sum();
    if n0 == 0 || n1 == 0 {
        return Err(Error::InsufficientData(n0.min(n1) as usize));
    }
    let mut total = 0.0;
    for (&c0, &c1) in counts_b0.iter().zip(counts_b1) {
        let f0 = c0 as f64 / n0 as f64;
        let f1 = c1 as f64 / n1 as f64;
        let mix = 0.5 * (f0 + f1);
        if f0 > 0.0 {
            total += 0.5 * f0 * (f0 / mix).log2();
        }
        if f1 > 0.0 {
            total += 0.5 * f1 * (f1 / mix).log2();
        }
    }
    Ok(total.max(0.0))
}
