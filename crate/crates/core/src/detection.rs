//! Bob's surveillance of the channel from mismatches in result-announcements.

use serde::{Deserialize, Serialize};

use crate::channel::{compose_strengths, mismatch_probability};
use crate::error::{check_strength, Error, Result};
use crate::infotheory::mutual_info_be_k;
use crate::protocol::{AnnouncementKind, Transcript};

pub const REPORT_VERSION: u32 = 1;

/// Fewest checkable shots for the normal approximation.
pub const MIN_CHECKABLE: usize = 30;

pub const DEFAULT_GRID_STEP: f64 = 1e-4;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchSummary {
    /// Mismatches seen.
    pub r: usize,
    /// Result-announcements with a matching basis.
    pub n: usize,
    /// Bit-announcements.
    pub k: usize,
    pub n_shots: usize,
}

impl MismatchSummary {
    pub fn new(r: usize, n: usize, k: usize, n_shots: usize) -> Result<Self> {
        if r > n {
            return Err(Error::InvalidCount { k: r, n });
        }
        if n + k > n_shots {
            return Err(Error::InvalidCount { k: n + k, n: n_shots });
        }
        Ok(Self { r, n, k, n_shots })
    }

    /// `N − k`, every result-announcement whether checkable or not.
    pub fn result_announcements(&self) -> usize {
        self.n_shots - self.k
    }
}

/// Counts mismatches over the result-announcements Bob can check against
/// his own preparations.
pub fn summarize_mismatches(transcript: &Transcript) -> MismatchSummary {
    let (mut r, mut n, mut k) = (0, 0, 0);
    for shot in &transcript.shots {
        match shot.announcement.kind() {
            AnnouncementKind::Bit => k += 1,
            AnnouncementKind::Result if shot.matching_basis() => {
                n += 1;
                r += usize::from(shot.is_mismatch());
            }
            AnnouncementKind::Result => {}
        }
    }
    MismatchSummary {
        r,
        n,
        k,
        n_shots: transcript.shots.len(),
    }
}

/// `min(d̄ + num_sigmas·√(d̄(1 − d̄)/n), 1/2)` with `d̄ = r/n`.
pub fn frequentist_bound(summary: &MismatchSummary, num_sigmas: f64) -> Result<f64> {
    if summary.n < MIN_CHECKABLE {
        return Err(Error::InsufficientData(summary.n));
    }
    let n = summary.n as f64;
    let mean = summary.r as f64 / n;
    let se = (mean * (1.0 - mean) / n).sqrt();
    Ok((mean + num_sigmas * se).min(0.5))
}

/// Most that Eve can have learned from `k` bit-announcements if the attack
/// strength is at most `d_bound`.
pub fn info_ceiling(d_bound: f64, k: usize) -> Result<f64> {
    mutual_info_be_k(k, check_strength(d_bound)?)
}

/// Weights over a grid of attack strengths in `[0, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    grid: Vec<f64>,
    density: Vec<f64>,
}

impl Posterior {
    pub fn new(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != density.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} grid points with {} weights",
                grid.len(),
                density.len()
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 || grid[grid.len() - 1] > 0.5 {
            return Err(Error::InvalidDistribution(
                "grid must be strictly increasing within [0, 1/2]".into(),
            ));
        }
        if density.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidDistribution("negative weight".into()));
        }
        let total: f64 = density.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { grid, density })
    }

    /// Uniform prior on `[0, 1/2]` with spacing `step`.
    pub fn uniform(step: f64) -> Result<Self> {
        let grid = strength_grid(step)?;
        let w = 1.0 / grid.len() as f64;
        Ok(Self {
            density: vec![w; grid.len()],
            grid,
        })
    }

    /// All weight on the grid point nearest `d`.
    pub fn point_mass(d: f64, step: f64) -> Result<Self> {
        check_strength(d)?;
        let grid = strength_grid(step)?;
        let at = nearest(&grid, d);
        let mut density = vec![0.0; grid.len()];
        density[at] = 1.0;
        Ok(Self { grid, density })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mode(&self) -> f64 {
        let best = self
            .density
            .iter()
            .enumerate()
            .fold(0, |best, (i, &w)| if w > self.density[best] { i } else { best });
        self.grid[best]
    }

    pub fn mean(&self) -> f64 {
        self.grid.iter().zip(&self.density).map(|(d, w)| d * w).sum()
    }
}

fn strength_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidConfig(format!("grid step {step} must be in (0, 0.5]")));
    }
    let intervals = (0.5 / step).round().max(1.0) as usize;
    Ok((0..=intervals).map(|i| 0.5 * i as f64 / intervals as f64).collect())
}

fn nearest(grid: &[f64], d: f64) -> usize {
    grid.iter()
        .enumerate()
        .fold(0, |best, (i, g)| if (g - d).abs() < (grid[best] - d).abs() { i } else { best })
}

/// Updates `prior` with the binomial likelihood `d^r (1 − d)^(n − r)`.
pub fn bayesian_posterior(summary: &MismatchSummary, prior: &Posterior) -> Result<Posterior> {
    bayesian_posterior_with_apparatus(summary, prior, 0.0)
}

/// As [`bayesian_posterior`], when Alice's apparatus also mismatches with
/// probability `apparatus`: each checked shot then mismatches with
/// probability `D + d − 2Dd`.
pub fn bayesian_posterior_with_apparatus(
    summary: &MismatchSummary,
    prior: &Posterior,
    apparatus: f64,
) -> Result<Posterior> {
    check_strength(apparatus)?;
    let (r, misses) = (summary.r, summary.n - summary.r);
    let ln = |count: usize, p: f64| if count == 0 { 0.0 } else { count as f64 * p.ln() };
    let log_post: Vec<f64> = prior
        .grid
        .iter()
        .zip(&prior.density)
        .map(|(&d, &w)| {
            if w == 0.0 {
                return f64::NEG_INFINITY;
            }
            let q = compose_strengths(apparatus, d).unwrap_or(0.5);
            w.ln() + ln(r, q) + ln(misses, 1.0 - q)
        })
        .collect();
    let top = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::NumericalUnderflow);
    }
    let unnorm: Vec<f64> = log_post.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(Posterior {
        grid: prior.grid.clone(),
        density: unnorm.into_iter().map(|w| w / total).collect(),
    })
}

/// Smallest grid value `d̂` with `Pr(d ≤ d̂) ≥ mass`.
pub fn credible_bound(posterior: &Posterior, mass: f64) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::InvalidProbability { field: "mass", value: mass });
    }
    let mut cumulative = 0.0;
    for (d, w) in posterior.grid.iter().zip(&posterior.density) {
        cumulative += w;
        if cumulative >= mass - WEIGHT_TOL {
            return Ok(*d);
        }
    }
    Ok(posterior.grid[posterior.grid.len() - 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOptions {
    pub num_sigmas: f64,
    pub credible_mass: f64,
    pub grid_step: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        Self {
            num_sigmas: 2.0,
            credible_mass: 0.95,
            grid_step: DEFAULT_GRID_STEP,
        }
    }
}

/// Everything Bob concludes about a possible eavesdropper from one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub version: u32,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub n_shots: usize,
    /// `r/n`, absent without checkable shots.
    pub d_mean: Option<f64>,
    /// Absent below [`MIN_CHECKABLE`] checkable shots.
    pub d_bound_2sigma: Option<f64>,
    pub info_ceiling_bits: Option<f64>,
    pub d_hat_95: f64,
    pub info_ceiling_bayes_bits: f64,
    pub prior: String,
    pub grid_step: f64,
    pub apparatus_d: f64,
    /// Present when apparatus noise is folded into the Bayesian likelihood.
    pub noise_composition: Option<String>,
}

pub fn detection_report(transcript: &Transcript, options: &DetectionOptions) -> Result<DetectionReport> {
    let summary = summarize_mismatches(transcript);
    let apparatus = mismatch_probability(&transcript.config.apparatus)?;
    let d_mean = (summary.n > 0).then(|| summary.r as f64 / summary.n as f64);
    let (d_bound, ceiling) = match frequentist_bound(&summary, options.num_sigmas) {
        Ok(bound) => (Some(bound), Some(info_ceiling(bound, summary.k)?)),
        Err(Error::InsufficientData(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let prior = Posterior::uniform(options.grid_step)?;
    let posterior = bayesian_posterior_with_apparatus(&summary, &prior, apparatus)?;
    let d_hat = credible_bound(&posterior, options.credible_mass)?;
    Ok(DetectionReport {
        version: REPORT_VERSION,
        r: summary.r,
        n: summary.n,
        k: summary.k,
        n_shots: summary.n_shots,
        d_mean,
        d_bound_2sigma: d_bound,
        info_ceiling_bits: ceiling,
        d_hat_95: d_hat,
        info_ceiling_bayes_bits: info_ceiling(d_hat, summary.k)?,
        prior: "uniform".into(),
        grid_step: options.grid_step,
        apparatus_d: apparatus,
        noise_composition: (apparatus > 0.0).then(|| "q = D + d - 2Dd".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::eavesdropper::build_probe_attack;
    use crate::protocol::{run_protocol_seeded, ProtocolConfig};
    use crate::qubit::Bit;
    use statrs::distribution::{Beta, ContinuousCDF};

    fn summary(r: usize, n: usize) -> MismatchSummary {
        MismatchSummary::new(r, n, 0, n).unwrap()
    }

    #[test]
    fn frequentist_examples() {
        assert_eq!(frequentist_bound(&summary(0, 1000), 2.0).unwrap(), 0.0);
        let b = frequentist_bound(&summary(50, 1000), 2.0).unwrap();
        assert!((b - (0.05 + 2.0 * (0.05f64 * 0.95 / 1000.0).sqrt())).abs() < 1e-15);
        assert!((b - 0.0638).abs() < 1e-4);
        assert_eq!(frequentist_bound(&summary(600, 1000), 2.0).unwrap(), 0.5);
        assert_eq!(frequentist_bound(&summary(3, 29), 2.0), Err(Error::InsufficientData(29)));
    }

    #[test]
    fn frequentist_monotone_in_r() {
        let mut last = 0.0;
        for r in 0..=200 {
            let b = frequentist_bound(&summary(r, 200), 2.0).unwrap();
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn ceiling_examples() {
        assert_eq!(info_ceiling(0.0, 17).unwrap(), 0.0);
        assert!((info_ceiling(0.5, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(info_ceiling(0.6, 1).is_err());
    }

    #[test]
    fn no_data_leaves_prior() {
        let prior = Posterior::uniform(1e-3).unwrap();
        let post = bayesian_posterior(&summary(0, 0), &prior).unwrap();
        for (a, b) in post.density().iter().zip(prior.density()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn posterior_concentrates() {
        let prior = Posterior::uniform(DEFAULT_GRID_STEP).unwrap();
        let post = bayesian_posterior(&summary(0, 5000), &prior).unwrap();
        assert!(credible_bound(&post, 0.95).unwrap() < 0.001);
        let post = bayesian_posterior(&summary(100, 1000), &prior).unwrap();
        assert!((post.mode() - 0.1).abs() <= DEFAULT_GRID_STEP);
    }

    #[test]
    fn credible_examples() {
        let point = Posterior::point_mass(0.1, 1e-3).unwrap();
        assert!((credible_bound(&point, 0.95).unwrap() - 0.1).abs() < 1e-12);
        let flat = Posterior::uniform(DEFAULT_GRID_STEP).unwrap();
        assert!((credible_bound(&flat, 0.95).unwrap() - 0.475).abs() <= DEFAULT_GRID_STEP);
        assert!(credible_bound(&flat, 1.0).is_err());
    }

    #[test]
    fn credible_matches_beta_quantile() {
        let post = bayesian_posterior(&summary(50, 1000), &Posterior::uniform(DEFAULT_GRID_STEP).unwrap()).unwrap();
        let beta = Beta::new(51.0, 951.0).unwrap();
        let target = 0.95 * beta.cdf(0.5);
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if beta.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d_hat = credible_bound(&post, 0.95).unwrap();
        assert!((d_hat - hi).abs() <= DEFAULT_GRID_STEP, "{d_hat} vs {hi}");
    }

    #[test]
    fn apparatus_noise_shifts_posterior() {
        let prior = Posterior::uniform(1e-3).unwrap();
        let plain = bayesian_posterior(&summary(100, 1000), &prior).unwrap();
        let noisy = bayesian_posterior_with_apparatus(&summary(100, 1000), &prior, 0.05).unwrap();
        // 0.1 observed = 0.05 apparatus composed with d = 0.05/0.9
        assert!((noisy.mode() - 0.05 / 0.9).abs() < 1.5e-3, "{}", noisy.mode());
        assert!(noisy.mean() < plain.mean());
    }

    #[test]
    fn posterior_validation() {
        assert!(Posterior::new(vec![0.0, 0.1], vec![0.5, 0.4]).is_err());
        assert!(Posterior::new(vec![0.1, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Posterior::new(vec![0.0, 0.6], vec![0.5, 0.5]).is_err());
        assert!(Posterior::new(vec![0.0, 0.5], vec![0.5, 0.5]).is_ok());
        assert!(Posterior::uniform(0.0).is_err());
        assert_eq!(Posterior::uniform(DEFAULT_GRID_STEP).unwrap().grid().len(), 5001);
    }

    #[test]
    fn underflow_is_reported() {
        let prior = Posterior::new(vec![0.0, 0.5], vec![1.0, 0.0]).unwrap();
        assert_eq!(bayesian_posterior(&summary(3, 10), &prior), Err(Error::NumericalUnderflow));
    }

    #[test]
    fn summary_counts_only_checkable_results() {
        let config = ProtocolConfig::new(2000, 0.3, ChannelParams::ideal(), 9).unwrap();
        let t = run_protocol_seeded(&config, Bit::Zero, None).unwrap();
        let s = summarize_mismatches(&t);
        assert_eq!(s.r, 0);
        assert_eq!(s.k, t.bit_announcements());
        let unmatched = t
            .shots
            .iter()
            .filter(|sh| sh.announcement.kind() == AnnouncementKind::Result && !sh.matching_basis())
            .count();
        assert_eq!(s.n + unmatched + s.k, 2000);
        assert_eq!(s.result_announcements(), s.n + unmatched);
    }

    #[test]
    fn report_for_clean_run() {
        let config = ProtocolConfig::new(1000, 0.1, ChannelParams::ideal(), 7).unwrap();
        let t = run_protocol_seeded(&config, Bit::One, None).unwrap();
        let report = detection_report(&t, &DetectionOptions::default()).unwrap();
        assert_eq!(report.r, 0);
        assert_eq!(report.d_bound_2sigma, Some(0.0));
        assert_eq!(report.info_ceiling_bits, Some(0.0));
        assert!(report.noise_composition.is_none());
        assert!(report.d_hat_95 < 0.01);
    }

    #[test]
    fn report_detects_attack() {
        let attack = build_probe_attack(0.2).unwrap();
        let config = ProtocolConfig::new(20_000, 0.1, ChannelParams::ideal(), 21).unwrap();
        let t = run_protocol_seeded(&config, Bit::Zero, Some(&attack)).unwrap();
        let report = detection_report(&t, &DetectionOptions::default()).unwrap();
        let n = report.n as f64;
        assert!((report.d_mean.unwrap() - 0.2).abs() < 4.0 * (0.16 / n).sqrt());
        assert!(report.d_hat_95 > report.d_mean.unwrap());
        assert!(report.info_ceiling_bayes_bits > 0.99);
    }
}
