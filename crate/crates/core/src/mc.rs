//! Seeded Monte Carlo estimates of pairwise error probabilities and of the
//! end-to-end SIC bit error rate.
//!
//! Trials are grouped into fixed chunks of [`CHUNK_TRIALS`]; chunk `c` draws
//! from ChaCha8 seeded with `seed` on stream `c`. Partitions only decide which
//! worker runs which chunks, so error counts do not depend on the partition
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{default_partitions, Execution};
use crate::ggd::GGNoiseModel;
use crate::noma::{ErrorEvent, SystemConfig};

pub const CHUNK_TRIALS: u64 = 4096;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub point: f64,
    pub trials: u64,
    pub errors: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub partitions: usize,
}

impl McEstimate {
    /// Frequency with its 95% Wilson score interval.
    pub fn from_counts(errors: u64, trials: u64, seed: u64, partitions: usize) -> Self {
        let (ci_low, ci_high) = wilson(errors, trials);
        let point = errors as f64 / trials as f64;
        Self {
            point,
            trials,
            errors,
            ci_low: ci_low.min(point),
            ci_high: ci_high.max(point),
            seed,
            partitions,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&p)
    }
}

fn wilson(k: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Trial count, seed and how the work is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    pub partitions: usize,
    pub exec: Execution,
}

impl McSettings {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            partitions: default_partitions(),
            exec: Execution::default(),
        }
    }

    pub fn with_partitions(self, partitions: usize) -> Self {
        Self { partitions, ..self }
    }

    pub fn with_exec(self, exec: Execution) -> Self {
        Self { exec, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("at least one trial is required".into()));
        }
        if self.partitions == 0 {
            return Err(Error::InvalidConfig("at least one partition is required".into()));
        }
        Ok(())
    }
}

/// Runs `body(rng, n, counts)` over every chunk and sums the per-chunk
/// counters elementwise.
fn run_chunks<F>(settings: &McSettings, width: usize, body: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng, u64, &mut [u64]) + Sync + Send,
{
    let chunks = settings.trials.div_ceil(CHUNK_TRIALS);
    let parts = (settings.partitions as u64).min(chunks).max(1);
    let ranges: Vec<(u64, u64)> = (0..parts)
        .map(|p| (chunks * p / parts, chunks * (p + 1) / parts))
        .collect();
    let partials = settings.exec.map(&ranges, |&(first, last)| {
        let mut counts = vec![0u64; width];
        for c in first..last {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(c);
            let n = CHUNK_TRIALS.min(settings.trials - c * CHUNK_TRIALS);
            body(&mut rng, n, &mut counts);
        }
        counts
    });
    partials.into_iter().fold(vec![0u64; width], |mut acc, p| {
        acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        acc
    })
}

/// Frequency of the pairwise error `|h zeta + n|^2 <= |h X + n|^2` with `h`
/// the event user's ordered gain and `n` drawn from `model`.
pub fn estimate_pep_mc(event: &ErrorEvent, model: &GGNoiseModel, settings: &McSettings) -> Result<McEstimate> {
    settings.validate()?;
    let (x, zeta) = (event.interference(), event.zeta());
    let users = event.users();
    let l = event.user();
    let ensemble = crate::channel::OrderedRayleighEnsemble::new(users)?;
    let counts = run_chunks(settings, 1, |rng, n, counts| {
        let mut gains = vec![0.0; users];
        for _ in 0..n {
            ensemble.sample_into(rng, &mut gains);
            let h = gains[l - 1];
            let noise = model.sample(rng);
            if (h * zeta + noise).powi(2) <= (h * x + noise).powi(2) {
                counts[0] += 1;
            }
        }
    });
    Ok(McEstimate::from_counts(counts[0], settings.trials, settings.seed, settings.partitions))
}

/// Bit error rate of every user through the full SIC receive chain. Each
/// trial draws one ordered gain vector, uniform symbols for all users and
/// independent noise per user.
pub fn simulate_ber(config: &SystemConfig, model: &GGNoiseModel, settings: &McSettings) -> Result<Vec<McEstimate>> {
    settings.validate()?;
    let users = config.users();
    let ensemble = config.ensemble();
    let constellation = config.constellation();
    let symbols = constellation.symbols();
    let amplitudes: Vec<f64> = (1..=users).map(|i| config.amplitude(i)).collect();
    let counts = run_chunks(settings, users, |rng, n, counts| {
        let mut gains = vec![0.0; users];
        let mut sent = vec![0.0; users];
        for _ in 0..n {
            ensemble.sample_into(rng, &mut gains);
            for s in sent.iter_mut() {
                *s = symbols[rng.random_range(0..symbols.len())];
            }
            let composite: f64 = amplitudes.iter().zip(&sent).map(|(a, x)| a * x).sum();
            for l in 1..=users {
                let h = gains[l - 1];
                let received = h * composite + model.sample(rng);
                let decided = config.sic_decide(received, h, l);
                counts[l - 1] += u64::from(constellation.bit_errors(sent[l - 1], decided));
            }
        }
    });
    let bits = settings.trials * u64::from(constellation.bits_per_symbol());
    Ok(counts
        .into_iter()
        .map(|e| McEstimate::from_counts(e, bits, settings.seed, settings.partitions))
        .collect())
}
