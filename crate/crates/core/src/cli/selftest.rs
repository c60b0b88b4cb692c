//! Quick oracle checks run by the `selftest` subcommand.

use crate::exec::Execution;
use crate::mc::{simulate_ber, McSettings};
use crate::noma::{canonical_event, enumerate_error_events, Constellation, SystemConfig, DEFAULT_ENUMERATION_CAP};
use crate::pep::{conditional_pep, default_quadrature, pep_by_averaging, pep_closed_form, pep_exact, DecisionNoise};
use crate::specfun::erfc;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn three_user(db: f64, alpha: f64) -> crate::Result<SystemConfig> {
    SystemConfig::three_user_default().with_alpha(alpha)?.with_snr_db(db)
}

/// Worst relative gap between `pep_exact` and `other` over all enumerated
/// events at a few SNR points.
fn worst_gap<F>(alpha: f64, other: F) -> crate::Result<f64>
where
    F: Fn(&crate::noma::ErrorEvent, &crate::ggd::GGNoiseModel) -> crate::Result<f64>,
{
    let mut worst = 0.0f64;
    for db in [0.0, 20.0, 40.0] {
        let cfg = three_user(db, alpha)?;
        let model = cfg.noise_model()?;
        for l in 1..=cfg.users() {
            for w in enumerate_error_events(&cfg, l, DEFAULT_ENUMERATION_CAP)?.events {
                let exact = pep_exact(&w.event, &model, &default_quadrature())?.value;
                worst = worst.max(rel(other(&w.event, &model)?, exact));
            }
        }
    }
    Ok(worst)
}

pub fn run() -> crate::Result<Vec<Check>> {
    let mut checks = Vec::new();

    let single = SystemConfig::new(vec![1.0], 10.0, Constellation::Bpsk, 2.0)?;
    let value = pep_exact(&canonical_event(&single, 1)?, &single.noise_model()?, &default_quadrature())?.value;
    let oracle = 0.5 * (1.0 - (20.0f64 / 21.0).sqrt());
    checks.push(Check {
        name: "single-user Gaussian PEP",
        pass: rel(value, oracle) < 1e-10,
        detail: format!("{value:.12e} vs {oracle:.12e}"),
    });

    for alpha in [1.0, 2.0] {
        let worst = worst_gap(alpha, |e, m| Ok(pep_closed_form(e, m)?.value))?;
        checks.push(Check {
            name: "closed form against quadrature",
            pass: worst <= 1e-6,
            detail: format!("alpha={alpha}: worst rel {worst:.2e}"),
        });
    }
    for alpha in [0.5, 1.0, 2.0] {
        let worst = worst_gap(alpha, |e, m| Ok(pep_by_averaging(e, m, &default_quadrature())?.value))?;
        checks.push(Check {
            name: "averaging against tail form",
            pass: worst <= 1e-8,
            detail: format!("alpha={alpha}: worst rel {worst:.2e}"),
        });
    }

    let cfg = three_user(15.0, 2.0)?;
    let model = cfg.noise_model()?;
    let mut worst = 0.0f64;
    for l in 1..=3 {
        for w in enumerate_error_events(&cfg, l, DEFAULT_ENUMERATION_CAP)?.events {
            for h in [0.05, 0.4, 1.3] {
                let dn = DecisionNoise::new(&w.event, &model, h)?;
                let half = 0.5 * erfc(dn.lambda_sub * h * h * w.event.upsilon().abs());
                let oracle = if w.event.is_constructive() { half } else { 1.0 - half };
                worst = worst.max((conditional_pep(&w.event, &model, h)? - oracle).abs());
            }
        }
    }
    checks.push(Check {
        name: "Gaussian conditional reduction",
        pass: worst <= 1e-10,
        detail: format!("worst abs gap {worst:.2e}"),
    });

    let counts = |p: usize, exec| -> crate::Result<Vec<u64>> {
        let s = McSettings::new(100_000, 1).with_partitions(p).with_exec(exec);
        Ok(simulate_ber(&cfg, &model, &s)?.iter().map(|e| e.errors).collect())
    };
    let base = counts(1, Execution::Sequential)?;
    let same = counts(4, Execution::Parallel)? == base && counts(16, Execution::Parallel)? == base;
    checks.push(Check {
        name: "simulation determinism",
        pass: same,
        detail: format!("error counts {base:?} across 1, 4 and 16 partitions"),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run().unwrap() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
