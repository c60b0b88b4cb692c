//! SNR sweeps and their CSV form.

use std::fmt;
use std::str::FromStr;

use crate::exec::Execution;
use crate::mc::{estimate_pep_mc, simulate_ber, McSettings};
use crate::noma::canonical_event;
use crate::pep::{canonical_curve, default_quadrature, diversity_order, pep_closed_form, pep_exact, union_bound};

use super::config::RunConfig;

pub const CSV_HEADER: &str = "snr_db,user,metric,alpha,value,ci_low,ci_high";

/// Per-user quantities a sweep can report. Declaration order is lexical by
/// name, which is also the row order within one (SNR, user) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    BerSim,
    BerUnion,
    DiversitySlope,
    PepAnalytic,
    PepClosed,
    PepMc,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::BerSim,
        Metric::BerUnion,
        Metric::DiversitySlope,
        Metric::PepAnalytic,
        Metric::PepClosed,
        Metric::PepMc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::BerSim => "ber_sim",
            Metric::BerUnion => "ber_union",
            Metric::DiversitySlope => "diversity_slope",
            Metric::PepAnalytic => "pep_analytic",
            Metric::PepClosed => "pep_closed",
            Metric::PepMc => "pep_mc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub user: usize,
    pub metric: Metric,
    pub alpha: f64,
    pub value: f64,
    pub ci: Option<(f64, f64)>,
}

/// A computation that failed at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepError {
    pub snr_db: f64,
    /// `None` when the failing step covers all users at once.
    pub user: Option<usize>,
    pub metric: Metric,
    pub source: crate::Error,
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let user = self.user.map_or_else(|| "all".to_string(), |u| u.to_string());
        write!(
            f,
            "{} failed at snr_db={} user={}: {}",
            self.metric, self.snr_db, user, self.source
        )
    }
}

impl std::error::Error for SweepError {}

#[derive(Debug, Clone, Copy)]
struct Task {
    snr_db: f64,
    metric: Metric,
}

/// Evaluates `metrics` for every user at every SNR point of `cfg` (diversity
/// slopes once per user, at the window midpoint). Rows come back sorted by
/// SNR, user and metric name.
pub fn run_sweep(cfg: &RunConfig, metrics: &[Metric], exec: Execution) -> Result<Vec<SweepRecord>, SweepError> {
    let mut wanted = metrics.to_vec();
    wanted.sort();
    wanted.dedup();
    let mut tasks = Vec::new();
    for &metric in &wanted {
        if metric == Metric::DiversitySlope {
            tasks.push(Task {
                snr_db: 0.5 * (cfg.window_db.0 + cfg.window_db.1),
                metric,
            });
        } else {
            tasks.extend(cfg.snr_db.points().into_iter().map(|snr_db| Task { snr_db, metric }));
        }
    }
    let settings = McSettings::new(cfg.trials, cfg.seed);
    let batches = exec.try_map(&tasks, |task| evaluate(cfg, task, &settings, exec))?;
    let mut rows: Vec<SweepRecord> = batches.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.snr_db
            .total_cmp(&b.snr_db)
            .then(a.user.cmp(&b.user))
            .then(a.metric.cmp(&b.metric))
    });
    Ok(rows)
}

fn evaluate(cfg: &RunConfig, task: &Task, settings: &McSettings, exec: Execution) -> Result<Vec<SweepRecord>, SweepError> {
    let Task { snr_db, metric } = *task;
    let fail = |user: Option<usize>| move |source: crate::Error| SweepError {
        snr_db,
        user,
        metric,
        source,
    };
    let record = |user: usize, value: f64, ci: Option<(f64, f64)>| SweepRecord {
        snr_db,
        user,
        metric,
        alpha: cfg.alpha,
        value,
        ci,
    };
    let quad = default_quadrature();
    let users = 1..=cfg.users;

    if metric == Metric::DiversitySlope {
        let base = cfg.system(0.0).map_err(fail(None))?;
        let (lo, hi) = cfg.window_db;
        return users
            .map(|l| {
                let curve = canonical_curve(&base, l, &[lo, hi], &quad, exec).map_err(fail(Some(l)))?;
                let d = diversity_order(&curve, cfg.window_db).map_err(fail(Some(l)))?;
                Ok(record(l, d.d_s, None))
            })
            .collect();
    }

    let system = cfg.system(snr_db).map_err(fail(None))?;
    let model = system.noise_model().map_err(fail(None))?;
    if metric == Metric::BerSim {
        let estimates = simulate_ber(&system, &model, settings).map_err(fail(None))?;
        return Ok(estimates
            .iter()
            .enumerate()
            .map(|(k, e)| record(k + 1, e.point, Some((e.ci_low, e.ci_high))))
            .collect());
    }
    users
        .map(|l| {
            let value = match metric {
                Metric::BerUnion => (union_bound(&system, &model, l, &quad, exec).map_err(fail(Some(l)))?.p_ub, None),
                Metric::PepAnalytic | Metric::PepClosed | Metric::PepMc => {
                    let event = canonical_event(&system, l).map_err(fail(Some(l)))?;
                    match metric {
                        Metric::PepAnalytic => (pep_exact(&event, &model, &quad).map_err(fail(Some(l)))?.value, None),
                        Metric::PepClosed => (pep_closed_form(&event, &model).map_err(fail(Some(l)))?.value, None),
                        _ => {
                            let e = estimate_pep_mc(&event, &model, settings).map_err(fail(Some(l)))?;
                            (e.point, Some((e.ci_low, e.ci_high)))
                        }
                    }
                }
                Metric::BerSim | Metric::DiversitySlope => unreachable!("handled above"),
            };
            if !value.0.is_finite() {
                return Err(fail(Some(l))(crate::Error::NumericFailure {
                    what: "sweep",
                    estimate: value.0,
                    error_estimate: f64::NAN,
                }));
            }
            Ok(record(l, value.0, value.1))
        })
        .collect()
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(rows: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (lo, hi) = r
            .ci
            .map_or((String::new(), String::new()), |(lo, hi)| (format_g12(lo), format_g12(hi)));
        out.push_str(&format!(
            "{},{},{},{},{},{lo},{hi}\n",
            format_g12(r.snr_db),
            r.user,
            r.metric,
            format_g12(r.alpha),
            format_g12(r.value)
        ));
    }
    out
}
