//! Downlink power-domain NOMA: configuration, superposition coding, the SIC
//! receive chain and the pairwise error events analysed by [`crate::pep`].
//!
//! All signals are real. In the normalized link model user `l` observes
//!
//! ```text
//! y_l = h_l * sum_i sqrt(a_i * snr) x_i + n_l
//! ```
//!
//! where `n_l` is generalized Gaussian with variance [`LINK_NOISE_VARIANCE`].

use crate::channel::OrderedRayleighEnsemble;
use crate::error::{Error, Result};
use crate::ggd::GGNoiseModel;

/// Per-dimension noise variance `N0 / 2` of the normalized link (`N0 = 1`).
///
/// The decision statistic `2 sqrt(a_l snr) h (x_l - x_check) n` must have
/// variance `2 a_l snr h^2 (x_l - x_check)^2`, which pins this to one half.
pub const LINK_NOISE_VARIANCE: f64 = 0.5;

/// Upper bound on raw joint assignments visited by [`enumerate_error_events`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 16;

const BPSK: [f64; 2] = [-1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Bpsk,
}

impl Constellation {
    /// Symbols in ascending order.
    pub fn symbols(&self) -> &'static [f64] {
        match self {
            Constellation::Bpsk => &BPSK,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            Constellation::Bpsk => 1,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.symbols().contains(&x)
    }

    /// Hamming distance between the bit labels of two symbols.
    pub fn bit_errors(&self, sent: f64, decided: f64) -> u32 {
        match self {
            Constellation::Bpsk => u32::from(sent != decided),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Constellation::Bpsk => "bpsk",
        }
    }

    pub fn largest(&self) -> f64 {
        let s = self.symbols();
        s[s.len() - 1]
    }
}

impl std::str::FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Constellation::Bpsk),
            other => Err(Error::InvalidConfig(format!("unsupported constellation '{other}'"))),
        }
    }
}

/// Users, power split, average transmit SNR and noise shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    power: Vec<f64>,
    gamma_bar: f64,
    constellation: Constellation,
    noise_alpha: f64,
}

impl SystemConfig {
    /// Validates the NOMA invariants: every coefficient positive, the total at
    /// most one, and coefficients non-increasing with the user index (weaker
    /// users get more power).
    pub fn new(power: Vec<f64>, gamma_bar: f64, constellation: Constellation, noise_alpha: f64) -> Result<Self> {
        if power.is_empty() {
            return Err(Error::InvalidConfig("power allocation is empty".into()));
        }
        if let Some(bad) = power.iter().find(|a| !a.is_finite() || **a <= 0.0) {
            return Err(Error::InvalidConfig(format!("power coefficient {bad} must be positive")));
        }
        let total: f64 = power.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidConfig(format!("power coefficients sum to {total} > 1")));
        }
        if let Some(i) = power.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig(format!(
                "power must be non-increasing with user index (a_{} = {} < a_{} = {})",
                i + 1,
                power[i],
                i + 2,
                power[i + 1]
            )));
        }
        if !gamma_bar.is_finite() || gamma_bar < 0.0 {
            return Err(Error::InvalidConfig(format!("average SNR must be non-negative, got {gamma_bar}")));
        }
        if !noise_alpha.is_finite() || noise_alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {noise_alpha}")));
        }
        Ok(Self {
            power,
            gamma_bar,
            constellation,
            noise_alpha,
        })
    }

    /// Three BPSK users with `a = [0.7, 0.2, 0.1]`, Gaussian noise, 0 dB.
    pub fn three_user_default() -> Self {
        Self {
            power: vec![0.7, 0.2, 0.1],
            gamma_bar: 1.0,
            constellation: Constellation::Bpsk,
            noise_alpha: 2.0,
        }
    }

    pub fn users(&self) -> usize {
        self.power.len()
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    /// Linear average transmit SNR.
    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn constellation(&self) -> Constellation {
        self.constellation
    }

    pub fn noise_alpha(&self) -> f64 {
        self.noise_alpha
    }

    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Result<Self> {
        Self::new(self.power.clone(), gamma_bar, self.constellation, self.noise_alpha)
    }

    pub fn with_snr_db(&self, snr_db: f64) -> Result<Self> {
        self.with_gamma_bar(db_to_linear(snr_db))
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.power.clone(), self.gamma_bar, self.constellation, alpha)
    }

    /// Link noise with this configuration's shape.
    pub fn noise_model(&self) -> Result<GGNoiseModel> {
        GGNoiseModel::new(self.noise_alpha, LINK_NOISE_VARIANCE)
    }

    pub fn ensemble(&self) -> OrderedRayleighEnsemble {
        OrderedRayleighEnsemble::new(self.users()).expect("config has at least one user")
    }

    /// `sqrt(a_i * snr)` for the 1-based user index `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        (self.power[i - 1] * self.gamma_bar).sqrt()
    }

    fn check_user(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.users() {
            return Err(Error::UserOutOfRange {
                index: l,
                users: self.users(),
            });
        }
        Ok(())
    }

    fn check_symbols(&self, symbols: &[f64]) -> Result<()> {
        match symbols.iter().find(|x| !self.constellation.contains(**x)) {
            Some(&x) => Err(Error::SymbolNotInConstellation(x)),
            None => Ok(()),
        }
    }

    /// `sum_i sqrt(a_i snr) x_i`.
    pub fn superpose(&self, symbols: &[f64]) -> Result<f64> {
        if symbols.len() != self.users() {
            return Err(Error::InvalidConfig(format!(
                "expected {} symbols, got {}",
                self.users(),
                symbols.len()
            )));
        }
        self.check_symbols(symbols)?;
        Ok(self.superpose_unchecked(symbols))
    }

    pub(crate) fn superpose_unchecked(&self, symbols: &[f64]) -> f64 {
        symbols
            .iter()
            .enumerate()
            .map(|(k, x)| self.amplitude(k + 1) * x)
            .sum()
    }

    /// Successive interference cancellation at user `l`: layers `1..=l` are
    /// detected in order by nearest-symbol decisions on the residual, each
    /// decision being subtracted before the next layer. Ties go to the
    /// smaller symbol.
    pub fn sic_receive(&self, received: f64, h: f64, l: usize) -> Result<Vec<f64>> {
        self.check_user(l)?;
        let mut residual = received;
        let mut decisions = Vec::with_capacity(l);
        for k in 1..=l {
            let scale = self.amplitude(k) * h;
            let x = self.nearest(residual, scale);
            residual -= scale * x;
            decisions.push(x);
        }
        Ok(decisions)
    }

    /// Own-layer decision of [`Self::sic_receive`] without allocating.
    pub(crate) fn sic_decide(&self, received: f64, h: f64, l: usize) -> f64 {
        let mut residual = received;
        let mut x = 0.0;
        for k in 1..=l {
            let scale = self.amplitude(k) * h;
            x = self.nearest(residual, scale);
            residual -= scale * x;
        }
        x
    }

    fn nearest(&self, residual: f64, scale: f64) -> f64 {
        let mut best = f64::NAN;
        let mut best_dist = f64::INFINITY;
        for &x in self.constellation.symbols() {
            let d = (residual - scale * x).abs();
            if d < best_dist {
                best_dist = d;
                best = x;
            }
        }
        best
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A pairwise hypothesis at user `l`: the transmitted vector, what the SIC
/// layers above `l` decided, and the wrong symbol `x_check` competing with
/// `x_l`. The derived quantities are
///
/// ```text
/// X       = sum_{i<l} sqrt(a_i snr)(x_i - xhat_i) + sum_{j>l} sqrt(a_j snr) x_j
/// zeta    = sqrt(a_l snr)(x_l - x_check) + X
/// upsilon = X^2 - zeta^2        (< 0 constructive, > 0 destructive)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEvent {
    l: usize,
    users: usize,
    amplitude: f64,
    transmitted: Vec<f64>,
    sic_detected: Vec<f64>,
    x_check: f64,
    interference: f64,
    zeta: f64,
    upsilon: f64,
}

impl ErrorEvent {
    pub fn user(&self) -> usize {
        self.l
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// `sqrt(a_l snr)`
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn transmitted(&self) -> &[f64] {
        &self.transmitted
    }

    pub fn x(&self) -> f64 {
        self.transmitted[self.l - 1]
    }

    pub fn x_check(&self) -> f64 {
        self.x_check
    }

    pub fn sic_detected(&self) -> &[f64] {
        &self.sic_detected
    }

    pub fn interferers(&self) -> &[f64] {
        &self.transmitted[self.l..]
    }

    /// Residual interference `X`.
    pub fn interference(&self) -> f64 {
        self.interference
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    /// `x_l - x_check`
    pub fn delta_check(&self) -> f64 {
        self.x() - self.x_check
    }

    /// `mu = 1` (constructive, `upsilon < 0`).
    pub fn is_constructive(&self) -> bool {
        self.upsilon < 0.0
    }

    /// Recomputes `(X, zeta, upsilon)` from the raw symbols.
    pub fn recompute(&self, config: &SystemConfig) -> (f64, f64, f64) {
        derived(config, self.l, &self.transmitted, &self.sic_detected, self.x_check)
    }
}

fn derived(config: &SystemConfig, l: usize, transmitted: &[f64], sic_detected: &[f64], x_check: f64) -> (f64, f64, f64) {
    let sic: f64 = (1..l)
        .map(|i| config.amplitude(i) * (transmitted[i - 1] - sic_detected[i - 1]))
        .sum();
    let iui: f64 = (l + 1..=config.users())
        .map(|j| config.amplitude(j) * transmitted[j - 1])
        .sum();
    let interference = sic + iui;
    let zeta = config.amplitude(l) * (transmitted[l - 1] - x_check) + interference;
    (interference, zeta, interference * interference - zeta * zeta)
}

/// Builds and validates an error event. `transmitted` holds all `L` symbols,
/// `sic_detected` the `l - 1` decisions of the cancelled layers.
pub fn build_error_event(
    config: &SystemConfig,
    l: usize,
    transmitted: &[f64],
    sic_detected: &[f64],
    x_check: f64,
) -> Result<ErrorEvent> {
    config.check_user(l)?;
    if transmitted.len() != config.users() {
        return Err(Error::InvalidConfig(format!(
            "expected {} transmitted symbols, got {}",
            config.users(),
            transmitted.len()
        )));
    }
    if sic_detected.len() != l - 1 {
        return Err(Error::InvalidConfig(format!(
            "expected {} SIC decisions for user {l}, got {}",
            l - 1,
            sic_detected.len()
        )));
    }
    config.check_symbols(transmitted)?;
    config.check_symbols(sic_detected)?;
    config.check_symbols(&[x_check])?;
    if x_check == transmitted[l - 1] {
        return Err(Error::InvalidConfig("hypothesized symbol equals the transmitted one".into()));
    }
    let (interference, zeta, upsilon) = derived(config, l, transmitted, sic_detected, x_check);
    if is_degenerate(interference, zeta, upsilon) {
        return Err(Error::DegenerateEvent);
    }
    Ok(ErrorEvent {
        l,
        users: config.users(),
        amplitude: config.amplitude(l),
        transmitted: transmitted.to_vec(),
        sic_detected: sic_detected.to_vec(),
        x_check,
        interference,
        zeta,
        upsilon,
    })
}

fn is_degenerate(interference: f64, zeta: f64, upsilon: f64) -> bool {
    upsilon.abs() <= 1e-12 * (interference * interference + zeta * zeta) || upsilon == 0.0
}

/// Every user transmits the largest symbol, SIC is error free, and the
/// hypothesis is the smallest symbol. For BPSK: all `+1`, `x_check = -1`.
pub fn canonical_event(config: &SystemConfig, l: usize) -> Result<ErrorEvent> {
    config.check_user(l)?;
    let top = config.constellation().largest();
    let transmitted = vec![top; config.users()];
    let detected = vec![top; l - 1];
    build_error_event(config, l, &transmitted, &detected, config.constellation().symbols()[0])
}

/// Error-free SIC events for user `l`, all transmitted vectors and all wrong
/// hypotheses, each with its prior `Pr(x_l)` times the uniform weight over
/// the remaining symbols.
pub fn perfect_sic_events(config: &SystemConfig, l: usize) -> Result<Vec<WeightedEvent>> {
    config.check_user(l)?;
    let symbols = config.constellation().symbols();
    let m = symbols.len();
    let users = config.users();
    let per_class = m.pow((users - 1) as u32) as f64;
    let mut out = Vec::new();
    for t in 0..m.pow(users as u32) {
        let transmitted = digits(t, m, users, symbols);
        for &x_check in symbols.iter().filter(|&&s| s != transmitted[l - 1]) {
            if let Ok(event) = build_error_event(config, l, &transmitted, &transmitted[..l - 1], x_check) {
                out.push(WeightedEvent {
                    event,
                    assignment_weight: 1.0 / per_class,
                    symbol_prior: 1.0 / m as f64,
                });
            }
        }
    }
    Ok(out)
}

/// An error event with its averaging weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEvent {
    pub event: ErrorEvent,
    /// Uniform weight over interferer and SIC assignments within the event's
    /// `(x_l, x_check)` class; sums to one per class.
    pub assignment_weight: f64,
    /// `Pr(x_l)`, uniform over the constellation.
    pub symbol_prior: f64,
}

impl WeightedEvent {
    /// `Pr(x_l)` times the assignment weight.
    pub fn weight(&self) -> f64 {
        self.assignment_weight * self.symbol_prior
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventEnumeration {
    pub events: Vec<WeightedEvent>,
    /// Assignments dropped because `upsilon = 0`.
    pub excluded_degenerate: usize,
}

fn digits(mut index: usize, radix: usize, len: usize, symbols: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for slot in out.iter_mut().rev() {
        *slot = symbols[index % radix];
        index /= radix;
    }
    out
}

/// Enumerates every joint assignment of transmitted symbols (all users), SIC
/// decisions for the layers above `l`, and wrong hypotheses for user `l`.
///
/// Within each `(x_l, x_check)` class the assignments are weighted uniformly;
/// degenerate (`upsilon = 0`) assignments are dropped and counted.
pub fn enumerate_error_events(config: &SystemConfig, l: usize, cap: u128) -> Result<EventEnumeration> {
    config.check_user(l)?;
    let symbols = config.constellation().symbols();
    let m = symbols.len();
    let users = config.users();
    let size = (m as u128).pow(users as u32) * (m as u128).pow((l - 1) as u32) * (m as u128 - 1);
    if size > cap {
        return Err(Error::EnumerationTooLarge { size, cap });
    }

    let mut excluded = 0;
    // (x index, x_check index) -> events of that class
    let mut classes: Vec<Vec<ErrorEvent>> = vec![Vec::new(); m * m];
    for t in 0..m.pow(users as u32) {
        let transmitted = digits(t, m, users, symbols);
        let x_idx = symbols.iter().position(|&s| s == transmitted[l - 1]).unwrap_or(0);
        for d in 0..m.pow((l - 1) as u32) {
            let detected = digits(d, m, l - 1, symbols);
            for (c_idx, &x_check) in symbols.iter().enumerate() {
                if c_idx == x_idx {
                    continue;
                }
                match build_error_event(config, l, &transmitted, &detected, x_check) {
                    Ok(event) => classes[x_idx * m + c_idx].push(event),
                    Err(Error::DegenerateEvent) => excluded += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let prior = 1.0 / m as f64;
    let events = classes
        .into_iter()
        .flat_map(|class| {
            let w = 1.0 / class.len() as f64;
            class.into_iter().map(move |event| WeightedEvent {
                event,
                assignment_weight: w,
                symbol_prior: prior,
            })
        })
        .collect();
    Ok(EventEnumeration {
        events,
        excluded_degenerate: excluded,
    })
}
