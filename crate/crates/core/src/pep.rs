//! Pairwise error probabilities, the BER union bound and the diversity slope.
//!
//! For an error event with `D = sqrt(a_l snr) |x_l - x_check|` the pairwise
//! decision at gain `h` fails when the scaled noise crosses `h |upsilon| / (2D)`.
//! Writing `kappa = Lambda |upsilon| / (2D)` with `Lambda` the inverse noise
//! scale, the conditional probability is
//!
//! ```text
//! constructive (upsilon < 0):  Q(1/alpha, (kappa h)^alpha) / 2
//! destructive  (upsilon > 0):  1 - Q(1/alpha, (kappa h)^alpha) / 2
//! ```
//!
//! Averaging over the ordered gain `w_l` gives, per order-statistics term,
//!
//! ```text
//! T1 = Gamma(1/alpha) / delta
//! T2 = (alpha kappa / delta) int_0^inf exp(-(kappa w)^alpha - delta w^2 / 2) dw
//! P  = A_l / (2 Gamma(1/alpha)) sum_i C(l-1, i) (-1)^i [T1 -/+ T2]
//! ```
//!
//! The alternating sum cancels badly once `P` is small, so [`pep_exact`]
//! evaluates the same quantity in the equivalent form
//! `S = alpha / (2 Gamma(1/alpha)) int_0^inf exp(-u^alpha) F_l(u / kappa) du`
//! (`P = S` constructive, `P = 1 - S` destructive) and keeps `T1`, `T2` as
//! per-term diagnostics.

use crate::channel::{OrderStatsTerm, OrderedRayleighEnsemble};
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::ggd::GGNoiseModel;
use crate::noma::{enumerate_error_events, ErrorEvent, SystemConfig, WeightedEvent, DEFAULT_ENUMERATION_CAP};
use crate::specfun::{erfcx, integrate, integrate_semi_infinite, integrate_tail, upper_incomplete_gamma_reg, QuadratureSpec};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Tolerances used when the caller has no preference: purely relative, so
/// deep-tail probabilities keep their significant digits.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::relative(1e-12)
}

/// `kappa = Lambda |upsilon| / (2 sqrt(a_l snr) |x_l - x_check|)`.
fn kappa(event: &ErrorEvent, model: &GGNoiseModel) -> f64 {
    model.lambda() * event.upsilon().abs() / (2.0 * event.amplitude() * event.delta_check().abs())
}

/// Scale of the decision variable `N = 2 sqrt(a_l snr) h x_check_gap n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionNoise {
    /// Inverse amplitude scale of `N / h^2` per unit of `|upsilon|`.
    pub lambda_sub: f64,
    /// Variance of `N`.
    pub sigma_n2: f64,
}

impl DecisionNoise {
    pub fn new(event: &ErrorEvent, model: &GGNoiseModel, h: f64) -> Result<Self> {
        check_gain(h)?;
        let d = event.amplitude() * event.delta_check().abs();
        Ok(Self {
            lambda_sub: model.lambda() / (2.0 * d * h),
            sigma_n2: 4.0 * d * d * h * h * model.sigma2(),
        })
    }
}

fn check_gain(h: f64) -> Result<()> {
    if !(h >= 0.0) {
        return Err(domain("conditional_pep", format!("gain must be non-negative, got {h}")));
    }
    Ok(())
}

/// Pairwise error probability at fixed gain `h`.
pub fn conditional_pep(event: &ErrorEvent, model: &GGNoiseModel, h: f64) -> Result<f64> {
    check_gain(h)?;
    if h == 0.0 {
        return Ok(0.5);
    }
    Ok(conditional_at(kappa(event, model) * h, model.alpha(), event.is_constructive()))
}

fn conditional_at(kh: f64, alpha: f64, constructive: bool) -> f64 {
    let q = if kh == f64::INFINITY {
        0.0
    } else {
        upper_incomplete_gamma_reg(1.0 / alpha, kh.powf(alpha)).unwrap_or(f64::NAN)
    };
    if constructive {
        0.5 * q
    } else {
        1.0 - 0.5 * q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PepMethod {
    Quadrature,
    Averaging,
    ClosedAlpha1,
    ClosedAlpha2,
}

impl PepMethod {
    pub fn name(&self) -> &'static str {
        match self {
            PepMethod::Quadrature => "quadrature",
            PepMethod::Averaging => "averaging",
            PepMethod::ClosedAlpha1 => "closed_alpha1",
            PepMethod::ClosedAlpha2 => "closed_alpha2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepTerm {
    pub term: OrderStatsTerm,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PepResult {
    pub value: f64,
    pub terms: Vec<PepTerm>,
    pub method: PepMethod,
    /// `ln Gamma(1/alpha)`
    pub ln_gamma_shape: f64,
    pub constructive: bool,
}

impl PepResult {
    /// The probability rebuilt from the per-term diagnostics. Agrees with
    /// `value` in absolute terms; the alternating sum loses relative accuracy
    /// when `value` is small.
    pub fn reconstruct(&self) -> f64 {
        let sign = if self.constructive { -1.0 } else { 1.0 };
        let scale = 0.5 / self.ln_gamma_shape.exp();
        self.terms
            .iter()
            .map(|p| scale * p.term.prefactor * p.term.binomial * p.term.sign() * (p.t1 + sign * p.t2))
            .sum()
    }
}

fn order_terms(event: &ErrorEvent) -> Result<(OrderedRayleighEnsemble, Vec<OrderStatsTerm>)> {
    let ensemble = OrderedRayleighEnsemble::new(event.users())?;
    let terms = ensemble.order_terms(event.user())?;
    Ok((ensemble, terms))
}

/// `T2` for one term, by quadrature over `w = s t` with `s` the faster of the
/// two decay scales.
fn t2_by_quadrature(kappa: f64, alpha: f64, delta: f64, quad: &QuadratureSpec) -> Result<f64> {
    let s = (1.0 / kappa).min(1.0 / delta.sqrt());
    let integral = integrate_semi_infinite(
        |t| {
            let w = s * t;
            (-(kappa * w).powf(alpha) - 0.5 * delta * w * w).exp()
        },
        quad,
    )?;
    Ok(alpha * kappa * s / delta * integral.value)
}

/// Breakpoints for the tail-form integrand: `F_l(u / kappa)` switches on near
/// `u = kappa` and `exp(-u^alpha)` is negligible past `cutoff`. Doubling
/// intervals from `min(kappa, 1)` keep every piece within a few decay lengths,
/// so no Kronrod rule can step over the mass.
fn split_points(kappa: f64, alpha: f64) -> Vec<f64> {
    let cutoff = 750f64.powf(1.0 / alpha);
    let mut edges = vec![0.0];
    let mut b = kappa.min(1.0);
    while b < cutoff {
        edges.push(b);
        let next = 2.0 * b;
        if b < kappa && kappa < next && kappa < cutoff {
            edges.push(kappa);
        }
        b = next;
    }
    edges.push(cutoff);
    edges.dedup();
    edges
}

/// Unconditional PEP of `event` averaged over the ordered gain of its user.
pub fn pep_exact(event: &ErrorEvent, model: &GGNoiseModel, quad: &QuadratureSpec) -> Result<PepResult> {
    let (ensemble, terms) = order_terms(event)?;
    let alpha = model.alpha();
    let l = event.user();
    let kappa = kappa(event, model);
    let ln_gamma = model.ln_gamma_inv_alpha();
    let gamma = ln_gamma.exp();

    let f = |u: f64| (-u.powf(alpha)).exp() * ensemble.cdf(l, u / kappa).unwrap_or(f64::NAN);
    let mut pieces = Vec::new();
    let edges = split_points(kappa, alpha);
    for pair in edges.windows(2) {
        pieces.push(integrate(f, pair[0], pair[1], quad)?);
    }
    pieces.push(integrate_tail(f, edges[edges.len() - 1], quad)?);
    let s = alpha / (2.0 * gamma) * pieces.iter().map(|p| p.value).sum::<f64>();
    let constructive = event.is_constructive();
    let value = if constructive { s } else { 1.0 - s };
    if !value.is_finite() {
        return Err(Error::NumericFailure {
            what: "pep_exact",
            estimate: value,
            error_estimate: pieces.iter().map(|p| p.abs_error).sum(),
        });
    }

    let terms = terms
        .into_iter()
        .map(|term| {
            Ok(PepTerm {
                term,
                t1: gamma / term.delta,
                t2: t2_by_quadrature(kappa, alpha, term.delta, quad)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PepResult {
        value,
        terms,
        method: PepMethod::Quadrature,
        ln_gamma_shape: ln_gamma,
        constructive,
    })
}

/// The same probability by direct quadrature of the conditional PEP against
/// the ordered-gain density. Carries no per-term diagnostics.
pub fn pep_by_averaging(event: &ErrorEvent, model: &GGNoiseModel, quad: &QuadratureSpec) -> Result<PepResult> {
    let (ensemble, _) = order_terms(event)?;
    let alpha = model.alpha();
    let l = event.user();
    let kappa = kappa(event, model);
    let constructive = event.is_constructive();
    let s = (1.0 / kappa).min(1.0);
    let f = |t: f64| {
        let w = s * t;
        s * ensemble.pdf(l, w).unwrap_or(f64::NAN) * conditional_at(kappa * w, alpha, constructive)
    };
    let head = integrate(f, 0.0, 1.0, quad)?;
    let tail = integrate_tail(f, 1.0, quad)?;
    Ok(PepResult {
        value: head.value + tail.value,
        terms: Vec::new(),
        method: PepMethod::Averaging,
        ln_gamma_shape: model.ln_gamma_inv_alpha(),
        constructive,
    })
}

/// `tau = kappa / sqrt(2 delta)` for one order-statistics term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerm {
    pub tau: f64,
}

impl ClosedFormTerm {
    pub fn new(event: &ErrorEvent, model: &GGNoiseModel, term: &OrderStatsTerm) -> Self {
        Self {
            tau: kappa(event, model) / (2.0 * term.delta).sqrt(),
        }
    }
}

/// `T2 / T1` in closed form, together with its complement `1 - T2 / T1`
/// evaluated without cancellation.
fn closed_ratio(alpha: f64, tau: f64) -> (f64, f64) {
    if alpha == 2.0 {
        let r = (4.0 * tau * tau + 1.0).sqrt();
        (2.0 * tau / r, 1.0 / (r * (r + 2.0 * tau)))
    } else if tau <= 8.0 {
        let g = tau * SQRT_PI * erfcx(tau);
        (g, 1.0 - g)
    } else {
        // 1 - tau sqrt(pi) erfcx(tau) ~ sum_{n>=1} (-1)^{n+1} (2n-1)!! / (2 tau^2)^n
        let inv = 1.0 / (2.0 * tau * tau);
        let mut term = inv;
        let mut sum = inv;
        for n in 2..40 {
            let next = -term * f64::from(2 * n - 1) * inv;
            if next.abs() >= term.abs() || next.abs() < 1e-18 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        (1.0 - sum, sum)
    }
}

/// Below this `kappa^2 / delta` the per-term closed forms are summed
/// directly; above it the alternating sum is expanded in `delta / kappa^2`.
/// The Laplacian expansion is only asymptotic (truncation error near
/// `exp(-kappa^2 / (2 delta))`) and switches later.
fn series_threshold(alpha: f64) -> f64 {
    if alpha == 2.0 {
        50.0
    } else {
        80.0
    }
}

/// `M_m = sum_i (-1)^i C(k, i) (d0 + i)^m` for `m = 0..=max_m`, built from
/// `(-1)^k k! sum_j C(m, j) d0^(m-j) S(j, k)` (Stirling numbers of the second
/// kind) so no cancellation occurs.
fn alternating_moments(d0: f64, k: usize, max_m: usize) -> Vec<f64> {
    // stirling[j] = S(j, k), filled column by column up to k
    let mut column = vec![0.0; max_m + 1];
    column[0] = 1.0;
    for kk in 1..=k {
        let mut next = vec![0.0; max_m + 1];
        for j in 1..=max_m {
            next[j] = kk as f64 * next[j - 1] + column[j - 1];
        }
        column = next;
    }
    let k_fact: f64 = (1..=k).map(|v| v as f64).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    (0..=max_m)
        .map(|m| {
            let sum: f64 = (k..=m)
                .map(|j| crate::channel::binomial(m, j) * d0.powi((m - j) as i32) * column[j])
                .sum();
            sign * k_fact * sum
        })
        .collect()
}

/// `(A_l / 2) sum_i C(l-1, i) (-1)^i (1 - g(tau_i)) / delta_i` via
/// `(1 - g) / delta = sum_n s_n delta^(n-1) / r^n`, with
/// `alpha = 2`: `s_n = -C(-1/2, n)`, `r = 2 kappa^2` (convergent) and
/// `alpha = 1`: `s_n = (-1)^(n+1) (2n-1)!!`, `r = kappa^2` (asymptotic).
fn constructive_series(alpha: f64, kappa: f64, terms: &[OrderStatsTerm]) -> f64 {
    const MAX_N: usize = 80;
    let first = &terms[0];
    let k = terms.len() - 1;
    let moments = alternating_moments(first.delta, k, MAX_N);
    let r = if alpha == 2.0 { 2.0 * kappa * kappa } else { kappa * kappa };
    let mut coeff = 1.0; // |s_n| / r^n, updated incrementally
    let mut sum = 0.0;
    let mut previous = f64::INFINITY;
    for n in 1..=MAX_N {
        coeff *= if alpha == 2.0 {
            (n as f64 - 0.5) / n as f64 / r
        } else {
            (2 * n - 1) as f64 / r
        };
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * coeff * moments[n - 1];
        if n > k {
            if alpha == 1.0 && term.abs() >= previous {
                break;
            }
            previous = term.abs();
        }
        sum += term;
        if n > k + 1 && term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    0.5 * first.prefactor * sum
}

/// Closed-form PEP for Laplacian (`alpha = 1`) and Gaussian (`alpha = 2`) noise.
///
/// The destructive case uses `A_l sum_i C(l-1, i) (-1)^i / delta_i = 1`, so
/// both cases reduce to the constructive combination `C`: `P = C` or `1 - C`.
pub fn pep_closed_form(event: &ErrorEvent, model: &GGNoiseModel) -> Result<PepResult> {
    let alpha = model.alpha();
    let method = if alpha == 1.0 {
        PepMethod::ClosedAlpha1
    } else if alpha == 2.0 {
        PepMethod::ClosedAlpha2
    } else {
        return Err(Error::UnsupportedAlpha(alpha));
    };
    let (_, terms) = order_terms(event)?;
    let constructive = event.is_constructive();
    let ln_gamma = model.ln_gamma_inv_alpha();
    let gamma = ln_gamma.exp();
    let kappa = kappa(event, model);
    let mut direct = 0.0;
    let mut diagnostics = Vec::with_capacity(terms.len());
    for term in &terms {
        let tau = ClosedFormTerm::new(event, model, term).tau;
        let (g, complement) = closed_ratio(alpha, tau);
        direct += 0.5 * term.prefactor * term.binomial * term.sign() / term.delta * complement;
        diagnostics.push(PepTerm {
            term: *term,
            t1: gamma / term.delta,
            t2: gamma * g / term.delta,
        });
    }
    let largest_delta = terms[terms.len() - 1].delta;
    let c = if terms.len() > 1 && kappa * kappa / largest_delta >= series_threshold(alpha) {
        constructive_series(alpha, kappa, &terms)
    } else {
        direct
    };
    Ok(PepResult {
        value: if constructive { c } else { 1.0 - c },
        terms: diagnostics,
        method,
        ln_gamma_shape: ln_gamma,
        constructive,
    })
}

/// Smallest `k` (up to 64) with `k alpha / 2` an integer, and that integer.
/// Only rational shaping parameters admit one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeijerOracleSpec {
    pub k: u32,
    pub t: u32,
}

impl MeijerOracleSpec {
    pub fn for_alpha(alpha: f64) -> Option<Self> {
        (1..=64u32).find_map(|k| {
            let t = f64::from(k) * alpha / 2.0;
            (t >= 1.0 && (t - t.round()).abs() < 1e-12).then(|| Self { k, t: t.round() as u32 })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionContribution {
    pub event: WeightedEvent,
    /// Bits in error between `x_l` and `x_check`.
    pub bit_errors: u32,
    pub pep: f64,
}

impl UnionContribution {
    pub fn weighted(&self) -> f64 {
        self.event.weight() * f64::from(self.bit_errors) * self.pep
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionBoundResult {
    pub p_ub: f64,
    /// Bits per symbol.
    pub q: u32,
    pub contributions: Vec<UnionContribution>,
    pub excluded_degenerate: usize,
}

/// BER union bound for user `l` over every enumerated error event.
pub fn union_bound(
    config: &SystemConfig,
    model: &GGNoiseModel,
    l: usize,
    quad: &QuadratureSpec,
    exec: Execution,
) -> Result<UnionBoundResult> {
    let enumeration = enumerate_error_events(config, l, DEFAULT_ENUMERATION_CAP)?;
    let constellation = config.constellation();
    let contributions = exec.try_map(&enumeration.events, |weighted| {
        let pep = pep_exact(&weighted.event, model, quad)?.value;
        Ok(UnionContribution {
            event: weighted.clone(),
            bit_errors: constellation.bit_errors(weighted.event.x(), weighted.event.x_check()),
            pep,
        })
    })?;
    let q = constellation.bits_per_symbol();
    let p_ub = contributions.iter().map(UnionContribution::weighted).sum::<f64>() / f64::from(q);
    Ok(UnionBoundResult {
        p_ub,
        q,
        contributions,
        excluded_degenerate: enumeration.excluded_degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityEstimate {
    pub d_s: f64,
    /// `(low, high)` in dB.
    pub snr_window: (f64, f64),
}

/// Negative log-log slope of a PEP curve between the two window points.
/// `curve` holds `(snr_db, pep)` pairs.
pub fn diversity_order(curve: &[(f64, f64)], window: (f64, f64)) -> Result<DiversityEstimate> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(domain("diversity_order", format!("window must be increasing, got {lo}..{hi}")));
    }
    let lookup = |db: f64| {
        curve
            .iter()
            .find(|(s, _)| (s - db).abs() < 1e-9)
            .map(|&(_, p)| p)
            .ok_or_else(|| domain("diversity_order", format!("no curve point at {db} dB")))
    };
    let (p_lo, p_hi) = (lookup(lo)?, lookup(hi)?);
    for p in [p_lo, p_hi] {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NumericFailure {
                what: "diversity_order",
                estimate: p,
                error_estimate: f64::NAN,
            });
        }
    }
    let decades = (hi - lo) / 10.0;
    Ok(DiversityEstimate {
        d_s: -(p_hi.log10() - p_lo.log10()) / decades,
        snr_window: window,
    })
}

/// Analytic PEP of the canonical event of user `l` at each SNR (dB).
pub fn canonical_curve(
    config: &SystemConfig,
    l: usize,
    snr_db: &[f64],
    quad: &QuadratureSpec,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let model = config.noise_model()?;
    exec.try_map(snr_db, |&db| {
        let event = crate::noma::canonical_event(&config.with_snr_db(db)?, l)?;
        Ok((db, pep_exact(&event, &model, quad)?.value))
    })
}
