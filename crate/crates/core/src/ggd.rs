//! Additive white generalized Gaussian noise.
//!
//! The density is `alpha * Lambda / (2 Gamma(1/alpha)) * exp(-(Lambda |n|)^alpha)`
//! with `Lambda = sqrt(Lambda0 / sigma2)` and `Lambda0 = Gamma(3/alpha) / Gamma(1/alpha)`,
//! so that the variance is exactly `sigma2`. `alpha = 2` is Gaussian and
//! `alpha = 1` is Laplacian.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Result};
use crate::specfun::{ln_gamma, lower_incomplete_gamma_reg};

/// `Gamma(3/alpha) / Gamma(1/alpha)`, evaluated as a difference of log-gammas.
pub fn lambda0(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(domain("lambda0", format!("alpha must be positive, got {alpha}")));
    }
    Ok((ln_gamma(3.0 / alpha)? - ln_gamma(1.0 / alpha)?).exp())
}

/// Zero-mean generalized Gaussian noise with shaping parameter `alpha` and
/// variance `sigma2`. Immutable once built.
#[derive(Debug, Clone, Copy)]
pub struct GGNoiseModel {
    alpha: f64,
    sigma2: f64,
    lambda0: f64,
    lambda: f64,
    ln_gamma_inv_alpha: f64,
    magnitude: Gamma<f64>,
}

impl GGNoiseModel {
    pub fn new(alpha: f64, sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(domain("GGNoiseModel", format!("variance must be positive, got {sigma2}")));
        }
        let lambda0 = lambda0(alpha)?;
        let magnitude = Gamma::new(1.0 / alpha, 1.0)
            .map_err(|e| domain("GGNoiseModel", format!("gamma sampler: {e}")))?;
        Ok(Self {
            alpha,
            sigma2,
            lambda0,
            lambda: (lambda0 / sigma2).sqrt(),
            ln_gamma_inv_alpha: ln_gamma(1.0 / alpha)?,
            magnitude,
        })
    }

    /// Unit-variance noise.
    pub fn normalized(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Inverse scale `Lambda`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ln Gamma(1/alpha)`.
    pub fn ln_gamma_inv_alpha(&self) -> f64 {
        self.ln_gamma_inv_alpha
    }

    pub fn pdf(&self, n: f64) -> f64 {
        let norm = (self.alpha * self.lambda / 2.0).ln() - self.ln_gamma_inv_alpha;
        (norm - (self.lambda * n.abs()).powf(self.alpha)).exp()
    }

    /// `F(n) = 1/2 + sign(n)/2 * P(1/alpha, (Lambda |n|)^alpha)`.
    pub fn cdf(&self, n: f64) -> f64 {
        let z = (self.lambda * n.abs()).powf(self.alpha);
        let p = lower_incomplete_gamma_reg(1.0 / self.alpha, z).unwrap_or(f64::NAN);
        0.5 + 0.5 * p.copysign(n)
    }

    /// Exact draw: `S * G^(1/alpha) / Lambda` with `G ~ Gamma(1/alpha, 1)` and
    /// an independent fair sign `S`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = self.magnitude.sample(rng);
        let x = g.powf(1.0 / self.alpha) / self.lambda;
        if rng.random::<bool>() {
            x
        } else {
            -x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate, integrate_semi_infinite, integrate_tail, QuadratureSpec};
    use crate::testing::{chi_square, ks_distance, CHI2_999_DOF49};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 2_000,
        }
    }

    #[test]
    fn lambda0_values() {
        assert!((lambda0(2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((lambda0(1.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((lambda0(0.5).unwrap() - 120.0).abs() < 1e-10);
        assert!(lambda0(0.0).is_err());
        assert!(lambda0(-1.0).is_err());
        let m = GGNoiseModel::normalized(0.8).unwrap();
        let direct = (ln_gamma(3.0 / 0.8).unwrap() - ln_gamma(1.25).unwrap()).exp();
        assert_eq!(m.lambda0(), direct);
    }

    #[test]
    fn pdf_special_cases() {
        let gauss = GGNoiseModel::normalized(2.0).unwrap();
        assert!((gauss.pdf(0.0) - 0.398_942_280_4).abs() < 1e-10);
        let x: f64 = 1.3;
        let normal = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((gauss.pdf(x) - normal).abs() < 1e-15);

        let laplace = GGNoiseModel::normalized(1.0).unwrap();
        assert!((laplace.pdf(0.0) - 0.707_106_781_2).abs() < 1e-10);

        for &a in &[0.5, 1.0, 2.0, 3.3] {
            let m = GGNoiseModel::new(a, 0.7).unwrap();
            for &n in &[0.1, 0.9, 2.5] {
                assert_eq!(m.pdf(n), m.pdf(-n));
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(GGNoiseModel::new(0.0, 1.0).is_err());
        assert!(GGNoiseModel::new(2.0, 0.0).is_err());
        assert!(GGNoiseModel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn normalization_and_variance_by_quadrature() {
        for &a in &[0.5, 1.0, 2.0, 4.0] {
            let m = GGNoiseModel::normalized(a).unwrap();
            let mass = 2.0 * integrate_semi_infinite(|n| m.pdf(n), &tight()).unwrap().value;
            assert!((mass - 1.0).abs() < 1e-9, "alpha = {a}: mass {mass}");
            let var = 2.0 * integrate_semi_infinite(|n| n * n * m.pdf(n), &tight()).unwrap().value;
            assert!((var - 1.0).abs() < 1e-8, "alpha = {a}: variance {var}");
        }
        let m = GGNoiseModel::new(1.5, 0.5).unwrap();
        let var = 2.0 * integrate_semi_infinite(|n| n * n * m.pdf(n), &tight()).unwrap().value;
        assert!((var - 0.5).abs() < 1e-8);
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for &a in &[0.5, 1.0, 2.0] {
            let m = GGNoiseModel::normalized(a).unwrap();
            for &n in &[-2.0, -0.3, 0.0, 0.4, 1.7] {
                let head = integrate_tail(|t| m.pdf(-t), -n, &tight()).unwrap().value;
                assert!((m.cdf(n) - head).abs() < 1e-10, "alpha = {a}, n = {n}");
            }
        }
    }

    #[test]
    fn sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gauss = GGNoiseModel::normalized(2.0).unwrap();
        let n = 1_000_000;
        let var: f64 = (0..n).map(|_| gauss.sample(&mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&var), "variance {var}");

        let laplace = GGNoiseModel::normalized(1.0).unwrap();
        let mean_abs: f64 = (0..n).map(|_| laplace.sample(&mut rng).abs()).sum::<f64>() / n as f64;
        let expected = 1.0 / 2f64.sqrt();
        assert!(((mean_abs - expected) / expected).abs() < 0.01, "E|X| {mean_abs}");
    }

    #[test]
    fn sampler_is_deterministic_for_a_seed() {
        let m = GGNoiseModel::normalized(0.7).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| m.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn histogram_matches_density() {
        let n = 1_000_000;
        for (k, &a) in [0.5, 1.0, 2.0].iter().enumerate() {
            let m = GGNoiseModel::normalized(a).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
            // 48 equal-width interior bins on [-3, 3] plus two tails.
            let edges: Vec<f64> = (0..=48).map(|i| -3.0 + 6.0 * f64::from(i) / 48.0).collect();
            let mut counts = vec![0u64; 50];
            for _ in 0..n {
                let x = m.sample(&mut rng);
                let bin = if x < edges[0] {
                    0
                } else if x >= edges[48] {
                    49
                } else {
                    edges.partition_point(|&e| e <= x)
                };
                counts[bin] += 1;
            }
            let tail = integrate_tail(|t| m.pdf(t), 3.0, &tight()).unwrap().value;
            let mut probs = vec![tail];
            for w in edges.windows(2) {
                probs.push(integrate(|t| m.pdf(t), w[0], w[1], &tight()).unwrap().value);
            }
            probs.push(tail);
            let stat = chi_square(&counts, &probs);
            assert!(stat < CHI2_999_DOF49, "alpha = {a}: chi-square {stat}");
        }
    }

    #[test]
    fn gamma_transform_matches_gamma_cdf() {
        for (k, &a) in [0.5, 1.0, 2.0].iter().enumerate() {
            let m = GGNoiseModel::normalized(a).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64);
            let mut g: Vec<f64> = (0..1_000_000)
                .map(|_| (m.lambda() * m.sample(&mut rng).abs()).powf(a))
                .collect();
            let d = ks_distance(&mut g, |x| lower_incomplete_gamma_reg(1.0 / a, x).unwrap());
            assert!(d < 0.002, "alpha = {a}: KS {d}");
        }
    }
}
