//! Ordered Rayleigh fading.
//!
//! Each of the `L` users sees an independent Rayleigh envelope with density
//! `w exp(-w^2 / 2)` (so `E[w^2] = 2`); users are indexed by ascending gain and
//! user `l` sees the `l`-th smallest draw. Its density is
//!
//! ```text
//! f_l(w) = A_l w sum_{i=0}^{l-1} C(l-1, i) (-1)^i exp(-delta_{l,i} w^2 / 2)
//! A_l = L! / ((l-1)! (L-l)!),   delta_{l,i} = L - l + 1 + i
//! ```

use rand::Rng;

use crate::error::{Error, Result};

/// `n choose k` in floating point; exact for the small arguments used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// One summand of the order-statistics expansion. The sign `(-1)^i` is left
/// to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatsTerm {
    pub l: usize,
    pub i: usize,
    /// `A_l`
    pub prefactor: f64,
    /// `C(l-1, i)`
    pub binomial: f64,
    /// `delta_{l,i}`
    pub delta: f64,
}

impl OrderStatsTerm {
    pub fn sign(&self) -> f64 {
        if self.i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderedRayleighEnsemble {
    users: usize,
}

impl OrderedRayleighEnsemble {
    pub fn new(users: usize) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidConfig("at least one user is required".into()));
        }
        Ok(Self { users })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    fn check(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.users {
            return Err(Error::UserOutOfRange {
                index: l,
                users: self.users,
            });
        }
        Ok(())
    }

    /// `A_l = L C(L-1, l-1)`.
    pub fn prefactor(&self, l: usize) -> Result<f64> {
        self.check(l)?;
        Ok(self.users as f64 * binomial(self.users - 1, l - 1))
    }

    /// The `l` terms `i = 0..l-1` of the density expansion for user `l`.
    pub fn order_terms(&self, l: usize) -> Result<Vec<OrderStatsTerm>> {
        let prefactor = self.prefactor(l)?;
        Ok((0..l)
            .map(|i| OrderStatsTerm {
                l,
                i,
                prefactor,
                binomial: binomial(l - 1, i),
                delta: (self.users - l + 1 + i) as f64,
            })
            .collect())
    }

    /// Density of the `l`-th smallest gain.
    ///
    /// The alternating sum collapses by the binomial theorem to
    /// `A_l w e^{-(L-l+1) w^2/2} (1 - e^{-w^2/2})^{l-1}`, which is evaluated
    /// instead so the result is never negative.
    pub fn pdf(&self, l: usize, w: f64) -> Result<f64> {
        self.check(l)?;
        if w < 0.0 {
            return Ok(0.0);
        }
        let half_sq = 0.5 * w * w;
        let below = -(-half_sq).exp_m1();
        let prefactor = self.users as f64 * binomial(self.users - 1, l - 1);
        Ok(prefactor
            * w
            * (-((self.users - l + 1) as f64) * half_sq).exp()
            * below.powi((l - 1) as i32))
    }

    /// `Pr(w_l <= w)`: at least `l` of the `L` independent gains fall below `w`.
    pub fn cdf(&self, l: usize, w: f64) -> Result<f64> {
        self.check(l)?;
        if w <= 0.0 {
            return Ok(0.0);
        }
        let half_sq = 0.5 * w * w;
        let p = -(-half_sq).exp_m1();
        let q = (-half_sq).exp();
        let users = self.users;
        Ok((l..=users)
            .map(|k| binomial(users, k) * p.powi(k as i32) * q.powi((users - k) as i32))
            .sum::<f64>()
            .min(1.0))
    }

    /// Fills `gains` (length `L`) with sorted Rayleigh draws.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, gains: &mut [f64]) {
        debug_assert_eq!(gains.len(), self.users);
        for g in gains.iter_mut() {
            *g = rayleigh(rng);
        }
        gains.sort_unstable_by(f64::total_cmp);
    }

    /// `L` independent gains, ascending.
    pub fn sample_ordered_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut gains = vec![0.0; self.users];
        self.sample_into(rng, &mut gains);
        gains
    }
}

/// Inverse-CDF draw from `w exp(-w^2/2)`.
fn rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (-2.0 * u.ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate, integrate_semi_infinite, integrate_tail, QuadratureSpec};
    use crate::testing::{chi_square, CHI2_999_DOF49};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 1_000,
        }
    }

    /// The density as the alternating sum over `order_terms`.
    fn pdf_by_terms(ens: &OrderedRayleighEnsemble, l: usize, w: f64) -> f64 {
        ens.order_terms(l)
            .unwrap()
            .iter()
            .map(|t| t.prefactor * w * t.sign() * t.binomial * (-t.delta * w * w / 2.0).exp())
            .sum()
    }

    #[test]
    fn order_terms_examples() {
        let three = OrderedRayleighEnsemble::new(3).unwrap();
        let t = three.order_terms(1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].prefactor, t[0].delta), (3.0, 3.0));

        let t = three.order_terms(2).unwrap();
        assert_eq!(t[0].prefactor, 6.0);
        assert_eq!(t.iter().map(|t| t.delta).collect::<Vec<_>>(), vec![2.0, 3.0]);

        let one = OrderedRayleighEnsemble::new(1).unwrap();
        let t = one.order_terms(1).unwrap();
        assert_eq!((t[0].prefactor, t[0].delta), (1.0, 1.0));

        assert!(matches!(three.order_terms(0), Err(Error::UserOutOfRange { .. })));
        assert!(matches!(three.order_terms(4), Err(Error::UserOutOfRange { .. })));
        assert!(OrderedRayleighEnsemble::new(0).is_err());
    }

    #[test]
    fn prefactor_is_multinomial() {
        // L! / ((l-1)! (L-l)!)
        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        for users in 1..=8 {
            let ens = OrderedRayleighEnsemble::new(users).unwrap();
            for l in 1..=users {
                let expected = fact(users) / (fact(l - 1) * fact(users - l));
                assert_eq!(ens.prefactor(l).unwrap(), expected);
            }
        }
    }

    #[test]
    fn single_user_is_plain_rayleigh() {
        let ens = OrderedRayleighEnsemble::new(1).unwrap();
        for &w in &[0.0f64, 0.2, 1.0, 2.5] {
            assert!((ens.pdf(1, w).unwrap() - w * (-w * w / 2.0).exp()).abs() < 1e-16);
        }
    }

    #[test]
    fn factored_density_matches_alternating_sum() {
        for users in 1..=6 {
            let ens = OrderedRayleighEnsemble::new(users).unwrap();
            for l in 1..=users {
                for k in 0..=80 {
                    let w = f64::from(k) * 0.05;
                    let alt = pdf_by_terms(&ens, l, w);
                    let f = ens.pdf(l, w).unwrap();
                    assert!((alt - f).abs() < 1e-12, "L={users} l={l} w={w}");
                    assert!(alt >= -1e-12);
                    assert!(f >= 0.0);
                }
            }
        }
    }

    #[test]
    fn densities_are_normalized() {
        for users in 1..=6 {
            let ens = OrderedRayleighEnsemble::new(users).unwrap();
            for l in 1..=users {
                let mass = integrate_semi_infinite(|w| ens.pdf(l, w).unwrap(), &tight()).unwrap().value;
                assert!((mass - 1.0).abs() < 1e-9, "L={users} l={l}: {mass}");
            }
        }
    }

    #[test]
    fn mixture_of_order_statistics_is_the_parent() {
        let ens = OrderedRayleighEnsemble::new(3).unwrap();
        for k in 0..50 {
            let w = f64::from(k) * 0.1;
            let mix: f64 = (1..=3).map(|l| ens.pdf(l, w).unwrap()).sum::<f64>() / 3.0;
            assert!((mix - w * (-w * w / 2.0).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn cdf_integrates_the_density() {
        let ens = OrderedRayleighEnsemble::new(4).unwrap();
        for l in 1..=4 {
            for &w in &[0.05, 0.5, 1.0, 2.0, 4.0] {
                let head = integrate(|t| ens.pdf(l, t).unwrap(), 0.0, w, &tight()).unwrap().value;
                assert!((ens.cdf(l, w).unwrap() - head).abs() < 1e-12, "l={l} w={w}");
            }
        }
        // Small-gain behaviour: F_l(w) ~ C(L, l) (w^2/2)^l, no cancellation.
        let w: f64 = 1e-4;
        let approx = binomial(4, 3) * (w * w / 2.0).powi(3);
        assert!(((ens.cdf(3, w).unwrap() - approx) / approx).abs() < 1e-7);
    }

    #[test]
    fn samples_are_sorted_and_reproducible() {
        let ens = OrderedRayleighEnsemble::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let g = ens.sample_ordered_gains(&mut rng);
            assert!(g.windows(2).all(|p| p[0] <= p[1]));
        }
        let a = ens.sample_ordered_gains(&mut ChaCha8Rng::seed_from_u64(9));
        let b = ens.sample_ordered_gains(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn single_user_second_moment() {
        let ens = OrderedRayleighEnsemble::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let m2 = (0..n).map(|_| ens.sample_ordered_gains(&mut rng)[0].powi(2)).sum::<f64>() / n as f64;
        assert!(((m2 - 2.0) / 2.0).abs() < 0.01, "E[w^2] = {m2}");
    }

    #[test]
    fn middle_order_statistic_histogram() {
        let ens = OrderedRayleighEnsemble::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let edges: Vec<f64> = (0..=49).map(|i| 3.0 * f64::from(i) / 49.0).collect();
        let mut counts = vec![0u64; 50];
        let mut gains = [0.0; 3];
        for _ in 0..1_000_000 {
            ens.sample_into(&mut rng, &mut gains);
            let w = gains[1];
            let bin = edges.partition_point(|&e| e <= w).clamp(1, 50) - 1;
            counts[bin] += 1;
        }
        let pdf = |t: f64| ens.pdf(2, t).unwrap();
        let mut probs: Vec<f64> = edges
            .windows(2)
            .map(|e| integrate(pdf, e[0], e[1], &tight()).unwrap().value)
            .collect();
        probs.push(integrate_tail(pdf, 3.0, &tight()).unwrap().value);
        let stat = chi_square(&counts, &probs);
        assert!(stat < CHI2_999_DOF49, "chi-square {stat}");
    }
}
