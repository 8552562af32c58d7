//! Target densities and their evaluation/sampling contracts.
//!
//! A [`TargetModel`] is either known exactly (Gaussian, Gaussian mixture),
//! known up to a constant (arbitrary log-density on a bounded support), or a
//! Bayesian posterior for the normal model with a normal prior on the mean
//! and an inverse-gamma prior on the variance. All second parameters of
//! normal laws throughout this crate are variances, never standard
//! deviations.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

/// Multivariate normal specification: mean vector and covariance matrix.
///
/// In one dimension the covariance is a single positive scalar interpreted
/// as the variance.
#[derive(Clone)]
pub struct GaussianSpec {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    log_det_cov: f64,
}

impl fmt::Debug for GaussianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaussianSpec")
            .field("mean", &self.mean.as_slice())
            .field("cov", &self.cov.as_slice())
            .finish()
    }
}

impl GaussianSpec {
    /// Build from a mean vector and a symmetric positive-definite covariance.
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::Validation("gaussian dimension must be >= 1".into()));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Validation(format!(
                "covariance must be {d}x{d}, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        for i in 0..d {
            for j in 0..i {
                let a = cov[(i, j)];
                let b = cov[(j, i)];
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Validation("covariance is not symmetric".into()));
                }
            }
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Validation("covariance is not positive definite".into()))?;
        let chol_lower = chol.l();
        let log_det_cov = 2.0 * (0..d).map(|i| chol_lower[(i, i)].ln()).sum::<f64>();
        Ok(GaussianSpec {
            mean: DVector::from_vec(mean),
            cov,
            chol_lower,
            log_det_cov,
        })
    }

    /// One-dimensional normal from mean and variance.
    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean], DMatrix::from_element(1, 1, variance))
    }

    /// Diagonal-covariance normal from per-coordinate variances.
    pub fn diagonal(mean: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(Error::Validation(
                "mean and variance lengths differ".into(),
            ));
        }
        let d = mean.len();
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..d {
            cov[(i, i)] = variances[i];
        }
        Self::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Per-coordinate variances (diagonal of the covariance).
    pub fn variances(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.cov[(i, i)]).collect()
    }

    /// Exact log-density at `x`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let diff = DVector::from_column_slice(x) - &self.mean;
        let w = self
            .chol_lower
            .solve_lower_triangular(&diff)
            .expect("cholesky factor is invertible");
        let quad = w.dot(&w);
        Ok(-0.5 * (d as f64 * LN_2PI + self.log_det_cov + quad))
    }

    /// Draw one point.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z = self.sample_increment(rng);
        (0..self.dim()).map(|i| self.mean[i] + z[i]).collect()
    }

    /// Draw a zero-mean increment with this covariance.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
        let x = &self.chol_lower * z;
        x.as_slice().to_vec()
    }

    /// Deterministic textual form used for seed derivation.
    pub(crate) fn signature(&self) -> String {
        let mut s = String::from("g[");
        for v in self.mean.iter() {
            s.push_str(&format!("{v:.17e},"));
        }
        s.push(';');
        for v in self.cov.iter() {
            s.push_str(&format!("{v:.17e},"));
        }
        s.push(']');
        s
    }
}

/// Finite mixture of Gaussians with positive weights summing to one.
#[derive(Clone, Debug)]
pub struct MixtureSpec {
    components: Vec<(f64, GaussianSpec)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(f64, GaussianSpec)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Validation("mixture needs at least one component".into()));
        }
        let d = components[0].1.dim();
        let mut total = 0.0;
        for (w, g) in &components {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(Error::Validation(format!("mixture weight {w} not in (0, 1]")));
            }
            if g.dim() != d {
                return Err(Error::Validation("mixture components differ in dimension".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(MixtureSpec { components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    pub fn components(&self) -> &[(f64, GaussianSpec)] {
        &self.components
    }

    /// Exact log-density via log-sum-exp over components.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let terms: Result<Vec<f64>> = self
            .components
            .iter()
            .map(|(w, g)| Ok(w.ln() + g.log_density(x)?))
            .collect();
        let terms = terms?;
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, g) in &self.components {
            acc += w;
            if u <= acc {
                return g.sample(rng);
            }
        }
        self.components.last().unwrap().1.sample(rng)
    }

    pub(crate) fn signature(&self) -> String {
        let mut s = String::from("mix[");
        for (w, g) in &self.components {
            s.push_str(&format!("{w:.17e}*{};", g.signature()));
        }
        s.push(']');
        s
    }
}

/// Density known up to a constant: a log-density callable on a bounding box.
///
/// Points outside the box are treated as having zero density, which makes
/// the effective support bounded. The box should be wide enough that the
/// truncated mass is negligible.
#[derive(Clone)]
pub struct UnnormalizedSpec {
    log_density_fn: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    support: Vec<(f64, f64)>,
}

impl fmt::Debug for UnnormalizedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnnormalizedSpec")
            .field("support", &self.support)
            .finish()
    }
}

impl UnnormalizedSpec {
    pub fn new(
        log_density_fn: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        support: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("support hint must name every dimension".into()));
        }
        for (lo, hi) in &support {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Validation("support hint bounds must be finite and ordered".into()));
            }
        }
        Ok(UnnormalizedSpec {
            log_density_fn,
            support,
        })
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn in_support(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.support)
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Log-density up to an additive constant; None outside the support box.
    pub fn log_density(&self, x: &[f64]) -> Option<f64> {
        if self.in_support(x) {
            Some((self.log_density_fn)(x))
        } else {
            None
        }
    }
}

/// Conjugate posterior for i.i.d. normal data: normal prior on the mean,
/// inverse-gamma prior on the variance. The state is `(m, sigma2)` with
/// `sigma2 > 0`.
#[derive(Clone, Debug)]
pub struct ConjugatePosteriorSpec {
    data: Vec<f64>,
    prior_mean: f64,
    prior_variance: f64,
    ig_shape: f64,
    ig_rate: f64,
    sum_x: f64,
}

/// Parameters of the two full conditionals of the posterior: the mean given
/// the variance is normal, the variance given the mean is inverse-gamma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsConditionals {
    /// Normal conditional of the mean: (conditional mean, conditional variance).
    pub mean_given_variance: (f64, f64),
    /// Inverse-gamma conditional of the variance: (shape, rate).
    pub variance_given_mean: (f64, f64),
}

impl ConjugatePosteriorSpec {
    pub fn new(
        data: Vec<f64>,
        prior_mean: f64,
        prior_variance: f64,
        ig_shape: f64,
        ig_rate: f64,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Validation("posterior needs at least one observation".into()));
        }
        if !(prior_variance > 0.0) {
            return Err(Error::Validation("prior variance must be positive".into()));
        }
        if !(ig_shape > 0.0) || !(ig_rate > 0.0) {
            return Err(Error::Validation("inverse-gamma shape and rate must be positive".into()));
        }
        let sum_x = data.iter().sum();
        Ok(ConjugatePosteriorSpec {
            data,
            prior_mean,
            prior_variance,
            ig_shape,
            ig_rate,
            sum_x,
        })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn n_obs(&self) -> usize {
        self.data.len()
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn prior_variance(&self) -> f64 {
        self.prior_variance
    }

    pub fn ig_shape(&self) -> f64 {
        self.ig_shape
    }

    pub fn ig_rate(&self) -> f64 {
        self.ig_rate
    }

    /// Log posterior density up to the normalizing constant; None for
    /// `sigma2 <= 0`.
    pub fn log_density(&self, x: &[f64]) -> Option<f64> {
        let (m, s2) = (x[0], x[1]);
        if !(s2 > 0.0) {
            return None;
        }
        let n = self.data.len() as f64;
        let ssq: f64 = self.data.iter().map(|&xi| (xi - m) * (xi - m)).sum();
        let prior_m = -(m - self.prior_mean).powi(2) / (2.0 * self.prior_variance);
        Some(
            -(n / 2.0 + self.ig_shape + 1.0) * s2.ln() - ssq / (2.0 * s2) - self.ig_rate / s2
                + prior_m,
        )
    }

    /// Full-conditional parameters at the current state.
    ///
    /// The mean conditional uses the current variance; the variance
    /// conditional uses the current mean.
    pub fn gibbs_conditionals(&self, current: (f64, f64)) -> Result<GibbsConditionals> {
        let (m, s2) = current;
        if !(s2 > 0.0) {
            return Err(Error::OutOfSupport(format!("sigma2 = {s2} must be positive")));
        }
        let n = self.data.len() as f64;
        let denom = s2 + n * self.prior_variance;
        let cond_mean = (self.prior_variance * self.sum_x + s2 * self.prior_mean) / denom;
        let cond_var = s2 * self.prior_variance / denom;
        let shape = n / 2.0 + self.ig_shape;
        let ssq: f64 = self.data.iter().map(|&xi| (xi - m) * (xi - m)).sum();
        let rate = 0.5 * ssq + self.ig_rate;
        Ok(GibbsConditionals {
            mean_given_variance: (cond_mean, cond_var),
            variance_given_mean: (shape, rate),
        })
    }

    pub(crate) fn signature(&self) -> String {
        let mut s = format!(
            "nig[m0={:.17e},s0={:.17e},a={:.17e},b={:.17e};",
            self.prior_mean, self.prior_variance, self.ig_shape, self.ig_rate
        );
        for v in &self.data {
            s.push_str(&format!("{v:.17e},"));
        }
        s.push(']');
        s
    }
}

/// Whether the density normalizing constant is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Exact,
    UpToConstant,
}

/// One of the supported target specifications.
#[derive(Clone, Debug)]
pub enum TargetSpec {
    Gaussian(GaussianSpec),
    Mixture(MixtureSpec),
    Unnormalized(UnnormalizedSpec),
    ConjugatePosterior(ConjugatePosteriorSpec),
}

/// A target density together with its dimension and normalization status.
#[derive(Clone, Debug)]
pub struct TargetModel {
    spec: TargetSpec,
    dimension: usize,
    normalization: Normalization,
}

impl TargetModel {
    pub fn gaussian(spec: GaussianSpec) -> Self {
        let dimension = spec.dim();
        TargetModel {
            spec: TargetSpec::Gaussian(spec),
            dimension,
            normalization: Normalization::Exact,
        }
    }

    pub fn mixture(spec: MixtureSpec) -> Self {
        let dimension = spec.dim();
        TargetModel {
            spec: TargetSpec::Mixture(spec),
            dimension,
            normalization: Normalization::Exact,
        }
    }

    pub fn unnormalized(spec: UnnormalizedSpec) -> Self {
        let dimension = spec.dim();
        TargetModel {
            spec: TargetSpec::Unnormalized(spec),
            dimension,
            normalization: Normalization::UpToConstant,
        }
    }

    pub fn conjugate_posterior(spec: ConjugatePosteriorSpec) -> Self {
        TargetModel {
            spec: TargetSpec::ConjugatePosterior(spec),
            dimension: 2,
            normalization: Normalization::UpToConstant,
        }
    }

    /// The 1-d density proportional to `exp(-x^2) * (2 + sin(5x) + sin(2x))`,
    /// restricted to `[-4, 4]` where essentially all of its mass lies.
    pub fn sine_gaussian() -> Self {
        let f = Arc::new(|x: &[f64]| {
            let v = x[0];
            -v * v + (2.0 + (5.0 * v).sin() + (2.0 * v).sin()).ln()
        });
        let spec = UnnormalizedSpec::new(f, vec![(-4.0, 4.0)]).expect("static support is valid");
        TargetModel::unnormalized(spec)
    }

    pub fn spec(&self) -> &TargetSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_exact(&self) -> bool {
        self.normalization == Normalization::Exact
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Log-density, exact when the normalization is exact and up to an
    /// additive constant otherwise; None when `x` is outside the support.
    pub fn log_density_opt(&self, x: &[f64]) -> Result<Option<f64>> {
        self.check_dim(x)?;
        match &self.spec {
            TargetSpec::Gaussian(g) => g.log_density(x).map(Some),
            TargetSpec::Mixture(m) => m.log_density(x).map(Some),
            TargetSpec::Unnormalized(u) => Ok(u.log_density(x)),
            TargetSpec::ConjugatePosterior(p) => Ok(p.log_density(x)),
        }
    }

    /// Log-density; out-of-support points are an error.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.log_density_opt(x)?
            .ok_or_else(|| Error::OutOfSupport(format!("{x:?}")))
    }

    /// Density ratio f(y)/f(x). Unknown constants cancel. Out-of-support `y`
    /// gives 0; out-of-support `x` is an error since the ratio is undefined.
    pub fn density_ratio(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        let lx = self.log_density(x)?;
        match self.log_density_opt(y)? {
            Some(ly) => Ok((ly - lx).exp()),
            None => Ok(0.0),
        }
    }

    /// Draw directly from the target; only exact closed-form targets allow it.
    pub fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match &self.spec {
            TargetSpec::Gaussian(g) => Ok(g.sample(rng)),
            TargetSpec::Mixture(m) => Ok(m.sample(rng)),
            TargetSpec::Unnormalized(_) => Err(Error::NotDirectlySamplable(
                "density known only up to a constant".into(),
            )),
            TargetSpec::ConjugatePosterior(_) => Err(Error::NotDirectlySamplable(
                "posterior density has no direct sampler".into(),
            )),
        }
    }

    /// Deterministic textual form used for seed derivation.
    pub(crate) fn signature(&self) -> String {
        match &self.spec {
            TargetSpec::Gaussian(g) => g.signature(),
            TargetSpec::Mixture(m) => m.signature(),
            TargetSpec::Unnormalized(u) => format!("unnorm[{:?}]", u.support()),
            TargetSpec::ConjugatePosterior(p) => p.signature(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn std_normal() -> TargetModel {
        TargetModel::gaussian(GaussianSpec::scalar(0.0, 1.0).unwrap())
    }

    #[test]
    fn gaussian_log_density_at_mode() {
        let f = std_normal();
        let got = f.log_density(&[0.0]).unwrap();
        assert!((got - (-0.9189385332046727)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_mixture_equals_component() {
        let g = GaussianSpec::scalar(1.5, 2.0).unwrap();
        let mix = TargetModel::mixture(MixtureSpec::new(vec![(1.0, g.clone())]).unwrap());
        for x in [-3.0, 0.0, 0.7, 4.2] {
            let a = mix.log_density(&[x]).unwrap();
            let b = g.log_density(&[x]).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_rejects_nonpositive_variance() {
        let spec = ConjugatePosteriorSpec::new(vec![1.0, 2.0], 0.0, 1.0, 2.0, 2.0).unwrap();
        let t = TargetModel::conjugate_posterior(spec);
        assert!(matches!(
            t.log_density(&[0.5, 0.0]),
            Err(Error::OutOfSupport(_))
        ));
        assert!(matches!(
            t.log_density(&[0.5, -1.0]),
            Err(Error::OutOfSupport(_))
        ));
    }

    #[test]
    fn density_ratio_examples() {
        let f = std_normal();
        assert!((f.density_ratio(&[0.3], &[0.3]).unwrap() - 1.0).abs() < 1e-14);
        let r = f.density_ratio(&[1.0], &[0.0]).unwrap();
        assert!((r - (-0.5_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn density_ratio_posterior_out_of_support_candidate() {
        let spec = ConjugatePosteriorSpec::new(vec![1.0], 0.0, 1.0, 2.0, 2.0).unwrap();
        let t = TargetModel::conjugate_posterior(spec);
        assert_eq!(t.density_ratio(&[0.0, -0.5], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(t.density_ratio(&[0.0, 1.0], &[0.0, -0.5]).is_err());
    }

    #[test]
    fn density_ratio_reciprocal() {
        let mix = TargetModel::mixture(
            MixtureSpec::new(vec![
                (0.4, GaussianSpec::scalar(-8.0, 2.0).unwrap()),
                (0.6, GaussianSpec::scalar(0.0, 6.0).unwrap()),
            ])
            .unwrap(),
        );
        let (y, x) = ([-2.0], [1.3]);
        let fwd = mix.density_ratio(&y, &x).unwrap();
        let bwd = mix.density_ratio(&x, &y).unwrap();
        assert!((fwd * bwd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_direct_means() {
        // CLT tolerance: 3 sigma / sqrt(n) around the law mean.
        let mut rng = rng_from(7);
        let f = std_normal();
        let n = 100_000;
        let mean = (0..n)
            .map(|_| f.sample_direct(&mut rng).unwrap()[0])
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt() * 1.0 + 0.01);

        let mix = TargetModel::mixture(
            MixtureSpec::new(vec![
                (0.4, GaussianSpec::scalar(-8.0, 2.0).unwrap()),
                (0.6, GaussianSpec::scalar(0.0, 6.0).unwrap()),
            ])
            .unwrap(),
        );
        let mean = (0..n)
            .map(|_| mix.sample_direct(&mut rng).unwrap()[0])
            .sum::<f64>()
            / n as f64;
        // mixture mean = 0.4*(-8) + 0.6*0 = -3.2, sd ~ 4.2
        assert!((mean - (-3.2)).abs() < 3.0 * 4.2 / (n as f64).sqrt() + 0.01);
    }

    #[test]
    fn unnormalized_not_directly_samplable() {
        let mut rng = rng_from(1);
        let t = TargetModel::sine_gaussian();
        assert!(matches!(
            t.sample_direct(&mut rng),
            Err(Error::NotDirectlySamplable(_))
        ));
    }

    #[test]
    fn gibbs_conditionals_by_hand() {
        // n=1, x1=2, m0=0, s0^2=1, s2=1: M = (1*2 + 1*0)/(1+1) = 1, S^2 = 1/2.
        let spec = ConjugatePosteriorSpec::new(vec![2.0], 0.0, 1.0, 2.0, 2.0).unwrap();
        let c = spec.gibbs_conditionals((0.0, 1.0)).unwrap();
        assert!((c.mean_given_variance.0 - 1.0).abs() < 1e-14);
        assert!((c.mean_given_variance.1 - 0.5).abs() < 1e-14);

        // shape = n/2 + a with n=4, a=2.
        let spec4 =
            ConjugatePosteriorSpec::new(vec![1.0, 1.0, 1.0, 1.0], 0.0, 1.0, 2.0, 3.0).unwrap();
        let c4 = spec4.gibbs_conditionals((1.0, 1.0)).unwrap();
        assert_eq!(c4.variance_given_mean.0, 4.0);
        // all data equal to the current mean: rate = ig_rate.
        assert_eq!(c4.variance_given_mean.1, 3.0);
    }

    #[test]
    fn gibbs_conditional_mean_is_convex_combination() {
        let spec = ConjugatePosteriorSpec::new(vec![3.0, 5.0, 4.0], 1.0, 2.5, 2.0, 2.0).unwrap();
        let xbar = 4.0;
        for s2 in [0.01, 0.5, 1.0, 10.0, 1e6] {
            let c = spec.gibbs_conditionals((0.0, s2)).unwrap();
            let m = c.mean_given_variance.0;
            assert!(m >= 1.0 - 1e-12 && m <= xbar + 1e-12);
        }
    }

    #[test]
    fn gibbs_conditional_flat_prior_limit() {
        let data = vec![0.4, 1.9, -0.5, 2.2];
        let xbar = data.iter().sum::<f64>() / 4.0;
        let spec = ConjugatePosteriorSpec::new(data, 0.0, 1e12, 2.0, 2.0).unwrap();
        let c = spec.gibbs_conditionals((0.0, 1.7)).unwrap();
        assert!((c.mean_given_variance.0 - xbar).abs() / xbar.abs() < 1e-6);
    }

    #[test]
    fn mixture_log_density_lower_bound() {
        // log f(x) >= log w_j + log f_j(x) for every component j.
        let comps = vec![
            (0.4, GaussianSpec::scalar(-8.0, 2.0).unwrap()),
            (0.6, GaussianSpec::scalar(0.0, 6.0).unwrap()),
        ];
        let mix = MixtureSpec::new(comps.clone()).unwrap();
        for x in [-10.0, -4.0, 0.0, 3.5] {
            let lf = mix.log_density(&[x]).unwrap();
            for (w, g) in &comps {
                assert!(lf >= w.ln() + g.log_density(&[x]).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn spd_validation() {
        assert!(GaussianSpec::scalar(0.0, -1.0).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianSpec::new(vec![0.0, 0.0], bad).is_err());
    }
}
