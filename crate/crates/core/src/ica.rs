//! FastICA estimation of the unmixing matrix.
//!
//! Data are centered, whitened with the symmetric (ZCA) whitening matrix and
//! then rotated by the symmetric fixed-point iteration, updating all
//! components jointly and re-orthogonalizing after each step. The returned
//! unmixing matrix maps centered observations to unit-variance components.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{CenteringInfo, DataMatrix};
use crate::error::{LingamError, Result};
use crate::seed::{derive_seed, rng_from};
use crate::stats::covariance_centered;

/// Relative eigenvalue floor below which the covariance is treated as
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// Components whose non-gaussianity z-score falls below this are
/// indistinguishable from gaussian at the given sample size.
const NONGAUSSIAN_Z_THRESHOLD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contrast {
    /// `G(u) = log cosh u`, robust for both sub- and super-gaussian sources.
    #[default]
    LogCosh,
    /// `G(u) = u^4 / 4` (kurtosis based).
    Cubic,
}

impl Contrast {
    /// First and second derivatives of the contrast, applied in place.
    fn derivatives(self, u: f64) -> (f64, f64) {
        match self {
            Contrast::LogCosh => {
                let t = fast_tanh(u);
                (t, 1.0 - t * t)
            }
            Contrast::Cubic => (u * u * u, 3.0 * u * u),
        }
    }

    fn value(self, u: f64) -> f64 {
        match self {
            Contrast::LogCosh => {
                let a = u.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }
            Contrast::Cubic => 0.25 * u.powi(4),
        }
    }

    /// Mean and variance of `G(v)` for standard gaussian `v`.
    fn gaussian_moments(self) -> (f64, f64) {
        match self {
            Contrast::LogCosh => (0.374_567_207_491_438_07, 0.189_767_449_172_365_43),
            Contrast::Cubic => (0.75, 6.0),
        }
    }
}

/// `tanh` through `expm1`, noticeably cheaper than the libm routine.
#[inline]
fn fast_tanh(u: f64) -> f64 {
    if u.abs() > 20.0 {
        return u.signum();
    }
    let e = (2.0 * u).exp_m1();
    e / (e + 2.0)
}

impl fmt::Display for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Contrast::LogCosh => "log-cosh",
            Contrast::Cubic => "cubic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcaConfig {
    pub contrast: Contrast,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self {
            contrast: Contrast::LogCosh,
            max_iterations: 1000,
            tolerance: 1e-6,
            restarts: 3,
            seed: 0,
        }
    }
}

impl IcaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(LingamError::InvalidConfig(format!(
                "ICA tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(LingamError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(LingamError::InvalidConfig("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Square, invertible estimate of `W = A^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnmixingMatrix {
    w: DMatrix<f64>,
}

impl UnmixingMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(LingamError::DimensionMismatch(format!(
                "unmixing matrix must be square and non-empty, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(LingamError::InvalidData("non-finite unmixing matrix".into()));
        }
        let cond = condition_number(&w);
        if !cond.is_finite() {
            return Err(LingamError::SingularStructure("unmixing matrix is singular".into()));
        }
        if cond > 1e8 {
            log::warn!("unmixing matrix is ill-conditioned (condition number {cond:.3e})");
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    /// The mixing matrix `A = W^-1`.
    pub fn mixing(&self) -> DMatrix<f64> {
        self.w
            .clone()
            .try_inverse()
            .expect("invertibility checked at construction")
    }

    /// Independent components `S = W X` for centered data.
    pub fn components(&self, centered: &DataMatrix) -> DMatrix<f64> {
        &self.w * centered.values()
    }
}

pub(crate) fn condition_number(w: &DMatrix<f64>) -> f64 {
    let sv = w.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub contrast: f64,
}

/// Convergence summary of a FastICA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcaReport {
    pub contrast: Contrast,
    pub restarts: Vec<RestartReport>,
    /// Index of the restart whose estimate was returned.
    pub chosen: usize,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Per-component z-score of the contrast against its gaussian value.
    pub nongaussianity: Vec<f64>,
    /// Set when some component cannot be told apart from a gaussian, in
    /// which case the rotation (and so the estimate) is not identified.
    pub low_nongaussianity: bool,
}

impl fmt::Display for IcaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "fastica contrast={} converged={} restart={} iterations={} residual={:.3e}",
            self.contrast, self.converged, self.chosen, self.iterations, self.residual
        )?;
        for (i, r) in self.restarts.iter().enumerate() {
            writeln!(
                f,
                "  restart {i}: iterations={} converged={} residual={:.3e} contrast={:.6e}",
                r.iterations, r.converged, r.residual, r.contrast
            )?;
        }
        let z: Vec<String> = self.nongaussianity.iter().map(|z| format!("{z:.2}")).collect();
        write!(f, "  nongaussianity z = [{}]", z.join(", "))?;
        if self.low_nongaussianity {
            write!(f, " (low: estimate unreliable)")?;
        }
        Ok(())
    }
}

/// Subtracts each variable's sample mean.
pub fn center(data: &DataMatrix) -> Result<(DataMatrix, CenteringInfo)> {
    let means = data.row_means();
    let mut values = data.values().clone();
    for (mut row, &mu) in values.row_iter_mut().zip(means.iter()) {
        row.add_scalar_mut(-mu);
    }
    // A second pass removes the rounding residue of the first one.
    let residue = values.column_mean();
    for (mut row, &r) in values.row_iter_mut().zip(residue.iter()) {
        row.add_scalar_mut(-r);
    }
    let row_means = means.iter().zip(residue.iter()).map(|(m, r)| m + r).collect();
    let centered = DataMatrix::new(values, data.names().to_vec())?;
    Ok((centered, CenteringInfo { row_means }))
}

/// Symmetric whitening `K = E diag(1/sqrt(lambda)) E^T` of the sample
/// covariance (normalized by `1/m`).
pub fn whiten(centered: &DataMatrix) -> Result<(DataMatrix, WhiteningTransform)> {
    let x = centered.values();
    let mut shifted = x.clone();
    for (mut row, mu) in shifted.row_iter_mut().zip(x.column_mean().iter()) {
        row.add_scalar_mut(-mu);
    }
    for (i, (row, raw)) in shifted.row_iter().zip(x.row_iter()).enumerate() {
        let spread = row.norm_squared();
        let magnitude = raw.norm_squared();
        if spread <= 1e-20 * magnitude || spread == 0.0 {
            return Err(LingamError::DegenerateData(format!(
                "variable '{}' is constant",
                centered.names()[i]
            )));
        }
    }
    let cov = covariance_centered(&shifted);
    let eig = SymmetricEigen::new(cov);
    let largest = eig.eigenvalues.max();
    let smallest = eig.eigenvalues.min();
    if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
        return Err(LingamError::DegenerateData(format!(
            "sample covariance is rank deficient (eigenvalues in [{smallest:.3e}, {largest:.3e}]); \
             check for constant or collinear variables"
        )));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let k = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let white = &k * x;
    Ok((
        DataMatrix::new(white, centered.names().to_vec())?,
        WhiteningTransform {
            matrix: k,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
        },
    ))
}

/// `(W W^T)^{-1/2} W`
fn symmetric_decorrelation(w: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(w * w.transpose());
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt()));
    &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose() * w
}

fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from(seed);
    let g: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the draw is uniform (Haar) over orthogonal matrices.
    let signs = DVector::from_fn(n, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * DMatrix::from_diagonal(&signs)
}

struct RestartOutcome {
    rotation: DMatrix<f64>,
    report: RestartReport,
}

fn run_restart(z: &DMatrix<f64>, config: &IcaConfig, seed: u64) -> RestartOutcome {
    let (n, m) = z.shape();
    let inv_m = 1.0 / m as f64;
    let mut w = random_orthogonal(n, seed);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut g = DMatrix::<f64>::zeros(n, m);
    let zt = z.transpose();
    while iterations < config.max_iterations {
        iterations += 1;
        let y = &w * z;
        let mut mean_dg = DVector::<f64>::zeros(n);
        for ((gv, yv), i) in g.iter_mut().zip(y.iter()).zip((0..n).cycle()) {
            let (d1, d2) = config.contrast.derivatives(*yv);
            *gv = d1;
            mean_dg[i] += d2;
        }
        mean_dg *= inv_m;
        let mut next = (&g * &zt) * inv_m;
        for i in 0..n {
            let scale = mean_dg[i];
            for j in 0..n {
                next[(i, j)] -= scale * w[(i, j)];
            }
        }
        let next = symmetric_decorrelation(&next);
        let overlap = &next * w.transpose();
        residual = (0..n).map(|i| (1.0 - overlap[(i, i)].abs()).abs()).fold(0.0, f64::max);
        w = next;
        if residual < config.tolerance {
            converged = true;
            break;
        }
    }
    let contrast = contrast_deviations(&(&w * z), config.contrast)
        .iter()
        .map(|d| d * d)
        .sum();
    RestartOutcome {
        rotation: w,
        report: RestartReport {
            iterations,
            converged,
            residual,
            contrast,
        },
    }
}

/// `mean G(y_i) - E G(v)` for each row.
fn contrast_deviations(y: &DMatrix<f64>, contrast: Contrast) -> Vec<f64> {
    let (gauss_mean, _) = contrast.gaussian_moments();
    let m = y.ncols() as f64;
    y.row_iter()
        .map(|row| row.iter().map(|&u| contrast.value(u)).sum::<f64>() / m - gauss_mean)
        .collect()
}

/// Estimates the unmixing matrix `W` with symmetric FastICA.
///
/// The data are centered first. Every restart starts from its own random
/// orthogonal matrix; among converged restarts the one with the largest
/// contrast is kept. If none converges the best-effort estimate is
/// returned inside [`LingamError::NotConverged`].
pub fn fast_ica(data: &DataMatrix, config: &IcaConfig) -> Result<(UnmixingMatrix, IcaReport)> {
    config.validate()?;
    let (n, m) = (data.n_vars(), data.n_samples());
    if m < 10 * n {
        log::warn!("only {m} samples for {n} variables; estimates will be unreliable");
    }
    let (centered, _) = center(data)?;
    let (white, transform) = whiten(&centered)?;
    let z = white.values();
    let m = z.ncols();

    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .map(|r| run_restart(z, config, derive_seed(config.seed, r as u64)))
        .collect();

    let any_converged = outcomes.iter().any(|o| o.report.converged);
    let chosen = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.report.converged || !any_converged)
        .fold(None::<(usize, f64)>, |best, (i, o)| match best {
            Some((_, c)) if o.report.contrast <= c => best,
            _ => Some((i, o.report.contrast)),
        })
        .map(|(i, _)| i)
        .expect("at least one restart");

    let mut w = &outcomes[chosen].rotation * &transform.matrix;
    // Sign convention: the largest-magnitude entry of each row is positive.
    for mut row in w.row_iter_mut() {
        let pivot = row
            .iter()
            .copied()
            .fold(0.0, |a: f64, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            row.neg_mut();
        }
    }

    let (_, gauss_var) = config.contrast.gaussian_moments();
    let se = (gauss_var / m as f64).sqrt();
    let nongaussianity: Vec<f64> = contrast_deviations(&(&w * centered.values()), config.contrast)
        .into_iter()
        .map(|d| d / se)
        .collect();
    let low_nongaussianity = nongaussianity.iter().any(|z| z.abs() < NONGAUSSIAN_Z_THRESHOLD);

    let best = &outcomes[chosen].report;
    let report = IcaReport {
        contrast: config.contrast,
        restarts: outcomes.iter().map(|o| o.report.clone()).collect(),
        chosen,
        converged: best.converged,
        iterations: best.iterations,
        residual: best.residual,
        nongaussianity,
        low_nongaussianity,
    };
    if low_nongaussianity {
        log::warn!("some independent components are close to gaussian; the ICA estimate is unreliable");
    }
    let unmixing = UnmixingMatrix::new(w)?;
    if !report.converged {
        return Err(LingamError::NotConverged {
            best: Box::new(unmixing),
            report: Box::new(report),
        });
    }
    Ok((unmixing, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_tanh_matches_libm() {
        for k in -4000..=4000 {
            let u = k as f64 * 0.01;
            assert!((fast_tanh(u) - u.tanh()).abs() <= 4.0 * f64::EPSILON, "{u}");
        }
        assert_eq!(fast_tanh(1e300), 1.0);
        assert_eq!(fast_tanh(-1e300), -1.0);
    }
    use crate::seed::rng_from;
    use rand::Rng;

    fn uniform_sources(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from(seed);
        let h = 3f64.sqrt();
        DMatrix::from_fn(n, m, |_, _| rng.random_range(-h..h))
    }

    fn gaussian(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from(seed);
        DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng))
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    /// Distance from `m` to the closest signed permutation matrix, by
    /// enumeration (test oracle for small `n`).
    fn signed_permutation_distance(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            for signs in 0..(1u32 << n) {
                let p = DMatrix::from_fn(n, n, |i, j| {
                    if perm[i] == j {
                        if signs >> i & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    } else {
                        0.0
                    }
                });
                best = best.min(max_abs_diff(m, &p));
            }
            if !crate::permutation::next_permutation(&mut perm) {
                break;
            }
        }
        best
    }

    #[test]
    fn centering_single_variable() {
        let d = DataMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let (c, info) = center(&d).unwrap();
        assert_eq!(info.row_means, vec![2.0]);
        assert_eq!(c.values().as_slice(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn centering_zero_mean_is_identity() {
        let d = DataMatrix::from_rows(&[vec![-1.0, 0.0, 1.0], vec![2.0, -4.0, 2.0]]).unwrap();
        let (c, info) = center(&d).unwrap();
        assert_eq!(info.row_means, vec![0.0, 0.0]);
        assert_eq!(c, d);
    }

    #[test]
    fn centering_is_idempotent() {
        let d = DataMatrix::from_matrix(uniform_sources(4, 1000, 3).add_scalar(5.0)).unwrap();
        let (once, _) = center(&d).unwrap();
        let (twice, _) = center(&once).unwrap();
        assert!(max_abs_diff(once.values(), twice.values()) < 1e-12);
        for mu in once.row_means().iter() {
            assert!(mu.abs() < 1e-12);
        }
    }

    #[test]
    fn whitening_diagonal_covariance() {
        // Rows with variance 4 and 1 (1/m normalization), exactly uncorrelated.
        let x = DMatrix::from_row_slice(2, 4, &[2.0, -2.0, 2.0, -2.0, 1.0, 1.0, -1.0, -1.0]);
        let d = DataMatrix::from_matrix(x).unwrap();
        let (_, t) = whiten(&d).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0]));
        assert!(max_abs_diff(&t.matrix, &expected) < 1e-12);
    }

    #[test]
    fn whitening_white_data_is_orthogonal() {
        let x = DMatrix::from_row_slice(2, 4, &[1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
        let (w, t) = whiten(&DataMatrix::from_matrix(x).unwrap()).unwrap();
        let kkt = &t.matrix * t.matrix.transpose();
        assert!(max_abs_diff(&kkt, &DMatrix::identity(2, 2)) < 1e-12);
        let cov = covariance_centered(w.values());
        assert!(max_abs_diff(&cov, &DMatrix::identity(2, 2)) < 1e-8);
    }

    #[test]
    fn whitening_random_full_rank() {
        let mix = DMatrix::from_fn(5, 5, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 + if i == j { 3.0 } else { 0.0 }
        });
        let x = mix * gaussian(5, 2000, 11);
        let (c, _) = center(&DataMatrix::from_matrix(x).unwrap()).unwrap();
        let (w, t) = whiten(&c).unwrap();
        assert!(t.eigenvalues.iter().all(|&l| l > 0.0));
        let cov = covariance_centered(w.values());
        assert!(max_abs_diff(&cov, &DMatrix::identity(5, 5)) < 1e-8);
    }

    #[test]
    fn whitening_rejects_collinear() {
        let base = gaussian(1, 100, 1);
        let x = DMatrix::from_fn(2, 100, |i, t| base[(0, t)] * (i as f64 + 1.0));
        let err = whiten(&DataMatrix::from_matrix(x).unwrap()).unwrap_err();
        assert!(matches!(err, LingamError::DegenerateData(_)));

        let constant = DMatrix::from_element(1, 10, 4.0);
        assert!(matches!(
            whiten(&DataMatrix::from_matrix(constant).unwrap()),
            Err(LingamError::DegenerateData(_))
        ));
    }

    #[test]
    fn recovers_two_uniform_sources() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let x = &a * uniform_sources(2, 50_000, 5);
        let (w, report) = fast_ica(&DataMatrix::from_matrix(x).unwrap(), &IcaConfig::default()).unwrap();
        assert!(report.converged);
        assert!(!report.low_nongaussianity, "{report}");
        let wa = w.matrix() * &a;
        assert!(signed_permutation_distance(&wa) < 0.05, "W A = {wa}");
    }

    #[test]
    fn cubic_contrast_recovers_uniform_sources() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let x = &a * uniform_sources(2, 50_000, 8);
        let config = IcaConfig {
            contrast: Contrast::Cubic,
            ..IcaConfig::default()
        };
        let (w, _) = fast_ica(&DataMatrix::from_matrix(x).unwrap(), &config).unwrap();
        assert!(signed_permutation_distance(&(w.matrix() * &a)) < 0.05);
    }

    #[test]
    fn single_component_has_inverse_std() {
        let x = DMatrix::from_row_slice(1, 4, &[1.0, 3.0, 5.0, 7.0]);
        let (w, _) = fast_ica(&DataMatrix::from_matrix(x).unwrap(), &IcaConfig::default()).unwrap();
        // population std of {1,3,5,7} is sqrt(5)
        assert!((w.matrix()[(0, 0)] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn components_uncorrelated_unit_variance() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.5, 1.0, 0.0, -1.0, 0.3, 1.0]);
        let x = &a * uniform_sources(3, 5000, 21);
        let d = DataMatrix::from_matrix(x).unwrap();
        let (w, _) = fast_ica(&d, &IcaConfig::default()).unwrap();
        let (c, _) = center(&d).unwrap();
        let s = w.components(&c);
        let cov = covariance_centered(&s);
        assert!(max_abs_diff(&cov, &DMatrix::identity(3, 3)) < 1e-6);
    }

    #[test]
    fn deterministic_given_seed() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.4, 1.0]) * uniform_sources(2, 3000, 2);
        let d = DataMatrix::from_matrix(x).unwrap();
        let config = IcaConfig::default().with_seed(99);
        let (w1, _) = fast_ica(&d, &config).unwrap();
        let (w2, _) = fast_ica(&d, &config).unwrap();
        assert_eq!(w1.matrix().as_slice(), w2.matrix().as_slice());
    }

    #[test]
    fn gaussian_data_is_flagged() {
        for seed in 0..5 {
            let x = gaussian(3, 10_000, 100 + seed);
            let report = match fast_ica(&DataMatrix::from_matrix(x).unwrap(), &IcaConfig::default()) {
                Ok((_, report)) => report,
                Err(LingamError::NotConverged { report, .. }) => *report,
                Err(e) => panic!("{e}"),
            };
            assert!(report.low_nongaussianity, "seed {seed}: {report}");
        }
    }

    #[test]
    fn exhausted_iterations_report_best_effort() {
        let x = uniform_sources(3, 2000, 4);
        let config = IcaConfig {
            max_iterations: 1,
            tolerance: 1e-15,
            ..IcaConfig::default()
        };
        match fast_ica(&DataMatrix::from_matrix(x).unwrap(), &config) {
            Err(LingamError::NotConverged { best, report }) => {
                assert_eq!(best.n(), 3);
                assert_eq!(report.restarts.len(), 3);
                assert!(!report.converged);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let d = DataMatrix::from_matrix(uniform_sources(1, 10, 0)).unwrap();
        let bad = IcaConfig {
            tolerance: 0.0,
            ..IcaConfig::default()
        };
        assert!(matches!(fast_ica(&d, &bad), Err(LingamError::InvalidConfig(_))));
    }
}
