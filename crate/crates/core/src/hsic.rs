//! Empirical and population Hilbert-Schmidt independence criterion.
//!
//! For kernels `k` on 𝒳 and `l` on 𝒴 the population HSIC is the squared
//! Hilbert-Schmidt norm of the cross-covariance operator, i.e. of the
//! embedding of the signed measure `θ = P_XY − P_X P_Y` into the tensor
//! product of the two feature spaces:
//!
//! ```text
//! HSIC = ∫∫ k(x, x') l(y, y') dθ(x, y) dθ(x', y')
//! ```
//!
//! When both `k` and `l` are characteristic this vanishes exactly when `θ`
//! does, i.e. under independence. [`population_hsic`] evaluates it exactly
//! for finitely supported joints, [`hsic_biased`] estimates it from paired
//! samples with the V-statistic `tr(KHLH) / n²`.
//!
//! Distance covariance is the special case of HSIC with distance-induced
//! kernels; it is not provided separately.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{gram, KernelSpec};
use crate::points::Points;
use crate::scalar::{rel_tol, Scalar};

/// Relative tolerance below zero within which a statistic is treated as a
/// roundoff zero.
pub const HSIC_REL_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a discrete pmf.
pub const MASS_TOL: f64 = 1e-12;

/// Paired samples `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Points<T>,
    y: Points<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Points<T>, y: Points<T>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    /// One-dimensional samples on both sides.
    pub fn from_scalars(x: &[T], y: &[T]) -> Result<Self> {
        Self::new(Points::from_scalars(x), Points::from_scalars(y))
    }

    #[inline]
    pub fn x(&self) -> &Points<T> {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &Points<T> {
        &self.y
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The dataset with `y` reindexed by `perm` and `x` untouched.
    pub fn with_y_permuted(&self, perm: &[usize]) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.reindexed(perm),
        }
    }

    /// Applies the same reordering to both sides.
    pub fn reindexed(&self, perm: &[usize]) -> Self {
        Self {
            x: self.x.reindexed(perm),
            y: self.y.reindexed(perm),
        }
    }
}

/// A joint pmf on `x_support × y_support`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointDistribution<T: Scalar> {
    x_support: Points<T>,
    y_support: Points<T>,
    pmf: DMatrix<T>,
}

impl<T: Scalar> DiscreteJointDistribution<T> {
    /// Validates shapes, non-negativity, unit mass (within `1e-12`) and
    /// distinctness of the support points on each side.
    pub fn new(x_support: Points<T>, y_support: Points<T>, pmf: DMatrix<T>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if x_support.is_empty() || y_support.is_empty() {
            return bad("empty support".into());
        }
        if pmf.nrows() != x_support.len() || pmf.ncols() != y_support.len() {
            return bad(format!(
                "pmf is {}x{} but supports have {} and {} points",
                pmf.nrows(),
                pmf.ncols(),
                x_support.len(),
                y_support.len()
            ));
        }
        if let Some(v) = pmf.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return bad(format!("pmf entry {v} is not a non-negative number"));
        }
        let total = pmf.sum();
        if (total - T::one()).abs() > rel_tol::<T>(MASS_TOL) {
            return bad(format!("pmf sums to {total}, not 1"));
        }
        for side in [&x_support, &y_support] {
            if let Some((first, second)) = side.first_duplicate() {
                return Err(Error::DuplicateSupportPoint { first, second });
            }
        }
        Ok(Self {
            x_support,
            y_support,
            pmf,
        })
    }

    /// Convenience constructor for one-dimensional supports and a row-major
    /// pmf.
    pub fn from_scalars(x_support: &[T], y_support: &[T], pmf_row_major: &[T]) -> Result<Self> {
        if pmf_row_major.len() != x_support.len() * y_support.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} pmf entries, got {}",
                x_support.len() * y_support.len(),
                pmf_row_major.len()
            )));
        }
        Self::new(
            Points::from_scalars(x_support),
            Points::from_scalars(y_support),
            DMatrix::from_row_slice(x_support.len(), y_support.len(), pmf_row_major),
        )
    }

    /// Product of the given marginals.
    pub fn product(x_support: Points<T>, y_support: Points<T>, px: &[T], py: &[T]) -> Result<Self> {
        let pmf = DMatrix::from_fn(px.len(), py.len(), |i, j| px[i] * py[j]);
        Self::new(x_support, y_support, pmf)
    }

    pub fn x_support(&self) -> &Points<T> {
        &self.x_support
    }

    pub fn y_support(&self) -> &Points<T> {
        &self.y_support
    }

    pub fn pmf(&self) -> &DMatrix<T> {
        &self.pmf
    }

    /// Row sums, `P_X`.
    pub fn marginal_x(&self) -> Vec<T> {
        self.pmf.row_iter().map(|r| r.sum()).collect()
    }

    /// Column sums, `P_Y`.
    pub fn marginal_y(&self) -> Vec<T> {
        self.pmf.column_iter().map(|c| c.sum()).collect()
    }

    /// `max |θ|`; zero exactly for product pmfs up to roundoff.
    pub fn dependence_sup_norm(&self) -> T {
        theta(self).iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    BiasedV,
    PopulationExact,
}

/// A squared Hilbert-Schmidt norm together with its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HsicValue<T> {
    /// Reported value; a roundoff-sized negative `raw` is clamped to zero.
    pub value: T,
    /// The value as computed. Permutation tests compare raw values.
    pub raw: T,
    pub estimator: Estimator,
    /// Roundoff tolerance used for clamping.
    pub tolerance: T,
}

impl<T: Scalar> HsicValue<T> {
    fn from_raw(raw: T, scale: T, estimator: Estimator) -> Result<Self> {
        let tolerance = rel_tol::<T>(HSIC_REL_TOL) * scale;
        if !raw.is_finite() {
            return Err(Error::Numerical(format!("HSIC evaluated to {raw}")));
        }
        if raw < -tolerance {
            return Err(Error::Numerical(format!(
                "HSIC {raw:e} is negative beyond roundoff tolerance {tolerance:e}"
            )));
        }
        Ok(Self {
            value: raw.max(T::zero()),
            raw,
            estimator,
            tolerance,
        })
    }
}

/// The signed measure `θ[i][j] = pmf[i][j] − P_X[i] · P_Y[j]`. Every row and
/// every column of the result sums to zero.
pub fn theta<T: Scalar>(dist: &DiscreteJointDistribution<T>) -> DMatrix<T> {
    let px = dist.marginal_x();
    let py = dist.marginal_y();
    DMatrix::from_fn(px.len(), py.len(), |i, j| dist.pmf[(i, j)] - px[i] * py[j])
}

/// Exact HSIC of a finitely supported joint:
/// `Σ θ[i][j] θ[i'][j'] k(xᵢ, xᵢ') l(yⱼ, yⱼ') = tr(K_x Θ K_y Θᵀ)`.
pub fn population_hsic<T: Scalar>(
    dist: &DiscreteJointDistribution<T>,
    kx: &KernelSpec<T>,
    ky: &KernelSpec<T>,
) -> Result<HsicValue<T>> {
    let gx = gram(kx, &dist.x_support)?;
    let gy = gram(ky, &dist.y_support)?;
    let th = theta(dist);
    // Θ K_y Θᵀ is m_x × m_x; contract it against K_x entrywise.
    let inner = &th * gy.entries() * th.transpose();
    let raw = gx.entries().component_mul(&inner).sum();
    let mass: T = th.iter().fold(T::zero(), |s, v| s + v.abs());
    let scale = gx.max_abs() * gy.max_abs() * mass * mass;
    HsicValue::from_raw(raw, scale, Estimator::PopulationExact)
}

/// Doubly centred Gram matrices `K̃ = HKH`, `L̃ = HLH` of a dataset with the
/// bandwidths each side was resolved to.
///
/// The biased statistic is `Σᵢⱼ K̃ᵢⱼ L̃ᵢⱼ / n²`. Since `PHPᵀ = H` for every
/// permutation matrix `P`, permuting `y` only reindexes the rows and columns
/// of `L̃`; [`CenteredGrams::statistic_permuted`] relies on that and never
/// rebuilds a Gram matrix.
#[derive(Debug, Clone)]
pub struct CenteredGrams<T: Scalar> {
    kx: KernelSpec<T>,
    ky: KernelSpec<T>,
    k: DMatrix<T>,
    l: DMatrix<T>,
    scale: T,
}

impl<T: Scalar> CenteredGrams<T> {
    /// Resolves median-heuristic bandwidths on each side, then builds and
    /// centres both Gram matrices.
    pub fn new(data: &Dataset<T>, kx: &KernelSpec<T>, ky: &KernelSpec<T>) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                found: n,
            });
        }
        let kx = kx.resolve(data.x())?;
        let ky = ky.resolve(data.y())?;
        let gk = gram(&kx, data.x())?;
        let gl = gram(&ky, data.y())?;
        let scale = gk.max_abs() * gl.max_abs();
        Ok(Self {
            kx,
            ky,
            k: double_center(gk.into_entries()),
            l: double_center(gl.into_entries()),
            scale,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    /// `x` kernel with its bandwidth resolved.
    pub fn kernel_x(&self) -> &KernelSpec<T> {
        &self.kx
    }

    pub fn kernel_y(&self) -> &KernelSpec<T> {
        &self.ky
    }

    pub fn centered_x(&self) -> &DMatrix<T> {
        &self.k
    }

    pub fn centered_y(&self) -> &DMatrix<T> {
        &self.l
    }

    /// `max|K| · max|L|`, the scale roundoff tolerances are relative to.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Raw statistic of the unpermuted data.
    pub fn statistic(&self) -> T {
        let n = self.n();
        let k = self.k.as_slice();
        let l = self.l.as_slice();
        let mut diag = T::zero();
        let mut off = T::zero();
        for i in 0..n {
            let kc = &k[i * n..i * n + i];
            let lc = &l[i * n..i * n + i];
            off += kc.iter().zip(lc).fold(T::zero(), |s, (&a, &b)| s + a * b);
            diag += k[i * n + i] * l[i * n + i];
        }
        (diag + off + off) / T::from_count(n * n)
    }

    /// Raw statistic with `y` reindexed by `perm`, i.e. with
    /// `L̃[perm[i]][perm[j]]` in place of `L̃[i][j]`.
    pub fn statistic_permuted(&self, perm: &[usize]) -> T {
        let n = self.n();
        debug_assert_eq!(perm.len(), n);
        let k = self.k.as_slice();
        let l = self.l.as_slice();
        let mut diag = T::zero();
        let mut off = T::zero();
        for (i, &pi) in perm.iter().enumerate() {
            // both matrices are symmetric; column i holds row i
            let kc = &k[i * n..i * n + i];
            let lc = &l[pi * n..pi * n + n];
            off += kc
                .iter()
                .zip(&perm[..i])
                .fold(T::zero(), |s, (&a, &pj)| s + a * lc[pj]);
            diag += k[i * n + i] * lc[pi];
        }
        (diag + off + off) / T::from_count(n * n)
    }

    pub fn value(&self) -> Result<HsicValue<T>> {
        HsicValue::from_raw(self.statistic(), self.scale, Estimator::BiasedV)
    }

    pub fn value_of(&self, raw: T) -> Result<HsicValue<T>> {
        HsicValue::from_raw(raw, self.scale, Estimator::BiasedV)
    }
}

/// `HMH` for symmetric `M`: subtracts row and column means and adds back the
/// grand mean.
fn double_center<T: Scalar>(m: DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let nf = T::from_count(n);
    let means: Vec<T> = m.column_iter().map(|c| c.sum() / nf).collect();
    let grand = means.iter().fold(T::zero(), |s, &v| s + v) / nf;
    let mut out = m;
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = out[(i, j)] - means[i] - means[j] + grand;
        }
    }
    // mirror so the result is exactly symmetric
    for j in 0..n {
        for i in 0..j {
            out[(j, i)] = out[(i, j)];
        }
    }
    out
}

/// Biased V-statistic `tr(KHLH) / n²` with median-heuristic bandwidths
/// resolved on each side of `data`.
pub fn hsic_biased<T: Scalar>(
    data: &Dataset<T>,
    kx: &KernelSpec<T>,
    ky: &KernelSpec<T>,
) -> Result<HsicValue<T>> {
    CenteredGrams::new(data, kx, ky)?.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> DiscreteJointDistribution<f64> {
        let q = 0.25;
        // x ∈ {1, 0, -1}, y ∈ {0, 1, -1}
        DiscreteJointDistribution::from_scalars(
            &[1.0, 0.0, -1.0],
            &[0.0, 1.0, -1.0],
            &[q, 0.0, 0.0, 0.0, q, q, q, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn theta_examples() {
        let d = DiscreteJointDistribution::<f64>::product(
            Points::from_scalars(&[0.0, 1.0]),
            Points::from_scalars(&[0.0, 1.0, 2.0]),
            &[0.3, 0.7],
            &[0.2, 0.5, 0.3],
        )
        .unwrap();
        assert!(theta(&d).iter().all(|v| v.abs() < 1e-15));

        let diag = DiscreteJointDistribution::from_scalars(
            &[0.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert_eq!(
            theta(&diag),
            DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25])
        );

        let point = DiscreteJointDistribution::from_scalars(&[3.0], &[4.0], &[1.0]).unwrap();
        assert_eq!(theta(&point), DMatrix::from_element(1, 1, 0.0));
    }

    #[test]
    fn theta_rows_and_columns_sum_to_zero() {
        let th = theta(&ring());
        for r in th.row_iter() {
            assert!(r.sum().abs() < 1e-12);
        }
        for c in th.column_iter() {
            assert!(c.sum().abs() < 1e-12);
        }
        assert!(th.amax() >= 0.0625);
    }

    #[test]
    fn distribution_validation() {
        let p = |v: &[f64]| Points::from_scalars(v);
        let m = |v: &[f64]| DMatrix::from_row_slice(1, 2, v);
        assert!(DiscreteJointDistribution::new(p(&[0.0]), p(&[0.0, 1.0]), m(&[0.5, 0.6])).is_err());
        assert!(
            DiscreteJointDistribution::new(p(&[0.0]), p(&[0.0, 1.0]), m(&[-0.5, 1.5])).is_err()
        );
        assert!(DiscreteJointDistribution::new(p(&[0.0]), p(&[1.0, 1.0]), m(&[0.5, 0.5])).is_err());
        assert!(
            DiscreteJointDistribution::new(p(&[0.0, 1.0]), p(&[0.0, 1.0]), m(&[0.5, 0.5])).is_err()
        );
        assert!(DiscreteJointDistribution::new(p(&[0.0]), p(&[0.0, 1.0]), m(&[0.5, 0.5])).is_ok());
    }

    #[test]
    fn population_independent_is_zero() {
        let d = DiscreteJointDistribution::<f64>::product(
            Points::from_scalars(&[-1.0, 0.5, 2.0]),
            Points::from_scalars(&[0.0, 1.0]),
            &[0.2, 0.3, 0.5],
            &[0.6, 0.4],
        )
        .unwrap();
        for (kx, ky) in [
            (
                KernelSpec::gaussian(1.0).unwrap(),
                KernelSpec::laplace(0.7).unwrap(),
            ),
            (KernelSpec::linear(), KernelSpec::linear()),
        ] {
            assert!(population_hsic(&d, &kx, &ky).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn population_diagonal_closed_form() {
        let d = DiscreteJointDistribution::from_scalars(
            &[0.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        let g = KernelSpec::gaussian(1.0).unwrap();
        let v = population_hsic(&d, &g, &g).unwrap();
        let expected = (1.0 - (-0.5f64).exp()).powi(2) / 4.0;
        assert!((v.value - expected).abs() < 1e-15);
        assert_eq!(v.estimator, Estimator::PopulationExact);
    }

    #[test]
    fn ring_is_invisible_to_linear_y() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let lin = KernelSpec::linear();
        let v = population_hsic(&ring(), &g, &lin).unwrap();
        assert!(v.raw.abs() < 1e-12, "{}", v.raw);
        let v = population_hsic(&ring(), &g, &g).unwrap();
        assert!(v.value > 1e-6);
    }

    #[test]
    fn biased_examples() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::from_scalars(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        let v = hsic_biased(&d, &g, &g).unwrap();
        let expected = (1.0 - (-0.5f64).exp()).powi(2) / 4.0;
        assert!((v.value - expected).abs() < 1e-12);
        assert!((v.value - 0.038_704_5).abs() < 1e-7);

        let d = Dataset::from_scalars(&[0.3, -1.0, 2.0, 4.0], &[7.0; 4]).unwrap();
        assert_eq!(hsic_biased(&d, &g, &g).unwrap().raw, 0.0);
        let d = Dataset::from_scalars(&[0.3, -1.0, 2.0, 4.0], &[2.0; 4]).unwrap();
        assert_eq!(hsic_biased(&d, &g, &KernelSpec::linear()).unwrap().raw, 0.0);
    }

    #[test]
    fn biased_needs_two_points() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::from_scalars(&[0.0], &[0.0]).unwrap();
        assert!(matches!(
            hsic_biased(&d, &g, &g),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(Dataset::from_scalars(&[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn median_needs_non_identical_side() {
        let d = Dataset::from_scalars(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        let r = hsic_biased(
            &d,
            &KernelSpec::gaussian_median(),
            &KernelSpec::gaussian_median(),
        );
        assert_eq!(r, Err(Error::AllPointsIdentical));
    }

    #[test]
    fn self_dependence_is_frobenius_norm() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let g = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::from_scalars(&xs, &xs).unwrap();
        let c = CenteredGrams::new(&d, &g, &g).unwrap();
        let fro = c.centered_x().norm_squared() / (30.0 * 30.0);
        let v = c.value().unwrap().value;
        assert!(v > 0.0);
        assert!((v - fro).abs() < 1e-12);
    }

    #[test]
    fn centered_matrices_have_zero_margins() {
        let xs = [0.1f64, 2.0, -1.3, 0.7, 5.0];
        let d = Dataset::from_scalars(&xs, &xs).unwrap();
        let c =
            CenteredGrams::new(&d, &KernelSpec::linear(), &KernelSpec::gaussian_median()).unwrap();
        for m in [c.centered_x(), c.centered_y()] {
            for r in m.row_iter() {
                assert!(r.sum().abs() < 1e-12);
            }
            assert_eq!(m, &m.transpose());
        }
        assert!(c.kernel_y().resolved_bandwidth().is_some());
    }

    #[test]
    fn identity_permutation_matches_statistic() {
        let xs = [0.1, 2.0, -1.3, 0.7, 5.0, 1.1];
        let ys = [1.0, 0.2, 0.3, -0.7, 2.5, 0.0];
        let d = Dataset::from_scalars(&xs, &ys).unwrap();
        let g = KernelSpec::gaussian(1.0).unwrap();
        let c = CenteredGrams::new(&d, &g, &g).unwrap();
        let id: Vec<usize> = (0..6).collect();
        assert_eq!(c.statistic(), c.statistic_permuted(&id));
    }

    #[test]
    fn f32_statistics() {
        let g = KernelSpec::<f32>::gaussian(1.0).unwrap();
        let d = Dataset::from_scalars(&[0.0f32, 1.0], &[0.0, 1.0]).unwrap();
        let v = hsic_biased(&d, &g, &g).unwrap();
        let expected = (1.0 - (-0.5f32).exp()).powi(2) / 4.0;
        assert!((v.value - expected).abs() < 1e-6);
    }
}
