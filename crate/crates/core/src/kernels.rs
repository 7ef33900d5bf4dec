//! Kernel functions, Gram matrices, bandwidth selection and finite-support
//! characteristicness diagnostics.
//!
//! Three families are provided:
//!
//! * Gaussian: `exp(-‖x - y‖² / (2σ²))`
//! * Laplace: `exp(-‖x - y‖₁ / σ)`
//! * Linear: `⟨x, y⟩`
//!
//! Gaussian and Laplace are translation invariant, bounded and vanish at
//! infinity on ℝ^d, and are characteristic. The linear kernel is none of
//! these and only exists here to exhibit how HSIC fails without a
//! characteristic kernel.
//!
//! On a finite support a kernel embeds every signed measure on that
//! support injectively exactly when its Gram matrix is strictly positive
//! definite. [`strict_pd_witness`] checks that condition and, when it fails,
//! returns a signed measure whose embedding has (numerically) zero norm.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::scalar::{rel_tol, Scalar};

/// Relative factor of the PSD tolerance `tol_psd = 1e-8 · n · max|K|`.
pub const PSD_REL_TOL: f64 = 1e-8;
/// Relative factor of the strict-PD tolerance `tol_spd = 1e-10 · n · max|K|`.
pub const SPD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Laplace,
    Linear,
}

impl KernelFamily {
    /// Whether the family is characteristic on ℝ^d.
    pub fn is_characteristic(self) -> bool {
        matches!(self, KernelFamily::Gaussian | KernelFamily::Laplace)
    }

    pub fn is_translation_invariant(self) -> bool {
        self.is_characteristic()
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Laplace => "laplace",
            KernelFamily::Linear => "linear",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth<T> {
    Fixed(T),
    /// Resolved from data by [`median_heuristic`].
    MedianHeuristic,
}

/// A kernel family plus its bandwidth.
///
/// The bandwidth is ignored for [`KernelFamily::Linear`]. Whether the
/// kernel is characteristic is a property of the family and cannot be set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    bandwidth: Bandwidth<T>,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, bandwidth: Bandwidth<T>) -> Result<Self> {
        if let Bandwidth::Fixed(sigma) = bandwidth {
            if family != KernelFamily::Linear && !(sigma > T::zero() && sigma.is_finite()) {
                return Err(Error::InvalidBandwidth(sigma.as_f64()));
            }
        }
        Ok(Self { family, bandwidth })
    }

    pub fn gaussian(sigma: T) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, Bandwidth::Fixed(sigma))
    }

    pub fn laplace(sigma: T) -> Result<Self> {
        Self::new(KernelFamily::Laplace, Bandwidth::Fixed(sigma))
    }

    pub fn gaussian_median() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }

    pub fn laplace_median() -> Self {
        Self {
            family: KernelFamily::Laplace,
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }

    pub fn linear() -> Self {
        Self {
            family: KernelFamily::Linear,
            bandwidth: Bandwidth::Fixed(T::one()),
        }
    }

    #[inline]
    pub fn family(&self) -> KernelFamily {
        self.family
    }

    #[inline]
    pub fn bandwidth(&self) -> Bandwidth<T> {
        self.bandwidth
    }

    #[inline]
    pub fn is_characteristic(&self) -> bool {
        self.family.is_characteristic()
    }

    /// True unless the family uses a bandwidth that is still the median
    /// heuristic sentinel.
    pub fn is_resolved(&self) -> bool {
        self.family == KernelFamily::Linear || matches!(self.bandwidth, Bandwidth::Fixed(_))
    }

    /// The bandwidth actually used, or `None` for the linear kernel and for
    /// unresolved specs.
    pub fn resolved_bandwidth(&self) -> Option<T> {
        match (self.family, self.bandwidth) {
            (KernelFamily::Linear, _) => None,
            (_, Bandwidth::Fixed(s)) => Some(s),
            (_, Bandwidth::MedianHeuristic) => None,
        }
    }

    /// Replaces a median-heuristic sentinel by the median pairwise distance
    /// of `points`. Resolved specs are returned unchanged.
    pub fn resolve(&self, points: &Points<T>) -> Result<Self> {
        if self.is_resolved() {
            return Ok(*self);
        }
        let sigma = median_heuristic(points)?;
        Self::new(self.family, Bandwidth::Fixed(sigma))
    }

    /// Evaluates the kernel; see [`kernel_eval`].
    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        match (self.family, self.bandwidth) {
            (KernelFamily::Linear, _) => Ok(dot(x, y)),
            (_, Bandwidth::MedianHeuristic) => Err(Error::UnresolvedBandwidth),
            (KernelFamily::Gaussian, Bandwidth::Fixed(sigma)) => {
                Ok(gaussian_from_sq_dist(sq_dist(x, y), sigma))
            }
            (KernelFamily::Laplace, Bandwidth::Fixed(sigma)) => Ok((-l1_dist(x, y) / sigma).exp()),
        }
    }
}

impl<T: Scalar> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family, self.bandwidth) {
            (KernelFamily::Linear, _) => write!(f, "linear"),
            (fam, Bandwidth::MedianHeuristic) => write!(f, "{fam}:median"),
            (fam, Bandwidth::Fixed(s)) => write!(f, "{fam}:{s}"),
        }
    }
}

/// Parses `family[:bandwidth|:median]`, e.g. `gaussian:median`,
/// `laplace:0.5`, `linear`. A characteristic family without a bandwidth
/// defaults to the median heuristic.
impl<T: Scalar> FromStr for KernelSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidKernelSpec(s.to_string());
        let (family, param) = match s.trim().split_once(':') {
            Some((f, p)) => (f, Some(p.trim())),
            None => (s.trim(), None),
        };
        let family = match family.to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" => KernelFamily::Gaussian,
            "laplace" | "laplacian" => KernelFamily::Laplace,
            "linear" => KernelFamily::Linear,
            _ => return Err(bad()),
        };
        if family == KernelFamily::Linear {
            return match param {
                None => Ok(Self::linear()),
                Some(_) => Err(bad()),
            };
        }
        let bandwidth = match param {
            None | Some("median") => Bandwidth::MedianHeuristic,
            Some(p) => {
                let v: f64 = p.parse().map_err(|_| bad())?;
                Bandwidth::Fixed(T::from_f64(v).ok_or_else(bad)?)
            }
        };
        Self::new(family, bandwidth)
    }
}

#[inline]
fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
fn sq_dist<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| {
        let d = a - b;
        acc + d * d
    })
}

#[inline]
fn l1_dist<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs())
}

#[inline]
fn gaussian_from_sq_dist<T: Scalar>(d2: T, sigma: T) -> T {
    (-d2 / (T::lit(2.0) * sigma * sigma)).exp()
}

/// Evaluates `spec` at `(x, y)`.
///
/// Fails on a dimension mismatch or when the bandwidth is still the median
/// heuristic sentinel.
pub fn kernel_eval<T: Scalar>(spec: &KernelSpec<T>, x: &[T], y: &[T]) -> Result<T> {
    spec.eval(x, y)
}

/// Median of the `n(n-1)/2` pairwise Euclidean distances over distinct
/// index pairs. Zero distances stay in the pool; only an all-zero pool is
/// an error. Even-sized pools average the two middle values.
pub fn median_heuristic<T: Scalar>(points: &Points<T>) -> Result<T> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: n,
        });
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dists.push(sq_dist(points.row(i), points.row(j)).sqrt());
        }
    }
    if dists.iter().all(|d| d.is_zero()) {
        return Err(Error::AllPointsIdentical);
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        (dists[m / 2 - 1] + dists[m / 2]) / T::lit(2.0)
    };
    if median.is_zero() {
        // more than half the pairs coincide; fall back to the smallest
        // positive distance so the bandwidth stays valid
        return Ok(*dists
            .iter()
            .find(|d| !d.is_zero())
            .expect("non-zero distance exists"));
    }
    Ok(median)
}

/// Symmetric matrix of pairwise kernel evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T: Scalar> {
    entries: DMatrix<T>,
}

impl<T: Scalar> GramMatrix<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<T> {
        self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `1e-8 · n · max|K|`.
    pub fn psd_tolerance(&self) -> T {
        rel_tol::<T>(PSD_REL_TOL) * T::from_count(self.n()) * self.max_abs()
    }

    /// `1e-10 · n · max|K|`.
    pub fn spd_tolerance(&self) -> T {
        rel_tol::<T>(SPD_REL_TOL) * T::from_count(self.n()) * self.max_abs()
    }

    pub fn eigen(&self) -> SymmetricEigen<T, nalgebra::Dyn> {
        SymmetricEigen::new(self.entries.clone())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.entries.symmetric_eigenvalues().min()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -self.psd_tolerance()
    }
}

/// Gram matrix of `spec` on `points`. Each entry with `i ≤ j` is computed
/// once and mirrored, so the result is exactly symmetric.
pub fn gram<T: Scalar>(spec: &KernelSpec<T>, points: &Points<T>) -> Result<GramMatrix<T>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let mut entries = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = spec.eval(points.row(i), points.row(j))?;
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries })
}

/// Outcome of [`strict_pd_witness`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdDiagnostic<T> {
    pub strictly_pd: bool,
    pub min_eigenvalue: T,
    /// The `tol_spd` the minimum eigenvalue was compared against.
    pub tolerance: T,
    /// Unit-norm coefficients `c` with `cᵀKc = λ_min`, present only when the
    /// Gram matrix is not strictly positive definite.
    pub witness: Option<Vec<T>>,
}

/// Checks whether `spec` embeds signed measures on `support` injectively,
/// i.e. whether its Gram matrix there is strictly positive definite.
pub fn strict_pd_witness<T: Scalar>(
    spec: &KernelSpec<T>,
    support: &Points<T>,
) -> Result<PdDiagnostic<T>> {
    if let Some((first, second)) = support.first_duplicate() {
        return Err(Error::DuplicateSupportPoint { first, second });
    }
    let k = gram(spec, support)?;
    let tolerance = k.spd_tolerance();
    let eig = k.eigen();
    let (idx, &min_eigenvalue) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalues"))
        .expect("non-empty Gram matrix");
    let strictly_pd = min_eigenvalue > tolerance;
    let witness = if strictly_pd {
        None
    } else {
        let v = eig.eigenvectors.column(idx);
        let norm = v.norm();
        Some(v.iter().map(|&c| c / norm).collect())
    };
    Ok(PdDiagnostic {
        strictly_pd,
        min_eigenvalue,
        tolerance,
        witness,
    })
}
