//! Reproducible samplers and the discrete-distribution grid.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hsic::{theta, Dataset, DiscreteJointDistribution};
use crate::points::Points;
use crate::scalar::Scalar;

/// Largest support size per side accepted by [`enumerate_discrete`].
pub const MAX_SUPPORT: usize = 4;
/// `max|θ|` below which a grid pmf counts as independent.
pub const INDEPENDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind<T: Scalar> {
    /// `(r cos ϑ + ε g, r sin ϑ + ε g')` with `ϑ` uniform on `[0, 2π)` and
    /// `g, g'` standard normal. `noise = 0` is the exact circle.
    RingUniform { radius: f64, noise: f64 },
    /// Independent standard normal vectors.
    IndependentGaussian { dim_x: usize, dim_y: usize },
    /// Independent uniforms on `[-√3, √3]` (unit variance) rotated by
    /// `angle`. Dependent but uncorrelated for angles off the axes.
    Rotated { angle: f64 },
    /// I.i.d. support pairs drawn from the pmf.
    DiscreteGiven(DiscreteJointDistribution<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec<T: Scalar> {
    pub kind: GeneratorKind<T>,
    pub seed: u64,
}

impl<T: Scalar> GeneratorSpec<T> {
    pub fn ring(radius: f64, noise: f64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::RingUniform { radius, noise },
            seed,
        }
    }

    pub fn independent_gaussian(dim_x: usize, dim_y: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::IndependentGaussian { dim_x, dim_y },
            seed,
        }
    }

    pub fn rotated(angle: f64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Rotated { angle },
            seed,
        }
    }

    pub fn discrete(dist: DiscreteJointDistribution<T>, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::DiscreteGiven(dist),
            seed,
        }
    }

    /// Same generator with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            kind: self.kind.clone(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        match &self.kind {
            GeneratorKind::RingUniform { radius, noise } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("ring radius must be positive");
                }
                if !(noise.is_finite() && *noise >= 0.0) {
                    return bad("ring noise must be non-negative");
                }
            }
            GeneratorKind::IndependentGaussian { dim_x, dim_y } => {
                if *dim_x == 0 || *dim_y == 0 {
                    return bad("dimensions must be positive");
                }
            }
            GeneratorKind::Rotated { angle } => {
                if !(0.0..TAU).contains(angle) {
                    return bad("rotation angle must lie in [0, 2π)");
                }
            }
            GeneratorKind::DiscreteGiven(_) => {}
        }
        Ok(())
    }
}

/// Draws `n` pairs from `spec`. Identical `(spec, n)` give identical data.
pub fn sample<T: Scalar>(spec: &GeneratorSpec<T>, n: usize) -> Result<Dataset<T>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.kind {
        GeneratorKind::RingUniform { radius, noise } => {
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for _ in 0..n {
                let angle = rng.random::<f64>() * TAU;
                let (s, c) = angle.sin_cos();
                let (mut x, mut y) = (radius * c, radius * s);
                if *noise > 0.0 {
                    x += noise * rng.sample::<f64, _>(StandardNormal);
                    y += noise * rng.sample::<f64, _>(StandardNormal);
                }
                xs.push(T::lit(x));
                ys.push(T::lit(y));
            }
            Dataset::from_scalars(&xs, &ys)
        }
        GeneratorKind::IndependentGaussian { dim_x, dim_y } => {
            let mut normals = |len: usize| -> Vec<T> {
                (0..len)
                    .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            };
            let xs = normals(n * dim_x);
            let ys = normals(n * dim_y);
            Dataset::new(Points::new(*dim_x, xs)?, Points::new(*dim_y, ys)?)
        }
        GeneratorKind::Rotated { angle } => {
            let half_width = 3f64.sqrt();
            let (s, c) = angle.sin_cos();
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for _ in 0..n {
                let u = rng.random_range(-half_width..half_width);
                let v = rng.random_range(-half_width..half_width);
                xs.push(T::lit(c * u - s * v));
                ys.push(T::lit(s * u + c * v));
            }
            Dataset::from_scalars(&xs, &ys)
        }
        GeneratorKind::DiscreteGiven(dist) => {
            let pmf = dist.pmf();
            let (mx, my) = pmf.shape();
            let mut cumulative = Vec::with_capacity(mx * my);
            let mut acc = 0.0;
            for i in 0..mx {
                for j in 0..my {
                    acc += pmf[(i, j)].as_f64();
                    cumulative.push(acc);
                }
            }
            let mut xs = Vec::with_capacity(n * dist.x_support().dim());
            let mut ys = Vec::with_capacity(n * dist.y_support().dim());
            for _ in 0..n {
                let u = rng.random::<f64>() * acc;
                let cell = cumulative
                    .partition_point(|&c| c <= u)
                    .min(cumulative.len() - 1);
                xs.extend_from_slice(dist.x_support().row(cell / my));
                ys.extend_from_slice(dist.y_support().row(cell % my));
            }
            Dataset::new(
                Points::new(dist.x_support().dim(), xs)?,
                Points::new(dist.y_support().dim(), ys)?,
            )
        }
    }
}

/// `m` one-dimensional support points on the unit-spaced grid centred at
/// zero: `{-1, 0, 1}` for `m = 3`, `{-0.5, 0.5}` for `m = 2`.
pub fn centered_support<T: Scalar>(m: usize) -> Points<T> {
    let offset = (m as f64 - 1.0) / 2.0;
    let v: Vec<T> = (0..m).map(|i| T::lit(i as f64 - offset)).collect();
    Points::from_scalars(&v)
}

/// Iterator over every joint pmf on `centered_support(m_x) ×
/// centered_support(m_y)` whose entries are multiples of `1/resolution`.
///
/// Cells are filled in row-major order and compositions are visited in
/// decreasing lexicographic order, starting with all mass on the first
/// cell.
#[derive(Debug, Clone)]
pub struct DiscreteGrid<T: Scalar> {
    m_x: usize,
    m_y: usize,
    resolution: usize,
    dependent_only: bool,
    counts: Option<Vec<usize>>,
    x_support: Points<T>,
    y_support: Points<T>,
}

impl<T: Scalar> DiscreteGrid<T> {
    fn advance(&mut self) {
        let Some(c) = self.counts.as_mut() else {
            return;
        };
        let last = c.len() - 1;
        if c[last] == self.resolution {
            self.counts = None;
            return;
        }
        let i = (0..last)
            .rev()
            .find(|&i| c[i] > 0)
            .expect("mass outside last cell");
        let tail = c[last];
        c[i] -= 1;
        c[last] = 0;
        c[i + 1] = tail + 1;
    }

    fn current(&self) -> Option<DiscreteJointDistribution<T>> {
        let c = self.counts.as_ref()?;
        let res = T::from_count(self.resolution);
        let pmf = DMatrix::from_row_iterator(
            self.m_x,
            self.m_y,
            c.iter().map(|&k| T::from_count(k) / res),
        );
        Some(
            DiscreteJointDistribution::new(self.x_support.clone(), self.y_support.clone(), pmf)
                .expect("grid pmfs are valid"),
        )
    }
}

impl<T: Scalar> Iterator for DiscreteGrid<T> {
    type Item = DiscreteJointDistribution<T>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let dist = self.current()?;
            self.advance();
            if !self.dependent_only || is_dependent(&dist) {
                return Some(dist);
            }
        }
    }
}

/// Whether `max|θ| ≥ 1e-12`.
pub fn is_dependent<T: Scalar>(dist: &DiscreteJointDistribution<T>) -> bool {
    theta(dist)
        .iter()
        .any(|v| v.abs() >= T::lit(INDEPENDENCE_TOL))
}

/// Enumerates joint pmfs on a simplex grid; see [`DiscreteGrid`].
pub fn enumerate_discrete<T: Scalar>(
    m_x: usize,
    m_y: usize,
    resolution: usize,
    dependent_only: bool,
) -> Result<DiscreteGrid<T>> {
    for m in [m_x, m_y] {
        if m == 0 || m > MAX_SUPPORT {
            return Err(Error::InvalidConfig(format!(
                "support size {m} outside 1..={MAX_SUPPORT}"
            )));
        }
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(
            "grid resolution must be at least 2".into(),
        ));
    }
    let mut counts = vec![0; m_x * m_y];
    counts[0] = resolution;
    Ok(DiscreteGrid {
        m_x,
        m_y,
        resolution,
        dependent_only,
        counts: Some(counts),
        x_support: centered_support(m_x),
        y_support: centered_support(m_y),
    })
}

/// Uniform mass on `(±r, 0)` and `(0, ±r)`: the circle restricted to four
/// points. Supports are `{r, 0, -r}` on both sides.
pub fn discrete_ring<T: Scalar>(radius: f64) -> Result<DiscreteJointDistribution<T>> {
    let r = T::lit(radius);
    let q = T::lit(0.25);
    let z = T::zero();
    let support = [r, z, -r];
    // rows x ∈ {r, 0, -r}, columns y ∈ {r, 0, -r}
    DiscreteJointDistribution::from_scalars(&support, &support, &[z, q, z, q, z, q, z, q, z])
}
