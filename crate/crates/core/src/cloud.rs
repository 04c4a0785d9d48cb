//! Finite weighted point clouds approximating self-similar measures.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{FracError, Result};
use crate::math::{self, Point};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Points in R^d (stored flat), probability weights, and a covering radius.
///
/// `resolution` bounds the Hausdorff distance between the cloud and the set
/// it approximates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedCloud {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    resolution: f64,
}

impl WeightedCloud {
    /// `coords` holds `dim` values per point.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>, resolution: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FracError::UnsupportedDimension(dim));
        }
        if coords.len() != dim * weights.len() {
            return Err(FracError::InvalidArgument(format!(
                "{} coordinates do not form {} points of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(FracError::InvalidArgument("empty cloud".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(FracError::InvalidWeights("negative cloud weight".into()));
        }
        let total = math::compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(FracError::InvalidWeights(format!("cloud weights sum to {total}, not 1")));
        }
        if !(resolution >= 0.0) {
            return Err(FracError::InvalidArgument(format!(
                "resolution must be nonnegative, got {resolution}"
            )));
        }
        Ok(Self {
            dim,
            coords,
            weights,
            resolution,
        })
    }

    /// Equal weights on the given points.
    pub fn uniform(dim: usize, coords: Vec<f64>, resolution: f64) -> Result<Self> {
        if dim == 0 {
            return Err(FracError::UnsupportedDimension(0));
        }
        let n = coords.len() / dim;
        let w = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        let mut weights = alloc::vec![w; n];
        normalize(&mut weights);
        Self::new(dim, coords, weights, resolution)
    }

    pub fn from_points(dim: usize, points: &[Point], weights: Vec<f64>, resolution: f64) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            coords.extend_from_slice(&p[..dim]);
        }
        Self::new(dim, coords, weights, resolution)
    }

    /// Skips validation; the caller guarantees the invariants.
    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>, weights: Vec<f64>, resolution: f64) -> Self {
        debug_assert_eq!(coords.len(), dim * weights.len());
        Self {
            dim,
            coords,
            weights,
            resolution,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn point(&self, i: usize) -> Point {
        math::pad(&self.coords[i * self.dim..(i + 1) * self.dim])
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.coords.chunks_exact(self.dim).map(math::pad)
    }

    /// Merges the points of a one-dimensional cloud into cells
    /// `[k w, (k+1) w)` anchored at 0, represented by the cell midpoints
    /// and carrying the summed weights. The output is sorted and its
    /// resolution grows by `w / 2`.
    pub fn dedup_grid(&self, width: f64) -> Result<WeightedCloud> {
        if self.dim != 1 {
            return Err(FracError::DimensionMismatch {
                expected: 1,
                found: self.dim,
            });
        }
        if !(width > 0.0) {
            // a zero-width grid only merges exact duplicates
            return Ok(self.merge_exact());
        }
        let mut keyed: Vec<(i64, f64)> = self
            .coords
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| (math::floor(v / width) as i64, w))
            .collect();
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        let mut i = 0;
        while i < keyed.len() {
            let k = keyed[i].0;
            let mut j = i;
            while j < keyed.len() && keyed[j].0 == k {
                j += 1;
            }
            coords.push((k as f64 + 0.5) * width);
            weights.push(math::compensated_sum(keyed[i..j].iter().map(|e| e.1)));
            i = j;
        }
        Ok(WeightedCloud::from_raw(1, coords, weights, self.resolution + 0.5 * width))
    }

    fn merge_exact(&self) -> WeightedCloud {
        let mut pairs: Vec<(f64, f64)> = self.coords.iter().copied().zip(self.weights.iter().copied()).collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut coords: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            if coords.last() == Some(&v) {
                *weights.last_mut().expect("parallel vectors") += w;
            } else {
                coords.push(v);
                weights.push(w);
            }
        }
        WeightedCloud::from_raw(1, coords, weights, self.resolution)
    }

    /// Minimum and maximum of the Euclidean norm over the points.
    pub fn norm_range(&self) -> (f64, f64) {
        self.points().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            let r = math::norm(&p);
            (lo.min(r), hi.max(r))
        })
    }

    /// Axis-aligned bounds of the points, padded coordinates zero.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in self.dim..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        (lo, hi)
    }
}

/// Rescales nonnegative weights to sum to one.
pub(crate) fn normalize(weights: &mut [f64]) {
    let total = math::compensated_sum(weights.iter().copied());
    if total > 0.0 {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
}
