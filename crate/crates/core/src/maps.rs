//! Orthogonal, radial and geodesic projections, the catalog of smooth
//! scalar maps, and images of weighted clouds under them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cloud::WeightedCloud;
use crate::error::{FracError, Result};
use crate::ifs::{Ifs, Similitude};
use crate::math::{self, Point, ORIGIN};
use crate::par;

/// A unit vector in R² or R³.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct Direction {
    v: Point,
    dim: usize,
}

impl Direction {
    /// Normalizes `v`; zero and non-finite vectors are rejected.
    pub fn new(v: &[f64]) -> Result<Self> {
        let dim = v.len();
        if !(2..=3).contains(&dim) {
            return Err(FracError::UnsupportedDimension(dim));
        }
        let p = math::pad(v);
        let n = math::norm(&p);
        if !(n > 0.0) || !n.is_finite() {
            return Err(FracError::InvalidArgument(format!("cannot normalize direction {v:?}")));
        }
        Ok(Self {
            v: math::scale(&p, 1.0 / n),
            dim,
        })
    }

    /// Unit vector at angle `theta` in the plane.
    pub fn planar(theta: f64) -> Self {
        Self {
            v: [math::cos(theta), math::sin(theta), 0.0],
            dim: 2,
        }
    }

    pub fn axis(dim: usize, k: usize) -> Result<Self> {
        let mut v = [0.0; 3];
        if k >= dim {
            return Err(FracError::InvalidArgument(format!(
                "axis {k} out of range for dimension {dim}"
            )));
        }
        v[k] = 1.0;
        Self::new(&v[..dim])
    }

    pub fn vector(&self) -> &Point {
        &self.v
    }

    pub fn components(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn negated(&self) -> Self {
        Self {
            v: math::scale(&self.v, -1.0),
            dim: self.dim,
        }
    }

    #[inline]
    pub fn project(&self, x: &Point) -> f64 {
        math::dot(x, &self.v)
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = FracError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(&v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.components().to_vec()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(FracError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `π_n(x) = ⟨x, n⟩` pointwise. Projection is 1-Lipschitz, so the
/// resolution carries over.
pub fn orthogonal_project_cloud(cloud: &WeightedCloud, n: &Direction) -> Result<WeightedCloud> {
    check_dim(n.dim(), cloud.dim())?;
    let coords: Vec<f64> = cloud.points().map(|p| n.project(&p)).collect();
    Ok(WeightedCloud::from_raw(
        1,
        coords,
        cloud.weights().to_vec(),
        cloud.resolution(),
    ))
}

/// `πΦ = {λ_i x + ⟨t_i, n⟩}` on the line.
pub fn project_ifs(ifs: &Ifs, n: &Direction) -> Result<Ifs> {
    check_dim(n.dim(), ifs.dim())?;
    let maps = ifs
        .maps()
        .iter()
        .map(|m| Similitude::new(m.ratio(), &[n.project(m.translation_point())]))
        .collect::<Result<Vec<_>>>()?;
    Ifs::new(maps, ifs.weights().map(|w| w.to_vec()))
}

/// Orthonormal basis `(u, v)` of the plane with normal `n` in R³.
pub fn plane_basis(n: &Direction) -> Result<(Point, Point)> {
    check_dim(3, n.dim())?;
    let nv = n.vector();
    // cross with the axis least aligned with n
    let k = (0..3)
        .min_by(|&a, &b| nv[a].abs().total_cmp(&nv[b].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let u = math::cross(nv, &e);
    let u = math::scale(&u, 1.0 / math::norm(&u));
    Ok((u, math::cross(nv, &u)))
}

/// The projected system `{λ_i x + (⟨t_i, u⟩, ⟨t_i, v⟩)}` on the plane with
/// normal `n`, in the coordinates of [`plane_basis`].
pub fn plane_project_ifs(ifs: &Ifs, n: &Direction) -> Result<Ifs> {
    check_dim(3, ifs.dim())?;
    let (u, v) = plane_basis(n)?;
    let maps = ifs
        .maps()
        .iter()
        .map(|m| {
            let t = m.translation_point();
            Similitude::new(m.ratio(), &[math::dot(t, &u), math::dot(t, &v)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ifs::new(maps, ifs.weights().map(|w| w.to_vec()))
}

/// Result of a radial projection together with the smallest sampled norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialImage {
    pub cloud: WeightedCloud,
    pub r_min: f64,
}

/// `P_d(x) = x / ‖x‖` pointwise onto the unit sphere of the same ambient
/// space. Points closer to the origin than `exclusion_radius` are rejected.
/// The resolution is rescaled by the Lipschitz bound `2 / (r_min − res)`,
/// valid on every point within `res` of the cloud.
pub fn radial_project(cloud: &WeightedCloud, exclusion_radius: f64) -> Result<RadialImage> {
    if cloud.dim() < 2 {
        return Err(FracError::UnsupportedDimension(cloud.dim()));
    }
    let (r_min, _) = cloud.norm_range();
    let floor = exclusion_radius.max(0.0);
    if !(r_min > floor) {
        return Err(FracError::Domain(format!(
            "radial projection is defined on R^d ∖ {{0}}; a sample has norm {r_min} within the exclusion radius {floor}"
        )));
    }
    let res = cloud.resolution();
    if !(r_min > res) {
        return Err(FracError::Domain(format!(
            "radial projection is defined on R^d ∖ {{0}}; the cloud resolution {res} reaches the origin (smallest norm {r_min})"
        )));
    }
    let dim = cloud.dim();
    let mut coords = Vec::with_capacity(cloud.coords().len());
    for p in cloud.points() {
        let u = math::scale(&p, 1.0 / math::norm(&p));
        coords.extend_from_slice(&u[..dim]);
    }
    let resolution = (2.0 * res / (r_min - res)).min(2.0);
    Ok(RadialImage {
        cloud: WeightedCloud::from_raw(dim, coords, cloud.weights().to_vec(), resolution),
        r_min,
    })
}

/// Azimuthal angle `atan2(y, x)`. Input points lie on S² (or S¹ for
/// planar clouds). Points within `pole_tol` of a pole are rejected. The
/// angle resolution accounts for the horizontal radius shrinking towards
/// the poles.
pub fn geodesic_project(cloud: &WeightedCloud, pole_tol: f64) -> Result<WeightedCloud> {
    if cloud.dim() < 2 {
        return Err(FracError::UnsupportedDimension(cloud.dim()));
    }
    let mut coords = Vec::with_capacity(cloud.len());
    let mut rho_min = f64::INFINITY;
    for p in cloud.points() {
        if cloud.dim() == 3 && p[2].abs() >= 1.0 - pole_tol {
            return Err(FracError::Domain(format!(
                "geodesic projection is well defined except on the poles; got {p:?}"
            )));
        }
        let rho = math::sqrt(p[0] * p[0] + p[1] * p[1]);
        rho_min = rho_min.min(rho);
        coords.push(math::atan2(p[1], p[0]));
    }
    let res = cloud.resolution();
    let resolution = if rho_min > res {
        res / (rho_min - res) * core::f64::consts::FRAC_PI_2
    } else {
        core::f64::consts::PI
    };
    Ok(WeightedCloud::from_raw(1, coords, cloud.weights().to_vec(), resolution))
}

/// A smooth scalar map on R^d with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum SmoothMap {
    /// `‖x − pin‖`
    Distance { pin: Vec<f64> },
    /// `xy`
    Product2,
    /// `xyz`
    Product3,
    /// `⟨x, n⟩`
    Linear { n: Vec<f64> },
    /// `Σ c · x^a y^b z^c`
    Poly { dim: usize, coeffs: Vec<(f64, [u32; 3])> },
}

pub type Hessian = [[f64; 3]; 3];

impl SmoothMap {
    pub fn distance(pin: &[f64]) -> Self {
        SmoothMap::Distance { pin: pin.to_vec() }
    }

    pub fn linear(n: &Direction) -> Self {
        SmoothMap::Linear {
            n: n.components().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothMap::Distance { pin } => pin.len(),
            SmoothMap::Product2 => 2,
            SmoothMap::Product3 => 3,
            SmoothMap::Linear { n } => n.len(),
            SmoothMap::Poly { dim, .. } => *dim,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SmoothMap::Distance { pin } => format!("distance{pin:?}"),
            SmoothMap::Product2 => "product2".into(),
            SmoothMap::Product3 => "product3".into(),
            SmoothMap::Linear { n } => format!("linear{n:?}"),
            SmoothMap::Poly { coeffs, .. } => format!("poly[{} terms]", coeffs.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !(1..=3).contains(&d) {
            return Err(FracError::UnsupportedDimension(d));
        }
        if let SmoothMap::Linear { n } = self {
            let norm = math::norm(&math::pad(n));
            if (norm - 1.0).abs() > 1e-12 {
                return Err(FracError::InvalidArgument(format!(
                    "linear map needs a unit vector, got norm {norm}"
                )));
            }
        }
        if let SmoothMap::Poly { coeffs, .. } = self {
            if coeffs.iter().any(|(_, e)| e[d..].iter().any(|&k| k != 0)) {
                return Err(FracError::InvalidArgument(
                    "polynomial uses a variable beyond its dimension".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            SmoothMap::Distance { pin } => math::dist(x, &math::pad(pin)),
            SmoothMap::Product2 => x[0] * x[1],
            SmoothMap::Product3 => x[0] * x[1] * x[2],
            SmoothMap::Linear { n } => math::dot(x, &math::pad(n)),
            SmoothMap::Poly { coeffs, .. } => coeffs.iter().map(|(c, e)| c * monomial(x, e)).sum(),
        }
    }

    pub fn gradient(&self, x: &Point) -> Point {
        match self {
            SmoothMap::Distance { pin } => {
                let d = math::sub(x, &math::pad(pin));
                math::scale(&d, 1.0 / math::norm(&d))
            }
            SmoothMap::Product2 => [x[1], x[0], 0.0],
            SmoothMap::Product3 => [x[1] * x[2], x[0] * x[2], x[0] * x[1]],
            SmoothMap::Linear { n } => math::pad(n),
            SmoothMap::Poly { coeffs, .. } => {
                let mut g = ORIGIN;
                for (c, e) in coeffs {
                    for (k, gk) in g.iter_mut().enumerate() {
                        if e[k] > 0 {
                            let mut de = *e;
                            de[k] -= 1;
                            *gk += c * e[k] as f64 * monomial(x, &de);
                        }
                    }
                }
                g
            }
        }
    }

    pub fn hessian(&self, x: &Point) -> Hessian {
        let mut h = [[0.0; 3]; 3];
        match self {
            SmoothMap::Distance { pin } => {
                let d = self.dim();
                let diff = math::sub(x, &math::pad(pin));
                let r = math::norm(&diff);
                let u = math::scale(&diff, 1.0 / r);
                for i in 0..d {
                    for j in 0..d {
                        let id = if i == j { 1.0 } else { 0.0 };
                        h[i][j] = (id - u[i] * u[j]) / r;
                    }
                }
            }
            SmoothMap::Product2 => {
                h[0][1] = 1.0;
                h[1][0] = 1.0;
            }
            SmoothMap::Product3 => {
                h[0][1] = x[2];
                h[1][0] = x[2];
                h[0][2] = x[1];
                h[2][0] = x[1];
                h[1][2] = x[0];
                h[2][1] = x[0];
            }
            SmoothMap::Linear { .. } => {}
            SmoothMap::Poly { coeffs, .. } => {
                for (c, e) in coeffs {
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut de = *e;
                            if de[i] == 0 {
                                continue;
                            }
                            let fi = de[i] as f64;
                            de[i] -= 1;
                            if de[j] == 0 {
                                continue;
                            }
                            let fj = de[j] as f64;
                            de[j] -= 1;
                            h[i][j] += c * fi * fj * monomial(x, &de);
                        }
                    }
                }
            }
        }
        h
    }
}

fn monomial(x: &Point, e: &[u32; 3]) -> f64 {
    math::powi(x[0], e[0]) * math::powi(x[1], e[1]) * math::powi(x[2], e[2])
}

fn frobenius(h: &Hessian) -> f64 {
    math::sqrt(h.iter().flatten().map(|v| v * v).sum())
}

/// Pointwise image `g(x)` on the line. The resolution is scaled by a
/// Lipschitz bound on the sampled region: the largest gradient norm plus a
/// second-order term for the `res`-neighbourhood.
pub fn map_image(map: &SmoothMap, cloud: &WeightedCloud) -> Result<WeightedCloud> {
    check_dim(map.dim(), cloud.dim())?;
    let res = cloud.resolution();
    let idx: Vec<usize> = (0..cloud.len()).collect();
    let per_point = par::map_collect(&idx, |&i| {
        let p = cloud.point(i);
        let g = math::norm(&map.gradient(&p));
        let h = if res > 0.0 { frobenius(&map.hessian(&p)) } else { 0.0 };
        (map.value(&p), g + res * h)
    });
    let lip = per_point.iter().map(|v| v.1).fold(0.0, f64::max);
    let coords = per_point.into_iter().map(|v| v.0).collect();
    Ok(WeightedCloud::from_raw(1, coords, cloud.weights().to_vec(), res * lip))
}

/// Sorts `(cell, weight)` entries and merges equal cells. Sorting on the
/// weight as well fixes the summation order independent of how the entries
/// were produced.
fn merge_cells(mut entries: Vec<(i64, f64)>, width: f64, resolution: f64) -> WeightedCloud {
    #[cfg(feature = "parallel")]
    {
        use rayon::slice::ParallelSliceMut;
        entries.par_sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    #[cfg(not(feature = "parallel"))]
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let k = entries[i].0;
        let mut j = i;
        while j < entries.len() && entries[j].0 == k {
            j += 1;
        }
        coords.push((k as f64 + 0.5) * width);
        weights.push(math::compensated_sum(entries[i..j].iter().map(|e| e.1)));
        i = j;
    }
    crate::cloud::normalize(&mut weights);
    WeightedCloud::from_raw(1, coords, weights, resolution + 0.5 * width)
}

fn merge_values(values: Vec<(f64, f64)>, width: f64, resolution: f64) -> Result<WeightedCloud> {
    if width > 0.0 {
        let entries = values.into_iter().map(|(v, w)| (math::floor(v / width) as i64, w)).collect();
        Ok(merge_cells(entries, width, resolution))
    } else {
        let (coords, mut weights): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
        crate::cloud::normalize(&mut weights);
        WeightedCloud::from_raw(1, coords, weights, resolution).dedup_grid(0.0)
    }
}

/// Stride and phase selecting at most `cap` of `total` items evenly.
fn stride_for(total: u128, cap: usize) -> (u128, u128) {
    let cap = cap.max(1) as u128;
    if total <= cap {
        (1, 0)
    } else {
        let stride = total.div_ceil(cap);
        (stride, stride / 2)
    }
}

/// Distances `‖pin − y‖` (pinned) or `‖x − y‖` over pairs including `x = y`
/// (unpinned), deduplicated on a grid of width equal to the input
/// resolution. Unpinned pairs beyond `max_pairs` are thinned by a fixed
/// stride over the lexicographic pair order `i ≤ j`.
pub fn distance_set(cloud: &WeightedCloud, pin: Option<&[f64]>, max_pairs: usize) -> Result<WeightedCloud> {
    let res = cloud.resolution();
    match pin {
        Some(pin) => {
            check_dim(cloud.dim(), pin.len())?;
            let a = math::pad(pin);
            let values = cloud
                .points()
                .zip(cloud.weights())
                .map(|(p, &w)| (math::dist(&a, &p), w))
                .collect();
            merge_values(values, res, res)
        }
        None => {
            let n = cloud.len();
            let total = (n as u128) * (n as u128 + 1) / 2;
            let (stride, phase) = stride_for(total, max_pairs);
            let pts: Vec<Point> = cloud.points().collect();
            let w = cloud.weights();
            let rows: Vec<usize> = (0..n).collect();
            let parts = par::map_collect(&rows, |&i| {
                // index of the first pair (i, i) in the flattened order
                let start = (i as u128) * (2 * n as u128 - i as u128 + 1) / 2;
                let len = (n - i) as u128;
                let mut first = if start % stride <= phase {
                    phase - start % stride
                } else {
                    stride - start % stride + phase
                };
                let mut out = Vec::new();
                while first < len {
                    let j = i + first as usize;
                    let mult = if i == j { 1.0 } else { 2.0 };
                    out.push((math::dist(&pts[i], &pts[j]), mult * w[i] * w[j]));
                    first += stride;
                }
                out
            });
            let values: Vec<(f64, f64)> = parts.into_iter().flatten().collect();
            merge_values(values, res, 2.0 * res)
        }
    }
}

/// Products `x₁ x₂ (x₃)` over tuples of points from one-dimensional clouds,
/// thinned to at most `cap` tuples and deduplicated on a grid whose width is
/// the certified product resolution.
pub fn algebraic_product(clouds: &[&WeightedCloud], cap: usize) -> Result<WeightedCloud> {
    if !(2..=3).contains(&clouds.len()) {
        return Err(FracError::InvalidArgument(format!(
            "algebraic product takes 2 or 3 factors, got {}",
            clouds.len()
        )));
    }
    for c in clouds {
        check_dim(1, c.dim())?;
    }
    let resolution = product_resolution(clouds);
    let sizes: Vec<u128> = clouds.iter().map(|c| c.len() as u128).collect();
    let total: u128 = sizes.iter().product();
    let (stride, phase) = stride_for(total, cap);
    let inner: u128 = sizes[1..].iter().product();
    let rows: Vec<usize> = (0..clouds[0].len()).collect();
    let width = resolution;
    let parts = par::map_collect(&rows, |&i| {
        let start = i as u128 * inner;
        let mut k = if start % stride <= phase {
            phase - start % stride
        } else {
            stride - start % stride + phase
        };
        let (x, wx) = (clouds[0].coords()[i], clouds[0].weights()[i]);
        let mut out = Vec::new();
        while k < inner {
            let (mut v, mut w) = (x, wx);
            let mut rest = k;
            for c in clouds[1..].iter().rev() {
                let len = c.len() as u128;
                let j = (rest % len) as usize;
                rest /= len;
                v *= c.coords()[j];
                w *= c.weights()[j];
            }
            out.push((v, w));
            k += stride;
        }
        if width > 0.0 {
            out.into_iter()
                .map(|(v, w)| (math::floor(v / width) as i64, w))
                .collect::<Vec<_>>()
        } else {
            out.into_iter().map(|(v, w)| (v.to_bits() as i64, w)).collect()
        }
    });
    let entries: Vec<(i64, f64)> = parts.into_iter().flatten().collect();
    if width > 0.0 {
        Ok(merge_cells(entries, width, resolution))
    } else {
        let values = entries.into_iter().map(|(b, w)| (f64::from_bits(b as u64), w)).collect();
        merge_values(values, 0.0, 0.0)
    }
}

/// `Π(M_i + r_i) − Π M_i` with `M_i` the largest magnitude of factor `i`:
/// bounds how far a product can move when each factor moves by `r_i`.
fn product_resolution(clouds: &[&WeightedCloud]) -> f64 {
    let mut outer = 1.0;
    let mut inner = 1.0;
    for c in clouds {
        let m = c.coords().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        outer *= m + c.resolution();
        inner *= m;
    }
    (outer - inner).max(0.0)
}

/// Cartesian product of one-dimensional clouds as a cloud in R^k with
/// product weights.
pub fn cartesian_cloud(clouds: &[&WeightedCloud]) -> Result<WeightedCloud> {
    if !(2..=3).contains(&clouds.len()) {
        return Err(FracError::InvalidArgument(format!(
            "cartesian product takes 2 or 3 factors, got {}",
            clouds.len()
        )));
    }
    for c in clouds {
        check_dim(1, c.dim())?;
    }
    let mut coords: Vec<Vec<f64>> = alloc::vec![Vec::new()];
    let mut weights = alloc::vec![1.0];
    for c in clouds {
        let mut nc = Vec::with_capacity(coords.len() * c.len());
        let mut nw = Vec::with_capacity(coords.len() * c.len());
        for (p, w) in coords.iter().zip(&weights) {
            for (v, wv) in c.coords().iter().zip(c.weights()) {
                let mut q = p.clone();
                q.push(*v);
                nc.push(q);
                nw.push(w * wv);
            }
        }
        coords = nc;
        weights = nw;
    }
    let res = math::sqrt(clouds.iter().map(|c| c.resolution() * c.resolution()).sum());
    crate::cloud::normalize(&mut weights);
    Ok(WeightedCloud::from_raw(clouds.len(), coords.concat(), weights, res))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvyReport {
    pub min_gradient_norm: f64,
    pub min_curvature_norm: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `(g_xx g_y − g_xy g_x, g_xy g_y − g_yy g_x)`
pub fn curvature_vector(map: &SmoothMap, x: &Point) -> [f64; 2] {
    let g = map.gradient(x);
    let h = map.hessian(x);
    [h[0][0] * g[1] - h[0][1] * g[0], h[0][1] * g[1] - h[1][1] * g[0]]
}

/// Minimum gradient norm and curvature-vector norm over a planar cloud.
/// The default threshold is `1e-6` times the largest sample norm.
pub fn curvy_check(map: &SmoothMap, cloud: &WeightedCloud, threshold: Option<f64>) -> Result<CurvyReport> {
    check_dim(2, cloud.dim())?;
    check_dim(2, map.dim())?;
    let scale = cloud.norm_range().1.max(f64::MIN_POSITIVE);
    let threshold = threshold.unwrap_or(1e-6 * scale);
    let mut min_g = f64::INFINITY;
    let mut min_c = f64::INFINITY;
    for p in cloud.points() {
        min_g = min_g.min(math::norm(&map.gradient(&p)));
        let c = curvature_vector(map, &p);
        min_c = min_c.min(math::sqrt(c[0] * c[0] + c[1] * c[1]));
    }
    Ok(CurvyReport {
        min_gradient_norm: min_g,
        min_curvature_norm: min_c,
        threshold,
        pass: min_g > threshold && min_c > threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmainOptions {
    /// Ray parameters `t` at which `∇_{t·x} g` is compared with `∇_x g`.
    pub ray_ts: Vec<f64>,
    /// Open box standing in for the domain `V`; `None` is all of R³.
    pub domain: Option<(Point, Point)>,
    pub cross_tol: f64,
    pub gradient_floor: f64,
    pub lipschitz_floor: f64,
    /// Pair budget for the bi-Lipschitz scan; pairs are thinned by stride.
    pub max_pairs: usize,
}

impl Default for TmainOptions {
    fn default() -> Self {
        Self {
            ray_ts: alloc::vec![0.5, 2.0, 3.0],
            domain: None,
            cross_tol: 1e-10,
            gradient_floor: 1e-12,
            lipschitz_floor: 1e-9,
            max_pairs: 4_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TmainReport {
    pub min_gradient_norm: f64,
    pub gradient_pass: bool,
    pub max_normalized_cross: f64,
    pub cross_pass: bool,
    pub skipped_ray_samples: usize,
    pub lipschitz_min: f64,
    pub lipschitz_max: f64,
    pub lipschitz_pairs: usize,
    pub lipschitz_pass: bool,
}

impl TmainReport {
    pub fn pass(&self) -> bool {
        self.gradient_pass && self.cross_pass && self.lipschitz_pass
    }
}

fn inside(domain: &Option<(Point, Point)>, x: &Point) -> bool {
    match domain {
        None => math::norm(x) > 0.0,
        Some((lo, hi)) => (0..3).all(|k| x[k] > lo[k] && x[k] < hi[k]),
    }
}

/// Checks the three conditions for non-linear images of sets in R³ on a
/// cloud: nonvanishing gradient, gradient direction constant along rays,
/// and bi-Lipschitz behaviour of `h_g(x) = P₃(∇_x g)` measured against
/// `P₃(x)` on pairs separated by at least the cloud resolution.
pub fn tmain_condition_check(map: &SmoothMap, cloud: &WeightedCloud, opts: &TmainOptions) -> Result<TmainReport> {
    check_dim(3, cloud.dim())?;
    check_dim(3, map.dim())?;
    let pts: Vec<Point> = cloud.points().collect();
    if pts.iter().any(|p| math::norm(p) == 0.0) {
        return Err(FracError::Domain("the origin is not in R^3 ∖ {0}".into()));
    }
    let mut min_g = f64::INFINITY;
    let mut max_cross = 0.0f64;
    let mut skipped = 0;
    let mut grads = Vec::with_capacity(pts.len());
    for p in &pts {
        let g = map.gradient(p);
        let gn = math::norm(&g);
        min_g = min_g.min(gn);
        for &t in &opts.ray_ts {
            let tp = math::scale(p, t);
            if !inside(&opts.domain, &tp) {
                skipped += 1;
                continue;
            }
            let gt = map.gradient(&tp);
            let denom = math::norm(&gt) * gn;
            let c = if denom > 0.0 {
                math::norm(&math::cross(&gt, &g)) / denom
            } else {
                f64::INFINITY
            };
            max_cross = max_cross.max(c);
        }
        grads.push(if gn > 0.0 { math::scale(&g, 1.0 / gn) } else { ORIGIN });
    }
    let dirs: Vec<Point> = pts.iter().map(|p| math::scale(p, 1.0 / math::norm(p))).collect();
    let floor = cloud.resolution();
    let n = pts.len();
    let total = (n as u128) * (n as u128).saturating_sub(1) / 2;
    let (stride, phase) = stride_for(total, opts.max_pairs);
    let rows: Vec<usize> = (0..n).collect();
    let parts = par::map_collect(&rows, |&i| {
        let start: u128 = (i as u128) * (2 * n as u128 - i as u128 - 1) / 2;
        let len = (n - i - 1) as u128;
        let mut k = if start % stride <= phase {
            phase - start % stride
        } else {
            stride - start % stride + phase
        };
        let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0usize);
        while k < len {
            let j = i + 1 + k as usize;
            let sep = math::dist(&dirs[i], &dirs[j]);
            if sep >= floor && sep > 0.0 {
                let ratio = math::dist(&grads[i], &grads[j]) / sep;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                count += 1;
            }
            k += stride;
        }
        (lo, hi, count)
    });
    let (lip_min, lip_max, pairs) = parts.into_iter().fold((f64::INFINITY, 0.0f64, 0usize), |a, b| {
        (a.0.min(b.0), a.1.max(b.1), a.2 + b.2)
    });
    Ok(TmainReport {
        min_gradient_norm: min_g,
        gradient_pass: min_g > opts.gradient_floor,
        max_normalized_cross: max_cross,
        cross_pass: max_cross <= opts.cross_tol,
        skipped_ray_samples: skipped,
        lipschitz_min: if pairs > 0 { lip_min } else { 0.0 },
        lipschitz_max: lip_max,
        lipschitz_pairs: pairs,
        lipschitz_pass: pairs > 0 && lip_min >= opts.lipschitz_floor,
    })
}
