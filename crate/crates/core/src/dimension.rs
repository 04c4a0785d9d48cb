//! Box counting, local dimensions of weighted clouds, the projected counting
//! certificate for planar homogeneous systems, and direction sweeps.

use alloc::format;
use alloc::vec::Vec;

use crate::cloud::WeightedCloud;
use crate::cover::{self, Node};
use crate::error::{FracError, Result};
use crate::ifs::Ifs;
use crate::maps::{project_ifs, Direction};
use crate::math::{self, Point};
use crate::par;
use crate::ssc::check_ssc;

/// Estimates with `r²` below this are flagged unreliable.
pub const RELIABLE_R_SQUARED: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxCountResult {
    /// Strictly decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    /// Least-squares slope of `log N` against `log(1/δ)`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl BoxCountResult {
    pub fn is_reliable(&self) -> bool {
        self.r_squared >= RELIABLE_R_SQUARED
    }
}

/// Occupied cells of the grid `δ·Z^d` anchored at the origin.
pub fn box_count(cloud: &WeightedCloud, scales: &[f64]) -> Result<BoxCountResult> {
    box_count_anchored(cloud, scales, &math::ORIGIN)
}

/// Same as [`box_count`] on the grid `anchor + δ·Z^d`.
pub fn box_count_anchored(cloud: &WeightedCloud, scales: &[f64], anchor: &Point) -> Result<BoxCountResult> {
    if scales.len() < 2 {
        return Err(FracError::InvalidArgument("box counting needs at least two scales".into()));
    }
    if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(FracError::InvalidArgument(format!("scales must be positive: {scales:?}")));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FracError::InvalidArgument(format!(
            "scales must be strictly decreasing: {scales:?}"
        )));
    }
    let smallest = *scales.last().expect("two scales");
    if smallest < cloud.resolution() {
        return Err(FracError::ScaleBelowResolution {
            scale: smallest,
            resolution: cloud.resolution(),
        });
    }
    let counts = if cloud.dim() == 1 {
        let mut v: Vec<f64> = cloud.coords().iter().map(|x| x - anchor[0]).collect();
        par::sort_f64(&mut v);
        scales.iter().map(|&d| count_sorted(&v, d)).collect()
    } else {
        scales.iter().map(|&d| count_grid(cloud, d, anchor)).collect::<Vec<_>>()
    };
    let (slope, intercept, r_squared) = fit_log_log(scales, &counts);
    Ok(BoxCountResult {
        scales: scales.to_vec(),
        counts,
        slope,
        intercept,
        r_squared,
    })
}

fn count_sorted(sorted: &[f64], delta: f64) -> u64 {
    let mut count = 0;
    let mut last = None;
    for &x in sorted {
        let k = math::floor(x / delta) as i64;
        if last != Some(k) {
            count += 1;
            last = Some(k);
        }
    }
    count
}

fn count_grid(cloud: &WeightedCloud, delta: f64, anchor: &Point) -> u64 {
    let d = cloud.dim();
    let mut keys: Vec<[i64; 3]> = cloud
        .points()
        .map(|p| {
            let mut k = [0i64; 3];
            for i in 0..d {
                k[i] = math::floor((p[i] - anchor[i]) / delta) as i64;
            }
            k
        })
        .collect();
    par::sort_unstable(&mut keys);
    let mut count = 0;
    for (i, k) in keys.iter().enumerate() {
        if i == 0 || keys[i - 1] != *k {
            count += 1;
        }
    }
    count
}

/// Least squares of `log N` on `log(1/δ)`: `(slope, intercept, r²)`.
fn fit_log_log(scales: &[f64], counts: &[u64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = scales.iter().map(|s| -math::ln(*s)).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| math::ln(c as f64)).collect();
    linear_fit(&xs, &ys)
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-300 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Scales `λ^k` for `k = k_min..=k_max`.
pub fn lambda_adic_scales(lambda: f64, k_min: usize, k_max: usize) -> Vec<f64> {
    (k_min..=k_max).map(|k| math::powi(lambda, k as u32)).collect()
}

/// First exponent whose scale falls below the diameter bound `diameter`.
fn first_exponent(lambda: f64, diameter: f64) -> usize {
    if diameter <= 0.0 {
        return 1;
    }
    let k = math::floor(math::ln(diameter) / math::ln(lambda)) + 1.0;
    k.max(1.0) as usize
}

/// Box-count estimate of an attractor over `decades + 1` consecutive powers
/// of the largest ratio. The sample is refined to a quarter of the smallest
/// scale.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetEstimate {
    pub result: BoxCountResult,
    pub base: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub points: usize,
    pub resolution: f64,
}

pub fn estimate_ifs_dimension(ifs: &Ifs, decades: usize, max_cells: usize) -> Result<SetEstimate> {
    if decades == 0 {
        return Err(FracError::InvalidArgument("need at least one decade".into()));
    }
    let lambda = ifs.max_ratio();
    let root = ifs.bounding_ball();
    let k_min = first_exponent(lambda, 2.0 * root.radius);
    let k_max = k_min + decades;
    let scales = lambda_adic_scales(lambda, k_min, k_max);
    let target = scales[scales.len() - 1] / 4.0;
    let cloud = if root.radius == 0.0 {
        crate::cover::sample_cloud_at_depth(ifs, 0, max_cells)?
    } else {
        cover::sample_cloud_capped(ifs, target, max_cells)?
    };
    let result = box_count(&cloud, &scales)?;
    Ok(SetEstimate {
        result,
        base: lambda,
        k_min,
        k_max,
        points: cloud.len(),
        resolution: cloud.resolution(),
    })
}

/// Box-count estimate of a cloud on powers of `base`, ending at the coarsest
/// power not below four times the resolution and spanning up to `decades`
/// powers above it, limited by the cloud extent.
pub fn estimate_cloud_dimension(cloud: &WeightedCloud, base: f64, decades: usize) -> Result<SetEstimate> {
    if !(base > 0.0 && base < 1.0) {
        return Err(FracError::InvalidRatio(base));
    }
    let (lo, hi) = cloud.bounds();
    let extent = math::norm(&math::sub(&hi, &lo));
    let k_lo = first_exponent(base, extent);
    let res = cloud.resolution();
    let k_max = if res > 0.0 {
        let k = math::floor(math::ln(4.0 * res) / math::ln(base));
        if k < 0.0 {
            0
        } else {
            k as usize
        }
    } else {
        k_lo + decades
    };
    let k_min = k_max.saturating_sub(decades).max(k_lo);
    if k_max <= k_min {
        return Err(FracError::ScaleBelowResolution {
            scale: math::powi(base, k_lo as u32 + 1),
            resolution: res,
        });
    }
    let scales = lambda_adic_scales(base, k_min, k_max);
    let result = box_count(cloud, &scales)?;
    Ok(SetEstimate {
        result,
        base,
        k_min,
        k_max,
        points: cloud.len(),
        resolution: res,
    })
}

/// `(r, log μ(B_r(x)) / log r)` for each radius.
pub fn local_dimension(cloud: &WeightedCloud, x: &[f64], radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if x.len() != cloud.dim() {
        return Err(FracError::DimensionMismatch {
            expected: cloud.dim(),
            found: x.len(),
        });
    }
    let xp = math::pad(x);
    let dists: Vec<(f64, f64)> = cloud
        .points()
        .zip(cloud.weights())
        .map(|(p, &w)| (math::dist(&p, &xp), w))
        .collect();
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(FracError::InvalidArgument(format!("radius must lie in (0, 1), got {r}")));
        }
        if r < cloud.resolution() {
            return Err(FracError::ScaleBelowResolution {
                scale: r,
                resolution: cloud.resolution(),
            });
        }
        let mass = math::compensated_sum(dists.iter().filter(|(d, _)| *d <= r).map(|(_, w)| *w)).min(1.0);
        out.push((r, math::ln(mass) / math::ln(r)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZRecord {
    pub point: Point,
    pub direction: Direction,
    pub n: usize,
    pub z: f64,
    pub bound: f64,
    pub cells_visited: u64,
}

impl ZRecord {
    pub fn holds(&self, tol: f64) -> bool {
        self.z <= self.bound + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ltech1Certificate {
    /// Indices of the maps whose fixed points form the triangle.
    pub triangle_maps: [usize; 3],
    pub triangle: [Point; 3],
    pub kappa: f64,
    /// Block length `N`.
    pub block: usize,
    pub p_min: f64,
    pub lambda: f64,
    /// Certified diameter bound used for `N`.
    pub support_diameter: f64,
    pub bound_c: f64,
    /// Largest `n` with `q^{nN}` within the cell cap.
    pub n_max: usize,
    pub records: Vec<ZRecord>,
}

impl Ltech1Certificate {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.holds(tol))
    }
}

/// `min_θ max(|⟨a,e_θ⟩|, |⟨b,e_θ⟩|, |⟨c,e_θ⟩|)` over unit directions in the
/// plane, by a 4096-angle grid refined with golden-section search.
pub fn triangle_kappa(sides: &[Point; 3]) -> f64 {
    let f = |t: f64| {
        let e = [math::cos(t), math::sin(t), 0.0];
        sides.iter().map(|s| math::dot(s, &e).abs()).fold(0.0, f64::max)
    };
    const GRID: usize = 4096;
    let h = core::f64::consts::PI / GRID as f64;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..GRID {
        let t = k as f64 * h;
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    best.0.min(f1).min(f2)
}

/// Counting certificate for projections of a planar homogeneous separated
/// system: computes `κ`, the block length `N` and the bound `c`, then for
/// every test point and direction evaluates
/// `z_n(x) = Σ ν([ī])` over `ī ∈ S^{nN}` whose projected cylinder meets
/// `B_{(κ/4)λ^{nN}}(π x)`, and records it next to `(1 − p_min^N)^n`.
/// Cylinders are replaced by their enclosing balls, which can only enlarge
/// `z_n`.
pub fn ltech1_certificate(
    ifs: &Ifs,
    test_points: &[Point],
    directions: &[Direction],
    n_max: usize,
    max_cells: usize,
) -> Result<Ltech1Certificate> {
    if ifs.dim() != 2 {
        return Err(FracError::DimensionMismatch {
            expected: 2,
            found: ifs.dim(),
        });
    }
    let lambda = ifs
        .common_ratio()
        .ok_or_else(|| FracError::Precondition("the counting certificate needs a homogeneous system".into()))?;
    if !check_ssc(ifs, 10).is_proved() {
        return Err(FracError::Precondition(
            "the counting certificate needs a strongly separated system".into(),
        ));
    }
    let fixed: Vec<Point> = ifs.maps().iter().map(|m| m.fixed_point()).collect();
    let scale = fixed.iter().map(math::norm).fold(1.0, f64::max);
    let mut triangle = None;
    'search: for i in 0..fixed.len() {
        for j in i + 1..fixed.len() {
            for k in j + 1..fixed.len() {
                let u = math::sub(&fixed[j], &fixed[i]);
                let v = math::sub(&fixed[k], &fixed[i]);
                if math::norm(&math::cross(&u, &v)) > 1e-9 * scale * scale {
                    triangle = Some([i, j, k]);
                    break 'search;
                }
            }
        }
    }
    let idx = triangle.ok_or_else(|| FracError::Precondition("the fixed points do not form a triangle".into()))?;
    let tri = [fixed[idx[0]], fixed[idx[1]], fixed[idx[2]]];
    let sides = [
        math::sub(&tri[1], &tri[0]),
        math::sub(&tri[2], &tri[1]),
        math::sub(&tri[0], &tri[2]),
    ];
    let kappa = triangle_kappa(&sides);
    let root = ifs.bounding_ball();
    let diameter = 2.0 * root.radius;
    let block = math::ceil(math::ln(kappa / (4.0 * diameter)) / math::ln(lambda)).max(1.0) as usize;
    let weights = ifs.measure_weights();
    let p_min = weights.iter().copied().fold(1.0, f64::min);
    let per_block = 1.0 - math::powi(p_min, block as u32);
    let bound_c = math::ln(per_block) / (block as f64 * math::ln(lambda));

    let q = ifs.len() as f64;
    let mut feasible = 0;
    while feasible < n_max && math::powi(q, ((feasible + 1) * block) as u32) <= max_cells as f64 {
        feasible += 1;
    }
    if feasible == 0 && n_max > 0 {
        return Err(FracError::CellCapExceeded {
            depth: block,
            cap: max_cells,
        });
    }

    let mut jobs = Vec::new();
    for p in test_points {
        for d in directions {
            if d.dim() != 2 {
                return Err(FracError::DimensionMismatch {
                    expected: 2,
                    found: d.dim(),
                });
            }
            for n in 1..=feasible {
                jobs.push((*p, *d, n));
            }
        }
    }
    let records = par::map_collect(&jobs, |(p, d, n)| {
        let depth = n * block;
        let px = d.project(p);
        let reach = kappa / 4.0 * math::powi(lambda, depth as u32);
        let mut z = Vec::new();
        let mut visited = 0u64;
        z_sum(
            ifs,
            &weights,
            &root,
            d,
            px,
            reach,
            depth,
            &Node::ROOT,
            0,
            &mut z,
            &mut visited,
        );
        ZRecord {
            point: *p,
            direction: *d,
            n: *n,
            z: math::compensated_sum(z),
            bound: math::powi(per_block, *n as u32),
            cells_visited: visited,
        }
    });
    Ok(Ltech1Certificate {
        triangle_maps: idx,
        triangle: tri,
        kappa,
        block,
        p_min,
        lambda,
        support_diameter: diameter,
        bound_c,
        n_max: feasible,
        records,
    })
}

#[allow(clippy::too_many_arguments)]
fn z_sum(
    ifs: &Ifs,
    weights: &[f64],
    root: &crate::ifs::Ball,
    d: &Direction,
    px: f64,
    reach: f64,
    depth: usize,
    node: &Node,
    len: usize,
    out: &mut Vec<f64>,
    visited: &mut u64,
) {
    *visited += 1;
    let ball = node.ball(root);
    // the projected ball is an interval of the same radius around π(center)
    if (d.project(&ball.center) - px).abs() > ball.radius + reach {
        return;
    }
    if len == depth {
        out.push(node.weight);
        return;
    }
    for j in 0..ifs.len() {
        z_sum(
            ifs,
            weights,
            root,
            d,
            px,
            reach,
            depth,
            &node.child(ifs, weights, j),
            len + 1,
            out,
            visited,
        );
    }
}

/// Points of `n` directions spread over S² (Fibonacci lattice), in a fixed
/// order.
pub fn fibonacci_directions(n: usize) -> Vec<Direction> {
    let golden = core::f64::consts::PI * (3.0 - math::sqrt(5.0));
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = math::sqrt((1.0 - z * z).max(0.0));
            let phi = golden * k as f64;
            Direction::new(&[r * math::cos(phi), r * math::sin(phi), z]).expect("unit vector")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub direction: Direction,
    pub slope: f64,
    pub r_squared: f64,
}

/// Box-count slope of the projected attractor for each direction.
pub fn direction_sweep(ifs: &Ifs, directions: &[Direction], decades: usize, max_cells: usize) -> Result<Vec<SweepRow>> {
    if ifs.dim() != 3 {
        return Err(FracError::DimensionMismatch {
            expected: 3,
            found: ifs.dim(),
        });
    }
    let rows = par::map_collect(directions, |n| -> Result<SweepRow> {
        let p = project_ifs(ifs, n)?;
        let e = estimate_ifs_dimension(&p, decades, max_cells)?;
        Ok(SweepRow {
            direction: *n,
            slope: e.result.slope,
            r_squared: e.result.r_squared,
        })
    });
    rows.into_iter().collect()
}
