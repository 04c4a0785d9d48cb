//! Covers of the attractor by balls around cylinder sets, and the
//! deterministic weighted samples built from them.

use alloc::format;
use alloc::vec::Vec;

use crate::cloud::WeightedCloud;
use crate::error::{FracError, Result};
use crate::ifs::{Ball, Ifs, Word};
use crate::math::{self, Point};
use crate::par;

pub const DEFAULT_MAX_CELLS: usize = 10_000_000;

/// Relative slack on the stopping radius so that exact λ-adic targets do not
/// trigger an extra level through rounding.
const RADIUS_SLACK: f64 = 1e-12;

/// Ball `f_ī(B)` around the cylinder `Λ_ī` with its Bernoulli weight.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub word: Word,
    pub center: Point,
    pub radius: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CylinderCover {
    /// Longest word among the cells.
    pub depth: usize,
    pub cells: Vec<Cell>,
    pub root: Ball,
}

impl CylinderCover {
    pub fn total_weight(&self) -> f64 {
        math::compensated_sum(self.cells.iter().map(|c| c.weight))
    }

    pub fn max_radius(&self) -> f64 {
        self.cells.iter().map(|c| c.radius).fold(0.0, f64::max)
    }
}

/// When to stop refining a branch.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop {
    /// Leaves have radius at most this value.
    Radius(f64),
    /// Leaves are exactly the words of this length.
    Depth(usize),
}

impl Stop {
    #[inline]
    fn is_leaf(self, radius: f64, len: usize) -> bool {
        match self {
            Stop::Radius(target) => radius <= target * (1.0 + RADIUS_SLACK),
            Stop::Depth(d) => len >= d,
        }
    }
}

/// State of a node in the symbolic tree: the composed map `f_ī` as
/// `(ratio, translation)` plus the accumulated weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub ratio: f64,
    pub translation: Point,
    pub weight: f64,
}

impl Node {
    pub const ROOT: Node = Node {
        ratio: 1.0,
        translation: math::ORIGIN,
        weight: 1.0,
    };

    #[inline]
    pub fn child(&self, ifs: &Ifs, weights: &[f64], j: usize) -> Node {
        let m = &ifs.maps()[j];
        Node {
            ratio: self.ratio * m.ratio(),
            translation: math::axpy(self.ratio, m.translation_point(), &self.translation),
            weight: self.weight * weights[j],
        }
    }

    #[inline]
    pub fn ball(&self, root: &Ball) -> Ball {
        Ball {
            center: math::axpy(self.ratio, &root.center, &self.translation),
            radius: self.ratio * root.radius,
        }
    }
}

/// Depth-first traversal in lexicographic word order. `visit` receives the
/// word, the node and its ball at every leaf.
pub(crate) fn walk_from<F>(ifs: &Ifs, root: &Ball, stop: Stop, weights: &[f64], node: &Node, word: &mut Vec<u32>, visit: &mut F)
where
    F: FnMut(&[u32], &Node, &Ball),
{
    let ball = node.ball(root);
    if stop.is_leaf(ball.radius, word.len()) || root.radius == 0.0 {
        visit(word, node, &ball);
        return;
    }
    for j in 0..ifs.len() {
        let child = node.child(ifs, weights, j);
        word.push(j as u32);
        walk_from(ifs, root, stop, weights, &child, word, visit);
        word.pop();
    }
}

/// Counts leaves, aborting once `cap` is exceeded. On abort returns the
/// length of the word that crossed the cap.
pub(crate) fn count_leaves(ifs: &Ifs, root: &Ball, stop: Stop, cap: usize) -> core::result::Result<usize, usize> {
    if root.radius == 0.0 {
        return Ok(1);
    }
    if let (Some(lambda), Stop::Radius(target)) = (ifs.common_ratio(), stop) {
        let depth = homogeneous_depth(lambda, root.radius, target);
        let q = ifs.len() as f64;
        let count = math::powi(q, depth as u32);
        return if count > cap as f64 {
            Err(first_depth_over(ifs.len(), cap))
        } else {
            Ok(count as usize)
        };
    }
    if let Stop::Depth(d) = stop {
        let count = math::powi(ifs.len() as f64, d as u32);
        return if count > cap as f64 {
            Err(first_depth_over(ifs.len(), cap).min(d))
        } else {
            Ok(count as usize)
        };
    }
    fn rec(ifs: &Ifs, r: f64, len: usize, stop: Stop, root_r: f64, cap: usize, n: &mut usize) -> core::result::Result<(), usize> {
        if stop.is_leaf(r * root_r, len) || root_r == 0.0 {
            *n += 1;
            return if *n > cap { Err(len) } else { Ok(()) };
        }
        for m in ifs.maps() {
            rec(ifs, r * m.ratio(), len + 1, stop, root_r, cap, n)?;
        }
        Ok(())
    }
    let mut n = 0;
    rec(ifs, 1.0, 0, stop, root.radius, cap, &mut n)?;
    Ok(n)
}

fn first_depth_over(q: usize, cap: usize) -> usize {
    let mut d = 0;
    let mut c = 1.0;
    while c <= cap as f64 {
        c *= q as f64;
        d += 1;
    }
    d
}

/// Number of levels a homogeneous system needs to bring `root_radius` down
/// to `target`.
pub(crate) fn homogeneous_depth(lambda: f64, root_radius: f64, target: f64) -> usize {
    if root_radius == 0.0 {
        return 0;
    }
    let mut depth = 0;
    let mut r = root_radius;
    while r > target * (1.0 + RADIUS_SLACK) {
        r *= lambda;
        depth += 1;
    }
    depth
}

fn check_target(target_radius: f64) -> Result<()> {
    if !(target_radius > 0.0) || !target_radius.is_finite() {
        return Err(FracError::InvalidArgument(format!(
            "target radius must be positive, got {target_radius}"
        )));
    }
    Ok(())
}

/// Collects leaves of every depth-1 subtree separately and concatenates them
/// in symbol order, so the result is identical with or without threads.
fn collect_leaves<T, F>(ifs: &Ifs, root: &Ball, stop: Stop, weights: &[f64], make: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[u32], &Node, &Ball) -> T + Sync + Send,
{
    if stop.is_leaf(root.radius, 0) || root.radius == 0.0 {
        let node = Node::ROOT;
        return alloc::vec![make(&[], &node, &node.ball(root))];
    }
    let parts = par::map_range(ifs.len(), |j| {
        let mut out = Vec::new();
        let child = Node::ROOT.child(ifs, weights, j);
        let mut word = alloc::vec![j as u32];
        walk_from(ifs, root, stop, weights, &child, &mut word, &mut |w, n, b| {
            out.push(make(w, n, b))
        });
        out
    });
    let total = parts.iter().map(Vec::len).sum();
    let mut all = Vec::with_capacity(total);
    for p in parts {
        all.extend(p);
    }
    all
}

pub(crate) fn cells(ifs: &Ifs, root: &Ball, stop: Stop, max_cells: usize) -> Result<Vec<Cell>> {
    count_leaves(ifs, root, stop, max_cells).map_err(|depth| FracError::CellCapExceeded { depth, cap: max_cells })?;
    let weights = ifs.measure_weights();
    Ok(collect_leaves(ifs, root, stop, &weights, |w, n, b| Cell {
        word: Word(w.to_vec()),
        center: b.center,
        radius: b.radius,
        weight: n.weight,
    }))
}

/// Adaptive cover: every cell of radius above `target_radius` is split into
/// its `q` children. Uses the default cell cap.
pub fn cylinder_cover(ifs: &Ifs, target_radius: f64) -> Result<CylinderCover> {
    cylinder_cover_capped(ifs, target_radius, DEFAULT_MAX_CELLS)
}

pub fn cylinder_cover_capped(ifs: &Ifs, target_radius: f64, max_cells: usize) -> Result<CylinderCover> {
    check_target(target_radius)?;
    let root = ifs.bounding_ball();
    let cells = cells(ifs, &root, Stop::Radius(target_radius), max_cells)?;
    let depth = cells.iter().map(|c| c.word.len()).max().unwrap_or(0);
    Ok(CylinderCover { depth, cells, root })
}

/// All words of length `depth`, relative to the given root ball.
pub fn cover_at_depth(ifs: &Ifs, root: &Ball, depth: usize, max_cells: usize) -> Result<CylinderCover> {
    let cells = cells(ifs, root, Stop::Depth(depth), max_cells)?;
    Ok(CylinderCover {
        depth,
        cells,
        root: *root,
    })
}

/// Cylinder centers of the adaptive cover with their Bernoulli weights.
/// Deterministic; the resolution is the largest cell radius.
pub fn sample_cloud(ifs: &Ifs, target_radius: f64) -> Result<WeightedCloud> {
    sample_cloud_capped(ifs, target_radius, DEFAULT_MAX_CELLS)
}

pub fn sample_cloud_capped(ifs: &Ifs, target_radius: f64, max_cells: usize) -> Result<WeightedCloud> {
    check_target(target_radius)?;
    let root = ifs.bounding_ball();
    let stop = Stop::Radius(target_radius);
    sample_with_stop(ifs, &root, stop, max_cells)
}

/// Centers of all depth-`depth` cylinders.
pub fn sample_cloud_at_depth(ifs: &Ifs, depth: usize, max_cells: usize) -> Result<WeightedCloud> {
    let root = ifs.bounding_ball();
    sample_with_stop(ifs, &root, Stop::Depth(depth), max_cells)
}

fn sample_with_stop(ifs: &Ifs, root: &Ball, stop: Stop, max_cells: usize) -> Result<WeightedCloud> {
    count_leaves(ifs, root, stop, max_cells).map_err(|depth| FracError::CellCapExceeded { depth, cap: max_cells })?;
    let weights = ifs.measure_weights();
    let dim = ifs.dim();
    let leaves = collect_leaves(ifs, root, stop, &weights, |_, n, b| (b.center, b.radius, n.weight));
    let mut coords = Vec::with_capacity(leaves.len() * dim);
    let mut ws = Vec::with_capacity(leaves.len());
    let mut resolution = 0.0f64;
    for (c, r, w) in leaves {
        coords.extend_from_slice(&c[..dim]);
        ws.push(w);
        resolution = resolution.max(r);
    }
    crate::cloud::normalize(&mut ws);
    Ok(WeightedCloud::from_raw(dim, coords, ws, resolution))
}
