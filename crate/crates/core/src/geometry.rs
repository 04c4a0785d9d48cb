//! Separation geometry in R³: double cones, affine rank, ball-versus-cone
//! certificates, and certified brackets for the smallest angle between a
//! direction and the difference vectors of an attractor.

use alloc::vec::Vec;

use crate::cover::Node;
use crate::error::{FracError, Result};
use crate::ifs::{Ball, Ifs, Word};
use crate::maps::Direction;
use crate::math::{self, Point};
use crate::par;
use crate::ssc::{check_ssc, SscCertificate};

/// `{y : |⟨x − y, v⟩| ≥ cos α ‖x − y‖}` with vertex `x`, axis `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoubleCone {
    pub vertex: Point,
    pub axis: Direction,
    pub half_angle: f64,
}

impl DoubleCone {
    pub fn new(vertex: &[f64], axis: Direction, half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < core::f64::consts::FRAC_PI_2) {
            return Err(FracError::InvalidArgument(alloc::format!(
                "cone half-angle must lie in (0, π/2), got {half_angle}"
            )));
        }
        Ok(Self {
            vertex: math::pad(vertex),
            axis,
            half_angle,
        })
    }

    /// Angle between `y − vertex` and the axis line, in `[0, π/2]`.
    fn axis_angle(&self, y: &Point) -> f64 {
        let d = math::sub(y, &self.vertex);
        let len = math::norm(&d);
        math::acos(math::dot(&d, self.axis.vector()).abs() / len)
    }
}

/// Relative slack absorbing the rounding of `cos α` on the boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Boundary included.
pub fn cone_contains(cone: &DoubleCone, y: &Point) -> bool {
    let d = math::sub(&cone.vertex, y);
    let len = math::norm(&d);
    math::dot(&d, cone.axis.vector()).abs() >= (math::cos(cone.half_angle) - BOUNDARY_SLACK) * len
}

/// Rank of the centered point set: singular values of the scatter matrix
/// above `tol ×` the largest one are counted.
pub fn affine_dimension(points: &[Point], tol: f64) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points.len() as f64;
    let mut c = math::ORIGIN;
    for p in points {
        c = math::add(&c, p);
    }
    c = math::scale(&c, 1.0 / n);
    let mut s = [[0.0; 3]; 3];
    for p in points {
        let d = math::sub(p, &c);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += d[i] * d[j];
            }
        }
    }
    let ev = math::symmetric_eigenvalues(s);
    let sv: Vec<f64> = ev.iter().map(|e| math::sqrt(e.max(0.0))).collect();
    if sv[0] == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > tol * sv[0]).count()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConeTest {
    /// This cylinder ball lies inside the open ball-and-cone region, so the
    /// attractor meets it.
    NonemptyWitness {
        word: Word,
    },
    /// Every cylinder ball at this depth misses the closed region.
    EmptyCertified {
        depth: usize,
    },
    Undetermined {
        depth: usize,
        open_cells: usize,
    },
}

enum BallVsRegion {
    Outside,
    Inside,
    Straddles,
}

fn classify(cone: &DoubleCone, r: f64, ball: &Ball) -> BallVsRegion {
    let dist = math::dist(&ball.center, &cone.vertex);
    if dist > r + ball.radius {
        return BallVsRegion::Outside;
    }
    if dist <= ball.radius {
        return BallVsRegion::Straddles;
    }
    let theta = cone.axis_angle(&ball.center);
    let beta = math::asin(ball.radius / dist);
    if theta - beta > cone.half_angle {
        BallVsRegion::Outside
    } else if theta + beta < cone.half_angle && dist + ball.radius < r {
        BallVsRegion::Inside
    } else {
        BallVsRegion::Straddles
    }
}

/// Refines cylinder balls down to `depth`, discarding balls outside
/// `B_r(x) ∩ C` and stopping at the first ball inside its interior.
pub fn cone_intersect_test(ifs: &Ifs, cone: &DoubleCone, r: f64, depth: usize, max_cells: usize) -> Result<ConeTest> {
    if ifs.dim() != 3 {
        return Err(FracError::DimensionMismatch {
            expected: 3,
            found: ifs.dim(),
        });
    }
    let root = ifs.bounding_ball();
    let weights = ifs.measure_weights();
    let mut frontier: Vec<(Vec<u32>, Node)> = alloc::vec![(Vec::new(), Node::ROOT)];
    for level in 0..=depth {
        let mut open = Vec::new();
        for (word, node) in frontier {
            match classify(cone, r, &node.ball(&root)) {
                BallVsRegion::Outside => {}
                BallVsRegion::Inside => return Ok(ConeTest::NonemptyWitness { word: Word(word) }),
                BallVsRegion::Straddles => open.push((word, node)),
            }
        }
        if open.is_empty() {
            return Ok(ConeTest::EmptyCertified { depth: level });
        }
        if level == depth || open.len() * ifs.len() > max_cells {
            return Ok(ConeTest::Undetermined {
                depth: level,
                open_cells: open.len(),
            });
        }
        frontier = Vec::with_capacity(open.len() * ifs.len());
        for (word, node) in open {
            for j in 0..ifs.len() {
                let mut w = word.clone();
                w.push(j as u32);
                frontier.push((w, node.child(ifs, &weights, j)));
            }
        }
    }
    unreachable!("loop returns at level == depth")
}

/// Certified bracket for `inf ‖n × (x − y)‖ / ‖x − y‖` over distinct points
/// of the attractor, with the pair of cylinder words realising the upper
/// bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparationReport {
    pub direction: Direction,
    pub sin_eps_lower: f64,
    pub sin_eps_upper: f64,
    pub witness_words: (Word, Word),
    pub witness_points: (Point, Point),
    pub depth: usize,
    /// The first-level cylinders are certified disjoint.
    pub reliable: bool,
    /// Pairs still in play after pruning.
    pub active_pairs: usize,
}

impl SeparationReport {
    /// Value realised by the witness pair.
    pub fn witness_value(&self) -> f64 {
        sin_angle(
            self.direction.vector(),
            &math::sub(&self.witness_points.0, &self.witness_points.1),
        )
    }
}

fn sin_angle(n: &Point, d: &Point) -> f64 {
    math::norm(&math::cross(n, d)) / math::norm(d)
}

/// `max(0, (‖n × d‖ − ρ) / (‖d‖ + ρ))` for difference vectors within `ρ`
/// of `d`.
fn sin_lower(n: &Point, d: &Point, rho: f64) -> f64 {
    ((math::norm(&math::cross(n, d)) - rho) / (math::norm(d) + rho)).max(0.0)
}

#[derive(Clone)]
struct Pair {
    a: (Vec<u32>, Node),
    b: (Vec<u32>, Node),
}

/// Reports for every depth `1..=depth`. Pairs whose lower bound exceeds the
/// current upper bound are pruned, which keeps both bounds monotone.
pub fn separation_spectrum_levels(ifs: &Ifs, n: &Direction, depth: usize, max_pairs: usize) -> Result<Vec<SeparationReport>> {
    if ifs.dim() != 3 || n.dim() != 3 {
        return Err(FracError::DimensionMismatch {
            expected: 3,
            found: ifs.dim().min(n.dim()),
        });
    }
    if depth == 0 {
        return Err(FracError::InvalidArgument("separation depth must be at least 1".into()));
    }
    let root = ifs.bounding_ball();
    let weights = ifs.measure_weights();
    let reliable = matches!(check_ssc(ifs, 10), SscCertificate::Proved { .. });
    let q = ifs.len();
    let nv = *n.vector();
    let first: Vec<(Vec<u32>, Node)> = (0..q)
        .map(|j| (alloc::vec![j as u32], Node::ROOT.child(ifs, &weights, j)))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            pairs.push(Pair {
                a: first[i].clone(),
                b: first[j].clone(),
            });
        }
    }
    let fixed = |node: &Node| math::scale(&node.translation, 1.0 / (1.0 - node.ratio));
    let mut upper = f64::INFINITY;
    let mut witness: Option<(Word, Word, Point, Point)> = None;
    let mut reports = Vec::new();
    for level in 1..=depth {
        // upper bound from points of the attractor
        let evals = par::map_collect(&pairs, |p| {
            let x = fixed(&p.a.1);
            let y = fixed(&p.b.1);
            let d = math::sub(&x, &y);
            if math::norm(&d) == 0.0 {
                (f64::INFINITY, x, y)
            } else {
                (sin_angle(&nv, &d), x, y)
            }
        });
        for (p, (v, x, y)) in pairs.iter().zip(&evals) {
            if *v < upper {
                upper = *v;
                witness = Some((Word(p.a.0.clone()), Word(p.b.0.clone()), *x, *y));
            }
        }
        let lowers = par::map_collect(&pairs, |p| {
            let ba = p.a.1.ball(&root);
            let bb = p.b.1.ball(&root);
            sin_lower(&nv, &math::sub(&ba.center, &bb.center), ba.radius + bb.radius)
        });
        let mut lower = f64::INFINITY;
        let mut kept = Vec::new();
        for (p, l) in pairs.into_iter().zip(lowers) {
            if l <= upper {
                lower = lower.min(l);
                kept.push(p);
            }
        }
        let lower = if kept.is_empty() { upper } else { lower.min(upper) };
        let (wa, wb, x, y) = witness
            .clone()
            .ok_or_else(|| FracError::Precondition("attractor has no distinct cylinder points".into()))?;
        reports.push(SeparationReport {
            direction: *n,
            sin_eps_lower: lower,
            sin_eps_upper: upper,
            witness_words: (wa, wb),
            witness_points: (x, y),
            depth: level,
            reliable,
            active_pairs: kept.len(),
        });
        if level == depth || kept.len() * q * q > max_pairs {
            break;
        }
        let children = par::map_collect(&kept, |p| {
            let mut out = Vec::with_capacity(q * q);
            for i in 0..q {
                let mut wa = p.a.0.clone();
                wa.push(i as u32);
                let na = p.a.1.child(ifs, &weights, i);
                for j in 0..q {
                    let mut wb = p.b.0.clone();
                    wb.push(j as u32);
                    out.push(Pair {
                        a: (wa.clone(), na),
                        b: (wb, p.b.1.child(ifs, &weights, j)),
                    });
                }
            }
            out
        });
        pairs = children.into_iter().flatten().collect();
    }
    Ok(reports)
}

/// Report at `depth` (or the deepest level the pair budget allows).
pub fn separation_spectrum(ifs: &Ifs, n: &Direction, depth: usize) -> Result<SeparationReport> {
    let mut levels = separation_spectrum_levels(ifs, n, depth, 8_000_000)?;
    Ok(levels.pop().expect("at least one level"))
}

/// A positive lower bound certifies that no two points of the attractor
/// differ by a vector inside the open double cone of half-angle `α` around
/// the direction, for every `α` with `sin α < lower`.
pub fn empty_cone_certificate(report: &SeparationReport, half_angle: f64) -> bool {
    report.reliable && math::sin(half_angle) < report.sin_eps_lower
}

/// `‖(b − a) × (c − a)‖ ≤ tol ‖b − a‖ ‖c − a‖`
pub fn collinearity_check(a: &Point, b: &Point, c: &Point, tol: f64) -> bool {
    let u = math::sub(b, a);
    let v = math::sub(c, a);
    math::norm(&math::cross(&u, &v)) <= tol * math::norm(&u) * math::norm(&v)
}

/// Normalized difference of the witness points.
pub fn witness_direction(report: &SeparationReport) -> Result<Direction> {
    let d = math::sub(&report.witness_points.0, &report.witness_points.1);
    Direction::new(&d)
}

/// Projection direction identifying the extremal pair found by
/// [`separation_spectrum`].
pub fn two_to_one_direction(ifs: &Ifs, n: &Direction, depth: usize) -> Result<Direction> {
    witness_direction(&separation_spectrum(ifs, n, depth)?)
}
