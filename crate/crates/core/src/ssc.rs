//! One-sided certification of the strong separation condition.

use alloc::vec::Vec;

use crate::ifs::{Ball, Ifs, Word};
use crate::math;
use crate::par;

/// Outcome of [`check_ssc`]. `Proved` is sound; `Violated` only reports
/// exact coincidences of composed maps.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SscCertificate {
    /// At this refinement depth every cross pair of cylinder balls is
    /// disjoint.
    Proved { depth: usize },
    /// Two distinct words of equal length with the same composed map.
    Violated { words: (Word, Word) },
    Undetermined {
        depth: usize,
        unresolved_pairs: usize,
        /// Largest `(r₁ + r₂ − d) / (r₁ + r₂)` over unresolved ball pairs;
        /// zero for balls that merely touch.
        max_overlap_fraction: f64,
        witness: Option<(Word, Word)>,
    },
}

impl SscCertificate {
    pub fn is_proved(&self) -> bool {
        matches!(self, SscCertificate::Proved { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SscOptions {
    /// Enclosing ball used for the cylinder balls; defaults to the bounding
    /// ball of the system.
    pub root: Option<Ball>,
    /// Separation slack; defaults to `1e-9 × root radius`.
    pub tol: Option<f64>,
    /// Refinement stops once more unresolved pairs than this accumulate.
    pub max_pairs: usize,
}

impl Default for SscOptions {
    fn default() -> Self {
        Self {
            root: None,
            tol: None,
            max_pairs: 2_000_000,
        }
    }
}

#[derive(Clone)]
struct Side {
    word: Vec<u32>,
    ratio: f64,
    translation: math::Point,
}

impl Side {
    fn child(&self, ifs: &Ifs, j: usize) -> Side {
        let m = &ifs.maps()[j];
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.extend_from_slice(&self.word);
        word.push(j as u32);
        Side {
            word,
            ratio: self.ratio * m.ratio(),
            translation: math::axpy(self.ratio, m.translation_point(), &self.translation),
        }
    }

    fn ball(&self, root: &Ball) -> Ball {
        Ball {
            center: math::axpy(self.ratio, &root.center, &self.translation),
            radius: self.ratio * root.radius,
        }
    }
}

pub fn check_ssc(ifs: &Ifs, max_depth: usize) -> SscCertificate {
    check_ssc_with(ifs, max_depth, &SscOptions::default())
}

enum PairState {
    Separated,
    Coincident,
    Open(f64),
}

pub fn check_ssc_with(ifs: &Ifs, max_depth: usize, opts: &SscOptions) -> SscCertificate {
    let root = opts.root.unwrap_or_else(|| ifs.bounding_ball());
    let tol = opts.tol.unwrap_or(1e-9 * root.radius);
    let q = ifs.len();
    let first: Vec<Side> = (0..q)
        .map(|j| {
            let m = &ifs.maps()[j];
            Side {
                word: alloc::vec![j as u32],
                ratio: m.ratio(),
                translation: *m.translation_point(),
            }
        })
        .collect();
    let mut pairs: Vec<(Side, Side)> = Vec::new();
    for a in 0..q {
        for b in a + 1..q {
            pairs.push((first[a].clone(), first[b].clone()));
        }
    }
    let classify = |(a, b): &(Side, Side)| -> PairState {
        if (a.ratio - b.ratio).abs() <= 1e-12 && math::dist(&a.translation, &b.translation) <= tol {
            return PairState::Coincident;
        }
        let ba = a.ball(&root);
        let bb = b.ball(&root);
        let d = math::dist(&ba.center, &bb.center);
        let reach = ba.radius + bb.radius;
        if d > reach + tol {
            PairState::Separated
        } else if reach > 0.0 {
            PairState::Open(((reach - d) / reach).max(0.0))
        } else {
            PairState::Open(0.0)
        }
    };

    let mut depth = 1;
    loop {
        let states = par::map_collect(&pairs, classify);
        let mut open = Vec::new();
        let mut max_overlap = 0.0f64;
        for (pair, st) in pairs.into_iter().zip(states) {
            match st {
                PairState::Separated => {}
                PairState::Coincident => {
                    return SscCertificate::Violated {
                        words: (Word(pair.0.word), Word(pair.1.word)),
                    }
                }
                PairState::Open(f) => {
                    max_overlap = max_overlap.max(f);
                    open.push(pair);
                }
            }
        }
        if open.is_empty() {
            return SscCertificate::Proved { depth };
        }
        if depth >= max_depth || open.len().saturating_mul(q * q) > opts.max_pairs || root.radius == 0.0 {
            let witness = open.first().map(|(a, b)| (Word(a.word.clone()), Word(b.word.clone())));
            return SscCertificate::Undetermined {
                depth,
                unresolved_pairs: open.len(),
                max_overlap_fraction: max_overlap,
                witness,
            };
        }
        let children = par::map_collect(&open, |(a, b)| {
            let mut out = Vec::with_capacity(q * q);
            for i in 0..q {
                let ca = a.child(ifs, i);
                for j in 0..q {
                    out.push((ca.clone(), b.child(ifs, j)));
                }
            }
            out
        });
        pairs = children.into_iter().flatten().collect();
        depth += 1;
    }
}
