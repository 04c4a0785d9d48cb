//! Iterated systems, word removal, homogeneous separated subsystems and
//! exact-overlap detection.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::cover::Node;
use crate::error::{FracError, Result};
use crate::ifs::{Ball, Ifs, Similitude, Word};
use crate::math;
use crate::ssc::{check_ssc_with, SscCertificate, SscOptions};

/// Depth used when certifying separation of candidate subsystems.
const SSC_DEPTH: usize = 10;

/// A system whose maps are compositions `f_w` of a base system, with the
/// word provenance of every map.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterated {
    pub words: Vec<Word>,
    pub ifs: Ifs,
}

impl Iterated {
    pub fn similarity_dimension(&self) -> f64 {
        self.ifs.similarity_dimension()
    }
}

/// `Φⁿ`: all `qⁿ` compositions of length `n` in lexicographic order.
pub fn iterate(ifs: &Ifs, n: usize, max_cells: usize) -> Result<Iterated> {
    if n == 0 {
        return Err(FracError::InvalidArgument("iteration depth must be at least 1".into()));
    }
    let count = math::powi(ifs.len() as f64, n as u32);
    if count > max_cells as f64 {
        return Err(FracError::CellCapExceeded {
            depth: n,
            cap: max_cells,
        });
    }
    let base_w = ifs.measure_weights();
    let mut words = Vec::with_capacity(count as usize);
    let mut maps = Vec::with_capacity(count as usize);
    let mut weights = Vec::with_capacity(count as usize);
    let mut buf = Vec::new();
    collect_depth(ifs, &base_w, &Node::ROOT, n, &mut buf, &mut |w, node| {
        words.push(Word(w.to_vec()));
        maps.push(node_map(ifs, node));
        weights.push(node.weight);
    });
    let maps = maps.into_iter().collect::<Result<Vec<_>>>()?;
    let weights = ifs.weights().map(|_| weights);
    Ok(Iterated {
        words,
        ifs: Ifs::new(maps, weights)?,
    })
}

fn node_map(ifs: &Ifs, node: &Node) -> Result<Similitude> {
    Similitude::from_parts(node.ratio, node.translation, ifs.dim())
}

fn collect_depth<F: FnMut(&[u32], &Node)>(ifs: &Ifs, weights: &[f64], node: &Node, n: usize, word: &mut Vec<u32>, visit: &mut F) {
    if word.len() == n {
        visit(word, node);
        return;
    }
    for j in 0..ifs.len() {
        word.push(j as u32);
        collect_depth(ifs, weights, &node.child(ifs, weights, j), n, word, visit);
        word.pop();
    }
}

/// Drops the maps with the given word labels. Remaining weights are
/// renormalized.
pub fn remove_words(iterated: &Iterated, words: &[Word]) -> Result<Iterated> {
    let mut keep = alloc::vec![true; iterated.words.len()];
    for w in words {
        let pos = iterated
            .words
            .iter()
            .position(|x| x == w)
            .ok_or_else(|| FracError::WordNotFound(w.clone()))?;
        keep[pos] = false;
    }
    let mut out_words = Vec::new();
    let mut maps = Vec::new();
    let mut weights = Vec::new();
    let base_w = iterated.ifs.weights();
    for (k, (w, m)) in iterated.words.iter().zip(iterated.ifs.maps()).enumerate() {
        if keep[k] {
            out_words.push(w.clone());
            maps.push(*m);
            if let Some(bw) = base_w {
                weights.push(bw[k]);
            }
        }
    }
    let weights = base_w.map(|_| {
        crate::cloud::normalize(&mut weights);
        weights
    });
    Ok(Iterated {
        words: out_words,
        ifs: Ifs::new(maps, weights)?,
    })
}

/// Maps selected from a parent system, possibly only one.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    pub words: Vec<Word>,
    pub maps: Vec<Similitude>,
}

impl Subsystem {
    /// Fewer than two maps: the attractor is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.maps.len() < 2
    }

    pub fn ifs(&self) -> Result<Ifs> {
        Ifs::new(self.maps.clone(), None)
    }

    /// Similarity dimension, zero for degenerate systems.
    pub fn dimension(&self) -> f64 {
        self.ifs().map(|i| i.similarity_dimension()).unwrap_or(0.0)
    }
}

/// Greedy lexicographic packing of the depth-`depth` cylinder balls of a
/// homogeneous system: a ball is accepted when it is strictly separated
/// from every ball accepted before it.
pub fn greedy_ssc_subsystem(ifs: &Ifs, depth: usize, max_cells: usize) -> Result<Subsystem> {
    if !ifs.is_homogeneous() {
        return Err(FracError::Precondition("greedy packing needs a homogeneous system".into()));
    }
    let root = ifs.bounding_ball();
    let count = math::powi(ifs.len() as f64, depth as u32);
    if count > max_cells as f64 {
        return Err(FracError::CellCapExceeded { depth, cap: max_cells });
    }
    let weights = ifs.measure_weights();
    let mut candidates = Vec::new();
    let mut buf = Vec::new();
    collect_depth(ifs, &weights, &Node::ROOT, depth, &mut buf, &mut |w, node| {
        candidates.push((Word(w.to_vec()), *node));
    });
    Ok(pack(ifs, &root, candidates))
}

/// Packs equal-radius candidate balls greedily in the given order.
fn pack(ifs: &Ifs, root: &Ball, candidates: Vec<(Word, Node)>) -> Subsystem {
    let tol = 1e-9 * root.radius;
    let radius = candidates.first().map(|c| c.1.ratio * root.radius).unwrap_or(0.0);
    let width = (2.0 * radius + tol).max(f64::MIN_POSITIVE);
    let mut grid: BTreeMap<[i64; 3], Vec<math::Point>> = BTreeMap::new();
    let key = |p: &math::Point| -> [i64; 3] {
        [
            math::floor(p[0] / width) as i64,
            math::floor(p[1] / width) as i64,
            math::floor(p[2] / width) as i64,
        ]
    };
    let dim = ifs.dim();
    let mut words = Vec::new();
    let mut maps = Vec::new();
    for (word, node) in candidates {
        let ball = node.ball(root);
        let k = key(&ball.center);
        let mut clear = true;
        'search: for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    if (dim < 2 && dy != 0) || (dim < 3 && dz != 0) {
                        continue;
                    }
                    if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if list.iter().any(|c| math::dist(c, &ball.center) <= 2.0 * radius + tol) {
                            clear = false;
                            break 'search;
                        }
                    }
                }
            }
        }
        if clear {
            grid.entry(k).or_default().push(ball.center);
            maps.push(Similitude::from_parts(node.ratio, node.translation, dim).expect("ratio of a contraction word"));
            words.push(word);
        }
    }
    Subsystem { words, maps }
}

/// Common base ratio `λ₀` and integer exponents `k_i` with `λ_i = λ₀^{k_i}`.
pub fn commensurable_base(ifs: &Ifs) -> Result<(f64, Vec<usize>)> {
    let lmax = ifs.max_ratio();
    for m in 1..=64u32 {
        let base = math::powf(lmax, 1.0 / m as f64);
        let lb = math::ln(base);
        let ks: Option<Vec<usize>> = ifs
            .ratios()
            .map(|r| {
                let k = math::ln(r) / lb;
                let kr = math::round(k);
                ((k - kr).abs() <= 1e-9 * kr.max(1.0)).then_some(kr as usize)
            })
            .collect();
        if let Some(ks) = ks {
            return Ok((base, ks));
        }
    }
    let lmin = ifs.ratios().fold(1.0, f64::min);
    Err(FracError::NotCommensurable(lmax, lmin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Homogenized {
    pub subsystem: Subsystem,
    /// Common ratio of the output is `base_ratio^exponent`.
    pub base_ratio: f64,
    pub exponent: usize,
    pub dimension: f64,
    pub target: f64,
    pub certificate: SscCertificate,
}

impl Homogenized {
    pub fn ratio(&self) -> f64 {
        math::powi(self.base_ratio, self.exponent as u32)
    }
}

/// Finds a homogeneous, strongly separated subsystem made of compositions of
/// the input maps whose similarity dimension exceeds
/// `min(s, d) − epsilon`, scanning exponents `1..=max_depth` of the common
/// base ratio.
pub fn homogenize(ifs: &Ifs, epsilon: f64, max_depth: usize, max_cells: usize) -> Result<Homogenized> {
    if !(epsilon > 0.0) {
        return Err(FracError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let (base, ks) = commensurable_base(ifs)?;
    let s = ifs.similarity_dimension();
    let target = s.min(ifs.dim() as f64) - epsilon;
    let root = ifs.bounding_ball();
    let opts = SscOptions {
        root: Some(root),
        ..SscOptions::default()
    };

    if ifs.is_homogeneous() {
        let cert = check_ssc_with(ifs, SSC_DEPTH, &opts);
        if cert.is_proved() {
            return Ok(Homogenized {
                subsystem: Subsystem {
                    words: (0..ifs.len() as u32).map(|i| Word(alloc::vec![i])).collect(),
                    maps: ifs.maps().to_vec(),
                },
                base_ratio: ifs.maps()[0].ratio(),
                exponent: 1,
                dimension: s,
                target,
                certificate: cert,
            });
        }
    }

    let weights = ifs.measure_weights();
    let mut best = (0.0f64, 0usize);
    for n in 1..=max_depth {
        let candidates = words_with_exponent(ifs, &weights, &ks, n, max_cells)?;
        let sub = pack(ifs, &root, candidates);
        if sub.is_degenerate() {
            continue;
        }
        let dim = math::ln(sub.maps.len() as f64) / (n as f64 * math::ln(1.0 / base));
        if dim > best.0 {
            best = (dim, n);
        }
        if dim > target {
            let sub_ifs = sub.ifs()?;
            let cert = check_ssc_with(&sub_ifs, SSC_DEPTH, &opts);
            if cert.is_proved() {
                return Ok(Homogenized {
                    subsystem: sub,
                    base_ratio: base,
                    exponent: n,
                    dimension: dim,
                    target,
                    certificate: cert,
                });
            }
        }
    }
    Err(FracError::HomogenizeFailed {
        max_depth,
        best_dimension: best.0,
        best_exponent: best.1,
        target,
    })
}

/// Words whose exponents sum to `n`, in lexicographic order.
fn words_with_exponent(ifs: &Ifs, weights: &[f64], ks: &[usize], n: usize, max_cells: usize) -> Result<Vec<(Word, Node)>> {
    fn rec(
        ifs: &Ifs,
        weights: &[f64],
        ks: &[usize],
        left: usize,
        node: &Node,
        word: &mut Vec<u32>,
        out: &mut Vec<(Word, Node)>,
        cap: usize,
    ) -> core::result::Result<(), ()> {
        if left == 0 {
            if out.len() >= cap {
                return Err(());
            }
            out.push((Word(word.clone()), *node));
            return Ok(());
        }
        for (j, &k) in ks.iter().enumerate() {
            if k <= left {
                word.push(j as u32);
                rec(ifs, weights, ks, left - k, &node.child(ifs, weights, j), word, out, cap)?;
                word.pop();
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(ifs, weights, ks, n, &Node::ROOT, &mut Vec::new(), &mut out, max_cells).map_err(|_| FracError::CellCapExceeded {
        depth: n,
        cap: max_cells,
    })?;
    Ok(out)
}

/// Unordered pairs of distinct equal-length words (length at most `depth`)
/// whose composed maps agree: ratios within `tol` and translations within
/// `tol × root radius`. Sorted, each pair with its smaller word first.
pub fn detect_exact_overlaps(ifs: &Ifs, depth: usize, tol: f64, max_cells: usize) -> Result<Vec<(Word, Word)>> {
    if depth == 0 {
        return Err(FracError::InvalidArgument("overlap depth must be at least 1".into()));
    }
    let root = ifs.bounding_ball();
    let ttol = tol * root.radius;
    let weights = ifs.measure_weights();
    let mut found = Vec::new();
    for len in 1..=depth {
        if math::powi(ifs.len() as f64, len as u32) > max_cells as f64 {
            return Err(FracError::CellCapExceeded {
                depth: len,
                cap: max_cells,
            });
        }
        let mut entries: Vec<(Word, Node)> = Vec::new();
        let mut buf = Vec::new();
        collect_depth(ifs, &weights, &Node::ROOT, len, &mut buf, &mut |w, node| {
            entries.push((Word(w.to_vec()), *node))
        });
        entries.sort_by(|a, b| a.1.translation[0].total_cmp(&b.1.translation[0]).then_with(|| a.0.cmp(&b.0)));
        for i in 0..entries.len() {
            let (wa, na) = &entries[i];
            for (wb, nb) in &entries[i + 1..] {
                if nb.translation[0] - na.translation[0] > ttol {
                    break;
                }
                if (na.ratio - nb.ratio).abs() <= tol && math::dist(&na.translation, &nb.translation) <= ttol {
                    let pair = if wa < wb {
                        (wa.clone(), wb.clone())
                    } else {
                        (wb.clone(), wa.clone())
                    };
                    found.push(pair);
                }
            }
        }
    }
    found.sort();
    Ok(found)
}
