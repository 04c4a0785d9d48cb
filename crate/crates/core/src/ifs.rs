//! Homothetic similitudes, iterated function systems and finite words.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{FracError, Result};
use crate::math::{self, Point, ORIGIN};

/// Relative tolerance used when validating probability vectors.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// `x ↦ ratio · x + translation` with `0 < ratio < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Similitude {
    ratio: f64,
    translation: Point,
    dim: usize,
}

impl Similitude {
    pub fn new(ratio: f64, translation: &[f64]) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(FracError::InvalidRatio(ratio));
        }
        let dim = translation.len();
        if !(1..=3).contains(&dim) {
            return Err(FracError::UnsupportedDimension(dim));
        }
        if translation.iter().any(|t| !t.is_finite()) {
            return Err(FracError::InvalidArgument(format!("non-finite translation {translation:?}")));
        }
        Ok(Self {
            ratio,
            translation: math::pad(translation),
            dim,
        })
    }

    /// Builds a map from an already padded translation. The ratio is still
    /// checked; padding coordinates beyond `dim` must be zero.
    pub(crate) fn from_parts(ratio: f64, translation: Point, dim: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(FracError::InvalidRatio(ratio));
        }
        Ok(Self { ratio, translation, dim })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation[..self.dim]
    }

    pub fn translation_point(&self) -> &Point {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &Point) -> Point {
        math::axpy(self.ratio, x, &self.translation)
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &Similitude) -> Similitude {
        Similitude {
            ratio: self.ratio * inner.ratio,
            translation: self.apply(&inner.translation),
            dim: self.dim,
        }
    }

    /// The unique fixed point `t / (1 − λ)`.
    pub fn fixed_point(&self) -> Point {
        math::scale(&self.translation, 1.0 / (1.0 - self.ratio))
    }
}

/// A closed Euclidean ball.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    /// Image of the ball under a similitude.
    pub fn image(&self, map: &Similitude) -> Ball {
        Ball {
            center: map.apply(&self.center),
            radius: map.ratio() * self.radius,
        }
    }

    pub fn is_invariant_under(&self, map: &Similitude, tol: f64) -> bool {
        let img = self.image(map);
        math::dist(&img.center, &self.center) + img.radius <= self.radius + tol
    }
}

/// A finite word over the symbols `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn new(symbols: Vec<u32>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Juxtaposition `self other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut s = self.0.clone();
        s.extend_from_slice(&other.0);
        Word(s)
    }

    pub fn pushed(&self, symbol: u32) -> Word {
        let mut s = Vec::with_capacity(self.0.len() + 1);
        s.extend_from_slice(&self.0);
        s.push(symbol);
        Word(s)
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    /// All words of length `n` over `q` symbols in lexicographic order.
    pub fn all(q: usize, n: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * q);
            for w in &out {
                for s in 0..q as u32 {
                    next.push(w.pushed(s));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

impl From<Vec<u32>> for Word {
    fn from(v: Vec<u32>) -> Self {
        Word(v)
    }
}

/// A homothetic iterated function system `{λ_i x + t_i}` with optional
/// Bernoulli weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ifs {
    maps: Vec<Similitude>,
    dim: usize,
    weights: Option<Vec<f64>>,
}

impl Ifs {
    pub fn new(maps: Vec<Similitude>, weights: Option<Vec<f64>>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(FracError::TooFewMaps(maps.len()));
        }
        let dim = maps[0].dim();
        if let Some(bad) = maps.iter().find(|m| m.dim() != dim) {
            return Err(FracError::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if let Some(w) = &weights {
            validate_weights(w, maps.len())?;
        }
        Ok(Self { maps, dim, weights })
    }

    /// Convenience constructor from `(ratio, translation)` pairs.
    pub fn from_pairs(pairs: &[(f64, &[f64])]) -> Result<Self> {
        let maps = pairs
            .iter()
            .map(|(r, t)| Similitude::new(*r, t))
            .collect::<Result<Vec<_>>>()?;
        Ifs::new(maps, None)
    }

    /// Homogeneous system with a common ratio.
    pub fn homogeneous(ratio: f64, translations: &[&[f64]]) -> Result<Self> {
        let maps = translations
            .iter()
            .map(|t| Similitude::new(ratio, t))
            .collect::<Result<Vec<_>>>()?;
        Ifs::new(maps, None)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, self.maps.len())?;
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.maps.iter().map(|m| m.ratio())
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().fold(0.0, f64::max)
    }

    /// The common ratio if all maps share it (relative tolerance 1e-12).
    pub fn common_ratio(&self) -> Option<f64> {
        let r0 = self.maps[0].ratio();
        self.ratios().all(|r| (r - r0).abs() <= 1e-12 * r0).then_some(r0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.common_ratio().is_some()
    }

    /// The explicit weights, or the natural weights `λ_i^s` where `s` is the
    /// similarity dimension (uniform for homogeneous systems).
    pub fn measure_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => {
                if self.is_homogeneous() {
                    vec![1.0 / self.len() as f64; self.len()]
                } else {
                    let s = self.similarity_dimension();
                    let raw: Vec<f64> = self.ratios().map(|r| math::powf(r, s)).collect();
                    let total = math::compensated_sum(raw.iter().copied());
                    raw.into_iter().map(|w| w / total).collect()
                }
            }
        }
    }

    pub(crate) fn check_word(&self, word: &Word) -> Result<()> {
        for &s in word.symbols() {
            if s as usize >= self.maps.len() {
                return Err(FracError::SymbolOutOfRange {
                    symbol: s,
                    maps: self.maps.len(),
                });
            }
        }
        Ok(())
    }

    /// `f_ī = f_{i_0} ∘ f_{i_1} ∘ ⋯ ∘ f_{i_{n−1}}`.
    pub fn compose(&self, word: &Word) -> Result<Similitude> {
        if word.is_empty() {
            return Err(FracError::IdentityMap);
        }
        self.check_word(word)?;
        let mut ratio = 1.0;
        let mut t = ORIGIN;
        for &s in word.symbols().iter().rev() {
            let m = &self.maps[s as usize];
            t = m.apply(&t);
            ratio *= m.ratio();
        }
        Similitude::from_parts(ratio, t, self.dim)
    }

    /// Depth-|ī| truncation of the natural projection: `f_ī(0)`.
    pub fn natural_projection_point(&self, word: &Word) -> Result<Point> {
        Ok(*self.compose(word)?.translation_point())
    }

    /// Product of the measure weights along the word.
    pub fn word_weight(&self, word: &Word) -> Result<f64> {
        self.check_word(word)?;
        let w = self.measure_weights();
        Ok(word.symbols().iter().map(|&s| w[s as usize]).product())
    }

    /// A ball `B(c, R)` with `f_i(B) ⊆ B` for every map, hence containing
    /// the attractor. `c` is the mean of the one-symbol fixed points and
    /// `R = max_i ‖f_i(c) − c‖ / (1 − λ_max)`.
    pub fn bounding_ball(&self) -> Ball {
        let q = self.maps.len() as f64;
        let mut c = ORIGIN;
        for m in &self.maps {
            c = math::add(&c, &m.fixed_point());
        }
        c = math::scale(&c, 1.0 / q);
        let spread = self.maps.iter().map(|m| math::dist(&m.apply(&c), &c)).fold(0.0, f64::max);
        Ball {
            center: c,
            radius: spread / (1.0 - self.max_ratio()),
        }
    }

    /// Solves the Moran equation `Σ λ_i^s = 1` by bisection.
    pub fn similarity_dimension(&self) -> f64 {
        let moran = |s: f64| -> f64 { self.ratios().map(|r| math::powf(r, s)).sum::<f64>() - 1.0 };
        let mut lo = 0.0;
        let mut hi = self.dim as f64 + 1.0;
        // heavily overlapping systems can exceed d + 1
        while moran(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if moran(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The system generating the cylinder `Λ_ī = f_ī(Λ)`:
    /// `{λ_i x + f_ī(t_i)}`.
    pub fn cylinder_ifs(&self, word: &Word) -> Result<Ifs> {
        if word.is_empty() {
            return Ok(self.clone());
        }
        let f = self.compose(word)?;
        let maps = self
            .maps
            .iter()
            .map(|m| {
                // f_ī ∘ f_i ∘ f_ī⁻¹
                let t = f.apply(m.translation_point());
                let shift = math::axpy(-m.ratio(), f.translation_point(), &t);
                Similitude::from_parts(m.ratio(), shift, self.dim)
            })
            .collect::<Result<Vec<_>>>()?;
        Ifs::new(maps, self.weights.clone())
    }
}

fn validate_weights(w: &[f64], q: usize) -> Result<()> {
    if w.len() != q {
        return Err(FracError::InvalidWeights(format!("{} weights for {q} maps", w.len())));
    }
    if let Some(bad) = w.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(FracError::InvalidWeights(format!(
            "weights must be strictly positive, got {bad}"
        )));
    }
    let total = math::compensated_sum(w.iter().copied());
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(FracError::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Cartesian product of one-dimensional homogeneous systems sharing a ratio:
/// `{λx + (t_i, t_j[, t_k])}` in lexicographic tuple order.
pub fn product_ifs(factors: &[&Ifs]) -> Result<Ifs> {
    if !(2..=3).contains(&factors.len()) {
        return Err(FracError::InvalidArgument(format!(
            "product needs 2 or 3 factors, got {}",
            factors.len()
        )));
    }
    let mut ratio = None;
    for f in factors {
        if f.dim() != 1 {
            return Err(FracError::DimensionMismatch {
                expected: 1,
                found: f.dim(),
            });
        }
        let r = f
            .common_ratio()
            .ok_or_else(|| FracError::Precondition("product factors must be homogeneous".into()))?;
        match ratio {
            None => ratio = Some(r),
            Some(r0) if (r - r0).abs() > 1e-12 * r0 => {
                return Err(FracError::Precondition(format!(
                    "product factors need a common ratio, got {r0} and {r}"
                )))
            }
            _ => {}
        }
    }
    let ratio = ratio.expect("at least two factors");
    let dim = factors.len();
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(tuples.len() * f.len());
        for t in &tuples {
            for i in 0..f.len() {
                let mut e = t.clone();
                e.push(i);
                next.push(e);
            }
        }
        tuples = next;
    }
    let weights: Option<Vec<Vec<f64>>> = factors.iter().map(|f| f.weights().map(|w| w.to_vec())).collect();
    let mut maps = Vec::with_capacity(tuples.len());
    let mut prod_w = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let mut tr = ORIGIN;
        let mut w = 1.0;
        for (axis, (&i, f)) in t.iter().zip(factors).enumerate() {
            tr[axis] = f.maps()[i].translation()[0];
            if let Some(ws) = &weights {
                w *= ws[axis][i];
            }
        }
        maps.push(Similitude::from_parts(ratio, tr, dim)?);
        prod_w.push(w);
    }
    Ifs::new(maps, weights.map(|_| prod_w))
}
