//! Turning a configured IFS into a weighted cloud, and running pipelines of
//! maps over clouds.

use anyhow::{bail, Context};
use fraclab_core::cover::sample_cloud_at_depth;
use fraclab_core::maps::{self, algebraic_product, distance_set, map_image, orthogonal_project_cloud};
use fraclab_core::{Ifs, WeightedCloud};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{direction, nums, SampleMethod, Sampling, Step};
use crate::RunContext;

/// Rough working-set cost of one cell (coordinates, weight, sort keys).
const BYTES_PER_CELL: u64 = 96;
const CHUNK: usize = 1 << 16;

/// Deepest cover whose cell count fits both the cell cap and the memory
/// budget.
pub fn auto_depth(ifs: &Ifs, max_cells: usize, memory_budget: u64) -> usize {
    let limit = (max_cells as u64).min(memory_budget / BYTES_PER_CELL).max(1) as f64;
    let q = ifs.len() as f64;
    let mut depth = 0;
    while depth < 64 && q.powi(depth as i32 + 1) <= limit {
        depth += 1;
    }
    depth
}

/// Cover depth for a product of `factors` copies: the tuple count
/// `q^(factors·depth)` stays within `tuple_cap`, with at least `min_depth`.
pub fn product_depth(ifs: &Ifs, factors: usize, tuple_cap: usize, min_depth: usize) -> usize {
    let q = ifs.len() as f64;
    let mut depth = 1;
    while q.powi(((depth + 1) * factors) as i32) <= tuple_cap as f64 {
        depth += 1;
    }
    depth.max(min_depth)
}

pub fn sample(ifs: &Ifs, sampling: &Sampling, ctx: &RunContext) -> anyhow::Result<WeightedCloud> {
    match sampling.method {
        SampleMethod::Cover => {
            let depth = sampling
                .depth
                .unwrap_or_else(|| auto_depth(ifs, ctx.max_cells, sampling.memory_budget));
            Ok(sample_cloud_at_depth(ifs, depth, ctx.max_cells)?)
        }
        SampleMethod::Chaos => {
            let n = sampling.points.context("chaos sampling needs `points`")?;
            if n > ctx.max_cells {
                ctx.cap(format!(
                    "chaos orbit of {n} points truncated to the cell cap {}",
                    ctx.max_cells
                ));
            }
            chaos_game(ifs, n.min(ctx.max_cells), ctx.seed)
        }
    }
}

/// Orbit of the chaos game started at the fixed point of the first map, so
/// every point lies on the attractor. Points are generated in fixed-size
/// chunks, each from its own stream of the seeded generator, which makes the
/// output independent of the thread count. The resolution is nominal: the
/// cell radius of the cover with as many cells as there are points.
pub fn chaos_game(ifs: &Ifs, points: usize, seed: u64) -> anyhow::Result<WeightedCloud> {
    if points == 0 {
        bail!("the chaos game needs at least one point");
    }
    let weights = ifs.measure_weights();
    let pick = WeightedIndex::new(&weights).context("map weights")?;
    let start = ifs.maps()[0].fixed_point();
    let dim = ifs.dim();
    let chunks: Vec<usize> = (0..points.div_ceil(CHUNK)).collect();
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(points - c * CHUNK);
            let mut x = start;
            let mut out = Vec::with_capacity(len * dim);
            for _ in 0..len {
                x = ifs.maps()[pick.sample(&mut rng)].apply(&x);
                out.extend_from_slice(&x[..dim]);
            }
            out
        })
        .collect();
    let nominal_depth = ((points as f64).ln() / (ifs.len() as f64).ln()).floor().max(0.0) as i32;
    let resolution = ifs.bounding_ball().radius * ifs.max_ratio().powi(nominal_depth);
    Ok(WeightedCloud::uniform(dim, parts.concat(), resolution)?)
}

pub fn run_pipeline(
    mut cloud: WeightedCloud,
    steps: &[Step],
    tuple_cap: usize,
    ctx: &RunContext,
) -> anyhow::Result<WeightedCloud> {
    for step in steps {
        cloud = apply(&cloud, step, tuple_cap, ctx).with_context(|| format!("pipeline step `{step}`"))?;
    }
    Ok(cloud)
}

fn apply(cloud: &WeightedCloud, step: &Step, tuple_cap: usize, ctx: &RunContext) -> anyhow::Result<WeightedCloud> {
    Ok(match step {
        Step::Project { direction: d } => orthogonal_project_cloud(cloud, &direction(d)?)?,
        Step::Radial { exclusion } => maps::radial_project(cloud, *exclusion)?.cloud,
        Step::Geodesic { pole_tol } => maps::geodesic_project(cloud, *pole_tol)?,
        Step::Map { map } => {
            map.validate()?;
            map_image(map, cloud)?
        }
        Step::Distance { pin, max_pairs } => {
            let cap = max_pairs.unwrap_or(tuple_cap);
            let n = cloud.len() as u128;
            if pin.is_none() && n * (n + 1) / 2 > cap as u128 {
                ctx.cap(format!("distance pairs thinned from {} to at most {cap}", n * (n + 1) / 2));
            }
            let pin = pin.as_ref().map(|p| nums(p));
            distance_set(cloud, pin.as_deref(), cap)?
        }
        Step::Product { factors } => {
            let total = (cloud.len() as u128).pow(*factors as u32);
            if total > tuple_cap as u128 {
                ctx.cap(format!("product tuples thinned from {total} to at most {tuple_cap}"));
            }
            algebraic_product(&vec![cloud; *factors], tuple_cap)?
        }
        Step::Dedup { width } => cloud.dedup_grid(*width)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor() -> Ifs {
        Ifs::homogeneous(1.0 / 3.0, &[&[0.0], &[2.0 / 3.0]]).unwrap()
    }

    #[test]
    fn depth_respects_both_budgets() {
        assert_eq!(auto_depth(&cantor(), 1024, u64::MAX), 10);
        assert_eq!(auto_depth(&cantor(), usize::MAX, 96 * 256), 8);
        assert_eq!(product_depth(&cantor(), 2, 1 << 20, 1), 10);
    }

    #[test]
    fn chaos_points_lie_on_the_attractor() {
        let c = chaos_game(&cantor(), 5000, 3).unwrap();
        for &x in c.coords() {
            // ternary digits of Cantor points avoid 1 (up to rounding)
            let mut y = x;
            for _ in 0..8 {
                y *= 3.0;
                let d = y.floor();
                assert!(d != 1.0 || (y - 1.0).abs() < 1e-9 || (y - 2.0).abs() < 1e-9, "{x}");
                y -= d;
            }
        }
        assert_eq!(chaos_game(&cantor(), 5000, 3).unwrap(), c);
        assert_ne!(chaos_game(&cantor(), 5000, 4).unwrap(), c);
    }
}
