//! Spherical caps around sampled point sets.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::sphere::{geodesic_distance, SpherePoint};

/// Which radius a cap stands for.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusConvention {
    /// Smallest closed cap containing the set.
    #[default]
    #[serde(rename = "enclosing")]
    EnclosingCap,
    /// Largest open cap missing the set.
    #[serde(rename = "lemma")]
    LemmaEmptyBall,
}

impl RadiusConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            RadiusConvention::EnclosingCap => "enclosing",
            RadiusConvention::LemmaEmptyBall => "lemma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapResult {
    pub center: SpherePoint,
    pub radius: f64,
    pub convention: RadiusConvention,
}

/// A Euclidean ball in ℝ^d.
#[derive(Debug, Clone)]
struct Ball {
    center: DVector<f64>,
    radius_sq: f64,
}

impl Ball {
    fn contains(&self, p: &DVector<f64>) -> bool {
        (p - &self.center).norm_squared() <= self.radius_sq * (1.0 + 1e-12) + 1e-18
    }
}

/// Circumscribed ball of the support points within their affine hull.
fn support_ball(support: &[DVector<f64>], dim: usize) -> Ball {
    match support.len() {
        0 => Ball { center: DVector::zeros(dim), radius_sq: -1.0 },
        1 => Ball { center: support[0].clone(), radius_sq: 0.0 },
        k => {
            let q0 = &support[0];
            let q = DMatrix::from_columns(&support[1..].iter().map(|s| s - q0).collect::<Vec<_>>());
            let gram = q.transpose() * &q;
            let rhs = DVector::from_iterator(k - 1, (0..k - 1).map(|i| 0.5 * gram[(i, i)]));
            let lambda = gram
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(k - 1));
            let center = q0 + q * lambda;
            let radius_sq = support.iter().map(|s| (s - &center).norm_squared()).fold(0.0, f64::max);
            Ball { center, radius_sq }
        }
    }
}

/// Move-to-front Welzl; `points[..end]` must be enclosed together with `support`.
fn mtf(points: &mut Vec<DVector<f64>>, end: usize, support: &mut Vec<DVector<f64>>, dim: usize) -> Ball {
    let mut ball = support_ball(support, dim);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        if !ball.contains(&points[i]) {
            support.push(points[i].clone());
            ball = mtf(points, i, support, dim);
            support.pop();
            let p = points.remove(i);
            points.insert(0, p);
        }
    }
    ball
}

/// Smallest Euclidean ball containing `points` as (center, radius).
pub fn smallest_enclosing_ball(points: &[DVector<f64>]) -> Result<(DVector<f64>, f64)> {
    let first = points.first().ok_or_else(|| GeometryError::Domain("no points".into()))?;
    let dim = first.len();
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eb));
    let ball = mtf(&mut pts, points.len(), &mut Vec::new(), dim);
    Ok((ball.center, ball.radius_sq.max(0.0).sqrt()))
}

/// Smallest cap containing the samples, from the Euclidean smallest enclosing
/// ball of the samples. Fails when the samples are not inside an open
/// hemisphere, where no such cap is determined this way.
pub fn enclosing_cap(samples: &[SpherePoint]) -> Result<CapResult> {
    if samples.is_empty() {
        return Err(GeometryError::Domain("no samples".into()));
    }
    let coords: Vec<DVector<f64>> = samples.iter().map(|s| s.coords().clone()).collect();
    let (center, _) = smallest_enclosing_ball(&coords)?;
    let norm = center.norm();
    if norm < 1e-9 {
        return Err(GeometryError::DegenerateConfiguration(
            "enclosing ball is centred at the origin".into(),
        ));
    }
    let center = SpherePoint::normalize(center)?;
    let radius = samples.iter().map(|s| geodesic_distance(&center, s)).fold(0.0, f64::max);
    if radius >= PI / 2.0 {
        return Err(GeometryError::DegenerateConfiguration(
            "samples are not contained in an open hemisphere".into(),
        ));
    }
    Ok(CapResult { center, radius, convention: RadiusConvention::EnclosingCap })
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn min_distance(x: &DVector<f64>, samples: &[DVector<f64>]) -> f64 {
    let max_dot = samples.iter().map(|s| s.dot(x)).fold(f64::NEG_INFINITY, f64::max);
    max_dot.clamp(-1.0, 1.0).acos()
}

const EMPTY_CAP_STARTS: usize = 4096;
const EMPTY_CAP_POLISH: usize = 8;

/// Largest open cap avoiding the samples: maximises the distance from a
/// center to its nearest sample by seeded multistart plus random pattern
/// search. Deterministic for a given seed.
pub fn largest_empty_cap(samples: &[SpherePoint], seed: u64) -> Result<CapResult> {
    let first = samples.first().ok_or_else(|| GeometryError::Domain("no samples".into()))?;
    let dim = first.dim();
    let coords: Vec<DVector<f64>> = samples.iter().map(|s| s.coords().clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<DVector<f64>> = (0..EMPTY_CAP_STARTS).map(|_| random_unit(&mut rng, dim)).collect();
    let values: Vec<f64> = starts.par_iter().map(|x| min_distance(x, &coords)).collect();
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let polished: Vec<(DVector<f64>, f64)> = order
        .iter()
        .take(EMPTY_CAP_POLISH)
        .enumerate()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(k, &i)| {
            let mut local = ChaCha8Rng::seed_from_u64(seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9));
            pattern_search(&starts[i], values[i], &coords, &mut local)
        })
        .collect();
    let (best, radius) = polished
        .into_iter()
        .fold(None, |acc: Option<(DVector<f64>, f64)>, cand| match acc {
            Some(a) if a.1 >= cand.1 => Some(a),
            _ => Some(cand),
        })
        .expect("at least one start");
    Ok(CapResult {
        center: SpherePoint::normalize(best)?,
        radius,
        convention: RadiusConvention::LemmaEmptyBall,
    })
}

fn pattern_search<R: Rng>(
    start: &DVector<f64>,
    value: f64,
    samples: &[DVector<f64>],
    rng: &mut R,
) -> (DVector<f64>, f64) {
    let dim = start.len();
    let mut x = start.clone();
    let mut best = value;
    let mut step = 0.1;
    while step > 1e-9 {
        let mut improved = false;
        for _ in 0..4 * dim {
            let cand = (&x + random_unit(rng, dim) * step).normalize();
            let v = min_distance(&cand, samples);
            if v > best {
                x = cand;
                best = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best)
}

/// Cap of the requested convention. The enclosing convention falls back to
/// the complement of the largest empty cap when the samples are not inside
/// an open hemisphere: a cap of radius R about c contains the set exactly
/// when the open cap of radius π − R about −c misses it.
pub fn cap_for_convention(samples: &[SpherePoint], convention: RadiusConvention, seed: u64) -> Result<CapResult> {
    match convention {
        RadiusConvention::LemmaEmptyBall => largest_empty_cap(samples, seed),
        RadiusConvention::EnclosingCap => match enclosing_cap(samples) {
            Ok(cap) => Ok(cap),
            Err(GeometryError::DegenerateConfiguration(_)) => {
                let empty = largest_empty_cap(samples, seed)?;
                Ok(CapResult {
                    center: empty.center.antipode(),
                    radius: PI - empty.radius,
                    convention: RadiusConvention::EnclosingCap,
                })
            }
            Err(e) => Err(e),
        },
    }
}
