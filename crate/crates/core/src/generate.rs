//! Seeded random instances with a known solution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::feasibility::FeasibilityInstance;
use crate::linalg::{axpy, distance, dot, norm, sub};
use crate::oracles::{AffinePiece, PiecewiseAffine, PiecewiseAffineOracle, ProjectableSet};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_vec(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, dim, 1.0);
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// A max-of-affine problem with minimizer `x_star` and value `f_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProblem {
    pub function: PiecewiseAffine,
    pub feasible: ProjectableSet,
    pub x1: Vec<f64>,
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

impl RandomProblem {
    pub fn oracle(&self) -> PiecewiseAffineOracle {
        PiecewiseAffineOracle::new(self.function.clone())
            .with_optimal_value(self.f_star)
            .with_subgradient_bound(self.function.max_slope_norm())
    }

    pub fn subgradient_bound(&self) -> f64 {
        self.function.max_slope_norm()
    }

    pub fn radius(&self) -> f64 {
        distance(&self.x1, &self.x_star)
    }
}

/// Random problem of dimension `dim`.
///
/// The first `dim + 1` pieces pass through `(x*, f*)` and their slopes have
/// `0` in their convex hull, so `x*` is a minimizer over the whole space.
/// The remaining pieces lie strictly below `f*` at `x*`. With
/// `constrained`, the feasible set is a ball containing `x*` and `x¹`.
pub fn random_pa_problem(
    rng: &mut impl Rng,
    dim: usize,
    extra_pieces: usize,
    constrained: bool,
) -> Result<RandomProblem> {
    let x_star = gaussian_vec(rng, dim, 1.0);
    let f_star: f64 = rng.gen_range(-1.0..1.0);
    let active = dim + 1;

    let weights: Vec<f64> = (0..active).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mut slopes: Vec<Vec<f64>> = (0..active - 1)
        .map(|_| gaussian_vec(rng, dim, 1.0))
        .collect();
    let mut last = vec![0.0; dim];
    for (w, g) in weights.iter().zip(&slopes) {
        last = axpy(&last, -w / weights[active - 1], g);
    }
    slopes.push(last);

    let mut pieces: Vec<AffinePiece> = slopes
        .into_iter()
        .map(|g| {
            let offset = f_star - dot(&g, &x_star);
            AffinePiece::new(g, offset)
        })
        .collect();
    for _ in 0..extra_pieces {
        let g = gaussian_vec(rng, dim, 1.0);
        let below: f64 = rng.gen_range(0.05..2.0);
        let offset = f_star - below - dot(&g, &x_star);
        pieces.push(AffinePiece::new(g, offset));
    }
    // shuffle so the lowest-index tie-break is not always a supporting piece
    pieces.shuffle(rng);
    let function = PiecewiseAffine::new(dim, pieces)?;

    let r: f64 = rng.gen_range(0.2..3.0);
    let x1 = axpy(&x_star, r, &random_unit(rng, dim));
    let feasible = if constrained {
        let center = axpy(&x_star, 0.5, &sub(&x1, &x_star));
        let radius = 0.5 * r * rng.gen_range(1.0..2.0);
        ProjectableSet::ball(center, radius)?
    } else {
        ProjectableSet::WholeSpace
    };
    Ok(RandomProblem {
        function,
        feasible,
        x1,
        x_star,
        f_star,
    })
}

/// Random set through `point`: a hyperplane, a halfspace, or a ball.
pub fn random_set_through(rng: &mut impl Rng, point: &[f64]) -> Result<ProjectableSet> {
    let dim = point.len();
    match rng.gen_range(0..3) {
        0 => {
            let a = random_unit(rng, dim);
            let b = dot(&a, point);
            ProjectableSet::hyperplane(a, b)
        }
        1 => {
            let a = random_unit(rng, dim);
            let b = dot(&a, point) + rng.gen_range(0.0..1.0);
            ProjectableSet::halfspace(a, b)
        }
        _ => {
            let radius: f64 = rng.gen_range(0.5..2.0);
            let offset = random_unit(rng, dim);
            let center = axpy(point, radius * rng.gen_range(0.0..1.0), &offset);
            ProjectableSet::ball(center, radius)
        }
    }
}

/// `m` random sets sharing a common point, with a random start.
pub fn random_feasibility_instance(
    rng: &mut impl Rng,
    dim: usize,
    m: usize,
) -> Result<FeasibilityInstance> {
    let solution = gaussian_vec(rng, dim, 1.0);
    let sets = (0..m)
        .map(|_| random_set_through(rng, &solution))
        .collect::<Result<Vec<_>>>()?;
    let x1 = axpy(&solution, rng.gen_range(0.5..3.0), &random_unit(rng, dim));
    FeasibilityInstance::new(sets, x1, Some(solution), None)
}

/// Two random sets through a common point with a start in the second.
pub fn random_set_pair(
    rng: &mut impl Rng,
    dim: usize,
) -> Result<(ProjectableSet, ProjectableSet, Vec<f64>, Vec<f64>)> {
    let solution = gaussian_vec(rng, dim, 1.0);
    let c1 = random_set_through(rng, &solution)?;
    let c2 = random_set_through(rng, &solution)?;
    let x1 = c2.project(&axpy(
        &solution,
        rng.gen_range(0.5..3.0),
        &random_unit(rng, dim),
    ))?;
    Ok((c1, c2, x1, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::SubgradientOracle;

    #[test]
    fn minimizer_is_optimal() {
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            let dim = rng.gen_range(1..=6);
            let p = random_pa_problem(&mut rng, dim, 3, false).unwrap();
            assert!((p.function.value(&p.x_star).unwrap() - p.f_star).abs() < 1e-12);
            for _ in 0..20 {
                let y = axpy(&p.x_star, 1.0, &gaussian_vec(&mut rng, dim, 1.0));
                assert!(p.function.value(&y).unwrap() >= p.f_star - 1e-12);
            }
        }
    }

    #[test]
    fn constrained_start_feasible() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let p = random_pa_problem(&mut rng, 4, 2, true).unwrap();
            assert!(p.feasible.contains(&p.x1, 1e-12).unwrap());
            assert!(p.feasible.contains(&p.x_star, 1e-12).unwrap());
            assert_eq!(p.oracle().optimal_value(), Some(p.f_star));
        }
    }

    #[test]
    fn seeded_is_deterministic() {
        let a = random_feasibility_instance(&mut rng_from_seed(11), 3, 4).unwrap();
        let b = random_feasibility_instance(&mut rng_from_seed(11), 3, 4).unwrap();
        assert_eq!(a, b);
        let (_, c2, x1, _) = random_set_pair(&mut rng_from_seed(5), 3).unwrap();
        assert!(c2.contains(&x1, 1e-12).unwrap());
    }
}
