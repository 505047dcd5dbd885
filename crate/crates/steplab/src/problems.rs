//! Shifted continuous benchmark functions on a box domain.
//!
//! Five functions from the classic continuous benchmarking canon are built
//! in, registered under their conventional ids: 1 (sphere), 2 (separable
//! ellipsoid), 3 (Rastrigin), 5 (linear slope), 8 (Rosenbrock). These are
//! shift-only variants: each instance moves the optimum to a seeded
//! location `x_opt` and adds a seeded target value `f_opt`, with no
//! rotations or coordinate warps. The registry has room for 24 slots;
//! adding a function is one table row.
//!
//! Every instance satisfies `evaluate(x_opt) == f_opt`. For the linear
//! slope the optimum sits at a corner of the box, so its `x_opt` is that
//! corner; all other instances draw `x_opt` strictly inside the box.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable_hash64;

/// Default box domain, per the usual convention for this suite.
pub const DOMAIN_LOWER: f64 = -5.0;
pub const DOMAIN_UPPER: f64 = 5.0;

/// Interior instances draw `x_opt` uniformly from `[-X_OPT_RANGE, X_OPT_RANGE]^d`.
pub const X_OPT_RANGE: f64 = 4.0;
/// `f_opt` is drawn uniformly from `[-F_OPT_RANGE, F_OPT_RANGE]`.
pub const F_OPT_RANGE: f64 = 100.0;

/// One entry of the function registry.
pub struct FunctionDef {
    pub id: u32,
    pub name: &'static str,
    /// The optimum is a corner of the box rather than an interior point.
    pub corner_optimum: bool,
    pub min_dimension: usize,
    eval: fn(&ProblemInstance, &[f64]) -> f64,
}

static REGISTRY: &[FunctionDef] = &[
    FunctionDef {
        id: 1,
        name: "sphere",
        corner_optimum: false,
        min_dimension: 1,
        eval: eval_sphere,
    },
    FunctionDef {
        id: 2,
        name: "ellipsoid",
        corner_optimum: false,
        min_dimension: 2,
        eval: eval_ellipsoid,
    },
    FunctionDef {
        id: 3,
        name: "rastrigin",
        corner_optimum: false,
        min_dimension: 1,
        eval: eval_rastrigin,
    },
    FunctionDef {
        id: 5,
        name: "linear_slope",
        corner_optimum: true,
        min_dimension: 2,
        eval: eval_linear_slope,
    },
    FunctionDef {
        id: 8,
        name: "rosenbrock",
        corner_optimum: false,
        min_dimension: 2,
        eval: eval_rosenbrock,
    },
];

/// Looks up a function definition by id.
pub fn function_def(id: u32) -> Result<&'static FunctionDef> {
    REGISTRY
        .iter()
        .find(|def| def.id == id)
        .ok_or_else(|| Error::UnknownFunction {
            id,
            known: known_function_ids(),
        })
}

/// Ids of all registered functions, ascending.
pub fn known_function_ids() -> Vec<u32> {
    REGISTRY.iter().map(|def| def.id).collect()
}

/// A benchmark function instance: function id plus the seeded shift.
///
/// Instances are immutable after construction and safe to share across
/// concurrent runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub id: u32,
    pub name: String,
    pub dimension: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Optimum location; a box corner for the linear slope.
    pub x_opt: Vec<f64>,
    /// Function value at the optimum.
    pub f_opt: f64,
}

impl ProblemInstance {
    /// Builds an instance on the default box, validating the invariants:
    /// positive dimension, `lower < upper` per coordinate, `x_opt` inside
    /// the box.
    pub fn new(id: u32, dimension: usize, x_opt: Vec<f64>, f_opt: f64) -> Result<Self> {
        let def = function_def(id)?;
        if dimension < def.min_dimension {
            return Err(Error::InvalidParameter(format!(
                "function {} ({}) needs dimension >= {}, got {}",
                id, def.name, def.min_dimension, dimension
            )));
        }
        if x_opt.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: x_opt.len(),
            });
        }
        if !x_opt.iter().all(|&v| (DOMAIN_LOWER..=DOMAIN_UPPER).contains(&v)) {
            return Err(Error::InvalidParameter(format!(
                "x_opt must lie inside the box [{}, {}]",
                DOMAIN_LOWER, DOMAIN_UPPER
            )));
        }
        Ok(ProblemInstance {
            id,
            name: def.name.to_string(),
            dimension,
            lower: vec![DOMAIN_LOWER; dimension],
            upper: vec![DOMAIN_UPPER; dimension],
            x_opt,
            f_opt,
        })
    }

    /// Evaluates the function at `x`. Deterministic; lower is better.
    /// Points outside the box are evaluable (no repair, no penalty).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let def = function_def(self.id)?;
        Ok((def.eval)(self, x))
    }
}

fn eval_sphere(inst: &ProblemInstance, x: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(&inst.x_opt)
        .map(|(&xi, &oi)| (xi - oi) * (xi - oi))
        .sum();
    sum + inst.f_opt
}

fn eval_ellipsoid(inst: &ProblemInstance, x: &[f64]) -> f64 {
    let d = inst.dimension;
    let sum: f64 = x
        .iter()
        .zip(&inst.x_opt)
        .enumerate()
        .map(|(i, (&xi, &oi))| {
            let z = xi - oi;
            let exponent = 6.0 * i as f64 / (d - 1) as f64;
            10f64.powf(exponent) * z * z
        })
        .sum();
    sum + inst.f_opt
}

fn eval_rastrigin(inst: &ProblemInstance, x: &[f64]) -> f64 {
    // 10(d - sum cos 2 pi z) + |z|^2, accumulated as 10 * sum(1 - cos)
    // so each term is non-negative in floating point.
    let mut cos_term = 0.0;
    let mut norm2 = 0.0;
    for (&xi, &oi) in x.iter().zip(&inst.x_opt) {
        let z = xi - oi;
        cos_term += 1.0 - (2.0 * std::f64::consts::PI * z).cos();
        norm2 += z * z;
    }
    10.0 * cos_term + norm2 + inst.f_opt
}

/// Slope coefficient for coordinate `i` (0-based): magnitude ramps from 1
/// to 10 across coordinates, sign taken from the corner optimum.
fn slope_coefficient(inst: &ProblemInstance, i: usize) -> f64 {
    let d = inst.dimension;
    let magnitude = 10f64.powf(i as f64 / (d - 1) as f64);
    magnitude * inst.x_opt[i].signum()
}

fn eval_linear_slope(inst: &ProblemInstance, x: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let s = slope_coefficient(inst, i);
            5.0 * s.abs() - s * xi
        })
        .sum();
    sum + inst.f_opt
}

fn eval_rosenbrock(inst: &ProblemInstance, x: &[f64]) -> f64 {
    // z = x - x_opt + 1 places the optimum at x_opt (the classic valley
    // has its minimum at the all-ones point).
    let z: Vec<f64> = x.iter().zip(&inst.x_opt).map(|(&xi, &oi)| xi - oi + 1.0).collect();
    let sum: f64 = z
        .windows(2)
        .map(|w| {
            let a = w[0] * w[0] - w[1];
            100.0 * a * a + (w[0] - 1.0) * (w[0] - 1.0)
        })
        .sum();
    sum + inst.f_opt
}

/// Anything the ES loop can optimize: a dimension, a box, and an
/// evaluation. Implemented by [`ProblemInstance`] and by wrappers such as
/// [`EvalCounter`].
pub trait Problem: Sync {
    fn id(&self) -> u32;
    fn dimension(&self) -> usize;
    /// Box domain as (lower, upper) coordinate slices.
    fn bounds(&self) -> (&[f64], &[f64]);
    /// Target value at the optimum.
    fn f_opt(&self) -> f64;
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

impl Problem for ProblemInstance {
    fn id(&self) -> u32 {
        self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    fn f_opt(&self) -> f64 {
        self.f_opt
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        ProblemInstance::evaluate(self, x)
    }
}

/// Instrumented wrapper that counts evaluations, for budget accounting
/// checks.
pub struct EvalCounter<'a> {
    inner: &'a dyn Problem,
    count: AtomicU64,
}

impl<'a> EvalCounter<'a> {
    pub fn new(inner: &'a dyn Problem) -> Self {
        EvalCounter {
            inner,
            count: AtomicU64::new(0),
        }
    }

    /// Number of `evaluate` calls observed so far.
    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl Problem for EvalCounter<'_> {
    fn id(&self) -> u32 {
        self.inner.id()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn bounds(&self) -> (&[f64], &[f64]) {
        self.inner.bounds()
    }

    fn f_opt(&self) -> f64 {
        self.inner.f_opt()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
}

/// Builds the Cartesian product of `function_ids` x `dimensions`, with
/// shifts drawn deterministically from `instance_seed`. The same seed
/// always yields the same suite, independent of call order.
pub fn make_suite(
    function_ids: &[u32],
    dimensions: &[usize],
    instance_seed: u64,
) -> Result<Vec<ProblemInstance>> {
    for &id in function_ids {
        function_def(id)?;
    }
    for &dim in dimensions {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "suite dimensions must be >= 2, got {dim}"
            )));
        }
    }
    let mut suite = Vec::with_capacity(function_ids.len() * dimensions.len());
    for &id in function_ids {
        let def = function_def(id)?;
        for &dim in dimensions {
            let seed = stable_hash64(&format!("suite/{instance_seed}/{id}/{dim}"));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x_opt: Vec<f64> = if def.corner_optimum {
                (0..dim)
                    .map(|_| if rng.random::<bool>() { DOMAIN_UPPER } else { DOMAIN_LOWER })
                    .collect()
            } else {
                (0..dim)
                    .map(|_| rng.random_range(-X_OPT_RANGE..=X_OPT_RANGE))
                    .collect()
            };
            let f_opt = rng.random_range(-F_OPT_RANGE..=F_OPT_RANGE);
            suite.push(ProblemInstance::new(id, dim, x_opt, f_opt)?);
        }
    }
    Ok(suite)
}

/// Samples a starting point uniformly over the box domain.
pub fn sample_initial_point<R: Rng>(problem: &dyn Problem, rng: &mut R) -> Vec<f64> {
    let (lower, upper) = problem.bounds();
    lower
        .iter()
        .zip(upper)
        .map(|(&lo, &hi)| rng.random_range(lo..=hi))
        .collect()
}

/// Writes the suite manifest CSV: `function_id,name,dimension,f_opt,instance_seed`.
pub fn write_suite_manifest<W: Write>(
    instances: &[ProblemInstance],
    instance_seed: u64,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "function_id,name,dimension,f_opt,instance_seed")?;
    for inst in instances {
        writeln!(
            out,
            "{},{},{},{},{}",
            inst.id, inst.name, inst.dimension, inst.f_opt, instance_seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unshifted(id: u32, dimension: usize) -> ProblemInstance {
        ProblemInstance::new(id, dimension, vec![0.0; dimension], 0.0).unwrap()
    }

    #[test]
    fn sphere_at_optimum_is_f_opt() {
        let inst = ProblemInstance::new(1, 3, vec![1.0, -2.0, 0.5], -7.25).unwrap();
        assert_eq!(inst.evaluate(&inst.x_opt).unwrap(), -7.25);
    }

    #[test]
    fn sphere_unshifted_hand_value() {
        let inst = unshifted(1, 2);
        assert_eq!(inst.evaluate(&[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn ellipsoid_hand_value() {
        // d=2, z=(1,2): 1*1 + 10^6*4
        let inst = unshifted(2, 2);
        assert_eq!(inst.evaluate(&[1.0, 2.0]).unwrap(), 4_000_001.0);
    }

    #[test]
    fn rastrigin_hand_value() {
        // z=(0.5, 0): 10*(1-cos(pi)) + 0.25 = 20.25
        let inst = unshifted(3, 2);
        let v = inst.evaluate(&[0.5, 0.0]).unwrap();
        assert!((v - 20.25).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn rosenbrock_zero_at_optimum_and_hand_value() {
        let inst = unshifted(8, 2);
        // At x_opt the valley sum is exactly zero.
        assert_eq!(inst.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        // z = (2,2): 100*(4-2)^2 + (2-1)^2 = 401
        assert_eq!(inst.evaluate(&[1.0, 1.0]).unwrap(), 401.0);
    }

    #[test]
    fn linear_slope_zero_at_corner_and_hand_value() {
        // Corner (+5, +5): coefficients (1, 10), both positive.
        let inst = ProblemInstance::new(5, 2, vec![5.0, 5.0], 3.0).unwrap();
        assert_eq!(inst.evaluate(&[5.0, 5.0]).unwrap(), 3.0);
        // At the origin: 5*1 + 5*10 = 55 above f_opt.
        assert_eq!(inst.evaluate(&[0.0, 0.0]).unwrap(), 58.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let inst = unshifted(1, 3);
        match inst.evaluate(&[1.0, 2.0]) {
            Err(Error::DimensionMismatch { expected: 3, got: 2 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn unknown_id_lists_known_ids() {
        match make_suite(&[99], &[2], 1) {
            Err(Error::UnknownFunction { id: 99, known }) => {
                assert_eq!(known, vec![1, 2, 3, 5, 8]);
            }
            other => panic!("expected unknown function, got {other:?}"),
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = make_suite(&[1], &[2], 7).unwrap();
        let b = make_suite(&[1], &[2], 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn suite_is_cartesian_product() {
        let suite = make_suite(&[1, 5], &[2, 5, 30], 3).unwrap();
        assert_eq!(suite.len(), 6);
        let dims: Vec<usize> = suite.iter().map(|i| i.dimension).collect();
        assert_eq!(dims, vec![2, 5, 30, 2, 5, 30]);
    }

    #[test]
    fn suite_shifts_are_in_range() {
        for inst in make_suite(&[1, 2, 3, 8], &[2, 5, 30], 11).unwrap() {
            assert!(inst.x_opt.iter().all(|&v| v.abs() <= X_OPT_RANGE));
            assert!(inst.f_opt.abs() <= F_OPT_RANGE);
            assert_eq!(inst.evaluate(&inst.x_opt).unwrap(), inst.f_opt);
        }
    }

    #[test]
    fn slope_optimum_is_a_corner() {
        for inst in make_suite(&[5], &[2, 5, 30], 13).unwrap() {
            assert!(inst.x_opt.iter().all(|&v| v == DOMAIN_LOWER || v == DOMAIN_UPPER));
            assert_eq!(inst.evaluate(&inst.x_opt).unwrap(), inst.f_opt);
        }
    }

    #[test]
    fn optimality_over_random_points() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for inst in make_suite(&[1, 2, 3, 8], &[2, 5], 17).unwrap() {
            for _ in 0..1000 {
                let x = sample_initial_point(&inst, &mut rng);
                assert!(inst.evaluate(&x).unwrap() >= inst.f_opt - 1e-12);
            }
        }
        // The slope also respects the bound inside the box.
        for inst in make_suite(&[5], &[2, 5], 17).unwrap() {
            for _ in 0..1000 {
                let x = sample_initial_point(&inst, &mut rng);
                assert!(inst.evaluate(&x).unwrap() >= inst.f_opt - 1e-12);
            }
        }
    }

    #[test]
    fn sphere_shift_consistency() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = &make_suite(&[1], &[5], 23).unwrap()[0];
        for _ in 0..100 {
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let x: Vec<f64> = inst.x_opt.iter().zip(&v).map(|(&o, &vi)| o + vi).collect();
            let norm2: f64 = v.iter().map(|&vi| vi * vi).sum();
            let got = inst.evaluate(&x).unwrap() - inst.f_opt;
            assert!((got - norm2).abs() < 1e-9, "got {got}, want {norm2}");
        }
    }

    #[test]
    fn degenerate_box_yields_unique_point() {
        use rand::SeedableRng;
        let mut inst = unshifted(1, 2);
        inst.lower = vec![1.5, -2.0];
        inst.upper = vec![1.5, -2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_initial_point(&inst, &mut rng), vec![1.5, -2.0]);
    }

    #[test]
    fn initial_points_respect_bounds_and_seeding() {
        use rand::SeedableRng;
        let inst = unshifted(1, 30);
        let mut rng_a = ChaCha8Rng::seed_from_u64(1);
        let mut rng_b = ChaCha8Rng::seed_from_u64(1);
        let mut rng_c = ChaCha8Rng::seed_from_u64(2);
        let a = sample_initial_point(&inst, &mut rng_a);
        let b = sample_initial_point(&inst, &mut rng_b);
        let c = sample_initial_point(&inst, &mut rng_c);
        assert_eq!(a.len(), 30);
        assert!(a.iter().all(|&v| (DOMAIN_LOWER..=DOMAIN_UPPER).contains(&v)));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn eval_counter_counts() {
        let inst = unshifted(1, 2);
        let counter = EvalCounter::new(&inst);
        for _ in 0..5 {
            counter.evaluate(&[0.5, 0.5]).unwrap();
        }
        assert_eq!(counter.count(), 5);
    }

    #[test]
    fn manifest_schema() {
        let suite = make_suite(&[1, 5], &[2], 7).unwrap();
        let mut buf = Vec::new();
        write_suite_manifest(&suite, 7, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "function_id,name,dimension,f_opt,instance_seed");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,sphere,2,"));
        assert!(lines[2].starts_with("5,linear_slope,2,"));
        assert!(lines[1].ends_with(",7"));
    }
}
