//! Configuration spaces: metrics, sampling, interpolation, extent and measure.
//!
//! A [`StateSpace`] is a recursive description of a C-space built from five
//! primitive leaves (Euclidean with the 2- or 1-norm, the circle `S^1`, the
//! sphere `S^2` and the rotation group `SO(3)`) and weighted Cartesian
//! products with the metric `(sum_i w_i * rho_i^p)^(1/p)`.
//!
//! Points are stored as flat `f64` slices laid out left-to-right over the
//! space tree: Euclidean coordinates, circle angles in `[0, 2*pi)`, spheres
//! as unit 3-vectors and rotations as unit quaternions.

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::SpaceError;

/// Angle-equality slack used when validating unit vectors and quaternions.
const UNIT_NORM_TOL: f64 = 1e-9;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Recursive description of a configuration space.
///
/// The JSON form mirrors the variant names, e.g.
/// `{"compound":{"p":1.0,"children":[{"l2":{"d":2,"bounds":[[0,1],[0,1]]}},{"circle":{}}],"weights":[1.0,0.5]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpace {
    /// `R^d` restricted to an axis-aligned box, with the Euclidean metric.
    L2 { d: usize, bounds: Vec<(f64, f64)> },
    /// `R^d` restricted to an axis-aligned box, with the Manhattan metric.
    L1 { d: usize, bounds: Vec<(f64, f64)> },
    /// The circle `S^1`; points are angles in `[0, 2*pi)`, distance is the
    /// shorter arc (at most `pi`).
    Circle {},
    /// The sphere `S^2` as unit 3-vectors with geodesic distance
    /// `arccos(x . y)` (at most `pi`).
    Sphere2 {},
    /// `SO(3)` as unit quaternions with `q` and `-q` identified; distance is
    /// `arccos|q1 . q2|` (at most `pi/2`).
    So3 {},
    /// Weighted Cartesian product with metric `(sum w_i rho_i^p)^(1/p)`.
    Compound {
        p: f64,
        children: Vec<StateSpace>,
        weights: Vec<f64>,
    },
}

/// A configuration: component values laid out flat per its [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl StateSpace {
    /// Euclidean space with the 2-norm on the given per-axis bounds.
    pub fn l2(bounds: Vec<(f64, f64)>) -> Self {
        StateSpace::L2 {
            d: bounds.len(),
            bounds,
        }
    }

    /// `[0,1]^d` with the Euclidean metric.
    pub fn unit_cube(d: usize) -> Self {
        StateSpace::l2(vec![(0.0, 1.0); d])
    }

    /// Euclidean space with the 1-norm on the given per-axis bounds.
    pub fn l1(bounds: Vec<(f64, f64)>) -> Self {
        StateSpace::L1 {
            d: bounds.len(),
            bounds,
        }
    }

    pub fn circle() -> Self {
        StateSpace::Circle {}
    }

    pub fn sphere2() -> Self {
        StateSpace::Sphere2 {}
    }

    pub fn so3() -> Self {
        StateSpace::So3 {}
    }

    pub fn compound(children: Vec<StateSpace>, weights: Vec<f64>, p: f64) -> Self {
        StateSpace::Compound {
            p,
            children,
            weights,
        }
    }

    /// `SE(2) = L2(2) x S^1` on the given translation bounds.
    pub fn se2(bounds: Vec<(f64, f64)>, w_trans: f64, w_rot: f64) -> Self {
        StateSpace::compound(
            vec![StateSpace::l2(bounds), StateSpace::circle()],
            vec![w_trans, w_rot],
            1.0,
        )
    }

    /// `SE(3) = L2(3) x SO(3)` on the given translation bounds.
    pub fn se3(bounds: Vec<(f64, f64)>, w_trans: f64, w_rot: f64) -> Self {
        StateSpace::compound(
            vec![StateSpace::l2(bounds), StateSpace::so3()],
            vec![w_trans, w_rot],
            1.0,
        )
    }

    /// The torus `T(d) = (S^1)^d` with unit weights.
    pub fn torus(d: usize) -> Self {
        StateSpace::compound(vec![StateSpace::circle(); d], vec![1.0; d], 1.0)
    }

    /// Validates the structural invariants of the space description.
    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            StateSpace::L2 { d, bounds } | StateSpace::L1 { d, bounds } => {
                if *d == 0 || *d != bounds.len() {
                    return Err(SpaceError::InvalidSpace(format!(
                        "euclidean dimension {} does not match {} bounds",
                        d,
                        bounds.len()
                    )));
                }
                for (lo, hi) in bounds {
                    if !(lo < hi) {
                        return Err(SpaceError::InvalidSpace(format!(
                            "axis bounds [{lo}, {hi}] must satisfy lower < upper"
                        )));
                    }
                }
                Ok(())
            }
            StateSpace::Circle {} | StateSpace::Sphere2 {} | StateSpace::So3 {} => Ok(()),
            StateSpace::Compound {
                p,
                children,
                weights,
            } => {
                if children.len() < 2 {
                    return Err(SpaceError::InvalidSpace(
                        "compound needs at least 2 children".into(),
                    ));
                }
                if children.len() != weights.len() {
                    return Err(SpaceError::InvalidSpace(format!(
                        "{} children but {} weights",
                        children.len(),
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(SpaceError::InvalidSpace("weights must be positive".into()));
                }
                if !(*p >= 1.0) {
                    return Err(SpaceError::InvalidSpace(format!("p = {p} must be >= 1")));
                }
                children.iter().try_for_each(|c| c.validate())
            }
        }
    }

    /// Topological dimension of the space.
    pub fn dimension(&self) -> usize {
        match self {
            StateSpace::L2 { d, .. } | StateSpace::L1 { d, .. } => *d,
            StateSpace::Circle {} => 1,
            StateSpace::Sphere2 {} => 2,
            StateSpace::So3 {} => 3,
            StateSpace::Compound { children, .. } => children.iter().map(|c| c.dimension()).sum(),
        }
    }

    /// Number of reals a point in this space occupies.
    pub fn layout_len(&self) -> usize {
        match self {
            StateSpace::L2 { d, .. } | StateSpace::L1 { d, .. } => *d,
            StateSpace::Circle {} => 1,
            StateSpace::Sphere2 {} => 3,
            StateSpace::So3 {} => 4,
            StateSpace::Compound { children, .. } => children.iter().map(|c| c.layout_len()).sum(),
        }
    }

    /// Checks that `p` is a structurally valid point of this space (layout
    /// length, unit norms, axis bounds, angle normalization).
    pub fn check_point(&self, p: &Point) -> Result<(), SpaceError> {
        if p.0.len() != self.layout_len() {
            return Err(SpaceError::LayoutMismatch {
                expected: self.layout_len(),
                got: p.0.len(),
            });
        }
        self.check_components(&p.0)
    }

    fn check_components(&self, xs: &[f64]) -> Result<(), SpaceError> {
        match self {
            StateSpace::L2 { bounds, .. } | StateSpace::L1 { bounds, .. } => {
                for (x, (lo, hi)) in xs.iter().zip(bounds) {
                    if !(*x >= *lo && *x <= *hi) {
                        return Err(SpaceError::InvalidSpace(format!(
                            "coordinate {x} outside axis bounds [{lo}, {hi}]"
                        )));
                    }
                }
                Ok(())
            }
            StateSpace::Circle {} => {
                if xs[0] >= 0.0 && xs[0] < TAU {
                    Ok(())
                } else {
                    Err(SpaceError::InvalidSpace(format!(
                        "angle {} not normalized to [0, 2*pi)",
                        xs[0]
                    )))
                }
            }
            StateSpace::Sphere2 {} | StateSpace::So3 {} => {
                let norm = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() <= UNIT_NORM_TOL {
                    Ok(())
                } else {
                    Err(SpaceError::InvalidSpace(format!(
                        "vector norm {norm} is not 1 within {UNIT_NORM_TOL}"
                    )))
                }
            }
            StateSpace::Compound { children, .. } => {
                let mut off = 0;
                for c in children {
                    let len = c.layout_len();
                    c.check_components(&xs[off..off + len])?;
                    off += len;
                }
                Ok(())
            }
        }
    }

    /// Metric distance between two points of this space.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64, SpaceError> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance without layout validation; callers must hold valid points.
    pub fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        self.distance_slices(&x.0, &y.0)
    }

    fn distance_slices(&self, xs: &[f64], ys: &[f64]) -> f64 {
        match self {
            StateSpace::L2 { .. } => xs
                .iter()
                .zip(ys)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            StateSpace::L1 { .. } => xs.iter().zip(ys).map(|(a, b)| (a - b).abs()).sum(),
            StateSpace::Circle {} => {
                let delta = (xs[0] - ys[0]).abs();
                delta.min(TAU - delta)
            }
            StateSpace::Sphere2 {} => {
                // identical components short-circuit: acos near 1 would turn
                // one ulp of dot-product noise into ~1e-8 of distance
                if xs == ys {
                    return 0.0;
                }
                let dot: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
                dot.clamp(-1.0, 1.0).acos()
            }
            StateSpace::So3 {} => {
                if xs == ys {
                    return 0.0;
                }
                let dot: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
                dot.abs().clamp(0.0, 1.0).acos()
            }
            StateSpace::Compound {
                p,
                children,
                weights,
            } => {
                let mut acc = 0.0;
                let mut off = 0;
                for (c, w) in children.iter().zip(weights) {
                    let len = c.layout_len();
                    let rho = c.distance_slices(&xs[off..off + len], &ys[off..off + len]);
                    acc += if *p == 1.0 { w * rho } else { w * rho.powf(*p) };
                    off += len;
                }
                if *p == 1.0 {
                    acc
                } else {
                    acc.powf(1.0 / *p)
                }
            }
        }
    }

    /// Geodesic interpolation from `x` to `y` at parameter `t` in `[0, 1]`.
    pub fn interpolate(&self, x: &Point, y: &Point, t: f64) -> Result<Point, SpaceError> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(SpaceError::Domain(format!("t = {t} outside [0, 1]")));
        }
        let mut out = Point(vec![0.0; self.layout_len()]);
        self.interpolate_into(x, y, t, &mut out);
        Ok(out)
    }

    /// Interpolation into a caller-owned scratch point; no validation.
    pub fn interpolate_into(&self, x: &Point, y: &Point, t: f64, out: &mut Point) {
        out.0.resize(self.layout_len(), 0.0);
        self.interpolate_slices(&x.0, &y.0, t, &mut out.0);
    }

    fn interpolate_slices(&self, xs: &[f64], ys: &[f64], t: f64, out: &mut [f64]) {
        match self {
            StateSpace::L2 { .. } | StateSpace::L1 { .. } => {
                for ((o, a), b) in out.iter_mut().zip(xs).zip(ys) {
                    *o = a + (b - a) * t;
                }
            }
            StateSpace::Circle {} => {
                let (a, b) = (xs[0], ys[0]);
                let mut delta = b - a;
                // take the shorter arc; on exact ties go in the +direction
                if delta > PI {
                    delta -= TAU;
                } else if delta < -PI {
                    delta += TAU;
                }
                out[0] = (a + t * delta).rem_euclid(TAU);
            }
            StateSpace::Sphere2 {} => slerp(xs, ys, t, false, out),
            StateSpace::So3 {} => slerp(xs, ys, t, true, out),
            StateSpace::Compound { children, .. } => {
                let mut off = 0;
                for c in children {
                    let len = c.layout_len();
                    c.interpolate_slices(
                        &xs[off..off + len],
                        &ys[off..off + len],
                        t,
                        &mut out[off..off + len],
                    );
                    off += len;
                }
            }
        }
    }

    /// Draws a point uniformly w.r.t. the Lebesgue measure of each leaf
    /// (Haar-uniform quaternions for SO(3), area-uniform for the sphere).
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Point {
        let mut out = vec![0.0; self.layout_len()];
        self.sample_into(rng, &mut out);
        Point(out)
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            StateSpace::L2 { bounds, .. } | StateSpace::L1 { bounds, .. } => {
                for (o, (lo, hi)) in out.iter_mut().zip(bounds) {
                    *o = rng.gen_range(*lo..*hi);
                }
            }
            StateSpace::Circle {} => out[0] = rng.gen_range(0.0..TAU),
            StateSpace::Sphere2 {} => {
                let v: [f64; 3] = UnitSphere.sample(rng);
                out.copy_from_slice(&v);
            }
            StateSpace::So3 {} => {
                // Shoemake's method for Haar-uniform unit quaternions.
                let u1: f64 = rng.gen_range(0.0..1.0);
                let u2: f64 = rng.gen_range(0.0..TAU);
                let u3: f64 = rng.gen_range(0.0..TAU);
                let (s1, c1) = ((1.0 - u1).sqrt(), u1.sqrt());
                out[0] = s1 * u2.sin();
                out[1] = s1 * u2.cos();
                out[2] = c1 * u3.sin();
                out[3] = c1 * u3.cos();
            }
            StateSpace::Compound { children, .. } => {
                let mut off = 0;
                for c in children {
                    let len = c.layout_len();
                    c.sample_into(rng, &mut out[off..off + len]);
                    off += len;
                }
            }
        }
    }

    /// Supremum of the distance over the space.
    pub fn extent(&self) -> f64 {
        match self {
            StateSpace::L2 { bounds, .. } => bounds
                .iter()
                .map(|(lo, hi)| (hi - lo) * (hi - lo))
                .sum::<f64>()
                .sqrt(),
            StateSpace::L1 { bounds, .. } => bounds.iter().map(|(lo, hi)| hi - lo).sum(),
            StateSpace::Circle {} => PI,
            StateSpace::Sphere2 {} => PI,
            StateSpace::So3 {} => PI / 2.0,
            StateSpace::Compound {
                p,
                children,
                weights,
            } => {
                // the supremum is attained componentwise
                let acc: f64 = children
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| {
                        if *p == 1.0 {
                            w * c.extent()
                        } else {
                            w * c.extent().powf(*p)
                        }
                    })
                    .sum();
                if *p == 1.0 {
                    acc
                } else {
                    acc.powf(1.0 / *p)
                }
            }
        }
    }

    /// Total measure of the space. Compounds scale each child measure by
    /// `w_i^dim(child_i)` so that the measure is consistent with the weighted
    /// metric; ball volumes and Eq.-style radius computations use the same
    /// convention throughout.
    pub fn measure(&self) -> f64 {
        match self {
            StateSpace::L2 { bounds, .. } | StateSpace::L1 { bounds, .. } => {
                bounds.iter().map(|(lo, hi)| hi - lo).product()
            }
            StateSpace::Circle {} => TAU,
            StateSpace::Sphere2 {} => 4.0 * PI,
            StateSpace::So3 {} => PI * PI,
            StateSpace::Compound {
                children, weights, ..
            } => children
                .iter()
                .zip(weights)
                .map(|(c, w)| w.powi(c.dimension() as i32) * c.measure())
                .product(),
        }
    }

    /// Product over all nested compound levels of `w_i^dim(child_i)`; the
    /// factor between the plain Lebesgue measure of the space and the
    /// metric-consistent measure returned by [`StateSpace::measure`].
    pub(crate) fn weight_scale(&self) -> f64 {
        match self {
            StateSpace::Compound {
                children, weights, ..
            } => children
                .iter()
                .zip(weights)
                .map(|(c, w)| w.powi(c.dimension() as i32) * c.weight_scale())
                .product(),
            _ => 1.0,
        }
    }
}

/// Spherical linear interpolation on unit vectors. With `identify_antipodal`
/// the inputs live in projective space (quaternions, q == -q) and `ys` is
/// first flipped into the hemisphere of `xs`.
fn slerp(xs: &[f64], ys: &[f64], t: f64, identify_antipodal: bool, out: &mut [f64]) {
    let mut dot: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
    let mut sign = 1.0;
    if identify_antipodal && dot < 0.0 {
        dot = -dot;
        sign = -1.0;
    }
    dot = dot.clamp(-1.0, 1.0);
    let theta = dot.acos();
    if theta < 1e-12 {
        out.copy_from_slice(xs);
        return;
    }
    let sin_theta = theta.sin();
    let (ca, cb) = if sin_theta < 1e-12 {
        // antipodal on the sphere proper: geodesic direction is ambiguous,
        // fall back to a normalized lerp through a fixed orthogonal axis
        let axis = orthogonal_unit(xs);
        let half = t * theta;
        for ((o, a), ax) in out.iter_mut().zip(xs).zip(&axis) {
            *o = a * half.cos() + ax * half.sin();
        }
        normalize(out);
        return;
    } else {
        (
            ((1.0 - t) * theta).sin() / sin_theta,
            (t * theta).sin() / sin_theta,
        )
    };
    for ((o, a), b) in out.iter_mut().zip(xs).zip(ys) {
        *o = ca * a + cb * sign * b;
    }
    normalize(out);
}

fn orthogonal_unit(xs: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; xs.len()];
    // pick the axis least aligned with xs
    let k = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    v[k] = 1.0;
    let dot: f64 = v.iter().zip(xs).map(|(a, b)| a * b).sum();
    for (o, a) in v.iter_mut().zip(xs) {
        *o -= dot * a;
    }
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_spaces() -> Vec<StateSpace> {
        vec![
            StateSpace::unit_cube(3),
            StateSpace::l1(vec![(0.0, 1.0), (-1.0, 2.0)]),
            StateSpace::circle(),
            StateSpace::sphere2(),
            StateSpace::so3(),
            StateSpace::se2(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, 0.5),
            StateSpace::se3(vec![(0.0, 1.0); 3], 1.0, 1.0),
            StateSpace::torus(3),
            StateSpace::compound(
                vec![StateSpace::unit_cube(2), StateSpace::circle()],
                vec![1.0, 0.5],
                2.0,
            ),
        ]
    }

    #[test]
    fn so3_identity_distance_is_zero() {
        let space = StateSpace::so3();
        let q = Point(vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(space.distance(&q, &q).unwrap(), 0.0);
        // q and -q are the same rotation
        let nq = Point(vec![-0.5, -0.5, -0.5, -0.5]);
        assert_eq!(space.distance(&q, &nq).unwrap(), 0.0);
    }

    #[test]
    fn circle_antipodal_distance_is_pi() {
        let space = StateSpace::circle();
        let d = space.distance(&Point(vec![0.0]), &Point(vec![PI])).unwrap();
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn compound_distance_hand_evaluated() {
        // w = (1, 0.5), p = 1: 1*5 + 0.5*pi
        let space = StateSpace::compound(
            vec![
                StateSpace::l2(vec![(0.0, 5.0), (0.0, 5.0)]),
                StateSpace::circle(),
            ],
            vec![1.0, 0.5],
            1.0,
        );
        let x = Point(vec![0.0, 0.0, 0.0]);
        let y = Point(vec![3.0, 4.0, PI]);
        let d = space.distance(&x, &y).unwrap();
        assert!((d - (5.0 + 0.5 * PI)).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn distance_layout_mismatch_is_error() {
        let space = StateSpace::unit_cube(2);
        let err = space
            .distance(&Point(vec![0.0, 0.0]), &Point(vec![0.0, 0.0, 0.0]))
            .unwrap_err();
        assert!(matches!(err, SpaceError::LayoutMismatch { .. }));
    }

    #[test]
    fn interpolate_endpoints_and_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for space in test_spaces() {
            let x = space.sample_uniform(&mut rng);
            let y = space.sample_uniform(&mut rng);
            let d = |a: &Point, b: &Point| space.distance_unchecked(a, b);
            assert!(d(&space.interpolate(&x, &y, 0.0).unwrap(), &x) < 1e-12);
            assert!(d(&space.interpolate(&x, &y, 1.0).unwrap(), &y) < 1e-12);
        }
        let l2 = StateSpace::unit_cube(2);
        let mid = l2
            .interpolate(&Point(vec![0.0, 0.0]), &Point(vec![1.0, 1.0]), 0.5)
            .unwrap();
        assert_eq!(mid.0, vec![0.5, 0.5]);
    }

    #[test]
    fn circle_interpolation_takes_shorter_arc() {
        let space = StateSpace::circle();
        let x = Point(vec![0.0]);
        let y = Point(vec![3.0 * PI / 2.0]);
        // both arcs enumerated: ccw length 3*pi/2, cw length pi/2 -> shorter
        // arc crosses zero and the halfway point is 7*pi/4
        let mid = space.interpolate(&x, &y, 0.5).unwrap();
        assert!((mid.0[0] - 7.0 * PI / 4.0).abs() < 1e-12, "mid = {:?}", mid);
    }

    #[test]
    fn interpolation_is_geodesic_on_leaves_and_p1_compounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for space in test_spaces() {
            let is_p1 = !matches!(space, StateSpace::Compound { p, .. } if p != 1.0);
            if !is_p1 {
                continue;
            }
            for _ in 0..1000 {
                let x = space.sample_uniform(&mut rng);
                let y = space.sample_uniform(&mut rng);
                let t = rng.gen_range(0.0..1.0);
                let z = space.interpolate(&x, &y, t).unwrap();
                let expect = t * space.distance_unchecked(&x, &y);
                assert!(
                    (space.distance_unchecked(&x, &z) - expect).abs() < 1e-9,
                    "geodesic property failed on {space:?}"
                );
            }
        }
    }

    #[test]
    fn metric_axioms_hold_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for space in test_spaces() {
            for _ in 0..1000 {
                let x = space.sample_uniform(&mut rng);
                let y = space.sample_uniform(&mut rng);
                let z = space.sample_uniform(&mut rng);
                let dxy = space.distance_unchecked(&x, &y);
                assert_eq!(space.distance_unchecked(&x, &x), 0.0);
                assert_eq!(dxy, space.distance_unchecked(&y, &x));
                assert!(dxy >= 0.0);
                let dxz = space.distance_unchecked(&x, &z);
                let dzy = space.distance_unchecked(&z, &y);
                assert!(dxy <= dxz + dzy + 1e-9, "triangle violated on {space:?}");
            }
        }
    }

    #[test]
    fn extent_covers_all_sample_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for space in test_spaces() {
            let ext = space.extent();
            for _ in 0..300 {
                let x = space.sample_uniform(&mut rng);
                let y = space.sample_uniform(&mut rng);
                assert!(space.distance_unchecked(&x, &y) <= ext + 1e-9);
            }
        }
    }

    #[test]
    fn extent_known_values() {
        assert!((StateSpace::circle().extent() - PI).abs() < 1e-15);
        assert!((StateSpace::so3().extent() - PI / 2.0).abs() < 1e-15);
        assert!((StateSpace::unit_cube(2).extent() - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn measure_known_values() {
        assert!((StateSpace::circle().measure() - TAU).abs() < 1e-15);
        assert!((StateSpace::so3().measure() - PI * PI).abs() < 1e-15);
        assert!((StateSpace::unit_cube(3).measure() - 1.0).abs() < 1e-15);
        // compound measure scales by w^dim
        let t2 = StateSpace::compound(
            vec![StateSpace::circle(), StateSpace::circle()],
            vec![2.0, 3.0],
            1.0,
        );
        assert!((t2.measure() - 6.0 * TAU * TAU).abs() < 1e-9);
    }

    #[test]
    fn dimension_known_values() {
        assert_eq!(StateSpace::circle().dimension(), 1);
        assert_eq!(StateSpace::so3().dimension(), 3);
        assert_eq!(StateSpace::se3(vec![(0.0, 1.0); 3], 1.0, 1.0).dimension(), 6);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        for space in test_spaces() {
            let mut a = ChaCha8Rng::seed_from_u64(42);
            let mut b = ChaCha8Rng::seed_from_u64(42);
            for _ in 0..100 {
                let pa = space.sample_uniform(&mut a);
                let pb = space.sample_uniform(&mut b);
                assert_eq!(pa.0, pb.0);
            }
        }
    }

    #[test]
    fn sampling_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let line = StateSpace::l2(vec![(0.0, 1.0)]);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| line.sample_uniform(&mut rng).0[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01);

        let so3 = StateSpace::so3();
        let mut sums = [0.0; 4];
        for _ in 0..n {
            let q = so3.sample_uniform(&mut rng);
            for (s, c) in sums.iter_mut().zip(&q.0) {
                *s += c;
            }
        }
        for s in sums {
            assert!((s / n as f64).abs() < 0.01);
        }
    }

    #[test]
    fn samples_are_valid_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for space in test_spaces() {
            for _ in 0..200 {
                let p = space.sample_uniform(&mut rng);
                space.check_point(&p).unwrap();
            }
        }
    }

    #[test]
    fn json_round_trip_matches_documented_shape() {
        let space = StateSpace::compound(
            vec![StateSpace::unit_cube(2), StateSpace::circle()],
            vec![1.0, 0.5],
            1.0,
        );
        let json = serde_json::to_value(&space).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "compound": {
                    "p": 1.0,
                    "children": [
                        {"l2": {"d": 2, "bounds": [[0.0, 1.0], [0.0, 1.0]]}},
                        {"circle": {}}
                    ],
                    "weights": [1.0, 0.5]
                }
            })
        );
        let back: StateSpace = serde_json::from_value(json).unwrap();
        assert_eq!(back, space);
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        assert!(StateSpace::l2(vec![(1.0, 0.0)]).validate().is_err());
        assert!(StateSpace::compound(vec![StateSpace::circle()], vec![1.0], 1.0)
            .validate()
            .is_err());
        assert!(StateSpace::compound(
            vec![StateSpace::circle(), StateSpace::circle()],
            vec![1.0, -1.0],
            1.0
        )
        .validate()
        .is_err());
        assert!(StateSpace::compound(
            vec![StateSpace::circle(), StateSpace::circle()],
            vec![1.0, 1.0],
            0.5
        )
        .validate()
        .is_err());
    }
}
