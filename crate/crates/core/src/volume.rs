//! Ball and sphere volumes in compound C-spaces, the connection radius and
//! k_n rule, the projection heuristic for thin compound factors, and a
//! Monte-Carlo verification oracle.
//!
//! Volumes follow the same convention as [`StateSpace::measure`]: the value
//! for a weighted compound is the plain Lebesgue volume of the metric ball
//! scaled by `prod w_i^dim(child_i)`. Under this convention the Monte-Carlo
//! estimate `fraction * measure(space)` matches the closed forms at any
//! weights, and the ratio `mu_free / zeta_d` fed into the connection radius
//! is independent of the convention as long as both sides agree.
//!
//! Closed forms exist for Euclidean leaves, spheres, tori, and any
//! sum-metric product of homogeneous leaves (which covers SE(2), T(d),
//! products of translating robots, and their mixes), plus the special
//! SE(3) = R^3 x SO(3) form whose rotation factor is not homogeneous in r.
//! Everything else is evaluated by peeling one well-behaved factor at a time
//! through the compound-volume integral, and as a last resort by rejection
//! sampling with a warning flag in the result.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SpaceError;
use crate::quad::adaptive_simpson;
use crate::space::{Point, StateSpace};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

/// How a ball volume was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMethod {
    ClosedForm,
    Numeric,
    /// Rejection-sampling fallback: treat the value as approximate.
    MonteCarlo,
}

/// Inputs of the connection-radius rule.
#[derive(Debug, Clone)]
pub struct RadiusParams {
    /// Tuning parameter, at least 1.
    pub eta: f64,
    /// Measure of free space; the ambient measure is the conservative default.
    pub mu_free: f64,
    /// Dimension of the space.
    pub d: usize,
    /// Unit-ball volume of the space's own metric.
    pub zeta_d: f64,
}

impl RadiusParams {
    /// Builds parameters for a space: `zeta_d` is the unit-ball volume of the
    /// space's own metric (pre-boundary form, so bounded Euclidean boxes get
    /// the full Euclidean coefficient), and `mu_free` defaults to the ambient
    /// measure unless the caller knows the obstacle measure.
    pub fn for_space(
        space: &StateSpace,
        eta: f64,
        mu_free: Option<f64>,
    ) -> Result<Self, SpaceError> {
        if !(eta >= 1.0) {
            return Err(SpaceError::Domain(format!("eta = {eta} must be >= 1")));
        }
        let measure = space.measure();
        let mu_free = mu_free.unwrap_or(measure);
        if mu_free > measure + 1e-9 || !(mu_free > 0.0) {
            return Err(SpaceError::Domain(format!(
                "mu_free = {mu_free} outside (0, measure = {measure}]"
            )));
        }
        Ok(RadiusParams {
            eta,
            mu_free,
            d: space.dimension(),
            zeta_d: ball_volume_ideal(space, 1.0),
        })
    }
}

/// Volume of the metric ball of radius `r`, clamped to the total measure.
pub fn ball_volume(space: &StateSpace, r: f64) -> f64 {
    ball_volume_detailed(space, r).0
}

/// Like [`ball_volume`] but also reports how the value was computed.
pub fn ball_volume_detailed(space: &StateSpace, r: f64) -> (f64, VolumeMethod) {
    let (v, method) = ideal_lebesgue(space, r);
    let scaled = space.weight_scale() * v;
    (scaled.min(space.measure()), method)
}

/// Ball volume without the total-measure clamp: the pre-boundary form used
/// when computing connection radii (boundaryless leaves still saturate at
/// their geometric maximum).
pub fn ball_volume_ideal(space: &StateSpace, r: f64) -> f64 {
    space.weight_scale() * ideal_lebesgue(space, r).0
}

/// Surface measure of the metric sphere of radius `r`. Supported on leaves;
/// general compounds have no geometric surface representation here.
pub fn sphere_surface(space: &StateSpace, r: f64) -> Result<f64, SpaceError> {
    match space {
        StateSpace::L2 { d, .. } => Ok(*d as f64 * euclidean_unit_ball(*d) * r.powi(*d as i32 - 1)),
        StateSpace::L1 { d, .. } => match d {
            1 => Ok(2.0),
            2 => Ok(4.0 * 2.0_f64.sqrt() * r),
            3 => Ok(2.0 * 3.0_f64.sqrt() * r * r),
            _ => Err(SpaceError::Unsupported(format!(
                "L1 sphere surface only derived for d <= 3, got d = {d}"
            ))),
        },
        StateSpace::Circle {} => Ok(2.0),
        StateSpace::Sphere2 {} => Ok(if r <= PI { TAU * r.sin() } else { 0.0 }),
        StateSpace::So3 {} => Ok(if r <= PI / 2.0 {
            4.0 * PI * r.sin() * r.sin()
        } else {
            0.0
        }),
        StateSpace::Compound { .. } => {
            // sum-metric tori are well behaved with a homogeneous ball, so
            // their sphere is the plain derivative (valid pre-saturation);
            // other compounds have no geometric surface representation here
            if is_well_behaved(space) {
                if let Some(factors) = flat_factors(space) {
                    if let Some(v) = closed_form_flat(&factors, 1.0, 1.0) {
                        let d = space.dimension();
                        return Ok(space.weight_scale()
                            * d as f64
                            * v
                            * r.powi(d as i32 - 1));
                    }
                }
            }
            Err(SpaceError::Unsupported(
                "sphere surface of a general compound".into(),
            ))
        }
    }
}

/// Canonical transform `s(r) = d * B(r) / S(r)`; the identity on well-behaved
/// spaces, and the change of variable that restores the ball-sphere
/// derivative property elsewhere.
pub fn canonical_transform(space: &StateSpace, r: f64) -> Result<f64, SpaceError> {
    let s = sphere_surface(space, r)?;
    if s <= 0.0 {
        return Err(SpaceError::Domain(format!(
            "sphere surface vanishes at r = {r}"
        )));
    }
    let b = ball_volume_ideal(space, r);
    Ok(space.dimension() as f64 * b / s)
}

/// Whether the space qualifies as a first factor for the compound-volume
/// integral: Euclidean 2-norm spaces, the circle, and sum-metric tori.
pub fn is_well_behaved(space: &StateSpace) -> bool {
    match space {
        StateSpace::L2 { .. } | StateSpace::Circle {} => true,
        StateSpace::L1 { .. } | StateSpace::Sphere2 {} | StateSpace::So3 {} => false,
        StateSpace::Compound { p, children, .. } => {
            *p == 1.0 && children.iter().all(|c| matches!(c, StateSpace::Circle {}))
        }
    }
}

/// Ball volume of the two-factor compound `(space1, w1) x (space2, w2)` with
/// exponent `p`, evaluated by the factor-peeling integral
/// `int_0^(r/w1^(1/p)) S_1(t) * B_2(((r^p - w1 t^p)/w2)^(1/p)) dt`.
///
/// `space1` must be well behaved. The result matches
/// `ball_volume(compound([space1, space2], [w1, w2], p))` before its
/// total-measure clamp.
pub fn compound_ball_volume_numeric(
    space1: &StateSpace,
    space2: &StateSpace,
    w1: f64,
    w2: f64,
    p: f64,
    r: f64,
) -> Result<f64, SpaceError> {
    if !is_well_behaved(space1) {
        return Err(SpaceError::NotWellBehaved);
    }
    if r <= 0.0 {
        return Ok(0.0);
    }
    let lebesgue = match space1 {
        StateSpace::L2 { .. } | StateSpace::Circle {} => {
            peel_leaf_integral(space1, space2, w1, w2, p, r)
        }
        StateSpace::Compound {
            p: tp,
            children,
            weights,
        } => {
            // a torus first factor is peeled circle by circle; exact only
            // when its own exponent matches the combining exponent
            if *tp != p {
                return Err(SpaceError::Unsupported(
                    "torus first factor with mismatched exponent".into(),
                ));
            }
            let mut rest_children = children[1..].to_vec();
            let mut rest_weights: Vec<f64> = weights[1..].iter().map(|v| v * w1).collect();
            rest_children.push(space2.clone());
            rest_weights.push(w2);
            let rest = StateSpace::Compound {
                p,
                children: rest_children,
                weights: rest_weights,
            };
            peel_leaf_integral(&children[0], &rest, w1 * weights[0], 1.0, p, r)
        }
        _ => unreachable!("well-behaved spaces are L2, circle or torus"),
    };
    let scale = w1.powi(space1.dimension() as i32)
        * space1.weight_scale()
        * w2.powi(space2.dimension() as i32)
        * space2.weight_scale();
    Ok(scale * lebesgue)
}

/// Connection radius `r_n = 2 eta (mu_free/zeta_d)^(1/d) (1/d)^(1/d)
/// (ln n / n)^(1/d)`; strictly decreasing in `n` for `n >= 3`.
pub fn connection_radius(n: usize, params: &RadiusParams) -> Result<f64, SpaceError> {
    if n < 2 {
        return Err(SpaceError::Domain(format!(
            "connection radius needs n >= 2, got {n}"
        )));
    }
    let n = n as f64;
    let d = params.d as f64;
    let base = (params.mu_free / params.zeta_d / d * n.ln() / n).powf(1.0 / d);
    Ok(2.0 * params.eta * base)
}

/// Neighbor count `k_n = ceil(e (1 + 1/d) ln n)`, clamped to at least 1.
pub fn knn_count(n: usize, d: usize) -> usize {
    let k = (std::f64::consts::E * (1.0 + 1.0 / d as f64) * (n as f64).ln()).ceil();
    (k as usize).max(1)
}

/// Connection radius with the thin-factor projection heuristic: on a
/// two-factor sum-metric compound, if the radius for the full space exceeds
/// the weighted extent of the smaller factor, every ball spills out of that
/// factor and the radius is recomputed for the larger factor alone.
///
/// Returns the radius and whether the projection triggered.
pub fn effective_radius(
    space: &StateSpace,
    n: usize,
    params: &RadiusParams,
) -> Result<(f64, bool), SpaceError> {
    let StateSpace::Compound {
        p,
        children,
        weights,
    } = space
    else {
        return Err(SpaceError::InvalidSpace(
            "projection heuristic needs a compound space".into(),
        ));
    };
    if children.len() != 2 || *p != 1.0 {
        return Err(SpaceError::InvalidSpace(
            "projection heuristic needs a two-factor compound with p = 1".into(),
        ));
    }
    let (x1, x2) = (&children[0], &children[1]);
    if x1.measure() < x2.measure() {
        return Err(SpaceError::InvalidSpace(
            "projection heuristic expects measure(X1) >= measure(X2)".into(),
        ));
    }
    let r_full = connection_radius(n, params)?;
    let threshold = weights[1] * x2.extent();
    if r_full > threshold {
        let free_fraction = params.mu_free / space.measure();
        let params1 = RadiusParams {
            eta: params.eta,
            mu_free: free_fraction * x1.measure(),
            d: x1.dimension(),
            zeta_d: ball_volume_ideal(x1, 1.0),
        };
        Ok((connection_radius(n, &params1)?, true))
    } else {
        Ok((r_full, false))
    }
}

/// Monte-Carlo ball-volume estimate by rejection sampling: draws `trials`
/// uniform points, counts those within `r` of a center placed where the ball
/// cannot clip any Euclidean bound, and scales the hit fraction by the space
/// measure. Returns `(estimate, standard_error)`.
pub fn ball_volume_monte_carlo<R: Rng>(
    space: &StateSpace,
    r: f64,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64), SpaceError> {
    if trials < 1000 {
        return Err(SpaceError::Domain(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    if !euclidean_ball_fits(space, r) {
        return Err(SpaceError::InfeasibleOracle { radius: r });
    }
    let center = ball_center(space);
    let mut hits = 0usize;
    for _ in 0..trials {
        let p = space.sample_uniform(rng);
        if space.distance_unchecked(&center, &p) <= r {
            hits += 1;
        }
    }
    let frac = hits as f64 / trials as f64;
    let measure = space.measure();
    let stderr = measure * (frac * (1.0 - frac) / trials as f64).sqrt();
    Ok((frac * measure, stderr))
}

/// Center for the Monte-Carlo oracle: box centers for Euclidean leaves,
/// fixed canonical points for boundaryless leaves.
pub fn ball_center(space: &StateSpace) -> Point {
    fn fill(space: &StateSpace, out: &mut Vec<f64>) {
        match space {
            StateSpace::L2 { bounds, .. } | StateSpace::L1 { bounds, .. } => {
                out.extend(bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)));
            }
            StateSpace::Circle {} => out.push(0.0),
            StateSpace::Sphere2 {} => out.extend([0.0, 0.0, 1.0]),
            StateSpace::So3 {} => out.extend([0.0, 0.0, 0.0, 1.0]),
            StateSpace::Compound { children, .. } => {
                children.iter().for_each(|c| fill(c, out));
            }
        }
    }
    let mut v = Vec::with_capacity(space.layout_len());
    fill(space, &mut v);
    Point(v)
}

/// True when the metric ball of radius `r` around the box-centered point
/// stays inside every Euclidean leaf's bounds. The projection of the ball
/// onto leaf `i` is exactly the leaf ball of radius `r / w_i^(1/p)`.
fn euclidean_ball_fits(space: &StateSpace, r: f64) -> bool {
    match space {
        StateSpace::L2 { bounds, .. } | StateSpace::L1 { bounds, .. } => {
            bounds.iter().all(|(lo, hi)| r <= 0.5 * (hi - lo) + 1e-12)
        }
        StateSpace::Circle {} | StateSpace::Sphere2 {} | StateSpace::So3 {} => true,
        StateSpace::Compound {
            p,
            children,
            weights,
        } => children
            .iter()
            .zip(weights)
            .all(|(c, w)| euclidean_ball_fits(c, r / w.powf(1.0 / *p))),
    }
}

// ---------------------------------------------------------------------------
// internal dispatch, all in plain Lebesgue units
// ---------------------------------------------------------------------------

/// Euclidean unit-ball volume via the two-step recurrence.
pub fn euclidean_unit_ball(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => euclidean_unit_ball(d - 2) * TAU / d as f64,
    }
}

/// A flattened leaf factor: same-exponent nested compounds collapse into a
/// single weighted list because `w_outer * sum_i (w_i rho_i^p)` distributes.
struct Factor<'a> {
    leaf: &'a StateSpace,
    weight: f64,
}

fn flatten<'a>(space: &'a StateSpace, p: f64, weight: f64, out: &mut Option<Vec<Factor<'a>>>) {
    if out.is_none() {
        return;
    }
    match space {
        StateSpace::Compound {
            p: cp,
            children,
            weights,
        } => {
            if *cp != p {
                *out = None;
                return;
            }
            for (c, w) in children.iter().zip(weights) {
                flatten(c, p, weight * w, out);
                if out.is_none() {
                    return;
                }
            }
        }
        leaf => out.as_mut().unwrap().push(Factor { leaf, weight }),
    }
}

fn flat_factors(space: &StateSpace) -> Option<Vec<Factor<'_>>> {
    let mut out = Some(Vec::new());
    flatten(space, compound_p(space), 1.0, &mut out);
    out
}

fn compound_p(space: &StateSpace) -> f64 {
    match space {
        StateSpace::Compound { p, .. } => *p,
        _ => 1.0,
    }
}

/// Homogeneous Lebesgue ball coefficient `A` with `B(r) = A r^d`, where this
/// exists (pre-saturation for the circle).
fn homogeneous_coeff(leaf: &StateSpace) -> Option<(f64, usize)> {
    match leaf {
        StateSpace::L2 { d, .. } => Some((euclidean_unit_ball(*d), *d)),
        StateSpace::L1 { d, .. } => {
            let mut a = 1.0;
            for i in 1..=*d {
                a *= 2.0 / i as f64;
            }
            Some((a, *d))
        }
        StateSpace::Circle {} => Some((2.0, 1)),
        _ => None,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Ball volume of a leaf, exact including geometric saturation.
fn leaf_ball(leaf: &StateSpace, r: f64) -> f64 {
    match leaf {
        StateSpace::L2 { d, .. } => euclidean_unit_ball(*d) * r.powi(*d as i32),
        StateSpace::L1 { .. } => {
            let (a, d) = homogeneous_coeff(leaf).unwrap();
            a * r.powi(d as i32)
        }
        StateSpace::Circle {} => (2.0 * r).min(TAU),
        StateSpace::Sphere2 {} => {
            if r >= PI {
                4.0 * PI
            } else {
                TAU * (1.0 - r.cos())
            }
        }
        StateSpace::So3 {} => {
            if r >= PI / 2.0 {
                PI * PI
            } else {
                PI * (2.0 * r - (2.0 * r).sin())
            }
        }
        StateSpace::Compound { .. } => unreachable!("leaf_ball called on compound"),
    }
}

/// Closed form for the flattened factor list, if one applies.
fn closed_form_flat(factors: &[Factor<'_>], p: f64, r: f64) -> Option<f64> {
    if factors.len() == 1 {
        let f = &factors[0];
        return Some(leaf_ball(f.leaf, r / f.weight.powf(1.0 / p)));
    }
    if p != 1.0 {
        return None;
    }
    // sum metric over homogeneous leaves: merge factors pairwise with
    // A <- A1 * A2 / C(d1 + d2, d2), the Beta-integral composition that the
    // per-shape closed forms all instantiate
    if factors.iter().all(|f| homogeneous_coeff(f.leaf).is_some()) {
        let mut acc_a = 0.0;
        let mut acc_d = 0usize;
        for f in factors {
            let (a, d) = homogeneous_coeff(f.leaf).unwrap();
            let a = a / f.weight.powi(d as i32);
            if acc_d == 0 {
                acc_a = a;
            } else {
                acc_a = acc_a * a / binomial(acc_d + d, d);
            }
            acc_d += d;
        }
        return Some(acc_a * r.powi(acc_d as i32));
    }
    // spatial rigid body R^3 x SO(3): the rotation ball is not homogeneous,
    // so it keeps its own closed form
    if factors.len() == 2 {
        let (t, rot) = if matches!(factors[0].leaf, StateSpace::L2 { d: 3, .. })
            && matches!(factors[1].leaf, StateSpace::So3 {})
        {
            (&factors[0], &factors[1])
        } else if matches!(factors[1].leaf, StateSpace::L2 { d: 3, .. })
            && matches!(factors[0].leaf, StateSpace::So3 {})
        {
            (&factors[1], &factors[0])
        } else {
            return None;
        };
        let (w1, w2) = (t.weight, rot.weight);
        if r <= w2 * PI / 2.0 {
            let c = PI * PI / (3.0 * w1.powi(3) * w2);
            return Some(
                c * (2.0 * r.powi(4) - 6.0 * w2 * w2 * r * r + 3.0 * w2.powi(4)
                    - 3.0 * w2.powi(4) * (2.0 * r / w2).cos()),
            );
        }
        return None;
    }
    None
}

/// Pushforward density of the distance-from-center map on a peelable leaf;
/// zero past geometric saturation.
fn leaf_sphere_density(leaf: &StateSpace, rho: f64) -> f64 {
    match leaf {
        StateSpace::L2 { d, .. } => *d as f64 * euclidean_unit_ball(*d) * rho.powi(*d as i32 - 1),
        StateSpace::Circle {} => {
            if rho <= PI {
                2.0
            } else {
                0.0
            }
        }
        _ => unreachable!("not a peelable factor"),
    }
}

/// The factor-peeling integral in Lebesgue units; `leaf1` is L2 or a circle.
fn peel_leaf_integral(
    leaf1: &StateSpace,
    space2: &StateSpace,
    w1: f64,
    w2: f64,
    p: f64,
    r: f64,
) -> f64 {
    let mut upper = r / w1.powf(1.0 / p);
    if matches!(leaf1, StateSpace::Circle {}) {
        upper = upper.min(PI);
    }
    let w2_root = w2.powf(1.0 / p);
    adaptive_simpson(
        |rho| {
            let rem = (r.powf(p) - w1 * rho.powf(p)).max(0.0).powf(1.0 / p);
            leaf_sphere_density(leaf1, rho) * ideal_lebesgue(space2, rem / w2_root).0
        },
        0.0,
        upper,
    )
}

/// Full dispatch in Lebesgue units: closed form, then factor peeling, then
/// a seeded rejection-sampling fallback.
fn ideal_lebesgue(space: &StateSpace, r: f64) -> (f64, VolumeMethod) {
    if r <= 0.0 {
        return (0.0, VolumeMethod::ClosedForm);
    }
    if let Some(factors) = flat_factors(space) {
        let p = compound_p(space);
        if let Some(v) = closed_form_flat(&factors, p, r) {
            return (v, VolumeMethod::ClosedForm);
        }
        // peel the first L2 or circle factor from the flat list
        if let Some(k) = factors
            .iter()
            .position(|f| matches!(f.leaf, StateSpace::L2 { .. } | StateSpace::Circle {}))
        {
            let mut rest_children = Vec::with_capacity(factors.len() - 1);
            let mut rest_weights = Vec::with_capacity(factors.len() - 1);
            for (i, f) in factors.iter().enumerate() {
                if i != k {
                    rest_children.push(f.leaf.clone());
                    rest_weights.push(f.weight);
                }
            }
            let (space2, w2) = if rest_children.len() == 1 {
                (rest_children.pop().unwrap(), rest_weights[0])
            } else {
                (
                    StateSpace::Compound {
                        p,
                        children: rest_children,
                        weights: rest_weights,
                    },
                    1.0,
                )
            };
            let v = peel_leaf_integral(factors[k].leaf, &space2, factors[k].weight, w2, p, r);
            return (v, VolumeMethod::Numeric);
        }
    } else if let StateSpace::Compound {
        p,
        children,
        weights,
    } = space
    {
        // mixed exponents: peel a top-level L2 or circle child if one exists
        if let Some(k) = children
            .iter()
            .position(|c| matches!(c, StateSpace::L2 { .. } | StateSpace::Circle {}))
        {
            let mut rest_children = Vec::with_capacity(children.len() - 1);
            let mut rest_weights = Vec::with_capacity(children.len() - 1);
            for (i, (c, w)) in children.iter().zip(weights).enumerate() {
                if i != k {
                    rest_children.push(c.clone());
                    rest_weights.push(*w);
                }
            }
            let (space2, w2) = if rest_children.len() == 1 {
                (rest_children.pop().unwrap(), rest_weights[0])
            } else {
                (
                    StateSpace::Compound {
                        p: *p,
                        children: rest_children,
                        weights: rest_weights,
                    },
                    1.0,
                )
            };
            let v = peel_leaf_integral(&children[k], &space2, weights[k], w2, *p, r);
            return (v, VolumeMethod::Numeric);
        }
    }
    // no closed form and no peelable factor
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d63);
    match ball_volume_monte_carlo(space, r, 200_000, &mut rng) {
        Ok((v, _)) => (v / space.weight_scale(), VolumeMethod::MonteCarlo),
        Err(_) => (
            space.measure() / space.weight_scale(),
            VolumeMethod::MonteCarlo,
        ),
    }
}
