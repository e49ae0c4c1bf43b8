//! Cross-validation of the ball-volume machinery: closed forms against the
//! factor-peeling integral, both against rejection sampling, and the
//! ball-sphere derivative relation on well-behaved spaces.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mp_core::space::StateSpace;
use mp_core::volume::{
    ball_volume, ball_volume_ideal, ball_volume_monte_carlo, canonical_transform,
    compound_ball_volume_numeric, sphere_surface,
};

const PI: f64 = std::f64::consts::PI;

/// A test space plus the largest radius at which (a) the paper-style closed
/// form is exact (no factor saturates) and (b) the Monte-Carlo center ball
/// stays clear of every Euclidean bound.
struct Case {
    name: &'static str,
    space: StateSpace,
    r_max: f64,
    /// Decomposition for the two-factor numeric integral, when one applies.
    split: Option<(StateSpace, StateSpace, f64, f64)>,
}

fn l2(d: usize, half: f64) -> StateSpace {
    StateSpace::l2(vec![(-half, half); d])
}

fn l1(d: usize, half: f64) -> StateSpace {
    StateSpace::l1(vec![(-half, half); d])
}

/// Draws positive weights in [0.5, 2].
fn w(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.5..2.0)
}

fn cases(rng: &mut ChaCha8Rng) -> Vec<Case> {
    let mut out = Vec::new();
    out.push(Case {
        name: "L2(2)",
        space: l2(2, 6.0),
        r_max: 5.0,
        split: None,
    });
    out.push(Case {
        name: "L2(3)",
        space: l2(3, 6.0),
        r_max: 5.0,
        split: None,
    });
    out.push(Case {
        name: "L1(2)",
        space: l1(2, 6.0),
        r_max: 5.0,
        split: None,
    });
    out.push(Case {
        name: "L1(3)",
        space: l1(3, 6.0),
        r_max: 5.0,
        split: None,
    });
    out.push(Case {
        name: "S1",
        space: StateSpace::circle(),
        r_max: PI,
        split: None,
    });
    out.push(Case {
        name: "S2",
        space: StateSpace::sphere2(),
        r_max: PI,
        split: None,
    });
    out.push(Case {
        name: "S3",
        space: StateSpace::so3(),
        r_max: PI / 2.0,
        split: None,
    });

    // SE(2) with random weights
    let (w1, w2) = (w(rng), w(rng));
    out.push(Case {
        name: "SE(2)",
        space: StateSpace::se2(vec![(-6.0, 6.0); 2], w1, w2),
        r_max: (w2 * PI).min(w1 * 5.0),
        split: Some((l2(2, 6.0), StateSpace::circle(), w1, w2)),
    });

    // SE(3) with random weights
    let (w1, w2) = (w(rng), w(rng));
    out.push(Case {
        name: "SE(3)",
        space: StateSpace::se3(vec![(-6.0, 6.0); 3], w1, w2),
        r_max: (w2 * PI / 2.0).min(w1 * 5.0),
        split: Some((l2(3, 6.0), StateSpace::so3(), w1, w2)),
    });

    // T(2), T(3) with random per-circle weights
    let (w1, w2) = (w(rng), w(rng));
    out.push(Case {
        name: "T(2)",
        space: StateSpace::compound(
            vec![StateSpace::circle(), StateSpace::circle()],
            vec![w1, w2],
            1.0,
        ),
        r_max: PI * w1.min(w2),
        split: Some((StateSpace::circle(), StateSpace::circle(), w1, w2)),
    });
    let (w1, w2, w3) = (w(rng), w(rng), w(rng));
    out.push(Case {
        name: "T(3)",
        space: StateSpace::compound(
            vec![
                StateSpace::circle(),
                StateSpace::circle(),
                StateSpace::circle(),
            ],
            vec![w1, w2, w3],
            1.0,
        ),
        r_max: PI * w1.min(w2).min(w3),
        split: Some((
            StateSpace::circle(),
            StateSpace::compound(
                vec![StateSpace::circle(), StateSpace::circle()],
                vec![w2, w3],
                1.0,
            ),
            w1,
            1.0,
        )),
    });

    // two translating planar robots
    let (w1, w2) = (w(rng), w(rng));
    out.push(Case {
        name: "L2(2)^2",
        space: StateSpace::compound(vec![l2(2, 6.0), l2(2, 6.0)], vec![w1, w2], 1.0),
        r_max: 5.0 * w1.min(w2),
        split: Some((l2(2, 6.0), l2(2, 6.0), w1, w2)),
    });

    // two translating spatial robots
    let (w1, w2) = (w(rng), w(rng));
    out.push(Case {
        name: "L2(3)^2",
        space: StateSpace::compound(vec![l2(3, 6.0), l2(3, 6.0)], vec![w1, w2], 1.0),
        r_max: 5.0 * w1.min(w2),
        split: Some((l2(3, 6.0), l2(3, 6.0), w1, w2)),
    });

    // two planar rigid bodies, flat factor list
    let ws: Vec<f64> = (0..4).map(|_| w(rng)).collect();
    out.push(Case {
        name: "SE(2)^2",
        space: StateSpace::compound(
            vec![
                l2(2, 6.0),
                StateSpace::circle(),
                l2(2, 6.0),
                StateSpace::circle(),
            ],
            ws.clone(),
            1.0,
        ),
        r_max: (PI * ws[1].min(ws[3])).min(5.0 * ws[0].min(ws[2])),
        split: Some((
            l2(2, 6.0),
            StateSpace::compound(
                vec![StateSpace::circle(), l2(2, 6.0), StateSpace::circle()],
                vec![ws[1], ws[2], ws[3]],
                1.0,
            ),
            ws[0],
            1.0,
        )),
    });

    // circle times planar rigid body
    let (w2, w3, w4) = (w(rng), w(rng), w(rng));
    out.push(Case {
        name: "S1 x SE(2)",
        space: StateSpace::compound(
            vec![StateSpace::circle(), l2(2, 6.0), StateSpace::circle()],
            vec![w2, w3, w4],
            1.0,
        ),
        r_max: (PI * w2.min(w4)).min(5.0 * w3),
        split: Some((
            StateSpace::circle(),
            StateSpace::se2(vec![(-6.0, 6.0); 2], w3, w4),
            w2,
            1.0,
        )),
    });
    out
}

#[test]
fn closed_forms_match_numeric_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in cases(&mut rng) {
        let Some((x1, x2, w1, w2)) = case.split else {
            continue;
        };
        for _ in 0..20 {
            let r = rng.gen_range(0.2..0.95) * case.r_max;
            let closed = ball_volume(&case.space, r);
            let numeric = compound_ball_volume_numeric(&x1, &x2, w1, w2, 1.0, r).unwrap();
            let rel = (closed - numeric).abs() / closed;
            assert!(
                rel <= 1e-6,
                "{}: closed {closed} vs numeric {numeric} at r = {r}",
                case.name
            );
        }
    }
}

#[test]
fn monte_carlo_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let trials = 300_000;
    for case in cases(&mut rng) {
        for _ in 0..10 {
            let r = rng.gen_range(0.6..0.95) * case.r_max;
            let closed = ball_volume(&case.space, r);
            let (est, se) = ball_volume_monte_carlo(&case.space, r, trials, &mut rng).unwrap();
            assert!(
                (est - closed).abs() <= 4.0 * se.max(1e-12),
                "{}: closed {closed}, mc {est} +- {se} at r = {r}",
                case.name
            );
        }
    }
}

#[test]
fn derivative_relation_on_well_behaved_spaces() {
    // central finite difference of the ball volume against the sphere
    // surface, at 10 radii each
    let spaces: Vec<(StateSpace, f64)> = vec![
        (l2(2, 20.0), 5.0),
        (l2(3, 20.0), 5.0),
        (l2(4, 20.0), 5.0),
        (StateSpace::circle(), PI * 0.95),
        (StateSpace::torus(2), PI * 0.95),
    ];
    for (space, r_hi) in spaces {
        for i in 1..=10 {
            let r = r_hi * i as f64 / 10.0;
            let h = 1e-5 * r.max(1.0);
            let fd =
                (ball_volume_ideal(&space, r + h) - ball_volume_ideal(&space, r - h)) / (2.0 * h);
            let s = sphere_surface(&space, r).unwrap();
            assert!(
                (fd - s).abs() <= 1e-4 * s,
                "{space:?} at r = {r}: dB/dr = {fd} vs S = {s}"
            );
        }
    }
}

#[test]
fn derivative_relation_fails_on_manhattan_plane() {
    // the geometric perimeter of the diamond exceeds dB/dr by sqrt(2)
    let space = l1(2, 20.0);
    let r = 1.5;
    let h = 1e-5;
    let fd = (ball_volume_ideal(&space, r + h) - ball_volume_ideal(&space, r - h)) / (2.0 * h);
    let s = sphere_surface(&space, r).unwrap();
    assert!((fd - s).abs() > 0.2 * s, "fd = {fd}, s = {s}");
}

#[test]
fn canonical_transform_flags_ill_behaved_spheres() {
    // the caps on S^2 and S^3 satisfy the derivative relation with their own
    // surface formulas, but they are not scaling families: the canonical
    // transform deviates from the identity, which is what rules them out as
    // first factors
    for i in 1..=8 {
        let r = 0.35 * i as f64;
        if r < PI {
            let s2 = canonical_transform(&StateSpace::sphere2(), r).unwrap();
            assert!((s2 - 2.0 * (r / 2.0).tan()).abs() < 1e-9);
            assert!((s2 - r).abs() > 1e-3 * r);
        }
        if r < PI / 2.0 {
            let s3 = canonical_transform(&StateSpace::so3(), r).unwrap();
            let expect = 3.0 * (2.0 * r - (2.0 * r).sin()) / (4.0 * r.sin() * r.sin());
            assert!((s3 - expect).abs() < 1e-9);
            assert!((s3 - r).abs() > 1e-3 * r);
        }
    }
    // and the identity holds on well-behaved spaces, including the torus
    for i in 1..=8 {
        let r = 0.3 * i as f64;
        let t = canonical_transform(&StateSpace::torus(2), r).unwrap();
        assert!((t - r).abs() < 1e-9, "torus s({r}) = {t}");
    }
}
