//! Seeded generators for random convex polygons and related test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::geometry::{ConvexBody, Vec2};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for the `index`-th item of a batch, so batches can be
/// split across workers without changing results.
pub fn substream(seed: u64, index: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

fn point_in_disc<R: Rng>(r: &mut R) -> Vec2 {
    let rad = r.gen::<f64>().sqrt();
    let th = r.gen::<f64>() * 2.0 * PI;
    Vec2::new(rad * th.cos(), rad * th.sin())
}

/// Hull of `n ~ U{4..40}` uniform points in the unit disc, rejected while
/// the inradius is below 5% of the diameter, rescaled to unit measure.
pub fn random_body<R: Rng>(r: &mut R) -> ConvexBody {
    loop {
        let n = r.gen_range(4..=40);
        let pts: Vec<Vec2> = (0..n).map(|_| point_in_disc(r)).collect();
        let Ok(b) = ConvexBody::from_points(&pts) else {
            continue;
        };
        if b.inradius() < 0.05 * b.diameter() {
            continue;
        }
        if let Ok(s) = b.scale(b.measure().powf(-0.5)) {
            return s;
        }
    }
}

/// `count` bodies, the `i`-th drawn from `substream(seed, i)`.
pub fn random_bodies(seed: u64, count: usize) -> Vec<ConvexBody> {
    (0..count)
        .map(|i| random_body(&mut substream(seed, i as u64)))
        .collect()
}

/// Uniform point of `body` by rejection from its bounding box.
pub fn point_in_body<R: Rng>(body: &ConvexBody, r: &mut R) -> Vec2 {
    let v = body.vertices();
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    loop {
        let p = Vec2::new(r.gen_range(lo.x..hi.x), r.gen_range(lo.y..hi.y));
        if body.contains(p) {
            return p;
        }
    }
}

/// A convex body contained in `outer`: either the hull of random interior
/// points or a shrunken copy shifted inside.
pub fn nested_inside<R: Rng>(outer: &ConvexBody, r: &mut R) -> ConvexBody {
    loop {
        if r.gen_bool(0.5) {
            let n = r.gen_range(3..=12);
            let pts: Vec<Vec2> = (0..n).map(|_| point_in_body(outer, r)).collect();
            if let Ok(b) = ConvexBody::from_points(&pts) {
                return b;
            }
        } else {
            // homothety about an interior point stays inside a convex set
            let s = r.gen_range(0.3..0.95);
            let p = point_in_body(outer, r);
            let inner = outer.scale(s).expect("positive scale");
            return inner.translate((1.0 - s) * (p - outer.centroid()));
        }
    }
}

/// Random rotation angle and translation.
pub fn rigid_motion<R: Rng>(r: &mut R) -> (f64, Vec2) {
    (
        r.gen_range(0.0..2.0 * PI),
        Vec2::new(r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)),
    )
}

/// Thin convex hull with length/width ratio about `aspect`, unit measure.
pub fn sliver<R: Rng>(aspect: f64, r: &mut R) -> ConvexBody {
    loop {
        let n = r.gen_range(4..=12);
        let pts: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0) / aspect))
            .chain([Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)])
            .collect();
        if let Ok(b) = ConvexBody::from_points(&pts) {
            let th = r.gen_range(0.0..PI);
            return b
                .rotate(th)
                .scale(b.measure().powf(-0.5))
                .expect("positive scale");
        }
    }
}

/// Regular `n`-gon with the given measure centred at the origin.
pub fn regular_polygon(n: usize, measure: f64) -> ConvexBody {
    let pts: Vec<Vec2> = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    let b = ConvexBody::from_points(&pts).expect("regular polygon");
    b.scale((measure / b.measure()).sqrt())
        .expect("positive scale")
}
