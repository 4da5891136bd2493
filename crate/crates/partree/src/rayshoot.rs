//! Ray shooting among pairwise-disjoint segments: first segment hit by
//! a query ray, by smallest hit parameter with ties broken by smallest
//! id.
//!
//! The index is the segment store of [`crate::segquery`]; a query walks
//! the nodes whose cells meet the ray's supporting line, narrows each
//! stored list to the segments crossing that line via the wedge
//! structure, and resolves the candidates with exact ray/segment
//! intersections.

use crate::geom::{segments_intersect, Point, Ray, Segment};
use crate::scalar::Scalar;
use crate::segquery::{build_segment_store, SegQueryConfig, SegQueryError, SegmentStore};

#[derive(Clone, Debug)]
pub struct RayShootConfig {
    pub store: SegQueryConfig,
    /// Accept segments that touch at a single shared endpoint.
    pub allow_shared_endpoints: bool,
}

impl Default for RayShootConfig {
    fn default() -> Self {
        RayShootConfig { store: SegQueryConfig::default(), allow_shared_endpoints: false }
    }
}

#[derive(Debug)]
pub enum RayShootError {
    /// Segments with the given ids are not disjoint.
    Overlap(usize, usize),
    Store(SegQueryError),
}

impl From<SegQueryError> for RayShootError {
    fn from(e: SegQueryError) -> Self {
        RayShootError::Store(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayHit {
    pub id: usize,
    /// Parameter along the query ray's direction (`origin + t * dir`).
    pub t: Scalar,
    pub point: Point,
}

#[derive(Debug)]
pub struct RayShootIndex {
    store: SegmentStore,
}

/// Do two intersecting segments meet only at one shared endpoint?
fn single_shared_endpoint(s: &Segment, t: &Segment) -> bool {
    let shared: Vec<&Point> = [&s.p, &s.q]
        .into_iter()
        .filter(|p| **p == t.p || **p == t.q)
        .collect();
    if shared.len() != 1 {
        return false;
    }
    let p = shared[0];
    if !s.supporting_line().is_parallel(&t.supporting_line()) {
        // Distinct non-parallel supports through p meet only at p.
        return true;
    }
    // Collinear with a shared endpoint: disjoint apart from p exactly
    // when neither contains the other's far endpoint.
    let s_far = if *p == s.p { &s.q } else { &s.p };
    let t_far = if *p == t.p { &t.q } else { &t.p };
    !s.contains(t_far) && !t.contains(s_far)
}

pub fn build_rayshoot(
    segments: &[Segment],
    cfg: RayShootConfig,
) -> Result<RayShootIndex, RayShootError> {
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if !segments_intersect(&segments[i], &segments[j]) {
                continue;
            }
            if cfg.allow_shared_endpoints && single_shared_endpoint(&segments[i], &segments[j]) {
                continue;
            }
            return Err(RayShootError::Overlap(i, j));
        }
    }
    let store = build_segment_store(segments, cfg.store)?;
    Ok(RayShootIndex { store })
}

impl RayShootIndex {
    pub fn n(&self) -> usize {
        self.store.n()
    }

    pub fn shoot(&self, ray: &Ray) -> Option<RayHit> {
        self.shoot_stats(ray).0
    }

    /// Hit plus the number of stored structures consulted.
    pub fn shoot_stats(&self, ray: &Ray) -> (Option<RayHit>, usize) {
        let (hit, visited) = self.store.first_hit_stats(ray);
        (hit.map(|(id, t, point)| RayHit { id, t, point }), visited)
    }

    pub fn audit_storage(&self) -> Result<(), String> {
        self.store.audit_storage()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{segments, Family, Rng};
    use crate::geom::Dir;
    use crate::oracle;
    use crate::scalar::int;

    fn cfg_small() -> RayShootConfig {
        RayShootConfig {
            store: SegQueryConfig { r: Some(4), b: 4, wedge_cap: 10 },
            allow_shared_endpoints: false,
        }
    }

    #[test]
    fn shoot_matches_oracle() {
        let segs = segments(Family::Uniform, 20, 3, true);
        let idx = build_rayshoot(&segs, cfg_small()).unwrap();
        idx.audit_storage().unwrap();
        let mut rng = Rng::new(17);
        for _ in 0..200 {
            let o = Point::ints(rng.below(121) as i64 - 20, rng.below(121) as i64 - 20);
            let (dx, dy) = (rng.below(13) as i64 - 6, rng.below(13) as i64 - 6);
            if dx == 0 && dy == 0 {
                continue;
            }
            let ray = Ray::new(o, Dir::ints(dx, dy));
            let got = idx.shoot(&ray);
            let want = oracle::first_hit(&segs, &ray);
            match (got, want) {
                (None, None) => {}
                (Some(h), Some((wi, wt))) => {
                    assert_eq!((h.id, &h.t), (wi, &wt), "{ray:?}");
                    assert!(segs[h.id].contains(&h.point));
                    assert_eq!(h.point, ray.at(&h.t));
                }
                (g, w) => panic!("mismatch {g:?} vs {w:?} for {ray:?}"),
            }
        }
    }

    #[test]
    fn origin_on_segment_and_collinear() {
        let segs = vec![
            Segment::new(Point::ints(0, 0), Point::ints(10, 0)),
            Segment::new(Point::ints(20, -5), Point::ints(20, 5)),
        ];
        let idx = build_rayshoot(&segs, cfg_small()).unwrap();
        // Origin on segment 0: parameter zero.
        let on = idx.shoot(&Ray::new(Point::ints(4, 0), Dir::ints(1, 0))).unwrap();
        assert_eq!((on.id, on.t), (0, int(0)));
        // Collinear approach from the left hits the nearest endpoint.
        let col = idx.shoot(&Ray::new(Point::ints(-6, 0), Dir::ints(1, 0))).unwrap();
        assert_eq!((col.id, col.t, col.point), (0, int(6), Point::ints(0, 0)));
        // Past both segments, shooting away: no hit.
        assert!(idx.shoot(&Ray::new(Point::ints(30, 0), Dir::ints(1, 0))).is_none());
        // Ties by smallest parameter: segment 1 behind segment 0's end.
        let through = idx.shoot(&Ray::new(Point::ints(12, 0), Dir::ints(1, 0))).unwrap();
        assert_eq!(through.id, 1);
    }

    #[test]
    fn disjointness_is_enforced() {
        let crossing = vec![
            Segment::new(Point::ints(0, 0), Point::ints(4, 4)),
            Segment::new(Point::ints(0, 4), Point::ints(4, 0)),
        ];
        assert!(matches!(
            build_rayshoot(&crossing, cfg_small()),
            Err(RayShootError::Overlap(0, 1))
        ));

        let shared = vec![
            Segment::new(Point::ints(0, 0), Point::ints(4, 0)),
            Segment::new(Point::ints(4, 0), Point::ints(8, 3)),
        ];
        assert!(build_rayshoot(&shared, cfg_small()).is_err());
        let mut cfg = cfg_small();
        cfg.allow_shared_endpoints = true;
        assert!(build_rayshoot(&shared, cfg.clone()).is_ok());

        // Collinear overlap stays rejected even with shared endpoints on.
        let overlap = vec![
            Segment::new(Point::ints(0, 0), Point::ints(6, 0)),
            Segment::new(Point::ints(6, 0), Point::ints(2, 0)),
        ];
        assert!(matches!(
            build_rayshoot(&overlap, cfg),
            Err(RayShootError::Overlap(0, 1))
        ));
    }
}
