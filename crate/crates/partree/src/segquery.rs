//! Segment intersection queries: line detection, and counting /
//! reporting of stored segments intersecting a query segment.
//!
//! Segments are stored once each on a partition tree over their
//! endpoints: at the deepest node whose cell contains the segment,
//! tagged either to a boundary edge the segment crosses or to the node
//! interior.  Every id list carries a wedge structure: the arrangement
//! of the endpoints' dual lines, where each face knows which stored
//! segments' dual wedges contain it (equivalently, which segments a
//! line dualizing into the face would cross) plus a secondary
//! arrangement of those segments' supporting lines for the
//! segment-vs-segment separation test.  Oversized id lists fall back to
//! exact linear scans, keeping answers identical.

use crate::arrangement::Arrangement;
use crate::cell::SimplexCell;
use crate::geom::{dual_line, dual_point, find_shear, segments_intersect, Dir, Line, Point, Ray,
                  Segment, Shear};
use crate::scalar::{int, Scalar};
use crate::tree::{build_tree, PartitionTree, TreeConfig, TreeError};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct SegQueryConfig {
    /// Endpoint-tree radius; `None` picks `max(4, 4n/b^3)` clamped to
    /// the number of distinct endpoints.
    pub r: Option<u32>,
    pub b: u32,
    /// Id lists longer than this answer by linear scan instead of a
    /// wedge structure.
    pub wedge_cap: usize,
}

impl Default for SegQueryConfig {
    fn default() -> Self {
        SegQueryConfig { r: None, b: 4, wedge_cap: 24 }
    }
}

#[derive(Debug)]
pub enum SegQueryError {
    Tree(TreeError),
}

impl From<TreeError> for SegQueryError {
    fn from(e: TreeError) -> Self {
        SegQueryError::Tree(e)
    }
}

/// Exact first intersection of a ray with a closed segment: smallest
/// parameter `t >= 0` with `origin + t*dir` on the segment.  Collinear
/// overlap returns the nearest covered point.
pub fn ray_hit(ray: &Ray, seg: &Segment) -> Option<(Scalar, Point)> {
    if seg.contains(&ray.origin) {
        return Some((int(0), ray.origin.clone()));
    }
    let l = seg.supporting_line();
    if l.side_dir(&ray.dir) != 0 {
        let t = ray.hit_line(&l)?;
        let p = ray.at(&t);
        return seg.contains(&p).then(|| (t, p));
    }
    // Ray parallel to the segment: a hit needs collinearity, and then
    // the answer is the nearest endpoint ahead of the origin.
    if l.side(&ray.origin) != 0 {
        return None;
    }
    let mut best: Option<Scalar> = None;
    for p in [&seg.p, &seg.q] {
        if Dir::from_points(&ray.origin, p) != ray.dir {
            continue;
        }
        let t = if !ray.dir.x.is_zero() {
            (&p.x - &ray.origin.x) / Scalar::from(ray.dir.x.clone())
        } else {
            (&p.y - &ray.origin.y) / Scalar::from(ray.dir.y.clone())
        };
        if best.as_ref().map_or(true, |b| &t < b) {
            best = Some(t);
        }
    }
    best.map(|t| {
        let p = ray.at(&t);
        (t, p)
    })
}

/// Secondary structure of one dual face: the arrangement of the
/// supporting lines of its segment subset.
#[derive(Debug)]
struct SecStruct {
    arr: Arrangement,
    /// Entry indices per arrangement line.
    segs_of_line: Vec<Vec<usize>>,
}

#[derive(Debug)]
struct FaceData {
    /// Entry indices whose dual wedge contains this face.
    a_f: Vec<usize>,
    /// Index into the secondary cache; `None` when `a_f` is empty.
    sec: Option<usize>,
}

/// Dual structure over one stored id list.
#[derive(Debug)]
pub struct WedgeStructure {
    /// (global segment id, sheared geometry).
    entries: Vec<(usize, Segment)>,
    arr: Option<Arrangement>,
    faces: Vec<FaceData>,
    secs: Vec<SecStruct>,
}

impl WedgeStructure {
    fn build(entries: Vec<(usize, Segment)>, cap: usize) -> Self {
        if entries.is_empty() || entries.len() > cap {
            return WedgeStructure { entries, arr: None, faces: Vec::new(), secs: Vec::new() };
        }
        let mut duals: Vec<Line> = entries
            .iter()
            .flat_map(|(_, s)| [dual_point(&s.p), dual_point(&s.q)])
            .collect();
        duals.sort();
        duals.dedup();
        let arr = Arrangement::build(&duals).expect("dual lines are never vertical");
        let mut faces = Vec::with_capacity(arr.num_faces());
        let mut secs: Vec<SecStruct> = Vec::new();
        let mut cache: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for f in 0..arr.num_faces() as u32 {
            let w = arr.face_witness(f);
            let a_f: Vec<usize> = entries
                .iter()
                .enumerate()
                .filter(|(_, (_, s))| {
                    // Above/below, not canonical signs: canonicalizing a
                    // line may flip it, which would pick the wrong pair
                    // of quadrants of the double wedge.
                    dual_point(&s.p).above(&w) * dual_point(&s.q).above(&w) < 0
                })
                .map(|(i, _)| i)
                .collect();
            let sec = if a_f.is_empty() {
                None
            } else {
                let idx = *cache.entry(a_f.clone()).or_insert_with(|| {
                    let mut lines: Vec<Line> = a_f
                        .iter()
                        .map(|&i| Line::through(&entries[i].1.p, &entries[i].1.q))
                        .collect();
                    lines.sort();
                    lines.dedup();
                    let sarr = Arrangement::build(&lines).expect("sheared supports");
                    let segs_of_line = (0..sarr.lines().len())
                        .map(|li| {
                            a_f.iter()
                                .copied()
                                .filter(|&i| {
                                    Line::through(&entries[i].1.p, &entries[i].1.q)
                                        == sarr.lines()[li]
                                })
                                .collect()
                        })
                        .collect();
                    secs.push(SecStruct { arr: sarr, segs_of_line });
                    secs.len() - 1
                });
                Some(idx)
            };
            faces.push(FaceData { a_f, sec });
        }
        WedgeStructure { entries, arr: Some(arr), faces, secs }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn scan_detect(&self, l: &Line) -> bool {
        self.entries.iter().any(|(_, s)| l.side(&s.p) * l.side(&s.q) <= 0)
    }

    /// Does the (sheared) query line hit any stored segment?
    fn detect(&self, l: &Line) -> bool {
        let Some(arr) = &self.arr else {
            return self.scan_detect(l);
        };
        if l.is_vertical() {
            return self.scan_detect(l);
        }
        let d = dual_line(l);
        let loc = arr.locate(&d);
        if !loc.on_lines.is_empty() {
            return self.scan_detect(l);
        }
        !self.faces[loc.face as usize].a_f.is_empty()
    }

    /// Global ids of stored segments intersecting the (sheared) query
    /// segment, via the two nested point locations.
    fn intersecting(&self, sq: &Segment) -> Vec<usize> {
        let scan = || -> Vec<usize> {
            self.entries
                .iter()
                .filter(|(_, s)| segments_intersect(s, sq))
                .map(|(id, _)| *id)
                .collect()
        };
        let Some(arr) = &self.arr else {
            return scan();
        };
        let lq = Line::through(&sq.p, &sq.q);
        if lq.is_vertical() {
            return scan();
        }
        let d = dual_line(&lq);
        let loc = arr.locate(&d);
        if !loc.on_lines.is_empty() {
            return scan();
        }
        let fd = &self.faces[loc.face as usize];
        let Some(sec) = fd.sec else {
            return Vec::new();
        };
        let sec = &self.secs[sec];
        let l1 = sec.arr.locate(&sq.p);
        let l2 = sec.arr.locate(&sq.q);
        if !l1.on_lines.is_empty() || !l2.on_lines.is_empty() {
            // A query endpoint exactly on a supporting line: closed
            // separation needs the sign-zero cases; resolve the small
            // candidate set exactly.
            return fd
                .a_f
                .iter()
                .filter(|&&i| segments_intersect(&self.entries[i].1, sq))
                .map(|&i| self.entries[i].0)
                .collect();
        }
        // A support separates the query endpoints exactly when it lies
        // below exactly one of them.
        let b1: BTreeSet<u32> = sec.arr.face_below_ids(l1.face).iter().copied().collect();
        let b2: BTreeSet<u32> = sec.arr.face_below_ids(l2.face).iter().copied().collect();
        let mut out: Vec<usize> = b1
            .symmetric_difference(&b2)
            .flat_map(|&li| sec.segs_of_line[li as usize].iter())
            .map(|&i| self.entries[i].0)
            .collect();
        out.sort_unstable();
        out
    }

    /// First ray hit among stored segments: smallest parameter, then
    /// smallest id.  `ray` already sheared.
    pub fn first_hit(&self, ray: &Ray) -> Option<(usize, Scalar, Point)> {
        let candidates: Vec<usize> = match &self.arr {
            None => (0..self.entries.len()).collect(),
            Some(arr) => {
                let lr = ray.supporting_line();
                if lr.is_vertical() {
                    (0..self.entries.len()).collect()
                } else {
                    let d = dual_line(&lr);
                    let loc = arr.locate(&d);
                    if loc.on_lines.is_empty() {
                        self.faces[loc.face as usize].a_f.clone()
                    } else {
                        (0..self.entries.len()).collect()
                    }
                }
            }
        };
        let mut best: Option<(usize, Scalar, Point)> = None;
        for i in candidates {
            let (id, s) = &self.entries[i];
            if let Some((t, p)) = ray_hit(ray, s) {
                let better = match &best {
                    None => true,
                    Some((bid, bt, _)) => t < *bt || (t == *bt && id < bid),
                };
                if better {
                    best = Some((*id, t, p));
                }
            }
        }
        best
    }
}

/// Where one segment is stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Deepest node whose cell contains the segment with no child
    /// advance possible: (level, cell).
    Interior(usize, usize),
    /// Crossing constraint `k` of cell (level, cell).
    Edge(usize, usize, usize),
}

#[derive(Debug, Default)]
struct NodeStore {
    interior: Option<WedgeStructure>,
    /// (constraint index, structure over segments crossing it).
    edges: Vec<(usize, WedgeStructure)>,
}

#[derive(Debug)]
pub struct SegmentStore {
    shear: Shear,
    segs: Vec<Segment>,
    tree: Option<PartitionTree>,
    nodes: BTreeMap<(usize, usize), NodeStore>,
    placement: Vec<Placement>,
    pub cfg: SegQueryConfig,
}

/// Signs of a line over a cell frame: (has positive, has negative,
/// has a frame point exactly on the line).
fn frame_signs(cell: &SimplexCell, l: &Line) -> (bool, bool, bool) {
    let mut pos = false;
    let mut neg = false;
    let mut zero = false;
    for p in &cell.frame().points {
        match l.side(p) {
            1 => pos = true,
            -1 => neg = true,
            _ => zero = true,
        }
    }
    for d in &cell.frame().dirs {
        match l.side_dir(d) {
            1 => pos = true,
            -1 => neg = true,
            _ => {}
        }
    }
    (pos, neg, zero)
}

/// Does the line meet the closed cell?
fn line_meets_cell(cell: &SimplexCell, l: &Line) -> bool {
    let (pos, neg, zero) = frame_signs(cell, l);
    (pos && neg) || zero || (!pos && !neg)
}

pub fn build_segment_store(
    segments: &[Segment],
    cfg: SegQueryConfig,
) -> Result<SegmentStore, SegQueryError> {
    // One global shear: distinct endpoint abscissae (so the endpoint
    // tree shears by the identity on top) and no vertical supporting
    // or dual-degenerate lines.
    let mut endpoints: Vec<Point> = segments.iter().flat_map(|s| [s.p.clone(), s.q.clone()]).collect();
    endpoints.sort();
    endpoints.dedup();
    let supports: Vec<Line> = segments.iter().map(|s| Line::through(&s.p, &s.q)).collect();
    let shear = find_shear(&endpoints, &supports);
    let segs: Vec<Segment> = segments.iter().map(|s| shear.apply_segment(s)).collect();
    let pts: Vec<Point> = {
        let mut v: Vec<Point> = endpoints.iter().map(|p| shear.apply_point(p)).collect();
        v.sort();
        v
    };

    let n = segments.len();
    let tree = if pts.len() >= 2 {
        let b = cfg.b;
        let r = cfg
            .r
            .unwrap_or_else(|| ((4 * n) as u32 / (b * b * b)).max(4))
            .clamp(2, pts.len() as u32);
        let tcfg = TreeConfig {
            b,
            // Thinned test set: full pair lines are too costly here.
            test_cap: Some((2 * pts.len()).max(8)),
            ..TreeConfig::default()
        };
        Some(build_tree(&pts, r, &tcfg)?)
    } else {
        None
    };

    // Storage walk.
    let mut placement = Vec::with_capacity(n);
    for s in &segs {
        let mut place = Placement::Interior(0, 0);
        if let Some(t) = &tree {
            let mut lvl = 0;
            let mut cell = 0;
            'walk: loop {
                if lvl + 1 == t.levels.len() {
                    place = Placement::Interior(lvl, cell);
                    break;
                }
                let kids = &t.levels[lvl][cell].children;
                for &k in kids {
                    let c = &t.levels[lvl + 1][k].cell;
                    if c.contains(&s.p) && c.contains(&s.q) {
                        lvl += 1;
                        cell = k;
                        continue 'walk;
                    }
                }
                for &k in kids {
                    let c = &t.levels[lvl + 1][k].cell;
                    if !c.intersects_segment(s) {
                        continue;
                    }
                    for (ci, h) in c.constraints().iter().enumerate() {
                        if h.eval_sign(&s.p) * h.eval_sign(&s.q) <= 0 {
                            place = Placement::Edge(lvl + 1, k, ci);
                            break 'walk;
                        }
                    }
                }
                // No child contains or is crossed: the segment lies in
                // a region the children do not cover.
                place = Placement::Interior(lvl, cell);
                break;
            }
        }
        placement.push(place);
    }

    // Group and build the structures.
    let mut interior: BTreeMap<(usize, usize), Vec<(usize, Segment)>> = BTreeMap::new();
    let mut edge: BTreeMap<(usize, usize, usize), Vec<(usize, Segment)>> = BTreeMap::new();
    for (i, pl) in placement.iter().enumerate() {
        let e = (i, segs[i].clone());
        match *pl {
            Placement::Interior(l, c) => interior.entry((l, c)).or_default().push(e),
            Placement::Edge(l, c, k) => edge.entry((l, c, k)).or_default().push(e),
        }
    }
    let mut nodes: BTreeMap<(usize, usize), NodeStore> = BTreeMap::new();
    for (k, v) in interior {
        nodes.entry(k).or_default().interior = Some(WedgeStructure::build(v, cfg.wedge_cap));
    }
    for ((l, c, k), v) in edge {
        nodes
            .entry((l, c))
            .or_default()
            .edges
            .push((k, WedgeStructure::build(v, cfg.wedge_cap)));
    }
    Ok(SegmentStore { shear, segs, tree, nodes, placement, cfg })
}

impl SegmentStore {
    pub fn n(&self) -> usize {
        self.segs.len()
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placement
    }

    pub fn detect_line(&self, l: &Line) -> bool {
        self.detect_line_stats(l).0
    }

    /// Answer plus the number of stored structures consulted.
    pub fn detect_line_stats(&self, l: &Line) -> (bool, usize) {
        let l = self.shear.apply_line(l);
        let mut found = false;
        let mut visited = 0;
        self.walk_structures(
            |cell| line_meets_cell(cell, &l),
            |w| {
                visited += 1;
                if !found && w.detect(&l) {
                    found = true;
                }
            },
        );
        (found, visited)
    }

    pub fn report_intersecting(&self, sq: &Segment) -> Vec<usize> {
        self.report_intersecting_stats(sq).0
    }

    /// Ids plus the number of stored structures consulted.
    pub fn report_intersecting_stats(&self, sq: &Segment) -> (Vec<usize>, usize) {
        let sq = self.shear.apply_segment(sq);
        let mut out = Vec::new();
        let mut visited = 0;
        self.walk_structures(
            |cell| cell.intersects_segment(&sq),
            |w| {
                visited += 1;
                out.extend(w.intersecting(&sq));
            },
        );
        out.sort_unstable();
        (out, visited)
    }

    pub fn count_intersecting(&self, sq: &Segment) -> usize {
        self.report_intersecting(sq).len()
    }

    /// First hit of a ray over every stored structure (used by ray
    /// shooting): smallest parameter, ties to the smallest id.
    pub fn first_hit(&self, ray: &Ray) -> Option<(usize, Scalar, Point)> {
        self.first_hit_stats(ray).0
    }

    /// Hit plus the number of stored structures consulted.
    pub fn first_hit_stats(&self, ray: &Ray) -> (Option<(usize, Scalar, Point)>, usize) {
        let orig = ray;
        let ray = Ray::new(
            self.shear.apply_point(&ray.origin),
            self.shear.apply_dir(&ray.dir),
        );
        let lr = ray.supporting_line();
        let mut best: Option<(usize, Scalar, Point)> = None;
        let mut visited = 0;
        self.walk_structures(
            |cell| line_meets_cell(cell, &lr),
            |w| {
                visited += 1;
                if let Some((id, t, p)) = w.first_hit(&ray) {
                    let better = match &best {
                        None => true,
                        Some((bid, bt, _)) => t < *bt || (t == *bt && id < *bid),
                    };
                    if better {
                        best = Some((id, t, p));
                    }
                }
            },
        );
        // Shearing rescales the (normalized) direction, so the stored
        // parameter is off by a positive constant; recover the original
        // one from the hit point.  Ordering was unaffected.
        let hit = best.map(|(id, _, p)| {
            let p = self.shear.unapply_point(&p);
            let t = if !orig.dir.x.is_zero() {
                (&p.x - &orig.origin.x) / Scalar::from(orig.dir.x.clone())
            } else {
                (&p.y - &orig.origin.y) / Scalar::from(orig.dir.y.clone())
            };
            (id, t, p)
        });
        (hit, visited)
    }

    /// Visit every structure whose segments could satisfy a query whose
    /// geometric support passes the cell test: a node's own structures
    /// when its cell passes, and edge structures of all children of a
    /// passing node (their segments stick out of the child cell).
    fn walk_structures<F: FnMut(&WedgeStructure)>(
        &self,
        hits: impl Fn(&SimplexCell) -> bool,
        mut f: F,
    ) {
        let Some(t) = &self.tree else {
            if let Some(ns) = self.nodes.get(&(0, 0)) {
                if let Some(w) = &ns.interior {
                    f(w);
                }
                for (_, w) in &ns.edges {
                    f(w);
                }
            }
            return;
        };
        let mut stack = vec![(0usize, 0usize)];
        while let Some((lvl, ci)) = stack.pop() {
            if let Some(ns) = self.nodes.get(&(lvl, ci)) {
                if let Some(w) = &ns.interior {
                    f(w);
                }
            }
            if lvl + 1 == t.levels.len() {
                continue;
            }
            for &k in &t.levels[lvl][ci].children {
                if let Some(ns) = self.nodes.get(&(lvl + 1, k)) {
                    for (_, w) in &ns.edges {
                        f(w);
                    }
                }
                if hits(&t.levels[lvl + 1][k].cell) {
                    stack.push((lvl + 1, k));
                }
            }
        }
    }

    /// Storage-discipline audit: every segment exactly once, edge
    /// entries really cross their constraint line and touch the cell,
    /// interior entries really fit their cell.
    pub fn audit_storage(&self) -> Result<(), String> {
        if self.placement.len() != self.segs.len() {
            return Err("placement length mismatch".into());
        }
        let mut per_node: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, pl) in self.placement.iter().enumerate() {
            let s = &self.segs[i];
            match *pl {
                Placement::Interior(l, c) => {
                    *per_node.entry((l, c)).or_default() += 1;
                    if let Some(t) = &self.tree {
                        let cell = &t.levels[l][c].cell;
                        if !(cell.contains(&s.p) && cell.contains(&s.q)) {
                            return Err(format!("segment {i} escapes its interior node"));
                        }
                    }
                }
                Placement::Edge(l, c, k) => {
                    let t = self.tree.as_ref().ok_or("edge placement without tree")?;
                    let cell = &t.levels[l][c].cell;
                    let h = &cell.constraints()[k];
                    if h.eval_sign(&s.p) * h.eval_sign(&s.q) > 0 {
                        return Err(format!("segment {i} does not cross its edge line"));
                    }
                    if !cell.intersects_segment(s) {
                        return Err(format!("segment {i} misses its edge cell"));
                    }
                }
            }
        }
        let stored: usize = self
            .nodes
            .values()
            .map(|ns| {
                ns.interior.as_ref().map_or(0, |w| w.len())
                    + ns.edges.iter().map(|(_, w)| w.len()).sum::<usize>()
            })
            .sum();
        if stored != self.segs.len() {
            return Err(format!("stored {stored} of {}", self.segs.len()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{segments, Family, Rng};
    use crate::oracle;

    fn cfg_small() -> SegQueryConfig {
        SegQueryConfig { r: Some(4), b: 4, wedge_cap: 10 }
    }

    fn rnd_pt(rng: &mut Rng) -> Point {
        Point::ints(rng.below(161) as i64 - 80, rng.below(161) as i64 - 80)
    }

    #[test]
    fn detect_matches_oracle() {
        let segs = segments(Family::Uniform, 22, 9, false);
        let store = build_segment_store(&segs, cfg_small()).unwrap();
        store.audit_storage().unwrap();
        let mut rng = Rng::new(5);
        for _ in 0..150 {
            let (a, b) = (rnd_pt(&mut rng), rnd_pt(&mut rng));
            if a == b {
                continue;
            }
            let l = Line::through(&a, &b);
            assert_eq!(store.detect_line(&l), oracle::detect_line(&segs, &l), "{l:?}");
        }
        // Vertical query lines use the scan path.
        let v = Line::vertical(&int(3));
        assert_eq!(store.detect_line(&v), oracle::detect_line(&segs, &v));
    }

    #[test]
    fn counting_matches_oracle() {
        let segs = segments(Family::Uniform, 18, 2, false);
        let store = build_segment_store(&segs, cfg_small()).unwrap();
        let mut rng = Rng::new(31);
        for _ in 0..120 {
            let (a, b) = (rnd_pt(&mut rng), rnd_pt(&mut rng));
            if a == b {
                continue;
            }
            let sq = Segment::new(a, b);
            let want = oracle::seg_intersect_ids(&segs, &sq);
            let got = store.report_intersecting(&sq);
            assert_eq!(got, want, "{sq:?}");
            assert_eq!(store.count_intersecting(&sq), want.len());
        }
    }

    #[test]
    fn endpoint_touching_queries() {
        // Closed convention: touching at endpoints counts.
        let segs = segments(Family::Clustered, 14, 7, false);
        let store = build_segment_store(&segs, cfg_small()).unwrap();
        for (i, s) in segs.iter().enumerate() {
            let sq = Segment::new(s.p.clone(), s.p.midpoint(&s.q));
            let want = oracle::seg_intersect_ids(&segs, &sq);
            assert!(want.contains(&i));
            assert_eq!(store.report_intersecting(&sq), want);
        }
    }

    #[test]
    fn first_hit_matches_oracle() {
        let segs = segments(Family::Uniform, 16, 13, false);
        let store = build_segment_store(&segs, cfg_small()).unwrap();
        let mut rng = Rng::new(44);
        for _ in 0..120 {
            let o = rnd_pt(&mut rng);
            let (dx, dy) = (rng.below(21) as i64 - 10, rng.below(21) as i64 - 10);
            if dx == 0 && dy == 0 {
                continue;
            }
            let ray = Ray::new(o, Dir::ints(dx, dy));
            let got = store.first_hit(&ray);
            let want = oracle::first_hit(&segs, &ray);
            match (got, want) {
                (None, None) => {}
                (Some((gi, gt, gp)), Some((wi, wt))) => {
                    assert_eq!(gt, wt, "parameter mismatch");
                    assert_eq!(gi, wi);
                    let _ = gp;
                }
                (g, w) => panic!("mismatch {g:?} vs {w:?}"),
            }
        }
    }

    #[test]
    fn tiny_inputs() {
        let one = vec![Segment::new(Point::ints(0, 0), Point::ints(4, 4))];
        let store = build_segment_store(&one, cfg_small()).unwrap();
        store.audit_storage().unwrap();
        assert!(store.detect_line(&Line::through(&Point::ints(0, 4), &Point::ints(4, 0))));
        assert!(!store.detect_line(&Line::through(&Point::ints(0, 9), &Point::ints(4, 9))));
        assert!(build_segment_store(&[], cfg_small()).unwrap().audit_storage().is_ok());
    }
}
