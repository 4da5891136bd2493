//! Triangle / halfplane range counting.
//!
//! A two-stage partition tree brings every query down to leaves of at
//! most `t_leaf` points; each leaf carries a three-level structure over
//! the dual lines of its points.  Level 1 is the dual arrangement with
//! per-face below-counts; every face of levels 1 and 2 stores two child
//! structures, one on the lines below it and one on the lines above.
//! A simplex query descends the trees (inside: add the stored count,
//! outside: skip, crossed: recurse) and resolves crossed final leaves
//! with at most three nested point locations in dual space.

use crate::arrangement::Arrangement;
use crate::cell::{Halfplane, SimplexCell};
use crate::geom::{dual_line, dual_point, orient, Line, Point, Segment};
use crate::tree::{build_tree, PartitionTree, TreeConfig, TreeError};
use num_traits::Signed;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RangeCountConfig {
    /// Stage-1 radius; `None` picks `max(4, n/64)`.
    pub r: Option<u32>,
    /// Stage-2 radius; `None` picks `max(2, leaf/8)` per stage-1 leaf.
    pub r1: Option<u32>,
    /// Final leaves hold at most this many points.
    pub t_leaf: usize,
    pub b: u32,
    pub b1: u32,
}

impl Default for RangeCountConfig {
    fn default() -> Self {
        RangeCountConfig { r: None, r1: None, t_leaf: 8, b: 8, b1: 8 }
    }
}

/// Dual-arrangement structure over the points of one final leaf.
#[derive(Debug)]
pub struct LeafCountStructure {
    pts: Vec<Point>,
    root: LeafNode,
}

#[derive(Debug)]
struct LeafNode {
    /// Indices into the owning structure's point list.
    ids: Vec<usize>,
    /// Arrangement of the dual lines of `ids`; `None` when empty.
    arr: Option<Arrangement>,
    /// Per face: child on the lines below it, child on the lines above.
    /// Empty at the deepest level.
    children: Vec<[Option<Box<LeafNode>>; 2]>,
}

/// One final leaf: a region of the deepest partition level plus the
/// structures over its points, chunked so each holds <= t_leaf.
#[derive(Debug)]
struct FinalLeaf {
    ids: Vec<usize>,
    chunks: Vec<LeafCountStructure>,
}

/// One stage-1 leaf: its point set, the stage-2 tree over it (absent
/// when the set is too small to split), and its final leaves indexed
/// by deepest-level cell.
#[derive(Debug)]
struct Group {
    tree: Option<PartitionTree>,
    /// One per deepest-level cell of `tree`, or a single entry.
    leaves: Vec<FinalLeaf>,
}

#[derive(Debug)]
pub struct RangeCountIndex {
    pts: Vec<Point>,
    stage1: Option<PartitionTree>,
    /// One per deepest-level cell of `stage1`, or a single entry.
    groups: Vec<Group>,
    pub cfg: RangeCountConfig,
}

/// A query region: a closed simplex (0..=3 halfplanes), or the
/// degenerate collapses of a zero-area triangle.
#[derive(Clone, Debug)]
pub enum RangeQuery {
    Simplex(Vec<Halfplane>),
    Segment(Segment),
    Point(Point),
}

/// Closed triangle through three corners; collinear or coincident
/// corners collapse to the exact segment / point query.
pub fn triangle_query(a: &Point, b: &Point, c: &Point) -> RangeQuery {
    if orient(a, b, c) != 0 {
        let cell = SimplexCell::triangle(a, b, c);
        return RangeQuery::Simplex(cell.constraints().to_vec());
    }
    let mut v = [a, b, c];
    v.sort();
    if v[0] == v[2] {
        RangeQuery::Point(v[0].clone())
    } else {
        RangeQuery::Segment(Segment::new(v[0].clone(), v[2].clone()))
    }
}

pub fn halfplane_query(l: Line, side: i8) -> RangeQuery {
    RangeQuery::Simplex(vec![Halfplane::new(l, side)])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryStats {
    pub count: usize,
    /// Tree cells classified during the descent (both stages).
    pub visited_cells: usize,
    /// Leaf structures queried.
    pub leaf_visits: usize,
}

fn scan(pts: &[Point], ids: &[usize], cons: &[Halfplane]) -> usize {
    ids.iter().filter(|&&i| cons.iter().all(|h| h.satisfied(&pts[i]))).count()
}

impl LeafCountStructure {
    fn build(pts: Vec<Point>) -> Self {
        let ids: Vec<usize> = (0..pts.len()).collect();
        let root = LeafNode::build(&pts, ids, 1);
        LeafCountStructure { pts, root }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Points satisfying every constraint, by nested dual location.
    pub fn count(&self, cons: &[Halfplane]) -> usize {
        if cons.iter().any(|h| h.line.is_vertical()) {
            // No dual point exists for a vertical side.
            return scan(&self.pts, &self.root.ids, cons);
        }
        self.root.count(&self.pts, cons)
    }
}

impl LeafNode {
    fn build(pts: &[Point], ids: Vec<usize>, depth: u32) -> Self {
        if ids.is_empty() {
            return LeafNode { ids, arr: None, children: Vec::new() };
        }
        let duals: Vec<Line> = ids.iter().map(|&i| dual_point(&pts[i])).collect();
        let arr = Arrangement::build(&duals).expect("dual lines are never vertical");
        let mut children = Vec::new();
        if depth < 3 {
            for f in 0..arr.num_faces() as u32 {
                let below: Vec<usize> = arr
                    .face_below_ids(f)
                    .iter()
                    .flat_map(|&li| arr.src_ids(li))
                    .map(|&s| ids[s])
                    .collect();
                let above: Vec<usize> = ids
                    .iter()
                    .copied()
                    .filter(|i| !below.contains(i))
                    .collect();
                let mk = |sub: Vec<usize>| {
                    if sub.is_empty() {
                        None
                    } else {
                        Some(Box::new(LeafNode::build(pts, sub, depth + 1)))
                    }
                };
                children.push([mk(below), mk(above)]);
            }
        }
        LeafNode { ids, arr: Some(arr), children }
    }

    fn count(&self, pts: &[Point], cons: &[Halfplane]) -> usize {
        if self.ids.is_empty() {
            return 0;
        }
        let Some(h) = cons.first() else {
            return self.ids.len();
        };
        let rest = &cons[1..];
        let arr = self.arr.as_ref().unwrap();
        let q = dual_line(&h.line);
        let loc = arr.locate(&q);
        if !loc.on_lines.is_empty() {
            // Query dual point on a leaf dual line: the incident face's
            // below set no longer splits cleanly; resolve exactly.
            return scan(pts, &self.ids, cons);
        }
        // p above h.line  <=>  dual(p) strictly below the dual point.
        // The constraint keeps the upper side exactly when its side
        // flag matches the sign of the line's y coefficient.
        let want_above = i8::from(h.line.b.is_positive()) * 2 - 1 == h.side;
        let dir = if want_above { 0 } else { 1 };
        if rest.is_empty() {
            let below = arr.face_below_ids(loc.face).len();
            return if want_above { below } else { self.ids.len() - below };
        }
        match self.children[loc.face as usize][dir].as_ref() {
            Some(child) => child.count(pts, rest),
            None => 0,
        }
    }
}

fn subset(pts: &[Point], ids: &[usize]) -> Vec<Point> {
    ids.iter().map(|&i| pts[i].clone()).collect()
}

fn make_final_leaf(pts: &[Point], ids: Vec<usize>, t_leaf: usize) -> FinalLeaf {
    let chunks = ids
        .chunks(t_leaf.max(1))
        .map(|c| LeafCountStructure::build(subset(pts, c)))
        .collect();
    FinalLeaf { ids, chunks }
}

/// Tree over `ids` when they can be split further, else `None`.
fn stage_tree(
    pts: &[Point],
    ids: &[usize],
    r: u32,
    cfg: &TreeConfig,
) -> Result<Option<PartitionTree>, TreeError> {
    let n = ids.len();
    if n < 2 {
        return Ok(None);
    }
    let r = r.min(n as u32).max(2);
    match build_tree(&subset(pts, ids), r, cfg) {
        Ok(t) => Ok(Some(t)),
        Err(e) => Err(e),
    }
}

pub fn build_rangecount(
    points: &[Point],
    cfg: RangeCountConfig,
) -> Result<RangeCountIndex, TreeError> {
    let pts = points.to_vec();
    let n = pts.len();
    // Internal stage trees thin their test sets; the full pair set is a
    // tree-construction concern, not worth its cutting cost here.
    let tcfg = |b: u32, m: usize| TreeConfig {
        b,
        test_cap: Some((2 * m).max(8)),
        ..TreeConfig::default()
    };
    let r = cfg.r.unwrap_or_else(|| ((n / 64) as u32).max(4));
    let all: Vec<usize> = (0..n).collect();
    let stage1 = stage_tree(&pts, &all, r, &tcfg(cfg.b, all.len()))?;

    // Stage-1 leaves; a missing tree makes the whole set one leaf.
    let leaf_ids: Vec<Vec<usize>> = match &stage1 {
        Some(t) => t
            .levels
            .last()
            .unwrap()
            .iter()
            .map(|c| c.points.clone())
            .collect(),
        None => vec![all.clone()],
    };

    let mut groups = Vec::new();
    for g_ids in leaf_ids {
        // Stage-1 trees index their own point subset; map back.
        let owned: Vec<usize> = g_ids;
        let r1 = cfg.r1.unwrap_or_else(|| ((owned.len() / 8) as u32).max(2));
        let tree = stage_tree(&pts, &owned, r1, &tcfg(cfg.b1, owned.len()))?;
        let leaves = match &tree {
            Some(t) => t
                .levels
                .last()
                .unwrap()
                .iter()
                .map(|c| {
                    let ids: Vec<usize> = c.points.iter().map(|&i| owned[i]).collect();
                    make_final_leaf(&pts, ids, cfg.t_leaf)
                })
                .collect(),
            None => vec![make_final_leaf(&pts, owned, cfg.t_leaf)],
        };
        groups.push(Group { tree, leaves });
    }
    Ok(RangeCountIndex { pts, stage1, groups, cfg })
}

/// Inside / outside / crossed classification of a cell against closed
/// constraints in the same coordinate frame.
fn classify(cell: &SimplexCell, cons: &[Halfplane]) -> i8 {
    if cons.iter().any(|h| cell.outside_halfplane(h)) {
        return -1;
    }
    if cons.iter().all(|h| cell.inside_halfplane(h)) {
        return 1;
    }
    0
}

impl RangeCountIndex {
    pub fn n(&self) -> usize {
        self.pts.len()
    }

    pub fn count(&self, q: &RangeQuery) -> QueryStats {
        let mut stats = QueryStats { count: 0, visited_cells: 0, leaf_visits: 0 };
        match q {
            RangeQuery::Point(p) => {
                stats.count = self.pts.iter().filter(|x| *x == p).count();
            }
            RangeQuery::Segment(s) => {
                stats.count = self.pts.iter().filter(|p| s.contains(p)).count();
            }
            RangeQuery::Simplex(cons) => {
                self.count_simplex(cons, &mut stats);
            }
        }
        stats
    }

    fn count_simplex(&self, cons: &[Halfplane], stats: &mut QueryStats) {
        match &self.stage1 {
            Some(t) => {
                let sheared: Vec<Halfplane> = cons
                    .iter()
                    .map(|h| Halfplane::new(t.shear.apply_line(&h.line), h.side))
                    .collect();
                let last = t.levels.len() - 1;
                let mut stack = vec![(0usize, 0usize)];
                while let Some((lvl, ci)) = stack.pop() {
                    let c = &t.levels[lvl][ci];
                    stats.visited_cells += 1;
                    match classify(&c.cell, &sheared) {
                        1 => stats.count += c.points.len(),
                        -1 => {}
                        _ if lvl < last => {
                            stack.extend(c.children.iter().map(|&k| (lvl + 1, k)));
                        }
                        _ => self.count_group(ci, cons, stats),
                    }
                }
            }
            None => self.count_group(0, cons, stats),
        }
    }

    fn count_group(&self, gi: usize, cons: &[Halfplane], stats: &mut QueryStats) {
        let g = &self.groups[gi];
        match &g.tree {
            Some(t) => {
                let sheared: Vec<Halfplane> = cons
                    .iter()
                    .map(|h| Halfplane::new(t.shear.apply_line(&h.line), h.side))
                    .collect();
                let last = t.levels.len() - 1;
                let mut stack = vec![(0usize, 0usize)];
                while let Some((lvl, ci)) = stack.pop() {
                    let c = &t.levels[lvl][ci];
                    stats.visited_cells += 1;
                    match classify(&c.cell, &sheared) {
                        1 => stats.count += c.points.len(),
                        -1 => {}
                        _ if lvl < last => {
                            stack.extend(c.children.iter().map(|&k| (lvl + 1, k)));
                        }
                        _ => self.count_leaf(&g.leaves[ci], cons, stats),
                    }
                }
            }
            None => self.count_leaf(&g.leaves[0], cons, stats),
        }
    }

    fn count_leaf(&self, leaf: &FinalLeaf, cons: &[Halfplane], stats: &mut QueryStats) {
        for ch in &leaf.chunks {
            stats.leaf_visits += 1;
            stats.count += ch.count(cons);
        }
    }

    /// Structural audit: final leaves partition the ids and respect the
    /// leaf size cap.
    pub fn audit_structure(&self) -> Result<(), String> {
        let mut seen = vec![false; self.pts.len()];
        for g in &self.groups {
            if let Some(t) = &g.tree {
                t.audit_structure().map_err(|e| format!("stage-2: {e}"))?;
                if g.leaves.len() != t.levels.last().unwrap().len() {
                    return Err("leaf/cell count mismatch".into());
                }
            }
            for leaf in &g.leaves {
                for ch in &leaf.chunks {
                    if ch.len() > self.cfg.t_leaf {
                        return Err(format!("chunk of {} exceeds t_leaf", ch.len()));
                    }
                }
                if leaf.chunks.iter().map(|c| c.len()).sum::<usize>() != leaf.ids.len() {
                    return Err("chunks do not cover leaf".into());
                }
                for &i in &leaf.ids {
                    if seen[i] {
                        return Err(format!("point {i} in two leaves"));
                    }
                    seen[i] = true;
                }
            }
        }
        if let Some(t) = &self.stage1 {
            t.audit_structure().map_err(|e| format!("stage-1: {e}"))?;
        }
        if !seen.iter().all(|&s| s) {
            return Err("points missing from leaves".into());
        }
        Ok(())
    }

    /// Hash of the full structural layout.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.pts.len() as u64).to_le_bytes());
        if let Some(t) = &self.stage1 {
            h.update(t.digest().as_bytes());
        }
        for g in &self.groups {
            if let Some(t) = &g.tree {
                h.update(t.digest().as_bytes());
            }
            for leaf in &g.leaves {
                for &i in &leaf.ids {
                    h.update((i as u64).to_le_bytes());
                }
                h.update([0xff]);
            }
        }
        format!("{:x}", h.finalize())
    }
}
