//! Triangle stabbing: count / report the triangles containing a point.
//!
//! Each triangle contributes three canonical halfplane constraints; a
//! query point stabs the triangle when it satisfies all three.  The
//! index is a three-level structure: level k holds a partition tree
//! over the dual points of the k-th constraint lines, visited along a
//! short schedule of tree levels.  A cell crossed by the query's dual
//! line is refined at the next scheduled level (final cells fall back
//! to a small primal arrangement with per-face counts); a cell entirely
//! on one side has its k-th constraints uniformly decided and drops to
//! the level-(k-1) structure built for that side.  A global primal
//! shear removes vertical constraint lines up front.

use crate::arrangement::Arrangement;
use crate::cell::{Halfplane, SimplexCell};
use crate::geom::{dual_point, find_shear, orient, Line, Point, Shear};
use crate::scalar::{rat, Scalar};
use crate::tree::{build_tree, PartitionTree, TreeConfig, TreeError};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct StabbingConfig {
    /// Radius of the dual partition trees; `None` picks `max(4, n/4)`,
    /// always clamped to the number of distinct dual points.
    pub r: Option<u32>,
    pub b: u32,
    /// Schedule exponent; in (0, 1).
    pub eps: Scalar,
    /// Subsets at most this large skip the tree and build the
    /// arrangement structure directly.
    pub t_leaf: usize,
    /// Store id-lists so queries can report, not just count.
    pub reporting: bool,
}

impl Default for StabbingConfig {
    fn default() -> Self {
        StabbingConfig { r: None, b: 8, eps: rat(1, 2), t_leaf: 8, reporting: false }
    }
}

#[derive(Debug)]
pub enum StabError {
    /// Triangle with collinear corners.
    Degenerate(usize),
    BadEps,
    ReportingDisabled,
    Tree(TreeError),
}

impl From<TreeError> for StabError {
    fn from(e: TreeError) -> Self {
        StabError::Tree(e)
    }
}

/// Arrangement of the remaining constraint lines of a small triangle
/// subset, with per-face satisfied-counts.
#[derive(Debug)]
struct LeafArr {
    /// Remaining constraints per triangle: the first `k` of its three.
    k: usize,
    ids: Vec<usize>,
    arr: Option<Arrangement>,
    face_counts: Vec<usize>,
    face_ids: Option<Vec<Vec<usize>>>,
}

#[derive(Debug)]
enum LevelStruct {
    /// No constraints left: every triangle here contains the query.
    Count { count: usize, ids: Option<Vec<usize>> },
    Leaf(LeafArr),
    Tree(Box<TreeLevel>),
}

#[derive(Debug)]
struct TreeLevel {
    /// Constraint level: this tree decides the k-th constraint.
    k: usize,
    tree: PartitionTree,
    /// Scheduled tree-level indices, strictly increasing.
    sched: Vec<usize>,
    /// Triangle ids per scheduled cell, key (schedule position, cell).
    cell_ids: BTreeMap<(usize, usize), Vec<usize>>,
    /// Structures for cells entirely below / above the query dual line.
    below: BTreeMap<(usize, usize), LevelStruct>,
    above: BTreeMap<(usize, usize), LevelStruct>,
    /// Fallback structures for cells crossed at the last scheduled level.
    final_leaf: BTreeMap<usize, LeafArr>,
}

#[derive(Debug)]
pub struct StabbingIndex {
    shear: Shear,
    /// Sheared triangles and their canonical constraints.
    tris: Vec<[Point; 3]>,
    cons: Vec<[Halfplane; 3]>,
    root: LevelStruct,
    pub cfg: StabbingConfig,
}

/// `ceil(log_b(r^(p/q) / b'))`, by exact integer comparison: the
/// smallest j with `(b^j * b')^q >= r^p`.
fn ceil_log_term(r: u64, b: u64, bp: u64, p: u32, q: u32) -> i64 {
    let rp = BigInt::from(r).pow(p);
    for j in -64..=64i64 {
        // b^(j q) * b'^q >= r^p, moved to positive exponents.
        let lhs;
        let rhs;
        if j >= 0 {
            lhs = BigInt::from(b).pow(j as u32 * q) * BigInt::from(bp).pow(q);
            rhs = rp.clone();
        } else {
            lhs = BigInt::from(bp).pow(q);
            rhs = rp.clone() * BigInt::from(b).pow((-j) as u32 * q);
        }
        if lhs >= rhs {
            return j;
        }
    }
    64
}

/// Scheduled level indices `j_i = ceil(log_b(r^(1-(1-eps)^i) / b')) + 1`,
/// stopping at the first i with `r/b < b' * b^(j_i - 1)`.
pub fn level_schedule(r: u32, b: u32, bprime: u32, eps: &Scalar) -> Vec<i64> {
    assert!(eps > &Scalar::zero() && eps < &Scalar::one());
    let en = eps.numer().clone();
    let ed = eps.denom().clone();
    let mut out = Vec::new();
    // (1-eps)^i = ((ed-en)/ed)^i; alpha_i = 1 - that.
    let base_n = &ed - &en;
    let mut pow_n = BigInt::one();
    let mut pow_d = BigInt::one();
    loop {
        // alpha = (pow_d - pow_n) / pow_d, both fit u32 at desk scale.
        let p: u32 = (&pow_d - &pow_n).try_into().expect("schedule exponent");
        let q: u32 = (&pow_d).try_into().expect("schedule exponent");
        let j = ceil_log_term(r as u64, b as u64, bprime as u64, p, q) + 1;
        out.push(j);
        // Terminate when r/b < b' * b^(j-1), i.e. r < b' * b^j.
        if j >= 1
            && BigInt::from(r) < BigInt::from(bprime) * BigInt::from(b).pow(j as u32)
        {
            break;
        }
        pow_n *= &base_n;
        pow_d *= &ed;
        if out.len() > 64 {
            break;
        }
    }
    out
}

/// Canonical constraints: lines in canonical order, sides keeping the
/// interior non-negative.
fn canonical_cons(t: &[Point; 3], idx: usize) -> Result<[Halfplane; 3], StabError> {
    if orient(&t[0], &t[1], &t[2]) == 0 {
        return Err(StabError::Degenerate(idx));
    }
    let centroid = Point::new(
        (&t[0].x + &t[1].x + &t[2].x) / crate::scalar::int(3),
        (&t[0].y + &t[1].y + &t[2].y) / crate::scalar::int(3),
    );
    let mut lines = [
        Line::through(&t[0], &t[1]),
        Line::through(&t[1], &t[2]),
        Line::through(&t[2], &t[0]),
    ];
    lines.sort();
    Ok(lines.map(|l| {
        let side = l.side(&centroid);
        Halfplane::new(l, side)
    }))
}

fn satisfies(cons: &[Halfplane; 3], k: usize, q: &Point) -> bool {
    cons[..k].iter().all(|h| h.satisfied(q))
}

impl LeafArr {
    fn build(ctx: &[[Halfplane; 3]], k: usize, ids: Vec<usize>, reporting: bool) -> Self {
        let mut lines: Vec<Line> = ids
            .iter()
            .flat_map(|&i| ctx[i][..k].iter().map(|h| h.line.clone()))
            .collect();
        lines.sort();
        lines.dedup();
        if ids.is_empty() || lines.is_empty() {
            return LeafArr { k, ids, arr: None, face_counts: Vec::new(), face_ids: None };
        }
        let arr = Arrangement::build(&lines).expect("sheared lines are not vertical");
        let mut face_counts = Vec::with_capacity(arr.num_faces());
        let mut face_ids = reporting.then(Vec::new);
        for f in 0..arr.num_faces() as u32 {
            let w = arr.face_witness(f);
            let sat: Vec<usize> =
                ids.iter().copied().filter(|&i| satisfies(&ctx[i], k, &w)).collect();
            face_counts.push(sat.len());
            if let Some(fi) = face_ids.as_mut() {
                fi.push(sat);
            }
        }
        LeafArr { k, ids, arr: Some(arr), face_counts, face_ids }
    }

    fn query(&self, ctx: &[[Halfplane; 3]], q: &Point, out: Option<&mut Vec<usize>>) -> usize {
        let Some(arr) = &self.arr else {
            if self.ids.is_empty() {
                return 0;
            }
            // No constraints remain (k = 0 subsets never reach here).
            unreachable!("leaf structure without lines but with ids");
        };
        let loc = arr.locate(q);
        if loc.on_lines.is_empty() {
            if let Some(out) = out {
                out.extend(&self.face_ids.as_ref().expect("reporting ids")[loc.face as usize]);
            }
            return self.face_counts[loc.face as usize];
        }
        // On an arrangement line: the located face's annotation is for
        // its interior, so resolve the boundary point exactly.
        let sat = self.ids.iter().copied().filter(|&i| satisfies(&ctx[i], self.k, q));
        match out {
            Some(out) => {
                let before = out.len();
                out.extend(sat);
                out.len() - before
            }
            None => sat.count(),
        }
    }
}

/// Cell position relative to the query dual line, in sign terms of the
/// primal-space order: `Below` means every dual point of the cell lies
/// strictly below the line (the query point is below every such
/// constraint line), `Touch` means some frame generator lies exactly on
/// it and the cell is not crossed.
#[derive(PartialEq, Eq, Debug)]
enum CellSide {
    Crossed,
    Above,
    Below,
    Touch,
}

fn cell_side(cell: &SimplexCell, l: &Line, flip: i8) -> CellSide {
    let mut pos = false;
    let mut neg = false;
    let mut zero_pt = false;
    for p in &cell.frame().points {
        match flip * l.side(p) {
            1 => pos = true,
            -1 => neg = true,
            _ => zero_pt = true,
        }
    }
    for d in &cell.frame().dirs {
        match flip * l.side_dir(d) {
            1 => pos = true,
            -1 => neg = true,
            _ => {}
        }
    }
    if pos && neg {
        CellSide::Crossed
    } else if zero_pt {
        CellSide::Touch
    } else if pos {
        CellSide::Below
    } else if neg {
        CellSide::Above
    } else {
        CellSide::Touch
    }
}

/// Raw sign of `q.x * d.x - d.y - q.y`: positive exactly when the dual
/// point `d` lies strictly below the dual line of `q`.
fn raw_below_sign(q: &Point, d: &Point) -> i8 {
    let v = &q.x * &d.x - &d.y - &q.y;
    match v.cmp(&Scalar::zero()) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Sign factor aligning the tree-sheared canonical dual line with the
/// raw below-above function.
fn shear_flip(q: &Point, lsh: &Line, shear: &Shear) -> i8 {
    for probe in [Point::ints(0, 0), Point::ints(0, 1), Point::ints(1, 0)] {
        let raw = raw_below_sign(q, &probe);
        if raw != 0 {
            let s = lsh.side(&shear.apply_point(&probe));
            return raw * s;
        }
    }
    unreachable!("dual line cannot pass through three distinct probes");
}

struct BuildCtx<'a> {
    cons: &'a [[Halfplane; 3]],
    cfg: &'a StabbingConfig,
}

fn build_level(ctx: &BuildCtx, k: usize, ids: Vec<usize>) -> Result<LevelStruct, StabError> {
    if k == 0 {
        return Ok(LevelStruct::Count {
            count: ids.len(),
            ids: ctx.cfg.reporting.then_some(ids),
        });
    }
    // Distinct dual points of the k-th constraint lines.
    let mut owners: BTreeMap<Point, Vec<usize>> = BTreeMap::new();
    for &i in &ids {
        let d = crate::geom::dual_line(&ctx.cons[i][k - 1].line);
        owners.entry(d).or_default().push(i);
    }
    if ids.len() <= ctx.cfg.t_leaf || owners.len() < 2 {
        return Ok(LevelStruct::Leaf(LeafArr::build(ctx.cons, k, ids, ctx.cfg.reporting)));
    }
    let dpts: Vec<Point> = owners.keys().cloned().collect();
    let tri_of: Vec<Vec<usize>> = owners.into_values().collect();
    let r = ctx
        .cfg
        .r
        .unwrap_or_else(|| ((ids.len() / 4) as u32).max(4))
        .clamp(2, dpts.len() as u32);
    let tcfg = TreeConfig {
        b: ctx.cfg.b,
        // Thinned test set: full pair lines are too costly for inner trees.
        test_cap: Some((2 * dpts.len()).max(8)),
        ..TreeConfig::default()
    };
    let tree = build_tree(&dpts, r, &tcfg)?;
    let max_level = tree.levels.len() - 1;
    let sched: Vec<usize> = {
        let mut s: Vec<usize> = level_schedule(r, ctx.cfg.b, tree.bprime, &ctx.cfg.eps)
            .into_iter()
            .map(|j| j.clamp(1, max_level as i64) as usize)
            .collect();
        s.dedup();
        s
    };

    let mut cell_ids = BTreeMap::new();
    let mut below = BTreeMap::new();
    let mut above = BTreeMap::new();
    let mut final_leaf = BTreeMap::new();
    for (si, &lvl) in sched.iter().enumerate() {
        for (ci, c) in tree.levels[lvl].iter().enumerate() {
            let t_ids: Vec<usize> =
                c.points.iter().flat_map(|&p| tri_of[p].iter().copied()).collect();
            // The k-th constraint of an "above" cell is satisfied when
            // its side flag matches the sign of the line's y
            // coefficient (the query point is then above the line).
            let split = |want: i8| -> Vec<usize> {
                t_ids
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let h = &ctx.cons[i][k - 1];
                        let s = if h.line.b.is_positive() { 1 } else { -1 };
                        h.side * s == want
                    })
                    .collect()
            };
            above.insert((si, ci), build_level(ctx, k - 1, split(1))?);
            below.insert((si, ci), build_level(ctx, k - 1, split(-1))?);
            if si + 1 == sched.len() {
                final_leaf
                    .insert(ci, LeafArr::build(ctx.cons, k, t_ids.clone(), ctx.cfg.reporting));
            }
            cell_ids.insert((si, ci), t_ids);
        }
    }
    Ok(LevelStruct::Tree(Box::new(TreeLevel {
        k,
        tree,
        sched,
        cell_ids,
        below,
        above,
        final_leaf,
    })))
}

impl TreeLevel {
    /// Cells of tree level `to` descending from `cell` at level `from`.
    fn descendants(&self, from: usize, cell: usize, to: usize) -> Vec<usize> {
        let mut cur = vec![cell];
        for lvl in from..to {
            cur = cur
                .into_iter()
                .flat_map(|c| self.tree.levels[lvl][c].children.iter().copied())
                .collect();
        }
        cur
    }

    fn query(
        &self,
        cons: &[[Halfplane; 3]],
        q: &Point,
        mut out: Option<&mut Vec<usize>>,
        visited: &mut usize,
    ) -> usize {
        let lsh = self.tree.shear.apply_line(&dual_point(q));
        let flip = shear_flip(q, &lsh, &self.tree.shear);
        let mut total = 0;
        let mut stack: Vec<(usize, usize)> =
            (0..self.tree.levels[self.sched[0]].len()).map(|c| (0, c)).collect();
        while let Some((si, ci)) = stack.pop() {
            let cell = &self.tree.levels[self.sched[si]][ci].cell;
            match cell_side(cell, &lsh, flip) {
                CellSide::Crossed => {
                    if si + 1 < self.sched.len() {
                        for d in self.descendants(self.sched[si], ci, self.sched[si + 1]) {
                            stack.push((si + 1, d));
                        }
                    } else {
                        *visited += 1;
                        total +=
                            self.final_leaf[&ci].query(cons, q, out.as_deref_mut());
                    }
                }
                CellSide::Above => {
                    total +=
                        query_level(&self.above[&(si, ci)], cons, q, out.as_deref_mut(), visited);
                }
                CellSide::Below => {
                    total +=
                        query_level(&self.below[&(si, ci)], cons, q, out.as_deref_mut(), visited);
                }
                CellSide::Touch => {
                    // A dual point may sit exactly on the query line;
                    // resolve the whole cell exactly.
                    *visited += 1;
                    let sat = self.cell_ids[&(si, ci)]
                        .iter()
                        .copied()
                        .filter(|&i| satisfies(&cons[i], self.k, q));
                    match out.as_deref_mut() {
                        Some(o) => {
                            let before = o.len();
                            o.extend(sat);
                            total += o.len() - before;
                        }
                        None => total += sat.count(),
                    }
                }
            }
        }
        total
    }
}

fn query_level(
    ls: &LevelStruct,
    cons: &[[Halfplane; 3]],
    q: &Point,
    out: Option<&mut Vec<usize>>,
    visited: &mut usize,
) -> usize {
    match ls {
        LevelStruct::Count { count, ids } => {
            *visited += 1;
            if let Some(out) = out {
                out.extend(ids.as_ref().expect("reporting ids"));
            }
            *count
        }
        LevelStruct::Leaf(leaf) => {
            *visited += 1;
            leaf.query(cons, q, out)
        }
        LevelStruct::Tree(t) => t.query(cons, q, out, visited),
    }
}

pub fn build_stabbing(
    triangles: &[[Point; 3]],
    cfg: StabbingConfig,
) -> Result<StabbingIndex, StabError> {
    if cfg.eps <= Scalar::zero() || cfg.eps >= Scalar::one() {
        return Err(StabError::BadEps);
    }
    for (i, t) in triangles.iter().enumerate() {
        if orient(&t[0], &t[1], &t[2]) == 0 {
            return Err(StabError::Degenerate(i));
        }
    }
    // Shear the primal plane so no constraint line is vertical.
    let all_lines: Vec<Line> = triangles
        .iter()
        .flat_map(|t| {
            [
                Line::through(&t[0], &t[1]),
                Line::through(&t[1], &t[2]),
                Line::through(&t[2], &t[0]),
            ]
        })
        .collect();
    let shear = find_shear(&[], &all_lines);
    let tris: Vec<[Point; 3]> = triangles
        .iter()
        .map(|t| [0, 1, 2].map(|i| shear.apply_point(&t[i])))
        .collect();
    let cons: Vec<[Halfplane; 3]> = tris
        .iter()
        .enumerate()
        .map(|(i, t)| canonical_cons(t, i))
        .collect::<Result<_, _>>()?;
    let ids: Vec<usize> = (0..tris.len()).collect();
    let root = build_level(&BuildCtx { cons: &cons, cfg: &cfg }, 3, ids)?;
    Ok(StabbingIndex { shear, tris, cons, root, cfg })
}

impl StabbingIndex {
    pub fn n(&self) -> usize {
        self.tris.len()
    }

    pub fn stab_count(&self, q: &Point) -> usize {
        self.stab_count_stats(q).0
    }

    /// Count plus the number of terminal structures consulted.
    pub fn stab_count_stats(&self, q: &Point) -> (usize, usize) {
        let q = self.shear.apply_point(q);
        let mut visited = 0;
        let count = query_level(&self.root, &self.cons, &q, None, &mut visited);
        (count, visited)
    }

    pub fn stab_report(&self, q: &Point) -> Result<Vec<usize>, StabError> {
        if !self.cfg.reporting {
            return Err(StabError::ReportingDisabled);
        }
        let q = self.shear.apply_point(q);
        let mut out = Vec::new();
        let mut visited = 0;
        query_level(&self.root, &self.cons, &q, Some(&mut out), &mut visited);
        out.sort_unstable();
        Ok(out)
    }

    /// Total stored triangle ids across all structures, for the space
    /// audit, together with the root schedule length.
    pub fn space_report(&self) -> (usize, usize) {
        fn walk(ls: &LevelStruct) -> usize {
            match ls {
                LevelStruct::Count { count, .. } => *count,
                LevelStruct::Leaf(l) => l.ids.len(),
                LevelStruct::Tree(t) => {
                    t.cell_ids.values().map(|v| v.len()).sum::<usize>()
                        + t.final_leaf.values().map(|l| l.ids.len()).sum::<usize>()
                        + t.below.values().chain(t.above.values()).map(walk).sum::<usize>()
                }
            }
        }
        let l = match &self.root {
            LevelStruct::Tree(t) => t.sched.len(),
            _ => 1,
        };
        (walk(&self.root), l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{triangles, Family, Rng};
    use crate::oracle;
    use crate::scalar::int;

    fn small_cfg(reporting: bool) -> StabbingConfig {
        StabbingConfig { r: Some(4), b: 4, eps: rat(1, 2), t_leaf: 4, reporting }
    }

    #[test]
    fn schedule_hand_arithmetic() {
        // r = 16, b = 4, b' = 1, eps = 1/2: j_0 = 1, j_1 = 2, j_2 = 3,
        // stopping there since 16 < 1 * 4^3.
        assert_eq!(level_schedule(16, 4, 1, &rat(1, 2)), vec![1, 2, 3]);
        // Termination bound b' * b^(j_l - 1) <= r.
        for (r, b, bp) in [(16u32, 4u32, 1u32), (64, 4, 1), (256, 4, 4), (1 << 16, 8, 2)] {
            let s = level_schedule(r, b, bp, &rat(1, 2));
            assert!(s.len() <= 7, "schedule too long: {s:?}");
            let jl = *s.last().unwrap();
            assert!(
                BigInt::from(bp) * BigInt::from(b).pow(jl as u32 - 1) <= BigInt::from(r)
            );
        }
    }

    #[test]
    fn counts_match_oracle() {
        let tris = triangles(Family::Uniform, 24, 5);
        let idx = build_stabbing(&tris, small_cfg(false)).unwrap();
        let mut rng = Rng::new(77);
        for _ in 0..120 {
            let q = Point::new(
                rat(rng.below(2001) as i64 - 1000, 13),
                rat(rng.below(2001) as i64 - 1000, 13),
            );
            assert_eq!(idx.stab_count(&q), oracle::stab_ids(&tris, &q).len(), "{q:?}");
        }
    }

    #[test]
    fn boundary_queries() {
        // Corners and edge midpoints use closed containment.
        let tris = triangles(Family::Uniform, 12, 8);
        let idx = build_stabbing(&tris, small_cfg(true)).unwrap();
        for t in &tris {
            for q in [t[0].clone(), t[1].midpoint(&t[2]), t[0].midpoint(&t[1])] {
                assert_eq!(idx.stab_count(&q), oracle::stab_ids(&tris, &q).len(), "{q:?}");
                assert_eq!(idx.stab_report(&q).unwrap(), oracle::stab_ids(&tris, &q));
            }
        }
    }

    #[test]
    fn report_matches_oracle() {
        let tris = triangles(Family::Uniform, 20, 3);
        let idx = build_stabbing(&tris, small_cfg(true)).unwrap();
        let mut rng = Rng::new(15);
        for _ in 0..80 {
            let q = Point::ints(rng.below(201) as i64 - 100, rng.below(201) as i64 - 100);
            let got = idx.stab_report(&q).unwrap();
            assert_eq!(got, oracle::stab_ids(&tris, &q));
            assert_eq!(got.len(), idx.stab_count(&q));
        }
    }

    #[test]
    fn tiny_and_identical() {
        let one = vec![[Point::ints(0, 0), Point::ints(4, 0), Point::ints(0, 4)]];
        let idx = build_stabbing(&one, small_cfg(true)).unwrap();
        assert_eq!(idx.stab_count(&Point::ints(1, 1)), 1);
        assert_eq!(idx.stab_count(&Point::ints(9, 9)), 0);
        assert_eq!(idx.stab_report(&Point::ints(1, 1)).unwrap(), vec![0]);

        let same: Vec<[Point; 3]> = (0..7).map(|_| one[0].clone()).collect();
        let idx = build_stabbing(&same, small_cfg(false)).unwrap();
        assert_eq!(idx.stab_count(&Point::ints(1, 1)), 7);

        let degen = vec![[Point::ints(0, 0), Point::ints(1, 1), Point::ints(2, 2)]];
        assert!(matches!(
            build_stabbing(&degen, small_cfg(false)),
            Err(StabError::Degenerate(0))
        ));
    }

    #[test]
    fn space_shape() {
        let tris = triangles(Family::Uniform, 32, 11);
        let idx = build_stabbing(&tris, small_cfg(false)).unwrap();
        let (stored, l) = idx.space_report();
        // O(n log log n) shape with a generous desk-scale constant.
        assert!(stored <= 64 * 32 * (l + 1), "stored {stored}, l {l}");
        let _ = int(0);
    }
}
