//! Partition-tree construction.
//!
//! The tree is built bottom-up in rounds: start from the whole plane,
//! refine once with branching `b'`, then `k` more times with branching
//! `b`, where `k = floor(log_b r)` and `b' = ceil(r / b^k)`.  Each
//! level is a list of generalized simplex cells that jointly hold every
//! input point; subdivision uses the crossing-number refinement engine
//! against the set of lines spanned by point pairs.  A global shear is
//! applied up front so that all point abscissae are distinct; queries
//! must be sheared with the stored parameter before descending.

use crate::cell::SimplexCell;
use crate::geom::{find_shear, Line, Point, Shear};
use crate::refine::{refine, RefineConfig, RefineError};
use crate::scalar::{int, Scalar};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct TreeConfig {
    /// Branching factor for all rounds after the first; power of two, >= 4.
    pub b: u32,
    pub beta: Scalar,
    pub c_cut: Scalar,
    /// Re-derive refinement counters from scratch each step and check.
    pub audit: bool,
    /// Cap on the number of test lines: `None` keeps the full set for
    /// small inputs (n <= 64) and an evenly spaced subset of about `2n`
    /// lines otherwise; `Some(c)` forces the cap.
    pub test_cap: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            b: 8,
            beta: crate::scalar::rat(1, 10),
            c_cut: crate::scalar::rat(1, 4),
            audit: false,
            test_cap: None,
        }
    }
}

#[derive(Debug)]
pub enum TreeError {
    /// Fewer than two points: no test lines exist.
    TooFewPoints(usize),
    /// Two input points coincide.
    DuplicatePoint,
    /// `r` outside `2..=n`.
    BadR { r: u32, n: usize },
    BadB(u32),
    Refine(RefineError),
}

impl From<RefineError> for TreeError {
    fn from(e: RefineError) -> Self {
        TreeError::Refine(e)
    }
}

/// One node of a level: its region, the ids of the points it holds,
/// and links to the previous/next level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeCell {
    pub cell: SimplexCell,
    /// Sorted ids into the (sheared) point list.
    pub points: Vec<usize>,
    /// Index into the previous level; `None` at the root.
    pub parent: Option<usize>,
    /// Indices into the next level.
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionTree {
    pub shear: Shear,
    /// Input points after the shear, original order.
    pub pts: Vec<Point>,
    /// Levels 0..=k+1; level 0 is the whole plane.
    pub levels: Vec<Vec<TreeCell>>,
    pub r: u32,
    pub b: u32,
    pub bprime: u32,
    pub k: u32,
    /// Test lines used during refinement (already sheared).
    pub test_lines: Vec<Line>,
}

/// Observed constants from the structural checks.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeStats {
    /// Max over levels `i >= 1` of `|level i| / (b' * b^(i-1))`.
    pub max_size_ratio: Scalar,
    /// Max children of any non-root cell.
    pub max_children: usize,
    pub root_children: usize,
}

/// All distinct lines spanned by pairs of points.
pub fn build_test_set(pts: &[Point]) -> Result<Vec<Line>, TreeError> {
    if pts.len() < 2 {
        return Err(TreeError::TooFewPoints(pts.len()));
    }
    let mut set = std::collections::BTreeSet::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i] == pts[j] {
                return Err(TreeError::DuplicatePoint);
            }
            set.insert(Line::through(&pts[i], &pts[j]));
        }
    }
    Ok(set.into_iter().collect())
}

fn next_pow2(v: u32) -> u32 {
    v.next_power_of_two()
}

/// Evenly spaced subset of `cap` lines from the canonically sorted set.
fn thin_test_set(lines: Vec<Line>, cap: usize) -> Vec<Line> {
    if lines.len() <= cap || cap == 0 {
        return lines;
    }
    let m = lines.len();
    let mut out = Vec::with_capacity(cap);
    let mut last = usize::MAX;
    for i in 0..cap {
        let idx = i * m / cap;
        if idx != last {
            out.push(lines[idx].clone());
            last = idx;
        }
    }
    out
}

pub fn build_tree(points: &[Point], r: u32, cfg: &TreeConfig) -> Result<PartitionTree, TreeError> {
    let n = points.len();
    if n < 2 {
        return Err(TreeError::TooFewPoints(n));
    }
    if r < 2 || r as usize > n {
        return Err(TreeError::BadR { r, n });
    }
    if cfg.b < 4 || !cfg.b.is_power_of_two() {
        return Err(TreeError::BadB(cfg.b));
    }

    // Duplicates must be rejected before shearing: no shear separates
    // coincident points, so find_shear would never terminate.
    let mut sorted: Vec<&Point> = points.iter().collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(TreeError::DuplicatePoint);
    }
    let shear = find_shear(points, &[]);
    let pts: Vec<Point> = points.iter().map(|p| shear.apply_point(p)).collect();

    let mut test_lines = build_test_set(&pts)?;
    let cap = match cfg.test_cap {
        Some(c) => c,
        None => {
            // The full pair set feeds 5m-line normalized multisets to
            // the weighted cutting; exact arithmetic makes that
            // affordable only at small n.
            if n <= 24 {
                usize::MAX
            } else {
                2 * n
            }
        }
    };
    test_lines = thin_test_set(test_lines, cap);

    // k = floor(log_b r), b' = ceil(r / b^k).
    let mut k = 0u32;
    let mut pw = 1u64;
    while pw * cfg.b as u64 <= r as u64 {
        pw *= cfg.b as u64;
        k += 1;
    }
    let bprime = (r as u64).div_ceil(pw) as u32;

    let root = TreeCell {
        cell: SimplexCell::plane(),
        points: (0..n).collect(),
        parent: None,
        children: Vec::new(),
    };
    let mut levels = vec![vec![root]];

    for round in 1..=k + 1 {
        let branching = if round == 1 { bprime } else { cfg.b };
        if branching <= 1 {
            // Nothing to split; the level repeats.
            let prev = levels.last_mut().unwrap();
            for (i, c) in prev.iter_mut().enumerate() {
                c.children = vec![i];
            }
            let copy: Vec<TreeCell> = levels
                .last()
                .unwrap()
                .iter()
                .enumerate()
                .map(|(i, c)| TreeCell {
                    cell: c.cell.clone(),
                    points: c.points.clone(),
                    parent: Some(i),
                    children: Vec::new(),
                })
                .collect();
            levels.push(copy);
            continue;
        }
        let b_round = next_pow2(branching.max(4));
        let cells_in: Vec<(SimplexCell, Vec<usize>)> = levels
            .last()
            .unwrap()
            .iter()
            .map(|c| (c.cell.clone(), c.points.clone()))
            .collect();
        let t_nominal = if round == 1 {
            1
        } else {
            bprime as usize * (cfg.b as usize).pow(round - 2)
        };
        let rcfg = RefineConfig {
            b: b_round,
            beta: cfg.beta.clone(),
            c_cut: cfg.c_cut.clone(),
            audit: cfg.audit,
            trace: false,
            t_nominal: Some(t_nominal),
        };
        let res = refine(&pts, &test_lines, &cells_in, &rcfg)?;
        let mut next = Vec::new();
        for (i, sub) in res.subcells.into_iter().enumerate() {
            let mut ids = res.subcell_points[i].clone();
            if ids.is_empty() {
                continue;
            }
            ids.sort_unstable();
            let parent = res.subcell_parent[i];
            let idx = next.len();
            levels.last_mut().unwrap()[parent].children.push(idx);
            next.push(TreeCell {
                cell: sub,
                points: ids,
                parent: Some(parent),
                children: Vec::new(),
            });
        }
        levels.push(next);
    }

    Ok(PartitionTree {
        shear,
        pts,
        levels,
        r,
        b: cfg.b,
        bprime,
        k,
        test_lines,
    })
}

impl PartitionTree {
    pub fn n(&self) -> usize {
        self.pts.len()
    }

    /// Nominal cell count of level `i >= 1`: `b' * b^(i-1)`.
    pub fn nominal_t(&self, i: u32) -> u64 {
        self.bprime as u64 * (self.b as u64).pow(i - 1)
    }

    /// Structural checks: level sizes, point budgets, nesting, and the
    /// partition property at each level.  Returns the observed size and
    /// branching constants on success.
    pub fn audit_structure(&self) -> Result<TreeStats, String> {
        let n = self.n();
        if self.levels.len() != self.k as usize + 2 {
            return Err(format!("expected {} levels, got {}", self.k + 2, self.levels.len()));
        }
        if self.levels[0].len() != 1 || !self.levels[0][0].cell.constraints().is_empty() {
            return Err("level 0 is not the whole plane".into());
        }
        let mut max_ratio = int(0);
        let mut max_children = 0usize;
        let root_children = self.levels[0][0].children.len();
        for (i, level) in self.levels.iter().enumerate() {
            let mut seen = vec![false; n];
            for (ci, c) in level.iter().enumerate() {
                if i > 0 && c.points.is_empty() {
                    return Err(format!("empty cell {ci} at level {i}"));
                }
                for &p in &c.points {
                    if seen[p] {
                        return Err(format!("point {p} duplicated at level {i}"));
                    }
                    seen[p] = true;
                    if !c.cell.contains(&self.pts[p]) {
                        return Err(format!("point {p} outside its cell at level {i}"));
                    }
                }
                if let Some(par) = c.parent {
                    let pc = &self.levels[i - 1][par];
                    if !pc.children.contains(&ci) {
                        return Err(format!("broken child link at level {i}, cell {ci}"));
                    }
                    if !c.points.iter().all(|p| pc.points.binary_search(p).is_ok()) {
                        return Err(format!("points escape parent at level {i}, cell {ci}"));
                    }
                    if !pc.cell.constraints().iter().all(|h| c.cell.inside_halfplane(h)) {
                        return Err(format!("region escapes parent at level {i}, cell {ci}"));
                    }
                } else if i > 0 {
                    return Err(format!("missing parent at level {i}, cell {ci}"));
                }
                if i > 0 {
                    max_children = max_children.max(c.children.len());
                }
            }
            if !seen.iter().all(|&s| s) {
                return Err(format!("points missing at level {i}"));
            }
            if i > 0 {
                let t = self.nominal_t(i as u32);
                let cap = (2 * n as u64).div_ceil(t);
                for c in level {
                    if c.points.len() as u64 > cap {
                        return Err(format!(
                            "cell with {} points exceeds cap {cap} at level {i}",
                            c.points.len()
                        ));
                    }
                }
                let ratio = Scalar::new((level.len() as i64).into(), (t as i64).into());
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
            }
        }
        Ok(TreeStats {
            max_size_ratio: max_ratio,
            max_children,
            root_children,
        })
    }

    /// Number of cells of each level `1..` crossed by each probe line
    /// (probes must already be sheared).
    pub fn crossing_profile(&self, probes: &[Line]) -> Vec<Vec<usize>> {
        self.levels[1..]
            .iter()
            .map(|level| {
                probes
                    .iter()
                    .map(|l| level.iter().filter(|c| c.cell.crossed_by(l)).count())
                    .collect()
            })
            .collect()
    }

    /// Canonical byte serialization (levels in order, cells in order,
    /// sorted id lists, integer line coefficients).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("serialize")
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_bytes());
        format!("{:x}", h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{points, Family};
    use crate::scalar::rat;

    fn cfg(b: u32, cap: Option<usize>) -> TreeConfig {
        TreeConfig {
            b,
            test_cap: cap,
            ..TreeConfig::default()
        }
    }

    #[test]
    fn test_set_counts() {
        let tri = vec![
            Point::new(int(0), int(0)),
            Point::new(int(3), int(0)),
            Point::new(int(0), int(3)),
        ];
        assert_eq!(build_test_set(&tri).unwrap().len(), 3);
        let col: Vec<Point> = (0..4).map(|i| Point::new(int(i), int(2 * i))).collect();
        assert_eq!(build_test_set(&col).unwrap().len(), 1);
        assert!(matches!(
            build_test_set(&[Point::new(int(1), int(1))]),
            Err(TreeError::TooFewPoints(1))
        ));

        // Brute-force dedup by pairwise containment check.
        let pts = points(Family::Uniform, 12, 7);
        let ts = build_test_set(&pts).unwrap();
        let mut brute: Vec<Line> = Vec::new();
        for i in 0..pts.len() {
            for j in 0..i {
                let l = Line::through(&pts[i], &pts[j]);
                if !brute.contains(&l) {
                    brute.push(l);
                }
            }
        }
        assert_eq!(ts.len(), brute.len());
        for l in &brute {
            assert!(ts.contains(l));
        }
    }

    #[test]
    fn shape_and_budgets() {
        // r = 4, b = 4: k = 1, b' = 1; level 1 repeats the root,
        // level 2 has <= 4 cells of <= ceil(2n/4) points.
        let pts = points(Family::Uniform, 16, 3);
        let t = build_tree(&pts, 4, &cfg(4, Some(48))).unwrap();
        assert_eq!((t.k, t.bprime), (1, 1));
        assert_eq!(t.levels.len(), 3);
        assert_eq!(t.levels[1].len(), 1);
        assert!(t.levels[2].len() <= 4);
        let stats = t.audit_structure().unwrap();
        assert!(stats.max_size_ratio <= int(1));

        // r = 24, b = 4: k = 2, b' = 2.
        let pts = points(Family::Clustered, 24, 5);
        let t = build_tree(&pts, 24, &cfg(4, Some(48))).unwrap();
        assert_eq!((t.k, t.bprime), (2, 2));
        assert_eq!(t.levels.len(), 4);
        t.audit_structure().unwrap();
    }

    #[test]
    fn deterministic_digest() {
        let pts = points(Family::Grid, 16, 0);
        let a = build_tree(&pts, 8, &cfg(4, Some(40))).unwrap();
        let b = build_tree(&pts, 8, &cfg(4, Some(40))).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = build_tree(&pts, 6, &cfg(4, Some(40))).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn crossing_profile_bounds() {
        let pts = points(Family::Clustered, 20, 9);
        let t = build_tree(&pts, 8, &cfg(4, Some(60))).unwrap();
        let probes: Vec<Line> = crate::gen::probe_lines(6, 11, &pts, false)
            .into_iter()
            .map(|l| t.shear.apply_line(&l))
            .collect();
        let prof = t.crossing_profile(&probes);
        assert_eq!(prof.len(), t.levels.len() - 1);
        for (i, row) in prof.iter().enumerate() {
            for &c in row {
                assert!(c <= t.levels[i + 1].len());
            }
        }
        // Test-line crossings per level stay within the normalized
        // bound: max / (sqrt(t_i) + log2(n+1)^3) <= 8.
        let n = pts.len() as f64;
        let log3 = ((n + 1.0).log2()).powi(3);
        for (i, row) in t.crossing_profile(&t.test_lines).iter().enumerate() {
            let worst = *row.iter().max().unwrap() as f64;
            let ti = t.nominal_t(i as u32 + 1) as f64;
            assert!(worst <= 8.0 * (ti.sqrt() + log3), "level {}: {worst}", i + 1);
        }
    }

    #[test]
    fn bad_inputs() {
        let pts = points(Family::Uniform, 10, 1);
        assert!(matches!(
            build_tree(&pts, 1, &cfg(4, None)),
            Err(TreeError::BadR { .. })
        ));
        assert!(matches!(
            build_tree(&pts, 20, &cfg(4, None)),
            Err(TreeError::BadR { .. })
        ));
        assert!(matches!(
            build_tree(&pts, 4, &cfg(6, None)),
            Err(TreeError::BadB(6))
        ));
        let dup = vec![
            Point::new(int(1), int(2)),
            Point::new(int(1), int(2)),
            Point::new(int(3), int(4)),
        ];
        assert!(matches!(
            build_tree(&dup, 2, &cfg(4, None)),
            Err(TreeError::DuplicatePoint)
        ));
    }

    #[test]
    fn roundtrip_serde() {
        let pts = points(Family::Uniform, 12, 2);
        let t = build_tree(&pts, 4, &cfg(4, Some(30))).unwrap();
        let bytes = t.canonical_bytes();
        let back: PartitionTree = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back.digest(), t.digest());
        assert_eq!(back.levels.len(), t.levels.len());
        let _ = rat(1, 2);
    }
}
