//! Line arrangements with slab-based point location.
//!
//! The sweep sorts the (non-vertical, deduplicated) lines once in the
//! leftmost slab and crosses each vertex by reversing the run of lines
//! through it, so construction is O(m log m + V) exact comparisons.
//! Two-dimensional faces are connected components of slab gaps, glued by
//! union-find across slab boundaries; a face's id is its first
//! (slab, gap) appearance, which makes ids deterministic.
//!
//! Boundary convention: `locate` maps points on edges or vertices to the
//! smallest incident face id and reports the lines through the point.

use crate::cell::SimplexCell;
use crate::geom::{Line, Point};
use crate::scalar::{int, Scalar};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error("vertical line at index {0}; shear the input first")]
    Vertical(usize),
    #[error("no lines")]
    Empty,
}
#[derive(Debug)]
pub struct Arrangement {
    /// Distinct lines, sorted canonically.
    lines: Vec<Line>,
    /// Source item ids per distinct line (multiplicity = len).
    src: Vec<Vec<usize>>,
    /// Sorted distinct x-coordinates of arrangement vertices.
    slab_x: Vec<Scalar>,
    /// Line order (bottom to top) per slab; `slab_x.len() + 1` slabs.
    orders: Vec<Vec<u32>>,
    faces: Vec<FaceInfo>,
    /// Face id per (slab, gap).
    face_of: Vec<Vec<u32>>,
    n_vertices: usize,
    /// Distinct vertices per line, for the Euler audit.
    verts_per_line: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FaceInfo {
    /// First (slab, gap) this face appears at: the face id order key and
    /// the witness representative.
    pub rep: (usize, usize),
    /// Last (slab, gap), used as an independent second witness.
    pub rep2: (usize, usize),
    /// Total multiplicity of lines strictly below the face.
    pub below_weight: usize,
}

#[derive(Clone, Debug)]
pub struct Located {
    pub face: u32,
    /// Indices of arrangement lines passing through the query point.
    pub on_lines: Vec<u32>,
}

impl Arrangement {
    /// Builds the arrangement of the given lines (item id = slice
    /// index). Lines may repeat; duplicates share one arrangement line.
    pub fn build(input: &[Line]) -> Result<Arrangement, ArrangementError> {
        if input.is_empty() {
            return Err(ArrangementError::Empty);
        }
        for (i, l) in input.iter().enumerate() {
            if l.is_vertical() {
                return Err(ArrangementError::Vertical(i));
            }
        }
        let mut by_line: BTreeMap<Line, Vec<usize>> = BTreeMap::new();
        for (i, l) in input.iter().enumerate() {
            by_line.entry(l.clone()).or_default().push(i);
        }
        let lines: Vec<Line> = by_line.keys().cloned().collect();
        let src: Vec<Vec<usize>> = by_line.values().cloned().collect();
        let m = lines.len();

        // Vertices.
        let xs: Vec<Scalar>;
        let mut verts: Vec<Point> = Vec::new();
        let mut verts_per_line = vec![0usize; m];
        {
            let mut on_line: Vec<Vec<Point>> = vec![Vec::new(); m];
            for i in 0..m {
                for j in i + 1..m {
                    if let Some(p) = lines[i].intersect(&lines[j]) {
                        on_line[i].push(p.clone());
                        on_line[j].push(p.clone());
                        verts.push(p);
                    }
                }
            }
            verts.sort();
            verts.dedup();
            for i in 0..m {
                on_line[i].sort();
                on_line[i].dedup();
                verts_per_line[i] = on_line[i].len();
            }
            let mut vx: Vec<Scalar> = verts.iter().map(|p| p.x.clone()).collect();
            vx.dedup(); // verts sorted lexicographically, so vx is sorted
            xs = vx;
        }
        let n_vertices = verts.len();
        let slab_x = xs;
        let n_slabs = slab_x.len() + 1;

        // Initial order in the leftmost slab.
        let x0 = sample_x(&slab_x, 0);
        let mut order: Vec<u32> = (0..m as u32).collect();
        order.sort_by(|&a, &b| lines[a as usize].y_at(&x0).cmp(&lines[b as usize].y_at(&x0)));

        let mut orders: Vec<Vec<u32>> = Vec::with_capacity(n_slabs);
        orders.push(order.clone());
        for v in 0..slab_x.len() {
            let xv = &slab_x[v];
            // Reverse each run of lines meeting at x = xv.
            let ys: Vec<Scalar> = order.iter().map(|&i| lines[i as usize].y_at(xv)).collect();
            let mut i = 0;
            while i < m {
                let mut j = i + 1;
                while j < m && ys[j] == ys[i] {
                    j += 1;
                }
                order[i..j].reverse();
                i = j;
            }
            orders.push(order.clone());
        }

        // Glue slab gaps into faces.
        let mut uf = UnionFind::new(n_slabs * (m + 1));
        for v in 0..slab_x.len() {
            let xv = &slab_x[v];
            let left = &orders[v];
            for g in 0..=m {
                let open = g == 0
                    || g == m
                    || lines[left[g - 1] as usize].y_at(xv) < lines[left[g] as usize].y_at(xv);
                if open {
                    uf.union(v * (m + 1) + g, (v + 1) * (m + 1) + g);
                }
            }
        }

        let mut faces: Vec<FaceInfo> = Vec::new();
        let mut face_of = vec![vec![u32::MAX; m + 1]; n_slabs];
        let mut root_face: BTreeMap<usize, u32> = BTreeMap::new();
        for s in 0..n_slabs {
            for g in 0..=m {
                let root = uf.find(s * (m + 1) + g);
                let id = *root_face.entry(root).or_insert_with(|| {
                    let id = faces.len() as u32;
                    let below_weight =
                        orders[s][..g].iter().map(|&i| src[i as usize].len()).sum();
                    faces.push(FaceInfo { rep: (s, g), rep2: (s, g), below_weight });
                    id
                });
                faces[id as usize].rep2 = (s, g);
                face_of[s][g] = id;
            }
        }

        Ok(Arrangement {
            lines,
            src,
            slab_x,
            orders,
            faces,
            face_of,
            n_vertices,
            verts_per_line,
        })
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn src_ids(&self, line_idx: u32) -> &[usize] {
        &self.src[line_idx as usize]
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Edge count: each line is divided into (vertices on it + 1) edges.
    pub fn num_edges(&self) -> usize {
        self.verts_per_line.iter().map(|&v| v + 1).sum()
    }

    /// Euler relation on the one-point compactification:
    /// `(V + 1) - E + F = 2`.
    pub fn euler_ok(&self) -> bool {
        (self.n_vertices as i64 + 1) - self.num_edges() as i64 + self.num_faces() as i64 == 2
    }

    pub fn face(&self, id: u32) -> &FaceInfo {
        &self.faces[id as usize]
    }

    /// Indices of the lines strictly below the face, derived from the
    /// representative slab (no extra storage).
    pub fn face_below_ids(&self, id: u32) -> &[u32] {
        let (s, g) = self.faces[id as usize].rep;
        &self.orders[s][..g]
    }

    /// Interior witness point of a face.
    pub fn face_witness(&self, id: u32) -> Point {
        self.witness_at(self.faces[id as usize].rep)
    }

    /// A second witness from the face's last slab; equals the first when
    /// the face spans a single slab.
    pub fn face_witness2(&self, id: u32) -> Point {
        self.witness_at(self.faces[id as usize].rep2)
    }

    fn witness_at(&self, (s, g): (usize, usize)) -> Point {
        let x = sample_x(&self.slab_x, s);
        let order = &self.orders[s];
        let y = if order.is_empty() {
            int(0)
        } else if g == 0 {
            self.lines[order[0] as usize].y_at(&x) - int(1)
        } else if g == order.len() {
            self.lines[order[order.len() - 1] as usize].y_at(&x) + int(1)
        } else {
            let lo = self.lines[order[g - 1] as usize].y_at(&x);
            let hi = self.lines[order[g] as usize].y_at(&x);
            (lo + hi) / int(2)
        };
        Point::new(x, y)
    }

    /// Locates a point. Interior points cost O(log m) comparisons; points
    /// on edges or vertices additionally scan the incident gaps and are
    /// assigned the smallest incident face id.
    pub fn locate(&self, p: &Point) -> Located {
        let m = self.lines.len();
        // Which slab does p.x fall in?
        let idx = self.slab_x.partition_point(|x| *x < p.x);
        let on_boundary = idx < self.slab_x.len() && self.slab_x[idx] == p.x;
        if !on_boundary {
            let order = &self.orders[idx];
            // Binary search for p.y among line values at p.x.
            let g = order.partition_point(|&i| self.lines[i as usize].y_at(&p.x) < p.y);
            // Inside an open slab at most one line can match p.y exactly.
            if g < m && self.lines[order[g] as usize].y_at(&p.x) == p.y {
                let below = self.face_of[idx][g];
                let above = self.face_of[idx][g + 1];
                Located { face: below.min(above), on_lines: vec![order[g]] }
            } else {
                Located { face: self.face_of[idx][g], on_lines: Vec::new() }
            }
        } else {
            // On a slab boundary: collect incident faces from both
            // adjacent slabs; a face is incident when its gap's closed
            // y-interval at this x contains p.y.
            let xv = &p.x;
            let mut best = u32::MAX;
            for s in [idx, idx + 1] {
                let order = &self.orders[s];
                let ys: Vec<Scalar> =
                    order.iter().map(|&i| self.lines[i as usize].y_at(xv)).collect();
                for g in 0..=m {
                    let lo_ok = g == 0 || ys[g - 1] <= p.y;
                    let hi_ok = g == m || ys[g] >= p.y;
                    if lo_ok && hi_ok {
                        best = best.min(self.face_of[s][g]);
                    }
                }
            }
            let on_lines: Vec<u32> = (0..m as u32)
                .filter(|&i| self.lines[i as usize].contains(p))
                .collect();
            if on_lines.is_empty() {
                // p.x is a vertex abscissa but p itself is interior.
                let order = &self.orders[idx];
                let g = order.partition_point(|&i| self.lines[i as usize].y_at(&p.x) < p.y);
                return Located { face: self.face_of[idx][g], on_lines };
            }
            Located { face: best, on_lines }
        }
    }

    /// Evaluates an annotation at every face witness. With `audit` set,
    /// re-evaluates at the independent second witness and panics on any
    /// mismatch (the annotation must be constant on each face).
    pub fn annotate<V: PartialEq + std::fmt::Debug>(
        &self,
        f: impl Fn(&Point) -> V,
        audit: bool,
    ) -> Vec<V> {
        (0..self.faces.len() as u32)
            .map(|id| {
                let v = f(&self.face_witness(id));
                if audit {
                    let v2 = f(&self.face_witness2(id));
                    assert!(
                        v == v2,
                        "annotation not face-constant on face {id}: {v:?} vs {v2:?}"
                    );
                }
                v
            })
            .collect()
    }

    /// Ids of faces whose interior lies inside the given cell.
    pub fn faces_inside(&self, cell: &SimplexCell) -> Vec<u32> {
        (0..self.faces.len() as u32)
            .filter(|&id| cell.contains(&self.face_witness(id)))
            .collect()
    }
}

fn sample_x(slab_x: &[Scalar], slab: usize) -> Scalar {
    if slab_x.is_empty() {
        int(0)
    } else if slab == 0 {
        &slab_x[0] - int(1)
    } else if slab == slab_x.len() {
        slab_x.last().unwrap() + int(1)
    } else {
        (&slab_x[slab - 1] + &slab_x[slab]) / int(2)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Deterministic: smaller root wins.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
