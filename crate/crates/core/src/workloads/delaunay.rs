//! Incremental 2D Delaunay triangulation (Bowyer-Watson with conflict lists).
//!
//! Every live triangle keeps the list of unprocessed points strictly inside
//! its circumcircle ("encroaching" points). Inserting a point removes exactly
//! the triangles it encroaches and fans the cavity boundary to the new point.
//! The candidates for a new triangle's list are the points of the removed and
//! the outer triangle on the same boundary edge.
//!
//! A point is processable when, for each triangle it encroaches, no smaller
//! unprocessed label encroaches that triangle or one of its edge neighbours.
//! The normative dependency relation is built by replaying insertion in label
//! order: `i` is an ancestor of `j > i` when, right before `i` is inserted,
//! `j` encroaches a triangle of `i`'s cavity or an edge neighbour of one.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{in_circumcircle, orient, Point};
use crate::incremental::{DependencyOracle, Label, Workload, WorkloadError};

/// Side of the integer grid input points are drawn from.
pub const GRID_SIDE: i64 = 1 << 30;

const NIL: u32 = u32::MAX;
const NO_LABEL: Label = Label::MAX;

/// Vertices of the enclosing triangle, at four times the grid extent.
pub const SUPER_TRIANGLE: [Point; 3] = [
    Point::new(-4 * GRID_SIDE, -4 * GRID_SIDE),
    Point::new(4 * GRID_SIDE, -4 * GRID_SIDE),
    Point::new(0, 4 * GRID_SIDE),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Vertex {
    Super(u8),
    Input(Label),
}

impl Vertex {
    fn from_vid(vid: u32) -> Self {
        if vid < 3 {
            Vertex::Super(vid as u8)
        } else {
            Vertex::Input(vid - 2)
        }
    }
}

fn vid_of(label: Label) -> u32 {
    label + 2
}

#[derive(Clone, Debug)]
struct Tri {
    v: [u32; 3],
    /// `nbr[i]` is across the edge opposite `v[i]`.
    nbr: [u32; 3],
    alive: bool,
    enc: Vec<Label>,
    min_enc: Label,
}

/// Triangulation of the super triangle plus the inserted points.
#[derive(Clone, Debug)]
pub struct Mesh {
    coords: Vec<Point>,
    tris: Vec<Tri>,
    /// Triangles each unprocessed point encroaches; may hold dead entries.
    point_tris: Vec<Vec<u32>>,
    inserted: Vec<bool>,
    tri_mark: Vec<u32>,
    point_mark: Vec<u32>,
    cand_mark: Vec<u32>,
    cand_epoch: u32,
    first_of: Vec<u32>,
    second_of: Vec<u32>,
    epoch: u32,
}

impl Mesh {
    /// `points[l - 1]` is the point of label `l`; all must lie in the grid.
    pub fn new(points: &[Point]) -> Self {
        let n = points.len();
        let mut coords = Vec::with_capacity(n + 3);
        coords.extend_from_slice(&SUPER_TRIANGLE);
        coords.extend_from_slice(points);
        let all: Vec<Label> = (1..=n as Label).collect();
        let root = Tri {
            v: [0, 1, 2],
            nbr: [NIL; 3],
            alive: true,
            min_enc: all.first().copied().unwrap_or(NO_LABEL),
            enc: all,
        };
        let mut point_tris = vec![Vec::new(); n + 1];
        for list in point_tris.iter_mut().skip(1) {
            list.push(0);
        }
        Self {
            coords,
            tris: vec![root],
            point_tris,
            inserted: vec![false; n + 1],
            tri_mark: vec![0],
            point_mark: vec![0; n + 1],
            cand_mark: vec![0; n + 1],
            cand_epoch: 0,
            first_of: vec![NIL; n + 3],
            second_of: vec![NIL; n + 3],
            epoch: 0,
        }
    }

    pub fn is_inserted(&self, label: Label) -> bool {
        self.inserted[label as usize]
    }

    fn live_encroached(&self, label: Label) -> impl Iterator<Item = u32> + '_ {
        self.point_tris[label as usize]
            .iter()
            .copied()
            .filter(move |&t| self.tris[t as usize].alive)
    }

    /// Minimality rule over encroached triangles and their edge neighbours.
    pub fn is_locally_minimal(&self, label: Label) -> bool {
        if self.is_inserted(label) {
            return false;
        }
        for t in self.live_encroached(label) {
            let tri = &self.tris[t as usize];
            if tri.min_enc < label {
                return false;
            }
            for &nb in &tri.nbr {
                if nb != NIL && self.tris[nb as usize].min_enc < label {
                    return false;
                }
            }
        }
        true
    }

    /// Unprocessed points (other than `label`) encroaching the cavity of
    /// `label` or an edge neighbour of a cavity triangle.
    pub fn conflict_neighbours(&mut self, label: Label) -> Vec<Label> {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut out = Vec::new();
        let cavity: Vec<u32> = self.live_encroached(label).collect();
        for t in cavity {
            let tri = &self.tris[t as usize];
            let region = core::iter::once(t).chain(tri.nbr.iter().copied().filter(|&x| x != NIL));
            for r in region {
                for &q in &self.tris[r as usize].enc {
                    if q != label && self.point_mark[q as usize] != epoch {
                        self.point_mark[q as usize] = epoch;
                        out.push(q);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Inserts a point; returns the ids of the new triangles.
    pub fn insert(&mut self, label: Label) -> Vec<u32> {
        self.epoch += 1;
        let epoch = self.epoch;
        let p = label as usize;
        let pv = vid_of(label);

        let cavity: Vec<u32> = self.live_encroached(label).collect();
        for &t in &cavity {
            self.tri_mark[t as usize] = epoch;
        }

        // boundary edges (a, b) in counter-clockwise order of the removed triangle
        let mut boundary: Vec<(u32, u32, u32, usize)> = Vec::new();
        let mut old_enc: Vec<Vec<Label>> = Vec::with_capacity(cavity.len());
        for (ci, &t) in cavity.iter().enumerate() {
            let tri = &mut self.tris[t as usize];
            tri.alive = false;
            for i in 0..3 {
                let nb = tri.nbr[i];
                if nb == NIL || self.tri_mark[nb as usize] != epoch {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, ci));
                }
            }
            old_enc.push(core::mem::take(&mut tri.enc));
        }

        let base = self.tris.len() as u32;
        for (idx, &(a, b, outer, ci)) in boundary.iter().enumerate() {
            let id = base + idx as u32;
            debug_assert!(
                orient(self.coords[a as usize], self.coords[b as usize], self.coords[pv as usize]) > 0
            );
            if outer != NIL {
                let old = cavity[ci];
                for slot in self.tris[outer as usize].nbr.iter_mut() {
                    if *slot == old {
                        *slot = id;
                    }
                }
            }
            self.first_of[a as usize] = id;
            self.second_of[b as usize] = id;
            self.tris.push(Tri {
                v: [a, b, pv],
                nbr: [NIL, NIL, outer],
                alive: true,
                enc: Vec::new(),
                min_enc: NO_LABEL,
            });
            self.tri_mark.push(0);
        }
        for idx in 0..boundary.len() {
            let id = base as usize + idx;
            let [a, b, _] = self.tris[id].v;
            self.tris[id].nbr[0] = self.first_of[b as usize];
            self.tris[id].nbr[1] = self.second_of[a as usize];
        }

        // drop dead entries from the lists of every point that lost a triangle
        for list in &old_enc {
            for &q in list {
                if q as usize != p && self.point_mark[q as usize] != epoch {
                    self.point_mark[q as usize] = epoch;
                    let tris = &self.tris;
                    self.point_tris[q as usize].retain(|&t| tris[t as usize].alive);
                }
            }
        }

        // a point inside the circle of a new triangle lies inside the circle
        // of the removed triangle or of the outer triangle on the same edge
        for (idx, &(a, b, outer, ci)) in boundary.iter().enumerate() {
            let id = base + idx as u32;
            let (pa, pb, pp) = (
                self.coords[a as usize],
                self.coords[b as usize],
                self.coords[pv as usize],
            );
            self.cand_epoch += 1;
            let ce = self.cand_epoch;
            let outer_enc: &[Label] = if outer == NIL {
                &[]
            } else {
                &self.tris[outer as usize].enc
            };
            let mut enc = Vec::new();
            for &q in old_enc[ci].iter().chain(outer_enc) {
                if q != label
                    && self.cand_mark[q as usize] != ce
                    && in_circumcircle(pa, pb, pp, self.coords[vid_of(q) as usize])
                {
                    self.cand_mark[q as usize] = ce;
                    enc.push(q);
                }
            }
            for &q in &enc {
                self.point_tris[q as usize].push(id);
            }
            let tri = &mut self.tris[id as usize];
            tri.min_enc = enc.iter().copied().min().unwrap_or(NO_LABEL);
            tri.enc = enc;
        }

        self.point_tris[p].clear();
        self.inserted[p] = true;
        (base..base + boundary.len() as u32).collect()
    }

    pub fn triangle(&self, id: u32) -> [Vertex; 3] {
        self.tris[id as usize].v.map(Vertex::from_vid)
    }

    pub fn live_triangles(&self) -> impl Iterator<Item = [Vertex; 3]> + '_ {
        self.tris
            .iter()
            .filter(|t| t.alive)
            .map(|t| t.v.map(Vertex::from_vid))
    }

    pub fn coords(&self, v: Vertex) -> Point {
        match v {
            Vertex::Super(i) => self.coords[i as usize],
            Vertex::Input(l) => self.coords[vid_of(l) as usize],
        }
    }

    /// Live triangles whose vertices are all input points, as sorted label
    /// triples in sorted order.
    pub fn input_triangles(&self) -> Vec<[Label; 3]> {
        let mut out: Vec<[Label; 3]> = self
            .tris
            .iter()
            .filter(|t| t.alive && t.v.iter().all(|&v| v >= 3))
            .map(|t| {
                let mut l = t.v.map(|v| v - 2);
                l.sort_unstable();
                l
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Brute force: live triangles with an inserted vertex strictly inside
    /// their circumcircle.
    pub fn delaunay_violations(&self) -> usize {
        let vertices: Vec<Point> = (0..self.coords.len() as u32)
            .filter(|&v| v < 3 || self.inserted[(v - 2) as usize])
            .map(|v| self.coords[v as usize])
            .collect();
        self.tris
            .iter()
            .filter(|t| t.alive)
            .filter(|t| {
                let [a, b, c] = t.v.map(|v| self.coords[v as usize]);
                vertices.iter().any(|&d| in_circumcircle(a, b, c, d))
            })
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelaunayInstance {
    points: Vec<Point>,
    oracle: DependencyOracle,
}

impl DelaunayInstance {
    /// `n` distinct grid points; drawing order is the label order.
    pub fn generate(n: usize, seed: u64) -> Result<Self, WorkloadError> {
        let capacity = (GRID_SIDE as u128) * (GRID_SIDE as u128);
        if n == 0 {
            return Err(WorkloadError::InvalidInstance("n must be at least 1"));
        }
        if n as u128 > capacity {
            return Err(WorkloadError::InvalidInstance("n exceeds grid capacity"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = BTreeSet::new();
        let mut points = Vec::with_capacity(n);
        while points.len() < n {
            let p = Point::new(rng.random_range(0..GRID_SIDE), rng.random_range(0..GRID_SIDE));
            if seen.insert(p) {
                points.push(p);
            }
        }
        Self::from_points_by_label(points)
    }

    /// `points[l - 1]` becomes the point of label `l`.
    pub fn from_points_by_label(points: Vec<Point>) -> Result<Self, WorkloadError> {
        if points.is_empty() {
            return Err(WorkloadError::InvalidInstance("n must be at least 1"));
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if !(0..GRID_SIDE).contains(&p.x) || !(0..GRID_SIDE).contains(&p.y) {
                return Err(WorkloadError::InvalidInstance("point outside the grid"));
            }
            if !seen.insert(*p) {
                return Err(WorkloadError::InvalidInstance("duplicate point"));
            }
        }
        let n = points.len();
        let mut lists = vec![Vec::new(); n];
        let mut mesh = Mesh::new(&points);
        for i in 1..=n as Label {
            for q in mesh.conflict_neighbours(i) {
                lists[q as usize - 1].push(i);
            }
            mesh.insert(i);
        }
        Ok(Self {
            points,
            oracle: DependencyOracle::from_lists(lists)?,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, label: Label) -> Point {
        self.points[label as usize - 1]
    }

    pub fn points_by_label(&self) -> &[Point] {
        &self.points
    }

    pub fn oracle(&self) -> &DependencyOracle {
        &self.oracle
    }

    pub fn workload(&self) -> DelaunayWorkload<'_> {
        DelaunayWorkload {
            instance: self,
            mesh: Mesh::new(&self.points),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DelaunayWorkload<'a> {
    instance: &'a DelaunayInstance,
    mesh: Mesh,
}

impl DelaunayWorkload<'_> {
    pub fn delaunay_check(&self, label: Label) -> bool {
        self.mesh.is_locally_minimal(label)
    }

    /// Inserts the point; returns the triangles created.
    pub fn delaunay_process(&mut self, label: Label) -> Result<Vec<[Vertex; 3]>, WorkloadError> {
        if self.mesh.is_inserted(label) {
            return Err(WorkloadError::AlreadyProcessed(label));
        }
        if !self.delaunay_check(label) {
            return Err(WorkloadError::NotReady(label));
        }
        let ids = self.mesh.insert(label);
        Ok(ids.into_iter().map(|t| self.mesh.triangle(t)).collect())
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }
}

impl Workload for DelaunayWorkload<'_> {
    fn task_count(&self) -> usize {
        self.instance.len()
    }

    fn check_dependencies(&self, label: Label) -> bool {
        self.delaunay_check(label)
    }

    fn process(&mut self, label: Label) -> Result<(), WorkloadError> {
        self.delaunay_process(label).map(|_| ())
    }

    fn oracle(&self) -> &DependencyOracle {
        &self.instance.oracle
    }
}
