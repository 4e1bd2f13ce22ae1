//! Conforming triangulations of the unit square and its affine images.
//!
//! Edges are stored globally; every cell keeps a cross-reference to its three
//! edges (local edge `i` is opposite local vertex `i`). Interior edges carry a
//! fixed unit normal that points out of the plus cell, which is always the
//! lower-indexed neighbour. Boundary normals point out of the domain.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("structured mesh needs n >= 1")]
    EmptyGrid,
    #[error("cell {0} is degenerate (signed area {1:e})")]
    DegenerateCell(usize, f64),
    #[error("vertex index {index} out of range in cell {cell}")]
    BadVertex { cell: usize, index: usize },
    #[error("edge ({0}, {1}) is shared by more than two cells")]
    NonManifoldEdge(usize, usize),
    #[error("boundary tagging leaves no Dirichlet edge")]
    NoDirichletEdge,
}

/// Boundary condition kind for a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl EdgeTag {
    pub fn is_boundary(self) -> bool {
        self != EdgeTag::Interior
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Interior => "interior",
            EdgeTag::Dirichlet => "dirichlet",
            EdgeTag::Neumann => "neumann",
        }
    }
}

/// One side of an edge: the adjacent cell and the local index of the edge in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSide {
    pub cell: usize,
    pub local: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfo {
    /// Endpoint vertex indices, lower index first. Edge quadrature runs from
    /// `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    pub plus: EdgeSide,
    pub minus: Option<EdgeSide>,
    /// Unit normal: out of the plus cell on interior edges, out of the domain
    /// on boundary edges.
    pub normal: Point,
    pub length: f64,
    pub tag: EdgeTag,
}

impl EdgeInfo {
    pub fn is_interior(&self) -> bool {
        self.minus.is_some()
    }

    /// Adjacent sides, plus side first.
    pub fn sides(&self) -> impl Iterator<Item = EdgeSide> + '_ {
        core::iter::once(self.plus).chain(self.minus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    edges: Vec<EdgeInfo>,
    cell_edges: Vec<[usize; 3]>,
    cell_diameters: Vec<f64>,
    cell_areas: Vec<f64>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh2D {
    /// Builds a mesh from raw triangles. Clockwise triangles are reoriented;
    /// every boundary edge starts out Dirichlet.
    pub fn from_triangles(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut cells = cells;
        for (ci, c) in cells.iter_mut().enumerate() {
            for &v in c.iter() {
                if v >= vertices.len() {
                    return Err(MeshError::BadVertex { cell: ci, index: v });
                }
            }
            let area = signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
            let scale = dist(vertices[c[0]], vertices[c[1]])
                .max(dist(vertices[c[1]], vertices[c[2]]))
                .max(dist(vertices[c[2]], vertices[c[0]]));
            if area.abs() <= 1e-14 * scale * scale {
                return Err(MeshError::DegenerateCell(ci, area));
            }
            if area < 0.0 {
                c.swap(1, 2);
            }
        }

        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<EdgeInfo> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (ci, c) in cells.iter().enumerate() {
            let mut local_edges = [0usize; 3];
            for (li, slot) in local_edges.iter_mut().enumerate() {
                let a = c[(li + 1) % 3];
                let b = c[(li + 2) % 3];
                let key = edge_key(a, b);
                let side = EdgeSide { cell: ci, local: li };
                match lookup.get(&key) {
                    Some(&ei) => {
                        let e = &mut edges[ei];
                        if e.minus.is_some() {
                            return Err(MeshError::NonManifoldEdge(key.0, key.1));
                        }
                        // Cells are visited in increasing order, so the first
                        // visitor is the lower index and stays the plus side.
                        e.minus = Some(side);
                        e.tag = EdgeTag::Interior;
                        *slot = ei;
                    }
                    None => {
                        let pa = vertices[a];
                        let pb = vertices[b];
                        let len = dist(pa, pb);
                        // CCW cell: outward normal is the edge direction rotated clockwise.
                        let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                        lookup.insert(key, edges.len());
                        *slot = edges.len();
                        edges.push(EdgeInfo {
                            vertices: [key.0, key.1],
                            plus: side,
                            minus: None,
                            normal,
                            length: len,
                            tag: EdgeTag::Dirichlet,
                        });
                    }
                }
            }
            cell_edges.push(local_edges);
        }

        let cell_diameters = cells
            .iter()
            .map(|c| {
                let [a, b, d] = [vertices[c[0]], vertices[c[1]], vertices[c[2]]];
                dist(a, b).max(dist(b, d)).max(dist(d, a))
            })
            .collect();
        let cell_areas = cells
            .iter()
            .map(|c| signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]))
            .collect();

        Ok(Mesh2D {
            vertices,
            cells,
            edges,
            cell_edges,
            cell_diameters,
            cell_areas,
        })
    }

    /// `n x n` grid on the unit square, each square split along the diagonal
    /// from its lower-left to its upper-right corner. All boundary edges are
    /// Dirichlet.
    pub fn structured_unit_square(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::EmptyGrid);
        }
        let nv = n + 1;
        let mut vertices = Vec::with_capacity(nv * nv);
        for j in 0..nv {
            for i in 0..nv {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * nv + i;
                let v10 = v00 + 1;
                let v01 = v00 + nv;
                let v11 = v01 + 1;
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }
        Self::from_triangles(vertices, cells)
    }

    /// The reference triangle (0,0), (1,0), (0,1) as a one-cell mesh.
    pub fn reference_triangle() -> Self {
        Self::from_triangles(alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], alloc::vec![[0, 1, 2]])
            .expect("reference triangle is valid")
    }

    /// Midpoint refinement: every cell is split into four congruent children.
    /// Boundary tags are inherited from the parent edges.
    pub fn refine_uniform(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoint = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let a = self.vertices[e.vertices[0]];
            let b = self.vertices[e.vertices[1]];
            midpoint.push(vertices.len());
            vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (ci, c) in self.cells.iter().enumerate() {
            let ce = self.cell_edges[ci];
            // local edge i is opposite vertex i
            let m12 = midpoint[ce[0]];
            let m20 = midpoint[ce[1]];
            let m01 = midpoint[ce[2]];
            cells.push([c[0], m01, m20]);
            cells.push([m01, c[1], m12]);
            cells.push([m20, m12, c[2]]);
            cells.push([m01, m12, m20]);
        }
        let mut mesh = Self::from_triangles(vertices, cells).expect("refinement of a valid mesh is valid");
        let mut tag_of: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
        for (ei, e) in self.edges.iter().enumerate() {
            if e.tag.is_boundary() {
                let m = midpoint[ei];
                tag_of.insert(edge_key(e.vertices[0], m), e.tag);
                tag_of.insert(edge_key(m, e.vertices[1]), e.tag);
            }
        }
        for e in mesh.edges.iter_mut() {
            if let Some(&t) = tag_of.get(&(e.vertices[0], e.vertices[1])) {
                e.tag = t;
            }
        }
        mesh
    }

    /// Retags boundary edges by their midpoint. At least one Dirichlet edge must remain.
    pub fn tag_boundary<F>(&self, predicate: F) -> Result<Self, MeshError>
    where
        F: Fn(Point) -> BoundaryKind,
    {
        let mut mesh = self.clone();
        let mut any_dirichlet = false;
        for e in mesh.edges.iter_mut() {
            if !e.tag.is_boundary() {
                continue;
            }
            let a = self.vertices[e.vertices[0]];
            let b = self.vertices[e.vertices[1]];
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            e.tag = match predicate(mid) {
                BoundaryKind::Dirichlet => {
                    any_dirichlet = true;
                    EdgeTag::Dirichlet
                }
                BoundaryKind::Neumann => EdgeTag::Neumann,
            };
        }
        if !any_dirichlet {
            return Err(MeshError::NoDirichletEdge);
        }
        Ok(mesh)
    }

    /// Image of the mesh under `x -> A x + b`, boundary tags preserved.
    pub fn map_affine(&self, a: [[f64; 2]; 2], b: Point) -> Result<Self, MeshError> {
        let vertices = self
            .vertices
            .iter()
            .map(|p| {
                [
                    a[0][0] * p[0] + a[0][1] * p[1] + b[0],
                    a[1][0] * p[0] + a[1][1] * p[1] + b[1],
                ]
            })
            .collect();
        let mut mesh = Self::from_triangles(vertices, self.cells.clone())?;
        let tags: BTreeMap<(usize, usize), EdgeTag> =
            self.edges.iter().map(|e| ((e.vertices[0], e.vertices[1]), e.tag)).collect();
        for e in mesh.edges.iter_mut() {
            if let Some(&t) = tags.get(&(e.vertices[0], e.vertices[1])) {
                if t.is_boundary() {
                    e.tag = t;
                }
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[EdgeInfo] {
        &self.edges
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> &EdgeInfo {
        &self.edges[e]
    }

    /// Global edge indices of a cell's local edges.
    pub fn cell_edges(&self, cell: usize) -> [usize; 3] {
        self.cell_edges[cell]
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        let c = self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_diameter(&self, cell: usize) -> f64 {
        self.cell_diameters[cell]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        self.cell_areas[cell]
    }

    pub fn cell_diameters(&self) -> &[f64] {
        &self.cell_diameters
    }

    /// Mesh size `h = max h_K`.
    pub fn max_h(&self) -> f64 {
        self.cell_diameters.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.cell_areas.iter().sum()
    }

    /// Outward unit normal of `cell` on its local edge `local`.
    pub fn outward_normal(&self, cell: usize, local: usize) -> Point {
        let e = &self.edges[self.cell_edges[cell][local]];
        if e.plus.cell == cell {
            e.normal
        } else {
            [-e.normal[0], -e.normal[1]]
        }
    }

    /// `n_K . n_e` for the edge at `local` in `cell` (either +1 or -1).
    pub fn orientation(&self, cell: usize, local: usize) -> f64 {
        let e = &self.edges[self.cell_edges[cell][local]];
        if e.plus.cell == cell {
            1.0
        } else {
            -1.0
        }
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Point on edge `e` at parameter `s` in [0, 1], measured from `vertices[0]`.
    pub fn edge_point(&self, e: usize, s: f64) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
    }

    pub fn count_tag(&self, tag: EdgeTag) -> usize {
        self.edges.iter().filter(|e| e.tag == tag).count()
    }

    /// Smallest interior angle over all cells, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::MAX;
        for c in 0..self.num_cells() {
            let p = self.cell_vertices(c);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let d = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [d[0] - a[0], d[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(a, b) * dist(a, d));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    /// Plain-text dump: `v x y`, `c i j k` and `e i j tag` lines.
    pub fn write_dump<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e}", v[0], v[1])?;
        }
        for c in &self.cells {
            writeln!(w, "c {} {} {}", c[0], c[1], c[2])?;
        }
        for e in &self.edges {
            writeln!(w, "e {} {} {}", e.vertices[0], e.vertices[1], e.tag.as_str())?;
        }
        Ok(())
    }
}

/// Tags the `x = 1` and `y = 1` sides of the unit square Neumann, the rest Dirichlet.
pub fn neumann_right_top(p: Point) -> BoundaryKind {
    if (p[0] - 1.0).abs() < 1e-12 || (p[1] - 1.0).abs() < 1e-12 {
        BoundaryKind::Neumann
    } else {
        BoundaryKind::Dirichlet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.num_cells(), 2);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.count_tag(EdgeTag::Dirichlet), 4);

        let m = Mesh2D::structured_unit_square(2).unwrap();
        assert_eq!(m.vertices().len(), 9);
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.num_edges(), 16);

        for n in 1..6 {
            let m = Mesh2D::structured_unit_square(n).unwrap();
            assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
        }
    }

    #[test]
    fn zero_grid_rejected() {
        assert_eq!(Mesh2D::structured_unit_square(0), Err(MeshError::EmptyGrid));
    }

    #[test]
    fn area_is_one() {
        let m = Mesh2D::structured_unit_square(4).unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cells_are_ccw_and_incidence_consistent() {
        let m = Mesh2D::structured_unit_square(3).unwrap().refine_uniform();
        for c in 0..m.num_cells() {
            assert!(m.cell_area(c) > 0.0);
            for l in 0..3 {
                let e = m.edge(m.cell_edges(c)[l]);
                let side = e.sides().find(|s| s.cell == c).unwrap();
                assert_eq!(side.local, l);
            }
        }
        for (ei, e) in m.edges().iter().enumerate() {
            let n = e.normal;
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-14);
            let [a, b] = e.vertices;
            assert!((dist(m.vertices()[a], m.vertices()[b]) - e.length).abs() < 1e-15);
            // normal points out of the plus cell: away from its opposite vertex
            let opp = m.cells()[e.plus.cell][e.plus.local];
            let mid = m.edge_midpoint(ei);
            let p = m.vertices()[opp];
            assert!((mid[0] - p[0]) * n[0] + (mid[1] - p[1]) * n[1] > 0.0);
            if let Some(minus) = e.minus {
                assert!(e.plus.cell < minus.cell);
                assert_eq!(e.tag, EdgeTag::Interior);
                let on = m.outward_normal(minus.cell, minus.local);
                assert!((on[0] + n[0]).abs() < 1e-15 && (on[1] + n[1]).abs() < 1e-15);
            } else {
                assert!(e.tag.is_boundary());
            }
        }
    }

    #[test]
    fn refinement_halves_h_and_keeps_angles() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.num_cells(), 8);
        assert_eq!(r.max_h(), 0.5 * m.max_h());
        assert!((r.total_area() - 1.0).abs() < 1e-14);
        assert!((r.min_angle() - m.min_angle()).abs() < 1e-14);
        let rr = r.refine_uniform();
        assert_eq!(rr.num_cells(), 32);
        // refining the structured n=1 mesh twice gives the same counts as n=4
        let s4 = Mesh2D::structured_unit_square(4).unwrap();
        assert_eq!(rr.num_edges(), s4.num_edges());
    }

    #[test]
    fn refinement_inherits_tags() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.count_tag(EdgeTag::Neumann), 2 * m.count_tag(EdgeTag::Neumann));
        assert_eq!(r.count_tag(EdgeTag::Dirichlet), 2 * m.count_tag(EdgeTag::Dirichlet));
        for (ei, e) in r.edges().iter().enumerate() {
            if e.tag == EdgeTag::Neumann {
                let mid = r.edge_midpoint(ei);
                assert_eq!(neumann_right_top(mid), BoundaryKind::Neumann);
            }
        }
    }

    #[test]
    fn tagging() {
        let m = Mesh2D::structured_unit_square(2).unwrap();
        let d = m.tag_boundary(|_| BoundaryKind::Dirichlet).unwrap();
        assert_eq!(d.count_tag(EdgeTag::Dirichlet), 8);
        let mixed = m.tag_boundary(neumann_right_top).unwrap();
        assert_eq!(mixed.count_tag(EdgeTag::Neumann), 4);
        assert_eq!(mixed.count_tag(EdgeTag::Dirichlet), 4);
        assert_eq!(mixed.count_tag(EdgeTag::Interior), m.count_tag(EdgeTag::Interior));
        assert_eq!(m.tag_boundary(|_| BoundaryKind::Neumann), Err(MeshError::NoDirichletEdge));
    }

    #[test]
    fn perimeter_bounds_diameter() {
        let m = Mesh2D::structured_unit_square(3).unwrap();
        for c in 0..m.num_cells() {
            let per: f64 = m.cell_edges(c).iter().map(|&e| m.edge(e).length).sum();
            assert!(per >= m.cell_diameter(c));
        }
    }

    #[test]
    fn affine_image_and_reorientation() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        // reflection flips orientation; cells must come back CCW
        let r = m.map_affine([[-2.0, 0.0], [0.0, 1.0]], [3.0, 0.0]).unwrap();
        assert!((r.total_area() - 2.0).abs() < 1e-13);
        assert_eq!(r.count_tag(EdgeTag::Neumann), 4);
        assert!((0..r.num_cells()).all(|c| r.cell_area(c) > 0.0));
    }

    #[test]
    fn degenerate_and_nonmanifold() {
        let v = alloc::vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            Mesh2D::from_triangles(v, alloc::vec![[0, 1, 2]]),
            Err(MeshError::DegenerateCell(0, _))
        ));
        let v = alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [-1.0, 0.5]];
        let cells = alloc::vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
        assert!(matches!(Mesh2D::from_triangles(v, cells), Err(MeshError::NonManifoldEdge(0, 1))));
    }

    #[test]
    fn dump_format() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        let mut s = alloc::string::String::new();
        m.write_dump(&mut s).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 4 + 2 + 5);
        assert!(lines[4].starts_with("c 0 1 3"));
        assert!(lines.iter().filter(|l| l.starts_with("e ")).all(|l| l.split(' ').count() == 4));
    }
}
