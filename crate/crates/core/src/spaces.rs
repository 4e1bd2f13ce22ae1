//! Degree-of-freedom maps for the four fields and the edge L² projections.
//!
//! Boundary constraints are realized by omission: `p̌` has no DOFs on Neumann
//! edges and `ǔ` has none on Dirichlet edges.

use alloc::vec::Vec;

use crate::mesh::{EdgeTag, Mesh2D, Point};
use crate::polybasis::{self, quad_edge, BasisError, BasisSet, EdgeBasis, Family};

/// Degree of a trace space; `None` is the trivial space `{0}`.
pub type TraceDegree = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FluxFamily {
    VectorPk,
    BrokenRT,
}

impl FluxFamily {
    pub fn family(self) -> Family {
        match self {
            FluxFamily::VectorPk => Family::VectorPk,
            FluxFamily::BrokenRT => Family::BrokenRT,
        }
    }

    /// Highest polynomial degree present in the family of nominal degree `k`.
    pub fn max_degree(self, k: usize) -> usize {
        match self {
            FluxFamily::VectorPk => k,
            FluxFamily::BrokenRT => k + 1,
        }
    }

    /// Degree of the normal trace on an edge.
    pub fn normal_trace_degree(self, k: usize) -> usize {
        k
    }
}

/// The four discrete spaces `Q_h × Q̌_h × V_h × V̌_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    pub q_family: FluxFamily,
    pub k_p: usize,
    pub k_pcheck: TraceDegree,
    pub k_u: usize,
    pub k_ucheck: TraceDegree,
}

impl SpaceSpec {
    pub fn new(q_family: FluxFamily, k_p: usize, k_pcheck: TraceDegree, k_u: usize, k_ucheck: TraceDegree) -> Self {
        SpaceSpec { q_family, k_p, k_pcheck, k_u, k_ucheck }
    }

    /// Highest polynomial degree appearing in any field.
    pub fn max_degree(&self) -> usize {
        self.q_family
            .max_degree(self.k_p)
            .max(self.k_u)
            .max(self.k_pcheck.unwrap_or(0))
            .max(self.k_ucheck.unwrap_or(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    P,
    Pcheck,
    U,
    Ucheck,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [FieldKind::P, FieldKind::Pcheck, FieldKind::U, FieldKind::Ucheck];

    pub fn is_edge_field(self) -> bool {
        matches!(self, FieldKind::Pcheck | FieldKind::Ucheck)
    }

    /// Whether this edge field carries DOFs on an edge of the given tag.
    pub fn active_on(self, tag: EdgeTag) -> bool {
        match self {
            FieldKind::Pcheck => tag != EdgeTag::Neumann,
            FieldKind::Ucheck => tag != EdgeTag::Dirichlet,
            FieldKind::P | FieldKind::U => false,
        }
    }
}

/// Contiguous per-entity DOF ranges for one field (entities are cells or edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    kind: FieldKind,
    offsets: Vec<usize>,
}

impl DofMap {
    fn from_counts(kind: FieldKind, counts: impl Iterator<Item = usize>) -> Self {
        let mut offsets = alloc::vec![0];
        for c in counts {
            let last = *offsets.last().unwrap();
            offsets.push(last + c);
        }
        DofMap { kind, offsets }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_entities(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn count(&self, entity: usize) -> usize {
        self.offsets[entity + 1] - self.offsets[entity]
    }

    pub fn offset(&self, entity: usize) -> usize {
        self.offsets[entity]
    }

    pub fn range(&self, entity: usize) -> core::ops::Range<usize> {
        self.offsets[entity]..self.offsets[entity + 1]
    }

    /// Entity owning a field-local DOF.
    pub fn entity_of(&self, dof: usize) -> usize {
        self.offsets.partition_point(|&o| o <= dof) - 1
    }
}

/// Global layout `[P | P̌ | U | Ǔ]` of the four-field vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub offsets: [usize; 5],
}

impl Layout {
    pub fn start(&self, f: FieldKind) -> usize {
        self.offsets[f as usize]
    }

    pub fn len(&self, f: FieldKind) -> usize {
        self.offsets[f as usize + 1] - self.offsets[f as usize]
    }

    pub fn range(&self, f: FieldKind) -> core::ops::Range<usize> {
        self.offsets[f as usize]..self.offsets[f as usize + 1]
    }

    pub fn total(&self) -> usize {
        self.offsets[4]
    }

    pub fn field_of(&self, i: usize) -> FieldKind {
        FieldKind::ALL.into_iter().find(|&f| self.range(f).contains(&i)).expect("index inside layout")
    }

    /// Size of the flux block `P ∪ P̌`.
    pub fn flux_len(&self) -> usize {
        self.offsets[2]
    }
}

/// Bases and DOF maps of the four fields on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Spaces {
    pub spec: SpaceSpec,
    pub u_basis: BasisSet,
    pub q_basis: BasisSet,
    pub u: DofMap,
    pub p: DofMap,
    pub ucheck: DofMap,
    pub pcheck: DofMap,
}

/// Builds the four DOF maps.
pub fn build_spaces(mesh: &Mesh2D, spec: SpaceSpec) -> Result<Spaces, BasisError> {
    let u_basis = polybasis::make_basis(Family::ScalarPk, spec.k_u)?;
    let q_basis = polybasis::make_basis(spec.q_family.family(), spec.k_p)?;
    let nc = mesh.num_cells();
    let u = DofMap::from_counts(FieldKind::U, (0..nc).map(|_| u_basis.dim()));
    let p = DofMap::from_counts(FieldKind::P, (0..nc).map(|_| q_basis.dim()));
    let edge_map = |kind: FieldKind, deg: TraceDegree| {
        DofMap::from_counts(
            kind,
            mesh.edges().iter().map(|e| match deg {
                Some(k) if kind.active_on(e.tag) => k + 1,
                _ => 0,
            }),
        )
    };
    Ok(Spaces {
        spec,
        ucheck: edge_map(FieldKind::Ucheck, spec.k_ucheck),
        pcheck: edge_map(FieldKind::Pcheck, spec.k_pcheck),
        u_basis,
        q_basis,
        u,
        p,
    })
}

impl Spaces {
    pub fn dofmap(&self, f: FieldKind) -> &DofMap {
        match f {
            FieldKind::P => &self.p,
            FieldKind::Pcheck => &self.pcheck,
            FieldKind::U => &self.u,
            FieldKind::Ucheck => &self.ucheck,
        }
    }

    pub fn layout(&self) -> Layout {
        let mut offsets = [0; 5];
        for (i, f) in FieldKind::ALL.into_iter().enumerate() {
            offsets[i + 1] = offsets[i] + self.dofmap(f).total();
        }
        Layout { offsets }
    }

    pub fn trace_degree(&self, f: FieldKind) -> TraceDegree {
        match f {
            FieldKind::Pcheck => self.spec.k_pcheck,
            FieldKind::Ucheck => self.spec.k_ucheck,
            _ => None,
        }
    }

    pub fn projector(&self, f: FieldKind) -> EdgeProjector {
        EdgeProjector { field: f, degree: self.trace_degree(f), map: self.dofmap(f).clone() }
    }

    /// Entity id of each global unknown: the cell for `p`, `u`, and
    /// `num_cells + edge` for `p̌`, `ǔ`. Used to order sparse factorizations.
    pub fn entity_groups(&self, globals: &[usize]) -> Vec<usize> {
        let lay = self.layout();
        let nc = self.u.num_entities();
        globals
            .iter()
            .map(|&g| {
                let f = lay.field_of(g);
                let e = self.dofmap(f).entity_of(g - lay.start(f));
                if f.is_edge_field() { nc + e } else { e }
            })
            .collect()
    }

    /// Quadrature exactness used for all forms: `2 max(k) + 3`.
    pub fn default_quad_degree(&self) -> usize {
        2 * self.spec.max_degree() + 3
    }
}

/// L² projection onto an edge space (`Q̌_h^p` or `Q̌_h^u`). With the
/// orthonormal edge basis the coefficients are plain moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProjector {
    pub field: FieldKind,
    pub degree: TraceDegree,
    pub map: DofMap,
}

impl EdgeProjector {
    /// Projects the edge-wise trace `f(edge, x)`; constrained edges get no coefficients.
    pub fn project<F>(&self, mesh: &Mesh2D, quad_degree: usize, f: F) -> Result<Vec<f64>, BasisError>
    where
        F: Fn(usize, Point) -> f64,
    {
        let mut out = alloc::vec![0.0; self.map.total()];
        let Some(k) = self.degree else {
            return Ok(out);
        };
        let rule = quad_edge(quad_degree.max(2 * k))?;
        let eb = EdgeBasis::new(k);
        let mut psi = alloc::vec![0.0; k + 1];
        for ei in 0..mesh.num_edges() {
            if self.map.count(ei) == 0 {
                continue;
            }
            let h = mesh.edge(ei).length;
            let off = self.map.offset(ei);
            for (s, w) in rule.points.iter().zip(&rule.weights) {
                eb.eval(*s, h, &mut psi);
                let val = f(ei, mesh.edge_point(ei, *s));
                for j in 0..=k {
                    out[off + j] += w * h * val * psi[j];
                }
            }
        }
        Ok(out)
    }

    /// Evaluates an edge-space function at parameter `s` on edge `e`.
    pub fn evaluate(&self, mesh: &Mesh2D, coeffs: &[f64], e: usize, s: f64) -> f64 {
        let Some(k) = self.degree else { return 0.0 };
        if self.map.count(e) == 0 {
            return 0.0;
        }
        let mut psi = alloc::vec![0.0; k + 1];
        EdgeBasis::new(k).eval(s, mesh.edge(e).length, &mut psi);
        let off = self.map.offset(e);
        (0..=k).map(|j| coeffs[off + j] * psi[j]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::neumann_right_top;

    fn spec(k: usize, kc: TraceDegree) -> SpaceSpec {
        SpaceSpec::new(FluxFamily::VectorPk, k, kc, k, kc)
    }

    #[test]
    fn counts_single_square() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        let s = build_spaces(&m, spec(0, Some(0))).unwrap();
        assert_eq!(s.u.total(), 2);
        assert_eq!(s.p.total(), 4);
        assert_eq!(s.ucheck.total(), 1);
        assert_eq!(s.pcheck.total(), 5);
        let s = build_spaces(&m, SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 0, Some(1))).unwrap();
        assert_eq!(s.ucheck.total(), 2);
        let s = build_spaces(&m, spec(0, None)).unwrap();
        assert_eq!(s.ucheck.total(), 0);
        assert_eq!(s.pcheck.total(), 0);
    }

    #[test]
    fn closed_form_counts() {
        let m = Mesh2D::structured_unit_square(3).unwrap().tag_boundary(neumann_right_top).unwrap();
        let ni = m.count_tag(EdgeTag::Interior);
        let nn = m.count_tag(EdgeTag::Neumann);
        let nd = m.count_tag(EdgeTag::Dirichlet);
        for k in 0..3 {
            let s = build_spaces(&m, SpaceSpec::new(FluxFamily::BrokenRT, k, Some(k), k + 1, Some(k))).unwrap();
            assert_eq!(s.u.total(), m.num_cells() * (k + 2) * (k + 3) / 2);
            assert_eq!(s.p.total(), m.num_cells() * (k + 1) * (k + 3));
            assert_eq!(s.ucheck.total(), (k + 1) * (ni + nn));
            assert_eq!(s.pcheck.total(), (k + 1) * (ni + nd));
            let l = s.layout();
            assert_eq!(l.total(), s.u.total() + s.p.total() + s.ucheck.total() + s.pcheck.total());
            for f in FieldKind::ALL {
                let d = s.dofmap(f);
                let sum: usize = (0..d.num_entities()).map(|e| d.count(e)).sum();
                assert_eq!(sum, d.total());
                assert_eq!(l.len(f), d.total());
            }
        }
    }

    #[test]
    fn entity_lookup() {
        let m = Mesh2D::structured_unit_square(2).unwrap();
        let s = build_spaces(&m, spec(1, Some(1))).unwrap();
        for e in 0..m.num_edges() {
            for d in s.pcheck.range(e) {
                assert_eq!(s.pcheck.entity_of(d), e);
            }
        }
    }

    #[test]
    fn projection_of_linear_trace_is_midpoint_mean() {
        let m = Mesh2D::structured_unit_square(2).unwrap();
        let s = build_spaces(&m, spec(0, Some(0))).unwrap();
        let pr = s.projector(FieldKind::Pcheck);
        let c = pr.project(&m, 3, |_, x| x[0]).unwrap();
        for e in 0..m.num_edges() {
            let v = pr.evaluate(&m, &c, e, 0.3);
            assert!((v - m.edge_midpoint(e)[0]).abs() < 1e-14);
        }
        let one = pr.project(&m, 1, |_, _| 1.0).unwrap();
        for e in 0..m.num_edges() {
            assert!((pr.evaluate(&m, &one, e, 0.8) - 1.0).abs() < 1e-14);
            assert!((one[s.pcheck.offset(e)] - m.edge(e).length.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_idempotent_and_constrained() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        let s = build_spaces(&m, spec(2, Some(2))).unwrap();
        let pr = s.projector(FieldKind::Pcheck);
        let c = pr.project(&m, 9, |_, x| (3.0 * x[0]).sin() + x[1].powi(5)).unwrap();
        let c2 = pr.project(&m, 9, |e, x| {
            // re-project the projected trace: recover s from the point
            let [a, b] = m.edge(e).vertices;
            let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            let s = ((x[0] - pa[0]) * (pb[0] - pa[0]) + (x[1] - pa[1]) * (pb[1] - pa[1])) / len2;
            pr.evaluate(&m, &c, e, s)
        })
        .unwrap();
        for (a, b) in c.iter().zip(&c2) {
            assert!((a - b).abs() < 1e-13);
        }
        // Q̌ has no DOFs on Neumann edges
        for (e, info) in m.edges().iter().enumerate() {
            if info.tag == EdgeTag::Neumann {
                assert_eq!(s.pcheck.count(e), 0);
                assert_eq!(pr.evaluate(&m, &c, e, 0.5), 0.0);
            }
        }
    }
}
