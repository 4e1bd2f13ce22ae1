//! Numerical checks of the space conditions under which the stability,
//! limit and hybridization results hold.
//!
//! Every inclusion is tested by an L² projection residual of the relevant
//! polynomials on a generic (non-symmetric) triangle and its edges. The
//! spaces are affine-invariant, so one cell is representative.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::mesh::Point;
use crate::polybasis::{make_basis, quad_edge, quad_triangle, AffineMap, BasisError, EdgeBasis, Family};
use crate::spaces::{FluxFamily, SpaceSpec};

/// Relative projection residual above which an inclusion counts as violated.
pub const INCLUSION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `Q̌_h` contains the piecewise constants.
    GradA,
    /// `∇_h V_h ⊂ Q_h`.
    GradB,
    /// `{∇_h V_h}_e ⊂ Q̌_h`.
    GradC,
    /// `Q_h ∩ H(div) × V_h` is a stable mixed pair.
    DivA,
    /// `div_h Q_h = V_h`.
    DivB,
    /// `{div_h Q_h} ⊂ V̌_h`.
    DivC,
    /// `Q_h·n_e|_E ⊂ V̌_h`.
    NormalTraceInUcheck,
    /// `Q_h·n_e|_E ⊂ Q̌_h`.
    NormalTraceInPcheck,
    /// `V_h|_E ⊂ V̌_h`.
    TraceInUcheck,
    /// `V_h|_E ⊂ Q̌_h`.
    TraceInPcheck,
    /// `{Q_h}_e ⊂ Q̌_h`.
    FluxAverageInPcheck,
    /// `{V_h} ⊂ V̌_h`.
    ScalarAverageInUcheck,
    /// `V_h = V_h^k` with `k ≥ 1`.
    ScalarDegreeAtLeastOne,
    /// `Q_h = Q_h^{k,RT}` or `Q_h^{k+1}` over `V_h^k`.
    MixedFluxFamily,
    /// `η τ = ¼` on every edge.
    EtaTauQuarter,
    /// `Q̌_h` and `V̌_h` have the same degree.
    EqualTraceDegrees,
}

impl Condition {
    pub fn describe(self) -> &'static str {
        match self {
            Condition::GradA => "Q̌_h contains piecewise constants",
            Condition::GradB => "∇_h V_h ⊂ Q_h",
            Condition::GradC => "{∇_h V_h}_e ⊂ Q̌_h",
            Condition::DivA => "(Q_h ∩ H(div)) × V_h is a stable mixed pair",
            Condition::DivB => "div_h Q_h = V_h",
            Condition::DivC => "{div_h Q_h} ⊂ V̌_h",
            Condition::NormalTraceInUcheck => "Q_h·n_e|_E ⊂ V̌_h",
            Condition::NormalTraceInPcheck => "Q_h·n_e|_E ⊂ Q̌_h",
            Condition::TraceInUcheck => "V_h|_E ⊂ V̌_h",
            Condition::TraceInPcheck => "V_h|_E ⊂ Q̌_h",
            Condition::FluxAverageInPcheck => "{Q_h}_e ⊂ Q̌_h",
            Condition::ScalarAverageInUcheck => "{V_h} ⊂ V̌_h",
            Condition::ScalarDegreeAtLeastOne => "V_h = V_h^k with k ≥ 1",
            Condition::MixedFluxFamily => "Q_h = Q_h^{k,RT} or Q_h^{k+1} with V_h = V_h^k",
            Condition::EtaTauQuarter => "η τ = 1/4",
            Condition::EqualTraceDegrees => "Q̌_h and V̌_h have equal degree",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("condition violated: {condition} (residual {residual:e})")]
    Violated { condition: Condition, residual: f64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Generic test cell; none of its edges is axis-aligned with another.
const CELL: [Point; 3] = [[0.1, 0.2], [1.3, 0.45], [0.4, 1.1]];

struct Sampled {
    /// `(weight, point)` on the cell.
    w: Vec<f64>,
    x: Vec<Point>,
}

fn cell_samples(degree: usize) -> Result<(AffineMap, Sampled), BasisError> {
    let map = AffineMap::from_triangle(&CELL)?;
    let q = quad_triangle(degree)?;
    let x = q.points.iter().map(|&p| map.to_physical(p)).collect();
    let w = q.weights.iter().map(|w| w * map.det).collect();
    Ok((map, Sampled { w, x }))
}

/// Relative residual of projecting each column of `f` (values at points)
/// onto the span of the columns of `basis`, both `npts × m`.
fn projection_residual(w: &[f64], basis: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
    let sw = DMatrix::from_fn(w.len(), 1, |i, _| w[i].sqrt());
    let b = DMatrix::from_fn(basis.nrows(), basis.ncols(), |i, j| basis[(i, j)] * sw[(i, 0)]);
    let g = DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] * sw[(i, 0)]);
    if b.ncols() == 0 {
        return if g.norm() > 0.0 { 1.0 } else { 0.0 };
    }
    // least squares via SVD is robust to a redundant spanning set
    let svd = b.clone().svd(true, true);
    // columns that vanish up to rounding carry no information
    let scale = (0..g.ncols()).map(|j| g.column(j).norm()).fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        let col = g.column(j).into_owned();
        let n = col.norm();
        if n <= 1e-12 * scale || n <= 1e-300 {
            continue;
        }
        let c = svd.solve(&col, 1e-12).expect("svd with u and v");
        let r = &col - &b * c;
        worst = worst.max(r.norm() / n);
    }
    worst
}

fn check(condition: Condition, residual: f64) -> Result<(), ConditionError> {
    if residual > INCLUSION_TOLERANCE {
        Err(ConditionError::Violated { condition, residual })
    } else {
        Ok(())
    }
}

fn violated(condition: Condition) -> ConditionError {
    ConditionError::Violated { condition, residual: 1.0 }
}

/// The two vector components of `Q_h` (or the scalar `V_h`) on the test cell.
fn flux_columns(spec: &SpaceSpec, s: &Sampled, map: &AffineMap) -> Result<[DMatrix<f64>; 2], BasisError> {
    let b = make_basis(spec.q_family.family(), spec.k_p)?;
    let t = b.eval_mapped(map, &s.x);
    let n = s.x.len();
    Ok([
        DMatrix::from_fn(n, t.dim, |p, i| t.vector(p, i)[0]),
        DMatrix::from_fn(n, t.dim, |p, i| t.vector(p, i)[1]),
    ])
}

/// `∇_h V_h ⊂ Q_h`.
pub fn check_grad_in_flux(spec: &SpaceSpec) -> Result<(), ConditionError> {
    let deg = 2 * spec.max_degree() + 2;
    let (map, s) = cell_samples(deg)?;
    let q = flux_columns(spec, &s, &map)?;
    let v = make_basis(Family::ScalarPk, spec.k_u)?.eval_mapped(&map, &s.x);
    let n = s.x.len();
    // stack components: a vector field is a column of length 2n
    let stack = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        DMatrix::from_fn(2 * n, a.ncols(), |r, j| if r < n { a[(r, j)] } else { b[(r - n, j)] })
    };
    let basis = stack(&q[0], &q[1]);
    let f = DMatrix::from_fn(2 * n, v.dim, |r, i| if r < n { v.grad(r, i)[0] } else { v.grad(r - n, i)[1] });
    let w2: Vec<f64> = s.w.iter().chain(&s.w).copied().collect();
    check(Condition::GradB, projection_residual(&w2, &basis, &f))
}

/// Samples of a function on each of the three edges of the test cell,
/// returned with the edge rule and the edge's outward normal.
struct EdgeSamples {
    s: Vec<f64>,
    w: Vec<f64>,
    edges: [(Point, Point, Point); 3],
}

fn edge_samples(degree: usize) -> Result<EdgeSamples, BasisError> {
    let r = quad_edge(degree)?;
    let mut edges = [([0.0; 2], [0.0; 2], [0.0; 2]); 3];
    for (i, e) in edges.iter_mut().enumerate() {
        let a = CELL[(i + 1) % 3];
        let b = CELL[(i + 2) % 3];
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        // counterclockwise cell: outward normal is the tangent turned clockwise
        *e = (a, b, [t[1] / len, -t[0] / len]);
    }
    Ok(EdgeSamples { s: r.points, w: r.weights, edges })
}

fn edge_point(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// Checks that traces `f(x, n)` (one column per function) on each edge lie in `P_k(e)`.
fn edge_inclusion<F>(k: Option<usize>, degree: usize, columns: usize, f: F) -> Result<f64, BasisError>
where
    F: Fn(Point, Point, &mut [f64]),
{
    let es = edge_samples(degree)?;
    let np = es.s.len();
    let (dim, eb) = match k {
        Some(k) => (k + 1, Some(EdgeBasis::new(k))),
        None => (0, None),
    };
    let mut psi = vec![0.0; dim];
    let mut basis = DMatrix::zeros(np, dim);
    for (p, &s) in es.s.iter().enumerate() {
        if let Some(eb) = &eb {
            eb.eval_reference(s, &mut psi);
            for j in 0..dim {
                basis[(p, j)] = psi[j];
            }
        }
    }
    let mut worst = 0.0f64;
    let mut vals = vec![0.0; columns];
    for &(a, b, n) in &es.edges {
        let mut fm = DMatrix::zeros(np, columns);
        for (p, &s) in es.s.iter().enumerate() {
            f(edge_point(a, b, s), n, &mut vals);
            for j in 0..columns {
                fm[(p, j)] = vals[j];
            }
        }
        worst = worst.max(projection_residual(&es.w, &basis, &fm));
    }
    Ok(worst)
}

fn scalar_traces(spec: &SpaceSpec, target: Option<usize>, condition: Condition, of_gradient: bool) -> Result<(), ConditionError> {
    let map = AffineMap::from_triangle(&CELL)?;
    let v = make_basis(Family::ScalarPk, spec.k_u)?;
    let deg = 2 * spec.max_degree() + 2;
    let r = edge_inclusion(target, deg, v.dim(), |x, n, out| {
        let t = v.eval_mapped(&map, &[x]);
        for i in 0..t.dim {
            out[i] = if of_gradient {
                let g = t.grad(0, i);
                g[0] * n[0] + g[1] * n[1]
            } else {
                t.value(0, i)
            };
        }
    })?;
    check(condition, r)
}

fn flux_normal_traces(spec: &SpaceSpec, target: Option<usize>, condition: Condition, of_divergence: bool) -> Result<(), ConditionError> {
    let map = AffineMap::from_triangle(&CELL)?;
    let q = make_basis(spec.q_family.family(), spec.k_p)?;
    let deg = 2 * spec.max_degree() + 2;
    let r = edge_inclusion(target, deg, q.dim(), |x, n, out| {
        let t = q.eval_mapped(&map, &[x]);
        for i in 0..t.dim {
            out[i] = if of_divergence {
                t.div(0, i)
            } else {
                let v = t.vector(0, i);
                v[0] * n[0] + v[1] * n[1]
            };
        }
    })?;
    check(condition, r)
}

/// `Q̌_h ⊇ P_0`.
pub fn check_pcheck_has_constants(spec: &SpaceSpec) -> Result<(), ConditionError> {
    match spec.k_pcheck {
        Some(_) => Ok(()),
        None => Err(violated(Condition::GradA)),
    }
}

/// `{∇_h V_h}_e ⊂ Q̌_h`; each side's normal derivative must lie in `Q̌_h`.
pub fn check_grad_trace_in_pcheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    scalar_traces(spec, spec.k_pcheck, Condition::GradC, true)
}

/// `V_h|_E ⊂ V̌_h`.
pub fn check_trace_in_ucheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    scalar_traces(spec, spec.k_ucheck, Condition::TraceInUcheck, false)
}

/// `V_h|_E ⊂ Q̌_h`.
pub fn check_trace_in_pcheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    scalar_traces(spec, spec.k_pcheck, Condition::TraceInPcheck, false)
}

/// `{V_h} ⊂ V̌_h`.
pub fn check_average_in_ucheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    scalar_traces(spec, spec.k_ucheck, Condition::ScalarAverageInUcheck, false)
}

/// `Q_h·n_e ⊂ V̌_h`.
pub fn check_normal_trace_in_ucheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    flux_normal_traces(spec, spec.k_ucheck, Condition::NormalTraceInUcheck, false)
}

/// `Q_h·n_e ⊂ Q̌_h`.
pub fn check_normal_trace_in_pcheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    flux_normal_traces(spec, spec.k_pcheck, Condition::NormalTraceInPcheck, false)
}

/// `{Q_h}_e ⊂ Q̌_h`.
pub fn check_flux_average_in_pcheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    flux_normal_traces(spec, spec.k_pcheck, Condition::FluxAverageInPcheck, false)
}

/// `{div_h Q_h} ⊂ V̌_h`.
pub fn check_div_trace_in_ucheck(spec: &SpaceSpec) -> Result<(), ConditionError> {
    flux_normal_traces(spec, spec.k_ucheck, Condition::DivC, true)
}

/// `div_h Q_h = V_h`: `div Q ⊂ V` by projection and `V ⊂ div Q` by rank.
pub fn check_div_onto(spec: &SpaceSpec) -> Result<(), ConditionError> {
    let deg = 2 * spec.max_degree() + 2;
    let (map, s) = cell_samples(deg)?;
    let q = make_basis(spec.q_family.family(), spec.k_p)?.eval_mapped(&map, &s.x);
    let v = make_basis(Family::ScalarPk, spec.k_u)?.eval_mapped(&map, &s.x);
    let n = s.x.len();
    let vb = DMatrix::from_fn(n, v.dim, |p, i| v.value(p, i));
    let divs = DMatrix::from_fn(n, q.dim, |p, i| q.div(p, i));
    check(Condition::DivB, projection_residual(&s.w, &vb, &divs))?;
    // V ⊂ div Q: the span of the divergences has full dimension dim V
    let sw: Vec<f64> = s.w.iter().map(|w| w.sqrt()).collect();
    let d = DMatrix::from_fn(n, q.dim, |p, i| divs[(p, i)] * sw[p]);
    let sv = d.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&x| x > 1e-10 * smax.max(1e-300)).count();
    if rank < v.dim {
        return Err(ConditionError::Violated { condition: Condition::DivB, residual: (v.dim - rank) as f64 });
    }
    Ok(())
}

/// Stable mixed pair: `Q_h ∩ H(div)` is `RT_k` or `BDM_{k+1}` over `V_h = P_k`.
/// Structural check on the family and degrees.
pub fn check_stable_mixed_pair(spec: &SpaceSpec) -> Result<(), ConditionError> {
    let ok = match spec.q_family {
        FluxFamily::BrokenRT => spec.k_p == spec.k_u,
        FluxFamily::VectorPk => spec.k_p == spec.k_u + 1,
    };
    if ok {
        Ok(())
    } else {
        Err(violated(Condition::DivA))
    }
}

/// Conditions (a)–(c) of the gradient-based theorem.
pub fn check_grad_regime(spec: &SpaceSpec) -> Result<(), ConditionError> {
    check_pcheck_has_constants(spec)?;
    check_grad_in_flux(spec)?;
    check_grad_trace_in_pcheck(spec)
}

/// Conditions (a)–(c) of the divergence-based theorem.
pub fn check_div_regime(spec: &SpaceSpec) -> Result<(), ConditionError> {
    check_stable_mixed_pair(spec)?;
    check_div_onto(spec)?;
    check_div_trace_in_ucheck(spec)
}

/// Conditions of the `ρ → 0` limit to the conforming primal method.
///
/// Beyond `∇_h V_h ⊂ Q_h`, `{Q_h}_e ⊂ Q̌_h` and `k ≥ 1`, the full jumps of
/// `V_h` must lie in `Q̌_h`: the penalty only drives `Q̌^p[u_h]` to zero, so
/// with a smaller `Q̌_h` the limit is a nonconforming method.
pub fn check_primal_limit(spec: &SpaceSpec) -> Result<(), ConditionError> {
    check_grad_in_flux(spec)?;
    check_flux_average_in_pcheck(spec)?;
    if spec.k_u < 1 {
        return Err(violated(Condition::ScalarDegreeAtLeastOne));
    }
    check_trace_in_pcheck(spec)
}

/// Conditions of the `ρ → 0` limit to the conforming mixed method.
///
/// As for the primal limit, the full normal jumps `Q_h·n_e` must lie in
/// `V̌_h` for the limit flux to be `H(div)`-conforming.
pub fn check_mixed_limit(spec: &SpaceSpec) -> Result<(), ConditionError> {
    check_div_onto(spec)?;
    check_average_in_ucheck(spec)?;
    check_stable_mixed_pair(spec).map_err(|_| violated(Condition::MixedFluxFamily))?;
    check_normal_trace_in_ucheck(spec)
}

/// `η τ = ¼`, required by the `û` hybridization and the WG-MFEM form.
pub fn check_eta_tau_quarter(product: Option<f64>) -> Result<(), ConditionError> {
    match product {
        Some(p) if (p - 0.25).abs() <= 1e-12 => Ok(()),
        Some(p) => Err(ConditionError::Violated { condition: Condition::EtaTauQuarter, residual: (p - 0.25).abs() }),
        None => Err(violated(Condition::EtaTauQuarter)),
    }
}

/// Conditions for hybridizing onto `û = Q̌^u{u} + ǔ`.
pub fn check_hybridizable(spec: &SpaceSpec, eta_tau: Option<f64>) -> Result<(), ConditionError> {
    check_normal_trace_in_ucheck(spec)?;
    if spec.k_pcheck.is_some() && spec.k_pcheck != spec.k_ucheck {
        return Err(violated(Condition::EqualTraceDegrees));
    }
    check_eta_tau_quarter(eta_tau)
}

/// Conditions for the WG-MFEM `(p, p̂, u)` form.
pub fn check_wg_phat(spec: &SpaceSpec) -> Result<(), ConditionError> {
    check_normal_trace_in_pcheck(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(f: FluxFamily, kp: usize, kpc: Option<usize>, ku: usize, kuc: Option<usize>) -> SpaceSpec {
        SpaceSpec::new(f, kp, kpc, ku, kuc)
    }

    #[test]
    fn grad_conditions() {
        for k in 0..3 {
            assert!(check_grad_regime(&spec(FluxFamily::VectorPk, k, Some(k), k + 1, Some(k))).is_ok());
        }
        // ∇V² ⊄ Q⁰
        let e = check_grad_in_flux(&spec(FluxFamily::VectorPk, 0, Some(0), 2, None)).unwrap_err();
        assert!(matches!(e, ConditionError::Violated { condition: Condition::GradB, .. }));
        // {∇V²}_e ⊄ Q̌⁰
        let e = check_grad_trace_in_pcheck(&spec(FluxFamily::VectorPk, 1, Some(0), 2, None)).unwrap_err();
        assert!(matches!(e, ConditionError::Violated { condition: Condition::GradC, .. }));
        assert!(check_pcheck_has_constants(&spec(FluxFamily::VectorPk, 0, None, 1, None)).is_err());
    }

    #[test]
    fn div_conditions() {
        for k in 0..3 {
            assert!(check_div_regime(&spec(FluxFamily::BrokenRT, k, Some(k), k, Some(k))).is_ok(), "rt{k}");
            assert!(check_div_regime(&spec(FluxFamily::VectorPk, k + 1, None, k, Some(k))).is_ok(), "p{k}");
        }
        // div Q⁰ = {0} ≠ V⁰
        let e = check_div_onto(&spec(FluxFamily::VectorPk, 0, None, 0, Some(0))).unwrap_err();
        assert!(matches!(e, ConditionError::Violated { condition: Condition::DivB, .. }));
        assert!(check_div_trace_in_ucheck(&spec(FluxFamily::BrokenRT, 1, None, 1, None)).is_err());
    }

    #[test]
    fn hybridization_conditions() {
        let rt = spec(FluxFamily::BrokenRT, 0, Some(0), 0, Some(0));
        assert!(check_hybridizable(&rt, Some(0.25)).is_ok());
        assert!(check_hybridizable(&rt, Some(1.0)).is_err());
        // RT_k normal traces are P_k
        assert!(check_normal_trace_in_ucheck(&spec(FluxFamily::BrokenRT, 2, None, 2, Some(2))).is_ok());
        assert!(check_normal_trace_in_ucheck(&spec(FluxFamily::VectorPk, 1, None, 1, Some(0))).is_err());
        assert!(check_trace_in_ucheck(&spec(FluxFamily::VectorPk, 0, Some(0), 1, Some(0))).is_err());
    }

    #[test]
    fn limit_conditions() {
        assert!(check_primal_limit(&spec(FluxFamily::VectorPk, 0, Some(1), 1, Some(1))).is_ok());
        assert!(check_primal_limit(&spec(FluxFamily::VectorPk, 0, Some(0), 0, Some(0))).is_err());
        // mean jumps only: the limit would be nonconforming
        assert!(matches!(
            check_primal_limit(&spec(FluxFamily::VectorPk, 0, Some(0), 1, Some(0))),
            Err(ConditionError::Violated { condition: Condition::TraceInPcheck, .. })
        ));
        assert!(check_mixed_limit(&spec(FluxFamily::VectorPk, 1, None, 0, Some(0))).is_err());
        assert!(check_mixed_limit(&spec(FluxFamily::VectorPk, 1, None, 0, Some(1))).is_ok());
        assert!(check_mixed_limit(&spec(FluxFamily::BrokenRT, 0, Some(0), 0, Some(0))).is_ok());
        assert!(check_mixed_limit(&spec(FluxFamily::BrokenRT, 0, Some(0), 0, None)).is_err());
    }
}
