//! Penalized finite cell systems for Poisson and plane linear elasticity on
//! multi-level hp meshes.
//!
//! Element integrals are evaluated on leaf cells. At a point of a leaf the
//! global basis is the union of the functions of the leaf and all its
//! ancestors, each evaluated in its own cell's reference coordinates.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::basis::modes_1d_into;
use crate::immersed::{BoundaryKind, BoundaryQuadrature, ImplicitDomain, VolumePoint};
use crate::mesh::{DofMap, HpMesh, Rect};
use crate::quadrature::GaussRule;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Result};

/// A vector-valued field on the plane (scalar fields use component 0).
pub type Field<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneModel {
    PlaneStress,
    PlaneStrain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physics {
    Poisson { kappa: f64 },
    Elasticity2d { young: f64, poisson: f64, model: PlaneModel },
}

impl Physics {
    pub fn n_fields(&self) -> usize {
        match self {
            Physics::Poisson { .. } => 1,
            Physics::Elasticity2d { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Physics::Poisson { kappa } if !(kappa > 0.0) => Err(Error::InvalidParameter("kappa must be positive")),
            Physics::Elasticity2d { young, .. } if !(young > 0.0) => {
                Err(Error::InvalidParameter("elastic modulus must be positive"))
            }
            Physics::Elasticity2d { poisson, .. } if !(0.0..0.5).contains(&poisson) => {
                Err(Error::InvalidParameter("Poisson ratio must lie in [0, 0.5)"))
            }
            _ => Ok(()),
        }
    }

    /// Material matrix in Voigt notation `(xx, yy, xy)`.
    pub fn elasticity_matrix(&self) -> [[f64; 3]; 3] {
        match *self {
            Physics::Poisson { .. } => [[0.0; 3]; 3],
            Physics::Elasticity2d { young: e, poisson: nu, model } => match model {
                PlaneModel::PlaneStress => {
                    let f = e / (1.0 - nu * nu);
                    [[f, f * nu, 0.0], [f * nu, f, 0.0], [0.0, 0.0, f * 0.5 * (1.0 - nu)]]
                }
                PlaneModel::PlaneStrain => {
                    let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                    [[f * (1.0 - nu), f * nu, 0.0], [f * nu, f * (1.0 - nu), 0.0], [0.0, 0.0, f * 0.5 * (1.0 - 2.0 * nu)]]
                }
            },
        }
    }
}

/// Boundary data, matched to curves by their [`BoundaryKind`].
#[derive(Clone, Copy)]
pub enum BoundaryCondition<'a> {
    DirichletPenalty { g: Field<'a>, beta: f64 },
    Neumann { g: Field<'a> },
}

impl core::fmt::Debug for BoundaryCondition<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BoundaryCondition::DirichletPenalty { beta, .. } => write!(f, "DirichletPenalty {{ beta: {beta} }}"),
            BoundaryCondition::Neumann { .. } => f.write_str("Neumann"),
        }
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Depth of the integration quadtree on cut leaves.
    pub depth: usize,
    /// Gauss points per direction; `None` means `p + 1`.
    pub points: Option<usize>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { depth: 4, points: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Evaluates all global functions that are non-zero on one leaf cell.
#[derive(Debug, Clone)]
pub struct LeafBasis {
    p: usize,
    /// `(cell bounds, function, a, b)` for the leaf and its ancestors.
    entries: Vec<(usize, u32, u8, u8)>,
    rects: Vec<Rect>,
    functions: Vec<u32>,
    vals: Vec<f64>,
    ders: Vec<f64>,
    scratch: Vec<f64>,
}

impl LeafBasis {
    pub fn new(mesh: &HpMesh, dofmap: &DofMap, base: usize, node: usize) -> Self {
        let tree = mesh.tree(base);
        let mut entries = Vec::new();
        let mut rects = Vec::new();
        for (level, n) in tree.ancestry(node).into_iter().enumerate() {
            let cell = tree.nodes[n].cell;
            rects.push(mesh.cell_bounds(cell));
            for lf in dofmap.cell_functions(cell) {
                entries.push((level, lf.function, lf.a, lf.b));
            }
        }
        let functions = entries.iter().map(|e| e.1).collect();
        let p = dofmap.p;
        let levels = rects.len();
        Self {
            p,
            entries,
            rects,
            functions,
            vals: alloc::vec![0.0; 2 * levels * (p + 1)],
            ders: alloc::vec![0.0; 2 * levels * (p + 1)],
            scratch: alloc::vec![0.0; p + 1],
        }
    }

    /// Global function indices, in the order of evaluated values.
    pub fn functions(&self) -> &[u32] {
        &self.functions
    }

    pub fn leaf_bounds(&self) -> Rect {
        *self.rects.last().unwrap()
    }

    /// Values and physical gradients of every function at global point `x`.
    pub fn eval(&mut self, x: [f64; 2], values: &mut Vec<f64>, gradients: &mut Vec<[f64; 2]>) {
        let n1 = self.p + 1;
        for (l, r) in self.rects.iter().enumerate() {
            let xi = r.local(x);
            for d in 0..2 {
                let off = (2 * l + d) * n1;
                let c = xi[d].clamp(-1.0, 1.0);
                modes_1d_into(self.p, c, &mut self.vals[off..off + n1], &mut self.ders[off..off + n1], &mut self.scratch);
            }
        }
        values.clear();
        gradients.clear();
        for &(l, _, a, b) in &self.entries {
            let r = &self.rects[l];
            let (sx, sy) = (2.0 / r.width(), 2.0 / r.height());
            let ox = 2 * l * n1;
            let oy = (2 * l + 1) * n1;
            let (va, da) = (self.vals[ox + a as usize], self.ders[ox + a as usize]);
            let (vb, db) = (self.vals[oy + b as usize], self.ders[oy + b as usize]);
            values.push(va * vb);
            gradients.push([da * vb * sx, va * db * sy]);
        }
    }
}

fn gauss_points(dofmap: &DofMap, q: &QuadratureConfig) -> usize {
    q.points.unwrap_or(dofmap.p + 1)
}

/// Volume quadrature on a leaf cell.
pub fn leaf_points(domain: &ImplicitDomain, rect: &Rect, rule: &GaussRule, q: &QuadratureConfig) -> Vec<VolumePoint> {
    domain.volume_points(rect, q.depth, rule)
}

/// Assembles `A` and `b` of the penalized weak form.
///
/// `source` is the volume load; `bcs` pairs each curve kind with its data.
pub fn assemble(
    mesh: &HpMesh,
    dofmap: &DofMap,
    domain: &ImplicitDomain,
    physics: &Physics,
    source: Option<Field<'_>>,
    bcs: &[(BoundaryKind, BoundaryCondition<'_>)],
    q: &QuadratureConfig,
) -> Result<LinearSystem> {
    physics.validate()?;
    let nf = physics.n_fields();
    if dofmap.n_fields != nf {
        return Err(Error::DimensionMismatch { expected: nf, found: dofmap.n_fields });
    }
    let n = dofmap.len();
    let rule = GaussRule::new(gauss_points(dofmap, q));
    let cmat = physics.elasticity_matrix();
    let mut trip = TripletBuilder::new(n, n);
    let mut rhs = alloc::vec![0.0; n];
    let (mut vals, mut grads) = (Vec::new(), Vec::new());
    let mut ke = Vec::new();

    for (base, node) in mesh.leaves() {
        let mut lb = LeafBasis::new(mesh, dofmap, base, node);
        let nl = lb.functions().len();
        let m = nl * nf;
        ke.clear();
        ke.resize(m * m, 0.0);
        let mut fe = alloc::vec![0.0; m];
        let rect = lb.leaf_bounds();
        let pts = leaf_points(domain, &rect, &rule, q);
        if pts.is_empty() {
            return Err(Error::EmptyQuadrature { element: base });
        }
        for vp in &pts {
            lb.eval(vp.x, &mut vals, &mut grads);
            let w = vp.weight * vp.alpha;
            match *physics {
                Physics::Poisson { kappa } => {
                    let wk = w * kappa;
                    for i in 0..nl {
                        let gi = grads[i];
                        let row = &mut ke[i * m..(i + 1) * m];
                        for j in 0..nl {
                            row[j] += wk * (gi[0] * grads[j][0] + gi[1] * grads[j][1]);
                        }
                    }
                }
                Physics::Elasticity2d { .. } => {
                    let c = &cmat;
                    for i in 0..nl {
                        let [xi, yi] = grads[i];
                        for j in 0..nl {
                            let [xj, yj] = grads[j];
                            let k00 = c[0][0] * xi * xj + c[2][2] * yi * yj;
                            let k01 = c[0][1] * xi * yj + c[2][2] * yi * xj;
                            let k10 = c[1][0] * yi * xj + c[2][2] * xi * yj;
                            let k11 = c[1][1] * yi * yj + c[2][2] * xi * xj;
                            ke[(2 * i) * m + 2 * j] += w * k00;
                            ke[(2 * i) * m + 2 * j + 1] += w * k01;
                            ke[(2 * i + 1) * m + 2 * j] += w * k10;
                            ke[(2 * i + 1) * m + 2 * j + 1] += w * k11;
                        }
                    }
                }
            }
            if let Some(s) = source {
                let sv = s(vp.x);
                for i in 0..nl {
                    for c in 0..nf {
                        fe[i * nf + c] += w * vals[i] * sv[c];
                    }
                }
            }
        }
        scatter(&mut trip, &mut rhs, dofmap, lb.functions(), nf, &ke, &fe);
    }

    for &(kind, bc) in bcs {
        let quad = domain.boundary_rule(&mesh.grid, kind, gauss_points(dofmap, q))?;
        if quad.is_empty() && matches!(bc, BoundaryCondition::DirichletPenalty { .. }) {
            return Err(Error::MissingDirichletQuadrature);
        }
        boundary_terms(mesh, dofmap, &quad, bc, nf, &mut trip, &mut rhs)?;
    }
    Ok(LinearSystem { matrix: trip.into_csr(), rhs })
}

fn scatter(trip: &mut TripletBuilder, rhs: &mut [f64], dofmap: &DofMap, funcs: &[u32], nf: usize, ke: &[f64], fe: &[f64]) {
    let m = funcs.len() * nf;
    for (i, &fi) in funcs.iter().enumerate() {
        for ci in 0..nf {
            let gi = dofmap.dof(fi, ci);
            let li = i * nf + ci;
            rhs[gi] += fe[li];
            for (j, &fj) in funcs.iter().enumerate() {
                for cj in 0..nf {
                    let v = ke[li * m + j * nf + cj];
                    if v != 0.0 {
                        trip.push(gi, dofmap.dof(fj, cj), v);
                    }
                }
            }
        }
    }
}

fn boundary_terms(
    mesh: &HpMesh,
    dofmap: &DofMap,
    quad: &BoundaryQuadrature,
    bc: BoundaryCondition<'_>,
    nf: usize,
    trip: &mut TripletBuilder,
    rhs: &mut [f64],
) -> Result<()> {
    let (mut vals, mut grads) = (Vec::new(), Vec::new());
    // Points are emitted piece by piece; consecutive points share a leaf.
    let mut cache: Option<((usize, usize), LeafBasis)> = None;
    for bp in &quad.points {
        if !mesh.is_included(bp.element) {
            return Err(Error::EmptyQuadrature { element: bp.element });
        }
        let node = mesh.locate_leaf(bp.element, bp.x);
        let key = (bp.element, node);
        if cache.as_ref().map(|c| c.0) != Some(key) {
            cache = Some((key, LeafBasis::new(mesh, dofmap, bp.element, node)));
        }
        let lb = &mut cache.as_mut().unwrap().1;
        lb.eval(bp.x, &mut vals, &mut grads);
        let funcs = lb.functions();
        match bc {
            BoundaryCondition::DirichletPenalty { g, beta } => {
                let gv = g(bp.x);
                let w = beta * bp.weight;
                for (i, &fi) in funcs.iter().enumerate() {
                    if vals[i] == 0.0 {
                        continue;
                    }
                    for c in 0..nf {
                        let gi = dofmap.dof(fi, c);
                        rhs[gi] += w * vals[i] * gv[c];
                        for (j, &fj) in funcs.iter().enumerate() {
                            if vals[j] != 0.0 {
                                trip.push(gi, dofmap.dof(fj, c), w * vals[i] * vals[j]);
                            }
                        }
                    }
                }
            }
            BoundaryCondition::Neumann { g } => {
                let gv = g(bp.x);
                for (i, &fi) in funcs.iter().enumerate() {
                    for c in 0..nf {
                        rhs[dofmap.dof(fi, c)] += bp.weight * vals[i] * gv[c];
                    }
                }
            }
        }
    }
    Ok(())
}

/// Value and gradient of every component of a discrete field at `x`.
pub fn evaluate(mesh: &HpMesh, dofmap: &DofMap, u: &[f64], x: [f64; 2]) -> Option<([f64; 2], [[f64; 2]; 2])> {
    let base = mesh.grid.locate(x)?;
    if !mesh.is_included(base) {
        return None;
    }
    let node = mesh.locate_leaf(base, x);
    let mut lb = LeafBasis::new(mesh, dofmap, base, node);
    let (mut vals, mut grads) = (Vec::new(), Vec::new());
    lb.eval(x, &mut vals, &mut grads);
    Some(combine(dofmap, lb.functions(), &vals, &grads, u))
}

fn combine(dofmap: &DofMap, funcs: &[u32], vals: &[f64], grads: &[[f64; 2]], u: &[f64]) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut v = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for (i, &f) in funcs.iter().enumerate() {
        for c in 0..dofmap.n_fields {
            let ui = u[dofmap.dof(f, c)];
            v[c] += ui * vals[i];
            g[c][0] += ui * grads[i][0];
            g[c][1] += ui * grads[i][1];
        }
    }
    (v, g)
}

/// Energy norm of the error over the physical domain.
///
/// `exact_grad` returns `[d/dx, d/dy]` per component.
pub fn energy_error(
    mesh: &HpMesh,
    dofmap: &DofMap,
    domain: &ImplicitDomain,
    physics: &Physics,
    u: &[f64],
    exact_grad: &dyn Fn([f64; 2]) -> [[f64; 2]; 2],
    q: &QuadratureConfig,
) -> f64 {
    let rule = GaussRule::new(gauss_points(dofmap, q) + 1);
    let cmat = physics.elasticity_matrix();
    let (mut vals, mut grads) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    for (base, node) in mesh.leaves() {
        let mut lb = LeafBasis::new(mesh, dofmap, base, node);
        let rect = lb.leaf_bounds();
        for vp in leaf_points(domain, &rect, &rule, q) {
            if vp.alpha != 1.0 {
                continue;
            }
            lb.eval(vp.x, &mut vals, &mut grads);
            let (_, gh) = combine(dofmap, lb.functions(), &vals, &grads, u);
            let ge = exact_grad(vp.x);
            let e = [[gh[0][0] - ge[0][0], gh[0][1] - ge[0][1]], [gh[1][0] - ge[1][0], gh[1][1] - ge[1][1]]];
            let density = match *physics {
                Physics::Poisson { kappa } => kappa * (e[0][0] * e[0][0] + e[0][1] * e[0][1]),
                Physics::Elasticity2d { .. } => {
                    let eps = [e[0][0], e[1][1], e[0][1] + e[1][0]];
                    let mut s = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            s += eps[a] * cmat[a][b] * eps[b];
                        }
                    }
                    s
                }
            };
            total += vp.weight * density;
        }
    }
    libm::sqrt(total)
}

/// Manufactured Poisson solution on a square rotated by `angle` about `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedPoisson {
    pub angle: f64,
    pub center: [f64; 2],
    pub kappa: f64,
}

/// Wave number of the manufactured solution.
pub const MANUFACTURED_A: f64 = 1.5 * PI;

impl ManufacturedPoisson {
    pub fn new(angle: f64, center: [f64; 2], kappa: f64) -> Self {
        Self { angle, center, kappa }
    }

    fn rotated(&self, x: [f64; 2]) -> [f64; 2] {
        let (s, c) = libm::sincos(self.angle);
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn exact(&self, x: [f64; 2]) -> f64 {
        let a = MANUFACTURED_A;
        let [xr, yr] = self.rotated(x);
        libm::cos(a * xr) * libm::sin(a * yr) / (2.0 * self.kappa * a * a)
    }

    /// Gradient in global coordinates.
    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let a = MANUFACTURED_A;
        let [xr, yr] = self.rotated(x);
        let f = 1.0 / (2.0 * self.kappa * a);
        let gx = -libm::sin(a * xr) * libm::sin(a * yr) * f;
        let gy = libm::cos(a * xr) * libm::cos(a * yr) * f;
        let (s, c) = libm::sincos(self.angle);
        [c * gx - s * gy, s * gx + c * gy]
    }

    /// Source `s` with `-kappa laplace(u) = s`.
    pub fn source(&self, x: [f64; 2]) -> f64 {
        let a = MANUFACTURED_A;
        let [xr, yr] = self.rotated(x);
        libm::cos(a * xr) * libm::sin(a * yr)
    }
}
