//! Implicit physical domains embedded in the background grid: point
//! classification, cut-cell quadrature by recursive bisection, and
//! quadrature on analytic boundary curves.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::mesh::{BaseGrid, Rect};
use crate::quadrature::GaussRule;
use crate::{Error, Result};

/// Relative tolerance (in units of the cell size) for "on the boundary".
const ON_BOUNDARY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Material region before holes are cut out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Square of side `side` centred at `center`, rotated counter-clockwise by `angle` radians.
    RotatedSquare { center: [f64; 2], side: f64, angle: f64 },
    Rectangle(Rect),
}

impl Shape {
    fn level_set(&self, x: [f64; 2]) -> f64 {
        match *self {
            Shape::RotatedSquare { center, side, angle } => {
                let (s, c) = libm::sincos(angle);
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let xr = c * dx + s * dy;
                let yr = -s * dx + c * dy;
                xr.abs().max(yr.abs()) - 0.5 * side
            }
            Shape::Rectangle(r) => {
                let c = r.center();
                ((x[0] - c[0]).abs() - 0.5 * r.width()).max((x[1] - c[1]).abs() - 0.5 * r.height())
            }
        }
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        match *self {
            Shape::RotatedSquare { center, side, angle } => {
                let (s, c) = libm::sincos(angle);
                let hs = 0.5 * side;
                let local = [[-hs, -hs], [hs, -hs], [hs, hs], [-hs, hs]];
                local.map(|[u, v]| [center[0] + c * u - s * v, center[1] + s * u + c * v])
            }
            Shape::Rectangle(r) => [r.min, [r.max[0], r.min[1]], r.max, [r.min[0], r.max[1]]],
        }
    }
}

/// How a boundary curve enters the weak form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Prescribed field, imposed by penalty.
    Dirichlet,
    /// Prescribed flux or traction.
    Neumann,
    /// Homogeneous natural boundary; contributes nothing.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    /// Straight segment; the material lies to the left of `a -> b`.
    Segment { a: [f64; 2], b: [f64; 2] },
    /// Full circle bounding a hole; the outward normal points to the centre.
    Hole(Circle),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurve {
    pub curve: Curve,
    pub kind: BoundaryKind,
}

impl BoundaryCurve {
    pub fn length(&self) -> f64 {
        match self.curve {
            Curve::Segment { a, b } => libm::hypot(b[0] - a[0], b[1] - a[1]),
            Curve::Hole(c) => 2.0 * PI * c.radius,
        }
    }
}

/// Material shape minus circular holes, with an indicator value for the
/// fictitious part.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitDomain {
    pub shape: Shape,
    pub holes: Vec<Circle>,
    pub curves: Vec<BoundaryCurve>,
    pub alpha_fict: f64,
}

/// Classification of a cell against the physical domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Inside,
    Outside,
    Cut,
}

/// A leaf of the integration quadtree of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCell {
    pub bounds: Rect,
    pub class: CellClass,
    pub depth: u8,
}

/// A volume quadrature point with its indicator value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumePoint {
    pub x: [f64; 2],
    pub weight: f64,
    pub alpha: f64,
}

/// A boundary quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: [f64; 2],
    pub weight: f64,
    pub normal: [f64; 2],
    pub curve: usize,
    /// Base element the point is assigned to.
    pub element: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryQuadrature {
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryQuadrature {
    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl ImplicitDomain {
    /// Rotated square with all four edges of kind `kind`.
    pub fn rotated_square(center: [f64; 2], side: f64, angle: f64, kind: BoundaryKind, alpha_fict: f64) -> Result<Self> {
        let shape = Shape::RotatedSquare { center, side, angle };
        Self::polygon(shape, [kind; 4], alpha_fict)
    }

    /// Axis-aligned rectangle; `kinds` are given bottom, right, top, left.
    pub fn rectangle(rect: Rect, kinds: [BoundaryKind; 4], alpha_fict: f64) -> Result<Self> {
        Self::polygon(Shape::Rectangle(rect), kinds, alpha_fict)
    }

    fn polygon(shape: Shape, kinds: [BoundaryKind; 4], alpha_fict: f64) -> Result<Self> {
        if !(alpha_fict > 0.0 && alpha_fict < 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (0, 1)"));
        }
        let c = shape.corners();
        let curves = (0..4)
            .map(|i| BoundaryCurve { curve: Curve::Segment { a: c[i], b: c[(i + 1) % 4] }, kind: kinds[i] })
            .collect();
        Ok(Self { shape, holes: Vec::new(), curves, alpha_fict })
    }

    /// Cuts a circular hole; its boundary curve gets kind `kind`.
    pub fn with_hole(mut self, circle: Circle, kind: BoundaryKind) -> Self {
        self.holes.push(circle);
        self.curves.push(BoundaryCurve { curve: Curve::Hole(circle), kind });
        self
    }

    /// Signed distance-like function, negative in the physical domain.
    pub fn level_set(&self, x: [f64; 2]) -> f64 {
        let mut phi = self.shape.level_set(x);
        for h in &self.holes {
            let d = h.radius - libm::hypot(x[0] - h.center[0], x[1] - h.center[1]);
            phi = phi.max(d);
        }
        phi
    }

    pub fn inside(&self, x: [f64; 2]) -> bool {
        self.level_set(x) < 0.0
    }

    /// `1` in the physical domain, `alpha_fict` elsewhere.
    pub fn alpha_at(&self, x: [f64; 2]) -> f64 {
        if self.inside(x) {
            1.0
        } else {
            self.alpha_fict
        }
    }

    fn curve_crosses_interior(&self, r: &Rect) -> bool {
        let tol = ON_BOUNDARY * r.width().max(r.height());
        self.curves.iter().any(|c| match c.curve {
            Curve::Segment { a, b } => segment_crosses_open_rect(a, b, r, tol),
            Curve::Hole(circle) => circle_crosses_open_rect(&circle, r, tol),
        })
    }

    /// Classifies `r` from an `s x s` sample grid (corners included) and an
    /// exact test for boundary curves entering the open rectangle.
    pub fn classify(&self, r: &Rect, samples: usize) -> CellClass {
        let s = samples.max(2);
        let tol = ON_BOUNDARY * r.width().max(r.height());
        let (mut any_in, mut any_out) = (false, false);
        for j in 0..s {
            for i in 0..s {
                let x = [
                    r.min[0] + r.width() * i as f64 / (s - 1) as f64,
                    r.min[1] + r.height() * j as f64 / (s - 1) as f64,
                ];
                let phi = self.level_set(x);
                if phi < -tol {
                    any_in = true;
                } else if phi > tol {
                    any_out = true;
                }
            }
        }
        if (any_in && any_out) || self.curve_crosses_interior(r) {
            return CellClass::Cut;
        }
        if any_in {
            CellClass::Inside
        } else if any_out {
            CellClass::Outside
        } else {
            // Degenerate: every sample on the boundary.
            CellClass::Cut
        }
    }

    /// Recursive bisection of cut cells down to `depth` levels below `bounds`.
    pub fn integration_cells(&self, bounds: &Rect, depth: usize) -> Vec<QuadCell> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(*bounds, 0u8)];
        while let Some((r, d)) = stack.pop() {
            let class = self.classify(&r, 5);
            if class == CellClass::Cut && (d as usize) < depth {
                for q in r.quadrants().iter().rev() {
                    stack.push((*q, d + 1));
                }
            } else {
                out.push(QuadCell { bounds: r, class, depth: d });
            }
        }
        out
    }

    /// Volume quadrature on `bounds`: an `n x n` Gauss rule on every
    /// integration leaf, with `alpha` evaluated pointwise.
    pub fn volume_points(&self, bounds: &Rect, depth: usize, rule: &GaussRule) -> Vec<VolumePoint> {
        let mut out = Vec::new();
        for cell in self.integration_cells(bounds, depth) {
            let r = cell.bounds;
            let jac = 0.25 * r.area();
            for (eta, wy) in rule.iter() {
                for (xi, wx) in rule.iter() {
                    let x = r.map([xi, eta]);
                    let alpha = match cell.class {
                        CellClass::Inside => 1.0,
                        CellClass::Outside => self.alpha_fict,
                        CellClass::Cut => self.alpha_at(x),
                    };
                    out.push(VolumePoint { x, weight: wx * wy * jac, alpha });
                }
            }
        }
        out
    }

    /// Gauss points on all curves of kind `kind`, split at background grid
    /// lines, `n_points` per piece.
    pub fn boundary_rule(&self, grid: &BaseGrid, kind: BoundaryKind, n_points: usize) -> Result<BoundaryQuadrature> {
        let rule = GaussRule::new(n_points.max(1));
        let bounds = grid.bounds();
        let tol = 1e-10 * grid.h;
        let mut points = Vec::new();
        for (id, bc) in self.curves.iter().enumerate() {
            if bc.kind != kind {
                continue;
            }
            match bc.curve {
                Curve::Segment { a, b } => {
                    if !bounds.contains(a, tol) || !bounds.contains(b, tol) {
                        return Err(Error::CurveOutsideGrid { curve: id });
                    }
                    let len = libm::hypot(b[0] - a[0], b[1] - a[1]);
                    let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                    let mut ts = alloc::vec![0.0, 1.0];
                    for axis in 0..2 {
                        let (lo, hi) = (a[axis].min(b[axis]), a[axis].max(b[axis]));
                        let d = b[axis] - a[axis];
                        if d.abs() < tol {
                            continue;
                        }
                        let first = libm::ceil((lo - grid.origin[axis]) / grid.h) as i64;
                        let last = libm::floor((hi - grid.origin[axis]) / grid.h) as i64;
                        for i in first..=last {
                            let t = (grid.origin[axis] + i as f64 * grid.h - a[axis]) / d;
                            if t > 0.0 && t < 1.0 {
                                ts.push(t);
                            }
                        }
                    }
                    sort_dedup(&mut ts, 1e-14);
                    for w in ts.windows(2) {
                        let (t0, t1) = (w[0], w[1]);
                        let mid = lerp(a, b, 0.5 * (t0 + t1));
                        let element = self.tag_element(grid, mid, normal, id)?;
                        for (s, ws) in rule.iter() {
                            let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * s;
                            points.push(BoundaryPoint {
                                x: lerp(a, b, t),
                                weight: ws * 0.5 * (t1 - t0) * len,
                                normal,
                                curve: id,
                                element,
                            });
                        }
                    }
                }
                Curve::Hole(c) => {
                    let box_ok = bounds.contains([c.center[0] - c.radius, c.center[1] - c.radius], tol)
                        && bounds.contains([c.center[0] + c.radius, c.center[1] + c.radius], tol);
                    if !box_ok {
                        return Err(Error::CurveOutsideGrid { curve: id });
                    }
                    let mut thetas = alloc::vec![0.0, 2.0 * PI];
                    for axis in 0..2 {
                        let first = libm::ceil((c.center[axis] - c.radius - grid.origin[axis]) / grid.h) as i64;
                        let last = libm::floor((c.center[axis] + c.radius - grid.origin[axis]) / grid.h) as i64;
                        for i in first..=last {
                            let u = (grid.origin[axis] + i as f64 * grid.h - c.center[axis]) / c.radius;
                            if u.abs() > 1.0 {
                                continue;
                            }
                            // Angles where the coordinate along `axis` equals the grid line.
                            let base = if axis == 0 { libm::acos(u) } else { libm::asin(u) };
                            let alt = if axis == 0 { 2.0 * PI - base } else { PI - base };
                            for th in [base, alt] {
                                let th = if th < 0.0 { th + 2.0 * PI } else { th };
                                if th > 0.0 && th < 2.0 * PI {
                                    thetas.push(th);
                                }
                            }
                        }
                    }
                    sort_dedup(&mut thetas, 1e-14);
                    let at = |th: f64| {
                        let (s, co) = libm::sincos(th);
                        ([c.center[0] + c.radius * co, c.center[1] + c.radius * s], [-co, -s])
                    };
                    for w in thetas.windows(2) {
                        let (t0, t1) = (w[0], w[1]);
                        let (mid, n_mid) = at(0.5 * (t0 + t1));
                        let element = self.tag_element(grid, mid, n_mid, id)?;
                        for (s, ws) in rule.iter() {
                            let th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * s;
                            let (x, normal) = at(th);
                            points.push(BoundaryPoint {
                                x,
                                weight: ws * 0.5 * (t1 - t0) * c.radius,
                                normal,
                                curve: id,
                                element,
                            });
                        }
                    }
                }
            }
        }
        Ok(BoundaryQuadrature { points })
    }

    fn tag_element(&self, grid: &BaseGrid, mid: [f64; 2], normal: [f64; 2], curve: usize) -> Result<usize> {
        let shift = 1e-9 * grid.h;
        let probe = [mid[0] - shift * normal[0], mid[1] - shift * normal[1]];
        grid.locate(probe).ok_or(Error::CurveOutsideGrid { curve })
    }

    /// Physical area estimate from the integration quadtree: inside leaves
    /// count fully, cut leaves at maximum depth count half.
    pub fn area_estimate(&self, bounds: &Rect, depth: usize) -> f64 {
        self.integration_cells(bounds, depth)
            .iter()
            .map(|c| match c.class {
                CellClass::Inside => c.bounds.area(),
                CellClass::Cut => 0.5 * c.bounds.area(),
                CellClass::Outside => 0.0,
            })
            .sum()
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn sort_dedup(v: &mut Vec<f64>, tol: f64) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
}

/// Liang-Barsky clip of `a -> b` against `r`; true if a piece of positive
/// length passes strictly through the interior.
fn segment_crosses_open_rect(a: [f64; 2], b: [f64; 2], r: &Rect, tol: f64) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for axis in 0..2 {
        let p = [-d[axis], d[axis]];
        let q = [a[axis] - r.min[axis], r.max[axis] - a[axis]];
        for k in 0..2 {
            if p[k] == 0.0 {
                if q[k] < 0.0 {
                    return false;
                }
            } else {
                let t = q[k] / p[k];
                if p[k] < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
    }
    if t1 - t0 <= 0.0 {
        return false;
    }
    let m = lerp(a, b, 0.5 * (t0 + t1));
    m[0] > r.min[0] + tol && m[0] < r.max[0] - tol && m[1] > r.min[1] + tol && m[1] < r.max[1] - tol
}

fn circle_crosses_open_rect(c: &Circle, r: &Rect, tol: f64) -> bool {
    let nx = c.center[0].clamp(r.min[0], r.max[0]);
    let ny = c.center[1].clamp(r.min[1], r.max[1]);
    let dmin = libm::hypot(nx - c.center[0], ny - c.center[1]);
    let fx = (c.center[0] - r.min[0]).abs().max((c.center[0] - r.max[0]).abs());
    let fy = (c.center[1] - r.min[1]).abs().max((c.center[1] - r.max[1]).abs());
    let dmax = libm::hypot(fx, fy);
    dmin < c.radius - tol && c.radius < dmax - tol
}
