//! Hierarchical integrated Legendre shape functions.
//!
//! One-dimensional modes are indexed from zero: modes `0` and `1` are the
//! linear hats `(1 - xi)/2` and `(1 + xi)/2`, and mode `j >= 2` is the
//! integrated Legendre polynomial of degree `j`,
//! `(P_j - P_{j-2}) / sqrt(2 (2j - 1))`, which vanishes at both endpoints.
//! With this scaling the derivatives of the higher modes are orthonormal on
//! `[-1, 1]`.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Legendre polynomials `P_0..=P_n` at `x` by the three-term recurrence.
pub fn legendre(n: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n >= 1 {
        out[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Values and derivatives of the `p + 1` one-dimensional modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Modes1d {
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

/// Evaluates the `p + 1` hierarchical modes and their derivatives at `xi`.
pub fn eval_modes_1d(p: usize, xi: f64) -> Result<Modes1d> {
    if p < 1 {
        return Err(Error::InvalidOrder(p));
    }
    if !(xi.abs() <= 1.0 + 1e-12) {
        return Err(Error::CoordinateOutOfRange(xi));
    }
    let mut values = alloc::vec![0.0; p + 1];
    let mut derivatives = alloc::vec![0.0; p + 1];
    let mut scratch = alloc::vec![0.0; p + 1];
    modes_1d_into(p, xi, &mut values, &mut derivatives, &mut scratch);
    Ok(Modes1d { values, derivatives })
}

/// Unchecked kernel behind [`eval_modes_1d`]. All slices need length `p + 1`.
#[inline]
pub fn modes_1d_into(p: usize, xi: f64, values: &mut [f64], derivatives: &mut [f64], legendre_scratch: &mut [f64]) {
    values[0] = 0.5 * (1.0 - xi);
    values[1] = 0.5 * (1.0 + xi);
    derivatives[0] = -0.5;
    derivatives[1] = 0.5;
    if p < 2 {
        return;
    }
    legendre(p, xi, legendre_scratch);
    for j in 2..=p {
        let two_j_minus_one = (2 * j - 1) as f64;
        let scale = 1.0 / libm::sqrt(2.0 * two_j_minus_one);
        values[j] = (legendre_scratch[j] - legendre_scratch[j - 2]) * scale;
        // P_j' - P_{j-2}' = (2j - 1) P_{j-1}
        derivatives[j] = two_j_minus_one * legendre_scratch[j - 1] * scale;
    }
}

/// Polynomial space spanned on a 2D element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Full tensor product of 1D modes up to degree `p`.
    TensorProduct,
    /// Trunk (serendipity-like) space: interior modes `(a, b)` with `a + b <= p`.
    Trunk,
}

/// Topological entity of the reference square a 2D mode belongs to.
///
/// Corners and sides are numbered counter-clockwise from the lower-left:
/// corners `0..4` are `(-1,-1), (1,-1), (1,1), (-1,1)`; sides `0..4` are
/// bottom, right, top, left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityClass {
    Vertex(u8),
    Edge(u8),
    Interior,
}

/// A 2D mode `N_a(xi) N_b(eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode2d {
    pub a: u8,
    pub b: u8,
    pub entity: EntityClass,
    /// Hierarchical order used for level trimming.
    pub order: u8,
}

/// Hierarchical order of the 2D mode `(a, b)` within `space`.
pub fn mode_order(a: usize, b: usize, space: Space) -> usize {
    let da = if a < 2 { 1 } else { a };
    let db = if b < 2 { 1 } else { b };
    match (a >= 2, b >= 2) {
        (false, false) => 1,
        (true, false) => da,
        (false, true) => db,
        (true, true) => match space {
            Space::TensorProduct => da.max(db),
            Space::Trunk => da + db,
        },
    }
}

/// Classifies the 2D mode `(a, b)` by the entity it is attached to.
pub fn mode_entity(a: usize, b: usize) -> EntityClass {
    match (a, b) {
        (0, 0) => EntityClass::Vertex(0),
        (1, 0) => EntityClass::Vertex(1),
        (1, 1) => EntityClass::Vertex(2),
        (0, 1) => EntityClass::Vertex(3),
        (_, 0) => EntityClass::Edge(0),
        (1, _) => EntityClass::Edge(1),
        (_, 1) => EntityClass::Edge(2),
        (0, _) => EntityClass::Edge(3),
        _ => EntityClass::Interior,
    }
}

/// Mode bookkeeping of a 2D element basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis2d {
    pub p: usize,
    pub space: Space,
    pub modes: Vec<Mode2d>,
}

/// Builds the mode list of order `p`: vertices first, then edges, then
/// interior modes, each group by ascending order.
pub fn build_element_basis(p: usize, space: Space) -> Result<ElementBasis2d> {
    if p < 1 {
        return Err(Error::InvalidOrder(p));
    }
    let mut modes = Vec::new();
    for a in 0..=p {
        for b in 0..=p {
            let order = mode_order(a, b, space);
            if order <= p {
                modes.push(Mode2d { a: a as u8, b: b as u8, entity: mode_entity(a, b), order: order as u8 });
            }
        }
    }
    let rank = |m: &Mode2d| match m.entity {
        EntityClass::Vertex(c) => (0u8, 0u8, c, 0u8, 0u8),
        EntityClass::Edge(s) => (1, m.order, s, m.a, m.b),
        EntityClass::Interior => (2, m.order, 0, m.a, m.b),
    };
    modes.sort_by_key(rank);
    Ok(ElementBasis2d { p, space, modes })
}

/// Number of modes of the trunk space of order `p` in 2D.
pub fn trunk_mode_count(p: usize) -> usize {
    let interior = if p >= 4 { (p - 2) * (p - 3) / 2 } else { 0 };
    4 + 4 * (p - 1) + interior
}

/// Values and reference-coordinate gradients of a 2D basis at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

/// Evaluates every mode of `basis` at `(xi, eta)` in `[-1, 1]^2`.
pub fn eval_basis_2d(basis: &ElementBasis2d, point: [f64; 2]) -> Result<BasisValues> {
    let mx = eval_modes_1d(basis.p, point[0])?;
    let my = eval_modes_1d(basis.p, point[1])?;
    let mut values = Vec::with_capacity(basis.modes.len());
    let mut gradients = Vec::with_capacity(basis.modes.len());
    for m in &basis.modes {
        let (a, b) = (m.a as usize, m.b as usize);
        values.push(mx.values[a] * my.values[b]);
        gradients.push([mx.derivatives[a] * my.values[b], mx.values[a] * my.derivatives[b]]);
    }
    Ok(BasisValues { values, gradients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussRule;

    #[test]
    fn endpoint_values() {
        let m = eval_modes_1d(3, -1.0).unwrap();
        assert_eq!(m.values, alloc::vec![1.0, 0.0, 0.0, 0.0]);
        let m = eval_modes_1d(1, 0.0).unwrap();
        assert_eq!(m.values, alloc::vec![0.5, 0.5]);
        for p in 2..10 {
            for xi in [-1.0, 1.0] {
                let m = eval_modes_1d(p, xi).unwrap();
                for j in 2..=p {
                    assert!(m.values[j].abs() < 1e-14, "p={p} j={j} xi={xi}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(eval_modes_1d(0, 0.0), Err(Error::InvalidOrder(0)));
        assert!(matches!(eval_modes_1d(2, 1.1), Err(Error::CoordinateOutOfRange(_))));
        assert!(eval_modes_1d(2, 1.0 + 1e-13).is_ok());
        assert!(eval_modes_1d(2, f64::NAN).is_err());
    }

    #[test]
    fn higher_mode_stiffness_is_identity() {
        // 20-point Gauss oracle for the derivative Gram matrix.
        let rule = GaussRule::new(20);
        let p = 5;
        let mut gram = [[0.0; 6]; 6];
        for (x, w) in rule.iter() {
            let m = eval_modes_1d(p, x).unwrap();
            for i in 0..=p {
                for j in 0..=p {
                    gram[i][j] += w * m.derivatives[i] * m.derivatives[j];
                }
            }
        }
        for i in 2..=p {
            for j in 2..=p {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - expected).abs() < 1e-13, "({i},{j}) = {}", gram[i][j]);
            }
        }
        // Coupling between the linear hats and the bubbles vanishes as well.
        for i in 0..2 {
            for j in 2..=p {
                assert!(gram[i][j].abs() < 1e-13);
            }
        }
        let _ = eval_modes_1d(p, 0.37).unwrap();
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = 6;
        let h = 1e-6;
        for &x in &[-0.9, -0.37, 0.0, 0.21, 0.8] {
            let m = eval_modes_1d(p, x).unwrap();
            let mp = eval_modes_1d(p, x + h).unwrap();
            let mm = eval_modes_1d(p, x - h).unwrap();
            for j in 0..=p {
                let fd = (mp.values[j] - mm.values[j]) / (2.0 * h);
                assert!((fd - m.derivatives[j]).abs() < 1e-7);
            }
        }
    }

    fn enumerate_count(p: usize, space: Space) -> usize {
        // Independent count: vertices, edges of degree 2..=p, interior pairs
        // restricted by the space.
        let mut n = 4 + 4 * (p - 1);
        for a in 2..=p {
            for b in 2..=p {
                let inside = match space {
                    Space::TensorProduct => true,
                    Space::Trunk => a + b <= p,
                };
                if inside {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn mode_counts() {
        assert_eq!(build_element_basis(2, Space::TensorProduct).unwrap().modes.len(), 9);
        assert_eq!(build_element_basis(2, Space::Trunk).unwrap().modes.len(), 8);
        assert_eq!(build_element_basis(4, Space::Trunk).unwrap().modes.len(), 17);
        for p in 1..9 {
            let t = build_element_basis(p, Space::TensorProduct).unwrap();
            assert_eq!(t.modes.len(), (p + 1) * (p + 1));
            assert_eq!(t.modes.len(), enumerate_count(p, Space::TensorProduct));
            let s = build_element_basis(p, Space::Trunk).unwrap();
            assert_eq!(s.modes.len(), trunk_mode_count(p));
            assert_eq!(s.modes.len(), enumerate_count(p, Space::Trunk));
        }
    }

    #[test]
    fn ordering_is_vertex_edge_interior() {
        for space in [Space::TensorProduct, Space::Trunk] {
            let b = build_element_basis(6, space).unwrap();
            let class = |m: &Mode2d| match m.entity {
                EntityClass::Vertex(_) => 0,
                EntityClass::Edge(_) => 1,
                EntityClass::Interior => 2,
            };
            for w in b.modes.windows(2) {
                assert!(class(&w[0]) <= class(&w[1]));
                if class(&w[0]) == class(&w[1]) {
                    assert!(w[0].order <= w[1].order);
                }
            }
            assert!(b.modes[..4].iter().all(|m| matches!(m.entity, EntityClass::Vertex(_))));
        }
    }

    #[test]
    fn bases_are_nested() {
        for space in [Space::TensorProduct, Space::Trunk] {
            for q in 1..7 {
                let coarse = build_element_basis(q, space).unwrap();
                let fine = build_element_basis(q + 1, space).unwrap();
                for m in &coarse.modes {
                    assert!(fine.modes.contains(m));
                }
            }
        }
    }

    #[test]
    fn corner_and_partition_of_unity() {
        let b = build_element_basis(1, Space::TensorProduct).unwrap();
        let v = eval_basis_2d(&b, [-1.0, -1.0]).unwrap();
        assert_eq!(v.values, alloc::vec![1.0, 0.0, 0.0, 0.0]);
        let b = build_element_basis(4, Space::TensorProduct).unwrap();
        for pt in [[0.3, -0.2], [-0.77, 0.91], [0.0, 0.0]] {
            let v = eval_basis_2d(&b, pt).unwrap();
            let s: f64 = v.values[..4].iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_tensor_composition() {
        let b = build_element_basis(3, Space::TensorProduct).unwrap();
        let pt = [0.2, -0.5];
        let v = eval_basis_2d(&b, pt).unwrap();
        let mx = eval_modes_1d(3, pt[0]).unwrap();
        let my = eval_modes_1d(3, pt[1]).unwrap();
        for (i, m) in b.modes.iter().enumerate() {
            let (a, bb) = (m.a as usize, m.b as usize);
            assert_eq!(v.values[i], mx.values[a] * my.values[bb]);
            assert_eq!(v.gradients[i][0], mx.derivatives[a] * my.values[bb]);
            assert_eq!(v.gradients[i][1], mx.values[a] * my.derivatives[bb]);
        }
    }
}
