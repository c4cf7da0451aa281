//! Cartesian base grids, refinement quadtrees, entity activation and
//! hierarchical DOF numbering for multi-level hp-meshes.
//!
//! Cells at refinement depth `k` live on a global lattice with spacing
//! `h / 2^k`; a cell is addressed by its depth and lattice indices. Every
//! tree node (not only leaves) carries shape functions, and the final basis
//! is the union over depths of the functions attached to *active* entities.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::basis::{mode_order, Space};
use crate::{Error, Result};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1])]
    }

    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        x[0] >= self.min[0] - tol && x[0] <= self.max[0] + tol && x[1] >= self.min[1] - tol && x[1] <= self.max[1] + tol
    }

    /// Maps a reference point in `[-1, 1]^2` to global coordinates.
    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.min[0] + 0.5 * (xi[0] + 1.0) * self.width(),
            self.min[1] + 0.5 * (xi[1] + 1.0) * self.height(),
        ]
    }

    /// Inverse of [`Rect::map`].
    #[inline]
    pub fn local(&self, x: [f64; 2]) -> [f64; 2] {
        [
            2.0 * (x[0] - self.min[0]) / self.width() - 1.0,
            2.0 * (x[1] - self.min[1]) / self.height() - 1.0,
        ]
    }

    /// The four congruent quadrants, ordered `(0,0), (1,0), (0,1), (1,1)`.
    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.min, c),
            Rect::new([c[0], self.min[1]], [self.max[0], c[1]]),
            Rect::new([self.min[0], c[1]], [c[0], self.max[1]]),
            Rect::new(c, self.max),
        ]
    }
}

/// Uniform Cartesian background grid of square elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseGrid {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl BaseGrid {
    /// Grid of `counts` elements covering `lengths` from `origin`; elements
    /// must be square. Elements are indexed row-major (`iy * nx + ix`).
    pub fn new(origin: [f64; 2], lengths: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::InvalidGrid("element counts must be positive"));
        }
        if !(lengths[0] > 0.0 && lengths[1] > 0.0) {
            return Err(Error::InvalidGrid("lengths must be positive"));
        }
        let hx = lengths[0] / counts[0] as f64;
        let hy = lengths[1] / counts[1] as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(hy) {
            return Err(Error::NonSquareElements { hx, hy });
        }
        Ok(Self { origin, h: hx, nx: counts[0], ny: counts[1] })
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn vertex_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn element_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e % self.nx, e / self.nx)
    }

    pub fn element_bounds(&self, e: usize) -> Rect {
        let (ix, iy) = self.element_coords(e);
        let min = [self.origin[0] + ix as f64 * self.h, self.origin[1] + iy as f64 * self.h];
        Rect::new(min, [min[0] + self.h, min[1] + self.h])
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin,
            [self.origin[0] + self.nx as f64 * self.h, self.origin[1] + self.ny as f64 * self.h],
        )
    }

    /// Element containing `x` (points on shared edges go to the upper/right
    /// element, the outer boundary is clamped inward).
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let b = self.bounds();
        let tol = 1e-12 * self.h;
        if !b.contains(x, tol) {
            return None;
        }
        let fx = libm::floor((x[0] - self.origin[0]) / self.h) as isize;
        let fy = libm::floor((x[1] - self.origin[1]) / self.h) as isize;
        let ix = fx.clamp(0, self.nx as isize - 1) as usize;
        let iy = fy.clamp(0, self.ny as isize - 1) as usize;
        Some(self.element_index(ix, iy))
    }

    /// Bounds of a lattice cell at any depth.
    pub fn cell_bounds(&self, cell: CellId) -> Rect {
        let s = self.h / (1u64 << cell.depth) as f64;
        let min = [self.origin[0] + cell.ix as f64 * s, self.origin[1] + cell.iy as f64 * s];
        Rect::new(min, [min[0] + s, min[1] + s])
    }

    /// Global position of a lattice vertex at depth `depth`.
    pub fn lattice_point(&self, depth: u8, ix: u32, iy: u32) -> [f64; 2] {
        let s = self.h / (1u64 << depth) as f64;
        [self.origin[0] + ix as f64 * s, self.origin[1] + iy as f64 * s]
    }
}

/// A cell of the depth-`depth` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub depth: u8,
    pub iy: u32,
    pub ix: u32,
}

impl CellId {
    pub fn new(depth: u8, ix: u32, iy: u32) -> Self {
        Self { depth, iy, ix }
    }

    pub fn parent(&self) -> Option<CellId> {
        (self.depth > 0).then(|| CellId::new(self.depth - 1, self.ix / 2, self.iy / 2))
    }

    /// Children ordered `(0,0), (1,0), (0,1), (1,1)`.
    pub fn children(&self) -> [CellId; 4] {
        let (x, y, d) = (2 * self.ix, 2 * self.iy, self.depth + 1);
        [CellId::new(d, x, y), CellId::new(d, x + 1, y), CellId::new(d, x, y + 1), CellId::new(d, x + 1, y + 1)]
    }

    /// Lattice indices of the base element containing this cell.
    pub fn base(&self) -> (u32, u32) {
        (self.ix >> self.depth, self.iy >> self.depth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub cell: CellId,
    pub parent: Option<u32>,
    pub children: Option<[u32; 4]>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Refinement quadtree of one base element. Node `0` is the base element.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTree {
    pub nodes: Vec<TreeNode>,
}

impl RefinementTree {
    fn new(root: CellId) -> Self {
        Self { nodes: alloc::vec![TreeNode { cell: root, parent: None, children: None }] }
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.cell.depth as usize).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf()).map(|(i, _)| i)
    }

    fn subdivide(&mut self, node: usize) -> [u32; 4] {
        if let Some(c) = self.nodes[node].children {
            return c;
        }
        let first = self.nodes.len() as u32;
        for child in self.nodes[node].cell.children() {
            self.nodes.push(TreeNode { cell: child, parent: Some(node as u32), children: None });
        }
        let c = [first, first + 1, first + 2, first + 3];
        self.nodes[node].children = Some(c);
        c
    }

    /// Node for `cell`, descending from the root.
    pub fn find(&self, cell: CellId) -> Option<usize> {
        let root = self.nodes[0].cell;
        if cell.depth < root.depth {
            return None;
        }
        let mut node = 0usize;
        for d in (root.depth + 1)..=cell.depth {
            let shift = cell.depth - d;
            let (cx, cy) = ((cell.ix >> shift) & 1, (cell.iy >> shift) & 1);
            let ch = self.nodes[node].children?;
            node = ch[(cy * 2 + cx) as usize] as usize;
        }
        (self.nodes[node].cell == cell).then_some(node)
    }

    /// Root-first chain of node indices ending at `node`.
    pub fn ancestry(&self, node: usize) -> Vec<usize> {
        let mut chain = alloc::vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            cur = p as usize;
            chain.push(cur);
        }
        chain.reverse();
        chain
    }
}

/// Base grid plus one refinement tree per base element.
///
/// Base elements can be excluded from the discretization (fully fictitious
/// cells); excluded elements carry no unknowns and are treated like the
/// outside of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HpMesh {
    pub grid: BaseGrid,
    trees: Vec<RefinementTree>,
    included: Vec<bool>,
    max_depth: usize,
}

/// Default cap on refinement depth.
pub const DEFAULT_MAX_DEPTH: usize = 4;

impl HpMesh {
    pub fn new(grid: BaseGrid) -> Self {
        let trees = (0..grid.element_count())
            .map(|e| {
                let (ix, iy) = grid.element_coords(e);
                RefinementTree::new(CellId::new(0, ix as u32, iy as u32))
            })
            .collect();
        Self { included: alloc::vec![true; grid.element_count()], trees, grid, max_depth: DEFAULT_MAX_DEPTH }
    }

    pub fn with_max_depth(mut self, k_max: usize) -> Self {
        self.max_depth = k_max;
        self
    }

    pub fn max_allowed_depth(&self) -> usize {
        self.max_depth
    }

    pub fn trees(&self) -> &[RefinementTree] {
        &self.trees
    }

    pub fn tree(&self, base: usize) -> &RefinementTree {
        &self.trees[base]
    }

    pub fn is_included(&self, base: usize) -> bool {
        self.included[base]
    }

    pub fn included_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.trees.len()).filter(|&e| self.included[e])
    }

    /// Excludes every base element whose bounds satisfy `predicate`.
    pub fn exclude_where(&mut self, mut predicate: impl FnMut(&Rect) -> bool) {
        for e in 0..self.trees.len() {
            if predicate(&self.grid.element_bounds(e)) {
                self.included[e] = false;
            }
        }
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k > self.max_depth {
            return Err(Error::InvalidParameter("refinement depth exceeds the configured maximum"));
        }
        Ok(())
    }

    /// Gives every included base element whose bounds satisfy `predicate` a
    /// uniform tree of depth `k`. Neighbours are not balanced.
    pub fn refine_where(&mut self, mut predicate: impl FnMut(&Rect) -> bool, k: usize) -> Result<()> {
        self.check_depth(k)?;
        for e in 0..self.trees.len() {
            if !self.included[e] || !predicate(&self.grid.element_bounds(e)) {
                continue;
            }
            let tree = &mut self.trees[e];
            let mut frontier = alloc::vec![0usize];
            for _ in 0..k {
                let mut next = Vec::with_capacity(frontier.len() * 4);
                for n in frontier {
                    next.extend(tree.subdivide(n).iter().map(|&c| c as usize));
                }
                frontier = next;
            }
        }
        Ok(())
    }

    /// Recursive refinement: any cell up to depth `k - 1` whose bounds
    /// satisfy `predicate` is bisected, and its children are tested again.
    pub fn refine_toward(&mut self, mut predicate: impl FnMut(&Rect) -> bool, k: usize) -> Result<()> {
        self.check_depth(k)?;
        let grid = self.grid;
        for e in 0..self.trees.len() {
            if !self.included[e] {
                continue;
            }
            let tree = &mut self.trees[e];
            let mut stack = alloc::vec![0usize];
            while let Some(n) = stack.pop() {
                let cell = tree.nodes[n].cell;
                if (cell.depth as usize) < k && predicate(&grid.cell_bounds(cell)) {
                    stack.extend(tree.subdivide(n).iter().map(|&c| c as usize));
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.included_elements().map(|e| self.trees[e].depth()).max().unwrap_or(0)
    }

    pub fn cell_bounds(&self, cell: CellId) -> Rect {
        self.grid.cell_bounds(cell)
    }

    /// Whether `cell` lies inside the grid and belongs to an included base element.
    pub fn in_domain(&self, depth: u8, ix: i64, iy: i64) -> bool {
        let (nx, ny) = ((self.grid.nx as i64) << depth, (self.grid.ny as i64) << depth);
        if ix < 0 || iy < 0 || ix >= nx || iy >= ny {
            return false;
        }
        let base = self.grid.element_index((ix >> depth) as usize, (iy >> depth) as usize);
        self.included[base]
    }

    /// `Some(is_leaf)` when the cell exists in the mesh.
    pub fn cell_state(&self, cell: CellId) -> Option<bool> {
        let (bx, by) = cell.base();
        if bx as usize >= self.grid.nx || by as usize >= self.grid.ny {
            return None;
        }
        let base = self.grid.element_index(bx as usize, by as usize);
        if !self.included[base] {
            return None;
        }
        let tree = &self.trees[base];
        tree.find(cell).map(|n| tree.nodes[n].is_leaf())
    }

    /// Leaf cells as `(base element, node index)` in base-element order.
    pub fn leaves(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.included_elements().flat_map(move |e| self.trees[e].leaves().map(move |n| (e, n)))
    }

    /// Leaf node of base element `base` containing `x`.
    pub fn locate_leaf(&self, base: usize, x: [f64; 2]) -> usize {
        let tree = &self.trees[base];
        let mut node = 0usize;
        let mut rect = self.grid.element_bounds(base);
        while let Some(ch) = tree.nodes[node].children {
            let c = rect.center();
            let q = (if x[0] >= c[0] { 1 } else { 0 }) + (if x[1] >= c[1] { 2 } else { 0 });
            node = ch[q] as usize;
            rect = rect.quadrants()[q];
        }
        node
    }

    /// Number of cells per depth and leaves per depth (included elements only).
    pub fn cell_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let d = self.depth();
        let mut cells = alloc::vec![0; d + 1];
        let mut leaves = alloc::vec![0; d + 1];
        for e in self.included_elements() {
            for n in &self.trees[e].nodes {
                cells[n.cell.depth as usize] += 1;
                if n.is_leaf() {
                    leaves[n.cell.depth as usize] += 1;
                }
            }
        }
        (cells, leaves)
    }
}

/// Kind of topological entity on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Vertex,
    /// Edge from lattice point `(ix, iy)` to `(ix + 1, iy)`.
    HorizontalEdge,
    /// Edge from lattice point `(ix, iy)` to `(ix, iy + 1)`.
    VerticalEdge,
    Face,
}

/// A topological entity of the depth-`depth` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityKey {
    pub depth: u8,
    pub kind: EntityKind,
    pub iy: u32,
    pub ix: u32,
}

impl EntityKey {
    pub fn new(depth: u8, kind: EntityKind, ix: u32, iy: u32) -> Self {
        Self { depth, kind, iy, ix }
    }

    /// Numbering key: vertices, then edges, then faces; by depth and
    /// row-major position within each class.
    fn numbering_key(&self) -> (u8, u8, u32, u32, EntityKind) {
        let class = match self.kind {
            EntityKind::Vertex => 0,
            EntityKind::HorizontalEdge | EntityKind::VerticalEdge => 1,
            EntityKind::Face => 2,
        };
        (class, self.depth, self.iy, self.ix, self.kind)
    }

    /// Lattice cells of the same depth whose closure contains the entity.
    pub fn adjacent_cells(&self) -> Vec<(i64, i64)> {
        let (x, y) = (self.ix as i64, self.iy as i64);
        match self.kind {
            EntityKind::Vertex => alloc::vec![(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)],
            EntityKind::HorizontalEdge => alloc::vec![(x, y - 1), (x, y)],
            EntityKind::VerticalEdge => alloc::vec![(x - 1, y), (x, y)],
            EntityKind::Face => alloc::vec![(x, y)],
        }
    }
}

/// Entities of `cell` with the cell-local 1D mode indices they own:
/// `(entity, a_fixed, b_fixed)` where `None` marks the running high-order
/// direction.
fn cell_entities(cell: CellId) -> [(EntityKey, Option<u8>, Option<u8>); 9] {
    let (d, x, y) = (cell.depth, cell.ix, cell.iy);
    use EntityKind::*;
    [
        (EntityKey::new(d, Vertex, x, y), Some(0), Some(0)),
        (EntityKey::new(d, Vertex, x + 1, y), Some(1), Some(0)),
        (EntityKey::new(d, Vertex, x, y + 1), Some(0), Some(1)),
        (EntityKey::new(d, Vertex, x + 1, y + 1), Some(1), Some(1)),
        (EntityKey::new(d, HorizontalEdge, x, y), None, Some(0)),
        (EntityKey::new(d, HorizontalEdge, x, y + 1), None, Some(1)),
        (EntityKey::new(d, VerticalEdge, x, y), Some(0), None),
        (EntityKey::new(d, VerticalEdge, x + 1, y), Some(1), None),
        (EntityKey::new(d, Face, x, y), None, None),
    ]
}

/// A candidate entity and its activation state.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoEntity {
    pub key: EntityKey,
    pub active: bool,
    /// Existing cells (same depth) whose closure contains the entity.
    pub owners: Vec<CellId>,
}

/// Applies the activation rules to every entity of every existing cell.
///
/// An entity of depth `k` is active iff every in-domain lattice cell of
/// depth `k` around it exists in the mesh (otherwise it sits on the boundary
/// of a refinement patch and its function would not vanish there), and
/// * for edges and faces, at least one of those cells is a leaf (otherwise
///   the modes are fully overlaid by the next depth and linearly dependent
///   on it);
/// * for vertices, no coarser lattice has a point at the same place. The
///   coarsest complete vertex at a locus carries the hat and finer copies
///   stay inactive.
///
/// On unrefined base meshes every entity is active.
pub fn activate_entities(mesh: &HpMesh) -> Vec<TopoEntity> {
    let mut keys = BTreeSet::new();
    for e in mesh.included_elements() {
        for n in &mesh.tree(e).nodes {
            for (key, _, _) in cell_entities(n.cell) {
                keys.insert(key);
            }
        }
    }
    keys.into_iter()
        .map(|key| {
            let mut owners = Vec::new();
            let mut complete = true;
            let mut any_leaf = false;
            for (cx, cy) in key.adjacent_cells() {
                if !mesh.in_domain(key.depth, cx, cy) {
                    continue;
                }
                let cell = CellId::new(key.depth, cx as u32, cy as u32);
                match mesh.cell_state(cell) {
                    Some(leaf) => {
                        owners.push(cell);
                        any_leaf |= leaf;
                    }
                    None => complete = false,
                }
            }
            // A vertex keeps the coarsest depth at which it is complete, so
            // coarse hats survive under refinement (hierarchical basis).
            let active = match key.kind {
                EntityKind::Vertex => complete && (key.depth == 0 || key.ix % 2 == 1 || key.iy % 2 == 1),
                _ => complete && any_leaf,
            };
            TopoEntity { key, active, owners }
        })
        .collect()
}

/// A hierarchical shape function attached to an active entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionTag {
    pub entity: EntityKey,
    /// 1D polynomial degree per direction (1 for the linear hat).
    pub degree: (u8, u8),
    /// Hierarchical order used for level trimming.
    pub order: u8,
}

/// A function as seen from one cell: its global index and cell-local 1D
/// mode indices (`0`, `1` for hats, `j >= 2` for degree-`j` bubbles).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalFunction {
    pub function: u32,
    pub a: u8,
    pub b: u8,
}

/// Tags of a single unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofTag {
    pub entity: EntityKey,
    pub order: u8,
    pub depth: u8,
    pub component: u8,
}

/// Global numbering of the unknowns of a multi-level hp discretization.
///
/// Unknown `f * n_f + c` is component `c` of function `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub p: usize,
    pub space: Space,
    pub n_fields: usize,
    functions: Vec<FunctionTag>,
    cell_functions: BTreeMap<CellId, Vec<LocalFunction>>,
}

fn entity_modes(key: &EntityKey, p: usize, space: Space) -> Vec<(u8, u8)> {
    let mut modes = Vec::new();
    match key.kind {
        EntityKind::Vertex => modes.push((1, 1)),
        EntityKind::HorizontalEdge => modes.extend((2..=p).map(|j| (j as u8, 1))),
        EntityKind::VerticalEdge => modes.extend((2..=p).map(|j| (1, j as u8))),
        EntityKind::Face => {
            for a in 2..=p {
                for b in 2..=p {
                    if mode_order(a, b, space) <= p {
                        modes.push((a as u8, b as u8));
                    }
                }
            }
        }
    }
    modes.sort_by_key(|&(a, b)| (mode_order(a as usize, b as usize, space), a, b));
    modes
}

fn degree_order(degree: (u8, u8), space: Space) -> u8 {
    // Degrees use 1 for the hat; map onto 1D mode indices first.
    let a = if degree.0 == 1 { 0 } else { degree.0 as usize };
    let b = if degree.1 == 1 { 0 } else { degree.1 as usize };
    mode_order(a, b, space) as u8
}

impl DofMap {
    /// Numbers the functions of all active entities. Each active vertex gets
    /// one function, each active edge `p - 1`, each active face the interior
    /// modes of `space`; every function carries `n_fields` unknowns.
    pub fn build(mesh: &HpMesh, p: usize, space: Space, n_fields: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidOrder(p));
        }
        if n_fields == 0 {
            return Err(Error::InvalidParameter("at least one field component is required"));
        }
        let mut active: Vec<EntityKey> =
            activate_entities(mesh).into_iter().filter(|e| e.active).map(|e| e.key).collect();
        active.sort_by_key(|k| k.numbering_key());

        let mut functions = Vec::new();
        let mut first_function = BTreeMap::new();
        for key in &active {
            first_function.insert(*key, functions.len() as u32);
            for degree in entity_modes(key, p, space) {
                functions.push(FunctionTag { entity: *key, degree, order: degree_order(degree, space) });
            }
        }

        let mut cell_functions = BTreeMap::new();
        for e in mesh.included_elements() {
            for node in &mesh.tree(e).nodes {
                let mut list = Vec::new();
                for (key, fa, fb) in cell_entities(node.cell) {
                    let Some(&first) = first_function.get(&key) else { continue };
                    for (offset, degree) in entity_modes(&key, p, space).into_iter().enumerate() {
                        let a = fa.unwrap_or(degree.0);
                        let b = fb.unwrap_or(degree.1);
                        list.push(LocalFunction { function: first + offset as u32, a, b });
                    }
                }
                cell_functions.insert(node.cell, list);
            }
        }
        Ok(Self { p, space, n_fields, functions, cell_functions })
    }

    pub fn function_count(&self) -> usize {
        self.functions.len()
    }

    pub fn len(&self) -> usize {
        self.functions.len() * self.n_fields
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[FunctionTag] {
        &self.functions
    }

    pub fn dof(&self, function: u32, component: usize) -> usize {
        function as usize * self.n_fields + component
    }

    pub fn tag(&self, dof: usize) -> DofTag {
        let f = &self.functions[dof / self.n_fields];
        DofTag { entity: f.entity, order: f.order, depth: f.entity.depth, component: (dof % self.n_fields) as u8 }
    }

    pub fn tags(&self) -> impl Iterator<Item = DofTag> + '_ {
        (0..self.len()).map(move |i| self.tag(i))
    }

    /// Functions with non-zero restriction to `cell` (its own entities only;
    /// ancestors contribute separately).
    pub fn cell_functions(&self, cell: CellId) -> &[LocalFunction] {
        self.cell_functions.get(&cell).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sorted unknowns with order `<= p_cap` and depth `<= k_cap`.
    pub fn trimmed(&self, p_cap: usize, k_cap: usize) -> Vec<u32> {
        (0..self.len())
            .filter(|&i| {
                let f = &self.functions[i / self.n_fields];
                f.order as usize <= p_cap && f.entity.depth as usize <= k_cap
            })
            .map(|i| i as u32)
            .collect()
    }

    /// Maximum depth carrying unknowns.
    pub fn max_depth(&self) -> usize {
        self.functions.iter().map(|f| f.entity.depth as usize).max().unwrap_or(0)
    }

    /// Unknown counts per `(order, depth)` class.
    pub fn class_counts(&self) -> BTreeMap<(u8, u8), usize> {
        let mut m = BTreeMap::new();
        for f in &self.functions {
            *m.entry((f.order, f.entity.depth)).or_insert(0) += self.n_fields;
        }
        m
    }
}

/// Base elements around one base-grid vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePatch {
    pub vertex: (usize, usize),
    pub elements: Vec<usize>,
}

/// One patch per base-grid vertex, holding the up to four elements that
/// share it.
pub fn node_patches(grid: &BaseGrid) -> Vec<NodePatch> {
    let mut out = Vec::with_capacity(grid.vertex_count());
    for vy in 0..=grid.ny {
        for vx in 0..=grid.nx {
            let mut elements = Vec::with_capacity(4);
            for (dx, dy) in [(1, 1), (0, 1), (1, 0), (0, 0)] {
                if vx >= dx && vy >= dy && vx - dx < grid.nx && vy - dy < grid.ny {
                    elements.push(grid.element_index(vx - dx, vy - dy));
                }
            }
            out.push(NodePatch { vertex: (vx, vy), elements });
        }
    }
    out
}
