//! Structured domains over Ω, nodal fields, finite-difference derivative
//! operators and quadrature.
//!
//! Two lattice modes exist. The Cartesian mode covers rectangles, disks and
//! annuli with a node mask and clipped cell areas. The polar mode covers disks
//! (node-centred, one node at the origin) and annuli with rings of nodes; it
//! resolves radial singularities and makes excision studies exact.
//!
//! Stencils never read outside the active node set. A missing neighbour is
//! replaced by a ghost value extrapolated along the same lattice line with a
//! cubic through the nearest four active nodes, so every active node carries a
//! complete, second-order stencil and boundary nodes need no special casing.

mod build;
mod field;
pub(crate) mod lattice;
mod sparse;

pub use field::{ScalarField, TensorField, VectorField};
pub use sparse::{SparseOp, Stencil};

use serde::Serialize;

use crate::{Error, Result};
use lattice::{Lattice, LatticeKind, NONE};

/// Planar domain Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

impl Shape {
    pub fn unit_disk() -> Self {
        Shape::Disk { center: [0.0; 2], radius: 1.0 }
    }

    /// Signed distance, negative inside.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            Shape::Rectangle { min, max } => {
                let dx = (min[0] - p[0]).max(p[0] - max[0]);
                let dy = (min[1] - p[1]).max(p[1] - max[1]);
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            Shape::Disk { center, radius } => dist(p, center) - radius,
            Shape::Annulus { center, inner, outer } => {
                let r = dist(p, center);
                (r - outer).max(inner - r)
            }
        }
    }

    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Shape::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }

    /// Radius of the largest inscribed disk.
    pub fn inradius(&self) -> f64 {
        match *self {
            Shape::Rectangle { min, max } => 0.5 * (max[0] - min[0]).min(max[1] - min[1]),
            Shape::Disk { radius, .. } => radius,
            Shape::Annulus { inner, outer, .. } => 0.5 * (outer - inner),
        }
    }

    /// Number of boundary components `m`.
    pub fn boundary_components(&self) -> usize {
        match self {
            Shape::Annulus { .. } => 2,
            _ => 1,
        }
    }

    /// Euler characteristic `2 − m`.
    pub fn euler_characteristic(&self) -> i32 {
        2 - self.boundary_components() as i32
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Rectangle { min, max } => max[0] > min[0] && max[1] > min[1],
            Shape::Disk { radius, .. } => radius > 0.0,
            Shape::Annulus { inner, outer, .. } => inner > 0.0 && outer > inner,
        };
        let finite = match *self {
            Shape::Rectangle { min, max } => min.iter().chain(&max).all(|v| v.is_finite()),
            Shape::Disk { center, radius } => center.iter().all(|v| v.is_finite()) && radius.is_finite(),
            Shape::Annulus { center, inner, outer } => {
                center.iter().all(|v| v.is_finite()) && inner.is_finite() && outer.is_finite()
            }
        };
        if ok && finite {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid shape parameters: {:?}", self)))
        }
    }
}

/// Lattice mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridMode {
    Cartesian,
    /// Rings of nodes; `n_theta` must be a multiple of 8 (default: smallest
    /// multiple of 8 with outer arc spacing ≤ h).
    Polar { n_theta: Option<usize> },
}

/// Region removed from the node set and from quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Excision {
    None,
    /// Open ball `|x − center| < radius` around a point singularity.
    Point { center: [f64; 2], radius: f64 },
    /// Open band `| |x − center| − radius | < half_width` around a singular circle.
    Collar { center: [f64; 2], radius: f64, half_width: f64 },
}

impl Excision {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Excision::None => false,
            Excision::Point { center, radius } => dist(p, center) < radius,
            Excision::Collar { center, radius, half_width } => (dist(p, center) - radius).abs() < half_width,
        }
    }

    /// The excision width δ (0 for none).
    pub fn delta(&self) -> f64 {
        match *self {
            Excision::None => 0.0,
            Excision::Point { radius, .. } => radius,
            Excision::Collar { half_width, .. } => half_width,
        }
    }
}

/// Curve across which stencils never reach (flagged jump or singular facets).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cut {
    Circle { center: [f64; 2], radius: f64 },
}

impl Cut {
    pub fn level(&self, p: [f64; 2]) -> f64 {
        match *self {
            Cut::Circle { center, radius } => dist(p, center) - radius,
        }
    }
}

/// Everything needed to build a [`DiscreteDomain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub mode: GridMode,
    pub h: f64,
    pub excision: Excision,
    pub cut: Option<Cut>,
}

impl DomainSpec {
    pub fn new(shape: Shape, h: f64) -> Self {
        DomainSpec { shape, mode: GridMode::Cartesian, h, excision: Excision::None, cut: None }
    }

    pub fn polar(mut self, n_theta: Option<usize>) -> Self {
        self.mode = GridMode::Polar { n_theta };
        self
    }

    pub fn excise(mut self, excision: Excision) -> Self {
        self.excision = excision;
        self
    }

    pub fn with_cut(mut self, cut: Cut) -> Self {
        self.cut = Some(cut);
        self
    }

    pub fn build(&self) -> Result<DiscreteDomain> {
        DiscreteDomain::new(*self)
    }
}

/// Node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    /// Full stencil from real neighbours.
    Interior,
    /// Stencil completed with at least one extrapolated ghost value.
    BoundaryAdjacent,
    /// Outside Ω or excised; carries no value.
    Exterior,
}

impl NodeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeClass::Interior => "interior",
            NodeClass::BoundaryAdjacent => "boundary-adjacent",
            NodeClass::Exterior => "exterior",
        }
    }
}

/// Geometry of a polar lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarInfo {
    pub center: [f64; 2],
    /// Radius of ring 0 (0 for a disk, whose ring 0 is the origin node).
    pub r0: f64,
    pub dr: f64,
    pub n_rings: usize,
    pub n_theta: usize,
    pub has_origin: bool,
}

impl PolarInfo {
    pub fn radius(&self, ring: usize) -> f64 {
        self.r0 + ring as f64 * self.dr
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }
}

/// Divergence-form operator `Σ_f c_f N_f / √(1 + N_f² + T_f²)` per node.
///
/// Each face `f` carries a normal difference `N_f`, a tangential derivative
/// `T_f` and the coefficient `c_f = ± |face| / |cell|`.
#[derive(Debug, Clone, Default)]
pub struct FluxOp {
    pub(crate) face_ptr: Vec<usize>,
    pub(crate) coef: Vec<f64>,
    pub(crate) normal: SparseOp,
    pub(crate) tangent: SparseOp,
}

impl FluxOp {
    pub fn faces(&self, node: usize) -> std::ops::Range<usize> {
        self.face_ptr[node]..self.face_ptr[node + 1]
    }

    pub fn n_faces(&self) -> usize {
        self.coef.len()
    }
}

/// A structured discretization of Ω (minus an optional excision).
#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    spec: DomainSpec,
    h: f64,
    lattice: Lattice,
    slots: Vec<(u32, u32)>,
    positions: Vec<[f64; 2]>,
    class: Vec<NodeClass>,
    on_boundary: Vec<bool>,
    weights: Vec<f64>,
    fallbacks: usize,
    pub(crate) dx: SparseOp,
    pub(crate) dy: SparseOp,
    pub(crate) dxx: SparseOp,
    pub(crate) dxy: SparseOp,
    pub(crate) dyy: SparseOp,
    pub(crate) flux: FluxOp,
    pub(crate) laplace: SparseOp,
}

impl DiscreteDomain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        spec.shape.validate()?;
        if !(spec.h > 0.0 && spec.h.is_finite()) {
            return Err(Error::Config(format!("grid spacing h must be positive, got {}", spec.h)));
        }
        if spec.h > spec.shape.inradius() {
            return Err(Error::Config(format!(
                "grid spacing h = {} exceeds the inradius {} of the domain",
                spec.h,
                spec.shape.inradius()
            )));
        }
        match spec.excision {
            Excision::None => {}
            Excision::Point { radius, .. } if radius > 0.0 => {}
            Excision::Collar { half_width, radius, .. } if half_width > 0.0 && radius > 0.0 => {}
            e => return Err(Error::Config(format!("invalid excision {:?}", e))),
        }
        let (lattice, h) = match spec.mode {
            GridMode::Cartesian => cartesian_lattice(&spec)?,
            GridMode::Polar { n_theta } => polar_lattice(&spec, n_theta)?,
        };
        build::assemble(spec, lattice, h)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        spec: DomainSpec,
        h: f64,
        lattice: Lattice,
        slots: Vec<(u32, u32)>,
        positions: Vec<[f64; 2]>,
        class: Vec<NodeClass>,
        on_boundary: Vec<bool>,
        weights: Vec<f64>,
        fallbacks: usize,
        ops: build::Ops,
    ) -> Self {
        DiscreteDomain {
            spec,
            h,
            lattice,
            slots,
            positions,
            class,
            on_boundary,
            weights,
            fallbacks,
            dx: ops.dx,
            dy: ops.dy,
            dxx: ops.dxx,
            dxy: ops.dxy,
            dyy: ops.dyy,
            flux: ops.flux,
            laplace: ops.laplace,
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn shape(&self) -> Shape {
        self.spec.shape
    }

    /// Node spacing (radial spacing in polar mode).
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn position(&self, k: usize) -> [f64; 2] {
        self.positions[k]
    }

    pub fn class(&self, k: usize) -> NodeClass {
        self.class[k]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    /// True for nodes located on ∂Ω.
    pub fn on_boundary(&self, k: usize) -> bool {
        self.on_boundary[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes whose ghost extrapolation dropped below cubic order.
    pub fn stencil_fallbacks(&self) -> usize {
        self.fallbacks
    }

    pub fn excision(&self) -> Excision {
        self.spec.excision
    }

    pub fn cut(&self) -> Option<Cut> {
        self.spec.cut
    }

    pub fn euler_characteristic(&self) -> i32 {
        self.spec.shape.euler_characteristic()
    }

    /// Analytic area of Ω minus the excised region (where it lies inside Ω).
    pub fn analytic_area(&self) -> f64 {
        use std::f64::consts::PI;
        let base = self.spec.shape.area();
        match (self.spec.excision, self.spec.shape) {
            (Excision::None, _) => base,
            (Excision::Point { radius, .. }, _) => base - PI * radius * radius,
            (Excision::Collar { radius, half_width, .. }, s) => {
                let (lo, hi) = match s {
                    Shape::Disk { radius: big, .. } => (0.0, big),
                    Shape::Annulus { inner, outer, .. } => (inner, outer),
                    Shape::Rectangle { .. } => (0.0, f64::INFINITY),
                };
                let a = (radius - half_width).clamp(lo, hi);
                let b = (radius + half_width).clamp(lo, hi);
                base - PI * (b * b - a * a)
            }
        }
    }

    pub fn polar_info(&self) -> Option<PolarInfo> {
        match self.lattice.kind {
            LatticeKind::Polar { center, r0, dr, nr, nt, has_origin } => {
                Some(PolarInfo { center, r0, dr, n_rings: nr, n_theta: nt, has_origin })
            }
            LatticeKind::Cartesian { .. } => None,
        }
    }

    pub fn is_polar(&self) -> bool {
        matches!(self.lattice.kind, LatticeKind::Polar { .. })
    }

    /// Lattice slot `(i, j)` of node `k` (ring and angle index in polar mode).
    pub fn slot(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.slots[k];
        (i as usize, j as usize)
    }

    /// Node at lattice slot `(i, j)`, if active.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        let (n1, n2) = self.lattice.dims();
        if i >= n1 || j >= n2 {
            return None;
        }
        let n = self.lattice.slot_node[self.lattice.slot_index(i, j)];
        (n != NONE).then_some(n as usize)
    }

    pub fn lattice_dims(&self) -> (usize, usize) {
        self.lattice.dims()
    }

    /// Active node indices of polar ring `i` in angular order.
    pub fn ring(&self, i: usize) -> Vec<usize> {
        let info = self.polar_info().expect("ring() needs a polar domain");
        if info.has_origin && i == 0 {
            return self.node_at(0, 0).into_iter().collect();
        }
        (0..info.n_theta).filter_map(|j| self.node_at(i, j)).collect()
    }

    /// Gradient stencil operators `(∂x, ∂y)`.
    pub fn gradient_ops(&self) -> (&SparseOp, &SparseOp) {
        (&self.dx, &self.dy)
    }

    /// Hessian stencil operators `(∂xx, ∂xy, ∂yy)`.
    pub fn hessian_ops(&self) -> (&SparseOp, &SparseOp, &SparseOp) {
        (&self.dxx, &self.dxy, &self.dyy)
    }

    pub fn flux_op(&self) -> &FluxOp {
        &self.flux
    }

    /// Compact five-point (finite-volume) Laplacian, the linearization of the
    /// divergence-form mean curvature at a flat graph.
    pub fn laplace_op(&self) -> &SparseOp {
        &self.laplace
    }

    /// Layer index of every node counted from the boundary: 0 for nodes on
    /// ∂Ω or missing a direct neighbour, 1 for their direct neighbours, and so
    /// on up to `depth`; deeper nodes get `u8::MAX`.
    pub fn boundary_layers(&self, depth: u8) -> Vec<u8> {
        let n = self.len();
        let mut layer = vec![u8::MAX; n];
        let mut frontier = Vec::new();
        let neighbours = |k: usize| -> Vec<Option<usize>> {
            let (i, j) = self.slot(k);
            let mut out = Vec::with_capacity(4);
            for (axis, t) in [(lattice::Axis::A, 1), (lattice::Axis::A, -1), (lattice::Axis::B, 1), (lattice::Axis::B, -1)]
            {
                if self.is_polar() && axis == lattice::Axis::B && self.polar_info().unwrap().has_origin && i == 0 {
                    continue;
                }
                let slot = self.lattice.step((i, j), axis, t);
                out.push(slot.and_then(|s| self.lattice.node(s)).map(|v| v as usize));
            }
            out
        };
        for k in 0..n {
            if self.on_boundary[k] || neighbours(k).iter().any(|x| x.is_none()) {
                layer[k] = 0;
                frontier.push(k);
            }
        }
        for d in 1..=depth {
            let mut next = Vec::new();
            for &k in &frontier {
                for nb in neighbours(k).into_iter().flatten() {
                    if layer[nb] == u8::MAX {
                        layer[nb] = d;
                        next.push(nb);
                    }
                }
            }
            frontier = next;
        }
        layer
    }

    /// Quadrature `Σ w_k f_k` in node order with compensated summation.
    pub fn integrate(&self, f: &ScalarField) -> f64 {
        assert_eq!(f.len(), self.len(), "field does not live on this domain");
        let mut acc = Accumulator::default();
        for (w, v) in self.weights.iter().zip(f.values()) {
            acc.add(w * v);
        }
        acc.sum()
    }

    /// Quadrature of a closure evaluated at nodes.
    pub fn integrate_with(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let mut acc = Accumulator::default();
        for (k, w) in self.weights.iter().enumerate() {
            acc.add(w * f(k));
        }
        acc.sum()
    }

    /// Samples a closure at every node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        ScalarField::new(self.positions.iter().map(|&p| f(p)).collect())
    }

    /// Second-order central-difference gradient (ghost-completed near ∂Ω).
    pub fn gradient(&self, u: &ScalarField) -> VectorField {
        assert_eq!(u.len(), self.len(), "field does not live on this domain");
        VectorField::new(self.dx.apply_rel(u.values()), self.dy.apply_rel(u.values()))
    }

    /// Second-order Hessian; the mixed derivative is a centred cross stencil.
    pub fn hessian(&self, u: &ScalarField) -> TensorField {
        assert_eq!(u.len(), self.len(), "field does not live on this domain");
        let v = u.values();
        TensorField::new(self.dxx.apply_rel(v), self.dxy.apply_rel(v), self.dyy.apply_rel(v))
    }

    /// Divergence-form mean curvature `∇·(∇u/Q)` from face fluxes.
    pub fn mean_curvature_flux(&self, u: &ScalarField) -> ScalarField {
        let uv = u.values();
        let f = &self.flux;
        let mut out = vec![0.0; self.len()];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for fi in f.faces(k) {
                let nn = f.normal.row_dot_rel(fi, uv, uv[k]);
                let tt = f.tangent.row_dot_rel(fi, uv, uv[k]);
                s += f.coef[fi] * nn / (1.0 + nn * nn + tt * tt).sqrt();
            }
            *o = s;
        }
        ScalarField::new(out)
    }

    /// Divergence `∂x F1 + ∂y F2` of a nodal vector field (wide stencil).
    pub fn divergence(&self, f: &VectorField) -> ScalarField {
        let a = self.dx.apply_rel(f.x());
        let b = self.dy.apply_rel(f.y());
        ScalarField::new(a.iter().zip(&b).map(|(p, q)| p + q).collect())
    }

    /// Writes `x,y,<names...>,class` rows for the given columns.
    pub fn write_csv(&self, mut w: impl std::io::Write, columns: &[(&str, &[f64])]) -> Result<()> {
        let mut header = String::from("x,y");
        for (name, col) in columns {
            assert_eq!(col.len(), self.len(), "column {} does not live on this domain", name);
            header.push(',');
            header.push_str(name);
        }
        header.push_str(",node_class\n");
        w.write_all(header.as_bytes())?;
        for k in 0..self.len() {
            let p = self.positions[k];
            let mut line = format!("{:.16e},{:.16e}", p[0], p[1]);
            for (_, col) in columns {
                line.push_str(&format!(",{:.16e}", col[k]));
            }
            line.push(',');
            line.push_str(self.class[k].as_str());
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Neumaier compensated summation; deterministic for a fixed order.
#[derive(Debug, Default, Clone, Copy)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cartesian_lattice(spec: &DomainSpec) -> Result<(Lattice, f64)> {
    let h = spec.h;
    let (origin, nx, ny) = match spec.shape {
        Shape::Rectangle { min, max } => {
            let fx = (max[0] - min[0]) / h;
            let fy = (max[1] - min[1]) / h;
            let (nx, ny) = (fx.round(), fy.round());
            if (fx - nx).abs() > 1e-6 || (fy - ny).abs() > 1e-6 {
                return Err(Error::Config(format!(
                    "rectangle sides {}x{} are not multiples of h = {}",
                    max[0] - min[0],
                    max[1] - min[1],
                    h
                )));
            }
            (min, nx as usize + 1, ny as usize + 1)
        }
        Shape::Disk { center, radius: r } | Shape::Annulus { center, outer: r, .. } => {
            let n = (r / h - 1e-9).ceil() as usize;
            ([center[0] - n as f64 * h, center[1] - n as f64 * h], 2 * n + 1, 2 * n + 1)
        }
    };
    if nx < 5 || ny < 5 {
        return Err(Error::Config(format!("grid {}x{} too coarse; need at least 5 nodes per axis", nx, ny)));
    }
    let lattice =
        Lattice { kind: LatticeKind::Cartesian { origin, h, nx, ny }, slot_node: vec![NONE; nx * ny] };
    Ok((lattice, h))
}

fn polar_lattice(spec: &DomainSpec, n_theta: Option<usize>) -> Result<(Lattice, f64)> {
    let (center, r0, r1, has_origin) = match spec.shape {
        Shape::Disk { center, radius } => (center, 0.0, radius, true),
        Shape::Annulus { center, inner, outer } => (center, inner, outer, false),
        Shape::Rectangle { .. } => {
            return Err(Error::Config("polar grid mode requires a disk or annulus".into()));
        }
    };
    match spec.excision {
        Excision::Point { center: c, .. } | Excision::Collar { center: c, .. } if dist(c, center) > 1e-12 => {
            return Err(Error::Config("polar excision must be centred at the polar centre".into()));
        }
        _ => {}
    }
    if let Some(Cut::Circle { center: c, .. }) = spec.cut {
        if dist(c, center) > 1e-12 {
            return Err(Error::Config("polar cut circle must be centred at the polar centre".into()));
        }
    }
    let cells = ((r1 - r0) / spec.h).round().max(1.0) as usize;
    let dr = (r1 - r0) / cells as f64;
    let nr = cells + 1;
    let nt = match n_theta {
        Some(nt) => nt,
        None => {
            let raw = (2.0 * std::f64::consts::PI * r1 / spec.h).ceil() as usize;
            raw.div_ceil(8) * 8
        }
    };
    if nt < 8 || nt % 8 != 0 {
        return Err(Error::Config(format!("n_theta = {} must be a positive multiple of 8", nt)));
    }
    if nr < 5 {
        return Err(Error::Config(format!("polar grid has {} rings; need at least 5", nr)));
    }
    let lattice = Lattice {
        kind: LatticeKind::Polar { center, r0, dr, nr, nt, has_origin },
        slot_node: vec![NONE; nr * nt],
    };
    Ok((lattice, dr))
}
