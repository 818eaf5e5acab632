//! Node enumeration, quadrature weights and stencil assembly.

use std::f64::consts::PI;

use smallvec::SmallVec;

use super::lattice::{resolve, Axis, Lattice, LatticeKind, Resolved, NONE};
use super::sparse::{axpy, compress, SparseOp, Stencil};
use super::{dist, DiscreteDomain, DomainSpec, Excision, FluxOp, NodeClass};
use crate::{Error, Result};

pub(crate) struct Ops {
    pub dx: SparseOp,
    pub dy: SparseOp,
    pub dxx: SparseOp,
    pub dxy: SparseOp,
    pub dyy: SparseOp,
    pub flux: FluxOp,
    pub laplace: SparseOp,
}

/// Subsamples per axis when clipping a Cartesian cell against ∂Ω.
const SUPERSAMPLE: usize = 16;

/// Coefficients `(a1, a2)` of the five-point first θ-derivative that is exact
/// on the Fourier modes `e^{imθ}`, `|m| ≤ 2`.
pub(crate) fn theta_d1(d: f64) -> (f64, f64) {
    let s32 = (1.5 * d).sin();
    let s12 = (0.5 * d).sin();
    let a1 = d.sin() / (2.0 * s32 * s12);
    let a2 = -s12 / (2.0 * (2.0 * d).sin() * s32);
    (a1, a2)
}

/// Coefficients `(b0, b1, b2)` of the five-point second θ-derivative exact on
/// the Fourier modes `|m| ≤ 2`.
pub(crate) fn theta_d2(d: f64) -> (f64, f64, f64) {
    let s12 = (0.5 * d).sin();
    let s32 = (1.5 * d).sin();
    let s1 = d.sin();
    let b1 = s1 * s1 / (4.0 * s12.powi(3) * s32);
    let b2 = -s12 / (4.0 * s1 * s1 * s32);
    (-2.0 * b1 - 2.0 * b2, b1, b2)
}

fn excised(spec: &DomainSpec, p: [f64; 2], r_polar: Option<f64>, tol: f64) -> bool {
    match (spec.excision, r_polar) {
        (Excision::None, _) => false,
        (Excision::Point { radius, .. }, Some(r)) => r < radius - tol,
        (Excision::Collar { radius, half_width, .. }, Some(r)) => (r - radius).abs() < half_width - tol,
        (Excision::Point { center, radius }, None) => dist(p, center) < radius - tol,
        (Excision::Collar { center, radius, half_width }, None) => {
            (dist(p, center) - radius).abs() < half_width - tol
        }
    }
}

fn clearance(e: &Excision, p: [f64; 2]) -> f64 {
    match *e {
        Excision::None => f64::INFINITY,
        Excision::Point { center, radius } => dist(p, center) - radius,
        Excision::Collar { center, radius, half_width } => (dist(p, center) - radius).abs() - half_width,
    }
}

/// Length of `[a, b]` minus the excised radial intervals, returned as pieces.
fn radial_pieces(spec: &DomainSpec, a: f64, b: f64) -> SmallVec<[(f64, f64); 2]> {
    let mut out = SmallVec::new();
    let cut = match spec.excision {
        Excision::None => None,
        Excision::Point { radius, .. } => Some((f64::NEG_INFINITY, radius)),
        Excision::Collar { radius, half_width, .. } => Some((radius - half_width, radius + half_width)),
    };
    match cut {
        None => out.push((a, b)),
        Some((lo, hi)) => {
            if a < lo {
                out.push((a, b.min(lo)));
            }
            if b > hi {
                out.push((a.max(hi), b));
            }
        }
    }
    out.retain(|p: &mut (f64, f64)| p.1 > p.0);
    out
}

pub(crate) fn assemble(spec: DomainSpec, mut lattice: Lattice, h: f64) -> Result<DiscreteDomain> {
    let (n1, n2) = lattice.dims();
    let mut slots = Vec::new();
    let mut positions = Vec::new();
    let mut on_boundary = Vec::new();
    let mut weights = Vec::new();
    match lattice.kind.clone() {
        LatticeKind::Cartesian { .. } => {
            let mask = cartesian_mask(&spec, &lattice, h);
            for i in 0..n1 {
                for j in 0..n2 {
                    if !mask[i * n2 + j] {
                        continue;
                    }
                    let p = lattice.position(i, j);
                    let sd = spec.shape.signed_distance(p);
                    { let si = lattice.slot_index(i, j); lattice.slot_node[si] = positions.len() as u32; }
                    slots.push((i as u32, j as u32));
                    positions.push(p);
                    on_boundary.push(sd.abs() <= 1e-9 * h);
                    weights.push(cartesian_weight(&spec, p, h));
                }
            }
            // Cells of dropped or outside nodes that still overlap Ω hand
            // their area to the nearest active neighbour.
            for i in 0..n1 {
                for j in 0..n2 {
                    if mask[i * n2 + j] {
                        continue;
                    }
                    let p = lattice.position(i, j);
                    if spec.shape.signed_distance(p) > 0.7072 * h {
                        continue;
                    }
                    let w = cartesian_weight(&spec, p, h);
                    if w == 0.0 {
                        continue;
                    }
                    let mut best: Option<(f64, usize)> = None;
                    for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)] {
                        let (a, b) = (i as isize + di, j as isize + dj);
                        if a < 0 || b < 0 || a >= n1 as isize || b >= n2 as isize {
                            continue;
                        }
                        let node = lattice.slot_node[lattice.slot_index(a as usize, b as usize)];
                        if node == NONE {
                            continue;
                        }
                        let d2 = (di * di + dj * dj) as f64;
                        if best.is_none_or(|(bd, _)| d2 < bd) {
                            best = Some((d2, node as usize));
                        }
                    }
                    if let Some((_, k)) = best {
                        weights[k] += w;
                    }
                }
            }
        }
        LatticeKind::Polar { center, r0, dr, nr, nt, has_origin } => {
            let dtheta = 2.0 * PI / nt as f64;
            let r_max = r0 + (nr - 1) as f64 * dr;
            for i in 0..nr {
                let r = r0 + i as f64 * dr;
                if excised(&spec, center, Some(r), 1e-12 * dr) {
                    continue;
                }
                let a = (r - 0.5 * dr).max(r0);
                let b = (r + 0.5 * dr).min(r_max);
                let ring_area: f64 = radial_pieces(&spec, a, b).iter().map(|&(p, q)| 0.5 * (q * q - p * p)).sum();
                let boundary = i == nr - 1 || (!has_origin && i == 0);
                if has_origin && i == 0 {
                    let id = positions.len() as u32;
                    for j in 0..nt {
                        { let si = lattice.slot_index(0, j); lattice.slot_node[si] = id; }
                    }
                    slots.push((0, 0));
                    positions.push(center);
                    on_boundary.push(false);
                    weights.push(ring_area * 2.0 * PI);
                    continue;
                }
                for j in 0..nt {
                    { let si = lattice.slot_index(i, j); lattice.slot_node[si] = positions.len() as u32; }
                    slots.push((i as u32, j as u32));
                    positions.push(lattice.position(i, j));
                    on_boundary.push(boundary);
                    weights.push(ring_area * dtheta);
                }
            }
        }
    }
    if positions.len() < 9 {
        return Err(Error::Config(format!("only {} active nodes; refine h", positions.len())));
    }
    if let Some(cut) = spec.cut {
        if let Some(k) = positions.iter().position(|&p| cut.level(p).abs() <= 1e-9 * h) {
            return Err(Error::Precondition(format!(
                "cut curve passes through node {} at {:?}; flagged facets must separate nodes",
                k, positions[k]
            )));
        }
    }
    let side: Vec<bool> = match spec.cut {
        Some(cut) => positions.iter().map(|&p| cut.level(p) > 0.0).collect(),
        None => vec![true; positions.len()],
    };
    let same_side = move |a: u32, b: u32| side[a as usize] == side[b as usize];

    let n = positions.len();
    let mut ghost = vec![false; n];
    let mut fallback = vec![false; n];
    let ops = match lattice.kind {
        LatticeKind::Cartesian { h, .. } => {
            cartesian_ops(&lattice, &slots, h, &same_side, &mut ghost, &mut fallback)?
        }
        LatticeKind::Polar { .. } => polar_ops(&lattice, &slots, &same_side, &mut ghost, &mut fallback)?,
    };
    let class = (0..n)
        .map(|k| if ghost[k] || on_boundary[k] { NodeClass::BoundaryAdjacent } else { NodeClass::Interior })
        .collect();
    let fallbacks = fallback.iter().filter(|&&f| f).count();
    Ok(DiscreteDomain::from_parts(spec, h, lattice, slots, positions, class, on_boundary, weights, fallbacks, ops))
}

/// Active Cartesian slots. Nodes that would have no same-side neighbour
/// along some axis cannot carry a stencil and are dropped, repeatedly, so
/// every remaining node has at least two nodes on each of its lattice lines.
fn cartesian_mask(spec: &DomainSpec, lattice: &Lattice, h: f64) -> Vec<bool> {
    let (n1, n2) = lattice.dims();
    let mut mask = vec![false; n1 * n2];
    let mut side = vec![true; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let p = lattice.position(i, j);
            mask[i * n2 + j] =
                spec.shape.signed_distance(p) <= 1e-9 * h && !excised(spec, p, None, 1e-12 * h);
            if let Some(cut) = spec.cut {
                side[i * n2 + j] = cut.level(p) > 0.0;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n1 {
            for j in 0..n2 {
                let s = i * n2 + j;
                if !mask[s] {
                    continue;
                }
                let ok = |t: Option<usize>| t.is_some_and(|t| mask[t] && side[t] == side[s]);
                let x_ok = ok(i.checked_sub(1).map(|a| a * n2 + j)) || ok((i + 1 < n1).then(|| (i + 1) * n2 + j));
                let y_ok = ok(j.checked_sub(1).map(|b| i * n2 + b)) || ok((j + 1 < n2).then(|| i * n2 + j + 1));
                if !(x_ok && y_ok) {
                    mask[s] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return mask;
        }
    }
}

fn cartesian_weight(spec: &DomainSpec, p: [f64; 2], h: f64) -> f64 {
    let margin = 0.7072 * h;
    let sd = spec.shape.signed_distance(p);
    if sd < -margin && clearance(&spec.excision, p) > margin {
        return h * h;
    }
    let s = SUPERSAMPLE;
    let mut inside = 0usize;
    for a in 0..s {
        for b in 0..s {
            let q = [p[0] + h * ((a as f64 + 0.5) / s as f64 - 0.5), p[1] + h * ((b as f64 + 0.5) / s as f64 - 0.5)];
            if spec.shape.signed_distance(q) <= 0.0 && !spec.excision.contains(q) {
                inside += 1;
            }
        }
    }
    h * h * inside as f64 / (s * s) as f64
}

struct Resolver<'a> {
    lat: &'a Lattice,
    slots: &'a [(u32, u32)],
    same_side: &'a dyn Fn(u32, u32) -> bool,
}

impl Resolver<'_> {
    fn get(&self, k: usize, axis: Axis, m: isize, ghost: &mut bool, fallback: &mut bool) -> Result<Resolved> {
        let (i, j) = self.slots[k];
        let (r, g, f) = resolve(self.lat, (i as usize, j as usize), axis, m, self.same_side)?;
        *ghost |= g;
        *fallback |= f;
        Ok(r)
    }
}

fn combine(res: &Resolved, scale: f64, dst: &mut Stencil) {
    for &(k, w) in res {
        dst.push((k, scale * w));
    }
}

/// `Σ_n w_n · op[n]` over the resolved nodes.
fn combine_rows(res: &Resolved, scale: f64, op: &SparseOp, dst: &mut Stencil) {
    for &(k, w) in res {
        axpy(dst, scale * w, &op.row_stencil(k as usize));
    }
}

fn finish(mut s: Stencil) -> Stencil {
    compress(&mut s);
    s
}

fn laplace_from_flux(flux: &FluxOp, n: usize) -> SparseOp {
    let mut lap = SparseOp::new();
    for k in 0..n {
        let mut s = Stencil::new();
        for f in flux.faces(k) {
            axpy(&mut s, flux.coef[f], &flux.normal.row_stencil(f));
        }
        lap.push_row(&finish(s));
    }
    lap
}

fn cartesian_ops(
    lat: &Lattice,
    slots: &[(u32, u32)],
    h: f64,
    same_side: &dyn Fn(u32, u32) -> bool,
    ghost: &mut [bool],
    fallback: &mut [bool],
) -> Result<Ops> {
    let n = slots.len();
    let rs = Resolver { lat, slots, same_side };
    let mut nb: Vec<[Resolved; 4]> = Vec::with_capacity(n);
    for k in 0..n {
        let (g, f) = (&mut ghost[k], &mut fallback[k]);
        nb.push([
            rs.get(k, Axis::A, 1, g, f)?,
            rs.get(k, Axis::A, -1, g, f)?,
            rs.get(k, Axis::B, 1, g, f)?,
            rs.get(k, Axis::B, -1, g, f)?,
        ]);
    }
    let (mut dx, mut dy, mut dxx, mut dyy) = (SparseOp::new(), SparseOp::new(), SparseOp::new(), SparseOp::new());
    for (k, [xp, xm, yp, ym]) in nb.iter().enumerate() {
        let k32 = k as u32;
        let mut s = Stencil::new();
        combine(xp, 0.5 / h, &mut s);
        combine(xm, -0.5 / h, &mut s);
        dx.push_row(&finish(s));
        let mut s = Stencil::new();
        combine(yp, 0.5 / h, &mut s);
        combine(ym, -0.5 / h, &mut s);
        dy.push_row(&finish(s));
        let mut s = Stencil::new();
        combine(xp, 1.0 / (h * h), &mut s);
        combine(xm, 1.0 / (h * h), &mut s);
        s.push((k32, -2.0 / (h * h)));
        dxx.push_row(&finish(s));
        let mut s = Stencil::new();
        combine(yp, 1.0 / (h * h), &mut s);
        combine(ym, 1.0 / (h * h), &mut s);
        s.push((k32, -2.0 / (h * h)));
        dyy.push_row(&finish(s));
    }
    let mut dxy = SparseOp::new();
    for [xp, xm, yp, ym] in nb.iter() {
        let mut s = Stencil::new();
        combine_rows(yp, 0.25 / h, &dx, &mut s);
        combine_rows(ym, -0.25 / h, &dx, &mut s);
        combine_rows(xp, 0.25 / h, &dy, &mut s);
        combine_rows(xm, -0.25 / h, &dy, &mut s);
        dxy.push_row(&finish(s));
    }
    let mut flux = FluxOp { face_ptr: vec![0], ..Default::default() };
    for (k, res) in nb.iter().enumerate() {
        let k32 = k as u32;
        // (neighbour, sign, tangential operator)
        let faces = [(&res[0], 1.0, &dy), (&res[1], -1.0, &dy), (&res[2], 1.0, &dx), (&res[3], -1.0, &dx)];
        for (r, sign, top) in faces {
            let mut nrm = Stencil::new();
            combine(r, sign / h, &mut nrm);
            nrm.push((k32, -sign / h));
            let mut tan = Stencil::new();
            axpy(&mut tan, 0.5, &top.row_stencil(k));
            combine_rows(r, 0.5, top, &mut tan);
            flux.coef.push(sign / h);
            flux.normal.push_row(&finish(nrm));
            flux.tangent.push_row(&finish(tan));
        }
        flux.face_ptr.push(flux.coef.len());
    }
    let laplace = laplace_from_flux(&flux, n);
    Ok(Ops { dx, dy, dxx, dxy, dyy, flux, laplace })
}

fn polar_ops(
    lat: &Lattice,
    slots: &[(u32, u32)],
    same_side: &dyn Fn(u32, u32) -> bool,
    ghost: &mut [bool],
    fallback: &mut [bool],
) -> Result<Ops> {
    let LatticeKind::Polar { r0, dr, nt, has_origin, .. } = lat.kind else { unreachable!() };
    let n = slots.len();
    let dth = 2.0 * PI / nt as f64;
    let (a1, a2) = theta_d1(dth);
    let (b0, b1, b2) = theta_d2(dth);
    let rs = Resolver { lat, slots, same_side };
    let origin_node = if has_origin { lat.node((0, 0)) } else { None };

    // Per node: radial ±1 and angular ±1, ±2 neighbours.
    let mut nb: Vec<[Resolved; 6]> = Vec::with_capacity(n);
    for k in 0..n {
        if Some(k as u32) == origin_node {
            nb.push(Default::default());
            continue;
        }
        let (g, f) = (&mut ghost[k], &mut fallback[k]);
        nb.push([
            rs.get(k, Axis::A, 1, g, f)?,
            rs.get(k, Axis::A, -1, g, f)?,
            rs.get(k, Axis::B, 1, g, f)?,
            rs.get(k, Axis::B, -1, g, f)?,
            rs.get(k, Axis::B, 2, g, f)?,
            rs.get(k, Axis::B, -2, g, f)?,
        ]);
    }
    let origin_stencils = |k: u32| -> Result<[Stencil; 5]> {
        let ring1 = |j: usize| -> Result<u32> {
            match lat.node((1, j)) {
                Some(m) if same_side(k, m) => Ok(m),
                _ => Err(Error::Config("origin stencil needs the full first ring".into())),
            }
        };
        let e = [ring1(0)?, ring1(nt / 4)?, ring1(nt / 2)?, ring1(3 * nt / 4)?];
        let d = [ring1(nt / 8)?, ring1(3 * nt / 8)?, ring1(5 * nt / 8)?, ring1(7 * nt / 8)?];
        let i2 = 1.0 / (dr * dr);
        Ok([
            finish(Stencil::from_slice(&[(e[0], 0.5 / dr), (e[2], -0.5 / dr)])),
            finish(Stencil::from_slice(&[(e[1], 0.5 / dr), (e[3], -0.5 / dr)])),
            finish(Stencil::from_slice(&[(e[0], i2), (e[2], i2), (k, -2.0 * i2)])),
            finish(Stencil::from_slice(&[
                (d[0], 0.5 * i2),
                (d[1], -0.5 * i2),
                (d[2], 0.5 * i2),
                (d[3], -0.5 * i2),
            ])),
            finish(Stencil::from_slice(&[(e[1], i2), (e[3], i2), (k, -2.0 * i2)])),
        ])
    };

    // Pass 1: ∂θ and the purely radial / purely angular derivatives.
    let mut dth_op = SparseOp::new();
    for (k, res) in nb.iter().enumerate() {
        if Some(k as u32) == origin_node {
            dth_op.push_row(&[]);
            continue;
        }
        let mut s = Stencil::new();
        combine(&res[2], a1, &mut s);
        combine(&res[3], -a1, &mut s);
        combine(&res[4], a2, &mut s);
        combine(&res[5], -a2, &mut s);
        dth_op.push_row(&finish(s));
    }
    let ring_of = |k: usize| slots[k].0 as usize;
    let angle_of = |k: usize| 2.0 * PI * slots[k].1 as f64 / nt as f64;

    let (mut dx, mut dy, mut dxx, mut dxy, mut dyy) =
        (SparseOp::new(), SparseOp::new(), SparseOp::new(), SparseOp::new(), SparseOp::new());
    for (k, res) in nb.iter().enumerate() {
        if Some(k as u32) == origin_node {
            let [sx, sy, sxx, sxy, syy] = origin_stencils(k as u32)?;
            dx.push_row(&sx);
            dy.push_row(&sy);
            dxx.push_row(&sxx);
            dxy.push_row(&sxy);
            dyy.push_row(&syy);
            continue;
        }
        let k32 = k as u32;
        let r = r0 + ring_of(k) as f64 * dr;
        let (sn, cs) = angle_of(k).sin_cos();
        let mut ur = Stencil::new();
        combine(&res[0], 0.5 / dr, &mut ur);
        combine(&res[1], -0.5 / dr, &mut ur);
        let mut urr = Stencil::new();
        combine(&res[0], 1.0 / (dr * dr), &mut urr);
        combine(&res[1], 1.0 / (dr * dr), &mut urr);
        urr.push((k32, -2.0 / (dr * dr)));
        let ut = dth_op.row_stencil(k);
        let mut utt = Stencil::new();
        utt.push((k32, b0));
        combine(&res[2], b1, &mut utt);
        combine(&res[3], b1, &mut utt);
        combine(&res[4], b2, &mut utt);
        combine(&res[5], b2, &mut utt);
        let mut urt = Stencil::new();
        combine_rows(&res[0], 0.5 / dr, &dth_op, &mut urt);
        combine_rows(&res[1], -0.5 / dr, &dth_op, &mut urt);

        let mut s = Stencil::new();
        axpy(&mut s, cs, &ur);
        axpy(&mut s, -sn / r, &ut);
        dx.push_row(&finish(s));
        let mut s = Stencil::new();
        axpy(&mut s, sn, &ur);
        axpy(&mut s, cs / r, &ut);
        dy.push_row(&finish(s));

        let (c2, s2, cs2) = (cs * cs, sn * sn, cs * sn);
        let mut s = Stencil::new();
        axpy(&mut s, c2, &urr);
        axpy(&mut s, -2.0 * cs2 / r, &urt);
        axpy(&mut s, s2 / (r * r), &utt);
        axpy(&mut s, s2 / r, &ur);
        axpy(&mut s, 2.0 * cs2 / (r * r), &ut);
        dxx.push_row(&finish(s));
        let mut s = Stencil::new();
        axpy(&mut s, s2, &urr);
        axpy(&mut s, 2.0 * cs2 / r, &urt);
        axpy(&mut s, c2 / (r * r), &utt);
        axpy(&mut s, c2 / r, &ur);
        axpy(&mut s, -2.0 * cs2 / (r * r), &ut);
        dyy.push_row(&finish(s));
        let mut s = Stencil::new();
        axpy(&mut s, cs2, &urr);
        axpy(&mut s, (c2 - s2) / r, &urt);
        axpy(&mut s, -cs2 / (r * r), &utt);
        axpy(&mut s, -cs2 / r, &ur);
        axpy(&mut s, -(c2 - s2) / (r * r), &ut);
        dxy.push_row(&finish(s));
    }

    // Directional derivative e·∇u at a resolved virtual point.
    let directional = |res: &Resolved, e: [f64; 2], scale: f64, dst: &mut Stencil| {
        combine_rows(res, scale * e[0], &dx, dst);
        combine_rows(res, scale * e[1], &dy, dst);
    };
    let self_res = |k: usize| -> Resolved {
        let mut r = Resolved::new();
        r.push((k as u32, 1.0));
        r
    };

    let mut flux = FluxOp { face_ptr: vec![0], ..Default::default() };
    for (k, res) in nb.iter().enumerate() {
        let k32 = k as u32;
        if Some(k32) == origin_node {
            let coef = 2.0 * dth / (PI * dr);
            for j in 0..nt {
                let m = lat.node((1, j)).expect("origin needs ring 1");
                let (st, ct) = (2.0 * PI * j as f64 / nt as f64).sin_cos();
                let e_t = [-st, ct];
                let mut nrm = Stencil::new();
                nrm.push((m, 1.0 / dr));
                nrm.push((k32, -1.0 / dr));
                let mut tan = Stencil::new();
                directional(&self_res(k), e_t, 0.5, &mut tan);
                directional(&self_res(m as usize), e_t, 0.5, &mut tan);
                flux.coef.push(coef);
                flux.normal.push_row(&finish(nrm));
                flux.tangent.push_row(&finish(tan));
            }
            flux.face_ptr.push(flux.coef.len());
            continue;
        }
        let r = r0 + ring_of(k) as f64 * dr;
        let th = angle_of(k);
        let e_t = [-th.sin(), th.cos()];
        for (nbr, sign) in [(&res[0], 1.0), (&res[1], -1.0)] {
            let rf = r + sign * 0.5 * dr;
            let mut nrm = Stencil::new();
            combine(nbr, sign / dr, &mut nrm);
            nrm.push((k32, -sign / dr));
            let mut tan = Stencil::new();
            directional(&self_res(k), e_t, 0.5, &mut tan);
            directional(nbr, e_t, 0.5, &mut tan);
            flux.coef.push(sign * rf / (r * dr));
            flux.normal.push_row(&finish(nrm));
            flux.tangent.push_row(&finish(tan));
        }
        for (nbr, sign) in [(&res[2], 1.0), (&res[3], -1.0)] {
            let tf = th + sign * 0.5 * dth;
            let e_r = [tf.cos(), tf.sin()];
            let mut nrm = Stencil::new();
            combine(nbr, sign / (r * dth), &mut nrm);
            nrm.push((k32, -sign / (r * dth)));
            let mut tan = Stencil::new();
            directional(&self_res(k), e_r, 0.5, &mut tan);
            directional(nbr, e_r, 0.5, &mut tan);
            flux.coef.push(sign / (r * dth));
            flux.normal.push_row(&finish(nrm));
            flux.tangent.push_row(&finish(tan));
        }
        flux.face_ptr.push(flux.coef.len());
    }
    let laplace = laplace_from_flux(&flux, n);
    Ok(Ops { dx, dy, dxx, dxy, dyy, flux, laplace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_stencils_exact_on_low_modes() {
        for nt in [8usize, 16, 64, 808] {
            let d = 2.0 * PI / nt as f64;
            let (a1, a2) = theta_d1(d);
            let (b0, b1, b2) = theta_d2(d);
            for m in 0..=2 {
                let m = m as f64;
                let d1 = 2.0 * (a1 * (m * d).sin() + a2 * (2.0 * m * d).sin());
                let d2 = b0 + 2.0 * b1 * (m * d).cos() + 2.0 * b2 * (2.0 * m * d).cos();
                assert!((d1 - m).abs() < 1e-9 * (1.0 + m), "nt={} m={} d1={}", nt, m, d1);
                assert!((d2 + m * m).abs() < 1e-7 * (1.0 + m * m), "nt={} m={} d2={}", nt, m, d2);
            }
        }
    }

    #[test]
    fn radial_pieces_respect_collar() {
        let spec = DomainSpec::new(super::super::Shape::unit_disk(), 0.1).excise(Excision::Collar {
            center: [0.0; 2],
            radius: 0.5,
            half_width: 0.1,
        });
        let p = radial_pieces(&spec, 0.35, 0.65);
        assert_eq!(p.len(), 2);
        assert!((p[0].1 - 0.4).abs() < 1e-15 && (p[1].0 - 0.6).abs() < 1e-15);
    }
}
