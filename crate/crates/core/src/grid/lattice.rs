//! Index lattices behind a [`DiscreteDomain`](super::DiscreteDomain) and the
//! resolution of virtual stencil points into combinations of real nodes.

use smallvec::SmallVec;

use crate::{Error, Result};

pub(crate) const NONE: u32 = u32::MAX;

/// The two lattice directions; `A` is x (Cartesian) or r (polar), `B` is y or θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    A,
    B,
}

#[derive(Debug, Clone)]
pub(crate) enum LatticeKind {
    Cartesian { origin: [f64; 2], h: f64, nx: usize, ny: usize },
    Polar { center: [f64; 2], r0: f64, dr: f64, nr: usize, nt: usize, has_origin: bool },
}

/// Lattice slots `(i, j)` and their map to active node indices.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub kind: LatticeKind,
    pub slot_node: Vec<u32>,
}

/// Real nodes and weights whose combination stands for a virtual lattice value.
pub(crate) type Resolved = SmallVec<[(u32, f64); 4]>;

impl Lattice {
    pub fn dims(&self) -> (usize, usize) {
        match self.kind {
            LatticeKind::Cartesian { nx, ny, .. } => (nx, ny),
            LatticeKind::Polar { nr, nt, .. } => (nr, nt),
        }
    }

    pub fn slot_index(&self, i: usize, j: usize) -> usize {
        let (_, n2) = self.dims();
        i * n2 + j
    }

    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        match self.kind {
            LatticeKind::Cartesian { origin, h, .. } => [origin[0] + i as f64 * h, origin[1] + j as f64 * h],
            LatticeKind::Polar { center, .. } => {
                let (r, t) = self.polar_coords(i, j);
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            }
        }
    }

    pub fn polar_coords(&self, i: usize, j: usize) -> (f64, f64) {
        match self.kind {
            LatticeKind::Polar { r0, dr, nt, .. } => {
                (r0 + i as f64 * dr, 2.0 * std::f64::consts::PI * j as f64 / nt as f64)
            }
            LatticeKind::Cartesian { .. } => unreachable!("polar coordinates of a Cartesian lattice"),
        }
    }

    /// Canonical slot reached from `(i, j)` after `t` steps along `axis`.
    pub fn step(&self, (i, j): (usize, usize), axis: Axis, t: isize) -> Option<(usize, usize)> {
        match self.kind {
            LatticeKind::Cartesian { nx, ny, .. } => {
                let (a, b) = match axis {
                    Axis::A => (i as isize + t, j as isize),
                    Axis::B => (i as isize, j as isize + t),
                };
                if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                    None
                } else {
                    Some((a as usize, b as usize))
                }
            }
            LatticeKind::Polar { nr, nt, has_origin, .. } => match axis {
                Axis::A => {
                    let a = i as isize + t;
                    if a >= nr as isize {
                        None
                    } else if a > 0 {
                        Some((a as usize, j))
                    } else if !has_origin {
                        if a == 0 {
                            Some((0, j))
                        } else {
                            None
                        }
                    } else if a == 0 {
                        Some((0, 0))
                    } else if (-a) as usize >= nr {
                        None
                    } else {
                        Some(((-a) as usize, (j + nt / 2) % nt))
                    }
                }
                Axis::B => {
                    if has_origin && i == 0 {
                        return Some((0, 0));
                    }
                    let b = (j as isize + t).rem_euclid(nt as isize) as usize;
                    Some((i, b))
                }
            },
        }
    }

    pub fn node(&self, slot: (usize, usize)) -> Option<u32> {
        let n = self.slot_node[self.slot_index(slot.0, slot.1)];
        (n != NONE).then_some(n)
    }
}

/// Lagrange weights at `target` for nodes at positions `xs`.
pub(crate) fn lagrange_weights(xs: &[f64], target: f64) -> SmallVec<[f64; 4]> {
    let mut w = SmallVec::new();
    for (a, &xa) in xs.iter().enumerate() {
        let mut l = 1.0;
        for (b, &xb) in xs.iter().enumerate() {
            if a != b {
                l *= (target - xb) / (xa - xb);
            }
        }
        w.push(l);
    }
    w
}

/// Resolves the value at `m` steps along `axis` from the base slot.
///
/// A reachable node on the same side of the cut is used directly. Otherwise
/// the value is extrapolated with a cubic through the last reachable node and
/// the three before it, dropping order only when fewer nodes exist. The
/// boolean is true when the extrapolation order had to drop.
/// Support size of the ghost extrapolation.
pub(crate) const GHOST_POINTS: usize = 5;

pub(crate) fn resolve(
    lat: &Lattice,
    base: (usize, usize),
    axis: Axis,
    m: isize,
    same_side: &dyn Fn(u32, u32) -> bool,
) -> Result<(Resolved, bool, bool)> {
    let base_node = lat.node(base).expect("base slot must be active");
    let s = m.signum();
    let n = m.abs();
    let usable = |t: isize| -> Option<u32> {
        let slot = lat.step(base, axis, t)?;
        let k = lat.node(slot)?;
        same_side(base_node, k).then_some(k)
    };
    let mut e = 0;
    while e < n {
        if usable(s * (e + 1)).is_some() {
            e += 1;
        } else {
            break;
        }
    }
    if e == n {
        let mut r = Resolved::new();
        r.push((usable(s * n).unwrap(), 1.0));
        return Ok((r, false, false));
    }
    let mut xs: SmallVec<[f64; 6]> = SmallVec::new();
    let mut ks: SmallVec<[u32; 6]> = SmallVec::new();
    for back in 0..GHOST_POINTS as isize {
        let off = e - back;
        let k = if off == 0 { Some(base_node) } else { usable(s * off) };
        match k {
            Some(k) => {
                xs.push(off as f64);
                ks.push(k);
            }
            None => break,
        }
    }
    if xs.len() < 2 {
        return Err(Error::Config(format!(
            "domain too small for stencil: node {} has fewer than two nodes along an axis",
            base_node
        )));
    }
    let w = lagrange_weights(&xs, n as f64);
    let r = ks.iter().zip(w.iter()).map(|(&k, &w)| (k, w)).collect();
    Ok((r, true, xs.len() < 4))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_extrapolation_weights() {
        let w = lagrange_weights(&[0.0, -1.0, -2.0, -3.0], 1.0);
        let expect = [4.0, -6.0, 4.0, -1.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_radial_step_crosses_origin() {
        let lat = Lattice {
            kind: LatticeKind::Polar { center: [0.0; 2], r0: 0.0, dr: 0.1, nr: 5, nt: 8, has_origin: true },
            slot_node: vec![0; 40],
        };
        assert_eq!(lat.step((1, 3), Axis::A, -1), Some((0, 0)));
        assert_eq!(lat.step((1, 3), Axis::A, -2), Some((1, 7)));
        assert_eq!(lat.step((4, 3), Axis::A, 1), None);
        assert_eq!(lat.step((2, 7), Axis::B, 2), Some((2, 1)));
    }
}
