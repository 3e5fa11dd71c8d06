//! Tree×ℝ with the ℓ² product metric.

use serde::Serialize;

use super::tree::{TreePoint, WeightedTree};
use super::SpaceError;
use crate::num::Frac;

#[derive(Clone, Debug, Serialize)]
pub struct ProductSpace {
    pub tree: WeightedTree,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductPoint {
    pub tree: TreePoint,
    pub height: f64,
}

impl ProductPoint {
    pub fn new(tree: TreePoint, height: f64) -> ProductPoint {
        ProductPoint { tree, height }
    }

    pub fn origin() -> ProductPoint {
        ProductPoint { tree: TreePoint::root(), height: 0.0 }
    }
}

/// Squared distance, at parameter `sigma`, from the planar model of a
/// product segment: tree coordinate `sigma*dt` (foot `u`, offset `delta`)
/// and height `h0 + sigma*dh`, to a point at height `xh`.
fn seg_sq(sigma: f64, dt: f64, dh: f64, h0: f64, u: f64, delta: f64, xh: f64) -> f64 {
    let e = (sigma * dt - u).abs() + delta;
    let v = h0 + sigma * dh - xh;
    e * e + v * v
}

/// Minimum over σ∈[0,1] of the squared distance described in [`seg_sq`];
/// returns (squared distance, σ). The function is the maximum of two convex
/// quadratics, so the optimum is at a clamped vertex of either one, at the
/// switch point σ = u/dt, or at an endpoint.
pub fn product_segment_sq(dt: f64, dh: f64, h0: f64, u: f64, delta: f64, xh: f64) -> (f64, f64) {
    let vv = dt * dt + dh * dh;
    let mut cands = [0.0, 1.0, 0.0, 0.0, 0.0];
    let mut k = 2;
    if vv > 0.0 {
        for cx in [u - delta, u + delta] {
            cands[k] = ((cx * dt + (xh - h0) * dh) / vv).clamp(0.0, 1.0);
            k += 1;
        }
    }
    if dt > 0.0 {
        cands[k] = (u / dt).clamp(0.0, 1.0);
        k += 1;
    }
    cands[..k]
        .iter()
        .map(|&s| (seg_sq(s, dt, dh, h0, u, delta, xh), s))
        .fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best })
}

fn frac_clamp(n: i128, d: i128) -> (i128, i128) {
    if n <= 0 {
        (0, 1)
    } else if n >= d {
        (1, 1)
    } else {
        (n, d)
    }
}

/// Exact integer version of [`product_segment_sq`] for scaled integer data.
/// Returns `None` when intermediate values could overflow.
pub fn product_segment_sq_exact(dt: i128, dh: i128, h0: i128, u: i128, delta: i128, xh: i128) -> Option<Frac> {
    const LIMIT: i128 = 1 << 20;
    if [dt, dh, h0, u, delta, xh].iter().any(|v| v.abs() > LIMIT) {
        return None;
    }
    let vv = dt * dt + dh * dh;
    let mut cands = [(0, 1), (1, 1), (0, 1), (0, 1), (0, 1)];
    let mut k = 2;
    if vv > 0 {
        for cx in [u - delta, u + delta] {
            cands[k] = frac_clamp(cx * dt + (xh - h0) * dh, vv);
            k += 1;
        }
    }
    if dt > 0 {
        cands[k] = frac_clamp(u, dt);
        k += 1;
    }
    let eval = |(n, d): (i128, i128)| {
        let e = (n * dt - u * d).abs() + delta * d;
        let v = h0 * d + n * dh - xh * d;
        Frac::new(e * e + v * v, d * d)
    };
    cands[..k].iter().copied().map(eval).min()
}

impl ProductSpace {
    pub fn new(tree: WeightedTree) -> ProductSpace {
        ProductSpace { tree }
    }

    pub fn distance(&self, p: &ProductPoint, q: &ProductPoint) -> f64 {
        self.tree.distance(&p.tree, &q.tree).hypot(p.height - q.height)
    }

    pub fn geodesic_eval(&self, p: &ProductPoint, q: &ProductPoint, s: f64) -> Result<ProductPoint, SpaceError> {
        let dt = self.tree.distance(&p.tree, &q.tree);
        let dh = q.height - p.height;
        let d = dt.hypot(dh);
        if !(-1e-12..=d + 1e-9).contains(&s) {
            return Err(SpaceError::OutOfRange { s, length: d });
        }
        if d == 0.0 {
            return Ok(p.clone());
        }
        let sigma = (s / d).clamp(0.0, 1.0);
        let tree = self.tree.geodesic_eval(&p.tree, &q.tree, (sigma * dt).min(dt))?;
        Ok(ProductPoint { tree, height: p.height + sigma * dh })
    }

    /// Distance from `x` to the segment `[p, q]` and the arclength from `p`
    /// of the nearest point.
    pub fn point_to_segment(&self, x: &ProductPoint, p: &ProductPoint, q: &ProductPoint) -> (f64, f64) {
        let dt = self.tree.distance(&p.tree, &q.tree);
        let (delta, u) = self.tree.point_to_arc(&x.tree, &p.tree, &q.tree);
        let dh = q.height - p.height;
        let (sq, sigma) = product_segment_sq(dt, dh, p.height, u, delta, x.height);
        (sq.sqrt(), sigma * dt.hypot(dh))
    }

    pub fn apply_tree(&self, g: &[crate::groups::Letter], x: &ProductPoint, shift: f64) -> ProductPoint {
        ProductPoint { tree: self.tree.apply(g, &x.tree), height: x.height + shift }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};

    fn space() -> ProductSpace {
        ProductSpace::new(WeightedTree::unit(parse_family("F2").unwrap()).unwrap())
    }

    fn pt(x: &ProductSpace, w: &str, h: f64) -> ProductPoint {
        ProductPoint::new(TreePoint::vertex(parse_word(x.tree.family(), w).unwrap()), h)
    }

    #[test]
    fn vertical_and_diagonal_distances() {
        let x = space();
        assert_eq!(x.distance(&pt(&x, "", 0.0), &pt(&x, "", 5.0)), 5.0);
        let d = x.distance(&pt(&x, "", 0.0), &pt(&x, "a^3 b^3 a^3 b^3", 12.0));
        assert!((d - 12.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn midpoint_of_diagonal() {
        let x = space();
        let m = x
            .geodesic_eval(&pt(&x, "", 0.0), &pt(&x, "a^4", 4.0), 2.0 * 2f64.sqrt())
            .unwrap();
        assert_eq!(m.tree, pt(&x, "a^2", 0.0).tree);
        assert!((m.height - 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_to_horizontal_segment() {
        let x = space();
        let (d, _) = x.point_to_segment(&pt(&x, "b", 0.0), &pt(&x, "", 0.0), &pt(&x, "a^3", 0.0));
        assert_eq!(d, 1.0);
        let (d, s) = x.point_to_segment(&pt(&x, "a^2", 3.0), &pt(&x, "", 0.0), &pt(&x, "a^4", 0.0));
        assert_eq!((d, s), (3.0, 2.0));
    }

    #[test]
    fn exact_matches_float() {
        for (dt, dh, h0, u, delta, xh) in [(4, 0, 0, 2, 0, 3), (5, 3, 1, 2, 1, 0), (0, 4, 0, 0, 2, 7), (3, -2, 2, 3, 1, -1)] {
            let f = product_segment_sq(dt as f64, dh as f64, h0 as f64, u as f64, delta as f64, xh as f64).0;
            let e = product_segment_sq_exact(dt, dh, h0, u, delta, xh).unwrap().to_f64();
            assert!((f - e).abs() < 1e-12, "{f} vs {e}");
        }
    }
}
