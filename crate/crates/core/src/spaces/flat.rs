//! Euclidean space ℝⁿ.

use serde::Serialize;

use super::SpaceError;
use crate::num::Frac;

#[derive(Clone, Debug, Serialize)]
pub struct FlatSpace {
    pub dim: usize,
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `x` to `[a, b]` and the arclength from `a` of the foot.
pub fn point_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let w: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let vv: f64 = v.iter().map(|c| c * c).sum();
    let t = if vv == 0.0 {
        0.0
    } else {
        (w.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() / vv).clamp(0.0, 1.0)
    };
    let foot: Vec<f64> = a.iter().zip(&v).map(|(p, q)| p + t * q).collect();
    (euclid(x, &foot), t * vv.sqrt())
}

pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
}

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact squared distance from the integer point `x` to the segment `[0, p]`.
pub fn origin_segment_sq_exact(x: &[i128], p: &[i128]) -> Frac {
    let pp = dot(p, p);
    let xp = dot(x, p);
    let xx = dot(x, x);
    if pp == 0 || xp <= 0 {
        return Frac::int(xx);
    }
    if xp >= pp {
        let d: Vec<i128> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        return Frac::int(dot(&d, &d));
    }
    Frac::new(xx * pp - xp * xp, pp)
}

impl FlatSpace {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        euclid(a, b)
    }

    pub fn geodesic_eval(&self, a: &[f64], b: &[f64], s: f64) -> Result<Vec<f64>, SpaceError> {
        let d = euclid(a, b);
        if !(-1e-12..=d + 1e-9).contains(&s) {
            return Err(SpaceError::OutOfRange { s, length: d });
        }
        Ok(if d == 0.0 { a.to_vec() } else { lerp(a, b, (s / d).clamp(0.0, 1.0)) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection() {
        let (d, s) = point_to_segment(&[1.0, 1.0], &[0.0, 0.0], &[2.0, 0.0]);
        assert_eq!((d, s), (1.0, 1.0));
        let (d, s) = point_to_segment(&[3.0, 0.0], &[0.0, 0.0], &[2.0, 0.0]);
        assert_eq!((d, s), (1.0, 2.0));
    }

    #[test]
    fn exact_segment() {
        assert_eq!(origin_segment_sq_exact(&[1, 0], &[1, 1]), Frac::new(1, 2));
        assert_eq!(origin_segment_sq_exact(&[3, 0], &[1, 0]), Frac::int(4));
        assert_eq!(origin_segment_sq_exact(&[-1, 0], &[1, 0]), Frac::int(1));
    }
}
