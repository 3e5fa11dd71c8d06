//! Model spaces: weighted trees, tree×ℝ products, flat spaces and
//! free-product complexes, behind one `Space` front end.

pub mod complex;
pub mod flat;
pub mod product;
pub mod tree;

use serde::Serialize;
use thiserror::Error;

use crate::groups::GroupError;
pub use complex::{ComplexPoint, ComplexSegment, FreeProductComplex, Local, PieceSpec};
pub use flat::FlatSpace;
pub use product::{ProductPoint, ProductSpace};
pub use tree::{TreePoint, WeightedTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("arclength {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("point does not belong to this space")]
    Mismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub enum Space {
    Tree(WeightedTree),
    Product(ProductSpace),
    Flat(FlatSpace),
    Complex(FreeProductComplex),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "coords", rename_all = "snake_case")]
pub enum SpacePoint {
    Tree(TreePoint),
    Product(ProductPoint),
    Flat(Vec<f64>),
    Complex(ComplexPoint),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSegment {
    pub start: SpacePoint,
    pub end: SpacePoint,
    pub length: f64,
    #[serde(skip)]
    pub piece: Option<ComplexSegment>,
}

/// A geodesic as a chain of segments, each geodesic in one convex piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub start: SpacePoint,
    pub end: SpacePoint,
    pub segments: Vec<PathSegment>,
    pub length: f64,
}

impl Space {
    pub fn basepoint(&self) -> SpacePoint {
        match self {
            Space::Tree(_) => SpacePoint::Tree(TreePoint::root()),
            Space::Product(_) => SpacePoint::Product(ProductPoint::origin()),
            Space::Flat(f) => SpacePoint::Flat(vec![0.0; f.dim]),
            Space::Complex(c) => SpacePoint::Complex(ComplexPoint::Vertex(c.family().identity())),
        }
    }

    pub fn distance(&self, p: &SpacePoint, q: &SpacePoint) -> Result<f64, SpaceError> {
        Ok(match (self, p, q) {
            (Space::Tree(t), SpacePoint::Tree(a), SpacePoint::Tree(b)) => t.distance(a, b),
            (Space::Product(x), SpacePoint::Product(a), SpacePoint::Product(b)) => x.distance(a, b),
            (Space::Flat(f), SpacePoint::Flat(a), SpacePoint::Flat(b)) if a.len() == f.dim && b.len() == f.dim => {
                f.distance(a, b)
            }
            (Space::Complex(c), SpacePoint::Complex(a), SpacePoint::Complex(b)) => c.distance(a, b),
            _ => return Err(SpaceError::Mismatch),
        })
    }

    pub fn geodesic(&self, p: &SpacePoint, q: &SpacePoint) -> Result<GeodesicPath, SpaceError> {
        let segments = match (self, p, q) {
            (Space::Complex(c), SpacePoint::Complex(a), SpacePoint::Complex(b)) => c
                .path(a, b)
                .into_iter()
                .map(|s| PathSegment {
                    start: SpacePoint::Complex(c.segment_start(&s)),
                    end: SpacePoint::Complex(c.segment_end(&s)),
                    length: s.length,
                    piece: Some(s),
                })
                .collect(),
            _ => {
                let length = self.distance(p, q)?;
                if length == 0.0 {
                    Vec::new()
                } else {
                    vec![PathSegment { start: p.clone(), end: q.clone(), length, piece: None }]
                }
            }
        };
        let length = segments.iter().map(|s| s.length).sum();
        Ok(GeodesicPath { start: p.clone(), end: q.clone(), segments, length })
    }

    fn segment_eval(&self, seg: &PathSegment, s: f64) -> Result<SpacePoint, SpaceError> {
        let s = s.clamp(0.0, seg.length);
        Ok(match (self, &seg.start, &seg.end) {
            (Space::Tree(t), SpacePoint::Tree(a), SpacePoint::Tree(b)) => SpacePoint::Tree(t.geodesic_eval(a, b, s)?),
            (Space::Product(x), SpacePoint::Product(a), SpacePoint::Product(b)) => {
                SpacePoint::Product(x.geodesic_eval(a, b, s)?)
            }
            (Space::Flat(f), SpacePoint::Flat(a), SpacePoint::Flat(b)) => SpacePoint::Flat(f.geodesic_eval(a, b, s)?),
            (Space::Complex(c), _, _) => {
                let piece = seg.piece.as_ref().ok_or(SpaceError::Mismatch)?;
                SpacePoint::Complex(c.segment_eval(piece, s))
            }
            _ => return Err(SpaceError::Mismatch),
        })
    }

    /// Point at arclength `s` along the path.
    pub fn path_eval(&self, path: &GeodesicPath, s: f64) -> Result<SpacePoint, SpaceError> {
        if !(-1e-12..=path.length + 1e-9).contains(&s) {
            return Err(SpaceError::OutOfRange { s, length: path.length });
        }
        let mut rest = s.max(0.0);
        for (i, seg) in path.segments.iter().enumerate() {
            if rest <= seg.length || i + 1 == path.segments.len() {
                return self.segment_eval(seg, rest);
            }
            rest -= seg.length;
        }
        Ok(path.start.clone())
    }

    pub fn geodesic_eval(&self, p: &SpacePoint, q: &SpacePoint, s: f64) -> Result<SpacePoint, SpaceError> {
        let path = self.geodesic(p, q)?;
        self.path_eval(&path, s)
    }

    /// Distance from `x` to one segment and the foot's arclength within it.
    fn point_to_piece(&self, x: &SpacePoint, seg: &PathSegment) -> Result<(f64, f64), SpaceError> {
        Ok(match (self, x, &seg.start, &seg.end) {
            (Space::Tree(t), SpacePoint::Tree(p), SpacePoint::Tree(a), SpacePoint::Tree(b)) => t.point_to_arc(p, a, b),
            (Space::Product(s), SpacePoint::Product(p), SpacePoint::Product(a), SpacePoint::Product(b)) => {
                s.point_to_segment(p, a, b)
            }
            (Space::Flat(_), SpacePoint::Flat(p), SpacePoint::Flat(a), SpacePoint::Flat(b)) => {
                flat::point_to_segment(p, a, b)
            }
            (Space::Complex(c), SpacePoint::Complex(p), _, _) => {
                c.point_to_segment(p, seg.piece.as_ref().ok_or(SpaceError::Mismatch)?)
            }
            _ => return Err(SpaceError::Mismatch),
        })
    }

    /// Distance from `x` to the image of `path` and an arclength attaining it.
    pub fn point_to_path(&self, x: &SpacePoint, path: &GeodesicPath) -> Result<(f64, f64), SpaceError> {
        if path.segments.is_empty() {
            return Ok((self.distance(x, &path.start)?, 0.0));
        }
        let mut best = (f64::INFINITY, 0.0);
        let mut offset = 0.0;
        for seg in &path.segments {
            let (d, s) = self.point_to_piece(x, seg)?;
            if d < best.0 {
                best = (d, offset + s);
            }
            offset += seg.length;
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::num::q;

    #[test]
    fn uniform_front_end() {
        let t = WeightedTree::unit(parse_family("F2").unwrap()).unwrap();
        let x = Space::Product(ProductSpace::new(t));
        let o = x.basepoint();
        let a4 = parse_word(&parse_family("F2").unwrap(), "a^4").unwrap();
        let far = SpacePoint::Product(ProductPoint::new(TreePoint::vertex(a4), 4.0));
        let path = x.geodesic(&o, &far).unwrap();
        assert!((path.length - 32f64.sqrt()).abs() < 1e-12);
        let m = x.path_eval(&path, path.length / 2.0).unwrap();
        assert!((x.distance(&m, &o).unwrap() - path.length / 2.0).abs() < 1e-12);
        assert!(x.path_eval(&path, path.length + 1.0).is_err());
        assert_eq!(x.point_to_path(&far, &path).unwrap().0, 0.0);
        assert_eq!(x.distance(&o, &SpacePoint::Flat(vec![0.0])), Err(SpaceError::Mismatch));
    }

    #[test]
    fn complex_paths_chain() {
        let fam = parse_family("(ZxZ)*Z2").unwrap();
        let c = FreeProductComplex::new(
            fam.clone(),
            vec![
                PieceSpec::FlatLattice { basis: vec![vec![q(1), q(0)], vec![q(0), q(1)]] },
                PieceSpec::Interval { length: q(1) },
            ],
        )
        .unwrap();
        let g = fam.reduce(&parse_word(&fam, "x^2 s").unwrap()).unwrap();
        let x = Space::Complex(c);
        let o = x.basepoint();
        let p = SpacePoint::Complex(ComplexPoint::Vertex(g));
        let path = x.geodesic(&o, &p).unwrap();
        assert_eq!(path.segments.len(), 2);
        assert_eq!(path.segments[0].end, path.segments[1].start);
        let at2 = x.path_eval(&path, 2.0).unwrap();
        let x2 = fam.reduce(&parse_word(&fam, "x^2").unwrap()).unwrap();
        assert_eq!(at2, SpacePoint::Complex(ComplexPoint::Vertex(x2)));
    }
}
