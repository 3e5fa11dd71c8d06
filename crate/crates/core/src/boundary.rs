//! Ideal points, geodesic rays, cone-topology neighbourhoods and Cauchy
//! tests for sequences in a model space.

use serde::Serialize;
use thiserror::Error;

use crate::groups::{format_word, GroupElement, GroupFamily, Letter};
use crate::spaces::{ComplexPoint, ProductPoint, Space, SpaceError, SpacePoint, TreePoint, WeightedTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("radius {0} is negative")]
    NegativeRadius(f64),
    #[error("end known only to depth {available}, asked for {depth}")]
    BeyondTruncation { depth: f64, available: f64 },
    #[error("invalid end: {0}")]
    InvalidEnd(String),
    #[error("boundary point does not match the space")]
    Mismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// An end of a tree, read as a word from the identity vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum End {
    /// No tree motion: the ray stays over the root.
    Finite,
    /// `prefix · period · period · …`.
    Periodic { prefix: Vec<Letter>, period: Vec<Letter> },
    /// Only a finite initial segment is known.
    Truncated { prefix: Vec<Letter> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BoundaryPoint {
    Tree { end: End },
    /// `[end, theta]`: tree component along `end` at speed `cos θ`, height
    /// at speed `sin θ`.
    Product { end: End, theta: f64 },
    /// Unit direction in ℝⁿ.
    Flat { direction: Vec<f64> },
    /// The ray through `prefix·periodᵏ·x₀`, k ≥ 1.
    Complex { prefix: GroupElement, period: GroupElement },
}

/// A point of X ∪ ∂X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Target {
    Point(SpacePoint),
    Ideal(BoundaryPoint),
}

impl End {
    pub fn periodic(prefix: Vec<Letter>, period: Vec<Letter>) -> Result<End, BoundaryError> {
        if period.is_empty() {
            return Err(BoundaryError::InvalidEnd("empty period".into()));
        }
        let mut probe = prefix.clone();
        probe.extend_from_slice(&period);
        probe.extend_from_slice(&period);
        if probe.windows(2).any(|w| w[0].inverse() == w[1]) {
            return Err(BoundaryError::InvalidEnd("prefix·period·period is not reduced".into()));
        }
        Ok(End::Periodic { prefix, period })
    }

    /// Letters of the end whose total weight reaches past `depth`.
    pub fn letters_to_depth(&self, tree: &WeightedTree, depth: f64) -> Result<Vec<Letter>, BoundaryError> {
        match self {
            End::Finite => {
                if depth > 1e-12 {
                    Err(BoundaryError::BeyondTruncation { depth, available: 0.0 })
                } else {
                    Ok(Vec::new())
                }
            }
            End::Truncated { prefix } => {
                let available = tree.depth(prefix);
                if depth > available + 1e-9 {
                    Err(BoundaryError::BeyondTruncation { depth, available })
                } else {
                    Ok(prefix.clone())
                }
            }
            End::Periodic { prefix, period } => {
                let mut out = prefix.clone();
                let mut w = tree.depth(prefix);
                let pw = tree.depth(period);
                while w <= depth {
                    out.extend_from_slice(period);
                    w += pw;
                }
                Ok(out)
            }
        }
    }

    pub fn describe(&self, family: &GroupFamily) -> String {
        match self {
            End::Finite => "finite".into(),
            End::Periodic { prefix, period } => {
                let p = if prefix.is_empty() { String::new() } else { format!("{} ", format_word(family, prefix)) };
                format!("{p}({})^inf", format_word(family, period))
            }
            End::Truncated { prefix } => format!("{} ...", format_word(family, prefix)),
        }
    }
}

/// Smallest period `p ≤ max_p` such that a suffix of `w` of at least three
/// periods and three quarters of `|w|` is `p`-periodic. Returns the start of
/// the longest such suffix and `p`.
pub fn detect_period(w: &[Letter], max_p: usize) -> Option<(usize, usize)> {
    let n = w.len();
    for p in 1..=max_p.min(n / 3) {
        let mut s = n - p;
        while s > 0 && w[s - 1] == w[s - 1 + p] {
            s -= 1;
        }
        let run = n - s;
        if run >= 3 * p && 4 * run >= 3 * n {
            return Some((s, p));
        }
    }
    None
}

/// End determined by a finite word: periodic when the word looks periodic,
/// truncated otherwise.
pub fn end_from_word(w: &[Letter]) -> End {
    if w.is_empty() {
        return End::Finite;
    }
    match detect_period(w, 64) {
        Some((s, p)) => End::Periodic { prefix: w[..s].to_vec(), period: w[s..s + p].to_vec() },
        None => End::Truncated { prefix: w.to_vec() },
    }
}

fn tree_word(p: &TreePoint) -> Vec<Letter> {
    let mut w = p.vertex.clone();
    if let Some((l, _)) = p.edge {
        w.push(l);
    }
    w
}

/// `ξ_α(r)`: the point at distance `r` from the basepoint along the ray to `α`.
pub fn ray_eval(space: &Space, alpha: &BoundaryPoint, r: f64) -> Result<SpacePoint, BoundaryError> {
    if r < 0.0 {
        return Err(BoundaryError::NegativeRadius(r));
    }
    Ok(match (space, alpha) {
        (Space::Tree(t), BoundaryPoint::Tree { end }) => SpacePoint::Tree(t.locate(&end.letters_to_depth(t, r)?, r)),
        (Space::Product(x), BoundaryPoint::Product { end, theta }) => {
            let (tr, h) = if matches!(end, End::Finite) {
                (0.0, r * theta.signum())
            } else {
                (r * theta.cos(), r * theta.sin())
            };
            let word = end.letters_to_depth(&x.tree, tr)?;
            SpacePoint::Product(ProductPoint::new(x.tree.locate(&word, tr), h))
        }
        (Space::Flat(f), BoundaryPoint::Flat { direction }) if direction.len() == f.dim => {
            SpacePoint::Flat(direction.iter().map(|c| c * r).collect())
        }
        (Space::Complex(c), BoundaryPoint::Complex { prefix, period }) => {
            let fam = c.family();
            let mut g = fam.multiply(prefix, period).map_err(SpaceError::from)?;
            while c.orbit_length(&g) < r {
                g = fam.multiply(&g, period).map_err(SpaceError::from)?;
            }
            let o = space.basepoint();
            space.geodesic_eval(&o, &SpacePoint::Complex(ComplexPoint::Vertex(g)), r)?
        }
        _ => return Err(BoundaryError::Mismatch),
    })
}

/// `ξ_x(r)` for `x ∈ X ∪ ∂X`; geodesics to finite points stop at the point.
pub fn target_eval(space: &Space, x: &Target, r: f64) -> Result<SpacePoint, BoundaryError> {
    match x {
        Target::Ideal(a) => ray_eval(space, a, r),
        Target::Point(p) => {
            let o = space.basepoint();
            let d = space.distance(&o, p)?;
            Ok(space.geodesic_eval(&o, p, r.min(d))?)
        }
    }
}

fn beyond(space: &Space, x: &Target, r: f64) -> Result<bool, BoundaryError> {
    Ok(match x {
        Target::Ideal(_) => true,
        Target::Point(p) => space.distance(&space.basepoint(), p)? > r,
    })
}

/// `x ∈ U(α; r, ε)`: `x` lies outside `B(x₀, r)` and `d(ξ_α(r), ξ_x(r)) < ε`.
pub fn in_u(space: &Space, x: &Target, alpha: &Target, r: f64, eps: f64) -> Result<bool, BoundaryError> {
    if !beyond(space, x, r)? {
        return Ok(false);
    }
    let a = target_eval(space, alpha, r)?;
    let b = target_eval(space, x, r)?;
    Ok(space.distance(&a, &b)? < eps)
}

/// `x ∈ U′(α; r, ε)`: `x` lies outside `B(x₀, r)` and `ξ_α(r)` is within `ε`
/// of the image of `ξ_x`.
pub fn in_u_prime(space: &Space, x: &Target, alpha: &Target, r: f64, eps: f64) -> Result<bool, BoundaryError> {
    if !beyond(space, x, r)? {
        return Ok(false);
    }
    let a = target_eval(space, alpha, r)?;
    // Points of ξ_x beyond r + ε are at least ε away from ξ_α(r).
    let far = target_eval(space, x, r + eps)?;
    let path = space.geodesic(&space.basepoint(), &far)?;
    Ok(space.point_to_path(&a, &path)?.0 < eps)
}

/// `d(ξ_α(r), ξ_β(r))`.
pub fn boundary_gap(space: &Space, alpha: &BoundaryPoint, beta: &BoundaryPoint, r: f64) -> Result<f64, BoundaryError> {
    Ok(space.distance(&ray_eval(space, alpha, r)?, &ray_eval(space, beta, r)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub r: f64,
    pub i0: usize,
    pub i: usize,
    /// `d(ξ_{x_{i0}}(r), ξ_{x_i}(r))`, or `None` when `x_i` is inside `B(x₀, r)`.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CauchyVerdict {
    /// For each radius, the least admissible `i₀`.
    Cauchy { i0: Vec<(f64, usize)> },
    NotCauchy { violation: Violation, passed: Vec<(f64, usize)> },
    Bounded { max_distance: f64 },
}

impl CauchyVerdict {
    pub fn is_cauchy(&self) -> bool {
        matches!(self, CauchyVerdict::Cauchy { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyReport {
    pub verdict: CauchyVerdict,
    pub eps0: f64,
    pub radii: Vec<f64>,
    /// Number of sequence terms examined.
    pub horizon: usize,
}

#[derive(Clone, Debug)]
pub struct CauchyOptions {
    pub eps0: f64,
    /// Radii to test; `None` means powers of two up to half the smallest
    /// distance among the last `min_tail` terms.
    pub radii: Option<Vec<f64>>,
    /// Terms that must follow the chosen `i₀`.
    pub min_tail: usize,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        CauchyOptions { eps0: 1.0, radii: None, min_tail: 2 }
    }
}

fn default_radii(limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 1.0;
    while r <= limit {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Finite-horizon Cauchy test: for each radius `r`, looks for `i₀` with
/// `x_i ∈ U(x_{i₀}; r, ε₀)` for every `i ≥ i₀`.
pub fn is_cauchy(space: &Space, points: &[SpacePoint], opts: &CauchyOptions) -> Result<CauchyReport, BoundaryError> {
    let o = space.basepoint();
    let n = points.len();
    let dist: Vec<f64> = points.iter().map(|p| space.distance(&o, p)).collect::<Result<_, _>>()?;
    let tail = opts.min_tail.max(1);
    let max_distance = dist.iter().copied().fold(0.0, f64::max);
    let escape = if n >= tail { dist[n - tail..].iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };
    let radii: Vec<f64> = match &opts.radii {
        Some(rs) => rs.iter().copied().filter(|r| *r < escape).collect(),
        None => default_radii(escape / 2.0),
    };
    let report = |verdict| CauchyReport { verdict, eps0: opts.eps0, radii: radii.clone(), horizon: n };
    if radii.is_empty() {
        return Ok(report(CauchyVerdict::Bounded { max_distance }));
    }
    let mut passed = Vec::new();
    for &r in &radii {
        let xi: Vec<SpacePoint> = points
            .iter()
            .zip(&dist)
            .map(|(p, d)| space.geodesic_eval(&o, p, r.min(*d)))
            .collect::<Result<_, _>>()?;
        let mut found = None;
        let mut last_violation = None;
        'candidates: for i0 in 0..=n - tail {
            if dist[i0] <= r {
                continue;
            }
            for i in i0 + 1..n {
                if dist[i] <= r {
                    last_violation = Some(Violation { r, i0, i, gap: None });
                    continue 'candidates;
                }
                let g = space.distance(&xi[i0], &xi[i])?;
                if g >= opts.eps0 {
                    last_violation = Some(Violation { r, i0, i, gap: Some(g) });
                    continue 'candidates;
                }
            }
            found = Some(i0);
            break;
        }
        match found {
            Some(i0) => passed.push((r, i0)),
            None => {
                let violation = last_violation.expect("a failing candidate exists");
                return Ok(report(CauchyVerdict::NotCauchy { violation, passed }));
            }
        }
    }
    Ok(report(CauchyVerdict::Cauchy { i0: passed }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub indices: Vec<usize>,
    pub limit: Option<BoundaryPoint>,
    /// Mean angle and spread, for product spaces.
    pub angle: Option<f64>,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    ConvergesTo { point: BoundaryPoint, spread: f64, tail: usize },
    Divergent { clusters: Vec<Cluster>, violation: Option<Violation> },
    Bounded { max_distance: f64 },
}

impl ConvergenceVerdict {
    pub fn converges(&self) -> bool {
        matches!(self, ConvergenceVerdict::ConvergesTo { .. })
    }
}

fn tail_len(n: usize) -> usize {
    n.min(2.max(n.div_ceil(4)))
}

fn mean_spread(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let s = v.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
    (m, s)
}

/// Angle `atan2(height, tree depth)` of a product point seen from the origin.
pub fn product_angle(space: &Space, p: &SpacePoint) -> Option<f64> {
    match (space, p) {
        (Space::Product(x), SpacePoint::Product(q)) => Some(q.height.atan2(x.tree.position(&q.tree))),
        _ => None,
    }
}

/// Estimates the ideal point that a set of terms approaches, from the
/// common tree prefix of the last two and the mean angle or direction over
/// all given terms. Returns the point and the spread of the angle data.
fn estimate_limit(space: &Space, pts: &[&SpacePoint]) -> Result<(BoundaryPoint, f64), BoundaryError> {
    let last2 = &pts[pts.len().saturating_sub(2)..];
    let end_of = |words: Vec<Vec<Letter>>| {
        let k = match words.as_slice() {
            [a, b] => crate::spaces::tree::common_prefix_len(a, b),
            [a] => a.len(),
            _ => 0,
        };
        end_from_word(&words[0][..k])
    };
    match space {
        Space::Tree(_) => {
            let words = last2
                .iter()
                .map(|p| match p {
                    SpacePoint::Tree(t) => Ok(tree_word(t)),
                    _ => Err(BoundaryError::Mismatch),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((BoundaryPoint::Tree { end: end_of(words) }, 0.0))
        }
        Space::Product(_) => {
            let angles: Vec<f64> = pts.iter().map(|p| product_angle(space, p).ok_or(BoundaryError::Mismatch)).collect::<Result<_, _>>()?;
            let (theta, spread) = mean_spread(&angles);
            let words = last2
                .iter()
                .map(|p| match p {
                    SpacePoint::Product(q) => Ok(tree_word(&q.tree)),
                    _ => Err(BoundaryError::Mismatch),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let end = end_of(words);
            let theta = if matches!(end, End::Finite) { std::f64::consts::FRAC_PI_2.copysign(theta) } else { theta };
            Ok((BoundaryPoint::Product { end, theta }, spread))
        }
        Space::Flat(f) => {
            let mut sum = vec![0.0; f.dim];
            let mut units = Vec::new();
            for p in pts {
                let SpacePoint::Flat(x) = p else { return Err(BoundaryError::Mismatch) };
                let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 0.0 {
                    let u: Vec<f64> = x.iter().map(|c| c / norm).collect();
                    for (s, c) in sum.iter_mut().zip(&u) {
                        *s += c;
                    }
                    units.push(u);
                }
            }
            let norm = sum.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(BoundaryError::Unsupported("no direction in the tail".into()));
            }
            let direction: Vec<f64> = sum.iter().map(|c| c / norm).collect();
            let spread = units
                .iter()
                .map(|u| crate::spaces::flat::euclid(u, &direction))
                .fold(0.0, f64::max);
            Ok((BoundaryPoint::Flat { direction }, spread))
        }
        Space::Complex(_) => Err(BoundaryError::Unsupported(
            "limit extraction for complexes beyond periodic directions".into(),
        )),
    }
}

/// Splits values into two groups by 1-D 2-means; returns group labels.
fn two_means(v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
    let mut best = (f64::INFINITY, 1);
    for cut in 1..v.len() {
        let cost = |ix: &[usize]| {
            let m = ix.iter().map(|i| v[*i]).sum::<f64>() / ix.len() as f64;
            ix.iter().map(|i| (v[*i] - m).powi(2)).sum::<f64>()
        };
        let c = cost(&order[..cut]) + cost(&order[cut..]);
        if c < best.0 {
            best = (c, cut);
        }
    }
    let mut labels = vec![0; v.len()];
    for &i in &order[best.1..] {
        labels[i] = 1;
    }
    labels
}

/// Limit extraction: a Cauchy sequence converges to the
/// estimated ideal point (checked against the U-neighbourhoods on the same
/// radii); otherwise the tail is split into two subsequences with their own
/// limit estimates.
pub fn limit_point(space: &Space, points: &[SpacePoint], opts: &CauchyOptions) -> Result<ConvergenceVerdict, BoundaryError> {
    if let Space::Complex(_) = space {
        return Err(BoundaryError::Unsupported("limit points in gluing complexes".into()));
    }
    let report = is_cauchy(space, points, opts)?;
    let n = points.len();
    let tail = tail_len(n);
    let tail_pts: Vec<&SpacePoint> = points[n - tail..].iter().collect();
    let violation = match &report.verdict {
        CauchyVerdict::Bounded { max_distance } => return Ok(ConvergenceVerdict::Bounded { max_distance: *max_distance }),
        CauchyVerdict::Cauchy { .. } => {
            let (point, spread) = estimate_limit(space, &tail_pts)?;
            let alpha = Target::Ideal(point.clone());
            let last = Target::Point(points[n - 1].clone());
            let mut ok = true;
            for &r in &report.radii {
                match in_u(space, &last, &alpha, r, opts.eps0) {
                    Ok(true) => {}
                    Ok(false) | Err(BoundaryError::BeyondTruncation { .. }) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if ok {
                return Ok(ConvergenceVerdict::ConvergesTo { point, spread, tail });
            }
            None
        }
        CauchyVerdict::NotCauchy { violation, .. } => Some(violation.clone()),
    };
    // Two subsequential limits.
    let indices: Vec<usize> = (n - tail..n).collect();
    let labels = match space {
        Space::Product(_) => {
            let angles: Vec<f64> = tail_pts.iter().map(|p| product_angle(space, p).unwrap_or(0.0)).collect();
            two_means(&angles)
        }
        _ => {
            // Seed with the two witness terms and assign by ray proximity.
            let (a, b, r) = match &violation {
                Some(v) => (v.i0, v.i, v.r),
                None => (n - 2, n - 1, report.radii.last().copied().unwrap_or(1.0)),
            };
            let o = space.basepoint();
            let at = |i: usize| -> Result<SpacePoint, BoundaryError> {
                let d = space.distance(&o, &points[i])?;
                Ok(space.geodesic_eval(&o, &points[i], r.min(d))?)
            };
            let (pa, pb) = (at(a)?, at(b)?);
            indices
                .iter()
                .map(|&i| {
                    let p = at(i)?;
                    Ok(usize::from(space.distance(&p, &pb)? < space.distance(&p, &pa)?))
                })
                .collect::<Result<Vec<_>, BoundaryError>>()?
        }
    };
    let mut clusters = Vec::new();
    for label in 0..2 {
        let idx: Vec<usize> = indices.iter().zip(&labels).filter(|(_, l)| **l == label).map(|(i, _)| *i).collect();
        if idx.is_empty() {
            continue;
        }
        let pts: Vec<&SpacePoint> = idx.iter().map(|i| &points[*i]).collect();
        let (limit, spread) = match estimate_limit(space, &pts) {
            Ok((l, s)) => (Some(l), s),
            Err(_) => (None, f64::NAN),
        };
        let angle = match &limit {
            Some(BoundaryPoint::Product { theta, .. }) => Some(*theta),
            _ => None,
        };
        clusters.push(Cluster { indices: idx, limit, angle, spread });
    }
    Ok(ConvergenceVerdict::Divergent { clusters, violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::spaces::{FlatSpace, ProductSpace};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn unit_product() -> (Space, GroupFamily) {
        let f = parse_family("F2").unwrap();
        (Space::Product(ProductSpace::new(WeightedTree::unit(f.clone()).unwrap())), f)
    }

    fn pp(f: &GroupFamily, w: &str, h: f64) -> SpacePoint {
        SpacePoint::Product(ProductPoint::new(TreePoint::vertex(parse_word(f, w).unwrap()), h))
    }

    fn a_end(f: &GroupFamily) -> End {
        End::periodic(vec![], parse_word(f, "a").unwrap()).unwrap()
    }

    #[test]
    fn rays_in_the_product() {
        let (x, f) = unit_product();
        let flat = BoundaryPoint::Product { end: a_end(&f), theta: 0.0 };
        assert_eq!(ray_eval(&x, &flat, 3.0).unwrap(), pp(&f, "a^3", 0.0));
        assert_eq!(ray_eval(&x, &flat, 0.0).unwrap(), x.basepoint());
        let diag = BoundaryPoint::Product { end: a_end(&f), theta: FRAC_PI_4 };
        let p = ray_eval(&x, &diag, 2f64.sqrt()).unwrap();
        assert!(x.distance(&p, &pp(&f, "a", 1.0)).unwrap() < 1e-12);
        let up = BoundaryPoint::Product { end: End::Finite, theta: FRAC_PI_2 };
        assert_eq!(ray_eval(&x, &up, 2.0).unwrap(), pp(&f, "", 2.0));
        assert!(ray_eval(&x, &flat, -1.0).is_err());
    }

    #[test]
    fn gap_between_angles_is_a_chord() {
        let (x, f) = unit_product();
        let a = BoundaryPoint::Product { end: a_end(&f), theta: 0.0 };
        let b = BoundaryPoint::Product { end: a_end(&f), theta: FRAC_PI_4 };
        let r = 5.0;
        let g = boundary_gap(&x, &a, &b, r).unwrap();
        assert!((g - r * (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert_eq!(boundary_gap(&x, &a, &a, r).unwrap(), 0.0);
    }

    #[test]
    fn neighbourhoods() {
        let (x, f) = unit_product();
        let alpha = Target::Ideal(BoundaryPoint::Product { end: a_end(&f), theta: 0.0 });
        let on = Target::Point(pp(&f, "a^5", 0.0));
        assert!(in_u(&x, &on, &alpha, 3.0, 0.1).unwrap());
        assert!(in_u_prime(&x, &on, &alpha, 3.0, 1e-9).unwrap());
        let near = Target::Point(pp(&f, "a^2", 0.0));
        assert!(!in_u(&x, &near, &alpha, 3.0, 0.1).unwrap());
        let off = Target::Point(pp(&f, "a^2 b^3", 1.0));
        assert!(!in_u(&x, &off, &alpha, 3.0, 0.5).unwrap());
        assert!(!in_u_prime(&x, &off, &alpha, 3.0, 0.5).unwrap());
    }

    #[test]
    fn period_detection() {
        let f = parse_family("F2").unwrap();
        let w = parse_word(&f, "b a b a b a b a b a").unwrap();
        assert_eq!(detect_period(&w, 8), Some((0, 2)));
        let w = parse_word(&f, "b^2 a^9").unwrap();
        assert_eq!(detect_period(&w, 8), Some((2, 1)));
        let w = parse_word(&f, "a b a^2 b^4").unwrap();
        assert_eq!(detect_period(&w, 8), None);
    }

    #[test]
    fn sequences_along_a_ray_converge() {
        let (x, f) = unit_product();
        let pts: Vec<SpacePoint> = (1..=40).map(|n| pp(&f, &format!("a^{n}"), 0.0)).collect();
        let opts = CauchyOptions::default();
        assert!(is_cauchy(&x, &pts, &opts).unwrap().verdict.is_cauchy());
        match limit_point(&x, &pts, &opts).unwrap() {
            ConvergenceVerdict::ConvergesTo { point, .. } => {
                assert_eq!(point, BoundaryPoint::Product { end: a_end(&f), theta: 0.0 })
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn alternating_angles_diverge() {
        let (x, f) = unit_product();
        let pts: Vec<SpacePoint> = (1..=30)
            .map(|n| pp(&f, &format!("a^{n}"), if n % 2 == 0 { n as f64 } else { 0.0 }))
            .collect();
        let opts = CauchyOptions::default();
        assert!(!is_cauchy(&x, &pts, &opts).unwrap().verdict.is_cauchy());
        let ConvergenceVerdict::Divergent { clusters, .. } = limit_point(&x, &pts, &opts).unwrap() else { panic!() };
        let mut angles: Vec<f64> = clusters.iter().map(|c| c.angle.unwrap()).collect();
        angles.sort_by(f64::total_cmp);
        assert!(angles[0].abs() < 1e-12 && (angles[1] - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn bounded_and_flat_sequences() {
        let (x, f) = unit_product();
        let pts: Vec<SpacePoint> = (0..10).map(|n| pp(&f, if n % 2 == 0 { "a" } else { "b" }, 0.0)).collect();
        assert!(matches!(
            is_cauchy(&x, &pts, &CauchyOptions::default()).unwrap().verdict,
            CauchyVerdict::Bounded { .. }
        ));
        let plane = Space::Flat(FlatSpace { dim: 2 });
        let line: Vec<SpacePoint> = (1..=30).map(|n| SpacePoint::Flat(vec![n as f64, 2.0 * n as f64])).collect();
        let ConvergenceVerdict::ConvergesTo { point: BoundaryPoint::Flat { direction }, .. } =
            limit_point(&plane, &line, &CauchyOptions::default()).unwrap()
        else {
            panic!()
        };
        let s5 = 5f64.sqrt();
        assert!((direction[0] - 1.0 / s5).abs() < 1e-12 && (direction[1] - 2.0 / s5).abs() < 1e-12);
    }
}
