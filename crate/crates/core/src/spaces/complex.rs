//! Free-product complexes: one piece per factor, copies of the pieces glued
//! along the Bass–Serre tree of the free product. Copies meet only at orbit
//! points of the basepoint, so every geodesic passes through coset
//! basepoints and decomposes into in-piece segments.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::flat::{euclid, lerp, point_to_segment as flat_point_to_segment};
use super::product::{ProductPoint, ProductSpace};
use super::tree::{TreePoint, WeightedTree, SNAP};
use super::SpaceError;
use crate::groups::{GroupElement, GroupFamily, LineElem, LineFactor, WeightAssignment};
use crate::num::{to_f64, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceSpec {
    /// ℝⁿ with the lattice spanned by the rows of `basis`.
    FlatLattice {
        #[serde(with = "crate::num::qser::matrix")]
        basis: Vec<Vec<Q>>,
    },
    /// Cone over `order` points, each joined to the apex by a spoke.
    Cone {
        order: u32,
        #[serde(with = "crate::num::qser")]
        spoke: Q,
    },
    /// Segment whose endpoints are swapped by the order-two factor.
    Interval {
        #[serde(with = "crate::num::qser")]
        length: Q,
    },
    /// Weighted tree of the base group crossed with ℝ, for a base×ℤ factor.
    TreeTimesLine {
        #[serde(with = "crate::num::qser::vec")]
        weights: Vec<Q>,
    },
}

#[derive(Clone, Debug)]
enum Piece {
    Flat { basis: Vec<Vec<f64>>, inverse: DMatrix<f64>, basis_q: Vec<Vec<Q>> },
    Cone { order: u32, spoke: f64, spoke_q: Q },
    TreeLine { space: ProductSpace, base: GroupFamily },
}

/// Coordinates inside one copy of a piece, in the frame where the copy's
/// basepoint is the piece origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Local {
    Flat(Vec<f64>),
    /// Spoke index and distance from the apex (apex: spoke 0, r = 0).
    Cone { spoke: u32, r: f64 },
    TreeLine(ProductPoint),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ComplexPoint {
    /// The orbit point `g·x₀`, shared by one copy of every piece.
    Vertex(GroupElement),
    /// A point of the copy `coset·P_factor` that is not an orbit point;
    /// `coset` has no trailing syllable from `factor`.
    Interior { coset: GroupElement, factor: usize, local: Local },
}

/// An in-piece geodesic segment of a path in the complex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexSegment {
    pub coset: GroupElement,
    pub factor: usize,
    pub start: Local,
    pub end: Local,
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct FreeProductComplex {
    family: GroupFamily,
    specs: Vec<PieceSpec>,
    pieces: Vec<Piece>,
}

fn cone_dist(a: (u32, f64), b: (u32, f64)) -> f64 {
    if a.0 == b.0 || a.1 == 0.0 || b.1 == 0.0 {
        (a.1 - b.1).abs()
    } else {
        a.1 + b.1
    }
}

fn cone_point(spoke: u32, r: f64) -> Local {
    if r < SNAP {
        Local::Cone { spoke: 0, r: 0.0 }
    } else {
        Local::Cone { spoke, r }
    }
}

/// Exact squared covering radius of a 2D lattice: circumradius of the
/// non-obtuse triangle spanned by a Gauss-reduced basis.
pub(crate) fn planar_covering_sq(basis: &[Vec<Q>]) -> Q {
    let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Q>();
    let mut b1 = basis[0].clone();
    let mut b2 = basis[1].clone();
    loop {
        if dot(&b1, &b1) > dot(&b2, &b2) {
            std::mem::swap(&mut b1, &mut b2);
        }
        let (d12, d11) = (dot(&b1, &b2), dot(&b1, &b1));
        if Q::from_integer(2) * num_traits::Signed::abs(&d12) <= d11 {
            break;
        }
        let mu = (d12 / d11).round();
        b2 = b2.iter().zip(&b1).map(|(x, y)| x - mu * y).collect();
    }
    if dot(&b1, &b2) < Q::from_integer(0) {
        b2 = b2.iter().map(|x| -x).collect();
    }
    let diff: Vec<Q> = b2.iter().zip(&b1).map(|(x, y)| x - y).collect();
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    dot(&b1, &b1) * dot(&b2, &b2) * dot(&diff, &diff) / (Q::from_integer(4) * det * det)
}

impl Piece {
    fn build(spec: &PieceSpec, fam: &GroupFamily) -> Result<Piece, SpaceError> {
        let bad = |msg: &str| SpaceError::InvalidSpace(format!("{msg} (factor {fam})"));
        match (spec, fam) {
            (PieceSpec::FlatLattice { basis }, GroupFamily::FreeAbelian { rank }) => {
                let n = *rank as usize;
                if basis.len() != n || basis.iter().any(|r| r.len() != n) {
                    return Err(bad("basis must be square of the factor's rank"));
                }
                let basis_f: Vec<Vec<f64>> = basis.iter().map(|r| r.iter().map(to_f64).collect()).collect();
                let m = DMatrix::from_fn(n, n, |i, j| basis_f[j][i]);
                let inverse = m.try_inverse().ok_or_else(|| bad("basis is singular"))?;
                Ok(Piece::Flat { basis: basis_f, inverse, basis_q: basis.clone() })
            }
            (PieceSpec::Cone { order, spoke }, GroupFamily::Cyclic { order: m }) => {
                if order != m || *spoke <= Q::from_integer(0) {
                    return Err(bad("cone needs the factor's order and a positive spoke"));
                }
                Ok(Piece::Cone { order: *order, spoke: to_f64(spoke), spoke_q: *spoke })
            }
            (PieceSpec::Interval { length }, GroupFamily::Cyclic { order: 2 }) => {
                if *length <= Q::from_integer(0) {
                    return Err(bad("interval length must be positive"));
                }
                let half = length / Q::from_integer(2);
                Ok(Piece::Cone { order: 2, spoke: to_f64(&half), spoke_q: half })
            }
            (PieceSpec::TreeTimesLine { weights }, GroupFamily::DirectWithLine { base, line: LineFactor::Integers }) => {
                let w = WeightAssignment::new(base, weights.clone())?;
                let tree = WeightedTree::new((**base).clone(), w)?;
                Ok(Piece::TreeLine { space: ProductSpace::new(tree), base: (**base).clone() })
            }
            _ => Err(bad("piece kind does not match the factor")),
        }
    }

    fn origin(&self) -> Local {
        match self {
            Piece::Flat { basis, .. } => Local::Flat(vec![0.0; basis.len()]),
            Piece::Cone { spoke, .. } => Local::Cone { spoke: 0, r: *spoke },
            Piece::TreeLine { .. } => Local::TreeLine(ProductPoint::origin()),
        }
    }

    fn act(&self, s: &GroupElement, l: &Local) -> Local {
        match (self, s, l) {
            (Piece::Flat { basis, .. }, GroupElement::Abelian(z), Local::Flat(x)) => {
                let mut out = x.clone();
                for (zi, row) in z.iter().zip(basis) {
                    for (o, b) in out.iter_mut().zip(row) {
                        *o += *zi as f64 * b;
                    }
                }
                Local::Flat(out)
            }
            (Piece::Cone { order, .. }, GroupElement::Cyclic(e), Local::Cone { spoke, r }) => {
                if *r == 0.0 {
                    l.clone()
                } else {
                    Local::Cone { spoke: (spoke + e) % order, r: *r }
                }
            }
            (Piece::TreeLine { space, base }, GroupElement::WithLine(b, t), Local::TreeLine(p)) => {
                let letters = base.letters(b);
                Local::TreeLine(ProductPoint {
                    tree: space.tree.apply(&letters, &p.tree),
                    height: t.apply(p.height),
                })
            }
            _ => panic!("factor element does not act on this piece"),
        }
    }

    fn dist(&self, a: &Local, b: &Local) -> f64 {
        match (self, a, b) {
            (Piece::Flat { .. }, Local::Flat(x), Local::Flat(y)) => euclid(x, y),
            (Piece::Cone { .. }, Local::Cone { spoke: k1, r: r1 }, Local::Cone { spoke: k2, r: r2 }) => {
                cone_dist((*k1, *r1), (*k2, *r2))
            }
            (Piece::TreeLine { space, .. }, Local::TreeLine(p), Local::TreeLine(q)) => space.distance(p, q),
            _ => panic!("local coordinates do not match the piece"),
        }
    }

    fn eval(&self, a: &Local, b: &Local, s: f64) -> Local {
        match (self, a, b) {
            (Piece::Flat { .. }, Local::Flat(x), Local::Flat(y)) => {
                let d = euclid(x, y);
                Local::Flat(if d == 0.0 { x.clone() } else { lerp(x, y, (s / d).clamp(0.0, 1.0)) })
            }
            (Piece::Cone { .. }, Local::Cone { spoke: k1, r: r1 }, Local::Cone { spoke: k2, r: r2 }) => {
                let d = cone_dist((*k1, *r1), (*k2, *r2));
                let s = s.clamp(0.0, d);
                if k1 == k2 || *r1 == 0.0 || *r2 == 0.0 {
                    let k = if *r1 == 0.0 { *k2 } else { *k1 };
                    let r = if d == 0.0 { *r1 } else { r1 + (r2 - r1) * s / d };
                    cone_point(k, r)
                } else if s <= *r1 {
                    cone_point(*k1, r1 - s)
                } else {
                    cone_point(*k2, s - r1)
                }
            }
            (Piece::TreeLine { space, .. }, Local::TreeLine(p), Local::TreeLine(q)) => {
                let d = space.distance(p, q);
                Local::TreeLine(space.geodesic_eval(p, q, s.clamp(0.0, d)).expect("clamped arclength"))
            }
            _ => panic!("local coordinates do not match the piece"),
        }
    }

    /// Distance from `x` to the in-piece segment `[a, b]`, with the foot's
    /// arclength from `a`.
    fn point_to_seg(&self, x: &Local, a: &Local, b: &Local) -> (f64, f64) {
        match (self, x, a, b) {
            (Piece::Flat { .. }, Local::Flat(p), Local::Flat(s), Local::Flat(e)) => flat_point_to_segment(p, s, e),
            (Piece::Cone { .. }, Local::Cone { spoke: k, r }, Local::Cone { spoke: k1, r: r1 }, Local::Cone { spoke: k2, r: r2 }) => {
                // Split into at most two monotone runs along single spokes.
                let runs: Vec<(u32, f64, f64, f64)> = if k1 == k2 || *r1 == 0.0 || *r2 == 0.0 {
                    let kk = if *r1 == 0.0 { *k2 } else { *k1 };
                    vec![(kk, *r1, *r2, 0.0)]
                } else {
                    vec![(*k1, *r1, 0.0, 0.0), (*k2, 0.0, *r2, *r1)]
                };
                let mut best = (f64::INFINITY, 0.0);
                for (spoke, from, to, offset) in runs {
                    let (lo, hi) = (from.min(to), from.max(to));
                    let (d, rho) = if *k == spoke || *r == 0.0 {
                        let rho = r.clamp(lo, hi);
                        ((r - rho).abs(), rho)
                    } else {
                        (r + lo, lo)
                    };
                    if d < best.0 {
                        best = (d, offset + (rho - from).abs());
                    }
                }
                best
            }
            (Piece::TreeLine { space, .. }, Local::TreeLine(p), Local::TreeLine(s), Local::TreeLine(e)) => {
                space.point_to_segment(p, s, e)
            }
            _ => panic!("local coordinates do not match the piece"),
        }
    }

    /// The factor element whose orbit point this is, if any.
    fn as_vertex(&self, l: &Local) -> Option<GroupElement> {
        match (self, l) {
            (Piece::Flat { basis, inverse, .. }, Local::Flat(x)) => {
                let v = inverse * nalgebra::DVector::from_column_slice(x);
                let z: Vec<i64> = v.iter().map(|c| c.round() as i64).collect();
                let back = self.act(&GroupElement::Abelian(z.clone()), &Local::Flat(vec![0.0; basis.len()]));
                match back {
                    Local::Flat(y) if euclid(&y, x) < 1e-9 => Some(GroupElement::Abelian(z)),
                    _ => None,
                }
            }
            (Piece::Cone { spoke, .. }, Local::Cone { spoke: k, r }) => {
                ((r - spoke).abs() < 1e-9).then_some(GroupElement::Cyclic(*k))
            }
            (Piece::TreeLine { base, .. }, Local::TreeLine(p)) => {
                let t = p.height.round();
                if p.tree.is_vertex() && (p.height - t).abs() < 1e-9 {
                    let b = base.reduce(&p.tree.vertex).ok()?;
                    Some(GroupElement::WithLine(Box::new(b), LineElem::translation(t as i64)))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Nearest orbit point within this copy and its distance.
    fn nearest_orbit(&self, l: &Local) -> (GroupElement, f64) {
        match (self, l) {
            (Piece::Flat { basis, inverse, .. }, Local::Flat(x)) => {
                let n = basis.len();
                let v = inverse * nalgebra::DVector::from_column_slice(x);
                let centre: Vec<i64> = v.iter().map(|c| c.round() as i64).collect();
                let mut best: Option<(GroupElement, f64)> = None;
                let total = 3usize.pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let z: Vec<i64> = centre
                        .iter()
                        .map(|z0| {
                            let d = (c % 3) as i64 - 1;
                            c /= 3;
                            z0 + d
                        })
                        .collect();
                    let Local::Flat(p) = self.act(&GroupElement::Abelian(z.clone()), &self.origin()) else {
                        unreachable!()
                    };
                    let d = euclid(&p, x);
                    if best.as_ref().map_or(true, |b| d < b.1 - 1e-12) {
                        best = Some((GroupElement::Abelian(z), d));
                    }
                }
                best.expect("nonempty search box")
            }
            (Piece::Cone { spoke, .. }, Local::Cone { spoke: k, r }) => (GroupElement::Cyclic(*k), spoke - r),
            (Piece::TreeLine { space, base }, Local::TreeLine(p)) => {
                let (word, dt) = space.tree.nearest_vertex(&p.tree);
                let t = p.height.round();
                let b = base.reduce(&word).expect("tree words are valid");
                (
                    GroupElement::WithLine(Box::new(b), LineElem::translation(t as i64)),
                    dt.hypot(p.height - t),
                )
            }
            _ => panic!("local coordinates do not match the piece"),
        }
    }

    /// Factor elements whose orbit point lies within `radius` of `[a, b]`,
    /// with that distance. `None` for pieces without a finite search.
    fn elements_near(&self, a: &Local, b: &Local, radius: f64) -> Option<Vec<(GroupElement, f64)>> {
        match (self, a, b) {
            (Piece::Flat { basis, inverse, .. }, Local::Flat(x), Local::Flat(y)) => {
                let n = basis.len();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for code in 0..(1usize << n) {
                    let corner: Vec<f64> = (0..n)
                        .map(|i| {
                            if code >> i & 1 == 1 {
                                x[i].max(y[i]) + radius
                            } else {
                                x[i].min(y[i]) - radius
                            }
                        })
                        .collect();
                    let c = inverse * nalgebra::DVector::from_column_slice(&corner);
                    for i in 0..n {
                        lo[i] = lo[i].min(c[i]);
                        hi[i] = hi[i].max(c[i]);
                    }
                }
                let lo: Vec<i64> = lo.iter().map(|v| v.floor() as i64 - 1).collect();
                let hi: Vec<i64> = hi.iter().map(|v| v.ceil() as i64 + 1).collect();
                let mut out = Vec::new();
                let mut z = lo.clone();
                loop {
                    let e = GroupElement::Abelian(z.clone());
                    let (d, _) = self.point_to_seg(&self.act(&e, &self.origin()), a, b);
                    if d <= radius + 1e-9 {
                        out.push((e, d));
                    }
                    let mut i = 0;
                    while i < n && z[i] == hi[i] {
                        z[i] = lo[i];
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                    z[i] += 1;
                }
                Some(out)
            }
            (Piece::Cone { order, .. }, _, _) => Some(
                (0..*order)
                    .filter_map(|e| {
                        let g = GroupElement::Cyclic(e);
                        let (d, _) = self.point_to_seg(&self.act(&g, &self.origin()), a, b);
                        (d <= radius + 1e-9).then_some((g, d))
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Exact squared covering radius where a closed form is known.
    fn covering_sq(&self) -> Option<Q> {
        match self {
            Piece::Flat { basis_q, .. } => match basis_q.len() {
                1 => Some(basis_q[0][0] * basis_q[0][0] / Q::from_integer(4)),
                2 => Some(planar_covering_sq(basis_q)),
                _ => None,
            },
            Piece::Cone { spoke_q, .. } => Some(spoke_q * spoke_q),
            Piece::TreeLine { space, .. } => {
                let w = space.tree.weights().max_weight() / Q::from_integer(2);
                Some(w * w + Q::new(1, 4))
            }
        }
    }
}

impl FreeProductComplex {
    pub fn new(family: GroupFamily, specs: Vec<PieceSpec>) -> Result<FreeProductComplex, SpaceError> {
        family.validate()?;
        let factors = family.factors()?;
        if factors.len() != specs.len() {
            return Err(SpaceError::InvalidSpace(format!(
                "{} factors but {} pieces",
                factors.len(),
                specs.len()
            )));
        }
        let pieces = specs
            .iter()
            .zip(factors)
            .map(|(s, f)| Piece::build(s, f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FreeProductComplex { family, specs, pieces })
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn specs(&self) -> &[PieceSpec] {
        &self.specs
    }

    fn factor_family(&self, f: usize) -> &GroupFamily {
        &self.family.factors().expect("validated free product")[f]
    }

    fn syllables<'a>(&self, g: &'a GroupElement) -> &'a [crate::groups::Syllable] {
        match g {
            GroupElement::Product(s) => s,
            _ => panic!("complex elements are free-product elements"),
        }
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.family.multiply(g, h).expect("elements of the complex's group")
    }

    fn embed(&self, f: usize, s: &GroupElement) -> GroupElement {
        self.family.from_factor(f, s.clone()).expect("factor element")
    }

    pub fn syllable_length(&self, f: usize, s: &GroupElement) -> f64 {
        let p = &self.pieces[f];
        p.dist(&p.origin(), &p.act(s, &p.origin()))
    }

    /// `d(x₀, u·x₀)`, summed syllable by syllable.
    pub fn orbit_length(&self, u: &GroupElement) -> f64 {
        self.syllables(u)
            .iter()
            .map(|s| self.syllable_length(s.factor as usize, &s.elem))
            .sum()
    }

    /// `d(g·x₀, h·x₀)`.
    pub fn orbit_distance(&self, g: &GroupElement, h: &GroupElement) -> Result<f64, SpaceError> {
        if !self.family.contains(g) || !self.family.contains(h) {
            return Err(crate::groups::GroupError::FamilyMismatch.into());
        }
        let u = self.mul(&self.family.inverse(g), h);
        Ok(self.orbit_length(&u))
    }

    /// Splits `g = rep·s` with `s` in factor `f` and `rep` free of a trailing
    /// `f` syllable.
    pub fn coset_frame(&self, g: &GroupElement, f: usize) -> (GroupElement, GroupElement) {
        let syl = self.syllables(g);
        match syl.last() {
            Some(last) if last.factor as usize == f => {
                (GroupElement::Product(syl[..syl.len() - 1].to_vec()), last.elem.clone())
            }
            _ => (g.clone(), self.factor_family(f).identity()),
        }
    }

    /// Canonical point for local coordinates in the copy `g·P_f`.
    pub fn make_point(&self, g: &GroupElement, f: usize, local: &Local) -> ComplexPoint {
        let (rep, s) = self.coset_frame(g, f);
        let piece = &self.pieces[f];
        let local = piece.act(&s, local);
        match piece.as_vertex(&local) {
            Some(t) => ComplexPoint::Vertex(self.mul(&rep, &self.embed(f, &t))),
            None => ComplexPoint::Interior { coset: rep, factor: f, local },
        }
    }

    pub fn vertex(&self, g: &GroupElement) -> ComplexPoint {
        ComplexPoint::Vertex(g.clone())
    }

    /// Coordinates of `p` in the frame of the copy `coset·P_f`, if `p` lies
    /// in that copy.
    fn local_in(&self, p: &ComplexPoint, coset: &GroupElement, f: usize) -> Option<Local> {
        let piece = &self.pieces[f];
        match p {
            ComplexPoint::Vertex(v) => {
                let u = self.mul(&self.family.inverse(coset), v);
                let syl = self.syllables(&u);
                match syl {
                    [] => Some(piece.origin()),
                    [s] if s.factor as usize == f => Some(piece.act(&s.elem, &piece.origin())),
                    _ => None,
                }
            }
            ComplexPoint::Interior { coset: c, factor, local } => {
                (*factor == f && c == coset).then(|| local.clone())
            }
        }
    }

    /// The orbit point of the copy `rep·P_f` through which geodesics leave
    /// toward `rep·rel`.
    fn exit(&self, rep: &GroupElement, f: usize, rel: &GroupElement) -> (GroupElement, Local) {
        let piece = &self.pieces[f];
        match self.syllables(rel).first() {
            Some(s) if s.factor as usize == f => {
                (self.mul(rep, &self.embed(f, &s.elem)), piece.act(&s.elem, &piece.origin()))
            }
            _ => (rep.clone(), piece.origin()),
        }
    }

    fn vertex_path(&self, g: &GroupElement, h: &GroupElement, out: &mut Vec<ComplexSegment>) {
        let u = self.mul(&self.family.inverse(g), h);
        let mut cur = g.clone();
        for s in self.syllables(&u) {
            let f = s.factor as usize;
            let (rep, t) = self.coset_frame(&cur, f);
            let piece = &self.pieces[f];
            let start = piece.act(&t, &piece.origin());
            let ff = self.factor_family(f);
            let end = piece.act(&ff.multiply(&t, &s.elem).expect("factor element"), &piece.origin());
            let length = piece.dist(&start, &end);
            out.push(ComplexSegment { coset: rep, factor: f, start, end, length });
            cur = self.mul(&cur, &self.embed(f, &s.elem));
        }
    }

    fn anchor(p: &ComplexPoint) -> &GroupElement {
        match p {
            ComplexPoint::Vertex(v) => v,
            ComplexPoint::Interior { coset, .. } => coset,
        }
    }

    /// In-piece segments of the geodesic from `p` to `q`.
    pub fn path(&self, p: &ComplexPoint, q: &ComplexPoint) -> Vec<ComplexSegment> {
        let mut out = Vec::new();
        match (p, q) {
            (ComplexPoint::Vertex(g), ComplexPoint::Vertex(h)) => self.vertex_path(g, h, &mut out),
            (ComplexPoint::Interior { coset, factor, local }, _) => {
                if let Some(lq) = self.local_in(q, coset, *factor) {
                    let length = self.pieces[*factor].dist(local, &lq);
                    out.push(ComplexSegment { coset: coset.clone(), factor: *factor, start: local.clone(), end: lq, length });
                    return out;
                }
                let rel = self.mul(&self.family.inverse(coset), Self::anchor(q));
                let (gate, gl) = self.exit(coset, *factor, &rel);
                let length = self.pieces[*factor].dist(local, &gl);
                out.push(ComplexSegment { coset: coset.clone(), factor: *factor, start: local.clone(), end: gl, length });
                let rest = self.path(&ComplexPoint::Vertex(gate), q);
                out.extend(rest);
            }
            (ComplexPoint::Vertex(g), ComplexPoint::Interior { coset, factor, local }) => {
                let rel = self.mul(&self.family.inverse(coset), g);
                let (gate, gl) = self.exit(coset, *factor, &rel);
                self.vertex_path(g, &gate, &mut out);
                let length = self.pieces[*factor].dist(&gl, local);
                out.push(ComplexSegment { coset: coset.clone(), factor: *factor, start: gl, end: local.clone(), length });
            }
        }
        out.retain(|s| s.length > 0.0);
        out
    }

    pub fn distance(&self, p: &ComplexPoint, q: &ComplexPoint) -> f64 {
        if let (ComplexPoint::Vertex(g), ComplexPoint::Vertex(h)) = (p, q) {
            return self.orbit_length(&self.mul(&self.family.inverse(g), h));
        }
        self.path(p, q).iter().map(|s| s.length).sum()
    }

    pub fn segment_eval(&self, seg: &ComplexSegment, s: f64) -> ComplexPoint {
        let local = self.pieces[seg.factor].eval(&seg.start, &seg.end, s);
        self.make_point(&seg.coset, seg.factor, &local)
    }

    pub fn segment_start(&self, seg: &ComplexSegment) -> ComplexPoint {
        self.make_point(&seg.coset, seg.factor, &seg.start)
    }

    pub fn segment_end(&self, seg: &ComplexSegment) -> ComplexPoint {
        self.make_point(&seg.coset, seg.factor, &seg.end)
    }

    /// Distance from `x` to an in-piece segment and the foot's arclength.
    pub fn point_to_segment(&self, x: &ComplexPoint, seg: &ComplexSegment) -> (f64, f64) {
        let piece = &self.pieces[seg.factor];
        if let Some(lx) = self.local_in(x, &seg.coset, seg.factor) {
            return piece.point_to_seg(&lx, &seg.start, &seg.end);
        }
        let rel = self.mul(&self.family.inverse(&seg.coset), Self::anchor(x));
        let (gate, gl) = self.exit(&seg.coset, seg.factor, &rel);
        let (d, s) = piece.point_to_seg(&gl, &seg.start, &seg.end);
        (d + self.distance(&ComplexPoint::Vertex(gate), x), s)
    }

    pub fn apply(&self, g: &GroupElement, p: &ComplexPoint) -> ComplexPoint {
        match p {
            ComplexPoint::Vertex(v) => ComplexPoint::Vertex(self.mul(g, v)),
            ComplexPoint::Interior { coset, factor, local } => self.make_point(&self.mul(g, coset), *factor, local),
        }
    }

    pub fn nearest_orbit(&self, p: &ComplexPoint) -> (GroupElement, f64) {
        match p {
            ComplexPoint::Vertex(v) => (v.clone(), 0.0),
            ComplexPoint::Interior { coset, factor, local } => {
                let (t, d) = self.pieces[*factor].nearest_orbit(local);
                (self.mul(coset, &self.embed(*factor, &t)), d)
            }
        }
    }

    /// Squared covering radius: the maximum over pieces, when every piece has
    /// a closed form.
    pub fn covering_sq(&self) -> Option<Q> {
        let mut best = Q::from_integer(0);
        for p in &self.pieces {
            best = best.max(p.covering_sq()?);
        }
        Some(best)
    }

    /// Group elements whose orbit points may lie within `radius` of the path
    /// made of `segs` (or of `x₀` when `segs` is empty). Every element at
    /// distance at most `radius` is included; callers filter by distance.
    pub fn orbit_near_path(&self, segs: &[ComplexSegment], radius: f64) -> Result<Vec<GroupElement>, SpaceError> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        if segs.is_empty() {
            self.hang(&self.family.identity(), None, radius, &mut seen, &mut out)?;
        }
        for seg in segs {
            let near = self.pieces[seg.factor]
                .elements_near(&seg.start, &seg.end, radius)
                .ok_or_else(|| SpaceError::Unsupported("orbit search in tree×line pieces".into()))?;
            for (s, d) in near {
                let a0 = self.mul(&seg.coset, &self.embed(seg.factor, &s));
                self.hang(&a0, Some(seg.factor), radius - d, &mut seen, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Records `a0` and every `a0·t₁⋯t_k` reachable through copies of factors
    /// other than `last` within `budget`.
    fn hang(
        &self,
        a0: &GroupElement,
        last: Option<usize>,
        budget: f64,
        seen: &mut std::collections::HashSet<GroupElement>,
        out: &mut Vec<GroupElement>,
    ) -> Result<(), SpaceError> {
        if seen.insert(a0.clone()) {
            out.push(a0.clone());
        }
        for (f, piece) in self.pieces.iter().enumerate() {
            if Some(f) == last {
                continue;
            }
            let o = piece.origin();
            let near = piece
                .elements_near(&o, &o, budget)
                .ok_or_else(|| SpaceError::Unsupported("orbit search in tree×line pieces".into()))?;
            for (t, d) in near {
                if d <= 1e-12 {
                    continue;
                }
                let a1 = self.mul(a0, &self.embed(f, &t));
                self.hang(&a1, Some(f), budget - d, seen, out)?;
            }
        }
        Ok(())
    }

    /// A point in the copy `coset·P_f` at fraction `t` of the way from the
    /// basepoint to the orbit point of the factor element `s`.
    pub fn point_between(&self, coset: &GroupElement, f: usize, s: &GroupElement, t: f64) -> ComplexPoint {
        let piece = &self.pieces[f];
        let a = piece.origin();
        let b = piece.act(s, &a);
        let d = piece.dist(&a, &b);
        self.make_point(coset, f, &piece.eval(&a, &b, t * d))
    }

    pub fn piece_local_origin(&self, f: usize) -> Local {
        self.pieces[f].origin()
    }

    /// The tree×line piece of factor `f`, if it has one.
    pub fn tree_line_piece(&self, f: usize) -> Option<&ProductSpace> {
        match &self.pieces[f] {
            Piece::TreeLine { space, .. } => Some(space),
            _ => None,
        }
    }

    pub fn interior_tree_point(&self, coset: &GroupElement, f: usize, tree: TreePoint, height: f64) -> ComplexPoint {
        self.make_point(coset, f, &Local::TreeLine(ProductPoint::new(tree, height)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::num::q;

    fn lattice_interval() -> FreeProductComplex {
        let fam = parse_family("(ZxZ)*Z2").unwrap();
        FreeProductComplex::new(
            fam,
            vec![
                PieceSpec::FlatLattice { basis: vec![vec![q(1), q(0)], vec![q(0), q(1)]] },
                PieceSpec::Interval { length: q(1) },
            ],
        )
        .unwrap()
    }

    fn el(c: &FreeProductComplex, s: &str) -> GroupElement {
        c.family().reduce(&parse_word(c.family(), s).unwrap()).unwrap()
    }

    #[test]
    fn syllable_sums() {
        let c = lattice_interval();
        let e = c.family().identity();
        assert_eq!(c.orbit_distance(&e, &el(&c, "s")).unwrap(), 1.0);
        let d = c.orbit_distance(&e, &el(&c, "x y s x")).unwrap();
        assert!((d - (2f64.sqrt() + 2.0)).abs() < 1e-12);
        assert_eq!(c.orbit_distance(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn path_through_basepoints() {
        let c = lattice_interval();
        let e = c.vertex(&c.family().identity());
        let target = c.vertex(&el(&c, "x^2 s"));
        let segs = c.path(&e, &target);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].length, 2.0);
        let mid = c.segment_eval(&segs[0], 2.0);
        assert_eq!(mid, c.vertex(&el(&c, "x^2")));
        let half = c.segment_eval(&segs[1], 0.5);
        assert!(matches!(half, ComplexPoint::Interior { factor: 1, .. }));
        assert!((c.distance(&half, &e) - 2.5).abs() < 1e-12);
        assert!((c.distance(&half, &target) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interior_points_and_gates() {
        let c = lattice_interval();
        let g = el(&c, "x s");
        let p = c.point_between(&g, 0, &GroupElement::Abelian(vec![0, 1]), 0.5);
        let e = c.vertex(&c.family().identity());
        // x s then half a unit up: 1 + 1 + 0.5
        assert!((c.distance(&p, &e) - 2.5).abs() < 1e-12);
        let back = c.apply(&c.family().inverse(&g), &p);
        assert!((c.distance(&back, &e) - 0.5).abs() < 1e-12);
        let (n, d) = c.nearest_orbit(&p);
        assert_eq!(n, g);
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covering_radii() {
        let c = lattice_interval();
        assert_eq!(c.covering_sq(), Some(q(1) / q(2)));
        let shear = vec![vec![q(1), q(0)], vec![q(1), q(1)]];
        assert_eq!(planar_covering_sq(&shear), q(1) / q(2));
        let hex = vec![vec![q(2), q(0)], vec![q(1), q(2)]];
        // triangle (0,0),(2,0),(1,2): circumradius 5/4
        assert_eq!(planar_covering_sq(&hex), Q::new(25, 16));
    }

    #[test]
    fn cone_geometry() {
        let fam = parse_family("Z^2*Z3").unwrap();
        let c = FreeProductComplex::new(
            fam,
            vec![
                PieceSpec::FlatLattice { basis: vec![vec![q(1), q(0)], vec![q(0), q(1)]] },
                PieceSpec::Cone { order: 3, spoke: q(1) },
            ],
        )
        .unwrap();
        let e = c.family().identity();
        assert_eq!(c.orbit_distance(&e, &el(&c, "s")).unwrap(), 2.0);
        assert_eq!(c.orbit_distance(&e, &el(&c, "s x s^-1")).unwrap(), 5.0);
        let segs = c.path(&c.vertex(&e), &c.vertex(&el(&c, "s")));
        let apex = c.segment_eval(&segs[0], 1.0);
        assert!(matches!(apex, ComplexPoint::Interior { local: Local::Cone { r, .. }, .. } if r == 0.0));
    }
}
