//! Group actions on model spaces: orbit maps, isometries, and ball-certified
//! estimates of quasi-isometry and covering constants.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::groups::{ball, parse_family, GroupElement, GroupError, GroupFamily, LineElem, LineFactor, WeightAssignment};
use crate::num::{qser, to_f64, Q};
use crate::spaces::complex::planar_covering_sq;
use crate::spaces::flat::euclid;
use crate::spaces::{
    FlatSpace, FreeProductComplex, PieceSpec, ProductPoint, ProductSpace, Space, SpaceError, SpacePoint, TreePoint,
    WeightedTree,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid action: {0}")]
    Invalid(String),
    #[error("actions act by different groups: {0} and {1}")]
    DifferentGroups(String, String),
    #[error("sampled point at distance {found} from the orbit exceeds the covering radius {radius}")]
    CoveringViolated { found: f64, radius: f64 },
}

/// Action description as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum ActionSpec {
    /// Natural action of a free group or free product of ℤ₂'s on its
    /// weighted Cayley tree.
    Tree {
        family: String,
        #[serde(default, with = "qser::map")]
        weights: BTreeMap<String, Q>,
    },
    /// `base×ℤ` or `base×D∞` on tree×ℝ. Base generators move heights by
    /// `shifts` (default 0); the line factor acts on the ℝ coordinate.
    Product {
        family: String,
        #[serde(default, with = "qser::map")]
        weights: BTreeMap<String, Q>,
        #[serde(default, with = "qser::map")]
        shifts: BTreeMap<String, Q>,
    },
    /// ℤⁿ acting on ℝⁿ by translations through the rows of `basis`.
    Lattice {
        #[serde(with = "qser::matrix")]
        basis: Vec<Vec<Q>>,
    },
    /// A free product acting on its gluing complex.
    Complex { family: String, pieces: Vec<PieceSpec> },
}

#[derive(Clone, Debug)]
enum Model {
    Tree,
    Product { base: GroupFamily, line: LineFactor, shifts: Vec<Q> },
    Lattice { basis: Vec<Vec<Q>>, basis_f: Vec<Vec<f64>>, inverse: DMatrix<f64> },
    Complex,
}

#[derive(Clone, Debug)]
pub struct Action {
    family: GroupFamily,
    space: Space,
    model: Model,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QiConstants {
    #[serde(with = "qser")]
    pub lambda: Q,
    #[serde(with = "qser")]
    pub c: Q,
    /// Certification ball radius (unit word length).
    #[serde(with = "qser")]
    pub ball: Q,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocompactnessRadius {
    pub n: f64,
    /// Exact `N²` when a closed form is known.
    pub exact_sq: Option<String>,
    pub sampled_max: f64,
    #[serde(with = "qser")]
    pub horizon: Q,
    pub samples: usize,
}

fn named_to_vec(family: &GroupFamily, named: &BTreeMap<String, Q>, default: Q) -> Result<Vec<Q>, GroupError> {
    let names = family.generator_names();
    let mut out = vec![default; names.len()];
    for (k, v) in named {
        let i = names.iter().position(|n| n == k).ok_or_else(|| GroupError::UnknownGenerator(k.clone()))?;
        out[i] = *v;
    }
    Ok(out)
}

/// The element of the line factor whose orbit point is at height `t`.
pub fn line_elem_at(line: LineFactor, t: i64) -> LineElem {
    match line {
        LineFactor::Integers => LineElem::translation(t),
        LineFactor::InfiniteDihedral => LineElem { flip: t % 2 != 0, t },
    }
}

/// Rounds `x` up to the grid of step `1/den`, with a small slack for
/// floating-point noise.
pub fn ceil_to_grid(x: f64, den: i128) -> Q {
    let k = (x * den as f64 - 1e-9).ceil() as i128;
    Q::new(k, den)
}

impl Action {
    pub fn from_spec(spec: &ActionSpec) -> Result<Action, ActionError> {
        match spec {
            ActionSpec::Tree { family, weights } => {
                let f = parse_family(family)?;
                let w = WeightAssignment::from_named(&f, &weights.iter().map(|(k, v)| (k.clone(), *v)).collect::<Vec<_>>())?;
                Ok(Action::tree(WeightedTree::new(f, w)?))
            }
            ActionSpec::Product { family, weights, shifts } => {
                let f = parse_family(family)?;
                let GroupFamily::DirectWithLine { base, line } = &f else {
                    return Err(ActionError::Invalid(format!("{f} is not of the form base×line")));
                };
                let w = named_to_vec(base, weights, Q::from_integer(1))?;
                let tree = WeightedTree::new((**base).clone(), WeightAssignment::new(base, w)?)?;
                let s = named_to_vec(base, shifts, Q::from_integer(0))?;
                Action::product(ProductSpace::new(tree), *line, s)
            }
            ActionSpec::Lattice { basis } => Action::lattice(basis.clone()),
            ActionSpec::Complex { family, pieces } => {
                let f = parse_family(family)?;
                Ok(Action::complex(FreeProductComplex::new(f, pieces.clone())?))
            }
        }
    }

    pub fn tree(tree: WeightedTree) -> Action {
        Action { family: tree.family().clone(), space: Space::Tree(tree), model: Model::Tree }
    }

    /// `base×line` on tree×ℝ, where base generator `i` moves heights by
    /// `shifts[i]`.
    pub fn product(space: ProductSpace, line: LineFactor, shifts: Vec<Q>) -> Result<Action, ActionError> {
        let base = space.tree.family().clone();
        if shifts.len() != base.num_generators() {
            return Err(ActionError::Invalid("one shift per base generator".into()));
        }
        for (i, s) in shifts.iter().enumerate() {
            if *s != Q::from_integer(0) && (base.is_involution(i as u16) || line == LineFactor::InfiniteDihedral) {
                return Err(ActionError::Invalid(
                    "height shifts need a torsion-free generator and a ℤ line factor".into(),
                ));
            }
        }
        let family = GroupFamily::DirectWithLine { base: Box::new(base.clone()), line };
        Ok(Action { family, space: Space::Product(space), model: Model::Product { base, line, shifts } })
    }

    pub fn lattice(basis: Vec<Vec<Q>>) -> Result<Action, ActionError> {
        let n = basis.len();
        if n == 0 || basis.iter().any(|r| r.len() != n) {
            return Err(ActionError::Invalid("lattice basis must be square".into()));
        }
        let basis_f: Vec<Vec<f64>> = basis.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let inverse = DMatrix::from_fn(n, n, |i, j| basis_f[j][i])
            .try_inverse()
            .ok_or_else(|| ActionError::Invalid("lattice basis is singular".into()))?;
        Ok(Action {
            family: GroupFamily::FreeAbelian { rank: n as u16 },
            space: Space::Flat(FlatSpace { dim: n }),
            model: Model::Lattice { basis, basis_f, inverse },
        })
    }

    pub fn complex(c: FreeProductComplex) -> Action {
        Action { family: c.family().clone(), space: Space::Complex(c), model: Model::Complex }
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn basepoint(&self) -> SpacePoint {
        self.space.basepoint()
    }

    /// For product actions: the tree×ℝ space and the base family.
    pub fn product_parts(&self) -> Option<(&ProductSpace, &GroupFamily)> {
        match (&self.space, &self.model) {
            (Space::Product(s), Model::Product { base, .. }) => Some((s, base)),
            _ => None,
        }
    }

    /// For product actions: per-generator height shifts and the line factor.
    pub fn product_shifts(&self) -> Option<(&[Q], LineFactor)> {
        match &self.model {
            Model::Product { shifts, line, .. } => Some((shifts, *line)),
            _ => None,
        }
    }

    pub fn lattice_basis(&self) -> Option<&[Vec<Q>]> {
        match &self.model {
            Model::Lattice { basis, .. } => Some(basis),
            _ => None,
        }
    }

    /// Height displacement of a base element under a product action.
    pub fn shift(&self, base_elem: &GroupElement) -> Q {
        match &self.model {
            Model::Product { base, shifts, .. } => base
                .letters(base_elem)
                .iter()
                .map(|l| shifts[l.gen() as usize] * Q::from_integer(l.sign() as i128))
                .sum(),
            _ => Q::from_integer(0),
        }
    }

    /// Exact height of `g·x₀` under a product action.
    pub fn orbit_height(&self, g: &GroupElement) -> Option<Q> {
        match (&self.model, g) {
            (Model::Product { .. }, GroupElement::WithLine(b, l)) => Some(Q::from_integer(l.t as i128) + self.shift(b)),
            _ => None,
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), ActionError> {
        if self.family.contains(g) {
            Ok(())
        } else {
            Err(GroupError::FamilyMismatch.into())
        }
    }

    pub fn orbit_point(&self, g: &GroupElement) -> Result<SpacePoint, ActionError> {
        self.check(g)?;
        Ok(match (&self.model, g) {
            (Model::Tree, _) => SpacePoint::Tree(TreePoint::vertex(self.family.letters(g))),
            (Model::Product { base, .. }, GroupElement::WithLine(b, _)) => SpacePoint::Product(ProductPoint::new(
                TreePoint::vertex(base.letters(b)),
                to_f64(&self.orbit_height(g).expect("product element")),
            )),
            (Model::Lattice { basis_f, .. }, GroupElement::Abelian(z)) => {
                let mut x = vec![0.0; basis_f.len()];
                for (zi, row) in z.iter().zip(basis_f) {
                    for (o, b) in x.iter_mut().zip(row) {
                        *o += *zi as f64 * b;
                    }
                }
                SpacePoint::Flat(x)
            }
            (Model::Complex, _) => SpacePoint::Complex(crate::spaces::ComplexPoint::Vertex(g.clone())),
            _ => return Err(GroupError::FamilyMismatch.into()),
        })
    }

    pub fn apply(&self, g: &GroupElement, x: &SpacePoint) -> Result<SpacePoint, ActionError> {
        self.check(g)?;
        Ok(match (&self.space, &self.model, x) {
            (Space::Tree(t), Model::Tree, SpacePoint::Tree(p)) => SpacePoint::Tree(t.apply(&self.family.letters(g), p)),
            (Space::Product(s), Model::Product { base, .. }, SpacePoint::Product(p)) => {
                let (b, l) = (g.base().expect("product element"), g.line().expect("product element"));
                SpacePoint::Product(ProductPoint::new(
                    s.tree.apply(&base.letters(b), &p.tree),
                    l.apply(p.height) + to_f64(&self.shift(b)),
                ))
            }
            (Space::Flat(f), Model::Lattice { .. }, SpacePoint::Flat(p)) if p.len() == f.dim => {
                let SpacePoint::Flat(v) = self.orbit_point(g)? else { unreachable!() };
                SpacePoint::Flat(p.iter().zip(&v).map(|(a, b)| a + b).collect())
            }
            (Space::Complex(c), Model::Complex, SpacePoint::Complex(p)) => SpacePoint::Complex(c.apply(g, p)),
            _ => return Err(SpaceError::Mismatch.into()),
        })
    }

    /// `d(x₀, u·x₀)`.
    pub fn displacement(&self, u: &GroupElement) -> Result<f64, ActionError> {
        if let Space::Complex(c) = &self.space {
            self.check(u)?;
            return Ok(c.orbit_length(u));
        }
        Ok(self.space.distance(&self.basepoint(), &self.orbit_point(u)?)?)
    }

    pub fn orbit_distance(&self, g: &GroupElement, h: &GroupElement) -> Result<f64, ActionError> {
        self.check(g)?;
        self.check(h)?;
        let u = self.family.multiply(&self.family.inverse(g), h)?;
        self.displacement(&u)
    }

    fn better(&self, a: &(GroupElement, f64), b: &(GroupElement, f64)) -> bool {
        let unit = WeightAssignment::unit(&self.family);
        if (a.1 - b.1).abs() > 1e-12 {
            a.1 < b.1
        } else {
            self.family.enumeration_cmp(&unit, &a.0, &b.0) == Ordering::Less
        }
    }

    /// Nearest orbit point to `x`; ties go to the earlier element in ball
    /// enumeration order.
    pub fn nearest_orbit(&self, x: &SpacePoint) -> Result<(GroupElement, f64), ActionError> {
        match (&self.space, &self.model, x) {
            (Space::Tree(t), Model::Tree, SpacePoint::Tree(p)) => {
                let (w, d) = t.nearest_vertex(p);
                Ok((self.family.reduce(&w)?, d))
            }
            (Space::Product(s), Model::Product { base, line, .. }, SpacePoint::Product(p)) => {
                let mut words = vec![p.tree.vertex.clone()];
                if let Some((l, _)) = p.tree.edge {
                    let mut w = p.tree.vertex.clone();
                    w.push(l);
                    words.push(w);
                }
                let mut best: Option<(GroupElement, f64)> = None;
                for w in words {
                    let b = base.reduce(&w)?;
                    let dt = s.tree.distance(&p.tree, &TreePoint::vertex(w));
                    let phi = to_f64(&self.shift(&b));
                    let k0 = (p.height - phi).round() as i64;
                    for k in [k0 - 1, k0, k0 + 1] {
                        let d = dt.hypot(p.height - phi - k as f64);
                        let cand = (GroupElement::WithLine(Box::new(b.clone()), line_elem_at(*line, k)), d);
                        if best.as_ref().map_or(true, |bb| self.better(&cand, bb)) {
                            best = Some(cand);
                        }
                    }
                }
                Ok(best.expect("at least one candidate"))
            }
            (Space::Flat(f), Model::Lattice { inverse, .. }, SpacePoint::Flat(p)) if p.len() == f.dim => {
                let v = inverse * DVector::from_column_slice(p);
                let centre: Vec<i64> = v.iter().map(|c| c.round() as i64).collect();
                let reach: i64 = if f.dim <= 3 { 2 } else { 1 };
                let width = (2 * reach + 1) as usize;
                let mut best: Option<(GroupElement, f64)> = None;
                for code in 0..width.pow(f.dim as u32) {
                    let mut c = code;
                    let z: Vec<i64> = centre
                        .iter()
                        .map(|z0| {
                            let d = (c % width) as i64 - reach;
                            c /= width;
                            z0 + d
                        })
                        .collect();
                    let g = GroupElement::Abelian(z);
                    let SpacePoint::Flat(y) = self.orbit_point(&g)? else { unreachable!() };
                    let cand = (g, euclid(&y, p));
                    if best.as_ref().map_or(true, |bb| self.better(&cand, bb)) {
                        best = Some(cand);
                    }
                }
                Ok(best.expect("nonempty box"))
            }
            (Space::Complex(c), Model::Complex, SpacePoint::Complex(p)) => Ok(c.nearest_orbit(p)),
            _ => Err(SpaceError::Mismatch.into()),
        }
    }

    /// Exact `N²` for the covering radius when a closed form is known.
    pub fn covering_sq_closed_form(&self) -> Option<Q> {
        let two = Q::from_integer(2);
        match (&self.space, &self.model) {
            (Space::Tree(t), Model::Tree) => {
                let h = t.weights().max_weight() / two;
                Some(h * h)
            }
            (Space::Product(s), Model::Product { shifts, .. }) => {
                if shifts.iter().any(|x| !x.is_integer()) {
                    return None;
                }
                let h = s.tree.weights().max_weight() / two;
                Some(h * h + Q::new(1, 4))
            }
            (_, Model::Lattice { basis, .. }) => {
                let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Q>();
                match basis.len() {
                    1 => Some(basis[0][0] * basis[0][0] / Q::from_integer(4)),
                    2 => Some(planar_covering_sq(basis)),
                    n => {
                        let orthogonal = (0..n).all(|i| (i + 1..n).all(|j| dot(&basis[i], &basis[j]) == Q::from_integer(0)));
                        orthogonal.then(|| basis.iter().map(|r| dot(r, r)).sum::<Q>() / Q::from_integer(4))
                    }
                }
            }
            (Space::Complex(c), Model::Complex) => c.covering_sq(),
            _ => None,
        }
    }
}

/// Smallest `λ` on the 1/8 grid, then smallest `C` on the same grid, for
/// which `d_Y/λ − C ≤ d_X ≤ λ·d_Y + C` holds on all pairs `(g, h)` with
/// `g⁻¹h` in the unit-weight ball of radius `radius`. `c_max` is the
/// additive slack allowed while fixing `λ`.
pub fn estimate_qi_constants(
    ax: &Action,
    ay: &Action,
    radius: &Q,
    c_max: f64,
    exec: Exec,
) -> Result<QiConstants, ActionError> {
    if ax.family() != ay.family() {
        return Err(ActionError::DifferentGroups(ax.family().to_string(), ay.family().to_string()));
    }
    let fam = ax.family();
    let elems: Vec<GroupElement> = ball(fam, &WeightAssignment::unit(fam), radius)
        .into_iter()
        .filter(|g| !fam.is_identity(g))
        .collect();
    let pairs: Vec<Result<(f64, f64), ActionError>> =
        exec.map(&elems, |u| Ok((ax.displacement(u)?, ay.displacement(u)?)));
    let pairs = pairs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut lam = 1.0f64;
    for &(dx, dy) in &pairs {
        if dy > 0.0 {
            lam = lam.max((dx - c_max) / dy);
        }
        lam = lam.max(dy / (dx + c_max).max(f64::MIN_POSITIVE));
    }
    let lambda = ceil_to_grid(lam, 8).max(Q::from_integer(1));
    let lf = to_f64(&lambda);
    let c_req = pairs
        .iter()
        .map(|&(dx, dy)| (dy / lf - dx).max(dx - lf * dy))
        .fold(0.0f64, f64::max);
    let c = ceil_to_grid(c_req, 8).max(Q::from_integer(0));
    Ok(QiConstants { lambda, c, ball: *radius, pairs: pairs.len() })
}

/// Covering radius of the orbit of `x₀`. Uses the closed form when one is
/// known and checks it against points sampled along geodesics from `x₀` to
/// orbit points in the ball of radius `horizon`, each cut into
/// `subdivisions` pieces; otherwise returns the sampled maximum rounded up to
/// the 1/64 grid.
pub fn cocompactness_radius(
    a: &Action,
    horizon: &Q,
    subdivisions: usize,
    exec: Exec,
) -> Result<CocompactnessRadius, ActionError> {
    let fam = a.family();
    let elems = ball(fam, &WeightAssignment::unit(fam), horizon);
    let o = a.basepoint();
    let per: Vec<Result<(f64, usize), ActionError>> = exec.map(&elems, |g| {
        let path = a.space().geodesic(&o, &a.orbit_point(g)?)?;
        let mut worst = 0.0f64;
        for k in 0..=subdivisions {
            let s = path.length * k as f64 / subdivisions.max(1) as f64;
            let p = a.space().path_eval(&path, s)?;
            worst = worst.max(a.nearest_orbit(&p)?.1);
        }
        Ok((worst, subdivisions + 1))
    });
    let mut sampled_max = 0.0f64;
    let mut samples = 0;
    for r in per {
        let (w, n) = r?;
        sampled_max = sampled_max.max(w);
        samples += n;
    }
    let exact = a.covering_sq_closed_form();
    let n = match &exact {
        Some(sq) => {
            let n = to_f64(sq).sqrt();
            if sampled_max > n + 1e-9 {
                return Err(ActionError::CoveringViolated { found: sampled_max, radius: n });
            }
            n
        }
        None => to_f64(&ceil_to_grid(sampled_max, 64)),
    };
    Ok(CocompactnessRadius {
        n,
        exact_sq: exact.map(|q| q.to_string()),
        sampled_max,
        horizon: *horizon,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::parse_word;
    use crate::num::q;

    fn product(weights: &[(&str, i128)], shifts: &[(&str, i128)]) -> Action {
        let map = |v: &[(&str, i128)]| v.iter().map(|(k, x)| (k.to_string(), q(*x))).collect();
        Action::from_spec(&ActionSpec::Product { family: "F2xZ".into(), weights: map(weights), shifts: map(shifts) })
            .unwrap()
    }

    fn el(a: &Action, s: &str) -> GroupElement {
        a.family().reduce(&parse_word(a.family(), s).unwrap()).unwrap()
    }

    #[test]
    fn star_action_shifts_heights() {
        let star = product(&[], &[("b", 2)]);
        let p = star.orbit_point(&el(&star, "b")).unwrap();
        let SpacePoint::Product(pp) = &p else { panic!() };
        assert_eq!(pp.height, 2.0);
        assert_eq!(star.space().distance(&star.basepoint(), &p).unwrap(), 5f64.sqrt());
        let moved = star.apply(&el(&star, "t"), &p).unwrap();
        let SpacePoint::Product(mp) = moved else { panic!() };
        assert_eq!((mp.tree, mp.height), (pp.tree.clone(), 3.0));
    }

    #[test]
    fn homomorphism_on_small_ball() {
        let star = product(&[("a", 2)], &[("b", 2)]);
        let fam = star.family().clone();
        let b = ball(&fam, &WeightAssignment::unit(&fam), &q(2));
        for g in &b {
            for h in &b {
                let gh = fam.multiply(g, h).unwrap();
                let lhs = star.orbit_point(&gh).unwrap();
                let rhs = star.apply(g, &star.orbit_point(h).unwrap()).unwrap();
                assert!(star.space().distance(&lhs, &rhs).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn qi_constants_of_reweighted_tree() {
        let f = parse_family("F2").unwrap();
        let ax = Action::tree(WeightedTree::unit(f.clone()).unwrap());
        let ay = Action::tree(WeightedTree::new(f.clone(), WeightAssignment::new(&f, vec![q(2), q(1)]).unwrap()).unwrap());
        let c = estimate_qi_constants(&ax, &ay, &q(6), 0.0, Exec::Sequential).unwrap();
        assert_eq!((c.lambda, c.c), (q(2), q(0)));
        let same = estimate_qi_constants(&ax, &ax, &q(4), 0.0, Exec::Sequential).unwrap();
        assert_eq!((same.lambda, same.c), (q(1), q(0)));
    }

    #[test]
    fn covering_radii_match_closed_forms() {
        let unit = product(&[], &[]);
        let r = cocompactness_radius(&unit, &q(3), 8, Exec::Sequential).unwrap();
        assert!((r.n - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.sampled_max - r.n).abs() < 1e-9);
        let wide = product(&[("a", 2)], &[]);
        let r = cocompactness_radius(&wide, &q(3), 8, Exec::Sequential).unwrap();
        assert!((r.n - 5f64.sqrt() / 2.0).abs() < 1e-12);
        let lat = Action::lattice(vec![vec![q(1), q(0)], vec![q(0), q(1)]]).unwrap();
        let r = cocompactness_radius(&lat, &q(3), 8, Exec::Sequential).unwrap();
        assert!((r.n - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nearest_orbit_points() {
        let lat = Action::lattice(vec![vec![q(1), q(0)], vec![q(1), q(1)]]).unwrap();
        let (g, d) = lat.nearest_orbit(&SpacePoint::Flat(vec![2.1, 0.9])).unwrap();
        assert_eq!(g, GroupElement::Abelian(vec![1, 1]));
        assert!((d - 0.1f64.hypot(0.1)).abs() < 1e-12);
        let star = product(&[], &[("b", 2)]);
        let target = star.orbit_point(&el(&star, "b a t^-1")).unwrap();
        assert_eq!(star.nearest_orbit(&target).unwrap(), (el(&star, "b a t^-1"), 0.0));
    }

    #[test]
    fn shifts_rejected_on_involutions() {
        let spec = ActionSpec::Product {
            family: "(Z2*Z2)xZ".into(),
            weights: BTreeMap::new(),
            shifts: [("s1".to_string(), q(1))].into_iter().collect(),
        };
        assert!(Action::from_spec(&spec).is_err());
    }
}
