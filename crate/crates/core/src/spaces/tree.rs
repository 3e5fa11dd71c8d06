//! Weighted Cayley trees of free groups and free products of ℤ₂'s.

use serde::Serialize;

use super::SpaceError;
use crate::groups::{GroupElement, GroupError, GroupFamily, Letter, WeightAssignment};
use crate::num::Q;

pub(crate) const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct WeightedTree {
    family: GroupFamily,
    weights: WeightAssignment,
    #[serde(skip)]
    wf: Vec<f64>,
}

/// A point of the tree: a vertex, or a point at `offset` along the edge from
/// `vertex` to `vertex·letter` where that edge points away from the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreePoint {
    pub vertex: Vec<Letter>,
    pub edge: Option<(Letter, f64)>,
}

impl TreePoint {
    pub fn root() -> TreePoint {
        TreePoint { vertex: Vec::new(), edge: None }
    }

    pub fn vertex(word: Vec<Letter>) -> TreePoint {
        TreePoint { vertex: word, edge: None }
    }

    pub fn is_vertex(&self) -> bool {
        self.edge.is_none()
    }
}

pub(crate) fn common_prefix_len(a: &[Letter], b: &[Letter]) -> usize {
    const CHUNK: usize = 256;
    let n = a.len().min(b.len());
    let mut k = 0;
    while k + CHUNK <= n && a[k..k + CHUNK] == b[k..k + CHUNK] {
        k += CHUNK;
    }
    k + a[k..n].iter().zip(&b[k..n]).take_while(|(x, y)| x == y).count()
}

/// Free reduction of `g·w` for reduced words `g` and `w`.
pub(crate) fn reduced_product(g: &[Letter], w: &[Letter]) -> Vec<Letter> {
    let mut k = 0;
    while k < g.len() && k < w.len() && g[g.len() - 1 - k].inverse() == w[k] {
        k += 1;
    }
    let mut out = Vec::with_capacity(g.len() + w.len() - 2 * k);
    out.extend_from_slice(&g[..g.len() - k]);
    out.extend_from_slice(&w[k..]);
    out
}

impl WeightedTree {
    pub fn new(family: GroupFamily, weights: WeightAssignment) -> Result<WeightedTree, SpaceError> {
        if !family.is_tree_family() {
            return Err(GroupError::NotATree(family.to_string()).into());
        }
        let weights = WeightAssignment::new(&family, weights.weights)?;
        let wf = weights.as_f64();
        Ok(WeightedTree { family, weights, wf })
    }

    pub fn unit(family: GroupFamily) -> Result<WeightedTree, SpaceError> {
        let w = WeightAssignment::unit(&family);
        WeightedTree::new(family, w)
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    pub fn weights(&self) -> &WeightAssignment {
        &self.weights
    }

    pub fn weight(&self, l: Letter) -> f64 {
        self.wf[l.gen() as usize]
    }

    pub fn weight_q(&self, l: Letter) -> Q {
        self.weights.weight(l)
    }

    pub fn max_weight(&self) -> f64 {
        self.wf.iter().copied().fold(0.0, f64::max)
    }

    pub fn depth(&self, word: &[Letter]) -> f64 {
        word.iter().map(|l| self.weight(*l)).sum()
    }

    /// Vertex of a group element.
    pub fn vertex_of(&self, g: &GroupElement) -> Result<TreePoint, SpaceError> {
        if !self.family.contains(g) {
            return Err(GroupError::FamilyMismatch.into());
        }
        Ok(TreePoint::vertex(self.family.letters(g)))
    }

    /// Whether a letter word is reduced in this tree's alphabet.
    pub fn is_reduced(&self, word: &[Letter]) -> bool {
        let n = self.family.num_generators() as u16;
        word.iter().all(|l| l.gen() < n && l.is_involution() == self.family.is_involution(l.gen()))
            && word.windows(2).all(|p| p[0].inverse() != p[1])
    }

    pub fn validate_point(&self, p: &TreePoint) -> Result<(), SpaceError> {
        if !self.is_reduced(&p.vertex) {
            return Err(SpaceError::InvalidPoint("vertex word is not reduced".into()));
        }
        if let Some((x, o)) = p.edge {
            let mut full = p.vertex.clone();
            full.push(x);
            if !self.is_reduced(&full) || !(o > 0.0 && o < self.weight(x)) {
                return Err(SpaceError::InvalidPoint("edge offset out of range".into()));
            }
        }
        Ok(())
    }

    /// Distance from the identity vertex.
    pub fn position(&self, p: &TreePoint) -> f64 {
        self.depth(&p.vertex) + p.edge.map_or(0.0, |(_, o)| o)
    }

    fn full_letter(p: &TreePoint, i: usize) -> Option<Letter> {
        if i < p.vertex.len() {
            Some(p.vertex[i])
        } else if i == p.vertex.len() {
            p.edge.map(|(l, _)| l)
        } else {
            None
        }
    }

    /// Weight of the common prefix of the two root paths (edges included).
    fn shared_depth(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let k = common_prefix_len(&p.vertex, &q.vertex);
        let mut d = self.depth(&p.vertex[..k]);
        if k == p.vertex.len() || k == q.vertex.len() {
            let mut i = k;
            while let (Some(a), Some(b)) = (Self::full_letter(p, i), Self::full_letter(q, i)) {
                if a != b {
                    break;
                }
                d += self.weight(a);
                i += 1;
            }
        }
        d
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let (a, b) = (self.position(p), self.position(q));
        let m = self.shared_depth(p, q).min(a).min(b);
        (a - m) + (b - m)
    }

    /// The point at distance `depth` from the root along the root path of
    /// the word `full` (a vertex word optionally extended by an edge letter).
    pub fn locate(&self, full: &[Letter], depth: f64) -> TreePoint {
        let mut acc = 0.0;
        for (i, l) in full.iter().enumerate() {
            let w = self.weight(*l);
            let rest = depth - acc;
            if rest <= SNAP {
                return TreePoint::vertex(full[..i].to_vec());
            }
            if rest < w - SNAP {
                return TreePoint { vertex: full[..i].to_vec(), edge: Some((*l, rest)) };
            }
            acc += w;
        }
        TreePoint::vertex(full.to_vec())
    }

    fn full_word(p: &TreePoint) -> Vec<Letter> {
        let mut w = p.vertex.clone();
        if let Some((l, _)) = p.edge {
            w.push(l);
        }
        w
    }

    /// Point at arclength `s` along the arc from `p` to `q`.
    pub fn geodesic_eval(&self, p: &TreePoint, q: &TreePoint, s: f64) -> Result<TreePoint, SpaceError> {
        let d = self.distance(p, q);
        if !(-SNAP..=d + 1e-9).contains(&s) {
            return Err(SpaceError::OutOfRange { s, length: d });
        }
        let (a, b) = (self.position(p), self.position(q));
        let m = self.shared_depth(p, q).min(a).min(b);
        let up = a - m;
        Ok(if s <= up {
            self.locate(&Self::full_word(p), a - s)
        } else {
            self.locate(&Self::full_word(q), (m + (s - up)).min(b))
        })
    }

    /// Distance from `x` to the arc `[p, q]` and the arclength from `p` of
    /// the nearest point.
    pub fn point_to_arc(&self, x: &TreePoint, p: &TreePoint, q: &TreePoint) -> (f64, f64) {
        let dxp = self.distance(x, p);
        let dxq = self.distance(x, q);
        let dpq = self.distance(p, q);
        let delta = ((dxp + dxq - dpq) / 2.0).max(0.0);
        let foot = (dxp - delta).clamp(0.0, dpq);
        (delta, foot)
    }

    /// Left multiplication by the reduced word `g`.
    pub fn apply(&self, g: &[Letter], p: &TreePoint) -> TreePoint {
        let v = reduced_product(g, &p.vertex);
        match p.edge {
            None => TreePoint::vertex(v),
            Some((x, o)) => {
                if v.last() == Some(&x.inverse()) {
                    let mut shorter = v;
                    let last = shorter.pop().unwrap();
                    TreePoint { vertex: shorter, edge: Some((last, self.weight(last) - o)) }
                } else {
                    TreePoint { vertex: v, edge: Some((x, o)) }
                }
            }
        }
    }

    /// Nearest vertex; ties go to the vertex nearer the root.
    pub fn nearest_vertex(&self, p: &TreePoint) -> (Vec<Letter>, f64) {
        match p.edge {
            None => (p.vertex.clone(), 0.0),
            Some((x, o)) => {
                let w = self.weight(x);
                if o <= w - o {
                    (p.vertex.clone(), o)
                } else {
                    (Self::full_word(p), w - o)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::num::q;

    fn trees() -> (WeightedTree, WeightedTree) {
        let f = parse_family("F2").unwrap();
        let unit = WeightedTree::unit(f.clone()).unwrap();
        let w = WeightAssignment::new(&f, vec![q(2), q(1)]).unwrap();
        (unit, WeightedTree::new(f, w).unwrap())
    }

    fn v(t: &WeightedTree, s: &str) -> TreePoint {
        let w = parse_word(t.family(), s).unwrap();
        let g = t.family().reduce(&w).unwrap();
        t.vertex_of(&g).unwrap()
    }

    #[test]
    fn distances() {
        let (t, t2) = trees();
        assert_eq!(t.distance(&TreePoint::root(), &v(&t, "a b")), 2.0);
        assert_eq!(t2.distance(&TreePoint::root(), &v(&t2, "a b")), 3.0);
        assert_eq!(t.distance(&v(&t, "a b"), &v(&t, "a b^-1")), 2.0);
        assert_eq!(t.distance(&v(&t, "a"), &v(&t, "a")), 0.0);
    }

    #[test]
    fn evaluation_along_arcs() {
        let (t, t2) = trees();
        let mid = t.geodesic_eval(&TreePoint::root(), &v(&t, "a^2"), 1.0).unwrap();
        assert_eq!(mid, v(&t, "a"));
        let p = t2.geodesic_eval(&TreePoint::root(), &v(&t2, "a b"), 2.5).unwrap();
        let a = parse_word(t2.family(), "a").unwrap();
        let b = parse_word(t2.family(), "b").unwrap();
        assert_eq!(p, TreePoint { vertex: a, edge: Some((b[0], 0.5)) });
        assert_eq!(t.geodesic_eval(&v(&t, "b"), &v(&t, "a"), 0.0).unwrap(), v(&t, "b"));
        assert!(t.geodesic_eval(&v(&t, "b"), &v(&t, "a"), 2.5).is_err());
        let q = t.geodesic_eval(&v(&t, "b"), &v(&t, "a"), 1.5).unwrap();
        assert_eq!(t.distance(&q, &v(&t, "a")), 0.5);
    }

    #[test]
    fn apply_flips_edges_under_cancellation() {
        let (t, _) = trees();
        let a = parse_word(t.family(), "a").unwrap();
        let ainv = parse_word(t.family(), "a^-1").unwrap();
        let p = TreePoint { vertex: a.clone(), edge: Some((a[0], 0.25)) };
        let moved = t.apply(&ainv, &p);
        assert_eq!(moved, TreePoint { vertex: vec![], edge: Some((a[0], 0.25)) });
        let back = t.apply(&ainv, &moved);
        assert_eq!(back, TreePoint { vertex: vec![], edge: Some((ainv[0], 0.75)) });
        t.validate_point(&back).unwrap();
    }

    #[test]
    fn arc_projection() {
        let (t, _) = trees();
        let (d, foot) = t.point_to_arc(&v(&t, "a b"), &TreePoint::root(), &v(&t, "a^3"));
        assert_eq!((d, foot), (1.0, 1.0));
    }

    #[test]
    fn involution_tree() {
        let f = parse_family("Z2*Z2*Z2").unwrap();
        let t = WeightedTree::unit(f).unwrap();
        let x = v(&t, "s1 s2 s3");
        let y = v(&t, "s1 s3");
        assert_eq!(t.distance(&x, &y), 3.0);
        let s1 = parse_word(t.family(), "s1").unwrap();
        assert_eq!(t.apply(&s1, &x), v(&t, "s2 s3"));
    }
}
