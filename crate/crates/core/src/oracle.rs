//! Shortest-path oracles: Dijkstra on graphs built from the model spaces
//! without using their closed-form distance formulas.

use std::collections::HashMap;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

use crate::groups::{ball, GroupElement, GroupFamily, Letter, WeightAssignment};
use crate::num::{to_f64, Q};
use crate::spaces::flat::euclid;
use crate::spaces::{ComplexPoint, FreeProductComplex, Local, PieceSpec, ProductPoint, ProductSpace, SpaceError, TreePoint, WeightedTree};

fn shortest(g: &UnGraph<(), f64>, a: NodeIndex, b: NodeIndex) -> f64 {
    dijkstra(g, a, Some(b), |e| *e.weight()).get(&b).copied().unwrap_or(f64::INFINITY)
}

/// Ball of the tree with every edge cut into pieces no longer than `mesh`;
/// points are snapped to the nearest subdivision node.
pub fn tree_distance(tree: &WeightedTree, p: &TreePoint, q: &TreePoint, mesh: f64) -> Result<f64, SpaceError> {
    if mesh <= 0.0 {
        return Err(SpaceError::InvalidPoint(format!("mesh {mesh} must be positive")));
    }
    tree.validate_point(p)?;
    tree.validate_point(q)?;
    let fam = tree.family();
    let radius = p.vertex.len().max(q.vertex.len()) + 1;
    let mut g = UnGraph::<(), f64>::new_undirected();
    let mut vertex: HashMap<Vec<Letter>, NodeIndex> = HashMap::new();
    // Interior nodes of the edge ending at each non-root vertex, parent side first.
    let mut inner: HashMap<Vec<Letter>, Vec<NodeIndex>> = HashMap::new();
    for e in ball(fam, &WeightAssignment::unit(fam), &Q::from_integer(radius as i128)) {
        let w = fam.letters(&e);
        let id = g.add_node(());
        vertex.insert(w, id);
    }
    let mut words: Vec<Vec<Letter>> = vertex.keys().cloned().collect();
    words.sort_by_key(|w| w.len());
    for w in words.iter().filter(|w| !w.is_empty()) {
        let parent = vertex[&w[..w.len() - 1]];
        let child = vertex[w];
        let weight = tree.weight(*w.last().expect("nonempty"));
        let k = (weight / mesh).ceil().max(1.0) as usize;
        let step = weight / k as f64;
        let mut nodes = Vec::with_capacity(k - 1);
        let mut prev = parent;
        for _ in 1..k {
            let n = g.add_node(());
            g.add_edge(prev, n, step);
            nodes.push(n);
            prev = n;
        }
        g.add_edge(prev, child, step);
        inner.insert(w.clone(), nodes);
    }
    let locate = |p: &TreePoint| -> NodeIndex {
        match p.edge {
            None => vertex[&p.vertex],
            Some((l, o)) => {
                let mut child = p.vertex.clone();
                child.push(l);
                let nodes = &inner[&child];
                let k = nodes.len() + 1;
                let j = (o / (tree.weight(l) / k as f64)).round() as usize;
                match j {
                    0 => vertex[&p.vertex],
                    j if j >= k => vertex[&child],
                    j => nodes[j - 1],
                }
            }
        }
    };
    Ok(shortest(&g, locate(p), locate(q)))
}

/// Tree oracle for the tree coordinate, combined with the height difference
/// by the ℓ² product rule.
pub fn product_distance(space: &ProductSpace, p: &ProductPoint, q: &ProductPoint, mesh: f64) -> Result<f64, SpaceError> {
    Ok(tree_distance(&space.tree, &p.tree, &q.tree, mesh)?.hypot(p.height - q.height))
}

enum Shape {
    Flat(Vec<Vec<f64>>),
    Cone(f64),
}

fn shapes(c: &FreeProductComplex) -> Result<Vec<Shape>, SpaceError> {
    c.specs()
        .iter()
        .map(|s| match s {
            PieceSpec::FlatLattice { basis } => {
                Ok(Shape::Flat(basis.iter().map(|r| r.iter().map(to_f64).collect()).collect()))
            }
            PieceSpec::Cone { spoke, .. } => Ok(Shape::Cone(to_f64(spoke))),
            PieceSpec::Interval { length } => Ok(Shape::Cone(to_f64(length) / 2.0)),
            PieceSpec::TreeTimesLine { .. } => Err(SpaceError::Unsupported("graph oracle for tree×line pieces".into())),
        })
        .collect()
}

fn flat_coords(basis: &[Vec<f64>], s: &GroupElement) -> Vec<f64> {
    let GroupElement::Abelian(z) = s else { panic!("lattice factor element") };
    let mut x = vec![0.0; basis.len()];
    for (zi, row) in z.iter().zip(basis) {
        for (o, b) in x.iter_mut().zip(row) {
            *o += *zi as f64 * b;
        }
    }
    x
}

fn anchor(p: &ComplexPoint) -> &GroupElement {
    match p {
        ComplexPoint::Vertex(v) => v,
        ComplexPoint::Interior { coset, .. } => coset,
    }
}

/// Graph of the complex near `p` and `q`: orbit points reachable in a few
/// syllables from short factor balls, every pair of orbit points in one flat
/// copy joined by a straight edge, cone copies as stars on their apex.
pub fn complex_distance(c: &FreeProductComplex, p: &ComplexPoint, q: &ComplexPoint) -> Result<f64, SpaceError> {
    let fam = c.family();
    let shapes = shapes(c)?;
    let factors: Vec<GroupFamily> = fam.factors()?.to_vec();
    let syl = |g: &GroupElement| fam.syllables(g);
    let mut depth = 0usize;
    let mut rho = 1u64;
    for g in [anchor(p), anchor(q)] {
        let s = syl(g)?;
        depth = depth.max(s.len());
        for (f, e) in &s {
            rho = rho.max(factors[*f].word_length(e));
        }
    }
    let (depth, rho) = (depth + 1, rho + 1);
    let factor_balls: Vec<Vec<GroupElement>> = factors
        .iter()
        .map(|f| {
            ball(f, &WeightAssignment::unit(f), &Q::from_integer(rho as i128))
                .into_iter()
                .filter(|e| !f.is_identity(e))
                .collect()
        })
        .collect();
    let mut elems = vec![fam.identity()];
    let mut frontier = elems.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for e in &frontier {
            let last = syl(e)?.last().map(|(f, _)| *f);
            for (f, fb) in factor_balls.iter().enumerate() {
                if Some(f) == last {
                    continue;
                }
                for s in fb {
                    next.push(fam.multiply(e, &fam.from_factor(f, s.clone())?)?);
                }
            }
        }
        elems.extend(next.iter().cloned());
        frontier = next;
    }

    let mut g = UnGraph::<(), f64>::new_undirected();
    let mut node: HashMap<GroupElement, NodeIndex> = HashMap::new();
    for e in &elems {
        node.entry(e.clone()).or_insert_with(|| g.add_node(()));
    }
    let mut copies: HashMap<(GroupElement, usize), Vec<(GroupElement, NodeIndex)>> = HashMap::new();
    for (e, &id) in &node {
        for f in 0..factors.len() {
            let (rep, s) = c.coset_frame(e, f);
            copies.entry((rep, f)).or_default().push((s, id));
        }
    }
    let mut apex: HashMap<(GroupElement, usize), NodeIndex> = HashMap::new();
    for ((rep, f), members) in &copies {
        match &shapes[*f] {
            Shape::Flat(basis) => {
                let coords: Vec<Vec<f64>> = members.iter().map(|(s, _)| flat_coords(basis, s)).collect();
                for i in 0..members.len() {
                    for j in i + 1..members.len() {
                        g.add_edge(members[i].1, members[j].1, euclid(&coords[i], &coords[j]));
                    }
                }
            }
            Shape::Cone(spoke) => {
                let a = g.add_node(());
                for (_, id) in members {
                    g.add_edge(a, *id, *spoke);
                }
                apex.insert((rep.clone(), *f), a);
            }
        }
    }

    let place = |pt: &ComplexPoint, g: &mut UnGraph<(), f64>| -> Result<NodeIndex, SpaceError> {
        match pt {
            ComplexPoint::Vertex(v) => node
                .get(v)
                .copied()
                .ok_or_else(|| SpaceError::InvalidPoint("vertex outside the oracle graph".into())),
            ComplexPoint::Interior { coset, factor, local } => {
                let key = (coset.clone(), *factor);
                let members = copies
                    .get(&key)
                    .ok_or_else(|| SpaceError::InvalidPoint("copy outside the oracle graph".into()))?;
                let id = g.add_node(());
                match (&shapes[*factor], local) {
                    (Shape::Flat(basis), Local::Flat(x)) => {
                        for (s, m) in members {
                            g.add_edge(id, *m, euclid(x, &flat_coords(basis, s)));
                        }
                    }
                    (Shape::Cone(spoke), Local::Cone { spoke: k, r }) => {
                        g.add_edge(id, apex[&key], *r);
                        if let Some((_, m)) = members.iter().find(|(s, _)| *s == GroupElement::Cyclic(*k)) {
                            g.add_edge(id, *m, spoke - r);
                        }
                    }
                    _ => return Err(SpaceError::Mismatch),
                }
                Ok(id)
            }
        }
    };
    let a = place(p, &mut g)?;
    let b = place(q, &mut g)?;
    // Two interior points of one copy see each other directly.
    if let (
        ComplexPoint::Interior { coset: c1, factor: f1, local: l1 },
        ComplexPoint::Interior { coset: c2, factor: f2, local: l2 },
    ) = (p, q)
    {
        if c1 == c2 && f1 == f2 {
            let d = match (&shapes[*f1], l1, l2) {
                (Shape::Flat(_), Local::Flat(x), Local::Flat(y)) => euclid(x, y),
                (Shape::Cone(_), Local::Cone { spoke: k1, r: r1 }, Local::Cone { spoke: k2, r: r2 }) => {
                    if k1 == k2 {
                        (r1 - r2).abs()
                    } else {
                        r1 + r2
                    }
                }
                _ => return Err(SpaceError::Mismatch),
            };
            g.add_edge(a, b, d);
        }
    }
    Ok(shortest(&g, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::num::q;

    #[test]
    fn tree_oracle_matches_on_vertices_and_edges() {
        let fam = parse_family("F2").unwrap();
        let w = WeightAssignment::new(&fam, vec![q(2), q(1)]).unwrap();
        let t = WeightedTree::new(fam.clone(), w).unwrap();
        let p = TreePoint::vertex(parse_word(&fam, "a b a^-1").unwrap());
        let qq = TreePoint { vertex: parse_word(&fam, "b").unwrap(), edge: Some((fam.letter(0, false), 0.5)) };
        let exact = t.distance(&p, &qq);
        let graph = tree_distance(&t, &p, &qq, 0.25).unwrap();
        assert!((exact - graph).abs() < 1e-9);
    }

    #[test]
    fn complex_oracle_matches_syllable_sum() {
        let fam = parse_family("(ZxZ)*Z2").unwrap();
        let c = FreeProductComplex::new(
            fam.clone(),
            vec![
                PieceSpec::FlatLattice { basis: vec![vec![q(1), q(0)], vec![q(0), q(1)]] },
                PieceSpec::Interval { length: q(1) },
            ],
        )
        .unwrap();
        let g = fam.reduce(&parse_word(&fam, "x y s x").unwrap()).unwrap();
        let p = ComplexPoint::Vertex(fam.identity());
        let qv = ComplexPoint::Vertex(g);
        let d = complex_distance(&c, &p, &qv).unwrap();
        assert!((d - (2f64.sqrt() + 2.0)).abs() < 1e-9);
        assert!((d - c.distance(&p, &qv)).abs() < 1e-9);
    }
}
