//! Enumeration of weighted word-length balls.

use num_traits::ToPrimitive;

use super::{GroupElement, GroupFamily, LineElem, LineFactor, Syllable, WeightAssignment};
use crate::num::{common_denominator, scaled_int, Q};

/// Integer weights after clearing denominators, plus the integer budget.
fn integer_weights(w: &WeightAssignment, radius: &Q) -> (Vec<i64>, i64) {
    let scale = common_denominator(w.weights.iter());
    let iw = w.weights.iter().map(|x| scaled_int(x, scale) as i64).collect();
    let budget = (radius * Q::from_integer(scale)).floor().to_integer();
    (iw, budget.to_i64().unwrap_or(i64::MAX))
}

fn enumerate(f: &GroupFamily, w: &[i64], budget: i64) -> Vec<(i64, GroupElement)> {
    if budget < 0 {
        return Vec::new();
    }
    match f {
        GroupFamily::Free { rank } => {
            let mut out = vec![(0, GroupElement::Free(Vec::new()))];
            let mut word = Vec::new();
            free_dfs(f, *rank, w, budget, 0, &mut word, &mut out);
            out
        }
        GroupFamily::FreeAbelian { rank } => {
            let mut out = Vec::new();
            let mut v = vec![0i64; *rank as usize];
            abelian_rec(w, budget, 0, 0, &mut v, &mut out);
            out
        }
        GroupFamily::Cyclic { order } => (0..*order)
            .filter_map(|e| {
                let c = e.min(order - e) as i64 * w[0];
                (c <= budget).then_some((c, GroupElement::Cyclic(e)))
            })
            .collect(),
        GroupFamily::FreeProduct { factors } => {
            let offs = f.factor_offsets();
            let pieces: Vec<Vec<(i64, GroupElement)>> = factors
                .iter()
                .enumerate()
                .map(|(i, fam)| {
                    let n = fam.num_generators();
                    let ws = &w[offs[i] as usize..offs[i] as usize + n];
                    let mut v: Vec<_> = enumerate(fam, ws, budget)
                        .into_iter()
                        .filter(|(_, e)| !fam.is_identity(e))
                        .collect();
                    v.sort_by_key(|(c, _)| *c);
                    v
                })
                .collect();
            let mut out = vec![(0, GroupElement::Product(Vec::new()))];
            let mut syl = Vec::new();
            product_dfs(&pieces, budget, 0, None, &mut syl, &mut out);
            out
        }
        GroupFamily::DirectWithLine { base, line } => {
            let nb = base.num_generators();
            let bases = enumerate(base, &w[..nb], budget);
            let lines = line_elements(*line, &w[nb..], budget);
            let mut out = Vec::new();
            for (lc, le) in &lines {
                for (bc, be) in &bases {
                    if bc + lc <= budget {
                        out.push((bc + lc, GroupElement::WithLine(Box::new(be.clone()), *le)));
                    }
                }
            }
            out
        }
    }
}

fn free_dfs(
    f: &GroupFamily,
    rank: u16,
    w: &[i64],
    budget: i64,
    cost: i64,
    word: &mut Vec<super::Letter>,
    out: &mut Vec<(i64, GroupElement)>,
) {
    for gen in 0..rank {
        for inv in [false, true] {
            let l = f.letter(gen, inv);
            if word.last() == Some(&l.inverse()) {
                continue;
            }
            let c = cost + w[gen as usize];
            if c > budget {
                continue;
            }
            word.push(l);
            out.push((c, GroupElement::Free(word.clone())));
            free_dfs(f, rank, w, budget, c, word, out);
            word.pop();
        }
    }
}

fn abelian_rec(w: &[i64], budget: i64, i: usize, cost: i64, v: &mut Vec<i64>, out: &mut Vec<(i64, GroupElement)>) {
    if i == v.len() {
        out.push((cost, GroupElement::Abelian(v.clone())));
        return;
    }
    let m = (budget - cost) / w[i];
    for z in -m..=m {
        v[i] = z;
        abelian_rec(w, budget, i + 1, cost + z.abs() * w[i], v, out);
    }
    v[i] = 0;
}

fn product_dfs(
    pieces: &[Vec<(i64, GroupElement)>],
    budget: i64,
    cost: i64,
    last: Option<usize>,
    syl: &mut Vec<Syllable>,
    out: &mut Vec<(i64, GroupElement)>,
) {
    for (fi, list) in pieces.iter().enumerate() {
        if Some(fi) == last {
            continue;
        }
        for (c, e) in list {
            let total = cost + c;
            if total > budget {
                break;
            }
            syl.push(Syllable { factor: fi as u16, elem: e.clone() });
            out.push((total, GroupElement::Product(syl.clone())));
            product_dfs(pieces, budget, total, Some(fi), syl, out);
            syl.pop();
        }
    }
}

fn line_elements(line: LineFactor, w: &[i64], budget: i64) -> Vec<(i64, LineElem)> {
    let mut out = vec![(0, LineElem::IDENTITY)];
    match line {
        LineFactor::Integers => {
            let m = budget / w[0];
            for t in 1..=m {
                out.push((t * w[0], LineElem::translation(t)));
                out.push((t * w[0], LineElem::translation(-t)));
            }
        }
        LineFactor::InfiniteDihedral => {
            for sign in [1i64, -1] {
                let (first, second) = if sign > 0 { (w[0], w[1]) } else { (w[1], w[0]) };
                let mut t = 1i64;
                loop {
                    let c = (t + 1) / 2 * first + t / 2 * second;
                    if c > budget {
                        break;
                    }
                    out.push((c, LineElem { flip: t % 2 == 1, t: sign * t }));
                    t += 1;
                }
            }
        }
    }
    out
}

/// Calls `f` on every element of weighted length at most `radius`, with its
/// length. Order is unspecified; use [`ball`] for the canonical order.
pub fn for_each_in_ball(family: &GroupFamily, w: &WeightAssignment, radius: &Q, mut f: impl FnMut(&GroupElement, Q)) {
    let scale = common_denominator(w.weights.iter());
    let (iw, budget) = integer_weights(w, radius);
    for (c, e) in enumerate(family, &iw, budget) {
        f(&e, Q::new(c as i128, scale));
    }
}

/// All elements of weighted length at most `radius`, each once, ordered by
/// length and then lexicographically by canonical word.
pub fn ball(family: &GroupFamily, w: &WeightAssignment, radius: &Q) -> Vec<GroupElement> {
    let (iw, budget) = integer_weights(w, radius);
    let mut keyed: Vec<(i64, Vec<super::Letter>, GroupElement)> = enumerate(family, &iw, budget)
        .into_iter()
        .map(|(c, e)| (c, family.letters(&e), e))
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.into_iter().map(|(_, _, e)| e).collect()
}

pub fn ball_count(family: &GroupFamily, w: &WeightAssignment, radius: &Q) -> usize {
    let (iw, budget) = integer_weights(w, radius);
    enumerate(family, &iw, budget).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_family, parse_word};
    use crate::num::q;
    use std::collections::{HashSet, VecDeque};

    /// Breadth-first search on the Cayley graph with unit weights.
    fn bfs_count(f: &GroupFamily, radius: u64) -> usize {
        let n = f.num_generators() as u16;
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(f.identity());
        queue.push_back((f.identity(), 0u64));
        while let Some((g, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for gen in 0..n {
                for inv in [false, true] {
                    let mut h = g.clone();
                    f.mul_letter(&mut h, f.letter(gen, inv));
                    if seen.insert(h.clone()) {
                        queue.push_back((h, d + 1));
                    }
                }
            }
        }
        seen.len()
    }

    #[test]
    fn free_ball_counts() {
        let f = parse_family("F2").unwrap();
        let w = WeightAssignment::unit(&f);
        let b1 = ball(&f, &w, &q(1));
        assert_eq!(b1.len(), 5);
        for l in 0..=6u32 {
            let expected = 1 + 4 * (3usize.pow(l) - 1) / 2;
            assert_eq!(ball_count(&f, &w, &q(l as i128)), expected);
            assert_eq!(bfs_count(&f, l as u64), expected);
        }
    }

    #[test]
    fn ball_matches_bfs_for_mixed_families() {
        for text in ["Z2*Z2*Z2", "(ZxZ)*Z2", "F2xZ", "Z^2*Z3", "(Z2*Z2*Z2)x(Z2*Z2)"] {
            let f = parse_family(text).unwrap();
            let w = WeightAssignment::unit(&f);
            for l in 0..=4 {
                assert_eq!(ball_count(&f, &w, &q(l)), bfs_count(&f, l as u64), "{text} L={l}");
            }
        }
    }

    #[test]
    fn weighted_ball_membership() {
        let f = parse_family("F2").unwrap();
        let w = WeightAssignment::new(&f, vec![q(2), q(1)]).unwrap();
        let el = |s: &str| f.reduce(&parse_word(&f, s).unwrap()).unwrap();
        let b2 = ball(&f, &w, &q(2));
        assert!(b2.contains(&el("b^2")));
        assert!(b2.contains(&el("a")));
        assert!(!b2.contains(&el("a b")));
        assert!(ball(&f, &w, &q(3)).contains(&el("a b")));
    }

    #[test]
    fn ball_is_sorted_and_unique() {
        let f = parse_family("(F2xZ)*Z2").unwrap();
        let w = WeightAssignment::unit(&f);
        let b = ball(&f, &w, &q(3));
        let set: HashSet<_> = b.iter().cloned().collect();
        assert_eq!(set.len(), b.len());
        for p in b.windows(2) {
            assert!(f.enumeration_cmp(&w, &p[0], &p[1]).is_lt());
        }
        assert_eq!(b[0], f.identity());
    }

    #[test]
    fn small_radius_gives_identity_only() {
        let f = parse_family("F2").unwrap();
        let w = WeightAssignment::new(&f, vec![q(2), q(2)]).unwrap();
        assert_eq!(ball(&f, &w, &q(1)), vec![f.identity()]);
    }
}
