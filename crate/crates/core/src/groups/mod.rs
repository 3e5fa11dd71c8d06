//! Normal forms, arithmetic and enumeration for the supported group families.

mod ball;
mod parse;

pub use ball::{ball, ball_count, for_each_in_ball};
pub use parse::{format_word, parse_family, parse_word};

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid group family: {0}")]
    InvalidFamily(String),
    #[error("cannot parse family `{0}`")]
    FamilySyntax(String),
    #[error("element does not belong to the family")]
    FamilyMismatch,
    #[error("operation needs a free product family")]
    NotFreeProduct,
    #[error("family has no tree Cayley graph: {0}")]
    NotATree(String),
    #[error("weight for generator `{0}` must be positive")]
    NonPositiveWeight(String),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
}

/// The line factor of a `DirectWithLine` family: ℤ acting by translations, or
/// ℤ₂∗ℤ₂ acting on the line by reflections in the half-integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineFactor {
    Integers,
    InfiniteDihedral,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupFamily {
    Free { rank: u16 },
    FreeAbelian { rank: u16 },
    Cyclic { order: u32 },
    FreeProduct { factors: Vec<GroupFamily> },
    DirectWithLine { base: Box<GroupFamily>, line: LineFactor },
}

/// A generator or its inverse. Bits: `gen << 2 | involution << 1 | inverted`.
/// Involutions never carry the inverted bit, so `inverse` needs no family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u16);

impl Letter {
    pub fn new(gen: u16, involution: bool, inverted: bool) -> Letter {
        let inv = inverted && !involution;
        Letter(gen << 2 | (involution as u16) << 1 | inv as u16)
    }

    pub fn gen(self) -> u16 {
        self.0 >> 2
    }

    pub fn is_involution(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn is_inverted(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn inverse(self) -> Letter {
        if self.is_involution() {
            self
        } else {
            Letter(self.0 ^ 1)
        }
    }

    /// +1 for a generator, −1 for an inverse (involutions count +1).
    pub fn sign(self) -> i64 {
        if self.is_inverted() {
            -1
        } else {
            1
        }
    }

    fn shifted(self, offset: u16) -> Letter {
        Letter(self.0 + (offset << 2))
    }

    fn unshifted(self, offset: u16) -> Letter {
        Letter(self.0 - (offset << 2))
    }
}

/// An element of ℤ or of ℤ₂∗ℤ₂, stored as the affine isometry
/// `x ↦ ±x + t` of the line it acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineElem {
    pub flip: bool,
    pub t: i64,
}

impl LineElem {
    pub const IDENTITY: LineElem = LineElem { flip: false, t: 0 };

    pub fn translation(t: i64) -> LineElem {
        LineElem { flip: false, t }
    }

    pub fn compose(self, other: LineElem) -> LineElem {
        let t2 = if self.flip { -other.t } else { other.t };
        LineElem { flip: self.flip ^ other.flip, t: self.t + t2 }
    }

    pub fn inverse(self) -> LineElem {
        if self.flip {
            self
        } else {
            LineElem { flip: false, t: -self.t }
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        if self.flip {
            -x + self.t as f64
        } else {
            x + self.t as f64
        }
    }

    pub fn word_length(self) -> u64 {
        self.t.unsigned_abs()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: u16,
    pub elem: GroupElement,
}

/// Normal form of a group element. The family is not stored; every
/// operation takes it explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupElement {
    /// Freely reduced word over local generators `0..rank`.
    Free(Vec<Letter>),
    Abelian(Vec<i64>),
    /// Exponent reduced mod the order.
    Cyclic(u32),
    /// Alternating nontrivial syllables, left to right.
    Product(Vec<Syllable>),
    WithLine(Box<GroupElement>, LineElem),
}

impl GroupElement {
    pub fn base(&self) -> Option<&GroupElement> {
        match self {
            GroupElement::WithLine(b, _) => Some(b),
            _ => None,
        }
    }

    pub fn line(&self) -> Option<LineElem> {
        match self {
            GroupElement::WithLine(_, l) => Some(*l),
            _ => None,
        }
    }
}

/// Positive length per global generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub weights: Vec<Q>,
}

impl WeightAssignment {
    pub fn unit(family: &GroupFamily) -> WeightAssignment {
        WeightAssignment { weights: vec![Q::from_integer(1); family.num_generators()] }
    }

    pub fn new(family: &GroupFamily, weights: Vec<Q>) -> Result<WeightAssignment, GroupError> {
        let n = family.num_generators();
        if weights.len() != n {
            return Err(GroupError::WeightCount { expected: n, got: weights.len() });
        }
        let names = family.generator_names();
        for (w, name) in weights.iter().zip(&names) {
            if *w <= Q::from_integer(0) {
                return Err(GroupError::NonPositiveWeight(name.clone()));
            }
        }
        Ok(WeightAssignment { weights })
    }

    /// Builds weights from `name = value` pairs; unnamed generators get 1.
    pub fn from_named(family: &GroupFamily, named: &[(String, Q)]) -> Result<WeightAssignment, GroupError> {
        let names = family.generator_names();
        let mut w = vec![Q::from_integer(1); names.len()];
        for (n, v) in named {
            let idx = names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| GroupError::UnknownGenerator(n.clone()))?;
            w[idx] = *v;
        }
        WeightAssignment::new(family, w)
    }

    pub fn weight(&self, l: Letter) -> Q {
        self.weights[l.gen() as usize]
    }

    pub fn min_weight(&self) -> Q {
        self.weights.iter().copied().min().unwrap_or(Q::from_integer(1))
    }

    pub fn max_weight(&self) -> Q {
        self.weights.iter().copied().max().unwrap_or(Q::from_integer(1))
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.weights.iter().map(crate::num::to_f64).collect()
    }
}

impl GroupFamily {
    pub fn validate(&self) -> Result<(), GroupError> {
        match self {
            GroupFamily::Free { rank } | GroupFamily::FreeAbelian { rank } if *rank == 0 => {
                Err(GroupError::InvalidFamily("rank must be at least 1".into()))
            }
            GroupFamily::Cyclic { order } if *order < 2 => {
                Err(GroupError::InvalidFamily("cyclic order must be at least 2".into()))
            }
            GroupFamily::FreeProduct { factors } => {
                if factors.len() < 2 {
                    return Err(GroupError::InvalidFamily("a free product needs at least two factors".into()));
                }
                for f in factors {
                    if matches!(f, GroupFamily::FreeProduct { .. }) {
                        return Err(GroupError::InvalidFamily("nested free products are not supported".into()));
                    }
                    f.validate()?;
                }
                Ok(())
            }
            GroupFamily::DirectWithLine { base, .. } => {
                if matches!(**base, GroupFamily::DirectWithLine { .. }) {
                    return Err(GroupError::InvalidFamily("line factor given twice".into()));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn num_generators(&self) -> usize {
        match self {
            GroupFamily::Free { rank } | GroupFamily::FreeAbelian { rank } => *rank as usize,
            GroupFamily::Cyclic { .. } => 1,
            GroupFamily::FreeProduct { factors } => factors.iter().map(|f| f.num_generators()).sum(),
            GroupFamily::DirectWithLine { base, line } => {
                base.num_generators()
                    + match line {
                        LineFactor::Integers => 1,
                        LineFactor::InfiniteDihedral => 2,
                    }
            }
        }
    }

    /// Whether global generator `gen` has order two.
    pub fn is_involution(&self, gen: u16) -> bool {
        match self {
            GroupFamily::Cyclic { order } => *order == 2,
            GroupFamily::FreeProduct { factors } => {
                let (f, local) = self.factor_of_gen(gen);
                factors[f].is_involution(local)
            }
            GroupFamily::DirectWithLine { base, line } => {
                let nb = base.num_generators() as u16;
                if gen < nb {
                    base.is_involution(gen)
                } else {
                    *line == LineFactor::InfiniteDihedral
                }
            }
            _ => false,
        }
    }

    pub fn letter(&self, gen: u16, inverted: bool) -> Letter {
        Letter::new(gen, self.is_involution(gen), inverted)
    }

    /// Offsets of each factor's generators in the global numbering.
    pub fn factor_offsets(&self) -> Vec<u16> {
        match self {
            GroupFamily::FreeProduct { factors } => {
                let mut acc = 0u16;
                factors
                    .iter()
                    .map(|f| {
                        let o = acc;
                        acc += f.num_generators() as u16;
                        o
                    })
                    .collect()
            }
            _ => vec![0],
        }
    }

    fn factor_of_gen(&self, gen: u16) -> (usize, u16) {
        let offs = self.factor_offsets();
        let f = offs.iter().rposition(|o| *o <= gen).unwrap_or(0);
        (f, gen - offs[f])
    }

    pub fn factors(&self) -> Result<&[GroupFamily], GroupError> {
        match self {
            GroupFamily::FreeProduct { factors } => Ok(factors),
            _ => Err(GroupError::NotFreeProduct),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupFamily::Free { .. } => GroupElement::Free(Vec::new()),
            GroupFamily::FreeAbelian { rank } => GroupElement::Abelian(vec![0; *rank as usize]),
            GroupFamily::Cyclic { .. } => GroupElement::Cyclic(0),
            GroupFamily::FreeProduct { .. } => GroupElement::Product(Vec::new()),
            GroupFamily::DirectWithLine { base, .. } => {
                GroupElement::WithLine(Box::new(base.identity()), LineElem::IDENTITY)
            }
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        match g {
            GroupElement::Free(w) => w.is_empty(),
            GroupElement::Abelian(v) => v.iter().all(|x| *x == 0),
            GroupElement::Cyclic(e) => *e == 0,
            GroupElement::Product(s) => s.is_empty(),
            GroupElement::WithLine(b, l) => *l == LineElem::IDENTITY && self.base_family().is_identity(b),
        }
    }

    fn base_family(&self) -> &GroupFamily {
        match self {
            GroupFamily::DirectWithLine { base, .. } => base,
            other => other,
        }
    }

    /// Whether `g` is a well-formed normal form for this family.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupFamily::Free { rank }, GroupElement::Free(w)) => {
                w.iter().all(|l| l.gen() < *rank && !l.is_involution())
                    && w.windows(2).all(|p| p[0].inverse() != p[1])
            }
            (GroupFamily::FreeAbelian { rank }, GroupElement::Abelian(v)) => v.len() == *rank as usize,
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(e)) => e < order,
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(s)) => {
                s.iter().all(|syl| {
                    (syl.factor as usize) < factors.len()
                        && factors[syl.factor as usize].contains(&syl.elem)
                        && !factors[syl.factor as usize].is_identity(&syl.elem)
                }) && s.windows(2).all(|p| p[0].factor != p[1].factor)
            }
            (GroupFamily::DirectWithLine { base, line }, GroupElement::WithLine(b, l)) => {
                let line_ok = match line {
                    LineFactor::Integers => !l.flip,
                    LineFactor::InfiniteDihedral => l.flip == (l.t.rem_euclid(2) == 1),
                };
                line_ok && base.contains(b)
            }
            _ => false,
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::FamilyMismatch)
        }
    }

    /// Right-multiplies `g` in place by one global letter.
    pub fn mul_letter(&self, g: &mut GroupElement, l: Letter) {
        match (self, g) {
            (GroupFamily::Free { .. }, GroupElement::Free(w)) => {
                if w.last() == Some(&l.inverse()) {
                    w.pop();
                } else {
                    w.push(l);
                }
            }
            (GroupFamily::FreeAbelian { .. }, GroupElement::Abelian(v)) => v[l.gen() as usize] += l.sign(),
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(e)) => {
                let m = *order as i64;
                *e = (*e as i64 + l.sign()).rem_euclid(m) as u32;
            }
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(s)) => {
                let (f, _) = self.factor_of_gen(l.gen());
                let offs = self.factor_offsets();
                let local = l.unshifted(offs[f]);
                let fam = &factors[f];
                match s.last_mut() {
                    Some(last) if last.factor as usize == f => {
                        fam.mul_letter(&mut last.elem, local);
                        if fam.is_identity(&last.elem) {
                            s.pop();
                        }
                    }
                    _ => {
                        let mut e = fam.identity();
                        fam.mul_letter(&mut e, local);
                        s.push(Syllable { factor: f as u16, elem: e });
                    }
                }
            }
            (GroupFamily::DirectWithLine { base, line }, GroupElement::WithLine(b, le)) => {
                let nb = base.num_generators() as u16;
                if l.gen() < nb {
                    base.mul_letter(b, l);
                } else {
                    let step = match line {
                        LineFactor::Integers => LineElem::translation(l.sign()),
                        LineFactor::InfiniteDihedral => LineElem {
                            flip: true,
                            t: if l.gen() == nb { 1 } else { -1 },
                        },
                    };
                    *le = le.compose(step);
                }
            }
            _ => panic!("letter applied to element of a different family"),
        }
    }

    /// Normal form of a raw word of global letters.
    pub fn reduce(&self, word: &[Letter]) -> Result<GroupElement, GroupError> {
        let n = self.num_generators() as u16;
        let mut g = self.identity();
        for l in word {
            if l.gen() >= n {
                return Err(GroupError::UnknownGenerator(format!("#{}", l.gen())));
            }
            let canon = self.letter(l.gen(), l.is_inverted());
            self.mul_letter(&mut g, canon);
        }
        Ok(g)
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    fn mul_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (GroupFamily::Free { .. }, GroupElement::Free(a), GroupElement::Free(b)) => {
                let mut k = 0;
                while k < a.len() && k < b.len() && a[a.len() - 1 - k].inverse() == b[k] {
                    k += 1;
                }
                let mut w = Vec::with_capacity(a.len() + b.len() - 2 * k);
                w.extend_from_slice(&a[..a.len() - k]);
                w.extend_from_slice(&b[k..]);
                GroupElement::Free(w)
            }
            (GroupFamily::FreeAbelian { .. }, GroupElement::Abelian(a), GroupElement::Abelian(b)) => {
                GroupElement::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(a), GroupElement::Cyclic(b)) => {
                GroupElement::Cyclic(((*a as u64 + *b as u64) % *order as u64) as u32)
            }
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(a), GroupElement::Product(b)) => {
                let mut out: Vec<Syllable> = a.clone();
                let mut rest = b.iter();
                for syl in rest.by_ref() {
                    match out.last_mut() {
                        Some(last) if last.factor == syl.factor => {
                            let fam = &factors[syl.factor as usize];
                            let merged = fam.mul_unchecked(&last.elem, &syl.elem);
                            if fam.is_identity(&merged) {
                                out.pop();
                                continue;
                            }
                            last.elem = merged;
                            break;
                        }
                        _ => {
                            out.push(syl.clone());
                            break;
                        }
                    }
                }
                out.extend(rest.cloned());
                GroupElement::Product(out)
            }
            (GroupFamily::DirectWithLine { base, .. }, GroupElement::WithLine(a, la), GroupElement::WithLine(b, lb)) => {
                GroupElement::WithLine(Box::new(base.mul_unchecked(a, b)), la.compose(*lb))
            }
            _ => panic!("multiply called with mismatched families"),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (GroupFamily::Free { .. }, GroupElement::Free(w)) => {
                GroupElement::Free(w.iter().rev().map(|l| l.inverse()).collect())
            }
            (GroupFamily::FreeAbelian { .. }, GroupElement::Abelian(v)) => {
                GroupElement::Abelian(v.iter().map(|x| -x).collect())
            }
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(e)) => GroupElement::Cyclic((order - e) % order),
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(s)) => GroupElement::Product(
                s.iter()
                    .rev()
                    .map(|syl| Syllable {
                        factor: syl.factor,
                        elem: factors[syl.factor as usize].inverse(&syl.elem),
                    })
                    .collect(),
            ),
            (GroupFamily::DirectWithLine { base, .. }, GroupElement::WithLine(b, l)) => {
                GroupElement::WithLine(Box::new(base.inverse(b)), l.inverse())
            }
            _ => panic!("inverse called with mismatched family"),
        }
    }

    pub fn pow(&self, g: &GroupElement, n: u64) -> GroupElement {
        let mut acc = self.identity();
        let mut base = g.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul_unchecked(&base, &base);
            }
        }
        acc
    }

    /// Alternating syllable decomposition of an element of a free product.
    pub fn syllables(&self, g: &GroupElement) -> Result<Vec<(usize, GroupElement)>, GroupError> {
        self.factors()?;
        self.check(g)?;
        match g {
            GroupElement::Product(s) => Ok(s.iter().map(|x| (x.factor as usize, x.elem.clone())).collect()),
            _ => Err(GroupError::NotFreeProduct),
        }
    }

    /// Embeds a factor element as an element of the free product.
    pub fn from_factor(&self, factor: usize, elem: GroupElement) -> Result<GroupElement, GroupError> {
        let factors = self.factors()?;
        let fam = factors.get(factor).ok_or(GroupError::FamilyMismatch)?;
        fam.check(&elem)?;
        if fam.is_identity(&elem) {
            return Ok(GroupElement::Product(Vec::new()));
        }
        Ok(GroupElement::Product(vec![Syllable { factor: factor as u16, elem }]))
    }

    /// Canonical word in global letters.
    pub fn letters(&self, g: &GroupElement) -> Vec<Letter> {
        let mut out = Vec::new();
        self.push_letters(g, 0, &mut out);
        out
    }

    fn push_letters(&self, g: &GroupElement, offset: u16, out: &mut Vec<Letter>) {
        match (self, g) {
            (GroupFamily::Free { .. }, GroupElement::Free(w)) => out.extend(w.iter().map(|l| l.shifted(offset))),
            (GroupFamily::FreeAbelian { .. }, GroupElement::Abelian(v)) => {
                for (i, x) in v.iter().enumerate() {
                    let l = Letter::new(offset + i as u16, false, *x < 0);
                    out.extend(std::iter::repeat(l).take(x.unsigned_abs() as usize));
                }
            }
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(e)) => {
                let invol = *order == 2;
                let (count, inv) = if 2 * e <= *order { (*e, false) } else { (order - e, true) };
                let l = Letter::new(offset, invol, inv);
                out.extend(std::iter::repeat(l).take(count as usize));
            }
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(s)) => {
                let offs = self.factor_offsets();
                for syl in s {
                    factors[syl.factor as usize].push_letters(&syl.elem, offset + offs[syl.factor as usize], out);
                }
            }
            (GroupFamily::DirectWithLine { base, line }, GroupElement::WithLine(b, l)) => {
                base.push_letters(b, offset, out);
                let nb = offset + base.num_generators() as u16;
                match line {
                    LineFactor::Integers => {
                        let lt = Letter::new(nb, false, l.t < 0);
                        out.extend(std::iter::repeat(lt).take(l.t.unsigned_abs() as usize));
                    }
                    LineFactor::InfiniteDihedral => {
                        let (first, second) = if l.t > 0 { (nb, nb + 1) } else { (nb + 1, nb) };
                        for k in 0..l.t.unsigned_abs() {
                            let gen = if k % 2 == 0 { first } else { second };
                            out.push(Letter::new(gen, true, false));
                        }
                    }
                }
            }
            _ => panic!("letters called with mismatched family"),
        }
    }

    /// Unweighted word length with respect to the union generating set.
    pub fn word_length(&self, g: &GroupElement) -> u64 {
        match (self, g) {
            (GroupFamily::Free { .. }, GroupElement::Free(w)) => w.len() as u64,
            (GroupFamily::FreeAbelian { .. }, GroupElement::Abelian(v)) => v.iter().map(|x| x.unsigned_abs()).sum(),
            (GroupFamily::Cyclic { order }, GroupElement::Cyclic(e)) => (*e).min(order - e) as u64,
            (GroupFamily::FreeProduct { factors }, GroupElement::Product(s)) => {
                s.iter().map(|x| factors[x.factor as usize].word_length(&x.elem)).sum()
            }
            (GroupFamily::DirectWithLine { base, .. }, GroupElement::WithLine(b, l)) => {
                base.word_length(b) + l.word_length()
            }
            _ => panic!("word_length called with mismatched family"),
        }
    }

    /// Weighted word length for any family: sum of weights over the
    /// canonical word.
    pub fn length(&self, g: &GroupElement, w: &WeightAssignment) -> Q {
        self.letters(g).iter().map(|l| w.weight(*l)).sum()
    }

    /// Whether the Cayley graph over the standard generators is a tree.
    pub fn is_tree_family(&self) -> bool {
        match self {
            GroupFamily::Free { .. } => true,
            GroupFamily::FreeProduct { factors } => factors
                .iter()
                .all(|f| matches!(f, GroupFamily::Free { .. } | GroupFamily::Cyclic { order: 2 })),
            _ => false,
        }
    }

    /// Weighted length; defined only when the Cayley graph is a tree, where it
    /// equals the tree distance from the identity vertex.
    pub fn weighted_length(&self, g: &GroupElement, w: &WeightAssignment) -> Result<Q, GroupError> {
        if !self.is_tree_family() {
            return Err(GroupError::NotATree(self.to_string()));
        }
        self.check(g)?;
        Ok(self.length(g, w))
    }

    pub fn generator_names(&self) -> Vec<String> {
        parse::default_names(self)
    }

    pub fn format(&self, g: &GroupElement) -> String {
        parse::format_word(self, &self.letters(g))
    }

    /// Total order used for deterministic enumeration: length, then letters.
    pub fn enumeration_cmp(&self, w: &WeightAssignment, g: &GroupElement, h: &GroupElement) -> Ordering {
        self.length(g, w)
            .cmp(&self.length(h, w))
            .then_with(|| self.letters(g).cmp(&self.letters(h)))
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupFamily::Free { rank } => write!(f, "F{rank}"),
            GroupFamily::FreeAbelian { rank: 1 } => write!(f, "Z"),
            GroupFamily::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            GroupFamily::Cyclic { order } => write!(f, "Z{order}"),
            GroupFamily::FreeProduct { factors } => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|x| match x {
                        GroupFamily::DirectWithLine { .. } => format!("({x})"),
                        _ => x.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            GroupFamily::DirectWithLine { base, line } => {
                let b = match **base {
                    GroupFamily::FreeProduct { .. } => format!("({base})"),
                    _ => base.to_string(),
                };
                match line {
                    LineFactor::Integers => write!(f, "{b}xZ"),
                    LineFactor::InfiniteDihedral => write!(f, "{b}x(Z2*Z2)"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn f2() -> GroupFamily {
        GroupFamily::Free { rank: 2 }
    }

    #[test]
    fn free_reduction() {
        let g = f2();
        let w = parse_word(&g, "a b b^-1").unwrap();
        assert_eq!(g.reduce(&w).unwrap(), parse_element(&g, "a"));
    }

    fn parse_element(g: &GroupFamily, s: &str) -> GroupElement {
        g.reduce(&parse_word(g, s).unwrap()).unwrap()
    }

    #[test]
    fn involution_squares_to_identity() {
        let fam = parse_family("Z2*Z2*Z2").unwrap();
        let e = parse_element(&fam, "s1 s1");
        assert!(fam.is_identity(&e));
        let e = parse_element(&fam, "s1 s2 s2 s1 s3");
        assert_eq!(fam.format(&e), "s3");
    }

    #[test]
    fn doubling_word_has_length_sixteen() {
        let fam = f2();
        let g4 = parse_element(&fam, "a b a^2 b^4 a^8");
        assert_eq!(fam.word_length(&g4), 16);
    }

    #[test]
    fn direct_product_is_componentwise() {
        let fam = parse_family("F2xZ").unwrap();
        let g = parse_element(&fam, "a t^2");
        let h = parse_element(&fam, "b t^3");
        let gh = fam.multiply(&g, &h).unwrap();
        assert_eq!(gh, parse_element(&fam, "a b t^5"));
        assert_eq!(gh.line(), Some(LineElem::translation(5)));
    }

    #[test]
    fn syllables_of_alternating_element() {
        let fam = parse_family("(ZxZ)*Z2").unwrap();
        let g = parse_element(&fam, "x y s x^2");
        let s = fam.syllables(&g).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], (0, GroupElement::Abelian(vec![1, 1])));
        assert_eq!(s[1], (1, GroupElement::Cyclic(1)));
        assert_eq!(s[2], (0, GroupElement::Abelian(vec![2, 0])));
        assert!(fam.syllables(&fam.identity()).unwrap().is_empty());
        assert!(f2().syllables(&f2().identity()).is_err());
    }

    #[test]
    fn weighted_lengths() {
        let fam = f2();
        let unit = WeightAssignment::unit(&fam);
        let w = WeightAssignment::new(&fam, vec![q(2), q(1)]).unwrap();
        assert_eq!(fam.weighted_length(&parse_element(&fam, "a b"), &unit).unwrap(), q(2));
        assert_eq!(fam.weighted_length(&parse_element(&fam, "a b a^2"), &w).unwrap(), q(7));
        assert_eq!(fam.weighted_length(&fam.identity(), &w).unwrap(), q(0));
        let z2 = parse_family("Z^2").unwrap();
        assert!(z2.weighted_length(&z2.identity(), &WeightAssignment::unit(&z2)).is_err());
        assert!(WeightAssignment::new(&fam, vec![q(0), q(1)]).is_err());
    }

    #[test]
    fn infinite_dihedral_line() {
        let fam = parse_family("(Z2*Z2*Z2)x(Z2*Z2)").unwrap();
        let names = fam.generator_names();
        assert_eq!(names, vec!["s1", "s2", "s3", "c1", "c2"]);
        let g = parse_element(&fam, "c1 c2 c1 c2");
        assert_eq!(g.line(), Some(LineElem::translation(4)));
        let h = parse_element(&fam, "c2 c1 c2");
        assert_eq!(h.line(), Some(LineElem { flip: true, t: -3 }));
        assert!(fam.contains(&h));
        assert_eq!(fam.letters(&h).len(), 3);
        assert_eq!(fam.reduce(&fam.letters(&h)).unwrap(), h);
        assert!(fam.is_identity(&fam.multiply(&h, &fam.inverse(&h)).unwrap()));
    }

    #[test]
    fn cyclic_of_higher_order() {
        let fam = parse_family("Z^2*Z5").unwrap();
        let g = parse_element(&fam, "s s s");
        assert_eq!(fam.word_length(&g), 2);
        assert_eq!(fam.format(&g), "s^-2");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let fam = f2();
        let g = parse_element(&fam, "a^2 b");
        let mut acc = fam.identity();
        for _ in 0..5 {
            acc = fam.multiply(&acc, &g).unwrap();
        }
        assert_eq!(fam.pow(&g, 5), acc);
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let fam = f2();
        assert_eq!(
            fam.multiply(&fam.identity(), &GroupElement::Cyclic(0)),
            Err(GroupError::FamilyMismatch)
        );
    }

    #[test]
    fn invalid_families_rejected() {
        assert!(GroupFamily::Free { rank: 0 }.validate().is_err());
        assert!(GroupFamily::Cyclic { order: 1 }.validate().is_err());
        assert!(GroupFamily::FreeProduct { factors: vec![f2()] }.validate().is_err());
    }
}
