//! Text forms: family strings such as `(F2xZ)*Z2`, generator names, and
//! words such as `a^2 b^-1 t`.

use super::{GroupError, GroupFamily, Letter, LineFactor};

const FREE_NAMES: &str = "abcdefghijklmnopqr";

fn local_names(f: &GroupFamily) -> Vec<String> {
    match f {
        GroupFamily::Free { rank } => {
            if (*rank as usize) <= FREE_NAMES.len() {
                FREE_NAMES.chars().take(*rank as usize).map(String::from).collect()
            } else {
                (1..=*rank).map(|i| format!("a{i}")).collect()
            }
        }
        GroupFamily::FreeAbelian { rank } => {
            if *rank <= 3 {
                ["x", "y", "z"].iter().take(*rank as usize).map(|s| s.to_string()).collect()
            } else {
                (1..=*rank).map(|i| format!("x{i}")).collect()
            }
        }
        GroupFamily::Cyclic { .. } => vec!["s".into()],
        GroupFamily::FreeProduct { factors } => {
            let per: Vec<Vec<String>> = factors.iter().map(local_names).collect();
            let mut all: Vec<&String> = per.iter().flatten().collect();
            all.sort();
            let collides = all.windows(2).any(|p| p[0] == p[1]);
            per.into_iter()
                .enumerate()
                .flat_map(|(i, names)| {
                    names
                        .into_iter()
                        .map(move |n| if collides { format!("{n}{}", i + 1) } else { n })
                })
                .collect()
        }
        GroupFamily::DirectWithLine { base, line } => {
            let mut n = local_names(base);
            match line {
                LineFactor::Integers => n.push("t".into()),
                LineFactor::InfiniteDihedral => {
                    n.push("c1".into());
                    n.push("c2".into());
                }
            }
            n
        }
    }
}

pub(crate) fn default_names(f: &GroupFamily) -> Vec<String> {
    local_names(f)
}

/// Compresses runs into powers: `a a b⁻¹` becomes `a^2 b^-1`; identity is `e`.
pub fn format_word(f: &GroupFamily, word: &[Letter]) -> String {
    if word.is_empty() {
        return "e".into();
    }
    let names = f.generator_names();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < word.len() {
        let l = word[i];
        let mut j = i;
        while j < word.len() && word[j] == l {
            j += 1;
        }
        let run = (j - i) as i64;
        let exp = if l.is_inverted() { -run } else { run };
        let name = &names[l.gen() as usize];
        parts.push(if exp == 1 { name.clone() } else { format!("{name}^{exp}") });
        i = j;
    }
    parts.join(" ")
}

/// Parses a whitespace separated word; each token is `name` or `name^k`.
pub fn parse_word(f: &GroupFamily, text: &str) -> Result<Vec<Letter>, GroupError> {
    let names = f.generator_names();
    let mut out = Vec::new();
    for tok in text.split(|c: char| c.is_whitespace() || c == '·' || c == '.').filter(|t| !t.is_empty()) {
        if tok == "e" && !names.iter().any(|n| n == "e") {
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => (n, e.parse::<i64>().map_err(|_| GroupError::UnknownGenerator(tok.to_string()))?),
            None => (tok, 1),
        };
        let gen = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GroupError::UnknownGenerator(name.to_string()))? as u16;
        let l = f.letter(gen, exp < 0);
        out.extend(std::iter::repeat(l).take(exp.unsigned_abs() as usize));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self) -> GroupError {
        GroupError::FamilySyntax(self.text.to_string())
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, prefix: &str) -> bool {
        if self.s[self.pos..].starts_with(prefix.as_bytes()) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }

    fn family(&mut self) -> Result<GroupFamily, GroupError> {
        let mut terms = vec![self.term()?];
        while self.eat("*") {
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            GroupFamily::FreeProduct { factors: terms }
        })
    }

    fn term(&mut self) -> Result<GroupFamily, GroupError> {
        let base = self.atom()?;
        if self.eat("x") || self.eat("×") {
            let line = if self.eat("(Z2*Z2)") || self.eat("Dinf") || self.eat("D") {
                LineFactor::InfiniteDihedral
            } else if self.eat("Z") {
                LineFactor::Integers
            } else {
                return Err(self.err());
            };
            return Ok(GroupFamily::DirectWithLine { base: Box::new(base), line });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GroupFamily, GroupError> {
        if self.eat("(") {
            let f = self.family()?;
            if !self.eat(")") {
                return Err(self.err());
            }
            return Ok(f);
        }
        if self.eat("F") {
            let rank = self.number().ok_or_else(|| self.err())?;
            return Ok(GroupFamily::Free { rank: rank as u16 });
        }
        if self.eat("Z^") {
            let rank = self.number().ok_or_else(|| self.err())?;
            return Ok(GroupFamily::FreeAbelian { rank: rank as u16 });
        }
        if self.eat("Z") {
            return Ok(match self.number() {
                Some(order) => GroupFamily::Cyclic { order },
                None => GroupFamily::FreeAbelian { rank: 1 },
            });
        }
        Err(self.err())
    }
}

/// Parses `F2`, `Z^2`, `Z2`, `Z`, `F2xZ`, `(ZxZ)*Z2`, `(Z2*Z2*Z2)x(Z2*Z2)`.
/// `x` binds tighter than `*`; `ZxZ` inside a product is read as `Z^2`.
pub fn parse_family(text: &str) -> Result<GroupFamily, GroupError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { s: compact.as_bytes(), pos: 0, text };
    let f = p.family()?;
    if p.pos != compact.len() {
        return Err(p.err());
    }
    let f = normalize(f);
    f.validate()?;
    Ok(f)
}

/// `ZxZ` is the rank-two free abelian group, not a line over ℤ.
fn normalize(f: GroupFamily) -> GroupFamily {
    match f {
        GroupFamily::DirectWithLine { base, line: LineFactor::Integers }
            if matches!(*base, GroupFamily::FreeAbelian { .. }) =>
        {
            let GroupFamily::FreeAbelian { rank } = *base else { unreachable!() };
            GroupFamily::FreeAbelian { rank: rank + 1 }
        }
        GroupFamily::FreeProduct { factors } => GroupFamily::FreeProduct {
            factors: factors.into_iter().map(normalize).collect(),
        },
        GroupFamily::DirectWithLine { base, line } => GroupFamily::DirectWithLine {
            base: Box::new(normalize(*base)),
            line,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(parse_family("F2").unwrap(), GroupFamily::Free { rank: 2 });
        assert_eq!(parse_family("Z^2").unwrap(), GroupFamily::FreeAbelian { rank: 2 });
        assert_eq!(parse_family("ZxZ").unwrap(), GroupFamily::FreeAbelian { rank: 2 });
        assert_eq!(parse_family("Z2").unwrap(), GroupFamily::Cyclic { order: 2 });
        let f = parse_family("(F2xZ)*Z2").unwrap();
        assert_eq!(f.to_string(), "(F2xZ)*Z2");
        assert_eq!(f.generator_names(), vec!["a", "b", "t", "s"]);
        let f = parse_family("F2 x Z").unwrap();
        assert_eq!(f.generator_names(), vec!["a", "b", "t"]);
        assert_eq!(parse_family("Z^2*Z^2").unwrap().generator_names(), vec!["x1", "y1", "x2", "y2"]);
        assert!(parse_family("F").is_err());
        assert!(parse_family("Z1").is_err());
        assert!(parse_family("F2*").is_err());
    }

    #[test]
    fn word_round_trip() {
        let f = parse_family("F2xZ").unwrap();
        let w = parse_word(&f, "a^2 b^-1 t").unwrap();
        assert_eq!(format_word(&f, &w), "a^2 b^-1 t");
        assert!(parse_word(&f, "q").is_err());
        assert!(parse_word(&f, "e").unwrap().is_empty());
    }
}
