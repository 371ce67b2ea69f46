use std::collections::BTreeMap;

const MULTI_CHAR_OPERATORS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "++", "--",
];

/// Splits text into identifier, number and operator terms. Whitespace
/// separates terms and is dropped; every other character is a one-char term
/// unless it starts a multi-char operator. Terms are case-sensitive.
pub fn terms(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let len = if c.is_whitespace() {
            rest = &rest[c.len_utf8()..];
            continue;
        } else if c.is_alphabetic() || c == '_' {
            rest.find(|ch: char| !(ch.is_alphanumeric() || ch == '_')).unwrap_or(rest.len())
        } else if c.is_ascii_digit() {
            let int_end = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let frac = &rest[int_end..];
            if frac.starts_with('.') && frac[1..].starts_with(|ch: char| ch.is_ascii_digit()) {
                int_end + 1 + frac[1..].find(|ch: char| !ch.is_ascii_digit()).unwrap_or(frac.len() - 1)
            } else {
                int_end
            }
        } else {
            MULTI_CHAR_OPERATORS
                .iter()
                .find(|op| rest.starts_with(**op))
                .map_or(c.len_utf8(), |op| op.len())
        };
        out.push(&rest[..len]);
        rest = &rest[len..];
    }
    out
}

/// Term-count vectors of two strings over their shared term collection.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenVector {
    pub terms: Vec<String>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl TokenVector {
    pub fn build(a: &str, b: &str) -> Self {
        let mut counts: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
        for t in terms(a) {
            counts.entry(t).or_default().0 += 1;
        }
        for t in terms(b) {
            counts.entry(t).or_default().1 += 1;
        }
        let mut v = TokenVector {
            terms: Vec::with_capacity(counts.len()),
            left: Vec::with_capacity(counts.len()),
            right: Vec::with_capacity(counts.len()),
        };
        for (term, (l, r)) in counts {
            v.terms.push(term.to_owned());
            v.left.push(l);
            v.right.push(r);
        }
        v
    }

    pub fn dot(&self) -> u64 {
        self.left.iter().zip(&self.right).map(|(&l, &r)| u64::from(l) * u64::from(r)).sum()
    }
}

/// Cosine of the angle between the term-count vectors. A string without terms
/// has no direction and scores 0 against anything, itself included.
pub fn cosine_similarity(a: &str, b: &str) -> f64 {
    let v = TokenVector::build(a, b);
    let norm = |xs: &[u32]| xs.iter().map(|&x| u64::from(x) * u64::from(x)).sum::<u64>();
    let (na, nb) = (norm(&v.left), norm(&v.right));
    if na == 0 || nb == 0 {
        return 0.0;
    }
    // sqrt of the integer product keeps identical inputs at exactly 1.0.
    (v.dot() as f64 / ((na as f64) * (nb as f64)).sqrt()).min(1.0)
}
