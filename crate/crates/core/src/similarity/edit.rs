/// Edit distance with unit insertion/deletion cost and substitution cost 2.
///
/// Under this cost model a substitution never beats a deletion plus an
/// insertion, so the distance equals `|a| + |b| - 2 * LCS(a, b)`.
pub fn edit_distance(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitute = prev[j] + if ca == cb { 0 } else { 2 };
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - ED / max(|a|, |b|)`, clamped to [0, 1]. The distance can exceed the
/// longer length because substitutions cost 2; such pairs score 0.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let raw = 1.0 - edit_distance(&a, &b) as f64 / longest as f64;
    raw.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn pinned_values() {
        assert_eq!(normalized_edit_distance("abc", "abc"), 1.0);
        assert_eq!(edit_distance(&chars("kitten"), &chars("sitting")), 5);
        assert!((normalized_edit_distance("kitten", "sitting") - (1.0 - 5.0 / 7.0)).abs() < 1e-15);
        assert_eq!(edit_distance(&chars("a"), &chars("bc")), 3);
        assert_eq!(normalized_edit_distance("a", "bc"), 0.0);
    }

    #[test]
    fn empty_conventions() {
        assert_eq!(normalized_edit_distance("", ""), 1.0);
        assert_eq!(normalized_edit_distance("", "abc"), 0.0);
    }
}
