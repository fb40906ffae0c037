//! Utterance tokenization.

/// Lowercases and splits on whitespace and punctuation. Word characters are
/// alphanumerics and `_`; a decimal point between digits stays inside the number.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let word = c.is_alphanumeric() || c == '_';
        let decimal_point = c == '.'
            && cur.chars().last().is_some_and(|p| p.is_ascii_digit())
            && cur.chars().all(|p| p.is_ascii_digit() || p == '.')
            && !cur.contains('.')
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if word || decimal_point {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// True for tokens made of digits with at most one inner decimal point.
pub fn is_number_token(t: &str) -> bool {
    crate::semantics::parse_number(t).is_some() && !t.starts_with('-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(
            tokenize("How many daughters does Obama have?"),
            ["how", "many", "daughters", "does", "obama", "have"]
        );
        assert_eq!(tokenize("rivers in  Ohio, longer than 3.5 km."), ["rivers", "in", "ohio", "longer", "than", "3.5", "km"]);
        assert_eq!(tokenize("in 2014."), ["in", "2014"]);
        assert_eq!(tokenize("Jen-Hsun_Huang and _blank_"), ["jen", "hsun_huang", "and", "_blank_"]);
        assert!(tokenize("  ?! ").is_empty());
        assert!(is_number_token("2014") && is_number_token("3.5") && !is_number_token("ohio"));
    }
}
