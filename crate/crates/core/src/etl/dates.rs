//! Best-effort date parsing for source metadata.

use crate::vault::value::Timestamp;

/// Accepts RFC 3339 instants, `YYYY-MM-DD`, `YYYY-MM`, bare years and
/// bracketed years (`[2008]`). Anything else yields `None`.
pub fn parse_source_date(text: &str) -> Option<Timestamp> {
    let t = text.trim();
    let t = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(t).trim();
    if t.is_empty() {
        return None;
    }
    if let Some(ts) = Timestamp::parse_rfc3339(t) {
        return Some(ts);
    }
    let parts: Vec<&str> = t.split('-').collect();
    let num = |s: &str, len: usize| -> Option<u32> {
        (s.len() == len && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().ok()).flatten()
    };
    match parts.as_slice() {
        [y] => Timestamp::from_ymd(num(y, 4)? as i32, 1, 1),
        [y, m] => Timestamp::from_ymd(num(y, 4)? as i32, num(m, 2)?, 1),
        [y, m, d] => Timestamp::from_ymd(num(y, 4)? as i32, num(m, 2)?, num(d, 2)?),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_shapes() {
        assert_eq!(parse_source_date("[2008]").map(Timestamp::year), Some(2008));
        assert_eq!(parse_source_date(" 1881 ").map(Timestamp::year), Some(1881));
        assert_eq!(parse_source_date("2010-03-04"), Timestamp::from_ymd(2010, 3, 4));
        assert_eq!(parse_source_date("2010-03"), Timestamp::from_ymd(2010, 3, 1));
        assert_eq!(parse_source_date("2010-03-04T10:00:00Z").map(Timestamp::year), Some(2010));
    }

    #[test]
    fn rejected_shapes() {
        for bad in ["", "[]", "vers 1900", "19e siècle", "2010-13-01", "81", "2010/03/04", "[2008"] {
            assert_eq!(parse_source_date(bad), None, "{bad}");
        }
    }
}
