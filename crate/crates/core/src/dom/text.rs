/// Collapses Unicode whitespace runs (NBSP included) to one ASCII space,
/// removes C0/C1 control characters and trims both ends.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_control() {
            continue;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

/// Han ideographs and Kana.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FA1F)
}

fn unspaced(c: char) -> bool {
    is_cjk(c) || matches!(c as u32, 0x3000..=0x303F | 0xFF00..=0xFFEF)
}

/// Joins normalized text runs that were split by inline markup. No space
/// goes before closing punctuation, after opening punctuation, or next to
/// CJK characters.
pub fn join_runs<'a>(runs: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for run in runs {
        let run = run.trim();
        let (Some(first), Some(last)) = (run.chars().next(), out.chars().last()) else {
            out.push_str(run);
            continue;
        };
        let tight = matches!(first, '.' | ',' | ';' | ':' | '!' | '?' | ')' | ']' | '}' | '»' | '”' | '’' | '%')
            || matches!(last, '(' | '[' | '{' | '«' | '“' | '‘')
            || unspaced(first)
            || unspaced(last);
        if !tight {
            out.push(' ');
        }
        out.push_str(run);
    }
    normalize_text(&out)
}

/// Normalized, lowercased form used as a comparison key.
pub fn normalize_value(raw: &str) -> String {
    normalize_text(raw).to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn runs_join_like_rendered_text() {
        assert_eq!(join_runs(["it can", "reopen", "."]), "it can reopen.");
        assert_eq!(join_runs(["a (", "b", ") c"]), "a (b) c");
        assert_eq!(join_runs(["市博物馆", "宣布", "。"]), "市博物馆宣布。");
        assert_eq!(join_runs(["", "x", ""]), "x");
    }

    #[test]
    fn collapses_mixed_whitespace() {
        assert_eq!(normalize_text("  a\u{00a0}\u{2003} b\t\n c  "), "a b c");
        assert_eq!(normalize_text("\u{0000}x\u{009f}"), "x");
        assert_eq!(normalize_text(""), "");
    }

    proptest! {
        #[test]
        fn keeps_every_visible_char(s in "\\PC{0,60}|[ a-z\\t\\n\u{a0}\u{1}\u{85}]{0,60}") {
            let out = normalize_text(&s);
            let visible = |t: &str| {
                let mut v: Vec<char> = t.chars().filter(|c| !c.is_whitespace() && !c.is_control()).collect();
                v.sort_unstable();
                v
            };
            prop_assert_eq!(visible(&s), visible(&out));
            prop_assert!(!out.contains("  "));
            prop_assert_eq!(out.trim(), out.as_str());
            prop_assert!(out.chars().all(|c| !c.is_control()));
            prop_assert_eq!(normalize_text(&out), out.clone());
        }

        #[test]
        fn single_spaces_between_words_survive(words in proptest::collection::vec("[a-z]{1,6}", 1..8)) {
            let joined = words.join(" ");
            prop_assert_eq!(normalize_text(&joined), joined);
        }
    }
}
