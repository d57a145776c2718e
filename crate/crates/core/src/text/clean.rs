//! Review-text normalization.
//!
//! Rules run in a fixed order, which is part of the output contract:
//!
//! 1. lowercase
//! 2. drop URLs (`scheme://...` or `www....` runs of non-space)
//! 3. punctuation and digits become spaces
//! 4. anything that is not an ASCII letter or whitespace (emoji, emoticon
//!    residue, other scripts) becomes a space
//! 5. a letter repeated more than twice in a row is cut to two
//! 6. single-letter tokens are dropped
//! 7. slang tokens are replaced through the dictionary (one pass, whole token)
//! 8. whitespace is collapsed and trimmed

use std::sync::OnceLock;

use regex::Regex;

use super::SlangDict;

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| {
        Regex::new(r"(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").expect("valid url regex")
    })
}

pub fn clean_text(text: &str, slang: &SlangDict) -> String {
    let lowered = text.to_lowercase();
    let no_urls = url_pattern().replace_all(&lowered, " ");

    let letters_only: String = no_urls
        .chars()
        .map(|c| {
            if c.is_ascii_punctuation() || c.is_numeric() || is_unicode_punctuation(c) {
                ' '
            } else {
                c
            }
        })
        .map(|c| {
            if c.is_ascii_lowercase() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();

    let collapsed = collapse_repeats(&letters_only);

    let mut out = String::with_capacity(collapsed.len());
    for token in collapsed.split_whitespace() {
        if token.chars().count() == 1 {
            continue;
        }
        let token = slang.lookup(token).unwrap_or(token);
        for part in token.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(part);
        }
    }
    out
}

fn is_unicode_punctuation(c: char) -> bool {
    matches!(c,
        '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205e}' | '\u{3000}'..='\u{303f}'
        | '\u{00a1}' | '\u{00a7}' | '\u{00ab}' | '\u{00b6}' | '\u{00b7}' | '\u{00bb}' | '\u{00bf}')
}

/// Runs of three or more identical letters are shortened to two.
fn collapse_repeats(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev: Option<char> = None;
    let mut run = 0usize;
    for c in s.chars() {
        if Some(c) == prev && c.is_alphabetic() {
            run += 1;
        } else {
            run = 1;
            prev = Some(c);
        }
        if run <= 2 || !c.is_alphabetic() {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_slang() -> SlangDict {
        SlangDict::default()
    }

    #[test]
    fn worked_example() {
        assert_eq!(clean_text("Baguuusss!!! 👍", &no_slang()), "baguuss");
    }

    #[test]
    fn slang_substitution() {
        let dict = SlangDict::from_pairs([("ok", "oke")]);
        assert_eq!(clean_text("ok", &dict), "oke");
        assert_eq!(clean_text("OK banget", &dict), "oke banget");
    }

    #[test]
    fn empty_stays_empty() {
        assert_eq!(clean_text("", &no_slang()), "");
        assert_eq!(clean_text("  !! 123 :) ", &no_slang()), "");
    }

    #[test]
    fn urls_digits_and_single_letters() {
        let s = "Cek https://shopee.co.id/x?a=1 dan www.toko.com ya, 2 kali a b barang2";
        assert_eq!(clean_text(s, &no_slang()), "cek dan ya kali barang");
    }

    #[test]
    fn repeats_collapse_to_two() {
        assert_eq!(clean_text("mantaaaap sekaliii", &no_slang()), "mantaap sekalii");
        assert_eq!(clean_text("aaa", &no_slang()), "aa");
    }

    #[test]
    fn slang_is_single_pass() {
        let dict = SlangDict::from_pairs([("gk", "ga"), ("ga", "tidak")]);
        assert_eq!(clean_text("gk", &dict), "ga");
    }
}
