//! Byte escaping of characters a vocabulary cannot represent.
//!
//! An escaped character is written as its UTF-8 bytes, each rendered as a
//! backslash, the decimal byte value and a semicolon: `í` becomes
//! `\195;\173;`. The backslash itself is always escaped, so any backslash in
//! escaped text starts an escape group and decoding is unambiguous.

use crate::error::{Error, Result};

pub const ESCAPE_CHAR: char = '\\';

/// Escape groups for each UTF-8 byte of `ch`.
pub fn escape_bytes(ch: char) -> Vec<String> {
    let mut buf = [0u8; 4];
    ch.encode_utf8(&mut buf)
        .bytes()
        .map(|b| format!("\\{b};"))
        .collect()
}

pub(crate) fn push_escaped(out: &mut String, ch: char) {
    let mut buf = [0u8; 4];
    for b in ch.encode_utf8(&mut buf).bytes() {
        out.push(ESCAPE_CHAR);
        out.push_str(&b.to_string());
        out.push(';');
    }
}

/// Escapes every character of `word` that is whitespace, the escape
/// character, one of `reserved`, or rejected by `representable`.
pub fn escape_word<F>(word: &str, reserved: &[char], representable: F) -> String
where
    F: Fn(char) -> bool,
{
    let mut out = String::with_capacity(word.len());
    for ch in word.chars() {
        if ch == ESCAPE_CHAR || ch.is_whitespace() || reserved.contains(&ch) || !representable(ch) {
            push_escaped(&mut out, ch);
        } else {
            out.push(ch);
        }
    }
    out
}

/// Decodes escape groups back into the original text.
pub fn unescape(text: &str) -> Result<String> {
    if !text.contains(ESCAPE_CHAR) {
        return Ok(text.to_string());
    }
    let mut bytes = Vec::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((pos, ch)) = chars.next() {
        if ch != ESCAPE_CHAR {
            let mut buf = [0u8; 4];
            bytes.extend_from_slice(ch.encode_utf8(&mut buf).as_bytes());
            continue;
        }
        let mut value: u32 = 0;
        let mut digits = 0;
        loop {
            match chars.next() {
                Some((_, d)) if d.is_ascii_digit() => {
                    value = value * 10 + d.to_digit(10).unwrap_or(0);
                    digits += 1;
                    if digits > 3 {
                        return Err(escape_error(pos, "more than three digits"));
                    }
                }
                Some((_, ';')) if digits > 0 => break,
                Some((_, ';')) => return Err(escape_error(pos, "no digits")),
                Some((_, other)) => {
                    return Err(escape_error(pos, &format!("unexpected character {other:?}")))
                }
                None => return Err(escape_error(pos, "unterminated")),
            }
        }
        if value > 255 {
            return Err(escape_error(pos, &format!("byte value {value} out of range")));
        }
        bytes.push(value as u8);
    }
    String::from_utf8(bytes).map_err(|e| Error::Escape {
        position: e.utf8_error().valid_up_to(),
        reason: "escaped bytes are not valid UTF-8".into(),
    })
}

fn escape_error(position: usize, reason: &str) -> Error {
    Error::Escape {
        position,
        reason: reason.to_string(),
    }
}

/// Splits a line into words at single spaces that sit between two
/// non-space characters. Any other space (leading, trailing, repeated)
/// stays inside a word, where escaping turns it into `\32;`; this keeps
/// segmentation exactly invertible for arbitrary lines.
pub fn split_words(line: &str) -> Vec<&str> {
    if line.is_empty() {
        return Vec::new();
    }
    let bytes = line.as_bytes();
    let mut words = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b' ' && i > 0 && i + 1 < bytes.len() && bytes[i - 1] != b' ' && bytes[i + 1] != b' ' {
            words.push(&line[start..i]);
            start = i + 1;
        }
    }
    words.push(&line[start..]);
    words
}
