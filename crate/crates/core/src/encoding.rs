//! Percent-encoding helpers shared by the IRI minter and the text file
//! formats (walk corpus, embedding table).
//!
//! Two encode sets exist on purpose: minted IRI segments keep only
//! unreserved characters so distinct ids can never collide, while file
//! tokens only escape the characters that would break a space/tab separated
//! line. Both are decoded by the same [`percent_decode`].

/// Encode `s` for use as one IRI path segment: every byte outside
/// `[A-Za-z0-9-._~]` becomes `%XX`. Injective, and the output never
/// contains `/`, so concatenating segments with `/` stays unambiguous.
pub(crate) fn encode_iri_segment(s: &str) -> String {
    encode_with(s, |b| {
        b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
    })
}

/// Encode `s` for use as one whitespace-separated token in a text file:
/// `%`, ASCII whitespace, and control bytes become `%XX`, everything else
/// (non-ASCII included) passes through.
pub(crate) fn encode_token(s: &str) -> String {
    encode_with(s, |b| b != b'%' && b > b' ' && b != 0x7f)
}

fn encode_with(s: &str, keep: impl Fn(u8) -> bool) -> String {
    let mut out = Vec::with_capacity(s.len());
    for &b in s.as_bytes() {
        if keep(b) {
            out.push(b);
        } else {
            out.extend_from_slice(format!("%{b:02X}").as_bytes());
        }
    }
    // both predicates treat the bytes >= 0x80 of a character uniformly
    // (all kept or all escaped), so the output is valid UTF-8
    String::from_utf8(out).expect("kept bytes preserve UTF-8 sequences")
}

/// Decode `%XX` sequences back to bytes. Fails on truncated or non-hex
/// escapes and on invalid UTF-8 in the decoded bytes.
pub(crate) fn percent_decode(s: &str) -> Result<String, String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = bytes
                .get(i + 1..i + 3)
                .ok_or_else(|| format!("truncated percent escape in `{s}`"))?;
            let hi = (hex[0] as char)
                .to_digit(16)
                .ok_or_else(|| format!("bad percent escape in `{s}`"))?;
            let lo = (hex[1] as char)
                .to_digit(16)
                .ok_or_else(|| format!("bad percent escape in `{s}`"))?;
            out.push((hi * 16 + lo) as u8);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| format!("percent escapes in `{s}` decode to invalid UTF-8"))
}
