use super::table::{split_modifier, PrimitiveKind};
use super::{MotionProgram, MotionTag, ParseError, ParseErrorKind, Role, MAX_TAGS};

/// Splits `text` on whitespace, keeping byte offsets relative to `base`.
fn tokens(text: &str, base: usize) -> impl Iterator<Item = (&str, (usize, usize))> {
    let mut rest = text;
    let mut offset = base;
    std::iter::from_fn(move || {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let token = &trimmed[..end];
        let span = (offset, offset + end);
        offset += end;
        rest = &trimmed[end..];
        Some((token, span))
    })
}

/// Parses one tag (no delimiter). `base` is the byte offset of `text`
/// within the full program, used for error spans.
pub fn parse_tag(text: &str, base: usize) -> Result<MotionTag, ParseError> {
    let mut toks = tokens(text, base);
    let (head, head_span) = toks
        .next()
        .ok_or_else(|| ParseError::new(ParseErrorKind::EmptyTag).at((base, base + text.len())))?;
    let primitive = PrimitiveKind::from_token(head).ok_or_else(|| {
        ParseError::new(ParseErrorKind::UnknownPrimitive(head.to_string())).at(head_span)
    })?;
    let mut tag = MotionTag::new(primitive);
    for (token, span) in toks {
        let (key, value) = split_modifier(token).ok_or_else(|| {
            ParseError::new(ParseErrorKind::UnknownModifierKey(token.to_string())).at(span)
        })?;
        if tag.explicit().contains_key(&key) {
            return Err(ParseError::new(ParseErrorKind::DuplicateKey(key)).at(span));
        }
        // A bare key is shorthand for the flag value named like the key
        // (`dont_look`, `lead`).
        let value = if value.is_empty() { key.as_str() } else { value };
        tag.set_token(key, value).map_err(|e| e.at(span))?;
    }
    Ok(tag)
}

/// Parses DSL text into a validated program for `role`.
pub fn parse_program(text: &str, role: Role) -> Result<MotionProgram, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::new(ParseErrorKind::Empty).at((0, text.len())));
    }
    let mut tags = Vec::new();
    let mut offset = 0;
    let pieces: Vec<&str> = text.split('|').collect();
    if pieces.len() > MAX_TAGS {
        return Err(ParseError::new(ParseErrorKind::TooManyTags(pieces.len())).at((0, text.len())));
    }
    for (i, piece) in pieces.iter().enumerate() {
        let tag = parse_tag(piece, offset).map_err(|e| e.in_tag(i))?;
        if role == Role::Object {
            if let Err(e) = MotionProgram::new(role, vec![tag.clone()]) {
                return Err(e.in_tag(i).at((offset, offset + piece.len())));
            }
        }
        tags.push(tag);
        offset += piece.len() + 1;
    }
    MotionProgram::new(role, tags)
}
