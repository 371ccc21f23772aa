use serde::{Deserialize, Serialize};

/// Surface features of a post's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub hashtags: usize,
    pub mentions: usize,
    pub words: usize,
    pub chars: usize,
    pub emojis: usize,
    pub has_emoji: bool,
}

pub fn lexical_features(text: &str) -> FeatureRecord {
    let mut f = FeatureRecord::default();
    for token in text.split_whitespace() {
        f.words += 1;
        if tag_body(token, '#').is_some() {
            f.hashtags += 1;
        }
        if tag_body(token, '@').is_some() {
            f.mentions += 1;
        }
    }
    for c in text.chars() {
        f.chars += 1;
        if is_emoji(c) {
            f.emojis += 1;
        }
    }
    f.has_emoji = f.emojis > 0;
    f
}

/// The word characters following `sigil` at the start of `token`, if any.
fn tag_body(token: &str, sigil: char) -> Option<&str> {
    let rest = token.strip_prefix(sigil)?;
    let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
    (end > 0).then(|| &rest[..end])
}

/// Hashtag bodies (without `#`), in order of occurrence.
pub fn hashtags(text: &str) -> Vec<&str> {
    text.split_whitespace().filter_map(|t| tag_body(t, '#')).collect()
}

/// Mentioned handles (without `@`), in order of occurrence.
pub fn mentions(text: &str) -> Vec<&str> {
    text.split_whitespace().filter_map(|t| tag_body(t, '@')).collect()
}

/// Pictographic emoji code points. Keycap bases (`#`, `*`, digits) carry the
/// Unicode Emoji property but are deliberately not counted here.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1F02F   // mahjong, domino
        | 0x1F0A0..=0x1F0FF // playing cards
        | 0x1F1E6..=0x1F1FF // regional indicators
        | 0x1F300..=0x1F5FF // misc symbols and pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport and map
        | 0x1F700..=0x1F77F
        | 0x1F780..=0x1F7FF // geometric shapes extended
        | 0x1F900..=0x1F9FF // supplemental symbols and pictographs
        | 0x1FA70..=0x1FAFF // symbols and pictographs extended-a
        | 0x2600..=0x26FF   // misc symbols
        | 0x2700..=0x27BF   // dingbats
        | 0x2B50 | 0x2B55 | 0x2B1B | 0x2B1C
        | 0x231A | 0x231B | 0x23E9..=0x23F3
        | 0x2934 | 0x2935 | 0x3030 | 0x303D | 0x3297 | 0x3299
    )
}
