use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Word normalizer applied after stopword removal.
pub trait Stemmer: Send + Sync {
    fn stem(&self, word: &str) -> String;
}

/// Small deterministic suffix stripper.
///
/// Rules are applied until the word stops changing, so `stem` is idempotent.
/// A rule only fires if at least three characters remain.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixStemmer;

impl SuffixStemmer {
    fn step(word: &str) -> Option<String> {
        let n = word.chars().count();
        let keep = |suffix: &str| n >= suffix.len() + 3 && word.is_ascii();
        if word.ends_with("sses") && keep("ss") {
            return Some(word[..word.len() - 2].to_owned());
        }
        if word.ends_with("ies") && keep("ies") {
            return Some(format!("{}y", &word[..word.len() - 3]));
        }
        for suffix in ["ing", "ed"] {
            if word.ends_with(suffix) && keep(suffix) {
                let base = &word[..word.len() - suffix.len()];
                if base.chars().any(is_vowel) {
                    return Some(undouble(base));
                }
            }
        }
        if word.ends_with("ly") && keep("ly") {
            return Some(word[..word.len() - 2].to_owned());
        }
        if word.ends_with('s')
            && keep("s")
            && !word.ends_with("ss")
            && !word.ends_with("us")
            && !word.ends_with("is")
        {
            return Some(word[..word.len() - 1].to_owned());
        }
        None
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn undouble(base: &str) -> String {
    let b = base.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !matches!(b[n - 1], b'l' | b's' | b'z') && !is_vowel(b[n - 1] as char) {
        base[..n - 1].to_owned()
    } else {
        base.to_owned()
    }
}

impl Stemmer for SuffixStemmer {
    fn stem(&self, word: &str) -> String {
        let mut w = word.to_owned();
        while let Some(next) = Self::step(&w) {
            w = next;
        }
        w
    }
}

/// Leaves words untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn stem(&self, word: &str) -> String {
        word.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList(HashSet<String>);

impl StopwordList {
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One token per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        Self::english()
    }
}

/// Set of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSet(pub BTreeSet<String>);

impl TokenSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: &str) -> bool {
        self.0.contains(t)
    }

    /// Tokens joined by single spaces.
    pub fn render(&self) -> String {
        self.0.iter().cloned().collect::<Vec<_>>().join(" ")
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

/// Lowercasing, punctuation stripping, stopword removal and stemming.
#[derive(Clone)]
pub struct Normalizer {
    stopwords: Arc<StopwordList>,
    stemmer: Arc<dyn Stemmer>,
}

impl std::fmt::Debug for Normalizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Normalizer").field("stopwords", &self.stopwords.len()).finish()
    }
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::new(StopwordList::english(), Arc::new(SuffixStemmer))
    }
}

impl Normalizer {
    pub fn new(stopwords: StopwordList, stemmer: Arc<dyn Stemmer>) -> Self {
        Self { stopwords: Arc::new(stopwords), stemmer }
    }

    /// Normalized tokens in order, duplicates kept.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        normalized_tokens(text, &self.stopwords, self.stemmer.as_ref())
    }

    pub fn token_set(&self, text: &str) -> TokenSet {
        TokenSet(self.tokens(text).into_iter().collect())
    }
}

pub fn preprocess(text: &str, stopwords: &StopwordList, stemmer: &dyn Stemmer) -> TokenSet {
    normalized_tokens(text, stopwords, stemmer).into_iter().collect()
}

fn normalized_tokens(text: &str, stopwords: &StopwordList, stemmer: &dyn Stemmer) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stopwords.contains(w))
        .map(|w| stemmer.stem(w))
        .filter(|w| !w.is_empty() && !stopwords.contains(w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(text: &str) -> TokenSet {
        preprocess(text, &StopwordList::english(), &SuffixStemmer)
    }

    #[test]
    fn stems_and_drops_stopwords() {
        // cats -> cat (plural s); running -> runn -> run (ing, undouble)
        assert_eq!(pp("The cats, running!"), ["cat", "run"].into_iter().collect());
    }

    #[test]
    fn all_stopwords() {
        assert!(pp("the a an").is_empty());
    }

    #[test]
    fn suffix_rules() {
        let s = SuffixStemmer;
        assert_eq!(s.stem("studies"), "study");
        assert_eq!(s.stem("classes"), "class");
        assert_eq!(s.stem("hopped"), "hop");
        assert_eq!(s.stem("quickly"), "quick");
        assert_eq!(s.stem("status"), "status");
        assert_eq!(s.stem("sing"), "sing");
        assert_eq!(s.stem("is"), "is");
    }

    #[test]
    fn idempotent_on_rendered_output() {
        for text in [
            "The cats, running!",
            "Humans are studying classes quickly; robots hopped happily.",
            "#AI rights for all chirpers!!! 🙂 @bob",
            "buses buses bussed busing",
        ] {
            let once = pp(text);
            assert_eq!(pp(&once.render()), once, "{text}");
        }
    }

    #[test]
    fn custom_stopwords() {
        let sw = StopwordList::parse("# comment\nfoo\n\nBar\n");
        assert_eq!(sw.len(), 2);
        let set = preprocess("foo bar baz", &sw, &IdentityStemmer);
        assert_eq!(set, ["baz"].into_iter().collect());
    }
}
