//! Caption paraphrasing backends.

use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::llm::{ChatMessage, ChatTransport, RemoteBackendConfig, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParaphraseError {
    #[error("paraphrase backend unavailable: {0}")]
    BackendUnavailable(String),
}

/// A caption rewriter. `seed` makes stochastic backends reproducible.
pub trait Paraphraser: Send + Sync {
    fn paraphrase(&self, text: &str, seed: u64) -> Result<String, ParaphraseError>;
}

#[derive(Debug, Deserialize)]
struct SynonymBank {
    fallback_prefix: String,
    phrases: Vec<(String, Vec<String>)>,
}

fn synonyms() -> &'static SynonymBank {
    static BANK: OnceLock<SynonymBank> = OnceLock::new();
    BANK.get_or_init(|| {
        serde_json::from_str(include_str!("../../data/synonyms.json")).expect("synonym bank parses")
    })
}

/// Seeded synonym substitution over whole words. Each matching phrase is
/// swapped with probability `rate`; at least one swap always happens, and
/// text with no known phrase gets a fixed prefix, so the output always
/// differs from the input.
#[derive(Debug, Clone)]
pub struct RuleParaphraser {
    pub rate: f64,
}

impl Default for RuleParaphraser {
    fn default() -> Self {
        Self { rate: 0.5 }
    }
}

impl RuleParaphraser {
    fn matches(words: &[&str], at: usize) -> Option<(usize, &'static [String])> {
        synonyms()
            .phrases
            .iter()
            .filter_map(|(phrase, alts)| {
                let n = phrase.split(' ').count();
                let window = words.get(at..at + n)?;
                let cleaned: Vec<&str> = window.iter().map(|w| w.trim_end_matches(',')).collect();
                // Trailing punctuation may only sit on the last word.
                let inner_clean = window[..n - 1].iter().all(|w| !w.ends_with(','));
                (inner_clean && cleaned.join(" ") == *phrase).then_some((n, alts.as_slice()))
            })
            .max_by_key(|(n, _)| *n)
    }
}

impl Paraphraser for RuleParaphraser {
    fn paraphrase(&self, text: &str, seed: u64) -> Result<String, ParaphraseError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<&str> = text.split(' ').collect();
        let mut spans = Vec::new();
        let mut i = 0;
        while i < words.len() {
            match Self::matches(&words, i) {
                Some((n, alts)) => {
                    spans.push((i, n, alts));
                    i += n;
                }
                None => i += 1,
            }
        }
        if spans.is_empty() {
            return Ok(format!("{}{text}", synonyms().fallback_prefix));
        }
        let mut chosen: Vec<bool> = spans.iter().map(|_| rng.random_bool(self.rate)).collect();
        if !chosen.iter().any(|c| *c) {
            let pick = rng.random_range(0..spans.len());
            chosen[pick] = true;
        }
        let mut out: Vec<String> = Vec::with_capacity(words.len());
        let mut cursor = 0;
        for ((start, n, alts), swap) in spans.into_iter().zip(chosen) {
            out.extend(words[cursor..start].iter().map(|w| w.to_string()));
            let original = words[start..start + n].join(" ");
            if swap {
                let comma = if original.ends_with(',') { "," } else { "" };
                let alt = alts.choose(&mut rng).expect("non-empty alternatives");
                out.push(format!("{alt}{comma}"));
            } else {
                out.push(original);
            }
            cursor = start + n;
        }
        out.extend(words[cursor..].iter().map(|w| w.to_string()));
        Ok(out.join(" "))
    }
}

/// Delegates to a chat model.
pub struct RemoteParaphraser<T> {
    pub transport: T,
    pub config: RemoteBackendConfig,
}

impl<T: ChatTransport> Paraphraser for RemoteParaphraser<T> {
    fn paraphrase(&self, text: &str, _seed: u64) -> Result<String, ParaphraseError> {
        let request = self.config.request(vec![
            ChatMessage::system(
                "Rewrite the shot description in different words. Keep every direction, \
                 magnitude and ordering. Reply with the rewritten sentence only.",
            ),
            ChatMessage::user(text),
        ]);
        let reply = self.transport.complete(&request).map_err(|e: TransportError| {
            ParaphraseError::BackendUnavailable(e.to_string())
        })?;
        let reply = reply.trim();
        if reply.is_empty() {
            return Err(ParaphraseError::BackendUnavailable("empty reply".into()));
        }
        Ok(reply.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{OfflineTransport, ScriptedTransport};

    #[test]
    fn deterministic_and_changed() {
        let p = RuleParaphraser::default();
        let a = p.paraphrase("the camera moves up", 3).unwrap();
        assert_eq!(a, p.paraphrase("the camera moves up", 3).unwrap());
        assert_ne!(a, "the camera moves up");
        assert!(a.contains("up"), "direction class kept: {a}");
    }

    #[test]
    fn many_seeds_keep_direction() {
        let p = RuleParaphraser::default();
        for seed in 0..200 {
            let out = p.paraphrase("the camera moves slightly left, then tilts down by 30 degrees", seed).unwrap();
            assert!(out.contains("left") && out.contains("down"), "{out}");
            assert!(out.contains(','), "{out}");
        }
    }

    #[test]
    fn unknown_text_gets_prefix() {
        let out = RuleParaphraser::default().paraphrase("zzz", 0).unwrap();
        assert_eq!(out, "in this shot, zzz");
    }

    #[test]
    fn remote_backend() {
        let ok = RemoteParaphraser { transport: ScriptedTransport::new([" the camera rises "]), config: Default::default() };
        assert_eq!(ok.paraphrase("the camera moves up", 0).unwrap(), "the camera rises");
        let off = RemoteParaphraser { transport: OfflineTransport, config: Default::default() };
        assert!(matches!(off.paraphrase("x", 0), Err(ParaphraseError::BackendUnavailable(_))));
    }
}
