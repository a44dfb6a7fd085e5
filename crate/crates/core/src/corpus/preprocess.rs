//! Tweet/profile text normalization.
//!
//! The pipeline is pinned so that every downstream consumer (encoders,
//! term counts, hashtag tallies) sees the same token stream:
//! lowercase -> strip emoji codepoints -> drop URL tokens and ASCII
//! smiley tokens -> collapse whitespace. Hashtags survive intact.

use crate::corpus::UserRecord;
use crate::error::{Error, Result};

/// ASCII smiley tokens removed when they stand alone as a whitespace token.
/// Matched after lowercasing, so `:D` is listed as `:d`.
const SMILEY_TOKENS: &[&str] = &[":)", ":(", ":d", ";)", ":-)", ":-(", ":p"];

/// Codepoint ranges treated as emoji. Covers the supplementary pictographic
/// planes, the misc-symbol/dingbat blocks, regional indicators, variation
/// selectors, the zero-width joiner and the combining keycap.
const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x1F000, 0x1FAFF), // mahjong/cards through extended pictographs
    (0x2600, 0x27BF),   // misc symbols + dingbats
    (0x2B00, 0x2BFF),   // misc symbols and arrows
    (0x231A, 0x231B),   // watch, hourglass
    (0x23E9, 0x23FA),   // a/v control pictographs
    (0x25FB, 0x25FE),   // emoji-presentation squares
    (0xFE00, 0xFE0F),   // variation selectors
    (0x200D, 0x200D),   // zero-width joiner
    (0x20E3, 0x20E3),   // combining enclosing keycap
    (0x3030, 0x3030),
    (0x303D, 0x303D),
    (0x3297, 0x3297),
    (0x3299, 0x3299),
];

fn is_emoji_char(c: char) -> bool {
    let cp = c as u32;
    EMOJI_RANGES.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}

fn is_url_token(tok: &str) -> bool {
    tok.contains("http://")
        || tok.contains("https://")
        || tok.contains("t.co/")
        || tok.starts_with("www.")
}

fn is_smiley_token(tok: &str) -> bool {
    SMILEY_TOKENS.contains(&tok)
}

/// Normalize raw tweet or profile text. Idempotent; empty input maps to
/// empty output.
pub fn preprocess_text(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let no_emoji: String = lowered.chars().filter(|c| !is_emoji_char(*c)).collect();
    no_emoji
        .split_whitespace()
        .filter(|tok| !is_url_token(tok) && !is_smiley_token(tok))
        .collect::<Vec<_>>()
        .join(" ")
}

/// True when a raw tweet is a retweet (`RT @...` prefix, case-insensitive).
pub fn is_retweet(raw: &str) -> bool {
    let lowered = raw.trim_start().to_lowercase();
    lowered.starts_with("rt @")
}

/// Join a user's preprocessed activity tweets into one document, preserving
/// stored order, separated by single spaces. Retweets are included.
pub fn concat_activity_tweets(record: &UserRecord) -> Result<String> {
    concat_activity_tweets_filtered(record, true)
}

/// Like [`concat_activity_tweets`] but optionally dropping retweet bodies.
pub fn concat_activity_tweets_filtered(
    record: &UserRecord,
    include_retweets: bool,
) -> Result<String> {
    if record.activity_tweets.is_empty() {
        return Err(Error::EmptyView("tweets".into()));
    }
    let parts: Vec<String> = record
        .activity_tweets
        .iter()
        .filter(|raw| include_retweets || !is_retweet(raw))
        .map(|raw| preprocess_text(raw))
        .filter(|s| !s.is_empty())
        .collect();
    Ok(parts.join(" "))
}
