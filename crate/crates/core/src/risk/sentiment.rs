use std::collections::BTreeSet;

use crate::marketdata::NewsItem;

const POSITIVE: &str = include_str!("../../assets/lexicon/positive.txt");
const NEGATIVE: &str = include_str!("../../assets/lexicon/negative.txt");

/// Source of a market-stance score in [−1, 1].
pub trait SentimentProvider: Send + Sync {
    /// Scores `news` relevant to `symbols`; with no symbols every item counts.
    fn score(&self, news: &[NewsItem], symbols: &[String]) -> f64;
}

/// Positive and negative term sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

fn words(list: &str) -> BTreeSet<String> {
    list.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            positive: words(POSITIVE),
            negative: words(NEGATIVE),
        }
    }
}

impl Lexicon {
    /// (positive hits, negative hits) over the lowercase alphabetic tokens of `text`.
    pub fn hits(&self, text: &str) -> (usize, usize) {
        let mut pos = 0;
        let mut neg = 0;
        for tok in text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty()) {
            let tok = tok.to_lowercase();
            if self.positive.contains(&tok) {
                pos += 1;
            } else if self.negative.contains(&tok) {
                neg += 1;
            }
        }
        (pos, neg)
    }
}

/// `(pos − neg) / (pos + neg + 1)` over headline and body.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconSentiment {
    pub lexicon: Lexicon,
}

impl SentimentProvider for LexiconSentiment {
    fn score(&self, news: &[NewsItem], symbols: &[String]) -> f64 {
        sentiment_score(&self.lexicon, news, symbols)
    }
}

pub fn sentiment_score(lexicon: &Lexicon, news: &[NewsItem], symbols: &[String]) -> f64 {
    let (mut pos, mut neg) = (0usize, 0usize);
    for item in news {
        if !symbols.is_empty() && !symbols.iter().any(|s| item.mentions(s)) {
            continue;
        }
        for text in [&item.headline, &item.body] {
            let (p, n) = lexicon.hits(text);
            pos += p;
            neg += n;
        }
    }
    ((pos as f64 - neg as f64) / (pos + neg + 1) as f64).clamp(-1.0, 1.0)
}
