//! Rule-based satisfaction scoring of review texts along four dimensions.
//!
//! A review is cut into fragments at punctuation, each fragment is segmented
//! by forward maximum matching against the lexicon, and every sentiment term
//! is credited to a target term (and through it to a dimension). A term's
//! contribution is its polarity, scaled by degree adverbs just before it and
//! flipped once per negation just before it. The per-dimension sum is then
//! reduced to its sign.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Activities,
    BuiltEnvironment,
    ServiceFacilities,
    BusinessFormats,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Activities,
        Dimension::BuiltEnvironment,
        Dimension::ServiceFacilities,
        Dimension::BusinessFormats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Activities => "activities",
            Dimension::BuiltEnvironment => "built_environment",
            Dimension::ServiceFacilities => "service_facilities",
            Dimension::BusinessFormats => "business_formats",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// On-disk lexicon document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub target_terms: BTreeMap<String, Dimension>,
    #[serde(default)]
    pub sentiment_terms: BTreeMap<String, f64>,
    #[serde(default)]
    pub negation_terms: Vec<String>,
    #[serde(default)]
    pub degree_adverbs: BTreeMap<String, f64>,
    /// Extra segmentation units that carry no meaning for scoring.
    #[serde(default)]
    pub user_dictionary: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TokenKind {
    Target(Dimension),
    Sentiment(f64),
    Negation,
    Degree(f64),
    Word,
}

/// A validated lexicon with its lookup index.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    file: LexiconFile,
    index: HashMap<String, TokenKind>,
    targets: Vec<(String, Dimension)>,
    max_term_chars: usize,
}

const DEMO_LEXICON: &str = include_str!("../data/demo_lexicon.json");

/// ASCII letters fold to lowercase; everything else is kept as is, so byte
/// offsets survive normalization.
fn normalize(s: &str) -> String {
    s.to_ascii_lowercase()
}

impl LexiconSet {
    pub fn new(file: LexiconFile) -> Result<Self> {
        let mut index: HashMap<String, TokenKind> = HashMap::new();
        let mut insert = |term: &str, kind: TokenKind, section: &str| -> Result<()> {
            let key = normalize(term.trim());
            if key.is_empty() {
                return Err(Error::Lexicon(format!("empty term in {section}")));
            }
            if index.insert(key, kind).is_some() {
                return Err(Error::Lexicon(format!(
                    "term `{term}` appears more than once across sections"
                )));
            }
            Ok(())
        };
        for (t, &d) in &file.target_terms {
            insert(t, TokenKind::Target(d), "target_terms")?;
        }
        for (t, &w) in &file.sentiment_terms {
            if !w.is_finite() {
                return Err(Error::Lexicon(format!("sentiment weight for `{t}` is not finite")));
            }
            insert(t, TokenKind::Sentiment(w), "sentiment_terms")?;
        }
        for t in &file.negation_terms {
            insert(t, TokenKind::Negation, "negation_terms")?;
        }
        for (t, &m) in &file.degree_adverbs {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Lexicon(format!(
                    "degree multiplier for `{t}` must be positive, got {m}"
                )));
            }
            insert(t, TokenKind::Degree(m), "degree_adverbs")?;
        }
        for t in &file.user_dictionary {
            insert(t, TokenKind::Word, "user_dictionary")?;
        }
        let max_term_chars = index.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        let targets = file
            .target_terms
            .iter()
            .map(|(t, &d)| (normalize(t.trim()), d))
            .collect();
        Ok(LexiconSet {
            file,
            index,
            targets,
            max_term_chars,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: LexiconFile =
            serde_json::from_str(json).map_err(|e| Error::Lexicon(e.to_string()))?;
        LexiconSet::new(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LexiconSet::from_json(&text)
    }

    /// The bundled demonstration lexicon.
    pub fn demo() -> Self {
        LexiconSet::from_json(DEMO_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn file(&self) -> &LexiconFile {
        &self.file
    }

    pub fn lookup(&self, term: &str) -> Option<TokenKind> {
        self.index.get(&normalize(term)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    pub text: String,
    /// Byte offsets into the text that was tokenized.
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

fn is_word_char(c: char) -> bool {
    (c.is_alphanumeric() || c == '\'') && !is_cjk(c)
}

/// Forward maximum matching over the lexicon. Text outside the lexicon
/// becomes one token per CJK character or one token per Latin word; other
/// symbols are single-character tokens and whitespace is dropped.
pub fn tokenize(text: &str, lex: &LexiconSet) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut matched = None;
        let longest = lex.max_term_chars.min(chars.len() - i);
        let starts_mid_word = i > 0 && is_word_char(c) && is_word_char(chars[i - 1].1);
        if !starts_mid_word {
            for len in (1..=longest).rev() {
                let last = chars[i + len - 1].1;
                let splits_word =
                    is_word_char(last) && chars.get(i + len).is_some_and(|&(_, n)| is_word_char(n));
                if splits_word {
                    continue;
                }
                let candidate = &text[byte_at(i)..byte_at(i + len)];
                if let Some(kind) = lex.lookup(candidate) {
                    matched = Some((len, kind));
                    break;
                }
            }
        }
        let (len, kind) = matched.unwrap_or_else(|| {
            if is_word_char(c) {
                let run = chars[i..].iter().take_while(|&&(_, ch)| is_word_char(ch)).count();
                (run, TokenKind::Word)
            } else {
                (1, TokenKind::Word)
            }
        });
        let (start, end) = (byte_at(i), byte_at(i + len));
        tokens.push(Token {
            text: text[start..end].to_string(),
            start,
            end,
            kind,
        });
        i += len;
    }
    tokens
}

pub const DELIMITERS: &[char] = &['，', '。', '！', '？', '；', ',', '.', '!', '?', ';', '~', '\n'];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetMatch {
    pub term: String,
    pub dimension: Dimension,
    /// Byte offsets into the full review text.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentMatch {
    pub term: String,
    pub weight: f64,
    /// Index into the fragment's tokens.
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubSentence {
    pub text: String,
    /// Byte span in the full review text.
    pub start: usize,
    pub end: usize,
    /// Tokens with offsets relative to the full review text.
    pub tokens: Vec<Token>,
    pub targets: Vec<TargetMatch>,
    pub sentiments: Vec<SentimentMatch>,
    /// For a fragment with sentiment but no target, the index of the earlier
    /// fragment whose targets its sentiment is credited to.
    pub attached_to: Option<usize>,
}

/// Target terms found anywhere in the fragment, including inside longer
/// words. Overlaps resolve leftmost-longest.
fn find_targets(fragment: &str, offset: usize, lex: &LexiconSet) -> Vec<TargetMatch> {
    let hay = normalize(fragment);
    let mut found: Vec<(usize, usize, &str, Dimension)> = Vec::new();
    for (term, dim) in &lex.targets {
        for (pos, _) in hay.match_indices(term.as_str()) {
            found.push((pos, pos + term.len(), term.as_str(), *dim));
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    let mut out: Vec<TargetMatch> = Vec::new();
    let mut covered = 0;
    for (s, e, _, dim) in found {
        if s < covered {
            continue;
        }
        out.push(TargetMatch {
            term: fragment[s..e].to_string(),
            dimension: dim,
            start: offset + s,
            end: offset + e,
        });
        covered = e;
    }
    out
}

/// Tunable windows of the scoring rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringRules {
    /// Negations counted among this many tokens before a sentiment term.
    pub negation_window: usize,
    /// Degree adverbs applied from this many tokens before a sentiment term.
    pub degree_window: usize,
    /// How many fragments back a target-less fragment may look for a target.
    pub attach_distance: usize,
}

impl Default for ScoringRules {
    fn default() -> Self {
        ScoringRules {
            negation_window: 3,
            degree_window: 2,
            attach_distance: 2,
        }
    }
}

pub fn split_subsentences(text: &str, lex: &LexiconSet) -> Vec<SubSentence> {
    split_with(text, lex, &ScoringRules::default())
}

fn split_with(text: &str, lex: &LexiconSet, rules: &ScoringRules) -> Vec<SubSentence> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if DELIMITERS.contains(&c) {
            spans.push((start, i));
            start = i + c.len_utf8();
        }
    }
    spans.push((start, text.len()));

    let mut fragments: Vec<SubSentence> = spans
        .into_iter()
        .filter(|&(s, e)| !text[s..e].trim().is_empty())
        .map(|(s, e)| {
            let piece = &text[s..e];
            let mut tokens = tokenize(piece, lex);
            for t in &mut tokens {
                t.start += s;
                t.end += s;
            }
            let sentiments = tokens
                .iter()
                .enumerate()
                .filter_map(|(i, t)| match t.kind {
                    TokenKind::Sentiment(w) => Some(SentimentMatch {
                        term: t.text.clone(),
                        weight: w,
                        token: i,
                    }),
                    _ => None,
                })
                .collect();
            SubSentence {
                text: piece.to_string(),
                start: s,
                end: e,
                targets: find_targets(piece, s, lex),
                tokens,
                sentiments,
                attached_to: None,
            }
        })
        .collect();

    for i in 0..fragments.len() {
        if fragments[i].targets.is_empty() && !fragments[i].sentiments.is_empty() {
            fragments[i].attached_to = (1..=rules.attach_distance)
                .filter_map(|back| i.checked_sub(back))
                .find(|&j| !fragments[j].targets.is_empty());
        }
    }
    fragments
}

/// Four ternary satisfaction scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionScores {
    pub activities: i8,
    pub built_environment: i8,
    pub service_facilities: i8,
    pub business_formats: i8,
}

impl DimensionScores {
    pub fn from_array(a: [i8; 4]) -> Self {
        DimensionScores {
            activities: a[0],
            built_environment: a[1],
            service_facilities: a[2],
            business_formats: a[3],
        }
    }

    pub fn as_array(&self) -> [i8; 4] {
        [
            self.activities,
            self.built_environment,
            self.service_facilities,
            self.business_formats,
        ]
    }

    pub fn get(&self, d: Dimension) -> i8 {
        self.as_array()[d.slot()]
    }
}

impl fmt::Display for DimensionScores {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.as_array();
        write!(f, "{a} {b} {c} {d}")
    }
}

/// Per-dimension sums before sign thresholding.
pub fn raw_scores(text: &str, lex: &LexiconSet, rules: &ScoringRules) -> [f64; 4] {
    let fragments = split_with(text, lex, rules);
    let mut raw = [0.0f64; 4];
    for frag in &fragments {
        for m in &frag.sentiments {
            let Some(dim) = attribute(frag, m, &fragments) else {
                continue;
            };
            let before = &frag.tokens[..m.token];
            let degree: f64 = before
                .iter()
                .rev()
                .take(rules.degree_window)
                .filter_map(|t| match t.kind {
                    TokenKind::Degree(x) => Some(x),
                    _ => None,
                })
                .product();
            let negations = before
                .iter()
                .rev()
                .take(rules.negation_window)
                .filter(|t| t.kind == TokenKind::Negation)
                .count();
            let sign = if negations % 2 == 1 { -1.0 } else { 1.0 };
            raw[dim.slot()] += m.weight * degree * sign;
        }
    }
    raw
}

/// Dimension credited with a sentiment term: the closest target at or before
/// it in the same fragment, else the first target after it, else the last
/// target of the attached earlier fragment.
fn attribute(frag: &SubSentence, m: &SentimentMatch, all: &[SubSentence]) -> Option<Dimension> {
    let at = frag.tokens[m.token].start;
    if !frag.targets.is_empty() {
        let preceding = frag.targets.iter().rev().find(|t| t.start <= at);
        let following = frag.targets.iter().find(|t| t.start > at);
        return preceding.or(following).map(|t| t.dimension);
    }
    frag.attached_to
        .and_then(|j| all[j].targets.last())
        .map(|t| t.dimension)
}

fn ternary(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn score_review(text: &str, lex: &LexiconSet) -> DimensionScores {
    score_review_with(text, lex, &ScoringRules::default())
}

pub fn score_review_with(text: &str, lex: &LexiconSet, rules: &ScoringRules) -> DimensionScores {
    DimensionScores::from_array(raw_scores(text, lex, rules).map(ternary))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    #[serde(deserialize_with = "string_or_number")]
    pub id: String,
    pub quarter: String,
    pub text: String,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!(
            "review id must be a string or number, got {other}"
        ))),
    }
}

/// Parse line-delimited review records. Blank lines are skipped; each
/// malformed line yields its own error so callers can keep the rest.
pub fn parse_reviews_jsonl(text: &str, path: &Path) -> Vec<Result<ReviewRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewScore {
    pub id: String,
    pub quarter: String,
    pub scores: DimensionScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarterSentiment {
    pub quarter: String,
    pub reviews: usize,
    /// Mean score per dimension, in [`Dimension::ALL`] order.
    pub means: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchScores {
    pub reviews: Vec<ReviewScore>,
    /// Sorted by quarter name.
    pub quarters: Vec<QuarterSentiment>,
}

pub fn score_batch(reviews: &[ReviewRecord], lex: &LexiconSet) -> BatchScores {
    score_batch_with(reviews, lex, &ScoringRules::default())
}

pub fn score_batch_with(
    reviews: &[ReviewRecord],
    lex: &LexiconSet,
    rules: &ScoringRules,
) -> BatchScores {
    let scored: Vec<ReviewScore> = reviews
        .par_iter()
        .map(|r| ReviewScore {
            id: r.id.clone(),
            quarter: r.quarter.clone(),
            scores: score_review_with(&r.text, lex, rules),
        })
        .collect();

    let mut sums: BTreeMap<&str, ([i64; 4], usize)> = BTreeMap::new();
    for r in &scored {
        let e = sums.entry(r.quarter.as_str()).or_default();
        for (acc, s) in e.0.iter_mut().zip(r.scores.as_array()) {
            *acc += s as i64;
        }
        e.1 += 1;
    }
    let quarters = sums
        .into_iter()
        .map(|(q, (s, n))| QuarterSentiment {
            quarter: q.to_string(),
            reviews: n,
            means: s.map(|x| x as f64 / n as f64),
        })
        .collect();
    BatchScores {
        reviews: scored,
        quarters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LexiconSet {
        LexiconSet::new(LexiconFile {
            target_terms: [("环境".to_string(), Dimension::BuiltEnvironment)].into(),
            sentiment_terms: [("好".to_string(), 1.0), ("干净".to_string(), 1.0)].into(),
            negation_terms: vec!["不".into()],
            degree_adverbs: [("很".to_string(), 1.5)].into(),
            user_dictionary: vec!["北京大学".into(), "北京".into(), "大学生".into()],
            ..Default::default()
        })
        .unwrap()
    }

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenize_basics() {
        let lex = toy();
        assert!(tokenize("", &lex).is_empty());
        let t = tokenize("很干净", &lex);
        assert_eq!(texts(&t), vec!["很", "干净"]);
        assert_eq!((t[1].start, t[1].end), (3, 9));
        assert_eq!(t[1].kind, TokenKind::Sentiment(1.0));
    }

    #[test]
    fn longest_candidate_wins() {
        let lex = toy();
        assert_eq!(texts(&tokenize("北京大学", &lex)), vec!["北京大学"]);
        assert_eq!(texts(&tokenize("北京大", &lex)), vec!["北京", "大"]);
    }

    #[test]
    fn latin_words_stay_whole() {
        let lex = LexiconSet::demo();
        let t = tokenize("Visited the Pedestrian Street, a bit dirty", &lex);
        assert_eq!(
            texts(&t),
            vec!["Visited", "the", "Pedestrian Street", ",", "a bit", "dirty"]
        );
        assert_eq!(t[2].kind, TokenKind::Target(Dimension::Activities));
        // "visit" is a target but may not split "Visited".
        assert_eq!(t[0].kind, TokenKind::Word);
    }

    #[test]
    fn lexicon_validation() {
        let dup = LexiconFile {
            sentiment_terms: [("好".to_string(), 1.0)].into(),
            negation_terms: vec!["好".into()],
            ..Default::default()
        };
        assert!(matches!(LexiconSet::new(dup), Err(Error::Lexicon(_))));
        let bad = LexiconFile {
            degree_adverbs: [("很".to_string(), 0.0)].into(),
            ..Default::default()
        };
        assert!(LexiconSet::new(bad).is_err());
        assert!(LexiconSet::from_json("{}").is_err());
    }

    #[test]
    fn fragments() {
        let lex = LexiconSet::demo();
        assert_eq!(split_subsentences("A。B", &lex).len(), 2);
        let f = split_subsentences("hello world. 12345", &lex);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|s| s.targets.is_empty() && s.sentiments.is_empty()));
    }

    #[test]
    fn sentiment_attaches_to_earlier_target() {
        let lex = LexiconSet::demo();
        let f = split_subsentences("上厕所，排很长的队", &lex);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].targets[0].dimension, Dimension::ServiceFacilities);
        assert_eq!(f[1].sentiments[0].term, "排很长的队");
        assert_eq!(f[1].attached_to, Some(0));
        assert_eq!(
            score_review("上厕所，排很长的队", &lex),
            DimensionScores::from_array([0, 0, -1, 0])
        );
    }

    #[test]
    fn attachment_is_bounded() {
        let lex = LexiconSet::demo();
        let f = split_subsentences("厕所。a。b。很脏", &lex);
        assert_eq!(f.len(), 4);
        assert_eq!(f[3].attached_to, None);
        assert_eq!(score_review("厕所。a。b。很脏", &lex), DimensionScores::default());
    }

    #[test]
    fn negation_flip() {
        let lex = toy();
        assert_eq!(score_review("环境好", &lex).built_environment, 1);
        assert_eq!(score_review("环境不好", &lex).built_environment, -1);
        assert_eq!(score_review("环境不不好", &lex).built_environment, 1);
        assert_eq!(score_review("没有目标词好", &lex), DimensionScores::default());
    }

    #[test]
    fn degree_scales_only_magnitude() {
        let lex = toy();
        let rules = ScoringRules::default();
        let raw = raw_scores("环境很好", &lex, &rules);
        assert_eq!(raw[Dimension::BuiltEnvironment.slot()], 1.5);
        // Three tokens back is outside the degree window.
        let raw = raw_scores("环境很的的好", &lex, &rules);
        assert_eq!(raw[Dimension::BuiltEnvironment.slot()], 1.0);
    }

    #[test]
    fn batch_means() {
        let lex = toy();
        let r = |id: &str, text: &str| ReviewRecord {
            id: id.into(),
            quarter: "q".into(),
            text: text.into(),
        };
        let b = score_batch(&[r("1", "环境好")], &lex);
        assert_eq!(b.quarters[0].means, [0.0, 1.0, 0.0, 0.0]);
        let b = score_batch(&[r("1", "环境好"), r("2", "环境不好")], &lex);
        assert_eq!(b.quarters[0].means[1], 0.0);
        let b = score_batch(
            &[r("1", "环境好"), r("2", "环境很好"), r("3", "环境"), r("4", "环境不好")],
            &lex,
        );
        assert_eq!(b.quarters[0].means[1], 0.25);
        assert_eq!(b.reviews.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["1", "2", "3", "4"]);
    }

    #[test]
    fn jsonl_records() {
        let text = "{\"id\": 7, \"quarter\": \"Yuyuan\", \"text\": \"很好\"}\n\nnot json\n";
        let parsed = parse_reviews_jsonl(text, Path::new("r.jsonl"));
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].as_ref().unwrap().id, "7");
        let err = parsed[1].as_ref().unwrap_err().to_string();
        assert!(err.starts_with("r.jsonl:3:"), "{err}");
    }
}
