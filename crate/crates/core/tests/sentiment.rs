use urbanlens::sentiment::{
    score_batch, score_review, split_subsentences, tokenize, Dimension, LexiconSet, ReviewRecord,
    TokenKind,
};
use urbanlens::Error;

const LEXICON: &str = r#"{
    "target_terms": {"market": "business_formats", "square": "built_environment", "guide": "activities"},
    "sentiment_terms": {"lively": 1.0, "cramped": -1.0, "boring": -1.0, "fun": 1.0},
    "negation_terms": ["not", "never"],
    "degree_adverbs": {"very": 2.0, "slightly": 0.5},
    "user_dictionary": ["old town"]
}"#;

fn lexicon() -> LexiconSet {
    LexiconSet::from_json(LEXICON).unwrap()
}

#[test]
fn custom_lexicon_scores_each_dimension() {
    let lex = lexicon();
    let s = score_review("The market is lively, but the square is cramped.", &lex);
    assert_eq!(s.to_string(), "0 -1 0 1");
    assert_eq!(s.get(Dimension::BusinessFormats), 1);
    let s = score_review("The guide was not boring!", &lex);
    assert_eq!(s.activities, 1);
}

#[test]
fn targets_match_inside_words_but_sentiment_terms_do_not() {
    let lex = lexicon();
    // Target search is a substring search, so inflected forms still count.
    let s = score_review("Supermarkets, lively enough.", &lex);
    assert_eq!(s.business_formats, 1);
    // Sentiment terms come from tokenization and need whole words.
    let s = score_review("The market is unlively.", &lex);
    assert_eq!(s.as_array(), [0, 0, 0, 0]);
    let kinds: Vec<TokenKind> = tokenize("MARKET Lively", &lex).iter().map(|t| t.kind).collect();
    assert_eq!(
        kinds,
        [TokenKind::Target(Dimension::BusinessFormats), TokenKind::Sentiment(1.0)]
    );
}

#[test]
fn opposing_mentions_cancel_to_neutral() {
    let lex = lexicon();
    let s = score_review("market lively. market cramped.", &lex);
    assert_eq!(s.business_formats, 0);
    // A degree adverb tips the balance.
    let s = score_review("market very lively. market cramped.", &lex);
    assert_eq!(s.business_formats, 1);
}

#[test]
fn fragments_without_targets_attach_backwards() {
    let lex = lexicon();
    let frags = split_subsentences("the square, very cramped", &lex);
    assert_eq!(frags.len(), 2);
    assert_eq!(frags[1].attached_to, Some(0));
    assert_eq!(score_review("the square, very cramped", &lex).built_environment, -1);
    // Too far back: three fragments later the sentiment is dropped.
    assert_eq!(score_review("the square, a, b, c, cramped", &lex).built_environment, 0);
}

#[test]
fn invalid_lexicons_are_rejected() {
    let message = |json: &str| match LexiconSet::from_json(json) {
        Err(Error::Lexicon(m)) => m,
        other => panic!("expected a lexicon error, got {other:?}"),
    };
    let dup = r#"{"target_terms": {"fun": "activities"}, "sentiment_terms": {"Fun": 1.0}}"#;
    assert!(message(dup).contains("more than once"));
    let zero = r#"{"target_terms": {}, "degree_adverbs": {"very": 0.0}}"#;
    assert!(message(zero).contains("must be positive"));
    let dim = r#"{"target_terms": {"x": "weather"}}"#;
    assert!(message(dim).contains("weather"));
    let missing = r#"{"sentiment_terms": {"fun": 1.0}}"#;
    assert!(message(missing).contains("target_terms"));
    // Only the target section is required.
    assert!(LexiconSet::from_json(r#"{"target_terms": {}}"#).is_ok());
}

#[test]
fn batch_scoring_keeps_input_order() {
    let lex = lexicon();
    let records: Vec<ReviewRecord> = (0..50)
        .map(|i| ReviewRecord {
            id: i.to_string(),
            quarter: if i % 2 == 0 { "b".into() } else { "a".into() },
            text: if i % 3 == 0 { "market lively".into() } else { "square cramped".into() },
        })
        .collect();
    let batch = score_batch(&records, &lex);
    let ids: Vec<String> = batch.reviews.iter().map(|r| r.id.clone()).collect();
    assert_eq!(ids, (0..50).map(|i| i.to_string()).collect::<Vec<_>>());
    let quarters: Vec<&str> = batch.quarters.iter().map(|q| q.quarter.as_str()).collect();
    assert_eq!(quarters, ["a", "b"]);
    assert_eq!(batch.quarters[0].reviews + batch.quarters[1].reviews, 50);
}
