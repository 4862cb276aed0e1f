//! Builds averaged word-vector sentence embeddings for a small in-memory
//! corpus, scales them and round-trips them through the binary cache.
//!
//! ```text
//! cargo run --example embed_corpus
//! ```

use std::io::Cursor;
use std::path::Path;

use disentangle::data::{
    embed_corpus, minmax_scale, preprocess, read_cache, read_word_vectors, write_cache, LabeledCorpus,
};

const VECTORS: &str = "\
stocks 0.9 0.1 0.0
market 0.8 0.2 0.1
profit 0.7 0.1 0.2
league 0.1 0.9 0.0
coach 0.0 0.8 0.1
season 0.2 0.7 0.1
";

fn main() -> disentangle::Result<()> {
    let table = read_word_vectors(Cursor::new(VECTORS), Path::new("inline"))?;
    let docs = [
        "Stocks rallied as the market shrugged off profit warnings.",
        "The coach praised the league's best season in years!",
        "Nothing here is in the vocabulary.",
    ];
    for d in &docs {
        println!("{:?}", preprocess(d));
    }
    let corpus = LabeledCorpus::new(
        docs.iter().map(|d| d.to_string()).collect(),
        vec![0, 1, 0],
        vec!["business".into(), "sports".into()],
    )?;
    let outcome = embed_corpus(&corpus, &table)?;
    println!("embeddings:\n{:.4}", outcome.dataset.features());
    println!("rows with no known words: {:?}", outcome.fallback_rows);

    let scaled = minmax_scale(&outcome.dataset)?;
    let path = std::env::temp_dir().join("disentangle-embed-example.emb");
    write_cache(&scaled, &path)?;
    let back = read_cache(&path)?;
    // The cache stores f32, so values come back rounded to single precision.
    let drift = (&back.features() - &scaled.features())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    println!(
        "scaled cache: {} rows, scaled={}, max round-trip drift {drift:.1e}",
        back.len(),
        back.is_scaled()
    );
    Ok(())
}
