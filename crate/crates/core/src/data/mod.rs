//! Corpus ingestion, preprocessing and sentence embeddings.

mod corpus;
mod dataset;
pub mod synthetic;
mod text;
mod wordvec;

pub use corpus::{read_corpus, read_corpus_from, LabeledCorpus};
pub use dataset::{
    build_embedding_cache, embed_corpus, minmax_scale, read_cache, read_cache_from, write_cache, write_cache_to,
    EmbeddedDataset, EmbeddingOutcome, MinMaxScaler, CACHE_MAGIC,
};
pub use text::{preprocess, stop_words, STOP_WORDS_VERSION};
pub use wordvec::{embed_document, load_word_vectors, read_word_vectors, DocumentEmbedding, WordVectorTable};
