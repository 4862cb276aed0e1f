use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Word vectors in the GloVe text layout, stored row-major in single precision.
#[derive(Debug, Clone)]
pub struct WordVectorTable {
    vocab: HashMap<String, usize>,
    vectors: Vec<f32>,
    dim: usize,
}

impl WordVectorTable {
    /// Builds a table from `(token, vector)` pairs. Later duplicates of a
    /// token are ignored.
    pub fn from_pairs<S, I>(pairs: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f32>)>,
    {
        let mut table = WordVectorTable {
            vocab: HashMap::new(),
            vectors: Vec::new(),
            dim: 0,
        };
        for (token, vector) in pairs {
            if vector.is_empty() {
                return Err(Error::InvalidArgument("word vector of length 0".into()));
            }
            if table.dim == 0 {
                table.dim = vector.len();
            } else if vector.len() != table.dim {
                return Err(Error::Dimension(format!(
                    "word vector of length {} in a table of dimension {}",
                    vector.len(),
                    table.dim
                )));
            }
            table.insert(token.into(), &vector);
        }
        if table.dim == 0 {
            return Err(Error::Empty("word vector table".into()));
        }
        Ok(table)
    }

    fn insert(&mut self, token: String, vector: &[f32]) {
        let next = self.vocab.len();
        if let std::collections::hash_map::Entry::Vacant(slot) = self.vocab.entry(token) {
            slot.insert(next);
            self.vectors.extend_from_slice(vector);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vocab
            .get(token)
            .map(|&row| &self.vectors[row * self.dim..(row + 1) * self.dim])
    }
}

/// Reads a GloVe-format text file: one token followed by `d_w` numbers per line.
pub fn load_word_vectors(path: impl AsRef<Path>) -> Result<WordVectorTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word_vectors(BufReader::new(file), path)
}

/// Like [`load_word_vectors`] but over any buffered reader; `origin` is used
/// in error messages.
pub fn read_word_vectors(reader: impl BufRead, origin: &Path) -> Result<WordVectorTable> {
    let mut table = WordVectorTable {
        vocab: HashMap::new(),
        vectors: Vec::new(),
        dim: 0,
    };
    let mut row = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let lineno = index + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message,
        };
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-blank line has a field");
        row.clear();
        for field in fields {
            let value: f32 = field
                .parse()
                .map_err(|_| parse_err(format!("cannot parse {field:?} as a number")))?;
            if !value.is_finite() {
                return Err(parse_err(format!("non-finite value {field:?}")));
            }
            row.push(value);
        }
        if row.is_empty() {
            return Err(parse_err(format!("token {token:?} has no vector")));
        }
        if table.dim == 0 {
            table.dim = row.len();
        } else if row.len() != table.dim {
            return Err(parse_err(format!("expected {} values, found {}", table.dim, row.len())));
        }
        table.insert(token.to_owned(), &row);
    }
    if table.is_empty() {
        return Err(Error::Empty(format!("{} has no word vectors", origin.display())));
    }
    Ok(table)
}

/// Mean word vector of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentEmbedding {
    pub vector: Vec<f64>,
    /// Number of tokens found in the vocabulary.
    pub in_vocabulary: usize,
}

impl DocumentEmbedding {
    /// True when no token was in the vocabulary and the vector is all zeros.
    pub fn is_fallback(&self) -> bool {
        self.in_vocabulary == 0
    }
}

/// Averages the vectors of in-vocabulary tokens; out-of-vocabulary tokens are
/// skipped. A document without any known token embeds to the zero vector.
pub fn embed_document<S: AsRef<str>>(tokens: &[S], table: &WordVectorTable) -> DocumentEmbedding {
    let mut sum = vec![0.0f64; table.dim()];
    let mut count = 0usize;
    for token in tokens {
        if let Some(v) = table.get(token.as_ref()) {
            for (acc, &x) in sum.iter_mut().zip(v) {
                *acc += f64::from(x);
            }
            count += 1;
        }
    }
    if count > 0 {
        let inv = 1.0 / count as f64;
        sum.iter_mut().for_each(|x| *x *= inv);
    }
    DocumentEmbedding {
        vector: sum,
        in_vocabulary: count,
    }
}
