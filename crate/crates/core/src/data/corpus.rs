use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw documents with integer class labels in `[0, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub documents: Vec<String>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl LabeledCorpus {
    pub fn new(documents: Vec<String>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if documents.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} documents but {} labels",
                documents.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside [0, {})",
                class_names.len()
            )));
        }
        Ok(LabeledCorpus {
            documents,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Reads a `label,text` CSV. Labels are integer class indices, or class names
/// when a class list (one name per line) is supplied.
pub fn read_corpus(path: impl AsRef<Path>, class_list: Option<&Path>) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let classes = match class_list {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus_from(file, path, classes)
}

pub fn read_corpus_from(reader: impl Read, origin: &Path, class_names: Option<Vec<String>>) -> Result<LabeledCorpus> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let label_col = headers.iter().position(|h| h.trim() == "label");
    let text_col = headers.iter().position(|h| h.trim() == "text");
    let (Some(label_col), Some(text_col)) = (label_col, text_col) else {
        return Err(parse_err(1, "header must contain `label` and `text` columns".into()));
    };

    let by_name: Option<HashMap<&str, usize>> = class_names
        .as_ref()
        .map(|names| names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect());

    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw = record.get(label_col).unwrap_or("").trim();
        let label = match raw.parse::<usize>() {
            Ok(l) => l,
            Err(_) => by_name
                .as_ref()
                .and_then(|m| m.get(raw).copied())
                .ok_or_else(|| parse_err(line, format!("unknown label {raw:?}")))?,
        };
        if let Some(names) = &class_names {
            if label >= names.len() {
                return Err(parse_err(
                    line,
                    format!("label {label} outside the {} listed classes", names.len()),
                ));
            }
        }
        documents.push(record.get(text_col).unwrap_or("").to_owned());
        labels.push(label);
    }
    if documents.is_empty() {
        return Err(Error::Empty(format!("{} has no documents", origin.display())));
    }
    let class_names = class_names.unwrap_or_else(|| {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        (0..k).map(|i| i.to_string()).collect()
    });
    LabeledCorpus::new(documents, labels, class_names)
}
