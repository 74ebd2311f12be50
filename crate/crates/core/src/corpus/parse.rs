//! Line-delimited ingestion of publication records.
//!
//! One JSON object per line:
//!
//! ```json
//! {"pub_id":"x1","title":"Deep Nets","year":1999,"source_id":"nips",
//!  "authors":[{"author_id":"a1","name":"Ada A.","gender":"female"}],
//!  "preprint":false}
//! ```
//!
//! `gender` and `preprint` are optional. Malformed lines are rejected and
//! counted; the run continues. The same `pub_id` on two lines is merged
//! when every field agrees and is a hard error otherwise.

use std::collections::HashMap;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_title, Corpus, Gender, Publication};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
struct RawAuthorRef {
    author_id: String,
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    #[serde(default)]
    gender: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawRecord {
    pub_id: String,
    title: String,
    year: i32,
    source_id: String,
    authors: Vec<RawAuthorRef>,
    #[serde(default)]
    preprint: bool,
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct ParseOptions {
    /// Calendar-year window the corpus is allowed to cover. Records outside
    /// it are rejected. `None` derives coverage from the data.
    pub coverage: Option<(i32, i32)>,
    /// Drop records flagged `preprint` at ingest time.
    pub skip_preprints: bool,
}


#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub publications: u64,
    pub authors: u64,
    pub rejected: u64,
    pub duplicates_merged: u64,
    pub preprints_skipped: u64,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineError {
    pub line: u64,
    pub message: String,
}

/// Parse line-delimited publication records into a corpus.
///
/// Record-level problems (bad JSON, missing fields, empty author list,
/// out-of-coverage year) reject the line and are reported; a `pub_id`
/// reappearing with conflicting fields aborts with [`Error::Conflict`].
pub fn parse_publications(
    reader: impl BufRead,
    opts: &ParseOptions,
) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut pubs: Vec<Publication> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut author_slots: Vec<(String, Gender)> = Vec::new();
    let mut author_idx: HashMap<String, u32> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                report.rejected += 1;
                report.errors.push(LineError {
                    line: lineno,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if let Some(msg) = validate(&raw, opts) {
            report.rejected += 1;
            report.errors.push(LineError {
                line: lineno,
                message: msg,
            });
            continue;
        }
        if opts.skip_preprints && raw.preprint {
            report.preprints_skipped += 1;
            continue;
        }

        let mut authors = Vec::with_capacity(raw.authors.len());
        for aref in &raw.authors {
            let gender = match aref.gender.as_deref() {
                None => Gender::Undetected,
                // Validated above.
                Some(label) => Gender::parse(label).unwrap(),
            };
            let idx = *author_idx.entry(aref.author_id.clone()).or_insert_with(|| {
                author_slots.push((aref.author_id.clone(), Gender::Undetected));
                (author_slots.len() - 1) as u32
            });
            merge_gender(&mut author_slots[idx as usize], gender)?;
            authors.push(idx);
        }

        let publication = Publication {
            norm_title: normalize_title(&raw.title),
            pub_id: raw.pub_id,
            title: raw.title,
            year: raw.year,
            source_id: raw.source_id,
            authors,
            preprint: raw.preprint,
        };

        match by_id.get(&publication.pub_id) {
            None => {
                by_id.insert(publication.pub_id.clone(), pubs.len());
                pubs.push(publication);
            }
            Some(&existing) => {
                if pubs[existing] == publication {
                    report.duplicates_merged += 1;
                } else {
                    return Err(Error::Conflict(format!(
                        "pub_id {} repeated with conflicting fields (line {})",
                        publication.pub_id, lineno
                    )));
                }
            }
        }
    }

    let corpus = Corpus::assemble(pubs, author_slots, opts.coverage)?;
    report.publications = corpus.publications().len() as u64;
    report.authors = corpus.authors().len() as u64;
    Ok((corpus, report))
}

fn validate(raw: &RawRecord, opts: &ParseOptions) -> Option<String> {
    if raw.pub_id.is_empty() {
        return Some("empty pub_id".into());
    }
    if raw.authors.is_empty() {
        return Some("author list is empty".into());
    }
    if let Some((lo, hi)) = opts.coverage {
        if raw.year < lo || raw.year > hi {
            return Some(format!("year {} outside coverage {}..={}", raw.year, lo, hi));
        }
    }
    let mut seen = Vec::with_capacity(raw.authors.len());
    for aref in &raw.authors {
        if aref.author_id.is_empty() {
            return Some("empty author_id".into());
        }
        if seen.contains(&&aref.author_id) {
            return Some(format!("author {} listed twice", aref.author_id));
        }
        seen.push(&aref.author_id);
        if let Some(label) = aref.gender.as_deref() {
            if Gender::parse(label).is_none() {
                return Some(format!("unknown gender label {label:?}"));
            }
        }
    }
    None
}

/// Merge a newly seen label into an author's slot. Labels may upgrade
/// `Undetected`; two different explicit labels are a data conflict.
fn merge_gender(slot: &mut (String, Gender), gender: Gender) -> Result<()> {
    match (slot.1, gender) {
        (_, Gender::Undetected) => Ok(()),
        (Gender::Undetected, g) => {
            slot.1 = g;
            Ok(())
        }
        (a, b) if a == b => Ok(()),
        (a, b) => Err(Error::Conflict(format!(
            "author {} labeled both {a:?} and {b:?}",
            slot.0
        ))),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenderMapReport {
    pub applied: u64,
    pub unknown_authors: u64,
}

/// Read an `author_id,gender` CSV (header optional).
pub fn load_gender_map(reader: impl Read) -> Result<Vec<(String, Gender)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "gender map row {} needs two columns",
                i + 1
            )));
        }
        let id = record[0].trim().to_string();
        let label = record[1].trim();
        if i == 0 && id == "author_id" {
            continue;
        }
        let gender = Gender::parse(label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown gender label {label:?}")))?;
        out.push((id, gender));
    }
    Ok(out)
}

impl Corpus {
    /// Apply an external gender map; entries override labels carried by
    /// the publication records. Unknown author ids are counted, not errors.
    pub fn apply_gender_map(&mut self, entries: &[(String, Gender)]) -> GenderMapReport {
        let mut report = GenderMapReport::default();
        for (id, gender) in entries {
            match self.author_index(id) {
                Some(idx) => {
                    self.authors_mut()[idx as usize].gender = *gender;
                    report.applied += 1;
                }
                None => report.unknown_authors += 1,
            }
        }
        report
    }

    pub(crate) fn authors_mut(&mut self) -> &mut [super::Author] {
        &mut self.authors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_LINES: &str = r#"{"pub_id":"p1","title":"Alpha","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A"},{"author_id":"b","name":"B","gender":"female"}]}
{"pub_id":"p2","title":"Beta","year":1991,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}
{"pub_id":"p3","title":"Gamma","year":1992,"source_id":"v2","authors":[{"author_id":"b","name":"B"}]}"#;

    #[test]
    fn three_lines_two_authors() {
        let (corpus, report) =
            parse_publications(THREE_LINES.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(corpus.publications().len(), 3);
        assert_eq!(corpus.authors().len(), 2);
        assert_eq!(report.rejected, 0);
        let b = corpus.author(corpus.author_index("b").unwrap());
        assert_eq!(b.gender, Gender::Female);
        assert_eq!(b.start_year, 1990);
    }

    #[test]
    fn missing_year_rejected() {
        let input = r#"{"pub_id":"p1","title":"Alpha","source_id":"v1","authors":[{"author_id":"a","name":"A"}]}"#;
        let (corpus, report) =
            parse_publications(input.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(report.rejected, 1);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].line, 1);
        assert_eq!(corpus.publications().len(), 0);
    }

    #[test]
    fn identical_duplicate_merged() {
        let line = r#"{"pub_id":"p1","title":"Alpha","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}"#;
        let input = format!("{line}\n{line}");
        let (corpus, report) =
            parse_publications(input.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(corpus.publications().len(), 1);
        assert_eq!(report.duplicates_merged, 1);
    }

    #[test]
    fn conflicting_duplicate_is_hard_error() {
        let input = r#"{"pub_id":"p1","title":"Alpha","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}
{"pub_id":"p1","title":"Alpha","year":1991,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}"#;
        assert!(matches!(
            parse_publications(input.as_bytes(), &ParseOptions::default()),
            Err(Error::Conflict(_))
        ));
    }

    #[test]
    fn conflicting_gender_labels_hard_error() {
        let input = r#"{"pub_id":"p1","title":"Alpha","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A","gender":"male"}]}
{"pub_id":"p2","title":"Beta","year":1991,"source_id":"v1","authors":[{"author_id":"a","name":"A","gender":"female"}]}"#;
        assert!(parse_publications(input.as_bytes(), &ParseOptions::default()).is_err());
    }

    #[test]
    fn coverage_bound_rejects_lines() {
        let opts = ParseOptions {
            coverage: Some((1970, 2000)),
            ..ParseOptions::default()
        };
        let input = r#"{"pub_id":"p1","title":"Alpha","year":1969,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}"#;
        let (corpus, report) = parse_publications(input.as_bytes(), &opts).unwrap();
        assert_eq!(report.rejected, 1);
        assert_eq!(corpus.coverage(), (1970, 2000));
    }

    #[test]
    fn preprints_skipped_when_asked() {
        let opts = ParseOptions {
            skip_preprints: true,
            ..ParseOptions::default()
        };
        let input = r#"{"pub_id":"p1","title":"Alpha","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A"}],"preprint":true}
{"pub_id":"p2","title":"Beta","year":1990,"source_id":"v1","authors":[{"author_id":"a","name":"A"}]}"#;
        let (corpus, report) = parse_publications(input.as_bytes(), &opts).unwrap();
        assert_eq!(report.preprints_skipped, 1);
        assert_eq!(corpus.publications().len(), 1);
    }

    #[test]
    fn gender_map_overrides_record_labels() {
        let (mut corpus, _) =
            parse_publications(THREE_LINES.as_bytes(), &ParseOptions::default()).unwrap();
        let map = load_gender_map("a,male\nb,undetected\nmissing,female\n".as_bytes()).unwrap();
        let report = corpus.apply_gender_map(&map);
        assert_eq!(report.applied, 2);
        assert_eq!(report.unknown_authors, 1);
        let a = corpus.author(corpus.author_index("a").unwrap());
        assert_eq!(a.gender, Gender::Male);
        let b = corpus.author(corpus.author_index("b").unwrap());
        assert_eq!(b.gender, Gender::Undetected);
    }
}
