//! Corpus snapshot (single JSON document) and re-export to the ingest
//! formats. Both round-trip: loading a saved snapshot reproduces the
//! corpus exactly, and re-ingesting exported files is a fixed point.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{Author, CitationEdge, Corpus, Gender, Publication};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Snapshot {
    coverage: (i32, i32),
    publications: Vec<SnapshotPublication>,
    authors: Vec<Author>,
    /// (citing pub_id index, cited pub_id index, citing year); the year is
    /// redundant and validated on load.
    citations: Vec<(u32, u32, i32)>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotPublication {
    pub_id: String,
    title: String,
    year: i32,
    source_id: String,
    /// Indices into `authors`.
    authors: Vec<u32>,
    #[serde(default)]
    preprint: bool,
}

impl Corpus {
    pub fn save_snapshot(&self, mut writer: impl Write) -> Result<()> {
        let snap = Snapshot {
            coverage: self.coverage(),
            publications: self
                .publications()
                .iter()
                .map(|p| SnapshotPublication {
                    pub_id: p.pub_id.clone(),
                    title: p.title.clone(),
                    year: p.year,
                    source_id: p.source_id.clone(),
                    authors: p.authors.clone(),
                    preprint: p.preprint,
                })
                .collect(),
            authors: self.authors().to_vec(),
            citations: self
                .citations()
                .iter()
                .map(|e| (e.citing, e.cited, self.publication(e.citing).year))
                .collect(),
        };
        serde_json::to_writer(&mut writer, &snap)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn load_snapshot(reader: impl Read) -> Result<Corpus> {
        let snap: Snapshot = serde_json::from_reader(reader)?;
        let n_authors = snap.authors.len() as u32;
        let n_pubs = snap.publications.len() as u32;
        for p in &snap.publications {
            if p.authors.is_empty() {
                return Err(Error::Conflict(format!("publication {} has no authors", p.pub_id)));
            }
            if p.authors.iter().any(|&a| a >= n_authors) {
                return Err(Error::Conflict(format!(
                    "publication {} references unknown author",
                    p.pub_id
                )));
            }
        }
        let publications: Vec<Publication> = snap
            .publications
            .into_iter()
            .map(|p| Publication {
                norm_title: super::normalize_title(&p.title),
                pub_id: p.pub_id,
                title: p.title,
                year: p.year,
                source_id: p.source_id,
                authors: p.authors,
                preprint: p.preprint,
            })
            .collect();
        let genders: Vec<(String, Gender)> = snap
            .authors
            .iter()
            .map(|a| (a.author_id.clone(), a.gender))
            .collect();
        let mut corpus = Corpus::assemble(publications, genders, Some(snap.coverage))?;

        let mut edges = Vec::with_capacity(snap.citations.len());
        for (citing, cited, year) in snap.citations {
            if citing >= n_pubs || cited >= n_pubs {
                return Err(Error::Conflict("citation references unknown publication".into()));
            }
            if citing == cited {
                return Err(Error::Conflict("self-citation in snapshot".into()));
            }
            if corpus.publication(citing).year != year {
                return Err(Error::Conflict(format!(
                    "citation year {} disagrees with citing publication {}",
                    year,
                    corpus.publication(citing).pub_id
                )));
            }
            edges.push(CitationEdge { citing, cited });
        }
        corpus.set_citations(edges);
        Ok(corpus)
    }

    /// Write publications in the line-delimited ingest format.
    pub fn export_publications_jsonl(&self, mut writer: impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct AuthorRef<'a> {
            author_id: &'a str,
            name: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            gender: Option<&'a str>,
        }
        #[derive(Serialize)]
        struct Record<'a> {
            pub_id: &'a str,
            title: &'a str,
            year: i32,
            source_id: &'a str,
            authors: Vec<AuthorRef<'a>>,
            #[serde(skip_serializing_if = "std::ops::Not::not")]
            preprint: bool,
        }
        for p in self.publications() {
            let record = Record {
                pub_id: &p.pub_id,
                title: &p.title,
                year: p.year,
                source_id: &p.source_id,
                authors: p
                    .authors
                    .iter()
                    .map(|&a| {
                        let author = self.author(a);
                        AuthorRef {
                            author_id: &author.author_id,
                            name: &author.author_id,
                            gender: match author.gender {
                                Gender::Male => Some("male"),
                                Gender::Female => Some("female"),
                                Gender::Undetected => None,
                            },
                        }
                    })
                    .collect(),
                preprint: p.preprint,
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Write citation edges as a two-column CSV of pub_id keys.
    pub fn export_citations_csv(&self, mut writer: impl Write) -> Result<()> {
        writeln!(writer, "citing,cited")?;
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        for e in self.citations() {
            w.write_record([
                &self.publication(e.citing).pub_id,
                &self.publication(e.cited).pub_id,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the `author_id,gender` map for labeled authors.
    pub fn export_genders_csv(&self, mut writer: impl Write) -> Result<()> {
        writeln!(writer, "author_id,gender")?;
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        for a in self.authors() {
            let label = match a.gender {
                Gender::Male => "male",
                Gender::Female => "female",
                Gender::Undetected => continue,
            };
            w.write_record([a.author_id.as_str(), label])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Re-ingest exported files; used by round-trip tests and the CLI.
    pub fn from_export(
        publications: impl BufRead,
        citations: impl Read,
        genders: Option<impl Read>,
        opts: &super::ParseOptions,
    ) -> Result<Corpus> {
        let (mut corpus, _) = super::parse_publications(publications, opts)?;
        if let Some(genders) = genders {
            let map = super::load_gender_map(genders)?;
            corpus.apply_gender_map(&map);
        }
        let refs = super::parse_citation_keys_csv(citations)?;
        corpus.link_citations(&refs);
        Ok(corpus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::{corpus_from, link_ids};
    use crate::corpus::ParseOptions;

    fn sample() -> Corpus {
        let mut corpus = corpus_from(&[
            ("p1", "Deep Nets", 1999, "v", &["a", "b"]),
            ("p2", "Old Nets", 1995, "w", &["b"]),
            ("p3", "Other Work", 2001, "v", &["c"]),
        ]);
        link_ids(&mut corpus, &[("p1", "p2"), ("p3", "p1")]);
        let map = vec![("a".to_string(), Gender::Female)];
        corpus.apply_gender_map(&map);
        corpus
    }

    fn assert_same(a: &Corpus, b: &Corpus) {
        assert_eq!(a.publications(), b.publications());
        assert_eq!(a.authors(), b.authors());
        assert_eq!(a.citations(), b.citations());
        assert_eq!(a.coverage(), b.coverage());
    }

    #[test]
    fn snapshot_round_trip_is_identity() {
        let corpus = sample();
        let mut buf = Vec::new();
        corpus.save_snapshot(&mut buf).unwrap();
        let loaded = Corpus::load_snapshot(buf.as_slice()).unwrap();
        assert_same(&corpus, &loaded);

        let mut buf2 = Vec::new();
        loaded.save_snapshot(&mut buf2).unwrap();
        assert_eq!(buf, buf2, "snapshot serialization is a fixed point");
    }

    #[test]
    fn export_round_trip_is_fixed_point() {
        let corpus = sample();
        let mut pubs = Vec::new();
        let mut cites = Vec::new();
        let mut genders = Vec::new();
        corpus.export_publications_jsonl(&mut pubs).unwrap();
        corpus.export_citations_csv(&mut cites).unwrap();
        corpus.export_genders_csv(&mut genders).unwrap();

        let again = Corpus::from_export(
            pubs.as_slice(),
            cites.as_slice(),
            Some(genders.as_slice()),
            &ParseOptions::default(),
        )
        .unwrap();
        assert_same(&corpus, &again);
    }

    #[test]
    fn snapshot_rejects_corrupt_edges() {
        let corpus = sample();
        let mut buf = Vec::new();
        corpus.save_snapshot(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Tamper: point an edge year at the wrong value.
        let bad = text.replace("[2,0,2001]", "[2,0,1990]");
        assert_ne!(text, bad);
        assert!(Corpus::load_snapshot(bad.as_bytes()).is_err());
    }
}
