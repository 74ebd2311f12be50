//! Citation linking by pub_id or (title, year) key.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_title, CitationEdge, Corpus};
use crate::error::{Error, Result};

/// A citation endpoint: either an explicit pub_id or a (title, year)
/// pair. Titles are normalized before lookup, so raw titles match too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CitationKey {
    Id(String),
    TitleYear(String, i32),
}

impl CitationKey {
    /// Textual key syntax: `id:<pub_id>` forces id interpretation;
    /// `<title>@<year>` is a title-year key; anything else is a pub_id.
    /// Normalized titles contain no `@` (punctuation is stripped), so the
    /// suffix rule is unambiguous for them.
    pub fn parse(cell: &str) -> CitationKey {
        if let Some(id) = cell.strip_prefix("id:") {
            return CitationKey::Id(id.to_string());
        }
        if let Some(at) = cell.rfind('@') {
            if let Ok(year) = cell[at + 1..].trim().parse::<i32>() {
                return CitationKey::TitleYear(cell[..at].to_string(), year);
            }
        }
        CitationKey::Id(cell.to_string())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LinkReport {
    /// Edges added to the corpus.
    pub matched: u64,
    /// Pairs where at least one key resolved to no publication.
    pub unmatched: u64,
    /// Pairs where a title-year key resolved to more than one publication;
    /// these are skipped, never guessed.
    pub ambiguous: u64,
    /// Pairs that resolved to an already-present edge.
    pub duplicates: u64,
    /// Pairs that resolved to a self-citation.
    pub self_loops: u64,
}

/// Read citation key pairs from a two-column CSV (`citing,cited`, header
/// optional).
pub fn parse_citation_keys_csv(reader: impl Read) -> Result<Vec<(CitationKey, CitationKey)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "citation row {} needs two columns",
                i + 1
            )));
        }
        if i == 0 && record[0].trim() == "citing" {
            continue;
        }
        out.push((
            CitationKey::parse(record[0].trim()),
            CitationKey::parse(record[1].trim()),
        ));
    }
    Ok(out)
}

impl Corpus {
    fn resolve_key(&self, key: &CitationKey) -> Resolution {
        match key {
            CitationKey::Id(id) => match self.pub_index(id) {
                Some(idx) => Resolution::One(idx),
                None => Resolution::None,
            },
            CitationKey::TitleYear(title, year) => {
                let matches = self.pubs_by_title_year(&normalize_title(title), *year);
                match matches {
                    [] => Resolution::None,
                    [idx] => Resolution::One(*idx),
                    _ => Resolution::Ambiguous,
                }
            }
        }
    }

    /// Add a citation edge for every key pair that resolves to exactly one
    /// publication on each side. Ambiguous and unresolved pairs are
    /// counted and skipped.
    pub fn link_citations(&mut self, refs: &[(CitationKey, CitationKey)]) -> LinkReport {
        let mut report = LinkReport::default();
        let mut seen: std::collections::HashSet<(u32, u32)> =
            self.citations.iter().map(|e| (e.citing, e.cited)).collect();
        for (citing_key, cited_key) in refs {
            let citing = self.resolve_key(citing_key);
            let cited = self.resolve_key(cited_key);
            match (citing, cited) {
                (Resolution::Ambiguous, _) | (_, Resolution::Ambiguous) => report.ambiguous += 1,
                (Resolution::None, _) | (_, Resolution::None) => report.unmatched += 1,
                (Resolution::One(citing), Resolution::One(cited)) => {
                    if citing == cited {
                        report.self_loops += 1;
                    } else if seen.insert((citing, cited)) {
                        self.citations.push(CitationEdge { citing, cited });
                        report.matched += 1;
                    } else {
                        report.duplicates += 1;
                    }
                }
            }
        }
        self.rebuild_citation_index();
        report
    }

    /// Insert pre-resolved edges (used by the snapshot loader after
    /// validation).
    pub(crate) fn set_citations(&mut self, edges: Vec<CitationEdge>) {
        self.citations = edges;
        self.rebuild_citation_index();
    }
}

enum Resolution {
    None,
    One(u32),
    Ambiguous,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::corpus_from;

    fn pairs(raw: &[(&str, &str)]) -> Vec<(CitationKey, CitationKey)> {
        raw.iter()
            .map(|(a, b)| (CitationKey::parse(a), CitationKey::parse(b)))
            .collect()
    }

    #[test]
    fn key_syntax() {
        assert_eq!(
            CitationKey::parse("deep nets@1999"),
            CitationKey::TitleYear("deep nets".into(), 1999)
        );
        assert_eq!(CitationKey::parse("id:x@1"), CitationKey::Id("x@1".into()));
        assert_eq!(CitationKey::parse("plain"), CitationKey::Id("plain".into()));
        assert_eq!(CitationKey::parse("x@notayear"), CitationKey::Id("x@notayear".into()));
    }

    #[test]
    fn unique_title_year_pair_links() {
        let mut corpus = corpus_from(&[
            ("p1", "Deep Nets", 1999, "v", &["a"]),
            ("p2", "Old Nets", 1995, "v", &["b"]),
        ]);
        let report = corpus.link_citations(&pairs(&[("deep nets@1999", "old nets@1995")]));
        assert_eq!(report.matched, 1);
        assert_eq!(corpus.citations().len(), 1);
        let e = corpus.citations()[0];
        assert_eq!(corpus.publication(e.citing).pub_id, "p1");
        assert_eq!(corpus.publication(e.cited).pub_id, "p2");
    }

    #[test]
    fn absent_title_is_unmatched() {
        let mut corpus = corpus_from(&[("p1", "Deep Nets", 1999, "v", &["a"])]);
        let report = corpus.link_citations(&pairs(&[("p1", "missing title@1990")]));
        assert_eq!(report.matched, 0);
        assert_eq!(report.unmatched, 1);
    }

    #[test]
    fn case_and_punctuation_differences_match() {
        let mut corpus = corpus_from(&[
            ("p1", "Deep Nets", 1999, "v", &["a"]),
            ("p2", "STATE-OF-THE-ART: Nets?", 1995, "v", &["b"]),
        ]);
        let report =
            corpus.link_citations(&pairs(&[("p1", "State of the Art   nets@1995")]));
        assert_eq!(report.matched, 1);
    }

    #[test]
    fn ambiguous_title_year_skipped() {
        let mut corpus = corpus_from(&[
            ("p1", "Same Title", 1999, "v", &["a"]),
            ("p2", "Same title!", 1999, "w", &["b"]),
            ("p3", "Other", 1995, "v", &["c"]),
        ]);
        let report = corpus.link_citations(&pairs(&[("p3", "same title@1999")]));
        assert_eq!(report.ambiguous, 1);
        assert_eq!(corpus.citations().len(), 0);
    }

    #[test]
    fn duplicate_and_self_edges_skipped() {
        let mut corpus = corpus_from(&[
            ("p1", "One", 1999, "v", &["a"]),
            ("p2", "Two", 1995, "v", &["b"]),
        ]);
        let report = corpus.link_citations(&pairs(&[("p1", "p2"), ("p1", "p2"), ("p1", "p1")]));
        assert_eq!(report.matched, 1);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.self_loops, 1);
        assert_eq!(corpus.citations().len(), 1);
    }

    #[test]
    fn citing_year_equals_citing_publication_year() {
        let mut corpus = corpus_from(&[
            ("p1", "One", 1999, "v", &["a"]),
            ("p2", "Two", 1995, "v", &["b"]),
        ]);
        corpus.link_citations(&pairs(&[("p1", "p2")]));
        for e in corpus.citations() {
            assert_eq!(corpus.publication(e.citing).year, 1999);
        }
    }
}
