//! Filtering, sorting, pagination, free-text search and export over a list
//! of entries.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::QueryError;
use crate::model::{canonical_method, MembraneGroup, ProteinEntry, SourceTag};

pub const MAX_PAGE_SIZE: usize = 500;
pub const DEFAULT_PAGE_SIZE: usize = 50;

pub const NUMERIC_ATTRIBUTES: [&str; 8] = [
    "resolution",
    "year",
    "molecular_weight",
    "atom_count",
    "thickness",
    "tilt",
    "subunit_segments",
    "gibbs",
];

pub const TEXT_ATTRIBUTES: [&str; 12] = [
    "pdb_code",
    "name",
    "group",
    "subgroup",
    "species",
    "taxonomic_domain",
    "expressed_in",
    "experimental_method",
    "country",
    "uniprot_id",
    "topology_in",
    "topology_out",
];

fn canonical_attribute(name: &str) -> Option<&'static str> {
    let name = match name {
        "method" => "experimental_method",
        "domain" => "taxonomic_domain",
        other => other,
    };
    NUMERIC_ATTRIBUTES
        .iter()
        .chain(TEXT_ATTRIBUTES.iter())
        .find(|a| **a == name)
        .copied()
}

fn is_numeric(attribute: &str) -> bool {
    NUMERIC_ATTRIBUTES.contains(&attribute)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    /// Case-insensitive equality; numeric equality for numeric attributes.
    Equals(String),
    /// Inclusive bounds.
    Range { min: Option<f64>, max: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sort {
    pub attribute: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub text: Option<String>,
    pub filters: BTreeMap<String, Filter>,
    pub sort: Option<Sort>,
    pub page: usize,
    pub page_size: usize,
}

impl Default for Query {
    fn default() -> Self {
        Query {
            text: None,
            filters: BTreeMap::new(),
            sort: None,
            page: 0,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

fn bad(attribute: &str, message: impl Into<String>) -> QueryError {
    QueryError::BadFilter {
        attribute: attribute.to_string(),
        message: message.into(),
    }
}

fn number(attribute: &str, raw: &str) -> Result<f64, QueryError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(attribute, format!("{raw:?} is not a number")))
}

impl Query {
    /// Builds a query from URL parameters:
    /// `q`, `sort` (`attr`, `-attr` or `attr:desc`), `page`, `page_size`,
    /// `<attr>=value`, `<attr>_min=`, `<attr>_max=`. Parameters in `ignore`
    /// (e.g. `format`) are skipped.
    pub fn from_params<'a>(
        params: impl IntoIterator<Item = (&'a str, &'a str)>,
        ignore: &[&str],
    ) -> Result<Self, QueryError> {
        let mut q = Query::default();
        for (key, value) in params {
            if ignore.contains(&key) {
                continue;
            }
            match key {
                "q" => q.text = Some(value.to_string()).filter(|t| !t.trim().is_empty()),
                "page" => q.page = value.trim().parse().map_err(|_| bad("page", "must be a non-negative integer"))?,
                "page_size" => {
                    q.page_size = value
                        .trim()
                        .parse()
                        .ok()
                        .filter(|n| (1..=MAX_PAGE_SIZE).contains(n))
                        .ok_or_else(|| bad("page_size", format!("must be in 1..={MAX_PAGE_SIZE}")))?
                }
                "sort" => {
                    let (attr, direction) = if let Some(a) = value.strip_prefix('-') {
                        (a, Direction::Desc)
                    } else if let Some((a, d)) = value.split_once(':') {
                        let d = match d.to_ascii_lowercase().as_str() {
                            "asc" => Direction::Asc,
                            "desc" => Direction::Desc,
                            _ => return Err(bad("sort", format!("unknown direction {d:?}"))),
                        };
                        (a, d)
                    } else {
                        (value, Direction::Asc)
                    };
                    let attribute = canonical_attribute(attr).ok_or_else(|| bad(attr, "unknown attribute"))?;
                    q.sort = Some(Sort {
                        attribute: attribute.to_string(),
                        direction,
                    });
                }
                _ => {
                    let (attr, bound) = match (key.strip_suffix("_min"), key.strip_suffix("_max")) {
                        (Some(a), _) => (a, Some(true)),
                        (_, Some(a)) => (a, Some(false)),
                        _ => (key, None),
                    };
                    let attribute = canonical_attribute(attr).ok_or_else(|| bad(key, "unknown attribute"))?;
                    match bound {
                        None => {
                            q.filters.insert(attribute.to_string(), Filter::Equals(value.to_string()));
                        }
                        Some(is_min) => {
                            if !is_numeric(attribute) {
                                return Err(bad(key, "range bounds need a numeric attribute"));
                            }
                            let v = number(key, value)?;
                            let slot = q.filters.entry(attribute.to_string()).or_insert(Filter::Range { min: None, max: None });
                            match slot {
                                Filter::Range { min, max } => *(if is_min { min } else { max }) = Some(v),
                                Filter::Equals(_) => return Err(bad(key, "both equality and range given")),
                            }
                        }
                    }
                }
            }
        }
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(bad("page_size", format!("must be in 1..={MAX_PAGE_SIZE}")));
        }
        for (attr, f) in &self.filters {
            let a = canonical_attribute(attr).ok_or_else(|| bad(attr, "unknown attribute"))?;
            match f {
                Filter::Equals(v) if is_numeric(a) => {
                    number(attr, v)?;
                }
                Filter::Range { min, max } => {
                    if !is_numeric(a) {
                        return Err(bad(attr, "range bounds need a numeric attribute"));
                    }
                    if let (Some(lo), Some(hi)) = (min, max) {
                        if lo > hi {
                            return Err(bad(attr, format!("empty range [{lo}, {hi}]")));
                        }
                    }
                }
                Filter::Equals(_) => {}
            }
        }
        if let Some(s) = &self.sort {
            canonical_attribute(&s.attribute).ok_or_else(|| bad(&s.attribute, "unknown sort attribute"))?;
        }
        Ok(())
    }
}

fn filter_matches(e: &ProteinEntry, attribute: &str, filter: &Filter) -> bool {
    let attribute = canonical_attribute(attribute).unwrap_or(attribute);
    match filter {
        Filter::Range { min, max } => e
            .numeric(attribute)
            .is_some_and(|v| min.is_none_or(|lo| v >= lo) && max.is_none_or(|hi| v <= hi)),
        Filter::Equals(want) if is_numeric(attribute) => {
            let want: f64 = want.trim().parse().unwrap_or(f64::NAN);
            e.numeric(attribute) == Some(want)
        }
        Filter::Equals(want) => match attribute {
            "group" => match MembraneGroup::from_label(want) {
                Ok(g) => e.group(SourceTag::MPstruc) == Some(g),
                Err(_) => false,
            },
            "experimental_method" => e
                .experimental_method
                .as_deref()
                .is_some_and(|m| canonical_method(m).eq_ignore_ascii_case(&canonical_method(want))),
            _ => e
                .text(attribute)
                .is_some_and(|v| v.trim().eq_ignore_ascii_case(want.trim())),
        },
    }
}

/// Entries matching every filter and, if set, the search text.
pub fn filter_entries<'a>(entries: &'a [ProteinEntry], q: &Query) -> Vec<&'a ProteinEntry> {
    let needle = q.text.as_deref().map(|t| t.trim().to_lowercase());
    entries
        .iter()
        .filter(|e| q.filters.iter().all(|(a, f)| filter_matches(e, a, f)))
        .filter(|e| needle.as_deref().is_none_or(|n| match_priority(e, n).is_some()))
        .collect()
}

fn compare(a: &ProteinEntry, b: &ProteinEntry, sort: &Sort) -> Ordering {
    let attr = sort.attribute.as_str();
    // Missing values always sort last.
    let primary = if is_numeric(attr) {
        match (a.numeric(attr), b.numeric(attr)) {
            (Some(x), Some(y)) => {
                let o = x.total_cmp(&y);
                if sort.direction == Direction::Desc { o.reverse() } else { o }
            }
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
    } else {
        match (a.text(attr), b.text(attr)) {
            (Some(x), Some(y)) => {
                let o = x.to_lowercase().cmp(&y.to_lowercase());
                if sort.direction == Direction::Desc { o.reverse() } else { o }
            }
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
    };
    primary.then_with(|| a.pdb_code.cmp(&b.pdb_code))
}

/// Filtered and sorted, before pagination. Ties and the default order are
/// by pdb_code.
pub fn select<'a>(entries: &'a [ProteinEntry], q: &Query) -> Vec<&'a ProteinEntry> {
    let mut hits = filter_entries(entries, q);
    match &q.sort {
        Some(s) => hits.sort_by(|a, b| compare(a, b, s)),
        None => hits.sort_by(|a, b| a.pdb_code.cmp(&b.pdb_code)),
    }
    hits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub items: Vec<ProteinEntry>,
}

pub fn list_entries(entries: &[ProteinEntry], q: &Query) -> Result<Page, QueryError> {
    q.validate()?;
    let hits = select(entries, q);
    let start = q.page.saturating_mul(q.page_size).min(hits.len());
    let end = (start + q.page_size).min(hits.len());
    Ok(Page {
        total: hits.len(),
        page: q.page,
        page_size: q.page_size,
        items: hits[start..end].iter().map(|e| (*e).clone()).collect(),
    })
}

/// Fields searched, in ranking priority; the code must match exactly.
pub const SEARCH_FIELDS: [&str; 6] = ["pdb_code", "name", "species", "expressed_in", "subgroup", "disease"];

fn match_priority(e: &ProteinEntry, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    if e.pdb_code.as_str().eq_ignore_ascii_case(needle) {
        return Some(0);
    }
    SEARCH_FIELDS[1..]
        .iter()
        .position(|f| e.text(f).is_some_and(|v| v.to_lowercase().contains(needle)))
        .map(|p| p + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub pdb_code: String,
    pub name: String,
    pub species: Option<String>,
    pub matched_field: String,
}

/// Case-insensitive search ranked by matched field, then code.
pub fn search(entries: &[ProteinEntry], text: &str) -> Vec<SearchHit> {
    let needle = text.trim().to_lowercase();
    let mut hits: Vec<(usize, &ProteinEntry)> = entries
        .iter()
        .filter_map(|e| match_priority(e, &needle).map(|p| (p, e)))
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.pdb_code.cmp(&b.1.pdb_code)));
    hits.into_iter()
        .map(|(p, e)| SearchHit {
            pdb_code: e.pdb_code.to_string(),
            name: e.name.clone(),
            species: e.species.clone(),
            matched_field: SEARCH_FIELDS[p].to_string(),
        })
        .collect()
}

/// Typed columns in a fixed order, then the sorted union of extra keys.
pub fn csv_columns(entries: &[&ProteinEntry]) -> Vec<String> {
    let mut cols: Vec<String> = vec!["pdb_code".into(), "name".into()];
    cols.extend(SourceTag::ALL.iter().map(|s| format!("group_{}", s.slug())));
    cols.extend(
        [
            "subgroup",
            "species",
            "taxonomic_domain",
            "expressed_in",
            "resolution",
            "experimental_method",
            "year",
            "country",
            "molecular_weight",
            "atom_count",
            "uniprot_id",
            "thickness",
            "thickness_error",
            "tilt",
            "tilt_error",
            "subunit_segments",
            "gibbs",
            "topology_in",
            "topology_out",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.extend(SourceTag::ALL.iter().map(|s| format!("tm_{}", s.slug())));
    let extras: BTreeSet<&String> = entries.iter().flat_map(|e| e.extra.keys()).collect();
    cols.extend(extras.into_iter().filter(|k| !cols.contains(k)).cloned().collect::<Vec<_>>());
    cols
}

fn cell(e: &ProteinEntry, column: &str) -> String {
    let num = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let opm = e.opm.as_ref();
    match column {
        "resolution" => num(e.resolution),
        "molecular_weight" => num(e.molecular_weight),
        "atom_count" => e.atom_count.map(|v| v.to_string()).unwrap_or_default(),
        "thickness" => num(opm.and_then(|o| o.thickness)),
        "thickness_error" => num(opm.and_then(|o| o.thickness_error)),
        "tilt" => num(opm.and_then(|o| o.tilt)),
        "tilt_error" => num(opm.and_then(|o| o.tilt_error)),
        "subunit_segments" => opm.and_then(|o| o.subunit_segments).map(|v| v.to_string()).unwrap_or_default(),
        "gibbs" => num(opm.and_then(|o| o.gibbs)),
        c if c.starts_with("tm_") => {
            let tag: Option<SourceTag> = c[3..].parse().ok();
            e.tm.iter()
                .find(|t| Some(t.source) == tag)
                .map(|t| match (&t.raw, t.segment_count) {
                    (Some(raw), _) => raw.clone(),
                    (None, Some(n)) => n.to_string(),
                    (None, None) => String::new(),
                })
                .unwrap_or_default()
        }
        c => e.text(c).unwrap_or_default(),
    }
}

pub fn export_csv(entries: &[&ProteinEntry]) -> String {
    let cols = csv_columns(entries);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols).expect("in-memory write");
    for e in entries {
        w.write_record(cols.iter().map(|c| cell(e, c))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn export_json(entries: &[&ProteinEntry]) -> String {
    serde_json::to_string(entries).expect("entries serialize")
}

/// Parses an exported JSON array back into entries.
pub fn import_json(text: &str) -> Result<Vec<ProteinEntry>, serde_json::Error> {
    serde_json::from_str(text)
}
