//! View payloads: each bundles the data a chart needs with the statistics
//! computed over it, so clients never compute numbers themselves.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use metamp_core::analytics::{
    country_share, cumulative_by_year, detect_outliers, group_boxplots, resolution_trend, summary_distribution,
    BoxStats, Bucket, ClusterSpace, CumulativeSeries, OutlierConfig, OutlierReport, Share, TrendPoint,
    DEFAULT_FEATURES,
};
use metamp_core::discrepancy::{
    agreement_matrix, rank_discrepancies, AgreementCell, AgreementOptions, AuditRecord, DiscrepancyKind,
    DiscrepancyRecord,
};
use metamp_core::ml::{group_importance, shapley_explain, Importance, Prediction, ShapleySummary, FEATURE_NAMES};
use metamp_core::model::{MembraneGroup, PdbCode, ProteinEntry, SourceTag, TmAnnotation};
use metamp_core::query::{csv_columns, list_entries, Page, Query};
use metamp_core::store::StoreSnapshot;

use crate::error::ApiError;
use crate::state::{AppState, TrainingSummary};

pub const VIEWS: [&str; 8] = [
    "overview",
    "summary_statistics",
    "discrepancy",
    "outlier",
    "database",
    "exploration",
    "grouping",
    "single_entry",
];

/// Source pairs shown in the agreement matrix.
pub const AGREEMENT_PAIRS: [(SourceTag, SourceTag); 6] = [
    (SourceTag::Expert, SourceTag::ModelPrediction),
    (SourceTag::ModelPrediction, SourceTag::OPM),
    (SourceTag::ModelPrediction, SourceTag::MPstruc),
    (SourceTag::Expert, SourceTag::OPM),
    (SourceTag::Expert, SourceTag::MPstruc),
    (SourceTag::OPM, SourceTag::MPstruc),
];

pub struct Params<'a>(pub &'a [(String, String)]);

impl<'a> Params<'a> {
    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.0.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ApiError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|e: T::Err| ApiError::Validation(format!("bad value {v:?} for {key}: {e}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, ApiError> {
        Ok(self.parse::<bool>(key)?.unwrap_or(false))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payloads serialize")
}

pub fn render(view: &str, state: &AppState, snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    match view {
        "overview" => overview(snap, params),
        "summary_statistics" => summary_statistics(snap, params),
        "discrepancy" => discrepancy(snap, params),
        "outlier" => outlier(snap, &state.config.outliers, params),
        "database" => database(snap, params),
        "exploration" => exploration(snap, params),
        "grouping" => grouping(state, snap, params),
        "single_entry" => single_entry(state, snap, params),
        other => Err(ApiError::UnknownView(other.to_string())),
    }
}

#[derive(Serialize)]
struct Overview {
    store_version: u64,
    total_entries: usize,
    groups: Vec<Bucket>,
    methods: Vec<Bucket>,
    cumulative: CumulativeSeries,
    countries: Vec<Share>,
    open_discrepancies: usize,
}

fn overview(snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let facet = params.get("facet").unwrap_or("group");
    Ok(to_value(&Overview {
        store_version: snap.version,
        total_entries: snap.len(),
        groups: summary_distribution(&snap.entries, "group")?,
        methods: summary_distribution(&snap.entries, "experimental_method")?,
        cumulative: cumulative_by_year(&snap.entries, facet)?,
        countries: country_share(&snap.entries),
        open_discrepancies: snap.register.unresolved().count(),
    }))
}

#[derive(Serialize)]
struct Trend {
    method: String,
    points: Vec<TrendPoint>,
}

#[derive(Serialize)]
struct SummaryStatistics {
    attribute: String,
    buckets: Vec<Bucket>,
    trend: Trend,
}

fn summary_statistics(snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let attribute = params.get("attribute").unwrap_or("experimental_method");
    let method = params.get("method").unwrap_or("EM");
    Ok(to_value(&SummaryStatistics {
        attribute: attribute.to_string(),
        buckets: summary_distribution(&snap.entries, attribute)?,
        trend: Trend {
            method: method.to_string(),
            points: resolution_trend(&snap.entries, method),
        },
    }))
}

#[derive(Debug, Serialize)]
struct YearCount {
    year: i32,
    count: usize,
    open: usize,
}

/// One row of the triage table: an entry with at least two compared
/// sources, whether or not it was flagged.
#[derive(Debug, Serialize)]
struct TriageRow {
    pdb_code: PdbCode,
    year: i32,
    name: String,
    groups: BTreeMap<SourceTag, String>,
    tm: BTreeMap<SourceTag, TmAnnotation>,
    group_flagged: bool,
    tm_flagged: bool,
    resolved: bool,
    magnitude: f64,
}

#[derive(Serialize)]
struct DiscrepancyView {
    from: i32,
    to: i32,
    kind: String,
    series: Vec<YearCount>,
    total: usize,
    open: usize,
    records: Vec<DiscrepancyRecord>,
    rows: Vec<TriageRow>,
    agreement: Vec<AgreementCell>,
    uncomparable: usize,
    audit_records: usize,
}

fn discrepancy(snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let years = snap.entries.iter().map(|e| e.year);
    let from = params.parse::<i32>("from")?.or(years.clone().min()).unwrap_or(0);
    let to = params.parse::<i32>("to")?.or(years.max()).unwrap_or(0);
    if from > to {
        return Err(ApiError::Validation(format!("from {from} is after to {to}")));
    }
    let kind = params.get("kind").unwrap_or("group");
    let wanted: Vec<DiscrepancyKind> = match kind {
        "group" => vec![DiscrepancyKind::GroupMismatch],
        "tm" => vec![DiscrepancyKind::TmMismatch],
        "all" => vec![DiscrepancyKind::GroupMismatch, DiscrepancyKind::TmMismatch],
        other => return Err(ApiError::Validation(format!("kind must be group, tm or all, not {other:?}"))),
    };
    let in_range: Vec<DiscrepancyRecord> = snap
        .register
        .records
        .iter()
        .filter(|r| wanted.contains(&r.kind) && (from..=to).contains(&r.year))
        .cloned()
        .collect();
    let mut series: BTreeMap<i32, YearCount> =
        (from..=to).map(|year| (year, YearCount { year, count: 0, open: 0 })).collect();
    for r in &in_range {
        let y = series.get_mut(&r.year).expect("year within range");
        y.count += 1;
        y.open += usize::from(!r.resolved);
    }

    let compared: Vec<SourceTag> = {
        let mut s: Vec<SourceTag> = snap.register.config.group_pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        s.sort();
        s.dedup();
        s
    };
    let rows = snap
        .entries
        .iter()
        .filter(|e| (from..=to).contains(&e.year))
        .filter(|e| compared.iter().filter(|s| e.group(**s).is_some()).count() >= 2)
        .map(|e| {
            let recs: Vec<&DiscrepancyRecord> = snap.register.for_entry(&e.pdb_code).collect();
            let of = |k| recs.iter().filter(move |r| r.kind == k);
            TriageRow {
                pdb_code: e.pdb_code.clone(),
                year: e.year,
                name: e.name.clone(),
                groups: e.group_by_source.iter().map(|(s, g)| (*s, g.raw.clone())).collect(),
                tm: e.tm.iter().map(|a| (a.source, a.clone())).collect(),
                group_flagged: of(DiscrepancyKind::GroupMismatch).next().is_some(),
                tm_flagged: of(DiscrepancyKind::TmMismatch).next().is_some(),
                resolved: !recs.is_empty() && recs.iter().all(|r| r.resolved),
                magnitude: recs.iter().map(|r| r.magnitude).fold(0.0, f64::max),
            }
        })
        .collect();

    let options = AgreementOptions {
        exclude_concept_gaps: params.flag("exclude_concept_gaps")?,
    };
    let entries_in_range: Vec<ProteinEntry> = snap
        .entries
        .iter()
        .filter(|e| (from..=to).contains(&e.year))
        .cloned()
        .collect();
    Ok(to_value(&DiscrepancyView {
        from,
        to,
        kind: kind.to_string(),
        series: series.into_values().collect(),
        total: in_range.len(),
        open: in_range.iter().filter(|r| !r.resolved).count(),
        records: rank_discrepancies(&in_range),
        rows,
        agreement: agreement_matrix(&entries_in_range, &AGREEMENT_PAIRS, options),
        uncomparable: snap.register.uncomparable,
        audit_records: snap.audit.len(),
    }))
}

#[derive(Serialize)]
struct Boxplots {
    attribute: String,
    method: Option<String>,
    groups: BTreeMap<MembraneGroup, BoxStats>,
}

#[derive(Serialize)]
struct OutlierView {
    config: OutlierConfig,
    report: OutlierReport,
    boxplots: Boxplots,
}

fn outlier(snap: &StoreSnapshot, defaults: &OutlierConfig, params: &Params) -> Result<Value, ApiError> {
    let mut config = defaults.clone();
    if let Some(eps) = params.parse::<f64>("eps")? {
        config.eps = eps;
    }
    if let Some(m) = params.parse::<usize>("min_pts")? {
        config.min_pts = m;
    }
    if let Some(k) = params.parse::<usize>("k")? {
        config.k = k;
    }
    match params.get("space") {
        None => {}
        Some("pca") => config.space = ClusterSpace::Pca,
        Some("standardized") => config.space = ClusterSpace::Standardized,
        Some(other) => return Err(ApiError::Validation(format!("space must be pca or standardized, not {other:?}"))),
    }
    let features: Vec<String> = match params.get("features") {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect(),
    };
    let attribute = params.get("box_attribute").unwrap_or("resolution");
    let method = match params.get("box_method") {
        Some("") | Some("all") => None,
        Some(m) => Some(m),
        None => Some("EM"),
    };
    Ok(to_value(&OutlierView {
        report: detect_outliers(&snap.entries, &features, &config)?,
        config,
        boxplots: Boxplots {
            attribute: attribute.to_string(),
            method: method.map(str::to_string),
            groups: group_boxplots(&snap.entries, attribute, method),
        },
    }))
}

#[derive(Serialize)]
struct DatabaseView {
    columns: Vec<String>,
    page: Page,
}

fn database(snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let q = Query::from_params(params.0.iter().map(|(k, v)| (k.as_str(), v.as_str())), &[])?;
    let page = list_entries(&snap.entries, &q)?;
    let refs: Vec<&ProteinEntry> = page.items.iter().collect();
    Ok(to_value(&DatabaseView {
        columns: csv_columns(&refs),
        page,
    }))
}

#[derive(Serialize)]
struct Exploration {
    facet: String,
    attribute: String,
    cumulative: CumulativeSeries,
    distribution: Vec<Bucket>,
}

fn exploration(snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let facet = params.get("facet").unwrap_or("taxonomic_domain");
    let attribute = params.get("attribute").unwrap_or("resolution");
    Ok(to_value(&Exploration {
        facet: facet.to_string(),
        attribute: attribute.to_string(),
        cumulative: cumulative_by_year(&snap.entries, facet)?,
        distribution: summary_distribution(&snap.entries, attribute)?,
    }))
}

#[derive(Serialize)]
struct GroupingRow {
    pdb_code: PdbCode,
    predicted: MembraneGroup,
    confidence: f64,
    probabilities: Vec<f64>,
    sources: BTreeMap<SourceTag, MembraneGroup>,
}

#[derive(Serialize)]
struct Grouping {
    model: String,
    training_digest: String,
    training: TrainingSummary,
    importance: Vec<Importance>,
    predictions: Vec<GroupingRow>,
    shapley: Option<ShapleySummary>,
}

/// Entries with complete OPM features, classified by the served model.
fn grouping(state: &AppState, snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let served = state.model(snap)?;
    let clf = &served.classifier;
    let mut predictions = Vec::new();
    let mut vectors = Vec::new();
    for e in &snap.entries {
        let Some(f) = e.opm.as_ref() else { continue };
        let Ok(p) = clf.classify(f) else { continue };
        vectors.push(clf.encoder.encode(f)?.vector);
        predictions.push(GroupingRow {
            pdb_code: e.pdb_code.clone(),
            predicted: p.label.group,
            confidence: p.label.confidence,
            probabilities: p.probabilities,
            sources: e.group_by_source.iter().map(|(s, g)| (*s, g.group)).collect(),
        });
    }
    let columns = clf.encoder.feature_names();
    let importance = match clf.model.feature_importances() {
        Some(values) => {
            let per_column: Vec<Importance> = columns
                .iter()
                .zip(values)
                .map(|(c, v)| Importance {
                    feature: c.clone(),
                    importance: v,
                })
                .collect();
            let groups: Vec<(String, Vec<usize>)> = FEATURE_NAMES
                .iter()
                .map(|s| s.to_string())
                .zip(clf.encoder.players())
                .collect();
            group_importance(&per_column, &columns, &groups)
        }
        None => Vec::new(),
    };
    let shapley = if params.flag("shapley")? {
        let limit = params.parse::<usize>("limit")?.unwrap_or(5).min(vectors.len());
        let permutations = params
            .parse::<usize>("permutations")?
            .unwrap_or(state.config.shapley_permutations);
        let class = params.parse::<usize>("class")?;
        let names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        Some(shapley_explain(
            &clf.model,
            &vectors,
            &vectors[..limit],
            &names,
            &clf.encoder.players(),
            permutations,
            class,
            state.config.seed,
        )?)
    } else {
        None
    };
    Ok(to_value(&Grouping {
        model: clf.model.kind.slug().to_string(),
        training_digest: clf.training_digest.clone(),
        training: served.summary.clone(),
        importance,
        predictions,
        shapley,
    }))
}

#[derive(Serialize)]
struct Topology {
    topology_in: Option<String>,
    topology_out: Option<String>,
}

#[derive(Serialize)]
struct Classification {
    prediction: Option<Prediction>,
    unavailable: Option<String>,
}

#[derive(Serialize)]
struct SingleEntry {
    entry: ProteinEntry,
    tm_counts: BTreeMap<SourceTag, Option<u32>>,
    topology: Option<Topology>,
    discrepancies: Vec<DiscrepancyRecord>,
    audit: Vec<AuditRecord>,
    classification: Classification,
}

fn single_entry(state: &AppState, snap: &StoreSnapshot, params: &Params) -> Result<Value, ApiError> {
    let raw = params
        .get("pdb")
        .or_else(|| params.get("pdb_code"))
        .ok_or_else(|| ApiError::Validation("single_entry needs a pdb parameter".into()))?;
    let code = PdbCode::parse(raw)?;
    let entry = snap.get(&code).ok_or_else(|| ApiError::UnknownEntry(code.to_string()))?;
    let classification = match (entry.opm.as_ref(), state.model(snap)) {
        (None, _) => Classification {
            prediction: None,
            unavailable: Some("no OPM features".into()),
        },
        (Some(_), Err(e)) => Classification {
            prediction: None,
            unavailable: Some(e.body().message),
        },
        (Some(f), Ok(m)) => match m.classifier.classify(f) {
            Ok(p) => Classification {
                prediction: Some(p),
                unavailable: None,
            },
            Err(e) => Classification {
                prediction: None,
                unavailable: Some(e.to_string()),
            },
        },
    };
    Ok(to_value(&SingleEntry {
        tm_counts: entry.tm.iter().map(|a| (a.source, a.segment_count)).collect(),
        topology: entry.opm.as_ref().map(|f| Topology {
            topology_in: f.topology_in.clone(),
            topology_out: f.topology_out.clone(),
        }),
        discrepancies: snap.register.for_entry(&code).cloned().collect(),
        audit: snap.audit.iter().filter(|a| a.pdb_code == code).cloned().collect(),
        classification,
        entry: entry.clone(),
    }))
}
