//! Shared domain vocabulary: PDB codes, membrane groups, source tags, OPM
//! features and the merged [`ProteinEntry`] record.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// First year a membrane protein structure was resolved.
pub const FIRST_STRUCTURE_YEAR: i32 = 1985;

/// A 4-character PDB accession, stored uppercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PdbCode(String);

impl PdbCode {
    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        let trimmed = raw.trim();
        let chars: Vec<char> = trimmed.chars().collect();
        if chars.len() != 4 {
            return Err(ModelError::MalformedCode(raw.to_string()));
        }
        if !chars[0].is_ascii_digit() || !chars.iter().all(|c| c.is_ascii_alphanumeric()) {
            return Err(ModelError::MalformedCode(raw.to_string()));
        }
        Ok(PdbCode(trimmed.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PdbCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for PdbCode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PdbCode::parse(s)
    }
}

impl TryFrom<String> for PdbCode {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        PdbCode::parse(&value)
    }
}

impl From<PdbCode> for String {
    fn from(code: PdbCode) -> Self {
        code.0
    }
}

/// Structural group of a membrane protein.
///
/// `Bitopic` and `NotAMembraneProtein` only occur as raw source or expert
/// labels; the classifier target space is [`MembraneGroup::TARGETS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MembraneGroup {
    Monotopic,
    TransmembraneAlphaHelical,
    TransmembraneBetaBarrel,
    Bitopic,
    NotAMembraneProtein,
}

impl MembraneGroup {
    pub const TARGETS: [MembraneGroup; 3] = [
        MembraneGroup::Monotopic,
        MembraneGroup::TransmembraneAlphaHelical,
        MembraneGroup::TransmembraneBetaBarrel,
    ];

    /// Parses the label spellings used by MPstruc, OPM and curators, e.g.
    /// "Transmembrane proteins:beta-barrel", "MONOTOPIC MEMBRANE PROTEINS",
    /// "Bitopic proteins" or the variant name itself.
    pub fn from_label(raw: &str) -> Result<Self, ModelError> {
        let folded: String = raw
            .to_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let group = match folded.as_str() {
            "monotopic" | "monotopicmembraneproteins" | "monotopicmembraneprotein"
            | "monotopicproteins" => MembraneGroup::Monotopic,
            "transmembraneproteinsalphahelical"
            | "transmembranealphahelical"
            | "transmembranealphahelicalproteins"
            | "alphahelical"
            | "transmembraneproteinalphahelical" => MembraneGroup::TransmembraneAlphaHelical,
            "transmembraneproteinsbetabarrel"
            | "transmembranebetabarrel"
            | "transmembranebetabarrelproteins"
            | "betabarrel"
            | "transmembraneproteinbetabarrel" => MembraneGroup::TransmembraneBetaBarrel,
            "bitopic" | "bitopicproteins" | "bitopicprotein" => MembraneGroup::Bitopic,
            "notamembraneprotein" | "notamp" | "nonmembrane" => MembraneGroup::NotAMembraneProtein,
            _ => return Err(ModelError::UnknownGroup(raw.to_string())),
        };
        Ok(group)
    }

    /// The MPstruc-style display label.
    pub fn label(self) -> &'static str {
        match self {
            MembraneGroup::Monotopic => "Monotopic membrane proteins",
            MembraneGroup::TransmembraneAlphaHelical => "Transmembrane proteins:alpha-helical",
            MembraneGroup::TransmembraneBetaBarrel => "Transmembrane proteins:beta-barrel",
            MembraneGroup::Bitopic => "Bitopic proteins",
            MembraneGroup::NotAMembraneProtein => "Not a Membrane Protein",
        }
    }

    pub fn is_target(self) -> bool {
        Self::TARGETS.contains(&self)
    }

    /// Index into [`MembraneGroup::TARGETS`], if this is a target class.
    pub fn target_index(self) -> Option<usize> {
        Self::TARGETS.iter().position(|g| *g == self)
    }
}

impl fmt::Display for MembraneGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Provenance of an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    MPstruc,
    PDB,
    OPM,
    UniProt,
    Expert,
    TMbed,
    DeepTMHMM,
    ModelPrediction,
}

impl SourceTag {
    pub const ALL: [SourceTag; 8] = [
        SourceTag::MPstruc,
        SourceTag::PDB,
        SourceTag::OPM,
        SourceTag::UniProt,
        SourceTag::Expert,
        SourceTag::TMbed,
        SourceTag::DeepTMHMM,
        SourceTag::ModelPrediction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceTag::MPstruc => "MPstruc",
            SourceTag::PDB => "PDB",
            SourceTag::OPM => "OPM",
            SourceTag::UniProt => "UniProt",
            SourceTag::Expert => "Expert",
            SourceTag::TMbed => "TMbed",
            SourceTag::DeepTMHMM => "DeepTMHMM",
            SourceTag::ModelPrediction => "ModelPrediction",
        }
    }

    /// Lowercase column-safe slug (`group_<slug>`, `tm_<slug>`).
    pub fn slug(self) -> &'static str {
        match self {
            SourceTag::MPstruc => "mpstruc",
            SourceTag::PDB => "pdb",
            SourceTag::OPM => "opm",
            SourceTag::UniProt => "uniprot",
            SourceTag::Expert => "expert",
            SourceTag::TMbed => "tmbed",
            SourceTag::DeepTMHMM => "deeptmhmm",
            SourceTag::ModelPrediction => "predicted",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceTag {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .to_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        match folded.as_str() {
            "mpstruc" => Ok(SourceTag::MPstruc),
            "pdb" => Ok(SourceTag::PDB),
            "opm" => Ok(SourceTag::OPM),
            "uniprot" => Ok(SourceTag::UniProt),
            "expert" => Ok(SourceTag::Expert),
            "tmbed" => Ok(SourceTag::TMbed),
            "deeptmhmm" => Ok(SourceTag::DeepTMHMM),
            "modelprediction" | "predicted" | "prediction" | "model" => {
                Ok(SourceTag::ModelPrediction)
            }
            _ => Err(ModelError::UnknownSource(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaxonomicDomain {
    Archaea,
    Bacteria,
    Eukaryota,
    Unclassified,
    Viruses,
}

impl TaxonomicDomain {
    pub const ALL: [TaxonomicDomain; 5] = [
        TaxonomicDomain::Archaea,
        TaxonomicDomain::Bacteria,
        TaxonomicDomain::Eukaryota,
        TaxonomicDomain::Unclassified,
        TaxonomicDomain::Viruses,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaxonomicDomain::Archaea => "Archaea",
            TaxonomicDomain::Bacteria => "Bacteria",
            TaxonomicDomain::Eukaryota => "Eukaryota",
            TaxonomicDomain::Unclassified => "Unclassified",
            TaxonomicDomain::Viruses => "Viruses",
        }
    }
}

impl fmt::Display for TaxonomicDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps case and spacing variants onto the closed domain set. Anything
/// unrecognized is `Unclassified`.
pub fn canonical_taxon(raw: &str) -> TaxonomicDomain {
    let folded: String = raw
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .collect();
    match folded.as_str() {
        "archaea" | "archaeon" | "archaebacteria" => TaxonomicDomain::Archaea,
        "bacteria" | "bacterium" | "eubacteria" => TaxonomicDomain::Bacteria,
        "eukaryota" | "eukaryotes" | "eukaryote" | "eukarya" => TaxonomicDomain::Eukaryota,
        "viruses" | "virus" | "viral" => TaxonomicDomain::Viruses,
        _ => TaxonomicDomain::Unclassified,
    }
}

/// Canonical experimental method name ("EM", "X-ray", "NMR"); other values
/// are returned trimmed.
pub fn canonical_method(raw: &str) -> String {
    let folded: String = raw
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect();
    match folded.as_str() {
        "em" | "cryoem" | "electronmicroscopy" | "cryoelectronmicroscopy" | "electroncrystallography"
        | "cryoet" => "EM".to_string(),
        "xray" | "xraydiffraction" | "xraycrystallography" => "X-ray".to_string(),
        "nmr" | "solutionnmr" | "solidstatenmr" => "NMR".to_string(),
        _ => raw.trim().to_string(),
    }
}

/// A raw source label kept verbatim next to its parsed group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLabel {
    pub raw: String,
    pub group: MembraneGroup,
}

impl GroupLabel {
    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        Ok(GroupLabel {
            raw: raw.trim().to_string(),
            group: MembraneGroup::from_label(raw)?,
        })
    }

    pub fn of(group: MembraneGroup) -> Self {
        GroupLabel {
            raw: group.label().to_string(),
            group,
        }
    }
}

/// OPM membrane-embedding parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OpmFeatures {
    pub thickness: Option<f64>,
    pub thickness_error: Option<f64>,
    pub tilt: Option<f64>,
    pub tilt_error: Option<f64>,
    pub subunit_segments: Option<u32>,
    pub gibbs: Option<f64>,
    pub topology_in: Option<String>,
    pub topology_out: Option<String>,
}

impl OpmFeatures {
    /// Names of the five ML fields that are absent.
    pub fn missing_ml_fields(&self) -> Vec<&'static str> {
        let mut missing = Vec::new();
        if self.thickness.is_none() {
            missing.push("thickness");
        }
        if self.tilt.is_none() {
            missing.push("tilt");
        }
        if self.subunit_segments.is_none() {
            missing.push("subunit_segments");
        }
        if self.topology_in.is_none() {
            missing.push("topology_in");
        }
        if self.topology_out.is_none() {
            missing.push("topology_out");
        }
        missing
    }

    /// Out-of-range values that send an entry to outlier review.
    pub fn range_violations(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(t) = self.tilt {
            if !(0.0..=90.0).contains(&t) {
                out.push(("tilt", t));
            }
        }
        if let Some(t) = self.thickness {
            if !(t > 0.0 && t < 100.0) {
                out.push(("thickness", t));
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_ml_fields().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmAnnotation {
    pub source: SourceTag,
    /// Absent means the source did not annotate this entry.
    pub segment_count: Option<u32>,
    /// Original cell text when it carried more than the count (e.g. "0**").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

/// Typed scalar for merged columns without a dedicated field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    /// Infers the narrowest scalar type for a raw text value.
    pub fn infer(raw: &str) -> Scalar {
        let t = raw.trim();
        if let Ok(i) = t.parse::<i64>() {
            return Scalar::Int(i);
        }
        if let Ok(f) = t.parse::<f64>() {
            if f.is_finite() {
                return Scalar::Float(f);
            }
        }
        match t.to_ascii_lowercase().as_str() {
            "true" => Scalar::Bool(true),
            "false" => Scalar::Bool(false),
            _ => Scalar::Text(t.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            Scalar::Text(s) => s.trim().parse().ok(),
            Scalar::Bool(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Text(s) => f.write_str(s),
        }
    }
}

/// The merged, canonical record for one PDB structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProteinEntry {
    pub pdb_code: PdbCode,
    pub name: String,
    #[serde(default)]
    pub group_by_source: BTreeMap<SourceTag, GroupLabel>,
    #[serde(default)]
    pub subgroup: Option<String>,
    #[serde(default)]
    pub species: Option<String>,
    pub taxonomic_domain: TaxonomicDomain,
    #[serde(default)]
    pub expressed_in: Option<String>,
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(default)]
    pub experimental_method: Option<String>,
    pub year: i32,
    #[serde(default)]
    pub country: Option<String>,
    #[serde(default)]
    pub molecular_weight: Option<f64>,
    #[serde(default)]
    pub atom_count: Option<u64>,
    #[serde(default)]
    pub uniprot_id: Option<String>,
    #[serde(default)]
    pub opm: Option<OpmFeatures>,
    #[serde(default)]
    pub tm: Vec<TmAnnotation>,
    #[serde(default)]
    pub extra: BTreeMap<String, Scalar>,
}

impl ProteinEntry {
    /// A minimal entry; every optional attribute absent.
    pub fn new(pdb_code: PdbCode, name: impl Into<String>, year: i32) -> Self {
        ProteinEntry {
            pdb_code,
            name: name.into(),
            group_by_source: BTreeMap::new(),
            subgroup: None,
            species: None,
            taxonomic_domain: TaxonomicDomain::Unclassified,
            expressed_in: None,
            resolution: None,
            experimental_method: None,
            year,
            country: None,
            molecular_weight: None,
            atom_count: None,
            uniprot_id: None,
            opm: None,
            tm: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn group(&self, source: SourceTag) -> Option<MembraneGroup> {
        self.group_by_source.get(&source).map(|g| g.group)
    }

    pub fn tm_count(&self, source: SourceTag) -> Option<u32> {
        self.tm
            .iter()
            .find(|a| a.source == source)
            .and_then(|a| a.segment_count)
    }

    /// Sets (or replaces) the annotation for `source`, keeping one per source.
    pub fn set_tm(&mut self, source: SourceTag, segment_count: Option<u32>, raw: Option<String>) {
        self.tm.retain(|a| a.source != source);
        self.tm.push(TmAnnotation {
            source,
            segment_count,
            raw,
        });
        self.tm.sort_by_key(|a| a.source);
    }

    /// True when all five OPM ML features are present and in range, and the
    /// expert has not marked the entry as a non-membrane protein.
    pub fn is_ml_eligible(&self) -> bool {
        if self.group(SourceTag::Expert) == Some(MembraneGroup::NotAMembraneProtein) {
            return false;
        }
        match &self.opm {
            Some(opm) => opm.is_complete() && opm.range_violations().is_empty(),
            None => false,
        }
    }

    /// Checks the structural invariants of an entry.
    pub fn validate(&self) -> Result<(), ModelError> {
        let current_year = chrono::Utc::now().year();
        if self.year < FIRST_STRUCTURE_YEAR || self.year > current_year {
            return Err(ModelError::InvalidYear(self.year));
        }
        if self.name.trim().is_empty() {
            return Err(ModelError::Invalid(format!("{}: empty name", self.pdb_code)));
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0) || !r.is_finite() {
                return Err(ModelError::Invalid(format!(
                    "{}: resolution must be positive, got {r}",
                    self.pdb_code
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.tm {
            if !seen.insert(a.source) {
                return Err(ModelError::Invalid(format!(
                    "{}: duplicate TM annotation for {}",
                    self.pdb_code, a.source
                )));
            }
        }
        Ok(())
    }

    /// Numeric view of an attribute by name: typed fields, OPM features,
    /// then numeric `extra` columns.
    pub fn numeric(&self, attribute: &str) -> Option<f64> {
        match attribute {
            "resolution" => self.resolution,
            "year" => Some(self.year as f64),
            "molecular_weight" => self.molecular_weight,
            "atom_count" => self.atom_count.map(|a| a as f64),
            "thickness" => self.opm.as_ref().and_then(|o| o.thickness),
            "tilt" => self.opm.as_ref().and_then(|o| o.tilt),
            "subunit_segments" => self
                .opm
                .as_ref()
                .and_then(|o| o.subunit_segments)
                .map(f64::from),
            "gibbs" => self.opm.as_ref().and_then(|o| o.gibbs),
            other => self.extra.get(other).and_then(Scalar::as_f64),
        }
    }

    /// Text view of a nominal attribute by name.
    pub fn text(&self, attribute: &str) -> Option<String> {
        match attribute {
            "pdb_code" => Some(self.pdb_code.to_string()),
            "name" => Some(self.name.clone()),
            "group" => self
                .group_by_source
                .get(&SourceTag::MPstruc)
                .map(|g| g.group.label().to_string()),
            "subgroup" => self.subgroup.clone(),
            "species" => self.species.clone(),
            "taxonomic_domain" => Some(self.taxonomic_domain.name().to_string()),
            "expressed_in" => self.expressed_in.clone(),
            "experimental_method" => self.experimental_method.clone(),
            "country" => self.country.clone(),
            "uniprot_id" => self.uniprot_id.clone(),
            "year" => Some(self.year.to_string()),
            "topology_in" => self.opm.as_ref().and_then(|o| o.topology_in.clone()),
            "topology_out" => self.opm.as_ref().and_then(|o| o.topology_out.clone()),
            other => {
                if let Some(src) = other.strip_prefix("group_") {
                    let tag: SourceTag = src.parse().ok()?;
                    return self.group_by_source.get(&tag).map(|g| g.raw.clone());
                }
                self.extra.get(other).map(|s| s.to_string())
            }
        }
    }
}

/// A classifier output over the three target groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub group: MembraneGroup,
    pub confidence: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdb_code_normalizes_case() {
        assert_eq!(PdbCode::parse("5w7l").unwrap().as_str(), "5W7L");
        assert_eq!(PdbCode::parse("6ZG5").unwrap().as_str(), "6ZG5");
    }

    #[test]
    fn pdb_code_rejects_bad_shapes() {
        assert!(matches!(PdbCode::parse("XY"), Err(ModelError::MalformedCode(_))));
        assert!(PdbCode::parse("ABCD").is_err());
        assert!(PdbCode::parse("1AB-").is_err());
        assert!(PdbCode::parse("").is_err());
    }

    #[test]
    fn pdb_code_compares_case_insensitively() {
        assert_eq!(PdbCode::parse("1pfo").unwrap(), PdbCode::parse("1PFO").unwrap());
        let code: PdbCode = serde_json::from_str("\"1afo\"").unwrap();
        assert_eq!(code.as_str(), "1AFO");
        assert!(serde_json::from_str::<PdbCode>("\"AF\"").is_err());
    }

    #[test]
    fn taxon_variants() {
        assert_eq!(canonical_taxon("bacteria"), TaxonomicDomain::Bacteria);
        assert_eq!(canonical_taxon(""), TaxonomicDomain::Unclassified);
        assert_eq!(canonical_taxon("Viruses "), TaxonomicDomain::Viruses);
        assert_eq!(canonical_taxon("EUKARYOTA"), TaxonomicDomain::Eukaryota);
        assert_eq!(canonical_taxon("something else"), TaxonomicDomain::Unclassified);
    }

    #[test]
    fn group_labels_from_sources() {
        use MembraneGroup::*;
        assert_eq!(MembraneGroup::from_label("Monotopic membrane proteins").unwrap(), Monotopic);
        assert_eq!(
            MembraneGroup::from_label("Transmembrane proteins:beta-barrel").unwrap(),
            TransmembraneBetaBarrel
        );
        assert_eq!(
            MembraneGroup::from_label("TRANSMEMBRANE PROTEINS:ALPHA-HELICAL").unwrap(),
            TransmembraneAlphaHelical
        );
        assert_eq!(MembraneGroup::from_label("Bitopic proteins").unwrap(), Bitopic);
        assert_eq!(MembraneGroup::from_label("Bitopic").unwrap(), Bitopic);
        assert_eq!(
            MembraneGroup::from_label(" Not a Membrane Protein").unwrap(),
            NotAMembraneProtein
        );
        assert!(MembraneGroup::from_label("soluble-ish").is_err());
    }

    #[test]
    fn source_tag_parses_slugs_and_names() {
        for tag in SourceTag::ALL {
            assert_eq!(tag.slug().parse::<SourceTag>().unwrap(), tag);
            assert_eq!(tag.name().parse::<SourceTag>().unwrap(), tag);
        }
    }

    #[test]
    fn method_aliases() {
        assert_eq!(canonical_method("cryo-EM"), "EM");
        assert_eq!(canonical_method("ELECTRON MICROSCOPY"), "EM");
        assert_eq!(canonical_method("X-RAY DIFFRACTION"), "X-ray");
        assert_eq!(canonical_method("Solution NMR"), "NMR");
    }

    #[test]
    fn expert_non_membrane_is_never_ml_eligible() {
        let mut e = ProteinEntry::new(PdbCode::parse("1YGM").unwrap(), "Mistic", 2005);
        e.opm = Some(OpmFeatures {
            thickness: Some(30.0),
            tilt: Some(10.0),
            subunit_segments: Some(4),
            topology_in: Some("in".into()),
            topology_out: Some("out".into()),
            ..Default::default()
        });
        assert!(e.is_ml_eligible());
        e.group_by_source
            .insert(SourceTag::Expert, GroupLabel::of(MembraneGroup::NotAMembraneProtein));
        assert!(!e.is_ml_eligible());
    }

    #[test]
    fn out_of_range_tilt_blocks_eligibility() {
        let mut e = ProteinEntry::new(PdbCode::parse("1ABC").unwrap(), "x", 2000);
        e.opm = Some(OpmFeatures {
            thickness: Some(30.0),
            tilt: Some(95.0),
            subunit_segments: Some(1),
            topology_in: Some("in".into()),
            topology_out: Some("out".into()),
            ..Default::default()
        });
        assert!(!e.is_ml_eligible());
        assert_eq!(e.opm.as_ref().unwrap().range_violations(), vec![("tilt", 95.0)]);
    }

    #[test]
    fn scalar_inference() {
        assert_eq!(Scalar::infer("42"), Scalar::Int(42));
        assert_eq!(Scalar::infer("3.5"), Scalar::Float(3.5));
        assert_eq!(Scalar::infer("TRUE"), Scalar::Bool(true));
        assert_eq!(Scalar::infer(" P 21 21 21 "), Scalar::Text("P 21 21 21".into()));
    }

    #[test]
    fn year_bounds() {
        let e = ProteinEntry::new(PdbCode::parse("1ABC").unwrap(), "x", 1984);
        assert!(matches!(e.validate(), Err(ModelError::InvalidYear(1984))));
        let e = ProteinEntry::new(PdbCode::parse("1ABC").unwrap(), "x", 1985);
        assert!(e.validate().is_ok());
    }
}
