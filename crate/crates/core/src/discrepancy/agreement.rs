use serde::{Deserialize, Serialize};

use super::detect::canonical_group;
use crate::model::{MembraneGroup, ProteinEntry, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub source_a: SourceTag,
    pub source_b: SourceTag,
    pub matches: usize,
    pub total: usize,
    pub percent: f64,
}

/// Sources whose label vocabulary has no "not a membrane protein" class.
fn lacks_non_membrane_concept(s: SourceTag) -> bool {
    matches!(s, SourceTag::MPstruc | SourceTag::OPM | SourceTag::ModelPrediction)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementOptions {
    /// Drop entries where one side says "not a membrane protein" and the
    /// other side's vocabulary cannot express that.
    pub exclude_concept_gaps: bool,
}

/// Canonical-group agreement for each pair, over entries annotated by both.
pub fn agreement_matrix(
    entries: &[ProteinEntry],
    pairs: &[(SourceTag, SourceTag)],
    options: AgreementOptions,
) -> Vec<AgreementCell> {
    pairs
        .iter()
        .map(|&(a, b)| {
            let mut matches = 0;
            let mut total = 0;
            for e in entries {
                let (Some(ga), Some(gb)) = (e.group(a), e.group(b)) else {
                    continue;
                };
                let (ga, gb) = (canonical_group(ga), canonical_group(gb));
                if options.exclude_concept_gaps {
                    let gap = (ga == MembraneGroup::NotAMembraneProtein && lacks_non_membrane_concept(b))
                        || (gb == MembraneGroup::NotAMembraneProtein && lacks_non_membrane_concept(a));
                    if gap {
                        continue;
                    }
                }
                total += 1;
                matches += usize::from(ga == gb);
            }
            AgreementCell {
                source_a: a,
                source_b: b,
                matches,
                total,
                percent: if total == 0 { 0.0 } else { 100.0 * matches as f64 / total as f64 },
            }
        })
        .collect()
}
