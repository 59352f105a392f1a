//! TM-segment predictor benchmarking, rank statistics and SUS scoring.

pub mod stats;
pub mod sus;
pub mod table;
pub mod tm;

pub use stats::{average_ranks, pearson, spearman, Correlation};
pub use sus::{sus_band, sus_score, SusMode, SusScore};
pub use table::{attach_annotations, parse_annotation_table, AnnotationRow, TmCell};
pub use tm::{benchmark_pair, delta_tm, high_confidence_subset, reports_to_csv, BenchmarkReport, REPORT_CSV_HEADER};

#[cfg(test)]
mod excerpt_tests {
    use super::*;
    use crate::discrepancy::{detect_group_discrepancy, yearly_discrepancy_counts};
    use crate::model::{ProteinEntry, SourceTag};

    fn excerpt() -> Vec<ProteinEntry> {
        parse_annotation_table(include_str!("../../fixtures/discrepancy_1997_2005.csv"))
            .unwrap()
            .iter()
            .map(AnnotationRow::to_entry)
            .collect()
    }

    #[test]
    fn eleven_group_discrepancies() {
        let es = excerpt();
        let pair = [(SourceTag::OPM, SourceTag::MPstruc)];
        let flagged: Vec<_> = es.iter().filter_map(|e| detect_group_discrepancy(e, &pair)).collect();
        let codes: Vec<&str> = flagged.iter().map(|r| r.pdb_code.as_str()).collect();
        assert_eq!(
            codes,
            ["1PFO", "1B12", "1GOS", "1MT5", "1KN9", "1OJA", "1O5W", "1UUM", "1T7D", "2BXR", "1YGM"]
        );
        let per_year = yearly_discrepancy_counts(&flagged, 1997, 2005).unwrap();
        assert_eq!(per_year.iter().map(|(_, c)| c).sum::<usize>(), 11);
        assert_eq!(per_year[0], (1997, 1));
        assert_eq!(per_year[5], (2002, 3));
    }

    #[test]
    fn predictors_agree_on_sixteen() {
        let es = excerpt();
        let r = benchmark_pair(&es, SourceTag::TMbed, SourceTag::DeepTMHMM).unwrap();
        assert_eq!((r.n, r.exact_matches), (17, 16));
        let off: Vec<_> = r.deltas.iter().filter(|(_, d)| *d != 0).collect();
        assert_eq!(off.len(), 1);
        assert_eq!(off[0].0.as_str(), "1PFO");
        let hc = high_confidence_subset(&es);
        assert_eq!(hc.len(), 16);
        assert!(!hc.iter().any(|c| c.as_str() == "1PFO"));
        assert!(high_confidence_subset(&[]).is_empty());
    }

    #[test]
    fn expert_blanks_are_uncomparable() {
        let es = excerpt();
        let r = benchmark_pair(&es, SourceTag::TMbed, SourceTag::Expert).unwrap();
        // 1B12, 1MT5, 1KN9, 1T7D and 1YGM have no expert count.
        assert_eq!((r.n, r.uncomparable), (12, 5));
        let pfo = r.deltas.iter().find(|(c, _)| c.as_str() == "1PFO").unwrap();
        assert_eq!(pfo.1, 2);
        let gos = r.deltas.iter().find(|(c, _)| c.as_str() == "1GOS").unwrap();
        assert_eq!(gos.1, -1);
    }
}
