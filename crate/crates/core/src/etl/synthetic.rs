//! Seeded random source snapshots for property tests: messy whitespace,
//! spelling variants, superseded codes, missing keys, duplicates, unreleased
//! and withdrawn statuses.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pipeline::SourceBundle;
use super::record::{Reject, SourceRecord};
use super::staging::RemapTable;
use crate::model::{PdbCode, ProteinEntry, Scalar, SourceTag};

const GROUPS: [&str; 4] = [
    "MONOTOPIC MEMBRANE PROTEINS",
    "TRANSMEMBRANE PROTEINS: ALPHA-HELICAL",
    "TRANSMEMBRANE PROTEINS: BETA-BARREL",
    "Bitopic proteins",
];
const EXPRESSED: [&str; 6] = ["E. Colli", "E. coli", "Escherichia Coli", " escherichia coli ", "Pichia pastoris", "Sf9 cells"];
const METHODS: [&str; 4] = ["X-RAY DIFFRACTION", "ELECTRON MICROSCOPY", "SOLUTION NMR", "cryo-EM"];
const TOPOLOGY: [&str; 3] = ["Cytoplasmic", "Periplasmic", "Extracellular"];

fn random_code(rng: &mut ChaCha8Rng) -> PdbCode {
    const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    let mut s = String::new();
    s.push(char::from(b'1' + rng.random_range(0..9u8)));
    for _ in 0..3 {
        s.push(char::from(*ALNUM.choose(rng).unwrap()));
    }
    PdbCode::parse(&s).expect("generated code is well formed")
}

/// Adds stray whitespace or a zero-width space.
fn messy(rng: &mut ChaCha8Rng, s: &str) -> String {
    match rng.random_range(0..4) {
        0 => format!("  {s} "),
        1 => s.replacen(' ', "\t ", 1),
        2 => format!("{s}\u{200b}"),
        _ => s.to_string(),
    }
}

/// A random four-source bundle of `n` MPstruc proteins.
pub fn random_bundle(seed: u64, n: usize) -> SourceBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let remap = RemapTable::published();
    let old_codes: Vec<PdbCode> = remap.pairs().map(|(o, _)| o.clone()).collect();
    let mut codes: Vec<PdbCode> = Vec::with_capacity(n);
    for _ in 0..n {
        let c = if rng.random_bool(0.1) {
            old_codes.choose(&mut rng).unwrap().clone()
        } else {
            random_code(&mut rng)
        };
        codes.push(c);
    }
    let mut bundle = SourceBundle::default();
    for (i, code) in codes.iter().enumerate() {
        let accession = format!("P{:05}", rng.random_range(0..99999));
        let missing_code = rng.random_bool(0.05);
        let expressed = *EXPRESSED.choose(&mut rng).unwrap();
        let mut m = SourceRecord::new(SourceTag::MPstruc, (!missing_code).then(|| code.clone()))
            .with("name", &messy(&mut rng, &format!("Protein number {i}")))
            .with("group", GROUPS.choose(&mut rng).unwrap())
            .with("species", &messy(&mut rng, "Homo sapiens"))
            .with("taxonomic_domain", ["Eukaryota", "bacteria", "Archaea ", ""].choose(&mut rng).unwrap())
            .with("expressed_in", &messy(&mut rng, expressed))
            .with("resolution", &format!("{:.2}", rng.random_range(1.0..6.0)));
        if rng.random_bool(0.7) {
            m.uniprot_id = Some(accession.clone());
        }
        if rng.random_bool(0.05) {
            // Duplicate listing of the same protein.
            bundle.mpstruc.records.push(m.clone());
        }
        bundle.mpstruc.records.push(m);

        if rng.random_bool(0.9) {
            let mut p = SourceRecord::new(SourceTag::PDB, Some(code.clone()))
                .with("year", &rng.random_range(1990..2024).to_string())
                .with("experimental_method", METHODS.choose(&mut rng).unwrap())
                .with("molecular_weight", &format!("{:.1}", rng.random_range(10.0..500.0)))
                .with("exptl_crystal_density_matthews", &format!("{:.2}", rng.random_range(1.8..4.0)));
            if rng.random_bool(0.5) {
                p = p.with("exptl_crystal_grow", "VAPOR DIFFUSION; pH 7.5; 291K; PEG 400");
            }
            if rng.random_bool(0.08) {
                p = p.with("status", ["UNDER REVIEW OR EMBARGOED", "WDRN"].choose(&mut rng).unwrap());
            }
            bundle.pdb.records.push(p);
        }
        if rng.random_bool(0.7) {
            let mut o = SourceRecord::new(SourceTag::OPM, Some(code.clone()))
                .with("thickness", &format!("{:.1}", rng.random_range(20.0..40.0)))
                .with("tilt", &format!("{:.0}", rng.random_range(0.0..60.0)))
                .with("subunit_segments", &rng.random_range(0..14).to_string())
                .with("topology_in", TOPOLOGY.choose(&mut rng).unwrap());
            if rng.random_bool(0.8) {
                o = o.with("topology_out", TOPOLOGY.choose(&mut rng).unwrap());
            }
            bundle.opm.records.push(o);
        }
        if rng.random_bool(0.6) {
            let mut u = SourceRecord::new(SourceTag::UniProt, None)
                .with("sequence_length", &rng.random_range(50..2000).to_string());
            u.uniprot_id = Some(accession);
            bundle.uniprot.records.push(u);
        }
    }
    // PDB-only and OPM-only structures outside the master list.
    for _ in 0..n / 5 {
        bundle.pdb.records.push(SourceRecord::new(SourceTag::PDB, Some(random_code(&mut rng))).with("year", "2001"));
        bundle.opm.records.push(SourceRecord::new(SourceTag::OPM, Some(random_code(&mut rng))).with("tilt", "3"));
    }
    // Records dropped at extraction, as a parser would report them.
    if rng.random_bool(0.3) {
        bundle.mpstruc.rejects.push(Reject {
            source: SourceTag::MPstruc,
            key: None,
            reason: "missing_pdb_code".into(),
            context: Some("protein element without pdbCode".into()),
        });
    }
    bundle
}

/// A perturbed copy of `current`: some entries dropped, some edited (typed
/// fields and extra columns), some new ones added.
pub fn perturb(current: &[ProteinEntry], seed: u64) -> Vec<ProteinEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for e in current {
        if rng.random_bool(0.1) {
            continue;
        }
        let mut e = e.clone();
        if rng.random_bool(0.2) {
            e.resolution = Some(rng.random_range(1.0..5.0));
        }
        if rng.random_bool(0.1) {
            e.name = format!("{} (revised)", e.name);
        }
        if rng.random_bool(0.1) {
            e.species = None;
        }
        if rng.random_bool(0.15) {
            e.extra.insert("refine_ls_r_factor".into(), Scalar::Float(rng.random_range(0.1..0.3)));
        }
        if rng.random_bool(0.1) {
            let key = e.extra.keys().next().cloned();
            if let Some(k) = key {
                e.extra.remove(&k);
            }
        }
        out.push(e);
    }
    for i in 0..rng.random_range(0..4) {
        let code = random_code(&mut rng);
        if out.iter().all(|e| e.pdb_code != code) {
            out.push(ProteinEntry::new(code, format!("new structure {i}"), 2024));
        }
    }
    out
}
