mod common;

use proptest::prelude::*;
use vmad::model::*;
use vmad::synth::{generate_scenario, ScenarioConfig};

use common::brute_pairs;

/// A random valid dataset: subjects, documents and sequences with frames.
fn dataset() -> impl Strategy<Value = Dataset> {
    (2usize..7)
        .prop_flat_map(|ns| {
            let docs = prop::collection::vec((0..3u8, 0..ns, 1..ns), 1..12);
            let seqs = prop::collection::vec((0..ns, 1usize..4), 1..10);
            (Just(ns), docs, seqs)
        })
        .prop_map(|(ns, docs, seqs)| {
            let subject = |i: usize| format!("s{i}");
            let documents = docs
                .into_iter()
                .enumerate()
                .map(|(i, (kind, a, off))| {
                    let id = format!("d{i:02}");
                    let b = (a + off) % ns;
                    match kind {
                        0 => DocumentRecord::bona_fide(id, subject(a)),
                        1 => DocumentRecord::morphed(id, subject(a), subject(b)),
                        _ => DocumentRecord {
                            id,
                            label: None,
                            subject_a: subject(a),
                            subject_b: Some(subject(b)),
                        },
                    }
                })
                .collect();
            let sequences = seqs
                .into_iter()
                .enumerate()
                .map(|(i, (s, nf))| SequenceRecord {
                    id: format!("q{i:02}"),
                    subject: subject(s),
                    frames: (0..nf).map(|f| FrameRecord::new(format!("f{f}"))).collect(),
                })
                .collect();
            Dataset {
                subjects: (0..ns).map(subject).collect(),
                documents,
                sequences,
                ..Default::default()
            }
            .with_pairing()
        })
}

proptest! {
    #[test]
    fn pairing_matches_brute_force(ds in dataset()) {
        let mut expected = brute_pairs(&ds);
        expected.sort_by(|a, b| (&a.document, &a.sequence).cmp(&(&b.document, &b.sequence)));
        prop_assert_eq!(pair_attempts(&ds), expected);
        prop_assert!(validate_dataset(&ds).is_clean());
    }

    #[test]
    fn pairing_is_order_independent(ds in dataset(), rot in 0usize..12) {
        let mut shuffled = ds.clone();
        let (nd, nq) = (shuffled.documents.len(), shuffled.sequences.len());
        shuffled.documents.rotate_left(rot % nd);
        shuffled.documents.reverse();
        shuffled.sequences.rotate_left(rot % nq);
        prop_assert_eq!(pair_attempts(&shuffled), ds.attempts);
    }

    #[test]
    fn manifest_roundtrip(ds in dataset()) {
        let text = write_manifest(&ds);
        let parsed = parse_manifest(&text).unwrap();
        prop_assert_eq!(&parsed.attempts, &ds.attempts);
        prop_assert_eq!(write_manifest(&parsed), text);
    }

    #[test]
    fn score_table_roundtrip(seed in 0u64..1000) {
        let cfg = ScenarioConfig {
            n_subjects: 4,
            n_bonafide_docs: 3,
            n_morph_docs: 3,
            frames_per_sequence: (1, 4),
            seed,
            ..Default::default()
        };
        let ds = generate_scenario(&cfg).unwrap();
        let scores = write_score_table(&ds);
        let bare = parse_manifest(&write_manifest(&ds)).unwrap();
        let back = attach_scores(bare, &parse_score_table(&scores).unwrap()).unwrap();
        prop_assert_eq!(write_score_table(&back), scores);
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn unknown_frame_in_score_table() {
    let ds = generate_scenario(&ScenarioConfig::default()).unwrap();
    let bare = parse_manifest(&write_manifest(&ds)).unwrap();
    let rows = parse_score_table("sequence_id,frame_id,track_name,value\nQS001_1,f999,q:x,0.5\n").unwrap();
    assert!(matches!(
        attach_scores(bare, &rows),
        Err(vmad::Error::UnknownFrame { .. })
    ));
}
