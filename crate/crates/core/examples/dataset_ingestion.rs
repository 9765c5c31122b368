//! Parse a manifest and a score table, pair attempts and read score tracks.

use vmad::model::*;

const MANIFEST: &str = "vmad-manifest 1
[subjects]
subject_id
alice
bob
[documents]
document_id,label,subject_a,subject_b
doc-a,bonafide,alice,
doc-ab,morph,alice,bob
[sequences]
sequence_id,subject_id
gate-a,alice
gate-b,bob
[frames]
sequence_id,frame_id,image_path,image_width,image_height,box_x,box_y,box_w,box_h
gate-a,1,,,,,,,
gate-a,2,,,,,,,
gate-b,1,,,,,,,
[flip]
track_name
mad:legacy
";

const SCORES: &str = "document_id,sequence_id,frame_id,track_name,value
doc-a,gate-a,1,mad:dfr,0.21
doc-a,gate-a,2,mad:dfr,0.34
doc-ab,gate-a,1,mad:dfr,0.77
doc-ab,gate-a,2,mad:dfr,0.69
doc-ab,gate-b,1,mad:dfr,0.81
,gate-a,1,q:magface,27.5
,gate-a,2,q:magface,19.0
,gate-b,1,q:magface,31.2
,gate-a,1,mad:legacy,0.9
,gate-a,2,mad:legacy,0.8
,gate-b,1,mad:legacy,0.3
";

fn main() -> vmad::Result<()> {
    let ds = parse_manifest(MANIFEST)?;
    let ds = attach_scores(ds, &parse_score_table(SCORES)?)?;
    println!("{} attempts", ds.attempts.len());
    for a in &ds.attempts {
        println!(
            "{:<14} {:<9} dfr {:?} legacy(flipped) {:?} magface {:?}",
            a.id(),
            label_str(a.label),
            ds.track_values(a, &Track::mad("dfr"))?,
            ds.track_values(a, &Track::mad("legacy"))?,
            ds.track_values(a, &Track::quality("magface"))?,
        );
    }

    // Referential problems are reported, not silently dropped.
    let broken = MANIFEST.replace("doc-ab,morph,alice,bob", "doc-ab,morph,alice,alice");
    match parse_manifest(&broken) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
