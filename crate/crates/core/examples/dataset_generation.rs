//! Writes a small synthetic sequence to disk and generates its ground-truth
//! dataset (depth, row-0 map, corrected image, row poses).
//!
//! cargo run --example dataset_generation [out_dir]

use rollshutter::dataset::{export_dataset, FrameOutcome, SequenceManifest};
use rollshutter::synthetic::{write_sequence, SyntheticSequence};

fn main() -> rollshutter::Result<()> {
    let out = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::temp_dir().join("rollshutter-dataset"),
    };
    let layout = SyntheticSequence {
        frames: 4,
        uncovered_frames: 1,
        width: 96,
        height: 72,
        ..Default::default()
    };
    let manifest_path = write_sequence(&out.join("input"), &layout)?;
    let manifest = SequenceManifest::read(&manifest_path)?;
    let summary = export_dataset(&manifest, out.join("gt"))?;

    for f in &summary.frames {
        match &f.outcome {
            FrameOutcome::Kept {
                valid_fraction,
                flagged,
            } => {
                println!(
                    "{}: kept, valid fraction {valid_fraction:.3}{}",
                    f.id,
                    if *flagged { " (flagged)" } else { "" }
                )
            }
            FrameOutcome::Dropped { reason } => println!("{}: dropped ({reason})", f.id),
        }
    }
    println!(
        "{} in, {} kept, {} dropped; output in {}",
        summary.frames_in(),
        summary.kept(),
        summary.dropped(),
        out.join("gt").display()
    );
    Ok(())
}
