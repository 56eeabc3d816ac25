//! Regenerates the bundled corpora: `gen-corpus [DIR]` writes DIR/corrupted
//! and DIR/clean (DIR defaults to `corpus`).

use std::path::PathBuf;
use std::process::ExitCode;

use forensic_fixtures::corpus::write_corpus;

fn main() -> ExitCode {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    for (name, clean) in [("corrupted", false), ("clean", true)] {
        let dir = root.join(name);
        if let Err(e) = write_corpus(&dir, clean) {
            eprintln!("gen-corpus: {}: {e}", dir.display());
            return ExitCode::FAILURE;
        }
        println!("wrote {}", dir.display());
    }
    ExitCode::SUCCESS
}
