use std::io::{BufRead, Write};

use super::{Chunk, FeaturizeError};

/// One JSON object per line.
pub fn write_chunks<W: Write>(mut out: W, chunks: &[Chunk]) -> std::io::Result<()> {
    for c in chunks {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_chunks<R: BufRead>(input: R) -> Result<Vec<Chunk>, FeaturizeError> {
    let mut chunks = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let malformed = |message: String| FeaturizeError::Malformed { line: i + 1, message };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Chunk = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if !c.is_consistent() {
            return Err(malformed("per-token arrays differ in length".into()));
        }
        chunks.push(c);
    }
    Ok(chunks)
}
