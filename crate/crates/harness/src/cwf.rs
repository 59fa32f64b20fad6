//! `.cwf` waveform files: a JSON document carrying the grid, the sampling
//! mode and the sample count ahead of the `[re, im]` pairs.

use std::path::Path;

use isac_core::{GridConfig, SamplingMode, TimeVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const MAGIC: &str = "isac-cwf";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CwfFile {
    format: String,
    version: u32,
    n_tx: usize,
    n_sub: usize,
    n_cp: usize,
    os_rate: usize,
    mode: SamplingMode,
    cp_included: bool,
    len: usize,
    samples: Vec<[f64; 2]>,
}

pub fn to_string(s: &TimeVector, grid: &GridConfig) -> String {
    let file = CwfFile {
        format: MAGIC.into(),
        version: VERSION,
        n_tx: grid.n_tx,
        n_sub: grid.n_sub,
        n_cp: grid.n_cp,
        os_rate: grid.os_rate,
        mode: s.mode,
        cp_included: s.cp_included,
        len: s.len(),
        samples: s.iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&file).expect("waveform serializes")
}

pub fn from_str(text: &str) -> Result<(TimeVector, GridConfig)> {
    let f: CwfFile = serde_json::from_str(text).map_err(|e| HarnessError::Format(e.to_string()))?;
    if f.format != MAGIC || f.version != VERSION {
        return Err(HarnessError::Format(format!(
            "unsupported format {} v{}",
            f.format, f.version
        )));
    }
    if f.len != f.samples.len() {
        return Err(HarnessError::Format(format!(
            "header says {} samples, body has {}",
            f.len,
            f.samples.len()
        )));
    }
    let grid = GridConfig::new(f.n_tx, f.n_sub, f.n_cp, f.os_rate)
        .map_err(|e| HarnessError::Format(e.to_string()))?;
    let s = TimeVector {
        data: f
            .samples
            .iter()
            .map(|[a, b]| Complex64::new(*a, *b))
            .collect(),
        mode: f.mode,
        cp_included: f.cp_included,
    };
    s.check(&grid)
        .map_err(|e| HarnessError::Format(e.to_string()))?;
    Ok((s, grid))
}

pub fn write(path: &Path, s: &TimeVector, grid: &GridConfig) -> Result<()> {
    std::fs::write(path, to_string(s, grid)).map_err(|e| HarnessError::io(path, e))
}

pub fn read(path: &Path) -> Result<(TimeVector, GridConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use isac_core::ideal_waveform::random_init;

    #[test]
    fn round_trip_is_exact() {
        let g = GridConfig::new(2, 8, 2, 2).unwrap();
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            let s = random_init(&g, mode, 1.0, 4);
            let (back, g2) = from_str(&to_string(&s, &g)).unwrap();
            assert_eq!(back, s);
            assert_eq!(g2, g);
        }
    }

    #[test]
    fn truncated_body_is_rejected() {
        let g = GridConfig::new(2, 8, 2, 2).unwrap();
        let s = random_init(&g, SamplingMode::Nyquist, 1.0, 4);
        let text = to_string(&s, &g).replace("\"len\":16", "\"len\":17");
        assert!(matches!(from_str(&text), Err(HarnessError::Format(_))));
    }
}
