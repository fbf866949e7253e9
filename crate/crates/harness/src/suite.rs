//! The fixed 40-matrix test suite and its on-disk fixtures.

use std::path::{Path, PathBuf};

use anyhow::Context;
use qrdm_core::DenseMatrix;

use crate::config::GenSpec;
use crate::mm::{read_matrix_market, write_matrix_market};

/// Shapes of the random members; each appears once per gap group.
const SHAPES: [(usize, usize); 12] = [
    (32, 32),
    (48, 32),
    (64, 48),
    (64, 64),
    (96, 64),
    (96, 96),
    (128, 80),
    (128, 128),
    (160, 120),
    (192, 128),
    (200, 120),
    (256, 128),
];

const GAPS: [f64; 3] = [1e8, 1e11, 1e14];

/// Fraction of `min(m, n)` kept as the rank, cycled across members.
const RANK_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

const KAHAN_ORDERS: [usize; 4] = [32, 64, 96, 128];
const KAHAN_C: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub id: String,
    pub gen: GenSpec,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn generate(&self) -> qrdm_core::Result<DenseMatrix> {
        self.gen.generate(self.seed)
    }

    /// Ratio between the smallest kept and the largest neglected singular
    /// value, `None` for matrices without a designed gap.
    pub fn gap(&self) -> Option<f64> {
        match self.gen {
            GenSpec::Random { gap, .. } => Some(gap),
            _ => None,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.mtx", self.id)
    }
}

/// 36 random rank-deficient matrices (12 shapes x 3 gaps between 1e8 and
/// 1e14) followed by Kahan matrices of four orders.
pub fn suite() -> Vec<FixtureSpec> {
    let mut out = Vec::with_capacity(40);
    for (g, &gap) in GAPS.iter().enumerate() {
        for (s, &(m, n)) in SHAPES.iter().enumerate() {
            let k = g * SHAPES.len() + s;
            let frac = RANK_FRACTIONS[k % RANK_FRACTIONS.len()];
            let r = ((m.min(n) as f64) * frac).round() as usize;
            out.push(FixtureSpec {
                id: format!("r{:02}_{m}x{n}_r{r}_gap{gap:e}", k + 1),
                gen: GenSpec::Random { m, n, r, gap },
                seed: 20_000 + k as u64,
            });
        }
    }
    for (i, &n) in KAHAN_ORDERS.iter().enumerate() {
        out.push(FixtureSpec {
            id: format!("k{:02}_kahan{n}_c{KAHAN_C}", i + 1),
            gen: GenSpec::Kahan { n, c: KAHAN_C },
            seed: 0,
        });
    }
    out
}

/// Directory holding the committed fixtures.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn write_suite(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    suite()
        .iter()
        .map(|f| {
            let path = dir.join(f.file_name());
            write_matrix_market(&f.generate()?, &path)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

/// Loads every suite member from `dir`, in suite order.
pub fn load_suite(dir: &Path) -> anyhow::Result<Vec<(FixtureSpec, DenseMatrix)>> {
    suite()
        .into_iter()
        .map(|f| {
            let path = dir.join(f.file_name());
            let a = read_matrix_market(&path).with_context(|| format!("reading {}", path.display()))?;
            Ok((f, a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_unique_members() {
        let s = suite();
        assert_eq!(s.len(), 40);
        let mut ids: Vec<&str> = s.iter().map(|f| f.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 40);
        assert_eq!(s.iter().filter(|f| f.gap().is_some_and(|g| g >= 1e8)).count(), 36);
        for f in &s {
            if let GenSpec::Random { m, n, r, .. } = f.gen {
                assert!(m <= 256 && n <= 256 && r > 0 && r < m.min(n));
            }
        }
    }
}
