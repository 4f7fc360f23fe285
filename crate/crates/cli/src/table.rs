//! Built-in benchmark rows: dimensions, planted ray counts, and stopping
//! thresholds for the three regimes at three scales, with the reference
//! identified-anchor counts each row is compared against.

use sepnmf_core::datagen::Regime;

#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    pub id: &'static str,
    pub group: &'static str,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub regime: Regime,
    pub epsilon: f64,
    /// Reference identified-anchor count for this row.
    pub reference_hits: usize,
}

pub const ROWS: [BenchRow; 9] = [
    BenchRow { id: "c1-small",  group: "small",  m: 100,  n: 75,   r: 25,  regime: Regime::C1, epsilon: 1e-5, reference_hits: 25 },
    BenchRow { id: "c1-medium", group: "medium", m: 500,  n: 375,  r: 25,  regime: Regime::C1, epsilon: 1e-4, reference_hits: 23 },
    BenchRow { id: "c1-large",  group: "large",  m: 1200, n: 600,  r: 300, regime: Regime::C1, epsilon: 1e-4, reference_hits: 300 },
    BenchRow { id: "c2-small",  group: "small",  m: 25,   n: 100,  r: 15,  regime: Regime::C2, epsilon: 1e-5, reference_hits: 14 },
    BenchRow { id: "c2-medium", group: "medium", m: 125,  n: 500,  r: 75,  regime: Regime::C2, epsilon: 1e-4, reference_hits: 74 },
    BenchRow { id: "c2-large",  group: "large",  m: 425,  n: 1200, r: 225, regime: Regime::C2, epsilon: 1e-4, reference_hits: 223 },
    BenchRow { id: "c3-small",  group: "small",  m: 25,   n: 100,  r: 45,  regime: Regime::C3, epsilon: 1e-5, reference_hits: 45 },
    BenchRow { id: "c3-medium", group: "medium", m: 125,  n: 500,  r: 150, regime: Regime::C3, epsilon: 1e-4, reference_hits: 150 },
    BenchRow { id: "c3-large",  group: "large",  m: 425,  n: 1200, r: 625, regime: Regime::C3, epsilon: 1e-4, reference_hits: 625 },
];

/// Resolves a comma-separated row filter into row indices, preserving table
/// order. Tokens: `all`, a group (`small`/`medium`/`large`), a regime
/// (`c1`/`c2`/`c3`), or a row id (`c3-small`).
pub fn select_rows(filter: &str) -> Result<Vec<usize>, String> {
    let mut selected = vec![false; ROWS.len()];
    for token in filter.split(',') {
        let token = token.trim().to_ascii_lowercase();
        if token.is_empty() {
            continue;
        }
        let mut hit = false;
        for (idx, row) in ROWS.iter().enumerate() {
            let matches = token == "all"
                || token == row.group
                || token == row.id
                || token == row.id[..2] // c1 / c2 / c3
            ;
            if matches {
                selected[idx] = true;
                hit = true;
            }
        }
        if !hit {
            return Err(format!(
                "unknown row filter '{token}'; expected all, small, medium, large, c1, c2, c3 or a row id like c3-small"
            ));
        }
    }
    let picks: Vec<usize> = (0..ROWS.len()).filter(|&i| selected[i]).collect();
    if picks.is_empty() {
        return Err("row filter selected nothing".into());
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_resolve() {
        assert_eq!(select_rows("small").unwrap(), vec![0, 3, 6]);
        assert_eq!(select_rows("c3-small").unwrap(), vec![6]);
        assert_eq!(select_rows("c1").unwrap(), vec![0, 1, 2]);
        assert_eq!(select_rows("all").unwrap().len(), 9);
        assert_eq!(select_rows("small,c2-medium").unwrap(), vec![0, 3, 4, 6]);
        assert!(select_rows("bogus").is_err());
    }
}
