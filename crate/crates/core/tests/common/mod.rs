//! Shared fixtures and statistical helpers for the integration tests.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Published explicit 24×24 transition matrix of the recycled chain, in
/// units of 1/24, in its original state ordering (row 1, row 2, row 3,
/// column 1, column 2, column 3 of the square).
pub const REFERENCE_MATRIX_24THS: [[u8; 24]; 24] = [
    [4, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 0, 0, 2, 0, 2, 0, 0, 0, 2, 2],
    [0, 4, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 0, 0, 0, 2, 0, 2, 2, 2, 0, 0],
    [0, 0, 4, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 2, 2, 2, 0, 2, 0, 2, 2, 0, 0],
    [0, 0, 0, 4, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 2, 2, 0, 2, 0, 2, 0, 0, 2, 2],
    [1, 1, 1, 1, 4, 0, 0, 0, 1, 1, 1, 1, 2, 0, 2, 0, 2, 2, 0, 0, 2, 0, 0, 2],
    [1, 1, 1, 1, 0, 4, 0, 0, 1, 1, 1, 1, 0, 2, 0, 2, 2, 2, 0, 0, 0, 2, 2, 0],
    [1, 1, 1, 1, 0, 0, 4, 0, 1, 1, 1, 1, 2, 0, 2, 0, 0, 0, 2, 2, 0, 2, 2, 0],
    [1, 1, 1, 1, 0, 0, 0, 4, 1, 1, 1, 1, 0, 2, 0, 2, 0, 0, 2, 2, 2, 0, 0, 2],
    [1, 1, 1, 1, 1, 1, 1, 1, 4, 0, 0, 0, 0, 2, 2, 0, 0, 2, 2, 0, 2, 0, 2, 0],
    [1, 1, 1, 1, 1, 1, 1, 1, 0, 4, 0, 0, 2, 0, 0, 2, 0, 2, 2, 0, 0, 2, 0, 2],
    [1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 4, 0, 2, 0, 0, 2, 2, 0, 0, 2, 2, 0, 2, 0],
    [1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 4, 0, 2, 2, 0, 2, 0, 0, 2, 0, 2, 0, 2],
    [2, 2, 0, 0, 2, 0, 2, 0, 0, 2, 2, 0, 4, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    [2, 2, 0, 0, 0, 2, 0, 2, 2, 0, 0, 2, 0, 4, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 2, 2, 2, 0, 2, 0, 2, 0, 0, 2, 0, 0, 4, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 2, 2, 0, 2, 0, 2, 0, 2, 2, 0, 0, 0, 0, 4, 1, 1, 1, 1, 1, 1, 1, 1],
    [2, 0, 2, 0, 2, 2, 0, 0, 0, 0, 2, 2, 1, 1, 1, 1, 4, 0, 0, 0, 1, 1, 1, 1],
    [0, 2, 0, 2, 2, 2, 0, 0, 2, 2, 0, 0, 1, 1, 1, 1, 0, 4, 0, 0, 1, 1, 1, 1],
    [2, 0, 2, 0, 0, 0, 2, 2, 2, 2, 0, 0, 1, 1, 1, 1, 0, 0, 4, 0, 1, 1, 1, 1],
    [0, 2, 0, 2, 0, 0, 2, 2, 0, 0, 2, 2, 1, 1, 1, 1, 0, 0, 0, 4, 1, 1, 1, 1],
    [0, 2, 2, 0, 2, 0, 0, 2, 2, 0, 2, 0, 1, 1, 1, 1, 1, 1, 1, 1, 4, 0, 0, 0],
    [0, 2, 2, 0, 0, 2, 2, 0, 0, 2, 0, 2, 1, 1, 1, 1, 1, 1, 1, 1, 0, 4, 0, 0],
    [2, 0, 0, 2, 0, 2, 2, 0, 2, 0, 2, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 4, 0],
    [2, 0, 0, 2, 2, 0, 0, 2, 0, 2, 0, 2, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 4],];

/// Canonical flat index → index in [`REFERENCE_MATRIX_24THS`].
///
/// Canonical contexts 1..6 land on reference blocks 1, 2, 4, 5, 3, 6; within
/// contexts 2, 4, 5 and 6 the slots are reordered as well.
pub const REFERENCE_ORDER: [usize; 24] = [
    0, 1, 2, 3, //
    4, 6, 5, 7, //
    12, 13, 14, 15, //
    16, 18, 17, 19, //
    10, 9, 11, 8, //
    23, 22, 20, 21,
];

pub fn reference_entry(row: usize, col: usize) -> f64 {
    REFERENCE_MATRIX_24THS[row][col] as f64 / 24.0
}

/// Upper-tail critical value of χ²(df) at significance `alpha`.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Upper-tail p-value of χ²(df).
pub fn chi2_p_value(stat: f64, df: usize) -> f64 {
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// Pearson goodness of fit of `observed` against probabilities `expected`.
/// Returns (statistic, degrees of freedom); panics if a zero-probability
/// cell was observed.
pub fn goodness_of_fit(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 1e-15 {
            assert_eq!(o, 0, "observed a transition with zero probability");
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    (stat, cells - 1)
}

/// Pearson test of independence on a contingency table (rows × columns),
/// ignoring empty rows and columns. Returns (statistic, degrees of freedom).
pub fn independence(table: &[Vec<u64>]) -> (f64, usize) {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncols = table.first().map_or(0, |r| r.len());
    let col_tot: Vec<u64> = (0..ncols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let cols: Vec<usize> = (0..ncols).filter(|&c| col_tot[c] > 0).collect();
    let total: u64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &c in &cols {
            let e = rt as f64 * col_tot[c] as f64 / total as f64;
            stat += (r[c] as f64 - e).powi(2) / e;
        }
    }
    let df = (rows.len().saturating_sub(1)) * (cols.len().saturating_sub(1));
    (stat, df)
}
