use super::gf::GfField;

/// A nonzero vector `v` with `M v = 0`, or `None` if `M` has full column rank.
///
/// Columns are eliminated left to right and the search stops at the first
/// column without a pivot. That column gets coefficient one, the pivot
/// columns before it are back-substituted and every later column is zero.
/// Only the first `rows + 1` columns can matter, so the rest are never read.
pub fn kernel_vector(field: &GfField, matrix: &[Vec<u32>], cols: usize) -> Option<Vec<u32>> {
    let rows = matrix.len();
    let width = cols.min(rows + 1);
    let mut m: Vec<Vec<u32>> = matrix
        .iter()
        .map(|r| {
            let mut v = r[..width.min(r.len())].to_vec();
            v.resize(width, 0);
            v
        })
        .collect();
    // pivot_cols[i] is the pivot column of row i after reduction.
    let mut pivot_cols: Vec<usize> = Vec::new();
    for c in 0..width {
        let rank = pivot_cols.len();
        let pivot = (rank..rows).find(|&r| m[r][c] != 0);
        let Some(p) = pivot else {
            let mut v = vec![0u32; cols];
            v[c] = 1;
            for (i, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = m[i][c];
            }
            return Some(v);
        };
        m.swap(rank, p);
        let inv = field.inv(m[rank][c]).expect("pivot is nonzero");
        let pivot_row: Vec<u32> = m[rank][c..].iter().map(|&x| field.mul(x, inv)).collect();
        m[rank][c..].copy_from_slice(&pivot_row);
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                field.axpy(&mut row[c..], &pivot_row, f);
            }
        }
        pivot_cols.push(c);
    }
    None
}

/// Multiply `matrix` by `v`.
pub fn mat_vec(field: &GfField, matrix: &[Vec<u32>], v: &[u32]) -> Vec<u32> {
    matrix
        .iter()
        .map(|row| row.iter().zip(v).fold(0, |acc, (&a, &b)| acc ^ field.mul(a, b)))
        .collect()
}
