//! Smith normal form of integer matrices.
//!
//! Only the diagonal is needed here: the elementary divisors of a relation
//! matrix give the invariant factor decomposition of a finitely generated
//! abelian group.

/// Diagonal of the Smith normal form of `mat` (rows x cols, row-major),
/// as nonnegative integers d_1 | d_2 | ... , padded with zeros up to
/// min(rows, cols).
pub fn smith_diagonal(mat: &[Vec<i64>]) -> Vec<i64> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<i64>> = mat.to_vec();
    let n = rows.min(cols);
    let mut diag = vec![0i64; n];

    let mut t = 0;
    while t < n {
        // Pivot: entry of smallest nonzero magnitude in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break, // trailing block is zero
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }

        // Clear row and column t; restart whenever a remainder shrinks the pivot.
        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..rows {
                if a[i][t] != 0 {
                    let q = a[i][t] / a[t][t];
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if a[t][j] != 0 {
                    let q = a[t][j] / a[t][t];
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    if a[t][j] != 0 {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                        clean = false;
                    }
                }
            }
        }

        // Divisibility: the pivot must divide every remaining entry.
        let mut fixed = true;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if a[i][j] % a[t][t] != 0 {
                    for jj in t..cols {
                        let add = a[i][jj];
                        a[t][jj] += add;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue; // redo step t with the fattened pivot row
        }
        diag[t] = a[t][t].abs();
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_of_known_matrices() {
        // Classic example: SNF of [[2,4,4],[-6,6,12],[10,4,16]] is diag(2,2,156).
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]];
        assert_eq!(smith_diagonal(&m), vec![2, 2, 156]);

        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(smith_diagonal(&id), vec![1, 1]);

        let zero = vec![vec![0, 0], vec![0, 0]];
        assert_eq!(smith_diagonal(&zero), vec![0, 0]);

        // Rectangular.
        let m = vec![vec![2, 0, 0], vec![0, 3, 0]];
        assert_eq!(smith_diagonal(&m), vec![1, 6]);
    }

    #[test]
    fn divisibility_chain_holds() {
        // Rank-deficient circulant-style matrix.
        let m = vec![
            vec![4, 2, 8, 6],
            vec![2, 4, 6, 8],
            vec![8, 6, 4, 2],
            vec![6, 8, 2, 4],
        ];
        assert_eq!(smith_diagonal(&m), vec![2, 2, 40, 0]);

        let m = vec![
            vec![6, 4, 2, 7],
            vec![2, 8, 6, 5],
            vec![8, 6, 10, 3],
            vec![6, 8, 2, 4],
        ];
        let d = smith_diagonal(&m);
        assert_eq!(d, vec![1, 2, 2, 524]);
        for w in d.windows(2) {
            assert_eq!(w[1] % w[0], 0, "divisibility broken in {:?}", d);
        }
    }
}
