//! Small exact linear algebra over the rationals: row reduction,
//! nullspace bases, and span membership. Sizes here are a few hundred
//! rows/columns at most.

use num_traits::{One, Zero};

use crate::exactalg::Rat;

/// Reduced row echelon form in place; returns pivot column per row.
pub fn rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = Rat::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..ncols {
                    let delta = &rows[r][j] * &factor;
                    rows[i][j] = &rows[i][j] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.retain(|row| row.iter().any(|x| !x.is_zero()));
    pivots
}

/// Basis of the nullspace of the homogeneous system `rows * x = 0`.
pub fn nullspace(mut rows: Vec<Vec<Rat>>, ncols: usize) -> Vec<Vec<Rat>> {
    let pivots = rref(&mut rows);
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Whether `target` lies in the span of `vectors`.
pub fn in_span(vectors: &[Vec<Rat>], target: &[Rat]) -> bool {
    let mut rows: Vec<Vec<Rat>> = vectors.to_vec();
    let rank_before = {
        let mut copy = rows.clone();
        rref(&mut copy).len()
    };
    rows.push(target.to_vec());
    let rank_after = rref(&mut rows).len();
    rank_before == rank_after
}

/// Solves `rows * x = rhs` exactly. Returns one solution if consistent.
pub fn solve(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut aug: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs.iter())
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let pivots = rref(&mut aug);
    // Inconsistent iff a pivot lands in the augmented column.
    if pivots.iter().any(|&c| c == ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][ncols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn nullspace_of_sum_constraint() {
        // x + y + z = 0 has a 2-dimensional nullspace.
        let rows = vec![vec![rat(1), rat(1), rat(1)]];
        let ns = nullspace(rows, 3);
        assert_eq!(ns.len(), 2);
    }

    #[test]
    fn span_membership() {
        let v1 = vec![rat(1), rat(0), rat(1)];
        let v2 = vec![rat(0), rat(1), rat(1)];
        assert!(in_span(&[v1.clone(), v2.clone()], &vec![rat(2), rat(3), rat(5)]));
        assert!(!in_span(&[v1, v2], &vec![rat(0), rat(0), rat(1)]));
    }

    #[test]
    fn solve_small_system() {
        let rows = vec![vec![rat(2), rat(0)], vec![rat(0), rat(4)]];
        let x = solve(&rows, &[rat(6), rat(8)]).unwrap();
        assert_eq!(x, vec![rat(3), rat(2)]);
    }
}
