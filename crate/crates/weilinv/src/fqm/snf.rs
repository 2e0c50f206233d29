//! Smith normal form of small integer matrices, tracking the right
//! transform only: U * A * V = D with V unimodular. The quotient
//! Z^n / A Z^n is then isomorphic to the direct sum of Z/d_i with
//! generators given by the columns of V scaled by 1/d_i.

/// Returns (d, v) with d the diagonal of the Smith form (non-negative,
/// d_1 | d_2 | ... with zeros last) and v the accumulated column transform.
pub(crate) fn smith_normal_form(mut m: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>) {
    let n = m.len();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    if n == 0 {
        return (Vec::new(), v);
    }

    diagonalize(&mut m, &mut v);

    // positive diagonal
    for i in 0..n {
        if m[i][i] < 0 {
            for row in m.iter_mut() {
                row[i] = -row[i];
            }
            for row in v.iter_mut() {
                row[i] = -row[i];
            }
        }
    }

    // divisibility chain: repair violations and re-diagonalize
    loop {
        let mut dirty = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m[i][i], m[j][j]);
                let bad = if a == 0 { b != 0 } else { b % a != 0 };
                if bad {
                    // fold column j into column i and restart
                    for r in 0..n {
                        m[r][i] += m[r][j];
                    }
                    for r in 0..n {
                        v[r][i] += v[r][j];
                    }
                    diagonalize(&mut m, &mut v);
                    for k in 0..n {
                        if m[k][k] < 0 {
                            for row in m.iter_mut() {
                                row[k] = -row[k];
                            }
                            for row in v.iter_mut() {
                                row[k] = -row[k];
                            }
                        }
                    }
                    dirty = true;
                }
            }
        }
        if !dirty {
            break;
        }
    }

    // ascending with zeros last
    for i in 0..n {
        for j in (i + 1)..n {
            let swap = match (m[i][i], m[j][j]) {
                (0, x) if x != 0 => true,
                (a, b) if a != 0 && b != 0 && b < a => true,
                _ => false,
            };
            if swap {
                m.swap(i, j);
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
                for row in v.iter_mut() {
                    row.swap(i, j);
                }
            }
        }
    }

    let d = (0..n).map(|i| m[i][i]).collect();
    (d, v)
}

fn diagonalize(m: &mut [Vec<i128>], v: &mut [Vec<i128>]) {
    let n = m.len();
    let mut t = 0usize;
    while t < n {
        // smallest nonzero entry of the trailing submatrix becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for r in t..n {
            for c in t..n {
                if m[r][c] != 0 && best.map_or(true, |(br, bc)| m[r][c].abs() < m[br][bc].abs()) {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        m.swap(t, pr);
        if pc != t {
            for row in m.iter_mut() {
                row.swap(t, pc);
            }
            for row in v.iter_mut() {
                row.swap(t, pc);
            }
        }
        loop {
            let mut clean = true;
            for r in (t + 1)..n {
                if m[r][t] != 0 {
                    let q = m[r][t] / m[t][t];
                    for c in 0..n {
                        m[r][c] -= q * m[t][c];
                    }
                    if m[r][t] != 0 {
                        m.swap(t, r);
                        clean = false;
                    }
                }
            }
            for c in (t + 1)..n {
                if m[t][c] != 0 {
                    let q = m[t][c] / m[t][t];
                    for r in 0..n {
                        m[r][c] -= q * m[r][t];
                    }
                    for r in 0..n {
                        v[r][c] -= q * v[r][t];
                    }
                    if m[t][c] != 0 {
                        for row in m.iter_mut() {
                            row.swap(t, c);
                        }
                        for row in v.iter_mut() {
                            row.swap(t, c);
                        }
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: Vec<Vec<i128>>) -> Vec<i128> {
        let n = a.len();
        let (d, v) = smith_normal_form(a.clone());
        // V unimodular
        assert_eq!(det(&v).abs(), 1, "V not unimodular");
        // d_i | d_{i+1}
        for i in 0..n.saturating_sub(1) {
            if d[i] != 0 {
                assert_eq!(d[i + 1] % d[i], 0, "chain violated: {:?}", d);
            } else {
                assert_eq!(d[i + 1], 0);
            }
        }
        // |det A| preserved
        let da: i128 = det(&a).abs();
        let dd: i128 = d.iter().product::<i128>().abs();
        assert_eq!(da, dd);
        d
    }

    fn det(m: &[Vec<i128>]) -> i128 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        let mut m: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect();
        let mut sign = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
                .unwrap();
            if m[p][c] == 0.0 {
                return 0;
            }
            if p != c {
                m.swap(p, c);
                sign = -sign;
            }
            for r in (c + 1)..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let d: f64 = sign * (0..n).map(|i| m[i][i]).product::<f64>();
        d.round() as i128
    }

    #[test]
    fn snf_examples() {
        assert_eq!(check(vec![vec![2]]), vec![2]);
        assert_eq!(check(vec![vec![2, 1], vec![1, 2]]), vec![1, 3]);
        assert_eq!(check(vec![vec![0, 2], vec![2, 0]]), vec![2, 2]);
        assert_eq!(
            check(vec![vec![2, 0, 0], vec![0, 4, 0], vec![0, 0, 6]]),
            vec![2, 2, 12]
        );
        assert_eq!(check(vec![vec![6, 4], vec![4, 6]]), vec![2, 10]);
    }

    #[test]
    fn snf_random_unimodular_and_chain() {
        let mut state = 0xabcdef12345u64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..40 {
            let n = 1 + (rnd() as usize % 4);
            let a: Vec<Vec<i128>> = (0..n)
                .map(|_| (0..n).map(|_| (rnd() % 11) as i128 - 5).collect())
                .collect();
            // symmetrize so it looks like a Gram matrix
            let mut s = a.clone();
            for i in 0..n {
                for j in 0..n {
                    s[i][j] = a[i][j] + a[j][i];
                }
            }
            check(s);
        }
    }
}
