use av1lab::intra::IntraEdges;

/// Per-pixel recursion. Values inside the current 4x2 patch are exact
/// rationals (scale 2^40); finished patches are rounded and clipped.
pub fn recursive_oracle(e: &IntraEdges, (a, b, c): (i64, i64, i64), w: usize, h: usize) -> Vec<i32> {
    const S: u32 = 40;
    let max = (1i128 << e.bit_depth) - 1;
    let mut done = vec![vec![0i128; w + 1]; h + 1];
    done[0][0] = e.top_left as i128;
    for j in 0..w {
        done[0][j + 1] = e.above[j] as i128;
    }
    for i in 0..h {
        done[i + 1][0] = e.left[i] as i128;
    }
    for pr in (1..=h).step_by(2) {
        for pc in (1..=w).step_by(4) {
            let mut exact = [[0i128; 4]; 2];
            for r in 0..2 {
                for col in 0..4 {
                    let (gr, gc) = (pr + r, pc + col);
                    let val = |rr: usize, cc: usize| -> i128 {
                        if rr >= pr && cc >= pc {
                            exact[rr - pr][cc - pc]
                        } else {
                            done[rr][cc] << S
                        }
                    };
                    let s = a as i128 * val(gr - 1, gc) + b as i128 * val(gr, gc - 1) + c as i128 * val(gr - 1, gc - 1);
                    assert_eq!(s % 16, 0, "recursion left the exact grid");
                    exact[r][col] = s / 16;
                }
            }
            for r in 0..2 {
                for col in 0..4 {
                    let v = (exact[r][col] + (1 << (S - 1))) >> S;
                    done[pr + r][pc + col] = v.clamp(0, max);
                }
            }
        }
    }
    (1..=h).flat_map(|i| (1..=w).map(move |j| (i, j))).map(|(i, j)| done[i][j] as i32).collect()
}
