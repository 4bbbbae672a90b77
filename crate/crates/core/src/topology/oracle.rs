use super::FilteredGrid;

/// `[β0, β2]` of the sublevel complex at `t` by direct flood fill.
///
/// Components of `{v ≤ t}` use face adjacency. Voids are the components of
/// `{v > t}` under full 26-adjacency that never reach the grid boundary;
/// two above-threshold vertices sharing any cube are joined through that
/// cube, which is missing from the complex.
pub fn oracle_betti(grid: &FilteredGrid, t: f64) -> [usize; 2] {
    let below: Vec<bool> = grid.values().iter().map(|&v| v <= t).collect();
    let b0 = count_components(grid.dims(), &below, true, false);
    let above: Vec<bool> = below.iter().map(|b| !b).collect();
    let b2 = count_components(grid.dims(), &above, false, true);
    [b0, b2]
}

fn count_components(dims: [usize; 3], member: &[bool], faces_only: bool, interior_only: bool) -> usize {
    let [nx, ny, nz] = dims;
    let mut seen = vec![false; member.len()];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..member.len() {
        if !member[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut touches_boundary = false;
        while let Some(v) = stack.pop() {
            let (i, j, k) = (v % nx, (v / nx) % ny, v / (nx * ny));
            if i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz {
                touches_boundary = true;
            }
            for dk in -1i64..=1 {
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let steps = di.abs() + dj.abs() + dk.abs();
                        if steps == 0 || (faces_only && steps > 1) {
                            continue;
                        }
                        let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                        if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                            continue;
                        }
                        let w = a as usize + nx * (b as usize + ny * c as usize);
                        if member[w] && !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        if !(interior_only && touches_boundary) {
            count += 1;
        }
    }
    count
}

/// Euler characteristic of the sublevel complex at `t`, counting every
/// cube cell whose vertices all lie at or below `t`.
pub fn euler_characteristic(grid: &FilteredGrid, t: f64) -> i64 {
    let [nx, ny, nz] = grid.dims();
    let below: Vec<bool> = grid.values().iter().map(|&v| v <= t).collect();
    let mut chi = 0i64;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                // Cells anchored at (i, j, k) spanning any subset of axes.
                for mask in 0..8usize {
                    let span = [mask & 1, (mask >> 1) & 1, (mask >> 2) & 1];
                    if i + span[0] >= nx || j + span[1] >= ny || k + span[2] >= nz {
                        continue;
                    }
                    let all_below = (0..8usize).filter(|c| c & !mask == 0).all(|c| {
                        let (a, b, d) = (i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                        below[a + nx * (b + ny * d)]
                    });
                    if all_below {
                        let dim = span.iter().sum::<usize>();
                        chi += if dim % 2 == 0 { 1 } else { -1 };
                    }
                }
            }
        }
    }
    chi
}
