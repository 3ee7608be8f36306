//! Per-cell scalar fields precomputed from occupancy.

use super::geometry::line_of_sight;
use crate::workspace::{GridMap, VertexId};

const INF: f64 = f64::INFINITY;

/// 1D squared distance transform by lower envelope of parabolas
/// (Felzenszwalb and Huttenlocher). `f[i]` is 0 at sites, `INF` elsewhere.
fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    // Only finite samples take part in the envelope.
    let mut k: isize = -1;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = -INF;
                z[1] = INF;
                break;
            }
            let p = v[k as usize];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = INF;
            break;
        }
    }
    if k < 0 {
        out.iter_mut().for_each(|o| *o = INF);
        return;
    }
    let mut j = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let d = q as f64 - v[j] as f64;
        *o = d * d + f[v[j]];
    }
}

/// Euclidean distance, in cells, from every cell centre to the nearest
/// occupied cell centre. `INFINITY` when the map has no obstacle.
pub fn distance_transform(map: &GridMap) -> Vec<f64> {
    let (w, h) = (map.width(), map.height());
    let mut grid: Vec<f64> = map.occupancy().iter().map(|&o| if o { 0.0 } else { INF }).collect();
    let n = w.max(h);
    let (mut v, mut z) = (vec![0usize; n], vec![0.0; n + 1]);
    let (mut col_in, mut col_out) = (vec![0.0; h], vec![0.0; h]);
    for c in 0..w {
        for r in 0..h {
            col_in[r] = grid[r * w + c];
        }
        transform_1d(&col_in, &mut col_out, &mut v, &mut z);
        for r in 0..h {
            grid[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0; w];
    for r in 0..h {
        transform_1d(&grid[r * w..(r + 1) * w], &mut row_out, &mut v, &mut z);
        grid[r * w..(r + 1) * w].copy_from_slice(&row_out);
    }
    grid.into_iter().map(f64::sqrt).collect()
}

/// Fraction of in-map cells within `radius` of each cell that are free and
/// in line of sight. Cells with no neighbour inside the radius see everything.
pub fn visibility_fraction(map: &GridMap, radius: f64) -> Vec<f64> {
    let reach = radius.floor() as i64;
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut out = vec![0.0; map.cell_count()];
    for (id, slot) in out.iter_mut().enumerate() {
        let from = VertexId(id);
        if map.is_occupied(from) {
            continue;
        }
        let (r, c) = ((id as i64) / w, (id as i64) % w);
        let (mut total, mut seen) = (0usize, 0usize);
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                let (tr, tc) = (r + dr, c + dc);
                if (dr == 0 && dc == 0) || tr < 0 || tc < 0 || tr >= h || tc >= w {
                    continue;
                }
                if ((dr * dr + dc * dc) as f64) > radius * radius {
                    continue;
                }
                total += 1;
                if line_of_sight(map, from, VertexId((tr * w + tc) as usize)) {
                    seen += 1;
                }
            }
        }
        *slot = if total == 0 { 1.0 } else { seen as f64 / total as f64 };
    }
    out
}
