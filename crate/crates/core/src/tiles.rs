//! Tile decomposition for pointwise kernels and deterministic reductions.
//!
//! The lattice is cut into contiguous index ranges. Kernels run in parallel
//! over tiles; reductions combine per-tile partials in tile order, so results
//! depend only on the tile count, never on scheduling.

use rayon::prelude::*;

use crate::error::Result;

/// Environment variable overriding the tile count.
pub const TILES_ENV: &str = "CBY_TILES";

/// Tile count from `CBY_TILES`, else four tiles per worker thread.
pub fn tile_count() -> usize {
    std::env::var(TILES_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| 4 * rayon::current_num_threads())
}

/// Number of points per tile for `np` points.
pub fn tile_len(np: usize) -> usize {
    np.div_ceil(tile_count().min(np.max(1))).max(1)
}

/// Runs `f(point, out)` for every point, where `out` is that point's row of a
/// point-major buffer of `width` values. The first error in point order wins.
pub fn map_points<F>(np: usize, width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let mut buf = vec![0.0; np * width];
    if np == 0 || width == 0 {
        return Ok(buf);
    }
    let tl = tile_len(np);
    let results: Vec<Result<()>> = buf
        .par_chunks_mut(tl * width)
        .enumerate()
        .map(|(t, chunk)| {
            for (local, row) in chunk.chunks_mut(width).enumerate() {
                f(t * tl + local, row)?;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;
    Ok(buf)
}

/// Points per transpose block in [`map_points_into`].
const BLOCK: usize = 64;

/// Like [`map_points`], but scatters each row into the component arrays `outs`
/// (one per row entry, each of length `np`) instead of returning a point-major
/// buffer. Rows are staged in small blocks so the scatter stays in cache.
pub fn map_points_into<F>(np: usize, outs: Vec<&mut [f64]>, f: F) -> Result<()>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let width = outs.len();
    if np == 0 || width == 0 {
        return Ok(());
    }
    let tl = tile_len(np);
    let mut tiles: Vec<Vec<&mut [f64]>> = (0..np.div_ceil(tl)).map(|_| Vec::with_capacity(width)).collect();
    for comp in outs {
        for (t, chunk) in comp[..np].chunks_mut(tl).enumerate() {
            tiles[t].push(chunk);
        }
    }
    let results: Vec<Result<()>> = tiles
        .into_par_iter()
        .enumerate()
        .map(|(t, mut cols)| {
            let mut block = vec![0.0; BLOCK * width];
            let len = cols[0].len();
            for start in (0..len).step_by(BLOCK) {
                let end = (start + BLOCK).min(len);
                for (local, row) in block.chunks_mut(width).take(end - start).enumerate() {
                    f(t * tl + start + local, row)?;
                }
                for (c, col) in cols.iter_mut().enumerate() {
                    for (local, v) in col[start..end].iter_mut().enumerate() {
                        *v = block[local * width + c];
                    }
                }
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

/// Parallel map over components: `f(c, out)` fills output array `c`.
pub fn for_each_component<F>(out: &mut [Vec<f64>], f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    out.par_iter_mut().enumerate().for_each(|(c, v)| f(c, v));
}

/// Deterministic sum and max of `f(point)` over all points.
pub fn sum_max<F>(np: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    let tl = tile_len(np);
    let ntiles = np.div_ceil(tl);
    let partial: Vec<(f64, f64)> = (0..ntiles)
        .into_par_iter()
        .map(|t| {
            let mut s = 0.0;
            let mut m: f64 = 0.0;
            for p in t * tl..((t + 1) * tl).min(np) {
                let v = f(p);
                s += v;
                m = if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) };
            }
            (s, m)
        })
        .collect();
    partial.into_iter().fold((0.0, 0.0), |(s, m), (ps, pm)| {
        (s + ps, if m.is_nan() || pm.is_nan() { f64::NAN } else { m.max(pm) })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_points_fills_rows() {
        let buf = map_points(10, 2, |p, row| {
            row[0] = p as f64;
            row[1] = -(p as f64);
            Ok(())
        })
        .unwrap();
        for p in 0..10 {
            assert_eq!(buf[2 * p], p as f64);
            assert_eq!(buf[2 * p + 1], -(p as f64));
        }
    }

    #[test]
    fn map_points_into_matches_rows() {
        let np = 150;
        let mut a = vec![0.0; np];
        let mut b = vec![0.0; np];
        map_points_into(np, vec![&mut a, &mut b], |p, row| {
            row[0] = p as f64;
            row[1] = (p * p) as f64;
            Ok(())
        })
        .unwrap();
        assert!((0..np).all(|p| a[p] == p as f64 && b[p] == (p * p) as f64));
        let err = map_points_into(np, vec![&mut a], |p, _| {
            if p >= 70 {
                Err(crate::error::Error::StepRejected { reason: format!("{p}") })
            } else {
                Ok(())
            }
        });
        assert_eq!(err.unwrap_err(), crate::error::Error::StepRejected { reason: "70".into() });
    }

    #[test]
    fn first_error_is_reported() {
        let r = map_points(100, 1, |p, _| {
            if p >= 40 {
                Err(crate::error::Error::StepRejected { reason: format!("{p}") })
            } else {
                Ok(())
            }
        });
        assert_eq!(r.unwrap_err(), crate::error::Error::StepRejected { reason: "40".into() });
    }

    #[test]
    fn reduction_is_reproducible() {
        let f = |p: usize| ((p as f64) * 0.1).sin().abs();
        assert_eq!(sum_max(1000, f), sum_max(1000, f));
        assert!(sum_max(5, |_| f64::NAN).1.is_nan());
    }
}
