//! Cached 3-D complex FFTs on `n³` row-major (z fastest) buffers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn cache() -> &'static Mutex<HashMap<(usize, bool), Plan>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared 1-D plan of length `n`; `forward` selects the sign `e^{-i…}`.
pub fn plan(n: usize, forward: bool) -> Plan {
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    map.entry((n, forward))
        .or_insert_with(|| {
            let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
            FftPlanner::new().plan_fft(n, dir)
        })
        .clone()
}

/// Unnormalized in-place 3-D DFT.
pub fn fft3(data: &mut [Complex64], n: usize, forward: bool) {
    assert_eq!(data.len(), n * n * n, "buffer is not n^3");
    let p = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];

    // z: contiguous rows, one batched call
    p.process_with_scratch(data, &mut scratch);

    // y and x: gather strided lines into a batch, transform, scatter back
    let mut batch = vec![Complex64::new(0.0, 0.0); n * n];
    for ix in 0..n {
        let plane = &mut data[ix * n * n..(ix + 1) * n * n];
        for iy in 0..n {
            for iz in 0..n {
                batch[iz * n + iy] = plane[iy * n + iz];
            }
        }
        p.process_with_scratch(&mut batch, &mut scratch);
        for iy in 0..n {
            for iz in 0..n {
                plane[iy * n + iz] = batch[iz * n + iy];
            }
        }
    }
    let nn = n * n;
    let mut line = vec![Complex64::new(0.0, 0.0); n * n];
    // x: for each iy, the n columns (iz) along x form one batch
    for iy in 0..n {
        for ix in 0..n {
            let row = &data[ix * nn + iy * n..ix * nn + iy * n + n];
            for (iz, z) in row.iter().enumerate() {
                line[iz * n + ix] = *z;
            }
        }
        p.process_with_scratch(&mut line, &mut scratch);
        for ix in 0..n {
            let row = &mut data[ix * nn + iy * n..ix * nn + iy * n + n];
            for (iz, z) in row.iter_mut().enumerate() {
                *z = line[iz * n + ix];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..n {
                        for y in 0..n {
                            for z in 0..n {
                                let ph = w * ((a * x + b * y + c * z) % n) as f64;
                                acc += data[(x * n + y) * n + z] * Complex64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[(a * n + b) * n + c] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_direct_sum() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut fast = data.clone();
        fft3(&mut fast, n, true);
        let slow = naive(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
        fft3(&mut fast, n, false);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a / (n * n * n) as f64 - b).norm() < 1e-13);
        }
    }
}
