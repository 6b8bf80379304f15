//! Angular cap sets `Ω_l` on the unit sphere and their smooth partition.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::multiplier::bump;
use crate::algebra::{cross3, dot3, norm3, scale3, sub3};
use crate::error::{Error, Result};

/// Largest supported refinement level.
pub const MAX_CAP_LEVEL: u32 = 8;

#[derive(Debug)]
pub struct CapSet {
    level: u32,
    frequency: usize,
    centers: Vec<[f64; 3]>,
    min_edge: f64,
    max_edge: f64,
    covering_radius: f64,
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

/// Geodesic refinement of the icosahedron, chosen as the densest one whose
/// nearest-neighbour chords stay `≥ 2^{−l}`. Cached per level.
pub fn cap_set(l: u32) -> Result<Arc<CapSet>> {
    if l > MAX_CAP_LEVEL {
        return Err(Error::OutOfRange(format!("cap level {l} above {MAX_CAP_LEVEL}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CapSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&l) {
        return Ok(c.clone());
    }
    let built = Arc::new(CapSet::build(l)?);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(l, built.clone());
    Ok(built)
}

struct Geodesic {
    points: Vec<[f64; 3]>,
    min_edge: f64,
    max_edge: f64,
    covering_radius: f64,
}

fn icosahedron() -> ([[f64; 3]; 12], [[usize; 3]; 20]) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, p, 0.0], [1.0, p, 0.0], [-1.0, -p, 0.0], [1.0, -p, 0.0],
        [0.0, -1.0, p], [0.0, 1.0, p], [0.0, -1.0, -p], [0.0, 1.0, -p],
        [p, 0.0, -1.0], [p, 0.0, 1.0], [-p, 0.0, -1.0], [-p, 0.0, 1.0],
    ];
    let v = raw.map(|x| scale3(x, 1.0 / norm3(x)));
    let faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    (v, faces)
}

/// Chordal distance from the spherical circumcentre of `a, b, c` to its vertices.
fn circumradius(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let mut n = cross3(sub3(b, a), sub3(c, a));
    let len = norm3(n);
    n = scale3(n, 1.0 / len);
    if dot3(n, a) < 0.0 {
        n = scale3(n, -1.0);
    }
    norm3(sub3(a, n))
}

fn geodesic(f: usize) -> Geodesic {
    let (v, faces) = icosahedron();
    let key = |p: [f64; 3]| p.map(|x| (x * 1e9).round() as i64);
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut points = Vec::new();
    let (mut min_edge, mut max_edge, mut cover) = (f64::INFINITY, 0.0f64, 0.0f64);
    for face in faces {
        let [a, b, c] = face.map(|i| v[i]);
        let at = |i: usize, j: usize| {
            let w = (f - i - j) as f64;
            let p = [0, 1, 2].map(|d| (i as f64 * a[d] + j as f64 * b[d] + w * c[d]) / f as f64);
            scale3(p, 1.0 / norm3(p))
        };
        for i in 0..=f {
            for j in 0..=f - i {
                let p = at(i, j);
                index.entry(key(p)).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                });
                let mut tri = |p: [f64; 3], q: [f64; 3], r: [f64; 3]| {
                    for (x, y) in [(p, q), (q, r), (r, p)] {
                        let d = norm3(sub3(x, y));
                        min_edge = min_edge.min(d);
                        max_edge = max_edge.max(d);
                    }
                    cover = cover.max(circumradius(p, q, r));
                };
                if i + j < f {
                    tri(p, at(i + 1, j), at(i, j + 1));
                }
                if i + j + 2 <= f {
                    tri(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                }
            }
        }
    }
    Geodesic { points, min_edge, max_edge, covering_radius: cover }
}

impl CapSet {
    fn build(l: u32) -> Result<Self> {
        let h = 2f64.powi(-(l as i32));
        let mut f = ((0.8 / h).floor() as usize).max(1);
        let mut g = geodesic(f);
        if g.min_edge < h {
            return Err(Error::Precondition(format!("no icosahedral refinement separates at level {l}")));
        }
        loop {
            let next = geodesic(f + 1);
            if next.min_edge < h {
                break;
            }
            f += 1;
            g = next;
        }
        if g.max_edge > 2.0 * h || g.covering_radius >= h {
            return Err(Error::Precondition(format!(
                "cap set at level {l}: max edge {} / covering radius {} out of bounds",
                g.max_edge, g.covering_radius
            )));
        }
        let cell = 2.0 * h;
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in g.points.iter().enumerate() {
            buckets.entry(p.map(|x| (x / cell).floor() as i64)).or_default().push(i);
        }
        Ok(Self {
            level: l,
            frequency: f,
            centers: g.points,
            min_edge: g.min_edge,
            max_edge: g.max_edge,
            covering_radius: g.covering_radius,
            cell,
            buckets,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Subdivision frequency of the underlying geodesic grid.
    pub fn refinement(&self) -> usize {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn center(&self, nu: usize) -> [f64; 3] {
        self.centers[nu]
    }

    pub fn min_separation(&self) -> f64 {
        self.min_edge
    }

    pub fn max_neighbor_distance(&self) -> f64 {
        self.max_edge
    }

    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    /// Caps whose doubled neighbourhood may contain unit vector `w`.
    fn candidates(&self, w: [f64; 3]) -> impl Iterator<Item = usize> + '_ {
        let c = w.map(|x| (x / self.cell).floor() as i64);
        (-1..=1).flat_map(move |a| {
            (-1..=1).flat_map(move |b| {
                (-1..=1).flat_map(move |d| {
                    self.buckets.get(&[c[0] + a, c[1] + b, c[2] + d]).into_iter().flatten().copied()
                })
            })
        })
    }

    fn weight(&self, nu: usize, w: [f64; 3], scale: f64) -> f64 {
        bump(scale * norm3(sub3(w, self.centers[nu])))
    }

    /// `κ_l^ν(ξ)`: cap bumps normalized by their sum over `ν`. Zero at `ξ = 0`.
    pub fn kappa(&self, nu: usize, xi: [f64; 3]) -> f64 {
        let r = norm3(xi);
        if r == 0.0 {
            return 0.0;
        }
        let w = scale3(xi, 1.0 / r);
        let s = 2f64.powi(self.level as i32);
        let own = self.weight(nu, w, s);
        if own == 0.0 {
            return 0.0;
        }
        let total: f64 = self.candidates(w).map(|mu| self.weight(mu, w, s)).sum();
        own / total
    }

    /// `κ̃_l^ν`, equal to 1 on the support of `κ_l^ν`.
    pub fn kappa_tilde(&self, nu: usize, xi: [f64; 3]) -> f64 {
        let r = norm3(xi);
        if r == 0.0 {
            return 0.0;
        }
        let s = 2f64.powi(self.level as i32 - 1);
        self.weight(nu, scale3(xi, 1.0 / r), s)
    }

    /// Indices of caps with `κ_l^ν(ξ) > 0`.
    pub fn active(&self, xi: [f64; 3]) -> Vec<usize> {
        let r = norm3(xi);
        if r == 0.0 {
            return Vec::new();
        }
        let w = scale3(xi, 1.0 / r);
        let s = 2f64.powi(self.level as i32);
        let mut v: Vec<usize> = self.candidates(w).filter(|&mu| self.weight(mu, w, s) > 0.0).collect();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separation_bounds() {
        for l in 0..=5 {
            let c = cap_set(l).unwrap();
            let h = 2f64.powi(-(l as i32));
            assert!(c.min_separation() >= h);
            assert!(c.max_neighbor_distance() <= 2.0 * h);
            assert!(c.covering_radius() < h);
            assert_eq!(c.len(), 10 * c.refinement() * c.refinement() + 2);
        }
    }

    #[test]
    fn kappa_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = cap_set(3).unwrap();
        for _ in 0..200 {
            let xi = [0, 1, 2].map(|_| rng.random::<f64>() * 2.0 - 1.0);
            let s: f64 = (0..c.len()).map(|nu| c.kappa(nu, xi)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            let fast: f64 = c.active(xi).into_iter().map(|nu| c.kappa(nu, xi)).sum();
            assert!((fast - s).abs() < 1e-14);
        }
    }

    #[test]
    fn tilde_covers_support_and_degree_zero() {
        let c = cap_set(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let xi = [0, 1, 2].map(|_| rng.random::<f64>() - 0.5);
            for nu in c.active(xi) {
                assert_eq!(c.kappa_tilde(nu, xi), 1.0);
                assert_eq!(c.kappa(nu, xi), c.kappa(nu, scale3(xi, 4.0)));
            }
        }
    }

    #[test]
    fn level_guard() {
        assert!(cap_set(MAX_CAP_LEVEL + 1).is_err());
    }
}
