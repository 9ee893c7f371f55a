#![allow(dead_code)]

use mixroute::ctm::RoadGeometry;
use rand::Rng;

/// Road used throughout the tests: 5 cells, 3 of them with 2 lanes before a
/// 1-lane bottleneck.
pub fn canonical() -> RoadGeometry {
    RoadGeometry {
        cells: 5,
        m_n: 3,
        b_n: 2,
        b_b: 1,
        v: 1.0,
        h_h: 1.0,
        h_a: 0.5,
        n_jam: 8.0,
    }
}

pub fn canonical_with_cells(cells: usize) -> RoadGeometry {
    RoadGeometry {
        cells,
        ..canonical()
    }
}

/// Bottleneck capacity `v b_b / (h_h - alpha (h_h - h_a))`, written out.
pub fn bottleneck_capacity(g: &RoadGeometry, alpha: f64) -> f64 {
    g.v * f64::from(g.b_b) / (g.h_h - alpha * (g.h_h - g.h_a))
}

/// Road latency with `gamma` congested cells, from the closed form
/// `I/v + gamma (1 - r) n_jam H(alpha) / (r v b_n)`.
pub fn closed_form_latency(g: &RoadGeometry, alpha: f64, gamma: f64) -> f64 {
    let r = f64::from(g.b_b) / f64::from(g.b_n);
    let h = g.h_h - alpha * (g.h_h - g.h_a);
    g.cells as f64 / g.v + gamma * (1.0 - r) * g.n_jam * h / (r * g.v * f64::from(g.b_n))
}

/// Exactly rounded sum (Shewchuk's partials).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Partials are nonoverlapping and increasing; fold from the top with
    // round-half-even correction.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// A random valid single-bottleneck road with `cells` cells.
pub fn random_geometry<R: Rng>(rng: &mut R, cells: usize) -> RoadGeometry {
    let m_n = rng.random_range(1..cells);
    let b_n = rng.random_range(2..=4u32);
    let b_b = rng.random_range(1..b_n);
    let v = rng.random_range(0.5..=1.0);
    let h_h = rng.random_range(1.0..=2.0);
    let h_a = h_h * rng.random_range(0.3..=0.9);
    let n_jam = (1.0 + v) * f64::from(b_n) / h_a * rng.random_range(1.05..=2.0);
    RoadGeometry {
        cells,
        m_n,
        b_n,
        b_b,
        v,
        h_h,
        h_a,
        n_jam,
    }
}

/// `count` random roads with strictly increasing free-flow latency.
pub fn random_network<R: Rng>(rng: &mut R, count: usize) -> Vec<RoadGeometry> {
    loop {
        let mut roads: Vec<RoadGeometry> = (0..count)
            .map(|_| {
                let cells = rng.random_range(2..=12);
                random_geometry(rng, cells)
            })
            .collect();
        roads.sort_by(|a, b| (a.cells as f64 / a.v).total_cmp(&(b.cells as f64 / b.v)));
        let strictly_increasing = roads
            .windows(2)
            .all(|w| w[1].cells as f64 / w[1].v > w[0].cells as f64 / w[0].v + 1e-3);
        if strictly_increasing {
            return roads;
        }
    }
}

/// Uniform point on the simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
