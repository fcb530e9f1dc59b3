#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wulff_core::curve::{builtin_curve, PlanarCurve};

pub const CORPUS_SAMPLES: usize = 1000;

pub struct CorpusCurve {
    pub name: String,
    pub curve: PlanarCurve,
}

fn flat(vertices: &[[f64; 2]]) -> Vec<f64> {
    vertices.iter().flatten().copied().collect()
}

pub fn regular_polygon(m: usize, phase: f64) -> Vec<[f64; 2]> {
    (0..m)
        .map(|j| {
            let a = phase + 2.0 * PI * j as f64 / m as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Star-shaped polygon: sorted random angles, radii in [0.5, 1.2].
pub fn random_star(rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let m = rng.random_range(5..=9);
    let mut angles: Vec<f64> = (0..m)
        .map(|j| 2.0 * PI * (j as f64 + rng.random_range(0.1..0.9)) / m as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
        .into_iter()
        .map(|a| {
            let r = rng.random_range(0.5..1.2);
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

/// Circle, capsule, test curve, four random stars and three regular
/// polygons (triangle, square, hexagon), all with 1000 samples except the
/// capsule (2000).
pub fn corpus() -> Vec<CorpusCurve> {
    let mut out = vec![
        CorpusCurve {
            name: "circle".into(),
            curve: builtin_curve("circle", &[1.0], CORPUS_SAMPLES).unwrap(),
        },
        CorpusCurve {
            name: "capsule".into(),
            curve: builtin_curve("capsule", &[4.0, 1.0], 2000).unwrap(),
        },
        CorpusCurve {
            name: "testcurve".into(),
            curve: builtin_curve("testcurve", &[], CORPUS_SAMPLES).unwrap(),
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for i in 0..4 {
        let v = random_star(&mut rng);
        out.push(CorpusCurve {
            name: format!("star{i}"),
            curve: builtin_curve("polygon", &flat(&v), CORPUS_SAMPLES).unwrap(),
        });
    }
    for (m, phase) in [(3, PI / 2.0), (4, PI / 4.0), (6, 0.0)] {
        out.push(CorpusCurve {
            name: format!("regular{m}"),
            curve: builtin_curve("polygon", &flat(&regular_polygon(m, phase)), CORPUS_SAMPLES).unwrap(),
        });
    }
    out
}
