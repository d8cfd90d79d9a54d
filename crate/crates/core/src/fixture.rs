//! Deterministic synthetic panels for tests, benches and the bundled sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::panel::{Observation, Panel};

pub const SAMPLE_SEED: u64 = 20_210_801;

#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub n_countries: usize,
    pub n_disciplines: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Five countries, eight disciplines, 1996 through 2019.
    fn default() -> Self {
        Self {
            n_countries: 5,
            n_disciplines: 8,
            first_year: 1996,
            last_year: 2019,
            seed: SAMPLE_SEED,
        }
    }
}

/// Counts follow `size_c · popularity_d · exp(profile_{c,d}(t))` where each
/// country's discipline profile drifts as a random walk and disciplines come
/// in related pairs that share shocks.
pub fn synthetic_panel(spec: SyntheticSpec) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nc = spec.n_countries;
    let nd = spec.n_disciplines;
    let size: Vec<f64> = (0..nc).map(|c| 300.0 * (1.0 + c as f64) * rng.random_range(0.8..1.2)).collect();
    let popularity: Vec<f64> = (0..nd).map(|_| rng.random_range(0.5..2.0)).collect();
    let cite_rate: Vec<f64> = (0..nd).map(|_| rng.random_range(2.0..12.0)).collect();
    let mut profile: Vec<f64> = (0..nc * nd).map(|_| rng.random_range(-1.0..1.0)).collect();

    let mut out = Vec::with_capacity(nc * nd * (spec.last_year - spec.first_year + 1) as usize);
    for year in spec.first_year..=spec.last_year {
        let trend = 1.0 + 0.04 * (year - spec.first_year) as f64;
        for c in 0..nc {
            // shocks shared within discipline pairs (0,1), (2,3), ...
            let pair_shocks: Vec<f64> = (0..nd.div_ceil(2)).map(|_| rng.random_range(-0.25..0.25)).collect();
            for d in 0..nd {
                let p = &mut profile[c * nd + d];
                *p = (*p + pair_shocks[d / 2] + rng.random_range(-0.15..0.15)).clamp(-2.5, 2.5);
                let mean = size[c] * popularity[d] * p.exp() * trend;
                let documents = (mean * rng.random_range(0.9..1.1)).round().max(0.0) as u64;
                let citations = (documents as f64 * cite_rate[d] * rng.random_range(0.6..1.4)).round() as u64;
                out.push(Observation {
                    country: format!("C{}", c + 1),
                    discipline: format!("D{}", d + 1),
                    year,
                    documents,
                    citations,
                });
            }
        }
    }
    Panel::from_observations(out).expect("generated triples are unique")
}

/// The bundled sample: five countries, eight disciplines, 24 years.
pub fn sample_panel() -> Panel {
    synthetic_panel(SyntheticSpec::default())
}
