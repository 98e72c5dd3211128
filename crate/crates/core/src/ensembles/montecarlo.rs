//! Seeded, shardable Monte Carlo driver.
//!
//! Samples are grouped into fixed chunks of [`CHUNK_SIZE`]; chunk `c` draws
//! from ChaCha8 stream `c` of the run seed. The sample sequence is therefore
//! a function of `(seed, sample index)` only, independent of how many worker
//! threads process the chunks, and results are reassembled in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK_SIZE: usize = 256;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Evaluates `draw` once per sample and returns the results in sample order.
pub fn sharded_samples<T, F>(seed: u64, samples: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Mean, sample standard deviation and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
}

impl SampleStats {
    pub fn from_slice(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return SampleStats {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                std_err: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        SampleStats {
            count,
            mean,
            std_dev,
            std_err: std_dev / (count as f64).sqrt(),
        }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn independent_of_thread_count() {
        let draw = |rng: &mut ChaCha8Rng| rng.random::<f64>();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sharded_samples(11, 1000, draw));
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sharded_samples(11, 1000, draw));
        assert_eq!(single, multi);
        assert_eq!(single.len(), 1000);
        // A prefix of a longer run is the shorter run.
        let longer = sharded_samples(11, 1300, draw);
        assert_eq!(&longer[..1000], &single[..]);
        assert_ne!(sharded_samples(12, 10, draw), single[..10].to_vec());
    }

    #[test]
    fn stats_of_known_sample() {
        let s = SampleStats::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.std_err - s.std_dev / 2.0).abs() < 1e-15);
        assert!(SampleStats::from_slice(&[]).mean.is_nan());
    }
}
