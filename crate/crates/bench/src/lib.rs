//! Fixtures shared by the criterion benches.

use impulse_mud::spreading::synthesize_with_noise;
use impulse_mud::{MixtureNoiseModel, SpreadingMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The K = 5, N = 31 shifted m-sequence matrix.
pub fn reference_matrix() -> SpreadingMatrix {
    SpreadingMatrix::m_sequence(5, 5).expect("degree-5 m-sequence")
}

/// `count` received vectors at unit amplitude under the given noise.
pub fn received_vectors(
    s: &SpreadingMatrix,
    noise: &MixtureNoiseModel,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<i8> = (0..s.n_users())
        .map(|k| if k % 2 == 0 { 1 } else { -1 })
        .collect();
    let amps = vec![1.0; s.n_users()];
    (0..count)
        .map(|_| {
            let n = noise.sample(&mut rng, s.n_chips());
            synthesize_with_noise(s, &amps, &bits, &n)
                .expect("dimensions agree")
                .received
        })
        .collect()
}
