use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Root seed for all randomised computations. Independent consumers draw from
/// distinct numbered streams so results do not depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn stream(self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(id);
        rng
    }
}
