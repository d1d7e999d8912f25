//! Shared helpers for the benchmark targets.

use num_bigint::BigInt;

use nilfix_core::IntegerMatrix;

/// Deterministic pseudo-random integer matrices without pulling in an RNG.
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.state
    }

    pub fn next_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn integer_matrix(&mut self, n: usize, bound: i64) -> IntegerMatrix {
        let entries: Vec<BigInt> =
            (0..n * n).map(|_| BigInt::from(self.next_in(-bound, bound))).collect();
        IntegerMatrix::new(n, n, entries).expect("square shape")
    }
}
