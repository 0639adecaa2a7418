use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded random permutation of the coded-bit positions of a frame.
/// `interleave` sends input position `i` to output position `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Interleaver { perm }
    }

    pub fn identity(len: usize) -> Self {
        Interleaver {
            perm: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy + Default>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len());
        let mut out = vec![T::default(); input.len()];
        for (v, &p) in input.iter().zip(&self.perm) {
            out[p] = *v;
        }
        out
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len());
        self.perm.iter().map(|&p| input[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_bijection() {
        let il = Interleaver::new(1000, 3);
        let mut seen = vec![false; 1000];
        for &p in il.permutation() {
            assert!(!seen[p]);
            seen[p] = true;
        }
        assert_ne!(il, Interleaver::identity(1000));
        assert_eq!(il, Interleaver::new(1000, 3));
        assert_ne!(il, Interleaver::new(1000, 4));
    }

    #[test]
    fn round_trip() {
        let il = Interleaver::new(37, 11);
        let data: Vec<u32> = (0..37).map(|i| i * 7 + 1).collect();
        assert_eq!(il.deinterleave(&il.interleave(&data)), data);
        assert_eq!(il.interleave(&il.deinterleave(&data)), data);
    }
}
