use std::cmp::Ordering;
use std::fmt;

/// Inclusion indicators `γ` over `J` groups with cached size and dimension.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModelId {
    words: Vec<u64>,
    len: usize,
    size: usize,
    dim: usize,
}

impl ModelId {
    pub fn empty(n_groups: usize) -> Self {
        Self { words: vec![0; n_groups.div_ceil(64)], len: n_groups, size: 0, dim: 0 }
    }

    pub fn from_bits(bits: &[bool], group_sizes: &[usize]) -> Self {
        assert_eq!(bits.len(), group_sizes.len(), "one bit per group");
        let mut m = Self::empty(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b {
                m.set(j, true, group_sizes);
            }
        }
        m
    }

    pub fn from_active(n_groups: usize, active: &[usize], group_sizes: &[usize]) -> Self {
        let mut m = Self::empty(n_groups);
        for &j in active {
            m.set(j, true, group_sizes);
        }
        m
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(bits: &str, group_sizes: &[usize]) -> Option<Self> {
        let b: Option<Vec<bool>> = bits
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        let b = b?;
        (b.len() == group_sizes.len()).then(|| Self::from_bits(&b, group_sizes))
    }

    pub fn n_groups(&self) -> usize {
        self.len
    }

    /// Number of active groups `|γ|`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of active columns `p_γ`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize, on: bool, group_sizes: &[usize]) {
        if self.contains(j) == on {
            return;
        }
        let mask = 1u64 << (j % 64);
        if on {
            self.words[j / 64] |= mask;
            self.size += 1;
            self.dim += group_sizes[j];
        } else {
            self.words[j / 64] &= !mask;
            self.size -= 1;
            self.dim -= group_sizes[j];
        }
    }

    pub fn with(&self, j: usize, on: bool, group_sizes: &[usize]) -> Self {
        let mut m = self.clone();
        m.set(j, on, group_sizes);
        m
    }

    /// Active group indices in increasing order.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| self.contains(j))
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|j| self.contains(j)).collect()
    }

    pub fn bit_string(&self) -> String {
        (0..self.len).map(|j| if self.contains(j) { '1' } else { '0' }).collect()
    }
}

impl Ord for ModelId {
    /// Lexicographic on the bit string `γ_1 γ_2 … γ_J`.
    fn cmp(&self, other: &Self) -> Ordering {
        for j in 0..self.len.min(other.len) {
            match (self.contains(j), other.contains(j)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for ModelId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelId({})", self.bit_string())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}
