use std::fmt::Write as _;

use super::{check_universe, ModelError};

/// A set of worlds over a universe of size `n`, stored as a bit vector of
/// length 4^n indexed by world encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    n: usize,
    words: Vec<u64>,
}

pub fn world_count(n: usize) -> usize {
    1usize << (2 * n)
}

impl Event {
    pub fn empty(n: usize) -> Event {
        let len = world_count(n).div_ceil(64);
        Event { n, words: vec![0; len] }
    }

    pub fn full(n: usize) -> Event {
        Event::empty(n).complement()
    }

    /// Builds the event `{w : pred(w)}` by scanning all worlds.
    pub fn from_fn(n: usize, mut pred: impl FnMut(usize) -> bool) -> Event {
        let count = world_count(n);
        let mut words = vec![0u64; count.div_ceil(64)];
        for (wi, word) in words.iter_mut().enumerate() {
            let base = wi * 64;
            let end = (base + 64).min(count);
            let mut bits = 0u64;
            for w in base..end {
                if pred(w) {
                    bits |= 1 << (w - base);
                }
            }
            *word = bits;
        }
        Event { n, words }
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn world_count(&self) -> usize {
        world_count(self.n)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn contains(&self, world: usize) -> bool {
        self.words[world / 64] & (1 << (world % 64)) != 0
    }

    pub fn insert(&mut self, world: usize) {
        self.words[world / 64] |= 1 << (world % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.world_count()
    }

    fn tail_mask(&self) -> u64 {
        let rem = self.world_count() % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    fn assert_same_universe(&self, other: &Event) {
        assert_eq!(self.n, other.n, "events over different universe sizes");
    }

    pub fn intersection(&self, other: &Event) -> Event {
        self.assert_same_universe(other);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Event { n: self.n, words }
    }

    pub fn union(&self, other: &Event) -> Event {
        self.assert_same_universe(other);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Event { n: self.n, words }
    }

    pub fn difference(&self, other: &Event) -> Event {
        self.intersection(&other.complement())
    }

    pub fn complement(&self) -> Event {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= self.tail_mask();
        }
        Event { n: self.n, words }
    }

    pub fn intersect_with(&mut self, other: &Event) {
        self.assert_same_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.assert_same_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.assert_same_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Member worlds in increasing encoding order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// `evt:N=<n>:` followed by lowercase hex. Each hex digit covers four
    /// consecutive worlds, lowest world in its least significant bit, and
    /// digits run from world 0 upwards.
    pub fn dump(&self) -> String {
        let count = self.world_count();
        let mut out = format!("evt:N={}:", self.n);
        let nibbles = count.div_ceil(4);
        for i in 0..nibbles {
            let word = self.words[(i * 4) / 64];
            let nibble = (word >> ((i * 4) % 64)) & 0xf;
            let _ = write!(out, "{nibble:x}");
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Event, ModelError> {
        let bad = |reason: &str| ModelError::BadEventDump(reason.to_string());
        let rest = text.strip_prefix("evt:N=").ok_or_else(|| bad("missing evt:N= prefix"))?;
        let (n, hex) = rest.split_once(':').ok_or_else(|| bad("missing ':' after size"))?;
        let n: usize = n.parse().map_err(|_| bad("universe size is not an integer"))?;
        check_universe(n)?;
        let mut event = Event::empty(n);
        if hex.len() != world_count(n).div_ceil(4) {
            return Err(bad("hex length does not match 4^N worlds"));
        }
        for (i, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .filter(|_| !c.is_ascii_uppercase())
                .ok_or_else(|| bad("non-lowercase-hex digit"))? as u64;
            for j in 0..4 {
                let w = i * 4 + j;
                if nibble & (1 << j) != 0 {
                    if w >= event.world_count() {
                        return Err(bad("bit set beyond last world"));
                    }
                    event.insert(w);
                }
            }
        }
        Ok(event)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_masks_tail() {
        let e = Event::full(1);
        assert_eq!(e.len(), 4);
        assert_eq!(e.words(), &[0b1111]);
        assert!(Event::full(1).complement().is_empty());
    }

    #[test]
    fn dump_round_trip() {
        let e = Event::from_fn(2, |w| w % 3 == 0);
        let text = e.dump();
        assert!(text.starts_with("evt:N=2:"));
        assert_eq!(text.len(), "evt:N=2:".len() + 4);
        assert_eq!(Event::from_dump(&text).unwrap(), e);
        assert_eq!(Event::from_fn(1, |w| w == 0).dump(), "evt:N=1:1");
        assert_eq!(Event::from_fn(1, |w| w == 3).dump(), "evt:N=1:8");
        assert!(Event::from_dump("evt:N=1:F").is_err());
        assert!(Event::from_dump("evt:N=2:f").is_err());
    }

    #[test]
    fn iteration_in_order() {
        let e = Event::from_fn(4, |w| w % 50 == 1);
        let v: Vec<_> = e.iter().collect();
        assert_eq!(v, vec![1, 51, 101, 151, 201, 251]);
    }
}
