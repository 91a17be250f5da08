use std::fmt;

use super::{check_universe, ModelError, QCategory};

/// Category of object `object` (1-based) in the world with encoding `world`.
#[inline]
pub fn category_code(world: usize, object: usize) -> u8 {
    ((world >> (2 * (object - 1))) & 0b11) as u8
}

/// Number of objects in `world` (of size `n`) whose category is in F.
#[inline]
pub fn f_count(world: usize, n: usize) -> usize {
    // F is the high bit of each two-bit slot.
    let mask = (0..n).fold(0usize, |m, i| m | (0b10 << (2 * i)));
    (world & mask).count_ones() as usize
}

/// Per-category counts of a world, indexed by category code.
#[inline]
pub fn code_counts(world: usize, n: usize) -> [u8; 4] {
    let mut counts = [0u8; 4];
    for b in 1..=n {
        counts[category_code(world, b) as usize] += 1;
    }
    counts
}

/// One complete description vector: a category for each object 1..=n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct World {
    categories: Vec<QCategory>,
}

impl World {
    pub fn new(categories: Vec<QCategory>) -> Result<World, ModelError> {
        check_universe(categories.len())?;
        Ok(World { categories })
    }

    pub fn decode(n: usize, index: usize) -> Result<World, ModelError> {
        check_universe(n)?;
        if index >= super::world_count(n) {
            return Err(ModelError::WorldOutOfRange { index, n });
        }
        let categories = (1..=n).map(|b| QCategory::from_code(category_code(index, b))).collect();
        Ok(World { categories })
    }

    pub fn encode(&self) -> usize {
        self.categories
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, q)| acc | ((q.code() as usize) << (2 * i)))
    }

    pub fn universe_size(&self) -> usize {
        self.categories.len()
    }

    /// Category of a 1-based object.
    pub fn category(&self, object: usize) -> QCategory {
        self.categories[object - 1]
    }

    pub fn categories(&self) -> &[QCategory] {
        &self.categories
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.categories.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}_{}", q.name(), i + 1)?;
        }
        Ok(())
    }
}
